//! Relation tables, cue functions and the table operations: abstraction,
//! containment, entropy and constituent enumeration.

use std::fmt;

use crate::error::{Error, Result};
use crate::kernels;

/// Default cap on [`constituent_functions`].
pub const DEFAULT_ENUMERATION_CAP: u128 = 1 << 20;

/// A finite relation between `n_cols` arguments and `n_rows` values, held as
/// a bit table. Cell `(i, j)` is set iff argument `i` is related to value `j`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RelationTable {
    n_cols: usize,
    n_rows: usize,
    words_per_col: usize,
    bits: Vec<u64>,
}

impl RelationTable {
    /// An all-false table.
    pub fn new(n_cols: usize, n_rows: usize) -> Result<Self> {
        if n_cols == 0 || n_rows == 0 {
            return Err(Error::EmptyShape { n_cols, n_rows });
        }
        let words_per_col = n_rows.div_ceil(64);
        Ok(Self {
            n_cols,
            n_rows,
            words_per_col,
            bits: vec![0; n_cols * words_per_col],
        })
    }

    /// Builds a table from a list of `(column, row)` marks.
    pub fn from_marks(
        n_cols: usize,
        n_rows: usize,
        marks: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut t = Self::new(n_cols, n_rows)?;
        for (i, j) in marks {
            t.set(i, j, true)?;
        }
        Ok(t)
    }

    pub fn from_fn(
        n_cols: usize,
        n_rows: usize,
        mut cell: impl FnMut(usize, usize) -> bool,
    ) -> Result<Self> {
        let mut t = Self::new(n_cols, n_rows)?;
        for i in 0..n_cols {
            for j in 0..n_rows {
                if cell(i, j) {
                    t.set(i, j, true)?;
                }
            }
        }
        Ok(t)
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_cols, self.n_rows)
    }

    fn check(&self, col: usize, row: usize) -> Result<()> {
        if col >= self.n_cols || row >= self.n_rows {
            return Err(Error::OutOfRange {
                col,
                row,
                n_cols: self.n_cols,
                n_rows: self.n_rows,
            });
        }
        Ok(())
    }

    #[inline]
    fn word_bit(&self, col: usize, row: usize) -> (usize, u64) {
        (col * self.words_per_col + row / 64, 1u64 << (row % 64))
    }

    pub fn get(&self, col: usize, row: usize) -> Result<bool> {
        self.check(col, row)?;
        Ok(self.cell(col, row))
    }

    /// Unchecked read for callers that already validated the indices.
    #[inline]
    pub(crate) fn cell(&self, col: usize, row: usize) -> bool {
        let (w, b) = self.word_bit(col, row);
        self.bits[w] & b != 0
    }

    pub(crate) fn set(&mut self, col: usize, row: usize, value: bool) -> Result<()> {
        self.check(col, row)?;
        let (w, b) = self.word_bit(col, row);
        if value {
            self.bits[w] |= b;
        } else {
            self.bits[w] &= !b;
        }
        Ok(())
    }

    /// Number of marked rows in column `col` (the column's multiplicity).
    pub fn marks_in_column(&self, col: usize) -> usize {
        self.column_words(col)
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum()
    }

    /// Multiplicity of every column.
    pub fn column_marks(&self) -> Vec<usize> {
        kernels::column_counts(&self.bits, self.words_per_col)
            .into_iter()
            .map(|c| c as usize)
            .collect()
    }

    /// Marked rows of column `col`, ascending.
    pub fn marked_rows(&self, col: usize) -> impl Iterator<Item = usize> + '_ {
        self.column_words(col)
            .iter()
            .enumerate()
            .flat_map(|(wi, &word)| {
                let mut w = word;
                std::iter::from_fn(move || {
                    if w == 0 {
                        return None;
                    }
                    let tz = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * 64 + tz)
                })
            })
    }

    /// All marks as `(column, row)` pairs, column by column.
    pub fn marks(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n_cols).flat_map(move |i| self.marked_rows(i).map(move |j| (i, j)))
    }

    pub fn is_empty(&self) -> bool {
        self.bits.iter().all(|&w| w == 0)
    }

    fn column_words(&self, col: usize) -> &[u64] {
        let start = col * self.words_per_col;
        &self.bits[start..start + self.words_per_col]
    }

    fn same_shape(&self, other: &RelationTable) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::DimensionMismatch {
                left_cols: self.n_cols,
                left_rows: self.n_rows,
                right_cols: other.n_cols,
                right_rows: other.n_rows,
            });
        }
        Ok(())
    }

    /// In-place abstraction: `self ← self ∪ other`.
    pub fn absorb(&mut self, other: &RelationTable) -> Result<()> {
        self.same_shape(other)?;
        kernels::union_into(&mut self.bits, &other.bits);
        Ok(())
    }

    /// Marks the cells of a cue in place.
    pub fn absorb_cue(&mut self, cue: &CueFunction) -> Result<()> {
        cue.check_against(self)?;
        for (i, j) in cue.defined() {
            let (w, b) = self.word_bit(i, j);
            self.bits[w] |= b;
        }
        Ok(())
    }

    pub fn is_contained_in(&self, f: &RelationTable) -> Result<bool> {
        self.same_shape(f)?;
        Ok(kernels::is_subset(&self.bits, &f.bits))
    }

    pub fn entropy(&self) -> EntropyValue {
        let counts = kernels::column_counts(&self.bits, self.words_per_col);
        let total: f64 = counts
            .iter()
            .map(|&mu| f64::from(mu.max(1)).log2())
            .sum();
        EntropyValue(total / self.n_cols as f64)
    }
}

impl fmt::Debug for RelationTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "RelationTable {}x{}", self.n_cols, self.n_rows)?;
        for j in (0..self.n_rows).rev() {
            let line: String = (0..self.n_cols)
                .map(|i| if self.cell(i, j) { '#' } else { '.' })
                .collect();
            writeln!(f, "  {line}")?;
        }
        Ok(())
    }
}

/// A partial function from column index to row index.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CueFunction {
    assignment: Vec<Option<usize>>,
}

impl CueFunction {
    pub fn partial(assignment: Vec<Option<usize>>) -> Self {
        Self { assignment }
    }

    pub fn total(rows: Vec<usize>) -> Self {
        Self {
            assignment: rows.into_iter().map(Some).collect(),
        }
    }

    pub fn undefined(n_cols: usize) -> Self {
        Self {
            assignment: vec![None; n_cols],
        }
    }

    /// Reads a function off a table with at most one mark per column.
    pub fn from_table(t: &RelationTable) -> Result<Self> {
        let assignment = (0..t.n_cols())
            .map(|i| {
                let mut rows = t.marked_rows(i);
                let first = rows.next();
                match rows.next() {
                    None => Ok(first),
                    Some(_) => Err(Error::NotAFunction {
                        col: i,
                        marks: t.marks_in_column(i),
                    }),
                }
            })
            .collect::<Result<_>>()?;
        Ok(Self { assignment })
    }

    pub fn n_cols(&self) -> usize {
        self.assignment.len()
    }

    pub fn get(&self, col: usize) -> Option<usize> {
        self.assignment.get(col).copied().flatten()
    }

    pub fn assignment(&self) -> &[Option<usize>] {
        &self.assignment
    }

    pub fn is_total(&self) -> bool {
        self.assignment.iter().all(Option::is_some)
    }

    pub fn undefined_columns(&self) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_none())
            .map(|(i, _)| i)
            .collect()
    }

    /// Defined `(column, row)` pairs.
    pub fn defined(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(i, v)| v.map(|j| (i, j)))
    }

    pub fn to_table(&self, n_rows: usize) -> Result<RelationTable> {
        RelationTable::from_marks(self.n_cols(), n_rows, self.defined())
    }

    /// Keeps only the columns where `keep` is true.
    pub fn restrict(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        Self {
            assignment: self
                .assignment
                .iter()
                .enumerate()
                .map(|(i, v)| if keep(i) { *v } else { None })
                .collect(),
        }
    }

    /// Fraction of columns on which both functions are defined and equal.
    pub fn agreement(&self, other: &CueFunction) -> f64 {
        let n = self.n_cols().max(other.n_cols());
        if n == 0 {
            return 1.0;
        }
        let same = self
            .assignment
            .iter()
            .zip(&other.assignment)
            .filter(|(a, b)| a.is_some() && a == b)
            .count();
        same as f64 / n as f64
    }

    pub(crate) fn check_against(&self, t: &RelationTable) -> Result<()> {
        self.check_shape(t.n_cols(), t.n_rows())
    }

    /// Fails unless the cue has `n_cols` columns and every row is below `n_rows`.
    pub fn check_shape(&self, n_cols: usize, n_rows: usize) -> Result<()> {
        let bad_row = self.defined().any(|(_, j)| j >= n_rows);
        if self.n_cols() != n_cols || bad_row {
            let rows = self.defined().map(|(_, j)| j + 1).max().unwrap_or(0);
            return Err(Error::DimensionMismatch {
                left_cols: self.n_cols(),
                left_rows: rows,
                right_cols: n_cols,
                right_rows: n_rows,
            });
        }
        Ok(())
    }
}

/// Average per-column indeterminacy of a relation, in bits.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Default)]
pub struct EntropyValue(f64);

impl EntropyValue {
    pub fn bits(self) -> f64 {
        self.0
    }
}

impl fmt::Display for EntropyValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.6}", self.0)
    }
}

/// Cell-wise union of two same-shaped relations.
pub fn abstraction(f: &RelationTable, a: &RelationTable) -> Result<RelationTable> {
    let mut out = f.clone();
    out.absorb(a)?;
    Ok(out)
}

/// Material implication over every cell: true iff each mark of `a` is a mark of `f`.
pub fn containment(a: &RelationTable, f: &RelationTable) -> Result<bool> {
    a.is_contained_in(f)
}

/// Containment of a cue's table view, without materialising the table.
pub fn cue_containment(cue: &CueFunction, f: &RelationTable) -> Result<bool> {
    cue.check_against(f)?;
    Ok(cue.defined().all(|(i, j)| f.cell(i, j)))
}

pub fn entropy(r: &RelationTable) -> EntropyValue {
    r.entropy()
}

/// Every function obtained by choosing one marked row in each non-empty
/// column. Empty columns stay undefined. Ordered lexicographically by column
/// 0 first.
pub fn constituent_functions(r: &RelationTable) -> Result<Vec<CueFunction>> {
    constituent_functions_capped(r, DEFAULT_ENUMERATION_CAP)
}

pub fn constituent_count(r: &RelationTable) -> u128 {
    r.column_marks()
        .into_iter()
        .filter(|&mu| mu > 0)
        .fold(1u128, |acc, mu| acc.saturating_mul(mu as u128))
}

pub fn constituent_functions_capped(r: &RelationTable, cap: u128) -> Result<Vec<CueFunction>> {
    let count = constituent_count(r);
    if count > cap {
        return Err(Error::EnumerationCap { count, cap });
    }
    let choices: Vec<Vec<usize>> = (0..r.n_cols()).map(|i| r.marked_rows(i).collect()).collect();
    let mut cursor = vec![0usize; r.n_cols()];
    let mut out = Vec::with_capacity(count as usize);
    loop {
        out.push(CueFunction::partial(
            choices
                .iter()
                .zip(&cursor)
                .map(|(rows, &k)| rows.get(k).copied())
                .collect(),
        ));
        // odometer, last column fastest
        let mut col = r.n_cols();
        loop {
            if col == 0 {
                return Ok(out);
            }
            col -= 1;
            if choices[col].is_empty() {
                continue;
            }
            cursor[col] += 1;
            if cursor[col] < choices[col].len() {
                break;
            }
            cursor[col] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(n: usize, m: usize, marks: &[(usize, usize)]) -> RelationTable {
        RelationTable::from_marks(n, m, marks.iter().copied()).unwrap()
    }

    #[test]
    fn shape_and_range_errors() {
        assert!(matches!(
            RelationTable::new(0, 3),
            Err(Error::EmptyShape { .. })
        ));
        let r = RelationTable::new(2, 3).unwrap();
        assert!(!r.get(1, 2).unwrap());
        assert!(matches!(r.get(2, 0), Err(Error::OutOfRange { .. })));
        assert!(matches!(r.get(0, 3), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn wide_columns_span_words() {
        let r = t(2, 130, &[(0, 0), (0, 64), (0, 129), (1, 63)]);
        assert_eq!(r.marked_rows(0).collect::<Vec<_>>(), vec![0, 64, 129]);
        assert_eq!(r.column_marks(), vec![3, 1]);
        assert!(r.get(0, 129).unwrap());
        assert!(!r.get(1, 64).unwrap());
    }

    #[test]
    fn abstraction_examples() {
        let f = t(2, 2, &[(0, 0)]);
        let a = t(2, 2, &[(0, 1), (1, 0)]);
        assert_eq!(abstraction(&f, &a).unwrap(), t(2, 2, &[(0, 0), (0, 1), (1, 0)]));
        assert_eq!(abstraction(&a, &a).unwrap(), a);

        let mut acc = RelationTable::new(1, 10).unwrap();
        for k in 0..10 {
            acc = abstraction(&acc, &t(1, 10, &[(0, k)])).unwrap();
        }
        assert_eq!(acc.marks_in_column(0), 10);
        assert_eq!(format!("{:.4}", entropy(&acc).bits()), "3.3219");
    }

    #[test]
    fn abstraction_dimension_mismatch() {
        let err = abstraction(&t(2, 2, &[]), &t(3, 2, &[])).unwrap_err();
        assert_eq!(err.to_string(), "dimension mismatch: 2x2 vs 3x2");
    }

    #[test]
    fn containment_examples() {
        let f = t(2, 2, &[(0, 0), (0, 1), (1, 0)]);
        assert!(containment(&t(2, 2, &[(0, 0), (1, 0)]), &f).unwrap());
        assert!(!containment(&t(2, 2, &[(1, 1)]), &f).unwrap());
        assert!(containment(&t(2, 2, &[]), &f).unwrap());
        assert!(containment(&t(2, 3, &[]), &f).is_err());
    }

    #[test]
    fn cue_containment_agrees_with_table_view() {
        let f = t(2, 2, &[(0, 0), (0, 1), (1, 0)]);
        for cue in [
            CueFunction::total(vec![1, 0]),
            CueFunction::total(vec![1, 1]),
            CueFunction::partial(vec![None, Some(1)]),
            CueFunction::undefined(2),
        ] {
            assert_eq!(
                cue_containment(&cue, &f).unwrap(),
                containment(&cue.to_table(2).unwrap(), &f).unwrap()
            );
        }
        assert!(cue_containment(&CueFunction::total(vec![0, 2]), &f).is_err());
        assert!(cue_containment(&CueFunction::total(vec![0]), &f).is_err());
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(entropy(&t(3, 4, &[(0, 1), (2, 3)])).bits(), 0.0);
        let r = t(2, 3, &[(0, 0), (0, 2), (1, 1)]);
        assert!((entropy(&r).bits() - 0.5).abs() < 1e-9);
        let full = RelationTable::from_fn(5, 8, |_, _| true).unwrap();
        assert!((entropy(&full).bits() - 3.0).abs() < 1e-9);
    }

    #[test]
    fn constituent_examples() {
        let r = t(2, 2, &[(0, 0), (0, 1), (1, 0)]);
        assert_eq!(
            constituent_functions(&r).unwrap(),
            vec![CueFunction::total(vec![0, 0]), CueFunction::total(vec![1, 0])]
        );

        let func = t(3, 4, &[(0, 2), (1, 0), (2, 3)]);
        assert_eq!(
            constituent_functions(&func).unwrap(),
            vec![CueFunction::from_table(&func).unwrap()]
        );

        let full = RelationTable::from_fn(3, 3, |_, _| true).unwrap();
        assert_eq!(constituent_functions(&full).unwrap().len(), 27);

        let partial = t(3, 2, &[(1, 0), (1, 1)]);
        assert_eq!(
            constituent_functions(&partial).unwrap(),
            vec![
                CueFunction::partial(vec![None, Some(0), None]),
                CueFunction::partial(vec![None, Some(1), None]),
            ]
        );
    }

    #[test]
    fn constituent_cap() {
        let full = RelationTable::from_fn(4, 4, |_, _| true).unwrap();
        match constituent_functions_capped(&full, 100) {
            Err(Error::EnumerationCap { count, cap }) => {
                assert_eq!(count, 256);
                assert_eq!(cap, 100);
            }
            other => panic!("expected cap error, got {other:?}"),
        }
        let huge = RelationTable::from_fn(64, 16, |_, _| true).unwrap();
        assert!(constituent_functions(&huge).is_err());
    }

    #[test]
    fn from_table_rejects_relations() {
        let r = t(2, 2, &[(0, 0), (0, 1)]);
        assert!(matches!(
            CueFunction::from_table(&r),
            Err(Error::NotAFunction { col: 0, marks: 2 })
        ));
    }

    #[test]
    fn agreement_counts_equal_defined_columns() {
        let a = CueFunction::partial(vec![Some(1), Some(2), None, Some(0)]);
        let b = CueFunction::partial(vec![Some(1), Some(3), None, Some(0)]);
        assert_eq!(a.agreement(&b), 0.5);
        assert_eq!(a.agreement(&a), 0.75);
    }
}
