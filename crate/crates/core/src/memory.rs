//! Associative memory: one relation table (register) per class label.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::reduction::reduction;
use crate::table::{cue_containment, CueFunction, EntropyValue, RelationTable};

#[derive(Clone, Debug, PartialEq)]
pub struct AssociativeMemory {
    labels: Vec<String>,
    registers: Vec<RelationTable>,
    entropies: Vec<EntropyValue>,
    n_cols: usize,
    n_rows: usize,
}

/// Outcome of presenting a cue to every register.
#[derive(Clone, Debug, PartialEq)]
pub struct RecognitionReport {
    pub labels: Vec<String>,
    pub verdicts: Vec<bool>,
    pub entropies: Vec<EntropyValue>,
    pub selected: Option<usize>,
}

impl RecognitionReport {
    pub fn selected_label(&self) -> Option<&str> {
        self.selected.map(|k| self.labels[k].as_str())
    }

    pub fn accepted(&self) -> impl Iterator<Item = &str> {
        self.labels
            .iter()
            .zip(&self.verdicts)
            .filter(|(_, &v)| v)
            .map(|(l, _)| l.as_str())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Retrieval {
    pub label: String,
    pub function: CueFunction,
}

impl AssociativeMemory {
    /// A memory with one empty register per label.
    pub fn new<S: Into<String>>(
        labels: impl IntoIterator<Item = S>,
        n_cols: usize,
        n_rows: usize,
    ) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let empty = RelationTable::new(n_cols, n_rows)?;
        let registers = vec![empty; labels.len()];
        Self::from_parts(labels, registers, n_cols, n_rows)
    }

    pub fn from_parts(
        labels: Vec<String>,
        registers: Vec<RelationTable>,
        n_cols: usize,
        n_rows: usize,
    ) -> Result<Self> {
        if n_cols == 0 || n_rows == 0 {
            return Err(Error::EmptyShape { n_cols, n_rows });
        }
        for (k, l) in labels.iter().enumerate() {
            if labels[..k].contains(l) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        if labels.len() != registers.len() {
            return Err(Error::Format(format!(
                "{} labels but {} registers",
                labels.len(),
                registers.len()
            )));
        }
        for r in &registers {
            if r.shape() != (n_cols, n_rows) {
                return Err(Error::DimensionMismatch {
                    left_cols: r.n_cols(),
                    left_rows: r.n_rows(),
                    right_cols: n_cols,
                    right_rows: n_rows,
                });
            }
        }
        let entropies = registers.iter().map(RelationTable::entropy).collect();
        Ok(Self {
            labels,
            registers,
            entropies,
            n_cols,
            n_rows,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn registers(&self) -> &[RelationTable] {
        &self.registers
    }

    pub fn entropies(&self) -> &[EntropyValue] {
        &self.entropies
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_cols, self.n_rows)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_owned()))
    }

    pub fn register_of(&self, label: &str) -> Result<&RelationTable> {
        Ok(&self.registers[self.index_of(label)?])
    }

    pub fn mean_entropy(&self) -> f64 {
        if self.entropies.is_empty() {
            return 0.0;
        }
        self.entropies.iter().map(|e| e.bits()).sum::<f64>() / self.entropies.len() as f64
    }

    /// Abstracts `obj` into the register for `label`.
    pub fn register(&mut self, label: &str, obj: &CueFunction) -> Result<()> {
        let k = self.index_of(label)?;
        self.registers[k].absorb_cue(obj)?;
        self.entropies[k] = self.registers[k].entropy();
        Ok(())
    }

    /// Tests the cue against every register. Among the accepting registers
    /// the one with the lowest entropy is selected; ties go to the earlier label.
    pub fn recognize(&self, cue: &CueFunction) -> Result<RecognitionReport> {
        cue.check_shape(self.n_cols, self.n_rows)?;
        #[cfg(feature = "parallel")]
        let verdicts = self
            .registers
            .par_iter()
            .map(|r| cue_containment(cue, r))
            .collect::<Result<Vec<bool>>>()?;
        #[cfg(not(feature = "parallel"))]
        let verdicts = self
            .registers
            .iter()
            .map(|r| cue_containment(cue, r))
            .collect::<Result<Vec<bool>>>()?;

        let selected = select_min_entropy(&verdicts, &self.entropies);
        Ok(RecognitionReport {
            labels: self.labels.clone(),
            verdicts,
            entropies: self.entropies.clone(),
            selected,
        })
    }

    /// Recognises the cue, then reduces it against the selected register.
    pub fn retrieve(&self, cue: &CueFunction, seed: u64, sigma: f64) -> Result<Retrieval> {
        let report = self.recognize(cue)?;
        let k = report.selected.ok_or(Error::RetrievalUndefined)?;
        Ok(Retrieval {
            label: self.labels[k].clone(),
            function: reduction(cue, &self.registers[k], seed, sigma)?,
        })
    }
}

fn select_min_entropy(verdicts: &[bool], entropies: &[EntropyValue]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (k, &accepted) in verdicts.iter().enumerate() {
        if accepted && best.is_none_or(|b| entropies[k].bits() < entropies[b].bits()) {
            best = Some(k);
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::containment;

    fn digits(n_cols: usize, n_rows: usize) -> AssociativeMemory {
        AssociativeMemory::new((0..10).map(|d| d.to_string()), n_cols, n_rows).unwrap()
    }

    #[test]
    fn construction_errors() {
        assert!(matches!(
            AssociativeMemory::new(["a", "b", "a"], 2, 2),
            Err(Error::DuplicateLabel(_))
        ));
        assert!(AssociativeMemory::new(Vec::<String>::new(), 2, 2)
            .unwrap()
            .is_empty());
        let wrong = vec![RelationTable::new(3, 2).unwrap()];
        assert!(AssociativeMemory::from_parts(vec!["x".into()], wrong, 2, 2).is_err());
    }

    #[test]
    fn register_examples() {
        let mut mem = digits(4, 3);
        let obj = CueFunction::total(vec![0, 1, 2, 0]);
        mem.register("5", &obj).unwrap();
        assert_eq!(mem.register_of("5").unwrap(), &obj.to_table(3).unwrap());
        assert_eq!(mem.entropies()[5].bits(), 0.0);

        let once = mem.clone();
        mem.register("5", &obj).unwrap();
        assert_eq!(mem, once);

        mem.register("5", &CueFunction::total(vec![0, 1, 1, 0])).unwrap();
        assert!((mem.entropies()[5].bits() - 1.0 / 4.0).abs() < 1e-9);

        assert!(matches!(
            mem.register("x", &obj),
            Err(Error::UnknownLabel(_))
        ));
        assert!(mem.register("5", &CueFunction::total(vec![0, 1, 3, 0])).is_err());
        assert!(mem.register("5", &CueFunction::total(vec![0, 1])).is_err());
    }

    #[test]
    fn recognize_examples() {
        let mut mem = digits(3, 4);
        let cue = CueFunction::total(vec![1, 2, 3]);
        mem.register("3", &cue).unwrap();
        mem.register("4", &CueFunction::total(vec![0, 0, 0])).unwrap();
        let rep = mem.recognize(&cue).unwrap();
        assert_eq!(rep.verdicts.iter().filter(|&&v| v).count(), 1);
        assert!(rep.verdicts[3]);
        assert_eq!(rep.selected_label(), Some("3"));

        let stranger = CueFunction::total(vec![3, 3, 3]);
        let rep = mem.recognize(&stranger).unwrap();
        assert!(rep.verdicts.iter().all(|v| !v));
        assert_eq!(rep.selected, None);

        assert!(mem.recognize(&CueFunction::total(vec![1, 2])).is_err());
    }

    #[test]
    fn selection_entropies_point_eight_and_one_point_four() {
        // entropies 0.8 and 1.4 over 5 columns: sums of log2(mu) of 4 and 7
        let mu_a = [4, 4, 1, 1, 1];
        let a = RelationTable::from_fn(5, 4, |i, j| j < mu_a[i]).unwrap();
        let mu_b = [4, 4, 4, 2, 1];
        let b = RelationTable::from_fn(5, 4, |i, j| j < mu_b[i]).unwrap();
        assert!((a.entropy().bits() - 0.8).abs() < 1e-9);
        assert!((b.entropy().bits() - 1.4).abs() < 1e-9);
        let mem = AssociativeMemory::from_parts(vec!["hi".into(), "lo".into()], vec![b, a], 5, 4).unwrap();
        let rep = mem.recognize(&CueFunction::total(vec![0; 5])).unwrap();
        assert_eq!(rep.selected_label(), Some("lo"));
    }

    #[test]
    fn ties_break_by_label_order() {
        let r = RelationTable::from_fn(2, 2, |_, j| j == 0).unwrap();
        let mem = AssociativeMemory::from_parts(vec!["b".into(), "a".into()], vec![r.clone(), r], 2, 2).unwrap();
        let rep = mem.recognize(&CueFunction::total(vec![0, 0])).unwrap();
        assert_eq!(rep.selected_label(), Some("b"));
    }

    #[test]
    fn retrieve_examples() {
        let mut mem = digits(6, 8);
        let inst = CueFunction::total(vec![0, 7, 3, 3, 5, 1]);
        mem.register("2", &inst).unwrap();
        let got = mem.retrieve(&inst, 11, 1.0).unwrap();
        assert_eq!(got.label, "2");
        assert_eq!(got.function, inst);

        mem.register("2", &CueFunction::total(vec![1, 6, 4, 2, 5, 0])).unwrap();
        for seed in 0..50 {
            let got = mem.retrieve(&inst, seed, 1.0).unwrap();
            let t = got.function.to_table(8).unwrap();
            assert!(containment(&t, mem.register_of("2").unwrap()).unwrap());
        }

        assert!(matches!(
            mem.retrieve(&CueFunction::total(vec![7; 6]), 0, 1.0),
            Err(Error::RetrievalUndefined)
        ));
    }

    #[test]
    fn generalizes_to_unseen_constituents() {
        let mut mem = digits(4, 4);
        let a = CueFunction::total(vec![0, 0, 0, 0]);
        let b = CueFunction::total(vec![3, 3, 3, 3]);
        mem.register("1", &a).unwrap();
        mem.register("1", &b).unwrap();
        let mix = CueFunction::total(vec![0, 3, 0, 3]);
        assert_eq!(mem.recognize(&mix).unwrap().selected_label(), Some("1"));
    }
}
