//! Stochastic functional application of a relation to a cue.
//!
//! Each column draws one of its marked rows with probability proportional to
//! a gaussian kernel centred on the cue's row for that column, or uniformly
//! when the cue leaves the column undefined. Column `i` uses ChaCha8 stream
//! `i` of the caller's seed, so results do not depend on evaluation order.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::table::{cue_containment, CueFunction, RelationTable};

pub const DEFAULT_SIGMA: f64 = 1.0;

/// Unnormalised kernel weight of drawing `row` given cue row `centre`.
pub fn kernel_weight(row: usize, centre: usize, sigma: f64) -> f64 {
    let d = row as f64 - centre as f64;
    (-(d * d) / (2.0 * sigma * sigma)).exp()
}

fn draw_column(f: &RelationTable, cue: &CueFunction, col: usize, seed: u64, sigma: f64) -> Option<usize> {
    let rows: Vec<usize> = f.marked_rows(col).collect();
    match rows.len() {
        0 => None,
        1 => Some(rows[0]),
        _ => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(col as u64);
            let k = match cue.get(col) {
                Some(centre) => {
                    let weights = rows.iter().map(|&j| kernel_weight(j, centre, sigma));
                    // centre is marked, so its weight of 1.0 keeps the total positive
                    let dist = WeightedIndex::new(weights).expect("positive total weight");
                    dist.sample(&mut rng)
                }
                None => rng.random_range(0..rows.len()),
            };
            Some(rows[k])
        }
    }
}

fn validate(cue: &CueFunction, f: &RelationTable, sigma: f64) -> Result<()> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::InvalidSigma(sigma));
    }
    if !cue_containment(cue, f)? {
        return Err(Error::ReductionUndefined);
    }
    Ok(())
}

pub fn reduction_seq(cue: &CueFunction, f: &RelationTable, seed: u64, sigma: f64) -> Result<CueFunction> {
    validate(cue, f, sigma)?;
    Ok(CueFunction::partial(
        (0..f.n_cols())
            .map(|i| draw_column(f, cue, i, seed, sigma))
            .collect(),
    ))
}

#[cfg(feature = "parallel")]
pub fn reduction_par(cue: &CueFunction, f: &RelationTable, seed: u64, sigma: f64) -> Result<CueFunction> {
    use rayon::prelude::*;
    validate(cue, f, sigma)?;
    Ok(CueFunction::partial(
        (0..f.n_cols())
            .into_par_iter()
            .with_min_len(256)
            .map(|i| draw_column(f, cue, i, seed, sigma))
            .collect(),
    ))
}

/// Returns a constituent function of `f` chosen around `cue`.
///
/// Fails with [`Error::ReductionUndefined`] when `cue` is not contained in
/// `f`. Columns of `f` without marks are undefined in the result.
pub fn reduction(cue: &CueFunction, f: &RelationTable, seed: u64, sigma: f64) -> Result<CueFunction> {
    #[cfg(feature = "parallel")]
    {
        reduction_par(cue, f, seed, sigma)
    }
    #[cfg(not(feature = "parallel"))]
    {
        reduction_seq(cue, f, seed, sigma)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::table::containment;

    fn fork() -> RelationTable {
        RelationTable::from_marks(2, 2, [(0, 0), (0, 1), (1, 0)]).unwrap()
    }

    #[test]
    fn function_table_returns_cue() {
        let f = RelationTable::from_marks(4, 5, [(0, 3), (1, 0), (2, 4), (3, 2)]).unwrap();
        let cue = CueFunction::from_table(&f).unwrap();
        for seed in 0..20 {
            assert_eq!(reduction(&cue, &f, seed, 1.0).unwrap(), cue);
        }
    }

    #[test]
    fn forced_column() {
        let cue = CueFunction::total(vec![0, 0]);
        for seed in 0..50 {
            let out = reduction(&cue, &fork(), seed, 1.0).unwrap();
            assert_eq!(out.get(1), Some(0));
            assert!(matches!(out.get(0), Some(0) | Some(1)));
        }
    }

    #[test]
    fn rejects_uncontained_cue_and_bad_sigma() {
        let cue = CueFunction::total(vec![1, 1]);
        assert!(matches!(
            reduction(&cue, &fork(), 0, 1.0),
            Err(Error::ReductionUndefined)
        ));
        let ok = CueFunction::total(vec![0, 0]);
        for sigma in [0.0, -1.0, f64::NAN, f64::INFINITY] {
            assert!(matches!(
                reduction(&ok, &fork(), 0, sigma),
                Err(Error::InvalidSigma(_))
            ));
        }
    }

    #[test]
    fn empty_columns_stay_undefined_and_silent_columns_are_uniform() {
        let f = RelationTable::from_marks(3, 4, [(0, 0), (0, 3), (2, 1)]).unwrap();
        let cue = CueFunction::partial(vec![None, None, Some(1)]);
        let mut hits = [0usize; 4];
        for seed in 0..4000 {
            let out = reduction(&cue, &f, seed, 0.5).unwrap();
            assert_eq!(out.get(1), None);
            assert_eq!(out.get(2), Some(1));
            hits[out.get(0).unwrap()] += 1;
            assert!(containment(&out.to_table(4).unwrap(), &f).unwrap());
        }
        assert_eq!(hits[1] + hits[2], 0);
        let frac = hits[0] as f64 / 4000.0;
        assert!((frac - 0.5).abs() < 0.03, "{frac}");
    }

    #[test]
    fn deterministic_per_seed() {
        let f = RelationTable::from_fn(32, 16, |i, j| (i + j) % 3 != 0).unwrap();
        let cue = CueFunction::total((0..32).map(|i| (0..16).find(|j| (i + j) % 3 != 0).unwrap()).collect());
        let a = reduction_seq(&cue, &f, 99, 2.0).unwrap();
        assert_eq!(a, reduction_seq(&cue, &f, 99, 2.0).unwrap());
        assert_eq!(a, reduction(&cue, &f, 99, 2.0).unwrap());
        assert_ne!(a, reduction_seq(&cue, &f, 100, 2.0).unwrap());
    }

    #[test]
    fn kernel_weight_shape() {
        assert_eq!(kernel_weight(3, 3, 1.0), 1.0);
        assert!((kernel_weight(4, 3, 1.0) - (-0.5f64).exp()).abs() < 1e-15);
        assert_eq!(kernel_weight(1, 3, 2.0), kernel_weight(5, 3, 2.0));
    }
}
