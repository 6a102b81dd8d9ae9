//! Cell-wise kernels over column-major bit storage.
//!
//! A table is stored as `n_cols` consecutive chunks of `words_per_col` words;
//! bit `j % 64` of word `j / 64` in a chunk is row `j` of that column. Every
//! kernel treats columns independently, so the [`seq`] and [`par`] variants
//! produce bit-identical results. The unqualified functions at the module
//! root dispatch to [`par`] when the `parallel` feature is enabled.

/// Below this many words the parallel kernels split no further.
pub const PAR_MIN_WORDS: usize = 4096;

pub mod seq {
    pub fn union_into(dst: &mut [u64], src: &[u64]) {
        debug_assert_eq!(dst.len(), src.len());
        for (d, s) in dst.iter_mut().zip(src) {
            *d |= *s;
        }
    }

    /// True iff every bit set in `a` is set in `f`.
    pub fn is_subset(a: &[u64], f: &[u64]) -> bool {
        debug_assert_eq!(a.len(), f.len());
        a.iter().zip(f).all(|(a, f)| a & !f == 0)
    }

    pub fn column_counts(bits: &[u64], words_per_col: usize) -> Vec<u32> {
        bits.chunks(words_per_col)
            .map(|col| col.iter().map(|w| w.count_ones()).sum())
            .collect()
    }
}

#[cfg(feature = "parallel")]
pub mod par {
    use super::PAR_MIN_WORDS;
    use rayon::prelude::*;

    pub fn union_into(dst: &mut [u64], src: &[u64]) {
        debug_assert_eq!(dst.len(), src.len());
        dst.par_iter_mut()
            .zip(src.par_iter())
            .with_min_len(PAR_MIN_WORDS)
            .for_each(|(d, s)| *d |= *s);
    }

    pub fn is_subset(a: &[u64], f: &[u64]) -> bool {
        debug_assert_eq!(a.len(), f.len());
        a.par_iter()
            .zip(f.par_iter())
            .with_min_len(PAR_MIN_WORDS)
            .all(|(a, f)| a & !f == 0)
    }

    pub fn column_counts(bits: &[u64], words_per_col: usize) -> Vec<u32> {
        let min_cols = (PAR_MIN_WORDS / words_per_col).max(1);
        bits.par_chunks(words_per_col)
            .with_min_len(min_cols)
            .map(|col| col.iter().map(|w| w.count_ones()).sum())
            .collect()
    }
}

#[cfg(feature = "parallel")]
pub use par::{column_counts, is_subset, union_into};
#[cfg(not(feature = "parallel"))]
pub use seq::{column_counts, is_subset, union_into};
