//! Row-parallel fill helpers.
//!
//! Parallelism is only ever applied across independent output slots (rows of
//! a matrix, slots of a result vector, independent trials). Each slot is
//! computed by a single sequential closure, so results are bit-identical
//! with and without the `parallel` feature.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Fills `out`, viewed as consecutive rows of width `cols`, by calling
/// `f(row_index, row_slice)` for every row.
pub fn fill_rows<F>(out: &mut [f64], cols: usize, f: F)
where
    F: Fn(usize, &mut [f64]) + Sync,
{
    #[cfg(feature = "parallel")]
    {
        out.par_chunks_mut(cols)
            .enumerate()
            .for_each(|(i, row)| f(i, row));
    }
    #[cfg(not(feature = "parallel"))]
    {
        out.chunks_mut(cols).enumerate().for_each(|(i, row)| f(i, row));
    }
}

/// Sequential counterpart of [`fill_rows`], always available for benches and
/// for callers that want to avoid thread-pool overhead on small inputs.
pub fn fill_rows_seq<F>(out: &mut [f64], cols: usize, f: F)
where
    F: Fn(usize, &mut [f64]),
{
    out.chunks_mut(cols).enumerate().for_each(|(i, row)| f(i, row));
}

/// Maps `0..n` through `f`, collecting results in index order.
pub fn map_indexed<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).map(f).collect()
    }
}

/// Sequential counterpart of [`map_indexed`].
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}
