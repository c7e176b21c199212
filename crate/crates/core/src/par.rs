//! Row sweeps that run on rayon when the `parallel` feature is on.
//!
//! Every row is produced by the same closure regardless of scheduling, so the
//! parallel and sequential paths write identical bits.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

pub(crate) fn fill_rows<T, F>(out: &mut [T], width: usize, f: F)
where
    T: Send,
    F: Fn(usize, &mut [T]) + Sync + Send,
{
    #[cfg(feature = "parallel")]
    out.par_chunks_mut(width)
        .enumerate()
        .for_each(|(y, row)| f(y, row));
    #[cfg(not(feature = "parallel"))]
    out.chunks_mut(width)
        .enumerate()
        .for_each(|(y, row)| f(y, row));
}
