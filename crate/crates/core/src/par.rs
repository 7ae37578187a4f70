//! Data-parallel mapping over sample indices.
//!
//! Every Monte Carlo loop in this crate maps a pure function over
//! `0..n` sample indices and then reduces the collected vector in index
//! order. With the `parallel` feature (default) the map runs on rayon;
//! without it, or via [`map_indexed_seq`], it runs sequentially. Both paths
//! produce identical vectors, so all downstream statistics are independent
//! of the schedule and the thread count.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Map `f` over `0..n`, collecting results in index order.
/// Runs on the rayon pool when the `parallel` feature is enabled.
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

/// Sequential fallback with the same contract as [`map_indexed`].
pub fn map_indexed_seq<T, F>(n: usize, f: F) -> Vec<T>
where
    F: Fn(usize) -> T,
{
    (0..n).map(f).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_and_sequential_agree() {
        let f = |i: usize| (i as f64).sin() * (i as f64 + 1.0).ln();
        let a = map_indexed(1000, f);
        let b = map_indexed_seq(1000, f);
        assert_eq!(a, b);
    }
}
