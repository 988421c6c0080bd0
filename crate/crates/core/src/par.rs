//! Data-parallel helpers. With the `parallel` feature (default) `Exec::Parallel`
//! runs on the rayon pool; without it every call runs sequentially.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// True when work will actually be spread over threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Order-preserving map over an integer range `[lo, hi]`.
pub fn map_range<R, F>(exec: Exec, lo: i64, hi: i64, f: F) -> Vec<R>
where
    R: Send,
    F: Fn(i64) -> R + Sync + Send,
{
    if hi < lo {
        return Vec::new();
    }
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (lo..=hi).into_par_iter().map(f).collect();
    }
    let _ = exec;
    (lo..=hi).map(f).collect()
}

/// Order-preserving map over a slice.
pub fn map_slice<T, R, F>(exec: Exec, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return items.par_iter().map(f).collect();
    }
    let _ = exec;
    items.iter().map(f).collect()
}

/// Max-reduction of `f` over `[lo, hi]`; `f64::NEG_INFINITY` for an empty range.
pub fn max_range<F>(exec: Exec, lo: i64, hi: i64, f: F) -> f64
where
    F: Fn(i64) -> f64 + Sync + Send,
{
    if hi < lo {
        return f64::NEG_INFINITY;
    }
    #[cfg(feature = "parallel")]
    if exec.is_parallel() {
        return (lo..=hi)
            .into_par_iter()
            .map(f)
            .reduce(|| f64::NEG_INFINITY, f64::max);
    }
    let _ = exec;
    (lo..=hi).map(f).fold(f64::NEG_INFINITY, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree() {
        for exec in [Exec::Sequential, Exec::Parallel] {
            assert_eq!(map_range(exec, -2, 2, |n| n * n), vec![4, 1, 0, 1, 4]);
            assert_eq!(map_slice(exec, &[1.0, 2.0], |x| x * 2.0), vec![2.0, 4.0]);
            assert_eq!(max_range(exec, -3, 1, |n| (n as f64).abs()), 3.0);
            assert!(map_range(exec, 1, 0, |n| n).is_empty());
        }
    }
}
