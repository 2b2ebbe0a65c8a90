//! Per-item fan-out that uses rayon when the `parallel` feature is enabled and
//! falls back to a plain loop otherwise. Results always come back in index
//! order, so callers observe identical output either way.

use crate::Result;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `0..n`, collecting results in index order.
pub fn map_indices<T, F>(n: usize, f: F) -> Vec<T>
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

/// Fallible variant of [`map_indices`]. On failure the error of the lowest
/// failing index is returned.
pub fn try_map_indices<T, F>(n: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    map_indices(n, f).into_iter().collect()
}

/// Index of the first `i` in `0..n` satisfying `pred`.
pub fn position_first<F>(n: usize, pred: F) -> Option<usize>
where
    F: Fn(usize) -> bool + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        (0..n).into_par_iter().position_first(pred)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..n).position(pred)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    #[test]
    fn preserves_order() {
        assert_eq!(map_indices(5, |i| i * i), vec![0, 1, 4, 9, 16]);
    }

    #[test]
    fn lowest_error_wins() {
        let r: Result<Vec<usize>> = try_map_indices(10, |i| {
            if i % 3 == 2 {
                Err(Error::Parameter(i.to_string()))
            } else {
                Ok(i)
            }
        });
        assert_eq!(r, Err(Error::Parameter("2".into())));
    }

    #[test]
    fn first_position() {
        assert_eq!(position_first(100, |i| i > 41), Some(42));
        assert_eq!(position_first(3, |_| false), None);
    }
}
