//! Checking a predicate over a numbered family of cases (schedules, seeds,
//! graphs), sequentially or spread across threads. Both strategies report the
//! same summary: the failure count and the lowest-numbered failure.

use crate::Result;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Strategy {
    Sequential,
    /// Falls back to sequential when built without the `parallel` feature.
    #[default]
    Parallel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SweepSummary<W> {
    pub total: u64,
    pub failures: u64,
    pub first_failure: Option<(u64, W)>,
}

impl<W> SweepSummary<W> {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

struct Acc<W> {
    failures: u64,
    first: Option<(u64, W)>,
    error: Option<(u64, crate::Error)>,
}

impl<W> Acc<W> {
    fn empty() -> Self {
        Acc {
            failures: 0,
            first: None,
            error: None,
        }
    }

    fn push(mut self, i: u64, r: Result<Option<W>>) -> Self {
        match r {
            Ok(None) => {}
            Ok(Some(w)) => {
                self.failures += 1;
                if self.first.as_ref().is_none_or(|(j, _)| i < *j) {
                    self.first = Some((i, w));
                }
            }
            Err(e) => {
                if self.error.as_ref().is_none_or(|(j, _)| i < *j) {
                    self.error = Some((i, e));
                }
            }
        }
        self
    }

    #[cfg(feature = "parallel")]
    fn merge(self, other: Self) -> Self {
        fn lower<T>(a: Option<(u64, T)>, b: Option<(u64, T)>) -> Option<(u64, T)> {
            match (a, b) {
                (Some(a), Some(b)) => Some(if a.0 <= b.0 { a } else { b }),
                (a, b) => a.or(b),
            }
        }
        Acc {
            failures: self.failures + other.failures,
            first: lower(self.first, other.first),
            error: lower(self.error, other.error),
        }
    }
}

/// Runs `check` on every case in `0..count`. `Ok(Some(w))` is a failure with
/// witness `w`. If any case errors, the error of the lowest such case is
/// returned.
pub fn sweep<W, F>(count: u64, strategy: Strategy, check: F) -> Result<SweepSummary<W>>
where
    W: Send,
    F: Fn(u64) -> Result<Option<W>> + Sync + Send,
{
    let acc = match strategy {
        Strategy::Sequential => (0..count).fold(Acc::empty(), |acc, i| acc.push(i, check(i))),
        Strategy::Parallel => parallel(count, &check),
    };
    if let Some((_, e)) = acc.error {
        return Err(e);
    }
    Ok(SweepSummary {
        total: count,
        failures: acc.failures,
        first_failure: acc.first,
    })
}

#[cfg(feature = "parallel")]
fn parallel<W, F>(count: u64, check: &F) -> Acc<W>
where
    W: Send,
    F: Fn(u64) -> Result<Option<W>> + Sync + Send,
{
    (0..count)
        .into_par_iter()
        .fold(Acc::empty, |acc, i| acc.push(i, check(i)))
        .reduce(Acc::empty, Acc::merge)
}

#[cfg(not(feature = "parallel"))]
fn parallel<W, F>(count: u64, check: &F) -> Acc<W>
where
    W: Send,
    F: Fn(u64) -> Result<Option<W>> + Sync + Send,
{
    (0..count).fold(Acc::empty(), |acc, i| acc.push(i, check(i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Error;

    #[test]
    fn strategies_agree() {
        let check = |i: u64| Ok((i % 7 == 3).then_some(i * 10));
        let a = sweep(1000, Strategy::Sequential, check).unwrap();
        let b = sweep(1000, Strategy::Parallel, check).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.failures, 143);
        assert_eq!(a.first_failure, Some((3, 30)));
    }

    #[test]
    fn empty_sweep_passes() {
        let s = sweep(0, Strategy::Parallel, |_| Ok(Some(()))).unwrap();
        assert!(s.passed());
        assert_eq!(s.total, 0);
    }

    #[test]
    fn lowest_error_wins() {
        let check = |i: u64| -> Result<Option<()>> {
            if i >= 500 && i.is_multiple_of(50) {
                Err(Error::Parameter(i.to_string()))
            } else {
                Ok(None)
            }
        };
        for strategy in [Strategy::Sequential, Strategy::Parallel] {
            assert_eq!(sweep(2000, strategy, check).unwrap_err(), Error::Parameter("500".into()));
        }
    }
}
