//! Execution mode for the data-parallel inner loops.
//!
//! Every hot loop in the crate (twisted convolution, Weyl-relation sweeps,
//! fiberwise section operations) is written as an indexed map. With the
//! `parallel` feature enabled the map runs on the rayon pool; without it,
//! or when [`Exec::Sequential`] is requested, it runs on the calling thread.
//! Results are collected in index order either way, so the output never
//! depends on the schedule.

/// Where an indexed map is evaluated.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Exec {
    Sequential,
    #[default]
    Parallel,
}

impl Exec {
    /// `true` when this mode will actually use worker threads.
    pub fn is_parallel(self) -> bool {
        cfg!(feature = "parallel") && self == Exec::Parallel
    }
}

/// Evaluates `f(0..len)` and collects the results in index order.
pub fn map_indexed<T, F>(len: usize, exec: Exec, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if exec == Exec::Parallel {
            use rayon::prelude::*;
            return (0..len).into_par_iter().map(f).collect();
        }
    }
    let _ = exec;
    (0..len).map(f).collect()
}

/// Like [`map_indexed`] but short-circuits on the first error (in index order).
pub fn try_map_indexed<T, E, F>(len: usize, exec: Exec, f: F) -> Result<Vec<T>, E>
where
    T: Send,
    E: Send,
    F: Fn(usize) -> Result<T, E> + Sync + Send,
{
    map_indexed(len, exec, f).into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn both_modes_agree_and_keep_order() {
        let seq = map_indexed(1000, Exec::Sequential, |i| i * i);
        let par = map_indexed(1000, Exec::Parallel, |i| i * i);
        assert_eq!(seq, par);
        assert_eq!(seq[31], 961);
    }

    #[test]
    fn first_error_wins() {
        let out: Result<Vec<usize>, usize> =
            try_map_indexed(100, Exec::Parallel, |i| if i % 40 == 39 { Err(i) } else { Ok(i) });
        assert_eq!(out, Err(39));
    }
}
