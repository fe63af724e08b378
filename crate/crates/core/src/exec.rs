/// Execution policy for field kernels and batched line solves.
///
/// Every kernel writes each output entry from a fixed expression of its
/// inputs, so the parallel path produces bitwise the same values as the
/// serial one; only the schedule differs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum Exec {
    #[default]
    Serial,
    Parallel,
}

/// Run an `ndarray::Zip` either serially or on the rayon pool.
macro_rules! drive {
    ($exec:expr, $zip:expr, $f:expr) => {
        match $exec {
            $crate::exec::Exec::Serial => $zip.for_each($f),
            $crate::exec::Exec::Parallel => $zip.par_for_each($f),
        }
    };
}
