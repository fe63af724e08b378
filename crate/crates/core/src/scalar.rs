//! Scalar abstraction used by every field kernel.
//!
//! All steppers are generic over [`Real`] so the same update code can run on
//! plain `f64` or on an instrumented scalar that tallies arithmetic
//! (see [`crate::cost_model::Counted`]). For `f64` the attribution hooks are
//! empty and compile away.

use std::fmt::Debug;
use std::ops::{Add, Mul, Sub};

use crate::grid::Component;

/// Which piece of work the arithmetic that follows belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Work {
    /// Right-hand-side or explicit arithmetic writing the given component.
    Update(Component),
    /// Tridiagonal forward/backward substitution on the given component.
    Solve(Component),
    /// Input initialization, output retrieval and other bookkeeping.
    Untracked,
}

pub trait Real:
    Copy
    + Send
    + Sync
    + Debug
    + PartialEq
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + 'static
{
    fn from_f64(v: f64) -> Self;
    fn to_f64(self) -> f64;

    #[inline(always)]
    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    /// Attribute subsequent arithmetic to `work`.
    #[inline(always)]
    fn attribute(_work: Work) {}

    /// Record that `lines` independent line systems of order `len` were
    /// solved.
    #[inline(always)]
    fn note_lines(_lines: usize, _len: usize) {}
}

impl Real for f64 {
    #[inline(always)]
    fn from_f64(v: f64) -> Self {
        v
    }

    #[inline(always)]
    fn to_f64(self) -> f64 {
        self
    }
}
