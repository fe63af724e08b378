//! Constant-coefficient tridiagonal line systems.
//!
//! Every implicit update reduces to `(α I − κ δ²) x = r` along one axis with
//! Dirichlet (wall) ends. Because the medium is uniform, one factorization per
//! (axis, α, κ) serves every line of every component and every time step.
//! The factorization stores the elimination multipliers and reciprocal
//! pivots, so a solve of order `n` costs `3n − 2` multiplications and
//! `2n − 2` additions/subtractions.

use ndarray::{Array3, ArrayViewMut2, Axis as NdAxis, Zip};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Axis, Coefficients, YeeGrid};
use crate::scalar::Real;
use crate::exec::Exec;

#[derive(Clone, Debug, PartialEq)]
pub struct TridiagFactorization<T = f64> {
    n: usize,
    /// Elimination multipliers; `lower[i]` eliminates row `i + 1`.
    lower: Vec<T>,
    /// Reciprocal pivots.
    diag_inv: Vec<T>,
    /// Superdiagonal entries.
    upper: Vec<T>,
}

/// LU-factorize the tridiagonal matrix with main diagonal `diag`, first
/// subdiagonal `sub` and first superdiagonal `sup`. No pivoting.
pub fn factorize(diag: &[f64], sub: &[f64], sup: &[f64]) -> Result<TridiagFactorization<f64>> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::Dimension("tridiagonal system of order 0".into()));
    }
    for v in [sub, sup] {
        if v.len() != n - 1 {
            return Err(Error::LengthMismatch {
                expected: n - 1,
                got: v.len(),
            });
        }
    }
    let mut lower = Vec::with_capacity(n - 1);
    let mut diag_inv = Vec::with_capacity(n);
    let mut pivot = diag[0];
    for i in 0..n {
        if i > 0 {
            let m = sub[i - 1] / pivot;
            pivot = diag[i] - m * sup[i - 1];
            lower.push(m);
        }
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::Singular { row: i });
        }
        diag_inv.push(1.0 / pivot);
    }
    Ok(TridiagFactorization {
        n,
        lower,
        diag_inv,
        upper: sup.to_vec(),
    })
}

/// Factorization of `α I − k (line second difference)` of order `n`, i.e.
/// stencil `(−k, α + 2k, −k)` with zero values beyond both ends.
pub fn shifted_laplacian(n: usize, alpha: f64, k: f64) -> Result<TridiagFactorization<f64>> {
    let diag = vec![alpha + 2.0 * k; n];
    let off = vec![-k; n.saturating_sub(1)];
    factorize(&diag, &off, &off)
}

/// The line system `½ I − (bd/2) δ̃²` along `axis` for the electric unknowns
/// of `grid` (order `n_axis − 1`).
pub fn build_line_system(
    axis: Axis,
    coeffs: &Coefficients,
    grid: &YeeGrid,
) -> Result<TridiagFactorization<f64>> {
    let h = grid.h(axis);
    shifted_laplacian(grid.n(axis) - 1, 0.5, coeffs.b * coeffs.d / (2.0 * h * h))
}

impl<T: Real> TridiagFactorization<T> {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn cast<U: Real>(&self) -> TridiagFactorization<U> {
        let conv = |v: &[T]| v.iter().map(|x| U::from_f64(x.to_f64())).collect();
        TridiagFactorization {
            n: self.n,
            lower: conv(&self.lower),
            diag_inv: conv(&self.diag_inv),
            upper: conv(&self.upper),
        }
    }

    /// Solve in place on a contiguous line.
    pub fn solve_in_place(&self, x: &mut [T]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        self.substitute(x);
        Ok(())
    }

    pub fn solve(&self, rhs: &[T]) -> Result<Vec<T>> {
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x)?;
        Ok(x)
    }

    #[inline]
    fn substitute(&self, x: &mut [T]) {
        let n = self.n;
        for i in 1..n {
            x[i] = x[i] - self.lower[i - 1] * x[i - 1];
        }
        x[n - 1] = x[n - 1] * self.diag_inv[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (x[i] - self.upper[i] * x[i + 1]) * self.diag_inv[i];
        }
    }

    /// Same substitution over a batch of lines stored as the rows of a 2-D
    /// view (`rows` indexes position along the line).
    fn substitute_rows(&self, mut a: ArrayViewMut2<'_, T>, exec: Exec) {
        let n = self.n;
        for i in 1..n {
            let m = self.lower[i - 1];
            let (prev, mut cur) = a.view_mut().split_at(NdAxis(0), i);
            let prev = prev.index_axis(NdAxis(0), i - 1);
            let cur = cur.index_axis_mut(NdAxis(0), 0);
            drive!(exec, Zip::from(cur).and(prev), |c, &p| *c = *c - m * p);
        }
        let inv = self.diag_inv[n - 1];
        drive!(
            exec,
            Zip::from(a.index_axis_mut(NdAxis(0), n - 1)),
            |c| *c = *c * inv
        );
        for i in (0..n - 1).rev() {
            let u = self.upper[i];
            let inv = self.diag_inv[i];
            let (head, tail) = a.view_mut().split_at(NdAxis(0), i + 1);
            let next = tail.index_axis(NdAxis(0), 0);
            let mut head = head;
            let cur = head.index_axis_mut(NdAxis(0), i);
            drive!(exec, Zip::from(cur).and(next), |c, &x| *c = (*c - u * x) * inv);
        }
    }

    /// Solve every line of `a` that runs along `axis`, in place.
    pub fn solve_along(&self, a: &mut Array3<T>, axis: Axis, exec: Exec) -> Result<()> {
        let len = a.len_of(axis.nd());
        if len != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: len,
            });
        }
        T::note_lines(a.len() / len, len);
        match axis {
            Axis::X => {
                let (n0, n1, n2) = a.dim();
                let plane = a
                    .view_mut()
                    .into_shape_with_order((n0, n1 * n2))
                    .expect("owned arrays are contiguous");
                self.substitute_rows(plane, exec);
            }
            Axis::Y => match exec {
                Exec::Serial => a
                    .axis_iter_mut(NdAxis(0))
                    .for_each(|slab| self.substitute_rows(slab, Exec::Serial)),
                Exec::Parallel => a
                    .axis_iter_mut(NdAxis(0))
                    .into_par_iter()
                    .for_each(|slab| self.substitute_rows(slab, Exec::Serial)),
            },
            Axis::Z => {
                let lanes = Zip::from(a.lanes_mut(NdAxis(2)));
                drive!(exec, lanes, |mut lane| {
                    let x = lane.as_slice_mut().expect("last axis is contiguous");
                    self.substitute(x);
                });
            }
        }
        Ok(())
    }
}
