//! Brute-force oracle: explicit dense matrices and LU solves.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};

use super::{check_dense_size, VerificationResult};
use crate::error::{Error, Result};
use crate::grid::{Component, FieldSet, Medium, YeeGrid};
use crate::operators::{apply_A, apply_B};
use crate::schemes::{Formulation, HUpdate, SchemeId, Stepper, StepperConfig};

/// Largest cell count per axis accepted by the dense oracle.
pub const DENSE_LIMIT: usize = 4;

/// Flat offset of each component inside `FieldSet::to_flat`.
fn offsets(grid: &YeeGrid) -> [usize; 6] {
    let mut out = [0; 6];
    let mut acc = 0;
    for c in Component::ALL {
        out[c.index()] = acc;
        acc += grid.len(c);
    }
    out
}

/// Flat index of the entry of `c` sitting at doubled position `p`, if stored.
fn locate(grid: &YeeGrid, offs: &[usize; 6], c: Component, p: [isize; 3]) -> Option<usize> {
    let dims = grid.dims(c);
    let mut idx = [0usize; 3];
    for a in 0..3 {
        let half = if c.is_electric() { a == c.direction() } else { a != c.direction() };
        let v = p[a];
        let i = if half {
            if v.rem_euclid(2) != 1 {
                return None;
            }
            (v - 1) / 2
        } else {
            if v.rem_euclid(2) != 0 {
                return None;
            }
            v / 2 - 1
        };
        if i < 0 || i as usize >= dims[a] {
            return None;
        }
        idx[a] = i as usize;
    }
    Some(offs[c.index()] + (idx[0] * dims[1] + idx[1]) * dims[2] + idx[2])
}

/// The two splitting operators assembled from Yee-cell coordinates alone.
///
/// For each cyclic triple `(i, j, k)`, the first operator holds
/// `ε ∂E_i/∂t ∋ +∂H_k/∂x_j` and `μ ∂H_k/∂t ∋ +∂E_i/∂x_j`; the second holds
/// `ε ∂E_i/∂t ∋ −∂H_j/∂x_k` and `μ ∂H_j/∂t ∋ −∂E_i/∂x_k`. Neighbours that are
/// not stored are tangential electric values on a wall and contribute zero.
pub fn coordinate_curl_matrices(grid: &YeeGrid, medium: &Medium) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = grid.unknowns();
    let offs = offsets(grid);
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, n);
    for target in Component::ALL {
        let dims = grid.dims(target);
        for i0 in 0..dims[0] {
            for i1 in 0..dims[1] {
                for i2 in 0..dims[2] {
                    let idx = [i0, i1, i2];
                    let row = locate(
                        grid,
                        &offs,
                        target,
                        target.doubled_position(idx).map(|v| v as isize),
                    )
                    .expect("stored entries locate themselves");
                    let p = target.doubled_position(idx).map(|v| v as isize);
                    let d = target.direction();
                    let (j, k) = ((d + 1) % 3, (d + 2) % 3);
                    let terms: [(usize, Component, usize, f64); 2] = if target.is_electric() {
                        let w = 1.0 / medium.epsilon();
                        [
                            (0, Component::magnetic(k), j, w),
                            (1, Component::magnetic(j), k, -w),
                        ]
                    } else {
                        // H_d receives +∂E_{d+1}/∂x_{d+2} via the first
                        // operator (triple d+1, d+2, d) and −∂E_{d+2}/∂x_{d+1}
                        // via the second (triple d+2, d, d+1).
                        let w = 1.0 / medium.mu();
                        [
                            (0, Component::electric(j), k, w),
                            (1, Component::electric(k), j, -w),
                        ]
                    };
                    for (which, src, axis, w) in terms {
                        let h = grid.spacing()[axis];
                        let m = if which == 0 { &mut a } else { &mut b };
                        for (off, sgn) in [(1isize, 1.0), (-1, -1.0)] {
                            let mut q = p;
                            q[axis] += off;
                            if let Some(col) = locate(grid, &offs, src, q) {
                                m[(row, col)] += sgn * w / h;
                            }
                        }
                    }
                }
            }
        }
    }
    (a, b)
}

/// The same operators assembled column by column from the matrix-free
/// application routines.
pub fn applied_matrices(grid: &YeeGrid, medium: &Medium) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = grid.unknowns();
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, n);
    let mut unit = vec![0.0; n];
    for col in 0..n {
        unit[col] = 1.0;
        let u = FieldSet::<f64>::from_flat(*grid, &unit).expect("sized from the grid");
        a.set_column(col, &DVector::from_vec(apply_A(&u, medium).to_flat()));
        b.set_column(col, &DVector::from_vec(apply_B(&u, medium).to_flat()));
        unit[col] = 0.0;
    }
    (a, b)
}

struct Dense {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    id: DMatrix<f64>,
}

impl Dense {
    /// `(I + τS) x`.
    fn explicit(&self, s: &DMatrix<f64>, tau: f64, x: &DVector<f64>) -> DVector<f64> {
        x + s * x * tau
    }

    /// `(I − τS)⁻¹ x`.
    fn implicit(&self, s: &DMatrix<f64>, tau: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        let m = &self.id - s * tau;
        m.lu()
            .solve(x)
            .ok_or(Error::Singular { row: 0 })
    }

    /// `(I − τS)⁻¹ (I + τS) x`.
    fn cayley(&self, s: &DMatrix<f64>, tau: f64, x: &DVector<f64>) -> Result<DVector<f64>> {
        self.implicit(s, tau, &self.explicit(s, tau, x))
    }

    fn step(&self, scheme: SchemeId, dt: f64, u: &DVector<f64>) -> Result<DVector<f64>> {
        let (a, b) = (&self.a, &self.b);
        let t = dt / 2.0;
        Ok(match scheme {
            SchemeId::Adi => {
                let half = self.implicit(a, t, &self.explicit(b, t, u))?;
                self.implicit(b, t, &self.explicit(a, t, &half))?
            }
            SchemeId::Lod1 => self.cayley(b, t, &self.cayley(a, t, u)?)?,
            SchemeId::Ss2 => {
                let x = self.cayley(a, dt / 4.0, u)?;
                let x = self.cayley(b, t, &x)?;
                self.cayley(a, dt / 4.0, &x)?
            }
            SchemeId::Lod2 => {
                // input transform, one A and one B sweep, then the inverse
                // of the input transform
                let x = self.cayley(b, dt / 4.0, u)?;
                let x = self.cayley(b, t, &self.cayley(a, t, &x)?)?;
                self.implicit(b, -dt / 4.0, &self.explicit(b, -dt / 4.0, &x))?
            }
            SchemeId::Dyakonov => {
                let star = self.implicit(a, t, &self.explicit(a, t, &self.explicit(b, t, u)))?;
                self.implicit(b, t, &star)?
            }
            SchemeId::DouglasGunn => {
                let curl = (a + b) * u * dt;
                let du_star = self.implicit(a, t, &curl)?;
                u + self.implicit(b, t, &du_star)?
            }
            SchemeId::CrankNicolsonRef => {
                let m = a + b;
                self.cayley(&m, t, u)?
            }
        })
    }
}

/// One step of the stepper against the dense rational map of the scheme,
/// from seeded random fields. Also reports how far the matrix-free operators
/// are from their coordinate assembly.
pub fn dense_oracle_test(
    scheme: SchemeId,
    form: Formulation,
    mode: HUpdate,
    grid: YeeGrid,
    dt: f64,
    seed: u64,
) -> Result<VerificationResult> {
    let u0 = FieldSet::random(grid, seed);
    dense_oracle_from(scheme, form, mode, dt, &u0)
}

pub fn dense_oracle_from(
    scheme: SchemeId,
    form: Formulation,
    mode: HUpdate,
    dt: f64,
    u0: &FieldSet<f64>,
) -> Result<VerificationResult> {
    let start = Instant::now();
    let grid = u0.grid;
    check_dense_size(&grid)?;
    let medium = Medium::new(1.4, 0.8)?;
    let (a, b) = coordinate_curl_matrices(&grid, &medium);
    let (aa, ba) = applied_matrices(&grid, &medium);
    let operator_gap = (&a - &aa).amax().max((&b - &ba).amax());

    let n = grid.unknowns();
    let dense = Dense {
        a,
        b,
        id: DMatrix::identity(n, n),
    };
    let expect = dense.step(scheme, dt, &DVector::from_vec(u0.to_flat()))?;
    let expect = FieldSet::from_flat(grid, expect.as_slice())?;

    let cfg = StepperConfig::new(scheme, form, dt, medium).with_h_update(mode);
    let mut s = Stepper::<f64>::new(cfg, u0)?;
    s.step()?;
    let got = s.output()?;
    let field_difference = got.relative_difference(&expect);
    let metric = field_difference.max(operator_gap);
    Ok(VerificationResult::at_most(
        format!("dense/{scheme}/{form}/{}", if mode == HUpdate::Combined { "combined" } else { "explicit-h" }),
        metric,
        1e-11,
        start,
    )
    .with_detail("field_difference", field_difference)
    .with_detail("operator_gap", operator_gap))
}
