//! The splitting operators `A` and `B` of the curl system.
//!
//! Both are block operators made of three independent E/H couplings. A
//! coupling `(E, H, axis, s)` contributes
//!
//! ```text
//! (S u)_E = (s/ε) δ_axis H,    (S u)_H = (s/μ) δ_axis E
//! ```
//!
//! and each field component appears in exactly one coupling of `A` and one
//! of `B`. `A + B` is the full Maxwell curl operator.

use ndarray::Zip;

use crate::grid::{diff_backward, diff_forward, Axis, Component, FieldSet, Medium};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Split {
    A,
    B,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Coupling {
    /// Direction index of the electric component.
    pub e: usize,
    /// Direction index of the magnetic component.
    pub h: usize,
    pub axis: Axis,
    /// +1 or -1.
    pub sign: i8,
}

impl Coupling {
    pub fn sign(&self) -> f64 {
        f64::from(self.sign)
    }

    pub fn electric(&self) -> Component {
        Component::electric(self.e)
    }

    pub fn magnetic(&self) -> Component {
        Component::magnetic(self.h)
    }
}

const fn coupling(e: usize, h: usize, axis: Axis, sign: i8) -> Coupling {
    Coupling { e, h, axis, sign }
}

const A_COUPLINGS: [Coupling; 3] = [
    coupling(0, 2, Axis::Y, 1), // Ex <- dy Hz, Hz <- dy Ex
    coupling(1, 0, Axis::Z, 1), // Ey <- dz Hx, Hx <- dz Ey
    coupling(2, 1, Axis::X, 1), // Ez <- dx Hy, Hy <- dx Ez
];

const B_COUPLINGS: [Coupling; 3] = [
    coupling(0, 1, Axis::Z, -1), // Ex <- -dz Hy, Hy <- -dz Ex
    coupling(1, 2, Axis::X, -1), // Ey <- -dx Hz, Hz <- -dx Ey
    coupling(2, 0, Axis::Y, -1), // Ez <- -dy Hx, Hx <- -dy Ez
];

impl Split {
    pub fn couplings(self) -> &'static [Coupling; 3] {
        match self {
            Split::A => &A_COUPLINGS,
            Split::B => &B_COUPLINGS,
        }
    }

    pub fn other(self) -> Split {
        match self {
            Split::A => Split::B,
            Split::B => Split::A,
        }
    }

    /// The coupling that updates electric direction `e`.
    pub fn for_electric(self, e: usize) -> Coupling {
        self.couplings()[e]
    }

    /// The coupling that updates magnetic direction `h`.
    pub fn for_magnetic(self, h: usize) -> Coupling {
        *self
            .couplings()
            .iter()
            .find(|c| c.h == h)
            .expect("every magnetic direction appears once")
    }
}

/// `S u` for either splitting operator.
pub fn apply_split<T: Real>(split: Split, u: &FieldSet<T>, medium: &Medium) -> FieldSet<T> {
    let grid = u.grid;
    let mut out = FieldSet::zeros(grid);
    for c in split.couplings() {
        let h = grid.h(c.axis);
        let ce = T::from_f64(c.sign() / medium.epsilon());
        let cm = T::from_f64(c.sign() / medium.mu());
        let de = diff_forward(&u.h[c.h], c.axis, h).expect("grid extents are at least 3");
        out.e[c.e] = de.mapv(|v| ce * v);
        let dh = diff_backward(&u.e[c.e], c.axis, h).expect("grid extents are at least 3");
        out.h[c.h] = dh.mapv(|v| cm * v);
    }
    out.scaling = u.scaling;
    out
}

#[allow(non_snake_case)]
pub fn apply_A<T: Real>(u: &FieldSet<T>, medium: &Medium) -> FieldSet<T> {
    apply_split(Split::A, u, medium)
}

#[allow(non_snake_case)]
pub fn apply_B<T: Real>(u: &FieldSet<T>, medium: &Medium) -> FieldSet<T> {
    apply_split(Split::B, u, medium)
}

/// `(A + B) u`, the full curl right-hand side of Maxwell's equations.
pub fn apply_curl(u: &FieldSet<f64>, medium: &Medium) -> FieldSet<f64> {
    let mut out = apply_A(u, medium);
    let b = apply_B(u, medium);
    for c in Component::ALL {
        Zip::from(out.component_mut(c))
            .and(b.component(c))
            .for_each(|x, &y| *x += y);
    }
    out
}

/// `(I + τ S) u`.
pub fn identity_plus(split: Split, tau: f64, u: &FieldSet<f64>, medium: &Medium) -> FieldSet<f64> {
    let mut out = u.clone();
    out.axpy(tau, &apply_split(split, u, medium));
    out
}
