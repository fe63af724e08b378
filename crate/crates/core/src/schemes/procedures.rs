//! Component-level updating procedures.
//!
//! A [`Sweep`] fixes one implicit operator `(αI − τS)` together with its
//! three line factorizations. The procedures below advance raw component
//! arrays through one such operator in the various algebraic forms used by
//! the steppers.

use ndarray::Array3;

use crate::error::Result;
use crate::exec::Exec;
use crate::grid::{Component, Medium, YeeGrid};
use crate::operators::{Coupling, Split};
use crate::scalar::{Real, Work};
use crate::tridiag::{shifted_laplacian, TridiagFactorization};

use super::kernels::*;
use super::HUpdate;

type Triple<T> = [Array3<T>; 3];

#[derive(Clone, Debug)]
pub(crate) struct Sweep<T> {
    pub split: Split,
    pub alpha: f64,
    pub tau: f64,
    grid: YeeGrid,
    medium: Medium,
    facts: Vec<TridiagFactorization<T>>,
}

impl<T: Real> Sweep<T> {
    /// Prepare `(αI − τS)`.
    pub fn new(split: Split, alpha: f64, tau: f64, grid: YeeGrid, medium: Medium) -> Result<Self> {
        let mut facts = Vec::with_capacity(3);
        for c in split.couplings() {
            let h = grid.h(c.axis);
            let kappa = tau * tau / (alpha * medium.epsilon() * medium.mu());
            let f = shifted_laplacian(grid.n(c.axis) - 1, alpha, kappa / (h * h))?;
            facts.push(f.cast());
        }
        Ok(Self {
            split,
            alpha,
            tau,
            grid,
            medium,
            facts,
        })
    }

    /// `κ/Δ²` of coupling `c`.
    pub fn kappa_h2(&self, c: &Coupling) -> f64 {
        let h = self.grid.h(c.axis);
        self.tau * self.tau / (self.alpha * self.medium.epsilon() * self.medium.mu() * h * h)
    }

    /// `sτ/(αεΔ)`: weight of the magnetic difference in the electric equation.
    pub fn beta(&self, c: &Coupling) -> f64 {
        c.sign() * self.tau / (self.alpha * self.medium.epsilon() * self.grid.h(c.axis))
    }

    /// `sτ/(αμΔ)`: weight of the electric difference in the magnetic equation.
    pub fn gamma(&self, c: &Coupling) -> f64 {
        c.sign() * self.tau / (self.alpha * self.medium.mu() * self.grid.h(c.axis))
    }

    fn solve(&self, exec: Exec, idx: usize, c: &Coupling, x: &mut Array3<T>) {
        T::attribute(Work::Solve(c.electric()));
        self.facts[idx]
            .solve_along(x, c.axis, exec)
            .expect("line systems are sized from the same grid");
    }
}

fn t<T: Real>(v: f64) -> T {
    T::from_f64(v)
}

fn upd_e(c: &Coupling) -> Work {
    Work::Update(c.electric())
}

fn upd_h(c: &Coupling) -> Work {
    Work::Update(c.magnetic())
}

/// One procedure of the fundamental alternating-direction form,
/// `v ← ũ − v; (½I − τS) ũ = v`, with `ũ` in `(ue, uh)` and `v` in
/// `(ve, vh)`. With [`HUpdate::Combined`] `uh` is not touched and `vh`
/// carries the magnetic state alone.
pub(crate) fn fundamental_adi<T: Real>(
    exec: Exec,
    sw: &Sweep<T>,
    mode: HUpdate,
    ue: &mut Triple<T>,
    uh: &mut Triple<T>,
    ve: &mut Triple<T>,
    vh: &mut Triple<T>,
) {
    for (idx, c) in sw.split.couplings().iter().enumerate() {
        let (e, h) = (c.e, c.h);
        if mode == HUpdate::Explicit {
            subtract_from(exec, upd_h(c), &mut vh[h], &uh[h]);
        }
        subtract_from(exec, upd_e(c), &mut ve[e], &ue[e]);
        plain_from(exec, upd_e(c), &mut ue[e], &ve[e], &vh[h], c.axis, t(sw.beta(c)));
        sw.solve(exec, idx, c, &mut ue[e]);
        let g = t(sw.gamma(c));
        match mode {
            HUpdate::Combined => padded_accumulate(exec, upd_h(c), &mut vh[h], &ue[e], c.axis, g),
            HUpdate::Explicit => padded_doubled(exec, upd_h(c), &mut uh[h], &vh[h], &ue[e], c.axis, g),
        }
    }
}

/// One procedure of the fundamental locally one-dimensional form,
/// `(½I − τS) v = u; u ← v − u`. With [`HUpdate::Combined`] the auxiliary
/// magnetic field is never formed.
pub(crate) fn fundamental_lod<T: Real>(
    exec: Exec,
    sw: &Sweep<T>,
    mode: HUpdate,
    ue: &mut Triple<T>,
    uh: &mut Triple<T>,
    ve: &mut Triple<T>,
    vh: &mut Triple<T>,
) {
    for (idx, c) in sw.split.couplings().iter().enumerate() {
        let (e, h) = (c.e, c.h);
        plain_from(exec, upd_e(c), &mut ve[e], &ue[e], &uh[h], c.axis, t(sw.beta(c)));
        sw.solve(exec, idx, c, &mut ve[e]);
        let g = t(sw.gamma(c));
        match mode {
            HUpdate::Combined => padded_accumulate(exec, upd_h(c), &mut uh[h], &ve[e], c.axis, g),
            HUpdate::Explicit => {
                padded_doubled(exec, upd_h(c), &mut vh[h], &uh[h], &ve[e], c.axis, g);
                subtract_from(exec, upd_h(c), &mut uh[h], &vh[h]);
            }
        }
        subtract_from(exec, upd_e(c), &mut ue[e], &ve[e]);
    }
}

/// Original locally one-dimensional procedure
/// `(I − τS) dst = (I + τS) src`.
pub(crate) fn original_lod<T: Real>(
    exec: Exec,
    sw: &Sweep<T>,
    se: &Triple<T>,
    sh: &Triple<T>,
    de: &mut Triple<T>,
    dh: &mut Triple<T>,
) {
    for (idx, c) in sw.split.couplings().iter().enumerate() {
        let (e, h) = (c.e, c.h);
        let k = sw.kappa_h2(c);
        let (c0, c1, c2) = (t(1.0 - 2.0 * k), t(k), t(2.0 * sw.beta(c)));
        lod_rhs(exec, upd_e(c), &mut de[e], &se[e], &sh[h], c.axis, c0, c1, c2);
        sw.solve(exec, idx, c, &mut de[e]);
        lod_h(exec, upd_h(c), &mut dh[h], &sh[h], &se[e], &de[e], c.axis, t(sw.gamma(c)));
    }
}

/// Conventional alternating-direction half step
/// `(I − τS) dst = (I + τS') src`, `S'` the other splitting operator, with
/// the magnetic right-hand side substituted into the electric equation.
pub(crate) fn original_adi<T: Real>(
    exec: Exec,
    sw: &Sweep<T>,
    partner: &Sweep<T>,
    se: &Triple<T>,
    sh: &Triple<T>,
    de: &mut Triple<T>,
    dh: &mut Triple<T>,
) {
    for (idx, c1) in sw.split.couplings().iter().enumerate() {
        let (e, h1) = (c1.e, c1.h);
        let c2 = partner.split.for_electric(e);
        let cp = partner.split.for_magnetic(h1);
        let k1 = sw.beta(c1);
        let kp = partner.gamma(&cp);
        adi_rhs(
            exec,
            upd_e(c1),
            &mut de[e],
            &se[e],
            (&sh[h1], c1.axis, t(k1)),
            (&sh[c2.h], c2.axis, t(partner.beta(&c2))),
            (&se[cp.e], cp.axis, t(k1 * kp)),
        );
        sw.solve(exec, idx, c1, &mut de[e]);
        padded_from(exec, upd_h(c1), &mut dh[h1], &sh[h1], &se[cp.e], cp.axis, t(kp));
        padded_accumulate(exec, upd_h(c1), &mut dh[h1], &de[e], c1.axis, t(sw.gamma(c1)));
    }
}

/// `dst = (I + τS) src` for an `α = 1` sweep.
pub(crate) fn explicit_product<T: Real>(
    exec: Exec,
    sw: &Sweep<T>,
    se: &Triple<T>,
    sh: &Triple<T>,
    de: &mut Triple<T>,
    dh: &mut Triple<T>,
) {
    for c in sw.split.couplings() {
        let (e, h) = (c.e, c.h);
        plain_from(exec, upd_e(c), &mut de[e], &se[e], &sh[h], c.axis, t(sw.beta(c)));
        padded_from(exec, upd_h(c), &mut dh[h], &sh[h], &se[e], c.axis, t(sw.gamma(c)));
    }
}

/// In-place `(I − τS) x = r` for an `α = 1` sweep, `r` given in `(e, h)`.
pub(crate) fn implicit_only<T: Real>(exec: Exec, sw: &Sweep<T>, e: &mut Triple<T>, h: &mut Triple<T>) {
    for (idx, c) in sw.split.couplings().iter().enumerate() {
        let (ei, hi) = (c.e, c.h);
        plain_accumulate(exec, upd_e(c), &mut e[ei], &h[hi], c.axis, t(sw.beta(c)));
        sw.solve(exec, idx, c, &mut e[ei]);
        padded_accumulate(exec, upd_h(c), &mut h[hi], &e[ei], c.axis, t(sw.gamma(c)));
    }
}

/// `dst = Δt (A + B) src`.
pub(crate) fn curl_increment<T: Real>(
    exec: Exec,
    dt: f64,
    grid: &YeeGrid,
    medium: &Medium,
    se: &Triple<T>,
    sh: &Triple<T>,
    de: &mut Triple<T>,
    dh: &mut Triple<T>,
) {
    let w = |c: &Coupling, m: f64| t::<T>(dt * c.sign() / (m * grid.h(c.axis)));
    for d in 0..3 {
        let (a, b) = (Split::A.for_electric(d), Split::B.for_electric(d));
        let (wa, wb) = (w(&a, medium.epsilon()), w(&b, medium.epsilon()));
        let work = Work::Update(Component::electric(d));
        two_plain(exec, work, &mut de[d], &sh[a.h], a.axis, wa, &sh[b.h], b.axis, wb);
    }
    for d in 0..3 {
        let (a, b) = (Split::A.for_magnetic(d), Split::B.for_magnetic(d));
        let (wa, wb) = (w(&a, medium.mu()), w(&b, medium.mu()));
        let work = Work::Update(Component::magnetic(d));
        two_padded(exec, work, &mut dh[d], &se[a.e], a.axis, wa, &se[b.e], b.axis, wb);
    }
}

/// `dst += src` over all six components.
pub(crate) fn accumulate_all<T: Real>(
    exec: Exec,
    de: &mut Triple<T>,
    dh: &mut Triple<T>,
    se: &Triple<T>,
    sh: &Triple<T>,
) {
    for d in 0..3 {
        add_assign(exec, Work::Update(Component::electric(d)), &mut de[d], &se[d]);
        add_assign(exec, Work::Update(Component::magnetic(d)), &mut dh[d], &sh[d]);
    }
}
