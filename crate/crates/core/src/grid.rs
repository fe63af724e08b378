//! Yee-grid geometry, medium, field storage and the staggered first
//! differences.
//!
//! Component placement follows the standard Yee cell (`i, j, k` are node
//! indices, a `+½` is a half-cell offset):
//!
//! | component | position            | stored extent              |
//! |-----------|---------------------|----------------------------|
//! | Ex        | (i+½, j, k)         | nx × (ny−1) × (nz−1)       |
//! | Ey        | (i, j+½, k)         | (nx−1) × ny × (nz−1)       |
//! | Ez        | (i, j, k+½)         | (nx−1) × (ny−1) × nz       |
//! | Hx        | (i, j+½, k+½)       | (nx−1) × ny × nz           |
//! | Hy        | (i+½, j, k+½)       | nx × (ny−1) × nz           |
//! | Hz        | (i+½, j+½, k)       | nx × ny × (nz−1)           |
//!
//! The box is a perfect electric conductor. Tangential E on the walls is
//! identically zero and is not stored; neither is normal H on the walls,
//! which never couples to the interior. Every E/H pair coupled by a
//! difference along some axis therefore differs by exactly one entry along
//! that axis (E has `n−1`, H has `n`) and agrees in the other two.

use ndarray::{Array3, ArrayView3, Axis as NdAxis, Slice, Zip};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    #[inline]
    pub(crate) fn nd(self) -> NdAxis {
        NdAxis(self as usize)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Component {
    Ex,
    Ey,
    Ez,
    Hx,
    Hy,
    Hz,
}

impl Component {
    pub const ALL: [Component; 6] = [
        Component::Ex,
        Component::Ey,
        Component::Ez,
        Component::Hx,
        Component::Hy,
        Component::Hz,
    ];
    pub const ELECTRIC: [Component; 3] = [Component::Ex, Component::Ey, Component::Ez];
    pub const MAGNETIC: [Component; 3] = [Component::Hx, Component::Hy, Component::Hz];

    /// Position in [`Component::ALL`].
    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    /// Index within its own E or H triple (0 for x, 1 for y, 2 for z).
    #[inline]
    pub fn direction(self) -> usize {
        self.index() % 3
    }

    #[inline]
    pub fn is_electric(self) -> bool {
        self.index() < 3
    }

    pub fn electric(direction: usize) -> Component {
        Component::ELECTRIC[direction]
    }

    pub fn magnetic(direction: usize) -> Component {
        Component::MAGNETIC[direction]
    }

    pub fn name(self) -> &'static str {
        match self {
            Component::Ex => "ex",
            Component::Ey => "ey",
            Component::Ez => "ez",
            Component::Hx => "hx",
            Component::Hy => "hy",
            Component::Hz => "hz",
        }
    }

    pub fn parse(s: &str) -> Option<Component> {
        Component::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(s.trim()))
    }

    /// Physical position of stored entry `idx`, in units of half cells.
    pub fn doubled_position(self, idx: [usize; 3]) -> [usize; 3] {
        let d = self.direction();
        let mut p = [0; 3];
        for a in 0..3 {
            // E: half offset along its own direction, interior nodes elsewhere.
            // H: half offsets off its own direction, interior nodes along it.
            let half = if self.is_electric() { a == d } else { a != d };
            p[a] = if half { 2 * idx[a] + 1 } else { 2 * (idx[a] + 1) };
        }
        p
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct YeeGrid {
    cells: [usize; 3],
    spacing: [f64; 3],
}

impl YeeGrid {
    pub fn new(cells: [usize; 3], spacing: [f64; 3]) -> Result<Self> {
        if let Some(n) = cells.iter().find(|&&n| n < 3) {
            return Err(Error::InvalidGrid(format!(
                "every direction needs at least 3 cells, got {n}"
            )));
        }
        if spacing.iter().any(|&h| !(h.is_finite() && h > 0.0)) {
            return Err(Error::InvalidGrid(format!(
                "spacings must be positive and finite, got {spacing:?}"
            )));
        }
        Ok(Self { cells, spacing })
    }

    /// Cube with `n` cells of unit spacing along every axis.
    pub fn cube(n: usize) -> Result<Self> {
        Self::new([n; 3], [1.0; 3])
    }

    pub fn cells(&self) -> [usize; 3] {
        self.cells
    }

    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn n(&self, axis: Axis) -> usize {
        self.cells[axis.index()]
    }

    pub fn h(&self, axis: Axis) -> f64 {
        self.spacing[axis.index()]
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    pub fn dims(&self, c: Component) -> [usize; 3] {
        let d = c.direction();
        let mut out = self.cells;
        for (a, n) in out.iter_mut().enumerate() {
            let shrink = if c.is_electric() { a != d } else { a == d };
            if shrink {
                *n -= 1;
            }
        }
        out
    }

    pub fn len(&self, c: Component) -> usize {
        self.dims(c).iter().product()
    }

    /// Total number of stored unknowns over all six components.
    pub fn unknowns(&self) -> usize {
        Component::ALL.iter().map(|&c| self.len(c)).sum()
    }

    /// Time step at which the explicit Yee scheme reaches its stability limit.
    pub fn explicit_limit(&self, medium: &Medium) -> f64 {
        let s: f64 = self.spacing.iter().map(|h| 1.0 / (h * h)).sum();
        1.0 / (medium.speed() * s.sqrt())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Medium {
    epsilon: f64,
    mu: f64,
}

pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
pub const MU_0: f64 = 1.256_637_062_12e-6;

impl Medium {
    pub fn new(epsilon: f64, mu: f64) -> Result<Self> {
        if !(epsilon.is_finite() && epsilon > 0.0 && mu.is_finite() && mu > 0.0) {
            return Err(Error::InvalidMedium(format!(
                "epsilon and mu must be positive, got epsilon={epsilon}, mu={mu}"
            )));
        }
        Ok(Self { epsilon, mu })
    }

    pub fn vacuum() -> Self {
        Self {
            epsilon: EPSILON_0,
            mu: MU_0,
        }
    }

    /// Unit permittivity and permeability (wave speed 1).
    pub fn normalized() -> Self {
        Self {
            epsilon: 1.0,
            mu: 1.0,
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn speed(&self) -> f64 {
        1.0 / (self.epsilon * self.mu).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimeConfig {
    pub dt: f64,
    pub cfl_number: f64,
}

impl TimeConfig {
    pub fn from_dt(grid: &YeeGrid, medium: &Medium, dt: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidTimeStep(format!("dt must be positive, got {dt}")));
        }
        Ok(Self {
            dt,
            cfl_number: dt / grid.explicit_limit(medium),
        })
    }

    pub fn from_cfl(grid: &YeeGrid, medium: &Medium, cfl_number: f64) -> Result<Self> {
        if !(cfl_number.is_finite() && cfl_number > 0.0) {
            return Err(Error::InvalidTimeStep(format!(
                "cfl number must be positive, got {cfl_number}"
            )));
        }
        Ok(Self {
            dt: cfl_number * grid.explicit_limit(medium),
            cfl_number,
        })
    }
}

/// `b = Δt/(2ε)` and `d = Δt/(2μ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coefficients {
    pub b: f64,
    pub d: f64,
}

impl Coefficients {
    pub fn new(dt: f64, medium: &Medium) -> Self {
        Self {
            b: dt / (2.0 * medium.epsilon()),
            d: dt / (2.0 * medium.mu()),
        }
    }
}

/// Whether a field set stores `u` or `ũ = 2u`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Scaling {
    #[default]
    Physical,
    Doubled,
}

impl Scaling {
    /// Factor converting stored values to physical ones.
    pub fn to_physical(self) -> f64 {
        match self {
            Scaling::Physical => 1.0,
            Scaling::Doubled => 0.5,
        }
    }
}

/// The six Yee components of `u` (or `ũ`).
#[derive(Clone, Debug, PartialEq)]
pub struct FieldSet<T = f64> {
    pub grid: YeeGrid,
    pub e: [Array3<T>; 3],
    pub h: [Array3<T>; 3],
    pub scaling: Scaling,
}

/// The six auxiliary components `v = (e, h)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AuxFieldSet<T = f64> {
    pub grid: YeeGrid,
    pub e: [Array3<T>; 3],
    pub h: [Array3<T>; 3],
}

fn shape(d: [usize; 3]) -> (usize, usize, usize) {
    (d[0], d[1], d[2])
}

impl<T: Real> FieldSet<T> {
    pub fn zeros(grid: YeeGrid) -> Self {
        Self::from_fn(grid, |_, _| T::zero())
    }

    /// Fill every component entry from `f(component, stored index)`.
    pub fn from_fn(grid: YeeGrid, mut f: impl FnMut(Component, [usize; 3]) -> T) -> Self {
        let mut make = |c: Component| {
            Array3::from_shape_fn(shape(grid.dims(c)), |(i, j, k)| f(c, [i, j, k]))
        };
        let e = [make(Component::Ex), make(Component::Ey), make(Component::Ez)];
        let h = [make(Component::Hx), make(Component::Hy), make(Component::Hz)];
        Self {
            grid,
            e,
            h,
            scaling: Scaling::Physical,
        }
    }

    pub fn component(&self, c: Component) -> &Array3<T> {
        if c.is_electric() {
            &self.e[c.direction()]
        } else {
            &self.h[c.direction()]
        }
    }

    pub fn component_mut(&mut self, c: Component) -> &mut Array3<T> {
        if c.is_electric() {
            &mut self.e[c.direction()]
        } else {
            &mut self.h[c.direction()]
        }
    }

    pub fn cast<U: Real>(&self) -> FieldSet<U> {
        let conv = |a: &Array3<T>| a.mapv(|v| U::from_f64(v.to_f64()));
        FieldSet {
            grid: self.grid,
            e: [conv(&self.e[0]), conv(&self.e[1]), conv(&self.e[2])],
            h: [conv(&self.h[0]), conv(&self.h[1]), conv(&self.h[2])],
            scaling: self.scaling,
        }
    }

    pub fn is_finite(&self) -> bool {
        Component::ALL
            .iter()
            .all(|&c| self.component(c).iter().all(|v| v.to_f64().is_finite()))
    }

    /// All stored values, E components first, each in row-major order.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.grid.unknowns());
        for c in Component::ALL {
            out.extend(self.component(c).iter().map(|v| v.to_f64()));
        }
        out
    }

    pub fn from_flat(grid: YeeGrid, data: &[f64]) -> Result<Self> {
        if data.len() != grid.unknowns() {
            return Err(Error::LengthMismatch {
                expected: grid.unknowns(),
                got: data.len(),
            });
        }
        let mut out = Self::zeros(grid);
        let mut offset = 0;
        for c in Component::ALL {
            let arr = out.component_mut(c);
            let n = arr.len();
            for (dst, &src) in arr.iter_mut().zip(&data[offset..offset + n]) {
                *dst = T::from_f64(src);
            }
            offset += n;
        }
        Ok(out)
    }
}

impl FieldSet<f64> {
    /// Independent uniform draws in `[-1, 1]` on every stored entry.
    pub fn random(grid: YeeGrid, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Self::from_fn(grid, |_, _| rng.random_range(-1.0..=1.0))
    }

    /// Uniform static magnetic field with zero E; the only spatially constant
    /// state compatible with the conducting walls.
    pub fn uniform_magnetic(grid: YeeGrid, h: [f64; 3]) -> Self {
        Self::from_fn(grid, |c, _| if c.is_electric() { 0.0 } else { h[c.direction()] })
    }

    pub fn scale(&mut self, f: f64) {
        for c in Component::ALL {
            self.component_mut(c).mapv_inplace(|v| v * f);
        }
    }

    pub fn scaled(&self, f: f64) -> Self {
        let mut out = self.clone();
        out.scale(f);
        out
    }

    /// `self + f · other`, componentwise.
    pub fn axpy(&mut self, f: f64, other: &FieldSet<f64>) {
        for c in Component::ALL {
            Zip::from(self.component_mut(c))
                .and(other.component(c))
                .for_each(|a, &b| *a += f * b);
        }
    }

    /// Copy with the scaling tag normalized to physical values.
    pub fn physical(&self) -> Self {
        let mut out = self.scaled(self.scaling.to_physical());
        out.scaling = Scaling::Physical;
        out
    }

    pub fn max_abs(&self) -> f64 {
        Component::ALL
            .iter()
            .flat_map(|&c| self.component(c).iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `Σ (ε|E|² + μ|H|²) · cell volume` over stored entries.
    pub fn energy(&self, medium: &Medium) -> f64 {
        let sq = |a: &Array3<f64>| a.iter().map(|v| v * v).sum::<f64>();
        let e: f64 = self.e.iter().map(sq).sum();
        let h: f64 = self.h.iter().map(sq).sum();
        (medium.epsilon() * e + medium.mu() * h) * self.grid.cell_volume()
    }

    /// Max-norm difference relative to the max norm of `reference`; zero
    /// when both sets vanish.
    pub fn relative_difference(&self, reference: &FieldSet<f64>) -> f64 {
        let mut diff: f64 = 0.0;
        for c in Component::ALL {
            Zip::from(self.component(c))
                .and(reference.component(c))
                .for_each(|&a, &b| diff = diff.max((a - b).abs()));
        }
        let scale = reference.max_abs();
        if diff == 0.0 {
            0.0
        } else if scale == 0.0 {
            f64::INFINITY
        } else {
            diff / scale
        }
    }
}

impl<T: Real> AuxFieldSet<T> {
    pub fn zeros(grid: YeeGrid) -> Self {
        let f = FieldSet::<T>::zeros(grid);
        Self {
            grid,
            e: f.e,
            h: f.h,
        }
    }

    /// Reinterpret as a field set (used when auxiliary variables act as
    /// fields, e.g. when seeding one scheme from another).
    pub fn into_fields(self) -> FieldSet<T> {
        FieldSet {
            grid: self.grid,
            e: self.e,
            h: self.h,
            scaling: Scaling::Physical,
        }
    }

    pub fn from_fields(f: FieldSet<T>) -> Self {
        Self {
            grid: f.grid,
            e: f.e,
            h: f.h,
        }
    }
}

fn check_extent<T>(f: &ArrayView3<T>, axis: Axis) -> Result<usize> {
    let n = f.len_of(axis.nd());
    if n < 2 {
        return Err(Error::Dimension(format!(
            "axis {axis:?} has extent {n}, need at least 2"
        )));
    }
    Ok(n)
}

/// `(f[i+1] − f[i]) / Δ` along `axis`; the result is one shorter along
/// `axis`. Maps H entries onto the E positions between them.
pub fn diff_forward<T: Real>(f: &Array3<T>, axis: Axis, spacing: f64) -> Result<Array3<T>> {
    let view = f.view();
    check_extent(&view, axis)?;
    let inv = T::from_f64(1.0 / spacing);
    let hi = view.slice_axis(axis.nd(), Slice::from(1..));
    let lo = view.slice_axis(axis.nd(), Slice::from(..-1));
    Ok(Zip::from(&hi).and(&lo).map_collect(|&a, &b| (a - b) * inv))
}

/// `(f[i] − f[i−1]) / Δ` along `axis` with `f[−1] = f[n] = 0` (the
/// conducting-wall values); the result is one longer along `axis`. Maps E
/// entries onto the H positions around them.
pub fn diff_backward<T: Real>(f: &Array3<T>, axis: Axis, spacing: f64) -> Result<Array3<T>> {
    let view = f.view();
    let n = check_extent(&view, axis)?;
    let inv = T::from_f64(1.0 / spacing);
    let mut dims = [view.dim().0, view.dim().1, view.dim().2];
    dims[axis.index()] = n + 1;
    Ok(Array3::from_shape_fn(shape(dims), |(i, j, k)| {
        let mut idx = [i, j, k];
        let m = idx[axis.index()];
        let hi = if m < n { view[idx] } else { T::zero() };
        let lo = if m > 0 {
            idx[axis.index()] = m - 1;
            view[idx]
        } else {
            T::zero()
        };
        (hi - lo) * inv
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn grid_rejects_thin_or_degenerate_boxes() {
        assert!(YeeGrid::new([2, 4, 4], [1.0; 3]).is_err());
        assert!(YeeGrid::new([4, 4, 4], [1.0, 0.0, 1.0]).is_err());
        assert!(YeeGrid::new([3, 3, 3], [1.0; 3]).is_ok());
    }

    #[test]
    fn component_extents_follow_yee_staggering() {
        let g = YeeGrid::new([4, 5, 6], [1.0; 3]).unwrap();
        assert_eq!(g.dims(Component::Ex), [4, 4, 5]);
        assert_eq!(g.dims(Component::Ey), [3, 5, 5]);
        assert_eq!(g.dims(Component::Ez), [3, 4, 6]);
        assert_eq!(g.dims(Component::Hx), [3, 5, 6]);
        assert_eq!(g.dims(Component::Hy), [4, 4, 6]);
        assert_eq!(g.dims(Component::Hz), [4, 5, 5]);
    }

    #[test]
    fn doubled_positions() {
        assert_eq!(Component::Ex.doubled_position([0, 0, 0]), [1, 2, 2]);
        assert_eq!(Component::Hz.doubled_position([0, 0, 0]), [1, 1, 2]);
        assert_eq!(Component::Hx.doubled_position([1, 2, 3]), [4, 5, 7]);
    }

    #[test]
    fn medium_and_time_validation() {
        assert!(Medium::new(0.0, 1.0).is_err());
        assert!(Medium::new(1.0, -1.0).is_err());
        let g = YeeGrid::cube(4).unwrap();
        let m = Medium::normalized();
        assert!(TimeConfig::from_dt(&g, &m, 0.0).is_err());
        let t = TimeConfig::from_cfl(&g, &m, 5.0).unwrap();
        let back = TimeConfig::from_dt(&g, &m, t.dt).unwrap();
        assert!((back.cfl_number - 5.0).abs() < 1e-14);
        // c = 1, unit cube cells: dt_cfl = 1/sqrt(3)
        assert!((t.dt - 5.0 / 3f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn coefficients() {
        let m = Medium::new(2.0, 4.0).unwrap();
        let c = Coefficients::new(0.8, &m);
        assert_eq!(c.b, 0.2);
        assert_eq!(c.d, 0.1);
    }

    #[test]
    fn forward_difference_examples() {
        let f = Array3::from_elem((3, 4, 5), 2.5);
        for a in Axis::ALL {
            assert!(diff_forward(&f, a, 0.3).unwrap().iter().all(|&v| v == 0.0));
        }
        let ramp = Array3::from_shape_fn((6, 2, 2), |(i, _, _)| i as f64 * 0.5);
        let d = diff_forward(&ramp, Axis::X, 0.5).unwrap();
        assert_eq!(d.dim(), (5, 2, 2));
        assert!(d.iter().all(|&v| v == 1.0));
        let sq = array![[[1.0], [4.0], [9.0]]];
        let d = diff_forward(&sq, Axis::Y, 1.0).unwrap();
        assert_eq!(d.iter().copied().collect::<Vec<_>>(), vec![3.0, 5.0]);
        let thin = Array3::<f64>::zeros((1, 3, 3));
        assert!(matches!(diff_forward(&thin, Axis::X, 1.0), Err(Error::Dimension(_))));
    }

    #[test]
    fn backward_difference_interior_and_walls() {
        let f = Array3::from_elem((2, 5, 2), 3.0);
        let d = diff_backward(&f, Axis::Y, 1.0).unwrap();
        assert_eq!(d.dim(), (2, 6, 2));
        // interior entries see no variation; the walls contribute ±f
        for ((_, j, _), &v) in d.indexed_iter() {
            match j {
                0 => assert_eq!(v, 3.0),
                5 => assert_eq!(v, -3.0),
                _ => assert_eq!(v, 0.0),
            }
        }
        let ramp = Array3::from_shape_fn((2, 2, 7), |(_, _, k)| 1.5 * k as f64);
        let d = diff_backward(&ramp, Axis::Z, 0.5).unwrap();
        for k in 1..7 {
            assert_eq!(d[[1, 1, k]], 3.0);
        }
    }

    #[test]
    fn second_difference_composition() {
        // 5-point line: backward(forward(f)) = f[i+1] - 2 f[i] + f[i-1] on the interior
        let f = array![[[2.0, -1.0, 4.0, 0.5, 3.0]]];
        let h = 0.5;
        let dd = diff_backward(&diff_forward(&f, Axis::Z, h).unwrap(), Axis::Z, h).unwrap();
        for i in 1..4 {
            let expect = (f[[0, 0, i + 1]] - 2.0 * f[[0, 0, i]] + f[[0, 0, i - 1]]) / (h * h);
            assert!((dd[[0, 0, i]] - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn forward_and_backward_are_negative_transposes() {
        // assemble both on a single line and compare D_b = -D_f^T
        let n = 6;
        let unit = |len: usize, p: usize| {
            Array3::from_shape_fn((1, 1, len), |(_, _, k)| if k == p { 1.0 } else { 0.0 })
        };
        let mut df = vec![vec![0.0; n]; n - 1];
        for p in 0..n {
            let col = diff_forward(&unit(n, p), Axis::Z, 1.0).unwrap();
            for r in 0..n - 1 {
                df[r][p] = col[[0, 0, r]];
            }
        }
        for p in 0..n - 1 {
            let col = diff_backward(&unit(n - 1, p), Axis::Z, 1.0).unwrap();
            for r in 0..n {
                assert_eq!(col[[0, 0, r]], -df[p][r]);
            }
        }
    }

    #[test]
    fn flat_round_trip_and_relative_difference() {
        let g = YeeGrid::new([3, 4, 5], [1.0, 2.0, 0.5]).unwrap();
        let f = FieldSet::random(g, 7);
        let back = FieldSet::<f64>::from_flat(g, &f.to_flat()).unwrap();
        assert_eq!(f, back);
        assert_eq!(f.relative_difference(&back), 0.0);
        let z = FieldSet::<f64>::zeros(g);
        assert_eq!(z.relative_difference(&z), 0.0);
        assert!(FieldSet::<f64>::from_flat(g, &[0.0; 3]).is_err());
    }

    #[test]
    fn energy_of_uniform_magnetic_field() {
        let g = YeeGrid::new([3, 3, 3], [0.5, 0.5, 2.0]).unwrap();
        let m = Medium::new(1.0, 3.0).unwrap();
        let f = FieldSet::uniform_magnetic(g, [1.0, 0.0, 0.0]);
        let count = g.len(Component::Hx) as f64;
        assert!((f.energy(&m) - 3.0 * count * 0.5).abs() < 1e-12);
    }
}
