//! Unsplit Crank-Nicolson reference, solved directly.
//!
//! Writing the curl operator as `M = [[0, P], [Q, 0]]` (electric rows
//! first), the system `(αI − βM) x = r` reduces to the electric unknowns
//!
//! ```text
//! (α² I − β² P Q) x_E = α r_E + β P r_H,    x_H = (r_H + β Q x_E) / α.
//! ```
//!
//! `−PQ` is a scaled `CᵀC`, so the reduced matrix is symmetric positive
//! definite. Ordering the electric unknowns by physical position gives it a
//! narrow band, which is factorized once by banded Cholesky.

use crate::error::{Error, Result};
use crate::grid::{Component, FieldSet, Medium, YeeGrid};
use crate::operators::apply_curl;

use super::Formulation;

/// Largest problem (total stored unknowns) the direct solver accepts.
pub const MAX_UNKNOWNS: usize = 10_000;

#[derive(Clone, Debug)]
struct Csr {
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl Csr {
    fn from_triplets(rows: usize, mut t: Vec<(usize, usize, f64)>) -> Self {
        t.sort_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0; rows + 1];
        for &(r, _, _) in &t {
            indptr[r + 1] += 1;
        }
        for r in 0..rows {
            indptr[r + 1] += indptr[r];
        }
        Self {
            indptr,
            indices: t.iter().map(|x| x.1).collect(),
            values: t.iter().map(|x| x.2).collect(),
        }
    }

    fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.indptr[r]..self.indptr[r + 1];
        self.indices[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// `y += f · (self x)`.
    fn mul_add(&self, x: &[f64], f: f64, y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let s: f64 = self.row(r).map(|(c, v)| v * x[c]).sum();
            *out += f * s;
        }
    }
}

/// Lower factor of a symmetric banded matrix, row `i` holding columns
/// `i − bw ..= i`.
#[derive(Clone, Debug)]
struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.l[i * (self.bw + 1) + j + self.bw - i]
    }

    /// `entry(i, j)` must return the matrix entry for `j ≤ i`, `i − j ≤ bw`.
    fn factor(n: usize, bw: usize, entry: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut f = Self {
            n,
            bw,
            l: vec![0.0; n * (bw + 1)],
        };
        for i in 0..n {
            for j in i.saturating_sub(bw)..=i {
                let k0 = i.saturating_sub(bw).max(j.saturating_sub(bw));
                let mut s = entry(i, j);
                for k in k0..j {
                    s -= f.at(i, k) * f.at(j, k);
                }
                let v = if i == j {
                    if s <= 0.0 || !s.is_finite() {
                        return Err(Error::Singular { row: i });
                    }
                    s.sqrt()
                } else {
                    s / f.at(j, j)
                };
                f.l[i * (bw + 1) + j + bw - i] = v;
            }
        }
        Ok(f)
    }

    fn solve_in_place(&self, x: &mut [f64]) {
        let (n, bw) = (self.n, self.bw);
        for i in 0..n {
            let mut s = x[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.at(i, k) * x[k];
            }
            x[i] = s / self.at(i, i);
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..n.min(i + bw + 1) {
                s -= self.at(k, i) * x[k];
            }
            x[i] = s / self.at(i, i);
        }
    }
}

/// Direct solver for one form of the Crank-Nicolson step on a fixed grid.
#[derive(Clone, Debug)]
pub struct CrankNicolson {
    grid: YeeGrid,
    form: Formulation,
    alpha: f64,
    beta: f64,
    n_e: usize,
    p: Csr,
    q: Csr,
    /// `order[k]` is the electric unknown at band position `k`.
    order: Vec<usize>,
    chol: BandCholesky,
}

fn electric_positions(grid: &YeeGrid) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for c in Component::ELECTRIC {
        let d = grid.dims(c);
        for i in 0..d[0] {
            for j in 0..d[1] {
                for k in 0..d[2] {
                    out.push(c.doubled_position([i, j, k]));
                }
            }
        }
    }
    out
}

impl CrankNicolson {
    pub fn new(grid: YeeGrid, medium: &Medium, dt: f64, form: Formulation) -> Result<Self> {
        let total = grid.unknowns();
        if total > MAX_UNKNOWNS {
            return Err(Error::Capability(format!(
                "direct Crank-Nicolson solve limited to {MAX_UNKNOWNS} unknowns, grid has {total}"
            )));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidTimeStep(format!("dt must be positive, got {dt}")));
        }
        let (alpha, beta) = match form {
            Formulation::Original => (1.0, dt / 2.0),
            Formulation::Fundamental => (0.5, dt / 4.0),
        };
        let n_e: usize = Component::ELECTRIC.iter().map(|&c| grid.len(c)).sum();
        let n_h = total - n_e;

        let mut pt = Vec::new();
        let mut qt = Vec::new();
        let mut unit = vec![0.0; total];
        for col in 0..total {
            unit[col] = 1.0;
            let image = apply_curl(&FieldSet::from_flat(grid, &unit)?, medium).to_flat();
            unit[col] = 0.0;
            for (row, &v) in image.iter().enumerate() {
                if v == 0.0 {
                    continue;
                }
                match (row < n_e, col < n_e) {
                    (true, false) => pt.push((row, col - n_e, v)),
                    (false, true) => qt.push((row - n_e, col, v)),
                    _ => unreachable!("the curl couples E only to H"),
                }
            }
        }
        let p = Csr::from_triplets(n_e, pt);
        let q = Csr::from_triplets(n_h, qt);

        // rows of α² I − β² P Q
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n_e);
        let mut acc = vec![0.0; n_e];
        let mut seen = vec![false; n_e];
        let mut touched = Vec::new();
        for i in 0..n_e {
            touched.push(i);
            seen[i] = true;
            acc[i] = alpha * alpha;
            for (k, pv) in p.row(i) {
                for (j, qv) in q.row(k) {
                    if !seen[j] {
                        seen[j] = true;
                        touched.push(j);
                    }
                    acc[j] -= beta * beta * pv * qv;
                }
            }
            touched.sort_unstable();
            rows.push(touched.iter().map(|&j| (j, acc[j])).collect());
            for &j in &touched {
                acc[j] = 0.0;
                seen[j] = false;
            }
            touched.clear();
        }

        let pos = electric_positions(&grid);
        let mut order: Vec<usize> = (0..n_e).collect();
        order.sort_by_key(|&i| pos[i]);
        let mut rank = vec![0; n_e];
        for (k, &i) in order.iter().enumerate() {
            rank[i] = k;
        }
        let mut bw = 0;
        for (i, row) in rows.iter().enumerate() {
            for &(j, _) in row {
                bw = bw.max(rank[i].abs_diff(rank[j]));
            }
        }
        let band: Vec<std::collections::HashMap<usize, f64>> = order
            .iter()
            .map(|&i| rows[i].iter().map(|&(j, v)| (rank[j], v)).collect())
            .collect();
        let chol = BandCholesky::factor(n_e, bw, |r, c| band[r].get(&c).copied().unwrap_or(0.0))?;

        Ok(Self {
            grid,
            form,
            alpha,
            beta,
            n_e,
            p,
            q,
            order,
            chol,
        })
    }

    pub fn formulation(&self) -> Formulation {
        self.form
    }

    pub fn bandwidth(&self) -> usize {
        self.chol.bw
    }

    /// Advance `u` by one step.
    pub fn step(&self, u: &FieldSet<f64>) -> Result<FieldSet<f64>> {
        if u.grid != self.grid {
            return Err(Error::Dimension("field set grid differs from solver grid".into()));
        }
        let flat = u.to_flat();
        let (ue, uh) = flat.split_at(self.n_e);
        let (alpha, beta) = (self.alpha, self.beta);

        let (re, rh) = match self.form {
            Formulation::Original => {
                let mut re = ue.to_vec();
                let mut rh = uh.to_vec();
                self.p.mul_add(uh, beta, &mut re);
                self.q.mul_add(ue, beta, &mut rh);
                (re, rh)
            }
            Formulation::Fundamental => (ue.to_vec(), uh.to_vec()),
        };

        let mut rhs: Vec<f64> = re.iter().map(|v| alpha * v).collect();
        self.p.mul_add(&rh, beta, &mut rhs);
        let mut band: Vec<f64> = self.order.iter().map(|&i| rhs[i]).collect();
        self.chol.solve_in_place(&mut band);
        let mut xe = vec![0.0; self.n_e];
        for (k, &i) in self.order.iter().enumerate() {
            xe[i] = band[k];
        }
        let mut xh = rh;
        self.q.mul_add(&xe, beta, &mut xh);
        let inv = 1.0 / alpha;
        let mut out = xe;
        out.extend(xh.iter().map(|v| v * inv));

        if self.form == Formulation::Fundamental {
            for (o, v) in out.iter_mut().zip(&flat) {
                *o -= v;
            }
        }
        let mut next = FieldSet::from_flat(self.grid, &out)?;
        next.scaling = u.scaling;
        Ok(next)
    }
}

/// One Crank-Nicolson step of `u` in the requested form.
pub fn crank_nicolson_reference_step(
    u: &FieldSet<f64>,
    dt: f64,
    medium: &Medium,
    form: Formulation,
) -> Result<FieldSet<f64>> {
    CrankNicolson::new(u.grid, medium, dt, form)?.step(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_cholesky_matches_dense_solve() {
        let n = 7;
        let a = |i: usize, j: usize| -> f64 {
            if i == j {
                4.0
            } else if i.abs_diff(j) <= 2 {
                -0.7 / (1 + i + j) as f64
            } else {
                0.0
            }
        };
        let f = BandCholesky::factor(n, 2, a).unwrap();
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.9).cos()).collect();
        let mut b: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|j| a(i.max(j), i.min(j)) * x_true[j]).sum())
            .collect();
        f.solve_in_place(&mut b);
        for (x, y) in b.iter().zip(&x_true) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_large_grids() {
        let g = YeeGrid::cube(16).unwrap();
        let r = CrankNicolson::new(g, &Medium::normalized(), 0.1, Formulation::Original);
        assert!(matches!(r, Err(Error::Capability(_))));
    }

    #[test]
    fn zero_stays_zero_and_forms_agree() {
        let g = YeeGrid::cube(4).unwrap();
        let m = Medium::normalized();
        let z = FieldSet::<f64>::zeros(g);
        for form in [Formulation::Original, Formulation::Fundamental] {
            assert_eq!(crank_nicolson_reference_step(&z, 0.5, &m, form).unwrap().max_abs(), 0.0);
        }
        let u = FieldSet::random(g, 3);
        let a = crank_nicolson_reference_step(&u, 0.5, &m, Formulation::Original).unwrap();
        let b = crank_nicolson_reference_step(&u, 0.5, &m, Formulation::Fundamental).unwrap();
        assert!(a.relative_difference(&b) < 1e-12);
    }

    #[test]
    fn energy_is_conserved() {
        let g = YeeGrid::new([4, 5, 3], [1.0, 0.7, 1.3]).unwrap();
        let m = Medium::new(1.5, 0.8).unwrap();
        let cn = CrankNicolson::new(g, &m, 2.0, Formulation::Original).unwrap();
        let mut u = FieldSet::random(g, 9);
        let e0 = u.energy(&m);
        for _ in 0..20 {
            u = cn.step(&u).unwrap();
        }
        assert!((u.energy(&m) / e0 - 1.0).abs() < 1e-12);
    }
}
