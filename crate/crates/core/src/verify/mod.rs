//! Verification harness: equivalence, stability, convergence order, a dense
//! brute-force oracle and the cross-scheme identities.
//!
//! Every procedure is deterministic for a given seed and returns a
//! [`VerificationResult`] whose `pass` flag is exactly "metric inside
//! `[lower, upper]`".

mod dense;

use std::time::Instant;

use crate::error::{Error, Result};
use crate::grid::{FieldSet, Medium, TimeConfig, YeeGrid};
use crate::operators::{apply_curl, identity_plus, Split};
use crate::schemes::{
    douglas_gunn_step, dyakonov_intermediate, lod_to_adi_convert, Formulation, HUpdate, SchemeId,
    Stepper, StepperConfig,
};
use crate::Exec;

pub use dense::{applied_matrices, coordinate_curl_matrices, dense_oracle_from, dense_oracle_test, DENSE_LIMIT};

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationResult {
    pub name: String,
    pub metric: f64,
    pub lower: f64,
    pub upper: f64,
    pub pass: bool,
    pub runtime_s: f64,
    /// Secondary named values, for reports.
    pub details: Vec<(String, f64)>,
}

impl VerificationResult {
    pub fn new(name: impl Into<String>, metric: f64, lower: f64, upper: f64, start: Instant) -> Self {
        Self {
            name: name.into(),
            metric,
            lower,
            upper,
            pass: metric >= lower && metric <= upper,
            runtime_s: start.elapsed().as_secs_f64(),
            details: Vec::new(),
        }
    }

    pub fn at_most(name: impl Into<String>, metric: f64, upper: f64, start: Instant) -> Self {
        Self::new(name, metric, f64::NEG_INFINITY, upper, start)
    }

    pub fn with_detail(mut self, key: impl Into<String>, value: f64) -> Self {
        self.details.push((key.into(), value));
        self
    }

    /// Wall time stays out of the CSV so reruns produce identical bytes.
    pub fn csv_header() -> &'static str {
        "name,metric,lower,upper,pass"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{}",
            self.name, self.metric, self.lower, self.upper, self.pass
        )
    }

    /// One human-readable line.
    pub fn summary(&self) -> String {
        let bound = if self.lower.is_finite() {
            format!("in [{:.3e}, {:.3e}]", self.lower, self.upper)
        } else {
            format!("<= {:.3e}", self.upper)
        };
        format!(
            "{} {}: metric {:.6e} {} ({:.2}s)",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.metric,
            bound,
            self.runtime_s
        )
    }
}

pub fn to_csv(results: &[VerificationResult]) -> String {
    let mut out = String::from(VerificationResult::csv_header());
    out.push('\n');
    for r in results {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Shared settings of the harness.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Setup {
    pub grid: YeeGrid,
    pub medium: Medium,
    pub cfl: f64,
    pub seed: u64,
    pub exec: Exec,
}

impl Setup {
    pub fn cube(n: usize, cfl: f64, seed: u64) -> Result<Self> {
        Ok(Self {
            grid: YeeGrid::cube(n)?,
            medium: Medium::normalized(),
            cfl,
            seed,
            exec: Exec::Serial,
        })
    }

    pub fn dt(&self) -> Result<f64> {
        Ok(TimeConfig::from_cfl(&self.grid, &self.medium, self.cfl)?.dt)
    }

    fn config(&self, scheme: SchemeId, form: Formulation) -> Result<StepperConfig> {
        Ok(StepperConfig::new(scheme, form, self.dt()?, self.medium).with_exec(self.exec))
    }
}

/// Run both formulations of `scheme` from the same random fields and track
/// the largest relative difference of their integer-step outputs.
pub fn equivalence_test(scheme: SchemeId, setup: &Setup, steps: usize) -> Result<VerificationResult> {
    equivalence_from(scheme, setup, steps, &FieldSet::random(setup.grid, setup.seed))
}

pub fn equivalence_from(
    scheme: SchemeId,
    setup: &Setup,
    steps: usize,
    u0: &FieldSet<f64>,
) -> Result<VerificationResult> {
    let start = Instant::now();
    let mut orig = Stepper::<f64>::new(setup.config(scheme, Formulation::Original)?, u0)?;
    let mut fund = Stepper::<f64>::new(setup.config(scheme, Formulation::Fundamental)?, u0)?;
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        orig.step()?;
        fund.step()?;
        worst = worst.max(fund.output()?.relative_difference(&orig.output()?));
    }
    Ok(VerificationResult::at_most(format!("equivalence/{scheme}"), worst, 1e-11, start))
}

/// The quadratic form a scheme holds fixed in exact arithmetic.
///
/// The locally one-dimensional family and Crank-Nicolson conserve the
/// physical energy of `u`. The alternating-direction family (including the
/// D'Yakonov and Douglas-Gunn variants, which produce the same fields)
/// conserves the energy of `(I − Δt/2 B) u` instead; the physical energy of
/// those schemes oscillates around it.
pub fn conserved_energy(scheme: SchemeId, u: &FieldSet<f64>, dt: f64, medium: &Medium) -> f64 {
    match scheme {
        SchemeId::Adi | SchemeId::Dyakonov | SchemeId::DouglasGunn => {
            identity_plus(Split::B, -dt / 2.0, u, medium).energy(medium)
        }
        _ => u.energy(medium),
    }
}

/// Largest energy over the whole run divided by the largest energy over its
/// first tenth; non-finite fields give an infinite metric.
struct EnergyWindow {
    steps: usize,
    seen: usize,
    early: f64,
    all: f64,
}

impl EnergyWindow {
    fn new(steps: usize) -> Self {
        Self {
            steps,
            seen: 0,
            early: 0.0,
            all: 0.0,
        }
    }

    fn push(&mut self, e: f64) {
        let e = if e.is_finite() { e } else { f64::INFINITY };
        if self.seen < (self.steps / 10).max(1) {
            self.early = self.early.max(e);
        }
        self.all = self.all.max(e);
        self.seen += 1;
    }

    fn ratio(&self) -> f64 {
        if self.all == 0.0 {
            // identically zero fields
            1.0
        } else if self.early == 0.0 || !self.all.is_finite() {
            f64::INFINITY
        } else {
            self.all / self.early
        }
    }
}

/// Energy-boundedness run at the configured CFL number.
pub fn stability_test(
    scheme: SchemeId,
    form: Formulation,
    setup: &Setup,
    steps: usize,
) -> Result<VerificationResult> {
    stability_from(scheme, form, setup, steps, &FieldSet::random(setup.grid, setup.seed))
}

pub fn stability_from(
    scheme: SchemeId,
    form: Formulation,
    setup: &Setup,
    steps: usize,
    u0: &FieldSet<f64>,
) -> Result<VerificationResult> {
    let start = Instant::now();
    let dt = setup.dt()?;
    let mut s = Stepper::<f64>::new(setup.config(scheme, form)?, u0)?;
    let mut conserved = EnergyWindow::new(steps);
    let mut physical = EnergyWindow::new(steps);
    for _ in 0..steps {
        s.step()?;
        let out = s.output()?;
        conserved.push(conserved_energy(scheme, &out, dt, &setup.medium));
        physical.push(out.energy(&setup.medium));
    }
    Ok(VerificationResult::at_most(
        format!("stability/{scheme}/{form}/cfl{}", setup.cfl),
        conserved.ratio(),
        1.0 + 1e-6,
        start,
    )
    .with_detail("physical_energy_ratio", physical.ratio()))
}

/// Conventional explicit leapfrog Yee scheme run through the same metric;
/// beyond its CFL limit it must blow up.
pub fn explicit_yee_control(setup: &Setup, steps: usize) -> Result<VerificationResult> {
    let start = Instant::now();
    let dt = setup.dt()?;
    let mut u = FieldSet::random(setup.grid, setup.seed);
    let mut window = EnergyWindow::new(steps);
    for _ in 0..steps {
        let du = apply_curl(&u, &setup.medium);
        for d in 0..3 {
            u.e[d].scaled_add(dt, &du.e[d]);
        }
        let du = apply_curl(&u, &setup.medium);
        for d in 0..3 {
            u.h[d].scaled_add(dt, &du.h[d]);
        }
        window.push(u.energy(&setup.medium));
        if !u.is_finite() {
            break;
        }
    }
    Ok(VerificationResult::at_most(
        format!("stability/explicit-yee/cfl{}", setup.cfl),
        window.ratio(),
        1.0 + 1e-6,
        start,
    ))
}

/// Smooth cavity-like initial field: one low sine mode per component,
/// vanishing on the walls where the component is tangential.
pub fn smooth_fields(grid: YeeGrid) -> FieldSet<f64> {
    use std::f64::consts::PI;
    let cells = grid.cells();
    FieldSet::from_fn(grid, |c, idx| {
        let p = c.doubled_position(idx);
        let x = |a: usize| p[a] as f64 / (2.0 * cells[a] as f64);
        let d = c.direction();
        let (a1, a2) = ((d + 1) % 3, (d + 2) % 3);
        let w = [0.7, -0.4, 0.9][d];
        if c.is_electric() {
            w * (PI * x(d)).cos() * (PI * x(a1)).sin() * (PI * x(a2)).sin()
        } else {
            0.5 * w * (PI * x(d)).sin() * (PI * x(a1)).cos() * (PI * x(a2)).cos()
        }
    })
}

/// Step counts of the convergence study: coarse run, two refinements, and
/// the self-reference at one thirty-second of the coarse step.
pub const CONVERGENCE_STEPS: [usize; 3] = [8, 16, 32];
pub const CONVERGENCE_REFERENCE: usize = 256;
/// Default physical end time of the convergence study on unit cells.
pub const CONVERGENCE_T_END: f64 = 4.0;

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}

/// Temporal convergence slope against a same-scheme fine-step reference,
/// over a fixed physical time `t_end`.
pub fn convergence_order_test(
    scheme: SchemeId,
    form: Formulation,
    grid: YeeGrid,
    t_end: f64,
) -> Result<VerificationResult> {
    let start = Instant::now();
    let medium = Medium::normalized();
    let u0 = smooth_fields(grid);
    let run = |n: usize| -> Result<FieldSet<f64>> {
        let cfg = StepperConfig::new(scheme, form, t_end / n as f64, medium);
        let mut s = Stepper::<f64>::new(cfg, &u0)?;
        s.run(n)?;
        s.output()
    };
    let reference = run(CONVERGENCE_REFERENCE)?;
    let mut dts = Vec::new();
    let mut errs = Vec::new();
    for n in CONVERGENCE_STEPS {
        dts.push(t_end / n as f64);
        errs.push(run(n)?.relative_difference(&reference));
    }
    let slope = loglog_slope(&dts, &errs);
    let target = scheme.temporal_order() as f64;
    let mut r = VerificationResult::new(
        format!("convergence/{scheme}/{form}"),
        slope,
        target - 0.2,
        target + 0.2,
        start,
    );
    for (dt, e) in dts.iter().zip(&errs) {
        r = r.with_detail(format!("error@dt={dt:.4e}"), *e);
    }
    Ok(r)
}

/// Fundamental locally one-dimensional iteration seeded through
/// [`lod_to_adi_convert`]: its auxiliary variables must follow the
/// fundamental alternating-direction fields.
pub fn lod_seeded_link(setup: &Setup, steps: usize) -> Result<VerificationResult> {
    let start = Instant::now();
    let dt = setup.dt()?;
    let w0 = FieldSet::random(setup.grid, setup.seed);
    let mut adi = Stepper::<f64>::new(setup.config(SchemeId::Adi, Formulation::Fundamental)?, &w0)?;
    let seeded = lod_to_adi_convert(&w0, dt, &setup.medium);
    let cfg = setup
        .config(SchemeId::Lod1, Formulation::Fundamental)?
        .with_h_update(HUpdate::Explicit);
    let mut lod = Stepper::<f64>::new(cfg, &seeded)?;
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        adi.step()?;
        lod.step()?;
        let v = lod.auxiliary().clone().into_fields();
        worst = worst.max(v.relative_difference(&adi.output()?));
    }
    Ok(VerificationResult::at_most("link/lod-seeded-adi", worst, 1e-11, start))
}

/// D'Yakonov fields (both forms) and their intermediate `u*` against the
/// fundamental alternating-direction run.
pub fn dyakonov_link(setup: &Setup, steps: usize) -> Result<VerificationResult> {
    let start = Instant::now();
    let dt = setup.dt()?;
    let u0 = FieldSet::random(setup.grid, setup.seed);
    let mut adi = Stepper::<f64>::new(setup.config(SchemeId::Adi, Formulation::Fundamental)?, &u0)?;
    let mut dys = Formulation::ALL
        .iter()
        .map(|&f| Stepper::<f64>::new(setup.config(SchemeId::Dyakonov, f)?, &u0))
        .collect::<Result<Vec<_>>>()?;
    let (mut worst, mut worst_star) = (0.0f64, 0.0f64);
    for _ in 0..steps {
        adi.step()?;
        let reference = adi.output()?;
        let star = identity_plus(Split::B, -dt / 2.0, &reference, &setup.medium);
        for dy in dys.iter_mut() {
            dy.step()?;
            worst = worst.max(dy.output()?.relative_difference(&reference));
            worst_star = worst_star.max(dyakonov_intermediate(dy)?.relative_difference(&star));
        }
    }
    Ok(VerificationResult::at_most("link/dyakonov-adi", worst.max(worst_star), 1e-11, start)
        .with_detail("fields", worst)
        .with_detail("intermediate", worst_star))
}

/// Douglas-Gunn increments, summed from the initial fields, against the
/// fundamental alternating-direction run. Both forms are checked.
pub fn douglas_gunn_link(setup: &Setup, steps: usize) -> Result<VerificationResult> {
    let start = Instant::now();
    let u0 = FieldSet::random(setup.grid, setup.seed);
    let mut adi = Stepper::<f64>::new(setup.config(SchemeId::Adi, Formulation::Fundamental)?, &u0)?;
    let mut dgs = Formulation::ALL
        .iter()
        .map(|&f| Stepper::<f64>::new(setup.config(SchemeId::DouglasGunn, f)?, &u0))
        .collect::<Result<Vec<_>>>()?;
    let mut rebuilt = vec![u0.clone(); dgs.len()];
    let mut worst: f64 = 0.0;
    for _ in 0..steps {
        adi.step()?;
        let reference = adi.output()?;
        for (dg, acc) in dgs.iter_mut().zip(rebuilt.iter_mut()) {
            let delta = douglas_gunn_step(dg)?;
            acc.axpy(1.0, &delta.full);
            worst = worst.max(acc.relative_difference(&reference));
        }
    }
    Ok(VerificationResult::at_most("link/douglas-gunn-delta", worst, 1e-11, start))
}

/// The three identities combined; the metric is the worst of them.
pub fn cross_scheme_link_test(setup: &Setup, steps: usize) -> Result<VerificationResult> {
    let start = Instant::now();
    let parts = [
        lod_seeded_link(setup, steps)?,
        dyakonov_link(setup, steps)?,
        douglas_gunn_link(setup, steps)?,
    ];
    let worst = parts.iter().map(|r| r.metric).fold(0.0, f64::max);
    let mut r = VerificationResult::at_most("link/all", worst, 1e-11, start);
    for p in parts {
        r = r.with_detail(p.name, p.metric);
    }
    Ok(r)
}

pub(crate) fn check_dense_size(grid: &YeeGrid) -> Result<()> {
    if grid.cells().iter().any(|&n| n > 4) {
        return Err(Error::Capability(format!(
            "dense oracle limited to 4 cells per axis, got {:?}",
            grid.cells()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_fields_give_zero_metrics() {
        let setup = Setup::cube(4, 5.0, 0).unwrap();
        let z = FieldSet::zeros(setup.grid);
        let r = equivalence_from(SchemeId::Adi, &setup, 3, &z).unwrap();
        assert_eq!(r.metric, 0.0);
        let r = stability_from(SchemeId::Ss2, Formulation::Original, &setup, 10, &z).unwrap();
        assert!(r.pass && r.metric == 1.0);
    }

    #[test]
    fn slope_of_exact_power_law() {
        let x = [0.1, 0.05, 0.025];
        let y: Vec<f64> = x.iter().map(|v| 3.0 * v * v).collect();
        assert!((loglog_slope(&x, &y) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn explicit_control_blows_up_beyond_limit() {
        let setup = Setup::cube(6, 2.0, 3).unwrap();
        let r = explicit_yee_control(&setup, 400).unwrap();
        assert!(!r.pass);
        let setup = Setup::cube(6, 0.5, 3).unwrap();
        let r = explicit_yee_control(&setup, 400).unwrap();
        assert!(r.metric.is_finite());
    }

    #[test]
    fn pass_flag_tracks_bounds() {
        let t = Instant::now();
        assert!(VerificationResult::new("x", 1.9, 1.8, 2.2, t).pass);
        assert!(!VerificationResult::new("x", 2.3, 1.8, 2.2, t).pass);
        assert!(!VerificationResult::at_most("x", f64::NAN, 1.0, t).pass);
        let csv = to_csv(&[VerificationResult::at_most("y", 0.5, 1.0, t)]);
        assert_eq!(csv.lines().count(), 2);
    }

    #[test]
    fn links_hold_on_small_grid() {
        let setup = Setup::cube(5, 5.0, 11).unwrap();
        let r = cross_scheme_link_test(&setup, 10).unwrap();
        assert!(r.pass, "{r:?}");
    }
}
