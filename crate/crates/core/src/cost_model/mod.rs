//! Machine-independent operation counts per scheme and formulation.
//!
//! The static model enumerates, for one full time step, every updating
//! equation each stepper evaluates and the kernel(s) that implement it. Each
//! kernel has a fixed per-point cost, so summing over the plan gives counts per
//! six-component cell bundle. [`runtime_flop_audit`] runs the real steppers on
//! the instrumented [`Counted`] scalar and tallies the same quantities
//! independently.
//!
//! Counting convention: a multiplication by a precomputed factor is one M/D;
//! a fixed ½ or 2 scaling also counts as a multiplication; addition and
//! subtraction each count one A/S. Electric updates form the implicit
//! right-hand sides; magnetic updates are explicit.

mod counted;

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::grid::{Component, FieldSet, YeeGrid};
use crate::schemes::{Formulation, HUpdate, SchemeId, Stepper, StepperConfig};
use crate::Exec;

pub use counted::{Counted, Tally};

/// Tridiagonal solve cost per line unknown used by the overall gain.
pub const SOLVE_FLOPS_PER_UNKNOWN: u64 = 5;

/// The eight scheme/formulation pairs that make up the comparison table.
pub const TABLE_COLUMNS: [(SchemeId, Formulation); 8] = [
    (SchemeId::Adi, Formulation::Original),
    (SchemeId::Adi, Formulation::Fundamental),
    (SchemeId::Lod1, Formulation::Original),
    (SchemeId::Lod1, Formulation::Fundamental),
    (SchemeId::Ss2, Formulation::Original),
    (SchemeId::Ss2, Formulation::Fundamental),
    (SchemeId::Lod2, Formulation::Original),
    (SchemeId::Lod2, Formulation::Fundamental),
];

/// Point kernels and their per-point `(M/D, A/S)` cost.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kernel {
    PlainFrom,
    PlainAccumulate,
    TwoPlain,
    SubtractFrom,
    AddAssign,
    PaddedFrom,
    PaddedAccumulate,
    PaddedDoubled,
    TwoPadded,
    LodRhs,
    LodH,
    AdiRhs,
}

impl Kernel {
    pub fn cost(self) -> (u64, u64) {
        use Kernel::*;
        match self {
            PlainFrom | PlainAccumulate | PaddedFrom | PaddedAccumulate => (1, 2),
            SubtractFrom | AddAssign => (0, 1),
            PaddedDoubled => (2, 2),
            TwoPlain | TwoPadded => (2, 3),
            LodRhs => (3, 4),
            LodH => (1, 4),
            AdiRhs => (3, 8),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Target {
    Electric,
    Magnetic,
}

/// One updating equation, evaluated for all three components of `target`.
#[derive(Clone, Copy, Debug)]
struct Equation {
    target: Target,
    kernels: &'static [Kernel],
}

const fn e(kernels: &'static [Kernel]) -> Equation {
    Equation {
        target: Target::Electric,
        kernels,
    }
}

const fn h(kernels: &'static [Kernel]) -> Equation {
    Equation {
        target: Target::Magnetic,
        kernels,
    }
}

/// Equations of one procedure (one sweep or explicit stage).
type Procedure = &'static [Equation];

use Kernel::*;

const FUND_ADI_COMBINED: Procedure = &[e(&[SubtractFrom, PlainFrom]), h(&[PaddedAccumulate])];
const FUND_ADI_EXPLICIT: Procedure = &[e(&[SubtractFrom, PlainFrom]), h(&[SubtractFrom, PaddedDoubled])];
const FUND_LOD_COMBINED: Procedure = &[e(&[PlainFrom, SubtractFrom]), h(&[PaddedAccumulate])];
const FUND_LOD_EXPLICIT: Procedure = &[e(&[PlainFrom, SubtractFrom]), h(&[PaddedDoubled, SubtractFrom])];
const ORIG_LOD: Procedure = &[e(&[LodRhs]), h(&[LodH])];
const ORIG_ADI: Procedure = &[e(&[AdiRhs]), h(&[PaddedFrom, PaddedAccumulate])];
const EXPLICIT_PRODUCT: Procedure = &[e(&[PlainFrom]), h(&[PaddedFrom])];
const IMPLICIT_ONLY: Procedure = &[e(&[PlainAccumulate]), h(&[PaddedAccumulate])];
const CURL_INCREMENT: Procedure = &[e(&[TwoPlain]), h(&[TwoPadded])];
const ACCUMULATE: Procedure = &[e(&[AddAssign]), h(&[AddAssign])];

/// The per-step plan and the number of implicit sweeps in it.
fn plan(scheme: SchemeId, form: Formulation, mode: HUpdate) -> Result<(Vec<Procedure>, u64)> {
    use Formulation::*;
    use SchemeId::*;
    let fund_adi = match mode {
        HUpdate::Combined => FUND_ADI_COMBINED,
        HUpdate::Explicit => FUND_ADI_EXPLICIT,
    };
    let fund_lod = match mode {
        HUpdate::Combined => FUND_LOD_COMBINED,
        HUpdate::Explicit => FUND_LOD_EXPLICIT,
    };
    Ok(match (scheme, form) {
        (Adi | Dyakonov | DouglasGunn, Fundamental) => (vec![fund_adi; 2], 2),
        (Adi, Original) => (vec![ORIG_ADI; 2], 2),
        (Lod1 | Lod2, Fundamental) => (vec![fund_lod; 2], 2),
        (Lod1 | Lod2, Original) => (vec![ORIG_LOD; 2], 2),
        (Ss2, Fundamental) => (vec![fund_lod; 3], 3),
        (Ss2, Original) => (vec![ORIG_LOD; 3], 3),
        (Dyakonov, Original) => (vec![EXPLICIT_PRODUCT, ORIG_LOD, IMPLICIT_ONLY], 2),
        (DouglasGunn, Original) => (vec![CURL_INCREMENT, IMPLICIT_ONLY, IMPLICIT_ONLY, ACCUMULATE], 2),
        (CrankNicolsonRef, _) => {
            return Err(Error::Capability(
                "crank-nicolson reference is not in cost model".into(),
            ))
        }
    })
}

/// Operation counts for one full time step, per six-component cell bundle.
#[derive(Clone, Debug, PartialEq)]
pub struct CostReport {
    pub scheme: SchemeId,
    pub formulation: Formulation,
    pub h_update: HUpdate,
    pub md_implicit: u64,
    pub as_implicit: u64,
    pub md_explicit: u64,
    pub as_explicit: u64,
    pub for_loops: u64,
    /// Full-grid field component arrays held by the stepper.
    pub field_arrays: u64,
    /// Implicit sweeps per step, each with three line-solve components.
    pub procedures: u64,
    /// Set when the magnetic field is updated explicitly each step, which
    /// disables the combined update path.
    pub explicit_h_path: bool,
}

impl CostReport {
    pub fn md_total(&self) -> u64 {
        self.md_implicit + self.md_explicit
    }

    pub fn as_total(&self) -> u64 {
        self.as_implicit + self.as_explicit
    }

    pub fn combined(&self) -> u64 {
        self.md_total() + self.as_total()
    }

    /// Combined flops per implicit procedure.
    pub fn flops_per_procedure(&self) -> f64 {
        self.combined() as f64 / self.procedures as f64
    }

    /// Combined right-hand-side flops plus the modeled solve cost.
    pub fn with_solves(&self) -> u64 {
        self.combined() + SOLVE_FLOPS_PER_UNKNOWN * 3 * self.procedures
    }

    pub fn rhs_gain(&self) -> f64 {
        efficiency_gains(self).0
    }

    pub fn overall_gain(&self) -> f64 {
        efficiency_gains(self).1
    }

    pub fn temporal_order(&self) -> u32 {
        self.scheme.temporal_order()
    }

    pub fn csv_header() -> &'static str {
        "scheme,formulation,h_update,md_implicit,as_implicit,md_explicit,as_explicit,md_total,as_total,combined,for_loops,field_arrays,procedures,rhs_gain,overall_gain,temporal_order"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{:.6},{:.6},{}",
            self.scheme,
            self.formulation,
            match self.h_update {
                HUpdate::Combined => "combined",
                HUpdate::Explicit => "explicit",
            },
            self.md_implicit,
            self.as_implicit,
            self.md_explicit,
            self.as_explicit,
            self.md_total(),
            self.as_total(),
            self.combined(),
            self.for_loops,
            self.field_arrays,
            self.procedures,
            self.rhs_gain(),
            self.overall_gain(),
            self.temporal_order()
        )
    }
}

/// Static counts for the default combined magnetic update.
pub fn static_cost(scheme: SchemeId, form: Formulation) -> Result<CostReport> {
    static_cost_with(scheme, form, HUpdate::Combined)
}

/// Static counts for an explicit choice of magnetic update. Original forms
/// ignore `mode`.
pub fn static_cost_with(scheme: SchemeId, form: Formulation, mode: HUpdate) -> Result<CostReport> {
    let mode = match form {
        Formulation::Original => HUpdate::Combined,
        Formulation::Fundamental => mode,
    };
    let (procs, procedures) = plan(scheme, form, mode)?;
    let mut r = CostReport {
        scheme,
        formulation: form,
        h_update: mode,
        md_implicit: 0,
        as_implicit: 0,
        md_explicit: 0,
        as_explicit: 0,
        for_loops: 0,
        field_arrays: 12,
        procedures,
        explicit_h_path: mode == HUpdate::Explicit,
    };
    for proc in procs {
        for eq in proc {
            r.for_loops += 3;
            for k in eq.kernels {
                let (md, add) = k.cost();
                match eq.target {
                    Target::Electric => {
                        r.md_implicit += 3 * md;
                        r.as_implicit += 3 * add;
                    }
                    Target::Magnetic => {
                        r.md_explicit += 3 * md;
                        r.as_explicit += 3 * add;
                    }
                }
            }
        }
    }
    Ok(r)
}

/// `(rhs_gain, overall_gain)` relative to the original alternating-direction
/// scheme.
pub fn efficiency_gains(report: &CostReport) -> (f64, f64) {
    let base = static_cost(SchemeId::Adi, Formulation::Original).expect("baseline is modeled");
    (
        base.combined() as f64 / report.combined() as f64,
        base.with_solves() as f64 / report.with_solves() as f64,
    )
}

pub fn for_loop_count(scheme: SchemeId, form: Formulation) -> Result<u64> {
    Ok(static_cost(scheme, form)?.for_loops)
}

/// All eight comparison columns.
pub fn table_reports() -> Vec<CostReport> {
    TABLE_COLUMNS
        .iter()
        .map(|&(s, f)| static_cost(s, f).expect("table columns are modeled"))
        .collect()
}

fn column_title(r: &CostReport) -> String {
    let form = match r.formulation {
        Formulation::Original => "orig",
        Formulation::Fundamental => "new",
    };
    format!("{} {}", r.scheme.name().to_ascii_uppercase(), form)
}

/// Aligned plain-text comparison table, one column per report.
pub fn format_table(reports: &[CostReport]) -> String {
    let rows: Vec<(&str, Box<dyn Fn(&CostReport) -> String>)> = vec![
        ("Implicit M/D", Box::new(|r| r.md_implicit.to_string())),
        ("Implicit A/S", Box::new(|r| r.as_implicit.to_string())),
        ("Explicit M/D", Box::new(|r| r.md_explicit.to_string())),
        ("Explicit A/S", Box::new(|r| r.as_explicit.to_string())),
        ("Total M/D", Box::new(|r| r.md_total().to_string())),
        ("Total A/S", Box::new(|r| r.as_total().to_string())),
        ("Total M/D+A/S", Box::new(|r| r.combined().to_string())),
        ("Efficiency gain (RHS)", Box::new(|r| format!("{:.2}", r.rhs_gain()))),
        ("Efficiency gain (overall)", Box::new(|r| format!("{:.2}", r.overall_gain()))),
        ("For-loops", Box::new(|r| r.for_loops.to_string())),
        ("Field arrays", Box::new(|r| r.field_arrays.to_string())),
        (
            "Temporal accuracy",
            Box::new(|r| match r.temporal_order() {
                1 => "first".to_string(),
                _ => "second".to_string(),
            }),
        ),
    ];
    let titles: Vec<String> = reports.iter().map(column_title).collect();
    let label_w = rows.iter().map(|(l, _)| l.len()).max().unwrap_or(0);
    let col_w = titles.iter().map(|t| t.len()).max().unwrap_or(0).max(6);
    let mut out = String::new();
    let _ = write!(out, "{:label_w$}", "");
    for t in &titles {
        let _ = write!(out, "  {t:>col_w$}");
    }
    out.push('\n');
    for (label, f) in &rows {
        let _ = write!(out, "{label:label_w$}");
        for r in reports {
            let _ = write!(out, "  {:>col_w$}", f(r));
        }
        out.push('\n');
    }
    out
}

pub fn to_csv(reports: &[CostReport]) -> String {
    let mut out = String::from(CostReport::csv_header());
    out.push('\n');
    for r in reports {
        out.push_str(&r.csv_row());
        out.push('\n');
    }
    out
}

/// Result of running a stepper on the instrumented scalar.
#[derive(Clone, Debug, PartialEq)]
pub struct FlopAudit {
    /// Measured right-hand-side counts per cell bundle per step. Layout
    /// fields (`for_loops`, `field_arrays`, `procedures`) are copied from the
    /// static model.
    pub report: CostReport,
    /// Whether every per-component tally divided evenly by its extent and
    /// the step count.
    pub uniform: bool,
    pub lines_solved: u64,
    pub solve_flops: u64,
    /// Largest line length solved (`N`).
    pub max_line: usize,
    /// Worst-case solve flops on any single line.
    pub max_flops_per_line: f64,
}

impl FlopAudit {
    /// Worst observed solve flops per line, minus the `5N` estimate.
    pub fn solve_excess(&self) -> f64 {
        self.max_flops_per_line - SOLVE_FLOPS_PER_UNKNOWN as f64 * self.max_line as f64
    }
}

/// Run `steps` steps of the given stepper on the instrumented scalar, from
/// seeded random fields, and report measured counts per cell bundle.
pub fn runtime_flop_audit(
    scheme: SchemeId,
    form: Formulation,
    grid: YeeGrid,
    steps: usize,
    mode: HUpdate,
) -> Result<FlopAudit> {
    let model = static_cost_with(scheme, form, mode)?;
    let u0 = FieldSet::random(grid, 0x5eed);
    let dt = grid.explicit_limit(&crate::Medium::normalized()) * 3.0;
    let cfg = StepperConfig::new(scheme, form, dt, crate::Medium::normalized())
        .with_h_update(mode)
        .with_exec(Exec::Serial);
    let mut stepper = Stepper::<Counted>::new(cfg, &u0)?;
    counted::reset();
    stepper.run(steps)?;
    let tally = counted::take();

    let mut report = CostReport {
        md_implicit: 0,
        as_implicit: 0,
        md_explicit: 0,
        as_explicit: 0,
        ..model
    };
    let mut uniform = true;
    let (mut lines_solved, mut solve_flops, mut max_line) = (0u64, 0u64, 0usize);
    let mut max_flops_per_line = 0.0f64;
    for c in Component::ALL {
        let upd = tally.update[c.index()];
        let denom = grid.len(c) as u64 * steps as u64;
        let per = |x: u64, ok: &mut bool| -> u64 {
            if denom == 0 {
                return 0;
            }
            if !x.is_multiple_of(denom) {
                *ok = false;
            }
            x / denom
        };
        let (md, add) = (per(upd.md, &mut uniform), per(upd.adds, &mut uniform));
        if c.is_electric() {
            report.md_implicit += md;
            report.as_implicit += add;
        } else {
            report.md_explicit += md;
            report.as_explicit += add;
        }
        let s = tally.solve[c.index()];
        if s.lines > 0 {
            let flops = s.md + s.adds;
            lines_solved += s.lines;
            solve_flops += flops;
            let n = s.line_len;
            max_line = max_line.max(n);
            max_flops_per_line = max_flops_per_line.max(flops as f64 / s.lines as f64);
        }
    }
    Ok(FlopAudit {
        report,
        uniform,
        lines_solved,
        solve_flops,
        max_line,
        max_flops_per_line,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round2(x: f64) -> f64 {
        (x * 100.0).round() / 100.0
    }

    #[test]
    fn combined_totals_and_gains() {
        let totals: Vec<u64> = table_reports().iter().map(|r| r.combined()).collect();
        assert_eq!(totals, [102, 42, 72, 42, 108, 63, 72, 42]);
        let gains: Vec<(f64, f64)> = table_reports()
            .iter()
            .map(|r| (round2(r.rhs_gain()), round2(r.overall_gain())))
            .collect();
        assert_eq!(
            gains,
            [
                (1.0, 1.0),
                (2.43, 1.83),
                (1.42, 1.29),
                (2.43, 1.83),
                (0.94, 0.86),
                (1.62, 1.22),
                (1.42, 1.29),
                (2.43, 1.83)
            ]
        );
    }

    #[test]
    fn per_cell_splits() {
        let r = static_cost(SchemeId::Adi, Formulation::Fundamental).unwrap();
        assert_eq!((r.md_implicit, r.as_implicit, r.md_explicit, r.as_explicit), (6, 18, 6, 12));
        let r = static_cost(SchemeId::Adi, Formulation::Original).unwrap();
        assert_eq!((r.md_implicit, r.as_implicit, r.md_explicit, r.as_explicit), (18, 48, 12, 24));
        assert_eq!(for_loop_count(SchemeId::Ss2, Formulation::Original).unwrap(), 18);
        assert_eq!(for_loop_count(SchemeId::Lod2, Formulation::Fundamental).unwrap(), 12);
        assert!(static_cost(SchemeId::CrankNicolsonRef, Formulation::Original).is_err());
    }

    #[test]
    fn explicit_magnetic_path_costs_more() {
        let r = static_cost_with(SchemeId::Lod2, Formulation::Fundamental, HUpdate::Explicit).unwrap();
        assert!(r.explicit_h_path);
        assert!(r.as_explicit > 12);
    }

    #[test]
    fn audit_matches_model_for_every_pair() {
        let g = YeeGrid::new([5, 4, 6], [1.0, 1.0, 1.0]).unwrap();
        for s in SchemeId::ALL.into_iter().filter(|s| *s != SchemeId::CrankNicolsonRef) {
            for f in Formulation::ALL {
                for m in [HUpdate::Combined, HUpdate::Explicit] {
                    let a = runtime_flop_audit(s, f, g, 2, m).unwrap();
                    let model = static_cost_with(s, f, m).unwrap();
                    assert!(a.uniform, "{s} {f} {m:?}");
                    assert_eq!(a.report, model, "{s} {f} {m:?}");
                    assert!(a.solve_excess() <= 4.0);
                }
            }
        }
    }

    #[test]
    fn zero_steps_count_nothing() {
        let g = YeeGrid::cube(4).unwrap();
        let a = runtime_flop_audit(SchemeId::Adi, Formulation::Fundamental, g, 0, HUpdate::Combined).unwrap();
        assert_eq!(a.report.combined(), 0);
        assert_eq!(a.lines_solved, 0);
    }

    #[test]
    fn table_text_has_every_column() {
        let t = format_table(&table_reports());
        assert!(t.contains("ADI new") && t.contains("SS2 orig"));
        assert!(t.lines().any(|l| l.starts_with("Total M/D+A/S") && l.contains("108")));
        let csv = to_csv(&table_reports());
        assert_eq!(csv.lines().count(), 9);
    }
}
