//! Named verification suites for the `verify` subcommand.

use std::time::Instant;

use rayon::prelude::*;

use fundfdtd::cost_model::{self, table_reports, TABLE_COLUMNS};
use fundfdtd::verify::{self, Setup, VerificationResult};
use fundfdtd::{Exec, Formulation, HUpdate, Result, SchemeId, YeeGrid};

/// Suite names with a one-line description.
pub const SUITES: &[(&str, &str)] = &[
    ("table1", "static operation counts against the eight-column reference table"),
    ("uniformity", "combined flops per fundamental updating procedure"),
    ("audit", "instrumented flop counts against the static model"),
    ("equivalence", "original and fundamental forms, 100 steps on 8^3 at cfl 5"),
    ("stability", "energy boundedness over 10,000 steps at cfl 2, 5, 10"),
    ("convergence", "temporal convergence slopes"),
    ("dense", "single steps against dense rational-matrix evaluation on 4^3"),
    ("links", "LOD-seeded ADI, D'Yakonov and Douglas-Gunn identities"),
];

/// Expected cell values per column: implicit M/D, implicit A/S,
/// explicit M/D, explicit A/S, combined, rounded RHS gain, rounded overall
/// gain, for-loops.
pub type TableRow = (u64, u64, u64, u64, u64, f64, f64, u64);

pub const TABLE_ONE: [TableRow; 8] = [
    (18, 48, 12, 24, 102, 1.00, 1.00, 12),
    (6, 18, 6, 12, 42, 2.43, 1.83, 12),
    (18, 24, 6, 24, 72, 1.42, 1.29, 12),
    (6, 18, 6, 12, 42, 2.43, 1.83, 12),
    (27, 36, 9, 36, 108, 0.94, 0.86, 18),
    (9, 27, 9, 18, 63, 1.62, 1.22, 18),
    (18, 24, 6, 24, 72, 1.42, 1.29, 12),
    (6, 18, 6, 12, 42, 2.43, 1.83, 12),
];

fn round2(x: f64) -> f64 {
    (x * 100.0).round() / 100.0
}

fn count_mismatches() -> usize {
    table_reports()
        .iter()
        .zip(TABLE_ONE)
        .map(|(r, t)| {
            let got = (
                r.md_implicit,
                r.as_implicit,
                r.md_explicit,
                r.as_explicit,
                r.combined(),
                round2(r.rhs_gain()),
                round2(r.overall_gain()),
                r.for_loops,
            );
            [
                got.0 != t.0,
                got.1 != t.1,
                got.2 != t.2,
                got.3 != t.3,
                got.4 != t.4,
                got.5 != t.5,
                got.6 != t.6,
                got.7 != t.7,
            ]
            .iter()
            .filter(|&&m| m)
            .count()
        })
        .sum()
}

pub fn table1() -> Vec<VerificationResult> {
    let start = Instant::now();
    vec![VerificationResult::at_most("table1/mismatched-cells", count_mismatches() as f64, 0.0, start)]
}

pub fn uniformity() -> Result<Vec<VerificationResult>> {
    [SchemeId::Adi, SchemeId::Lod1, SchemeId::Lod2, SchemeId::Ss2]
        .into_iter()
        .map(|s| {
            let start = Instant::now();
            let r = cost_model::static_cost(s, Formulation::Fundamental)?;
            Ok(VerificationResult::new(
                format!("uniformity/{s}"),
                r.flops_per_procedure(),
                21.0,
                21.0,
                start,
            ))
        })
        .collect()
}

pub fn audit() -> Result<Vec<VerificationResult>> {
    let grid = YeeGrid::cube(8)?;
    let mut out = Vec::new();
    for (s, f) in TABLE_COLUMNS {
        let start = Instant::now();
        let a = cost_model::runtime_flop_audit(s, f, grid, 10, HUpdate::Combined)?;
        let model = cost_model::static_cost(s, f)?;
        let off = [
            a.report.md_implicit.abs_diff(model.md_implicit),
            a.report.as_implicit.abs_diff(model.as_implicit),
            a.report.md_explicit.abs_diff(model.md_explicit),
            a.report.as_explicit.abs_diff(model.as_explicit),
        ]
        .iter()
        .sum::<u64>() as f64
            + if a.uniform { 0.0 } else { 1.0 };
        out.push(VerificationResult::at_most(format!("audit/{s}/{f}"), off, 0.0, start));
        out.push(
            VerificationResult::at_most(format!("audit/{s}/{f}/solve-excess-over-5N"), a.solve_excess(), 4.0, start)
                .with_detail("max_flops_per_line", a.max_flops_per_line),
        );
    }
    Ok(out)
}

pub fn equivalence(seed: u64, exec: Exec) -> Result<Vec<VerificationResult>> {
    let mut setup = Setup::cube(8, 5.0, seed)?;
    setup.exec = exec;
    SchemeId::ALL
        .into_iter()
        .map(|s| verify::equivalence_test(s, &setup, 100))
        .collect()
}

pub fn stability(seed: u64, exec: Exec) -> Result<Vec<VerificationResult>> {
    let mut cases = Vec::new();
    for cfl in [2.0, 5.0, 10.0] {
        for s in SchemeId::ALL {
            for f in Formulation::ALL {
                cases.push((cfl, s, f));
            }
        }
    }
    // each case owns its state, so running them side by side changes no bits
    let mut out = cases
        .into_par_iter()
        .map(|(cfl, s, f)| {
            let mut setup = Setup::cube(8, cfl, seed)?;
            setup.exec = exec;
            verify::stability_test(s, f, &setup, 10_000)
        })
        .collect::<Result<Vec<_>>>()?;
    // the control passes when the metric flags the explicit scheme
    let start = Instant::now();
    let control = verify::explicit_yee_control(&Setup::cube(8, 2.0, seed)?, 10_000)?;
    out.push(VerificationResult::new(
        "stability/explicit-yee-control-detected",
        if control.pass { 0.0 } else { 1.0 },
        1.0,
        1.0,
        start,
    ));
    Ok(out)
}

pub fn convergence() -> Result<Vec<VerificationResult>> {
    let grid = YeeGrid::cube(8)?;
    let mut out = Vec::new();
    for s in SchemeId::ALL {
        for f in Formulation::ALL {
            out.push(verify::convergence_order_test(s, f, grid, verify::CONVERGENCE_T_END)?);
        }
    }
    Ok(out)
}

pub fn dense(seed: u64) -> Result<Vec<VerificationResult>> {
    let grid = YeeGrid::cube(4)?;
    let dt = 5.0 * grid.explicit_limit(&fundfdtd::Medium::normalized());
    let mut out = Vec::new();
    for s in SchemeId::ALL {
        for f in Formulation::ALL {
            for m in [HUpdate::Combined, HUpdate::Explicit] {
                if f == Formulation::Original && m == HUpdate::Explicit {
                    continue;
                }
                out.push(verify::dense_oracle_test(s, f, m, grid, dt, seed)?);
            }
        }
    }
    Ok(out)
}

pub fn links(seed: u64, exec: Exec) -> Result<Vec<VerificationResult>> {
    let mut setup = Setup::cube(8, 5.0, seed)?;
    setup.exec = exec;
    Ok(vec![
        verify::lod_seeded_link(&setup, 50)?,
        verify::dyakonov_link(&setup, 50)?,
        verify::douglas_gunn_link(&setup, 50)?,
    ])
}

/// Run one suite by name; `None` for an unknown name.
pub fn run_suite(name: &str, seed: u64, exec: Exec) -> Option<Result<Vec<VerificationResult>>> {
    Some(match name {
        "table1" => Ok(table1()),
        "uniformity" => uniformity(),
        "audit" => audit(),
        "equivalence" => equivalence(seed, exec),
        "stability" => stability(seed, exec),
        "convergence" => convergence(),
        "dense" => dense(seed),
        "links" => links(seed, exec),
        _ => return None,
    })
}
