//! Running a configured simulation and writing its outputs.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use fundfdtd::{Exec, FieldSet, HUpdate, Stepper, StepperConfig};
use serde_json::json;
use thiserror::Error;

use crate::config::{ConfigError, Init, KeyValues, RunConfig};
use crate::snapshot::{self, ResumeState, Snapshot};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Solver(#[from] fundfdtd::Error),
    #[error("non-finite field values after step {step}")]
    NonFinite { step: usize },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunSummary {
    pub first_step: usize,
    pub final_step: usize,
    pub final_energy: f64,
    pub files: Vec<PathBuf>,
}

fn h_update_name(h: HUpdate) -> &'static str {
    match h {
        HUpdate::Combined => "combined",
        HUpdate::Explicit => "explicit",
    }
}

fn build_stepper(cfg: &RunConfig, sc: StepperConfig) -> Result<Stepper<f64>, RunError> {
    let u0 = match &cfg.init {
        Init::Zero => FieldSet::zeros(cfg.grid),
        Init::Random => FieldSet::random(cfg.grid, cfg.seed),
        Init::Snapshot(path) => {
            let file = File::open(path).map_err(io_err(path))?;
            let snap = snapshot::read(std::io::BufReader::new(file)).map_err(io_err(path))?;
            if snap.fields.grid != cfg.grid {
                return Err(ConfigError::Invalid {
                    key: "init".into(),
                    reason: format!(
                        "snapshot grid {:?} / {:?} differs from configured {:?} / {:?}",
                        snap.fields.grid.cells(),
                        snap.fields.grid.spacing(),
                        cfg.grid.cells(),
                        cfg.grid.spacing()
                    ),
                }
                .into());
            }
            if let Some(r) = &snap.resume {
                let same = r.scheme == cfg.scheme.name()
                    && r.formulation == cfg.formulation.name()
                    && r.h_update == h_update_name(cfg.h_update)
                    && r.dt.to_bits() == sc.dt.to_bits();
                if same {
                    return Ok(Stepper::resume(sc, &r.state, &r.aux, r.step as usize)?);
                }
            }
            snap.fields.physical()
        }
    };
    Ok(Stepper::new(sc, &u0)?)
}

fn write_snapshot(dir: &Path, s: &Stepper<f64>, cfg: &RunConfig) -> Result<PathBuf, RunError> {
    let step = s.steps_taken();
    let path = dir.join(format!("snapshot_{step:08}.bin"));
    let snap = Snapshot {
        fields: s.output()?,
        resume: Some(ResumeState {
            step: step as u64,
            scheme: cfg.scheme.name().into(),
            formulation: cfg.formulation.name().into(),
            h_update: h_update_name(cfg.h_update).into(),
            dt: s.config().dt,
            state: s.state().clone(),
            aux: s.auxiliary().clone(),
        }),
    };
    let mut w = BufWriter::new(File::create(&path).map_err(io_err(&path))?);
    snapshot::write(&mut w, &snap).map_err(io_err(&path))?;
    w.flush().map_err(io_err(&path))?;
    Ok(path)
}

/// Execute the run described by `cfg`, writing `probes.csv`, snapshots and
/// `manifest.json` into `out`.
pub fn run_simulation(
    cfg: &RunConfig,
    raw: &KeyValues,
    out: &Path,
    threads: usize,
) -> Result<RunSummary, RunError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let exec = if threads > 1 { Exec::Parallel } else { Exec::Serial };
    let dt = cfg.dt();
    let sc = StepperConfig::new(cfg.scheme, cfg.formulation, dt, cfg.medium)
        .with_h_update(cfg.h_update)
        .with_exec(exec);
    let mut stepper = build_stepper(cfg, sc)?;
    let first_step = stepper.steps_taken();

    let probes_path = out.join("probes.csv");
    let mut csv = BufWriter::new(File::create(&probes_path).map_err(io_err(&probes_path))?);
    let mut header = String::from("step,time");
    for p in &cfg.probes {
        header.push(',');
        header.push_str(&p.label());
    }
    writeln!(csv, "{header}").map_err(io_err(&probes_path))?;

    let mut files = vec![probes_path.clone()];
    for _ in 0..cfg.steps {
        let n = stepper.steps_taken();
        if let Some(src) = &cfg.source {
            stepper.add_source(src.probe.component, src.probe.index, src.waveform.value(n as f64 * dt))?;
        }
        stepper.step()?;
        let step = n + 1;
        if !stepper.state().is_finite() || !stepper.auxiliary().clone().into_fields().is_finite() {
            csv.flush().map_err(io_err(&probes_path))?;
            return Err(RunError::NonFinite { step });
        }
        if !cfg.probes.is_empty() {
            let f = stepper.output()?;
            let mut row = format!("{step},{:.16e}", step as f64 * dt);
            for p in &cfg.probes {
                row.push_str(&format!(",{:.16e}", f.component(p.component)[p.index]));
            }
            writeln!(csv, "{row}").map_err(io_err(&probes_path))?;
        }
        if let Some(every) = cfg.snapshot_every {
            if step % every == 0 {
                files.push(write_snapshot(out, &stepper, cfg)?);
            }
        }
    }
    csv.flush().map_err(io_err(&probes_path))?;

    let final_fields = stepper.output()?;
    let summary = RunSummary {
        first_step,
        final_step: stepper.steps_taken(),
        final_energy: final_fields.energy(&cfg.medium),
        files,
    };

    let manifest_path = out.join("manifest.json");
    let manifest = json!({
        "program": env!("CARGO_PKG_NAME"),
        "version": env!("CARGO_PKG_VERSION"),
        "config": raw.0,
        "resolved": {
            "cells": cfg.grid.cells(),
            "spacing": cfg.grid.spacing(),
            "epsilon": cfg.medium.epsilon(),
            "mu": cfg.medium.mu(),
            "dt": dt,
            "scheme": cfg.scheme.name(),
            "formulation": cfg.formulation.name(),
            "h_update": h_update_name(cfg.h_update),
            "seed": cfg.seed,
        },
        "threads": threads,
        "first_step": summary.first_step,
        "final_step": summary.final_step,
        "final_energy": summary.final_energy,
        "files": summary
            .files
            .iter()
            .map(|p| p.file_name().map(|n| n.to_string_lossy().into_owned()))
            .collect::<Vec<_>>(),
    });
    let text = serde_json::to_string_pretty(&manifest).expect("manifest is plain JSON");
    fs::write(&manifest_path, text + "\n").map_err(io_err(&manifest_path))?;
    Ok(summary)
}
