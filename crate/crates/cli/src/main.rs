use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use fundfdtd::cost_model::{self, format_table, to_csv, CostReport};
use fundfdtd::verify::{self, VerificationResult};
use fundfdtd::{Exec, Formulation, HUpdate, SchemeId};

use fundfdtd_cli::config::{KeyValues, RunConfig};
use fundfdtd_cli::simulate::{run_simulation, RunError};
use fundfdtd_cli::suites::{run_suite, SUITES};

const EXIT_USAGE: u8 = 1;
const EXIT_VERIFY: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "fundfdtd", version, about = "Implicit 3-D FDTD solvers in original and fundamental form")]
struct Cli {
    /// Flat key = value configuration file.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override one configuration key (repeatable).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Worker threads; results do not depend on this value.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Seed for random initial fields.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a simulation and write probes, snapshots and a manifest.
    Run,
    /// Run verification suites ("all" for every suite; none lists them).
    Verify { suites: Vec<String> },
    /// Print the static operation-count table.
    Cost {
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long)]
        formulation: Option<String>,
        /// Magnetic update mode for fundamental forms.
        #[arg(long, default_value = "combined")]
        h_update: String,
        /// Print CSV instead of the aligned table.
        #[arg(long)]
        csv: bool,
    },
}

/// A failure with its exit status.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

impl Failure {
    fn usage(err: impl Into<anyhow::Error>) -> Self {
        Self {
            code: EXIT_USAGE,
            err: err.into(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(err: anyhow::Error) -> Self {
        Self::usage(err)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    match dispatch(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(cli: Cli) -> Result<u8, Failure> {
    if cli.threads == 0 {
        return Err(Failure::usage(anyhow::anyhow!("--threads must be at least 1")));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .context("configuring the thread pool")?;
    let exec = if cli.threads > 1 { Exec::Parallel } else { Exec::Serial };
    match &cli.command {
        Command::Run => cmd_run(&cli),
        Command::Verify { suites } => cmd_verify(&cli, suites, exec),
        Command::Cost {
            scheme,
            formulation,
            h_update,
            csv,
        } => cmd_cost(&cli, scheme.as_deref(), formulation.as_deref(), h_update, *csv),
    }
}

fn out_dir(cli: &Cli) -> PathBuf {
    cli.out.clone().unwrap_or_else(|| PathBuf::from("fundfdtd_out"))
}

fn cmd_run(cli: &Cli) -> Result<u8, Failure> {
    let mut kv = match &cli.config {
        Some(p) => {
            let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            KeyValues::parse_text(&text).with_context(|| format!("in {}", p.display()))?
        }
        None => KeyValues::default(),
    };
    for pair in &cli.set {
        kv.set_pair(pair).map_err(Failure::usage)?;
    }
    if let Some(seed) = cli.seed {
        kv.set_pair(&format!("seed={seed}")).map_err(Failure::usage)?;
    }
    let cfg = RunConfig::from_key_values(&kv).map_err(Failure::usage)?;
    let out = out_dir(cli);
    match run_simulation(&cfg, &kv, &out, cli.threads) {
        Ok(s) => {
            println!(
                "ran steps {}..{} of {} {}; final energy {:.16e}; outputs in {}",
                s.first_step,
                s.final_step,
                cfg.scheme,
                cfg.formulation,
                s.final_energy,
                out.display()
            );
            Ok(0)
        }
        Err(e @ RunError::NonFinite { .. }) => Err(Failure {
            code: EXIT_NUMERIC,
            err: e.into(),
        }),
        Err(e) => Err(Failure::usage(e)),
    }
}

fn write_results(out: &Path, results: &[VerificationResult]) -> anyhow::Result<()> {
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    fs::write(out.join("verify.csv"), verify::to_csv(results))?;
    let mut summary: String = results.iter().map(|r| r.summary() + "\n").collect();
    let failed = results.iter().filter(|r| !r.pass).count();
    summary.push_str(&format!("{} checks, {} failed\n", results.len(), failed));
    fs::write(out.join("verify_summary.txt"), summary)?;
    Ok(())
}

fn cmd_verify(cli: &Cli, suites: &[String], exec: Exec) -> Result<u8, Failure> {
    if suites.is_empty() {
        println!("available suites:");
        for (name, what) in SUITES {
            println!("  {name:<12} {what}");
        }
        println!("  {:<12} every suite above", "all");
        return Ok(0);
    }
    let names: Vec<&str> = if suites.iter().any(|s| s == "all") {
        SUITES.iter().map(|(n, _)| *n).collect()
    } else {
        suites.iter().map(String::as_str).collect()
    };
    let seed = cli.seed.unwrap_or(1);
    let mut results = Vec::new();
    for name in names {
        let batch = run_suite(name, seed, exec)
            .ok_or_else(|| Failure::usage(anyhow::anyhow!("unknown suite '{name}'; run 'verify' to list suites")))?
            .with_context(|| format!("suite {name}"))?;
        for r in &batch {
            println!("{}", r.summary());
        }
        results.extend(batch);
    }
    write_results(&out_dir(cli), &results)?;
    let failed = results.iter().filter(|r| !r.pass).count();
    println!("{} checks, {} failed", results.len(), failed);
    Ok(if failed == 0 { 0 } else { EXIT_VERIFY })
}

fn cmd_cost(
    cli: &Cli,
    scheme: Option<&str>,
    formulation: Option<&str>,
    h_update: &str,
    csv: bool,
) -> Result<u8, Failure> {
    let mode: HUpdate = h_update.parse().map_err(Failure::usage)?;
    let forms: Vec<Formulation> = match formulation {
        Some(f) => vec![f.parse().map_err(Failure::usage)?],
        None => Formulation::ALL.to_vec(),
    };
    let columns: Vec<(SchemeId, Formulation)> = match scheme {
        None => cost_model::TABLE_COLUMNS
            .into_iter()
            .filter(|(_, f)| forms.contains(f))
            .collect(),
        Some(s) => {
            let s: SchemeId = s.parse().map_err(Failure::usage)?;
            forms.iter().map(|&f| (s, f)).collect()
        }
    };
    let reports: Vec<CostReport> = columns
        .iter()
        .map(|&(s, f)| cost_model::static_cost_with(s, f, mode))
        .collect::<fundfdtd::Result<_>>()
        .map_err(Failure::usage)?;
    let text = if csv { to_csv(&reports) } else { format_table(&reports) };
    print!("{text}");
    if let Some(out) = &cli.out {
        fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
        fs::write(out.join("cost.csv"), to_csv(&reports)).context("writing cost.csv")?;
    }
    Ok(0)
}
