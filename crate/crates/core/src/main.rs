#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use tcm::criterion::accumulate;
use tcm::inequality_lab::{check_case, default_suite, sample_field, write_report, FieldSpec};
use tcm::integrator::{run_from, initial_state, RunConfig};
use tcm::io::timeseries::{criterion_summary, rows, write_criterion, write_ledger_details};
use tcm::io::{parse_config, read_checkpoint_on, read_timeseries, to_canonical_toml, write_checkpoint, write_timeseries};
use tcm::ledger::{identity_suite, j_terms, IdentityResiduals};
use tcm::{Grid, State};

/// Environment variable naming the default output directory.
const OUT_DIR_ENV: &str = "TCM_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "tcm-out";
const IDENTITY_TOL: f64 = 1e-11;

const EXIT_BLOW_UP: u8 = 2;

#[derive(Parser)]
#[command(name = "tcm", version, about = "Damped tropical climate model on a periodic cube")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured simulation and write its time series
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Continue from a checkpoint instead of the initial condition
        #[arg(long)]
        resume: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the initial-condition seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the grid size
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Evaluate the vanishing-integral identities on random states
    Identities {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 32)]
        resolution: usize,
        /// Number of random states
        #[arg(long, default_value_t = 1)]
        count: usize,
    },
    /// Run the inequality ratio suite
    Inequalities {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Single resolution instead of 16, 32 and 64
        #[arg(long)]
        resolution: Option<usize>,
        /// Fields per ensemble
        #[arg(long, default_value_t = 100)]
        count: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recompute the criterion integral from a time-series CSV
    CriterionReport { csv: PathBuf },
}

fn out_dir(flag: Option<PathBuf>, configured: Option<PathBuf>) -> PathBuf {
    flag.or(configured)
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn run(
    config: &Path,
    resume: Option<&Path>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    resolution: Option<usize>,
) -> anyhow::Result<ExitCode> {
    let text = fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let mut cfg: RunConfig = parse_config(&text).with_context(|| format!("in {}", config.display()))?;
    if let Some(seed) = seed {
        cfg.initial.seed = seed;
    }
    if let Some(n) = resolution {
        cfg.n = n;
    }
    cfg.validate()?;
    let dir = out_dir(out, cfg.out_dir.clone());
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;

    let start: State = match resume {
        Some(path) => read_checkpoint_on(path, &cfg.grid()?)?,
        None => initial_state(&cfg)?,
    };
    let traj = run_from(&cfg, start)?;

    fs::write(dir.join("config.toml"), to_canonical_toml(&cfg))?;
    write_timeseries(&dir.join("timeseries.csv"), &rows(&traj.ledger, &traj.criterion)?)?;
    write_ledger_details(&dir.join("ledger.csv"), &traj.ledger)?;
    write_criterion(&dir.join("criterion.csv"), &traj.criterion)?;
    write_checkpoint(&dir.join("final.tcmd"), &traj.final_state)?;
    let mut report = accumulate(&traj.criterion)?;
    if traj.blew_up() {
        report.flag = tcm::criterion::CriterionFlag::Growth;
    }
    let last = traj.criterion.last();
    let summary = criterion_summary(&report, last.map(|r| r.delta), last.map(|r| r.gamma));
    fs::write(dir.join("criterion_summary.txt"), &summary)?;
    print!("{summary}");
    println!(
        "steps {}  final time {}  relative L2 budget residual {:.3e}",
        traj.steps, traj.final_state.time, traj.budget.relative_residual
    );
    println!("output written to {}", dir.display());
    if let tcm::integrator::RunOutcome::BlowUp { time, step } = traj.outcome {
        eprintln!("numerical blow-up in step {step} starting at t = {time}");
        return Ok(ExitCode::from(EXIT_BLOW_UP));
    }
    Ok(ExitCode::SUCCESS)
}

fn identities(seed: u64, resolution: usize, count: usize) -> anyhow::Result<ExitCode> {
    let grid = Grid::new(resolution)?;
    let kmax = grid.dealias_cutoff().clamp(1, 4) as u32;
    let mut worst = 0.0f64;
    for i in 0..count as u64 {
        let base = seed.wrapping_add(3 * i);
        let spec = |c, s| FieldSpec::random_band(c, 1, kmax, s);
        let state = State::new(
            sample_field(&spec(3, base).solenoidal(), &grid)?,
            sample_field(&spec(3, base + 1), &grid)?,
            sample_field(&spec(1, base + 2), &grid)?,
            0.0,
        )?;
        let r = identity_suite(&state)?;
        let j = j_terms(&state)?;
        println!("state {i} (seed {base}, n = {resolution})");
        for (name, value) in IdentityResiduals::names().iter().zip(r.as_array()) {
            println!("  {name:<14} {value:.3e}");
        }
        println!("  {:<14} {:.3e}", "j5_plus_j7", j.j5_j7_residual());
        worst = worst.max(r.max()).max(j.j5_j7_residual());
    }
    println!("max residual {worst:.3e}");
    if worst > IDENTITY_TOL {
        bail!("identity residual {worst:.3e} exceeds {IDENTITY_TOL:e}");
    }
    Ok(ExitCode::SUCCESS)
}

fn inequalities(seed: u64, resolution: Option<usize>, count: usize, out: Option<PathBuf>) -> anyhow::Result<ExitCode> {
    let resolutions = match resolution {
        Some(n) => vec![n],
        None => vec![16, 32, 64],
    };
    let mut reports = Vec::new();
    for case in default_suite(seed, count) {
        let report = check_case(&case, &resolutions)?;
        let per: Vec<String> = report
            .per_resolution
            .iter()
            .map(|s| format!("{}: {:.4}", s.n, s.max))
            .collect();
        println!(
            "{:<12} max ratio {:.4}  [{}]  {}",
            case.inequality.name(),
            report.max_ratio,
            per.join(", "),
            if report.is_stable() { "stable" } else { "UNSTABLE" }
        );
        for v in &report.violations {
            println!("  {v}");
        }
        reports.push(report);
    }
    let dir = out_dir(out, None);
    fs::create_dir_all(&dir)?;
    let path = dir.join("inequalities.csv");
    write_report(&path, &reports)?;
    println!("report written to {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn criterion_report(csv: &Path) -> anyhow::Result<ExitCode> {
    let rows = read_timeseries(csv)?;
    let report = accumulate(&rows)?;
    print!("{}", criterion_summary(&report, None, None));
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::FAILURE,
            };
        }
    };
    let result = match cli.command {
        Command::Run {
            config,
            resume,
            out,
            seed,
            resolution,
        } => run(&config, resume.as_deref(), out, seed, resolution),
        Command::Identities { seed, resolution, count } => identities(seed, resolution, count),
        Command::Inequalities {
            seed,
            resolution,
            count,
            out,
        } => inequalities(seed, resolution, count, out),
        Command::CriterionReport { csv } => criterion_report(&csv),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
