use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mflab_core::harness::{
    default_p_grid, eta_curve, meta_text, run_all, run_checks, sweep_n, write_csv, write_outputs, RunConfig, Suite,
    TimeRecord,
};
use mflab_core::{Error, Result};

#[derive(Parser)]
#[command(name = "mflab", version, about = "Bosonic mean-field laboratory on a periodic lattice")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Co-evolve the N-body state and the Hartree orbital and write per-time records.
    Simulate(Common),
    /// Run several particle numbers and fit the decay of E1 and R1 in N.
    Sweep(Common),
    /// Emit the exact eta(p) curve for a dimension.
    EtaCurve(Common),
    /// Run an invariant suite.
    Check {
        #[arg(long, default_value = "all")]
        suite: String,
        #[command(flatten)]
        common: Common,
    },
}

/// Flags shared by every subcommand. Values are strings so that parsing goes through
/// the same path as configuration files.
#[derive(Args, Default)]
struct Common {
    /// `key = value` file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    sites: Option<String>,
    #[arg(long)]
    particles: Option<String>,
    #[arg(long = "particles-list")]
    particles_list: Option<String>,
    #[arg(long)]
    dx: Option<String>,
    #[arg(long)]
    tfinal: Option<String>,
    #[arg(long)]
    dt: Option<String>,
    #[arg(long)]
    stride: Option<String>,
    /// none | harmonic:<omega> | driven:<omega>,<amplitude>,<frequency>
    #[arg(long)]
    potential: Option<String>,
    /// none | constant:<c> | gaussian:<lambda>,<sigma> | softcoulomb:<lambda>,<eps> | invsquare:<lambda> | random:<seed>[,<amplitude>]
    #[arg(long)]
    interaction: Option<String>,
    /// gaussian:<x0>,<sigma> | groundstate
    #[arg(long)]
    initial: Option<String>,
    #[arg(long)]
    p1: Option<String>,
    #[arg(long)]
    p2: Option<String>,
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    dim: Option<String>,
    #[arg(long = "K")]
    k: Option<String>,
    /// krylov | dense
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    out: Option<String>,
    #[arg(long)]
    seed: Option<String>,
    /// Comma-separated exponents, decimals or a/b.
    #[arg(long = "p-grid")]
    p_grid: Option<String>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let flags = [
            ("sites", &self.sites),
            ("particles", &self.particles),
            ("particles-list", &self.particles_list),
            ("dx", &self.dx),
            ("tfinal", &self.tfinal),
            ("dt", &self.dt),
            ("stride", &self.stride),
            ("potential", &self.potential),
            ("interaction", &self.interaction),
            ("initial", &self.initial),
            ("p1", &self.p1),
            ("p2", &self.p2),
            ("p", &self.p),
            ("dim", &self.dim),
            ("K", &self.k),
            ("method", &self.method),
            ("out", &self.out),
            ("seed", &self.seed),
            ("p-grid", &self.p_grid),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        Ok(cfg)
    }
}

fn emit(cfg: &RunConfig, records: &[TimeRecord], meta: &str) -> Result<()> {
    match &cfg.out {
        Some(path) => write_outputs(path, records, meta),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_csv(records, &mut lock)?;
            lock.flush()?;
            Ok(())
        }
    }
}

fn simulate(common: &Common) -> Result<()> {
    let cfg = common.resolve()?;
    let outputs = run_all(&cfg)?;
    let mut records: Vec<TimeRecord> = outputs.iter().flat_map(|o| o.records.iter().copied()).collect();
    records.sort_by(|a, b| a.n.cmp(&b.n).then(a.t.total_cmp(&b.t)));
    emit(&cfg, &records, &meta_text(&cfg, &outputs, None))
}

fn sweep(common: &Common) -> Result<()> {
    let cfg = common.resolve()?;
    let result = sweep_n(&cfg)?;
    emit(&cfg, &result.records, &meta_text(&cfg, &result.outputs, Some((&result.e1_fit, &result.r1_fit))))?;
    eprintln!("E1 fit: {}", result.e1_fit);
    eprintln!("R1 fit: {}", result.r1_fit);
    Ok(())
}

fn eta(common: &Common) -> Result<()> {
    let cfg = common.resolve()?;
    let grid = match &cfg.p_grid {
        Some(g) => g.clone(),
        None => default_p_grid(cfg.dim, 40)?.iter().map(|p| p.to_string()).collect(),
    };
    let curve = eta_curve(cfg.dim, &grid)?;
    for (p, reason) in &curve.skipped {
        eprintln!("warning: skipping p = {p}: {reason}");
    }
    let csv = curve.to_csv();
    match &cfg.out {
        Some(path) => std::fs::write(path, csv)?,
        None => print!("{csv}"),
    }
    Ok(())
}

fn check(suite: &str, common: &Common) -> Result<bool> {
    let cfg = common.resolve()?;
    let suite: Suite = suite.parse()?;
    let results = run_checks(suite, &cfg)?;
    for r in &results {
        println!("{r}");
    }
    Ok(results.iter().all(|r| r.passed))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let outcome = match &cli.command {
        Command::Simulate(c) => simulate(c).map(|_| true),
        Command::Sweep(c) => sweep(c).map(|_| true),
        Command::EtaCurve(c) => eta(c).map(|_| true),
        Command::Check { suite, common } => check(suite, common),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    e.exit_code() as u8
}
