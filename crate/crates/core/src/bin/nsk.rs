use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nsk::config::{parse_config, Kind};
use nsk::experiment::{run_experiment, RunOptions, Status};
use nsk::NskError;

#[derive(Parser)]
#[command(name = "nsk", version, about = "Compressible Navier-Stokes-Korteweg decay lab")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Nonlinear run with norm logging.
    Simulate(Common),
    /// Exact linear flow at sampled times.
    LinearProbe(Common),
    /// Sup-norm decay of the low-frequency kernel.
    KernelProbe(Common),
    /// Run and fit decay exponents against their targets.
    DecayFit(Common),
    /// Invariant suite.
    Verify(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Also write long-format `plot_data.csv`.
    #[arg(long)]
    emit_plot_data: bool,
}

fn threads() -> usize {
    let cap = std::env::var("NSK_THREADS").ok().and_then(|v| v.parse::<usize>().ok()).filter(|&n| n > 0);
    if let Some(n) = cap {
        // only fails if the pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    rayon::current_num_threads()
}

fn run(kind: Kind, c: Common) -> Result<i32, NskError> {
    let text = std::fs::read_to_string(&c.config)
        .map_err(|e| NskError::Config(vec![format!("cannot read {}: {e}", c.config.display())]))?;
    let cfg = parse_config(&text)?;
    if let Some(k) = cfg.kind {
        if k != kind {
            eprintln!("note: config kind `{}` overridden by subcommand `{}`", k.name(), kind.name());
        }
    }
    let opts = RunOptions { out_dir: c.out, seed: c.seed, emit_plot_data: c.emit_plot_data, threads: threads() };
    let outcome = run_experiment(&cfg, kind, &opts)?;
    for chk in &outcome.checks {
        println!("{} {} (value {:.3e}, tolerance {:.1e})", if chk.passed { "PASS" } else { "FAIL" }, chk.name, chk.value, chk.tolerance);
    }
    for f in &outcome.report.fits {
        match (&f.fit, f.pass) {
            (Some(fit), pass) => println!(
                "{} exponent {:.4} on [{}, {}]{}",
                f.series,
                fit.exponent,
                fit.window[0],
                fit.window[1],
                match pass {
                    Some(true) => " PASS",
                    Some(false) => " FAIL",
                    None => "",
                }
            ),
            (None, _) => println!("{} fit failed: {}", f.series, f.error.as_deref().unwrap_or("?")),
        }
    }
    for g in &outcome.report.gaps {
        println!("{} {:?} {}", g.name, g.value, if g.pass == Some(true) { "PASS" } else { "FAIL" });
    }
    if outcome.manifest.status == Status::Incomplete {
        eprintln!("run INCOMPLETE: {}", outcome.manifest.failure.as_deref().unwrap_or("unknown"));
    }
    println!("artifacts in {}", outcome.dir.display());
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match cli.command {
        Command::Simulate(c) => (Kind::Simulate, c),
        Command::LinearProbe(c) => (Kind::LinearProbe, c),
        Command::KernelProbe(c) => (Kind::KernelProbe, c),
        Command::DecayFit(c) => (Kind::DecayFit, c),
        Command::Verify(c) => (Kind::Verify, c),
    };
    match run(kind, common) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
