//! Command-line driver for the numerical experiments on the Vicsek fractal.

mod commands;
mod input;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vicsek::energy::Region;

use input::{parse_alpha, parse_function, parse_p, parse_region, AlphaSpec, FunctionSpec, PSpec};
use report::{CliError, EXIT_ASSERTION, EXIT_USAGE};

#[derive(Parser, Debug)]
#[command(name = "vicsek", version, about = "Sobolev and Besov experiments on the Vicsek fractal")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    config: RunConfig,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Build (or load from --cache) the level-m cable graph.
    Build,
    /// Discrete p-energy at level m; prints the value.
    Energy,
    /// Compare the energy limit with the norm of the weak gradient.
    Gradient,
    /// Korevaar-Schoen energies over a radius grid.
    Ks,
    /// Besov seminorm at the given alpha.
    Besov,
    /// The p = 1 functional at the bounded-variation exponent.
    Bv,
    /// Morrey ratios over random pairs.
    Morrey,
    /// Poincaré ratio on a ball.
    Poincare,
    /// Decay exponent of the cross function near the centre.
    Sharpness,
    /// Maximal function of the gradient.
    Maximal,
    /// Strong and weak Hajłasz gradient norms across levels.
    Hajlasz,
    /// K-functional upper bounds against Korevaar-Schoen energies.
    Kfunc,
    /// Energy self-similarity across the five pieces.
    Selfsim,
    /// The standard suite, run in parallel.
    All,
}

#[derive(Args, Debug, Clone)]
pub struct RunConfig {
    /// cross, dist, cantor, const[:c], random:<seed>[:<level>] or a file path.
    #[arg(long, global = true, default_value = "cross", value_parser = parse_function)]
    pub function: FunctionSpec,
    /// Exponent p >= 1, or "inf".
    #[arg(long, global = true, value_parser = parse_p)]
    pub p: Option<PSpec>,
    /// "critical" or a positive number.
    #[arg(long, global = true, default_value = "critical", value_parser = parse_alpha)]
    pub alpha: AlphaSpec,
    #[arg(long, global = true)]
    pub level: Option<u32>,
    /// whole, cell:<address> or <point>:<radius> with point center, q1..q4 or a/b/m.
    #[arg(long, global = true, alias = "ball", value_parser = parse_region)]
    pub region: Option<Region>,
    /// Smallest radius is 2*3^-k for this k.
    #[arg(long, global = true)]
    pub rmin_exp: Option<u32>,
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value_t = 10.0)]
    pub divergence_ratio: f64,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    /// Write the CSV table here.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Graph cache file for `build`.
    #[arg(long, global = true)]
    pub cache: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Number of random pairs (Morrey, Lusin-Hölder).
    #[arg(long, global = true, default_value_t = 200)]
    pub pairs: usize,
    /// Exact rational arithmetic where available.
    #[arg(long, global = true)]
    pub exact: bool,
    /// Also run the level scan for divergence (energy).
    #[arg(long, global = true)]
    pub scan: bool,
    /// Override the tolerance of the hard assertions.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

impl RunConfig {
    pub fn function_label(&self) -> String {
        match &self.function {
            FunctionSpec::Cross => "cross".into(),
            FunctionSpec::Dist => "dist".into(),
            FunctionSpec::Cantor => "cantor".into(),
            FunctionSpec::Const(c) => format!("const:{c}"),
            FunctionSpec::Random { seed, level } => format!("random:{seed}:{level}"),
            FunctionSpec::File(p) => p.display().to_string(),
        }
    }

    /// Settings shared by every member of the `all` suite; output paths are
    /// handled once for the merged report.
    pub fn base_for_suite(&self) -> RunConfig {
        RunConfig { json: None, csv: None, cache: None, exact: false, scan: false, tol: None, ..self.clone() }
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let cfg = cli.config;
    if let Some(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Resource(e.to_string()))?;
    }
    let outcome = commands::run(cli.command, &cfg)?;
    outcome.write(cfg.json.as_deref(), cfg.csv.as_deref())?;
    match &outcome.text {
        Some(t) => println!("{t}"),
        None => print!("{}", outcome.to_json()?),
    }
    let failed = outcome.hard_failures();
    if failed > 0 {
        eprintln!("{failed} assertion(s) failed");
        return Ok(EXIT_ASSERTION);
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            return ExitCode::from(code as u8);
        }
    };
    let code = execute(cli).unwrap_or_else(|e| {
        eprintln!("{e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
