mod commands;
mod manifest;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use strongcoupling::vpt::Strategy;
use strongcoupling::{ModelId, DEFAULT_PRECISION};

/// Weak-coupling lattice series and their strong-coupling resummation.
#[derive(Debug, Parser)]
#[command(name = "strongcoupling", version)]
struct Cli {
    /// Working precision in bits for every floating-point stage.
    #[arg(long, global = true, default_value_t = DEFAULT_PRECISION)]
    prec: usize,
    /// Worker threads for per-order fan-out.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
enum Command {
    /// Generate an exact coefficient table.
    Generate(GenerateArgs),
    /// Strong-coupling approximant sweep S_1..S_N.
    Pade(PadeArgs),
    /// Variational perturbation theory for b_0.
    Vpt(VptArgs),
    /// Richardson extrapolation of a CSV column.
    Richardson(RichardsonArgs),
    /// Large-order estimators A, K, B and the zeta consistency check.
    LargeOrder(LargeOrderArgs),
    /// Sign-pattern fit cos(an + b).
    Signfit(SignfitArgs),
    /// Continuum references.
    Oracle(OracleArgs),
    /// Regenerate every reproduction into one directory.
    Report(ReportArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct GenerateArgs {
    #[arg(long)]
    pub model: ModelId,
    #[arg(long)]
    pub order: usize,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
pub struct PadeArgs {
    /// Coefficient table (JSON).
    #[arg(long)]
    pub coeffs: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub site: usize,
    /// Frobenius exponent as "num/den".
    #[arg(long = "M", visible_alias = "m", allow_hyphen_values = true, default_value = "1/2")]
    pub m: String,
    /// Highest order; defaults to the table order.
    #[arg(long)]
    pub n_max: Option<usize>,
    /// Reference value for crossing detection.
    #[arg(long, allow_hyphen_values = true)]
    pub reference: Option<String>,
    #[arg(long)]
    pub digits: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Annotations (windows, minima, crossings) as JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct VptArgs {
    #[arg(long)]
    pub coeffs: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub site: usize,
    #[arg(long, allow_hyphen_values = true)]
    pub p: i64,
    #[arg(long)]
    pub q: u32,
    #[arg(long)]
    pub n_max: Option<usize>,
    /// extremum, rightmost-inflection or derivative-<d>.
    #[arg(long, default_value = "rightmost-inflection")]
    pub strategy: Strategy,
    /// Append a Richardson report up to this order.
    #[arg(long)]
    pub richardson: Option<usize>,
    #[arg(long)]
    pub digits: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Where to write the Richardson report CSV.
    #[arg(long)]
    pub report_out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct RichardsonArgs {
    /// CSV produced by another subcommand.
    #[arg(long)]
    pub input: PathBuf,
    /// Column holding the sequence values.
    #[arg(long)]
    pub column: String,
    /// Column holding the sequence index; defaults to the first column.
    #[arg(long)]
    pub index_column: Option<String>,
    #[arg(long, default_value_t = 6)]
    pub k_max: usize,
    #[arg(long)]
    pub digits: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct LargeOrderArgs {
    #[arg(long, required_unless_present = "zeta")]
    pub coeffs: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub site: usize,
    #[arg(long, default_value_t = 6)]
    pub k_max: usize,
    /// Exponent A used when fitting K and B; defaults to the extrapolated A.
    #[arg(long, allow_hyphen_values = true)]
    pub assume_a: Option<String>,
    /// K used when fitting B; defaults to the extrapolated K.
    #[arg(long, allow_hyphen_values = true)]
    pub assume_k: Option<String>,
    /// Predict K from B_1 and B_2.
    #[arg(long, allow_hyphen_values = true, num_args = 2, value_names = ["B1", "B2"])]
    pub zeta: Option<Vec<String>>,
    #[arg(long)]
    pub digits: Option<usize>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SignfitArgs {
    #[arg(long)]
    pub coeffs: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub site: usize,
    /// Use orders 1..=N; defaults to the table order.
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long, allow_hyphen_values = true, default_value = "1:2")]
    pub a_range: String,
    #[arg(long, allow_hyphen_values = true, default_value = "2.8:3.3")]
    pub b_range: String,
    #[arg(long, default_value_t = 2000)]
    pub resolution: usize,
    #[arg(long, default_value_t = 3)]
    pub refine_depth: usize,
    /// Score given "a,b" points instead of searching.
    #[arg(long, allow_hyphen_values = true)]
    pub at: Vec<String>,
    /// Best fit with b fixed to 0 or pi.
    #[arg(long)]
    pub phase_free: bool,
    /// Normalize the row by cos(aj+b) j! at "a,b".
    #[arg(long, allow_hyphen_values = true)]
    pub normalize: Option<String>,
    #[arg(long)]
    pub normalized_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct OracleArgs {
    #[command(subcommand)]
    pub which: OracleCommand,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleCommand {
    /// Closed-form slope f'(0) = 1/(eps sqrt 2).
    Instanton {
        #[arg(long, allow_hyphen_values = true, default_value = "1")]
        epsilon: String,
    },
    /// Wall shear y''(0) by shooting.
    Blasius {
        #[arg(long, default_value_t = 1.0)]
        epsilon: f64,
        /// Domain length; defaults to 10 sqrt(eps).
        #[arg(long)]
        length: Option<f64>,
        /// Step; defaults to 1e-3 sqrt(eps).
        #[arg(long)]
        step: Option<f64>,
        #[arg(long, default_value_t = 1e-13)]
        tolerance: f64,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
        /// Write the sampled profile as CSV.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
}

#[derive(Debug, Args, Serialize)]
pub struct ReportArgs {
    /// Instanton coefficient table.
    #[arg(long)]
    pub instanton: PathBuf,
    /// Blasius coefficient table.
    #[arg(long)]
    pub blasius: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub pade_orders: usize,
    #[arg(long, default_value_t = 200)]
    pub vpt_orders: usize,
    #[arg(long, allow_hyphen_values = true, default_value = "-3/2")]
    pub assume_a: String,
    #[arg(long, allow_hyphen_values = true, default_value = "2.46682906")]
    pub assume_k: String,
    #[arg(long, default_value_t = 2000)]
    pub grid_resolution: usize,
    #[arg(long)]
    pub digits: Option<usize>,
}

/// Files a command read and wrote; a non-empty output list gets a manifest.
#[derive(Debug, Default)]
pub struct Outcome {
    pub inputs: Vec<PathBuf>,
    pub outputs: Vec<PathBuf>,
    /// Overrides the default `<first output>.manifest.json`.
    pub manifest: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let ctx = commands::Context { prec: cli.prec, jobs: cli.jobs.max(1) };
    let result = match &cli.command {
        Command::Generate(a) => commands::generate(a),
        Command::Pade(a) => commands::pade(a, &ctx),
        Command::Vpt(a) => commands::vpt(a, &ctx),
        Command::Richardson(a) => commands::richardson(a, &ctx),
        Command::LargeOrder(a) => commands::large_order(a, &ctx),
        Command::Signfit(a) => commands::signfit(a, &ctx),
        Command::Oracle(a) => commands::oracle(a, &ctx),
        Command::Report(a) => report::run(a, &ctx),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = manifest::write(&cli.command, cli.prec, cli.jobs, &outcome, started.elapsed()) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    ExitCode::SUCCESS
}
