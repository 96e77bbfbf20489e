//! Command-line front end: every subcommand reads a TOML run descriptor,
//! evaluates one module operation (or a sweep of them) and writes a
//! deterministic table plus a manifest echoing the inputs.

mod config;
mod output;
mod run;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use output::{Format, OutputSpec};

#[derive(Parser)]
#[command(name = "spx", version, about = "Diagonal approximation calculators over weighted coefficient spaces")]
struct Cli {
    /// Run descriptor (TOML) with [system] and [params] blocks.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Directory receiving the table, manifest and optional plot.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,

    /// Also write an SVG polyline of the table's plot columns.
    #[arg(long, global = true)]
    plot: bool,

    /// Worker threads for sweeps; the output bytes do not depend on it.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,

    /// Tolerance handed to tolerance-driven evaluations (series tails).
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Seed for the randomized oracle searches.
    #[arg(long, global = true, default_value_t = 0x0f1e_2d3c_4b5a_6978)]
    seed: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Characteristic sequences (level values and cumulative ranks).
    Charseq,
    /// Decreasing rearrangement of the system moduli.
    Rearrange,
    /// Enumerate the points of an index region.
    Region,
    /// Lattice ball counts and their normalized volumes.
    Count,
    /// Extremal-problem values on the ellipsoid.
    #[command(subcommand)]
    Extremal(ExtremalCmd),
    /// Derivative-norm identities for a concrete element.
    #[command(subcommand)]
    Identity(IdentityCmd),
    /// Smoothness modulus of an element over a step sweep.
    Modulus,
    /// Derivative bound for an element with ball-supported spectrum.
    Bernstein,
    /// Modulus upper bounds from spherical approximation errors.
    InverseBound,
    /// Direct-theorem quantities.
    #[command(subcommand)]
    Jackson(JacksonCmd),
    /// Decay-class label for a scalar profile.
    Classify,
    /// Closed order expression for widths or n-term errors.
    Order,
    /// Exact values against the order expression, with their ratio.
    Ratio,
    /// Multiplier summation methods.
    #[command(subcommand)]
    Linmethod(LinmethodCmd),
    /// Randomized lower-bound search for the extremal problems.
    Oracle,
}

#[derive(Subcommand)]
enum ExtremalCmd {
    /// Error of capturing a fixed index region.
    Gamma,
    /// Best n-dimensional coordinate-subspace error.
    Widths,
    /// Kolmogorov width plateaus over level ranges.
    Kwidth,
    /// Best n-term approximation error.
    Nterm,
    /// n-term error under block or window constraints.
    Constrained,
}

#[derive(Subcommand)]
enum IdentityCmd {
    /// Tail error of the derivative against weighted level gaps.
    Direct,
    /// Weighted derivative sums against level tail errors.
    Inverse,
}

#[derive(Subcommand)]
enum JacksonCmd {
    /// Damped oscillation integral I_n over a degree/order sweep.
    In,
    /// Alternating series constant for the averaged bound.
    Sigma,
    /// Direct-theorem inequalities for a concrete element.
    Check,
    /// Upper bound for the best direct-theorem constant.
    Cnap,
}

#[derive(Subcommand)]
enum LinmethodCmd {
    /// Apply a multiplier method to an element.
    Apply,
    /// Method error over a degree or rho sweep.
    Error,
    /// Method quantities paired with their majorants.
    Rate,
}

impl Command {
    fn name(&self) -> String {
        match self {
            Command::Charseq => "charseq".into(),
            Command::Rearrange => "rearrange".into(),
            Command::Region => "region".into(),
            Command::Count => "count".into(),
            Command::Extremal(c) => format!(
                "extremal {}",
                match c {
                    ExtremalCmd::Gamma => "gamma",
                    ExtremalCmd::Widths => "widths",
                    ExtremalCmd::Kwidth => "kwidth",
                    ExtremalCmd::Nterm => "nterm",
                    ExtremalCmd::Constrained => "constrained",
                }
            ),
            Command::Identity(c) => format!(
                "identity {}",
                match c {
                    IdentityCmd::Direct => "direct",
                    IdentityCmd::Inverse => "inverse",
                }
            ),
            Command::Modulus => "modulus".into(),
            Command::Bernstein => "bernstein".into(),
            Command::InverseBound => "inverse-bound".into(),
            Command::Jackson(c) => format!(
                "jackson {}",
                match c {
                    JacksonCmd::In => "in",
                    JacksonCmd::Sigma => "sigma",
                    JacksonCmd::Check => "check",
                    JacksonCmd::Cnap => "cnap",
                }
            ),
            Command::Classify => "classify".into(),
            Command::Order => "order".into(),
            Command::Ratio => "ratio".into(),
            Command::Linmethod(c) => format!(
                "linmethod {}",
                match c {
                    LinmethodCmd::Apply => "apply",
                    LinmethodCmd::Error => "error",
                    LinmethodCmd::Rate => "rate",
                }
            ),
            Command::Oracle => "oracle".into(),
        }
    }
}

fn execute(cli: &Cli) -> Result<()> {
    let config_path = cli
        .config
        .as_ref()
        .context("every command reads its inputs from --config <file>")?;
    let loaded = config::load(config_path)?;
    let ctx = run::Ctx { loaded, tol: cli.tol, seed: cli.seed, jobs: cli.jobs };

    let table = match &cli.command {
        Command::Charseq => run::charseq(&ctx)?,
        Command::Rearrange => run::rearrange(&ctx)?,
        Command::Region => run::region(&ctx)?,
        Command::Count => run::count(&ctx)?,
        Command::Extremal(c) => match c {
            ExtremalCmd::Gamma => run::extremal_gamma(&ctx)?,
            ExtremalCmd::Widths => run::extremal_widths(&ctx)?,
            ExtremalCmd::Kwidth => run::extremal_kwidth(&ctx)?,
            ExtremalCmd::Nterm => run::extremal_nterm(&ctx)?,
            ExtremalCmd::Constrained => run::extremal_constrained(&ctx)?,
        },
        Command::Identity(c) => {
            run::identity(&ctx, matches!(c, IdentityCmd::Inverse))?
        }
        Command::Modulus => run::modulus(&ctx)?,
        Command::Bernstein => run::bernstein(&ctx)?,
        Command::InverseBound => run::inverse_bound(&ctx)?,
        Command::Jackson(c) => match c {
            JacksonCmd::In => run::jackson_in(&ctx)?,
            JacksonCmd::Sigma => run::jackson_sigma(&ctx)?,
            JacksonCmd::Check => run::jackson_check(&ctx)?,
            JacksonCmd::Cnap => run::jackson_cnap(&ctx)?,
        },
        Command::Classify => run::classify_cmd(&ctx)?,
        Command::Order => run::order_cmd(&ctx)?,
        Command::Ratio => run::ratio_cmd(&ctx)?,
        Command::Linmethod(c) => match c {
            LinmethodCmd::Apply => run::linmethod_apply(&ctx)?,
            LinmethodCmd::Error => run::linmethod_error(&ctx)?,
            LinmethodCmd::Rate => run::linmethod_rate(&ctx)?,
        },
        Command::Oracle => run::oracle_cmd(&ctx)?,
    };

    let format = match cli.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    let spec = OutputSpec {
        dir: cli.out.clone(),
        format,
        plot: cli.plot,
        command: cli.command.name(),
        config_bytes: ctx.loaded.bytes.clone(),
        tol: cli.tol,
        seed: cli.seed,
    };
    output::write_outputs(&spec, &table)?;
    output::print_table(&table, format)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
