//! `so-orbit`: reproducible experiments on linear images of rotation orbits.

mod commands;
mod input;
mod svg;

use clap::{Args, Parser, Subcommand, ValueEnum};
use so_orbit::boundary::CounterexampleKind;
use so_orbit::{OrbitError, Tolerances};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "so-orbit", version, about = "Linear images of special orthogonal orbits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Svg,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Problem document (JSON).
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,
    /// Seed for every random draw; echoed in the output.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Number of support directions.
    #[arg(long, global = true, default_value_t = so_orbit::boundary::DEFAULT_GRID)]
    pub grid: usize,
    /// Sample count (sample, convexity, gamma, boundary overlay).
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Comma separated scaling factors in [0, 1].
    #[arg(long, global = true, value_delimiter = ',', default_values_t = vec![0.0, 0.25, 0.5, 0.75, 1.0])]
    pub alpha: Vec<f64>,
    /// Certificate acceptance threshold.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker thread cap; all cores by default.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Support values, touching points and convex region of a planar image.
    Boundary(Common),
    /// Batch star certificates over random targets.
    StarCheck {
        #[arg(long, default_value_t = 10)]
        targets: usize,
        #[command(flatten)]
        common: Common,
    },
    /// One certificate for alpha * L(U A V).
    Certify(Common),
    /// Ellipse E(U) or ellipsoid E(U, V), with optional membership of "y".
    Ellipse(Common),
    /// Frames making the ellipse (l = 2) or ellipsoid (l >= 3) degenerate.
    Degenerate(Common),
    /// Closed-form maximum of tr(P U A V) and attaining frames.
    Maxtrace(Common),
    /// Random maximisers of tr(P B) over the orbit of A, verified.
    Gamma(Common),
    /// Diagonal hull membership with certificate.
    Thompson(Common),
    /// Non-convexity witnesses.
    Counterexample {
        #[arg(value_enum)]
        kind: KindArg,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long)]
        ell: Option<usize>,
        #[arg(long, default_value_t = 256)]
        starts: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Monte Carlo sample of the image.
    Sample(Common),
    /// Support region against the hull of a sample.
    Convexity(Common),
    /// Star certificates for joint orbits.
    Joint {
        #[arg(long, default_value_t = 10)]
        targets: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum KindArg {
    Ell3,
    Joint,
}

/// Outcome of a command: the artifact and whether its checks passed.
pub struct Output {
    pub text: String,
    pub pass: bool,
}

fn input_error(e: &OrbitError) -> bool {
    !matches!(e, OrbitError::Numerical(_) | OrbitError::Structural(_) | OrbitError::DeterminantObstruction)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Boundary(c)
        | Command::Certify(c)
        | Command::Ellipse(c)
        | Command::Degenerate(c)
        | Command::Maxtrace(c)
        | Command::Gamma(c)
        | Command::Thompson(c)
        | Command::Sample(c)
        | Command::Convexity(c) => c.clone(),
        Command::StarCheck { common, .. } | Command::Counterexample { common, .. } | Command::Joint { common, .. } => {
            common.clone()
        }
    };
    if let Some(t) = common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    if let Some(t) = common.tol {
        Tolerances::set_global(Tolerances { certificate: t, ..Tolerances::default() });
    }
    let result = match cli.command {
        Command::Boundary(c) => commands::boundary(&c),
        Command::StarCheck { targets, common } => commands::star_check(&common, targets),
        Command::Certify(c) => commands::certify(&c),
        Command::Ellipse(c) => commands::ellipse(&c),
        Command::Degenerate(c) => commands::degenerate(&c),
        Command::Maxtrace(c) => commands::maxtrace(&c),
        Command::Gamma(c) => commands::gamma(&c),
        Command::Thompson(c) => commands::thompson(&c),
        Command::Counterexample { kind, n, m, ell, starts, common } => {
            let kind = match kind {
                KindArg::Ell3 => CounterexampleKind::Ell3,
                KindArg::Joint => CounterexampleKind::Joint,
            };
            let ell = ell.unwrap_or(match kind {
                CounterexampleKind::Ell3 => 3,
                CounterexampleKind::Joint => 2,
            });
            commands::counterexample(&common, kind, n, m, ell, starts)
        }
        Command::Sample(c) => commands::sample(&c),
        Command::Convexity(c) => commands::convexity(&c),
        Command::Joint { targets, common } => commands::joint(&common, targets),
    };
    match result {
        Ok(out) => {
            if let Err(e) = commands::emit(&common, &out.text) {
                eprintln!("error: cannot write output: {e}");
                return ExitCode::from(2);
            }
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if input_error(&e) { 2 } else { 1 })
        }
    }
}
