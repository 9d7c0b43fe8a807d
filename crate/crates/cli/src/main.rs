mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nalgebra::Vector3;
use pkstiff::orthoglide::Variant;

/// Stiffness analysis of Orthoglide-type overconstrained parallel manipulators.
#[derive(Debug, Parser)]
#[command(name = "pkstiff", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct ModelArgs {
    /// JSON config; the calibrated prototype when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override the leg variant.
    #[arg(long)]
    pub variant: Option<Variant>,
    /// Fictitious stiffness (N/mm) put on the parallelogram slack direction.
    #[arg(long)]
    pub kf: Option<f64>,
    /// Include hinge-axis flexibility of the parallelograms.
    #[arg(long)]
    pub extended: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Stiffness report at one point, as JSON.
    Eval {
        #[command(flatten)]
        model: ModelArgs,
        /// End-effector position x,y,z in mm.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        point: Vector3<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compliance summaries over a grid, as CSV plus a JSON sidecar of full matrices.
    Map {
        #[command(flatten)]
        model: ModelArgs,
        /// xmin:xmax:n,ymin:ymax:n,zmin:zmax:n; the 5×5×5 working cube when omitted.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads; all available cores when omitted.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Compliance matrix from six displacement datasets.
    FitCompliance {
        /// Six CSV files, one per unit load case.
        #[arg(required = true, num_args = 6)]
        datasets: Vec<PathBuf>,
        /// Reference point x,y,z overriding the files' p0 headers.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        p0: Option<Vector3<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Both leg variants side by side at shared points.
    Compare {
        #[command(flatten)]
        model: ModelArgs,
        /// Point x,y,z; repeatable. Q0, Q1 and Q2 when omitted.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        point: Vec<Vector3<f64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs the built-in cross-check suites.
    Validate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn parse_point(s: &str) -> Result<Vector3<f64>, String> {
    pkstiff::procrustes::parse_vec3(s, "point").map_err(|e| match e {
        pkstiff::Error::Data(m) => m,
        other => other.to_string(),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Eval { model, point, out } => commands::eval(&model, point, out.as_deref()),
        Command::Map {
            model,
            grid,
            out,
            workers,
        } => commands::map(&model, grid.as_deref(), out.as_deref(), workers),
        Command::FitCompliance { datasets, p0, out } => {
            commands::fit_compliance(&datasets, p0, out.as_deref())
        }
        Command::Compare { model, point, out } => commands::compare(&model, &point, out.as_deref()),
        Command::Validate { model, seed } => commands::validate(&model, seed),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pkstiff: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
