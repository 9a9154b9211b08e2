mod commands;
mod report;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hubline::milp::Variant;
use hubline::{GeoError, MilpError, ModelError, PathError, SolverError};

#[derive(Parser, Debug)]
#[command(name = "hubline", version, about = "Hub line location with gravity demand")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Enumerate candidate hub paths for every commodity.
    Paths {
        #[command(flatten)]
        common: CommonArgs,
        /// Also write the auxiliary graph of commodity `O,D` as Graphviz.
        #[arg(long, value_name = "O,D")]
        dot: Option<String>,
    },
    /// Choose the hub line exactly.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = Method::Bnb)]
        method: Method,
        /// Report time savings per commodity instead of per trip.
        #[arg(long)]
        unweighted_metrics: bool,
        /// Refuse exhaustive search beyond this many lines.
        #[arg(long, default_value_t = 10_000_000)]
        line_cap: u64,
        /// Give up branch and bound after this many expanded nodes.
        #[arg(long, default_value_t = 10_000_000)]
        node_cap: u64,
    },
    /// Write a MILP formulation for an external solver.
    ExportMilp {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        milp: MilpArgs,
    },
    /// Check an external solution; add subtour cuts or accept it.
    CutLoop {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        milp: MilpArgs,
        /// Solver output with `name value` lines.
        #[arg(long)]
        solution: PathBuf,
        /// Subtour cuts from earlier rounds, one node set per line.
        #[arg(long)]
        sec_file: Option<PathBuf>,
    },
    /// Export nodes and, optionally, a solved line as GeoJSON.
    Geojson {
        #[command(flatten)]
        common: CommonArgs,
        /// Solution CSV written by `solve` or `cut-loop`.
        #[arg(long)]
        solution: Option<PathBuf>,
    },
}

#[derive(Args, Debug, Clone)]
struct CommonArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Defaults to csv-bundle for directories and cab for files.
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// CAB only: keep the first N nodes.
    #[arg(long)]
    subset: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    vartheta: Option<f64>,
    /// Base seed; revenues use seed+1 and edge sampling seed+2.
    #[arg(long)]
    seed: Option<u64>,
    /// Keep this share of the middle edges as candidate hub edges.
    #[arg(long)]
    sparsify: Option<f64>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, action = clap::ArgAction::Set)]
    strict_filter: Option<bool>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct MilpArgs {
    #[arg(long, default_value = "f1l_flow")]
    variant: Variant,
    /// Comma list of `desthub_orhub`, `ineq_new`, or `none`.
    #[arg(long, default_value = "none")]
    cuts: String,
    /// Also write the CPLEX LP text next to the MPS file.
    #[arg(long)]
    lp: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Cab,
    CsvBundle,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Method {
    Enum,
    Bnb,
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<ModelError>() {
            return if matches!(e, ModelError::Io { .. }) { 4 } else { 2 };
        }
        if let Some(e) = cause.downcast_ref::<MilpError>() {
            return if matches!(e, MilpError::Io { .. }) { 4 } else { 2 };
        }
        if let Some(e) = cause.downcast_ref::<SolverError>() {
            return match e {
                SolverError::TooManyLines { .. } | SolverError::NodeCap(_) => 3,
                _ => 2,
            };
        }
        if cause.downcast_ref::<PathError>().is_some_and(|e| matches!(e, PathError::Capped(_))) {
            return 3;
        }
        if cause.downcast_ref::<GeoError>().is_some() {
            return 2;
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return 4;
        }
    }
    2
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn run<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return if err.use_stderr() { 2 } else { 0 };
        }
    };
    match commands::run(cli.command) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit_code(&err)
        }
    }
}
