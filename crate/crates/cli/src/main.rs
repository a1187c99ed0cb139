mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use wl_audit::ErrorKind;

use output::Format;

/// Audits graph benchmarks against the Weisfeiler-Lehman hierarchy.
#[derive(Debug, Parser)]
#[command(name = "wl-audit", version)]
pub struct Cli {
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Output directory (default: $WL_AUDIT_OUT, else ./wl-audit-out).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Comma-separated output formats (default: every format the command writes).
    #[arg(long, global = true, value_enum, value_delimiter = ',')]
    pub formats: Vec<Format>,
    /// Seed for sampled pairs and edits.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataFormat {
    /// `edges.csv` present means node-task, otherwise TU files.
    Auto,
    Tudataset,
    NodeTask,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ColorArg {
    Auto,
    Labels,
    Attributes,
    Degree,
    Uniform,
}

#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    /// Dataset directory.
    #[arg(long)]
    pub dir: PathBuf,
    #[arg(long, value_enum, default_value = "auto")]
    pub format: DataFormat,
    /// TU file prefix (default: the directory name).
    #[arg(long)]
    pub name: Option<String>,
    /// Initial node colors for TU data.
    #[arg(long, value_enum, default_value = "auto")]
    pub color_source: ColorArg,
    /// Drop repeated edges instead of rejecting the input.
    #[arg(long)]
    pub dedupe: bool,
}

#[derive(Debug, Clone, Args)]
pub struct WlArgs {
    /// Last WL iteration.
    #[arg(long = "t", default_value_t = 3)]
    pub t: usize,
    /// Compare graphs by sorted color counts only.
    #[arg(long)]
    pub sortedcount_only: bool,
    /// Largest graph checked exactly for isomorphism.
    #[arg(long, default_value_t = 512)]
    pub iso_max_nodes: usize,
    /// Class graphs above the cap by WL signature instead of failing.
    #[arg(long)]
    pub wl_fallback: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NormArg {
    Min,
    Geometric,
    Arithmetic,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RangeArg {
    Fixed,
    Data,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Class and singleton counts of E_y, E_pi and E_WL^1..t.
    Partitions {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        wl: WlArgs,
    },
    /// AMI matrix over E_y, E_pi and E_WL^1..t.
    Ami {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        wl: WlArgs,
        #[arg(long, value_enum, default_value = "arithmetic")]
        normalization: NormArg,
    },
    /// Majority-vote lookup accuracy under E_pi and E_WL^t.
    Majority {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        wl: WlArgs,
    },
    /// Kernel and embedding similarity against label agreement.
    Align {
        #[command(flatten)]
        data: DataArgs,
        /// WL iterations of the subtree kernel.
        #[arg(long = "t", default_value_t = 4)]
        t: usize,
        /// Embedding CSV with header id,e0,...
        #[arg(long)]
        embeddings: Option<PathBuf>,
        #[arg(long, default_value_t = 20)]
        bins: usize,
        #[arg(long, default_value_t = 2.0)]
        log_base: f64,
        #[arg(long, value_enum, default_value = "fixed")]
        bin_range: RangeArg,
        /// Uniformly sample this many pairs.
        #[arg(long, conflicts_with = "all_pairs")]
        sample: Option<usize>,
        /// Use every pair regardless of count.
        #[arg(long)]
        all_pairs: bool,
        /// Also write the per-pair similarities.
        #[arg(long)]
        pairs_csv: bool,
    },
    /// Identifiability under E_WL^t, optionally per group, and edit sensitivity.
    Trust {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long = "t", default_value_t = 3)]
        t: usize,
        /// Report one row per group.
        #[arg(long)]
        by_group: bool,
        /// Comma-separated names for group ids 0, 1, ...
        #[arg(long, value_delimiter = ',')]
        group_names: Vec<String>,
        /// Append group ids to the initial colors.
        #[arg(long)]
        include_groups: bool,
        /// Single-graph file whose single-edge edits are audited.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Number of sampled edits (default: all).
        #[arg(long, requires = "graph")]
        budget: Option<usize>,
        /// Embeddings of the graph (id 0) and its edits (ids 1..).
        #[arg(long, requires = "graph")]
        embeddings: Option<PathBuf>,
    },
    /// Pairs WL cannot separate at iteration t, with the exact verdict.
    Pairs {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        wl: WlArgs,
    },
    /// Edit distance against the WL verdict for every pair of small graphs.
    Ged {
        /// Single-graph files (default: the four built-in fixtures).
        graphs: Vec<PathBuf>,
    },
    /// Labels that make the WL lookup table right once per class.
    Adversarial {
        #[command(flatten)]
        data: DataArgs,
        #[command(flatten)]
        wl: WlArgs,
    },
    /// Joint k-WL test of two single-graph files.
    Kwl {
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, num_args = 2, value_names = ["A", "B"], required = true)]
        pair: Vec<PathBuf>,
        /// Iteration limit (default: until stable).
        #[arg(long)]
        t_max: Option<usize>,
    },
    /// Writes the four built-in fixture graphs.
    Fixtures,
}

fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Usage => 1,
        ErrorKind::Data => 2,
        ErrorKind::Resource => 3,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(1);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .expect("thread pool is configured once");
    }
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
    }
}
