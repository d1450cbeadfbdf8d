//! `projgraph`: command-line front end for projection-graph experiments.
//!
//! Every command reads a SNAP-style edge list, works on its largest connected
//! component (except `lcc`, which extracts it), and writes CSV artifacts plus
//! a `manifest.json` into `--out`. Each CSV starts with one `#` line holding
//! the command's configuration as JSON. Nothing is written unless the whole
//! command succeeds.
//!
//! Exit codes: 0 success, 2 I/O error, 3 invalid input, 4 infeasible request.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use error::CliError;

#[derive(Parser)]
#[command(name = "projgraph", version, about = "Projection graphs of social networks onto P2P overlays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the largest connected component.
    Lcc(LccArgs),
    /// Detect communities (recursive Louvain, or Jaccard with --groups).
    Communities(CommunitiesArgs),
    /// Merge communities up to a target average size.
    Merge(MergeArgs),
    /// Build the projection graph of a mapping.
    Project(ProjectArgs),
    /// Compute one centrality metric on the social and projection graphs.
    Centrality(CentralityArgs),
    /// Sweep target community sizes and correlate user and peer scores.
    Correlate(CorrelateArgs),
    /// Simulate person-finder or team-builder searches.
    Search(SearchArgs),
}

/// Flags shared by every command. `out` and `threads` do not affect results
/// and are left out of the CSV config header.
#[derive(Args, Serialize, Clone)]
pub struct Common {
    /// Edge list: one `u v` pair per line, `#` comments.
    #[arg(long)]
    pub edges: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory, created if missing.
    #[arg(long)]
    #[serde(skip)]
    pub out: PathBuf,
    /// Worker threads; 0 uses every available core, 1 runs sequentially.
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub threads: usize,
}

#[derive(Args, Serialize)]
pub struct LccArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Serialize)]
pub struct CommunitiesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Community size cap for recursive Louvain.
    #[arg(long = "max_size", default_value_t = 100)]
    pub max_size: usize,
    /// `group_id user_id` lines; switches to Jaccard group assignment.
    #[arg(long)]
    pub groups: Option<PathBuf>,
}

#[derive(Args, Serialize)]
pub struct MergeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// `user_external_id,peer_id` CSV.
    #[arg(long)]
    pub mapping: PathBuf,
    #[arg(long = "target_avg")]
    pub target_avg: usize,
}

#[derive(Args, Serialize)]
pub struct ProjectArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    #[arg(long)]
    pub mapping: PathBuf,
}

#[derive(Args, Serialize)]
pub struct CentralityArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Also score the projection graph of this mapping.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub metric: MetricArg,
    /// Path length on the projection graph.
    #[arg(long = "distance_mode", value_enum, default_value_t = DistanceArg::InverseWeight)]
    pub distance_mode: DistanceArg,
    #[arg(long)]
    pub normalize: bool,
}

#[derive(Args, Serialize)]
pub struct CorrelateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// Starting mapping; recursive Louvain with --max_size when absent.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    #[arg(long = "max_size", default_value_t = 100)]
    pub max_size: usize,
    /// Comma-separated ascending targets. Default grid
    /// 5,10,20,50,100,200,300,500,1000, minus targets below the starting mean.
    #[arg(long = "target_avg", value_delimiter = ',')]
    pub target_avg: Vec<usize>,
    /// Metrics to sweep; all when absent.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub metric: Vec<MetricArg>,
    /// Projection path lengths for betweenness; both when absent.
    #[arg(long = "distance_mode", value_enum, value_delimiter = ',')]
    pub distance_mode: Vec<DistanceArg>,
}

#[derive(Args, Serialize)]
pub struct SearchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
    /// User-to-peer mapping; recursive Louvain with --max_size when absent.
    #[arg(long)]
    pub mapping: Option<PathBuf>,
    #[arg(long = "max_size", default_value_t = 100)]
    pub max_size: usize,
    #[arg(long, value_enum, default_value_t = WorkloadArg::PersonFinder)]
    pub workload: WorkloadArg,
    /// Techniques to run; all when absent.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub technique: Vec<TechniqueArg>,
    /// Comma-separated fan-out percentages.
    #[arg(long = "n_percent", value_delimiter = ',', default_value = "20")]
    pub n_percent: Vec<u32>,
    /// Queries as a fraction of the users.
    #[arg(long = "s_fraction", default_value_t = 0.1)]
    pub s_fraction: f64,
    /// Team size as a fraction of the users.
    #[arg(long = "d_fraction", default_value_t = 0.01)]
    pub d_fraction: f64,
    /// Path length for the peer betweenness rankings.
    #[arg(long = "distance_mode", value_enum, default_value_t = DistanceArg::InverseWeight)]
    pub distance_mode: DistanceArg,
    /// Layers to simulate; both when absent.
    #[arg(long, value_enum, value_delimiter = ',')]
    pub layer: Vec<LayerArg>,
    /// Social-layer neighbour selection.
    #[arg(long, value_enum, default_value_t = ForwardingArg::SkipVisited)]
    pub forwarding: ForwardingArg,
}

#[derive(ValueEnum, Serialize, Clone, Copy, PartialEq, Eq, Debug)]
#[serde(rename_all = "snake_case")]
pub enum MetricArg {
    #[value(name = "degree")]
    Degree,
    #[value(name = "node_betweenness")]
    NodeBetweenness,
    #[value(name = "edge_betweenness")]
    EdgeBetweenness,
}

#[derive(ValueEnum, Serialize, Clone, Copy, PartialEq, Eq, Debug)]
#[serde(rename_all = "snake_case")]
pub enum DistanceArg {
    #[value(name = "unit")]
    Unit,
    #[value(name = "inverse_weight")]
    InverseWeight,
}

#[derive(ValueEnum, Serialize, Clone, Copy, PartialEq, Eq, Debug)]
#[serde(rename_all = "snake_case")]
pub enum WorkloadArg {
    #[value(name = "person_finder")]
    PersonFinder,
    #[value(name = "team_builder")]
    TeamBuilder,
}

#[derive(ValueEnum, Serialize, Clone, Copy, PartialEq, Eq, Debug)]
pub enum TechniqueArg {
    #[value(name = "peer_degree_topN")]
    #[serde(rename = "peer_degree_topN")]
    PeerDegree,
    #[value(name = "peer_betweenness_topN")]
    #[serde(rename = "peer_betweenness_topN")]
    PeerBetweenness,
    #[value(name = "pg_edge_betweenness_topN")]
    #[serde(rename = "pg_edge_betweenness_topN")]
    PgEdgeBetweenness,
    #[value(name = "random_N")]
    #[serde(rename = "random_N")]
    Random,
}

#[derive(ValueEnum, Serialize, Clone, Copy, PartialEq, Eq, Debug)]
#[serde(rename_all = "snake_case")]
pub enum LayerArg {
    #[value(name = "sg")]
    Sg,
    #[value(name = "pg")]
    Pg,
}

#[derive(ValueEnum, Serialize, Clone, Copy, PartialEq, Eq, Debug)]
#[serde(rename_all = "snake_case")]
pub enum ForwardingArg {
    #[value(name = "skip_visited")]
    SkipVisited,
    #[value(name = "fixed")]
    Fixed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Lcc(a) => commands::lcc(a),
        Command::Communities(a) => commands::communities(a),
        Command::Merge(a) => commands::merge(a),
        Command::Project(a) => commands::project(a),
        Command::Centrality(a) => commands::centrality(a),
        Command::Correlate(a) => commands::correlate(a),
        Command::Search(a) => commands::search(a),
    }
}
