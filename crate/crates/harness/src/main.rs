use std::fs;
use std::path::PathBuf;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use r2_core::agents::BmrhConfig;
use r2_core::ntbea::{combine_spaces, SearchSpace};
use r2_harness::{run_experiment, ExperimentKind, ExperimentSpec, Resolver};

#[derive(Parser)]
#[command(name = "r2", version, about = "Run game-playing agent experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Play games between agents in fixed seats.
    Play(RunArgs),
    /// Tune an agent (and optionally value-function weights) with NTBEA.
    Tune(RunArgs),
    /// Play a candidate against one opponent with alternating seats.
    Validate(RunArgs),
    /// Play every pair of agents.
    Roundrobin(RunArgs),
    /// Play a candidate against several copies of one opponent.
    Multi(RunArgs),
    /// Print a search space: the BMRH space, optionally with n weight dimensions.
    Space {
        #[arg(long)]
        weights: Option<usize>,
        /// Weight dimensions only.
        #[arg(long)]
        weights_only: bool,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment spec JSON.
    #[arg(long)]
    spec: PathBuf,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; defaults to the number of cores.
    #[arg(long)]
    jobs: Option<usize>,
}

fn run(kind: ExperimentKind, args: RunArgs) -> anyhow::Result<()> {
    let text = fs::read_to_string(&args.spec).with_context(|| format!("reading {}", args.spec.display()))?;
    let spec = ExperimentSpec::from_json(&text).with_context(|| format!("parsing {}", args.spec.display()))?;
    let resolver = Resolver::new(args.spec.parent());
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = args.jobs {
        pool = pool.num_threads(j.max(1));
    }
    let pool = pool.build()?;
    let summary = pool.install(|| run_experiment(kind, &spec, &resolver, &args.out, args.seed))?;
    println!("{summary}");
    Ok(())
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Play(a) => run(ExperimentKind::Play, a),
        Command::Tune(a) => run(ExperimentKind::Tune, a),
        Command::Validate(a) => run(ExperimentKind::Validate, a),
        Command::Roundrobin(a) => run(ExperimentKind::Roundrobin, a),
        Command::Multi(a) => run(ExperimentKind::Multiopponent, a),
        Command::Space { weights, weights_only } => {
            let grid = SearchSpace::weight_grid(weights.unwrap_or(0));
            let space = if weights_only { grid } else { combine_spaces(&BmrhConfig::search_space(), &grid)? };
            println!("{}", space.to_json());
            Ok(())
        }
    }
}
