//! `bdwell` — exact analysis, Monte Carlo simulation, strong-drift sweeps,
//! and self-verification for birth-and-death chains with drift toward zero.
//!
//! Exit codes: 0 success, 1 usage/configuration error, 2 check failure,
//! 3 budget exceeded.

mod commands;
mod config;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "bdwell", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Model selection shared by all commands.
#[derive(Args, Debug, Clone, Default)]
struct ModelArgs {
    /// Zoo model name: simple_rw | varying_rw | ehrenfest | half_well | driftless
    #[arg(long)]
    model: Option<String>,
    /// Model document (JSON) instead of a zoo name
    #[arg(long, value_name = "FILE", conflicts_with = "model")]
    spec: Option<String>,
    /// Right endpoint
    #[arg(long)]
    a: Option<i64>,
    /// Left endpoint (defaults to -a for full-well zoo models)
    #[arg(long)]
    b: Option<i64>,
    /// Up-rate to the right of 0
    #[arg(long, visible_alias = "p")]
    p_plus: Option<f64>,
    /// Down-rate to the right of 0
    #[arg(long, visible_alias = "q")]
    q_plus: Option<f64>,
    /// Up-rate to the left of 0
    #[arg(long)]
    p_minus: Option<f64>,
    /// Down-rate to the left of 0
    #[arg(long)]
    q_minus: Option<f64>,
    /// Right edge of the flat bottom (varying_rw)
    #[arg(long)]
    d_plus: Option<i64>,
    /// Left edge of the flat bottom (varying_rw)
    #[arg(long)]
    d_minus: Option<i64>,
}

#[derive(Args, Debug, Clone, Default)]
struct CommonArgs {
    /// Output directory (default: $BDWELL_OUT, then ./bdwell_out)
    #[arg(long)]
    out: Option<String>,
    /// Preload configuration from a JSON file; flags override it
    #[arg(long, value_name = "FILE")]
    config: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact analysis: drift report, hitting moments, cut-off profile
    Analyze {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Hitting query FROM:TO (endpoints a, b, or integers); repeatable.
        /// Two-sided: FROM:TO1,TO2
        #[arg(long)]
        hit: Vec<String>,
    },
    /// Monte Carlo sampling with statistical verdicts
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Hitting query FROM:TO or FROM:TO1,TO2; repeatable
        #[arg(long)]
        hit: Vec<String>,
        /// Last-exit query FROM:TO; repeatable
        #[arg(long)]
        last_exit: Vec<String>,
        /// Samples per query
        #[arg(long)]
        n: Option<usize>,
        /// Master seed (recorded in the resolved config)
        #[arg(long)]
        seed: Option<u64>,
        /// Base stream id; query i uses stream + i
        #[arg(long)]
        stream: Option<u64>,
        /// Worker threads (default: one per core); results do not depend on it
        #[arg(long)]
        workers: Option<usize>,
        /// Collapse hold runs into one geometric draw (audited accelerator)
        #[arg(long)]
        skip_holds: bool,
        /// Keep trajectories that hit the step cap instead of failing
        #[arg(long)]
        allow_censoring: bool,
    },
    /// Strong-drift and variance-criterion sweeps over a
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated list of a values, e.g. 64,128,256
        #[arg(long, value_delimiter = ',')]
        a_list: Vec<i64>,
        /// b = -ceil(rho a) for full-well families
        #[arg(long)]
        b_rho: Option<f64>,
        /// Also compute the exact escape distance per a (oracle budget applies)
        #[arg(long)]
        escape: bool,
    },
    /// Formula-vs-oracle verification suite
    Verify {
        #[command(flatten)]
        common: CommonArgs,
        /// Seed for the random-chain generator
        #[arg(long)]
        seed: Option<u64>,
        /// Number of random chains
        #[arg(long)]
        chains: Option<usize>,
        /// Report a single printed-formula disambiguation: rl74 | rl81
        #[arg(long, value_name = "EQ")]
        eq: Option<String>,
        /// Flip one rate on the formula side to demonstrate mismatch detection
        #[arg(long)]
        perturb: bool,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successful exits; everything else is usage
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let outcome = match cli.command {
        Command::Analyze { model, common, hit } => commands::analyze(model, common, hit),
        Command::Simulate {
            model,
            common,
            hit,
            last_exit,
            n,
            seed,
            stream,
            workers,
            skip_holds,
            allow_censoring,
        } => commands::simulate(
            model,
            common,
            hit,
            last_exit,
            n,
            seed,
            stream,
            workers,
            skip_holds,
            allow_censoring,
        ),
        Command::Sweep { model, common, a_list, b_rho, escape } => {
            commands::sweep(model, common, a_list, b_rho, escape)
        }
        Command::Verify { common, seed, chains, eq, perturb } => {
            commands::verify(common, seed, chains, eq, perturb)
        }
    };
    match outcome {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err
                .downcast_ref::<bdwell::Error>()
                .map(|e| match e {
                    bdwell::Error::Budget(_) => 3,
                    _ => 1,
                })
                .unwrap_or(1);
            std::process::exit(code);
        }
    }
}
