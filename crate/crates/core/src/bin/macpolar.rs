use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use macpolar::mac_code::{FrozenBits, Selection};
use macpolar::sim::{run_command, ChannelSource, Command, ConstructMethod, Format, Grid, OrderChoice, SimConfig};
use macpolar::Result;

#[derive(Parser, Debug)]
#[command(name = "macpolar", version, about = "Polar codes for binary-input multiple access channels")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Cmd {
    /// Rate constraints of every user subset
    Region,
    /// Rate tuples of base-code decoding orders
    Basecodes,
    /// Covering-radius estimate over sampled dominant-face points
    Cover,
    /// Build a code (information sets and reliabilities)
    Construct,
    /// Frame error rate of joint SC decoding
    Simulate,
    /// Pairwise-transform triples versus joint-scheme rate points
    Counterexample,
}

#[derive(clap::Args, Debug)]
struct Common {
    /// Channel file, or builtin:gaussian, bec:P, bsc:P, derived-bec:P, derived-bsc:P, noiseless
    #[arg(long, global = true, default_value = "builtin:gaussian")]
    channel: String,
    /// Number of users for built-in channels
    #[arg(long, global = true, default_value_t = 3)]
    m: usize,
    /// Base code length
    #[arg(long = "L", global = true, default_value_t = 2)]
    base_len: usize,
    /// Decoding order as a comma-separated 1-based user word, or "all"
    #[arg(long, global = true, default_value = "all")]
    order: String,
    /// log2 of the block length
    #[arg(long, global = true, default_value_t = 8)]
    n: usize,
    /// Smallest n of the counterexample table
    #[arg(long, global = true, default_value_t = 4)]
    n_min: usize,
    #[arg(long, global = true, default_value_t = macpolar::mac_code::DEFAULT_BETA)]
    beta: f64,
    /// Simulation trials, or Monte Carlo construction trials
    #[arg(long, global = true, default_value_t = 1000)]
    trials: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output file (stdout if absent)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// csv or json
    #[arg(long, global = true, default_value = "csv")]
    format: String,
    /// Gaussian quantization bins
    #[arg(long, global = true, default_value_t = Grid::default().bins)]
    bins: usize,
    #[arg(long, global = true, default_value_t = Grid::default().min, allow_hyphen_values = true)]
    grid_min: f64,
    #[arg(long, global = true, default_value_t = Grid::default().max)]
    grid_max: f64,
    /// Gaussian noise variance per real dimension
    #[arg(long, global = true, default_value_t = Grid::default().noise_variance)]
    noise_var: f64,
    #[arg(long, global = true, default_value_t = Grid::default().amplitude)]
    amplitude: f64,
    /// exact or montecarlo reliabilities for construct
    #[arg(long, global = true, default_value = "exact")]
    method: String,
    /// Pick round(N R_j) positions per user instead of thresholding
    #[arg(long, global = true)]
    target_rates: bool,
    /// Seed for random frozen bits (zeros if absent)
    #[arg(long, global = true)]
    frozen_seed: Option<u64>,
    /// Face samples for cover
    #[arg(long, global = true, default_value_t = 200)]
    samples: usize,
    /// Also run cover at 2L
    #[arg(long, global = true)]
    double_len: bool,
    /// Code file for simulate (output of construct)
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Exact table output budget
    #[arg(long, global = true, default_value_t = macpolar::polar::DEFAULT_TABLE_BUDGET)]
    budget: usize,
}

fn config(c: &Common) -> Result<SimConfig> {
    Ok(SimConfig {
        channel: c.channel.parse::<ChannelSource>()?,
        m: c.m,
        base_len: c.base_len,
        order: c.order.parse::<OrderChoice>()?,
        n: c.n,
        n_min: c.n_min,
        beta: c.beta,
        trials: c.trials,
        seed: c.seed,
        grid: Grid { min: c.grid_min, max: c.grid_max, bins: c.bins, noise_variance: c.noise_var, amplitude: c.amplitude },
        method: c.method.parse::<ConstructMethod>()?,
        selection: if c.target_rates { Selection::TargetRates } else { Selection::Threshold },
        frozen: c.frozen_seed.map_or(FrozenBits::Zeros, |seed| FrozenBits::Random { seed }),
        samples: c.samples,
        double_len: c.double_len,
        spec: c.spec.clone(),
        budget: c.budget,
        ..SimConfig::default()
    })
}

fn run(cli: &Cli) -> Result<()> {
    let cfg = config(&cli.common)?;
    let format = cli.common.format.parse::<Format>()?;
    let command = match cli.command {
        Cmd::Region => Command::Region,
        Cmd::Basecodes => Command::BaseCodes,
        Cmd::Cover => Command::Cover,
        Cmd::Construct => Command::Construct,
        Cmd::Simulate => Command::Simulate,
        Cmd::Counterexample => Command::Counterexample,
    };
    let text = run_command(command, &cfg, format)?;
    match &cli.common.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
