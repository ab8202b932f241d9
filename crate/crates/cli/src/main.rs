mod commands;
mod figures;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use matchdist::classical::Size;
use matchdist::generalised::ApproxMode;

use output::Format;

#[derive(Debug, Parser)]
#[command(
    name = "matchdist",
    version,
    about = "Classical and generalised matching distributions"
)]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "csv", global = true)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

/// Parameters of `Match(t | n, m, θ)`.
#[derive(Debug, Clone, Args)]
pub struct DistArgs {
    /// Number of items per game; `inf` for the Poisson limit (requires --prob 0).
    #[arg(long)]
    size: Size,

    /// Number of independent games.
    #[arg(long, default_value_t = 1)]
    trials: usize,

    /// Probability that each item is known and placed correctly.
    #[arg(long, default_value_t = 0.0)]
    prob: f64,

    /// Normal approximation: `auto` uses it when trials > 100.
    #[arg(long, value_enum, default_value = "auto")]
    approx: ApproxFlag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ApproxFlag {
    Auto,
    True,
    False,
}

impl From<ApproxFlag> for ApproxMode {
    fn from(flag: ApproxFlag) -> Self {
        match flag {
            ApproxFlag::Auto => ApproxMode::Auto,
            ApproxFlag::True => ApproxMode::Normal,
            ApproxFlag::False => ApproxMode::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CiMethodArg {
    Asymptotic,
    Bootstrap,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TailSplitArg {
    Fractional,
    Absolute,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlternativeArg {
    Greater,
    Less,
    TwoSided,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "3")]
    Three,
    #[value(name = "4")]
    Four,
    #[value(name = "5")]
    Five,
    All,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Probability mass function.
    Pmf {
        #[command(flatten)]
        dist: DistArgs,
        /// Points to evaluate (comma separated); defaults to the whole support.
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
        /// Return natural-log probabilities.
        #[arg(long)]
        log: bool,
    },
    /// Cumulative distribution function.
    Cdf {
        #[command(flatten)]
        dist: DistArgs,
        /// Points to evaluate (comma separated); defaults to the whole support.
        #[arg(long, value_delimiter = ',')]
        k: Vec<usize>,
        /// `true` gives P(T <= k), `false` gives P(T > k).
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        lower_tail: bool,
        /// Return natural-log probabilities.
        #[arg(long)]
        log_p: bool,
    },
    /// Quantile function.
    Quantile {
        #[command(flatten)]
        dist: DistArgs,
        /// Probabilities (comma separated).
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        p: Vec<f64>,
        /// `false` treats p as an upper-tail probability.
        #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
        lower_tail: bool,
        /// The probabilities are given as natural logs.
        #[arg(long)]
        log_p: bool,
    },
    /// Seeded random draws by inverse-transform sampling.
    Sample {
        #[command(flatten)]
        dist: DistArgs,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Highest-density region.
    Hdr {
        #[command(flatten)]
        dist: DistArgs,
        /// Minimum coverage probability.
        #[arg(long, default_value_t = 0.95)]
        cover_prob: f64,
    },
    /// Mean, variance, skewness and kurtosis.
    Moments {
        #[command(flatten)]
        dist: DistArgs,
        /// Also report the standard deviation.
        #[arg(long)]
        include_sd: bool,
        /// Use the large-size asymptotic forms instead of the exact ones.
        #[arg(long)]
        asymptotic: bool,
    },
    /// Maximum likelihood estimate of the probability parameter with a confidence interval.
    Mle {
        /// File with one observed match count per line.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        size: usize,
        #[arg(long, value_enum, default_value = "asymptotic")]
        ci_method: CiMethodArg,
        #[arg(long, default_value_t = 0.95)]
        conf_level: f64,
        #[arg(long, default_value_t = matchdist::inference::DEFAULT_BOOTSTRAP_RESAMPLES)]
        bootstrap_sims: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// How the lower-tail share splits the interval's tail mass.
        #[arg(long, value_enum, default_value = "fractional")]
        tail_split: TailSplitArg,
    },
    /// Matching test on the total number of matches. Two-sided p-values count
    /// outcomes whose probability is within a relative 1e-12 of the observed one as ties.
    Test {
        /// File with one observed match count per line.
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0.0)]
        null_prob: f64,
        #[arg(long, value_enum, default_value = "greater")]
        alternative: AlternativeArg,
        #[arg(long, value_enum, default_value = "auto")]
        approx: ApproxFlag,
    },
    /// Power of the canonical matching test over a grid of probabilities.
    Power {
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Probabilities (comma separated); defaults to 0, 0.01, ..., 1.
        #[arg(long, value_delimiter = ',')]
        theta_grid: Vec<f64>,
    },
    /// Plot data for the figures as CSV.
    Figures {
        #[arg(long, value_enum, default_value = "all")]
        figure: FigureArg,
        /// Write one file per figure into this directory instead of stdout.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Brute-force reference distributions (enumeration or simulation).
    #[command(hide = true)]
    Oracle {
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0.0)]
        prob: f64,
        /// Simulate this many replications instead of enumerating.
        #[arg(long)]
        simulate: Option<usize>,
        #[arg(long, default_value_t = 1)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
}

fn run(cli: Cli) -> Result<(), commands::CliError> {
    use commands as c;
    let format = cli.format;
    let record = match cli.command {
        Command::Pmf { dist, k, log } => c::pmf(&dist, &k, log)?,
        Command::Cdf {
            dist,
            k,
            lower_tail,
            log_p,
        } => c::cdf(&dist, &k, lower_tail, log_p)?,
        Command::Quantile {
            dist,
            p,
            lower_tail,
            log_p,
        } => c::quantile(&dist, &p, lower_tail, log_p)?,
        Command::Sample { dist, count, seed } => c::sample(&dist, count, seed)?,
        Command::Hdr { dist, cover_prob } => c::hdr(&dist, cover_prob)?,
        Command::Moments {
            dist,
            include_sd,
            asymptotic,
        } => c::moments(&dist, include_sd, asymptotic)?,
        Command::Mle {
            data,
            size,
            ci_method,
            conf_level,
            bootstrap_sims,
            seed,
            tail_split,
        } => c::mle(
            &data,
            size,
            ci_method,
            conf_level,
            bootstrap_sims,
            seed,
            tail_split,
        )?,
        Command::Test {
            data,
            size,
            null_prob,
            alternative,
            approx,
        } => c::test(&data, size, null_prob, alternative, approx)?,
        Command::Power {
            size,
            trials,
            alpha,
            theta_grid,
        } => c::power(size, trials, alpha, &theta_grid)?,
        Command::Figures { figure, out_dir } => {
            return figures::emit(figure, out_dir.as_deref(), format);
        }
        Command::Oracle {
            size,
            prob,
            simulate,
            trials,
            seed,
        } => c::oracle(size, prob, simulate, trials, seed)?,
    };
    record.write(format)?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
