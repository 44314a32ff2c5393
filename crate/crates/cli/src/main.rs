//! `ordgeo` command-line tool. Data goes to files under `--output-dir`; stdout
//! stays empty and logs go to stderr.

mod cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit codes. Anything not listed maps to [`EXIT_RUNTIME`].
pub const EXIT_OK: u8 = 0;
pub const EXIT_RUNTIME: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_MISSING_STAGE: u8 = 3;
pub const EXIT_WRITE: u8 = 4;
pub const EXIT_MISMATCH: u8 = 5;

#[derive(Parser, Debug)]
#[command(name = "ordgeo", version, about = "Order-theoretic reconstruction of Lorentzian geometry from sprinklings")]
#[command(after_help = "Exit codes: 0 success, 1 runtime error, 2 invalid config, input or arguments, \
3 missing pipeline stage, 4 write failure, 5 manifest rerun differs.")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the available cores. Results do not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[arg(long, global = true, default_value = ".")]
    pub output_dir: PathBuf,
    /// Output encoding; each command documents what it accepts.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Repeat for more log output on stderr.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Bin,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelKind {
    Minkowski,
    Conformal2d,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "minkowski")]
    pub model: ModelKind,
    /// Spacetime dimension (Minkowski only).
    #[arg(long, default_value_t = 2)]
    pub dimension: usize,
    /// Half-width of the spatial box.
    #[arg(long, default_value_t = 0.5)]
    pub extent: f64,
    /// Time interval as `T0,T1`.
    #[arg(long, value_delimiter = ',', num_args = 2, default_values_t = [0.0, 1.0])]
    pub time: Vec<f64>,
    /// Conformal factor scale (conformal2d only).
    #[arg(long, default_value_t = 1.0)]
    pub omega_scale: f64,
    /// Exponential rate in time of the conformal factor; 0 gives a constant factor.
    #[arg(long, default_value_t = 0.0)]
    pub omega_rate: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Causal,
    Chrono,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaKind {
    Exact,
    Reconstructed,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coef {
    SingleCone,
    DiamondExact,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gauge {
    Noldus,
    SigmaProxy,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum MetricName {
    Beem,
    Lp,
    Noldus,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum FName {
    ChiMinus,
    Abs,
    Id,
    #[value(name = "f-r")]
    FR,
    H,
}

#[derive(Args, Debug, Clone)]
pub struct DimArgs {
    #[arg(long, default_value_t = 50)]
    pub k_min: usize,
    #[arg(long, default_value_t = 200)]
    pub k_max: usize,
    /// Diamonds sampled per point.
    #[arg(long, default_value_t = 200)]
    pub n_pairs: usize,
    #[arg(long, default_value_t = 1)]
    pub balance_tol: usize,
}

#[derive(Args, Debug, Clone)]
pub struct LengthArgs {
    /// Fixed dimension; omit to estimate it from the sprinkle.
    #[arg(long = "dim")]
    pub dim: Option<f64>,
    /// Points sampled when estimating the dimension.
    #[arg(long, default_value_t = 50)]
    pub dim_points: usize,
    #[arg(long, value_enum, default_value = "diamond-exact")]
    pub coef: Coef,
    /// Smallest open-interior count of a chain segment.
    #[arg(long = "segment-k-min", default_value_t = ordgeo::fld::DEFAULT_K_MIN)]
    pub segment_k_min: usize,
    #[command(flatten)]
    pub dim_params: DimArgs,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Poisson-sprinkle a model slab; writes `space.oms.json`.
    Sprinkle {
        #[command(flatten)]
        model: ModelArgs,
        /// Expected points per unit volume.
        #[arg(long, conflicts_with = "n_points", required_unless_present = "n_points")]
        density: Option<f64>,
        /// Fixed point count.
        #[arg(long)]
        n_points: Option<usize>,
        /// Every point weighs 1 instead of 1/density.
        #[arg(long)]
        unit_weights: bool,
        /// Store the closed relation instead of covering pairs.
        #[arg(long)]
        closed: bool,
    },
    /// Lists related pairs with their interior counts; writes `relation.csv` or `relation.json`.
    Relate {
        space: PathBuf,
        #[arg(long, value_enum, default_value = "causal")]
        mode: Mode,
        /// Only covering pairs.
        #[arg(long)]
        hasse: bool,
    },
    /// Lorentzian distance matrix; writes `sigma.lormat` or `sigma.csv`.
    Sigma {
        space: PathBuf,
        #[arg(long, value_enum, default_value = "reconstructed")]
        source: SigmaKind,
        #[command(flatten)]
        length: LengthArgs,
        /// Model for `--source exact`.
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Per-point dimension estimates; writes `dimension.json`.
    Dim {
        space: PathBuf,
        /// Points to estimate at, sampled with `--seed`.
        #[arg(long, default_value_t = 50)]
        n_points: usize,
        #[command(flatten)]
        params: DimArgs,
    },
    /// Reconstructed distances from one point; writes `length.csv` or `length.json`.
    Length {
        space: PathBuf,
        /// Source point id.
        #[arg(long)]
        from: u64,
        /// Restrict the output to this target id.
        #[arg(long)]
        to: Option<u64>,
        #[command(flatten)]
        length: LengthArgs,
    },
    /// Hausdorff-measure scan over a sprinkle; writes `hausdorff_scan.csv` or `.json`.
    Measure {
        space: PathBuf,
        /// LORMAT01 sigma matrix.
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 3.0])]
        n_grid: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.4, 0.2, 0.1])]
        deltas: Vec<f64>,
        #[arg(long, value_enum, default_value = "noldus")]
        gauge: Gauge,
        #[arg(long, default_value_t = 0.5)]
        min_sigma_fraction: f64,
        #[arg(long, default_value_t = 0.1)]
        threshold: f64,
    },
    /// Distance matrix of a metric construction; writes `metric_<label>.lormat` or `.csv`.
    Metric {
        space: PathBuf,
        #[arg(long, value_enum)]
        kind: MetricName,
        /// LORMAT01 sigma matrix (`lp` and `noldus`).
        #[arg(long)]
        sigma: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "abs")]
        f: FName,
        /// Parameter of `f-r`, in (-1, 1).
        #[arg(long, default_value_t = 0.0)]
        r: f64,
        /// Norm exponent: 1, 2 or inf.
        #[arg(long, default_value = "2")]
        p: String,
    },
    /// Past-set limits along a sequence approaching a point; writes `ip_report.json`.
    Ip {
        space: PathBuf,
        /// Coordinates the sequence approaches, as `t,x,...`.
        #[arg(long, value_delimiter = ',', required = true)]
        target: Vec<f64>,
        #[arg(long, default_value_t = 6)]
        n_prefix: usize,
        #[arg(long, value_enum, default_value = "chrono")]
        mode: Mode,
    },
    /// Checks a config, or a space and optional sigma; writes `validate.json`.
    Validate {
        /// Experiment config to check without running it.
        #[arg(long, conflicts_with_all = ["space", "sigma"], required_unless_present = "space")]
        config: Option<PathBuf>,
        #[arg(long)]
        space: Option<PathBuf>,
        /// LORMAT01 sigma matrix to check against the space.
        #[arg(long, requires = "space")]
        sigma: Option<PathBuf>,
    },
    /// Relative errors of one sigma against a reference; writes `sigma_compare.csv` and `.json`.
    Compare {
        space: PathBuf,
        /// LORMAT01 sigma matrix under test.
        sigma: PathBuf,
        /// LORMAT01 reference sigma matrix.
        reference: PathBuf,
        /// Smallest open-interior count of a compared pair.
        #[arg(long, default_value_t = 100)]
        min_count: usize,
    },
    /// Runs an experiment config, or reruns a manifest and checks its hashes.
    Run {
        #[arg(required_unless_present = "manifest", conflicts_with = "manifest")]
        config: Option<PathBuf>,
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use ordgeo::Error as E;
    if let Some(cmd::Mismatch(_)) = err.downcast_ref::<cmd::Mismatch>() {
        return EXIT_MISMATCH;
    }
    if err.downcast_ref::<cmd::Usage>().is_some() {
        return EXIT_CONFIG;
    }
    match err.downcast_ref::<E>() {
        Some(E::Config { .. } | E::Format(_) | E::Json(_) | E::DanglingId(_) | E::DuplicateId(_) | E::NotPartialOrder { .. }) => EXIT_CONFIG,
        Some(E::InvalidArgument(_) | E::InvalidModel(_)) => EXIT_CONFIG,
        Some(E::MissingStage { .. }) => EXIT_MISSING_STAGE,
        Some(E::Write { .. }) => EXIT_WRITE,
        _ => EXIT_RUNTIME,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.global.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).target(env_logger::Target::Stderr).init();
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_RUNTIME);
        }
    }
    match cmd::run(&cli) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
