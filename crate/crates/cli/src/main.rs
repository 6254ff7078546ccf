//! `anderson-lab`: reproducible spectral experiments for higher-rank lattice
//! Anderson models.

mod commands;
mod config;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::{RunConfig, SCHEMA_VERSION};

#[derive(Parser)]
#[command(
    name = "anderson-lab",
    version,
    about = "Spectral statistics of higher-rank lattice Anderson models",
    long_about = "Builds finite-volume block Anderson Hamiltonians, runs seeded Monte Carlo \
                  experiments on their eigenvalue statistics and writes JSON/CSV reports. \
                  Identical configurations produce byte-identical outputs regardless of the \
                  worker-thread count."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Spatial dimension.
    #[arg(long, default_value_t = 1)]
    d: usize,
    /// Cube side (sites per edge); must be a multiple of the block side.
    #[arg(long = "L", default_value_t = 16)]
    l: usize,
    /// Block side; the projection rank is r^d.
    #[arg(long, default_value_t = 2)]
    r: usize,
    /// Boundary condition: simple, dirichlet or neumann.
    #[arg(long, default_value = "simple")]
    bc: String,
    /// Coupling density: uniform or linear:<slope>.
    #[arg(long, default_value = "uniform")]
    density: String,
    /// Master seed; all substreams derive from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo trials.
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: String,
    /// Worker-thread hint (execution-only; results do not depend on it).
    /// Defaults to the ANDERSON_LAB_THREADS environment variable.
    #[arg(long)]
    threads: Option<usize>,
}

fn parse_window(text: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got {text:?}"))?;
    let lo: f64 = lo.parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi: f64 = hi.parse().map_err(|e| format!("bad upper bound: {e}"))?;
    Ok((lo, hi))
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalues of one Hamiltonian, optionally checked against the
    /// closed-form Dirichlet/Neumann spectra.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        /// Block couplings (defaults to the free operator).
        #[arg(long, value_delimiter = ',')]
        omega: Option<Vec<f64>>,
        /// Compare against the closed-form spectrum (Dirichlet/Neumann only).
        #[arg(long)]
        check_analytic: bool,
        /// Also dump the dense matrix as CSV.
        #[arg(long)]
        dump_matrix: bool,
    },
    /// Expected count and hit probability over a grid of interval widths.
    Wegner {
        #[command(flatten)]
        common: CommonArgs,
        /// Interval center.
        #[arg(long)]
        center: f64,
        /// Interval widths, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        widths: Vec<f64>,
    },
    /// Probability of m+1 eigenvalues in an interval, over a width grid.
    Minami {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        center: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        widths: Vec<f64>,
    },
    /// Level-spacing tail probabilities over a band-edge window.
    Evls {
        #[command(flatten)]
        common: CommonArgs,
        /// Band-edge window half-width E (< 1 - cos(pi/r)).
        #[arg(long = "E")]
        e: f64,
        /// Spacing thresholds, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        deltas: Vec<f64>,
    },
    /// Probability of two eigenvalues in width-delta edge subintervals.
    Weakminami {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "E")]
        e: f64,
        #[arg(long, value_delimiter = ',', required = true)]
        deltas: Vec<f64>,
    },
    /// Degeneracy-splitting search with a verifiable certificate.
    Split {
        #[command(flatten)]
        common: CommonArgs,
        /// Search radius epsilon in (0, 1/12).
        #[arg(long)]
        epsilon: f64,
        /// Objective evaluations per stage.
        #[arg(long, default_value_t = 500)]
        budget: u64,
        /// Instance factory (degenerate-d2) instead of --omega/--interval.
        #[arg(long)]
        factory: Option<String>,
        /// Factory instance index.
        #[arg(long)]
        instance: Option<u64>,
        /// Explicit block couplings.
        #[arg(long, value_delimiter = ',')]
        omega: Option<Vec<f64>>,
        /// Cluster window lo:hi (with --omega).
        #[arg(long, value_parser = parse_window)]
        interval: Option<(f64, f64)>,
    },
    /// Local eigenvalue statistics: Poisson goodness of fit, point export,
    /// subcube-superposition proximity, or pipeline calibration.
    Les {
        #[command(flatten)]
        common: CommonArgs,
        /// Reference energy.
        #[arg(long = "E")]
        e: Option<f64>,
        /// Counting windows lo:hi in rescaled units (default 0:1,0:2,-2:2).
        #[arg(long, value_delimiter = ',', value_parser = parse_window)]
        windows: Option<Vec<(f64, f64)>>,
        /// Subcube side for the superposed process.
        #[arg(long)]
        ell: Option<usize>,
        /// Run the synthetic-Poisson calibration instead of an ensemble.
        #[arg(long)]
        calibrate: bool,
        /// Calibration intensity per unit length.
        #[arg(long)]
        lambda: Option<f64>,
        /// Calibration repetitions.
        #[arg(long)]
        reps: Option<usize>,
    },
    /// Execute a RunConfig JSON file.
    Run {
        /// Path to the configuration file.
        #[arg(long)]
        config: String,
        /// Worker-thread hint overriding the file.
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn base_config(command: &str, common: &CommonArgs) -> RunConfig {
    RunConfig {
        schema_version: SCHEMA_VERSION,
        command: command.to_string(),
        d: common.d,
        l: common.l,
        r: common.r,
        bc: common.bc.clone(),
        density: common.density.clone(),
        seed: common.seed,
        trials: common.trials,
        omega: None,
        center: None,
        widths: None,
        e: None,
        deltas: None,
        ell: None,
        windows: None,
        epsilon: None,
        budget: None,
        factory: None,
        instance: None,
        interval: None,
        check_analytic: false,
        dump_matrix: false,
        calibrate: false,
        lambda: None,
        reps: None,
        out_dir: common.out.clone(),
        threads: common.threads,
    }
}

fn build_config(command: Command) -> Result<RunConfig, String> {
    Ok(match command {
        Command::Spectrum {
            common,
            omega,
            check_analytic,
            dump_matrix,
        } => {
            let mut cfg = base_config("spectrum", &common);
            cfg.omega = omega;
            cfg.check_analytic = check_analytic;
            cfg.dump_matrix = dump_matrix;
            cfg
        }
        Command::Wegner {
            common,
            center,
            widths,
        } => {
            let mut cfg = base_config("wegner", &common);
            cfg.center = Some(center);
            cfg.widths = Some(widths);
            cfg
        }
        Command::Minami {
            common,
            center,
            widths,
        } => {
            let mut cfg = base_config("minami", &common);
            cfg.center = Some(center);
            cfg.widths = Some(widths);
            cfg
        }
        Command::Evls { common, e, deltas } => {
            let mut cfg = base_config("evls", &common);
            cfg.e = Some(e);
            cfg.deltas = Some(deltas);
            cfg
        }
        Command::Weakminami { common, e, deltas } => {
            let mut cfg = base_config("weakminami", &common);
            cfg.e = Some(e);
            cfg.deltas = Some(deltas);
            cfg
        }
        Command::Split {
            common,
            epsilon,
            budget,
            factory,
            instance,
            omega,
            interval,
        } => {
            let mut cfg = base_config("split", &common);
            cfg.epsilon = Some(epsilon);
            cfg.budget = Some(budget);
            cfg.factory = factory;
            cfg.instance = instance;
            cfg.omega = omega;
            cfg.interval = interval;
            cfg
        }
        Command::Les {
            common,
            e,
            windows,
            ell,
            calibrate,
            lambda,
            reps,
        } => {
            let mut cfg = base_config("les", &common);
            cfg.e = e;
            cfg.windows = windows;
            cfg.ell = ell;
            cfg.calibrate = calibrate;
            cfg.lambda = lambda;
            cfg.reps = reps;
            cfg
        }
        Command::Run { config, threads } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| format!("cannot read {config}: {e}"))?;
            let mut cfg: RunConfig =
                serde_json::from_str(&text).map_err(|e| format!("bad config: {e}"))?;
            if threads.is_some() {
                cfg.threads = threads;
            }
            cfg
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = match build_config(cli.command) {
        Ok(config) => config,
        Err(message) => {
            eprintln!("error: {message}");
            return ExitCode::from(commands::EXIT_VALIDATION as u8);
        }
    };
    let threads = config.threads.or_else(|| {
        std::env::var("ANDERSON_LAB_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    let code = match threads {
        Some(n) if n > 0 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("thread pool");
            pool.install(|| commands::execute(&config))
        }
        _ => commands::execute(&config),
    };
    ExitCode::from(code as u8)
}
