//! Command-line front end: correlation tables, block distributions, entropy
//! curves, scaling fits, field sweeps, and the phase boundary, emitted as
//! CSV, structured JSON, or SVG figures.

mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use xy_entropy::scan::fit_at_point;
use xy_entropy::{
    diag_distribution, find_boundary, grid_scan, ising_scan, oracle, sweep, BoundaryPoint,
    CorrelationTable, EntropyCurve, Error, ModelParams, SweepConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    /// Comma-separated values with a header row.
    Csv,
    /// A single structured (JSON) object.
    Structured,
    /// A static SVG figure (entropy, sweep, ising, grid, boundary).
    Svg,
}

#[derive(Debug, Parser)]
#[command(
    name = "xy-entropy",
    version,
    about = "Diagonal-entropy scaling and phase detection for the infinite XY chain"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output file; written atomically (temp file + rename). Default: stdout.
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Absolute tolerance for the correlation-kernel quadrature.
    #[arg(long, global = true, default_value_t = 1e-12)]
    quad_tol: f64,

    /// Worker threads for sweeps. Default: the XY_ENTROPY_THREADS environment
    /// variable, else all cores. Results are identical for any thread count.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Debug, Args)]
struct PointArgs {
    /// Anisotropy of the in-plane couplings.
    #[arg(long, allow_hyphen_values = true)]
    gamma: f64,
    /// Transverse field.
    #[arg(long, allow_hyphen_values = true)]
    lambda: f64,
}

#[derive(Debug, Args)]
struct RangeArgs {
    /// Lower end of the field range.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    lambda_min: f64,
    /// Upper end of the field range.
    #[arg(long, default_value_t = 1.5, allow_hyphen_values = true)]
    lambda_max: f64,
    /// Number of grid points.
    #[arg(long, default_value_t = 151)]
    steps: usize,
    /// Largest block length entering each scaling fit.
    #[arg(long, default_value_t = 14)]
    lmax: usize,
    /// Smallest block length entering each scaling fit.
    #[arg(long, default_value_t = 1)]
    lmin: usize,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Correlation-kernel table g_l for |l| <= lmax.
    Gtable {
        #[command(flatten)]
        point: PointArgs,
        /// Largest |l| in the table.
        #[arg(long, default_value_t = 17)]
        lmax: usize,
    },
    /// Diagonal probabilities of every spin string of an L-site block.
    Probs {
        #[command(flatten)]
        point: PointArgs,
        /// Block length L (2^L probabilities).
        #[arg(long)]
        block: usize,
    },
    /// Diagonal entropy, entanglement entropy, and coherence for L = 1..lmax.
    Entropy {
        #[command(flatten)]
        point: PointArgs,
        /// Largest block length.
        #[arg(long, default_value_t = 18)]
        lmax: usize,
    },
    /// Least-squares fit of the entropy curve to a*L + b*log2(L) + c.
    Fit {
        #[command(flatten)]
        point: PointArgs,
        /// Largest block length in the fit.
        #[arg(long, default_value_t = 18)]
        lmax: usize,
        /// Smallest block length in the fit.
        #[arg(long, default_value_t = 1)]
        lmin: usize,
    },
    /// Fit coefficients and their derivatives over a field grid.
    Sweep {
        /// Anisotropy of the in-plane couplings.
        #[arg(long, allow_hyphen_values = true)]
        gamma: f64,
        #[command(flatten)]
        range: RangeArgs,
    },
    /// Transverse-field Ising sweep: gamma pinned to 1.
    Ising {
        #[command(flatten)]
        range: RangeArgs,
    },
    /// Independent sweeps for several anisotropies.
    Grid {
        /// Comma-separated anisotropies, e.g. "0,0.2,0.5,0.7,1".
        #[arg(long, value_delimiter = ',')]
        gammas: Vec<f64>,
        #[command(flatten)]
        range: RangeArgs,
    },
    /// Zero of c(lambda): the boundary between the ferromagnetic phases.
    Boundary {
        /// Comma-separated anisotropies in (0, 1].
        #[arg(long, value_delimiter = ',')]
        gammas: Vec<f64>,
        /// Largest block length in the per-point fits.
        #[arg(long, default_value_t = 12)]
        lmax: usize,
        /// Lower end of the field search range.
        #[arg(long, default_value_t = 0.0)]
        search_min: f64,
        /// Upper end of the field search range (must stay below 1).
        #[arg(long, default_value_t = 0.995)]
        search_max: f64,
    },
    /// Slow reference implementations, for debugging.
    #[command(hide = true)]
    Oracle {
        #[command(flatten)]
        point: PointArgs,
        /// Kernel coefficient index for the dense-quadrature reference.
        #[arg(long, allow_hyphen_values = true)]
        l: Option<i64>,
        /// Ring size for the exact-diagonalization reference.
        #[arg(long)]
        ed_sites: Option<usize>,
        /// Block length for the exact-diagonalization reference.
        #[arg(long)]
        block: Option<usize>,
    },
}

struct StderrLog;

impl log::Log for StderrLog {
    fn enabled(&self, metadata: &log::Metadata) -> bool {
        metadata.level() <= log::Level::Warn
    }

    fn log(&self, record: &log::Record) {
        if self.enabled(record.metadata()) {
            eprintln!("{}: {}", record.level().to_string().to_lowercase(), record.args());
        }
    }

    fn flush(&self) {}
}

static LOGGER: StderrLog = StderrLog;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let _ = log::set_logger(&LOGGER);
    log::set_max_level(log::LevelFilter::Warn);

    let threads = cli.threads.or_else(|| {
        std::env::var("XY_ENTROPY_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(n) = threads {
        if let Err(err) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: could not size the thread pool: {err}");
            return ExitCode::from(1);
        }
    }

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(RunError::Usage(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
        Err(RunError::Compute(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
        Err(RunError::Io(err)) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}

enum RunError {
    Usage(String),
    Compute(Error),
    Io(std::io::Error),
}

impl From<Error> for RunError {
    fn from(err: Error) -> Self {
        RunError::Compute(err)
    }
}

impl From<std::io::Error> for RunError {
    fn from(err: std::io::Error) -> Self {
        RunError::Io(err)
    }
}

fn svg_unsupported(sub: &str) -> RunError {
    RunError::Usage(format!(
        "--format svg is not available for `{sub}`; use csv or structured"
    ))
}

fn run(cli: &Cli) -> Result<(), RunError> {
    let quad_tol = cli.quad_tol;
    let rendered: String = match &cli.command {
        Command::Gtable { point, lmax } => {
            let params = ModelParams::with_quad_tol(point.gamma, point.lambda, quad_tol)?;
            let table = CorrelationTable::build(&params, *lmax)?;
            match cli.format {
                Format::Csv => output::gtable_csv(&table),
                Format::Structured => output::gtable_json(&table),
                Format::Svg => return Err(svg_unsupported("gtable")),
            }
        }
        Command::Probs { point, block } => {
            let params = ModelParams::with_quad_tol(point.gamma, point.lambda, quad_tol)?;
            let table = CorrelationTable::build(&params, (*block).max(2) - 1)?;
            let dist = diag_distribution(&table, *block)?;
            match cli.format {
                Format::Csv => output::probs_csv(&dist),
                Format::Structured => output::probs_json(&params, &dist),
                Format::Svg => return Err(svg_unsupported("probs")),
            }
        }
        Command::Entropy { point, lmax } => {
            let params = ModelParams::with_quad_tol(point.gamma, point.lambda, quad_tol)?;
            let curve = EntropyCurve::compute(&params, *lmax)?;
            match cli.format {
                Format::Csv => output::entropy_csv(&curve),
                Format::Structured => output::entropy_json(&curve),
                Format::Svg => {
                    let fit = xy_entropy::fit_scaling(
                        curve.block_lens(),
                        curve.diagonal(),
                        (1, *lmax),
                    )?;
                    plot::entropy_figure(&curve, &fit)
                }
            }
        }
        Command::Fit { point, lmax, lmin } => {
            let fit = fit_at_point(point.gamma, point.lambda, quad_tol, *lmax, *lmin)?;
            match cli.format {
                Format::Csv => output::fit_csv(point.gamma, point.lambda, &fit),
                Format::Structured => output::fit_json(point.gamma, point.lambda, &fit),
                Format::Svg => return Err(svg_unsupported("fit")),
            }
        }
        Command::Sweep { gamma, range } => {
            let config = sweep_config(*gamma, range, quad_tol);
            let result = sweep(&config)?;
            warn_failures(&result.failures);
            match cli.format {
                Format::Csv => output::sweep_csv(&result),
                Format::Structured => output::sweep_json(&result),
                Format::Svg => plot::sweep_figure(std::slice::from_ref(&result)),
            }
        }
        Command::Ising { range } => {
            let config = sweep_config(1.0, range, quad_tol);
            let result = ising_scan(&config)?;
            warn_failures(&result.failures);
            match cli.format {
                Format::Csv => output::sweep_csv(&result),
                Format::Structured => output::sweep_json(&result),
                Format::Svg => plot::sweep_figure(std::slice::from_ref(&result)),
            }
        }
        Command::Grid { gammas, range } => {
            if gammas.is_empty() {
                return Err(RunError::Usage("--gammas needs at least one value".into()));
            }
            let template = sweep_config(0.0, range, quad_tol);
            let outcomes = grid_scan(gammas, &template);
            let mut results = Vec::new();
            for (gamma, outcome) in outcomes {
                match outcome {
                    Ok(result) => {
                        warn_failures(&result.failures);
                        results.push(result);
                    }
                    Err(err) => log::warn!("sweep for gamma={gamma} failed: {err}"),
                }
            }
            if results.is_empty() {
                return Err(RunError::Compute(Error::SweepEmpty {
                    first: "every anisotropy failed".into(),
                }));
            }
            match cli.format {
                Format::Csv => output::grid_csv(&results),
                Format::Structured => output::grid_json(&results),
                Format::Svg => plot::sweep_figure(&results),
            }
        }
        Command::Boundary {
            gammas,
            lmax,
            search_min,
            search_max,
        } => {
            if gammas.is_empty() {
                return Err(RunError::Usage("--gammas needs at least one value".into()));
            }
            let mut points: Vec<BoundaryPoint<f64>> = Vec::new();
            for &gamma in gammas {
                match find_boundary(gamma, *lmax, (*search_min, *search_max), quad_tol) {
                    Ok(point) => points.push(point),
                    Err(err) => log::warn!("no boundary for gamma={gamma}: {err}"),
                }
            }
            if points.is_empty() {
                return Err(RunError::Compute(Error::SweepEmpty {
                    first: "no boundary point found for any anisotropy".into(),
                }));
            }
            points.sort_by(|a, b| a.gamma.partial_cmp(&b.gamma).unwrap());
            match cli.format {
                Format::Csv => output::boundary_csv(&points),
                Format::Structured => output::boundary_json(&points),
                Format::Svg => plot::boundary_figure(&points),
            }
        }
        Command::Oracle {
            point,
            l,
            ed_sites,
            block,
        } => {
            let params = ModelParams::with_quad_tol(point.gamma, point.lambda, quad_tol)?;
            if cli.format == Format::Svg {
                return Err(svg_unsupported("oracle"));
            }
            match (l, ed_sites, block) {
                (Some(l), None, None) => {
                    let value = oracle::dense_quadrature(&params, *l);
                    output::oracle_kernel_csv(*l, value)
                }
                (None, Some(sites), Some(block)) => {
                    let spec = oracle::FiniteChainSpec::new(*sites, point.gamma, point.lambda)?;
                    let ed = oracle::ed_ground_state(&spec, *block)?;
                    output::oracle_ed_csv(&ed, *block)
                }
                _ => {
                    return Err(RunError::Usage(
                        "oracle needs either --l or both --ed-sites and --block".into(),
                    ))
                }
            }
        }
    };
    output::write_atomic(cli.output.as_deref(), &rendered)?;
    Ok(())
}

fn sweep_config(gamma: f64, range: &RangeArgs, quad_tol: f64) -> SweepConfig<f64> {
    SweepConfig {
        gamma,
        lambda_lo: range.lambda_min,
        lambda_hi: range.lambda_max,
        steps: range.steps,
        block_len_max: range.lmax,
        fit_block_min: range.lmin,
        quad_tol,
    }
}

fn warn_failures(failures: &[xy_entropy::scan::SweepFailure]) {
    for failure in failures {
        log::warn!(
            "grid point {} (lambda={}) failed: {}",
            failure.index,
            failure.lambda,
            failure.message
        );
    }
}
