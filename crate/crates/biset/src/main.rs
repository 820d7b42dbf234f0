//! Thin command-line front end; all work happens in the library.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use biset::cli::{
    self, CliError, DetectCmd, GenerateCmd, IdentityCmd, MetricSpec, MinorsCmd, MotionsCmd,
    OutputFormat, Outcome, PdeCase, PdeCmd, RankCmd, RecoverCmd, SweepOpts,
};
use biset::geometry::OneVarFn;
use biset::sampling::CoordRange;

#[derive(Parser)]
#[command(
    name = "biset",
    about = "Phenomenologically symmetric two-set geometry of rank (3,2): \
             identity sweeps, functional-matrix ranks, minor relations, the \
             motion group, closed-form solution checks, and coordinate \
             recovery from measurement tables",
    version
)]
struct App {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct MetricArgs {
    /// `canonical` or an expression in x, xi, eta (e.g. "x*xi + eta")
    #[arg(long)]
    metric: Option<String>,
    /// Closed general form: chi=NAME,phi=NAME,psi1=NAME,psi2=NAME
    #[arg(long, conflicts_with = "metric")]
    metric_general: Option<String>,
    /// JSON config file supplying defaults for --metric and sweep flags
    #[arg(long)]
    config: Option<String>,
}

#[derive(Args, Clone)]
struct SweepArgs {
    /// Number of random corteges / probe points
    #[arg(long)]
    samples: Option<usize>,
    /// Seed for all randomness in this command
    #[arg(long)]
    seed: Option<u64>,
    /// Pass/fail tolerance on normalized residuals
    #[arg(long)]
    tol: Option<f64>,
    /// Coordinate band MIN:MAX, drawn from +/-[MIN, MAX]
    #[arg(long)]
    range: Option<CoordRange>,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum FormatArg {
    Json,
    Csv,
    Text,
}

impl From<FormatArg> for OutputFormat {
    fn from(f: FormatArg) -> OutputFormat {
        match f {
            FormatArg::Json => OutputFormat::Json,
            FormatArg::Csv => OutputFormat::Csv,
            FormatArg::Text => OutputFormat::Text,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sweep the six-value determinant law and the two minor relations
    Identity {
        #[command(flatten)]
        metric: MetricArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
    /// Ranks and singular values of the 7x6 functional matrix
    Rank {
        #[command(flatten)]
        metric: MetricArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
    /// Residuals of the minor relations and the product-expansion identity
    Minors {
        #[command(flatten)]
        metric: MetricArgs,
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
    /// Apply motions and verify the group laws and metric invariance
    Motions {
        /// Motion parameters a,b
        #[arg(long, value_parser = parse_pair)]
        apply: Option<(f64, f64)>,
        /// Point x,xi,eta the motion acts on
        #[arg(long, value_parser = parse_triple)]
        point: Option<(f64, f64, f64)>,
        /// Randomized sweep size for the group-law checks
        #[arg(long)]
        verify: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
    /// Verify the closed-form solution families and their canonical changes
    Pde {
        /// Which family: a0 or anonzero
        #[arg(long)]
        case: PdeCaseArg,
        /// Outer scaling function
        #[arg(long, default_value = "id")]
        chi: OneVarFn,
        /// phi(eta) of the anonzero family
        #[arg(long, default_value = "const(1)")]
        phi: OneVarFn,
        /// psi(eta) of the anonzero family
        #[arg(long, default_value = "id")]
        psi: OneVarFn,
        /// sigma(eta) coefficient of the anonzero system
        #[arg(long, default_value = "const(0)")]
        sigma: OneVarFn,
        /// tau(eta) coefficient of the anonzero system
        #[arg(long, default_value = "const(1)")]
        tau: OneVarFn,
        #[command(flatten)]
        sweep: SweepArgs,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
    /// Emit a synthetic measurement table as CSV
    Generate {
        #[arg(long)]
        p: usize,
        #[arg(long)]
        q: usize,
        /// Gaussian noise standard deviation
        #[arg(long, default_value_t = 0.0)]
        noise: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "0.1:2")]
        range: CoordRange,
        /// Write CSV here instead of stdout
        #[arg(long)]
        output: Option<String>,
    },
    /// Decide whether a table is consistent with the rank-(3,2) symmetry
    Detect {
        /// CSV table (or JSON when the path ends in .json)
        #[arg(long)]
        input: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        /// Seed for cortege sampling above the enumeration cap
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
    /// Recover hidden coordinates from a table, up to the motion gauge
    Recover {
        /// CSV table (or JSON when the path ends in .json)
        #[arg(long)]
        input: String,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, value_enum, default_value = "json")]
        format: FormatArg,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum PdeCaseArg {
    A0,
    Anonzero,
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected a,b, got `{s}`"));
    }
    Ok((
        parts[0].trim().parse().map_err(|e| format!("{e}"))?,
        parts[1].trim().parse().map_err(|e| format!("{e}"))?,
    ))
}

fn parse_triple(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(format!("expected x,xi,eta, got `{s}`"));
    }
    Ok((
        parts[0].trim().parse().map_err(|e| format!("{e}"))?,
        parts[1].trim().parse().map_err(|e| format!("{e}"))?,
        parts[2].trim().parse().map_err(|e| format!("{e}"))?,
    ))
}

/// Resolves the metric spec and sweep options from flags plus an optional
/// config file; explicit flags win.
fn resolve(
    metric: &MetricArgs,
    sweep: &SweepArgs,
) -> Result<(MetricSpec, SweepOpts), CliError> {
    let config = match &metric.config {
        Some(path) => cli::load_config(path)?,
        None => Default::default(),
    };
    let spec = if let Some(general) = &metric.metric_general {
        MetricSpec::parse_general(general)?
    } else if let Some(m) = &metric.metric {
        MetricSpec::parse_flag(m)
    } else if let Some(general) = &config.metric_general {
        MetricSpec::parse_general(general)?
    } else if let Some(m) = &config.metric {
        MetricSpec::parse_flag(m)
    } else {
        return Err(CliError::Usage(
            "no metric given: use --metric, --metric-general or a config file".into(),
        ));
    };
    let defaults = SweepOpts::default();
    let range = match (&sweep.range, &config.range) {
        (Some(r), _) => *r,
        (None, Some(text)) => text
            .parse()
            .map_err(|e: String| CliError::Config(e))?,
        (None, None) => defaults.range,
    };
    let opts = SweepOpts {
        samples: sweep.samples.or(config.samples).unwrap_or(defaults.samples),
        seed: sweep.seed.or(config.seed).unwrap_or(defaults.seed),
        tol: sweep.tol.or(config.tol).unwrap_or(defaults.tol),
        range,
    };
    Ok((spec, opts))
}

fn sweep_only(sweep: &SweepArgs, default_samples: usize) -> SweepOpts {
    let defaults = SweepOpts::default();
    SweepOpts {
        samples: sweep.samples.unwrap_or(default_samples),
        seed: sweep.seed.unwrap_or(defaults.seed),
        tol: sweep.tol.unwrap_or(defaults.tol),
        range: sweep.range.unwrap_or(defaults.range),
    }
}

fn configure_threads() {
    if let Ok(text) = std::env::var("BISET_THREADS") {
        if let Ok(n) = text.parse::<usize>() {
            if n >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

fn run_app(app: App) -> Result<Outcome, CliError> {
    match app.command {
        Command::Identity {
            metric,
            sweep,
            format,
        } => {
            let (spec, opts) = resolve(&metric, &sweep)?;
            cli::run_identity(&IdentityCmd {
                metric: spec,
                opts,
                format: format.into(),
            })
        }
        Command::Rank {
            metric,
            sweep,
            format,
        } => {
            let (spec, opts) = resolve(&metric, &sweep)?;
            cli::run_rank(&RankCmd {
                metric: spec,
                opts,
                format: format.into(),
            })
        }
        Command::Minors {
            metric,
            sweep,
            format,
        } => {
            let (spec, opts) = resolve(&metric, &sweep)?;
            cli::run_minors(&MinorsCmd {
                metric: spec,
                opts,
                format: format.into(),
            })
        }
        Command::Motions {
            apply,
            point,
            verify,
            seed,
            tol,
            format,
        } => cli::run_motions(&MotionsCmd {
            apply,
            point,
            verify,
            seed,
            tol,
            format: format.into(),
        }),
        Command::Pde {
            case,
            chi,
            phi,
            psi,
            sigma,
            tau,
            sweep,
            format,
        } => {
            let case = match case {
                PdeCaseArg::A0 => PdeCase::A0,
                PdeCaseArg::Anonzero => PdeCase::Anonzero,
            };
            cli::run_pde(&PdeCmd {
                case,
                chi,
                phi,
                psi,
                sigma,
                tau,
                opts: sweep_only(&sweep, 500),
                format: format.into(),
            })
        }
        Command::Generate {
            p,
            q,
            noise,
            seed,
            range,
            output,
        } => {
            let outcome = cli::run_generate(&GenerateCmd {
                p,
                q,
                noise,
                seed,
                range,
            })?;
            match output {
                Some(path) => {
                    std::fs::write(&path, &outcome.stdout).map_err(|source| CliError::Io {
                        path,
                        source,
                    })?;
                    Ok(Outcome {
                        stdout: String::new(),
                        verdict: None,
                    })
                }
                None => Ok(outcome),
            }
        }
        Command::Detect {
            input,
            tol,
            seed,
            format,
        } => {
            let table = cli::load_table(&input)?;
            cli::run_detect(&DetectCmd {
                input,
                table,
                tol,
                seed,
                format: format.into(),
            })
        }
        Command::Recover { input, tol, format } => {
            let table = cli::load_table(&input)?;
            cli::run_recover(&RecoverCmd {
                input,
                table,
                tol,
                format: format.into(),
            })
        }
    }
}

fn main() -> ExitCode {
    configure_threads();
    let app = App::parse();
    match run_app(app) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}
