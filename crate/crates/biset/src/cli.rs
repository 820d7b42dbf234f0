//! Command implementations behind the `biset` binary.
//!
//! Every command is a plain struct, every run is a pure function from the
//! command to a rendered report plus a verdict, and identical commands
//! produce byte-identical reports. The binary only parses flags into these
//! structs and maps the outcome to exit codes: 0 when the verdict passes,
//! 1 when it fails, 2 on usage or input errors.

use serde::Serialize;
use thiserror::Error;

use crate::geometry::{
    general_form_metric, CatalogParseError, GeometryError, MetricFunction, OneVarFn, TwoVarFn,
};
use crate::motions::{Motion, MotionError};
use crate::pdecheck::{
    case_a0_solution, case_anonzero_solution, equivalence_to_canonical, linear_system_residual,
    reduced_triple_a0, system15_residual, CoordinateChange, PdeError,
};
use crate::recovery::{
    detect_ps_with_seed, generate_table, recover_coordinates, GaugeRecord, MeasurementTable,
    RecoveryError, TableError,
};
use crate::sampling::{sample_cortege, sample_motion, sample_triple, seeded_rng, CoordRange};
use crate::scalar::DomainError;
use crate::symmetry::{
    build_functional_matrix, metric_ps_values, minor_product_identity_normalized,
    ps_residual_normalized, relations6_normalized,
};
use crate::{expr, linalg};

pub const REPORT_SCHEMA: &str = "biset-report/v1";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("could not read `{path}`: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error(transparent)]
    Expr(#[from] expr::ParseError),
    #[error(transparent)]
    Catalog(#[from] CatalogParseError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Motion(#[from] MotionError),
    #[error(transparent)]
    Pde(#[from] PdeError),
    #[error(transparent)]
    Recovery(#[from] RecoveryError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("config error: {0}")]
    Config(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Json,
    Csv,
    Text,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "json" => Ok(OutputFormat::Json),
            "csv" => Ok(OutputFormat::Csv),
            "text" => Ok(OutputFormat::Text),
            other => Err(format!("unknown format `{other}` (json, csv, text)")),
        }
    }
}

/// Flags shared by the sweep-style commands.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOpts {
    pub samples: usize,
    pub seed: u64,
    pub tol: f64,
    pub range: CoordRange,
}

impl Default for SweepOpts {
    fn default() -> Self {
        SweepOpts {
            samples: 1000,
            seed: 0,
            tol: 1e-9,
            range: CoordRange::default(),
        }
    }
}

/// How the metric function is specified on the command line.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricSpec {
    Canonical,
    Expression(String),
    General {
        chi: String,
        phi: String,
        psi1: String,
        psi2: String,
    },
}

impl MetricSpec {
    pub fn parse_flag(metric: &str) -> MetricSpec {
        if metric == "canonical" {
            MetricSpec::Canonical
        } else {
            MetricSpec::Expression(metric.to_string())
        }
    }

    /// Parses the comma-separated `chi=..,phi=..,psi1=..,psi2=..` form.
    /// Splits on commas outside parentheses so `affine(2,1)` stays whole.
    pub fn parse_general(spec: &str) -> Result<MetricSpec, CliError> {
        let mut chi = None;
        let mut phi = None;
        let mut psi1 = None;
        let mut psi2 = None;
        let mut depth = 0usize;
        let mut start = 0usize;
        let mut parts = Vec::new();
        for (i, c) in spec.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => depth = depth.saturating_sub(1),
                ',' if depth == 0 => {
                    parts.push(&spec[start..i]);
                    start = i + 1;
                }
                _ => {}
            }
        }
        parts.push(&spec[start..]);
        for part in parts {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("expected key=value, got `{part}`")))?;
            match key.trim() {
                "chi" => chi = Some(value.trim().to_string()),
                "phi" => phi = Some(value.trim().to_string()),
                "psi1" => psi1 = Some(value.trim().to_string()),
                "psi2" => psi2 = Some(value.trim().to_string()),
                other => {
                    return Err(CliError::Usage(format!(
                        "unknown general-form key `{other}`"
                    )))
                }
            }
        }
        match (chi, phi, psi1, psi2) {
            (Some(chi), Some(phi), Some(psi1), Some(psi2)) => Ok(MetricSpec::General {
                chi,
                phi,
                psi1,
                psi2,
            }),
            _ => Err(CliError::Usage(
                "general form needs chi=, phi=, psi1= and psi2=".into(),
            )),
        }
    }

    pub fn build(&self) -> Result<MetricFunction, CliError> {
        match self {
            MetricSpec::Canonical => Ok(MetricFunction::Canonical),
            MetricSpec::Expression(src) => {
                Ok(MetricFunction::from(expr::parse_metric_expr(src)?))
            }
            MetricSpec::General {
                chi,
                phi,
                psi1,
                psi2,
            } => {
                let chi: OneVarFn = chi.parse()?;
                let phi: OneVarFn = phi.parse()?;
                let psi1: TwoVarFn = psi1.parse()?;
                let psi2: TwoVarFn = psi2.parse()?;
                Ok(general_form_metric(chi, phi, psi1, psi2)?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualStats {
    pub max_abs: f64,
    pub median_abs: f64,
}

impl ResidualStats {
    pub fn from_abs(values: &mut [f64]) -> ResidualStats {
        values.sort_by(f64::total_cmp);
        let n = values.len();
        if n == 0 {
            return ResidualStats {
                max_abs: 0.0,
                median_abs: 0.0,
            };
        }
        let median_abs = if n % 2 == 1 {
            values[n / 2]
        } else {
            0.5 * (values[n / 2 - 1] + values[n / 2])
        };
        ResidualStats {
            max_abs: values[n - 1],
            median_abs,
        }
    }
}

/// Rendered output plus the verdict that drives the exit code.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub stdout: String,
    pub verdict: Option<bool>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Some(false) => 1,
            _ => 0,
        }
    }
}

fn flatten_json(prefix: &str, value: &serde_json::Value, rows: &mut Vec<(String, String)>) {
    match value {
        serde_json::Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                flatten_json(&key, v, rows);
            }
        }
        serde_json::Value::Array(items) => {
            let joined = items
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(";");
            rows.push((prefix.to_string(), joined));
        }
        other => rows.push((prefix.to_string(), other.to_string())),
    }
}

fn render<T: Serialize>(report: &T, format: OutputFormat) -> String {
    let value = serde_json::to_value(report).expect("report serializes");
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(&value).expect("report serializes");
            s.push('\n');
            s
        }
        OutputFormat::Csv => {
            let mut rows = Vec::new();
            flatten_json("", &value, &mut rows);
            let mut out = String::from("key,value\n");
            for (k, v) in rows {
                out.push_str(&format!("{k},{v}\n"));
            }
            out
        }
        OutputFormat::Text => {
            let mut rows = Vec::new();
            flatten_json("", &value, &mut rows);
            let mut out = String::new();
            for (k, v) in rows {
                out.push_str(&format!("{k}: {v}\n"));
            }
            out
        }
    }
}

// ---------------------------------------------------------------------------
// identity

#[derive(Debug, Serialize)]
struct IdentityReport {
    schema: &'static str,
    command: &'static str,
    metric: String,
    samples: usize,
    seed: u64,
    tol: f64,
    range: String,
    /// Whether values were unscaled by the inverse of the general-form chi
    /// before the determinant law was evaluated.
    unscaled_by_chi: bool,
    ps: ResidualStats,
    relation_first: ResidualStats,
    relation_second: ResidualStats,
    verdict: bool,
}

pub struct IdentityCmd {
    pub metric: MetricSpec,
    pub opts: SweepOpts,
    pub format: OutputFormat,
}

pub fn run_identity(cmd: &IdentityCmd) -> Result<Outcome, CliError> {
    let f = cmd.metric.build()?;
    let mut rng = seeded_rng(cmd.opts.seed);
    let unscale = f.as_general().map(|g| g.chi).filter(|chi| *chi != OneVarFn::Identity);
    let mut ps = Vec::with_capacity(cmd.opts.samples);
    let mut rel1 = Vec::with_capacity(cmd.opts.samples);
    let mut rel2 = Vec::with_capacity(cmd.opts.samples);
    for _ in 0..cmd.opts.samples {
        let c = sample_cortege(&mut rng, &cmd.opts.range);
        let mut values = metric_ps_values(&f, &c)?;
        if let Some(chi) = &unscale {
            for v in &mut values {
                *v = chi.inverse_value(*v)?;
            }
        }
        ps.push(
            ps_residual_normalized(
                values[0], values[1], values[2], values[3], values[4], values[5],
            )
            .abs(),
        );
        let (r1, r2) = relations6_normalized(&f, &c)?;
        rel1.push(r1.abs());
        rel2.push(r2.abs());
    }
    let ps = ResidualStats::from_abs(&mut ps);
    let rel1 = ResidualStats::from_abs(&mut rel1);
    let rel2 = ResidualStats::from_abs(&mut rel2);
    let verdict =
        ps.max_abs <= cmd.opts.tol && rel1.max_abs <= cmd.opts.tol && rel2.max_abs <= cmd.opts.tol;
    let report = IdentityReport {
        schema: REPORT_SCHEMA,
        command: "identity",
        metric: f.to_string(),
        samples: cmd.opts.samples,
        seed: cmd.opts.seed,
        tol: cmd.opts.tol,
        range: cmd.opts.range.to_string(),
        unscaled_by_chi: unscale.is_some(),
        ps,
        relation_first: rel1,
        relation_second: rel2,
        verdict,
    };
    Ok(Outcome {
        stdout: render(&report, cmd.format),
        verdict: Some(verdict),
    })
}

// ---------------------------------------------------------------------------
// rank

#[derive(Debug, Serialize)]
struct RankReport {
    schema: &'static str,
    command: &'static str,
    metric: String,
    samples: usize,
    seed: u64,
    tol: f64,
    range: String,
    /// (rank, occurrences), ascending by rank.
    rank_histogram: Vec<(usize, usize)>,
    max_rank: usize,
    /// Singular values of the functional matrix at the first sampled cortege.
    singular_values_first: Vec<f64>,
    verdict: bool,
}

pub struct RankCmd {
    pub metric: MetricSpec,
    pub opts: SweepOpts,
    pub format: OutputFormat,
}

pub fn run_rank(cmd: &RankCmd) -> Result<Outcome, CliError> {
    let f = cmd.metric.build()?;
    let mut rng = seeded_rng(cmd.opts.seed);
    let mut counts = std::collections::BTreeMap::new();
    let mut first_sv = Vec::new();
    for sample in 0..cmd.opts.samples {
        let c = sample_cortege(&mut rng, &cmd.opts.range);
        let m = build_functional_matrix(&f, &c)?;
        let dm = m.to_dmatrix();
        if sample == 0 {
            first_sv = linalg::singular_values(&dm);
        }
        let rank = crate::symmetry::numeric_rank(&dm, cmd.opts.tol);
        *counts.entry(rank).or_insert(0usize) += 1;
    }
    let max_rank = counts.keys().max().copied().unwrap_or(0);
    let verdict = max_rank <= 5;
    let report = RankReport {
        schema: REPORT_SCHEMA,
        command: "rank",
        metric: f.to_string(),
        samples: cmd.opts.samples,
        seed: cmd.opts.seed,
        tol: cmd.opts.tol,
        range: cmd.opts.range.to_string(),
        rank_histogram: counts.into_iter().collect(),
        max_rank,
        singular_values_first: first_sv,
        verdict,
    };
    Ok(Outcome {
        stdout: render(&report, cmd.format),
        verdict: Some(verdict),
    })
}

// ---------------------------------------------------------------------------
// minors

#[derive(Debug, Serialize)]
struct MinorsReport {
    schema: &'static str,
    command: &'static str,
    metric: String,
    samples: usize,
    seed: u64,
    tol: f64,
    range: String,
    relation_first: ResidualStats,
    relation_second: ResidualStats,
    product_identity: ResidualStats,
    relations_hold: bool,
    product_identity_holds: bool,
    verdict: bool,
}

pub struct MinorsCmd {
    pub metric: MetricSpec,
    pub opts: SweepOpts,
    pub format: OutputFormat,
}

pub fn run_minors(cmd: &MinorsCmd) -> Result<Outcome, CliError> {
    let f = cmd.metric.build()?;
    let mut rng = seeded_rng(cmd.opts.seed);
    let mut rel1 = Vec::with_capacity(cmd.opts.samples);
    let mut rel2 = Vec::with_capacity(cmd.opts.samples);
    let mut product = Vec::with_capacity(cmd.opts.samples);
    for _ in 0..cmd.opts.samples {
        let c = sample_cortege(&mut rng, &cmd.opts.range);
        let (r1, r2) = relations6_normalized(&f, &c)?;
        rel1.push(r1.abs());
        rel2.push(r2.abs());
        product.push(minor_product_identity_normalized(&f, &c)?.abs());
    }
    let rel1 = ResidualStats::from_abs(&mut rel1);
    let rel2 = ResidualStats::from_abs(&mut rel2);
    let product = ResidualStats::from_abs(&mut product);
    let relations_hold = rel1.max_abs <= cmd.opts.tol && rel2.max_abs <= cmd.opts.tol;
    let product_identity_holds = product.max_abs <= cmd.opts.tol;
    let verdict = relations_hold && product_identity_holds;
    let report = MinorsReport {
        schema: REPORT_SCHEMA,
        command: "minors",
        metric: f.to_string(),
        samples: cmd.opts.samples,
        seed: cmd.opts.seed,
        tol: cmd.opts.tol,
        range: cmd.opts.range.to_string(),
        relation_first: rel1,
        relation_second: rel2,
        product_identity: product,
        relations_hold,
        product_identity_holds,
        verdict,
    };
    Ok(Outcome {
        stdout: render(&report, cmd.format),
        verdict: Some(verdict),
    })
}

// ---------------------------------------------------------------------------
// motions

#[derive(Debug, Serialize)]
struct MotionApplied {
    a: f64,
    b: f64,
    input: (f64, f64, f64),
    output: (f64, f64, f64),
    invariance_residual: f64,
}

#[derive(Debug, Serialize)]
struct MotionSweep {
    draws: usize,
    seed: u64,
    max_invariance_residual: f64,
    max_composition_error: f64,
    max_inverse_error: f64,
    max_associativity_error: f64,
}

#[derive(Debug, Serialize)]
struct MotionsReport {
    schema: &'static str,
    command: &'static str,
    tol: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    applied: Option<MotionApplied>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<MotionSweep>,
    verdict: bool,
}

pub struct MotionsCmd {
    pub apply: Option<(f64, f64)>,
    pub point: Option<(f64, f64, f64)>,
    pub verify: Option<usize>,
    pub seed: u64,
    pub tol: f64,
    pub format: OutputFormat,
}

fn rel_err(got: f64, want: f64) -> f64 {
    (got - want).abs() / (1.0 + want.abs())
}

pub fn run_motions(cmd: &MotionsCmd) -> Result<Outcome, CliError> {
    let mut verdict = true;
    let applied = match (cmd.apply, cmd.point) {
        (Some((a, b)), Some((x, xi, eta))) => {
            let m = Motion::new(a, b)?;
            let output = m.apply(x, xi, eta);
            let residual = m.invariance_residual(x, xi, eta);
            verdict = verdict && residual.abs() <= cmd.tol * (1.0 + (x * xi + eta).abs());
            Some(MotionApplied {
                a,
                b,
                input: (x, xi, eta),
                output,
                invariance_residual: residual,
            })
        }
        (Some(_), None) => {
            return Err(CliError::Usage(
                "--apply needs --point x,xi,eta as well".into(),
            ))
        }
        _ => None,
    };
    let sweep = match cmd.verify {
        Some(draws) => {
            let mut rng = seeded_rng(cmd.seed);
            let range = CoordRange::default();
            let mut max_inv = 0.0f64;
            let mut max_comp = 0.0f64;
            let mut max_invres = 0.0f64;
            let mut max_assoc = 0.0f64;
            for _ in 0..draws {
                let m1 = sample_motion(&mut rng);
                let m2 = sample_motion(&mut rng);
                let m3 = sample_motion(&mut rng);
                let (x, xi, eta) = sample_triple(&mut rng, &range);

                let scaled = 1.0 + (x * xi + eta).abs();
                max_invres = max_invres.max(m1.invariance_residual(x, xi, eta).abs() / scaled);

                // compose against pointwise application
                let c = m2.compose(&m1);
                let (x1, xi1, eta1) = m1.apply(x, xi, eta);
                let step = m2.apply(x1, xi1, eta1);
                let direct = c.apply(x, xi, eta);
                max_comp = max_comp
                    .max(rel_err(direct.0, step.0))
                    .max(rel_err(direct.1, step.1))
                    .max(rel_err(direct.2, step.2));

                // associativity, identity and inverse laws
                let left = m3.compose(&m2).compose(&m1);
                let right = m3.compose(&m2.compose(&m1));
                max_assoc = max_assoc
                    .max(rel_err(left.a(), right.a()))
                    .max(rel_err(left.b(), right.b()));
                let round = m1.compose(&m1.inverse());
                max_inv = max_inv
                    .max(rel_err(round.a(), 1.0))
                    .max(rel_err(round.b(), 0.0));
            }
            verdict = verdict
                && max_invres <= cmd.tol
                && max_comp <= cmd.tol
                && max_inv <= cmd.tol
                && max_assoc <= cmd.tol;
            Some(MotionSweep {
                draws,
                seed: cmd.seed,
                max_invariance_residual: max_invres,
                max_composition_error: max_comp,
                max_inverse_error: max_inv,
                max_associativity_error: max_assoc,
            })
        }
        None => None,
    };
    if applied.is_none() && sweep.is_none() {
        return Err(CliError::Usage(
            "motions needs --apply a,b --point x,xi,eta and/or --verify N".into(),
        ));
    }
    let report = MotionsReport {
        schema: REPORT_SCHEMA,
        command: "motions",
        tol: cmd.tol,
        applied,
        sweep,
        verdict,
    };
    Ok(Outcome {
        stdout: render(&report, cmd.format),
        verdict: Some(verdict),
    })
}

// ---------------------------------------------------------------------------
// pde

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PdeCase {
    A0,
    Anonzero,
}

impl std::str::FromStr for PdeCase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "a0" => Ok(PdeCase::A0),
            "anonzero" => Ok(PdeCase::Anonzero),
            other => Err(format!("unknown case `{other}` (a0, anonzero)")),
        }
    }
}

#[derive(Debug, Serialize)]
struct PdeReport {
    schema: &'static str,
    command: &'static str,
    case: String,
    metric: String,
    samples: usize,
    seed: u64,
    tol: f64,
    system_first: ResidualStats,
    system_second: ResidualStats,
    #[serde(skip_serializing_if = "Option::is_none")]
    characteristic_max: Option<(f64, f64)>,
    equivalence_max: f64,
    verdict: bool,
}

pub struct PdeCmd {
    pub case: PdeCase,
    pub chi: OneVarFn,
    pub phi: OneVarFn,
    pub psi: OneVarFn,
    pub sigma: OneVarFn,
    pub tau: OneVarFn,
    pub opts: SweepOpts,
    pub format: OutputFormat,
}

impl PdeCmd {
    pub fn defaults(case: PdeCase) -> PdeCmd {
        PdeCmd {
            case,
            chi: OneVarFn::Identity,
            phi: OneVarFn::Const(1.0),
            psi: OneVarFn::Identity,
            sigma: OneVarFn::Const(0.0),
            tau: OneVarFn::Const(1.0),
            opts: SweepOpts {
                samples: 500,
                ..SweepOpts::default()
            },
            format: OutputFormat::Json,
        }
    }
}

pub fn run_pde(cmd: &PdeCmd) -> Result<Outcome, CliError> {
    let mut rng = seeded_rng(cmd.opts.seed);
    let probes: Vec<(f64, f64, f64)> = (0..cmd.opts.samples)
        .map(|_| sample_triple(&mut rng, &cmd.opts.range))
        .collect();
    let (metric, characteristic_max, change, case_name): (
        MetricFunction,
        Option<(f64, f64)>,
        CoordinateChange,
        &str,
    ) = match cmd.case {
        PdeCase::A0 => {
            let metric = case_a0_solution(cmd.chi)?;
            (
                metric,
                None,
                CoordinateChange::for_case_a0(cmd.chi),
                "a0",
            )
        }
        PdeCase::Anonzero => {
            let vs: Vec<f64> = probes.iter().map(|p| p.2).collect();
            let sol = case_anonzero_solution(
                cmd.chi, cmd.phi, cmd.psi, cmd.sigma, cmd.tau, &vs,
            )?;
            (
                sol.metric,
                Some(sol.max_characteristic),
                CoordinateChange::for_case_anonzero(cmd.chi, cmd.phi, cmd.psi),
                "anonzero",
            )
        }
    };
    let mut sys1 = Vec::with_capacity(probes.len());
    let mut sys2 = Vec::with_capacity(probes.len());
    for &(x, xi, eta) in &probes {
        let (r1, r2) = match cmd.case {
            PdeCase::A0 => {
                linear_system_residual(&metric, &reduced_triple_a0(), x, xi, eta)?
            }
            PdeCase::Anonzero => {
                system15_residual(&metric, &cmd.sigma, &cmd.tau, x, xi, eta)?
            }
        };
        sys1.push(r1.abs());
        sys2.push(r2.abs());
    }
    let equivalence = equivalence_to_canonical(&metric, &change, &probes)?;
    let sys1 = ResidualStats::from_abs(&mut sys1);
    let sys2 = ResidualStats::from_abs(&mut sys2);
    let verdict = sys1.max_abs <= cmd.opts.tol
        && sys2.max_abs <= cmd.opts.tol
        && equivalence.max_abs_residual <= cmd.opts.tol
        && characteristic_max
            .map(|(a, b)| a <= cmd.opts.tol && b <= cmd.opts.tol)
            .unwrap_or(true);
    let report = PdeReport {
        schema: REPORT_SCHEMA,
        command: "pde",
        case: case_name.to_string(),
        metric: metric.to_string(),
        samples: cmd.opts.samples,
        seed: cmd.opts.seed,
        tol: cmd.opts.tol,
        system_first: sys1,
        system_second: sys2,
        characteristic_max,
        equivalence_max: equivalence.max_abs_residual,
        verdict,
    };
    Ok(Outcome {
        stdout: render(&report, cmd.format),
        verdict: Some(verdict),
    })
}

// ---------------------------------------------------------------------------
// generate

pub struct GenerateCmd {
    pub p: usize,
    pub q: usize,
    pub noise: f64,
    pub seed: u64,
    pub range: CoordRange,
}

/// Draws coordinates from the range, builds the exact table, perturbs it
/// when asked, and emits CSV. The verdict is always a pass; errors are
/// usage errors.
pub fn run_generate(cmd: &GenerateCmd) -> Result<Outcome, CliError> {
    if cmd.p == 0 || cmd.q == 0 {
        return Err(CliError::Usage("generate needs p >= 1 and q >= 1".into()));
    }
    let mut rng = seeded_rng(cmd.seed);
    let x: Vec<f64> = (0..cmd.p).map(|_| cmd.range.sample(&mut rng)).collect();
    let xi: Vec<f64> = (0..cmd.q).map(|_| cmd.range.sample(&mut rng)).collect();
    let eta: Vec<f64> = (0..cmd.q).map(|_| cmd.range.sample(&mut rng)).collect();
    let table = generate_table(&x, &xi, &eta, cmd.noise, cmd.seed)?;
    Ok(Outcome {
        stdout: table.to_csv_string(),
        verdict: None,
    })
}

// ---------------------------------------------------------------------------
// detect / recover

#[derive(Debug, Serialize)]
struct DetectReport {
    schema: &'static str,
    command: &'static str,
    input: String,
    tol: f64,
    seed: u64,
    max_residual: f64,
    median_residual: f64,
    corteges_checked: usize,
    verdict: bool,
}

pub struct DetectCmd {
    pub input: String,
    pub table: MeasurementTable,
    pub tol: f64,
    pub seed: u64,
    pub format: OutputFormat,
}

pub fn run_detect(cmd: &DetectCmd) -> Result<Outcome, CliError> {
    let detection = detect_ps_with_seed(&cmd.table, cmd.tol, cmd.seed)?;
    let report = DetectReport {
        schema: REPORT_SCHEMA,
        command: "detect",
        input: cmd.input.clone(),
        tol: cmd.tol,
        seed: cmd.seed,
        max_residual: detection.max_residual,
        median_residual: detection.median_residual,
        corteges_checked: detection.corteges_checked,
        verdict: detection.verdict,
    };
    Ok(Outcome {
        stdout: render(&report, cmd.format),
        verdict: Some(detection.verdict),
    })
}

#[derive(Debug, Serialize)]
struct RecoverReport {
    schema: &'static str,
    command: &'static str,
    input: String,
    tol: f64,
    x: Vec<f64>,
    xi: Vec<f64>,
    eta: Vec<f64>,
    residual: f64,
    gauge: GaugeRecord,
    verdict: bool,
}

pub struct RecoverCmd {
    pub input: String,
    pub table: MeasurementTable,
    pub tol: f64,
    pub format: OutputFormat,
}

pub fn run_recover(cmd: &RecoverCmd) -> Result<Outcome, CliError> {
    let (coords, residual) = recover_coordinates(&cmd.table)?;
    let verdict = residual <= cmd.tol;
    let report = RecoverReport {
        schema: REPORT_SCHEMA,
        command: "recover",
        input: cmd.input.clone(),
        tol: cmd.tol,
        x: coords.x,
        xi: coords.xi,
        eta: coords.eta,
        residual,
        gauge: coords.gauge.expect("recovery always fixes the gauge"),
        verdict,
    };
    Ok(Outcome {
        stdout: render(&report, cmd.format),
        verdict: Some(verdict),
    })
}

/// Loads a table from a path: `.json` files use the `{"values": [[..]]}`
/// schema, anything else is read as CSV.
pub fn load_table(path: &str) -> Result<MeasurementTable, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_string(),
        source,
    })?;
    if path.ends_with(".json") {
        Ok(MeasurementTable::from_json_str(&text)?)
    } else {
        Ok(MeasurementTable::from_csv_str(&text)?)
    }
}

/// Optional JSON config file: `{"metric": "...", "samples": n, "seed": n,
/// "tol": x, "range": "a:b"}`. Explicit flags override config values.
#[derive(Debug, Clone, Default, serde::Deserialize)]
pub struct ConfigFile {
    pub metric: Option<String>,
    #[serde(rename = "metric-general")]
    pub metric_general: Option<String>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub range: Option<String>,
}

pub fn load_config(path: &str) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))
}
