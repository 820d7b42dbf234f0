//! Metric functions on a pair of manifolds with coordinates `x` and
//! `(xi, eta)`, the corteges they are probed on, and the essentiality check.
//!
//! Three representations coexist: the canonical product form `x*xi + eta`,
//! the closed family `chi(phi(x)*psi1(xi,eta) + psi2(xi,eta))` built from a
//! fixed catalog of one- and two-variable functions, and arbitrary parsed
//! expressions. The catalog keeps non-constancy and independence of the
//! building blocks decidable, which the `general_form_metric` constructor
//! certifies numerically.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::diff::Jet;
use crate::expr::MetricExpr;
use crate::scalar::{DomainError, Scalar};

/// The "not numerically zero" threshold used everywhere a determinant or
/// derivative is compared against zero: `|value| > 1e-9 * (1 + scale)`.
pub fn nonzero_threshold(scale: f64) -> f64 {
    1e-9 * (1.0 + scale.abs())
}

/// Scale-aware zero test shared by the essentiality and independence checks.
pub fn is_numerically_nonzero(value: f64, scale: f64) -> bool {
    value.abs() > nonzero_threshold(scale)
}

/// One-variable catalog functions used for `chi`, `phi` and the
/// eta-dependent coefficient functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OneVarFn {
    Identity,
    /// a*t + b
    Affine { a: f64, b: f64 },
    /// t^2
    Square,
    /// t + t^3
    Cubic,
    /// coeff * exp(rate*t) + offset
    ExpAffine { coeff: f64, rate: f64, offset: f64 },
    Ln,
    Const(f64),
}

impl OneVarFn {
    /// Plain `exp`.
    pub const fn exp() -> OneVarFn {
        OneVarFn::ExpAffine {
            coeff: 1.0,
            rate: 1.0,
            offset: 0.0,
        }
    }

    /// `exp(-t)`, the decaying variant used in the closed-form solutions.
    pub const fn exp_neg() -> OneVarFn {
        OneVarFn::ExpAffine {
            coeff: 1.0,
            rate: -1.0,
            offset: 0.0,
        }
    }

    pub fn eval_scalar<T: Scalar>(&self, t: T) -> Result<T, DomainError> {
        match *self {
            OneVarFn::Identity => Ok(t),
            OneVarFn::Affine { a, b } => Ok(T::constant(a) * t + T::constant(b)),
            OneVarFn::Square => Ok(t * t),
            OneVarFn::Cubic => Ok(t + t * t * t),
            OneVarFn::ExpAffine {
                coeff,
                rate,
                offset,
            } => {
                let e = (T::constant(rate) * t).checked_exp()?;
                Ok(T::constant(coeff) * e + T::constant(offset))
            }
            OneVarFn::Ln => t.checked_ln(),
            OneVarFn::Const(c) => Ok(T::constant(c)),
        }
        .map_err(|e: DomainError| e.with_context(self.to_string()))
    }

    pub fn eval(&self, t: f64) -> Result<f64, DomainError> {
        self.eval_scalar(t)
    }

    /// Value and first derivative at `t`, via a one-slot dual pass.
    pub fn value_and_derivative(&self, t: f64) -> Result<(f64, f64), DomainError> {
        let jet = self.eval_scalar(Jet::seed_x(t))?;
        Ok((jet.value, jet.d_x))
    }

    pub fn is_constant(&self) -> bool {
        match *self {
            OneVarFn::Const(_) => true,
            OneVarFn::Affine { a, .. } => a == 0.0,
            OneVarFn::ExpAffine { coeff, rate, .. } => coeff == 0.0 || rate == 0.0,
            _ => false,
        }
    }

    /// True when the derivative never vanishes on the function's domain.
    pub fn is_strictly_monotone(&self) -> bool {
        match *self {
            OneVarFn::Identity | OneVarFn::Cubic | OneVarFn::Ln => true,
            OneVarFn::Affine { a, .. } => a != 0.0,
            OneVarFn::ExpAffine { coeff, rate, .. } => coeff != 0.0 && rate != 0.0,
            OneVarFn::Square | OneVarFn::Const(_) => false,
        }
    }

    /// Solves `self(t) = y` for strictly monotone catalog entries.
    pub fn inverse_value(&self, y: f64) -> Result<f64, DomainError> {
        match *self {
            OneVarFn::Identity => Ok(y),
            OneVarFn::Affine { a, b } => {
                if a == 0.0 {
                    Err(DomainError::new("constant affine map is not invertible"))
                } else {
                    Ok((y - b) / a)
                }
            }
            OneVarFn::Cubic => Ok(invert_cubic(y)),
            OneVarFn::ExpAffine {
                coeff,
                rate,
                offset,
            } => {
                if coeff == 0.0 || rate == 0.0 {
                    return Err(DomainError::new("constant exponential is not invertible"));
                }
                let arg = (y - offset) / coeff;
                if arg <= 0.0 {
                    return Err(DomainError::new(format!(
                        "value {y} outside the range of {self}"
                    )));
                }
                Ok(arg.ln() / rate)
            }
            OneVarFn::Ln => {
                let v = y.exp();
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(DomainError::new("inverse of ln overflows"))
                }
            }
            OneVarFn::Square | OneVarFn::Const(_) => Err(DomainError::new(format!(
                "{self} is not invertible"
            ))),
        }
    }
}

/// Solves t + t^3 = y. The map is strictly increasing, so a safeguarded
/// Newton iteration inside a bisection bracket converges for every y.
fn invert_cubic(y: f64) -> f64 {
    let m = y.abs().max(1.0);
    let (mut lo, mut hi) = (-m, m);
    let mut t = y.cbrt();
    for _ in 0..200 {
        let g = t + t * t * t - y;
        if g > 0.0 {
            hi = t;
        } else {
            lo = t;
        }
        let dg = 1.0 + 3.0 * t * t;
        let mut next = t - g / dg;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-16 * (1.0 + t.abs()) {
            return next;
        }
        t = next;
    }
    t
}

impl fmt::Display for OneVarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            OneVarFn::Identity => write!(f, "id"),
            OneVarFn::Affine { a, b } => write!(f, "affine({a},{b})"),
            OneVarFn::Square => write!(f, "square"),
            OneVarFn::Cubic => write!(f, "cubic"),
            OneVarFn::ExpAffine {
                coeff,
                rate,
                offset,
            } => {
                if coeff == 1.0 && rate == 1.0 && offset == 0.0 {
                    write!(f, "exp")
                } else if coeff == 1.0 && rate == -1.0 && offset == 0.0 {
                    write!(f, "exp_neg")
                } else {
                    write!(f, "exp_affine({coeff},{rate},{offset})")
                }
            }
            OneVarFn::Ln => write!(f, "ln"),
            OneVarFn::Const(c) => write!(f, "const({c})"),
        }
    }
}

/// Splits `name(args)` into the name and comma-separated argument list.
fn split_call(s: &str) -> Option<(&str, Vec<&str>)> {
    let s = s.trim();
    let open = s.find('(')?;
    if !s.ends_with(')') {
        return None;
    }
    let name = &s[..open];
    let body = &s[open + 1..s.len() - 1];
    let mut args = Vec::new();
    let mut depth = 0usize;
    let mut start = 0usize;
    for (i, c) in body.char_indices() {
        match c {
            '(' => depth += 1,
            ')' => depth = depth.saturating_sub(1),
            ',' if depth == 0 => {
                args.push(body[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    args.push(body[start..].trim());
    Some((name.trim(), args))
}

fn parse_f64(s: &str) -> Result<f64, CatalogParseError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CatalogParseError(format!("expected a number, got `{s}`")))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("catalog parse error: {0}")]
pub struct CatalogParseError(pub String);

impl FromStr for OneVarFn {
    type Err = CatalogParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "id" | "identity" => return Ok(OneVarFn::Identity),
            "square" => return Ok(OneVarFn::Square),
            "cubic" => return Ok(OneVarFn::Cubic),
            "exp" => return Ok(OneVarFn::exp()),
            "exp_neg" => return Ok(OneVarFn::exp_neg()),
            "ln" => return Ok(OneVarFn::Ln),
            _ => {}
        }
        if let Some((name, args)) = split_call(s) {
            match (name, args.as_slice()) {
                ("affine", [a, b]) => {
                    return Ok(OneVarFn::Affine {
                        a: parse_f64(a)?,
                        b: parse_f64(b)?,
                    })
                }
                ("const", [c]) => return Ok(OneVarFn::Const(parse_f64(c)?)),
                ("exp_affine", [c, r, o]) => {
                    return Ok(OneVarFn::ExpAffine {
                        coeff: parse_f64(c)?,
                        rate: parse_f64(r)?,
                        offset: parse_f64(o)?,
                    })
                }
                _ => {}
            }
        }
        Err(CatalogParseError(format!(
            "unknown one-variable catalog entry `{s}`"
        )))
    }
}

/// Two-variable catalog functions of `(xi, eta)` used for `psi1`, `psi2`
/// and the coefficient functions `sigma`, `tau`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TwoVarFn {
    /// xi_coeff*xi + eta_coeff*eta + offset
    Linear {
        xi: f64,
        eta: f64,
        offset: f64,
    },
    /// xi^2 + eta
    XiSquaredPlusEta,
    /// xi*eta + 1
    XiEtaPlusOne,
    /// scale * exp(xi_coeff*xi + eta_coeff*eta) + offset
    ExpAffine {
        xi: f64,
        eta: f64,
        scale: f64,
        offset: f64,
    },
    /// xi_coeff*xi + coeff*inner(eta) + offset
    XiPlusFn {
        xi: f64,
        coeff: f64,
        inner: OneVarFn,
        offset: f64,
    },
    /// coeff * inner(eta) * exp(rate*xi) + offset
    ExpXiTimesFn {
        rate: f64,
        coeff: f64,
        inner: OneVarFn,
        offset: f64,
    },
    /// coeff * xi * exp(rate*eta)
    XiTimesExpEta {
        coeff: f64,
        rate: f64,
    },
}

impl TwoVarFn {
    pub const fn xi() -> TwoVarFn {
        TwoVarFn::Linear {
            xi: 1.0,
            eta: 0.0,
            offset: 0.0,
        }
    }

    pub const fn eta() -> TwoVarFn {
        TwoVarFn::Linear {
            xi: 0.0,
            eta: 1.0,
            offset: 0.0,
        }
    }

    pub const fn constant(c: f64) -> TwoVarFn {
        TwoVarFn::Linear {
            xi: 0.0,
            eta: 0.0,
            offset: c,
        }
    }

    /// exp(xi + eta)
    pub const fn exp_sum() -> TwoVarFn {
        TwoVarFn::ExpAffine {
            xi: 1.0,
            eta: 1.0,
            scale: 1.0,
            offset: 0.0,
        }
    }

    /// A function of eta alone: coeff * inner(eta) + offset.
    pub const fn of_eta(inner: OneVarFn) -> TwoVarFn {
        TwoVarFn::XiPlusFn {
            xi: 0.0,
            coeff: 1.0,
            inner,
            offset: 0.0,
        }
    }

    pub fn eval_scalar<T: Scalar>(&self, xi: T, eta: T) -> Result<T, DomainError> {
        match *self {
            TwoVarFn::Linear {
                xi: cx,
                eta: ce,
                offset,
            } => Ok(T::constant(cx) * xi + T::constant(ce) * eta + T::constant(offset)),
            TwoVarFn::XiSquaredPlusEta => Ok(xi * xi + eta),
            TwoVarFn::XiEtaPlusOne => Ok(xi * eta + T::constant(1.0)),
            TwoVarFn::ExpAffine {
                xi: cx,
                eta: ce,
                scale,
                offset,
            } => {
                let e = (T::constant(cx) * xi + T::constant(ce) * eta).checked_exp()?;
                Ok(T::constant(scale) * e + T::constant(offset))
            }
            TwoVarFn::XiPlusFn {
                xi: cx,
                coeff,
                inner,
                offset,
            } => {
                let g = inner.eval_scalar(eta)?;
                Ok(T::constant(cx) * xi + T::constant(coeff) * g + T::constant(offset))
            }
            TwoVarFn::ExpXiTimesFn {
                rate,
                coeff,
                inner,
                offset,
            } => {
                let g = inner.eval_scalar(eta)?;
                let e = (T::constant(rate) * xi).checked_exp()?;
                Ok(T::constant(coeff) * g * e + T::constant(offset))
            }
            TwoVarFn::XiTimesExpEta { coeff, rate } => {
                let e = (T::constant(rate) * eta).checked_exp()?;
                Ok(T::constant(coeff) * xi * e)
            }
        }
        .map_err(|e: DomainError| e.with_context(self.to_string()))
    }

    pub fn eval(&self, xi: f64, eta: f64) -> Result<f64, DomainError> {
        self.eval_scalar(xi, eta)
    }

    /// Value and the two partials (d/dxi, d/deta) at `(xi, eta)`.
    pub fn partials(&self, xi: f64, eta: f64) -> Result<(f64, f64, f64), DomainError> {
        let jet = self.eval_scalar(Jet::seed_xi(xi), Jet::seed_eta(eta))?;
        Ok((jet.value, jet.d_xi, jet.d_eta))
    }
}

impl fmt::Display for TwoVarFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TwoVarFn::Linear { xi, eta, offset } => {
                if (xi, eta, offset) == (1.0, 0.0, 0.0) {
                    write!(f, "xi")
                } else if (xi, eta, offset) == (0.0, 1.0, 0.0) {
                    write!(f, "eta")
                } else {
                    write!(f, "linear({xi},{eta},{offset})")
                }
            }
            TwoVarFn::XiSquaredPlusEta => write!(f, "xi2_plus_eta"),
            TwoVarFn::XiEtaPlusOne => write!(f, "xi_eta_plus_one"),
            TwoVarFn::ExpAffine {
                xi,
                eta,
                scale,
                offset,
            } => {
                if (xi, eta, scale, offset) == (1.0, 1.0, 1.0, 0.0) {
                    write!(f, "exp_sum")
                } else {
                    write!(f, "exp_affine({xi},{eta},{scale},{offset})")
                }
            }
            TwoVarFn::XiPlusFn {
                xi,
                coeff,
                inner,
                offset,
            } => write!(f, "xi_plus_fn({xi},{coeff},{inner},{offset})"),
            TwoVarFn::ExpXiTimesFn {
                rate,
                coeff,
                inner,
                offset,
            } => write!(f, "exp_xi_fn({rate},{coeff},{inner},{offset})"),
            TwoVarFn::XiTimesExpEta { coeff, rate } => {
                write!(f, "xi_exp_eta({coeff},{rate})")
            }
        }
    }
}

impl FromStr for TwoVarFn {
    type Err = CatalogParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        match s {
            "xi" => return Ok(TwoVarFn::xi()),
            "eta" => return Ok(TwoVarFn::eta()),
            "xi2_plus_eta" => return Ok(TwoVarFn::XiSquaredPlusEta),
            "xi_eta_plus_one" => return Ok(TwoVarFn::XiEtaPlusOne),
            "exp_sum" => return Ok(TwoVarFn::exp_sum()),
            "exp_xi" => {
                return Ok(TwoVarFn::ExpAffine {
                    xi: 1.0,
                    eta: 0.0,
                    scale: 1.0,
                    offset: 0.0,
                })
            }
            _ => {}
        }
        if let Some((name, args)) = split_call(s) {
            match (name, args.as_slice()) {
                ("linear", [a, b, c]) => {
                    return Ok(TwoVarFn::Linear {
                        xi: parse_f64(a)?,
                        eta: parse_f64(b)?,
                        offset: parse_f64(c)?,
                    })
                }
                ("exp_affine", [a, b, c, d]) => {
                    return Ok(TwoVarFn::ExpAffine {
                        xi: parse_f64(a)?,
                        eta: parse_f64(b)?,
                        scale: parse_f64(c)?,
                        offset: parse_f64(d)?,
                    })
                }
                ("xi_plus_fn", [a, b, inner, c]) => {
                    return Ok(TwoVarFn::XiPlusFn {
                        xi: parse_f64(a)?,
                        coeff: parse_f64(b)?,
                        inner: inner.parse()?,
                        offset: parse_f64(c)?,
                    })
                }
                ("exp_xi_fn", [a, b, inner, c]) => {
                    return Ok(TwoVarFn::ExpXiTimesFn {
                        rate: parse_f64(a)?,
                        coeff: parse_f64(b)?,
                        inner: inner.parse()?,
                        offset: parse_f64(c)?,
                    })
                }
                ("xi_exp_eta", [a, b]) => {
                    return Ok(TwoVarFn::XiTimesExpEta {
                        coeff: parse_f64(a)?,
                        rate: parse_f64(b)?,
                    })
                }
                _ => {}
            }
        }
        Err(CatalogParseError(format!(
            "unknown two-variable catalog entry `{s}`"
        )))
    }
}

/// The closed family chi(phi(x)*psi1(xi,eta) + psi2(xi,eta)).
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralForm {
    pub chi: OneVarFn,
    pub phi: OneVarFn,
    pub psi1: TwoVarFn,
    pub psi2: TwoVarFn,
}

impl GeneralForm {
    /// The inner product-form value phi(x)*psi1 + psi2 before `chi` applies.
    pub fn inner_scalar<T: Scalar>(&self, x: T, xi: T, eta: T) -> Result<T, DomainError> {
        let p = self.phi.eval_scalar(x)?;
        let s1 = self.psi1.eval_scalar(xi, eta)?;
        let s2 = self.psi2.eval_scalar(xi, eta)?;
        Ok(p * s1 + s2)
    }

    /// Applies the inverse of the outer scaling `chi` to a metric value.
    pub fn chi_inverse(&self, value: f64) -> Result<f64, DomainError> {
        self.chi.inverse_value(value)
    }
}

/// A metric function in one of the three supported representations.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricFunction {
    /// x*xi + eta
    Canonical,
    General(GeneralForm),
    Expression(MetricExpr),
}

impl MetricFunction {
    pub fn eval_scalar<T: Scalar>(&self, x: T, xi: T, eta: T) -> Result<T, DomainError> {
        match self {
            MetricFunction::Canonical => Ok(x * xi + eta),
            MetricFunction::General(g) => {
                let inner = g.inner_scalar(x, xi, eta)?;
                g.chi.eval_scalar(inner)
            }
            MetricFunction::Expression(e) => e.eval_scalar(x, xi, eta),
        }
    }

    pub fn eval(&self, x: f64, xi: f64, eta: f64) -> Result<f64, DomainError> {
        self.eval_scalar(x, xi, eta)
    }

    pub fn as_general(&self) -> Option<&GeneralForm> {
        match self {
            MetricFunction::General(g) => Some(g),
            _ => None,
        }
    }
}

impl From<MetricExpr> for MetricFunction {
    fn from(e: MetricExpr) -> Self {
        MetricFunction::Expression(e)
    }
}

impl fmt::Display for MetricFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricFunction::Canonical => write!(f, "canonical"),
            MetricFunction::General(g) => write!(
                f,
                "general(chi={},phi={},psi1={},psi2={})",
                g.chi, g.phi, g.psi1, g.psi2
            ),
            MetricFunction::Expression(e) => write!(f, "{e}"),
        }
    }
}

/// The canonical metric x*xi + eta.
pub fn canonical_metric() -> MetricFunction {
    MetricFunction::Canonical
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("chi must be non-constant")]
    ConstantChi,
    #[error("phi must be non-constant")]
    ConstantPhi,
    #[error("psi1 and psi2 are functionally dependent (their Jacobian vanishes at all probe points)")]
    DependentPsiPair,
    #[error("probe list must not be empty")]
    EmptyProbes,
    #[error("x coordinates within a probe must be pairwise distinct (got {0})")]
    CoincidentMPoints(f64),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

const INDEPENDENCE_PROBES: usize = 20;
const INDEPENDENCE_SEED: u64 = 0x9e3779b9;

/// Builds a general-form metric, certifying that `chi` and `phi` are
/// non-constant and that `(psi1, psi2)` are functionally independent. The
/// independence check evaluates the 2x2 Jacobian at 20 seeded probe points
/// and rejects the pair only when it vanishes at every one of them.
pub fn general_form_metric(
    chi: OneVarFn,
    phi: OneVarFn,
    psi1: TwoVarFn,
    psi2: TwoVarFn,
) -> Result<MetricFunction, GeometryError> {
    if chi.is_constant() {
        return Err(GeometryError::ConstantChi);
    }
    if phi.is_constant() {
        return Err(GeometryError::ConstantPhi);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(INDEPENDENCE_SEED);
    let mut any_nonzero = false;
    for _ in 0..INDEPENDENCE_PROBES {
        let xi = draw_away_from_zero(&mut rng);
        let eta = draw_away_from_zero(&mut rng);
        let (_, p1_xi, p1_eta) = psi1.partials(xi, eta)?;
        let (_, p2_xi, p2_eta) = psi2.partials(xi, eta)?;
        let jac = p1_xi * p2_eta - p1_eta * p2_xi;
        let scale = p1_xi
            .abs()
            .max(p1_eta.abs())
            .max(p2_xi.abs())
            .max(p2_eta.abs());
        if is_numerically_nonzero(jac, scale) {
            any_nonzero = true;
            break;
        }
    }
    if !any_nonzero {
        return Err(GeometryError::DependentPsiPair);
    }
    Ok(MetricFunction::General(GeneralForm {
        chi,
        phi,
        psi1,
        psi2,
    }))
}

fn draw_away_from_zero(rng: &mut ChaCha8Rng) -> f64 {
    let magnitude = rng.random_range(0.1..=2.0);
    if rng.random_bool(0.5) {
        magnitude
    } else {
        -magnitude
    }
}

/// Three coordinates on the first manifold and two points of the second:
/// the tuple every rank and identity check is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cortege32 {
    pub x_i: f64,
    pub x_j: f64,
    pub x_k: f64,
    pub xi_alpha: f64,
    pub eta_alpha: f64,
    pub xi_beta: f64,
    pub eta_beta: f64,
}

impl Cortege32 {
    pub fn new(
        x: [f64; 3],
        alpha: (f64, f64),
        beta: (f64, f64),
    ) -> Cortege32 {
        Cortege32 {
            x_i: x[0],
            x_j: x[1],
            x_k: x[2],
            xi_alpha: alpha.0,
            eta_alpha: alpha.1,
            xi_beta: beta.0,
            eta_beta: beta.1,
        }
    }

    pub fn xs(&self) -> [f64; 3] {
        [self.x_i, self.x_j, self.x_k]
    }

    /// The six (M-point, N-point) pairs in column order
    /// (i,alpha) (i,beta) (j,alpha) (j,beta) (k,alpha) (k,beta).
    pub fn pairs(&self) -> [(f64, f64, f64); 6] {
        [
            (self.x_i, self.xi_alpha, self.eta_alpha),
            (self.x_i, self.xi_beta, self.eta_beta),
            (self.x_j, self.xi_alpha, self.eta_alpha),
            (self.x_j, self.xi_beta, self.eta_beta),
            (self.x_k, self.xi_alpha, self.eta_alpha),
            (self.x_k, self.xi_beta, self.eta_beta),
        ]
    }

    pub fn has_distinct_xs(&self) -> bool {
        self.x_i != self.x_j && self.x_i != self.x_k && self.x_j != self.x_k
    }
}

/// Per-probe outcome of the essentiality check at one N-point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssentialityAtPoint {
    /// df/dx at (x_i, xi, eta).
    pub derivative_x: f64,
    /// Jacobian of (f(x_i,.), f(x_j,.)) with respect to (xi, eta).
    pub jacobian: f64,
    pub derivative_nonzero: bool,
    pub jacobian_nonzero: bool,
}

impl EssentialityAtPoint {
    pub fn pass(&self) -> bool {
        self.derivative_nonzero && self.jacobian_nonzero
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EssentialityOutcome {
    pub cortege: Cortege32,
    pub at_alpha: EssentialityAtPoint,
    pub at_beta: EssentialityAtPoint,
}

impl EssentialityOutcome {
    pub fn pass(&self) -> bool {
        self.at_alpha.pass() && self.at_beta.pass()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EssentialityReport {
    pub outcomes: Vec<EssentialityOutcome>,
}

impl EssentialityReport {
    pub fn passed(&self) -> usize {
        self.outcomes.iter().filter(|o| o.pass()).count()
    }

    pub fn all_pass(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass())
    }
}

fn essentiality_at(
    f: &MetricFunction,
    c: &Cortege32,
    xi: f64,
    eta: f64,
) -> Result<EssentialityAtPoint, GeometryError> {
    let jet_i = crate::diff::evaluate_with_partials(f, c.x_i, xi, eta)?;
    let jet_j = crate::diff::evaluate_with_partials(f, c.x_j, xi, eta)?;
    let jacobian = jet_i.d_xi * jet_j.d_eta - jet_i.d_eta * jet_j.d_xi;
    let coord_scale = c
        .x_i
        .abs()
        .max(c.x_j.abs())
        .max(xi.abs())
        .max(eta.abs());
    let jac_scale = jet_i
        .d_xi
        .abs()
        .max(jet_i.d_eta.abs())
        .max(jet_j.d_xi.abs())
        .max(jet_j.d_eta.abs());
    Ok(EssentialityAtPoint {
        derivative_x: jet_i.d_x,
        jacobian,
        derivative_nonzero: is_numerically_nonzero(jet_i.d_x, coord_scale),
        // the Jacobian is a product of two entries, so its scale is quadratic
        jacobian_nonzero: is_numerically_nonzero(jacobian, jac_scale * jac_scale),
    })
}

/// Checks the two essentiality inequalities at every probe: df/dx must not
/// vanish and the 2x2 Jacobian of (f(x_i,.), f(x_j,.)) with respect to
/// (xi, eta) must not vanish. Both are evaluated at the alpha and the beta
/// point of each probe and reported separately.
pub fn essentiality_check(
    f: &MetricFunction,
    probes: &[Cortege32],
) -> Result<EssentialityReport, GeometryError> {
    if probes.is_empty() {
        return Err(GeometryError::EmptyProbes);
    }
    let mut outcomes = Vec::with_capacity(probes.len());
    for c in probes {
        if !c.has_distinct_xs() {
            return Err(GeometryError::CoincidentMPoints(c.x_i));
        }
        outcomes.push(EssentialityOutcome {
            cortege: *c,
            at_alpha: essentiality_at(f, c, c.xi_alpha, c.eta_alpha)?,
            at_beta: essentiality_at(f, c, c.xi_beta, c.eta_beta)?,
        });
    }
    Ok(EssentialityReport { outcomes })
}
