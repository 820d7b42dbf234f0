//! Numerical verification of the differential relations behind the
//! classification: the reduced first-order system, the coefficient
//! relations it forces, the two closed-form solution families, and their
//! equivalence to the canonical metric under explicit coordinate changes.
//!
//! Nothing here is solved symbolically. Coefficient functions come from the
//! same catalogs as the geometry module; the characteristic equations are
//! integrated numerically with step-doubling and verified by substituting
//! the result back, never by trusting the integrator.

use thiserror::Error;

use crate::diff::evaluate_with_partials;
use crate::geometry::{
    general_form_metric, is_numerically_nonzero, GeometryError, MetricFunction, OneVarFn,
    TwoVarFn,
};
use crate::scalar::DomainError;

#[derive(Debug, Error)]
pub enum PdeError {
    #[error("lambda vanishes identically on the probe range")]
    ZeroLambda,
    #[error("sigma^2 + tau^2 vanishes identically on the probe range")]
    ZeroSigmaTau,
    #[error("tau vanishes at the probe point v = {0}")]
    TauVanishes(f64),
    #[error("phi vanishes at the probe point v = {0}")]
    PhiVanishes(f64),
    #[error("{role} must be non-constant here")]
    ConstantFunction { role: &'static str },
    #[error("chi must have a nowhere-vanishing derivative, `{0}` does not")]
    ChiNotMonotone(String),
    #[error("coordinate change produced a non-finite value at ({0}, {1}, {2})")]
    NonFiniteChange(f64, f64, f64),
    #[error("step control failed: step size underflowed at v = {0}")]
    StepUnderflow(f64),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Coefficients (lambda(x), sigma(xi,eta), tau(xi,eta)) of the reduced
/// linear system `f_x + f_xi = 0`, `lambda f_x + sigma f_xi + tau f_eta = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTriple {
    pub lambda: OneVarFn,
    pub sigma: TwoVarFn,
    pub tau: TwoVarFn,
}

impl CoefficientTriple {
    /// Validates the admissibility inequalities numerically on a fixed probe
    /// grid: lambda must not vanish identically, nor may sigma^2 + tau^2.
    pub fn new(
        lambda: OneVarFn,
        sigma: TwoVarFn,
        tau: TwoVarFn,
    ) -> Result<CoefficientTriple, PdeError> {
        let probes = [-1.9, -1.3, -0.7, -0.3, -0.1, 0.1, 0.4, 0.8, 1.2, 1.7];
        let mut lambda_ok = false;
        let mut sum_ok = false;
        for &x in &probes {
            let lv = lambda.eval(x)?;
            if is_numerically_nonzero(lv, x) {
                lambda_ok = true;
            }
        }
        for &xi in &probes {
            for &eta in &probes {
                let sv = sigma.eval(xi, eta)?;
                let tv = tau.eval(xi, eta)?;
                if is_numerically_nonzero(sv * sv + tv * tv, xi.abs().max(eta.abs())) {
                    sum_ok = true;
                }
            }
        }
        if !lambda_ok {
            return Err(PdeError::ZeroLambda);
        }
        if !sum_ok {
            return Err(PdeError::ZeroSigmaTau);
        }
        Ok(CoefficientTriple { lambda, sigma, tau })
    }
}

/// Residuals of the reduced system at one point:
/// (f_x + f_xi, lambda f_x + sigma f_xi + tau f_eta).
pub fn linear_system_residual(
    f: &MetricFunction,
    ct: &CoefficientTriple,
    x: f64,
    xi: f64,
    eta: f64,
) -> Result<(f64, f64), PdeError> {
    let jet = evaluate_with_partials(f, x, xi, eta)?;
    let lambda = ct.lambda.eval(x)?;
    let sigma = ct.sigma.eval(xi, eta)?;
    let tau = ct.tau.eval(xi, eta)?;
    Ok((
        jet.d_x + jet.d_xi,
        lambda * jet.d_x + sigma * jet.d_xi + tau * jet.d_eta,
    ))
}

/// Residual of the compatibility relation
/// lambda_x - lambda tau_xi / tau + (sigma tau_xi - tau sigma_xi) / tau.
pub fn coefficient_relation_residual(
    ct: &CoefficientTriple,
    x: f64,
    xi: f64,
    eta: f64,
) -> Result<f64, PdeError> {
    let (lambda, lambda_x) = ct.lambda.value_and_derivative(x)?;
    let (sigma, sigma_xi, _) = ct.sigma.partials(xi, eta)?;
    let (tau, tau_xi, _) = ct.tau.partials(xi, eta)?;
    if tau == 0.0 {
        return Err(PdeError::TauVanishes(xi));
    }
    Ok(lambda_x - lambda * tau_xi / tau + (sigma * tau_xi - tau * sigma_xi) / tau)
}

/// Residuals of the separated coefficient equations
/// (lambda_x - a lambda - b, sigma_xi - a sigma - b, tau_xi - a tau).
pub fn coefficient_ode_residual(
    ct: &CoefficientTriple,
    a: f64,
    b: f64,
    x: f64,
    xi: f64,
    eta: f64,
) -> Result<(f64, f64, f64), PdeError> {
    let (lambda, lambda_x) = ct.lambda.value_and_derivative(x)?;
    let (sigma, sigma_xi, _) = ct.sigma.partials(xi, eta)?;
    let (tau, tau_xi, _) = ct.tau.partials(xi, eta)?;
    Ok((
        lambda_x - a * lambda - b,
        sigma_xi - a * sigma - b,
        tau_xi - a * tau,
    ))
}

/// The coefficient triple (lambda, sigma, tau) = (x, xi, 1) of the fully
/// reduced system solved by the shift-invariant family.
pub fn reduced_triple_a0() -> CoefficientTriple {
    CoefficientTriple {
        lambda: OneVarFn::Identity,
        sigma: TwoVarFn::xi(),
        tau: TwoVarFn::constant(1.0),
    }
}

/// The solution family of the a = 0 case: chi((x - xi) * exp(-eta)),
/// realized inside the closed general form with
/// psi1 = exp(-eta), psi2 = -xi * exp(-eta).
pub fn case_a0_solution(chi: OneVarFn) -> Result<MetricFunction, PdeError> {
    if chi.is_constant() {
        return Err(PdeError::ConstantFunction { role: "chi" });
    }
    if !chi.is_strictly_monotone() {
        return Err(PdeError::ChiNotMonotone(chi.to_string()));
    }
    Ok(general_form_metric(
        chi,
        OneVarFn::Identity,
        TwoVarFn::ExpAffine {
            xi: 0.0,
            eta: -1.0,
            scale: 1.0,
            offset: 0.0,
        },
        TwoVarFn::XiTimesExpEta {
            coeff: -1.0,
            rate: -1.0,
        },
    )?)
}

/// Characteristic residuals of the a != 0 construction at one v:
/// r1 = phi' tau + sigma phi (from phi'/phi = -sigma/tau) and
/// r2 = psi' tau - phi (from psi'/phi = 1/tau).
pub fn characteristic_residuals(
    phi: &OneVarFn,
    psi: &OneVarFn,
    sigma: &OneVarFn,
    tau: &OneVarFn,
    v: f64,
) -> Result<(f64, f64), PdeError> {
    let (phi_v, dphi) = phi.value_and_derivative(v)?;
    let (_, dpsi) = psi.value_and_derivative(v)?;
    let sigma_v = sigma.eval(v)?;
    let tau_v = tau.eval(v)?;
    Ok((dphi * tau_v + sigma_v * phi_v, dpsi * tau_v - phi_v))
}

/// Outcome of building the a != 0 solution family
/// f = chi(phi(eta) exp(xi - x) + psi(eta)).
#[derive(Debug, Clone)]
pub struct CaseAnonzeroSolution {
    pub metric: MetricFunction,
    /// (v, r1, r2) per probe.
    pub characteristic: Vec<(f64, f64, f64)>,
    pub max_characteristic: (f64, f64),
}

/// Builds the family and evaluates the two characteristic residuals at the
/// given probe values of v = eta. Requires tau and phi nonzero over the
/// probes; the metric zeroes the exponential-coefficient system exactly
/// when both residuals vanish.
pub fn case_anonzero_solution(
    chi: OneVarFn,
    phi: OneVarFn,
    psi: OneVarFn,
    sigma: OneVarFn,
    tau: OneVarFn,
    probes: &[f64],
) -> Result<CaseAnonzeroSolution, PdeError> {
    if chi.is_constant() {
        return Err(PdeError::ConstantFunction { role: "chi" });
    }
    for &v in probes {
        let tau_v = tau.eval(v)?;
        if !is_numerically_nonzero(tau_v, v) {
            return Err(PdeError::TauVanishes(v));
        }
        let phi_v = phi.eval(v)?;
        if !is_numerically_nonzero(phi_v, v) {
            return Err(PdeError::PhiVanishes(v));
        }
    }
    let metric = general_form_metric(
        chi,
        OneVarFn::exp_neg(),
        TwoVarFn::ExpXiTimesFn {
            rate: 1.0,
            coeff: 1.0,
            inner: phi,
            offset: 0.0,
        },
        TwoVarFn::of_eta(psi),
    )?;
    let mut characteristic = Vec::with_capacity(probes.len());
    let mut max1 = 0.0f64;
    let mut max2 = 0.0f64;
    for &v in probes {
        let (r1, r2) = characteristic_residuals(&phi, &psi, &sigma, &tau, v)?;
        max1 = max1.max(r1.abs());
        max2 = max2.max(r2.abs());
        characteristic.push((v, r1, r2));
    }
    Ok(CaseAnonzeroSolution {
        metric,
        characteristic,
        max_characteristic: (max1, max2),
    })
}

/// Residuals of the exponential-coefficient system at one point:
/// (f_x + f_xi, exp(x - xi) f_x + sigma(eta) f_xi + tau(eta) f_eta).
pub fn system15_residual(
    f: &MetricFunction,
    sigma: &OneVarFn,
    tau: &OneVarFn,
    x: f64,
    xi: f64,
    eta: f64,
) -> Result<(f64, f64), PdeError> {
    let jet = evaluate_with_partials(f, x, xi, eta)?;
    let sigma_v = sigma.eval(eta)?;
    let tau_v = tau.eval(eta)?;
    let coeff = (x - xi).exp();
    Ok((
        jet.d_x + jet.d_xi,
        coeff * jet.d_x + sigma_v * jet.d_xi + tau_v * jet.d_eta,
    ))
}

/// A coordinate change of both manifolds plus a value scaling, enough to
/// compare any solution against the canonical product form.
pub struct CoordinateChange {
    /// x -> new x coordinate.
    pub m_map: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    /// (xi, eta) -> new (xi, eta) coordinates.
    pub n_map: Box<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>,
    /// The scaling applied to metric values (the inverse of the outer chi).
    pub scaling: Box<dyn Fn(f64) -> Result<f64, DomainError> + Send + Sync>,
}

impl CoordinateChange {
    pub fn identity() -> CoordinateChange {
        CoordinateChange {
            m_map: Box::new(|x| x),
            n_map: Box::new(|xi, eta| (xi, eta)),
            scaling: Box::new(Ok),
        }
    }

    /// The quoted change for the a = 0 family: the second manifold moves to
    /// (exp(-eta), -xi exp(-eta)) and values are unscaled by chi.
    pub fn for_case_a0(chi: OneVarFn) -> CoordinateChange {
        CoordinateChange {
            m_map: Box::new(|x| x),
            n_map: Box::new(|xi, eta| ((-eta).exp(), -xi * (-eta).exp())),
            scaling: Box::new(move |v| chi.inverse_value(v)),
        }
    }

    /// The quoted change for the a != 0 family: x -> exp(-x),
    /// (xi, eta) -> (phi(eta) exp(xi), psi(eta)), values unscaled by chi.
    pub fn for_case_anonzero(chi: OneVarFn, phi: OneVarFn, psi: OneVarFn) -> CoordinateChange {
        CoordinateChange {
            m_map: Box::new(|x| (-x).exp()),
            n_map: Box::new(move |xi, eta| {
                let phi_v = phi.eval(eta).unwrap_or(f64::NAN);
                let psi_v = psi.eval(eta).unwrap_or(f64::NAN);
                (phi_v * xi.exp(), psi_v)
            }),
            scaling: Box::new(move |v| chi.inverse_value(v)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub max_abs_residual: f64,
    pub worst_point: (f64, f64, f64),
    pub points_checked: usize,
}

/// Max over the probe points of |scaling(f(x,xi,eta)) - (x' xi' + eta')|
/// under the supplied change of coordinates. A small maximum certifies that
/// the metric is the canonical one in the new coordinates.
pub fn equivalence_to_canonical(
    f: &MetricFunction,
    change: &CoordinateChange,
    probes: &[(f64, f64, f64)],
) -> Result<EquivalenceReport, PdeError> {
    let mut max_abs = 0.0f64;
    let mut worst = (f64::NAN, f64::NAN, f64::NAN);
    for &(x, xi, eta) in probes {
        let value = f.eval(x, xi, eta)?;
        let scaled = (change.scaling)(value)?;
        let xm = (change.m_map)(x);
        let (xim, etam) = (change.n_map)(xi, eta);
        if !(xm.is_finite() && xim.is_finite() && etam.is_finite()) {
            return Err(PdeError::NonFiniteChange(x, xi, eta));
        }
        let r = (scaled - (xm * xim + etam)).abs();
        if r > max_abs {
            max_abs = r;
            worst = (x, xi, eta);
        }
    }
    Ok(EquivalenceReport {
        max_abs_residual: max_abs,
        worst_point: worst,
        points_checked: probes.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicPoint {
    pub v: f64,
    pub phi: f64,
    pub psi: f64,
}

/// Integrates the characteristic pair phi' = -(sigma/tau) phi,
/// psi' = phi/tau from (v0, phi0, psi0) to v1 with a step-doubling
/// Runge-Kutta scheme. The returned trajectory should be checked against
/// the characteristic residuals by the caller; the integrator is not
/// trusted on its own.
pub fn integrate_characteristics(
    sigma: &OneVarFn,
    tau: &OneVarFn,
    v0: f64,
    v1: f64,
    phi0: f64,
    psi0: f64,
    tol: f64,
) -> Result<Vec<CharacteristicPoint>, PdeError> {
    let rhs = |v: f64, y: [f64; 2]| -> Result<[f64; 2], PdeError> {
        let tau_v = tau.eval(v)?;
        if tau_v == 0.0 {
            return Err(PdeError::TauVanishes(v));
        }
        let sigma_v = sigma.eval(v)?;
        Ok([-(sigma_v / tau_v) * y[0], y[0] / tau_v])
    };
    let rk4 = |v: f64, y: [f64; 2], h: f64| -> Result<[f64; 2], PdeError> {
        let k1 = rhs(v, y)?;
        let k2 = rhs(v + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]])?;
        let k3 = rhs(v + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]])?;
        let k4 = rhs(v + h, [y[0] + h * k3[0], y[1] + h * k3[1]])?;
        Ok([
            y[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            y[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        ])
    };

    let span = v1 - v0;
    let direction = if span >= 0.0 { 1.0 } else { -1.0 };
    let mut h = direction * (span.abs() / 16.0).max(1e-6);
    let mut v = v0;
    let mut y = [phi0, psi0];
    let mut out = vec![CharacteristicPoint {
        v,
        phi: phi0,
        psi: psi0,
    }];
    let max_steps = 1_000_000;
    for _ in 0..max_steps {
        if (v1 - v) * direction <= 0.0 {
            break;
        }
        if (v + h - v1) * direction > 0.0 {
            h = v1 - v;
        }
        let full = rk4(v, y, h)?;
        let half = rk4(v, y, 0.5 * h)?;
        let two_half = rk4(v + 0.5 * h, half, 0.5 * h)?;
        // classic step doubling: fifth-order error estimate for RK4
        let err = ((full[0] - two_half[0]).abs()).max((full[1] - two_half[1]).abs()) / 15.0;
        let scale = tol * (1.0 + y[0].abs().max(y[1].abs()));
        if err <= scale {
            v += h;
            y = two_half;
            out.push(CharacteristicPoint {
                v,
                phi: y[0],
                psi: y[1],
            });
            if err > 0.0 {
                h *= (scale / err).powf(0.2).clamp(0.5, 4.0);
            } else {
                h *= 4.0;
            }
        } else {
            h *= (scale / err).powf(0.2).clamp(0.1, 0.9);
            if h.abs() < 1e-14 * (1.0 + v.abs()) {
                return Err(PdeError::StepUnderflow(v));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::canonical_metric;

    #[test]
    fn shift_invariant_family_zeroes_the_reduced_system() {
        let f = case_a0_solution(OneVarFn::Identity).unwrap();
        let ct = reduced_triple_a0();
        for &(x, xi, eta) in &[(0.3, -1.2, 0.8), (1.9, 0.4, -0.6), (-0.5, 1.1, 1.4)] {
            let (r1, r2) = linear_system_residual(&f, &ct, x, xi, eta).unwrap();
            assert!(r1.abs() < 1e-12, "r1 = {r1}");
            assert!(r2.abs() < 1e-12, "r2 = {r2}");
        }
    }

    #[test]
    fn canonical_metric_does_not_sit_in_reduced_coordinates() {
        let ct = reduced_triple_a0();
        let (r1, _) = linear_system_residual(&canonical_metric(), &ct, 0.7, 1.1, 0.2).unwrap();
        // f_x + f_xi = xi + x, generically nonzero
        assert!((r1 - (1.1 + 0.7)).abs() < 1e-14);
    }

    #[test]
    fn constant_metric_zeroes_everything() {
        let f = MetricFunction::from(crate::expr::parse_metric_expr("2.5").unwrap());
        let ct = reduced_triple_a0();
        let (r1, r2) = linear_system_residual(&f, &ct, 0.3, 0.4, 0.5).unwrap();
        assert_eq!((r1, r2), (0.0, 0.0));
    }

    #[test]
    fn compatibility_relation_reference_values() {
        // (x, xi, 1): lambda_x = 1, sigma_xi = 1, tau_xi = 0 -> residual 0
        let ct = reduced_triple_a0();
        let r = coefficient_relation_residual(&ct, 0.9, -0.7, 0.5).unwrap();
        assert!(r.abs() < 1e-14);

        // (x^2, xi, 1): residual = 2x - 1, nonzero away from x = 1/2
        let bad = CoefficientTriple::new(
            OneVarFn::Square,
            TwoVarFn::xi(),
            TwoVarFn::constant(1.0),
        )
        .unwrap();
        let r = coefficient_relation_residual(&bad, 0.9, -0.7, 0.5).unwrap();
        assert!((r - (2.0 * 0.9 - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn exponential_triple_satisfies_both_coefficient_relations() {
        // lambda = e^x, sigma = e^xi, tau = e^xi: the a = 1, b = 0 family
        let ct = CoefficientTriple::new(
            OneVarFn::exp(),
            TwoVarFn::ExpAffine {
                xi: 1.0,
                eta: 0.0,
                scale: 1.0,
                offset: 0.0,
            },
            TwoVarFn::ExpAffine {
                xi: 1.0,
                eta: 0.0,
                scale: 1.0,
                offset: 0.0,
            },
        )
        .unwrap();
        for &(x, xi, eta) in &[(0.4, 0.9, -0.3), (-1.1, -0.5, 0.7)] {
            let (r1, r2, r3) = coefficient_ode_residual(&ct, 1.0, 0.0, x, xi, eta).unwrap();
            assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12 && r3.abs() < 1e-12);
            let r = coefficient_relation_residual(&ct, x, xi, eta).unwrap();
            assert!(r.abs() < 1e-12, "relation residual {r}");
        }
    }

    #[test]
    fn affine_triple_solves_the_separated_equations_with_a_zero() {
        let b = 1.5;
        let ct = CoefficientTriple::new(
            OneVarFn::Affine { a: b, b: 0.3 },
            TwoVarFn::XiPlusFn {
                xi: b,
                coeff: b,
                inner: OneVarFn::Cubic,
                offset: 0.0,
            },
            TwoVarFn::of_eta(OneVarFn::ExpAffine {
                coeff: b,
                rate: 1.0,
                offset: 0.0,
            }),
        )
        .unwrap();
        for &(x, xi, eta) in &[(0.4, 0.9, -0.3), (-1.1, -0.5, 0.7)] {
            let (r1, r2, r3) = coefficient_ode_residual(&ct, 0.0, b, x, xi, eta).unwrap();
            assert!(r1.abs() < 1e-12, "{r1}");
            assert!(r2.abs() < 1e-12, "{r2}");
            assert!(r3.abs() < 1e-12, "{r3}");
        }
    }

    #[test]
    fn nonconstant_lambda_fails_with_zero_parameters() {
        let ct = reduced_triple_a0();
        let (r1, _, _) = coefficient_ode_residual(&ct, 0.0, 0.0, 0.3, 0.1, 0.1).unwrap();
        assert_eq!(r1, 1.0); // lambda_x = 1 != 0
    }

    #[test]
    fn shift_invariant_values() {
        let f = case_a0_solution(OneVarFn::Identity).unwrap();
        assert!(f.eval(1.0, 1.0, 0.7).unwrap().abs() < 1e-15);
        assert!((f.eval(2.0, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        let g = case_a0_solution(OneVarFn::Cubic).unwrap();
        assert!((g.eval(2.0, 1.0, 0.0).unwrap() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn constant_chi_is_rejected() {
        assert!(matches!(
            case_a0_solution(OneVarFn::Const(1.0)),
            Err(PdeError::ConstantFunction { .. })
        ));
        assert!(matches!(
            case_a0_solution(OneVarFn::Square),
            Err(PdeError::ChiNotMonotone(_))
        ));
    }

    #[test]
    fn simplest_anonzero_family() {
        // sigma = 0, tau = 1, phi = 1, psi = v: f = exp(xi - x) + eta
        let sol = case_anonzero_solution(
            OneVarFn::Identity,
            OneVarFn::Const(1.0),
            OneVarFn::Identity,
            OneVarFn::Const(0.0),
            OneVarFn::Const(1.0),
            &[-1.0, 0.0, 0.5, 1.5],
        )
        .unwrap();
        assert!(sol.max_characteristic.0 < 1e-15);
        assert!(sol.max_characteristic.1 < 1e-15);
        let f = &sol.metric;
        let v = f.eval(1.0, 0.5, 2.0).unwrap();
        assert!((v - ((0.5f64 - 1.0).exp() + 2.0)).abs() < 1e-14);
        for &(x, xi, eta) in &[(0.3, -1.2, 0.8), (1.9, 0.4, -0.6)] {
            let (r1, r2) = system15_residual(
                f,
                &OneVarFn::Const(0.0),
                &OneVarFn::Const(1.0),
                x,
                xi,
                eta,
            )
            .unwrap();
            assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12, "({r1}, {r2})");
        }
    }

    #[test]
    fn mismatched_phi_shows_in_the_characteristic_residual() {
        let (r1, _) = characteristic_residuals(
            &OneVarFn::Const(1.0),
            &OneVarFn::Identity,
            &OneVarFn::Const(1.0),
            &OneVarFn::Const(1.0),
            0.0,
        )
        .unwrap();
        assert_eq!(r1, 1.0);
    }

    #[test]
    fn decaying_family_solves_the_constant_coefficient_case() {
        // sigma = 1, tau = 1: phi = e^-v, psi = 1 - e^-v
        let phi = OneVarFn::exp_neg();
        let psi = OneVarFn::ExpAffine {
            coeff: -1.0,
            rate: -1.0,
            offset: 1.0,
        };
        let sol = case_anonzero_solution(
            OneVarFn::Identity,
            phi,
            psi,
            OneVarFn::Const(1.0),
            OneVarFn::Const(1.0),
            &[-1.5, -0.4, 0.0, 0.7, 1.8],
        )
        .unwrap();
        assert!(sol.max_characteristic.0 < 1e-14);
        assert!(sol.max_characteristic.1 < 1e-14);
        for &(x, xi, eta) in &[(0.3, -1.2, 0.8), (1.9, 0.4, -0.6), (-0.8, 1.3, 1.1)] {
            let (r1, r2) = system15_residual(
                &sol.metric,
                &OneVarFn::Const(1.0),
                &OneVarFn::Const(1.0),
                x,
                xi,
                eta,
            )
            .unwrap();
            assert!(r1.abs() < 1e-12 && r2.abs() < 1e-12, "({r1}, {r2})");
        }
    }

    #[test]
    fn integration_matches_the_closed_forms() {
        // sigma = 1, tau = 1 from (0, 1, 0): phi = e^-v, psi = 1 - e^-v
        let path = integrate_characteristics(
            &OneVarFn::Const(1.0),
            &OneVarFn::Const(1.0),
            0.0,
            2.0,
            1.0,
            0.0,
            1e-10,
        )
        .unwrap();
        let last = path.last().unwrap();
        assert!((last.v - 2.0).abs() < 1e-12);
        assert!((last.phi - (-2.0f64).exp()).abs() < 1e-8);
        assert!((last.psi - (1.0 - (-2.0f64).exp())).abs() < 1e-8);
    }

    #[test]
    fn equivalence_of_the_shift_invariant_family() {
        let chi = OneVarFn::Cubic;
        let f = case_a0_solution(chi).unwrap();
        let change = CoordinateChange::for_case_a0(chi);
        let probes = [
            (0.3, -1.2, 0.8),
            (1.9, 0.4, -0.6),
            (-0.5, 1.1, 1.4),
            (-1.7, -0.2, -1.0),
        ];
        let report = equivalence_to_canonical(&f, &change, &probes).unwrap();
        assert!(report.max_abs_residual < 1e-9, "{}", report.max_abs_residual);
    }

    #[test]
    fn canonical_is_equivalent_to_itself() {
        let report = equivalence_to_canonical(
            &canonical_metric(),
            &CoordinateChange::identity(),
            &[(0.3, -1.2, 0.8), (1.9, 0.4, -0.6)],
        )
        .unwrap();
        assert_eq!(report.max_abs_residual, 0.0);
    }

    #[test]
    fn equivalence_of_the_simplest_anonzero_metric() {
        // f = exp(xi - x) + eta maps to canonical under x -> exp(-x),
        // xi -> exp(xi), eta -> eta.
        let sol = case_anonzero_solution(
            OneVarFn::Identity,
            OneVarFn::Const(1.0),
            OneVarFn::Identity,
            OneVarFn::Const(0.0),
            OneVarFn::Const(1.0),
            &[0.0],
        )
        .unwrap();
        let change = CoordinateChange::for_case_anonzero(
            OneVarFn::Identity,
            OneVarFn::Const(1.0),
            OneVarFn::Identity,
        );
        let report = equivalence_to_canonical(
            &sol.metric,
            &change,
            &[(0.3, -1.2, 0.8), (1.9, 0.4, -0.6), (-0.8, 1.3, 1.1)],
        )
        .unwrap();
        assert!(report.max_abs_residual < 1e-12, "{}", report.max_abs_residual);
    }

    #[test]
    fn inadmissible_triples_are_rejected() {
        assert!(matches!(
            CoefficientTriple::new(
                OneVarFn::Const(0.0),
                TwoVarFn::xi(),
                TwoVarFn::constant(1.0)
            ),
            Err(PdeError::ZeroLambda)
        ));
        assert!(matches!(
            CoefficientTriple::new(
                OneVarFn::Identity,
                TwoVarFn::constant(0.0),
                TwoVarFn::constant(0.0)
            ),
            Err(PdeError::ZeroSigmaTau)
        ));
    }
}
