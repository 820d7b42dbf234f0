//! Forward-mode dual numbers over the three coordinates `x`, `xi`, `eta`.
//!
//! A [`Jet`] carries a value and the three first partial derivatives. All
//! arithmetic applies the chain rule exactly, so the partials returned by
//! [`evaluate_with_partials`] have no truncation error; the only noise is
//! ordinary floating-point rounding. [`finite_difference_partials`] is the
//! independent central-difference oracle used to cross-check that path.

use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::geometry::MetricFunction;
use crate::scalar::{as_integer_exponent, DomainError, Scalar};

/// Value of a function together with its three first partial derivatives
/// (f; f_x, f_xi, f_eta) at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub d_x: f64,
    pub d_xi: f64,
    pub d_eta: f64,
}

impl Jet {
    pub const fn constant(value: f64) -> Jet {
        Jet {
            value,
            d_x: 0.0,
            d_xi: 0.0,
            d_eta: 0.0,
        }
    }

    /// The coordinate `x` as a jet: unit derivative in the x slot.
    pub const fn seed_x(value: f64) -> Jet {
        Jet {
            value,
            d_x: 1.0,
            d_xi: 0.0,
            d_eta: 0.0,
        }
    }

    pub const fn seed_xi(value: f64) -> Jet {
        Jet {
            value,
            d_x: 0.0,
            d_xi: 1.0,
            d_eta: 0.0,
        }
    }

    pub const fn seed_eta(value: f64) -> Jet {
        Jet {
            value,
            d_x: 0.0,
            d_xi: 0.0,
            d_eta: 1.0,
        }
    }

    pub fn gradient(&self) -> [f64; 3] {
        [self.d_x, self.d_xi, self.d_eta]
    }

    fn is_gradient_zero(&self) -> bool {
        self.d_x == 0.0 && self.d_xi == 0.0 && self.d_eta == 0.0
    }

    /// Chain rule for a univariate function: value `v`, derivative factor `d`.
    fn lift(&self, v: f64, d: f64) -> Jet {
        Jet {
            value: v,
            d_x: d * self.d_x,
            d_xi: d * self.d_xi,
            d_eta: d * self.d_eta,
        }
    }

    fn all_finite(&self) -> bool {
        self.value.is_finite()
            && self.d_x.is_finite()
            && self.d_xi.is_finite()
            && self.d_eta.is_finite()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, rhs: Jet) -> Jet {
        Jet {
            value: self.value + rhs.value,
            d_x: self.d_x + rhs.d_x,
            d_xi: self.d_xi + rhs.d_xi,
            d_eta: self.d_eta + rhs.d_eta,
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, rhs: Jet) -> Jet {
        Jet {
            value: self.value - rhs.value,
            d_x: self.d_x - rhs.d_x,
            d_xi: self.d_xi - rhs.d_xi,
            d_eta: self.d_eta - rhs.d_eta,
        }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, rhs: Jet) -> Jet {
        Jet {
            value: self.value * rhs.value,
            d_x: self.d_x * rhs.value + self.value * rhs.d_x,
            d_xi: self.d_xi * rhs.value + self.value * rhs.d_xi,
            d_eta: self.d_eta * rhs.value + self.value * rhs.d_eta,
        }
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            value: -self.value,
            d_x: -self.d_x,
            d_xi: -self.d_xi,
            d_eta: -self.d_eta,
        }
    }
}

fn ensure_finite_jet(j: Jet) -> Result<Jet, DomainError> {
    if j.all_finite() {
        Ok(j)
    } else {
        Err(DomainError::new("result is not finite"))
    }
}

impl Scalar for Jet {
    fn constant(v: f64) -> Self {
        Jet::constant(v)
    }

    fn value(&self) -> f64 {
        self.value
    }

    fn checked_div(self, rhs: Self) -> Result<Self, DomainError> {
        if rhs.value == 0.0 {
            return Err(DomainError::new("division by zero"));
        }
        let v = self.value / rhs.value;
        let den = rhs.value * rhs.value;
        ensure_finite_jet(Jet {
            value: v,
            d_x: (self.d_x * rhs.value - self.value * rhs.d_x) / den,
            d_xi: (self.d_xi * rhs.value - self.value * rhs.d_xi) / den,
            d_eta: (self.d_eta * rhs.value - self.value * rhs.d_eta) / den,
        })
    }

    fn checked_exp(self) -> Result<Self, DomainError> {
        let v = self.value.exp();
        ensure_finite_jet(self.lift(v, v))
    }

    fn checked_ln(self) -> Result<Self, DomainError> {
        if self.value <= 0.0 {
            return Err(DomainError::new(format!(
                "logarithm of non-positive value {}",
                self.value
            )));
        }
        ensure_finite_jet(self.lift(self.value.ln(), 1.0 / self.value))
    }

    fn checked_sqrt(self) -> Result<Self, DomainError> {
        if self.value < 0.0 {
            return Err(DomainError::new(format!(
                "square root of negative value {}",
                self.value
            )));
        }
        if self.value == 0.0 {
            if self.is_gradient_zero() {
                return Ok(Jet::constant(0.0));
            }
            return Err(DomainError::new("square root derivative at zero"));
        }
        let v = self.value.sqrt();
        ensure_finite_jet(self.lift(v, 0.5 / v))
    }

    fn checked_pow(self, exponent: Self) -> Result<Self, DomainError> {
        if exponent.is_gradient_zero() {
            let c = exponent.value;
            if let Some(k) = as_integer_exponent(c) {
                if self.value == 0.0 && k < 0 {
                    return Err(DomainError::new("zero base with negative exponent"));
                }
                let v = self.value.powi(k);
                let d = if k == 0 { 0.0 } else { c * self.value.powi(k - 1) };
                return ensure_finite_jet(self.lift(v, d));
            }
            if self.value < 0.0 {
                return Err(DomainError::new(format!(
                    "negative base {} with non-integer exponent {c}",
                    self.value
                )));
            }
            if self.value == 0.0 {
                if c < 0.0 {
                    return Err(DomainError::new("zero base with negative exponent"));
                }
                // c > 1 has derivative 0 at 0; smaller fractional powers have
                // a singular derivative there.
                if c > 1.0 {
                    return Ok(Jet::constant(0.0));
                }
                return Err(DomainError::new(
                    "fractional power has a singular derivative at zero",
                ));
            }
            let v = self.value.powf(c);
            return ensure_finite_jet(self.lift(v, c * v / self.value));
        }
        // Variable exponent: f^g = exp(g ln f), needs f > 0.
        if self.value <= 0.0 {
            return Err(DomainError::new(format!(
                "non-positive base {} with variable exponent",
                self.value
            )));
        }
        let ln_f = self.checked_ln()?;
        (exponent * ln_f).checked_exp()
    }

    fn sin(self) -> Self {
        self.lift(self.value.sin(), self.value.cos())
    }

    fn cos(self) -> Self {
        self.lift(self.value.cos(), -self.value.sin())
    }

    fn tanh(self) -> Self {
        let t = self.value.tanh();
        self.lift(t, 1.0 - t * t)
    }
}

/// Evaluates a metric function and its three partials in one dual-number
/// pass. The partials are exact to rounding: no step size is involved.
pub fn evaluate_with_partials(
    f: &MetricFunction,
    x: f64,
    xi: f64,
    eta: f64,
) -> Result<Jet, DomainError> {
    f.eval_scalar(Jet::seed_x(x), Jet::seed_xi(xi), Jet::seed_eta(eta))
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiffError {
    #[error("finite-difference step must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

/// Central-difference approximations of the three partials, the independent
/// oracle for the dual-number path. Error is O(h^2) for smooth functions.
pub fn finite_difference_partials(
    f: &MetricFunction,
    x: f64,
    xi: f64,
    eta: f64,
    h: f64,
) -> Result<(f64, f64, f64), DiffError> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(DiffError::InvalidStep(h));
    }
    let dx = (f.eval(x + h, xi, eta)? - f.eval(x - h, xi, eta)?) / (2.0 * h);
    let dxi = (f.eval(x, xi + h, eta)? - f.eval(x, xi - h, eta)?) / (2.0 * h);
    let deta = (f.eval(x, xi, eta + h)? - f.eval(x, xi, eta - h)?) / (2.0 * h);
    Ok((dx, dxi, deta))
}
