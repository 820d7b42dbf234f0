//! Scalar abstraction shared by plain-value and dual-number evaluation.
//!
//! Every metric function in this crate can be evaluated over any [`Scalar`]:
//! with `f64` it yields the plain value, with [`crate::diff::Jet`] it yields
//! the value together with the three first partial derivatives in a single
//! pass. Fallible operations (`checked_*`) return a [`DomainError`] instead
//! of silently producing NaN or infinities.

use std::ops::{Add, Mul, Neg, Sub};

/// An evaluation left the real domain: division by zero, logarithm of a
/// non-positive value, a negative base raised to a non-integer power, or an
/// overflow to a non-finite value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainError {
    reason: String,
    context: Option<String>,
}

impl std::error::Error for DomainError {}

impl DomainError {
    pub fn new(reason: impl Into<String>) -> Self {
        DomainError {
            reason: reason.into(),
            context: None,
        }
    }

    /// Attaches the offending node/function name. The innermost context wins,
    /// so evaluators can call this at every level without clobbering the
    /// original source of the error.
    pub fn with_context(mut self, context: impl Into<String>) -> Self {
        if self.context.is_none() {
            self.context = Some(context.into());
        }
        self
    }

    pub fn reason(&self) -> &str {
        &self.reason
    }

    pub fn context(&self) -> Option<&str> {
        self.context.as_deref()
    }
}

impl std::fmt::Display for DomainError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.context {
            Some(ctx) => write!(f, "domain error in `{ctx}`: {}", self.reason),
            None => write!(f, "domain error: {}", self.reason),
        }
    }
}

/// Number-like type the evaluators are generic over.
///
/// `f64` implements it with ordinary arithmetic; `Jet` implements it with
/// forward-mode dual arithmetic so that the chain rule is applied exactly.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;

    /// The plain value carried by this scalar.
    fn value(&self) -> f64;

    fn checked_div(self, rhs: Self) -> Result<Self, DomainError>;
    fn checked_exp(self) -> Result<Self, DomainError>;
    fn checked_ln(self) -> Result<Self, DomainError>;
    fn checked_sqrt(self) -> Result<Self, DomainError>;
    fn checked_pow(self, exponent: Self) -> Result<Self, DomainError>;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tanh(self) -> Self;
}

/// Exponent treated as an integer power when it is an exact integer of
/// magnitude at most this bound (`powi` then applies for negative bases).
pub(crate) const MAX_INTEGER_EXPONENT: f64 = 1e9;

pub(crate) fn as_integer_exponent(e: f64) -> Option<i32> {
    if e.fract() == 0.0 && e.abs() <= MAX_INTEGER_EXPONENT {
        Some(e as i32)
    } else {
        None
    }
}

fn ensure_finite(v: f64) -> Result<f64, DomainError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(DomainError::new("result is not finite"))
    }
}

impl Scalar for f64 {
    fn constant(v: f64) -> Self {
        v
    }

    fn value(&self) -> f64 {
        *self
    }

    fn checked_div(self, rhs: Self) -> Result<Self, DomainError> {
        if rhs == 0.0 {
            return Err(DomainError::new("division by zero"));
        }
        ensure_finite(self / rhs)
    }

    fn checked_exp(self) -> Result<Self, DomainError> {
        ensure_finite(self.exp())
    }

    fn checked_ln(self) -> Result<Self, DomainError> {
        if self <= 0.0 {
            return Err(DomainError::new(format!(
                "logarithm of non-positive value {self}"
            )));
        }
        ensure_finite(self.ln())
    }

    fn checked_sqrt(self) -> Result<Self, DomainError> {
        if self < 0.0 {
            return Err(DomainError::new(format!(
                "square root of negative value {self}"
            )));
        }
        Ok(self.sqrt())
    }

    fn checked_pow(self, exponent: Self) -> Result<Self, DomainError> {
        match as_integer_exponent(exponent) {
            Some(k) => {
                if self == 0.0 && k < 0 {
                    return Err(DomainError::new("zero base with negative exponent"));
                }
                ensure_finite(self.powi(k))
            }
            None => {
                if self < 0.0 {
                    return Err(DomainError::new(format!(
                        "negative base {self} with non-integer exponent {exponent}"
                    )));
                }
                if self == 0.0 && exponent < 0.0 {
                    return Err(DomainError::new("zero base with negative exponent"));
                }
                ensure_finite(self.powf(exponent))
            }
        }
    }

    fn sin(self) -> Self {
        f64::sin(self)
    }

    fn cos(self) -> Self {
        f64::cos(self)
    }

    fn tanh(self) -> Self {
        f64::tanh(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f64_division_by_zero_is_domain_error() {
        assert!(1.0f64.checked_div(0.0).is_err());
        assert_eq!(6.0f64.checked_div(3.0).unwrap(), 2.0);
    }

    #[test]
    fn f64_pow_rules() {
        assert_eq!((-2.0f64).checked_pow(3.0).unwrap(), -8.0);
        assert!((-2.0f64).checked_pow(0.5).is_err());
        assert!(0.0f64.checked_pow(-1.0).is_err());
        assert_eq!(4.0f64.checked_pow(0.5).unwrap(), 2.0);
    }

    #[test]
    fn overflow_is_reported() {
        assert!(1e300f64.checked_pow(2.0).is_err());
        assert!(1000.0f64.checked_exp().is_err());
    }

    #[test]
    fn context_is_innermost() {
        let e = DomainError::new("division by zero")
            .with_context("1/x")
            .with_context("outer");
        assert_eq!(e.context(), Some("1/x"));
        assert_eq!(e.to_string(), "domain error in `1/x`: division by zero");
    }
}
