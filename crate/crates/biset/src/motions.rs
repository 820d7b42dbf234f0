//! The two-parameter motion group of the canonical geometry:
//! x' = a*x + b, xi' = xi/a, eta' = eta - b*xi/a, with a != 0.
//!
//! Every motion preserves x*xi + eta at every pair of points, which is
//! exactly the gauge freedom left over when coordinates are recovered from
//! a measurement table.

use thiserror::Error;

/// Smallest allowed |a|; anything below cannot be inverted in f64.
pub const MIN_SCALE: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum MotionError {
    #[error("motion scale must satisfy |a| > {MIN_SCALE:e} and be finite, got {0}")]
    InvalidScale(f64),
    #[error("motion shift must be finite, got {0}")]
    InvalidShift(f64),
}

/// One element (a, b) of the motion group.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Motion {
    a: f64,
    b: f64,
}

impl Motion {
    pub fn new(a: f64, b: f64) -> Result<Motion, MotionError> {
        if !(a.is_finite() && a.abs() > MIN_SCALE) {
            return Err(MotionError::InvalidScale(a));
        }
        if !b.is_finite() {
            return Err(MotionError::InvalidShift(b));
        }
        Ok(Motion { a, b })
    }

    pub const fn identity() -> Motion {
        Motion { a: 1.0, b: 0.0 }
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Transforms a full coordinate triple of both manifolds.
    pub fn apply(&self, x: f64, xi: f64, eta: f64) -> (f64, f64, f64) {
        (
            self.a * x + self.b,
            xi / self.a,
            eta - self.b * xi / self.a,
        )
    }

    /// The motion equal to applying `first`, then `self`:
    /// (a, b) = (self.a * first.a, self.a * first.b + self.b).
    pub fn compose(&self, first: &Motion) -> Motion {
        Motion {
            a: self.a * first.a,
            b: self.a * first.b + self.b,
        }
    }

    /// The group inverse (1/a, -b/a).
    pub fn inverse(&self) -> Motion {
        Motion {
            a: 1.0 / self.a,
            b: -self.b / self.a,
        }
    }

    /// (x'*xi' + eta') - (x*xi + eta) after applying the motion; zero up to
    /// rounding for every motion and every triple.
    pub fn invariance_residual(&self, x: f64, xi: f64, eta: f64) -> f64 {
        let (xp, xip, etap) = self.apply(x, xi, eta);
        (xp * xip + etap) - (x * xi + eta)
    }
}
