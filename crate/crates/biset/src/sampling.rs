//! Seeded random draws of coordinates, corteges, triples and motions.
//!
//! Probe coordinates are drawn from the two-sided band
//! `[-max_abs, -min_abs] U [min_abs, max_abs]`, which keeps them away from
//! the measure-zero degeneracies (xi = 0, coincident x) while exercising
//! both signs. All sampling goes through a ChaCha stream seeded explicitly,
//! so every sweep is reproducible.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::geometry::Cortege32;
use crate::motions::Motion;

/// Two-sided magnitude band coordinates are drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoordRange {
    min_abs: f64,
    max_abs: f64,
}

impl CoordRange {
    pub fn new(min_abs: f64, max_abs: f64) -> Result<CoordRange, String> {
        if !(min_abs.is_finite() && max_abs.is_finite() && 0.0 < min_abs && min_abs < max_abs) {
            return Err(format!(
                "range must satisfy 0 < min < max and be finite, got {min_abs}:{max_abs}"
            ));
        }
        Ok(CoordRange { min_abs, max_abs })
    }

    pub fn min_abs(&self) -> f64 {
        self.min_abs
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs
    }

    /// Minimum pairwise separation enforced between the three M-coordinates
    /// of a sampled cortege: 2.5% of the band width.
    pub fn x_separation(&self) -> f64 {
        0.025 * (self.max_abs - self.min_abs)
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        let magnitude = rng.random_range(self.min_abs..=self.max_abs);
        if rng.random_bool(0.5) {
            magnitude
        } else {
            -magnitude
        }
    }
}

impl Default for CoordRange {
    fn default() -> Self {
        CoordRange {
            min_abs: 0.1,
            max_abs: 2.0,
        }
    }
}

impl fmt::Display for CoordRange {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.min_abs, self.max_abs)
    }
}

impl FromStr for CoordRange {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (lo, hi) = s
            .split_once(':')
            .ok_or_else(|| format!("expected MIN:MAX, got `{s}`"))?;
        let min_abs: f64 = lo.trim().parse().map_err(|_| format!("bad number `{lo}`"))?;
        let max_abs: f64 = hi.trim().parse().map_err(|_| format!("bad number `{hi}`"))?;
        CoordRange::new(min_abs, max_abs)
    }
}

pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One coordinate triple (x, xi, eta).
pub fn sample_triple(rng: &mut impl Rng, range: &CoordRange) -> (f64, f64, f64) {
    (range.sample(rng), range.sample(rng), range.sample(rng))
}

/// Three pairwise separated M-coordinates.
pub fn sample_xs(rng: &mut impl Rng, range: &CoordRange) -> [f64; 3] {
    let sep = range.x_separation();
    loop {
        let xs = [range.sample(rng), range.sample(rng), range.sample(rng)];
        let ok = (xs[0] - xs[1]).abs() >= sep
            && (xs[0] - xs[2]).abs() >= sep
            && (xs[1] - xs[2]).abs() >= sep;
        if ok {
            return xs;
        }
    }
}

/// A generic cortege: separated x coordinates, all five N-coordinates in
/// the band (so xi_alpha, xi_beta never vanish).
pub fn sample_cortege(rng: &mut impl Rng, range: &CoordRange) -> Cortege32 {
    let xs = sample_xs(rng, range);
    Cortege32::new(
        xs,
        (range.sample(rng), range.sample(rng)),
        (range.sample(rng), range.sample(rng)),
    )
}

/// A motion with scale in the band +/-[0.5, 2] and shift in [-2, 2].
pub fn sample_motion(rng: &mut impl Rng) -> Motion {
    let a_mag = rng.random_range(0.5..=2.0);
    let a = if rng.random_bool(0.5) { a_mag } else { -a_mag };
    let b = rng.random_range(-2.0..=2.0);
    Motion::new(a, b).expect("sampled scale is always valid")
}
