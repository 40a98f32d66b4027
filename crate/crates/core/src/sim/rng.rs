//! Seeded random streams with one independent substream per purpose.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Uniform};

use crate::model::DayRange;

/// Substream identifiers. Retailer arrival streams start at `ARRIVALS`.
pub mod purpose {
    pub const SUPPLIER_LEAD_TIME: u64 = 1;
    pub const TRIP: u64 = 2;
    pub const ARRIVALS: u64 = 1_000;
}

/// A deterministic stream: ChaCha8 keyed by the replication seed, with the
/// purpose selecting the ChaCha stream number.
#[derive(Debug, Clone)]
pub struct RngStream {
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, purpose: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(purpose);
        Self { rng }
    }

    pub fn arrivals(seed: u64, retailer: usize) -> Self {
        Self::new(seed, purpose::ARRIVALS + retailer as u64)
    }

    pub fn uniform01(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn inner(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum DistError {
    #[error("exponential rate must be positive and finite, got {0}")]
    Rate(f64),
    #[error("uniform range requires lo <= hi, got [{0}, {1}]")]
    Range(f64, f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dist {
    Exponential { rate: f64 },
    UniformRange { lo: f64, hi: f64 },
}

impl From<DayRange> for Dist {
    fn from(r: DayRange) -> Self {
        Dist::UniformRange { lo: r.lo, hi: r.hi }
    }
}

/// One draw from `dist`.
pub fn draw(stream: &mut RngStream, dist: Dist) -> Result<f64, DistError> {
    match dist {
        Dist::Exponential { rate } => {
            if !(rate > 0.0 && rate.is_finite()) {
                return Err(DistError::Rate(rate));
            }
            let exp = Exp::new(rate).map_err(|_| DistError::Rate(rate))?;
            Ok(exp.sample(stream.inner()))
        }
        Dist::UniformRange { lo, hi } => {
            if !(lo <= hi && lo.is_finite() && hi.is_finite()) {
                return Err(DistError::Range(lo, hi));
            }
            if lo == hi {
                return Ok(lo);
            }
            let u = Uniform::new_inclusive(lo, hi).map_err(|_| DistError::Range(lo, hi))?;
            Ok(u.sample(stream.inner()))
        }
    }
}
