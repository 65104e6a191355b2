use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{DomainBox, VerifyError};

pub const DEFAULT_SAMPLES: usize = 256;
pub const DEFAULT_ATOL: f64 = 1e-9;
pub const DEFAULT_RTOL: f64 = 1e-9;
pub const DEFAULT_KINK_MARGIN: f64 = 1e-7;
pub const DEFAULT_K_MAX: u32 = 16;
pub const DEFAULT_SEED: u64 = 0;

/// Controls stochastic verification.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SamplePlan {
    pub seed: u64,
    pub sample_count: usize,
    pub atol: f64,
    pub rtol: f64,
    pub kink_margin: f64,
    pub k_max: u32,
}

impl Default for SamplePlan {
    fn default() -> SamplePlan {
        SamplePlan {
            seed: DEFAULT_SEED,
            sample_count: DEFAULT_SAMPLES,
            atol: DEFAULT_ATOL,
            rtol: DEFAULT_RTOL,
            kink_margin: DEFAULT_KINK_MARGIN,
            k_max: DEFAULT_K_MAX,
        }
    }
}

impl SamplePlan {
    pub fn validate(&self) -> Result<(), VerifyError> {
        let bad = |what: &str| Err(VerifyError::InvalidPlan(what.to_string()));
        if self.sample_count == 0 {
            return bad("sample_count must be at least 1");
        }
        if !(self.atol >= 0.0 && self.atol.is_finite())
            || !(self.rtol >= 0.0 && self.rtol.is_finite())
        {
            return bad("atol and rtol must be finite and non-negative");
        }
        if !(self.kink_margin >= 0.0 && self.kink_margin.is_finite()) {
            return bad("kink margin must be finite and non-negative");
        }
        if self.k_max < 2 {
            return bad("k_max must be at least 2");
        }
        Ok(())
    }

    /// `atol + rtol·|scale|`.
    pub fn tolerance(&self, scale: f64) -> f64 {
        self.atol + self.rtol * scale.abs()
    }

    /// Point for sample `index`, retry `attempt`.
    ///
    /// The stream depends only on `(seed, index, attempt)`, so results do
    /// not depend on evaluation order.
    pub fn sample_point(&self, domain: &DomainBox, index: u64, attempt: u32) -> Vec<f64> {
        let key = self
            .seed
            .wrapping_add(u64::from(attempt).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let mut rng = ChaCha8Rng::seed_from_u64(key);
        rng.set_stream(index);
        domain
            .intervals()
            .iter()
            .map(|iv| rng.random_range(iv.lo..=iv.hi))
            .collect()
    }
}
