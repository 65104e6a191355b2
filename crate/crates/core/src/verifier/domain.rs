use serde::Serialize;

use super::VerifyError;

/// Closed interval `[lo, hi]` with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Interval, VerifyError> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(VerifyError::InvalidInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    /// Distance from `v` to the interval, 0 inside.
    pub fn excess(&self, v: f64) -> f64 {
        if v < self.lo {
            self.lo - v
        } else if v > self.hi {
            v - self.hi
        } else {
            0.0
        }
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Axis-aligned box `∏ [loᵢ, hiᵢ]`; the domain `A` (n = 1) or `Aⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainBox {
    intervals: Vec<Interval>,
}

impl DomainBox {
    pub fn new(intervals: Vec<Interval>) -> Result<DomainBox, VerifyError> {
        if intervals.is_empty() {
            return Err(VerifyError::EmptyDomain);
        }
        Ok(DomainBox { intervals })
    }

    /// `[lo, hi]ⁿ`.
    pub fn uniform(n: usize, lo: f64, hi: f64) -> Result<DomainBox, VerifyError> {
        let iv = Interval::new(lo, hi)?;
        DomainBox::new(vec![iv; n])
    }

    pub fn dim(&self) -> usize {
        self.intervals.len()
    }

    pub fn intervals(&self) -> &[Interval] {
        &self.intervals
    }

    /// The shared interval when every coordinate uses the same one.
    pub fn common_interval(&self) -> Option<Interval> {
        let first = self.intervals[0];
        self.intervals
            .iter()
            .all(|iv| *iv == first)
            .then_some(first)
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        point.len() == self.dim()
            && self
                .intervals
                .iter()
                .zip(point)
                .all(|(iv, &v)| iv.contains(v))
    }
}
