use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the two-community random graph experiment.
///
/// The vertex set has `2n + delta` vertices split into an initially red side
/// of size `n + delta` and an initially blue side of size `n`; every
/// unordered pair is an edge independently with probability `p`.
///
/// `p = 0` and `p = 1` are accepted (empty / complete graph, degenerate but
/// well defined); values outside `[0, 1]` are rejected.  Analytic quantities
/// that blow up at the boundary perform their own stricter check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Blue-side size; the red side has `n + delta` vertices.
    pub n: u64,
    /// Red-side surplus (the initial advantage).
    pub delta: u64,
    /// Edge probability.
    pub p: f64,
}

impl ModelParams {
    pub fn new(n: u64, delta: u64, p: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("n must be at least 1"));
        }
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!(
                "edge probability must lie in [0, 1], got {p}"
            )));
        }
        Ok(ModelParams { n, delta, p })
    }

    /// Total number of vertices `2n + delta`.
    pub fn total_vertices(&self) -> u64 {
        2 * self.n + self.delta
    }

    /// Initial red-side size `n + delta`.
    pub fn red_size(&self) -> u64 {
        self.n + self.delta
    }

    /// `n` as f64, the natural scale for all asymptotic expressions.
    pub fn nf(&self) -> f64 {
        self.n as f64
    }

    /// `p (1 - p)`, the per-edge variance factor.
    pub fn pq(&self) -> f64 {
        self.p * (1.0 - self.p)
    }

    /// Errors unless `0 < p < 1`.
    pub fn require_nondegenerate(&self, what: &'static str) -> Result<()> {
        if self.p <= 0.0 || self.p >= 1.0 {
            return Err(Error::DegenerateProbability { what, p: self.p });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_degenerate_probabilities() {
        assert!(ModelParams::new(1, 0, 0.0).is_ok());
        assert!(ModelParams::new(1, 0, 1.0).is_ok());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(ModelParams::new(10, 0, -0.1).is_err());
        assert!(ModelParams::new(10, 0, 1.1).is_err());
        assert!(ModelParams::new(10, 0, f64::NAN).is_err());
        assert!(ModelParams::new(0, 0, 0.5).is_err());
    }

    #[test]
    fn sizes() {
        let params = ModelParams::new(100, 3, 0.5).unwrap();
        assert_eq!(params.total_vertices(), 203);
        assert_eq!(params.red_size(), 103);
    }
}
