//! Exact binomial comparison oracles.
//!
//! Everything here is exact up to f64 rounding: pmfs are built in log space
//! from the compensated log-factorial table, normalized once, and all
//! summations are Kahan-compensated.  These routines are the ground truth the
//! first-order formulas in [`crate::analytic`] are validated against.

use crate::error::{Error, Result};
use crate::numeric::{log_sum_exp, Kahan};

/// A probability mass function on a contiguous integer range, stored as
/// normalized log weights (`-inf` marks structural zeros).
#[derive(Debug, Clone)]
pub struct Pmf {
    support_offset: i64,
    log_weights: Vec<f64>,
}

impl Pmf {
    /// Builds a pmf from unnormalized log weights starting at `offset`,
    /// trimming zero-probability edges and applying one exp-normalize pass.
    pub fn from_log_weights(offset: i64, mut log_weights: Vec<f64>) -> Result<Pmf> {
        let first = log_weights.iter().position(|w| *w > f64::NEG_INFINITY);
        let Some(first) = first else {
            return Err(Error::invalid("pmf has no positive mass"));
        };
        let last = log_weights
            .iter()
            .rposition(|w| *w > f64::NEG_INFINITY)
            .unwrap();
        log_weights.truncate(last + 1);
        log_weights.drain(..first);
        let norm = log_sum_exp(log_weights.iter().copied());
        if !norm.is_finite() {
            return Err(Error::NumericOverflow("pmf normalization"));
        }
        for w in &mut log_weights {
            *w -= norm;
        }
        Ok(Pmf {
            support_offset: offset + first as i64,
            log_weights,
        })
    }

    /// The `Bin(n, p)` distribution; `p = 0` and `p = 1` are point masses.
    pub fn binomial(n: u64, p: f64) -> Result<Pmf> {
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(format!("binomial p out of range: {p}")));
        }
        if n > 50_000_000 {
            return Err(Error::invalid(format!("binomial n = {n} too large")));
        }
        if p == 0.0 || p == 1.0 {
            let at = if p == 0.0 { 0 } else { n as i64 };
            return Pmf::from_log_weights(at, vec![0.0]);
        }
        let ln_p = p.ln();
        let ln_q = (1.0 - p).ln();
        let lw: Vec<f64> = (0..=n)
            .map(|k| crate::numeric::ln_binom(n, k) + k as f64 * ln_p + (n - k) as f64 * ln_q)
            .collect();
        Pmf::from_log_weights(0, lw)
    }

    pub fn min_value(&self) -> i64 {
        self.support_offset
    }

    pub fn max_value(&self) -> i64 {
        self.support_offset + self.log_weights.len() as i64 - 1
    }

    pub fn support_len(&self) -> usize {
        self.log_weights.len()
    }

    pub fn log_prob(&self, k: i64) -> f64 {
        if k < self.min_value() || k > self.max_value() {
            f64::NEG_INFINITY
        } else {
            self.log_weights[(k - self.support_offset) as usize]
        }
    }

    pub fn prob(&self, k: i64) -> f64 {
        self.log_prob(k).exp()
    }

    /// Linear-space weights over the support, in order.
    pub fn probs(&self) -> Vec<f64> {
        self.log_weights.iter().map(|w| w.exp()).collect()
    }

    /// Total mass (should be 1 after normalization; exposed for invariants).
    pub fn total_mass(&self) -> f64 {
        let mut acc = Kahan::new();
        for w in &self.log_weights {
            acc.add(w.exp());
        }
        acc.total()
    }

    pub fn mean(&self) -> f64 {
        let mut acc = Kahan::new();
        for (i, w) in self.log_weights.iter().enumerate() {
            acc.add((self.support_offset + i as i64) as f64 * w.exp());
        }
        acc.total()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let mut acc = Kahan::new();
        for (i, w) in self.log_weights.iter().enumerate() {
            let d = (self.support_offset + i as i64) as f64 - m;
            acc.add(d * d * w.exp());
        }
        acc.total()
    }

    /// Distribution of `-X`.
    pub fn negated(&self) -> Pmf {
        let mut lw = self.log_weights.clone();
        lw.reverse();
        Pmf {
            support_offset: -self.max_value(),
            log_weights: lw,
        }
    }

    /// `P[X <= k]` for every support point, plus implied 0/1 outside.
    fn cdf(&self) -> Vec<f64> {
        let mut acc = Kahan::new();
        self.log_weights
            .iter()
            .map(|w| {
                acc.add(w.exp());
                acc.total().min(1.0)
            })
            .collect()
    }

    /// `P[X >= k]` for every support point (computed backwards for accuracy).
    fn survival(&self) -> Vec<f64> {
        let mut acc = Kahan::new();
        let mut out = vec![0.0; self.log_weights.len()];
        for (i, w) in self.log_weights.iter().enumerate().rev() {
            acc.add(w.exp());
            out[i] = acc.total().min(1.0);
        }
        out
    }

    /// `P[X <= k]` for arbitrary `k`.
    pub fn cdf_at(&self, k: i64) -> f64 {
        if k < self.min_value() {
            0.0
        } else if k >= self.max_value() {
            1.0
        } else {
            self.cdf()[(k - self.support_offset) as usize]
        }
    }
}

fn first_size(n: u64, tau: i64) -> Result<u64> {
    let m = n as i64 + tau;
    if m < 0 {
        return Err(Error::invalid(format!(
            "first binomial has negative size n + tau = {m}"
        )));
    }
    Ok(m as u64)
}

/// `P[X >= Y]` for independent `X ~ Bin(n + tau, q)`, `Y ~ Bin(n, q')`.
pub fn exact_ge_probability(n: u64, tau: i64, q: f64, q_prime: f64) -> Result<f64> {
    let x = Pmf::binomial(first_size(n, tau)?, q)?;
    let y = Pmf::binomial(n, q_prime)?;
    let sx = x.survival();
    let mut acc = Kahan::new();
    for (j, wy) in y.log_weights.iter().enumerate() {
        let yv = y.support_offset + j as i64;
        // P[X >= yv]
        let tail = if yv <= x.min_value() {
            1.0
        } else if yv > x.max_value() {
            0.0
        } else {
            sx[(yv - x.support_offset) as usize]
        };
        acc.add(wy.exp() * tail);
    }
    Ok(acc.total().clamp(0.0, 1.0))
}

/// `P[X = Y]` for the same pair of independent binomials.
pub fn exact_eq_probability(n: u64, tau: i64, q: f64, q_prime: f64) -> Result<f64> {
    let x = Pmf::binomial(first_size(n, tau)?, q)?;
    let y = Pmf::binomial(n, q_prime)?;
    let mut acc = Kahan::new();
    for (j, wy) in y.log_weights.iter().enumerate() {
        let v = y.support_offset + j as i64;
        acc.add(wy.exp() * x.prob(v));
    }
    Ok(acc.total().clamp(0.0, 1.0))
}

/// The four comparison-conditioned distributions of the pair
/// `X ~ Bin(n + tau, q)` vs `Y ~ Bin(n, q')`, with the branch weights.
#[derive(Debug, Clone)]
pub struct ConditionedSplit {
    /// `X | X > Y`
    pub x_plus: Pmf,
    /// `X | X <= Y`
    pub x_minus: Pmf,
    /// `Y | Y > X`
    pub y_plus: Pmf,
    /// `Y | Y <= X`
    pub y_minus: Pmf,
    /// `P[X <= Y]`: mixture weight of the minus branch on the X side,
    /// `split * x_minus + (1 - split) * x_plus = Bin(n + tau, q)`.
    pub split: f64,
    /// `P[Y <= X]`: mixture weight of the minus branch on the Y side.
    pub split_y: f64,
}

/// Conditions each side of the comparison on beating (strictly) or not
/// beating the other, exactly, over the full support.
pub fn conditioned_split(n: u64, tau: i64, q: f64, q_prime: f64) -> Result<ConditionedSplit> {
    let x = Pmf::binomial(first_size(n, tau)?, q)?;
    let y = Pmf::binomial(n, q_prime)?;
    let fx = x.cdf();
    let fy = y.cdf();
    let sx = x.survival();
    let sy = y.survival();

    // P[other < k] and P[other >= k] evaluated on this side's support.
    let cdf_below = |pmf: &Pmf, cdf: &[f64], k: i64| -> f64 {
        // P[pmf-variable < k] = P[<= k - 1]
        if k - 1 < pmf.min_value() {
            0.0
        } else if k - 1 >= pmf.max_value() {
            1.0
        } else {
            cdf[(k - 1 - pmf.support_offset) as usize]
        }
    };
    let surv_at = |pmf: &Pmf, surv: &[f64], k: i64| -> f64 {
        if k <= pmf.min_value() {
            1.0
        } else if k > pmf.max_value() {
            0.0
        } else {
            surv[(k - pmf.support_offset) as usize]
        }
    };

    let weighted = |side: &Pmf, factor: &dyn Fn(i64) -> f64| -> Vec<f64> {
        side.log_weights
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let k = side.support_offset + i as i64;
                w + factor(k).ln()
            })
            .collect()
    };

    let mut p_x_gt_y = Kahan::new();
    for (i, w) in x.log_weights.iter().enumerate() {
        let k = x.support_offset + i as i64;
        p_x_gt_y.add(w.exp() * cdf_below(&y, &fy, k));
    }
    let p_x_gt_y = p_x_gt_y.total().clamp(0.0, 1.0);
    let mut p_y_gt_x = Kahan::new();
    for (j, w) in y.log_weights.iter().enumerate() {
        let k = y.support_offset + j as i64;
        p_y_gt_x.add(w.exp() * cdf_below(&x, &fx, k));
    }
    let p_y_gt_x = p_y_gt_x.total().clamp(0.0, 1.0);

    if p_x_gt_y <= 0.0 || p_x_gt_y >= 1.0 || p_y_gt_x <= 0.0 || p_y_gt_x >= 1.0 {
        return Err(Error::invalid(
            "comparison is deterministic; conditioned distributions are degenerate",
        ));
    }

    let x_plus = Pmf::from_log_weights(x.support_offset, weighted(&x, &|k| cdf_below(&y, &fy, k)))?;
    let x_minus = Pmf::from_log_weights(x.support_offset, weighted(&x, &|k| surv_at(&y, &sy, k)))?;
    let y_plus = Pmf::from_log_weights(y.support_offset, weighted(&y, &|k| cdf_below(&x, &fx, k)))?;
    let y_minus = Pmf::from_log_weights(y.support_offset, weighted(&y, &|k| surv_at(&x, &sx, k)))?;

    Ok(ConditionedSplit {
        x_plus,
        x_minus,
        y_plus,
        y_minus,
        split: 1.0 - p_x_gt_y,
        split_y: 1.0 - p_y_gt_x,
    })
}

/// Exact distribution of a signed sum of independent pmf-distributed terms:
/// `sum_k sign_k * T_k`.  Convolution runs in probability space with
/// compensated accumulation; structural zeros stay exactly zero.
pub fn convolve_signed(terms: &[(Pmf, i8)]) -> Result<Pmf> {
    if terms.is_empty() {
        return Err(Error::invalid("convolve_signed needs at least one term"));
    }
    let mut acc: Option<(i64, Vec<f64>)> = None;
    for (pmf, sign) in terms {
        let oriented = match sign {
            1 => pmf.clone(),
            -1 => pmf.negated(),
            _ => return Err(Error::invalid(format!("sign must be +-1, got {sign}"))),
        };
        let probs = oriented.probs();
        acc = Some(match acc {
            None => (oriented.support_offset, probs),
            Some((off, cur)) => {
                let mut out = vec![Kahan::new(); cur.len() + probs.len() - 1];
                for (i, &a) in cur.iter().enumerate() {
                    if a == 0.0 {
                        continue;
                    }
                    for (j, &b) in probs.iter().enumerate() {
                        out[i + j].add(a * b);
                    }
                }
                (
                    off + oriented.support_offset,
                    out.into_iter().map(|k| k.total()).collect(),
                )
            }
        });
    }
    let (offset, probs) = acc.unwrap();
    Pmf::from_log_weights(offset, probs.into_iter().map(f64::ln).collect())
}

/// Verifies discrete log-concavity: contiguous support and
/// `w(k)^2 >= w(k-1) w(k+1)` for all interior points, with 1e-12 relative
/// slack on the log scale.
pub fn logconcavity_check(pmf: &Pmf) -> bool {
    let lw = &pmf.log_weights;
    // Interior zeros break contiguity (edges were trimmed at construction).
    if lw.iter().any(|w| *w == f64::NEG_INFINITY) {
        return false;
    }
    for k in 1..lw.len().saturating_sub(1) {
        let lhs = 2.0 * lw[k];
        let rhs = lw[k - 1] + lw[k + 1];
        let slack = 1e-12 * (1.0 + lhs.abs() + rhs.abs());
        if lhs < rhs - slack {
            return false;
        }
    }
    true
}

/// Exact and first-order comparison of two iid `Bin(m, p)` draws shifted by
/// `k`: the point mass `P[X' = X + k]` and the tail `P[X' >= X + k]`.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedDifference {
    pub point: f64,
    pub tail: f64,
    pub point_approx: f64,
    pub tail_approx: f64,
}

/// First-order values: `P[X' = X + k] ~ exp(-k^2 / (4p(1-p)m)) / sqrt(4 pi p(1-p) m)`
/// and `P[X' >= X + k] ~ 1/2 - (2k - 1) / (4 sqrt(pi p(1-p) m))`, valid for
/// `|k| = O(sqrt(m))`.
pub fn shifted_difference(m: u64, p: f64, k: i64) -> Result<ShiftedDifference> {
    if p <= 0.0 || p >= 1.0 {
        return Err(Error::DegenerateProbability {
            what: "shifted_difference",
            p,
        });
    }
    let pmf = Pmf::binomial(m, p)?;
    let surv = pmf.survival();
    let mut point = Kahan::new();
    let mut tail = Kahan::new();
    for (i, w) in pmf.log_weights.iter().enumerate() {
        let x = pmf.support_offset + i as i64;
        let wx = w.exp();
        point.add(wx * pmf.prob(x + k));
        let target = x + k;
        let t = if target <= pmf.min_value() {
            1.0
        } else if target > pmf.max_value() {
            0.0
        } else {
            surv[(target - pmf.support_offset) as usize]
        };
        tail.add(wx * t);
    }
    let pq_m = p * (1.0 - p) * m as f64;
    let kf = k as f64;
    let point_approx = (-kf * kf / (4.0 * pq_m)).exp() / (4.0 * std::f64::consts::PI * pq_m).sqrt();
    let tail_approx = 0.5 - (2.0 * kf - 1.0) / (4.0 * (std::f64::consts::PI * pq_m).sqrt());
    Ok(ShiftedDifference {
        point: point.total(),
        tail: tail.total().clamp(0.0, 1.0),
        point_approx,
        tail_approx,
    })
}
