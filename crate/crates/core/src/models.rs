//! Degree-sequence models and the samplers used to compare them.
//!
//! Four families of laws over degree sequences are provided, each in a
//! simple-graph and a bipartite flavour:
//!
//! * **graph model** — degrees of an actually sampled random graph;
//! * **independent model** — i.i.d. binomial coordinates, no constraint;
//! * **conditioned model** — independent coordinates conditioned on the
//!   even-sum (graph) or equal-sums (bipartite) event, drawn by rejection;
//! * **integrated model** — the edge probability is first jittered by a
//!   truncated normal, then the conditioned model runs at the jittered
//!   probability.
//!
//! Rejection is used for every conditioning because it realises the
//! conditional law exactly; the cost is surfaced through [`SamplerStats`]
//! so callers can see the acceptance rate they are paying for.
//!
//! Samplers take the generator by `&mut`, hold no shared state, and are
//! parallelised by handing each task an independently derived seed.

use rand_distr::{Binomial, Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::graph::{sample_bipartite, sample_gnp};
use crate::rng::SplitMix64;

/// Default cap on rejection proposals before giving up.
pub const DEFAULT_REJECTION_BUDGET: u64 = 1_000_000_000;

/// Degree sequence of a simple graph on `n` vertices.
///
/// Coordinates live in `[0, n-1]`; the sequence of an actual graph always
/// has even sum (every edge is counted twice).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DegreeSequence {
    pub degrees: Vec<u32>,
}

impl DegreeSequence {
    pub fn new(degrees: Vec<u32>) -> Self {
        DegreeSequence { degrees }
    }

    pub fn len(&self) -> usize {
        self.degrees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn sum(&self) -> u64 {
        self.degrees.iter().map(|&d| u64::from(d)).sum()
    }

    pub fn has_even_sum(&self) -> bool {
        self.sum() % 2 == 0
    }

    pub fn max(&self) -> u32 {
        self.degrees.iter().copied().max().unwrap_or(0)
    }

    /// Population variance of the coordinates.
    pub fn variance(&self) -> f64 {
        let values: Vec<f64> = self.degrees.iter().map(|&d| f64::from(d)).collect();
        crate::numeric::variance(&values)
    }
}

/// Degree sequence of a bipartite graph with parts of size `m` and `n`.
///
/// `s` holds the `m` left degrees (each in `[0, n]`), `t` the `n` right
/// degrees (each in `[0, m]`); for an actual bipartite graph both sides sum
/// to the edge count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BipartiteDegreeSequence {
    pub s: Vec<u32>,
    pub t: Vec<u32>,
}

impl BipartiteDegreeSequence {
    pub fn sum_s(&self) -> u64 {
        self.s.iter().map(|&d| u64::from(d)).sum()
    }

    pub fn sum_t(&self) -> u64 {
        self.t.iter().map(|&d| u64::from(d)).sum()
    }

    pub fn has_equal_sums(&self) -> bool {
        self.sum_s() == self.sum_t()
    }

    pub fn max(&self) -> u32 {
        self.s
            .iter()
            .chain(self.t.iter())
            .copied()
            .max()
            .unwrap_or(0)
    }

    /// Population variance over the concatenated coordinates of both sides.
    pub fn variance(&self) -> f64 {
        let values: Vec<f64> = self
            .s
            .iter()
            .chain(self.t.iter())
            .map(|&d| f64::from(d))
            .collect();
        crate::numeric::variance(&values)
    }
}

/// Cost accounting for rejection samplers: the number of sequence proposals
/// drawn, including the accepted one.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SamplerStats {
    pub attempts: u64,
}

/// Degree sequence of a freshly sampled random graph on `n` vertices with
/// edge probability `p`.
pub fn sample_true(n: usize, p: f64, rng: &mut SplitMix64) -> Result<DegreeSequence> {
    let g = sample_gnp(n, p, rng)?;
    Ok(DegreeSequence::new(g.degrees()))
}

/// Degree sequence of a freshly sampled bipartite random graph with part
/// sizes `m`, `n` and edge probability `p`.
pub fn sample_true_bip(
    m: usize,
    n: usize,
    p: f64,
    rng: &mut SplitMix64,
) -> Result<BipartiteDegreeSequence> {
    let g = sample_bipartite(m, n, p, rng)?;
    Ok(BipartiteDegreeSequence {
        s: g.left_degrees(),
        t: g.right_degrees(),
    })
}

fn binomial_dist(trials: u64, p: f64) -> Result<Binomial> {
    Binomial::new(trials, p)
        .map_err(|e| Error::invalid(format!("binomial coordinate sampler: {e}")))
}

fn draw_coordinates(dist: &Binomial, count: usize, rng: &mut SplitMix64) -> Vec<u32> {
    (0..count).map(|_| dist.sample(rng) as u32).collect()
}

/// `n` independent binomial coordinates with `n - 1` trials each; no sum
/// constraint.
pub fn sample_b(n: usize, p: f64, rng: &mut SplitMix64) -> Result<DegreeSequence> {
    if n == 0 {
        return Err(Error::invalid("empty degree sequence requested"));
    }
    let dist = binomial_dist(n as u64 - 1, p)?;
    Ok(DegreeSequence::new(draw_coordinates(&dist, n, rng)))
}

/// `m` independent binomial coordinates with `n` trials plus `n` independent
/// coordinates with `m` trials; no sum constraint.
pub fn sample_b_bip(
    m: usize,
    n: usize,
    p: f64,
    rng: &mut SplitMix64,
) -> Result<BipartiteDegreeSequence> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("empty bipartite degree sequence requested"));
    }
    let left = binomial_dist(n as u64, p)?;
    let right = binomial_dist(m as u64, p)?;
    Ok(BipartiteDegreeSequence {
        s: draw_coordinates(&left, m, rng),
        t: draw_coordinates(&right, n, rng),
    })
}

/// Independent binomial coordinates conditioned on even sum, realised by
/// rejection (acceptance rate approaches 1/2).
///
/// Fails with a budget-exhausted error once `budget` proposals have been
/// drawn without an acceptance.
pub fn sample_e(
    n: usize,
    p: f64,
    rng: &mut SplitMix64,
    budget: u64,
) -> Result<(DegreeSequence, SamplerStats)> {
    if n == 0 {
        return Err(Error::invalid("empty degree sequence requested"));
    }
    let dist = binomial_dist(n as u64 - 1, p)?;
    for attempts in 1..=budget {
        let seq = DegreeSequence::new(draw_coordinates(&dist, n, rng));
        if seq.has_even_sum() {
            return Ok((seq, SamplerStats { attempts }));
        }
    }
    Err(Error::BudgetExhausted {
        attempts: budget,
        what: "even-sum rejection",
    })
}

/// Independent bipartite binomial coordinates conditioned on both sides
/// summing to the same value, realised by rejection.
///
/// The equal-sums event has probability on the order of
/// `1 / sqrt(p (1 - p) m n)`, so the attempt counter in the returned stats
/// is the honest price of exactness here.
pub fn sample_e_bip(
    m: usize,
    n: usize,
    p: f64,
    rng: &mut SplitMix64,
    budget: u64,
) -> Result<(BipartiteDegreeSequence, SamplerStats)> {
    if m == 0 || n == 0 {
        return Err(Error::invalid("empty bipartite degree sequence requested"));
    }
    let left = binomial_dist(n as u64, p)?;
    let right = binomial_dist(m as u64, p)?;
    for attempts in 1..=budget {
        let seq = BipartiteDegreeSequence {
            s: draw_coordinates(&left, m, rng),
            t: draw_coordinates(&right, n, rng),
        };
        if seq.has_equal_sums() {
            return Ok((seq, SamplerStats { attempts }));
        }
    }
    Err(Error::BudgetExhausted {
        attempts: budget,
        what: "equal-sums rejection",
    })
}

/// Normal draw with mean `p` and variance `var`, conditioned on `(0, 1)` by
/// rejection against the untruncated normal.
///
/// The truncated mass is astronomically small for every variance used by
/// the integrated model at realistic sizes, so this is near-free; the cap
/// only guards against pathological parameters.
fn truncated_normal_probability(p: f64, var: f64, rng: &mut SplitMix64) -> Result<f64> {
    let sigma = var.sqrt();
    for _ in 0..1_000_000u32 {
        let z: f64 = StandardNormal.sample(rng);
        let candidate = p + sigma * z;
        if candidate > 0.0 && candidate < 1.0 {
            return Ok(candidate);
        }
    }
    Err(Error::BudgetExhausted {
        attempts: 1_000_000,
        what: "probability truncation",
    })
}

fn require_interior_probability(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!(
            "edge probability must lie strictly inside (0, 1), got {p}"
        )));
    }
    Ok(())
}

/// Jittered edge probability for the integrated graph model:
/// `N(p, p(1-p)/(n^2 - n))` conditioned on `(0, 1)`.
pub fn sample_p_prime(n: usize, p: f64, rng: &mut SplitMix64) -> Result<f64> {
    require_interior_probability(p)?;
    if n < 2 {
        return Err(Error::invalid(
            "jittered probability needs at least two vertices",
        ));
    }
    let nf = n as f64;
    truncated_normal_probability(p, p * (1.0 - p) / (nf * nf - nf), rng)
}

/// Jittered edge probability for the integrated bipartite model:
/// `N(p, p(1-p)/(2mn))` conditioned on `(0, 1)`.
pub fn sample_p_prime_bip(m: usize, n: usize, p: f64, rng: &mut SplitMix64) -> Result<f64> {
    require_interior_probability(p)?;
    if m == 0 || n == 0 {
        return Err(Error::invalid(
            "jittered probability needs nonempty parts",
        ));
    }
    truncated_normal_probability(p, p * (1.0 - p) / (2.0 * m as f64 * n as f64), rng)
}

/// Integrated model: draw a jittered probability, then run the even-sum
/// conditioned sampler at that probability.
pub fn sample_i(
    n: usize,
    p: f64,
    rng: &mut SplitMix64,
    budget: u64,
) -> Result<(DegreeSequence, SamplerStats)> {
    let p_prime = sample_p_prime(n, p, rng)?;
    sample_e(n, p_prime, rng, budget)
}

/// Integrated bipartite model: jittered probability, then the equal-sums
/// conditioned sampler.
pub fn sample_i_bip(
    m: usize,
    n: usize,
    p: f64,
    rng: &mut SplitMix64,
    budget: u64,
) -> Result<(BipartiteDegreeSequence, SamplerStats)> {
    let p_prime = sample_p_prime_bip(m, n, p, rng)?;
    sample_e_bip(m, n, p_prime, rng, budget)
}

/// Exact law of the first coordinate of the even-sum conditioned model.
///
/// Splitting the remaining `n - 1` coordinates (a binomial with
/// `(n - 1)^2` trials) by parity gives, up to normalisation,
/// `P[d_1 = k | even sum] ∝ Bin(n-1, p)(k) * (1 + (-1)^k (1-2p)^((n-1)^2))`.
pub fn conditioned_first_coordinate_law(n: usize, p: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("empty degree sequence requested"));
    }
    let trials = n as u64 - 1;
    let head = crate::binom::Pmf::binomial(trials, p)?;
    let rest = (n as u64 - 1) * (n as u64 - 1);
    let skew = (1.0 - 2.0 * p).powi(i32::try_from(rest.min(i32::MAX as u64)).unwrap_or(i32::MAX));
    let mut weights: Vec<f64> = (0..=trials as i64)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            head.prob(k) * (1.0 + sign * skew)
        })
        .collect();
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::invalid("degenerate conditional coordinate law"));
    }
    for w in &mut weights {
        *w /= total;
    }
    Ok(weights)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::binom;
    use crate::ks::{ks_1d_two_sample, ks_1d_vs_cdf};
    use crate::rng::derive_trial_seed;
    use proptest::prelude::*;
    use statrs::distribution::{ChiSquared, ContinuousCDF};
    use std::sync::OnceLock;

    /// Chi-square statistic over integer-valued draws against an expected
    /// pmf, pooling adjacent values until each pooled cell expects at least
    /// five observations. Returns the statistic and the cell count.
    fn pooled_chi_square(observed: &[u64], expected: &[f64]) -> (f64, usize) {
        assert_eq!(observed.len(), expected.len());
        let mut cells: Vec<(f64, f64)> = Vec::new();
        let mut acc_obs = 0.0;
        let mut acc_exp = 0.0;
        for (&o, &e) in observed.iter().zip(expected) {
            acc_obs += o as f64;
            acc_exp += e;
            if acc_exp >= 5.0 {
                cells.push((acc_obs, acc_exp));
                acc_obs = 0.0;
                acc_exp = 0.0;
            }
        }
        if acc_exp > 0.0 || acc_obs > 0.0 {
            if let Some(last) = cells.last_mut() {
                last.0 += acc_obs;
                last.1 += acc_exp;
            } else {
                cells.push((acc_obs, acc_exp));
            }
        }
        let stat = cells
            .iter()
            .map(|&(o, e)| (o - e) * (o - e) / e)
            .sum::<f64>();
        (stat, cells.len())
    }

    fn chi_square_critical(cells: usize, level: f64) -> f64 {
        ChiSquared::new((cells - 1) as f64)
            .unwrap()
            .inverse_cdf(1.0 - level)
    }

    /// Histogram of `values` over `0..=max_value`.
    fn histogram(values: impl IntoIterator<Item = u32>, max_value: u32) -> Vec<u64> {
        let mut h = vec![0u64; max_value as usize + 1];
        for v in values {
            h[v as usize] += 1;
        }
        h
    }

    const SUMMARY_SAMPLES: usize = 5000;
    const SUMMARY_N: usize = 2000;
    const SUMMARY_P: f64 = 0.5;

    /// (sum, variance, max) per sample; shared across the large-sample tests
    /// so the 5000-graph corpus is only generated once.
    fn graph_summaries() -> &'static [(f64, f64, f64)] {
        static CELL: OnceLock<Vec<(f64, f64, f64)>> = OnceLock::new();
        CELL.get_or_init(|| {
            (0..SUMMARY_SAMPLES)
                .map(|i| {
                    let mut rng = SplitMix64::new(derive_trial_seed(0x9A7_1000, i as u64));
                    let d = sample_true(SUMMARY_N, SUMMARY_P, &mut rng).unwrap();
                    (d.sum() as f64, d.variance(), f64::from(d.max()))
                })
                .collect()
        })
    }

    fn integrated_summaries() -> &'static [(f64, f64, f64)] {
        static CELL: OnceLock<Vec<(f64, f64, f64)>> = OnceLock::new();
        CELL.get_or_init(|| {
            (0..SUMMARY_SAMPLES)
                .map(|i| {
                    let mut rng = SplitMix64::new(derive_trial_seed(0x9A7_2000, i as u64));
                    let (d, _) =
                        sample_i(SUMMARY_N, SUMMARY_P, &mut rng, DEFAULT_REJECTION_BUDGET).unwrap();
                    (d.sum() as f64, d.variance(), f64::from(d.max()))
                })
                .collect()
        })
    }

    #[test]
    fn two_vertices_at_full_probability_force_degrees_one() {
        let mut rng = SplitMix64::new(7);
        let d = sample_true(2, 1.0, &mut rng).unwrap();
        assert_eq!(d.degrees, vec![1, 1]);
        let b = sample_true_bip(2, 3, 1.0, &mut rng).unwrap();
        assert_eq!(b.s, vec![3, 3]);
        assert_eq!(b.t, vec![2, 2, 2]);
    }

    #[test]
    fn graph_degree_sums_are_always_even() {
        let mut rng = SplitMix64::new(11);
        for n in [1usize, 2, 3, 7, 40, 129] {
            for p in [0.0, 0.2, 0.5, 0.9, 1.0] {
                let d = sample_true(n, p, &mut rng).unwrap();
                assert!(d.has_even_sum(), "n={n} p={p} sum={}", d.sum());
            }
        }
    }

    #[test]
    fn bipartite_degree_sums_always_match() {
        let mut rng = SplitMix64::new(13);
        for (m, n) in [(1usize, 1usize), (2, 5), (17, 9), (64, 65)] {
            for p in [0.0, 0.3, 0.8, 1.0] {
                let d = sample_true_bip(m, n, p, &mut rng).unwrap();
                assert!(d.has_equal_sums());
                assert_eq!(d.s.len(), m);
                assert_eq!(d.t.len(), n);
            }
        }
    }

    #[test]
    fn graph_mean_degree_matches_binomial_expectation() {
        // Mean degree of one graph is (2 * edges) / n, whose variance is
        // 2 p (1 - p) (n - 1) / n; the bound is four standard errors of the
        // across-sample average.
        let sums = graph_summaries();
        let n = SUMMARY_N as f64;
        let mean_degree =
            sums.iter().map(|&(s, _, _)| s).sum::<f64>() / (sums.len() as f64 * n);
        let target = SUMMARY_P * (n - 1.0);
        let se = (2.0 * SUMMARY_P * (1.0 - SUMMARY_P) * (n - 1.0) / n / sums.len() as f64).sqrt();
        assert!(
            (mean_degree - target).abs() <= 4.0 * se,
            "mean {mean_degree} vs {target} (se {se})"
        );
    }

    #[test]
    fn independent_model_extremes_are_deterministic() {
        let mut rng = SplitMix64::new(17);
        let zero = sample_b(6, 0.0, &mut rng).unwrap();
        assert_eq!(zero.degrees, vec![0; 6]);
        let full = sample_b(6, 1.0, &mut rng).unwrap();
        assert_eq!(full.degrees, vec![5; 6]);
        let bip = sample_b_bip(3, 4, 1.0, &mut rng).unwrap();
        assert_eq!(bip.s, vec![4, 4, 4]);
        assert_eq!(bip.t, vec![3, 3, 3, 3]);
    }

    #[test]
    fn independent_coordinates_match_binomial_chi_square() {
        // 10^5 coordinate draws at n = 3000, p = 0.3 against Bin(2999, 0.3),
        // level 0.01.
        let n = 3000usize;
        let p = 0.3;
        let sequences = 100_000usize.div_ceil(n);
        let mut rng = SplitMix64::new(19);
        let mut all = Vec::with_capacity(sequences * n);
        for _ in 0..sequences {
            all.extend(sample_b(n, p, &mut rng).unwrap().degrees);
        }
        let pmf = binom::Pmf::binomial(n as u64 - 1, p).unwrap();
        let observed = histogram(all.iter().copied(), n as u32 - 1);
        let expected: Vec<f64> = (0..n as i64)
            .map(|k| pmf.prob(k) * all.len() as f64)
            .collect();
        let (stat, cells) = pooled_chi_square(&observed, &expected);
        let crit = chi_square_critical(cells, 0.01);
        assert!(stat <= crit, "chi-square {stat} over {cells} cells vs {crit}");
    }

    #[test]
    fn conditioned_sums_are_even_and_stats_count_attempts() {
        let mut rng = SplitMix64::new(23);
        for n in [1usize, 2, 3, 10, 101] {
            for p in [0.0, 0.25, 0.5, 1.0] {
                let (d, stats) = sample_e(n, p, &mut rng, DEFAULT_REJECTION_BUDGET).unwrap();
                assert!(d.has_even_sum(), "n={n} p={p}");
                assert!(stats.attempts >= 1);
            }
        }
    }

    #[test]
    fn bipartite_conditioned_sums_are_equal() {
        let mut rng = SplitMix64::new(29);
        for (m, n) in [(1usize, 1usize), (3, 4), (20, 11)] {
            for p in [0.0, 0.35, 1.0] {
                let (d, stats) = sample_e_bip(m, n, p, &mut rng, DEFAULT_REJECTION_BUDGET).unwrap();
                assert!(d.has_equal_sums(), "m={m} n={n} p={p}");
                assert!(stats.attempts >= 1);
            }
        }
    }

    #[test]
    fn conditioned_first_coordinate_matches_parity_split_oracle() {
        // n = 100, p = 0.5: the parity skew vanishes and the conditional law
        // coincides with Bin(99, 1/2); still exercised through the rejection
        // sampler with 10^5 accepted draws, chi-square level 0.01.
        let n = 100usize;
        let p = 0.5;
        let draws = 100_000usize;
        let mut rng = SplitMix64::new(31);
        let mut firsts = Vec::with_capacity(draws);
        for _ in 0..draws {
            let (d, _) = sample_e(n, p, &mut rng, DEFAULT_REJECTION_BUDGET).unwrap();
            firsts.push(d.degrees[0]);
        }
        let law = conditioned_first_coordinate_law(n, p).unwrap();
        let observed = histogram(firsts.iter().copied(), n as u32 - 1);
        let expected: Vec<f64> = law.iter().map(|w| w * draws as f64).collect();
        let (stat, cells) = pooled_chi_square(&observed, &expected);
        let crit = chi_square_critical(cells, 0.01);
        assert!(stat <= crit, "chi-square {stat} over {cells} cells vs {crit}");

        // Sanity on the oracle itself at p = 1/2: no parity skew.
        let plain = binom::Pmf::binomial(n as u64 - 1, p).unwrap();
        for (k, w) in law.iter().enumerate() {
            assert!((w - plain.prob(k as i64)).abs() < 1e-14);
        }
    }

    #[test]
    fn small_case_distinguishes_conditioning_from_plain_binomial() {
        // n = 3, p = 0.3 has parity skew (1 - 2p)^4 = 0.0256: the conditioned
        // first coordinate passes against the conditional oracle and fails
        // against the unconditioned binomial, so the test has power.
        let n = 3usize;
        let p = 0.3;
        let draws = 100_000usize;
        let mut rng = SplitMix64::new(37);
        let mut firsts = Vec::with_capacity(draws);
        for _ in 0..draws {
            let (d, _) = sample_e(n, p, &mut rng, DEFAULT_REJECTION_BUDGET).unwrap();
            firsts.push(d.degrees[0]);
        }
        let observed = histogram(firsts.iter().copied(), 2);
        let law = conditioned_first_coordinate_law(n, p).unwrap();
        let expected: Vec<f64> = law.iter().map(|w| w * draws as f64).collect();
        let (stat, cells) = pooled_chi_square(&observed, &expected);
        assert!(stat <= chi_square_critical(cells, 0.01), "stat {stat}");

        let plain = binom::Pmf::binomial(2, p).unwrap();
        let naive: Vec<f64> = (0..3).map(|k| plain.prob(k) * draws as f64).collect();
        let (naive_stat, naive_cells) = pooled_chi_square(&observed, &naive);
        assert!(
            naive_stat > chi_square_critical(naive_cells, 0.01),
            "unconditioned law should be rejected, stat {naive_stat}"
        );
    }

    #[test]
    fn bipartite_conditioned_first_coordinate_matches_convolution_oracle() {
        // P[s_1 = k | equal sums] ∝ Bin(n, p)(k) * P[W = -k] where
        // W = Bin((m-1) n, p) - Bin(m n, p) collects the remaining
        // coordinates of both sides.
        let (m, n) = (3usize, 4usize);
        let p = 0.35;
        let draws = 40_000usize;
        let mut rng = SplitMix64::new(41);
        let mut firsts = Vec::with_capacity(draws);
        for _ in 0..draws {
            let (d, _) = sample_e_bip(m, n, p, &mut rng, DEFAULT_REJECTION_BUDGET).unwrap();
            firsts.push(d.s[0]);
        }
        let head = binom::Pmf::binomial(n as u64, p).unwrap();
        let rest = binom::convolve_signed(&[
            (binom::Pmf::binomial(((m - 1) * n) as u64, p).unwrap(), 1),
            (binom::Pmf::binomial((m * n) as u64, p).unwrap(), -1),
        ])
        .unwrap();
        let mut weights: Vec<f64> = (0..=n as i64)
            .map(|k| head.prob(k) * rest.prob(-k))
            .collect();
        let total: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= total;
        }
        let observed = histogram(firsts.iter().copied(), n as u32);
        let expected: Vec<f64> = weights.iter().map(|w| w * draws as f64).collect();
        let (stat, cells) = pooled_chi_square(&observed, &expected);
        let crit = chi_square_critical(cells, 0.01);
        assert!(stat <= crit, "chi-square {stat} over {cells} cells vs {crit}");
    }

    #[test]
    fn filtering_independent_samples_by_parity_reproduces_conditioned_model() {
        // Model nesting: keep only even-sum outputs of the unconstrained
        // sampler and compare first-coordinate histograms with the rejection
        // sampler by a chi-square homogeneity test.
        let n = 5usize;
        let p = 0.4;
        let per_model = 30_000usize;
        let mut rng = SplitMix64::new(43);
        let mut filtered = Vec::with_capacity(per_model);
        while filtered.len() < per_model {
            let d = sample_b(n, p, &mut rng).unwrap();
            if d.has_even_sum() {
                filtered.push(d.degrees[0]);
            }
        }
        let mut conditioned = Vec::with_capacity(per_model);
        for _ in 0..per_model {
            let (d, _) = sample_e(n, p, &mut rng, DEFAULT_REJECTION_BUDGET).unwrap();
            conditioned.push(d.degrees[0]);
        }
        let a = histogram(filtered.iter().copied(), n as u32 - 1);
        let b = histogram(conditioned.iter().copied(), n as u32 - 1);
        // Homogeneity: expected cell mass proportional to the pooled law.
        let mut stat = 0.0;
        let mut cells = 0usize;
        for k in 0..a.len() {
            let pooled = (a[k] + b[k]) as f64 / 2.0;
            if pooled < 5.0 {
                continue;
            }
            stat += (a[k] as f64 - pooled).powi(2) / pooled;
            stat += (b[k] as f64 - pooled).powi(2) / pooled;
            cells += 1;
        }
        let crit = chi_square_critical(cells, 0.01);
        assert!(stat <= crit, "homogeneity {stat} over {cells} cells vs {crit}");
    }

    #[test]
    fn jittered_probability_variance_matches_formula() {
        let n = 500usize;
        let p = 0.5;
        let draws = 100_000usize;
        let mut rng = SplitMix64::new(47);
        let values: Vec<f64> = (0..draws)
            .map(|_| sample_p_prime(n, p, &mut rng).unwrap())
            .collect();
        let target = p * (1.0 - p) / ((n * n - n) as f64);
        let var = crate::numeric::variance(&values);
        assert!(
            (var - target).abs() <= 0.05 * target,
            "variance {var} vs {target}"
        );

        let (m, n2) = (300usize, 500usize);
        let values: Vec<f64> = (0..draws)
            .map(|_| sample_p_prime_bip(m, n2, p, &mut rng).unwrap())
            .collect();
        let target = p * (1.0 - p) / (2.0 * (m * n2) as f64);
        let var = crate::numeric::variance(&values);
        assert!(
            (var - target).abs() <= 0.05 * target,
            "bipartite variance {var} vs {target}"
        );
    }

    #[test]
    fn integrated_outputs_land_in_even_sum_set() {
        let mut rng = SplitMix64::new(53);
        for n in [2usize, 5, 40] {
            for p in [0.1, 0.5, 0.93] {
                let (d, stats) = sample_i(n, p, &mut rng, DEFAULT_REJECTION_BUDGET).unwrap();
                assert!(d.has_even_sum());
                assert!(stats.attempts >= 1);
            }
        }
        let (d, _) = sample_i_bip(4, 7, 0.3, &mut rng, DEFAULT_REJECTION_BUDGET).unwrap();
        assert!(d.has_equal_sums());
    }

    #[test]
    fn integrated_and_graph_total_sums_agree_by_ks() {
        // Two-sample Kolmogorov-Smirnov on the total-degree-sum law at
        // n = 2000, p = 0.5, 5000 samples per model, level 0.01. The
        // integrated model's probability jitter is what doubles the variance
        // of independent sums to match the graph's.
        let d_sums: Vec<f64> = graph_summaries().iter().map(|&(s, _, _)| s).collect();
        let i_sums: Vec<f64> = integrated_summaries().iter().map(|&(s, _, _)| s).collect();
        let d = ks_1d_two_sample(&d_sums, &i_sums).unwrap();
        let mk = d_sums.len() as f64 * i_sums.len() as f64;
        let threshold = 1.6276 * ((d_sums.len() + i_sums.len()) as f64 / mk).sqrt();
        assert!(d <= threshold, "distance {d} vs level-0.01 threshold {threshold}");
    }

    #[test]
    fn transference_summaries_stay_close_in_kolmogorov_distance() {
        // Desk-scale transference: sum, variance and max degree of the graph
        // model vs the integrated model at n = 2000, p = 0.5, 5000 samples
        // each; every marginal distance at most 0.03.
        let graph = graph_summaries();
        let integrated = integrated_summaries();
        for (idx, name) in ["sum", "variance", "max"].iter().enumerate() {
            let pick = |row: &(f64, f64, f64)| match idx {
                0 => row.0,
                1 => row.1,
                _ => row.2,
            };
            let a: Vec<f64> = graph.iter().map(pick).collect();
            let b: Vec<f64> = integrated.iter().map(pick).collect();
            let d = ks_1d_two_sample(&a, &b).unwrap();
            assert!(d <= 0.03, "{name}: distance {d}");
        }
    }

    #[test]
    fn exhausted_budget_reports_attempt_count() {
        // Bipartite equal-sums at these sizes accepts with probability about
        // 1/(2 sqrt(pi p q m n)) ~ 1/160, so three attempts from this seed
        // all miss.
        let mut rng = SplitMix64::new(59);
        let err = sample_e_bip(200, 200, 0.5, &mut rng, 3).unwrap_err();
        match err {
            Error::BudgetExhausted { attempts, .. } => assert_eq!(attempts, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn degenerate_parameters_are_rejected() {
        let mut rng = SplitMix64::new(61);
        assert!(sample_i(2000, 0.0, &mut rng, 10).is_err());
        assert!(sample_i(2000, 1.0, &mut rng, 10).is_err());
        assert!(sample_i(1, 0.5, &mut rng, 10).is_err());
        assert!(sample_b(0, 0.5, &mut rng).is_err());
        assert!(sample_e(0, 0.5, &mut rng, 10).is_err());
        assert!(sample_b(10, f64::NAN, &mut rng).is_err());
        assert!(sample_true(10, 1.5, &mut rng).is_err());
    }

    #[test]
    fn samplers_are_deterministic_in_the_seed() {
        let draw = |seed: u64| {
            let mut rng = SplitMix64::new(seed);
            let a = sample_true(50, 0.4, &mut rng).unwrap();
            let b = sample_b(50, 0.4, &mut rng).unwrap();
            let (c, _) = sample_e(50, 0.4, &mut rng, DEFAULT_REJECTION_BUDGET).unwrap();
            let (d, _) = sample_i(50, 0.4, &mut rng, DEFAULT_REJECTION_BUDGET).unwrap();
            (a, b, c, d)
        };
        assert_eq!(draw(71), draw(71));
        assert_ne!(draw(71).0, draw(72).0);
    }

    #[test]
    fn summary_statistics_match_direct_computation() {
        let d = DegreeSequence::new(vec![3, 1, 4, 1, 5]);
        assert_eq!(d.sum(), 14);
        assert!(d.has_even_sum());
        assert!(!DegreeSequence::new(vec![1, 2]).has_even_sum());
        assert_eq!(d.max(), 5);
        let mean = 14.0 / 5.0;
        let var = [3.0f64, 1.0, 4.0, 1.0, 5.0]
            .iter()
            .map(|x| (x - mean) * (x - mean))
            .sum::<f64>()
            / 5.0;
        assert!((d.variance() - var).abs() < 1e-12);

        let b = BipartiteDegreeSequence {
            s: vec![2, 0],
            t: vec![1, 1, 0],
        };
        assert_eq!(b.sum_s(), 2);
        assert_eq!(b.sum_t(), 2);
        assert!(b.has_equal_sums());
        assert_eq!(b.max(), 2);
    }

    #[test]
    fn large_standard_normal_sample_stays_near_its_cdf() {
        // DKW-style check routed through the shared distance routine: 10^5
        // jittered-probability draws against the exact truncated-normal cdf
        // (truncation is invisible at these parameters).
        let n = 500usize;
        let p = 0.5;
        let sigma = (p * (1.0 - p) / ((n * n - n) as f64)).sqrt();
        let mut rng = SplitMix64::new(67);
        let values: Vec<f64> = (0..100_000)
            .map(|_| sample_p_prime(n, p, &mut rng).unwrap())
            .collect();
        let d = ks_1d_vs_cdf(&values, |x| {
            crate::normal::normal_cdf((x - p) / sigma)
        })
        .unwrap();
        assert!(d <= 0.01, "distance {d}");
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn sampled_sequences_respect_their_defining_constraints(
            n in 1usize..28,
            m in 1usize..12,
            p in 0.0f64..=1.0,
            seed in any::<u64>(),
        ) {
            let mut rng = SplitMix64::new(seed);
            let d = sample_true(n, p, &mut rng).unwrap();
            prop_assert!(d.has_even_sum());
            prop_assert!(d.degrees.iter().all(|&x| (x as usize) < n));

            let b = sample_b(n, p, &mut rng).unwrap();
            prop_assert!(b.degrees.iter().all(|&x| (x as usize) < n));

            let (e, _) = sample_e(n, p, &mut rng, DEFAULT_REJECTION_BUDGET).unwrap();
            prop_assert!(e.has_even_sum());

            let bip = sample_true_bip(m, n, p, &mut rng).unwrap();
            prop_assert!(bip.has_equal_sums());
            prop_assert!(bip.s.iter().all(|&x| (x as usize) <= n));
            prop_assert!(bip.t.iter().all(|&x| (x as usize) <= m));
        }
    }
}
