//! Counting machinery for degree-constrained graphs: exact exhaustive
//! counters at tiny sizes, asymptotic count estimates in the dense
//! near-regular regime, and the conditional-degree formulas built on them.
//!
//! Exact counts use big integers (they overflow `u64` near ten vertices);
//! every estimate works in log-space through log-gamma. The asymptotic
//! evaluators compute their formulas verbatim even where the asymptotic
//! hypotheses fail — violations surface as flags on the result, never as
//! errors, so callers can chart where the approximations break down.

use std::collections::HashMap;

use num_bigint::BigUint;

use crate::error::{Error, Result};
use crate::models::{BipartiteDegreeSequence, DegreeSequence};
use crate::numeric::{ln_binom, ln_binom_real};
use crate::rng::SplitMix64;

/// Largest vertex count accepted by [`exact_count_graphs`].
pub const EXACT_GRAPH_VERTEX_CAP: usize = 10;
/// Largest `m * n` accepted by [`exact_count_bigraphs`].
pub const EXACT_BIGRAPH_SLOT_CAP: usize = 30;
/// Largest vector length enumerated exhaustively by [`slice_exp_moment`].
pub const EXACT_SLICE_CAP: usize = 22;
/// Default exponent slack in the near-regularity band `n^(1/2 + eps)`.
pub const DEFAULT_BAND_EPSILON: f64 = 0.1;

/// Which of the two ambient random-graph models a formula refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnumCase {
    /// Simple graph on `n` vertices.
    Graph,
    /// Bipartite graph; `m` is the size of the part opposite the `n` ambient
    /// vertices.
    Bipartite { m: usize },
}

fn choose_u64(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out = 1u64;
    for i in 0..k {
        out = out * (n - i) as u64 / (i + 1) as u64;
    }
    out
}

/// Enumerates every way of decrementing exactly `take` entries of `rest`
/// (sorted nonincreasing) by one, never touching zero entries. Entries of
/// equal value are interchangeable, so choices are grouped: `emit` receives
/// each decremented vector once together with the number of underlying
/// subsets realising it.
fn for_each_decrement(rest: &[u32], take: usize, emit: &mut impl FnMut(Vec<u32>, u64)) {
    let mut groups: Vec<(u32, usize)> = Vec::new();
    for &v in rest {
        match groups.last_mut() {
            Some((gv, c)) if *gv == v => *c += 1,
            _ => groups.push((v, 1)),
        }
    }
    fn rec(
        groups: &[(u32, usize)],
        gi: usize,
        remaining: usize,
        picks: &mut Vec<usize>,
        emit: &mut impl FnMut(Vec<u32>, u64),
    ) {
        if remaining == 0 || gi == groups.len() {
            if remaining > 0 {
                return;
            }
            let mut out = Vec::new();
            let mut ways = 1u64;
            for (g, &(v, c)) in groups.iter().enumerate() {
                let k = picks.get(g).copied().unwrap_or(0);
                ways *= choose_u64(c, k);
                for j in 0..c {
                    out.push(if j < k { v - 1 } else { v });
                }
            }
            emit(out, ways);
            return;
        }
        let (v, c) = groups[gi];
        let max_k = if v == 0 { 0 } else { c.min(remaining) };
        for k in 0..=max_k {
            picks.push(k);
            rec(groups, gi + 1, remaining - k, picks, emit);
            picks.pop();
        }
    }
    rec(&groups, 0, take, &mut Vec::new(), emit);
}

fn count_graphs_rec(mut residual: Vec<u32>, memo: &mut HashMap<Vec<u32>, BigUint>) -> BigUint {
    residual.sort_unstable_by(|a, b| b.cmp(a));
    while residual.last() == Some(&0) {
        residual.pop();
    }
    if residual.is_empty() {
        return BigUint::from(1u32);
    }
    let d0 = residual[0] as usize;
    if d0 > residual.len() - 1 {
        return BigUint::from(0u32);
    }
    if let Some(v) = memo.get(&residual) {
        return v.clone();
    }
    let rest: Vec<u32> = residual[1..].to_vec();
    let mut total = BigUint::from(0u32);
    let mut branches: Vec<(Vec<u32>, u64)> = Vec::new();
    for_each_decrement(&rest, d0, &mut |dec, ways| branches.push((dec, ways)));
    for (dec, ways) in branches {
        total += count_graphs_rec(dec, memo) * ways;
    }
    memo.insert(residual, total.clone());
    total
}

/// Exact number of labelled simple graphs realising the degree vector, by
/// peeling the maximum-degree vertex and distributing its edges over the
/// residual multiset (memoised; relabelling symmetry makes the count a
/// function of the multiset alone). Returns 0 for non-graphical sequences.
pub fn exact_count_graphs(d: &DegreeSequence) -> Result<BigUint> {
    let n = d.len();
    if n == 0 {
        return Err(Error::invalid("empty degree sequence"));
    }
    if n > EXACT_GRAPH_VERTEX_CAP {
        return Err(Error::invalid(format!(
            "exact graph counting is capped at {EXACT_GRAPH_VERTEX_CAP} vertices, got {n}"
        )));
    }
    if d.degrees.iter().any(|&x| x as usize >= n) {
        return Err(Error::invalid("degree exceeds n - 1"));
    }
    let mut memo = HashMap::new();
    Ok(count_graphs_rec(d.degrees.clone(), &mut memo))
}

type BigraphMemo = HashMap<(usize, Vec<u32>), BigUint>;

fn count_bigraphs_rec(cols: &[u32], mut rows: Vec<u32>, memo: &mut BigraphMemo) -> BigUint {
    rows.sort_unstable_by(|a, b| b.cmp(a));
    while rows.last() == Some(&0) {
        rows.pop();
    }
    if rows.first().is_some_and(|&r| r as usize > cols.len()) {
        return BigUint::from(0u32);
    }
    let Some((&c, tail)) = cols.split_first() else {
        return BigUint::from(u32::from(rows.is_empty()));
    };
    let c = c as usize;
    if c > rows.len() {
        return BigUint::from(0u32);
    }
    let key = (cols.len(), rows.clone());
    if let Some(v) = memo.get(&key) {
        return v.clone();
    }
    let mut total = BigUint::from(0u32);
    let mut branches: Vec<(Vec<u32>, u64)> = Vec::new();
    for_each_decrement(&rows, c, &mut |dec, ways| branches.push((dec, ways)));
    for (dec, ways) in branches {
        total += count_bigraphs_rec(tail, dec, memo) * ways;
    }
    memo.insert(key, total.clone());
    total
}

/// Exact number of 0/1 matrices with row sums `seq.s` and column sums
/// `seq.t`, by filling columns left to right over the residual row-sum
/// multiset. Returns 0 when the sums are not jointly realisable.
pub fn exact_count_bigraphs(seq: &BipartiteDegreeSequence) -> Result<BigUint> {
    let m = seq.s.len();
    let n = seq.t.len();
    if m == 0 || n == 0 {
        return Err(Error::invalid("empty bipartite degree sequence"));
    }
    if m * n > EXACT_BIGRAPH_SLOT_CAP {
        return Err(Error::invalid(format!(
            "exact bipartite counting is capped at {EXACT_BIGRAPH_SLOT_CAP} slots, got {}",
            m * n
        )));
    }
    if seq.s.iter().any(|&x| x as usize > n) || seq.t.iter().any(|&x| x as usize > m) {
        return Err(Error::invalid("degree exceeds the opposite part size"));
    }
    if seq.sum_s() != seq.sum_t() {
        return Ok(BigUint::from(0u32));
    }
    let mut memo = BigraphMemo::new();
    Ok(count_bigraphs_rec(&seq.t, seq.s.clone(), &mut memo))
}

/// Natural logarithm of a big integer; `-inf` for zero.
pub fn log_of_big(x: &BigUint) -> f64 {
    let bits = x.bits();
    if bits == 0 {
        return f64::NEG_INFINITY;
    }
    if bits <= 53 {
        return (x.to_u64_digits()[0] as f64).ln();
    }
    let shift = bits - 53;
    let top = (x >> shift).to_u64_digits()[0] as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Derived scalars of a graph degree sequence used by the count estimate.
#[derive(Clone, Copy, Debug)]
pub struct GraphEnumContext {
    pub d_bar: f64,
    pub r: f64,
    pub mu: f64,
    pub gamma2_sq: f64,
}

pub fn graph_enum_context(d: &DegreeSequence) -> Result<GraphEnumContext> {
    let n = d.len();
    if n < 2 {
        return Err(Error::invalid("need at least two vertices"));
    }
    let nf = n as f64;
    let d_bar = d.sum() as f64 / nf;
    let gamma2_sq = d
        .degrees
        .iter()
        .map(|&x| (f64::from(x) - d_bar).powi(2))
        .sum::<f64>()
        / ((nf - 1.0) * (nf - 1.0));
    Ok(GraphEnumContext {
        d_bar,
        r: d_bar * nf / 2.0,
        mu: d_bar / (nf - 1.0),
        gamma2_sq,
    })
}

/// Derived scalars of a bipartite degree sequence pair.
#[derive(Clone, Copy, Debug)]
pub struct BipartiteEnumContext {
    pub s_bar: f64,
    pub t_bar: f64,
    pub gamma2_s_sq: f64,
    pub gamma2_t_sq: f64,
    pub mu: f64,
    pub r: f64,
}

pub fn bipartite_enum_context(seq: &BipartiteDegreeSequence) -> Result<BipartiteEnumContext> {
    let m = seq.s.len();
    let n = seq.t.len();
    if m == 0 || n == 0 {
        return Err(Error::invalid("empty bipartite degree sequence"));
    }
    if seq.sum_s() != seq.sum_t() {
        return Err(Error::invalid("side sums differ"));
    }
    let (mf, nf) = (m as f64, n as f64);
    let s_bar = seq.sum_s() as f64 / mf;
    let t_bar = seq.sum_t() as f64 / nf;
    let gamma2_s_sq = seq
        .s
        .iter()
        .map(|&x| (f64::from(x) - s_bar).powi(2))
        .sum::<f64>()
        / (mf * mf);
    let gamma2_t_sq = seq
        .t
        .iter()
        .map(|&x| (f64::from(x) - t_bar).powi(2))
        .sum::<f64>()
        / (nf * nf);
    let r = seq.sum_s() as f64;
    Ok(BipartiteEnumContext {
        s_bar,
        t_bar,
        gamma2_s_sq,
        gamma2_t_sq,
        mu: r / (mf * nf),
        r,
    })
}

/// Log of an asymptotic count estimate, with a flag recording whether the
/// input satisfied the near-regularity hypotheses the estimate assumes.
#[derive(Clone, Copy, Debug)]
pub struct LogCountEstimate {
    pub log_count: f64,
    pub in_band: bool,
}

/// Log of the asymptotic number of labelled graphs with degree sequence `d`
/// in the dense near-regular regime:
/// `exp(1/4 - gamma2^2 / (4 mu^2 (1-mu)^2)) C(n(n-1)/2, r) C(n(n-1), 2r)^-1
/// prod_i C(n-1, d_i)`.
///
/// The band check (`|d_i - d_bar| <= n^(1/2+eps)` and `d_bar >= n / ln n`)
/// only gates the flag; the formula is evaluated regardless. A sequence with
/// odd total (non-integral edge count `r`) is rejected.
pub fn mw_log_count(d: &DegreeSequence, epsilon: f64) -> Result<LogCountEstimate> {
    let n = d.len();
    if n < 2 {
        return Err(Error::invalid("need at least two vertices"));
    }
    if d.degrees.iter().any(|&x| x as usize >= n) {
        return Err(Error::invalid("degree exceeds n - 1"));
    }
    let sum = d.sum();
    if sum % 2 != 0 {
        return Err(Error::invalid(
            "odd degree total: edge count r is not an integer",
        ));
    }
    let ctx = graph_enum_context(d)?;
    let correction = if ctx.gamma2_sq > 0.0 {
        ctx.gamma2_sq / (4.0 * ctx.mu * ctx.mu * (1.0 - ctx.mu) * (1.0 - ctx.mu))
    } else {
        0.0
    };
    let nf = n as f64;
    let n64 = n as u64;
    let r = sum / 2;
    let mut log_count = 0.25 - correction + ln_binom(n64 * (n64 - 1) / 2, r)
        - ln_binom(n64 * (n64 - 1), 2 * r);
    for &di in &d.degrees {
        log_count += ln_binom(n64 - 1, u64::from(di));
    }
    let band = nf.powf(0.5 + epsilon);
    let in_band = d
        .degrees
        .iter()
        .all(|&x| (f64::from(x) - ctx.d_bar).abs() <= band)
        && ctx.d_bar >= nf / nf.ln();
    Ok(LogCountEstimate { log_count, in_band })
}

/// Log of the asymptotic number of labelled bipartite graphs with side
/// degree sequences `seq.s`, `seq.t`:
/// `exp(-1/2 (1 - gamma2(s)^2/(mu(1-mu))) (1 - gamma2(t)^2/(mu(1-mu))))
/// C(mn, r)^-1 prod_i C(n, s_i) prod_j C(m, t_j)`.
///
/// Symmetric under transposing the two sides. Side sums must agree.
pub fn cgm_log_count(seq: &BipartiteDegreeSequence, epsilon: f64) -> Result<LogCountEstimate> {
    let m = seq.s.len();
    let n = seq.t.len();
    if m == 0 || n == 0 {
        return Err(Error::invalid("empty bipartite degree sequence"));
    }
    if seq.s.iter().any(|&x| x as usize > n) || seq.t.iter().any(|&x| x as usize > m) {
        return Err(Error::invalid("degree exceeds the opposite part size"));
    }
    if seq.sum_s() != seq.sum_t() {
        return Err(Error::invalid("side sums differ"));
    }
    let ctx = bipartite_enum_context(seq)?;
    let spread = ctx.mu * (1.0 - ctx.mu);
    let ratio = |g2: f64| if g2 > 0.0 { g2 / spread } else { 0.0 };
    let mut log_count = -0.5 * (1.0 - ratio(ctx.gamma2_s_sq)) * (1.0 - ratio(ctx.gamma2_t_sq))
        - ln_binom((m * n) as u64, ctx.r as u64);
    for &si in &seq.s {
        log_count += ln_binom(n as u64, u64::from(si));
    }
    for &tj in &seq.t {
        log_count += ln_binom(m as u64, u64::from(tj));
    }
    let (mf, nf) = (m as f64, n as f64);
    let in_band = seq
        .s
        .iter()
        .all(|&x| (f64::from(x) - ctx.s_bar).abs() <= mf.powf(0.5 + epsilon))
        && seq
            .t
            .iter()
            .all(|&x| (f64::from(x) - ctx.t_bar).abs() <= nf.powf(0.5 + epsilon))
        && ctx.s_bar >= mf / mf.ln().sqrt()
        && ctx.t_bar >= nf / nf.ln().sqrt()
        && mf >= nf / nf.ln().sqrt()
        && mf <= nf * nf.ln().sqrt();
    Ok(LogCountEstimate { log_count, in_band })
}

/// Exact and approximate logs of the binomial-coefficient ratio that arises
/// when one vertex's edges are removed from an edge-count-constrained
/// ensemble.
#[derive(Clone, Copy, Debug)]
pub struct BinomialRatio {
    pub exact_log: f64,
    pub approx_log: f64,
    pub delta1: f64,
    pub delta2: f64,
    /// `|delta1| <= n^(8/5)` and `|delta2| <= n^(3/5)`, the regime where the
    /// approximation's error term is controlled.
    pub in_band: bool,
}

/// Compares the exact log of the one-vertex-removal binomial ratio with its
/// closed-form quadratic approximation.
///
/// Bipartite (`m` from the case): ratio
/// `C(mn, r) / C(m(n-1), r-d) * p^d (1-p)^(m-d)`, approximation
/// `delta1 (delta1 - 2 n delta2) / (2 p (1-p) m n^2)` where
/// `delta1 = r - pmn`, `delta2 = d - pm`.
///
/// Graph: ratio
/// `C((n-1)(n-2)/2, r-d) C((n-1)(n-2), 2r-2d)^-1 /
///  (C(n(n-1)/2, r) C(n(n-1), 2r)^-1) * p^d (1-p)^(n-1-d)`,
/// approximation `2 delta1 (delta1 - n delta2) / (p (1-p) n^3)` where
/// `delta1 = r - p n(n-1)/2`, `delta2 = d - p(n-1)`.
pub fn binomial_ratio_approx(
    case: EnumCase,
    n: usize,
    r: u64,
    d: u64,
    p: f64,
) -> Result<BinomialRatio> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid("edge probability must be interior"));
    }
    let nf = n as f64;
    let q = 1.0 - p;
    let (exact_log, delta1, delta2) = match case {
        EnumCase::Bipartite { m } => {
            if m == 0 || n == 0 {
                return Err(Error::invalid("empty part"));
            }
            let (m64, n64) = (m as u64, n as u64);
            if d > m64 || r > m64 * n64 || r < d || r - d > m64 * (n64 - 1) {
                return Err(Error::invalid("edge totals outside binomial support"));
            }
            let exact = ln_binom(m64 * n64, r) - ln_binom(m64 * (n64 - 1), r - d)
                + d as f64 * p.ln()
                + (m64 - d) as f64 * q.ln();
            (exact, r as f64 - p * (m * n) as f64, d as f64 - p * m as f64)
        }
        EnumCase::Graph => {
            if n < 3 {
                return Err(Error::invalid("graph ratio needs at least three vertices"));
            }
            let n64 = n as u64;
            let slots = n64 * (n64 - 1) / 2;
            let sub_slots = (n64 - 1) * (n64 - 2) / 2;
            if d > n64 - 1 || r > slots || r < d || r - d > sub_slots {
                return Err(Error::invalid("edge totals outside binomial support"));
            }
            let exact = ln_binom(sub_slots, r - d) - ln_binom(2 * sub_slots, 2 * (r - d))
                - ln_binom(slots, r)
                + ln_binom(2 * slots, 2 * r)
                + d as f64 * p.ln()
                + (n64 - 1 - d) as f64 * q.ln();
            (
                exact,
                r as f64 - p * slots as f64,
                d as f64 - p * (nf - 1.0),
            )
        }
    };
    let approx_log = match case {
        EnumCase::Bipartite { m } => {
            delta1 * (delta1 - 2.0 * nf * delta2) / (2.0 * p * q * m as f64 * nf * nf)
        }
        EnumCase::Graph => 2.0 * delta1 * (delta1 - nf * delta2) / (p * q * nf * nf * nf),
    };
    Ok(BinomialRatio {
        exact_log,
        approx_log,
        delta1,
        delta2,
        in_band: delta1.abs() <= nf.powf(1.6) && delta2.abs() <= nf.powf(0.6),
    })
}

/// Inputs for the conditional-degree formulas.
///
/// `beta` holds the normalized degree residuals of the ambient `n` vertices:
/// graph case `d_w = p(n-1) + beta_w sqrt(p(1-p)(n-1))`, bipartite case
/// `t_w = pm + beta_w sqrt(p(1-p)m)`. The counted subset occupies the first
/// `h` coordinates; the distinguished vertex is the last coordinate (graph)
/// or sits on the opposite side with residual `alpha` (bipartite, where its
/// degree is `s = pn + alpha sqrt(p(1-p)n)`). `gamma` is the target degree
/// residual on the `sqrt(p(1-p)n)` scale.
#[derive(Clone, Debug)]
pub struct BalancedDegreeInputs {
    pub beta: Vec<f64>,
    pub alpha: f64,
    pub h: usize,
    pub gamma: f64,
}

impl BalancedDegreeInputs {
    fn validate(&self, n: usize) -> Result<()> {
        if self.beta.len() != n {
            return Err(Error::invalid(format!(
                "residual vector has length {}, expected {n}",
                self.beta.len()
            )));
        }
        if self.beta.iter().any(|b| !b.is_finite())
            || !self.alpha.is_finite()
            || !self.gamma.is_finite()
        {
            return Err(Error::invalid("residuals must be finite"));
        }
        if self.h == 0 || self.h >= n {
            return Err(Error::invalid(format!(
                "subset size {} outside [1, {}]",
                self.h,
                n - 1
            )));
        }
        Ok(())
    }
}

fn require_interior(p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!(
            "edge probability must lie strictly inside (0, 1), got {p}"
        )));
    }
    Ok(())
}

fn case_m(case: EnumCase) -> Result<Option<usize>> {
    match case {
        EnumCase::Graph => Ok(None),
        EnumCase::Bipartite { m } if m >= 1 => Ok(Some(m)),
        EnumCase::Bipartite { .. } => Err(Error::invalid("empty opposite part")),
    }
}

/// Gaussian-form probability of a subset degree in the balanced regime, plus
/// flags for the hypotheses it simplifies under.
#[derive(Clone, Copy, Debug)]
pub struct BalancedProbability {
    pub value: f64,
    /// `|h - n/2| <= sqrt(n ln n)`.
    pub h_in_band: bool,
    /// `|sum of beta| <= n^(5/6)`.
    pub beta_sum_in_band: bool,
}

/// Probability that the distinguished vertex has exactly
/// `ph + gamma sqrt(p(1-p)n)` neighbours inside the chosen `h`-subset, in
/// the balanced near-half regime:
/// `sqrt(2)/sqrt(pi p (1-p) n) * exp(-(2 gamma - c)^2 / 2)` where `c` is the
/// residual drift `beta_n + sum_V beta / (n/2)` (graph) or
/// `alpha + sum_V beta / (sqrt(mn)/2)` (bipartite).
pub fn cond_degree_balanced(
    case: EnumCase,
    inputs: &BalancedDegreeInputs,
    n: usize,
    p: f64,
) -> Result<BalancedProbability> {
    require_interior(p)?;
    if n < 2 {
        return Err(Error::invalid("need at least two vertices"));
    }
    inputs.validate(n)?;
    let m = case_m(case)?;
    let nf = n as f64;
    let sum_v: f64 = inputs.beta[..inputs.h].iter().sum();
    let drift = match m {
        None => inputs.beta[n - 1] + sum_v / (nf / 2.0),
        Some(m) => inputs.alpha + sum_v / ((m as f64 * nf).sqrt() / 2.0),
    };
    let c = 2.0 * inputs.gamma - drift;
    let value = std::f64::consts::SQRT_2 / (std::f64::consts::PI * p * (1.0 - p) * nf).sqrt()
        * (-0.5 * c * c).exp();
    let total: f64 = inputs.beta.iter().sum();
    Ok(BalancedProbability {
        value,
        h_in_band: (inputs.h as f64 - nf / 2.0).abs() <= (nf * nf.ln()).sqrt(),
        beta_sum_in_band: total.abs() <= nf.powf(5.0 / 6.0),
    })
}

/// `sum over i<j in A of (beta_i - beta_j)^2`, via
/// `|A| sum beta^2 - (sum beta)^2`.
fn pair_square_sum(betas: &[f64]) -> f64 {
    let s: f64 = betas.iter().sum();
    let sq: f64 = betas.iter().map(|b| b * b).sum();
    betas.len() as f64 * sq - s * s
}

/// Result of the explicit conditional-degree evaluation.
#[derive(Clone, Copy, Debug)]
pub struct BoundedDegreeProbability {
    pub value: f64,
    /// True when `|t - ph|` exceeded `2 sqrt(n) (ln n)^2` and the returned
    /// value is the sub-Gaussian tail envelope `exp(-(t-ph)^2 / (4n))`
    /// rather than the explicit formula.
    pub is_tail_envelope: bool,
    /// Every `|beta| <= (ln n)^2`.
    pub beta_band_ok: bool,
    /// Mean-square residual condition: `sum beta^2 / n <= (ln n)^(1/9)`
    /// (graph), with an extra `n/m` factor in the bipartite case.
    pub beta_mean_square_ok: bool,
}

/// Probability that the distinguished vertex has exactly `t` neighbours
/// inside the `h`-subset, evaluated from the explicit product form:
/// a hypergeometric-style binomial prefactor times the exponential of a
/// six-term residual bracket. Far from the bulk (`|t - ph|` beyond
/// `2 sqrt(n) (ln n)^2`) the sub-Gaussian envelope is returned instead,
/// flagged as such.
pub fn cond_degree_bounded(
    case: EnumCase,
    inputs: &BalancedDegreeInputs,
    n: usize,
    p: f64,
    t: i64,
) -> Result<BoundedDegreeProbability> {
    require_interior(p)?;
    if n < 2 {
        return Err(Error::invalid("need at least two vertices"));
    }
    inputs.validate(n)?;
    let m = case_m(case)?;
    let nf = n as f64;
    let h = inputs.h;
    let hf = h as f64;
    let q = 1.0 - p;
    let tf = t as f64;

    let log_band = nf.ln() * nf.ln();
    let beta_band_ok = inputs.beta.iter().all(|b| b.abs() <= log_band);
    let sum_sq: f64 = inputs.beta.iter().map(|b| b * b).sum();
    let beta_mean_square_ok = match m {
        None => sum_sq / nf <= nf.ln().powf(1.0 / 9.0),
        Some(m) => (nf / m as f64) * (sum_sq / nf) <= nf.ln().powf(1.0 / 9.0),
    };

    let centred = tf - p * hf;
    if centred.abs() > 2.0 * nf.sqrt() * log_band {
        return Ok(BoundedDegreeProbability {
            value: (-centred * centred / (4.0 * nf)).exp(),
            is_tail_envelope: true,
            beta_band_ok,
            beta_mean_square_ok,
        });
    }

    let total: f64 = inputs.beta.iter().sum();
    let (log_pref, bracket) = match m {
        None => {
            // Distinguished vertex is the last coordinate, outside the subset.
            let beta_n = inputs.beta[n - 1];
            let v = &inputs.beta[..h];
            let vc = &inputs.beta[h..n - 1];
            let sum_v: f64 = v.iter().sum();
            let sum_vc: f64 = vc.iter().sum();
            let d_n = p * (nf - 1.0) + beta_n * (p * q * (nf - 1.0)).sqrt();
            let log_pref = ln_binom_real(hf, tf)
                + ln_binom_real(nf - hf - 1.0, d_n - tf)
                - ln_binom_real(nf - 1.0, d_n);
            let bracket = total * (total - 2.0 * nf * beta_n) / (2.0 * nf * nf)
                - (p / q).sqrt()
                    * ((1.0 - tf / (p * hf)) * sum_v
                        + (1.0 - (d_n - tf) / (p * (nf - hf))) * sum_vc)
                    / (nf - 1.0).sqrt()
                - 0.5 * (sum_sq - beta_n * beta_n) / (nf - 1.0)
                + pair_square_sum(v) / (2.0 * nf * hf)
                + pair_square_sum(vc) / (2.0 * nf * (nf - hf));
            (log_pref, bracket)
        }
        Some(m) => {
            let mf = m as f64;
            let v = &inputs.beta[..h];
            let vc = &inputs.beta[h..];
            let sum_v: f64 = v.iter().sum();
            let sum_vc: f64 = vc.iter().sum();
            let s_m = p * nf + inputs.alpha * (p * q * nf).sqrt();
            let log_pref = ln_binom_real(hf, tf) + ln_binom_real(nf - hf, s_m - tf)
                - ln_binom_real(nf, s_m);
            let bracket = total * (total - 2.0 * (mf * nf).sqrt() * inputs.alpha)
                / (2.0 * mf * nf)
                - (p / q).sqrt()
                    * ((1.0 - tf / (p * hf)) * sum_v
                        + (1.0 - (s_m - tf) / (p * (nf - hf))) * sum_vc)
                    / mf.sqrt()
                - 0.5 * sum_sq / mf
                + pair_square_sum(v) / (2.0 * mf * hf)
                + pair_square_sum(vc) / (2.0 * mf * (nf - hf));
            (log_pref, bracket)
        }
    };
    Ok(BoundedDegreeProbability {
        value: (log_pref + bracket).exp(),
        is_tail_envelope: false,
        beta_band_ok,
        beta_mean_square_ok,
    })
}

/// Monte Carlo estimate with its standard error.
#[derive(Clone, Copy, Debug)]
pub struct ExpectationEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Monte Carlo evaluation of the subset-degree probability in expectation
/// form: the binomial prefactor times the average over uniform slices
/// `S_1` (a `t`-subset of the counted part) and `S_2` (the complementary
/// slice absorbing the rest of the distinguished vertex's degree) of an
/// exponential residual functional.
///
/// Infeasible slice sizes make the event empty and yield 0. The
/// distinguished degree is rounded to the nearest integer to define the
/// slice sizes, so callers should supply residuals lying on the integer
/// degree lattice.
pub fn expectation_form(
    case: EnumCase,
    inputs: &BalancedDegreeInputs,
    n: usize,
    p: f64,
    t: i64,
    mc_samples: usize,
    rng: &mut SplitMix64,
) -> Result<ExpectationEstimate> {
    require_interior(p)?;
    if n < 2 {
        return Err(Error::invalid("need at least two vertices"));
    }
    if mc_samples < 1000 {
        return Err(Error::invalid(
            "at least 1000 Monte Carlo samples are required",
        ));
    }
    inputs.validate(n)?;
    let m = case_m(case)?;
    let nf = n as f64;
    let h = inputs.h;
    let q = 1.0 - p;
    let total: f64 = inputs.beta.iter().sum();

    // Pools for the two uniform slices and the scale of the functional.
    let (pool1, pool2, degree, pre_exp, scale_len) = match m {
        None => {
            let beta_n = inputs.beta[n - 1];
            let d_n = (p * (nf - 1.0) + beta_n * (p * q * (nf - 1.0)).sqrt()).round() as i64;
            (
                &inputs.beta[..h],
                &inputs.beta[h..n - 1],
                d_n,
                total * (total - 2.0 * nf * beta_n) / (2.0 * nf * nf),
                nf - 1.0,
            )
        }
        Some(m) => {
            let mf = m as f64;
            let s_m = (p * nf + inputs.alpha * (p * q * nf).sqrt()).round() as i64;
            (
                &inputs.beta[..h],
                &inputs.beta[h..],
                s_m,
                total * (total - 2.0 * (mf * nf).sqrt() * inputs.alpha) / (2.0 * mf * nf),
                mf,
            )
        }
    };
    let k2 = degree - t;
    if t < 0 || t as usize > pool1.len() || k2 < 0 || k2 as usize > pool2.len() || degree < 0 {
        return Ok(ExpectationEstimate {
            value: 0.0,
            std_error: 0.0,
        });
    }
    let (t_us, k2_us) = (t as usize, k2 as usize);
    let log_pref = pre_exp + ln_binom(pool1.len() as u64, t_us as u64)
        + ln_binom(pool2.len() as u64, k2_us as u64)
        - ln_binom(match m {
            None => nf as u64 - 1,
            Some(_) => nf as u64,
        }, degree as u64);

    // X = -sqrt(p/q)/sqrt(L) * (T1 - s1/p) - 1/(2L) * ((p/q) T2 + cdiff s2)
    // where s1, s2 are the slice sums of beta and beta^2 and T1, T2 the
    // totals over the participating coordinates.
    let t1: f64 = pool1.iter().chain(pool2.iter()).sum();
    let t2: f64 = pool1.iter().chain(pool2.iter()).map(|b| b * b).sum();
    let c_lin = -(p / q).sqrt() / scale_len.sqrt();
    let c_sq = -0.5 / scale_len;
    let cdiff = q / p - p / q;

    let mut idx1: Vec<u32> = (0..pool1.len() as u32).collect();
    let mut idx2: Vec<u32> = (0..pool2.len() as u32).collect();
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    for sample in 0..mc_samples {
        let mut s1 = 0.0f64;
        let mut s2 = 0.0f64;
        for j in 0..t_us {
            let pick = j + rng.next_below((pool1.len() - j) as u64) as usize;
            idx1.swap(j, pick);
            let b = pool1[idx1[j] as usize];
            s1 += b;
            s2 += b * b;
        }
        for j in 0..k2_us {
            let pick = j + rng.next_below((pool2.len() - j) as u64) as usize;
            idx2.swap(j, pick);
            let b = pool2[idx2[j] as usize];
            s1 += b;
            s2 += b * b;
        }
        let x = c_lin * (t1 - s1 / p) + c_sq * ((p / q) * t2 + cdiff * s2);
        let w = x.exp();
        let delta = w - mean;
        mean += delta / (sample + 1) as f64;
        m2 += delta * (w - mean);
    }
    let variance = m2 / (mc_samples as f64 - 1.0);
    let se = (variance / mc_samples as f64).sqrt();
    let pref = log_pref.exp();
    Ok(ExpectationEstimate {
        value: pref * mean,
        std_error: pref * se,
    })
}

/// Evaluation mode for [`slice_exp_moment`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SliceMode {
    /// Exhaustive average over all size-`s` subsets (capped length).
    Exact,
    /// Second-order approximation `exp(EX + Var X / 2)` with
    /// `EX = (s/n) sum a` and `Var X = s(n-s) eta^2 / (n(n-1))`,
    /// `eta^2 = sum a^2 - (sum a)^2 / n`.
    Approx,
}

/// `E exp(sum of a over a uniform size-s subset)`.
pub fn slice_exp_moment(a: &[f64], s: usize, mode: SliceMode) -> Result<f64> {
    let n = a.len();
    if n == 0 {
        return Err(Error::invalid("empty coefficient vector"));
    }
    if s > n {
        return Err(Error::invalid("subset size exceeds vector length"));
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(Error::invalid("coefficients must be finite"));
    }
    match mode {
        SliceMode::Exact => {
            if n > EXACT_SLICE_CAP {
                return Err(Error::invalid(format!(
                    "exhaustive slice enumeration is capped at {EXACT_SLICE_CAP}, got {n}"
                )));
            }
            if s == 0 {
                return Ok(1.0);
            }
            let full: f64 = a.iter().sum();
            if s == n {
                return Ok(full.exp());
            }
            let limit = 1u64 << n;
            let mut word = (1u64 << s) - 1;
            let mut acc = crate::numeric::Kahan::new();
            let mut count = 0u64;
            while word < limit {
                let mut sum = 0.0;
                let mut bits = word;
                while bits != 0 {
                    let i = bits.trailing_zeros() as usize;
                    sum += a[i];
                    bits &= bits - 1;
                }
                acc.add(sum.exp());
                count += 1;
                // Gosper's hack: next word with the same popcount.
                let low = word & word.wrapping_neg();
                let ripple = word + low;
                word = ripple | (((word ^ ripple) >> 2) / low);
            }
            Ok(acc.total() / count as f64)
        }
        SliceMode::Approx => {
            let nf = n as f64;
            let sum: f64 = a.iter().sum();
            let sum_sq: f64 = a.iter().map(|x| x * x).sum();
            let ex = s as f64 / nf * sum;
            let eta_sq = (sum_sq - sum * sum / nf).max(0.0);
            let var = if n >= 2 {
                (s * (n - s)) as f64 * eta_sq / (nf * (nf - 1.0))
            } else {
                0.0
            };
            Ok((ex + 0.5 * var).exp())
        }
    }
}
