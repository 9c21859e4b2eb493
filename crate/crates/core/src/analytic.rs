//! First-order analytic predictions for the two-community process.
//!
//! These are the closed-form limits the simulator and the exact oracles are
//! checked against: the winner probability, the binomial-comparison
//! expansion, the joint law of the day-one intersections, the star
//! parameters entering the day-one enumeration, and the day-two expectations.
//! Every formula is a leading-order asymptotic in `n`; callers compare
//! against exact or empirical values at configured tolerances.

use std::f64::consts::PI;

use crate::error::Result;
use crate::normal::{integrate, normal_cdf, normal_pdf};
use crate::params::ModelParams;

/// `P[red ends up unanimous]` to first order:
/// `Phi(p * delta * sqrt(2) / sqrt(pi p (1 - p)))`.
pub fn win_probability(params: &ModelParams) -> Result<f64> {
    params.require_nondegenerate("win_probability")?;
    let z = params.p * params.delta as f64 * 2f64.sqrt() / (PI * params.pq()).sqrt();
    Ok(normal_cdf(z))
}

/// First-order value of `P[Bin(n + tau, p + alpha/n) >= Bin(n, p + beta/n)]`:
/// `1/2 + (p tau + 1/2 + alpha - beta) / (2 sqrt(pi p (1-p) n))`.
pub fn chop_probability_approx(n: u64, tau: i64, p: f64, alpha: f64, beta: f64) -> Result<f64> {
    require_open_unit(p, "chop_probability_approx")?;
    let nf = n as f64;
    Ok(0.5 + (p * tau as f64 + 0.5 + alpha - beta) / (2.0 * (PI * p * (1.0 - p) * nf).sqrt()))
}

/// First-order moments of a `Bin(~n, ~p)` draw conditioned on winning or
/// losing a comparison against an independent copy.
#[derive(Debug, Clone, Copy)]
pub struct ChopMoments {
    /// `E[X | X beats the other side] ~ pn + sqrt(p(1-p)n/pi)`.
    pub mean_plus: f64,
    /// `E[X | X loses] ~ pn - sqrt(p(1-p)n/pi)`.
    pub mean_minus: f64,
    /// Shared first-order variance `(1 - 1/pi) p (1-p) n`.
    pub variance: f64,
}

pub fn chop_moments_approx(n: u64, p: f64) -> Result<ChopMoments> {
    require_open_unit(p, "chop_moments_approx")?;
    let nf = n as f64;
    let pq = p * (1.0 - p);
    let shift = (pq * nf / PI).sqrt();
    Ok(ChopMoments {
        mean_plus: p * nf + shift,
        mean_minus: p * nf - shift,
        variance: (1.0 - 1.0 / PI) * pq * nf,
    })
}

/// Centering and scale turning the day-one intersection counts
/// `(x, y) = (|R0 ∩ R1|, |B0 ∩ B1|)` into order-one coordinates
/// `x' = (x - x_center) / scale`, `y' = (y - y_center) / scale`.
#[derive(Debug, Clone, Copy)]
pub struct DayOneCentering {
    pub x_center: f64,
    pub y_center: f64,
    /// `sqrt(n / 4 pi)`: one lattice step is `1/scale` in primed units.
    pub scale: f64,
}

impl DayOneCentering {
    pub fn x_prime(&self, x: f64) -> f64 {
        (x - self.x_center) / self.scale
    }

    pub fn y_prime(&self, y: f64) -> f64 {
        (y - self.y_center) / self.scale
    }
}

pub fn day_one_centering(params: &ModelParams) -> Result<DayOneCentering> {
    params.require_nondegenerate("day_one_centering")?;
    let nf = params.nf();
    let p = params.p;
    let delta = params.delta as f64;
    let denom = 2.0 * (PI * params.pq() * nf).sqrt();
    let x_center = (0.5 + (p * (delta - 1.0) + 0.5) / denom) * nf;
    let y_center = (0.5 + (p * (-delta - 1.0) + 0.5) / denom) * nf;
    Ok(DayOneCentering {
        x_center,
        y_center,
        scale: (nf / (4.0 * PI)).sqrt(),
    })
}

/// Asymptotic correlation of the primed day-one coordinates: `1 / (1 + pi)`.
pub fn day_one_correlation() -> f64 {
    1.0 / (1.0 + PI)
}

/// Joint first-order density of the primed day-one coordinates, already
/// including the lattice Jacobian: summing over integer `(x, y)` gives 1.
pub fn day_one_density_prime(params: &ModelParams, x_prime: f64, y_prime: f64) -> Result<f64> {
    params.require_nondegenerate("day_one_density")?;
    let nf = params.nf();
    let quad = (1.0 + PI) * x_prime * x_prime - 2.0 * x_prime * y_prime
        + (1.0 + PI) * y_prime * y_prime;
    Ok(2.0 / (nf * (PI * (2.0 + PI)).sqrt()) * (-quad / (2.0 * PI * (2.0 + PI))).exp())
}

/// [`day_one_density_prime`] evaluated at an integer pair of intersection
/// sizes.
pub fn day_one_density(params: &ModelParams, x: i64, y: i64) -> Result<f64> {
    let centering = day_one_centering(params)?;
    day_one_density_prime(
        params,
        centering.x_prime(x as f64),
        centering.y_prime(y as f64),
    )
}

/// Parameters of the day-one enumeration at fixed degree residuals
/// `q_i = p + alpha_i / n` and fixed primed coordinates `(x, y)`.
#[derive(Debug, Clone, Copy)]
pub struct StarParams {
    /// Per-vertex stay probability on the red side.
    pub r: f64,
    /// Per-vertex stay probability on the blue side.
    pub b: f64,
    /// Conditional mean of the signed degree sum driving day two.
    pub mu: f64,
    /// Scale of that sum: `sqrt((2 - 2/pi) p (1-p)) n`.
    pub sigma: f64,
}

pub fn star_params(
    params: &ModelParams,
    alpha0: f64,
    alpha1: f64,
    alpha2: f64,
    x: f64,
    y: f64,
) -> Result<StarParams> {
    params.require_nondegenerate("star_params")?;
    let nf = params.nf();
    let p = params.p;
    let pq = params.pq();
    let delta = params.delta as f64;
    let denom = 2.0 * (PI * pq * nf).sqrt();
    let r = 0.5 + (p * (delta - 1.0) + 0.5 + alpha0 - alpha2) / denom;
    let b = 0.5 + (p * (-delta - 1.0) + 0.5 + alpha1 - alpha2) / denom;
    let mu = (alpha1 - alpha0 - 2.0 * p * delta) / PI * nf + 2.0 * (pq * nf / PI).sqrt() * (x - y);
    let sigma = ((2.0 - 2.0 / PI) * pq).sqrt() * nf;
    Ok(StarParams { r, b, mu, sigma })
}

/// Day-two first-order expectations given the day-one lead
/// `lead1 = |R1| - |B1|`.
///
/// Orientation: day-one red vertices are exactly the ones with unusually
/// high degree into the red side, so a vertex that started red sees an
/// *inflated* count of day-one-red neighbours (degree-biased adjacency)
/// and is the likelier one to be red again on day two. At `lead1 = 0`
/// this puts `Phi(sqrt(2/pi)) = 0.7875` of the initially-red vertices in
/// `R2` and `0.2125` of the initially-blue ones, a split confirmed by
/// direct simulation.
#[derive(Debug, Clone, Copy)]
pub struct DayTwoExpectations {
    /// `eta = sqrt(p / (2 (1-p) n)) * lead1`, the integral half-width.
    pub eta: f64,
    /// `E|R0 ∩ R2| ~ n P[N(0,2) >= -2/sqrt(pi) - sqrt(2) eta]`.
    pub from_red: f64,
    /// `E|B0 ∩ R2| ~ n P[N(0,2) >= 2/sqrt(pi) - sqrt(2) eta]`.
    pub from_blue: f64,
    /// `E|R2| ~ n + n int_{-eta}^{eta} phi(u - sqrt(2/pi)) du` (signed).
    pub total: f64,
}

pub fn day_two_expectations(params: &ModelParams, lead1: i64) -> Result<DayTwoExpectations> {
    params.require_nondegenerate("day_two_expectations")?;
    let nf = params.nf();
    let p = params.p;
    let eta = (p / (2.0 * (1.0 - p) * nf)).sqrt() * lead1 as f64;
    let c = (2.0 / PI).sqrt();
    let from_red = nf * normal_cdf(c + eta);
    let from_blue = nf * (1.0 - normal_cdf(c - eta));
    // Signed integral over [-eta, eta]; the integrand is negligible outside
    // [c - 12, c + 12] (tails < 1e-30), so endpoints are clamped there.
    let f = |u: f64| normal_pdf(u - c);
    let lo = (-eta).clamp(c - 12.0, c + 12.0);
    let hi = eta.clamp(c - 12.0, c + 12.0);
    let total = nf + nf * integrate(&f, lo, hi, 1e-10);
    Ok(DayTwoExpectations {
        eta,
        from_red,
        from_blue,
        total,
    })
}

/// Day-three safety margin: the expected per-vertex degree advantage
/// `p (|R2| - |B2|)` of the leading side, compared against the configured
/// fluctuation scale `kappa sqrt(n) (log n)^eps`. When `safe`, every vertex
/// is predicted to flip to the leading colour at the next step.
#[derive(Debug, Clone, Copy)]
pub struct DayThreeMargin {
    pub margin: f64,
    pub threshold: f64,
    pub safe: bool,
}

pub fn day_three_margin(
    params: &ModelParams,
    size_r2: u64,
    size_b2: u64,
    kappa: f64,
    eps_cfg: f64,
) -> Result<DayThreeMargin> {
    params.require_nondegenerate("day_three_margin")?;
    if size_r2 + size_b2 != params.total_vertices() {
        return Err(crate::error::Error::invalid(format!(
            "|R2| + |B2| = {} but the graph has {} vertices",
            size_r2 + size_b2,
            params.total_vertices()
        )));
    }
    let nf = params.nf();
    let margin = params.p * (size_r2 as f64 - size_b2 as f64);
    let threshold = kappa * nf.sqrt() * nf.ln().powf(eps_cfg);
    Ok(DayThreeMargin {
        margin,
        threshold,
        safe: margin.abs() > threshold,
    })
}

fn require_open_unit(p: f64, what: &'static str) -> Result<()> {
    if p <= 0.0 || p >= 1.0 || !p.is_finite() {
        return Err(crate::error::Error::DegenerateProbability { what, p });
    }
    Ok(())
}
