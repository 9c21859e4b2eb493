//! Kolmogorov distances over lower-left orthants, in one and two
//! dimensions, against either a reference distribution function or a second
//! sample.
//!
//! All four routines are exact suprema, not grid approximations: step
//! functions only change at sample coordinates, so the supremum is attained
//! either at a closed corner of the sample grid or in the open limit
//! approaching one, and both families of candidates are enumerated. The 2D
//! one-sample form assumes the reference distribution function is
//! continuous and accepts `+inf` arguments (for the corner limits along the
//! far edges).

use crate::error::{Error, Result};

fn require_nonempty(len: usize, what: &'static str) -> Result<()> {
    if len == 0 {
        return Err(Error::invalid(format!("{what}: empty sample")));
    }
    Ok(())
}

fn sorted(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).expect("NaN in sample"));
    v
}

/// Exact sup |F_n - F| for a one-dimensional sample against a distribution
/// function `cdf` (right-continuous, nondecreasing).
pub fn ks_1d_vs_cdf<F: Fn(f64) -> f64>(sample: &[f64], cdf: F) -> Result<f64> {
    require_nonempty(sample.len(), "ks_1d_vs_cdf")?;
    let xs = sorted(sample);
    let m = xs.len() as f64;
    let mut best = 0.0f64;
    let mut i = 0;
    while i < xs.len() {
        let mut j = i;
        while j < xs.len() && xs[j] == xs[i] {
            j += 1;
        }
        let f = cdf(xs[i]);
        // Just below the value the empirical cdf is i/m; at it, j/m.
        best = best.max(f - i as f64 / m).max(j as f64 / m - f);
        i = j;
    }
    Ok(best)
}

/// Exact sup |F_n - G_k| between the empirical distribution functions of
/// two one-dimensional samples.
pub fn ks_1d_two_sample(a: &[f64], b: &[f64]) -> Result<f64> {
    require_nonempty(a.len(), "ks_1d_two_sample")?;
    require_nonempty(b.len(), "ks_1d_two_sample")?;
    let xs = sorted(a);
    let ys = sorted(b);
    let (m, k) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut best = 0.0f64;
    while i < xs.len() || j < ys.len() {
        let v = match (xs.get(i), ys.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < xs.len() && xs[i] == v {
            i += 1;
        }
        while j < ys.len() && ys[j] == v {
            j += 1;
        }
        best = best.max((i as f64 / m - j as f64 / k).abs());
    }
    Ok(best)
}

/// Deduplicated sorted coordinate values and each point's rank among them.
fn ranks(points: &[[f64; 2]], axis: usize) -> (Vec<f64>, Vec<usize>) {
    let unique = {
        let mut v: Vec<f64> = points.iter().map(|p| p[axis]).collect();
        v.sort_by(|a, b| a.partial_cmp(b).expect("NaN in sample"));
        v.dedup();
        v
    };
    let rank = points
        .iter()
        .map(|p| unique.partition_point(|&u| u < p[axis]))
        .collect();
    (unique, rank)
}

/// Groups point indices by their rank on the given axis.
fn by_rank(ranks: &[usize], buckets: usize) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); buckets];
    for (idx, &r) in ranks.iter().enumerate() {
        groups[r].push(idx);
    }
    groups
}

/// Exact sup |F_n - F| over lower-left quadrants for a two-dimensional
/// sample against a continuous joint distribution function. `cdf` is
/// evaluated at sample-coordinate corners and, for the far edges, at
/// `+inf` arguments, which it must map to the marginal limits.
pub fn ks_2d_vs_cdf<F: Fn(f64, f64) -> f64>(sample: &[[f64; 2]], cdf: F) -> Result<f64> {
    require_nonempty(sample.len(), "ks_2d_vs_cdf")?;
    let m = sample.len() as f64;
    let (ux, xr) = ranks(sample, 0);
    let (uy, yr) = ranks(sample, 1);
    let (a, b) = (ux.len(), uy.len());
    let x_groups = by_rank(&xr, a);

    // F_n - F can only peak at a closed sample-grid corner; F - F_n only in
    // the open limit at a corner, where the strict count equals the closed
    // count of the previous grid position (captured by reading each count
    // row against the next corner's cdf value).
    let mut best = cdf(ux[0], f64::INFINITY).max(cdf(f64::INFINITY, uy[0]));
    let mut hist = vec![0u32; b];
    for i in 0..a {
        for &idx in &x_groups[i] {
            hist[yr[idx]] += 1;
        }
        let x_next = if i + 1 < a { ux[i + 1] } else { f64::INFINITY };
        let mut running = 0u32;
        for j in 0..b {
            running += hist[j];
            let fn_ij = running as f64 / m;
            best = best.max(fn_ij - cdf(ux[i], uy[j]));
            let y_next = if j + 1 < b { uy[j + 1] } else { f64::INFINITY };
            best = best.max(cdf(x_next, y_next) - fn_ij);
        }
    }
    Ok(best)
}

/// Exact sup |F_n - G_k| over lower-left quadrants between the empirical
/// distribution functions of two two-dimensional samples.
pub fn ks_2d_two_sample(a: &[[f64; 2]], b: &[[f64; 2]]) -> Result<f64> {
    require_nonempty(a.len(), "ks_2d_two_sample")?;
    require_nonempty(b.len(), "ks_2d_two_sample")?;
    let all: Vec<[f64; 2]> = a.iter().chain(b).copied().collect();
    let (ux, xr_all) = ranks(&all, 0);
    let (uy, yr_all) = ranks(&all, 1);
    let (na, nb) = (ux.len(), uy.len());
    let (m, k) = (a.len() as f64, b.len() as f64);

    // Both ECDFs are constant between union-grid corners, so closed corners
    // exhaust the candidates.
    let xa_groups = by_rank(&xr_all[..a.len()], na);
    let xb_groups: Vec<Vec<usize>> = {
        let mut groups = vec![Vec::new(); na];
        for (idx, &r) in xr_all[a.len()..].iter().enumerate() {
            groups[r].push(idx);
        }
        groups
    };
    let mut hist_a = vec![0u32; nb];
    let mut hist_b = vec![0u32; nb];
    let mut best = 0.0f64;
    for i in 0..na {
        for &idx in &xa_groups[i] {
            hist_a[yr_all[idx]] += 1;
        }
        for &idx in &xb_groups[i] {
            hist_b[yr_all[a.len() + idx]] += 1;
        }
        let (mut run_a, mut run_b) = (0u32, 0u32);
        for j in 0..nb {
            run_a += hist_a[j];
            run_b += hist_b[j];
            best = best.max((run_a as f64 / m - run_b as f64 / k).abs());
        }
    }
    Ok(best)
}
