//! Python bindings for the majority-dynamics toolkit.
//!
//! Build as a regular cdylib (`cargo build -p majdyn-py --release`) and
//! rename/copy `libmajdyn_py.so` to `majdyn_py.so` somewhere on
//! `sys.path`; `python/smoke_test.py` at the repository root does this
//! automatically.

use std::str::FromStr;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use majdyn::config::{Experiment, ExperimentConfig};
use majdyn::dynamics::{self, Outcome};
use majdyn::models::{BipartiteDegreeSequence, DegreeSequence, DEFAULT_REJECTION_BUDGET};
use majdyn::rng::SplitMix64;
use majdyn::{analytic, binom, cells, enumeration, graph, harness, models};

fn err(e: majdyn::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn params(n: u64, delta: u64, p: f64) -> PyResult<majdyn::ModelParams> {
    majdyn::ModelParams::new(n, delta, p).map_err(err)
}

/// The experiment parameters: a graph on `2n + delta` vertices with edge
/// probability `p`, started from `n + delta` red and `n` blue vertices.
#[pyclass(frozen, get_all)]
struct ModelParams {
    n: u64,
    delta: u64,
    p: f64,
    total_vertices: u64,
}

#[pymethods]
impl ModelParams {
    #[new]
    fn new(n: u64, delta: u64, p: f64) -> PyResult<Self> {
        let inner = params(n, delta, p)?;
        Ok(ModelParams {
            n: inner.n,
            delta: inner.delta,
            p: inner.p,
            total_vertices: inner.total_vertices(),
        })
    }

    fn __repr__(&self) -> String {
        format!(
            "ModelParams(n={}, delta={}, p={})",
            self.n, self.delta, self.p
        )
    }
}

/// One simulated run: per-step red/blue counts, the signed lead history,
/// and how the run ended.
#[pyclass(frozen, get_all)]
struct Trajectory {
    red_counts: Vec<i64>,
    blue_counts: Vec<i64>,
    leads: Vec<i64>,
    outcome: String,
    /// First step at which one colour held every vertex, if any.
    decided_step: Option<usize>,
}

#[pymethods]
impl Trajectory {
    fn __len__(&self) -> usize {
        self.leads.len()
    }

    fn __repr__(&self) -> String {
        format!(
            "Trajectory(steps={}, outcome='{}')",
            self.leads.len(),
            self.outcome
        )
    }
}

fn outcome_label(outcome: &Outcome) -> String {
    match *outcome {
        Outcome::RedWins { step } => format!("red wins by step {step}"),
        Outcome::BlueWins { step } => format!("blue wins by step {step}"),
        Outcome::Cycle {
            period,
            detected_at,
        } => format!("cycle of period {period} detected at step {detected_at}"),
        Outcome::MaxStepsReached => "step budget exhausted".to_string(),
    }
}

/// Probability that red ends up holding every vertex:
/// `Phi(p delta sqrt(2) / sqrt(pi p (1-p)))`.
#[pyfunction]
fn win_probability(n: u64, delta: u64, p: f64) -> PyResult<f64> {
    analytic::win_probability(&params(n, delta, p)?).map_err(err)
}

/// Centering of the day-one intersection counts: returns
/// `(x_center, y_center, scale)` with `x' = (x - x_center) / scale`.
#[pyfunction]
fn day_one_centering(n: u64, delta: u64, p: f64) -> PyResult<(f64, f64, f64)> {
    let c = analytic::day_one_centering(&params(n, delta, p)?).map_err(err)?;
    Ok((c.x_center, c.y_center, c.scale))
}

/// Limiting correlation of the primed day-one coordinates, `1 / (1 + pi)`.
#[pyfunction]
fn day_one_correlation() -> f64 {
    analytic::day_one_correlation()
}

/// Per-lattice-point mass of the day-one joint law at primed coordinates
/// `(x', y')`.
#[pyfunction]
fn day_one_density_prime(n: u64, delta: u64, p: f64, x_prime: f64, y_prime: f64) -> PyResult<f64> {
    analytic::day_one_density_prime(&params(n, delta, p)?, x_prime, y_prime).map_err(err)
}

/// First-order day-two expectations given the day-one lead: returns
/// `(eta, stay_red, blue_to_red, total_red)`.
#[pyfunction]
fn day_two_expectations(n: u64, delta: u64, p: f64, lead1: i64) -> PyResult<(f64, f64, f64, f64)> {
    let d = analytic::day_two_expectations(&params(n, delta, p)?, lead1).map_err(err)?;
    Ok((d.eta, d.from_red, d.from_blue, d.total))
}

/// Approximate moments of a Bin(n, p) coordinate conditioned on beating an
/// independent copy: returns `(mean_plus, mean_minus, variance)`.
#[pyfunction]
fn split_moments(n: u64, p: f64) -> PyResult<(f64, f64, f64)> {
    let m = analytic::chop_moments_approx(n, p).map_err(err)?;
    Ok((m.mean_plus, m.mean_minus, m.variance))
}

/// Exact `P[X >= Y + tau]` for independent `X ~ Bin(n, q)`,
/// `Y ~ Bin(n, q_prime)`, from the full convolution.
#[pyfunction]
fn split_probability_exact(n: u64, tau: i64, q: f64, q_prime: f64) -> PyResult<f64> {
    binom::exact_ge_probability(n, tau, q, q_prime).map_err(err)
}

/// First-order approximation of the same probability at
/// `q = p + alpha/n`, `q_prime = p + beta/n`.
#[pyfunction]
fn split_probability_approx(n: u64, tau: i64, p: f64, alpha: f64, beta: f64) -> PyResult<f64> {
    analytic::chop_probability_approx(n, tau, p, alpha, beta).map_err(err)
}

/// Run one trajectory from the standard initial coloring on a freshly
/// sampled graph.
#[pyfunction]
#[pyo3(signature = (n, delta, p, seed, max_steps = dynamics::DEFAULT_MAX_STEPS))]
fn simulate(n: u64, delta: u64, p: f64, seed: u64, max_steps: usize) -> PyResult<Trajectory> {
    let params = params(n, delta, p)?;
    let g = graph::sample_opinion_graph(&params, seed).map_err(err)?;
    let coloring = dynamics::initial_coloring(&params);
    let traj = dynamics::run(&g, coloring, max_steps).map_err(err)?;
    let total = params.total_vertices() as i64;
    let decided_step = match traj.outcome {
        Outcome::RedWins { step } | Outcome::BlueWins { step } => Some(step),
        _ => None,
    };
    Ok(Trajectory {
        red_counts: traj.lead_history.iter().map(|l| (total + l) / 2).collect(),
        blue_counts: traj.lead_history.iter().map(|l| (total - l) / 2).collect(),
        leads: traj.lead_history.clone(),
        outcome: outcome_label(&traj.outcome),
        decided_step,
    })
}

/// Sizes of the `2^depth` colour-history cells after `depth` steps of one
/// simulated run.
#[pyfunction]
fn cell_occupancy(n: u64, delta: u64, p: f64, seed: u64, depth: usize) -> PyResult<Vec<usize>> {
    let params = params(n, delta, p)?;
    let g = graph::sample_opinion_graph(&params, seed).map_err(err)?;
    let coloring = dynamics::initial_coloring(&params);
    let traj = dynamics::run(&g, coloring, depth.max(1)).map_err(err)?;
    let stats = cells::cell_stats(&g, &traj, depth, &params).map_err(err)?;
    Ok(stats.occupancy)
}

/// Run a named validation campaign and return its report as a JSON string
/// (schema: config, rows, runtime_ms, seed_ledger).
#[pyfunction]
fn run_experiment(
    experiment: &str,
    n: u64,
    delta: u64,
    p: f64,
    trials: u64,
    seed: u64,
) -> PyResult<String> {
    let experiment = Experiment::from_str(experiment).map_err(err)?;
    let mut config = ExperimentConfig::new(experiment, params(n, delta, p)?);
    config.trials = trials;
    config.master_seed = seed;
    let report = harness::run(&config).map_err(err)?;
    report.to_json().map_err(err)
}

/// Draw one degree sequence from a named model: `true` (from a sampled
/// graph), `binomial` (independent coordinates), `conditioned` (even-sum
/// rejection), or `integrated` (jittered probability, then conditioned).
#[pyfunction]
fn sample_degrees(model: &str, n: u64, p: f64, seed: u64) -> PyResult<Vec<u32>> {
    let n = usize::try_from(n).map_err(|_| PyValueError::new_err("n too large"))?;
    let mut rng = SplitMix64::new(seed);
    let seq = match model {
        "true" => models::sample_true(n, p, &mut rng).map_err(err)?,
        "binomial" => models::sample_b(n, p, &mut rng).map_err(err)?,
        "conditioned" => {
            models::sample_e(n, p, &mut rng, DEFAULT_REJECTION_BUDGET)
                .map_err(err)?
                .0
        }
        "integrated" => {
            models::sample_i(n, p, &mut rng, DEFAULT_REJECTION_BUDGET)
                .map_err(err)?
                .0
        }
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown model '{other}' (expected true, binomial, conditioned, or integrated)"
            )))
        }
    };
    Ok(seq.degrees)
}

/// Exact number of labelled graphs with the given degree sequence, as a
/// decimal string (the count overflows native integers quickly).
#[pyfunction]
fn exact_graph_count(degrees: Vec<u32>) -> PyResult<String> {
    let count = enumeration::exact_count_graphs(&DegreeSequence::new(degrees)).map_err(err)?;
    Ok(count.to_string())
}

/// Exact number of labelled bipartite graphs with the given part degree
/// sequences, as a decimal string.
#[pyfunction]
fn exact_bigraph_count(left: Vec<u32>, right: Vec<u32>) -> PyResult<String> {
    let seq = BipartiteDegreeSequence { s: left, t: right };
    let count = enumeration::exact_count_bigraphs(&seq).map_err(err)?;
    Ok(count.to_string())
}

/// Asymptotic log-count of labelled graphs with the given degree sequence:
/// returns `(log_count, in_band)` where `in_band` reports the dense
/// near-regular validity check.
#[pyfunction]
#[pyo3(signature = (degrees, epsilon = enumeration::DEFAULT_BAND_EPSILON))]
fn log_graph_count_estimate(degrees: Vec<u32>, epsilon: f64) -> PyResult<(f64, bool)> {
    let est = enumeration::mw_log_count(&DegreeSequence::new(degrees), epsilon).map_err(err)?;
    Ok((est.log_count, est.in_band))
}

/// Bipartite analogue of `log_graph_count_estimate`.
#[pyfunction]
#[pyo3(signature = (left, right, epsilon = enumeration::DEFAULT_BAND_EPSILON))]
fn log_bigraph_count_estimate(
    left: Vec<u32>,
    right: Vec<u32>,
    epsilon: f64,
) -> PyResult<(f64, bool)> {
    let seq = BipartiteDegreeSequence { s: left, t: right };
    let est = enumeration::cgm_log_count(&seq, epsilon).map_err(err)?;
    Ok((est.log_count, est.in_band))
}

#[pymodule]
fn majdyn_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<ModelParams>()?;
    m.add_class::<Trajectory>()?;
    m.add_function(wrap_pyfunction!(win_probability, m)?)?;
    m.add_function(wrap_pyfunction!(day_one_centering, m)?)?;
    m.add_function(wrap_pyfunction!(day_one_correlation, m)?)?;
    m.add_function(wrap_pyfunction!(day_one_density_prime, m)?)?;
    m.add_function(wrap_pyfunction!(day_two_expectations, m)?)?;
    m.add_function(wrap_pyfunction!(split_moments, m)?)?;
    m.add_function(wrap_pyfunction!(split_probability_exact, m)?)?;
    m.add_function(wrap_pyfunction!(split_probability_approx, m)?)?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(cell_occupancy, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(sample_degrees, m)?)?;
    m.add_function(wrap_pyfunction!(exact_graph_count, m)?)?;
    m.add_function(wrap_pyfunction!(exact_bigraph_count, m)?)?;
    m.add_function(wrap_pyfunction!(log_graph_count_estimate, m)?)?;
    m.add_function(wrap_pyfunction!(log_bigraph_count_estimate, m)?)?;
    Ok(())
}
