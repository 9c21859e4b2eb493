//! Opinion-history cells and their normalized degree statistics.
//!
//! After `k` days every vertex has an opinion history `x` in `{0,1}^k`
//! (0 = red on that day); the cell `V_x` collects the vertices sharing a
//! history, and each vertex carries the `2^k`-vector of its centered,
//! rescaled degrees into every cell. The joint law of those vectors is what
//! the validation harness compares against its Gaussian limit, and the
//! typicality flags mark trials whose day-one coordinates or edge counts
//! drift outside the bands where that limit applies.

use crate::analytic::day_one_centering;
use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::params::ModelParams;

/// Maximum supported history depth.
pub const MAX_CELL_DEPTH: usize = 3;

/// Occupancies and normalized degree vectors for the depth-`k` cells.
///
/// Cells are indexed by reading the history left to right: bit `k-1-i` of
/// the index holds the day-`i` opinion, so for `k = 2` index `0b01` is
/// "red on day 0, blue on day 1".
#[derive(Debug, Clone)]
pub struct CellStats {
    pub k: usize,
    /// Member sets of the `2^k` cells.
    pub cells: Vec<VertexSet>,
    /// `occupancy[x] = |V_x|`.
    pub occupancy: Vec<usize>,
    /// Row-major `n_vertices x 2^k`: entry `(v, x)` is
    /// `(deg_{V_x} v - p |V_x|) / sqrt(p (1-p) n)` with `n` the half-size.
    values: Vec<f64>,
}

impl CellStats {
    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn n_vertices(&self) -> usize {
        self.values.len() / self.cells.len()
    }

    /// The normalized degree vector of vertex `v`.
    pub fn vector(&self, v: usize) -> &[f64] {
        let w = self.cells.len();
        &self.values[v * w..(v + 1) * w]
    }

    /// Normalized degree of `v` into cell `x`.
    pub fn entry(&self, v: usize, x: usize) -> f64 {
        self.values[v * self.cells.len() + x]
    }

    /// The vectors of the members of cell `x`: the empirical distribution
    /// the Gaussian limit is tested against.
    pub fn restricted_to(&self, x: usize) -> Vec<&[f64]> {
        self.cells[x].iter().map(|v| self.vector(v)).collect()
    }
}

/// History label of cell index `x` at depth `k`, day 0 first: `0b01` at
/// depth 2 prints `"01"`.
pub fn cell_label(x: usize, k: usize) -> String {
    (0..k)
        .map(|i| if x >> (k - 1 - i) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// Computes the depth-`k` cells of a trajectory and every vertex's
/// normalized degree vector.
pub fn cell_stats(
    graph: &Graph,
    trajectory: &Trajectory,
    k: usize,
    params: &ModelParams,
) -> Result<CellStats> {
    if k == 0 || k > MAX_CELL_DEPTH {
        return Err(Error::invalid(format!(
            "cell depth must be between 1 and {MAX_CELL_DEPTH}, got {k}"
        )));
    }
    if trajectory.colorings.len() < k {
        return Err(Error::invalid(format!(
            "depth {k} needs {k} recorded states but the trajectory has {}",
            trajectory.colorings.len()
        )));
    }
    let n_vertices = graph.n_vertices();
    if n_vertices != params.total_vertices() as usize {
        return Err(Error::invalid(format!(
            "graph has {n_vertices} vertices but the parameters describe {}",
            params.total_vertices()
        )));
    }
    params.require_nondegenerate("cell_stats")?;

    // Intersect day-i red sets / complements according to each history.
    let width = 1usize << k;
    let mut cells = Vec::with_capacity(width);
    for x in 0..width {
        let mut cell = VertexSet::full(n_vertices);
        for i in 0..k {
            let reds = &trajectory.colorings[i];
            let day = if x >> (k - 1 - i) & 1 == 0 {
                reds.clone()
            } else {
                reds.complement()
            };
            cell = cell.intersection(&day);
        }
        cells.push(cell);
    }
    let occupancy: Vec<usize> = cells.iter().map(|c| c.len()).collect();

    let denom = (params.pq() * params.nf()).sqrt();
    let mut values = Vec::with_capacity(n_vertices * width);
    for v in 0..n_vertices {
        for (cell, &occ) in cells.iter().zip(&occupancy) {
            let deg = graph.degree_within(v, cell) as f64;
            values.push((deg - params.p * occ as f64) / denom);
        }
    }
    Ok(CellStats {
        k,
        cells,
        occupancy,
        values,
    })
}

/// Flags describing whether one trial stayed inside the regime the
/// day-one/day-two limits are proved for.
#[derive(Debug, Clone, Copy)]
pub struct TypicalityReport {
    /// Centered day-one coordinates, in units of `sqrt(n / 4 pi)`; `None`
    /// when `p` is 0 or 1 and the rescaling is undefined.
    pub x_prime: Option<f64>,
    pub y_prime: Option<f64>,
    /// Allowed band for both primed coordinates: `e3_c * sqrt(log n)`.
    pub e3_bound: f64,
    pub e3_x_ok: bool,
    pub e3_y_ok: bool,
    /// Edge counts between and inside the initial parts.
    pub cross_edges: u64,
    pub red_edges: u64,
    pub blue_edges: u64,
    /// Allowed deviation of each edge count: `e4_c * n^{13/10}`.
    pub e4_band: f64,
    pub e4_cross_ok: bool,
    pub e4_red_ok: bool,
    pub e4_blue_ok: bool,
}

impl TypicalityReport {
    pub fn all_pass(&self) -> bool {
        self.e3_x_ok
            && self.e3_y_ok
            && self.e4_cross_ok
            && self.e4_red_ok
            && self.e4_blue_ok
    }
}

/// Checks the day-one coordinates against `e3_c * sqrt(log n)` and the three
/// initial edge counts against `e4_c * n^{13/10}` bands around their means.
/// Degenerate `p` (0 or 1) skips the coordinate check, which is then
/// vacuously satisfied.
pub fn typicality_check(
    graph: &Graph,
    trajectory: &Trajectory,
    params: &ModelParams,
    e3_c: f64,
    e4_c: f64,
) -> Result<TypicalityReport> {
    if trajectory.colorings.len() < 2 {
        return Err(Error::invalid(
            "typicality check needs the day-one state".to_string(),
        ));
    }
    let n_vertices = graph.n_vertices();
    if n_vertices != params.total_vertices() as usize {
        return Err(Error::invalid(format!(
            "graph has {n_vertices} vertices but the parameters describe {}",
            params.total_vertices()
        )));
    }
    let nf = params.nf();
    let red0 = &trajectory.colorings[0];
    let blue0 = red0.complement();
    let red1 = &trajectory.colorings[1];

    let e3_bound = e3_c * nf.ln().sqrt();
    let (x_prime, y_prime, e3_x_ok, e3_y_ok) = if params.p > 0.0 && params.p < 1.0 {
        let centering = day_one_centering(params)?;
        let x = red0.intersection_len(red1) as f64;
        let y = blue0.intersection_len(&red1.complement()) as f64;
        let xp = centering.x_prime(x);
        let yp = centering.y_prime(y);
        (Some(xp), Some(yp), xp.abs() <= e3_bound, yp.abs() <= e3_bound)
    } else {
        (None, None, true, true)
    };

    let mut cross = 0u64;
    let mut red_doubled = 0u64;
    for v in red0.iter() {
        cross += graph.degree_within(v, &blue0) as u64;
        red_doubled += graph.degree_within(v, red0) as u64;
    }
    let mut blue_doubled = 0u64;
    for v in blue0.iter() {
        blue_doubled += graph.degree_within(v, &blue0) as u64;
    }
    let (red_edges, blue_edges) = (red_doubled / 2, blue_doubled / 2);

    let red_size = params.red_size() as f64;
    let blue_size = nf;
    let p = params.p;
    let cross_center = p * red_size * blue_size;
    let red_center = p * red_size * (red_size - 1.0) / 2.0;
    let blue_center = p * blue_size * (blue_size - 1.0) / 2.0;
    let e4_band = e4_c * nf.powf(1.3);

    Ok(TypicalityReport {
        x_prime,
        y_prime,
        e3_bound,
        e3_x_ok,
        e3_y_ok,
        cross_edges: cross,
        red_edges,
        blue_edges,
        e4_band,
        e4_cross_ok: (cross as f64 - cross_center).abs() <= e4_band,
        e4_red_ok: (red_edges as f64 - red_center).abs() <= e4_band,
        e4_blue_ok: (blue_edges as f64 - blue_center).abs() <= e4_band,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{initial_coloring, run};
    use crate::graph::{sample_opinion_graph, Graph};
    use crate::rng::derive_trial_seed;

    fn trial(params: &ModelParams, seed: u64) -> (Graph, Trajectory) {
        let graph = sample_opinion_graph(params, seed).unwrap();
        let traj = run(&graph, initial_coloring(params), 16).unwrap();
        (graph, traj)
    }

    #[test]
    fn labels_read_day_zero_first() {
        assert_eq!(cell_label(0b01, 2), "01");
        assert_eq!(cell_label(0b10, 2), "10");
        assert_eq!(cell_label(0b110, 3), "110");
        assert_eq!(cell_label(0, 1), "0");
    }

    #[test]
    fn depth_one_occupancy_is_the_initial_split() {
        let params = ModelParams::new(60, 5, 0.5).unwrap();
        let (graph, traj) = trial(&params, 1);
        let stats = cell_stats(&graph, &traj, 1, &params).unwrap();
        assert_eq!(stats.occupancy, vec![65, 60]);
        assert_eq!(stats.cells[0], traj.colorings[0]);
    }

    #[test]
    fn cells_partition_the_vertices() {
        let params = ModelParams::new(50, 2, 0.5).unwrap();
        let (graph, traj) = trial(&params, 7);
        for k in 1..=MAX_CELL_DEPTH.min(traj.colorings.len()) {
            let stats = cell_stats(&graph, &traj, k, &params).unwrap();
            let total: usize = stats.occupancy.iter().sum();
            assert_eq!(total, 102, "k = {k}");
            for a in 0..stats.cell_count() {
                for b in 0..a {
                    assert_eq!(stats.cells[a].intersection_len(&stats.cells[b]), 0);
                }
            }
        }
    }

    #[test]
    fn children_refine_parents() {
        // |V_00| + |V_01| = |R_0|, and the two normalized child degrees of
        // each vertex sum to its parent value exactly.
        let params = ModelParams::new(40, 1, 0.5).unwrap();
        let (graph, traj) = trial(&params, 3);
        let one = cell_stats(&graph, &traj, 1, &params).unwrap();
        let two = cell_stats(&graph, &traj, 2, &params).unwrap();
        assert_eq!(two.occupancy[0b00] + two.occupancy[0b01], one.occupancy[0]);
        assert_eq!(two.occupancy[0b10] + two.occupancy[0b11], one.occupancy[1]);
        for v in 0..graph.n_vertices() {
            let alpha0 = one.entry(v, 0);
            let alpha1 = one.entry(v, 1);
            let rho = two.vector(v);
            assert!((rho[0b00] + rho[0b01] - alpha0).abs() < 1e-12);
            assert!((rho[0b10] + rho[0b11] - alpha1).abs() < 1e-12);
        }
    }

    #[test]
    fn entries_match_definition() {
        let params = ModelParams::new(10, 0, 0.5).unwrap();
        let (graph, traj) = trial(&params, 11);
        let stats = cell_stats(&graph, &traj, 2, &params).unwrap();
        let denom = (0.25f64 * 10.0).sqrt();
        for v in 0..20 {
            for x in 0..4 {
                let deg = stats.cells[x].iter().filter(|&u| graph.has_edge(v, u)).count();
                let want = (deg as f64 - 0.5 * stats.occupancy[x] as f64) / denom;
                assert!((stats.entry(v, x) - want).abs() < 1e-12);
            }
        }
        let restricted = stats.restricted_to(1);
        assert_eq!(restricted.len(), stats.occupancy[1]);
    }

    #[test]
    fn invalid_depths_rejected() {
        let params = ModelParams::new(20, 0, 0.5).unwrap();
        let (graph, traj) = trial(&params, 2);
        assert!(cell_stats(&graph, &traj, 0, &params).is_err());
        assert!(cell_stats(&graph, &traj, 4, &params).is_err());
        let len = traj.colorings.len();
        assert!(cell_stats(&graph, &traj, len.min(3), &params).is_ok());
        // A trajectory with fewer recorded states than the depth is refused.
        let short = Trajectory {
            colorings: traj.colorings[..1].to_vec(),
            lead_history: traj.lead_history[..1].to_vec(),
            outcome: traj.outcome,
        };
        assert!(cell_stats(&graph, &short, 2, &params).is_err());
    }

    #[test]
    fn complete_graph_passes_edge_bands_exactly() {
        let params = ModelParams::new(30, 2, 1.0).unwrap();
        let graph = Graph::complete(62);
        let traj = run(&graph, initial_coloring(&params), 16).unwrap();
        let report = typicality_check(&graph, &traj, &params, 2.5, 1.0).unwrap();
        assert_eq!(report.cross_edges, 32 * 30);
        assert_eq!(report.red_edges, 32 * 31 / 2);
        assert_eq!(report.blue_edges, 30 * 29 / 2);
        assert!(report.e4_cross_ok && report.e4_red_ok && report.e4_blue_ok);
        assert!(report.x_prime.is_none());
        assert!(report.all_pass());
    }

    #[test]
    fn disconnected_parts_fail_the_cross_band()  {
        // Two cliques and no cross edges: the cross count 0 sits far below
        // its mean p * n * (n + delta).
        let params = ModelParams::new(100, 0, 0.5).unwrap();
        let mut edges = Vec::new();
        for i in 0..100usize {
            for j in 0..i {
                edges.push((i, j));
                edges.push((100 + i, 100 + j));
            }
        }
        let graph = Graph::from_edges(200, &edges).unwrap();
        let traj = run(&graph, initial_coloring(&params), 16).unwrap();
        let report = typicality_check(&graph, &traj, &params, 2.5, 1.0).unwrap();
        assert_eq!(report.cross_edges, 0);
        assert!(!report.e4_cross_ok);
        assert!(!report.all_pass());
    }

    #[test]
    fn random_trials_mostly_typical() {
        let params = ModelParams::new(300, 1, 0.5).unwrap();
        let mut passes = 0;
        for t in 0..50 {
            let (graph, traj) = trial(&params, derive_trial_seed(0xce11, t));
            let report = typicality_check(&graph, &traj, &params, 2.5, 1.0).unwrap();
            if report.all_pass() {
                passes += 1;
            }
            assert!(report.e4_cross_ok && report.e4_red_ok && report.e4_blue_ok);
        }
        assert!(passes >= 45, "only {passes}/50 trials typical");
    }

    #[test]
    fn typicality_needs_day_one() {
        let params = ModelParams::new(20, 0, 0.5).unwrap();
        let (graph, traj) = trial(&params, 5);
        let short = Trajectory {
            colorings: traj.colorings[..1].to_vec(),
            lead_history: traj.lead_history[..1].to_vec(),
            outcome: traj.outcome,
        };
        assert!(typicality_check(&graph, &short, &params, 2.5, 1.0).is_err());
    }
}
