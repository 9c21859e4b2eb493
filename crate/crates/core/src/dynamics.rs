//! Synchronous majority updates: every vertex simultaneously adopts the
//! strict majority opinion of its neighbourhood, keeping its own on a tie.
//!
//! A run records the full state sequence, the signed red lead per step, and
//! how it ended: one colour absorbing everything, a fixed point, a two-state
//! oscillation, or the step budget. For this update rule a repeat always has
//! period 1 or 2, so comparing against the two previous states suffices.

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexSet};
use crate::params::ModelParams;

/// A two-colouring of the vertices; members of the set hold the red opinion.
pub type Coloring = VertexSet;

/// Fallback step budget; consensus on dense random graphs arrives within a
/// handful of steps, so 16 is a generous safety net.
pub const DEFAULT_MAX_STEPS: usize = 16;

/// How a run ended. Steps are counted from the initial state (step 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// All vertices red from `step` onwards.
    RedWins { step: usize },
    /// All vertices blue from `step` onwards.
    BlueWins { step: usize },
    /// A non-monochromatic repeat: fixed point (`period` 1) or oscillation
    /// (`period` 2), first confirmed at `detected_at`.
    Cycle { period: usize, detected_at: usize },
    /// No consensus or repeat within the configured budget.
    MaxStepsReached,
}

impl Outcome {
    pub fn red_wins(&self) -> bool {
        matches!(self, Outcome::RedWins { .. })
    }

    /// Whether one colour had absorbed everything by step `k`.
    pub fn decided_by(&self, k: usize) -> bool {
        match *self {
            Outcome::RedWins { step } | Outcome::BlueWins { step } => step <= k,
            _ => false,
        }
    }
}

/// The state sequence of one run. `colorings[t]` is the state after `t`
/// steps; `lead_history[t]` is the signed red lead `|R_t| - |B_t|`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub colorings: Vec<Coloring>,
    pub lead_history: Vec<i64>,
    pub outcome: Outcome,
}

impl Trajectory {
    /// State after `t` steps, extending past the recorded horizon: after a
    /// win or a fixed point the last state persists; after a period-2 repeat
    /// the two final states keep alternating. If the run hit the step budget
    /// undecided this clamps to the final recorded state.
    pub fn coloring_at(&self, t: usize) -> &Coloring {
        let last = self.colorings.len() - 1;
        if t <= last {
            return &self.colorings[t];
        }
        if let Outcome::Cycle { period: 2, .. } = self.outcome {
            return &self.colorings[last - (t - last) % 2];
        }
        &self.colorings[last]
    }

    /// Signed red lead after `t` steps, extended like [`coloring_at`].
    ///
    /// [`coloring_at`]: Trajectory::coloring_at
    pub fn lead_at(&self, t: usize) -> i64 {
        let c = self.coloring_at(t);
        2 * c.len() as i64 - c.universe() as i64
    }
}

/// The starting partition: the first `n + delta` vertices red, the
/// remaining `n` blue.
pub fn initial_coloring(params: &ModelParams) -> Coloring {
    VertexSet::prefix(
        params.total_vertices() as usize,
        params.red_size() as usize,
    )
}

/// One synchronous update: a vertex flips iff strictly more neighbours hold
/// the opposite opinion; ties keep the current opinion.
pub fn step(graph: &Graph, coloring: &Coloring) -> Result<Coloring> {
    if coloring.universe() != graph.n_vertices() {
        return Err(Error::invalid(format!(
            "coloring covers {} vertices but the graph has {}",
            coloring.universe(),
            graph.n_vertices()
        )));
    }
    Ok(step_unchecked(graph, coloring))
}

fn step_unchecked(graph: &Graph, coloring: &Coloring) -> Coloring {
    let n = graph.n_vertices();
    let mut next = VertexSet::empty(n);
    for v in 0..n {
        let mut red = 0u32;
        let mut deg = 0u32;
        for (row, mask) in graph.row_words(v).iter().zip(coloring.as_words()) {
            red += (row & mask).count_ones();
            deg += row.count_ones();
        }
        let blue = deg - red;
        let stays_red = match red.cmp(&blue) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => coloring.contains(v),
        };
        if stays_red {
            next.insert(v);
        }
    }
    next
}

/// Runs the dynamics from `initial` until consensus, a repeated state, or
/// `max_steps` updates.
pub fn run(graph: &Graph, initial: Coloring, max_steps: usize) -> Result<Trajectory> {
    if max_steps == 0 {
        return Err(Error::invalid("max_steps must be at least 1".to_string()));
    }
    if initial.universe() != graph.n_vertices() {
        return Err(Error::invalid(format!(
            "coloring covers {} vertices but the graph has {}",
            initial.universe(),
            graph.n_vertices()
        )));
    }
    let n = graph.n_vertices();
    let mut colorings = vec![initial];
    let mut outcome = monochromatic_outcome(n, colorings[0].len(), 0);
    if outcome.is_none() {
        for t in 1..=max_steps {
            let next = step_unchecked(graph, &colorings[t - 1]);
            let reds = next.len();
            colorings.push(next);
            outcome = monochromatic_outcome(n, reds, t);
            if outcome.is_none() {
                if colorings[t] == colorings[t - 1] {
                    outcome = Some(Outcome::Cycle {
                        period: 1,
                        detected_at: t,
                    });
                } else if t >= 2 && colorings[t] == colorings[t - 2] {
                    outcome = Some(Outcome::Cycle {
                        period: 2,
                        detected_at: t,
                    });
                }
            }
            if outcome.is_some() {
                break;
            }
        }
    }
    let lead_history = colorings
        .iter()
        .map(|c| 2 * c.len() as i64 - n as i64)
        .collect();
    Ok(Trajectory {
        colorings,
        lead_history,
        outcome: outcome.unwrap_or(Outcome::MaxStepsReached),
    })
}

fn monochromatic_outcome(n: usize, reds: usize, t: usize) -> Option<Outcome> {
    if reds == n && n > 0 {
        Some(Outcome::RedWins { step: t })
    } else if reds == 0 && n > 0 {
        Some(Outcome::BlueWins { step: t })
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{sample_gnp, Graph};
    use crate::rng::SplitMix64;
    use proptest::prelude::*;

    fn set(universe: usize, members: &[usize]) -> VertexSet {
        VertexSet::from_indices(universe, members).unwrap()
    }

    #[test]
    fn triangle_lone_red_turns_blue() {
        // The red vertex sees two blues and flips; the blues each see one of
        // each and keep their colour.
        let g = Graph::from_edges(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let next = step(&g, &set(3, &[0])).unwrap();
        assert_eq!(next, set(3, &[]));
        let traj = run(&g, set(3, &[0]), 16).unwrap();
        assert_eq!(traj.outcome, Outcome::BlueWins { step: 1 });
    }

    #[test]
    fn single_edge_swaps_forever() {
        let g = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let traj = run(&g, set(2, &[0]), 16).unwrap();
        assert_eq!(
            traj.outcome,
            Outcome::Cycle {
                period: 2,
                detected_at: 2
            }
        );
        assert_eq!(traj.colorings[1], set(2, &[1]));
        assert_eq!(traj.colorings[2], set(2, &[0]));
    }

    #[test]
    fn isolated_vertices_never_change() {
        let g = Graph::empty(5);
        let c = set(5, &[1, 3]);
        assert_eq!(step(&g, &c).unwrap(), c);
        let traj = run(&g, c.clone(), 16).unwrap();
        assert_eq!(
            traj.outcome,
            Outcome::Cycle {
                period: 1,
                detected_at: 1
            }
        );
        assert_eq!(traj.colorings.len(), 2);
    }

    #[test]
    fn path_alternates_between_middle_and_ends() {
        // Path 0-1-2 with the ends red: the middle flips red while the ends
        // flip blue, and the two states alternate forever.
        let g = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let traj = run(&g, set(3, &[0, 2]), 16).unwrap();
        assert_eq!(
            traj.outcome,
            Outcome::Cycle {
                period: 2,
                detected_at: 2
            }
        );
        assert_eq!(traj.colorings[1], set(3, &[1]));
        // The extension alternates with matching parity.
        assert_eq!(*traj.coloring_at(7), set(3, &[1]));
        assert_eq!(*traj.coloring_at(8), set(3, &[0, 2]));
        assert_eq!(traj.lead_at(7), -1);
        assert_eq!(traj.lead_at(8), 1);
    }

    #[test]
    fn majority_on_k5_wins_in_one_step() {
        let g = Graph::complete(5);
        let traj = run(&g, set(5, &[0, 1, 2]), 16).unwrap();
        assert_eq!(traj.outcome, Outcome::RedWins { step: 1 });
        assert!(traj.outcome.red_wins());
        assert!(traj.outcome.decided_by(1));
        assert!(!traj.outcome.decided_by(0));
        assert_eq!(traj.lead_history, vec![1, 5]);
        // The winning state persists past the horizon.
        assert_eq!(traj.coloring_at(12), &VertexSet::full(5));
    }

    #[test]
    fn tie_everywhere_is_a_fixed_point() {
        // Four-cycle coloured RRBB: every vertex has one neighbour of each
        // colour, so the update keeps the whole state.
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let c = set(4, &[0, 1]);
        assert_eq!(step(&g, &c).unwrap(), c);
    }

    #[test]
    fn monochromatic_start_ends_immediately() {
        let g = Graph::complete(4);
        let traj = run(&g, VertexSet::full(4), 16).unwrap();
        assert_eq!(traj.outcome, Outcome::RedWins { step: 0 });
        assert_eq!(traj.colorings.len(), 1);
        let traj = run(&g, VertexSet::empty(4), 16).unwrap();
        assert_eq!(traj.outcome, Outcome::BlueWins { step: 0 });
    }

    #[test]
    fn initial_coloring_puts_lead_up_front() {
        let params = ModelParams::new(2, 1, 0.5).unwrap();
        let c = initial_coloring(&params);
        assert_eq!(c.universe(), 5);
        assert_eq!(c.iter().collect::<Vec<_>>(), vec![0, 1, 2]);

        let params = ModelParams::new(1000, 3, 0.5).unwrap();
        let c = initial_coloring(&params);
        assert_eq!(2 * c.len() as i64 - c.universe() as i64, 3);
    }

    #[test]
    fn size_mismatch_rejected() {
        let g = Graph::complete(4);
        assert!(step(&g, &set(5, &[0])).is_err());
        assert!(run(&g, set(5, &[0]), 16).is_err());
        assert!(run(&g, set(4, &[0]), 0).is_err());
    }

    #[test]
    fn run_is_deterministic() {
        let g = sample_gnp(120, 0.5, &mut SplitMix64::new(44)).unwrap();
        let c = VertexSet::prefix(120, 60);
        let a = run(&g, c.clone(), 16).unwrap();
        let b = run(&g, c, 16).unwrap();
        assert_eq!(a.outcome, b.outcome);
        assert_eq!(a.colorings, b.colorings);
        assert_eq!(a.lead_history, b.lead_history);
    }

    #[test]
    fn lead_history_matches_colorings() {
        let g = sample_gnp(90, 0.4, &mut SplitMix64::new(9)).unwrap();
        let traj = run(&g, VertexSet::prefix(90, 45), 16).unwrap();
        assert_eq!(traj.lead_history.len(), traj.colorings.len());
        for (lead, c) in traj.lead_history.iter().zip(&traj.colorings) {
            assert_eq!(*lead, 2 * c.len() as i64 - 90);
        }
    }

    #[test]
    fn win_indicates_full_occupation_and_fixation() {
        let g = sample_gnp(200, 0.5, &mut SplitMix64::new(3)).unwrap();
        let traj = run(&g, VertexSet::prefix(200, 104), 16).unwrap();
        if let Outcome::RedWins { step } = traj.outcome {
            assert_eq!(traj.colorings[step].len(), 200);
            let after = step_unchecked(&g, &traj.colorings[step]);
            assert_eq!(after, traj.colorings[step]);
        } else {
            panic!("expected a red win, got {:?}", traj.outcome);
        }
    }

    /// Straightforward O(N^2) restatement of the update rule, used to
    /// cross-check the word-parallel implementation.
    fn naive_step(g: &Graph, coloring: &VertexSet) -> VertexSet {
        let n = g.n_vertices();
        let mut next = VertexSet::empty(n);
        for v in 0..n {
            let mut red = 0usize;
            let mut blue = 0usize;
            for u in 0..n {
                if u != v && g.has_edge(v, u) {
                    if coloring.contains(u) {
                        red += 1;
                    } else {
                        blue += 1;
                    }
                }
            }
            let is_red = coloring.contains(v);
            let stays_red = if is_red { red >= blue } else { red > blue };
            if stays_red {
                next.insert(v);
            }
        }
        next
    }

    proptest! {
        /// The packed step agrees with a vertex-by-vertex neighbour count.
        #[test]
        fn prop_step_matches_naive_rule(
            n in 2usize..40,
            p in 0.0f64..=1.0,
            seed in 0u64..1000,
            reds in 0usize..40,
        ) {
            let mut rng = SplitMix64::new(seed);
            let g = sample_gnp(n, p, &mut rng).unwrap();
            let c = VertexSet::prefix(n, reds.min(n));
            prop_assert_eq!(step(&g, &c).unwrap(), naive_step(&g, &c));
        }

        /// Complementing the opinions commutes with the update rule.
        #[test]
        fn prop_color_symmetry(
            n in 2usize..60,
            p in 0.0f64..=1.0,
            seed in 0u64..500,
            reds in 0usize..60,
        ) {
            let mut rng = SplitMix64::new(seed);
            let g = sample_gnp(n, p, &mut rng).unwrap();
            let c = VertexSet::prefix(n, reds.min(n));
            let flipped = step(&g, &c.complement()).unwrap();
            prop_assert_eq!(flipped, step(&g, &c).unwrap().complement());
        }

        /// Every run settles into a win, a fixed point, or a 2-cycle within
        /// N(N-1) steps.
        #[test]
        fn prop_eventual_period_at_most_two(
            n in 2usize..28,
            p in 0.0f64..=1.0,
            seed in 0u64..500,
            reds in 0usize..28,
        ) {
            let mut rng = SplitMix64::new(seed);
            let g = sample_gnp(n, p, &mut rng).unwrap();
            let c = VertexSet::prefix(n, reds.min(n));
            let traj = run(&g, c, n * (n - 1) + 2).unwrap();
            match traj.outcome {
                Outcome::MaxStepsReached => prop_assert!(false, "no repeat found"),
                Outcome::Cycle { period, .. } => prop_assert!(period == 1 || period == 2),
                _ => {}
            }
        }
    }
}
