//! Command-line front end: single-run inspection (`simulate`), closed-form
//! predictions (`predict`), Monte Carlo validation campaigns (`validate`),
//! degree-model sampling (`models`), and degree-sequence counting
//! (`enumerate`).

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use majdyn::analytic;
use majdyn::config::{Experiment, ExperimentConfig, DEFAULT_MASTER_SEED};
use majdyn::dynamics::{self, Outcome};
use majdyn::enumeration;
use majdyn::error::{Error, Result};
use majdyn::graph;
use majdyn::harness;
use majdyn::models::{self, BipartiteDegreeSequence, DegreeSequence, DEFAULT_REJECTION_BUDGET};
use majdyn::params::ModelParams;
use majdyn::rng::{derive_trial_seed, SplitMix64};

#[derive(Parser)]
#[command(
    name = "majdyn",
    version,
    about = "Majority dynamics on dense random graphs: simulator, predictors, validation campaigns"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Shared `(n, delta, p)` triple accepted by most subcommands.
#[derive(Args, Clone, Copy)]
struct ParamArgs {
    /// Half-size parameter: the graph has 2n + delta vertices.
    #[arg(short, long, default_value_t = 1000)]
    n: u64,
    /// Initial red lead: |R0| = n + delta, |B0| = n.
    #[arg(short, long, default_value_t = 0)]
    delta: u64,
    /// Edge probability.
    #[arg(short, long, default_value_t = 0.5)]
    p: f64,
}

impl ParamArgs {
    fn build(&self) -> Result<ModelParams> {
        ModelParams::new(self.n, self.delta, self.p)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run one trajectory and dump its states, leads, and outcome.
    Simulate {
        #[command(flatten)]
        params: ParamArgs,
        /// Seed for the graph and nothing else (the initial coloring is
        /// deterministic).
        #[arg(short, long, default_value_t = DEFAULT_MASTER_SEED)]
        seed: u64,
        /// Step budget before the run is cut off.
        #[arg(long, default_value_t = dynamics::DEFAULT_MAX_STEPS)]
        max_steps: usize,
        /// Also print cell occupancies at this depth (1..=3).
        #[arg(long)]
        cells: Option<usize>,
        /// Emit the dump as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Print the closed-form predictions for a parameter triple.
    Predict {
        #[command(flatten)]
        params: ParamArgs,
        /// Day-one lead at which to evaluate the day-two expectations.
        #[arg(long, default_value_t = 0)]
        lead1: i64,
        /// Emit the predictions as JSON instead of text.
        #[arg(long)]
        json: bool,
    },
    /// Run a validation campaign and print its pass/fail report.
    Validate {
        /// Campaign name: win_prob, termination, day_one_joint, day_two_law,
        /// cell_kolmogorov, model_transfer, enum_validation, or
        /// oracle_convergence.
        experiment: String,
        /// TOML config file; flags below override its fields.
        #[arg(short, long)]
        config: Option<PathBuf>,
        #[arg(short, long)]
        n: Option<u64>,
        #[arg(short, long)]
        delta: Option<u64>,
        #[arg(short, long)]
        p: Option<f64>,
        /// Number of Monte Carlo trials.
        #[arg(short, long)]
        trials: Option<u64>,
        /// Master seed; per-trial seeds derive from it deterministically.
        #[arg(short, long)]
        seed: Option<u64>,
        /// Worker threads (0 = one per logical CPU). Results are identical
        /// for every setting; this only changes wall-clock time.
        #[arg(long, default_value_t = 0)]
        threads: usize,
        /// Write the JSON report here (day_one_joint also writes a
        /// histogram CSV next to it).
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Also write the report rows as CSV here.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Override a named tolerance, e.g. --tolerance red_win_frequency=0.05
        /// (repeatable).
        #[arg(long, value_name = "NAME=VALUE")]
        tolerance: Vec<String>,
    },
    /// Sample degree-sequence models and print summary statistics.
    Models {
        /// Vertices per part (graph: n vertices; bipartite: n-by-n).
        #[arg(short, long, default_value_t = 200)]
        n: u64,
        /// Edge probability.
        #[arg(short, long, default_value_t = 0.5)]
        p: f64,
        /// Which sampler to run.
        #[arg(short, long, value_enum, default_value_t = ModelChoice::All)]
        model: ModelChoice,
        /// Sample bipartite sequences instead of graph ones.
        #[arg(long)]
        bipartite: bool,
        /// Sequences to draw per model.
        #[arg(long, default_value_t = 200)]
        samples: u64,
        #[arg(short, long, default_value_t = DEFAULT_MASTER_SEED)]
        seed: u64,
    },
    /// Count labelled graphs with a prescribed degree sequence: exact value
    /// (small instances) next to the asymptotic formula.
    Enumerate {
        /// Graph degree sequence, comma-separated (e.g. 2,2,2).
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["left", "right"])]
        degrees: Option<Vec<u32>>,
        /// Left part of a bipartite degree sequence, comma-separated.
        #[arg(long, value_delimiter = ',', requires = "right")]
        left: Option<Vec<u32>>,
        /// Right part of a bipartite degree sequence, comma-separated.
        #[arg(long, value_delimiter = ',', requires = "left")]
        right: Option<Vec<u32>>,
        /// Band parameter epsilon for the near-regularity check.
        #[arg(long, default_value_t = enumeration::DEFAULT_BAND_EPSILON)]
        epsilon: f64,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelChoice {
    /// Degree sequence of a freshly sampled random graph.
    True,
    /// Independent binomial coordinates.
    Binomial,
    /// Binomial coordinates conditioned on the parity/equal-sums event.
    Conditioned,
    /// Jittered edge probability, then the conditioned sampler.
    Integrated,
    /// Every model above, one row each.
    All,
}

impl ModelChoice {
    fn label(self) -> &'static str {
        match self {
            ModelChoice::True => "true",
            ModelChoice::Binomial => "binomial",
            ModelChoice::Conditioned => "conditioned",
            ModelChoice::Integrated => "integrated",
            ModelChoice::All => "all",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Simulate {
            params,
            seed,
            max_steps,
            cells,
            json,
        } => cmd_simulate(params, seed, max_steps, cells, json),
        Command::Predict {
            params,
            lead1,
            json,
        } => cmd_predict(params, lead1, json),
        Command::Validate {
            experiment,
            config,
            n,
            delta,
            p,
            trials,
            seed,
            threads,
            out,
            csv,
            tolerance,
        } => cmd_validate(
            &experiment,
            config,
            n,
            delta,
            p,
            trials,
            seed,
            threads,
            out,
            csv,
            &tolerance,
        ),
        Command::Models {
            n,
            p,
            model,
            bipartite,
            samples,
            seed,
        } => cmd_models(n, p, model, bipartite, samples, seed),
        Command::Enumerate {
            degrees,
            left,
            right,
            epsilon,
        } => cmd_enumerate(degrees, left, right, epsilon),
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

fn cmd_simulate(
    args: ParamArgs,
    seed: u64,
    max_steps: usize,
    cells: Option<usize>,
    json: bool,
) -> Result<()> {
    let params = args.build()?;
    let g = graph::sample_opinion_graph(&params, seed)?;
    let coloring = dynamics::initial_coloring(&params);
    let traj = dynamics::run(&g, coloring, max_steps)?;

    let total = params.total_vertices() as i64;
    let steps: Vec<_> = traj
        .lead_history
        .iter()
        .enumerate()
        .map(|(t, &lead)| (t, (total + lead) / 2, (total - lead) / 2, lead))
        .collect();

    let cell_block = match cells {
        Some(k) => {
            let stats = majdyn::cells::cell_stats(&g, &traj, k, &params)?;
            let occupancy: Vec<_> = (0..stats.cell_count())
                .map(|x| (majdyn::cells::cell_label(x, k), stats.occupancy[x]))
                .collect();
            Some((k, occupancy))
        }
        None => None,
    };

    if json {
        let dump = json!({
            "params": { "n": params.n, "delta": params.delta, "p": params.p },
            "seed": seed,
            "edge_count": g.edge_count(),
            "steps": steps
                .iter()
                .map(|&(t, red, blue, lead)| json!({
                    "step": t, "red": red, "blue": blue, "lead": lead,
                }))
                .collect::<Vec<_>>(),
            "outcome": outcome_label(&traj.outcome),
            "cells": cell_block.as_ref().map(|(k, occ)| json!({
                "depth": k,
                "occupancy": occ
                    .iter()
                    .map(|(label, count)| json!({ "cell": label, "size": count }))
                    .collect::<Vec<_>>(),
            })),
        });
        println!("{}", serde_json::to_string_pretty(&dump)?);
        return Ok(());
    }

    println!(
        "graph: 2n+delta = {} vertices, p = {}, seed = {}, {} edges",
        params.total_vertices(),
        params.p,
        seed,
        g.edge_count()
    );
    println!("{:>5} {:>8} {:>8} {:>8}", "step", "red", "blue", "lead");
    for (t, red, blue, lead) in &steps {
        println!("{t:>5} {red:>8} {blue:>8} {lead:>8}");
    }
    println!("outcome: {}", outcome_label(&traj.outcome));
    if let Some((k, occupancy)) = cell_block {
        println!("cell occupancy at depth {k} (label = opinion at steps 0..{k}):");
        for (label, count) in occupancy {
            println!("  {label}: {count}");
        }
    }
    Ok(())
}

fn cmd_predict(args: ParamArgs, lead1: i64, json: bool) -> Result<()> {
    let params = args.build()?;
    let win = analytic::win_probability(&params)?;
    let centering = analytic::day_one_centering(&params)?;
    let corr = analytic::day_one_correlation();
    let day_two = analytic::day_two_expectations(&params, lead1)?;
    let chop = analytic::chop_moments_approx(params.n, params.p)?;

    if json {
        let dump = json!({
            "params": { "n": params.n, "delta": params.delta, "p": params.p },
            "win_probability": win,
            "day_one": {
                "x_center": centering.x_center,
                "y_center": centering.y_center,
                "scale": centering.scale,
                "correlation": corr,
            },
            "day_two": {
                "lead1": lead1,
                "eta": day_two.eta,
                "stay_red_count": day_two.from_red,
                "blue_to_red_count": day_two.from_blue,
                "total_red_count": day_two.total,
            },
            "conditioned_split_moments": {
                "mean_plus": chop.mean_plus,
                "mean_minus": chop.mean_minus,
                "variance": chop.variance,
            },
        });
        println!("{}", serde_json::to_string_pretty(&dump)?);
        return Ok(());
    }

    println!(
        "params: n = {}, delta = {}, p = {} ({} vertices)",
        params.n,
        params.delta,
        params.p,
        params.total_vertices()
    );
    println!("red win probability:      {win:.12}");
    println!("day-one joint law:");
    println!("  x center (|R0 ∩ R1|):   {:.6}", centering.x_center);
    println!("  y center (|B0 ∩ B1|):   {:.6}", centering.y_center);
    println!("  fluctuation scale:      {:.6}", centering.scale);
    println!("  correlation(x', y'):    {corr:.6}");
    println!("day-two expectations at lead1 = {lead1}:");
    println!("  eta:                    {:.6}", day_two.eta);
    println!("  E|R0 ∩ R2|:             {:.6}", day_two.from_red);
    println!("  E|B0 ∩ R2|:             {:.6}", day_two.from_blue);
    println!("  E|R2|:                  {:.6}", day_two.total);
    println!("conditioned split of Bin(n, p), n = {}:", params.n);
    println!("  mean above median:      {:.6}", chop.mean_plus);
    println!("  mean below median:      {:.6}", chop.mean_minus);
    println!("  conditional variance:   {:.6}", chop.variance);
    Ok(())
}

fn parse_tolerance_overrides(entries: &[String]) -> Result<BTreeMap<String, f64>> {
    let mut map = BTreeMap::new();
    for entry in entries {
        let (name, value) = entry.split_once('=').ok_or_else(|| {
            Error::Config(format!("tolerance override '{entry}' is not NAME=VALUE"))
        })?;
        let value: f64 = value
            .parse()
            .map_err(|_| Error::Config(format!("tolerance value in '{entry}' is not a number")))?;
        map.insert(name.trim().to_string(), value);
    }
    Ok(map)
}

#[allow(clippy::too_many_arguments)]
fn cmd_validate(
    experiment: &str,
    config_path: Option<PathBuf>,
    n: Option<u64>,
    delta: Option<u64>,
    p: Option<f64>,
    trials: Option<u64>,
    seed: Option<u64>,
    threads: usize,
    out: Option<PathBuf>,
    csv: Option<PathBuf>,
    tolerance: &[String],
) -> Result<()> {
    let experiment = Experiment::from_str(experiment)?;
    let mut config = match config_path {
        Some(path) => {
            let mut loaded = ExperimentConfig::load(&path)?;
            loaded.experiment = experiment;
            loaded
        }
        None => ExperimentConfig::new(experiment, ModelParams::new(1000, 0, 0.5)?),
    };

    let base = config.params;
    config.params = ModelParams::new(
        n.unwrap_or(base.n),
        delta.unwrap_or(base.delta),
        p.unwrap_or(base.p),
    )?;
    if let Some(t) = trials {
        config.trials = t;
    }
    if let Some(s) = seed {
        config.master_seed = s;
    }
    if let Some(path) = out {
        config.output_path = Some(path);
    }
    for (name, value) in parse_tolerance_overrides(tolerance)? {
        config.tolerances.insert(name, value);
    }

    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }

    let report = harness::run(&config)?;
    print!("{}", report.render_text());
    if let Some(path) = csv {
        report.write_rows_csv(&path)?;
        println!("rows csv: {}", path.display());
    }
    if let Some(path) = &config.output_path {
        println!("report json: {}", path.display());
    }
    if report.all_pass() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "{} of {} rows failed",
            report.rows.iter().filter(|r| !r.pass).count(),
            report.rows.len()
        )))
    }
}

/// Aggregate statistics over `samples` sequences drawn from one model.
struct ModelSummary {
    mean_sum: f64,
    mean_variance: f64,
    mean_max: f64,
    mean_attempts: f64,
}

fn summarize<F>(samples: u64, mut draw: F) -> Result<ModelSummary>
where
    F: FnMut(u64) -> Result<(f64, f64, f64, u64)>,
{
    let mut sums = 0.0;
    let mut vars = 0.0;
    let mut maxes = 0.0;
    let mut attempts = 0u64;
    for i in 0..samples {
        let (sum, var, max, att) = draw(i)?;
        sums += sum;
        vars += var;
        maxes += max;
        attempts += att;
    }
    let count = samples as f64;
    Ok(ModelSummary {
        mean_sum: sums / count,
        mean_variance: vars / count,
        mean_max: maxes / count,
        mean_attempts: attempts as f64 / count,
    })
}

fn graph_stats(seq: &DegreeSequence) -> (f64, f64, f64) {
    (seq.sum() as f64, seq.variance(), f64::from(seq.max()))
}

fn bip_stats(seq: &BipartiteDegreeSequence) -> (f64, f64, f64) {
    (seq.sum_s() as f64, seq.variance(), f64::from(seq.max()))
}

fn cmd_models(
    n: u64,
    p: f64,
    model: ModelChoice,
    bipartite: bool,
    samples: u64,
    seed: u64,
) -> Result<()> {
    if samples == 0 {
        return Err(Error::invalid("need at least one sample"));
    }
    let n = usize::try_from(n).map_err(|_| Error::invalid("n too large"))?;
    let chosen: Vec<ModelChoice> = match model {
        ModelChoice::All => vec![
            ModelChoice::True,
            ModelChoice::Binomial,
            ModelChoice::Conditioned,
            ModelChoice::Integrated,
        ],
        single => vec![single],
    };

    println!(
        "{} degree sequences: n = {n}, p = {p}, {samples} samples per model, seed = {seed}",
        if bipartite { "bipartite" } else { "graph" }
    );
    println!(
        "{:>12} {:>12} {:>14} {:>10} {:>14}",
        "model", "mean sum", "mean variance", "mean max", "mean attempts"
    );
    for (index, &choice) in chosen.iter().enumerate() {
        // Stream seeds per (model, sample) so adding a model does not
        // disturb the draws of another.
        let stream = derive_trial_seed(seed, 1 + index as u64);
        let summary = summarize(samples, |i| {
            let mut rng = SplitMix64::new(derive_trial_seed(stream, i));
            let budget = DEFAULT_REJECTION_BUDGET;
            if bipartite {
                let (stats, attempts) = match choice {
                    ModelChoice::True => (bip_stats(&models::sample_true_bip(n, n, p, &mut rng)?), 1),
                    ModelChoice::Binomial => (bip_stats(&models::sample_b_bip(n, n, p, &mut rng)?), 1),
                    ModelChoice::Conditioned => {
                        let (seq, s) = models::sample_e_bip(n, n, p, &mut rng, budget)?;
                        (bip_stats(&seq), s.attempts)
                    }
                    ModelChoice::Integrated => {
                        let (seq, s) = models::sample_i_bip(n, n, p, &mut rng, budget)?;
                        (bip_stats(&seq), s.attempts)
                    }
                    ModelChoice::All => unreachable!("expanded above"),
                };
                Ok((stats.0, stats.1, stats.2, attempts))
            } else {
                let (stats, attempts) = match choice {
                    ModelChoice::True => (graph_stats(&models::sample_true(n, p, &mut rng)?), 1),
                    ModelChoice::Binomial => (graph_stats(&models::sample_b(n, p, &mut rng)?), 1),
                    ModelChoice::Conditioned => {
                        let (seq, s) = models::sample_e(n, p, &mut rng, budget)?;
                        (graph_stats(&seq), s.attempts)
                    }
                    ModelChoice::Integrated => {
                        let (seq, s) = models::sample_i(n, p, &mut rng, budget)?;
                        (graph_stats(&seq), s.attempts)
                    }
                    ModelChoice::All => unreachable!("expanded above"),
                };
                Ok((stats.0, stats.1, stats.2, attempts))
            }
        })?;
        println!(
            "{:>12} {:>12.2} {:>14.4} {:>10.2} {:>14.3}",
            choice.label(),
            summary.mean_sum,
            summary.mean_variance,
            summary.mean_max,
            summary.mean_attempts
        );
    }
    Ok(())
}

fn cmd_enumerate(
    degrees: Option<Vec<u32>>,
    left: Option<Vec<u32>>,
    right: Option<Vec<u32>>,
    epsilon: f64,
) -> Result<()> {
    match (degrees, left, right) {
        (Some(d), None, None) => {
            let seq = DegreeSequence::new(d);
            println!(
                "graph degree sequence: {:?} (sum {}, {})",
                seq.degrees,
                seq.sum(),
                if seq.has_even_sum() { "even" } else { "odd" }
            );
            let estimate = enumeration::mw_log_count(&seq, epsilon)?;
            if seq.len() <= enumeration::EXACT_GRAPH_VERTEX_CAP {
                let exact = enumeration::exact_count_graphs(&seq)?;
                let log_exact = enumeration::log_of_big(&exact);
                println!("exact count:            {exact}");
                println!("log exact count:        {log_exact:.6}");
                println!("asymptotic log count:   {:.6}", estimate.log_count);
                if log_exact.is_finite() && estimate.log_count.is_finite() {
                    println!(
                        "log ratio (formula - exact): {:+.6}",
                        estimate.log_count - log_exact
                    );
                }
            } else {
                println!("exact count:            skipped (more than {} vertices)",
                    enumeration::EXACT_GRAPH_VERTEX_CAP);
                println!("asymptotic log count:   {:.6}", estimate.log_count);
            }
            println!(
                "near-regular band:      {}",
                if estimate.in_band { "inside" } else { "outside" }
            );
            Ok(())
        }
        (None, Some(s), Some(t)) => {
            let seq = BipartiteDegreeSequence { s, t };
            println!(
                "bipartite degree sequence: left {:?}, right {:?} (sums {} / {})",
                seq.s,
                seq.t,
                seq.sum_s(),
                seq.sum_t()
            );
            let estimate = enumeration::cgm_log_count(&seq, epsilon)?;
            if seq.s.len() + seq.t.len() <= enumeration::EXACT_BIGRAPH_SLOT_CAP {
                let exact = enumeration::exact_count_bigraphs(&seq)?;
                let log_exact = enumeration::log_of_big(&exact);
                println!("exact count:            {exact}");
                println!("log exact count:        {log_exact:.6}");
                println!("asymptotic log count:   {:.6}", estimate.log_count);
                if log_exact.is_finite() && estimate.log_count.is_finite() {
                    println!(
                        "log ratio (formula - exact): {:+.6}",
                        estimate.log_count - log_exact
                    );
                }
            } else {
                println!("exact count:            skipped (more than {} slots)",
                    enumeration::EXACT_BIGRAPH_SLOT_CAP);
                println!("asymptotic log count:   {:.6}", estimate.log_count);
            }
            println!(
                "near-regular band:      {}",
                if estimate.in_band { "inside" } else { "outside" }
            );
            Ok(())
        }
        _ => Err(Error::invalid(
            "pass either --degrees (graph) or both --left and --right (bipartite)",
        )),
    }
}
