//! Stochastic turn-by-turn dynamics: one agent per step draws its type,
//! best-responds to the current aggregate, and shifts the aggregate by a
//! 1/t step. Trajectories carry the harmonic interpolation clock, and limits
//! are classified against the analyzer's attractor list and RV cycles.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attractor::Attractor;
use crate::game::{Aggregate, GameSpec};
use crate::region::RegionVertex;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimConfig {
    pub steps: u64,
    pub seed: u64,
    /// Defaults to the barycenter.
    pub initial: Option<Vec<f64>>,
    /// Warm-start weight of the initial aggregate; keeps the first steps
    /// well-defined and fades as 1/t.
    pub t0: f64,
    /// Record every `thin`-th step (plus step 0 and the final step).
    pub thin: u64,
    pub tie_tol: f64,
}

impl SimConfig {
    pub fn new(steps: u64, seed: u64) -> Self {
        SimConfig {
            steps,
            seed,
            initial: None,
            t0: 1.0,
            thin: 1,
            tie_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sample {
    pub step: u64,
    /// Harmonic clock τ(t) = Σ_{i≤t} 1/i.
    pub tau: f64,
    pub omega: Vec<f64>,
    /// Type drawn at this step (none for step 0).
    pub type_drawn: Option<usize>,
    /// Action chosen at this step (none for step 0).
    pub action: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub steps: u64,
    pub seed: u64,
    pub t0: f64,
    pub initial: Vec<f64>,
    pub samples: Vec<Sample>,
    /// Cumulative choice counts per (type, action).
    pub counts: Vec<Vec<u64>>,
    pub terminal: Vec<f64>,
}

/// Mutable state of one run.
#[derive(Debug, Clone)]
pub struct SimState {
    pub t: u64,
    pub tau: f64,
    pub omega: Vec<f64>,
    pub counts: Vec<Vec<u64>>,
    pub t0: f64,
}

impl SimState {
    pub fn new(game: &GameSpec, initial: &Aggregate, t0: f64) -> Self {
        SimState {
            t: 0,
            tau: 0.0,
            omega: initial.as_slice().to_vec(),
            counts: vec![vec![0; game.k()]; game.n_types()],
            t0,
        }
    }
}

/// One turn: draw a type from α, best-respond with uniform tie break, update
/// the aggregate by ω += γ·(indicator − ω) with γ = 1/(t₀+t+1).
pub fn step(state: &mut SimState, game: &GameSpec, tie_tol: f64, rng: &mut ChaCha8Rng) -> (usize, usize) {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut theta = game.n_types() - 1;
    for (i, &a) in game.alpha().iter().enumerate() {
        acc += a;
        if u < acc {
            theta = i;
            break;
        }
    }
    let brs = game.best_response_raw(theta, &state.omega, tie_tol);
    let action = if brs.len() == 1 {
        brs[0]
    } else {
        brs[rng.random_range(0..brs.len())]
    };
    let gamma = 1.0 / (state.t0 + state.t as f64 + 1.0);
    for (a0, w) in state.omega.iter_mut().enumerate() {
        let indicator = if a0 + 1 == action { 1.0 } else { 0.0 };
        *w += gamma * (indicator - *w);
    }
    state.counts[theta][action - 1] += 1;
    state.t += 1;
    state.tau += 1.0 / state.t as f64;
    (theta, action)
}

/// Runs the dynamics for `config.steps` turns; deterministic given the seed.
pub fn run(game: &GameSpec, config: &SimConfig) -> Trajectory {
    run_with_stream(game, config, 0)
}

/// Like `run`, but on an independent RNG stream (used by batches).
pub fn run_with_stream(game: &GameSpec, config: &SimConfig, stream: u64) -> Trajectory {
    assert!(config.steps >= 1, "need at least one step");
    let initial = match &config.initial {
        Some(v) => Aggregate::new(v.clone()).expect("initial point must lie on the simplex"),
        None => Aggregate::uniform(game.k()),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(stream);
    let mut state = SimState::new(game, &initial, config.t0);
    let mut samples = Vec::new();
    samples.push(Sample {
        step: 0,
        tau: 0.0,
        omega: state.omega.clone(),
        type_drawn: None,
        action: None,
    });
    let thin = config.thin.max(1);
    for t in 1..=config.steps {
        let (theta, action) = step(&mut state, game, config.tie_tol, &mut rng);
        if t % thin == 0 || t == config.steps {
            samples.push(Sample {
                step: t,
                tau: state.tau,
                omega: state.omega.clone(),
                type_drawn: Some(theta),
                action: Some(action),
            });
        }
    }
    Trajectory {
        steps: config.steps,
        seed: config.seed,
        t0: config.t0,
        initial: initial.into_vec(),
        terminal: state.omega.clone(),
        samples,
        counts: state.counts,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Classification {
    /// Terminal point near an attractor with a settling running mean.
    Converged { attractor: usize },
    /// The visited-region sequence laps a directed RV cycle at least twice.
    CyclicSuspect { cycle: Vec<usize> },
    Unresolved,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitReport {
    pub terminal: Vec<f64>,
    /// Index into the attractor list and ℓ∞ distance.
    pub nearest_attractor: Option<(usize, f64)>,
    pub classification: Classification,
    /// Compressed region-visit sequence over the detection window.
    pub region_laps: Vec<usize>,
}

/// Fraction of the run (by steps) whose samples feed cyclic-lap detection.
/// Region dwell times grow exponentially in step count, so the window must
/// span several octaves of t to catch two laps.
const LAP_WINDOW_DIVISOR: u64 = 256;

/// Classifies a trajectory's limit: convergence to a listed attractor,
/// cyclic recurrence along an RV-graph cycle, or unresolved.
pub fn classify_limit(
    game: &GameSpec,
    regions: &[RegionVertex],
    attractors: &[Attractor],
    rv_cycles: &[Vec<usize>],
    traj: &Trajectory,
    tol_conv: f64,
) -> LimitReport {
    let nearest = attractors
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let d = a
                .point
                .as_slice()
                .iter()
                .zip(&traj.terminal)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max);
            (i, d)
        })
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap());

    // region-visit sequence over the tail window, consecutive repeats merged
    let window_start = (traj.steps / LAP_WINDOW_DIVISOR).max(100);
    let mut laps: Vec<usize> = Vec::new();
    for s in traj.samples.iter().filter(|s| s.step >= window_start) {
        let mut profile = Vec::with_capacity(game.n_types());
        let mut interior = true;
        for theta in 0..game.n_types() {
            let brs = game.best_response_raw(theta, &s.omega, 1e-9);
            if brs.len() == 1 {
                profile.push(brs[0]);
            } else {
                interior = false;
                break;
            }
        }
        if !interior {
            continue;
        }
        if let Some(r) = regions.iter().find(|r| r.e == profile) {
            if laps.last() != Some(&r.id) {
                laps.push(r.id);
            }
        }
    }

    // converged: terminal near an attractor and the running mean settling
    if let Some((idx, dist)) = nearest {
        if dist < tol_conv && running_mean_settled(traj, tol_conv) {
            return LimitReport {
                terminal: traj.terminal.clone(),
                nearest_attractor: Some((idx, dist)),
                classification: Classification::Converged { attractor: idx },
                region_laps: laps,
            };
        }
    }

    // cyclic suspect: some RV cycle appears as ≥ 2 consecutive laps
    for cycle in rv_cycles {
        if contains_two_laps(&laps, cycle) {
            return LimitReport {
                terminal: traj.terminal.clone(),
                nearest_attractor: nearest,
                classification: Classification::CyclicSuspect { cycle: cycle.clone() },
                region_laps: laps,
            };
        }
    }

    LimitReport {
        terminal: traj.terminal.clone(),
        nearest_attractor: nearest,
        classification: Classification::Unresolved,
        region_laps: laps,
    }
}

/// The running mean over the last quarter of samples must move by less than
/// tol/2 relative to the mean over the preceding quarter.
fn running_mean_settled(traj: &Trajectory, tol_conv: f64) -> bool {
    let n = traj.samples.len();
    if n < 8 {
        return true;
    }
    let mean_of = |lo: usize, hi: usize| -> Vec<f64> {
        let k = traj.samples[0].omega.len();
        let mut m = vec![0.0; k];
        for s in &traj.samples[lo..hi] {
            for (mi, w) in m.iter_mut().zip(&s.omega) {
                *mi += w;
            }
        }
        m.iter_mut().for_each(|mi| *mi /= (hi - lo) as f64);
        m
    };
    let a = mean_of(n / 2, 3 * n / 4);
    let b = mean_of(3 * n / 4, n);
    a.iter()
        .zip(&b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        < tol_conv / 2.0
}

/// Whether `laps` contains 2·|cycle| consecutive entries equal to some
/// rotation of the cycle repeated twice.
fn contains_two_laps(laps: &[usize], cycle: &[usize]) -> bool {
    let l = cycle.len();
    if l == 0 || laps.len() < 2 * l {
        return false;
    }
    for window in laps.windows(2 * l) {
        for rot in 0..l {
            if window
                .iter()
                .enumerate()
                .all(|(i, &v)| v == cycle[(rot + i) % l])
            {
                return true;
            }
        }
    }
    false
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BatchSummary {
    /// Converged-run counts per attractor index.
    pub converged: Vec<(usize, usize)>,
    pub cyclic_suspect: usize,
    pub unresolved: usize,
}

/// Independent seeded runs (parallel across RNG streams), classified against
/// the same attractor list and merged in run order.
pub fn batch(
    game: &GameSpec,
    config: &SimConfig,
    n_runs: usize,
    regions: &[RegionVertex],
    attractors: &[Attractor],
    rv_cycles: &[Vec<usize>],
    tol_conv: f64,
) -> (Vec<LimitReport>, BatchSummary) {
    assert!(n_runs >= 1);
    let reports: Vec<LimitReport> = (0..n_runs)
        .into_par_iter()
        .map(|i| {
            let traj = run_with_stream(game, config, i as u64);
            classify_limit(game, regions, attractors, rv_cycles, &traj, tol_conv)
        })
        .collect();
    let mut converged = vec![0usize; attractors.len()];
    let mut cyclic = 0;
    let mut unresolved = 0;
    for r in &reports {
        match &r.classification {
            Classification::Converged { attractor } => converged[*attractor] += 1,
            Classification::CyclicSuspect { .. } => cyclic += 1,
            Classification::Unresolved => unresolved += 1,
        }
    }
    let summary = BatchSummary {
        converged: converged.into_iter().enumerate().filter(|(_, c)| *c > 0).collect(),
        cyclic_suspect: cyclic,
        unresolved,
    };
    (reports, summary)
}
