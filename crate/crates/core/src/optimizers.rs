//! Minimizers for `H(G) = min_{s in S} h_G(s)`.
//!
//! * [`optimize_exhaustive`] enumerates the constrained spin space exactly,
//!   in lexicographic order, using label symmetry to fix node 0 when valid.
//! * [`optimize_sa`] is Metropolis simulated annealing with geometric cooling.
//! * [`optimize_local`] is best-improvement descent, used as a baseline.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functionals::{EnergyState, Functional};
use crate::graph::{ConstraintSpec, Graph, SpinConfig};
use crate::seeding::{mix64, stream_rng, StreamRng};

/// Largest state count [`optimize_exhaustive`] will enumerate.
pub const EXHAUSTIVE_BUDGET: u128 = 1 << 25;

// values closer than this (relative) count as ties
const TIE_TOL: f64 = 1e-12;

#[inline]
fn improves(candidate: f64, best: f64) -> bool {
    candidate < best - TIE_TOL * best.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeResult {
    pub best_value: f64,
    pub best_config: SpinConfig,
    /// Number of configurations or proposals scored.
    pub evaluations: u64,
    pub exact: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MoveKind {
    /// Relabel one node.
    #[default]
    SingleFlip,
    /// Exchange the labels of two differently-labelled nodes; preserves
    /// occupation numbers.
    Swap,
}

/// Annealing schedule. Each restart makes `steps * N` proposals while the
/// temperature decays geometrically from `t_start` to `t_end`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnealSchedule {
    pub t_start: f64,
    pub t_end: f64,
    /// Sweeps per restart; a sweep is N proposals.
    pub steps: usize,
    pub restarts: usize,
    pub move_kind: MoveKind,
}

impl Default for AnnealSchedule {
    fn default() -> Self {
        AnnealSchedule {
            t_start: 1.0,
            t_end: 1e-3,
            steps: 200,
            restarts: 10,
            move_kind: MoveKind::SingleFlip,
        }
    }
}

impl AnnealSchedule {
    /// Default schedule, switched to swap moves when `constraint` fixes the
    /// occupation numbers.
    pub fn for_constraint(constraint: &ConstraintSpec) -> Self {
        AnnealSchedule {
            move_kind: if constraint.fixes_counts() {
                MoveKind::Swap
            } else {
                MoveKind::SingleFlip
            },
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_end > 0.0 && self.t_start >= self.t_end && self.t_start.is_finite()) {
            return Err(Error::Spec(format!(
                "need t_start >= t_end > 0, got t_start = {}, t_end = {}",
                self.t_start, self.t_end
            )));
        }
        if self.steps < 1 || self.restarts < 1 {
            return Err(Error::Spec("steps and restarts must be at least 1".into()));
        }
        Ok(())
    }
}

/// Optimizer choice plus its settings, as stored in experiment configs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum OptimizerPolicy {
    Exhaustive,
    Anneal {
        #[serde(flatten)]
        schedule: AnnealSchedule,
    },
    Local {
        #[serde(default = "default_restarts")]
        restarts: usize,
    },
}

fn default_restarts() -> usize {
    10
}

impl OptimizerPolicy {
    /// Runs the policy; `seed` drives every random choice.
    pub fn run(&self, f: &Functional, g: &Graph, constraint: &ConstraintSpec, seed: u64) -> Result<OptimizeResult> {
        match self {
            OptimizerPolicy::Exhaustive => optimize_exhaustive(f, g, constraint),
            OptimizerPolicy::Anneal { schedule } => optimize_sa(f, g, constraint, schedule, seed),
            OptimizerPolicy::Local { restarts } => optimize_local(f, g, constraint, *restarts, seed),
        }
    }
}

fn prepare(f: &Functional, g: &Graph, constraint: &ConstraintSpec) -> Result<()> {
    let n = g.node_count();
    if n == 0 {
        return Err(Error::Input("graph has no nodes".into()));
    }
    let q = f.q();
    constraint.validate(n, q)?;
    f.check(g, &SpinConfig::from_parts_unchecked(vec![0; n], q))
}

fn finish(f: &Functional, g: &Graph, labels: Vec<usize>, evaluations: u64, exact: bool) -> OptimizeResult {
    let state = EnergyState::new_unchecked(f, g, labels);
    OptimizeResult {
        best_value: state.value(),
        best_config: state.config(),
        evaluations,
        exact,
    }
}

/// Number of states the exhaustive search would visit, and whether node 0 is
/// pinned by symmetry.
pub fn exhaustive_state_count(f: &Functional, n: usize, constraint: &ConstraintSpec) -> (u128, bool) {
    let q = f.q();
    let reduce = n > 0
        && f.label_symmetric()
        && match constraint {
            ConstraintSpec::Unconstrained => true,
            ConstraintSpec::FixedGroupSizes { sizes } => sizes.windows(2).all(|w| w[0] == w[1]),
            _ => q == 2 && constraint.symmetric_under_label_swap(),
        };
    let free = if reduce { n - 1 } else { n };
    let states = (q as u128).checked_pow(free as u32).unwrap_or(u128::MAX);
    (states, reduce)
}

/// Exact minimum over the constrained spin space. Among minimizers the
/// lexicographically smallest label vector is returned.
pub fn optimize_exhaustive(f: &Functional, g: &Graph, constraint: &ConstraintSpec) -> Result<OptimizeResult> {
    prepare(f, g, constraint)?;
    let n = g.node_count();
    let q = f.q();
    let (states, reduce) = exhaustive_state_count(f, n, constraint);
    if states > EXHAUSTIVE_BUDGET {
        return Err(Error::TooLarge {
            states,
            budget: EXHAUSTIVE_BUDGET,
        });
    }
    let first_free = usize::from(reduce);
    let required = constraint.required_counts(n, q);

    let mut state = EnergyState::new_unchecked(f, g, vec![0; n]);
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut evaluations = 0u64;
    loop {
        if required.as_deref().is_none_or(|r| r == state.counts()) {
            evaluations += 1;
            let v = state.value();
            let better = match &best {
                None => true,
                Some((b, _)) => improves(v, *b),
            };
            if better {
                best = Some((v, state.labels().to_vec()));
            }
        }
        // odometer step, last node fastest, so visits are in lexicographic order
        let mut node = n;
        let mut done = true;
        while node > first_free {
            node -= 1;
            let l = state.label(node);
            if l + 1 < q {
                state.apply(node, l + 1);
                done = false;
                break;
            }
            state.apply(node, 0);
        }
        if done {
            break;
        }
    }
    let (_, labels) = best.ok_or_else(|| Error::Infeasible("no configuration satisfies the constraint".into()))?;
    Ok(finish(f, g, labels, evaluations, true))
}

/// Uniform random configuration satisfying `constraint`.
pub fn random_config(n: usize, q: usize, constraint: &ConstraintSpec, rng: &mut StreamRng) -> Vec<usize> {
    match constraint.required_counts(n, q) {
        None => (0..n).map(|_| rng.gen_range(0..q)).collect(),
        Some(counts) => {
            let mut labels: Vec<usize> = counts
                .iter()
                .enumerate()
                .flat_map(|(l, &c)| std::iter::repeat_n(l, c))
                .collect();
            labels.shuffle(rng);
            labels
        }
    }
}

fn check_start(f: &Functional, g: &Graph, constraint: &ConstraintSpec, start: &SpinConfig) -> Result<()> {
    f.check(g, start)?;
    if !constraint.is_satisfied(start) {
        return Err(Error::Input("start configuration violates the constraint".into()));
    }
    Ok(())
}

/// Simulated annealing from random constrained starts, one per restart.
pub fn optimize_sa(
    f: &Functional,
    g: &Graph,
    constraint: &ConstraintSpec,
    schedule: &AnnealSchedule,
    seed: u64,
) -> Result<OptimizeResult> {
    anneal(f, g, constraint, schedule, seed, None)
}

/// Simulated annealing where every restart begins at `start`.
pub fn optimize_sa_from(
    f: &Functional,
    g: &Graph,
    constraint: &ConstraintSpec,
    schedule: &AnnealSchedule,
    seed: u64,
    start: &SpinConfig,
) -> Result<OptimizeResult> {
    anneal(f, g, constraint, schedule, seed, Some(start))
}

/// Runs the restarts of [`optimize_sa`] one after another, showing
/// `observe(restart, labels)` the state after every proposal. Same result as
/// `optimize_sa` with the same arguments.
pub fn optimize_sa_observed<O>(
    f: &Functional,
    g: &Graph,
    constraint: &ConstraintSpec,
    schedule: &AnnealSchedule,
    seed: u64,
    mut observe: O,
) -> Result<OptimizeResult>
where
    O: FnMut(usize, &[usize]),
{
    check_anneal(f, g, constraint, schedule)?;
    let runs: Vec<(f64, Vec<usize>, u64)> = (0..schedule.restarts)
        .map(|r| {
            let mut rng = stream_rng(mix64(seed, r as u64));
            let init = random_config(g.node_count(), f.q(), constraint, &mut rng);
            anneal_restart(f, g, schedule, init, &mut rng, &mut |st| observe(r, st.labels()))
        })
        .collect();
    Ok(pick_best(f, g, runs))
}

fn check_anneal(f: &Functional, g: &Graph, constraint: &ConstraintSpec, schedule: &AnnealSchedule) -> Result<()> {
    prepare(f, g, constraint)?;
    schedule.validate()?;
    if constraint.fixes_counts() && schedule.move_kind == MoveKind::SingleFlip {
        return Err(Error::InvalidMoveKind(
            "single-flip moves break a fixed-magnetization or group-size constraint; use swap".into(),
        ));
    }
    Ok(())
}

fn pick_best(f: &Functional, g: &Graph, runs: Vec<(f64, Vec<usize>, u64)>) -> OptimizeResult {
    let evaluations = runs.iter().map(|r| r.2).sum();
    let mut best_idx = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.0 < runs[best_idx].0 {
            best_idx = i;
        }
    }
    let labels = runs.into_iter().nth(best_idx).expect("restarts >= 1").1;
    finish(f, g, labels, evaluations, false)
}

fn anneal(
    f: &Functional,
    g: &Graph,
    constraint: &ConstraintSpec,
    schedule: &AnnealSchedule,
    seed: u64,
    start: Option<&SpinConfig>,
) -> Result<OptimizeResult> {
    check_anneal(f, g, constraint, schedule)?;
    if let Some(s) = start {
        check_start(f, g, constraint, s)?;
    }
    let runs: Vec<(f64, Vec<usize>, u64)> = (0..schedule.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(mix64(seed, r as u64));
            let init = match start {
                Some(s) => s.labels().to_vec(),
                None => random_config(g.node_count(), f.q(), constraint, &mut rng),
            };
            anneal_restart(f, g, schedule, init, &mut rng, &mut |_| {})
        })
        .collect();
    Ok(pick_best(f, g, runs))
}

/// One annealing run. `observe` sees the state after every proposal.
fn anneal_restart(
    f: &Functional,
    g: &Graph,
    schedule: &AnnealSchedule,
    init: Vec<usize>,
    rng: &mut StreamRng,
    observe: &mut dyn FnMut(&EnergyState),
) -> (f64, Vec<usize>, u64) {
    let n = g.node_count();
    let q = f.q();
    let mut state = EnergyState::new_unchecked(f, g, init);
    let mut current = state.value();
    let mut best = current;
    let mut best_labels = state.labels().to_vec();
    let mut evaluations = 1u64;

    let swap = schedule.move_kind == MoveKind::Swap;
    if swap && state.counts().iter().filter(|&&c| c > 0).count() < 2 {
        // every node shares one label: no swap changes anything
        return (best, best_labels, evaluations);
    }

    let proposals = schedule.steps.saturating_mul(n).max(1);
    let log_ratio = (schedule.t_end / schedule.t_start).ln();
    for k in 0..proposals {
        let frac = if proposals > 1 {
            k as f64 / (proposals - 1) as f64
        } else {
            0.0
        };
        let temp = schedule.t_start * (log_ratio * frac).exp();
        evaluations += 1;

        if swap {
            let i = rng.gen_range(0..n);
            let li = state.label(i);
            let j = loop {
                let j = rng.gen_range(0..n);
                if state.label(j) != li {
                    break j;
                }
            };
            let lj = state.label(j);
            let d1 = state.delta(i, lj);
            state.apply(i, lj);
            let delta = d1 + state.delta(j, li);
            if accept(delta, temp, rng) {
                state.apply(j, li);
                current = state.value();
            } else {
                state.apply(i, li);
            }
        } else {
            let node = rng.gen_range(0..n);
            let old = state.label(node);
            let new = if q == 2 {
                1 - old
            } else {
                let r = rng.gen_range(0..q - 1);
                if r >= old {
                    r + 1
                } else {
                    r
                }
            };
            let delta = state.delta(node, new);
            if accept(delta, temp, rng) {
                state.apply(node, new);
                current = state.value();
            }
        }
        observe(&state);
        if improves(current, best) {
            best = current;
            best_labels.copy_from_slice(state.labels());
        }
    }
    (best, best_labels, evaluations)
}

#[inline]
fn accept(delta: f64, temp: f64, rng: &mut StreamRng) -> bool {
    if delta <= 0.0 {
        return true;
    }
    rng.gen::<f64>() < (-delta / temp).exp()
}

/// Best-improvement descent from `restarts` random constrained starts.
pub fn optimize_local(
    f: &Functional,
    g: &Graph,
    constraint: &ConstraintSpec,
    restarts: usize,
    seed: u64,
) -> Result<OptimizeResult> {
    prepare(f, g, constraint)?;
    if restarts < 1 {
        return Err(Error::Spec("restarts must be at least 1".into()));
    }
    let runs: Vec<(f64, Vec<usize>, u64)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream_rng(mix64(seed, r as u64));
            let init = random_config(g.node_count(), f.q(), constraint, &mut rng);
            descend(f, g, constraint.fixes_counts(), init)
        })
        .collect();
    let evaluations = runs.iter().map(|r| r.2).sum();
    let mut best_idx = 0;
    for (i, run) in runs.iter().enumerate() {
        if run.0 < runs[best_idx].0 {
            best_idx = i;
        }
    }
    let labels = runs.into_iter().nth(best_idx).expect("restarts >= 1").1;
    Ok(finish(f, g, labels, evaluations, false))
}

/// Best-improvement descent from `start`.
pub fn optimize_local_from(
    f: &Functional,
    g: &Graph,
    constraint: &ConstraintSpec,
    start: &SpinConfig,
) -> Result<OptimizeResult> {
    prepare(f, g, constraint)?;
    check_start(f, g, constraint, start)?;
    let (_, labels, evaluations) = descend(f, g, constraint.fixes_counts(), start.labels().to_vec());
    Ok(finish(f, g, labels, evaluations, false))
}

fn descend(f: &Functional, g: &Graph, swaps: bool, init: Vec<usize>) -> (f64, Vec<usize>, u64) {
    let n = g.node_count();
    let q = f.q();
    let mut state = EnergyState::new_unchecked(f, g, init);
    let mut evaluations = 1u64;
    loop {
        let mut best_delta = 0.0;
        let mut best_move: Option<(usize, usize, Option<usize>)> = None;
        if swaps {
            for i in 0..n {
                let li = state.label(i);
                for j in i + 1..n {
                    let lj = state.label(j);
                    if li == lj {
                        continue;
                    }
                    evaluations += 1;
                    let d1 = state.delta(i, lj);
                    state.apply(i, lj);
                    let d = d1 + state.delta(j, li);
                    state.apply(i, li);
                    if improves(d, best_delta) {
                        best_delta = d;
                        best_move = Some((i, lj, Some(j)));
                    }
                }
            }
        } else {
            for node in 0..n {
                for l in 0..q {
                    if l == state.label(node) {
                        continue;
                    }
                    evaluations += 1;
                    let d = state.delta(node, l);
                    if improves(d, best_delta) {
                        best_delta = d;
                        best_move = Some((node, l, None));
                    }
                }
            }
        }
        match best_move {
            None => break,
            Some((i, l, None)) => state.apply(i, l),
            Some((i, lj, Some(j))) => {
                let li = state.label(i);
                state.apply(i, lj);
                state.apply(j, li);
            }
        }
    }
    (state.value(), state.labels().to_vec(), evaluations)
}
