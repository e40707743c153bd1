//! State approximation and randomized monotonicity checking.
//!
//! `s_approx` examines memory leaves before nodes: memory cells are tagged
//! pairs, so a structural (node) comparison must never swallow them. The
//! order of the cases is RAM, ROM, STUB, node, bit.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::eval::{EvalError, Evaluator, StateShape, StateTree};
use crate::fourval::{values_to_string, Value4};
use crate::memory::{mem_approx, MemKind};

fn leaf_kind(s: &StateTree) -> Option<MemKind> {
    match s {
        StateTree::Cell(m) => Some(m.kind()),
        _ => None,
    }
}

pub fn s_approx(s1: &StateTree, s2: &StateTree) -> bool {
    for kind in [MemKind::Ram, MemKind::Rom, MemKind::Stub] {
        if leaf_kind(s1) == Some(kind) || leaf_kind(s2) == Some(kind) {
            return match (s1, s2) {
                (StateTree::Cell(m1), StateTree::Cell(m2)) => m1.depth() == m2.depth() && m1.width() == m2.width() && mem_approx(m1, m2),
                _ => false,
            };
        }
    }
    match (s1, s2) {
        (StateTree::Node(a), StateTree::Node(b)) => a.len() == b.len() && a.iter().zip(b).all(|(x, y)| s_approx(x, y)),
        (StateTree::Bit(a), StateTree::Bit(b)) => a.approx(*b),
        _ => false,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TailError {
    #[error("state tail of a leaf")]
    NotANode,
    #[error("state tail of an empty node")]
    Empty,
}

/// The node without its first child.
pub fn state_tail(s: &StateTree) -> Result<StateTree, TailError> {
    match s {
        StateTree::Node(cs) if cs.is_empty() => Err(TailError::Empty),
        StateTree::Node(cs) => Ok(StateTree::Node(cs[1..].to_vec())),
        _ => Err(TailError::NotANode),
    }
}

/// Draw `T` and `F` with weight 0.45 each and `X` with 0.10.
pub fn random_value(rng: &mut impl Rng) -> Value4 {
    let r: f64 = rng.gen();
    if r < 0.45 {
        Value4::T
    } else if r < 0.90 {
        Value4::F
    } else {
        Value4::X
    }
}

pub fn random_state(shape: &StateShape, rng: &mut impl Rng) -> StateTree {
    shape.fill_state(&mut |_| random_value(rng))
}

/// A random state shape of bounded nesting, for exercising the relation itself.
pub fn random_shape(rng: &mut impl Rng, max_depth: usize) -> StateShape {
    let r: f64 = rng.gen();
    if max_depth == 0 || r < 0.3 {
        StateShape::Bit
    } else if r < 0.5 {
        StateShape::Mem {
            kind: MemKind::ALL[rng.gen_range(0..3)],
            depth: rng.gen_range(0..=2),
            width: rng.gen_range(1..=3),
        }
    } else {
        let n = rng.gen_range(0..=4);
        StateShape::Node((0..n).map(|_| random_shape(rng, max_depth - 1)).collect())
    }
}

fn weaken_slice(vals: &mut [Value4], p: f64, rng: &mut impl Rng) {
    for v in vals {
        if rng.gen_bool(p) {
            *v = Value4::X;
        }
    }
}

/// Replace each stored value by `X` independently with probability `p`.
pub fn weaken(s: &StateTree, p: f64, seed: u64) -> StateTree {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    weaken_with(s, p, &mut rng)
}

pub fn weaken_inputs(vals: &[Value4], p: f64, seed: u64) -> Vec<Value4> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vals.to_vec();
    weaken_slice(&mut out, p, &mut rng);
    out
}

pub fn weaken_with(s: &StateTree, p: f64, rng: &mut impl Rng) -> StateTree {
    let mut vals = s.values();
    weaken_slice(&mut vals, p, rng);
    s.with_values(&vals)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CheckKind {
    Se,
    De,
}

impl CheckKind {
    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Se => "se",
            CheckKind::De => "de",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonoViolation {
    pub trial: u64,
    pub kind: CheckKind,
    /// `out:<wire>` for outputs, `state:<path>` for next state.
    pub position: String,
    pub weak_inputs: Vec<Value4>,
    pub strong_inputs: Vec<Value4>,
    pub weak_state: StateTree,
    pub strong_state: StateTree,
    pub weak_result: String,
    pub strong_result: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonoReport {
    pub module: String,
    pub trials: u64,
    pub seed: u64,
    pub p: f64,
    pub violations: Vec<MonoViolation>,
    pub elapsed_ms: u128,
}

impl MonoReport {
    pub fn pass(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonoConfig {
    pub trials: u64,
    pub p: f64,
    pub seed: u64,
}

impl Default for MonoConfig {
    fn default() -> Self {
        MonoConfig {
            trials: 1000,
            p: 0.3,
            seed: 0,
        }
    }
}

/// Per-trial generator: one ChaCha stream per trial index, so trials are
/// independent of execution order.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

struct Outcome {
    outputs: Vec<Value4>,
    next: StateTree,
}

fn outcome(ev: &Evaluator, at: usize, inputs: &[Value4], s: &StateTree) -> Result<Outcome, EvalError> {
    let (outputs, next) = ev.step(at, inputs, s)?;
    Ok(Outcome { outputs, next })
}

fn find_violation(ev: &Evaluator, at: usize, kind: CheckKind, weak: &Outcome, strong: &Outcome) -> Option<String> {
    match kind {
        CheckKind::Se => weak
            .outputs
            .iter()
            .zip(&strong.outputs)
            .position(|(a, b)| !a.approx(*b))
            .map(|k| format!("out:{}", ev.netlist().modules[at].outputs[k])),
        CheckKind::De => (!s_approx(&weak.next, &strong.next)).then(|| {
            let path = weak.next.first_divergence(&strong.next).unwrap_or_default();
            format!("state:{path}")
        }),
    }
}

/// Check that outputs and next state are monotone in inputs and state over
/// `cfg.trials` random (strong, weakened) pairs.
pub fn check_monotonic(ev: &Evaluator, at: usize, cfg: &MonoConfig) -> Result<MonoReport, EvalError> {
    if !(0.0..=1.0).contains(&cfg.p) {
        return Err(EvalError::NotWellFormed(format!("probability {} outside [0, 1]", cfg.p)));
    }
    let start = Instant::now();
    let shape = ev.state_shape(at)?.clone();
    let n_in = ev.input_count(at);
    let per_trial: Vec<Vec<MonoViolation>> = (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(cfg.seed, trial);
            let s2 = random_state(&shape, &mut rng);
            let i2: Vec<Value4> = (0..n_in).map(|_| random_value(&mut rng)).collect();
            let s1 = weaken_with(&s2, cfg.p, &mut rng);
            let mut i1 = i2.clone();
            weaken_slice(&mut i1, cfg.p, &mut rng);
            check_trial(ev, at, trial, (i1, s1), (i2, s2))
        })
        .collect::<Result<_, _>>()?;
    Ok(MonoReport {
        module: ev.module_name(at).to_string(),
        trials: cfg.trials,
        seed: cfg.seed,
        p: cfg.p,
        violations: per_trial.into_iter().flatten().collect(),
        elapsed_ms: start.elapsed().as_millis(),
    })
}

type Point = (Vec<Value4>, StateTree);

fn check_trial(ev: &Evaluator, at: usize, trial: u64, weak: Point, strong: Point) -> Result<Vec<MonoViolation>, EvalError> {
    let strong_out = outcome(ev, at, &strong.0, &strong.1)?;
    let weak_out = outcome(ev, at, &weak.0, &weak.1)?;
    let mut found = Vec::new();
    for kind in [CheckKind::Se, CheckKind::De] {
        if find_violation(ev, at, kind, &weak_out, &strong_out).is_some() {
            found.push(minimize(ev, at, trial, kind, &weak, &strong, &strong_out)?);
        }
    }
    Ok(found)
}

/// Greedily restore weakened positions to their strong values while the
/// violation persists.
fn minimize(ev: &Evaluator, at: usize, trial: u64, kind: CheckKind, weak: &Point, strong: &Point, strong_out: &Outcome) -> Result<MonoViolation, EvalError> {
    let n_in = weak.0.len();
    let strong_vals: Vec<Value4> = strong.0.iter().copied().chain(strong.1.values()).collect();
    let mut vals: Vec<Value4> = weak.0.iter().copied().chain(weak.1.values()).collect();
    let split = |vals: &[Value4]| (vals[..n_in].to_vec(), weak.1.with_values(&vals[n_in..]));
    for k in 0..vals.len() {
        if vals[k] == strong_vals[k] {
            continue;
        }
        let old = vals[k];
        vals[k] = strong_vals[k];
        let (i, s) = split(&vals);
        let out = outcome(ev, at, &i, &s)?;
        if find_violation(ev, at, kind, &out, strong_out).is_none() {
            vals[k] = old;
        }
    }
    let (i, s) = split(&vals);
    let out = outcome(ev, at, &i, &s)?;
    let position = find_violation(ev, at, kind, &out, strong_out).expect("violation preserved by minimization");
    let (weak_result, strong_result) = match kind {
        CheckKind::Se => (values_to_string(&out.outputs), values_to_string(&strong_out.outputs)),
        CheckKind::De => (out.next.to_string(), strong_out.next.to_string()),
    };
    Ok(MonoViolation {
        trial,
        kind,
        position,
        weak_inputs: i,
        strong_inputs: strong.0.clone(),
        weak_state: s,
        strong_state: strong.1.clone(),
        weak_result,
        strong_result,
    })
}
