//! Ground-truth-backed evaluators: exact oracles, seeded corruptions of
//! them, and the degenerate heads used to switch a network off.
//!
//! Noise is a pure function of `(seed, state)`: asking twice about the same
//! placement map yields the same verdict, the way a fixed network would.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{EvalError, Evaluator, Verdict};
use crate::env::{value_target, GameState, PuzzleInstance};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyHead {
    /// One-hot at the solution position of the next patch.
    Oracle,
    /// Softmax of Gumbel-perturbed logits with the target raised just enough
    /// that the arg-max misses it with probability `ε·(p−1)/p`. A wrong head
    /// still leaves some mass on the truth.
    Noisy(f64),
    /// `1/p` everywhere.
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ValueHead {
    /// The value target itself.
    Oracle,
    /// With probability ε a flawless state's target `v` is replaced by a draw
    /// from `U[0, v]`; flawed states are never scored as flawless. Every
    /// value then gets additive uniform noise on `[−ε/2, ε/2]`, clamped to
    /// `[0, 1]`.
    Noisy(f64),
    Constant(f64),
}

fn check_rate(eps: f64, what: &str) -> Result<f64, EvalError> {
    if (0.0..=1.0).contains(&eps) {
        Ok(eps)
    } else {
        Err(EvalError::Config(format!("{what} {eps} outside [0, 1]")))
    }
}

impl FromStr for PolicyHead {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().split_once(':') {
            None if s.trim() == "oracle" => Ok(Self::Oracle),
            None if s.trim() == "uniform" => Ok(Self::Uniform),
            Some(("noisy", eps)) => {
                let eps = eps.parse().map_err(|_| EvalError::Config(format!("bad rate in {s:?}")))?;
                Ok(Self::Noisy(check_rate(eps, "corruption rate")?))
            }
            _ => Err(EvalError::Config(format!("unknown policy head {s:?}"))),
        }
    }
}

impl FromStr for ValueHead {
    type Err = EvalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || EvalError::Config(format!("bad number in {s:?}"));
        match s.trim().split_once(':') {
            None if s.trim() == "oracle" => Ok(Self::Oracle),
            Some(("noisy", eps)) => Ok(Self::Noisy(check_rate(eps.parse().map_err(|_| bad())?, "corruption rate")?)),
            Some(("const", c)) => Ok(Self::Constant(check_rate(c.parse().map_err(|_| bad())?, "constant value")?)),
            _ => Err(EvalError::Config(format!("unknown value head {s:?}"))),
        }
    }
}

impl fmt::Display for PolicyHead {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Oracle => write!(f, "oracle"),
            Self::Noisy(e) => write!(f, "noisy:{e}"),
            Self::Uniform => write!(f, "uniform"),
        }
    }
}

impl fmt::Display for ValueHead {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Oracle => write!(f, "oracle"),
            Self::Noisy(e) => write!(f, "noisy:{e}"),
            Self::Constant(c) => write!(f, "const:{c}"),
        }
    }
}

/// A policy head and a value head bound to one puzzle instance.
#[derive(Debug, Clone)]
pub struct SyntheticEvaluator {
    instance: Arc<PuzzleInstance>,
    policy: PolicyHead,
    value: ValueHead,
    seed: u64,
}

const POLICY_STREAM: u64 = 0x5EED_0F0F_1CE5_0001;
const VALUE_STREAM: u64 = 0x5EED_0F0F_1CE5_0002;

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Stable hash of a placement map (plus an optional next patch).
fn state_key(seed: u64, stream: u64, state: &GameState, with_next: bool) -> u64 {
    let mut h = splitmix(seed ^ stream);
    for a in state.assignment() {
        h = splitmix(h ^ a.map_or(u64::MAX, |p| p as u64));
    }
    if with_next {
        h = splitmix(h ^ state.next_patch().map_or(u64::MAX - 1, |p| p as u64));
    }
    h
}

impl SyntheticEvaluator {
    pub fn new(instance: Arc<PuzzleInstance>, policy: PolicyHead, value: ValueHead, seed: u64) -> Self {
        Self {
            instance,
            policy,
            value,
            seed,
        }
    }

    pub fn oracle(instance: Arc<PuzzleInstance>) -> Self {
        Self::new(instance, PolicyHead::Oracle, ValueHead::Oracle, 0)
    }

    pub fn noisy(instance: Arc<PuzzleInstance>, eps: f64, seed: u64) -> Self {
        Self::new(instance, PolicyHead::Noisy(eps), ValueHead::Noisy(eps), seed)
    }

    fn policy_for(&self, state: &GameState) -> Vec<f64> {
        let p = state.spec().positions();
        let uniform = vec![1.0 / p as f64; p];
        let Some(next) = state.next_patch() else {
            return uniform;
        };
        let target = self.instance.solution_position(next);
        match self.policy {
            PolicyHead::Uniform => uniform,
            PolicyHead::Oracle => one_hot(p, target),
            PolicyHead::Noisy(eps) if eps == 0.0 => one_hot(p, target),
            PolicyHead::Noisy(eps) => {
                let mut rng = ChaCha8Rng::seed_from_u64(state_key(self.seed, POLICY_STREAM, state, true));
                let boost = target_logit(eps, p);
                let logits: Vec<f64> = (0..p)
                    .map(|a| gumbel(&mut rng) + if a == target { boost } else { 0.0 })
                    .collect();
                softmax(&logits)
            }
        }
    }

    fn value_for(&self, state: &GameState) -> f64 {
        match self.value {
            ValueHead::Constant(c) => c,
            ValueHead::Oracle => value_target(state, &self.instance),
            ValueHead::Noisy(eps) => {
                let mut rng = ChaCha8Rng::seed_from_u64(state_key(self.seed, VALUE_STREAM, state, false));
                let target = value_target(state, &self.instance);
                let base = if target > 0.0 && rng.gen::<f64>() < eps {
                    rng.gen::<f64>() * target
                } else {
                    target
                };
                let jitter = (rng.gen::<f64>() - 0.5) * eps;
                (base + jitter).clamp(0.0, 1.0)
            }
        }
    }
}

/// Logit offset that makes the target the arg-max of `p` Gumbel-perturbed
/// logits with probability `1 − ε + ε/p`: `e^L = p(1 − ε)/ε + 1`.
fn target_logit(eps: f64, p: usize) -> f64 {
    (p as f64 * (1.0 - eps) / eps + 1.0).ln()
}

fn gumbel(rng: &mut impl Rng) -> f64 {
    let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    -(-u.ln()).ln()
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / z).collect()
}

fn one_hot(p: usize, at: usize) -> Vec<f64> {
    let mut v = vec![0.0; p];
    v[at] = 1.0;
    v
}

impl Evaluator for SyntheticEvaluator {
    fn evaluate(&self, states: &[GameState]) -> Result<Vec<Verdict>, EvalError> {
        Ok(states
            .iter()
            .map(|s| Verdict::new(self.policy_for(s), self.value_for(s)))
            .collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{slice_image, synthetic_image, Action, PatchOrder, PuzzleSpec};

    fn instance() -> Arc<PuzzleInstance> {
        let spec = PuzzleSpec::new(4, 3, 1).unwrap();
        Arc::new(slice_image(&synthetic_image(30, 30, 1), spec, 0, "e").unwrap())
    }

    fn walk(inst: &PuzzleInstance, seed: u64) -> Vec<GameState> {
        let order = PatchOrder::shuffled(9, seed);
        let mut s = GameState::initial(inst, &order).unwrap();
        let mut out = vec![s.clone()];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        while !s.is_terminal() {
            let legal = s.legal_actions().unwrap();
            s = s.apply(legal[rng.gen_range(0..legal.len())]).unwrap();
            out.push(s.clone());
        }
        out
    }

    #[test]
    fn oracle_value_on_empty_state() {
        let inst = instance();
        let s = GameState::initial(&inst, &PatchOrder::identity(9)).unwrap();
        let v = SyntheticEvaluator::oracle(inst).evaluate(&[s]).unwrap();
        assert_eq!(v[0].value, 0.5);
    }

    #[test]
    fn uniform_policy_entries() {
        let inst = instance();
        let s = GameState::initial(&inst, &PatchOrder::identity(9)).unwrap();
        let e = SyntheticEvaluator::new(inst, PolicyHead::Uniform, ValueHead::Constant(0.3), 0);
        let v = e.evaluate(&[s]).unwrap();
        assert!(v[0].policy.iter().all(|&x| x == 1.0 / 9.0));
        assert_eq!(v[0].value, 0.3);
    }

    #[test]
    fn zero_corruption_matches_oracle() {
        let inst = instance();
        let oracle = SyntheticEvaluator::oracle(Arc::clone(&inst));
        let noisy = SyntheticEvaluator::noisy(Arc::clone(&inst), 0.0, 99);
        for seed in 0..30 {
            let states = walk(&inst, seed);
            assert_eq!(oracle.evaluate(&states).unwrap(), noisy.evaluate(&states).unwrap());
        }
    }

    #[test]
    fn verdicts_are_valid_and_repeatable() {
        let inst = instance();
        let heads = [
            SyntheticEvaluator::oracle(Arc::clone(&inst)),
            SyntheticEvaluator::noisy(Arc::clone(&inst), 0.3, 5),
            SyntheticEvaluator::noisy(Arc::clone(&inst), 1.0, 6),
            SyntheticEvaluator::new(Arc::clone(&inst), PolicyHead::Uniform, ValueHead::Constant(1.0), 0),
        ];
        for seed in 0..30 {
            let states = walk(&inst, seed);
            for e in &heads {
                let a = e.evaluate(&states).unwrap();
                assert_eq!(a, e.evaluate(&states).unwrap());
                for v in a {
                    v.validate(9).unwrap();
                }
            }
        }
    }

    #[test]
    fn oracle_policy_points_at_solution() {
        let inst = instance();
        let e = SyntheticEvaluator::oracle(Arc::clone(&inst));
        let order = PatchOrder::shuffled(9, 3);
        let mut s = GameState::initial(&inst, &order).unwrap();
        while !s.is_terminal() {
            let v = &e.evaluate(std::slice::from_ref(&s)).unwrap()[0];
            let best = (0..9).max_by(|&a, &b| v.policy[a].total_cmp(&v.policy[b])).unwrap();
            s = s.apply(Action::new(best)).unwrap();
        }
        assert_eq!(crate::env::ground_truth_reward(&s, &inst).unwrap(), 1);
    }

    #[test]
    fn corruption_rate_is_roughly_eps() {
        let inst = instance();
        let mut wrong = 0;
        let mut total = 0;
        for seed in 0..3000 {
            let e = SyntheticEvaluator::noisy(Arc::clone(&inst), 0.3, seed);
            let order = PatchOrder::shuffled(9, seed);
            let s = GameState::initial(&inst, &order).unwrap();
            let v = &e.evaluate(std::slice::from_ref(&s)).unwrap()[0];
            let peak = (0..9).max_by(|&a, &b| v.policy[a].total_cmp(&v.policy[b])).unwrap();
            total += 1;
            if peak != inst.solution_position(s.next_patch().unwrap()) {
                wrong += 1;
            }
        }
        let rate = wrong as f64 / total as f64;
        assert!((rate - 0.3 * 8.0 / 9.0).abs() < 0.025, "rate {rate}");
    }

    #[test]
    fn noisy_value_never_lifts_flawed_states() {
        let inst = instance();
        for seed in 0..50 {
            let e = SyntheticEvaluator::noisy(Arc::clone(&inst), 0.3, seed);
            for s in walk(&inst, seed) {
                let v = e.evaluate_one(&s).unwrap().value;
                if value_target(&s, &inst) == 0.0 {
                    assert!(v <= 0.15 + 1e-12, "flawed state scored {v}");
                }
            }
        }
    }

    #[test]
    fn parses_heads() {
        assert_eq!("noisy:0.3".parse::<PolicyHead>().unwrap(), PolicyHead::Noisy(0.3));
        assert_eq!("uniform".parse::<PolicyHead>().unwrap(), PolicyHead::Uniform);
        assert_eq!("const:1".parse::<ValueHead>().unwrap(), ValueHead::Constant(1.0));
        assert!("noisy:1.5".parse::<ValueHead>().is_err());
        assert!("bogus".parse::<PolicyHead>().is_err());
        assert_eq!(PolicyHead::Noisy(0.3).to_string().parse::<PolicyHead>().unwrap(), PolicyHead::Noisy(0.3));
    }
}
