use super::EvalError;

const POLICY_SUM_TOLERANCE: f64 = 1e-6;

/// Policy over board positions and a value estimate in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub policy: Vec<f64>,
    pub value: f64,
}

impl Verdict {
    pub fn new(policy: Vec<f64>, value: f64) -> Self {
        Self { policy, value }
    }

    /// Checks the probability-vector and value-range contract.
    pub fn validate(&self, positions: usize) -> Result<(), EvalError> {
        if self.policy.len() != positions {
            return Err(EvalError::Malformed(format!(
                "policy has {} entries, expected {positions}",
                self.policy.len()
            )));
        }
        if self.policy.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(EvalError::Malformed("policy entry negative or not finite".into()));
        }
        let sum: f64 = self.policy.iter().sum();
        if (sum - 1.0).abs() > POLICY_SUM_TOLERANCE {
            return Err(EvalError::Malformed(format!("policy sums to {sum}")));
        }
        if !(0.0..=1.0).contains(&self.value) {
            return Err(EvalError::Malformed(format!("value {} outside [0, 1]", self.value)));
        }
        Ok(())
    }
}

/// Zeroes illegal entries and renormalizes. When no mass lands on a legal
/// position the result is uniform over `legal`.
pub fn mask_and_renormalize(policy: &[f64], legal: &[usize]) -> Result<Vec<f64>, EvalError> {
    if legal.is_empty() {
        return Err(EvalError::EmptyLegalSet);
    }
    let mut out = vec![0.0; policy.len()];
    let mass: f64 = legal.iter().map(|&a| policy[a]).sum();
    if mass > 0.0 {
        for &a in legal {
            out[a] = policy[a] / mass;
        }
    } else {
        let share = 1.0 / legal.len() as f64;
        for &a in legal {
            out[a] = share;
        }
    }
    Ok(out)
}
