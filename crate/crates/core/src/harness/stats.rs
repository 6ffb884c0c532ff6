//! Paired comparisons.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, DiscreteCDF};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignTest {
    /// Pairs where the first sample is larger.
    pub wins: usize,
    pub losses: usize,
    pub ties: usize,
    /// One-sided p-value for "the first sample tends to be larger":
    /// `P(X ≥ wins)` with `X ~ Binomial(wins + losses, 1/2)`.
    pub p_value: f64,
}

/// Paired sign test; ties are dropped.
pub fn sign_test(a: &[f64], b: &[f64]) -> SignTest {
    assert_eq!(a.len(), b.len(), "sign test needs paired samples");
    let wins = a.iter().zip(b).filter(|(x, y)| x > y).count();
    let losses = a.iter().zip(b).filter(|(x, y)| x < y).count();
    let ties = a.len() - wins - losses;
    let n = (wins + losses) as u64;
    let p_value = if wins == 0 {
        1.0
    } else {
        Binomial::new(0.5, n).expect("valid binomial").sf(wins as u64 - 1)
    };
    SignTest {
        wins,
        losses,
        ties,
        p_value,
    }
}
