use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::SearchError;

/// Selection rule applied at every interior node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Selection {
    /// `Q + C·√(ln N(s) / N(a|s))`
    Uct,
    /// `Q + C·π(a|s)·√N(s) / (1 + N(a|s))`
    Puct,
    /// UCT plus `W·Q_max + σ`.
    SpMcts,
    /// `(1−λ)·Q + λ·Q_max` plus the UCT exploration term.
    SpMix,
}

/// How a terminal leaf is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RewardMode {
    /// 1 if the placement map equals the solution, else 0.
    GroundTruth,
    /// The evaluator's value of the complete canvas.
    Predicted,
    /// Always 1.
    ConstantOne,
}

/// Statistic used to pick the move once the budget is spent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActionChoice {
    VisitCount,
    MeanValue,
}

/// Leaf value backed up when the value head is off at non-terminal leaves.
pub const MIDGAME_FALLBACK_VALUE: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Simulations per move, including the root's own evaluation.
    pub n_visits: u32,
    /// Exploration constant `C`.
    pub c: f64,
    pub selection: Selection,
    /// Weight `W` of the max-value term under [`Selection::SpMcts`].
    pub w: f64,
    /// Mix weight `λ` under [`Selection::SpMix`].
    pub lambda: f64,
    pub reward_mode: RewardMode,
    /// Back up the value head at non-terminal leaves; otherwise
    /// [`MIDGAME_FALLBACK_VALUE`].
    pub midgame_value: bool,
    /// Use the policy head for priors; otherwise priors are uniform.
    pub use_policy: bool,
    pub action_choice: ActionChoice,
    /// Fresh tree every move. When false the chosen subtree is kept.
    pub tree_per_move: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            n_visits: 1000,
            c: 1.0,
            selection: Selection::Puct,
            w: 0.02,
            lambda: 0.5,
            reward_mode: RewardMode::Predicted,
            midgame_value: true,
            use_policy: true,
            action_choice: ActionChoice::VisitCount,
            tree_per_move: true,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<(), SearchError> {
        let bad = |m: &str| Err(SearchError::InvalidConfig(m.to_owned()));
        if self.n_visits == 0 {
            return bad("n_visits must be >= 1");
        }
        if !(self.c.is_finite() && self.c >= 0.0) {
            return bad("c must be finite and >= 0");
        }
        if !(self.w.is_finite() && self.w >= 0.0) {
            return bad("w must be finite and >= 0");
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return bad("lambda must lie in [0, 1]");
        }
        Ok(())
    }
}

macro_rules! keyword_enum {
    ($ty:ty { $($variant:ident => $name:literal),+ $(,)? }) => {
        impl FromStr for $ty {
            type Err = SearchError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s.trim().to_ascii_lowercase().as_str() {
                    $($name => Ok(<$ty>::$variant),)+
                    other => Err(SearchError::InvalidConfig(format!(
                        "unknown {} {other:?}", stringify!($ty)
                    ))),
                }
            }
        }

        impl fmt::Display for $ty {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(match self { $(<$ty>::$variant => $name,)+ })
            }
        }
    };
}

keyword_enum!(Selection { Uct => "uct", Puct => "puct", SpMcts => "sp-mcts", SpMix => "sp-mix" });
keyword_enum!(RewardMode { GroundTruth => "ground-truth", Predicted => "predicted", ConstantOne => "constant-one" });
keyword_enum!(ActionChoice { VisitCount => "visits", MeanValue => "mean-value" });
