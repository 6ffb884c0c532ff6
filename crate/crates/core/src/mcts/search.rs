//! One move's worth of search.
//!
//! The first simulation evaluates and expands the root; each of the
//! remaining `n_visits − 1` descends from the root with the selection rule,
//! adds at most one node, scores the leaf, and backs the value up.

use crate::env::{ground_truth_reward, Action, GameState, PuzzleInstance};
use crate::eval::{mask_and_renormalize, Evaluator, Verdict};

use super::config::{ActionChoice, RewardMode, SearchConfig, MIDGAME_FALLBACK_VALUE};
use super::select::select_edge;
use super::tree::{backpropagate, Node, NodeId, Tree};
use super::SearchError;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SearchStats {
    pub simulations: u32,
    pub nodes: usize,
    pub evaluator_calls: u32,
    /// Simulations that ended on a terminal node.
    pub terminal_hits: u32,
    pub max_depth: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    /// `N(a|s)` per board position (0 for occupied positions).
    pub visits: Vec<u32>,
    /// `Q(a|s)` per board position (0 when unvisited).
    pub q: Vec<f64>,
    /// Normalized visit counts; one-hot on the chosen action when no edge
    /// was visited.
    pub pi: Vec<f64>,
    pub action: Action,
    pub stats: SearchStats,
}

/// A search tree that can be kept across moves.
pub struct SearchTree<'a> {
    instance: &'a PuzzleInstance,
    evaluator: &'a dyn Evaluator,
    config: SearchConfig,
    tree: Tree,
    root: Option<NodeId>,
    stats: SearchStats,
}

impl<'a> SearchTree<'a> {
    pub fn new(
        instance: &'a PuzzleInstance,
        evaluator: &'a dyn Evaluator,
        config: SearchConfig,
    ) -> Result<Self, SearchError> {
        config.validate()?;
        Ok(Self {
            instance,
            evaluator,
            config,
            tree: Tree::new(),
            root: None,
            stats: SearchStats::default(),
        })
    }

    pub fn tree(&self) -> &Tree {
        &self.tree
    }

    pub fn root(&self) -> Option<NodeId> {
        self.root
    }

    /// Runs the simulation budget from `state` and picks a move. If the
    /// current root already holds `state` (subtree reuse), its statistics
    /// are kept.
    pub fn search(&mut self, state: &GameState) -> Result<SearchResult, SearchError> {
        if state.is_terminal() {
            return Err(SearchError::TerminalRoot);
        }
        self.stats = SearchStats::default();
        let root = match self.root {
            Some(id) if same_position(&self.tree.node(id).state, state) => id,
            _ => {
                self.tree = Tree::new();
                let id = self.create_node(state.clone())?.0;
                self.root = Some(id);
                id
            }
        };
        self.stats.simulations = 1;

        for _ in 1..self.config.n_visits {
            self.simulate(root)?;
            self.stats.simulations += 1;
        }
        self.stats.nodes = self.tree.len();
        Ok(self.result(root))
    }

    /// Re-roots on the child reached by `action`, if it was expanded.
    pub fn advance(&mut self, action: Action) {
        let next = self.root.and_then(|r| {
            self.tree
                .node(r)
                .edges
                .iter()
                .find(|e| e.action == action)
                .and_then(|e| e.child)
        });
        self.root = next;
    }

    fn evaluate(&mut self, state: &GameState) -> Result<Verdict, SearchError> {
        self.stats.evaluator_calls += 1;
        let v = self.evaluator.evaluate_one(state)?;
        Ok(v)
    }

    /// Adds a node for `state` and returns it with its leaf value.
    fn create_node(&mut self, state: GameState) -> Result<(NodeId, f64), SearchError> {
        if state.is_terminal() {
            let reward = match self.config.reward_mode {
                RewardMode::GroundTruth => f64::from(ground_truth_reward(&state, self.instance)?),
                RewardMode::ConstantOne => 1.0,
                RewardMode::Predicted => self.evaluate(&state)?.value,
            };
            let mut node = Node::new(state, &[]);
            node.reward = Some(reward);
            return Ok((self.tree.push(node), reward));
        }

        let legal: Vec<usize> = state.legal_actions()?.iter().map(|a| a.position).collect();
        let verdict = if self.config.use_policy || self.config.midgame_value {
            Some(self.evaluate(&state)?)
        } else {
            None
        };
        let priors = match verdict.as_ref().filter(|_| self.config.use_policy) {
            Some(v) => {
                if v.policy.len() != state.spec().positions() {
                    return Err(SearchError::Evaluator(crate::eval::EvalError::Malformed(
                        "policy length differs from position count".into(),
                    )));
                }
                mask_and_renormalize(&v.policy, &legal)?
            }
            None => {
                let mut uniform = vec![0.0; state.spec().positions()];
                for &a in &legal {
                    uniform[a] = 1.0 / legal.len() as f64;
                }
                uniform
            }
        };
        let value = match verdict.as_ref().filter(|_| self.config.midgame_value) {
            Some(v) => v.value,
            None => MIDGAME_FALLBACK_VALUE,
        };
        let edges: Vec<(Action, f64)> = legal.iter().map(|&a| (Action::new(a), priors[a])).collect();
        Ok((self.tree.push(Node::new(state, &edges)), value))
    }

    fn simulate(&mut self, root: NodeId) -> Result<(), SearchError> {
        let mut path: Vec<(NodeId, usize)> = Vec::new();
        let mut node = root;
        let value = loop {
            let n = self.tree.node(node);
            if n.terminal {
                let reward = n.reward.expect("terminal rewards are resolved on creation");
                self.tree.node_mut(node).visits += 1;
                self.stats.terminal_hits += 1;
                break reward;
            }
            let edge = select_edge(n, &self.config);
            path.push((node, edge));
            match n.edges[edge].child {
                Some(child) => node = child,
                None => {
                    let next = n.state.apply(n.edges[edge].action)?;
                    let (child, value) = self.create_node(next)?;
                    self.tree.node_mut(node).edges[edge].child = Some(child);
                    if self.tree.node(child).terminal {
                        self.stats.terminal_hits += 1;
                    }
                    break value;
                }
            }
        };
        self.stats.max_depth = self.stats.max_depth.max(path.len());
        backpropagate(&mut self.tree, &path, value);
        Ok(())
    }

    fn result(&self, root: NodeId) -> SearchResult {
        let node = self.tree.node(root);
        let p = node.state.spec().positions();
        let mut visits = vec![0u32; p];
        let mut q = vec![0.0; p];
        for e in &node.edges {
            visits[e.action.position] = e.stats.visits;
            q[e.action.position] = e.stats.q;
        }
        let action = choose_action(node, self.config.action_choice);
        let total: u32 = visits.iter().sum();
        let pi = if total == 0 {
            let mut one_hot = vec![0.0; p];
            one_hot[action.position] = 1.0;
            one_hot
        } else {
            visits.iter().map(|&n| f64::from(n) / f64::from(total)).collect()
        };
        SearchResult {
            visits,
            q,
            pi,
            action,
            stats: self.stats.clone(),
        }
    }
}

/// Arg-max of the chosen statistic over the root's edges, lowest position on
/// ties. Mean values only compete among visited edges; with nothing visited
/// the prior decides.
pub fn choose_action(node: &Node, choice: ActionChoice) -> Action {
    let visited = node.edges.iter().any(|e| e.stats.visits > 0);
    let key = |e: &super::tree::Edge| -> f64 {
        if !visited {
            return e.stats.prior;
        }
        match choice {
            ActionChoice::VisitCount => f64::from(e.stats.visits),
            ActionChoice::MeanValue if e.stats.visits == 0 => f64::NEG_INFINITY,
            ActionChoice::MeanValue => e.stats.q,
        }
    };
    let mut best = &node.edges[0];
    for e in &node.edges[1..] {
        if key(e) > key(best) {
            best = e;
        }
    }
    best.action
}

fn same_position(a: &GameState, b: &GameState) -> bool {
    a.turn() == b.turn() && a.assignment() == b.assignment() && a.order() == b.order()
}

/// Fresh-tree search from `root_state`.
pub fn run_search(
    root_state: &GameState,
    instance: &PuzzleInstance,
    evaluator: &dyn Evaluator,
    config: &SearchConfig,
) -> Result<SearchResult, SearchError> {
    SearchTree::new(instance, evaluator, *config)?.search(root_state)
}
