//! Turn-based stochastic mean-payoff games with alternating Min, Max and
//! Nature moves.

mod alternating;
mod brute;
mod generate;
mod oracle;
mod solve;

use std::collections::HashMap;
use std::fmt;

use num_rational::Ratio;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{Ext, ExtVec, Int};

pub use alternating::{AlternatingGame, AltEdge, AltState, Owner};
pub use brute::{brute_force_values, pair_gains, BruteForce, BruteForceError, PairGain, PAIR_BUDGET};
pub use generate::{random_game, RandomSpec};
pub use oracle::{ExactBigOracle, ExactOracle, RoundingOracle};
pub use solve::{
    bias_norm_bound, constant_value_call_budget, extract_strategies, graph_is_dominion, recession_eval,
    separation_bound, solve_constant_value, solve_full, solve_top_class, subgame, top_class_call_budget,
    verify_certificate, winner, winner_cap, ConstantValue, FullSolution, SolveError, TopClassResult, MAX_MU,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("expected \"type\": \"smpg\", found {0:?}")]
    WrongType(String),
    #[error("denominator must be at least 1")]
    Denominator,
    #[error("state id {0:?} declared twice")]
    DuplicateState(String),
    #[error("edge #{index} ({from} -> {to}): {reason}")]
    Edge { index: usize, from: String, to: String, reason: String },
    #[error("state {0:?} has no outgoing edge")]
    NoMove(String),
    #[error("nature state {id:?}: numerators sum to {sum}, expected {m}")]
    RowSum { id: String, sum: u64, m: u64 },
    #[error("game has no min state")]
    NoMinState,
    #[error("input has {got} coordinates, game has {want} min states")]
    Length { got: usize, want: usize },
}

/// Payoff magnitude accepted on input.
pub const MAX_PAYOFF: i64 = 1 << 40;
/// Largest accepted common denominator.
pub const MAX_DENOMINATOR: u64 = 1 << 20;

/// A validated game. Min states are the coordinates of the Shapley operator.
/// Adjacency lists are sorted by target index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StochasticGame {
    pub min_ids: Vec<String>,
    pub max_ids: Vec<String>,
    pub nat_ids: Vec<String>,
    /// `min_adj[j]` lists `(max state i, A_ij)`.
    pub min_adj: Vec<Vec<(usize, i64)>>,
    /// `max_adj[i]` lists `(nature state k, B_ik)`.
    pub max_adj: Vec<Vec<(usize, i64)>>,
    /// `nat_adj[k]` lists `(min state l, numerator of P_kl)`.
    pub nat_adj: Vec<Vec<(usize, u64)>>,
    pub denominator: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_num: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameFile {
    #[serde(rename = "type")]
    pub kind: String,
    pub min_states: Vec<String>,
    pub max_states: Vec<String>,
    pub nat_states: Vec<String>,
    pub edges: Vec<EdgeRecord>,
    pub denominator: u64,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Part {
    Min(usize),
    Max(usize),
    Nat(usize),
}

impl StochasticGame {
    pub fn from_json(text: &str) -> Result<Self, GameError> {
        let file: GameFile = serde_json::from_str(text).map_err(|e| GameError::Json(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn from_file(file: &GameFile) -> Result<Self, GameError> {
        if file.kind != "smpg" {
            return Err(GameError::WrongType(file.kind.clone()));
        }
        if file.denominator == 0 || file.denominator > MAX_DENOMINATOR {
            return Err(GameError::Denominator);
        }
        if file.min_states.is_empty() {
            return Err(GameError::NoMinState);
        }
        let mut index: HashMap<&str, Part> = HashMap::new();
        let parts = [
            (&file.min_states, Part::Min as fn(usize) -> Part),
            (&file.max_states, Part::Max as fn(usize) -> Part),
            (&file.nat_states, Part::Nat as fn(usize) -> Part),
        ];
        for (ids, mk) in parts {
            for (k, id) in ids.iter().enumerate() {
                if index.insert(id.as_str(), mk(k)).is_some() {
                    return Err(GameError::DuplicateState(id.clone()));
                }
            }
        }
        let m = file.denominator;
        let mut g = StochasticGame {
            min_ids: file.min_states.clone(),
            max_ids: file.max_states.clone(),
            nat_ids: file.nat_states.clone(),
            min_adj: vec![Vec::new(); file.min_states.len()],
            max_adj: vec![Vec::new(); file.max_states.len()],
            nat_adj: vec![Vec::new(); file.nat_states.len()],
            denominator: m,
        };
        let mut pending_p: Vec<(usize, usize, usize)> = Vec::new();
        for (idx, e) in file.edges.iter().enumerate() {
            let bad = |reason: &str| GameError::Edge {
                index: idx,
                from: e.from.clone(),
                to: e.to.clone(),
                reason: reason.to_string(),
            };
            let from = *index.get(e.from.as_str()).ok_or_else(|| bad("unknown source state"))?;
            let to = *index.get(e.to.as_str()).ok_or_else(|| bad("unknown target state"))?;
            match (from, to) {
                (Part::Min(j), Part::Max(i)) => {
                    if e.b.is_some() || e.p_num.is_some() {
                        return Err(bad("a min edge carries only \"a\""));
                    }
                    let a = e.a.unwrap_or(0);
                    if a.abs() > MAX_PAYOFF {
                        return Err(bad("payoff out of range"));
                    }
                    if g.min_adj[j].iter().any(|&(t, _)| t == i) {
                        return Err(bad("duplicate edge"));
                    }
                    g.min_adj[j].push((i, a));
                }
                (Part::Max(i), Part::Nat(k)) => {
                    if e.a.is_some() || e.p_num.is_some() {
                        return Err(bad("a max edge carries only \"b\""));
                    }
                    let b = e.b.unwrap_or(0);
                    if b.abs() > MAX_PAYOFF {
                        return Err(bad("payoff out of range"));
                    }
                    if g.max_adj[i].iter().any(|&(t, _)| t == k) {
                        return Err(bad("duplicate edge"));
                    }
                    g.max_adj[i].push((k, b));
                }
                (Part::Nat(k), Part::Min(l)) => {
                    if e.a.is_some() || e.b.is_some() {
                        return Err(bad("a nature edge carries only \"p_num\""));
                    }
                    if g.nat_adj[k].iter().any(|&(t, _)| t == l) {
                        return Err(bad("duplicate edge"));
                    }
                    match e.p_num {
                        Some(0) => return Err(bad("p_num must be positive")),
                        Some(p) => g.nat_adj[k].push((l, p)),
                        None => {
                            g.nat_adj[k].push((l, 0));
                            pending_p.push((k, l, idx));
                        }
                    }
                }
                _ => return Err(bad("edge breaks the min -> max -> nature -> min alternation")),
            }
        }
        for (k, l, idx) in pending_p {
            if g.nat_adj[k].len() != 1 {
                let e = &file.edges[idx];
                return Err(GameError::Edge {
                    index: idx,
                    from: e.from.clone(),
                    to: e.to.clone(),
                    reason: "p_num may be omitted only on the sole edge of a nature state".into(),
                });
            }
            g.nat_adj[k][0] = (l, m);
        }
        g.check_moves()?;
        g.sort();
        Ok(g)
    }

    fn check_moves(&self) -> Result<(), GameError> {
        for (j, a) in self.min_adj.iter().enumerate() {
            if a.is_empty() {
                return Err(GameError::NoMove(self.min_ids[j].clone()));
            }
        }
        for (i, a) in self.max_adj.iter().enumerate() {
            if a.is_empty() {
                return Err(GameError::NoMove(self.max_ids[i].clone()));
            }
        }
        for (k, a) in self.nat_adj.iter().enumerate() {
            if a.is_empty() {
                return Err(GameError::NoMove(self.nat_ids[k].clone()));
            }
            let sum: u64 = a.iter().map(|&(_, p)| p).sum();
            if sum != self.denominator {
                return Err(GameError::RowSum { id: self.nat_ids[k].clone(), sum, m: self.denominator });
            }
        }
        Ok(())
    }

    fn sort(&mut self) {
        self.min_adj.iter_mut().for_each(|a| a.sort_unstable());
        self.max_adj.iter_mut().for_each(|a| a.sort_unstable());
        self.nat_adj.iter_mut().for_each(|a| a.sort_unstable());
    }

    /// Validates a game built in code (same rules as parsing).
    pub fn validated(mut self) -> Result<Self, GameError> {
        if self.min_ids.is_empty() {
            return Err(GameError::NoMinState);
        }
        if self.denominator == 0 || self.denominator > MAX_DENOMINATOR {
            return Err(GameError::Denominator);
        }
        self.check_moves()?;
        self.sort();
        Ok(self)
    }

    pub fn to_file(&self) -> GameFile {
        let mut edges = Vec::new();
        for (j, adj) in self.min_adj.iter().enumerate() {
            for &(i, a) in adj {
                edges.push(EdgeRecord {
                    from: self.min_ids[j].clone(),
                    to: self.max_ids[i].clone(),
                    a: Some(a),
                    b: None,
                    p_num: None,
                });
            }
        }
        for (i, adj) in self.max_adj.iter().enumerate() {
            for &(k, b) in adj {
                edges.push(EdgeRecord {
                    from: self.max_ids[i].clone(),
                    to: self.nat_ids[k].clone(),
                    a: None,
                    b: Some(b),
                    p_num: None,
                });
            }
        }
        for (k, adj) in self.nat_adj.iter().enumerate() {
            for &(l, p) in adj {
                edges.push(EdgeRecord {
                    from: self.nat_ids[k].clone(),
                    to: self.min_ids[l].clone(),
                    a: None,
                    b: None,
                    p_num: Some(p),
                });
            }
        }
        GameFile {
            kind: "smpg".into(),
            min_states: self.min_ids.clone(),
            max_states: self.max_ids.clone(),
            nat_states: self.nat_ids.clone(),
            edges,
            denominator: self.denominator,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("game serializes")
    }

    pub fn n(&self) -> usize {
        self.min_ids.len()
    }

    pub fn stats(&self) -> GameStats {
        let mut w: u64 = 0;
        for adj in &self.min_adj {
            for &(i, a) in adj {
                for &(_, b) in &self.max_adj[i] {
                    w = w.max((a as i128 - b as i128).unsigned_abs() as u64);
                }
            }
        }
        let s = self.nat_adj.iter().filter(|a| a.len() >= 2).count();
        GameStats::new(self.n(), self.denominator, w, s)
    }

    /// `Σ_l P_kl x_l` with `0·(−∞) = 0`; −∞ as soon as a positive-probability
    /// successor is −∞.
    pub fn nature_value<I: Int>(&self, k: usize, x: &ExtVec<I>) -> Ext<I> {
        let m = I::from_u64(self.denominator).expect("denominator fits");
        let mut acc = Ratio::<I>::zero();
        for &(l, p) in &self.nat_adj[k] {
            match &x.0[l] {
                Ext::NegInf => return Ext::NegInf,
                Ext::Fin(v) => acc = acc + v * Ratio::from_integer(I::from_u64(p).expect("numerator fits")),
            }
        }
        Ext::Fin(acc / Ratio::from_integer(m))
    }

    /// `max_k (B_ik + Σ_l P_kl x_l)`.
    pub fn max_value<I: Int>(&self, i: usize, x: &ExtVec<I>) -> Ext<I> {
        self.max_adj[i]
            .iter()
            .map(|&(k, b)| self.nature_value(k, x).add_fin(&Ratio::from_integer(int::<I>(b))))
            .max()
            .expect("max state has a move")
    }

    /// The Shapley operator, evaluated exactly.
    pub fn shapley_eval<I: Int>(&self, x: &ExtVec<I>) -> Result<ExtVec<I>, GameError> {
        if x.len() != self.n() {
            return Err(GameError::Length { got: x.len(), want: self.n() });
        }
        Ok(self.eval_unchecked(x))
    }

    pub(crate) fn eval_unchecked<I: Int>(&self, x: &ExtVec<I>) -> ExtVec<I> {
        let maxv: Vec<Ext<I>> = (0..self.max_ids.len()).map(|i| self.max_value(i, x)).collect();
        ExtVec(
            self.min_adj
                .iter()
                .map(|adj| {
                    adj.iter()
                        .map(|&(i, a)| maxv[i].add_fin(&Ratio::from_integer(int::<I>(-a))))
                        .min()
                        .expect("min state has a move")
                })
                .collect(),
        )
    }

    /// The operator of the game with `sigma` and/or `tau` frozen.
    pub fn eval_fixed<I: Int>(&self, x: &ExtVec<I>, sigma: Option<&[usize]>, tau: Option<&[usize]>) -> ExtVec<I> {
        let maxv = |i: usize| -> Ext<I> {
            match tau {
                Some(t) => {
                    let k = t[i];
                    let b = self.max_adj[i].iter().find(|e| e.0 == k).expect("tau along an edge").1;
                    self.nature_value(k, x).add_fin(&Ratio::from_integer(int::<I>(b)))
                }
                None => self.max_value(i, x),
            }
        };
        ExtVec(
            (0..self.n())
                .map(|j| match sigma {
                    Some(s) => {
                        let i = s[j];
                        let a = self.min_adj[j].iter().find(|e| e.0 == i).expect("sigma along an edge").1;
                        maxv(i).add_fin(&Ratio::from_integer(int::<I>(-a)))
                    }
                    None => self.min_adj[j]
                        .iter()
                        .map(|&(i, a)| maxv(i).add_fin(&Ratio::from_integer(int::<I>(-a))))
                        .min()
                        .expect("min state has a move"),
                })
                .collect(),
        )
    }

    /// Checks that a strategy pair follows edges.
    pub fn check_strategies(&self, s: &StrategyPair) -> bool {
        s.sigma.len() == self.n()
            && s.tau.len() == self.max_ids.len()
            && s.sigma.iter().enumerate().all(|(j, &i)| self.min_adj[j].iter().any(|e| e.0 == i))
            && s.tau.iter().enumerate().all(|(i, &k)| self.max_adj[i].iter().any(|e| e.0 == k))
    }
}

pub(crate) fn int<I: Int>(v: i64) -> I {
    I::from_i64(v).expect("payoff fits")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameStats {
    pub n: usize,
    pub m: u64,
    pub w: u64,
    pub s: usize,
    /// `n · M^min{s, n−1}`; `None` when it exceeds 128 bits.
    pub mu: Option<i128>,
}

impl GameStats {
    pub fn new(n: usize, m: u64, w: u64, s: usize) -> Self {
        let mut st = GameStats { n, m, w, s, mu: None };
        st.mu = st.m_pow(1).and_then(|p| p.checked_mul(n as i128));
        st
    }

    /// `min{s, n−1}`.
    pub fn exponent(&self) -> u32 {
        self.s.min(self.n.saturating_sub(1)) as u32
    }

    /// `M^(k·min{s, n−1})`.
    pub fn m_pow(&self, k: u32) -> Option<i128> {
        (self.m as i128).checked_pow(self.exponent().checked_mul(k)?)
    }
}

/// Positional strategies: `sigma[j]` is a Max state, `tau[i]` a Nature state.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StrategyPair {
    pub sigma: Vec<usize>,
    pub tau: Vec<usize>,
}

impl fmt::Display for StrategyPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sigma={:?} tau={:?}", self.sigma, self.tau)
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    type V = ExtVec<i128>;

    #[test]
    fn cycle_operator() {
        let g = cycle(0, 2);
        assert_eq!(g.shapley_eval(&V::from_ints(&[5])).unwrap(), V::from_ints(&[7]));
        assert!(g.shapley_eval(&V::zeros(2)).is_err());
    }

    #[test]
    fn max_takes_the_larger_payment() {
        let g = parse(
            r#"{"type":"smpg","min_states":["j"],"max_states":["i"],"nat_states":["k1","k2"],
            "edges":[{"from":"j","to":"i"},{"from":"i","to":"k1","b":1},{"from":"i","to":"k2","b":3},
                     {"from":"k1","to":"j"},{"from":"k2","to":"j"}],"denominator":1}"#,
        );
        assert_eq!(g.shapley_eval(&V::from_ints(&[0])).unwrap(), V::from_ints(&[3]));
    }

    #[test]
    fn nature_and_neg_inf() {
        let g = half_half();
        let x: V = ExtVec(vec![Ext::zero(), Ext::NegInf]);
        assert_eq!(g.shapley_eval(&x).unwrap(), ExtVec(vec![Ext::NegInf, Ext::NegInf]));
        let x: V = ExtVec(vec![Ext::int(4), Ext::int(2)]);
        assert_eq!(g.shapley_eval(&x).unwrap(), ExtVec(vec![Ext::int(4), Ext::int(5)]));
        // Degenerate row: the −∞ coordinate it ignores does not matter.
        let g = cycle(0, 2);
        let g2 = StochasticGame { min_ids: vec!["j".into(), "z".into()], ..g.clone() };
        let mut g2 = g2;
        g2.min_adj.push(vec![(0, 0)]);
        let g2 = g2.validated().unwrap();
        let y = g2.shapley_eval::<i128>(&ExtVec(vec![Ext::zero(), Ext::NegInf])).unwrap();
        assert_eq!(y[0], Ext::int(2));
    }

    #[test]
    fn stats_examples() {
        let st = half_half().stats();
        assert_eq!((st.n, st.m, st.w, st.s, st.mu), (2, 2, 2, 1, Some(4)));
        assert_eq!(cycle(3, 2).stats().w, 1);
        assert_eq!(GameStats::new(2, 3, 1, 5).mu, Some(6));
    }

    #[test]
    fn json_round_trip() {
        for g in [cycle(0, 2), min_choice(), half_half(), absorbing(), three_state()] {
            assert_eq!(StochasticGame::from_json(&g.to_json()).unwrap(), g);
        }
    }

    fn err(s: &str) -> GameError {
        StochasticGame::from_json(s).unwrap_err()
    }

    #[test]
    fn validation_names_the_record() {
        let base = |edges: &str, m: u64| {
            format!(
                r#"{{"type":"smpg","min_states":["j"],"max_states":["i"],"nat_states":["k"],"edges":[{edges}],"denominator":{m}}}"#
            )
        };
        let ok = r#"{"from":"j","to":"i"},{"from":"i","to":"k"},{"from":"k","to":"j"}"#;
        assert!(StochasticGame::from_json(&base(ok, 1)).is_ok());
        match err(&base(r#"{"from":"j","to":"i"},{"from":"i","to":"j"},{"from":"k","to":"j"}"#, 1)) {
            GameError::Edge { index, from, to, .. } => assert_eq!((index, from.as_str(), to.as_str()), (1, "i", "j")),
            e => panic!("{e}"),
        }
        assert!(matches!(
            err(&base(r#"{"from":"j","to":"i"},{"from":"i","to":"k"},{"from":"k","to":"x"}"#, 1)),
            GameError::Edge { index: 2, .. }
        ));
        assert!(matches!(
            err(&base(r#"{"from":"j","to":"i"},{"from":"i","to":"k"},{"from":"k","to":"j","p_num":1}"#, 2)),
            GameError::RowSum { .. }
        ));
        assert!(matches!(err(&base(r#"{"from":"j","to":"i"},{"from":"i","to":"k"}"#, 1)), GameError::NoMove(_)));
        assert!(matches!(err(&base(ok, 0)), GameError::Denominator));
        assert!(matches!(err("{"), GameError::Json(_)));
    }
}
