//! Entropy games between Despot, Tribune and People.
//!
//! Despot states are the coordinates. From a Despot state the play moves to
//! a Tribune state, then to a People state, then to a Despot state along an
//! edge with integer multiplicity. Despot minimizes and Tribune maximizes
//! the growth rate of the weighted number of People paths.

mod alternating;
mod brute;
mod generate;
mod oracle;
mod params;
mod solve;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{Ext, ExtVec, Int};
use crate::perron::Matrix;
pub use crate::stochastic::StrategyPair;

pub use alternating::{AlternatingEntropyGame, AlternatingTransition};
pub use brute::{brute_force_entropy_values, pair_value, EntropyBrute, EntropyBruteError, ENTROPY_PAIR_BUDGET};
pub use generate::{random_entropy_game, EntropySpec};
pub use oracle::{eval_bounds, verify_log_certificate, LogOracle};
pub use params::{
    certified_params, cw_norm_bound, log2_upper, nu_bound, rank_profile, theoretical_params, EntropyParams,
    ParamError, ParamSource, RankProfile, E_UPPER,
};
pub use solve::{solve_entropy_game, EntropyBlock, EntropySolution, EntropySolveError, ParamRequest};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EntropyError {
    #[error("invalid JSON: {0}")]
    Json(String),
    #[error("expected \"type\": \"entropy\", found {0:?}")]
    WrongType(String),
    #[error("state id {0:?} declared twice")]
    DuplicateState(String),
    #[error("edge #{index} ({from} -> {to}): {reason}")]
    Edge { index: usize, from: String, to: String, reason: String },
    #[error("state {0:?} has no outgoing edge")]
    NoMove(String),
    #[error("game has no Despot state")]
    NoDespot,
    #[error("input has {got} coordinates, game has {want} Despot states")]
    Length { got: usize, want: usize },
    #[error("input coordinate {0} is not positive")]
    NonPositive(usize),
    #[error("strategy pair does not follow the edges of the game")]
    Strategy,
}

/// Largest multiplicity accepted on input.
pub const MAX_MULTIPLICITY: u64 = 1 << 20;

/// A validated game. Adjacency lists are sorted by target index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntropyGame {
    pub d_ids: Vec<String>,
    pub t_ids: Vec<String>,
    pub p_ids: Vec<String>,
    /// Tribune successors of each Despot state.
    pub d_adj: Vec<Vec<usize>>,
    /// People successors of each Tribune state.
    pub t_adj: Vec<Vec<usize>>,
    /// `(Despot state, multiplicity)` successors of each People state.
    pub p_adj: Vec<Vec<(usize, u64)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyEdge {
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntropyFile {
    #[serde(rename = "type")]
    pub kind: String,
    pub d_states: Vec<String>,
    pub t_states: Vec<String>,
    pub p_states: Vec<String>,
    pub edges: Vec<EntropyEdge>,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Part {
    D(usize),
    T(usize),
    P(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntropyStats {
    pub n: usize,
    pub t: usize,
    pub p: usize,
    pub w: u64,
}

/// Index maps of an induced subgame back to the parent game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Embedding {
    pub d: Vec<usize>,
    pub t: Vec<usize>,
    pub p: Vec<usize>,
}

impl EntropyGame {
    pub fn from_json(text: &str) -> Result<Self, EntropyError> {
        let file: EntropyFile = serde_json::from_str(text).map_err(|e| EntropyError::Json(e.to_string()))?;
        Self::from_file(&file)
    }

    pub fn from_file(file: &EntropyFile) -> Result<Self, EntropyError> {
        if file.kind != "entropy" {
            return Err(EntropyError::WrongType(file.kind.clone()));
        }
        let mut index: HashMap<&str, Part> = HashMap::new();
        let parts = [
            (&file.d_states, Part::D as fn(usize) -> Part),
            (&file.t_states, Part::T as fn(usize) -> Part),
            (&file.p_states, Part::P as fn(usize) -> Part),
        ];
        for (ids, mk) in parts {
            for (k, id) in ids.iter().enumerate() {
                if index.insert(id.as_str(), mk(k)).is_some() {
                    return Err(EntropyError::DuplicateState(id.clone()));
                }
            }
        }
        let mut g = EntropyGame {
            d_ids: file.d_states.clone(),
            t_ids: file.t_states.clone(),
            p_ids: file.p_states.clone(),
            d_adj: vec![Vec::new(); file.d_states.len()],
            t_adj: vec![Vec::new(); file.t_states.len()],
            p_adj: vec![Vec::new(); file.p_states.len()],
        };
        for (i, e) in file.edges.iter().enumerate() {
            let bad = |reason: &str| EntropyError::Edge {
                index: i,
                from: e.from.clone(),
                to: e.to.clone(),
                reason: reason.to_string(),
            };
            let from = *index.get(e.from.as_str()).ok_or_else(|| bad("unknown source state"))?;
            let to = *index.get(e.to.as_str()).ok_or_else(|| bad("unknown target state"))?;
            match (from, to) {
                (Part::D(a), Part::T(b)) => {
                    if e.m.is_some() {
                        return Err(bad("multiplicity only allowed on People -> Despot edges"));
                    }
                    if g.d_adj[a].contains(&b) {
                        return Err(bad("duplicate edge"));
                    }
                    g.d_adj[a].push(b);
                }
                (Part::T(a), Part::P(b)) => {
                    if e.m.is_some() {
                        return Err(bad("multiplicity only allowed on People -> Despot edges"));
                    }
                    if g.t_adj[a].contains(&b) {
                        return Err(bad("duplicate edge"));
                    }
                    g.t_adj[a].push(b);
                }
                (Part::P(a), Part::D(b)) => {
                    let m = e.m.unwrap_or(1);
                    if m == 0 || m > MAX_MULTIPLICITY {
                        return Err(bad("multiplicity must be a positive integer"));
                    }
                    if g.p_adj[a].iter().any(|x| x.0 == b) {
                        return Err(bad("duplicate edge"));
                    }
                    g.p_adj[a].push((b, m));
                }
                _ => return Err(bad("edges must go Despot -> Tribune -> People -> Despot")),
            }
        }
        g.validated()
    }

    /// Sorts adjacency lists and checks that every state can move.
    pub fn validated(mut self) -> Result<Self, EntropyError> {
        if self.d_ids.is_empty() {
            return Err(EntropyError::NoDespot);
        }
        for a in self.d_adj.iter_mut().chain(self.t_adj.iter_mut()) {
            a.sort_unstable();
        }
        for a in self.p_adj.iter_mut() {
            a.sort_unstable();
        }
        let empty = |adj: &[Vec<usize>], ids: &[String]| {
            adj.iter().position(|a| a.is_empty()).map(|i| EntropyError::NoMove(ids[i].clone()))
        };
        if let Some(e) = empty(&self.d_adj, &self.d_ids).or_else(|| empty(&self.t_adj, &self.t_ids)) {
            return Err(e);
        }
        if let Some(i) = self.p_adj.iter().position(|a| a.is_empty()) {
            return Err(EntropyError::NoMove(self.p_ids[i].clone()));
        }
        Ok(self)
    }

    pub fn to_file(&self) -> EntropyFile {
        let mut edges = Vec::new();
        for (a, adj) in self.d_adj.iter().enumerate() {
            for &b in adj {
                edges.push(EntropyEdge { from: self.d_ids[a].clone(), to: self.t_ids[b].clone(), m: None });
            }
        }
        for (a, adj) in self.t_adj.iter().enumerate() {
            for &b in adj {
                edges.push(EntropyEdge { from: self.t_ids[a].clone(), to: self.p_ids[b].clone(), m: None });
            }
        }
        for (a, adj) in self.p_adj.iter().enumerate() {
            for &(b, m) in adj {
                edges.push(EntropyEdge {
                    from: self.p_ids[a].clone(),
                    to: self.d_ids[b].clone(),
                    m: (m != 1).then_some(m),
                });
            }
        }
        EntropyFile {
            kind: "entropy".into(),
            d_states: self.d_ids.clone(),
            t_states: self.t_ids.clone(),
            p_states: self.p_ids.clone(),
            edges,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }

    pub fn n(&self) -> usize {
        self.d_ids.len()
    }

    /// Largest multiplicity.
    pub fn w(&self) -> u64 {
        self.p_adj.iter().flatten().map(|e| e.1).max().unwrap_or(1)
    }

    pub fn stats(&self) -> EntropyStats {
        EntropyStats { n: self.n(), t: self.t_ids.len(), p: self.p_ids.len(), w: self.w() }
    }

    /// `Σ_l m_pl x_l`.
    pub fn people_sum(&self, p: usize, x: &[BigRational]) -> BigRational {
        self.p_adj[p].iter().map(|&(l, m)| &x[l] * BigInt::from(m)).sum()
    }

    /// `T_d(x) = min_t max_p Σ_l m_pl x_l` for a positive vector.
    pub fn multiplicative_eval(&self, x: &[BigRational]) -> Result<Vec<BigRational>, EntropyError> {
        if x.len() != self.n() {
            return Err(EntropyError::Length { got: x.len(), want: self.n() });
        }
        if let Some(i) = x.iter().position(|v| !v.is_positive()) {
            return Err(EntropyError::NonPositive(i));
        }
        let people: Vec<BigRational> = (0..self.p_ids.len()).map(|p| self.people_sum(p, x)).collect();
        let tribune: Vec<&BigRational> =
            self.t_adj.iter().map(|adj| adj.iter().map(|&p| &people[p]).max().expect("nonempty")).collect();
        Ok(self.d_adj.iter().map(|adj| adj.iter().map(|&t| tribune[t]).min().expect("nonempty").clone()).collect())
    }

    /// `F̂_d(x) = min_t max_p max_l x_l`.
    pub fn recession_eval<I: Int>(&self, x: &ExtVec<I>) -> ExtVec<I> {
        assert_eq!(x.len(), self.n(), "recession input length");
        let people: Vec<Ext<I>> = self
            .p_adj
            .iter()
            .map(|adj| adj.iter().map(|&(l, _)| x[l].clone()).reduce(|a, b| Ext::max_of(&a, &b)).expect("nonempty"))
            .collect();
        let tribune: Vec<Ext<I>> = self
            .t_adj
            .iter()
            .map(|adj| adj.iter().map(|&p| people[p].clone()).reduce(|a, b| Ext::max_of(&a, &b)).expect("nonempty"))
            .collect();
        ExtVec(
            self.d_adj
                .iter()
                .map(|adj| {
                    adj.iter().map(|&t| tribune[t].clone()).reduce(|a, b| Ext::min_of(&a, &b)).expect("nonempty")
                })
                .collect(),
        )
    }

    /// `sigma[d]` is a Tribune state, `tau[t]` a People state.
    pub fn check_strategies(&self, s: &StrategyPair) -> bool {
        s.sigma.len() == self.n()
            && s.tau.len() == self.t_ids.len()
            && s.sigma.iter().enumerate().all(|(d, t)| self.d_adj[d].contains(t))
            && s.tau.iter().enumerate().all(|(t, p)| self.t_adj[t].contains(p))
    }

    /// `M_kl = m_{τ(σ(k)) l}`, zero without an edge.
    pub fn ambiguity_matrix(&self, s: &StrategyPair) -> Result<Matrix, EntropyError> {
        if !self.check_strategies(s) {
            return Err(EntropyError::Strategy);
        }
        let n = self.n();
        Ok((0..n)
            .map(|k| {
                let mut row = vec![0i64; n];
                for &(l, m) in &self.p_adj[s.tau[s.sigma[k]]] {
                    row[l] = m as i64;
                }
                row
            })
            .collect())
    }

    /// People states with an edge into `set`, as a mask.
    pub fn people_into(&self, set: &[usize]) -> Vec<bool> {
        let inside = mask(set, self.n());
        self.p_adj.iter().map(|adj| adj.iter().any(|&(l, _)| inside[l])).collect()
    }

    /// Tribune states with an edge to a People state with an edge into `set`.
    pub fn tribune_into(&self, set: &[usize]) -> Vec<bool> {
        let vp = self.people_into(set);
        self.t_adj.iter().map(|adj| adj.iter().any(|&p| vp[p])).collect()
    }

    /// Every Tribune successor of `set` reaches `set` in one People step.
    pub fn graph_is_dominion(&self, set: &[usize]) -> bool {
        if set.is_empty() || set.iter().any(|&d| d >= self.n()) {
            return false;
        }
        let vt = self.tribune_into(set);
        set.iter().all(|&d| self.d_adj[d].iter().all(|&t| vt[t]))
    }

    /// Subgame on kept states, with edges restricted to kept targets.
    pub fn induced(&self, d: &[bool], t: &[bool], p: &[bool]) -> Result<(EntropyGame, Embedding), EntropyError> {
        let keep = |m: &[bool]| (0..m.len()).filter(|&i| m[i]).collect::<Vec<_>>();
        let emb = Embedding { d: keep(d), t: keep(t), p: keep(p) };
        let local = |e: &[usize], n: usize| {
            let mut v = vec![usize::MAX; n];
            for (k, &i) in e.iter().enumerate() {
                v[i] = k;
            }
            v
        };
        let (ld, lt, lp) = (local(&emb.d, d.len()), local(&emb.t, t.len()), local(&emb.p, p.len()));
        let g = EntropyGame {
            d_ids: emb.d.iter().map(|&i| self.d_ids[i].clone()).collect(),
            t_ids: emb.t.iter().map(|&i| self.t_ids[i].clone()).collect(),
            p_ids: emb.p.iter().map(|&i| self.p_ids[i].clone()).collect(),
            d_adj: emb.d.iter().map(|&i| self.d_adj[i].iter().filter(|&&x| t[x]).map(|&x| lt[x]).collect()).collect(),
            t_adj: emb.t.iter().map(|&i| self.t_adj[i].iter().filter(|&&x| p[x]).map(|&x| lp[x]).collect()).collect(),
            p_adj: emb
                .p
                .iter()
                .map(|&i| self.p_adj[i].iter().filter(|e| d[e.0]).map(|&(x, m)| (ld[x], m)).collect())
                .collect(),
        }
        .validated()?;
        Ok((g, emb))
    }

    /// The game on a dominion `set`: its Despot states, the Tribune and
    /// People states that can stay in it, and only the edges that stay.
    pub fn subgame(&self, set: &[usize]) -> Result<(EntropyGame, Embedding), EntropyError> {
        self.induced(&mask(set, self.n()), &self.tribune_into(set), &self.people_into(set))
    }

    /// The game left once a top class `set` and the Tribune and People
    /// states that can reach it are removed.
    pub fn remainder(&self, set: &[usize]) -> Result<(EntropyGame, Embedding), EntropyError> {
        let not = |m: Vec<bool>| m.into_iter().map(|b| !b).collect::<Vec<_>>();
        self.induced(&not(mask(set, self.n())), &not(self.tribune_into(set)), &not(self.people_into(set)))
    }

    /// Number of positional strategies of each player, saturating.
    pub fn strategy_counts(&self) -> (u128, u128) {
        let prod = |adj: &[Vec<usize>]| adj.iter().fold(1u128, |a, v| a.saturating_mul(v.len() as u128));
        (prod(&self.d_adj), prod(&self.t_adj))
    }

    /// Iterates of `T` from `𝟏`.
    pub fn horizon_values(&self, k: usize) -> Vec<BigRational> {
        let mut x = vec![BigRational::from_integer(BigInt::from(1)); self.n()];
        for _ in 0..k {
            x = self.multiplicative_eval(&x).expect("positive iterates");
        }
        x
    }
}

pub(crate) fn mask(set: &[usize], n: usize) -> Vec<bool> {
    let mut m = vec![false; n];
    for &i in set {
        m[i] = true;
    }
    m
}

/// Mixed-radix decoding of a strategy index.
pub(crate) fn decode(opts: &[Vec<usize>], mut idx: u128) -> Vec<usize> {
    opts.iter()
        .map(|o| {
            let len = o.len() as u128;
            let c = o[(idx % len) as usize];
            idx /= len;
            c
        })
        .collect()
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn parse(s: &str) -> EntropyGame {
        EntropyGame::from_json(s).unwrap()
    }

    /// `d → t → p → d` with multiplicity `m`.
    pub fn single_loop(m: u64) -> EntropyGame {
        parse(&format!(
            r#"{{"type":"entropy","d_states":["d"],"t_states":["t"],"p_states":["p"],
            "edges":[{{"from":"d","to":"t"}},{{"from":"t","to":"p"}},{{"from":"p","to":"d","m":{m}}}]}}"#
        ))
    }

    /// One Despot state whose single Tribune state chooses a self-loop of
    /// multiplicity 2 or 3.
    pub fn tribune_choice() -> EntropyGame {
        parse(
            r#"{"type":"entropy","d_states":["d"],"t_states":["t"],"p_states":["p2","p3"],
            "edges":[{"from":"d","to":"t"},{"from":"t","to":"p2"},{"from":"t","to":"p3"},
            {"from":"p2","to":"d","m":2},{"from":"p3","to":"d","m":3}]}"#,
        )
    }

    /// Despot chooses between Tribune states leading to loops 2 and 3.
    pub fn despot_choice() -> EntropyGame {
        parse(
            r#"{"type":"entropy","d_states":["d"],"t_states":["t2","t3"],"p_states":["p2","p3"],
            "edges":[{"from":"d","to":"t2"},{"from":"d","to":"t3"},{"from":"t2","to":"p2"},{"from":"t3","to":"p3"},
            {"from":"p2","to":"d","m":2},{"from":"p3","to":"d","m":3}]}"#,
        )
    }

    /// Two Despot states: `a` loops with weight 2, `b` loops with weight 3 or
    /// moves to `a`, at Tribune's choice; `c` may only go to `b`.
    pub fn two_blocks() -> EntropyGame {
        parse(
            r#"{"type":"entropy","d_states":["a","b","c"],"t_states":["ta","tb","tc"],
            "p_states":["pa","pb","pba","pc"],
            "edges":[{"from":"a","to":"ta"},{"from":"b","to":"tb"},{"from":"c","to":"tc"},
            {"from":"ta","to":"pa"},{"from":"tb","to":"pb"},{"from":"tb","to":"pba"},{"from":"tc","to":"pc"},
            {"from":"pa","to":"a","m":2},{"from":"pb","to":"b","m":3},{"from":"pba","to":"a"},
            {"from":"pc","to":"b"},{"from":"pc","to":"c"}]}"#,
        )
    }

    /// Two Despot states sharing one People state with successors `(1,1)`.
    pub fn all_ones() -> EntropyGame {
        parse(
            r#"{"type":"entropy","d_states":["x","y"],"t_states":["t"],"p_states":["p"],
            "edges":[{"from":"x","to":"t"},{"from":"y","to":"t"},{"from":"t","to":"p"},
            {"from":"p","to":"x"},{"from":"p","to":"y"}]}"#,
        )
    }
}
