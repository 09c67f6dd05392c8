//! Games where each state belongs to one of Min, Max or Nature and any owner
//! may follow any other. Converted to the alternating form by giving every
//! original move a full Min/Max/Nature turn, padded with dummy states.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{GameError, StochasticGame, MAX_PAYOFF};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Owner {
    Min,
    Max,
    Nat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AltState {
    pub id: String,
    pub owner: Owner,
}

/// `r` is paid by Min to Max when the move is taken.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AltEdge {
    pub from: String,
    pub to: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_num: Option<u64>,
}

/// File form, `"type": "smpg-alt"`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlternatingGame {
    #[serde(rename = "type")]
    pub kind: String,
    pub states: Vec<AltState>,
    pub edges: Vec<AltEdge>,
    pub denominator: u64,
}

impl AlternatingGame {
    pub fn from_json(text: &str) -> Result<Self, GameError> {
        let g: AlternatingGame = serde_json::from_str(text).map_err(|e| GameError::Json(e.to_string()))?;
        if g.kind != "smpg-alt" {
            return Err(GameError::WrongType(g.kind));
        }
        Ok(g)
    }

    /// Per original state `v`: a Min copy `v`, and for Max or Nature states
    /// a Max copy `v/max`; for Nature states a Nature copy `v/nat`; and for
    /// every state a pass-through pair `v/in-max`, `v/in-nat` used to enter
    /// `v` after a Min or Max move. One original move takes one turn, so
    /// mean payoffs per turn equal mean payoffs per original move. The Min
    /// copy of `v` carries the value of `v`.
    pub fn convert(&self) -> Result<StochasticGame, GameError> {
        if self.denominator == 0 {
            return Err(GameError::Denominator);
        }
        if self.states.is_empty() {
            return Err(GameError::NoMinState);
        }
        let mut index: HashMap<&str, usize> = HashMap::new();
        for (v, s) in self.states.iter().enumerate() {
            if index.insert(s.id.as_str(), v).is_some() {
                return Err(GameError::DuplicateState(s.id.clone()));
            }
        }
        let n = self.states.len();
        let mut out: Vec<Vec<(usize, i64, u64)>> = vec![Vec::new(); n];
        for (idx, e) in self.edges.iter().enumerate() {
            let bad = |reason: &str| GameError::Edge {
                index: idx,
                from: e.from.clone(),
                to: e.to.clone(),
                reason: reason.to_string(),
            };
            let v = *index.get(e.from.as_str()).ok_or_else(|| bad("unknown source state"))?;
            let w = *index.get(e.to.as_str()).ok_or_else(|| bad("unknown target state"))?;
            let r = e.r.unwrap_or(0);
            if r.abs() > MAX_PAYOFF {
                return Err(bad("payoff out of range"));
            }
            match self.states[v].owner {
                Owner::Nat => {
                    if r != 0 {
                        return Err(bad("nature moves carry no payoff"));
                    }
                    match e.p_num {
                        Some(0) => return Err(bad("p_num must be positive")),
                        Some(p) => out[v].push((w, 0, p)),
                        None => out[v].push((w, 0, 0)),
                    }
                }
                _ => {
                    if e.p_num.is_some() {
                        return Err(bad("p_num on a player move"));
                    }
                    out[v].push((w, r, 0));
                }
            }
            if out[v].iter().filter(|x| x.0 == w).count() > 1 {
                return Err(bad("duplicate edge"));
            }
        }
        for (v, o) in out.iter_mut().enumerate() {
            if self.states[v].owner == Owner::Nat && o.len() == 1 && o[0].2 == 0 {
                o[0].2 = self.denominator;
            }
        }

        let min_ids: Vec<String> = self.states.iter().map(|s| s.id.clone()).collect();
        let mut max_ids = Vec::new();
        let mut nat_ids = Vec::new();
        let mut min_adj: Vec<Vec<(usize, i64)>> = vec![Vec::new(); n];
        let mut max_adj: Vec<Vec<(usize, i64)>> = Vec::new();
        let mut nat_adj: Vec<Vec<(usize, u64)>> = Vec::new();
        let new_max = |id: String, max_ids: &mut Vec<String>, max_adj: &mut Vec<Vec<(usize, i64)>>| {
            max_ids.push(id);
            max_adj.push(Vec::new());
            max_ids.len() - 1
        };
        // Entering v after a Min move: v/in-max -> v/in-nat -> v.
        // Entering v after a Max move: v/in-nat -> v.
        let mut in_nat = Vec::with_capacity(n);
        let mut in_max = Vec::with_capacity(n);
        for (v, s) in self.states.iter().enumerate() {
            nat_ids.push(format!("{}/in-nat", s.id));
            nat_adj.push(vec![(v, self.denominator)]);
            in_nat.push(nat_ids.len() - 1);
            let i = new_max(format!("{}/in-max", s.id), &mut max_ids, &mut max_adj);
            max_adj[i].push((in_nat[v], 0));
            in_max.push(i);
        }
        for (v, s) in self.states.iter().enumerate() {
            match s.owner {
                Owner::Min => {
                    for &(w, r, _) in &out[v] {
                        min_adj[v].push((in_max[w], -r));
                    }
                }
                Owner::Max => {
                    let i = new_max(format!("{}/max", s.id), &mut max_ids, &mut max_adj);
                    min_adj[v].push((i, 0));
                    for &(w, r, _) in &out[v] {
                        max_adj[i].push((in_nat[w], r));
                    }
                }
                Owner::Nat => {
                    let i = new_max(format!("{}/max", s.id), &mut max_ids, &mut max_adj);
                    min_adj[v].push((i, 0));
                    nat_ids.push(format!("{}/nat", s.id));
                    nat_adj.push(out[v].iter().map(|&(w, _, p)| (w, p)).collect());
                    max_adj[i].push((nat_ids.len() - 1, 0));
                }
            }
        }
        StochasticGame { min_ids, max_ids, nat_ids, min_adj, max_adj, nat_adj, denominator: self.denominator }
            .validated()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stochastic::brute_force_values;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn convert_and_value() {
        // Max at "a" chooses between staying (reward 1) and moving to the
        // coin "c"; the coin goes to "m" (Min, loops paying 3 or goes back
        // to "a" paying 0) or stays at "a".
        let g = AlternatingGame::from_json(
            r#"{"type":"smpg-alt","states":[{"id":"a","owner":"max"},{"id":"c","owner":"nat"},{"id":"m","owner":"min"}],
            "edges":[{"from":"a","to":"a","r":1},{"from":"a","to":"c","r":4},
                     {"from":"c","to":"m","p_num":1},{"from":"c","to":"a","p_num":1},
                     {"from":"m","to":"m","r":3},{"from":"m","to":"a","r":0}],
            "denominator":2}"#,
        )
        .unwrap();
        let s = g.convert().unwrap();
        assert_eq!(s.n(), 3);
        let bf = brute_force_values(&s, None, None).unwrap();
        // Cycle a -> c -> (a | m -> a): per move (4 + 0 + 1/2·0)/(2 + 1/2).
        // The cycle a -> c -> a / a -> c -> m -> a averages 4/(5/2) = 8/5 > 1.
        assert_eq!(bf.chi, vec![q(8, 5), q(8, 5), q(8, 5)]);
    }

    #[test]
    fn conversion_errors() {
        let bad = AlternatingGame::from_json(
            r#"{"type":"smpg-alt","states":[{"id":"c","owner":"nat"}],
            "edges":[{"from":"c","to":"c","r":2}],"denominator":1}"#,
        )
        .unwrap();
        assert!(matches!(bad.convert(), Err(GameError::Edge { index: 0, .. })));
        assert!(AlternatingGame::from_json(r#"{"type":"smpg","states":[],"edges":[],"denominator":1}"#).is_err());
    }
}
