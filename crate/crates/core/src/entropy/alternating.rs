//! Converter from the alternating Despot/Tribune model in which People
//! pick among the targets of each move. Every move becomes a Tribune state
//! followed by a People state, and each Tribune position of the source model
//! becomes a Despot state with a single move, so one source round takes two
//! rounds here.

use std::collections::HashMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::{EntropyError, EntropyGame};
use crate::numeric::RationalInterval;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlternatingTransition {
    pub from: String,
    pub action: String,
    pub to: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlternatingEntropyGame {
    #[serde(rename = "type")]
    pub kind: String,
    pub despot: Vec<String>,
    pub tribune: Vec<String>,
    pub transitions: Vec<AlternatingTransition>,
}

impl AlternatingEntropyGame {
    pub fn from_json(text: &str) -> Result<Self, EntropyError> {
        let g: AlternatingEntropyGame = serde_json::from_str(text).map_err(|e| EntropyError::Json(e.to_string()))?;
        if g.kind != "entropy-alt" {
            return Err(EntropyError::WrongType(g.kind));
        }
        Ok(g)
    }

    /// The equivalent game; its first `despot.len()` Despot states are the
    /// source Despot states, in order.
    pub fn convert(&self) -> Result<EntropyGame, EntropyError> {
        let mut owner: HashMap<&str, bool> = HashMap::new();
        for id in &self.despot {
            if owner.insert(id, true).is_some() {
                return Err(EntropyError::DuplicateState(id.clone()));
            }
        }
        for id in &self.tribune {
            if owner.insert(id, false).is_some() {
                return Err(EntropyError::DuplicateState(id.clone()));
            }
        }
        // (source state, action, targets) in order of first appearance.
        let mut moves: Vec<(String, String, Vec<String>)> = Vec::new();
        for (i, tr) in self.transitions.iter().enumerate() {
            let bad = |reason: &str| EntropyError::Edge {
                index: i,
                from: tr.from.clone(),
                to: tr.to.clone(),
                reason: reason.to_string(),
            };
            let from = *owner.get(tr.from.as_str()).ok_or_else(|| bad("unknown source state"))?;
            let to = *owner.get(tr.to.as_str()).ok_or_else(|| bad("unknown target state"))?;
            if from == to {
                return Err(bad("moves must alternate between Despot and Tribune"));
            }
            match moves.iter_mut().find(|(f, a, _)| *f == tr.from && *a == tr.action) {
                Some((_, _, targets)) if targets.contains(&tr.to) => return Err(bad("duplicate transition")),
                Some((_, _, targets)) => targets.push(tr.to.clone()),
                None => moves.push((tr.from.clone(), tr.action.clone(), vec![tr.to.clone()])),
            }
        }
        let mut file = super::EntropyFile {
            kind: "entropy".into(),
            d_states: self.despot.clone(),
            t_states: Vec::new(),
            p_states: Vec::new(),
            edges: Vec::new(),
        };
        let hat = |t: &str| format!("{t}^");
        for t in &self.tribune {
            file.d_states.push(hat(t));
            file.t_states.push(t.clone());
            file.edges.push(super::EntropyEdge { from: hat(t), to: t.clone(), m: None });
        }
        let edge = |from: &str, to: &str| super::EntropyEdge { from: from.into(), to: to.into(), m: None };
        for (from, action, targets) in &moves {
            let p = format!("{from}/{action}");
            file.p_states.push(p.clone());
            if owner[from.as_str()] {
                let t = format!("{from}/{action}?");
                file.t_states.push(t.clone());
                file.edges.push(edge(from, &t));
                file.edges.push(edge(&t, &p));
                for to in targets {
                    file.edges.push(edge(&p, &hat(to)));
                }
            } else {
                file.edges.push(edge(from, &p));
                for to in targets {
                    file.edges.push(edge(&p, to));
                }
            }
        }
        EntropyGame::from_file(&file)
    }

    /// `max_d V_d` over the source Despot states. A source round, one Despot
    /// move and one Tribune move, spans two rounds of the converted game, so
    /// the growth rate per source round is the square of this.
    pub fn max_value(&self, values: &[RationalInterval<BigInt>]) -> RationalInterval<BigInt> {
        let k = self.despot.len();
        let lo = values[..k].iter().map(|v| v.lo.clone()).max().expect("at least one Despot state");
        let hi = values[..k].iter().map(|v| v.hi.clone()).max().expect("at least one Despot state");
        RationalInterval { lo, hi }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{brute_force_entropy_values, solve_entropy_game, ParamRequest};
    use crate::numeric::ratio_to_f64;

    const BRANCHING: &str = r#"{"type":"entropy-alt","despot":["d"],"tribune":["t1","t2"],
        "transitions":[{"from":"d","action":"a","to":"t1"},{"from":"d","action":"a","to":"t2"},
        {"from":"t1","action":"b","to":"d"},{"from":"t2","action":"b","to":"d"}]}"#;

    #[test]
    fn conversion_shape() {
        let g = AlternatingEntropyGame::from_json(BRANCHING).unwrap().convert().unwrap();
        assert_eq!(g.d_ids, vec!["d", "t1^", "t2^"]);
        assert_eq!(g.t_ids.len(), 3);
        assert_eq!(g.p_ids.len(), 3);
        assert!(g.p_adj.iter().flatten().all(|&(_, m)| m == 1));
    }

    #[test]
    fn two_way_branching_every_other_round() {
        let a = AlternatingEntropyGame::from_json(BRANCHING).unwrap();
        let g = a.convert().unwrap();
        let b = brute_force_entropy_values(&g, 1000).unwrap();
        let v = a.max_value(&b.values);
        let r2 = 2f64.sqrt();
        assert!(ratio_to_f64(&v.lo) <= r2 + 1e-9 && ratio_to_f64(&v.hi) >= r2 - 1e-9);
        let s = solve_entropy_game(&g, &ParamRequest::Certified, 1000).unwrap();
        let v = a.max_value(&s.values);
        assert!(ratio_to_f64(&v.lo) <= r2 && r2 <= ratio_to_f64(&v.hi));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(AlternatingEntropyGame::from_json(r#"{"type":"entropy","despot":[],"tribune":[],"transitions":[]}"#),
            Err(EntropyError::WrongType(_))));
        let same = r#"{"type":"entropy-alt","despot":["d","e"],"tribune":["t"],
            "transitions":[{"from":"d","action":"a","to":"e"}]}"#;
        assert!(matches!(AlternatingEntropyGame::from_json(same).unwrap().convert(), Err(EntropyError::Edge { index: 0, .. })));
        let dup = r#"{"type":"entropy-alt","despot":["d"],"tribune":["d"],"transitions":[]}"#;
        assert!(matches!(AlternatingEntropyGame::from_json(dup).unwrap().convert(), Err(EntropyError::DuplicateState(_))));
    }
}
