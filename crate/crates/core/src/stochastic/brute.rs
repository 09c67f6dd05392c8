//! Ground truth by enumerating positional strategy pairs and solving the
//! induced Markov reward chains exactly.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rayon::prelude::*;
use thiserror::Error;

use super::{StochasticGame, StrategyPair};
use crate::linalg::solve;

/// Largest number of strategy pairs enumerated.
pub const PAIR_BUDGET: u128 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BruteForceError {
    #[error("{pairs} strategy pairs exceed the enumeration budget {budget}")]
    Budget { pairs: u128, budget: u128 },
}

/// Mean payoffs of one strategy pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairGain {
    pub pair: StrategyPair,
    /// Per Min state.
    pub gains: Vec<BigRational>,
    /// Gains of the recurrent classes, one entry per class.
    pub class_gains: Vec<BigRational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BruteForce {
    /// `χ_j = min_σ max_τ g_j(σ, τ)`.
    pub chi: Vec<BigRational>,
    pub pairs: Vec<PairGain>,
}

impl BruteForce {
    /// Min states of maximal value, ascending.
    pub fn argmax(&self) -> Vec<usize> {
        let best = self.chi.iter().max().expect("at least one state");
        (0..self.chi.len()).filter(|&j| self.chi[j] == *best).collect()
    }

    pub fn is_constant(&self) -> bool {
        self.chi.iter().all(|c| *c == self.chi[0])
    }
}

fn big(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// Gains of the chain over Min states induced by a pair:
/// `Q_jl = P_{τ(σ(j)) l}`, `r_j = −A_{jσ(j)} + B_{σ(j)τ(σ(j))}`.
pub fn pair_gains(game: &StochasticGame, pair: &StrategyPair) -> PairGain {
    let n = game.n();
    let m = big(game.denominator as i64);
    let mut q = vec![vec![BigRational::zero(); n]; n];
    let mut r = Vec::with_capacity(n);
    let mut graph = DiGraph::<(), ()>::new();
    let nodes: Vec<_> = (0..n).map(|_| graph.add_node(())).collect();
    for j in 0..n {
        let i = pair.sigma[j];
        let a = game.min_adj[j].iter().find(|e| e.0 == i).expect("sigma along an edge").1;
        let k = pair.tau[i];
        let b = game.max_adj[i].iter().find(|e| e.0 == k).expect("tau along an edge").1;
        r.push(big(b) - big(a));
        for &(l, p) in &game.nat_adj[k] {
            q[j][l] = big(p as i64) / &m;
            graph.add_edge(nodes[j], nodes[l], ());
        }
    }
    let sccs = tarjan_scc(&graph);
    let mut comp = vec![0usize; n];
    for (c, scc) in sccs.iter().enumerate() {
        for v in scc {
            comp[v.index()] = c;
        }
    }
    let mut gain: Vec<Option<BigRational>> = vec![None; n];
    let mut class_gains = Vec::new();
    for (c, scc) in sccs.iter().enumerate() {
        let members: Vec<usize> = scc.iter().map(|v| v.index()).collect();
        let closed = members.iter().all(|&j| (0..n).all(|l| q[j][l].is_zero() || comp[l] == c));
        if !closed {
            continue;
        }
        let g = class_gain(&q, &r, &members);
        for &j in &members {
            gain[j] = Some(g.clone());
        }
        class_gains.push(g);
    }
    let transient: Vec<usize> = (0..n).filter(|&j| gain[j].is_none()).collect();
    if !transient.is_empty() {
        // (I − Q_TT) g_T = Q_TR g_R
        let t = transient.len();
        let mut a = vec![vec![BigRational::zero(); t]; t];
        let mut rhs = vec![BigRational::zero(); t];
        for (x, &j) in transient.iter().enumerate() {
            for (y, &l) in transient.iter().enumerate() {
                a[x][y] = if x == y { BigRational::one() } else { BigRational::zero() } - &q[j][l];
            }
            for l in 0..n {
                if let Some(g) = &gain[l] {
                    rhs[x] += &q[j][l] * g;
                }
            }
        }
        let sol = solve(&a, &rhs).expect("transient block is invertible");
        for (x, &j) in transient.iter().enumerate() {
            gain[j] = Some(sol[x].clone());
        }
    }
    PairGain {
        pair: pair.clone(),
        gains: gain.into_iter().map(|g| g.expect("every state classified")).collect(),
        class_gains,
    }
}

/// `π·r` with `π` the stationary distribution of the closed class.
fn class_gain(q: &[Vec<BigRational>], r: &[BigRational], members: &[usize]) -> BigRational {
    let c = members.len();
    // Rows: c − 1 balance equations Σ_j π_j (δ_jl − Q_jl) = 0, then Σ π = 1.
    let mut a = vec![vec![BigRational::zero(); c]; c];
    let mut rhs = vec![BigRational::zero(); c];
    for (row, &l) in members.iter().take(c - 1).enumerate() {
        for (col, &j) in members.iter().enumerate() {
            let d = if j == l { BigRational::one() } else { BigRational::zero() };
            a[row][col] = d - &q[j][l];
        }
    }
    for col in 0..c {
        a[c - 1][col] = BigRational::one();
    }
    rhs[c - 1] = BigRational::one();
    let pi = solve(&a, &rhs).expect("irreducible class has a unique stationary law");
    members.iter().zip(&pi).map(|(&j, p)| p * &r[j]).sum()
}

fn choices(game: &StochasticGame, sigma: Option<&[usize]>, tau: Option<&[usize]>) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let s = match sigma {
        Some(s) => s.iter().map(|&i| vec![i]).collect(),
        None => game.min_adj.iter().map(|a| a.iter().map(|e| e.0).collect()).collect(),
    };
    let t = match tau {
        Some(t) => t.iter().map(|&k| vec![k]).collect(),
        None => game.max_adj.iter().map(|a| a.iter().map(|e| e.0).collect()).collect(),
    };
    (s, t)
}

fn count(opts: &[Vec<usize>]) -> u128 {
    opts.iter().fold(1u128, |acc, o| acc.saturating_mul(o.len() as u128))
}

fn decode(opts: &[Vec<usize>], mut idx: u128) -> Vec<usize> {
    opts.iter()
        .map(|o| {
            let len = o.len() as u128;
            let c = o[(idx % len) as usize];
            idx /= len;
            c
        })
        .collect()
}

/// `χ` over all positional pairs, optionally with one or both strategies
/// frozen. Enumerates Min strategies in parallel.
pub fn brute_force_values(
    game: &StochasticGame,
    sigma: Option<&[usize]>,
    tau: Option<&[usize]>,
) -> Result<BruteForce, BruteForceError> {
    let (s_opts, t_opts) = choices(game, sigma, tau);
    let (ns, nt) = (count(&s_opts), count(&t_opts));
    let pairs = ns.saturating_mul(nt);
    if pairs > PAIR_BUDGET {
        return Err(BruteForceError::Budget { pairs, budget: PAIR_BUDGET });
    }
    let per_sigma: Vec<(Vec<BigRational>, Vec<PairGain>)> = (0..ns)
        .into_par_iter()
        .map(|si| {
            let s = decode(&s_opts, si);
            let mut best: Option<Vec<BigRational>> = None;
            let mut rows = Vec::with_capacity(nt as usize);
            for ti in 0..nt {
                let pg = pair_gains(game, &StrategyPair { sigma: s.clone(), tau: decode(&t_opts, ti) });
                best = Some(match best {
                    None => pg.gains.clone(),
                    Some(b) => b.into_iter().zip(&pg.gains).map(|(x, y)| x.max(y.clone())).collect(),
                });
                rows.push(pg);
            }
            (best.expect("at least one tau"), rows)
        })
        .collect();
    let mut chi: Option<Vec<BigRational>> = None;
    let mut all = Vec::with_capacity(pairs as usize);
    for (best, rows) in per_sigma {
        chi = Some(match chi {
            None => best,
            Some(c) => c.into_iter().zip(best).map(|(x, y)| x.min(y)).collect(),
        });
        all.extend(rows);
    }
    Ok(BruteForce { chi: chi.expect("at least one sigma"), pairs: all })
}
