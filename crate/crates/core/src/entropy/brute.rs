//! Ground truth by enumerating positional strategy pairs. The value of a
//! pair at a Despot state is the largest Perron root among the strongly
//! connected components of its ambiguity matrix reachable from that state.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rayon::prelude::*;
use thiserror::Error;

use super::params::{rank_profile, ParamError, RankProfile};
use super::{decode, EntropyGame, StrategyPair};
use crate::numeric::RationalInterval;
use crate::perron::{perron_root, Matrix, PerronError, PerronRoot};

/// Largest number of strategy pairs enumerated by default.
pub const ENTROPY_PAIR_BUDGET: u128 = 200_000;

/// Initial bracket width of every distinct Perron root, `2^-40`.
const COARSE_BITS: u32 = 40;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EntropyBruteError {
    #[error("{pairs} strategy pairs exceed the enumeration budget {budget}")]
    Budget { pairs: u128, budget: u128 },
    #[error("Perron roots could not be separated at width 1/(4 nu_hat); separation bound violated")]
    Undecided,
    #[error(transparent)]
    Perron(#[from] PerronError),
    #[error(transparent)]
    Params(#[from] ParamError),
}

/// Strongly connected components of the positive pattern of `a`, sinks
/// first, with for each component the nontrivial components it reaches.
pub(crate) struct Components {
    pub comps: Vec<Vec<usize>>,
    pub comp_of: Vec<usize>,
    /// Indices into `comps` of the nontrivial components reachable from each
    /// component, ascending.
    pub reach: Vec<Vec<usize>>,
}

impl Components {
    pub fn new(a: &[Vec<i64>]) -> Self {
        let n = a.len();
        let mut g = DiGraph::<(), ()>::with_capacity(n, n * n);
        let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
        for i in 0..n {
            for j in 0..n {
                if a[i][j] > 0 {
                    g.add_edge(nodes[i], nodes[j], ());
                }
            }
        }
        let comps: Vec<Vec<usize>> = tarjan_scc(&g)
            .into_iter()
            .map(|c| {
                let mut v: Vec<usize> = c.into_iter().map(|x| x.index()).collect();
                v.sort_unstable();
                v
            })
            .collect();
        let mut comp_of = vec![0; n];
        for (k, c) in comps.iter().enumerate() {
            for &i in c {
                comp_of[i] = k;
            }
        }
        let mut reach: Vec<Vec<usize>> = Vec::with_capacity(comps.len());
        for (k, c) in comps.iter().enumerate() {
            let mut r: Vec<usize> = Vec::new();
            if c.len() > 1 || a[c[0]][c[0]] > 0 {
                r.push(k);
            }
            for &i in c {
                for j in 0..n {
                    let cj = comp_of[j];
                    if a[i][j] > 0 && cj != k {
                        r.extend_from_slice(&reach[cj]);
                    }
                }
            }
            r.sort_unstable();
            r.dedup();
            reach.push(r);
        }
        Components { comps, comp_of, reach }
    }

    pub fn submatrix(&self, a: &[Vec<i64>], k: usize) -> Matrix {
        let c = &self.comps[k];
        c.iter().map(|&i| c.iter().map(|&j| a[i][j]).collect()).collect()
    }

    /// Nontrivial component submatrices reachable from each state.
    pub fn reachable_blocks(&self, a: &[Vec<i64>]) -> Vec<Vec<Matrix>> {
        let blocks: Vec<Matrix> = (0..self.comps.len()).map(|k| self.submatrix(a, k)).collect();
        (0..a.len()).map(|i| self.reach[self.comp_of[i]].iter().map(|&k| blocks[k].clone()).collect()).collect()
    }
}

/// Per-state brackets of the value of a fixed pair, each of width at most
/// `tol`.
pub fn pair_value(
    game: &EntropyGame,
    pair: &StrategyPair,
    tol: &BigRational,
) -> Result<Vec<RationalInterval<BigInt>>, EntropyBruteError> {
    let a = game.ambiguity_matrix(pair).map_err(|_| PerronError::Shape)?;
    let comps = Components::new(&a);
    let mut cache: HashMap<Matrix, RationalInterval<BigInt>> = HashMap::new();
    let mut out = Vec::with_capacity(a.len());
    for blocks in comps.reachable_blocks(&a) {
        let mut best: Option<RationalInterval<BigInt>> = None;
        for b in blocks {
            let r = match cache.get(&b) {
                Some(r) => r.clone(),
                None => {
                    let r = perron_root(&b, tol)?;
                    cache.insert(b, r.clone());
                    r
                }
            };
            best = Some(match best {
                None => r,
                Some(x) => RationalInterval { lo: x.lo.max(r.lo), hi: x.hi.max(r.hi) },
            });
        }
        out.push(best.expect("every state reaches a cycle"));
    }
    Ok(out)
}

/// Ground truth of an entropy game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntropyBrute {
    /// Bracket of `χ_d = min_σ max_τ` of the pair values.
    pub values: Vec<RationalInterval<BigInt>>,
    /// Index into `classes` of each `χ_d`.
    pub rank: Vec<usize>,
    /// Distinct Perron roots met during enumeration, ascending, each
    /// bracketed.
    pub classes: Vec<RationalInterval<BigInt>>,
    /// Every enumerated pair with the class index of its value per state.
    pub pairs: Vec<(StrategyPair, Vec<usize>)>,
    pub profile: RankProfile,
}

impl EntropyBrute {
    /// Despot states of maximal value, ascending.
    pub fn argmax(&self) -> Vec<usize> {
        let best = *self.rank.iter().max().expect("at least one state");
        (0..self.rank.len()).filter(|&d| self.rank[d] == best).collect()
    }

    pub fn is_constant(&self) -> bool {
        self.rank.iter().all(|&r| r == self.rank[0])
    }
}

pub(crate) fn strategy_options(game: &EntropyGame) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    (game.d_adj.clone(), game.t_adj.clone())
}

fn count(opts: &[Vec<usize>]) -> u128 {
    opts.iter().fold(1u128, |a, o| a.saturating_mul(o.len() as u128))
}

/// Distinct Perron roots sorted and grouped into equality classes. Roots
/// whose coarse brackets overlap are refined to width `fine`; brackets that
/// still overlap are equal by the separation bound. Returns the class of
/// each root and the class brackets.
pub(crate) fn classify(
    roots: &mut [PerronRoot],
    fine: &BigRational,
    sep: &BigRational,
) -> Result<(Vec<usize>, Vec<RationalInterval<BigInt>>), EntropyBruteError> {
    let k = roots.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| roots[a].bracket.lo.cmp(&roots[b].bracket.lo));
    let mut refine = vec![false; k];
    let mut hull_hi: Option<(BigRational, usize)> = None;
    for &i in &order {
        if let Some((h, j)) = &hull_hi {
            if roots[i].bracket.lo <= *h {
                refine[i] = true;
                refine[*j] = true;
            }
        }
        if hull_hi.as_ref().is_none_or(|(h, _)| roots[i].bracket.hi > *h) {
            hull_hi = Some((roots[i].bracket.hi.clone(), i));
        }
    }
    let done: Vec<Result<(), PerronError>> = roots
        .par_iter_mut()
        .zip(refine.par_iter())
        .map(|(r, &f)| if f { r.refine(fine) } else { Ok(()) })
        .collect();
    for d in done {
        d?;
    }
    order.sort_by(|&a, &b| roots[a].bracket.lo.cmp(&roots[b].bracket.lo));
    let mut class_of = vec![0; k];
    let mut classes: Vec<RationalInterval<BigInt>> = Vec::new();
    let mut hull: Option<RationalInterval<BigInt>> = None;
    for &i in &order {
        let b = roots[i].bracket.clone();
        match (&mut hull, classes.last_mut()) {
            (Some(h), Some(c)) if b.lo <= h.hi => {
                h.hi = h.hi.clone().max(b.hi.clone());
                if h.width() > *sep {
                    return Err(EntropyBruteError::Undecided);
                }
                c.lo = c.lo.clone().max(b.lo);
                c.hi = c.hi.clone().min(b.hi);
                if c.lo > c.hi {
                    return Err(EntropyBruteError::Undecided);
                }
            }
            _ => {
                hull = Some(b.clone());
                classes.push(b);
            }
        }
        class_of[i] = classes.len() - 1;
    }
    Ok((class_of, classes))
}

/// Enumerates all positional pairs within `budget`.
pub fn brute_force_entropy_values(game: &EntropyGame, budget: u128) -> Result<EntropyBrute, EntropyBruteError> {
    let (s_opts, t_opts) = strategy_options(game);
    let (ns, nt) = (count(&s_opts), count(&t_opts));
    let pairs = ns.saturating_mul(nt);
    if pairs > budget {
        return Err(EntropyBruteError::Budget { pairs, budget });
    }
    let profile = rank_profile(game, budget, true)?;
    let n = game.n();
    let rows: Vec<(StrategyPair, Vec<Vec<Matrix>>)> = (0..ns)
        .into_par_iter()
        .flat_map_iter(|si| {
            let sigma = decode(&s_opts, si);
            let t_opts = &t_opts;
            (0..nt).map(move |ti| {
                let pair = StrategyPair { sigma: sigma.clone(), tau: decode(t_opts, ti) };
                let a = game.ambiguity_matrix(&pair).expect("enumerated pairs follow edges");
                let blocks = Components::new(&a).reachable_blocks(&a);
                (pair, blocks)
            })
        })
        .collect();
    let mut ids: HashMap<Matrix, usize> = HashMap::new();
    let mut mats: Vec<Matrix> = Vec::new();
    let rows: Vec<(StrategyPair, Vec<Vec<usize>>)> = rows
        .into_iter()
        .map(|(pair, blocks)| {
            let per_state = blocks
                .into_iter()
                .map(|bs| {
                    bs.into_iter()
                        .map(|b| {
                            *ids.entry(b.clone()).or_insert_with(|| {
                                mats.push(b);
                                mats.len() - 1
                            })
                        })
                        .collect()
                })
                .collect();
            (pair, per_state)
        })
        .collect();
    let coarse = BigRational::new(BigInt::one(), BigInt::one() << COARSE_BITS);
    let mut roots: Vec<PerronRoot> =
        mats.into_par_iter().map(|m| PerronRoot::new(m, &coarse)).collect::<Result<_, _>>()?;
    let nu_hat = BigRational::from_integer(profile.nu_hat.clone());
    let fine = BigRational::one() / (&nu_hat * BigInt::from(4));
    let sep = BigRational::one() / &nu_hat;
    let (class_of, classes) = classify(&mut roots, &fine, &sep)?;

    let table: Vec<(StrategyPair, Vec<usize>)> = rows
        .into_iter()
        .map(|(pair, per_state)| {
            let v = per_state
                .into_iter()
                .map(|ids| ids.into_iter().map(|i| class_of[i]).max().expect("every state reaches a cycle"))
                .collect();
            (pair, v)
        })
        .collect();
    let mut chi: Vec<usize> = vec![usize::MAX; n];
    for chunk in table.chunks(nt as usize) {
        for d in 0..n {
            let best = chunk.iter().map(|r| r.1[d]).max().expect("at least one tau");
            chi[d] = chi[d].min(best);
        }
    }
    Ok(EntropyBrute {
        values: chi.iter().map(|&c| classes[c].clone()).collect(),
        rank: chi,
        classes,
        pairs: table,
        profile,
    })
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;
    use crate::numeric::ratio_to_f64;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn mid(r: &RationalInterval<BigInt>) -> f64 {
        ratio_to_f64(&((&r.lo + &r.hi) / BigInt::from(2)))
    }

    #[test]
    fn pair_value_examples() {
        let tol = q(1, 1_000_000_000);
        let s = StrategyPair { sigma: vec![0], tau: vec![0] };
        let v = pair_value(&single_loop(2), &s, &tol).unwrap();
        assert_eq!(v, vec![RationalInterval::point(q(2, 1))]);
        let s = StrategyPair { sigma: vec![0, 0], tau: vec![0] };
        let v = pair_value(&all_ones(), &s, &tol).unwrap();
        assert_eq!(v[0], RationalInterval::point(q(2, 1)));
        // b reaches its own loop (3) and a's loop (2); c reaches both plus its own (1).
        let g = two_blocks();
        let s = StrategyPair { sigma: vec![0, 1, 2], tau: vec![0, 1, 3] };
        let v = pair_value(&g, &s, &tol).unwrap();
        assert_eq!(v.iter().map(mid).collect::<Vec<_>>(), vec![2.0, 3.0, 3.0]);
        let s = StrategyPair { sigma: vec![0, 1, 2], tau: vec![0, 2, 3] };
        let v = pair_value(&g, &s, &tol).unwrap();
        assert_eq!(v.iter().map(mid).collect::<Vec<_>>(), vec![2.0, 2.0, 2.0]);
    }

    #[test]
    fn components_reach_sinks_first() {
        let a = vec![vec![1, 1, 0], vec![0, 0, 1], vec![0, 1, 0]];
        let c = Components::new(&a);
        assert_eq!(c.comps.len(), 2);
        let blocks = c.reachable_blocks(&a);
        assert_eq!(blocks[0], vec![vec![vec![0, 1], vec![1, 0]], vec![vec![1]]]);
        assert_eq!(blocks[1], vec![vec![vec![0, 1], vec![1, 0]]]);
    }

    #[test]
    fn brute_examples() {
        let b = brute_force_entropy_values(&single_loop(2), 10).unwrap();
        assert_eq!(b.values, vec![RationalInterval::point(q(2, 1))]);
        let b = brute_force_entropy_values(&tribune_choice(), 10).unwrap();
        assert_eq!(b.values, vec![RationalInterval::point(q(3, 1))]);
        let b = brute_force_entropy_values(&despot_choice(), 10).unwrap();
        assert_eq!(b.values, vec![RationalInterval::point(q(2, 1))]);
        let b = brute_force_entropy_values(&two_blocks(), 10).unwrap();
        assert_eq!(b.values.iter().map(mid).collect::<Vec<_>>(), vec![2.0, 3.0, 3.0]);
        assert_eq!(b.argmax(), vec![1, 2]);
        assert_eq!(b.classes.len(), 3);
        assert!(matches!(
            brute_force_entropy_values(&two_blocks(), 1),
            Err(EntropyBruteError::Budget { pairs: 2, budget: 1 })
        ));
    }

    #[test]
    fn equal_irrational_roots_share_a_class() {
        // √2 from two different 2-cycles.
        let mut roots = vec![
            PerronRoot::new(vec![vec![0, 2], vec![1, 0]], &q(1, 1 << 20)).unwrap(),
            PerronRoot::new(vec![vec![0, 1], vec![2, 0]], &q(1, 1 << 20)).unwrap(),
            PerronRoot::new(vec![vec![1]], &q(1, 1 << 20)).unwrap(),
        ];
        let (class_of, classes) = classify(&mut roots, &q(1, 1 << 60), &q(1, 1 << 50)).unwrap();
        assert_eq!(class_of, vec![1, 1, 0]);
        assert_eq!(classes.len(), 2);
        assert!(classes[1].width() <= q(1, 1 << 60));
    }
}
