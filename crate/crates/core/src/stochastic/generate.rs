//! Seeded random games.

use rand::seq::index::sample;
use rand::Rng;

use super::StochasticGame;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomSpec {
    pub max_min_states: usize,
    pub max_max_states: usize,
    pub max_nat_states: usize,
    /// Candidate common denominators, drawn uniformly.
    pub denominators: Vec<u64>,
    /// Payoffs are uniform in `[−max_payoff, max_payoff]`.
    pub max_payoff: i64,
    /// Caps out-degrees and Nature support sizes.
    pub max_degree: Option<usize>,
}

impl Default for RandomSpec {
    fn default() -> Self {
        RandomSpec {
            max_min_states: 3,
            max_max_states: 3,
            max_nat_states: 3,
            denominators: vec![1, 2, 3],
            max_payoff: 2,
            max_degree: None,
        }
    }
}

/// Random subset of `0..n` with a size drawn uniformly from `1..=min(n, cap)`.
fn nonempty_subset<R: Rng>(rng: &mut R, n: usize, cap: usize) -> Vec<usize> {
    let size = rng.gen_range(1..=n.min(cap));
    let mut s = sample(rng, n, size).into_vec();
    s.sort_unstable();
    s
}

/// `n` uniform in `1..=max`, Max and Nature counts uniform between `n` and
/// their maximum, out-degrees uniform in `1..=size` (capped by `max_degree`), Nature
/// supports of size at most `M` with positive numerators summing to `M`.
pub fn random_game<R: Rng>(spec: &RandomSpec, rng: &mut R) -> StochasticGame {
    let n = rng.gen_range(1..=spec.max_min_states);
    let p = rng.gen_range(n.min(spec.max_max_states)..=spec.max_max_states);
    let r = rng.gen_range(n.min(spec.max_nat_states)..=spec.max_nat_states);
    let m = spec.denominators[rng.gen_range(0..spec.denominators.len())];
    let w = spec.max_payoff;
    let cap = spec.max_degree.unwrap_or(usize::MAX).max(1);
    let min_adj = (0..n)
        .map(|_| nonempty_subset(rng, p, cap).into_iter().map(|i| (i, rng.gen_range(-w..=w))).collect())
        .collect();
    let max_adj = (0..p)
        .map(|_| nonempty_subset(rng, r, cap).into_iter().map(|k| (k, rng.gen_range(-w..=w))).collect())
        .collect();
    let nat_adj = (0..r)
        .map(|_| {
            let size = rng.gen_range(1..=(m as usize).min(n).min(cap));
            let mut support = sample(rng, n, size).into_vec();
            support.sort_unstable();
            let mut cuts = sample(rng, m as usize - 1, size - 1).into_iter().map(|c| c as u64 + 1).collect::<Vec<_>>();
            cuts.sort_unstable();
            cuts.push(m);
            let mut prev = 0;
            support
                .into_iter()
                .zip(cuts)
                .map(|(l, c)| {
                    let num = c - prev;
                    prev = c;
                    (l, num)
                })
                .collect()
        })
        .collect();
    StochasticGame {
        min_ids: (0..n).map(|j| format!("j{j}")).collect(),
        max_ids: (0..p).map(|i| format!("i{i}")).collect(),
        nat_ids: (0..r).map(|k| format!("k{k}")).collect(),
        min_adj,
        max_adj,
        nat_adj,
        denominator: m,
    }
    .validated()
    .expect("generator respects the game invariants")
}
