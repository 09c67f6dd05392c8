//! Seeded random entropy games.

use rand::seq::index::sample;
use rand::Rng;

use super::EntropyGame;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntropySpec {
    pub max_despot: usize,
    pub max_tribune: usize,
    pub max_people: usize,
    /// `W` is drawn from `1..=max_w`, then multiplicities from `1..=W`.
    pub max_w: u64,
}

impl Default for EntropySpec {
    fn default() -> Self {
        EntropySpec { max_despot: 3, max_tribune: 3, max_people: 3, max_w: 3 }
    }
}

fn nonempty_subset<R: Rng>(rng: &mut R, n: usize) -> Vec<usize> {
    let size = rng.gen_range(1..=n);
    let mut s = sample(rng, n, size).into_vec();
    s.sort_unstable();
    s
}

/// `n` uniform in `1..=max_despot`, Tribune and People counts uniform
/// between `n` and their maximum, successor sets uniform nonempty subsets.
pub fn random_entropy_game<R: Rng>(spec: &EntropySpec, rng: &mut R) -> EntropyGame {
    let n = rng.gen_range(1..=spec.max_despot);
    let t = rng.gen_range(n.min(spec.max_tribune)..=spec.max_tribune);
    let p = rng.gen_range(n.min(spec.max_people)..=spec.max_people);
    let w = rng.gen_range(1..=spec.max_w);
    let d_adj = (0..n).map(|_| nonempty_subset(rng, t)).collect();
    let t_adj = (0..t).map(|_| nonempty_subset(rng, p)).collect();
    let p_adj = (0..p)
        .map(|_| nonempty_subset(rng, n).into_iter().map(|l| (l, rng.gen_range(1..=w))).collect())
        .collect();
    EntropyGame {
        d_ids: (0..n).map(|i| format!("d{i}")).collect(),
        t_ids: (0..t).map(|i| format!("t{i}")).collect(),
        p_ids: (0..p).map(|i| format!("p{i}")).collect(),
        d_adj,
        t_adj,
        p_adj,
    }
    .validated()
    .expect("generator respects the game invariants")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_games_are_valid_and_reproducible() {
        let spec = EntropySpec::default();
        let mut a = ChaCha8Rng::seed_from_u64(11);
        let mut b = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let g = random_entropy_game(&spec, &mut a);
            assert_eq!(g, random_entropy_game(&spec, &mut b));
            assert_eq!(EntropyGame::from_json(&g.to_json()).unwrap(), g);
            assert!(g.n() <= 3 && g.w() <= 3);
        }
    }
}
