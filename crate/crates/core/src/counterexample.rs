//! Lower-bound family: a Despot-free entropy game in which the Tribune
//! action that is optimal for the mean payoff loses at every short horizon.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::entropy::{EntropyEdge, EntropyFile, EntropyGame};
use crate::logexp::{bits_for, ln_bounds};
use crate::numeric::RationalInterval;
use crate::perron::Matrix;

/// Weight on the row entering the smaller block.
pub const ALPHA: u64 = 8;

fn int(v: u64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

/// First row all `w`, ones on the subdiagonal.
pub fn companion_matrix(n: usize, w: u64) -> Matrix {
    assert!(n >= 1 && w >= 1, "companion matrix needs n ≥ 1 and W ≥ 1");
    let w = i64::try_from(w).expect("weight fits i64");
    (0..n)
        .map(|i| (0..n).map(|j| if i == 0 { w } else { i64::from(j + 1 == i) }).collect())
        .collect()
}

/// `xⁿ − W(x^{n−1} + … + 1)`.
pub fn companion_poly_eval(n: usize, w: u64, x: &BigRational) -> BigRational {
    let mut tail = BigRational::zero();
    let mut pw = BigRational::one();
    for _ in 0..n {
        tail += &pw;
        pw *= x;
    }
    pw - int(w) * tail
}

/// Brackets the unique positive root of the companion polynomial by
/// bisection on `[W, W+1]`.
pub fn positive_root(n: usize, w: u64, tol: &BigRational) -> RationalInterval<BigInt> {
    assert!(n >= 1 && w >= 1 && tol.is_positive(), "positive_root preconditions");
    if n == 1 {
        return RationalInterval::point(int(w));
    }
    let mut lo = int(w);
    let mut hi = int(w + 1);
    let two = int(2);
    while &hi - &lo > *tol {
        let mid = (&lo + &hi) / &two;
        let v = companion_poly_eval(n, w, &mid);
        if v.is_zero() {
            return RationalInterval::point(mid);
        }
        if v.is_negative() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    RationalInterval { lo, hi }
}

/// Left Perron eigenvector of the companion matrix scaled to `u₁ = 1`,
/// enclosed from a root bracket via `u_n = W/λ`, `u_i = (W + u_{i+1})/λ`.
pub fn left_eigenvector_bounds(n: usize, w: u64, root: &RationalInterval<BigInt>) -> Vec<RationalInterval<BigInt>> {
    let mut out = vec![RationalInterval::point(BigRational::one()); n];
    if n == 1 {
        return out;
    }
    let wq = int(w);
    let mut lo = &wq / &root.hi;
    let mut hi = &wq / &root.lo;
    out[n - 1] = RationalInterval { lo: lo.clone(), hi: hi.clone() };
    for i in (1..n - 1).rev() {
        lo = (&wq + &lo) / &root.hi;
        hi = (&wq + &hi) / &root.lo;
        out[i] = RationalInterval { lo: lo.clone(), hi: hi.clone() };
    }
    out
}

/// The game together with the states that matter for the analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CexGame {
    pub n: usize,
    pub w: u64,
    pub alpha: u64,
    pub game: EntropyGame,
    /// Despot state whose only move leads to the significant Tribune state.
    pub start: usize,
    pub tribune: usize,
    /// People states entered by the left and right actions.
    pub left: usize,
    pub right: usize,
    /// Model rounds per step of the matrix recursion.
    pub turn_factor: usize,
    /// Horizon `k` from `start` corresponds to step `k − horizon_offset`.
    pub horizon_offset: usize,
}

impl CexGame {
    /// People states with more than one successor or a weight other than 1.
    pub fn significant_people(&self) -> usize {
        self.game.p_adj.iter().filter(|adj| adj.len() > 1 || adj[0].1 != 1).count()
    }

    /// Tribune states with more than one action.
    pub fn significant_tribune(&self) -> usize {
        self.game.t_adj.iter().filter(|adj| adj.len() > 1).count()
    }

    pub fn horizon_value(&self, k: usize) -> BigRational {
        self.game.horizon_values(k)[self.start].clone()
    }
}

fn block(file: &mut EntropyFile, tag: &str, size: usize, w: u64, entry_weight: u64) {
    let edge = |from: String, to: String, m: Option<u64>| EntropyEdge { from, to, m };
    for j in 0..size {
        let (d, t, p) = (format!("d{tag}{j}"), format!("t{tag}{j}"), format!("{tag}{j}"));
        file.d_states.push(d.clone());
        file.t_states.push(t.clone());
        file.p_states.push(p.clone());
        file.edges.push(edge(d.clone(), t.clone(), None));
        file.edges.push(edge(t, p, None));
    }
    let entry = format!("{tag}in");
    file.p_states.push(entry.clone());
    for j in 0..size {
        file.edges.push(edge(entry.clone(), format!("d{tag}{j}"), Some(entry_weight)));
        file.edges.push(edge(format!("{tag}0"), format!("d{tag}{j}"), Some(w)));
    }
    for i in 1..size {
        file.edges.push(edge(format!("{tag}{i}"), format!("d{tag}{}", i - 1), None));
    }
}

/// The game for the pair of companion matrices of sizes `n` and `n − 1`.
pub fn build_cex_game(n: usize, w: u64) -> CexGame {
    assert!(n >= 2 && w >= 1, "counterexample needs n ≥ 2 and W ≥ 1");
    let mut file = EntropyFile {
        kind: "entropy".into(),
        d_states: vec!["start".into()],
        t_states: vec!["choice".into()],
        p_states: Vec::new(),
        edges: vec![EntropyEdge { from: "start".into(), to: "choice".into(), m: None }],
    };
    block(&mut file, "L", n, w, 1);
    block(&mut file, "R", n - 1, w, ALPHA);
    for entry in ["Lin", "Rin"] {
        file.edges.push(EntropyEdge { from: "choice".into(), to: entry.into(), m: None });
    }
    let game = EntropyGame::from_file(&file).expect("well-formed construction");
    let find = |ids: &[String], s: &str| ids.iter().position(|x| x == s).expect("state exists");
    CexGame {
        n,
        w,
        alpha: ALPHA,
        start: find(&game.d_ids, "start"),
        tribune: find(&game.t_ids, "choice"),
        left: find(&game.p_ids, "Lin"),
        right: find(&game.p_ids, "Rin"),
        turn_factor: 1,
        horizon_offset: 1,
        game,
    }
}

fn ln_iv(x: &RationalInterval<BigInt>, prec: u32) -> RationalInterval<BigInt> {
    RationalInterval { lo: ln_bounds(&x.lo, prec).0, hi: ln_bounds(&x.hi, prec).1 }
}

/// Brackets `log(α(n−1)/(4n)) / log(λ_n/λ_{n−1})`. Root brackets are
/// refined until the denominator is bounded away from zero.
pub fn k_star(n: usize, w: u64, tol: &BigRational) -> RationalInterval<BigInt> {
    assert!(n >= 2 && w >= 1 && tol.is_positive(), "k_star preconditions");
    let q = BigRational::new(BigInt::from(ALPHA * (n as u64 - 1)), BigInt::from(4 * n as u64));
    if q.is_one() {
        return RationalInterval::point(BigRational::zero());
    }
    let mut eps = tol.clone();
    loop {
        let prec = bits_for(&eps);
        let a = positive_root(n, w, &eps);
        let b = positive_root(n - 1, w, &eps);
        let num = ln_iv(&RationalInterval::point(q.clone()), prec);
        let ratio = RationalInterval { lo: &a.lo / &b.hi, hi: &a.hi / &b.lo };
        if ratio.lo > BigRational::one() {
            let den = ln_iv(&ratio, prec);
            if den.lo.is_positive() {
                let iv = RationalInterval { lo: &num.lo / &den.hi, hi: &num.hi / &den.lo };
                if iv.width() <= *tol {
                    return iv;
                }
            }
        }
        eps /= BigInt::from(1024);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipStep {
    pub k: usize,
    pub left: BigInt,
    pub right: BigInt,
    pub winner: Side,
}

/// CSV row of a flip trace; terms are given by their decimal length.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlipRecord {
    pub k: usize,
    pub left_term_digits: usize,
    pub right_term_digits: usize,
    pub winner: Side,
}

impl From<&FlipStep> for FlipRecord {
    fn from(s: &FlipStep) -> Self {
        FlipRecord {
            k: s.k,
            left_term_digits: s.left.to_string().len(),
            right_term_digits: s.right.to_string().len(),
            winner: s.winner,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlipTrace {
    /// First `k` at which the left term is strictly larger.
    pub flip: Option<usize>,
    pub steps: Vec<FlipStep>,
}

fn mul(a: &Matrix, v: &[BigInt]) -> Vec<BigInt> {
    a.iter().map(|row| row.iter().zip(v).map(|(&c, x)| x * c).sum()).collect()
}

/// Compares `1ᵀA_n^k 1` with `α 1ᵀA_{n−1}^k 1` exactly for `k = 0..=k_max`.
pub fn horizon_flip(n: usize, w: u64, k_max: usize) -> FlipTrace {
    assert!(n >= 2 && w >= 1, "horizon_flip needs n ≥ 2 and W ≥ 1");
    let a = companion_matrix(n, w);
    let b = companion_matrix(n - 1, w);
    let mut u = vec![BigInt::one(); n];
    let mut v = vec![BigInt::one(); n - 1];
    let mut steps = Vec::with_capacity(k_max + 1);
    let mut flip = None;
    for k in 0..=k_max {
        let left: BigInt = u.iter().sum();
        let right: BigInt = v.iter().sum::<BigInt>() * ALPHA;
        let winner = if left > right { Side::Left } else { Side::Right };
        if winner == Side::Left && flip.is_none() {
            flip = Some(k);
        }
        steps.push(FlipStep { k, left, right, winner });
        u = mul(&a, &u);
        v = mul(&b, &v);
    }
    FlipTrace { flip, steps }
}

/// Writes the trace as CSV with a header row.
pub fn write_flip_csv<W: std::io::Write>(trace: &FlipTrace, out: W) -> Result<(), csv::Error> {
    let mut wtr = csv::Writer::from_writer(out);
    for s in &trace.steps {
        wtr.serialize(FlipRecord::from(s))?;
    }
    wtr.flush()?;
    Ok(())
}
