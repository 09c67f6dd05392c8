//! Exact and rounding oracles for the stochastic-game Shapley operator.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

use super::StochasticGame;
use crate::numeric::{Ext, ExtVec, Int};
use crate::shapley::ShapleyOracle;

/// Evaluates the operator exactly, whatever the requested precision.
#[derive(Debug, Clone, Copy)]
pub struct ExactOracle<'a> {
    game: &'a StochasticGame,
}

impl<'a> ExactOracle<'a> {
    pub fn new(game: &'a StochasticGame) -> Self {
        ExactOracle { game }
    }
}

impl<I: Int> ShapleyOracle<I> for ExactOracle<'_> {
    fn dim(&self) -> usize {
        self.game.n()
    }
    fn eval(&self, x: &ExtVec<I>, _eps: &Ratio<I>) -> ExtVec<I> {
        self.game.eval_unchecked(x)
    }
    fn supports_exact(&self) -> bool {
        true
    }
}

/// Exact evaluation over big rationals for long exact runs. When all finite
/// inputs share one (not necessarily reduced) denominator `D`, the image is
/// computed in integers and returned over the denominator `D·M` without
/// gcd reduction, so iterates from `𝟎` keep the denominator `M^ℓ`.
#[derive(Debug, Clone, Copy)]
pub struct ExactBigOracle<'a> {
    game: &'a StochasticGame,
}

impl<'a> ExactBigOracle<'a> {
    pub fn new(game: &'a StochasticGame) -> Self {
        ExactBigOracle { game }
    }

    fn eval_common(&self, x: &ExtVec<BigInt>) -> Option<ExtVec<BigInt>> {
        let g = self.game;
        let mut den: Option<&BigInt> = None;
        for e in x.iter() {
            if let Ext::Fin(r) = e {
                match den {
                    None => den = Some(r.denom()),
                    Some(d) if d == r.denom() => {}
                    Some(_) => return None,
                }
            }
        }
        let d = den.cloned().unwrap_or_else(BigInt::one);
        let m = BigInt::from(g.denominator);
        let dm = &d * &m;
        let nat: Vec<Option<BigInt>> = g
            .nat_adj
            .iter()
            .map(|adj| {
                let mut acc = BigInt::zero();
                for &(l, p) in adj {
                    match &x.0[l] {
                        Ext::NegInf => return None,
                        Ext::Fin(v) => acc += v.numer() * p,
                    }
                }
                Some(acc)
            })
            .collect();
        let maxv: Vec<Option<BigInt>> = g
            .max_adj
            .iter()
            .map(|adj| {
                adj.iter()
                    .filter_map(|&(k, b)| nat[k].as_ref().map(|v| v + &dm * b))
                    .max()
            })
            .collect();
        let out = g
            .min_adj
            .iter()
            .map(|adj| {
                let mut worst: Option<BigInt> = None;
                for &(i, a) in adj {
                    let v = maxv[i].as_ref()? - &dm * a;
                    if worst.as_ref().is_none_or(|w| v < *w) {
                        worst = Some(v);
                    }
                }
                worst
            })
            .map(|v| match v {
                None => Ext::NegInf,
                Some(v) => Ext::Fin(Ratio::new_raw(v, dm.clone())),
            })
            .collect();
        Some(ExtVec(out))
    }
}

impl ShapleyOracle<BigInt> for ExactBigOracle<'_> {
    fn dim(&self) -> usize {
        self.game.n()
    }
    fn eval(&self, x: &ExtVec<BigInt>, _eps: &Ratio<BigInt>) -> ExtVec<BigInt> {
        assert_eq!(x.len(), self.game.n(), "oracle input length");
        self.eval_common(x).unwrap_or_else(|| self.game.eval_unchecked(x))
    }
    fn supports_exact(&self) -> bool {
        true
    }
}

/// Evaluates exactly, then rounds every finite coordinate to the nearest
/// multiple of `1/q` (ties to an even numerator). When `1/(2q)` exceeds the
/// requested precision, `q` is refined to its smallest multiple that meets
/// it. `eps = 0` returns the exact image.
#[derive(Debug, Clone, Copy)]
pub struct RoundingOracle<'a> {
    game: &'a StochasticGame,
    q: i128,
}

impl<'a> RoundingOracle<'a> {
    pub fn new(game: &'a StochasticGame, q: u64) -> Self {
        assert!(q >= 1, "rounding denominator must be positive");
        RoundingOracle { game, q: q as i128 }
    }

    pub fn game(&self) -> &StochasticGame {
        self.game
    }

    /// Grid used for precision `eps > 0`.
    pub fn grid(&self, eps: &Ratio<i128>) -> i128 {
        // ⌈1/(2ε)⌉
        let need = Integer::div_ceil(eps.denom(), &(2 * eps.numer()));
        if self.q >= need {
            self.q
        } else {
            self.q * Integer::div_ceil(&need, &self.q)
        }
    }
}

/// Nearest integer to `num/den` (`den > 0`), ties to even.
fn round_half_even(num: i128, den: i128) -> i128 {
    let (fl, rem) = num.div_mod_floor(&den);
    match (2 * rem).cmp(&den) {
        std::cmp::Ordering::Less => fl,
        std::cmp::Ordering::Greater => fl + 1,
        std::cmp::Ordering::Equal => {
            if fl.is_even() {
                fl
            } else {
                fl + 1
            }
        }
    }
}

/// Rounds `v` to the grid `1/q`.
pub fn round_to_grid(v: &Ratio<i128>, q: i128) -> Ratio<i128> {
    Ratio::new(round_half_even(v.numer() * q, *v.denom()), q)
}

impl RoundingOracle<'_> {
    /// Works in integer units of `1/(qM)` when every finite input lies on
    /// the `1/q` grid. Returns `None` otherwise or on overflow.
    fn eval_grid(&self, x: &ExtVec<i128>, q: i128) -> Option<ExtVec<i128>> {
        let g = self.game;
        let m = g.denominator as i128;
        let qm = q.checked_mul(m)?;
        let mut xs: Vec<Option<i128>> = Vec::with_capacity(x.len());
        for e in x.iter() {
            xs.push(match e {
                Ext::NegInf => None,
                Ext::Fin(r) => {
                    let (f, rem) = q.div_rem(r.denom());
                    if !rem.is_zero() {
                        return None;
                    }
                    Some(r.numer().checked_mul(f)?)
                }
            });
        }
        let mut nat: Vec<Option<i128>> = Vec::with_capacity(g.nat_adj.len());
        for adj in &g.nat_adj {
            let mut acc: Option<i128> = Some(0);
            for &(l, p) in adj {
                match xs[l] {
                    None => {
                        acc = None;
                        break;
                    }
                    Some(v) => acc = Some(acc?.checked_add(v.checked_mul(p as i128)?)?),
                }
            }
            nat.push(acc);
        }
        let mut maxv: Vec<Option<i128>> = Vec::with_capacity(g.max_adj.len());
        for adj in &g.max_adj {
            let mut best: Option<i128> = None;
            for &(k, b) in adj {
                if let Some(v) = nat[k] {
                    let c = v.checked_add((b as i128).checked_mul(qm)?)?;
                    best = Some(best.map_or(c, |bb: i128| bb.max(c)));
                }
            }
            maxv.push(best);
        }
        let mut out = Vec::with_capacity(g.n());
        for adj in &g.min_adj {
            let mut worst: Option<Option<i128>> = None;
            for &(i, a) in adj {
                let c = match maxv[i] {
                    None => None,
                    Some(v) => Some(v.checked_sub((a as i128).checked_mul(qm)?)?),
                };
                worst = Some(match worst {
                    None => c,
                    Some(None) => None,
                    Some(Some(w)) => c.map(|c| w.min(c)),
                });
            }
            out.push(match worst.expect("min state has a move") {
                None => Ext::NegInf,
                Some(v) => Ext::Fin(Ratio::new(round_half_even(v, m), q)),
            });
        }
        Some(ExtVec(out))
    }
}

impl ShapleyOracle<i128> for RoundingOracle<'_> {
    fn dim(&self) -> usize {
        self.game.n()
    }

    fn eval(&self, x: &ExtVec<i128>, eps: &Ratio<i128>) -> ExtVec<i128> {
        assert_eq!(x.len(), self.game.n(), "oracle input length");
        if !eps.is_positive() {
            return self.game.eval_unchecked(x);
        }
        let q = self.grid(eps);
        if let Some(y) = self.eval_grid(x, q) {
            return y;
        }
        let y = self.game.eval_unchecked(x);
        ExtVec(
            y.0.into_iter()
                .map(|e| match e {
                    Ext::Fin(v) => Ext::Fin(round_to_grid(&v, q)),
                    Ext::NegInf => Ext::NegInf,
                })
                .collect(),
        )
    }

    fn supports_exact(&self) -> bool {
        true
    }
}
