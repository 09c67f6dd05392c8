//! Perron roots of nonnegative irreducible integer matrices, bracketed by
//! Collatz–Wielandt quotients of power iterates.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use thiserror::Error;

use crate::linalg::{char_poly, count_roots, Poly};
use crate::numeric::RationalInterval;

pub type Matrix = Vec<Vec<i64>>;

/// Iteration cap of the power method.
pub const MAX_ITERATIONS: u64 = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PerronError {
    #[error("matrix must be square, nonempty and nonnegative; tolerance positive")]
    Shape,
    #[error("zero matrix")]
    Zero,
    #[error("matrix is reducible")]
    Reducible,
    #[error("bracket still wider than the tolerance after {0} iterations")]
    NoConvergence(u64),
}

fn reaches_all(a: &[Vec<i64>], transpose: bool) -> bool {
    let n = a.len();
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(i) = stack.pop() {
        for j in 0..n {
            let e = if transpose { a[j][i] } else { a[i][j] };
            if e > 0 && !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

pub fn is_irreducible(a: &[Vec<i64>]) -> bool {
    !a.is_empty() && reaches_all(a, false) && reaches_all(a, true)
}

/// `[lo, hi] ∋ ρ(A)` with `hi − lo ≤ tol`, where `lo` and `hi` are the
/// smallest and largest of `(Ax)_i / x_i` at an iterate `x` of `A + I`.
pub fn perron_root(a: &[Vec<i64>], tol: &BigRational) -> Result<RationalInterval<BigInt>, PerronError> {
    let n = a.len();
    if n == 0 || !tol.is_positive() || a.iter().any(|r| r.len() != n || r.iter().any(|&v| v < 0)) {
        return Err(PerronError::Shape);
    }
    if a.iter().all(|r| r.iter().all(|&v| v == 0)) {
        return Err(PerronError::Zero);
    }
    if !is_irreducible(a) {
        return Err(PerronError::Reducible);
    }
    // Any positive x gives a valid bracket, so iterates are trimmed to a
    // fixed number of bits.
    let tol_bits = (tol.denom().bits() as i64 - tol.numer().bits() as i64).max(0) as u64;
    let keep = 64 + 2 * tol_bits + 2 * n as u64;
    let mut x = vec![BigInt::one(); n];
    for _ in 0..MAX_ITERATIONS {
        let ax: Vec<BigInt> = a
            .iter()
            .map(|row| row.iter().zip(&x).filter(|(v, _)| **v != 0).map(|(&v, xj)| xj * v).sum())
            .collect();
        let (mut lo, mut hi) = (0, 0);
        for i in 1..n {
            if &ax[i] * &x[lo] < &ax[lo] * &x[i] {
                lo = i;
            }
            if &ax[i] * &x[hi] > &ax[hi] * &x[i] {
                hi = i;
            }
        }
        let gap = &ax[hi] * &x[lo] - &ax[lo] * &x[hi];
        if gap * tol.denom() <= tol.numer() * &x[hi] * &x[lo] {
            return Ok(RationalInterval {
                lo: BigRational::new(ax[lo].clone(), x[lo].clone()),
                hi: BigRational::new(ax[hi].clone(), x[hi].clone()),
            });
        }
        x = x.iter().zip(ax).map(|(xi, yi)| xi + yi).collect();
        let bits = x.iter().map(|v| v.bits()).max().unwrap_or(0);
        if bits > keep {
            let s = bits - keep;
            for v in x.iter_mut() {
                *v = (&*v >> s).max(BigInt::one());
            }
        }
    }
    Err(PerronError::NoConvergence(MAX_ITERATIONS))
}

/// A Perron root known through its matrix and a bracket that can be
/// narrowed on demand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerronRoot {
    pub matrix: Matrix,
    pub bracket: RationalInterval<BigInt>,
}

impl PerronRoot {
    pub fn new(matrix: Matrix, tol: &BigRational) -> Result<Self, PerronError> {
        let bracket = perron_root(&matrix, tol)?;
        Ok(PerronRoot { matrix, bracket })
    }

    /// Narrows the bracket to width at most `tol`; never widens it.
    pub fn refine(&mut self, tol: &BigRational) -> Result<(), PerronError> {
        if self.bracket.width() <= *tol {
            return Ok(());
        }
        let b = perron_root(&self.matrix, tol)?;
        self.bracket = RationalInterval {
            lo: b.lo.max(self.bracket.lo.clone()),
            hi: b.hi.min(self.bracket.hi.clone()),
        };
        Ok(())
    }

    pub fn char_poly(&self) -> Poly {
        char_poly(&self.matrix)
    }
}

/// Exact comparison. Brackets are narrowed until they separate; once each
/// characteristic polynomial has a single root in the joint hull, the roots
/// are equal iff the gcd of the two polynomials vanishes there.
pub fn compare_roots(a: &mut PerronRoot, b: &mut PerronRoot) -> Result<Ordering, PerronError> {
    let (pa, pb) = (a.char_poly(), b.char_poly());
    let g = pa.gcd(&pb);
    let mut tol = BigRational::new(BigInt::one(), BigInt::from(1u64 << 40));
    loop {
        if a.bracket.hi < b.bracket.lo {
            return Ok(Ordering::Less);
        }
        if b.bracket.hi < a.bracket.lo {
            return Ok(Ordering::Greater);
        }
        let lo = a.bracket.lo.clone().min(b.bracket.lo.clone()) - &tol;
        let hi = a.bracket.hi.clone().max(b.bracket.hi.clone());
        if count_roots(&pa, &lo, &hi) == 1 && count_roots(&pb, &lo, &hi) == 1
            && g.degree() > 0 && count_roots(&g, &lo, &hi) == 1 {
                return Ok(Ordering::Equal);
            }
        tol = &tol * &tol;
        a.refine(&tol)?;
        b.refine(&tol)?;
    }
}
