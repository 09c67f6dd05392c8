//! Small exact linear algebra: Gaussian elimination over ℚ, Bareiss rank and
//! determinant-free characteristic polynomials, Sturm root counting.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Solves `A x = b` over ℚ. Returns `None` when `A` is singular.
pub fn solve(a: &[Vec<BigRational>], b: &[BigRational]) -> Option<Vec<BigRational>> {
    let n = a.len();
    let mut m: Vec<Vec<BigRational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, piv);
        let p = m[col][col].clone();
        for k in col..=n {
            m[col][k] = &m[col][k] / &p;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                for k in col..=n {
                    let d = &f * &m[col][k];
                    m[r][k] = &m[r][k] - d;
                }
            }
        }
    }
    Some(m.into_iter().map(|mut r| r.pop().expect("augmented column")).collect())
}

/// Rank of an integer matrix by fraction-free (Bareiss) elimination.
pub fn rank(a: &[Vec<BigInt>]) -> usize {
    let rows = a.len();
    if rows == 0 {
        return 0;
    }
    let cols = a[0].len();
    let mut m: Vec<Vec<BigInt>> = a.to_vec();
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in (r + 1)..rows {
            for j in (c + 1)..cols {
                let v = &m[r][c] * &m[i][j] - &m[i][c] * &m[r][j];
                m[i][j] = v / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        r += 1;
    }
    r
}

/// Dense polynomial with integer coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly(pub Vec<BigInt>);

impl Poly {
    pub fn degree(&self) -> usize {
        self.0.iter().rposition(|c| !c.is_zero()).unwrap_or(0)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + BigRational::from_integer(c.clone());
        }
        acc
    }
}

/// `det(xI − A)` by the Faddeev–LeVerrier recursion over ℚ.
pub fn char_poly(a: &[Vec<i64>]) -> Poly {
    let n = a.len();
    let am: Vec<Vec<BigRational>> = a
        .iter()
        .map(|r| r.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect())
        .collect();
    let mut coeffs = vec![BigRational::zero(); n + 1];
    coeffs[n] = BigRational::one();
    let mut mk: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = vec![vec![BigRational::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s = BigRational::zero();
                for l in 0..n {
                    if !am[i][l].is_zero() && !mk[l][j].is_zero() {
                        s += &am[i][l] * &mk[l][j];
                    }
                }
                if i == j {
                    s += &coeffs[n - k + 1];
                }
                next[i][j] = s;
            }
        }
        mk = next;
        // c_{n-k} = −tr(A M_k)/k
        let mut tr = BigRational::zero();
        for i in 0..n {
            for l in 0..n {
                tr += &am[i][l] * &mk[l][i];
            }
        }
        coeffs[n - k] = -tr / BigRational::from_integer(BigInt::from(k as i64));
    }
    Poly(coeffs.into_iter().map(|c| c.to_integer()).collect())
}

fn poly_rem(a: &[BigRational], b: &[BigRational]) -> Vec<BigRational> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lead = b[db].clone();
    while r.len() > db && !r.is_empty() {
        let dr = r.len() - 1;
        let f = &r[dr] / &lead;
        if !f.is_zero() {
            for i in 0..=db {
                let d = &f * &b[i];
                r[dr - db + i] = &r[dr - db + i] - d;
            }
        }
        r.pop();
        while r.last().is_some_and(|c| c.is_zero()) {
            r.pop();
        }
    }
    r
}

fn sign_changes(seq: &[Vec<BigRational>], x: &BigRational) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for p in seq {
        let mut acc = BigRational::zero();
        for c in p.iter().rev() {
            acc = acc * x + c;
        }
        let s = if acc.is_positive() {
            1
        } else if acc.is_negative() {
            -1
        } else {
            0
        };
        if s != 0 {
            if last != 0 && s != last {
                count += 1;
            }
            last = s;
        }
    }
    count
}

fn to_rat(p: &Poly) -> Vec<BigRational> {
    p.0[..=p.degree()].iter().map(|c| BigRational::from_integer(c.clone())).collect()
}

/// Primitive integer polynomial with positive leading coefficient.
fn primitive(r: &[BigRational]) -> Poly {
    let lcm = r.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let mut ints: Vec<BigInt> = r.iter().map(|c| (c * BigRational::from_integer(lcm.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if !g.is_zero() {
        ints.iter_mut().for_each(|c| *c = &*c / &g);
    }
    if ints.last().is_some_and(|c| c.is_negative()) {
        ints.iter_mut().for_each(|c| *c = -&*c);
    }
    if ints.is_empty() {
        ints.push(BigInt::zero());
    }
    Poly(ints)
}

impl Poly {
    /// Greatest common divisor over ℚ, made primitive.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let mut a = to_rat(self);
        let mut b = to_rat(other);
        if b.iter().all(|c| c.is_zero()) {
            return primitive(&a);
        }
        loop {
            let r = poly_rem(&a, &b);
            if r.is_empty() {
                return primitive(&b);
            }
            a = b;
            b = r;
        }
    }
}

/// Number of distinct real roots of `p` in `(lo, hi]`, by Sturm's theorem.
pub fn count_roots(p: &Poly, lo: &BigRational, hi: &BigRational) -> usize {
    let d = p.degree();
    let p0 = to_rat(p);
    if d == 0 {
        return 0;
    }
    let p1: Vec<BigRational> = (1..=d)
        .map(|i| &p0[i] * BigRational::from_integer(BigInt::from(i as i64)))
        .collect();
    let mut seq = vec![p0, p1];
    loop {
        let k = seq.len();
        let r = poly_rem(&seq[k - 2], &seq[k - 1]);
        if r.is_empty() {
            break;
        }
        seq.push(r.into_iter().map(|c| -c).collect());
    }
    sign_changes(&seq, lo) - sign_changes(&seq, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn solve_small_system() {
        let a = vec![vec![q(2, 1), q(1, 1)], vec![q(1, 1), q(3, 1)]];
        let x = solve(&a, &[q(3, 1), q(5, 1)]).unwrap();
        assert_eq!(x, vec![q(4, 5), q(7, 5)]);
        let s = vec![vec![q(1, 1), q(2, 1)], vec![q(2, 1), q(4, 1)]];
        assert!(solve(&s, &[q(1, 1), q(1, 1)]).is_none());
    }

    #[test]
    fn rank_examples() {
        let m = |v: Vec<Vec<i64>>| -> Vec<Vec<BigInt>> {
            v.into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect()
        };
        assert_eq!(rank(&m(vec![vec![1, 1], vec![1, 1]])), 1);
        assert_eq!(rank(&m(vec![vec![10, 10], vec![1, 0]])), 2);
        assert_eq!(rank(&m(vec![vec![0, 0], vec![0, 0]])), 0);
        assert_eq!(rank(&m(vec![vec![1, 2, 3], vec![2, 4, 6], vec![1, 0, 1]])), 2);
        assert_eq!(rank(&m(vec![vec![0, 1, 0], vec![0, 0, 1], vec![0, 0, 0]])), 2);
    }

    #[test]
    fn char_poly_and_sturm() {
        // x² − 10x − 10
        let p = char_poly(&[vec![10, 10], vec![1, 0]]);
        assert_eq!(p.0, vec![BigInt::from(-10), BigInt::from(-10), BigInt::from(1)]);
        assert_eq!(count_roots(&p, &q(10, 1), &q(11, 1)), 1);
        assert_eq!(count_roots(&p, &q(11, 1), &q(100, 1)), 0);
        assert_eq!(count_roots(&p, &q(-100, 1), &q(100, 1)), 2);
        // (x − 1)² has one distinct root
        let p = char_poly(&[vec![1, 0], vec![0, 1]]);
        assert_eq!(count_roots(&p, &q(0, 1), &q(2, 1)), 1);
        let p = char_poly(&[vec![0, 1, 0], vec![0, 0, 1], vec![1, 0, 0]]);
        assert_eq!(p.eval(&q(1, 1)), q(0, 1));
    }

    #[test]
    fn polynomial_gcd() {
        let p = |v: &[i64]| Poly(v.iter().map(|&c| BigInt::from(c)).collect());
        // (x − 1)(x − 2) and (x − 1)(x + 3)
        assert_eq!(p(&[2, -3, 1]).gcd(&p(&[-3, 2, 1])), p(&[-1, 1]));
        assert_eq!(p(&[2, -3, 1]).gcd(&p(&[1, 1])).degree(), 0);
        assert_eq!(p(&[-4, 0, 2]).gcd(&p(&[0])), p(&[-2, 0, 1]));
    }
}
