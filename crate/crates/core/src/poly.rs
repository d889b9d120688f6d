//! Exact univariate polynomials over the rationals and a Sturm-sequence
//! bisection root finder for characteristic polynomials.
//!
//! This route never forms a symmetrizer or runs an eigensolver, so it serves
//! as an independent cross-check for the spectra module.

use num_traits::{One, Signed, Zero};

use crate::determinants::charpoly_eval;
use crate::matrix::Matrix;
use crate::scalar::{Rational, Scalar};

/// Dense coefficients, lowest degree first, no trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly(Vec<Rational>);

impl Poly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly(coeffs)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn lead(&self) -> Rational {
        self.0.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        self.0
            .iter()
            .rev()
            .fold(Rational::zero(), |acc, c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.0
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, c)| c * Rational::from_i64(k as i64))
                .collect(),
        )
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let n = self.0.len().max(other.0.len());
        Poly::new(
            (0..n)
                .map(|k| {
                    let a = self.0.get(k).cloned().unwrap_or_else(Rational::zero);
                    let b = other.0.get(k).cloned().unwrap_or_else(Rational::zero);
                    a - b
                })
                .collect(),
        )
    }

    fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|c| -c).collect())
    }

    fn monic(&self) -> Poly {
        let lead = self.lead();
        Poly(self.0.iter().map(|c| c / &lead).collect())
    }

    /// Quotient and remainder. Panics on division by zero.
    pub fn div_rem(&self, divisor: &Poly) -> (Poly, Poly) {
        assert!(!divisor.is_zero(), "polynomial division by zero");
        let mut rem = self.0.clone();
        let dlead = divisor.lead();
        let dd = divisor.degree();
        if self.0.len() < divisor.0.len() {
            return (Poly::new(vec![]), self.clone());
        }
        let mut quot = vec![Rational::zero(); self.0.len() - divisor.0.len() + 1];
        for shift in (0..quot.len()).rev() {
            let factor = &rem[shift + dd] / &dlead;
            if factor.is_zero() {
                continue;
            }
            for (k, c) in divisor.0.iter().enumerate() {
                rem[shift + k] = &rem[shift + k] - &factor * c;
            }
            quot[shift] = factor;
        }
        (Poly::new(quot), Poly::new(rem))
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly) -> Poly {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        if a.is_zero() {
            a
        } else {
            a.monic()
        }
    }
}

/// Exact coefficients of `det(A - λI)` by interpolating its values at
/// `λ = 0, 1, ..., m` (Newton divided differences).
pub fn charpoly_coefficients(a: &Matrix<Rational>) -> Poly {
    let m = a.order();
    let xs: Vec<Rational> = (0..=m as i64).map(Rational::from_i64).collect();
    let mut table: Vec<Rational> = xs.iter().map(|x| charpoly_eval(a, x)).collect();
    for level in 1..=m {
        for i in (level..=m).rev() {
            table[i] = (&table[i] - &table[i - 1]) / (&xs[i] - &xs[i - level]);
        }
    }
    // Horner-style expansion of the Newton form.
    let mut acc = Poly::new(vec![table[m].clone()]);
    for k in (0..m).rev() {
        let mut shifted = vec![Rational::zero(); acc.0.len() + 1];
        for (d, c) in acc.0.iter().enumerate() {
            shifted[d + 1] = &shifted[d + 1] + c;
            shifted[d] = &shifted[d] - c * &xs[k];
        }
        shifted[0] = &shifted[0] + &table[k];
        acc = Poly::new(shifted);
    }
    acc
}

/// Square-free decomposition `p = c · f_1 · f_2^2 · f_3^3 ...` (Yun).
/// Returns the non-constant `(f_i, i)` pairs.
pub fn square_free_factors(p: &Poly) -> Vec<(Poly, usize)> {
    let mut out = Vec::new();
    if p.degree() == 0 {
        return out;
    }
    let dp = p.derivative();
    let a0 = p.gcd(&dp);
    let mut b = p.div_rem(&a0).0;
    let c = dp.div_rem(&a0).0;
    let mut d = c.sub(&b.derivative());
    let mut mult = 1;
    while b.degree() > 0 {
        let a = b.gcd(&d);
        b = b.div_rem(&a).0;
        let c = d.div_rem(&a).0;
        d = c.sub(&b.derivative());
        if a.degree() > 0 {
            out.push((a, mult));
        }
        mult += 1;
    }
    out
}

pub struct SturmChain(Vec<Poly>);

impl SturmChain {
    pub fn new(p: &Poly) -> Self {
        let mut chain = vec![p.clone(), p.derivative()];
        while !chain.last().expect("non-empty").is_zero() {
            let n = chain.len();
            let r = chain[n - 2].div_rem(&chain[n - 1]).1.neg();
            chain.push(r);
        }
        chain.pop();
        SturmChain(chain)
    }

    pub fn sign_changes(&self, x: &Rational) -> usize {
        let mut changes = 0;
        let mut prev: Option<bool> = None;
        for p in &self.0 {
            let v = p.eval(x);
            if v.is_zero() {
                continue;
            }
            let pos = v.is_positive();
            if prev.is_some_and(|q| q != pos) {
                changes += 1;
            }
            prev = Some(pos);
        }
        changes
    }

    /// Distinct roots in `(lo, hi]`.
    pub fn count(&self, lo: &Rational, hi: &Rational) -> usize {
        self.sign_changes(lo).saturating_sub(self.sign_changes(hi))
    }
}

/// Real roots of a characteristic polynomial found by Sturm bisection.
#[derive(Clone, Debug)]
pub struct RootReport {
    /// Sorted, repeated according to multiplicity.
    pub roots: Vec<f64>,
    /// Degree of the polynomial (the matrix order).
    pub degree: usize,
}

impl RootReport {
    /// Every root of the degree-`m` polynomial is real.
    pub fn all_real(&self) -> bool {
        self.roots.len() == self.degree
    }
}

fn midpoint(lo: &Rational, hi: &Rational) -> Rational {
    (lo + hi) / Rational::from_i64(2)
}

struct Bracket {
    lo: Rational,
    hi: Rational,
    factor: usize,
}

/// Brackets every real eigenvalue of `A` inside the Gershgorin interval and
/// bisects with Sturm counts until each bracket is narrower than
/// `1e-12 * spread`.
pub fn charpoly_real_roots(a: &Matrix<Rational>) -> RootReport {
    let p = charpoly_coefficients(a);
    let bound = a
        .rows()
        .map(|row| row.iter().fold(Rational::zero(), |acc, v| acc + v.abs()))
        .fold(Rational::zero(), |acc, s| if s > acc { s } else { acc })
        + Rational::one();

    let factors = square_free_factors(&p);
    let chains: Vec<SturmChain> = factors.iter().map(|(f, _)| SturmChain::new(f)).collect();
    let mut brackets = Vec::new();
    for (factor, chain) in chains.iter().enumerate() {
        let mut stack = vec![(-bound.clone(), bound.clone())];
        while let Some((lo, hi)) = stack.pop() {
            match chain.count(&lo, &hi) {
                0 => {}
                1 => brackets.push(Bracket { lo, hi, factor }),
                _ => {
                    let mid = midpoint(&lo, &hi);
                    stack.push((mid.clone(), hi));
                    stack.push((lo, mid));
                }
            }
        }
    }

    let interval = 2.0 * bound.to_f64();
    for b in brackets.iter_mut() {
        refine(&chains[b.factor], b, 1e-6 * interval);
    }
    let mids: Vec<f64> = brackets.iter().map(|b| midpoint(&b.lo, &b.hi).to_f64()).collect();
    let spread = mids.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - mids.iter().cloned().fold(f64::INFINITY, f64::min);
    let width = 1e-12 * if spread > 0.0 { spread } else { interval };
    for b in brackets.iter_mut() {
        refine(&chains[b.factor], b, width);
    }

    let mut roots: Vec<f64> = brackets
        .iter()
        .flat_map(|b| std::iter::repeat_n(midpoint(&b.lo, &b.hi).to_f64(), factors[b.factor].1))
        .collect();
    roots.sort_by(f64::total_cmp);
    RootReport {
        roots,
        degree: a.order(),
    }
}

fn refine(chain: &SturmChain, b: &mut Bracket, width: f64) {
    while (&b.hi - &b.lo).to_f64() > width {
        let mid = midpoint(&b.lo, &b.hi);
        if chain.count(&b.lo, &mid) == 1 {
            b.hi = mid;
        } else {
            b.lo = mid;
        }
    }
}
