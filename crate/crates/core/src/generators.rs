//! Seeded construction of symmetrizable matrices and of corrupted variants
//! for negative tests.
//!
//! A symmetrizable matrix is drawn as `A = D^{-1} S` with `S` symmetric and
//! `D` positive diagonal, so `D·A = S` holds exactly. Randomness comes from
//! ChaCha8 with one stream per purpose: entry draws use stream 1 and
//! corruption choices stream 2, so the two never perturb each other.

use std::collections::VecDeque;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::matrix::{DenseMatrix, Matrix};
use crate::scalar::{Rational, Regime, Scalar};

const ENTRY_STREAM: u64 = 1;
const CORRUPTION_STREAM: u64 = 2;

#[derive(Clone, Debug, PartialEq)]
pub enum Pattern {
    Dense,
    /// Nonzero entries only where `|i - j| <= w`.
    Banded(usize),
    PaperExample { a: Rational, b: Rational, c: Rational },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Corruption {
    SignFlip,
    CycleBreak,
    OneSidedZero,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GenSpec {
    pub order: usize,
    pub pattern: Pattern,
    pub seed: u64,
    pub regime: Regime,
    /// Entries are drawn from `±1..=B` over denominators `1..=B`.
    pub magnitude: u32,
}

impl GenSpec {
    pub fn dense(order: usize, seed: u64) -> Self {
        Self {
            order,
            pattern: Pattern::Dense,
            seed,
            regime: Regime::ExactRational,
            magnitude: 5,
        }
    }

    pub fn banded(order: usize, bandwidth: usize, seed: u64) -> Self {
        Self {
            pattern: Pattern::Banded(bandwidth),
            ..Self::dense(order, seed)
        }
    }

    pub fn with_regime(mut self, regime: Regime) -> Self {
        self.regime = regime;
        self
    }

    pub fn with_magnitude(mut self, magnitude: u32) -> Self {
        self.magnitude = magnitude;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::InvalidSpec("order must be at least 1".into()));
        }
        if self.magnitude == 0 {
            return Err(Error::InvalidSpec("magnitude must be at least 1".into()));
        }
        match &self.pattern {
            Pattern::Dense => {}
            Pattern::Banded(w) => {
                if *w == 0 || *w >= self.order {
                    return Err(Error::InvalidSpec(format!(
                        "bandwidth {w} must satisfy 1 <= w < {}",
                        self.order
                    )));
                }
            }
            Pattern::PaperExample { .. } => {
                if self.order != 3 {
                    return Err(Error::InvalidSpec("the paper pattern has order 3".into()));
                }
            }
        }
        Ok(())
    }

    fn in_pattern(&self, r: usize, c: usize) -> bool {
        match &self.pattern {
            Pattern::Banded(w) => r.abs_diff(c) <= *w,
            _ => true,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let pattern = match &self.pattern {
            Pattern::Dense => json!("dense"),
            Pattern::Banded(w) => json!(format!("banded:{w}")),
            Pattern::PaperExample { a, b, c } => {
                json!({"paper": [a.to_json(), b.to_json(), c.to_json()]})
            }
        };
        json!({
            "order": self.order,
            "pattern": pattern,
            "seed": self.seed,
            "regime": self.regime,
            "magnitude": self.magnitude,
        })
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn draw_rational(rng: &mut impl Rng, bound: u32, allow_zero: bool, positive: bool) -> Rational {
    let b = bound as i64;
    let numer = if allow_zero {
        rng.random_range(-b..=b)
    } else {
        let v = rng.random_range(1..=b);
        if positive || rng.random_bool(0.5) {
            v
        } else {
            -v
        }
    };
    let denom = rng.random_range(1..=b);
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

/// `[[a, -3, 1], [-6, b, 4], [5, 10, c]]`, symmetrizable for every diagonal.
pub fn gen_paper_example<T: Scalar>(a: T, b: T, c: T) -> Matrix<T> {
    let i = T::from_i64;
    Matrix::from_rows(vec![
        vec![a, i(-3), i(1)],
        vec![i(-6), b, i(4)],
        vec![i(5), i(10), c],
    ])
    .expect("fixed 3x3 shape")
}

/// Exact-regime draw, regardless of `spec.regime`.
pub fn gen_symmetrizable_exact(spec: &GenSpec) -> Result<Matrix<Rational>> {
    spec.validate()?;
    if let Pattern::PaperExample { a, b, c } = &spec.pattern {
        return Ok(gen_paper_example(a.clone(), b.clone(), c.clone()));
    }
    let n = spec.order;
    let mut rng = rng_for(spec.seed, ENTRY_STREAM);
    let mut s = vec![vec![Rational::from_i64(0); n]; n];
    for r in 0..n {
        for c in r..n {
            if !spec.in_pattern(r, c) {
                continue;
            }
            let v = draw_rational(&mut rng, spec.magnitude, r == c, false);
            s[r][c] = v.clone();
            s[c][r] = v;
        }
    }
    let d: Vec<Rational> = (0..n)
        .map(|_| draw_rational(&mut rng, spec.magnitude, false, true))
        .collect();
    Ok(Matrix::from_fn(n, |r, c| &s[r][c] / &d[r]))
}

pub fn gen_symmetrizable(spec: &GenSpec) -> Result<DenseMatrix> {
    DenseMatrix::Exact(gen_symmetrizable_exact(spec)?).into_regime(spec.regime)
}

fn nonzero_off_diagonal(a: &Matrix<Rational>) -> Vec<(usize, usize)> {
    let n = a.order();
    (0..n)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .filter(|&(r, c)| r != c && !num_traits::Zero::is_zero(a.at(r, c)))
        .collect()
}

/// Whether `u` and `v` stay connected in the support graph without the
/// edge `{u, v}`, i.e. whether that edge lies on a cycle.
fn edge_on_cycle(a: &Matrix<Rational>, u: usize, v: usize) -> bool {
    let n = a.order();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([u]);
    seen[u] = true;
    while let Some(x) = queue.pop_front() {
        for y in 0..n {
            if y == x || seen[y] || num_traits::Zero::is_zero(a.at(x, y)) {
                continue;
            }
            if (x == u && y == v) || (x == v && y == u) {
                continue;
            }
            if y == v {
                return true;
            }
            seen[y] = true;
            queue.push_back(y);
        }
    }
    false
}

/// Exact-regime corrupted draw, regardless of `spec.regime`.
pub fn gen_violation_exact(spec: &GenSpec, kind: Corruption) -> Result<Matrix<Rational>> {
    let mut a = gen_symmetrizable_exact(spec)?;
    let mut rng = rng_for(spec.seed, CORRUPTION_STREAM);
    let mut candidates = nonzero_off_diagonal(&a);
    if kind == Corruption::CycleBreak {
        candidates.retain(|&(r, c)| edge_on_cycle(&a, r, c));
        if candidates.is_empty() {
            return Err(Error::PatternAcyclic);
        }
    }
    if candidates.is_empty() {
        return Err(Error::InvalidSpec(
            "no off-diagonal entry available to corrupt".into(),
        ));
    }
    let (r, c) = candidates[rng.random_range(0..candidates.len())];
    let entry = a.at_mut(r, c);
    *entry = match kind {
        Corruption::SignFlip => -entry.clone(),
        Corruption::OneSidedZero => Rational::from_i64(0),
        Corruption::CycleBreak => entry.clone() * Rational::from_i64(2),
    };
    Ok(a)
}

pub fn gen_violation(spec: &GenSpec, kind: Corruption) -> Result<DenseMatrix> {
    DenseMatrix::Exact(gen_violation_exact(spec, kind)?).into_regime(spec.regime)
}
