//! Determinant engines and the determinant identities used by the
//! interlacing argument.
//!
//! Three independent routes compute `det(A)`: memoized Laplace expansion
//! ([`det_cofactor`], test oracle), fraction-free Bareiss elimination
//! ([`det_bareiss`]) and Dodgson condensation ([`det_dodgson`]). Floats use
//! partial pivoting ([`det_pivoted`]).

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::{IndexSelection, Matrix};
use crate::scalar::{serialize_scalar, Rational, Regime, Scalar};

/// Largest order accepted by [`det_cofactor`].
pub const COFACTOR_MAX_ORDER: usize = 8;

/// Relative threshold below which a float pivot counts as zero.
pub const FLOAT_PIVOT_TOL: f64 = 1e-13;

/// Relative tolerance for the float check of the condensation identity.
pub const DODGSON_FLOAT_TOL: f64 = 1e-8;

/// Determinant in `T`'s own regime.
pub fn determinant<T: Scalar>(a: &Matrix<T>) -> T {
    T::determinant(a)
}

/// Laplace expansion along the first row, memoized over the set of columns
/// already consumed by earlier rows.
pub fn det_cofactor<T: Scalar>(a: &Matrix<T>) -> Result<T> {
    let n = a.order();
    if n > COFACTOR_MAX_ORDER {
        return Err(Error::OrderTooLarge {
            order: n,
            max: COFACTOR_MAX_ORDER,
        });
    }
    let mut memo = HashMap::new();
    Ok(expand(a, 0, 0, &mut memo))
}

fn expand<T: Scalar>(a: &Matrix<T>, row: usize, used: u32, memo: &mut HashMap<u32, T>) -> T {
    let n = a.order();
    if row == n {
        return T::one();
    }
    if let Some(v) = memo.get(&used) {
        return v.clone();
    }
    let mut total = T::zero();
    let mut position = 0;
    for c in 0..n {
        if used & (1 << c) != 0 {
            continue;
        }
        let entry = a.at(row, c);
        if !entry.is_zero() {
            let minor = expand(a, row + 1, used | (1 << c), memo);
            let term = entry.clone() * minor;
            if position % 2 == 0 {
                total = total + term;
            } else {
                total = total - term;
            }
        }
        position += 1;
    }
    memo.insert(used, total.clone());
    total
}

/// Exact determinant by fraction-free elimination. Each row is first scaled
/// to integers by the lcm of its denominators; all later divisions are exact.
pub fn det_bareiss(a: &Matrix<Rational>) -> Rational {
    let mut scale = BigInt::one();
    let rows: Vec<Vec<BigInt>> = a
        .rows()
        .map(|row| {
            let lcm = row
                .iter()
                .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
            scale *= &lcm;
            row.iter()
                .map(|v| v.numer() * (&lcm / v.denom()))
                .collect()
        })
        .collect();
    Rational::new(bareiss_integer(rows), scale)
}

fn bareiss_integer(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n.saturating_sub(1) {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    negate = !negate;
                }
                None => return BigInt::zero(),
            }
        }
        let (top, bottom) = m.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for row in bottom.iter_mut() {
            for j in k + 1..n {
                let v = &row[j] * &pivot_row[k] - &row[k] * &pivot_row[j];
                row[j] = v / &prev;
            }
            row[k] = BigInt::zero();
        }
        prev = pivot_row[k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        -det
    } else {
        det
    }
}

/// Gaussian elimination with partial pivoting. A pivot below
/// `1e-13 * ||A||_inf` makes the determinant exactly zero.
pub fn det_pivoted(a: &Matrix<f64>) -> f64 {
    let n = a.order();
    let tol = FLOAT_PIVOT_TOL * a.inf_norm();
    let mut m = a.to_rows();
    let mut det = 1.0;
    for k in 0..n {
        let (p, pmax) = (k..n)
            .map(|r| (r, m[r][k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax <= tol {
            return 0.0;
        }
        if p != k {
            m.swap(p, k);
            det = -det;
        }
        let pivot = m[k][k];
        det *= pivot;
        for r in k + 1..n {
            let factor = m[r][k] / pivot;
            if factor != 0.0 {
                for c in k + 1..n {
                    m[r][c] -= factor * m[k][c];
                }
            }
        }
    }
    det
}

/// Where condensation met a zero divisor: 1-based layer index (layer 0 is
/// the input) and the 1-based position of the zero in that layer.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ZeroPivot {
    pub layer: usize,
    pub row: usize,
    pub col: usize,
}

#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct CondensationTrace<T: Scalar> {
    /// `layers[t]` has order `m - t`; `layers[0]` is the input.
    pub layers: Vec<Matrix<T>>,
    pub fallback_used: bool,
    pub fallback_reason: Option<ZeroPivot>,
}

/// Dodgson condensation. Layer `t + 1` holds the connected 2x2 minors of
/// layer `t`, each divided by the matching interior entry of layer `t - 1`.
/// A zero divisor stops condensation and the value comes from the regime's
/// elimination engine instead.
pub fn det_dodgson<T: Scalar>(a: &Matrix<T>) -> (T, CondensationTrace<T>) {
    let mut layers = vec![a.clone()];
    while layers.last().is_some_and(|l| l.order() > 1) {
        let t = layers.len() - 1;
        let cur = &layers[t];
        if t >= 1 {
            let before = &layers[t - 1];
            let inner = before.order() - 2;
            for r in 0..inner {
                for c in 0..inner {
                    if before.at(r + 1, c + 1).is_zero() {
                        let trace = CondensationTrace {
                            layers,
                            fallback_used: true,
                            fallback_reason: Some(ZeroPivot {
                                layer: t - 1,
                                row: r + 2,
                                col: c + 2,
                            }),
                        };
                        return (T::determinant(a), trace);
                    }
                }
            }
        }
        let n = cur.order() - 1;
        let next = Matrix::from_fn(n, |r, c| {
            let minor = cur.at(r, c).clone() * cur.at(r + 1, c + 1).clone()
                - cur.at(r, c + 1).clone() * cur.at(r + 1, c).clone();
            if t >= 1 {
                minor / layers[t - 1].at(r + 1, c + 1).clone()
            } else {
                minor
            }
        });
        layers.push(next);
    }
    let det = layers.last().expect("at least the input layer").at(0, 0).clone();
    (
        det,
        CondensationTrace {
            layers,
            fallback_used: false,
            fallback_reason: None,
        },
    )
}

fn check_pair(order: usize, k: usize, l: usize) -> Result<()> {
    for idx in [k, l] {
        if idx == 0 || idx > order {
            return Err(Error::IndexOutOfRange { index: idx, order });
        }
    }
    if k == l {
        return Err(Error::InvalidIndex(format!("k and l must differ (both {k})")));
    }
    Ok(())
}

fn minor<T: Scalar>(a: &Matrix<T>, rows: &[usize], cols: &[usize]) -> Result<T> {
    let sub = a.mixed_submatrix(&IndexSelection::new(rows.iter().copied(), cols.iter().copied()))?;
    Ok(T::determinant(&sub))
}

/// Both sides of the condensation identity
/// `det(A) det(A[k,l|k,l]) = det(A[l|l]) det(A[k|k]) - det(A[l|k]) det(A[k|l])`,
/// where `A[r|c]` deletes rows `r` and columns `c`.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct DodgsonReport<T> {
    pub k: usize,
    pub l: usize,
    #[serde(serialize_with = "serialize_scalar")]
    pub lhs: T,
    #[serde(serialize_with = "serialize_scalar")]
    pub rhs: T,
    #[serde(serialize_with = "serialize_scalar")]
    pub residual: T,
    /// Largest magnitude among the products entering the identity.
    pub scale: f64,
}

impl<T: Scalar> DodgsonReport<T> {
    pub fn holds(&self) -> bool {
        match T::REGIME {
            Regime::ExactRational => self.residual.is_zero(),
            Regime::Float64 => self.residual.to_f64().abs() <= DODGSON_FLOAT_TOL * self.scale,
        }
    }
}

pub fn verify_dodgson_identity<T: Scalar>(a: &Matrix<T>, k: usize, l: usize) -> Result<DodgsonReport<T>> {
    let m = a.order();
    check_pair(m, k, l)?;
    if m <= 2 {
        return Err(Error::InvalidIndex(format!(
            "condensation identity needs order > 2, got {m}"
        )));
    }
    let full = T::determinant(a);
    let inner = minor(a, &[k, l], &[k, l])?;
    let drop_l = minor(a, &[l], &[l])?;
    let drop_k = minor(a, &[k], &[k])?;
    let mixed_lk = minor(a, &[l], &[k])?;
    let mixed_kl = minor(a, &[k], &[l])?;
    let lhs = full * inner;
    let diag = drop_l * drop_k;
    let cross = mixed_lk * mixed_kl;
    let scale = [&lhs, &diag, &cross]
        .iter()
        .map(|v| v.to_f64().abs())
        .fold(0.0, f64::max);
    let rhs = diag - cross;
    Ok(DodgsonReport {
        k,
        l,
        residual: lhs.clone() - rhs.clone(),
        lhs,
        rhs,
        scale,
    })
}

/// `det(A - λI)`.
pub fn charpoly_eval<T: Scalar>(a: &Matrix<T>, lambda: &T) -> T {
    T::determinant(&a.shifted(lambda))
}

/// The two sides of the cofactor balance `a_lk M_lk(λ) = a_kl M_kl(λ)`,
/// where `M_rc(λ)` is the minor of `A - λI` with row `r` and column `c`
/// deleted.
#[derive(Clone, Debug, Serialize)]
#[serde(bound = "T: Scalar")]
pub struct LemmaReport<T> {
    pub k: usize,
    pub l: usize,
    #[serde(serialize_with = "serialize_scalar")]
    pub lambda: T,
    #[serde(serialize_with = "serialize_scalar")]
    pub lhs: T,
    #[serde(serialize_with = "serialize_scalar")]
    pub rhs: T,
    #[serde(serialize_with = "serialize_scalar")]
    pub residual: T,
}

impl<T: Scalar> LemmaReport<T> {
    /// Exact zero for rationals, `|r| <= 1e-9 max(|lhs|, |rhs|)` for floats.
    pub fn holds(&self) -> bool {
        self.lhs.balanced_eq(&self.rhs)
    }
}

/// The shift is applied to the full matrix before deletion, so the minor
/// carries `-λ` only where the original row and column indices coincide:
/// row `k` and column `l` of `M_lk` get none.
pub fn verify_cofactor_symmetry<T: Scalar>(
    a: &Matrix<T>,
    k: usize,
    l: usize,
    lambda: &T,
) -> Result<LemmaReport<T>> {
    check_pair(a.order(), k, l)?;
    let shifted = a.shifted(lambda);
    let lhs = a.get(l, k).clone() * minor(&shifted, &[l], &[k])?;
    let rhs = a.get(k, l).clone() * minor(&shifted, &[k], &[l])?;
    Ok(LemmaReport {
        k,
        l,
        lambda: lambda.clone(),
        residual: lhs.clone() - rhs.clone(),
        lhs,
        rhs,
    })
}

/// Sign of a float with a dead zone: `|x| <= threshold` maps to 0.
pub(crate) fn sign_with_threshold(x: f64, threshold: f64) -> i8 {
    if x.abs() <= threshold {
        0
    } else if x.is_sign_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::gen_paper_example;
    use crate::matrix::{exact_from_ints, float_from_rows};
    use num_traits::Signed;
    use proptest::prelude::*;

    fn q(v: i64) -> Rational {
        Rational::from_i64(v)
    }

    #[test]
    fn cofactor_small_cases() {
        assert_eq!(det_cofactor(&exact_from_ints(&[&[1, 2], &[3, 4]])).unwrap(), q(-2));
        assert_eq!(det_cofactor(&Matrix::<Rational>::identity(4)).unwrap(), q(1));
        let a = exact_from_ints(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 10]]);
        assert_eq!(det_cofactor(&a).unwrap(), q(-3));
    }

    #[test]
    fn cofactor_refuses_large_orders() {
        let a = Matrix::<Rational>::identity(9);
        assert!(matches!(det_cofactor(&a), Err(Error::OrderTooLarge { order: 9, max: 8 })));
    }

    #[test]
    fn bareiss_small_cases() {
        assert_eq!(det_bareiss(&exact_from_ints(&[&[1, 2], &[3, 4]])), q(-2));
        assert_eq!(det_bareiss(&exact_from_ints(&[&[1, 2], &[2, 4]])), q(0));
        assert_eq!(det_bareiss(&exact_from_ints(&[&[0, 1], &[1, 0]])), q(-1));
        assert_eq!(det_bareiss(&exact_from_ints(&[&[5]])), q(5));
    }

    #[test]
    fn dodgson_worked_example() {
        let a = exact_from_ints(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 10]]);
        let (det, trace) = det_dodgson(&a);
        assert_eq!(det, q(-3));
        assert!(!trace.fallback_used);
        assert_eq!(trace.layers.len(), 3);
        assert_eq!(trace.layers[1], exact_from_ints(&[&[-3, -3], &[-3, 2]]));
        assert_eq!(trace.layers[2], exact_from_ints(&[&[-3]]));
    }

    #[test]
    fn dodgson_pascal_no_fallback() {
        // Symmetric Pascal matrix: totally positive, determinant 1.
        let binom = |n: usize, k: usize| (0..k).fold(1i64, |acc, t| acc * (n - t) as i64 / (t + 1) as i64);
        let pascal = Matrix::from_fn(5, |r, c| q(binom(r + c, r)));
        let (det, trace) = det_dodgson(&pascal);
        assert_eq!(det, q(1));
        assert!(!trace.fallback_used);
        for (t, layer) in trace.layers.iter().enumerate() {
            assert_eq!(layer.order(), 5 - t);
        }
    }

    #[test]
    fn dodgson_zero_interior_falls_back() {
        let a = exact_from_ints(&[&[1, 1, 1], &[1, 0, 1], &[1, 1, 2]]);
        let (det, trace) = det_dodgson(&a);
        assert_eq!(det, q(-1));
        assert!(trace.fallback_used);
        assert_eq!(trace.fallback_reason, Some(ZeroPivot { layer: 0, row: 2, col: 2 }));
        assert_eq!(trace.layers.len(), 2);
    }

    #[test]
    fn pivoted_float_det() {
        let a = float_from_rows(&[&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &[7.0, 8.0, 10.0]]);
        assert!((det_pivoted(&a) + 3.0).abs() < 1e-12);
        let singular = float_from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        assert_eq!(det_pivoted(&singular), 0.0);
    }

    #[test]
    fn charpoly_examples() {
        let d = exact_from_ints(&[&[1, 0, 0], &[0, 2, 0], &[0, 0, 3]]);
        assert_eq!(charpoly_eval(&d, &q(2)), q(0));
        let a = exact_from_ints(&[&[0, 2], &[1, 0]]);
        assert_eq!(charpoly_eval(&a, &q(0)), q(-2));
        let p = gen_paper_example(q(0), q(0), q(0));
        assert_eq!(charpoly_eval(&p, &q(0)), q(-120));
        // -λ³ + 63λ - 120 at λ = 1, 2
        assert_eq!(charpoly_eval(&p, &q(1)), q(-58));
        assert_eq!(charpoly_eval(&p, &q(2)), q(-2));
    }

    #[test]
    fn lemma_worked_example() {
        let p = gen_paper_example(q(0), q(0), q(0));
        let r = verify_cofactor_symmetry(&p, 1, 2, &q(0)).unwrap();
        assert_eq!(r.lhs, q(60));
        assert_eq!(r.rhs, q(60));
        assert!(r.holds());
    }

    #[test]
    fn lemma_fails_without_symmetrizability() {
        let a = exact_from_ints(&[&[0, 1, 1], &[1, 0, 1], &[2, 1, 0]]);
        let r = verify_cofactor_symmetry(&a, 1, 3, &q(0)).unwrap();
        assert_eq!(r.lhs, q(2));
        assert_eq!(r.rhs, q(1));
        assert!(!r.holds());
    }

    #[test]
    fn lemma_holds_for_symmetric() {
        let a = exact_from_ints(&[&[4, 1, -2, 0], &[1, 3, 5, 1], &[-2, 5, 0, 2], &[0, 1, 2, -1]]);
        for k in 1..=4 {
            for l in 1..=4 {
                if k != l {
                    assert!(verify_cofactor_symmetry(&a, k, l, &q(3)).unwrap().holds());
                }
            }
        }
    }

    #[test]
    fn pair_validation() {
        let a = Matrix::<Rational>::identity(3);
        assert!(matches!(verify_dodgson_identity(&a, 1, 1), Err(Error::InvalidIndex(_))));
        assert!(matches!(verify_dodgson_identity(&a, 1, 4), Err(Error::IndexOutOfRange { .. })));
        let b = Matrix::<Rational>::identity(2);
        assert!(matches!(verify_dodgson_identity(&b, 1, 2), Err(Error::InvalidIndex(_))));
        assert!(matches!(
            verify_cofactor_symmetry(&a, 2, 2, &q(0)),
            Err(Error::InvalidIndex(_))
        ));
    }

    fn small_int_matrix(max_n: usize) -> impl Strategy<Value = Matrix<Rational>> {
        (1..=max_n).prop_flat_map(|n| {
            prop::collection::vec(-3i64..=3, n * n)
                .prop_map(move |v| Matrix::from_fn(n, |r, c| Rational::from_i64(v[r * n + c])))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn engines_agree(a in small_int_matrix(6)) {
            let c = det_cofactor(&a).unwrap();
            prop_assert_eq!(det_bareiss(&a), c.clone());
            prop_assert_eq!(det_dodgson(&a).0, c);
        }

        #[test]
        fn dodgson_identity_exact(a in small_int_matrix(6), k in 1usize..7, l in 1usize..7) {
            prop_assume!(a.order() > 2 && k <= a.order() && l <= a.order() && k != l);
            let r = verify_dodgson_identity(&a, k, l).unwrap();
            prop_assert!(r.holds());
        }

        #[test]
        fn charpoly_sign_at_gershgorin_bound(a in small_int_matrix(6)) {
            let bound = Rational::from_i64(1 + a.inf_norm().ceil() as i64);
            let v = charpoly_eval(&a, &bound);
            let expected_positive = a.order() % 2 == 0;
            prop_assert!(!v.is_zero());
            prop_assert_eq!(v.is_positive(), expected_positive);
        }
    }
}
