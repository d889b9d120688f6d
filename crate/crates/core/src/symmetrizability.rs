//! Symmetrizability: sign symmetry, diagonal symmetrizers, and violation
//! witnesses.
//!
//! The symmetrizer is found by potential propagation over the support graph:
//! each component's lowest index gets potential 1, a breadth-first spanning
//! forest fixes `d_j = d_i a_ij / a_ji` along tree edges, and every remaining
//! edge is then checked. A failing edge closes a cycle through the forest
//! whose forward and backward products differ, which is the witness returned.

use std::collections::VecDeque;

use itertools::Itertools;
use serde::{Serialize, Serializer};
use serde_json::json;

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::{Rational, Scalar};
use num_traits::{Signed, Zero};

pub const PERMUTATION_ORACLE_MAX_ORDER: usize = 8;
pub const CYCLE_ORACLE_MAX_ORDER: usize = 10;

/// Positive diagonal `D` with `D·A` symmetric, normalized so `min d_i = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct Symmetrizer<T> {
    pub d: Vec<T>,
}

impl<T: Scalar> Symmetrizer<T> {
    pub fn to_f64(&self) -> Symmetrizer<f64> {
        Symmetrizer {
            d: self.d.iter().map(Scalar::to_f64).collect(),
        }
    }

    /// `D·A`.
    pub fn apply(&self, a: &Matrix<T>) -> Matrix<T> {
        Matrix::from_fn(a.order(), |r, c| self.d[r].clone() * a.at(r, c).clone())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::Value::Array(self.d.iter().map(Scalar::to_json).collect())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation<T> {
    /// `a_ij` and `a_ji` differ in sign or exactly one of them is zero.
    Sign { i: usize, j: usize, a_ij: T, a_ji: T },
    /// Closed walk `cycle[0] -> cycle[1] -> ... -> cycle[0]` whose forward
    /// product `a_{c0 c1} a_{c1 c2} ...` differs from the backward one.
    Cycle {
        cycle: Vec<usize>,
        forward: T,
        backward: T,
    },
}

impl<T: Scalar> Violation<T> {
    pub fn kind(&self) -> ViolationKind {
        match self {
            Violation::Sign { .. } => ViolationKind::Sign,
            Violation::Cycle { .. } => ViolationKind::Cycle,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Violation::Sign { i, j, a_ij, a_ji } => json!({
                "i": i, "j": j, "a_ij": a_ij.to_json(), "a_ji": a_ji.to_json(),
            }),
            Violation::Cycle {
                cycle,
                forward,
                backward,
            } => json!({
                "cycle": cycle,
                "forward_product": forward.to_json(),
                "backward_product": backward.to_json(),
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Sign,
    Cycle,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Verdict<T> {
    Symmetrizable(Symmetrizer<T>),
    Violated(Violation<T>),
}

impl<T: Scalar> Verdict<T> {
    pub fn is_symmetrizable(&self) -> bool {
        matches!(self, Verdict::Symmetrizable(_))
    }

    pub fn symmetrizer(&self) -> Option<&Symmetrizer<T>> {
        match self {
            Verdict::Symmetrizable(d) => Some(d),
            Verdict::Violated(_) => None,
        }
    }

    pub fn violation(&self) -> Option<&Violation<T>> {
        match self {
            Verdict::Symmetrizable(_) => None,
            Verdict::Violated(v) => Some(v),
        }
    }

    /// `{status, symmetrizer?, witness?}`.
    pub fn to_json(&self) -> serde_json::Value {
        match self {
            Verdict::Symmetrizable(d) => json!({
                "status": "symmetrizable",
                "symmetrizer": d.to_json(),
            }),
            Verdict::Violated(v) => json!({
                "status": match v.kind() {
                    ViolationKind::Sign => "sign_violation",
                    ViolationKind::Cycle => "cycle_violation",
                },
                "witness": v.to_json(),
            }),
        }
    }

    pub fn into_result(self) -> Result<Symmetrizer<T>> {
        match self {
            Verdict::Symmetrizable(d) => Ok(d),
            Verdict::Violated(_) => Err(Error::NotSymmetrizable {
                witness: self.to_json(),
            }),
        }
    }
}

impl<T: Scalar> Serialize for Verdict<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}

fn sign_compatible<T: Scalar>(x: &T, y: &T) -> bool {
    // Compare against zero: `Signed::is_positive` treats +0.0 as positive.
    let zero = T::zero();
    (x.is_zero() && y.is_zero()) || (*x > zero && *y > zero) || (*x < zero && *y < zero)
}

/// First pair, in row-major order, that is not sign symmetric.
pub fn check_sign_symmetry<T: Scalar>(a: &Matrix<T>) -> std::result::Result<(), Violation<T>> {
    let n = a.order();
    for r in 0..n {
        for c in r + 1..n {
            let (x, y) = (a.at(r, c), a.at(c, r));
            if !sign_compatible(x, y) {
                return Err(Violation::Sign {
                    i: r + 1,
                    j: c + 1,
                    a_ij: x.clone(),
                    a_ji: y.clone(),
                });
            }
        }
    }
    Ok(())
}

pub fn compute_symmetrizer<T: Scalar>(a: &Matrix<T>) -> Verdict<T> {
    if let Err(v) = check_sign_symmetry(a) {
        return Verdict::Violated(v);
    }
    let n = a.order();
    let mut d: Vec<Option<T>> = vec![None; n];
    let mut parent: Vec<Option<usize>> = vec![None; n];
    let mut depth = vec![0usize; n];
    let mut queue = VecDeque::new();
    for root in 0..n {
        if d[root].is_some() {
            continue;
        }
        d[root] = Some(T::one());
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if v == u || d[v].is_some() || a.at(u, v).is_zero() {
                    continue;
                }
                let du = d[u].clone().expect("queued vertices carry a potential");
                d[v] = Some(du * a.at(u, v).clone() / a.at(v, u).clone());
                parent[v] = Some(u);
                depth[v] = depth[u] + 1;
                queue.push_back(v);
            }
        }
    }
    let d: Vec<T> = d.into_iter().map(|x| x.expect("every vertex is reached")).collect();

    for u in 0..n {
        for v in u + 1..n {
            if a.at(u, v).is_zero() || parent[v] == Some(u) || parent[u] == Some(v) {
                continue;
            }
            let left = d[u].clone() * a.at(u, v).clone();
            let right = d[v].clone() * a.at(v, u).clone();
            if !left.balanced_eq(&right) {
                let cycle = fundamental_cycle(&parent, &depth, u, v);
                return Verdict::Violated(cycle_violation(a, cycle));
            }
        }
    }

    let min = d
        .iter()
        .cloned()
        .reduce(|m, x| if x < m { x } else { m })
        .expect("order is positive");
    Verdict::Symmetrizable(Symmetrizer {
        d: d.into_iter().map(|x| x / min.clone()).collect(),
    })
}

/// Tree path `lca -> ... -> u`, then the non-tree edge `u -> v`, then the tree
/// path `v -> ... -> lca` (lca excluded). 0-based in, 0-based out.
fn fundamental_cycle(parent: &[Option<usize>], depth: &[usize], u: usize, v: usize) -> Vec<usize> {
    let mut up_u = vec![u];
    let mut up_v = vec![v];
    let (mut x, mut y) = (u, v);
    while depth[x] > depth[y] {
        x = parent[x].expect("non-root has a parent");
        up_u.push(x);
    }
    while depth[y] > depth[x] {
        y = parent[y].expect("non-root has a parent");
        up_v.push(y);
    }
    while x != y {
        x = parent[x].expect("same component");
        y = parent[y].expect("same component");
        up_u.push(x);
        up_v.push(y);
    }
    // Both paths now end at the lowest common ancestor.
    up_v.pop();
    up_u.reverse();
    up_u.extend(up_v);
    up_u
}

fn cycle_violation<T: Scalar>(a: &Matrix<T>, cycle: Vec<usize>) -> Violation<T> {
    let (forward, backward) = cycle_products(a, &cycle);
    Violation::Cycle {
        cycle: cycle.iter().map(|c| c + 1).collect(),
        forward,
        backward,
    }
}

fn cycle_products<T: Scalar>(a: &Matrix<T>, cycle: &[usize]) -> (T, T) {
    let mut forward = T::one();
    let mut backward = T::one();
    for (idx, &from) in cycle.iter().enumerate() {
        let to = cycle[(idx + 1) % cycle.len()];
        forward = forward * a.at(from, to).clone();
        backward = backward * a.at(to, from).clone();
    }
    (forward, backward)
}

pub fn is_symmetrizable<T: Scalar>(a: &Matrix<T>) -> Verdict<T> {
    compute_symmetrizer(a)
}

/// `T = D^{1/2} A D^{-1/2}`, entrywise `t_ij = sqrt(d_i / d_j) a_ij`.
/// The result is symmetric and has the same spectrum as `A`.
pub fn symmetrize(a: &Matrix<f64>, d: &Symmetrizer<f64>) -> Result<Matrix<f64>> {
    let n = a.order();
    if d.d.len() != n || d.d.iter().any(|&x| !x.is_finite() || x <= 0.0) {
        return Err(Error::NotASymmetrizer { i: 1, j: 1 });
    }
    for r in 0..n {
        for c in r + 1..n {
            let left = d.d[r] * a.at(r, c);
            let right = d.d[c] * a.at(c, r);
            if !left.balanced_eq(&right) {
                return Err(Error::NotASymmetrizer { i: r + 1, j: c + 1 });
            }
        }
    }
    let roots: Vec<f64> = d.d.iter().map(|x| x.sqrt()).collect();
    Ok(Matrix::from_fn(n, |r, c| roots[r] / roots[c] * a.at(r, c)))
}

/// Brute-force definition check: sign symmetry plus
/// `prod a_{i,σ(i)} = prod a_{σ(i),i}` for every permutation σ, evaluated with
/// the diagonal replaced by ones so that fixed points cannot mask a cycle.
pub fn permutation_product_oracle(a: &Matrix<Rational>) -> Result<bool> {
    let n = a.order();
    if n > PERMUTATION_ORACLE_MAX_ORDER {
        return Err(Error::OrderTooLarge {
            order: n,
            max: PERMUTATION_ORACLE_MAX_ORDER,
        });
    }
    for r in 0..n {
        for c in 0..n {
            let (x, y) = (a.at(r, c), a.at(c, r));
            let ok = (x.is_zero() && y.is_zero()) || (x.clone() * y.clone()).is_positive();
            if r != c && !ok {
                return Ok(false);
            }
        }
    }
    let unit = Matrix::from_fn(n, |r, c| {
        if r == c {
            Rational::from_i64(1)
        } else {
            a.at(r, c).clone()
        }
    });
    for sigma in (0..n).permutations(n) {
        if sigma.iter().enumerate().any(|(i, &s)| unit.at(i, s).is_zero()) {
            // Sign symmetry makes the transposed product vanish too.
            continue;
        }
        let forward = sigma
            .iter()
            .enumerate()
            .fold(Rational::from_i64(1), |acc, (i, &s)| acc * unit.at(i, s));
        let backward = sigma
            .iter()
            .enumerate()
            .fold(Rational::from_i64(1), |acc, (i, &s)| acc * unit.at(s, i));
        if forward != backward {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Enumerates simple cycles of length `3..=max_len` in the support graph and
/// compares forward and backward products. `None` means every cycle balances.
pub fn cycle_product_oracle(
    a: &Matrix<Rational>,
    max_len: usize,
) -> Result<Option<Violation<Rational>>> {
    let n = a.order();
    if n > CYCLE_ORACLE_MAX_ORDER {
        return Err(Error::OrderTooLarge {
            order: n,
            max: CYCLE_ORACLE_MAX_ORDER,
        });
    }
    if let Err(v) = check_sign_symmetry(a) {
        return Ok(Some(v));
    }
    let adjacent = |u: usize, v: usize| u != v && !a.at(u, v).is_zero();
    for start in 0..n {
        let mut path = vec![start];
        if let Some(v) = extend_cycles(a, &adjacent, &mut path, max_len) {
            return Ok(Some(v));
        }
    }
    Ok(None)
}

fn extend_cycles(
    a: &Matrix<Rational>,
    adjacent: &impl Fn(usize, usize) -> bool,
    path: &mut Vec<usize>,
    max_len: usize,
) -> Option<Violation<Rational>> {
    let start = path[0];
    let last = *path.last().expect("path starts non-empty");
    for w in start + 1..a.order() {
        if !adjacent(last, w) || path.contains(&w) {
            continue;
        }
        path.push(w);
        // Each cycle is seen once: smallest vertex first, second < last.
        if path.len() >= 3 && adjacent(w, start) && path[1] < w {
            let (forward, backward) = cycle_products(a, path);
            if forward != backward {
                return Some(Violation::Cycle {
                    cycle: path.iter().map(|c| c + 1).collect(),
                    forward,
                    backward,
                });
            }
        }
        if path.len() < max_len {
            if let Some(v) = extend_cycles(a, adjacent, path, max_len) {
                return Some(v);
            }
        }
        path.pop();
    }
    None
}
