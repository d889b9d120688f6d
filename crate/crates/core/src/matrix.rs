//! Dense square matrices and submatrix extraction.

use std::collections::BTreeSet;
use std::fmt;

use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::scalar::{Rational, Regime, Scalar};

/// Square matrix stored row-major. Public accessors use 1-based indices.
#[derive(Clone, PartialEq)]
pub struct Matrix<T> {
    order: usize,
    data: Vec<T>,
}

impl<T: Scalar> Matrix<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let order = rows.len();
        if order == 0 {
            return Err(Error::NonSquare { rows: 0, cols: 0 });
        }
        let mut data = Vec::with_capacity(order * order);
        for (r, row) in rows.into_iter().enumerate() {
            if row.len() != order {
                return Err(Error::NonSquare {
                    rows: order,
                    cols: row.len(),
                });
            }
            for (c, v) in row.into_iter().enumerate() {
                if !v.is_finite_value() {
                    return Err(Error::NonFinite { row: r + 1, col: c + 1 });
                }
                data.push(v);
            }
        }
        Ok(Self { order, data })
    }

    /// Builds a matrix from a 0-based generator. Panics on order 0.
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        assert!(order >= 1, "matrix order must be positive");
        let mut data = Vec::with_capacity(order * order);
        for r in 0..order {
            for c in 0..order {
                data.push(f(r, c));
            }
        }
        Self { order, data }
    }

    pub fn identity(order: usize) -> Self {
        Self::from_fn(order, |r, c| if r == c { T::one() } else { T::zero() })
    }

    pub fn diagonal(values: &[T]) -> Self {
        Self::from_fn(values.len(), |r, c| {
            if r == c {
                values[r].clone()
            } else {
                T::zero()
            }
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn regime(&self) -> Regime {
        T::REGIME
    }

    /// Entry `a_ij`, 1-based.
    pub fn get(&self, i: usize, j: usize) -> &T {
        assert!(
            (1..=self.order).contains(&i) && (1..=self.order).contains(&j),
            "index ({i}, {j}) out of range for order {}",
            self.order
        );
        &self.data[(i - 1) * self.order + (j - 1)]
    }

    #[inline]
    pub(crate) fn at(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.order + c]
    }

    #[inline]
    pub(crate) fn at_mut(&mut self, r: usize, c: usize) -> &mut T {
        &mut self.data[r * self.order + c]
    }

    pub fn row(&self, i: usize) -> &[T] {
        let r = i - 1;
        &self.data[r * self.order..(r + 1) * self.order]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.order)
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        self.rows().map(<[T]>::to_vec).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.order, |r, c| self.at(c, r).clone())
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            order: self.order,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        self.map(Scalar::to_f64)
    }

    /// `A - λI`.
    pub fn shifted(&self, lambda: &T) -> Self {
        let mut out = self.clone();
        for r in 0..self.order {
            let v = out.at_mut(r, r);
            *v = v.clone() - lambda.clone();
        }
        out
    }

    pub fn scaled(&self, c: &T) -> Self {
        self.map(|v| v.clone() * c.clone())
    }

    pub fn trace(&self) -> T {
        (0..self.order).fold(T::zero(), |acc, r| acc + self.at(r, r).clone())
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.order).all(|r| (r + 1..self.order).all(|c| self.at(r, c) == self.at(c, r)))
    }

    /// Largest absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        self.rows()
            .map(|row| row.iter().map(|v| v.to_f64().abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data
            .iter()
            .map(|v| {
                let x = v.to_f64();
                x * x
            })
            .sum::<f64>()
            .sqrt()
    }

    /// Matrix with the rows and columns in `deleted` (1-based) removed.
    pub fn principal_submatrix(&self, deleted: &[usize]) -> Result<Self> {
        let sel = IndexSelection::principal(deleted.iter().copied());
        self.mixed_submatrix(&sel)
    }

    /// Matrix with `excluded_rows` and `excluded_cols` removed, entry order kept.
    pub fn mixed_submatrix(&self, sel: &IndexSelection) -> Result<Self> {
        for &idx in sel.excluded_rows.iter().chain(&sel.excluded_cols) {
            if idx == 0 || idx > self.order {
                return Err(Error::IndexOutOfRange {
                    index: idx,
                    order: self.order,
                });
            }
        }
        let rows: Vec<usize> = (0..self.order)
            .filter(|r| !sel.excluded_rows.contains(&(r + 1)))
            .collect();
        let cols: Vec<usize> = (0..self.order)
            .filter(|c| !sel.excluded_cols.contains(&(c + 1)))
            .collect();
        if rows.len() != cols.len() {
            return Err(Error::NonSquare {
                rows: rows.len(),
                cols: cols.len(),
            });
        }
        if rows.is_empty() {
            return Err(Error::EmptyResult {
                deleted: sel.excluded_rows.len(),
                order: self.order,
            });
        }
        Ok(Self::from_fn(rows.len(), |r, c| self.at(rows[r], cols[c]).clone()))
    }
}

impl<T: Scalar> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<Vec<String>> = self
            .rows()
            .map(|row| row.iter().map(ToString::to_string).collect())
            .collect();
        write!(f, "Matrix{rows:?}")
    }
}

impl<T: Scalar> Serialize for Matrix<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.order))?;
        for row in self.rows() {
            let row: Vec<serde_json::Value> = row.iter().map(Scalar::to_json).collect();
            seq.serialize_element(&row)?;
        }
        seq.end()
    }
}

/// Rows and columns (1-based) to drop when forming a minor.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IndexSelection {
    pub excluded_rows: BTreeSet<usize>,
    pub excluded_cols: BTreeSet<usize>,
}

impl IndexSelection {
    pub fn new(
        rows: impl IntoIterator<Item = usize>,
        cols: impl IntoIterator<Item = usize>,
    ) -> Self {
        Self {
            excluded_rows: rows.into_iter().collect(),
            excluded_cols: cols.into_iter().collect(),
        }
    }

    pub fn principal(indices: impl IntoIterator<Item = usize>) -> Self {
        let set: BTreeSet<usize> = indices.into_iter().collect();
        Self {
            excluded_rows: set.clone(),
            excluded_cols: set,
        }
    }
}

/// A matrix in either scalar regime, as read from or written to a file.
#[derive(Clone, Debug, PartialEq)]
pub enum DenseMatrix {
    Exact(Matrix<Rational>),
    Float(Matrix<f64>),
}

impl DenseMatrix {
    pub fn order(&self) -> usize {
        match self {
            DenseMatrix::Exact(m) => m.order(),
            DenseMatrix::Float(m) => m.order(),
        }
    }

    pub fn regime(&self) -> Regime {
        match self {
            DenseMatrix::Exact(_) => Regime::ExactRational,
            DenseMatrix::Float(_) => Regime::Float64,
        }
    }

    pub fn to_f64(&self) -> Matrix<f64> {
        match self {
            DenseMatrix::Exact(m) => m.to_f64(),
            DenseMatrix::Float(m) => m.clone(),
        }
    }

    /// Converts to `regime`. Only exact-to-float (or identity) conversions are allowed.
    pub fn into_regime(self, regime: Regime) -> Result<Self> {
        match (self, regime) {
            (m @ DenseMatrix::Exact(_), Regime::ExactRational) => Ok(m),
            (m @ DenseMatrix::Float(_), Regime::Float64) => Ok(m),
            (DenseMatrix::Exact(m), Regime::Float64) => Ok(DenseMatrix::Float(m.to_f64())),
            (DenseMatrix::Float(_), Regime::ExactRational) => Err(Error::WrongRegime("exact")),
        }
    }
}

impl From<Matrix<Rational>> for DenseMatrix {
    fn from(m: Matrix<Rational>) -> Self {
        DenseMatrix::Exact(m)
    }
}

impl From<Matrix<f64>> for DenseMatrix {
    fn from(m: Matrix<f64>) -> Self {
        DenseMatrix::Float(m)
    }
}

impl Serialize for DenseMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            DenseMatrix::Exact(m) => m.serialize(serializer),
            DenseMatrix::Float(m) => m.serialize(serializer),
        }
    }
}

/// Convenience for tests and examples: integer rows to an exact matrix.
pub fn exact_from_ints(rows: &[&[i64]]) -> Matrix<Rational> {
    Matrix::from_rows(
        rows.iter()
            .map(|row| row.iter().map(|&v| Rational::from_i64(v)).collect())
            .collect(),
    )
    .expect("integer rows must form a square matrix")
}

pub fn float_from_rows(rows: &[&[f64]]) -> Matrix<f64> {
    Matrix::from_rows(rows.iter().map(|row| row.to_vec()).collect())
        .expect("rows must form a finite square matrix")
}
