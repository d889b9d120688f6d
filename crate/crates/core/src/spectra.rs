//! Real spectra of symmetrizable matrices and certificates for the
//! interlacing property.
//!
//! Eigenvalues come from the symmetric similar matrix `D^{1/2} A D^{-1/2}`
//! via cyclic Jacobi rotations. Certificates are plain data: every number a
//! verdict depends on is recorded so a consumer can re-check it.

use rayon::prelude::*;
use serde::Serialize;

use crate::determinants::{det_pivoted, sign_with_threshold};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::scalar::Scalar;
use crate::symmetrizability::{compute_symmetrizer, symmetrize, Symmetrizer};

pub const DEFAULT_JACOBI_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_SWEEPS: usize = 50;
/// Symmetry required by the eigensolver, relative to `||T||_F`.
pub const SYMMETRY_TOL: f64 = 1e-10;
/// Eigenvalues closer than `CLUSTER_TOL * spread` are one multiple eigenvalue.
pub const CLUSTER_TOL: f64 = 1e-7;
/// Interlacing slack allowed, relative to `spread + 1`.
pub const INTERLACING_TOL: f64 = 1e-8;
/// Determinants below `DEGENERACY_TOL * ||A||_inf^(m-1)` count as zero.
pub const DEGENERACY_TOL: f64 = 1e-8;
/// Relative tolerance for float identity residuals.
pub const RESIDUAL_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub cluster_tol: f64,
    pub source_order: usize,
}

/// A run of (numerically) equal eigenvalues. `start` is the 1-based position
/// of its first member in the sorted spectrum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Cluster {
    pub start: usize,
    pub multiplicity: usize,
    pub value: f64,
}

impl Spectrum {
    pub fn new(mut values: Vec<f64>) -> Self {
        values.sort_by(f64::total_cmp);
        Self {
            source_order: values.len(),
            values,
            cluster_tol: CLUSTER_TOL,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn spread(&self) -> f64 {
        match (self.values.first(), self.values.last()) {
            (Some(lo), Some(hi)) => hi - lo,
            _ => 0.0,
        }
    }

    pub fn clusters(&self) -> Vec<Cluster> {
        let gap = self.cluster_tol * self.spread();
        let mut out: Vec<Cluster> = Vec::new();
        for (idx, &v) in self.values.iter().enumerate() {
            match out.last_mut() {
                Some(c) if v - self.values[idx - 1] <= gap => {
                    c.multiplicity += 1;
                    c.value += (v - c.value) / c.multiplicity as f64;
                }
                _ => out.push(Cluster {
                    start: idx + 1,
                    multiplicity: 1,
                    value: v,
                }),
            }
        }
        out
    }

    /// Multiplicity of the cluster containing position `p` (1-based).
    pub fn multiplicity_at(&self, p: usize) -> usize {
        self.clusters()
            .into_iter()
            .find(|c| (c.start..c.start + c.multiplicity).contains(&p))
            .map_or(0, |c| c.multiplicity)
    }

    /// Smallest gap between consecutive eigenvalues.
    pub fn min_gap(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn product(&self) -> f64 {
        self.values.iter().product()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct EigenResult {
    pub spectrum: Spectrum,
    /// Orthonormal eigenvectors of the symmetric matrix, one per column, in
    /// the order of `spectrum.values`.
    pub vectors: Option<Matrix<f64>>,
    /// `max_p ||T v_p - λ_p v_p||_2`.
    pub residual_norm: f64,
}

/// Cyclic Jacobi eigensolver. Converged once the off-diagonal Frobenius norm
/// drops below `tol * ||T||_F`.
pub fn eig_symmetric(t: &Matrix<f64>, tol: f64, max_sweeps: usize) -> Result<EigenResult> {
    let n = t.order();
    let norm = t.frobenius_norm();
    let asym = (0..n)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .map(|(r, c)| (t.at(r, c) - t.at(c, r)).abs())
        .fold(0.0, f64::max);
    if asym > SYMMETRY_TOL * norm {
        return Err(Error::NotSymmetric { residual: asym });
    }

    let mut a: Vec<Vec<f64>> = (0..n)
        .map(|r| (0..n).map(|c| 0.5 * (t.at(r, c) + t.at(c, r))).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|r| (0..n).map(|c| if r == c { 1.0 } else { 0.0 }).collect())
        .collect();

    let off = |a: &[Vec<f64>]| -> f64 {
        let mut s = 0.0;
        for (r, row) in a.iter().enumerate() {
            for (c, x) in row.iter().enumerate() {
                if r != c {
                    s += x * x;
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    while off(&a) > tol * norm {
        if sweeps == max_sweeps {
            return Err(Error::NoConvergence { sweeps });
        }
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (2.0 * apq);
                let tan = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let cos = 1.0 / (1.0 + tan * tan).sqrt();
                let sin = tan * cos;
                for row in a.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = cos * x - sin * y;
                    row[q] = sin * x + cos * y;
                }
                for k in 0..n {
                    let (x, y) = (a[p][k], a[q][k]);
                    a[p][k] = cos * x - sin * y;
                    a[q][k] = sin * x + cos * y;
                }
                for row in v.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = cos * x - sin * y;
                    row[q] = sin * x + cos * y;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].total_cmp(&a[j][j]));
    let values: Vec<f64> = order.iter().map(|&i| a[i][i]).collect();
    let vectors = Matrix::from_fn(n, |r, c| v[r][order[c]]);

    let mut residual_norm: f64 = 0.0;
    for (c, &lambda) in values.iter().enumerate() {
        let mut s = 0.0;
        for r in 0..n {
            let tv: f64 = (0..n).map(|k| t.at(r, k) * vectors.at(k, c)).sum();
            let diff = tv - lambda * vectors.at(r, c);
            s += diff * diff;
        }
        residual_norm = residual_norm.max(s.sqrt());
    }

    Ok(EigenResult {
        spectrum: Spectrum::new(values),
        vectors: Some(vectors),
        residual_norm,
    })
}

/// Symmetrizer of `A` (computed in `A`'s own regime) and the symmetric
/// similar matrix `D^{1/2} A D^{-1/2}`.
pub fn symmetrized<T: Scalar>(a: &Matrix<T>) -> Result<(Symmetrizer<f64>, Matrix<f64>)> {
    let d = compute_symmetrizer(a).into_result()?.to_f64();
    let t = symmetrize(&a.to_f64(), &d)?;
    Ok((d, t))
}

/// Real spectrum of a symmetrizable matrix. The returned vectors belong to
/// the symmetrized matrix; [`original_eigenvectors`] maps them back.
pub fn eig_symmetrizable<T: Scalar>(a: &Matrix<T>) -> Result<EigenResult> {
    let (_, t) = symmetrized(a)?;
    eig_symmetric(&t, DEFAULT_JACOBI_TOL, DEFAULT_MAX_SWEEPS)
}

/// Eigenvectors of `A` as the columns of `D^{-1/2} V`.
pub fn original_eigenvectors(vectors: &Matrix<f64>, d: &Symmetrizer<f64>) -> Matrix<f64> {
    Matrix::from_fn(vectors.order(), |r, c| vectors.at(r, c) / d.d[r].sqrt())
}

#[derive(Clone, Debug, Serialize)]
pub struct InterlacingCertificate {
    pub kind: &'static str,
    /// Deleted row-column index, when the child came from a deletion.
    pub k: Option<usize>,
    pub parent: Spectrum,
    pub child: Spectrum,
    /// `(μ_p - λ_p, λ_{p+1} - μ_p)` for `p = 1..m-1`.
    pub slacks: Vec<(f64, f64)>,
    pub pass: bool,
    /// Absolute tolerance applied to every slack.
    pub tolerance: f64,
}

impl InterlacingCertificate {
    pub fn min_slack(&self) -> f64 {
        self.slacks
            .iter()
            .flat_map(|&(a, b)| [a, b])
            .fold(f64::INFINITY, f64::min)
    }

    /// 1-based positions whose slack pair falls below `-tolerance`.
    pub fn failures(&self) -> Vec<usize> {
        self.slacks
            .iter()
            .enumerate()
            .filter(|(_, &(a, b))| a < -self.tolerance || b < -self.tolerance)
            .map(|(p, _)| p + 1)
            .collect()
    }
}

/// Checks `λ_p <= μ_p <= λ_{p+1}` with slack `rel_tol * (spread + 1)`.
pub fn check_interlacing(
    parent: &Spectrum,
    child: &Spectrum,
    rel_tol: f64,
) -> Result<InterlacingCertificate> {
    if child.len() + 1 != parent.len() {
        return Err(Error::OrderMismatch {
            parent: parent.len(),
            child: child.len(),
        });
    }
    let lam = &parent.values;
    let slacks: Vec<(f64, f64)> = child
        .values
        .iter()
        .enumerate()
        .map(|(p, &mu)| (mu - lam[p], lam[p + 1] - mu))
        .collect();
    let tolerance = rel_tol * (parent.spread() + 1.0);
    let pass = slacks
        .iter()
        .all(|&(a, b)| a >= -tolerance && b >= -tolerance);
    Ok(InterlacingCertificate {
        kind: "interlacing",
        k: None,
        parent: parent.clone(),
        child: child.clone(),
        slacks,
        pass,
        tolerance,
    })
}

/// One certificate per deleted index `k = 1..m`, in index order. Deletions
/// are evaluated in parallel.
pub fn interlacing_all_deletions<T: Scalar>(a: &Matrix<T>) -> Result<Vec<InterlacingCertificate>> {
    let parent = eig_symmetrizable(a)?.spectrum;
    interlacing_with_parent(a, &parent)
}

pub fn interlacing_with_parent<T: Scalar>(
    a: &Matrix<T>,
    parent: &Spectrum,
) -> Result<Vec<InterlacingCertificate>> {
    let m = a.order();
    if m == 1 {
        return Ok(Vec::new());
    }
    (1..=m)
        .into_par_iter()
        .map(|k| {
            let sub = a.principal_submatrix(&[k])?;
            let child = eig_symmetrizable(&sub)?.spectrum;
            let mut cert = check_interlacing(parent, &child, INTERLACING_TOL)?;
            cert.k = Some(k);
            Ok(cert)
        })
        .collect()
}

/// `1e-8 * ||A||_inf^(m-1)`: the scale below which an order-(m-1) minor is
/// treated as zero.
pub fn degeneracy_threshold<T: Scalar>(a: &Matrix<T>) -> f64 {
    DEGENERACY_TOL * a.inf_norm().powi(a.order() as i32 - 1)
}

/// `det` of `A - λI` with the given rows/columns removed; 1 when nothing is left.
fn shifted_principal_minor(a: &Matrix<f64>, lambda: f64, deleted: &[usize]) -> Result<f64> {
    if deleted.len() == a.order() {
        return Ok(1.0);
    }
    Ok(det_pivoted(&a.principal_submatrix(deleted)?.shifted(&lambda)))
}

#[derive(Clone, Debug, Serialize)]
pub struct AlternationEntry {
    /// Position of the eigenvalue in the sorted spectrum, counting multiplicity.
    pub p: usize,
    pub lambda: f64,
    pub multiplicity: usize,
    /// `P_k(λ_p) = det(A_k - λ_p I)` where `A_k` deletes row and column `k`.
    pub value: f64,
    pub sign: i8,
    pub expected_sign: i8,
    pub skipped: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AlternationCertificate {
    pub kind: &'static str,
    pub k: usize,
    pub entries: Vec<AlternationEntry>,
    pub signs: Vec<i8>,
    pub skipped: Vec<usize>,
    pub threshold: f64,
    pub pass: bool,
}

/// Evaluates `P_k` at each distinct eigenvalue of `A` and checks
/// `(-1)^(p-1) P_k(λ_p) > 0`. Multiple eigenvalues and values within the
/// degeneracy threshold are recorded as skipped.
pub fn alternation_certificate<T: Scalar>(
    a: &Matrix<T>,
    spectrum: &Spectrum,
    k: usize,
) -> Result<AlternationCertificate> {
    let m = a.order();
    if k == 0 || k > m {
        return Err(Error::IndexOutOfRange { index: k, order: m });
    }
    if spectrum.len() != m {
        return Err(Error::OrderMismatch {
            parent: m,
            child: spectrum.len(),
        });
    }
    let af = a.to_f64();
    let threshold = degeneracy_threshold(a);
    let mut entries = Vec::new();
    for cluster in spectrum.clusters() {
        let value = shifted_principal_minor(&af, cluster.value, &[k])?;
        let sign = sign_with_threshold(value, threshold);
        let expected_sign = if cluster.start % 2 == 1 { 1 } else { -1 };
        entries.push(AlternationEntry {
            p: cluster.start,
            lambda: cluster.value,
            multiplicity: cluster.multiplicity,
            value,
            sign,
            expected_sign,
            skipped: cluster.multiplicity > 1 || sign == 0,
        });
    }
    let pass = entries
        .iter()
        .all(|e| e.skipped || e.sign == e.expected_sign);
    Ok(AlternationCertificate {
        kind: "alternation",
        k,
        signs: entries.iter().map(|e| e.sign).collect(),
        skipped: entries.iter().filter(|e| e.skipped).map(|e| e.p).collect(),
        entries,
        threshold,
        pass,
    })
}

pub fn alternation_certificates<T: Scalar>(
    a: &Matrix<T>,
    spectrum: &Spectrum,
) -> Result<Vec<AlternationCertificate>> {
    (1..=a.order())
        .into_par_iter()
        .map(|k| alternation_certificate(a, spectrum, k))
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct MinorSignReport {
    pub lambda: f64,
    /// The m principal minors of order m-1 of `A - λI`, indexed by the
    /// deleted position.
    pub minors: Vec<f64>,
    /// 1-based deleted indices whose minor is below the degeneracy threshold.
    pub zero: Vec<usize>,
    /// Common sign of the nonzero minors (0 when all are zero).
    pub sign: i8,
    pub uniform: bool,
    pub threshold: f64,
}

/// All principal minors of order `m - 1` of `A - λI`; at an eigenvalue the
/// nonzero ones share a sign.
pub fn minor_sign_uniformity<T: Scalar>(a: &Matrix<T>, lambda: f64) -> Result<MinorSignReport> {
    let af = a.to_f64();
    let threshold = degeneracy_threshold(a);
    let minors: Vec<f64> = (1..=af.order())
        .map(|k| shifted_principal_minor(&af, lambda, &[k]))
        .collect::<Result<_>>()?;
    let signs: Vec<i8> = minors
        .iter()
        .map(|&v| sign_with_threshold(v, threshold))
        .collect();
    let zero = signs
        .iter()
        .enumerate()
        .filter(|(_, &s)| s == 0)
        .map(|(k, _)| k + 1)
        .collect();
    let nonzero: Vec<i8> = signs.iter().copied().filter(|&s| s != 0).collect();
    let sign = nonzero.first().copied().unwrap_or(0);
    Ok(MinorSignReport {
        lambda,
        uniform: nonzero.iter().all(|&s| s == sign),
        minors,
        zero,
        sign,
        threshold,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MinorSumReport {
    pub p: usize,
    pub lambda: f64,
    /// Sum of the principal (m-1)-minors of `A - λ_p I`.
    pub minor_sum: f64,
    /// `prod_{q != p} (λ_q - λ_p)`, the product of the nonzero eigenvalues
    /// of `A - λ_p I`.
    pub eigen_product: f64,
    pub residual: f64,
    pub scale: f64,
    pub pass: bool,
}

/// Compares the sum of principal (m-1)-minors of `A - λ_p I` with the
/// product of its nonzero eigenvalues. `p` is 1-based and must name a simple
/// eigenvalue.
pub fn minor_sum_identity<T: Scalar>(
    a: &Matrix<T>,
    spectrum: &Spectrum,
    p: usize,
) -> Result<MinorSumReport> {
    let m = a.order();
    if p == 0 || p > spectrum.len() {
        return Err(Error::IndexOutOfRange {
            index: p,
            order: spectrum.len(),
        });
    }
    let multiplicity = spectrum.multiplicity_at(p);
    if multiplicity > 1 {
        return Err(Error::MultiplicityTooHigh { p, multiplicity });
    }
    let lambda = spectrum.values[p - 1];
    let af = a.to_f64();
    let minors: Vec<f64> = (1..=m)
        .map(|k| shifted_principal_minor(&af, lambda, &[k]))
        .collect::<Result<_>>()?;
    let minor_sum: f64 = minors.iter().sum();
    let eigen_product: f64 = spectrum
        .values
        .iter()
        .enumerate()
        .filter(|&(q, _)| q + 1 != p)
        .map(|(_, &v)| v - lambda)
        .product();
    let scale = minors
        .iter()
        .map(|v| v.abs())
        .sum::<f64>()
        .max(eigen_product.abs())
        .max(a.inf_norm().powi(m as i32 - 1));
    let residual = minor_sum - eigen_product;
    Ok(MinorSumReport {
        p,
        lambda,
        minor_sum,
        eigen_product,
        residual,
        scale,
        pass: residual.abs() <= RESIDUAL_TOL * scale,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RealnessEntry {
    pub p: usize,
    /// Eigenvalue `μ_p` of `A` with row and column `l` deleted.
    pub mu: f64,
    /// `P_m(μ_p) = det(A - μ_p I)`.
    pub char_value: f64,
    /// `det` of `A - μ_p I` with rows and columns `k` and `l` deleted.
    pub inner_minor: f64,
    pub product: f64,
}

/// The condensation identity at the eigenvalues `μ_p` of the `l`-deleted
/// submatrix: `P_m(μ_p) · det[(A - μ_p I) without k,l] <= 0`, and the signs
/// of `P_m(μ_p)` alternate starting negative.
#[derive(Clone, Debug, Serialize)]
pub struct RealnessReport {
    pub k: usize,
    pub l: usize,
    pub entries: Vec<RealnessEntry>,
    pub tolerance: f64,
    pub products_nonpositive: bool,
    /// No conclusive sign breaks the pattern.
    pub signs_alternate: bool,
    /// Positions whose `P_m(μ_p)` falls within the degeneracy threshold.
    pub inconclusive: Vec<usize>,
}

pub fn realness_inequality<T: Scalar>(a: &Matrix<T>, k: usize, l: usize) -> Result<RealnessReport> {
    let m = a.order();
    for idx in [k, l] {
        if idx == 0 || idx > m {
            return Err(Error::IndexOutOfRange { index: idx, order: m });
        }
    }
    if k == l || m < 2 {
        return Err(Error::InvalidIndex(format!("need distinct k, l in an order >= 2 matrix (k={k}, l={l}, m={m})")));
    }
    let af = a.to_f64();
    let sub = a.principal_submatrix(&[l])?;
    let mu = eig_symmetrizable(&sub)?.spectrum;
    let norm = af.inf_norm();
    let tolerance = DEGENERACY_TOL * norm.powi(2 * m as i32 - 2);
    let threshold = DEGENERACY_TOL * norm.powi(m as i32);
    let mut entries = Vec::new();
    for (idx, &x) in mu.values.iter().enumerate() {
        let char_value = det_pivoted(&af.shifted(&x));
        let inner_minor = shifted_principal_minor(&af, x, &[k, l])?;
        entries.push(RealnessEntry {
            p: idx + 1,
            mu: x,
            char_value,
            inner_minor,
            product: char_value * inner_minor,
        });
    }
    let products_nonpositive = entries.iter().all(|e| e.product <= tolerance);
    let signs: Vec<i8> = entries
        .iter()
        .map(|e| sign_with_threshold(e.char_value, threshold))
        .collect();
    let inconclusive = entries
        .iter()
        .zip(&signs)
        .filter(|(_, &s)| s == 0)
        .map(|(e, _)| e.p)
        .collect();
    let signs_alternate = entries
        .iter()
        .zip(&signs)
        .all(|(e, &s)| s == 0 || s == if e.p % 2 == 1 { -1 } else { 1 });
    Ok(RealnessReport {
        k,
        l,
        entries,
        tolerance,
        products_nonpositive,
        signs_alternate,
        inconclusive,
    })
}
