//! Dense symmetric matrices, doubly-nonnegative checks, Jacobi eigendecomposition
//! and spectral fractional powers.

use std::collections::VecDeque;
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Numerical thresholds shared by every analysis in the crate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Relative asymmetry accepted (and averaged away) on input.
    pub sym_tol: f64,
    /// An eigenvalue `λ` is treated as zero when `|λ| <= psd_tol * max(1, λ₁)`
    /// and as negative when `λ < -psd_tol * max(1, λ₁)`.
    pub psd_tol: f64,
    /// Jacobi stops once the off-diagonal Frobenius mass is below
    /// `jacobi_tol * ‖A‖_F`.
    pub jacobi_tol: f64,
    pub max_sweeps: usize,
    /// Eigenvector coordinates below this magnitude are skipped when fixing signs.
    pub sign_tol: f64,
    /// Two eigenvalues are merged when they differ by at most `merge_tol * max(1, λ₁)`.
    pub merge_tol: f64,
    /// Exponential-polynomial coefficients with `|α| <= zero_tol * max|α|` are
    /// ignored when counting sign changes.
    pub zero_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            sym_tol: 1e-12,
            psd_tol: 1e-10,
            jacobi_tol: 1e-14,
            max_sweeps: 50,
            sign_tol: 1e-8,
            merge_tol: 1e-8,
            zero_tol: 1e-10,
        }
    }
}

/// Dense real symmetric matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Builds a matrix from row-major data, symmetrizing when the asymmetry is
    /// within `sym_tol` relative to the largest entry.
    pub fn new(n: usize, data: Vec<f64>, sym_tol: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::Malformed("dimension must be positive".into()));
        }
        if data.len() != n * n {
            return Err(Error::Malformed(format!(
                "expected {} entries, got {}",
                n * n,
                data.len()
            )));
        }
        if let Some(bad) = data.iter().position(|x| !x.is_finite()) {
            return Err(Error::Malformed(format!(
                "non-finite entry at ({}, {})",
                bad / n,
                bad % n
            )));
        }
        let scale = data.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let mut data = data;
        for i in 0..n {
            for j in (i + 1)..n {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                let diff = (a - b).abs();
                if diff > sym_tol * scale {
                    return Err(Error::NotSymmetric { i, j, diff });
                }
                let avg = 0.5 * (a + b);
                data[i * n + j] = avg;
                data[j * n + i] = avg;
            }
        }
        Ok(SymMatrix { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Malformed("rows must all have length n".into()));
        }
        Self::new(n, rows.concat(), Tolerances::default().sym_tol)
    }

    /// Builds `a[i][j] = f(i, j)` for `i <= j` and mirrors it.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        assert!(n > 0, "dimension must be positive");
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        SymMatrix { n, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// All-ones matrix `J`.
    pub fn ones(n: usize) -> Self {
        Self::from_fn(n, |_, _| 1.0)
    }

    pub fn diagonal(d: &[f64]) -> Self {
        Self::from_fn(d.len(), |i, j| if i == j { d[i] } else { 0.0 })
    }

    /// Symmetric tridiagonal matrix with the given diagonal and sub-diagonal.
    pub fn tridiagonal(diag: &[f64], off: &[f64]) -> Self {
        assert_eq!(off.len() + 1, diag.len(), "off-diagonal must have length n-1");
        Self::from_fn(diag.len(), |i, j| {
            if i == j {
                diag[i]
            } else if j == i + 1 {
                off[i]
            } else {
                0.0
            }
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn min_entry(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn frobenius(&self) -> f64 {
        self.frobenius_scaled(1.0)
    }

    fn frobenius_scaled(&self, c: f64) -> f64 {
        self.data.iter().map(|x| (c * x) * (c * x)).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: f64) -> Self {
        SymMatrix { n: self.n, data: self.data.iter().map(|x| c * x).collect() }
    }

    pub fn add(&self, other: &SymMatrix) -> Self {
        assert_eq!(self.n, other.n);
        SymMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &SymMatrix) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Largest absolute entry-wise difference.
    pub fn max_abs_diff(&self, other: &SymMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Integer power by repeated multiplication; `A^0 = I`.
    pub fn int_power(&self, k: u32) -> Self {
        let n = self.n;
        let mut acc = Self::identity(n);
        for _ in 0..k {
            let prod = mat_mul(n, &acc.data, &self.data);
            acc = Self::from_fn(n, |i, j| 0.5 * (prod[i * n + j] + prod[j * n + i]));
        }
        acc
    }

    /// Serializes in the matrix text format with round-trip precision.
    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for row in self.data.chunks(self.n) {
            let line: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for SymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl Serialize for SymMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

/// Row-major product of two `n × n` matrices.
pub fn mat_mul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

/// Data lines of a matrix file: comments and blank lines removed.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = &str> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
}

/// Reads one `n` + `n` rows block from `lines`, returning `None` at end of input.
pub(crate) fn read_block<'a, T: std::str::FromStr>(
    lines: &mut impl Iterator<Item = &'a str>,
) -> Result<Option<(usize, Vec<T>)>> {
    let Some(header) = lines.next() else {
        return Ok(None);
    };
    let n: usize = header
        .parse()
        .map_err(|_| Error::Malformed(format!("expected dimension, found {header:?}")))?;
    if n == 0 {
        return Err(Error::Malformed("dimension must be positive".into()));
    }
    let mut data = Vec::with_capacity(n * n);
    for r in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| Error::Malformed(format!("expected {n} rows, found {r}")))?;
        let before = data.len();
        for tok in line.split_whitespace() {
            let v = tok
                .parse::<T>()
                .map_err(|_| Error::Malformed(format!("bad number {tok:?} in row {}", r + 1)))?;
            data.push(v);
        }
        if data.len() - before != n {
            return Err(Error::Malformed(format!(
                "row {} has {} entries, expected {n}",
                r + 1,
                data.len() - before
            )));
        }
    }
    Ok(Some((n, data)))
}

/// Parses the matrix text format: optional `#` comment lines, the dimension `n`,
/// then `n` rows of `n` whitespace-separated numbers.
pub fn parse_matrix(text: &str) -> Result<SymMatrix> {
    parse_matrix_with(text, Tolerances::default().sym_tol)
}

pub fn parse_matrix_with(text: &str, sym_tol: f64) -> Result<SymMatrix> {
    let mut lines = data_lines(text);
    let (n, data) = read_block::<f64>(&mut lines)?
        .ok_or_else(|| Error::Malformed("empty input".into()))?;
    if let Some(extra) = lines.next() {
        return Err(Error::Malformed(format!("unexpected trailing line {extra:?}")));
    }
    SymMatrix::new(n, data, sym_tol)
}

/// Eigenvalues sorted non-increasing with the matching orthonormal eigenvectors
/// as columns of `U`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    /// Row-major; column `k` is the eigenvector for `eigenvalues[k]`.
    vectors: Vec<f64>,
    psd_tol: f64,
}

impl SpectralDecomposition {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `u[i][k]`: coordinate `i` of eigenvector `k`.
    #[inline]
    pub fn u(&self, i: usize, k: usize) -> f64 {
        self.vectors[i * self.n() + k]
    }

    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        (0..self.n()).map(|i| self.u(i, k)).collect()
    }

    pub fn psd_tol(&self) -> f64 {
        self.psd_tol
    }

    /// Magnitude below which an eigenvalue counts as zero.
    pub fn zero_threshold(&self) -> f64 {
        self.psd_tol * self.eigenvalues.first().copied().unwrap_or(0.0).max(1.0)
    }

    /// `max |UᵀU − I|`.
    pub fn orthogonality_error(&self) -> f64 {
        let n = self.n();
        let mut err = 0.0_f64;
        for a in 0..n {
            for b in 0..n {
                let dot: f64 = (0..n).map(|i| self.u(i, a) * self.u(i, b)).sum();
                let expected = if a == b { 1.0 } else { 0.0 };
                err = err.max((dot - expected).abs());
            }
        }
        err
    }

    /// `U diag(λ) Uᵀ`.
    pub fn reconstruct(&self) -> SymMatrix {
        let n = self.n();
        SymMatrix::from_fn(n, |i, j| {
            (0..n).map(|k| self.eigenvalues[k] * self.u(i, k) * self.u(j, k)).sum()
        })
    }

    /// Spectral fractional power `Σ λ_k^t x_k x_kᵀ`.
    ///
    /// Eigenvalues within the zero threshold are clamped to zero with the
    /// convention `0^t = 0` for `t > 0` and `0^0 = 1`.
    pub fn power(&self, t: f64) -> Result<SymMatrix> {
        let n = self.n();
        let weights = self.power_weights(t)?;
        Ok(SymMatrix::from_fn(n, |i, j| {
            (0..n)
                .filter(|&k| weights[k] != 0.0)
                .map(|k| weights[k] * self.u(i, k) * self.u(j, k))
                .sum()
        }))
    }

    fn power_weights(&self, t: f64) -> Result<Vec<f64>> {
        let zero = self.zero_threshold();
        self.eigenvalues
            .iter()
            .map(|&lam| {
                if lam < -zero {
                    Err(Error::NegativeEigenvalue(lam))
                } else if lam <= zero {
                    if t == 0.0 {
                        Ok(1.0)
                    } else if t > 0.0 {
                        Ok(0.0)
                    } else {
                        Err(Error::ZeroToNegativePower)
                    }
                } else {
                    Ok(lam.powf(t))
                }
            })
            .collect()
    }

    /// Number of distinct eigenvalues after merging within `merge_tol`.
    pub fn distinct_eigenvalue_count(&self, merge_tol: f64) -> usize {
        eigenvalue_clusters(&self.eigenvalues, merge_tol).len()
    }
}

/// Fractional power `A^t` from a decomposition of `A`.
pub fn fractional_power(dec: &SpectralDecomposition, t: f64) -> Result<SymMatrix> {
    dec.power(t)
}

/// Groups sorted (non-increasing) eigenvalues into clusters of equal values:
/// an eigenvalue joins the current cluster when it lies within
/// `merge_tol * max(1, λ₁)` of the cluster's leading value.
pub fn eigenvalue_clusters(eigenvalues: &[f64], merge_tol: f64) -> Vec<std::ops::Range<usize>> {
    let Some(&top) = eigenvalues.first() else {
        return Vec::new();
    };
    let thr = merge_tol * top.max(1.0);
    let mut clusters = Vec::new();
    let mut start = 0;
    for k in 1..eigenvalues.len() {
        if (eigenvalues[start] - eigenvalues[k]).abs() > thr {
            clusters.push(start..k);
            start = k;
        }
    }
    clusters.push(start..eigenvalues.len());
    clusters
}

/// Cyclic Jacobi eigendecomposition.
///
/// Sweeps over all `(p, q)` pairs until the off-diagonal Frobenius mass is at
/// most `jacobi_tol · ‖A‖_F`. Eigenvalues are returned in non-increasing
/// order and each eigenvector's first coordinate larger than `sign_tol` in
/// magnitude is made positive.
pub fn spectral_decompose(a: &SymMatrix, tol: &Tolerances) -> Result<SpectralDecomposition> {
    let n = a.n;
    let mut m = a.data.clone();
    let mut v = SymMatrix::identity(n).data;
    // Norms are taken on A / max|a_ij| so that squares neither underflow nor overflow.
    let scale = a.max_abs();
    let inv = if scale > 0.0 { 1.0 / scale } else { 1.0 };
    let target = tol.jacobi_tol * a.frobenius_scaled(inv);

    let off_norm = |m: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                let x = m[p * n + q] * inv;
                s += 2.0 * x * x;
            }
        }
        s.sqrt()
    };

    let mut sweep = 0;
    while off_norm(&m) > target {
        if sweep == tol.max_sweeps {
            return Err(Error::NoConvergence { sweeps: sweep });
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                // Later sweeps: drop elements that no longer affect the diagonal.
                let g = 100.0 * apq.abs();
                if sweep > 3 && app.abs() + g == app.abs() && aqq.abs() + g == aqq.abs() {
                    m[p * n + q] = 0.0;
                    m[q * n + p] = 0.0;
                    continue;
                }
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta.abs() > 1e150 {
                    0.5 / theta
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = c * akp - s * akq;
                    m[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = c * apk - s * aqk;
                    m[q * n + k] = s * apk + c * aqk;
                }
                m[p * n + q] = 0.0;
                m[q * n + p] = 0.0;
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
        sweep += 1;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| m[y * n + y].total_cmp(&m[x * n + x]).then(x.cmp(&y)));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| m[k * n + k]).collect();
    let mut vectors = vec![0.0; n * n];
    for (col, &k) in order.iter().enumerate() {
        let sign = (0..n)
            .map(|i| v[i * n + k])
            .find(|x| x.abs() > tol.sign_tol)
            .map_or(1.0, f64::signum);
        for i in 0..n {
            vectors[i * n + col] = sign * v[i * n + k];
        }
    }
    Ok(SpectralDecomposition { eigenvalues, vectors, psd_tol: tol.psd_tol })
}

/// Summary of the doubly-nonnegative properties of a matrix.
#[derive(Clone, Debug, Serialize)]
pub struct DnReport {
    pub is_nonnegative: bool,
    pub is_psd: bool,
    pub is_dn: bool,
    pub min_entry: f64,
    pub min_eigenvalue: f64,
    pub is_invertible: bool,
    pub is_irreducible: bool,
    pub num_distinct_eigenvalues: usize,
}

/// Entry-wise nonnegativity is exact (`min_entry >= 0`); the PSD and
/// invertibility tests use the `psd_tol` threshold.
pub fn check_dn(a: &SymMatrix, tol: &Tolerances) -> DnReport {
    let min_entry = a.min_entry();
    let is_nonnegative = min_entry >= 0.0;
    let is_irreducible = is_irreducible(a);
    match spectral_decompose(a, tol) {
        Ok(dec) => {
            let lam_min = *dec.eigenvalues.last().expect("n > 0");
            let zero = dec.zero_threshold();
            let is_psd = lam_min >= -zero;
            DnReport {
                is_nonnegative,
                is_psd,
                is_dn: is_nonnegative && is_psd,
                min_entry,
                min_eigenvalue: lam_min,
                is_invertible: lam_min > zero,
                is_irreducible,
                num_distinct_eigenvalues: dec.distinct_eigenvalue_count(tol.merge_tol),
            }
        }
        Err(_) => DnReport {
            is_nonnegative,
            is_psd: false,
            is_dn: false,
            min_entry,
            min_eigenvalue: f64::NAN,
            is_invertible: false,
            is_irreducible,
            num_distinct_eigenvalues: 0,
        },
    }
}

/// Connectivity of the graph with an edge `i - j` whenever `a[i][j] != 0`.
pub fn is_irreducible(a: &SymMatrix) -> bool {
    let n = a.n;
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut count = 1;
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if !seen[j] && i != j && a.get(i, j) != 0.0 {
                seen[j] = true;
                count += 1;
                queue.push_back(j);
            }
        }
    }
    count == n
}

/// Least `k >= 1` with `A^k` entry-wise positive, computed on the sparsity pattern.
pub fn primitivity_index(a: &SymMatrix, tol: &Tolerances) -> Result<usize> {
    if !check_dn(a, tol).is_dn {
        return Err(Error::NotDn);
    }
    if !is_irreducible(a) {
        return Err(Error::NotIrreducible);
    }
    let n = a.n;
    let pattern: Vec<bool> = a.data.iter().map(|&x| x > 0.0).collect();
    let mut current = pattern.clone();
    for k in 1..=n {
        if current.iter().all(|&b| b) {
            return Ok(k);
        }
        let mut next = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                next[i * n + j] = (0..n).any(|l| current[i * n + l] && pattern[l * n + j]);
            }
        }
        current = next;
    }
    // Only reachable for the 1×1 zero matrix.
    Err(Error::NotIrreducible)
}
