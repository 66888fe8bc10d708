//! Entries of `A^t` as exponential polynomials `φ(t) = Σ α_k λ_k^t`.

use serde::Serialize;

use crate::certify::crude_bound;
use crate::error::{Error, Result};
use crate::matcore::{eigenvalue_clusters, SpectralDecomposition, Tolerances};

/// Sampling grid and thresholds for scanning `t`.
///
/// `entry_tol` is relative: a value `v` of an entry of `A^t` counts as negative
/// when `v < -entry_tol * s(t)`, where `s(t)` is the size of `A^t` (its largest
/// entry for matrix-level checks, `λ₁^t` for a single exponential polynomial).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub step: f64,
    pub endpoint_tol: f64,
    pub entry_tol: f64,
}

impl ScanConfig {
    pub const DEFAULT_STEP: f64 = 0.01;
    pub const DEFAULT_ENDPOINT_TOL: f64 = 1e-9;
    pub const DEFAULT_ENTRY_TOL: f64 = 1e-9;

    pub fn new(t_min: f64, t_max: f64, step: f64) -> Result<Self> {
        let cfg = ScanConfig {
            t_min,
            t_max,
            step,
            endpoint_tol: Self::DEFAULT_ENDPOINT_TOL,
            entry_tol: Self::DEFAULT_ENTRY_TOL,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// `(step, k(n) + 2]` with the default step: beyond `k(n) + 1` no entry of
    /// an `n × n` DN power can be negative.
    pub fn for_dimension(n: usize) -> Self {
        let t_max = crude_bound(n.max(2)) + 1.0;
        ScanConfig::new(Self::DEFAULT_STEP, t_max, Self::DEFAULT_STEP).expect("valid defaults")
    }

    pub fn with_range(mut self, t_min: f64, t_max: f64) -> Result<Self> {
        self.t_min = t_min;
        self.t_max = t_max;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [self.t_min, self.t_max, self.step, self.endpoint_tol, self.entry_tol]
            .iter()
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::BadScan("non-finite parameter".into()));
        }
        if self.t_min >= self.t_max {
            return Err(Error::BadScan(format!("t_min {} >= t_max {}", self.t_min, self.t_max)));
        }
        if self.step <= 0.0 || self.endpoint_tol <= 0.0 || self.entry_tol <= 0.0 {
            return Err(Error::BadScan("step and tolerances must be positive".into()));
        }
        Ok(())
    }

    /// `t_min, t_min + step, …` up to `t_max`; `t_max` itself is always the last point.
    pub fn grid(&self) -> Vec<f64> {
        let slack = 1e-9 * self.step;
        let count = ((self.t_max - self.t_min + slack) / self.step).floor() as usize;
        let mut pts: Vec<f64> = (0..=count).map(|k| self.t_min + k as f64 * self.step).collect();
        if let Some(last) = pts.last_mut() {
            if (self.t_max - *last).abs() <= slack {
                *last = self.t_max;
            } else {
                pts.push(self.t_max);
            }
        }
        pts
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Term {
    pub base: f64,
    pub coeff: f64,
}

/// One entry `(A^t)_{ij}` as `Σ α_k λ_k^t` over distinct positive eigenvalues,
/// bases strictly decreasing.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExpPoly {
    terms: Vec<Term>,
    entry: (usize, usize),
    /// A zero-eigenvalue term was dropped.
    singular: bool,
    /// Coefficient of the dropped zero-eigenvalue term, used only at `t = 0`.
    zero_base_coeff: f64,
    /// Absolute threshold below which coefficients are skipped in sign counting.
    coeff_tol: f64,
    /// Largest eigenvalue of the matrix; `top^t` scales the negativity threshold.
    top: f64,
}

impl ExpPoly {
    /// Builds an exponential polynomial directly from terms (bases sorted
    /// decreasing, all positive). Used for hand-written polynomials.
    pub fn from_terms(terms: Vec<Term>) -> Self {
        assert!(
            terms.windows(2).all(|w| w[0].base > w[1].base),
            "bases must be strictly decreasing"
        );
        assert!(terms.iter().all(|t| t.base > 0.0), "bases must be positive");
        let top = terms.first().map_or(0.0, |t| t.base);
        ExpPoly { terms, entry: (0, 0), singular: false, zero_base_coeff: 0.0, coeff_tol: 0.0, top }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn entry(&self) -> (usize, usize) {
        self.entry
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Whether some nonzero coefficient was small enough to be skipped.
    pub fn has_negligible_coefficient(&self) -> bool {
        self.terms.iter().any(|t| t.coeff.abs() <= self.coeff_tol)
    }

    /// Coefficients that take part in sign counting.
    pub fn significant_coefficients(&self) -> impl Iterator<Item = f64> + '_ {
        self.terms.iter().map(|t| t.coeff).filter(move |c| c.abs() > self.coeff_tol)
    }

    /// `φ(t)`; `t < 0` is rejected when a zero eigenvalue was dropped.
    pub fn eval(&self, t: f64) -> Result<f64> {
        if t < 0.0 && self.singular {
            return Err(Error::ZeroToNegativePower);
        }
        let zero_part = if t == 0.0 { self.zero_base_coeff } else { 0.0 };
        Ok(self.value(t) + zero_part)
    }

    #[inline]
    fn value(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.coeff * term.base.powf(t)).sum()
    }

    /// Negativity threshold at `t`.
    #[inline]
    fn threshold(&self, t: f64, rel: f64) -> f64 {
        if self.top > 0.0 {
            rel * self.top.powf(t)
        } else {
            0.0
        }
    }
}

/// Builds the exponential polynomial of entry `(i, j)` (0-based).
///
/// Term `k` has base `λ_k` and coefficient `u_ik u_jk`; eigenvalues equal
/// within `merge_tol` are merged by summing coefficients, and zero eigenvalues
/// are dropped with the singular flag set.
pub fn entry_exppoly(dec: &SpectralDecomposition, i: usize, j: usize, tol: &Tolerances) -> Result<ExpPoly> {
    let n = dec.n();
    if i >= n || j >= n {
        return Err(Error::IndexOutOfRange { i, j, n });
    }
    let eig = dec.eigenvalues();
    let zero = dec.zero_threshold();
    let mut terms = Vec::new();
    let mut singular = false;
    let mut zero_base_coeff = 0.0;
    for cluster in eigenvalue_clusters(eig, tol.merge_tol) {
        let len = cluster.len() as f64;
        let base = cluster.clone().map(|k| eig[k]).sum::<f64>() / len;
        let coeff: f64 = cluster.map(|k| dec.u(i, k) * dec.u(j, k)).sum();
        if base < -zero {
            return Err(Error::NegativeEigenvalue(base));
        }
        if base <= zero {
            singular = true;
            zero_base_coeff += coeff;
        } else {
            terms.push(Term { base, coeff });
        }
    }
    let max_coeff = terms.iter().fold(0.0_f64, |m, t| m.max(t.coeff.abs()));
    Ok(ExpPoly {
        terms,
        entry: (i, j),
        singular,
        zero_base_coeff,
        coeff_tol: tol.zero_tol * max_coeff,
        top: eig.first().copied().unwrap_or(0.0).max(0.0),
    })
}

/// Number of sign changes in the coefficients ordered by decreasing base,
/// skipping negligible coefficients.
pub fn descartes_bound(p: &ExpPoly) -> usize {
    count_sign_changes(p.significant_coefficients())
}

pub(crate) fn count_sign_changes(values: impl IntoIterator<Item = f64>) -> usize {
    let mut changes = 0;
    let mut last: Option<bool> = None;
    for v in values {
        if v == 0.0 {
            continue;
        }
        let pos = v > 0.0;
        if last.is_some_and(|l| l != pos) {
            changes += 1;
        }
        last = Some(pos);
    }
    changes
}

pub fn eval_exppoly(p: &ExpPoly, t: f64) -> Result<f64> {
    p.eval(t)
}

/// Sign alternations of `φ` on the scan grid, ignoring values within the
/// negativity threshold of zero.
pub fn grid_sign_alternations(p: &ExpPoly, scan: &ScanConfig) -> usize {
    count_sign_changes(scan.grid().into_iter().map(|t| {
        let v = p.value(t);
        if v.abs() <= p.threshold(t, scan.entry_tol) {
            0.0
        } else {
            v
        }
    }))
}

/// Maximal intervals of `t` on which an entry is negative.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NegativeIntervalSet {
    pub entry: (usize, usize),
    pub intervals: Vec<(f64, f64)>,
    pub scan_range: (f64, f64),
    pub endpoint_tol: f64,
}

impl NegativeIntervalSet {
    pub fn count(&self) -> usize {
        self.intervals.len()
    }

    /// Largest upper endpoint, or 0 when there is no negative interval.
    pub fn sup(&self) -> f64 {
        self.intervals.iter().map(|&(_, hi)| hi).fold(0.0, f64::max)
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// Scans `φ` on the grid; each maximal run of negative grid values becomes one
/// interval whose endpoints are refined by bisection.
pub fn negative_intervals(p: &ExpPoly, scan: &ScanConfig) -> NegativeIntervalSet {
    let grid = scan.grid();
    let negative = |t: f64| p.value(t) < -p.threshold(t, scan.entry_tol);
    let flags: Vec<bool> = grid.iter().map(|&t| negative(t)).collect();

    // Bisect on the exact sign of φ between a thresholded-negative point and
    // a point that is not; a sub-threshold negative outer end is kept as is.
    let refine = |inside_t: f64, outside_t: f64| -> f64 {
        let (mut a, mut b) = (inside_t, outside_t);
        while (b - a).abs() > scan.endpoint_tol {
            let mid = 0.5 * (a + b);
            if p.value(mid) < 0.0 {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };

    let mut intervals = Vec::new();
    let mut k = 0;
    while k < grid.len() {
        if !flags[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k + 1 < grid.len() && flags[k + 1] {
            k += 1;
        }
        let end = k;
        let lo = if start == 0 { grid[0] } else { refine(grid[start], grid[start - 1]) };
        let hi = if end + 1 == grid.len() { grid[end] } else { refine(grid[end], grid[end + 1]) };
        if hi > lo {
            intervals.push((lo, hi));
        }
        k += 1;
    }
    NegativeIntervalSet {
        entry: p.entry,
        intervals,
        scan_range: (scan.t_min, scan.t_max),
        endpoint_tol: scan.endpoint_tol,
    }
}

/// Supremum of the negative set of `φ` within the scan, or 0.
pub fn entry_critical_exponent(p: &ExpPoly, scan: &ScanConfig) -> f64 {
    negative_intervals(p, scan).sup()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{spectral_decompose, SymMatrix};

    fn poly(terms: &[(f64, f64)]) -> ExpPoly {
        ExpPoly::from_terms(terms.iter().map(|&(base, coeff)| Term { base, coeff }).collect())
    }

    fn tridiag121(n: usize) -> SymMatrix {
        SymMatrix::tridiagonal(&vec![2.0; n], &vec![1.0; n - 1])
    }

    #[test]
    fn entry_of_2x2() {
        let tol = Tolerances::default();
        let a = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let dec = spectral_decompose(&a, &tol).unwrap();
        let p = entry_exppoly(&dec, 0, 1, &tol).unwrap();
        assert_eq!(p.terms().len(), 2);
        assert!((p.terms()[0].base - 3.0).abs() < 1e-14 && (p.terms()[0].coeff - 0.5).abs() < 1e-14);
        assert!((p.terms()[1].base - 1.0).abs() < 1e-14 && (p.terms()[1].coeff + 0.5).abs() < 1e-14);
        assert_eq!(descartes_bound(&p), 1);
        assert!(matches!(entry_exppoly(&dec, 2, 0, &tol), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn identity_entry_is_zero_polynomial() {
        let tol = Tolerances::default();
        let dec = spectral_decompose(&SymMatrix::identity(2), &tol).unwrap();
        let p = entry_exppoly(&dec, 0, 1, &tol).unwrap();
        assert_eq!(p.terms().len(), 1);
        assert_eq!(p.terms()[0].coeff, 0.0);
        assert_eq!(descartes_bound(&p), 0);
    }

    #[test]
    fn diagonal_coefficients_nonnegative() {
        let tol = Tolerances::default();
        let dec = spectral_decompose(&tridiag121(5), &tol).unwrap();
        for i in 0..5 {
            let p = entry_exppoly(&dec, i, i, &tol).unwrap();
            assert!(p.terms().iter().all(|t| t.coeff >= 0.0));
            assert!(negative_intervals(&p, &ScanConfig::for_dimension(5)).is_empty());
        }
    }

    #[test]
    fn descartes_examples() {
        assert_eq!(descartes_bound(&poly(&[(3.0, 1.0), (2.0, -2.0), (1.0, 3.0)])), 2);
        assert_eq!(descartes_bound(&poly(&[(3.0, 0.5), (1.0, -0.5)])), 1);
        assert_eq!(descartes_bound(&poly(&[(3.0, 1.0), (2.0, 0.0), (1.0, 1.0)])), 0);
    }

    #[test]
    fn eval_examples() {
        let p = poly(&[(3.0, 0.5), (1.0, -0.5)]);
        assert!((p.eval(1.0).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(p.eval(0.0).unwrap(), 0.0);
        let q = poly(&[(3.0, 1.0 / 3.0)]);
        assert!((q.eval(2.0).unwrap() - 3.0).abs() < 1e-14);
    }

    #[test]
    fn singular_polynomial_rejects_negative_t() {
        let tol = Tolerances::default();
        let dec = spectral_decompose(&SymMatrix::ones(2), &tol).unwrap();
        let p = entry_exppoly(&dec, 0, 1, &tol).unwrap();
        assert!(p.is_singular());
        assert_eq!(p.eval(-1.0), Err(Error::ZeroToNegativePower));
        // 0^0 = 1: (J^0)_{12} = 0 since J^0 = I
        assert!(p.eval(0.0).unwrap().abs() < 1e-15);
        assert!((p.eval(2.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn increasing_polynomial_has_no_negative_interval() {
        let p = poly(&[(3.0, 0.5), (1.0, -0.5)]);
        let scan = ScanConfig::new(0.01, 5.0, 0.01).unwrap();
        assert!(negative_intervals(&p, &scan).is_empty());
        assert_eq!(entry_critical_exponent(&p, &scan), 0.0);
    }

    #[test]
    fn tridiagonal_corner_interval() {
        let tol = Tolerances::default();
        let dec = spectral_decompose(&tridiag121(4), &tol).unwrap();
        let p = entry_exppoly(&dec, 0, 3, &tol).unwrap();
        let scan = ScanConfig::new(0.01, 4.0, 0.01).unwrap();
        let set = negative_intervals(&p, &scan);
        assert_eq!(set.count(), 1);
        let (lo, hi) = set.intervals[0];
        assert!((lo - 1.0).abs() < 1e-6, "lo = {lo}");
        assert!((hi - 2.0).abs() < 1e-9, "hi = {hi}");
        assert!((entry_critical_exponent(&p, &scan) - 2.0).abs() < 1e-9);
    }

    #[test]
    fn interval_touching_scan_end_is_truncated() {
        // 2·2^t − 3·1.5^t is negative until t = ln(1.5)/ln(4/3) ≈ 1.409
        let p = poly(&[(2.0, 2.0), (1.5, -3.0)]);
        let scan = ScanConfig::new(0.0, 1.0, 0.1).unwrap();
        let set = negative_intervals(&p, &scan);
        assert_eq!(set.intervals, vec![(0.0, 1.0)]);
        let wide = ScanConfig::new(0.0, 3.0, 0.1).unwrap();
        let root = 1.5f64.ln() / (4.0f64 / 3.0).ln();
        assert!((negative_intervals(&p, &wide).sup() - root).abs() < 1e-9);
    }

    #[test]
    fn grid_alternations_count_roots() {
        // 4^t − 3·2^t + 2 = (2^t − 1)(2^t − 2): roots at t = 0 and t = 1
        let p = poly(&[(4.0, 1.0), (2.0, -3.0), (1.0, 2.0)]);
        let scan = ScanConfig::new(-1.0, 3.0, 0.01).unwrap();
        assert_eq!(grid_sign_alternations(&p, &scan), 2);
        assert!(grid_sign_alternations(&p, &scan) <= descartes_bound(&p));
    }

    #[test]
    fn grid_includes_endpoints() {
        let g = ScanConfig::new(0.0, 1.0, 0.3).unwrap().grid();
        assert_eq!(g.first(), Some(&0.0));
        assert_eq!(g.last(), Some(&1.0));
        assert_eq!(g.len(), 5);
        let g = ScanConfig::new(0.01, 4.0, 0.01).unwrap().grid();
        assert_eq!(g.len(), 400);
        assert!(ScanConfig::new(1.0, 1.0, 0.1).is_err());
        assert!(ScanConfig::new(0.0, 1.0, 0.0).is_err());
    }
}
