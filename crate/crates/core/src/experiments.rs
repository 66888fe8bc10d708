//! Witness constructions and randomized checks: tridiagonal lower-bound
//! witnesses, the three-eigenvalue, monotonicity and `(εA + I)^t` results,
//! and searches for large empirical critical exponents.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::certify::crude_bound;
use crate::error::{Error, Result};
use crate::exppoly::{entry_critical_exponent, entry_exppoly, negative_intervals, ScanConfig};
use crate::matcore::{
    check_dn, is_irreducible, spectral_decompose, SpectralDecomposition, SymMatrix, Tolerances,
};

/// Largest dimension accepted by [`search_critical_exponent`].
pub const MAX_SEARCH_N: usize = 6;

/// Maps `(seed, index)` to an independent 64-bit seed (SplitMix64 finalizer).
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    let mut z = seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug, Serialize)]
pub struct Claim {
    pub description: String,
    pub verified: bool,
}

impl Claim {
    fn new(description: impl Into<String>, verified: bool) -> Self {
        Claim { description: description.into(), verified }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessReport {
    pub matrix: SymMatrix,
    pub claims: Vec<Claim>,
    /// Last negative interval of the witnessed entry.
    pub negative_window: Option<(f64, f64)>,
    /// Smallest observed value, relative to `max |A^t|` at the same `t`.
    pub min_value: f64,
    pub argmin_t: f64,
    pub empirical_critexp: f64,
    pub scan: ScanConfig,
}

impl WitnessReport {
    pub fn verified(&self) -> bool {
        self.claims.iter().all(|c| c.verified)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PerturbationReport {
    pub epsilon: f64,
    /// `ε λ₁`, at most 1 by construction.
    pub epsilon_radius: f64,
    /// Number of binomial-series terms summed for the diagnostic.
    pub truncation: usize,
    /// `max |Σ_{k<truncation} c_k (εA)^k − (εA + I)^t| / max |(εA + I)^t|` at `t = t_lo`.
    pub series_residual: f64,
    pub verified_range: (f64, f64),
    pub min_value: f64,
    pub argmin_t: f64,
    pub pass: bool,
    pub scan: ScanConfig,
}

/// Tracks the smallest relative value seen during a scan.
struct MinTracker {
    value: f64,
    t: f64,
}

impl MinTracker {
    fn new() -> Self {
        MinTracker { value: f64::INFINITY, t: f64::NAN }
    }

    fn observe(&mut self, t: f64, value: f64) {
        if value < self.value {
            self.value = value;
            self.t = t;
        }
    }
}

fn relative_min_entry(m: &SymMatrix) -> f64 {
    let scale = m.max_abs();
    if scale == 0.0 {
        0.0
    } else {
        m.min_entry() / scale
    }
}

/// `B Bᵀ` with `B` an `n × rank` matrix of uniform `[0, 1]` entries.
pub fn random_dn(n: usize, rank: usize, seed: u64) -> Result<SymMatrix> {
    if n == 0 || rank == 0 || rank > n {
        return Err(Error::BadRank { rank, n });
    }
    let mut rng = rng_for(seed);
    let b: Vec<f64> = (0..n * rank).map(|_| rng.gen::<f64>()).collect();
    Ok(gram(n, rank, &b))
}

fn gram(n: usize, rank: usize, b: &[f64]) -> SymMatrix {
    SymMatrix::from_fn(n, |i, j| (0..rank).map(|k| b[i * rank + k] * b[j * rank + k]).sum())
}

/// Gram matrix whose factor has about half of its entries zeroed, giving
/// varied sparsity patterns (possibly reducible or singular).
fn random_sparse_dn(n: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    let rank = rng.gen_range(1..=n);
    let b: Vec<f64> = (0..n * rank)
        .map(|_| if rng.gen_bool(0.5) { 0.0 } else { rng.gen::<f64>() })
        .collect();
    gram(n, rank, &b)
}

/// Irreducible, strictly diagonally dominant tridiagonal DN matrix:
/// off-diagonals uniform in `[0.5, 1.5]`, diagonal = off-diagonal row sum
/// plus uniform `[0.1, 1]`.
pub fn random_tridiagonal(n: usize, rng: &mut impl Rng) -> SymMatrix {
    let off: Vec<f64> = (0..n.saturating_sub(1)).map(|_| rng.gen_range(0.5..=1.5)).collect();
    let diag: Vec<f64> = (0..n)
        .map(|i| {
            let left = if i > 0 { off[i - 1] } else { 0.0 };
            let right = if i + 1 < n { off[i] } else { 0.0 };
            left + right + rng.gen_range(0.1..=1.0)
        })
        .collect();
    SymMatrix::tridiagonal(&diag, &off)
}

/// Draws random DN Gram matrices until one is generic: well-separated
/// eigenvalues, eigenvector entries bounded away from zero, and invertible.
pub fn random_generic_dn(n: usize, seed: u64, tol: &Tolerances) -> Result<(SymMatrix, SpectralDecomposition)> {
    for attempt in 0..1000 {
        let a = random_dn(n, n, derive_seed(seed, attempt))?;
        let dec = spectral_decompose(&a, tol)?;
        let ev = dec.eigenvalues();
        let scale = ev[0];
        let separated = ev.windows(2).all(|w| w[0] - w[1] > 1e-4 * scale);
        let invertible = ev[n - 1] > 1e-6 * scale;
        let entries_ok = (0..n).all(|i| (0..n).all(|k| dec.u(i, k).abs() > 1e-3));
        if separated && invertible && entries_ok {
            return Ok((a, dec));
        }
    }
    Err(Error::InvalidArgument(format!("no generic {n}×{n} draw found for seed {seed}")))
}

/// Critical exponents of every entry, scanned on `scan`.
pub fn entry_critical_exponents(dec: &SpectralDecomposition, scan: &ScanConfig, tol: &Tolerances) -> Result<Vec<f64>> {
    let n = dec.n();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let p = entry_exppoly(dec, i, j, tol)?;
            let c = entry_critical_exponent(&p, scan);
            out[i * n + j] = c;
            out[j * n + i] = c;
        }
    }
    Ok(out)
}

/// Matrix-level critical exponent: the largest entry critical exponent.
pub fn empirical_critical_exponent(a: &SymMatrix, scan: &ScanConfig, tol: &Tolerances) -> Result<f64> {
    let dec = spectral_decompose(a, tol)?;
    Ok(entry_critical_exponents(&dec, scan, tol)?.into_iter().fold(0.0, f64::max))
}

/// Builds a random tridiagonal witness and checks that `(A^t)_{1n}` is
/// negative on `(n − 3, n − 2)` and nonnegative from `n − 2` on.
pub fn tridiagonal_witness(n: usize, seed: u64, scan: &ScanConfig, tol: &Tolerances) -> Result<WitnessReport> {
    if n < 3 {
        return Err(Error::DimensionTooSmall { n, min: 3 });
    }
    let a = random_tridiagonal(n, &mut rng_for(seed));
    let dec = spectral_decompose(&a, tol)?;
    let dn = check_dn(&a, tol);
    let corner = n - 1;
    let lo = (n - 3) as f64;
    let hi = (n - 2) as f64;

    let mut claims = vec![Claim::new(
        "A is doubly nonnegative, irreducible and invertible",
        dn.is_dn && dn.is_irreducible && dn.is_invertible,
    )];
    claims.push(Claim::new(
        format!("(A^k)[1][{n}] = 0 for k = 0..={}", n - 2),
        (0..=(n - 2) as u32).all(|k| a.int_power(k).get(0, corner) == 0.0),
    ));

    let mid = dec.power(hi - 0.5)?;
    claims.push(Claim::new(format!("(A^t)[1][{n}] < 0 at t = {}", hi - 0.5), mid.get(0, corner) < 0.0));

    let mut tracker = MinTracker::new();
    let mut negative_inside = false;
    let mut nonneg_after = true;
    for t in scan.grid() {
        let p = dec.power(t)?;
        let rel = p.get(0, corner) / p.max_abs();
        tracker.observe(t, rel);
        if t > lo && t < hi && rel < -scan.entry_tol {
            negative_inside = true;
        }
        if t >= hi && rel < -scan.entry_tol {
            nonneg_after = false;
        }
    }
    claims.push(Claim::new(format!("(A^t)[1][{n}] < -tol somewhere in ({lo}, {hi})"), negative_inside));
    claims.push(Claim::new(format!("(A^t)[1][{n}] >= -tol for all grid t >= {hi}"), nonneg_after));

    let poly = entry_exppoly(&dec, 0, corner, tol)?;
    let set = negative_intervals(&poly, scan);
    let negative_window = set.intervals.last().copied();
    let slack = 1e-6;
    claims.push(Claim::new(
        format!("last negative interval of (A^t)[1][{n}] lies inside [{lo}, {hi}]"),
        negative_window.is_some_and(|(a, b)| a >= lo - slack && b <= hi + slack),
    ));

    let empirical_critexp = entry_critical_exponents(&dec, scan, tol)?.into_iter().fold(0.0, f64::max);
    Ok(WitnessReport {
        matrix: a,
        claims,
        negative_window,
        min_value: tracker.value,
        argmin_t: tracker.t,
        empirical_critexp,
        scan: *scan,
    })
}

/// Default scan for a tridiagonal witness of dimension `n`.
pub fn witness_scan(n: usize) -> ScanConfig {
    ScanConfig::for_dimension(n)
}

/// Matrices with at most three distinct eigenvalues.
#[derive(Clone, Debug)]
pub enum ThreeEigenvalueKind {
    /// Adjacency of the 4-cycle plus `2I`.
    Cycle4,
    /// Adjacency of the 5-cycle plus `2I`.
    Cycle5,
    Custom(SymMatrix),
}

fn cycle_plus_two(k: usize) -> SymMatrix {
    SymMatrix::from_fn(k, |i, j| {
        if i == j {
            2.0
        } else if (j + k - i) % k == 1 || (i + k - j) % k == 1 {
            1.0
        } else {
            0.0
        }
    })
}

pub fn three_eigenvalue_matrix(kind: ThreeEigenvalueKind, tol: &Tolerances) -> Result<SymMatrix> {
    let a = match kind {
        ThreeEigenvalueKind::Cycle4 => cycle_plus_two(4),
        ThreeEigenvalueKind::Cycle5 => cycle_plus_two(5),
        ThreeEigenvalueKind::Custom(a) => a,
    };
    let dn = check_dn(&a, tol);
    if dn.num_distinct_eigenvalues > 3 {
        return Err(Error::TooManyEigenvalues(dn.num_distinct_eigenvalues));
    }
    if !dn.is_dn {
        return Err(Error::NotDn);
    }
    Ok(a)
}

fn petersen_adjacency() -> SymMatrix {
    // outer 5-cycle 0..5, inner pentagram 5..10, spokes i to i+5
    SymMatrix::from_fn(10, |i, j| {
        let (a, b) = (i.min(j), i.max(j));
        let edge = if b < 5 {
            b - a == 1 || b - a == 4
        } else if a >= 5 {
            let d = b - a;
            d == 2 || d == 3
        } else {
            b == a + 5
        };
        if edge {
            1.0
        } else {
            0.0
        }
    })
}

fn permute(a: &SymMatrix, perm: &[usize]) -> SymMatrix {
    SymMatrix::from_fn(a.n(), |i, j| a.get(perm[i], perm[j]))
}

/// Random DN matrix with at most three distinct eigenvalues, drawn from
/// several structured families and randomly relabelled.
pub fn random_three_eigenvalue(seed: u64) -> SymMatrix {
    let mut rng = rng_for(seed);
    let a = match rng.gen_range(0..4) {
        0 => {
            // αI + βJ + γ(J_p ⊕ … ⊕ J_p): eigenvalues α, α + γp, α + γp + βn
            let blocks = rng.gen_range(2..=3);
            let size = rng.gen_range(2..=3);
            let n = blocks * size;
            let (alpha, beta, gamma) =
                (rng.gen_range(0.1..2.0), rng.gen_range(0.05..1.0), rng.gen_range(0.1..2.0));
            SymMatrix::from_fn(n, |i, j| {
                let same = i / size == j / size;
                (if i == j { alpha } else { 0.0 }) + beta + if same { gamma } else { 0.0 }
            })
        }
        1 => {
            // sI + c·K_{p,q}: eigenvalues s ± c√(pq), s; singular when s = c√(pq)
            let p = rng.gen_range(1..=4);
            let q = rng.gen_range(1..=4);
            let c: f64 = rng.gen_range(0.2..2.0);
            let radius = c * ((p * q) as f64).sqrt();
            let s = if rng.gen_bool(0.2) { radius } else { radius * rng.gen_range(1.01..3.0) };
            SymMatrix::from_fn(p + q, |i, j| {
                if i == j {
                    s
                } else if (i < p) != (j < p) {
                    c
                } else {
                    0.0
                }
            })
        }
        2 => {
            // aI + b·C5: eigenvalues a + 2b, a + 2b cos 72°, a + 2b cos 144°
            let b: f64 = rng.gen_range(0.2..2.0);
            let a = b * 2.0 * (0.8 * std::f64::consts::PI).cos().abs() + rng.gen_range(0.01..2.0);
            let c5 = cycle_plus_two(5);
            SymMatrix::from_fn(5, |i, j| if i == j { a } else { b * c5.get(i, j) })
        }
        _ => {
            // aI + b·Petersen: eigenvalues a + 3b, a + b, a − 2b
            let b: f64 = rng.gen_range(0.2..2.0);
            let a = 2.0 * b + rng.gen_range(0.01..2.0);
            petersen_adjacency().scale(b).add(&SymMatrix::identity(10).scale(a))
        }
    };
    let mut perm: Vec<usize> = (0..a.n()).collect();
    for i in (1..perm.len()).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    permute(&a, &perm)
}

/// Checks that every entry of `A^t` is nonnegative on the grid over
/// `[1, scan.t_max]` for a DN matrix with at most three distinct eigenvalues.
pub fn check_three_eigenvalue_theorem(a: &SymMatrix, scan: &ScanConfig, tol: &Tolerances) -> Result<WitnessReport> {
    let dec = spectral_decompose(a, tol)?;
    let distinct = dec.distinct_eigenvalue_count(tol.merge_tol);
    if distinct > 3 {
        return Err(Error::TooManyEigenvalues(distinct));
    }
    let dn = check_dn(a, tol);
    let window = scan.with_range(1.0, scan.t_max.max(1.0 + scan.step))?;
    let mut tracker = MinTracker::new();
    for t in window.grid() {
        tracker.observe(t, relative_min_entry(&dec.power(t)?));
    }
    let claims = vec![
        Claim::new("A is doubly nonnegative", dn.is_dn),
        Claim::new(format!("A has {distinct} <= 3 distinct eigenvalues"), true),
        Claim::new(
            format!("min entry of A^t >= -tol for grid t in [1, {}]", window.t_max),
            tracker.value >= -scan.entry_tol,
        ),
    ];
    let empirical_critexp = entry_critical_exponents(&dec, scan, tol)?.into_iter().fold(0.0, f64::max);
    Ok(WitnessReport {
        matrix: a.clone(),
        claims,
        negative_window: None,
        min_value: tracker.value,
        argmin_t: tracker.t,
        empirical_critexp,
        scan: window,
    })
}

/// With `B = A + r x₁x₁ᵀ`, checks `B^t ≥ A^t` entry-wise on the grid.
pub fn check_monotonicity(a: &SymMatrix, r: f64, scan: &ScanConfig, tol: &Tolerances) -> Result<WitnessReport> {
    if !(r >= 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("r must be a nonnegative real, got {r}")));
    }
    if scan.t_min < 0.0 {
        return Err(Error::BadScan("monotonicity is checked for t >= 0".into()));
    }
    let dec_a = spectral_decompose(a, tol)?;
    let ev = dec_a.eigenvalues();
    if ev.len() > 1 && ev[0] - ev[1] <= tol.merge_tol * ev[0].max(1.0) {
        return Err(Error::RepeatedTopEigenvalue);
    }
    let x1 = dec_a.eigenvector(0);
    let b = a.add(&SymMatrix::from_fn(a.n(), |i, j| r * x1[i] * x1[j]));
    let dec_b = spectral_decompose(&b, tol)?;

    let mut tracker = MinTracker::new();
    for t in scan.grid() {
        let bt = dec_b.power(t)?;
        let at = dec_a.power(t)?;
        let diff = bt.sub(&at);
        tracker.observe(t, diff.min_entry() / bt.max_abs().max(f64::MIN_POSITIVE));
    }
    let dn = check_dn(a, tol);
    let claims = vec![
        Claim::new("A is doubly nonnegative", dn.is_dn),
        Claim::new("Perron vector x1 is entry-wise nonnegative", x1.iter().all(|&x| x >= -tol.sign_tol)),
        Claim::new(
            format!("B^t - A^t >= -tol entry-wise for grid t in [{}, {}]", scan.t_min, scan.t_max),
            tracker.value >= -scan.entry_tol,
        ),
    ];
    Ok(WitnessReport {
        matrix: b,
        claims,
        negative_window: None,
        min_value: tracker.value,
        argmin_t: tracker.t,
        empirical_critexp: 0.0,
        scan: *scan,
    })
}

/// Generalized binomial coefficients `c_k = t(t−1)…(t−k+1)/k!` for `k < terms`.
pub fn binomial_coefficients(t: f64, terms: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(terms);
    let mut cur = 1.0;
    for k in 0..terms {
        c.push(cur);
        cur *= (t - k as f64) / (k + 1) as f64;
    }
    c
}

/// Chooses the largest `ε` with `ε A^n ≤ A^{n−1}` entry-wise and checks
/// `(εA + I)^t ≥ 0` on the grid over `[n − 2, scan.t_max]`.
pub fn check_perturbation(a: &SymMatrix, scan: &ScanConfig, tol: &Tolerances) -> Result<PerturbationReport> {
    const SERIES_TERMS: usize = 200;
    if !is_irreducible(a) {
        return Err(Error::NotIrreducible);
    }
    if !check_dn(a, tol).is_dn {
        return Err(Error::NotDn);
    }
    let n = a.n();
    let lower = a.int_power(n as u32 - 1);
    let upper = a.int_power(n as u32);
    let mut epsilon = f64::INFINITY;
    for i in 0..n {
        for j in 0..n {
            let (num, den) = (lower.get(i, j), upper.get(i, j));
            if num <= 0.0 || den <= 0.0 {
                return Err(Error::NotIrreducible);
            }
            epsilon = epsilon.min(num / den);
        }
    }
    let lam1 = spectral_decompose(a, tol)?.eigenvalues()[0];
    let shifted = a.scale(epsilon).add(&SymMatrix::identity(n));
    let dec = spectral_decompose(&shifted, tol)?;

    let t_lo = n.saturating_sub(2) as f64;
    let t_hi = scan.t_max.max(t_lo + scan.step);
    let window = scan.with_range(t_lo, t_hi)?;
    let mut tracker = MinTracker::new();
    for t in window.grid() {
        tracker.observe(t, relative_min_entry(&dec.power(t)?));
    }

    let exact = dec.power(t_lo)?;
    let scaled = a.scale(epsilon);
    let coeffs = binomial_coefficients(t_lo, SERIES_TERMS);
    let mut term = SymMatrix::identity(n);
    let mut sum = SymMatrix::identity(n).scale(coeffs[0]);
    for &c in &coeffs[1..] {
        term = SymMatrix::from_fn(n, |i, j| (0..n).map(|k| term.get(i, k) * scaled.get(k, j)).sum());
        sum = sum.add(&term.scale(c));
    }
    let series_residual = sum.max_abs_diff(&exact) / exact.max_abs();

    Ok(PerturbationReport {
        epsilon,
        epsilon_radius: epsilon * lam1,
        truncation: SERIES_TERMS,
        series_residual,
        verified_range: (window.t_min, window.t_max),
        min_value: tracker.value,
        argmin_t: tracker.t,
        pass: tracker.value >= -scan.entry_tol,
        scan: window,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gram,
    Tridiagonal,
    Mixed,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gram" => Ok(Family::Gram),
            "tridiagonal" => Ok(Family::Tridiagonal),
            "mixed" => Ok(Family::Mixed),
            other => Err(Error::InvalidArgument(format!("unknown family {other:?}"))),
        }
    }
}

/// Draws trial `index` of a search deterministically from `seed`.
pub fn draw_family_member(n: usize, family: Family, seed: u64, index: u64) -> SymMatrix {
    let mut rng = rng_for(derive_seed(seed, index));
    let gram_full = |rng: &mut ChaCha8Rng| {
        let b: Vec<f64> = (0..n * n).map(|_| rng.gen::<f64>()).collect();
        gram(n, n, &b)
    };
    match family {
        Family::Gram => gram_full(&mut rng),
        Family::Tridiagonal => random_tridiagonal(n, &mut rng),
        Family::Mixed => match index % 4 {
            0 => gram_full(&mut rng),
            1 => random_tridiagonal(n, &mut rng),
            2 => random_sparse_dn(n, &mut rng),
            _ => {
                let rank = rng.gen_range(1..=n);
                let b: Vec<f64> = (0..n * rank).map(|_| rng.gen::<f64>()).collect();
                gram(n, rank, &b)
            }
        },
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SearchSummary {
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub family: Family,
    pub max_found: f64,
    pub argmax_trial: usize,
    pub argmax_matrix: SymMatrix,
    pub argmax_distinct_eigenvalues: usize,
    /// `histogram[k]` counts trials with critical exponent in `(k − 1, k]`
    /// (`histogram[0]` counts exact zeros).
    pub histogram: Vec<usize>,
    pub scan: ScanConfig,
}

/// Samples `trials` matrices and records the largest empirical critical exponent.
pub fn search_critical_exponent(
    n: usize,
    trials: usize,
    seed: u64,
    family: Family,
    scan: &ScanConfig,
    tol: &Tolerances,
) -> Result<SearchSummary> {
    if n > MAX_SEARCH_N {
        return Err(Error::DimensionTooLarge { n, max: MAX_SEARCH_N });
    }
    if n < 2 {
        return Err(Error::DimensionTooSmall { n, min: 2 });
    }
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let results: Vec<(f64, SymMatrix)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let a = draw_family_member(n, family, seed, i as u64);
            empirical_critical_exponent(&a, scan, tol).map(|c| (c, a))
        })
        .collect::<Result<_>>()?;

    let (argmax_trial, (max_found, _)) = results
        .iter()
        .enumerate()
        .fold((0, &results[0]), |best, (i, r)| if r.0 > best.1 .0 { (i, r) } else { best });
    let argmax_matrix = results[argmax_trial].1.clone();
    let mut histogram = vec![0usize; crude_bound(n) as usize + 2];
    for (c, _) in &results {
        let bucket = (c - scan.endpoint_tol).ceil().max(0.0) as usize;
        let last = histogram.len() - 1;
        histogram[bucket.min(last)] += 1;
    }
    let argmax_distinct_eigenvalues =
        spectral_decompose(&argmax_matrix, tol)?.distinct_eigenvalue_count(tol.merge_tol);
    Ok(SearchSummary {
        n,
        trials,
        seed,
        family,
        max_found: *max_found,
        argmax_trial,
        argmax_matrix,
        argmax_distinct_eigenvalues,
        histogram,
        scan: *scan,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn random_dn_examples() {
        let a = random_dn(3, 3, 42).unwrap();
        assert!(check_dn(&a, &tol()).is_dn);
        let r1 = random_dn(3, 1, 7).unwrap();
        let rep = check_dn(&r1, &tol());
        assert!(rep.is_dn && !rep.is_invertible);
        assert!(random_dn(1, 1, 0).unwrap().get(0, 0) > 0.0);
        assert_eq!(random_dn(3, 4, 0), Err(Error::BadRank { rank: 4, n: 3 }));
        assert_eq!(random_dn(3, 3, 42), random_dn(3, 3, 42));
    }

    #[test]
    fn witness_n4() {
        let scan = witness_scan(4);
        let r = tridiagonal_witness(4, 11, &scan, &tol()).unwrap();
        assert!(r.verified(), "{:#?}", r.claims);
        let (lo, hi) = r.negative_window.unwrap();
        assert!(lo >= 1.0 - 1e-6 && hi <= 2.0 + 1e-6);
        assert!((r.empirical_critexp - 2.0).abs() < 1e-6);
        assert!(matches!(tridiagonal_witness(2, 0, &scan, &tol()), Err(Error::DimensionTooSmall { .. })));
    }

    #[test]
    fn witness_n6() {
        let r = tridiagonal_witness(6, 3, &witness_scan(6), &tol()).unwrap();
        assert!(r.verified(), "{:#?}", r.claims);
        let (lo, hi) = r.negative_window.unwrap();
        assert!(lo >= 3.0 - 1e-6 && hi <= 4.0 + 1e-6);
        assert!((r.empirical_critexp - 4.0).abs() < 1e-6, "{}", r.empirical_critexp);
    }

    #[test]
    fn cycle_spectra() {
        let t = tol();
        let c4 = three_eigenvalue_matrix(ThreeEigenvalueKind::Cycle4, &t).unwrap();
        let ev = spectral_decompose(&c4, &t).unwrap().eigenvalues().to_vec();
        let want = [4.0, 2.0, 2.0, 0.0];
        assert!(ev.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12));

        let c5 = three_eigenvalue_matrix(ThreeEigenvalueKind::Cycle5, &t).unwrap();
        let dec = spectral_decompose(&c5, &t).unwrap();
        assert_eq!(dec.distinct_eigenvalue_count(t.merge_tol), 3);
        let c72 = 2.0 + 2.0 * (0.4 * std::f64::consts::PI).cos();
        assert!((dec.eigenvalues()[1] - c72).abs() < 1e-12);

        let jp = SymMatrix::ones(3).add(&SymMatrix::identity(3));
        let m = three_eigenvalue_matrix(ThreeEigenvalueKind::Custom(jp), &t).unwrap();
        assert_eq!(check_dn(&m, &t).num_distinct_eigenvalues, 2);

        let many = random_dn(5, 5, 1).unwrap();
        assert!(matches!(
            three_eigenvalue_matrix(ThreeEigenvalueKind::Custom(many), &t),
            Err(Error::TooManyEigenvalues(5))
        ));
    }

    #[test]
    fn three_eigenvalue_checks() {
        let t = tol();
        let scan = ScanConfig::new(0.01, 10.0, 0.01).unwrap();
        for kind in [ThreeEigenvalueKind::Cycle4, ThreeEigenvalueKind::Cycle5] {
            let a = three_eigenvalue_matrix(kind, &t).unwrap();
            assert!(check_three_eigenvalue_theorem(&a, &scan, &t).unwrap().verified());
        }
        let many = random_dn(5, 5, 1).unwrap();
        assert!(matches!(check_three_eigenvalue_theorem(&many, &scan, &t), Err(Error::TooManyEigenvalues(_))));
    }

    #[test]
    fn random_three_eigenvalue_family() {
        let t = tol();
        for seed in 0..40 {
            let a = random_three_eigenvalue(seed);
            let rep = check_dn(&a, &t);
            assert!(rep.is_dn, "seed {seed}");
            assert!(rep.num_distinct_eigenvalues <= 3, "seed {seed}: {}", rep.num_distinct_eigenvalues);
        }
    }

    #[test]
    fn petersen_spectrum() {
        let dec = spectral_decompose(&petersen_adjacency(), &tol()).unwrap();
        let ev = dec.eigenvalues();
        assert!((ev[0] - 3.0).abs() < 1e-12 && (ev[1] - 1.0).abs() < 1e-12 && (ev[9] + 2.0).abs() < 1e-12);
        assert_eq!(dec.distinct_eigenvalue_count(1e-8), 3);
    }

    #[test]
    fn monotonicity_2x2_closed_form() {
        let t = tol();
        let a = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let scan = ScanConfig::new(0.0, 5.0, 0.01).unwrap();
        let r = check_monotonicity(&a, 1.0, &scan, &t).unwrap();
        assert!(r.verified());
        let b = &r.matrix;
        assert!(b.max_abs_diff(&SymMatrix::from_rows(&[vec![2.5, 1.5], vec![1.5, 2.5]]).unwrap()) < 1e-14);
        // B^t − A^t = ((4^t − 3^t)/2)·J
        let db = spectral_decompose(b, &t).unwrap();
        let da = spectral_decompose(&a, &t).unwrap();
        for s in [0.5, 1.5, 3.0] {
            let d = db.power(s).unwrap().sub(&da.power(s).unwrap());
            let want = (4f64.powf(s) - 3f64.powf(s)) / 2.0;
            assert!(d.max_abs_diff(&SymMatrix::ones(2).scale(want)) < 1e-12 * 4f64.powf(s));
        }
    }

    #[test]
    fn monotonicity_edge_cases() {
        let t = tol();
        let scan = ScanConfig::new(0.0, 3.0, 0.05).unwrap();
        let a = random_dn(4, 4, 5).unwrap();
        let r = check_monotonicity(&a, 0.0, &scan, &t).unwrap();
        assert_eq!(r.min_value, 0.0);
        assert_eq!(check_monotonicity(&SymMatrix::identity(2), 1.0, &scan, &t).unwrap_err(), Error::RepeatedTopEigenvalue);
        assert!(check_monotonicity(&a, -1.0, &scan, &t).is_err());
    }

    #[test]
    fn perturbation_examples() {
        let t = tol();
        let scan = ScanConfig::new(0.01, 9.0, 0.01).unwrap();
        let a = SymMatrix::tridiagonal(&[2.0; 4], &[1.0; 3]);
        let r = check_perturbation(&a, &scan, &t).unwrap();
        assert!(r.pass);
        assert_eq!(r.verified_range, (2.0, 9.0));
        // independent oracle: entry-wise ratio of integer powers
        let (p3, p4) = (a.int_power(3), a.int_power(4));
        let mut eps = f64::INFINITY;
        for i in 0..4 {
            for j in 0..4 {
                eps = eps.min(p3.get(i, j) / p4.get(i, j));
            }
        }
        assert_eq!(r.epsilon, eps);
        assert!(r.epsilon_radius <= 1.0 + 1e-12);
        assert!(r.series_residual < 1e-6, "{}", r.series_residual);

        let j2 = check_perturbation(&SymMatrix::ones(2), &scan, &t).unwrap();
        assert!(j2.pass);
        assert!((j2.epsilon - 0.5).abs() < 1e-15);

        assert_eq!(
            check_perturbation(&SymMatrix::diagonal(&[1.0, 2.0]), &scan, &t).unwrap_err(),
            Error::NotIrreducible
        );
    }

    #[test]
    fn binomial_series_coefficients() {
        assert_eq!(binomial_coefficients(2.0, 4), vec![1.0, 2.0, 1.0, 0.0]);
        let c = binomial_coefficients(0.5, 3);
        assert!((c[2] + 0.125).abs() < 1e-15);
    }

    #[test]
    fn empirical_exponents() {
        let t = tol();
        let scan4 = ScanConfig::for_dimension(4);
        let a = SymMatrix::tridiagonal(&[2.0; 4], &[1.0; 3]);
        assert!((empirical_critical_exponent(&a, &scan4, &t).unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(empirical_critical_exponent(&SymMatrix::ones(3), &ScanConfig::for_dimension(3), &t).unwrap(), 0.0);
        let b = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        assert_eq!(empirical_critical_exponent(&b, &ScanConfig::for_dimension(2), &t).unwrap(), 0.0);
    }

    #[test]
    fn search_is_deterministic_and_bounded() {
        let t = tol();
        let scan = ScanConfig::for_dimension(3);
        let a = search_critical_exponent(3, 50, 1, Family::Gram, &scan, &t).unwrap();
        assert!(a.max_found <= 1.0 + 1e-6);
        let b = search_critical_exponent(3, 50, 1, Family::Gram, &scan, &t).unwrap();
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        assert_eq!(a.histogram.iter().sum::<usize>(), 50);
        assert!(matches!(
            search_critical_exponent(7, 1, 1, Family::Gram, &scan, &t),
            Err(Error::DimensionTooLarge { .. })
        ));
    }

    #[test]
    fn search_examples() {
        let t = tol();
        let five = search_critical_exponent(5, 200, 1, Family::Tridiagonal, &ScanConfig::for_dimension(5), &t).unwrap();
        assert!(five.max_found >= 3.0 - 0.05 && five.max_found <= 3.0 + 1e-6, "{}", five.max_found);
        let four = search_critical_exponent(4, 200, 1, Family::Mixed, &ScanConfig::for_dimension(4), &t).unwrap();
        assert!(four.max_found <= 2.0 + 1e-6, "{}", four.max_found);
    }

    #[test]
    fn family_names_parse() {
        assert_eq!("mixed".parse::<Family>().unwrap(), Family::Mixed);
        assert!("other".parse::<Family>().is_err());
    }
}
