//! Exhaustive enumeration of normalized eigenvector sign patterns and of the
//! sign change matrices they induce, up to permutation similarity.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exppoly::count_sign_changes;
use crate::signchange::{parse_w_list, SignChangeMatrix};

/// Largest dimension for pattern enumeration.
pub const MAX_ENUM_N: usize = 6;
/// Largest dimension for brute-force canonicalization.
pub const MAX_CANON_N: usize = 8;

const REFERENCE_W5: &str = include_str!("../data/reference_w5.txt");

/// Signs of an eigenvector matrix `U`: `s[i][k] = sign(u_ik)`, columns in
/// decreasing eigenvalue order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SignPattern {
    n: usize,
    s: Vec<i8>,
}

impl SignPattern {
    /// Validates the normalization: first row and first column positive, rows
    /// pairwise distinct, columns pairwise distinct.
    pub fn new(n: usize, s: Vec<i8>) -> Result<Self> {
        if n == 0 || s.len() != n * n || s.iter().any(|&x| x != 1 && x != -1) {
            return Err(Error::Malformed("sign pattern must be n×n with entries ±1".into()));
        }
        let p = SignPattern { n, s };
        if !p.is_normalized() {
            return Err(Error::Malformed("sign pattern violates the normalization".into()));
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize) -> i8 {
        self.s[i * self.n + k]
    }

    fn is_normalized(&self) -> bool {
        let n = self.n;
        if (0..n).any(|k| self.get(0, k) != 1 || self.get(k, 0) != 1) {
            return false;
        }
        let rows: HashSet<&[i8]> = self.s.chunks(n).collect();
        if rows.len() != n {
            return false;
        }
        let cols: HashSet<Vec<i8>> = (0..n).map(|k| (0..n).map(|i| self.get(i, k)).collect()).collect();
        cols.len() == n
    }
}

impl fmt::Display for SignPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.s.chunks(self.n) {
            let line: String = row.iter().map(|&x| if x > 0 { '+' } else { '-' }).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Lazy stream over all normalized sign patterns of dimension `n`.
///
/// The free `(n−1)×(n−1)` lower-right block runs as a binary counter in
/// row-major order with `+` before `−`, so patterns come out in
/// lexicographic order.
pub struct SignPatterns {
    n: usize,
    next: u64,
    end: u64,
}

impl Iterator for SignPatterns {
    type Item = SignPattern;

    fn next(&mut self) -> Option<SignPattern> {
        let n = self.n;
        let free = (n - 1) * (n - 1);
        while self.next < self.end {
            let code = self.next;
            self.next += 1;
            let mut s = vec![1i8; n * n];
            for cell in 0..free {
                let bit = (code >> (free - 1 - cell)) & 1;
                if bit == 1 {
                    let (r, c) = (1 + cell / (n - 1), 1 + cell % (n - 1));
                    s[r * n + c] = -1;
                }
            }
            let p = SignPattern { n, s };
            if p.is_normalized() {
                return Some(p);
            }
        }
        None
    }
}

pub fn enumerate_sign_patterns(n: usize) -> Result<SignPatterns> {
    check_enum_dim(n)?;
    let free = (n - 1) * (n - 1);
    Ok(SignPatterns { n, next: 0, end: 1u64 << free })
}

fn check_enum_dim(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::DimensionTooSmall { n, min: 1 });
    }
    if n > MAX_ENUM_N {
        return Err(Error::DimensionTooLarge { n, max: MAX_ENUM_N });
    }
    Ok(())
}

/// `w_ij` = sign changes along the Hadamard product of rows `i` and `j`.
pub fn pattern_to_w(p: &SignPattern) -> SignChangeMatrix {
    let n = p.n;
    SignChangeMatrix::from_fn(n, |i, j| {
        count_sign_changes((0..n).map(|k| f64::from(p.get(i, k) * p.get(j, k)))) as u32
    })
}

/// Lexicographically smallest row-major flattening of `P W Pᵀ` over all
/// permutations `P`.
pub fn canonicalize_w(w: &SignChangeMatrix) -> Result<SignChangeMatrix> {
    let n = w.n();
    if n > MAX_CANON_N {
        return Err(Error::DimensionTooLarge { n, max: MAX_CANON_N });
    }
    Ok(canonical_form(w))
}

fn canonical_form(w: &SignChangeMatrix) -> SignChangeMatrix {
    let n = w.n();
    let mut best: Vec<usize> = (0..n).collect();
    let mut perm = best.clone();
    // Heap's algorithm over all n! permutations, comparing lazily.
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            if permuted_less(w, &perm, &best) {
                best.copy_from_slice(&perm);
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    w.permuted(&best)
}

/// Whether the flattening of `W` relabelled by `a` precedes the one by `b`.
#[inline]
fn permuted_less(w: &SignChangeMatrix, a: &[usize], b: &[usize]) -> bool {
    let n = w.n();
    for r in 0..n {
        for c in 0..n {
            let x = w.get(a[r], a[c]);
            let y = w.get(b[r], b[c]);
            if x != y {
                return x < y;
            }
        }
    }
    false
}

/// Canonical classes of the W matrices induced by `patterns`, sorted.
pub fn classes_of(patterns: impl Iterator<Item = SignPattern>) -> Vec<SignChangeMatrix> {
    let raw: HashSet<SignChangeMatrix> = patterns.map(|p| pattern_to_w(&p)).collect();
    canonical_classes(raw.into_iter().collect())
}

fn canonical_classes(raw: Vec<SignChangeMatrix>) -> Vec<SignChangeMatrix> {
    let set: BTreeSet<SignChangeMatrix> = raw.par_iter().map(canonical_form).collect::<Vec<_>>().into_iter().collect();
    set.into_iter().collect()
}

/// All W classes for dimension `n`, sorted by row-major flattening.
///
/// Permuting rows `2..n` of a normalized pattern yields another normalized
/// pattern with a permutation-similar W, so only patterns whose rows `2..n`
/// are in increasing order are visited; the result equals the class set of
/// the full pattern stream.
pub fn enumerate_w_classes(n: usize) -> Result<Vec<SignChangeMatrix>> {
    check_enum_dim(n)?;
    if n == 1 {
        return Ok(classes_of(enumerate_sign_patterns(1)?));
    }
    // Row code: bit (n-2-k) set means column k+1 is negative; 0 is the all-plus row.
    let codes: Vec<u32> = (1..(1u32 << (n - 1))).collect();
    let mut combos = Vec::new();
    choose_increasing(&codes, n - 1, &mut Vec::new(), &mut combos);
    let raw: HashSet<SignChangeMatrix> = combos
        .par_iter()
        .filter_map(|rows| pattern_from_codes(n, rows))
        .map(|p| pattern_to_w(&p))
        .collect();
    Ok(canonical_classes(raw.into_iter().collect()))
}

fn choose_increasing(pool: &[u32], k: usize, current: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if k == 0 {
        out.push(current.clone());
        return;
    }
    for idx in 0..pool.len() {
        if pool.len() - idx < k {
            break;
        }
        current.push(pool[idx]);
        choose_increasing(&pool[idx + 1..], k - 1, current, out);
        current.pop();
    }
}

fn pattern_from_codes(n: usize, codes: &[u32]) -> Option<SignPattern> {
    let mut s = vec![1i8; n * n];
    for (r, &code) in codes.iter().enumerate() {
        for k in 1..n {
            if (code >> (n - 1 - k)) & 1 == 1 {
                s[(r + 1) * n + k] = -1;
            }
        }
    }
    let p = SignPattern { n, s };
    p.is_normalized().then_some(p)
}

/// The 21 matrices of the reference 5×5 list, as originally printed.
pub fn reference_w5() -> Vec<SignChangeMatrix> {
    parse_w_list(REFERENCE_W5).expect("bundled reference list parses")
}

/// Difference between an enumerated class set and a reference list.
#[derive(Clone, Debug, Serialize)]
pub struct ClassComparison {
    /// Canonical reference classes not produced by enumeration.
    pub missing: Vec<SignChangeMatrix>,
    /// Enumerated classes absent from the reference.
    pub extra: Vec<SignChangeMatrix>,
    /// Number of distinct canonical classes in the reference.
    pub reference_classes: usize,
}

impl ClassComparison {
    pub fn is_exact(&self) -> bool {
        self.missing.is_empty() && self.extra.is_empty()
    }
}

pub fn compare_with_reference(classes: &[SignChangeMatrix], reference: &[SignChangeMatrix]) -> Result<ClassComparison> {
    let reference: BTreeSet<SignChangeMatrix> =
        reference.iter().map(canonicalize_w).collect::<Result<_>>()?;
    let found: BTreeSet<&SignChangeMatrix> = classes.iter().collect();
    Ok(ClassComparison {
        missing: reference.iter().filter(|c| !found.contains(c)).cloned().collect(),
        extra: classes.iter().filter(|c| !reference.contains(*c)).cloned().collect(),
        reference_classes: reference.len(),
    })
}
