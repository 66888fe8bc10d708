//! Sign change matrices `W`: `w_ij` counts sign changes in the coefficient
//! sequence of `(A^t)_ij`, eigenvalues in decreasing order.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exppoly::{descartes_bound, entry_exppoly};
use crate::matcore::{data_lines, read_block, SpectralDecomposition, Tolerances};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignChangeMatrix {
    n: usize,
    w: Vec<u32>,
}

impl SignChangeMatrix {
    pub fn new(n: usize, w: Vec<u32>) -> Result<Self> {
        if n == 0 || w.len() != n * n {
            return Err(Error::Malformed(format!("expected {n}×{n} entries, got {}", w.len())));
        }
        Ok(SignChangeMatrix { n, w })
    }

    pub fn from_rows(rows: &[Vec<u32>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Malformed("rows must all have length n".into()));
        }
        Self::new(n, rows.concat())
    }

    pub(crate) fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> u32) -> Self {
        let mut w = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                w[i * n + j] = f(i, j);
            }
        }
        SignChangeMatrix { n, w }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> u32 {
        self.w[i * self.n + j]
    }

    /// Row-major flattening.
    pub fn as_slice(&self) -> &[u32] {
        &self.w
    }

    pub fn rows(&self) -> Vec<Vec<u32>> {
        self.w.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// `P W Pᵀ` where row `i` of the result is row `perm[i]` of `W`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        assert_eq!(perm.len(), self.n);
        Self::from_fn(self.n, |i, j| self.get(perm[i], perm[j]))
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("{}\n", self.n);
        for row in self.w.chunks(self.n) {
            let line: Vec<String> = row.iter().map(u32::to_string).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }
}

impl fmt::Display for SignChangeMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

impl Serialize for SignChangeMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

/// Parses one W matrix in the matrix text format with integer entries.
pub fn parse_w(text: &str) -> Result<SignChangeMatrix> {
    let mut all = parse_w_list(text)?;
    match all.len() {
        1 => Ok(all.pop().expect("one element")),
        0 => Err(Error::Malformed("empty input".into())),
        k => Err(Error::Malformed(format!("expected one matrix, found {k}"))),
    }
}

/// Parses a sequence of W matrices, each `n` followed by `n` rows; blank
/// lines and `#` comments between them are ignored.
pub fn parse_w_list(text: &str) -> Result<Vec<SignChangeMatrix>> {
    let mut lines = data_lines(text);
    let mut out = Vec::new();
    while let Some((n, w)) = read_block::<u32>(&mut lines)? {
        out.push(SignChangeMatrix { n, w });
    }
    Ok(out)
}

/// W of a matrix together with whether it came from the generic case
/// (distinct positive eigenvalues, no negligible coefficient).
#[derive(Clone, Debug, Serialize)]
pub struct SignChangeAnalysis {
    pub w: SignChangeMatrix,
    pub generic: bool,
}

pub fn sign_change_matrix(dec: &SpectralDecomposition, tol: &Tolerances) -> Result<SignChangeAnalysis> {
    let n = dec.n();
    let mut generic = dec.distinct_eigenvalue_count(tol.merge_tol) == n;
    let mut w = vec![0u32; n * n];
    for i in 0..n {
        for j in i..n {
            let p = entry_exppoly(dec, i, j, tol)?;
            generic &= !p.is_singular() && !p.has_negligible_coefficient();
            let v = descartes_bound(&p) as u32;
            w[i * n + j] = v;
            w[j * n + i] = v;
        }
    }
    Ok(SignChangeAnalysis { w: SignChangeMatrix { n, w }, generic })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Line {
    Row(usize),
    Column(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Violation {
    NonzeroDiagonal { i: usize, value: u32 },
    Asymmetric { i: usize, j: usize },
    EntryTooLarge { i: usize, j: usize, value: u32 },
    RepeatedMaximum { line: Line, count: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonzeroDiagonal { i, value } => {
                write!(f, "diagonal entry ({}, {}) is {value}", i + 1, i + 1)
            }
            Violation::Asymmetric { i, j } => write!(f, "entries ({0}, {1}) and ({1}, {0}) differ", i + 1, j + 1),
            Violation::EntryTooLarge { i, j, value } => {
                write!(f, "entry ({}, {}) = {value} exceeds n - 1", i + 1, j + 1)
            }
            Violation::RepeatedMaximum { line, count } => {
                let (kind, k) = match line {
                    Line::Row(k) => ("row", k),
                    Line::Column(k) => ("column", k),
                };
                write!(f, "{kind} {} has {count} entries equal to n - 1", k + 1)
            }
        }
    }
}

/// Checks the structural rules every sign change matrix satisfies: zero
/// diagonal, symmetry, entries at most `n − 1`, and at most one `n − 1` per
/// row and per column.
pub fn validate_sign_change_matrix(w: &SignChangeMatrix) -> std::result::Result<(), Vec<Violation>> {
    let n = w.n;
    let top = (n - 1) as u32;
    let mut violations = Vec::new();
    for i in 0..n {
        if w.get(i, i) != 0 {
            violations.push(Violation::NonzeroDiagonal { i, value: w.get(i, i) });
        }
        for j in (i + 1)..n {
            if w.get(i, j) != w.get(j, i) {
                violations.push(Violation::Asymmetric { i, j });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            if i != j && w.get(i, j) > top {
                violations.push(Violation::EntryTooLarge { i, j, value: w.get(i, j) });
            }
        }
    }
    for k in 0..n {
        let row = (0..n).filter(|&j| j != k && w.get(k, j) == top).count();
        if row > 1 {
            violations.push(Violation::RepeatedMaximum { line: Line::Row(k), count: row });
        }
        let col = (0..n).filter(|&i| i != k && w.get(i, k) == top).count();
        if col > 1 {
            violations.push(Violation::RepeatedMaximum { line: Line::Column(k), count: col });
        }
    }
    if violations.is_empty() {
        Ok(())
    } else {
        Err(violations)
    }
}

/// Most connected components `{t > 1 : (A^t)_ij < 0}` can have for an
/// invertible DN matrix with sign change count `w`.
pub fn component_bound(w: u32) -> u32 {
    if w == 0 {
        0
    } else {
        (w - 1) / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{spectral_decompose, SymMatrix};

    fn toeplitz(n: usize) -> SignChangeMatrix {
        SignChangeMatrix::from_fn(n, |i, j| i.abs_diff(j) as u32)
    }

    #[test]
    fn w_of_2x2() {
        let tol = Tolerances::default();
        let a = SymMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let an = sign_change_matrix(&spectral_decompose(&a, &tol).unwrap(), &tol).unwrap();
        assert_eq!(an.w.rows(), vec![vec![0, 1], vec![1, 0]]);
        assert!(an.generic);
    }

    #[test]
    fn w_of_tridiagonal_corner_is_maximal() {
        let tol = Tolerances::default();
        let a = SymMatrix::tridiagonal(&[2.0; 4], &[1.0; 3]);
        let an = sign_change_matrix(&spectral_decompose(&a, &tol).unwrap(), &tol).unwrap();
        assert_eq!(an.w.get(0, 3), 3);
        assert!(validate_sign_change_matrix(&an.w).is_ok());
    }

    #[test]
    fn w_of_identity_is_zero_and_not_generic() {
        let tol = Tolerances::default();
        let an = sign_change_matrix(&spectral_decompose(&SymMatrix::identity(4), &tol).unwrap(), &tol).unwrap();
        assert!(an.w.as_slice().iter().all(|&x| x == 0));
        assert!(!an.generic);
    }

    #[test]
    fn validation_examples() {
        assert_eq!(validate_sign_change_matrix(&toeplitz(5)), Ok(()));

        let mut rows = toeplitz(5).rows();
        rows[0][1] = 4;
        rows[1][0] = 4;
        let errs = validate_sign_change_matrix(&SignChangeMatrix::from_rows(&rows).unwrap()).unwrap_err();
        assert!(errs.contains(&Violation::RepeatedMaximum { line: Line::Row(0), count: 2 }));

        let mut rows = toeplitz(3).rows();
        rows[1][1] = 1;
        let errs = validate_sign_change_matrix(&SignChangeMatrix::from_rows(&rows).unwrap()).unwrap_err();
        assert_eq!(errs, vec![Violation::NonzeroDiagonal { i: 1, value: 1 }]);

        let mut rows = toeplitz(3).rows();
        rows[0][1] = 2;
        let errs = validate_sign_change_matrix(&SignChangeMatrix::from_rows(&rows).unwrap()).unwrap_err();
        assert!(errs.contains(&Violation::Asymmetric { i: 0, j: 1 }));

        let mut rows = toeplitz(3).rows();
        rows[0][2] = 5;
        rows[2][0] = 5;
        let errs = validate_sign_change_matrix(&SignChangeMatrix::from_rows(&rows).unwrap()).unwrap_err();
        assert!(errs.contains(&Violation::EntryTooLarge { i: 0, j: 2, value: 5 }));
    }

    #[test]
    fn component_bounds() {
        assert_eq!(component_bound(0), 0);
        assert_eq!(component_bound(1), 0);
        assert_eq!(component_bound(3), 1);
        assert_eq!(component_bound(4), 1);
        assert_eq!(component_bound(5), 2);
    }

    #[test]
    fn text_format() {
        let w = toeplitz(3);
        assert_eq!(w.to_text(), "3\n0 1 2\n1 0 1\n2 1 0\n");
        assert_eq!(parse_w(&w.to_text()).unwrap(), w);
        let two = format!("# pair\n{}\n{}", w, toeplitz(2));
        assert_eq!(parse_w_list(&two).unwrap(), vec![w, toeplitz(2)]);
        assert!(parse_w("2\n0 -1\n1 0").is_err());
    }

    #[test]
    fn permutation_relabels() {
        let w = toeplitz(3);
        let p = w.permuted(&[2, 0, 1]);
        assert_eq!(p.get(0, 1), w.get(2, 0));
    }
}
