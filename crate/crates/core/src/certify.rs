//! Closed-form bounds on the critical exponent `m(n)` and certificates derived
//! mechanically from sign change matrices.

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::enumerate::{enumerate_w_classes, MAX_ENUM_N};
use crate::error::{Error, Result};
use crate::signchange::{validate_sign_change_matrix, SignChangeMatrix};

/// `k(n)`: most connected components the negative set of one column of `A^t`
/// can have on `t > 1`.
pub fn component_budget(n: usize) -> f64 {
    let n = n as i64;
    let twice = if n % 2 == 1 { n * n - 4 * n + 3 } else { n * n - 5 * n + 6 };
    twice as f64 / 2.0
}

/// Quadratic upper bound `k(n) + 1` on `m(n)`.
pub fn crude_bound(n: usize) -> f64 {
    assert!(n >= 2, "bounds are defined for n >= 2");
    component_budget(n) + 1.0
}

/// `n − 2`, attained by irreducible invertible tridiagonal DN matrices.
pub fn lower_bound(n: usize) -> f64 {
    assert!(n >= 2, "bounds are defined for n >= 2");
    (n - 2) as f64
}

/// Upper bound on the critical exponent of one entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum EntryBound {
    Finite(u32),
    Unbounded,
}

impl EntryBound {
    pub fn finite(self) -> Option<u32> {
        match self {
            EntryBound::Finite(v) => Some(v),
            EntryBound::Unbounded => None,
        }
    }
}

impl Serialize for EntryBound {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            EntryBound::Finite(v) => s.serialize_u32(*v),
            EntryBound::Unbounded => s.serialize_str("unbounded"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntryBoundMatrix {
    n: usize,
    bound: Vec<EntryBound>,
}

impl EntryBoundMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> EntryBound {
        self.bound[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<EntryBound>> {
        self.bound.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    /// Largest bound; `Unbounded` dominates.
    pub fn max(&self) -> EntryBound {
        self.bound.iter().copied().max().unwrap_or(EntryBound::Finite(0))
    }
}

impl Serialize for EntryBoundMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.rows().serialize(s)
    }
}

/// Upper bounds on entry critical exponents valid for every invertible DN
/// matrix with sign change matrix `W`.
///
/// * `w_ij <= 1` gives 0 and `w_ij = 2` gives 1.
/// * A row with no entry above 4 and `M` entries above 2 bounds every entry
///   of that row by `M + 1`; likewise for columns.
///
/// Each entry takes the smallest applicable bound, or `Unbounded`.
pub fn entry_bounds_from_w(w: &SignChangeMatrix) -> Result<EntryBoundMatrix> {
    if let Err(violations) = validate_sign_change_matrix(w) {
        let msg: Vec<String> = violations.iter().map(ToString::to_string).collect();
        return Err(Error::InvalidW(msg.join("; ")));
    }
    let n = w.n();
    let line_bound = |values: Vec<u32>| -> Option<u32> {
        let max = values.iter().copied().max().unwrap_or(0);
        (max <= 4).then(|| values.iter().filter(|&&v| v > 2).count() as u32 + 1)
    };
    let row_bound: Vec<Option<u32>> =
        (0..n).map(|i| line_bound((0..n).filter(|&j| j != i).map(|j| w.get(i, j)).collect())).collect();
    let col_bound: Vec<Option<u32>> =
        (0..n).map(|j| line_bound((0..n).filter(|&i| i != j).map(|i| w.get(i, j)).collect())).collect();

    let mut bound = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let v = w.get(i, j);
            let own = match v {
                0 | 1 => Some(0),
                2 => Some(1),
                _ => None,
            };
            let best = [own, row_bound[i], col_bound[j]].into_iter().flatten().min();
            bound.push(best.map_or(EntryBound::Unbounded, EntryBound::Finite));
        }
    }
    Ok(EntryBoundMatrix { n, bound })
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassCertificate {
    pub w: SignChangeMatrix,
    pub entry_bounds: EntryBoundMatrix,
    pub max_bound: EntryBound,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateReport {
    pub n: usize,
    pub num_classes: usize,
    /// Per-class maximum entry bound; `None` when some entry is unbounded.
    pub per_class_max: Vec<Option<u32>>,
    /// Maximum over classes; `None` when certification failed for some class.
    pub certified_upper: Option<f64>,
    pub lower: f64,
    pub crude_upper: f64,
    /// `k(n)`, with `crude_upper = k(n) + 1`.
    pub k: f64,
    pub conclusion: String,
    pub classes: Vec<ClassCertificate>,
}

impl CertificateReport {
    pub fn certified(&self) -> bool {
        self.certified_upper.is_some()
    }

    /// Whether the certified upper bound meets the lower bound.
    pub fn is_exact(&self) -> bool {
        self.certified_upper == Some(self.lower)
    }

    pub fn summary_line(&self) -> String {
        let upper = self.certified_upper.map_or("none".to_string(), |u| u.to_string());
        format!(
            "classes={} certified_upper={} lower={} conclusion={}",
            self.num_classes, upper, self.lower, self.conclusion
        )
    }
}

/// Certifies `m(n)` over the given W classes of dimension `n`.
pub fn certify_classes(n: usize, classes: &[SignChangeMatrix]) -> Result<CertificateReport> {
    if n < 2 {
        return Err(Error::DimensionTooSmall { n, min: 2 });
    }
    if let Some(bad) = classes.iter().find(|w| w.n() != n) {
        return Err(Error::InvalidW(format!("class of dimension {} in a {n}×{n} certificate", bad.n())));
    }
    let certs: Vec<ClassCertificate> = classes
        .par_iter()
        .map(|w| {
            let entry_bounds = entry_bounds_from_w(w)?;
            let max_bound = entry_bounds.max();
            Ok(ClassCertificate { w: w.clone(), entry_bounds, max_bound })
        })
        .collect::<Result<_>>()?;

    let per_class_max: Vec<Option<u32>> = certs.iter().map(|c| c.max_bound.finite()).collect();
    let failed = per_class_max.iter().filter(|m| m.is_none()).count();
    let lower = lower_bound(n);
    let crude_upper = crude_bound(n);
    let certified_upper = if failed == 0 {
        let max = per_class_max.iter().flatten().copied().max().unwrap_or(0) as f64;
        Some(max.min(crude_upper))
    } else {
        None
    };
    let conclusion = match certified_upper {
        Some(u) if u <= lower => format!("m({n})={lower}"),
        Some(u) => format!("{lower}<=m({n})<={u}"),
        None => format!(
            "uncertified: {failed} of {} classes have unbounded entries; {lower}<=m({n})<={crude_upper}",
            certs.len()
        ),
    };
    Ok(CertificateReport {
        n,
        num_classes: certs.len(),
        per_class_max,
        certified_upper,
        lower,
        crude_upper,
        k: component_budget(n),
        conclusion,
        classes: certs,
    })
}

/// Enumerates every W class of dimension `n` and certifies over them.
pub fn certify_dimension(n: usize) -> Result<CertificateReport> {
    if n < 2 {
        return Err(Error::DimensionTooSmall { n, min: 2 });
    }
    if n > MAX_ENUM_N {
        return Err(Error::DimensionTooLarge { n, max: MAX_ENUM_N });
    }
    certify_classes(n, &enumerate_w_classes(n)?)
}
