use proptest::prelude::*;

use dnpower::cli::format_g17;
use dnpower::enumerate::canonicalize_w;
use dnpower::exppoly::{descartes_bound, entry_exppoly, grid_sign_alternations, negative_intervals, ScanConfig};
use dnpower::matcore::{check_dn, mat_mul, parse_matrix};
use dnpower::signchange::{component_bound, sign_change_matrix, validate_sign_change_matrix};
use dnpower::{spectral_decompose, SymMatrix, Tolerances};

fn gram_strategy(max_n: usize) -> impl Strategy<Value = SymMatrix> {
    (1..=max_n)
        .prop_flat_map(|n| (Just(n), 1..=n))
        .prop_flat_map(|(n, r)| (Just(n), Just(r), prop::collection::vec(0.0f64..1.0, n * r)))
        .prop_map(|(n, r, b)| SymMatrix::from_fn(n, |i, j| (0..r).map(|k| b[i * r + k] * b[j * r + k]).sum()))
}

fn symmetric_strategy(max_n: usize) -> impl Strategy<Value = SymMatrix> {
    (1..=max_n)
        .prop_flat_map(|n| (Just(n), prop::collection::vec(-10.0f64..10.0, n * n)))
        .prop_map(|(n, v)| SymMatrix::from_fn(n, |i, j| v[i * n + j]))
}

fn permutation(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<usize>>()).prop_shuffle()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn decomposition_reconstructs(a in symmetric_strategy(8)) {
        let dec = spectral_decompose(&a, &Tolerances::default()).unwrap();
        let scale = a.frobenius().max(f64::MIN_POSITIVE);
        prop_assert!(dec.reconstruct().sub(&a).frobenius() / scale <= 1e-10);
        prop_assert!(dec.orthogonality_error() <= 1e-12);
        prop_assert!(dec.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn semigroup(a in gram_strategy(6), t in 0.05f64..3.0, s in 0.05f64..3.0) {
        let dec = spectral_decompose(&a, &Tolerances::default()).unwrap();
        let n = a.n();
        let at = dec.power(t).unwrap();
        let as_ = dec.power(s).unwrap();
        let ats = dec.power(t + s).unwrap();
        let prod = SymMatrix::from_fn(n, |i, j| mat_mul(n, at.as_slice(), as_.as_slice())[i * n + j]);
        prop_assert!(prod.max_abs_diff(&ats) <= 1e-8 * ats.max_abs().max(1e-300));
    }

    #[test]
    fn first_power_is_identity_map(a in gram_strategy(6)) {
        let dec = spectral_decompose(&a, &Tolerances::default()).unwrap();
        let a1 = dec.power(1.0).unwrap();
        prop_assert!(a1.max_abs_diff(&a) <= 1e-10 * a.max_abs());
    }

    #[test]
    fn powers_stay_psd(a in gram_strategy(6), t in 0.01f64..5.0) {
        let tol = Tolerances::default();
        let p = spectral_decompose(&a, &tol).unwrap().power(t).unwrap();
        let ev = spectral_decompose(&p, &tol).unwrap();
        let min = *ev.eigenvalues().last().unwrap();
        prop_assert!(min >= -1e-10 * ev.eigenvalues()[0].max(1.0));
    }

    #[test]
    fn exppoly_matches_power(a in gram_strategy(6), t in 0.01f64..6.0) {
        let tol = Tolerances::default();
        let dec = spectral_decompose(&a, &tol).unwrap();
        let p = dec.power(t).unwrap();
        let n = a.n();
        for i in 0..n {
            for j in 0..n {
                let v = entry_exppoly(&dec, i, j, &tol).unwrap().eval(t).unwrap();
                prop_assert!((v - p.get(i, j)).abs() <= 1e-9 * p.max_abs().max(1e-300));
            }
        }
    }

    #[test]
    fn sign_change_matrix_is_structurally_valid(a in gram_strategy(6)) {
        let tol = Tolerances::default();
        let dec = spectral_decompose(&a, &tol).unwrap();
        let an = sign_change_matrix(&dec, &tol).unwrap();
        let n = a.n();
        for i in 0..n {
            prop_assert_eq!(an.w.get(i, i), 0);
            for j in 0..n {
                prop_assert_eq!(an.w.get(i, j), an.w.get(j, i));
            }
        }
        if an.generic {
            prop_assert!(validate_sign_change_matrix(&an.w).is_ok(), "{}", an.w);
        }
    }

    #[test]
    fn grid_and_intervals_respect_descartes(a in gram_strategy(5)) {
        let tol = Tolerances::default();
        let dec = spectral_decompose(&a, &tol).unwrap();
        let full = ScanConfig::for_dimension(a.n());
        let scan = full.with_range(1.0, full.t_max).unwrap();
        for i in 0..a.n() {
            for j in i..a.n() {
                let p = entry_exppoly(&dec, i, j, &tol).unwrap();
                let w = descartes_bound(&p);
                prop_assert!(grid_sign_alternations(&p, &scan) <= w);
                prop_assert!(negative_intervals(&p, &scan).count() <= component_bound(w as u32) as usize);
            }
        }
    }

    #[test]
    fn canonical_form_is_permutation_invariant(
        (a, perm) in gram_strategy(6).prop_flat_map(|a| { let n = a.n(); (Just(a), permutation(n)) })
    ) {
        let tol = Tolerances::default();
        let w = sign_change_matrix(&spectral_decompose(&a, &tol).unwrap(), &tol).unwrap().w;
        prop_assert_eq!(canonicalize_w(&w.permuted(&perm)).unwrap(), canonicalize_w(&w).unwrap());
    }

    #[test]
    fn matrix_text_round_trips(a in symmetric_strategy(6)) {
        let back = parse_matrix(&a.to_text()).unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn g17_round_trips(v in any::<f64>().prop_filter("finite", |v| v.is_finite())) {
        prop_assert_eq!(format_g17(v).parse::<f64>().unwrap(), v);
    }

    #[test]
    fn gram_matrices_are_dn(a in gram_strategy(6)) {
        let rep = check_dn(&a, &Tolerances::default());
        prop_assert!(rep.is_nonnegative && rep.is_psd && rep.is_dn);
    }
}
