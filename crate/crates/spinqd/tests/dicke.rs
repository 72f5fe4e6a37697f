use approx::assert_abs_diff_eq;
use ndarray::Array2;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use spinqd::angular::HalfInt;
use spinqd::dicke::*;
use spinqd::multipole::{dagger, hermitian_eigenvalues, hermiticity_defect, multipole_operator, trace};

fn params(n_atoms: usize, nbar: f64, gamma: f64) -> DickeParams {
    DickeParams { n_atoms, nbar, g: 1.0, gamma }
}

fn ln_poisson(n: usize, mean: f64) -> f64 {
    let lf: f64 = (1..=n).map(|k| (k as f64).ln()).sum();
    -mean + n as f64 * mean.ln() - lf
}

#[test]
fn dressed_basis_diagonalises_sigma_x() {
    for n in 1..=6 {
        let b = dressed_basis(n);
        let id = dagger(&b.c).dot(&b.c);
        for ((i, j), v) in id.indexed_iter() {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((v - C64::new(want, 0.0)).norm() < 1e-12);
        }
        let d = dagger(&b.c).dot(&collective_sigma_x(n)).dot(&b.c);
        for ((i, j), v) in d.indexed_iter() {
            let want = if i == j { b.lambdas[i] } else { 0.0 };
            assert!((v - C64::new(want, 0.0)).norm() < 1e-12, "n={n} ({i},{j})");
        }
    }
    let mut ev = hermitian_eigenvalues(&collective_sigma_x(4));
    ev.sort_by(f64::total_cmp);
    for (k, e) in ev.iter().enumerate() {
        assert_abs_diff_eq!(*e, k as f64 - 2.0, epsilon = 1e-12);
    }
}

#[test]
fn initial_state_is_ground() {
    let (rho, cert) = evolve_dicke_bare(&params(4, 100.0, 0.0), 0.0).unwrap();
    for ((i, j), v) in rho.indexed_iter() {
        let want = if i == 0 && j == 0 { 1.0 } else { 0.0 };
        assert!((v - C64::new(want, 0.0)).norm() < 1e-9);
    }
    assert!(cert.tail_change < 1e-10);
}

#[test]
fn single_atom_matches_rabi_oscillation() {
    // one atom, no damping: ground population sum_n P(n) cos^2(g t sqrt n)
    let nbar = 40.0;
    let p = params(1, nbar, 0.0);
    for t in [0.1, 0.7, 2.3, 5.0] {
        let (rho, _) = evolve_dicke_bare(&p, t).unwrap();
        let want: f64 = (0..400).map(|n| ln_poisson(n, nbar).exp() * (t * (n as f64).sqrt()).cos().powi(2)).sum();
        assert_abs_diff_eq!(rho[[0, 0]].re, want, epsilon = 1e-8);
    }
}

#[test]
fn evolved_states_are_physical() {
    let p = params(4, 100.0, 0.01);
    for t in [0.5, 3.0, 20.0] {
        let rho = evolve_dicke(&p, t).unwrap();
        assert_abs_diff_eq!(trace(rho.data()).re, 1.0, epsilon = 1e-12);
        assert!(hermiticity_defect(rho.data()) < 1e-9);
        assert!(hermitian_eigenvalues(rho.data()).iter().all(|&e| e > -1e-8));
        let (_, cert) = evolve_dicke_bare(&p, t).unwrap();
        assert!(cert.trace_drift < 1e-6 && cert.skipped_weight <= 1e-8 && cert.tail_change <= 1e-10);
    }
}

#[test]
fn bare_and_spin_orders_are_reversed() {
    let p = params(2, 60.0, 0.0);
    let (bare, _) = evolve_dicke_bare(&p, 1.3).unwrap();
    let rho = evolve_dicke(&p, 1.3).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert_eq!(rho.data()[[2 - i, 2 - j]], bare[[i, j]]);
        }
    }
}

#[test]
fn truncated_cutoff_is_reported() {
    let p = params(4, 100.0, 0.0);
    assert!(matches!(evolve_dicke_bare_with(&p, 2.0, 20), Err(DickeError::Cutoff { .. })));
}

#[test]
fn parameter_validation() {
    assert!(matches!(evolve_dicke(&params(0, 100.0, 0.0), 1.0), Err(DickeError::Params(_))));
    assert!(evolve_dicke(&params(4, -1.0, 0.0), 1.0).is_err());
    assert!(evolve_dicke(&params(4, 100.0, -0.1), 1.0).is_err());
    assert!(evolve_dicke(&params(4, 100.0, 0.0), -1.0).is_err());
    assert!(params(4, 10.0, 0.0).regime_warnings().len() == 1);
    assert!(params(4, 100.0, 0.01).regime_warnings().is_empty());
    assert!(params(4, 100.0, 5.0).regime_warnings().len() == 1);
}

#[test]
fn spin2_tables_match_generated_operators() {
    let j = HalfInt::from_twice(4);
    let tabs = spin2_multipole_fixtures();
    assert_eq!(tabs.len(), 15);
    let mut mismatched = Vec::new();
    for ((k, q), m) in tabs {
        let gen = multipole_operator(j, k, q).unwrap();
        // tables are in ascending k = m + 2 order
        let rev = Array2::from_shape_fn((5, 5), |(a, b)| gen[[4 - a, 4 - b]]);
        let d = m.iter().zip(rev.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        if d > 1e-12 {
            mismatched.push((k, q));
        }
    }
    // the literal T_20 table carries a misprinted (3,3) entry; everything else agrees
    assert_eq!(mismatched, vec![(2, 0)]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]
    #[test]
    fn two_atom_trace_and_hermiticity(t in 0.0..10.0f64, gamma in 0.0..0.05f64) {
        let (rho, cert) = evolve_dicke_bare(&params(2, 50.0, gamma), t).unwrap();
        prop_assert!((trace(&rho).re - 1.0).abs() < 1e-12);
        prop_assert!(cert.hermiticity < 1e-9);
        prop_assert!(hermitian_eigenvalues(&rho).iter().all(|&e| e > -1e-8));
    }
}
