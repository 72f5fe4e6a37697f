use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use spinqd::angular::HalfInt;
use spinqd::fixtures::{atomic_coherent_state, dicke_state, named_state, NamedState};
use spinqd::measures::*;
use spinqd::multipole::{decompose, DensityMatrix};
use spinqd::qd_eval::QDKind;

/// delta of a qubit with Bloch length r: W = (1 + sqrt3 r u)/(4 pi) on the sphere.
fn qubit_delta(r: f64) -> f64 {
    let a = 3f64.sqrt() * r;
    if a <= 1.0 {
        0.0
    } else {
        (a - 1.0).powi(2) / (2.0 * a)
    }
}

fn mixed_qubit(alpha: f64, beta: f64, r: f64) -> DensityMatrix {
    let pure = atomic_coherent_state(HalfInt::HALF, alpha, beta).unwrap();
    let mm = DensityMatrix::maximally_mixed(vec![2]);
    DensityMatrix::new(vec![2], pure.data() * C64::new(r, 0.0) + mm.data() * C64::new(1.0 - r, 0.0)).unwrap()
}

#[test]
fn node_weights_cover_the_sphere() {
    let q = QuadratureSpec::new(16, 12).unwrap();
    let nodes = sphere_nodes(&q);
    assert_eq!(nodes.len(), 192);
    let s: f64 = nodes.iter().map(|(_, w)| w).sum();
    assert_abs_diff_eq!(s, 4.0 * PI, epsilon = 1e-12);
    // int cos^2 theta dOmega = 4 pi / 3
    let m: f64 = nodes.iter().map(|(p, w)| w * p.theta.cos().powi(2)).sum();
    assert_abs_diff_eq!(m, 4.0 * PI / 3.0, epsilon = 1e-12);
}

#[test]
fn spec_and_budget_errors() {
    assert!(matches!(QuadratureSpec::new(4, 64), Err(MeasureError::Spec(_))));
    let c = decompose(&named_state(NamedState::Ghz).unwrap()).unwrap();
    let q = QuadratureSpec::default();
    assert!(matches!(qd_grid(QDKind::W, &c, &q), Err(MeasureError::Budget { .. })));
}

#[test]
fn normalization_of_fixtures() {
    let q = QuadratureSpec::default();
    let mut states = vec![
        named_state(NamedState::Singlet).unwrap(),
        named_state(NamedState::Ghz).unwrap(),
        named_state(NamedState::W).unwrap(),
        atomic_coherent_state(HalfInt::from_twice(3), 0.8, 1.1).unwrap(),
    ];
    for m in [-2, 0, 1] {
        states.push(dicke_state(HalfInt::from_twice(4), HalfInt::from_twice(2 * m)).unwrap());
    }
    for rho in &states {
        let c = decompose(rho).unwrap();
        for kind in QDKind::ALL {
            assert!(normalization_residual(kind, &c, &q).unwrap() < 1e-12, "{kind} {:?}", rho.dims());
        }
    }
    // full product grid on two spheres as a cross-check of the factorised sum
    let c = decompose(&states[0]).unwrap();
    let grid = qd_grid(QDKind::P, &c, &QuadratureSpec::new(12, 12).unwrap()).unwrap();
    assert_abs_diff_eq!(grid.weighted_sum(), 1.0, epsilon = 1e-12);
}

#[test]
fn singlet_negativity() {
    let c = decompose(&named_state(NamedState::Singlet).unwrap()).unwrap();
    let q = QuadratureSpec::new(16, 16).unwrap();
    let p = negativity_scan(QDKind::P, &c, &q).unwrap();
    assert!(p.min < 0.0 && p.negative_fraction > 0.0);
    assert_eq!(p.argmin.len(), 2);
    let qq = negativity_scan(QDKind::Q, &c, &q).unwrap();
    assert_eq!(qq.negative_fraction, 0.0);
    assert!(qq.min >= -1e-12);
    let w = negativity_scan(QDKind::W, &c, &q).unwrap();
    // W = (1 - 3 n1.n2)/(16 pi^2) is most negative for parallel directions
    assert_abs_diff_eq!(w.min, -2.0 / (16.0 * PI * PI), epsilon = 1e-3 / (16.0 * PI * PI));
    let json: serde_json::Value = serde_json::from_str(&w.to_json()).unwrap();
    assert_eq!(json["kind"], "W");
}

#[test]
fn maximally_mixed_has_no_volume() {
    let q = QuadratureSpec::new(16, 16).unwrap();
    for dims in [vec![2], vec![3], vec![2, 2]] {
        let c = decompose(&DensityMatrix::maximally_mixed(dims)).unwrap();
        assert_abs_diff_eq!(nonclassical_volume(&c, &q).unwrap(), 0.0, epsilon = 1e-11);
    }
}

#[test]
fn pure_qubit_volume() {
    let c = decompose(&atomic_coherent_state(HalfInt::HALF, PI / 2.0, 0.0).unwrap()).unwrap();
    let d = nonclassical_volume(&c, &QuadratureSpec::default()).unwrap();
    assert_abs_diff_eq!(d, 2.0 / 3f64.sqrt() - 1.0, epsilon = 1e-10);
    assert_abs_diff_eq!(d, 0.1547, epsilon = 1e-4);
}

#[test]
fn singlet_volume() {
    // delta = (1/2) int_{-1}^{1} |1 - 3u| du - 1 = 2/3
    let c = decompose(&named_state(NamedState::Singlet).unwrap()).unwrap();
    let d = nonclassical_volume(&c, &QuadratureSpec::new(12, 12).unwrap()).unwrap();
    assert_abs_diff_eq!(d, 2.0 / 3.0, epsilon = 1e-9);
    let g = nonclassical_volume_grid(&c, &QuadratureSpec::new(48, 48).unwrap()).unwrap();
    assert_abs_diff_eq!(g, 2.0 / 3.0, epsilon = 5e-3);
}

#[test]
fn volume_agrees_with_fine_grid() {
    let c = decompose(&atomic_coherent_state(HalfInt::from_twice(2), 0.7, 0.3).unwrap()).unwrap();
    let exact = nonclassical_volume(&c, &QuadratureSpec::default()).unwrap();
    let grid = nonclassical_volume_grid(&c, &QuadratureSpec::new(400, 400).unwrap()).unwrap();
    assert!(exact > 0.0);
    assert_abs_diff_eq!(exact, grid, epsilon = 1e-4);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn mixed_qubit_volume_closed_form(alpha in 0.0..PI, beta in 0.0..(2.0 * PI), r in 0.0..1.0f64) {
        let c = decompose(&mixed_qubit(alpha, beta, r)).unwrap();
        let d = nonclassical_volume(&c, &QuadratureSpec::default()).unwrap();
        // sign-change pairs closer than one theta sample near the cap's tangent
        // meridian are not resolved; the observed error stays below 1e-8
        prop_assert!((d - qubit_delta(r)).abs() < 1e-7, "{d} vs {}", qubit_delta(r));
    }

    #[test]
    fn q_never_negative_for_qubits(alpha in 0.0..PI, beta in 0.0..(2.0 * PI), r in 0.0..1.0f64) {
        let c = decompose(&mixed_qubit(alpha, beta, r)).unwrap();
        let rep = negativity_scan(QDKind::Q, &c, &QuadratureSpec::new(16, 16).unwrap()).unwrap();
        prop_assert_eq!(rep.negative_fraction, 0.0);
    }
}
