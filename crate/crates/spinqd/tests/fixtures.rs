use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

use spinqd::angular::HalfInt;
use spinqd::fixtures::*;
use spinqd::multipole::{hermitian_eigenvalues, trace};

const BASE: &str = r#"
name = "probe"
angles = [[0.5, 0.0]]

[system]
kind = "coherent"
alpha = 1.5707963267948966
beta = 0.0

[channel]
kind = "qnd"
bath = { T = 1.0, gamma0 = 0.2 }

[sweep]
variable = "t"
start = 0.0
stop = 2.0
steps = 5
"#;

#[test]
fn coherent_state_equator_and_pole() {
    let rho = atomic_coherent_state(HalfInt::HALF, PI / 2.0, 0.0).unwrap();
    for v in rho.data().iter() {
        assert_abs_diff_eq!((v - C64::new(0.5, 0.0)).norm(), 0.0, epsilon = 1e-15);
    }
    let rho = atomic_coherent_state(HalfInt::HALF, 0.0, 1.0).unwrap();
    assert_abs_diff_eq!(rho.data()[[1, 1]].re, 1.0, epsilon = 1e-15);
    assert_abs_diff_eq!(rho.data()[[0, 0]].re, 0.0, epsilon = 1e-15);
}

#[test]
fn coherent_state_populations_are_binomial() {
    let (j, alpha) = (HalfInt::from_twice(4), 1.1);
    let rho = atomic_coherent_state(j, alpha, 0.6).unwrap();
    let s2 = (alpha / 2.0).sin().powi(2);
    let binom = [1.0, 4.0, 6.0, 4.0, 1.0];
    for (a, m) in j.projections().enumerate() {
        let up = (m.value() + 2.0) as i32;
        let want = binom[up as usize] * s2.powi(up) * (1.0 - s2).powi(4 - up);
        assert_abs_diff_eq!(rho.data()[[a, a]].re, want, epsilon = 1e-14);
    }
}

#[test]
fn named_states() {
    let s = named_state(NamedState::Singlet).unwrap();
    assert_abs_diff_eq!(s.data()[[1, 2]].re, -0.5, epsilon = 1e-15);
    let g = named_state(NamedState::Ghz).unwrap();
    assert_abs_diff_eq!(g.data()[[0, 7]].re, 0.5, epsilon = 1e-15);
    let w = named_state(NamedState::W).unwrap();
    assert_abs_diff_eq!(w.data()[[1, 4]].re, 1.0 / 3.0, epsilon = 1e-15);
    for r in [s, g, w] {
        assert_abs_diff_eq!(trace(r.data()).re, 1.0, epsilon = 1e-15);
    }
    let bad = NamedState::Spin1 { a_plus: C64::new(1.0, 0.0), a_zero: C64::new(1.0, 0.0), a_minus: C64::new(0.0, 0.0) };
    assert!(matches!(named_state(bad), Err(FixtureError::NotNormalised(_))));
    let d = dicke_state(HalfInt::ONE, HalfInt::ZERO).unwrap();
    assert_eq!(d.data()[[1, 1]], C64::new(1.0, 0.0));
    assert!(dicke_state(HalfInt::ONE, HalfInt::from_twice(4)).is_err());
}

#[test]
fn scenario_parses_with_defaults_and_round_trips() {
    let cfg = ScenarioConfig::from_toml(BASE).unwrap();
    assert_eq!(cfg.kinds, vec!["W", "P", "Q", "F"]);
    assert_eq!(cfg.measure, Measure::Qd);
    match &cfg.channel {
        ChannelSpec::Qnd { bath } => {
            assert_eq!(bath.temperature, 1.0);
            assert_eq!(bath.omega_c, 100.0);
            assert_eq!(bath.omega, 1.0);
        }
        other => panic!("{other:?}"),
    }
    assert_eq!(cfg.sweep.values(), vec![0.0, 0.5, 1.0, 1.5, 2.0]);
    let back = ScenarioConfig::from_toml(&cfg.to_toml()).unwrap();
    assert_eq!(back, cfg);
    let rho = cfg.system.build().unwrap();
    assert_eq!(rho.dims(), &[2]);
}

#[test]
fn scenario_validation_errors() {
    let bad = [
        (BASE.replace("angles = [[0.5, 0.0]]", "angles = []"), "angle count"),
        (BASE.replace("T = 1.0", "T = -1.0"), "negative temperature"),
        (BASE.replace("steps = 5", "steps = 0"), "zero steps"),
        (BASE.replace("kind = \"qnd\"", "kind = \"warp\""), "unknown channel"),
        (BASE.replace("name = \"probe\"", "name = \"probe\"\nbogus = 1"), "unknown field"),
        (BASE.replace("variable = \"t\"", "variable = \"lambda\""), "lambda sweep without ad"),
        (BASE.replace("alpha = 1.5707963267948966", "alpha = 1.0\nj = 0.7"), "non half-integer j"),
        (BASE.replace("angles = [[0.5, 0.0]]", "angles = [[0.5, 0.0]]\nkinds = [\"Z\"]"), "bad kind"),
    ];
    for (text, why) in bad {
        assert!(ScenarioConfig::from_toml(&text).is_err(), "{why} accepted");
    }
    let two = r#"
angles = [[0.5, 0.0]]
[system]
kind = "singlet"
[channel]
kind = "qnd"
[sweep]
variable = "t"
start = 0.0
stop = 1.0
steps = 2
"#;
    assert!(ScenarioConfig::from_toml(two).is_err());
}

#[test]
fn density_system_spec() {
    let text = r#"
angles = [[0.1, 0.2]]
[system]
kind = "density"
dims = [2]
re = [[0.75, 0.0], [0.0, 0.25]]
im = [[0.0, 0.1], [-0.1, 0.0]]
[sweep]
variable = "theta"
start = 0.0
stop = 3.0
steps = 4
"#;
    let cfg = ScenarioConfig::from_toml(text).unwrap();
    let rho = cfg.system.build().unwrap();
    assert_eq!(rho.data()[[0, 1]], C64::new(0.0, 0.1));
    let wrong = text.replace("re = [[0.75, 0.0], [0.0, 0.25]]", "re = [[0.75, 0.0]]");
    assert!(ScenarioConfig::from_toml(&wrong).unwrap().system.build().is_err());
    let nonpos = text.replace("0.75", "1.25").replace("0.25]]", "-0.25]]");
    assert!(ScenarioConfig::from_toml(&nonpos).unwrap().system.build().is_err());
}

#[test]
fn complex_amplitudes_in_toml() {
    let text = r#"
angles = [[0.1, 0.2]]
[system]
kind = "spin1"
a_plus = 0.6
a_zero = [0.0, 0.48]
a_minus = 0.64
[sweep]
variable = "phi"
start = 0.0
stop = 6.0
steps = 3
"#;
    let cfg = ScenarioConfig::from_toml(text).unwrap();
    let rho = cfg.system.build().unwrap();
    assert_abs_diff_eq!((rho.data()[[0, 1]] - C64::new(0.6, 0.0) * C64::new(0.0, -0.48)).norm(), 0.0, epsilon = 1e-15);
}

#[test]
fn relative_paths_resolve_against_scenario_dir() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
angles = [[0.1, 0.2], [0.3, 0.4]]
[system]
kind = "singlet"
[channel]
kind = "trajectory"
path = "traj.csv"
[sweep]
variable = "t"
start = 0.0
stop = 1.0
steps = 2
"#;
    let p = dir.path().join("s.toml");
    std::fs::write(&p, text).unwrap();
    let cfg = ScenarioConfig::from_path(&p).unwrap();
    match cfg.channel {
        ChannelSpec::Trajectory { path } => assert_eq!(path, dir.path().join("traj.csv")),
        other => panic!("{other:?}"),
    }
    assert!(matches!(ScenarioConfig::from_path(&dir.path().join("missing.toml")), Err(FixtureError::Io { .. })));
}

proptest! {
    #[test]
    fn coherent_states_are_pure(twice_j in 1i32..7, alpha in 0.0..PI, beta in 0.0..(2.0 * PI)) {
        let rho = atomic_coherent_state(HalfInt::from_twice(twice_j), alpha, beta).unwrap();
        let ev = hermitian_eigenvalues(rho.data());
        let top = ev.iter().cloned().fold(f64::MIN, f64::max);
        prop_assert!((top - 1.0).abs() < 1e-12);
        prop_assert!((trace(&rho.data().dot(rho.data())).re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sweep_values_hit_both_ends(start in -5.0..5.0f64, stop in -5.0..5.0f64, steps in 2usize..50) {
        let s = SweepSpec { variable: SweepVar::T, start, stop, steps, particles: None };
        let v = s.values();
        prop_assert_eq!(v.len(), steps);
        prop_assert_eq!(v[0], start);
        prop_assert!((v[steps - 1] - stop).abs() < 1e-12);
    }
}
