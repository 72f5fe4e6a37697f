//! Single-qubit QND dephasing: W, P, Q at a fixed point as time runs.
use std::f64::consts::PI;

use spinqd::angular::{HalfInt, SphericalPoint};
use spinqd::channels::{qnd_decoherence_gamma, qnd_evolve_qubit, BathParams};
use spinqd::fixtures::atomic_coherent_state;
use spinqd::multipole::decompose;
use spinqd::qd_eval::{evaluate, QDKind};

fn main() {
    let bath = BathParams { temperature: 1.0, ..BathParams::default() };
    let rho0 = atomic_coherent_state(HalfInt::HALF, PI / 2.0, PI / 3.0).unwrap();
    let pt = [SphericalPoint::new(PI / 3.0, PI / 4.0)];
    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "t", "gamma(t)", "W", "P", "Q");
    for i in 0..=10 {
        let t = i as f64;
        let rho = qnd_evolve_qubit(&rho0, &bath, t).unwrap();
        let c = decompose(&rho).unwrap();
        let [w, p, q] = [QDKind::W, QDKind::P, QDKind::Q].map(|k| evaluate(k, &c, &pt).unwrap());
        println!("{t:6.1} {:12.6} {w:12.6} {p:12.6} {q:12.6}", qnd_decoherence_gamma(&bath, t).unwrap());
    }
}
