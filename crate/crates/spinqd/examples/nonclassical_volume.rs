//! Nonclassical volume of a dephasing qubit at three temperatures.
use std::f64::consts::PI;

use spinqd::angular::HalfInt;
use spinqd::channels::{qnd_evolve_qubit, BathParams};
use spinqd::fixtures::atomic_coherent_state;
use spinqd::measures::{nonclassical_volume, QuadratureSpec};
use spinqd::multipole::decompose;

fn main() {
    let rho0 = atomic_coherent_state(HalfInt::HALF, PI / 2.0, 0.0).unwrap();
    let q = QuadratureSpec::default();
    println!("pure state: delta = {:.8} (2/sqrt3 - 1 = {:.8})", nonclassical_volume(&decompose(&rho0).unwrap(), &q).unwrap(), 2.0 / 3f64.sqrt() - 1.0);
    for temp in [0.0, 1.0, 2.0] {
        let bath = BathParams { temperature: temp, ..BathParams::default() };
        let d: Vec<String> = [0.5, 1.0, 2.0, 5.0]
            .iter()
            .map(|&t| {
                let rho = qnd_evolve_qubit(&rho0, &bath, t).unwrap();
                format!("{:.5}", nonclassical_volume(&decompose(&rho).unwrap(), &q).unwrap())
            })
            .collect();
        println!("T={temp}: delta(t = 0.5, 1, 2, 5) = {}", d.join(", "));
    }
}
