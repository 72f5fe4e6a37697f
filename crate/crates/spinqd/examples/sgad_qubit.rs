//! Squeezed generalized amplitude damping of a qubit coherent state.
use std::f64::consts::PI;

use spinqd::angular::{HalfInt, SphericalPoint};
use spinqd::channels::{apply_channel, sgad_kraus, sgad_params, BathParams};
use spinqd::fixtures::atomic_coherent_state;
use spinqd::multipole::decompose;
use spinqd::qd_eval::{evaluate, QDKind};

fn main() {
    let rho0 = atomic_coherent_state(HalfInt::HALF, PI / 2.0, PI / 3.0).unwrap();
    let pt = [SphericalPoint::new(PI / 3.0, 0.0)];
    for r in [0.0, 1.0] {
        let bath = BathParams { gamma0: 0.05, temperature: 3.0, r, ..BathParams::default() };
        println!("r = {r}");
        for i in 0..=5 {
            let t = 4.0 * i as f64;
            let s = sgad_params(&bath, 1.0, t).unwrap();
            let rho = apply_channel(&sgad_kraus(&s).unwrap(), &rho0).unwrap();
            let c = decompose(&rho).unwrap();
            println!(
                "  t={t:5.1} lambda={:.4}  W={:+.5} P={:+.5} Q={:+.5}",
                s.lambda,
                evaluate(QDKind::W, &c, &pt).unwrap(),
                evaluate(QDKind::P, &c, &pt).unwrap(),
                evaluate(QDKind::Q, &c, &pt).unwrap()
            );
        }
    }
}
