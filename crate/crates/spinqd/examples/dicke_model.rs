//! Four atoms in a dissipative cavity: W and F of the reduced spin-2 state.
use std::f64::consts::PI;

use spinqd::angular::SphericalPoint;
use spinqd::dicke::{evolve_dicke, evolve_dicke_bare, DickeParams};
use spinqd::multipole::decompose;
use spinqd::qd_eval::{evaluate, QDKind};

fn main() {
    let p = DickeParams { n_atoms: 4, nbar: 30.0, g: 0.1, gamma: 0.001 };
    for w in p.regime_warnings() {
        eprintln!("warning: {w}");
    }
    let pt = [SphericalPoint::new(PI / 3.0, PI / 2.0)];
    for i in 0..=8 {
        let t = 25.0 * i as f64;
        let rho = evolve_dicke(&p, t).unwrap();
        let (_, cert) = evolve_dicke_bare(&p, t).unwrap();
        let c = decompose(&rho).unwrap();
        println!(
            "t={t:6.1}  W={:+.5} F={:+.5}  (n_max {}, tail {:.1e})",
            evaluate(QDKind::W, &c, &pt).unwrap(),
            evaluate(QDKind::F, &c, &pt).unwrap(),
            cert.n_max,
            cert.tail_change
        );
    }
}
