//! Two closely spaced atoms in the vacuum: Lindblad trajectory and its W, P.
use std::f64::consts::PI;

use spinqd::angular::SphericalPoint;
use spinqd::channels::CollectiveDipoleModel;
use spinqd::multipole::decompose;
use spinqd::qd_eval::{evaluate, QDKind};

fn main() {
    let m = CollectiveDipoleModel::vacuum(0.05, 0.05);
    println!("Gamma12 = {:.5}, Omega12 = {:.3}, step = {:.2e}", m.gamma_12(), m.omega_12(), m.stable_step());
    let grid: Vec<f64> = (0..=10).map(|i| 0.5 * i as f64).collect();
    let pts = [SphericalPoint::new(PI / 8.0, PI / 4.0), SphericalPoint::new(PI / 3.0, PI / 4.0)];
    for (t, rho) in grid.iter().zip(m.trajectory(&grid).unwrap()) {
        let c = decompose(&rho).unwrap();
        println!("t={t:4.1}  W={:+.5e} P={:+.5e}", evaluate(QDKind::W, &c, &pts).unwrap(), evaluate(QDKind::P, &c, &pts).unwrap());
    }
}
