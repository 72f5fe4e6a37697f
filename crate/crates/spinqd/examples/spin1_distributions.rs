//! Spin-1 pure state: all four distributions along a theta cut.
use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use spinqd::angular::SphericalPoint;
use spinqd::fixtures::{named_state, NamedState};
use spinqd::multipole::decompose;
use spinqd::qd_eval::{evaluate, QDKind};

fn main() {
    let a = C64::new(1.0 / 3f64.sqrt(), 0.0);
    let rho = named_state(NamedState::Spin1 { a_plus: a, a_zero: a, a_minus: a }).unwrap();
    let c = decompose(&rho).unwrap();
    println!("{:>7} {:>10} {:>10} {:>10} {:>10}", "theta", "W", "P", "Q", "F");
    for i in 0..=12 {
        let th = PI * i as f64 / 12.0;
        let pt = [SphericalPoint::new(th, 2.0 * PI / 3.0)];
        let v = QDKind::ALL.map(|k| evaluate(k, &c, &pt).unwrap());
        println!("{th:7.3} {:10.5} {:10.5} {:10.5} {:10.5}", v[0], v[1], v[2], v[3]);
    }
}
