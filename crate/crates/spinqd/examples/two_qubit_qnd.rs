//! Two localized qubits in a common QND bath, with an injected Gamma table.
use spinqd::angular::SphericalPoint;
use spinqd::channels::{two_qubit_phases, two_qubit_qnd_evolve, BathParams, GammaSq, GammaTable};
use spinqd::fixtures::{named_state, NamedState};
use spinqd::multipole::decompose;
use spinqd::qd_eval::{evaluate, QDKind};

fn main() {
    let bath = BathParams { gamma0: 0.01, temperature: 2.0, ..BathParams::default() };
    let rho0 = named_state(NamedState::Singlet).unwrap();
    // a made-up Gamma(t) = 0.05 t, supplied as a table
    let ts: Vec<f64> = (0..=10).map(f64::from).collect();
    let table = GammaTable::uniform(ts.clone(), ts.iter().map(|t| 0.05 * t).collect()).unwrap();
    let pts = [SphericalPoint::new(1.0, 0.0), SphericalPoint::new(1.0, 0.0)];
    for &t in &ts {
        let ph = two_qubit_phases(&bath, 0.05, t).unwrap();
        let rho = two_qubit_qnd_evolve(&rho0, &bath, 0.05, t, &GammaSq::Injected(table.clone()), true).unwrap();
        let c = decompose(&rho).unwrap();
        println!("t={t:4.1}  A={:+.4e} B={:+.4e}  W={:+.6}", ph.theta, ph.lambda, evaluate(QDKind::W, &c, &pts).unwrap());
    }
}
