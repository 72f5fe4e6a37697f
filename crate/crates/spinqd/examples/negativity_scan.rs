//! Grid scan of the negative regions of W, P and Q for the singlet.
use spinqd::fixtures::{named_state, NamedState};
use spinqd::measures::{negativity_scan, normalization_residual, QuadratureSpec};
use spinqd::multipole::decompose;
use spinqd::qd_eval::QDKind;

fn main() {
    let c = decompose(&named_state(NamedState::Singlet).unwrap()).unwrap();
    let q = QuadratureSpec::new(16, 16).unwrap();
    for kind in [QDKind::W, QDKind::P, QDKind::Q] {
        println!("normalisation residual {kind}: {:.1e}", normalization_residual(kind, &c, &q).unwrap());
        println!("{}", negativity_scan(kind, &c, &q).unwrap().to_json());
    }
}
