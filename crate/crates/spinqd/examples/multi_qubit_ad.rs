//! EPR, GHZ and W states under amplitude damping: grid minima of W and P.
use spinqd::channels::{ad_kraus, apply_channel, tensor_channel, KrausChannel};
use spinqd::fixtures::{named_state, NamedState};
use spinqd::measures::{negativity_scan, QuadratureSpec};
use spinqd::multipole::decompose;
use spinqd::qd_eval::QDKind;

fn main() {
    let q = QuadratureSpec::new(8, 8).unwrap();
    for (name, state) in [("EPR", NamedState::Singlet), ("GHZ", NamedState::Ghz), ("W", NamedState::W)] {
        let rho0 = named_state(state).unwrap();
        let n = rho0.dims().len();
        println!("{name}");
        for lambda in [0.0, 0.5, 0.9] {
            // AD on the first qubit only
            let mut f = vec![ad_kraus(lambda).unwrap()];
            f.extend((1..n).map(|_| KrausChannel::identity(2)));
            let rho = apply_channel(&tensor_channel(&f).unwrap(), &rho0).unwrap();
            let c = decompose(&rho).unwrap();
            let w = negativity_scan(QDKind::W, &c, &q).unwrap();
            let p = negativity_scan(QDKind::P, &c, &q).unwrap();
            println!("  lambda={lambda:.1}  min W={:+.3e} (neg {:.3})  min P={:+.3e} (neg {:.3})", w.min, w.negative_fraction, p.min, p.negative_fraction);
        }
    }
}
