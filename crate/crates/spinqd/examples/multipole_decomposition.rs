//! Decompose a spin-3/2 coherent state into multipoles and rebuild it.
use spinqd::angular::HalfInt;
use spinqd::fixtures::atomic_coherent_state;
use spinqd::multipole::{decompose, reconstruct};

fn main() {
    let j = HalfInt::from_twice(3);
    let rho = atomic_coherent_state(j, 1.0, 0.4).expect("valid state");
    let c = decompose(&rho).expect("decompose");
    let mut keys: Vec<_> = c.coeffs.iter().collect();
    keys.sort_by_key(|(k, _)| (*k).clone());
    println!("rho_KQ of |alpha = 1.0, beta = 0.4> (j = 3/2):");
    for (k, v) in keys {
        println!("  K={} Q={:+}  {:+.6} {:+.6}i", k[0].0, k[0].1, v.re, v.im);
    }
    let back = reconstruct(&c).expect("reconstruct");
    println!("round-trip max |diff| = {:.2e}", rho.max_abs_diff(&back));
}
