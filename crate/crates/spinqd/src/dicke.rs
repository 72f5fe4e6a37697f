//! Strong-field dissipative Dicke model: N two-level atoms in a damped
//! cavity mode prepared in a coherent state, atoms initially in the ground
//! state. Produces the reduced atomic density matrix over time.
//!
//! Internally the bare basis is k = 0..N (m = k - N/2, ascending); results
//! handed to the rest of the crate use descending m like every other
//! `DensityMatrix`.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angular::{small_d_matrix, HalfInt};
use crate::multipole::{hermiticity_defect, DensityMatrix, MultipoleError};
use crate::quadrature::NeumaierC;

#[derive(Debug, Error)]
pub enum DickeError {
    #[error("invalid parameters: {0}")]
    Params(String),
    #[error("photon-sum cutoff {n_max} not converged: change {change:.3e} against n_max + 50")]
    Cutoff { n_max: usize, change: f64 },
    #[error("out of regime: skipped photon weight {0:.3e} with n + k + 1/2 - N/2 < 0")]
    Regime(f64),
    #[error("trace drift {0:.3e} exceeds 1e-6")]
    TraceDrift(f64),
    #[error("result not Hermitian (defect {0:.3e})")]
    NotHermitian(f64),
    #[error(transparent)]
    Multipole(#[from] MultipoleError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DickeParams {
    pub n_atoms: usize,
    pub nbar: f64,
    pub g: f64,
    pub gamma: f64,
}

impl DickeParams {
    pub fn validate(&self) -> Result<(), DickeError> {
        if self.n_atoms == 0 || self.n_atoms > 16 {
            return Err(DickeError::Params(format!("n_atoms = {} (need 1..=16)", self.n_atoms)));
        }
        if !(self.nbar > 0.0 && self.nbar.is_finite()) {
            return Err(DickeError::Params(format!("nbar = {}", self.nbar)));
        }
        if !(self.g > 0.0 && self.g.is_finite()) || !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(DickeError::Params("g must be > 0 and gamma >= 0".into()));
        }
        Ok(())
    }

    /// Strong-field regime checks; each failing check yields a message.
    pub fn regime_warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if self.nbar < 5.0 * self.n_atoms as f64 {
            w.push(format!("nbar = {} < 5 N = {}: strong-field approximation is poor", self.nbar, 5 * self.n_atoms));
        }
        if self.gamma / self.g > 0.1 * self.nbar.sqrt() {
            w.push(format!("gamma/g = {:.3} is not << sqrt(nbar) = {:.3}", self.gamma / self.g, self.nbar.sqrt()));
        }
        w
    }

    /// Default photon cutoff nbar + 12 sqrt(nbar).
    pub fn default_cutoff(&self) -> usize {
        (self.nbar + 12.0 * self.nbar.sqrt()).ceil() as usize
    }
}

/// Dressed atomic basis: column q of `c` is the eigenvector of the
/// collective Sigma_x with eigenvalue `lambdas[q]` = q - N/2, expressed in
/// the bare basis k.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedBasis {
    pub c: Array2<C64>,
    pub lambdas: Vec<f64>,
}

/// U_kq = d^{N/2}_{q-N/2, k-N/2}(-pi/2).
///
/// The i^{q-k} phase sometimes attached to this matrix rotates the basis
/// onto Sigma_y instead; the real matrix is the one that diagonalises
/// Sigma_x.
pub fn dressed_basis(n: usize) -> DressedBasis {
    let j = HalfInt::from_twice(n as i32);
    // small_d_matrix rows/cols are m descending: index a <-> m = N/2 - a
    let d = small_d_matrix(j, -std::f64::consts::FRAC_PI_2);
    let c = Array2::from_shape_fn((n + 1, n + 1), |(k, q)| C64::new(d[[n - q, n - k]], 0.0));
    let lambdas = (0..=n).map(|q| q as f64 - n as f64 / 2.0).collect();
    DressedBasis { c, lambdas }
}

/// Collective Sigma_x = (J_+ + J_-)/2 in the bare (k ascending) basis.
pub fn collective_sigma_x(n: usize) -> Array2<C64> {
    let j = n as f64 / 2.0;
    let mut s = Array2::from_elem((n + 1, n + 1), C64::new(0.0, 0.0));
    for k in 0..n {
        let m = k as f64 - j;
        let v = 0.5 * (j * (j + 1.0) - m * (m + 1.0)).sqrt();
        s[[k + 1, k]] = C64::new(v, 0.0);
        s[[k, k + 1]] = C64::new(v, 0.0);
    }
    s
}

fn ln_alpha(n: usize, nbt: f64) -> f64 {
    let lg = ln_factorial(n);
    -0.5 * nbt + 0.5 * n as f64 * nbt.ln() - 0.5 * lg
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// Diagnostics accompanying a Dicke evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DickeCertificate {
    pub n_max: usize,
    /// max entry change between cutoff n_max and n_max + 50.
    pub tail_change: f64,
    pub skipped_weight: f64,
    pub trace_drift: f64,
    pub hermiticity: f64,
}

/// Reduced atomic matrix in the bare basis (k ascending), unnormalised,
/// summing photon numbers n in [0, n_hi).
fn bare_sum(p: &DickeParams, basis: &DressedBasis, t: f64, n_hi: usize, n_lo_report: usize) -> (Array2<C64>, Array2<C64>, f64) {
    let nn = p.n_atoms;
    let half = nn as f64 / 2.0;
    let nbt = p.nbar * (-p.gamma * t).exp();
    let u = &basis.c;
    let lam = &basis.lambdas;
    // Theta_qp, depends only on lambda_q - lambda_p
    let theta = |q: usize, pp: usize| -> C64 {
        if p.gamma == 0.0 || q == pp {
            return C64::new(0.0, 0.0);
        }
        let gp = C64::new(p.gamma, p.g * (lam[q] - lam[pp]) / (nbt - half + 0.5).sqrt());
        let one_minus = 1.0 - (-p.gamma * t).exp();
        let inner = C64::new(1.0, 0.0) - (-gp * t).exp();
        C64::new(p.nbar * one_minus, 0.0) - p.nbar * p.gamma / gp * inner
    };
    let mut theta_tab = vec![C64::new(0.0, 0.0); (nn + 1) * (nn + 1)];
    for q in 0..=nn {
        for pp in 0..=nn {
            theta_tab[q * (nn + 1) + pp] = theta(q, pp);
        }
    }
    let mut skipped = 0.0;
    let mut lo = Array2::from_elem((nn + 1, nn + 1), C64::new(0.0, 0.0));
    let mut hi = lo.clone();
    for k in 0..=nn {
        for l in 0..=nn {
            let mut acc = NeumaierC::default();
            let mut acc_lo = C64::new(0.0, 0.0);
            for n in 0..n_hi {
                if n == n_lo_report {
                    acc_lo = acc.sum();
                }
                let weight = (ln_alpha(k + n, nbt) + ln_alpha(l + n, nbt)).exp();
                if weight == 0.0 {
                    continue;
                }
                let n_n = (n + k) as f64 + 0.5 - half;
                let m_n = (n + l) as f64 + 0.5 - half;
                if n_n < 0.0 || m_n < 0.0 {
                    if k == l {
                        skipped += weight;
                    }
                    continue;
                }
                let (sn, sm) = (n_n.sqrt(), m_n.sqrt());
                let mut inner = NeumaierC::default();
                for q in 0..=nn {
                    let uq = u[[k, q]].re * u[[0, q]].re;
                    if uq == 0.0 {
                        continue;
                    }
                    for pp in 0..=nn {
                        let up = u[[0, pp]].re * u[[l, pp]].re;
                        if up == 0.0 {
                            continue;
                        }
                        let arg = C64::new(0.0, -2.0 * p.g * t * (lam[q] * sn - lam[pp] * sm));
                        inner.add((arg - theta_tab[q * (nn + 1) + pp]).exp() * (uq * up));
                    }
                }
                acc.add(inner.sum() * weight);
            }
            if n_lo_report >= n_hi {
                acc_lo = acc.sum();
            }
            hi[[k, l]] = acc.sum();
            lo[[k, l]] = acc_lo;
        }
    }
    (lo, hi, skipped)
}

/// Reduced atomic density matrix at time t in the bare basis k = 0..N,
/// with its convergence certificate.
pub fn evolve_dicke_bare(p: &DickeParams, t: f64) -> Result<(Array2<C64>, DickeCertificate), DickeError> {
    evolve_dicke_bare_with(p, t, p.default_cutoff())
}

pub fn evolve_dicke_bare_with(p: &DickeParams, t: f64, n_max: usize) -> Result<(Array2<C64>, DickeCertificate), DickeError> {
    p.validate()?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(DickeError::Params(format!("t = {t}")));
    }
    let basis = dressed_basis(p.n_atoms);
    let (lo, hi, skipped) = bare_sum(p, &basis, t, n_max + 51, n_max + 1);
    let change = lo.iter().zip(hi.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    if change > 1e-10 {
        return Err(DickeError::Cutoff { n_max, change });
    }
    // the skipped mass is a trace defect; keep it well below the renormalisation tolerance
    if skipped > 1e-8 {
        return Err(DickeError::Regime(skipped));
    }
    let herm = hermiticity_defect(&lo);
    if herm > 1e-8 {
        return Err(DickeError::NotHermitian(herm));
    }
    let tr = crate::multipole::trace(&lo);
    let drift = (tr - 1.0).norm();
    if drift > 1e-6 {
        return Err(DickeError::TraceDrift(drift));
    }
    let rho = lo.mapv(|z| z / tr.re);
    Ok((rho, DickeCertificate { n_max, tail_change: change, skipped_weight: skipped, trace_drift: drift, hermiticity: herm }))
}

/// Reduced atomic density matrix (spin N/2, m descending).
pub fn evolve_dicke(p: &DickeParams, t: f64) -> Result<DensityMatrix, DickeError> {
    let (bare, _) = evolve_dicke_bare(p, t)?;
    let mut d = bare;
    d.invert_axis(ndarray::Axis(0));
    d.invert_axis(ndarray::Axis(1));
    Ok(DensityMatrix::new_unchecked(vec![p.n_atoms + 1], d)?)
}

/// The fifteen spin-2 multipole matrices T_KQ (Q >= 0) used for the
/// four-atom model, as literal tables in the bare basis order k = 0..4.
/// Returned as ((K, Q), matrix).
pub fn spin2_multipole_fixtures() -> Vec<((u32, i32), Array2<C64>)> {
    let s2 = 2f64.sqrt();
    let s3 = 3f64.sqrt();
    let s6 = 6f64.sqrt();
    let z = 0.0;
    let lit = |scale: f64, rows: [[f64; 5]; 5]| Array2::from_shape_fn((5, 5), |(i, j)| C64::new(scale * rows[i][j], 0.0));
    let diag = |scale: f64, d: [f64; 5]| {
        let mut r = [[0.0; 5]; 5];
        for i in 0..5 {
            r[i][i] = d[i];
        }
        lit(scale, r)
    };
    vec![
        ((0, 0), diag(1.0 / 5f64.sqrt(), [1.0, 1.0, 1.0, 1.0, 1.0])),
        ((1, 1), lit(1.0 / 10f64.sqrt(), [[z; 5], [-s2, z, z, z, z], [z, -s3, z, z, z], [z, z, -s3, z, z], [z, z, z, -s2, z]])),
        ((1, 0), diag(1.0 / 10f64.sqrt(), [-2.0, -1.0, 0.0, 1.0, 2.0])),
        ((2, 2), lit(1.0 / 7f64.sqrt(), [[z; 5], [z; 5], [s2, z, z, z, z], [z, s3, z, z, z], [z, z, s2, z, z]])),
        ((2, 1), lit(1.0 / 14f64.sqrt(), [[z; 5], [s6, z, z, z, z], [z, 1.0, z, z, z], [z, z, -1.0, z, z], [z, z, z, -s6, z]])),
        ((2, 0), diag(1.0 / 14f64.sqrt(), [2.0, -1.0, -2.0, 1.0, 2.0])),
        ((3, 3), lit(-1.0 / s2, [[z; 5], [z; 5], [z; 5], [1.0, z, z, z, z], [z, 1.0, z, z, z]])),
        ((3, 2), lit(1.0 / s2, [[z; 5], [z; 5], [-1.0, z, z, z, z], [z; 5], [z, z, 1.0, z, z]])),
        ((3, 1), lit(1.0 / 10f64.sqrt(), [[z; 5], [-s3, z, z, z, z], [z, s2, z, z, z], [z, z, s2, z, z], [z, z, z, -s3, z]])),
        ((3, 0), diag(1.0 / 10f64.sqrt(), [-1.0, 2.0, 0.0, -2.0, 1.0])),
        ((4, 4), lit(1.0, [[z; 5], [z; 5], [z; 5], [z; 5], [1.0, z, z, z, z]])),
        ((4, 3), lit(1.0 / s2, [[z; 5], [z; 5], [z; 5], [1.0, z, z, z, z], [z, -1.0, z, z, z]])),
        ((4, 2), lit(1.0 / 14f64.sqrt(), [[z; 5], [z; 5], [s3, z, z, z, z], [z, -2.0 * s2, z, z, z], [z, z, s3, z, z]])),
        ((4, 1), lit(1.0 / 14f64.sqrt(), [[z; 5], [1.0, z, z, z, z], [z, -s6, z, z, z], [z, z, s6, z, z], [z, z, z, -1.0, z]])),
        ((4, 0), diag(1.0 / 70f64.sqrt(), [1.0, -4.0, 6.0, -4.0, 1.0])),
    ]
}
