//! Sphere quadrature, normalization checks, negativity scans and the
//! nonclassical volume delta = int |W| dOmega - 1.

use std::f64::consts::PI;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angular::{spherical_harmonics_upto, SphericalPoint};
use crate::multipole::MultipoleCoeffs;
use crate::qd_eval::{QDGrid, QDKind, QdError, QdEvaluator};
use crate::quadrature::{gauss_legendre, integrate, Neumaier, QuadratureError};

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error(transparent)]
    Qd(#[from] QdError),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("quadrature budget exceeded: {needed} node tuples > budget {budget}")]
    Budget { needed: u128, budget: u128 },
    #[error("invalid quadrature spec: {0}")]
    Spec(String),
}

/// Negativity threshold.
pub const NEG_EPS: f64 = 1e-10;

/// Per-sphere product rule: Gauss-Legendre in cos(theta), trapezoid in phi.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub n_theta: usize,
    pub n_phi: usize,
    /// Upper bound on the number of node tuples of a product grid.
    pub budget: u128,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { n_theta: 64, n_phi: 64, budget: 50_000_000 }
    }
}

impl QuadratureSpec {
    pub fn new(n_theta: usize, n_phi: usize) -> Result<Self, MeasureError> {
        let q = QuadratureSpec { n_theta, n_phi, ..Default::default() };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<(), MeasureError> {
        if self.n_theta < 8 || self.n_phi < 8 {
            return Err(MeasureError::Spec(format!("{}x{} (need at least 8x8)", self.n_theta, self.n_phi)));
        }
        Ok(())
    }

    fn check_budget(&self, spheres: usize) -> Result<(), MeasureError> {
        let per = (self.n_theta * self.n_phi) as u128;
        let needed = per.checked_pow(spheres as u32).unwrap_or(u128::MAX);
        if needed > self.budget {
            return Err(MeasureError::Budget { needed, budget: self.budget });
        }
        Ok(())
    }
}

/// Nodes and weights (sin(theta) included) of one sphere.
pub fn sphere_nodes(q: &QuadratureSpec) -> Vec<(SphericalPoint, f64)> {
    let (x, w) = gauss_legendre(q.n_theta);
    let dphi = 2.0 * PI / q.n_phi as f64;
    let mut out = Vec::with_capacity(q.n_theta * q.n_phi);
    for (xi, wi) in x.iter().zip(&w) {
        let theta = xi.clamp(-1.0, 1.0).acos();
        for k in 0..q.n_phi {
            out.push((SphericalPoint { theta, phi: k as f64 * dphi }, wi * dphi));
        }
    }
    out
}

/// Values of a QD on the product grid of `q`.
pub fn qd_grid(kind: QDKind, c: &MultipoleCoeffs, q: &QuadratureSpec) -> Result<QDGrid, MeasureError> {
    q.validate()?;
    let n = c.n_particles();
    q.check_budget(n)?;
    let ev = QdEvaluator::new(kind, c)?;
    let nodes = sphere_nodes(q);
    let tables: Vec<Vec<Vec<C64>>> =
        (0..n).map(|p| nodes.iter().map(|(pt, _)| spherical_harmonics_upto(ev.kmax(p), *pt)).collect()).collect();
    let per = nodes.len();
    let total = per.pow(n as u32);
    let values = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut rem = flat;
            let mut idx = vec![0; n];
            for p in (0..n).rev() {
                idx[p] = rem % per;
                rem /= per;
            }
            let ys: Vec<Vec<C64>> = (0..n).map(|p| tables[p][idx[p]].clone()).collect();
            let z = ev.sum_with_tables(&ys);
            if z.im.abs() > crate::qd_eval::IMAG_TOL * (1.0 + z.re.abs()) {
                Err(QdError::ImaginaryResidue(z.im.abs()))
            } else {
                Ok(z.re)
            }
        })
        .collect::<Result<Vec<f64>, QdError>>()?;
    Ok(QDGrid { kind, nodes: vec![nodes; n], values })
}

/// |int QD dOmega - 1| by the product rule. The grid sum factorises over
/// the spheres, so only per-sphere moment vectors are formed.
pub fn normalization_residual(kind: QDKind, c: &MultipoleCoeffs, q: &QuadratureSpec) -> Result<f64, MeasureError> {
    q.validate()?;
    let ev = QdEvaluator::new(kind, c)?;
    let nodes = sphere_nodes(q);
    let moments: Vec<Vec<C64>> = (0..ev.n_particles())
        .map(|p| {
            let kmax = ev.kmax(p);
            let len = ((kmax + 1) * (kmax + 1)) as usize;
            let mut re = vec![Neumaier::default(); len];
            let mut im = vec![Neumaier::default(); len];
            for (pt, w) in &nodes {
                for (i, y) in spherical_harmonics_upto(kmax, *pt).iter().enumerate() {
                    re[i].add(w * y.re);
                    im[i].add(w * y.im);
                }
            }
            re.iter().zip(&im).map(|(a, b)| C64::new(a.sum(), b.sum())).collect()
        })
        .collect();
    let total = ev.sum_with_tables(&moments);
    Ok((total.re - 1.0).abs())
}

/// Single-sphere function f = Re sum_i coef[i] Y_i with Y indexed K^2+K+Q.
///
/// Pairs (K, Q) and (K, -Q) are folded, so at fixed phi
/// f(theta) = sum_{K, m >= 0} b_Km(phi) P_K^m(cos theta) with real b.
struct SphereFn {
    kmax: usize,
    /// (c_KQ + (-1)^Q conj c_K,-Q) * N_KQ at [m * (kmax + 1) + K].
    folded: Vec<C64>,
}

impl SphereFn {
    fn new(coef: &[C64], kmax: u32) -> Self {
        let km = kmax as usize;
        let mut folded = vec![C64::new(0.0, 0.0); (km + 1) * (km + 1)];
        for k in 0..=km {
            for m in 0..=k {
                let norm = ((2 * k + 1) as f64 / (4.0 * PI) * fact_ratio(k - m, k + m)).sqrt();
                let base = k * k + k;
                let mut a = coef[base + m];
                if m > 0 {
                    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
                    a += coef[base - m].conj() * sign;
                }
                folded[m * (km + 1) + k] = a * norm;
            }
        }
        SphereFn { kmax: km, folded }
    }

    fn slice(&self, phi: f64) -> Vec<f64> {
        let km = self.kmax;
        let mut b = vec![0.0; self.folded.len()];
        for m in 0..=km {
            let e = C64::from_polar(1.0, m as f64 * phi);
            for k in m..=km {
                b[m * (km + 1) + k] = (self.folded[m * (km + 1) + k] * e).re;
            }
        }
        b
    }

    /// f(theta) for one phi slice, Legendre recursion in K per order m.
    fn at(&self, b: &[f64], theta: f64) -> f64 {
        let km = self.kmax;
        let (x, s) = (theta.cos(), theta.sin().abs());
        let mut acc = 0.0;
        let mut pmm = 1.0;
        for m in 0..=km {
            if m > 0 {
                pmm *= -((2 * m - 1) as f64) * s;
            }
            let row = &b[m * (km + 1)..];
            acc += row[m] * pmm;
            if m == km {
                break;
            }
            let mut p0 = pmm;
            let mut p1 = x * (2 * m + 1) as f64 * pmm;
            acc += row[m + 1] * p1;
            for l in (m + 2)..=km {
                let p2 = (x * (2 * l - 1) as f64 * p1 - (l + m - 1) as f64 * p0) / (l - m) as f64;
                acc += row[l] * p2;
                p0 = p1;
                p1 = p2;
            }
        }
        acc
    }

    /// int_0^pi |f(theta, phi)| sin(theta) dtheta with the sign changes of f
    /// located first, so every Gauss piece sees a smooth integrand.
    fn theta_abs(&self, phi: f64, gl: &(Vec<f64>, Vec<f64>)) -> f64 {
        let b = self.slice(phi);
        let samples = (8 * (self.kmax + 1)).max(32);
        let h = PI / samples as f64;
        let mut cuts = vec![0.0];
        let mut prev = self.at(&b, 0.0);
        for s in 1..=samples {
            let th = s as f64 * h;
            let cur = self.at(&b, th);
            if prev != 0.0 && cur != 0.0 && (prev < 0.0) != (cur < 0.0) {
                cuts.push(self.root(&b, th - h, th, prev, cur));
            }
            prev = cur;
        }
        cuts.push(PI);
        let mut acc = Neumaier::default();
        for w in cuts.windows(2) {
            let (a, b2) = (w[0], w[1]);
            if b2 <= a {
                continue;
            }
            let (c, half) = (0.5 * (a + b2), 0.5 * (b2 - a));
            let mut piece = 0.0;
            for (x, wt) in gl.0.iter().zip(&gl.1) {
                let th = c + half * x;
                piece += wt * self.at(&b, th) * th.sin();
            }
            acc.add((piece * half).abs());
        }
        acc.sum()
    }

    /// Illinois regula falsi on a bracketing interval.
    fn root(&self, b: &[f64], mut a: f64, mut c: f64, mut fa: f64, mut fc: f64) -> f64 {
        let mut side = 0;
        for _ in 0..100 {
            let m = (a * fc - c * fa) / (fc - fa);
            if !(m > a && m < c) || c - a < 1e-14 {
                return 0.5 * (a + c);
            }
            let fm = self.at(b, m);
            if fm == 0.0 {
                return m;
            }
            if (fm < 0.0) == (fa < 0.0) {
                a = m;
                fa = fm;
                if side == -1 {
                    fc *= 0.5;
                }
                side = -1;
            } else {
                c = m;
                fc = fm;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            }
            if fm.abs() < 1e-15 {
                return m;
            }
        }
        0.5 * (a + c)
    }

    fn abs_integral(&self) -> Result<f64, MeasureError> {
        let gl = gauss_legendre(24);
        let (v, _) = integrate(|phi| self.theta_abs(phi, &gl), 0.0, 2.0 * PI, 16, 1e-12, 1e-11, 4000)?;
        Ok(v)
    }
}

/// (a)! / (b)! for small non-negative a <= b.
fn fact_ratio(a: usize, b: usize) -> f64 {
    ((a + 1)..=b).fold(1.0, |acc, i| acc / i as f64)
}

/// Nonclassical volume delta = int |W| dOmega_1..dOmega_N - 1.
///
/// The last sphere is integrated with sign changes resolved (exact up to
/// the root-finding and adaptive tolerances); any other spheres use the
/// product rule of `q`.
pub fn nonclassical_volume(c: &MultipoleCoeffs, q: &QuadratureSpec) -> Result<f64, MeasureError> {
    q.validate()?;
    let ev = QdEvaluator::new(QDKind::W, c)?;
    let n = ev.n_particles();
    let last = n - 1;
    let kl = ev.kmax(last);
    let len_last = ((kl + 1) * (kl + 1)) as usize;
    if n == 1 {
        let mut coef = vec![C64::new(0.0, 0.0); len_last];
        for (idx, w) in ev.terms() {
            coef[idx[0]] += w;
        }
        return Ok(SphereFn::new(&coef, kl).abs_integral()? - 1.0);
    }
    q.check_budget(last)?;
    let nodes = sphere_nodes(q);
    let tables: Vec<Vec<Vec<C64>>> =
        (0..last).map(|p| nodes.iter().map(|(pt, _)| spherical_harmonics_upto(ev.kmax(p), *pt)).collect()).collect();
    let per = nodes.len();
    let total = per.pow(last as u32);
    let parts = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut rem = flat;
            let mut weight = 1.0;
            let mut idx = vec![0; last];
            for p in (0..last).rev() {
                idx[p] = rem % per;
                weight *= nodes[idx[p]].1;
                rem /= per;
            }
            let mut coef = vec![C64::new(0.0, 0.0); len_last];
            for (ti, w) in ev.terms() {
                let mut z = *w;
                for p in 0..last {
                    z *= tables[p][idx[p]][ti[p]];
                }
                coef[ti[last]] += z;
            }
            SphereFn::new(&coef, kl).abs_integral().map(|v| v * weight)
        })
        .collect::<Result<Vec<f64>, MeasureError>>()?;
    let mut acc = Neumaier::default();
    for v in parts {
        acc.add(v);
    }
    Ok(acc.sum() - 1.0)
}

/// Grid summary of a QD's negative region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NegativityReport {
    pub kind: QDKind,
    pub min: f64,
    /// (theta, phi) per particle at the grid minimum.
    pub argmin: Vec<(f64, f64)>,
    /// Fraction of the quadrature weight where the value is below -1e-10.
    pub negative_fraction: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nonclassical_volume: Option<f64>,
}

impl NegativityReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data")
    }
}

pub fn negativity_scan(kind: QDKind, c: &MultipoleCoeffs, q: &QuadratureSpec) -> Result<NegativityReport, MeasureError> {
    let grid = qd_grid(kind, c, q)?;
    let per = grid.nodes[0].len();
    let n = grid.nodes.len();
    let mut best = (f64::INFINITY, 0usize);
    let mut neg = Neumaier::default();
    let mut all = Neumaier::default();
    for (flat, &v) in grid.values.iter().enumerate() {
        let mut rem = flat;
        let mut w = 1.0;
        for p in (0..n).rev() {
            w *= grid.nodes[p][rem % per].1;
            rem /= per;
        }
        all.add(w);
        if v < -NEG_EPS {
            neg.add(w);
        }
        if v < best.0 {
            best = (v, flat);
        }
    }
    let mut rem = best.1;
    let mut argmin = vec![(0.0, 0.0); n];
    for p in (0..n).rev() {
        let pt = grid.nodes[p][rem % per].0;
        argmin[p] = (pt.theta, pt.phi);
        rem /= per;
    }
    Ok(NegativityReport { kind, min: best.0, argmin, negative_fraction: neg.sum() / all.sum(), nonclassical_volume: None })
}

/// Plain product-rule estimate of int |W| - 1 (no root resolution); a
/// cross-check for [`nonclassical_volume`].
pub fn nonclassical_volume_grid(c: &MultipoleCoeffs, q: &QuadratureSpec) -> Result<f64, MeasureError> {
    let grid = qd_grid(QDKind::W, c, q)?;
    let abs = QDGrid { values: grid.values.iter().map(|v| v.abs()).collect(), ..grid };
    Ok(abs.weighted_sum() - 1.0)
}
