//! W, P, Q and F quasiprobability distributions from multipole
//! coefficients, plus the printed closed forms used as test oracles.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angular::{factorial, spherical_harmonics_upto, HalfInt, SphericalPoint};
use crate::multipole::{kq_index, MultipoleCoeffs};

#[derive(Debug, Error)]
pub enum QdError {
    #[error("rank K = {k} out of range for 2j = {twice_j}")]
    RankOutOfRange { k: u32, twice_j: i32 },
    #[error("F distribution needs j > 0")]
    ZeroSpin,
    #[error("expected {expected} points, got {got}")]
    PointCount { expected: usize, got: usize },
    #[error("imaginary residue {0:.3e} exceeds tolerance (corrupted coefficients?)")]
    ImaginaryResidue(f64),
    #[error("unknown oracle id `{0}`")]
    UnknownOracle(String),
    #[error("oracle `{oracle}` does not provide kind {kind}")]
    KindUnavailable { oracle: OracleId, kind: QDKind },
}

pub const IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, PartialOrd, Ord)]
pub enum QDKind {
    W,
    P,
    Q,
    F,
}

impl QDKind {
    pub const ALL: [QDKind; 4] = [QDKind::W, QDKind::P, QDKind::Q, QDKind::F];
}

impl fmt::Display for QDKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            QDKind::W => "W",
            QDKind::P => "P",
            QDKind::Q => "Q",
            QDKind::F => "F",
        };
        f.write_str(s)
    }
}

impl FromStr for QDKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "W" | "w" => Ok(QDKind::W),
            "P" | "p" => Ok(QDKind::P),
            "Q" | "q" => Ok(QDKind::Q),
            "F" | "f" => Ok(QDKind::F),
            other => Err(format!("unknown distribution `{other}`")),
        }
    }
}

/// Multiplier c(kind, j, K, Q) with QD = sum_KQ rho_KQ Y_KQ c.
pub fn kernel_weight(kind: QDKind, j: HalfInt, k: u32, q: i32) -> Result<f64, QdError> {
    let tj = j.twice();
    if k as i32 > tj || q.unsigned_abs() > k {
        return Err(QdError::RankOutOfRange { k, twice_j: tj });
    }
    let k = k as i32;
    let f = |n: i32| factorial(n).expect("factorial within table");
    let inv = 1.0 / (4.0 * PI).sqrt();
    let sign = if (k - q).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    Ok(match kind {
        QDKind::W => ((tj + 1) as f64 / (4.0 * PI)).sqrt(),
        QDKind::P => inv * sign * (f(tj - k) * f(tj + k + 1)).sqrt() / f(tj),
        QDKind::Q => inv * sign * (tj + 1) as f64 * f(tj) / (f(tj - k) * f(tj + k + 1)).sqrt(),
        QDKind::F => {
            if tj == 0 {
                return Err(QdError::ZeroSpin);
            }
            let jj = j.value() * (j.value() + 1.0);
            inv / 2f64.powi(k) * (f(tj + k + 1) / (f(tj - k) * jj.powi(k))).sqrt()
        }
    })
}

/// Coefficients with kernel weights folded in, ready for repeated
/// evaluation at many points.
#[derive(Debug, Clone)]
pub struct QdEvaluator {
    kind: QDKind,
    kmax: Vec<u32>,
    terms: Vec<(Vec<usize>, C64)>,
}

impl QdEvaluator {
    pub fn new(kind: QDKind, c: &MultipoleCoeffs) -> Result<Self, QdError> {
        let mut terms = Vec::new();
        for (key, &v) in &c.coeffs {
            if v.norm() == 0.0 {
                continue;
            }
            let mut w = v;
            let mut idx = Vec::with_capacity(key.len());
            for (&(k, q), &j) in key.iter().zip(&c.spins) {
                w *= kernel_weight(kind, j, k, q)?;
                idx.push(kq_index(k, q));
            }
            terms.push((idx, w));
        }
        let kmax = c.spins.iter().map(|s| s.twice() as u32).collect();
        Ok(QdEvaluator { kind, kmax, terms })
    }

    pub fn kind(&self) -> QDKind {
        self.kind
    }

    pub fn n_particles(&self) -> usize {
        self.kmax.len()
    }

    pub fn kmax(&self, particle: usize) -> u32 {
        self.kmax[particle]
    }

    /// Complex sum before the realness check.
    pub fn evaluate_complex(&self, points: &[SphericalPoint]) -> Result<C64, QdError> {
        if points.len() != self.kmax.len() {
            return Err(QdError::PointCount { expected: self.kmax.len(), got: points.len() });
        }
        let ys: Vec<Vec<C64>> = points.iter().zip(&self.kmax).map(|(p, &k)| spherical_harmonics_upto(k, *p)).collect();
        Ok(self.sum_with_tables(&ys))
    }

    /// Sum using precomputed Y tables (one per particle, indexed K^2+K+Q).
    pub fn sum_with_tables(&self, ys: &[Vec<C64>]) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for (idx, w) in &self.terms {
            let mut t = *w;
            for (i, y) in idx.iter().zip(ys) {
                t *= y[*i];
            }
            acc += t;
        }
        acc
    }

    pub fn evaluate(&self, points: &[SphericalPoint]) -> Result<f64, QdError> {
        let z = self.evaluate_complex(points)?;
        let scale = 1.0 + z.re.abs();
        if z.im.abs() > IMAG_TOL * scale {
            return Err(QdError::ImaginaryResidue(z.im.abs()));
        }
        Ok(z.re)
    }

    /// Terms as (per-particle table index, weighted coefficient).
    pub fn terms(&self) -> &[(Vec<usize>, C64)] {
        &self.terms
    }
}

/// QD value at one point per particle.
pub fn evaluate(kind: QDKind, c: &MultipoleCoeffs, points: &[SphericalPoint]) -> Result<f64, QdError> {
    QdEvaluator::new(kind, c)?.evaluate(points)
}

/// Quadrature nodes per sphere and the QD values on their product.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QDGrid {
    pub kind: QDKind,
    /// Per particle: (point, weight) pairs; weights include sin(theta).
    pub nodes: Vec<Vec<(SphericalPoint, f64)>>,
    /// Row-major over the product of the node lists (particle 1 slowest).
    pub values: Vec<f64>,
}

impl QDGrid {
    pub fn weighted_sum(&self) -> f64 {
        let lens: Vec<usize> = self.nodes.iter().map(|n| n.len()).collect();
        let mut acc = crate::quadrature::Neumaier::default();
        for (flat, v) in self.values.iter().enumerate() {
            let mut rem = flat;
            let mut w = 1.0;
            for (p, &len) in lens.iter().enumerate().rev() {
                w *= self.nodes[p][rem % len].1;
                rem /= len;
            }
            acc.add(w * v);
        }
        acc.sum()
    }
}

/// Systems with published closed-form QDs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OracleId {
    QndQubit,
    SgadQubit,
    AdEpr,
    AdGhz,
    AdW,
    Spin1Pure,
}

impl OracleId {
    pub const ALL: [OracleId; 6] = [
        OracleId::QndQubit,
        OracleId::SgadQubit,
        OracleId::AdEpr,
        OracleId::AdGhz,
        OracleId::AdW,
        OracleId::Spin1Pure,
    ];

    pub fn n_particles(self) -> usize {
        match self {
            OracleId::QndQubit | OracleId::SgadQubit | OracleId::Spin1Pure => 1,
            OracleId::AdEpr => 2,
            OracleId::AdGhz | OracleId::AdW => 3,
        }
    }

    pub fn kinds(self) -> &'static [QDKind] {
        match self {
            OracleId::Spin1Pure => &QDKind::ALL,
            _ => &[QDKind::W, QDKind::P, QDKind::Q],
        }
    }
}

impl fmt::Display for OracleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OracleId::QndQubit => "qnd-qubit",
            OracleId::SgadQubit => "sgad-qubit",
            OracleId::AdEpr => "ad-epr",
            OracleId::AdGhz => "ad-ghz",
            OracleId::AdW => "ad-w",
            OracleId::Spin1Pure => "spin1-pure",
        };
        f.write_str(s)
    }
}

impl FromStr for OracleId {
    type Err = QdError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OracleId::ALL
            .iter()
            .copied()
            .find(|o| o.to_string() == s)
            .ok_or_else(|| QdError::UnknownOracle(s.to_string()))
    }
}

/// Symbols appearing in the closed forms. Unused fields are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleParams {
    pub alpha: f64,
    pub beta: f64,
    /// System frequency omega (hbar = 1).
    pub omega: f64,
    pub t: f64,
    /// gamma(t) of the QND channel.
    pub gamma_t: f64,
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
    pub p: f64,
    pub xi: f64,
    pub a_plus: C64,
    pub a_zero: C64,
    pub a_minus: C64,
}

impl Default for OracleParams {
    fn default() -> Self {
        OracleParams {
            alpha: 0.0,
            beta: 0.0,
            omega: 1.0,
            t: 0.0,
            gamma_t: 0.0,
            lambda: 0.0,
            mu: 0.0,
            nu: 0.0,
            p: 1.0,
            xi: 0.0,
            a_plus: C64::new(0.0, 0.0),
            a_zero: C64::new(0.0, 0.0),
            a_minus: C64::new(0.0, 0.0),
        }
    }
}

/// The published closed-form QD, transcribed term by term.
pub fn closed_form(oracle: OracleId, kind: QDKind, s: &OracleParams, points: &[SphericalPoint]) -> Result<f64, QdError> {
    if points.len() != oracle.n_particles() {
        return Err(QdError::PointCount { expected: oracle.n_particles(), got: points.len() });
    }
    if !oracle.kinds().contains(&kind) {
        return Err(QdError::KindUnavailable { oracle, kind });
    }
    let ct: Vec<f64> = points.iter().map(|p| p.theta.cos()).collect();
    let st: Vec<f64> = points.iter().map(|p| p.theta.sin()).collect();
    let ph: Vec<f64> = points.iter().map(|p| p.phi).collect();
    let r3 = 3f64.sqrt();
    Ok(match oracle {
        OracleId::QndQubit => {
            let (a, b) = match kind {
                QDKind::W => (-r3, r3),
                QDKind::P => (3.0, 3.0),
                _ => (1.0, 1.0),
            };
            let decay = (-(s.omega * s.omega) * s.gamma_t).exp();
            (1.0 + a * s.alpha.cos() * ct[0]
                + b * decay * (s.beta + s.omega * s.t + ph[0]).cos() * s.alpha.sin() * st[0])
                / (4.0 * PI)
        }
        OracleId::SgadQubit => {
            let (a, b) = match kind {
                QDKind::W => (r3, r3),
                QDKind::P => (-3.0, 3.0),
                _ => (-1.0, 1.0),
            };
            let (l, m, n, p) = (s.lambda, s.mu, s.nu, s.p);
            let z = -m + n - p * (l - m + n) + (-1.0 + m + n + p * (l - m - n)) * s.alpha.cos();
            let x = (p * (1.0 - l).sqrt() + (1.0 - p) * ((1.0 - m) * (1.0 - n)).sqrt()) * (s.beta + ph[0]).cos()
                + (1.0 - p) * (m * n).sqrt() * (s.beta + s.xi - ph[0]).cos();
            (1.0 + a * z * ct[0] + b * x * s.alpha.sin() * st[0]) / (4.0 * PI)
        }
        OracleId::AdEpr => {
            let l = s.lambda;
            let (c1, c2) = (ct[0], ct[1]);
            let trans = st[0] * st[1] * (ph[0] - ph[1]).cos();
            let v = match kind {
                QDKind::W => l * (1.0 + 3.0 * c1 * c2 - r3 * (c1 + c2)) + (1.0 - l) * (1.0 - 3.0 * c1 * c2 - 3.0 * trans),
                QDKind::P => l * (1.0 + 9.0 * c1 * c2 + 3.0 * (c1 + c2)) + (1.0 - l) * (1.0 - 9.0 * c1 * c2 - 9.0 * trans),
                _ => l * (1.0 + c1 * c2 + (c1 + c2)) + (1.0 - l) * (1.0 - c1 * c2 - trans),
            };
            v / (16.0 * PI * PI)
        }
        OracleId::AdGhz => {
            let l = s.lambda;
            let q = (1.0 - l).sqrt();
            let (c1, c2, c3) = (ct[0], ct[1], ct[2]);
            let sss = st[0] * st[1] * st[2] * (ph[0] + ph[1] + ph[2]).cos();
            let ccc = c1 * c2 * c3;
            let v = match kind {
                QDKind::W => {
                    1.0 - r3 * l * c1 + 3.0 * c2 * c3 + 3.0 * (1.0 - l) * c1 * (c2 + c3)
                        - 3.0 * r3 * (l * ccc - q * sss)
                }
                QDKind::P => {
                    1.0 + 3.0 * l * c1 + 9.0 * c2 * c3 + 9.0 * (1.0 - l) * c1 * (c2 + c3) + 27.0 * (l * ccc - q * sss)
                }
                _ => 1.0 + l * c1 + c2 * c3 + (1.0 - l) * c1 * (c2 + c3) + l * ccc - q * sss,
            };
            v / (64.0 * PI.powi(3))
        }
        OracleId::AdW => {
            let l = s.lambda;
            let q = (1.0 - l).sqrt();
            let (c1, c2, c3) = (ct[0], ct[1], ct[2]);
            let (s1, s2, s3) = (st[0], st[1], st[2]);
            let c23 = (ph[1] - ph[2]).cos();
            let c13 = (ph[0] - ph[2]).cos();
            let c12 = (ph[0] - ph[1]).cos();
            let pair = c1 * c2 + c2 * c3 + c1 * c3;
            let sum = c1 + c2 + c3;
            let ccc = c1 * c2 * c3;
            match kind {
                QDKind::W => {
                    (1.0 - pair + r3 / 3.0 * sum - 3.0 * r3 * ccc
                        + 2.0 * (1.0 + r3 * c1) * s2 * s3 * c23
                        + 2.0 * q * ((1.0 + r3 * c2) * s1 * s3 * c13 + (1.0 + r3 * c3) * s1 * s2 * c12)
                        + 4.0 * r3 * l * c1 * (-1.0 / 3.0 + c2 * c3 - s2 * s3 * c23))
                        / (64.0 * PI.powi(3))
                }
                QDKind::P => {
                    (1.0 - 3.0 * pair - sum
                        + 27.0 * ccc
                        + 6.0 * (1.0 - 3.0 * c1) * s2 * s3 * c23
                        + 6.0 * q * ((1.0 - 3.0 * c2) * s1 * s3 * c13 + (1.0 - 3.0 * c3) * s1 * s2 * c12)
                        + 4.0 * l * c1 * (1.0 - 9.0 * c2 * c3 + 9.0 * s2 * s3 * c23))
                        / (64.0 * PI.powi(3))
                }
                _ => {
                    // the printed sin(theta_i^2 / 2) reads as sin^2(theta_i / 2)
                    let h = |th: f64| (th / 2.0).sin().powi(2);
                    let (h1, h2, h3) = (h(points[0].theta), h(points[1].theta), h(points[2].theta));
                    (3.0 - pair - sum
                        + 3.0 * ccc
                        + 4.0 * h1 * s2 * s3 * c23
                        + 4.0 * q * (s1 * h2 * s3 * c13 + s1 * s2 * h3 * c12)
                        + 4.0 * l * c1 * (1.0 - c2 * c3 + s2 * s3 * c23))
                        / (192.0 * PI.powi(3))
                }
            }
        }
        OracleId::Spin1Pure => {
            let (ap, a0, am) = (s.a_plus, s.a_zero, s.a_minus);
            let c = ct[0];
            let sn = st[0];
            let e = C64::from_polar(1.0, ph[0]);
            let a0sq = a0.norm_sqr();
            let base = c * c + a0sq - 3.0 * a0sq * c * c;
            let diff = ap.norm_sqr() - am.norm_sqr();
            let r2 = 2f64.sqrt();
            let r5 = 5f64.sqrt();
            let r10 = 10f64.sqrt();
            match kind {
                QDKind::W => {
                    let z = 6.0 * a0 * sn * (ap.conj() / e * (1.0 + r5 * c) + am.conj() * e * (1.0 - r5 * c))
                        + 3.0 * r10 * ap * am.conj() * sn * sn * e * e;
                    (4.0 - r10 + 3.0 * r10 * base + 6.0 * r2 * diff * c + 2.0 * z.re) / (16.0 * PI)
                }
                QDKind::P => {
                    let z = r2 * a0 * sn * (ap.conj() / e * (1.0 - 5.0 * c) + am.conj() * e * (1.0 + 5.0 * c))
                        + 5.0 * ap * am.conj() * sn * sn * e * e;
                    3.0 / (8.0 * PI) * (-1.0 + 5.0 * base - 2.0 * diff * c + 2.0 * z.re)
                }
                QDKind::Q => {
                    let z = r2 * a0 * sn * (ap.conj() / e * (1.0 - c) + am.conj() * e * (1.0 + c))
                        + 5.0 * ap * am.conj() * sn * sn * e * e;
                    3.0 / (16.0 * PI) * (1.0 + base - 2.0 * diff * c + 2.0 * z.re)
                }
                QDKind::F => {
                    let z = a0 * sn * (ap.conj() / e * (4.0 + 5.0 * r2 * c) + am.conj() * e * (4.0 - 5.0 * r2 * c))
                        + 5.0 * ap * am.conj() * sn * sn * e * e;
                    3.0 / (32.0 * PI) * (1.0 + 5.0 * base + 4.0 * r2 * diff * c + 2.0 * z.re)
                }
            }
        }
    })
}
