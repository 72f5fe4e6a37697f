//! Angular-momentum special functions: 3j symbols, Clebsch-Gordan
//! coefficients, spherical harmonics and Wigner small-d matrices.
//!
//! Spins and projections are carried as [`HalfInt`] (twice the value) so
//! parity and triangle checks are exact.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AngularError {
    #[error("negative angular momentum 2j = {0}")]
    NegativeSpin(i32),
    #[error("projection 2m = {m2} inconsistent with 2j = {j2}")]
    Projection { j2: i32, m2: i32 },
    #[error("|Q| = {q} exceeds K = {k}")]
    QOutOfRange { k: u32, q: i32 },
    #[error("factorial argument {0} outside precomputed table")]
    FactorialRange(i32),
}

/// A non-negative or signed half-integer stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HalfInt {
    twice: i32,
}

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt { twice: 0 };
    pub const HALF: HalfInt = HalfInt { twice: 1 };
    pub const ONE: HalfInt = HalfInt { twice: 2 };

    /// From the doubled value, e.g. `HalfInt::from_twice(1)` is 1/2.
    pub const fn from_twice(twice: i32) -> Self {
        HalfInt { twice }
    }

    pub const fn int(n: i32) -> Self {
        HalfInt { twice: 2 * n }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        self.twice as f64 / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// Dimension 2j+1 of a spin-j space.
    pub fn dim(self) -> usize {
        (self.twice + 1) as usize
    }

    /// Projections j, j-1, ..., -j (the basis order used throughout).
    pub fn projections(self) -> impl Iterator<Item = HalfInt> {
        let t = self.twice;
        (0..=t).map(move |a| HalfInt { twice: t - 2 * a })
    }
}

impl std::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt { twice: -self.twice }
    }
}

impl std::ops::Add for HalfInt {
    type Output = HalfInt;
    fn add(self, o: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice + o.twice }
    }
}

impl std::ops::Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, o: HalfInt) -> HalfInt {
        HalfInt { twice: self.twice - o.twice }
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// A point on the unit sphere, theta in [0, pi], phi in [0, 2pi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalPoint {
    pub theta: f64,
    pub phi: f64,
}

impl SphericalPoint {
    pub fn new(theta: f64, phi: f64) -> Self {
        let theta = theta.clamp(0.0, PI);
        let mut phi = phi.rem_euclid(2.0 * PI);
        if phi >= 2.0 * PI {
            phi = 0.0;
        }
        SphericalPoint { theta, phi }
    }
}

const FACT_MAX: usize = 60;

fn fact_table() -> &'static [f64; FACT_MAX + 1] {
    static TABLE: std::sync::OnceLock<[f64; FACT_MAX + 1]> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [1.0f64; FACT_MAX + 1];
        for n in 1..=FACT_MAX {
            t[n] = t[n - 1] * n as f64;
        }
        t
    })
}

/// n! for 0 <= n <= 60.
pub fn factorial(n: i32) -> Result<f64, AngularError> {
    if n < 0 || n as usize > FACT_MAX {
        return Err(AngularError::FactorialRange(n));
    }
    Ok(fact_table()[n as usize])
}

fn fact(n: i32) -> f64 {
    fact_table()[n as usize]
}

fn check_spin(j: HalfInt) -> Result<(), AngularError> {
    if j.twice < 0 {
        return Err(AngularError::NegativeSpin(j.twice));
    }
    Ok(())
}

fn check_proj(j: HalfInt, m: HalfInt) -> Result<(), AngularError> {
    if (j.twice - m.twice).rem_euclid(2) != 0 {
        return Err(AngularError::Projection { j2: j.twice, m2: m.twice });
    }
    Ok(())
}

/// Wigner 3j symbol via the Racah sum.
pub fn wigner_3j(
    j1: HalfInt,
    j2: HalfInt,
    j3: HalfInt,
    m1: HalfInt,
    m2: HalfInt,
    m3: HalfInt,
) -> Result<f64, AngularError> {
    for (j, m) in [(j1, m1), (j2, m2), (j3, m3)] {
        check_spin(j)?;
        check_proj(j, m)?;
    }
    if m1.twice + m2.twice + m3.twice != 0 {
        return Ok(0.0);
    }
    if [(j1, m1), (j2, m2), (j3, m3)].iter().any(|(j, m)| m.twice.abs() > j.twice) {
        return Ok(0.0);
    }
    let (a, b, c) = (j1.twice, j2.twice, j3.twice);
    if c > a + b || c < (a - b).abs() || (a + b + c) % 2 != 0 {
        return Ok(0.0);
    }
    if (a + b + c) / 2 + 1 > FACT_MAX as i32 {
        return Err(AngularError::FactorialRange((a + b + c) / 2 + 1));
    }
    // everything below in integer units (all differences are integers)
    let h = |x: i32| x / 2;
    let tri = fact(h(a + b - c)) * fact(h(a - b + c)) * fact(h(-a + b + c)) / fact(h(a + b + c) + 1);
    let pre = (tri
        * fact(h(a + m1.twice))
        * fact(h(a - m1.twice))
        * fact(h(b + m2.twice))
        * fact(h(b - m2.twice))
        * fact(h(c + m3.twice))
        * fact(h(c - m3.twice)))
    .sqrt();
    let kmin = 0.max(h(b - c - m1.twice)).max(h(a - c + m2.twice));
    let kmax = h(a + b - c).min(h(a - m1.twice)).min(h(b + m2.twice));
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let den = fact(k)
            * fact(h(c - b + m1.twice) + k)
            * fact(h(c - a - m2.twice) + k)
            * fact(h(a + b - c) - k)
            * fact(h(a - m1.twice) - k)
            * fact(h(b + m2.twice) - k);
        let s = if k % 2 == 0 { 1.0 } else { -1.0 };
        sum += s / den;
    }
    let phase = if h(a - b - m3.twice).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    Ok(phase * pre * sum)
}

/// Clebsch-Gordan coefficient <j1 m1 j2 m2 | j m>, from the 3j symbol.
pub fn clebsch_gordan(
    j1: HalfInt,
    m1: HalfInt,
    j2: HalfInt,
    m2: HalfInt,
    j: HalfInt,
    m: HalfInt,
) -> Result<f64, AngularError> {
    let w = wigner_3j(j1, j2, j, m1, m2, -m)?;
    let e = (j1.twice - j2.twice + m.twice) / 2;
    let phase = if e.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    Ok(phase * ((j.twice + 1) as f64).sqrt() * w)
}

/// Associated Legendre P_l^m(x), m >= 0, with the Condon-Shortley phase.
fn assoc_legendre(l: u32, m: u32, x: f64) -> f64 {
    let mut pmm = 1.0;
    if m > 0 {
        let s = ((1.0 - x) * (1.0 + x)).max(0.0).sqrt();
        let mut f = 1.0;
        for _ in 0..m {
            pmm *= -f * s;
            f += 2.0;
        }
    }
    if l == m {
        return pmm;
    }
    let mut pm1 = x * (2 * m + 1) as f64 * pmm;
    if l == m + 1 {
        return pm1;
    }
    let mut pll = 0.0;
    for ll in (m + 2)..=l {
        pll = (x * (2 * ll - 1) as f64 * pm1 - (ll + m - 1) as f64 * pmm) / (ll - m) as f64;
        pmm = pm1;
        pm1 = pll;
    }
    pll
}

/// Spherical harmonic Y_KQ(theta, phi), Condon-Shortley convention.
pub fn spherical_harmonic(k: u32, q: i32, p: SphericalPoint) -> Result<C64, AngularError> {
    if q.unsigned_abs() > k {
        return Err(AngularError::QOutOfRange { k, q });
    }
    let ma = q.unsigned_abs();
    let norm = ((2 * k + 1) as f64 / (4.0 * PI) * fact((k - ma) as i32) / fact((k + ma) as i32)).sqrt();
    let plm = assoc_legendre(k, ma, p.theta.cos());
    let y = C64::from_polar(norm * plm, ma as f64 * p.phi);
    if q >= 0 {
        Ok(y)
    } else if ma % 2 == 0 {
        Ok(y.conj())
    } else {
        Ok(-y.conj())
    }
}

/// All Y_KQ for K <= kmax at one point, indexed by K*K + K + Q.
pub fn spherical_harmonics_upto(kmax: u32, p: SphericalPoint) -> Vec<C64> {
    let n = ((kmax + 1) * (kmax + 1)) as usize;
    let mut out = vec![C64::new(0.0, 0.0); n];
    let x = p.theta.cos();
    for k in 0..=kmax {
        for ma in 0..=k {
            let norm = ((2 * k + 1) as f64 / (4.0 * PI) * fact((k - ma) as i32) / fact((k + ma) as i32)).sqrt();
            let y = C64::from_polar(norm * assoc_legendre(k, ma, x), ma as f64 * p.phi);
            let base = (k * k + k) as usize;
            out[base + ma as usize] = y;
            if ma > 0 {
                out[base - ma as usize] = if ma % 2 == 0 { y.conj() } else { -y.conj() };
            }
        }
    }
    out
}

/// Wigner small-d element d^j_{mp,m}(beta) = <j mp| exp(-i beta J_y) |j m>.
pub fn wigner_small_d(j: HalfInt, mp: HalfInt, m: HalfInt, beta: f64) -> Result<f64, AngularError> {
    check_spin(j)?;
    check_proj(j, mp)?;
    check_proj(j, m)?;
    if mp.twice.abs() > j.twice {
        return Err(AngularError::Projection { j2: j.twice, m2: mp.twice });
    }
    if m.twice.abs() > j.twice {
        return Err(AngularError::Projection { j2: j.twice, m2: m.twice });
    }
    let jpm = (j.twice + m.twice) / 2;
    let jmm = (j.twice - m.twice) / 2;
    let jpmp = (j.twice + mp.twice) / 2;
    let jmmp = (j.twice - mp.twice) / 2;
    let dm = (mp.twice - m.twice) / 2;
    let pre = (fact(jpmp) * fact(jmmp) * fact(jpm) * fact(jmm)).sqrt();
    let (c, s) = ((beta / 2.0).cos(), (beta / 2.0).sin());
    let smin = 0.max(-dm);
    let smax = jpm.min(jmmp);
    let mut sum = 0.0;
    for k in smin..=smax {
        let den = fact(jpm - k) * fact(k) * fact(dm + k) * fact(jmmp - k);
        let sign = if (dm + k).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        sum += sign * c.powi(jpm + jmmp - 2 * k) * s.powi(dm + 2 * k) / den;
    }
    Ok(pre * sum)
}

/// Full d^j(beta) with rows/columns ordered m = j..-j.
pub fn small_d_matrix(j: HalfInt, beta: f64) -> ndarray::Array2<f64> {
    let n = j.dim();
    let ms: Vec<HalfInt> = j.projections().collect();
    ndarray::Array2::from_shape_fn((n, n), |(a, b)| {
        wigner_small_d(j, ms[a], ms[b], beta).expect("projections in range")
    })
}
