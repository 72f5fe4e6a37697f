//! Open-system evolutions: QND dephasing (one and two qubits), the
//! SGAD / GAD / AD Kraus family, tensor-product channels and a fixed-step
//! Lindblad integrator.
//!
//! Units: hbar = k_B = 1. Qubit basis index 0 is m = +1/2 (excited).

use std::f64::consts::PI;
use std::path::Path;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::multipole::{dagger, kron, DensityMatrix, MultipoleError};
use crate::quadrature::{integrate, QuadratureError};

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error(transparent)]
    Multipole(#[from] MultipoleError),
    #[error("invalid bath parameters: {0}")]
    Bath(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("unphysical SGAD parameters at t = {t}: lambda = {lambda:.6}, mu = {mu:.6}, nu = {nu:.6}")]
    UnphysicalSgad { t: f64, lambda: f64, mu: f64, nu: f64 },
    #[error("Kraus set is not complete: max |sum E^dag E - I| = {0:.3e}")]
    Incomplete(f64),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("decoherence functional required in strict mode")]
    MissingGamma,
    #[error("Lindblad integration unstable at t = {t}: {what}")]
    Unstable { t: f64, what: String },
    #[error("table error: {0}")]
    Table(String),
}

pub const COMPLETENESS_TOL: f64 = 1e-12;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn identity(n: usize) -> Array2<C64> {
    Array2::from_shape_fn((n, n), |(i, j)| if i == j { c(1.0) } else { c(0.0) })
}

/// Bath description shared by every channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    pub gamma0: f64,
    pub omega_c: f64,
    #[serde(rename = "T")]
    pub temperature: f64,
    /// Squeezing magnitude.
    pub r: f64,
    /// Squeezing-phase slope, Phi(omega) = a * omega.
    pub a: f64,
    /// System frequency.
    pub omega: f64,
}

impl Default for BathParams {
    fn default() -> Self {
        BathParams { gamma0: 0.1, omega_c: 100.0, temperature: 0.0, r: 0.0, a: 0.0, omega: 1.0 }
    }
}

impl BathParams {
    pub fn validate(&self) -> Result<(), ChannelError> {
        let all = [self.gamma0, self.omega_c, self.temperature, self.r, self.a, self.omega];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(ChannelError::Bath("non-finite parameter".into()));
        }
        if self.gamma0 < 0.0 {
            return Err(ChannelError::Bath(format!("gamma0 = {} < 0", self.gamma0)));
        }
        if self.omega_c <= 0.0 {
            return Err(ChannelError::Bath(format!("omega_c = {} <= 0", self.omega_c)));
        }
        if self.temperature < 0.0 {
            return Err(ChannelError::Bath(format!("T = {} < 0", self.temperature)));
        }
        Ok(())
    }

    /// Planck occupation at the system frequency (0 at T = 0).
    pub fn n_th(&self) -> f64 {
        if self.temperature <= 0.0 {
            0.0
        } else {
            1.0 / (self.omega / self.temperature).exp_m1()
        }
    }

    /// Effective occupation N = N_th (cosh^2 r + sinh^2 r) + sinh^2 r.
    pub fn n_eff(&self) -> f64 {
        let (ch, sh) = (self.r.cosh(), self.r.sinh());
        self.n_th() * (ch * ch + sh * sh) + sh * sh
    }

    /// a = sinh(2r)(2 N_th + 1).
    pub fn squeeze_a(&self) -> f64 {
        (2.0 * self.r).sinh() * (2.0 * self.n_th() + 1.0)
    }

    /// Mixing weight (N + 1)/(2N + 1): the thermal-equilibrium GAD weight.
    pub fn equilibrium_p(&self) -> f64 {
        let n = self.n_eff();
        (n + 1.0) / (2.0 * n + 1.0)
    }
}

/// Ohmic spectral density (gamma0/pi) omega e^{-omega/omega_c}.
pub fn ohmic(b: &BathParams, w: f64) -> f64 {
    b.gamma0 / PI * w * (-w / b.omega_c).exp()
}

fn coth_half(w: f64, t: f64) -> f64 {
    if t <= 0.0 {
        1.0
    } else {
        1.0 / (w / (2.0 * t)).tanh()
    }
}

fn oscillation_panels(upper: f64, freq: f64) -> usize {
    let n = (upper * freq / (2.0 * PI)).ceil() as usize + 8;
    n.min(200_000)
}

/// Decoherence exponent gamma(t) of the QND channel,
/// (1/2) int dw I(w)/w^2 coth(w/2T) |(e^{iwt}-1)cosh r + (e^{-iwt}-1) sinh r e^{2iaw}|^2.
pub fn qnd_decoherence_gamma(b: &BathParams, t: f64) -> Result<f64, ChannelError> {
    b.validate()?;
    if t < 0.0 || !t.is_finite() {
        return Err(ChannelError::Argument(format!("t = {t}")));
    }
    if t == 0.0 || b.gamma0 == 0.0 {
        return Ok(0.0);
    }
    let (ch, sh) = (b.r.cosh(), b.r.sinh());
    let f = |w: f64| {
        if w <= 0.0 {
            return 0.0;
        }
        // e^{iwt}-1 = 2i sin(wt/2) e^{iwt/2}, e^{-iwt}-1 = -2i sin(wt/2) e^{-iwt/2}
        let s = (0.5 * w * t).sin();
        let z = C64::from_polar(ch, 0.5 * w * t) - C64::from_polar(sh, 2.0 * b.a * w - 0.5 * w * t);
        let mag = 4.0 * s * s * z.norm_sqr();
        0.5 * b.gamma0 / PI * (-w / b.omega_c).exp() / w * coth_half(w, b.temperature) * mag
    };
    let upper = 40.0 * b.omega_c;
    let freq = t + 2.0 * b.a.abs();
    let (v, _) = integrate(f, 0.0, upper, oscillation_panels(upper, freq), 1e-15, 1e-10, 2_000_000)?;
    Ok(v)
}

fn check_qubit(rho: &DensityMatrix, n: usize) -> Result<(), ChannelError> {
    if rho.dims().len() != n || rho.dims().iter().any(|&d| d != 2) {
        return Err(ChannelError::Dimension(format!("expected {n} qubit(s), got dims {:?}", rho.dims())));
    }
    Ok(())
}

/// Single-qubit QND evolution: rho_01 -> rho_01 e^{-i omega t} e^{-omega^2 gamma(t)}.
pub fn qnd_evolve_qubit(rho0: &DensityMatrix, b: &BathParams, t: f64) -> Result<DensityMatrix, ChannelError> {
    check_qubit(rho0, 1)?;
    let g = qnd_decoherence_gamma(b, t)?;
    Ok(qnd_apply_gamma(rho0, b.omega, t, g))
}

/// Same as [`qnd_evolve_qubit`] with gamma(t) precomputed.
pub fn qnd_apply_gamma(rho0: &DensityMatrix, omega: f64, t: f64, gamma_t: f64) -> DensityMatrix {
    let f = C64::from_polar((-omega * omega * gamma_t).exp(), -omega * t);
    let mut d = rho0.data().clone();
    d[[0, 1]] *= f;
    d[[1, 0]] *= f.conj();
    DensityMatrix::new_unchecked(rho0.dims().to_vec(), d).expect("same shape")
}

/// Kraus representation of a channel.
#[derive(Debug, Clone)]
pub struct KrausChannel {
    ops: Vec<Array2<C64>>,
}

impl KrausChannel {
    /// Validating constructor (square, equal sizes, complete to 1e-12).
    pub fn new(ops: Vec<Array2<C64>>) -> Result<Self, ChannelError> {
        let ch = KrausChannel { ops };
        let n = ch.dim();
        if ch.ops.is_empty() || ch.ops.iter().any(|e| e.dim() != (n, n)) {
            return Err(ChannelError::Dimension("Kraus operators must be square and equal-sized".into()));
        }
        let d = ch.completeness_defect();
        if d > COMPLETENESS_TOL {
            return Err(ChannelError::Incomplete(d));
        }
        Ok(ch)
    }

    pub fn identity(n: usize) -> Self {
        KrausChannel { ops: vec![identity(n)] }
    }

    pub fn ops(&self) -> &[Array2<C64>] {
        &self.ops
    }

    pub fn dim(&self) -> usize {
        self.ops.first().map_or(0, |e| e.nrows())
    }

    /// max |sum_k E_k^dag E_k - I|.
    pub fn completeness_defect(&self) -> f64 {
        let n = self.dim();
        let mut s = Array2::from_elem((n, n), c(0.0));
        for e in &self.ops {
            s = s + dagger(e).dot(e);
        }
        let id = identity(n);
        s.iter().zip(id.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Parameters of the squeezed generalized amplitude damping channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SgadParams {
    pub lambda: f64,
    pub mu: f64,
    pub nu: f64,
    pub p: f64,
    pub xi: f64,
}

const PROB_SLACK: f64 = 1e-12;

impl SgadParams {
    pub fn validate(&self, t: f64) -> Result<(), ChannelError> {
        let ok = |x: f64| x.is_finite() && (-PROB_SLACK..=1.0 + PROB_SLACK).contains(&x);
        let pop = self.p * self.lambda + (1.0 - self.p) * (self.mu + self.nu);
        if !(ok(self.lambda) && ok(self.mu) && ok(self.nu) && ok(self.p)) || pop > 1.0 + PROB_SLACK {
            return Err(ChannelError::UnphysicalSgad { t, lambda: self.lambda, mu: self.mu, nu: self.nu });
        }
        Ok(())
    }

    fn clamped(mut self) -> Self {
        self.lambda = self.lambda.clamp(0.0, 1.0);
        self.mu = self.mu.clamp(0.0, 1.0);
        self.nu = self.nu.clamp(0.0, 1.0);
        self
    }
}

/// lambda, mu, nu of the SGAD channel at time t for mixing weight p.
///
/// At p = 1 the (1-p) denominators are singular; mu and nu are set to 0
/// there (their Kraus operators carry sqrt(1-p) = 0). With N = 0 or r = 0,
/// mu = 0. Returns an error if the resulting set is not a valid
/// probability assignment (this happens for r > 0, p < 1 at early times).
pub fn sgad_params(b: &BathParams, p: f64, t: f64) -> Result<SgadParams, ChannelError> {
    b.validate()?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(ChannelError::Argument(format!("p = {p} outside (0, 1]")));
    }
    if t < 0.0 || !t.is_finite() {
        return Err(ChannelError::Argument(format!("t = {t}")));
    }
    let n = b.n_eff();
    let a = b.squeeze_a();
    let g = b.gamma0;
    let decay = (-g * (2.0 * n + 1.0) * t).exp();
    let (mu, nu) = if p >= 1.0 {
        (0.0, 0.0)
    } else {
        let nu = n / ((1.0 - p) * (2.0 * n + 1.0)) * (1.0 - decay);
        let mu = if n == 0.0 || a == 0.0 || t == 0.0 || g == 0.0 {
            0.0
        } else {
            let num = (0.5 * g * a * t).sinh().powi(2);
            let den = (0.5 * g * (2.0 * n + 1.0) * t).sinh().powi(2);
            (2.0 * n + 1.0) / (2.0 * n * (1.0 - p)) * num / den * (-0.5 * g * (2.0 * n + 1.0) * t).exp()
        };
        (mu, nu)
    };
    let lambda = (1.0 - (1.0 - p) * (mu + nu) - decay) / p;
    let s = SgadParams { lambda, mu, nu, p, xi: 0.0 };
    s.validate(t)?;
    Ok(s.clamped())
}

/// The four SGAD Kraus operators.
pub fn sgad_kraus(s: &SgadParams) -> Result<KrausChannel, ChannelError> {
    s.validate(f64::NAN)?;
    let sp = s.p.sqrt();
    let sq = (1.0 - s.p).max(0.0).sqrt();
    let z = c(0.0);
    let e0 = ndarray::arr2(&[[c(sp * (1.0 - s.lambda).sqrt()), z], [z, c(sp)]]);
    let e1 = ndarray::arr2(&[[z, z], [c(sp * s.lambda.sqrt()), z]]);
    let e2 = ndarray::arr2(&[[c(sq * (1.0 - s.mu).sqrt()), z], [z, c(sq * (1.0 - s.nu).sqrt())]]);
    let e3 = ndarray::arr2(&[[z, c(sq * s.nu.sqrt())], [C64::from_polar(sq * s.mu.sqrt(), -s.xi), z]]);
    KrausChannel::new(vec![e0, e1, e2, e3])
}

/// Amplitude damping with decay probability lambda.
pub fn ad_kraus(lambda: f64) -> Result<KrausChannel, ChannelError> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(ChannelError::Argument(format!("lambda = {lambda} outside [0, 1]")));
    }
    let z = c(0.0);
    let e0 = ndarray::arr2(&[[c((1.0 - lambda).sqrt()), z], [z, c(1.0)]]);
    let e1 = ndarray::arr2(&[[z, z], [c(lambda.sqrt()), z]]);
    KrausChannel::new(vec![e0, e1])
}

/// AD decay probability 1 - e^{-gamma0 t}.
pub fn ad_lambda(gamma0: f64, t: f64) -> f64 {
    -(-gamma0 * t).exp_m1()
}

/// Generalized amplitude damping: SGAD with r = 0 at the bath's
/// equilibrium mixing weight.
pub fn gad_kraus(b: &BathParams, t: f64) -> Result<KrausChannel, ChannelError> {
    let bb = BathParams { r: 0.0, ..*b };
    sgad_kraus(&sgad_params(&bb, bb.equilibrium_p(), t)?)
}

/// Tensor product channel: all cross products of the factor Kraus sets,
/// first factor most significant.
pub fn tensor_channel(factors: &[KrausChannel]) -> Result<KrausChannel, ChannelError> {
    if factors.is_empty() {
        return Err(ChannelError::Dimension("no factors".into()));
    }
    let mut ops = vec![identity(1)];
    for f in factors {
        let mut next = Vec::with_capacity(ops.len() * f.ops.len());
        for a in &ops {
            for e in &f.ops {
                next.push(kron(a, e));
            }
        }
        ops = next;
    }
    KrausChannel::new(ops)
}

/// rho -> sum_k E_k rho E_k^dag.
pub fn apply_channel(ch: &KrausChannel, rho: &DensityMatrix) -> Result<DensityMatrix, ChannelError> {
    if ch.dim() != rho.dim() {
        return Err(ChannelError::Dimension(format!("channel {} vs state {}", ch.dim(), rho.dim())));
    }
    let n = rho.dim();
    let mut out = Array2::from_elem((n, n), c(0.0));
    for e in &ch.ops {
        out = out + e.dot(rho.data()).dot(&dagger(e));
    }
    Ok(DensityMatrix::new_unchecked(rho.dims().to_vec(), out)?)
}

// ---------------------------------------------------------------------------
// Two-qubit QND (localized qubits)

/// Theta and Lambda integrals of the two-qubit QND model,
/// A = int I S cos(w t_s), B = int I C sin(w t_s), with t_s = kr.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QndPhases {
    pub theta: f64,
    pub lambda: f64,
}

impl QndPhases {
    /// Theta_32 (= Theta_01 = -Theta_23).
    pub fn theta_32(&self) -> f64 {
        self.theta
    }
    /// Lambda_32 = -B.
    pub fn lambda_32(&self) -> f64 {
        -self.lambda
    }
    /// Lambda_31 = +B.
    pub fn lambda_31(&self) -> f64 {
        self.lambda
    }
}

pub fn two_qubit_phases(b: &BathParams, kr: f64, t: f64) -> Result<QndPhases, ChannelError> {
    b.validate()?;
    if t == 0.0 || b.gamma0 == 0.0 {
        return Ok(QndPhases { theta: 0.0, lambda: 0.0 });
    }
    let upper = 40.0 * b.omega_c;
    let panels = oscillation_panels(upper, t + kr.abs());
    let s_fn = |w: f64| {
        let x = w * t;
        if x < 1e-3 {
            // (x - sin x)/w^2 ~ t^3 w / 6
            t * t * t * w / 6.0 * (1.0 - x * x / 20.0)
        } else {
            (x - x.sin()) / (w * w)
        }
    };
    let c_fn = |w: f64| {
        let s = (0.5 * w * t).sin();
        2.0 * s * s / (w * w)
    };
    let (theta, _) = integrate(
        |w| if w <= 0.0 { 0.0 } else { ohmic(b, w) * s_fn(w) * (w * kr).cos() },
        0.0,
        upper,
        panels,
        1e-15,
        1e-10,
        2_000_000,
    )?;
    let (lambda, _) = integrate(
        |w| if w <= 0.0 { 0.0 } else { ohmic(b, w) * c_fn(w) * (w * kr).sin() },
        0.0,
        upper,
        panels,
        1e-15,
        1e-10,
        2_000_000,
    )?;
    Ok(QndPhases { theta, lambda })
}

/// Energy-order index of our basis index (our = 3 - energy order).
pub fn energy_index(ours: usize) -> usize {
    3 - ours
}

/// Linear-interpolation table of (t, value) rows.
#[derive(Debug, Clone, PartialEq)]
pub struct InterpTable {
    t: Vec<f64>,
    v: Vec<f64>,
}

impl InterpTable {
    pub fn new(t: Vec<f64>, v: Vec<f64>) -> Result<Self, ChannelError> {
        if t.len() != v.len() || t.is_empty() {
            return Err(ChannelError::Table("need at least one (t, value) row".into()));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ChannelError::Table("times must be strictly increasing".into()));
        }
        Ok(InterpTable { t, v })
    }

    /// Linear interpolation; clamps outside the table range.
    pub fn eval(&self, x: f64) -> f64 {
        let n = self.t.len();
        if x <= self.t[0] {
            return self.v[0];
        }
        if x >= self.t[n - 1] {
            return self.v[n - 1];
        }
        let i = self.t.partition_point(|&s| s <= x) - 1;
        let f = (x - self.t[i]) / (self.t[i + 1] - self.t[i]);
        self.v[i] + f * (self.v[i + 1] - self.v[i])
    }

    pub fn range(&self) -> (f64, f64) {
        (self.t[0], self.t[self.t.len() - 1])
    }
}

fn parse_csv_rows(text: &str) -> Result<(Vec<String>, Vec<Vec<f64>>), ChannelError> {
    let mut header = Vec::new();
    let mut rows = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        match cells.iter().map(|s| s.parse::<f64>()).collect::<Result<Vec<_>, _>>() {
            Ok(v) => rows.push(v),
            Err(_) if rows.is_empty() && header.is_empty() => header = cells.iter().map(|s| s.to_string()).collect(),
            Err(e) => return Err(ChannelError::Table(format!("line {}: {e}", ln + 1))),
        }
    }
    if let Some(w) = rows.first().map(Vec::len) {
        if rows.iter().any(|r| r.len() != w) {
            return Err(ChannelError::Table("ragged rows".into()));
        }
    }
    Ok((header, rows))
}

/// Externally supplied decoherence functional Gamma^sq_{nm}(t).
///
/// CSV with a `t` column followed by either one value column (applied to
/// every coherence) or six columns for the unordered energy-index pairs
/// 01, 02, 03, 12, 13, 23 (in that order).
#[derive(Debug, Clone, PartialEq)]
pub struct GammaTable {
    tables: Vec<InterpTable>,
}

const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

impl GammaTable {
    pub fn uniform(t: Vec<f64>, v: Vec<f64>) -> Result<Self, ChannelError> {
        Ok(GammaTable { tables: vec![InterpTable::new(t, v)?] })
    }

    pub fn parse_csv(text: &str) -> Result<Self, ChannelError> {
        let (_, rows) = parse_csv_rows(text)?;
        let width = rows.first().map_or(0, Vec::len);
        if width != 2 && width != 7 {
            return Err(ChannelError::Table(format!("expected 2 or 7 columns, got {width}")));
        }
        let t: Vec<f64> = rows.iter().map(|r| r[0]).collect();
        let tables = (1..width)
            .map(|k| InterpTable::new(t.clone(), rows.iter().map(|r| r[k]).collect()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GammaTable { tables })
    }

    pub fn from_path(path: &Path) -> Result<Self, ChannelError> {
        let text = std::fs::read_to_string(path).map_err(|e| ChannelError::Table(format!("{}: {e}", path.display())))?;
        Self::parse_csv(&text)
    }

    /// Time range covered by every column.
    pub fn range(&self) -> (f64, f64) {
        self.tables[0].range()
    }

    /// Gamma for the energy-index pair (n, m), n != m.
    pub fn eval(&self, n: usize, m: usize, t: f64) -> f64 {
        if self.tables.len() == 1 {
            return self.tables[0].eval(t);
        }
        let key = (n.min(m), n.max(m));
        let k = PAIRS.iter().position(|&p| p == key).expect("off-diagonal pair");
        self.tables[k].eval(t)
    }
}

/// Source of the two-qubit decoherence functional.
#[derive(Debug, Clone, PartialEq)]
pub enum GammaSq {
    /// (E_n - E_m)^2 gamma(t) with E = omega (m_A + m_B): an approximation.
    Approximate,
    Injected(GammaTable),
}

/// Two-qubit QND evolution of the localized model.
///
/// Off-diagonal elements (energy indices) pick up exp[i(Theta - Lambda)]
/// and exp[-Gamma^sq]; populations are untouched. With `strict` set, the
/// default approximation is refused.
pub fn two_qubit_qnd_evolve(
    rho0: &DensityMatrix,
    b: &BathParams,
    kr: f64,
    t: f64,
    gamma_sq: &GammaSq,
    strict: bool,
) -> Result<DensityMatrix, ChannelError> {
    check_qubit(rho0, 2)?;
    if t < 0.0 {
        return Err(ChannelError::Argument(format!("t = {t}")));
    }
    if strict && matches!(gamma_sq, GammaSq::Approximate) {
        return Err(ChannelError::MissingGamma);
    }
    let ph = two_qubit_phases(b, kr, t)?;
    let g1 = match gamma_sq {
        GammaSq::Approximate => qnd_decoherence_gamma(b, t)?,
        GammaSq::Injected(_) => 0.0,
    };
    // energy index p: bits (b(m1), b(m2)) with b(+1/2) = 1
    let energy = |p: usize| {
        let m1 = if p & 2 != 0 { 0.5 } else { -0.5 };
        let m2 = if p & 1 != 0 { 0.5 } else { -0.5 };
        b.omega * (m1 + m2)
    };
    let plus = ph.theta - ph.lambda_32(); // A + B
    let minus = ph.theta - ph.lambda_31(); // A - B
    let phase = |n: usize, m: usize| -> f64 {
        match (n, m) {
            (3, 2) | (0, 1) => plus,
            (2, 3) | (1, 0) => -plus,
            (3, 1) | (0, 2) => minus,
            (1, 3) | (2, 0) => -minus,
            _ => 0.0,
        }
    };
    let mut d = rho0.data().clone();
    for i in 0..4 {
        for j in 0..4 {
            if i == j {
                continue;
            }
            let (n, m) = (energy_index(i), energy_index(j));
            let gam = match gamma_sq {
                GammaSq::Approximate => (energy(n) - energy(m)).powi(2) * g1,
                GammaSq::Injected(tab) => tab.eval(n, m, t),
            };
            d[[i, j]] *= C64::from_polar((-gam).exp(), phase(n, m));
        }
    }
    Ok(DensityMatrix::new_unchecked(rho0.dims().to_vec(), d)?)
}

// ---------------------------------------------------------------------------
// Lindblad integration

/// One dissipator: rate and jump operator.
#[derive(Debug, Clone)]
pub struct Dissipator {
    pub rate: f64,
    pub op: Array2<C64>,
}

/// Row-major superoperator of the Lindblad generator:
/// vec(A rho B) = (A kron B^T) vec(rho).
pub fn lindblad_superoperator(h: &Array2<C64>, ops: &[Dissipator]) -> Array2<C64> {
    let n = h.nrows();
    let id = identity(n);
    let i = C64::new(0.0, 1.0);
    let mut s = (kron(h, &id) - kron(&id, &h.t().to_owned())) * (-i);
    for d in ops {
        let ldl = dagger(&d.op).dot(&d.op);
        let term = kron(&d.op, &d.op.mapv(|z| z.conj()))
            - kron(&ldl, &id) * c(0.5)
            - kron(&id, &ldl.t().to_owned()) * c(0.5);
        s = s + term * c(d.rate);
    }
    s
}

/// One classical RK4 step of a linear autonomous system is the Taylor
/// polynomial of degree 4 in h S.
fn rk4_step_matrix(s: &Array2<C64>, h: f64) -> Array2<C64> {
    let n = s.nrows();
    let hs = s * c(h);
    let mut out = identity(n);
    let mut term = identity(n);
    for k in 1..=4 {
        term = term.dot(&hs) * c(1.0 / k as f64);
        out = out + &term;
    }
    out
}

fn matrix_power(m: &Array2<C64>, mut e: usize) -> Array2<C64> {
    let mut base = m.clone();
    let mut acc = identity(m.nrows());
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.dot(&base);
        }
        e >>= 1;
        if e > 0 {
            base = base.dot(&base);
        }
    }
    acc
}

/// Lindblad integration with step h = min(0.01, dt/10) per grid interval.
pub fn integrate_lindblad(
    h: &Array2<C64>,
    ops: &[Dissipator],
    rho0: &DensityMatrix,
    t_grid: &[f64],
) -> Result<Vec<DensityMatrix>, ChannelError> {
    integrate_lindblad_with_step(h, ops, rho0, t_grid, 0.01)
}

/// As [`integrate_lindblad`] with an explicit maximum step (needed for
/// stiff generators, e.g. closely spaced atoms with a large dipole shift).
///
/// The generator is time independent, so the fixed-step RK4 update over an
/// interval is applied as a power of the single-step matrix.
pub fn integrate_lindblad_with_step(
    h: &Array2<C64>,
    ops: &[Dissipator],
    rho0: &DensityMatrix,
    t_grid: &[f64],
    max_step: f64,
) -> Result<Vec<DensityMatrix>, ChannelError> {
    let n = rho0.dim();
    if h.dim() != (n, n) || ops.iter().any(|d| d.op.dim() != (n, n)) {
        return Err(ChannelError::Dimension("operator sizes differ from the state".into()));
    }
    let hd = crate::multipole::hermiticity_defect(h);
    if hd > 1e-12 {
        return Err(ChannelError::Argument(format!("Hamiltonian not Hermitian ({hd:.2e})")));
    }
    if t_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ChannelError::Argument("time grid must be increasing".into()));
    }
    if ops.iter().any(|d| d.rate < 0.0 || !d.rate.is_finite()) {
        return Err(ChannelError::Argument("negative dissipation rate".into()));
    }
    if !(max_step > 0.0) {
        return Err(ChannelError::Argument(format!("max_step = {max_step}")));
    }
    let s = lindblad_superoperator(h, ops);
    let mut v = ndarray::Array1::from_iter(rho0.data().iter().copied());
    let mut out = Vec::with_capacity(t_grid.len());
    let mut t = t_grid.first().copied().unwrap_or(0.0);
    let t_start = t;
    for &target in t_grid {
        let span = target - t;
        if span > 0.0 {
            let hmax = max_step.min(span / 10.0);
            let steps = (span / hmax).ceil() as usize;
            let prop = matrix_power(&rk4_step_matrix(&s, span / steps as f64), steps);
            v = prop.dot(&v);
            t = target;
            let tr: C64 = (0..n).map(|i| v[i * n + i]).sum();
            let allowed = 1e-8 * (t - t_start).max(1.0);
            if (tr - 1.0).norm() > allowed {
                return Err(ChannelError::Unstable { t, what: format!("trace drift {:.3e}", (tr - 1.0).norm()) });
            }
            // RK4 keeps the trace of a Lindblad generator exactly, so
            // blow-up shows in the entries instead.
            let big = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if !big.is_finite() || big > 1.0 + 1e-6 {
                return Err(ChannelError::Unstable { t, what: format!("entry magnitude {big:.3e}") });
            }
        }
        let d = Array2::from_shape_vec((n, n), v.to_vec()).expect("n*n entries");
        out.push(DensityMatrix::new_unchecked(rho0.dims().to_vec(), d)?);
    }
    Ok(out)
}

/// Two identical two-level atoms in a common bath (dipoles perpendicular
/// to the separation): collective decay Gamma_12 and dipole-dipole shift
/// Omega_12, thermal/squeezed reservoir with occupation N and squeezing M.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollectiveDipoleModel {
    /// Single-atom spontaneous emission rate.
    pub gamma: f64,
    /// k0 r12.
    pub x: f64,
    pub n_th: f64,
    pub r: f64,
}

impl CollectiveDipoleModel {
    pub fn vacuum(gamma: f64, x: f64) -> Self {
        CollectiveDipoleModel { gamma, x, n_th: 0.0, r: 0.0 }
    }

    pub fn gamma_12(&self) -> f64 {
        let x = self.x;
        1.5 * self.gamma * (x.sin() / x + x.cos() / (x * x) - x.sin() / (x * x * x))
    }

    pub fn omega_12(&self) -> f64 {
        let x = self.x;
        0.75 * self.gamma * (-x.cos() / x + x.sin() / (x * x) + x.cos() / (x * x * x))
    }

    fn occupations(&self) -> (f64, C64) {
        let (ch, sh) = (self.r.cosh(), self.r.sinh());
        let n = self.n_th * (ch * ch + sh * sh) + sh * sh;
        let m = -0.5 * (2.0 * self.r).sinh() * (2.0 * self.n_th + 1.0);
        (n, c(m))
    }

    /// Interaction-picture Hamiltonian Omega_12 (s1+ s2- + s2+ s1-).
    pub fn hamiltonian(&self) -> Array2<C64> {
        let (s1, s2) = lowering_pair();
        let h = dagger(&s1).dot(&s2) + dagger(&s2).dot(&s1);
        h * c(self.omega_12())
    }

    /// Diagonal-form dissipators of the Kossakowski matrix
    /// [[(N+1)G, -M* G], [-M G, N G]] over (s1-, s2-, s1+, s2+).
    pub fn dissipators(&self) -> Vec<Dissipator> {
        let (s1, s2) = lowering_pair();
        let f = [s1.clone(), s2.clone(), dagger(&s1), dagger(&s2)];
        let (n, m) = self.occupations();
        let g = [[self.gamma, self.gamma_12()], [self.gamma_12(), self.gamma]];
        let a = nalgebra::DMatrix::from_fn(4, 4, |i, j| {
            let gij = c(g[i % 2][j % 2]);
            let blk = match (i / 2, j / 2) {
                (0, 0) => c(n + 1.0),
                (0, 1) => -m.conj(),
                (1, 0) => -m,
                _ => c(n),
            };
            let z = blk * gij;
            nalgebra::Complex::new(z.re, z.im)
        });
        let eig = a.symmetric_eigen();
        let mut out = Vec::new();
        for k in 0..4 {
            let rate = eig.eigenvalues[k];
            if rate <= 1e-14 {
                continue;
            }
            let mut op = Array2::from_elem((4, 4), c(0.0));
            for (ai, fa) in f.iter().enumerate() {
                let u = eig.eigenvectors[(ai, k)];
                op = op + fa * C64::new(u.re, u.im);
            }
            out.push(Dissipator { rate, op });
        }
        out
    }

    /// Largest step keeping RK4 well inside its stability region.
    pub fn stable_step(&self) -> f64 {
        let scale = self.omega_12().abs() * 2.0 + self.gamma * 4.0 * (1.0 + self.occupations().0);
        (0.02 / scale.max(1e-12)).min(0.01)
    }

    /// Trajectory from |e>|g> on the given grid.
    pub fn trajectory(&self, t_grid: &[f64]) -> Result<Vec<DensityMatrix>, ChannelError> {
        let mut rho = Array2::from_elem((4, 4), c(0.0));
        rho[[1, 1]] = c(1.0);
        let rho0 = DensityMatrix::new(vec![2, 2], rho)?;
        integrate_lindblad_with_step(&self.hamiltonian(), &self.dissipators(), &rho0, t_grid, self.stable_step())
    }
}

fn lowering_pair() -> (Array2<C64>, Array2<C64>) {
    let z = c(0.0);
    let sm = ndarray::arr2(&[[z, z], [c(1.0), z]]);
    let id = identity(2);
    (kron(&sm, &id), kron(&id, &sm))
}

/// Density-matrix trajectory read from CSV: each row is t followed by the
/// real and imaginary parts of the entries in row-major order.
pub fn read_trajectory_csv(text: &str, dims: &[usize]) -> Result<Vec<(f64, DensityMatrix)>, ChannelError> {
    let n: usize = dims.iter().product();
    let (_, rows) = parse_csv_rows(text)?;
    let mut out = Vec::with_capacity(rows.len());
    for (k, r) in rows.iter().enumerate() {
        if r.len() != 1 + 2 * n * n {
            return Err(ChannelError::Table(format!("row {k}: expected {} columns, got {}", 1 + 2 * n * n, r.len())));
        }
        let d = Array2::from_shape_fn((n, n), |(i, j)| {
            let o = 1 + 2 * (i * n + j);
            C64::new(r[o], r[o + 1])
        });
        out.push((r[0], DensityMatrix::new_unchecked(dims.to_vec(), d)?));
    }
    if out.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(ChannelError::Table("times must be strictly increasing".into()));
    }
    Ok(out)
}

/// Inverse of [`read_trajectory_csv`].
pub fn write_trajectory_csv(traj: &[(f64, DensityMatrix)]) -> String {
    let mut s = String::new();
    if let Some((_, r0)) = traj.first() {
        let n = r0.dim();
        s.push('t');
        for i in 0..n {
            for j in 0..n {
                s.push_str(&format!(",re{i}{j},im{i}{j}"));
            }
        }
        s.push('\n');
    }
    for (t, rho) in traj {
        s.push_str(&format!("{t:?}"));
        for z in rho.data().iter() {
            s.push_str(&format!(",{:?},{:?}", z.re, z.im));
        }
        s.push('\n');
    }
    s
}
