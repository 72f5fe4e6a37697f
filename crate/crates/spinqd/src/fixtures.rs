//! Canonical states and the scenario description read from TOML.
//!
//! Basis conventions: single-particle index 0 is m = +j, multi-qubit
//! index is the binary number with particle 1 most significant, bit 0 =
//! "excited" m = +1/2. So |0> of the GHZ and W kets is m = +1/2.

use std::path::{Path, PathBuf};

use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angular::{factorial, HalfInt};
use crate::channels::BathParams;
use crate::multipole::{DensityMatrix, MultipoleError};

#[derive(Debug, Error)]
pub enum FixtureError {
    #[error(transparent)]
    Multipole(#[from] MultipoleError),
    #[error("amplitudes not normalised: sum |a|^2 = {0}")]
    NotNormalised(f64),
    #[error("invalid scenario: {0}")]
    Invalid(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: PathBuf, msg: String },
    #[error("scenario parse error: {0}")]
    Parse(String),
}

/// Atomic coherent state |alpha, beta> of spin j as a density matrix:
/// amplitude of m is sqrt(C(2j, j+m)) sin^{j+m}(alpha/2) cos^{j-m}(alpha/2) e^{-i(j+m) beta}.
pub fn atomic_coherent_state(j: HalfInt, alpha: f64, beta: f64) -> Result<DensityMatrix, FixtureError> {
    let (s, c) = ((alpha / 2.0).sin(), (alpha / 2.0).cos());
    let n2 = j.twice();
    let psi: Vec<C64> = j
        .projections()
        .map(|m| {
            let up = (j.twice() + m.twice()) / 2;
            let down = n2 - up;
            let binom = factorial(n2).unwrap() / (factorial(up).unwrap() * factorial(down).unwrap());
            C64::from_polar(binom.sqrt() * s.powi(up) * c.powi(down), -(up as f64) * beta)
        })
        .collect();
    Ok(DensityMatrix::pure(vec![j.dim()], &psi)?)
}

/// Wigner-Dicke state |j, m>.
pub fn dicke_state(j: HalfInt, m: HalfInt) -> Result<DensityMatrix, FixtureError> {
    let idx = j.projections().position(|x| x == m).ok_or_else(|| FixtureError::Invalid(format!("m = {m} not in spin {j}")))?;
    let mut psi = vec![C64::new(0.0, 0.0); j.dim()];
    psi[idx] = C64::new(1.0, 0.0);
    Ok(DensityMatrix::pure(vec![j.dim()], &psi)?)
}

/// Complex amplitude written either as a number or as [re, im].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Amp {
    Real(f64),
    Complex([f64; 2]),
}

impl Amp {
    pub fn c64(self) -> C64 {
        match self {
            Amp::Real(x) => C64::new(x, 0.0),
            Amp::Complex([a, b]) => C64::new(a, b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NamedState {
    Singlet,
    Ghz,
    W,
    Spin1 { a_plus: C64, a_zero: C64, a_minus: C64 },
}

pub fn named_state(id: NamedState) -> Result<DensityMatrix, FixtureError> {
    let z = C64::new(0.0, 0.0);
    let r = |x: f64| C64::new(x, 0.0);
    match id {
        NamedState::Singlet => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            Ok(DensityMatrix::pure(vec![2, 2], &[z, r(h), r(-h), z])?)
        }
        NamedState::Ghz => {
            let mut psi = vec![z; 8];
            psi[0] = r(1.0);
            psi[7] = r(1.0);
            Ok(DensityMatrix::pure(vec![2, 2, 2], &psi)?)
        }
        NamedState::W => {
            let mut psi = vec![z; 8];
            for i in [1, 2, 4] {
                psi[i] = r(1.0);
            }
            Ok(DensityMatrix::pure(vec![2, 2, 2], &psi)?)
        }
        NamedState::Spin1 { a_plus, a_zero, a_minus } => {
            let norm = a_plus.norm_sqr() + a_zero.norm_sqr() + a_minus.norm_sqr();
            if (norm - 1.0).abs() > 1e-12 {
                return Err(FixtureError::NotNormalised(norm));
            }
            Ok(DensityMatrix::pure(vec![3], &[a_plus, a_zero, a_minus])?)
        }
    }
}

// ---------------------------------------------------------------------------
// Scenario configuration

/// Initial state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SystemSpec {
    /// Atomic coherent state |alpha, beta> of spin j (default 1/2).
    Coherent {
        #[serde(default = "half")]
        j: f64,
        alpha: f64,
        beta: f64,
    },
    Singlet,
    Ghz,
    W,
    Spin1 { a_plus: Amp, a_zero: Amp, a_minus: Amp },
    MaximallyMixed { dims: Vec<usize> },
    /// Explicit matrix, row-major real (and optional imaginary) parts.
    Density {
        dims: Vec<usize>,
        re: Vec<Vec<f64>>,
        #[serde(default)]
        im: Option<Vec<Vec<f64>>>,
    },
    /// Ground atoms of the Dicke model (the channel fixes the state).
    DickeGround { n_atoms: usize },
}

fn half() -> f64 {
    0.5
}

fn one() -> f64 {
    1.0
}

/// Which qubits a single-qubit channel acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum QubitSelection {
    #[default]
    All,
    First,
}

/// Bath fields shared by several channels (defaults: gamma0 = 0.1,
/// omega_c = 100, T = 0, r = 0, a = 0, omega = 1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSpec {
    #[serde(default = "d_gamma0")]
    pub gamma0: f64,
    #[serde(default = "d_omega_c")]
    pub omega_c: f64,
    #[serde(default, rename = "T")]
    pub temperature: f64,
    #[serde(default)]
    pub r: f64,
    #[serde(default)]
    pub a: f64,
    #[serde(default = "one")]
    pub omega: f64,
}

fn d_gamma0() -> f64 {
    0.1
}
fn d_omega_c() -> f64 {
    100.0
}

impl Default for BathSpec {
    fn default() -> Self {
        let b = BathParams::default();
        BathSpec { gamma0: b.gamma0, omega_c: b.omega_c, temperature: b.temperature, r: b.r, a: b.a, omega: b.omega }
    }
}

impl From<BathSpec> for BathParams {
    fn from(b: BathSpec) -> Self {
        BathParams { gamma0: b.gamma0, omega_c: b.omega_c, temperature: b.temperature, r: b.r, a: b.a, omega: b.omega }
    }
}

/// Noise model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ChannelSpec {
    Identity,
    /// Single-qubit QND dephasing.
    Qnd {
        #[serde(default)]
        bath: BathSpec,
    },
    Sgad {
        #[serde(default)]
        bath: BathSpec,
        #[serde(default = "one")]
        p: f64,
        #[serde(default)]
        xi: f64,
        #[serde(default)]
        qubits: QubitSelection,
    },
    /// Generalized amplitude damping at the bath's equilibrium weight.
    Gad {
        #[serde(default)]
        bath: BathSpec,
        #[serde(default)]
        qubits: QubitSelection,
        /// Per-qubit temperatures overriding `bath.T` (one per qubit).
        #[serde(default)]
        temperatures: Option<Vec<f64>>,
    },
    /// Amplitude damping with lambda = 1 - exp(-gamma0 t).
    Ad {
        #[serde(default = "d_gamma0")]
        gamma0: f64,
        #[serde(default)]
        qubits: QubitSelection,
    },
    TwoQubitQnd {
        #[serde(default)]
        bath: BathSpec,
        kr: f64,
        /// CSV of (t, Gamma) to replace the built-in approximation.
        #[serde(default)]
        gamma_table: Option<PathBuf>,
    },
    Dicke { n_atoms: usize, nbar: f64, g: f64, gamma: f64 },
    /// Two atoms in a common (squeezed) thermal bath, Lindblad integration.
    Collective {
        #[serde(default = "d_collective_gamma")]
        gamma: f64,
        /// k0 r12.
        x: f64,
        #[serde(default, rename = "T")]
        temperature: f64,
        #[serde(default)]
        r: f64,
        /// Atomic transition frequency (sets the thermal occupation).
        #[serde(default = "one")]
        omega: f64,
    },
    /// Externally computed density-matrix trajectory (CSV).
    Trajectory { path: PathBuf },
}

fn d_collective_gamma() -> f64 {
    0.05
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepVar {
    /// Time.
    T,
    Theta,
    Phi,
    /// AD decay probability (AD channels only).
    Lambda,
    /// Bath temperature.
    Temperature,
    /// k0 r12 of the collective two-atom model.
    X,
}

/// What a scenario run computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    /// QD values at the configured angles.
    #[default]
    Qd,
    /// Nonclassical volume of W.
    Volume,
    /// Grid negativity report per kind.
    Negativity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub variable: SweepVar,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
    /// Particles whose angle is swept (theta/phi sweeps); default all.
    #[serde(default)]
    pub particles: Option<Vec<usize>>,
}

impl SweepSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.steps <= 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.steps - 1) as f64;
        (0..self.steps).map(|i| self.start + h * i as f64).collect()
    }
}

/// A complete run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub name: String,
    pub system: SystemSpec,
    #[serde(default = "identity_channel")]
    pub channel: ChannelSpec,
    /// One (theta, phi) per particle.
    #[serde(default)]
    pub angles: Vec<[f64; 2]>,
    /// Time used when the sweep is not over t.
    #[serde(default)]
    pub time: f64,
    pub sweep: SweepSpec,
    /// Distributions to output (default all four).
    #[serde(default = "all_kinds")]
    pub kinds: Vec<String>,
    #[serde(default)]
    pub measure: Measure,
}

fn identity_channel() -> ChannelSpec {
    ChannelSpec::Identity
}

fn all_kinds() -> Vec<String> {
    ["W", "P", "Q", "F"].iter().map(|s| s.to_string()).collect()
}

impl SystemSpec {
    pub fn dims(&self) -> Vec<usize> {
        match self {
            SystemSpec::Coherent { j, .. } => vec![(2.0 * j).round() as usize + 1],
            SystemSpec::Singlet => vec![2, 2],
            SystemSpec::Ghz | SystemSpec::W => vec![2, 2, 2],
            SystemSpec::Spin1 { .. } => vec![3],
            SystemSpec::MaximallyMixed { dims } | SystemSpec::Density { dims, .. } => dims.clone(),
            SystemSpec::DickeGround { n_atoms } => vec![n_atoms + 1],
        }
    }

    pub fn build(&self) -> Result<DensityMatrix, FixtureError> {
        match self {
            SystemSpec::Coherent { j, alpha, beta } => {
                atomic_coherent_state(HalfInt::from_twice((2.0 * j).round() as i32), *alpha, *beta)
            }
            SystemSpec::Singlet => named_state(NamedState::Singlet),
            SystemSpec::Ghz => named_state(NamedState::Ghz),
            SystemSpec::W => named_state(NamedState::W),
            SystemSpec::Spin1 { a_plus, a_zero, a_minus } => {
                named_state(NamedState::Spin1 { a_plus: a_plus.c64(), a_zero: a_zero.c64(), a_minus: a_minus.c64() })
            }
            SystemSpec::MaximallyMixed { dims } => Ok(DensityMatrix::maximally_mixed(dims.clone())),
            SystemSpec::Density { dims, re, im } => {
                let n: usize = dims.iter().product();
                let bad_shape = |m: &Vec<Vec<f64>>| m.len() != n || m.iter().any(|r| r.len() != n);
                if bad_shape(re) || im.as_ref().is_some_and(bad_shape) {
                    return Err(FixtureError::Invalid(format!("density matrix must be {n}x{n}")));
                }
                let data = Array2::from_shape_fn((n, n), |(i, j)| {
                    C64::new(re[i][j], im.as_ref().map_or(0.0, |m| m[i][j]))
                });
                Ok(DensityMatrix::new(dims.clone(), data)?)
            }
            SystemSpec::DickeGround { n_atoms } => {
                dicke_state(HalfInt::from_twice(*n_atoms as i32), HalfInt::from_twice(-(*n_atoms as i32)))
            }
        }
    }
}

fn prob(name: &str, x: f64) -> Result<(), FixtureError> {
    if !(0.0..=1.0).contains(&x) {
        return Err(FixtureError::Invalid(format!("{name} = {x} is not a probability")));
    }
    Ok(())
}

fn bath_ok(b: &BathSpec) -> Result<(), FixtureError> {
    BathParams::from(*b).validate().map_err(|e| FixtureError::Invalid(e.to_string()))
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self, FixtureError> {
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| FixtureError::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, FixtureError> {
        let text = std::fs::read_to_string(path).map_err(|e| FixtureError::Io { path: path.to_path_buf(), msg: e.to_string() })?;
        let mut cfg = Self::from_toml(&text)?;
        // relative data paths are resolved against the scenario file
        if let Some(dir) = path.parent() {
            let fix = |p: &mut PathBuf| {
                if p.is_relative() {
                    *p = dir.join(&*p);
                }
            };
            match &mut cfg.channel {
                ChannelSpec::TwoQubitQnd { gamma_table: Some(p), .. } => fix(p),
                ChannelSpec::Trajectory { path } => fix(path),
                _ => {}
            }
        }
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("serialisable")
    }

    pub fn n_particles(&self) -> usize {
        self.system.dims().len()
    }

    pub fn validate(&self) -> Result<(), FixtureError> {
        let dims = self.system.dims();
        let n = dims.len();
        if dims.iter().any(|&d| d < 2) {
            return Err(FixtureError::Invalid("each particle needs dimension >= 2".into()));
        }
        if let SystemSpec::Coherent { j, alpha, beta } = &self.system {
            if !((2.0 * j).fract() == 0.0 && *j > 0.0) || !alpha.is_finite() || !beta.is_finite() {
                return Err(FixtureError::Invalid(format!("coherent state needs j in {{1/2, 1, ...}} and finite angles (j = {j})")));
            }
        }
        if self.angles.len() != n {
            return Err(FixtureError::Invalid(format!("{} angle pairs given for {n} particle(s)", self.angles.len())));
        }
        if self.angles.iter().flatten().any(|x| !x.is_finite()) {
            return Err(FixtureError::Invalid("angles must be finite".into()));
        }
        if !self.time.is_finite() || self.time < 0.0 {
            return Err(FixtureError::Invalid(format!("time = {}", self.time)));
        }
        let s = &self.sweep;
        if s.steps == 0 || !s.start.is_finite() || !s.stop.is_finite() {
            return Err(FixtureError::Invalid("sweep needs finite bounds and steps >= 1".into()));
        }
        if let Some(ps) = &s.particles {
            if ps.iter().any(|&p| p >= n) {
                return Err(FixtureError::Invalid("sweep particle index out of range".into()));
            }
        }
        for k in &self.kinds {
            k.parse::<crate::qd_eval::QDKind>().map_err(|e| FixtureError::Invalid(e.to_string()))?;
        }
        let qubits = dims.iter().all(|&d| d == 2);
        match &self.channel {
            ChannelSpec::Identity | ChannelSpec::Trajectory { .. } => {}
            ChannelSpec::Qnd { bath } => {
                bath_ok(bath)?;
                if dims != [2] {
                    return Err(FixtureError::Invalid("qnd channel acts on a single qubit".into()));
                }
            }
            ChannelSpec::Sgad { bath, p, .. } => {
                bath_ok(bath)?;
                prob("p", *p)?;
                if *p == 0.0 || !qubits {
                    return Err(FixtureError::Invalid("sgad needs p in (0, 1] and qubits".into()));
                }
            }
            ChannelSpec::Gad { bath, temperatures, .. } => {
                bath_ok(bath)?;
                if !qubits {
                    return Err(FixtureError::Invalid("gad acts on qubits".into()));
                }
                if let Some(ts) = temperatures {
                    if ts.len() != n || ts.iter().any(|&t| !(t >= 0.0 && t.is_finite())) {
                        return Err(FixtureError::Invalid("gad temperatures: one non-negative value per qubit".into()));
                    }
                }
            }
            ChannelSpec::Ad { gamma0, .. } => {
                if *gamma0 < 0.0 || !qubits {
                    return Err(FixtureError::Invalid("ad needs gamma0 >= 0 and qubits".into()));
                }
            }
            ChannelSpec::TwoQubitQnd { bath, kr, .. } => {
                bath_ok(bath)?;
                if dims != [2, 2] || !kr.is_finite() {
                    return Err(FixtureError::Invalid("two-qubit-qnd needs two qubits and finite kr".into()));
                }
            }
            ChannelSpec::Dicke { n_atoms, nbar, g, gamma } => {
                if dims != [n_atoms + 1] || *nbar <= 0.0 || *g <= 0.0 || *gamma < 0.0 {
                    return Err(FixtureError::Invalid("dicke needs system dicke-ground with matching n_atoms, nbar > 0, g > 0, gamma >= 0".into()));
                }
            }
            ChannelSpec::Collective { gamma, x, temperature, r, omega } => {
                if dims != [2, 2] || *gamma < 0.0 || *x <= 0.0 || *temperature < 0.0 || !r.is_finite() || *omega <= 0.0 {
                    return Err(FixtureError::Invalid("collective needs two qubits, gamma >= 0, x > 0, T >= 0, omega > 0".into()));
                }
            }
        }
        if s.variable == SweepVar::Lambda {
            if !matches!(self.channel, ChannelSpec::Ad { .. }) {
                return Err(FixtureError::Invalid("lambda sweeps need an ad channel".into()));
            }
            prob("sweep.start", s.start)?;
            prob("sweep.stop", s.stop)?;
        }
        let lo = s.start.min(s.stop);
        match s.variable {
            SweepVar::T | SweepVar::Temperature if lo < 0.0 => {
                return Err(FixtureError::Invalid("sweep over a negative time or temperature".into()));
            }
            SweepVar::X if lo <= 0.0 || !matches!(self.channel, ChannelSpec::Collective { .. }) => {
                return Err(FixtureError::Invalid("x sweeps need a collective channel and x > 0".into()));
            }
            SweepVar::Temperature
                if matches!(
                    self.channel,
                    ChannelSpec::Identity | ChannelSpec::Ad { .. } | ChannelSpec::Dicke { .. } | ChannelSpec::Trajectory { .. }
                ) =>
            {
                return Err(FixtureError::Invalid("temperature sweep needs a bath channel".into()));
            }
            _ => {}
        }
        Ok(())
    }
}
