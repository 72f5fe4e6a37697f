//! Command-line front end: scenario runs, figure presets, CSV / JSON /
//! gnuplot output.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure.

use std::f64::consts::PI;
use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::Parser;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::angular::SphericalPoint;
use crate::channels::{
    ad_kraus, ad_lambda, apply_channel, gad_kraus, qnd_evolve_qubit, read_trajectory_csv, sgad_kraus, sgad_params,
    tensor_channel, two_qubit_qnd_evolve, BathParams, ChannelError, CollectiveDipoleModel, GammaSq, GammaTable,
    KrausChannel,
};
use crate::dicke::{evolve_dicke, DickeError, DickeParams};
use crate::fixtures::{
    Amp, BathSpec, ChannelSpec, FixtureError, Measure, QubitSelection, ScenarioConfig, SweepSpec, SweepVar, SystemSpec,
};
use crate::measures::{negativity_scan, nonclassical_volume, MeasureError, NegativityReport, QuadratureSpec};
use crate::multipole::{decompose, DensityMatrix, MultipoleError};
use crate::qd_eval::{QDKind, QdError, QdEvaluator};

/// Version tag written into every CSV header.
pub const CSV_VERSION: &str = "spinqd-csv/1";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical error: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<FixtureError> for CliError {
    fn from(e: FixtureError) -> Self {
        match e {
            FixtureError::Multipole(m) => CliError::Numerical(m.to_string()),
            other => CliError::Config(other.to_string()),
        }
    }
}

impl From<ChannelError> for CliError {
    fn from(e: ChannelError) -> Self {
        match e {
            ChannelError::Bath(_) | ChannelError::Argument(_) | ChannelError::Table(_) | ChannelError::MissingGamma => {
                CliError::Config(e.to_string())
            }
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<MeasureError> for CliError {
    fn from(e: MeasureError) -> Self {
        match e {
            MeasureError::Budget { .. } | MeasureError::Spec(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<DickeError> for CliError {
    fn from(e: DickeError) -> Self {
        match e {
            DickeError::Params(_) => CliError::Config(e.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

impl From<QdError> for CliError {
    fn from(e: QdError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<MultipoleError> for CliError {
    fn from(e: MultipoleError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

/// Where the numbers come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Closed evolution formulas implemented in this crate.
    Exact,
    /// A documented stand-in model (default two-qubit Gamma, collective
    /// Lindblad model).
    Approximation,
    /// Externally supplied data.
    Injected,
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Provenance::Exact => "exact",
            Provenance::Approximation => "approximation",
            Provenance::Injected => "injected",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOptions {
    pub quad: QuadratureSpec,
    pub strict: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { quad: QuadratureSpec::default(), strict: false }
    }
}

/// Parse "<n_theta>x<n_phi>".
pub fn parse_quad(s: &str) -> Result<QuadratureSpec, CliError> {
    let bad = || CliError::Config(format!("--quad expects <ntheta>x<nphi>, got {s:?}"));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    let nt = a.trim().parse().map_err(|_| bad())?;
    let np = b.trim().parse().map_err(|_| bad())?;
    QuadratureSpec::new(nt, np).map_err(CliError::from)
}

// ---------------------------------------------------------------------------
// Scenario evaluation

struct Prepared {
    cfg: ScenarioConfig,
    provenance: Provenance,
    initial: DensityMatrix,
    gamma_table: Option<GammaTable>,
    trajectory: Option<Vec<(f64, DensityMatrix)>>,
    /// Collective-model states at the sweep times (time sweeps only).
    collective: Option<Vec<(f64, DensityMatrix)>>,
    warnings: Vec<String>,
}

fn collective_model(gamma: f64, x: f64, temperature: f64, r: f64, omega: f64) -> CollectiveDipoleModel {
    let n_th = if temperature <= 0.0 { 0.0 } else { 1.0 / (omega / temperature).exp_m1() };
    CollectiveDipoleModel { gamma, x, n_th, r }
}

fn prepare(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Prepared, CliError> {
    cfg.validate()?;
    let initial = cfg.system.build()?;
    let mut p = Prepared {
        cfg: cfg.clone(),
        provenance: Provenance::Exact,
        initial,
        gamma_table: None,
        trajectory: None,
        collective: None,
        warnings: Vec::new(),
    };
    match &cfg.channel {
        ChannelSpec::TwoQubitQnd { gamma_table: Some(path), .. } => {
            p.gamma_table = Some(GammaTable::from_path(path)?);
            p.provenance = Provenance::Injected;
        }
        ChannelSpec::TwoQubitQnd { gamma_table: None, .. } => {
            if opts.strict {
                return Err(ChannelError::MissingGamma.into());
            }
            p.provenance = Provenance::Approximation;
            p.warnings.push("two-qubit decoherence functional: built-in (E_n - E_m)^2 gamma(t) approximation".into());
        }
        ChannelSpec::Trajectory { path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read trajectory {}: {e}", path.display())))?;
            p.trajectory = Some(read_trajectory_csv(&text, p.initial.dims())?);
            p.provenance = Provenance::Injected;
        }
        ChannelSpec::Collective { gamma, x, temperature, r, omega } => {
            if opts.strict {
                return Err(CliError::Config(
                    "collective Lindblad model is an approximation; strict mode needs an injected trajectory".into(),
                ));
            }
            p.provenance = Provenance::Approximation;
            p.warnings.push("two-atom bath dynamics: collective Lindblad approximation".into());
            if cfg.sweep.variable == SweepVar::T {
                let mut ts: Vec<f64> = cfg.sweep.values();
                ts.sort_by(f64::total_cmp);
                ts.dedup();
                if ts.first().is_some_and(|&t| t > 0.0) {
                    ts.insert(0, 0.0);
                }
                let model = collective_model(*gamma, *x, *temperature, *r, *omega);
                let traj = model.trajectory(&ts)?;
                p.collective = Some(ts.into_iter().zip(traj).collect());
            }
        }
        ChannelSpec::Dicke { n_atoms, nbar, g, gamma } => {
            let dp = DickeParams { n_atoms: *n_atoms, nbar: *nbar, g: *g, gamma: *gamma };
            p.warnings.extend(dp.regime_warnings());
        }
        _ => {}
    }
    Ok(p)
}

fn interpolate(traj: &[(f64, DensityMatrix)], x: f64) -> Result<DensityMatrix, CliError> {
    let (t0, t1) = (traj[0].0, traj[traj.len() - 1].0);
    if x < t0 - 1e-12 || x > t1 + 1e-12 {
        return Err(CliError::Config(format!("sweep value {x} outside the injected range [{t0}, {t1}]")));
    }
    let i = traj.partition_point(|(t, _)| *t <= x).saturating_sub(1).min(traj.len().saturating_sub(2));
    if traj.len() == 1 {
        return Ok(traj[0].1.clone());
    }
    let (ta, ra) = &traj[i];
    let (tb, rb) = &traj[i + 1];
    let f = ((x - ta) / (tb - ta)).clamp(0.0, 1.0);
    let d = ra.data() * num_complex::Complex64::new(1.0 - f, 0.0) + rb.data() * num_complex::Complex64::new(f, 0.0);
    Ok(DensityMatrix::new_unchecked(ra.dims().to_vec(), d)?)
}

fn per_qubit(n: usize, sel: QubitSelection, make: impl Fn(usize) -> Result<KrausChannel, ChannelError>) -> Result<KrausChannel, ChannelError> {
    let factors = (0..n)
        .map(|i| if sel == QubitSelection::First && i > 0 { Ok(KrausChannel::identity(2)) } else { make(i) })
        .collect::<Result<Vec<_>, _>>()?;
    tensor_channel(&factors)
}

fn with_temperature(b: &BathSpec, t_override: Option<f64>) -> BathParams {
    let mut bp = BathParams::from(*b);
    if let Some(t) = t_override {
        bp.temperature = t;
    }
    bp
}

/// Evaluation angles at sweep value x.
fn angles_at(cfg: &ScenarioConfig, x: f64) -> Vec<SphericalPoint> {
    let var = cfg.sweep.variable;
    let mut angles: Vec<SphericalPoint> = cfg.angles.iter().map(|a| SphericalPoint { theta: a[0], phi: a[1] }).collect();
    if matches!(var, SweepVar::Theta | SweepVar::Phi) {
        let all: Vec<usize> = (0..angles.len()).collect();
        for &i in cfg.sweep.particles.as_ref().unwrap_or(&all) {
            if var == SweepVar::Theta {
                angles[i].theta = x;
            } else {
                angles[i].phi = x;
            }
        }
    }
    angles
}

/// State at sweep value x. `Ok(None)` marks a parameter point outside the
/// channel's physical domain (reported as NaN).
fn state_at(p: &Prepared, x: f64) -> Result<Option<DensityMatrix>, CliError> {
    let cfg = &p.cfg;
    let var = cfg.sweep.variable;
    let t = if var == SweepVar::T { x } else { cfg.time };
    let temp = (var == SweepVar::Temperature).then_some(x);
    let n = p.initial.dims().len();
    let rho = match &cfg.channel {
        ChannelSpec::Identity => p.initial.clone(),
        ChannelSpec::Qnd { bath } => qnd_evolve_qubit(&p.initial, &with_temperature(bath, temp), t)?,
        ChannelSpec::Sgad { bath, p: mix, xi, qubits } => {
            let bp = with_temperature(bath, temp);
            let sp = match sgad_params(&bp, *mix, t) {
                Ok(s) => s,
                Err(ChannelError::UnphysicalSgad { .. }) => return Ok(None),
                Err(e) => return Err(e.into()),
            };
            let sp = crate::channels::SgadParams { xi: *xi, ..sp };
            let ch = per_qubit(n, *qubits, |_| sgad_kraus(&sp))?;
            apply_channel(&ch, &p.initial)?
        }
        ChannelSpec::Gad { bath, qubits, temperatures } => {
            let ch = per_qubit(n, *qubits, |i| {
                let mut bp = with_temperature(bath, temp);
                if let Some(ts) = temperatures {
                    bp.temperature = ts[i];
                }
                gad_kraus(&bp, t)
            })?;
            apply_channel(&ch, &p.initial)?
        }
        ChannelSpec::Ad { gamma0, qubits } => {
            let lambda = if var == SweepVar::Lambda { x } else { ad_lambda(*gamma0, t) };
            let ch = per_qubit(n, *qubits, |_| ad_kraus(lambda))?;
            apply_channel(&ch, &p.initial)?
        }
        ChannelSpec::TwoQubitQnd { bath, kr, .. } => {
            let g = match &p.gamma_table {
                Some(tab) => {
                    let (t0, t1) = tab.range();
                    if t < t0 - 1e-12 || t > t1 + 1e-12 {
                        return Err(CliError::Config(format!("t = {t} outside the injected Gamma range [{t0}, {t1}]")));
                    }
                    GammaSq::Injected(tab.clone())
                }
                None => GammaSq::Approximate,
            };
            two_qubit_qnd_evolve(&p.initial, &with_temperature(bath, temp), *kr, t, &g, false)?
        }
        ChannelSpec::Dicke { n_atoms, nbar, g, gamma } => {
            evolve_dicke(&DickeParams { n_atoms: *n_atoms, nbar: *nbar, g: *g, gamma: *gamma }, t)?
        }
        ChannelSpec::Collective { gamma, x: sep, temperature, r, omega } => {
            if let Some(cache) = &p.collective {
                cache.iter().find(|(s, _)| *s == t).map(|(_, r)| r.clone()).expect("sweep time cached")
            } else {
                let sep = if var == SweepVar::X { x } else { *sep };
                let model = collective_model(*gamma, sep, temp.unwrap_or(*temperature), *r, *omega);
                let ts = if t > 0.0 { vec![0.0, t] } else { vec![0.0] };
                model.trajectory(&ts)?.pop().expect("non-empty")
            }
        }
        ChannelSpec::Trajectory { .. } => interpolate(p.trajectory.as_ref().expect("loaded"), x)?,
    };
    Ok(Some(rho))
}

/// Output table: one row per (series, sweep value).
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub x_name: String,
    /// Per-row evaluation angles (theta1, phi1, ...); empty for delta tables.
    pub angle_columns: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    pub provenance: Provenance,
    pub meta: Vec<(String, String)>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub series: String,
    pub x: f64,
    pub angles: Vec<f64>,
    pub values: Vec<f64>,
}

fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.12e}")
    }
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r.values[k]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("# {CSV_VERSION}\n# provenance: {}\n", self.provenance);
        for (k, v) in &self.meta {
            s.push_str(&format!("# {k}: {v}\n"));
        }
        for w in &self.warnings {
            s.push_str(&format!("# WARNING: {w}\n"));
        }
        let cols: Vec<&str> = self.angle_columns.iter().chain(&self.columns).map(String::as_str).collect();
        s.push_str(&format!("{},series,{}\n", self.x_name, cols.join(",")));
        for r in &self.rows {
            s.push_str(&fmt_num(r.x));
            s.push(',');
            s.push_str(&r.series);
            for v in r.angles.iter().chain(&r.values) {
                s.push(',');
                s.push_str(&fmt_num(*v));
            }
            s.push('\n');
        }
        s
    }

    fn merge(mut self, other: Table) -> Table {
        self.rows.extend(other.rows);
        self.provenance = self.provenance.max(other.provenance);
        for w in other.warnings {
            if !self.warnings.contains(&w) {
                self.warnings.push(w);
            }
        }
        self
    }
}

fn x_name(v: SweepVar) -> &'static str {
    match v {
        SweepVar::T => "t",
        SweepVar::Theta => "theta",
        SweepVar::Phi => "phi",
        SweepVar::Lambda => "lambda",
        SweepVar::Temperature => "T",
        SweepVar::X => "x",
    }
}

/// 64-bit FNV-1a; stable across platforms and toolchains.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn series_label(cfg: &ScenarioConfig) -> String {
    if cfg.name.is_empty() {
        "run".into()
    } else {
        cfg.name.replace(',', ";")
    }
}

fn kinds_of(cfg: &ScenarioConfig) -> Vec<QDKind> {
    cfg.kinds.iter().map(|k| k.parse().expect("validated")).collect()
}

fn base_table(p: &Prepared, columns: Vec<String>, opts: &RunOptions) -> Table {
    Table {
        x_name: x_name(p.cfg.sweep.variable).into(),
        angle_columns: Vec::new(),
        columns,
        rows: Vec::new(),
        provenance: p.provenance,
        meta: vec![
            ("scenario".into(), series_label(&p.cfg)),
            ("scenario_hash".into(), format!("{:016x}", fnv1a(p.cfg.to_toml().as_bytes()))),
            ("quad".into(), format!("{}x{}", opts.quad.n_theta, opts.quad.n_phi)),
        ],
        warnings: p.warnings.clone(),
    }
}

/// QD values along the sweep.
pub fn cmd_eval(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Table, CliError> {
    let p = prepare(cfg, opts)?;
    let kinds = kinds_of(cfg);
    let xs = cfg.sweep.values();
    let rows = xs
        .par_iter()
        .map(|&x| -> Result<Row, CliError> {
            let angles = angles_at(cfg, x);
            let values = match state_at(&p, x)? {
                None => vec![f64::NAN; kinds.len()],
                Some(rho) => {
                    let c = decompose(&rho)?;
                    kinds
                        .iter()
                        .map(|&k| Ok(QdEvaluator::new(k, &c)?.evaluate(&angles)?))
                        .collect::<Result<Vec<f64>, CliError>>()?
                }
            };
            let flat = angles.iter().flat_map(|a| [a.theta, a.phi]).collect();
            Ok(Row { series: series_label(cfg), x, angles: flat, values })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = base_table(&p, kinds.iter().map(|k| k.to_string()).collect(), opts);
    t.angle_columns = (1..=cfg.angles.len()).flat_map(|i| [format!("theta{i}"), format!("phi{i}")]).collect();
    if rows.iter().any(|r| r.values.iter().any(|v| v.is_nan())) {
        t.warnings.push("NaN rows: channel parameters outside [0, 1] at those points".into());
    }
    t.rows = rows;
    Ok(t)
}

/// Nonclassical volume of W along the sweep.
pub fn cmd_volume(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Table, CliError> {
    let p = prepare(cfg, opts)?;
    let xs = cfg.sweep.values();
    let rows = xs
        .par_iter()
        .map(|&x| -> Result<Row, CliError> {
            let v = match state_at(&p, x)? {
                None => f64::NAN,
                Some(rho) => nonclassical_volume(&decompose(&rho)?, &opts.quad)?,
            };
            Ok(Row { series: series_label(cfg), x, angles: Vec::new(), values: vec![v] })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = base_table(&p, vec!["delta".into()], opts);
    t.rows = rows;
    Ok(t)
}

#[derive(Debug, Clone, Serialize)]
pub struct NegativityPoint {
    pub x: f64,
    pub reports: Vec<NegativityReport>,
}

/// Grid negativity reports along the sweep, with delta attached to W.
pub fn cmd_negativity(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Vec<NegativityPoint>, CliError> {
    let p = prepare(cfg, opts)?;
    let kinds = kinds_of(cfg);
    cfg.sweep
        .values()
        .iter()
        .map(|&x| {
            let Some(rho) = state_at(&p, x)? else {
                return Ok(NegativityPoint { x, reports: Vec::new() });
            };
            let c = decompose(&rho)?;
            let reports = kinds
                .iter()
                .map(|&k| {
                    let mut r = negativity_scan(k, &c, &opts.quad)?;
                    if k == QDKind::W {
                        r.nonclassical_volume = Some(nonclassical_volume(&c, &opts.quad)?);
                    }
                    Ok(r)
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(NegativityPoint { x, reports })
        })
        .collect()
}

fn run_table(cfg: &ScenarioConfig, opts: &RunOptions) -> Result<Table, CliError> {
    match cfg.measure {
        Measure::Volume => cmd_volume(cfg, opts),
        _ => cmd_eval(cfg, opts),
    }
}

// ---------------------------------------------------------------------------
// Figure presets

/// A preset bound to the parameters of one published panel.
#[derive(Debug, Clone)]
pub struct FigureDef {
    pub id: &'static str,
    pub title: &'static str,
    /// Depends on bath formulas not implemented here; runs in the
    /// collective-model approximation unless a trajectory is injected.
    pub external: bool,
    pub series: Vec<ScenarioConfig>,
}

fn sweep(variable: SweepVar, start: f64, stop: f64, steps: usize) -> SweepSpec {
    SweepSpec { variable, start, stop, steps, particles: None }
}

fn kinds(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

fn scen(name: &str, system: SystemSpec, channel: ChannelSpec, angles: &[[f64; 2]], sw: SweepSpec, k: &[&str]) -> ScenarioConfig {
    ScenarioConfig {
        name: name.into(),
        system,
        channel,
        angles: angles.to_vec(),
        time: 0.0,
        sweep: sw,
        kinds: kinds(k),
        measure: Measure::Qd,
    }
}

fn volume(mut s: ScenarioConfig) -> ScenarioConfig {
    s.measure = Measure::Volume;
    s.kinds = kinds(&["W"]);
    s
}

fn at_time(mut s: ScenarioConfig, t: f64) -> ScenarioConfig {
    s.time = t;
    s
}

const WPQ: &[&str] = &["W", "P", "Q"];
const WPQF: &[&str] = &["W", "P", "Q", "F"];

fn coherent(alpha: f64, beta: f64) -> SystemSpec {
    SystemSpec::Coherent { j: 0.5, alpha, beta }
}

fn bath(gamma0: f64, t: f64, r: f64) -> BathSpec {
    BathSpec { gamma0, temperature: t, r, ..BathSpec::default() }
}

fn qnd_fig(name: &str, temp: f64, k: &[&str]) -> ScenarioConfig {
    scen(
        name,
        coherent(PI / 2.0, PI / 3.0),
        ChannelSpec::Qnd { bath: bath(0.1, temp, 0.0) },
        &[[PI / 3.0, PI / 4.0]],
        sweep(SweepVar::T, 0.0, 10.0, 201),
        k,
    )
}

fn sgad_fig(name: &str, temp: f64, r: f64, t_max: f64) -> ScenarioConfig {
    scen(
        name,
        coherent(PI / 2.0, PI / 3.0),
        ChannelSpec::Sgad { bath: bath(0.05, temp, r), p: 1.0, xi: 0.0, qubits: QubitSelection::All },
        &[[PI / 2.0, PI / 3.0]],
        sweep(SweepVar::T, 0.0, t_max, 201),
        WPQ,
    )
}

fn collective(x: f64, temp: f64, r: f64) -> ChannelSpec {
    ChannelSpec::Collective { gamma: 0.05, x, temperature: temp, r, omega: 1.0 }
}

fn ground_excited() -> SystemSpec {
    let mut re = vec![vec![0.0; 4]; 4];
    re[1][1] = 1.0;
    SystemSpec::Density { dims: vec![2, 2], re, im: None }
}

const VAC_ANGLES: [[f64; 2]; 2] = [[PI / 8.0, PI / 4.0], [PI / 3.0, PI / 4.0]];
const SQ_ANGLES: [[f64; 2]; 2] = [[PI / 4.0, PI / 6.0], [PI / 8.0, PI / 8.0]];

fn vac_time(x: f64, k: &[&str]) -> ScenarioConfig {
    scen(&format!("r12={x}"), ground_excited(), collective(x, 0.0, 0.0), &VAC_ANGLES, sweep(SweepVar::T, 0.0, 10.0, 201), k)
}

fn vac_space(t: f64, k: &[&str]) -> ScenarioConfig {
    at_time(scen(&format!("t={t}"), ground_excited(), collective(0.05, 0.0, 0.0), &VAC_ANGLES, sweep(SweepVar::X, 0.05, 3.0, 119), k), t)
}

fn ghz_like(name: &str, sys: SystemSpec, angles: &[[f64; 2]], gad: bool) -> ScenarioConfig {
    let channel = if gad {
        ChannelSpec::Gad { bath: bath(0.1, 0.0, 0.0), qubits: QubitSelection::All, temperatures: Some(vec![0.0, 1.0, 2.0]) }
    } else {
        ChannelSpec::Ad { gamma0: 0.1, qubits: QubitSelection::First }
    };
    scen(name, sys, channel, angles, sweep(SweepVar::T, 0.0, 20.0, 201), WPQ)
}

fn dicke_channel() -> ChannelSpec {
    ChannelSpec::Dicke { n_atoms: 4, nbar: 30.0, g: 0.1, gamma: 0.001 }
}

fn spin1() -> SystemSpec {
    let a = Amp::Real(1.0 / 3f64.sqrt());
    SystemSpec::Spin1 { a_plus: a, a_zero: a, a_minus: a }
}

/// Identifiers of every preset.
pub const FIGURE_IDS: &[&str] = &[
    "fig1a", "fig1b", "fig1c", "fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig4a", "fig4b", "fig4c", "fig4d", "fig5a",
    "fig5b", "fig5c", "fig5d", "fig6a", "fig6b", "fig6c", "fig6d", "fig7a", "fig7b", "fig7c", "fig7d", "fig8a", "fig8b",
    "fig8c", "fig8d", "fig9", "fig10a", "fig10b",
];

pub fn figure(id: &str) -> Option<FigureDef> {
    let ghz_angles = [[PI / 2.0, PI / 4.0], [PI / 2.0, PI / 3.0], [PI / 2.0, PI / 6.0]];
    let w_angles = [[PI / 4.0, PI / 8.0], [PI / 6.0, PI / 4.0], [PI / 3.0, PI / 6.0]];
    let temps = [0.0, 1.0, 2.0];
    let (title, external, series): (&'static str, bool, Vec<ScenarioConfig>) = match id {
        "fig1a" => ("QND, single qubit coherent state, T = 1", false, vec![qnd_fig("T=1", 1.0, WPQ)]),
        "fig1b" => ("QND, W vs t at T = 0, 1, 2", false, temps.iter().map(|&t| qnd_fig(&format!("T={t}"), t, &["W"])).collect()),
        "fig1c" => ("QND, P vs t at T = 0, 1, 2", false, temps.iter().map(|&t| qnd_fig(&format!("T={t}"), t, &["P"])).collect()),
        "fig2a" => ("SGAD, T = 3, r = 0", false, vec![sgad_fig("T=3 r=0", 3.0, 0.0, 20.0)]),
        "fig2b" => ("SGAD, T = 3, r = 1", false, vec![sgad_fig("T=3 r=1", 3.0, 1.0, 20.0)]),
        "fig2c" => ("SGAD, T = 10, r = 1", false, vec![sgad_fig("T=10 r=1", 10.0, 1.0, 5.0)]),
        "fig3a" => (
            "two-qubit QND (localized), T = 2",
            false,
            vec![scen(
                "T=2",
                SystemSpec::Density { dims: vec![2, 2], re: vec![vec![0.25; 4]; 4], im: None },
                ChannelSpec::TwoQubitQnd { bath: BathSpec { gamma0: 0.01, temperature: 2.0, r: 0.05, ..BathSpec::default() }, kr: 0.05, gamma_table: None },
                &[[PI / 3.0, PI], [PI / 4.0, PI / 3.0]],
                sweep(SweepVar::T, 0.0, 10.0, 201),
                WPQ,
            )],
        ),
        "fig3b" => (
            "EPR singlet under AD on both qubits",
            false,
            vec![scen(
                "singlet",
                SystemSpec::Singlet,
                ChannelSpec::Ad { gamma0: 0.1, qubits: QubitSelection::All },
                &[[PI / 2.0, PI / 4.0], [PI / 2.0, PI / 3.0]],
                sweep(SweepVar::T, 0.0, 40.0, 201),
                WPQ,
            )],
        ),
        "fig4a" => ("vacuum bath, W vs t", true, vec![vac_time(0.05, &["W"]), vac_time(2.0, &["W"])]),
        "fig4b" => ("vacuum bath, P vs t", true, vec![vac_time(0.05, &["P"]), vac_time(2.0, &["P"])]),
        "fig4c" => ("vacuum bath, Q vs t", true, vec![vac_time(0.05, &["Q"]), vac_time(2.0, &["Q"])]),
        "fig4d" => ("vacuum bath, all QDs, r12 = 0.05", true, vec![vac_time(0.05, WPQ)]),
        "fig5a" => ("vacuum bath, W vs spacing", true, vec![vac_space(1.0, &["W"]), vac_space(5.0, &["W"])]),
        "fig5b" => ("vacuum bath, P vs spacing", true, vec![vac_space(1.0, &["P"]), vac_space(5.0, &["P"])]),
        "fig5c" => ("vacuum bath, all QDs vs spacing, t = 1", true, vec![vac_space(1.0, WPQ)]),
        "fig5d" => ("vacuum bath, all QDs vs spacing, t = 5", true, vec![vac_space(5.0, WPQ)]),
        "fig6a" => (
            "squeezed thermal bath vs T, r = 0.5, kr12 = 0.08",
            true,
            vec![at_time(scen("r=0.5", ground_excited(), collective(0.08, 1.0, 0.5), &SQ_ANGLES, sweep(SweepVar::Temperature, 0.0, 5.0, 101), WPQ), 2.0)],
        ),
        "fig6b" => (
            "squeezed thermal bath vs T, r = -0.5, kr12 = 1.5",
            true,
            vec![at_time(scen("r=-0.5", ground_excited(), collective(1.5, 1.0, -0.5), &SQ_ANGLES, sweep(SweepVar::Temperature, 0.0, 5.0, 101), WPQ), 2.0)],
        ),
        "fig6c" => (
            "squeezed thermal bath vs t, T = 1, r = 0.1",
            true,
            vec![scen("T=1", ground_excited(), collective(0.05, 1.0, 0.1), &SQ_ANGLES, sweep(SweepVar::T, 0.0, 10.0, 201), WPQ)],
        ),
        "fig6d" => (
            "squeezed thermal bath vs spacing, T = 1, t = 2, r = 0.5",
            true,
            vec![at_time(scen("T=1", ground_excited(), collective(0.05, 1.0, 0.5), &SQ_ANGLES, sweep(SweepVar::X, 0.05, 3.0, 119), WPQ), 2.0)],
        ),
        "fig7a" => ("GHZ, AD on the first qubit", false, vec![ghz_like("ghz-ad", SystemSpec::Ghz, &ghz_angles, false)]),
        "fig7b" => ("GHZ, GAD at T = 0, 1, 2 on qubits 1, 2, 3", false, vec![ghz_like("ghz-gad", SystemSpec::Ghz, &ghz_angles, true)]),
        "fig7c" => ("W state, AD on the first qubit", false, vec![ghz_like("w-ad", SystemSpec::W, &w_angles, false)]),
        "fig7d" => ("W state, GAD at T = 0, 1, 2 on qubits 1, 2, 3", false, vec![ghz_like("w-gad", SystemSpec::W, &w_angles, true)]),
        "fig8a" => (
            "nonclassical volume, QND, T = 0, 1, 2",
            false,
            temps.iter().map(|&t| volume(qnd_fig(&format!("T={t}"), t, &["W"]))).map(|mut s| {
                s.sweep.steps = 101;
                s
            }).collect(),
        ),
        "fig8b" => (
            "nonclassical volume, AD / GAD (T = 3) / SGAD (T = 3, r = 1)",
            false,
            vec![
                volume(sgad_fig("AD", 0.0, 0.0, 20.0)),
                volume(scen(
                    "GAD T=3",
                    coherent(PI / 2.0, PI / 3.0),
                    ChannelSpec::Gad { bath: bath(0.05, 3.0, 0.0), qubits: QubitSelection::All, temperatures: None },
                    &[[PI / 2.0, PI / 3.0]],
                    sweep(SweepVar::T, 0.0, 20.0, 201),
                    &["W"],
                )),
                volume(sgad_fig("SGAD T=3 r=1", 3.0, 1.0, 20.0)),
            ]
            .into_iter()
            .map(|mut s| {
                s.sweep.steps = 101;
                s
            })
            .collect(),
        ),
        "fig8c" => (
            "nonclassical volume, vacuum bath, r12 = 0.05 and 2.0",
            true,
            [0.05, 2.0]
                .iter()
                .map(|&x| {
                    let mut s = volume(vac_time(x, &["W"]));
                    s.sweep.steps = 21;
                    s
                })
                .collect(),
        ),
        "fig8d" => (
            "nonclassical volume, four-atom Dicke model",
            false,
            vec![volume(scen("N=4", SystemSpec::DickeGround { n_atoms: 4 }, dicke_channel(), &[[PI / 3.0, PI / 2.0]], sweep(SweepVar::T, 0.0, 200.0, 201), &["W"]))],
        ),
        "fig9" => (
            "four-atom Dicke model, theta = pi/3, phi = pi/2",
            false,
            vec![scen("N=4", SystemSpec::DickeGround { n_atoms: 4 }, dicke_channel(), &[[PI / 3.0, PI / 2.0]], sweep(SweepVar::T, 0.0, 200.0, 401), WPQF)],
        ),
        "fig10a" => (
            "spin-1, a+ = a0 = a- = 1/sqrt3, phi = 2pi/3",
            false,
            vec![scen("phi=2pi/3", spin1(), ChannelSpec::Identity, &[[0.0, 2.0 * PI / 3.0]], sweep(SweepVar::Theta, 0.0, PI, 181), WPQF)],
        ),
        "fig10b" => (
            "spin-1, a+ = a0 = a- = 1/sqrt3, theta = pi/4",
            false,
            vec![scen("theta=pi/4", spin1(), ChannelSpec::Identity, &[[PI / 4.0, 0.0]], sweep(SweepVar::Phi, 0.0, 2.0 * PI, 181), WPQF)],
        ),
        _ => return None,
    };
    let id = FIGURE_IDS.iter().copied().find(|f| *f == id)?;
    Some(FigureDef { id, title, external, series })
}

/// Run a figure preset. `inject` replaces the channel of the i-th series
/// with the i-th trajectory file (whose first column is the sweep value).
pub fn cmd_figure(id: &str, opts: &RunOptions, inject: &[PathBuf]) -> Result<(FigureDef, Table), CliError> {
    let mut def = figure(id).ok_or_else(|| CliError::Config(format!("unknown figure {id:?} (known: {})", FIGURE_IDS.join(", "))))?;
    if !inject.is_empty() {
        if !def.external {
            return Err(CliError::Config(format!("{id} is computed exactly; injection applies to external-bath figures only")));
        }
        if inject.len() != def.series.len() {
            return Err(CliError::Config(format!("{id} has {} series but {} trajectory file(s) were given", def.series.len(), inject.len())));
        }
        for (s, path) in def.series.iter_mut().zip(inject) {
            s.channel = ChannelSpec::Trajectory { path: path.clone() };
        }
    } else if def.external && opts.strict {
        return Err(CliError::Config(format!("{id} depends on external bath formulas: strict mode needs --inject")));
    }
    let mut table: Option<Table> = None;
    for s in &def.series {
        let t = run_table(s, opts)?;
        table = Some(match table {
            None => t,
            Some(acc) => acc.merge(t),
        });
    }
    let mut table = table.expect("at least one series");
    let hash = fnv1a(def.series.iter().map(|s| s.to_toml()).collect::<Vec<_>>().join("\n").as_bytes());
    table.meta = vec![
        ("figure".into(), id.into()),
        ("title".into(), def.title.into()),
        ("scenario_hash".into(), format!("{hash:016x}")),
        ("quad".into(), format!("{}x{}", opts.quad.n_theta, opts.quad.n_phi)),
    ];
    if def.external && table.provenance == Provenance::Approximation {
        table.warnings.insert(0, "APPROXIMATION: exact bath formulas for this figure are external; showing the collective Lindblad model".into());
    }
    Ok((def, table))
}

/// gnuplot script plotting every (series, column) pair of a table.
pub fn gnuplot_script(stem: &str, title: &str, table: &Table) -> String {
    let mut series: Vec<&str> = Vec::new();
    for r in &table.rows {
        if !series.contains(&r.series.as_str()) {
            series.push(&r.series);
        }
    }
    let mut s = String::new();
    s.push_str("set datafile separator ','\nset datafile commentschars '#'\nset key autotitle columnheader\n");
    s.push_str(&format!("set title '{} [{}]'\n", title.replace('\'', ""), table.provenance));
    s.push_str(&format!("set xlabel '{}'\nset grid\n", table.x_name));
    s.push_str(&format!("set terminal pngcairo size 900,600\nset output '{stem}.png'\n"));
    let mut parts = Vec::new();
    for ser in &series {
        for (k, col) in table.columns.iter().enumerate() {
            let label = if series.len() > 1 { format!("{col} {ser}") } else { col.clone() };
            parts.push(format!(
                "'{stem}.csv' using 1:(strcol(2) eq '{ser}' ? column({}) : NaN) with lines title '{label}'",
                k + 3 + table.angle_columns.len()
            ));
        }
    }
    s.push_str("plot ");
    s.push_str(&parts.join(", \\\n     "));
    s.push('\n');
    s
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

/// Files written by a run.
#[derive(Debug, Clone, Default)]
pub struct Written {
    pub files: Vec<PathBuf>,
}

pub fn write_table(out: &Path, stem: &str, title: &str, table: &Table) -> Result<Written, CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::Config(format!("cannot create {}: {e}", out.display())))?;
    let csv = out.join(format!("{stem}.csv"));
    let gp = out.join(format!("{stem}.gp"));
    write(&csv, &table.to_csv())?;
    write(&gp, &gnuplot_script(stem, title, table))?;
    Ok(Written { files: vec![csv, gp] })
}

/// Run one scenario file and write its outputs.
pub fn run_scenario(cfg: &ScenarioConfig, opts: &RunOptions, out: &Path) -> Result<Written, CliError> {
    let stem = if cfg.name.is_empty() { "scenario".to_string() } else { cfg.name.replace(|c: char| !c.is_ascii_alphanumeric() && c != '-' && c != '_', "_") };
    match cfg.measure {
        Measure::Negativity => {
            let pts = cmd_negativity(cfg, opts)?;
            std::fs::create_dir_all(out).map_err(|e| CliError::Config(e.to_string()))?;
            let path = out.join(format!("{stem}.negativity.json"));
            write(&path, &serde_json::to_string_pretty(&pts).expect("plain data"))?;
            Ok(Written { files: vec![path] })
        }
        Measure::Volume => {
            let t = cmd_volume(cfg, opts)?;
            let mut w = write_table(out, &stem, "nonclassical volume", &t)?;
            let json = out.join(format!("{stem}.volume.json"));
            #[derive(Serialize)]
            struct V<'a> {
                provenance: Provenance,
                x_name: &'a str,
                points: Vec<(f64, f64)>,
            }
            let v = V { provenance: t.provenance, x_name: &t.x_name, points: t.rows.iter().map(|r| (r.x, r.values[0])).collect() };
            write(&json, &serde_json::to_string_pretty(&v).expect("plain data"))?;
            w.files.push(json);
            Ok(w)
        }
        Measure::Qd => {
            let t = cmd_eval(cfg, opts)?;
            write_table(out, &stem, &cfg.name, &t)
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "spinqd", about = "Spin quasiprobability distributions under open-system noise")]
pub struct Args {
    /// Scenario file (TOML).
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Figure preset id (see --list-figures).
    #[arg(long)]
    pub figure: Option<String>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
    /// Sphere quadrature <ntheta>x<nphi>.
    #[arg(long)]
    pub quad: Option<String>,
    /// Refuse approximations (default two-qubit Gamma, collective model).
    #[arg(long)]
    pub strict: bool,
    /// Worker threads.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Trajectory CSV for an external-bath figure (repeat per series).
    #[arg(long)]
    pub inject: Vec<PathBuf>,
    /// Print the figure ids and exit.
    #[arg(long)]
    pub list_figures: bool,
}

fn run(args: Args) -> Result<Vec<String>, CliError> {
    if let Some(n) = args.threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        // a second call (tests, repeated runs in-process) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let quad = match &args.quad {
        Some(q) => parse_quad(q)?,
        None => QuadratureSpec::default(),
    };
    let opts = RunOptions { quad, strict: args.strict };
    let mut log = Vec::new();
    if args.list_figures {
        for id in FIGURE_IDS {
            let f = figure(id).expect("listed");
            log.push(format!("{id:7} {}{}", f.title, if f.external { "  [external bath]" } else { "" }));
        }
        return Ok(log);
    }
    match (&args.scenario, &args.figure) {
        (Some(_), Some(_)) => Err(CliError::Config("give either --scenario or --figure".into())),
        (None, None) => Err(CliError::Config("nothing to do: give --scenario <file> or --figure <id>".into())),
        (Some(path), None) => {
            if !args.inject.is_empty() {
                return Err(CliError::Config("--inject applies to figures; use a trajectory channel in the scenario".into()));
            }
            let cfg = ScenarioConfig::from_path(path)?;
            let w = run_scenario(&cfg, &opts, &args.out)?;
            log.extend(w.files.iter().map(|f| format!("wrote {}", f.display())));
            Ok(log)
        }
        (None, Some(id)) => {
            let (def, table) = cmd_figure(id, &opts, &args.inject)?;
            for w in &table.warnings {
                log.push(format!("warning: {w}"));
            }
            let w = write_table(&args.out, def.id, def.title, &table)?;
            let manifest = args.out.join(format!("{}.manifest.toml", def.id));
            let mut m = format!(
                "# manifest for {}\n# quad = \"{}x{}\"\n# strict = {}\n# provenance = \"{}\"\n",
                def.id, opts.quad.n_theta, opts.quad.n_phi, opts.strict, table.provenance
            );
            for (i, s) in def.series.iter().enumerate() {
                m.push_str(&format!("\n# --- series {i} ---\n{}", s.to_toml()));
            }
            write(&manifest, &m)?;
            log.extend(w.files.iter().chain(std::iter::once(&manifest)).map(|f| format!("wrote {}", f.display())));
            Ok(log)
        }
    }
}

/// Entry point used by the binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(args) {
        Ok(log) => {
            for l in log {
                println!("{l}");
            }
            0
        }
        Err(e) => {
            eprintln!("spinqd: {e}");
            e.exit_code()
        }
    }
}
