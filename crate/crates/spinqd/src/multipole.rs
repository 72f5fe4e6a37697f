//! Multipole operators T_KQ, density matrices and their multipole
//! coefficients.
//!
//! Single-particle basis order is m = j, j-1, ..., -j. Multi-particle
//! spaces are Kronecker products with particle 1 the most significant
//! index, so for qubits index 0 is |+1/2, +1/2, ...>.

use std::collections::BTreeMap;

use ndarray::{Array2, Axis};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angular::{wigner_3j, AngularError, HalfInt};

#[derive(Debug, Error)]
pub enum MultipoleError {
    #[error(transparent)]
    Angular(#[from] AngularError),
    #[error("rank K = {k} exceeds 2j = {twice_j}")]
    RankOutOfRange { k: u32, twice_j: i32 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("trace is {0} (expected 1)")]
    Trace(C64),
    #[error("matrix has negative eigenvalue {0:.3e}")]
    NotPositive(f64),
    #[error("coefficients violate conj(c[K,Q]) = (-1)^Q c[K,-Q] (max deviation {0:.3e})")]
    Conjugation(f64),
}

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const EIGEN_TOL: f64 = 1e-10;

fn czero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Kronecker product of two complex matrices.
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ar, ac) = a.dim();
    let (br, bc) = b.dim();
    let mut out = Array2::from_elem((ar * br, ac * bc), czero());
    for ((i, j), &x) in a.indexed_iter() {
        if x == czero() {
            continue;
        }
        for ((k, l), &y) in b.indexed_iter() {
            out[[i * br + k, j * bc + l]] = x * y;
        }
    }
    out
}

/// Kronecker product of a list of matrices (empty list gives [[1]]).
pub fn kron_all<'a, I: IntoIterator<Item = &'a Array2<C64>>>(ms: I) -> Array2<C64> {
    let mut acc = Array2::from_elem((1, 1), C64::new(1.0, 0.0));
    for m in ms {
        acc = kron(&acc, m);
    }
    acc
}

pub fn dagger(a: &Array2<C64>) -> Array2<C64> {
    a.t().mapv(|z| z.conj())
}

/// Largest |a_ij - conj(a_ji)|.
pub fn hermiticity_defect(a: &Array2<C64>) -> f64 {
    let n = a.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            worst = worst.max((a[[i, j]] - a[[j, i]].conj()).norm());
        }
    }
    worst
}

pub fn trace(a: &Array2<C64>) -> C64 {
    a.diag().iter().sum()
}

/// Eigenvalues of a Hermitian matrix (ascending).
pub fn hermitian_eigenvalues(a: &Array2<C64>) -> Vec<f64> {
    let n = a.nrows();
    let m = nalgebra::DMatrix::from_fn(n, n, |i, j| {
        let z = 0.5 * (a[[i, j]] + a[[j, i]].conj());
        nalgebra::Complex::new(z.re, z.im)
    });
    let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// A Hermitian, unit-trace, positive semidefinite matrix over a product of
/// spin spaces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    dims: Vec<usize>,
    data: Array2<C64>,
}

impl DensityMatrix {
    /// Validating constructor.
    pub fn new(dims: Vec<usize>, data: Array2<C64>) -> Result<Self, MultipoleError> {
        let rho = Self::new_unchecked(dims, data)?;
        rho.validate()?;
        Ok(rho)
    }

    /// Checks only the shape; used for intermediate or externally supplied
    /// matrices whose physicality is reported separately.
    pub fn new_unchecked(dims: Vec<usize>, data: Array2<C64>) -> Result<Self, MultipoleError> {
        let n: usize = dims.iter().product();
        if data.nrows() != n || data.ncols() != n {
            return Err(MultipoleError::Dimension(format!(
                "dims {:?} need a {n}x{n} matrix, got {:?}",
                dims,
                data.dim()
            )));
        }
        Ok(DensityMatrix { dims, data })
    }

    /// Product of spin spaces, one per spin.
    pub fn for_spins(spins: &[HalfInt], data: Array2<C64>) -> Result<Self, MultipoleError> {
        Self::new(spins.iter().map(|s| s.dim()).collect(), data)
    }

    /// Pure state |psi><psi| (psi normalised here).
    pub fn pure(dims: Vec<usize>, psi: &[C64]) -> Result<Self, MultipoleError> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let n = psi.len();
        let data = Array2::from_shape_fn((n, n), |(i, j)| psi[i] * psi[j].conj() / (norm * norm));
        Self::new(dims, data)
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Self {
        let n: usize = dims.iter().product();
        let data = Array2::from_shape_fn((n, n), |(i, j)| {
            if i == j {
                C64::new(1.0 / n as f64, 0.0)
            } else {
                czero()
            }
        });
        DensityMatrix { dims, data }
    }

    pub fn validate(&self) -> Result<(), MultipoleError> {
        let h = hermiticity_defect(&self.data);
        if h > HERMITIAN_TOL {
            return Err(MultipoleError::NotHermitian(h));
        }
        let tr = trace(&self.data);
        if (tr - 1.0).norm() > TRACE_TOL {
            return Err(MultipoleError::Trace(tr));
        }
        let min = hermitian_eigenvalues(&self.data)[0];
        if min < -EIGEN_TOL {
            return Err(MultipoleError::NotPositive(min));
        }
        Ok(())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.data.nrows()
    }

    pub fn data(&self) -> &Array2<C64> {
        &self.data
    }

    pub fn into_data(self) -> Array2<C64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[[i, j]]
    }

    /// Spins implied by the per-particle dimensions.
    pub fn spins(&self) -> Vec<HalfInt> {
        self.dims.iter().map(|&d| HalfInt::from_twice(d as i32 - 1)).collect()
    }

    /// Reverse the basis order of every particle (m ascending <-> descending).
    pub fn reversed(&self) -> DensityMatrix {
        let mut d = self.data.clone();
        d.invert_axis(Axis(0));
        d.invert_axis(Axis(1));
        DensityMatrix { dims: self.dims.clone(), data: d }
    }

    /// Largest entrywise |a - b|.
    pub fn max_abs_diff(&self, other: &DensityMatrix) -> f64 {
        self.data
            .iter()
            .zip(other.data.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Which operator set the coefficients refer to.
///
/// `Standard` is Eq. (3) verbatim. `Transposed` uses T_KQ^T, which is the
/// matrix set printed for spin-1/2 in the single-qubit sections; its
/// distributions are those of `Standard` mirrored in phi.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum OperatorConvention {
    #[default]
    Standard,
    Transposed,
}

impl OperatorConvention {
    /// Convention reproducing the printed closed forms for a given spin:
    /// the transposed set for spin-1/2, Eq. (3) otherwise.
    pub fn default_for(j: HalfInt) -> Self {
        if j.twice() == 1 {
            OperatorConvention::Transposed
        } else {
            OperatorConvention::Standard
        }
    }
}

/// Index of (K, Q) in a flat per-particle table: K^2 + K + Q.
pub fn kq_index(k: u32, q: i32) -> usize {
    ((k * k + k) as i32 + q) as usize
}

/// T_KQ for spin j, Eq. (3), rows/columns ordered m = j..-j.
pub fn multipole_operator(j: HalfInt, k: u32, q: i32) -> Result<Array2<C64>, MultipoleError> {
    if k as i32 > j.twice() {
        return Err(MultipoleError::RankOutOfRange { k, twice_j: j.twice() });
    }
    if q.unsigned_abs() > k {
        return Err(AngularError::QOutOfRange { k, q }.into());
    }
    let n = j.dim();
    let ms: Vec<HalfInt> = j.projections().collect();
    let kk = HalfInt::int(k as i32);
    let qq = HalfInt::int(q);
    let s = ((2 * k + 1) as f64).sqrt();
    let mut t = Array2::from_elem((n, n), czero());
    for (a, &m) in ms.iter().enumerate() {
        let sign = if ((j.twice() - m.twice()) / 2) % 2 == 0 { 1.0 } else { -1.0 };
        for (b, &mp) in ms.iter().enumerate() {
            let w = wigner_3j(j, kk, j, -m, qq, mp)?;
            t[[a, b]] = C64::new(sign * s * w, 0.0);
        }
    }
    Ok(t)
}

/// T_KQ in the requested convention.
pub fn multipole_operator_conv(
    j: HalfInt,
    k: u32,
    q: i32,
    conv: OperatorConvention,
) -> Result<Array2<C64>, MultipoleError> {
    let t = multipole_operator(j, k, q)?;
    Ok(match conv {
        OperatorConvention::Standard => t,
        OperatorConvention::Transposed => t.t().to_owned(),
    })
}

/// Every (K, Q) pair for spin j in table order.
pub fn kq_pairs(j: HalfInt) -> Vec<(u32, i32)> {
    let mut v = Vec::new();
    for k in 0..=(j.twice() as u32) {
        for q in -(k as i32)..=(k as i32) {
            v.push((k, q));
        }
    }
    v
}

/// Multipole coefficients rho_{K1 Q1 ... Kn Qn} = Tr(rho  T1^dag ... Tn^dag).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultipoleCoeffs {
    pub spins: Vec<HalfInt>,
    pub convention: OperatorConvention,
    pub coeffs: BTreeMap<Vec<(u32, i32)>, C64>,
}

impl MultipoleCoeffs {
    pub fn get(&self, key: &[(u32, i32)]) -> C64 {
        self.coeffs.get(key).copied().unwrap_or_else(czero)
    }

    pub fn n_particles(&self) -> usize {
        self.spins.len()
    }

    /// Largest deviation from conj(c[K,Q]) = prod (-1)^Qi c[K,-Q].
    pub fn conjugation_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (key, &c) in &self.coeffs {
            let mirrored: Vec<(u32, i32)> = key.iter().map(|&(k, q)| (k, -q)).collect();
            let sign = if key.iter().map(|&(_, q)| q).sum::<i32>().rem_euclid(2) == 0 {
                1.0
            } else {
                -1.0
            };
            worst = worst.max((c.conj() - sign * self.get(&mirrored)).norm());
        }
        worst
    }
}

/// Per-particle operator tables for a list of spins.
fn operator_tables(
    spins: &[HalfInt],
    conv: OperatorConvention,
) -> Result<Vec<Vec<((u32, i32), Array2<C64>)>>, MultipoleError> {
    spins
        .iter()
        .map(|&j| {
            kq_pairs(j)
                .into_iter()
                .map(|(k, q)| Ok(((k, q), multipole_operator_conv(j, k, q, conv)?)))
                .collect()
        })
        .collect()
}

fn cartesian(lens: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for &n in lens {
        let mut next = Vec::with_capacity(out.len() * n);
        for prefix in &out {
            for i in 0..n {
                let mut p = prefix.clone();
                p.push(i);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// Decompose with the convention the printed closed forms use for these
/// spins (see [`OperatorConvention::default_for`]).
pub fn decompose(rho: &DensityMatrix) -> Result<MultipoleCoeffs, MultipoleError> {
    let spins = rho.spins();
    let conv = OperatorConvention::default_for(spins[0]);
    decompose_with(rho, conv)
}

/// coeffs[K,Q] = Tr(rho * (T_K1Q1 (x) ... (x) T_KnQn)^dag).
pub fn decompose_with(rho: &DensityMatrix, conv: OperatorConvention) -> Result<MultipoleCoeffs, MultipoleError> {
    let spins = rho.spins();
    if spins.iter().any(|s| s.twice() < 0) {
        return Err(MultipoleError::Dimension("empty particle space".into()));
    }
    let tables = operator_tables(&spins, conv)?;
    let lens: Vec<usize> = tables.iter().map(|t| t.len()).collect();
    let data = rho.data();
    let mut coeffs = BTreeMap::new();
    for combo in cartesian(&lens) {
        let ops: Vec<&Array2<C64>> = combo.iter().zip(&tables).map(|(&i, t)| &t[i].1).collect();
        let op = kron_all(ops);
        // Tr(rho A^dag) = sum_ab rho_ab conj(A_ab)
        let mut c = czero();
        for (r, a) in data.iter().zip(op.iter()) {
            c += r * a.conj();
        }
        let key: Vec<(u32, i32)> = combo.iter().zip(&tables).map(|(&i, t)| t[i].0).collect();
        coeffs.insert(key, c);
    }
    Ok(MultipoleCoeffs { spins, convention: conv, coeffs })
}

/// rho = sum coeffs[K,Q] T_K1Q1 (x) ... (x) T_KnQn.
pub fn reconstruct(c: &MultipoleCoeffs) -> Result<DensityMatrix, MultipoleError> {
    let defect = c.conjugation_defect();
    let scale = c.coeffs.values().map(|z| z.norm()).fold(1.0, f64::max);
    if defect > 1e-10 * scale {
        return Err(MultipoleError::Conjugation(defect));
    }
    let tables = operator_tables(&c.spins, c.convention)?;
    let dims: Vec<usize> = c.spins.iter().map(|s| s.dim()).collect();
    let n: usize = dims.iter().product();
    let mut out = Array2::from_elem((n, n), czero());
    for (key, &v) in &c.coeffs {
        if key.len() != tables.len() {
            return Err(MultipoleError::Dimension(format!("key {:?} for {} particles", key, tables.len())));
        }
        if v == czero() {
            continue;
        }
        let mut ops = Vec::with_capacity(key.len());
        for (&(k, q), t) in key.iter().zip(&tables) {
            let found = t.iter().find(|(kq, _)| *kq == (k, q)).ok_or(MultipoleError::RankOutOfRange {
                k,
                twice_j: (t.len() as f64).sqrt() as i32 - 1,
            })?;
            ops.push(&found.1);
        }
        out = out + kron_all(ops).mapv(|z| z * v);
    }
    DensityMatrix::new_unchecked(dims, out)
}
