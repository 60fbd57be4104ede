//! Dense complex linear algebra: Hermitian and unitary eigendecompositions
//! and the propagator `exp(-iHt)`.
//!
//! Everything here is dense and backed by `nalgebra`. Hermitian problems use
//! its symmetric eigensolver; unitary problems use the complex Schur form,
//! which for a normal matrix is diagonal up to rounding, so the Schur vectors
//! are an orthonormal eigenbasis.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Schur, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Relative tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Absolute tolerance on `||G^dag G - I||_F` for accepting a matrix as unitary.
pub const UNITARY_TOL: f64 = 1e-10;
/// Default eigenphase clustering tolerance, in radians.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

const SCHUR_MAX_ITER: usize = 10_000;
const SCHUR_DEFLATION: [f64; 4] = [1.0, 16.0, 256.0, 4096.0];

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn identity(dim: usize) -> CMatrix {
    CMatrix::identity(dim, dim)
}

/// Frobenius norm.
pub fn frobenius(m: &CMatrix) -> f64 {
    m.norm()
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b + b * a
}

/// `||M^dag M - I||_F`.
pub fn unitarity_deviation(m: &CMatrix) -> f64 {
    (m.adjoint() * m - identity(m.nrows())).norm()
}

/// Largest `|M_ij - conj(M_ji)|`.
pub fn max_hermitian_asymmetry(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

pub fn ensure_square(m: &CMatrix) -> Result<()> {
    if m.nrows() != m.ncols() || m.nrows() == 0 {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(())
}

pub fn ensure_finite(m: &CMatrix) -> Result<()> {
    if m.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub fn ensure_hermitian(m: &CMatrix) -> Result<()> {
    ensure_square(m)?;
    ensure_finite(m)?;
    let asym = max_hermitian_asymmetry(m);
    if asym > HERMITIAN_TOL * max_abs(m) {
        return Err(Error::NotHermitian { max_asymmetry: asym });
    }
    Ok(())
}

pub fn ensure_unitary(m: &CMatrix) -> Result<()> {
    ensure_square(m)?;
    ensure_finite(m)?;
    let deviation = unitarity_deviation(m);
    if deviation > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation });
    }
    Ok(())
}

/// Maps an angle into `(-pi, pi]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let mut p = phi.rem_euclid(2.0 * PI);
    if p > PI {
        p -= 2.0 * PI;
    }
    if p <= -PI {
        p += 2.0 * PI;
    }
    p
}

/// Distance between two angles on the circle.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    wrap_phase(a - b).abs()
}

#[derive(Debug, Clone)]
pub struct HermitianEigenSystem {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Column `k` belongs to `eigenvalues[k]`.
    pub eigenvectors: CMatrix,
}

impl HermitianEigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(f(lambda)) V^dag`.
    pub fn apply_function(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let v = &self.eigenvectors;
        let mut scaled = v.clone();
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            let w = f(lambda);
            for i in 0..scaled.nrows() {
                scaled[(i, k)] *= w;
            }
        }
        scaled * v.adjoint()
    }

    /// `exp(-i H t)` from the stored decomposition.
    pub fn propagator(&self, t: f64) -> CMatrix {
        self.apply_function(|lambda| c64(0.0, -lambda * t).exp())
    }

    /// `||H V - V diag(lambda)||_F`.
    pub fn reconstruction_residual(&self, h: &CMatrix) -> f64 {
        let v = &self.eigenvectors;
        let d = CMatrix::from_diagonal(&DVector::from_iterator(
            self.dim(),
            self.eigenvalues.iter().map(|&x| real(x)),
        ));
        (h * v - v * d).norm()
    }
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eig_hermitian(h: &CMatrix) -> Result<HermitianEigenSystem> {
    ensure_hermitian(h)?;
    let sym = (h + h.adjoint()) * real(0.5);
    let eig = SymmetricEigen::try_new(sym, f64::EPSILON, 0).ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let n = order.len();
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok(HermitianEigenSystem { eigenvalues, eigenvectors })
}

/// The propagator `exp(-i H t)` for Hermitian `H`.
pub fn expm_skew(h: &CMatrix, t: f64) -> Result<CMatrix> {
    Ok(eig_hermitian(h)?.propagator(t))
}

#[derive(Debug, Clone)]
pub struct UnitaryEigenSystem {
    /// In `(-pi, pi]`, ascending.
    pub eigenphases: Vec<f64>,
    /// Column `k` belongs to `exp(i eigenphases[k])`.
    pub eigenvectors: CMatrix,
    /// Index groups whose phases lie within the cluster tolerance of a
    /// neighbour (wrapping across `+-pi`). Singletons included.
    pub clusters: Vec<Vec<usize>>,
}

impl UnitaryEigenSystem {
    pub fn dim(&self) -> usize {
        self.eigenphases.len()
    }

    pub fn eigenvalue(&self, k: usize) -> C64 {
        C64::from_polar(1.0, self.eigenphases[k])
    }

    pub fn eigenvector(&self, k: usize) -> CVector {
        self.eigenvectors.column(k).into_owned()
    }

    /// `||G psi_k - e^{i phi_k} psi_k||` for column `k`.
    pub fn residual(&self, g: &CMatrix, k: usize) -> f64 {
        let v = self.eigenvectors.column(k);
        (g * v - v * self.eigenvalue(k)).norm()
    }

    pub fn max_residual(&self, g: &CMatrix) -> f64 {
        (0..self.dim()).map(|k| self.residual(g, k)).fold(0.0, f64::max)
    }

    pub fn orthonormality_deviation(&self) -> f64 {
        unitarity_deviation(&self.eigenvectors)
    }
}

/// Complete orthonormal eigenbasis of a unitary matrix.
///
/// Phases closer than `cluster_tol` are grouped and their eigenvectors pass
/// through a second modified Gram-Schmidt sweep.
pub fn eig_unitary(g: &CMatrix, cluster_tol: f64) -> Result<UnitaryEigenSystem> {
    ensure_unitary(g)?;
    if !(cluster_tol > 0.0) {
        return Err(Error::InvalidArgument(format!("cluster_tol must be positive, got {cluster_tol}")));
    }
    let n = g.nrows();
    // clustered eigenvalues behind roundoff-sized subdiagonals can stall deflation at machine epsilon
    let schur = SCHUR_DEFLATION
        .iter()
        .find_map(|&scale| Schur::try_new(g.clone(), scale * f64::EPSILON, SCHUR_MAX_ITER))
        .ok_or(Error::NoConvergence)?;
    let (q, t) = schur.unpack();

    let raw_phases: Vec<f64> = (0..n).map(|k| wrap_phase(t[(k, k)].arg())).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw_phases[a].total_cmp(&raw_phases[b]));

    let eigenphases: Vec<f64> = order.iter().map(|&k| raw_phases[k]).collect();
    let mut eigenvectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        eigenvectors.set_column(dst, &q.column(src));
    }

    let clusters = cluster_phases(&eigenphases, cluster_tol);
    for cluster in clusters.iter().filter(|c| c.len() > 1) {
        // two passes: "twice is enough"
        gram_schmidt_columns(&mut eigenvectors, cluster);
        gram_schmidt_columns(&mut eigenvectors, cluster);
    }
    for k in 0..n {
        fix_gauge(&mut eigenvectors, k);
    }

    Ok(UnitaryEigenSystem { eigenphases, eigenvectors, clusters })
}

/// Groups sorted phases into clusters of consecutive gaps below `tol`,
/// merging the first and last group when they meet across `+-pi`.
pub fn cluster_phases(sorted: &[f64], tol: f64) -> Vec<Vec<usize>> {
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    for (k, &phi) in sorted.iter().enumerate() {
        match clusters.last_mut() {
            Some(last) if phi - sorted[*last.last().unwrap()] < tol => last.push(k),
            _ => clusters.push(vec![k]),
        }
    }
    if clusters.len() > 1 {
        let first = sorted[0];
        let last = sorted[sorted.len() - 1];
        if 2.0 * PI - (last - first) < tol {
            let tail = clusters.pop().unwrap();
            clusters[0].splice(0..0, tail);
        }
    }
    clusters
}

/// Modified Gram-Schmidt over the listed columns, in place.
pub fn gram_schmidt_columns(m: &mut CMatrix, columns: &[usize]) {
    for (i, &ci) in columns.iter().enumerate() {
        for &cj in &columns[..i] {
            let proj = m.column(cj).dotc(&m.column(ci));
            let prev = m.column(cj).into_owned();
            let mut col = m.column_mut(ci);
            col -= prev * proj;
        }
        let norm = m.column(ci).norm();
        if norm > 0.0 {
            m.column_mut(ci).unscale_mut(norm);
        }
    }
}

/// Rotates column `k` so its largest-magnitude entry is real and positive.
fn fix_gauge(m: &mut CMatrix, k: usize) {
    let col = m.column(k);
    let mut best = 0;
    let mut best_abs = -1.0;
    for (i, z) in col.iter().enumerate() {
        // prefer the first of near-equal maxima so ties resolve deterministically
        if z.norm() > best_abs + 1e-12 {
            best_abs = z.norm();
            best = i;
        }
    }
    if best_abs <= 0.0 {
        return;
    }
    let phase = col[best].conj() / col[best].norm();
    for i in 0..m.nrows() {
        m[(i, k)] *= phase;
    }
}
