//! Hamiltonian and propagator builders for linear chains.
//!
//! Site `j` (1-based) of an `N`-site chain carries the angular-momentum
//! projection `m = j - (N+1)/2`, so a single particle on the chain is a
//! spin `l = (N-1)/2` and the collective operators `L_x, L_y, L_z` built
//! from mode bilinears satisfy the `so(3)` algebra on every sector.

mod schedule;
mod wigner;

use std::f64::consts::PI;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{add_hopping, relabeling_operator, BasisRef, Operator, ParticleKind};
use crate::numerics::{c64, eig_hermitian, expm_skew, real, CMatrix, CVector};

pub use schedule::{adiabatic_hamiltonian, AdiabaticSchedule, AdiabaticTerms, BiasShape, CouplingShape};
pub use wigner::{spin_matrices, wigner_small_d, SpinMatrices};

/// `J_j (e^{i phase} a_j^dag a_{j+1} + h.c.) + eps_j n_j + U n_j (n_j - 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainModel {
    pub kind: ParticleKind,
    pub sites: usize,
    /// `J_1 .. J_{N-1}`.
    pub couplings: Vec<f64>,
    /// Hopping phase, radians.
    pub hopping_phase: f64,
    /// `eps_1 .. eps_N`.
    pub onsite: Vec<f64>,
    /// On-site repulsion; bosons only.
    pub repulsion: f64,
}

impl ChainModel {
    pub fn new(kind: ParticleKind, couplings: Vec<f64>, onsite: Vec<f64>) -> Result<Self> {
        let model = Self {
            kind,
            sites: onsite.len(),
            couplings,
            hopping_phase: 0.0,
            onsite,
            repulsion: 0.0,
        };
        model.validate()?;
        Ok(model)
    }

    /// Equal couplings `J` on every bond.
    pub fn uniform(kind: ParticleKind, sites: usize, j: f64) -> Result<Self> {
        if sites < 2 {
            return Err(Error::InvalidModel("a chain needs at least two sites".into()));
        }
        Self::new(kind, vec![j; sites - 1], vec![0.0; sites])
    }

    /// `J_j = J sqrt(j (N - j)) / 2`, so that `H = J L_x`.
    pub fn christandl(kind: ParticleKind, sites: usize, j: f64) -> Result<Self> {
        Self::new(kind, christandl_couplings(sites, j)?, vec![0.0; sites])
    }

    pub fn with_hopping_phase(mut self, phase: f64) -> Self {
        self.hopping_phase = phase;
        self
    }

    /// Adds `eps (j - (N+1)/2)` to each on-site energy, i.e. `eps L_z`.
    pub fn with_linear_bias(mut self, eps: f64) -> Self {
        let center = (self.sites as f64 + 1.0) / 2.0;
        for (j, e) in self.onsite.iter_mut().enumerate() {
            *e += eps * ((j + 1) as f64 - center);
        }
        self
    }

    pub fn with_repulsion(mut self, u: f64) -> Result<Self> {
        self.repulsion = u;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sites < 2 {
            return Err(Error::InvalidModel("a chain needs at least two sites".into()));
        }
        if self.couplings.len() + 1 != self.sites {
            return Err(Error::InvalidModel(format!(
                "{} couplings for {} sites",
                self.couplings.len(),
                self.sites
            )));
        }
        if self.onsite.len() != self.sites {
            return Err(Error::InvalidModel(format!(
                "{} on-site energies for {} sites",
                self.onsite.len(),
                self.sites
            )));
        }
        if self.kind != ParticleKind::Boson && self.repulsion != 0.0 {
            return Err(Error::InvalidModel("on-site repulsion applies to bosons only".into()));
        }
        let all_finite = self.couplings.iter().chain(&self.onsite).all(|x| x.is_finite())
            && self.hopping_phase.is_finite()
            && self.repulsion.is_finite();
        if !all_finite {
            return Err(Error::InvalidModel("non-finite parameter".into()));
        }
        Ok(())
    }

    /// Mirror symmetric: `J_j = J_{N-j}` and `eps_j = eps_{N+1-j}`.
    pub fn is_mirror_symmetric(&self, tol: f64) -> bool {
        let n = self.sites;
        (0..n - 1).all(|j| (self.couplings[j] - self.couplings[n - 2 - j]).abs() <= tol)
            && (0..n).all(|j| (self.onsite[j] - self.onsite[n - 1 - j]).abs() <= tol)
    }
}

/// `J sqrt(j (N - j)) / 2` for `j = 1 .. N-1`.
pub fn christandl_couplings(sites: usize, j: f64) -> Result<Vec<f64>> {
    if sites < 2 {
        return Err(Error::InvalidModel("a chain needs at least two sites".into()));
    }
    if !(j > 0.0) {
        return Err(Error::InvalidModel(format!("coupling scale must be positive, got {j}")));
    }
    Ok((1..sites).map(|k| j * ((k * (sites - k)) as f64).sqrt() / 2.0).collect())
}

fn check_basis(model_sites: usize, kind: ParticleKind, basis: &BasisRef) -> Result<()> {
    if basis.sites() != model_sites || basis.kind() != kind {
        return Err(Error::DimensionMismatch(format!(
            "model is {} on {model_sites} sites, basis is {} on {} sites",
            kind.name(),
            basis.kind().name(),
            basis.sites()
        )));
    }
    Ok(())
}

/// `sum_j (a_j^dag a_{j+1} + h.c.)` with the given per-bond coefficients
/// multiplying `a_j^dag a_{j+1}`.
fn bond_sum(basis: &BasisRef, forward: impl Fn(usize) -> C64) -> CMatrix {
    let mut m = CMatrix::zeros(basis.dim(), basis.dim());
    for j in 0..basis.sites() - 1 {
        let c = forward(j);
        add_hopping(basis, &mut m, j, j + 1, c);
        add_hopping(basis, &mut m, j + 1, j, c.conj());
    }
    m
}

/// Diagonal matrix `sum_j f(j, n_j)` over 0-based sites.
fn onsite_sum(basis: &BasisRef, f: impl Fn(usize, u8) -> f64) -> CMatrix {
    let diag = basis.states().iter().map(|occ| real(occ.iter().enumerate().map(|(j, &n)| f(j, n)).sum()));
    CMatrix::from_diagonal(&CVector::from_iterator(basis.dim(), diag))
}

/// The chain Hamiltonian on `basis`.
pub fn hopping_hamiltonian(model: &ChainModel, basis: &BasisRef) -> Result<Operator> {
    model.validate()?;
    check_basis(model.sites, model.kind, basis)?;
    let phase = C64::from_polar(1.0, model.hopping_phase);
    let mut h = bond_sum(basis, |j| phase * model.couplings[j]);
    h += onsite_sum(basis, |j, n| {
        let n = n as f64;
        model.onsite[j] * n + model.repulsion * n * (n - 1.0)
    });
    Operator::new(basis.clone(), h)
}

/// Collective angular momentum `L_x, L_y, L_z` on one basis.
#[derive(Debug, Clone)]
pub struct CollectiveOperators {
    pub lx: Operator,
    pub ly: Operator,
    pub lz: Operator,
}

/// `D_j = sqrt(j (N - j)) / 2`.
pub fn collective_coupling(sites: usize, j: usize) -> f64 {
    ((j * (sites - j)) as f64).sqrt() / 2.0
}

/// `L_x = sum D_j (a_j^dag a_{j+1} + h.c.)`,
/// `L_y = i sum D_j (a_j^dag a_{j+1} - h.c.)`,
/// `L_z = sum (j - (N+1)/2) n_j`.
pub fn collective_l(basis: &BasisRef) -> Result<CollectiveOperators> {
    let n = basis.sites();
    if n < 2 {
        return Err(Error::InvalidModel("collective operators need at least two sites".into()));
    }
    let d = |j: usize| collective_coupling(n, j + 1);
    let lx = bond_sum(basis, |j| real(d(j)));
    let ly = bond_sum(basis, |j| c64(0.0, d(j)));
    let center = (n as f64 + 1.0) / 2.0;
    let lz = onsite_sum(basis, |j, occ| ((j + 1) as f64 - center) * occ as f64);
    Ok(CollectiveOperators {
        lx: Operator::new(basis.clone(), lx)?,
        ly: Operator::new(basis.clone(), ly)?,
        lz: Operator::new(basis.clone(), lz)?,
    })
}

/// The mirror phase `r = exp(i pi (N - 1) / 2)`.
pub fn mirror_phase(sites: usize) -> C64 {
    C64::from_polar(1.0, PI * (sites as f64 - 1.0) / 2.0)
}

/// Nearest-neighbour swap `E_{j,j-1}` for 1-based `j`, as the relabeling
/// `j-1 <-> j`. For fermions this is the mode relabeling, which carries the
/// exchange sign on doubly occupied pairs.
pub fn neighbour_swap(basis: &BasisRef, j: usize) -> Result<Operator> {
    let n = basis.sites();
    if j < 2 || j > n {
        return Err(Error::SiteOutOfRange { site: j, sites: n });
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.swap(j - 2, j - 1);
    relabeling_operator(basis, &perm)
}

/// `U_f = E_{N,N-1} ... E_{32} E_{21}`: carries site 1 to site N and shifts
/// every other site down by one.
pub fn swap_network_propagator(basis: &BasisRef) -> Result<Operator> {
    let mut u = Operator::identity(basis);
    for j in 2..=basis.sites() {
        u = neighbour_swap(basis, j)?.compose(&u)?;
    }
    Ok(u)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dressing {
    /// `W = exp(-i phase sum_j (j - (N+1)/2) n_j) = exp(-i phase L_z)`.
    SitePhase(f64),
    /// `W = exp(i theta L_y)`.
    CollectiveRotation(f64),
}

/// The dressing unitary `W`.
pub fn dressing_transform(basis: &BasisRef, which: Dressing) -> Result<Operator> {
    match which {
        Dressing::SitePhase(phase) => {
            let center = (basis.sites() as f64 + 1.0) / 2.0;
            let diag = basis.states().iter().map(|occ| {
                let m: f64 = occ.iter().enumerate().map(|(j, &n)| ((j + 1) as f64 - center) * n as f64).sum();
                C64::from_polar(1.0, -phase * m)
            });
            Operator::new(basis.clone(), CMatrix::from_diagonal(&CVector::from_iterator(basis.dim(), diag)))
        }
        Dressing::CollectiveRotation(theta) => {
            let l = collective_l(basis)?;
            Operator::new(basis.clone(), expm_skew(&l.ly.matrix, -theta)?)
        }
    }
}

/// `W H W^dag`.
pub fn dress(w: &Operator, h: &Operator) -> Result<Operator> {
    w.same_basis(h)?;
    Operator::new(h.basis.clone(), &w.matrix * &h.matrix * w.matrix.adjoint())
}

/// Site index `k = m + (N+1)/2` of the spherical-tensor component `m` for
/// rank `l = (N-1)/2`, given as `2l` and `2m`.
pub fn spherical_tensor_site(two_l: usize, two_m: i64) -> Result<usize> {
    if two_m.unsigned_abs() as usize > two_l {
        return Err(Error::InvalidArgument(format!("|m| = {}/2 exceeds l = {two_l}/2", two_m.abs())));
    }
    if (two_l as i64 - two_m).rem_euclid(2) != 0 {
        return Err(Error::InvalidArgument(format!(
            "m = {two_m}/2 and l = {two_l}/2 must both be integer or both half-integer"
        )));
    }
    Ok(((two_l as i64 + two_m) / 2 + 1) as usize)
}

/// Static propagator of a chain model at time `tau`.
pub fn chain_propagator(model: &ChainModel, basis: &BasisRef, tau: f64) -> Result<Operator> {
    let h = hopping_hamiltonian(model, basis)?;
    Operator::new(basis.clone(), eig_hermitian(&h.matrix)?.propagator(tau))
}

/// Named entries of the model catalog.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelName {
    Uniform,
    Christandl,
    DressedPhase,
    DressedCollective,
    Adiabatic,
    SwapNetwork,
}

impl ModelName {
    pub const ALL: [ModelName; 6] = [
        ModelName::Uniform,
        ModelName::Christandl,
        ModelName::DressedPhase,
        ModelName::DressedCollective,
        ModelName::Adiabatic,
        ModelName::SwapNetwork,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelName::Uniform => "uniform",
            ModelName::Christandl => "christandl",
            ModelName::DressedPhase => "dressed-phase",
            ModelName::DressedCollective => "dressed-collective",
            ModelName::Adiabatic => "adiabatic",
            ModelName::SwapNetwork => "swap-network",
        }
    }
}

impl FromStr for ModelName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown model `{s}`")))
    }
}
