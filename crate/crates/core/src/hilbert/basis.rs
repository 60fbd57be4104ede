use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{real, CMatrix, CVector};

/// Occupation numbers `(n_1, ..., n_N)`.
pub type Occupation = Vec<u8>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParticleKind {
    /// Spin-1/2 sites as hardcore bosons: occupation 0 or 1, no string signs.
    Hardcore,
    /// Spinless fermions with Jordan-Wigner signs `(-1)^{sum_{k<j} n_k}`.
    Fermion,
    /// Bosons truncated at a per-site cutoff.
    Boson,
}

impl ParticleKind {
    pub fn name(self) -> &'static str {
        match self {
            ParticleKind::Hardcore => "hardcore",
            ParticleKind::Fermion => "fermion",
            ParticleKind::Boson => "boson",
        }
    }
}

impl std::str::FromStr for ParticleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hardcore" | "spin" | "spin-1/2" => Ok(ParticleKind::Hardcore),
            "fermion" | "fermions" => Ok(ParticleKind::Fermion),
            "boson" | "bosons" => Ok(ParticleKind::Boson),
            other => Err(Error::InvalidArgument(format!("unknown particle kind `{other}`"))),
        }
    }
}

/// Total particle number constraint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sector {
    Fixed(usize),
    /// Inclusive range of total particle numbers.
    Range(usize, usize),
    All,
}

impl Sector {
    pub fn contains(self, n: usize) -> bool {
        match self {
            Sector::Fixed(m) => n == m,
            Sector::Range(lo, hi) => lo <= n && n <= hi,
            Sector::All => true,
        }
    }

    fn max_count(self) -> Option<usize> {
        match self {
            Sector::Fixed(m) => Some(m),
            Sector::Range(_, hi) => Some(hi),
            Sector::All => None,
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sector::Fixed(n) => write!(f, "n={n}"),
            Sector::Range(lo, hi) => write!(f, "n={lo}..={hi}"),
            Sector::All => write!(f, "all"),
        }
    }
}

/// Enumerated occupation-number basis of one particle kind on `sites` sites.
///
/// States are ordered by total particle number, then in descending
/// lexicographic order within each number block, so the vacuum (when
/// present) comes first and `(1,0,0) < (0,1,0) < (0,0,1)` in index order.
#[derive(Clone)]
pub struct FockBasis {
    kind: ParticleKind,
    sites: usize,
    sector: Sector,
    cutoff: u8,
    states: Vec<Occupation>,
    index: HashMap<Occupation, usize>,
}

pub type BasisRef = Arc<FockBasis>;

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
            && self.sites == other.sites
            && self.sector == other.sector
            && self.cutoff == other.cutoff
    }
}

impl fmt::Debug for FockBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FockBasis")
            .field("kind", &self.kind)
            .field("sites", &self.sites)
            .field("sector", &self.sector)
            .field("cutoff", &self.cutoff)
            .field("dim", &self.states.len())
            .finish()
    }
}

impl FockBasis {
    /// Enumerates a sector. `boson_cutoff` defaults to the sector's largest
    /// particle number and is required for `Sector::All` bosons; it is
    /// ignored for hardcore bosons and fermions.
    pub fn new(kind: ParticleKind, sites: usize, sector: Sector, boson_cutoff: Option<u8>) -> Result<BasisRef> {
        if sites == 0 {
            return Err(Error::InvalidArgument("a chain needs at least one site".into()));
        }
        if let Sector::Range(lo, hi) = sector {
            if lo > hi {
                return Err(Error::EmptySector(format!("range {lo}..={hi} is empty")));
            }
        }
        let cutoff = match kind {
            ParticleKind::Hardcore | ParticleKind::Fermion => 1,
            ParticleKind::Boson => {
                let cutoff = match (boson_cutoff, sector.max_count()) {
                    (Some(c), _) => c,
                    (None, Some(n)) => u8::try_from(n)
                        .map_err(|_| Error::InvalidArgument(format!("particle number {n} too large")))?,
                    (None, None) => {
                        return Err(Error::InvalidArgument("boson basis over all sectors needs an explicit cutoff".into()))
                    }
                };
                if cutoff == 0 {
                    return Err(Error::InvalidArgument("boson cutoff must be at least 1".into()));
                }
                if let Some(n) = sector.max_count() {
                    if (cutoff as usize) < n {
                        return Err(Error::InvalidArgument(format!(
                            "boson cutoff {cutoff} below sector particle number {n}"
                        )));
                    }
                }
                cutoff
            }
        };
        Self::build(kind, sites, sector, cutoff).map(Arc::new)
    }

    /// Enumeration without the cutoff-versus-sector precondition; used for
    /// codomains of creation operators.
    pub(crate) fn build(kind: ParticleKind, sites: usize, sector: Sector, cutoff: u8) -> Result<Self> {
        let max_total = sites * cutoff as usize;
        let numbers: Vec<usize> = (0..=max_total).filter(|&n| sector.contains(n)).collect();
        let mut states = Vec::new();
        let mut scratch = vec![0u8; sites];
        for n in numbers {
            enumerate_fixed(&mut scratch, 0, n, cutoff, &mut states);
        }
        if states.is_empty() {
            return Err(Error::EmptySector(format!(
                "{} on {sites} sites with {sector} (cutoff {cutoff})",
                kind.name()
            )));
        }
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Self { kind, sites, sector, cutoff, states, index })
    }

    pub fn kind(&self) -> ParticleKind {
        self.kind
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    /// Maximum occupation per site.
    pub fn cutoff(&self) -> u8 {
        self.cutoff
    }

    /// Dimension of one site's local space.
    pub fn local_dim(&self) -> usize {
        self.cutoff as usize + 1
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[Occupation] {
        &self.states
    }

    pub fn state(&self, i: usize) -> &Occupation {
        &self.states[i]
    }

    pub fn index_of(&self, occ: &[u8]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    pub fn particle_number(&self, i: usize) -> usize {
        self.states[i].iter().map(|&n| n as usize).sum()
    }

    pub fn vacuum_index(&self) -> Option<usize> {
        self.index_of(&vec![0; self.sites])
    }

    /// Checks a 1-based site index.
    pub fn check_site(&self, site: usize) -> Result<usize> {
        if site == 0 || site > self.sites {
            return Err(Error::SiteOutOfRange { site, sites: self.sites });
        }
        Ok(site - 1)
    }

    /// Diagonal matrix of the total particle number.
    pub fn number_matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(
            self.dim(),
            (0..self.dim()).map(|i| real(self.particle_number(i) as f64)),
        ))
    }
}

fn enumerate_fixed(scratch: &mut [u8], site: usize, remaining: usize, cutoff: u8, out: &mut Vec<Occupation>) {
    let sites_left = scratch.len() - site;
    if sites_left == 0 {
        if remaining == 0 {
            out.push(scratch.to_vec());
        }
        return;
    }
    let top = remaining.min(cutoff as usize);
    for v in (0..=top).rev() {
        let rest = remaining - v;
        if rest > (sites_left - 1) * cutoff as usize {
            break;
        }
        scratch[site] = v as u8;
        enumerate_fixed(scratch, site + 1, rest, cutoff, out);
    }
    scratch[site] = 0;
}

/// Dense square matrix bound to a basis.
#[derive(Debug, Clone)]
pub struct Operator {
    pub basis: BasisRef,
    pub matrix: CMatrix,
}

impl Operator {
    pub fn new(basis: BasisRef, matrix: CMatrix) -> Result<Self> {
        if matrix.nrows() != basis.dim() || matrix.ncols() != basis.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{}x{} matrix for basis of dimension {}",
                matrix.nrows(),
                matrix.ncols(),
                basis.dim()
            )));
        }
        Ok(Self { basis, matrix })
    }

    pub fn identity(basis: &BasisRef) -> Self {
        let dim = basis.dim();
        Self { basis: basis.clone(), matrix: CMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn adjoint(&self) -> Self {
        Self { basis: self.basis.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn same_basis(&self, other: &Operator) -> Result<()> {
        if *self.basis != *other.basis {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", self.basis, other.basis)));
        }
        Ok(())
    }

    /// `self * other`.
    pub fn compose(&self, other: &Operator) -> Result<Self> {
        self.same_basis(other)?;
        Ok(Self { basis: self.basis.clone(), matrix: &self.matrix * &other.matrix })
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if *self.basis != *state.basis {
            return Err(Error::DimensionMismatch("operator and state live on different bases".into()));
        }
        Ok(StateVector { basis: self.basis.clone(), amplitudes: &self.matrix * &state.amplitudes })
    }
}

/// Rectangular operator between two bases, e.g. a creation operator from
/// sector `n` into sector `n + 1`.
#[derive(Debug, Clone)]
pub struct MappedOperator {
    pub domain: BasisRef,
    pub codomain: BasisRef,
    pub matrix: CMatrix,
}

/// Amplitude vector over a basis.
#[derive(Debug, Clone)]
pub struct StateVector {
    pub basis: BasisRef,
    pub amplitudes: CVector,
}

/// Norm tolerance for accepting a state as normalized.
pub const NORM_TOL: f64 = 1e-10;

impl StateVector {
    /// Wraps amplitudes; they must be normalized within `NORM_TOL`.
    pub fn new(basis: BasisRef, amplitudes: CVector) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for basis of dimension {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("state norm {norm} is not 1")));
        }
        Ok(Self { basis, amplitudes })
    }

    /// Wraps amplitudes after rescaling them to unit norm.
    pub fn normalized(basis: BasisRef, amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero or non-finite vector".into()));
        }
        Self::new(basis, amplitudes.unscale(norm))
    }

    /// The basis state with the given occupations.
    pub fn basis_state(basis: &BasisRef, occ: &[u8]) -> Result<Self> {
        let i = basis
            .index_of(occ)
            .ok_or_else(|| Error::InvalidState(format!("occupation {occ:?} not in basis")))?;
        let mut amplitudes = CVector::zeros(basis.dim());
        amplitudes[i] = real(1.0);
        Ok(Self { basis: basis.clone(), amplitudes })
    }

    pub fn vacuum(basis: &BasisRef) -> Result<Self> {
        Self::basis_state(basis, &vec![0; basis.sites()])
    }

    /// A single particle on the given 1-based site, rest empty.
    pub fn single_particle(basis: &BasisRef, site: usize) -> Result<Self> {
        let j = basis.check_site(site)?;
        let mut occ = vec![0u8; basis.sites()];
        occ[j] = 1;
        Self::basis_state(basis, &occ)
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> num_complex::Complex64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    pub fn amplitude(&self, occ: &[u8]) -> num_complex::Complex64 {
        self.basis.index_of(occ).map(|i| self.amplitudes[i]).unwrap_or_default()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_fermion_three_sites() {
        let b = FockBasis::new(ParticleKind::Fermion, 3, Sector::Fixed(1), None).unwrap();
        assert_eq!(b.states(), &[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
    }

    #[test]
    fn binomial_dimension() {
        let b = FockBasis::new(ParticleKind::Fermion, 4, Sector::Fixed(2), None).unwrap();
        assert_eq!(b.dim(), 6);
        let b = FockBasis::new(ParticleKind::Hardcore, 6, Sector::Fixed(3), None).unwrap();
        assert_eq!(b.dim(), 20);
    }

    #[test]
    fn two_bosons_two_sites() {
        let b = FockBasis::new(ParticleKind::Boson, 2, Sector::Fixed(2), Some(2)).unwrap();
        assert_eq!(b.states(), &[vec![2, 0], vec![1, 1], vec![0, 2]]);
        let default_cutoff = FockBasis::new(ParticleKind::Boson, 2, Sector::Fixed(2), None).unwrap();
        assert_eq!(default_cutoff.cutoff(), 2);
    }

    #[test]
    fn empty_sector_rejected() {
        assert!(matches!(
            FockBasis::new(ParticleKind::Fermion, 3, Sector::Fixed(4), None),
            Err(Error::EmptySector(_))
        ));
    }

    #[test]
    fn all_sector_blocks_by_number() {
        let b = FockBasis::new(ParticleKind::Hardcore, 2, Sector::All, None).unwrap();
        assert_eq!(b.states(), &[vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(b.vacuum_index(), Some(0));
        assert!(FockBasis::new(ParticleKind::Boson, 2, Sector::All, None).is_err());
        let b = FockBasis::new(ParticleKind::Boson, 2, Sector::All, Some(2)).unwrap();
        assert_eq!(b.dim(), 9);
    }

    #[test]
    fn boson_cutoff_precondition() {
        assert!(FockBasis::new(ParticleKind::Boson, 3, Sector::Fixed(3), Some(2)).is_err());
    }

    #[test]
    fn state_constructors() {
        let b = FockBasis::new(ParticleKind::Fermion, 3, Sector::Range(0, 1), None).unwrap();
        let v = StateVector::vacuum(&b).unwrap();
        assert_eq!(v.amplitudes[0], real(1.0));
        let s = StateVector::single_particle(&b, 3).unwrap();
        assert_eq!(s.amplitude(&[0, 0, 1]), real(1.0));
        assert!(StateVector::single_particle(&b, 4).is_err());
        assert!(StateVector::new(b.clone(), CVector::zeros(4)).is_err());
    }
}
