use std::sync::Arc;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use super::basis::{BasisRef, FockBasis, MappedOperator, Occupation, Operator, ParticleKind, Sector};
use crate::error::{Error, Result};
use crate::numerics::{real, CMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeAction {
    Create,
    Annihilate,
    Number,
}

/// `(-1)^{sum_{k<j} n_k}` for fermions, `+1` otherwise.
fn string_sign(kind: ParticleKind, occ: &[u8], j: usize) -> f64 {
    if kind != ParticleKind::Fermion {
        return 1.0;
    }
    let parity: usize = occ[..j].iter().map(|&n| n as usize).sum();
    if parity.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// `a_j^dag |occ>` as `(coefficient, occupation)`; `None` when it vanishes or
/// leaves the truncated space. `j` is 0-based.
pub fn create(kind: ParticleKind, cutoff: u8, occ: &[u8], j: usize) -> Option<(f64, Occupation)> {
    if occ[j] >= cutoff {
        return None;
    }
    let coeff = match kind {
        ParticleKind::Boson => ((occ[j] as f64) + 1.0).sqrt(),
        _ => 1.0,
    } * string_sign(kind, occ, j);
    let mut out = occ.to_vec();
    out[j] += 1;
    Some((coeff, out))
}

/// `a_j |occ>`; `j` is 0-based.
pub fn annihilate(kind: ParticleKind, occ: &[u8], j: usize) -> Option<(f64, Occupation)> {
    if occ[j] == 0 {
        return None;
    }
    let coeff = match kind {
        ParticleKind::Boson => (occ[j] as f64).sqrt(),
        _ => 1.0,
    } * string_sign(kind, occ, j);
    let mut out = occ.to_vec();
    out[j] -= 1;
    Some((coeff, out))
}

/// `a_i^dag a_j |occ>`; both indices 0-based.
pub fn hop(kind: ParticleKind, cutoff: u8, occ: &[u8], i: usize, j: usize) -> Option<(f64, Occupation)> {
    let (c1, mid) = annihilate(kind, occ, j)?;
    let (c2, out) = create(kind, cutoff, &mid, i)?;
    Some((c1 * c2, out))
}

/// Adds `coeff * a_i^dag a_j` to `m` (0-based sites).
pub fn add_hopping(basis: &FockBasis, m: &mut CMatrix, i: usize, j: usize, coeff: C64) {
    for (col, occ) in basis.states().iter().enumerate() {
        if let Some((c, out)) = hop(basis.kind(), basis.cutoff(), occ, i, j) {
            if let Some(row) = basis.index_of(&out) {
                m[(row, col)] += coeff * c;
            }
        }
    }
}

/// Single-mode operator at 1-based site `site`.
///
/// For a fixed-number sector, creation and annihilation map into the
/// neighbouring sector; for ranges and the full Fock space they act within
/// the same basis, dropping components that leave it.
pub fn mode_operator(basis: &BasisRef, action: ModeAction, site: usize) -> Result<MappedOperator> {
    let j = basis.check_site(site)?;
    let codomain: BasisRef = match (action, basis.sector()) {
        (ModeAction::Number, _) | (_, Sector::Range(..)) | (_, Sector::All) => basis.clone(),
        (ModeAction::Create, Sector::Fixed(n)) => {
            Arc::new(FockBasis::build(basis.kind(), basis.sites(), Sector::Fixed(n + 1), basis.cutoff())?)
        }
        (ModeAction::Annihilate, Sector::Fixed(0)) => {
            return Err(Error::EmptySector("annihilation out of the vacuum sector".into()))
        }
        (ModeAction::Annihilate, Sector::Fixed(n)) => {
            Arc::new(FockBasis::build(basis.kind(), basis.sites(), Sector::Fixed(n - 1), basis.cutoff())?)
        }
    };
    let mut matrix = CMatrix::zeros(codomain.dim(), basis.dim());
    for (col, occ) in basis.states().iter().enumerate() {
        let image = match action {
            ModeAction::Create => create(basis.kind(), basis.cutoff(), occ, j),
            ModeAction::Annihilate => annihilate(basis.kind(), occ, j),
            ModeAction::Number => Some((occ[j] as f64, occ.clone())),
        };
        if let Some((c, out)) = image {
            if let Some(row) = codomain.index_of(&out) {
                matrix[(row, col)] += real(c);
            }
        }
    }
    Ok(MappedOperator { domain: basis.clone(), codomain, matrix })
}

/// Sites of processors A and B (1-based, paired index-wise) and the medium.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionPartition {
    region_a: Vec<usize>,
    region_b: Vec<usize>,
    medium: Vec<usize>,
}

impl RegionPartition {
    /// `a[i]` is identified with `b[i]`.
    pub fn new(sites: usize, a: Vec<usize>, b: Vec<usize>) -> Result<Self> {
        if a.is_empty() {
            return Err(Error::InvalidPartition("processor A is empty".into()));
        }
        if a.len() != b.len() {
            return Err(Error::InvalidPartition(format!(
                "processors differ in size ({} vs {})",
                a.len(),
                b.len()
            )));
        }
        let mut seen = vec![false; sites + 1];
        for &s in a.iter().chain(&b) {
            if s == 0 || s > sites {
                return Err(Error::SiteOutOfRange { site: s, sites });
            }
            if seen[s] {
                return Err(Error::InvalidPartition(format!("site {s} listed twice or shared by A and B")));
            }
            seen[s] = true;
        }
        let medium = (1..=sites).filter(|&s| !seen[s]).collect();
        Ok(Self { region_a: a, region_b: b, medium })
    }

    /// A = {1}, B = {N}.
    pub fn ends(sites: usize) -> Result<Self> {
        Self::new(sites, vec![1], vec![sites])
    }

    pub fn region_a(&self) -> &[usize] {
        &self.region_a
    }

    pub fn region_b(&self) -> &[usize] {
        &self.region_b
    }

    pub fn medium(&self) -> &[usize] {
        &self.medium
    }

    pub fn sites(&self) -> usize {
        self.region_a.len() + self.region_b.len() + self.medium.len()
    }

    /// True when `b[i] = N + 1 - a[i]` for every pair.
    pub fn is_mirror_symmetric(&self) -> bool {
        let n = self.sites();
        self.region_a.iter().zip(&self.region_b).all(|(&a, &b)| b == n + 1 - a)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ExchangePolicy {
    /// Swap A and B site by site; medium untouched.
    #[default]
    IdentityOnMedium,
    /// Reverse the whole chain.
    FullMirror,
}

impl std::str::FromStr for ExchangePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity_on_medium" | "identity-on-medium" => Ok(Self::IdentityOnMedium),
            "full_mirror" | "full-mirror" | "mirror" => Ok(Self::FullMirror),
            other => Err(Error::InvalidArgument(format!("unknown exchange policy `{other}`"))),
        }
    }
}

/// Parity sign of the permutation that sorts `seq` ascending.
pub(crate) fn sort_sign(seq: &[usize]) -> f64 {
    let mut inversions = 0usize;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] > seq[j] {
                inversions += 1;
            }
        }
    }
    if inversions.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// The unitary induced by the site relabeling `k -> perm[k]` (0-based):
/// `P a_k^dag P^dag = a_{perm[k]}^dag`, `P|0> = |0>`. For fermions the image
/// of an ordered product of creators is re-sorted, which contributes the
/// permutation's sign on the occupied modes.
pub fn relabeling_operator(basis: &BasisRef, perm: &[usize]) -> Result<Operator> {
    let n = basis.sites();
    if perm.len() != n {
        return Err(Error::DimensionMismatch(format!("permutation of length {} for {n} sites", perm.len())));
    }
    let mut matrix = CMatrix::zeros(basis.dim(), basis.dim());
    for (col, occ) in basis.states().iter().enumerate() {
        let mut image = vec![0u8; n];
        for k in 0..n {
            image[perm[k]] = occ[k];
        }
        let sign = if basis.kind() == ParticleKind::Fermion {
            let targets: Vec<usize> = (0..n).filter(|&k| occ[k] == 1).map(|k| perm[k]).collect();
            sort_sign(&targets)
        } else {
            1.0
        };
        let row = basis
            .index_of(&image)
            .ok_or_else(|| Error::InvalidArgument("relabeling leaves the basis".into()))?;
        matrix[(row, col)] = real(sign);
    }
    Operator::new(basis.clone(), matrix)
}

/// Exchange operator swapping processors A and B.
pub fn exchange_operator(basis: &BasisRef, partition: &RegionPartition, policy: ExchangePolicy) -> Result<Operator> {
    let n = basis.sites();
    if partition.sites() != n {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} sites, basis has {n}",
            partition.sites()
        )));
    }
    let perm: Vec<usize> = match policy {
        ExchangePolicy::IdentityOnMedium => {
            let mut perm: Vec<usize> = (0..n).collect();
            for (&a, &b) in partition.region_a().iter().zip(partition.region_b()) {
                perm[a - 1] = b - 1;
                perm[b - 1] = a - 1;
            }
            perm
        }
        ExchangePolicy::FullMirror => {
            if !partition.is_mirror_symmetric() {
                return Err(Error::InvalidPartition(format!(
                    "full_mirror needs b[i] = N+1-a[i]; got A={:?}, B={:?}",
                    partition.region_a(),
                    partition.region_b()
                )));
            }
            (0..n).map(|k| n - 1 - k).collect()
        }
    };
    relabeling_operator(basis, &perm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{anticommutator, commutator, identity, unitarity_deviation};

    fn basis(kind: ParticleKind, n: usize, sector: Sector) -> BasisRef {
        FockBasis::new(kind, n, sector, None).unwrap()
    }

    #[test]
    fn fermion_string_sign() {
        let b = basis(ParticleKind::Fermion, 2, Sector::Fixed(1));
        let c2 = mode_operator(&b, ModeAction::Create, 2).unwrap();
        let col = b.index_of(&[1, 0]).unwrap();
        let row = c2.codomain.index_of(&[1, 1]).unwrap();
        assert_eq!(c2.matrix[(row, col)], real(-1.0));
    }

    #[test]
    fn boson_matrix_element() {
        let b = FockBasis::new(ParticleKind::Boson, 1, Sector::All, Some(2)).unwrap();
        let bd = mode_operator(&b, ModeAction::Create, 1).unwrap();
        let col = b.index_of(&[1]).unwrap();
        let row = b.index_of(&[2]).unwrap();
        assert!((bd.matrix[(row, col)] - real(2f64.sqrt())).norm() < 1e-15);
    }

    #[test]
    fn number_readoff() {
        let b = basis(ParticleKind::Hardcore, 2, Sector::Fixed(1));
        let n1 = mode_operator(&b, ModeAction::Number, 1).unwrap();
        let i = b.index_of(&[1, 0]).unwrap();
        assert_eq!(n1.matrix[(i, i)], real(1.0));
        assert!(mode_operator(&b, ModeAction::Number, 3).is_err());
    }

    #[test]
    fn canonical_anticommutation() {
        for n in 1..=4 {
            let b = basis(ParticleKind::Fermion, n, Sector::All);
            let ops: Vec<CMatrix> =
                (1..=n).map(|j| mode_operator(&b, ModeAction::Annihilate, j).unwrap().matrix).collect();
            let id = identity(b.dim());
            for i in 0..n {
                for j in 0..n {
                    let ac = anticommutator(&ops[i], &ops[j].adjoint());
                    let expected = if i == j { id.clone() } else { CMatrix::zeros(b.dim(), b.dim()) };
                    assert_eq!(ac, expected, "{{c_{i}, c_{j}^dag}}");
                    assert_eq!(anticommutator(&ops[i], &ops[j]), CMatrix::zeros(b.dim(), b.dim()));
                }
            }
        }
    }

    #[test]
    fn boson_commutation_below_cutoff() {
        let b = FockBasis::new(ParticleKind::Boson, 3, Sector::All, Some(3)).unwrap();
        let ops: Vec<CMatrix> = (1..=3).map(|j| mode_operator(&b, ModeAction::Annihilate, j).unwrap().matrix).collect();
        for i in 0..3 {
            for j in 0..3 {
                let c = commutator(&ops[i], &ops[j].adjoint());
                for (col, occ) in b.states().iter().enumerate() {
                    if occ.iter().any(|&x| x >= b.cutoff()) {
                        continue;
                    }
                    for row in 0..b.dim() {
                        let expected = if i == j && row == col { 1.0 } else { 0.0 };
                        assert!((c[(row, col)] - real(expected)).norm() < 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn hardcore_exchange_swaps_ends() {
        let b = basis(ParticleKind::Hardcore, 3, Sector::Fixed(1));
        let part = RegionPartition::new(3, vec![1], vec![3]).unwrap();
        let p = exchange_operator(&b, &part, ExchangePolicy::IdentityOnMedium).unwrap();
        let i100 = b.index_of(&[1, 0, 0]).unwrap();
        let i010 = b.index_of(&[0, 1, 0]).unwrap();
        let i001 = b.index_of(&[0, 0, 1]).unwrap();
        assert_eq!(p.matrix[(i001, i100)], real(1.0));
        assert_eq!(p.matrix[(i100, i001)], real(1.0));
        assert_eq!(p.matrix[(i010, i010)], real(1.0));
    }

    #[test]
    fn full_mirror_is_antidiagonal() {
        let b = basis(ParticleKind::Hardcore, 3, Sector::Fixed(1));
        let part = RegionPartition::ends(3).unwrap();
        let p = exchange_operator(&b, &part, ExchangePolicy::FullMirror).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let expected = if i + j == 2 { 1.0 } else { 0.0 };
                assert_eq!(p.matrix[(i, j)], real(expected));
            }
        }
    }

    #[test]
    fn exchange_is_involution_for_all_kinds() {
        for kind in [ParticleKind::Hardcore, ParticleKind::Fermion, ParticleKind::Boson] {
            let b = FockBasis::new(kind, 5, Sector::All, Some(2)).unwrap();
            let part = RegionPartition::new(5, vec![1, 2], vec![5, 4]).unwrap();
            for policy in [ExchangePolicy::IdentityOnMedium, ExchangePolicy::FullMirror] {
                let p = exchange_operator(&b, &part, policy).unwrap();
                assert!((&p.matrix * &p.matrix - identity(b.dim())).norm() < 1e-12);
                assert!(unitarity_deviation(&p.matrix) < 1e-12);
            }
        }
    }

    #[test]
    fn fermion_exchange_conjugates_modes() {
        // P c_k^dag P = c_{perm(k)}^dag on the full Fock space
        let b = basis(ParticleKind::Fermion, 4, Sector::All);
        let part = RegionPartition::new(4, vec![1], vec![3]).unwrap();
        let p = exchange_operator(&b, &part, ExchangePolicy::IdentityOnMedium).unwrap().matrix;
        let perm = [3, 2, 1, 4];
        for k in 1..=4 {
            let ck = mode_operator(&b, ModeAction::Create, k).unwrap().matrix;
            let target = mode_operator(&b, ModeAction::Create, perm[k - 1]).unwrap().matrix;
            assert!((&p * ck * &p - target).norm() < 1e-13);
        }
    }

    #[test]
    fn partition_validation() {
        assert!(RegionPartition::new(4, vec![1, 2], vec![2, 3]).is_err());
        assert!(RegionPartition::new(4, vec![1], vec![3, 4]).is_err());
        assert!(RegionPartition::new(4, vec![1], vec![5]).is_err());
        let p = RegionPartition::new(5, vec![1], vec![4]).unwrap();
        assert_eq!(p.medium(), &[2, 3, 5]);
        let b = basis(ParticleKind::Hardcore, 5, Sector::Fixed(1));
        assert!(matches!(
            exchange_operator(&b, &p, ExchangePolicy::FullMirror),
            Err(Error::InvalidPartition(_))
        ));
    }
}
