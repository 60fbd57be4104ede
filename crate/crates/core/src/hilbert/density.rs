use std::collections::HashMap;

use num_complex::Complex64 as C64;

use super::basis::{BasisRef, Occupation, ParticleKind, StateVector};
use super::ops::sort_sign;
use crate::error::{Error, Result};
use crate::numerics::{eig_hermitian, max_hermitian_asymmetry, CMatrix, CVector};

/// Eigenvalues below this are treated as zero in entropies.
pub const ENTROPY_CLAMP: f64 = 1e-14;

/// Density matrix on the local product basis of a region.
///
/// Row/column `i` is the region configuration whose occupations, read in
/// the region's site order, spell `i` in base `local_dim` with the first
/// site most significant. Index 0 is the empty region.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub kind: ParticleKind,
    /// 1-based sites, in the order that defines the basis.
    pub sites: Vec<usize>,
    pub local_dim: usize,
    pub matrix: CMatrix,
}

impl DensityMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// `Tr(rho^2)`.
    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// Eigenvalues, ascending.
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        Ok(eig_hermitian(&self.matrix)?.eigenvalues)
    }

    /// Von Neumann entropy in nats.
    pub fn entropy(&self) -> Result<f64> {
        Ok(self
            .spectrum()?
            .into_iter()
            .filter(|&p| p >= ENTROPY_CLAMP)
            .map(|p| -p * p.ln())
            .sum())
    }

    /// Occupations of the region sites for basis index `i`.
    pub fn label(&self, mut i: usize) -> Occupation {
        let mut occ = vec![0u8; self.sites.len()];
        for slot in occ.iter_mut().rev() {
            *slot = (i % self.local_dim) as u8;
            i /= self.local_dim;
        }
        occ
    }

    /// Checks Hermiticity, unit trace and positivity at the stated tolerances.
    pub fn validate(&self) -> Result<()> {
        let asym = max_hermitian_asymmetry(&self.matrix);
        if asym > 1e-12 {
            return Err(Error::NotHermitian { max_asymmetry: asym });
        }
        let tr = self.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = self.spectrum()?.first().copied().unwrap_or(0.0);
        if min < -1e-10 {
            return Err(Error::InvalidState(format!("negative eigenvalue {min}")));
        }
        Ok(())
    }
}

fn check_region(sites: usize, region: &[usize]) -> Result<()> {
    if region.is_empty() {
        return Err(Error::InvalidRegion("region is empty".into()));
    }
    let mut seen = vec![false; sites + 1];
    for &s in region {
        if s == 0 || s > sites {
            return Err(Error::SiteOutOfRange { site: s, sites });
        }
        if seen[s] {
            return Err(Error::InvalidRegion(format!("site {s} repeated")));
        }
        seen[s] = true;
    }
    Ok(())
}

/// Splits every basis amplitude into (region index, complement key, signed
/// amplitude). For fermions the state is re-expressed with the region's
/// creators first, in region order, followed by the complement's in
/// ascending site order; the reordering sign is folded into the amplitude.
fn split_amplitudes(state: &StateVector, region: &[usize]) -> Result<(Vec<usize>, Vec<(usize, Occupation, C64)>)> {
    let basis = &state.basis;
    let n = basis.sites();
    check_region(n, region)?;
    let region0: Vec<usize> = region.iter().map(|s| s - 1).collect();
    let mut in_region = vec![false; n];
    for &s in &region0 {
        in_region[s] = true;
    }
    let complement: Vec<usize> = (0..n).filter(|&s| !in_region[s]).collect();
    let d = basis.local_dim();

    let mut parts = Vec::with_capacity(basis.dim());
    for (i, occ) in basis.states().iter().enumerate() {
        let amp = state.amplitudes[i];
        if amp == C64::default() {
            continue;
        }
        let alpha = region0.iter().fold(0usize, |acc, &s| acc * d + occ[s] as usize);
        let key: Occupation = complement.iter().map(|&s| occ[s]).collect();
        let sign = if basis.kind() == ParticleKind::Fermion {
            let order: Vec<usize> =
                region0.iter().chain(&complement).copied().filter(|&s| occ[s] == 1).collect();
            sort_sign(&order)
        } else {
            1.0
        };
        parts.push((alpha, key, amp * sign));
    }
    Ok((region0, parts))
}

/// `rho_{ab} = sum_c <a,c|Psi><Psi|b,c>` over complement configurations `c`,
/// aggregated over every particle-number block present in the state.
pub fn reduced_density(state: &StateVector, region: &[usize]) -> Result<DensityMatrix> {
    let (region0, parts) = split_amplitudes(state, region)?;
    let d = state.basis.local_dim();
    let dim = d.pow(region0.len() as u32);
    let mut groups: HashMap<Occupation, Vec<(usize, C64)>> = HashMap::new();
    for (alpha, key, amp) in parts {
        groups.entry(key).or_default().push((alpha, amp));
    }
    let mut matrix = CMatrix::zeros(dim, dim);
    for entries in groups.values() {
        for &(a, x) in entries {
            for &(b, y) in entries {
                matrix[(a, b)] += x * y.conj();
            }
        }
    }
    Ok(DensityMatrix { kind: state.basis.kind(), sites: region.to_vec(), local_dim: d, matrix })
}

/// The block `<Psi|b, 0><a, 0|Psi>` with the complement empty: matrix
/// elements taken between full-chain states that are region configurations
/// times the vacuum elsewhere. Not normalized in general.
pub fn processor_block(state: &StateVector, region: &[usize]) -> Result<DensityMatrix> {
    let (region0, parts) = split_amplitudes(state, region)?;
    let d = state.basis.local_dim();
    let dim = d.pow(region0.len() as u32);
    let entries: Vec<(usize, C64)> = parts
        .into_iter()
        .filter(|(_, key, _)| key.iter().all(|&x| x == 0))
        .map(|(a, _, amp)| (a, amp))
        .collect();
    let mut matrix = CMatrix::zeros(dim, dim);
    for &(a, x) in &entries {
        for &(b, y) in &entries {
            matrix[(a, b)] += x * y.conj();
        }
    }
    Ok(DensityMatrix { kind: state.basis.kind(), sites: region.to_vec(), local_dim: d, matrix })
}

/// `sum psi_a phi_c |a>_region |c>_rest`, with `local` indexed like a
/// [`DensityMatrix`] row and `complement` indexed the same way over the
/// remaining sites in ascending order. Fermion states are read with the
/// region's creators first. Components outside the basis sector must vanish.
pub fn product_state(basis: &BasisRef, region: &[usize], local: &CVector, complement: &CVector) -> Result<StateVector> {
    let n = basis.sites();
    check_region(n, region)?;
    let region0: Vec<usize> = region.iter().map(|s| s - 1).collect();
    let rest: Vec<usize> = (0..n).filter(|s| !region0.contains(s)).collect();
    let d = basis.local_dim();
    if local.len() != d.pow(region0.len() as u32) || complement.len() != d.pow(rest.len() as u32) {
        return Err(Error::DimensionMismatch(format!(
            "local factors of length {} and {} do not fit {} region and {} remaining sites",
            local.len(),
            complement.len(),
            region0.len(),
            rest.len()
        )));
    }
    let decode = |mut i: usize, sites: &[usize], occ: &mut [u8]| {
        for &s in sites.iter().rev() {
            occ[s] = (i % d) as u8;
            i /= d;
        }
    };
    let mut amplitudes = CVector::zeros(basis.dim());
    let mut occ = vec![0u8; n];
    for (a, &x) in local.iter().enumerate() {
        if x == C64::default() {
            continue;
        }
        for (c, &y) in complement.iter().enumerate() {
            if y == C64::default() {
                continue;
            }
            decode(a, &region0, &mut occ);
            decode(c, &rest, &mut occ);
            let Some(i) = basis.index_of(&occ) else {
                return Err(Error::InvalidState(format!("configuration {occ:?} lies outside the basis sector")));
            };
            let sign = if basis.kind() == ParticleKind::Fermion {
                let order: Vec<usize> = region0.iter().chain(&rest).copied().filter(|&s| occ[s] == 1).collect();
                sort_sign(&order)
            } else {
                1.0
            };
            amplitudes[i] += x * y * sign;
        }
    }
    StateVector::normalized(basis.clone(), amplitudes)
}

/// `local` on `region` with every other site empty.
pub fn embed_local_state(basis: &BasisRef, region: &[usize], local: &CVector) -> Result<StateVector> {
    let rest = basis.sites().saturating_sub(region.len());
    let mut vacuum = CVector::zeros(basis.local_dim().pow(rest as u32));
    vacuum[0] = C64::new(1.0, 0.0);
    product_state(basis, region, local, &vacuum)
}

/// Entanglement entropy (nats) across `region | rest`.
pub fn entanglement_entropy(state: &StateVector, region: &[usize]) -> Result<f64> {
    reduced_density(state, region)?.entropy()
}

/// Squared Uhlmann fidelity `(Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
pub fn uhlmann_fidelity(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    if rho.shape() != sigma.shape() {
        return Err(Error::DimensionMismatch("density matrices differ in shape".into()));
    }
    let sqrt_rho = eig_hermitian(rho)?.apply_function(|x| C64::new(x.max(0.0).sqrt(), 0.0));
    let inner = &sqrt_rho * sigma * &sqrt_rho;
    let inner = (&inner + inner.adjoint()) * C64::new(0.5, 0.0);
    let root_trace: f64 = eig_hermitian(&inner)?.eigenvalues.iter().map(|x| x.max(0.0).sqrt()).sum();
    Ok((root_trace * root_trace).min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::basis::{FockBasis, Sector};
    use crate::numerics::{real, CVector};
    use std::f64::consts::LN_2;

    #[test]
    fn product_state_is_pure() {
        let b = FockBasis::new(ParticleKind::Hardcore, 3, Sector::Fixed(1), None).unwrap();
        let psi = StateVector::basis_state(&b, &[1, 0, 0]).unwrap();
        let rho = reduced_density(&psi, &[1]).unwrap();
        assert_eq!(rho.matrix[(1, 1)], real(1.0));
        assert_eq!(rho.matrix[(0, 0)], real(0.0));
        assert!(rho.entropy().unwrap().abs() < 1e-12);
        rho.validate().unwrap();
    }

    #[test]
    fn bell_cut() {
        let b = FockBasis::new(ParticleKind::Hardcore, 2, Sector::Fixed(1), None).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let psi = StateVector::new(b, CVector::from_vec(vec![real(s), real(s)])).unwrap();
        let rho = reduced_density(&psi, &[1]).unwrap();
        assert!((rho.matrix[(0, 0)] - real(0.5)).norm() < 1e-15);
        assert!((rho.matrix[(1, 1)] - real(0.5)).norm() < 1e-15);
        assert!(rho.matrix[(0, 1)].norm() < 1e-15);
        assert!((rho.entropy().unwrap() - LN_2).abs() < 1e-12);
    }

    #[test]
    fn vacuum_region() {
        let b = FockBasis::new(ParticleKind::Fermion, 3, Sector::Range(0, 1), None).unwrap();
        let psi = StateVector::vacuum(&b).unwrap();
        let rho = reduced_density(&psi, &[1]).unwrap();
        assert_eq!(rho.matrix[(0, 0)], real(1.0));
        assert_eq!(entanglement_entropy(&psi, &[2]).unwrap(), 0.0);
    }

    #[test]
    fn empty_and_bad_regions_rejected() {
        let b = FockBasis::new(ParticleKind::Fermion, 3, Sector::Fixed(1), None).unwrap();
        let psi = StateVector::basis_state(&b, &[1, 0, 0]).unwrap();
        assert!(matches!(reduced_density(&psi, &[]), Err(Error::InvalidRegion(_))));
        assert!(reduced_density(&psi, &[1, 1]).is_err());
        assert!(reduced_density(&psi, &[4]).is_err());
    }

    #[test]
    fn full_chain_region_is_projector() {
        let b = FockBasis::new(ParticleKind::Hardcore, 2, Sector::Fixed(1), None).unwrap();
        let psi = StateVector::normalized(b, CVector::from_vec(vec![real(0.6), C64::new(0.0, 0.8)])).unwrap();
        let rho = reduced_density(&psi, &[1, 2]).unwrap();
        // |10> has index 0b10 = 2, |01> index 1
        assert!((rho.matrix[(2, 2)] - real(0.36)).norm() < 1e-15);
        assert!((rho.matrix[(2, 1)] - C64::new(0.0, -0.48)).norm() < 1e-15);
        assert!((rho.purity() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fermion_region_order_sign() {
        // (c1^dag c2^dag + c2^dag c3^dag)|0>/sqrt2; with region [1, 3] first,
        // c2^dag c3^dag = -c3^dag c2^dag picks up a minus sign
        let b = FockBasis::new(ParticleKind::Fermion, 3, Sector::Fixed(2), None).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let mut amps = CVector::zeros(b.dim());
        amps[b.index_of(&[1, 1, 0]).unwrap()] = real(s);
        amps[b.index_of(&[0, 1, 1]).unwrap()] = real(s);
        let psi = StateVector::new(b.clone(), amps).unwrap();
        let rho = reduced_density(&psi, &[1, 3]).unwrap();
        // (n1, n3) = (1, 0) -> index 2, (0, 1) -> index 1
        assert!((rho.matrix[(2, 1)] - real(-0.5)).norm() < 1e-15);
        let hardcore = FockBasis::new(ParticleKind::Hardcore, 3, Sector::Fixed(2), None).unwrap();
        let psi_h = StateVector::new(hardcore, psi.amplitudes.clone()).unwrap();
        let rho_h = reduced_density(&psi_h, &[1, 3]).unwrap();
        assert!((rho_h.matrix[(2, 1)] - real(0.5)).norm() < 1e-15);
    }

    #[test]
    fn uhlmann_pure_states() {
        let a = CMatrix::from_row_slice(2, 2, &[real(1.0), real(0.0), real(0.0), real(0.0)]);
        let h = CMatrix::from_row_slice(2, 2, &[real(0.5), real(0.5), real(0.5), real(0.5)]);
        assert!((uhlmann_fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert!((uhlmann_fidelity(&a, &h).unwrap() - 0.5).abs() < 1e-12);
    }
}
