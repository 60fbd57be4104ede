//! The quasi-evolution operator `G = P U`, its eigenbasis of exactly
//! transmitted states, and the analytic transfer benchmarks.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    embed_local_state, exchange_operator, processor_block, reduced_density, uhlmann_fidelity, BasisRef,
    ExchangePolicy, FockBasis, Occupation, Operator, ParticleKind, RegionPartition, Sector, StateVector,
};
use crate::models::{collective_l, dressing_transform, mirror_phase, wigner_small_d, Dressing};
use crate::numerics::{
    eig_hermitian, eig_unitary, ensure_unitary, expm_skew, phase_distance, real, wrap_phase, CMatrix, CVector,
    UnitaryEigenSystem, DEFAULT_CLUSTER_TOL,
};

/// Residual bound on every eigenvector of `G`.
pub const TRANSMISSION_TOL: f64 = 1e-9;
/// Expansion coefficients at or below this magnitude are ignored by [`revival_condition`].
pub const AMPLITUDE_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct QuasiEvolution {
    pub g: Operator,
    pub u: Operator,
    pub p: Operator,
    pub partition: RegionPartition,
    pub tau: Option<f64>,
    pub policy: Option<ExchangePolicy>,
}

impl QuasiEvolution {
    /// `G = P U`; both factors must be unitary.
    pub fn new(u: &Operator, p: &Operator, partition: &RegionPartition) -> Result<Self> {
        u.same_basis(p)?;
        if partition.sites() != u.basis.sites() {
            return Err(Error::InvalidPartition(format!(
                "partition covers {} sites, basis has {}",
                partition.sites(),
                u.basis.sites()
            )));
        }
        ensure_unitary(&u.matrix)?;
        ensure_unitary(&p.matrix)?;
        let g = p.compose(u)?;
        ensure_unitary(&g.matrix)?;
        Ok(Self { g, u: u.clone(), p: p.clone(), partition: partition.clone(), tau: None, policy: None })
    }

    /// `U = exp(-i H tau)` and `P` from `policy`.
    pub fn from_hamiltonian(h: &Operator, tau: f64, partition: &RegionPartition, policy: ExchangePolicy) -> Result<Self> {
        let u = Operator::new(h.basis.clone(), eig_hermitian(&h.matrix)?.propagator(tau))?;
        let p = exchange_operator(&h.basis, partition, policy)?;
        let mut q = Self::new(&u, &p, partition)?;
        q.tau = Some(tau);
        q.policy = Some(policy);
        Ok(q)
    }

    pub fn basis(&self) -> &BasisRef {
        &self.g.basis
    }

    pub fn eigensystem(&self, cluster_tol: f64) -> Result<UnitaryEigenSystem> {
        eig_unitary(&self.g.matrix, cluster_tol)
    }
}

/// `rho` diagnostics of a state relative to processor A.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Localization {
    pub entropy: f64,
    pub purity: f64,
    /// Largest Schmidt coefficient squared.
    pub product_fidelity: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransmittedState {
    pub phase: f64,
    pub residual: f64,
    pub localization: Localization,
    /// Populations of the A configurations, keyed by their occupations.
    pub weights: Vec<(Occupation, f64)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TransmissionReport {
    pub states: Vec<TransmittedState>,
    /// Groups of state indices sharing an eigenphase.
    pub clusters: Vec<Vec<usize>>,
    pub max_eigen_residual: f64,
    #[serde(skip)]
    pub eigenvectors: CMatrix,
}

impl TransmissionReport {
    pub fn phases(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.phase).collect()
    }

    pub fn residuals(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.residual).collect()
    }

    pub fn max_residual(&self) -> f64 {
        self.states.iter().map(|s| s.residual).fold(0.0, f64::max)
    }

    pub fn all_transmitted(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

/// Eigenbasis of `G` with the transmission residual and localization of every vector.
pub fn transmission_set(q: &QuasiEvolution) -> Result<TransmissionReport> {
    transmission_set_with(q, DEFAULT_CLUSTER_TOL)
}

pub fn transmission_set_with(q: &QuasiEvolution, cluster_tol: f64) -> Result<TransmissionReport> {
    let eig = q.eigensystem(cluster_tol)?;
    let basis = q.basis().clone();
    let states = (0..eig.dim())
        .into_par_iter()
        .map(|k| {
            let psi = StateVector::new(basis.clone(), eig.eigenvector(k))?;
            let residual = verify_exact_transmission(&psi, &q.u, &q.partition)?;
            let rho = reduced_density(&psi, q.partition.region_a())?;
            let weights = (0..rho.dim()).map(|i| (rho.label(i), rho.matrix[(i, i)].re)).collect();
            Ok(TransmittedState {
                phase: eig.eigenphases[k],
                residual,
                localization: localization_report(&psi, q.partition.region_a())?,
                weights,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TransmissionReport {
        states,
        clusters: eig.clusters.clone(),
        max_eigen_residual: eig.max_residual(&q.g.matrix),
        eigenvectors: eig.eigenvectors,
    })
}

/// `|| rho_A(Psi) - rho_B(U Psi) ||_F` with A and B configurations paired index-wise.
pub fn verify_exact_transmission(psi: &StateVector, u: &Operator, partition: &RegionPartition) -> Result<f64> {
    if partition.sites() != psi.basis.sites() {
        return Err(Error::InvalidPartition("partition does not match the state's chain".into()));
    }
    let evolved = u.apply(psi)?;
    let rho_a = reduced_density(psi, partition.region_a())?;
    let rho_b = reduced_density(&evolved, partition.region_b())?;
    Ok((rho_a.matrix - rho_b.matrix).norm())
}

pub fn localization_report(psi: &StateVector, region: &[usize]) -> Result<Localization> {
    let rho = reduced_density(psi, region)?;
    let spectrum = rho.spectrum()?;
    Ok(Localization {
        entropy: rho.entropy()?,
        purity: rho.purity(),
        product_fidelity: spectrum.iter().copied().fold(0.0, f64::max).min(1.0),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PstResult {
    pub fidelity: f64,
    /// `arg <target|U Psi>` with the target being the input placed on B; present
    /// only when the transfer is perfect.
    pub phase: Option<f64>,
}

/// Places `input` on A with the rest empty, evolves with `u`, and compares
/// the state of B with the input.
pub fn pst_fidelity(u: &Operator, input: &CVector, partition: &RegionPartition) -> Result<PstResult> {
    let basis = &u.basis;
    let norm = input.norm();
    if (norm - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("input norm is {norm}")));
    }
    let psi = embed_local_state(basis, partition.region_a(), input)?;
    let out = u.apply(&psi)?;
    let rho_b = reduced_density(&out, partition.region_b())?;
    let fidelity = uhlmann_fidelity(&rho_b.matrix, &(input * input.adjoint()))?;
    let phase = if fidelity > 1.0 - 1e-9 {
        let target = embed_local_state(basis, partition.region_b(), input)?;
        Some(target.inner(&out).arg())
    } else {
        None
    };
    Ok(PstResult { fidelity, phase })
}

/// `C_k = <Psi_k|Psi>` over an eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionCoefficients(Vec<C64>);

impl ExpansionCoefficients {
    pub fn new(c: Vec<C64>) -> Result<Self> {
        let total: f64 = c.iter().map(|x| x.norm_sqr()).sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("sum |C_k|^2 = {total}")));
        }
        Ok(Self(c))
    }

    pub fn from_state(eig: &UnitaryEigenSystem, psi: &StateVector) -> Result<Self> {
        if psi.amplitudes.len() != eig.dim() {
            return Err(Error::DimensionMismatch("state and eigenbasis differ in size".into()));
        }
        Self::new((eig.eigenvectors.adjoint() * &psi.amplitudes).iter().copied().collect())
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Revival {
    pub satisfiable: bool,
    /// The common phase when satisfiable.
    pub witness: Option<f64>,
}

/// Whether every eigenphase carrying weight above [`AMPLITUDE_FLOOR`] agrees mod `2 pi` within `tol`.
pub fn revival_condition(c: &ExpansionCoefficients, phases: &[f64], tol: f64) -> Result<Revival> {
    if c.0.len() != phases.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} coefficients for {} phases",
            c.0.len(),
            phases.len()
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let active: Vec<f64> =
        c.0.iter().zip(phases).filter(|(x, _)| x.norm() > AMPLITUDE_FLOOR).map(|(_, &p)| p).collect();
    let Some(&first) = active.first() else {
        return Ok(Revival { satisfiable: false, witness: None });
    };
    let agree = active.iter().all(|&p| phase_distance(p, first) <= tol)
        && active.iter().all(|&p| active.iter().all(|&q| phase_distance(p, q) <= tol));
    if !agree {
        return Ok(Revival { satisfiable: false, witness: None });
    }
    let mean: C64 = active.iter().map(|&p| C64::from_polar(1.0, p)).sum();
    Ok(Revival { satisfiable: true, witness: Some(wrap_phase(mean.arg())) })
}

/// `r^* exp(i pi L_x)`.
pub fn collective_exchange(basis: &BasisRef) -> Result<Operator> {
    let l = collective_l(basis)?;
    let m = expm_skew(&l.lx.matrix, -std::f64::consts::PI)? * mirror_phase(basis.sites()).conj();
    Operator::new(basis.clone(), m)
}

/// `W P W^dag`: the exchange operator seen in a dressed frame.
pub fn dressed_exchange(w: &Operator, p: &Operator) -> Result<Operator> {
    w.same_basis(p)?;
    Operator::new(p.basis.clone(), &w.matrix * &p.matrix * w.matrix.adjoint())
}

/// `r^* exp(-i (J tau - pi) L_x)`, the closed form of `G` for the Christandl
/// chain under the mirror exchange on a single-excitation sector.
pub fn christandl_g_closed_form(basis: &BasisRef, j: f64, tau: f64) -> Result<CMatrix> {
    let l = collective_l(basis)?;
    Ok(expm_skew(&l.lx.matrix, j * tau - std::f64::consts::PI)? * mirror_phase(basis.sites()).conj())
}

#[derive(Debug, Clone)]
pub struct MixedStateBenchmark {
    pub sites: usize,
    pub theta: f64,
    pub tau_star: f64,
    /// Site-1 block with the rest of the chain empty.
    pub numeric: CMatrix,
    pub analytic: CMatrix,
    pub max_deviation: f64,
    /// Full partial trace at site 1.
    pub reduced: CMatrix,
    pub purity: f64,
    /// Block mismatch between the initial state and the state exchanged back
    /// with `r^* exp(i pi L_x)` at `tau*`.
    pub block_transfer_residual: f64,
    /// Same comparison for the full partial trace.
    pub reduced_transfer_residual: f64,
    /// Full partial trace at site N after `tau*` against site 1 at the start,
    /// with the plain mirror identification.
    pub mirror_transfer_residual: f64,
}

/// Site-1 state of `C1|0> + C2 A^dag_{l,-l}(theta)|0>` for
/// `H = J L_x + eps L_z` on the vacuum plus one-particle space, compared with
/// the closed form built from `d^l_{-l,-l}(theta) = cos(theta/2)^{N-1}`.
pub fn mixed_state_benchmark(sites: usize, j: f64, eps: f64, c1: C64, c2: C64) -> Result<MixedStateBenchmark> {
    if sites < 2 {
        return Err(Error::InvalidModel("a chain needs at least two sites".into()));
    }
    if !(j > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidModel("need J > 0 and finite eps".into()));
    }
    if ((c1.norm_sqr() + c2.norm_sqr()) - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidState("|C1|^2 + |C2|^2 must be 1".into()));
    }
    let basis = FockBasis::new(ParticleKind::Hardcore, sites, Sector::Range(0, 1), None)?;
    let theta = (eps / j).atan();
    let omega = (j * j + eps * eps).sqrt();
    let tau_star = std::f64::consts::PI / omega;

    let l = collective_l(&basis)?;
    let h = &l.lx.matrix * real(j) + &l.lz.matrix * real(eps);
    let u = Operator::new(basis.clone(), eig_hermitian(&h)?.propagator(tau_star))?;
    let w = dressing_transform(&basis, Dressing::CollectiveRotation(theta))?;

    let first = StateVector::single_particle(&basis, 1)?;
    let dressed = w.apply(&first)?;
    let vacuum = StateVector::vacuum(&basis)?;
    let psi0 = StateVector::normalized(basis.clone(), &vacuum.amplitudes * c1 + &dressed.amplitudes * c2)?;

    let block = processor_block(&psi0, &[1])?.matrix;
    let d = wigner_small_d(sites - 1, theta)?[(sites - 1, sites - 1)];
    let analytic = CMatrix::from_row_slice(
        2,
        2,
        &[real(c1.norm_sqr()), c1 * c2.conj() * d, c2 * c1.conj() * d, real(c2.norm_sqr() * d * d)],
    );
    let max_deviation = (&block - &analytic).iter().map(|x| x.norm()).fold(0.0, f64::max);

    let reduced = reduced_density(&psi0, &[1])?;
    let evolved = u.apply(&psi0)?;
    let returned = collective_exchange(&basis)?.apply(&evolved)?;
    let block_transfer_residual = (processor_block(&returned, &[1])?.matrix - &block).norm();
    let reduced_transfer_residual = (reduced_density(&returned, &[1])?.matrix - &reduced.matrix).norm();
    let mirror_transfer_residual = (reduced_density(&evolved, &[sites])?.matrix - &reduced.matrix).norm();

    Ok(MixedStateBenchmark {
        sites,
        theta,
        tau_star,
        numeric: block,
        analytic,
        max_deviation,
        purity: reduced.purity(),
        reduced: reduced.matrix,
        block_transfer_residual,
        reduced_transfer_residual,
        mirror_transfer_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{hopping_hamiltonian, ChainModel};
    use crate::numerics::{c64, identity};

    fn single(n: usize) -> BasisRef {
        FockBasis::new(ParticleKind::Fermion, n, Sector::Fixed(1), None).unwrap()
    }

    fn uniform_q(n: usize, j: f64, tau: f64, policy: ExchangePolicy) -> QuasiEvolution {
        let b = single(n);
        let h = hopping_hamiltonian(&ChainModel::uniform(ParticleKind::Fermion, n, j).unwrap(), &b).unwrap();
        QuasiEvolution::from_hamiltonian(&h, tau, &RegionPartition::ends(n).unwrap(), policy).unwrap()
    }

    #[test]
    fn identity_propagator_gives_exchange() {
        let b = single(3);
        let part = RegionPartition::ends(3).unwrap();
        let p = exchange_operator(&b, &part, ExchangePolicy::IdentityOnMedium).unwrap();
        let q = QuasiEvolution::new(&Operator::identity(&b), &p, &part).unwrap();
        assert_eq!(q.g.matrix, p.matrix);
    }

    #[test]
    fn two_site_closed_form() {
        let (j, tau) = (0.8f64, 1.1f64);
        let q = uniform_q(2, j, tau, ExchangePolicy::IdentityOnMedium);
        let (s, c) = (j * tau).sin_cos();
        let expected = CMatrix::from_row_slice(2, 2, &[c64(0.0, -s), real(c), real(c), c64(0.0, -s)]);
        assert!((q.g.matrix - expected).norm() < 1e-12);
    }

    #[test]
    fn christandl_two_sites_scalar() {
        let b = single(2);
        let h = hopping_hamiltonian(&ChainModel::christandl(ParticleKind::Fermion, 2, 1.0).unwrap(), &b).unwrap();
        let q = QuasiEvolution::from_hamiltonian(
            &h,
            std::f64::consts::PI,
            &RegionPartition::ends(2).unwrap(),
            ExchangePolicy::FullMirror,
        )
        .unwrap();
        assert!((q.g.matrix - identity(2) * c64(0.0, -1.0)).norm() < 1e-10);
    }

    #[test]
    fn non_unitary_rejected() {
        let b = single(2);
        let part = RegionPartition::ends(2).unwrap();
        let bad = Operator::new(b.clone(), identity(2) * real(2.0)).unwrap();
        assert!(QuasiEvolution::new(&bad, &Operator::identity(&b), &part).is_err());
    }

    #[test]
    fn two_site_transmission_set() {
        let q = uniform_q(2, 1.0, 0.7, ExchangePolicy::IdentityOnMedium);
        let r = transmission_set(&q).unwrap();
        assert_eq!(r.states.len(), 2);
        assert!(r.all_transmitted(TRANSMISSION_TOL));
        for k in 0..2 {
            let v = r.eigenvectors.column(k);
            assert!((v[0].norm() - v[1].norm()).abs() < 1e-12);
        }
    }

    #[test]
    fn vacuum_residual_zero() {
        let b = FockBasis::new(ParticleKind::Fermion, 3, Sector::Range(0, 1), None).unwrap();
        let h = hopping_hamiltonian(&ChainModel::uniform(ParticleKind::Fermion, 3, 1.0).unwrap(), &b).unwrap();
        let q = QuasiEvolution::from_hamiltonian(&h, 0.9, &RegionPartition::ends(3).unwrap(), ExchangePolicy::IdentityOnMedium)
            .unwrap();
        let vac = StateVector::vacuum(&b).unwrap();
        assert_eq!(verify_exact_transmission(&vac, &q.u, &q.partition).unwrap(), 0.0);
        let r = transmission_set(&q).unwrap();
        assert!(r.all_transmitted(TRANSMISSION_TOL));
    }

    #[test]
    fn static_state_residual() {
        let b = FockBasis::new(ParticleKind::Hardcore, 3, Sector::Range(0, 1), None).unwrap();
        let psi = StateVector::basis_state(&b, &[1, 0, 0]).unwrap();
        let r = verify_exact_transmission(&psi, &Operator::identity(&b), &RegionPartition::ends(3).unwrap()).unwrap();
        assert!((r - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn localization_examples() {
        let b = FockBasis::new(ParticleKind::Hardcore, 4, Sector::Range(0, 1), None).unwrap();
        let l = localization_report(&StateVector::single_particle(&b, 1).unwrap(), &[1]).unwrap();
        assert!(l.entropy.abs() < 1e-12 && (l.purity - 1.0).abs() < 1e-12 && (l.product_fidelity - 1.0).abs() < 1e-12);
        let l = localization_report(&StateVector::vacuum(&b).unwrap(), &[1]).unwrap();
        assert!(l.entropy.abs() < 1e-12 && (l.product_fidelity - 1.0).abs() < 1e-12);
        let mut amp = CVector::zeros(b.dim());
        amp[b.index_of(&[1, 0, 0, 0]).unwrap()] = real(1.0);
        amp[b.index_of(&[0, 0, 0, 1]).unwrap()] = real(1.0);
        let bell = StateVector::normalized(b.clone(), amp).unwrap();
        let l = localization_report(&bell, &[1]).unwrap();
        assert!((l.entropy - 2f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn pst_examples() {
        let b = FockBasis::new(ParticleKind::Hardcore, 2, Sector::Fixed(1), None).unwrap();
        let h = hopping_hamiltonian(&ChainModel::uniform(ParticleKind::Hardcore, 2, 1.0).unwrap(), &b).unwrap();
        let u = Operator::new(b.clone(), eig_hermitian(&h.matrix).unwrap().propagator(std::f64::consts::FRAC_PI_2)).unwrap();
        let input = CVector::from_vec(vec![real(0.0), real(1.0)]);
        let r = pst_fidelity(&u, &input, &RegionPartition::ends(2).unwrap()).unwrap();
        assert!((r.fidelity - 1.0).abs() < 1e-12);
        assert!((r.phase.unwrap() + std::f64::consts::FRAC_PI_2).abs() < 1e-12);

        let b = single(4);
        let h = hopping_hamiltonian(&ChainModel::uniform(ParticleKind::Fermion, 4, 1.0).unwrap(), &b).unwrap();
        let u = Operator::new(b.clone(), eig_hermitian(&h.matrix).unwrap().propagator(std::f64::consts::PI)).unwrap();
        let r = pst_fidelity(&u, &input, &RegionPartition::ends(4).unwrap()).unwrap();
        assert!(r.fidelity < 0.99 && r.phase.is_none());
    }

    #[test]
    fn revival_examples() {
        let one = ExpansionCoefficients::new(vec![real(0.0), real(1.0)]).unwrap();
        let r = revival_condition(&one, &[0.3, 2.0], 1e-9).unwrap();
        assert!(r.satisfiable && (r.witness.unwrap() - 2.0).abs() < 1e-12);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let two = ExpansionCoefficients::new(vec![real(h), real(h)]).unwrap();
        assert!(revival_condition(&two, &[1.1, 1.1], 1e-9).unwrap().satisfiable);
        assert!(!revival_condition(&two, &[0.0, std::f64::consts::PI], 1e-9).unwrap().satisfiable);
        assert!(revival_condition(&two, &[-std::f64::consts::PI + 1e-14, std::f64::consts::PI - 1e-14], 1e-9).unwrap().satisfiable);
        assert!(ExpansionCoefficients::new(vec![real(1.0), real(1.0)]).is_err());
    }

    #[test]
    fn mixed_state_undressed_limit() {
        let (c1, c2) = (c64(0.6, 0.0), c64(0.0, 0.8));
        let m = mixed_state_benchmark(4, 1.0, 0.0, c1, c2).unwrap();
        assert!(m.max_deviation < 1e-12);
        assert!((m.numeric[(0, 1)] - c1 * c2.conj()).norm() < 1e-12);
        assert!((m.purity - 1.0).abs() < 1e-12);
    }

    #[test]
    fn mixed_state_reference_instance() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let m = mixed_state_benchmark(3, 1.0, 3f64.sqrt(), real(h), real(h)).unwrap();
        let expected = [0.5, 0.375, 0.375, 9.0 / 32.0];
        for (x, e) in m.numeric.iter().zip(expected) {
            assert!((x - real(e)).norm() < 1e-12);
        }
        assert!(m.block_transfer_residual < 1e-10 && m.reduced_transfer_residual < 1e-10);
    }
}
