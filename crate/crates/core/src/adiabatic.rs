//! Time-dependent propagation of the swept Hubbard-type chain and the
//! adiabatic transfer diagnostics built on it.

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    exchange_operator, BasisRef, ExchangePolicy, FockBasis, Operator, ParticleKind, RegionPartition, Sector,
    StateVector,
};
use crate::models::{AdiabaticSchedule, AdiabaticTerms};
use crate::numerics::{eig_hermitian, identity, CMatrix};

pub const METHOD: &str = "midpoint-exponential";

/// Numerator of the default slowness criterion `tau >= SLOWNESS / min_gap^2`.
pub const SLOWNESS: f64 = 50.0;

#[derive(Debug, Clone)]
pub struct PropagationResult {
    pub state: StateVector,
    pub propagator: Option<Operator>,
    pub steps: usize,
    pub method: &'static str,
    pub times: Vec<f64>,
}

/// Piecewise-constant midpoint stepping of `i d/dt Psi = H(t) Psi` over `[0, total_time]`.
pub fn propagate_path<F>(
    hamiltonian: F,
    initial: &StateVector,
    total_time: f64,
    steps: usize,
    keep_propagator: bool,
) -> Result<PropagationResult>
where
    F: Fn(f64) -> Result<CMatrix>,
{
    if steps < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 steps, got {steps}")));
    }
    if !(total_time >= 0.0 && total_time.is_finite()) {
        return Err(Error::InvalidArgument(format!("invalid total time {total_time}")));
    }
    let basis = initial.basis.clone();
    let dt = total_time / steps as f64;
    let times: Vec<f64> = (0..=steps).map(|k| if k == steps { total_time } else { k as f64 * dt }).collect();
    let mut psi = initial.amplitudes.clone();
    let mut acc = keep_propagator.then(|| identity(basis.dim()));
    if total_time > 0.0 {
        for k in 0..steps {
            let h = hamiltonian(times[k] + 0.5 * (times[k + 1] - times[k]))?;
            if h.shape() != (basis.dim(), basis.dim()) {
                return Err(Error::DimensionMismatch("Hamiltonian does not match the state".into()));
            }
            let step = eig_hermitian(&h)?.propagator(times[k + 1] - times[k]);
            psi = &step * psi;
            if let Some(a) = acc.as_mut() {
                *a = &step * &*a;
            }
        }
    }
    let state = StateVector::new(basis.clone(), psi)?;
    let propagator = acc.map(|m| Operator::new(basis, m)).transpose()?;
    Ok(PropagationResult { state, propagator, steps, method: METHOD, times })
}

pub fn propagate_timedep(
    schedule: &AdiabaticSchedule,
    basis: &BasisRef,
    initial: &StateVector,
    steps: usize,
) -> Result<PropagationResult> {
    if initial.basis != *basis {
        return Err(Error::DimensionMismatch("initial state lives on a different basis".into()));
    }
    let terms = AdiabaticTerms::new(schedule, basis)?;
    propagate_path(|t| terms.at(schedule, t), initial, schedule.total_time(), steps, false)
}

/// Full propagator `U_ad(tau)` on `basis`.
pub fn adiabatic_propagator(schedule: &AdiabaticSchedule, basis: &BasisRef, steps: usize) -> Result<Operator> {
    let terms = AdiabaticTerms::new(schedule, basis)?;
    let start = StateVector::normalized(basis.clone(), identity(basis.dim()).column(0).into_owned())?;
    let r = propagate_path(|t| terms.at(schedule, t), &start, schedule.total_time(), steps, true)?;
    Ok(r.propagator.expect("propagator requested"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GapProfile {
    pub times: Vec<f64>,
    /// Ascending eigenvalues at each time.
    pub spectra: Vec<Vec<f64>>,
    /// Gap from the tracked level to its nearest neighbour at each time.
    pub gaps: Vec<f64>,
    pub min_gap: f64,
    pub min_gap_time: f64,
}

pub fn min_gap(schedule: &AdiabaticSchedule, basis: &BasisRef, level: usize, samples: usize) -> Result<GapProfile> {
    if samples < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 samples, got {samples}")));
    }
    if basis.dim() < 2 || level >= basis.dim() {
        return Err(Error::InvalidArgument(format!("level {level} has no neighbour in a {}-state basis", basis.dim())));
    }
    let terms = AdiabaticTerms::new(schedule, basis)?;
    let tau = schedule.total_time();
    let times: Vec<f64> =
        (0..samples).map(|k| if k + 1 == samples { tau } else { tau * k as f64 / (samples - 1) as f64 }).collect();
    let spectra = times
        .iter()
        .map(|&t| Ok(eig_hermitian(&terms.at(schedule, t)?)?.eigenvalues))
        .collect::<Result<Vec<_>>>()?;
    let gaps: Vec<f64> = spectra
        .iter()
        .map(|e| {
            let above = e.get(level + 1).map(|x| x - e[level]);
            let below = level.checked_sub(1).map(|k| e[level] - e[k]);
            above.into_iter().chain(below).fold(f64::INFINITY, f64::min).max(0.0)
        })
        .collect();
    let (k, &min) = gaps.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("samples >= 3");
    Ok(GapProfile { min_gap: min, min_gap_time: times[k], times, spectra, gaps })
}

/// `SLOWNESS / gap^2`.
pub fn suggested_total_time(gap: f64) -> f64 {
    SLOWNESS / (gap * gap)
}

/// Steps giving a time step no larger than `dt`, and never fewer than `min_steps`.
pub fn steps_for(total_time: f64, dt: f64, min_steps: usize) -> usize {
    ((total_time / dt).ceil() as usize).max(min_steps).max(2)
}

/// `tau_0, 2 tau_0, 4 tau_0, ...`.
pub fn tau_ladder(tau0: f64, rungs: usize) -> Vec<f64> {
    (0..rungs).map(|k| tau0 * (1u64 << k) as f64).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdiabaticTransfer {
    /// `|<0| a_N Psi(tau)>|`.
    pub fidelity: f64,
    /// `-arg <0| a_N Psi(tau)>`.
    pub phase: f64,
    /// `|| G_ad a_1^dag|0> - exp(-i phase) a_1^dag|0> ||`.
    pub eq8_residual: f64,
}

fn single_particle_basis(schedule: &AdiabaticSchedule, kind: ParticleKind) -> Result<BasisRef> {
    FockBasis::new(kind, schedule.sites(), Sector::Fixed(1), None)
}

/// Drags `a_1^dag|0>` through the sweep on `basis`, which must contain the
/// one-particle states.
pub fn adiabatic_transfer_report(schedule: &AdiabaticSchedule, basis: &BasisRef, steps: usize) -> Result<AdiabaticTransfer> {
    let n = schedule.sites();
    let initial = StateVector::single_particle(basis, 1)?;
    let out = propagate_timedep(schedule, basis, &initial, steps)?.state;
    let mut last = vec![0u8; n];
    last[n - 1] = 1;
    let amp = out.amplitude(&last);
    let phase = -amp.arg();
    let p = exchange_operator(basis, &RegionPartition::ends(n)?, ExchangePolicy::IdentityOnMedium)?;
    let returned = p.apply(&out)?;
    let eq8_residual = (&returned.amplitudes - &initial.amplitudes * C64::from_polar(1.0, -phase)).norm();
    Ok(AdiabaticTransfer { fidelity: amp.norm(), phase, eq8_residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperpositionTransfer {
    /// `|<expected|Psi(tau)>|^2` with `expected = C1|0> + C2 exp(-i phase) a_N^dag|0>`.
    pub fidelity: f64,
    pub phase: f64,
    pub single: AdiabaticTransfer,
}

/// Runs `a_1^dag|0>` alone to extract the phase, then `C1|0> + C2 a_1^dag|0>`
/// on the vacuum plus one-particle space.
pub fn superposition_transfer(
    schedule: &AdiabaticSchedule,
    kind: ParticleKind,
    c1: C64,
    c2: C64,
    steps: usize,
) -> Result<SuperpositionTransfer> {
    let n = schedule.sites();
    let single = adiabatic_transfer_report(schedule, &single_particle_basis(schedule, kind)?, steps)?;
    let basis = FockBasis::new(kind, n, Sector::Range(0, 1), None)?;
    let vacuum = StateVector::vacuum(&basis)?;
    let first = StateVector::single_particle(&basis, 1)?;
    let last = StateVector::single_particle(&basis, n)?;
    let initial = StateVector::new(basis.clone(), &vacuum.amplitudes * c1 + &first.amplitudes * c2)?;
    let out = propagate_timedep(schedule, &basis, &initial, steps)?.state;
    let expected = StateVector::new(
        basis.clone(),
        &vacuum.amplitudes * c1 + &last.amplitudes * (c2 * C64::from_polar(1.0, -single.phase)),
    )?;
    Ok(SuperpositionTransfer { fidelity: expected.inner(&out).norm_sqr(), phase: single.phase, single })
}

#[derive(Debug, Clone)]
pub struct GroundStateTransfer {
    /// `|<target|Psi(tau)>|^2`.
    pub fidelity: f64,
    pub initial: StateVector,
    pub target: StateVector,
    pub final_state: StateVector,
}

fn lowest(h: &CMatrix, basis: &BasisRef) -> Result<StateVector> {
    let e = eig_hermitian(h)?;
    if e.eigenvalues.len() > 1 && e.eigenvalues[1] - e.eigenvalues[0] < 1e-9 {
        return Err(Error::InvalidState("lowest level is degenerate".into()));
    }
    StateVector::new(basis.clone(), e.eigenvectors.column(0).into_owned())
}

/// Starts in the lowest state of `H(0)` on `basis` and compares the result with the lowest state of `H(tau)`.
pub fn ground_state_transfer(schedule: &AdiabaticSchedule, basis: &BasisRef, steps: usize) -> Result<GroundStateTransfer> {
    let terms = AdiabaticTerms::new(schedule, basis)?;
    let initial = lowest(&terms.at(schedule, 0.0)?, basis)?;
    let target = lowest(&terms.at(schedule, schedule.total_time())?, basis)?;
    let final_state = propagate_timedep(schedule, basis, &initial, steps)?.state;
    Ok(GroundStateTransfer { fidelity: target.inner(&final_state).norm_sqr(), initial, target, final_state })
}

/// One row of a fidelity-versus-time curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub tau: f64,
    pub fidelity: f64,
    pub phase: f64,
    pub min_gap: f64,
    pub eq8_residual: f64,
}

/// Single-particle transfer at each total time, evaluated in parallel.
pub fn transfer_sweep(
    schedule: &AdiabaticSchedule,
    kind: ParticleKind,
    taus: &[f64],
    dt: f64,
    min_steps: usize,
    gap_samples: usize,
) -> Result<Vec<SweepRow>> {
    let basis = single_particle_basis(schedule, kind)?;
    taus.par_iter()
        .map(|&tau| {
            let s = schedule.clone().with_total_time(tau)?;
            let r = adiabatic_transfer_report(&s, &basis, steps_for(tau, dt, min_steps))?;
            let gap = min_gap(&s, &basis, 0, gap_samples)?;
            Ok(SweepRow { tau, fidelity: r.fidelity, phase: r.phase, min_gap: gap.min_gap, eq8_residual: r.eq8_residual })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{expm_skew, real};

    fn schedule(n: usize, tau: f64) -> AdiabaticSchedule {
        AdiabaticSchedule::with_default_onsite(n, tau, 1.0, 1.0).unwrap()
    }

    fn single(n: usize) -> BasisRef {
        FockBasis::new(ParticleKind::Hardcore, n, Sector::Fixed(1), None).unwrap()
    }

    #[test]
    fn constant_hamiltonian_matches_exponential() {
        let b = single(3);
        let h = CMatrix::from_fn(3, 3, |i, j| real(if i == j { i as f64 } else { 0.4 }));
        let psi = StateVector::single_particle(&b, 1).unwrap();
        let r = propagate_path(|_| Ok(h.clone()), &psi, 2.5, 100, true).unwrap();
        let exact = expm_skew(&h, 2.5).unwrap();
        assert!((&r.state.amplitudes - &exact * &psi.amplitudes).norm() < 1e-9);
        assert!((r.propagator.unwrap().matrix - exact).norm() < 1e-9);
        assert_eq!(r.times.len(), 101);
    }

    #[test]
    fn zero_duration_is_identity() {
        let s = schedule(3, 0.0);
        let b = single(3);
        let psi = StateVector::single_particle(&b, 2).unwrap();
        let r = propagate_timedep(&s, &b, &psi, 10).unwrap();
        assert_eq!(r.state.amplitudes, psi.amplitudes);
    }

    #[test]
    fn second_order_convergence() {
        let s = schedule(3, 6.0);
        let b = single(3);
        let psi = StateVector::single_particle(&b, 1).unwrap();
        let run = |k| propagate_timedep(&s, &b, &psi, k).unwrap().state.amplitudes;
        let (a, c, d) = (run(100), run(200), run(400));
        let ratio = (&a - &c).norm() / (&c - &d).norm();
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
        assert!((d.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_input() {
        let s = schedule(3, 1.0);
        let b = single(3);
        let psi = StateVector::single_particle(&b, 1).unwrap();
        assert!(propagate_timedep(&s, &b, &psi, 1).is_err());
        assert!(propagate_timedep(&s, &single(4), &psi, 10).is_err());
    }

    #[test]
    fn diabatic_gap_profile() {
        let s = AdiabaticSchedule::with_default_onsite(3, 4.0, 0.0, 2.0).unwrap();
        let g = min_gap(&s, &single(3), 0, 3).unwrap();
        assert_eq!(g.spectra.len(), 3);
        assert!((g.gaps[0] - 2.0).abs() < 1e-12 && (g.gaps[2] - 2.0).abs() < 1e-12);
        assert!(g.gaps[1].abs() < 1e-12);
        assert_eq!(g.min_gap_time, 2.0);
    }

    #[test]
    fn two_site_avoided_crossing() {
        let s = schedule(2, 10.0);
        let g = min_gap(&s, &single(2), 0, 101).unwrap();
        for (t, gap) in g.times.iter().zip(&g.gaps) {
            let (j, w) = (s.coupling(*t).unwrap(), s.bias(*t).unwrap());
            assert!((gap - (w * w + 4.0 * j * j).sqrt()).abs() < 1e-12);
        }
        assert!(g.min_gap > 0.9);
    }

    #[test]
    fn slow_and_fast_two_site_transfer() {
        let b = single(2);
        let slow = adiabatic_transfer_report(&schedule(2, 200.0), &b, 4000).unwrap();
        assert!(slow.fidelity >= 0.999);
        assert!((slow.eq8_residual - (2.0 * (1.0 - slow.fidelity)).sqrt()).abs() < 1e-9);
        let fast = adiabatic_transfer_report(&schedule(2, 0.05), &b, 50).unwrap();
        assert!(fast.fidelity < 0.1);
    }

    #[test]
    fn ladder() {
        assert_eq!(tau_ladder(3.0, 4), vec![3.0, 6.0, 12.0, 24.0]);
        assert_eq!(steps_for(10.0, 0.1, 5), 100);
        assert_eq!(steps_for(0.0, 0.1, 5), 5);
    }
}
