use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hilbert::{BasisRef, Operator, ParticleKind};
use crate::numerics::{real, CMatrix};

use super::{bond_sum, onsite_sum};

const PARITY_SAMPLES: usize = 64;
const PARITY_TOL: f64 = 1e-10;

/// Profile of the hopping amplitude as a function of `u = 2 Delta / tau` in `[-1, 1]`.
/// Must be even with `f(+-1) = 0`.
#[derive(Debug, Clone, Copy)]
pub enum CouplingShape {
    /// `cos(pi u / 2)`.
    Cosine,
    /// `cos^3(pi u / 2)`.
    CosineCubed,
    Custom(fn(f64) -> f64),
}

impl CouplingShape {
    pub fn eval(self, u: f64) -> f64 {
        match self {
            CouplingShape::Cosine => (PI * u / 2.0).cos(),
            CouplingShape::CosineCubed => (PI * u / 2.0).cos().powi(3),
            CouplingShape::Custom(f) => f(u),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CouplingShape::Cosine => "cosine",
            CouplingShape::CosineCubed => "cosine-cubed",
            CouplingShape::Custom(_) => "custom",
        }
    }
}

/// Profile of the bias as a function of `u`. Must be odd with `g(1) > 0`.
#[derive(Debug, Clone, Copy)]
pub enum BiasShape {
    /// `u`.
    Linear,
    /// `sin(pi u / 2)`.
    Sine,
    Custom(fn(f64) -> f64),
}

impl BiasShape {
    pub fn eval(self, u: f64) -> f64 {
        match self {
            BiasShape::Linear => u,
            BiasShape::Sine => (PI * u / 2.0).sin(),
            BiasShape::Custom(g) => g(u),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BiasShape::Linear => "linear",
            BiasShape::Sine => "sine",
            BiasShape::Custom(_) => "custom",
        }
    }
}

/// `H(t) = -J(Delta) T_h + omega(Delta) h_s + H_U` with `Delta = tau/2 - t`,
/// `J(Delta) = J_0 f(2 Delta / tau)` and `omega(Delta) = omega_0 g(2 Delta / tau)`.
#[derive(Debug, Clone)]
pub struct AdiabaticSchedule {
    total_time: f64,
    j_amplitude: f64,
    omega_amplitude: f64,
    onsite: Vec<f64>,
    repulsion: f64,
    coupling_shape: CouplingShape,
    bias_shape: BiasShape,
}

impl AdiabaticSchedule {
    /// Cosine hopping and linear bias.
    pub fn new(total_time: f64, j_amplitude: f64, omega_amplitude: f64, onsite: Vec<f64>) -> Result<Self> {
        let s = Self {
            total_time,
            j_amplitude,
            omega_amplitude,
            onsite,
            repulsion: 0.0,
            coupling_shape: CouplingShape::Cosine,
            bias_shape: BiasShape::Linear,
        };
        s.validate()?;
        Ok(s)
    }

    /// `eps_j = j`.
    pub fn with_default_onsite(sites: usize, total_time: f64, j_amplitude: f64, omega_amplitude: f64) -> Result<Self> {
        Self::new(total_time, j_amplitude, omega_amplitude, (1..=sites).map(|j| j as f64).collect())
    }

    pub fn with_coupling_shape(mut self, shape: CouplingShape) -> Result<Self> {
        self.coupling_shape = shape;
        self.validate()?;
        Ok(self)
    }

    pub fn with_bias_shape(mut self, shape: BiasShape) -> Result<Self> {
        self.bias_shape = shape;
        self.validate()?;
        Ok(self)
    }

    pub fn with_repulsion(mut self, u: f64) -> Result<Self> {
        self.repulsion = u;
        self.validate()?;
        Ok(self)
    }

    pub fn with_total_time(mut self, tau: f64) -> Result<Self> {
        self.total_time = tau;
        self.validate()?;
        Ok(self)
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn j_amplitude(&self) -> f64 {
        self.j_amplitude
    }

    pub fn omega_amplitude(&self) -> f64 {
        self.omega_amplitude
    }

    pub fn onsite(&self) -> &[f64] {
        &self.onsite
    }

    pub fn sites(&self) -> usize {
        self.onsite.len()
    }

    pub fn repulsion(&self) -> f64 {
        self.repulsion
    }

    pub fn coupling_shape(&self) -> CouplingShape {
        self.coupling_shape
    }

    pub fn bias_shape(&self) -> BiasShape {
        self.bias_shape
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSchedule(m));
        if !(self.total_time >= 0.0 && self.total_time.is_finite()) {
            return bad(format!("total time must be finite and non-negative, got {}", self.total_time));
        }
        if !(self.j_amplitude >= 0.0 && self.j_amplitude.is_finite()) {
            return bad(format!("hopping amplitude must be finite and non-negative, got {}", self.j_amplitude));
        }
        if !(self.omega_amplitude > 0.0 && self.omega_amplitude.is_finite()) {
            return bad(format!("bias amplitude must be finite and positive, got {}", self.omega_amplitude));
        }
        if self.onsite.len() < 2 {
            return bad("at least two sites are required".into());
        }
        if self.onsite.iter().any(|e| !e.is_finite()) || self.onsite.windows(2).any(|w| w[0] >= w[1]) {
            return bad("on-site energies must be finite and strictly increasing".into());
        }
        if !self.repulsion.is_finite() {
            return bad("repulsion must be finite".into());
        }
        let (f, g) = (self.coupling_shape, self.bias_shape);
        for k in 0..=PARITY_SAMPLES {
            let u = k as f64 / PARITY_SAMPLES as f64;
            let (fp, fm, gp, gm) = (f.eval(u), f.eval(-u), g.eval(u), g.eval(-u));
            if ![fp, fm, gp, gm].iter().all(|x| x.is_finite()) {
                return bad(format!("shape is not finite at u = {u}"));
            }
            if (fp - fm).abs() > PARITY_TOL * fp.abs().max(1.0) {
                return bad(format!("hopping shape `{}` is not even at u = {u}", f.name()));
            }
            if (gp + gm).abs() > PARITY_TOL * gp.abs().max(1.0) {
                return bad(format!("bias shape `{}` is not odd at u = {u}", g.name()));
            }
        }
        if f.eval(1.0).abs() > PARITY_TOL {
            return bad(format!("hopping shape `{}` does not vanish at the endpoints", f.name()));
        }
        if !(g.eval(1.0) > 0.0) {
            return bad(format!("bias shape `{}` must be positive at the start", g.name()));
        }
        Ok(())
    }

    fn reduced(&self, t: f64) -> Result<f64> {
        if !(0.0..=self.total_time).contains(&t) {
            return Err(Error::InvalidArgument(format!("time {t} outside [0, {}]", self.total_time)));
        }
        if self.total_time == 0.0 {
            return Ok(1.0);
        }
        Ok(1.0 - 2.0 * t / self.total_time)
    }

    /// `J(Delta(t))`; exactly zero at both ends.
    pub fn coupling(&self, t: f64) -> Result<f64> {
        let u = self.reduced(t)?;
        if u.abs() >= 1.0 {
            return Ok(0.0);
        }
        Ok(self.j_amplitude * self.coupling_shape.eval(u))
    }

    /// `omega(Delta(t))`; exactly `+-omega(tau/2)` at the ends and zero at the midpoint.
    pub fn bias(&self, t: f64) -> Result<f64> {
        let u = self.reduced(t)?;
        let g = self.bias_shape;
        Ok(self.omega_amplitude
            * if u >= 1.0 {
                g.eval(1.0)
            } else if u <= -1.0 {
                -g.eval(1.0)
            } else if u == 0.0 {
                0.0
            } else {
                g.eval(u)
            })
    }
}

/// The time-independent pieces `T_h`, `h_s`, `H_U` on one basis.
#[derive(Debug, Clone)]
pub struct AdiabaticTerms {
    pub basis: BasisRef,
    pub hopping: CMatrix,
    pub bias: CMatrix,
    pub repulsion: CMatrix,
}

impl AdiabaticTerms {
    pub fn new(schedule: &AdiabaticSchedule, basis: &BasisRef) -> Result<Self> {
        schedule.validate()?;
        if basis.sites() != schedule.sites() {
            return Err(Error::DimensionMismatch(format!(
                "schedule has {} sites, basis has {}",
                schedule.sites(),
                basis.sites()
            )));
        }
        if schedule.repulsion() != 0.0 && basis.kind() != ParticleKind::Boson {
            return Err(Error::InvalidModel("on-site repulsion applies to bosons only".into()));
        }
        let eps = schedule.onsite();
        let u = schedule.repulsion();
        Ok(Self {
            basis: basis.clone(),
            hopping: bond_sum(basis, |_| real(1.0)),
            bias: onsite_sum(basis, |j, n| eps[j] * n as f64),
            repulsion: onsite_sum(basis, |_, n| u * n as f64 * (n as f64 - 1.0)),
        })
    }

    pub fn at(&self, schedule: &AdiabaticSchedule, t: f64) -> Result<CMatrix> {
        let (j, w) = (schedule.coupling(t)?, schedule.bias(t)?);
        Ok(&self.hopping * real(-j) + &self.bias * real(w) + &self.repulsion)
    }
}

/// `H(t)` on `basis`.
pub fn adiabatic_hamiltonian(schedule: &AdiabaticSchedule, t: f64, basis: &BasisRef) -> Result<Operator> {
    let terms = AdiabaticTerms::new(schedule, basis)?;
    Operator::new(basis.clone(), terms.at(schedule, t)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{FockBasis, Sector};

    fn basis(n: usize) -> BasisRef {
        FockBasis::new(ParticleKind::Fermion, n, Sector::Fixed(1), None).unwrap()
    }

    #[test]
    fn endpoints_are_exact() {
        let s = AdiabaticSchedule::with_default_onsite(4, 10.0, 1.0, 2.0).unwrap();
        let b = basis(4);
        let terms = AdiabaticTerms::new(&s, &b).unwrap();
        let h0 = adiabatic_hamiltonian(&s, 0.0, &b).unwrap();
        assert_eq!(h0.matrix, &terms.bias * real(2.0) + &terms.repulsion);
        let h1 = adiabatic_hamiltonian(&s, 10.0, &b).unwrap();
        assert_eq!(h1.matrix, &terms.bias * real(-2.0) + &terms.repulsion);
        let hm = adiabatic_hamiltonian(&s, 5.0, &b).unwrap();
        assert_eq!(hm.matrix, &terms.hopping * real(-1.0));
        assert!(h0.matrix.iter().enumerate().all(|(k, x)| k % 5 == 0 || *x == real(0.0)));
    }

    #[test]
    fn default_shapes_satisfy_constraints() {
        let s = AdiabaticSchedule::with_default_onsite(3, 7.0, 1.3, 0.4).unwrap();
        for k in 0..=20 {
            let t = 7.0 * k as f64 / 20.0;
            let mirror = 7.0 - t;
            assert!((s.coupling(t).unwrap() - s.coupling(mirror).unwrap()).abs() < 1e-12);
            assert!((s.bias(t).unwrap() + s.bias(mirror).unwrap()).abs() < 1e-12);
            let delta = 3.5 - t;
            assert!((s.coupling(t).unwrap() - 1.3 * (PI * delta / 7.0).cos()).abs() < 1e-12 || k == 0 || k == 20);
            assert!((s.bias(t).unwrap() - 0.4 * 2.0 * delta / 7.0).abs() < 1e-12);
        }
        assert_eq!(s.bias(0.0).unwrap(), 0.4);
    }

    #[test]
    fn parity_violations_rejected() {
        let s = AdiabaticSchedule::with_default_onsite(3, 1.0, 1.0, 1.0).unwrap();
        assert!(s.clone().with_coupling_shape(CouplingShape::Custom(|u| 1.0 - u)).is_err());
        assert!(s.clone().with_coupling_shape(CouplingShape::Custom(|u| 1.0 - u * u * 0.5)).is_err());
        assert!(s.clone().with_bias_shape(BiasShape::Custom(|u| u * u)).is_err());
        assert!(s.clone().with_bias_shape(BiasShape::Custom(|u| -u)).is_err());
        assert!(s.clone().with_coupling_shape(CouplingShape::CosineCubed).is_ok());
        assert!(s.with_bias_shape(BiasShape::Sine).is_ok());
    }

    #[test]
    fn bad_parameters_rejected() {
        assert!(AdiabaticSchedule::new(1.0, 1.0, 1.0, vec![1.0, 1.0, 2.0]).is_err());
        assert!(AdiabaticSchedule::new(1.0, 1.0, 0.0, vec![1.0, 2.0]).is_err());
        assert!(AdiabaticSchedule::new(-1.0, 1.0, 1.0, vec![1.0, 2.0]).is_err());
        assert!(AdiabaticSchedule::new(1.0, 0.0, 1.0, vec![1.0, 2.0]).is_ok());
        let s = AdiabaticSchedule::with_default_onsite(3, 1.0, 1.0, 1.0).unwrap();
        assert!(s.coupling(1.5).is_err());
        let s = s.with_repulsion(1.0).unwrap();
        assert!(AdiabaticTerms::new(&s, &basis(3)).is_err());
    }
}
