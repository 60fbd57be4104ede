use std::io::Write;
use std::path::Path;
use std::time::Instant;

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use super::config::{Analysis, RunConfig};
use crate::adiabatic::{adiabatic_propagator, adiabatic_transfer_report, min_gap, steps_for, transfer_sweep};
use crate::error::{Error, Result};
use crate::hilbert::{
    embed_local_state, exchange_operator, BasisRef, FockBasis, Operator, RegionPartition,
};
use crate::models::{
    dressing_transform, hopping_hamiltonian, swap_network_propagator, AdiabaticSchedule, ChainModel, Dressing,
    ModelName,
};
use crate::numerics::{expm_skew, unitarity_deviation, CMatrix, CVector};
use crate::transmission::{
    dressed_exchange, mixed_state_benchmark, pst_fidelity, revival_condition, transmission_set_with,
    verify_exact_transmission, ExpansionCoefficients, Localization, QuasiEvolution,
};

/// Samples of the instantaneous spectrum used for the minimum gap.
pub const GAP_SAMPLES: usize = 201;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Bound {
    Max,
    Min,
}

/// One pass/fail check: `value <= bound` for `Max`, `value >= bound` for `Min`.
#[derive(Debug, Clone, Serialize)]
pub struct Gate {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub kind: Bound,
    pub passed: bool,
}

impl Gate {
    fn new(name: &str, value: f64, bound: f64, kind: Bound) -> Self {
        let passed = match kind {
            Bound::Max => value <= bound,
            Bound::Min => value >= bound,
        };
        Self { name: name.into(), value, bound, kind, passed }
    }

    fn max(name: &str, value: f64, bound: f64) -> Self {
        Self::new(name, value, bound, Bound::Max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub tau: f64,
    pub fidelity: f64,
    pub phase: Option<f64>,
    pub min_gap: Option<f64>,
    pub eq8_residual: Option<f64>,
}

/// Everything a run produces, including the configuration it came from.
#[derive(Debug, Clone, Serialize)]
pub struct ReportDocument {
    pub tool: &'static str,
    pub version: &'static str,
    pub analysis: Analysis,
    pub config: RunConfig,
    pub duration_seconds: f64,
    pub passed: bool,
    pub gates: Vec<Gate>,
    pub eigenphases: Vec<f64>,
    pub residuals: Vec<f64>,
    pub localization: Vec<Localization>,
    pub fidelity: Option<f64>,
    pub phase: Option<f64>,
    pub min_gap: Option<f64>,
    pub eq8_residual: Option<f64>,
    pub details: Value,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rows: Vec<SweepPoint>,
}

impl ReportDocument {
    fn empty(config: &RunConfig) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            analysis: config.analysis,
            config: config.clone(),
            duration_seconds: 0.0,
            passed: false,
            gates: Vec::new(),
            eigenphases: Vec::new(),
            residuals: Vec::new(),
            localization: Vec::new(),
            fidelity: None,
            phase: None,
            min_gap: None,
            eq8_residual: None,
            details: Value::Null,
            rows: Vec::new(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Serialize(e.to_string()))
    }

    /// `tau,fidelity,phase,min_gap,eq8_residual`, blank where a column does not apply.
    pub fn to_csv(&self) -> String {
        let cell = |x: Option<f64>| x.map(|v| format!("{v:.12e}")).unwrap_or_default();
        let mut out = String::from("tau,fidelity,phase,min_gap,eq8_residual\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                cell(Some(r.tau)),
                cell(Some(r.fidelity)),
                cell(r.phase),
                cell(r.min_gap),
                cell(r.eq8_residual)
            ));
        }
        out
    }
}

fn matrix_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows()).map(|r| Value::Array((0..m.ncols()).map(|c| json!([m[(r, c)].re, m[(r, c)].im])).collect())).collect(),
    )
}

fn c64_of(p: [f64; 2]) -> C64 {
    C64::new(p[0], p[1])
}

pub fn basis_for(config: &RunConfig) -> Result<BasisRef> {
    FockBasis::new(config.kind, config.sites, config.sector, config.cutoff)
}

pub fn schedule_for(config: &RunConfig, tau: f64) -> Result<AdiabaticSchedule> {
    AdiabaticSchedule::with_default_onsite(config.sites, tau, config.hopping_amplitude(), config.omega0)?
        .with_coupling_shape(config.coupling_shape.shape())?
        .with_bias_shape(config.bias_shape.shape())?
        .with_repulsion(config.repulsion)
}

fn static_model(config: &RunConfig) -> Result<ChainModel> {
    let (kind, n, j) = (config.kind, config.sites, config.j);
    let model = match config.model {
        ModelName::Uniform => ChainModel::uniform(kind, n, j)?,
        ModelName::Christandl => ChainModel::christandl(kind, n, j)?,
        ModelName::DressedPhase => ChainModel::christandl(kind, n, j)?.with_hopping_phase(config.theta),
        ModelName::DressedCollective => ChainModel::christandl(kind, n, j)?.with_linear_bias(config.eps),
        other => return Err(Error::InvalidModel(format!("{} has no static Hamiltonian", other.as_str()))),
    };
    if config.repulsion != 0.0 {
        model.with_repulsion(config.repulsion)
    } else {
        Ok(model)
    }
}

/// The evolution over `tau` for the configured model.
pub fn propagator_for(config: &RunConfig, basis: &BasisRef, tau: f64) -> Result<Operator> {
    match config.model {
        ModelName::SwapNetwork => swap_network_propagator(basis),
        ModelName::Adiabatic => {
            adiabatic_propagator(&schedule_for(config, tau)?, basis, steps_for(tau, config.dt, 2))
        }
        _ => {
            let h = hopping_hamiltonian(&static_model(config)?, basis)?;
            Operator::new(basis.clone(), expm_skew(&h.matrix, tau)?)
        }
    }
}

/// The configured exchange, conjugated by the model's dressing when requested.
pub fn exchange_for(config: &RunConfig, basis: &BasisRef, partition: &RegionPartition) -> Result<Operator> {
    let p = exchange_operator(basis, partition, config.policy)?;
    if !config.dressed_exchange {
        return Ok(p);
    }
    let dressing = match config.model {
        ModelName::DressedPhase => Dressing::SitePhase(config.theta),
        ModelName::DressedCollective => Dressing::CollectiveRotation((config.eps / config.j).atan()),
        other => {
            return Err(Error::InvalidModel(format!("{} has no dressing for the exchange", other.as_str())));
        }
    };
    dressed_exchange(&dressing_transform(basis, dressing)?, &p)
}

/// The configured local input on A, or one particle on the first site of A.
pub fn input_for(config: &RunConfig, basis: &BasisRef) -> Result<CVector> {
    let d = basis.local_dim();
    let len = d.pow(config.region_a.len() as u32);
    match &config.input {
        Some(v) if v.len() != len => Err(Error::DimensionMismatch(format!(
            "input has {} amplitudes, region A needs {len}",
            v.len()
        ))),
        Some(v) => Ok(CVector::from_iterator(len, v.iter().map(|&p| c64_of(p)))),
        None => {
            let mut e = CVector::zeros(len);
            e[d.pow(config.region_a.len() as u32 - 1)] = C64::new(1.0, 0.0);
            Ok(e)
        }
    }
}

/// A seeded random input on A supported on configurations the sector admits with the rest empty.
pub fn random_input(config: &RunConfig, basis: &BasisRef) -> Result<CVector> {
    let d = basis.local_dim();
    let k = config.region_a.len();
    let len = d.pow(k as u32);
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut v = CVector::zeros(len);
    for i in 0..len {
        let (mut rest, mut count) = (i, 0usize);
        for _ in 0..k {
            count += rest % d;
            rest /= d;
        }
        if config.sector.contains(count) {
            v[i] = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        }
    }
    let norm = v.norm();
    if norm == 0.0 {
        return Err(Error::EmptySector("no configuration of A fits the sector".into()));
    }
    Ok(v / C64::new(norm, 0.0))
}

fn required_tau(config: &RunConfig) -> Result<f64> {
    match config.tau_value()? {
        Some(t) => Ok(t),
        None if config.model == ModelName::SwapNetwork => Ok(0.0),
        None => Err(Error::Config(vec![crate::error::ConfigIssue::new("tau", "missing required key")])),
    }
}

fn quasi_evolution(config: &RunConfig) -> Result<(QuasiEvolution, f64)> {
    let basis = basis_for(config)?;
    let partition = config.partition()?;
    let tau = required_tau(config)?;
    let u = propagator_for(config, &basis, tau)?;
    let p = exchange_for(config, &basis, &partition)?;
    Ok((QuasiEvolution::new(&u, &p, &partition)?, tau))
}

/// Runs the configured analysis on a pool of `workers` threads (all cores when `None`).
pub fn execute(config: &RunConfig, workers: Option<usize>) -> Result<ReportDocument> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w.max(1));
    }
    let pool = builder.build().map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let start = Instant::now();
    let mut doc = pool.install(|| execute_inner(config))?;
    doc.duration_seconds = start.elapsed().as_secs_f64();
    doc.passed = doc.gates.iter().all(|g| g.passed);
    Ok(doc)
}

fn execute_inner(config: &RunConfig) -> Result<ReportDocument> {
    let mut doc = ReportDocument::empty(config);
    let tol = config.tol;
    match config.analysis {
        Analysis::Spectrum => {
            let (q, tau) = quasi_evolution(config)?;
            let eig = q.eigensystem(config.cluster_tol)?;
            doc.residuals = (0..eig.dim()).map(|k| eig.residual(&q.g.matrix, k)).collect();
            doc.gates.push(Gate::max("unitarity", unitarity_deviation(&q.g.matrix), tol));
            doc.gates.push(Gate::max("eigen_residual", eig.max_residual(&q.g.matrix), tol));
            doc.details = json!({ "tau": tau, "dim": eig.dim(), "clusters": eig.clusters });
            doc.eigenphases = eig.eigenphases;
        }
        Analysis::Transmit => {
            let (q, tau) = quasi_evolution(config)?;
            let report = transmission_set_with(&q, config.cluster_tol)?;
            doc.eigenphases = report.phases();
            doc.residuals = report.residuals();
            doc.localization = report.states.iter().map(|s| s.localization).collect();
            doc.gates.push(Gate::max("eigen_residual", report.max_eigen_residual, tol));
            // a dressed exchange relates the two regions only up to the dressing's local phases
            if !config.dressed_exchange {
                doc.gates.push(Gate::max("transmission_residual", report.max_residual(), tol));
            }
            let weights: Vec<Value> = report
                .states
                .iter()
                .map(|s| Value::Array(s.weights.iter().map(|(occ, w)| json!({ "occupation": occ, "weight": w })).collect()))
                .collect();
            doc.details = json!({ "tau": tau, "clusters": report.clusters, "weights_on_a": weights });
        }
        Analysis::Pst => {
            let basis = basis_for(config)?;
            let partition = config.partition()?;
            let tau = required_tau(config)?;
            let u = propagator_for(config, &basis, tau)?;
            let input = input_for(config, &basis)?;
            let r = pst_fidelity(&u, &input, &partition)?;
            doc.fidelity = Some(r.fidelity);
            doc.phase = r.phase;
            if let Some(req) = config.require_fidelity {
                doc.gates.push(Gate::new("fidelity", r.fidelity, req, Bound::Min));
            }
            doc.details = json!({ "tau": tau });
        }
        Analysis::Revival => {
            let (q, tau) = quasi_evolution(config)?;
            let basis = q.basis().clone();
            let eig = q.eigensystem(config.cluster_tol)?;
            let input = match config.input {
                Some(_) => input_for(config, &basis)?,
                None => random_input(config, &basis)?,
            };
            let psi = embed_local_state(&basis, q.partition.region_a(), &input)?;
            let c = ExpansionCoefficients::from_state(&eig, &psi)?;
            let revival = revival_condition(&c, &eig.eigenphases, tol)?;
            let residual = verify_exact_transmission(&psi, &q.u, &q.partition)?;
            doc.gates.push(Gate::max("eigen_residual", eig.max_residual(&q.g.matrix), tol));
            let mut return_residual = None;
            if let Some(w) = revival.witness {
                let returned = q.g.apply(&psi)?;
                let r = (&returned.amplitudes - &psi.amplitudes * C64::from_polar(1.0, w)).norm();
                return_residual = Some(r);
                // each active phase lies within tol of the witness
                doc.gates.push(Gate::max("return_when_revived", r, tol + 1e-10));
                if !config.dressed_exchange {
                    doc.gates.push(Gate::max("transmission_when_revived", residual, 2.0 * tol + 1e-10));
                }
            }
            doc.phase = revival.witness;
            doc.residuals = vec![residual];
            doc.details = json!({
                "tau": tau,
                "satisfiable": revival.satisfiable,
                "witness": revival.witness,
                "transmission_residual": residual,
                "return_residual": return_residual,
                "coefficients": c.as_slice().iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
                "input": input.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>(),
            });
            doc.eigenphases = eig.eigenphases;
        }
        Analysis::Mixed => {
            let b = mixed_state_benchmark(config.sites, config.j, config.eps, c64_of(config.c1), c64_of(config.c2))?;
            doc.gates.push(Gate::max("analytic_deviation", b.max_deviation, tol));
            if config.sites % 2 == 1 {
                doc.gates.push(Gate::max("block_transfer_residual", b.block_transfer_residual, tol));
                doc.gates.push(Gate::max("reduced_transfer_residual", b.reduced_transfer_residual, tol));
            }
            doc.details = json!({
                "theta": b.theta,
                "tau_star": b.tau_star,
                "block_numeric": matrix_json(&b.numeric),
                "block_analytic": matrix_json(&b.analytic),
                "max_deviation": b.max_deviation,
                "reduced": matrix_json(&b.reduced),
                "purity": b.purity,
                "block_transfer_residual": b.block_transfer_residual,
                "reduced_transfer_residual": b.reduced_transfer_residual,
                "mirror_transfer_residual": b.mirror_transfer_residual,
            });
        }
        Analysis::Adiabatic => {
            let basis = basis_for(config)?;
            let tau = required_tau(config)?;
            let schedule = schedule_for(config, tau)?;
            let steps = steps_for(tau, config.dt, 2);
            let r = adiabatic_transfer_report(&schedule, &basis, steps)?;
            let gap = min_gap(&schedule, &basis, 0, GAP_SAMPLES)?;
            doc.fidelity = Some(r.fidelity);
            doc.phase = Some(r.phase);
            doc.eq8_residual = Some(r.eq8_residual);
            doc.min_gap = Some(gap.min_gap);
            if let Some(req) = config.require_fidelity {
                doc.gates.push(Gate::new("fidelity", r.fidelity, req, Bound::Min));
            }
            doc.details = json!({ "tau": tau, "steps": steps, "min_gap_time": gap.min_gap_time });
        }
        Analysis::Sweep => {
            let taus = config.tau_values()?;
            doc.rows = if config.model == ModelName::Adiabatic {
                transfer_sweep(&schedule_for(config, taus[0])?, config.kind, &taus, config.dt, 2, GAP_SAMPLES)?
                    .into_iter()
                    .map(|r| SweepPoint {
                        tau: r.tau,
                        fidelity: r.fidelity,
                        phase: Some(r.phase),
                        min_gap: Some(r.min_gap),
                        eq8_residual: Some(r.eq8_residual),
                    })
                    .collect()
            } else {
                let basis = basis_for(config)?;
                let partition = config.partition()?;
                let input = input_for(config, &basis)?;
                taus.par_iter()
                    .map(|&tau| {
                        let r = pst_fidelity(&propagator_for(config, &basis, tau)?, &input, &partition)?;
                        Ok(SweepPoint { tau, fidelity: r.fidelity, phase: r.phase, min_gap: None, eq8_residual: None })
                    })
                    .collect::<Result<Vec<_>>>()?
            };
            let best = doc.rows.iter().map(|r| r.fidelity).fold(f64::NEG_INFINITY, f64::max);
            doc.fidelity = Some(best);
            if let Some(req) = config.require_fidelity {
                doc.gates.push(Gate::new("best_fidelity", best, req, Bound::Min));
            }
        }
    }
    Ok(doc)
}

/// Writes through a temporary file in the destination directory and renames it into place.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}
