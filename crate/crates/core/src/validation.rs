//! Three-way solver agreement over seeded random systems and the presets.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{evaluate_point, PointStatus};
use crate::linear::{physicality_floor, raw_occupation, solve_lyapunov, stability, LinearModel, Matrix6, Mode};
use crate::oracle::{integrate_moments, lyapunov_vectorized, IntegrationSpec};
use crate::params::{Detuning, ModelParams};
use crate::steady_state::classical_fixed_point;

/// Eigenbasis vs vectorized Lyapunov solve, relative max-norm.
pub const ALGEBRAIC_TOL: f64 = 1e-10;
/// Moment-ODE steady limit vs eigenbasis solve, relative max-norm.
pub const ODE_TOL: f64 = 1e-8;
/// Floor on the eigenvalues of `V + i sigma / 2` and on raw occupations.
pub const PHYSICALITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseKind {
    /// Drift and diffusion built from random model parameters.
    Model,
    /// Unstructured random Hurwitz drift with random PSD diffusion.
    Generic,
    Preset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub label: String,
    pub kind: CaseKind,
    pub algebraic: f64,
    pub ode: f64,
    /// `None` for generic systems, which carry no uncertainty relation.
    pub physicality: Option<f64>,
    pub min_raw_occupation: Option<f64>,
}

impl CaseReport {
    /// Solver agreement within [`ALGEBRAIC_TOL`] and [`ODE_TOL`].
    pub fn passes(&self) -> bool {
        self.algebraic <= ALGEBRAIC_TOL && self.ode <= ODE_TOL
    }

    /// Uncertainty relation and raw occupations above `-PHYSICALITY_TOL`.
    pub fn physical(&self) -> bool {
        self.physicality.is_none_or(|f| f >= -PHYSICALITY_TOL)
            && self.min_raw_occupation.is_none_or(|n| n >= -PHYSICALITY_TOL)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub cases: Vec<CaseReport>,
    pub max_algebraic: f64,
    pub max_ode: f64,
    pub min_physicality: f64,
    pub min_raw_occupation: f64,
}

impl ValidationReport {
    pub fn passes(&self) -> bool {
        self.cases.iter().all(CaseReport::passes)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CaseReport> {
        self.cases.iter().filter(|c| !c.passes())
    }

    pub fn unphysical(&self) -> impl Iterator<Item = &CaseReport> {
        self.cases.iter().filter(|c| !c.physical())
    }
}

fn rel_max(a: &Matrix6, b: &Matrix6) -> f64 {
    (a - b).amax() / b.amax().max(f64::MIN_POSITIVE)
}

/// Compare the three covariance routes for one stable system.
pub fn compare_solvers(label: &str, kind: CaseKind, a: &Matrix6, d: &Matrix6) -> Result<CaseReport> {
    let v = solve_lyapunov(a, d)?;
    let vv = lyapunov_vectorized(a, d)?;
    let spec = IntegrationSpec::for_drift(a)?;
    // start from the vacuum for physical systems, from zero otherwise
    let v0 = if kind == CaseKind::Generic {
        Matrix6::zeros()
    } else {
        Matrix6::identity() * 0.5
    };
    let traj = integrate_moments(a, d, &v0, &spec)?;
    let physical = kind != CaseKind::Generic;
    Ok(CaseReport {
        label: label.to_string(),
        kind,
        algebraic: rel_max(&v, &vv),
        ode: rel_max(&traj.v, &v),
        physicality: physical.then(|| physicality_floor(&v)),
        min_raw_occupation: physical.then(|| raw_occupation(&v, Mode::Mirror).min(raw_occupation(&v, Mode::Sphere))),
    })
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Random operating point; not necessarily stable.
pub fn random_model(rng: &mut ChaCha8Rng) -> ModelParams {
    let omega1 = rng.random_range(1.0..30.0);
    let omega2 = rng.random_range(0.5..omega1);
    let delta = rng.random_range(-40.0..5.0);
    let photons = log_uniform(rng, 1.0, 1e9);
    let occupation = |rng: &mut ChaCha8Rng| {
        if rng.random_bool(0.2) {
            0.0
        } else {
            log_uniform(rng, 1e-2, 1e6)
        }
    };
    ModelParams {
        omega1,
        omega2,
        gamma1: log_uniform(rng, 1e-4, 1e-1),
        gamma2: log_uniform(rng, 1e-8, 1e-2),
        g1: log_uniform(rng, 1e-5, 1e-2),
        g2: -log_uniform(rng, 1e-12, 1e-8),
        chi: log_uniform(rng, 1e-4, 1e-1),
        drive: photons * (delta * delta + 1.0) / 2.0,
        n1: occupation(rng),
        n2: occupation(rng),
        detuning: Detuning::Effective(delta),
    }
}

/// Random stable drift and PSD diffusion without model structure.
pub fn random_generic(rng: &mut ChaCha8Rng) -> Result<(Matrix6, Matrix6)> {
    let m = Matrix6::from_fn(|_, _| rng.random_range(-1.0..1.0));
    let shift = stability(&m, 0.0)?.max_re + rng.random_range(0.05..2.0);
    let a = m - Matrix6::identity() * shift;
    let b = Matrix6::from_fn(|_, _| rng.random_range(-1.0..1.0));
    Ok((a, b * b.transpose()))
}

/// Operating points that the presets exercise.
pub fn preset_points() -> Vec<(String, ModelParams)> {
    use crate::presets::{fig3_model, fig4_model, fig4_model_unscaled};
    let mut out = Vec::new();
    for drive in [0.0, 1e8, 1e10, 4.4e10, 5.0e10] {
        out.push((format!("fig3 drive {drive:e}"), fig3_model().with_drive(drive)));
    }
    for drive in [0.0, 1e8, 5e9, 9.4e9] {
        out.push((format!("fig4 drive {drive:e}"), fig4_model().with_drive(drive)));
        out.push((
            format!("fig4 unscaled drive {drive:e}"),
            fig4_model_unscaled().with_drive(drive),
        ));
    }
    out
}

/// Run the comparison over `model_cases` random model systems, `generic_cases`
/// random generic systems and every preset point. Deterministic in `seed`.
pub fn run_validation(model_cases: usize, generic_cases: usize, seed: u64) -> Result<ValidationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut systems: Vec<(String, CaseKind, Matrix6, Matrix6)> = Vec::new();
    let mut draws = 0usize;
    while systems.len() < model_cases {
        draws += 1;
        if draws > 100 * model_cases.max(1) {
            return Err(Error::Numerical {
                context: "random stable draw",
            });
        }
        let m = random_model(&mut rng);
        let Ok(s) = classical_fixed_point(&m) else { continue };
        let Ok(lm) = LinearModel::new(&m, &s) else { continue };
        if lm.stable {
            systems.push((format!("model #{draws}"), CaseKind::Model, lm.drift, lm.diffusion));
        }
    }
    for k in 0..generic_cases {
        let (a, d) = random_generic(&mut rng)?;
        systems.push((format!("generic #{k}"), CaseKind::Generic, a, d));
    }
    for (label, m) in preset_points() {
        let r = evaluate_point(&m)?;
        if r.status != PointStatus::Stable {
            log::warn!("preset point `{label}` is not stable; skipped");
            continue;
        }
        let s = classical_fixed_point(&m)?;
        let lm = LinearModel::new(&m, &s)?;
        systems.push((label, CaseKind::Preset, lm.drift, lm.diffusion));
    }

    let cases: Vec<CaseReport> = systems
        .par_iter()
        .map(|(label, kind, a, d)| compare_solvers(label, *kind, a, d))
        .collect::<Result<_>>()?;
    let fold = |f: fn(&CaseReport) -> Option<f64>, init: f64, pick: fn(f64, f64) -> f64| {
        cases.iter().filter_map(f).fold(init, pick)
    };
    Ok(ValidationReport {
        seed,
        max_algebraic: fold(|c| Some(c.algebraic), 0.0, f64::max),
        max_ode: fold(|c| Some(c.ode), 0.0, f64::max),
        min_physicality: fold(|c| c.physicality, f64::INFINITY, f64::min),
        min_raw_occupation: fold(|c| c.min_raw_occupation, f64::INFINITY, f64::min),
        cases,
    })
}
