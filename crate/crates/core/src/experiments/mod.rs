//! Sweeps, thresholds and optimization over drive and detuning.

mod landscape;
mod optimize;
mod sweep;

pub use landscape::{
    landscape_point, occupation_landscape, LandscapePoint, LandscapeResult, LandscapeSpec, RidgePoint,
};
pub use optimize::{optimize_scalar, OptimizerOptions, Optimum, SearchBounds};
pub use sweep::{
    instability_threshold, power_sweep, squeezing_sweep, Hybridization, PowerSweep, SqueezingSummary, SqueezingSweep,
    Threshold,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::{LinearModel, NormalMode, SteadyCovariance};
use crate::params::{Detuning, ModelParams};
use crate::steady_state::{classical_fixed_point, solve_self_consistent, ClassicalSteadyState};

/// One-dimensional sampling of a parameter range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scale", rename_all = "snake_case")]
pub enum Grid {
    Linear { lo: f64, hi: f64, points: usize },
    Log { lo: f64, hi: f64, points: usize },
}

impl Grid {
    pub fn validate(&self) -> Result<()> {
        let (lo, hi, points, log) = match *self {
            Grid::Linear { lo, hi, points } => (lo, hi, points, false),
            Grid::Log { lo, hi, points } => (lo, hi, points, true),
        };
        if points < 2 {
            return Err(invalid(
                "points",
                format!("a grid needs at least 2 points, got {points}"),
            ));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid("range", format!("need finite lo < hi, got [{lo:e}, {hi:e}]")));
        }
        if log && lo <= 0.0 {
            return Err(invalid("range", format!("log grid needs lo > 0, got {lo:e}")));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<f64> {
        match *self {
            Grid::Linear { lo, hi, points } => (0..points)
                .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
                .collect(),
            Grid::Log { lo, hi, points } => {
                let (a, b) = (lo.ln(), hi.ln());
                (0..points)
                    .map(|i| {
                        if i == points - 1 {
                            hi
                        } else {
                            (a + (b - a) * i as f64 / (points - 1) as f64).exp()
                        }
                    })
                    .collect()
            }
        }
    }
}

fn invalid(field: &'static str, reason: String) -> Error {
    Error::InvalidParam { field, reason }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PointStatus {
    Stable,
    Unstable,
    /// The effective sphere trap frequency is not positive.
    DegenerateTrap,
}

/// Everything computed at one operating point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointResult {
    pub drive: f64,
    pub delta_eff: f64,
    pub photon_number: f64,
    pub status: PointStatus,
    /// Largest real part in the drift spectrum; `NaN` for a degenerate trap.
    pub max_re: f64,
    pub modes: Vec<NormalMode>,
    /// Present only for stable points.
    pub covariance: Option<SteadyCovariance>,
}

impl PointResult {
    pub fn stable(&self) -> bool {
        self.status == PointStatus::Stable
    }
}

fn steady_state_for(m: &ModelParams) -> Result<ClassicalSteadyState> {
    match m.detuning {
        Detuning::Effective(_) => classical_fixed_point(m),
        // lowest-intensity branch when the bare detuning is bistable
        Detuning::Bare(_) => Ok(solve_self_consistent(m)?.swap_remove(0)),
    }
}

/// Fixed point, spectrum and (when stable) covariance at `m`.
pub fn evaluate_point(m: &ModelParams) -> Result<PointResult> {
    m.validate()?;
    let s = match steady_state_for(m) {
        Ok(s) => s,
        Err(Error::DegenerateTrap { .. }) | Err(Error::SingularMirror) => {
            return Ok(PointResult {
                drive: m.drive,
                delta_eff: m.detuning.value(),
                photon_number: f64::NAN,
                status: PointStatus::DegenerateTrap,
                max_re: f64::NAN,
                modes: Vec::new(),
                covariance: None,
            })
        }
        Err(e) => return Err(e),
    };
    let lm = LinearModel::new(m, &s)?;
    let covariance = if lm.stable { Some(lm.steady_covariance()?) } else { None };
    Ok(PointResult {
        drive: m.drive,
        delta_eff: s.delta_eff,
        photon_number: s.photon_number,
        status: if lm.stable {
            PointStatus::Stable
        } else {
            PointStatus::Unstable
        },
        max_re: lm.max_re,
        modes: lm.normal_modes(),
        covariance,
    })
}

/// Stability verdict only; skips the Lyapunov solve.
pub fn is_stable(m: &ModelParams) -> Result<bool> {
    match steady_state_for(m) {
        Ok(s) => Ok(LinearModel::new(m, &s)?.stable),
        Err(Error::DegenerateTrap { .. }) | Err(Error::SingularMirror) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Scalar figures of merit read off a stable covariance; all are minimized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    SphereOccupation,
    MirrorOccupation,
    /// Negated sphere squeezing, so that more squeezing is lower.
    SphereSqueezing,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::SphereOccupation => "sphere_occupation",
            Objective::MirrorOccupation => "mirror_occupation",
            Objective::SphereSqueezing => "sphere_squeezing",
        }
    }

    pub fn of(self, c: &SteadyCovariance) -> f64 {
        match self {
            Objective::SphereOccupation => c.n2,
            Objective::MirrorOccupation => c.n1,
            Objective::SphereSqueezing => -c.s2,
        }
    }

    /// Objective at `m`, `+inf` when unstable or not evaluable.
    pub fn evaluate(self, m: &ModelParams) -> f64 {
        match evaluate_point(m) {
            Ok(PointResult {
                covariance: Some(c), ..
            }) => self.of(&c),
            Ok(_) => f64::INFINITY,
            Err(e) => {
                log::debug!("objective not evaluable at drive {:e}: {e}", m.drive);
                f64::INFINITY
            }
        }
    }
}

impl std::str::FromStr for Objective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [
            Objective::SphereOccupation,
            Objective::MirrorOccupation,
            Objective::SphereSqueezing,
        ]
        .into_iter()
        .find(|o| o.name() == s)
        .ok_or_else(|| invalid("objective", format!("unknown objective `{s}`")))
    }
}
