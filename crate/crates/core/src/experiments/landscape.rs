use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate_point, optimize_scalar, Grid, Objective, OptimizerOptions, Optimum, PointResult, SearchBounds};
use crate::error::Result;
use crate::params::{nondimensionalize, Detuning, ModelParams, PhysicalParams};

/// Grid over the two mechanical frequencies (units of `kappa_c`), each point
/// optimized over detuning and drive. Couplings, `chi` and bath occupations
/// are re-derived from `physical` at every grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeSpec {
    pub physical: PhysicalParams,
    pub omega1: Grid,
    pub omega2: Grid,
    pub bounds: SearchBounds,
    pub optimizer: OptimizerOptions,
    pub objective: Objective,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapePoint {
    pub omega1: f64,
    pub omega2: f64,
    /// Outside `1 < omega2 < omega1`; not optimized.
    pub excluded: bool,
    pub model: Option<ModelParams>,
    pub optimum: Option<Optimum>,
    /// Operating point at the optimum.
    pub point: Option<PointResult>,
    /// Sphere bath occupation, the no-drive value of `n2`.
    pub n2_thermal: f64,
    /// Per-point failure, recorded instead of aborting the sweep.
    pub error: Option<String>,
}

impl LandscapePoint {
    pub fn n2(&self) -> Option<f64> {
        self.point.as_ref()?.covariance.as_ref().map(|c| c.n2)
    }

    /// Thermal over optimized sphere occupation.
    pub fn cooling_factor(&self) -> Option<f64> {
        self.n2().map(|n| self.n2_thermal / n)
    }
}

/// Best `omega2` for one `omega1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RidgePoint {
    pub omega1: f64,
    pub omega2: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeResult {
    /// Row-major: `omega1` outer, `omega2` inner.
    pub points: Vec<LandscapePoint>,
    pub ridge: Vec<RidgePoint>,
}

impl LandscapeResult {
    pub fn best(&self) -> Option<&LandscapePoint> {
        self.points
            .iter()
            .filter(|p| p.optimum.is_some_and(|o| o.feasible()))
            .min_by(|a, b| a.optimum.unwrap().value.total_cmp(&b.optimum.unwrap().value))
    }
}

pub fn occupation_landscape(spec: &LandscapeSpec) -> Result<LandscapeResult> {
    spec.physical.validate()?;
    spec.omega1.validate()?;
    spec.omega2.validate()?;
    spec.bounds.validate()?;
    let w1 = spec.omega1.points();
    let w2 = spec.omega2.points();
    let cells: Vec<(f64, f64)> = w1.iter().flat_map(|&a| w2.iter().map(move |&b| (a, b))).collect();
    let points: Vec<LandscapePoint> = cells.par_iter().map(|&(a, b)| landscape_point(spec, a, b)).collect();

    let ridge = w1
        .iter()
        .filter_map(|&a| {
            points
                .iter()
                .filter(|p| p.omega1 == a)
                .filter_map(|p| p.optimum.filter(|o| o.feasible()).map(|o| (p.omega2, o.value)))
                .min_by(|x, y| x.1.total_cmp(&y.1))
                .map(|(omega2, value)| RidgePoint {
                    omega1: a,
                    omega2,
                    value,
                })
        })
        .collect();
    Ok(LandscapeResult { points, ridge })
}

/// Optimize a single `(omega1, omega2)` cell of `spec`.
pub fn landscape_point(spec: &LandscapeSpec, omega1: f64, omega2: f64) -> LandscapePoint {
    let mut out = LandscapePoint {
        omega1,
        omega2,
        excluded: !(omega2 > 1.0 && omega2 < omega1),
        model: None,
        optimum: None,
        point: None,
        n2_thermal: f64::NAN,
        error: None,
    };
    let kappa = spec.physical.cavity_decay;
    let phys = spec.physical.with_frequencies(omega1 * kappa, omega2 * kappa);
    let base = match nondimensionalize(&phys, Detuning::Effective(0.0)) {
        Ok(m) => m,
        Err(e) => {
            out.error = Some(e.to_string());
            return out;
        }
    };
    out.n2_thermal = base.n2;
    out.model = Some(base.clone());
    if out.excluded {
        return out;
    }
    let objective = spec.objective;
    let f = |d: f64, p: f64| objective.evaluate(&at(&base, d, p));
    match optimize_scalar(f, &spec.bounds, &spec.optimizer) {
        Ok(opt) => {
            out.optimum = Some(opt);
            if opt.feasible() {
                match evaluate_point(&at(&base, opt.detuning, opt.drive)) {
                    Ok(r) => out.point = Some(r),
                    Err(e) => out.error = Some(e.to_string()),
                }
            }
        }
        Err(e) => out.error = Some(e.to_string()),
    }
    out
}

fn at(base: &ModelParams, detuning: f64, drive: f64) -> ModelParams {
    ModelParams {
        detuning: Detuning::Effective(detuning),
        drive,
        ..base.clone()
    }
}
