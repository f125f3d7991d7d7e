//! Parameter sets and sweep protocols for the three reference figures.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::{Grid, LandscapeSpec, Objective, OptimizerOptions, SearchBounds};
use crate::params::{bath_occupation, Detuning, ModelParams, PhysicalParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
}

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2 => "fig2",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
        }
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        [Preset::Fig2, Preset::Fig3, Preset::Fig4]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidParam {
                field: "preset",
                reason: format!("unknown preset `{s}` (expected fig2, fig3 or fig4)"),
            })
    }
}

/// Cavity decay rate behind the presets, 2π × 50 kHz.
pub const KAPPA_C: f64 = 2.0 * PI * 50e3;

/// Hybridization set: baths at 1 K, couplings as published.
pub fn fig3_model() -> ModelParams {
    ModelParams {
        omega1: 10.0,
        omega2: 3.4,
        gamma1: 2.8e-3,
        gamma2: 1e-8,
        g1: 1.0e-3,
        g2: -2.4e-10,
        chi: 3.7e-3,
        drive: 0.0,
        n1: bath_occupation(10.0 * KAPPA_C, 1.0),
        n2: bath_occupation(3.4 * KAPPA_C, 1.0),
        detuning: Detuning::Effective(-27.2),
    }
}

/// Squeezing set: zero-temperature baths, `g2` already 100 times nominal.
pub fn fig4_model() -> ModelParams {
    ModelParams {
        omega1: 20.0,
        omega2: 10.0,
        gamma1: 2.8e-3,
        gamma2: 1e-8,
        g1: 7.2e-4,
        g2: -8.0e-9,
        chi: 4.5e-3,
        drive: 0.0,
        n1: 0.0,
        n2: 0.0,
        detuning: Detuning::Effective(-10.0),
    }
}

/// [`fig4_model`] with the nominal quadratic coupling.
pub fn fig4_model_unscaled() -> ModelParams {
    let mut m = fig4_model();
    m.g2 /= 100.0;
    m
}

/// Drive grid shared by the power and squeezing sweeps.
pub fn sweep_grid() -> Grid {
    Grid::Log {
        lo: 1e6,
        hi: 1e11,
        points: 200,
    }
}

/// Mirror bath at 50 mK, sphere bath at 1 K, nominal lab parameters.
pub fn fig2_physical() -> PhysicalParams {
    PhysicalParams {
        bath_temp_mirror: 0.05,
        bath_temp_sphere: 1.0,
        ..PhysicalParams::nominal()
    }
}

pub fn fig2_bounds() -> SearchBounds {
    SearchBounds {
        detuning: (-50.0, -0.5),
        drive: (1e6, 1e12),
    }
}

/// Landscape over `omega1` and `omega2`, each cell optimized for the
/// sphere occupation over detuning and drive.
pub fn fig2_landscape() -> LandscapeSpec {
    LandscapeSpec {
        physical: fig2_physical(),
        omega1: Grid::Linear {
            lo: 2.0,
            hi: 20.0,
            points: 20,
        },
        omega2: Grid::Linear {
            lo: 1.0,
            hi: 20.0,
            points: 20,
        },
        bounds: fig2_bounds(),
        optimizer: OptimizerOptions::default(),
        objective: Objective::SphereOccupation,
    }
}
