//! Laboratory parameters, the dimensionless model they map onto, and the
//! optomechanical coupling constants.
//!
//! All rates in [`PhysicalParams`] are angular (rad/s). [`ModelParams`] measures
//! every rate in units of the cavity amplitude decay rate, so `kappa_c = 1` and
//! `hbar = 1` there.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::constants::{BOLTZMANN, HBAR, SPEED_OF_LIGHT};
use crate::error::{Error, Result};

/// Position of the sphere in the standing wave; fixes the sign of `g2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SphereSite {
    Node,
    Antinode,
}

impl SphereSite {
    pub fn sign(self) -> f64 {
        match self {
            SphereSite::Node => -1.0,
            SphereSite::Antinode => 1.0,
        }
    }
}

/// Lab-frame description of the cavity, mirror and sphere (SI, angular rates).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub wavelength: f64,
    pub cavity_length: f64,
    pub cavity_decay: f64,
    pub mirror_mass: f64,
    pub mirror_freq: f64,
    pub mirror_damping: f64,
    pub sphere_radius: f64,
    pub sphere_density: f64,
    pub refractive_index: f64,
    pub sphere_freq: f64,
    pub sphere_damping: f64,
    pub cavity_waist: f64,
    pub bath_temp_mirror: f64,
    pub bath_temp_sphere: f64,
    pub input_power: f64,
    pub sphere_site: SphereSite,
}

impl PhysicalParams {
    /// Silica sphere next to a 40 ng mirror in a 0.5 cm cavity driven at 1064 nm,
    /// mirror at 2π×1 MHz and sphere at 2π×200 kHz, both baths at 1 K, no drive.
    pub fn nominal() -> Self {
        Self {
            wavelength: 1064e-9,
            cavity_length: 0.5e-2,
            cavity_decay: 2.0 * PI * 50e3,
            mirror_mass: 40e-12,
            mirror_freq: 2.0 * PI * 1e6,
            mirror_damping: 2.0 * PI * 140.0,
            sphere_radius: 0.5e-6,
            sphere_density: 2650.0,
            refractive_index: 1.5,
            sphere_freq: 2.0 * PI * 200e3,
            sphere_damping: 2.0 * PI * 0.5e-3,
            cavity_waist: 40e-6,
            bath_temp_mirror: 1.0,
            bath_temp_sphere: 1.0,
            input_power: 0.0,
            sphere_site: SphereSite::Node,
        }
    }

    /// Copy with the two mechanical frequencies replaced (rad/s).
    pub fn with_frequencies(&self, mirror_freq: f64, sphere_freq: f64) -> Self {
        Self {
            mirror_freq,
            sphere_freq,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let strictly_positive = [
            ("wavelength", self.wavelength),
            ("cavity_length", self.cavity_length),
            ("cavity_decay", self.cavity_decay),
            ("mirror_mass", self.mirror_mass),
            ("mirror_freq", self.mirror_freq),
            ("mirror_damping", self.mirror_damping),
            ("sphere_radius", self.sphere_radius),
            ("sphere_density", self.sphere_density),
            ("sphere_freq", self.sphere_freq),
            ("sphere_damping", self.sphere_damping),
            ("cavity_waist", self.cavity_waist),
        ];
        for (field, value) in strictly_positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParam {
                    field,
                    reason: format!("must be finite and > 0, got {value:e}"),
                });
            }
        }
        let non_negative = [
            ("bath_temp_mirror", self.bath_temp_mirror),
            ("bath_temp_sphere", self.bath_temp_sphere),
            ("input_power", self.input_power),
        ];
        for (field, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParam {
                    field,
                    reason: format!("must be finite and >= 0, got {value:e}"),
                });
            }
        }
        if !(self.refractive_index.is_finite() && self.refractive_index > 1.0) {
            return Err(Error::InvalidParam {
                field: "refractive_index",
                reason: format!("must be > 1, got {}", self.refractive_index),
            });
        }
        if !(self.sphere_mass() > 0.0) {
            return Err(Error::InvalidParam {
                field: "sphere_radius",
                reason: "derived sphere mass is not positive".into(),
            });
        }
        Ok(())
    }

    pub fn sphere_mass(&self) -> f64 {
        self.sphere_density * 4.0 / 3.0 * PI * self.sphere_radius.powi(3)
    }

    /// Cavity resonance (rad/s); also used as the laser frequency.
    pub fn cavity_frequency(&self) -> f64 {
        2.0 * PI * SPEED_OF_LIGHT / self.wavelength
    }

    pub fn mirror_zero_point(&self) -> f64 {
        (HBAR / (self.mirror_mass * self.mirror_freq)).sqrt()
    }

    pub fn sphere_zero_point(&self) -> f64 {
        (HBAR / (self.sphere_mass() * self.sphere_freq)).sqrt()
    }
}

/// Linear coupling of the mirror, `(omega_c / L) * x_zpf`, in rad/s.
pub fn derive_g1(p: &PhysicalParams) -> Result<f64> {
    p.validate()?;
    Ok(p.cavity_frequency() / p.cavity_length * p.mirror_zero_point())
}

/// Quadratic coupling of the sphere in rad/s. Negative at a node, positive at
/// an antinode; the sphere radius drops out.
pub fn derive_g2(p: &PhysicalParams) -> Result<f64> {
    p.validate()?;
    let n2 = p.refractive_index * p.refractive_index;
    let clausius_mossotti = (n2 - 1.0) / (n2 + 2.0);
    let beam = p.wavelength * p.cavity_waist;
    let magnitude = 12.0 * PI * clausius_mossotti * p.cavity_frequency() / p.cavity_length * HBAR
        / (p.sphere_density * beam * beam * p.sphere_freq);
    Ok(p.sphere_site.sign() * magnitude)
}

/// Ratio of zero-point amplitudes, mirror over sphere.
pub fn derive_chi(p: &PhysicalParams) -> Result<f64> {
    p.validate()?;
    Ok((p.sphere_mass() * p.sphere_freq / (p.mirror_mass * p.mirror_freq)).sqrt())
}

/// Bose-Einstein occupation at angular frequency `omega` (rad/s) and
/// temperature `temperature` (K).
pub fn bath_occupation(omega: f64, temperature: f64) -> f64 {
    if temperature <= 0.0 {
        return 0.0;
    }
    let x = HBAR * omega / (BOLTZMANN * temperature);
    1.0 / x.exp_m1()
}

/// How the laser detuning is specified.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", content = "value", rename_all = "snake_case")]
pub enum Detuning {
    /// Detuning already shifted by the static displacements.
    Effective(f64),
    /// Bare laser-cavity detuning; the shift is solved self-consistently.
    Bare(f64),
}

impl Detuning {
    pub fn value(self) -> f64 {
        match self {
            Detuning::Effective(d) | Detuning::Bare(d) => d,
        }
    }
}

/// Dimensionless model: all rates in units of `kappa_c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub omega1: f64,
    pub omega2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub g1: f64,
    pub g2: f64,
    pub chi: f64,
    /// Input photon flux `|a_in|^2` per unit `kappa_c`.
    pub drive: f64,
    pub n1: f64,
    pub n2: f64,
    pub detuning: Detuning,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [("omega1", self.omega1), ("omega2", self.omega2)];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParam {
                    field,
                    reason: format!("must be > 0, got {value:e}"),
                });
            }
        }
        let non_negative = [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("chi", self.chi),
            ("drive", self.drive),
            ("n1", self.n1),
            ("n2", self.n2),
        ];
        for (field, value) in non_negative {
            if !(value.is_finite() && value >= 0.0) {
                return Err(Error::InvalidParam {
                    field,
                    reason: format!("must be >= 0, got {value:e}"),
                });
            }
        }
        for (field, value) in [("g1", self.g1), ("g2", self.g2), ("detuning", self.detuning.value())] {
            if !value.is_finite() {
                return Err(Error::InvalidParam {
                    field,
                    reason: "must be finite".into(),
                });
            }
        }
        Ok(())
    }

    pub fn with_drive(&self, drive: f64) -> Self {
        Self { drive, ..self.clone() }
    }

    pub fn with_detuning(&self, detuning: Detuning) -> Self {
        Self {
            detuning,
            ..self.clone()
        }
    }

    /// Convert back to lab units given the cavity decay rate (rad/s) and the
    /// laser frequency (rad/s) used for the photon-flux conversion.
    pub fn redimensionalize(&self, kappa_c: f64, omega_laser: f64) -> DimensionalRates {
        DimensionalRates {
            mirror_freq: self.omega1 * kappa_c,
            sphere_freq: self.omega2 * kappa_c,
            mirror_damping: self.gamma1 * kappa_c,
            sphere_damping: self.gamma2 * kappa_c,
            g1: self.g1 * kappa_c,
            g2: self.g2 * kappa_c,
            detuning: self.detuning.value() * kappa_c,
            input_power: self.drive * kappa_c * HBAR * omega_laser,
        }
    }
}

/// Rates recovered from a [`ModelParams`] (rad/s, W).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DimensionalRates {
    pub mirror_freq: f64,
    pub sphere_freq: f64,
    pub mirror_damping: f64,
    pub sphere_damping: f64,
    pub g1: f64,
    pub g2: f64,
    pub detuning: f64,
    pub input_power: f64,
}

/// Map lab parameters onto the dimensionless model. `detuning` is given in
/// units of `kappa_c`. The laser frequency is taken equal to the cavity
/// resonance when converting power to photon flux.
pub fn nondimensionalize(p: &PhysicalParams, detuning: Detuning) -> Result<ModelParams> {
    p.validate()?;
    let kappa = p.cavity_decay;
    let flux = p.input_power / (HBAR * p.cavity_frequency());
    let m = ModelParams {
        omega1: p.mirror_freq / kappa,
        omega2: p.sphere_freq / kappa,
        gamma1: p.mirror_damping / kappa,
        gamma2: p.sphere_damping / kappa,
        g1: derive_g1(p)? / kappa,
        g2: derive_g2(p)? / kappa,
        chi: derive_chi(p)?,
        drive: flux / kappa,
        n1: bath_occupation(p.mirror_freq, p.bath_temp_mirror),
        n2: bath_occupation(p.sphere_freq, p.bath_temp_sphere),
        detuning,
    };
    m.validate()?;
    Ok(m)
}

/// Photon flux per `kappa_c` corresponding to an input power in watts.
pub fn drive_from_power(p: &PhysicalParams, power: f64) -> f64 {
    power / (HBAR * p.cavity_frequency()) / p.cavity_decay
}
