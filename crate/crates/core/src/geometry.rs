//! One-dimensional pumping geometries and the intracavity standing wave.
//!
//! Pumping symmetrically through both mirrors halves the mirror weight in the
//! sphere coupling; pumping through the moving mirror places the node pattern
//! relative to the moving mirror and removes the cross-coupling altogether.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PumpGeometry {
    Symmetric,
    FromFixedMirror,
    FromMovingMirror,
}

impl PumpGeometry {
    pub const ALL: [PumpGeometry; 3] = [
        PumpGeometry::Symmetric,
        PumpGeometry::FromFixedMirror,
        PumpGeometry::FromMovingMirror,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PumpGeometry::Symmetric => "symmetric",
            PumpGeometry::FromFixedMirror => "from_fixed_mirror",
            PumpGeometry::FromMovingMirror => "from_moving_mirror",
        }
    }
}

impl std::str::FromStr for PumpGeometry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PumpGeometry::ALL
            .into_iter()
            .find(|g| g.name() == s)
            .ok_or_else(|| Error::InvalidParam {
                field: "geometry",
                reason: format!("unknown geometry `{s}`"),
            })
    }
}

/// Weight of the mirror displacement in the sphere coupling.
pub fn chi_for_geometry(g: PumpGeometry, chi: f64) -> f64 {
    match g {
        PumpGeometry::Symmetric => 0.5 * chi,
        PumpGeometry::FromFixedMirror => chi,
        PumpGeometry::FromMovingMirror => 0.0,
    }
}

/// Coefficients `(alpha, beta)` of the sphere term `(alpha x1 - beta x2)^2`.
pub fn interaction_form(g: PumpGeometry) -> (f64, f64) {
    match g {
        PumpGeometry::Symmetric => (0.5, 1.0),
        PumpGeometry::FromFixedMirror => (1.0, 1.0),
        PumpGeometry::FromMovingMirror => (0.0, 1.0),
    }
}

/// `m` with its mirror weight replaced for geometry `g`. `g2` is unchanged.
pub fn apply_geometry(m: &ModelParams, g: PumpGeometry) -> ModelParams {
    ModelParams {
        chi: chi_for_geometry(g, m.chi),
        ..m.clone()
    }
}

/// Fabry-Perot cavity with identical mirrors. Reflection phases are absorbed
/// into `length`, so `wavenumber * length` is the tuning knob.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavitySpec {
    pub length: f64,
    pub wavenumber: f64,
    pub r: f64,
    pub t: f64,
}

impl CavitySpec {
    pub fn new(length: f64, wavenumber: f64, r: f64, t: f64) -> Result<Self> {
        let spec = Self {
            length,
            wavenumber,
            r,
            t,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Lossless mirrors, `t = sqrt(1 - r^2)`.
    pub fn lossless(length: f64, wavenumber: f64, r: f64) -> Result<Self> {
        Self::new(length, wavenumber, r, (1.0 - r * r).max(0.0).sqrt())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(invalid("length", format!("must be > 0, got {:e}", self.length)));
        }
        if !(self.wavenumber.is_finite() && self.wavenumber > 0.0) {
            return Err(invalid("wavenumber", format!("must be > 0, got {:e}", self.wavenumber)));
        }
        if !(self.r.is_finite() && self.r.abs() < 1.0) {
            return Err(invalid("r", format!("need |r| < 1, got {}", self.r)));
        }
        if !self.t.is_finite() || self.r * self.r + self.t * self.t > 1.0 + 1e-15 {
            return Err(invalid(
                "t",
                format!(
                    "passive mirror needs r^2 + t^2 <= 1, got {}",
                    self.r * self.r + self.t * self.t
                ),
            ));
        }
        Ok(())
    }

    pub fn wavelength(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavenumber
    }

    /// Round-trip phase `kL`.
    pub fn phase(&self) -> f64 {
        self.wavenumber * self.length
    }
}

fn invalid(field: &'static str, reason: String) -> Error {
    Error::InvalidParam { field, reason }
}

/// Spectral factor `t e^{ikL} / (1 - r^2 e^{2ikL})`.
pub fn lineshape(spec: &CavitySpec) -> Result<Complex64> {
    spec.validate()?;
    let kl = spec.phase();
    let round_trip = Complex64::from_polar(spec.r * spec.r, 2.0 * kl);
    let denom = Complex64::new(1.0, 0.0) - round_trip;
    if denom.norm() == 0.0 || round_trip.norm() >= 1.0 {
        return Err(Error::FieldDivergence { kl });
    }
    Ok(Complex64::from_polar(spec.t, kl) / denom)
}

/// Standing-wave profile `r e^{ikz} + e^{-ikz}`.
pub fn mode_profile(z: f64, spec: &CavitySpec) -> Complex64 {
    let kz = spec.wavenumber * z;
    Complex64::from_polar(spec.r, kz) + Complex64::from_polar(1.0, -kz)
}

/// Intracavity field at `0 <= z <= L`, measured from the right mirror.
pub fn intracavity_field(z: f64, spec: &CavitySpec) -> Result<Complex64> {
    if !(0.0..=spec.length).contains(&z) {
        return Err(invalid("z", format!("must lie in [0, {:e}], got {z:e}", spec.length)));
    }
    Ok(lineshape(spec)? * mode_profile(z, spec))
}

/// `points` samples of `(z, |E(z)|^2)` across the cavity.
pub fn field_profile(spec: &CavitySpec, points: usize) -> Result<Vec<(f64, f64)>> {
    if points < 2 {
        return Err(invalid("points", format!("need at least 2, got {points}")));
    }
    let l = lineshape(spec)?;
    Ok((0..points)
        .map(|i| {
            let z = spec.length * i as f64 / (points - 1) as f64;
            (z, (l * mode_profile(z, spec)).norm_sqr())
        })
        .collect())
}
