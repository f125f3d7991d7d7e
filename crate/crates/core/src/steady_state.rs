//! Mean-field fixed point of the three-mode dynamics.
//!
//! With every operator replaced by its mean and the noise dropped, the
//! stationary equations are
//!
//! ```text
//! 0 = (i D - 1) a + i [g1 x1 - g2 (chi x1 - x2)^2] a - sqrt(2) a_in
//! 0 = -omega1 x1 + (g1 - 2 g2 chi Y) |a|^2,      Y = chi x1 - x2
//! 0 = -omega2 x2 + 2 g2 Y |a|^2
//! ```
//!
//! in units where `kappa_c = 1`. The mechanical pair is linear in `(x1, x2)`
//! once `|a|^2` is fixed, giving `x1 = g1 |a|^2 / Omega1` and
//! `x2 = 2 g2 chi |a|^2 x1 / Omega2`. The first relation is not printed in
//! closed form anywhere else; it follows from the stationarity conditions.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{Detuning, ModelParams};

/// Points of the dense residual scan used by [`solve_self_consistent`].
pub const SCAN_POINTS: usize = 2001;
/// Half-width margin added to `|Delta|` for the scan window.
pub const SCAN_MARGIN: f64 = 50.0;
/// Absolute bisection tolerance on the effective detuning.
pub const ROOT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSteadyState {
    /// Intracavity amplitude for a real, positive input amplitude.
    pub a_bar: Complex64,
    pub x1_bar: f64,
    pub x2_bar: f64,
    pub omega1_eff: f64,
    pub omega2_eff: f64,
    pub delta_eff: f64,
    pub photon_number: f64,
}

impl ClassicalSteadyState {
    /// Cavity mean quadratures `(x, p)` after rotating the input phase so the
    /// intracavity amplitude is real and positive: `x = sqrt(2) |a|`, `p = 0`.
    pub fn field_quadratures(&self) -> (f64, f64) {
        ((2.0 * self.photon_number).sqrt(), 0.0)
    }

    /// Cavity mean quadratures for the unrotated (real input) phase.
    pub fn raw_field_quadratures(&self) -> (f64, f64) {
        let s = std::f64::consts::SQRT_2;
        (s * self.a_bar.re, s * self.a_bar.im)
    }

    /// `chi x1 - x2`, the relative displacement felt by the sphere.
    pub fn relative_displacement(&self, chi: f64) -> f64 {
        chi * self.x1_bar - self.x2_bar
    }
}

/// `a = sqrt(2) a_in / (i D - 1)`.
pub fn intracavity_amplitude(delta_eff: f64, a_in: Complex64) -> Complex64 {
    std::f64::consts::SQRT_2 * a_in / Complex64::new(-1.0, delta_eff)
}

/// Mean intracavity photon number `2 |a_in|^2 / (D^2 + 1)` for input flux `drive = |a_in|^2`.
pub fn photon_number(delta_eff: f64, drive: f64) -> f64 {
    2.0 * drive / (delta_eff * delta_eff + 1.0)
}

/// Static-shifted mechanical frequencies `(Omega1, Omega2)`.
pub fn effective_frequencies(m: &ModelParams, photon_number: f64) -> Result<(f64, f64)> {
    let n = photon_number;
    let omega2_eff = m.omega2 + 2.0 * m.g2 * n;
    if !(omega2_eff > 0.0) {
        return Err(Error::DegenerateTrap { omega2_eff });
    }
    let chi2 = m.chi * m.chi;
    let omega1_eff = m.omega1 + 2.0 * m.g2 * chi2 * n - 4.0 * m.g2 * m.g2 * chi2 * n * n / omega2_eff;
    Ok((omega1_eff, omega2_eff))
}

/// `Delta + g1 x1 - g2 (chi x1 - x2)^2`.
pub fn effective_detuning(delta_bare: f64, x1_bar: f64, x2_bar: f64, m: &ModelParams) -> f64 {
    let y = m.chi * x1_bar - x2_bar;
    delta_bare + m.g1 * x1_bar - m.g2 * y * y
}

fn state_at(m: &ModelParams, delta_eff: f64) -> Result<ClassicalSteadyState> {
    let a_in = Complex64::new(m.drive.sqrt(), 0.0);
    let a_bar = intracavity_amplitude(delta_eff, a_in);
    let n = photon_number(delta_eff, m.drive);
    let (omega1_eff, omega2_eff) = effective_frequencies(m, n)?;
    if omega1_eff == 0.0 {
        return Err(Error::SingularMirror);
    }
    let x1_bar = m.g1 * n / omega1_eff;
    let x2_bar = 2.0 * m.g2 * m.chi * n * x1_bar / omega2_eff;
    Ok(ClassicalSteadyState {
        a_bar,
        x1_bar,
        x2_bar,
        omega1_eff,
        omega2_eff,
        delta_eff,
        photon_number: n,
    })
}

/// Fixed point for a model parameterized by the effective detuning.
pub fn classical_fixed_point(m: &ModelParams) -> Result<ClassicalSteadyState> {
    m.validate()?;
    match m.detuning {
        Detuning::Effective(d) => state_at(m, d),
        Detuning::Bare(_) => Err(Error::InvalidParam {
            field: "detuning",
            reason: "classical_fixed_point needs an effective detuning; use solve_self_consistent".into(),
        }),
    }
}

/// Stationarity residuals of the mean-field equations, each divided by the
/// magnitude of the largest term in its equation (field, mirror, sphere).
/// `delta_bare` is the laser detuning the state is supposed to solve.
pub fn mean_field_residuals(m: &ModelParams, s: &ClassicalSteadyState, delta_bare: f64) -> [f64; 3] {
    let n = s.a_bar.norm_sqr();
    let y = s.relative_displacement(m.chi);
    let shift = m.g1 * s.x1_bar - m.g2 * y * y;
    let a_in = Complex64::new(m.drive.sqrt(), 0.0);
    let drive_term = std::f64::consts::SQRT_2 * a_in;
    let field_terms = [
        Complex64::new(-1.0, delta_bare) * s.a_bar,
        Complex64::new(0.0, shift) * s.a_bar,
        -drive_term,
    ];
    let field: Complex64 = field_terms.iter().sum();
    let field_scale = field_terms.iter().map(|t| t.norm()).fold(0.0, f64::max);

    let mirror_terms = [-m.omega1 * s.x1_bar, m.g1 * n, -2.0 * m.g2 * m.chi * y * n];
    let sphere_terms = [
        -m.omega2 * s.x2_bar,
        2.0 * m.g2 * m.chi * s.x1_bar * n,
        -2.0 * m.g2 * s.x2_bar * n,
    ];

    let rel = |sum: f64, scale: f64| if scale > 0.0 { sum.abs() / scale } else { sum.abs() };
    let scale = |terms: &[f64]| terms.iter().map(|t| t.abs()).fold(0.0, f64::max);
    [
        rel(field.norm(), field_scale),
        rel(mirror_terms.iter().sum(), scale(&mirror_terms)),
        rel(sphere_terms.iter().sum(), scale(&sphere_terms)),
    ]
}

/// Residual of the scalar self-consistency equation for the effective detuning.
fn detuning_residual(m: &ModelParams, delta_bare: f64, delta_eff: f64) -> Option<f64> {
    let s = state_at(m, delta_eff).ok()?;
    let r = delta_eff - effective_detuning(delta_bare, s.x1_bar, s.x2_bar, m);
    r.is_finite().then_some(r)
}

/// All classical fixed points for a model specified with the bare detuning,
/// sorted by intracavity photon number. More than one entry signals optical
/// bistability.
pub fn solve_self_consistent(m: &ModelParams) -> Result<Vec<ClassicalSteadyState>> {
    m.validate()?;
    let delta_bare = match m.detuning {
        Detuning::Bare(d) => d,
        Detuning::Effective(_) => {
            return Err(Error::InvalidParam {
                field: "detuning",
                reason: "solve_self_consistent needs a bare detuning".into(),
            })
        }
    };
    let half = delta_bare.abs() + SCAN_MARGIN;
    let (lo, hi) = (-half, half);
    let step = (hi - lo) / (SCAN_POINTS - 1) as f64;
    let grid: Vec<(f64, Option<f64>)> = (0..SCAN_POINTS)
        .map(|i| {
            let d = lo + step * i as f64;
            (d, detuning_residual(m, delta_bare, d))
        })
        .collect();

    let mut roots = Vec::new();
    for w in grid.windows(2) {
        let ((a, fa), (b, fb)) = (w[0], w[1]);
        let (Some(fa), Some(fb)) = (fa, fb) else { continue };
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa.signum() == fb.signum() {
            continue;
        }
        if let Some(root) = bisect(m, delta_bare, a, b, fa) {
            roots.push(root);
        }
    }
    if let Some((d, Some(f))) = grid.last() {
        if *f == 0.0 {
            roots.push(*d);
        }
    }

    let mut states = Vec::with_capacity(roots.len());
    for d in roots {
        states.push(state_at(m, d)?);
    }
    if states.is_empty() {
        return Err(Error::NoSteadyState { lo, hi });
    }
    states.sort_by(|a, b| a.photon_number.total_cmp(&b.photon_number));
    Ok(states)
}

fn bisect(m: &ModelParams, delta_bare: f64, mut a: f64, mut b: f64, mut fa: f64) -> Option<f64> {
    let (fa0, fb0) = (fa.abs(), detuning_residual(m, delta_bare, b)?.abs());
    while b - a > ROOT_TOL {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let fm = detuning_residual(m, delta_bare, mid)?;
        if fm == 0.0 {
            return Some(mid);
        }
        if fm.signum() == fa.signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    let root = 0.5 * (a + b);
    // A sign change across a pole of x1 (Omega1 -> 0) is not a root.
    let f = detuning_residual(m, delta_bare, root)?.abs();
    (f <= fa0.max(fb0)).then_some(root)
}
