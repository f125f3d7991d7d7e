//! Linearized fluctuation dynamics around the classical fixed point.
//!
//! The fluctuation vector is ordered `(dx, dp, dx1, dp1, dx2, dp2)`: cavity
//! quadratures first, then mirror, then sphere. `d/dt R = A R + R_in`, and the
//! stationary covariance solves `A V + V A^T = -D`.

use log::warn;
use nalgebra::{Complex, SMatrix, Schur, SVD};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::steady_state::ClassicalSteadyState;

pub type Matrix6 = SMatrix<f64, 6, 6>;
type CMatrix6 = SMatrix<Complex64, 6, 6>;

/// Default margin for the strict stability test `max Re(lambda) < -eps`.
pub const DEFAULT_STABILITY_EPS: f64 = 1e-12;
/// Below this `|lambda_i + lambda_j|` the eigenbasis solve is abandoned.
pub const LYAPUNOV_SINGULAR_SUM: f64 = 1e-10;
/// Largest accepted [`lyapunov_residual`] before falling back to the vectorized solve.
pub const LYAPUNOV_RESIDUAL_TOL: f64 = 1e-12;
/// Occupations more negative than this before clamping are reported.
pub const NEGATIVE_OCCUPATION_TOL: f64 = 1e-9;

/// One of the three modes, indexing the pairs of rows of the state vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Cavity,
    Mirror,
    Sphere,
}

impl Mode {
    pub fn x_index(self) -> usize {
        match self {
            Mode::Cavity => 0,
            Mode::Mirror => 2,
            Mode::Sphere => 4,
        }
    }

    pub fn p_index(self) -> usize {
        self.x_index() + 1
    }
}

/// Drift matrix with the mean field rotated to `p = 0`.
pub fn build_drift(m: &ModelParams, s: &ClassicalSteadyState) -> Matrix6 {
    let (x, p) = s.field_quadratures();
    build_drift_with_quadratures(m, s, x, p)
}

/// Drift matrix for explicit cavity mean quadratures `(x, p)`.
pub fn build_drift_with_quadratures(m: &ModelParams, s: &ClassicalSteadyState, x: f64, p: f64) -> Matrix6 {
    let y = s.relative_displacement(m.chi);
    let lin = m.g1 - 2.0 * m.g2 * m.chi * y;
    let quad = 2.0 * m.g2 * y;
    let intensity = x * x + p * p;
    let d = s.delta_eff;

    #[rustfmt::skip]
    let a = Matrix6::from_row_slice(&[
        -1.0,      -d,        -lin * p,                                  0.0,               -quad * p,                             0.0,
         d,        -1.0,       lin * x,                                  0.0,                quad * x,                             0.0,
         0.0,       0.0,       0.0,                                      m.omega1,           0.0,                                  0.0,
         lin * x,   lin * p,  -m.omega1 - m.g2 * m.chi * m.chi * intensity, -2.0 * m.gamma1,  m.g2 * m.chi * intensity,             0.0,
         0.0,       0.0,       0.0,                                      0.0,                0.0,                                  m.omega2,
         quad * x,  quad * p,  m.g2 * m.chi * intensity,                 0.0,               -m.omega2 - m.g2 * intensity,          -2.0 * m.gamma2,
    ]);
    a
}

/// Symmetrized input-noise correlations: vacuum on both cavity quadratures,
/// Brownian noise on the mechanical momenta.
pub fn build_diffusion(m: &ModelParams) -> Matrix6 {
    Matrix6::from_diagonal(&nalgebra::Vector6::new(
        1.0,
        1.0,
        0.0,
        2.0 * m.gamma1 * (2.0 * m.n1 + 1.0),
        0.0,
        2.0 * m.gamma2 * (2.0 * m.n2 + 1.0),
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stability {
    pub stable: bool,
    pub max_re: f64,
    pub eigenvalues: Vec<Complex64>,
}

/// Eigenvalues of a real 6x6 matrix via the real Schur form.
pub fn eigenvalues(a: &Matrix6) -> Result<Vec<Complex64>> {
    let schur = Schur::try_new(*a, f64::EPSILON, 10_000).ok_or(Error::Numerical {
        context: "Schur decomposition of the drift matrix",
    })?;
    let eig: Vec<Complex64> = schur
        .complex_eigenvalues()
        .iter()
        .map(|c| Complex64::new(c.re, c.im))
        .collect();
    if eig.iter().any(|l| !l.re.is_finite() || !l.im.is_finite()) {
        return Err(Error::Numerical {
            context: "eigenvalues of the drift matrix",
        });
    }
    if !conjugate_closed(&eig) {
        return Err(Error::UnpairedEigenvalues);
    }
    Ok(eig)
}

/// Every eigenvalue with nonzero imaginary part has its conjugate in the set.
fn conjugate_closed(eig: &[Complex64]) -> bool {
    let scale = eig.iter().map(|l| l.norm()).fold(1.0, f64::max);
    let tol = 1e-9 * scale;
    eig.iter()
        .all(|l| l.im.abs() <= tol || eig.iter().any(|k| (k - l.conj()).norm() <= tol))
}

/// Routh-Hurwitz test in eigenvalue form: stable iff `max Re(lambda) < -eps`.
pub fn stability(a: &Matrix6, eps: f64) -> Result<Stability> {
    let eigenvalues = eigenvalues(a)?;
    let max_re = eigenvalues.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    Ok(Stability {
        stable: max_re < -eps,
        max_re,
        eigenvalues,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalMode {
    pub frequency: f64,
    pub damping: f64,
    /// False for a real eigenvalue that has no conjugate partner.
    pub paired: bool,
}

/// Normal modes from the drift spectrum, sorted by frequency (descending).
/// Real eigenvalues are returned individually with zero frequency and
/// `paired = false`.
pub fn normal_modes(eigenvalues: &[Complex64]) -> Vec<NormalMode> {
    let scale = eigenvalues.iter().map(|l| l.norm()).fold(1.0, f64::max);
    let tol = 1e-9 * scale;
    let mut modes: Vec<NormalMode> = eigenvalues
        .iter()
        .filter_map(|l| {
            if l.im > tol {
                Some(NormalMode {
                    frequency: l.im,
                    damping: -l.re,
                    paired: true,
                })
            } else if l.im.abs() <= tol {
                Some(NormalMode {
                    frequency: 0.0,
                    damping: -l.re,
                    paired: false,
                })
            } else {
                None
            }
        })
        .collect();
    modes.sort_by(|a, b| b.frequency.total_cmp(&a.frequency));
    modes
}

/// Reorder `current` so that each entry continues the branch in `previous`
/// with the smallest total frequency jump.
pub fn track_modes(previous: &[NormalMode], current: &[NormalMode]) -> Vec<NormalMode> {
    if previous.len() != current.len() || current.len() > 8 {
        return current.to_vec();
    }
    let n = current.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = perm.clone();
    let mut best_cost = f64::INFINITY;
    permute(&mut perm, 0, &mut |p| {
        let cost: f64 = p
            .iter()
            .enumerate()
            .map(|(i, &j)| (previous[i].frequency - current[j].frequency).abs())
            .sum();
        if cost < best_cost {
            best_cost = cost;
            best = p.to_vec();
        }
    });
    best.into_iter().map(|j| current[j]).collect()
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Which route produced a Lyapunov solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LyapunovMethod {
    Eigenbasis,
    Vectorized,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LyapunovSolution {
    pub v: Matrix6,
    pub method: LyapunovMethod,
    /// See [`lyapunov_residual`].
    pub residual: f64,
}

/// Backward error `max |A V + V A^T + D| / (2 max|A| max|V| + max|D|)`.
/// Scaling by `D` alone overstates rounding when `V` is much larger than `D`,
/// as for hot, weakly damped oscillators.
pub fn lyapunov_residual(a: &Matrix6, v: &Matrix6, d: &Matrix6) -> f64 {
    let r = a * v + v * a.transpose() + d;
    let scale = 2.0 * a.amax() * v.amax() + d.amax();
    if scale > 0.0 {
        r.amax() / scale
    } else {
        r.amax()
    }
}

/// Stationary covariance of a stable drift `a` driven by diffusion `d`.
pub fn solve_lyapunov(a: &Matrix6, d: &Matrix6) -> Result<Matrix6> {
    solve_lyapunov_detailed(a, d).map(|s| s.v)
}

/// Eigenbasis solve of `A V + V A^T = -D`: with `A = X L X^-1`, the transformed
/// unknown `X^-1 V X^-T` is `-(X^-1 D X^-T)_ij / (l_i + l_j)`. One step of
/// residual correction is applied. Falls back to the vectorized solve when
/// `l_i + l_j` nearly vanishes or the eigenvectors are too ill-conditioned to
/// meet the residual bound.
pub fn solve_lyapunov_detailed(a: &Matrix6, d: &Matrix6) -> Result<LyapunovSolution> {
    let st = stability(a, DEFAULT_STABILITY_EPS)?;
    if !st.stable {
        return Err(Error::Unstable { max_re: st.max_re });
    }
    let lambda = &st.eigenvalues;
    let min_sum = lambda
        .iter()
        .flat_map(|li| lambda.iter().map(move |lj| (li + lj).norm()))
        .fold(f64::INFINITY, f64::min);

    let eigen = if min_sum < LYAPUNOV_SINGULAR_SUM {
        warn!("Lyapunov: |lambda_i + lambda_j| = {min_sum:e}, using vectorized solve");
        None
    } else {
        Eigenbasis::new(a, lambda).and_then(|basis| {
            let v0 = basis.solve(d)?;
            let r = a * v0 + v0 * a.transpose() + d;
            let correction = basis.solve(&r)?;
            Some(symmetrize(&(v0 + correction)))
        })
    };

    if let Some(v) = eigen {
        let residual = lyapunov_residual(a, &v, d);
        if residual < LYAPUNOV_RESIDUAL_TOL {
            return Ok(LyapunovSolution {
                v,
                method: LyapunovMethod::Eigenbasis,
                residual,
            });
        }
        warn!("Lyapunov: eigenbasis residual {residual:e}, using vectorized solve");
    }

    let v = crate::oracle::lyapunov_vectorized(a, d)?;
    let residual = lyapunov_residual(a, &v, d);
    Ok(LyapunovSolution {
        v,
        method: LyapunovMethod::Vectorized,
        residual,
    })
}

struct Eigenbasis {
    lambda: [Complex64; 6],
    x: CMatrix6,
    x_inv: CMatrix6,
}

impl Eigenbasis {
    fn new(a: &Matrix6, eigenvalues: &[Complex64]) -> Option<Self> {
        let ac: CMatrix6 = a.map(|v| Complex64::new(v, 0.0));
        let mut lambda = [Complex64::new(0.0, 0.0); 6];
        let mut x = CMatrix6::zeros();
        let mut done = [false; 6];
        for i in 0..6 {
            if done[i] {
                continue;
            }
            let l = eigenvalues[i];
            let v = null_vector(&ac, l)?;
            lambda[i] = l;
            x.set_column(i, &v);
            done[i] = true;
            if l.im != 0.0 {
                // Conjugate partner gets the conjugate vector so X L X^-1 stays real.
                let partner = (0..6).filter(|&j| !done[j]).min_by(|&p, &q| {
                    (eigenvalues[p] - l.conj())
                        .norm()
                        .total_cmp(&(eigenvalues[q] - l.conj()).norm())
                })?;
                lambda[partner] = l.conj();
                x.set_column(partner, &v.map(|c| c.conj()));
                done[partner] = true;
            }
        }
        let x_inv = x.try_inverse()?;
        Some(Self { lambda, x, x_inv })
    }

    fn solve(&self, d: &Matrix6) -> Option<Matrix6> {
        let dc: CMatrix6 = d.map(|v| Complex64::new(v, 0.0));
        let mut t = self.x_inv * dc * self.x_inv.transpose();
        for i in 0..6 {
            for j in 0..6 {
                let s = self.lambda[i] + self.lambda[j];
                t[(i, j)] = -t[(i, j)] / s;
            }
        }
        let v = self.x * t * self.x.transpose();
        let out = v.map(|c| c.re);
        out.iter().all(|e| e.is_finite()).then_some(out)
    }
}

/// Unit vector spanning the (numerical) kernel of `a - l I`.
fn null_vector(a: &CMatrix6, l: Complex64) -> Option<SMatrix<Complex64, 6, 1>> {
    let shifted = a - CMatrix6::identity() * l;
    let svd = SVD::new(shifted, false, true);
    let v_t = svd.v_t?;
    let (k, _) = svd
        .singular_values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    let row = v_t.row(k);
    Some(row.adjoint().map(|c: Complex<f64>| c))
}

pub fn symmetrize(v: &Matrix6) -> Matrix6 {
    (v + v.transpose()) * 0.5
}

/// Smallest eigenvalue of `V + (i/2) sigma`, where `sigma` is the three-mode
/// symplectic form. Non-negative for a physical Gaussian state.
pub fn physicality_floor(v: &Matrix6) -> f64 {
    // Hermitian V + iS has the same spectrum as the real symmetric
    // [[V, -S], [S, V]] (each eigenvalue doubled).
    let mut s = Matrix6::zeros();
    for k in 0..3 {
        s[(2 * k, 2 * k + 1)] = 0.5;
        s[(2 * k + 1, 2 * k)] = -0.5;
    }
    let mut big = SMatrix::<f64, 12, 12>::zeros();
    big.fixed_view_mut::<6, 6>(0, 0).copy_from(v);
    big.fixed_view_mut::<6, 6>(6, 6).copy_from(v);
    big.fixed_view_mut::<6, 6>(0, 6).copy_from(&(-s));
    big.fixed_view_mut::<6, 6>(6, 0).copy_from(&s);
    let big = (big + big.transpose()) * 0.5;
    big.symmetric_eigenvalues().min()
}

/// `(V_xx + V_pp - 1) / 2` before clamping.
pub fn raw_occupation(v: &Matrix6, mode: Mode) -> f64 {
    (v[(mode.x_index(), mode.x_index())] + v[(mode.p_index(), mode.p_index())] - 1.0) / 2.0
}

/// Mean excitation number of `mode`, clamped at zero.
pub fn occupation(v: &Matrix6, mode: Mode) -> f64 {
    let n = raw_occupation(v, mode);
    if n < -NEGATIVE_OCCUPATION_TOL {
        warn!("{mode:?} occupation {n:e} is negative beyond tolerance; clamping to 0");
    }
    n.max(0.0)
}

/// `1 / (2 min(<x^2>, <p^2>))`; above 1 iff one quadrature is below vacuum.
pub fn squeezing(v: &Matrix6, mode: Mode) -> f64 {
    let vx = v[(mode.x_index(), mode.x_index())];
    let vp = v[(mode.p_index(), mode.p_index())];
    1.0 / (2.0 * vx.min(vp))
}

/// Drift, diffusion and spectrum for one operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub drift: Matrix6,
    pub diffusion: Matrix6,
    pub eigenvalues: Vec<Complex64>,
    pub max_re: f64,
    pub stable: bool,
}

impl LinearModel {
    pub fn new(m: &ModelParams, s: &ClassicalSteadyState) -> Result<Self> {
        Self::from_matrices(build_drift(m, s), build_diffusion(m))
    }

    pub fn from_matrices(drift: Matrix6, diffusion: Matrix6) -> Result<Self> {
        let st = stability(&drift, DEFAULT_STABILITY_EPS)?;
        Ok(Self {
            drift,
            diffusion,
            eigenvalues: st.eigenvalues,
            max_re: st.max_re,
            stable: st.stable,
        })
    }

    pub fn normal_modes(&self) -> Vec<NormalMode> {
        normal_modes(&self.eigenvalues)
    }

    pub fn steady_covariance(&self) -> Result<SteadyCovariance> {
        if !self.stable {
            return Err(Error::Unstable { max_re: self.max_re });
        }
        let sol = solve_lyapunov_detailed(&self.drift, &self.diffusion)?;
        Ok(SteadyCovariance::from_matrix(sol.v))
    }
}

/// Stationary covariance and the scalars read off it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyCovariance {
    pub v: [[f64; 6]; 6],
    pub n1: f64,
    pub n2: f64,
    /// Occupations before clamping at zero.
    pub n1_raw: f64,
    pub n2_raw: f64,
    pub var_x1: f64,
    pub var_p1: f64,
    pub var_x2: f64,
    pub var_p2: f64,
    pub s1: f64,
    pub s2: f64,
}

impl SteadyCovariance {
    pub fn from_matrix(v: Matrix6) -> Self {
        let mut rows = [[0.0; 6]; 6];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = v[(i, j)];
            }
        }
        Self {
            v: rows,
            n1: occupation(&v, Mode::Mirror),
            n2: occupation(&v, Mode::Sphere),
            n1_raw: raw_occupation(&v, Mode::Mirror),
            n2_raw: raw_occupation(&v, Mode::Sphere),
            var_x1: v[(2, 2)],
            var_p1: v[(3, 3)],
            var_x2: v[(4, 4)],
            var_p2: v[(5, 5)],
            s1: squeezing(&v, Mode::Mirror),
            s2: squeezing(&v, Mode::Sphere),
        }
    }

    pub fn matrix(&self) -> Matrix6 {
        Matrix6::from_fn(|i, j| self.v[i][j])
    }

    pub fn physicality_floor(&self) -> f64 {
        physicality_floor(&self.matrix())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Detuning;
    use crate::steady_state::classical_fixed_point;
    use approx::assert_relative_eq;

    fn uncoupled(delta: f64) -> (ModelParams, ClassicalSteadyState) {
        let m = ModelParams {
            omega1: 10.0,
            omega2: 3.4,
            gamma1: 2.8e-3,
            gamma2: 1e-3,
            g1: 0.0,
            g2: 0.0,
            chi: 0.0,
            drive: 0.0,
            n1: 40.0,
            n2: 120.0,
            detuning: Detuning::Effective(delta),
        };
        let s = classical_fixed_point(&m).unwrap();
        (m, s)
    }

    #[test]
    fn uncoupled_drift_is_block_diagonal() {
        let (m, s) = uncoupled(-27.2);
        let a = build_drift(&m, &s);
        #[rustfmt::skip]
        let want = Matrix6::from_row_slice(&[
            -1.0, 27.2, 0.0, 0.0, 0.0, 0.0,
            -27.2, -1.0, 0.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 10.0, 0.0, 0.0,
            0.0, 0.0, -10.0, -5.6e-3, 0.0, 0.0,
            0.0, 0.0, 0.0, 0.0, 0.0, 3.4,
            0.0, 0.0, 0.0, 0.0, -3.4, -2e-3,
        ]);
        assert_eq!(a, want);
    }

    #[test]
    fn diffusion_entries() {
        let (m, _) = uncoupled(0.0);
        let d = build_diffusion(&m);
        assert_eq!(d[(0, 0)], 1.0);
        assert_eq!(d[(1, 1)], 1.0);
        assert_eq!(d[(3, 3)], 2.0 * 2.8e-3 * 81.0);
        let vacuum = ModelParams {
            gamma1: 0.0,
            gamma2: 0.0,
            ..m.clone()
        };
        assert_eq!(
            build_diffusion(&vacuum),
            Matrix6::from_diagonal(&nalgebra::Vector6::new(1.0, 1.0, 0.0, 0.0, 0.0, 0.0))
        );
        let sphere = ModelParams {
            gamma2: 1e-8,
            n2: 1.2e5,
            ..m
        };
        assert!((build_diffusion(&sphere)[(5, 5)] - 4.8e-3).abs() < 1e-7);
    }

    #[test]
    fn stability_uncoupled_and_marginal() {
        let (m, s) = uncoupled(-3.0);
        assert!(stability(&build_drift(&m, &s), DEFAULT_STABILITY_EPS).unwrap().stable);
        let undamped = ModelParams {
            gamma1: 0.0,
            gamma2: 0.0,
            ..m
        };
        let st = stability(&build_drift(&undamped, &s), DEFAULT_STABILITY_EPS).unwrap();
        assert!(!st.stable);
        assert!(st.max_re.abs() < 1e-12);
    }

    #[test]
    fn uncoupled_normal_modes() {
        let (m, s) = uncoupled(-27.2);
        let model = LinearModel::new(&m, &s).unwrap();
        let f: Vec<f64> = model.normal_modes().iter().map(|n| n.frequency).collect();
        assert_eq!(f.len(), 3);
        // damped oscillator: Im = sqrt(omega^2 - gamma^2)
        assert_relative_eq!(f[0], 27.2, max_relative = 1e-12);
        assert_relative_eq!(f[1], (100.0 - 2.8e-3f64.powi(2)).sqrt(), max_relative = 1e-12);
        assert_relative_eq!(f[2], (3.4f64.powi(2) - 1e-6).sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn real_eigenvalues_are_unpaired() {
        let mut a = Matrix6::from_diagonal_element(-1.0);
        a[(0, 0)] = -2.0;
        let modes = normal_modes(&eigenvalues(&a).unwrap());
        assert_eq!(modes.len(), 6);
        assert!(modes.iter().all(|m| !m.paired && m.frequency == 0.0));
    }

    #[test]
    fn tracking_follows_branches() {
        let mk = |f: f64| NormalMode {
            frequency: f,
            damping: 0.1,
            paired: true,
        };
        let prev = [mk(27.0), mk(5.0), mk(3.4)];
        let cur = [mk(27.0), mk(3.45), mk(4.8)];
        let tracked = track_modes(&prev, &cur);
        assert_eq!(tracked[1].frequency, 4.8);
        assert_eq!(tracked[2].frequency, 3.45);
    }

    #[test]
    fn thermal_oscillator_covariance() {
        let (m, s) = uncoupled(-5.0);
        let model = LinearModel::new(&m, &s).unwrap();
        let cov = model.steady_covariance().unwrap();
        let v = cov.matrix();
        // cavity: vacuum
        assert_relative_eq!(v[(0, 0)], 0.5, max_relative = 1e-12);
        assert_relative_eq!(v[(1, 1)], 0.5, max_relative = 1e-12);
        assert!(v[(0, 1)].abs() < 1e-12);
        // oscillators: thermal, exactly n + 1/2 for this damping model
        assert_relative_eq!(cov.var_p1, 40.5, max_relative = 1e-10);
        assert_relative_eq!(cov.var_x1, 40.5, max_relative = 1e-10);
        assert_relative_eq!(cov.n2, 120.0, max_relative = 1e-10);
        assert!(cov.s1 < 1.0 && cov.s2 < 1.0);
    }

    #[test]
    fn occupation_and_squeezing_blocks() {
        let ground = Matrix6::from_diagonal_element(0.5);
        assert_eq!(occupation(&ground, Mode::Sphere), 0.0);
        assert_eq!(squeezing(&ground, Mode::Sphere), 1.0);
        let thermal = Matrix6::from_diagonal_element(7.5);
        assert_eq!(occupation(&thermal, Mode::Mirror), 7.0);
        assert!(squeezing(&thermal, Mode::Mirror) < 1.0);
        let mut squeezed = ground;
        squeezed[(5, 5)] = 0.4;
        squeezed[(4, 4)] = 0.625;
        assert!(squeezing(&squeezed, Mode::Sphere) > 1.0);
        assert!(physicality_floor(&squeezed) > -1e-12);
    }

    #[test]
    fn unphysical_covariance_detected() {
        let mut v = Matrix6::from_diagonal_element(0.5);
        v[(5, 5)] = 0.3;
        assert!(physicality_floor(&v) < -0.01);
        assert!(raw_occupation(&v, Mode::Sphere) < 0.0);
        assert_eq!(occupation(&v, Mode::Sphere), 0.0);
    }

    #[test]
    fn unstable_drift_rejected() {
        let a = Matrix6::from_diagonal_element(0.1);
        let d = Matrix6::identity();
        assert!(matches!(solve_lyapunov(&a, &d), Err(Error::Unstable { .. })));
    }
}
