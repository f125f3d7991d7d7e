//! Independent routes to the stationary covariance, used to cross-check the
//! eigenbasis Lyapunov solver.
//!
//! * [`lyapunov_vectorized`] solves the 36 unknowns of `A V + V A^T = -D`
//!   as one dense linear system.
//! * [`integrate_moments`] follows the covariance flow
//!   `dV/dt = A V + V A^T + D` with classical RK4 until it settles.

use nalgebra::{DMatrix, DVector, SMatrix};
use twofloat::TwoFloat;

use crate::error::{Error, Result};
use crate::linear::{eigenvalues, symmetrize, Matrix6};

/// Dimension of the space of symmetric 6x6 matrices.
const SYM_DIM: usize = 21;
type SymOp = SMatrix<f64, SYM_DIM, SYM_DIM>;
type SymVec = SMatrix<f64, SYM_DIM, 1>;

/// Norm beyond which the moment flow is declared divergent.
pub const DIVERGENCE_NORM: f64 = 1e12;

/// Solve `(I kron A + A kron I) vec(V) = -vec(D)` by fully pivoted LU.
pub fn lyapunov_vectorized(a: &Matrix6, d: &Matrix6) -> Result<Matrix6> {
    let n = 6;
    let mut op = DMatrix::<f64>::zeros(n * n, n * n);
    // column-major vec: vec(A V) = (I kron A) vec(V), vec(V A^T) = (A kron I) vec(V)
    for col in 0..n {
        for row in 0..n {
            let r = row + n * col;
            for k in 0..n {
                op[(r, k + n * col)] += a[(row, k)];
                op[(r, row + n * k)] += a[(col, k)];
            }
        }
    }
    let rhs = DVector::from_iterator(n * n, d.iter().map(|x| -x));
    let lu = op.full_piv_lu();
    if !lu.is_invertible() {
        return Err(Error::SingularLyapunov { min_sum: 0.0 });
    }
    let sol = lu.solve(&rhs).ok_or(Error::SingularLyapunov { min_sum: 0.0 })?;
    if sol.iter().any(|x| !x.is_finite()) {
        return Err(Error::SingularLyapunov { min_sum: 0.0 });
    }
    let v = Matrix6::from_column_slice(sol.as_slice());
    Ok(symmetrize(&v))
}

/// Time grid and stopping rule for [`integrate_moments`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSpec {
    /// Maximum RK4 step, in units of `1 / kappa_c`.
    pub dt: f64,
    pub horizon: f64,
    /// Stop once `|V(2t) - V(t)|_F / |V(2t)|_F` drops below this.
    pub convergence_tol: f64,
}

impl IntegrationSpec {
    pub fn new(dt: f64, horizon: f64, convergence_tol: f64) -> Result<Self> {
        for (field, v) in [("dt", dt), ("horizon", horizon), ("convergence_tol", convergence_tol)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParam {
                    field,
                    reason: format!("must be > 0, got {v:e}"),
                });
            }
        }
        Ok(Self {
            dt,
            horizon,
            convergence_tol,
        })
    }

    /// `dt = 1e-2 / max(|lambda|, 1)`, horizon `50 / |max Re lambda|`.
    pub fn for_drift(a: &Matrix6) -> Result<Self> {
        let eig = eigenvalues(a)?;
        let fastest = eig.iter().map(|l| l.norm()).fold(1.0, f64::max);
        let slowest = eig.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
        let horizon = if slowest < 0.0 { 50.0 / slowest.abs() } else { 1e3 };
        Self::new(1e-2 / fastest, horizon, 1e-14)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentTrajectory {
    pub v: Matrix6,
    /// Time actually reached.
    pub t: f64,
    pub steps: u64,
    pub converged: bool,
}

/// Integrate `dV/dt = A V + V A^T + D` from `v0` with fixed-step RK4.
///
/// The flow is affine in `V`, so one RK4 step of size `h` is the map
/// `V -> V + E V + c` with `E = h P(hL) L`, `c = h P(hL) D` and
/// `P(z) = 1 + z/2 + z^2/6 + z^3/24`. Runs of `2^k` identical steps are
/// composed by doubling `(E, c) -> (2E + E^2, 2c + E c)`. With damping rates
/// spread over eight decades, the slow part of `E` sits far below the
/// rounding floor of the fast part, so the step map and its doublings are
/// carried in double-double arithmetic. The state lives on the 21
/// independent entries of a symmetric matrix, so symmetry holds exactly.
pub fn integrate_moments(a: &Matrix6, d: &Matrix6, v0: &Matrix6, spec: &IntegrationSpec) -> Result<MomentTrajectory> {
    let doublings = (spec.horizon / spec.dt).log2().ceil().max(0.0) as u32;
    if doublings > 62 {
        return Err(Error::InvalidParam {
            field: "horizon",
            reason: format!("needs 2^{doublings} steps of the requested size"),
        });
    }
    let h = spec.horizon / 2f64.powi(doublings as i32);

    let hl = DdOp::from_f64(&sym_operator(a)).scale(TwoFloat::from(h));
    let one = TwoFloat::from(1.0);
    let mut q = DdOp::identity().scale(one / 6.0).add(&hl.scale(one / 24.0));
    for k in [2.0, 1.0] {
        q = DdOp::identity().scale(one / k).add(&hl.mul(&q));
    }
    let mut e = hl.mul(&q);
    let dh: Vec<TwoFloat> = to_sym(d).iter().map(|x| TwoFloat::from(*x) * h).collect();
    let mut c = q.apply(&dh);

    let x0: Vec<TwoFloat> = to_sym(&symmetrize(v0)).iter().map(|x| TwoFloat::from(*x)).collect();
    let apply = |e: &DdOp, c: &[TwoFloat]| -> SymVec {
        let ex = e.apply(&x0);
        SymVec::from_iterator((0..SYM_DIM).map(|i| f64::from(x0[i] + ex[i] + c[i])))
    };
    let mut prev = to_sym(&symmetrize(v0));
    let mut steps: u64 = 1;
    let mut x = apply(&e, &c);
    for _ in 0..doublings {
        let t = steps as f64 * h;
        check_divergence(&x, t)?;
        let change = (x - prev).norm() / x.norm().max(f64::MIN_POSITIVE);
        if change < spec.convergence_tol && steps > 1 {
            return Ok(MomentTrajectory {
                v: from_sym(&x),
                t,
                steps,
                converged: true,
            });
        }
        let ec = e.apply(&c);
        c = c.iter().zip(&ec).map(|(ci, eci)| *ci * 2.0 + *eci).collect();
        e = e.scale(TwoFloat::from(2.0)).add(&e.mul(&e));
        steps *= 2;
        prev = x;
        x = apply(&e, &c);
    }
    let t = steps as f64 * h;
    check_divergence(&x, t)?;
    Ok(MomentTrajectory {
        v: from_sym(&x),
        t,
        steps,
        converged: false,
    })
}

/// Dense 21x21 operator in double-double precision, row-major.
#[derive(Clone)]
struct DdOp(Vec<TwoFloat>);

impl DdOp {
    fn from_f64(m: &SymOp) -> Self {
        Self(
            (0..SYM_DIM * SYM_DIM)
                .map(|k| TwoFloat::from(m[(k / SYM_DIM, k % SYM_DIM)]))
                .collect(),
        )
    }

    fn identity() -> Self {
        Self(
            (0..SYM_DIM * SYM_DIM)
                .map(|k| TwoFloat::from(if k / SYM_DIM == k % SYM_DIM { 1.0 } else { 0.0 }))
                .collect(),
        )
    }

    fn scale(&self, s: TwoFloat) -> Self {
        Self(self.0.iter().map(|x| *x * s).collect())
    }

    fn add(&self, o: &Self) -> Self {
        Self(self.0.iter().zip(&o.0).map(|(x, y)| *x + *y).collect())
    }

    fn mul(&self, o: &Self) -> Self {
        let mut out = vec![TwoFloat::from(0.0); SYM_DIM * SYM_DIM];
        for i in 0..SYM_DIM {
            for k in 0..SYM_DIM {
                let aik = self.0[i * SYM_DIM + k];
                if aik == 0.0 {
                    continue;
                }
                for j in 0..SYM_DIM {
                    out[i * SYM_DIM + j] += aik * o.0[k * SYM_DIM + j];
                }
            }
        }
        Self(out)
    }

    fn apply(&self, x: &[TwoFloat]) -> Vec<TwoFloat> {
        (0..SYM_DIM)
            .map(|i| {
                let mut acc = TwoFloat::from(0.0);
                for k in 0..SYM_DIM {
                    acc += self.0[i * SYM_DIM + k] * x[k];
                }
                acc
            })
            .collect()
    }
}

fn check_divergence(x: &SymVec, t: f64) -> Result<()> {
    if !x.iter().all(|v| v.is_finite()) || x.amax() > DIVERGENCE_NORM {
        return Err(Error::Diverged { t });
    }
    Ok(())
}

fn sym_index() -> impl Iterator<Item = (usize, usize)> {
    (0..6).flat_map(|i| (i..6).map(move |j| (i, j)))
}

fn to_sym(m: &Matrix6) -> SymVec {
    SymVec::from_iterator(sym_index().map(|(i, j)| m[(i, j)]))
}

fn from_sym(x: &SymVec) -> Matrix6 {
    let mut m = Matrix6::zeros();
    for (k, (i, j)) in sym_index().enumerate() {
        m[(i, j)] = x[k];
        m[(j, i)] = x[k];
    }
    m
}

/// Matrix of `V -> A V + V A^T` restricted to symmetric `V`.
fn sym_operator(a: &Matrix6) -> SymOp {
    let mut op = SymOp::zeros();
    for (k, (i, j)) in sym_index().enumerate() {
        let mut basis = Matrix6::zeros();
        basis[(i, j)] = 1.0;
        basis[(j, i)] = 1.0;
        let image = a * basis + basis * a.transpose();
        op.set_column(k, &to_sym(&image));
    }
    op
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn diagonal_closed_form() {
        let rates = [0.5, 0.5, 2.0, 2.0, 0.1, 0.1];
        let a = Matrix6::from_diagonal(&nalgebra::Vector6::from_iterator(rates.iter().map(|r| -r)));
        let d = Matrix6::from_diagonal(&nalgebra::Vector6::new(1.0, 1.0, 0.0, 3.0, 0.0, 0.7));
        let v = lyapunov_vectorized(&a, &d).unwrap();
        for i in 0..6 {
            assert_relative_eq!(v[(i, i)], d[(i, i)] / (2.0 * rates[i]), max_relative = 1e-14);
        }
    }

    #[test]
    fn scalar_like_flow_closed_form() {
        let a = -Matrix6::identity();
        let d = Matrix6::identity() * 2.0;
        for horizon in [0.25, 1.0, 3.0] {
            let spec = IntegrationSpec::new(1e-3, horizon, 1e-300).unwrap();
            let traj = integrate_moments(&a, &d, &Matrix6::zeros(), &spec).unwrap();
            assert!(!traj.converged);
            let want = 1.0 - (-2.0 * traj.t).exp();
            for i in 0..6 {
                assert_relative_eq!(traj.v[(i, i)], want, max_relative = 1e-11);
                assert_eq!(traj.v[(i, (i + 1) % 6)], 0.0);
            }
        }
        let spec = IntegrationSpec::for_drift(&a).unwrap();
        let traj = integrate_moments(&a, &d, &Matrix6::zeros(), &spec).unwrap();
        assert_relative_eq!(traj.v, Matrix6::identity(), epsilon = 1e-12);
    }

    #[test]
    fn flipped_damping_diverges() {
        let mut a = Matrix6::zeros();
        for k in 0..3 {
            a[(2 * k, 2 * k + 1)] = 1.0;
            a[(2 * k + 1, 2 * k)] = -1.0;
            a[(2 * k + 1, 2 * k + 1)] = 0.2;
        }
        let spec = IntegrationSpec::new(1e-2, 1e4, 1e-15).unwrap();
        let r = integrate_moments(&a, &Matrix6::identity(), &Matrix6::identity(), &spec);
        assert!(matches!(r, Err(Error::Diverged { .. })));
        assert!(!crate::linear::stability(&a, 1e-12).unwrap().stable);
    }

    #[test]
    fn singular_operator_rejected() {
        let a = Matrix6::zeros();
        assert!(lyapunov_vectorized(&a, &Matrix6::identity()).is_err());
    }

    #[test]
    fn spec_validation() {
        assert!(IntegrationSpec::new(0.0, 1.0, 1e-9).is_err());
        assert!(IntegrationSpec::new(1e-3, -1.0, 1e-9).is_err());
    }
}
