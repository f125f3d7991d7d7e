use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Box over effective detuning (linear) and drive (searched in `ln P`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBounds {
    pub detuning: (f64, f64),
    pub drive: (f64, f64),
}

impl SearchBounds {
    pub fn validate(&self) -> Result<()> {
        let (dl, dh) = self.detuning;
        if !(dl.is_finite() && dh.is_finite() && dl < dh) {
            return Err(Error::InvalidParam {
                field: "detuning_bounds",
                reason: format!("need finite lo < hi, got [{dl}, {dh}]"),
            });
        }
        let (pl, ph) = self.drive;
        if !(pl > 0.0 && ph.is_finite() && pl < ph) {
            return Err(Error::InvalidParam {
                field: "drive_bounds",
                reason: format!("need 0 < lo < hi < inf, got [{pl:e}, {ph:e}]"),
            });
        }
        Ok(())
    }

    fn lower(&self) -> [f64; 2] {
        [self.detuning.0, self.drive.0.ln()]
    }

    fn upper(&self) -> [f64; 2] {
        [self.detuning.1, self.drive.1.ln()]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimizerOptions {
    /// Coarse grid points per axis.
    pub coarse_points: usize,
    /// Refinement stops once steps fall below this relative size: a
    /// fractional change of the drive, and a fraction of the largest
    /// detuning magnitude in the bounds.
    pub step_floor: f64,
    /// Number of best coarse points refined independently.
    pub starts: usize,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            coarse_points: 25,
            step_floor: 1e-3,
            starts: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Optimum {
    pub detuning: f64,
    pub drive: f64,
    /// `+inf` when no probed point was feasible.
    pub value: f64,
    pub evaluations: usize,
    pub on_boundary: bool,
}

impl Optimum {
    pub fn feasible(&self) -> bool {
        self.value.is_finite()
    }
}

/// Minimize `f(detuning, drive)` over `bounds`: a coarse grid (linear in
/// detuning, logarithmic in drive), then pattern search with step halving
/// and a Nelder-Mead polish from the best few grid points. `f` returns `+inf` where the
/// system is unstable. Deterministic for a given `f` and options.
pub fn optimize_scalar<F>(f: F, bounds: &SearchBounds, opts: &OptimizerOptions) -> Result<Optimum>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    bounds.validate()?;
    if opts.coarse_points < 2 || !(opts.step_floor > 0.0 && opts.step_floor < 1.0) || opts.starts == 0 {
        return Err(Error::InvalidParam {
            field: "optimizer",
            reason: format!("bad options {opts:?}"),
        });
    }
    let lo = bounds.lower();
    let hi = bounds.upper();
    let n = opts.coarse_points;
    let spacing = [(hi[0] - lo[0]) / (n - 1) as f64, (hi[1] - lo[1]) / (n - 1) as f64];
    let eval = |u: [f64; 2]| {
        let v = f(u[0], u[1].exp());
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut coarse: Vec<([f64; 2], f64)> = (0..n * n)
        .into_par_iter()
        .map(|k| {
            let u = [lo[0] + spacing[0] * (k / n) as f64, lo[1] + spacing[1] * (k % n) as f64];
            (u, eval(u))
        })
        .collect();
    let mut evaluations = coarse.len();
    // stable sort keeps grid order among ties
    coarse.sort_by(|a, b| a.1.total_cmp(&b.1));
    if !coarse[0].1.is_finite() {
        log::warn!("optimizer: objective infinite on the whole coarse grid");
        return Ok(Optimum {
            detuning: coarse[0].0[0],
            drive: coarse[0].0[1].exp(),
            value: f64::INFINITY,
            evaluations,
            on_boundary: false,
        });
    }

    let starts: Vec<([f64; 2], f64)> = coarse
        .iter()
        .take(opts.starts)
        .filter(|c| c.1.is_finite())
        .copied()
        .collect();
    let refined: Vec<([f64; 2], f64, usize)> = starts
        .par_iter()
        .map(|&(u, v)| {
            let (u, v, e1) = descend(&eval, u, v, spacing, lo, hi, opts.step_floor);
            let (u, v, e2) = polish(&eval, u, v, spacing, lo, hi, opts.step_floor);
            (u, v, e1 + e2)
        })
        .collect();
    let mut best = (coarse[0].0, coarse[0].1);
    for (u, v, e) in refined {
        evaluations += e;
        if v < best.1 {
            best = (u, v);
        }
    }

    let (u, value) = best;
    let floors = step_floors(opts.step_floor, lo, hi);
    let on_boundary = (0..2).any(|i| u[i] - lo[i] <= floors[i] || hi[i] - u[i] <= floors[i]);
    if on_boundary {
        log::warn!(
            "optimizer: optimum at detuning {:.6}, drive {:.6e} lies on the search boundary",
            u[0],
            u[1].exp()
        );
    }
    Ok(Optimum {
        detuning: u[0],
        drive: u[1].exp(),
        value,
        evaluations,
        on_boundary,
    })
}

/// Smallest steps in `(detuning, ln P)`.
fn step_floors(floor: f64, lo: [f64; 2], hi: [f64; 2]) -> [f64; 2] {
    [floor * lo[0].abs().max(hi[0].abs()).max(1.0), floor]
}

/// Best single-axis moves from `base`, each axis tried in turn.
fn explore<E: Fn([f64; 2]) -> f64>(
    eval: &E,
    base: [f64; 2],
    value: f64,
    step: [f64; 2],
    lo: [f64; 2],
    hi: [f64; 2],
    evaluations: &mut usize,
) -> ([f64; 2], f64) {
    let (mut u, mut value) = (base, value);
    for axis in 0..2 {
        for dir in [1.0, -1.0] {
            let mut trial = u;
            trial[axis] = (u[axis] + dir * step[axis]).clamp(lo[axis], hi[axis]);
            if trial[axis] == u[axis] {
                continue;
            }
            let v = eval(trial);
            *evaluations += 1;
            if v < value {
                u = trial;
                value = v;
                break;
            }
        }
    }
    (u, value)
}

/// Hooke-Jeeves pattern search: exploratory axis moves, then repeated
/// extrapolation along the last successful displacement, so that narrow
/// diagonal valleys are followed rather than zig-zagged.
fn descend<E: Fn([f64; 2]) -> f64>(
    eval: &E,
    mut u: [f64; 2],
    mut value: f64,
    mut step: [f64; 2],
    lo: [f64; 2],
    hi: [f64; 2],
    floor: f64,
) -> ([f64; 2], f64, usize) {
    let floors = step_floors(floor, lo, hi);
    let mut evaluations = 0;
    while step[0] >= floors[0] || step[1] >= floors[1] {
        let (next, v) = explore(eval, u, value, step, lo, hi, &mut evaluations);
        if v >= value {
            step = [0.5 * step[0], 0.5 * step[1]];
            continue;
        }
        let (mut prev, mut cur, mut cur_v) = (u, next, v);
        loop {
            let jump = [
                (2.0 * cur[0] - prev[0]).clamp(lo[0], hi[0]),
                (2.0 * cur[1] - prev[1]).clamp(lo[1], hi[1]),
            ];
            let jv = eval(jump);
            evaluations += 1;
            let (cand, cand_v) = explore(eval, jump, jv, step, lo, hi, &mut evaluations);
            if cand_v < cur_v {
                prev = cur;
                cur = cand;
                cur_v = cand_v;
            } else {
                break;
            }
        }
        u = cur;
        value = cur_v;
    }
    (u, value, evaluations)
}

/// Evaluation cap for [`polish`].
const POLISH_EVALUATIONS: usize = 4000;

/// Nelder-Mead in coordinates scaled by the coarse spacing, started from the
/// pattern-search result. The simplex stretches along narrow curved valleys
/// that defeat axis-aligned moves. Trial points are clamped to the box.
fn polish<E: Fn([f64; 2]) -> f64>(
    eval: &E,
    u: [f64; 2],
    value: f64,
    spacing: [f64; 2],
    lo: [f64; 2],
    hi: [f64; 2],
    floor: f64,
) -> ([f64; 2], f64, usize) {
    let floors = step_floors(floor, lo, hi);
    let to_u = |z: [f64; 2]| {
        [
            (z[0] * spacing[0]).clamp(lo[0], hi[0]),
            (z[1] * spacing[1]).clamp(lo[1], hi[1]),
        ]
    };
    let evaluations = std::cell::Cell::new(0);
    let f = |z: [f64; 2]| {
        evaluations.set(evaluations.get() + 1);
        eval(to_u(z))
    };
    let z0 = [u[0] / spacing[0], u[1] / spacing[1]];
    let size = [4.0 * floors[0] / spacing[0], 4.0 * floors[1] / spacing[1]];
    let mut simplex = vec![(z0, value)];
    for axis in 0..2 {
        let mut z = z0;
        z[axis] += size[axis];
        simplex.push((z, f(z)));
    }
    let tol = [floors[0] / spacing[0] * 1e-2, floors[1] / spacing[1] * 1e-2];
    while evaluations.get() < POLISH_EVALUATIONS {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let spread = |k: usize| {
            simplex
                .iter()
                .map(|p| (p.0[k] - simplex[0].0[k]).abs())
                .fold(0.0, f64::max)
        };
        if spread(0) < tol[0] && spread(1) < tol[1] {
            break;
        }
        let c = [
            0.5 * (simplex[0].0[0] + simplex[1].0[0]),
            0.5 * (simplex[0].0[1] + simplex[1].0[1]),
        ];
        let worst = simplex[2];
        let along = |t: f64| [c[0] + t * (worst.0[0] - c[0]), c[1] + t * (worst.0[1] - c[1])];
        let r = along(-1.0);
        let fr = f(r);
        if fr < simplex[0].1 {
            let e = along(-2.0);
            let fe = f(e);
            simplex[2] = if fe < fr { (e, fe) } else { (r, fr) };
        } else if fr < simplex[1].1 {
            simplex[2] = (r, fr);
        } else {
            let k = if fr < worst.1 { along(-0.5) } else { along(0.5) };
            let fk = f(k);
            if fk < worst.1.min(fr) {
                simplex[2] = (k, fk);
            } else {
                let best = simplex[0].0;
                for p in simplex.iter_mut().skip(1) {
                    p.0 = [0.5 * (p.0[0] + best[0]), 0.5 * (p.0[1] + best[1])];
                    p.1 = f(p.0);
                }
            }
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (z, v) = simplex[0];
    if v < value {
        (to_u(z), v, evaluations.get())
    } else {
        (u, value, evaluations.get())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_quadratic_minimum() {
        let bounds = SearchBounds {
            detuning: (-40.0, 0.0),
            drive: (1e2, 1e10),
        };
        let (d0, p0): (f64, f64) = (-13.3, 3.7e6);
        let f = |d: f64, p: f64| (d - d0).powi(2) + 4.0 * (p.ln() - p0.ln()).powi(2);
        let opt = optimize_scalar(f, &bounds, &OptimizerOptions::default()).unwrap();
        assert!((opt.detuning - d0).abs() < 1e-3 * 40.0);
        assert!((opt.drive / p0 - 1.0).abs() < 2e-3);
        assert!(!opt.on_boundary);
        let again = optimize_scalar(f, &bounds, &OptimizerOptions::default()).unwrap();
        assert_eq!(opt, again);
    }

    #[test]
    fn never_worse_than_the_grid() {
        let bounds = SearchBounds {
            detuning: (-5.0, 5.0),
            drive: (1.0, 1e4),
        };
        let f = |d: f64, p: f64| (3.0 * d).sin() + (p.ln()).cos() * 0.5;
        let opt = optimize_scalar(f, &bounds, &OptimizerOptions::default()).unwrap();
        let grid_min = (0..625)
            .map(|k| {
                let d = -5.0 + 10.0 * (k / 25) as f64 / 24.0;
                let p = (1e4f64.ln() * (k % 25) as f64 / 24.0).exp();
                f(d, p)
            })
            .fold(f64::INFINITY, f64::min);
        assert!(opt.value <= grid_min);
    }

    #[test]
    fn boundary_and_infeasible() {
        let bounds = SearchBounds {
            detuning: (-1.0, 1.0),
            drive: (1.0, 10.0),
        };
        let opt = optimize_scalar(|d, _| d, &bounds, &OptimizerOptions::default()).unwrap();
        assert!(opt.on_boundary);
        assert_eq!(opt.detuning, -1.0);
        let none = optimize_scalar(|_, _| f64::INFINITY, &bounds, &OptimizerOptions::default()).unwrap();
        assert!(!none.feasible());
        let bad = SearchBounds {
            detuning: (0.0, f64::INFINITY),
            drive: (1.0, 10.0),
        };
        assert!(optimize_scalar(|d, _| d, &bad, &OptimizerOptions::default()).is_err());
    }
}
