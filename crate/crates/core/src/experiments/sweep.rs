use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate_point, is_stable, Grid, PointResult};
use crate::error::{Error, Result};
use crate::linear::{track_modes, NormalMode};
use crate::params::ModelParams;

/// Relative bracket width at which threshold bisection stops.
pub const THRESHOLD_REL_WIDTH: f64 = 1e-4;
/// Occupation mismatch below which the oscillators count as thermalized.
pub const HYBRID_MISMATCH: f64 = 0.1;

/// Bisected instability threshold: stable at `lo`, unstable at `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Threshold {
    pub lo: f64,
    pub hi: f64,
    /// Number of stability verdicts taken.
    pub evaluations: usize,
}

impl Threshold {
    pub fn estimate(&self) -> f64 {
        (self.lo * self.hi).sqrt()
    }
}

/// Bisect the drive between a stable `lo` and an unstable `hi` until the
/// bracket is narrower than `1e-4` relative.
pub fn instability_threshold(m: &ModelParams, lo: f64, hi: f64) -> Result<Threshold> {
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::BadBracket { lo, hi });
    }
    if !is_stable(&m.with_drive(lo))? || is_stable(&m.with_drive(hi))? {
        return Err(Error::BadBracket { lo, hi });
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut evaluations = 2;
    while (hi - lo) / hi > THRESHOLD_REL_WIDTH {
        let mid = (lo * hi).sqrt();
        evaluations += 1;
        if is_stable(&m.with_drive(mid))? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Threshold { lo, hi, evaluations })
}

/// Where the two mechanical branches come closest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Hybridization {
    /// Drive at minimum branch separation after refinement.
    pub drive: f64,
    pub separation: f64,
    pub n1: f64,
    pub n2: f64,
    /// `|n1 - n2| / max(n1, n2)` at `drive`.
    pub mismatch: f64,
    /// Grid row with the smallest separation.
    pub grid_index: usize,
    /// Drive interval around `drive` where `mismatch < 0.1`, if any.
    pub window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerSweep {
    pub params: ModelParams,
    /// Grid rows up to and including the first unstable one. Mode lists are
    /// tracked: entry `k` continues the same branch from row to row.
    pub rows: Vec<PointResult>,
    pub threshold: Option<Threshold>,
    pub hybridization: Option<Hybridization>,
}

impl PowerSweep {
    pub fn stable_rows(&self) -> impl Iterator<Item = &PointResult> {
        self.rows.iter().filter(|r| r.stable())
    }
}

/// Sweep the drive over `grid`, track normal modes, stop at the first
/// unstable point, bisect the threshold and refine the hybridization point.
pub fn power_sweep(m: &ModelParams, grid: &Grid) -> Result<PowerSweep> {
    grid.validate()?;
    m.validate()?;
    let drives = grid.points();
    let evaluated: Vec<PointResult> = drives
        .par_iter()
        .map(|&p| evaluate_point(&m.with_drive(p)))
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(evaluated.len());
    for r in evaluated {
        let stop = !r.stable();
        rows.push(r);
        if stop {
            break;
        }
    }
    for i in 1..rows.len() {
        if rows[i].stable() && rows[i - 1].stable() {
            rows[i].modes = track_modes(&rows[i - 1].modes, &rows[i].modes);
        }
    }

    let threshold = match rows.last() {
        Some(last) if !last.stable() && rows.len() >= 2 => {
            Some(instability_threshold(m, rows[rows.len() - 2].drive, last.drive)?)
        }
        Some(last) if !last.stable() => {
            log::warn!("sweep unstable at its first point (drive {:e})", last.drive);
            None
        }
        _ => None,
    };
    let hybridization = find_hybridization(m, &rows)?;
    Ok(PowerSweep {
        params: m.clone(),
        rows,
        threshold,
        hybridization,
    })
}

/// Frequencies of the two slowest oscillating modes.
fn mechanical_separation(modes: &[NormalMode]) -> Option<f64> {
    let mut f: Vec<f64> = modes.iter().filter(|m| m.paired).map(|m| m.frequency).collect();
    if f.len() < 3 {
        return None;
    }
    f.sort_by(f64::total_cmp);
    Some(f[1] - f[0])
}

fn mismatch(r: &PointResult) -> Option<(f64, f64, f64)> {
    let c = r.covariance.as_ref()?;
    let big = c.n1.max(c.n2);
    let mis = if big > 0.0 { (c.n1 - c.n2).abs() / big } else { 0.0 };
    Some((c.n1, c.n2, mis))
}

fn separation_at(m: &ModelParams, ln_p: f64) -> Result<f64> {
    let r = evaluate_point(&m.with_drive(ln_p.exp()))?;
    Ok(if r.stable() {
        mechanical_separation(&r.modes).unwrap_or(f64::INFINITY)
    } else {
        f64::INFINITY
    })
}

/// Locate the minimum mechanical-branch separation on the grid, then polish
/// it by golden-section search in `ln P` between the neighbouring rows. The
/// hybridization window is typically much narrower than a log-grid spacing.
fn find_hybridization(m: &ModelParams, rows: &[PointResult]) -> Result<Option<Hybridization>> {
    let stable: Vec<(usize, f64)> = rows
        .iter()
        .enumerate()
        .filter(|(_, r)| r.stable() && r.drive > 0.0)
        .filter_map(|(i, r)| mechanical_separation(&r.modes).map(|s| (i, s)))
        .collect();
    let Some(&(k, _)) = stable.iter().min_by(|a, b| a.1.total_cmp(&b.1)) else {
        return Ok(None);
    };
    let lo = if k > 0 {
        rows[k - 1].drive.max(f64::MIN_POSITIVE)
    } else {
        rows[k].drive
    };
    let hi = if k + 1 < rows.len() {
        rows[k + 1].drive
    } else {
        rows[k].drive
    };
    let (mut a, mut b) = (lo.ln(), hi.ln());
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (separation_at(m, c)?, separation_at(m, d)?);
    while b - a > 1e-10 {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = separation_at(m, c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = separation_at(m, d)?;
        }
    }
    let mut best = 0.5 * (a + b);
    // keep the grid row if the polish did not beat it
    if separation_at(m, best)? > stable.iter().find(|s| s.0 == k).map(|s| s.1).unwrap_or(f64::INFINITY) {
        best = rows[k].drive.ln();
    }
    let point = evaluate_point(&m.with_drive(best.exp()))?;
    let Some((n1, n2, mis)) = mismatch(&point) else {
        return Ok(None);
    };
    let window = mismatch_window(m, lo, hi, best.exp())?;
    Ok(Some(Hybridization {
        drive: point.drive,
        separation: mechanical_separation(&point.modes).unwrap_or(f64::INFINITY),
        n1,
        n2,
        mismatch: mis,
        grid_index: k,
        window,
    }))
}

/// Contiguous drive interval containing `centre` on which the occupation
/// mismatch stays below [`HYBRID_MISMATCH`], resolved on 201 log points.
fn mismatch_window(m: &ModelParams, lo: f64, hi: f64, centre: f64) -> Result<Option<(f64, f64)>> {
    if lo >= hi {
        return Ok(None);
    }
    let probes = Grid::Log { lo, hi, points: 201 }.points();
    let inside: Vec<bool> = probes
        .par_iter()
        .map(|&p| evaluate_point(&m.with_drive(p)).map(|r| mismatch(&r).is_some_and(|(_, _, x)| x < HYBRID_MISMATCH)))
        .collect::<Result<_>>()?;
    let Some(c) = probes
        .iter()
        .enumerate()
        .min_by(|a, b| {
            (a.1.ln() - centre.ln())
                .abs()
                .total_cmp(&(b.1.ln() - centre.ln()).abs())
        })
        .map(|(i, _)| i)
    else {
        return Ok(None);
    };
    if !inside[c] {
        return Ok(None);
    }
    let mut i = c;
    while i > 0 && inside[i - 1] {
        i -= 1;
    }
    let mut j = c;
    while j + 1 < probes.len() && inside[j + 1] {
        j += 1;
    }
    Ok(Some((probes[i], probes[j])))
}

/// Largest sphere squeezing seen along a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SqueezingSummary {
    pub drive: f64,
    pub s2: f64,
    pub var_x2: f64,
    pub var_p2: f64,
    /// Smallest `<p2^2>` over the stable rows.
    pub min_var_p2: f64,
    /// Smallest `<x2^2>` over the stable rows.
    pub min_var_x2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqueezingSweep {
    pub sweep: PowerSweep,
    pub summary: Option<SqueezingSummary>,
}

/// Power sweep reporting the quadrature variances and the peak of `S2`.
pub fn squeezing_sweep(m: &ModelParams, grid: &Grid) -> Result<SqueezingSweep> {
    let sweep = power_sweep(m, grid)?;
    let covs: Vec<(f64, &crate::linear::SteadyCovariance)> = sweep
        .rows
        .iter()
        .filter_map(|r| r.covariance.as_ref().map(|c| (r.drive, c)))
        .collect();
    let summary = covs
        .iter()
        .max_by(|a, b| a.1.s2.total_cmp(&b.1.s2))
        .map(|&(drive, c)| SqueezingSummary {
            drive,
            s2: c.s2,
            var_x2: c.var_x2,
            var_p2: c.var_p2,
            min_var_p2: covs.iter().map(|(_, c)| c.var_p2).fold(f64::INFINITY, f64::min),
            min_var_x2: covs.iter().map(|(_, c)| c.var_x2).fold(f64::INFINITY, f64::min),
        });
    Ok(SqueezingSweep { sweep, summary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::Detuning;

    fn uncoupled() -> ModelParams {
        ModelParams {
            omega1: 10.0,
            omega2: 3.4,
            gamma1: 2.8e-3,
            gamma2: 1e-3,
            g1: 0.0,
            g2: 0.0,
            chi: 0.0,
            drive: 0.0,
            n1: 5.0,
            n2: 50.0,
            detuning: Detuning::Effective(-27.2),
        }
    }

    #[test]
    fn uncoupled_sweep_is_flat_and_threshold_free() {
        let m = uncoupled();
        let s = power_sweep(
            &m,
            &Grid::Log {
                lo: 1.0,
                hi: 1e8,
                points: 9,
            },
        )
        .unwrap();
        assert_eq!(s.rows.len(), 9);
        assert!(s.threshold.is_none());
        for r in &s.rows {
            let c = r.covariance.as_ref().unwrap();
            assert!((c.n1 - 5.0).abs() < 1e-9 && (c.n2 - 50.0).abs() < 1e-9);
            let f: Vec<f64> = r.modes.iter().map(|m| m.frequency).collect();
            assert!((f[0] - 27.2).abs() < 1e-9);
        }
        assert!(matches!(
            instability_threshold(&m, 1.0, 1e12),
            Err(Error::BadBracket { .. })
        ));
    }

    #[test]
    fn threshold_bisection_and_single_flip() {
        let m = ModelParams {
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
        };
        let t = instability_threshold(&m, 1e8, 1e11).unwrap();
        assert!((t.hi - t.lo) / t.hi <= THRESHOLD_REL_WIDTH);
        assert!(is_stable(&m.with_drive(t.lo)).unwrap());
        assert!(!is_stable(&m.with_drive(t.hi)).unwrap());
        // dense scan on the same interval flips exactly once
        let verdicts: Vec<bool> = Grid::Log {
            lo: 1e8,
            hi: 1e11,
            points: 400,
        }
        .points()
        .iter()
        .map(|&p| is_stable(&m.with_drive(p)).unwrap())
        .collect();
        let flips = verdicts.windows(2).filter(|w| w[0] != w[1]).count();
        assert_eq!(flips, 1);
        let first_unstable = verdicts.iter().position(|v| !v).unwrap();
        let p = Grid::Log {
            lo: 1e8,
            hi: 1e11,
            points: 400,
        }
        .points();
        assert!(p[first_unstable - 1] <= t.hi && p[first_unstable] >= t.lo);
    }
}
