//! Acceptance report: one PASS/FAIL line per criterion, with the measured
//! values. Runs as a plain binary (`harness = false`) and always exits 0 so
//! an honest failure shows up in the report instead of aborting the suite.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use optomech::experiments::{landscape_point, power_sweep, squeezing_sweep};
use optomech::geometry::{apply_geometry, intracavity_field, lineshape, mode_profile, CavitySpec, PumpGeometry};
use optomech::linear::{build_drift, LinearModel, SteadyCovariance};
use optomech::params::{derive_g1, derive_g2, nondimensionalize, Detuning, PhysicalParams};
use optomech::presets::{fig2_landscape, fig3_model, fig4_model, fig4_model_unscaled, sweep_grid};
use optomech::steady_state::classical_fixed_point;
use optomech::validation::{random_model, run_validation, CaseKind, PHYSICALITY_TOL};

const SEED: u64 = 20_240_601;

struct Report {
    passed: usize,
    failed: usize,
}

impl Report {
    fn line(&mut self, id: u8, name: &str, ok: bool, elapsed: Duration, detail: String) {
        if ok {
            self.passed += 1;
        } else {
            self.failed += 1;
        }
        let tag = if ok { "PASS" } else { "FAIL" };
        println!("[{tag}] {id}. {name} ({:.3} s): {detail}", elapsed.as_secs_f64());
    }
}

/// Covariances collected along the way for the physicality check.
#[derive(Default)]
struct Physicality {
    groups: Vec<(String, usize, usize, f64, f64)>,
}

impl Physicality {
    fn add(&mut self, group: &str, floors: impl IntoIterator<Item = (f64, f64)>) {
        let (mut total, mut bad, mut worst_floor, mut worst_n) = (0, 0, f64::INFINITY, f64::INFINITY);
        for (floor, n) in floors {
            total += 1;
            if floor < -PHYSICALITY_TOL || n < -PHYSICALITY_TOL {
                bad += 1;
            }
            worst_floor = worst_floor.min(floor);
            worst_n = worst_n.min(n);
        }
        self.groups.push((group.to_string(), total, bad, worst_floor, worst_n));
    }

    fn add_covariances<'a>(&mut self, group: &str, covs: impl IntoIterator<Item = &'a SteadyCovariance>) {
        self.add(
            group,
            covs.into_iter()
                .map(|c| (c.physicality_floor(), c.n1_raw.min(c.n2_raw))),
        );
    }
}

fn rel(x: f64, target: f64) -> f64 {
    (x / target - 1.0).abs()
}

fn khz(f: f64) -> f64 {
    2.0 * PI * f * 1e3
}

fn couplings(report: &mut Report) {
    let t = Instant::now();
    let p = PhysicalParams::nominal();
    let g1 = derive_g1(&p).unwrap();
    let g2 = derive_g2(&p).unwrap();
    let elapsed = t.elapsed();
    let (g1_ref, g2_ref) = (2.0 * PI * 36.0, -2.0 * PI * 10e-6);
    let ok = rel(g1, g1_ref) <= 0.03 && rel(g2, g2_ref) <= 0.10 && elapsed < Duration::from_millis(1);
    report.line(
        1,
        "coupling constants",
        ok,
        elapsed,
        format!(
            "g1 = 2pi x {:.3} Hz (dev {:.2}%), g2 = 2pi x {:.3} uHz (dev {:.2}%)",
            g1 / (2.0 * PI),
            100.0 * rel(g1, g1_ref),
            g2 / (2.0 * PI) * 1e6,
            100.0 * rel(g2, g2_ref)
        ),
    );
}

fn caption_values(report: &mut Report) {
    let t = Instant::now();
    let nominal = PhysicalParams::nominal();
    let fig3 = nondimensionalize(
        &nominal.with_frequencies(khz(500.0), khz(170.0)),
        Detuning::Effective(-27.2),
    )
    .unwrap();
    let fig4 = nondimensionalize(
        &nominal.with_frequencies(khz(1000.0), khz(500.0)),
        Detuning::Effective(-10.0),
    )
    .unwrap();
    let elapsed = t.elapsed();
    let checks = [
        ("fig3 g1", fig3.g1, 1.0e-3),
        ("fig3 g2", fig3.g2, -2.4e-10),
        ("fig3 chi", fig3.chi, 3.7e-3),
        ("fig4 g1", fig4.g1, 7.2e-4),
        ("fig4 g2x100", 100.0 * fig4.g2, -8.0e-9),
        ("fig4 chi", fig4.chi, 4.5e-3),
    ];
    let ok = checks.iter().all(|c| rel(c.1, c.2) <= 0.15) && elapsed < Duration::from_millis(1);
    let detail: Vec<String> = checks
        .iter()
        .map(|(name, v, r)| format!("{name} {v:.3e} ({:+.1}%)", 100.0 * (v / r - 1.0)))
        .collect();
    report.line(2, "caption consistency", ok, elapsed, detail.join(", "));
}

fn solver_equivalence(report: &mut Report, phys: &mut Physicality) {
    let t = Instant::now();
    let v = run_validation(1000, 1000, SEED).unwrap();
    let elapsed = t.elapsed();
    let presets = v.cases.iter().filter(|c| c.kind == CaseKind::Preset).count();
    let ok = v.passes() && presets > 0 && elapsed < Duration::from_secs(30);
    report.line(
        3,
        "solver oracle equivalence",
        ok,
        elapsed,
        format!(
            "{} cases ({presets} preset), max algebraic {:.2e} (tol 1e-10), max ode {:.2e} (tol 1e-8), {} failures",
            v.cases.len(),
            v.max_algebraic,
            v.max_ode,
            v.failures().count()
        ),
    );
    for kind in [CaseKind::Model, CaseKind::Preset] {
        let name = match kind {
            CaseKind::Model => "3: random model draws",
            _ => "3: preset points",
        };
        phys.add(
            name,
            v.cases
                .iter()
                .filter(|c| c.kind == kind)
                .map(|c| (c.physicality.unwrap(), c.min_raw_occupation.unwrap())),
        );
    }
}

fn decoupling(report: &mut Report, phys: &mut Physicality) {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 4);
    let (mut worst, mut worst_iso, mut worst_unshifted): (f64, f64, f64) = (0.0, 0.0, 0.0);
    let mut covs = Vec::new();
    while covs.len() < 100 {
        let mut m = random_model(&mut rng);
        m.chi = 0.0;
        m.g1 = 0.0;
        m.n2 = rng.random_range(0.0..1e6);
        // a strong quadratic shift can remove the trap; such draws say nothing about decoupling
        let Ok(s) = classical_fixed_point(&m) else { continue };
        let lm = LinearModel::new(&m, &s).unwrap();
        if !lm.stable {
            continue;
        }
        let c = lm.steady_covariance().unwrap();
        let scale = m.n2.max(1.0);
        worst = worst.max((c.n2_raw - m.n2).abs() / scale);
        // lone sphere in the photon-stiffened trap: <p^2> = n + 1/2, <x^2> = (n + 1/2) omega2 / omega2_eff
        let half = m.n2 + 0.5;
        let isolated = 0.5 * (half * (1.0 + m.omega2 / s.omega2_eff) - 1.0);
        worst_iso = worst_iso.max((c.n2_raw - isolated).abs() / scale);
        let c0 = LinearModel::new(&m.with_drive(0.0), &classical_fixed_point(&m.with_drive(0.0)).unwrap())
            .unwrap()
            .steady_covariance()
            .unwrap();
        worst_unshifted = worst_unshifted.max((c0.n2_raw - m.n2).abs() / scale);
        covs.push(c);
    }
    let elapsed = t.elapsed();
    let ok = worst <= 1e-9 && elapsed < Duration::from_secs(1);
    report.line(
        4,
        "decoupling with chi = g1 = 0",
        ok,
        elapsed,
        format!(
            "100 draws, max |n2 - n2_bath| / max(n2_bath, 1) = {worst:.2e} (tol 1e-9); \
             same draws at zero drive {worst_unshifted:.2e}; vs isolated sphere in the shifted trap {worst_iso:.2e}"
        ),
    );
    phys.add_covariances("4: decoupled draws", &covs);
}

fn hybridization(report: &mut Report, phys: &mut Physicality) {
    let t = Instant::now();
    let sweep = power_sweep(&fig3_model(), &sweep_grid()).unwrap();
    let elapsed = t.elapsed();
    let threshold = sweep.threshold.map(|th| th.estimate());
    let detail;
    let ok = match (&sweep.hybridization, threshold) {
        (Some(h), Some(th)) => {
            let window = h
                .window
                .map_or_else(|| "none".to_string(), |(lo, hi)| format!("[{lo:.4e}, {hi:.4e}]"));
            detail = format!(
                "min separation {:.2e} at drive {:.4e}, n1 = {:.1}, n2 = {:.1}, mismatch {:.3}, window {window}, threshold {th:.4e}",
                h.separation, h.drive, h.n1, h.n2, h.mismatch
            );
            h.mismatch < 0.1 && h.drive < th && h.window.is_some_and(|w| w.1 < th)
        }
        (h, th) => {
            detail = format!("hybridization {:?}, threshold {th:?}", h.as_ref().map(|h| h.drive));
            false
        }
    };
    report.line(
        5,
        "hybridization window",
        ok && elapsed < Duration::from_secs(5),
        elapsed,
        detail,
    );
    phys.add_covariances("5: fig3 sweep", sweep.rows.iter().filter_map(|r| r.covariance.as_ref()));
}

fn cooling(report: &mut Report, phys: &mut Physicality) {
    let t = Instant::now();
    let spec = fig2_landscape();
    let omega1 = 10.0;
    let omega2: Vec<f64> = (0..18).map(|i| 1.05 + 0.5 * i as f64).collect();
    let row: Vec<_> = omega2
        .par_iter()
        .map(|&w2| landscape_point(&spec, omega1, w2))
        .collect();
    let elapsed = t.elapsed();
    let best = row
        .iter()
        .filter_map(|p| p.cooling_factor().map(|f| (p, f)))
        .max_by(|a, b| a.1.total_cmp(&b.1));
    let (ok, detail) = match best {
        Some((p, f)) => {
            let o = p.optimum.unwrap();
            (
                f >= 100.0,
                format!(
                    "best at omega2 = {:.2}: n2 {:.3e} -> {:.3e}, factor {f:.0} (detuning {:.2}, drive {:.3e})",
                    p.omega2,
                    p.n2_thermal,
                    p.n2().unwrap(),
                    o.detuning,
                    o.drive
                ),
            )
        }
        None => (false, "no feasible optimum".into()),
    };
    report.line(6, "cooling magnitude at omega1 = 10", ok, elapsed, detail);
    phys.add_covariances(
        "6: cooling optima",
        row.iter()
            .filter_map(|p| p.point.as_ref().and_then(|r| r.covariance.as_ref())),
    );
}

fn squeezing(report: &mut Report, phys: &mut Physicality) {
    let t = Instant::now();
    let scaled = squeezing_sweep(&fig4_model(), &sweep_grid()).unwrap();
    let unscaled = squeezing_sweep(&fig4_model_unscaled(), &sweep_grid()).unwrap();
    let elapsed = t.elapsed();
    let peak_unscaled = unscaled.summary.map_or(f64::NAN, |s| s.s2);
    let threshold = scaled.sweep.threshold.map(|th| th.estimate());
    let (ok, detail) = match (scaled.summary, threshold) {
        (Some(s), Some(th)) => {
            let gap = (th - s.drive) / th;
            (
                (1.1..=1.3).contains(&s.s2)
                    && (s.min_var_p2 - 0.43).abs() <= 0.05
                    && (0.0..=0.1).contains(&gap)
                    && peak_unscaled <= 1.0 + 1e-6,
                format!(
                    "S2 max {:.4} at drive {:.4e}, min <p2^2> {:.4}, {:.2}% below threshold {th:.4e}; unscaled S2 max {peak_unscaled:.8}",
                    s.s2,
                    s.drive,
                    s.min_var_p2,
                    100.0 * gap
                ),
            )
        }
        (s, th) => (false, format!("summary {s:?}, threshold {th:?}")),
    };
    report.line(7, "squeezing", ok && elapsed < Duration::from_secs(10), elapsed, detail);
    for (name, sw) in [("7: fig4 sweep", &scaled), ("7: fig4 unscaled sweep", &unscaled)] {
        phys.add_covariances(name, sw.sweep.rows.iter().filter_map(|r| r.covariance.as_ref()));
    }
}

fn round_trip_sum(z: f64, spec: &CavitySpec, trips: usize) -> Complex64 {
    let (k, l, r) = (spec.wavenumber, spec.length, spec.r);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut amp = 1.0;
    for n in 0..trips {
        let base = (2 * n + 1) as f64 * l;
        sum += Complex64::from_polar(amp, k * (base - z));
        sum += Complex64::from_polar(amp * r, k * (base + z));
        amp *= r * r;
    }
    sum * spec.t
}

fn node_error(spec: &CavitySpec) -> f64 {
    let k = spec.wavenumber;
    let shape = lineshape(spec).unwrap();
    let profile = |z: f64| (shape * mode_profile(z, spec)).norm();
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut worst: f64 = 0.0;
    let mut m = 1;
    while (m as f64 + 0.5) * PI / k < spec.length {
        let (mut a, mut b) = ((m as f64 - 0.4) * PI / k, (m as f64 + 0.4) * PI / k);
        for _ in 0..200 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if profile(c) < profile(d) {
                b = d;
            } else {
                a = c;
            }
        }
        worst = worst.max((0.5 * (a + b) - m as f64 * PI / k).abs() / spec.wavelength());
        m += 1;
    }
    worst
}

fn geometry(report: &mut Report) {
    let t = Instant::now();
    let mut sum_err: f64 = 0.0;
    for r in [0.5, 0.9, 0.99] {
        for kl in [0.3, 1.0, PI + 0.01, 7.77] {
            let spec = CavitySpec::lossless(1.0, kl, r).unwrap();
            for z in [0.0, 0.13, 0.5, 0.999, 1.0] {
                let closed = intracavity_field(z, &spec).unwrap();
                let brute = round_trip_sum(z, &spec, 10_000);
                sum_err = sum_err.max((closed - brute).norm() / brute.norm());
            }
        }
    }
    let node_err = [3.0, 3.37, 5.123, 10.61]
        .iter()
        .map(|&l| node_error(&CavitySpec::lossless(l, 2.0 * PI, -0.999).unwrap()))
        .fold(0.0, f64::max);

    let m = apply_geometry(&fig3_model().with_drive(4e10), PumpGeometry::FromMovingMirror);
    let a = build_drift(&m, &classical_fixed_point(&m).unwrap());
    let cross = [a[(3, 4)], a[(5, 2)], a[(2, 4)], a[(4, 2)], a[(3, 5)], a[(5, 3)]];
    let cross_max = cross.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let elapsed = t.elapsed();
    let ok = sum_err <= 1e-8 && node_err <= 1e-3 && cross_max == 0.0 && elapsed < Duration::from_secs(1);
    report.line(
        8,
        "cavity geometry",
        ok,
        elapsed,
        format!(
            "closed form vs 1e4-term sum {sum_err:.2e}, node offset {node_err:.2e} lambda, moving-mirror cross entries max {cross_max:e}"
        ),
    );
}

fn physicality(report: &mut Report, phys: &Physicality) {
    let bad: usize = phys.groups.iter().map(|g| g.2).sum();
    let total: usize = phys.groups.iter().map(|g| g.1).sum();
    let parts: Vec<String> = phys
        .groups
        .iter()
        .map(|(name, n, b, floor, occ)| format!("{name}: {b}/{n} (floor {floor:.2e}, min n {occ:.2e})"))
        .collect();
    report.line(
        9,
        "physicality of stable covariances",
        bad == 0,
        Duration::ZERO,
        format!("{bad}/{total} below -1e-9; {}", parts.join("; ")),
    );
}

fn main() {
    let mut report = Report { passed: 0, failed: 0 };
    let mut phys = Physicality::default();
    couplings(&mut report);
    caption_values(&mut report);
    solver_equivalence(&mut report, &mut phys);
    decoupling(&mut report, &mut phys);
    hybridization(&mut report, &mut phys);
    cooling(&mut report, &mut phys);
    squeezing(&mut report, &mut phys);
    geometry(&mut report);
    physicality(&mut report, &phys);
    println!("acceptance: {} passed, {} failed", report.passed, report.failed);
}
