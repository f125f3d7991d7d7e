use std::f64::consts::PI;
use std::io;
use std::path::PathBuf;

use serde::Serialize;

use optomech::experiments::{
    evaluate_point, occupation_landscape, power_sweep, squeezing_sweep, Grid, LandscapeSpec, PointResult,
};
use optomech::geometry::{apply_geometry, chi_for_geometry, field_profile, interaction_form, lineshape, PumpGeometry};
use optomech::linear::{physicality_floor, LinearModel, Matrix6};
use optomech::params::{derive_chi, derive_g1, derive_g2, nondimensionalize, Detuning, ModelParams, PhysicalParams};
use optomech::presets::{self, Preset};
use optomech::steady_state::{classical_fixed_point, solve_self_consistent, ClassicalSteadyState};
use optomech::validation::{run_validation, ALGEBRAIC_TOL, ODE_TOL, PHYSICALITY_TOL};

use crate::config::{model_record, parse_config, physical_record, Config, ConfigError, SweepKind};
use crate::output::{Cell, Format, Table, Writer, VERSION};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Derive,
    Steady,
    Linear,
    Sweep,
    Geometry,
    Validate,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub input: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub format: Format,
    pub preset: Option<Preset>,
    /// Random systems per family for `validate`.
    pub cases: usize,
    pub seed: u64,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(#[from] ConfigError),
    #[error("physics error: {0}")]
    Physics(optomech::Error),
    #[error("numerical fault: {0}")]
    Numerical(optomech::Error),
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("solver cross-check failed: {0}")]
    Validation(String),
}

impl From<optomech::Error> for CliError {
    fn from(e: optomech::Error) -> Self {
        match e {
            optomech::Error::InvalidParam { .. } => CliError::Config(ConfigError::invalid(e)),
            e if e.is_physical() => CliError::Physics(e),
            e => CliError::Numerical(e),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Physics(_) => 3,
            CliError::Numerical(_) | CliError::Validation(_) => 4,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

/// Run one subcommand and return the files written.
pub fn run(rc: &RunConfig) -> Result<Vec<PathBuf>> {
    let cfg = load(rc)?;
    let mut w = Writer::new(&rc.output_dir);
    let outcome = match rc.command {
        Command::Derive => derive(rc, &cfg, &mut w),
        Command::Steady => steady(rc, &cfg, &mut w),
        Command::Linear => linear(rc, &cfg, &mut w),
        Command::Sweep => sweep(rc, &cfg, &mut w),
        Command::Geometry => geometry(rc, &cfg, &mut w),
        Command::Validate => validate(rc, &mut w),
    };
    // partial results (e.g. the drift of an unstable point) are still written
    let files = w.flush()?;
    outcome.map(|_| files)
}

fn load(rc: &RunConfig) -> Result<Config> {
    let cfg = match &rc.input {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| ConfigError::new(format!("cannot read {}: {e}", path.display())))?;
            parse_config(&text)?
        }
        None => Config::default(),
    };
    if rc.preset.is_some() && (cfg.physical.is_some() || cfg.model.is_some()) {
        return Err(
            ConfigError::new("--preset supplies the parameters; drop [physical]/[model] from the input").into(),
        );
    }
    Ok(cfg)
}

/// Physical parameters, from the file or the fig2 preset.
fn physical(rc: &RunConfig, cfg: &Config) -> Option<(PhysicalParams, Detuning)> {
    match (&cfg.physical, rc.preset) {
        (Some(p), _) => Some((p.clone(), cfg.physical_detuning.unwrap_or(Detuning::Effective(0.0)))),
        (None, Some(Preset::Fig2)) => Some((presets::fig2_physical(), Detuning::Effective(0.0))),
        _ => None,
    }
}

fn model(rc: &RunConfig, cfg: &Config) -> Result<ModelParams> {
    if let Some(m) = &cfg.model {
        return Ok(m.clone());
    }
    if let Some((p, d)) = physical(rc, cfg) {
        return Ok(nondimensionalize(&p, d)?);
    }
    match rc.preset {
        Some(Preset::Fig3) => Ok(presets::fig3_model()),
        Some(Preset::Fig4) => Ok(presets::fig4_model()),
        _ => Err(
            ConfigError::new("no parameters: pass --input with a [physical] or [model] section, or --preset").into(),
        ),
    }
}

fn echo_model(m: &ModelParams) -> String {
    model_record(m)
}

#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    version: &'static str,
    command: &'static str,
    params: &'a ModelParams,
    #[serde(flatten)]
    body: T,
}

fn json_out<T: Serialize>(
    rc: &RunConfig,
    w: &mut Writer,
    name: &str,
    command: &'static str,
    m: &ModelParams,
    body: T,
) -> Result<()> {
    if rc.format.json() {
        w.json(
            name,
            &Envelope {
                version: VERSION,
                command,
                params: m,
                body,
            },
        )?;
    }
    Ok(())
}

fn derive(rc: &RunConfig, cfg: &Config, w: &mut Writer) -> Result<()> {
    let m = model(rc, cfg)?;
    let phys = physical(rc, cfg);
    let mut echo = String::new();
    if let Some((p, d)) = &phys {
        echo.push_str(&physical_record(p, *d));
    }
    echo.push_str(&echo_model(&m));
    w.text(
        "model.conf",
        format!("{}{}", crate::output::comment_block(&echo), model_record(&m)),
    );

    #[derive(Serialize)]
    struct Couplings {
        g1_rad_s: f64,
        g2_rad_s: f64,
        g1_hz: f64,
        g2_hz: f64,
        chi: f64,
        kappa_c_rad_s: f64,
    }
    let couplings = match &phys {
        Some((p, _)) => Some(Couplings {
            g1_rad_s: derive_g1(p)?,
            g2_rad_s: derive_g2(p)?,
            g1_hz: derive_g1(p)? / (2.0 * PI),
            g2_hz: derive_g2(p)? / (2.0 * PI),
            chi: derive_chi(p)?,
            kappa_c_rad_s: p.cavity_decay,
        }),
        None => None,
    };
    if rc.format.csv() {
        let mut t = Table::new(&["quantity", "value", "unit"]);
        let rows: [(&str, f64, &str); 11] = [
            ("omega1", m.omega1, "kappa_c"),
            ("omega2", m.omega2, "kappa_c"),
            ("gamma1", m.gamma1, "kappa_c"),
            ("gamma2", m.gamma2, "kappa_c"),
            ("g1", m.g1, "kappa_c"),
            ("g2", m.g2, "kappa_c"),
            ("chi", m.chi, "1"),
            ("drive", m.drive, "kappa_c"),
            ("n1", m.n1, "1"),
            ("n2", m.n2, "1"),
            ("detuning", m.detuning.value(), "kappa_c"),
        ];
        for (q, v, u) in rows {
            t.push(vec![q.into(), v.into(), u.into()]);
        }
        if let Some(c) = &couplings {
            t.push(vec!["g1_lab".into(), c.g1_rad_s.into(), "rad/s".into()]);
            t.push(vec!["g2_lab".into(), c.g2_rad_s.into(), "rad/s".into()]);
        }
        w.csv("derive.csv", &t, &echo);
    }
    #[derive(Serialize)]
    struct Body<'a> {
        physical: Option<&'a PhysicalParams>,
        couplings: Option<Couplings>,
    }
    json_out(
        rc,
        w,
        "derive.json",
        "derive",
        &m,
        Body {
            physical: phys.as_ref().map(|x| &x.0),
            couplings,
        },
    )
}

fn steady_states(m: &ModelParams) -> Result<Vec<ClassicalSteadyState>> {
    Ok(match m.detuning {
        Detuning::Effective(_) => vec![classical_fixed_point(m)?],
        Detuning::Bare(_) => solve_self_consistent(m)?,
    })
}

fn steady(rc: &RunConfig, cfg: &Config, w: &mut Writer) -> Result<()> {
    let m = model(rc, cfg)?;
    let states = steady_states(&m)?;
    let echo = echo_model(&m);
    if rc.format.csv() {
        let mut t = Table::new(&[
            "branch",
            "delta_eff",
            "photon_number",
            "a_re",
            "a_im",
            "x1_bar",
            "x2_bar",
            "omega1_eff",
            "omega2_eff",
        ]);
        for (i, s) in states.iter().enumerate() {
            t.push(vec![
                i.into(),
                s.delta_eff.into(),
                s.photon_number.into(),
                s.a_bar.re.into(),
                s.a_bar.im.into(),
                s.x1_bar.into(),
                s.x2_bar.into(),
                s.omega1_eff.into(),
                s.omega2_eff.into(),
            ]);
        }
        w.csv("steady.csv", &t, &echo);
    }
    #[derive(Serialize)]
    struct Body<'a> {
        states: &'a [ClassicalSteadyState],
    }
    json_out(rc, w, "steady.json", "steady", &m, Body { states: &states })
}

const QUADRATURES: [&str; 6] = ["x", "p", "x1", "p1", "x2", "p2"];

fn matrix_table(a: &Matrix6) -> Table {
    let mut t = Table::new(&QUADRATURES);
    for i in 0..6 {
        t.push((0..6).map(|j| Cell::Num(a[(i, j)])).collect());
    }
    t
}

fn rows(a: &Matrix6) -> Vec<[f64; 6]> {
    (0..6).map(|i| std::array::from_fn(|j| a[(i, j)])).collect()
}

fn linear(rc: &RunConfig, cfg: &Config, w: &mut Writer) -> Result<()> {
    let m = model(rc, cfg)?;
    let s = steady_states(&m)?.swap_remove(0);
    let lm = LinearModel::new(&m, &s)?;
    let covariance = if lm.stable { Some(lm.steady_covariance()?) } else { None };
    let echo = echo_model(&m);
    if rc.format.csv() {
        w.csv("drift.csv", &matrix_table(&lm.drift), &echo);
        w.csv("diffusion.csv", &matrix_table(&lm.diffusion), &echo);
        let mut t = Table::new(&["re", "im"]);
        for l in &lm.eigenvalues {
            t.push(vec![l.re.into(), l.im.into()]);
        }
        w.csv("eigenvalues.csv", &t, &echo);
        let mut t = Table::new(&["frequency", "damping", "paired"]);
        for md in lm.normal_modes() {
            t.push(vec![md.frequency.into(), md.damping.into(), md.paired.into()]);
        }
        w.csv("modes.csv", &t, &echo);
        if let Some(c) = &covariance {
            w.csv("covariance.csv", &matrix_table(&c.matrix()), &echo);
            let mut t = Table::new(&[
                "n1",
                "n2",
                "n1_raw",
                "n2_raw",
                "var_x1",
                "var_p1",
                "var_x2",
                "var_p2",
                "s1",
                "s2",
                "max_re",
                "physicality_floor",
            ]);
            t.push(vec![
                c.n1.into(),
                c.n2.into(),
                c.n1_raw.into(),
                c.n2_raw.into(),
                c.var_x1.into(),
                c.var_p1.into(),
                c.var_x2.into(),
                c.var_p2.into(),
                c.s1.into(),
                c.s2.into(),
                lm.max_re.into(),
                physicality_floor(&c.matrix()).into(),
            ]);
            w.csv("linear.csv", &t, &echo);
        }
    }
    #[derive(Serialize)]
    struct Body<'a> {
        steady: &'a ClassicalSteadyState,
        stable: bool,
        max_re: f64,
        drift: Vec<[f64; 6]>,
        diffusion: Vec<[f64; 6]>,
        eigenvalues: Vec<[f64; 2]>,
        modes: Vec<optomech::linear::NormalMode>,
        covariance: Option<&'a optomech::linear::SteadyCovariance>,
        physicality_floor: Option<f64>,
    }
    json_out(
        rc,
        w,
        "linear.json",
        "linear",
        &m,
        Body {
            steady: &s,
            stable: lm.stable,
            max_re: lm.max_re,
            drift: rows(&lm.drift),
            diffusion: rows(&lm.diffusion),
            eigenvalues: lm.eigenvalues.iter().map(|l| [l.re, l.im]).collect(),
            modes: lm.normal_modes(),
            covariance: covariance.as_ref(),
            physicality_floor: covariance.as_ref().map(|c| physicality_floor(&c.matrix())),
        },
    )?;
    if !lm.stable {
        return Err(CliError::Physics(optomech::Error::Unstable { max_re: lm.max_re }));
    }
    Ok(())
}

fn sweep(rc: &RunConfig, cfg: &Config, w: &mut Writer) -> Result<()> {
    let kind = match (&cfg.sweep, rc.preset) {
        (Some(s), _) => s.kind,
        (None, Some(Preset::Fig2)) => SweepKind::Landscape,
        (None, Some(Preset::Fig4)) => SweepKind::Squeezing,
        _ => SweepKind::Power,
    };
    if kind == SweepKind::Landscape {
        return landscape(rc, cfg, w);
    }
    let geometry = cfg.sweep.as_ref().map_or(PumpGeometry::FromFixedMirror, |s| s.geometry);
    let m = apply_geometry(&model(rc, cfg)?, geometry);
    let grid = cfg.sweep.as_ref().map_or(presets::sweep_grid(), |s| s.drive);
    let mut echo = echo_model(&m);
    echo.push_str(&format!(
        "[sweep]\nkind = {kind:?}\ngeometry = {}\ngrid = {grid:?}\n",
        geometry.name()
    ));

    let (result, squeezing) = match kind {
        SweepKind::Squeezing => {
            let s = squeezing_sweep(&m, &grid)?;
            (s.sweep, s.summary)
        }
        _ => (power_sweep(&m, &grid)?, None),
    };
    // undriven reference row ahead of the grid
    let zero = evaluate_point(&m.with_drive(0.0))?;
    if rc.format.csv() {
        let rows: Vec<PointResult> = std::iter::once(zero.clone())
            .chain(result.rows.iter().cloned())
            .collect();
        w.csv("sweep.csv", &sweep_table(&rows), &echo);
    }
    #[derive(Serialize)]
    struct Body<'a> {
        kind: String,
        geometry: &'static str,
        grid: Grid,
        rows: usize,
        threshold: Option<optomech::experiments::Threshold>,
        threshold_estimate: Option<f64>,
        hybridization: Option<optomech::experiments::Hybridization>,
        squeezing: Option<optomech::experiments::SqueezingSummary>,
        zero_drive: &'a PointResult,
        points: &'a [PointResult],
    }
    json_out(
        rc,
        w,
        "summary.json",
        "sweep",
        &m,
        Body {
            kind: format!("{kind:?}").to_lowercase(),
            geometry: geometry.name(),
            grid,
            rows: result.rows.len(),
            threshold: result.threshold,
            threshold_estimate: result.threshold.map(|t| t.estimate()),
            hybridization: result.hybridization,
            squeezing,
            zero_drive: &zero,
            points: &result.rows,
        },
    )
}

fn sweep_table(rows: &[PointResult]) -> Table {
    let modes = rows.iter().map(|r| r.modes.len()).max().unwrap_or(0);
    let mut cols: Vec<String> = ["drive", "status", "delta_eff", "photon_number", "max_re"]
        .iter()
        .map(|c| c.to_string())
        .collect();
    for k in 1..=modes {
        cols.push(format!("frequency_{k}"));
        cols.push(format!("damping_{k}"));
    }
    for c in ["n1", "n2", "var_x1", "var_p1", "var_x2", "var_p2", "s1", "s2"] {
        cols.push(c.to_string());
    }
    let col_refs: Vec<&str> = cols.iter().map(String::as_str).collect();
    let mut t = Table::new(&col_refs);
    for r in rows {
        let status = serde_json::to_value(r.status)
            .ok()
            .and_then(|v| v.as_str().map(str::to_string))
            .unwrap_or_default();
        let mut row: Vec<Cell> = vec![
            r.drive.into(),
            Cell::Text(status),
            r.delta_eff.into(),
            r.photon_number.into(),
            r.max_re.into(),
        ];
        for k in 0..modes {
            match r.modes.get(k) {
                Some(md) => row.extend([md.frequency.into(), md.damping.into()]),
                None => row.extend([f64::NAN.into(), f64::NAN.into()]),
            }
        }
        match &r.covariance {
            Some(c) => row.extend([c.n1, c.n2, c.var_x1, c.var_p1, c.var_x2, c.var_p2, c.s1, c.s2].map(Cell::Num)),
            None => row.extend(std::iter::repeat_n(Cell::Num(f64::NAN), 8)),
        }
        t.push(row);
    }
    t
}

fn landscape(rc: &RunConfig, cfg: &Config, w: &mut Writer) -> Result<()> {
    let (phys, _) = physical(rc, cfg)
        .ok_or_else(|| ConfigError::new("a landscape sweep needs a [physical] section or --preset fig2"))?;
    let base = presets::fig2_landscape();
    let spec = match &cfg.sweep {
        Some(s) => LandscapeSpec {
            physical: phys.clone(),
            omega1: s.omega1.unwrap_or(base.omega1),
            omega2: s.omega2.unwrap_or(base.omega2),
            bounds: s.bounds,
            optimizer: s.optimizer,
            objective: s.objective,
        },
        None => LandscapeSpec {
            physical: phys.clone(),
            ..base
        },
    };
    let result = occupation_landscape(&spec)?;
    let reference = nondimensionalize(&phys, Detuning::Effective(0.0))?;
    let mut echo = physical_record(&phys, Detuning::Effective(0.0));
    echo.push_str(&format!(
        "[sweep]\nkind = landscape\nomega1 = {:?}\nomega2 = {:?}\nbounds = {:?}\noptimizer = {:?}\nobjective = {}\n",
        spec.omega1,
        spec.omega2,
        spec.bounds,
        spec.optimizer,
        spec.objective.name()
    ));
    if rc.format.csv() {
        let mut t = Table::new(&[
            "omega1",
            "omega2",
            "excluded",
            "feasible",
            "detuning",
            "drive",
            "objective",
            "n1",
            "n2",
            "n2_thermal",
            "cooling_factor",
            "on_boundary",
            "evaluations",
        ]);
        for p in &result.points {
            let opt = p.optimum;
            let n1 = p
                .point
                .as_ref()
                .and_then(|r| r.covariance.as_ref())
                .map_or(f64::NAN, |c| c.n1);
            t.push(vec![
                p.omega1.into(),
                p.omega2.into(),
                p.excluded.into(),
                opt.is_some_and(|o| o.feasible()).into(),
                opt.map_or(f64::NAN, |o| o.detuning).into(),
                opt.map_or(f64::NAN, |o| o.drive).into(),
                opt.map_or(f64::NAN, |o| o.value).into(),
                n1.into(),
                p.n2().unwrap_or(f64::NAN).into(),
                p.n2_thermal.into(),
                p.cooling_factor().unwrap_or(f64::NAN).into(),
                opt.is_some_and(|o| o.on_boundary).into(),
                opt.map_or(0, |o| o.evaluations).into(),
            ]);
        }
        w.csv("landscape.csv", &t, &echo);
        let xs = spec.omega1.points();
        let ys = spec.omega2.points();
        let z: Vec<Vec<f64>> = result
            .points
            .chunks(ys.len())
            .map(|row| row.iter().map(|p| p.n2().unwrap_or(f64::NAN)).collect())
            .collect();
        w.matrix("landscape_n2.dat", &xs, &ys, &z, &echo);
    }
    #[derive(Serialize)]
    struct Body<'a> {
        spec: &'a LandscapeSpec,
        ridge: &'a [optomech::experiments::RidgePoint],
        best: Option<&'a optomech::experiments::LandscapePoint>,
        points: &'a [optomech::experiments::LandscapePoint],
    }
    json_out(
        rc,
        w,
        "summary.json",
        "sweep",
        &reference,
        Body {
            spec: &spec,
            ridge: &result.ridge,
            best: result.best(),
            points: &result.points,
        },
    )
}

fn geometry(rc: &RunConfig, cfg: &Config, w: &mut Writer) -> Result<()> {
    let cav = cfg
        .cavity
        .as_ref()
        .ok_or_else(|| ConfigError::new("the geometry command needs a [cavity] section"))?;
    let profile = field_profile(&cav.spec, cav.points)?;
    let l = lineshape(&cav.spec)?;
    let m = model(rc, cfg).ok();
    let echo = format!(
        "[cavity]\nlength = {:e} m\nwavelength = {:e} m\nreflectivity = {:e}\ntransmissivity = {:e}\npoints = {}\n",
        cav.spec.length,
        cav.spec.wavelength(),
        cav.spec.r,
        cav.spec.t,
        cav.points
    );
    let mut dat = crate::output::comment_block(&echo);
    dat.push_str("# z_m |E|^2\n");
    for (z, e2) in &profile {
        dat.push_str(&format!("{z:.16e} {e2:.16e}\n"));
    }
    w.text("field_profile.dat", dat);

    #[derive(Serialize)]
    struct GeometryRow {
        geometry: &'static str,
        alpha: f64,
        beta: f64,
        chi_factor: f64,
        chi_eff: Option<f64>,
        drift_mirror_sphere: Option<[f64; 2]>,
    }
    let mut geoms = Vec::new();
    for g in PumpGeometry::ALL {
        let (alpha, beta) = interaction_form(g);
        let (chi_eff, cross) = match &m {
            Some(m) => {
                let mg = apply_geometry(m, g);
                let cross = evaluate_cross(&mg);
                (Some(mg.chi), cross)
            }
            None => (None, None),
        };
        geoms.push(GeometryRow {
            geometry: g.name(),
            alpha,
            beta,
            chi_factor: chi_for_geometry(g, 1.0),
            chi_eff,
            drift_mirror_sphere: cross,
        });
    }
    if rc.format.csv() {
        let mut t = Table::new(&["geometry", "alpha", "beta", "chi_factor", "chi_eff"]);
        for g in &geoms {
            t.push(vec![
                g.geometry.into(),
                g.alpha.into(),
                g.beta.into(),
                g.chi_factor.into(),
                g.chi_eff.unwrap_or(f64::NAN).into(),
            ]);
        }
        w.csv("geometry.csv", &t, &echo);
    }
    if rc.format.json() {
        #[derive(Serialize)]
        struct Body<'a> {
            version: &'static str,
            command: &'static str,
            cavity: &'a optomech::geometry::CavitySpec,
            lineshape: [f64; 2],
            lineshape_abs2: f64,
            finesse_estimate: f64,
            params: Option<&'a ModelParams>,
            geometries: Vec<GeometryRow>,
        }
        let r2 = cav.spec.r * cav.spec.r;
        w.json(
            "geometry.json",
            &Body {
                version: VERSION,
                command: "geometry",
                cavity: &cav.spec,
                lineshape: [l.re, l.im],
                lineshape_abs2: l.norm_sqr(),
                finesse_estimate: PI * r2.sqrt() / (1.0 - r2),
                params: m.as_ref(),
                geometries: geoms,
            },
        )?;
    }
    Ok(())
}

/// Drift entries coupling sphere momentum to mirror position and back.
fn evaluate_cross(m: &ModelParams) -> Option<[f64; 2]> {
    let s = steady_states(m).ok()?.into_iter().next()?;
    let lm = LinearModel::new(m, &s).ok()?;
    Some([lm.drift[(5, 2)], lm.drift[(3, 4)]])
}

fn validate(rc: &RunConfig, w: &mut Writer) -> Result<()> {
    let report = run_validation(rc.cases, rc.cases, rc.seed)?;
    let echo = format!(
        "[validate]\nseed = {}\nmodel_cases = {}\ngeneric_cases = {}\nalgebraic_tol = {ALGEBRAIC_TOL:e}\node_tol = {ODE_TOL:e}\nphysicality_tol = {PHYSICALITY_TOL:e}\n",
        rc.seed, rc.cases, rc.cases
    );
    if rc.format.csv() {
        let mut t = Table::new(&[
            "label",
            "kind",
            "algebraic",
            "ode",
            "physicality_floor",
            "min_raw_occupation",
            "agree",
            "physical",
        ]);
        for c in &report.cases {
            t.push(vec![
                Cell::Text(c.label.clone()),
                Cell::Text(format!("{:?}", c.kind).to_lowercase()),
                c.algebraic.into(),
                c.ode.into(),
                c.physicality.unwrap_or(f64::NAN).into(),
                c.min_raw_occupation.unwrap_or(f64::NAN).into(),
                c.passes().into(),
                c.physical().into(),
            ]);
        }
        w.csv("validate.csv", &t, &echo);
    }
    if rc.format.json() {
        #[derive(Serialize)]
        struct Summary {
            version: &'static str,
            command: &'static str,
            seed: u64,
            cases: usize,
            max_algebraic: f64,
            max_ode: f64,
            algebraic_tol: f64,
            ode_tol: f64,
            agree: bool,
            min_physicality: f64,
            min_raw_occupation: f64,
            unphysical_cases: usize,
        }
        w.json(
            "validate.json",
            &Summary {
                version: VERSION,
                command: "validate",
                seed: rc.seed,
                cases: report.cases.len(),
                max_algebraic: report.max_algebraic,
                max_ode: report.max_ode,
                algebraic_tol: ALGEBRAIC_TOL,
                ode_tol: ODE_TOL,
                agree: report.passes(),
                min_physicality: report.min_physicality,
                min_raw_occupation: report.min_raw_occupation,
                unphysical_cases: report.unphysical().count(),
            },
        )?;
    }
    println!(
        "{} systems: max |eigenbasis - vectorized| = {:.3e} (tol {ALGEBRAIC_TOL:e}), max |moment ODE - eigenbasis| = {:.3e} (tol {ODE_TOL:e})",
        report.cases.len(),
        report.max_algebraic,
        report.max_ode
    );
    println!(
        "uncertainty floor min {:.3e}, {} of {} physical systems below -{PHYSICALITY_TOL:e}",
        report.min_physicality,
        report.unphysical().count(),
        report.cases.iter().filter(|c| c.physicality.is_some()).count()
    );
    if !report.passes() {
        let worst = report.failures().next().map(|c| c.label.clone()).unwrap_or_default();
        return Err(CliError::Validation(format!(
            "{} systems disagree, first: {worst}",
            report.failures().count()
        )));
    }
    Ok(())
}
