//! Plain-text configuration: `[section]` headers, `key = value` lines, `#`
//! comments. Physical quantities carry a unit suffix; model sections are
//! unit-free. Unknown sections and keys are rejected.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use optomech::experiments::{Grid, Objective, OptimizerOptions, SearchBounds};
use optomech::geometry::{CavitySpec, PumpGeometry};
use optomech::params::{Detuning, ModelParams, PhysicalParams, SphereSite};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub key: Option<String>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (&self.line, &self.key) {
            (Some(l), Some(k)) => write!(f, "line {l}, key `{k}`: {}", self.message),
            (Some(l), None) => write!(f, "line {l}: {}", self.message),
            (None, Some(k)) => write!(f, "key `{k}`: {}", self.message),
            (None, None) => f.write_str(&self.message),
        }
    }
}

impl ConfigError {
    pub fn new(message: impl Into<String>) -> Self {
        Self {
            line: None,
            key: None,
            message: message.into(),
        }
    }

    fn at(line: usize, key: Option<&str>, message: impl Into<String>) -> Self {
        Self {
            line: Some(line),
            key: key.map(str::to_string),
            message: message.into(),
        }
    }

    /// Invariant violation reported by the model layer after parsing.
    pub fn invalid(e: optomech::Error) -> Self {
        let key = match &e {
            optomech::Error::InvalidParam { field, .. } => Some(field.to_string()),
            _ => None,
        };
        Self {
            line: None,
            key,
            message: e.to_string(),
        }
    }
}

type Result<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

/// One `[name]` block. Keys are consumed as they are read so leftovers can be
/// reported as unknown.
#[derive(Debug, Clone)]
pub struct Section {
    name: String,
    line: usize,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<Entry> {
        self.entries.remove(key)
    }

    fn require(&mut self, key: &str) -> Result<Entry> {
        self.take(key).ok_or_else(|| ConfigError {
            line: Some(self.line),
            key: Some(key.to_string()),
            message: format!("missing in [{}]", self.name),
        })
    }

    fn finish(self) -> Result<()> {
        match self.entries.into_iter().min_by_key(|(_, e)| e.line) {
            Some((k, e)) => Err(ConfigError::at(
                e.line,
                Some(&k),
                format!("unknown key in [{}]", self.name),
            )),
            None => Ok(()),
        }
    }

    fn number(&mut self, key: &str) -> Result<f64> {
        let e = self.require(key)?;
        parse_number(&e, key)
    }

    fn number_or(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.take(key) {
            Some(e) => parse_number(&e, key),
            None => Ok(default),
        }
    }

    fn count_or(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.take(key) {
            Some(e) => e.value.parse().map_err(|_| {
                ConfigError::at(
                    e.line,
                    Some(key),
                    format!("expected a non-negative integer, got `{}`", e.value),
                )
            }),
            None => Ok(default),
        }
    }

    fn quantity(&mut self, key: &str, dim: Dimension) -> Result<f64> {
        let e = self.require(key)?;
        parse_quantity(&e, key, dim)
    }

    fn quantity_or(&mut self, key: &str, dim: Dimension, default: f64) -> Result<f64> {
        match self.take(key) {
            Some(e) => parse_quantity(&e, key, dim),
            None => Ok(default),
        }
    }

    fn word<T: std::str::FromStr>(&mut self, key: &str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.take(key) {
            Some(e) => e
                .value
                .parse()
                .map(Some)
                .map_err(|err| ConfigError::at(e.line, Some(key), format!("{err}"))),
            None => Ok(None),
        }
    }
}

fn parse_number(e: &Entry, key: &str) -> Result<f64> {
    let v: f64 = e.value.parse().map_err(|_| {
        ConfigError::at(
            e.line,
            Some(key),
            format!("expected a unit-free number, got `{}`", e.value),
        )
    })?;
    if !v.is_finite() {
        return Err(ConfigError::at(e.line, Some(key), "must be finite"));
    }
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dimension {
    Length,
    Mass,
    /// Frequencies in Hz are converted to angular rates (×2π).
    AngularRate,
    Temperature,
    Power,
    Density,
}

impl Dimension {
    fn units(self) -> &'static [(&'static str, f64)] {
        const TWO_PI: f64 = 2.0 * PI;
        match self {
            Dimension::Length => &[("nm", 1e-9), ("um", 1e-6), ("mm", 1e-3), ("cm", 1e-2), ("m", 1.0)],
            Dimension::Mass => &[
                ("pg", 1e-15),
                ("ng", 1e-12),
                ("ug", 1e-9),
                ("mg", 1e-6),
                ("g", 1e-3),
                ("kg", 1.0),
            ],
            Dimension::AngularRate => &[
                ("uHz", TWO_PI * 1e-6),
                ("mHz", TWO_PI * 1e-3),
                ("Hz", TWO_PI),
                ("kHz", TWO_PI * 1e3),
                ("MHz", TWO_PI * 1e6),
                ("GHz", TWO_PI * 1e9),
                ("rad/s", 1.0),
            ],
            Dimension::Temperature => &[("uK", 1e-6), ("mK", 1e-3), ("K", 1.0)],
            Dimension::Power => &[("uW", 1e-6), ("mW", 1e-3), ("W", 1.0)],
            Dimension::Density => &[("kg/m^3", 1.0), ("g/cm^3", 1e3)],
        }
    }
}

fn parse_quantity(e: &Entry, key: &str, dim: Dimension) -> Result<f64> {
    let mut parts = e.value.split_whitespace();
    let (Some(num), Some(unit), None) = (parts.next(), parts.next(), parts.next()) else {
        let allowed: Vec<&str> = dim.units().iter().map(|u| u.0).collect();
        return Err(ConfigError::at(
            e.line,
            Some(key),
            format!(
                "expected `<number> <unit>` with unit one of {allowed:?}, got `{}`",
                e.value
            ),
        ));
    };
    let v: f64 = num
        .parse()
        .map_err(|_| ConfigError::at(e.line, Some(key), format!("`{num}` is not a number")))?;
    let scale = dim.units().iter().find(|u| u.0 == unit).map(|u| u.1).ok_or_else(|| {
        let allowed: Vec<&str> = dim.units().iter().map(|u| u.0).collect();
        ConfigError::at(e.line, Some(key), format!("unit `{unit}` not one of {allowed:?}"))
    })?;
    if !v.is_finite() {
        return Err(ConfigError::at(e.line, Some(key), "must be finite"));
    }
    Ok(v * scale)
}

/// Parsed file before interpretation.
#[derive(Debug, Clone, Default)]
pub struct Document {
    sections: BTreeMap<String, Section>,
}

const SECTIONS: [&str; 4] = ["physical", "model", "sweep", "cavity"];

pub fn parse_document(text: &str) -> Result<Document> {
    let mut doc = Document::default();
    let mut current: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::at(line, None, "unterminated section header"))?
                .trim();
            if !SECTIONS.contains(&name) {
                return Err(ConfigError::at(line, None, format!("unknown section [{name}]")));
            }
            if doc.sections.contains_key(name) {
                return Err(ConfigError::at(line, None, format!("section [{name}] repeated")));
            }
            doc.sections.insert(
                name.to_string(),
                Section {
                    name: name.to_string(),
                    line,
                    entries: BTreeMap::new(),
                },
            );
            current = Some(name.to_string());
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ConfigError::at(line, None, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(ConfigError::at(line, Some(key), "empty key or value"));
        }
        let section = current
            .as_ref()
            .and_then(|c| doc.sections.get_mut(c))
            .ok_or_else(|| ConfigError::at(line, Some(key), "key outside of any section"))?;
        if section.entries.contains_key(key) {
            return Err(ConfigError::at(line, Some(key), "key repeated"));
        }
        section.entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line,
            },
        );
    }
    Ok(doc)
}

/// Everything a run can draw from a configuration file.
#[derive(Debug, Clone, Default)]
pub struct Config {
    pub physical: Option<PhysicalParams>,
    /// Effective detuning given with the physical section, in `kappa_c`.
    pub physical_detuning: Option<Detuning>,
    pub model: Option<ModelParams>,
    pub sweep: Option<SweepConfig>,
    pub cavity: Option<CavityConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Power,
    Squeezing,
    Landscape,
}

impl std::str::FromStr for SweepKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "power" => Ok(SweepKind::Power),
            "squeezing" => Ok(SweepKind::Squeezing),
            "landscape" => Ok(SweepKind::Landscape),
            _ => Err(format!("unknown sweep kind `{s}` (power, squeezing, landscape)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub kind: SweepKind,
    pub drive: Grid,
    pub geometry: PumpGeometry,
    pub omega1: Option<Grid>,
    pub omega2: Option<Grid>,
    pub bounds: SearchBounds,
    pub optimizer: OptimizerOptions,
    pub objective: Objective,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CavityConfig {
    pub spec: CavitySpec,
    pub points: usize,
}

pub fn parse_config(text: &str) -> Result<Config> {
    let mut doc = parse_document(text)?;
    let mut cfg = Config::default();
    if let Some(mut s) = doc.sections.remove("physical") {
        let (p, d) = physical_section(&mut s)?;
        s.finish()?;
        p.validate().map_err(ConfigError::invalid)?;
        cfg.physical = Some(p);
        cfg.physical_detuning = Some(d);
    }
    if let Some(mut s) = doc.sections.remove("model") {
        if cfg.physical.is_some() {
            return Err(ConfigError::at(
                s.line,
                None,
                "give either [physical] or [model], not both",
            ));
        }
        let m = model_section(&mut s)?;
        s.finish()?;
        m.validate().map_err(ConfigError::invalid)?;
        cfg.model = Some(m);
    }
    if let Some(mut s) = doc.sections.remove("sweep") {
        let sw = sweep_section(&mut s)?;
        s.finish()?;
        cfg.sweep = Some(sw);
    }
    if let Some(mut s) = doc.sections.remove("cavity") {
        let c = cavity_section(&mut s)?;
        s.finish()?;
        cfg.cavity = Some(c);
    }
    Ok(cfg)
}

fn detuning_of(s: &mut Section, value: f64) -> Result<Detuning> {
    let Some(e) = s.take("detuning_mode") else {
        return Ok(Detuning::Effective(value));
    };
    match e.value.as_str() {
        "effective" => Ok(Detuning::Effective(value)),
        "bare" => Ok(Detuning::Bare(value)),
        other => Err(ConfigError::at(
            e.line,
            Some("detuning_mode"),
            format!("expected `effective` or `bare`, got `{other}`"),
        )),
    }
}

fn physical_section(s: &mut Section) -> Result<(PhysicalParams, Detuning)> {
    use Dimension::*;
    let site = match s.take("sphere_site") {
        None => SphereSite::Node,
        Some(e) => match e.value.as_str() {
            "node" => SphereSite::Node,
            "antinode" => SphereSite::Antinode,
            other => {
                return Err(ConfigError::at(
                    e.line,
                    Some("sphere_site"),
                    format!("expected node or antinode, got `{other}`"),
                ))
            }
        },
    };
    let p = PhysicalParams {
        wavelength: s.quantity("wavelength", Length)?,
        cavity_length: s.quantity("cavity_length", Length)?,
        cavity_decay: s.quantity("cavity_decay", AngularRate)?,
        mirror_mass: s.quantity("mirror_mass", Mass)?,
        mirror_freq: s.quantity("mirror_freq", AngularRate)?,
        mirror_damping: s.quantity("mirror_damping", AngularRate)?,
        sphere_radius: s.quantity("sphere_radius", Length)?,
        sphere_density: s.quantity("sphere_density", Density)?,
        refractive_index: s.number("refractive_index")?,
        sphere_freq: s.quantity("sphere_freq", AngularRate)?,
        sphere_damping: s.quantity("sphere_damping", AngularRate)?,
        cavity_waist: s.quantity("cavity_waist", Length)?,
        bath_temp_mirror: s.quantity("bath_temp_mirror", Temperature)?,
        bath_temp_sphere: s.quantity("bath_temp_sphere", Temperature)?,
        input_power: s.quantity_or("input_power", Power, 0.0)?,
        sphere_site: site,
    };
    let detuning = s.quantity_or("detuning", AngularRate, 0.0)? / p.cavity_decay;
    let d = detuning_of(s, detuning)?;
    Ok((p, d))
}

fn model_section(s: &mut Section) -> Result<ModelParams> {
    let mut m = ModelParams {
        omega1: s.number("omega1")?,
        omega2: s.number("omega2")?,
        gamma1: s.number("gamma1")?,
        gamma2: s.number("gamma2")?,
        g1: s.number("g1")?,
        g2: s.number("g2")?,
        chi: s.number("chi")?,
        drive: s.number_or("drive", 0.0)?,
        n1: s.number("n1")?,
        n2: s.number("n2")?,
        detuning: Detuning::Effective(0.0),
    };
    let d = s.number("detuning")?;
    m.detuning = detuning_of(s, d)?;
    Ok(m)
}

fn grid_from(s: &mut Section, prefix: &str, default: Option<Grid>) -> Result<Option<Grid>> {
    let k = |suffix: &str| format!("{prefix}_{suffix}");
    let (lo_k, hi_k, n_k, sc_k) = (k("min"), k("max"), k("points"), k("scale"));
    let present = [&lo_k, &hi_k, &n_k, &sc_k]
        .iter()
        .any(|key| s.entries.contains_key(key.as_str()));
    if !present {
        return Ok(default);
    }
    let line = s.line;
    let lo = s.number(&lo_k)?;
    let hi = s.number(&hi_k)?;
    let points = s.count_or(&n_k, 20)?;
    let grid = match s.take(&sc_k) {
        None => Grid::Linear { lo, hi, points },
        Some(e) => match e.value.as_str() {
            "linear" => Grid::Linear { lo, hi, points },
            "log" => Grid::Log { lo, hi, points },
            other => {
                return Err(ConfigError::at(
                    e.line,
                    Some(&sc_k),
                    format!("expected `linear` or `log`, got `{other}`"),
                ))
            }
        },
    };
    grid.validate().map_err(|e| ConfigError {
        line: Some(line),
        key: Some(prefix.to_string()),
        message: e.to_string(),
    })?;
    Ok(Some(grid))
}

fn sweep_section(s: &mut Section) -> Result<SweepConfig> {
    let kind = s.word::<SweepKind>("kind")?.unwrap_or(SweepKind::Power);
    let drive = grid_from(
        s,
        "drive",
        Some(Grid::Log {
            lo: 1e6,
            hi: 1e11,
            points: 200,
        }),
    )?
    .expect("default supplied");
    let geometry = s
        .word::<PumpGeometry>("geometry")?
        .unwrap_or(PumpGeometry::FromFixedMirror);
    let omega1 = grid_from(s, "omega1", None)?;
    let omega2 = grid_from(s, "omega2", None)?;
    let defaults = optomech::presets::fig2_bounds();
    let bounds = SearchBounds {
        detuning: (
            s.number_or("detuning_min", defaults.detuning.0)?,
            s.number_or("detuning_max", defaults.detuning.1)?,
        ),
        drive: (
            s.number_or("opt_drive_min", defaults.drive.0)?,
            s.number_or("opt_drive_max", defaults.drive.1)?,
        ),
    };
    bounds.validate().map_err(ConfigError::invalid)?;
    let base = OptimizerOptions::default();
    let optimizer = OptimizerOptions {
        coarse_points: s.count_or("coarse_points", base.coarse_points)?,
        step_floor: s.number_or("step_floor", base.step_floor)?,
        starts: s.count_or("starts", base.starts)?,
    };
    let objective = s.word::<Objective>("objective")?.unwrap_or(Objective::SphereOccupation);
    if kind == SweepKind::Landscape && (omega1.is_none() || omega2.is_none()) {
        return Err(ConfigError {
            line: Some(s.line),
            key: Some(if omega1.is_none() { "omega1_min" } else { "omega2_min" }.to_string()),
            message: "a landscape sweep needs omega1_* and omega2_* ranges".into(),
        });
    }
    Ok(SweepConfig {
        kind,
        drive,
        geometry,
        omega1,
        omega2,
        bounds,
        optimizer,
        objective,
    })
}

fn cavity_section(s: &mut Section) -> Result<CavityConfig> {
    let length = s.quantity("length", Dimension::Length)?;
    let wavelength = s.quantity("wavelength", Dimension::Length)?;
    let r = s.number("reflectivity")?;
    let t = match s.take("transmissivity") {
        Some(e) => parse_number(&e, "transmissivity")?,
        None => (1.0 - r * r).max(0.0).sqrt(),
    };
    let points = s.count_or("points", 1001)?;
    let spec = CavitySpec::new(length, 2.0 * PI / wavelength, r, t).map_err(ConfigError::invalid)?;
    if points < 2 {
        return Err(ConfigError {
            line: Some(s.line),
            key: Some("points".into()),
            message: "need at least 2 samples".into(),
        });
    }
    Ok(CavityConfig { spec, points })
}

/// `[model]` record that [`parse_config`] reads back bit-for-bit.
pub fn model_record(m: &ModelParams) -> String {
    let (mode, d) = match m.detuning {
        Detuning::Effective(d) => ("effective", d),
        Detuning::Bare(d) => ("bare", d),
    };
    let fields = [
        ("omega1", m.omega1),
        ("omega2", m.omega2),
        ("gamma1", m.gamma1),
        ("gamma2", m.gamma2),
        ("g1", m.g1),
        ("g2", m.g2),
        ("chi", m.chi),
        ("drive", m.drive),
        ("n1", m.n1),
        ("n2", m.n2),
        ("detuning", d),
    ];
    let mut out = String::from("[model]\n");
    for (k, v) in fields {
        out.push_str(&format!("{k} = {v:e}\n"));
    }
    out.push_str(&format!("detuning_mode = {mode}\n"));
    out
}

/// `[physical]` record with SI units; frequencies in Hz.
pub fn physical_record(p: &PhysicalParams, detuning: Detuning) -> String {
    let hz = |w: f64| w / (2.0 * PI);
    let (mode, d) = match detuning {
        Detuning::Effective(d) => ("effective", d),
        Detuning::Bare(d) => ("bare", d),
    };
    let site = match p.sphere_site {
        SphereSite::Node => "node",
        SphereSite::Antinode => "antinode",
    };
    let lines = [
        format!("wavelength = {:e} m", p.wavelength),
        format!("cavity_length = {:e} m", p.cavity_length),
        format!("cavity_decay = {:e} Hz", hz(p.cavity_decay)),
        format!("mirror_mass = {:e} kg", p.mirror_mass),
        format!("mirror_freq = {:e} Hz", hz(p.mirror_freq)),
        format!("mirror_damping = {:e} Hz", hz(p.mirror_damping)),
        format!("sphere_radius = {:e} m", p.sphere_radius),
        format!("sphere_density = {:e} kg/m^3", p.sphere_density),
        format!("refractive_index = {:e}", p.refractive_index),
        format!("sphere_freq = {:e} Hz", hz(p.sphere_freq)),
        format!("sphere_damping = {:e} Hz", hz(p.sphere_damping)),
        format!("cavity_waist = {:e} m", p.cavity_waist),
        format!("bath_temp_mirror = {:e} K", p.bath_temp_mirror),
        format!("bath_temp_sphere = {:e} K", p.bath_temp_sphere),
        format!("input_power = {:e} W", p.input_power),
        format!("sphere_site = {site}"),
        format!("detuning = {:e} rad/s", d * p.cavity_decay),
        format!("detuning_mode = {mode}"),
    ];
    let mut out = String::from("[physical]\n");
    for l in lines {
        out.push_str(&l);
        out.push('\n');
    }
    out
}
