//! Configuration files.
//!
//! ```text
//! poro-hdg-config 1
//! # comment
//! [section]
//! key = value
//! ```
//!
//! The first significant line is the version header. Sections and keys are
//! strict: anything unknown is an error. Numbers may carry a unit suffix
//! (`36 GPa`); bare numbers are SI. Pairs and lists are comma-separated.

use std::collections::HashSet;
use std::path::Path;

use poro_hdg::materials::{
    anisotropic_stiffness, drag_matrix, isotropic_stiffness, MaterialError, MaterialParams,
};
use poro_hdg::mesh::{BoundaryRule, BoundarySpec, BoundaryTags, ElasticBc, FlowBc, Side};
use poro_hdg::verification::InitMode;
use thiserror::Error;

use crate::units::{parse_quantity, Quantity, UnitError};

pub const HEADER: &str = "poro-hdg-config 1";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{0}: missing required key")]
    Missing(String),
    #[error("{0}: unknown key")]
    UnknownKey(String),
    #[error("[{0}]: unknown section")]
    UnknownSection(String),
    #[error("{path}: {source}")]
    Unit { path: String, source: UnitError },
    #[error("{path}: {msg}")]
    Invalid { path: String, msg: String },
    #[error("{path}: {source}")]
    Material { path: String, source: MaterialError },
    #[error("unknown scenario `{name}` (available: {available})")]
    UnknownScenario { name: String, available: String },
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
}

fn invalid(path: &str, msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { path: path.into(), msg: msg.into() }
}

/// Raw `section -> key = value` content in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Document {
    pub sections: Vec<(String, Vec<(String, String)>)>,
}

impl Document {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut doc = Document::default();
        let mut header = false;
        let mut seen = HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = match raw.find('#') {
                Some(c) => &raw[..c],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            if !header {
                if content != HEADER {
                    return Err(ConfigError::Syntax { line, msg: format!("expected header `{HEADER}`") });
                }
                header = true;
                continue;
            }
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .map(str::trim)
                    .filter(|n| !n.is_empty())
                    .ok_or_else(|| ConfigError::Syntax { line, msg: "malformed section header".into() })?;
                if doc.sections.iter().any(|s| s.0 == name) {
                    return Err(ConfigError::Syntax { line, msg: format!("duplicate section [{name}]") });
                }
                doc.sections.push((name.to_string(), Vec::new()));
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| ConfigError::Syntax { line, msg: "expected `key = value`".into() })?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() || value.is_empty() {
                return Err(ConfigError::Syntax { line, msg: "empty key or value".into() });
            }
            let section =
                doc.sections.last_mut().ok_or_else(|| ConfigError::Syntax { line, msg: "key outside a section".into() })?;
            if !seen.insert((section.0.clone(), key.to_string())) {
                return Err(ConfigError::Syntax { line, msg: format!("duplicate key {}.{key}", section.0) });
            }
            section.1.push((key.to_string(), value.to_string()));
        }
        if !header {
            return Err(ConfigError::Syntax { line: 1, msg: format!("expected header `{HEADER}`") });
        }
        Ok(doc)
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.section(section)?.iter().find(|e| e.0 == key).map(|e| e.1.as_str())
    }

    pub fn section(&self, name: &str) -> Option<&[(String, String)]> {
        self.sections.iter().find(|s| s.0 == name).map(|s| s.1.as_slice())
    }

    /// Sets `section.key`, splitting the path at its last dot.
    pub fn set(&mut self, path: &str, value: &str) -> Result<(), ConfigError> {
        let (section, key) =
            path.rsplit_once('.').ok_or_else(|| invalid(path, "override path must be `section.key`"))?;
        let (section, key, value) = (section.trim(), key.trim(), value.trim());
        if section.is_empty() || key.is_empty() || value.is_empty() {
            return Err(invalid(path, "empty override"));
        }
        let idx = match self.sections.iter().position(|s| s.0 == section) {
            Some(i) => i,
            None => {
                self.sections.push((section.to_string(), Vec::new()));
                self.sections.len() - 1
            }
        };
        let entries = &mut self.sections[idx].1;
        match entries.iter_mut().find(|e| e.0 == key) {
            Some(e) => e.1 = value.to_string(),
            None => entries.push((key.to_string(), value.to_string())),
        }
        Ok(())
    }

    pub fn remove(&mut self, section: &str, key: &str) {
        if let Some(s) = self.sections.iter_mut().find(|s| s.0 == section) {
            s.1.retain(|e| e.0 != key);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Simulate,
    ConvergenceStudy,
    OracleCheck,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Simulate => "simulate",
            Mode::ConvergenceStudy => "convergence-study",
            Mode::OracleCheck => "oracle-check",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Mode::Simulate, Mode::ConvergenceStudy, Mode::OracleCheck].into_iter().find(|m| m.name() == s)
    }
}

/// One entry of a [`poro_hdg::timestep::PointValues`] array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Component {
    SigmaXx,
    SigmaYy,
    SigmaXy,
    VsX,
    VsY,
    VfX,
    VfY,
    P,
}

impl Component {
    pub const ALL: [Component; 8] = [
        Component::SigmaXx,
        Component::SigmaYy,
        Component::SigmaXy,
        Component::VsX,
        Component::VsY,
        Component::VfX,
        Component::VfY,
        Component::P,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["sigma_xx", "sigma_yy", "sigma_xy", "vs_x", "vs_y", "vf_x", "vf_y", "p"][self.index()]
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeshSource {
    Structured { x: [f64; 2], y: [f64; 2], nx: usize, ny: usize },
    File(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Refinement {
    pub center: [f64; 2],
    pub radius: f64,
    pub levels: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeshConfig {
    pub source: MeshSource,
    pub refine: Option<Refinement>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataKind {
    Zero,
    Manufactured,
}

impl DataKind {
    fn name(self) -> &'static str {
        match self {
            DataKind::Zero => "zero",
            DataKind::Manufactured => "manufactured",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryConfig {
    pub spec: BoundarySpec,
    pub data: DataKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elasticity {
    Isotropic { e: f64, nu: f64 },
    Transverse { c11: f64, c13: f64, c33: f64, c55: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum MaterialSpec {
    Library(String),
    Explicit {
        elasticity: Elasticity,
        alpha: f64,
        s0: f64,
        rho11: f64,
        rho12: f64,
        rho22: [f64; 2],
        eta: f64,
        kappa: Option<[f64; 2]>,
    },
}

impl MaterialSpec {
    pub fn params(&self) -> Result<MaterialParams, MaterialError> {
        match self {
            MaterialSpec::Library(name) => MaterialParams::library(name),
            MaterialSpec::Explicit { elasticity, alpha, s0, rho11, rho12, rho22, eta, kappa } => {
                let c = match *elasticity {
                    Elasticity::Isotropic { e, nu } => isotropic_stiffness(e, nu)?,
                    Elasticity::Transverse { c11, c13, c33, c55 } => anisotropic_stiffness(c11, c13, c33, c55)?,
                };
                let drag = match kappa {
                    Some(k) => drag_matrix(*eta, *k)?,
                    None if *eta == 0.0 => [[0.0; 2]; 2],
                    None => return Err(MaterialError::Negative { name: "kappa (required when eta > 0)", value: 0.0 }),
                };
                MaterialParams::new(c, *alpha, *s0, *rho11, *rho12, *rho22, drag)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedMaterial {
    pub name: String,
    pub spec: MaterialSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Lt,
    Le,
    Gt,
    Ge,
}

/// `axis cmp value` on element centroids; `axis` 0 is x.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Condition {
    pub axis: usize,
    pub cmp: Cmp,
    pub value: f64,
}

impl Condition {
    pub fn holds(&self, x: [f64; 2]) -> bool {
        let v = x[self.axis];
        match self.cmp {
            Cmp::Lt => v < self.value,
            Cmp::Le => v <= self.value,
            Cmp::Gt => v > self.value,
            Cmp::Ge => v >= self.value,
        }
    }
}

/// Elements whose centroid satisfies every condition get `material`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionRule {
    pub material: String,
    pub conditions: Vec<Condition>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionConfig {
    pub default: String,
    pub rules: Vec<RegionRule>,
}

impl RegionConfig {
    /// Material name at `x`: the first matching rule, else the default.
    pub fn material_at(&self, x: [f64; 2]) -> &str {
        self.rules
            .iter()
            .find(|r| r.conditions.iter().all(|c| c.holds(x)))
            .map_or(self.default.as_str(), |r| r.material.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseConfig {
    pub targets: Vec<Component>,
    pub a0: f64,
    pub lx: f64,
    pub ly: f64,
    pub center: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialKind {
    Zero,
    Manufactured,
    Pulse(PulseConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialConfig {
    pub kind: InitialKind,
    pub method: InitMode,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_final: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: String,
    pub snapshots: usize,
    pub fields: Vec<Component>,
    pub diagnostics: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub levels: Vec<usize>,
    pub dt_scale: f64,
    /// Defaults to `(k + 2) / 2`.
    pub dt_power: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub mode: Mode,
    pub degree: usize,
    pub seed: u64,
    pub mesh: MeshConfig,
    pub boundary: BoundaryConfig,
    pub c_s: f64,
    pub c_f: f64,
    pub materials: Vec<NamedMaterial>,
    pub regions: RegionConfig,
    pub initial: InitialConfig,
    pub sources: DataKind,
    pub time: TimeConfig,
    pub output: OutputConfig,
    pub study: StudyConfig,
}

const SIDES: [(Side, &str); 4] = [(Side::Left, "left"), (Side::Right, "right"), (Side::Bottom, "bottom"), (Side::Top, "top")];

fn elastic_name(b: ElasticBc) -> &'static str {
    match b {
        ElasticBc::Velocity => "velocity",
        ElasticBc::Traction => "traction",
    }
}

fn flow_name(b: FlowBc) -> &'static str {
    match b {
        FlowBc::Pressure => "pressure",
        FlowBc::Flux => "flux",
    }
}

/// Typed access to a [`Document`] that records which keys were consumed.
struct Reader<'a> {
    doc: &'a Document,
    used: HashSet<(String, String)>,
}

impl<'a> Reader<'a> {
    fn raw(&mut self, section: &str, key: &str) -> Option<&'a str> {
        let v = self.doc.get(section, key)?;
        self.used.insert((section.to_string(), key.to_string()));
        Some(v)
    }


    fn quantity(&mut self, section: &str, key: &str, q: Quantity) -> Result<Option<f64>, ConfigError> {
        self.raw(section, key)
            .map(|v| parse_quantity(v, q).map_err(|source| ConfigError::Unit { path: format!("{section}.{key}"), source }))
            .transpose()
    }

    fn number(&mut self, section: &str, key: &str, q: Quantity) -> Result<f64, ConfigError> {
        self.quantity(section, key, q)?.ok_or_else(|| ConfigError::Missing(format!("{section}.{key}")))
    }

    fn list(&mut self, section: &str, key: &str, q: Quantity) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(v) = self.raw(section, key) else { return Ok(None) };
        v.split(',')
            .map(|s| parse_quantity(s, q).map_err(|source| ConfigError::Unit { path: format!("{section}.{key}"), source }))
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    fn pair(&mut self, section: &str, key: &str, q: Quantity) -> Result<Option<[f64; 2]>, ConfigError> {
        match self.list(section, key, q)? {
            None => Ok(None),
            Some(v) if v.len() == 2 => Ok(Some([v[0], v[1]])),
            Some(_) => Err(invalid(&format!("{section}.{key}"), "expected two comma-separated values")),
        }
    }

    fn integer<T: std::str::FromStr>(&mut self, section: &str, key: &str) -> Result<Option<T>, ConfigError> {
        self.raw(section, key)
            .map(|v| v.parse::<T>().map_err(|_| invalid(&format!("{section}.{key}"), format!("`{v}` is not a non-negative integer"))))
            .transpose()
    }

    fn choice<T>(&mut self, section: &str, key: &str, options: &[(&str, T)]) -> Result<Option<T>, ConfigError>
    where
        T: Copy,
    {
        let Some(v) = self.raw(section, key) else { return Ok(None) };
        options.iter().find(|o| o.0 == v).map(|o| Some(o.1)).ok_or_else(|| {
            let names: Vec<&str> = options.iter().map(|o| o.0).collect();
            invalid(&format!("{section}.{key}"), format!("`{v}` is not one of {}", names.join(", ")))
        })
    }

    fn finish(&self) -> Result<(), ConfigError> {
        for (section, entries) in &self.doc.sections {
            for (key, _) in entries {
                if !self.used.contains(&(section.clone(), key.clone())) {
                    return Err(ConfigError::UnknownKey(format!("{section}.{key}")));
                }
            }
        }
        Ok(())
    }
}

const SECTIONS: [&str; 10] =
    ["run", "mesh", "boundary", "stabilization", "regions", "initial", "sources", "time", "output", "study"];

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Io { path: path.display().to_string(), source })?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        Self::from_document(&Document::parse(text)?)
    }

    pub fn from_document(doc: &Document) -> Result<Self, ConfigError> {
        for (name, _) in &doc.sections {
            let known = match name.split_once('.') {
                Some(("material", rest)) => !rest.is_empty() && !rest.contains('.'),
                _ => SECTIONS.contains(&name.as_str()),
            };
            if !known {
                return Err(ConfigError::UnknownSection(name.clone()));
            }
        }
        let mut r = Reader { doc, used: HashSet::new() };
        let modes = [("simulate", Mode::Simulate), ("convergence-study", Mode::ConvergenceStudy), ("oracle-check", Mode::OracleCheck)];
        let mode = r.choice("run", "mode", &modes)?.unwrap_or(Mode::Simulate);
        let degree: usize = r.integer("run", "degree")?.ok_or_else(|| ConfigError::Missing("run.degree".into()))?;
        if degree == 0 {
            return Err(invalid("run.degree", "degree must be at least 1"));
        }
        let seed: u64 = r.integer("run", "seed")?.unwrap_or(0);

        let mesh = read_mesh(&mut r)?;
        let boundary = read_boundary(&mut r)?;
        let c_s = r.quantity("stabilization", "c_s", Quantity::Any)?.unwrap_or(1.0);
        let c_f = r.quantity("stabilization", "c_f", Quantity::Any)?.unwrap_or(1.0);
        for (key, v) in [("c_s", c_s), ("c_f", c_f)] {
            if !(v > 0.0) {
                return Err(invalid(&format!("stabilization.{key}"), "must be positive"));
            }
        }
        let materials = read_materials(&mut r)?;
        let regions = read_regions(&mut r, &materials)?;
        let initial = read_initial(&mut r)?;
        let data = [("zero", DataKind::Zero), ("manufactured", DataKind::Manufactured)];
        let sources = r.choice("sources", "kind", &data)?.unwrap_or(DataKind::Zero);

        let dt = r.number("time", "dt", Quantity::Time)?;
        let t_final = r.number("time", "t_final", Quantity::Time)?;
        if !(dt > 0.0) {
            return Err(invalid("time.dt", "must be positive"));
        }
        if !(t_final >= 0.0) {
            return Err(invalid("time.t_final", "must be non-negative"));
        }
        let output = read_output(&mut r)?;
        let study = read_study(&mut r)?;
        r.finish()?;
        Ok(Config {
            mode,
            degree,
            seed,
            mesh,
            boundary,
            c_s,
            c_f,
            materials,
            regions,
            initial,
            sources,
            time: TimeConfig { dt, t_final },
            output,
            study,
        })
    }

    pub fn material(&self, name: &str) -> Option<&NamedMaterial> {
        self.materials.iter().find(|m| m.name == name)
    }

    /// Canonical text with every key spelled out in SI.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut w = |line: String| {
            s.push_str(&line);
            s.push('\n');
        };
        w(HEADER.into());
        w("[run]".into());
        w(format!("mode = {}", self.mode.name()));
        w(format!("degree = {}", self.degree));
        w(format!("seed = {}", self.seed));
        w("[mesh]".into());
        match &self.mesh.source {
            MeshSource::Structured { x, y, nx, ny } => {
                w(format!("x = {:?}, {:?}", x[0], x[1]));
                w(format!("y = {:?}, {:?}", y[0], y[1]));
                w(format!("nx = {nx}"));
                w(format!("ny = {ny}"));
            }
            MeshSource::File(p) => w(format!("file = {p}")),
        }
        if let Some(r) = &self.mesh.refine {
            w(format!("refine_center = {:?}, {:?}", r.center[0], r.center[1]));
            w(format!("refine_radius = {:?}", r.radius));
            w(format!("refine_levels = {}", r.levels));
        }
        w("[boundary]".into());
        w(format!("elastic = {}", elastic_name(self.boundary.spec.default.elastic)));
        w(format!("flow = {}", flow_name(self.boundary.spec.default.flow)));
        for rule in &self.boundary.spec.rules {
            let side = SIDES.iter().find(|s| s.0 == rule.side).map_or("all", |s| s.1);
            if let Some(e) = rule.elastic {
                w(format!("{side}.elastic = {}", elastic_name(e)));
            }
            if let Some(f) = rule.flow {
                w(format!("{side}.flow = {}", flow_name(f)));
            }
        }
        w(format!("data = {}", self.boundary.data.name()));
        w("[stabilization]".into());
        w(format!("c_s = {:?}", self.c_s));
        w(format!("c_f = {:?}", self.c_f));
        for m in &self.materials {
            w(format!("[material.{}]", m.name));
            match &m.spec {
                MaterialSpec::Library(name) => w(format!("library = {name}")),
                MaterialSpec::Explicit { elasticity, alpha, s0, rho11, rho12, rho22, eta, kappa } => {
                    match *elasticity {
                        Elasticity::Isotropic { e, nu } => {
                            w(format!("e = {e:?}"));
                            w(format!("nu = {nu:?}"));
                        }
                        Elasticity::Transverse { c11, c13, c33, c55 } => {
                            w(format!("c11 = {c11:?}"));
                            w(format!("c13 = {c13:?}"));
                            w(format!("c33 = {c33:?}"));
                            w(format!("c55 = {c55:?}"));
                        }
                    }
                    w(format!("alpha = {alpha:?}"));
                    w(format!("s0 = {s0:?}"));
                    w(format!("rho11 = {rho11:?}"));
                    w(format!("rho12 = {rho12:?}"));
                    w(format!("rho22 = {:?}, {:?}", rho22[0], rho22[1]));
                    w(format!("eta = {eta:?}"));
                    if let Some(k) = kappa {
                        w(format!("kappa = {:?}, {:?}", k[0], k[1]));
                    }
                }
            }
        }
        w("[regions]".into());
        w(format!("default = {}", self.regions.default));
        for rule in &self.regions.rules {
            let conds: Vec<String> = rule
                .conditions
                .iter()
                .map(|c| {
                    let op = match c.cmp {
                        Cmp::Lt => "<",
                        Cmp::Le => "<=",
                        Cmp::Gt => ">",
                        Cmp::Ge => ">=",
                    };
                    format!("{} {op} {:?}", ["x", "y"][c.axis], c.value)
                })
                .collect();
            w(format!("{} = {}", rule.material, conds.join(" and ")));
        }
        w("[initial]".into());
        match &self.initial.kind {
            InitialKind::Zero => w("kind = zero".into()),
            InitialKind::Manufactured => w("kind = manufactured".into()),
            InitialKind::Pulse(p) => {
                w("kind = gaussian-pulse".into());
                let t: Vec<&str> = p.targets.iter().map(|c| c.name()).collect();
                w(format!("targets = {}", t.join(", ")));
                w(format!("a0 = {:?}", p.a0));
                w(format!("lx = {:?}", p.lx));
                w(format!("ly = {:?}", p.ly));
                w(format!("center = {:?}, {:?}", p.center[0], p.center[1]));
            }
        }
        w(format!("method = {}", if self.initial.method == InitMode::Elliptic { "elliptic" } else { "interpolate" }));
        w("[sources]".into());
        w(format!("kind = {}", self.sources.name()));
        w("[time]".into());
        w(format!("dt = {:?}", self.time.dt));
        w(format!("t_final = {:?}", self.time.t_final));
        w("[output]".into());
        w(format!("directory = {}", self.output.directory));
        w(format!("snapshots = {}", self.output.snapshots));
        let f: Vec<&str> = self.output.fields.iter().map(|c| c.name()).collect();
        w(format!("fields = {}", f.join(", ")));
        w(format!("diagnostics = {}", self.output.diagnostics));
        w("[study]".into());
        let l: Vec<String> = self.study.levels.iter().map(|n| n.to_string()).collect();
        w(format!("levels = {}", l.join(", ")));
        w(format!("dt_scale = {:?}", self.study.dt_scale));
        if let Some(p) = self.study.dt_power {
            w(format!("dt_power = {p:?}"));
        }
        s
    }
}

fn read_mesh(r: &mut Reader<'_>) -> Result<MeshConfig, ConfigError> {
    let source = match r.raw("mesh", "file") {
        Some(path) => MeshSource::File(path.to_string()),
        None => {
            let x = r.pair("mesh", "x", Quantity::Length)?.ok_or_else(|| ConfigError::Missing("mesh.x".into()))?;
            let y = r.pair("mesh", "y", Quantity::Length)?.ok_or_else(|| ConfigError::Missing("mesh.y".into()))?;
            let nx: usize = r.integer("mesh", "nx")?.ok_or_else(|| ConfigError::Missing("mesh.nx".into()))?;
            let ny: usize = r.integer("mesh", "ny")?.ok_or_else(|| ConfigError::Missing("mesh.ny".into()))?;
            if !(x[1] > x[0]) {
                return Err(invalid("mesh.x", "empty interval"));
            }
            if !(y[1] > y[0]) {
                return Err(invalid("mesh.y", "empty interval"));
            }
            if nx == 0 || ny == 0 {
                return Err(invalid(if nx == 0 { "mesh.nx" } else { "mesh.ny" }, "must be positive"));
            }
            MeshSource::Structured { x, y, nx, ny }
        }
    };
    let center = r.pair("mesh", "refine_center", Quantity::Length)?;
    let radius = r.quantity("mesh", "refine_radius", Quantity::Length)?;
    let levels: Option<usize> = r.integer("mesh", "refine_levels")?;
    let refine = match (center, radius, levels) {
        (None, None, None) => None,
        (Some(center), Some(radius), Some(levels)) => {
            if !(radius > 0.0) {
                return Err(invalid("mesh.refine_radius", "must be positive"));
            }
            Some(Refinement { center, radius, levels })
        }
        _ => return Err(invalid("mesh.refine_center", "refine_center, refine_radius and refine_levels go together")),
    };
    Ok(MeshConfig { source, refine })
}

fn read_boundary(r: &mut Reader<'_>) -> Result<BoundaryConfig, ConfigError> {
    let elastic = [("velocity", ElasticBc::Velocity), ("traction", ElasticBc::Traction)];
    let flow = [("pressure", FlowBc::Pressure), ("flux", FlowBc::Flux)];
    let default = BoundaryTags {
        elastic: r.choice("boundary", "elastic", &elastic)?.unwrap_or(ElasticBc::Velocity),
        flow: r.choice("boundary", "flow", &flow)?.unwrap_or(FlowBc::Pressure),
    };
    let mut rules = Vec::new();
    for (side, name) in SIDES {
        let e = r.choice("boundary", &format!("{name}.elastic"), &elastic)?;
        let f = r.choice("boundary", &format!("{name}.flow"), &flow)?;
        if e.is_some() || f.is_some() {
            rules.push(BoundaryRule { side, elastic: e, flow: f });
        }
    }
    let kinds = [("zero", DataKind::Zero), ("manufactured", DataKind::Manufactured)];
    let data = r.choice("boundary", "data", &kinds)?.unwrap_or(DataKind::Zero);
    Ok(BoundaryConfig { spec: BoundarySpec { default, rules }, data })
}

const EXPLICIT_KEYS: [&str; 13] =
    ["e", "nu", "c11", "c13", "c33", "c55", "alpha", "s0", "rho11", "rho12", "rho22", "eta", "kappa"];

fn read_materials(r: &mut Reader<'_>) -> Result<Vec<NamedMaterial>, ConfigError> {
    let names: Vec<String> =
        r.doc.sections.iter().filter_map(|s| s.0.strip_prefix("material.").map(str::to_string)).collect();
    let mut out = Vec::new();
    for name in names {
        let sec = format!("material.{name}");
        let spec = if let Some(lib) = r.raw(&sec, "library") {
            if let Some(k) = EXPLICIT_KEYS.iter().find(|k| r.doc.get(&sec, k).is_some()) {
                return Err(invalid(&format!("{sec}.{k}"), "not allowed together with `library`"));
            }
            MaterialSpec::Library(lib.to_string())
        } else {
            let iso = r.doc.get(&sec, "e").is_some() || r.doc.get(&sec, "nu").is_some();
            let elasticity = if iso {
                Elasticity::Isotropic {
                    e: r.number(&sec, "e", Quantity::Stress)?,
                    nu: r.number(&sec, "nu", Quantity::Dimensionless)?,
                }
            } else {
                Elasticity::Transverse {
                    c11: r.number(&sec, "c11", Quantity::Stress)?,
                    c13: r.number(&sec, "c13", Quantity::Stress)?,
                    c33: r.number(&sec, "c33", Quantity::Stress)?,
                    c55: r.number(&sec, "c55", Quantity::Stress)?,
                }
            };
            let rho22 = match r.list(&sec, "rho22", Quantity::Density)? {
                Some(v) if v.len() == 1 => [v[0], v[0]],
                Some(v) if v.len() == 2 => [v[0], v[1]],
                Some(_) => return Err(invalid(&format!("{sec}.rho22"), "expected one or two values")),
                None => return Err(ConfigError::Missing(format!("{sec}.rho22"))),
            };
            let kappa = match r.list(&sec, "kappa", Quantity::Permeability)? {
                Some(v) if v.len() == 1 => Some([v[0], v[0]]),
                Some(v) if v.len() == 2 => Some([v[0], v[1]]),
                Some(_) => return Err(invalid(&format!("{sec}.kappa"), "expected one or two values")),
                None => None,
            };
            let eta = r.quantity(&sec, "eta", Quantity::Viscosity)?.unwrap_or(0.0);
            if eta > 0.0 && kappa.is_none() {
                return Err(ConfigError::Missing(format!("{sec}.kappa")));
            }
            MaterialSpec::Explicit {
                elasticity,
                alpha: r.number(&sec, "alpha", Quantity::Dimensionless)?,
                s0: r.number(&sec, "s0", Quantity::Compressibility)?,
                rho11: r.number(&sec, "rho11", Quantity::Density)?,
                rho12: r.number(&sec, "rho12", Quantity::Density)?,
                rho22,
                eta,
                kappa,
            }
        };
        spec.params().map_err(|source| ConfigError::Material { path: material_key(&sec, &spec), source })?;
        out.push(NamedMaterial { name, spec });
    }
    if out.is_empty() {
        return Err(ConfigError::Missing("material.<name>".into()));
    }
    Ok(out)
}

/// Key most likely responsible for a material validation failure.
fn material_key(sec: &str, spec: &MaterialSpec) -> String {
    let key = match spec {
        MaterialSpec::Library(_) => "library",
        MaterialSpec::Explicit { elasticity: Elasticity::Isotropic { e, nu }, .. }
            if !(*e > 0.0) || !(*nu > -1.0 && *nu < 0.5) =>
        {
            if *e > 0.0 {
                "nu"
            } else {
                "e"
            }
        }
        MaterialSpec::Explicit { eta, kappa, .. } if *eta < 0.0 || kappa.is_some_and(|k| k.iter().any(|v| !(*v > 0.0))) => {
            if *eta < 0.0 {
                "eta"
            } else {
                "kappa"
            }
        }
        MaterialSpec::Explicit { elasticity: Elasticity::Transverse { .. }, .. } => "c11",
        MaterialSpec::Explicit { .. } => "rho11",
    };
    format!("{sec}.{key}")
}

fn read_regions(r: &mut Reader<'_>, materials: &[NamedMaterial]) -> Result<RegionConfig, ConfigError> {
    let check = |name: &str, path: &str| {
        if materials.iter().any(|m| m.name == name) {
            Ok(())
        } else {
            Err(invalid(path, format!("unknown material `{name}`")))
        }
    };
    let default = match r.raw("regions", "default") {
        Some(d) => d.to_string(),
        None if materials.len() == 1 => materials[0].name.clone(),
        None => return Err(ConfigError::Missing("regions.default".into())),
    };
    check(&default, "regions.default")?;
    let mut rules = Vec::new();
    let entries: Vec<(String, String)> = r.doc.section("regions").map(|s| s.to_vec()).unwrap_or_default();
    for (key, value) in entries {
        if key == "default" {
            continue;
        }
        let path = format!("regions.{key}");
        check(&key, &path)?;
        r.raw("regions", &key);
        let mut conditions = Vec::new();
        for clause in value.split(" and ") {
            let clause = clause.trim();
            let (axis, rest) = match clause.split_once(char::is_whitespace) {
                Some(("x", rest)) => (0, rest.trim()),
                Some(("y", rest)) => (1, rest.trim()),
                _ => return Err(invalid(&path, format!("expected `x|y <op> value`, got `{clause}`"))),
            };
            let (cmp, num) = if let Some(v) = rest.strip_prefix("<=") {
                (Cmp::Le, v)
            } else if let Some(v) = rest.strip_prefix(">=") {
                (Cmp::Ge, v)
            } else if let Some(v) = rest.strip_prefix('<') {
                (Cmp::Lt, v)
            } else if let Some(v) = rest.strip_prefix('>') {
                (Cmp::Gt, v)
            } else {
                return Err(invalid(&path, format!("expected a comparison in `{clause}`")));
            };
            let value = parse_quantity(num, Quantity::Length).map_err(|source| ConfigError::Unit { path: path.clone(), source })?;
            conditions.push(Condition { axis, cmp, value });
        }
        rules.push(RegionRule { material: key, conditions });
    }
    Ok(RegionConfig { default, rules })
}

fn components(r: &mut Reader<'_>, section: &str, key: &str) -> Result<Option<Vec<Component>>, ConfigError> {
    let Some(v) = r.raw(section, key) else { return Ok(None) };
    let path = format!("{section}.{key}");
    let mut out = Vec::new();
    for name in v.split(',').map(str::trim) {
        let c = Component::parse(name).ok_or_else(|| {
            let all: Vec<&str> = Component::ALL.iter().map(|c| c.name()).collect();
            invalid(&path, format!("unknown field `{name}` (fields: {})", all.join(", ")))
        })?;
        if out.contains(&c) {
            return Err(invalid(&path, format!("field `{name}` listed twice")));
        }
        out.push(c);
    }
    Ok(Some(out))
}

fn read_initial(r: &mut Reader<'_>) -> Result<InitialConfig, ConfigError> {
    let kinds = [("zero", 0), ("manufactured", 1), ("gaussian-pulse", 2)];
    let kind = match r.choice("initial", "kind", &kinds)?.unwrap_or(0) {
        0 => InitialKind::Zero,
        1 => InitialKind::Manufactured,
        _ => {
            let targets = components(r, "initial", "targets")?.ok_or_else(|| ConfigError::Missing("initial.targets".into()))?;
            let a0 = r.quantity("initial", "a0", Quantity::Any)?.unwrap_or(1.0);
            let lx = r.number("initial", "lx", Quantity::Length)?;
            let ly = r.number("initial", "ly", Quantity::Length)?;
            for (key, v) in [("lx", lx), ("ly", ly)] {
                if !(v > 0.0) {
                    return Err(invalid(&format!("initial.{key}"), "must be positive"));
                }
            }
            let center = r.pair("initial", "center", Quantity::Length)?.unwrap_or([0.0; 2]);
            InitialKind::Pulse(PulseConfig { targets, a0, lx, ly, center })
        }
    };
    let methods = [("elliptic", InitMode::Elliptic), ("interpolate", InitMode::Interpolate)];
    let method = r.choice("initial", "method", &methods)?.unwrap_or(InitMode::Elliptic);
    Ok(InitialConfig { kind, method })
}

fn read_output(r: &mut Reader<'_>) -> Result<OutputConfig, ConfigError> {
    let directory = r.raw("output", "directory").unwrap_or("out").to_string();
    let snapshots: usize = r.integer("output", "snapshots")?.unwrap_or(50);
    let fields = components(r, "output", "fields")?.unwrap_or_else(|| Component::ALL.to_vec());
    let diagnostics = r.choice("output", "diagnostics", &[("true", true), ("false", false)])?.unwrap_or(true);
    Ok(OutputConfig { directory, snapshots, fields, diagnostics })
}

fn read_study(r: &mut Reader<'_>) -> Result<StudyConfig, ConfigError> {
    let levels = match r.raw("study", "levels") {
        None => vec![2, 4, 8, 16],
        Some(v) => v
            .split(',')
            .map(|s| s.trim().parse::<usize>().ok().filter(|&n| n > 0))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| invalid("study.levels", "expected positive integers"))?,
    };
    let dt_scale = r.quantity("study", "dt_scale", Quantity::Dimensionless)?.unwrap_or(1.0);
    let dt_power = r.quantity("study", "dt_power", Quantity::Dimensionless)?;
    if !(dt_scale > 0.0) {
        return Err(invalid("study.dt_scale", "must be positive"));
    }
    Ok(StudyConfig { levels, dt_scale, dt_power })
}

/// One-line description of a run.
pub fn summary(cfg: &Config) -> String {
    format!("mode {} k={} dt={:e} T={:e}", cfg.mode.name(), cfg.degree, cfg.time.dt, cfg.time.t_final)
}
