//! Mesh, material and solver construction from a [`Config`], and the three
//! run modes.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use poro_hdg::hdg::Stabilization;
use poro_hdg::materials::{MaterialField, MaterialParams};
use poro_hdg::mesh::Mesh;
use poro_hdg::timestep::{InitialData, ProblemData, Solver, SolverError, State, TimeGrid, ZeroInitial};
use poro_hdg::verification::{
    convergence_study, l2_errors, oracle_compare, ErrorReport, Example1, InitMode, StudyOptions,
};
use thiserror::Error;

use crate::config::{Config, ConfigError, DataKind, InitialKind, MeshSource};
use crate::pulse::PulseData;
use crate::{meshfile, mtx, vtk};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("mesh: {0}")]
    Mesh(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{0}")]
    Check(String),
}

impl RunError {
    /// 2 for configuration problems, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            _ => 1,
        }
    }
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> RunError + '_ {
    move |source| RunError::Io { path: path.display().to_string(), source }
}

fn create(path: &Path) -> Result<BufWriter<fs::File>, RunError> {
    fs::File::create(path).map(BufWriter::new).map_err(io_err(path))
}

pub fn build_mesh(cfg: &Config) -> Result<Mesh, RunError> {
    let mesh = match &cfg.mesh.source {
        MeshSource::Structured { x, y, nx, ny } => {
            Mesh::structured_rect(*x, *y, *nx, *ny, &cfg.boundary.spec).map_err(|e| RunError::Mesh(e.to_string()))?
        }
        MeshSource::File(p) => {
            let path = Path::new(p);
            let text = fs::read_to_string(path).map_err(io_err(path))?;
            meshfile::read(&text).map_err(|e| RunError::Mesh(e.to_string()))?
        }
    };
    Ok(match cfg.mesh.refine {
        Some(r) => mesh.refine_near_point(r.center, r.radius, r.levels),
        None => mesh,
    })
}

/// Parameters of the default region.
pub fn default_material(cfg: &Config) -> Result<MaterialParams, RunError> {
    let m = cfg.material(&cfg.regions.default).ok_or_else(|| {
        ConfigError::Invalid { path: "regions.default".into(), msg: "unknown material".into() }
    })?;
    m.spec.params().map_err(|source| ConfigError::Material { path: format!("material.{}", m.name), source }.into())
}

pub fn build_materials(cfg: &Config, mesh: &Mesh) -> Result<MaterialField, RunError> {
    let mut regions = Vec::with_capacity(cfg.materials.len());
    for m in &cfg.materials {
        let p = m.spec.params().map_err(|source| ConfigError::Material { path: format!("material.{}", m.name), source })?;
        regions.push(p);
    }
    let element_region = (0..mesh.num_elements())
        .map(|e| {
            let name = cfg.regions.material_at(mesh.centroid(e));
            cfg.materials.iter().position(|m| m.name == name).unwrap_or(0)
        })
        .collect();
    MaterialField::new(regions, element_region).map_err(|e| RunError::Check(format!("element {e} has no material")))
}

/// Time grid that ends exactly at `t_final` with steps no longer than
/// `time.dt`.
pub fn time_grid(cfg: &Config) -> Result<TimeGrid, RunError> {
    if cfg.time.t_final == 0.0 {
        return Ok(TimeGrid::new(cfg.time.dt, 0)?);
    }
    Ok(TimeGrid::covering(cfg.time.t_final, cfg.time.dt)?)
}

pub fn build_solver(cfg: &Config, mesh: Mesh, dt: f64) -> Result<Solver, RunError> {
    let mats = build_materials(cfg, &mesh)?;
    let stab = Stabilization::scaled(&mesh, cfg.c_s, cfg.c_f);
    Ok(Solver::new(mesh, mats, cfg.degree, stab, dt)?)
}

/// Sources and boundary data selected by the config.
pub struct Data {
    pub exact: Option<Example1>,
    pub sources: bool,
    pub boundary: bool,
}

impl Data {
    pub fn new(cfg: &Config) -> Result<Self, RunError> {
        let sources = cfg.sources == DataKind::Manufactured;
        let boundary = cfg.boundary.data == DataKind::Manufactured;
        let manufactured = sources || boundary || cfg.initial.kind == InitialKind::Manufactured;
        let exact = if manufactured { Some(Example1::with_material(default_material(cfg)?)) } else { None };
        Ok(Self { exact, sources, boundary })
    }

    fn src(&self) -> Option<&Example1> {
        self.exact.as_ref().filter(|_| self.sources)
    }

    fn bc(&self) -> Option<&Example1> {
        self.exact.as_ref().filter(|_| self.boundary)
    }
}

impl ProblemData for Data {
    fn body_force(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        self.src().map_or([0.0; 2], |e| e.body_force(x, t))
    }

    fn fluid_source(&self, x: [f64; 2], t: f64) -> f64 {
        self.src().map_or(0.0, |e| e.fluid_source(x, t))
    }

    fn fluid_momentum_source(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        self.src().map_or([0.0; 2], |e| e.fluid_momentum_source(x, t))
    }

    fn solid_velocity_bc(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        self.bc().map_or([0.0; 2], |e| e.solid_velocity(x, t))
    }

    fn pressure_bc(&self, x: [f64; 2], t: f64) -> f64 {
        self.bc().map_or(0.0, |e| e.pressure(x, t))
    }

    fn has_sources(&self) -> bool {
        self.sources
    }

    fn has_boundary_data(&self) -> bool {
        self.boundary
    }
}

pub fn initial_state(cfg: &Config, solver: &Solver, data: &Data) -> Result<State, RunError> {
    let pulse;
    let at;
    let init: &dyn InitialData = match &cfg.initial.kind {
        InitialKind::Zero => &ZeroInitial,
        InitialKind::Manufactured => {
            at = data.exact.as_ref().map(|e| e.at(0.0)).ok_or_else(|| RunError::Check("no manufactured solution".into()))?;
            &at
        }
        InitialKind::Pulse(p) => {
            pulse = PulseData::from_config(p)
                .ok_or_else(|| ConfigError::Invalid { path: "initial.lx".into(), msg: "must be positive".into() })?;
            &pulse
        }
    };
    Ok(match cfg.initial.method {
        InitMode::Elliptic => solver.init_elliptic(init, 0.0)?,
        InitMode::Interpolate => solver.init_interpolate(init, 0.0),
    })
}

/// Step indices at which snapshots are written: `count` evenly spaced
/// indices from 0 to `steps`, without repeats.
pub fn snapshot_steps(steps: usize, count: usize) -> Vec<usize> {
    let mut out: Vec<usize> = match count {
        0 => Vec::new(),
        1 => vec![steps],
        _ => (0..count).map(|j| (j * steps + (count - 1) / 2) / (count - 1)).collect(),
    };
    out.dedup();
    out
}

/// One row of the diagnostics table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diagnostic {
    pub step: usize,
    pub t: f64,
    /// `X_i^2`.
    pub x2: f64,
    /// Accumulated dissipation `Y_i^2`.
    pub y2: f64,
    /// L2 norms of sigma, v_s, v_f, p.
    pub norms: [f64; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub elements: usize,
    pub trace_unknowns: usize,
    pub steps: usize,
    pub dt: f64,
    pub diagnostics: Vec<Diagnostic>,
    pub snapshots: Vec<PathBuf>,
    /// Final-time errors against the manufactured solution, when one is used.
    pub errors: Option<[f64; 4]>,
    pub all_finite: bool,
}

impl Summary {
    /// `X_{i+1}^2 <= X_i^2` up to rounding relative to `X_0^2`.
    pub fn energy_nonincreasing(&self, rel_tol: f64) -> bool {
        let x0 = self.diagnostics.first().map_or(0.0, |d| d.x2);
        self.diagnostics.windows(2).all(|w| w[1].x2 <= w[0].x2 + rel_tol * x0)
    }
}

/// Runs the time loop, writing VTK snapshots, `diagnostics.csv` and the
/// resolved `config.txt` to `out`. With `emit_matrix` the condensed trace
/// matrix is written to `trace_matrix.mtx`.
pub fn simulate(cfg: &Config, out: &Path, emit_matrix: bool) -> Result<Summary, RunError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let config_path = out.join("config.txt");
    fs::write(&config_path, cfg.to_text()).map_err(io_err(&config_path))?;
    let grid = time_grid(cfg)?;
    let solver = build_solver(cfg, build_mesh(cfg)?, grid.dt)?;
    if emit_matrix {
        write_matrix(&solver, &out.join("trace_matrix.mtx"))?;
    }
    let data = Data::new(cfg)?;
    let state0 = initial_state(cfg, &solver, &data)?;
    let k = cfg.degree;
    let order = 2 * k + 3;
    let zero = |_: [f64; 2]| [0.0; 8];
    let marks = snapshot_steps(grid.steps, cfg.output.snapshots);

    let mut diagnostics = Vec::with_capacity(grid.steps + 1);
    let mut snapshots = Vec::new();
    let mut failure: Option<RunError> = None;
    let mut prev: Option<State> = None;
    let mut y2 = 0.0;
    let mut all_finite = true;
    let last = solver.run(state0, grid.steps, &data, |i, st| {
        if failure.is_some() {
            return;
        }
        all_finite &= st.interior.iter().chain(&st.traces).all(|v| v.is_finite());
        if let Some(p) = &prev {
            y2 += solver.dt() * solver.step_dissipation(p, st);
        }
        diagnostics.push(Diagnostic { step: i, t: st.t, x2: solver.energy(st), y2, norms: l2_errors(&solver, st, zero, order) });
        if marks.binary_search(&i).is_ok() {
            let path = out.join(format!("snapshot_{:04}.vtk", snapshots.len()));
            let title = format!("poro-hdg step {i} t={:e}", st.t);
            let written = create(&path).and_then(|mut f| {
                vtk::write(&mut f, solver.mesh(), &vtk::vertex_values(&solver, st), &cfg.output.fields, &title)
                    .and_then(|_| f.flush())
                    .map_err(io_err(&path))
            });
            match written {
                Ok(()) => snapshots.push(path),
                Err(e) => failure = Some(e),
            }
        }
        prev = Some(st.clone());
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    if cfg.output.diagnostics {
        let path = out.join("diagnostics.csv");
        let mut f = create(&path)?;
        write_diagnostics(&mut f, &diagnostics).and_then(|_| f.flush()).map_err(io_err(&path))?;
    }
    let errors = match (&data.exact, &cfg.initial.kind) {
        (Some(ex), InitialKind::Manufactured) if data.sources && data.boundary => {
            let t = last.t;
            Some(l2_errors(&solver, &last, |x| ex.values(x, t), 2 * k + 6))
        }
        _ => None,
    };
    Ok(Summary {
        elements: solver.num_elements(),
        trace_unknowns: solver.dofmap().n_free(),
        steps: grid.steps,
        dt: grid.dt,
        diagnostics,
        snapshots,
        errors,
        all_finite,
    })
}

pub fn write_diagnostics(out: &mut impl Write, rows: &[Diagnostic]) -> std::io::Result<()> {
    writeln!(out, "step,t,x2,y2,norm_sigma,norm_vs,norm_vf,norm_p")?;
    for d in rows {
        write!(out, "{},{:.17e},{:.17e},{:.17e}", d.step, d.t, d.x2, d.y2)?;
        for n in d.norms {
            write!(out, ",{n:.17e}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

pub fn write_matrix(solver: &Solver, path: &Path) -> Result<(), RunError> {
    let n = solver.dofmap().n_free();
    let mut f = create(path)?;
    mtx::write(&mut f, n, n, solver.condensed().trace_matrix_triplets()).and_then(|_| f.flush()).map_err(io_err(path))
}

pub fn study_options(cfg: &Config) -> StudyOptions {
    let mut opts = StudyOptions::defaults(cfg.degree);
    opts.t_final = cfg.time.t_final;
    opts.dt_scale = cfg.study.dt_scale;
    if let Some(p) = cfg.study.dt_power {
        opts.dt_power = p;
    }
    opts.c_s = cfg.c_s;
    opts.c_f = cfg.c_f;
    opts.init = cfg.initial.method;
    opts
}

/// Manufactured-solution runs on `n x n` unit squares for each study level,
/// with the default material. Writes `convergence.csv` to `out`.
pub fn convergence(cfg: &Config, out: &Path) -> Result<ErrorReport, RunError> {
    let ex = Example1::with_material(default_material(cfg)?);
    let report = convergence_study(&ex, cfg.degree, &cfg.study.levels, &study_options(cfg))?;
    fs::create_dir_all(out).map_err(io_err(out))?;
    let path = out.join("convergence.csv");
    fs::write(&path, report.to_csv()).map_err(io_err(&path))?;
    Ok(report)
}

/// Condensed against monolithic single steps on the configured mesh with
/// the default material, for `seeds` consecutive seeds. Returns the largest
/// relative difference.
pub fn oracle(cfg: &Config, seeds: u64) -> Result<f64, RunError> {
    let mesh = build_mesh(cfg)?;
    let material = default_material(cfg)?;
    let mut worst: f64 = 0.0;
    for s in 0..seeds {
        worst = worst.max(oracle_compare(&mesh, cfg.degree, &material, cfg.time.dt, cfg.seed.wrapping_add(s))?);
    }
    Ok(worst)
}
