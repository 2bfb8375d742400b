//! Manufactured solutions, error norms, convergence rates, energy
//! bookkeeping and the condensed-versus-monolithic comparison.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_traits::Float;

use crate::global::{assemble_monolithic, dg_volume_dofs_per_element, dof_reduction, hdg_trace_dofs_per_face, DofMap};
use crate::hdg::{cn_element_system, local_matrices, Discretization, Stabilization};
use crate::materials::{MaterialError, MaterialField, MaterialParams, Voigt};
use crate::mesh::{BoundarySpec, Mesh};
use crate::timestep::{point_values, InitialData, PointValues, ProblemData, Solver, SolverError, State, TimeGrid};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerificationError {
    #[error("need at least two matching levels, got {errors} errors and {hs} sizes")]
    Levels { errors: usize, hs: usize },
    #[error("error and mesh size must be positive, got error {error} at h = {h}")]
    NonPositive { error: f64, h: f64 },
    #[error("unsupported degree {0}")]
    Degree(usize),
}

/// Compared fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Stress,
    SolidVelocity,
    FluidVelocity,
    Pressure,
}

impl Field {
    pub const ALL: [Field; 4] = [Field::Stress, Field::SolidVelocity, Field::FluidVelocity, Field::Pressure];

    pub fn name(self) -> &'static str {
        match self {
            Field::Stress => "sigma",
            Field::SolidVelocity => "v_s",
            Field::FluidVelocity => "v_f",
            Field::Pressure => "p",
        }
    }

    pub fn parse(s: &str) -> Option<Field> {
        Field::ALL.into_iter().find(|f| f.name() == s)
    }

    fn squared_norm(self, v: &PointValues) -> f64 {
        match self {
            Field::Stress => v[0] * v[0] + v[1] * v[1] + 2.0 * v[2] * v[2],
            Field::SolidVelocity => v[3] * v[3] + v[4] * v[4],
            Field::FluidVelocity => v[5] * v[5] + v[6] * v[6],
            Field::Pressure => v[7] * v[7],
        }
    }
}

fn voigt_apply(c: &Voigt, e: [f64; 3]) -> [f64; 3] {
    crate::materials::matvec(c, &e)
}

/// Manufactured solution on the unit square:
/// `u_s = (sin(pi x) sin(pi y), x y (x - 1)(y - 1)) sin(pi t)`,
/// `p = x (1 - x) sin^2(pi y) (2 + cos(pi t))`, `v_f = -grad p`.
/// `f`, `g` and the fluid momentum source are the residuals of the
/// equations.
#[derive(Debug, Clone, PartialEq)]
pub struct Example1 {
    pub material: MaterialParams,
}

impl Example1 {
    pub fn new(e: f64, nu: f64) -> Result<Self, MaterialError> {
        Ok(Self { material: MaterialParams::example1(e, nu)? })
    }

    pub fn with_material(material: MaterialParams) -> Self {
        Self { material }
    }

    /// `(a, b)` of `u_s = (a, b) sin(pi t)` with first and second
    /// derivatives: `[value, d_x, d_y, d_xx, d_xy, d_yy]`.
    fn spatial_u(x: [f64; 2]) -> [[f64; 6]; 2] {
        let (sx, cx) = (Float::sin(PI * x[0]), Float::cos(PI * x[0]));
        let (sy, cy) = (Float::sin(PI * x[1]), Float::cos(PI * x[1]));
        let pi2 = PI * PI;
        let a = [sx * sy, PI * cx * sy, PI * sx * cy, -pi2 * sx * sy, pi2 * cx * cy, -pi2 * sx * sy];
        let (qx, qy) = (x[0] * x[0] - x[0], x[1] * x[1] - x[1]);
        let (dqx, dqy) = (2.0 * x[0] - 1.0, 2.0 * x[1] - 1.0);
        let b = [qx * qy, dqx * qy, qx * dqy, 2.0 * qy, dqx * dqy, 2.0 * qx];
        [a, b]
    }

    /// `P` of `p = P (2 + cos(pi t))`: `[value, d_x, d_y, d_xx, d_xy, d_yy]`.
    fn spatial_p(x: [f64; 2]) -> [f64; 6] {
        let s = Float::sin(PI * x[1]);
        let s2 = Float::sin(2.0 * PI * x[1]);
        let c2 = Float::cos(2.0 * PI * x[1]);
        let q = x[0] - x[0] * x[0];
        let dq = 1.0 - 2.0 * x[0];
        [q * s * s, dq * s * s, q * PI * s2, -2.0 * s * s, dq * PI * s2, q * 2.0 * PI * PI * c2]
    }

    fn time_p(t: f64) -> (f64, f64) {
        (2.0 + Float::cos(PI * t), -PI * Float::sin(PI * t))
    }

    pub fn displacement(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let [a, b] = Self::spatial_u(x);
        let st = Float::sin(PI * t);
        [a[0] * st, b[0] * st]
    }

    pub fn solid_velocity(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let [a, b] = Self::spatial_u(x);
        let ct = PI * Float::cos(PI * t);
        [a[0] * ct, b[0] * ct]
    }

    pub fn pressure(&self, x: [f64; 2], t: f64) -> f64 {
        Self::spatial_p(x)[0] * Self::time_p(t).0
    }

    pub fn fluid_velocity(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let p = Self::spatial_p(x);
        let tp = Self::time_p(t).0;
        [-p[1] * tp, -p[2] * tp]
    }

    pub fn div_fluid_velocity(&self, x: [f64; 2], t: f64) -> f64 {
        let p = Self::spatial_p(x);
        -(p[3] + p[5]) * Self::time_p(t).0
    }

    /// Engineering strain of `(a, b)` and its `x` and `y` derivatives.
    fn strains(x: [f64; 2]) -> [[f64; 3]; 3] {
        let [a, b] = Self::spatial_u(x);
        [[a[1], b[2], a[2] + b[1]], [a[3], b[4], a[4] + b[3]], [a[4], b[5], a[5] + b[4]]]
    }

    pub fn stress(&self, x: [f64; 2], t: f64) -> [f64; 3] {
        let e = Self::strains(x)[0];
        let s = voigt_apply(&self.material.c, e);
        let st = Float::sin(PI * t);
        let ap = self.material.alpha * self.pressure(x, t);
        [s[0] * st - ap, s[1] * st - ap, s[2] * st]
    }

    pub fn div_stress(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let [_, ex, ey] = Self::strains(x);
        let (sx, sy) = (voigt_apply(&self.material.c, ex), voigt_apply(&self.material.c, ey));
        let st = Float::sin(PI * t);
        let p = Self::spatial_p(x);
        let ap = self.material.alpha * Self::time_p(t).0;
        [(sx[0] + sy[2]) * st - ap * p[1], (sx[2] + sy[1]) * st - ap * p[2]]
    }

    fn accelerations(&self, x: [f64; 2], t: f64) -> ([f64; 2], [f64; 2]) {
        let [a, b] = Self::spatial_u(x);
        let s = -PI * PI * Float::sin(PI * t);
        let p = Self::spatial_p(x);
        let dtp = Self::time_p(t).1;
        ([a[0] * s, b[0] * s], [-p[1] * dtp, -p[2] * dtp])
    }

    pub fn body_force(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let m = &self.material;
        let (avs, avf) = self.accelerations(x, t);
        let ds = self.div_stress(x, t);
        core::array::from_fn(|d| m.rho11 * avs[d] + m.rho12 * avf[d] - ds[d])
    }

    pub fn fluid_momentum_source(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        let m = &self.material;
        let (avs, avf) = self.accelerations(x, t);
        let vf = self.fluid_velocity(x, t);
        let p = Self::spatial_p(x);
        let tp = Self::time_p(t).0;
        let gp = [p[1] * tp, p[2] * tp];
        core::array::from_fn(|d| {
            m.rho12 * avs[d] + m.rho22[d] * avf[d] + m.drag[d][0] * vf[0] + m.drag[d][1] * vf[1] + gp[d]
        })
    }

    pub fn fluid_source(&self, x: [f64; 2], t: f64) -> f64 {
        let m = &self.material;
        let [a, b] = Self::spatial_u(x);
        let div_vs = (a[1] + b[2]) * PI * Float::cos(PI * t);
        let dp = Self::spatial_p(x)[0] * Self::time_p(t).1;
        m.s0 * dp + self.div_fluid_velocity(x, t) + m.alpha * div_vs
    }

    pub fn values(&self, x: [f64; 2], t: f64) -> PointValues {
        let s = self.stress(x, t);
        let vs = self.solid_velocity(x, t);
        let vf = self.fluid_velocity(x, t);
        [s[0], s[1], s[2], vs[0], vs[1], vf[0], vf[1], self.pressure(x, t)]
    }

    /// Initial data at time `t`.
    pub fn at(&self, t: f64) -> Example1At<'_> {
        Example1At { ex: self, t }
    }
}

impl ProblemData for Example1 {
    fn body_force(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        Example1::body_force(self, x, t)
    }

    fn fluid_source(&self, x: [f64; 2], t: f64) -> f64 {
        Example1::fluid_source(self, x, t)
    }

    fn fluid_momentum_source(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        Example1::fluid_momentum_source(self, x, t)
    }

    fn solid_velocity_bc(&self, x: [f64; 2], t: f64) -> [f64; 2] {
        self.solid_velocity(x, t)
    }

    fn pressure_bc(&self, x: [f64; 2], t: f64) -> f64 {
        self.pressure(x, t)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Example1At<'a> {
    ex: &'a Example1,
    t: f64,
}

impl InitialData for Example1At<'_> {
    fn stress(&self, x: [f64; 2]) -> [f64; 3] {
        self.ex.stress(x, self.t)
    }
    fn div_stress(&self, x: [f64; 2]) -> [f64; 2] {
        self.ex.div_stress(x, self.t)
    }
    fn solid_velocity(&self, x: [f64; 2]) -> [f64; 2] {
        self.ex.solid_velocity(x, self.t)
    }
    fn fluid_velocity(&self, x: [f64; 2]) -> [f64; 2] {
        self.ex.fluid_velocity(x, self.t)
    }
    fn div_fluid_velocity(&self, x: [f64; 2]) -> f64 {
        self.ex.div_fluid_velocity(x, self.t)
    }
    fn pressure(&self, x: [f64; 2]) -> f64 {
        self.ex.pressure(x, self.t)
    }
}

/// `L2` errors of all four fields against `exact`, with a triangle rule of
/// order `order` (at least `2(k + 2)`). The stress uses the Voigt inner
/// product with shear weight 2.
pub fn l2_errors(solver: &Solver, state: &State, exact: impl Fn([f64; 2]) -> PointValues, order: usize) -> [f64; 4] {
    let rule = crate::fe::triangle_rule(order.min(crate::fe::MAX_ORDER)).expect("triangle rule within supported order");
    let basis = solver.discretization().basis();
    let l = solver.layout();
    let tab = basis.tabulate(&rule.points);
    let mut sums = [0.0; 4];
    for e in 0..solver.num_elements() {
        let map = solver.mesh().affine_map(e);
        let u = solver.element(&state.interior, e);
        for (q, (xi, w)) in rule.points.iter().zip(&rule.weights).enumerate() {
            let x = map.to_physical(*xi);
            let h = point_values(l, u, tab.values_at(q));
            let ex = exact(x);
            let diff: PointValues = core::array::from_fn(|i| h[i] - ex[i]);
            for (s, f) in sums.iter_mut().zip(Field::ALL) {
                *s += w * map.det * f.squared_norm(&diff);
            }
        }
    }
    sums.map(Float::sqrt)
}

/// `log(e_i / e_{i-1}) / log(h_i / h_{i-1})` for consecutive levels.
pub fn eoc(errors: &[f64], hs: &[f64]) -> Result<Vec<f64>, VerificationError> {
    check_levels(errors, hs)?;
    Ok((1..errors.len()).map(|i| Float::ln(errors[i] / errors[i - 1]) / Float::ln(hs[i] / hs[i - 1])).collect())
}

/// Least-squares slope of `log e` against `log h` over the last `n` levels.
pub fn fitted_slope(errors: &[f64], hs: &[f64], n: usize) -> Result<f64, VerificationError> {
    check_levels(errors, hs)?;
    let n = n.min(errors.len()).max(2);
    let s = errors.len() - n;
    let xs: Vec<f64> = hs[s..].iter().map(|h| Float::ln(*h)).collect();
    let ys: Vec<f64> = errors[s..].iter().map(|e| Float::ln(*e)).collect();
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}

fn check_levels(errors: &[f64], hs: &[f64]) -> Result<(), VerificationError> {
    if errors.len() != hs.len() || errors.len() < 2 {
        return Err(VerificationError::Levels { errors: errors.len(), hs: hs.len() });
    }
    for (&error, &h) in errors.iter().zip(hs) {
        if !(error > 0.0 && h > 0.0) {
            return Err(VerificationError::NonPositive { error, h });
        }
    }
    Ok(())
}

/// Errors of all fields over a sequence of mesh sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub k: usize,
    pub hs: Vec<f64>,
    /// `errors[level][field]` in [`Field::ALL`] order.
    pub errors: Vec<[f64; 4]>,
    pub steps: Vec<usize>,
}

impl ErrorReport {
    pub fn field_errors(&self, f: Field) -> Vec<f64> {
        let i = Field::ALL.iter().position(|g| *g == f).unwrap_or(0);
        self.errors.iter().map(|e| e[i]).collect()
    }

    pub fn eoc(&self, f: Field) -> Result<Vec<f64>, VerificationError> {
        eoc(&self.field_errors(f), &self.hs)
    }

    /// Slope fitted over the last three levels.
    pub fn asymptotic_slope(&self, f: Field) -> Result<f64, VerificationError> {
        fitted_slope(&self.field_errors(f), &self.hs, 3)
    }

    /// Aligned table: `h`, then error and e.o.c. per field.
    pub fn to_table(&self) -> String {
        let mut s = format!("{:>3} {:>10}", "k", "h");
        for f in Field::ALL {
            s += &format!(" {:>11} {:>6}", format!("err({})", f.name()), "eoc");
        }
        s.push('\n');
        let rates: Vec<Vec<f64>> = Field::ALL.iter().map(|f| self.eoc(*f).unwrap_or_default()).collect();
        for (i, h) in self.hs.iter().enumerate() {
            s += &format!("{:>3} {:>10}", self.k, format_h(*h));
            for (j, _) in Field::ALL.iter().enumerate() {
                let r = if i == 0 { String::from("-") } else { rates[j].get(i - 1).map(|r| format!("{r:.2}")).unwrap_or_default() };
                s += &format!(" {:>11.2e} {:>6}", self.errors[i][j], r);
            }
            s.push('\n');
        }
        s
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("k,h,steps");
        for f in Field::ALL {
            s += &format!(",err_{0},eoc_{0}", f.name());
        }
        s.push('\n');
        let rates: Vec<Vec<f64>> = Field::ALL.iter().map(|f| self.eoc(*f).unwrap_or_default()).collect();
        for (i, h) in self.hs.iter().enumerate() {
            s += &format!("{},{:e},{}", self.k, h, self.steps.get(i).copied().unwrap_or(0));
            for j in 0..4 {
                let r = if i == 0 { String::new() } else { rates[j].get(i - 1).map(|r| format!("{r}")).unwrap_or_default() };
                s += &format!(",{:e},{}", self.errors[i][j], r);
            }
            s.push('\n');
        }
        s
    }
}

fn format_h(h: f64) -> String {
    let l = -Float::log2(h);
    if (l - Float::round(l)).abs() < 1e-9 {
        format!("2^-{}", Float::round(l) as i64)
    } else {
        format!("{h:.4}")
    }
}

/// How the initial state is built.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitMode {
    Elliptic,
    Interpolate,
}

/// Settings of a manufactured-solution run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudyOptions {
    pub t_final: f64,
    /// Time step bound `dt <= dt_scale * h^dt_power`.
    pub dt_scale: f64,
    pub dt_power: f64,
    pub c_s: f64,
    pub c_f: f64,
    pub init: InitMode,
}

impl StudyOptions {
    /// `T = 1`, `dt ~ h^{(k+2)/2}` so that `dt^2` stays below the solid
    /// velocity error, unit stabilization scales.
    pub fn defaults(k: usize) -> Self {
        Self { t_final: 1.0, dt_scale: 1.0, dt_power: (k as f64 + 2.0) / 2.0, c_s: 1.0, c_f: 1.0, init: InitMode::Elliptic }
    }
}

/// Unit-square mesh with `n x n` cells, Dirichlet data everywhere.
pub fn unit_square(n: usize) -> Mesh {
    Mesh::structured_rect([0.0, 1.0], [0.0, 1.0], n, n, &BoundarySpec::default()).expect("valid unit square")
}

/// One manufactured-solution run: errors at the final time and the number
/// of steps.
pub fn example1_run(ex: &Example1, k: usize, n: usize, grid: TimeGrid, opts: &StudyOptions) -> Result<([f64; 4], f64), SolverError> {
    let mesh = unit_square(n);
    let h = mesh.mesh_size().map_err(|_| SolverError::Setup("degenerate mesh"))?;
    let mats = MaterialField::uniform(ex.material.clone(), mesh.num_elements());
    let stab = Stabilization::scaled(&mesh, opts.c_s, opts.c_f);
    let solver = Solver::new(mesh, mats, k, stab, grid.dt)?;
    let state0 = match opts.init {
        InitMode::Elliptic => solver.init_elliptic(&ex.at(0.0), 0.0)?,
        InitMode::Interpolate => solver.init_interpolate(&ex.at(0.0), 0.0),
    };
    let last = solver.run(state0, grid.steps, ex, |_, _| {})?;
    let t = last.t;
    Ok((l2_errors(&solver, &last, |x| ex.values(x, t), 2 * k + 6), h))
}

/// Example-1 runs on `n x n` unit-square meshes for each `n` in `levels`.
/// The reported `h` is `1 / n`.
pub fn convergence_study(ex: &Example1, k: usize, levels: &[usize], opts: &StudyOptions) -> Result<ErrorReport, SolverError> {
    if k == 0 {
        return Err(SolverError::Setup("degree must be at least 1"));
    }
    let mut report = ErrorReport { k, hs: Vec::new(), errors: Vec::new(), steps: Vec::new() };
    for &n in levels {
        let h = 1.0 / n as f64;
        let grid = TimeGrid::covering(opts.t_final, opts.dt_scale * Float::powf(h, opts.dt_power))?;
        let (err, _) = example1_run(ex, k, n, grid, opts)?;
        report.hs.push(h);
        report.errors.push(err);
        report.steps.push(grid.steps);
    }
    Ok(report)
}

/// Final-time errors on a fixed `n x n` mesh for each step count in
/// `steps`. The reported `h` entries hold the time steps.
pub fn temporal_study(ex: &Example1, k: usize, n: usize, steps: &[usize], opts: &StudyOptions) -> Result<ErrorReport, SolverError> {
    let mut report = ErrorReport { k, hs: Vec::new(), errors: Vec::new(), steps: Vec::new() };
    for &m in steps {
        let grid = TimeGrid::new(opts.t_final / m as f64, m)?;
        let (err, _) = example1_run(ex, k, n, grid, opts)?;
        report.hs.push(grid.dt);
        report.errors.push(err);
        report.steps.push(m);
    }
    Ok(report)
}

/// Static (initialization) solve errors at `t` for each level.
pub fn initialization_study(ex: &Example1, k: usize, levels: &[usize], t: f64) -> Result<(ErrorReport, Vec<[f64; 2]>), SolverError> {
    let mut report = ErrorReport { k, hs: Vec::new(), errors: Vec::new(), steps: Vec::new() };
    let mut residuals = Vec::new();
    for &n in levels {
        let mesh = unit_square(n);
        let mats = MaterialField::uniform(ex.material.clone(), mesh.num_elements());
        let stab = Stabilization::scaled(&mesh, 1.0, 1.0);
        let solver = Solver::new(mesh, mats, k, stab, 1.0)?;
        let st = solver.init_elliptic(&ex.at(t), t)?;
        residuals.push(solver.trace_residual(&st));
        report.hs.push(1.0 / n as f64);
        report.errors.push(l2_errors(&solver, &st, |x| ex.values(x, t), 2 * k + 6));
        report.steps.push(0);
    }
    Ok((report, residuals))
}

/// One sample of the discrete energy balance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergySample {
    pub t: f64,
    /// `X_i^2`.
    pub x2: f64,
    /// Accumulated dissipation `Y_i^2 = sum_j dt Z_j^2`.
    pub y2: f64,
}

impl EnergySample {
    /// `X_i^2 + 2 Y_i^2`, constant for source-free runs.
    pub fn balance(&self) -> f64 {
        self.x2 + 2.0 * self.y2
    }
}

/// Runs `steps` steps and records `X_i^2` and `Y_i^2` after each.
pub fn energy_series(solver: &Solver, state0: State, steps: usize, data: &dyn ProblemData) -> Result<Vec<EnergySample>, SolverError> {
    let mut out = vec![EnergySample { t: state0.t, x2: solver.energy(&state0), y2: 0.0 }];
    let mut prev = state0.clone();
    let mut y2 = 0.0;
    solver.run(state0, steps, data, |i, st| {
        if i == 0 {
            return;
        }
        y2 += solver.dt() * solver.step_dissipation(&prev, st);
        out.push(EnergySample { t: st.t, x2: solver.energy(st), y2 });
        prev = st.clone();
    })?;
    Ok(out)
}

/// Largest relative deviation `|X_i^2 + 2 Y_i^2 - X_0^2| / X_0^2`.
pub fn energy_defect(series: &[EnergySample]) -> f64 {
    let x0 = series.first().map(|s| s.x2).unwrap_or(0.0);
    if x0 == 0.0 {
        return series.iter().map(|s| s.balance().abs()).fold(0.0, f64::max);
    }
    series.iter().map(|s| (s.balance() - x0).abs() / x0).fold(0.0, f64::max)
}

/// One Crank-Nicolson step from random interior values, traces, loads and
/// new essential values, computed by the solver's condensed path and by the
/// monolithic system. Returns the largest difference relative to the
/// largest monolithic coefficient.
pub fn oracle_compare(mesh: &Mesh, k: usize, material: &MaterialParams, dt: f64, seed: u64) -> Result<f64, SolverError> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mats = MaterialField::uniform(material.clone(), mesh.num_elements());
    let stab = Stabilization::defaults(mesh, 1.0, 1.0).map_err(|_| SolverError::Setup("stabilization"))?;
    let solver = Solver::new(mesh.clone(), mats, k, stab.clone(), dt)?;
    let mut state = solver.zero_state(0.0);
    state.interior.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
    state.traces.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
    let loads: Vec<f64> = state.interior.iter().map(|_| rng.gen_range(-1.0..1.0)).collect();
    let ess: Vec<f64> = (0..solver.dofmap().len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let fast = solver.advance_with(&state, Some(&loads), &ess).map_err(|source| SolverError::Solve { stage: crate::timestep::Stage::Step(1), source })?;

    let disc = Discretization::new(k, Discretization::default_order(k))?;
    let dm = DofMap::new(mesh, k);
    let n = disc.layout.n_interior();
    let mut systems = Vec::with_capacity(mesh.num_elements());
    let (mut ri, mut rb) = (Vec::new(), Vec::new());
    for e in 0..mesh.num_elements() {
        let b = local_matrices(&disc.kernel(mesh, e), material, disc.layout, stab.tau_s[e], stab.tau_f[e]);
        let cn = cn_element_system(&b, dt);
        let lam: Vec<f64> = dm.element_dofs(e).iter().map(|&g| state.traces[g]).collect();
        let (a, c) = cn.rhs(&state.interior[e * n..(e + 1) * n], &lam, &loads[e * n..(e + 1) * n]);
        ri.push(a);
        rb.push(c);
        systems.push(cn.system);
    }
    let mono = assemble_monolithic(&systems, &dm);
    let (u, lam) = mono.solve(&ri, &rb, &ess).map_err(|source| SolverError::Solve { stage: crate::timestep::Stage::Step(1), source })?;
    let flat: Vec<f64> = u.into_iter().flatten().collect();
    let scale = flat.iter().chain(&lam).fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
    let diff = flat
        .iter()
        .zip(&fast.interior)
        .chain(lam.iter().zip(&fast.traces))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f64, f64::max);
    Ok(diff / scale)
}

/// One row of the globally-coupled unknown count comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DofRow {
    pub k: usize,
    /// Volume unknowns per element of the all-`P_k` DG method.
    pub dg_per_element: usize,
    /// Trace unknowns per face of this method.
    pub hdg_per_face: usize,
    /// Percentage reduction with `N_f = 1.5 N_e`.
    pub reduction_percent: f64,
}

pub fn dof_table(ks: core::ops::RangeInclusive<usize>) -> Vec<DofRow> {
    ks.map(|k| DofRow {
        k,
        dg_per_element: dg_volume_dofs_per_element(k),
        hdg_per_face: hdg_trace_dofs_per_face(k),
        reduction_percent: 100.0 * dof_reduction(k, 1.5),
    })
    .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_formula_values() {
        let ex = Example1::new(3.0, 0.3).unwrap();
        let u = ex.displacement([0.5, 0.5], 0.5);
        assert!((u[0] - 1.0).abs() < 1e-15 && (u[1] - 0.0625).abs() < 1e-15);
        assert!((ex.pressure([0.5, 0.5], 0.0) - 0.75).abs() < 1e-15);
        for s in [0.0, 0.3, 1.0] {
            for t in [0.0, 0.4] {
                for x in [[s, 0.0], [s, 1.0], [0.0, s], [1.0, s]] {
                    let u = ex.displacement(x, t);
                    assert!(u[0].abs() < 1e-15 && u[1].abs() < 1e-15);
                    assert!(ex.pressure(x, t).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn initial_stress_is_minus_alpha_p() {
        let ex = Example1::new(3.0, 0.3).unwrap();
        let x = [0.3, 0.6];
        let s = ex.stress(x, 0.0);
        let p = ex.pressure(x, 0.0);
        assert!((s[0] + p).abs() < 1e-15 && (s[1] + p).abs() < 1e-15 && s[2] == 0.0);
        let v = ex.solid_velocity(x, 0.0);
        let want = [PI * Float::sin(PI * 0.3) * Float::sin(PI * 0.6), PI * 0.3 * 0.6 * (0.3 - 1.0) * (0.6 - 1.0)];
        assert!((v[0] - want[0]).abs() < 1e-14 && (v[1] - want[1]).abs() < 1e-14);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let ex = Example1::new(3.0, 0.3).unwrap();
        let h = 1e-5;
        for &(x, t) in &[([0.21, 0.73], 0.3), ([0.64, 0.12], 1.7)] {
            let sx = |dx: f64, dy: f64| ex.stress([x[0] + dx, x[1] + dy], t);
            let (a, b, c, d) = (sx(h, 0.0), sx(-h, 0.0), sx(0.0, h), sx(0.0, -h));
            let div = [(a[0] - b[0] + c[2] - d[2]) / (2.0 * h), (a[2] - b[2] + c[1] - d[1]) / (2.0 * h)];
            let ds = ex.div_stress(x, t);
            assert!((div[0] - ds[0]).abs() < 1e-6 && (div[1] - ds[1]).abs() < 1e-6);
            let vf = |dx: f64, dy: f64| ex.fluid_velocity([x[0] + dx, x[1] + dy], t);
            let dv = (vf(h, 0.0)[0] - vf(-h, 0.0)[0] + vf(0.0, h)[1] - vf(0.0, -h)[1]) / (2.0 * h);
            assert!((dv - ex.div_fluid_velocity(x, t)).abs() < 1e-6);
            let ph = (ex.pressure([x[0] + h, x[1]], t) - ex.pressure([x[0] - h, x[1]], t)) / (2.0 * h);
            assert!((ph + ex.fluid_velocity(x, t)[0]).abs() < 1e-6);
            let ut = (ex.displacement(x, t + h)[1] - ex.displacement(x, t - h)[1]) / (2.0 * h);
            assert!((ut - ex.solid_velocity(x, t)[1]).abs() < 1e-6);
        }
    }

    #[test]
    fn eoc_examples() {
        let r = eoc(&[1e-2, 2.5e-3], &[0.5, 0.25]).unwrap();
        assert!((r[0] - 2.0).abs() < 1e-12);
        let r = eoc(&[8e-3, 1e-3], &[0.5, 0.25]).unwrap();
        assert!((r[0] - 3.0).abs() < 1e-12);
        let r = eoc(&[7.36e-3, 1.67e-3], &[0.25, 0.125]).unwrap();
        assert!((r[0] - 2.14).abs() < 5e-3);
        assert!(eoc(&[0.0, 1.0], &[0.5, 0.25]).is_err());
        assert!(eoc(&[1.0], &[0.5]).is_err());
    }

    #[test]
    fn fitted_slope_of_exact_power_law() {
        let hs = [0.5, 0.25, 0.125, 0.0625];
        let e: Vec<f64> = hs.iter().map(|h| 3.0 * h * h * h).collect();
        assert!((fitted_slope(&e, &hs, 3).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn l2_error_of_constant_offset_and_zero() {
        let mesh = unit_square(2);
        let mats = MaterialField::uniform(MaterialParams::example1(3.0, 0.3).unwrap(), mesh.num_elements());
        let stab = Stabilization::defaults(&mesh, 1.0, 1.0).unwrap();
        let s = Solver::new(mesh, mats, 1, stab, 0.1).unwrap();
        let z = s.zero_state(0.0);
        assert_eq!(l2_errors(&s, &z, |_| [0.0; 8], 6), [0.0; 4]);
        let e = l2_errors(&s, &z, |_| [0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.5], 6);
        assert!((e[3] - 2.5).abs() < 1e-13);
        let e = l2_errors(&s, &z, |_| [0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0], 6);
        assert!((e[0] - 2f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn dof_rows() {
        let t = dof_table(1..=4);
        assert_eq!(t.iter().map(|r| r.dg_per_element).collect::<Vec<_>>(), [24, 48, 80, 120]);
        assert_eq!(t.iter().map(|r| r.hdg_per_face).collect::<Vec<_>>(), [6, 9, 12, 15]);
        let want = [62.5, 71.9, 77.5, 81.3];
        for (r, w) in t.iter().zip(want) {
            assert!((r.reduction_percent - w).abs() < 0.1);
        }
    }

    #[test]
    fn oracle_agrees_on_small_mesh() {
        let m = unit_square(2);
        let d = oracle_compare(&m, 1, &MaterialParams::example1(3.0, 0.3).unwrap(), 0.1, 1).unwrap();
        assert!(d < 1e-9, "{d}");
    }

    #[test]
    fn table_and_csv_render() {
        let r = ErrorReport { k: 1, hs: vec![0.5, 0.25], errors: vec![[1.0, 1.0, 1.0, 1.0], [0.25, 0.125, 0.25, 0.25]], steps: vec![2, 4] };
        let t = r.to_table();
        assert!(t.contains("2^-2") && t.contains("2.00") && t.contains("3.00"));
        assert_eq!(r.to_csv().lines().count(), 3);
    }
}
