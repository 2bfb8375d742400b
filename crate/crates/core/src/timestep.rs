//! Crank-Nicolson time stepping, compatible initial data and discrete
//! energy bookkeeping.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use faer::Mat;
use num_traits::Float;

use crate::dense::{add_block, add_block_t, inverse, matvec, matvec_add, quad_form};
use crate::fe::edge_rule;
use crate::global::{CondensedSystem, DofMap, SolveError, TraceField};
use crate::hdg::local::{voigt_normal, DIV_VOIGT};
use crate::hdg::{cn_element_system, local_matrices, Discretization, ElementSystem, Layout, LocalBlocks, SpaceError, Stabilization};
use crate::materials::MaterialField;
use crate::mesh::Mesh;

/// Pipeline stage a failure belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Setup,
    Factorization,
    InitFluid,
    InitSolid,
    Step(usize),
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stage::Setup => write!(f, "setup"),
            Stage::Factorization => write!(f, "factorization"),
            Stage::InitFluid => write!(f, "fluid initial solve"),
            Stage::InitSolid => write!(f, "solid initial solve"),
            Stage::Step(i) => write!(f, "time step {i}"),
        }
    }
}

#[derive(Debug, Clone, thiserror::Error)]
pub enum SolverError {
    #[error("setup: {0}")]
    Space(#[from] SpaceError),
    #[error("setup: {0}")]
    Setup(&'static str),
    #[error("{stage}: {source}")]
    Solve {
        stage: Stage,
        #[source]
        source: SolveError,
    },
}

impl SolverError {
    pub fn stage(&self) -> Stage {
        match self {
            SolverError::Solve { stage, .. } => *stage,
            _ => Stage::Setup,
        }
    }
}

/// Difference quotient and mean of `g` over one step.
pub fn midpoint_ops(g0: f64, g1: f64, dt: f64) -> (f64, f64) {
    assert!(dt > 0.0, "time step must be positive");
    ((g1 - g0) / dt, 0.5 * (g0 + g1))
}

/// Uniform time grid `t_i = i dt`, `i = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, steps: usize) -> Result<Self, SolverError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SolverError::Setup("time step must be positive and finite"));
        }
        Ok(Self { dt, steps })
    }

    /// Smallest number of equal steps of size at most `max_dt` reaching
    /// `t_final`.
    pub fn covering(t_final: f64, max_dt: f64) -> Result<Self, SolverError> {
        if !(t_final > 0.0 && max_dt > 0.0) {
            return Err(SolverError::Setup("final time and step bound must be positive"));
        }
        let steps = Float::ceil(t_final / max_dt * (1.0 - 1e-12)).max(1.0) as usize;
        Self::new(t_final / steps as f64, steps)
    }

    pub fn time(&self, i: usize) -> f64 {
        i as f64 * self.dt
    }

    pub fn final_time(&self) -> f64 {
        self.time(self.steps)
    }
}

/// Sources and Dirichlet data. Every method defaults to zero.
pub trait ProblemData {
    fn body_force(&self, _x: [f64; 2], _t: f64) -> [f64; 2] {
        [0.0; 2]
    }

    fn fluid_source(&self, _x: [f64; 2], _t: f64) -> f64 {
        0.0
    }

    /// Right-hand side of the fluid momentum equation.
    fn fluid_momentum_source(&self, _x: [f64; 2], _t: f64) -> [f64; 2] {
        [0.0; 2]
    }

    fn solid_velocity_bc(&self, _x: [f64; 2], _t: f64) -> [f64; 2] {
        [0.0; 2]
    }

    fn pressure_bc(&self, _x: [f64; 2], _t: f64) -> f64 {
        0.0
    }

    /// `false` skips source quadrature.
    fn has_sources(&self) -> bool {
        true
    }

    /// `false` skips boundary projection.
    fn has_boundary_data(&self) -> bool {
        true
    }
}

/// Zero sources and homogeneous boundary data.
#[derive(Debug, Clone, Copy, Default)]
pub struct Homogeneous;

impl ProblemData for Homogeneous {
    fn has_sources(&self) -> bool {
        false
    }

    fn has_boundary_data(&self) -> bool {
        false
    }
}

/// Initial fields together with the derivatives the elliptic
/// initialization needs.
pub trait InitialData {
    fn stress(&self, x: [f64; 2]) -> [f64; 3];
    fn div_stress(&self, x: [f64; 2]) -> [f64; 2];
    fn solid_velocity(&self, x: [f64; 2]) -> [f64; 2];
    fn fluid_velocity(&self, x: [f64; 2]) -> [f64; 2];
    fn div_fluid_velocity(&self, x: [f64; 2]) -> f64;
    fn pressure(&self, x: [f64; 2]) -> f64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroInitial;

impl InitialData for ZeroInitial {
    fn stress(&self, _: [f64; 2]) -> [f64; 3] {
        [0.0; 3]
    }
    fn div_stress(&self, _: [f64; 2]) -> [f64; 2] {
        [0.0; 2]
    }
    fn solid_velocity(&self, _: [f64; 2]) -> [f64; 2] {
        [0.0; 2]
    }
    fn fluid_velocity(&self, _: [f64; 2]) -> [f64; 2] {
        [0.0; 2]
    }
    fn div_fluid_velocity(&self, _: [f64; 2]) -> f64 {
        0.0
    }
    fn pressure(&self, _: [f64; 2]) -> f64 {
        0.0
    }
}

/// Coefficients at one time level: interior unknowns element-major in
/// [`Layout`] order, traces in [`DofMap`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub interior: Vec<f64>,
    pub traces: Vec<f64>,
}

/// Point values `(sigma_xx, sigma_yy, sigma_xy, vs_x, vs_y, vf_x, vf_y, p)`.
pub type PointValues = [f64; 8];

/// Fixed-step solver: element data, the factorized trace system and the
/// element mass matrices.
pub struct Solver {
    mesh: Mesh,
    materials: MaterialField,
    stab: Stabilization,
    disc: Discretization,
    dofmap: DofMap,
    dt: f64,
    condensed: CondensedSystem,
    mass: Vec<Mat<f64>>,
}

impl fmt::Debug for Solver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Solver")
            .field("elements", &self.mesh.num_elements())
            .field("k", &self.disc.k())
            .field("dt", &self.dt)
            .field("condensed", &self.condensed)
            .finish()
    }
}

fn solve_err(stage: Stage) -> impl Fn(SolveError) -> SolverError {
    move |source| SolverError::Solve { stage, source }
}

impl Solver {
    /// Builds and factorizes the system for degree `k` and step `dt`, with
    /// the minimal exact quadrature.
    pub fn new(mesh: Mesh, materials: MaterialField, k: usize, stab: Stabilization, dt: f64) -> Result<Self, SolverError> {
        Self::with_quadrature(mesh, materials, k, stab, dt, Discretization::default_order(k))
    }

    pub fn with_quadrature(
        mesh: Mesh,
        materials: MaterialField,
        k: usize,
        stab: Stabilization,
        dt: f64,
        quad_order: usize,
    ) -> Result<Self, SolverError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SolverError::Setup("time step must be positive and finite"));
        }
        let n = mesh.num_elements();
        if materials.num_elements() != n || stab.tau_s.len() != n || stab.tau_f.len() != n {
            return Err(SolverError::Setup("material or stabilization size differs from mesh"));
        }
        let disc = Discretization::new(k, quad_order)?;
        let dofmap = DofMap::new(&mesh, k);
        let mut mass = Vec::with_capacity(n);
        let condensed = CondensedSystem::from_fn(&dofmap, |e| {
            let b = local_matrices(&disc.kernel(&mesh, e), materials.get(e), disc.layout, stab.tau_s[e], stab.tau_f[e]);
            mass.push(b.mass_matrix());
            cn_element_system(&b, dt).system
        })
        .map_err(solve_err(Stage::Factorization))?;
        Ok(Self { mesh, materials, stab, disc, dofmap, dt, condensed, mass })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn materials(&self) -> &MaterialField {
        &self.materials
    }

    pub fn stabilization(&self) -> &Stabilization {
        &self.stab
    }

    pub fn discretization(&self) -> &Discretization {
        &self.disc
    }

    pub fn layout(&self) -> Layout {
        self.disc.layout
    }

    pub fn dofmap(&self) -> &DofMap {
        &self.dofmap
    }

    pub fn condensed(&self) -> &CondensedSystem {
        &self.condensed
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn num_elements(&self) -> usize {
        self.mesh.num_elements()
    }

    /// Element blocks, recomputed.
    pub fn blocks(&self, e: usize) -> LocalBlocks {
        local_matrices(&self.disc.kernel(&self.mesh, e), self.materials.get(e), self.disc.layout, self.stab.tau_s[e], self.stab.tau_f[e])
    }

    pub fn zero_state(&self, t: f64) -> State {
        State { t, interior: vec![0.0; self.num_elements() * self.layout().n_interior()], traces: vec![0.0; self.dofmap.len()] }
    }

    pub fn element<'s>(&self, v: &'s [f64], e: usize) -> &'s [f64] {
        let n = self.layout().n_interior();
        &v[e * n..(e + 1) * n]
    }

    fn local_traces(&self, lam: &[f64], e: usize) -> Vec<f64> {
        self.dofmap.element_dofs(e).iter().map(|&g| lam[g]).collect()
    }

    /// Field values of element `e` at reference point `xi`.
    pub fn point_values(&self, state: &State, e: usize, xi: [f64; 2]) -> PointValues {
        let l = self.layout();
        let mut phi = vec![0.0; l.nk1];
        self.disc.basis().eval(xi, &mut phi);
        point_values(l, self.element(&state.interior, e), &phi)
    }

    /// Element load vectors `F` at time `t`, element-major.
    pub fn loads(&self, data: &dyn ProblemData, t: f64) -> Vec<f64> {
        let l = self.layout();
        let n = l.n_interior();
        let mut out = vec![0.0; self.num_elements() * n];
        for e in 0..self.num_elements() {
            let kx = self.disc.kernel(&self.mesh, e);
            let f = &mut out[e * n..(e + 1) * n];
            for q in 0..kx.len() {
                let (x, w, v) = (kx.points[q], kx.weights[q], kx.values(q));
                let fb = data.body_force(x, t);
                let ff = data.fluid_momentum_source(x, t);
                let g = data.fluid_source(x, t);
                for d in 0..2 {
                    for i in 0..l.nk1 {
                        f[l.vs(d, i)] += w * fb[d] * v[i];
                    }
                    for i in 0..l.nk {
                        f[l.vf(d, i)] += w * ff[d] * v[i];
                    }
                }
                for i in 0..l.nk {
                    f[l.p(i)] += w * g * v[i];
                }
            }
        }
        out
    }

    /// Facewise `L2` projections of Dirichlet data at time `t` on the
    /// essential trace unknowns; zero elsewhere.
    pub fn essential_traces(&self, data: &dyn ProblemData, t: f64) -> Vec<f64> {
        let mut lam = vec![0.0; self.dofmap.len()];
        if !data.has_boundary_data() {
            return lam;
        }
        project_boundary(&self.mesh, &self.dofmap, 2 * self.disc.k() + 6, &mut lam, |x, field| match field {
            TraceField::VelocityX => data.solid_velocity_bc(x, t)[0],
            TraceField::VelocityY => data.solid_velocity_bc(x, t)[1],
            TraceField::Pressure => data.pressure_bc(x, t),
        });
        lam
    }

    /// One step with sources at the midpoint time and Dirichlet data at the
    /// new time.
    pub fn advance(&self, state: &State, data: &dyn ProblemData) -> Result<State, SolveError> {
        let loads = data.has_sources().then(|| self.loads(data, state.t + 0.5 * self.dt));
        let ess = self.essential_traces(data, state.t + self.dt);
        self.advance_with(state, loads.as_deref(), &ess)
    }

    /// One step with explicit element loads `F` (element-major, not scaled
    /// by `dt`) and essential trace values at the new level.
    pub fn advance_with(&self, state: &State, loads: Option<&[f64]>, lam_essential: &[f64]) -> Result<State, SolveError> {
        let n = self.layout().n_interior();
        let ne = self.num_elements();
        let mut y = Vec::with_capacity(ne * n);
        let mut condensed = Vec::with_capacity(ne);
        for (e, ce) in self.condensed.elements.iter().enumerate() {
            let u = self.element(&state.interior, e);
            let mut b = matvec(&self.mass[e], u);
            b.iter_mut().for_each(|v| *v *= 2.0);
            if let Some(f) = loads {
                for (bi, fi) in b.iter_mut().zip(&f[e * n..(e + 1) * n]) {
                    *bi += self.dt * fi;
                }
            }
            let mut g = matvec(&ce.w, &b);
            g.iter_mut().for_each(|v| *v = -*v);
            matvec_add(&ce.s, &self.local_traces(&state.traces, e), -1.0, &mut g);
            condensed.push(g);
            y.extend(matvec(&ce.inv, &b));
        }
        let traces = self.condensed.solve_traces(&condensed, lam_essential)?;
        let mut interior = y;
        for (e, ce) in self.condensed.elements.iter().enumerate() {
            let sum: Vec<f64> = self
                .dofmap
                .element_dofs(e)
                .iter()
                .map(|&g| state.traces[g] + traces[g])
                .collect();
            let u = &mut interior[e * n..(e + 1) * n];
            for (ui, u0) in u.iter_mut().zip(self.element(&state.interior, e)) {
                *ui -= u0;
            }
            matvec_add(&ce.x, &sum, -1.0, u);
        }
        Ok(State { t: state.t + self.dt, interior, traces })
    }

    /// Advances `steps` times, calling `observer` on the initial state and
    /// after every step.
    pub fn run(
        &self,
        mut state: State,
        steps: usize,
        data: &dyn ProblemData,
        mut observer: impl FnMut(usize, &State),
    ) -> Result<State, SolverError> {
        observer(0, &state);
        for i in 1..=steps {
            state = self.advance(&state, data).map_err(solve_err(Stage::Step(i)))?;
            observer(i, &state);
        }
        Ok(state)
    }

    /// `X^2 = U^T M U`.
    pub fn energy(&self, state: &State) -> f64 {
        (0..self.num_elements())
            .map(|e| {
                let u = self.element(&state.interior, e);
                quad_form(&self.mass[e], u, u)
            })
            .sum()
    }

    /// `Z^2` of interior values `u` and traces `lam`: drag plus both
    /// stabilization penalties.
    pub fn dissipation(&self, u: &[f64], lam: &[f64]) -> f64 {
        (0..self.num_elements())
            .map(|e| self.blocks(e).dissipation(self.element(u, e), &self.local_traces(lam, e)))
            .sum()
    }

    /// `Z^2` at the midpoint of two consecutive states.
    pub fn step_dissipation(&self, a: &State, b: &State) -> f64 {
        let um: Vec<f64> = a.interior.iter().zip(&b.interior).map(|(x, y)| 0.5 * (x + y)).collect();
        let lm: Vec<f64> = a.traces.iter().zip(&b.traces).map(|(x, y)| 0.5 * (x + y)).collect();
        self.dissipation(&um, &lm)
    }

    /// Global trace-row residual `sum_K (H U + J Lambda)` on free unknowns,
    /// split into the solid-velocity and pressure rows (max norm).
    pub fn trace_residual(&self, state: &State) -> [f64; 2] {
        let mut r = vec![0.0; self.dofmap.len()];
        for e in 0..self.num_elements() {
            let b = self.blocks(e);
            let mut re = matvec(&b.h_matrix(), self.element(&state.interior, e));
            matvec_add(&b.j_matrix(), &self.local_traces(&state.traces, e), 1.0, &mut re);
            for (a, &g) in self.dofmap.element_dofs(e).iter().enumerate() {
                r[g] += re[a];
            }
        }
        let pf = self.dofmap.per_face();
        let mut out = [0.0f64; 2];
        for (g, v) in r.iter().enumerate() {
            if self.dofmap.free_index(g).is_some() {
                let slot = usize::from(self.dofmap.fields[(g % pf) / self.dofmap.ne] == TraceField::Pressure);
                out[slot] = out[slot].max(v.abs());
            }
        }
        out
    }

    /// Traces satisfying the trace rows for given interior values:
    /// `Lambda_free = -J_ff^{-1} (H U + J_fe Lambda_e)`, solved face by face.
    /// `None` if some face block is singular (for instance with zero
    /// stabilization).
    pub fn compatible_traces(&self, interior: &[f64], lam_essential: &[f64]) -> Option<Vec<f64>> {
        let dm = &self.dofmap;
        let pf = dm.per_face();
        let mut lam: Vec<f64> = (0..dm.len()).map(|g| if dm.essential[g] { lam_essential[g] } else { 0.0 }).collect();
        let mut rhs = vec![0.0; dm.len()];
        let mut jface = vec![Mat::<f64>::zeros(pf, pf); dm.num_faces];
        for e in 0..self.num_elements() {
            let b = self.blocks(e);
            let j = b.j_matrix();
            let mut re = matvec(&b.h_matrix(), self.element(interior, e));
            matvec_add(&j, &self.local_traces(&lam, e), 1.0, &mut re);
            for (lf, &f) in self.mesh.element_faces[e].iter().enumerate() {
                for a in 0..pf {
                    rhs[f * pf + a] += re[lf * pf + a];
                    for c in 0..pf {
                        jface[f][(a, c)] += j[(lf * pf + a, lf * pf + c)];
                    }
                }
            }
        }
        for (f, jf) in jface.iter().enumerate() {
            let free: Vec<usize> = (0..pf).filter(|&a| !dm.essential[f * pf + a]).collect();
            if free.is_empty() {
                continue;
            }
            let jff = Mat::from_fn(free.len(), free.len(), |i, j| jf[(free[i], free[j])]);
            let inv = inverse(&jff)?;
            let r: Vec<f64> = free.iter().map(|&a| rhs[f * pf + a]).collect();
            let x = matvec(&inv, &r);
            for (i, &a) in free.iter().enumerate() {
                lam[f * pf + a] = -x[i];
            }
        }
        Some(lam)
    }

    /// Elementwise `L2` projection of the initial fields, with facewise
    /// projections of `vs` and `p` as traces. Does not satisfy the trace
    /// rows in general.
    pub fn init_interpolate(&self, data: &dyn InitialData, t0: f64) -> State {
        let l = self.layout();
        let n = l.n_interior();
        let mut state = self.zero_state(t0);
        for e in 0..self.num_elements() {
            let kx = self.disc.kernel(&self.mesh, e);
            let u = &mut state.interior[e * n..(e + 1) * n];
            let mut diag = vec![0.0; l.nk1];
            for q in 0..kx.len() {
                let (x, w, v) = (kx.points[q], kx.weights[q], kx.values(q));
                let (s, vs, vf, p) = (data.stress(x), data.solid_velocity(x), data.fluid_velocity(x), data.pressure(x));
                for i in 0..l.nk1 {
                    diag[i] += w * v[i] * v[i];
                    for d in 0..2 {
                        u[l.vs(d, i)] += w * vs[d] * v[i];
                    }
                }
                for i in 0..l.nk {
                    for c in 0..3 {
                        u[l.sigma(c, i)] += w * s[c] * v[i];
                    }
                    for d in 0..2 {
                        u[l.vf(d, i)] += w * vf[d] * v[i];
                    }
                    u[l.p(i)] += w * p * v[i];
                }
            }
            for i in 0..l.nk1 {
                for d in 0..2 {
                    u[l.vs(d, i)] /= diag[i];
                }
            }
            for i in 0..l.nk {
                for c in 0..3 {
                    u[l.sigma(c, i)] /= diag[i];
                }
                for d in 0..2 {
                    u[l.vf(d, i)] /= diag[i];
                }
                u[l.p(i)] /= diag[i];
            }
        }
        let mut all = self.dofmap.clone();
        all.essential.iter_mut().for_each(|v| *v = true);
        project_boundary(&self.mesh, &all, 2 * self.disc.k() + 6, &mut state.traces, |x, field| match field {
            TraceField::VelocityX => data.solid_velocity(x)[0],
            TraceField::VelocityY => data.solid_velocity(x)[1],
            TraceField::Pressure => data.pressure(x),
        });
        state
    }

    /// Compatible initial data from the two static HDG problems (fluid:
    /// `vf, p, phat`; solid: `sigma, vs, vhat`). Essential traces take the
    /// facewise projections of the initial `vs` and `p`.
    pub fn init_elliptic(&self, data: &dyn InitialData, t0: f64) -> Result<State, SolverError> {
        let l = self.layout();
        let n = l.n_interior();
        let ne = l.ne;
        let mut state = self.zero_state(t0);
        let order = 2 * self.disc.k() + 6;

        // fluid
        let fdm = DofMap::with_fields(&self.mesh, self.disc.k(), &[TraceField::Pressure]);
        let fcols: Vec<usize> = (0..3).flat_map(|lf| (0..ne).map(move |m| l.phat(lf, m))).collect();
        let mut fri = Vec::with_capacity(self.num_elements());
        let fsys = CondensedSystem::from_fn(&fdm, |e| {
            let b = self.blocks(e);
            fri.push(self.fluid_rhs(e, data));
            fluid_system(&b, &fcols)
        })
        .map_err(solve_err(Stage::InitFluid))?;
        let mut fess = vec![0.0; fdm.len()];
        project_boundary(&self.mesh, &fdm, order, &mut fess, |x, _| data.pressure(x));
        let frb: Vec<Vec<f64>> = (0..self.num_elements()).map(|_| vec![0.0; 3 * ne]).collect();
        let (fu, flam) = fsys.solve(&fri, &frb, &fess).map_err(solve_err(Stage::InitFluid))?;

        // solid
        let sdm = DofMap::with_fields(&self.mesh, self.disc.k(), &[TraceField::VelocityX, TraceField::VelocityY]);
        let scols: Vec<usize> = (0..3).flat_map(|lf| (0..2).flat_map(move |d| (0..ne).map(move |m| l.vhat(lf, d, m)))).collect();
        let mut sri = Vec::with_capacity(self.num_elements());
        let ssys = CondensedSystem::from_fn(&sdm, |e| {
            let b = self.blocks(e);
            sri.push(self.solid_rhs(e, data));
            solid_system(&b, &scols)
        })
        .map_err(solve_err(Stage::InitSolid))?;
        let mut sess = vec![0.0; sdm.len()];
        project_boundary(&self.mesh, &sdm, order, &mut sess, |x, field| {
            data.solid_velocity(x)[usize::from(field == TraceField::VelocityY)]
        });
        let srb: Vec<Vec<f64>> = (0..self.num_elements()).map(|_| vec![0.0; 6 * ne]).collect();
        let (su, slam) = ssys.solve(&sri, &srb, &sess).map_err(solve_err(Stage::InitSolid))?;

        let nf = 3 * l.nk;
        for e in 0..self.num_elements() {
            let u = &mut state.interior[e * n..(e + 1) * n];
            u[l.vf_start()..].copy_from_slice(&fu[e]);
            u[..l.vs_start()].copy_from_slice(&su[e][..nf]);
            u[l.vs_start()..l.vf_start()].copy_from_slice(&su[e][nf..]);
        }
        for f in 0..self.dofmap.num_faces {
            for m in 0..ne {
                state.traces[self.dofmap.global(f, 2, m)] = flam[fdm.global(f, 0, m)];
                for d in 0..2 {
                    state.traces[self.dofmap.global(f, d, m)] = slam[sdm.global(f, d, m)];
                }
            }
        }
        Ok(state)
    }

    /// `(vf0, wf) - (p0, div wf) + <p0, wf . n>` and `(div vf0, q)`.
    fn fluid_rhs(&self, e: usize, data: &dyn InitialData) -> Vec<f64> {
        let l = self.layout();
        let nk = l.nk;
        let kx = self.disc.kernel(&self.mesh, e);
        let mut r = vec![0.0; 3 * nk];
        for q in 0..kx.len() {
            let (x, w, v, g) = (kx.points[q], kx.weights[q], kx.values(q), kx.grads(q));
            let (vf, p, dv) = (data.fluid_velocity(x), data.pressure(x), data.div_fluid_velocity(x));
            for i in 0..nk {
                for d in 0..2 {
                    r[d * nk + i] += w * (vf[d] * v[i] - p * g[i][d]);
                }
                r[2 * nk + i] += w * dv * v[i];
            }
        }
        for fk in &kx.faces {
            for q in 0..fk.len() {
                let (w, v) = (fk.weights[q], fk.values(q));
                let p = data.pressure(fk.points[q]);
                for i in 0..nk {
                    for d in 0..2 {
                        r[d * nk + i] += w * p * fk.normal[d] * v[i];
                    }
                }
            }
        }
        r
    }

    /// `(A sigma0, r) + (div r, vs0) - <vs0, r n>` and `-(div sigma0, ws)`.
    fn solid_rhs(&self, e: usize, data: &dyn InitialData) -> Vec<f64> {
        let l = self.layout();
        let (nk, nk1) = (l.nk, l.nk1);
        let a = &self.materials.get(e).a;
        let kx = self.disc.kernel(&self.mesh, e);
        let mut r = vec![0.0; 3 * nk + 2 * nk1];
        for q in 0..kx.len() {
            let (x, w, v, g) = (kx.points[q], kx.weights[q], kx.values(q), kx.grads(q));
            let (s, vs, ds) = (data.stress(x), data.solid_velocity(x), data.div_stress(x));
            let as_ = crate::materials::matvec(a, &s);
            for i in 0..nk {
                for c in 0..3 {
                    let mut div = 0.0;
                    for (d, slot) in DIV_VOIGT[c].iter().enumerate() {
                        if let Some(sl) = slot {
                            div += g[i][*sl] * vs[d];
                        }
                    }
                    r[c * nk + i] += w * (as_[c] * v[i] + div);
                }
            }
            for i in 0..nk1 {
                for d in 0..2 {
                    r[3 * nk + d * nk1 + i] -= w * ds[d] * v[i];
                }
            }
        }
        for fk in &kx.faces {
            for q in 0..fk.len() {
                let (w, v) = (fk.weights[q], fk.values(q));
                let vs = data.solid_velocity(fk.points[q]);
                for c in 0..3 {
                    let rn = voigt_normal(c, 0, fk.normal) * vs[0] + voigt_normal(c, 1, fk.normal) * vs[1];
                    for i in 0..nk {
                        r[c * nk + i] -= w * rn * v[i];
                    }
                }
            }
        }
        r
    }
}

/// Values of all fields from element coefficients `u` and basis values
/// `phi` (degree `k + 1`).
pub fn point_values(l: Layout, u: &[f64], phi: &[f64]) -> PointValues {
    let mut out = [0.0; 8];
    for i in 0..l.nk {
        for c in 0..3 {
            out[c] += u[l.sigma(c, i)] * phi[i];
        }
        for d in 0..2 {
            out[5 + d] += u[l.vf(d, i)] * phi[i];
        }
        out[7] += u[l.p(i)] * phi[i];
    }
    for i in 0..l.nk1 {
        for d in 0..2 {
            out[3 + d] += u[l.vs(d, i)] * phi[i];
        }
    }
    out
}

fn select_cols(a: &Mat<f64>, cols: &[usize]) -> Mat<f64> {
    Mat::from_fn(a.nrows(), cols.len(), |i, j| a[(i, cols[j])])
}

fn select_square(a: &Mat<f64>, idx: &[usize]) -> Mat<f64> {
    Mat::from_fn(idx.len(), idx.len(), |i, j| a[(idx[i], idx[j])])
}

/// Static fluid problem on `(vf, p | phat)`.
fn fluid_system(b: &LocalBlocks, cols: &[usize]) -> ElementSystem {
    let nk = b.layout.nk;
    let n = 3 * nk;
    let mk = Mat::from_fn(nk, nk, |i, j| b.mass[(i, j)]);
    let mut a_ii = Mat::zeros(n, n);
    for d in 0..2 {
        add_block(&mut a_ii, d * nk, d * nk, &mk, 1.0);
    }
    add_block(&mut a_ii, 0, 2 * nk, &b.d_grad_p, -1.0);
    add_block_t(&mut a_ii, 2 * nk, 0, &b.d_grad_p, 1.0);
    add_block(&mut a_ii, 2 * nk, 2 * nk, &b.f_pp, 1.0);
    let t = select_cols(&b.t_vfn, cols);
    let fph = select_cols(&b.f_ph, cols);
    let nb = cols.len();
    let mut a_ib = Mat::zeros(n, nb);
    add_block(&mut a_ib, 0, 0, &t, 1.0);
    add_block(&mut a_ib, 2 * nk, 0, &fph, -1.0);
    let mut a_bi = Mat::zeros(nb, n);
    add_block_t(&mut a_bi, 0, 0, &t, 1.0);
    add_block_t(&mut a_bi, 0, 2 * nk, &fph, 1.0);
    let a_bb = crate::dense::scaled(&select_square(&b.f_hh, cols), -1.0);
    ElementSystem { a_ii, a_ib, a_bi, a_bb }
}

/// Static solid problem on `(sigma, vs | vhat)`.
fn solid_system(b: &LocalBlocks, cols: &[usize]) -> ElementSystem {
    let (nk, nk1) = (b.layout.nk, b.layout.nk1);
    let ns = 3 * nk;
    let n = ns + 2 * nk1;
    let mut a_ii = Mat::zeros(n, n);
    add_block(&mut a_ii, 0, 0, &b.m_ss, 1.0);
    add_block(&mut a_ii, 0, ns, &b.d_div_sigma, 1.0);
    add_block_t(&mut a_ii, ns, 0, &b.d_div_sigma, -1.0);
    add_block(&mut a_ii, ns, ns, &b.s_ss, 1.0);
    let t = select_cols(&b.t_sn, cols);
    let ssh = select_cols(&b.s_sh, cols);
    let nb = cols.len();
    let mut a_ib = Mat::zeros(n, nb);
    add_block(&mut a_ib, 0, 0, &t, -1.0);
    add_block(&mut a_ib, ns, 0, &ssh, -1.0);
    let mut a_bi = Mat::zeros(nb, n);
    add_block_t(&mut a_bi, 0, 0, &t, 1.0);
    add_block_t(&mut a_bi, 0, ns, &ssh, -1.0);
    let a_bb = select_square(&b.s_hh, cols);
    ElementSystem { a_ii, a_ib, a_bi, a_bb }
}

/// Writes facewise `L2` projections of `value(x, field)` into the essential
/// entries of `lam` on boundary faces.
fn project_boundary(mesh: &Mesh, dm: &DofMap, order: usize, lam: &mut [f64], mut value: impl FnMut([f64; 2], TraceField) -> f64) {
    let rule = edge_rule(order.min(crate::fe::MAX_ORDER)).expect("edge rule within supported order");
    let basis = crate::fe::EdgeBasis::new(dm.ne - 1);
    let mut mu = vec![0.0; dm.ne];
    for (f, face) in mesh.faces.iter().enumerate() {
        if !face.is_boundary() {
            continue;
        }
        let (a, b) = (mesh.vertices[face.vertices[0]], mesh.vertices[face.vertices[1]]);
        for (j, &field) in dm.fields.iter().enumerate() {
            if !dm.essential[dm.global(f, j, 0)] {
                continue;
            }
            let mut c = vec![0.0; dm.ne];
            for (p, w) in rule.points.iter().zip(&rule.weights) {
                let s = p[0];
                basis.eval(s, &mut mu);
                let x = [a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])];
                let v = value(x, field);
                for m in 0..dm.ne {
                    c[m] += w * v * mu[m];
                }
            }
            for m in 0..dm.ne {
                lam[dm.global(f, j, m)] = c[m];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::MaterialParams;
    use crate::mesh::{BoundaryRule, BoundarySpec, BoundaryTags, ElasticBc, FlowBc, Side};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn solver(n: usize, k: usize, dt: f64) -> Solver {
        let spec = BoundarySpec {
            default: BoundaryTags::DIRICHLET,
            rules: vec![BoundaryRule { side: Side::Top, elastic: Some(ElasticBc::Traction), flow: Some(FlowBc::Flux) }],
        };
        solver_with(n, k, dt, &spec)
    }

    fn solver_with(n: usize, k: usize, dt: f64, spec: &BoundarySpec) -> Solver {
        let mesh = Mesh::structured_rect([0.0, 1.0], [0.0, 1.0], n, n, spec).unwrap();
        let mat = MaterialField::uniform(MaterialParams::example1(3.0, 0.3).unwrap(), mesh.num_elements());
        let stab = Stabilization::defaults(&mesh, 1.0, 1.0).unwrap();
        Solver::new(mesh, mat, k, stab, dt).unwrap()
    }

    fn random_state(s: &Solver, seed: u64) -> State {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut st = s.zero_state(0.0);
        st.interior.iter_mut().for_each(|v| *v = rng.gen_range(-1.0..1.0));
        st.traces = s.compatible_traces(&st.interior, &vec![0.0; s.dofmap().len()]).unwrap();
        st
    }

    #[test]
    fn midpoint_examples() {
        assert_eq!(midpoint_ops(0.0, 2.0, 1.0), (2.0, 1.0));
        assert_eq!(midpoint_ops(1.0, 3.0, 0.5), (4.0, 2.0));
        assert_eq!(midpoint_ops(7.0, 7.0, 0.1), (0.0, 7.0));
    }

    #[test]
    fn covering_grid_hits_final_time() {
        let g = TimeGrid::covering(1.0, 0.3).unwrap();
        assert_eq!(g.steps, 4);
        assert!((g.final_time() - 1.0).abs() < 1e-15);
        assert_eq!(TimeGrid::covering(1.0, 0.25).unwrap().steps, 4);
        assert!(TimeGrid::new(0.0, 3).is_err());
    }

    #[test]
    fn zero_state_is_fixed() {
        let s = solver(2, 1, 0.1);
        let z = s.zero_state(0.0);
        let next = s.advance(&z, &Homogeneous).unwrap();
        assert!(next.interior.iter().chain(&next.traces).all(|&v| v == 0.0));
        assert!((next.t - 0.1).abs() < 1e-15);
    }

    #[test]
    fn one_step_energy_identity() {
        for k in [1, 2] {
            let s = solver(3, k, 0.05);
            let u0 = random_state(&s, 3);
            let u1 = s.advance(&u0, &Homogeneous).unwrap();
            let (x0, x1) = (s.energy(&u0), s.energy(&u1));
            let z = s.step_dissipation(&u0, &u1);
            assert!(z > 0.0);
            assert!((x1 + 2.0 * s.dt() * z - x0).abs() <= 1e-10 * x0, "k={k}");
        }
    }

    #[test]
    fn equilibrium_is_a_fixed_point() {
        let s = solver(2, 1, 0.1);
        let st = random_state(&s, 11);
        let n = s.layout().n_interior();
        let mut loads = vec![0.0; st.interior.len()];
        for e in 0..s.num_elements() {
            let b = s.blocks(e);
            let lam: Vec<f64> = s.dofmap().element_dofs(e).iter().map(|&g| st.traces[g]).collect();
            let f = &mut loads[e * n..(e + 1) * n];
            matvec_add(&b.stiffness_matrix(), s.element(&st.interior, e), 1.0, f);
            matvec_add(&b.g_matrix(), &lam, 1.0, f);
        }
        let next = s.advance_with(&st, Some(&loads), &vec![0.0; s.dofmap().len()]).unwrap();
        let diff = next.interior.iter().zip(&st.interior).chain(next.traces.iter().zip(&st.traces)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-11, "{diff}");
    }

    #[test]
    fn compatible_traces_zero_the_trace_rows() {
        let s = solver(3, 2, 0.1);
        let st = random_state(&s, 5);
        let [a, b] = s.trace_residual(&st);
        assert!(a < 1e-12 && b < 1e-12);
        let next = s.advance(&st, &Homogeneous).unwrap();
        let [a, b] = s.trace_residual(&next);
        assert!(a < 1e-11 && b < 1e-11, "{a} {b}");
    }

    #[test]
    fn ten_steps_one_factorization() {
        let s = solver(2, 1, 0.1);
        let st = random_state(&s, 1);
        let out = s.run(st, 10, &Homogeneous, |_, _| {}).unwrap();
        assert!((out.t - 1.0).abs() < 1e-12);
        assert_eq!(s.condensed().factorizations(), 1);
    }

    #[test]
    fn zero_initial_data_gives_zero_state() {
        let s = solver(2, 2, 0.1);
        let st = s.init_elliptic(&ZeroInitial, 0.0).unwrap();
        assert!(st.interior.iter().chain(&st.traces).all(|&v| v == 0.0));
    }

    struct Affine;
    impl InitialData for Affine {
        fn stress(&self, x: [f64; 2]) -> [f64; 3] {
            [1.0 + x[0], 2.0 - x[1], 0.5 * x[0] + 0.25 * x[1]]
        }
        fn div_stress(&self, _: [f64; 2]) -> [f64; 2] {
            [1.0 + 0.25, 0.5 - 1.0]
        }
        fn solid_velocity(&self, x: [f64; 2]) -> [f64; 2] {
            [x[0] * x[1], 1.0 - x[0]]
        }
        fn fluid_velocity(&self, x: [f64; 2]) -> [f64; 2] {
            [x[1], 2.0 * x[0]]
        }
        fn div_fluid_velocity(&self, _: [f64; 2]) -> f64 {
            0.0
        }
        fn pressure(&self, x: [f64; 2]) -> f64 {
            3.0 * x[0] - x[1]
        }
    }

    #[test]
    fn elliptic_init_is_compatible_and_reproduces_discrete_fields() {
        let s = solver_with(3, 1, 0.1, &BoundarySpec::default());
        let st = s.init_elliptic(&Affine, 0.0).unwrap();
        let [a, b] = s.trace_residual(&st);
        assert!(a < 1e-10 && b < 1e-10, "{a} {b}");
        let interp = s.init_interpolate(&Affine, 0.0);
        let diff = st.interior.iter().zip(&interp.interior).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-10, "{diff}");
    }
}
