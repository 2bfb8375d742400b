//! Global trace numbering, static condensation, and the uncondensed
//! (monolithic) system used as an oracle.

use alloc::vec;
use alloc::vec::Vec;
use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Lu;
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;

use crate::dense::{inverse, matvec, matvec_add, ruiz_scaling};
use crate::hdg::ElementSystem;
use crate::mesh::{ElasticBc, FlowBc, Mesh};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SolveError {
    #[error("interior block of element {0} is singular")]
    SingularElement(usize),
    #[error("sparse factorization failed: global system is singular or ill-posed")]
    Factorization,
    #[error("dimension mismatch: {0}")]
    Dimension(&'static str),
}

/// Scalar trace fields stored on each face, in local order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceField {
    VelocityX,
    VelocityY,
    Pressure,
}

/// Global numbering of trace unknowns. Face `f` owns the contiguous range
/// `f * per_face .. (f + 1) * per_face`, field-major inside the face.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    pub ne: usize,
    pub fields: Vec<TraceField>,
    pub num_faces: usize,
    pub essential: Vec<bool>,
    free_index: Vec<usize>,
    n_free: usize,
    element_dofs: Vec<Vec<usize>>,
}

impl DofMap {
    /// Solid-velocity and pressure traces of degree `k`.
    pub fn new(mesh: &Mesh, k: usize) -> Self {
        Self::with_fields(mesh, k, &[TraceField::VelocityX, TraceField::VelocityY, TraceField::Pressure])
    }

    pub fn with_fields(mesh: &Mesh, k: usize, fields: &[TraceField]) -> Self {
        let ne = k + 1;
        let per_face = fields.len() * ne;
        let num_faces = mesh.num_faces();
        let mut essential = vec![false; per_face * num_faces];
        for (f, face) in mesh.faces.iter().enumerate() {
            if let Some(tags) = face.boundary {
                for (j, field) in fields.iter().enumerate() {
                    let ess = match field {
                        TraceField::VelocityX | TraceField::VelocityY => tags.elastic == ElasticBc::Velocity,
                        TraceField::Pressure => tags.flow == FlowBc::Pressure,
                    };
                    for m in 0..ne {
                        essential[f * per_face + j * ne + m] = ess;
                    }
                }
            }
        }
        let mut free_index = vec![usize::MAX; essential.len()];
        let mut n_free = 0;
        for (g, &e) in essential.iter().enumerate() {
            if !e {
                free_index[g] = n_free;
                n_free += 1;
            }
        }
        let element_dofs = mesh
            .element_faces
            .iter()
            .map(|faces| faces.iter().flat_map(|&f| (0..per_face).map(move |j| f * per_face + j)).collect())
            .collect();
        Self { ne, fields: fields.to_vec(), num_faces, essential, free_index, n_free, element_dofs }
    }

    pub fn per_face(&self) -> usize {
        self.fields.len() * self.ne
    }

    pub fn len(&self) -> usize {
        self.essential.len()
    }

    pub fn is_empty(&self) -> bool {
        self.essential.is_empty()
    }

    pub fn n_free(&self) -> usize {
        self.n_free
    }

    pub fn num_elements(&self) -> usize {
        self.element_dofs.len()
    }

    pub fn free_index(&self, g: usize) -> Option<usize> {
        let i = self.free_index[g];
        (i != usize::MAX).then_some(i)
    }

    /// Global trace indices of element `e`, in local trace order.
    pub fn element_dofs(&self, e: usize) -> &[usize] {
        &self.element_dofs[e]
    }

    pub fn global(&self, face: usize, field: usize, m: usize) -> usize {
        face * self.per_face() + field * self.ne + m
    }
}

/// Condensed data of one element.
#[derive(Debug, Clone)]
pub struct CondensedElement {
    /// `A_ii^{-1}`.
    pub inv: Mat<f64>,
    /// `A_ii^{-1} A_ib`.
    pub x: Mat<f64>,
    /// `A_bi A_ii^{-1}`.
    pub w: Mat<f64>,
    /// Schur complement `A_bb - A_bi A_ii^{-1} A_ib`.
    pub s: Mat<f64>,
}

struct SparseSolver {
    lu: Lu<usize, f64>,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
}

impl SparseSolver {
    /// Factorizes `diag(r) A diag(c)` with Ruiz scalings.
    fn new(n: usize, triplets: &[Triplet<usize, usize, f64>]) -> Result<Self, SolveError> {
        let mut a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, triplets).map_err(|_| SolveError::Dimension("triplets"))?;
        let entries: Vec<(usize, usize)> = a.triplet_iter().map(|t| (t.row, t.col)).collect();
        let (r, c) = {
            let vals = a.val();
            ruiz_scaling(n, n, |f| {
                for ((i, j), v) in entries.iter().zip(vals) {
                    if *v != 0.0 {
                        f(*i, *j, *v);
                    }
                }
            })
        };
        for ((i, j), v) in entries.iter().zip(a.val_mut()) {
            *v *= r[*i] * c[*j];
        }
        let lu = a.sp_lu().map_err(|_| SolveError::Factorization)?;
        Ok(Self { lu, row_scale: r, col_scale: c })
    }

    fn solve(&self, b: &[f64]) -> Result<Vec<f64>, SolveError> {
        let n = b.len();
        let mut rhs = Mat::from_fn(n, 1, |i, _| b[i] * self.row_scale[i]);
        self.lu.solve_in_place(rhs.as_mut());
        let x: Vec<f64> = (0..n).map(|i| rhs[(i, 0)] * self.col_scale[i]).collect();
        if x.iter().any(|v| !v.is_finite()) {
            return Err(SolveError::Factorization);
        }
        Ok(x)
    }
}

/// Statically condensed system: stored element eliminations and a factorized
/// global trace matrix over the free trace unknowns.
pub struct CondensedSystem {
    pub dofmap: DofMap,
    pub elements: Vec<CondensedElement>,
    triplets: Vec<Triplet<usize, usize, f64>>,
    solver: Option<SparseSolver>,
    factorizations: usize,
}

impl core::fmt::Debug for CondensedSystem {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("CondensedSystem")
            .field("n_free", &self.dofmap.n_free())
            .field("elements", &self.elements.len())
            .field("nnz", &self.triplets.len())
            .field("factorizations", &self.factorizations)
            .finish()
    }
}

/// Per-element contributions `S_K` scattered to free-free pairs.
fn scatter_schur(dofmap: &DofMap, elements: &[CondensedElement]) -> Vec<Triplet<usize, usize, f64>> {
    let mut triplets = Vec::new();
    for (e, ce) in elements.iter().enumerate() {
        let dofs = dofmap.element_dofs(e);
        for (a, &ga) in dofs.iter().enumerate() {
            let Some(ia) = dofmap.free_index(ga) else { continue };
            for (b, &gb) in dofs.iter().enumerate() {
                let Some(ib) = dofmap.free_index(gb) else { continue };
                let v = ce.s[(a, b)];
                if v != 0.0 {
                    triplets.push(Triplet::new(ia, ib, v));
                }
            }
        }
    }
    triplets
}

impl CondensedSystem {
    /// Eliminates interior unknowns element by element and factorizes the
    /// global trace matrix.
    pub fn new(systems: &[ElementSystem], dofmap: &DofMap) -> Result<Self, SolveError> {
        if systems.len() != dofmap.element_dofs.len() {
            return Err(SolveError::Dimension("element count differs from dofmap"));
        }
        Self::from_fn(dofmap, |e| systems[e].clone())
    }

    /// Like [`CondensedSystem::new`], building each element system on demand
    /// so only one is alive at a time.
    pub fn from_fn(dofmap: &DofMap, mut system: impl FnMut(usize) -> ElementSystem) -> Result<Self, SolveError> {
        let n = dofmap.element_dofs.len();
        let mut elements = Vec::with_capacity(n);
        for e in 0..n {
            let sys = system(e);
            if sys.n_trace() != dofmap.element_dofs(e).len() {
                return Err(SolveError::Dimension("element trace size differs from dofmap"));
            }
            let inv = inverse(&sys.a_ii).ok_or(SolveError::SingularElement(e))?;
            let x = &inv * &sys.a_ib;
            let w = &sys.a_bi * &inv;
            let s = &sys.a_bb - &sys.a_bi * &x;
            elements.push(CondensedElement { inv, x, w, s });
        }
        let triplets = scatter_schur(dofmap, &elements);
        let mut out = Self { dofmap: dofmap.clone(), elements, triplets, solver: None, factorizations: 0 };
        out.factorize()?;
        Ok(out)
    }

    fn factorize(&mut self) -> Result<(), SolveError> {
        let n = self.dofmap.n_free();
        self.solver = if n == 0 { None } else { Some(SparseSolver::new(n, &self.triplets)?) };
        self.factorizations += 1;
        Ok(())
    }

    /// Number of sparse factorizations performed so far.
    pub fn factorizations(&self) -> usize {
        self.factorizations
    }

    pub fn n_free(&self) -> usize {
        self.dofmap.n_free()
    }

    /// Global trace matrix entries `(row, col, value)` over free unknowns,
    /// duplicates not yet summed.
    pub fn trace_matrix_triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.triplets.iter().map(|t| (t.row, t.col, t.val))
    }

    /// Solves for all traces given, per element, the condensed trace
    /// right-hand side `g_K = r_b - A_bi A_ii^{-1} r_i`. Essential entries of
    /// `lam_essential` are imposed; other entries are ignored.
    pub fn solve_traces(&self, condensed: &[Vec<f64>], lam_essential: &[f64]) -> Result<Vec<f64>, SolveError> {
        let dm = &self.dofmap;
        if lam_essential.len() != dm.len() {
            return Err(SolveError::Dimension("essential trace vector"));
        }
        let mut lam: Vec<f64> = (0..dm.len()).map(|g| if dm.essential[g] { lam_essential[g] } else { 0.0 }).collect();
        let mut b = vec![0.0; dm.n_free()];
        let any_essential = lam.iter().any(|&v| v != 0.0);
        for (e, ce) in self.elements.iter().enumerate() {
            let dofs = dm.element_dofs(e);
            let mut g = condensed[e].clone();
            if any_essential {
                let le: Vec<f64> = dofs.iter().map(|&gd| lam[gd]).collect();
                if le.iter().any(|&v| v != 0.0) {
                    matvec_add(&ce.s, &le, -1.0, &mut g);
                }
            }
            for (a, &gd) in dofs.iter().enumerate() {
                if let Some(i) = dm.free_index(gd) {
                    b[i] += g[a];
                }
            }
        }
        if let Some(solver) = &self.solver {
            let x = solver.solve(&b)?;
            for (g, v) in lam.iter_mut().enumerate() {
                if let Some(i) = dm.free_index(g) {
                    *v = x[i];
                }
            }
        }
        Ok(lam)
    }

    /// Gathers element `e`'s traces from the global vector.
    pub fn local_traces(&self, e: usize, lam: &[f64]) -> Vec<f64> {
        self.dofmap.element_dofs(e).iter().map(|&g| lam[g]).collect()
    }

    /// Full solve of `[A_ii A_ib; A_bi A_bb] [U; L] = [r_i; r_b]` summed over
    /// elements, returning per-element interiors and the global traces.
    pub fn solve(&self, ri: &[Vec<f64>], rb: &[Vec<f64>], lam_essential: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<f64>), SolveError> {
        let condensed: Vec<Vec<f64>> = self
            .elements
            .iter()
            .enumerate()
            .map(|(e, ce)| {
                let mut g = rb[e].clone();
                matvec_add(&ce.w, &ri[e], -1.0, &mut g);
                g
            })
            .collect();
        let lam = self.solve_traces(&condensed, lam_essential)?;
        let u = self
            .elements
            .iter()
            .enumerate()
            .map(|(e, ce)| {
                let mut u = matvec(&ce.inv, &ri[e]);
                matvec_add(&ce.x, &self.local_traces(e, &lam), -1.0, &mut u);
                u
            })
            .collect();
        Ok((u, lam))
    }
}

/// Uncondensed sparse system over all interior unknowns (element-major)
/// followed by the free traces.
pub struct MonolithicSystem {
    pub n_interior_total: usize,
    offsets: Vec<usize>,
    dofmap: DofMap,
    pub triplets: Vec<Triplet<usize, usize, f64>>,
    /// `A_bi` and `A_bb` are needed again to move essential data right.
    couplings: Vec<(Mat<f64>, Mat<f64>)>,
}

impl MonolithicSystem {
    pub fn dim(&self) -> usize {
        self.n_interior_total + self.dofmap.n_free()
    }

    /// Solves with the same right-hand side convention as
    /// [`CondensedSystem::solve`].
    pub fn solve(&self, ri: &[Vec<f64>], rb: &[Vec<f64>], lam_essential: &[f64]) -> Result<(Vec<Vec<f64>>, Vec<f64>), SolveError> {
        let dm = &self.dofmap;
        let n = self.dim();
        let mut b = vec![0.0; n];
        let lam_e: Vec<f64> = (0..dm.len()).map(|g| if dm.essential[g] { lam_essential[g] } else { 0.0 }).collect();
        for (e, (a_ib, a_bb)) in self.couplings.iter().enumerate() {
            let dofs = dm.element_dofs(e);
            let le: Vec<f64> = dofs.iter().map(|&g| lam_e[g]).collect();
            let mut r_i = ri[e].clone();
            matvec_add(a_ib, &le, -1.0, &mut r_i);
            b[self.offsets[e]..self.offsets[e] + r_i.len()].copy_from_slice(&r_i);
            let mut r_b = rb[e].clone();
            matvec_add(a_bb, &le, -1.0, &mut r_b);
            // the A_bi U part stays on the left
            for (a, &g) in dofs.iter().enumerate() {
                if let Some(i) = dm.free_index(g) {
                    b[self.n_interior_total + i] += r_b[a];
                }
            }
        }
        let solver = SparseSolver::new(n, &self.triplets)?;
        let x = solver.solve(&b)?;
        let u = (0..self.offsets.len() - 1).map(|e| x[self.offsets[e]..self.offsets[e + 1]].to_vec()).collect();
        let mut lam = lam_e;
        for (g, v) in lam.iter_mut().enumerate() {
            if let Some(i) = dm.free_index(g) {
                *v = x[self.n_interior_total + i];
            }
        }
        Ok((u, lam))
    }
}

/// Assembles the uncondensed system.
pub fn assemble_monolithic(systems: &[ElementSystem], dofmap: &DofMap) -> MonolithicSystem {
    let mut offsets = Vec::with_capacity(systems.len() + 1);
    let mut acc = 0;
    for s in systems {
        offsets.push(acc);
        acc += s.n_interior();
    }
    offsets.push(acc);
    let ni = acc;
    let mut triplets = Vec::new();
    let mut couplings = Vec::with_capacity(systems.len());
    for (e, s) in systems.iter().enumerate() {
        let o = offsets[e];
        let dofs = dofmap.element_dofs(e);
        for j in 0..s.n_interior() {
            for i in 0..s.n_interior() {
                let v = s.a_ii[(i, j)];
                if v != 0.0 {
                    triplets.push(Triplet::new(o + i, o + j, v));
                }
            }
        }
        for (a, &g) in dofs.iter().enumerate() {
            let Some(fa) = dofmap.free_index(g) else { continue };
            for i in 0..s.n_interior() {
                let v = s.a_ib[(i, a)];
                if v != 0.0 {
                    triplets.push(Triplet::new(o + i, ni + fa, v));
                }
                let v = s.a_bi[(a, i)];
                if v != 0.0 {
                    triplets.push(Triplet::new(ni + fa, o + i, v));
                }
            }
            for (b, &gb) in dofs.iter().enumerate() {
                let Some(fb) = dofmap.free_index(gb) else { continue };
                let v = s.a_bb[(a, b)];
                if v != 0.0 {
                    triplets.push(Triplet::new(ni + fa, ni + fb, v));
                }
            }
        }
        couplings.push((s.a_ib.clone(), s.a_bb.clone()));
    }
    MonolithicSystem { n_interior_total: ni, offsets, dofmap: dofmap.clone(), triplets, couplings }
}

/// Globally coupled unknowns per element of a degree-`k` DG method with all
/// eight scalar fields in `P_k`.
pub fn dg_volume_dofs_per_element(k: usize) -> usize {
    8 * (k + 1) * (k + 2) / 2
}

/// Trace unknowns per face of the HDG method.
pub fn hdg_trace_dofs_per_face(k: usize) -> usize {
    3 * (k + 1)
}

/// Relative reduction of the global system size, `1 - HDG / DG`, with
/// `faces_per_element` faces per element.
pub fn dof_reduction(k: usize, faces_per_element: f64) -> f64 {
    1.0 - faces_per_element * hdg_trace_dofs_per_face(k) as f64 / dg_volume_dofs_per_element(k) as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoundaryRule, BoundarySpec, BoundaryTags, Side};

    fn square(n: usize) -> Mesh {
        Mesh::structured_rect([0.0, 1.0], [0.0, 1.0], n, n, &BoundarySpec::default()).unwrap()
    }

    #[test]
    fn dofmap_counts() {
        let m = square(2);
        let d1 = DofMap::new(&m, 1);
        assert_eq!(d1.len(), 96);
        assert_eq!(DofMap::new(&m, 2).per_face(), 9);
        assert_eq!(DofMap::new(&m, 4).per_face(), 15);
        // 8 boundary faces fully essential
        assert_eq!(d1.n_free(), 96 - 8 * 6);
    }

    #[test]
    fn mixed_boundary_flags_only_matching_fields() {
        let spec = BoundarySpec {
            default: BoundaryTags::DIRICHLET,
            rules: vec![BoundaryRule { side: Side::Top, elastic: Some(ElasticBc::Traction), flow: None }],
        };
        let m = Mesh::structured_rect([0.0, 1.0], [0.0, 1.0], 2, 2, &spec).unwrap();
        let d = DofMap::new(&m, 1);
        let top: Vec<usize> = m
            .faces
            .iter()
            .enumerate()
            .filter(|(_, f)| f.boundary.map(|t| t.elastic == ElasticBc::Traction).unwrap_or(false))
            .map(|(i, _)| i)
            .collect();
        assert_eq!(top.len(), 2);
        for f in top {
            assert!(!d.essential[d.global(f, 0, 0)]);
            assert!(d.essential[d.global(f, 2, 1)]);
        }
    }

    #[test]
    fn table_reductions() {
        let expect = [(1, 24, 6, 62.5), (2, 48, 9, 71.875), (3, 80, 12, 77.5), (4, 120, 15, 81.25)];
        for (k, vol, face, pct) in expect {
            assert_eq!(dg_volume_dofs_per_element(k), vol);
            assert_eq!(hdg_trace_dofs_per_face(k), face);
            assert!((100.0 * dof_reduction(k, 1.5) - pct).abs() < 1e-12);
        }
    }
}

#[cfg(test)]
mod condensation_tests {
    use super::*;
    use crate::hdg::{cn_element_system, local_matrices, Discretization, Stabilization};
    use crate::materials::MaterialParams;
    use crate::mesh::{BoundaryRule, BoundarySpec, BoundaryTags, Side};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn systems(mesh: &Mesh, k: usize, dt: f64) -> Vec<ElementSystem> {
        let d = Discretization::new(k, 2 * k + 2).unwrap();
        let mat = MaterialParams::example1(3.0, 0.3).unwrap();
        let stab = Stabilization::defaults(mesh, 1.0, 1.0).unwrap();
        (0..mesh.num_elements())
            .map(|e| {
                let b = local_matrices(&d.kernel(mesh, e), &mat, d.layout, stab.tau_s[e], stab.tau_f[e]);
                cn_element_system(&b, dt).system
            })
            .collect()
    }

    fn mixed_spec() -> BoundarySpec {
        BoundarySpec {
            default: BoundaryTags::DIRICHLET,
            rules: vec![
                BoundaryRule { side: Side::Top, elastic: Some(ElasticBc::Traction), flow: Some(FlowBc::Flux) },
                BoundaryRule { side: Side::Right, elastic: None, flow: Some(FlowBc::Flux) },
            ],
        }
    }

    #[test]
    fn condensed_matches_monolithic() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for (n, k) in [(2, 1), (3, 2), (2, 3)] {
            let mesh = Mesh::structured_rect([0.0, 1.0], [0.0, 1.0], n, n, &mixed_spec()).unwrap();
            let sys = systems(&mesh, k, 0.05);
            let dm = DofMap::new(&mesh, k);
            let cs = CondensedSystem::new(&sys, &dm).unwrap();
            let mono = assemble_monolithic(&sys, &dm);
            let ri: Vec<Vec<f64>> = sys.iter().map(|s| (0..s.n_interior()).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let rb: Vec<Vec<f64>> = sys.iter().map(|s| (0..s.n_trace()).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
            let ess: Vec<f64> = (0..dm.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (u1, l1) = cs.solve(&ri, &rb, &ess).unwrap();
            let (u2, l2) = mono.solve(&ri, &rb, &ess).unwrap();
            let scale = l2.iter().chain(u2.iter().flatten()).fold(0.0f64, |m, v| m.max(v.abs()));
            let diff = l1
                .iter()
                .zip(&l2)
                .map(|(a, b)| (a - b).abs())
                .chain(u1.iter().flatten().zip(u2.iter().flatten()).map(|(a, b)| (a - b).abs()))
                .fold(0.0f64, f64::max);
            assert!(diff <= 1e-9 * scale.max(1.0), "n={n} k={k} diff={diff}");
            for g in 0..dm.len() {
                if dm.essential[g] {
                    assert_eq!(l1[g], ess[g]);
                }
            }
        }
    }

    #[test]
    fn single_element_all_essential_has_no_global_unknowns() {
        let mesh = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]], |_, _| BoundaryTags::DIRICHLET).unwrap();
        let sys = systems(&mesh, 1, 0.1);
        let dm = DofMap::new(&mesh, 1);
        let cs = CondensedSystem::new(&sys, &dm).unwrap();
        assert_eq!(cs.n_free(), 0);
        let (u, l) = cs.solve(&[vec![1.0; 30]], &[vec![0.0; 18]], &vec![0.0; 18]).unwrap();
        assert_eq!(l, vec![0.0; 18]);
        let direct = matvec(&inverse(&sys[0].a_ii).unwrap(), &[1.0; 30]);
        for (a, b) in u[0].iter().zip(&direct) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn interior_face_couples_two_elements_only() {
        let mesh = Mesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
            |_, _| BoundaryTags::DIRICHLET,
        )
        .unwrap();
        let sys = systems(&mesh, 1, 0.1);
        let dm = DofMap::new(&mesh, 1);
        let cs = CondensedSystem::new(&sys, &dm).unwrap();
        assert_eq!(cs.n_free(), 6);
        assert!(cs.trace_matrix_triplets().all(|(i, j, _)| i < 6 && j < 6));
        let nnz = cs.trace_matrix_triplets().count();
        assert!(nnz <= 2 * 36 && nnz > 0);
    }

    #[test]
    fn zero_data_gives_zero_solution_and_one_factorization() {
        let mesh = Mesh::structured_rect([0.0, 1.0], [0.0, 1.0], 3, 3, &mixed_spec()).unwrap();
        let sys = systems(&mesh, 2, 0.01);
        let dm = DofMap::new(&mesh, 2);
        let cs = CondensedSystem::new(&sys, &dm).unwrap();
        let ri: Vec<Vec<f64>> = sys.iter().map(|s| vec![0.0; s.n_interior()]).collect();
        let rb: Vec<Vec<f64>> = sys.iter().map(|s| vec![0.0; s.n_trace()]).collect();
        for _ in 0..10 {
            let (u, l) = cs.solve(&ri, &rb, &vec![0.0; dm.len()]).unwrap();
            assert!(l.iter().chain(u.iter().flatten()).all(|v| v.abs() <= 1e-14));
        }
        assert_eq!(cs.factorizations(), 1);
    }
}
