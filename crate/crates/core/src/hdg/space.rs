//! Local unknown layout and per-element quadrature kernels.

use alloc::vec::Vec;

use crate::fe::affine::{AffineMap, FACE_VERTICES};
use crate::fe::basis::{dim_pk, Domain, EdgeBasis, Tabulation, TriangleBasis};
use crate::fe::quadrature::{edge_rule, triangle_rule, OrderTooHigh};
use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum SpaceError {
    #[error("polynomial degree must be at least 1, got {0}")]
    DegreeTooLow(usize),
    #[error("polynomial degree {0} is not supported (max 8)")]
    DegreeTooHigh(usize),
    #[error("quadrature order {given} cannot integrate the degree-{k} forms exactly (need {needed})")]
    Underresolved { k: usize, given: usize, needed: usize },
    #[error(transparent)]
    Quadrature(#[from] OrderTooHigh),
}

/// Local numbering of one element's unknowns.
///
/// Interior block: `sigma_xx, sigma_yy, sigma_xy` (each `P_k`), then
/// `vs_x, vs_y` (`P_{k+1}`), `vf_x, vf_y` (`P_k`), `p` (`P_k`). Trace block:
/// for local face `f`, `vhat_x, vhat_y, phat` (each `P_k` on the edge).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub k: usize,
    pub nk: usize,
    pub nk1: usize,
    pub ne: usize,
}

impl Layout {
    pub fn new(k: usize) -> Self {
        Self { k, nk: dim_pk(k, Domain::Triangle), nk1: dim_pk(k + 1, Domain::Triangle), ne: dim_pk(k, Domain::Edge) }
    }

    pub fn sigma(&self, c: usize, i: usize) -> usize {
        c * self.nk + i
    }

    pub fn vs(&self, d: usize, i: usize) -> usize {
        3 * self.nk + d * self.nk1 + i
    }

    pub fn vf(&self, d: usize, i: usize) -> usize {
        3 * self.nk + 2 * self.nk1 + d * self.nk + i
    }

    pub fn p(&self, i: usize) -> usize {
        5 * self.nk + 2 * self.nk1 + i
    }

    pub fn sigma_start(&self) -> usize {
        0
    }

    pub fn vs_start(&self) -> usize {
        3 * self.nk
    }

    pub fn vf_start(&self) -> usize {
        3 * self.nk + 2 * self.nk1
    }

    pub fn p_start(&self) -> usize {
        5 * self.nk + 2 * self.nk1
    }

    pub fn n_interior(&self) -> usize {
        6 * self.nk + 2 * self.nk1
    }

    /// Trace unknowns per face.
    pub fn per_face(&self) -> usize {
        3 * self.ne
    }

    pub fn vhat(&self, face: usize, d: usize, m: usize) -> usize {
        face * self.per_face() + d * self.ne + m
    }

    pub fn phat(&self, face: usize, m: usize) -> usize {
        face * self.per_face() + 2 * self.ne + m
    }

    pub fn n_trace(&self) -> usize {
        3 * self.per_face()
    }
}

/// Reference-element data shared by all elements for a fixed degree and
/// quadrature order.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub layout: Layout,
    pub quad_order: usize,
    basis: TriangleBasis,
    edge: EdgeBasis,
    vol_points: Vec<[f64; 2]>,
    vol_weights: Vec<f64>,
    vol_tab: Tabulation,
    face_params: Vec<f64>,
    face_weights: Vec<f64>,
    /// Interior basis (degree `k + 1`) at the face points of each local face.
    face_tab: [Vec<f64>; 3],
    /// Edge basis at `s` and at `1 - s`.
    edge_tab: [Vec<f64>; 2],
}

impl Discretization {
    /// Smallest quadrature order that integrates every bilinear form
    /// exactly on affine elements.
    pub fn min_order(k: usize) -> usize {
        2 * k + 2
    }

    /// Default quadrature order, one above [`Self::min_order`] so that
    /// smooth source terms are integrated with a margin.
    pub fn default_order(k: usize) -> usize {
        2 * k + 3
    }

    pub fn new(k: usize, quad_order: usize) -> Result<Self, SpaceError> {
        if k == 0 {
            return Err(SpaceError::DegreeTooLow(k));
        }
        if k > 8 {
            return Err(SpaceError::DegreeTooHigh(k));
        }
        let needed = Self::min_order(k);
        if quad_order < needed {
            return Err(SpaceError::Underresolved { k, given: quad_order, needed });
        }
        let layout = Layout::new(k);
        let basis = TriangleBasis::new(k + 1);
        let edge = EdgeBasis::new(k);
        let vrule = triangle_rule(quad_order)?;
        let erule = edge_rule(quad_order)?;
        let vol_tab = basis.tabulate(&vrule.points);
        let face_params: Vec<f64> = erule.points.iter().map(|p| p[0]).collect();
        let ref_vertices = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]];
        let face_tab = core::array::from_fn(|lf| {
            let [a, b] = FACE_VERTICES[lf];
            let (pa, pb) = (ref_vertices[a], ref_vertices[b]);
            let mut out = alloc::vec![0.0; face_params.len() * layout.nk1];
            for (q, &s) in face_params.iter().enumerate() {
                let xi = [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])];
                basis.eval(xi, &mut out[q * layout.nk1..(q + 1) * layout.nk1]);
            }
            out
        });
        let edge_tab = core::array::from_fn(|flip| {
            let mut out = alloc::vec![0.0; face_params.len() * layout.ne];
            for (q, &s) in face_params.iter().enumerate() {
                let t = if flip == 1 { 1.0 - s } else { s };
                edge.eval(t, &mut out[q * layout.ne..(q + 1) * layout.ne]);
            }
            out
        });
        Ok(Self {
            layout,
            quad_order,
            basis,
            edge,
            vol_points: vrule.points,
            vol_weights: vrule.weights,
            vol_tab,
            face_params,
            face_weights: erule.weights,
            face_tab,
            edge_tab,
        })
    }

    pub fn k(&self) -> usize {
        self.layout.k
    }

    pub fn basis(&self) -> &TriangleBasis {
        &self.basis
    }

    pub fn edge_basis(&self) -> &EdgeBasis {
        &self.edge
    }

    /// Quadrature kernel of element `e`.
    pub fn kernel<'a>(&'a self, mesh: &Mesh, e: usize) -> ElementKernel<'a> {
        let map = mesh.affine_map(e);
        let tri = mesh.triangles[e];
        let nq = self.vol_weights.len();
        let nk1 = self.layout.nk1;
        let mut points = Vec::with_capacity(nq);
        let mut weights = Vec::with_capacity(nq);
        let mut grads = Vec::with_capacity(nq * nk1);
        for q in 0..nq {
            points.push(map.to_physical(self.vol_points[q]));
            weights.push(self.vol_weights[q] * map.det);
            for g in self.vol_tab.grads_at(q) {
                grads.push(map.push_gradient(*g));
            }
        }
        let faces = core::array::from_fn(|lf| {
            let [a, b] = FACE_VERTICES[lf];
            let flip = tri[a] > tri[b];
            let len = map.face_lengths[lf];
            let pa = mesh.vertices[tri[a]];
            let pb = mesh.vertices[tri[b]];
            FaceKernel {
                normal: map.normals[lf],
                length: len,
                flip,
                points: self
                    .face_params
                    .iter()
                    .map(|&s| [pa[0] + s * (pb[0] - pa[0]), pa[1] + s * (pb[1] - pa[1])])
                    .collect(),
                weights: self.face_weights.iter().map(|w| w * len).collect(),
                values: &self.face_tab[lf],
                edge_values: &self.edge_tab[flip as usize],
                nk1,
                ne: self.layout.ne,
            }
        });
        ElementKernel { map, points, weights, values: &self.vol_tab, grads, nk1, faces }
    }
}

/// Quadrature points, weights and basis data of one element.
#[derive(Debug, Clone)]
pub struct ElementKernel<'a> {
    pub map: AffineMap,
    /// Physical quadrature points.
    pub points: Vec<[f64; 2]>,
    /// Weights including the Jacobian.
    pub weights: Vec<f64>,
    values: &'a Tabulation,
    grads: Vec<[f64; 2]>,
    nk1: usize,
    pub faces: [FaceKernel<'a>; 3],
}

impl ElementKernel<'_> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Degree-`k+1` basis values at point `q`; the first `dim P_k` entries
    /// are the degree-`k` basis.
    pub fn values(&self, q: usize) -> &[f64] {
        self.values.values_at(q)
    }

    /// Physical gradients at point `q`.
    pub fn grads(&self, q: usize) -> &[[f64; 2]] {
        &self.grads[q * self.nk1..(q + 1) * self.nk1]
    }
}

#[derive(Debug, Clone)]
pub struct FaceKernel<'a> {
    /// Outward unit normal of this element.
    pub normal: [f64; 2],
    pub length: f64,
    /// The edge basis runs against the local vertex order.
    pub flip: bool,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    values: &'a [f64],
    edge_values: &'a [f64],
    nk1: usize,
    ne: usize,
}

impl FaceKernel<'_> {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Interior basis (degree `k + 1`) at face point `q`.
    pub fn values(&self, q: usize) -> &[f64] {
        &self.values[q * self.nk1..(q + 1) * self.nk1]
    }

    /// Trace basis at face point `q`, in the face's global orientation.
    pub fn edge_values(&self, q: usize) -> &[f64] {
        &self.edge_values[q * self.ne..(q + 1) * self.ne]
    }
}
