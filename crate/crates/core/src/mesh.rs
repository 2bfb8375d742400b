//! Conforming triangulations of polygonal domains with tagged boundary
//! faces.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::fe::affine::{AffineMap, FACE_VERTICES};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MeshError {
    #[error("invalid extents or resolution: {0}")]
    InvalidExtents(&'static str),
    #[error("mesh has no elements")]
    Empty,
    #[error("triangle {0} is degenerate")]
    Degenerate(usize),
    #[error("triangle {tri} references vertex {vertex} which does not exist")]
    BadVertex { tri: usize, vertex: usize },
    #[error("edge ({0}, {1}) is shared by more than two triangles")]
    NonManifold(usize, usize),
    #[error("no boundary face is tagged {0}")]
    MissingBoundaryPart(&'static str),
}

/// Boundary condition for the solid: traction (`Γ_t`) or prescribed solid
/// velocity (`Γ_d`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ElasticBc {
    Traction,
    Velocity,
}

/// Boundary condition for the fluid: normal flux (`Γ_f`) or prescribed
/// pressure (`Γ_p`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FlowBc {
    Flux,
    Pressure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryTags {
    pub elastic: ElasticBc,
    pub flow: FlowBc,
}

impl BoundaryTags {
    pub const DIRICHLET: Self = Self { elastic: ElasticBc::Velocity, flow: FlowBc::Pressure };
}

impl Default for BoundaryTags {
    fn default() -> Self {
        Self::DIRICHLET
    }
}

/// Side of an axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
    All,
}

/// Assigns tags to the boundary faces of a mesh by the side of the bounding
/// box they lie on. Rules are applied in order; later rules override
/// earlier ones, and untouched faces keep `default`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundarySpec {
    pub default: BoundaryTags,
    pub rules: Vec<BoundaryRule>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryRule {
    pub side: Side,
    pub elastic: Option<ElasticBc>,
    pub flow: Option<FlowBc>,
}

impl Default for BoundarySpec {
    fn default() -> Self {
        Self { default: BoundaryTags::DIRICHLET, rules: Vec::new() }
    }
}

impl BoundarySpec {
    pub fn tags_for(&self, midpoint: [f64; 2], bbox: [[f64; 2]; 2]) -> BoundaryTags {
        let tol = 1e-10 * ((bbox[1][0] - bbox[0][0]) + (bbox[1][1] - bbox[0][1]));
        let mut tags = self.default;
        for rule in &self.rules {
            let hit = match rule.side {
                Side::All => true,
                Side::Left => (midpoint[0] - bbox[0][0]).abs() < tol,
                Side::Right => (midpoint[0] - bbox[1][0]).abs() < tol,
                Side::Bottom => (midpoint[1] - bbox[0][1]).abs() < tol,
                Side::Top => (midpoint[1] - bbox[1][1]).abs() < tol,
            };
            if hit {
                if let Some(e) = rule.elastic {
                    tags.elastic = e;
                }
                if let Some(f) = rule.flow {
                    tags.flow = f;
                }
            }
        }
        tags
    }
}

/// An edge of the triangulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    /// Endpoints, lower global index first. The trace basis on the face is
    /// parameterized from `vertices[0]` to `vertices[1]`.
    pub vertices: [usize; 2],
    /// Adjacent elements, lower index first; `elements[1]` is `None` on the
    /// boundary.
    pub elements: [Option<usize>; 2],
    /// Local face index inside each adjacent element.
    pub local_index: [usize; 2],
    /// Unit normal pointing out of `elements[0]`.
    pub normal: [f64; 2],
    pub length: f64,
    pub boundary: Option<BoundaryTags>,
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.elements[1].is_none()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    pub vertices: Vec<[f64; 2]>,
    /// Counterclockwise vertex triples.
    pub triangles: Vec<[usize; 3]>,
    pub faces: Vec<Face>,
    /// Global face index of local face `i` (opposite vertex `i`).
    pub element_faces: Vec<[usize; 3]>,
    /// Element diameter `h_K` (longest edge).
    pub diameters: Vec<f64>,
}

impl Mesh {
    /// Builds the face table. Clockwise triangles are reoriented; boundary
    /// tags come from `tagger(endpoints, midpoint)`.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        mut triangles: Vec<[usize; 3]>,
        mut tagger: impl FnMut([usize; 2], [f64; 2]) -> BoundaryTags,
    ) -> Result<Self, MeshError> {
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        for (t, tri) in triangles.iter_mut().enumerate() {
            if let Some(&v) = tri.iter().find(|&&v| v >= vertices.len()) {
                return Err(MeshError::BadVertex { tri: t, vertex: v });
            }
            let p = tri.map(|v| vertices[v]);
            let area2 = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
            if area2 < 0.0 {
                tri.swap(1, 2);
            }
            if AffineMap::new(tri.map(|v| vertices[v])).is_err() {
                return Err(MeshError::Degenerate(t));
            }
        }

        let mut lookup: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut faces: Vec<Face> = Vec::new();
        let mut element_faces = vec![[0usize; 3]; triangles.len()];
        let mut diameters = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            let map = AffineMap::new(tri.map(|v| vertices[v])).expect("checked above");
            diameters.push(map.face_lengths.iter().copied().fold(0.0, f64::max));
            for (lf, [a, b]) in FACE_VERTICES.iter().enumerate() {
                let (va, vb) = (tri[*a], tri[*b]);
                let key = (va.min(vb), va.max(vb));
                match lookup.get(&key) {
                    None => {
                        lookup.insert(key, faces.len());
                        element_faces[t][lf] = faces.len();
                        faces.push(Face {
                            vertices: [key.0, key.1],
                            elements: [Some(t), None],
                            local_index: [lf, usize::MAX],
                            normal: map.normals[lf],
                            length: map.face_lengths[lf],
                            boundary: None,
                        });
                    }
                    Some(&f) => {
                        let face = &mut faces[f];
                        if face.elements[1].is_some() {
                            return Err(MeshError::NonManifold(key.0, key.1));
                        }
                        face.elements[1] = Some(t);
                        face.local_index[1] = lf;
                        element_faces[t][lf] = f;
                    }
                }
            }
        }
        for face in &mut faces {
            if face.is_boundary() {
                let [a, b] = face.vertices;
                let mid = [0.5 * (vertices[a][0] + vertices[b][0]), 0.5 * (vertices[a][1] + vertices[b][1])];
                face.boundary = Some(tagger(face.vertices, mid));
            }
        }
        let mesh = Self { vertices, triangles, faces, element_faces, diameters };
        mesh.check_boundary_parts()?;
        Ok(mesh)
    }

    fn check_boundary_parts(&self) -> Result<(), MeshError> {
        let tags: Vec<BoundaryTags> = self.faces.iter().filter_map(|f| f.boundary).collect();
        if !tags.iter().any(|t| t.elastic == ElasticBc::Velocity) {
            return Err(MeshError::MissingBoundaryPart("solid velocity (Γ_d)"));
        }
        if !tags.iter().any(|t| t.flow == FlowBc::Pressure) {
            return Err(MeshError::MissingBoundaryPart("pressure (Γ_p)"));
        }
        Ok(())
    }

    /// Uniform `nx x ny` grid of rectangles, each split along its
    /// lower-left to upper-right diagonal.
    pub fn structured_rect(
        [xmin, xmax]: [f64; 2],
        [ymin, ymax]: [f64; 2],
        nx: usize,
        ny: usize,
        spec: &BoundarySpec,
    ) -> Result<Self, MeshError> {
        if nx == 0 || ny == 0 {
            return Err(MeshError::InvalidExtents("nx and ny must be at least 1"));
        }
        if !(xmax > xmin) || !(ymax > ymin) {
            return Err(MeshError::InvalidExtents("need xmax > xmin and ymax > ymin"));
        }
        let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
        for j in 0..=ny {
            for i in 0..=nx {
                let x = xmin + (xmax - xmin) * i as f64 / nx as f64;
                let y = ymin + (ymax - ymin) * j as f64 / ny as f64;
                vertices.push([x, y]);
            }
        }
        let id = |i: usize, j: usize| j * (nx + 1) + i;
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1));
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            }
        }
        let bbox = [[xmin, ymin], [xmax, ymax]];
        Self::new(vertices, triangles, |_, mid| spec.tags_for(mid, bbox))
    }

    pub fn num_elements(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }

    pub fn element_vertices(&self, e: usize) -> [[f64; 2]; 3] {
        self.triangles[e].map(|v| self.vertices[v])
    }

    pub fn affine_map(&self, e: usize) -> AffineMap {
        AffineMap::new(self.element_vertices(e)).expect("mesh elements are non-degenerate")
    }

    pub fn centroid(&self, e: usize) -> [f64; 2] {
        let p = self.element_vertices(e);
        [(p[0][0] + p[1][0] + p[2][0]) / 3.0, (p[0][1] + p[1][1] + p[2][1]) / 3.0]
    }

    /// Mesh size `h = max_K h_K`.
    pub fn mesh_size(&self) -> Result<f64, MeshError> {
        if self.triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        Ok(self.diameters.iter().copied().fold(0.0, f64::max))
    }

    pub fn bounding_box(&self) -> [[f64; 2]; 2] {
        let mut bb = [[f64::INFINITY; 2], [f64::NEG_INFINITY; 2]];
        for v in &self.vertices {
            for d in 0..2 {
                bb[0][d] = bb[0][d].min(v[d]);
                bb[1][d] = bb[1][d].max(v[d]);
            }
        }
        bb
    }

    /// Sign that turns the stored normal of face `f` into the outward normal
    /// of its adjacent element `e`.
    pub fn normal_sign(&self, f: usize, e: usize) -> f64 {
        if self.faces[f].elements[0] == Some(e) {
            1.0
        } else {
            -1.0
        }
    }

    /// Returns a conforming mesh in which every element meeting the closed
    /// disk has been red-refined `levels` times, with green closure on the
    /// neighbours.
    pub fn refine_near_point(&self, center: [f64; 2], radius: f64, levels: usize) -> Self {
        let mut mesh = self.clone();
        for _ in 0..levels {
            let marked: Vec<bool> = (0..mesh.num_elements())
                .map(|e| triangle_meets_disk(mesh.element_vertices(e), center, radius))
                .collect();
            if !marked.iter().any(|&m| m) {
                break;
            }
            mesh = mesh.red_green(&marked);
        }
        mesh
    }

    fn red_green(&self, marked: &[bool]) -> Self {
        let nf = self.num_faces();
        let mut split = vec![false; nf];
        for (e, &m) in marked.iter().enumerate() {
            if m {
                for &f in &self.element_faces[e] {
                    split[f] = true;
                }
            }
        }
        // Closure: elements with two split edges become red.
        loop {
            let mut changed = false;
            for faces in &self.element_faces {
                let n = faces.iter().filter(|&&f| split[f]).count();
                if n == 2 {
                    for &f in faces {
                        split[f] = true;
                    }
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        let mut vertices = self.vertices.clone();
        let mut midpoint = vec![usize::MAX; nf];
        for (f, face) in self.faces.iter().enumerate() {
            if split[f] {
                let [a, b] = face.vertices;
                midpoint[f] = vertices.len();
                vertices.push([0.5 * (vertices[a][0] + vertices[b][0]), 0.5 * (vertices[a][1] + vertices[b][1])]);
            }
        }

        let mut tags: BTreeMap<(usize, usize), BoundaryTags> = BTreeMap::new();
        for (f, face) in self.faces.iter().enumerate() {
            if let Some(t) = face.boundary {
                let [a, b] = face.vertices;
                if split[f] {
                    let m = midpoint[f];
                    tags.insert((a.min(m), a.max(m)), t);
                    tags.insert((b.min(m), b.max(m)), t);
                } else {
                    tags.insert((a, b), t);
                }
            }
        }

        let mut triangles = Vec::with_capacity(self.num_elements() * 2);
        for (e, tri) in self.triangles.iter().enumerate() {
            let faces = self.element_faces[e];
            let mids = faces.map(|f| if split[f] { Some(midpoint[f]) } else { None });
            let [v0, v1, v2] = *tri;
            match mids {
                [Some(m0), Some(m1), Some(m2)] => {
                    // m0 on (v1,v2), m1 on (v2,v0), m2 on (v0,v1)
                    triangles.push([v0, m2, m1]);
                    triangles.push([m2, v1, m0]);
                    triangles.push([m1, m0, v2]);
                    triangles.push([m0, m1, m2]);
                }
                [Some(m0), None, None] => {
                    triangles.push([v0, v1, m0]);
                    triangles.push([v0, m0, v2]);
                }
                [None, Some(m1), None] => {
                    triangles.push([v1, v2, m1]);
                    triangles.push([v1, m1, v0]);
                }
                [None, None, Some(m2)] => {
                    triangles.push([v2, v0, m2]);
                    triangles.push([v2, m2, v1]);
                }
                [None, None, None] => triangles.push(*tri),
                _ => unreachable!("closure leaves at most one or all three edges split"),
            }
        }
        Self::new(vertices, triangles, |[a, b], _| tags.get(&(a, b)).copied().unwrap_or_default())
            .expect("refinement of a valid mesh is valid")
    }
}

fn triangle_meets_disk(p: [[f64; 2]; 3], c: [f64; 2], r: f64) -> bool {
    // centre inside the triangle
    let cross = |a: [f64; 2], b: [f64; 2], q: [f64; 2]| (b[0] - a[0]) * (q[1] - a[1]) - (b[1] - a[1]) * (q[0] - a[0]);
    let s = [cross(p[0], p[1], c), cross(p[1], p[2], c), cross(p[2], p[0], c)];
    if s.iter().all(|&v| v >= 0.0) || s.iter().all(|&v| v <= 0.0) {
        return true;
    }
    (0..3).any(|i| segment_distance(p[i], p[(i + 1) % 3], c) <= r)
}

fn segment_distance(a: [f64; 2], b: [f64; 2], q: [f64; 2]) -> f64 {
    let d = [b[0] - a[0], b[1] - a[1]];
    let len2 = d[0] * d[0] + d[1] * d[1];
    let t = (((q[0] - a[0]) * d[0] + (q[1] - a[1]) * d[1]) / len2).clamp(0.0, 1.0);
    let p = [a[0] + t * d[0], a[1] + t * d[1]];
    (q[0] - p[0]).hypot(q[1] - p[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square(n: usize) -> Mesh {
        Mesh::structured_rect([0.0, 1.0], [0.0, 1.0], n, n, &BoundarySpec::default()).unwrap()
    }

    fn total_area(m: &Mesh) -> f64 {
        (0..m.num_elements()).map(|e| m.affine_map(e).area()).sum()
    }

    fn assert_conforming(m: &Mesh) {
        let nb = m.faces.iter().filter(|f| f.is_boundary()).count();
        let bbox = m.bounding_box();
        let perimeter = 2.0 * ((bbox[1][0] - bbox[0][0]) + (bbox[1][1] - bbox[0][1]));
        let boundary_len: f64 = m.faces.iter().filter(|f| f.is_boundary()).map(|f| f.length).sum();
        assert!(nb > 0);
        // a hanging vertex would leave boundary-flagged edges in the interior
        assert!((boundary_len - perimeter).abs() < 1e-12 * perimeter);
        let v = m.vertices.len() as i64;
        let e = m.num_faces() as i64;
        let t = m.num_elements() as i64;
        assert_eq!(v - e + t, 1);
    }

    #[test]
    fn two_by_two_counts() {
        let m = unit_square(2);
        assert_eq!(m.num_elements(), 8);
        assert_eq!(m.vertices.len(), 9);
        assert_eq!(m.num_faces(), 16);
        assert_conforming(&m);
    }

    #[test]
    fn one_by_one_counts() {
        let m = unit_square(1);
        assert_eq!((m.num_elements(), m.vertices.len(), m.num_faces()), (2, 4, 5));
        assert!((m.mesh_size().unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn four_by_four_counts_and_size() {
        let m = unit_square(4);
        assert_eq!(m.num_elements(), 32);
        assert!((m.mesh_size().unwrap() - 0.25 * 2f64.sqrt()).abs() < 1e-15);
        assert!((unit_square(2).mesh_size().unwrap() - 2f64.sqrt() / 2.0).abs() < 1e-15);
    }

    #[test]
    fn reference_triangle_size() {
        let m = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]], |_, _| BoundaryTags::DIRICHLET)
            .unwrap();
        assert!((m.mesh_size().unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn invalid_extents_are_rejected() {
        let spec = BoundarySpec::default();
        assert!(Mesh::structured_rect([1.0, 0.0], [0.0, 1.0], 2, 2, &spec).is_err());
        assert!(Mesh::structured_rect([0.0, 1.0], [0.0, 1.0], 0, 2, &spec).is_err());
    }

    #[test]
    fn missing_dirichlet_part_is_rejected() {
        let spec = BoundarySpec {
            default: BoundaryTags { elastic: ElasticBc::Traction, flow: FlowBc::Pressure },
            rules: Vec::new(),
        };
        assert_eq!(
            Mesh::structured_rect([0.0, 1.0], [0.0, 1.0], 2, 2, &spec).unwrap_err(),
            MeshError::MissingBoundaryPart("solid velocity (Γ_d)")
        );
    }

    #[test]
    fn normals_are_unit_and_point_away_from_first_element() {
        let m = unit_square(3);
        for face in &m.faces {
            assert!((face.normal[0].hypot(face.normal[1]) - 1.0).abs() < 1e-14);
            let e0 = face.elements[0].unwrap();
            if let Some(e1) = face.elements[1] {
                assert!(e0 < e1);
            }
            let c = m.centroid(e0);
            let a = m.vertices[face.vertices[0]];
            let to_face = [a[0] - c[0], a[1] - c[1]];
            assert!(to_face[0] * face.normal[0] + to_face[1] * face.normal[1] > 0.0);
        }
        assert!((total_area(&m) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn boundary_rules_split_sides() {
        let spec = BoundarySpec {
            default: BoundaryTags::DIRICHLET,
            rules: vec![BoundaryRule { side: Side::Top, elastic: Some(ElasticBc::Traction), flow: Some(FlowBc::Flux) }],
        };
        let m = Mesh::structured_rect([0.0, 2.0], [0.0, 1.0], 4, 2, &spec).unwrap();
        for face in m.faces.iter().filter(|f| f.is_boundary()) {
            let y = 0.5 * (m.vertices[face.vertices[0]][1] + m.vertices[face.vertices[1]][1]);
            let t = face.boundary.unwrap();
            assert_eq!(t.elastic == ElasticBc::Traction, (y - 1.0).abs() < 1e-12);
            assert_eq!(t.flow == FlowBc::Flux, (y - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn refine_zero_levels_is_identity() {
        let m = unit_square(2);
        assert_eq!(m.refine_near_point([0.5, 0.5], 0.3, 0), m);
    }

    #[test]
    fn refine_covering_disk_is_red_everywhere() {
        let m = unit_square(1).refine_near_point([0.5, 0.5], 1.0, 1);
        assert_eq!(m.num_elements(), 8);
        assert_conforming(&m);
    }

    #[test]
    fn refine_far_disk_is_identity() {
        let m = unit_square(2);
        assert_eq!(m.refine_near_point([10.0, 10.0], 0.5, 3), m);
    }

    #[test]
    fn local_refinement_stays_conforming() {
        let m = unit_square(4).refine_near_point([0.5, 0.5], 0.1, 3);
        assert!(m.num_elements() > 32);
        assert_conforming(&m);
        assert!((total_area(&m) - 1.0).abs() < 1e-12);
        // refined elements near the centre are smaller
        let near = (0..m.num_elements())
            .filter(|&e| {
                let c = m.centroid(e);
                (c[0] - 0.5).hypot(c[1] - 0.5) < 0.05
            })
            .map(|e| m.diameters[e])
            .fold(f64::INFINITY, f64::min);
        assert!(near <= 0.25 * 2f64.sqrt() / 8.0 + 1e-12);
        for face in &m.faces {
            if face.is_boundary() {
                assert_eq!(face.boundary, Some(BoundaryTags::DIRICHLET));
            }
        }
    }
}
