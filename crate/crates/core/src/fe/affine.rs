//! Affine map from the reference triangle `(0,0), (1,0), (0,1)` to a
//! physical triangle.

#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("degenerate or clockwise triangle (signed area {signed_area:e})")]
pub struct DegenerateTriangle {
    pub signed_area: f64,
}

/// Local face `i` is the edge opposite vertex `i`, traversed
/// counterclockwise: face 0 = (v1, v2), face 1 = (v2, v0), face 2 = (v0, v1).
pub const FACE_VERTICES: [[usize; 2]; 3] = [[1, 2], [2, 0], [0, 1]];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub origin: [f64; 2],
    /// Columns are the images of the reference edge vectors.
    pub jacobian: [[f64; 2]; 2],
    pub det: f64,
    /// `J^{-T}`, maps reference gradients to physical gradients.
    pub inv_transpose: [[f64; 2]; 2],
    pub normals: [[f64; 2]; 3],
    pub face_lengths: [f64; 3],
}

impl AffineMap {
    pub fn new(tri: [[f64; 2]; 3]) -> Result<Self, DegenerateTriangle> {
        let [v0, v1, v2] = tri;
        let jacobian = [[v1[0] - v0[0], v2[0] - v0[0]], [v1[1] - v0[1], v2[1] - v0[1]]];
        let det = jacobian[0][0] * jacobian[1][1] - jacobian[0][1] * jacobian[1][0];
        let scale = (jacobian[0][0].abs() + jacobian[0][1].abs() + jacobian[1][0].abs() + jacobian[1][1].abs()).powi(2);
        if !(det > 1e-14 * scale) {
            return Err(DegenerateTriangle { signed_area: 0.5 * det });
        }
        let inv_transpose = [
            [jacobian[1][1] / det, -jacobian[1][0] / det],
            [-jacobian[0][1] / det, jacobian[0][0] / det],
        ];
        let mut normals = [[0.0; 2]; 3];
        let mut face_lengths = [0.0; 3];
        for (f, [a, b]) in FACE_VERTICES.iter().enumerate() {
            let d = [tri[*b][0] - tri[*a][0], tri[*b][1] - tri[*a][1]];
            let len = d[0].hypot(d[1]);
            face_lengths[f] = len;
            normals[f] = [d[1] / len, -d[0] / len];
        }
        Ok(Self { origin: v0, jacobian, det, inv_transpose, normals, face_lengths })
    }

    pub fn to_physical(&self, xi: [f64; 2]) -> [f64; 2] {
        let j = &self.jacobian;
        [
            self.origin[0] + j[0][0] * xi[0] + j[0][1] * xi[1],
            self.origin[1] + j[1][0] * xi[0] + j[1][1] * xi[1],
        ]
    }

    pub fn to_reference(&self, x: [f64; 2]) -> [f64; 2] {
        let d = [x[0] - self.origin[0], x[1] - self.origin[1]];
        // J^{-1} = (J^{-T})^T
        let it = &self.inv_transpose;
        [it[0][0] * d[0] + it[1][0] * d[1], it[0][1] * d[0] + it[1][1] * d[1]]
    }

    pub fn push_gradient(&self, g: [f64; 2]) -> [f64; 2] {
        let it = &self.inv_transpose;
        [it[0][0] * g[0] + it[0][1] * g[1], it[1][0] * g[0] + it[1][1] * g[1]]
    }

    pub fn area(&self) -> f64 {
        0.5 * self.det
    }
}
