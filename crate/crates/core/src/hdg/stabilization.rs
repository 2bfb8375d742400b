//! Face-wise constant stabilization parameters.

use alloc::vec;
use alloc::vec::Vec;

use crate::mesh::Mesh;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("stabilization scale {name} must be positive and finite, got {value}")]
pub struct StabilizationError {
    pub name: &'static str,
    pub value: f64,
}

/// `tau_s` and `tau_f` for every (element, local face) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Stabilization {
    pub tau_s: Vec<[f64; 3]>,
    pub tau_f: Vec<[f64; 3]>,
}

impl Stabilization {
    /// `tau_s = c_s / h_K` and `tau_f = c_f` on every face of `K`.
    pub fn defaults(mesh: &Mesh, c_s: f64, c_f: f64) -> Result<Self, StabilizationError> {
        for (name, value) in [("c_s", c_s), ("c_f", c_f)] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(StabilizationError { name, value });
            }
        }
        Ok(Self::scaled(mesh, c_s, c_f))
    }

    /// Same formula without the positivity check; `c_s = c_f = 0` gives the
    /// non-dissipative diagnostic mode.
    pub fn scaled(mesh: &Mesh, c_s: f64, c_f: f64) -> Self {
        Self {
            tau_s: mesh.diameters.iter().map(|h| [c_s / h; 3]).collect(),
            tau_f: vec![[c_f; 3]; mesh.num_elements()],
        }
    }

    /// Per-region scales: element `e` uses `scales[region[e]]`.
    pub fn per_region(mesh: &Mesh, region: &[usize], scales: &[(f64, f64)]) -> Self {
        Self {
            tau_s: (0..mesh.num_elements()).map(|e| [scales[region[e]].0 / mesh.diameters[e]; 3]).collect(),
            tau_f: (0..mesh.num_elements()).map(|e| [scales[region[e]].1; 3]).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::BoundarySpec;

    #[test]
    fn tau_s_scales_with_inverse_diameter() {
        let m = Mesh::structured_rect([0.0, 0.5], [0.0, 0.5], 1, 1, &BoundarySpec::default()).unwrap();
        let s = Stabilization::defaults(&m, 1.0, 1.0).unwrap();
        let h = m.diameters[0];
        assert_eq!(s.tau_s[0], [1.0 / h; 3]);
        assert_eq!(s.tau_f[1], [1.0; 3]);
        let fine = Mesh::structured_rect([0.0, 0.5], [0.0, 0.5], 2, 2, &BoundarySpec::default()).unwrap();
        let t = Stabilization::defaults(&fine, 1.0, 1.0).unwrap();
        assert!((t.tau_s[0][0] - 2.0 * s.tau_s[0][0]).abs() < 1e-12);
    }

    #[test]
    fn half_diameter_gives_tau_two() {
        let m = Mesh::new(
            vec![[0.0, 0.0], [0.5, 0.0], [0.25, 0.4]],
            vec![[0, 1, 2]],
            |_, _| crate::mesh::BoundaryTags::DIRICHLET,
        )
        .unwrap();
        let s = Stabilization::defaults(&m, 1.0, 1.0).unwrap();
        assert_eq!(m.diameters[0], 0.5);
        assert_eq!(s.tau_s[0], [2.0; 3]);
    }

    #[test]
    fn nonpositive_scales_are_rejected() {
        let m = Mesh::structured_rect([0.0, 1.0], [0.0, 1.0], 1, 1, &BoundarySpec::default()).unwrap();
        assert!(Stabilization::defaults(&m, 0.0, 1.0).is_err());
        assert!(Stabilization::defaults(&m, 1.0, -1.0).is_err());
    }
}
