//! Element contributions to the one-step Crank-Nicolson system.

use alloc::vec::Vec;
use faer::Mat;

use super::local::LocalBlocks;
use crate::dense::{lin_comb, matvec_add, scaled};

/// Generic element system
/// `[A_ii A_ib; A_bi A_bb] [U; Lambda] = [r_i; r_b]`.
#[derive(Debug, Clone)]
pub struct ElementSystem {
    pub a_ii: Mat<f64>,
    pub a_ib: Mat<f64>,
    pub a_bi: Mat<f64>,
    pub a_bb: Mat<f64>,
}

impl ElementSystem {
    pub fn n_interior(&self) -> usize {
        self.a_ii.nrows()
    }

    pub fn n_trace(&self) -> usize {
        self.a_bb.nrows()
    }
}

/// Level-`(i+1)` element system together with the affine map from the
/// level-`i` state and midpoint loads to the right-hand side.
#[derive(Debug, Clone)]
pub struct CnElementSystem {
    pub dt: f64,
    pub system: ElementSystem,
    /// `M - dt/2 K`.
    pub r_ii: Mat<f64>,
    /// `-dt/2 G`.
    pub r_ib: Mat<f64>,
    /// `-dt/2 H`.
    pub r_bi: Mat<f64>,
    /// `-dt/2 J`.
    pub r_bb: Mat<f64>,
}

/// The scheme, multiplied through by `dt`:
///
/// `(M + dt/2 K) U' + dt/2 G L' = (M - dt/2 K) U - dt/2 G L + dt F`,
/// `dt/2 (H U' + J L') = -dt/2 (H U + J L)`.
pub fn cn_element_system(blocks: &LocalBlocks, dt: f64) -> CnElementSystem {
    assert!(dt > 0.0, "time step must be positive");
    let m = blocks.mass_matrix();
    let k = blocks.stiffness_matrix();
    let g = blocks.g_matrix();
    let h = blocks.h_matrix();
    let j = blocks.j_matrix();
    let half = 0.5 * dt;
    CnElementSystem {
        dt,
        system: ElementSystem {
            a_ii: lin_comb(1.0, &m, half, &k),
            a_ib: scaled(&g, half),
            a_bi: scaled(&h, half),
            a_bb: scaled(&j, half),
        },
        r_ii: lin_comb(1.0, &m, -half, &k),
        r_ib: scaled(&g, -half),
        r_bi: scaled(&h, -half),
        r_bb: scaled(&j, -half),
    }
}

impl CnElementSystem {
    /// Local right-hand side from level-`i` interior values `u`, traces
    /// `lam` and the midpoint load vector `load` (`F`, not multiplied by
    /// `dt`).
    pub fn rhs(&self, u: &[f64], lam: &[f64], load: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let mut ri: Vec<f64> = load.iter().map(|f| self.dt * f).collect();
        matvec_add(&self.r_ii, u, 1.0, &mut ri);
        matvec_add(&self.r_ib, lam, 1.0, &mut ri);
        let mut rb = alloc::vec![0.0; self.r_bb.nrows()];
        matvec_add(&self.r_bi, u, 1.0, &mut rb);
        matvec_add(&self.r_bb, lam, 1.0, &mut rb);
        (ri, rb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::inverse;
    use crate::hdg::local::local_matrices;
    use crate::hdg::space::Discretization;
    use crate::materials::MaterialParams;
    use crate::mesh::{BoundaryTags, Mesh};
    use alloc::vec;

    fn one_element(k: usize) -> LocalBlocks {
        let mesh = Mesh::new(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], vec![[0, 1, 2]], |_, _| BoundaryTags::DIRICHLET)
            .unwrap();
        let d = Discretization::new(k, 2 * k + 2).unwrap();
        let kx = d.kernel(&mesh, 0);
        let h = mesh.diameters[0];
        local_matrices(&kx, &MaterialParams::example1(3.0, 0.3).unwrap(), d.layout, [1.0 / h; 3], [1.0; 3])
    }

    #[test]
    fn block_sizes_for_one_element() {
        let s = cn_element_system(&one_element(1), 0.1);
        assert_eq!((s.system.a_ii.nrows(), s.system.a_ii.ncols()), (30, 30));
        assert_eq!((s.system.a_bb.nrows(), s.system.a_bb.ncols()), (18, 18));
        let s2 = cn_element_system(&one_element(2), 0.1);
        assert_eq!(s2.system.a_ii.nrows(), 56);
        assert_eq!(s2.system.a_bb.nrows(), 27);
    }

    #[test]
    fn trace_block_is_linear_in_dt() {
        let b = one_element(1);
        let s1 = cn_element_system(&b, 0.1);
        let s2 = cn_element_system(&b, 0.2);
        for i in 0..18 {
            for j in 0..18 {
                assert!((s2.system.a_bb[(i, j)] - 2.0 * s1.system.a_bb[(i, j)]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_data_gives_zero_rhs() {
        let s = cn_element_system(&one_element(2), 0.05);
        let (ri, rb) = s.rhs(&[0.0; 56], &[0.0; 27], &[0.0; 56]);
        assert!(ri.iter().chain(&rb).all(|&x| x == 0.0));
    }

    #[test]
    fn interior_block_nonsingular_over_six_decades() {
        let b = one_element(2);
        for e in -4..=2 {
            let dt = 10f64.powi(e);
            let s = cn_element_system(&b, dt);
            assert!(inverse(&s.system.a_ii).is_some(), "dt = {dt}");
        }
    }
}
