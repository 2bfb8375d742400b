//! Element matrices of the semidiscrete HDG forms.

use faer::Mat;

use super::space::{ElementKernel, Layout};
use crate::dense::{add_block, add_block_t, quad_form};
use crate::materials::MaterialParams;

/// Divergence of the Voigt basis tensor `phi e_c`, as `(x, y)` weights on
/// the gradient of `phi`: row `c`, component `d` lists which gradient
/// entry enters.
pub(crate) const DIV_VOIGT: [[Option<usize>; 2]; 3] = [[Some(0), None], [None, Some(1)], [Some(1), Some(0)]];

/// `(e_c n)_d` for the Voigt basis tensor `e_c`.
pub(crate) fn voigt_normal(c: usize, d: usize, n: [f64; 2]) -> f64 {
    match (c, d) {
        (0, 0) => n[0],
        (1, 1) => n[1],
        (2, 0) => n[1],
        (2, 1) => n[0],
        _ => 0.0,
    }
}

/// All element-local blocks. Interior row/column indices follow
/// [`Layout`] within each block's own field; trace columns use the full
/// local trace numbering.
#[derive(Debug, Clone)]
pub struct LocalBlocks {
    pub layout: Layout,
    /// `(A sigma, r)`, `3 nk` square.
    pub m_ss: Mat<f64>,
    /// `(alpha A p I, r)`, `3 nk x nk`.
    pub m_sp: Mat<f64>,
    /// `(alpha^2 A p I, q I)`, `nk` square.
    pub m_pp: Mat<f64>,
    /// `(s0 p, q)`.
    pub m_s0: Mat<f64>,
    /// Velocity mass over `(vs, vf)`, `2 nk1 + 2 nk` square.
    pub m_rho: Mat<f64>,
    /// `(eta kappa^{-1} vf, wf)`, `2 nk` square.
    pub m_drag: Mat<f64>,
    /// `(div r, ws)`, `3 nk x 2 nk1`.
    pub d_div_sigma: Mat<f64>,
    /// `(q, div wf)` with rows `wf`, `2 nk x nk`.
    pub d_grad_p: Mat<f64>,
    /// `<vhat, r n>`, `3 nk x n_trace`.
    pub t_sn: Mat<f64>,
    /// `<phat, wf . n>`, `2 nk x n_trace`.
    pub t_vfn: Mat<f64>,
    /// `<tau_s P vs, P ws>`, `2 nk1` square.
    pub s_ss: Mat<f64>,
    /// `<tau_s vhat, ws>`, `2 nk1 x n_trace`.
    pub s_sh: Mat<f64>,
    /// `<tau_s vhat, what>`, `n_trace` square.
    pub s_hh: Mat<f64>,
    /// `<tau_f p, q>`.
    pub f_pp: Mat<f64>,
    /// `<tau_f phat, q>`, `nk x n_trace`.
    pub f_ph: Mat<f64>,
    /// `<tau_f phat, qhat>`, `n_trace` square.
    pub f_hh: Mat<f64>,
    /// Element mass of the degree-`k+1` basis.
    pub mass: Mat<f64>,
}

/// Matrix `R` of the face projection onto `P_k(F)`: column `i` holds the
/// edge-basis coefficients of the projection of interior basis function `i`
/// (degree `k + 1`) restricted to local face `face`.
pub fn face_reduction(kernel: &ElementKernel<'_>, face: usize, ne: usize, nk1: usize) -> Mat<f64> {
    let f = &kernel.faces[face];
    let mut r = Mat::zeros(ne, nk1);
    for q in 0..f.len() {
        let (v, mu, w) = (f.values(q), f.edge_values(q), f.weights[q] / f.length);
        for m in 0..ne {
            for i in 0..nk1 {
                r[(m, i)] += w * mu[m] * v[i];
            }
        }
    }
    r
}

pub fn local_matrices(kx: &ElementKernel<'_>, mat: &MaterialParams, layout: Layout, tau_s: [f64; 3], tau_f: [f64; 3]) -> LocalBlocks {
    let Layout { nk, nk1, ne, .. } = layout;
    let nb = layout.n_trace();

    let mut mass = Mat::zeros(nk1, nk1);
    let mut d_div_sigma = Mat::zeros(3 * nk, 2 * nk1);
    let mut d_grad_p = Mat::zeros(2 * nk, nk);
    for q in 0..kx.len() {
        let (w, v, g) = (kx.weights[q], kx.values(q), kx.grads(q));
        for i in 0..nk1 {
            for j in 0..nk1 {
                mass[(i, j)] += w * v[i] * v[j];
            }
        }
        for c in 0..3 {
            for i in 0..nk {
                for (d, slot) in DIV_VOIGT[c].iter().enumerate() {
                    if let Some(s) = slot {
                        let gi = g[i][*s];
                        for j in 0..nk1 {
                            d_div_sigma[(c * nk + i, d * nk1 + j)] += w * gi * v[j];
                        }
                    }
                }
            }
        }
        for d in 0..2 {
            for i in 0..nk {
                for j in 0..nk {
                    d_grad_p[(d * nk + i, j)] += w * g[i][d] * v[j];
                }
            }
        }
    }
    let mk = Mat::from_fn(nk, nk, |i, j| mass[(i, j)]);

    let am = mat.a_identity();
    let m_ss = Mat::from_fn(3 * nk, 3 * nk, |r, c| mat.a[r / nk][c / nk] * mk[(r % nk, c % nk)]);
    let m_sp = Mat::from_fn(3 * nk, nk, |r, c| mat.alpha * am[r / nk] * mk[(r % nk, c)]);
    let m_pp = Mat::from_fn(nk, nk, |i, j| mat.alpha * mat.alpha * mat.identity_compliance() * mk[(i, j)]);
    let m_s0 = Mat::from_fn(nk, nk, |i, j| mat.s0 * mk[(i, j)]);
    let nv = 2 * nk1 + 2 * nk;
    let mut m_rho = Mat::zeros(nv, nv);
    for d in 0..2 {
        let (s, f) = (d * nk1, 2 * nk1 + d * nk);
        for i in 0..nk1 {
            for j in 0..nk1 {
                m_rho[(s + i, s + j)] = mat.rho11 * mass[(i, j)];
            }
        }
        for i in 0..nk1 {
            for j in 0..nk {
                m_rho[(s + i, f + j)] = mat.rho12 * mass[(i, j)];
                m_rho[(f + j, s + i)] = mat.rho12 * mass[(i, j)];
            }
        }
        for i in 0..nk {
            for j in 0..nk {
                m_rho[(f + i, f + j)] = mat.rho22[d] * mk[(i, j)];
            }
        }
    }
    let m_drag = Mat::from_fn(2 * nk, 2 * nk, |r, c| mat.drag[r / nk][c / nk] * mk[(r % nk, c % nk)]);

    let mut t_sn = Mat::zeros(3 * nk, nb);
    let mut t_vfn = Mat::zeros(2 * nk, nb);
    let mut s_ss = Mat::zeros(2 * nk1, 2 * nk1);
    let mut s_sh = Mat::zeros(2 * nk1, nb);
    let mut s_hh = Mat::zeros(nb, nb);
    let mut f_pp = Mat::zeros(nk, nk);
    let mut f_ph = Mat::zeros(nk, nb);
    let mut f_hh = Mat::zeros(nb, nb);
    for lf in 0..3 {
        let fk = &kx.faces[lf];
        let (ts, tf) = (tau_s[lf], tau_f[lf]);
        let n = fk.normal;
        let proj = face_reduction(kx, lf, ne, nk1);
        for q in 0..fk.len() {
            let (w, v, mu) = (fk.weights[q], fk.values(q), fk.edge_values(q));
            for m in 0..ne {
                let wm = w * mu[m];
                for c in 0..3 {
                    for d in 0..2 {
                        let cn = voigt_normal(c, d, n);
                        if cn != 0.0 {
                            for i in 0..nk {
                                t_sn[(c * nk + i, layout.vhat(lf, d, m))] += wm * cn * v[i];
                            }
                        }
                    }
                }
                for d in 0..2 {
                    for i in 0..nk {
                        t_vfn[(d * nk + i, layout.phat(lf, m))] += wm * n[d] * v[i];
                    }
                }
                for i in 0..nk {
                    f_ph[(i, layout.phat(lf, m))] += tf * wm * v[i];
                }
                for m2 in 0..ne {
                    let mm = w * mu[m] * mu[m2];
                    f_hh[(layout.phat(lf, m), layout.phat(lf, m2))] += tf * mm;
                    for d in 0..2 {
                        s_hh[(layout.vhat(lf, d, m), layout.vhat(lf, d, m2))] += ts * mm;
                    }
                }
            }
            for i in 0..nk {
                for j in 0..nk {
                    f_pp[(i, j)] += tf * w * v[i] * v[j];
                }
            }
        }
        // <P psi_i, P psi_j> = L sum_m R_mi R_mj, <psi_i, mu_m> = L R_mi
        let len = fk.length;
        for d in 0..2 {
            for i in 0..nk1 {
                for m in 0..ne {
                    s_sh[(d * nk1 + i, layout.vhat(lf, d, m))] += ts * len * proj[(m, i)];
                }
                for j in 0..nk1 {
                    let pij: f64 = (0..ne).map(|m| proj[(m, i)] * proj[(m, j)]).sum();
                    s_ss[(d * nk1 + i, d * nk1 + j)] += ts * len * pij;
                }
            }
        }
    }

    LocalBlocks {
        layout,
        m_ss,
        m_sp,
        m_pp,
        m_s0,
        m_rho,
        m_drag,
        d_div_sigma,
        d_grad_p,
        t_sn,
        t_vfn,
        s_ss,
        s_sh,
        s_hh,
        f_pp,
        f_ph,
        f_hh,
        mass,
    }
}

impl LocalBlocks {
    /// Mass matrix `M` of `M dU/dt + K U + G Lambda = F`.
    pub fn mass_matrix(&self) -> Mat<f64> {
        let l = &self.layout;
        let n = l.n_interior();
        let mut m = Mat::zeros(n, n);
        add_block(&mut m, 0, 0, &self.m_ss, 1.0);
        add_block(&mut m, 0, l.p_start(), &self.m_sp, 1.0);
        add_block_t(&mut m, l.p_start(), 0, &self.m_sp, 1.0);
        add_block(&mut m, l.p_start(), l.p_start(), &self.m_pp, 1.0);
        add_block(&mut m, l.p_start(), l.p_start(), &self.m_s0, 1.0);
        add_block(&mut m, l.vs_start(), l.vs_start(), &self.m_rho, 1.0);
        m
    }

    /// Stiffness `K`: volume couplings, drag and interior stabilization.
    pub fn stiffness_matrix(&self) -> Mat<f64> {
        let l = &self.layout;
        let n = l.n_interior();
        let mut k = Mat::zeros(n, n);
        add_block(&mut k, 0, l.vs_start(), &self.d_div_sigma, 1.0);
        add_block_t(&mut k, l.vs_start(), 0, &self.d_div_sigma, -1.0);
        add_block(&mut k, l.vs_start(), l.vs_start(), &self.s_ss, 1.0);
        add_block(&mut k, l.vf_start(), l.vf_start(), &self.m_drag, 1.0);
        add_block(&mut k, l.vf_start(), l.p_start(), &self.d_grad_p, -1.0);
        add_block_t(&mut k, l.p_start(), l.vf_start(), &self.d_grad_p, 1.0);
        add_block(&mut k, l.p_start(), l.p_start(), &self.f_pp, 1.0);
        k
    }

    /// Interior-to-trace coupling `G`.
    pub fn g_matrix(&self) -> Mat<f64> {
        let l = &self.layout;
        let mut g = Mat::zeros(l.n_interior(), l.n_trace());
        add_block(&mut g, 0, 0, &self.t_sn, -1.0);
        add_block(&mut g, l.vs_start(), 0, &self.s_sh, -1.0);
        add_block(&mut g, l.vf_start(), 0, &self.t_vfn, 1.0);
        add_block(&mut g, l.p_start(), 0, &self.f_ph, -1.0);
        g
    }

    /// Trace rows `H U + J Lambda` of the conservativity equations.
    pub fn h_matrix(&self) -> Mat<f64> {
        let l = &self.layout;
        let mut h = Mat::zeros(l.n_trace(), l.n_interior());
        add_block_t(&mut h, 0, 0, &self.t_sn, 1.0);
        add_block_t(&mut h, 0, l.vs_start(), &self.s_sh, -1.0);
        add_block_t(&mut h, 0, l.vf_start(), &self.t_vfn, 1.0);
        add_block_t(&mut h, 0, l.p_start(), &self.f_ph, 1.0);
        h
    }

    pub fn j_matrix(&self) -> Mat<f64> {
        let n = self.layout.n_trace();
        Mat::from_fn(n, n, |i, j| self.s_hh[(i, j)] - self.f_hh[(i, j)])
    }

    /// `U^T M U`.
    pub fn energy(&self, u: &[f64]) -> f64 {
        quad_form(&self.mass_matrix(), u, u)
    }

    /// Dissipation density: drag, `tau_s |P vs - vhat|^2` and
    /// `tau_f |p - phat|^2` over the element boundary.
    pub fn dissipation(&self, u: &[f64], lam: &[f64]) -> f64 {
        let l = &self.layout;
        let vs = &u[l.vs_start()..l.vf_start()];
        let vf = &u[l.vf_start()..l.p_start()];
        let p = &u[l.p_start()..];
        quad_form(&self.m_drag, vf, vf) + quad_form(&self.s_ss, vs, vs) - 2.0 * quad_form(&self.s_sh, vs, lam)
            + quad_form(&self.s_hh, lam, lam)
            + quad_form(&self.f_pp, p, p)
            - 2.0 * quad_form(&self.f_ph, p, lam)
            + quad_form(&self.f_hh, lam, lam)
    }
}
