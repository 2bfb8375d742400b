//! Small dense-matrix helpers on top of `faer`.

use alloc::vec;
use alloc::vec::Vec;
use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
#[allow(unused_imports)]
use num_traits::Float;

/// `dst[r0.., c0..] += alpha * src`.
pub fn add_block(dst: &mut Mat<f64>, r0: usize, c0: usize, src: &Mat<f64>, alpha: f64) {
    for j in 0..src.ncols() {
        for i in 0..src.nrows() {
            dst[(r0 + i, c0 + j)] += alpha * src[(i, j)];
        }
    }
}

/// `dst[r0.., c0..] += alpha * src^T`.
pub fn add_block_t(dst: &mut Mat<f64>, r0: usize, c0: usize, src: &Mat<f64>, alpha: f64) {
    for j in 0..src.ncols() {
        for i in 0..src.nrows() {
            dst[(r0 + j, c0 + i)] += alpha * src[(i, j)];
        }
    }
}

pub fn scaled(a: &Mat<f64>, alpha: f64) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| alpha * a[(i, j)])
}

pub fn lin_comb(alpha: f64, a: &Mat<f64>, beta: f64, b: &Mat<f64>) -> Mat<f64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| alpha * a[(i, j)] + beta * b[(i, j)])
}

pub fn matvec(a: &Mat<f64>, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; a.nrows()];
    matvec_add(a, x, 1.0, &mut y);
    y
}

/// `y += alpha * a x`.
pub fn matvec_add(a: &Mat<f64>, x: &[f64], alpha: f64, y: &mut [f64]) {
    debug_assert_eq!(a.ncols(), x.len());
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        let s = alpha * xj;
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += a[(i, j)] * s;
        }
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// `x^T a y`.
pub fn quad_form(a: &Mat<f64>, x: &[f64], y: &[f64]) -> f64 {
    dot(x, &matvec(a, y))
}

/// Row and column scalings `(r, c)` such that `diag(r) a diag(c)` has
/// entries of magnitude at most one in every row and column (Ruiz).
pub fn ruiz_scaling(nrows: usize, ncols: usize, entries: impl Fn(&mut dyn FnMut(usize, usize, f64))) -> (Vec<f64>, Vec<f64>) {
    let mut r = vec![1.0; nrows];
    let mut c = vec![1.0; ncols];
    for _ in 0..8 {
        let mut rmax = vec![0.0f64; nrows];
        let mut cmax = vec![0.0f64; ncols];
        entries(&mut |i, j, v| {
            let s = (v * r[i] * c[j]).abs();
            rmax[i] = rmax[i].max(s);
            cmax[j] = cmax[j].max(s);
        });
        let mut done = true;
        for (ri, m) in r.iter_mut().zip(&rmax) {
            if *m > 0.0 {
                *ri /= m.sqrt();
                done &= (m - 1.0).abs() < 1e-3;
            }
        }
        for (cj, m) in c.iter_mut().zip(&cmax) {
            if *m > 0.0 {
                *cj /= m.sqrt();
                done &= (m - 1.0).abs() < 1e-3;
            }
        }
        if done {
            break;
        }
    }
    // powers of two keep the scaling exact
    let round = |x: &mut f64| *x = 2f64.powi(x.log2().round() as i32);
    r.iter_mut().for_each(round);
    c.iter_mut().for_each(round);
    (r, c)
}

/// Inverse of a square matrix through an equilibrated LU factorization.
/// Returns `None` if the matrix is numerically singular.
pub fn inverse(a: &Mat<f64>) -> Option<Mat<f64>> {
    let n = a.nrows();
    if n == 0 {
        return Some(Mat::zeros(0, 0));
    }
    let (r, c) = ruiz_scaling(n, n, |f| {
        for j in 0..n {
            for i in 0..n {
                let v = a[(i, j)];
                if v != 0.0 {
                    f(i, j, v);
                }
            }
        }
    });
    let s = Mat::from_fn(n, n, |i, j| r[i] * a[(i, j)] * c[j]);
    let lu = s.partial_piv_lu();
    // pivot-size check on U
    let u = lu.U();
    let umax = (0..n).map(|i| u[(i, i)].abs()).fold(0.0, f64::max);
    let umin = (0..n).map(|i| u[(i, i)].abs()).fold(f64::INFINITY, f64::min);
    if !(umin > 1e-13 * umax) || !umin.is_finite() {
        return None;
    }
    let inv = lu.inverse();
    // a^{-1} = diag(c) s^{-1} diag(r)
    Some(Mat::from_fn(n, n, |i, j| c[i] * inv[(i, j)] * r[j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_badly_scaled_matrix() {
        let b = Mat::from_fn(3, 3, |i, j| [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]][i][j]);
        let d = [1e-11, 1.0, 1e4];
        let a = Mat::from_fn(3, 3, |i, j| d[i] * b[(i, j)] * d[j]);
        let inv = inverse(&a).unwrap();
        // (D B D)^{-1} = D^{-1} B^{-1} D^{-1}
        let unscaled = Mat::from_fn(3, 3, |i, j| d[i] * inv[(i, j)] * d[j]);
        let p = &b * &unscaled;
        for i in 0..3 {
            for j in 0..3 {
                let e = if i == j { 1.0 } else { 0.0 };
                assert!((p[(i, j)] - e).abs() < 1e-14, "{i} {j} {}", p[(i, j)]);
            }
        }
    }

    #[test]
    fn singular_matrix_is_detected() {
        let a = Mat::from_fn(3, 3, |i, j| (i + j) as f64);
        assert!(inverse(&a).is_none());
    }

    #[test]
    fn blocks_and_transposes() {
        let src = Mat::from_fn(2, 3, |i, j| (3 * i + j) as f64);
        let mut dst = Mat::zeros(4, 4);
        add_block(&mut dst, 1, 0, &src, 2.0);
        add_block_t(&mut dst, 0, 2, &src, 1.0);
        assert_eq!(dst[(2, 2)], 2.0 * 5.0 + 2.0);
        assert_eq!(dst[(2, 3)], 5.0);
        assert_eq!(dst[(0, 3)], 3.0);
    }
}
