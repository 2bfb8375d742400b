//! Hyper-dual numbers and an independent residual check of the Example 1
//! manufactured solution.

use core::f64::consts::PI;
use core::ops::{Add, Mul, Neg, Sub};

use poro_hdg::materials::{matvec, MaterialParams};
use poro_hdg::verification::Example1;

/// `a + b e1 + c e2 + d e1 e2` with `e1^2 = e2^2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperDual {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl HyperDual {
    pub fn constant(a: f64) -> Self {
        Self { a, b: 0.0, c: 0.0, d: 0.0 }
    }

    fn chain(self, f: f64, df: f64, ddf: f64) -> Self {
        Self { a: f, b: df * self.b, c: df * self.c, d: df * self.d + ddf * self.b * self.c }
    }

    pub fn sin(self) -> Self {
        let (s, c) = self.a.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = self.a.sin_cos();
        self.chain(c, -s, -c)
    }
}

impl Add for HyperDual {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self { a: self.a + o.a, b: self.b + o.b, c: self.c + o.c, d: self.d + o.d }
    }
}

impl Sub for HyperDual {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        self + (-o)
    }
}

impl Neg for HyperDual {
    type Output = Self;
    fn neg(self) -> Self {
        Self { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
    }
}

impl Mul for HyperDual {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            a: self.a * o.a,
            b: self.a * o.b + self.b * o.a,
            c: self.a * o.c + self.c * o.a,
            d: self.a * o.d + self.b * o.c + self.c * o.b + self.d * o.a,
        }
    }
}

impl Mul<HyperDual> for f64 {
    type Output = HyperDual;
    fn mul(self, o: HyperDual) -> HyperDual {
        HyperDual::constant(self) * o
    }
}

type Hd = HyperDual;

fn us(x: Hd, y: Hd, t: Hd) -> [Hd; 2] {
    let pi = |v: Hd| PI * v;
    let one = Hd::constant(1.0);
    let st = pi(t).sin();
    [pi(x).sin() * pi(y).sin() * st, x * y * (x - one) * (y - one) * st]
}

fn pressure(x: Hd, y: Hd, t: Hd) -> Hd {
    let one = Hd::constant(1.0);
    let sy = (PI * y).sin();
    x * (one - x) * sy * sy * (Hd::constant(2.0) + (PI * t).cos())
}

/// All first and second derivatives of a scalar function of `(x, y, t)`.
#[derive(Debug, Clone, Copy, Default)]
struct Jet {
    v: f64,
    g: [f64; 3],
    h: [[f64; 3]; 3],
}

fn jet(f: impl Fn(Hd, Hd, Hd) -> Hd, p: [f64; 3]) -> Jet {
    let mut out = Jet::default();
    for i in 0..3 {
        for j in i..3 {
            let arg = |m: usize| Hd {
                a: p[m],
                b: if m == i { 1.0 } else { 0.0 },
                c: if m == j { 1.0 } else { 0.0 },
                d: 0.0,
            };
            let r = f(arg(0), arg(1), arg(2));
            out.v = r.a;
            out.g[i] = r.b;
            out.g[j] = r.c;
            out.h[i][j] = r.d;
            out.h[j][i] = r.d;
        }
    }
    out
}

const X: usize = 0;
const Y: usize = 1;
const T: usize = 2;

/// Largest absolute residual of the first-order model equations, with
/// the sources and fields declared by `ex`, at `(x, t)`. Derivatives come
/// from hyper-dual evaluation of `u_s` and `p` only.
pub fn residual(ex: &Example1, x: [f64; 2], t: f64) -> f64 {
    residual_with(&ex.material, ex, x, t)
}

/// As [`residual`], with the equation coefficients taken from `m`.
pub fn residual_with(m: &MaterialParams, ex: &Example1, x: [f64; 2], t: f64) -> f64 {
    let p3 = [x[0], x[1], t];
    let u = [jet(|a, b, c| us(a, b, c)[0], p3), jet(|a, b, c| us(a, b, c)[1], p3)];
    let p = jet(pressure, p3);

    let strain = |dir: Option<usize>| -> [f64; 3] {
        let d = |c: usize, k: usize| match dir {
            None => u[c].g[k],
            Some(l) => u[c].h[k][l],
        };
        [d(0, X), d(1, Y), d(0, Y) + d(1, X)]
    };
    let ap = |dir: Option<usize>| m.alpha * dir.map_or(p.v, |l| p.g[l]);
    let stress = |dir: Option<usize>| {
        let s = matvec(&m.c, &strain(dir));
        [s[0] - ap(dir), s[1] - ap(dir), s[2]]
    };

    let sigma = stress(None);
    let (sx, sy) = (stress(Some(X)), stress(Some(Y)));
    let div_sigma = [sx[0] + sy[2], sx[2] + sy[1]];
    let vs = [u[0].g[T], u[1].g[T]];
    let dvs = [u[0].h[T][T], u[1].h[T][T]];
    let vf = [-p.g[X], -p.g[Y]];
    let dvf = [-p.h[X][T], -p.h[Y][T]];
    let div_vf = -(p.h[X][X] + p.h[Y][Y]);

    let mut worst: f64 = 0.0;
    let mut check = |r: f64| worst = worst.max(r.abs());

    let declared = ex.values(x, t);
    for i in 0..3 {
        check(declared[i] - sigma[i]);
    }
    for d in 0..2 {
        check(declared[3 + d] - vs[d]);
        check(declared[5 + d] - vf[d]);
    }
    check(declared[7] - p.v);

    let shifted = [sigma[0] + ap(None), sigma[1] + ap(None), sigma[2]];
    let strain_from_stress = matvec(&m.a, &shifted);
    let e = strain(None);
    for i in 0..3 {
        check(strain_from_stress[i] - e[i]);
    }

    let rate = stress(Some(T));
    let shifted_rate = [rate[0] + ap(Some(T)), rate[1] + ap(Some(T)), rate[2]];
    let a_rate = matvec(&m.a, &shifted_rate);
    let ev = strain(Some(T));
    for i in 0..3 {
        check(a_rate[i] - ev[i]);
    }

    let f = ex.body_force(x, t);
    let ff = ex.fluid_momentum_source(x, t);
    for d in 0..2 {
        check(m.rho11 * dvs[d] + m.rho12 * dvf[d] - div_sigma[d] - f[d]);
        let drag = m.drag[d][0] * vf[0] + m.drag[d][1] * vf[1];
        check(m.rho12 * dvs[d] + m.rho22[d] * dvf[d] + drag + p.g[d] - ff[d]);
    }
    let g = ex.fluid_source(x, t);
    check(m.s0 * p.g[T] + div_vf + m.alpha * (a_rate[0] + a_rate[1]) - g);
    worst
}
