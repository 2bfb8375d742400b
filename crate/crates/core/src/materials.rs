//! Poroelastic coefficient sets in Voigt notation.
//!
//! Stress and strain are stored as `(xx, yy, xy)`; the strain slot `xy` holds
//! the engineering shear `2 eps_xy`, so the compliance is the plain matrix
//! inverse of the stiffness. All values are SI.

use alloc::vec::Vec;
use faer::{Mat, Side};
#[allow(unused_imports)]
use num_traits::Float;

pub type Voigt = [[f64; 3]; 3];

/// Voigt image of the identity tensor.
pub const IDENTITY_VOIGT: [f64; 3] = [1.0, 1.0, 0.0];

pub const GPA: f64 = 1e9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MaterialError {
    #[error("Young modulus must be positive, got {0}")]
    NonPositiveYoung(f64),
    #[error("Poisson ratio must lie in (-1, 0.5), got {0}")]
    PoissonOutOfRange(f64),
    #[error("stiffness is not symmetric positive definite (smallest eigenvalue {0:e})")]
    NotSpd(f64),
    #[error("stiffness is singular")]
    Singular,
    #[error("density coercivity violated: rho0 = {0:e} <= 0")]
    DensityNotCoercive(f64),
    #[error("permeability must be positive when viscosity is positive, got {0:?}")]
    BadPermeability([f64; 2]),
    #[error("{name} must be nonnegative and finite, got {value}")]
    Negative { name: &'static str, value: f64 },
    #[error("unknown material {0:?}; available: sandstone-iso, glass-epoxy, sandstone-het, shale")]
    Unknown(alloc::string::String),
}

/// Plane-strain stiffness from Young modulus and Poisson ratio.
pub fn isotropic_stiffness(e: f64, nu: f64) -> Result<Voigt, MaterialError> {
    if !(e > 0.0) || !e.is_finite() {
        return Err(MaterialError::NonPositiveYoung(e));
    }
    if !(nu > -1.0 && nu < 0.5) {
        return Err(MaterialError::PoissonOutOfRange(nu));
    }
    let (lambda, mu) = lame(e, nu);
    Ok(voigt(lambda + 2.0 * mu, lambda, lambda + 2.0 * mu, mu))
}

/// Lamé parameters `(lambda, mu)`.
pub fn lame(e: f64, nu: f64) -> (f64, f64) {
    (e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)), e / (2.0 * (1.0 + nu)))
}

fn voigt(c11: f64, c13: f64, c33: f64, c55: f64) -> Voigt {
    [[c11, c13, 0.0], [c13, c33, 0.0], [0.0, 0.0, c55]]
}

/// Orthotropic stiffness `[[c11, c13, 0], [c13, c33, 0], [0, 0, c55]]`.
pub fn anisotropic_stiffness(c11: f64, c13: f64, c33: f64, c55: f64) -> Result<Voigt, MaterialError> {
    let c = voigt(c11, c13, c33, c55);
    check_spd(&c)?;
    Ok(c)
}

/// Smallest eigenvalue of a symmetric 3x3 matrix.
pub fn min_eigenvalue(c: &Voigt) -> f64 {
    let m = Mat::from_fn(3, 3, |i, j| c[i][j]);
    m.self_adjoint_eigenvalues(Side::Lower).map(|v| v[0]).unwrap_or(f64::NAN)
}

fn check_spd(c: &Voigt) -> Result<(), MaterialError> {
    let scale = c.iter().flatten().fold(0.0f64, |a, b| a.max(b.abs()));
    let asym = (0..3).flat_map(|i| (0..3).map(move |j| (i, j))).any(|(i, j)| (c[i][j] - c[j][i]).abs() > 1e-12 * scale);
    let lmin = min_eigenvalue(c);
    if asym || !(lmin > 0.0) {
        return Err(MaterialError::NotSpd(lmin));
    }
    Ok(())
}

/// Inverse of a Voigt stiffness.
pub fn compliance(c: &Voigt) -> Result<Voigt, MaterialError> {
    check_spd(c).map_err(|e| match e {
        MaterialError::NotSpd(l) if l == 0.0 => MaterialError::Singular,
        e => e,
    })?;
    let cof = |r0: usize, r1: usize, c0: usize, c1: usize| c[r0][c0] * c[r1][c1] - c[r0][c1] * c[r1][c0];
    let det = c[0][0] * cof(1, 2, 1, 2) - c[0][1] * cof(1, 2, 0, 2) + c[0][2] * cof(1, 2, 0, 1);
    if det == 0.0 || !det.is_finite() {
        return Err(MaterialError::Singular);
    }
    let mut a = [[0.0; 3]; 3];
    for (i, row) in a.iter_mut().enumerate() {
        for (j, aij) in row.iter_mut().enumerate() {
            // adjugate: transpose of the cofactor matrix
            let (r0, r1) = others(j);
            let (c0, c1) = others(i);
            let sign = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
            *aij = sign * cof(r0, r1, c0, c1) / det;
        }
    }
    // one step of iterative refinement: A <- A (2I - C A)
    let ca = matmul(c, &a);
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            r[i][j] = if i == j { 2.0 } else { 0.0 } - ca[i][j];
        }
    }
    let mut a = matmul(&a, &r);
    for i in 0..3 {
        for j in 0..i {
            let s = 0.5 * (a[i][j] + a[j][i]);
            a[i][j] = s;
            a[j][i] = s;
        }
    }
    Ok(a)
}

fn others(i: usize) -> (usize, usize) {
    match i {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    }
}

pub fn matmul(a: &Voigt, b: &Voigt) -> Voigt {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|m| a[i][m] * b[m][j]).sum();
        }
    }
    c
}

pub fn matvec(a: &Voigt, x: &[f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| a[i][0] * x[0] + a[i][1] * x[1] + a[i][2] * x[2])
}

/// Returns `rho0`, the smallest eigenvalue of `rho11 rho22 - rho12^2 I`.
pub fn validate_densities(rho11: f64, rho12: f64, rho22: [f64; 2]) -> Result<f64, MaterialError> {
    for (name, value) in [("rho11", rho11), ("rho22_x", rho22[0]), ("rho22_y", rho22[1])] {
        if !(value >= 0.0) || !value.is_finite() {
            return Err(MaterialError::Negative { name, value });
        }
    }
    if !rho12.is_finite() {
        return Err(MaterialError::Negative { name: "rho12", value: rho12 });
    }
    let rho0 = (rho11 * rho22[0]).min(rho11 * rho22[1]) - rho12 * rho12;
    if !(rho0 > 0.0) {
        return Err(MaterialError::DensityNotCoercive(rho0));
    }
    Ok(rho0)
}

/// `eta kappa^{-1}` for a diagonal permeability.
pub fn drag_matrix(eta: f64, kappa: [f64; 2]) -> Result<[[f64; 2]; 2], MaterialError> {
    if !(eta >= 0.0) || !eta.is_finite() {
        return Err(MaterialError::Negative { name: "eta", value: eta });
    }
    if eta == 0.0 {
        return Ok([[0.0; 2]; 2]);
    }
    if !(kappa[0] > 0.0 && kappa[1] > 0.0) {
        return Err(MaterialError::BadPermeability(kappa));
    }
    Ok([[eta / kappa[0], 0.0], [0.0, eta / kappa[1]]])
}

/// Table entries that the solver does not consume.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Provenance {
    pub porosity: f64,
    pub k_solid: f64,
    pub k_fluid: f64,
    pub k_drained: f64,
    pub eta: f64,
    pub kappa: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaterialParams {
    pub c: Voigt,
    pub a: Voigt,
    pub alpha: f64,
    pub s0: f64,
    pub rho11: f64,
    pub rho12: f64,
    /// Diagonal of `rho22`.
    pub rho22: [f64; 2],
    pub drag: [[f64; 2]; 2],
    pub rho0: f64,
    pub provenance: Option<Provenance>,
}

impl MaterialParams {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        c: Voigt,
        alpha: f64,
        s0: f64,
        rho11: f64,
        rho12: f64,
        rho22: [f64; 2],
        drag: [[f64; 2]; 2],
    ) -> Result<Self, MaterialError> {
        let a = compliance(&c)?;
        for (name, value) in [("alpha", alpha), ("s0", s0)] {
            if !(value >= 0.0) || !value.is_finite() {
                return Err(MaterialError::Negative { name, value });
            }
        }
        let rho0 = validate_densities(rho11, rho12, rho22)?;
        let d = drag;
        let tr = d[0][0] + d[1][1];
        let det = d[0][0] * d[1][1] - d[0][1] * d[1][0];
        if (d[0][1] - d[1][0]).abs() > 1e-12 * tr.abs() || tr < 0.0 || det < -1e-12 * tr * tr {
            return Err(MaterialError::Negative { name: "drag eigenvalue", value: det });
        }
        Ok(Self { c, a, alpha, s0, rho11, rho12, rho22, drag, rho0, provenance: None })
    }

    /// Parameter set of the manufactured-solution example:
    /// `rho = (1, 1, 2)`, `eta = kappa = alpha = s0 = 1`.
    pub fn example1(e: f64, nu: f64) -> Result<Self, MaterialError> {
        let c = isotropic_stiffness(e, nu)?;
        Self::new(c, 1.0, 1.0, 1.0, 1.0, [2.0, 2.0], drag_matrix(1.0, [1.0, 1.0])?)
    }

    /// Built-in library: `sandstone-iso`, `glass-epoxy`, `sandstone-het`,
    /// `shale`.
    pub fn library(name: &str) -> Result<Self, MaterialError> {
        let t = LIBRARY
            .iter()
            .find(|t| t.name == name)
            .ok_or_else(|| MaterialError::Unknown(alloc::string::String::from(name)))?;
        t.params()
    }

    /// `A m` with `m` the Voigt identity.
    pub fn a_identity(&self) -> [f64; 3] {
        matvec(&self.a, &IDENTITY_VOIGT)
    }

    /// `m^T A m`.
    pub fn identity_compliance(&self) -> f64 {
        let am = self.a_identity();
        am[0] + am[1]
    }

    /// Mass matrix of the undamped first-order system in the unknown order
    /// `(sigma_xx, sigma_yy, sigma_xy, vs_x, vs_y, vf_x, vf_y, p)`.
    pub fn energy_matrix(&self) -> [[f64; 8]; 8] {
        let mut m = [[0.0; 8]; 8];
        let am = self.a_identity();
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] = self.a[i][j];
            }
            m[i][7] = self.alpha * am[i];
            m[7][i] = self.alpha * am[i];
        }
        m[7][7] = self.alpha * self.alpha * self.identity_compliance() + self.s0;
        for d in 0..2 {
            m[3 + d][3 + d] = self.rho11;
            m[3 + d][5 + d] = self.rho12;
            m[5 + d][3 + d] = self.rho12;
            m[5 + d][5 + d] = self.rho22[d];
        }
        m
    }

    /// Plane-wave phase speeds (nonnegative, ascending) of the undamped
    /// system along the unit direction `n`.
    pub fn wave_speeds(&self, n: [f64; 2]) -> Vec<f64> {
        let m = self.energy_matrix();
        let mut a = [[0.0; 8]; 8];
        let b = [[n[0], 0.0], [0.0, n[1]], [n[1], n[0]]];
        for i in 0..3 {
            for d in 0..2 {
                a[i][3 + d] = b[i][d];
                a[3 + d][i] = b[i][d];
            }
        }
        for d in 0..2 {
            a[5 + d][7] = n[d];
            a[7][5 + d] = n[d];
        }
        let mm = Mat::from_fn(8, 8, |i, j| m[i][j]);
        let llt = match mm.llt(Side::Lower) {
            Ok(l) => l,
            Err(_) => return Vec::new(),
        };
        let l = llt.L();
        // W = L^{-1}, forward substitution column by column
        let mut w = [[0.0; 8]; 8];
        for col in 0..8 {
            for i in 0..8 {
                let mut s = if i == col { 1.0 } else { 0.0 };
                for j in 0..i {
                    s -= l[(i, j)] * w[j][col];
                }
                w[i][col] = s / l[(i, i)];
            }
        }
        let s = Mat::from_fn(8, 8, |i, j| {
            let mut acc = 0.0;
            for p in 0..8 {
                for q in 0..8 {
                    acc += w[i][p] * a[p][q] * w[j][q];
                }
            }
            acc
        });
        let mut speeds: Vec<f64> =
            s.self_adjoint_eigenvalues(Side::Lower).unwrap_or_default().into_iter().map(f64::abs).collect();
        speeds.sort_by(|x, y| x.total_cmp(y));
        speeds
    }

    /// Fastest phase speed over 64 directions.
    pub fn max_wave_speed(&self) -> f64 {
        (0..64)
            .map(|i| {
                let th = core::f64::consts::PI * i as f64 / 64.0;
                self.wave_speeds([th.cos(), th.sin()]).last().copied().unwrap_or(0.0)
            })
            .fold(0.0, f64::max)
    }

    /// Mean of the diagonal of `rho22`.
    pub fn fluid_density(&self) -> f64 {
        0.5 * (self.rho22[0] + self.rho22[1])
    }
}

/// One column of the built-in parameter table, in the table's own units
/// (GPa, GPa^-1, kg/m^3, m^2, Pa s).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableEntry {
    pub name: &'static str,
    pub c11: f64,
    pub c13: f64,
    pub c33: f64,
    pub c55: f64,
    pub s0: f64,
    pub alpha: f64,
    pub rho11: f64,
    pub rho12: f64,
    pub rho22: [f64; 2],
    pub kappa: [f64; 2],
    pub eta: f64,
    pub porosity: f64,
    pub k_solid: f64,
    pub k_fluid: f64,
    pub k_drained: f64,
}

impl TableEntry {
    pub fn params(&self) -> Result<MaterialParams, MaterialError> {
        let c = anisotropic_stiffness(self.c11 * GPA, self.c13 * GPA, self.c33 * GPA, self.c55 * GPA)?;
        let drag = drag_matrix(self.eta, self.kappa)?;
        let mut p = MaterialParams::new(c, self.alpha, self.s0 / GPA, self.rho11, self.rho12, self.rho22, drag)?;
        p.provenance = Some(Provenance {
            porosity: self.porosity,
            k_solid: self.k_solid * GPA,
            k_fluid: self.k_fluid * GPA,
            k_drained: self.k_drained * GPA,
            eta: self.eta,
            kappa: self.kappa,
        });
        Ok(p)
    }
}

pub const LIBRARY: [TableEntry; 4] = [
    TableEntry {
        name: "sandstone-iso",
        c11: 36.0,
        c13: 12.0,
        c33: 36.0,
        c55: 12.0,
        s0: 8.75e-2,
        alpha: 0.5,
        rho11: 2208.0,
        rho12: 1040.0,
        rho22: [10400.0, 18720.0],
        kappa: [6e-13, 1e-13],
        eta: 1e-3,
        porosity: 0.2,
        k_solid: 40.0,
        k_fluid: 2.5,
        k_drained: 20.0,
    },
    TableEntry {
        name: "glass-epoxy",
        c11: 39.4,
        c13: 1.2,
        c33: 13.1,
        c55: 3.0,
        s0: 9.8e-2,
        alpha: 0.92,
        rho11: 1660.0,
        rho12: 1040.0,
        rho22: [10400.0, 18720.0],
        kappa: [6e-13, 1e-13],
        eta: 1e-3,
        porosity: 0.2,
        k_solid: 40.0,
        k_fluid: 2.5,
        k_drained: 3.2,
    },
    TableEntry {
        name: "sandstone-het",
        c11: 36.0,
        c13: 12.0,
        c33: 36.0,
        c55: 12.0,
        s0: 8.75e-2,
        alpha: 0.5,
        rho11: 2208.0,
        rho12: 1040.0,
        rho22: [10400.0, 10400.0],
        kappa: [6e-13, 6e-13],
        eta: 0.0,
        porosity: 0.2,
        k_solid: 40.0,
        k_fluid: 2.5,
        k_drained: 20.0,
    },
    TableEntry {
        name: "shale",
        c11: 11.9,
        c13: 3.9,
        c33: 11.9,
        c55: 3.9,
        s0: 6.03e-2,
        alpha: 0.13,
        rho11: 2022.8,
        rho12: 1040.0,
        rho22: [13000.0, 13000.0],
        kappa: [1e-13, 1e-13],
        eta: 0.0,
        porosity: 0.16,
        k_solid: 7.6,
        k_fluid: 2.5,
        k_drained: 6.6,
    },
];

/// Per-region material assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct MaterialField {
    pub regions: Vec<MaterialParams>,
    pub element_region: Vec<usize>,
}

impl MaterialField {
    pub fn uniform(params: MaterialParams, num_elements: usize) -> Self {
        Self { regions: alloc::vec![params], element_region: alloc::vec![0; num_elements] }
    }

    /// Fails if an element references an undefined region.
    pub fn new(regions: Vec<MaterialParams>, element_region: Vec<usize>) -> Result<Self, usize> {
        if let Some(e) = element_region.iter().position(|&r| r >= regions.len()) {
            return Err(e);
        }
        Ok(Self { regions, element_region })
    }

    pub fn get(&self, element: usize) -> &MaterialParams {
        &self.regions[self.element_region[element]]
    }

    pub fn num_elements(&self) -> usize {
        self.element_region.len()
    }
}
