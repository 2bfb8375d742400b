//! Gaussian pulse initial data.

use poro_hdg::timestep::InitialData;

use crate::config::{Component, PulseConfig};

/// `a0 exp(-((x - cx)/lx)^2 - ((y - cy)/ly)^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianPulse {
    pub a0: f64,
    pub lx: f64,
    pub ly: f64,
    pub center: [f64; 2],
}

impl GaussianPulse {
    /// Fails unless `lx, ly > 0`.
    pub fn new(a0: f64, lx: f64, ly: f64, center: [f64; 2]) -> Option<Self> {
        (lx > 0.0 && ly > 0.0).then_some(Self { a0, lx, ly, center })
    }

    pub fn value(&self, x: [f64; 2]) -> f64 {
        let u = (x[0] - self.center[0]) / self.lx;
        let v = (x[1] - self.center[1]) / self.ly;
        self.a0 * (-(u * u + v * v)).exp()
    }

    pub fn gradient(&self, x: [f64; 2]) -> [f64; 2] {
        let g = self.value(x);
        [
            -2.0 * (x[0] - self.center[0]) / (self.lx * self.lx) * g,
            -2.0 * (x[1] - self.center[1]) / (self.ly * self.ly) * g,
        ]
    }
}

/// The same pulse placed in each of `targets`; all other fields vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseData {
    pub pulse: GaussianPulse,
    pub targets: Vec<Component>,
}

impl PulseData {
    pub fn from_config(p: &PulseConfig) -> Option<Self> {
        Some(Self { pulse: GaussianPulse::new(p.a0, p.lx, p.ly, p.center)?, targets: p.targets.clone() })
    }

    fn on(&self, c: Component) -> bool {
        self.targets.contains(&c)
    }

    fn part(&self, c: Component, x: [f64; 2]) -> f64 {
        if self.on(c) {
            self.pulse.value(x)
        } else {
            0.0
        }
    }

    fn grad(&self, c: Component, x: [f64; 2]) -> [f64; 2] {
        if self.on(c) {
            self.pulse.gradient(x)
        } else {
            [0.0; 2]
        }
    }
}

impl InitialData for PulseData {
    fn stress(&self, x: [f64; 2]) -> [f64; 3] {
        [self.part(Component::SigmaXx, x), self.part(Component::SigmaYy, x), self.part(Component::SigmaXy, x)]
    }

    fn div_stress(&self, x: [f64; 2]) -> [f64; 2] {
        let (xx, yy, xy) =
            (self.grad(Component::SigmaXx, x), self.grad(Component::SigmaYy, x), self.grad(Component::SigmaXy, x));
        [xx[0] + xy[1], xy[0] + yy[1]]
    }

    fn solid_velocity(&self, x: [f64; 2]) -> [f64; 2] {
        [self.part(Component::VsX, x), self.part(Component::VsY, x)]
    }

    fn fluid_velocity(&self, x: [f64; 2]) -> [f64; 2] {
        [self.part(Component::VfX, x), self.part(Component::VfY, x)]
    }

    fn div_fluid_velocity(&self, x: [f64; 2]) -> f64 {
        self.grad(Component::VfX, x)[0] + self.grad(Component::VfY, x)[1]
    }

    fn pressure(&self, x: [f64; 2]) -> f64 {
        self.part(Component::P, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn peak_and_decay() {
        let g = GaussianPulse::new(1.0, 0.08, 0.08, [0.0, 0.0]).unwrap();
        assert_eq!(g.value([0.0, 0.0]), 1.0);
        assert!((g.value([0.08, 0.0]) - (-1.0f64).exp()).abs() < 1e-15);
        assert!(GaussianPulse::new(1.0, 0.0, 1.0, [0.0; 2]).is_none());
    }

    #[test]
    fn gradient_matches_difference_quotient() {
        let g = GaussianPulse::new(2.0, 0.3, 0.5, [0.1, -0.2]).unwrap();
        let x = [0.25, 0.1];
        let h = 1e-6;
        let fd = [
            (g.value([x[0] + h, x[1]]) - g.value([x[0] - h, x[1]])) / (2.0 * h),
            (g.value([x[0], x[1] + h]) - g.value([x[0], x[1] - h])) / (2.0 * h),
        ];
        let an = g.gradient(x);
        assert!((fd[0] - an[0]).abs() < 1e-8 && (fd[1] - an[1]).abs() < 1e-8);
    }
}
