//! Conservative and primitive flow states.

use crate::vec3::Vec3;
use crate::{CgksError, Result};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

/// Conservative variables per unit volume: density, momentum, total energy.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Conserved(pub [f64; 5]);

impl Conserved {
    pub const ZERO: Conserved = Conserved([0.0; 5]);

    #[inline]
    pub fn new(rho: f64, mom: Vec3, ene: f64) -> Self {
        Conserved([rho, mom[0], mom[1], mom[2], ene])
    }

    /// Build from primitive variables (density, velocity, pressure).
    pub fn from_primitive(rho: f64, vel: Vec3, p: f64, gamma: f64) -> Self {
        let ke = 0.5 * rho * (vel[0] * vel[0] + vel[1] * vel[1] + vel[2] * vel[2]);
        Conserved([
            rho,
            rho * vel[0],
            rho * vel[1],
            rho * vel[2],
            p / (gamma - 1.0) + ke,
        ])
    }

    #[inline]
    pub fn rho(&self) -> f64 {
        self.0[0]
    }

    #[inline]
    pub fn momentum(&self) -> Vec3 {
        [self.0[1], self.0[2], self.0[3]]
    }

    #[inline]
    pub fn energy(&self) -> f64 {
        self.0[4]
    }

    #[inline]
    pub fn velocity(&self) -> Vec3 {
        let inv = 1.0 / self.0[0];
        [self.0[1] * inv, self.0[2] * inv, self.0[3] * inv]
    }

    /// Internal energy per unit volume, `rho E - 1/2 rho |U|^2`.
    #[inline]
    pub fn internal_energy(&self) -> f64 {
        let m = self.momentum();
        self.0[4] - 0.5 * (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]) / self.0[0]
    }

    #[inline]
    pub fn pressure(&self, gamma: f64) -> f64 {
        (gamma - 1.0) * self.internal_energy()
    }

    #[inline]
    pub fn sound_speed(&self, gamma: f64) -> f64 {
        (gamma * self.pressure(gamma) / self.rho()).sqrt()
    }

    /// A state is physical when density and internal energy are positive.
    #[inline]
    pub fn is_physical(&self) -> bool {
        self.0[0] > 0.0 && self.internal_energy() > 0.0 && self.0.iter().all(|v| v.is_finite())
    }

    pub fn check_physical(&self, context: &'static str) -> Result<()> {
        if !self.0[0].is_finite() || self.0[0] <= 0.0 {
            return Err(CgksError::NonPhysical {
                context,
                component: "density",
                value: self.0[0],
            });
        }
        let ie = self.internal_energy();
        if !ie.is_finite() || ie <= 0.0 {
            return Err(CgksError::NonPhysical {
                context,
                component: "internal energy",
                value: ie,
            });
        }
        Ok(())
    }

    /// Exact Euler flux along the x1 direction of this state's frame.
    pub fn euler_flux_x(&self, gamma: f64) -> Conserved {
        let u = self.velocity();
        let p = self.pressure(gamma);
        Conserved([
            self.0[1],
            self.0[1] * u[0] + p,
            self.0[2] * u[0],
            self.0[3] * u[0],
            (self.0[4] + p) * u[0],
        ])
    }

    #[inline]
    pub fn abs_max(&self) -> f64 {
        self.0.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

impl Add for Conserved {
    type Output = Conserved;
    #[inline]
    fn add(self, o: Conserved) -> Conserved {
        let mut r = self.0;
        for i in 0..5 {
            r[i] += o.0[i];
        }
        Conserved(r)
    }
}

impl Sub for Conserved {
    type Output = Conserved;
    #[inline]
    fn sub(self, o: Conserved) -> Conserved {
        let mut r = self.0;
        for i in 0..5 {
            r[i] -= o.0[i];
        }
        Conserved(r)
    }
}

impl Mul<f64> for Conserved {
    type Output = Conserved;
    #[inline]
    fn mul(self, s: f64) -> Conserved {
        let mut r = self.0;
        for v in &mut r {
            *v *= s;
        }
        Conserved(r)
    }
}

impl Neg for Conserved {
    type Output = Conserved;
    #[inline]
    fn neg(self) -> Conserved {
        self * -1.0
    }
}

impl AddAssign for Conserved {
    #[inline]
    fn add_assign(&mut self, o: Conserved) {
        for i in 0..5 {
            self.0[i] += o.0[i];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primitive_round_trip() {
        let w = Conserved::from_primitive(1.2, [0.3, -0.1, 0.7], 2.5, 1.4);
        assert!((w.pressure(1.4) - 2.5).abs() < 1e-14);
        let v = w.velocity();
        assert!((v[0] - 0.3).abs() < 1e-14 && (v[2] - 0.7).abs() < 1e-14);
    }

    #[test]
    fn physicality_rejects_vacuum_energy() {
        let w = Conserved([1.0, 2.0, 0.0, 0.0, 1.9]);
        assert!(!w.is_physical());
        assert!(w.check_physical("test").is_err());
    }

    #[test]
    fn euler_flux_of_rest_state() {
        let w = Conserved::from_primitive(1.0, [0.0; 3], 1.0, 1.4);
        let f = w.euler_flux_x(1.4);
        assert_eq!(f.0, [0.0, 1.0, 0.0, 0.0, 0.0]);
    }
}
