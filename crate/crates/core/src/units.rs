//! CGS physical estimates: coupling constant, Rabi frequency from laser
//! intensity, group velocities and the fast/slow arrival delay.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reduced Planck constant, erg·s.
pub const HBAR_CGS: f64 = 1.0546e-27;
/// Speed of light, cm/s.
pub const C_CGS: f64 = 2.9979e10;
/// 1 mW/cm² expressed in erg·s⁻¹·cm⁻².
pub const MW_PER_CM2: f64 = 1.0e4;

/// Medium parameters in CGS units. The coupling G is always recomputed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediumParams {
    /// Transition dipole moment, esu·cm.
    pub d: f64,
    /// Wave number, cm⁻¹.
    pub k: f64,
    /// Number density, cm⁻³.
    pub n: f64,
    /// erg·s.
    pub hbar: f64,
    /// cm/s.
    pub c: f64,
}

impl MediumParams {
    pub fn new(d: f64, k: f64, n: f64) -> Result<Self> {
        Self::with_constants(d, k, n, HBAR_CGS, C_CGS)
    }

    pub fn with_constants(d: f64, k: f64, n: f64, hbar: f64, c: f64) -> Result<Self> {
        let p = Self { d, k, n, hbar, c };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [("d", self.d), ("k", self.k), ("n", self.n), ("hbar", self.hbar), ("c", self.c)];
        for (name, v) in fields {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} is not finite")));
            }
        }
        if self.d < 0.0 {
            return Err(Error::Domain("dipole moment must be non-negative".into()));
        }
        for (name, v) in &fields[1..] {
            if *v <= 0.0 {
                return Err(Error::Domain(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// G = 2π k n d² / ħ, in s⁻¹·cm⁻¹.
    pub fn coupling(&self) -> f64 {
        coupling_constant(self.d, self.k, self.n, self.hbar)
            .expect("validated parameters give a finite coupling")
    }
}

/// G = 2π k n d² / ħ.
pub fn coupling_constant(d: f64, k: f64, n: f64, hbar: f64) -> Result<f64> {
    if ![d, k, n, hbar].iter().all(|v| v.is_finite()) {
        return Err(Error::Domain("coupling inputs must be finite".into()));
    }
    if hbar <= 0.0 {
        return Err(Error::Domain("hbar must be positive".into()));
    }
    Ok(2.0 * std::f64::consts::PI * k * n * d * d / hbar)
}

/// Rabi frequency Ω = d·E/ħ for a wave of intensity `intensity`
/// (erg·s⁻¹·cm⁻²), with the field written as E·exp(i…) + c.c. so that
/// I = c|E|²/(2π).
pub fn rabi_from_intensity(intensity: f64, d: f64, p: &MediumParams) -> Result<f64> {
    if !intensity.is_finite() || intensity < 0.0 {
        return Err(Error::Domain(format!("intensity must be finite and >= 0, got {intensity}")));
    }
    let field = (2.0 * std::f64::consts::PI * intensity / p.c).sqrt();
    Ok(d * field / p.hbar)
}

/// Which propagation class a group velocity refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VelocityClass {
    /// Dark-state polariton class, v = (1/c + G/Ω²)⁻¹.
    Slow,
    /// Free propagation at c.
    Fast,
    /// Equal mixture of the two dark states, v = (1/c + G/(2Ω²))⁻¹.
    Mixed,
}

/// Group velocity in cm/s.
pub fn group_velocity(omega: f64, g: f64, c: f64, class: VelocityClass) -> Result<f64> {
    let weight = match class {
        VelocityClass::Fast => return Ok(c),
        VelocityClass::Slow => 1.0,
        VelocityClass::Mixed => 0.5,
    };
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("{class:?} group velocity needs omega > 0")));
    }
    Ok(1.0 / (1.0 / c + weight * g / (omega * omega)))
}

/// Extra transit time over `length` at velocity `v` compared to light in vacuum.
pub fn delay(length: f64, v: f64, c: f64) -> f64 {
    length * (1.0 / v - 1.0 / c)
}

/// The chain of estimates from medium parameters and total laser intensity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitsEstimate {
    pub coupling: f64,
    pub rabi: f64,
    /// Ω²/G, cm/s.
    pub omega_sq_over_g: f64,
    pub slow_velocity: f64,
    pub slow_velocity_over_c: f64,
    pub mixed_velocity: f64,
    /// Fast/slow arrival separation over `length`, s.
    pub delay: f64,
    pub length: f64,
}

/// Evaluates the estimate chain for intensity in erg·s⁻¹·cm⁻² and length in cm.
pub fn estimate(p: &MediumParams, intensity: f64, length: f64) -> Result<UnitsEstimate> {
    if !(length >= 0.0) {
        return Err(Error::Domain("length must be non-negative".into()));
    }
    let coupling = p.coupling();
    let rabi = rabi_from_intensity(intensity, p.d, p)?;
    let slow = group_velocity(rabi, coupling, p.c, VelocityClass::Slow)?;
    let mixed = group_velocity(rabi, coupling, p.c, VelocityClass::Mixed)?;
    Ok(UnitsEstimate {
        coupling,
        rabi,
        omega_sq_over_g: rabi * rabi / coupling,
        slow_velocity: slow,
        slow_velocity_over_c: slow / p.c,
        mixed_velocity: mixed,
        delay: delay(length, slow, p.c),
        length,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn coupling_examples() {
        let g = coupling_constant(1e-18, 1e5, 1e12, 1.0546e-27).unwrap();
        // 2π·1e5·1e12·1e-36 / 1.0546e-27
        assert_relative_eq!(g, 5.957_885e8, max_relative = 1e-6);
        assert_eq!(coupling_constant(0.0, 1e5, 1e12, HBAR_CGS).unwrap(), 0.0);
        let g2 = coupling_constant(1e-18, 1e5, 2e12, HBAR_CGS).unwrap();
        assert_relative_eq!(g2, 2.0 * g, max_relative = 1e-15);
        assert!(coupling_constant(f64::NAN, 1.0, 1.0, 1.0).is_err());
        assert!(coupling_constant(1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn medium_validation() {
        assert!(MediumParams::new(0.0, 1e5, 1e12).is_ok());
        assert!(MediumParams::new(-1e-18, 1e5, 1e12).is_err());
        assert!(MediumParams::new(1e-18, 0.0, 1e12).is_err());
        assert!(MediumParams::new(1e-18, 1e5, f64::INFINITY).is_err());
        assert_eq!(MediumParams::new(0.0, 1e5, 1e12).unwrap().coupling(), 0.0);
    }

    #[test]
    fn rabi_from_intensity_examples() {
        let p = MediumParams::new(1e-18, 1e5, 1e12).unwrap();
        let omega = rabi_from_intensity(3.0 * MW_PER_CM2, 1e-18, &p).unwrap();
        assert_relative_eq!(omega, 2.4e6, max_relative = 0.02);
        assert_eq!(rabi_from_intensity(0.0, 1e-18, &p).unwrap(), 0.0);
        let o4 = rabi_from_intensity(12.0 * MW_PER_CM2, 1e-18, &p).unwrap();
        assert_relative_eq!(o4, 2.0 * omega, max_relative = 1e-14);
        assert!(rabi_from_intensity(-1.0, 1e-18, &p).is_err());
    }

    #[test]
    fn group_velocity_examples() {
        let (omega, g) = (2.4e6, 5.96e8);
        let v = group_velocity(omega, g, C_CGS, VelocityClass::Slow).unwrap();
        assert_relative_eq!(omega * omega / g, 9.66e3, max_relative = 1e-3);
        assert_relative_eq!(v, 1e4, max_relative = 0.05);
        assert_relative_eq!(v / C_CGS, 0.3e-6, max_relative = 0.1);
        assert_relative_eq!(delay(3.0, 1e4, C_CGS), 3e-4, max_relative = 1e-5);
        let fast = group_velocity(omega, 0.0, C_CGS, VelocityClass::Slow).unwrap();
        assert_relative_eq!(fast, C_CGS, max_relative = 1e-15);
        assert_eq!(group_velocity(0.0, g, C_CGS, VelocityClass::Fast).unwrap(), C_CGS);
        assert!(group_velocity(0.0, g, C_CGS, VelocityClass::Slow).is_err());
        assert!(group_velocity(0.0, g, C_CGS, VelocityClass::Mixed).is_err());
        let mixed = group_velocity(omega, g, C_CGS, VelocityClass::Mixed).unwrap();
        assert!(mixed > v && mixed < C_CGS);
    }
}
