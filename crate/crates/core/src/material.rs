use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lamé constants, density and angular frequency of a homogeneous medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub lambda: f64,
    pub mu: f64,
    pub rho: f64,
    pub kappa: f64,
}

impl MaterialParams {
    pub fn new(lambda: f64, mu: f64, rho: f64, kappa: f64) -> Result<Self> {
        let p = Self { lambda, mu, rho, kappa };
        p.validate()?;
        Ok(p)
    }

    /// `lambda > 0`, `mu > 0`, `rho > 0`, `kappa >= 0` (zero gives the static
    /// limit).
    pub fn validate(&self) -> Result<()> {
        let checks = [
            ("lambda", self.lambda, self.lambda > 0.0),
            ("mu", self.mu, self.mu > 0.0),
            ("rho", self.rho, self.rho > 0.0),
            ("kappa", self.kappa, self.kappa >= 0.0),
        ];
        for (name, value, ok) in checks {
            if !ok || !value.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} = {value} is out of range")));
            }
        }
        Ok(())
    }

    /// `lambda + 2 mu`, the P-wave modulus.
    pub fn p_modulus(&self) -> f64 {
        self.lambda + 2.0 * self.mu
    }

    pub fn kappa_p_squared(&self) -> f64 {
        self.rho * self.kappa * self.kappa / self.p_modulus()
    }

    pub fn kappa_s_squared(&self) -> f64 {
        self.rho * self.kappa * self.kappa / self.mu
    }

    pub fn kappa_p(&self) -> f64 {
        self.kappa_p_squared().sqrt()
    }

    pub fn kappa_s(&self) -> f64 {
        self.kappa_s_squared().sqrt()
    }

    /// Unit parameters of the polynomial patch test.
    pub const UNIT: MaterialParams = MaterialParams {
        lambda: 1.0,
        mu: 1.0,
        rho: 1.0,
        kappa: 1.0,
    };

    /// Sandstone at 20 kHz angular frequency.
    pub const SANDSTONE: MaterialParams = MaterialParams {
        lambda: 1.715e10,
        mu: 5.168e8,
        rho: 2320.0,
        kappa: 2e4,
    };
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn unit_wave_numbers() {
        let m = MaterialParams::UNIT;
        assert_relative_eq!(m.kappa_p_squared(), 1.0 / 3.0, epsilon = 1e-15);
        assert_relative_eq!(m.kappa_s_squared(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn sandstone_wave_numbers() {
        let m = MaterialParams::SANDSTONE;
        assert!((m.kappa_p() - 7.144).abs() < 1e-3, "{}", m.kappa_p());
        assert!((m.kappa_s() - 42.38).abs() < 1e-2, "{}", m.kappa_s());
    }

    #[test]
    fn static_limit_has_no_mass_terms() {
        let m = MaterialParams::new(2.0, 1.0, 1.0, 0.0).unwrap();
        assert_eq!(m.kappa_p_squared(), 0.0);
        assert_eq!(m.kappa_s_squared(), 0.0);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(MaterialParams::new(0.0, 1.0, 1.0, 1.0).is_err());
        assert!(MaterialParams::new(1.0, -1.0, 1.0, 1.0).is_err());
        assert!(MaterialParams::new(1.0, 1.0, 1.0, f64::NAN).is_err());
    }

    proptest! {
        #[test]
        fn shear_wave_number_exceeds_pressure(l in 1e-3f64..1e3, mu in 1e-3f64..1e3, rho in 1e-3f64..1e3, k in 1e-3f64..1e3) {
            let m = MaterialParams::new(l, mu, rho, k).unwrap();
            prop_assert!(m.kappa_s() > m.kappa_p());
        }
    }
}
