use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::d_gamma;

/// Minimum distance of `gamma` from the integers.
pub const INTEGER_MARGIN: f64 = 1e-3;

/// Parameter bundle shared by every route to the fractional operator.
///
/// `k = floor(gamma)`, `m_k = 2k + 1 - 2 gamma` is the weight exponent of the
/// order-`2k+2` extension, and `s = n/2 + gamma` is the spectral parameter of
/// the Poisson problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FracParams {
    pub n: u32,
    pub gamma: f64,
    pub k: u32,
    pub m_k: f64,
    pub s: f64,
    pub d_gamma: f64,
}

impl FracParams {
    /// Builds the bundle, enforcing `0 < gamma < n/2` and the integer margin.
    pub fn new(n: u32, gamma: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("dimension n must be positive".into()));
        }
        if !(gamma > 0.0 && gamma < f64::from(n) / 2.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma = {gamma} must lie in (0, n/2) = (0, {})",
                f64::from(n) / 2.0
            )));
        }
        Self::unchecked_range(n, gamma)
    }

    /// Same as [`FracParams::new`] but without the `gamma < n/2` bound.
    ///
    /// The mode arithmetic of the flat model does not depend on `n`; this is
    /// used where only the constants matter.
    pub fn unchecked_range(n: u32, gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter(format!("gamma = {gamma} must be positive")));
        }
        if (gamma - gamma.round()).abs() <= INTEGER_MARGIN {
            return Err(Error::IntegerGamma(gamma));
        }
        let k = gamma.floor() as u32;
        Ok(Self {
            n,
            gamma,
            k,
            m_k: 2.0 * f64::from(k) + 1.0 - 2.0 * gamma,
            s: f64::from(n) / 2.0 + gamma,
            d_gamma: d_gamma(gamma)?,
        })
    }

    /// Scales the stored `d_gamma` (fault injection for sensitivity checks).
    pub fn with_d_gamma_scale(mut self, scale: f64) -> Self {
        self.d_gamma *= scale;
        self
    }

    /// Weight exponent `m_0 = 1 - 2 gamma` of the second-order extension.
    pub fn m0(&self) -> f64 {
        1.0 - 2.0 * self.gamma
    }

    /// `m_j = m_0 + 2j`.
    pub fn m(&self, j: u32) -> f64 {
        self.m0() + 2.0 * f64::from(j)
    }

    /// `s (n - s)`, equal to `n^2/4 - gamma^2`.
    pub fn spectral_shift(&self) -> f64 {
        self.s * (f64::from(self.n) - self.s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_fields() {
        let p = FracParams::new(4, 1.5).unwrap();
        assert_eq!(p.k, 1);
        assert!((p.m_k - 0.0).abs() < 1e-15);
        assert!((p.s - 3.5).abs() < 1e-15);
        assert!((p.d_gamma - 3.0).abs() < 1e-12);
        let shift = 4.0 - 1.5 * 1.5;
        assert!((p.spectral_shift() - shift).abs() < 1e-14);
    }

    #[test]
    fn m_k_in_open_unit_interval() {
        for &g in &[0.3, 0.75, 1.25, 1.99, 2.5, 3.1] {
            let p = FracParams::unchecked_range(8, g).unwrap();
            assert!(p.m_k > -1.0 && p.m_k < 1.0, "gamma {g} m_k {}", p.m_k);
        }
    }

    #[test]
    fn rejects_integers_and_range() {
        assert!(matches!(FracParams::new(4, 1.0), Err(Error::IntegerGamma(_))));
        assert!(matches!(FracParams::new(4, 1.0005), Err(Error::IntegerGamma(_))));
        assert!(FracParams::new(4, 1.002).is_ok());
        assert!(FracParams::new(2, 1.5).is_err());
        assert!(FracParams::new(2, -0.5).is_err());
        assert!(FracParams::unchecked_range(2, 2.5).is_ok());
    }
}
