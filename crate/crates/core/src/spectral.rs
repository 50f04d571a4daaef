//! Mode-lattice primitives: lattice indices, pulse parameters, the decay rate
//! `kappa` of each Laplace mode and the coupling coefficient `B = 1/(kappa-1)`.
//!
//! Mode `(m, n)` sits at the Laplace point `p = i sigma + m lambda + i n omega`.
//! Its spatial decay rate is the principal root
//! `kappa = sqrt(sigma + n omega - i m lambda)`, which lies in the closed
//! fourth quadrant for every `m >= 0`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ModeIndex {
    /// Multiples of the damping rate.
    pub m: i64,
    /// Multiples of the driving frequency.
    pub n: i64,
}

impl ModeIndex {
    pub const fn new(m: i64, n: i64) -> Self {
        Self { m, n }
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.m, self.n)
    }
}

/// Physical parameters of the pulse `A(t) = alpha exp(-lambda t)` at
/// angular frequency `omega`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseParams {
    pub lambda: f64,
    pub omega: f64,
    pub alpha: f64,
    /// Base spectral point, `1 - floor(1/omega) omega` (1 for `omega > 1` or
    /// `omega = 0`).
    pub sigma0: f64,
}

impl PulseParams {
    pub fn new(lambda: f64, omega: f64, alpha: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must be finite and >= 0, got {lambda}"
            )));
        }
        if !(omega.is_finite() && omega >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "omega must be finite and >= 0, got {omega}"
            )));
        }
        if !alpha.is_finite() {
            return Err(Error::InvalidParameter(format!("alpha must be finite, got {alpha}")));
        }
        let sigma0 = if omega > 0.0 {
            1.0 - resonant_shift(omega) as f64 * omega
        } else {
            1.0
        };
        Ok(Self {
            lambda,
            omega,
            alpha,
            sigma0,
        })
    }

    /// Column `n0` of the resonant mode: `sigma0 + n0 omega = 1`.
    pub fn resonant_n(&self) -> i64 {
        if self.omega > 0.0 {
            resonant_shift(self.omega)
        } else {
            0
        }
    }

    pub fn resonant_index(&self) -> ModeIndex {
        ModeIndex::new(0, self.resonant_n())
    }

    /// Outside the `omega > 1` / `omega = 0` regime the base point differs
    /// from 1 and mode columns are shifted by `resonant_n`.
    pub fn is_shifted(&self) -> bool {
        self.resonant_n() != 0
    }

    /// `sigma0 + n omega - i m lambda`, written as
    /// `1 + (n - n0) omega - i m lambda` so the resonant radicand is exactly 1.
    pub fn base_radicand(&self, idx: ModeIndex) -> Complex64 {
        let dn = (idx.n - self.resonant_n()) as f64;
        Complex64::new(1.0 + dn * self.omega, -(idx.m as f64) * self.lambda)
    }

    pub(crate) fn require_damped(&self) -> Result<()> {
        if self.lambda > 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(
                "lambda must be > 0 for the survival amplitude; use the lambda = 0 analysis".into(),
            ))
        }
    }
}

fn resonant_shift(omega: f64) -> i64 {
    // floor(1/omega) with a guard for omega = 1/k landing a hair below k
    let q = 1.0 / omega;
    let k = q.round();
    if (q - k).abs() <= 8.0 * f64::EPSILON * q {
        k as i64
    } else {
        q.floor() as i64
    }
}

/// Truncation control for path sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationSpec {
    /// Minimum number of path-sum layers.
    pub depth: usize,
    /// Target absolute error on the summed quantity.
    pub tol: f64,
    /// Hard cap on the number of layers.
    pub max_depth: usize,
}

impl Default for TruncationSpec {
    fn default() -> Self {
        Self {
            depth: 8,
            tol: 1e-12,
            max_depth: 1000,
        }
    }
}

impl TruncationSpec {
    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 || self.max_depth < self.depth || !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "truncation {self:?} needs depth >= 1, max_depth >= depth, tol > 0"
            )));
        }
        Ok(())
    }
}

/// `sqrt(sigma + n omega - i m lambda)` on the principal branch.
pub fn kappa(params: &PulseParams, sigma: f64, idx: ModeIndex) -> Result<Complex64> {
    let radicand = Complex64::new(
        sigma + idx.n as f64 * params.omega,
        -(idx.m as f64) * params.lambda,
    );
    if radicand.re == 0.0 && radicand.im == 0.0 {
        return Err(Error::ZeroArgument(idx));
    }
    Ok(radicand.sqrt())
}

/// `kappa` at the base point `sigma0`, at any working precision.
pub fn kappa_at<T: Scalar>(params: &PulseParams, idx: ModeIndex, ctx: T::Ctx) -> Result<T> {
    let dn = (idx.n - params.resonant_n()) as f64;
    let radicand = if dn == 0.0 && idx.m == 0 {
        T::from_f64(1.0, ctx)
    } else {
        // assemble in working precision so n*omega and m*lambda are not
        // rounded to doubles first
        let one = T::from_f64(1.0, ctx);
        let re = T::from_f64(dn, ctx) * T::from_f64(params.omega, ctx);
        let im = T::from_f64(idx.m as f64, ctx) * T::from_c64(Complex64::new(0.0, -params.lambda), ctx);
        one + re + im
    };
    if radicand.is_zero() {
        return Err(Error::ZeroArgument(idx));
    }
    Ok(radicand.sqrt())
}

/// `B = 1 / (kappa - 1)` at `sigma0`.
pub fn bcoef(params: &PulseParams, idx: ModeIndex) -> Result<Complex64> {
    bcoef_at::<Complex64>(params, idx, ())
}

pub fn bcoef_at<T: Scalar>(params: &PulseParams, idx: ModeIndex, ctx: T::Ctx) -> Result<T> {
    if idx == params.resonant_index() {
        return Err(Error::SingularCoefficient(idx));
    }
    let denom = kappa_at::<T>(params, idx, ctx)? - T::from_f64(1.0, ctx);
    if denom.is_zero() {
        return Err(Error::SingularCoefficient(idx));
    }
    Ok(T::from_f64(1.0, ctx) / denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::MpComplex;
    use proptest::prelude::*;

    fn params(lambda: f64, omega: f64) -> PulseParams {
        PulseParams::new(lambda, omega, 1.0).unwrap()
    }

    #[test]
    fn kappa_examples() {
        let k = kappa(&params(0.7, 0.4), 1.0, ModeIndex::new(0, 0)).unwrap();
        assert_eq!(k, Complex64::new(1.0, 0.0));

        let k = kappa(&params(2.0, 0.0), 1.0, ModeIndex::new(1, 0)).unwrap();
        assert!((k - Complex64::new(1.272020, -0.786151)).norm() < 1e-6);
        assert!((k * k - Complex64::new(1.0, -2.0)).norm() < 1e-14);

        let k = kappa(&params(0.0, 3.0), 1.0, ModeIndex::new(1, 1)).unwrap();
        assert_eq!(k, Complex64::new(2.0, 0.0));
    }

    #[test]
    fn kappa_rejects_zero_radicand() {
        let err = kappa(&params(0.0, 3.0), 3.0, ModeIndex::new(0, -1)).unwrap_err();
        assert_eq!(err, Error::ZeroArgument(ModeIndex::new(0, -1)));
    }

    #[test]
    fn bcoef_examples() {
        assert_eq!(
            bcoef(&params(2.0, 3.0), ModeIndex::new(0, 0)).unwrap_err(),
            Error::SingularCoefficient(ModeIndex::new(0, 0))
        );
        let b = bcoef(&params(0.0, 3.0), ModeIndex::new(0, 1)).unwrap();
        assert!((b - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        let b = bcoef(&params(2.0, 0.0), ModeIndex::new(1, 0)).unwrap();
        // reciprocal of 0.272020 - 0.786151i
        let expected = Complex64::new(1.0, 0.0) / Complex64::new(0.2720196495, -0.7861513778);
        assert!((b - expected).norm() < 1e-8);
        assert!((b - Complex64::new(0.39308, 1.13601)).norm() < 1e-5);
    }

    #[test]
    fn base_point_shifts_below_unit_frequency() {
        let p = params(1.0, 0.4);
        assert_eq!(p.resonant_n(), 2);
        assert!((p.sigma0 - 0.2).abs() < 1e-15);
        let p = params(1.0, 0.25);
        assert_eq!(p.resonant_n(), 4);
        assert_eq!(p.sigma0, 0.0);
        assert_eq!(params(1.0, 3.0).sigma0, 1.0);
        assert_eq!(params(1.0, 0.0).sigma0, 1.0);
        // resonant radicand is exactly one after the shift
        assert_eq!(p.base_radicand(p.resonant_index()), Complex64::new(1.0, 0.0));
        assert!(bcoef(&p, ModeIndex::new(0, 4)).is_err());
    }

    #[test]
    fn multi_precision_kappa_agrees_with_doubles() {
        let p = params(0.37, 2.2);
        for &(m, n) in &[(1, 0), (3, -4), (7, 5), (-2, 1)] {
            let idx = ModeIndex::new(m, n);
            let hi = kappa_at::<MpComplex>(&p, idx, 256).unwrap().to_c64();
            let lo = kappa(&p, 1.0, idx).unwrap();
            assert!((hi - lo).norm() < 1e-14 * lo.norm());
        }
    }

    proptest! {
        #[test]
        fn kappa_is_in_fourth_quadrant_for_damped_rows(
            m in 1i64..200, n in -200i64..200,
            lambda in 1e-3f64..50.0, omega in 0.0f64..20.0, sigma in 0.0f64..2.0,
        ) {
            let p = params(lambda, omega);
            let k = kappa(&p, sigma, ModeIndex::new(m, n)).unwrap();
            prop_assert!(k.re >= 0.0);
            prop_assert!(k.im <= 0.0);
            let radicand = Complex64::new(sigma + n as f64 * omega, -(m as f64) * lambda);
            prop_assert!((k * k - radicand).norm() <= 1e-14 * radicand.norm());
        }

        #[test]
        fn bcoef_decays_like_inverse_root(
            m in 0i64..400, n in -400i64..400,
            lambda in 0.01f64..10.0, omega in 1.0f64..10.0,
        ) {
            let scale = (n.abs() as f64 * omega).max(m.abs() as f64 * lambda);
            prop_assume!(scale >= 4.0);
            let b = bcoef(&params(lambda, omega), ModeIndex::new(m, n)).unwrap();
            prop_assert!(b.norm() <= 2.0 / scale.sqrt());
        }
    }
}
