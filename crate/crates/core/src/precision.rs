//! Precision ladder: detect catastrophic cancellation and re-run sums at
//! more digits.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{bits_for_digits, MpComplex, Scalar};

/// Guard against dividing by an exactly cancelled sum.
pub const TINY: f64 = 1e-300;

/// Digits carried by hardware doubles.
pub const DOUBLE_DIGITS: u32 = 15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrecisionPolicy {
    /// Working precision of the first attempt. 15 or less means doubles.
    pub base_digits: u32,
    /// Largest tolerated `sum |terms| / |sum|` at `base_digits`. Every extra
    /// working digit buys one more decade.
    pub cancellation_threshold: f64,
    /// Digits are multiplied by this on each escalation.
    pub escalation_factor: u32,
    pub max_digits: u32,
}

impl Default for PrecisionPolicy {
    fn default() -> Self {
        Self {
            base_digits: DOUBLE_DIGITS,
            cancellation_threshold: 1e12,
            escalation_factor: 2,
            max_digits: 120,
        }
    }
}

impl PrecisionPolicy {
    pub fn with_base_digits(mut self, digits: u32) -> Self {
        self.base_digits = digits;
        self.max_digits = self.max_digits.max(digits);
        self
    }

    /// Cancellation ratio accepted when working at `digits`.
    pub fn allowed_ratio(&self, digits: u32) -> f64 {
        let extra = digits as f64 - self.base_digits as f64;
        self.cancellation_threshold * 10f64.powf(extra)
    }

    /// Next rung of the ladder, or `None` at the cap.
    pub fn next_digits(&self, digits: u32) -> Option<u32> {
        if digits >= self.max_digits {
            return None;
        }
        let next = digits.saturating_mul(self.escalation_factor.max(2));
        Some(next.min(self.max_digits))
    }

    pub fn validate(&self) -> Result<()> {
        if self.base_digits == 0
            || self.max_digits < self.base_digits
            || !(self.cancellation_threshold > 1.0)
        {
            return Err(Error::InvalidParameter(format!(
                "precision policy {self:?} is inconsistent"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Accept,
    Rerun(u32),
}

/// Decide whether a sum computed at `digits` can be trusted.
pub fn escalate_if_cancelled(
    sum: Complex64,
    abs_term_total: f64,
    digits: u32,
    policy: &PrecisionPolicy,
) -> Result<Decision> {
    let ratio = abs_term_total / sum.norm().max(TINY);
    if ratio <= policy.allowed_ratio(digits) {
        return Ok(Decision::Accept);
    }
    match policy.next_digits(digits) {
        Some(next) => Ok(Decision::Rerun(next)),
        None => Err(Error::PrecisionExhausted { digits, ratio }),
    }
}

/// Rounding error bound for a sum of terms whose magnitudes add to
/// `abs_term_total`, evaluated with `digits` significant digits.
pub fn rounding_bound(abs_term_total: f64, digits: u32) -> f64 {
    let eps = if digits <= DOUBLE_DIGITS {
        f64::EPSILON
    } else {
        10f64.powi(-(digits as i32))
    };
    16.0 * eps * abs_term_total
}

/// Working precision for one rung.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Working {
    Double,
    Multi { digits: u32, bits: usize },
}

impl Working {
    pub fn for_digits(digits: u32) -> Self {
        if digits <= DOUBLE_DIGITS {
            Working::Double
        } else {
            Working::Multi {
                digits,
                bits: bits_for_digits(digits),
            }
        }
    }

    pub fn digits(&self) -> u32 {
        match self {
            Working::Double => DOUBLE_DIGITS,
            Working::Multi { digits, .. } => *digits,
        }
    }
}

/// What a computation reports back so the ladder can judge it.
#[derive(Debug, Clone, Copy)]
pub struct Probe {
    pub sum: Complex64,
    pub abs_term_total: f64,
    /// Absolute accuracy the caller needs from the sum.
    pub tol: f64,
}

/// A computation that can be carried out at any [`Scalar`] precision.
pub trait LadderTask {
    type Output;

    fn run<T: Scalar>(&mut self, ctx: T::Ctx, digits: u32) -> Result<(Self::Output, Probe)>;
}

/// How the ladder finished.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LadderStatus {
    Accepted,
    /// Cap reached with the cancellation ratio still too large.
    Exhausted { ratio: f64 },
}

pub struct LadderOutcome<O> {
    pub output: O,
    pub digits: u32,
    pub status: LadderStatus,
}

/// Run `task` at the policy's base precision and escalate while the result is
/// dominated by cancellation or by rounding relative to the requested
/// tolerance.
pub fn run_on_ladder<L: LadderTask>(
    task: &mut L,
    policy: &PrecisionPolicy,
) -> Result<LadderOutcome<L::Output>> {
    policy.validate()?;
    let mut digits = policy.base_digits;
    loop {
        let (output, probe) = match Working::for_digits(digits) {
            Working::Double => task.run::<Complex64>((), DOUBLE_DIGITS)?,
            Working::Multi { digits, bits } => task.run::<MpComplex>(bits, digits)?,
        };
        let used = Working::for_digits(digits).digits();
        let decision = match escalate_if_cancelled(probe.sum, probe.abs_term_total, used, policy) {
            Ok(d) => d,
            Err(Error::PrecisionExhausted { ratio, .. }) => {
                return Ok(LadderOutcome {
                    output,
                    digits: used,
                    status: LadderStatus::Exhausted { ratio },
                })
            }
            Err(e) => return Err(e),
        };
        let next = match decision {
            Decision::Rerun(next) => Some(next),
            Decision::Accept if rounding_bound(probe.abs_term_total, used) > 0.5 * probe.tol => {
                policy.next_digits(used)
            }
            Decision::Accept => None,
        };
        match next {
            Some(next) if next > used => digits = next,
            _ => {
                return Ok(LadderOutcome {
                    output,
                    digits: used,
                    status: LadderStatus::Accepted,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mild_sum_is_accepted() {
        let p = PrecisionPolicy::default();
        let d = escalate_if_cancelled(Complex64::new(1.0, 0.0), 10.0, 15, &p).unwrap();
        assert_eq!(d, Decision::Accept);
    }

    #[test]
    fn heavy_cancellation_in_doubles_reruns() {
        let p = PrecisionPolicy::default();
        let d = escalate_if_cancelled(Complex64::new(1e-15, 0.0), 1e3, 15, &p).unwrap();
        assert_eq!(d, Decision::Rerun(30));
    }

    #[test]
    fn cap_reports_exhaustion() {
        let p = PrecisionPolicy::default();
        let err = escalate_if_cancelled(Complex64::new(0.0, 0.0), 1.0, 120, &p).unwrap_err();
        assert!(matches!(err, Error::PrecisionExhausted { digits: 120, .. }));
    }

    #[test]
    fn ladder_is_15_30_60_120() {
        let p = PrecisionPolicy::default();
        assert_eq!(p.next_digits(15), Some(30));
        assert_eq!(p.next_digits(30), Some(60));
        assert_eq!(p.next_digits(60), Some(120));
        assert_eq!(p.next_digits(120), None);
    }

    struct Cancelling;

    impl LadderTask for Cancelling {
        type Output = f64;
        // (1e20 + 1) - 1e20, exact only with more than 20 digits
        fn run<T: Scalar>(&mut self, ctx: T::Ctx, _digits: u32) -> Result<(f64, Probe)> {
            let big = T::from_f64(1e20, ctx);
            let one = T::from_f64(1.0, ctx);
            let s = (big.clone() + one) - big;
            let z = s.to_c64();
            Ok((z.re, Probe { sum: z, abs_term_total: 2e20 + 1.0, tol: 1e-6 }))
        }
    }

    #[test]
    fn ladder_escalates_until_the_sum_is_resolved() {
        let out = run_on_ladder(&mut Cancelling, &PrecisionPolicy::default()).unwrap();
        assert_eq!(out.status, LadderStatus::Accepted);
        assert_eq!(out.digits, 30);
        assert_eq!(out.output, 1.0);
    }
}
