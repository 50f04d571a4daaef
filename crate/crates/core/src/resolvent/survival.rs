//! Survival amplitude `r = 2 g_{0,0} - alpha (A_{1,1} + A_{1,-1})` and the
//! short-pulse variant.

use std::ops::RangeInclusive;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::path_sum::{path_sum_adaptive_with, path_sum_fixed};
use super::{CoefficientLattice, Coefficients, LatticeCoefficients, LatticeKind};
use crate::error::{Error, Result};
use crate::precision::{rounding_bound, run_on_ladder, LadderStatus, LadderTask, PrecisionPolicy, Probe};
use crate::scalar::Scalar;
use crate::source::SourceSpec;
use crate::spectral::{ModeIndex, PulseParams, TruncationSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Converged,
    Unconverged,
    PrecisionExhausted,
}

impl Status {
    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Converged => "ok",
            Status::Unconverged => "unconverged",
            Status::PrecisionExhausted => "precision_exhausted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurvivalResult {
    pub r: Complex64,
    /// `|r|^2`.
    pub probability: f64,
    /// Absolute error bound on `r`.
    pub err_estimate: f64,
    pub depth_used: usize,
    pub digits_used: u32,
    /// Sum of term magnitudes entering `r`.
    pub abs_term_total: f64,
    pub status: Status,
}

struct SurvivalTask<'a> {
    params: &'a PulseParams,
    source: &'a SourceSpec,
    trunc: TruncationSpec,
}

impl LadderTask for SurvivalTask<'_> {
    type Output = SurvivalResult;

    fn run<T: Scalar>(&mut self, ctx: T::Ctx, digits: u32) -> Result<(SurvivalResult, Probe)> {
        let p = self.params;
        let coef = LatticeCoefficients::<T>::new(p, self.source, ctx);
        let g00 = coef.g(p.resonant_index())?;
        let mut abs_total = 2.0 * g00.abs();
        let mut r = T::from_f64(2.0, ctx) * g00;
        let mut err = 0.0;
        let mut depth = 0;
        if p.alpha != 0.0 {
            let n0 = p.resonant_n();
            let plus = path_sum_adaptive_with::<T, _>(&coef, ModeIndex::new(1, n0 + 1), p.alpha, &self.trunc)?;
            let minus = path_sum_adaptive_with::<T, _>(&coef, ModeIndex::new(1, n0 - 1), p.alpha, &self.trunc)?;
            r = r - T::from_f64(p.alpha, ctx) * (plus.value + minus.value);
            abs_total += p.alpha.abs() * (plus.abs_term_total + minus.abs_term_total);
            err = p.alpha.abs() * (plus.err + minus.err);
            depth = plus.depth.max(minus.depth);
        }
        let r = r.to_c64();
        let err_estimate = err + rounding_bound(abs_total, digits);
        // each of the two path sums is held to tol
        let budget = self.trunc.tol * (2.0 * p.alpha.abs()).max(1.0);
        let status = if err_estimate <= budget {
            Status::Converged
        } else {
            Status::Unconverged
        };
        let result = SurvivalResult {
            r,
            probability: r.norm_sqr(),
            err_estimate,
            depth_used: depth,
            digits_used: digits,
            abs_term_total: abs_total,
            status,
        };
        Ok((
            result,
            Probe {
                sum: r,
                abs_term_total: abs_total,
                tol: self.trunc.tol,
            },
        ))
    }
}

/// Survival amplitude at a parameter point. Failure to converge or to resolve
/// cancellation is reported in [`SurvivalResult::status`] rather than as an
/// error, so sweeps can record flagged rows.
pub fn evaluate_survival(
    params: &PulseParams,
    source: &SourceSpec,
    trunc: &TruncationSpec,
    policy: &PrecisionPolicy,
) -> Result<SurvivalResult> {
    params.require_damped()?;
    trunc.validate()?;
    let mut task = SurvivalTask {
        params,
        source,
        trunc: *trunc,
    };
    let out = run_on_ladder(&mut task, policy)?;
    let mut result = out.output;
    result.digits_used = out.digits;
    if let LadderStatus::Exhausted { .. } = out.status {
        result.status = Status::PrecisionExhausted;
    }
    Ok(result)
}

/// Strict form of [`evaluate_survival`].
pub fn survival_amplitude(
    params: &PulseParams,
    source: &SourceSpec,
    trunc: &TruncationSpec,
    policy: &PrecisionPolicy,
) -> Result<SurvivalResult> {
    let result = evaluate_survival(params, source, trunc, policy)?;
    match result.status {
        Status::Converged => Ok(result),
        Status::Unconverged => Err(Error::Unconverged {
            depth: result.depth_used,
            err: result.err_estimate,
            tol: trunc.tol,
        }),
        Status::PrecisionExhausted => Err(Error::PrecisionExhausted {
            digits: result.digits_used,
            ratio: result.abs_term_total / result.r.norm().max(crate::precision::TINY),
        }),
    }
}

/// Parameters of the pulse `2 lambda delta(x) exp(-lambda t) cos(ratio lambda t)`.
pub fn short_pulse_params(lambda: f64, ratio: f64) -> Result<PulseParams> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("short pulse needs lambda > 0, got {lambda}")));
    }
    if !(ratio > 0.0 && ratio.is_finite()) {
        return Err(Error::InvalidParameter(format!("short pulse needs ratio > 0, got {ratio}")));
    }
    PulseParams::new(lambda, ratio * lambda, lambda)
}

pub fn short_pulse_survival(
    lambda: f64,
    ratio: f64,
    source: &SourceSpec,
    trunc: &TruncationSpec,
    policy: &PrecisionPolicy,
) -> Result<SurvivalResult> {
    survival_amplitude(&short_pulse_params(lambda, ratio)?, source, trunc, policy)
}

/// `A_{m,n}` on a block of rows `m >= 1`, each entry summed to `depth` layers
/// in doubles.
pub fn assemble_inhomogeneous(
    params: &PulseParams,
    source: &SourceSpec,
    rows: RangeInclusive<i64>,
    cols: RangeInclusive<i64>,
    depth: usize,
) -> Result<CoefficientLattice> {
    let mut lattice = CoefficientLattice::new(LatticeKind::InhomogeneousA);
    for m in rows {
        for n in cols.clone() {
            let idx = ModeIndex::new(m, n);
            lattice.insert(idx, path_sum_fixed(idx, params, source, depth)?.value);
        }
    }
    Ok(lattice)
}
