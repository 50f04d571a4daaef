//! The unmodulated pulse (`omega = 0`): a one-dimensional series for
//! `A_1`, the survival amplitude built from it, its small-`lambda`
//! asymptotic form and log-log slope fitting.
//!
//! With `omega = 0` the coefficients no longer depend on `n`, and the
//! recurrence collapses to `(kappa_k - 1) A_k = -A_{k+1} + g_k`, whose
//! solution is
//!
//! ```text
//! A_1 = sum_{k>=1} (-1)^(k-1) g_k / h_k,    h_k = prod_{j=1}^k (sqrt(1 - i j lambda) - 1)
//! ```

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::precision::{rounding_bound, run_on_ladder, LadderStatus, LadderTask, PrecisionPolicy, Probe};
use crate::resolvent::{Coefficients, LatticeCoefficients, Status, SurvivalResult};
use crate::scalar::Scalar;
use crate::source::SourceSpec;
use crate::spectral::{kappa_at, ModeIndex, PulseParams};

/// Fewest series terms ever summed.
pub const MIN_TERMS: usize = 8;

/// Series terms summed before giving up.
pub const MAX_TERMS: usize = 100_000;

/// `2^(-2/3) 3^(1/6) pi^(-1/2) Gamma(2/3)`, the modulus of the
/// small-`lambda` prefactor.
pub fn asymptotic_constant() -> f64 {
    2f64.powf(-2.0 / 3.0) * 3f64.powf(1.0 / 6.0) * PI.sqrt().recip() * statrs::function::gamma::gamma(2.0 / 3.0)
}

/// `2^(-2/3) (-3i)^(1/6) pi^(-1/2) Gamma(2/3) exp(-3i/(2 lambda)) lambda^(1/6)`
/// with the principal sixth root, `(-3i)^(1/6) = 3^(1/6) exp(-i pi/12)`.
pub fn asymptotic_r(lambda: f64) -> Result<Complex64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
    }
    let phase = Complex64::from_polar(1.0, -PI / 12.0 - 1.5 / lambda);
    Ok(asymptotic_constant() * lambda.powf(1.0 / 6.0) * phase)
}

fn omega0_params(lambda: f64) -> Result<PulseParams> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!("lambda must be > 0, got {lambda}")));
    }
    PulseParams::new(lambda, 0.0, 1.0)
}

/// `h_k` in working precision.
pub fn hk_product_at<T: Scalar>(lambda: f64, k: usize, ctx: T::Ctx) -> Result<T> {
    let params = omega0_params(lambda)?;
    if k == 0 {
        return Err(Error::InvalidParameter("h_k needs k >= 1".into()));
    }
    let one = T::from_f64(1.0, ctx);
    let mut h = one.clone();
    for j in 1..=k {
        h = h * (kappa_at::<T>(&params, ModeIndex::new(j as i64, 0), ctx)? - one.clone());
    }
    Ok(h)
}

/// `h_k` in doubles; overflows to infinity once `lambda^(k-1) (k-1)!`
/// leaves the double range.
pub fn hk_product(lambda: f64, k: usize) -> Result<Complex64> {
    hk_product_at::<Complex64>(lambda, k, ())
}

/// The summed series for `A_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Omega0Series {
    pub lambda: f64,
    /// Index of the last retained term.
    pub k_max: usize,
    /// `terms[k - 1] = (-1)^(k-1) g_k / h_k`.
    pub terms: Vec<Complex64>,
    pub partial_sums: Vec<Complex64>,
    pub abs_term_total: f64,
    pub value: Complex64,
    /// Same terms summed from the smallest index down, at the same precision.
    pub reversed: Complex64,
    pub err: f64,
    pub digits_used: u32,
    pub status: Status,
}

impl Omega0Series {
    /// `|forward - reversed| / |forward|`.
    pub fn order_sensitivity(&self) -> f64 {
        (self.value - self.reversed).norm() / self.value.norm().max(crate::precision::TINY)
    }
}

struct SeriesTask<'a> {
    params: PulseParams,
    source: &'a SourceSpec,
    tol: f64,
    extra_terms: usize,
}

impl LadderTask for SeriesTask<'_> {
    type Output = Omega0Series;

    fn run<T: Scalar>(&mut self, ctx: T::Ctx, digits: u32) -> Result<(Omega0Series, Probe)> {
        let coef = LatticeCoefficients::<T>::new(&self.params, self.source, ctx);
        let one = T::from_f64(1.0, ctx);
        let mut h = one.clone();
        let mut sum = T::zero(ctx);
        let mut exact_terms: Vec<T> = Vec::new();
        let mut terms = Vec::new();
        let mut partial_sums = Vec::new();
        let mut abs_total = 0.0;
        let mut previous = 0.0;
        let mut past_peak = false;
        let mut stop_at = None;
        let mut converged = false;
        for k in 1..=MAX_TERMS {
            let idx = ModeIndex::new(k as i64, 0);
            h = h * (kappa_at::<T>(&self.params, idx, ctx)? - one.clone());
            let mut term = coef.g(idx)? / h.clone();
            if k % 2 == 0 {
                term = -term;
            }
            let size = term.abs();
            abs_total += size;
            sum = sum + term.clone();
            terms.push(term.to_c64());
            partial_sums.push(sum.to_c64());
            exact_terms.push(term);
            past_peak |= k > 1 && size < previous;
            previous = size;
            if let Some(last) = stop_at {
                if k >= last {
                    break;
                }
            } else if k >= MIN_TERMS && past_peak && size < self.tol {
                converged = true;
                if self.extra_terms == 0 {
                    break;
                }
                stop_at = Some(k + self.extra_terms);
            }
        }
        let reversed = exact_terms
            .iter()
            .rev()
            .fold(T::zero(ctx), |acc, t| acc + t.clone())
            .to_c64();
        let value = sum.to_c64();
        let k_max = terms.len();
        let err = previous + rounding_bound(abs_total, digits);
        let series = Omega0Series {
            lambda: self.params.lambda,
            k_max,
            terms,
            partial_sums,
            abs_term_total: abs_total,
            value,
            reversed,
            err,
            digits_used: digits,
            status: if converged { Status::Converged } else { Status::Unconverged },
        };
        Ok((
            series,
            Probe {
                sum: value,
                abs_term_total: abs_total,
                tol: self.tol,
            },
        ))
    }
}

fn run_series(
    lambda: f64,
    source: &SourceSpec,
    tol: f64,
    policy: &PrecisionPolicy,
    extra_terms: usize,
) -> Result<Omega0Series> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be > 0, got {tol}")));
    }
    let mut task = SeriesTask {
        params: omega0_params(lambda)?,
        source,
        tol,
        extra_terms,
    };
    let out = run_on_ladder(&mut task, policy)?;
    let mut series = out.output;
    series.digits_used = out.digits;
    if let LadderStatus::Exhausted { .. } = out.status {
        series.status = Status::PrecisionExhausted;
    }
    Ok(series)
}

/// The full series record, without failing on an unmet tolerance.
pub fn omega0_series(lambda: f64, source: &SourceSpec, tol: f64, policy: &PrecisionPolicy) -> Result<Omega0Series> {
    run_series(lambda, source, tol, policy, 0)
}

/// Same as [`omega0_series`] but keeps `extra` terms past the stopping point.
pub fn omega0_series_extended(
    lambda: f64,
    source: &SourceSpec,
    tol: f64,
    policy: &PrecisionPolicy,
    extra: usize,
) -> Result<Omega0Series> {
    run_series(lambda, source, tol, policy, extra)
}

fn strict(series: &Omega0Series, tol: f64) -> Result<()> {
    match series.status {
        Status::Converged => Ok(()),
        Status::Unconverged => Err(Error::Unconverged {
            depth: series.k_max,
            err: series.err,
            tol,
        }),
        Status::PrecisionExhausted => Err(Error::PrecisionExhausted {
            digits: series.digits_used,
            ratio: series.abs_term_total / series.value.norm().max(crate::precision::TINY),
        }),
    }
}

/// `A_1` and its error bound.
pub fn series_a1(lambda: f64, source: &SourceSpec, tol: f64, policy: &PrecisionPolicy) -> Result<(Complex64, f64)> {
    let series = omega0_series(lambda, source, tol, policy)?;
    strict(&series, tol)?;
    Ok((series.value, series.err))
}

/// `r = 2 g_0 - 2 A_1`, reporting failures in the status field.
pub fn evaluate_omega0(
    lambda: f64,
    source: &SourceSpec,
    tol: f64,
    policy: &PrecisionPolicy,
) -> Result<SurvivalResult> {
    let series = omega0_series(lambda, source, tol, policy)?;
    let params = omega0_params(lambda)?;
    let g0 = crate::source::g_at::<Complex64>(source, &params, ModeIndex::new(0, 0), ())?;
    let r = 2.0 * g0 - 2.0 * series.value;
    Ok(SurvivalResult {
        r,
        probability: r.norm_sqr(),
        err_estimate: 2.0 * series.err,
        depth_used: series.k_max,
        digits_used: series.digits_used,
        abs_term_total: 2.0 * (g0.norm() + series.abs_term_total),
        status: series.status,
    })
}

/// Strict form of [`evaluate_omega0`].
pub fn survival_omega0(lambda: f64, source: &SourceSpec, tol: f64, policy: &PrecisionPolicy) -> Result<SurvivalResult> {
    let result = evaluate_omega0(lambda, source, tol, policy)?;
    match result.status {
        Status::Converged => Ok(result),
        Status::Unconverged => Err(Error::Unconverged {
            depth: result.depth_used,
            err: result.err_estimate,
            tol,
        }),
        Status::PrecisionExhausted => Err(Error::PrecisionExhausted {
            digits: result.digits_used,
            ratio: result.abs_term_total / result.r.norm().max(crate::precision::TINY),
        }),
    }
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in `ln y`.
    pub residual: f64,
}

pub fn slope_fit(points: &[(f64, f64)]) -> Result<LineFit> {
    if points.len() < 3 {
        return Err(Error::DegenerateInput(format!("need >= 3 points, got {}", points.len())));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::DegenerateInput(format!("non-positive point ({x}, {y})")));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let count = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / count;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / count;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateInput("all x values coincide".into()));
    }
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (logs
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / count)
        .sqrt();
    Ok(LineFit {
        slope,
        intercept,
        residual,
    })
}
