//! Path-sum evaluation of `A_{m,n}` by dynamic programming over
//! (depth, offset), with a literal sign-path enumeration as oracle.

use num_complex::Complex64;

use super::{Coefficients, LatticeCoefficients};
use crate::error::{Error, Result};
use crate::precision::{rounding_bound, run_on_ladder, LadderStatus, LadderTask, PrecisionPolicy, Probe};
use crate::scalar::Scalar;
use crate::source::SourceSpec;
use crate::spectral::{ModeIndex, PulseParams, TruncationSpec};

/// Deepest brute-force enumeration allowed (`2^12` paths per layer).
pub const MAX_ENUMERATION_DEPTH: usize = 12;

/// Result of a path sum in working precision.
#[derive(Debug, Clone)]
pub struct PathSum<T> {
    pub value: T,
    /// Tail bound: `4 * sum |W_N| * max |g|` on the first omitted layer.
    pub err: f64,
    /// Number of layers summed.
    pub depth: usize,
    /// Sum of `|W| |g|` over all summed terms.
    pub abs_term_total: f64,
    /// Size of the last summed layer.
    pub last_term: f64,
}

/// Layer `j` of the DP: `weights[i]` is the coupling-weighted product of `B`
/// over all sign paths from `origin` reaching offset `-j + 2i`.
struct Layers<'c, T: Scalar, C: Coefficients<T>> {
    coef: &'c C,
    origin: ModeIndex,
    coupling: T,
    j: usize,
    weights: Vec<T>,
}

impl<'c, T: Scalar, C: Coefficients<T>> Layers<'c, T, C> {
    fn new(coef: &'c C, origin: ModeIndex, alpha: f64) -> Result<Self> {
        let ctx = coef.ctx();
        Ok(Self {
            coef,
            origin,
            coupling: T::from_f64(-0.5 * alpha, ctx),
            j: 0,
            weights: vec![coef.b(origin)?],
        })
    }

    fn index(&self, i: usize) -> ModeIndex {
        let offset = 2 * i as i64 - self.j as i64;
        ModeIndex::new(self.origin.m + self.j as i64, self.origin.n + offset)
    }

    /// `(sum W g, sum |W||g|)` for the current layer.
    fn term(&self) -> Result<(T, f64)> {
        let mut sum = T::zero(self.coef.ctx());
        let mut abs = 0.0;
        for (i, w) in self.weights.iter().enumerate() {
            let g = self.coef.g(self.index(i))?;
            abs += w.abs() * g.abs();
            sum = sum + w.clone() * g;
        }
        Ok((sum, abs))
    }

    fn tail_bound(&self) -> Result<f64> {
        let mut weight = 0.0;
        let mut gmax = 0.0f64;
        for (i, w) in self.weights.iter().enumerate() {
            weight += w.abs();
            gmax = gmax.max(self.coef.g(self.index(i))?.abs());
        }
        Ok(4.0 * weight * gmax)
    }

    fn advance(&mut self) -> Result<()> {
        let ctx = self.coef.ctx();
        let width = self.weights.len() + 1;
        self.j += 1;
        let mut next = Vec::with_capacity(width);
        for i in 0..width {
            let mut incoming = T::zero(ctx);
            if i > 0 {
                incoming = incoming + self.weights[i - 1].clone();
            }
            if i < width - 1 {
                incoming = incoming + self.weights[i].clone();
            }
            let b = self.coef.b(self.index(i))?;
            next.push(self.coupling.clone() * b * incoming);
        }
        self.weights = next;
        Ok(())
    }
}

/// Sum of the first `depth` layers, with the tail bound taken on layer `depth`.
pub fn path_sum_fixed_with<T: Scalar, C: Coefficients<T>>(
    coef: &C,
    origin: ModeIndex,
    alpha: f64,
    depth: usize,
) -> Result<PathSum<T>> {
    let mut layers = Layers::new(coef, origin, alpha)?;
    let mut value = T::zero(coef.ctx());
    let mut abs_term_total = 0.0;
    let mut last_term = 0.0;
    for _ in 0..depth {
        let (t, abs) = layers.term()?;
        last_term = t.abs();
        value = value + t;
        abs_term_total += abs;
        layers.advance()?;
    }
    Ok(PathSum {
        value,
        err: layers.tail_bound()?,
        depth,
        abs_term_total,
        last_term,
    })
}

/// Sum layers until the tail bound and the last layer are both below
/// tolerance, with at least `trunc.depth` layers. Returns the state reached
/// at `trunc.max_depth` without error; the caller checks `err` against `tol`.
pub fn path_sum_adaptive_with<T: Scalar, C: Coefficients<T>>(
    coef: &C,
    origin: ModeIndex,
    alpha: f64,
    trunc: &TruncationSpec,
) -> Result<PathSum<T>> {
    trunc.validate()?;
    let mut layers = Layers::new(coef, origin, alpha)?;
    let mut value = T::zero(coef.ctx());
    let mut abs_term_total = 0.0;
    loop {
        let (t, abs) = layers.term()?;
        let last_term = t.abs();
        value = value + t;
        abs_term_total += abs;
        layers.advance()?;
        let depth = layers.j;
        let err = layers.tail_bound()?;
        let done = depth >= trunc.depth && err <= trunc.tol && last_term <= 0.5 * trunc.tol;
        if done || depth >= trunc.max_depth {
            return Ok(PathSum {
                value,
                err,
                depth,
                abs_term_total,
                last_term,
            });
        }
    }
}

fn check_target(params: &PulseParams, idx: ModeIndex) -> Result<()> {
    params.require_damped()?;
    if idx.m < 1 {
        return Err(Error::InvalidParameter(format!(
            "path sums need m >= 1, got {idx}"
        )));
    }
    Ok(())
}

struct SingleTarget<'a> {
    params: &'a PulseParams,
    source: &'a SourceSpec,
    idx: ModeIndex,
    trunc: TruncationSpec,
}

impl LadderTask for SingleTarget<'_> {
    type Output = (Complex64, f64, usize);

    fn run<T: Scalar>(&mut self, ctx: T::Ctx, digits: u32) -> Result<(Self::Output, Probe)> {
        let coef = LatticeCoefficients::<T>::new(self.params, self.source, ctx);
        let s = path_sum_adaptive_with::<T, _>(&coef, self.idx, self.params.alpha, &self.trunc)?;
        let sum = s.value.to_c64();
        let err = s.err + rounding_bound(s.abs_term_total, digits);
        Ok((
            (sum, err, s.depth),
            Probe {
                sum,
                abs_term_total: s.abs_term_total,
                tol: self.trunc.tol,
            },
        ))
    }
}

/// `A_{m,n}` at `sigma0` with its error bound, escalating precision as needed.
pub fn path_sum_a(
    idx: ModeIndex,
    params: &PulseParams,
    source: &SourceSpec,
    trunc: &TruncationSpec,
    policy: &PrecisionPolicy,
) -> Result<(Complex64, f64)> {
    check_target(params, idx)?;
    let mut task = SingleTarget {
        params,
        source,
        idx,
        trunc: *trunc,
    };
    let out = run_on_ladder(&mut task, policy)?;
    let (value, err, depth) = out.output;
    if let LadderStatus::Exhausted { ratio } = out.status {
        return Err(Error::PrecisionExhausted {
            digits: out.digits,
            ratio,
        });
    }
    if err > trunc.tol {
        return Err(Error::Unconverged {
            depth,
            err,
            tol: trunc.tol,
        });
    }
    Ok((value, err))
}

/// First `depth` layers in doubles, no adaptivity.
pub fn path_sum_fixed(
    idx: ModeIndex,
    params: &PulseParams,
    source: &SourceSpec,
    depth: usize,
) -> Result<PathSum<Complex64>> {
    check_target(params, idx)?;
    let coef = LatticeCoefficients::<Complex64>::new(params, source, ());
    path_sum_fixed_with(&coef, idx, params.alpha, depth)
}

/// Literal sum over every sign path of length `j < depth`.
pub fn brute_force_with<T: Scalar, C: Coefficients<T>>(
    coef: &C,
    origin: ModeIndex,
    alpha: f64,
    depth: usize,
) -> Result<T> {
    if depth > MAX_ENUMERATION_DEPTH {
        return Err(Error::DepthTooLarge(depth));
    }
    let ctx = coef.ctx();
    let coupling = T::from_f64(-0.5 * alpha, ctx);
    let mut total = T::zero(ctx);
    for j in 0..depth {
        for signs in 0u32..(1u32 << j) {
            let mut n = origin.n;
            let mut product = coef.b(origin)?;
            for k in 0..j {
                n += if signs >> k & 1 == 1 { 1 } else { -1 };
                let at = ModeIndex::new(origin.m + k as i64 + 1, n);
                product = product * coupling.clone() * coef.b(at)?;
            }
            let end = ModeIndex::new(origin.m + j as i64, n);
            total = total + product * coef.g(end)?;
        }
    }
    Ok(total)
}

/// Brute-force oracle for [`path_sum_a`], in doubles.
pub fn brute_force_a(idx: ModeIndex, params: &PulseParams, source: &SourceSpec, depth: usize) -> Result<Complex64> {
    if depth > MAX_ENUMERATION_DEPTH {
        return Err(Error::DepthTooLarge(depth));
    }
    check_target(params, idx)?;
    let coef = LatticeCoefficients::<Complex64>::new(params, source, ());
    brute_force_with(&coef, idx, params.alpha, depth)
}
