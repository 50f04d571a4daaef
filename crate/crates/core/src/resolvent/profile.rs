//! Spatial profile of a single Laplace mode.

use num_complex::Complex64;

use crate::error::Result;
use crate::source::{g_at, SourceSpec};
use crate::spectral::{kappa_at, ModeIndex, PulseParams};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `y_{m,n}(x) = i int e^{-kappa|x-y|}/(2 kappa) psi0(y) dy
///   + e^{-kappa|x|} (A - g/kappa)` at `sigma0`, where `A = y_{m,n}(0)`.
pub fn mode_profile(
    idx: ModeIndex,
    x: f64,
    a_value: Complex64,
    params: &PulseParams,
    source: &SourceSpec,
) -> Result<Complex64> {
    let kappa = kappa_at::<Complex64>(params, idx, ())?;
    let g = g_at::<Complex64>(source, params, idx, ())?;
    let decay = (-kappa * x.abs()).exp();
    Ok(I * source.free_resolvent(kappa, x)? + decay * (a_value - g / kappa))
}
