//! Driving coefficients `g_{m,n}(sigma) = (i/2) ∫ exp(-kappa |x|) psi0(x) dx`
//! for the initial wave function `psi0`.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, uniform_breaks};
use crate::scalar::Scalar;
use crate::spectral::{kappa, kappa_at, ModeIndex, PulseParams};

const I: Complex64 = Complex64::new(0.0, 1.0);
const MAX_PANELS: usize = 20_000;

pub type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Initial condition `psi0`.
#[derive(Clone)]
pub enum SourceSpec {
    /// `psi0(x) = exp(-|x|)`, the bound state of the static well.
    BoundState,
    CompactSupport(CompactSource),
}

/// A real profile vanishing outside `[-support_radius, support_radius]`.
#[derive(Clone)]
pub struct CompactSource {
    label: String,
    profile: Profile,
    support_radius: f64,
    quad_tol: f64,
    even: bool,
    l1_norm: f64,
    l2_norm_sq: f64,
}

impl CompactSource {
    pub fn new(
        label: impl Into<String>,
        profile: Profile,
        support_radius: f64,
        even: bool,
        quad_tol: f64,
    ) -> Result<Self> {
        if !(support_radius > 0.0 && support_radius.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "support radius must be positive, got {support_radius}"
            )));
        }
        if !(quad_tol > 0.0) {
            return Err(Error::InvalidParameter(format!("quad_tol must be > 0, got {quad_tol}")));
        }
        let breaks = [-support_radius, 0.0, support_radius];
        let p = profile.clone();
        let l1 = integrate(|x| Complex64::new(p(x).abs(), 0.0), &breaks, 1e-14, MAX_PANELS);
        let p = profile.clone();
        let l2 = integrate(|x| Complex64::new(p(x) * p(x), 0.0), &breaks, 1e-14, MAX_PANELS);
        Ok(Self {
            label: label.into(),
            profile,
            support_radius,
            quad_tol,
            even,
            l1_norm: l1.value.re,
            l2_norm_sq: l2.value.re,
        })
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn quad_tol(&self) -> f64 {
        self.quad_tol
    }

    pub fn is_even(&self) -> bool {
        self.even
    }

    pub fn value(&self, x: f64) -> f64 {
        if x.abs() >= self.support_radius {
            0.0
        } else {
            (self.profile)(x)
        }
    }
}

/// Unnormalized smooth bump on `(-1, 1)`.
fn bump_shape(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

impl SourceSpec {
    /// `c exp(-1/(1 - (x/R)^2))` on `(-R, R)` with `c` chosen for unit L2 norm.
    pub fn bump(radius: f64) -> Result<Self> {
        Self::bump_with_tol(radius, 1e-12)
    }

    pub fn bump_with_tol(radius: f64, quad_tol: f64) -> Result<Self> {
        let raw = CompactSource::new("bump", Arc::new(move |x| bump_shape(x / radius)), radius, true, quad_tol)?;
        let c = raw.l2_norm_sq.sqrt().recip();
        CompactSource::new(
            format!("bump:radius={radius}"),
            Arc::new(move |x| c * bump_shape(x / radius)),
            radius,
            true,
            quad_tol,
        )
        .map(SourceSpec::CompactSupport)
    }

    pub fn value(&self, x: f64) -> f64 {
        match self {
            SourceSpec::BoundState => (-x.abs()).exp(),
            SourceSpec::CompactSupport(c) => c.value(x),
        }
    }

    pub fn l1_norm(&self) -> f64 {
        match self {
            SourceSpec::BoundState => 2.0,
            SourceSpec::CompactSupport(c) => c.l1_norm,
        }
    }

    pub fn l2_norm_sq(&self) -> f64 {
        match self {
            SourceSpec::BoundState => 1.0,
            SourceSpec::CompactSupport(c) => c.l2_norm_sq,
        }
    }

    pub fn is_even(&self) -> bool {
        match self {
            SourceSpec::BoundState => true,
            SourceSpec::CompactSupport(c) => c.even,
        }
    }

    /// `∫ exp(-kappa |x|) psi0(x) dx` for a decay rate with `Re kappa >= 0`.
    pub fn laplace_weight(&self, kappa: Complex64, idx: Option<ModeIndex>) -> Result<Complex64> {
        match self {
            SourceSpec::BoundState => Ok(2.0 / (kappa + 1.0)),
            SourceSpec::CompactSupport(c) => {
                let r = c.support_radius;
                let width = if kappa.im != 0.0 {
                    (std::f64::consts::PI / kappa.im.abs()).min(r / 4.0)
                } else {
                    r / 4.0
                };
                let breaks = uniform_breaks(0.0, r, width);
                let q = if c.even {
                    integrate(|x| 2.0 * (-kappa * x).exp() * c.value(x), &breaks, c.quad_tol, MAX_PANELS)
                } else {
                    integrate(
                        |x| (-kappa * x).exp() * (c.value(x) + c.value(-x)),
                        &breaks,
                        c.quad_tol,
                        MAX_PANELS,
                    )
                };
                if q.err > c.quad_tol {
                    return Err(Error::QuadratureFailure {
                        index: idx,
                        estimate: q.err,
                        tol: c.quad_tol,
                    });
                }
                Ok(q.value)
            }
        }
    }

    /// `∫ (1/(2 kappa)) exp(-kappa |x - y|) psi0(y) dy`, the free resolvent
    /// applied to `psi0`.
    pub fn free_resolvent(&self, kappa: Complex64, x: f64) -> Result<Complex64> {
        match self {
            SourceSpec::BoundState => {
                let ax = x.abs();
                let k2m1 = kappa * kappa - 1.0;
                let integral = if k2m1.norm() < 1e-6 {
                    // kappa -> 1 limit of the expression below, with the
                    // first-order correction in (kappa - 1)
                    let d = kappa - 1.0;
                    let base = (1.0 + ax) * (-ax).exp();
                    let slope = -0.5 * (1.0 + ax + ax * ax) * (-ax).exp();
                    base + d * slope
                } else {
                    2.0 * (kappa * (-ax).exp() - (-kappa * ax).exp()) / k2m1
                };
                Ok(integral / (2.0 * kappa))
            }
            SourceSpec::CompactSupport(c) => {
                let r = c.support_radius;
                let mut breaks = vec![-r, 0.0, r];
                if x.abs() < r && x != 0.0 {
                    breaks.push(x);
                }
                breaks.sort_by(f64::total_cmp);
                let width = if kappa.im != 0.0 {
                    (std::f64::consts::PI / kappa.im.abs()).min(r / 4.0)
                } else {
                    r / 4.0
                };
                let mut fine = Vec::new();
                for w in breaks.windows(2) {
                    let seg = uniform_breaks(w[0], w[1], width);
                    if fine.is_empty() {
                        fine.extend(seg);
                    } else {
                        fine.extend(seg.into_iter().skip(1));
                    }
                }
                let q = integrate(
                    |y| (-kappa * (x - y).abs()).exp() * c.value(y),
                    &fine,
                    c.quad_tol,
                    MAX_PANELS,
                );
                if q.err > c.quad_tol {
                    return Err(Error::QuadratureFailure {
                        index: None,
                        estimate: q.err,
                        tol: c.quad_tol,
                    });
                }
                Ok(q.value / (2.0 * kappa))
            }
        }
    }
}

/// `g_{m,n}(sigma)`.
pub fn g(source: &SourceSpec, params: &PulseParams, sigma: f64, idx: ModeIndex) -> Result<Complex64> {
    let k = kappa(params, sigma, idx)?;
    match source {
        SourceSpec::BoundState => Ok(I / (k + 1.0)),
        _ => Ok(0.5 * I * source.laplace_weight(k, Some(idx))?),
    }
}

/// `g_{m,n}` for every `n` in `n_range`.
pub fn g_row(
    source: &SourceSpec,
    params: &PulseParams,
    sigma: f64,
    m: i64,
    n_range: RangeInclusive<i64>,
) -> Result<Vec<Complex64>> {
    n_range.map(|n| g(source, params, sigma, ModeIndex::new(m, n))).collect()
}

/// `g_{m,n}(sigma0)` in working precision. The bound state uses the exact
/// closed form; quadrature results carry double precision only.
pub fn g_at<T: Scalar>(source: &SourceSpec, params: &PulseParams, idx: ModeIndex, ctx: T::Ctx) -> Result<T> {
    let i = T::from_c64(I, ctx);
    match source {
        SourceSpec::BoundState => {
            let k = kappa_at::<T>(params, idx, ctx)?;
            Ok(i / (k + T::from_f64(1.0, ctx)))
        }
        _ => {
            let k = kappa_at::<T>(params, idx, ctx)?.to_c64();
            let w = source.laplace_weight(k, Some(idx))?;
            Ok(T::from_c64(0.5 * I * w, ctx))
        }
    }
}

impl fmt::Debug for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SourceSpec({self})")
    }
}

impl fmt::Display for SourceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SourceSpec::BoundState => f.write_str("bound"),
            SourceSpec::CompactSupport(c) => f.write_str(&c.label),
        }
    }
}

impl FromStr for SourceSpec {
    type Err = Error;

    /// `bound`, `bump`, `bump:radius=R` or `bump:radius=R,tol=T`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, opts) = s.split_once(':').unwrap_or((s, ""));
        match kind {
            "bound" if opts.is_empty() => Ok(SourceSpec::BoundState),
            "bump" => {
                let mut radius = 1.0;
                let mut tol = 1e-12;
                for kv in opts.split(',').filter(|kv| !kv.is_empty()) {
                    let (k, v) = kv
                        .split_once('=')
                        .ok_or_else(|| Error::InvalidParameter(format!("bad source option {kv:?}")))?;
                    let v: f64 = v
                        .parse()
                        .map_err(|_| Error::InvalidParameter(format!("bad number in {kv:?}")))?;
                    match k {
                        "radius" => radius = v,
                        "tol" => tol = v,
                        _ => return Err(Error::InvalidParameter(format!("unknown source option {k:?}"))),
                    }
                }
                SourceSpec::bump_with_tol(radius, tol)
            }
            _ => Err(Error::InvalidParameter(format!(
                "unknown initial condition {s:?} (expected \"bound\" or \"bump:radius=R\")"
            ))),
        }
    }
}
