//! Direct time integration of
//!
//! ```text
//! i psi_t = -psi_xx - 2 delta(x) (1 - alpha exp(-lambda t) cos(omega t)) psi
//! ```
//!
//! on a uniform grid with hard walls, by Crank-Nicolson stepping. The delta
//! is an on-site potential `-2 s (...)/h` at the `x = 0` node, evaluated at
//! the half step, with `s = sinh(h)/h = 1 + O(h^2)`. This weight makes the
//! sampled `exp(-|x|)` an exact eigenvector of the discrete static well, so
//! the initial bound state does not shed grid-scale radiation toward the
//! walls. Used as an independent check of the spectral solver.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::omega0::slope_fit;
use crate::source::SourceSpec;
use crate::spectral::PulseParams;

/// Nodes next to each wall watched for outgoing flux.
pub const EDGE_NODES: usize = 5;
/// Largest `|psi|` allowed on the watched nodes.
pub const EDGE_GUARD: f64 = 1e-6;
/// Largest norm change allowed in one step.
pub const STEP_DRIFT: f64 = 1e-10;
/// Remainders below this are indistinguishable from grid error.
pub const NOISE_FLOOR: f64 = 1e-6;

/// `(t, x, re, im, |psi|^2)`.
pub type SnapshotRow = (f64, f64, f64, f64, f64);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Walls sit at `x = -half_length` and `x = half_length`.
    pub half_length: f64,
    pub h: f64,
    pub dt: f64,
    pub t_max: f64,
    /// Interval between stored snapshots.
    pub sample_every: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            // a sudden change of the well sends flux outward at speed ~16,
            // which must not reach the walls by t_max
            half_length: 600.0,
            h: 0.05,
            dt: 0.01,
            t_max: 30.0,
            sample_every: 0.5,
        }
    }
}

fn near_integer(q: f64) -> Option<usize> {
    let k = q.round();
    ((q - k).abs() <= 1e-9 * q.max(1.0) && k >= 1.0).then_some(k as usize)
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let fields = [self.half_length, self.h, self.dt, self.t_max, self.sample_every];
        if fields.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::InvalidParameter(format!("grid {self:?} needs positive finite fields")));
        }
        if near_integer(self.half_length / self.h).is_none() {
            return Err(Error::InvalidParameter(format!(
                "half_length / h must be an integer, got {}",
                self.half_length / self.h
            )));
        }
        if self.cells() < 4 * EDGE_NODES {
            return Err(Error::InvalidParameter("grid has too few nodes".into()));
        }
        if self.dt > self.h {
            return Err(Error::InvalidParameter(format!("dt = {} exceeds h = {}", self.dt, self.h)));
        }
        if near_integer(self.t_max / self.dt).is_none() || near_integer(self.sample_every / self.dt).is_none() {
            return Err(Error::InvalidParameter(
                "t_max and sample_every must be whole multiples of dt".into(),
            ));
        }
        Ok(())
    }

    /// Number of cells; nodes are `0..=cells`.
    pub fn cells(&self) -> usize {
        2 * (self.half_length / self.h).round() as usize
    }

    pub fn center(&self) -> usize {
        self.cells() / 2
    }

    pub fn x(&self, j: usize) -> f64 {
        (j as f64 - self.center() as f64) * self.h
    }

    pub fn steps(&self) -> usize {
        (self.t_max / self.dt).round() as usize
    }

    fn stride(&self) -> usize {
        (self.sample_every / self.dt).round() as usize
    }

    /// Same box and times at half the spacing.
    pub fn refined(&self) -> Self {
        Self {
            h: 0.5 * self.h,
            dt: self.dt.min(0.5 * self.h),
            ..*self
        }
    }
}

/// Weight `s` of the on-site delta, `sinh(h)/h`.
pub fn delta_weight(h: f64) -> f64 {
    h.sinh() / h
}

/// Energy of the bound state `exp(-|x|)` of the discrete static well,
/// `-2 (cosh h - 1)/h^2 = -1 - h^2/12 + O(h^4)`.
pub fn bound_state_energy(h: f64) -> f64 {
    -2.0 * (h.cosh() - 1.0) / (h * h)
}

/// Phase rate of the discrete bound state under Crank-Nicolson stepping,
/// `(2/dt) atan(E_h dt/2)`.
pub fn stepped_bound_energy(h: f64, dt: f64) -> f64 {
    2.0 / dt * (0.5 * bound_state_energy(h) * dt).atan()
}

/// Stored snapshots of one run.
#[derive(Debug, Clone)]
pub struct WaveField {
    pub grid: GridSpec,
    pub times: Vec<f64>,
    pub samples: Vec<Vec<Complex64>>,
    pub norms: Vec<f64>,
    /// Largest norm change seen in any single step.
    pub max_step_drift: f64,
    /// `exp(-|x|)` on the nodes, normalized on the grid.
    bound: Vec<f64>,
}

fn discrete_norm_sq(h: f64, psi: &[Complex64]) -> f64 {
    h * psi.iter().map(|z| z.norm_sqr()).sum::<f64>()
}

fn bound_profile(grid: &GridSpec) -> Vec<f64> {
    let cells = grid.cells();
    let mut u: Vec<f64> = (0..=cells)
        .map(|j| if j == 0 || j == cells { 0.0 } else { (-grid.x(j).abs()).exp() })
        .collect();
    let scale = (grid.h * u.iter().map(|v| v * v).sum::<f64>()).sqrt().recip();
    u.iter_mut().for_each(|v| *v *= scale);
    u
}

impl WaveField {
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let tol = 1e-9 * t.abs().max(1.0);
        self.times
            .iter()
            .position(|&s| (s - t).abs() <= tol)
            .ok_or(Error::TimeNotStored(t))
    }

    pub fn snapshot(&self, t: f64) -> Result<&[Complex64]> {
        Ok(&self.samples[self.index_of(t)?])
    }

    /// `(t, <u_b, psi(t)>)` at every stored time.
    pub fn projections(&self) -> Vec<(f64, Complex64)> {
        self.times
            .iter()
            .zip(&self.samples)
            .map(|(&t, psi)| (t, self.project(psi)))
            .collect()
    }

    fn project(&self, psi: &[Complex64]) -> Complex64 {
        self.grid.h * self.bound.iter().zip(psi).map(|(u, z)| *z * *u).sum::<Complex64>()
    }

    /// `(t, x, re, im, |psi|^2)` for every node of the snapshot at `t`.
    pub fn snapshot_rows(&self, t: f64) -> Result<Vec<SnapshotRow>> {
        let i = self.index_of(t)?;
        let t = self.times[i];
        Ok(self.samples[i]
            .iter()
            .enumerate()
            .map(|(j, z)| (t, self.grid.x(j), z.re, z.im, z.norm_sqr()))
            .collect())
    }
}

/// Solve the tridiagonal system with constant off-diagonal `off` and the
/// given diagonal, overwriting `rhs` with the solution.
fn thomas(off: Complex64, diag: &[Complex64], rhs: &mut [Complex64], scratch: &mut [Complex64]) {
    let n = diag.len();
    scratch[0] = off / diag[0];
    rhs[0] /= diag[0];
    for i in 1..n {
        let denom = diag[i] - off * scratch[i - 1];
        scratch[i] = off / denom;
        rhs[i] = (rhs[i] - off * rhs[i - 1]) / denom;
    }
    for i in (0..n - 1).rev() {
        let next = rhs[i + 1];
        rhs[i] -= scratch[i] * next;
    }
}

fn edge_amplitude(psi: &[Complex64]) -> f64 {
    let n = psi.len() - 1;
    (1..=EDGE_NODES)
        .chain(n - EDGE_NODES..n)
        .map(|j| psi[j].norm())
        .fold(0.0, f64::max)
}

/// Integrate from `psi0` (normalized on the grid) to `grid.t_max`.
pub fn evolve(params: &PulseParams, source: &SourceSpec, grid: &GridSpec) -> Result<WaveField> {
    grid.validate()?;
    let h = grid.h;
    let dt = grid.dt;
    let cells = grid.cells();
    let center = grid.center();
    let mut psi: Vec<Complex64> = (0..=cells)
        .map(|j| {
            let v = if j == 0 || j == cells { 0.0 } else { source.value(grid.x(j)) };
            Complex64::new(v, 0.0)
        })
        .collect();
    let norm0 = discrete_norm_sq(h, &psi);
    if !(norm0 > 0.0) {
        return Err(Error::DegenerateInput("initial data vanishes on the grid".into()));
    }
    let scale = norm0.sqrt().recip();
    psi.iter_mut().for_each(|z| *z *= scale);

    let kinetic = 1.0 / (h * h);
    let weight = delta_weight(h);
    let half = Complex64::new(0.0, 0.5 * dt);
    // interior unknowns are nodes 1..cells-1
    let interior = cells - 1;
    let off = -half * kinetic;
    let base_diag = Complex64::new(1.0, 0.0) + half * 2.0 * kinetic;
    let mut diag = vec![base_diag; interior];
    let mut rhs = vec![Complex64::new(0.0, 0.0); interior];
    let mut scratch = vec![Complex64::new(0.0, 0.0); interior];

    let stride = grid.stride();
    let steps = grid.steps();
    let mut field = WaveField {
        grid: *grid,
        times: vec![0.0],
        samples: vec![psi.clone()],
        norms: vec![1.0],
        max_step_drift: 0.0,
        bound: bound_profile(grid),
    };
    let mut norm = discrete_norm_sq(h, &psi);
    for step in 0..steps {
        let t = step as f64 * dt;
        let tm = t + 0.5 * dt;
        let well = -2.0 * weight * (1.0 - params.alpha * (-params.lambda * tm).exp() * (params.omega * tm).cos()) / h;
        let hpsi = |j: usize, psi: &[Complex64]| {
            let mut v = (2.0 * psi[j] - psi[j - 1] - psi[j + 1]) * kinetic;
            if j == center {
                v += psi[j] * well;
            }
            v
        };
        for j in 1..cells {
            rhs[j - 1] = psi[j] - half * hpsi(j, &psi);
        }
        diag[center - 1] = base_diag + half * well;
        thomas(off, &diag, &mut rhs, &mut scratch);
        diag[center - 1] = base_diag;
        psi[1..cells].copy_from_slice(&rhs);

        let t_next = (step + 1) as f64 * dt;
        let next_norm = discrete_norm_sq(h, &psi);
        let drift = (next_norm - norm).abs();
        field.max_step_drift = field.max_step_drift.max(drift);
        if drift > STEP_DRIFT {
            return Err(Error::StepRejected { t: t_next, drift });
        }
        norm = next_norm;
        let edge = edge_amplitude(&psi);
        if edge >= EDGE_GUARD {
            return Err(Error::Reflected {
                t: t_next,
                amplitude: edge,
            });
        }
        if (step + 1) % stride == 0 || step + 1 == steps {
            field.times.push(t_next);
            field.samples.push(psi.clone());
            field.norms.push(norm);
        }
    }
    Ok(field)
}

/// `<u_b, psi(t)>` with `u_b = exp(-|x|)` normalized on the grid.
pub fn survival_projection(field: &WaveField, t: f64) -> Result<Complex64> {
    Ok(field.project(field.snapshot(t)?))
}

/// Trapezoidal `int_{-a}^{a} |psi(t, x)|^2 dx`, with `a` rounded to the
/// nearest node.
pub fn box_probability(field: &WaveField, t: f64, a_half: f64) -> Result<f64> {
    let grid = &field.grid;
    if !(a_half > 0.0 && a_half <= grid.half_length) {
        return Err(Error::InvalidParameter(format!(
            "box half-width {a_half} outside (0, {}]",
            grid.half_length
        )));
    }
    let psi = field.snapshot(t)?;
    let k = ((a_half / grid.h).round() as usize).max(1);
    let c = grid.center();
    let inner: f64 = (c - k + 1..c + k).map(|j| psi[j].norm_sqr()).sum();
    let ends = 0.5 * (psi[c - k].norm_sqr() + psi[c + k].norm_sqr());
    Ok(grid.h * (inner + ends))
}

/// Power-law exponent of `|sample(t) - reference(t)|` by a log-log fit.
/// Points below [`NOISE_FLOOR`] are dropped.
pub fn fit_remainder_exponent(samples: &[(f64, Complex64)], reference: impl Fn(f64) -> Complex64) -> Result<f64> {
    let points: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(t, z)| (t, (z - reference(t)).norm()))
        .filter(|&(_, d)| d >= NOISE_FLOOR)
        .collect();
    if points.len() < 3 {
        return Err(Error::SignalBelowNoise);
    }
    Ok(slope_fit(&points)?.slope)
}

/// Decay exponent of the projection's distance from the persistent part
/// `-i r exp(-i E t)` over `window`. `E` is the bound-state phase rate of
/// the discrete scheme ([`stepped_bound_energy`]); the factor `-i` matches
/// `r = i` for the undisturbed well.
pub fn remainder_decay_check(
    field: &WaveField,
    params: &PulseParams,
    r_spectral: Complex64,
    window: (f64, f64),
) -> Result<f64> {
    params.require_damped()?;
    let (start, end) = window;
    if !(start < end) {
        return Err(Error::InvalidParameter(format!("empty window [{start}, {end}]")));
    }
    if start < 5.0 / params.lambda {
        return Err(Error::InvalidParameter(format!(
            "window starts at {start}, before the transient ends at {}",
            5.0 / params.lambda
        )));
    }
    let energy = stepped_bound_energy(field.grid.h, field.grid.dt);
    let persistent = -Complex64::i() * r_spectral;
    let samples: Vec<(f64, Complex64)> = field
        .projections()
        .into_iter()
        .filter(|&(t, _)| t >= start - 1e-9 && t <= end + 1e-9)
        .collect();
    fit_remainder_exponent(&samples, |t| persistent * Complex64::from_polar(1.0, -energy * t))
}
