//! Solution of the mode-lattice recurrence
//!
//! ```text
//! (kappa_{m,n} - 1) A_{m,n} = -(alpha/2) (A_{m+1,n+1} + A_{m+1,n-1}) + g_{m,n}
//! ```
//!
//! at the base point `sigma0`, and everything derived from it: the survival
//! amplitude, the residue lattice, mode profiles, the short-pulse variant and
//! the undamped (`lambda = 0`) operator check.

mod lambda0;
mod path_sum;
mod profile;
mod residue;
mod survival;

use std::cell::RefCell;
use std::collections::{BTreeMap, HashMap};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::scalar::Scalar;
use crate::source::{g_at, SourceSpec};
use crate::spectral::{bcoef_at, ModeIndex, PulseParams};

pub use lambda0::{lambda0_diagonal, lambda0_min_singular, lambda0_operator};
pub use path_sum::{
    brute_force_a, brute_force_with, path_sum_a, path_sum_adaptive_with, path_sum_fixed, path_sum_fixed_with,
    PathSum, MAX_ENUMERATION_DEPTH,
};
pub use profile::mode_profile;
pub use residue::{residue_check_indices, residue_lattice, MIN_RESIDUE_ROW};
pub use survival::{
    assemble_inhomogeneous, evaluate_survival, short_pulse_params, short_pulse_survival, survival_amplitude, Status,
    SurvivalResult,
};

/// Source of the `B` and `g` coefficients a path sum multiplies together.
pub trait Coefficients<T: Scalar> {
    fn b(&self, idx: ModeIndex) -> Result<T>;
    fn g(&self, idx: ModeIndex) -> Result<T>;
    fn ctx(&self) -> T::Ctx;
}

/// Coefficients of one parameter point, memoized per index.
pub struct LatticeCoefficients<'a, T: Scalar> {
    params: &'a PulseParams,
    source: &'a SourceSpec,
    ctx: T::Ctx,
    b_cache: RefCell<HashMap<ModeIndex, T>>,
    g_cache: RefCell<HashMap<ModeIndex, T>>,
}

impl<'a, T: Scalar> LatticeCoefficients<'a, T> {
    pub fn new(params: &'a PulseParams, source: &'a SourceSpec, ctx: T::Ctx) -> Self {
        Self {
            params,
            source,
            ctx,
            b_cache: RefCell::default(),
            g_cache: RefCell::default(),
        }
    }

    pub fn params(&self) -> &PulseParams {
        self.params
    }
}

impl<T: Scalar> Coefficients<T> for LatticeCoefficients<'_, T> {
    fn b(&self, idx: ModeIndex) -> Result<T> {
        if let Some(v) = self.b_cache.borrow().get(&idx) {
            return Ok(v.clone());
        }
        let v = bcoef_at::<T>(self.params, idx, self.ctx)?;
        self.b_cache.borrow_mut().insert(idx, v.clone());
        Ok(v)
    }

    fn g(&self, idx: ModeIndex) -> Result<T> {
        if let Some(v) = self.g_cache.borrow().get(&idx) {
            return Ok(v.clone());
        }
        let v = g_at::<T>(self.source, self.params, idx, self.ctx)?;
        self.g_cache.borrow_mut().insert(idx, v.clone());
        Ok(v)
    }

    fn ctx(&self) -> T::Ctx {
        self.ctx
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LatticeKind {
    InhomogeneousA,
    HomogeneousA0,
    ResiduesR,
}

/// Sparse map from lattice index to value; absent entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientLattice {
    pub kind: LatticeKind,
    pub entries: BTreeMap<ModeIndex, Complex64>,
}

impl CoefficientLattice {
    pub fn new(kind: LatticeKind) -> Self {
        Self {
            kind,
            entries: BTreeMap::new(),
        }
    }

    pub fn get(&self, idx: ModeIndex) -> Complex64 {
        self.entries.get(&idx).copied().unwrap_or_default()
    }

    pub fn insert(&mut self, idx: ModeIndex, value: Complex64) {
        self.entries.insert(idx, value);
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn rows(&self) -> Option<(i64, i64)> {
        let lo = self.entries.keys().map(|k| k.m).min()?;
        let hi = self.entries.keys().map(|k| k.m).max()?;
        Some((lo, hi))
    }

    /// Largest `|(kappa - 1) X_{m,n} + (alpha/2)(X_{m+1,n+1} + X_{m+1,n-1}) - rhs|`
    /// over `indices`, where `rhs` is `g` for the inhomogeneous recurrence and
    /// zero otherwise. The value returned is scaled by `1 + |X_{m,n}|`.
    pub fn recurrence_residual(
        &self,
        params: &PulseParams,
        source: Option<&SourceSpec>,
        indices: impl IntoIterator<Item = ModeIndex>,
    ) -> Result<f64> {
        let mut worst = 0.0f64;
        for idx in indices {
            let kappa = crate::spectral::kappa_at::<Complex64>(params, idx, ())?;
            let up = self.get(ModeIndex::new(idx.m + 1, idx.n + 1)) + self.get(ModeIndex::new(idx.m + 1, idx.n - 1));
            let rhs = match source {
                Some(s) => g_at::<Complex64>(s, params, idx, ())?,
                None => Complex64::new(0.0, 0.0),
            };
            let x = self.get(idx);
            let residual = ((kappa - 1.0) * x + 0.5 * params.alpha * up - rhs).norm();
            worst = worst.max(residual / (1.0 + x.norm()));
        }
        Ok(worst)
    }
}
