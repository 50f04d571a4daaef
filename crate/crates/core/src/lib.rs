//! Survival probability of a one-dimensional delta-well atom driven by a
//! damped oscillating pulse.

// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod omega0;
pub mod pde;
pub mod precision;
pub mod quadrature;
pub mod resolvent;
pub mod scalar;
pub mod source;
pub mod spectral;
pub mod validate;

pub use error::{Error, Result};
pub use precision::PrecisionPolicy;
pub use resolvent::{survival_amplitude, SurvivalResult};
pub use source::SourceSpec;
pub use spectral::{ModeIndex, PulseParams, TruncationSpec};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/mode-lattice.md")]
    mod mode_lattice {}
    #[doc = include_str!("../../../book/src/path-sums.md")]
    mod path_sums {}
    #[doc = include_str!("../../../book/src/omega0.md")]
    mod omega0 {}
    #[doc = include_str!("../../../book/src/residues.md")]
    mod residues {}
    #[doc = include_str!("../../../book/src/undamped.md")]
    mod undamped {}
    #[doc = include_str!("../../../book/src/time-domain.md")]
    mod time_domain {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../book/src/validation.md")]
    mod validation {}
}
