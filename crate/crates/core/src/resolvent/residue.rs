//! Residues of the Laplace transform at the lattice points `m <= 0`.

use num_complex::Complex64;

use super::{CoefficientLattice, LatticeKind};
use crate::error::{Error, Result};
use crate::spectral::{bcoef, ModeIndex, PulseParams};

/// Deepest row the residue fill accepts.
pub const MIN_RESIDUE_ROW: i64 = -64;

/// Seed `R_{0,n0} = r` and fill rows `m = -1, ..., m_min` with the
/// homogeneous recurrence. Only the parity cone `|n - n0| <= |m|`,
/// `m + n - n0` even is stored; everything else is zero.
pub fn residue_lattice(r: Complex64, params: &PulseParams, m_min: i64) -> Result<CoefficientLattice> {
    params.require_damped()?;
    if !(MIN_RESIDUE_ROW..=0).contains(&m_min) {
        return Err(Error::InvalidParameter(format!(
            "m_min must lie in [{MIN_RESIDUE_ROW}, 0], got {m_min}"
        )));
    }
    let n0 = params.resonant_n();
    let half_alpha = 0.5 * params.alpha;
    let mut lattice = CoefficientLattice::new(LatticeKind::ResiduesR);
    lattice.insert(ModeIndex::new(0, n0), r);
    for m in (m_min..0).rev() {
        let depth = -m;
        for k in (-depth..=depth).step_by(2) {
            let n = n0 + k;
            let up = lattice.get(ModeIndex::new(m + 1, n + 1)) + lattice.get(ModeIndex::new(m + 1, n - 1));
            let idx = ModeIndex::new(m, n);
            lattice.insert(idx, -half_alpha * up * bcoef(params, idx)?);
        }
    }
    Ok(lattice)
}

/// Indices of rows `m_min..=0` wide enough to include the zeros bordering
/// the cone.
pub fn residue_check_indices(params: &PulseParams, m_min: i64) -> Vec<ModeIndex> {
    let n0 = params.resonant_n();
    (m_min..=0)
        .flat_map(|m| (m - 2..=2 - m).map(move |k| ModeIndex::new(m, n0 + k)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::kappa_at;

    #[test]
    fn first_row_examples() {
        let p = PulseParams::new(0.6, 2.0, 1.0).unwrap();
        let r = Complex64::new(0.3, 0.8);
        let lat = residue_lattice(r, &p, -1).unwrap();
        assert_eq!(lat.get(ModeIndex::new(0, 0)), r);
        assert_eq!(lat.get(ModeIndex::new(-1, 0)), Complex64::new(0.0, 0.0));
        for n in [-1, 1] {
            let k = kappa_at::<Complex64>(&p, ModeIndex::new(-1, n), ()).unwrap();
            let expected = -0.5 * r / (k - 1.0);
            assert!((lat.get(ModeIndex::new(-1, n)) - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn support_is_the_parity_cone_and_recurrence_holds() {
        for &(lambda, omega) in &[(0.6, 2.0), (0.3, 0.45), (2.0, 7.0)] {
            let p = PulseParams::new(lambda, omega, 1.0).unwrap();
            let n0 = p.resonant_n();
            let lat = residue_lattice(Complex64::new(0.1, 0.9), &p, -20).unwrap();
            for (idx, v) in &lat.entries {
                let k = idx.n - n0;
                assert!(idx.m <= 0 && k.abs() <= -idx.m && (idx.m + k) % 2 == 0);
                assert!(v.is_finite());
            }
            let res = lat
                .recurrence_residual(&p, None, residue_check_indices(&p, -20))
                .unwrap();
            assert!(res < 1e-10, "{res}");
        }
    }

    #[test]
    fn rejects_rows_out_of_range() {
        let p = PulseParams::new(1.0, 3.0, 1.0).unwrap();
        assert!(residue_lattice(Complex64::new(0.0, 1.0), &p, -65).is_err());
        assert!(residue_lattice(Complex64::new(0.0, 1.0), &p, 1).is_err());
    }
}
