use num_complex::Complex64;
use proptest::prelude::*;
use pulsewell::omega0::{asymptotic_r, evaluate_omega0, omega0_series};
use pulsewell::resolvent::{
    evaluate_survival, residue_check_indices, residue_lattice, survival_amplitude, CoefficientLattice,
};
use pulsewell::spectral::kappa;
use pulsewell::{ModeIndex, PrecisionPolicy, PulseParams, SourceSpec, TruncationSpec};

fn policy() -> PrecisionPolicy {
    PrecisionPolicy::default()
}

fn at_depth(params: &PulseParams, depth: usize) -> pulsewell::SurvivalResult {
    let trunc = TruncationSpec {
        depth,
        tol: 1e-300,
        max_depth: depth,
    };
    evaluate_survival(params, &SourceSpec::BoundState, &trunc, &policy()).unwrap()
}

/// Residual of the homogeneous recurrence at `idx`, from an independent
/// evaluation of the branch roots.
fn homogeneous_residual(lat: &CoefficientLattice, params: &PulseParams, idx: ModeIndex) -> f64 {
    let k = kappa(params, 1.0, ModeIndex::new(idx.m, idx.n - params.resonant_n())).unwrap();
    let up = lat.get(ModeIndex::new(idx.m + 1, idx.n + 1)) + lat.get(ModeIndex::new(idx.m + 1, idx.n - 1));
    let lhs = (k - 1.0) * lat.get(idx);
    (lhs + 0.5 * params.alpha * up).norm() / (1.0 + lhs.norm())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn error_estimate_bounds_the_deeper_change(lambda in 0.3f64..3.0, omega in 1.2f64..8.0, alpha in 0.2f64..1.5, depth in 8usize..20) {
        let p = PulseParams::new(lambda, omega, alpha).unwrap();
        let shallow = at_depth(&p, depth);
        let deep = at_depth(&p, depth + 8);
        prop_assert!((shallow.r - deep.r).norm() <= shallow.err_estimate, "{} > {}", (shallow.r - deep.r).norm(), shallow.err_estimate);
    }

    #[test]
    fn probability_respects_unit_norm(lambda in 0.2f64..4.0, omega in 0.5f64..10.0, alpha in 0.0f64..2.0, bump in any::<bool>()) {
        let p = PulseParams::new(lambda, omega, alpha).unwrap();
        let source = if bump { SourceSpec::bump(1.5).unwrap() } else { SourceSpec::BoundState };
        let r = survival_amplitude(&p, &source, &TruncationSpec::default(), &policy()).unwrap();
        prop_assert!(r.probability <= 1.0 + 10.0 * r.err_estimate);
        prop_assert!(r.probability.is_finite() && r.err_estimate.is_finite());
    }

    #[test]
    fn lattice_solver_reduces_to_the_series(lambda in 0.4f64..3.0) {
        let p = PulseParams::new(lambda, 0.0, 1.0).unwrap();
        let lattice = survival_amplitude(&p, &SourceSpec::BoundState, &TruncationSpec::default(), &policy()).unwrap();
        let series = evaluate_omega0(lambda, &SourceSpec::BoundState, 1e-14, &policy()).unwrap();
        prop_assert!((lattice.r - series.r).norm() <= 1e-10 * series.r.norm());
    }

    #[test]
    fn series_is_insensitive_to_summation_order(lambda in 0.1f64..2.0) {
        let s = omega0_series(lambda, &SourceSpec::BoundState, 1e-12, &policy()).unwrap();
        prop_assert!(s.order_sensitivity() <= 1e-10);
    }

    #[test]
    fn residues_fill_only_the_cone(lambda in 0.3f64..3.0, omega in 1.1f64..6.0, alpha in 0.2f64..1.5) {
        let p = PulseParams::new(lambda, omega, alpha).unwrap();
        let r = survival_amplitude(&p, &SourceSpec::BoundState, &TruncationSpec::default(), &policy()).unwrap().r;
        let lat = residue_lattice(r, &p, -12).unwrap();
        for (idx, v) in lat.entries.iter() {
            if *v != Complex64::new(0.0, 0.0) {
                prop_assert!(idx.m <= 0 && idx.n.abs() <= idx.m.abs() && (idx.m + idx.n) % 2 == 0, "{idx:?}");
            }
        }
        prop_assert_eq!(lat.get(ModeIndex::new(0, 0)), r);
        for idx in residue_check_indices(&p, -12) {
            if idx.m < 0 {
                prop_assert!(homogeneous_residual(&lat, &p, idx) < 1e-10, "{idx:?}");
            }
        }
    }
}

#[test]
fn doubled_asymptote_is_approached_as_damping_shrinks() {
    let gaps: Vec<f64> = [1.0, 0.5, 0.2, 0.1]
        .iter()
        .map(|&l| {
            let r = evaluate_omega0(l, &SourceSpec::BoundState, 1e-12, &policy()).unwrap().r;
            (r.norm() / (2.0 * asymptotic_r(l).unwrap().norm()) - 1.0).abs()
        })
        .collect();
    assert!(gaps.windows(2).all(|w| w[1] < w[0]), "{gaps:?}");
}

#[test]
fn printed_asymptote_is_not_approached() {
    // the ratio to the undoubled constant moves away from 1, see the README
    let ratios: Vec<f64> = [1.0, 0.5, 0.2, 0.1]
        .iter()
        .map(|&l| {
            let r = evaluate_omega0(l, &SourceSpec::BoundState, 1e-12, &policy()).unwrap().r;
            r.norm() / asymptotic_r(l).unwrap().norm()
        })
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] > w[0] && w[0] > 1.5), "{ratios:?}");
}

#[test]
fn shifted_base_point_matches_unshifted_neighbour() {
    // just below and above omega = 1 the resonant column moves by one
    let source = SourceSpec::BoundState;
    let below = PulseParams::new(1.0, 1.0 - 1e-9, 1.0).unwrap();
    let above = PulseParams::new(1.0, 1.0 + 1e-9, 1.0).unwrap();
    assert_eq!(below.resonant_n(), 1);
    assert_eq!(above.resonant_n(), 0);
    let a = survival_amplitude(&below, &source, &TruncationSpec::default(), &policy()).unwrap();
    let b = survival_amplitude(&above, &source, &TruncationSpec::default(), &policy()).unwrap();
    assert!((a.probability - b.probability).abs() < 1e-6, "{} vs {}", a.probability, b.probability);
}
