use num_complex::Complex64;
use pulsewell::pde::{evolve, remainder_decay_check, survival_projection, GridSpec};
use pulsewell::{survival_amplitude, PrecisionPolicy, PulseParams, SourceSpec, TruncationSpec};

fn spectral(params: &PulseParams, source: &SourceSpec) -> Complex64 {
    survival_amplitude(params, source, &TruncationSpec::default(), &PrecisionPolicy::default())
        .unwrap()
        .r
}

fn oracle_probability(params: &PulseParams, source: &SourceSpec, grid: &GridSpec) -> f64 {
    let field = evolve(params, source, grid).unwrap();
    survival_projection(&field, grid.t_max).unwrap().norm_sqr()
}

#[test]
fn shifted_base_point_agrees_with_the_oracle() {
    let p = PulseParams::new(2.0, 0.6, 1.0).unwrap();
    assert!(p.is_shifted());
    let s = SourceSpec::BoundState;
    let spectral = spectral(&p, &s).norm_sqr();
    let oracle = oracle_probability(&p, &s, &GridSpec::default());
    assert!((oracle / spectral - 1.0).abs() < 2e-3, "spectral {spectral}, oracle {oracle}");
}

#[test]
fn compact_source_agrees_with_the_oracle() {
    let p = PulseParams::new(1.0, 3.0, 1.0).unwrap();
    let s = SourceSpec::bump(2.0).unwrap();
    let spectral = spectral(&p, &s).norm_sqr();
    let oracle = oracle_probability(&p, &s, &GridSpec::default());
    assert!((oracle / spectral - 1.0).abs() < 2e-3, "spectral {spectral}, oracle {oracle}");
}

#[test]
fn halving_the_spacing_converges_at_second_order() {
    let p = PulseParams::new(1.0, 3.0, 1.0).unwrap();
    let s = SourceSpec::BoundState;
    let coarse = GridSpec {
        half_length: 200.0,
        t_max: 10.0,
        ..GridSpec::default()
    };
    let fine = coarse.refined();
    let finest = fine.refined();
    let [a, b, c] = [coarse, fine, finest].map(|g| oracle_probability(&p, &s, &g));
    let ratio = (a - b).abs() / (b - c).abs();
    assert!((3.5..4.5).contains(&ratio), "change ratio {ratio}");
}

#[test]
fn undisturbed_bound_state_turns_at_unit_rate() {
    let p = PulseParams::new(0.0, 0.0, 0.0).unwrap();
    let grid = GridSpec {
        half_length: 40.0,
        t_max: 10.0,
        ..GridSpec::default()
    };
    let field = evolve(&p, &SourceSpec::BoundState, &grid).unwrap();
    let (z0, z1) = (survival_projection(&field, 0.5).unwrap(), survival_projection(&field, 10.0).unwrap());
    // unwrap the phase by stepping through the stored samples
    let proj = field.projections();
    let mut turned = 0.0;
    for w in proj.windows(2).filter(|w| w[0].0 >= 0.5 - 1e-9 && w[1].0 <= 10.0 + 1e-9) {
        turned += (w[1].1 / w[0].1).arg();
    }
    let rate = turned / 9.5;
    assert!((rate - 1.0).abs() < 0.01, "rate {rate}");
    assert!((z1.norm() - z0.norm()).abs() < 1e-6);
}

#[test]
fn remainder_decays_after_the_transient() {
    let p = PulseParams::new(1.0, 3.0, 1.0).unwrap();
    let s = SourceSpec::BoundState;
    let grid = GridSpec {
        half_length: 300.0,
        t_max: 15.0,
        ..GridSpec::default()
    };
    let field = evolve(&p, &s, &grid).unwrap();
    let exponent = remainder_decay_check(&field, &p, spectral(&p, &s), (5.0, 15.0)).unwrap();
    assert!(exponent < -0.5, "exponent {exponent}");
}
