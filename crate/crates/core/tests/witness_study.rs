//! The radial witness: its divergence pattern and the constants it must
//! reproduce.

use gradsys_core::radial::unit_sphere_area;
use gradsys_core::thresholds::{witness_divergence_study, WitnessParams};

fn params() -> WitnessParams {
    WitnessParams {
        n_dim: 7,
        p: 2.0,
        eps: 0.5,
        gamma: 3.0,
    }
}

/// On the inner piece the weighted mass integrand is exactly `1/r`, so each
/// halving of the cutoff adds exactly `ω_6 ln 2` to the denominator.
#[test]
fn denominator_increments_are_omega_ln2() {
    let cutoffs: Vec<f64> = (3..=10).map(|k| 2.0_f64.powi(-k)).collect();
    let study = witness_divergence_study(&params(), &cutoffs).unwrap();
    let want = unit_sphere_area(7) * std::f64::consts::LN_2;
    for w in study.denominators.windows(2) {
        let inc = w[1] - w[0];
        assert!(
            (inc - want).abs() < 1e-4 * want,
            "increment {inc} vs omega*ln2 {want}"
        );
    }
}

/// The numerator settles (its tail is an integrable `r^{ε-1}` power) while
/// the denominator diverges, so the capacity ratio collapses.
#[test]
fn ratio_collapses_monotonically() {
    let cutoffs: Vec<f64> = (3..=10).map(|k| 2.0_f64.powi(-k)).collect();
    let study = witness_divergence_study(&params(), &cutoffs).unwrap();
    let ratios = study.ratios();
    for w in ratios.windows(2) {
        assert!(w[1] < w[0], "ratios must decrease: {ratios:?}");
    }
    // numerator growth between consecutive cutoffs shrinks like sqrt(delta)
    let n = &study.numerators;
    let g1 = n[4] - n[3];
    let g2 = n[5] - n[4];
    let contraction = g2 / g1;
    assert!(
        (contraction - 1.0 / 2.0_f64.sqrt()).abs() < 0.05,
        "tail contraction {contraction}"
    );
}

/// A truncated single-cutoff run is just direct quadrature over the annulus.
#[test]
fn truncation_is_plain_quadrature() {
    let study = witness_divergence_study(&params(), &[0.25]).unwrap();
    assert_eq!(study.numerators.len(), 1);
    assert!(study.numerators[0] > 0.0 && study.denominators[0] > 0.0);
}

/// The source sits in L^m exactly below N/(3p'+ε): the radial integral of
/// `f^m` converges there and blows up past it.
#[test]
fn source_integrability_window() {
    use gradsys_core::radial::radial_integrate;
    use gradsys_core::thresholds::build_witness;
    let w = build_witness(&params()).unwrap();
    let bound = 7.0 / 6.5;
    let below = bound - 0.02;
    let v = radial_integrate(|r| w.f.eval(r).powf(below), 7, 0.0, 1.0, 1e-8).unwrap();
    assert!(v.is_finite() && v > 0.0);
    let above = bound + 0.05;
    assert!(radial_integrate(|r| w.f.eval(r).powf(above), 7, 0.0, 1.0, 1e-8).is_err());
}
