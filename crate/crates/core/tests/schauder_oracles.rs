//! Oracle checks of the fixed-point map against eigenfunction reductions and
//! fine-grid references.

use std::f64::consts::PI;

use gradsys_core::exponents::Exponents;
use gradsys_core::grid::{build_grid, sample, FnDescriptor, ScalarField};
use gradsys_core::schauder::{default_test_set, map_t, weak_residual, ProblemData};

fn problem(n: usize, p: f64, q: f64, lambda: f64, alpha: f64) -> ProblemData {
    let g = build_grid(2, n).unwrap();
    let one = sample(&g, &FnDescriptor::One).unwrap();
    let e = Exponents::new(p, q, 2.0, 2.0, 2.0)
        .unwrap()
        .with_chosen_r()
        .unwrap();
    ProblemData::new(one.clone(), one, lambda, alpha, e).unwrap()
}

/// With `w` the first sine mode, `q = 1` and no sources, the first solve is
/// the eigenfunction reduction `u = w/(2π²)`; the second solve is checked
/// against a fine-grid reference sampled at shared nodes.
#[test]
fn map_matches_eigenfunction_and_fine_grid_reference() {
    // q = 1 needs pq > 1, so take p = 2; exponents that admit the subcritical
    // branch in dimension 3
    let build = |n: usize| -> (ProblemData, ScalarField) {
        let g = build_grid(2, n).unwrap();
        let zero = ScalarField::zeros(&g);
        let e = Exponents::new(2.0, 1.0, 2.0, 2.0, 3.0)
            .unwrap()
            .with_chosen_r()
            .unwrap();
        let d = ProblemData::new(zero.clone(), zero, 0.0, 0.0, e).unwrap();
        let w = sample(&g, &FnDescriptor::SinProd).unwrap();
        (d, w)
    };

    let (d_fine, w_fine) = build(257);
    let (_, v_fine) = map_t(&w_fine, &d_fine).unwrap();

    let n = 65;
    let (d, w) = build(n);
    let (u, v) = map_t(&w, &d).unwrap();

    let g = w.grid().clone();
    let u_want = w.scaled(1.0 / (2.0 * PI * PI)).with_zero_boundary();
    let u_err = u.sub(&u_want).unwrap().abs_max();
    assert!(u_err < 4.0e-5, "eigenfunction reduction error {u_err}");

    // nodes coincide every 4th fine node (256 = 4 * 64)
    let step = 4;
    let nf = 257;
    let mut v_err = 0.0_f64;
    for ix in 0..n {
        for iy in 0..n {
            let coarse = v.values()[ix * n + iy];
            let fine = v_fine.values()[(ix * step) * nf + iy * step];
            v_err = v_err.max((coarse - fine).abs());
        }
    }
    assert!(v_err < 3.0e-6, "fine-grid reference error {v_err}");
    let _ = g;
}

/// The pair `u = sinprod/(2π²)`, `v = sinprod` satisfies the first integral
/// identity exactly in the continuum (with `q = 1`, no sources); the
/// discrete defect must shrink at second order.
#[test]
fn weak_residual_eigen_pair_second_order() {
    let mut res = Vec::new();
    for n in [33usize, 65] {
        let g = build_grid(2, n).unwrap();
        let zero = ScalarField::zeros(&g);
        let e = Exponents::new(2.0, 1.0, 2.0, 2.0, 3.0)
            .unwrap()
            .with_chosen_r()
            .unwrap();
        let d = ProblemData::new(zero.clone(), zero, 0.0, 0.0, e).unwrap();
        let v = sample(&g, &FnDescriptor::SinProd).unwrap();
        let u = v.scaled(1.0 / (2.0 * PI * PI));
        let ts = default_test_set(&g).unwrap();
        let (r1, _) = weak_residual(&u, &v, &d, &ts).unwrap();
        res.push(r1);
    }
    assert!(res[0] < 6.0e-4, "n=33 residual {}", res[0]);
    assert!(res[1] < 1.0e-4, "n=65 residual {}", res[1]);
    // at least second-order decay (the coarse step superconverges a bit)
    let ratio = res[0] / res[1];
    assert!(ratio > 3.0, "refinement ratio {ratio}");
}

#[test]
fn map_rejects_inadmissible_exponents() {
    let g = build_grid(2, 9).unwrap();
    let one = sample(&g, &FnDescriptor::One).unwrap();
    // pm = 8 >= sigma* = 6 in dimension 3, no high branch
    let e = Exponents::new(4.0, 10.0, 2.0, 2.0, 3.0).unwrap();
    let d = ProblemData::new(one.clone(), one, 0.0, 0.0, e).unwrap();
    let w = ScalarField::zeros(&g);
    assert!(map_t(&w, &d).is_err());
}

#[test]
fn one_dimensional_run_converges() {
    use gradsys_core::schauder::{
        calibrate_c_tilde, iterate_to_fixed_point, thresholds_from, Verdict,
    };
    let g = build_grid(1, 101).unwrap();
    let one = sample(&g, &FnDescriptor::One).unwrap();
    let e = Exponents::new(2.0, 2.0, 2.0, 2.0, 2.0)
        .unwrap()
        .with_chosen_r()
        .unwrap();
    let d = ProblemData::new(one.clone(), one, 1e-3, 1e-3, e).unwrap();
    let c = calibrate_c_tilde(&d, 11, 10).unwrap();
    let t = thresholds_from(d.exponents.pq(), c).unwrap();
    let out = iterate_to_fixed_point(&d, &t, None).unwrap();
    assert_eq!(out.report.verdict, Verdict::Converged);
    assert!(out.report.in_ball_all_iterations);
    assert!(out.u.min_value() >= 0.0 && out.v.min_value() >= 0.0);
    let last = out.report.trace.last().unwrap();
    assert!(last.res1 < 1e-5 && last.res2 < 1e-5);
}

#[test]
fn outputs_nonnegative_for_mixed_sign_iterate() {
    // the positive-part truncation keeps the first right side nonnegative
    // even when w dips negative
    let d = problem(33, 2.0, 2.0, 1e-3, 1e-3);
    let g = d.grid().clone();
    let w = ScalarField::from_fn(&g, |c| (2.0 * PI * c[0]).sin() * (PI * c[1]).sin());
    assert!(w.min_value() < 0.0);
    let (u, v) = map_t(&w, &d).unwrap();
    assert!(u.min_value() >= 0.0);
    assert!(v.min_value() >= 0.0);
}
