//! The two-solve fixed-point map for the coupled system and its iteration,
//! with invariant-ball tracking, the threshold algebra that sizes the ball,
//! weak-residual certification, and the discrete calibration of the growth
//! constant.
//!
//! One map application solves, for a given iterate `w`,
//!
//! ```text
//!   -Δu = w₊^q + α·g      then      -Δv = |∇u|^p + λ·f,
//! ```
//!
//! and the iteration feeds `v` back in as the next `w`. Convergence is
//! declared on the relative W^{1,1} change of `v`; divergence once the
//! gradient norm has left a tenfold inflation of the invariant ball (after a
//! minimum number of recorded iterations, so blow-up traces stay readable)
//! or as soon as an iterate stops being finite.

use alloc::vec::Vec;

use rand_core::{RngCore, SeedableRng};

use crate::error::{Error, Result};
use crate::exponents::{check_admissibility, choose_r, explain_admissibility, Exponents};
use crate::grid::{gradient, integrate, lp_norm, w11_norm, GridSpec, ScalarField, VectorField};
use crate::math;
use crate::poisson::solve_poisson;

use alloc::sync::Arc;

/// Stop declaring divergence before this many trace rows exist; a blow-up
/// then shows as a monotone tail rather than a single point.
const MIN_ROWS_BEFORE_DIVERGENCE_STOP: usize = 5;

/// Ball-inflation factor beyond which the iteration counts as diverged.
const DIVERGENCE_FACTOR: f64 = 10.0;

/// Margin in the ball-invariance inequality at ball parameter `s`:
/// `s^{1/pq} - c_tilde · s`.
///
/// Positive values of this margin are the room left for the data terms once
/// the nonlinear gain is accounted for; its maximizer fixes the ball radius.
pub fn invariance_margin(s: f64, pq: f64, c_tilde: f64) -> f64 {
    math::powf(s, 1.0 / pq) - c_tilde * s
}

/// The constants realized by maximizing the invariance margin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdConstants {
    /// Product `p·q` of the nonlinearity powers.
    pub pq: f64,
    /// The growth constant of the two-solve chain (calibrated or configured).
    pub c_tilde: f64,
    /// Maximizer of the margin: `(pq·c_tilde)^{-pq/(pq-1)}`.
    pub ell: f64,
    /// Maximum margin `Λ* = ell^{1/pq} - c_tilde·ell > 0`.
    pub lambda_star: f64,
    /// Positive root of the margin: `c_tilde^{-pq/(pq-1)}`.
    pub s_zero: f64,
}

impl ThresholdConstants {
    /// Radius `ell^{1/pq}` of the gradient ball the iteration must stay in.
    pub fn ball_radius(&self) -> f64 {
        math::powf(self.ell, 1.0 / self.pq)
    }
}

/// Closed forms for the margin maximizer, maximum, and root.
pub fn thresholds_from(pq: f64, c_tilde: f64) -> Result<ThresholdConstants> {
    if !(pq > 1.0) {
        return Err(Error::InvalidExponent {
            name: "pq",
            value: pq,
            requirement: "threshold algebra needs pq > 1",
        });
    }
    if !(c_tilde > 0.0) {
        return Err(Error::InvalidExponent {
            name: "c_tilde",
            value: c_tilde,
            requirement: "growth constant must be positive",
        });
    }
    let expo = -pq / (pq - 1.0);
    let ell = math::powf(pq * c_tilde, expo);
    let s_zero = math::powf(c_tilde, expo);
    let lambda_star = invariance_margin(ell, pq, c_tilde);
    if !(ell.is_finite() && s_zero.is_finite() && lambda_star.is_finite() && lambda_star > 0.0) {
        return Err(Error::DegenerateThresholds(
            "pq too close to 1 for finite threshold constants",
        ));
    }
    Ok(ThresholdConstants {
        pq,
        c_tilde,
        ell,
        lambda_star,
        s_zero,
    })
}

/// One instance of the coupled problem: sources, parameters, exponents, and
/// solver knobs.
#[derive(Debug, Clone)]
pub struct ProblemData {
    pub f: ScalarField,
    pub g: ScalarField,
    pub lambda: f64,
    pub alpha: f64,
    pub exponents: Exponents,
    /// Relative W^{1,1} change below which the iteration has converged.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative stencil-residual tolerance of the inner Poisson solves.
    pub poisson_tol: f64,
}

impl ProblemData {
    pub fn new(
        f: ScalarField,
        g: ScalarField,
        lambda: f64,
        alpha: f64,
        exponents: Exponents,
    ) -> Result<Self> {
        if f.grid() != g.grid() {
            return Err(Error::GridMismatch);
        }
        if !(f.is_finite() && g.is_finite()) {
            return Err(Error::NonFiniteField("problem sources"));
        }
        if f.min_value() < 0.0 || g.min_value() < 0.0 {
            return Err(Error::InvalidInput(
                "sources f and g must be nonnegative".into(),
            ));
        }
        if !(lambda >= 0.0 && alpha >= 0.0) {
            return Err(Error::InvalidInput("lambda and alpha must be >= 0".into()));
        }
        Ok(ProblemData {
            f,
            g,
            lambda,
            alpha,
            exponents,
            tol: 1e-8,
            max_iter: 200,
            poisson_tol: 1e-10,
        })
    }

    pub fn grid(&self) -> &Arc<GridSpec> {
        self.f.grid()
    }

    fn r_iter(&self) -> Result<f64> {
        match self.exponents.r_iter() {
            Some(r) => Ok(r),
            None => choose_r(&self.exponents),
        }
    }
}

/// Both readings of the data-smallness region, evaluated with discrete norms.
#[derive(Debug, Clone, Copy)]
pub struct DataRegionReport {
    /// `λ‖f‖_m + α^p‖g‖_σ^p`, the combination the iteration bound uses.
    pub iteration_lhs: f64,
    /// Its admission bound `Λ*/c_tilde`.
    pub iteration_bound: f64,
    /// `λ‖f‖_m + α^p‖g‖_σ` (the g-norm unpowered), the stated-region reading.
    pub stated_lhs: f64,
    /// Its bound `Λ*`.
    pub stated_bound: f64,
    /// Membership under the iteration reading (the operative one).
    pub member: bool,
}

/// Evaluates both forms of the smallness condition on `(λ, α)`.
pub fn data_region_report(d: &ProblemData, t: &ThresholdConstants) -> Result<DataRegionReport> {
    let norm_f = lp_norm(&d.f, d.exponents.m)?;
    let norm_g = lp_norm(&d.g, d.exponents.sigma)?;
    let p = d.exponents.p;
    let iteration_lhs = d.lambda * norm_f + math::powf(d.alpha, p) * math::powf(norm_g, p);
    let stated_lhs = d.lambda * norm_f + math::powf(d.alpha, p) * norm_g;
    let iteration_bound = t.lambda_star / t.c_tilde;
    Ok(DataRegionReport {
        iteration_lhs,
        iteration_bound,
        stated_lhs,
        stated_bound: t.lambda_star,
        member: iteration_lhs <= iteration_bound,
    })
}

/// True when `(λ, α)` lies in the data-smallness region (iteration form).
pub fn pi_membership(d: &ProblemData, t: &ThresholdConstants) -> Result<bool> {
    Ok(data_region_report(d, t)?.member)
}

enum MapStep {
    Fields {
        u: ScalarField,
        v: ScalarField,
    },
    /// A power or sum overflowed; the stage names which right side died.
    NonFinite {
        stage: &'static str,
        u: Option<ScalarField>,
    },
}

fn map_step(w: &ScalarField, d: &ProblemData) -> Result<MapStep> {
    let rhs1 = w
        .positive_part()
        .powf(d.exponents.q)
        .add(&d.g.scaled(d.alpha))?;
    if !rhs1.is_finite() {
        return Err(Error::NonFiniteField("w+^q + alpha*g"));
    }
    let u = solve_poisson(&rhs1, d.poisson_tol)?.solution;
    let rhs2 = gradient(&u)
        .magnitude()
        .powf(d.exponents.p)
        .add(&d.f.scaled(d.lambda))?;
    if !rhs2.is_finite() {
        return Ok(MapStep::NonFinite {
            stage: "|grad u|^p + lambda*f",
            u: Some(u),
        });
    }
    let v = solve_poisson(&rhs2, d.poisson_tol)?.solution;
    if !v.is_finite() {
        return Ok(MapStep::NonFinite {
            stage: "v",
            u: Some(u),
        });
    }
    Ok(MapStep::Fields { u, v })
}

/// One application of the decoupled two-solve map: from `w` to `(u, v)`.
///
/// Both outputs are Dirichlet fields and nonnegative whenever the right
/// sides are (discrete maximum principle).
pub fn map_t(w: &ScalarField, d: &ProblemData) -> Result<(ScalarField, ScalarField)> {
    if w.grid() != d.grid() {
        return Err(Error::GridMismatch);
    }
    let adm = check_admissibility(&d.exponents);
    if !adm.admissible() {
        return Err(Error::NotAdmissible(explain_admissibility(&d.exponents)));
    }
    match map_step(w, d)? {
        MapStep::Fields { u, v } => Ok((u, v)),
        MapStep::NonFinite { stage, .. } => Err(Error::NonFiniteField(stage)),
    }
}

/// Dirichlet test functions with cached gradients and energy norms.
pub struct TestSet {
    modes: Vec<(ScalarField, VectorField, f64)>,
}

impl TestSet {
    pub fn from_fields(fields: Vec<ScalarField>) -> Result<Self> {
        let mut modes = Vec::with_capacity(fields.len());
        for phi in fields {
            let grad = gradient(&phi);
            let energy = math::sqrt(grad.dot_integral(&grad)?);
            modes.push((phi, grad, energy));
        }
        Ok(TestSet { modes })
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

/// The default test set: the first 5x5 sine modes (5 modes in 1-D).
pub fn default_test_set(grid: &Arc<GridSpec>) -> Result<TestSet> {
    let mut fields = Vec::new();
    match grid.dim() {
        1 => {
            for j in 1..=5usize {
                fields.push(ScalarField::from_fn(grid, |c| {
                    math::sin(j as f64 * math::PI * c[0])
                }));
            }
        }
        _ => {
            for j in 1..=5usize {
                for k in 1..=5usize {
                    fields.push(ScalarField::from_fn(grid, |c| {
                        math::sin(j as f64 * math::PI * c[0])
                            * math::sin(k as f64 * math::PI * c[1])
                    }));
                }
            }
        }
    }
    TestSet::from_fields(fields)
}

/// Normalized weak residuals of the pair `(u, v)` against a test set:
/// the worst defect of each integral identity over the test functions,
/// scaled by `1 + ‖∇φ‖_2`. Non-finite intermediates yield infinite
/// residuals.
pub fn weak_residual(
    u: &ScalarField,
    v: &ScalarField,
    d: &ProblemData,
    testset: &TestSet,
) -> Result<(f64, f64)> {
    if !(u.is_finite() && v.is_finite()) {
        return Ok((f64::INFINITY, f64::INFINITY));
    }
    let grad_u = gradient(u);
    let grad_v = gradient(v);
    let vq = v.positive_part().powf(d.exponents.q);
    let gup = grad_u.magnitude().powf(d.exponents.p);
    if !(vq.is_finite() && gup.is_finite()) {
        return Ok((f64::INFINITY, f64::INFINITY));
    }
    let mut res1 = 0.0_f64;
    let mut res2 = 0.0_f64;
    for (phi, grad_phi, energy) in &testset.modes {
        let a1 = grad_phi.dot_integral(&grad_u)?
            - integrate(&vq.zip_map(phi, |a, b| a * b)?)
            - d.alpha * integrate(&d.g.zip_map(phi, |a, b| a * b)?);
        let a2 = grad_phi.dot_integral(&grad_v)?
            - integrate(&gup.zip_map(phi, |a, b| a * b)?)
            - d.lambda * integrate(&d.f.zip_map(phi, |a, b| a * b)?);
        res1 = res1.max(a1.abs() / (1.0 + energy));
        res2 = res2.max(a2.abs() / (1.0 + energy));
    }
    Ok((res1, res2))
}

/// How an iteration run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Converged,
    Diverged,
    MaxIterReached,
}

/// One row of the iteration trace.
#[derive(Debug, Clone, Copy)]
pub struct IterationRecord {
    pub iter: usize,
    /// `‖∇v‖_r` for the chosen iteration exponent.
    pub grad_v_r: f64,
    /// `‖∇u‖_p`.
    pub grad_u_p: f64,
    /// Relative W^{1,1} change of `v` against the previous iterate.
    pub rel_change_w11: f64,
    pub res1: f64,
    pub res2: f64,
    /// Whether `‖∇v‖_r` stayed within the invariant-ball radius.
    pub in_ball: bool,
}

/// Full account of an iteration run.
#[derive(Debug, Clone)]
pub struct IterationReport {
    pub trace: Vec<IterationRecord>,
    pub verdict: Verdict,
    pub in_ball_all_iterations: bool,
    /// Set when the run died by overflowing rather than by the ball test.
    pub nonfinite: bool,
    /// The exponent `r` the ball membership was measured in.
    pub r_iter: f64,
}

/// Converged (or last finite) pair together with the run report.
#[derive(Debug, Clone)]
pub struct FixedPointSolution {
    pub u: ScalarField,
    pub v: ScalarField,
    pub report: IterationReport,
}

/// Runs `w ← v = T(w)` from `w0` (zero when `None`) until the relative
/// W^{1,1} change drops below `d.tol`, the iterate leaves the inflated ball,
/// or `d.max_iter` is hit.
///
/// On a non-finite iterate the run records one final row of infinities and
/// reports `Diverged` with the `nonfinite` flag; the returned fields are the
/// last finite ones.
pub fn iterate_to_fixed_point(
    d: &ProblemData,
    t: &ThresholdConstants,
    w0: Option<&ScalarField>,
) -> Result<FixedPointSolution> {
    let adm = check_admissibility(&d.exponents);
    if !adm.admissible() {
        return Err(Error::NotAdmissible(explain_admissibility(&d.exponents)));
    }
    let r = d.r_iter()?;
    let radius = t.ball_radius();
    let testset = default_test_set(d.grid())?;

    let mut w = match w0 {
        Some(field) => {
            if field.grid() != d.grid() {
                return Err(Error::GridMismatch);
            }
            field.clone()
        }
        None => ScalarField::zeros(d.grid()),
    };
    let mut best_u = ScalarField::zeros(d.grid());
    let mut best_v = w.clone();
    let mut trace: Vec<IterationRecord> = Vec::new();
    let mut verdict = Verdict::MaxIterReached;
    let mut nonfinite = false;

    for iter in 1..=d.max_iter {
        match map_step(&w, d) {
            Err(Error::NonFiniteField(_)) => {
                trace.push(IterationRecord {
                    iter,
                    grad_v_r: f64::INFINITY,
                    grad_u_p: f64::INFINITY,
                    rel_change_w11: f64::INFINITY,
                    res1: f64::INFINITY,
                    res2: f64::INFINITY,
                    in_ball: false,
                });
                verdict = Verdict::Diverged;
                nonfinite = true;
                break;
            }
            Err(other) => return Err(other),
            Ok(MapStep::NonFinite { u, .. }) => {
                let grad_u_p = match &u {
                    Some(u) => lp_norm(&gradient(u).magnitude(), d.exponents.p)?,
                    None => f64::INFINITY,
                };
                trace.push(IterationRecord {
                    iter,
                    grad_v_r: f64::INFINITY,
                    grad_u_p,
                    rel_change_w11: f64::INFINITY,
                    res1: f64::INFINITY,
                    res2: f64::INFINITY,
                    in_ball: false,
                });
                verdict = Verdict::Diverged;
                nonfinite = true;
                break;
            }
            Ok(MapStep::Fields { u, v }) => {
                let grad_v_r = lp_norm(&gradient(&v).magnitude(), r)?;
                let grad_u_p = lp_norm(&gradient(&u).magnitude(), d.exponents.p)?;
                let rel = w11_norm(&v.sub(&w)?) / w11_norm(&w).max(1e-30);
                let (res1, res2) = weak_residual(&u, &v, d, &testset)?;
                let in_ball = grad_v_r <= radius;
                trace.push(IterationRecord {
                    iter,
                    grad_v_r,
                    grad_u_p,
                    rel_change_w11: rel,
                    res1,
                    res2,
                    in_ball,
                });
                best_u = u;
                best_v = v.clone();
                if rel <= d.tol {
                    verdict = Verdict::Converged;
                    break;
                }
                if !grad_v_r.is_finite()
                    || (grad_v_r > DIVERGENCE_FACTOR * radius
                        && trace.len() >= MIN_ROWS_BEFORE_DIVERGENCE_STOP)
                {
                    verdict = Verdict::Diverged;
                    break;
                }
                w = v;
            }
        }
    }

    let in_ball_all_iterations = trace.iter().all(|rec| rec.in_ball);
    Ok(FixedPointSolution {
        u: best_u,
        v: best_v,
        report: IterationReport {
            trace,
            verdict,
            in_ball_all_iterations,
            nonfinite,
            r_iter: r,
        },
    })
}

fn uniform(rng: &mut impl RngCore) -> f64 {
    // 53-bit mantissa in [0, 1)
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Estimates the discrete growth constant: the smallest `c` with
/// `‖∇v‖_r <= c (‖∇w‖_r^{pq} + α^p‖g‖_σ^p + λ‖f‖_m)` over a probe set of
/// random smooth `w` inside the ball.
///
/// Probes are random low-mode sine combinations rescaled into the current
/// ball; after the first pass the ball is re-sized with the estimated
/// constant and the probes rerun once. Deterministic for a fixed seed.
pub fn calibrate_c_tilde(d: &ProblemData, seed: u64, n_probes: usize) -> Result<f64> {
    let grid = d.grid();
    let r = d.r_iter()?;
    let e = &d.exponents;
    let pq = e.pq();
    let norm_f = lp_norm(&d.f, e.m)?;
    let norm_g = lp_norm(&d.g, e.sigma)?;
    let data_term = math::powf(d.alpha, e.p) * math::powf(norm_g, e.p) + d.lambda * norm_f;

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let modes = 4usize;
    let mut c = 1.0_f64;
    for _pass in 0..2 {
        let radius = math::powf(pq * c, -1.0 / (pq - 1.0));
        let mut worst: f64 = 0.0;
        for _ in 0..n_probes {
            let mut coef = Vec::new();
            for _ in 0..modes * modes {
                coef.push(2.0 * uniform(&mut rng) - 1.0);
            }
            let w = ScalarField::from_fn(grid, |cds| {
                let mut acc = 0.0;
                for j in 0..modes {
                    for k in 0..modes {
                        let mut m = math::sin((j + 1) as f64 * math::PI * cds[0]);
                        if grid.dim() == 2 {
                            m *= math::sin((k + 1) as f64 * math::PI * cds[1]);
                        }
                        acc += coef[j * modes + k] * m;
                        if grid.dim() == 1 {
                            break;
                        }
                    }
                }
                acc
            });
            let g_norm = lp_norm(&gradient(&w).magnitude(), r)?;
            if g_norm == 0.0 {
                continue;
            }
            let fill = 0.05 + 0.95 * uniform(&mut rng);
            let scaled = w.scaled(fill * radius / g_norm);
            let (_, v) = map_t(&scaled, d)?;
            let num = lp_norm(&gradient(&v).magnitude(), r)?;
            let den = math::powf(fill * radius, pq) + data_term;
            worst = worst.max(num / den);
        }
        if worst > 0.0 {
            c = worst;
        }
    }
    Ok(c)
}
