//! Dual functionals bounding the nonexistence thresholds in `(λ, α)`, the
//! classical source-duality gap, the capacity ratio with its explicit radial
//! witness, and the witness divergence study.
//!
//! All the functionals integrate expressions of the form
//! `numerator(φ) · φ^{negative power}` over test functions vanishing on the
//! boundary. Nodes where `φ` has (numerically) vanished follow an explicit
//! policy: they contribute nothing when the numerator vanishes there too,
//! otherwise `φ` is clamped at a relative floor and a huge floored total is
//! reported as `+∞`. The floor and the vanishing test are both relative, so
//! every functional here is exactly homogeneous under scaling of `φ`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::exponents::{holder_conjugate, young_constant};
use crate::grid::{
    gradient, integrate, laplacian_apply, sample, FnDescriptor, GridSpec, ScalarField,
};
use crate::math;
use crate::poisson::solve_poisson;
use crate::radial::{quintic_hermite, radial_integrate, PieceKind, RadialPiece, RadialProfile};

/// Nodes with `φ < PHI_FLOOR_REL · max φ` are treated as boundary-degenerate.
const PHI_FLOOR_REL: f64 = 1e-12;
/// At floored nodes the numerator counts as vanishing below this relative cut.
const NUMERATOR_VANISH_REL: f64 = 1e-4;
/// A floored integral beyond this total is reported as divergent (`+∞`).
const SENTINEL: f64 = 1e12;

/// Default relative tolerance of the radial quadratures.
const RADIAL_TOL: f64 = 1e-9;
/// The outer-boundary pinch point is excluded from capacity numerators.
const OUTER_TRIM: f64 = 1e-9;

fn require_admissible_test_function(phi: &ScalarField) -> Result<f64> {
    let max = phi.max_value();
    if !(max > 0.0) {
        return Err(Error::InvalidInput(
            "test function must not be identically zero".into(),
        ));
    }
    for (i, &v) in phi.values().iter().enumerate() {
        if v < -PHI_FLOOR_REL * max {
            return Err(Error::NegativeNode { index: i, value: v });
        }
    }
    Ok(max)
}

/// Quadrature of `φ^{neg_exp} · numerator` under the φ-floor policy.
///
/// Returns `+∞` when the floored total exceeds the sentinel, which is the
/// discrete report of a divergent integral.
fn floored_power_integral(phi: &ScalarField, numerator: &ScalarField, neg_exp: f64) -> Result<f64> {
    if phi.grid() != numerator.grid() {
        return Err(Error::GridMismatch);
    }
    let max_phi = phi.values().iter().fold(0.0_f64, |a, &b| a.max(b));
    if !(max_phi > 0.0) {
        return Err(Error::InvalidInput(
            "test function must not be identically zero".into(),
        ));
    }
    let floor = PHI_FLOOR_REL * max_phi;
    let num_max = numerator.values().iter().fold(0.0_f64, |a, &b| a.max(b));
    let vanish = NUMERATOR_VANISH_REL * num_max;
    let grid = phi.grid();
    let mut total = 0.0;
    for i in 0..phi.values().len() {
        let num = numerator.values()[i];
        let ph = phi.values()[i];
        let contrib = if ph < floor {
            if num <= vanish {
                0.0
            } else {
                math::powf(floor, neg_exp) * num
            }
        } else {
            math::powf(ph, neg_exp) * num
        };
        total += grid.weight(i) * contrib;
    }
    if !total.is_finite() || total > SENTINEL {
        return Ok(f64::INFINITY);
    }
    Ok(total)
}

/// The dual test-function cost
/// `F(φ) = C_p ∫ φ^{1-p'} |∇φ|^{p'} + C_q ∫ φ^{1-q'} |Δφ|^{q'}`
/// with the Young constants `C_s = (s-1)/s^{s'}`; needs `p, q > 1` and a
/// nonnegative, nontrivial `φ` vanishing on the boundary.
///
/// Degree-1 homogeneous in `φ`; `+∞` reports a divergent member.
pub fn dual_functional(phi: &ScalarField, p: f64, q: f64) -> Result<f64> {
    require_admissible_test_function(phi)?;
    let pp = holder_conjugate(p)?;
    let qq = holder_conjugate(q)?;
    let cp = young_constant(p)?;
    let cq = young_constant(q)?;
    let grad_num = gradient(phi).magnitude().powf(pp);
    let lap_num = laplacian_apply(phi).map(f64::abs).powf(qq);
    let i1 = floored_power_integral(phi, &grad_num, 1.0 - pp)?;
    let i2 = floored_power_integral(phi, &lap_num, 1.0 - qq)?;
    if !(i1.is_finite() && i2.is_finite()) {
        return Ok(f64::INFINITY);
    }
    Ok(cp * i1 + cq * i2)
}

/// The `q = 1` variant: solve `-Δφ = ψ` first, then charge
/// `G(ψ) = C_p ∫ φ^{1-p'} |∇ψ|^{p'}` against the auxiliary solution `φ`.
pub fn dual_functional_q1(varphi: &ScalarField, p: f64, tol: f64) -> Result<f64> {
    require_admissible_test_function(varphi)?;
    let pp = holder_conjugate(p)?;
    let cp = young_constant(p)?;
    let phi = solve_poisson(varphi, tol)?.solution;
    let grad_num = gradient(varphi).magnitude().powf(pp);
    let i1 = floored_power_integral(&phi, &grad_num, 1.0 - pp)?;
    Ok(if i1.is_finite() {
        cp * i1
    } else {
        f64::INFINITY
    })
}

/// A named test function living on a grid.
#[derive(Debug, Clone)]
pub struct FamilyMember {
    pub id: String,
    pub field: ScalarField,
}

/// A finite family of candidate test functions; minimizing a functional over
/// it yields upper bounds for the corresponding threshold.
#[derive(Debug, Clone)]
pub struct CandidateFamily {
    members: Vec<FamilyMember>,
}

impl CandidateFamily {
    /// Every member must carry strictly positive mass.
    pub fn new(members: Vec<FamilyMember>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::EmptyFamily);
        }
        for m in &members {
            if !(integrate(&m.field) > 0.0) {
                return Err(Error::InvalidInput(format!(
                    "family member `{}` has no interior mass",
                    m.id
                )));
            }
        }
        Ok(CandidateFamily { members })
    }

    pub fn members(&self) -> &[FamilyMember] {
        &self.members
    }

    pub fn push(&mut self, member: FamilyMember) {
        self.members.push(member);
    }
}

/// The family shipped by default: `sinprod_pow:{2,3,4,6}` and the smooth
/// bump product. All are boundary-flat enough to keep the functionals that
/// matter finite.
pub fn default_family(grid: &Arc<GridSpec>) -> Result<CandidateFamily> {
    let mut members = Vec::new();
    for k in [2u32, 3, 4, 6] {
        let d = FnDescriptor::SinProdPow(k);
        members.push(FamilyMember {
            id: d.id(),
            field: sample(grid, &d)?,
        });
    }
    members.push(FamilyMember {
        id: FnDescriptor::Bump.id(),
        field: sample(grid, &FnDescriptor::Bump)?,
    });
    CandidateFamily::new(members)
}

/// One evaluated member inside a threshold-bound minimization.
#[derive(Debug, Clone)]
pub struct FunctionalRow {
    pub functional: &'static str,
    pub member: String,
    pub value: f64,
    pub denominator: f64,
    pub ratio: f64,
}

/// Result of minimizing a normalized functional over a family.
#[derive(Debug, Clone)]
pub struct ThresholdBound {
    /// The minimum ratio: an upper bound for the threshold in question.
    pub value: f64,
    pub best_member: String,
    pub rows: Vec<FunctionalRow>,
}

fn minimize_rows(rows: Vec<FunctionalRow>) -> Result<ThresholdBound> {
    let best = rows
        .iter()
        .filter(|r| r.ratio.is_finite())
        .min_by(|a, b| a.ratio.partial_cmp(&b.ratio).expect("finite ratios"));
    match best {
        Some(b) => Ok(ThresholdBound {
            value: b.ratio,
            best_member: b.member.clone(),
            rows,
        }),
        None => {
            if rows.iter().all(|r| r.denominator <= 0.0) {
                Err(Error::ZeroDenominator)
            } else {
                Err(Error::InvalidInput(
                    "every family member has an infinite functional value".into(),
                ))
            }
        }
    }
}

/// Upper bound for the α-threshold: `min F(φ)/∫gφ` over the family
/// (normalization-free form; valid by degree-1 homogeneity of `F`).
/// Above the true threshold the system has no nonnegative solution.
pub fn alpha_threshold_upper(
    g: &ScalarField,
    family: &CandidateFamily,
    p: f64,
    q: f64,
) -> Result<ThresholdBound> {
    let mut rows = Vec::new();
    for m in family.members() {
        let value = dual_functional(&m.field, p, q)?;
        let denominator = integrate(&g.zip_map(&m.field, |a, b| a * b)?);
        let ratio = if denominator > 0.0 {
            value / denominator
        } else {
            f64::INFINITY
        };
        rows.push(FunctionalRow {
            functional: "F",
            member: m.id.clone(),
            value,
            denominator,
            ratio,
        });
    }
    minimize_rows(rows)
}

/// Upper bound for the λ-threshold: `min F(φ)/∫fφ` over the family. Same
/// formula as the α bound with `f` as the pairing datum.
pub fn lambda_threshold_upper(
    f: &ScalarField,
    family: &CandidateFamily,
    p: f64,
    q: f64,
) -> Result<ThresholdBound> {
    alpha_threshold_upper(f, family, p, q)
}

/// Which threshold a `q = 1` bound normalizes for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThresholdKind {
    /// Normalizes by `∫ g·ψ` (the datum pairs with the test function).
    Alpha,
    /// Normalizes by `∫ f·φ` with `φ` the auxiliary solution.
    Lambda,
}

/// Upper threshold bounds in the `q = 1` regime via the auxiliary-solve
/// functional `G`.
pub fn threshold_upper_q1(
    data: &ScalarField,
    family: &CandidateFamily,
    p: f64,
    which: ThresholdKind,
    tol: f64,
) -> Result<ThresholdBound> {
    let mut rows = Vec::new();
    for m in family.members() {
        let value = dual_functional_q1(&m.field, p, tol)?;
        let denominator = match which {
            ThresholdKind::Alpha => integrate(&data.zip_map(&m.field, |a, b| a * b)?),
            ThresholdKind::Lambda => {
                let aux = solve_poisson(&m.field, tol)?.solution;
                integrate(&data.zip_map(&aux, |a, b| a * b)?)
            }
        };
        let ratio = if denominator > 0.0 {
            value / denominator
        } else {
            f64::INFINITY
        };
        rows.push(FunctionalRow {
            functional: "G",
            member: m.id.clone(),
            value,
            denominator,
            ratio,
        });
    }
    minimize_rows(rows)
}

/// The source-duality gap `k(r) ∫ |Δφ|^{r'} φ^{1-r'} - ∫ hφ`.
///
/// A negative gap certifies that `-Δw = w^r + h` admits no nonnegative
/// solution with this datum. Degree-1 homogeneous in `φ`.
pub fn baras_pierre_gap(h: &ScalarField, phi: &ScalarField, r: f64) -> Result<f64> {
    require_admissible_test_function(phi)?;
    let rr = holder_conjugate(r)?;
    let k = young_constant(r)?;
    let lap_num = laplacian_apply(phi).map(f64::abs).powf(rr);
    let dual = floored_power_integral(phi, &lap_num, 1.0 - rr)?;
    if !dual.is_finite() {
        return Ok(f64::INFINITY);
    }
    Ok(k * dual - integrate(&h.zip_map(phi, |a, b| a * b)?))
}

/// Capacity numerator on a grid:
/// `∫ |∇( |φ|^{p'-2} φ (-Δφ) )|^{p'} · |φ|^{-p/(p-1)²}`.
///
/// Sign-changing `φ` is allowed. Scales like `a^{p'}`, so the ratio against
/// `∫ f |φ|^{p'}` is scale-invariant.
pub fn capacity_numerator_grid(phi: &ScalarField, p: f64) -> Result<f64> {
    let pp = holder_conjugate(p)?;
    let abs_phi = phi.map(f64::abs);
    if !(abs_phi.max_value() > 0.0) {
        return Err(Error::InvalidInput(
            "test function must not be identically zero".into(),
        ));
    }
    let neg_lap = laplacian_apply(phi);
    // |φ|^{p'-2} φ (-Δφ) written as sign(φ)|φ|^{p'-1}(-Δφ) so φ = 0 is exact
    let s = phi.zip_map(&neg_lap, |ph, nl| {
        let mag = math::powf(ph.abs(), pp - 1.0);
        if ph >= 0.0 {
            mag * nl
        } else {
            -mag * nl
        }
    })?;
    let num = gradient(&s).magnitude().powf(pp);
    let weight_exp = -p / ((p - 1.0) * (p - 1.0));
    floored_power_integral(&abs_phi, &num, weight_exp)
}

/// Scale-invariant capacity ratio on a grid: numerator over `∫ f |φ|^{p'}`.
pub fn capacity_ratio_grid(phi: &ScalarField, f: &ScalarField, p: f64) -> Result<f64> {
    let pp = holder_conjugate(p)?;
    let num = capacity_numerator_grid(phi, p)?;
    let den = integrate(&f.zip_map(&phi.map(f64::abs).powf(pp), |a, b| a * b)?);
    if !(den > 0.0) {
        return Err(Error::ZeroDenominator);
    }
    Ok(num / den)
}

/// Upper evidence for the capacity threshold of `f`: the smallest capacity
/// ratio over the family (a genuine upper bound for the infimum).
pub fn capacity_threshold_upper(
    f: &ScalarField,
    family: &CandidateFamily,
    p: f64,
) -> Result<ThresholdBound> {
    let pp = holder_conjugate(p)?;
    let mut rows = Vec::new();
    for m in family.members() {
        let value = capacity_numerator_grid(&m.field, p)?;
        let denominator = integrate(&f.zip_map(&m.field.map(f64::abs).powf(pp), |a, b| a * b)?);
        let ratio = if denominator > 0.0 {
            value / denominator
        } else {
            f64::INFINITY
        };
        rows.push(FunctionalRow {
            functional: "Q",
            member: m.id.clone(),
            value,
            denominator,
            ratio,
        });
    }
    minimize_rows(rows)
}

/// Parameters of the explicit radial witness showing the capacity threshold
/// can vanish for rough sources.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WitnessParams {
    pub n_dim: usize,
    pub p: f64,
    pub eps: f64,
    pub gamma: f64,
}

impl WitnessParams {
    /// Inner decay power `θ = (N - (3p' + ε))/p'`.
    pub fn theta(&self) -> Result<f64> {
        let pp = holder_conjugate(self.p)?;
        Ok((self.n_dim as f64 - (3.0 * pp + self.eps)) / pp)
    }

    pub fn validate(&self) -> Result<()> {
        let pp = holder_conjugate(self.p)?;
        let n = self.n_dim as f64;
        if !(n > 3.0 * pp) {
            return Err(Error::InvalidWitness(format!(
                "needs N > 3p' (N = {n}, 3p' = {})",
                3.0 * pp
            )));
        }
        if !(self.eps > 0.0 && self.eps < n - 3.0 * pp) {
            return Err(Error::InvalidWitness(format!(
                "needs 0 < eps < N - 3p' = {}",
                n - 3.0 * pp
            )));
        }
        if !(self.gamma > (3.0 * pp - 1.0) / pp) {
            return Err(Error::InvalidWitness(format!(
                "needs gamma > (3p'-1)/p' = {}",
                (3.0 * pp - 1.0) / pp
            )));
        }
        Ok(())
    }
}

/// The constructed witness pair: the radial test profile, the rough source,
/// and the integrability bound below which the source regime applies.
#[derive(Debug, Clone)]
pub struct Witness {
    pub phi: RadialProfile,
    pub f: RadialProfile,
    /// `N/(3p')`: the source lives in `L^m` only for `m` below this.
    pub m_max: f64,
}

/// Builds the radial witness: inner power decay `r^{-θ}`, an outer boundary
/// factor `(1-r)^γ`, and a C² quintic bridge between them on `[1/4, 1/2]`,
/// together with the source `f(r) = r^{-(3p'+ε)}`.
pub fn build_witness(wp: &WitnessParams) -> Result<Witness> {
    wp.validate()?;
    let pp = holder_conjugate(wp.p)?;
    let th = wp.theta()?;
    let (a, b) = (0.25_f64, 0.5_f64);
    let inner = PieceKind::Power {
        coeff: 1.0,
        exponent: -th,
    };
    let outer = PieceKind::BoundaryPower {
        coeff: 1.0,
        gamma: wp.gamma,
    };
    let bridge = quintic_hermite(
        a,
        b,
        [inner.deriv(a, 0), inner.deriv(a, 1), inner.deriv(a, 2)],
        [outer.deriv(b, 0), outer.deriv(b, 1), outer.deriv(b, 2)],
    );
    let phi = RadialProfile::new(alloc::vec![
        RadialPiece {
            lo: 0.0,
            hi: a,
            kind: inner
        },
        RadialPiece {
            lo: a,
            hi: b,
            kind: bridge
        },
        RadialPiece {
            lo: b,
            hi: 1.0,
            kind: outer
        },
    ])?;
    phi.check_c2(1e-8)?;
    // the bridge must stay strictly positive
    for i in 0..=100 {
        let r = a + (b - a) * i as f64 / 100.0;
        if !(phi.eval(r) > 0.0) {
            return Err(Error::InvalidWitness(format!(
                "bridge loses positivity at r = {r}"
            )));
        }
    }
    let f = RadialProfile::new(alloc::vec![RadialPiece {
        lo: 0.0,
        hi: 1.0,
        kind: PieceKind::Power {
            coeff: 1.0,
            exponent: -(3.0 * pp + wp.eps),
        },
    }])?;
    Ok(Witness {
        phi,
        f,
        m_max: wp.n_dim as f64 / (3.0 * pp),
    })
}

/// Radial capacity numerator of a positive profile over `(lower, 1)`:
/// `ω_{N-1} ∫ |d/dr( φ^{p'-1}(-Δφ) )|^{p'} φ^{-p/(p-1)²} r^{N-1} dr`,
/// integrated piecewise with analytic radial derivatives.
pub fn capacity_numerator_radial(
    phi: &RadialProfile,
    n_dim: usize,
    p: f64,
    lower: f64,
    rel_tol: f64,
) -> Result<f64> {
    let pp = holder_conjugate(p)?;
    let nm1 = n_dim as f64 - 1.0;
    let weight_exp = p / ((p - 1.0) * (p - 1.0));
    let hi_cap = 1.0 - OUTER_TRIM;
    let mut total = 0.0;
    // integrate each piece through its own derivatives: the profile is only
    // C² at the junctions, so third derivatives jump there and the two sides
    // must not be mixed inside one panel
    for piece in phi.pieces() {
        let lo = piece.lo.max(lower);
        let hi = piece.hi.min(hi_cap);
        if lo < hi {
            let kind = &piece.kind;
            let integrand = |r: f64| -> f64 {
                let v = kind.deriv(r, 0);
                let d1 = kind.deriv(r, 1);
                let d2 = kind.deriv(r, 2);
                let d3 = kind.deriv(r, 3);
                let w = -(d2 + nm1 * d1 / r);
                let wp = -(d3 + nm1 * d2 / r - nm1 * d1 / (r * r));
                let s_prime =
                    (pp - 1.0) * math::powf(v, pp - 2.0) * d1 * w + math::powf(v, pp - 1.0) * wp;
                math::powf(s_prime.abs(), pp) * math::powf(v, -weight_exp)
            };
            total += radial_integrate(integrand, n_dim, lo, hi, rel_tol)?;
        }
    }
    Ok(total)
}

/// Weighted mass `ω_{N-1} ∫ f(r) φ(r)^{p'} r^{N-1} dr` over `(lower, 1)`.
pub fn witness_denominator(
    phi: &RadialProfile,
    f: &RadialProfile,
    n_dim: usize,
    p: f64,
    lower: f64,
    rel_tol: f64,
) -> Result<f64> {
    let pp = holder_conjugate(p)?;
    let mut total = 0.0;
    for piece in phi.pieces() {
        let lo = piece.lo.max(lower);
        let hi = piece.hi;
        if lo < hi {
            let kind = &piece.kind;
            let integrand = |r: f64| f.eval(r) * math::powf(kind.deriv(r, 0), pp);
            total += radial_integrate(integrand, n_dim, lo, hi, rel_tol)?;
        }
    }
    Ok(total)
}

/// Numerator/denominator pairs of the witness capacity ratio over a sequence
/// of shrinking inner cutoffs.
#[derive(Debug, Clone)]
pub struct WitnessStudy {
    pub cutoffs: Vec<f64>,
    pub numerators: Vec<f64>,
    pub denominators: Vec<f64>,
}

impl WitnessStudy {
    /// The capacity-ratio upper bounds per cutoff.
    pub fn ratios(&self) -> Vec<f64> {
        self.numerators
            .iter()
            .zip(&self.denominators)
            .map(|(n, d)| n / d)
            .collect()
    }
}

/// Integrates the witness numerator and denominator truncated at each
/// cutoff. The numerators settle while the denominators keep growing by a
/// fixed increment per halving (log-divergence), so the ratio, an upper
/// bound for the capacity threshold, marches to zero.
pub fn witness_divergence_study(wp: &WitnessParams, cutoffs: &[f64]) -> Result<WitnessStudy> {
    if cutoffs.is_empty() {
        return Err(Error::InvalidInput("need at least one cutoff".into()));
    }
    for w in cutoffs.windows(2) {
        if !(w[1] < w[0]) {
            return Err(Error::InvalidInput(
                "cutoffs must decrease strictly toward 0".into(),
            ));
        }
    }
    if !(cutoffs[0] < 1.0 && cutoffs[cutoffs.len() - 1] > 0.0) {
        return Err(Error::InvalidInput("cutoffs must lie in (0, 1)".into()));
    }
    let witness = build_witness(wp)?;
    let mut numerators = Vec::new();
    let mut denominators = Vec::new();
    for &delta in cutoffs {
        numerators.push(capacity_numerator_radial(
            &witness.phi,
            wp.n_dim,
            wp.p,
            delta,
            RADIAL_TOL,
        )?);
        denominators.push(witness_denominator(
            &witness.phi,
            &witness.f,
            wp.n_dim,
            wp.p,
            delta,
            RADIAL_TOL,
        )?);
    }
    for w in denominators.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::InvalidWitness(
                "denominators failed to increase along the cutoffs".into(),
            ));
        }
    }
    Ok(WitnessStudy {
        cutoffs: cutoffs.to_vec(),
        numerators,
        denominators,
    })
}
