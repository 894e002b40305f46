//! One-dimensional radial calculus in dimension `N`: piecewise closed-form
//! profiles with analytic derivatives, the radial Laplacian
//! `φ'' + (N-1)φ'/r`, and adaptive quadrature of `ω_{N-1} ∫ f(r) r^{N-1} dr`
//! with log-spaced panels toward an inner singularity.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::math;

/// Surface area of the unit sphere in `R^N`, `ω_{N-1} = 2 π^{N/2} / Γ(N/2)`,
/// via the half-integer Γ recurrence.
pub fn unit_sphere_area(n_dim: usize) -> f64 {
    // Γ(N/2): integer case (N even) and half-integer case (N odd)
    let gamma_half = |twice: usize| -> f64 {
        // Γ(twice/2)
        if twice.is_multiple_of(2) {
            let mut acc = 1.0;
            for k in 2..twice / 2 {
                acc *= k as f64;
            }
            acc
        } else {
            let mut acc = math::sqrt(math::PI);
            let mut x = 0.5;
            while (2.0 * x) as usize + 1 < twice {
                acc *= x;
                x += 1.0;
            }
            acc
        }
    };
    2.0 * math::powf(math::PI, n_dim as f64 / 2.0) / gamma_half(n_dim)
}

/// Closed-form piece kinds with analytic derivatives up to third order.
#[derive(Debug, Clone, PartialEq)]
pub enum PieceKind {
    /// `coeff * r^exponent`.
    Power { coeff: f64, exponent: f64 },
    /// `coeff * (1-r)^gamma`.
    BoundaryPower { coeff: f64, gamma: f64 },
    /// Quintic polynomial in `t = (r - t0)/len`, coefficients low-to-high.
    Quintic { coeffs: [f64; 6], t0: f64, len: f64 },
}

impl PieceKind {
    /// Value (`order = 0`) or analytic derivative of the given order.
    pub fn deriv(&self, r: f64, order: usize) -> f64 {
        match self {
            PieceKind::Power { coeff, exponent } => {
                let mut c = *coeff;
                let mut e = *exponent;
                for _ in 0..order {
                    c *= e;
                    e -= 1.0;
                }
                c * math::powf(r, e)
            }
            PieceKind::BoundaryPower { coeff, gamma } => {
                let mut c = *coeff;
                let mut e = *gamma;
                for _ in 0..order {
                    c *= -e;
                    e -= 1.0;
                }
                c * math::powf(1.0 - r, e)
            }
            PieceKind::Quintic { coeffs, t0, len } => {
                let mut c = *coeffs;
                for _ in 0..order {
                    let mut d = [0.0; 6];
                    for i in 1..6 {
                        d[i - 1] = i as f64 * c[i];
                    }
                    c = d;
                }
                let t = (r - t0) / len;
                let mut acc = 0.0;
                for i in (0..6).rev() {
                    acc = acc * t + c[i];
                }
                acc / math::powf(*len, order as f64)
            }
        }
    }
}

/// One piece of a radial profile on `[lo, hi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialPiece {
    pub lo: f64,
    pub hi: f64,
    pub kind: PieceKind,
}

/// Piecewise closed-form radial function on `(0, 1]` with analytic
/// derivatives per piece.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialProfile {
    pieces: Vec<RadialPiece>,
}

impl RadialProfile {
    /// Pieces must tile `(0, 1]` in increasing order.
    pub fn new(pieces: Vec<RadialPiece>) -> Result<Self> {
        if pieces.is_empty() {
            return Err(Error::InvalidInput(
                "profile needs at least one piece".into(),
            ));
        }
        for w in pieces.windows(2) {
            if (w[0].hi - w[1].lo).abs() > 1e-14 {
                return Err(Error::InvalidInput(format!(
                    "pieces must tile the radius: gap between {} and {}",
                    w[0].hi, w[1].lo
                )));
            }
        }
        if pieces[0].lo > 1e-14 || (pieces.last().unwrap().hi - 1.0).abs() > 1e-14 {
            return Err(Error::InvalidInput("pieces must cover (0, 1]".into()));
        }
        Ok(RadialProfile { pieces })
    }

    pub fn pieces(&self) -> &[RadialPiece] {
        &self.pieces
    }

    fn piece_at(&self, r: f64) -> &RadialPiece {
        for p in &self.pieces {
            if r <= p.hi {
                return p;
            }
        }
        self.pieces.last().unwrap()
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.piece_at(r).kind.deriv(r, 0)
    }

    pub fn d1(&self, r: f64) -> f64 {
        self.piece_at(r).kind.deriv(r, 1)
    }

    pub fn d2(&self, r: f64) -> f64 {
        self.piece_at(r).kind.deriv(r, 2)
    }

    pub fn d3(&self, r: f64) -> f64 {
        self.piece_at(r).kind.deriv(r, 3)
    }

    /// Verifies value, first and second derivative continuity at the interior
    /// junctions, relative to the local scale.
    pub fn check_c2(&self, tol: f64) -> Result<()> {
        for w in self.pieces.windows(2) {
            let r = w[0].hi;
            for order in 0..3 {
                let left = w[0].kind.deriv(r, order);
                let right = w[1].kind.deriv(r, order);
                let scale = left.abs().max(right.abs()).max(1.0);
                if (left - right).abs() > tol * scale {
                    return Err(Error::InvalidInput(format!(
                        "junction at r = {r} jumps in derivative {order}: {left} vs {right}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Quintic Hermite coefficients (in `t = (r-a)/(b-a)`, low-to-high) matching
/// value/first/second derivative at both ends.
pub fn quintic_hermite(a: f64, b: f64, left: [f64; 3], right: [f64; 3]) -> PieceKind {
    let len = b - a;
    let (v0, d0, s0) = (left[0], left[1] * len, left[2] * len * len);
    let (v1, d1, s1) = (right[0], right[1] * len, right[2] * len * len);
    // standard quintic Hermite basis, endpoint data in local t-units
    let c0 = v0;
    let c1 = d0;
    let c2 = 0.5 * s0;
    let c3 = -10.0 * v0 - 6.0 * d0 - 1.5 * s0 + 10.0 * v1 - 4.0 * d1 + 0.5 * s1;
    let c4 = 15.0 * v0 + 8.0 * d0 + 1.5 * s0 - 15.0 * v1 + 7.0 * d1 - s1;
    let c5 = -6.0 * v0 - 3.0 * d0 - 0.5 * s0 + 6.0 * v1 - 3.0 * d1 + 0.5 * s1;
    PieceKind::Quintic {
        coeffs: [c0, c1, c2, c3, c4, c5],
        t0: a,
        len,
    }
}

/// Radial Laplacian `Δφ = φ''(r) + (N-1) φ'(r) / r` at `r > 0`.
pub fn radial_laplacian(profile: &RadialProfile, n_dim: usize, r: f64) -> Result<f64> {
    if !(r > 0.0 && r <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "radial Laplacian needs r in (0, 1], got {r}"
        )));
    }
    Ok(profile.d2(r) + (n_dim as f64 - 1.0) * profile.d1(r) / r)
}

const MAX_DEPTH: usize = 40;
const PANEL_BUDGET: usize = 2_000_000;

struct PanelCount(usize);

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
    count: &mut PanelCount,
) -> Result<f64> {
    count.0 += 1;
    if count.0 > PANEL_BUDGET {
        return Err(Error::QuadratureStalled);
    }
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let refined = left + right;
    if depth >= MAX_DEPTH {
        return if (refined - whole).abs() <= tol.max(1e-300) * 15.0 {
            Ok(refined)
        } else {
            Err(Error::QuadratureStalled)
        };
    }
    if (refined - whole).abs() <= 15.0 * tol {
        Ok(refined + (refined - whole) / 15.0)
    } else {
        let l = adaptive(f, a, m, fa, flm, fm, left, 0.5 * tol, depth + 1, count)?;
        let r = adaptive(f, m, b, fm, frm, fb, right, 0.5 * tol, depth + 1, count)?;
        Ok(l + r)
    }
}

fn adaptive_simpson(
    f: &impl Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    count: &mut PanelCount,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    if !(fa.is_finite() && fm.is_finite() && fb.is_finite()) {
        return Err(Error::QuadratureStalled);
    }
    let whole = simpson(a, b, fa, fm, fb);
    adaptive(f, a, b, fa, fm, fb, whole, tol, 0, count)
}

/// `ω_{N-1} ∫_a^b integrand(r) r^{N-1} dr` by adaptive Simpson.
///
/// When the lower limit sits near 0 relative to `b`, the range is split into
/// log-spaced segments toward it (a zero lower limit is nudged to 1e-16) so
/// mildly singular integrands are resolved; non-convergence within the panel
/// budget is reported as an error, which callers treat as divergence
/// evidence.
pub fn radial_integrate(
    integrand: impl Fn(f64) -> f64,
    n_dim: usize,
    a: f64,
    b: f64,
    rel_tol: f64,
) -> Result<f64> {
    if !(a >= 0.0 && a < b && b <= 1.0) {
        return Err(Error::InvalidInput(format!(
            "radial integration range must satisfy 0 <= a < b <= 1, got ({a}, {b})"
        )));
    }
    if !(rel_tol > 0.0) {
        return Err(Error::InvalidTolerance(rel_tol));
    }
    let nm1 = n_dim as f64 - 1.0;
    let weighted = |r: f64| integrand(r) * math::powf(r, nm1);

    let mut breaks: Vec<f64> = Vec::new();
    let lo = if a == 0.0 { 1e-16_f64 } else { a };
    if lo < 0.01 * b {
        // log-spaced toward the inner limit, ~6 panels per decade
        let decades = math::ln(b / lo) / math::ln(10.0);
        let k = (6.0 * decades).max(8.0) as usize;
        for i in 0..=k {
            breaks.push(lo * math::powf(b / lo, i as f64 / k as f64));
        }
    } else {
        breaks.push(lo);
        breaks.push(b);
    }

    // first pass for the scale, then enforce the relative tolerance
    let mut count = PanelCount(0);
    let mut coarse = 0.0;
    for w in breaks.windows(2) {
        let m = 0.5 * (w[0] + w[1]);
        coarse += simpson(w[0], w[1], weighted(w[0]), weighted(m), weighted(w[1])).abs();
    }
    let abs_tol = rel_tol * coarse.max(1e-300);
    let per_segment = abs_tol / breaks.len() as f64;
    let mut total = 0.0;
    let mut inner_tail = 0.0;
    let tail_split = 1e-10_f64.min(0.5 * b);
    for w in breaks.windows(2) {
        let seg = adaptive_simpson(&weighted, w[0], w[1], per_segment, &mut count)?;
        total += seg;
        if w[1] <= tail_split {
            inner_tail += seg.abs();
        }
    }
    // with a zero lower limit, a vanishing-measure tail that still carries a
    // macroscopic share of the mass is the signature of a non-integrable
    // singularity at the origin
    if a == 0.0 && inner_tail > 0.25 * (total.abs() - inner_tail).max(1e-300) {
        return Err(Error::QuadratureStalled);
    }
    Ok(unit_sphere_area(n_dim) * total)
}
