//! Exponent algebra: Hölder conjugates, Sobolev stars, the admissibility
//! conditions under which the fixed-point construction applies, the choice of
//! the iteration norm exponent, and the classical duality constant
//! `k(r) = (r-1)/r^{r'}`.
//!
//! Everything here is arithmetic in the analytic dimension `N`, independent
//! of the grid dimension used for field computations.

use alloc::format;
use alloc::string::String;

use crate::error::{Error, Result};
use crate::math;

/// Hölder conjugate `s' = s/(s-1)`, defined for `s > 1`.
pub fn holder_conjugate(s: f64) -> Result<f64> {
    if !(s > 1.0) {
        return Err(Error::InvalidExponent {
            name: "s",
            value: s,
            requirement: "conjugate needs s > 1",
        });
    }
    Ok(s / (s - 1.0))
}

/// Young-inequality constant `C_s = (s-1)/s^{s'}` with `s' = s/(s-1)`.
pub fn young_constant(s: f64) -> Result<f64> {
    let conj = holder_conjugate(s)?;
    Ok((s - 1.0) / math::powf(s, conj))
}

/// The sharp source-size constant `k(r) = (r-1)/r^{r'}` of the duality
/// condition for `-Δw = w^r + h`; coincides with the Young constant.
pub fn k_of_r(r: f64) -> Result<f64> {
    young_constant(r)
}

/// The exponent tuple `(p, q, m, σ, N)` plus the chosen iteration exponent.
///
/// `p` powers the gradient term, `q` the zero-order coupling, `m` and `σ`
/// are the integrabilities of the sources `f` and `g`, and `n_dim` is the
/// analytic dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Exponents {
    pub p: f64,
    pub q: f64,
    pub m: f64,
    pub sigma: f64,
    pub n_dim: f64,
    r_iter: Option<f64>,
}

impl Exponents {
    pub fn new(p: f64, q: f64, m: f64, sigma: f64, n_dim: f64) -> Result<Self> {
        let check = |name: &'static str, value: f64, ok: bool, requirement: &'static str| {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidExponent {
                    name,
                    value,
                    requirement,
                })
            }
        };
        check("p", p, p >= 1.0, "gradient power needs p >= 1")?;
        check("q", q, q > 0.0, "zero-order power needs q > 0")?;
        check(
            "pq",
            p * q,
            p * q > 1.0,
            "the fixed-point machinery needs pq > 1",
        )?;
        check("m", m, m > 1.0, "source integrability needs m > 1")?;
        check(
            "sigma",
            sigma,
            sigma > 1.0,
            "source integrability needs sigma > 1",
        )?;
        check("N", n_dim, n_dim >= 1.0, "analytic dimension needs N >= 1")?;
        Ok(Exponents {
            p,
            q,
            m,
            sigma,
            n_dim,
            r_iter: None,
        })
    }

    pub fn pq(&self) -> f64 {
        self.p * self.q
    }

    /// `p' = p/(p-1)`, defined for `p > 1`.
    pub fn p_conj(&self) -> Result<f64> {
        holder_conjugate(self.p)
    }

    /// `q' = q/(q-1)`, defined for `q > 1`.
    pub fn q_conj(&self) -> Result<f64> {
        holder_conjugate(self.q)
    }

    /// Sobolev star `σ* = σN/(N-σ)` when `σ < N`.
    pub fn sigma_star(&self) -> Option<f64> {
        (self.sigma < self.n_dim).then(|| self.sigma * self.n_dim / (self.n_dim - self.sigma))
    }

    /// Sobolev star `m* = mN/(N-m)` when `m < N`.
    pub fn m_star(&self) -> Option<f64> {
        (self.m < self.n_dim).then(|| self.m * self.n_dim / (self.n_dim - self.m))
    }

    pub fn r_iter(&self) -> Option<f64> {
        self.r_iter
    }

    pub fn set_r_iter(&mut self, r: f64) {
        self.r_iter = Some(r);
    }

    /// Chooses and stores the iteration exponent; see [`choose_r`].
    pub fn with_chosen_r(mut self) -> Result<Self> {
        let r = choose_r(&self)?;
        self.r_iter = Some(r);
        Ok(self)
    }
}

/// Which of the three sufficient integrability regimes hold.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Admissibility {
    /// Both integrabilities below `N`:
    /// `m, σ ∈ (1, N)`, `pm < σ* = σN/(N-σ)` and `qσ/(N+qσ) < m/(N-m)`.
    pub subcritical: bool,
    /// `m >= N` together with `σ > pmN/(N+pm)`.
    pub high_m: bool,
    /// `σ >= N` together with `m > qσN/(N+2qσ)`.
    pub high_sigma: bool,
}

impl Admissibility {
    pub fn admissible(&self) -> bool {
        self.subcritical || self.high_m || self.high_sigma
    }
}

/// Evaluates the three displayed inequality systems literally.
pub fn check_admissibility(e: &Exponents) -> Admissibility {
    let (p, q, m, s, n) = (e.p, e.q, e.m, e.sigma, e.n_dim);
    let subcritical = m > 1.0
        && m < n
        && s > 1.0
        && s < n
        && p * m < s * n / (n - s)
        && q * s / (n + q * s) < m / (n - m);
    let high_m = m >= n && s > p * m * n / (n + p * m);
    let high_sigma = s >= n && m > q * s * n / (n + 2.0 * q * s);
    Admissibility {
        subcritical,
        high_m,
        high_sigma,
    }
}

/// Human-readable account of why the tuple fails (or which branches hold),
/// with the violated inequality spelled out numerically.
pub fn explain_admissibility(e: &Exponents) -> String {
    let a = check_admissibility(e);
    if a.admissible() {
        let mut held = alloc::vec::Vec::new();
        if a.subcritical {
            held.push("subcritical");
        }
        if a.high_m {
            held.push("high-m");
        }
        if a.high_sigma {
            held.push("high-sigma");
        }
        return format!("admissible via {}", held.join(", "));
    }
    let (p, q, m, s, n) = (e.p, e.q, e.m, e.sigma, e.n_dim);
    let mut parts = alloc::vec::Vec::new();
    if m < n && s < n {
        let s_star = s * n / (n - s);
        if !(p * m < s_star) {
            parts.push(format!(
                "subcritical branch: p*m = {} >= sigma* = {}",
                p * m,
                s_star
            ));
        } else {
            parts.push(format!(
                "subcritical branch: q*sigma/(N+q*sigma) = {} >= m/(N-m) = {}",
                q * s / (n + q * s),
                m / (n - m)
            ));
        }
    } else {
        parts.push("subcritical branch needs m, sigma in (1, N)".into());
    }
    if m >= n {
        parts.push(format!(
            "high-m branch: sigma = {s} <= p*m*N/(N+p*m) = {}",
            p * m * n / (n + p * m)
        ));
    }
    if s >= n {
        parts.push(format!(
            "high-sigma branch: m = {m} <= q*sigma*N/(N+2q*sigma) = {}",
            q * s * n / (n + 2.0 * q * s)
        ));
    }
    parts.join("; ")
}

/// Picks the iteration exponent `r` strictly inside the admissible interval
/// `( qσN/(N+qσ), mN/(N-m) )`.
///
/// The geometric mean of the endpoints is used, pushed above 1 if needed.
/// When `m >= N` (upper endpoint undefined) the interval is capped at `10N`;
/// that case is a documented heuristic, the subcritical branch is the one
/// with the full guarantee.
pub fn choose_r(e: &Exponents) -> Result<f64> {
    let a = check_admissibility(e);
    if !a.admissible() {
        return Err(Error::NotAdmissible(explain_admissibility(e)));
    }
    let (q, m, s, n) = (e.q, e.m, e.sigma, e.n_dim);
    let lo = q * s * n / (n + q * s);
    let hi = if m < n { m * n / (n - m) } else { 10.0 * n };
    if !(lo < hi) {
        return Err(Error::EmptyInterval { lo, hi });
    }
    let mut r = math::sqrt(lo * hi);
    if r <= 1.0 {
        r = math::sqrt(lo.max(1.0) * hi);
    }
    if !(lo < r && r < hi && r > 1.0) {
        return Err(Error::EmptyInterval { lo, hi });
    }
    // r > lo already forces σq < rN/(N-r) whenever r < N
    debug_assert!(r >= n || s * q < r * n / (n - r) + 1e-12);
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(p: f64, q: f64, m: f64, s: f64, n: f64) -> Exponents {
        Exponents::new(p, q, m, s, n).unwrap()
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(holder_conjugate(2.0).unwrap(), 2.0);
        assert_eq!(holder_conjugate(3.0).unwrap(), 1.5);
        assert!(holder_conjugate(1.0).is_err());
    }

    #[test]
    fn conjugate_is_involution() {
        for s in [1.01, 1.5, 2.0, 3.7, 42.0] {
            let back = holder_conjugate(holder_conjugate(s).unwrap()).unwrap();
            assert!((back - s).abs() < 1e-12 * s);
        }
    }

    #[test]
    fn k_of_r_examples() {
        assert!((k_of_r(2.0).unwrap() - 0.25).abs() < 1e-15);
        // (3-1)/3^{3/2}
        assert!((k_of_r(3.0).unwrap() - 2.0 / math::powf(3.0, 1.5)).abs() < 1e-12);
        assert!(k_of_r(1.0).is_err());
    }

    #[test]
    fn admissibility_subcritical_example() {
        let a = check_admissibility(&e(2.0, 10.0, 2.0, 2.0, 3.0));
        assert!(a.subcritical && a.admissible());
        assert!(!a.high_m && !a.high_sigma);
    }

    #[test]
    fn admissibility_borderline_integrabilities() {
        // m = sigma = N makes both high branches hold for any p, q with pq > 1
        for (p, q) in [(1.0, 1.5), (2.0, 2.0), (7.0, 0.2)] {
            let a = check_admissibility(&e(p, q, 4.0, 4.0, 4.0));
            assert!(a.high_m && a.high_sigma, "p={p} q={q}");
        }
    }

    #[test]
    fn admissibility_low_gradient_power() {
        let a = check_admissibility(&e(1.5, 7.0, 2.0, 2.0, 4.0));
        assert!(a.subcritical);
    }

    #[test]
    fn choose_r_examples() {
        // interval (60/23, 6)
        let ex = e(1.2, 10.0, 2.0, 2.0, 3.0);
        let r = choose_r(&ex).unwrap();
        assert!((r - math::sqrt(60.0 * 6.0 / 23.0)).abs() < 1e-12);
        assert!(60.0 / 23.0 < r && r < 6.0);

        // q = 1 interval (6/5, 6)
        let ex = e(2.0, 1.0, 2.0, 2.0, 3.0);
        let r = choose_r(&ex).unwrap();
        assert!((r - math::sqrt(36.0 / 5.0)).abs() < 1e-12);
    }

    #[test]
    fn choose_r_rejects_inadmissible() {
        // pm = 8 >= sigma* = 6 and no high branch
        let ex = e(4.0, 10.0, 2.0, 2.0, 3.0);
        assert!(matches!(choose_r(&ex), Err(Error::NotAdmissible(_))));
    }

    #[test]
    fn choose_r_high_m_heuristic_cap() {
        let ex = e(2.0, 2.0, 2.0, 2.0, 2.0);
        let r = choose_r(&ex).unwrap();
        let lo = 2.0 * 2.0 * 2.0 / (2.0 + 4.0);
        assert!((r - math::sqrt(lo * 20.0)).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_tuples() {
        assert!(Exponents::new(0.5, 3.0, 2.0, 2.0, 3.0).is_err());
        assert!(Exponents::new(1.0, 1.0, 2.0, 2.0, 3.0).is_err(), "pq = 1");
        assert!(Exponents::new(2.0, 2.0, 1.0, 2.0, 3.0).is_err());
    }

    #[test]
    fn stars_only_below_dimension() {
        let ex = e(2.0, 2.0, 2.0, 3.0, 3.0);
        assert!((ex.m_star().unwrap() - 6.0).abs() < 1e-12);
        assert!(ex.sigma_star().is_none());
    }
}
