//! Deterministic CSV emission: fixed column orders, exponential float
//! formatting, `true`/`false` booleans.

use std::fmt::Write as _;

use gradsys_core::schauder::{IterationReport, Verdict};
use gradsys_core::thresholds::FunctionalRow;

pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        }
    } else {
        format!("{v:e}")
    }
}

pub fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::Converged => "Converged",
        Verdict::Diverged => "Diverged",
        Verdict::MaxIterReached => "MaxIterReached",
    }
}

/// The iteration trace with its pinned column order.
pub fn trace_csv(report: &IterationReport) -> String {
    let mut out = String::from("iter,grad_v_r,grad_u_p,rel_change_w11,res1,res2,in_E\n");
    for r in &report.trace {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.iter,
            fmt_f64(r.grad_v_r),
            fmt_f64(r.grad_u_p),
            fmt_f64(r.rel_change_w11),
            fmt_f64(r.res1),
            fmt_f64(r.res2),
            r.in_ball
        );
    }
    out
}

/// Functional evaluations: one row per family member.
pub fn functional_csv(rows: &[FunctionalRow]) -> String {
    let mut out = String::from("functional,member,value,denominator,ratio\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.functional,
            r.member,
            fmt_f64(r.value),
            fmt_f64(r.denominator),
            fmt_f64(r.ratio)
        );
    }
    out
}

/// Simple key/value summary table.
pub fn summary_csv(pairs: &[(&str, String)]) -> String {
    let mut out = String::from("key,value\n");
    for (k, v) in pairs {
        let _ = writeln!(out, "{k},{v}");
    }
    out
}
