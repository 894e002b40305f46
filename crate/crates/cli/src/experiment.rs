//! Experiment dispatch: build the problem from a config, run it, write CSVs.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use gradsys_core::bilaplacian::{cross_validate, solve_bilaplacian, BilaplacianProblem};
use gradsys_core::exponents::Exponents;
use gradsys_core::grid::{build_grid, sample, FnDescriptor, GridSpec, ScalarField};
use gradsys_core::schauder::{
    calibrate_c_tilde, data_region_report, iterate_to_fixed_point, thresholds_from, ProblemData,
    ThresholdConstants, Verdict,
};
use gradsys_core::thresholds::{
    alpha_threshold_upper, capacity_threshold_upper, default_family, lambda_threshold_upper,
    threshold_upper_q1, witness_divergence_study, ThresholdKind, WitnessParams,
};

use crate::config::{Config, ConfigError};
use crate::csvout::{fmt_f64, functional_csv, summary_csv, trace_csv, verdict_name};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Core(#[from] gradsys_core::Error),
    #[error("cannot read `{path}`: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("unknown experiment kind `{0}`")]
    UnknownKind(String),
    #[error("{0}")]
    Invalid(String),
}

/// How a completed experiment ended, for the process exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Ok,
    Diverged,
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<(), RunError> {
    fs::create_dir_all(dir).map_err(|source| RunError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|source| RunError::Io { path, source })
}

/// Resolves a descriptor into a field; `file:` paths are read relative to
/// `base` (one value per line, row-major).
pub fn load_field(
    grid: &Arc<GridSpec>,
    descriptor: &str,
    base: &Path,
) -> Result<ScalarField, RunError> {
    let desc = FnDescriptor::parse(descriptor)?;
    if let FnDescriptor::File(ref rel) = desc {
        let path = base.join(rel);
        let text = fs::read_to_string(&path).map_err(|source| RunError::Io {
            path: path.clone(),
            source,
        })?;
        let mut values = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() {
                continue;
            }
            let v: f64 = t.parse().map_err(|_| {
                RunError::Invalid(format!(
                    "{}: line {}: not a number: `{t}`",
                    path.display(),
                    i + 1
                ))
            })?;
            values.push(v);
        }
        return Ok(ScalarField::from_values(grid, values)?);
    }
    Ok(sample(grid, &desc)?)
}

struct FixedPointSetup {
    data: ProblemData,
    thresholds: ThresholdConstants,
    c_tilde: f64,
    calibrated: bool,
}

fn fixed_point_setup(cfg: &Config, base: &Path) -> Result<FixedPointSetup, RunError> {
    let dim = cfg.integer("dim", 2)?;
    let n = cfg.required_integer("n")?;
    let grid = build_grid(dim, n)?;
    let p = cfg.required_float("p")?;
    let q = cfg.required_float("q")?;
    let m = cfg.required_float("m")?;
    let sigma = cfg.required_float("sigma")?;
    let n_dim = cfg.required_float("N")?;
    let exponents = Exponents::new(p, q, m, sigma, n_dim)?.with_chosen_r()?;
    let f = load_field(&grid, &cfg.string("f", "zero"), base)?;
    let g = load_field(&grid, &cfg.string("g", "zero"), base)?;
    let lambda = cfg.float("lambda", 0.0)?;
    let alpha = cfg.float("alpha", 0.0)?;
    let mut data = ProblemData::new(f, g, lambda, alpha, exponents)?;
    data.tol = cfg.float("tol", 1e-8)?;
    data.max_iter = cfg.integer("max_iter", 200)?;

    let seed = cfg.integer("seed", 0)? as u64;
    let choice = cfg.string("c_tilde", "1");
    let (c_tilde, calibrated) = if choice == "calibrate" {
        (calibrate_c_tilde(&data, seed, 20)?, true)
    } else {
        let v: f64 = choice.parse().map_err(|_| {
            RunError::Invalid(format!(
                "c_tilde: expected a number or `calibrate`, got `{choice}`"
            ))
        })?;
        (v, false)
    };
    let thresholds = thresholds_from(data.exponents.pq(), c_tilde)?;
    Ok(FixedPointSetup {
        data,
        thresholds,
        c_tilde,
        calibrated,
    })
}

fn run_fixed_point(
    cfg: &Config,
    base: &Path,
    out: &Path,
    verbose: bool,
) -> Result<Outcome, RunError> {
    let setup = fixed_point_setup(cfg, base)?;
    let region = data_region_report(&setup.data, &setup.thresholds)?;
    let solution = iterate_to_fixed_point(&setup.data, &setup.thresholds, None)?;
    let report = &solution.report;
    if verbose {
        for r in &report.trace {
            eprintln!(
                "iter {}: grad_v_r = {:.6e}, rel_change = {:.3e}, in ball: {}",
                r.iter, r.grad_v_r, r.rel_change_w11, r.in_ball
            );
        }
    }
    write_out(out, "trace.csv", &trace_csv(report))?;
    let last = report.trace.last();
    let summary = summary_csv(&[
        ("kind", "fixed_point".into()),
        ("verdict", verdict_name(report.verdict).into()),
        ("iterations", report.trace.len().to_string()),
        ("c_tilde", fmt_f64(setup.c_tilde)),
        ("calibrated", setup.calibrated.to_string()),
        ("r_iter", fmt_f64(report.r_iter)),
        ("ell", fmt_f64(setup.thresholds.ell)),
        ("lambda_star", fmt_f64(setup.thresholds.lambda_star)),
        ("s_zero", fmt_f64(setup.thresholds.s_zero)),
        ("ball_radius", fmt_f64(setup.thresholds.ball_radius())),
        (
            "in_ball_all_iterations",
            report.in_ball_all_iterations.to_string(),
        ),
        ("pi_member", region.member.to_string()),
        ("pi_iteration_lhs", fmt_f64(region.iteration_lhs)),
        ("pi_iteration_bound", fmt_f64(region.iteration_bound)),
        ("pi_stated_lhs", fmt_f64(region.stated_lhs)),
        ("pi_stated_bound", fmt_f64(region.stated_bound)),
        ("res1", fmt_f64(last.map(|r| r.res1).unwrap_or(f64::NAN))),
        ("res2", fmt_f64(last.map(|r| r.res2).unwrap_or(f64::NAN))),
    ]);
    write_out(out, "summary.csv", &summary)?;
    Ok(match report.verdict {
        Verdict::Diverged => Outcome::Diverged,
        _ => Outcome::Ok,
    })
}

fn run_bilaplacian(
    cfg: &Config,
    base: &Path,
    out: &Path,
    verbose: bool,
) -> Result<Outcome, RunError> {
    let dim = cfg.integer("dim", 2)?;
    let n = cfg.required_integer("n")?;
    let grid = build_grid(dim, n)?;
    let prob = BilaplacianProblem {
        f: load_field(&grid, &cfg.string("f", "zero"), base)?,
        lambda: cfg.float("lambda", 0.0)?,
        p: cfg.required_float("p")?,
        m: cfg.required_float("m")?,
        n_dim: cfg.required_float("N")?,
        tol: cfg.float("tol", 1e-8)?,
        max_iter: cfg.integer("max_iter", 200)?,
        poisson_tol: 1e-10,
    };
    let choice = cfg.string("c_tilde", "1");
    let c_tilde: f64 = if choice == "calibrate" {
        // calibration runs on the equivalent coupled problem
        let zero = ScalarField::zeros(&grid);
        let choice = gradsys_core::bilaplacian::choose_sigma0(prob.m, prob.p, prob.n_dim)?;
        let e =
            Exponents::new(prob.p, 1.0, choice.m0, choice.sigma0, prob.n_dim)?.with_chosen_r()?;
        let data = ProblemData::new(prob.f.clone(), zero, prob.lambda, 0.0, e)?;
        calibrate_c_tilde(&data, cfg.integer("seed", 0)? as u64, 20)?
    } else {
        choice.parse().map_err(|_| {
            RunError::Invalid(format!(
                "c_tilde: expected a number or `calibrate`, got `{choice}`"
            ))
        })?
    };
    let t = thresholds_from(prob.p, c_tilde)?;
    let result = solve_bilaplacian(&prob, &t)?;
    if verbose {
        for r in &result.report.trace {
            eprintln!("iter {}: grad_v_r = {:.6e}", r.iter, r.grad_v_r);
        }
    }
    write_out(out, "trace.csv", &trace_csv(&result.report))?;
    let cross = if result.report.verdict == Verdict::Converged {
        cross_validate(&result, &prob.f, prob.lambda, prob.p)
    } else {
        f64::NAN
    };
    let summary = summary_csv(&[
        ("kind", "bilaplacian".into()),
        ("verdict", verdict_name(result.report.verdict).into()),
        ("iterations", result.report.trace.len().to_string()),
        ("c_tilde", fmt_f64(c_tilde)),
        ("m0", fmt_f64(result.m0)),
        ("sigma0", fmt_f64(result.sigma0)),
        ("cross_residual_l1", fmt_f64(cross)),
        ("u_max", fmt_f64(result.u.max_value())),
        ("v_max", fmt_f64(result.v.max_value())),
    ]);
    write_out(out, "summary.csv", &summary)?;
    Ok(match result.report.verdict {
        Verdict::Diverged => Outcome::Diverged,
        _ => Outcome::Ok,
    })
}

fn run_thresholds(cfg: &Config, base: &Path, out: &Path) -> Result<Outcome, RunError> {
    let dim = cfg.integer("dim", 2)?;
    let n = cfg.required_integer("n")?;
    let grid = build_grid(dim, n)?;
    let p = cfg.required_float("p")?;
    let q = cfg.required_float("q")?;
    let f = load_field(&grid, &cfg.string("f", "one"), base)?;
    let g = load_field(&grid, &cfg.string("g", "one"), base)?;
    let family = default_family(&grid)?;
    let tol = cfg.float("tol", 1e-10)?;

    let mut rows = Vec::new();
    let (alpha_bound, lambda_bound) = if q == 1.0 {
        let a = threshold_upper_q1(&g, &family, p, ThresholdKind::Alpha, tol)?;
        let l = threshold_upper_q1(&f, &family, p, ThresholdKind::Lambda, tol)?;
        (a, l)
    } else {
        let a = alpha_threshold_upper(&g, &family, p, q)?;
        let l = lambda_threshold_upper(&f, &family, p, q)?;
        (a, l)
    };
    rows.extend(alpha_bound.rows.iter().cloned().map(|mut r| {
        r.functional = if q == 1.0 { "G_alpha" } else { "F_alpha" };
        r
    }));
    rows.extend(lambda_bound.rows.iter().cloned().map(|mut r| {
        r.functional = if q == 1.0 { "G_lambda" } else { "F_lambda" };
        r
    }));
    let capacity = capacity_threshold_upper(&f, &family, p)?;
    rows.extend(capacity.rows.iter().cloned());
    write_out(out, "thresholds.csv", &functional_csv(&rows))?;
    let summary = summary_csv(&[
        ("kind", "thresholds".into()),
        ("alpha_star_upper", fmt_f64(alpha_bound.value)),
        ("alpha_best_member", alpha_bound.best_member.clone()),
        ("lambda_star_upper", fmt_f64(lambda_bound.value)),
        ("lambda_best_member", lambda_bound.best_member.clone()),
        ("capacity_upper", fmt_f64(capacity.value)),
        ("capacity_best_member", capacity.best_member.clone()),
    ]);
    write_out(out, "summary.csv", &summary)?;
    Ok(Outcome::Ok)
}

fn run_witness(cfg: &Config, out: &Path) -> Result<Outcome, RunError> {
    let wp = WitnessParams {
        n_dim: cfg.required_integer("N")?,
        p: cfg.required_float("p")?,
        eps: cfg.required_float("eps")?,
        gamma: cfg.required_float("gamma")?,
    };
    let k_min = cfg.integer("cutoff_k_min", 3)?;
    let k_max = cfg.integer("cutoff_k_max", 10)?;
    if k_min >= k_max {
        return Err(RunError::Invalid(
            "cutoff_k_min must be below cutoff_k_max".into(),
        ));
    }
    let cutoffs: Vec<f64> = (k_min..=k_max).map(|k| 2.0_f64.powi(-(k as i32))).collect();
    let study = witness_divergence_study(&wp, &cutoffs)?;
    let mut csv = String::from("cutoff,numerator,denominator,ratio\n");
    for i in 0..study.cutoffs.len() {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            fmt_f64(study.cutoffs[i]),
            fmt_f64(study.numerators[i]),
            fmt_f64(study.denominators[i]),
            fmt_f64(study.numerators[i] / study.denominators[i]),
        ));
    }
    write_out(out, "witness.csv", &csv)?;
    let ratios = study.ratios();
    let summary = summary_csv(&[
        ("kind", "witness".into()),
        ("theta", fmt_f64(wp.theta()?)),
        ("initial_ratio", fmt_f64(ratios[0])),
        ("final_ratio", fmt_f64(*ratios.last().unwrap())),
    ]);
    write_out(out, "summary.csv", &summary)?;
    Ok(Outcome::Ok)
}

/// Runs the experiment a config describes. Exit protocol: `Ok` maps to 0,
/// `Diverged` to 2, errors to 1.
pub fn run(
    config_path: &Path,
    out_override: Option<&Path>,
    verbose: bool,
) -> Result<Outcome, RunError> {
    let text = fs::read_to_string(config_path).map_err(|source| RunError::Io {
        path: config_path.to_path_buf(),
        source,
    })?;
    let cfg = Config::parse(&text)?;
    let base = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let out = out_override
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| base.join(cfg.string("out_dir", "out")));
    let kind = cfg.required("kind")?.to_string();
    match kind.as_str() {
        "fixed_point" => run_fixed_point(&cfg, &base, &out, verbose),
        "bilaplacian" => run_bilaplacian(&cfg, &base, &out, verbose),
        "thresholds" => run_thresholds(&cfg, &base, &out),
        "witness" => run_witness(&cfg, &out),
        other => Err(RunError::UnknownKind(other.to_string())),
    }
}

fn linspace(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    if steps == 1 {
        return vec![lo];
    }
    (0..steps)
        .map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64)
        .collect()
}

fn sweep_grid(cfg: &Config, base: &Path, out: &Path, verbose: bool) -> Result<Outcome, RunError> {
    let setup = fixed_point_setup(cfg, base)?;
    let lambdas = linspace(
        cfg.float("lambda_min", setup.data.lambda)?,
        cfg.float("lambda_max", setup.data.lambda)?,
        cfg.integer("lambda_steps", 1)?,
    );
    let alphas = linspace(
        cfg.float("alpha_min", setup.data.alpha)?,
        cfg.float("alpha_max", setup.data.alpha)?,
        cfg.integer("alpha_steps", 1)?,
    );
    if lambdas.is_empty() || alphas.is_empty() {
        return Err(RunError::Invalid("sweep grid is empty".into()));
    }
    let points: Vec<(usize, f64, f64)> = lambdas
        .iter()
        .flat_map(|&l| alphas.iter().map(move |&a| (l, a)))
        .enumerate()
        .map(|(i, (l, a))| (i, l, a))
        .collect();

    let results: Vec<Result<String, RunError>> = points
        .par_iter()
        .map(|&(index, lambda, alpha)| {
            let mut d = setup.data.clone();
            d.lambda = lambda;
            d.alpha = alpha;
            let region = data_region_report(&d, &setup.thresholds)?;
            let sol = iterate_to_fixed_point(&d, &setup.thresholds, None)?;
            let last = sol.report.trace.last();
            Ok(format!(
                "{},{},{},{},{},{},{},{}\n",
                index,
                fmt_f64(lambda),
                fmt_f64(alpha),
                verdict_name(sol.report.verdict),
                sol.report.trace.len(),
                fmt_f64(last.map(|r| r.grad_v_r).unwrap_or(f64::NAN)),
                sol.report.in_ball_all_iterations,
                region.member,
            ))
        })
        .collect();

    let mut csv = String::from(
        "index,lambda,alpha,verdict,iterations,grad_v_r_final,in_ball_all,pi_member\n",
    );
    let mut all_diverged = true;
    for r in results {
        let row = r?;
        if !row.contains(",Diverged,") {
            all_diverged = false;
        }
        if verbose {
            eprint!("point {row}");
        }
        csv.push_str(&row);
    }
    write_out(out, "sweep.csv", &csv)?;
    write_bounds(cfg, base, out, &setup)?;
    Ok(if all_diverged {
        Outcome::Diverged
    } else {
        Outcome::Ok
    })
}

/// The analytic region boundary and the dual upper bounds drawn on the same
/// axes as the sweep.
fn write_bounds(
    cfg: &Config,
    base: &Path,
    out: &Path,
    setup: &FixedPointSetup,
) -> Result<(), RunError> {
    let p = setup.data.exponents.p;
    let q = setup.data.exponents.q;
    let grid = setup.data.grid().clone();
    let family = default_family(&grid)?;
    let f = load_field(&grid, &cfg.string("f", "zero"), base)?;
    let g = load_field(&grid, &cfg.string("g", "zero"), base)?;
    let tol = 1e-10;
    let (alpha_bound, lambda_bound) = if q == 1.0 {
        (
            threshold_upper_q1(&g, &family, p, ThresholdKind::Alpha, tol)?,
            threshold_upper_q1(&f, &family, p, ThresholdKind::Lambda, tol)?,
        )
    } else {
        (
            alpha_threshold_upper(&g, &family, p, q)?,
            lambda_threshold_upper(&f, &family, p, q)?,
        )
    };
    let region = data_region_report(&setup.data, &setup.thresholds)?;
    let summary = summary_csv(&[
        ("c_tilde", fmt_f64(setup.c_tilde)),
        ("lambda_star", fmt_f64(setup.thresholds.lambda_star)),
        ("pi_iteration_bound", fmt_f64(region.iteration_bound)),
        ("pi_stated_bound", fmt_f64(region.stated_bound)),
        ("alpha_star_upper", fmt_f64(alpha_bound.value)),
        ("lambda_star_upper", fmt_f64(lambda_bound.value)),
    ]);
    write_out(out, "bounds.csv", &summary)
}

fn sweep_bisect(cfg: &Config, base: &Path, out: &Path) -> Result<Outcome, RunError> {
    let setup = fixed_point_setup(cfg, base)?;
    let mut lo = cfg.required_float("lambda_lo")?;
    let mut hi = cfg.required_float("lambda_hi")?;
    if !lo.is_finite() || !hi.is_finite() || lo >= hi {
        return Err(RunError::Invalid("needs lambda_lo < lambda_hi".into()));
    }
    let rel_width = cfg.float("bisect_rel_width", 1e-2)?;
    let max_steps = cfg.integer("bisect_max_steps", 64)?;

    let diverges = |lambda: f64| -> Result<bool, RunError> {
        let mut d = setup.data.clone();
        d.lambda = lambda;
        let sol = iterate_to_fixed_point(&d, &setup.thresholds, None)?;
        Ok(sol.report.verdict == Verdict::Diverged)
    };
    if diverges(lo)? {
        return Err(RunError::Invalid(format!(
            "lambda_lo = {lo} already diverges"
        )));
    }
    if !diverges(hi)? {
        return Err(RunError::Invalid(format!(
            "lambda_hi = {hi} does not diverge"
        )));
    }

    let mut csv = String::from("step,lambda,diverged,lo,hi\n");
    let mut step = 0usize;
    while step < max_steps {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= rel_width * mid {
            break;
        }
        let div = diverges(mid)?;
        if div {
            hi = mid;
        } else {
            lo = mid;
        }
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            step,
            fmt_f64(mid),
            div,
            fmt_f64(lo),
            fmt_f64(hi)
        ));
        step += 1;
    }
    let boundary = 0.5 * (lo + hi);
    write_out(out, "bisect.csv", &csv)?;
    write_bounds(cfg, base, out, &setup)?;
    let summary = summary_csv(&[
        ("boundary_lambda", fmt_f64(boundary)),
        ("bracket_lo", fmt_f64(lo)),
        ("bracket_hi", fmt_f64(hi)),
        ("bracket_rel_width", fmt_f64((hi - lo) / boundary)),
        ("steps", step.to_string()),
    ]);
    write_out(out, "summary.csv", &summary)?;
    Ok(Outcome::Ok)
}

/// Runs the sweep a config describes: a (λ, α) verdict grid or a bisection
/// for the divergence boundary in λ. Exit protocol: 2 only when every swept
/// point diverged (so a single-point sweep matches `run`), else 0.
pub fn sweep(
    config_path: &Path,
    out_override: Option<&Path>,
    verbose: bool,
) -> Result<Outcome, RunError> {
    let text = fs::read_to_string(config_path).map_err(|source| RunError::Io {
        path: config_path.to_path_buf(),
        source,
    })?;
    let cfg = Config::parse(&text)?;
    let base = config_path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let out = out_override
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| base.join(cfg.string("out_dir", "out")));
    match cfg.string("sweep_mode", "grid").as_str() {
        "grid" => sweep_grid(&cfg, &base, &out, verbose),
        "bisect" => sweep_bisect(&cfg, &base, &out),
        other => Err(RunError::Invalid(format!("unknown sweep_mode `{other}`"))),
    }
}
