use crate::config::{ExperimentConfig, Params};
use crate::error::CliError;
use crate::output::{fmt_f64, RunDir};
use chain_simulator::{
    ldt_constants, verify_ldt, ChainConfig, LdtBound, SkewState, StartMode,
};
use clt::{clt_experiment, gordin_livsic_sigma2, VarianceMethod, DEFAULT_SERIES_TERMS};
use expanding_map::{
    expanding_clt, invariant_density, markov_apply, markov_kernel_weights, markov_sigma2,
    mixing_rate_exp, parse_expression, transfer_apply, DensityGrid,
};
use holonomy::{reduce_to_past, sampled_state, verify_cohomology};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use spectral_operator::{decay_trace, fit_power_rate, FourierObservable, MixingRate};
use torus_measure::{fit_mixing_dc, TorusMeasure, TorusMeasureError};

/// Outcome of a completed run: the exit code policy is pass -> 0, any
/// failed check -> 2. Configuration problems never reach this type.
pub struct Outcome {
    pub pass: bool,
    pub verdict: String,
}

fn verdict_str(pass: bool) -> &'static str {
    if pass {
        "pass"
    } else {
        "fail"
    }
}

fn require_increasing(key: &str, list: &[u64]) -> Result<(), CliError> {
    if list.is_empty() || list[0] < 1 || list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError::key(key, "must be strictly increasing integers >= 1"));
    }
    Ok(())
}

fn require_positive(key: &str, list: &[f64]) -> Result<(), CliError> {
    if list.is_empty() || list.iter().any(|&v| !(v > 0.0)) {
        return Err(CliError::key(key, "entries must be positive"));
    }
    Ok(())
}

fn require_at_least(key: &str, value: u64, min: u64) -> Result<(), CliError> {
    if value < min {
        return Err(CliError::key(key, format!("must be at least {min}")));
    }
    Ok(())
}

/// Dispatch a resolved config. Writes data CSVs and summary.json into the
/// run directory; the caller writes the manifest.
pub fn run_experiment(cfg: &ExperimentConfig, dir: &mut RunDir) -> Result<Outcome, CliError> {
    match &cfg.params {
        Params::Mixing { mu, phi, k_max, tau_grid, n_list, grid, fit_lo, fit_hi } => {
            run_mixing(cfg.seed, mu, phi, *k_max, tau_grid, n_list, *grid, *fit_lo, *fit_hi, dir)
        }
        Params::DcCheck { mu, k_max, tau_grid } => run_dc_check(mu, *k_max, tau_grid, dir),
        Params::Ldt {
            mu,
            phi,
            epsilons,
            n_grid,
            trials,
            window_w,
            start,
            trace_n_list,
            fit_lo,
            fit_hi,
            grid,
        } => run_ldt(
            cfg.seed,
            mu,
            phi,
            epsilons,
            n_grid,
            *trials,
            *window_w,
            start,
            trace_n_list,
            *fit_lo,
            *fit_hi,
            *grid,
            dir,
        ),
        Params::Clt { mu, phi, n, trials, window_w, sigma_scale, ks_tol, var_lo, var_hi } => {
            run_clt(
                cfg.seed,
                mu,
                phi,
                *n,
                *trials,
                *window_w,
                *sigma_scale,
                *ks_tol,
                *var_lo,
                *var_hi,
                dir,
            )
        }
        Params::Holonomy { phi, mu, n_samples, n_pairs, mc_states, residual_tol } => {
            run_holonomy(cfg.seed, phi, mu, *n_samples, *n_pairs, *mc_states, *residual_tol, dir)
        }
        Params::Expanding {
            model,
            phi_text,
            density_tol,
            max_iter,
            n_max,
            clt_n,
            clt_trials,
            ks_tol,
            weight_tol,
            unital_tol,
            weight_points,
        } => run_expanding(
            cfg.seed,
            model,
            phi_text,
            *density_tol,
            *max_iter,
            *n_max,
            *clt_n,
            *clt_trials,
            *ks_tol,
            *weight_tol,
            *unital_tol,
            *weight_points,
            dir,
        ),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_mixing(
    seed: u64,
    mu: &TorusMeasure,
    phi: &FourierObservable,
    k_max: u32,
    tau_grid: &[f64],
    n_list: &[u64],
    grid: usize,
    fit_lo: u64,
    fit_hi: u64,
    dir: &mut RunDir,
) -> Result<Outcome, CliError> {
    let _ = seed; // the mixing pipeline is deterministic
    require_positive("tau_grid", tau_grid)?;
    require_increasing("n_list", n_list)?;
    let dc = match fit_mixing_dc(mu, k_max, tau_grid) {
        Ok(pair) => Some(pair),
        Err(TorusMeasureError::DegenerateMeasure) => None,
        Err(e) => return Err(CliError::key("tau_grid", e)),
    };
    let Some((gamma_star, tau_star)) = dc else {
        dir.write_csv("decay.csv", &["n", "bound", "grid_sup"], &[])?;
        dir.write_summary(&json!({
            "verdict": "degenerate measure",
            "slopes": Value::Null,
            "constants": { "k_max": k_max },
            "tolerances": {},
        }))?;
        return Ok(Outcome { pass: false, verdict: "degenerate measure".into() });
    };

    let trace = decay_trace(phi, mu, n_list, grid);
    let rows: Vec<Vec<String>> = trace
        .rows
        .iter()
        .map(|r| vec![r.n.to_string(), fmt_f64(r.bound_value), fmt_f64(r.grid_sup_value)])
        .collect();
    dir.write_csv("decay.csv", &["n", "bound", "grid_sup"], &rows)?;

    let profile = fit_power_rate(&trace, fit_lo, fit_hi)
        .map_err(|e| CliError::key("fit_lo", format!("fit window unusable: {e}")))?;
    let MixingRate::Power { p } = profile.rate else {
        unreachable!("power fit returns a power profile")
    };
    let pass = p > 0.0;
    dir.write_summary(&json!({
        "verdict": verdict_str(pass),
        "slopes": { "log_bound_vs_log_n": -p },
        "constants": {
            "gamma_star": gamma_star,
            "tau_star": tau_star,
            "c_fit": profile.c,
            "p_fit": p,
        },
        "tolerances": { "fit_lo": fit_lo, "fit_hi": fit_hi },
    }))?;
    Ok(Outcome { pass, verdict: verdict_str(pass).into() })
}

fn run_dc_check(
    mu: &TorusMeasure,
    k_max: u32,
    tau_grid: &[f64],
    dir: &mut RunDir,
) -> Result<Outcome, CliError> {
    require_positive("tau_grid", tau_grid)?;
    let mut rows = Vec::new();
    for &tau in tau_grid {
        match fit_mixing_dc(mu, k_max, &[tau]) {
            Ok((gamma, _)) => {
                rows.push(vec![fmt_f64(tau), fmt_f64(gamma), "ok".to_string()]);
            }
            Err(TorusMeasureError::DegenerateMeasure) => {
                rows.push(vec![fmt_f64(tau), String::new(), "degenerate measure".to_string()]);
            }
            Err(e) => return Err(CliError::key("tau_grid", e)),
        }
    }
    dir.write_csv("dc.csv", &["tau", "gamma", "status"], &rows)?;

    match fit_mixing_dc(mu, k_max, tau_grid) {
        Ok((gamma_star, tau_star)) => {
            dir.write_summary(&json!({
                "verdict": "pass",
                "slopes": Value::Null,
                "constants": { "gamma_star": gamma_star, "tau_star": tau_star, "k_max": k_max },
                "tolerances": {},
            }))?;
            Ok(Outcome { pass: true, verdict: "pass".into() })
        }
        Err(TorusMeasureError::DegenerateMeasure) => {
            dir.write_summary(&json!({
                "verdict": "degenerate measure",
                "slopes": Value::Null,
                "constants": { "k_max": k_max },
                "tolerances": {},
            }))?;
            Ok(Outcome { pass: false, verdict: "degenerate measure".into() })
        }
        Err(e) => Err(CliError::key("tau_grid", e)),
    }
}

/// Estimate L = sup|phi| + Lip(phi) on a fine grid. Crude but safe for the
/// bound: overestimating L only weakens the claimed inequality.
fn estimate_observable_l(phi: &FourierObservable) -> f64 {
    assert_eq!(phi.dim(), 1, "L estimation implemented for d = 1");
    const G: usize = 4096;
    let values: Vec<f64> = (0..G)
        .map(|i| phi.evaluate(&torus_measure::TorusPoint::scalar(i as f64 / G as f64)))
        .collect();
    let sup = values.iter().fold(0.0f64, |a, &v| a.max(v.abs()));
    let mut lip = 0.0f64;
    for i in 0..G {
        let d = (values[(i + 1) % G] - values[i]).abs() * G as f64;
        lip = lip.max(d);
    }
    sup + lip
}

#[allow(clippy::too_many_arguments)]
fn run_ldt(
    seed: u64,
    mu: &TorusMeasure,
    phi: &FourierObservable,
    epsilons: &[f64],
    n_grid: &[u64],
    trials: u64,
    window_w: usize,
    start: &StartMode,
    trace_n_list: &[u64],
    fit_lo: u64,
    fit_hi: u64,
    grid: usize,
    dir: &mut RunDir,
) -> Result<Outcome, CliError> {
    require_positive("epsilons", epsilons)?;
    require_increasing("n_grid", n_grid)?;
    require_increasing("trace_n_list", trace_n_list)?;
    require_at_least("trials", trials, 1)?;
    let trace = decay_trace(phi, mu, trace_n_list, grid);
    let profile = fit_power_rate(&trace, fit_lo, fit_hi)
        .map_err(|e| CliError::key("trace_n_list", format!("fit window unusable: {e}")))?;
    let MixingRate::Power { p } = profile.rate else {
        unreachable!("power fit returns a power profile")
    };
    if p <= 1e-3 {
        // Flat decay trace: no mixing rate, so the bound has no content.
        dir.write_csv(
            "ldt.csv",
            &["epsilon", "n", "p_hat", "ci", "bound", "vacuous", "verdict"],
            &[],
        )?;
        dir.write_summary(&json!({
            "verdict": "no decay expected",
            "slopes": Value::Null,
            "constants": { "c_fit": profile.c, "p_fit": p },
            "tolerances": {},
        }))?;
        return Ok(Outcome { pass: false, verdict: "no decay expected".into() });
    }

    let l = estimate_observable_l(phi);
    let consts = ldt_constants(profile.c, l, p);
    let mean = phi.mean();
    let cfg = ChainConfig {
        mu: mu.clone(),
        initial: start.clone(),
        n_steps: 1,
        n_trials: trials,
        seed,
        window_w,
    };
    let observe = move |state: &SkewState| phi.evaluate(state.theta());

    let mut rows = Vec::new();
    let mut slopes = serde_json::Map::new();
    let mut all_pass = true;
    for &eps in epsilons {
        let report = verify_ldt(&cfg, &observe, mean, eps, n_grid, &consts);
        for row in &report.rows {
            let bound_cell = match row.bound {
                LdtBound::Value(b) => fmt_f64(b),
                LdtBound::BelowThreshold => "below threshold".to_string(),
            };
            rows.push(vec![
                fmt_f64(eps),
                row.estimate.n.to_string(),
                fmt_f64(row.estimate.p_hat),
                fmt_f64(row.estimate.ci_halfwidth),
                bound_cell,
                row.vacuous.to_string(),
                verdict_str(row.pass).to_string(),
            ]);
        }
        slopes.insert(
            format!("ln_p_hat_vs_n_at_eps_{eps}"),
            report.slope.map_or(Value::Null, |s| json!(s)),
        );
        all_pass &= report.pass;
    }
    dir.write_csv(
        "ldt.csv",
        &["epsilon", "n", "p_hat", "ci", "bound", "vacuous", "verdict"],
        &rows,
    )?;
    dir.write_summary(&json!({
        "verdict": verdict_str(all_pass),
        "slopes": Value::Object(slopes),
        "constants": {
            "c_fit": consts.c,
            "p_fit": consts.p,
            "l_estimated": consts.l,
            "c_bar": consts.c_bar,
            "n_bar": consts.n_bar,
            "c_clamped_to_floor": consts.clamped,
        },
        "tolerances": { "row_rule": "bound >= p_hat - 3 ci, or theorem silent" },
    }))?;
    Ok(Outcome { pass: all_pass, verdict: verdict_str(all_pass).into() })
}

#[allow(clippy::too_many_arguments)]
fn run_clt(
    seed: u64,
    mu: &TorusMeasure,
    phi: &FourierObservable,
    n: u64,
    trials: u64,
    window_w: usize,
    sigma_scale: f64,
    ks_tol: f64,
    var_lo: f64,
    var_hi: f64,
    dir: &mut RunDir,
) -> Result<Outcome, CliError> {
    require_at_least("n", n, 1)?;
    require_at_least("trials", trials, 2)?;
    if !(sigma_scale > 0.0) {
        return Err(CliError::key("sigma_scale", "must be positive"));
    }
    let closed = gordin_livsic_sigma2(phi, mu, VarianceMethod::ClosedForm)
        .map_err(|e| CliError::key("observable", e))?;
    let series = gordin_livsic_sigma2(phi, mu, VarianceMethod::TruncatedSeries)
        .map_err(|e| CliError::key("observable", e))?;
    let sigma2_used = closed.sigma2 * sigma_scale * sigma_scale;
    let cfg = ChainConfig {
        mu: mu.clone(),
        initial: StartMode::Stationary,
        n_steps: n,
        n_trials: trials,
        seed,
        window_w,
    };
    let report = clt_experiment(&cfg, phi, sigma2_used, n, trials);
    let pass = report.ks_statistic < ks_tol
        && report.sample_variance >= var_lo
        && report.sample_variance <= var_hi;
    dir.write_csv(
        "clt.csv",
        &["n", "trials", "ks", "sample_mean", "sample_variance", "sigma2_used", "verdict"],
        &[vec![
            n.to_string(),
            trials.to_string(),
            fmt_f64(report.ks_statistic),
            fmt_f64(report.sample_mean),
            fmt_f64(report.sample_variance),
            fmt_f64(sigma2_used),
            verdict_str(pass).to_string(),
        ]],
    )?;
    dir.write_summary(&json!({
        "verdict": verdict_str(pass),
        "slopes": Value::Null,
        "constants": {
            "sigma2_closed": closed.sigma2,
            "sigma2_series": series.sigma2,
            "series_terms": DEFAULT_SERIES_TERMS,
            "series_residual_bound": series.residual_bound,
            "sigma_scale": sigma_scale,
        },
        "tolerances": { "ks_tol": ks_tol, "var_lo": var_lo, "var_hi": var_hi },
    }))?;
    Ok(Outcome { pass, verdict: verdict_str(pass).into() })
}

#[allow(clippy::too_many_arguments)]
fn run_holonomy(
    seed: u64,
    phi: &holonomy::WindowObservable,
    mu: &TorusMeasure,
    n_samples: usize,
    n_pairs: usize,
    mc_states: usize,
    residual_tol: f64,
    dir: &mut RunDir,
) -> Result<Outcome, CliError> {
    require_at_least("n_samples", n_samples as u64, 1)?;
    require_at_least("n_pairs", n_pairs as u64, 1)?;
    require_at_least("mc_states", mc_states as u64, 2)?;
    let pair = match reduce_to_past(phi) {
        Ok(p) => p,
        Err(e) => {
            dir.write_csv("holonomy.csv", &["check", "value", "tolerance", "verdict"], &[])?;
            let verdict = format!("reduction failed: {e}");
            dir.write_summary(&json!({
                "verdict": verdict,
                "slopes": Value::Null,
                "constants": {},
                "tolerances": { "residual_tol": residual_tol },
            }))?;
            return Ok(Outcome { pass: false, verdict });
        }
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let residual = verify_cohomology(phi, &pair, n_samples, &mut rng);
    let residual_ok = residual < residual_tol;

    // Future-independence, measured directly: replacing a future symbol
    // must not move phi_minus.
    let w_minus = pair.phi_minus.window();
    let depth = w_minus + 2;
    let mut drift = 0.0f64;
    for _ in 0..n_pairs {
        let mut state = sampled_state(mu, depth, &mut rng);
        let before = pair.phi_minus.evaluate_state(&state);
        let j = rng.gen_range(1..=depth as i64);
        state.seq.set(j, mu.sample(&mut rng));
        drift = drift.max((pair.phi_minus.evaluate_state(&state) - before).abs());
    }
    let drift_ok = drift < residual_tol;

    // Stationary means of phi and phi_minus agree: the reduction moves the
    // observable by a coboundary, which integrates to zero.
    let half = depth.max(phi.window());
    let diffs: Vec<f64> = (0..mc_states)
        .map(|_| {
            let state = sampled_state(mu, half, &mut rng);
            pair.phi_minus.evaluate_state(&state) - phi.evaluate_state(&state)
        })
        .collect();
    let m = diffs.len() as f64;
    let mean_gap = diffs.iter().sum::<f64>() / m;
    let sd = (diffs.iter().map(|d| (d - mean_gap).powi(2)).sum::<f64>() / (m - 1.0)).sqrt();
    let se = sd / m.sqrt();
    let mean_ok = mean_gap.abs() <= 4.0 * se + residual_tol;

    let rows = vec![
        vec![
            "cohomology_residual_max".to_string(),
            fmt_f64(residual),
            fmt_f64(residual_tol),
            verdict_str(residual_ok).to_string(),
        ],
        vec![
            "future_symbol_drift_max".to_string(),
            fmt_f64(drift),
            fmt_f64(residual_tol),
            verdict_str(drift_ok).to_string(),
        ],
        vec![
            "stationary_mean_gap".to_string(),
            fmt_f64(mean_gap),
            fmt_f64(4.0 * se + residual_tol),
            verdict_str(mean_ok).to_string(),
        ],
    ];
    dir.write_csv("holonomy.csv", &["check", "value", "tolerance", "verdict"], &rows)?;

    let pass = residual_ok && drift_ok && mean_ok;
    dir.write_summary(&json!({
        "verdict": verdict_str(pass),
        "slopes": Value::Null,
        "constants": {
            "window": phi.window(),
            "eta_window": pair.eta.window(),
            "phi_minus_window": w_minus,
            "alpha": phi.alpha(),
            "mean_gap_se": se,
        },
        "tolerances": { "residual_tol": residual_tol, "mean_rule": "4 standard errors" },
    }))?;
    Ok(Outcome { pass, verdict: verdict_str(pass).into() })
}

#[allow(clippy::too_many_arguments)]
fn run_expanding(
    seed: u64,
    model: &expanding_map::CircleMapModel,
    phi_text: &str,
    density_tol: f64,
    max_iter: usize,
    n_max: usize,
    clt_n: u64,
    clt_trials: u64,
    ks_tol: f64,
    weight_tol: f64,
    unital_tol: f64,
    weight_points: usize,
    dir: &mut RunDir,
) -> Result<Outcome, CliError> {
    require_at_least("max_iter", max_iter as u64, 1)?;
    require_at_least("n_max", n_max as u64, 5)?;
    require_at_least("clt_n", clt_n, 1)?;
    require_at_least("clt_trials", clt_trials, 2)?;
    require_at_least("weight_points", weight_points as u64, 1)?;
    let fail = |dir: &mut RunDir, verdict: String| -> Result<Outcome, CliError> {
        dir.write_csv("trace.csv", &["n", "delta"], &[])?;
        dir.write_csv("checks.csv", &["check", "value", "tolerance", "verdict"], &[])?;
        dir.write_summary(&json!({
            "verdict": verdict,
            "slopes": Value::Null,
            "constants": {},
            "tolerances": { "density_tol": density_tol },
        }))?;
        Ok(Outcome { pass: false, verdict })
    };

    let g = match invariant_density(model, density_tol, max_iter) {
        Ok(g) => g,
        Err(e) => return fail(dir, format!("density solve: {e}")),
    };
    let residual = transfer_apply(&g, model)
        .map_err(|e| CliError(format!("transfer apply: {e}")))?
        .sup_distance(&g);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut weight_err = 0.0f64;
    for _ in 0..weight_points {
        let x: f64 = rng.gen();
        let sum: f64 = markov_kernel_weights(model, &g, x)
            .map_err(|e| CliError(format!("kernel weights: {e}")))?
            .iter()
            .map(|(_, w)| w)
            .sum();
        weight_err = weight_err.max((sum - 1.0).abs());
    }

    let one = DensityGrid::uniform(g.resolution());
    let unital_gap = markov_apply(&one, model, &g)
        .map_err(|e| CliError(format!("markov apply: {e}")))?
        .sup_distance_to(1.0);

    let expr = parse_expression(phi_text).map_err(|e| CliError::key("phi", e))?;
    let phi_grid = DensityGrid::from_fn(g.resolution(), |x| expr.eval(x));
    let trace = match mixing_rate_exp(model, &g, &phi_grid, n_max) {
        Ok(t) => t,
        Err(e) => return fail(dir, format!("mixing trace: {e}")),
    };
    let trace_rows: Vec<Vec<String>> = trace
        .deltas
        .iter()
        .enumerate()
        .map(|(i, &d)| vec![(i + 1).to_string(), fmt_f64(d)])
        .collect();
    dir.write_csv("trace.csv", &["n", "delta"], &trace_rows)?;
    let sigma_ok = trace.sigma.map_or(true, |s| s > 0.0 && s < 1.0);

    let sigma2 = match markov_sigma2(model, &g, &phi_grid) {
        Ok(v) => v,
        Err(e) => return fail(dir, format!("variance solve: {e}")),
    };
    let mean = phi_grid
        .values()
        .iter()
        .zip(g.values())
        .map(|(p, gv)| p * gv)
        .sum::<f64>()
        / g.resolution() as f64;
    let centered = DensityGrid::from_values(phi_grid.values().iter().map(|v| v - mean).collect());
    let report = match expanding_clt(model, &g, &centered, sigma2, clt_n, clt_trials, seed) {
        Ok(r) => r,
        Err(e) => return fail(dir, format!("backward chain: {e}")),
    };
    let ks_ok = report.ks_statistic < ks_tol;

    let residual_ok = residual < density_tol;
    let weights_ok = weight_err < weight_tol;
    let unital_ok = unital_gap < unital_tol;
    let checks = vec![
        ("density_residual", residual, density_tol, residual_ok),
        ("kernel_weight_sum_err", weight_err, weight_tol, weights_ok),
        ("markov_unital_gap", unital_gap, unital_tol, unital_ok),
        ("clt_ks", report.ks_statistic, ks_tol, ks_ok),
    ];
    let check_rows: Vec<Vec<String>> = checks
        .iter()
        .map(|&(name, value, tol, ok)| {
            vec![name.to_string(), fmt_f64(value), fmt_f64(tol), verdict_str(ok).to_string()]
        })
        .collect();
    dir.write_csv("checks.csv", &["check", "value", "tolerance", "verdict"], &check_rows)?;

    let pass = residual_ok && weights_ok && unital_ok && sigma_ok && ks_ok;
    dir.write_summary(&json!({
        "verdict": verdict_str(pass),
        "slopes": { "fitted_mixing_ratio": trace.sigma.map_or(Value::Null, |s| json!(s)) },
        "constants": {
            "map": model.name(),
            "grid": model.grid(),
            "sigma2": sigma2,
            "clt_sample_variance": report.sample_variance,
        },
        "tolerances": {
            "density_tol": density_tol,
            "weight_tol": weight_tol,
            "unital_tol": unital_tol,
            "ks_tol": ks_tol,
        },
    }))?;
    Ok(Outcome { pass, verdict: verdict_str(pass).into() })
}
