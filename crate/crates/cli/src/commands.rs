//! One function per subcommand. Each returns the body to write and whether
//! its verification passed.

use serde_json::{json, Value};

use supratoa_core::classical_toa::{convergence_margin, local_toa, series_tail_bound, shift_arrival, toa_quadrature};
use supratoa_core::kernel_solver::{boundary_check, classical_term, kernel_eval, pde_residual, solve_kernel_general};
use supratoa_core::numerics::{commutator_residual, FloatKernel, HamiltonianRoute};
use supratoa_core::transforms::{classical_limit, hbar2_residual, weyl_quantize, wigner_transform};
use supratoa_core::{
    BumpProfile, GradedKernel, KernelRequest, MomentumSeries, PhasePoint, Potential, QuadSpec, Rational,
};

use crate::config::{Format, GridKind, Route, RunConfig};
use crate::error::{core, CliError};

pub struct Outcome {
    pub body: String,
    pub passed: bool,
    /// Human-readable summary for stderr.
    pub summary: String,
}

fn shifted(cfg: &RunConfig) -> Potential {
    if cfg.x.is_zero() {
        cfg.potential.clone()
    } else {
        shift_arrival(&cfg.potential, &cfg.x)
    }
}

fn solve(cfg: &RunConfig, jmax: u32) -> Result<GradedKernel, CliError> {
    let mut req = KernelRequest::new(shifted(cfg), cfg.mu.clone(), jmax);
    if let Some(m) = cfg.mmax {
        req = req.with_mmax(m);
    }
    solve_kernel_general(&req).map_err(core)
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap_or_default();
    s.push('\n');
    s
}

/// Classical-series polynomials relabeled from `q − x` back to `q`.
fn unshift(cfg: &RunConfig, t: &MomentumSeries) -> MomentumSeries {
    let back = -cfg.x.clone();
    t.map_polys(|p| p.shift(&back))
}

pub fn kernel(cfg: &RunConfig, format: Format) -> Result<Outcome, CliError> {
    let k = solve(cfg, cfg.jmax)?;
    let boundary = boundary_check(&k);
    let pde = pde_residual(&k, &shifted(cfg));
    let passed = boundary.passed() && pde.within_truncation;
    let diagnostics = json!({
        "boundary": {
            "passed": boundary.passed(),
            "failures": boundary.failures.iter().map(|(c, m)| format!("{c}: {m}")).collect::<Vec<_>>(),
        },
        "pde_residual": {
            "exact": pde.is_exact(),
            "within_truncation": pde.within_truncation,
            "lowest_total_degree": pde.lowest_total_degree,
            "lowest_equation_index": pde.lowest_equation_index(),
        },
        "arrival_point": cfg.x,
    });
    let body = match format {
        Format::Json => format!("{}\n", k.to_json()),
        Format::Csv => k.to_csv(),
    };
    Ok(Outcome {
        body,
        passed,
        summary: pretty(&diagnostics),
    })
}

pub fn classical_limit_cmd(cfg: &RunConfig, format: Format) -> Result<Outcome, CliError> {
    let t = wigner_transform(&solve(cfg, cfg.kmax)?);
    let classical = unshift(cfg, &classical_limit(&t));
    let residual = unshift(cfg, &hbar2_residual(&t));
    let local = local_toa(&cfg.potential, &cfg.mu, &cfg.x, cfg.kmax);
    let rows: Vec<(u32, String, String, bool)> = (0..=cfg.kmax)
        .map(|k| {
            let (w, l) = (classical.poly(k, 0), local.poly(k, 0));
            (k, w.to_string(), l.to_string(), w == l)
        })
        .collect();
    let passed = rows.iter().all(|r| r.3);
    let body = match format {
        Format::Json => pretty(&json!({
            "potential": cfg.potential.to_string(),
            "mu": cfg.mu,
            "x": cfg.x,
            "kmax": cfg.kmax,
            "terms": rows.iter().map(|(k, w, l, m)| json!({"k": k, "wigner": w, "local": l, "match": m})).collect::<Vec<_>>(),
            "all_match": passed,
            "hbar2_residual": residual.to_json_value(),
            "residual_empty": residual.is_empty(),
        })),
        Format::Csv => {
            let mut out = String::from("k,s,wigner,local,match\n");
            for (k, w, l, m) in &rows {
                out.push_str(&format!("{k},0,{},{},{m}\n", csv_field(w), csv_field(l)));
            }
            for ((k, s), p) in residual.terms() {
                out.push_str(&format!("{k},{s},{},,\n", csv_field(&p.to_string())));
            }
            out
        }
    };
    let summary = format!(
        "classical limit: {} of {} terms match; hbar^2 residual {}\n",
        rows.iter().filter(|r| r.3).count(),
        rows.len(),
        if residual.is_empty() {
            "empty".to_string()
        } else {
            format!("has {} terms", residual.len())
        }
    );
    Ok(Outcome { body, passed, summary })
}

pub fn commutator(cfg: &RunConfig, format: Format) -> Result<Outcome, CliError> {
    let k = solve(cfg, cfg.jmax)?;
    let xf = cfg.x.to_f64();
    let phi = BumpProfile::real(cfg.bump_center - xf, cfg.bump_halfwidth).map_err(core)?;
    let psi = BumpProfile::real(cfg.psi_center - xf, cfg.psi_halfwidth).map_err(core)?;
    let route = match cfg.commutator_route {
        Route::Adjoint => HamiltonianRoute::Adjoint,
        Route::FiniteDifference => HamiltonianRoute::FiniteDifference,
    };
    let rep = commutator_residual(
        &shifted(cfg),
        &FloatKernel::from(&k),
        &phi,
        &psi,
        cfg.mu.to_f64(),
        cfg.hbar,
        &QuadSpec::new(cfg.quad_abs_tol),
        route,
    )
    .map_err(core)?;
    let passed = rep.residual < cfg.commutator_threshold;
    let body = match format {
        Format::Json => {
            let mut v = rep.to_json_value();
            v["threshold"] = json!(cfg.commutator_threshold);
            v["passed"] = json!(passed);
            pretty(&v)
        }
        Format::Csv => format!(
            "residual,error_budget,threshold,passed\n{},{},{},{passed}\n",
            rep.residual, rep.error_budget, cfg.commutator_threshold
        ),
    };
    let summary = format!(
        "commutator residual r = {:e} (error budget {:e}, threshold {:e})\n",
        rep.residual, rep.error_budget, cfg.commutator_threshold
    );
    Ok(Outcome { body, passed, summary })
}

pub fn weyl_compare(cfg: &RunConfig, format: Format) -> Result<Outcome, CliError> {
    let v = shifted(cfg);
    let weyl = weyl_quantize(&local_toa(&v, &cfg.mu, &Rational::zero(), cfg.jmax), &cfg.mu).map_err(core)?;
    let ct = classical_term(&v, &cfg.mu, cfg.jmax).to_kernel();
    let equal = weyl.same_coefficients(&ct);
    let full = solve(cfg, cfg.jmax)?;
    let diff = full.coefficient_difference(&weyl);
    let obstruction = full.has_quantum_corrections();
    let diff_rows: Vec<Value> = diff
        .iter()
        .map(|(i, c)| json!({"m": i.m, "j": i.j, "s": i.s, "coeff": c}))
        .collect();
    let note = obstruction.then_some("obstruction: s>=1 terms present");
    let body = match format {
        Format::Json => pretty(&json!({
            "potential": cfg.potential.to_string(),
            "mu": cfg.mu,
            "jmax": cfg.jmax,
            "weyl_equals_classical_term": equal,
            "nonlinear": !v.is_linear(),
            "obstruction": note,
            "full_minus_weyl": diff_rows,
        })),
        Format::Csv => {
            let mut out = String::from("m,j,s,coeff\n");
            for (i, c) in &diff {
                out.push_str(&format!("{},{},{},{c}\n", i.m, i.j, i.s));
            }
            out
        }
    };
    let summary = format!(
        "weyl kernel {} the classical term; full - weyl has {} nonzero entries{}\n",
        if equal { "equals" } else { "differs from" },
        diff.len(),
        note.map(|n| format!("; {n}")).unwrap_or_default()
    );
    Ok(Outcome {
        body,
        passed: equal,
        summary,
    })
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

pub fn grid(cfg: &RunConfig, format: Format) -> Result<Outcome, CliError> {
    let pts = linspace(cfg.grid_lo, cfg.grid_hi, cfg.grid_n);
    let (header, rows): (Vec<&str>, Vec<Vec<f64>>) = match cfg.grid_kind {
        GridKind::Kernel => {
            let k = solve(cfg, cfg.jmax)?;
            let xf = cfg.x.to_f64();
            let mut rows = Vec::with_capacity(pts.len() * pts.len());
            for &q in &pts {
                for &qp in &pts {
                    let z = kernel_eval(&k, q - xf, qp - xf, cfg.hbar);
                    rows.push(vec![q, qp, z.re, z.im]);
                }
            }
            (vec!["q", "qp", "re", "im"], rows)
        }
        GridKind::Toa => {
            let series = local_toa(&cfg.potential, &cfg.mu, &cfg.x, cfg.kmax);
            let (mu, x, p) = (cfg.mu.to_f64(), cfg.x.to_f64(), cfg.toa_p);
            if p == 0.0 {
                return Err(CliError::Value {
                    key: "toa_p".into(),
                    msg: "must be nonzero".into(),
                });
            }
            let rows = pts
                .iter()
                .map(|&q| {
                    let exact = toa_quadrature(&cfg.potential, &PhasePoint { q, p, x, mu }, cfg.quad_abs_tol)
                        .unwrap_or(f64::NAN);
                    vec![q, p, series.eval(q, p, cfg.hbar), exact]
                })
                .collect();
            (vec!["q", "p", "t_series", "t_quadrature"], rows)
        }
    };
    let body = match format {
        Format::Csv => {
            let mut out = header.join(",");
            out.push('\n');
            for r in &rows {
                let cells: Vec<String> = r.iter().map(|v| v.to_string()).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            out
        }
        Format::Json => pretty(&json!({ "columns": header, "rows": rows })),
    };
    Ok(Outcome {
        body,
        passed: true,
        summary: format!("grid: {} rows\n", rows.len()),
    })
}

pub fn toa(cfg: &RunConfig, format: Format) -> Result<Outcome, CliError> {
    let (q, p, x, mu) = (cfg.toa_q, cfg.toa_p, cfg.x.to_f64(), cfg.mu.to_f64());
    let margin = convergence_margin(&cfg.potential, mu, q, x, p).map_err(core)?;
    let series = local_toa(&cfg.potential, &cfg.mu, &cfg.x, cfg.kmax).eval(q, p, cfg.hbar);
    let exact = toa_quadrature(&cfg.potential, &PhasePoint { q, p, x, mu }, cfg.quad_abs_tol).map_err(core)?;
    let bound = series_tail_bound(margin.ratio, cfg.kmax, mu, q, x, p);
    let diff = (series - exact).abs();
    let passed = !margin.converges || diff <= bound + cfg.series_tol;
    let report = json!({
        "q": q, "p": p, "x": cfg.x, "mu": cfg.mu, "kmax": cfg.kmax,
        "series": series,
        "quadrature": exact,
        "difference": diff,
        "tail_bound": if bound.is_finite() { json!(bound) } else { Value::Null },
        "m_q": margin.m_q,
        "ratio": margin.ratio,
        "converges": margin.converges,
        "passed": passed,
    });
    let body = match format {
        Format::Json => pretty(&report),
        Format::Csv => format!(
            "q,p,series,quadrature,difference,tail_bound,converges\n{q},{p},{series},{exact},{diff},{bound},{}\n",
            margin.converges
        ),
    };
    let summary = if margin.converges {
        format!("toa: |series - quadrature| = {diff:e}, tail bound {bound:e}\n")
    } else {
        format!(
            "toa: ratio {} is outside the convergence region; no bound checked\n",
            margin.ratio
        )
    };
    Ok(Outcome { body, passed, summary })
}
