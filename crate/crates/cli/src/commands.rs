use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use std::fs;
use std::path::Path;

use thinring::effective::{critical_field, default_field_step, effective_model, separation_check, CriticalFieldReport};
use thinring::fiber1d::{solve_fiber, verify_expansion, FiberProblem};
use thinring::gaugefield::build_field;
use thinring::geometry::{build_geometry, build_strip_with_scheme, GeometryData, StripChart};
use thinring::glsolver::{
    concentration_check, minimize, order_parameter_diagnostics, supercurrent_circulation, GLConfig, GLInit,
};
use thinring::spectral2d::{
    assemble_and_solve_with, encode_field, fiber_consistency, EigenOptions, FormKind, StripOperatorSpec,
};

use crate::config::{Command, RunConfig};
use crate::CliError;

/// Full round-trip formatting for CSV cells.
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<String, CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    fs::write(dir.join(name), format!("{text}\n")).map_err(|e| CliError::Io(format!("{name}: {e}")))?;
    Ok(text)
}

fn write_csv(dir: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let io = |e: csv::Error| CliError::Io(format!("{name}: {e}"));
    let mut w = csv::Writer::from_path(dir.join(name)).map_err(io)?;
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    w.flush().map_err(|e| CliError::Io(format!("{name}: {e}")))
}

fn geometry(cfg: &RunConfig) -> Result<GeometryData, CliError> {
    Ok(build_geometry(&cfg.domain, cfg.numerics.n_boundary)?)
}

fn chart(cfg: &RunConfig, g: &GeometryData, eps: f64, b: f64) -> Result<StripChart, CliError> {
    let policy = cfg.numerics.policy();
    Ok(match cfg.numerics.n_s {
        Some(n_s) => build_strip_with_scheme(g, eps, n_s, policy.n_t, policy.scheme)?,
        None => policy.chart(g, eps, b)?,
    })
}

fn lowest_exact(cfg: &RunConfig, chart: StripChart, b: f64) -> Result<f64, CliError> {
    let opts = EigenOptions { n_eigs: 1, seed: cfg.numerics.seed, ..Default::default() };
    let spec = StripOperatorSpec { chart, b, form: FormKind::Exact, n_eigs: 1 };
    Ok(assemble_and_solve_with(&spec, &opts)?.eigenvalues[0])
}

pub fn run_geometry(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let g = geometry(cfg)?;
    let field = build_field(&g, cfg.construction())?;
    let report = json!({
        "L": g.half_perimeter_l,
        "perimeter": g.perimeter(),
        "area": g.area,
        "gamma0": g.gamma0,
        "curvature_sup": g.curvature_sup,
        "n_nodes": g.arclength_nodes.len(),
        "field": {
            "construction": field.construction,
            "poisson_residual": field.poisson_residual,
            "phi0_max": field.phi0.iter().fold(0.0f64, |m, v| m.max(v.abs())),
        },
    });
    write_json(out, "geometry.json", &report)
}

pub fn run_eigen(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let phys = cfg.physics(Command::Eigen)?;
    let epsilons = &cfg.eigen.as_ref().expect("validated").epsilons;
    let g = geometry(cfg)?;
    let rows: Vec<Vec<f64>> = epsilons
        .par_iter()
        .map(|&eps| -> Result<Vec<f64>, CliError> {
            let p = phys.params(eps);
            let b = p.field();
            let exact = lowest_exact(cfg, chart(cfg, &g, eps, b)?, b)?;
            let spec = StripOperatorSpec { chart: chart(cfg, &g, eps, b)?, b, form: FormKind::Reduced, n_eigs: 1 };
            let fiber = fiber_consistency(&spec, phys.fiber_len(), cfg.numerics.n_grid_fiber)?;
            let model = effective_model(&g, &p)?;
            Ok(vec![eps, b, exact, fiber.lambda_2d, fiber.lambda_fiber, model.e0, model.n0 as f64])
        })
        .collect::<Result<_, _>>()?;
    let header = ["epsilon", "b", "lambda_exact", "lambda_reduced", "lambda_fiber", "lambda_effective", "n0"];
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let mut c: Vec<String> = r[..6].iter().map(|v| num(*v)).collect();
            c.push(format!("{}", r[6] as i64));
            c
        })
        .collect();
    write_csv(out, "eigen.csv", &header, &cells)?;
    Ok(format!("{} rows written to eigen.csv", cells.len()))
}

pub fn run_fiber(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let f = cfg.fiber.expect("validated");
    let problem = FiberProblem::new(f.alpha, f.delta, f.a, f.zeta, cfg.numerics.n_grid_fiber);
    let spectrum = solve_fiber(&problem, f.modes)?;
    let expansion = if f.delta > 0.0 { Some(verify_expansion(&problem)?) } else { None };
    write_json(out, "fiber.json", &json!({ "problem": f_json(&problem), "spectrum": spectrum, "expansion": expansion }))
}

fn f_json(p: &FiberProblem) -> serde_json::Value {
    json!({ "alpha": p.alpha, "delta": p.delta, "a": p.a_len, "zeta": p.zeta, "n_grid": p.n_grid })
}

pub fn run_scan(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let phys = cfg.physics(Command::Scan)?;
    let scan = cfg.scan.expect("validated");
    let eps = scan.epsilon;
    let g = geometry(cfg)?;
    let k2 = phys.kappa * phys.kappa;
    let mut rows: Vec<(f64, f64, f64)> = scan
        .fields()
        .par_iter()
        .map(|&h| -> Result<(f64, f64, f64), CliError> {
            let mut p = phys.params(eps);
            p.c_field = h - p.a_field / eps;
            let lam_eff = effective_model(&g, &p)?.e0;
            let lam = lowest_exact(cfg, chart(cfg, &g, eps, h)?, h)?;
            Ok((h, lam_eff, lam))
        })
        .collect::<Result<_, _>>()?;
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|(h, e, l)| vec![num(*h), num(*e), num(*l), (*l < k2).to_string()])
        .collect();
    write_csv(out, "scan.csv", &["H", "lambda_eff", "lambda_oracle", "superconducting"], &cells)?;
    Ok(format!("{} rows written to scan.csv", cells.len()))
}

pub fn run_critical_field(cfg: &RunConfig, out: &Path) -> Result<String, CliError> {
    let phys = cfg.physics(Command::CriticalField)?;
    let block = cfg.critical_field.expect("validated");
    let g = geometry(cfg)?;
    let step = block.step.unwrap_or_else(|| default_field_step(&g));
    let eps = block.epsilon;
    let mut failure = None;
    let report: CriticalFieldReport = critical_field(phys.kappa, block.h_min, block.h_max, step, |h| {
        let lam = chart(cfg, &g, eps, h).and_then(|c| lowest_exact(cfg, c, h));
        lam.map_err(|e| {
            let msg = e.to_string();
            failure = Some(e);
            thinring::Error::InvalidParameter(msg)
        })
    })
    .map_err(|e| failure.take().unwrap_or(CliError::from(e)))?;
    write_json(out, "critical_field.json", &json!({ "epsilon": eps, "kappa": phys.kappa, "step": step, "report": report }))
}

/// Runs the minimizer; returns the summary and whether it converged.
pub fn run_gl(cfg: &RunConfig, out: &Path) -> Result<(String, bool), CliError> {
    let phys = cfg.physics(Command::Gl)?;
    let eps = cfg.epsilon(Command::Gl)?;
    let params = phys.params(eps);
    let g = geometry(cfg)?;
    let field = build_field(&g, cfg.construction())?;
    let strip = chart(cfg, &g, eps, params.field())?;
    let mut gl = GLConfig::new(strip, g.clone(), field, params);
    gl.init = match cfg.gl.and_then(|b| b.init) {
        Some(GLInit::Random { .. }) => GLInit::Random { seed: cfg.numerics.seed },
        Some(init) => init,
        None => GLInit::FromLinearGroundState,
    };
    gl.energy_tol = cfg.numerics.energy_tol;
    gl.max_iters = cfg.numerics.max_iters;

    let result = minimize(&gl)?;
    let model = effective_model(&g, &params)?;
    let lam = model.lambda_kappa();
    let measure = result.strip_measure;
    let predicted_energy = -0.5 * lam * lam * params.kappa * params.kappa * measure;
    let perimeter = 2.0 * g.half_perimeter_l;
    let circulation_predicted = result.lambda_measured * 4.0 * std::f64::consts::PI * model.n0 as f64 / perimeter;
    let flags = separation_check(&model, 0.1).ok();
    let diagnostics = if result.converged && lam > 0.0 { order_parameter_diagnostics(&result, &gl).ok() } else { None };
    let circulation = if result.converged { supercurrent_circulation(&result, &gl).ok() } else { None };

    let summary = json!({
        "epsilon": eps,
        "field_strength": gl.field_strength(),
        "kappa": params.kappa,
        "n_s": gl.chart.n_s,
        "n_t": gl.chart.n_t,
        "init": gl.init,
        "result": result,
        "predicted_energy": predicted_energy,
        "concentration": concentration_check(&result, &gl)?,
        "separation": flags.map(|f| json!({ "sc": f.sc, "sc_prime": f.sc_prime })),
        "diagnostics": diagnostics,
        "circulation_predicted": circulation_predicted,
    });
    let text = write_json(out, "gl.json", &summary)?;
    fs::write(out.join("psi.bin"), encode_field(&gl.chart, &result.psi)).map_err(|e| CliError::Io(format!("psi.bin: {e}")))?;
    let opt = |v: Option<f64>| v.map(num).unwrap_or_default();
    let row = vec![
        num(eps),
        num(gl.field_strength()),
        num(params.kappa),
        num(result.energy),
        num(predicted_energy),
        result.winding.map(|w| w.to_string()).unwrap_or_default(),
        model.n0.to_string(),
        opt(circulation),
        num(circulation_predicted),
    ];
    let header = [
        "epsilon",
        "H",
        "kappa",
        "energy",
        "predicted_energy",
        "winding",
        "n0_predicted",
        "circulation",
        "circulation_predicted",
    ];
    write_csv(out, "gl.csv", &header, &[row])?;
    Ok((text, result.converged))
}
