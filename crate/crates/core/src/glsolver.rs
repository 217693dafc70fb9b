//! Ginzburg-Landau minimization on the strip with the frozen gauge A = F.
//!
//! In strip coordinates the discrete energy is
//! `E(ψ) = ψᴴKψ − κ² ψᴴMψ + (κ²/2) Σ M|ψ|⁴`
//! with `K` and `M` the exact-form stiffness and mass at `b = H`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::effective::{effective_model, EffectiveModel, PhysParams};
use crate::error::{Error, Result};
use crate::gaugefield::FieldData;
use crate::geometry::{GeometryData, StripChart};
use crate::spectral2d::{assemble_and_solve, winding_trial, CyclicFactor, FormKind, StripOperator, StripOperatorSpec};

type C = Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GLInit {
    /// Linear ground state of the exact form scaled to mean |ψ|² = Λ (or 1 when Λ = 0).
    FromLinearGroundState,
    /// e^{inπs/L} with amplitude √Λ (or 1 when Λ = 0).
    ConstantWithWinding { n: i64 },
    /// Independent uniform modulus in [0, 1] and uniform phase per node.
    Random { seed: u64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRule {
    /// Sufficient-decrease constant of the Armijo test.
    pub armijo: f64,
    /// Step reduction factor on a failed test.
    pub shrink: f64,
    pub max_backtracks: usize,
}

impl Default for StepRule {
    fn default() -> Self {
        StepRule { armijo: 1e-4, shrink: 0.5, max_backtracks: 40 }
    }
}

#[derive(Clone, Debug)]
pub struct GLConfig {
    pub chart: StripChart,
    pub geom: GeometryData,
    pub field: FieldData,
    pub params: PhysParams,
    pub init: GLInit,
    pub max_iters: usize,
    pub energy_tol: f64,
    pub step_rule: StepRule,
}

impl GLConfig {
    pub fn new(chart: StripChart, geom: GeometryData, field: FieldData, params: PhysParams) -> Self {
        GLConfig {
            chart,
            geom,
            field,
            params,
            init: GLInit::FromLinearGroundState,
            max_iters: 5000,
            energy_tol: 1e-12,
            step_rule: StepRule::default(),
        }
    }

    /// Applied field H = a/ε + c evaluated at the chart thickness.
    pub fn field_strength(&self) -> f64 {
        self.params.a_field / self.chart.epsilon + self.params.c_field
    }

    fn model(&self) -> Result<EffectiveModel> {
        effective_model(&self.geom, &PhysParams { epsilon: self.chart.epsilon, ..self.params })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GLResult {
    #[serde(skip)]
    pub psi: Vec<C>,
    pub energy: f64,
    pub energy_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub modulus_l2_deviation: f64,
    pub max_modulus: f64,
    pub winding: Option<i64>,
    pub supercurrent_circulation: Option<f64>,
    pub lambda_kappa_eps: f64,
    pub lambda_measured: f64,
    pub overlap_with_u0: f64,
    pub n0_predicted: i64,
    pub strip_measure: f64,
}

/// Assembled operators shared by the energy, gradient and minimizer.
pub struct GLProblem {
    pub op: StripOperator,
    pub kappa: f64,
    pub h_field: f64,
}

impl GLProblem {
    pub fn new(cfg: &GLConfig) -> Self {
        let h_field = cfg.field_strength();
        GLProblem {
            op: StripOperator::assemble(&cfg.chart, h_field, FormKind::Exact),
            kappa: cfg.params.kappa,
            h_field,
        }
    }

    fn k2(&self) -> f64 {
        self.kappa * self.kappa
    }

    fn energy_with(&self, psi: &[C], kpsi: &[C]) -> f64 {
        let k2 = self.k2();
        let mut e = 0.0;
        for ((p, kp), m) in psi.iter().zip(kpsi).zip(&self.op.mass) {
            let r2 = p.norm_sqr();
            e += (p.conj() * kp).re - k2 * m * r2 + 0.5 * k2 * m * r2 * r2;
        }
        e
    }

    pub fn energy(&self, psi: &[C]) -> f64 {
        let mut kpsi = vec![C::new(0.0, 0.0); psi.len()];
        self.op.apply(psi, &mut kpsi);
        self.energy_with(psi, &kpsi)
    }

    fn gradient_with(&self, psi: &[C], kpsi: &[C]) -> Vec<C> {
        let k2 = self.k2();
        psi.iter()
            .zip(kpsi)
            .zip(&self.op.mass)
            .map(|((p, kp), m)| kp + p * (k2 * m * (p.norm_sqr() - 1.0)))
            .collect()
    }

    /// g with `dE(ψ)[d] = 2 Re Σ conj(gₖ) dₖ`.
    pub fn gradient(&self, psi: &[C]) -> Vec<C> {
        let mut kpsi = vec![C::new(0.0, 0.0); psi.len()];
        self.op.apply(psi, &mut kpsi);
        self.gradient_with(psi, &kpsi)
    }
}

pub fn gl_energy(psi: &[C], cfg: &GLConfig) -> Result<f64> {
    if psi.len() != cfg.chart.len() {
        return Err(Error::GridMismatch { expected: cfg.chart.len(), got: psi.len() });
    }
    Ok(GLProblem::new(cfg).energy(psi))
}

fn re_dot(a: &[C], b: &[C]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x.conj() * y).re).sum()
}

/// Polynomial coefficients of α ↦ E(ψ + αd) − E(ψ), index = power.
fn line_polynomial(pb: &GLProblem, psi: &[C], kpsi: &[C], d: &[C], kd: &[C]) -> [f64; 5] {
    let k2 = pb.k2();
    let mut c = [0.0; 5];
    for idx in 0..psi.len() {
        let (p, q, m) = (psi[idx], d[idx], pb.op.mass[idx]);
        let p0 = p.norm_sqr();
        let p1 = 2.0 * (p.conj() * q).re;
        let p2 = q.norm_sqr();
        // quadratic part with K − κ²M
        c[1] += 2.0 * (q.conj() * kpsi[idx]).re - 2.0 * k2 * m * (p.conj() * q).re;
        c[2] += (q.conj() * kd[idx]).re - k2 * m * p2;
        let w = 0.5 * k2 * m;
        c[1] += w * 2.0 * p0 * p1;
        c[2] += w * (p1 * p1 + 2.0 * p0 * p2);
        c[3] += w * 2.0 * p1 * p2;
        c[4] += w * p2 * p2;
    }
    c
}

fn poly_eval(c: &[f64; 5], x: f64) -> f64 {
    (((c[4] * x + c[3]) * x + c[2]) * x + c[1]) * x + c[0]
}

fn poly_deriv(c: &[f64; 5], x: f64) -> f64 {
    ((4.0 * c[4] * x + 3.0 * c[3]) * x + 2.0 * c[2]) * x + c[1]
}

/// First positive stationary point of the quartic along a descent direction.
fn quartic_step(c: &[f64; 5]) -> f64 {
    if c[1] >= 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    let mut guard = 0;
    while poly_deriv(c, hi) < 0.0 && guard < 200 {
        hi *= 2.0;
        guard += 1;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if poly_deriv(c, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn initial_state(cfg: &GLConfig, model: &EffectiveModel) -> Result<Vec<C>> {
    let chart = &cfg.chart;
    let lam = model.lambda_kappa();
    let amp2 = if lam > 0.0 { lam } else { 1.0 };
    Ok(match cfg.init {
        GLInit::FromLinearGroundState => {
            let res = assemble_and_solve(&StripOperatorSpec {
                chart: chart.clone(),
                b: cfg.field_strength(),
                form: FormKind::Exact,
                n_eigs: 1,
            })?;
            let scale = (amp2 * chart.strip_measure()).sqrt();
            res.ground_state.iter().map(|v| v * scale).collect()
        }
        GLInit::ConstantWithWinding { n } => {
            winding_trial(chart, n).into_iter().map(|v| v * amp2.sqrt()).collect()
        }
        GLInit::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..chart.len())
                .map(|_| {
                    let r: f64 = rng.random();
                    let th: f64 = rng.random::<f64>() * 2.0 * PI;
                    C::from_polar(r, th)
                })
                .collect()
        }
    })
}

/// Preconditioned nonlinear conjugate gradients with an exact quartic line search
/// and Armijo-checked backtracking. The preconditioner is `K + κ²M`.
pub fn minimize(cfg: &GLConfig) -> Result<GLResult> {
    cfg.params.validate()?;
    if !(cfg.energy_tol > 0.0) || cfg.max_iters == 0 {
        return Err(Error::InvalidParameter("energy_tol must be > 0 and max_iters >= 1".into()));
    }
    let model = cfg.model()?;
    let pb = GLProblem::new(cfg);
    let n = cfg.chart.len();
    let precond = CyclicFactor::new(&pb.op, pb.k2())?;
    let scale = pb.k2() * cfg.chart.strip_measure();
    let rule = cfg.step_rule;

    let mut psi = initial_state(cfg, &model)?;
    let mut kpsi = vec![C::new(0.0, 0.0); n];
    pb.op.apply(&psi, &mut kpsi);
    let mut energy = pb.energy_with(&psi, &kpsi);
    let mut history = vec![energy];
    let g = pb.gradient_with(&psi, &kpsi);
    let mut z = precond.solve(&g);
    let mut gz = re_dot(&g, &z);
    let mut d: Vec<C> = z.iter().map(|v| -v).collect();
    let mut kd = vec![C::new(0.0, 0.0); n];
    let mut converged = false;
    let mut iterations = 0;
    let mut steepest = true;

    for it in 1..=cfg.max_iters {
        iterations = it;
        if gz <= 0.1 * cfg.energy_tol * scale {
            converged = true;
            break;
        }
        pb.op.apply(&d, &mut kd);
        let poly = line_polynomial(&pb, &psi, &kpsi, &d, &kd);
        let mut alpha = quartic_step(&poly);
        let slope = poly[1];
        let mut accepted = false;
        for _ in 0..=rule.max_backtracks {
            if alpha > 0.0 && poly_eval(&poly, alpha) <= rule.armijo * alpha * slope {
                accepted = true;
                break;
            }
            alpha *= rule.shrink;
        }
        if !accepted {
            if steepest {
                // round-off floor: no decrease possible along the preconditioned gradient
                converged = gz <= 1e3 * cfg.energy_tol * scale;
                break;
            }
            d.iter_mut().zip(&z).for_each(|(di, zi)| *di = -zi);
            steepest = true;
            continue;
        }
        for i in 0..n {
            psi[i] += alpha * d[i];
            kpsi[i] += alpha * kd[i];
        }
        if it % 50 == 0 {
            pb.op.apply(&psi, &mut kpsi);
        }
        let mut new_energy = pb.energy_with(&psi, &kpsi);
        let max_mod = psi.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let mut clipped_state = false;
        if max_mod > 1.0 + 1e-6 {
            let clipped: Vec<C> = psi.iter().map(|v| if v.norm() > 1.0 { v / v.norm() } else { *v }).collect();
            let e_clip = pb.energy(&clipped);
            if e_clip <= new_energy {
                psi = clipped;
                pb.op.apply(&psi, &mut kpsi);
                new_energy = e_clip;
                clipped_state = true;
            }
        }
        let decrement = energy - new_energy;
        energy = new_energy;
        history.push(energy);

        let g_new = pb.gradient_with(&psi, &kpsi);
        let z_new = precond.solve(&g_new);
        let gz_new = re_dot(&g_new, &z_new);
        if decrement.abs() <= cfg.energy_tol * scale && gz_new <= cfg.energy_tol * scale {
            converged = true;
            break;
        }
        let beta = if clipped_state {
            0.0
        } else {
            let num: f64 = g_new.iter().zip(&z_new).zip(&z).map(|((g, zn), zo)| (g.conj() * (zn - zo)).re).sum();
            (num / gz).max(0.0)
        };
        for i in 0..n {
            d[i] = -z_new[i] + beta * d[i];
        }
        steepest = beta == 0.0;
        if re_dot(&g_new, &d) >= 0.0 {
            d.iter_mut().zip(&z_new).for_each(|(di, zi)| *di = -zi);
            steepest = true;
        }
        z = z_new;
        gz = gz_new;
    }
    pb.op.apply(&psi, &mut kpsi);
    energy = pb.energy_with(&psi, &kpsi);
    if let Some(last) = history.last_mut() {
        if energy < *last {
            *last = energy;
        }
    }
    finish(cfg, &model, &pb, psi, energy, history, iterations, converged)
}

#[allow(clippy::too_many_arguments)]
fn finish(
    cfg: &GLConfig,
    model: &EffectiveModel,
    pb: &GLProblem,
    psi: Vec<C>,
    energy: f64,
    history: Vec<f64>,
    iterations: usize,
    converged: bool,
) -> Result<GLResult> {
    let chart = &cfg.chart;
    let measure = chart.strip_measure();
    let mass = &pb.op.mass;
    let norm2: f64 = psi.iter().zip(mass).map(|(v, m)| m * v.norm_sqr()).sum();
    let lambda_measured = norm2 / measure;
    let u0 = winding_trial(chart, model.n0);
    let lam = model.lambda_kappa();
    let inner: C = u0.iter().zip(&psi).zip(mass).map(|((u, p), m)| u.conj() * p * *m).sum();
    let overlap = if norm2 > 0.0 { inner.norm() / (norm2.sqrt() * measure.sqrt()) } else { 0.0 };
    let mut result = GLResult {
        max_modulus: psi.iter().map(|v| v.norm()).fold(0.0, f64::max),
        winding: extract_winding(chart, &psi).ok(),
        modulus_l2_deviation: 0.0,
        psi,
        energy,
        energy_history: history,
        iterations,
        converged,
        supercurrent_circulation: None,
        lambda_kappa_eps: lam,
        lambda_measured,
        overlap_with_u0: overlap,
        n0_predicted: model.n0,
        strip_measure: measure,
    };
    result.modulus_l2_deviation = concentration_check(&result, cfg)?.sqrt();
    if result.converged && result.winding.is_some() {
        result.supercurrent_circulation = Some(supercurrent_circulation(&result, cfg)?);
    }
    Ok(result)
}

/// Winding of ψ(s, 0) around the periodic s-loop from principal phase increments.
pub fn extract_winding(chart: &StripChart, psi: &[C]) -> Result<i64> {
    if psi.len() != chart.len() {
        return Err(Error::GridMismatch { expected: chart.len(), got: psi.len() });
    }
    let n_t = chart.n_t;
    let line: Vec<C> = (0..chart.n_s).map(|i| psi[i * n_t]).collect();
    let max = line.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let min = line.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if !(max > 0.0) || min <= 0.1 * max {
        return Err(Error::PhaseUndefined { min, max });
    }
    let total: f64 = (0..line.len()).map(|i| (line[i].conj() * line[(i + 1) % line.len()]).arg()).sum();
    Ok((total / (2.0 * PI)).round() as i64)
}

/// (1/|∂Ω|)[−H Λ_measured |Ω| + ∫ (iψ̃, ∂ₛψ̃)|_{t=0} ds], with ψ̃ = e^{−iHφ₀}ψ.
pub fn supercurrent_circulation(result: &GLResult, cfg: &GLConfig) -> Result<f64> {
    if !result.converged {
        return Err(Error::NotConverged);
    }
    let chart = &cfg.chart;
    let n_t = chart.n_t;
    let n_s = chart.n_s;
    let h = cfg.field_strength();
    let dphi = cfg.field.dphi0_at(&chart.s_nodes);
    let psi = &result.psi;
    let mut current = 0.0;
    for i in 0..n_s {
        let a = psi[i * n_t];
        let b = psi[((i + 1) % n_s) * n_t];
        current += a.norm() * b.norm() * (a.conj() * b).arg();
        current -= h * dphi[i] * a.norm_sqr() * chart.h_s;
    }
    let perimeter = 2.0 * chart.half_perimeter_l;
    Ok((-h * result.lambda_measured * chart.area + current) / perimeter)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OrderParameterDiagnostics {
    pub l2_error_to_ansatz: f64,
    pub boundary_l2_error: f64,
    pub alpha_phase: C,
}

/// Distance of ψ to α√Λu₀ in the strip L² norm and on the t = 0 trace.
pub fn order_parameter_diagnostics(result: &GLResult, cfg: &GLConfig) -> Result<OrderParameterDiagnostics> {
    let model = cfg.model()?;
    let chart = &cfg.chart;
    let mass: Vec<f64> = (0..chart.len())
        .map(|k| chart.h_s * chart.t_weights[k % chart.n_t] * chart.metric_factor[k])
        .collect();
    let u0 = winding_trial(chart, model.n0);
    let inner: C = u0.iter().zip(&result.psi).zip(&mass).map(|((u, p), m)| u.conj() * p * *m).sum();
    if inner.norm() == 0.0 {
        return Err(Error::DegenerateOverlap);
    }
    let alpha = inner / inner.norm();
    let amp = model.lambda_kappa().sqrt();
    let interior: f64 = result
        .psi
        .iter()
        .zip(&u0)
        .zip(&mass)
        .map(|((p, u), m)| m * (p - alpha * amp * u).norm_sqr())
        .sum();
    let boundary: f64 = (0..chart.n_s)
        .map(|i| {
            let k = i * chart.n_t;
            chart.h_s * (result.psi[k] - alpha * amp * u0[k]).norm_sqr()
        })
        .sum();
    Ok(OrderParameterDiagnostics {
        l2_error_to_ansatz: interior.sqrt(),
        boundary_l2_error: boundary.sqrt(),
        alpha_phase: alpha,
    })
}

/// ∫∫ (κ|ψ|² − (κ² − 𝔢₀)₊/κ)² a dt ds.
pub fn concentration_check(result: &GLResult, cfg: &GLConfig) -> Result<f64> {
    let model = cfg.model()?;
    let chart = &cfg.chart;
    let kappa = cfg.params.kappa;
    let target = (kappa * kappa - model.e0).max(0.0) / kappa;
    Ok((0..chart.len())
        .map(|k| {
            let m = chart.h_s * chart.t_weights[k % chart.n_t] * chart.metric_factor[k];
            m * (kappa * result.psi[k].norm_sqr() - target).powi(2)
        })
        .sum())
}

/// Result wrapper for an explicit field, used to evaluate diagnostics on trial states.
pub fn result_from_field(cfg: &GLConfig, psi: Vec<C>) -> Result<GLResult> {
    let model = cfg.model()?;
    let pb = GLProblem::new(cfg);
    let energy = pb.energy(&psi);
    finish(cfg, &model, &pb, psi, energy, vec![energy], 0, true)
}
