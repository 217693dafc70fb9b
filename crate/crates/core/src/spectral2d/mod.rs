//! Discretized strip forms and their lowest eigenpairs.

mod blocksolve;
mod eigen;
mod operator;

pub use blocksolve::CyclicFactor;
pub use eigen::{decoupled_estimates, lowest_eigenpairs, EigenOptions, EigenPairs, DEFAULT_SEED};
pub use operator::{FormKind, StripOperator};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::effective::{effective_model, lambda_small_field, PhysParams};
use crate::error::{Error, Result};
use crate::fiber1d::{solve_fiber, FiberProblem};
use crate::geometry::{build_strip_with_scheme, GeometryData, StripChart, TScheme};

#[derive(Clone, Debug)]
pub struct StripOperatorSpec {
    pub chart: StripChart,
    pub b: f64,
    pub form: FormKind,
    pub n_eigs: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralResult {
    pub eigenvalues: Vec<f64>,
    /// M-normalized ground state, row-major `i * n_t + j`.
    #[serde(skip)]
    pub ground_state: Vec<Complex64>,
    /// λ₂ − λ₁ when at least two eigenvalues were requested.
    pub gap: Option<f64>,
    /// L² mass of the ground state per s-Fourier bin (bin k ↔ mode n ≡ k mod n_s).
    pub fourier_weights: Vec<f64>,
    pub residuals: Vec<f64>,
    pub shift: f64,
    pub iterations: usize,
    /// Mass weights of the discrete inner product.
    #[serde(skip)]
    pub mass: Vec<f64>,
    pub n_s: usize,
    pub n_t: usize,
}

impl SpectralResult {
    /// Fourier mass carried by the mode e^{inπs/L}.
    pub fn weight_of_mode(&self, n: i64) -> f64 {
        self.fourier_weights[n.rem_euclid(self.n_s as i64) as usize]
    }

    /// Mode index with the largest Fourier mass, in (−n_s/2, n_s/2].
    pub fn dominant_mode(&self) -> i64 {
        let (k, _) = self
            .fourier_weights
            .iter()
            .enumerate()
            .fold((0, -1.0), |acc, (k, w)| if *w > acc.1 { (k, *w) } else { acc });
        let n = self.n_s as i64;
        let k = k as i64;
        if k > n / 2 {
            k - n
        } else {
            k
        }
    }
}

/// Per-mode mass of a grid field, weighted by the t-quadrature, normalized to sum 1.
pub fn fourier_weights(chart: &StripChart, v: &[Complex64]) -> Vec<f64> {
    let (n_s, n_t) = (chart.n_s, chart.n_t);
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n_s);
    let mut w = vec![0.0; n_s];
    let mut row = vec![Complex64::new(0.0, 0.0); n_s];
    for j in 0..n_t {
        for i in 0..n_s {
            row[i] = v[i * n_t + j];
        }
        fft.process(&mut row);
        for (k, c) in row.iter().enumerate() {
            w[k] += chart.t_weights[j] * c.norm_sqr();
        }
    }
    let total: f64 = w.iter().sum();
    if total > 0.0 {
        w.iter_mut().for_each(|x| *x /= total);
    }
    w
}

pub fn assemble_and_solve(spec: &StripOperatorSpec) -> Result<SpectralResult> {
    assemble_and_solve_with(spec, &EigenOptions { n_eigs: spec.n_eigs, ..Default::default() })
}

pub fn assemble_and_solve_with(spec: &StripOperatorSpec, opts: &EigenOptions) -> Result<SpectralResult> {
    if !(spec.b >= 0.0) {
        return Err(Error::InvalidParameter(format!("b = {} must be >= 0", spec.b)));
    }
    if spec.n_eigs == 0 || spec.n_eigs > 5 {
        return Err(Error::InvalidParameter(format!("n_eigs = {} must lie in 1..=5", spec.n_eigs)));
    }
    let op = StripOperator::assemble(&spec.chart, spec.b, spec.form);
    let opts = EigenOptions { n_eigs: spec.n_eigs, ..opts.clone() };
    let pairs = lowest_eigenpairs(&op, &opts)?;
    let mut g = pairs.vectors[0].clone();
    // fix the global phase: largest entry real and positive
    let (imax, _) = g
        .iter()
        .enumerate()
        .fold((0, -1.0), |acc, (i, v)| if v.norm() > acc.1 { (i, v.norm()) } else { acc });
    let ph = g[imax].conj() / g[imax].norm();
    g.iter_mut().for_each(|v| *v *= ph);
    let eigenvalues = pairs.values.clone();
    let gap = if eigenvalues.len() >= 2 { Some(eigenvalues[1] - eigenvalues[0]) } else { None };
    Ok(SpectralResult {
        fourier_weights: fourier_weights(&spec.chart, &g),
        eigenvalues,
        ground_state: g,
        gap,
        residuals: pairs.residuals,
        shift: pairs.shift,
        iterations: pairs.iterations,
        mass: op.mass,
        n_s: spec.chart.n_s,
        n_t: spec.chart.n_t,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub projection_norm: f64,
    pub residual_norm: f64,
}

/// Orthogonal projection (discrete weighted inner product) onto the ground state.
pub fn project_onto_ground(result: &SpectralResult, trial: &[Complex64]) -> Result<Projection> {
    let g = &result.ground_state;
    if trial.len() != g.len() {
        return Err(Error::GridMismatch { expected: g.len(), got: trial.len() });
    }
    let m = &result.mass;
    let c: Complex64 = g.iter().zip(trial).zip(m).map(|((a, b), w)| a.conj() * b * *w).sum();
    let res: f64 = trial
        .iter()
        .zip(g)
        .zip(m)
        .map(|((t, gv), w)| (t - c * gv).norm_sqr() * w)
        .sum();
    Ok(Projection { projection_norm: c.norm(), residual_norm: res.sqrt() })
}

/// The strip representation of u₀: e^{inπs/L}, constant in t.
pub fn winding_trial(chart: &StripChart, n: i64) -> Vec<Complex64> {
    let l = chart.half_perimeter_l;
    let mut v = Vec::with_capacity(chart.len());
    for &s in &chart.s_nodes {
        let z = Complex64::from_polar(1.0, n as f64 * PI * s / l);
        for _ in 0..chart.n_t {
            v.push(z);
        }
    }
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberConsistency {
    pub lambda_2d: f64,
    pub lambda_fiber: f64,
    pub minimizing_mode: i64,
    pub relative_discrepancy: f64,
}

/// Compare the reduced 2D eigenvalue with the minimum over Fourier modes of the
/// scaled fiber eigenvalue a²ε⁻²μ(α_n, ε²/a², a, bε/a − 1).
///
/// `fiber_len` is the scaling length `a`; any positive value gives the same
/// fiber family, the natural choice being the field coefficient of `b = a/ε + c`.
pub fn fiber_consistency(spec: &StripOperatorSpec, fiber_len: f64, n_grid: usize) -> Result<FiberConsistency> {
    if spec.form != FormKind::Reduced {
        return Err(Error::ExactFormRejected);
    }
    let res = assemble_and_solve(&StripOperatorSpec { n_eigs: 1, ..spec.clone() })?;
    let chart = &spec.chart;
    let (eps, l, g) = (chart.epsilon, chart.half_perimeter_l, chart.gamma0);
    let a = fiber_len;
    let zeta = spec.b * eps / a - 1.0;
    let delta = eps * eps / (a * a);
    // the fiber eigenvalue is smallest near α = −a(1+ζ)/2
    let n_star = ((-0.5 * a * (1.0 + zeta) - spec.b * g) * l / PI).round() as i64;
    let candidates: Vec<(i64, f64)> = (n_star - 4..=n_star + 4)
        .into_par_iter()
        .map(|n| {
            let alpha = n as f64 * PI / l + spec.b * g;
            solve_fiber(&FiberProblem::new(alpha, delta, a, zeta, n_grid), 1).map(|s| (n, s.mu1()))
        })
        .collect::<Result<Vec<_>>>()?;
    let (n_min, mu) = candidates
        .into_iter()
        .fold((0, f64::INFINITY), |acc, (n, mu)| if mu < acc.1 { (n, mu) } else { acc });
    let lambda_fiber = a * a / (eps * eps) * mu;
    let lambda_2d = res.eigenvalues[0];
    let relative_discrepancy = if lambda_fiber.abs() > 0.0 {
        (lambda_2d - lambda_fiber).abs() / lambda_fiber.abs()
    } else {
        (lambda_2d - lambda_fiber).abs()
    };
    Ok(FiberConsistency { lambda_2d, lambda_fiber, minimizing_mode: n_min, relative_discrepancy })
}

/// Grid resolution policy for oracle solves.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPolicy {
    pub min_n_s: usize,
    pub n_t: usize,
    pub scheme: TScheme,
    /// Target bound on |q|·h_s for the local covariant wavenumber q.
    pub covariant_step: f64,
}

impl Default for GridPolicy {
    fn default() -> Self {
        GridPolicy { min_n_s: 256, n_t: 16, scheme: TScheme::Lobatto, covariant_step: 0.25 }
    }
}

impl GridPolicy {
    /// n_s = max(min_n_s, 8|n₀|) in the critical regime (εb ≤ 10); for larger εb the
    /// s-grid resolves the covariant wavenumber range instead of the winding.
    pub fn n_s(&self, geom: &GeometryData, epsilon: f64, b: f64) -> usize {
        let l = geom.half_perimeter_l;
        let n0 = (b * geom.gamma0 * l / PI).abs().ceil() as usize + 1;
        let q_max = 0.5 * b * epsilon + PI / l + 1.0;
        let cov = (2.0 * l * q_max / self.covariant_step).ceil() as usize;
        let mut n = self.min_n_s.max(cov);
        if epsilon * b <= 10.0 {
            n = n.max(8 * n0);
        }
        n + n % 2
    }

    pub fn chart(&self, geom: &GeometryData, epsilon: f64, b: f64) -> Result<StripChart> {
        build_strip_with_scheme(geom, epsilon, self.n_s(geom, epsilon, b), self.n_t, self.scheme)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "lowercase")]
pub enum BRule {
    /// b held fixed.
    Fixed { b: f64 },
    /// b = a/ε + c.
    Critical { a: f64, c: f64 },
    /// b = g/ε².
    Growing { g: f64 },
}

impl BRule {
    pub fn field(&self, epsilon: f64) -> f64 {
        match *self {
            BRule::Fixed { b } => b,
            BRule::Critical { a, c } => a / epsilon + c,
            BRule::Growing { g } => g / (epsilon * epsilon),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub epsilon: f64,
    pub b: f64,
    pub lambda_oracle: f64,
    pub lambda_effective_prediction: Option<f64>,
    pub ratio: Option<f64>,
}

/// Exact-form eigenvalue along a sequence of thicknesses for a field rule.
pub fn regime_scan(geom: &GeometryData, epsilon_list: &[f64], rule: BRule, policy: &GridPolicy) -> Result<Vec<RegimeRow>> {
    epsilon_list
        .par_iter()
        .map(|&eps| {
            let b = rule.field(eps);
            let chart = policy.chart(geom, eps, b)?;
            let res = assemble_and_solve(&StripOperatorSpec { chart, b, form: FormKind::Exact, n_eigs: 1 })?;
            let lambda = res.eigenvalues[0];
            let pred = match rule {
                BRule::Fixed { b } => Some(lambda_small_field(geom, b)?),
                BRule::Critical { a, c } => {
                    Some(effective_model(geom, &PhysParams::new(1.0, a, c, eps))?.e0)
                }
                BRule::Growing { .. } => None,
            };
            Ok(RegimeRow {
                epsilon: eps,
                b,
                lambda_oracle: lambda,
                lambda_effective_prediction: pred,
                ratio: pred.map(|p| lambda / p),
            })
        })
        .collect()
}

/// Serialize a grid field: little-endian header `n_s: u64, n_t: u64, L: f64, ε: f64`
/// followed by `n_s·n_t` pairs `(re, im)` of f64 in row-major order (`i * n_t + j`).
pub fn encode_field(chart: &StripChart, v: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(32 + 16 * v.len());
    out.extend_from_slice(&(chart.n_s as u64).to_le_bytes());
    out.extend_from_slice(&(chart.n_t as u64).to_le_bytes());
    out.extend_from_slice(&chart.half_perimeter_l.to_le_bytes());
    out.extend_from_slice(&chart.epsilon.to_le_bytes());
    for z in v {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

/// Header fields and data of a dump written by [`encode_field`].
pub fn decode_field(bytes: &[u8]) -> Result<(usize, usize, f64, f64, Vec<Complex64>)> {
    let rd = |k: usize| -> [u8; 8] { bytes[8 * k..8 * k + 8].try_into().unwrap() };
    if bytes.len() < 32 {
        return Err(Error::GridMismatch { expected: 32, got: bytes.len() });
    }
    let n_s = u64::from_le_bytes(rd(0)) as usize;
    let n_t = u64::from_le_bytes(rd(1)) as usize;
    let l = f64::from_le_bytes(rd(2));
    let eps = f64::from_le_bytes(rd(3));
    let expected = 32 + 16 * n_s * n_t;
    if bytes.len() != expected {
        return Err(Error::GridMismatch { expected, got: bytes.len() });
    }
    let data = (0..n_s * n_t)
        .map(|k| Complex64::new(f64::from_le_bytes(rd(4 + 2 * k)), f64::from_le_bytes(rd(5 + 2 * k))))
        .collect();
    Ok((n_s, n_t, l, eps, data))
}
