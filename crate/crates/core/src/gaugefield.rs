//! Boundary trace of the reference potential F (curl F = 1, div F = 0, ν·F = 0)
//! and the gauge phase φ₀ linking the physical and strip gauges.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{DomainKind, GeometryData, StripChart};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "snake_case")]
pub enum Construction {
    AnalyticDisc,
    PoissonFd { grid_h: f64, solve_tol: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldData {
    pub arclength_nodes: Vec<f64>,
    /// F(M(s))·M′(s) at the arc-length nodes.
    pub tangential_trace: Vec<f64>,
    /// φ₀(s) = ∫₀ˢ (F̃₁ − γ₀) ds′.
    pub phi0: Vec<f64>,
    pub construction: Construction,
    pub half_perimeter_l: f64,
    pub gamma0: f64,
    /// Relative residual of the Poisson solve (0 for the analytic construction).
    pub poisson_residual: f64,
}

impl FieldData {
    /// φ₀ at arbitrary arc-length positions by trigonometric interpolation.
    pub fn phi0_at(&self, s: &[f64]) -> Vec<f64> {
        trig_interpolate(&self.phi0, self.arclength_nodes[0], self.half_perimeter_l, s)
    }

    /// ∂ₛφ₀ at arbitrary arc-length positions.
    pub fn dphi0_at(&self, s: &[f64]) -> Vec<f64> {
        trig_interpolate(&gauge_phase_derivative(self), self.arclength_nodes[0], self.half_perimeter_l, s)
    }
}

fn fft(values: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(buf.len()).process(&mut buf);
    buf
}

fn ifft_real(mut buf: Vec<Complex64>) -> Vec<f64> {
    let n = buf.len();
    FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

/// Signed wavenumber index of FFT bin k (Nyquist mapped to 0 weight by callers).
fn signed_index(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

fn trig_interpolate(values: &[f64], s0: f64, l: f64, s: &[f64]) -> Vec<f64> {
    let n = values.len();
    let c = fft(values);
    s.iter()
        .map(|&x| {
            let mut acc = 0.0;
            for (k, ck) in c.iter().enumerate() {
                if n.is_multiple_of(2) && k == n / 2 {
                    continue;
                }
                let kk = signed_index(k, n) as f64;
                acc += (ck * Complex64::from_polar(1.0, kk * PI * (x - s0) / l)).re;
            }
            acc / n as f64
        })
        .collect()
}

/// Spectral derivative of φ₀ on the arc-length nodes.
pub fn gauge_phase_derivative(field: &FieldData) -> Vec<f64> {
    let n = field.phi0.len();
    let l = field.half_perimeter_l;
    let mut c = fft(&field.phi0);
    for (k, ck) in c.iter_mut().enumerate() {
        if k == 0 || (n.is_multiple_of(2) && k == n / 2) {
            *ck = Complex64::new(0.0, 0.0);
        } else {
            *ck *= Complex64::new(0.0, signed_index(k, n) as f64 * PI / l);
        }
    }
    ifft_real(c)
}

/// Mean-free periodic antiderivative with value 0 at s = 0, and the trace with
/// its Nyquist component removed.
fn phase_from_trace(trace: &mut [f64], s_nodes: &[f64], l: f64, gamma0: f64) -> Vec<f64> {
    let n = trace.len();
    let mean = trace.iter().sum::<f64>() / n as f64;
    trace.iter_mut().for_each(|v| *v += gamma0 - mean);
    let mut c = fft(trace);
    if n.is_multiple_of(2) {
        c[n / 2] = Complex64::new(0.0, 0.0);
    }
    let filtered = ifft_real(c.clone());
    trace.copy_from_slice(&filtered);
    let mut a = c;
    for (k, ak) in a.iter_mut().enumerate() {
        if k == 0 || (n.is_multiple_of(2) && k == n / 2) {
            *ak = Complex64::new(0.0, 0.0);
        } else {
            *ak /= Complex64::new(0.0, signed_index(k, n) as f64 * PI / l);
        }
    }
    let mut phi = ifft_real(a);
    let at_zero = trig_interpolate(&phi, s_nodes[0], l, &[0.0])[0];
    phi.iter_mut().for_each(|v| *v -= at_zero);
    phi
}

pub fn build_field(geom: &GeometryData, method: Construction) -> Result<FieldData> {
    let n = geom.arclength_nodes.len();
    let (mut trace, residual) = match method {
        Construction::AnalyticDisc => {
            if !matches!(geom.spec.kind, DomainKind::Disc { .. }) {
                return Err(Error::InvalidParameter(
                    "analytic_disc construction requires a disc domain".into(),
                ));
            }
            // F = (−y, x)/2 on the circle
            let t = (0..n)
                .map(|k| {
                    let p = geom.boundary_points[k];
                    let tv = geom.tangents[k];
                    0.5 * (-p[1] * tv[0] + p[0] * tv[1])
                })
                .collect::<Vec<_>>();
            (t, 0.0)
        }
        Construction::PoissonFd { grid_h, solve_tol } => poisson_trace(geom, grid_h, solve_tol)?,
    };
    let phi0 = phase_from_trace(&mut trace, &geom.arclength_nodes, geom.half_perimeter_l, geom.gamma0);
    Ok(FieldData {
        arclength_nodes: geom.arclength_nodes.clone(),
        tangential_trace: trace,
        phi0,
        construction: method,
        half_perimeter_l: geom.half_perimeter_l,
        gamma0: geom.gamma0,
        poisson_residual: residual,
    })
}

struct PoissonGrid {
    /// Unknown index of grid node (ix, iy), if inside.
    index: Vec<Option<usize>>,
    coords: Vec<[f64; 2]>,
}

/// Fraction θ ∈ (0, 1] of the segment p → p + h·dir at which the boundary is crossed.
fn crossing_fraction(geom: &GeometryData, p: [f64; 2], q: [f64; 2]) -> f64 {
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        let x = [p[0] + mid * (q[0] - p[0]), p[1] + mid * (q[1] - p[1])];
        if geom.contains(x) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (0.5 * (lo + hi)).max(1e-6)
}

/// Solve Δφ = 1 in Ω, φ = 0 on ∂Ω and return F·T = −∂_νφ at the boundary nodes.
fn poisson_trace(geom: &GeometryData, h: f64, tol: f64) -> Result<(Vec<f64>, f64)> {
    if !(h > 0.0 && tol > 0.0) {
        return Err(Error::InvalidParameter("grid_h and solve_tol must be positive".into()));
    }
    let rmax = geom
        .boundary_points
        .iter()
        .map(|p| (p[0] * p[0] + p[1] * p[1]).sqrt())
        .fold(0.0, f64::max)
        * 1.02
        + 2.0 * h;
    let n = (2.0 * rmax / h).ceil() as usize + 1;
    let origin = -rmax;
    let mut index = vec![None; n * n];
    let mut coords = Vec::new();
    for iy in 0..n {
        for ix in 0..n {
            let p = [origin + ix as f64 * h, origin + iy as f64 * h];
            if geom.contains(p) {
                index[iy * n + ix] = Some(coords.len());
                coords.push(p);
            }
        }
    }
    let grid = PoissonGrid { index, coords };
    let m = grid.coords.len();
    // rows: diag plus neighbour list (−1/h²)
    let mut diag = vec![0.0; m];
    let mut nbrs: Vec<Vec<usize>> = vec![Vec::new(); m];
    let ih2 = 1.0 / (h * h);
    for iy in 0..n {
        for ix in 0..n {
            let Some(row) = grid.index[iy * n + ix] else { continue };
            let p = grid.coords[row];
            for (dx, dy) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1)] {
                let jx = ix as i64 + dx;
                let jy = iy as i64 + dy;
                let nb = if jx >= 0 && jy >= 0 && (jx as usize) < n && (jy as usize) < n {
                    grid.index[jy as usize * n + jx as usize]
                } else {
                    None
                };
                match nb {
                    Some(col) => {
                        diag[row] += ih2;
                        nbrs[row].push(col);
                    }
                    None => {
                        let q = [p[0] + dx as f64 * h, p[1] + dy as f64 * h];
                        let theta = crossing_fraction(geom, p, q);
                        diag[row] += ih2 / theta;
                    }
                }
            }
        }
    }
    // −Δφ = −1
    let rhs = vec![-1.0; m];
    let apply = |x: &[f64], y: &mut [f64]| {
        for r in 0..m {
            let mut v = diag[r] * x[r];
            for &c in &nbrs[r] {
                v -= ih2 * x[c];
            }
            y[r] = v;
        }
    };
    let (phi, residual, iterations) = conjugate_gradient(apply, &diag, &rhs, tol, 20 * n + 1000);
    if residual > tol {
        return Err(Error::PoissonResidual { residual, iterations });
    }

    // least-squares quadratic fit of φ around every boundary node
    let nodes = geom.arclength_nodes.len();
    let mut trace = Vec::with_capacity(nodes);
    let radius = 3.2 * h;
    for k in 0..nodes {
        let mpt = geom.boundary_points[k];
        let nu = geom.normals[k];
        let mut rows: Vec<([f64; 5], f64)> = Vec::new();
        let cx = ((mpt[0] - origin) / h).round() as i64;
        let cy = ((mpt[1] - origin) / h).round() as i64;
        for jy in cy - 4..=cy + 4 {
            for jx in cx - 4..=cx + 4 {
                if jx < 0 || jy < 0 || jx as usize >= n || jy as usize >= n {
                    continue;
                }
                if let Some(idx) = grid.index[jy as usize * n + jx as usize] {
                    let p = grid.coords[idx];
                    let (dx, dy) = (p[0] - mpt[0], p[1] - mpt[1]);
                    if dx * dx + dy * dy <= radius * radius {
                        rows.push(([dx, dy, dx * dx, dx * dy, dy * dy], phi[idx]));
                    }
                }
            }
        }
        for off in [-2.0, -1.0, 1.0, 2.0] {
            let b = geom.eval(geom.arclength_nodes[k] + off * h)?;
            let (dx, dy) = (b.point[0] - mpt[0], b.point[1] - mpt[1]);
            rows.push(([dx, dy, dx * dx, dx * dy, dy * dy], 0.0));
        }
        let a = DMatrix::from_fn(rows.len(), 5, |r, c| rows[r].0[c] / h.powi(if c < 2 { 1 } else { 2 }));
        let bvec = DVector::from_fn(rows.len(), |r, _| rows[r].1);
        let sol = a
            .svd(true, true)
            .solve(&bvec, 1e-12)
            .map_err(|e| Error::InvalidParameter(format!("trace fit failed: {e}")))?;
        let gx = sol[0] / h;
        let gy = sol[1] / h;
        trace.push(-(gx * nu[0] + gy * nu[1]));
    }
    Ok((trace, residual))
}

/// Jacobi-preconditioned conjugate gradient; returns (x, relative residual, iterations).
fn conjugate_gradient<F: Fn(&[f64], &mut [f64])>(apply: F, diag: &[f64], b: &[f64], tol: f64, max_it: usize) -> (Vec<f64>, f64, usize) {
    let m = b.len();
    let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; m];
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(diag).map(|(r, d)| r / d).collect();
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; m];
    let mut res = 1.0;
    for it in 0..max_it {
        apply(&p, &mut ap);
        let alpha = rz / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
        for i in 0..m {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm;
        if res <= tol {
            return (x, res, it + 1);
        }
        for i in 0..m {
            z[i] = r[i] / diag[i];
        }
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..m {
            p[i] = z[i] + beta * p[i];
        }
    }
    (x, res, max_it)
}

/// Map a strip-gauge field to the physical gauge: ψ = e^{−iHφ₀(s)} v.
pub fn to_physical_gauge(chart: &StripChart, field: &FieldData, h_field: f64, v: &[Complex64]) -> Vec<Complex64> {
    apply_phase(chart, &field.phi0_at(&chart.s_nodes), -h_field, v)
}

/// Inverse of [`to_physical_gauge`].
pub fn to_strip_gauge(chart: &StripChart, field: &FieldData, h_field: f64, psi: &[Complex64]) -> Vec<Complex64> {
    apply_phase(chart, &field.phi0_at(&chart.s_nodes), h_field, psi)
}

pub(crate) fn apply_phase(chart: &StripChart, phi: &[f64], factor: f64, v: &[Complex64]) -> Vec<Complex64> {
    let n_t = chart.n_t;
    v.iter()
        .enumerate()
        .map(|(idx, z)| z * Complex64::from_polar(1.0, factor * phi[idx / n_t]))
        .collect()
}
