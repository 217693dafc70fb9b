//! Assembly of the discrete strip quadratic forms.
//!
//! Unknowns are ordered `i * n_t + j`. The stiffness matrix is block cyclic
//! tridiagonal: dense real symmetric `n_t × n_t` blocks on the diagonal
//! (t-derivatives plus the diagonal part of the s-links) and diagonal complex
//! couplings between neighbouring s-columns carrying the Peierls phases.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::geometry::{StripChart, TScheme};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FormKind {
    /// Metric a(s,t) and potential f(s,t).
    Exact,
    /// Flat metric and potential f₀(t).
    Reduced,
}

#[derive(Clone, Debug)]
pub struct StripOperator {
    pub n_s: usize,
    pub n_t: usize,
    /// Diagonal blocks, row-major `n_t × n_t`, one per s-node.
    pub diag_blocks: Vec<Vec<f64>>,
    /// `links[i][j]` is the (i, j) → (i+1, j) entry of K (periodic in i).
    pub links: Vec<Vec<Complex64>>,
    /// Diagonal mass.
    pub mass: Vec<f64>,
}

/// One-dimensional t-stiffness `∫ w |v′|²` with weight `w(t)` evaluated by `weight`.
pub(crate) fn t_stiffness(chart: &StripChart, weight: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = chart.n_t;
    let mut s = vec![0.0; n * n];
    match chart.scheme {
        TScheme::Uniform => {
            let h = chart.epsilon / (n - 1) as f64;
            for j in 0..n - 1 {
                let c = weight((j as f64 + 0.5) * h) / h;
                s[j * n + j] += c;
                s[(j + 1) * n + j + 1] += c;
                s[j * n + j + 1] -= c;
                s[(j + 1) * n + j] -= c;
            }
        }
        TScheme::Lobatto => {
            let d = &chart.t_diff;
            for q in 0..n {
                let wq = chart.t_weights[q] * weight(chart.t_nodes[q]);
                for i in 0..n {
                    let di = d[q * n + i];
                    if di == 0.0 {
                        continue;
                    }
                    for j in 0..n {
                        s[i * n + j] += wq * di * d[q * n + j];
                    }
                }
            }
            // exact symmetry
            for i in 0..n {
                for j in 0..i {
                    let v = 0.5 * (s[i * n + j] + s[j * n + i]);
                    s[i * n + j] = v;
                    s[j * n + i] = v;
                }
            }
        }
    }
    s
}

impl StripOperator {
    /// Assemble the discrete form of `∫∫ |∂ₜv|² a + a⁻¹|(∂ₛ − ibf)v|²` (exact)
    /// or `∫∫ |∂ₜv|² + |(∂ₛ − ibf₀)v|²` (reduced).
    pub fn assemble(chart: &StripChart, b: f64, form: FormKind) -> Self {
        let (n_s, n_t) = (chart.n_s, chart.n_t);
        let hs = chart.h_s;
        let mut diag_blocks = Vec::with_capacity(n_s);
        let mut links = Vec::with_capacity(n_s);
        let mut link_weights = Vec::with_capacity(n_s);
        for i in 0..n_s {
            let km = chart.curvature_mid[i];
            let mut w = Vec::with_capacity(n_t);
            let mut l = Vec::with_capacity(n_t);
            for j in 0..n_t {
                let t = chart.t_nodes[j];
                let (a, f) = match form {
                    FormKind::Exact => (1.0 - t * km, chart.f_with_curvature(t, km)),
                    FormKind::Reduced => (1.0, chart.f_reduced[j]),
                };
                let c = chart.t_weights[j] / (a * hs);
                let theta = b * hs * f;
                w.push(c);
                l.push(-c * Complex64::from_polar(1.0, -theta));
            }
            link_weights.push(w);
            links.push(l);
        }
        for i in 0..n_s {
            let k = chart.curvature[i];
            let mut block = match form {
                FormKind::Exact => t_stiffness(chart, |t| 1.0 - t * k),
                FormKind::Reduced => t_stiffness(chart, |_| 1.0),
            };
            block.iter_mut().for_each(|v| *v *= hs);
            let prev = (i + n_s - 1) % n_s;
            for j in 0..n_t {
                block[j * n_t + j] += link_weights[i][j] + link_weights[prev][j];
            }
            diag_blocks.push(block);
        }
        let mut mass = Vec::with_capacity(n_s * n_t);
        for i in 0..n_s {
            for j in 0..n_t {
                let a = match form {
                    FormKind::Exact => chart.metric_factor[i * n_t + j],
                    FormKind::Reduced => 1.0,
                };
                mass.push(hs * chart.t_weights[j] * a);
            }
        }
        StripOperator {
            n_s,
            n_t,
            diag_blocks,
            links,
            mass,
        }
    }

    pub fn len(&self) -> usize {
        self.n_s * self.n_t
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// y = K x.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let (n_s, n_t) = (self.n_s, self.n_t);
        for i in 0..n_s {
            let blk = &self.diag_blocks[i];
            let xi = &x[i * n_t..(i + 1) * n_t];
            let next = (i + 1) % n_s;
            let prev = (i + n_s - 1) % n_s;
            for r in 0..n_t {
                let mut acc = Complex64::new(0.0, 0.0);
                let row = &blk[r * n_t..(r + 1) * n_t];
                for (c, v) in row.iter().zip(xi) {
                    acc += v * *c;
                }
                acc += self.links[i][r] * x[next * n_t + r];
                acc += self.links[prev][r].conj() * x[prev * n_t + r];
                y[i * n_t + r] = acc;
            }
        }
    }

    /// Quadratic form xᴴ K x (real up to round-off).
    pub fn form(&self, x: &[Complex64]) -> f64 {
        let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
        self.apply(x, &mut y);
        x.iter().zip(&y).map(|(a, b)| (a.conj() * b).re).sum()
    }

    pub fn mass_norm_sq(&self, x: &[Complex64]) -> f64 {
        x.iter().zip(&self.mass).map(|(v, m)| m * v.norm_sqr()).sum()
    }

    /// Rayleigh quotient xᴴKx / xᴴMx.
    pub fn rayleigh(&self, x: &[Complex64]) -> f64 {
        self.form(x) / self.mass_norm_sq(x)
    }

    /// Every stored entry as (row, col, value), used for Hermiticity checks.
    pub fn triplets(&self) -> Vec<(usize, usize, Complex64)> {
        let (n_s, n_t) = (self.n_s, self.n_t);
        let mut out = Vec::new();
        for i in 0..n_s {
            let blk = &self.diag_blocks[i];
            for r in 0..n_t {
                for c in 0..n_t {
                    let v = blk[r * n_t + c];
                    if v != 0.0 {
                        out.push((i * n_t + r, i * n_t + c, Complex64::new(v, 0.0)));
                    }
                }
            }
            let next = (i + 1) % n_s;
            for r in 0..n_t {
                let v = self.links[i][r];
                out.push((i * n_t + r, next * n_t + r, v));
                out.push((next * n_t + r, i * n_t + r, v.conj()));
            }
        }
        out
    }
}
