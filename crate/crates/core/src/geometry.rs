//! Boundary curves, arc-length parameterization and the thin strip chart.
//!
//! The boundary is a star-shaped curve `r(θ) = r₀ + Σ (aₖ cos kθ + bₖ sin kθ)`
//! traversed counter-clockwise. Arc length `s` runs over `[-L, L)` and `s = -L`
//! corresponds to `θ = 0`. The interior normal is the tangent rotated by +90°.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, gauss_lobatto};

fn default_quadrature_tol() -> f64 {
    1e-12
}

/// Shape of the boundary curve.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DomainKind {
    Disc {
        radius: f64,
    },
    /// `cos[k-1]` and `sin[k-1]` multiply `cos kθ` and `sin kθ`.
    Star {
        r0: f64,
        #[serde(default)]
        cos: Vec<f64>,
        #[serde(default)]
        sin: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DomainSpec {
    #[serde(flatten)]
    pub kind: DomainKind,
    #[serde(default = "default_quadrature_tol")]
    pub quadrature_tol: f64,
}

impl DomainSpec {
    pub fn disc(radius: f64) -> Self {
        DomainSpec {
            kind: DomainKind::Disc { radius },
            quadrature_tol: default_quadrature_tol(),
        }
    }

    pub fn star(r0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        DomainSpec {
            kind: DomainKind::Star { r0, cos, sin },
            quadrature_tol: default_quadrature_tol(),
        }
    }

    fn radial(&self) -> RadialFn {
        match &self.kind {
            DomainKind::Disc { radius } => RadialFn {
                r0: *radius,
                cos: vec![],
                sin: vec![],
            },
            DomainKind::Star { r0, cos, sin } => RadialFn {
                r0: *r0,
                cos: cos.clone(),
                sin: sin.clone(),
            },
        }
    }
}

#[derive(Clone, Debug)]
struct RadialFn {
    r0: f64,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl RadialFn {
    /// r, r', r'' at θ.
    fn eval(&self, theta: f64) -> (f64, f64, f64) {
        let mut r = self.r0;
        let mut dr = 0.0;
        let mut ddr = 0.0;
        let n = self.cos.len().max(self.sin.len());
        for k in 1..=n {
            let a = self.cos.get(k - 1).copied().unwrap_or(0.0);
            let b = self.sin.get(k - 1).copied().unwrap_or(0.0);
            let kf = k as f64;
            let (s, c) = (kf * theta).sin_cos();
            r += a * c + b * s;
            dr += kf * (-a * s + b * c);
            ddr += -kf * kf * (a * c + b * s);
        }
        (r, dr, ddr)
    }

    fn speed(&self, theta: f64) -> f64 {
        let (r, dr, _) = self.eval(theta);
        (r * r + dr * dr).sqrt()
    }
}

/// Point, unit tangent, interior unit normal and curvature at one boundary location.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub point: [f64; 2],
    pub tangent: [f64; 2],
    pub normal: [f64; 2],
    pub curvature: f64,
}

/// Cumulative arc-length table over θ ∈ [0, 2π] with composite Gauss-Legendre panels.
#[derive(Debug)]
struct Curve {
    radial: RadialFn,
    theta: Vec<f64>,
    length: Vec<f64>,
    slope: Vec<f64>,
    gl_x: Vec<f64>,
    gl_w: Vec<f64>,
    tol: f64,
}

const GL_ORDER: usize = 10;

impl Curve {
    fn new(radial: RadialFn, panels: usize, tol: f64) -> Result<Self> {
        let (gl_x, gl_w) = gauss_legendre(GL_ORDER);
        let mut curve = Curve {
            radial,
            theta: Vec::new(),
            length: Vec::new(),
            slope: Vec::new(),
            gl_x,
            gl_w,
            tol,
        };
        let table = |panels: usize, c: &Curve| {
            let mut theta = Vec::with_capacity(panels + 1);
            let mut length = Vec::with_capacity(panels + 1);
            let mut acc = 0.0;
            for p in 0..=panels {
                let th = 2.0 * PI * p as f64 / panels as f64;
                if p > 0 {
                    acc += c.panel_integral(theta[p - 1], th);
                }
                theta.push(th);
                length.push(acc);
            }
            (theta, length)
        };
        let (theta, length) = table(panels, &curve);
        let (_, coarse) = table(panels / 2, &curve);
        let total = *length.last().unwrap();
        let residual = (total - coarse.last().unwrap()).abs() / total;
        if residual > tol {
            return Err(Error::Quadrature { residual });
        }
        curve.slope = pchip_slopes(&length, &theta);
        curve.theta = theta;
        curve.length = length;
        Ok(curve)
    }

    fn panel_integral(&self, a: f64, b: f64) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        self.gl_x
            .iter()
            .zip(&self.gl_w)
            .map(|(x, w)| w * self.radial.speed(mid + half * x))
            .sum::<f64>()
            * half
    }

    fn perimeter(&self) -> f64 {
        *self.length.last().unwrap()
    }

    /// θ at which the cumulative arc length from θ = 0 equals `sigma`.
    fn theta_of_length(&self, sigma: f64) -> Result<f64> {
        let total = self.perimeter();
        let sigma = sigma.rem_euclid(total);
        let p = match self
            .length
            .binary_search_by(|v| v.partial_cmp(&sigma).unwrap())
        {
            Ok(i) => return Ok(self.theta[i]),
            Err(i) => i - 1,
        };
        let (s0, s1) = (self.length[p], self.length[p + 1]);
        let (t0, t1) = (self.theta[p], self.theta[p + 1]);
        let hs = s1 - s0;
        let u = (sigma - s0) / hs;
        let (h00, h10, h01, h11) = hermite_basis(u);
        let mut th = h00 * t0 + h10 * hs * self.slope[p] + h01 * t1 + h11 * hs * self.slope[p + 1];
        let mut residual = f64::INFINITY;
        for _ in 0..50 {
            let g = s0 + self.panel_integral(t0, th) - sigma;
            residual = g.abs() / total;
            if residual <= self.tol.max(4.0 * f64::EPSILON) {
                return Ok(th);
            }
            th -= g / self.radial.speed(th);
        }
        Err(Error::Quadrature { residual })
    }

    fn point_at_theta(&self, theta: f64) -> BoundaryPoint {
        let (r, dr, ddr) = self.radial.eval(theta);
        let (s, c) = theta.sin_cos();
        let point = [r * c, r * s];
        let d1 = [dr * c - r * s, dr * s + r * c];
        let speed = (r * r + dr * dr).sqrt();
        let tangent = [d1[0] / speed, d1[1] / speed];
        let normal = [-tangent[1], tangent[0]];
        let curvature = (r * r + 2.0 * dr * dr - r * ddr) / speed.powi(3);
        BoundaryPoint {
            point,
            tangent,
            normal,
            curvature,
        }
    }
}

fn hermite_basis(u: f64) -> (f64, f64, f64, f64) {
    let u2 = u * u;
    let u3 = u2 * u;
    (
        2.0 * u3 - 3.0 * u2 + 1.0,
        u3 - 2.0 * u2 + u,
        -2.0 * u3 + 3.0 * u2,
        u3 - u2,
    )
}

/// Fritsch-Carlson monotone slopes dy/dx at the table nodes.
fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
    let del: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    d[0] = del[0];
    d[n - 1] = del[n - 2];
    for i in 1..n - 1 {
        if del[i - 1] * del[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / del[i - 1] + w2 / del[i]);
        }
    }
    d
}

/// Sampled boundary geometry together with the constants L, |Ω| and γ₀.
#[derive(Clone, Debug, Serialize)]
pub struct GeometryData {
    pub spec: DomainSpec,
    pub half_perimeter_l: f64,
    pub area: f64,
    pub gamma0: f64,
    pub arclength_nodes: Vec<f64>,
    pub boundary_points: Vec<[f64; 2]>,
    pub tangents: Vec<[f64; 2]>,
    pub normals: Vec<[f64; 2]>,
    pub curvature: Vec<f64>,
    pub curvature_sup: f64,
    #[serde(skip)]
    curve: Arc<Curve>,
}

impl GeometryData {
    pub fn perimeter(&self) -> f64 {
        2.0 * self.half_perimeter_l
    }

    /// Boundary data at an arbitrary arc-length coordinate `s` (taken mod 2L).
    pub fn eval(&self, s: f64) -> Result<BoundaryPoint> {
        let theta = self.curve.theta_of_length(s + self.half_perimeter_l)?;
        Ok(self.curve.point_at_theta(theta))
    }

    /// Radius function r(θ) of the underlying star-shaped description.
    pub fn radius_at(&self, theta: f64) -> f64 {
        self.curve.radial.eval(theta).0
    }

    /// Whether a Cartesian point lies strictly inside Ω.
    pub fn contains(&self, p: [f64; 2]) -> bool {
        let rho = (p[0] * p[0] + p[1] * p[1]).sqrt();
        rho < self.radius_at(p[1].atan2(p[0]))
    }
}

/// Build the arc-length parameterized boundary with `n_nodes` equispaced nodes.
pub fn build_geometry(spec: &DomainSpec, n_nodes: usize) -> Result<GeometryData> {
    if n_nodes < 64 {
        return Err(Error::InvalidParameter(format!(
            "n_nodes = {n_nodes} must be at least 64"
        )));
    }
    if !(spec.quadrature_tol > 0.0 && spec.quadrature_tol < 1e-2) {
        return Err(Error::InvalidParameter(format!(
            "quadrature_tol = {} must lie in (0, 1e-2)",
            spec.quadrature_tol
        )));
    }
    let radial = spec.radial();
    if !radial.r0.is_finite()
        || radial.cos.iter().chain(&radial.sin).any(|v| !v.is_finite())
    {
        return Err(Error::InvalidDomain("non-finite coefficient".into()));
    }
    let samples = 8192;
    let (mut r_min, mut theta_min) = (f64::INFINITY, 0.0);
    for i in 0..samples {
        let th = 2.0 * PI * i as f64 / samples as f64;
        let r = radial.eval(th).0;
        if r < r_min {
            r_min = r;
            theta_min = th;
        }
    }
    if r_min <= 0.0 {
        return Err(Error::InvalidDomain(format!(
            "r(θ) is not positive: r({theta_min:.4}) = {r_min:.4e}; the domain is not star-shaped about the origin"
        )));
    }

    let n_harm = radial.cos.len().max(radial.sin.len());
    let panels = (64 * (n_harm + 1)).max(n_nodes).max(256);
    let curve = Curve::new(radial, panels, spec.quadrature_tol)?;
    let perimeter = curve.perimeter();
    let l = 0.5 * perimeter;

    let mut arclength_nodes = Vec::with_capacity(n_nodes);
    let mut boundary_points = Vec::with_capacity(n_nodes);
    let mut tangents = Vec::with_capacity(n_nodes);
    let mut normals = Vec::with_capacity(n_nodes);
    let mut curvature = Vec::with_capacity(n_nodes);
    for k in 0..n_nodes {
        let sigma = perimeter * k as f64 / n_nodes as f64;
        let theta = curve.theta_of_length(sigma)?;
        let bp = curve.point_at_theta(theta);
        arclength_nodes.push(sigma - l);
        boundary_points.push(bp.point);
        tangents.push(bp.tangent);
        normals.push(bp.normal);
        curvature.push(bp.curvature);
    }
    let mut curvature_sup = curvature.iter().fold(0.0f64, |m, k| m.max(k.abs()));
    for i in 0..samples {
        let th = 2.0 * PI * i as f64 / samples as f64;
        curvature_sup = curvature_sup.max(curve.point_at_theta(th).curvature.abs());
    }

    // area = ½∮ r² dθ, integrated with the same panels
    let area = 0.5
        * (0..panels)
            .map(|p| {
                let a = 2.0 * PI * p as f64 / panels as f64;
                let b = 2.0 * PI * (p + 1) as f64 / panels as f64;
                let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
                curve
                    .gl_x
                    .iter()
                    .zip(&curve.gl_w)
                    .map(|(x, w)| w * curve.radial.eval(mid + half * x).0.powi(2))
                    .sum::<f64>()
                    * half
            })
            .sum::<f64>();

    Ok(GeometryData {
        spec: spec.clone(),
        half_perimeter_l: l,
        area,
        gamma0: area / perimeter,
        arclength_nodes,
        boundary_points,
        tangents,
        normals,
        curvature,
        curvature_sup,
        curve: Arc::new(curve),
    })
}

/// Discretization of the thickness variable t ∈ [0, ε].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum TScheme {
    /// Uniform nodes, second-order finite differences with trapezoid mass.
    Uniform,
    /// Gauss-Lobatto-Legendre nodes with a spectral element discretization.
    #[default]
    Lobatto,
}

/// Tensor grid on the periodic strip `[-L, L) × [0, ε]` with sampled metric and potentials.
///
/// Two-dimensional arrays are stored row-major with index `i * n_t + j`,
/// where `i` runs over s-nodes and `j` over t-nodes.
#[derive(Clone, Debug, Serialize)]
pub struct StripChart {
    pub epsilon: f64,
    pub n_s: usize,
    pub n_t: usize,
    pub scheme: TScheme,
    pub half_perimeter_l: f64,
    pub gamma0: f64,
    pub area: f64,
    pub h_s: f64,
    pub s_nodes: Vec<f64>,
    pub curvature: Vec<f64>,
    /// Curvature at the link midpoints `s_i + h_s/2`.
    pub curvature_mid: Vec<f64>,
    pub t_nodes: Vec<f64>,
    /// Quadrature weights on [0, ε] belonging to the t-nodes.
    pub t_weights: Vec<f64>,
    pub metric_factor: Vec<f64>,
    pub f_exact: Vec<f64>,
    pub f_reduced: Vec<f64>,
    /// Lobatto differentiation matrix on [0, ε] (empty for the uniform scheme).
    #[serde(skip)]
    pub t_diff: Vec<f64>,
}

impl StripChart {
    pub fn len(&self) -> usize {
        self.n_s * self.n_t
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n_t + j
    }

    /// f(s,t) = −γ₀ − t + t²k/2 for a given curvature value.
    pub fn f_with_curvature(&self, t: f64, k: f64) -> f64 {
        -self.gamma0 - t + 0.5 * t * t * k
    }

    /// Strip measure |Ω_ε| = ∫∫ a dt ds on the grid.
    pub fn strip_measure(&self) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.n_s {
            for j in 0..self.n_t {
                acc += self.t_weights[j] * self.metric_factor[self.idx(i, j)];
            }
        }
        acc * self.h_s
    }
}

/// Uniform-in-t strip chart (second-order finite differences in t).
pub fn build_strip(geom: &GeometryData, epsilon: f64, n_s: usize, n_t: usize) -> Result<StripChart> {
    build_strip_with_scheme(geom, epsilon, n_s, n_t, TScheme::Uniform)
}

pub fn build_strip_with_scheme(
    geom: &GeometryData,
    epsilon: f64,
    n_s: usize,
    n_t: usize,
    scheme: TScheme,
) -> Result<StripChart> {
    if !(epsilon > 0.0) {
        return Err(Error::InvalidParameter(format!("epsilon = {epsilon} must be positive")));
    }
    let product = epsilon * geom.curvature_sup;
    if product >= 0.5 {
        return Err(Error::InadmissibleEpsilon { epsilon, product });
    }
    if n_t < 8 {
        return Err(Error::InvalidParameter(format!("n_t = {n_t} must be at least 8")));
    }
    if n_s < 8 {
        return Err(Error::InvalidParameter(format!("n_s = {n_s} must be at least 8")));
    }
    let l = geom.half_perimeter_l;
    let h_s = 2.0 * l / n_s as f64;
    let s_nodes: Vec<f64> = (0..n_s).map(|i| -l + i as f64 * h_s).collect();
    let curvature = s_nodes
        .iter()
        .map(|&s| geom.eval(s).map(|b| b.curvature))
        .collect::<Result<Vec<_>>>()?;
    let curvature_mid = s_nodes
        .iter()
        .map(|&s| geom.eval(s + 0.5 * h_s).map(|b| b.curvature))
        .collect::<Result<Vec<_>>>()?;

    let (t_nodes, t_weights, t_diff) = match scheme {
        TScheme::Uniform => {
            let h = epsilon / (n_t - 1) as f64;
            let nodes: Vec<f64> = (0..n_t).map(|j| j as f64 * h).collect();
            let mut w = vec![h; n_t];
            w[0] = 0.5 * h;
            w[n_t - 1] = 0.5 * h;
            (nodes, w, Vec::new())
        }
        TScheme::Lobatto => {
            let (x, w, d) = gauss_lobatto(n_t);
            let nodes: Vec<f64> = x.iter().map(|x| 0.5 * epsilon * (x + 1.0)).collect();
            let weights: Vec<f64> = w.iter().map(|w| 0.5 * epsilon * w).collect();
            let diff: Vec<f64> = d.iter().map(|d| d * 2.0 / epsilon).collect();
            (nodes, weights, diff)
        }
    };

    let gamma0 = geom.gamma0;
    let mut metric_factor = vec![0.0; n_s * n_t];
    let mut f_exact = vec![0.0; n_s * n_t];
    for i in 0..n_s {
        for (j, &t) in t_nodes.iter().enumerate() {
            let k = curvature[i];
            metric_factor[i * n_t + j] = 1.0 - t * k;
            f_exact[i * n_t + j] = -gamma0 - t + 0.5 * t * t * k;
        }
    }
    let f_reduced = t_nodes.iter().map(|&t| -gamma0 - t).collect();
    Ok(StripChart {
        epsilon,
        n_s,
        n_t,
        scheme,
        half_perimeter_l: l,
        gamma0,
        area: geom.area,
        h_s,
        s_nodes,
        curvature,
        curvature_mid,
        t_nodes,
        t_weights,
        metric_factor,
        f_exact,
        f_reduced,
        t_diff,
    })
}
