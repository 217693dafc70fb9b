//! One-dimensional fiber operators
//! `h(u) = ∫₀ᵃ (|u′|² + δ|(α + τ + ζτ) u|²) dτ` with Neumann ends.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tridiag::LaplacianPencil;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberProblem {
    pub alpha: f64,
    pub delta: f64,
    pub a_len: f64,
    pub zeta: f64,
    pub n_grid: usize,
}

impl FiberProblem {
    pub fn new(alpha: f64, delta: f64, a_len: f64, zeta: f64, n_grid: usize) -> Self {
        FiberProblem {
            alpha,
            delta,
            a_len,
            zeta,
            n_grid,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.delta >= 0.0) {
            return Err(Error::InvalidParameter(format!("delta = {} must be >= 0", self.delta)));
        }
        if !(self.a_len > 0.0) {
            return Err(Error::InvalidParameter(format!("a_len = {} must be > 0", self.a_len)));
        }
        if self.n_grid < 32 {
            return Err(Error::InvalidParameter(format!(
                "n_grid = {} must be at least 32",
                self.n_grid
            )));
        }
        if !self.alpha.is_finite() || !self.zeta.is_finite() {
            return Err(Error::InvalidParameter("alpha and zeta must be finite".into()));
        }
        Ok(())
    }

    fn pencil(&self, n: usize) -> LaplacianPencil {
        let h = self.a_len / (n - 1) as f64;
        let mut mass = vec![h; n];
        mass[0] = 0.5 * h;
        mass[n - 1] = 0.5 * h;
        let potential = (0..n)
            .map(|i| {
                let tau = i as f64 * h;
                let q = self.alpha + (1.0 + self.zeta) * tau;
                mass[i] * self.delta * q * q
            })
            .collect();
        LaplacianPencil {
            links: vec![1.0 / h; n - 1],
            potential,
            mass,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberSpectrum {
    /// Eigenvalues of the discretization on `n_grid` nodes, ascending.
    pub eigenvalues: Vec<f64>,
    /// Richardson-extrapolated eigenvalues from grids h and h/2.
    pub extrapolated: Vec<f64>,
    /// Estimated discretization error of `eigenvalues` (raw minus extrapolated).
    pub discretization_error_estimate: Vec<f64>,
    /// Nonnegative ground state on the τ grid with unit discrete L² norm.
    pub ground_state: Vec<f64>,
    pub tau: Vec<f64>,
}

impl FiberSpectrum {
    /// Best available estimate of μ₁.
    pub fn mu1(&self) -> f64 {
        self.extrapolated[0]
    }
}

/// Lowest `m` eigenpairs of the fiber operator.
pub fn solve_fiber(p: &FiberProblem, m: usize) -> Result<FiberSpectrum> {
    p.validate()?;
    if m == 0 || m > 10 {
        return Err(Error::InvalidParameter(format!("m = {m} must lie in 1..=10")));
    }
    let coarse = p.pencil(p.n_grid);
    let fine = p.pencil(2 * p.n_grid - 1);
    let flat = coarse.potential.iter().all(|v| *v == 0.0);
    let mut eigenvalues = Vec::with_capacity(m);
    let mut extrapolated = Vec::with_capacity(m);
    let mut err = Vec::with_capacity(m);
    for k in 0..m {
        let (mu_h, mu_h2) = if k == 0 && flat {
            // the constant is an exact discrete eigenvector
            (0.0, 0.0)
        } else {
            (coarse.eigenvalue(k), fine.eigenvalue(k))
        };
        let ext = (4.0 * mu_h2 - mu_h) / 3.0;
        eigenvalues.push(mu_h);
        extrapolated.push(ext);
        err.push(mu_h - ext);
    }
    let mut ground_state = coarse.eigenvector(eigenvalues[0]);
    let sum: f64 = ground_state.iter().sum();
    if sum < 0.0 {
        ground_state.iter_mut().for_each(|v| *v = -*v);
    }
    // clean tiny negative round-off so the state is nonnegative
    ground_state.iter_mut().for_each(|v| {
        if *v < 0.0 && *v > -1e-12 {
            *v = 0.0
        }
    });
    let h = p.a_len / (p.n_grid - 1) as f64;
    Ok(FiberSpectrum {
        eigenvalues,
        extrapolated,
        discretization_error_estimate: err,
        ground_state,
        tau: (0..p.n_grid).map(|i| i as f64 * h).collect(),
    })
}

/// First-order coefficient μ₁(ζ) = α² + α(1+ζ)a + a²(1+ζ)²/3.
pub fn mu1_perturbation(alpha: f64, a_len: f64, zeta: f64) -> f64 {
    let z = 1.0 + zeta;
    alpha * alpha + alpha * z * a_len + a_len * a_len * z * z / 3.0
}

/// m(α, a) = a²/12 + (α + a/2)².
pub fn m_effective(alpha: f64, a_len: f64) -> f64 {
    let shifted = alpha + 0.5 * a_len;
    a_len * a_len / 12.0 + shifted * shifted
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub delta: f64,
    pub zeta: f64,
    pub mu: f64,
    pub delta_mu1: f64,
    pub difference: f64,
    pub ratio: f64,
}

/// Compare the numerical μ with δ·μ₁(0).
pub fn verify_expansion(p: &FiberProblem) -> Result<ExpansionReport> {
    let spec = solve_fiber(p, 1)?;
    let mu = spec.mu1();
    let delta_mu1 = p.delta * mu1_perturbation(p.alpha, p.a_len, 0.0);
    let difference = mu - delta_mu1;
    let denom = (p.delta + p.zeta.abs()) * p.delta;
    Ok(ExpansionReport {
        delta: p.delta,
        zeta: p.zeta,
        mu,
        delta_mu1,
        difference,
        ratio: if denom > 0.0 { difference.abs() / denom } else { 0.0 },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coupling_constant_ground_state() {
        let s = solve_fiber(&FiberProblem::new(0.7, 0.0, 1.0, 0.0, 64), 2).unwrap();
        assert!(s.eigenvalues[0].abs() < 1e-12);
        let first = s.ground_state[0];
        assert!(s.ground_state.iter().all(|v| (v - first).abs() < 1e-9));
    }
}
