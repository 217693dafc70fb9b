//! Shift-invert subspace iteration for the pencil (K, M).

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::blocksolve::CyclicFactor;
use super::operator::StripOperator;
use crate::error::{Error, Result};

type C = Complex64;

pub const DEFAULT_SEED: u64 = 0x5eed_2024;

#[derive(Clone, Debug)]
pub struct EigenOptions {
    pub n_eigs: usize,
    pub tol: f64,
    pub max_iters: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        EigenOptions {
            n_eigs: 2,
            tol: 1e-9,
            max_iters: 400,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Clone, Debug)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// M-orthonormal eigenvectors.
    pub vectors: Vec<Vec<C>>,
    pub residuals: Vec<f64>,
    pub shift: f64,
    pub iterations: usize,
}

/// Lowest eigenvalues of a mode-decoupled surrogate: s-averaged blocks, links and mass.
///
/// For s-independent coefficients (reduced form, or the exact form on a disc)
/// the surrogate coincides with the discrete operator and the values are exact.
pub fn decoupled_estimates(op: &StripOperator, count: usize) -> Vec<f64> {
    let (n_s, n_t) = (op.n_s, op.n_t);
    let inv = 1.0 / n_s as f64;
    let mut dbar = vec![0.0; n_t * n_t];
    let mut cbar = vec![0.0; n_t];
    let mut phase = vec![C::new(0.0, 0.0); n_t];
    let mut mbar = vec![0.0; n_t];
    for i in 0..n_s {
        for (d, v) in dbar.iter_mut().zip(&op.diag_blocks[i]) {
            *d += v * inv;
        }
        for j in 0..n_t {
            let l = op.links[i][j];
            cbar[j] += l.norm() * inv;
            phase[j] += (-l / l.norm().max(f64::MIN_POSITIVE)) * inv;
            mbar[j] += op.mass[i * n_t + j] * inv;
        }
    }
    // link entry is −c e^{−iθ}; recover θ from the averaged unit phasor
    let theta: Vec<f64> = phase.iter().map(|p| -p.arg()).collect();
    let sq: Vec<f64> = mbar.iter().map(|m| 1.0 / m.sqrt()).collect();
    let per_mode: Vec<Vec<f64>> = (0..n_s)
        .into_par_iter()
        .map(|k| {
            let phi = 2.0 * std::f64::consts::PI * k as f64 / n_s as f64;
            let mut a = DMatrix::<f64>::zeros(n_t, n_t);
            for r in 0..n_t {
                for c in 0..n_t {
                    let mut v = dbar[r * n_t + c];
                    if r == c {
                        v -= 2.0 * cbar[r] * (phi - theta[r]).cos();
                    }
                    a[(r, c)] = v * sq[r] * sq[c];
                }
            }
            let mut ev: Vec<f64> = SymmetricEigen::new(a).eigenvalues.iter().copied().collect();
            ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
            ev.truncate(count);
            ev
        })
        .collect();
    let mut all: Vec<f64> = per_mode.into_iter().flatten().collect();
    all.sort_by(|x, y| x.partial_cmp(y).unwrap());
    all.truncate(count);
    all
}

fn m_inner(mass: &[f64], x: &[C], y: &[C]) -> C {
    x.iter()
        .zip(y)
        .zip(mass)
        .map(|((a, b), m)| a.conj() * b * *m)
        .sum()
}

/// Modified Gram-Schmidt in the M-inner product (applied twice).
fn m_orthonormalize(mass: &[f64], vs: &mut [Vec<C>]) {
    for _ in 0..2 {
        for k in 0..vs.len() {
            let (done, rest) = vs.split_at_mut(k);
            let v = &mut rest[0];
            for u in done.iter() {
                let c = m_inner(mass, u, v);
                v.iter_mut().zip(u).for_each(|(a, b)| *a -= c * b);
            }
            let nrm = m_inner(mass, v, v).re.sqrt();
            v.iter_mut().for_each(|a| *a /= nrm);
        }
    }
}

/// Gershgorin bound on ‖M^{-1/2} K M^{-1/2}‖.
fn operator_norm_bound(op: &StripOperator) -> f64 {
    let (n_s, n_t) = (op.n_s, op.n_t);
    let mut best: f64 = 0.0;
    for i in 0..n_s {
        let prev = (i + n_s - 1) % n_s;
        for r in 0..n_t {
            let mut row: f64 = op.diag_blocks[i][r * n_t..(r + 1) * n_t].iter().map(|v| v.abs()).sum();
            row += op.links[i][r].norm() + op.links[prev][r].norm();
            best = best.max(row / op.mass[i * n_t + r]);
        }
    }
    best
}

/// Choose a shift strictly below λ₁, verified by positive definiteness of K − σM.
fn factor_below_spectrum(op: &StripOperator, estimates: &[f64]) -> Result<(f64, CyclicFactor)> {
    let e1 = estimates[0];
    let e_next = *estimates.last().unwrap();
    let scale = e1.abs().max(1.0);
    let mut sigma = e1 - (0.1 * (e_next - e1)).max(1e-6 * scale);
    let mut step = (0.05 * e1.abs()).max(1e-3);
    for _ in 0..60 {
        let f = CyclicFactor::new(op, -sigma)?;
        if f.is_positive_definite() {
            return Ok((sigma, f));
        }
        step = step.max(2.0 * (e1 - sigma));
        sigma -= step;
        step *= 2.0;
    }
    Err(Error::SingularBlock)
}

pub fn lowest_eigenpairs(op: &StripOperator, opts: &EigenOptions) -> Result<EigenPairs> {
    let n = op.len();
    let nev = opts.n_eigs.max(1);
    let p = (nev + nev.max(4)).min(n);
    let estimates = decoupled_estimates(op, nev + 1);
    let (shift, factor) = factor_below_spectrum(op, &estimates)?;

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut basis: Vec<Vec<C>> = (0..p)
        .map(|_| {
            (0..n)
                .map(|_| C::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect()
        })
        .collect();
    m_orthonormalize(&op.mass, &mut basis);

    // residual floor set by round-off in applying K
    let floor = 1e3 * f64::EPSILON * operator_norm_bound(op);
    let mut residuals = vec![f64::INFINITY; nev];
    for it in 1..=opts.max_iters {
        let mut y: Vec<Vec<C>> = basis
            .par_iter()
            .map(|x| {
                let mx: Vec<C> = x.iter().zip(&op.mass).map(|(v, m)| v * *m).collect();
                factor.solve(&mx)
            })
            .collect();
        m_orthonormalize(&op.mass, &mut y);
        let ky: Vec<Vec<C>> = y
            .par_iter()
            .map(|v| {
                let mut out = vec![C::new(0.0, 0.0); n];
                op.apply(v, &mut out);
                out
            })
            .collect();
        let mut kp = DMatrix::<C>::zeros(p, p);
        for r in 0..p {
            for c in 0..p {
                kp[(r, c)] = y[r].iter().zip(&ky[c]).map(|(a, b)| a.conj() * b).sum();
            }
        }
        let kp = (&kp + kp.adjoint()) * C::new(0.5, 0.0);
        let eig = SymmetricEigen::new(kp);
        let mut order: Vec<usize> = (0..p).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let mut new_basis = Vec::with_capacity(p);
        let mut values = Vec::with_capacity(p);
        let mut kx_all = Vec::with_capacity(p);
        for &col in &order {
            let mut v = vec![C::new(0.0, 0.0); n];
            let mut kv = vec![C::new(0.0, 0.0); n];
            for r in 0..p {
                let w = eig.eigenvectors[(r, col)];
                v.iter_mut().zip(&y[r]).for_each(|(a, b)| *a += w * b);
                kv.iter_mut().zip(&ky[r]).for_each(|(a, b)| *a += w * b);
            }
            new_basis.push(v);
            kx_all.push(kv);
            values.push(eig.eigenvalues[col]);
        }
        for k in 0..nev {
            let lam = values[k];
            let r2: f64 = kx_all[k]
                .iter()
                .zip(&new_basis[k])
                .zip(&op.mass)
                .map(|((kv, v), m)| (kv - v * (lam * m)).norm_sqr() / m)
                .sum();
            residuals[k] = r2.sqrt() / lam.abs().max(1.0);
        }
        basis = new_basis;
        if residuals
            .iter()
            .zip(&values)
            .all(|(r, lam)| *r <= opts.tol.max(floor / lam.abs().max(1.0)))
        {
            basis.truncate(nev);
            values.truncate(nev);
            return Ok(EigenPairs {
                values,
                vectors: basis,
                residuals,
                shift,
                iterations: it,
            });
        }
    }
    Err(Error::EigenNonConvergence { residuals })
}
