//! Direct solver for block cyclic tridiagonal Hermitian systems `(K − σM) x = r`
//! where `K` is a [`StripOperator`].
//!
//! The first `n_s − 1` block columns form a block tridiagonal matrix `T` that is
//! eliminated with a block LDLᴴ sweep; the last block column is a border that is
//! handled through its Schur complement.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::operator::StripOperator;
use crate::error::{Error, Result};

type C = Complex64;

#[derive(Clone, Debug)]
pub struct CyclicFactor {
    n_s: usize,
    n_t: usize,
    /// Inverses of the pivot blocks of T, row-major.
    pinv: Vec<Vec<C>>,
    /// Diagonal couplings i → i+1 (a copy of the operator links).
    up: Vec<Vec<C>>,
    /// X = T⁻¹B, stored block by block, each block row-major n_t × n_t.
    x_blocks: Vec<Vec<C>>,
    /// Inverse of the Schur complement of the border block.
    sinv: Vec<C>,
    positive_definite: bool,
}

fn to_dmatrix(n: usize, v: &[C]) -> DMatrix<C> {
    DMatrix::from_row_slice(n, n, v)
}

fn from_dmatrix(m: &DMatrix<C>) -> Vec<C> {
    let n = m.nrows();
    let mut out = vec![C::new(0.0, 0.0); n * n];
    for r in 0..n {
        for c in 0..n {
            out[r * n + c] = m[(r, c)];
        }
    }
    out
}

/// Inverse of a Hermitian block; reports whether the block is positive definite.
fn hermitian_inverse(n: usize, v: &mut [C]) -> Result<(Vec<C>, bool)> {
    for r in 0..n {
        for c in 0..r {
            let avg = 0.5 * (v[r * n + c] + v[c * n + r].conj());
            v[r * n + c] = avg;
            v[c * n + r] = avg.conj();
        }
        v[r * n + r] = C::new(v[r * n + r].re, 0.0);
    }
    let m = to_dmatrix(n, v);
    if let Some(ch) = m.clone().cholesky() {
        return Ok((from_dmatrix(&ch.inverse()), true));
    }
    let inv = m.try_inverse().ok_or(Error::SingularBlock)?;
    Ok((from_dmatrix(&inv), false))
}

fn matvec(n: usize, a: &[C], x: &[C], y: &mut [C]) {
    for r in 0..n {
        let row = &a[r * n..(r + 1) * n];
        let mut acc = C::new(0.0, 0.0);
        for (a, x) in row.iter().zip(x) {
            acc += a * x;
        }
        y[r] = acc;
    }
}

impl CyclicFactor {
    /// Factorize `K + diag_shift·M` (pass `-σ` to factor `K − σM`).
    pub fn new(op: &StripOperator, diag_shift: f64) -> Result<Self> {
        let (n_s, n_t) = (op.n_s, op.n_t);
        assert!(n_s >= 3, "cyclic factorization needs at least three s-columns");
        let m = n_s - 1;
        let zero = C::new(0.0, 0.0);
        let block = |i: usize| -> Vec<C> {
            let mut b: Vec<C> = op.diag_blocks[i].iter().map(|v| C::new(*v, 0.0)).collect();
            for j in 0..n_t {
                b[j * n_t + j] += diag_shift * op.mass[i * n_t + j];
            }
            b
        };
        let mut positive_definite = true;
        let mut pinv: Vec<Vec<C>> = Vec::with_capacity(m);
        for i in 0..m {
            let mut p = block(i);
            if i > 0 {
                // P_i = A_i − U_{i−1}ᴴ P_{i−1}⁻¹ U_{i−1}, with U diagonal
                let u = &op.links[i - 1];
                let q = &pinv[i - 1];
                for r in 0..n_t {
                    for c in 0..n_t {
                        p[r * n_t + c] -= u[r].conj() * q[r * n_t + c] * u[c];
                    }
                }
            }
            let (inv, pd) = hermitian_inverse(n_t, &mut p)?;
            positive_definite &= pd;
            pinv.push(inv);
        }
        let up: Vec<Vec<C>> = op.links.clone();

        // B: block 0 is conj(links[m]) (coupling of column 0 to the border),
        // block m−1 is links[m−1]
        let b0: Vec<C> = op.links[m].iter().map(|v| v.conj()).collect();
        let bm: Vec<C> = op.links[m - 1].clone();
        let mut x_blocks = vec![vec![zero; n_t * n_t]; m];
        // solve T X = B column by column of the n_t border unknowns
        let mut rhs = vec![zero; m * n_t];
        let mut sol = vec![zero; m * n_t];
        let mut factor = CyclicFactor {
            n_s,
            n_t,
            pinv,
            up,
            x_blocks: Vec::new(),
            sinv: Vec::new(),
            positive_definite,
        };
        for col in 0..n_t {
            rhs.iter_mut().for_each(|v| *v = zero);
            rhs[col] += b0[col];
            rhs[(m - 1) * n_t + col] += bm[col];
            factor.solve_t(&rhs, &mut sol);
            for i in 0..m {
                for r in 0..n_t {
                    x_blocks[i][r * n_t + col] = sol[i * n_t + r];
                }
            }
        }
        // S = A_m − Bᴴ X
        let mut s = block(m);
        for r in 0..n_t {
            for c in 0..n_t {
                s[r * n_t + c] -=
                    b0[r].conj() * x_blocks[0][r * n_t + c] + bm[r].conj() * x_blocks[m - 1][r * n_t + c];
            }
        }
        let (sinv, pd) = hermitian_inverse(n_t, &mut s)?;
        factor.positive_definite &= pd;
        factor.sinv = sinv;
        factor.x_blocks = x_blocks;
        Ok(factor)
    }

    /// Whether every pivot block (and hence the whole matrix) is positive definite.
    pub fn is_positive_definite(&self) -> bool {
        self.positive_definite
    }

    fn solve_t(&self, r: &[C], y: &mut [C]) {
        let n_t = self.n_t;
        let m = self.n_s - 1;
        let mut z = r.to_vec();
        let mut tmp = vec![C::new(0.0, 0.0); n_t];
        for i in 1..m {
            matvec(n_t, &self.pinv[i - 1], &z[(i - 1) * n_t..i * n_t], &mut tmp);
            let u = &self.up[i - 1];
            for rr in 0..n_t {
                z[i * n_t + rr] -= u[rr].conj() * tmp[rr];
            }
        }
        matvec(n_t, &self.pinv[m - 1], &z[(m - 1) * n_t..m * n_t], &mut tmp);
        y[(m - 1) * n_t..m * n_t].copy_from_slice(&tmp);
        for i in (0..m - 1).rev() {
            let u = &self.up[i];
            let mut w = vec![C::new(0.0, 0.0); n_t];
            for rr in 0..n_t {
                w[rr] = z[i * n_t + rr] - u[rr] * y[(i + 1) * n_t + rr];
            }
            matvec(n_t, &self.pinv[i], &w, &mut tmp);
            y[i * n_t..(i + 1) * n_t].copy_from_slice(&tmp);
        }
    }

    /// Solve the full cyclic system.
    pub fn solve(&self, r: &[C]) -> Vec<C> {
        let n_t = self.n_t;
        let m = self.n_s - 1;
        let mut y = vec![C::new(0.0, 0.0); m * n_t];
        self.solve_t(&r[..m * n_t], &mut y);
        // border: S x_m = r_m − Bᴴ y
        let b0 = &self.up[m];
        let bm = &self.up[m - 1];
        let mut rb = vec![C::new(0.0, 0.0); n_t];
        for rr in 0..n_t {
            rb[rr] = r[m * n_t + rr] - b0[rr] * y[rr] - bm[rr].conj() * y[(m - 1) * n_t + rr];
        }
        let mut xb = vec![C::new(0.0, 0.0); n_t];
        matvec(n_t, &self.sinv, &rb, &mut xb);
        let mut x = vec![C::new(0.0, 0.0); self.n_s * n_t];
        let mut tmp = vec![C::new(0.0, 0.0); n_t];
        for i in 0..m {
            matvec(n_t, &self.x_blocks[i], &xb, &mut tmp);
            for rr in 0..n_t {
                x[i * n_t + rr] = y[i * n_t + rr] - tmp[rr];
            }
        }
        x[m * n_t..].copy_from_slice(&xb);
        x
    }
}
