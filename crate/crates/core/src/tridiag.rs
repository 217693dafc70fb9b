//! Symmetric tridiagonal pencils `K - σM` where `K` is a weighted path Laplacian
//! plus a diagonal potential and `M` is a positive diagonal mass.
//!
//! Pivots are propagated in "excess over the Laplacian" form so that the
//! zero row sum of the Laplacian part cancels exactly. Standard LDLᵀ loses all
//! relative accuracy for eigenvalues that are tiny compared with ‖K‖.

#[derive(Clone, Debug)]
pub struct LaplacianPencil {
    /// Link weights, length n - 1.
    pub links: Vec<f64>,
    /// Diagonal potential contribution (not including the Laplacian), length n.
    pub potential: Vec<f64>,
    /// Diagonal mass, length n.
    pub mass: Vec<f64>,
}

impl LaplacianPencil {
    pub fn len(&self) -> usize {
        self.mass.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mass.is_empty()
    }

    /// Pivots of the LDLᵀ factorization of `K - σM`.
    pub fn pivots(&self, sigma: f64) -> Vec<f64> {
        let n = self.len();
        let mut d: Vec<f64> = Vec::with_capacity(n);
        let mut g = 0.0;
        for i in 0..n {
            let base = self.potential[i] - sigma * self.mass[i];
            g = if i == 0 {
                base
            } else {
                // d[i-1] = c + g; an exactly singular pivot is nudged to a tiny
                // negative value so that overflow cannot poison the recursion
                let c = self.links[i - 1];
                base + c * g / d[i - 1]
            };
            let mut piv = if i + 1 < n { g + self.links[i] } else { g };
            let pivmin = f64::EPSILON * self.links.get(i).or(self.links.last()).copied().unwrap_or(1.0);
            if piv.abs() < pivmin {
                piv = -pivmin;
                g = piv - if i + 1 < n { self.links[i] } else { 0.0 };
            }
            d.push(piv);
        }
        d
    }

    /// Number of eigenvalues strictly below `sigma`.
    pub fn count_below(&self, sigma: f64) -> usize {
        self.pivots(sigma).iter().filter(|d| **d < 0.0).count()
    }

    fn upper_bound(&self) -> f64 {
        let n = self.len();
        let mut hi: f64 = 0.0;
        for i in 0..n {
            let left = if i > 0 { self.links[i - 1] } else { 0.0 };
            let right = if i + 1 < n { self.links[i] } else { 0.0 };
            hi = hi.max((2.0 * (left + right) + self.potential[i].abs()) / self.mass[i]);
        }
        hi * 2.0 + 1.0
    }

    /// The k-th smallest eigenvalue (0-based) by bisection on the inertia count.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let mut lo = self
            .potential
            .iter()
            .zip(&self.mass)
            .map(|(p, m)| p / m)
            .fold(0.0f64, f64::min)
            - 1.0;
        let mut hi = self.upper_bound();
        while self.count_below(hi) <= k {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Solve `(K - σM) x = rhs` with the stable pivots.
    pub fn solve(&self, sigma: f64, rhs: &[f64]) -> Vec<f64> {
        let n = self.len();
        let d: Vec<f64> = self
            .pivots(sigma)
            .into_iter()
            .map(|v| if v == 0.0 { f64::MIN_POSITIVE.sqrt() } else { v })
            .collect();
        let mut z = rhs.to_vec();
        for i in 1..n {
            z[i] += self.links[i - 1] / d[i - 1] * z[i - 1];
        }
        let mut x = vec![0.0; n];
        x[n - 1] = z[n - 1] / d[n - 1];
        for i in (0..n - 1).rev() {
            x[i] = (z[i] + self.links[i] * x[i + 1]) / d[i];
        }
        x
    }

    /// Eigenvector for an (accurate) eigenvalue by inverse iteration, normalized so that xᵀMx = 1.
    pub fn eigenvector(&self, lambda: f64) -> Vec<f64> {
        let n = self.len();
        let scale = lambda.abs().max(1.0);
        let sigma = lambda - 1e-10 * scale;
        let mut x = vec![1.0; n];
        for _ in 0..4 {
            let rhs: Vec<f64> = x.iter().zip(&self.mass).map(|(x, m)| x * m).collect();
            x = self.solve(sigma, &rhs);
            let norm = x
                .iter()
                .zip(&self.mass)
                .map(|(x, m)| m * x * x)
                .sum::<f64>()
                .sqrt();
            x.iter_mut().for_each(|v| *v /= norm);
        }
        x
    }
}
