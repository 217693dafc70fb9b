//! Gauss-Legendre and Gauss-Lobatto-Legendre rules on [-1, 1].

/// Legendre polynomial P_n and its derivative at x.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    // derivative from the standard recurrence, valid away from |x| = 1
    let nf = n as f64;
    let dp = if (1.0 - x * x).abs() > 1e-300 {
        nf * (x * p1 - p0) / (x * x - 1.0)
    } else {
        0.5 * nf * (nf + 1.0) * x.powi(n as i32 + 1)
    };
    (p1, dp)
}

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1], ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n {
        let mut z = -(std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre(n, z);
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Nodes, weights and differentiation matrix (row-major, n x n) of the
/// n-point Gauss-Lobatto-Legendre rule on [-1, 1].
pub fn gauss_lobatto(n: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    assert!(n >= 2);
    let deg = n - 1;
    let mut x = vec![0.0; n];
    x[0] = -1.0;
    x[deg] = 1.0;
    // interior nodes are roots of P'_deg; Newton on q(x) = (1 - x^2) P'_deg(x)
    for (i, xi) in x.iter_mut().enumerate().take(deg).skip(1) {
        let mut z = -(std::f64::consts::PI * i as f64 / deg as f64).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(deg, z);
            // (1 - z^2) P'' = 2 z P' - deg (deg + 1) P
            let ddp = (2.0 * z * dp - (deg * (deg + 1)) as f64 * p) / (1.0 - z * z);
            let dz = dp / ddp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        *xi = z;
    }
    let nn = (deg * (deg + 1)) as f64;
    let pvals: Vec<f64> = x.iter().map(|&z| legendre(deg, z).0).collect();
    let w: Vec<f64> = pvals.iter().map(|p| 2.0 / (nn * p * p)).collect();
    let mut d = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            d[i * n + j] = if i != j {
                pvals[i] / (pvals[j] * (x[i] - x[j]))
            } else if i == 0 {
                -nn / 4.0
            } else if i == deg {
                nn / 4.0
            } else {
                0.0
            };
        }
    }
    (x, w, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre(8);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((integral - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn lobatto_rule_and_derivative() {
        let n = 10;
        let (x, w, d) = gauss_lobatto(n);
        let s: f64 = w.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
        let integral: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(16)).sum();
        assert!((integral - 2.0 / 17.0).abs() < 1e-13);
        // derivative of x^5 is exact for degree <= n - 1
        for i in 0..n {
            let dv: f64 = (0..n).map(|j| d[i * n + j] * x[j].powi(5)).sum();
            assert!((dv - 5.0 * x[i].powi(4)).abs() < 1e-11);
        }
    }
}
