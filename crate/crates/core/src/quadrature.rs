//! Gauss-Legendre nodes on `[-1, 1]`.

use std::f64::consts::PI;

/// Nodes and weights of the `n`-point Gauss-Legendre rule, nodes ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n > 0, "need at least one node");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let half = n.div_ceil(2);
    for i in 0..half {
        // Tricomi initial guess, then Newton on P_n
        let mut t = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, t);
        if d != 0.0 {
            dp = d;
        }
        let wi = 2.0 / ((1.0 - t * t) * dp * dp);
        x[i] = -t;
        x[n - 1 - i] = t;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

fn legendre_with_derivative(n: usize, t: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = t;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * t * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 16, 64, 129] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            let deg = 2 * n - 1;
            // x^deg odd -> 0, x^(deg-1) -> 2/deg
            let even: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32 - 1)).sum();
            assert!((even - 2.0 / deg as f64).abs() < 1e-13, "n={n}: {even}");
            assert!(x.windows(2).all(|p| p[0] < p[1]));
        }
    }

    #[test]
    fn smooth_integrand() {
        let (x, w) = gauss_legendre(20);
        let v: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.exp()).sum();
        assert!((v - (1f64.exp() - (-1f64).exp())).abs() < 1e-14);
    }
}
