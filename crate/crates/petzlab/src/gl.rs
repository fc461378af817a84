//! Gauss-Legendre nodes and weights (Newton iteration on the Legendre
//! recurrence). Nodes are mirrored so symmetric rules are exactly symmetric.

/// Value and derivative of the Legendre polynomial P_n at x.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = (n as f64) * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes (ascending) and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n / 2;
    for i in 0..half {
        // initial guess for the i-th root from the top
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pair(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        let (_, dp) = legendre_pair(n, 0.0);
        nodes[half] = 0.0;
        weights[half] = 2.0 / (dp * dp);
    }
    (nodes, weights)
}

/// Nodes and weights transplanted to [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let len = 0.5 * (b - a);
    (
        x.iter().map(|&t| mid + len * t).collect(),
        w.iter().map(|&t| t * len).collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_interval_length() {
        for n in [1usize, 2, 8, 16, 64, 97] {
            let (_, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n} sum={s}");
        }
    }

    #[test]
    fn integrates_polynomials_exactly() {
        // degree 2n-1 exactness: x^6 over [-1,1] with n = 4
        let (x, w) = gauss_legendre(4);
        let val: f64 = x.iter().zip(&w).map(|(&t, &wi)| wi * t.powi(6)).sum();
        assert!((val - 2.0 / 7.0).abs() < 1e-14);
    }

    #[test]
    fn nodes_mirror_exactly() {
        let (x, w) = gauss_legendre(16);
        for i in 0..16 {
            assert_eq!(x[i], -x[15 - i]);
            assert_eq!(w[i], w[15 - i]);
        }
    }

    #[test]
    fn smooth_integral_spectral_accuracy() {
        let (x, w) = gauss_legendre_on(32, 0.0, 1.0);
        let val: f64 = x.iter().zip(&w).map(|(&t, &wi)| wi * t.exp()).sum();
        assert!((val - (std::f64::consts::E - 1.0)).abs() < 1e-14);
    }
}
