//! Gauss-Legendre rules and Legendre polynomials on `[-1, 1]`.

use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// `n`-point rule on `[-1, 1]`, exact for polynomials of degree `2n - 1`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss rule needs at least one point");
        let mut points = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            // Chebyshev-like initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(n, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() <= 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[i] = -x;
            points[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            points[n / 2] = 0.0;
        }
        GaussRule { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Points and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.points
            .iter()
            .zip(&self.weights)
            .map(move |(&xi, &w)| (mid + half * xi, half * w))
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        self.mapped(a, b).map(|(x, w)| w * f(x)).sum()
    }
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut d_prev, mut d) = (0.0, 1.0);
    for k in 1..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        // d/dx P_{k+1} = d/dx P_{k-1} + (2k+1) P_k
        let d_next = d_prev + (2.0 * kf + 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

/// Values and derivatives of `P_0 .. P_degree` at `x`.
pub fn legendre_all(degree: usize, x: f64, values: &mut [f64], derivs: &mut [f64]) {
    values[0] = 1.0;
    derivs[0] = 0.0;
    if degree == 0 {
        return;
    }
    values[1] = x;
    derivs[1] = 1.0;
    for k in 1..degree {
        let kf = k as f64;
        values[k + 1] = ((2.0 * kf + 1.0) * x * values[k] - kf * values[k - 1]) / (kf + 1.0);
        derivs[k + 1] = derivs[k - 1] + (2.0 * kf + 1.0) * values[k];
    }
}
