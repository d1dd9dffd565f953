//! Monotone cubic Hermite interpolation (Fritsch-Carlson). Preserves the
//! monotonicity and positivity of the data between nodes, which is what the
//! rescaled profile evaluation needs.

/// Piecewise-cubic Hermite interpolant with Fritsch-Carlson slopes.
#[derive(Clone, Debug)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        assert_eq!(x.len(), y.len());
        assert!(x.len() >= 2);
        let n = x.len();
        let h: Vec<f64> = (0..n - 1).map(|i| x[i + 1] - x[i]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut m = vec![0.0; n];
        m[0] = endpoint_slope(h[0], h.get(1).copied().unwrap_or(h[0]), delta[0], delta.get(1).copied().unwrap_or(delta[0]));
        m[n - 1] = endpoint_slope(
            h[n - 2],
            if n >= 3 { h[n - 3] } else { h[n - 2] },
            delta[n - 2],
            if n >= 3 { delta[n - 3] } else { delta[n - 2] },
        );
        for i in 1..n - 1 {
            if delta[i - 1] * delta[i] <= 0.0 {
                m[i] = 0.0;
            } else {
                let w1 = 2.0 * h[i] + h[i - 1];
                let w2 = h[i] + 2.0 * h[i - 1];
                m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
            }
        }
        Self { x: x.to_vec(), y: y.to_vec(), m }
    }

    fn segment(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|v| v.total_cmp(&t)) {
            Ok(i) => i.min(n - 2),
            Err(i) => i.saturating_sub(1).min(n - 2),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (h00, h10, h01, h11) = hermite_basis(s);
        h00 * self.y[i] + h10 * h * self.m[i] + h01 * self.y[i + 1] + h11 * h * self.m[i + 1]
    }

    pub fn eval_derivative(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let d00 = (6.0 * s * s - 6.0 * s) / h;
        let d10 = 3.0 * s * s - 4.0 * s + 1.0;
        let d01 = (-6.0 * s * s + 6.0 * s) / h;
        let d11 = 3.0 * s * s - 2.0 * s;
        d00 * self.y[i] + d10 * self.m[i] + d01 * self.y[i + 1] + d11 * self.m[i + 1]
    }

    pub fn node_slopes(&self) -> &[f64] {
        &self.m
    }
}

fn endpoint_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    // three-point one-sided estimate, clipped to keep monotonicity
    let mut m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        m = 0.0;
    } else if d0 * d1 <= 0.0 && m.abs() > 3.0 * d0.abs() {
        m = 3.0 * d0;
    }
    m
}

fn hermite_basis(s: f64) -> (f64, f64, f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    (
        2.0 * s3 - 3.0 * s2 + 1.0,
        s3 - 2.0 * s2 + s,
        -2.0 * s3 + 3.0 * s2,
        s3 - s2,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interpolates_nodes_exactly() {
        let x: Vec<f64> = (0..9).map(|i| i as f64 / 8.0).collect();
        let y: Vec<f64> = x.iter().map(|v| (1.0 - v * v).max(0.0)).collect();
        let s = MonotoneCubic::new(&x, &y);
        for (xi, yi) in x.iter().zip(&y) {
            assert!((s.eval(*xi) - yi).abs() < 1e-14);
        }
    }

    #[test]
    fn preserves_monotone_decrease_and_positivity() {
        let x: Vec<f64> = (0..17).map(|i| i as f64 / 16.0).collect();
        let y: Vec<f64> = x.iter().map(|v| (-2.0 * v).exp() - (-2.0f64).exp() * v).collect();
        let s = MonotoneCubic::new(&x, &y);
        let mut prev = f64::INFINITY;
        for k in 0..400 {
            let t = k as f64 / 399.0;
            let v = s.eval(t);
            assert!(v <= prev + 1e-13, "not monotone at {t}");
            assert!(v >= -1e-13, "negative at {t}");
            prev = v;
        }
    }

    #[test]
    fn derivative_is_consistent() {
        let x: Vec<f64> = (0..33).map(|i| i as f64 / 32.0).collect();
        let y: Vec<f64> = x.iter().map(|v| (1.5 * v).cos()).collect();
        let s = MonotoneCubic::new(&x, &y);
        for k in 1..50 {
            let t = k as f64 / 50.0;
            let fd = (s.eval(t + 1e-6) - s.eval(t - 1e-6)) / 2e-6;
            assert!((s.eval_derivative(t) - fd).abs() < 1e-6);
        }
    }
}
