//! Spectral differentiation of uniformly sampled periodic data, plus a
//! 4th-order central-difference fallback for when spectral accuracy is not
//! wanted (non-smooth inputs).

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// `order`-th derivative of a periodic signal sampled uniformly over one
/// period of length `period`. Exact for band-limited data.
pub fn periodic_derivative(values: &[f64], period: f64, order: u32) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 2);
    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
    fft.process(&mut buf);
    let base = 2.0 * std::f64::consts::PI / period;
    for (k, c) in buf.iter_mut().enumerate() {
        let kk = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        // Nyquist mode of an even-length grid carries no usable phase for odd
        // derivatives
        let kk = if n % 2 == 0 && k == n / 2 && order % 2 == 1 { 0.0 } else { kk };
        let ik = Complex::new(0.0, kk * base);
        *c *= ik.powu(order);
    }
    ifft.process(&mut buf);
    buf.iter().map(|c| c.re / n as f64).collect()
}

/// 4th-order central differences on a uniform periodic grid.
pub fn periodic_derivative_fd4(values: &[f64], period: f64, order: u32) -> Vec<f64> {
    let n = values.len();
    let h = period / n as f64;
    let at = |i: isize| values[(i.rem_euclid(n as isize)) as usize];
    (0..n as isize)
        .map(|i| match order {
            1 => (-at(i + 2) + 8.0 * at(i + 1) - 8.0 * at(i - 1) + at(i - 2)) / (12.0 * h),
            2 => {
                (-at(i + 2) + 16.0 * at(i + 1) - 30.0 * at(i) + 16.0 * at(i - 1) - at(i - 2))
                    / (12.0 * h * h)
            }
            _ => panic!("order {order} not supported"),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn spectral_derivative_is_exact_on_trig() {
        let n = 32;
        let period = TAU;
        let xs: Vec<f64> = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
        let f: Vec<f64> = xs.iter().map(|&x| (3.0 * x).sin() + 0.5 * (x).cos()).collect();
        let d1 = periodic_derivative(&f, period, 1);
        let d2 = periodic_derivative(&f, period, 2);
        for (i, &x) in xs.iter().enumerate() {
            let e1 = 3.0 * (3.0 * x).cos() - 0.5 * x.sin();
            let e2 = -9.0 * (3.0 * x).sin() - 0.5 * x.cos();
            assert!((d1[i] - e1).abs() < 1e-11);
            assert!((d2[i] - e2).abs() < 1e-10);
        }
    }

    #[test]
    fn fd4_converges_at_fourth_order() {
        let period = TAU;
        let err = |n: usize| {
            let xs: Vec<f64> = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
            let f: Vec<f64> = xs.iter().map(|&x| (2.0 * x).sin()).collect();
            let d = periodic_derivative_fd4(&f, period, 1);
            xs.iter()
                .enumerate()
                .map(|(i, &x)| (d[i] - 2.0 * (2.0 * x).cos()).abs())
                .fold(0.0f64, f64::max)
        };
        let e1 = err(32);
        let e2 = err(64);
        let rate = (e1 / e2).log2();
        assert!(rate > 3.7, "rate {rate}");
    }
}
