//! The ε-weighted Hölder norms used by the approximation estimates:
//! `C^{0,α}_ε`: sup plus the ε^α-weighted fiber Hölder quotient, and
//! `C^{2,α}_ε`: adds ε- and ε²-weighted fiber derivative sups and the
//! ε^{2+α}-weighted Hölder quotient of the fiber Hessian. Discrete
//! analogues over fiber node pairs at equal t.

use crate::error::Result;
use crate::grid::{TubeField, TubeGrid};

#[derive(Clone, Copy, Debug)]
pub struct WeightedNorms {
    pub sup: f64,
    pub c0alpha_eps: f64,
    pub c2alpha_eps: f64,
}

/// Compute the discrete weighted norms of a field with Hölder exponent α.
pub fn weighted_norms(grid: &TubeGrid, f: &TubeField, alpha: f64) -> Result<WeightedNorms> {
    f.matches(grid)?;
    let eps = grid.eps;
    let nz = grid.n_z();
    let hz = eps * grid.h_x();

    let sup = f.max_abs();

    // fiber first and second differences (physical z), interior nodes
    let mut grad = TubeField { n_t: f.n_t, n_z: nz, values: vec![0.0; f.n_t * nz] };
    let mut hess = TubeField { n_t: f.n_t, n_z: nz, values: vec![0.0; f.n_t * nz] };
    for a in 0..f.n_t {
        for b in 1..nz - 1 {
            grad.set(a, b, (f.get(a, b + 1) - f.get(a, b - 1)) / (2.0 * hz));
            hess.set(
                a,
                b,
                (f.get(a, b + 1) - 2.0 * f.get(a, b) + f.get(a, b - 1)) / (hz * hz),
            );
        }
    }

    let holder = |g: &TubeField| -> f64 {
        let mut worst = 0.0f64;
        for a in 0..f.n_t {
            for b in 1..nz - 1 {
                for c in (b + 1)..nz - 1 {
                    let dz = (grid.x[c] - grid.x[b]).abs() * eps;
                    if dz > 0.0 {
                        worst = worst.max((g.get(a, c) - g.get(a, b)).abs() / dz.powf(alpha));
                    }
                }
            }
        }
        worst
    };

    let value_holder = {
        let mut worst = 0.0f64;
        for a in 0..f.n_t {
            for b in 0..nz {
                for c in (b + 1)..nz {
                    let dz = (grid.x[c] - grid.x[b]).abs() * eps;
                    if dz > 0.0 {
                        worst = worst.max((f.get(a, c) - f.get(a, b)).abs() / dz.powf(alpha));
                    }
                }
            }
        }
        worst
    };

    let c0 = sup + eps.powf(alpha) * value_holder;
    let grad_sup = grad.max_abs();
    let hess_sup = hess.max_abs();
    let c2 = sup
        + eps * grad_sup
        + eps * eps * hess_sup
        + eps.powf(2.0 + alpha) * holder(&hess);
    Ok(WeightedNorms { sup, c0alpha_eps: c0, c2alpha_eps: c2 })
}

/// Discrete C¹ norm used for the fixed-point ball: sup of values plus sup
/// of fiber difference quotients in physical coordinates (t-derivatives
/// excluded; the ambient-C¹ proxy documented in the solver).
pub fn c1_ball_norm(grid: &TubeGrid, f: &TubeField) -> Result<f64> {
    f.matches(grid)?;
    let hz = grid.eps * grid.h_x();
    let mut quot = 0.0f64;
    for a in 0..f.n_t {
        for b in 0..f.n_z - 1 {
            quot = quot.max((f.get(a, b + 1) - f.get(a, b)).abs() / hz);
        }
    }
    Ok(f.max_abs() + quot)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_grid() -> TubeGrid {
        TubeGrid::line(8, 1.0, 12, 0.2)
    }

    fn sample_field(grid: &TubeGrid, scale: f64) -> TubeField {
        TubeField::from_fn(grid, |a, b| {
            let t = a as f64 / 8.0;
            let x = grid.x[b];
            scale * ((1.0 - x * x) * (2.0 * std::f64::consts::PI * t).cos() + 0.3 * x)
        })
    }

    #[test]
    fn norms_are_absolutely_homogeneous() {
        let grid = sample_grid();
        let f = sample_field(&grid, 1.0);
        let g = sample_field(&grid, -2.5);
        let nf = weighted_norms(&grid, &f, 0.5).unwrap();
        let ng = weighted_norms(&grid, &g, 0.5).unwrap();
        assert!((ng.sup - 2.5 * nf.sup).abs() < 1e-12);
        assert!((ng.c0alpha_eps - 2.5 * nf.c0alpha_eps).abs() < 1e-12);
        assert!((ng.c2alpha_eps - 2.5 * nf.c2alpha_eps).abs() < 1e-10);
    }

    #[test]
    fn triangle_inequality_on_samples() {
        let grid = sample_grid();
        let f = sample_field(&grid, 1.0);
        let g = TubeField::from_fn(&grid, |a, b| {
            let x = grid.x[b];
            (a as f64 * 0.7).sin() * x * x * x
        });
        let mut sum = f.clone();
        for (s, gv) in sum.values.iter_mut().zip(&g.values) {
            *s += gv;
        }
        let nf = weighted_norms(&grid, &f, 0.5).unwrap();
        let ng = weighted_norms(&grid, &g, 0.5).unwrap();
        let ns = weighted_norms(&grid, &sum, 0.5).unwrap();
        assert!(ns.sup <= nf.sup + ng.sup + 1e-12);
        assert!(ns.c0alpha_eps <= nf.c0alpha_eps + ng.c0alpha_eps + 1e-12);
        assert!(ns.c2alpha_eps <= nf.c2alpha_eps + ng.c2alpha_eps + 1e-10);
    }
}
