//! Independent reference implementations used to validate the production
//! paths: closed forms, brute-force enumerations, and alternative
//! discretizations/eigensolvers. Production code never calls into this
//! module; tests and the CLI `fixtures` command do.

use crate::error::{Error, Result};
use crate::linalg::tridiag;
use crate::radial::ProblemParams;

/// Complete elliptic integral K(1/sqrt 2) via the arithmetic-geometric mean.
/// For n = 1, p = 3 the ground state is U(r) = c cn(c r, 1/sqrt 2) with
/// c = K(1/sqrt 2), so U(0) has this closed form.
pub fn elliptic_k_inv_sqrt2() -> f64 {
    // K(k) = pi / (2 AGM(1, k')), k'^2 = 1 - k^2 = 1/2
    let mut a = 1.0_f64;
    let mut b = (0.5_f64).sqrt();
    for _ in 0..40 {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        if (an - bn).abs() < 1e-17 {
            a = an;
            break;
        }
        a = an;
        b = bn;
    }
    std::f64::consts::PI / (2.0 * a)
}

/// Ground state by damped Newton on the plain central-difference
/// discretization of U'' + (n-1)/r U' + U^p = 0, started from a generic
/// positive cap. Independent of the shooting + finite-volume production
/// path in both the initial guess and the stencil.
pub fn newton_ground_state(params: ProblemParams, nn: usize) -> Result<Vec<f64>> {
    params.require_subcritical()?;
    let n = params.n as f64;
    let p = params.p;
    let h = 1.0 / nn as f64;

    let residual = |u: &[f64]| -> Vec<f64> {
        (0..nn)
            .map(|i| {
                if i == 0 {
                    // ghost symmetry: ΔU(0) = 2n (U_1 - U_0)/h²
                    2.0 * n * (u[1] - u[0]) / (h * h) + sgn_pow(u[0], p)
                } else {
                    let up = if i + 1 < nn { u[i + 1] } else { 0.0 };
                    let um = u[i - 1];
                    let r = i as f64 * h;
                    (up - 2.0 * u[i] + um) / (h * h) + (n - 1.0) / r * (up - um) / (2.0 * h)
                        + sgn_pow(u[i], p)
                }
            })
            .collect()
    };

    for attempt in 0..10 {
        let amp = (1.5f64).powi(attempt) ;
        let mut u: Vec<f64> = (0..nn)
            .map(|i| {
                let r = i as f64 * h;
                amp * (1.0 - r * r)
            })
            .collect();
        let mut ok = false;
        for _ in 0..80 {
            let res = residual(&u);
            let rn = crate::linalg::norm_inf(&res);
            // the 1/h² stencil cannot resolve residuals below its own
            // roundoff floor; accept once we are at that level
            let scale = 1.0 + crate::linalg::norm_inf(&u).powf(p);
            let floor = crate::linalg::norm_inf(&u) * 16.0 * f64::EPSILON / (h * h);
            if rn < (1e-11 * scale).max(floor) {
                ok = true;
                break;
            }
            let mut dl = vec![0.0; nn - 1];
            let mut d = vec![0.0; nn];
            let mut du = vec![0.0; nn - 1];
            for i in 0..nn {
                if i == 0 {
                    d[0] = -2.0 * n / (h * h) + p * u[0].abs().powf(p - 1.0);
                    du[0] = 2.0 * n / (h * h);
                } else {
                    let r = i as f64 * h;
                    d[i] = -2.0 / (h * h) + p * u[i].abs().powf(p - 1.0);
                    dl[i - 1] = 1.0 / (h * h) - (n - 1.0) / (2.0 * h * r);
                    if i + 1 < nn {
                        du[i] = 1.0 / (h * h) + (n - 1.0) / (2.0 * h * r);
                    }
                }
            }
            let lu = tridiag::TridiagLu::factor(&dl, &d, &du)?;
            let step = lu.solve(&res);
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial: Vec<f64> = u
                    .iter()
                    .zip(&step)
                    .map(|(ui, si)| ui - lambda * si)
                    .collect();
                if crate::linalg::norm_inf(&residual(&trial)) < rn {
                    u = trial;
                    accepted = true;
                    break;
                }
                lambda *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if ok && u[0] > 0.05 && u.iter().all(|&v| v > 0.0) {
            let mut full = u;
            full.push(0.0);
            return Ok(full);
        }
    }
    Err(Error::NonConvergence { last_height: 0.0 })
}

/// Eigenvalues of the linearized radial operator for angular mode `l` with
/// an assembly and eigenvalue algorithm both independent of the production
/// path: plain central differences (n = 1), ghost central differences with
/// exact similarity symmetrization (n = 2), or the Liouville normal form
/// g = r f (n = 3, where the transform is regular), all resolved by Sturm
/// bisection.
pub fn mode_eigenvalues_fd(
    u: &[f64],
    params: ProblemParams,
    l: usize,
    count: usize,
    nn: usize,
) -> Result<Vec<f64>> {
    assert_eq!(u.len(), nn + 1);
    let n = params.n;
    let p = params.p;
    let h = 1.0 / nn as f64;
    let pot = |i: usize| -> f64 {
        let centrifugal = (l * (l + n - 2)) as f64;
        let r = i as f64 * h;
        let cf = if i == 0 { 0.0 } else { centrifugal / (r * r) };
        cf - p * u[i].powf(p - 1.0)
    };

    let (d, e) = match n {
        1 => {
            let first = if l == 0 { 0 } else { 1 };
            let m = nn - first;
            let mut d = vec![0.0; m];
            let mut e = vec![-1.0 / (h * h); m - 1];
            for (idx, i) in (first..nn).enumerate() {
                d[idx] = 2.0 / (h * h) + pot(i);
            }
            if l == 0 {
                // ghost row at r = 0 couples with weight 2; exact similarity
                // symmetrization replaces the pair (-2/h², -1/h²) by -sqrt2/h²
                e[0] = -(2.0f64).sqrt() / (h * h);
            }
            (d, e)
        }
        2 => {
            let first = if l == 0 { 0 } else { 1 };
            let m = nn - first;
            let mut sub = vec![0.0; m - 1];
            let mut sup = vec![0.0; m - 1];
            let mut d = vec![0.0; m];
            for (idx, i) in (first..nn).enumerate() {
                if i == 0 {
                    d[idx] = 2.0 * (n as f64) / (h * h) + pot(0);
                    sup[idx] = -2.0 * (n as f64) / (h * h);
                } else {
                    let r = i as f64 * h;
                    d[idx] = 2.0 / (h * h) + pot(i);
                    if idx + 1 < m {
                        sup[idx] = -1.0 / (h * h) - 1.0 / (2.0 * h * r);
                    }
                    if idx > 0 {
                        sub[idx - 1] = -1.0 / (h * h) + 1.0 / (2.0 * h * r);
                    }
                }
            }
            let e: Vec<f64> = sub
                .iter()
                .zip(&sup)
                .map(|(a, b)| {
                    let prod = a * b;
                    if prod < 0.0 {
                        f64::NAN
                    } else {
                        -prod.sqrt()
                    }
                })
                .collect();
            if e.iter().any(|v| v.is_nan()) {
                return Err(Error::EigenNonConvergence(
                    "similarity symmetrization lost positivity".into(),
                ));
            }
            (d, e)
        }
        3 => {
            let m = nn - 1;
            let mut d = vec![0.0; m];
            let e = vec![-1.0 / (h * h); m - 1];
            for i in 1..nn {
                d[i - 1] = 2.0 / (h * h) + pot(i);
            }
            (d, e)
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "oracle eigensolver supports n <= 3, got n = {n}"
            )))
        }
    };

    Ok((0..count.min(d.len()))
        .map(|k| tridiag::eigenvalue_by_bisection(&d, &e, k, 1e-13))
        .collect())
}

/// Richardson extrapolation of a second-order pair (value at h, value at h/2).
pub fn richardson_second_order(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

/// Brute-force enumeration of lattice values μ_i/ε² + λ_j below `cutoff`,
/// with multiplicities expanded, sorted ascending.
pub fn lattice_brute_force(
    mu: &[(f64, usize)],
    lambda: &[(f64, usize)],
    eps: f64,
    cutoff: f64,
) -> Vec<f64> {
    let mut out = Vec::new();
    for &(m, mm) in mu {
        for &(lam, lm) in lambda {
            let v = m / (eps * eps) + lam;
            if v < cutoff {
                for _ in 0..(mm * lm) {
                    out.push(v);
                }
            }
        }
    }
    out.sort_by(f64::total_cmp);
    out
}

/// Closed-form tube geometry of the planar circle of radius `R` in
/// arclength coordinates: metric diag((1+z/R)², 1), volume factor 1 + z/R,
/// correction operator D = ((1+z/R)^{-2} - 1) ∂_t² + (1/R)(1+z/R)^{-1} ∂_z.
pub struct CircleClosedForm {
    pub radius: f64,
}

impl CircleClosedForm {
    pub fn metric_tt(&self, z: f64) -> f64 {
        let w = 1.0 + z / self.radius;
        w * w
    }

    pub fn volume_factor(&self, z: f64) -> f64 {
        1.0 + z / self.radius
    }

    pub fn d_coeff_tt(&self, z: f64) -> f64 {
        let w = 1.0 + z / self.radius;
        1.0 / (w * w) - 1.0
    }

    pub fn d_coeff_z1(&self, z: f64) -> f64 {
        1.0 / (self.radius * (1.0 + z / self.radius))
    }
}

/// Resolvent of the fiber operator by explicit eigen-expansion (for
/// cross-checking the factored production solve): x = Σ (v_j·rhs / λ_j) v_j.
pub fn fiber_eigenexpansion_solve(d: &[f64], e: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let (vals, vecs) = tridiag::eigen(d, e)?;
    let mut x = vec![0.0; rhs.len()];
    for (lam, v) in vals.iter().zip(&vecs) {
        let c = crate::linalg::dot(v, rhs) / lam;
        crate::linalg::axpy(c, v, &mut x);
    }
    Ok(x)
}

fn sgn_pow(u: f64, p: f64) -> f64 {
    u.abs().powf(p - 1.0) * u
}
