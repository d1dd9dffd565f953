//! Symmetric tridiagonal eigenproblems (implicit QL, Sturm counts, bisection,
//! inverse iteration) and pivoted tridiagonal LU solves.

use crate::error::{Error, Result};

const MAX_QL_SWEEPS: usize = 60;

/// All eigenvalues (ascending) of the symmetric tridiagonal matrix with
/// diagonal `d` and subdiagonal `e` (`e[i]` couples rows `i` and `i+1`).
/// Implicit QL with Wilkinson shifts.
pub fn eigenvalues(d: &[f64], e: &[f64]) -> Result<Vec<f64>> {
    let (vals, _) = ql_implicit(d, e, false)?;
    Ok(vals)
}

/// Eigenvalues and eigenvectors; column `j` of the returned matrix
/// (`vecs[j]`) is the unit eigenvector of `vals[j]`.
pub fn eigen(d: &[f64], e: &[f64]) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let (vals, vecs) = ql_implicit(d, e, true)?;
    Ok((vals, vecs.expect("vectors requested")))
}

fn ql_implicit(d0: &[f64], e0: &[f64], want_vectors: bool) -> Result<(Vec<f64>, Option<Vec<Vec<f64>>>)> {
    let n = d0.len();
    assert!(e0.len() + 1 >= n, "subdiagonal too short");
    let mut d = d0.to_vec();
    // e[i] couples (i, i+1); pad a trailing zero used as workspace
    let mut e: Vec<f64> = (0..n).map(|i| if i + 1 < n { e0[i] } else { 0.0 }).collect();
    // z[k] holds the k-th row of the accumulated rotation matrix
    let mut z: Option<Vec<Vec<f64>>> = if want_vectors {
        let mut id = vec![vec![0.0; n]; n];
        for (k, row) in id.iter_mut().enumerate() {
            row[k] = 1.0;
        }
        Some(id)
    } else {
        None
    };

    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_SWEEPS {
                return Err(Error::EigenNonConvergence(format!(
                    "QL sweep budget exhausted at eigenvalue {l} of {n}"
                )));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0_f64, 1.0_f64);
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_mut() {
                    for row in z.iter_mut() {
                        f = row[i + 1];
                        row[i + 1] = s * row[i] + c * f;
                        row[i] = c * row[i] - s * f;
                    }
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }

    // sort ascending, permuting eigenvector columns alongside
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let vals: Vec<f64> = order.iter().map(|&j| d[j]).collect();
    let vecs = z.map(|z| {
        order
            .iter()
            .map(|&j| z.iter().map(|row| row[j]).collect::<Vec<f64>>())
            .collect::<Vec<_>>()
    });
    Ok((vals, vecs))
}

/// Number of eigenvalues strictly below `sigma` (Sturm / LDL^T sign count).
pub fn count_below(d: &[f64], e: &[f64], sigma: f64) -> usize {
    let n = d.len();
    let mut count = 0usize;
    let mut q = 0.0_f64;
    for i in 0..n {
        let coupling = if i == 0 { 0.0 } else { e[i - 1] };
        let mut denom = q;
        if i > 0 && denom == 0.0 {
            denom = f64::EPSILON * (coupling.abs() + 1.0);
        }
        q = if i == 0 {
            d[0] - sigma
        } else {
            d[i] - sigma - coupling * coupling / denom
        };
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `k`-th eigenvalue (ascending, 0-based) located by Sturm bisection;
/// independent of the QL path.
pub fn eigenvalue_by_bisection(d: &[f64], e: &[f64], k: usize, tol: f64) -> f64 {
    let n = d.len();
    assert!(k < n);
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { e[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - left - right);
        hi = hi.max(d[i] + left + right);
    }
    let mut width = hi - lo;
    while width > tol * (1.0 + lo.abs().max(hi.abs())) {
        let mid = 0.5 * (lo + hi);
        if count_below(d, e, mid) <= k {
            lo = mid;
        } else {
            hi = mid;
        }
        width = hi - lo;
    }
    0.5 * (lo + hi)
}

/// Eigenvector by inverse iteration at the (converged) eigenvalue `lambda`.
/// `orthogonalize_against` handles clustered eigenvalues.
pub fn eigenvector(
    d: &[f64],
    e: &[f64],
    lambda: f64,
    orthogonalize_against: &[Vec<f64>],
) -> Result<Vec<f64>> {
    let n = d.len();
    let scale = d.iter().fold(0.0_f64, |m, v| m.max(v.abs())).max(1.0);
    // deterministic start, biased away from exact symmetry
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.3 * ((i as f64) * 0.7391).sin())
        .collect();
    for _ in 0..4 {
        for prev in orthogonalize_against {
            let c = super::dot(&x, prev);
            super::axpy(-c, prev, &mut x);
        }
        let nrm = super::norm2(&x);
        if nrm == 0.0 {
            return Err(Error::EigenNonConvergence("inverse iteration start degenerate".into()));
        }
        super::scale(1.0 / nrm, &mut x);
        // shifted solve; tiny perturbation keeps the factorization regular
        let shifted: Vec<f64> = d.iter().map(|&v| v - lambda - 1e-14 * scale).collect();
        let lu = TridiagLu::factor(e, &shifted, e)?;
        x = lu.solve(&x);
        let nrm = super::norm2(&x);
        super::scale(1.0 / nrm, &mut x);
    }
    for prev in orthogonalize_against {
        let c = super::dot(&x, prev);
        super::axpy(-c, prev, &mut x);
    }
    let nrm = super::norm2(&x);
    super::scale(1.0 / nrm, &mut x);
    Ok(x)
}

/// LU factorization with partial pivoting of a (general) tridiagonal matrix,
/// dgtsv-style. Reusable over many right-hand sides.
pub struct TridiagLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    /// `dl`, `d`, `du`: sub/main/super diagonals (`dl[i]` couples row i+1 to
    /// column i, `du[i]` row i to column i+1).
    pub fn factor(dl0: &[f64], d0: &[f64], du0: &[f64]) -> Result<Self> {
        let n = d0.len();
        let mut dl = dl0.to_vec();
        let mut d = d0.to_vec();
        let mut du = du0.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if dl[i].abs() <= d[i].abs() {
                if d[i] == 0.0 {
                    return Err(Error::LinearSolve(format!("zero pivot at row {i}")));
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
                if i + 2 < n {
                    du2[i] = 0.0;
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let tmp = d[i + 1];
                d[i + 1] = du[i] - fact * tmp;
                du[i] = tmp;
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] = -fact * du2[i];
                }
                swapped[i] = true;
            }
        }
        if n > 0 && d[n - 1] == 0.0 {
            return Err(Error::LinearSolve("zero pivot at last row".into()));
        }
        Ok(Self { dl, d, du, du2, swapped })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut x = b.to_vec();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                x.swap(i, i + 1);
            }
            let (head, tail) = x.split_at_mut(i + 1);
            tail[0] -= self.dl[i] * head[i];
        }
        if n == 0 {
            return x;
        }
        x[n - 1] /= self.d[n - 1];
        if n >= 2 {
            x[n - 2] = (x[n - 2] - self.du[n - 2] * x[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            x[i] = (x[i] - self.du[i] * x[i + 1] - self.du2[i] * x[i + 2]) / self.d[i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian_1d(n: usize) -> (Vec<f64>, Vec<f64>) {
        // Dirichlet second-difference matrix: eigenvalues 2 - 2 cos(k pi h)
        (vec![2.0; n], vec![-1.0; n - 1])
    }

    #[test]
    fn ql_matches_laplacian_closed_form() {
        let n = 64;
        let (d, e) = laplacian_1d(n);
        let vals = eigenvalues(&d, &e).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-12, "k={k}: {v} vs {exact}");
        }
    }

    #[test]
    fn bisection_agrees_with_ql() {
        let n = 40;
        let d: Vec<f64> = (0..n).map(|i| (i as f64 * 0.913).sin() * 3.0).collect();
        let e: Vec<f64> = (0..n - 1).map(|i| 0.5 + (i as f64 * 0.37).cos().abs()).collect();
        let vals = eigenvalues(&d, &e).unwrap();
        for k in [0usize, 7, 20, n - 1] {
            let v = eigenvalue_by_bisection(&d, &e, k, 1e-13);
            assert!((v - vals[k]).abs() < 1e-10, "k={k}");
        }
        // Sturm count consistency
        let mid = 0.5 * (vals[9] + vals[10]);
        assert_eq!(count_below(&d, &e, mid), 10);
    }

    #[test]
    fn eigenvectors_satisfy_residual() {
        let n = 30;
        let (d, e) = laplacian_1d(n);
        let (vals, vecs) = eigen(&d, &e).unwrap();
        for j in [0usize, 5, n - 1] {
            let v = &vecs[j];
            for i in 0..n {
                let mut av = d[i] * v[i];
                if i > 0 {
                    av += e[i - 1] * v[i - 1];
                }
                if i + 1 < n {
                    av += e[i] * v[i + 1];
                }
                assert!((av - vals[j] * v[i]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn inverse_iteration_recovers_vector() {
        let n = 50;
        let (d, e) = laplacian_1d(n);
        let vals = eigenvalues(&d, &e).unwrap();
        let v = eigenvector(&d, &e, vals[0], &[]).unwrap();
        let h = std::f64::consts::PI / (n + 1) as f64;
        // ground mode of the discrete Laplacian is sin(k pi h), sign-definite
        let sign = v[n / 2].signum();
        for (i, vi) in v.iter().enumerate() {
            let exact = ((i + 1) as f64 * h).sin();
            let nrm: f64 = (0..n).map(|k| ((k + 1) as f64 * h).sin().powi(2)).sum::<f64>().sqrt();
            assert!((sign * vi - exact / nrm).abs() < 1e-8);
        }
    }

    #[test]
    fn pivoted_tridiagonal_solve() {
        // indefinite, pivoting required for stability
        let d = vec![1e-14, 2.0, -3.0, 0.5];
        let dl = vec![1.0, -2.0, 4.0];
        let du = vec![3.0, 1.0, -1.0];
        let lu = TridiagLu::factor(&dl, &d, &du).unwrap();
        let x_true = vec![1.0, -2.0, 3.0, 0.25];
        // b = A x
        let b = vec![
            d[0] * x_true[0] + du[0] * x_true[1],
            dl[0] * x_true[0] + d[1] * x_true[1] + du[1] * x_true[2],
            dl[1] * x_true[1] + d[2] * x_true[2] + du[2] * x_true[3],
            dl[2] * x_true[2] + d[3] * x_true[3],
        ];
        let x = lu.solve(&b);
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-10);
        }
    }
}
