//! Dense symmetric eigendecomposition (Householder reduction + implicit QL)
//! and a small partial-pivoting LU for square systems.

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Clone, Debug)]
pub struct DenseMat {
    pub n: usize,
    pub a: Vec<f64>,
}

impl DenseMat {
    pub fn zeros(n: usize) -> Self {
        Self { n, a: vec![0.0; n * n] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
    }

    #[inline]
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] += v;
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = super::dot(&self.a[i * n..(i + 1) * n], x);
        }
        y
    }

    pub fn symmetry_defect(&self) -> f64 {
        let mut m = 0.0f64;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                m = m.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        m
    }
}

/// Householder tridiagonalization; `z` accumulates the orthogonal transform
/// when eigenvectors are wanted.
fn tred2(a: &mut DenseMat, want_vectors: bool) -> (Vec<f64>, Vec<f64>) {
    let n = a.n;
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = (0..=l).map(|k| a.get(i, k).abs()).sum();
            if scale == 0.0 {
                e[i] = a.get(i, l);
            } else {
                for k in 0..=l {
                    let v = a.get(i, k) / scale;
                    a.set(i, k, v);
                    h += v * v;
                }
                let mut f = a.get(i, l);
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                a.set(i, l, f - g);
                f = 0.0;
                for j in 0..=l {
                    if want_vectors {
                        a.set(j, i, a.get(i, j) / h);
                    }
                    let mut g = 0.0;
                    for k in 0..=j {
                        g += a.get(j, k) * a.get(i, k);
                    }
                    for k in (j + 1)..=l {
                        g += a.get(k, j) * a.get(i, k);
                    }
                    e[j] = g / h;
                    f += e[j] * a.get(i, j);
                }
                let hh = f / (h + h);
                for j in 0..=l {
                    let f = a.get(i, j);
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        let v = a.get(j, k) - (f * e[k] + g * a.get(i, k));
                        a.set(j, k, v);
                    }
                }
            }
        } else {
            e[i] = a.get(i, l);
        }
        d[i] = h;
    }
    if want_vectors {
        d[0] = 0.0;
    }
    e[0] = 0.0;
    for i in 0..n {
        if want_vectors {
            if d[i] != 0.0 {
                for j in 0..i {
                    let mut g = 0.0;
                    for k in 0..i {
                        g += a.get(i, k) * a.get(k, j);
                    }
                    for k in 0..i {
                        let v = a.get(k, j) - g * a.get(k, i);
                        a.set(k, j, v);
                    }
                }
            }
            d[i] = a.get(i, i);
            a.set(i, i, 1.0);
            for j in 0..i {
                a.set(j, i, 0.0);
                a.set(i, j, 0.0);
            }
        } else {
            d[i] = a.get(i, i);
        }
    }
    (d, e)
}

/// Eigenvalues (ascending) of a symmetric matrix. The input is consumed as scratch.
pub fn symmetric_eigenvalues(mut a: DenseMat) -> Result<Vec<f64>> {
    let (d, e) = tred2(&mut a, false);
    let sub: Vec<f64> = e[1..].to_vec();
    super::tridiag::eigenvalues(&d, &sub)
}

/// Full symmetric eigendecomposition: ascending values and unit eigenvectors
/// (`vecs[j]` belongs to `vals[j]`).
pub fn symmetric_eigen(mut a: DenseMat) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
    let n = a.n;
    let (mut d, mut e) = tred2(&mut a, true);
    // implicit QL updating the accumulated transform stored in `a`
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
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
            if iter > 60 {
                return Err(Error::EigenNonConvergence("dense QL budget exhausted".into()));
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
                for k in 0..n {
                    f = a.get(k, i + 1);
                    a.set(k, i + 1, s * a.get(k, i) + c * f);
                    a.set(k, i, c * a.get(k, i) - s * f);
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
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| d[x].total_cmp(&d[y]));
    let vals: Vec<f64> = order.iter().map(|&j| d[j]).collect();
    let vecs: Vec<Vec<f64>> = order
        .iter()
        .map(|&j| (0..n).map(|k| a.get(k, j)).collect())
        .collect();
    Ok((vals, vecs))
}

/// Partial-pivoting LU of a square matrix, for repeated solves.
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl DenseLu {
    pub fn factor(m: &DenseMat) -> Result<Self> {
        let n = m.n;
        let mut lu = m.a.clone();
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut pk = k;
            let mut maxv = lu[k * n + k].abs();
            for i in (k + 1)..n {
                let v = lu[i * n + k].abs();
                if v > maxv {
                    maxv = v;
                    pk = i;
                }
            }
            if maxv == 0.0 {
                return Err(Error::LinearSolve(format!("singular at column {k}")));
            }
            if pk != k {
                for j in 0..n {
                    lu.swap(k * n + j, pk * n + j);
                }
                piv.swap(k, pk);
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                for j in (k + 1)..n {
                    lu[i * n + j] -= f * lu[k * n + j];
                }
            }
        }
        Ok(Self { n, lu, piv })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in (i + 1)..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_symmetric(n: usize, seed: u64) -> DenseMat {
        let mut m = DenseMat::zeros(n);
        let mut state = seed;
        let mut next = move || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        for i in 0..n {
            for j in 0..=i {
                let v = next();
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        m
    }

    #[test]
    fn dense_eigen_reconstructs_matrix() {
        let n = 24;
        let m = random_symmetric(n, 17);
        let (vals, vecs) = symmetric_eigen(m.clone()).unwrap();
        // residual A v - lambda v
        for j in 0..n {
            let av = m.matvec(&vecs[j]);
            for i in 0..n {
                assert!((av[i] - vals[j] * vecs[j][i]).abs() < 1e-10);
            }
        }
        // orthonormality
        for j in 0..n {
            for k in j..n {
                let d = crate::linalg::dot(&vecs[j], &vecs[k]);
                let expect = if j == k { 1.0 } else { 0.0 };
                assert!((d - expect).abs() < 1e-10);
            }
        }
        // eigenvalue-only path agrees
        let vals2 = symmetric_eigenvalues(m).unwrap();
        for (a, b) in vals.iter().zip(&vals2) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn lu_solves_system() {
        let n = 12;
        let m = random_symmetric(n, 99);
        let lu = DenseLu::factor(&m).unwrap();
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 - 3.0) * 0.5).collect();
        let b = m.matvec(&x_true);
        let x = lu.solve(&b);
        for (a, b) in x.iter().zip(&x_true) {
            assert!((a - b).abs() < 1e-9);
        }
    }
}
