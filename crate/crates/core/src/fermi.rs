//! Fermi-coordinate geometry of the tube: the metric expansion
//! `Φ*g = ḡ + Σ z_i (h̊^i + 2 ℓ̊^i) + Σ z_i z_j k̊^{ij}`, the volume factor
//! `a = √det g / √det ḡ`, and the Laplacian split `Δ = Δ_ḡ + D` with
//! `D = Σ z_i D^(2)_i + D^(1)`.
//!
//! For k = 1 the tensors reduce to per-t scalars
//! `h̊^i = 2 Y'·(e^i)'`, `k̊^{ij} = (e^i)'·(e^j)'`, `ω_{ij} = (e^i)'·e^j`,
//! and the metric is polynomial in z, so z-derivatives are exact while
//! t-derivatives are spectral.

use crate::error::{Error, Result};
use crate::grid::{FiberKind, TubeField, TubeGrid};
use crate::linalg::{self, spectral};
use crate::manifold::{derive_components, EmbeddedCurve};

const DET_FLOOR: f64 = 1e-10;

/// Metric expansion data over a tube grid.
#[derive(Clone, Debug)]
pub struct FermiExpansion {
    pub grid: TubeGrid,
    pub normal_dim: usize,
    /// g̊(t) = |Y'(t)|², per t-node
    pub base_tt: Vec<f64>,
    /// h̊^i(t) = 2 Y'·(e^i)', layout [n_t][n]
    pub h_ring: Vec<Vec<f64>>,
    /// k̊^{ij}(t) = (e^i)'·(e^j)', layout [n_t][n*n]
    pub k_ring: Vec<Vec<f64>>,
    /// ℓ̊ entries ω_{ij}(t) = (e^i)'·e^j, layout [n_t][n*n]
    pub l_ring: Vec<Vec<f64>>,
    /// max |ω| across the grid; nonzero only for holonomy-corrected frames
    pub twist: f64,

    // grid-sampled fields (fiber axis = span(e^1) for Line grids)
    pub metric_tt: Vec<f64>,
    pub sqrt_det: Vec<f64>,
    pub volume_factor: Vec<f64>,
    /// ∂_t g_tt on the grid (spectral in t)
    pub dt_g_tt: Vec<f64>,
    /// ∂_z g_tt on the grid (exact polynomial derivative)
    pub dz_g_tt: Vec<f64>,
    /// ∂_t g̊ per t-node
    pub dt_base_tt: Vec<f64>,
    pub min_det: f64,
    pub curved: bool,
}

impl FermiExpansion {
    /// Product-metric control geometry: g ≡ ḡ, a ≡ 1, D ≡ 0 (a straight
    /// tube over a flat circle of the given period).
    pub fn flat(grid: &TubeGrid) -> Self {
        let n_t = grid.n_t;
        let nz = grid.n_z();
        let n = grid.fiber_dim();
        Self {
            grid: grid.clone(),
            normal_dim: n,
            base_tt: vec![1.0; n_t],
            h_ring: vec![vec![0.0; n]; n_t],
            k_ring: vec![vec![0.0; n * n]; n_t],
            l_ring: vec![vec![0.0; n * n]; n_t],
            twist: 0.0,
            metric_tt: vec![1.0; n_t * nz],
            sqrt_det: vec![1.0; n_t * nz],
            volume_factor: vec![1.0; n_t * nz],
            dt_g_tt: vec![0.0; n_t * nz],
            dz_g_tt: vec![0.0; n_t * nz],
            dt_base_tt: vec![0.0; n_t],
            min_det: 1.0,
            curved: false,
        }
    }

    /// Assemble the expansion for a framed closed curve on a Line grid
    /// (fiber dimension 1). The grid's t-resolution must match the curve
    /// sampling.
    pub fn from_curve(curve: &EmbeddedCurve, grid: &TubeGrid) -> Result<Self> {
        if grid.n_t != curve.n_samples() {
            return Err(Error::GridMismatch(format!(
                "grid has {} t-nodes, curve has {} samples",
                grid.n_t,
                curve.n_samples()
            )));
        }
        if (grid.period - curve.period).abs() > 1e-12 * curve.period {
            return Err(Error::GridMismatch("grid period differs from curve period".into()));
        }
        let n = curve.normal_dim();
        if !matches!(grid.fiber, FiberKind::Line) || n != 1 {
            return Err(Error::InvalidParameter(
                "grid-sampled Fermi fields need a Line fiber over a planar curve; \
                 use the per-t tensors and closed-form evaluators for higher codimension"
                    .into(),
            ));
        }

        let tensors = CurveTensors::compute(curve);
        let n_t = grid.n_t;
        let nz = grid.n_z();
        let mut metric_tt = vec![0.0; n_t * nz];
        let mut sqrt_det = vec![0.0; n_t * nz];
        let mut volume_factor = vec![0.0; n_t * nz];
        let mut dt_g_tt = vec![0.0; n_t * nz];
        let mut dz_g_tt = vec![0.0; n_t * nz];
        let mut min_det = f64::INFINITY;
        let mut min_node = (0usize, 0usize);
        for a in 0..n_t {
            for b in 0..nz {
                let z = grid.eps * grid.x[b];
                let g_tt = tensors.base[a] + z * tensors.h[a][0] + z * z * tensors.k[a][0];
                let det = g_tt; // g_tz = 0, g_zz = 1 for n = 1
                if det < min_det {
                    min_det = det;
                    min_node = (a, b);
                }
                metric_tt[a * nz + b] = g_tt;
                sqrt_det[a * nz + b] = det.max(0.0).sqrt();
                volume_factor[a * nz + b] = (det.max(0.0) / tensors.base[a]).sqrt();
                dt_g_tt[a * nz + b] =
                    tensors.dt_base[a] + z * tensors.dt_h[a][0] + z * z * tensors.dt_k[a][0];
                dz_g_tt[a * nz + b] = tensors.h[a][0] + 2.0 * z * tensors.k[a][0];
            }
        }
        if min_det < DET_FLOOR {
            return Err(Error::TubeTooWide {
                it: min_node.0,
                iz: min_node.1,
                det: min_det,
            });
        }
        Ok(Self {
            grid: grid.clone(),
            normal_dim: n,
            base_tt: tensors.base,
            h_ring: tensors.h,
            k_ring: tensors.k,
            l_ring: tensors.omega,
            twist: tensors.twist,
            metric_tt,
            sqrt_det,
            volume_factor,
            dt_g_tt,
            dz_g_tt,
            dt_base_tt: tensors.dt_base,
            min_det,
            curved: true,
        })
    }

    #[inline]
    pub fn idx(&self, a: usize, b: usize) -> usize {
        a * self.grid.n_z() + b
    }

    /// Closed-form metric coefficient g_tt at t-node `a` and arbitrary
    /// normal vector `z` (length = normal_dim); exact in z.
    pub fn metric_tt_at(&self, a: usize, z: &[f64]) -> f64 {
        let n = self.normal_dim;
        let mut g = self.base_tt[a];
        for i in 0..n {
            g += z[i] * self.h_ring[a][i];
            for j in 0..n {
                g += z[i] * z[j] * self.k_ring[a][i * n + j];
            }
        }
        g
    }

    /// det g at (a, z): g_tt - |w|² with w_j = Σ_i z_i ω_{ij}.
    pub fn det_at(&self, a: usize, z: &[f64]) -> f64 {
        let n = self.normal_dim;
        let mut w2 = 0.0;
        for j in 0..n {
            let mut w = 0.0;
            for i in 0..n {
                w += z[i] * self.l_ring[a][i * n + j];
            }
            w2 += w * w;
        }
        self.metric_tt_at(a, z) - w2
    }

    pub fn volume_factor_at(&self, a: usize, z: &[f64]) -> f64 {
        (self.det_at(a, z).max(0.0) / self.base_tt[a]).sqrt()
    }

    /// max |a - 1| / |z| over the grid (finite by the Lemma 3.1 expansion).
    pub fn volume_deviation_rate(&self) -> f64 {
        let nz = self.grid.n_z();
        let mut worst = 0.0f64;
        for a in 0..self.grid.n_t {
            for b in 0..nz {
                let z = (self.grid.eps * self.grid.x[b]).abs();
                if z > 1e-14 {
                    worst = worst.max((self.volume_factor[a * nz + b] - 1.0).abs() / z);
                }
            }
        }
        worst
    }
}

/// Per-t tensor data of Lemma 3.1 for k = 1 curves.
struct CurveTensors {
    base: Vec<f64>,
    dt_base: Vec<f64>,
    h: Vec<Vec<f64>>,
    dt_h: Vec<Vec<f64>>,
    k: Vec<Vec<f64>>,
    dt_k: Vec<Vec<f64>>,
    omega: Vec<Vec<f64>>,
    twist: f64,
}

impl CurveTensors {
    fn compute(curve: &EmbeddedCurve) -> Self {
        let n_t = curve.n_samples();
        let n = curve.normal_dim();
        let m = curve.ambient_dim;
        let period = curve.period;
        let yp = derive_components(&curve.points, period, 1);
        // frame derivatives: differentiate each frame vector's components
        let mut ep: Vec<Vec<Vec<f64>>> = vec![vec![vec![0.0; m]; n]; n_t];
        for i in 0..n {
            let rows: Vec<Vec<f64>> = (0..n_t).map(|a| curve.frame[a][i].clone()).collect();
            let d = derive_components(&rows, period, 1);
            for a in 0..n_t {
                ep[a][i] = d[a].clone();
            }
        }

        let mut base = vec![0.0; n_t];
        let mut h = vec![vec![0.0; n]; n_t];
        let mut k = vec![vec![0.0; n * n]; n_t];
        let mut omega = vec![vec![0.0; n * n]; n_t];
        let mut twist = 0.0f64;
        for a in 0..n_t {
            base[a] = linalg::dot(&yp[a], &yp[a]);
            for i in 0..n {
                h[a][i] = 2.0 * linalg::dot(&yp[a], &ep[a][i]);
                for j in 0..n {
                    k[a][i * n + j] = linalg::dot(&ep[a][i], &ep[a][j]);
                    let w = linalg::dot(&ep[a][i], &curve.frame[a][j]);
                    omega[a][i * n + j] = w;
                    twist = twist.max(w.abs());
                }
            }
        }
        let dt_base = spectral::periodic_derivative(&base, period, 1);
        let dt_of = |rows: &Vec<Vec<f64>>, len: usize| -> Vec<Vec<f64>> {
            let mut out = vec![vec![0.0; len]; n_t];
            for c in 0..len {
                let comp: Vec<f64> = rows.iter().map(|r| r[c]).collect();
                let d = spectral::periodic_derivative(&comp, period, 1);
                for a in 0..n_t {
                    out[a][c] = d[a];
                }
            }
            out
        };
        let dt_h = dt_of(&h, n);
        let dt_k = dt_of(&k, n * n);
        Self { base, dt_base, h, dt_h, k, dt_k, omega, twist }
    }
}

/// Coefficient fields of the correction operator
/// `D = c_tt ∂_t² + d_t ∂_t + d_z ∂_z` over the grid (the pure
/// second-order z-part is identically zero for untwisted frames — the
/// fiber metric is exactly Euclidean; the measured defect is recorded).
#[derive(Clone, Debug)]
pub struct CorrectionOperator {
    pub n_t: usize,
    pub n_z: usize,
    pub eps: f64,
    /// second-order ∂_t² coefficient g^tt - ḡ^tt; vanishes on Λ
    pub c_tt: Vec<f64>,
    /// per-z-factor second-order coefficient: c_tt = z · q_tt (Lemma 3.2
    /// structure); at z = 0 the exact derivative value
    pub q_tt: Vec<f64>,
    /// first-order ∂_t coefficient
    pub d_t: Vec<f64>,
    /// first-order ∂_z coefficient (signed z for Line grids)
    pub d_z: Vec<f64>,
    /// max |g^{z_i z_j} - δ| over the grid
    pub second_order_z_defect: f64,
}

/// Split Δ = Δ_ḡ + D: subtract the product-metric Laplacian from the
/// coordinate formula and return D's coefficient fields.
pub fn laplacian_split(exp: &FermiExpansion) -> Result<CorrectionOperator> {
    let grid = &exp.grid;
    let n_t = grid.n_t;
    let nz = grid.n_z();
    if exp.min_det < DET_FLOOR {
        return Err(Error::SingularMetric { det: exp.min_det });
    }
    let mut c_tt = vec![0.0; n_t * nz];
    let mut q_tt = vec![0.0; n_t * nz];
    let mut d_t = vec![0.0; n_t * nz];
    let mut d_z = vec![0.0; n_t * nz];
    for a in 0..n_t {
        let base = exp.base_tt[a];
        let dt_base = exp.dt_base_tt[a];
        // b̊^t = ∂_t ḡ^tt + ḡ^tt ∂_t ln √ḡ = -∂_t ḡ / ḡ² + ∂_t ḡ / (2 ḡ²)
        let b_base = -dt_base / (base * base) + dt_base / (2.0 * base * base);
        for b in 0..nz {
            let id = a * nz + b;
            let z = grid.eps * grid.x[b];
            let g = exp.metric_tt[id];
            let dzg = exp.dz_g_tt[id];
            let dtg = exp.dt_g_tt[id];
            c_tt[id] = 1.0 / g - 1.0 / base;
            q_tt[id] = if z.abs() > 1e-12 * grid.eps {
                c_tt[id] / z
            } else {
                // L'Hôpital at the zero section: ∂_z(1/g) = -∂_z g / g²
                -dzg / (g * g)
            };
            // b^t = (1/√G) ∂_t(√G g^tt) with G = g_tt here
            let b_t = -dtg / (g * g) + dtg / (2.0 * g * g);
            d_t[id] = b_t - b_base;
            // b^z = ∂_z ln √G
            d_z[id] = dzg / (2.0 * g);
        }
    }
    // fiber metric is exactly Euclidean when the frame is untwisted;
    // |g^{zz} - 1| = w²/(g q)-type corrections otherwise
    let defect = if exp.twist == 0.0 {
        0.0
    } else {
        let mut worst = 0.0f64;
        let n = exp.normal_dim;
        for a in 0..n_t {
            for b in 0..nz {
                let z = grid.eps * grid.x[b];
                let zv = vec![z; 1.max(n.min(1))];
                let q = exp.det_at(a, &zv);
                let w2 = exp.metric_tt_at(a, &zv) - q;
                worst = worst.max(w2 / q.max(DET_FLOOR));
            }
        }
        worst
    };
    Ok(CorrectionOperator {
        n_t,
        n_z: nz,
        eps: grid.eps,
        c_tt,
        q_tt,
        d_t,
        d_z,
        second_order_z_defect: defect,
    })
}

impl CorrectionOperator {
    /// Apply D with second-order central stencils (periodic in t).
    /// Boundary fiber rows are left untouched (filled with zeros).
    pub fn apply(&self, grid: &TubeGrid, f: &TubeField) -> Result<TubeField> {
        f.matches(grid)?;
        let nz = self.n_z;
        let ht = grid.h_t();
        let hz = grid.eps * grid.h_x();
        let mut out = TubeField::zeros(grid);
        for a in 0..self.n_t {
            let ap = (a + 1) % self.n_t;
            let am = (a + self.n_t - 1) % self.n_t;
            for b in grid.interior_z() {
                let id = a * nz + b;
                let ftt = (f.get(ap, b) - 2.0 * f.get(a, b) + f.get(am, b)) / (ht * ht);
                let ft = (f.get(ap, b) - f.get(am, b)) / (2.0 * ht);
                let fz = match grid.fiber {
                    FiberKind::Line => (f.get(a, b + 1) - f.get(a, b - 1)) / (2.0 * hz),
                    FiberKind::Radial { .. } => {
                        if b == 0 {
                            0.0
                        } else {
                            (f.get(a, b + 1) - f.get(a, b - 1)) / (2.0 * hz)
                        }
                    }
                };
                out.set(a, b, self.c_tt[id] * ftt + self.d_t[id] * ft + self.d_z[id] * fz);
            }
        }
        Ok(out)
    }

    pub fn is_identically_zero(&self, tol: f64) -> bool {
        linalg::norm_inf(&self.c_tt) <= tol
            && linalg::norm_inf(&self.d_t) <= tol
            && linalg::norm_inf(&self.d_z) <= tol
    }
}

/// Manifold part Δ_g̊ = ḡ^tt ∂_t² + b̊ ∂_t with second-order periodic
/// stencils (vanishes identically on t-independent fields).
pub fn apply_manifold_laplacian(exp: &FermiExpansion, f: &TubeField) -> Result<TubeField> {
    let grid = &exp.grid;
    f.matches(grid)?;
    let ht = grid.h_t();
    let mut out = TubeField::zeros(grid);
    for a in 0..grid.n_t {
        let ap = (a + 1) % grid.n_t;
        let am = (a + grid.n_t - 1) % grid.n_t;
        let base = exp.base_tt[a];
        let dt_base = exp.dt_base_tt[a];
        let b_base = -dt_base / (2.0 * base * base);
        for b in grid.interior_z() {
            let ftt = (f.get(ap, b) - 2.0 * f.get(a, b) + f.get(am, b)) / (ht * ht);
            let ft = (f.get(ap, b) - f.get(am, b)) / (2.0 * ht);
            out.set(a, b, ftt / base + b_base * ft);
        }
    }
    Ok(out)
}

/// Fiber part Δ_{g_z} = ε^{-2} Δ_x; the rescaled stencil matches the radial
/// collocation scheme node for node.
pub fn apply_fiber_laplacian(grid: &TubeGrid, f: &TubeField) -> Result<TubeField> {
    f.matches(grid)?;
    let hx = grid.h_x();
    let eps2 = grid.eps * grid.eps;
    let mut out = TubeField::zeros(grid);
    for a in 0..grid.n_t {
        for b in grid.interior_z() {
            let fiber = match grid.fiber {
                FiberKind::Line => {
                    (f.get(a, b + 1) - 2.0 * f.get(a, b) + f.get(a, b - 1)) / (hx * hx)
                }
                FiberKind::Radial { n } => {
                    let x = grid.x[b];
                    let xp = x + 0.5 * hx;
                    let xm = (x - 0.5 * hx).max(0.0);
                    let alpha_p = xp.powi(n as i32 - 1);
                    let alpha_m = if b == 0 { 0.0 } else { xm.powi(n as i32 - 1) };
                    let vtil = (xp.powi(n as i32) - xm.powi(n as i32)) / (n as f64 * hx);
                    let fm = if b == 0 { f.get(a, b) } else { f.get(a, b - 1) };
                    (alpha_p * (f.get(a, b + 1) - f.get(a, b)) - alpha_m * (f.get(a, b) - fm))
                        / (hx * hx * vtil)
                }
            };
            out.set(a, b, fiber / eps2);
        }
    }
    Ok(out)
}

/// Product-metric Laplacian Δ_ḡ = Δ_g̊ + Δ_{g_z}.
pub fn apply_base_laplacian(exp: &FermiExpansion, f: &TubeField) -> Result<TubeField> {
    let grid = &exp.grid;
    let mut out = apply_manifold_laplacian(exp, f)?;
    let fiber = apply_fiber_laplacian(grid, f)?;
    for (o, fb) in out.values.iter_mut().zip(&fiber.values) {
        *o += fb;
    }
    Ok(out)
}

/// Full Euclidean Laplacian via the conservative coordinate formula
/// (1/√G) ∂_I(√G g^{IJ} ∂_J ·), half-node fluxes. Interior rows only.
pub fn apply_laplacian(exp: &FermiExpansion, f: &TubeField) -> Result<TubeField> {
    let grid = &exp.grid;
    f.matches(grid)?;
    if !matches!(grid.fiber, FiberKind::Line) {
        // product metric on radial control grids
        return apply_base_laplacian(exp, f);
    }
    let nz = grid.n_z();
    let ht = grid.h_t();
    let hz = grid.eps * grid.h_x();
    let mut out = TubeField::zeros(grid);
    for a in 0..grid.n_t {
        let ap = (a + 1) % grid.n_t;
        let am = (a + grid.n_t - 1) % grid.n_t;
        for b in grid.interior_z() {
            let id = a * nz + b;
            let sg = exp.sqrt_det[id];
            // t-fluxes: √G g^tt = √g_tt · 1/g_tt = 1/√g_tt for n = 1
            let wt_p = 0.5 * (1.0 / exp.sqrt_det[ap * nz + b] + 1.0 / sg);
            let wt_m = 0.5 * (1.0 / exp.sqrt_det[am * nz + b] + 1.0 / sg);
            let flux_t = (wt_p * (f.get(ap, b) - f.get(a, b))
                - wt_m * (f.get(a, b) - f.get(am, b)))
                / (ht * ht);
            // z-fluxes: √G g^zz = √g_tt
            let wz_p = 0.5 * (exp.sqrt_det[a * nz + b + 1] + sg);
            let wz_m = 0.5 * (exp.sqrt_det[a * nz + b - 1] + sg);
            let flux_z = (wz_p * (f.get(a, b + 1) - f.get(a, b))
                - wz_m * (f.get(a, b) - f.get(a, b - 1)))
                / (hz * hz);
            out.set(a, b, (flux_t + flux_z) / sg);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::CircleClosedForm;

    fn circle_setup(radius: f64, n_t: usize, half: usize, eps: f64) -> (EmbeddedCurve, TubeGrid, FermiExpansion) {
        let curve = EmbeddedCurve::circle(radius, 2, n_t);
        let grid = TubeGrid::line(n_t, curve.period, half, eps);
        let exp = FermiExpansion::from_curve(&curve, &grid).unwrap();
        (curve, grid, exp)
    }

    #[test]
    fn circle_metric_matches_closed_form() {
        let (_, grid, exp) = circle_setup(1.0, 32, 16, 0.3);
        let oracle = CircleClosedForm { radius: 1.0 };
        let nz = grid.n_z();
        for a in (0..32).step_by(5) {
            for b in 0..nz {
                let z = grid.eps * grid.x[b];
                assert!((exp.metric_tt[a * nz + b] - oracle.metric_tt(z)).abs() < 1e-8);
                assert!((exp.volume_factor[a * nz + b] - oracle.volume_factor(z)).abs() < 1e-8);
            }
        }
        // zero-section identity
        let mid = nz / 2;
        for a in 0..32 {
            assert!((exp.metric_tt[a * nz + mid] - 1.0).abs() < 1e-10);
            assert!((exp.volume_factor[a * nz + mid] - 1.0).abs() < 1e-10);
        }
        assert!(exp.volume_deviation_rate() < 1.01);
    }

    #[test]
    fn tube_too_wide_exactly_at_curvature_radius() {
        let curve = EmbeddedCurve::circle(1.0, 2, 32);
        // |z| < 1: fine even at 0.97
        let grid_ok = TubeGrid::line(32, curve.period, 8, 0.97);
        assert!(FermiExpansion::from_curve(&curve, &grid_ok).is_ok());
        // |z| >= 1: det g = (1+z/R)² hits zero on the inner side
        let grid_bad = TubeGrid::line(32, curve.period, 8, 1.0);
        assert!(matches!(
            FermiExpansion::from_curve(&curve, &grid_bad),
            Err(Error::TubeTooWide { .. })
        ));
    }

    #[test]
    fn split_matches_circle_closed_form() {
        let (_, grid, exp) = circle_setup(1.0, 48, 24, 0.4);
        let dop = laplacian_split(&exp).unwrap();
        let oracle = CircleClosedForm { radius: 1.0 };
        let nz = grid.n_z();
        for a in (0..48).step_by(7) {
            for b in 0..nz {
                let z = grid.eps * grid.x[b];
                let id = a * nz + b;
                assert!(
                    (dop.c_tt[id] - oracle.d_coeff_tt(z)).abs() < 1e-8,
                    "c_tt at z={z}"
                );
                assert!(
                    (dop.d_z[id] - oracle.d_coeff_z1(z)).abs() < 1e-8,
                    "d_z at z={z}"
                );
                assert!(dop.d_t[id].abs() < 1e-9);
            }
        }
        assert_eq!(dop.second_order_z_defect, 0.0);
        // z = 0 slice: second-order t-coefficient vanishes, first-order
        // z-coefficient is the curvature 1/R
        let mid = nz / 2;
        for a in 0..48 {
            assert!(dop.c_tt[a * nz + mid].abs() < 1e-10);
            assert!((dop.d_z[a * nz + mid] - 1.0).abs() < 1e-8);
            // Lemma 3.2 factor structure: c_tt/z at 0 equals the exact slope
            assert!((dop.q_tt[a * nz + mid] + 2.0).abs() < 1e-6);
        }
    }

    #[test]
    fn d_of_pure_z_function_has_no_t_terms() {
        let (_, grid, exp) = circle_setup(1.0, 24, 12, 0.3);
        let dop = laplacian_split(&exp).unwrap();
        let f = TubeField::from_fn(&grid, |_, b| {
            let z = grid.eps * grid.x[b];
            z * z
        });
        let df = dop.apply(&grid, &f).unwrap();
        // result must equal d_z * 2z pointwise: no t-derivative contribution
        let nz = grid.n_z();
        for a in 0..24 {
            for b in grid.interior_z() {
                let z = grid.eps * grid.x[b];
                let expect = dop.d_z[a * nz + b] * 2.0 * z;
                assert!((df.get(a, b) - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn flat_control_has_zero_correction() {
        let grid = TubeGrid::line(16, 2.0 * std::f64::consts::PI, 8, 0.2);
        let exp = FermiExpansion::flat(&grid);
        let dop = laplacian_split(&exp).unwrap();
        assert!(dop.is_identically_zero(0.0));
    }

    #[test]
    fn laplacian_on_ambient_test_fields_converges() {
        // Δ(affine) = 0 and Δ|x|² = 2m in ambient coordinates; the
        // coordinate-formula discretization must reproduce both at O(h²)
        let errs = |n_t: usize, half: usize| -> (f64, f64) {
            let curve = ellipse_curve(n_t);
            let grid = TubeGrid::line(n_t, curve.period, half, 0.25);
            let exp = FermiExpansion::from_curve(&curve, &grid).unwrap();
            let pos = |a: usize, b: usize| -> Vec<f64> {
                let z = grid.eps * grid.x[b];
                curve.points[a]
                    .iter()
                    .zip(&curve.frame[a][0])
                    .map(|(y, e)| y + z * e)
                    .collect()
            };
            let affine = TubeField::from_fn(&grid, |a, b| {
                let x = pos(a, b);
                3.0 * x[0] - 2.0 * x[1] + 0.7
            });
            let square = TubeField::from_fn(&grid, |a, b| {
                let x = pos(a, b);
                x[0] * x[0] + x[1] * x[1]
            });
            let lap_affine = apply_laplacian(&exp, &affine).unwrap();
            let lap_square = apply_laplacian(&exp, &square).unwrap();
            let m = 2.0;
            let mut e_affine = 0.0f64;
            let mut e_square = 0.0f64;
            for a in 0..grid.n_t {
                for b in grid.interior_z() {
                    e_affine = e_affine.max(lap_affine.get(a, b).abs());
                    e_square = e_square.max((lap_square.get(a, b) - 2.0 * m).abs());
                }
            }
            (e_affine, e_square)
        };
        let (a1, s1) = errs(64, 32);
        let (a2, s2) = errs(128, 64);
        assert!(a1 < 0.1 && s1 < 0.2, "coarse errors {a1:.2e} {s1:.2e}");
        assert!((a1 / a2).log2() > 1.7, "affine order {}", (a1 / a2).log2());
        assert!((s1 / s2).log2() > 1.7, "square order {}", (s1 / s2).log2());
    }

    fn ellipse_curve(n_t: usize) -> EmbeddedCurve {
        // non-circular planar curve: metric depends on t and √det g is not
        // linear in z, so the two discretizations genuinely differ at O(h²)
        let pts: Vec<Vec<f64>> = (0..n_t)
            .map(|a| {
                let t = 2.0 * std::f64::consts::PI * a as f64 / n_t as f64;
                vec![1.4 * t.cos(), 0.9 * t.sin()]
            })
            .collect();
        crate::manifold::build_frame(&pts, 2.0 * std::f64::consts::PI).unwrap()
    }

    #[test]
    fn split_consistency_exact_on_circle_refines_on_ellipse() {
        let split_err = |grid: &TubeGrid, exp: &FermiExpansion| -> f64 {
            let dop = laplacian_split(exp).unwrap();
            let f = TubeField::from_fn(grid, |a, b| {
                let t = grid.h_t() * a as f64;
                let z = grid.eps * grid.x[b];
                (2.0 * t).sin() * (1.0 - z * z) + 0.3 * z * t.cos()
            });
            let full = apply_laplacian(exp, &f).unwrap();
            let base = apply_base_laplacian(exp, &f).unwrap();
            let corr = dop.apply(grid, &f).unwrap();
            let mut worst = 0.0f64;
            for a in 0..grid.n_t {
                for b in grid.interior_z() {
                    worst =
                        worst.max((full.get(a, b) - base.get(a, b) - corr.get(a, b)).abs());
                }
            }
            worst
        };
        // circle: √det g is linear in z, both discretizations coincide
        let (_, grid, exp) = circle_setup(1.0, 24, 12, 0.3);
        assert!(split_err(&grid, &exp) < 1e-10);
        // ellipse: second-order agreement under refinement
        let err_at = |n_t: usize, half: usize| -> f64 {
            let curve = ellipse_curve(n_t);
            let grid = TubeGrid::line(n_t, curve.period, half, 0.25);
            let exp = FermiExpansion::from_curve(&curve, &grid).unwrap();
            split_err(&grid, &exp)
        };
        let e1 = err_at(96, 48);
        let e2 = err_at(192, 96);
        let order = (e1 / e2).log2();
        assert!(order > 1.85, "measured order {order} (e1={e1:.3e}, e2={e2:.3e})");
    }
}
