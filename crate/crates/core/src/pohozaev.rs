//! Pohozaev machinery: the pointwise divergence identity for solutions of
//! `Δu + u^p = 0`, the integrated identity with `φ = dist(·,Λ)²/2 = |z|²/2`,
//! the geometric estimates (`|Δφ - n| <= Cε`, `|∇Δφ| <= C`, the one-sided
//! Hessian defect), the scaled Poincaré inequality, and the nonexistence
//! certificate for supercritical exponents.

use crate::error::{Error, Result};
use crate::fermi::{CorrectionOperator, FermiExpansion};
use crate::grid::{FiberKind, TubeField, TubeGrid};
use crate::radial::ProblemParams;

/// Quadrature/stencil flavor; the two schemes are independent second-order
/// discretizations used to cross-check each other.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum QuadratureScheme {
    /// trapezoid in z, central differences
    Standard,
    /// Simpson in z, wider central stencils in t
    Alternate,
}

/// All measured quantities of the integrated identity.
#[derive(Clone, Debug)]
pub struct PohozaevReport {
    /// ½ ∮ |∇u|² ∇φ·ν dσ
    pub boundary_term: f64,
    /// ∫ (Δφ |∇u|²/n - ∇²φ(∇u,∇u))
    pub bulk1: f64,
    /// ((n-2)/(2n) - 1/(p+1)) ∫ |∇u|² Δφ
    pub bulk2: f64,
    /// -(p+1)⁻¹ ∫ u ∇u·∇Δφ
    pub bulk3: f64,
    /// signed sum of the four terms (→ 0 on solutions)
    pub identity_residual: f64,
    /// (n-2)/2 - n/(p+1)
    pub coefficient: f64,
    /// sup |Δφ - n| / ε
    pub c_delta_phi: f64,
    /// sup |∇Δφ|
    pub c_grad_delta_phi: f64,
    /// sup |Δφ|∇u|²/n - ∇²φ(∇u,∇u)| / (ε |∇u|²) on this field
    pub hessian_defect_quotient: f64,
    /// ∫ u² / (ε² ∫ |∇u|²)
    pub poincare_ratio: f64,
    pub grad_energy: f64,
    pub mass: f64,
}

/// Gradient components of a field with one-sided second-order stencils on
/// the fiber boundary; t-direction periodic central.
fn gradient(grid: &TubeGrid, f: &TubeField, wide_t: bool) -> (TubeField, TubeField) {
    let nz = grid.n_z();
    let ht = grid.h_t();
    let hz = grid.eps * grid.h_x();
    let mut ft = TubeField::zeros(grid);
    let mut fz = TubeField::zeros(grid);
    let n_t = grid.n_t;
    for a in 0..n_t {
        for b in 0..nz {
            let dt = if wide_t && n_t >= 5 {
                let f2p = f.get((a + 2) % n_t, b);
                let fp = f.get((a + 1) % n_t, b);
                let fm = f.get((a + n_t - 1) % n_t, b);
                let f2m = f.get((a + n_t - 2) % n_t, b);
                (-f2p + 8.0 * fp - 8.0 * fm + f2m) / (12.0 * ht)
            } else {
                (f.get((a + 1) % n_t, b) - f.get((a + n_t - 1) % n_t, b)) / (2.0 * ht)
            };
            ft.set(a, b, dt);
            let dz = if b == 0 {
                (-3.0 * f.get(a, 0) + 4.0 * f.get(a, 1) - f.get(a, 2)) / (2.0 * hz)
            } else if b + 1 == nz {
                (3.0 * f.get(a, b) - 4.0 * f.get(a, b - 1) + f.get(a, b - 2)) / (2.0 * hz)
            } else {
                (f.get(a, b + 1) - f.get(a, b - 1)) / (2.0 * hz)
            };
            fz.set(a, b, dz);
        }
    }
    (ft, fz)
}

/// z-quadrature weights (rescaled nodes, physical spacing ε h_x).
fn z_weights(grid: &TubeGrid, scheme: QuadratureScheme) -> Vec<f64> {
    let nz = grid.n_z();
    let hz = grid.eps * grid.h_x();
    match scheme {
        QuadratureScheme::Standard => (0..nz)
            .map(|b| if b == 0 || b + 1 == nz { 0.5 * hz } else { hz })
            .collect(),
        QuadratureScheme::Alternate => {
            // Simpson (nz is odd for Line grids built from mirrored profiles)
            (0..nz)
                .map(|b| {
                    if b == 0 || b + 1 == nz {
                        hz / 3.0
                    } else if b % 2 == 1 {
                        4.0 * hz / 3.0
                    } else {
                        2.0 * hz / 3.0
                    }
                })
                .collect()
        }
    }
}

fn require_line(grid: &TubeGrid) -> Result<()> {
    match grid.fiber {
        FiberKind::Line => Ok(()),
        FiberKind::Radial { .. } => Err(Error::GridMismatch(
            "Pohozaev quadrature is implemented on Line-fiber tube grids".into(),
        )),
    }
}

/// Pointwise residual of the divergence identity for a given `φ` field:
/// div(flux) + bulk groups, which vanishes for exact solutions and C² φ.
/// Returns the residual field (boundary rows and their neighbors zeroed:
/// the divergence stencil is not defined there).
pub fn divergence_identity_residual(
    grid: &TubeGrid,
    exp: &FermiExpansion,
    u: &TubeField,
    phi: &TubeField,
    p: f64,
) -> Result<TubeField> {
    require_line(grid)?;
    u.matches(grid)?;
    phi.matches(grid)?;
    let nz = grid.n_z();
    let n_t = grid.n_t;
    let ht = grid.h_t();
    let hz = grid.eps * grid.h_x();
    let nf = 1.0; // fiber dimension of the Line grid

    let (ut, uz) = gradient(grid, u, false);
    let (pt, pz) = gradient(grid, phi, false);

    // metric helpers
    let g = |a: usize, b: usize| exp.metric_tt[a * nz + b];
    let sg = |a: usize, b: usize| exp.sqrt_det[a * nz + b];
    let dzg = |a: usize, b: usize| exp.dz_g_tt[a * nz + b];
    let dtg = |a: usize, b: usize| exp.dt_g_tt[a * nz + b];

    // Δφ via the coordinate formula with FD second derivatives
    let lap_phi = {
        let mut out = TubeField::zeros(grid);
        for a in 0..n_t {
            let ap = (a + 1) % n_t;
            let am = (a + n_t - 1) % n_t;
            for b in 1..nz - 1 {
                let ptt = (phi.get(ap, b) - 2.0 * phi.get(a, b) + phi.get(am, b)) / (ht * ht);
                let pzz =
                    (phi.get(a, b + 1) - 2.0 * phi.get(a, b) + phi.get(a, b - 1)) / (hz * hz);
                let b_t = -dtg(a, b) / (2.0 * g(a, b) * g(a, b));
                let b_z = dzg(a, b) / (2.0 * g(a, b));
                out.set(
                    a,
                    b,
                    ptt / g(a, b) + pzz + b_t * pt.get(a, b) + b_z * pz.get(a, b),
                );
            }
        }
        out
    };
    let (lt, lz) = gradient(grid, &lap_phi, false);

    // covariant Hessian of φ contracted twice with ∇u, plus |∇u|², u∇u·∇Δφ
    let mut residual = TubeField::zeros(grid);
    // flux components W^t, W^z on all nodes
    let mut wt = TubeField::zeros(grid);
    let mut wz = TubeField::zeros(grid);
    for a in 0..n_t {
        for b in 0..nz {
            let ginv = 1.0 / g(a, b);
            let grad_u_t = ginv * ut.get(a, b);
            let grad_phi_t = ginv * pt.get(a, b);
            let du_dphi = grad_u_t * pt.get(a, b) + uz.get(a, b) * pz.get(a, b);
            let grad2 = ginv * ut.get(a, b) * ut.get(a, b) + uz.get(a, b) * uz.get(a, b);
            let uv = u.get(a, b);
            let upow = uv.abs().powf(p + 1.0);
            wt.set(
                a,
                b,
                du_dphi * grad_u_t - (0.5 * grad2 - upow / (p + 1.0)) * grad_phi_t
                    + uv * lap_phi.get(a, b) * grad_u_t / (p + 1.0),
            );
            wz.set(
                a,
                b,
                du_dphi * uz.get(a, b) - (0.5 * grad2 - upow / (p + 1.0)) * pz.get(a, b)
                    + uv * lap_phi.get(a, b) * uz.get(a, b) / (p + 1.0),
            );
        }
    }
    for a in 0..n_t {
        let ap = (a + 1) % n_t;
        let am = (a + n_t - 1) % n_t;
        for b in 2..nz - 2 {
            // div W = (1/√G)(∂_t(√G W^t) + ∂_z(√G W^z))
            let div = ((sg(ap, b) * wt.get(ap, b) - sg(am, b) * wt.get(am, b)) / (2.0 * ht)
                + (sg(a, b + 1) * wz.get(a, b + 1) - sg(a, b - 1) * wz.get(a, b - 1))
                    / (2.0 * hz))
                / sg(a, b);
            // second Hessian derivatives of φ
            let ptt = (phi.get(ap, b) - 2.0 * phi.get(a, b) + phi.get(am, b)) / (ht * ht);
            let pzz = (phi.get(a, b + 1) - 2.0 * phi.get(a, b) + phi.get(a, b - 1)) / (hz * hz);
            let ptz = (phi.get(ap, b + 1) - phi.get(ap, b - 1) - phi.get(am, b + 1)
                + phi.get(am, b - 1))
                / (4.0 * ht * hz);
            // Christoffels of diag(g_tt, 1)
            let gamma_t_tt = dtg(a, b) / (2.0 * g(a, b));
            let gamma_t_tz = dzg(a, b) / (2.0 * g(a, b));
            let gamma_z_tt = -dzg(a, b) / 2.0;
            let h_tt = ptt - gamma_t_tt * pt.get(a, b) - gamma_z_tt * pz.get(a, b);
            let h_tz = ptz - gamma_t_tz * pt.get(a, b);
            let h_zz = pzz;
            let ginv = 1.0 / g(a, b);
            let gut = ginv * ut.get(a, b);
            let guz = uz.get(a, b);
            let hess = h_tt * gut * gut + 2.0 * h_tz * gut * guz + h_zz * guz * guz;
            let grad2 = ginv * ut.get(a, b) * ut.get(a, b) + guz * guz;
            let lapphi = lap_phi.get(a, b);
            let grad_u_dot_grad_lap =
                ginv * ut.get(a, b) * lt.get(a, b) + uz.get(a, b) * lz.get(a, b);
            let bulk = (lapphi * grad2 / nf - hess)
                + ((nf - 2.0) / (2.0 * nf) - 1.0 / (p + 1.0)) * grad2 * lapphi
                - u.get(a, b) * grad_u_dot_grad_lap / (p + 1.0);
            residual.set(a, b, div + bulk);
        }
    }
    Ok(residual)
}

/// The canonical φ = |z|²/2 field on the grid.
pub fn phi_dist_squared(grid: &TubeGrid) -> TubeField {
    TubeField::from_fn(grid, |_, b| {
        let z = grid.eps * grid.x[b];
        0.5 * z * z
    })
}

/// Integrated identity with φ = |z|²/2 on a Line tube. The Dirichlet trace
/// must be exactly zero.
pub fn integrated_identity(
    grid: &TubeGrid,
    exp: &FermiExpansion,
    dop: &CorrectionOperator,
    u: &TubeField,
    p: f64,
    scheme: QuadratureScheme,
) -> Result<PohozaevReport> {
    require_line(grid)?;
    u.matches(grid)?;
    u.require_zero_trace(grid)?;
    let nz = grid.n_z();
    let n_t = grid.n_t;
    let ht = grid.h_t();
    let eps = grid.eps;
    let nf = 1.0;
    let wide = scheme == QuadratureScheme::Alternate;
    let (ut, uz) = gradient(grid, u, wide);
    let wz = z_weights(grid, scheme);

    let g = |a: usize, b: usize| exp.metric_tt[a * nz + b];
    let sg = |a: usize, b: usize| exp.sqrt_det[a * nz + b];

    // Δφ = n + z d_z(t,z) exactly in the split coefficients
    let lap_phi = TubeField::from_fn(grid, |a, b| {
        let z = eps * grid.x[b];
        nf + z * dop.d_z[a * nz + b]
    });
    let (lt, lz) = gradient(grid, &lap_phi, wide);

    let mut bulk1 = 0.0;
    let mut bulk2_raw = 0.0;
    let mut bulk3_raw = 0.0;
    let mut grad_energy = 0.0;
    let mut mass = 0.0;
    let mut c_delta = 0.0f64;
    let mut c_grad_delta = 0.0f64;
    let mut defect_q = 0.0f64;
    let mut cs_left = 0.0f64; // |∫ u ∇u·∇Δφ|

    for a in 0..n_t {
        for b in 0..nz {
            let vol = sg(a, b) * ht * wz[b];
            let z = eps * grid.x[b];
            let ginv = 1.0 / g(a, b);
            let grad2 = ginv * ut.get(a, b) * ut.get(a, b) + uz.get(a, b) * uz.get(a, b);
            let lapphi = lap_phi.get(a, b);
            // covariant Hessian of φ = z²/2: diag(z ∂_z g/2, 1) in indices
            let h_tt = z * exp.dz_g_tt[a * nz + b] / 2.0;
            let gut = ginv * ut.get(a, b);
            let hess = h_tt * gut * gut + uz.get(a, b) * uz.get(a, b);
            let defect = lapphi * grad2 / nf - hess;
            bulk1 += defect * vol;
            bulk2_raw += grad2 * lapphi * vol;
            let grad_u_dot = ginv * ut.get(a, b) * lt.get(a, b) + uz.get(a, b) * lz.get(a, b);
            bulk3_raw += u.get(a, b) * grad_u_dot * vol;
            grad_energy += grad2 * vol;
            mass += u.get(a, b) * u.get(a, b) * vol;
            c_delta = c_delta.max((lapphi - nf).abs() / eps);
            let gdl2 = ginv * lt.get(a, b) * lt.get(a, b) + lz.get(a, b) * lz.get(a, b);
            c_grad_delta = c_grad_delta.max(gdl2.sqrt());
            if grad2 > 1e-14 {
                defect_q = defect_q.max(defect.abs() / (eps * grad2));
            }
        }
    }
    cs_left += bulk3_raw.abs();

    // boundary: ∇φ·ν = ε, |∇u|² = (∂_z u)², dσ = √g_tt h_t per side
    let mut boundary = 0.0;
    for a in 0..n_t {
        for &b in &[0usize, nz - 1] {
            let dn = uz.get(a, b);
            boundary += 0.5 * dn * dn * eps * g(a, b).sqrt() * ht;
        }
    }

    let bulk2 = ((nf - 2.0) / (2.0 * nf) - 1.0 / (p + 1.0)) * bulk2_raw;
    let bulk3 = -bulk3_raw / (p + 1.0);
    let identity_residual = boundary + bulk1 + bulk2 + bulk3;

    // Cauchy-Schwarz step of the proof, checked on this field
    let cs_right = c_grad_delta * mass.sqrt() * grad_energy.sqrt();
    if cs_left > cs_right * (1.0 + 1e-10) {
        return Err(Error::InvalidParameter(format!(
            "Cauchy-Schwarz violated by quadrature: {cs_left} > {cs_right}"
        )));
    }

    Ok(PohozaevReport {
        boundary_term: boundary,
        bulk1,
        bulk2,
        bulk3,
        identity_residual,
        coefficient: (nf - 2.0) / 2.0 - nf / (p + 1.0),
        c_delta_phi: c_delta,
        c_grad_delta_phi: c_grad_delta,
        hessian_defect_quotient: defect_q,
        poincare_ratio: if grad_energy > 0.0 {
            mass / (eps * eps * grad_energy)
        } else {
            f64::NAN
        },
        grad_energy,
        mass,
    })
}

/// ∫u²/(ε²∫|∇u|²) with the g_∘ volume; bounded uniformly in ε for zero-trace
/// fields (the scaled Poincaré inequality).
pub fn poincare_check(grid: &TubeGrid, exp: &FermiExpansion, u: &TubeField) -> Result<f64> {
    u.matches(grid)?;
    u.require_zero_trace(grid)?;
    if u.max_abs() == 0.0 {
        return Err(Error::ZeroField);
    }
    let nz = grid.n_z();
    let ht = grid.h_t();
    let eps = grid.eps;
    let (ut, uz) = match grid.fiber {
        FiberKind::Line => gradient(grid, u, false),
        FiberKind::Radial { .. } => {
            // radial grids: same stencils, x in [0,1]
            let hz = eps * grid.h_x();
            let mut ft = TubeField::zeros(grid);
            let mut fz = TubeField::zeros(grid);
            for a in 0..grid.n_t {
                let ap = (a + 1) % grid.n_t;
                let am = (a + grid.n_t - 1) % grid.n_t;
                for b in 0..nz {
                    ft.set(a, b, (u.get(ap, b) - u.get(am, b)) / (2.0 * ht));
                    let dz = if b == 0 {
                        0.0 // radial symmetry
                    } else if b + 1 == nz {
                        (3.0 * u.get(a, b) - 4.0 * u.get(a, b - 1) + u.get(a, b - 2))
                            / (2.0 * hz)
                    } else {
                        (u.get(a, b + 1) - u.get(a, b - 1)) / (2.0 * hz)
                    };
                    fz.set(a, b, dz);
                }
            }
            (ft, fz)
        }
    };
    let mut mass = 0.0;
    let mut energy = 0.0;
    for a in 0..grid.n_t {
        for b in 0..nz {
            let vol = match grid.fiber {
                FiberKind::Line => {
                    exp.sqrt_det[a * nz + b]
                        * ht
                        * if b == 0 || b + 1 == nz { 0.5 } else { 1.0 }
                        * eps
                        * grid.h_x()
                }
                FiberKind::Radial { n } => {
                    let scheme = crate::radial::RadialScheme::new(n, nz - 1);
                    let omega = crate::radial::sphere_surface_measure(n);
                    let vt = if b + 1 == nz { 0.0 } else { scheme.vtil[b] };
                    exp.sqrt_det[a * nz + b]
                        * ht
                        * omega
                        * eps.powi(n as i32)
                        * vt
                        * grid.h_x()
                }
            };
            let ginv = 1.0 / exp.metric_tt[a * nz + b];
            mass += u.get(a, b) * u.get(a, b) * vol;
            energy += (ginv * ut.get(a, b) * ut.get(a, b) + uz.get(a, b) * uz.get(a, b)) * vol;
        }
    }
    Ok(mass / (eps * eps * energy))
}

/// Verdict of the nonexistence certificate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Verdict {
    /// ε < ε̄: the integrated identity forces ∫|∇u|² <= 0, so u ≡ 0
    NoPositiveSolution { eps_bar: f64 },
    /// ε >= ε̄ (or the coefficient vanishes): no conclusion at this radius
    Inconclusive { eps_bar: f64 },
}

#[derive(Clone, Debug)]
pub struct CertificateReport {
    pub coefficient: f64,
    pub c_delta_phi: f64,
    pub c_grad_delta_phi: f64,
    /// one-sided Hessian-defect constant sup (λ_max(∇²φ) - Δφ/n)₊ / ε
    pub c_hessian_one_sided: f64,
    /// max of the three measured constants, as configured
    pub c_geo: f64,
    pub eps_bar: f64,
    pub verdict: Verdict,
    /// (coefficient - C_geo ε) ∫|∇u|² for a supplied candidate
    pub contradiction_margin: Option<f64>,
}

/// Nonexistence certificate on the circle tube of radius `big_radius` in
/// codimension n = params.n >= 3 with p > (n+2)/(n-2): measures the
/// geometric constants of the estimate lemmas on the given tube (closed
/// forms sampled on a z-grid) and reports the threshold
/// ε̄ = coefficient / C_geo below which no positive solution exists.
/// The measured constants are grid quantities; the certificate is a
/// demonstration at this resolution, not a proof.
pub fn nonexistence_certificate(
    params: ProblemParams,
    eps: f64,
    big_radius: f64,
    nz: usize,
    candidate_radial: Option<&[f64]>,
) -> Result<CertificateReport> {
    let n = params.n;
    let p = params.p;
    // the strict supercritical range is the theorem's scope; the critical
    // exponent itself is admitted and yields the trivial zero coefficient
    // (ε̄ = 0, Inconclusive for every ε)
    if n < 3 || p < (n as f64 + 2.0) / (n as f64 - 2.0) {
        return Err(Error::SubcriticalInput { n, p });
    }
    if !(eps > 0.0 && eps < big_radius) {
        return Err(Error::InvalidParameter("need 0 < eps < R".into()));
    }
    let nf = n as f64;
    let coefficient = (nf - 2.0) / 2.0 - nf / (p + 1.0);

    // closed-form circle-in-R^{1+n} geometry along the distinguished normal
    // direction z1 (the only one the metric depends on)
    let mut c_a = 0.0f64;
    let mut c_b = 0.0f64;
    let mut c_c = 0.0f64;
    for i in 0..=nz {
        let z1 = -eps + 2.0 * eps * i as f64 / nz as f64;
        let w = 1.0 + z1 / big_radius;
        let d_z1 = 1.0 / (big_radius * w);
        let lap_phi = nf + z1 * d_z1;
        c_a = c_a.max((lap_phi - nf).abs() / eps);
        // ∇Δφ = ∂_z1(z1 d_z1) = 1/(R w²) along z1
        c_b = c_b.max(1.0 / (big_radius * w * w));
        // Hessian eigenvalues: z1 d_z1 (tangent) and 1 (normal block)
        let lam_max = (z1 * d_z1).max(1.0);
        c_c = c_c.max((lam_max - lap_phi / nf).max(0.0) / eps);
    }
    let c_geo = c_a.max(c_b).max(c_c);
    let eps_bar = coefficient.max(0.0) / c_geo;
    let verdict = if coefficient > 0.0 && eps < eps_bar {
        Verdict::NoPositiveSolution { eps_bar }
    } else {
        Verdict::Inconclusive { eps_bar }
    };

    // candidate evaluation: fiber-radial profile w(x) on [0, 1]; the
    // contradiction margin is the forced sign of the identity sum
    let contradiction_margin = candidate_radial.map(|w| {
        let m = w.len() - 1;
        let h = 1.0 / m as f64;
        let omega = crate::radial::sphere_surface_measure(n);
        let mut grad = 0.0;
        for i in 0..m {
            let x = (i as f64 + 0.5) * h;
            let dw = (w[i + 1] - w[i]) / (h * eps);
            grad += dw * dw * x.powi(n as i32 - 1) * h * eps.powi(n as i32);
        }
        grad *= omega * 2.0 * std::f64::consts::PI * big_radius;
        (coefficient - c_geo * eps) * grad
    });

    Ok(CertificateReport {
        coefficient,
        c_delta_phi: c_a,
        c_grad_delta_phi: c_b,
        c_hessian_one_sided: c_c,
        c_geo,
        eps_bar,
        verdict,
        contradiction_margin,
    })
}
