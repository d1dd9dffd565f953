//! The positive radial ground state `U` of `ΔU + U^p = 0` on the unit
//! n-ball with Dirichlet boundary, its rescalings
//! `ū_ε(d) = ε^{-2/(p-1)} U(d/ε)`, and the spectrum of the linearized
//! radial operator `L = -(Δ + p U^{p-1})` split over angular modes.
//!
//! Discretization: conservative second-order finite volumes on a uniform
//! r-grid. At r = 0 the zero-flux cell is algebraically identical to the
//! ghost-node symmetry condition U'(0) = 0; the scheme is self-adjoint with
//! respect to the radial cell measures, so one assembly serves both the
//! nonlinear collocation and the per-mode eigensolves.

use crate::error::{Error, Result};
use crate::linalg::interp::MonotoneCubic;
use crate::linalg::{self, tridiag};

/// Problem dimensions and exponent. `n` is the fiber (codimension), `k` the
/// manifold dimension, `m = n + k` the ambient dimension.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProblemParams {
    pub n: usize,
    pub p: f64,
    pub k: usize,
}

impl ProblemParams {
    pub fn new(n: usize, p: f64, k: usize) -> Result<Self> {
        if n < 1 || k < 1 {
            return Err(Error::InvalidParameter(format!(
                "need n >= 1 and k >= 1, got n={n}, k={k}"
            )));
        }
        if !(p > 1.0) {
            return Err(Error::InvalidParameter(format!("need p > 1, got p={p}")));
        }
        Ok(Self { n, p, k })
    }

    pub fn ambient_dim(&self) -> usize {
        self.n + self.k
    }

    /// `(n+2)/(n-2)` for n >= 3; no finite critical exponent below that.
    pub fn critical_exponent(&self) -> Option<f64> {
        if self.n >= 3 {
            Some((self.n as f64 + 2.0) / (self.n as f64 - 2.0))
        } else {
            None
        }
    }

    /// True iff a ground state exists: any p > 1 for n <= 2, else p strictly
    /// below the critical exponent.
    pub fn subcritical(&self) -> bool {
        match self.critical_exponent() {
            None => true,
            Some(c) => self.p < c,
        }
    }

    pub fn require_subcritical(&self) -> Result<()> {
        if self.subcritical() {
            Ok(())
        } else {
            Err(Error::SupercriticalExponent {
                n: self.n,
                p: self.p,
                critical: self.critical_exponent().unwrap(),
            })
        }
    }
}

/// Surface measure of the unit sphere S^{n-1}: `2 π^{n/2} / Γ(n/2)`.
pub fn sphere_surface_measure(n: usize) -> f64 {
    2.0 * std::f64::consts::PI.powf(n as f64 / 2.0) / gamma_half_integer(n)
}

/// Γ(n/2) for integer n >= 1.
fn gamma_half_integer(n: usize) -> f64 {
    let mut x = n as f64 / 2.0;
    let mut acc = 1.0;
    while x > 1.5 {
        x -= 1.0;
        acc *= x;
    }
    if (x - 1.0).abs() < 1e-12 {
        acc
    } else {
        acc * std::f64::consts::PI.sqrt()
    }
}

/// Conservative radial scheme on the uniform grid r_i = i h, i = 0..=nn.
pub(crate) struct RadialScheme {
    pub h: f64,
    /// flux coefficients r_{i+1/2}^{n-1}, index i = 0..nn
    pub alpha: Vec<f64>,
    /// cell measures (r_{i+1/2}^n - r_{i-1/2}^n)/(n h)
    pub vtil: Vec<f64>,
}

impl RadialScheme {
    pub fn new(n: usize, nn: usize) -> Self {
        let h = 1.0 / nn as f64;
        let alpha: Vec<f64> = (0..nn)
            .map(|i| ((i as f64 + 0.5) * h).powi(n as i32 - 1))
            .collect();
        let vtil: Vec<f64> = (0..nn)
            .map(|i| {
                let rp = (i as f64 + 0.5) * h;
                let rm = if i == 0 { 0.0 } else { (i as f64 - 0.5) * h };
                (rp.powi(n as i32) - rm.powi(n as i32)) / (n as f64 * h)
            })
            .collect();
        Self { h, alpha, vtil }
    }

    /// Radial Laplacian applied to interior values (Dirichlet 0 at i = nn).
    pub fn apply_laplacian(&self, f: &[f64]) -> Vec<f64> {
        let nn = self.vtil.len();
        let h2 = self.h * self.h;
        (0..nn)
            .map(|i| {
                let fp = if i + 1 < nn { f[i + 1] } else { 0.0 };
                let fm = if i > 0 { f[i - 1] } else { 0.0 };
                let am = if i > 0 { self.alpha[i - 1] } else { 0.0 };
                (self.alpha[i] * (fp - f[i]) - am * (f[i] - fm)) / (h2 * self.vtil[i])
            })
            .collect()
    }
}

/// The positive radial ground state on the unit n-ball.
#[derive(Clone, Debug)]
pub struct RadialProfile {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// one-sided U'(1) < 0 (Hopf)
    pub derivative_at_boundary: f64,
    pub params: ProblemParams,
    pub shooting: ShootingDiagnostics,
}

#[derive(Clone, Debug)]
pub struct ShootingDiagnostics {
    /// sign-definite bracket [s_lo, s_hi] for the shooting height
    pub bracket: (f64, f64),
    /// U(1; s) decreased monotonically across the bracket samples
    pub bracket_monotone: bool,
    pub bisections: usize,
    pub newton_iterations: usize,
    /// max |scheme residual| after the Newton polish
    pub collocation_residual: f64,
}

impl RadialProfile {
    pub fn center_value(&self) -> f64 {
        self.values[0]
    }

    pub fn interpolant(&self) -> MonotoneCubic {
        MonotoneCubic::new(&self.grid, &self.values)
    }

    /// Scheme residual of `Δ_h U + U^p` at interior nodes.
    pub fn collocation_residual(&self) -> f64 {
        let nn = self.grid.len() - 1;
        let scheme = RadialScheme::new(self.params.n, nn);
        let interior = &self.values[..nn];
        let lap = scheme.apply_laplacian(interior);
        lap.iter()
            .zip(interior)
            .map(|(l, u)| (l + u.powf(self.params.p)).abs())
            .fold(0.0f64, f64::max)
    }
}

/// Solve for the ground state by shooting (bracketed bisection on the
/// center height) followed by a Newton polish of the collocation system on
/// the production grid.
pub fn solve_ground_state(params: ProblemParams, tol: f64, grid_size: usize) -> Result<RadialProfile> {
    params.require_subcritical()?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    if grid_size < 64 {
        return Err(Error::InvalidParameter(format!(
            "grid_size must be >= 64, got {grid_size}"
        )));
    }

    let shot = |s: f64| shoot_boundary_value(params, s, 4 * grid_size.max(1024));

    // Bracket: U(1; s) > 0 for small s, < 0 once the nonlinearity bends the
    // profile through zero before r = 1.
    let s_lo = 0.1;
    let f_lo = shot(s_lo);
    if f_lo <= 0.0 {
        return Err(Error::NonConvergence { last_height: s_lo });
    }
    let mut s_hi = 1.0;
    let mut f_hi = shot(s_hi);
    let mut doublings = 0;
    while f_hi > 0.0 {
        s_hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::NonConvergence { last_height: s_hi });
        }
        f_hi = shot(s_hi);
    }
    let bracket = (if doublings == 0 { s_lo } else { s_hi / 2.0 }, s_hi);

    // monotonicity of s -> U(1; s) across the final bracket
    let mut monotone = true;
    let mut prev = f64::INFINITY;
    for j in 0..5 {
        let s = bracket.0 + (bracket.1 - bracket.0) * j as f64 / 4.0;
        let v = shot(s);
        if v > prev {
            monotone = false;
        }
        prev = v;
    }

    let (mut a, mut b) = bracket;
    let mut bisections = 0;
    while (b - a) > 1e-14 * b && bisections < 120 {
        let mid = 0.5 * (a + b);
        if shot(mid) > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        bisections += 1;
    }
    let s_star = 0.5 * (a + b);

    // sample the shot profile on the production grid, then polish the
    // collocation equations with Newton
    let mut values = sample_profile(params, s_star, grid_size);
    let scheme = RadialScheme::new(params.n, grid_size);
    let p = params.p;
    let mut newton_iterations = 0;
    #[allow(unused_assignments)]
    let mut residual = f64::INFINITY;
    let mut best = f64::INFINITY;
    let mut best_values = values.clone();
    for _ in 0..50 {
        let lap = scheme.apply_laplacian(&values[..grid_size]);
        let res: Vec<f64> = lap
            .iter()
            .zip(&values[..grid_size])
            .map(|(l, u)| l + u.max(0.0).powf(p))
            .collect();
        residual = linalg::norm_inf(&res);
        newton_iterations += 1;
        let substantial_progress = residual < 0.25 * best;
        if residual < best {
            best = residual;
            best_values.copy_from_slice(&values);
        }
        // stop at the requested tolerance or at the roundoff floor of the
        // 1/h² stencil (no further progress)
        if residual < tol.min(1e-11) * (1.0 + s_star.powf(p))
            || (!substantial_progress && newton_iterations > 1)
        {
            break;
        }
        // Jacobian Δ_h + diag(p U^{p-1}) as a pivoted tridiagonal solve
        let h2 = scheme.h * scheme.h;
        let nn = grid_size;
        let mut dl = vec![0.0; nn - 1];
        let mut d = vec![0.0; nn];
        let mut du = vec![0.0; nn - 1];
        for i in 0..nn {
            let am = if i > 0 { scheme.alpha[i - 1] } else { 0.0 };
            d[i] = -(scheme.alpha[i] + am) / (h2 * scheme.vtil[i])
                + p * values[i].max(0.0).powf(p - 1.0);
            if i + 1 < nn {
                du[i] = scheme.alpha[i] / (h2 * scheme.vtil[i]);
                dl[i] = scheme.alpha[i] / (h2 * scheme.vtil[i + 1]);
            }
        }
        let lu = tridiag::TridiagLu::factor(&dl, &d, &du)?;
        let delta = lu.solve(&res);
        for i in 0..nn {
            values[i] -= delta[i];
        }
    }
    residual = best;
    values = best_values;
    if residual > tol.max(1e-8) * (1.0 + s_star.powf(p)) {
        return Err(Error::NonConvergence { last_height: s_star });
    }
    values[grid_size] = 0.0;

    // invariants: positivity and strict monotone decrease
    for i in 0..grid_size {
        if values[i] <= 0.0 || values[i + 1] >= values[i] {
            return Err(Error::NonConvergence { last_height: s_star });
        }
    }

    let grid: Vec<f64> = (0..=grid_size).map(|i| i as f64 * scheme.h).collect();
    let n = grid_size;
    // one-sided second-order slope at r = 1 (U_N = 0)
    let slope = (3.0 * values[n] - 4.0 * values[n - 1] + values[n - 2]) / (2.0 * scheme.h);
    if slope >= 0.0 {
        return Err(Error::NonConvergence { last_height: s_star });
    }

    Ok(RadialProfile {
        grid,
        values,
        derivative_at_boundary: slope,
        params,
        shooting: ShootingDiagnostics {
            bracket,
            bracket_monotone: monotone,
            bisections,
            newton_iterations,
            collocation_residual: residual,
        },
    })
}

/// RK4 integration of the radial IVP; returns U(1; s). The sign-preserving
/// power keeps the flow defined past a zero crossing.
fn shoot_boundary_value(params: ProblemParams, s: f64, steps: usize) -> f64 {
    integrate_ivp(params, s, steps, None)
}

fn sample_profile(params: ProblemParams, s: f64, grid_size: usize) -> Vec<f64> {
    let oversample = 8;
    let mut out = vec![0.0; grid_size + 1];
    integrate_ivp(params, s, grid_size * oversample, Some((&mut out, oversample)));
    out[grid_size] = 0.0;
    out
}

fn integrate_ivp(
    params: ProblemParams,
    s: f64,
    steps: usize,
    mut record: Option<(&mut [f64], usize)>,
) -> f64 {
    let n = params.n as f64;
    let p = params.p;
    let h = 1.0 / steps as f64;
    let sign_pow = |u: f64| u.abs().powf(p - 1.0) * u;
    let rhs = |r: f64, u: f64, v: f64| -> (f64, f64) {
        if r < 1e-13 {
            // ΔU(0) = n U''(0) for radial U with U'(0) = 0
            (v, -sign_pow(u) / n)
        } else {
            (v, -(n - 1.0) / r * v - sign_pow(u))
        }
    };
    let mut u = s;
    let mut v = 0.0;
    if let Some((out, _)) = record.as_mut() {
        out[0] = u;
    }
    for step in 0..steps {
        let r = step as f64 * h;
        let (k1u, k1v) = rhs(r, u, v);
        let (k2u, k2v) = rhs(r + 0.5 * h, u + 0.5 * h * k1u, v + 0.5 * h * k1v);
        let (k3u, k3v) = rhs(r + 0.5 * h, u + 0.5 * h * k2u, v + 0.5 * h * k2v);
        let (k4u, k4v) = rhs(r + h, u + h * k3u, v + h * k3v);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        if let Some((out, oversample)) = record.as_mut() {
            let m = *oversample;
            if (step + 1) % m == 0 {
                out[(step + 1) / m] = u;
            }
        }
    }
    u
}

/// `ū_ε` at distance `dist` from the manifold: `ε^{-2/(p-1)} U(dist/ε)` via
/// monotone cubic interpolation; exactly 0 on the boundary.
pub fn evaluate_ubar(profile: &RadialProfile, eps: f64, dist: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    if dist < 0.0 {
        return Err(Error::InvalidParameter("dist must be nonnegative".into()));
    }
    if dist > eps {
        return Err(Error::OutOfTube { dist, eps });
    }
    if dist == eps {
        return Ok(0.0);
    }
    let scale = eps.powf(-2.0 / (profile.params.p - 1.0));
    Ok(scale * profile.interpolant().eval(dist / eps).max(0.0))
}

/// Eigenpairs of the linearized operator for one angular mode.
#[derive(Clone, Debug)]
pub struct ModeSpectrum {
    pub angular_mode: usize,
    /// dimension of the spherical-harmonic space of degree l on S^{n-1}
    pub multiplicity: usize,
    pub eigenvalues: Vec<f64>,
    /// radial factors on `grid`, normalized so that
    /// ω_{n-1} ∫_0^1 φ² r^{n-1} dr = 1; for l = 0 this is the L²(B_1^n)
    /// norm of x ↦ φ(|x|)
    pub eigenfunctions: Vec<Vec<f64>>,
    pub grid: Vec<f64>,
}

/// Spherical-harmonic multiplicity of degree l in dimension n.
pub fn harmonic_multiplicity(n: usize, l: usize) -> usize {
    match n {
        1 => {
            // S^0 has one even class (l = 0) and one odd class (l = 1)
            if l <= 1 {
                1
            } else {
                0
            }
        }
        2 => {
            if l == 0 {
                1
            } else {
                2
            }
        }
        _ => {
            let binom = |a: usize, b: usize| -> usize {
                if a < b {
                    return 0;
                }
                let mut acc: u128 = 1;
                for i in 0..b {
                    acc = acc * (a - i) as u128 / (i + 1) as u128;
                }
                acc as usize
            };
            let d = n + l;
            binom(d - 1, l) - if l >= 2 { binom(d - 3, l - 2) } else { 0 }
        }
    }
}

/// Spectrum of `L = -(Δ + p U^{p-1})` per angular mode l <= max_mode, with
/// Dirichlet data at r = 1 and the regularity condition at r = 0.
///
/// For n = 1 the fiber sphere S^0 has only the even/odd classes, so modes
/// are capped at l <= 1 regardless of `max_mode`.
pub fn linearized_spectrum(
    profile: &RadialProfile,
    max_mode: usize,
    eigs_per_mode: usize,
) -> Result<Vec<ModeSpectrum>> {
    let params = profile.params;
    let n = params.n;
    let nn = profile.grid.len() - 1;
    let scheme = RadialScheme::new(n, nn);
    let p = params.p;
    let omega = sphere_surface_measure(n);
    let h = scheme.h;
    let mode_cap = if n == 1 { max_mode.min(1) } else { max_mode };

    let mut out = Vec::new();
    for l in 0..=mode_cap {
        let first = if l == 0 { 0 } else { 1 };
        // l (l + n - 2); signed because n = 1, l = 0 makes the factor -1
        let centrifugal = (l as i64 * (l as i64 + n as i64 - 2)) as f64;
        let q: Vec<f64> = (0..nn)
            .map(|i| {
                let cf = if i == 0 {
                    0.0 // node excluded for l >= 1; term vanishes for l = 0
                } else {
                    centrifugal / (profile.grid[i] * profile.grid[i])
                };
                cf - p * profile.values[i].powf(p - 1.0)
            })
            .collect();

        // symmetrized tridiagonal of -Δ_h + q on nodes first..nn
        let h2 = h * h;
        let mut d = Vec::with_capacity(nn - first);
        let mut e = Vec::with_capacity(nn - first);
        for i in first..nn {
            let am = if i > 0 { scheme.alpha[i - 1] } else { 0.0 };
            d.push((scheme.alpha[i] + am) / (h2 * scheme.vtil[i]) + q[i]);
            if i + 1 < nn {
                e.push(-scheme.alpha[i] / (h2 * (scheme.vtil[i] * scheme.vtil[i + 1]).sqrt()));
            }
        }

        let count = eigs_per_mode.min(d.len());
        let (vals, vecs) = if count * 4 >= d.len() {
            tridiag::eigen(&d, &e)?
        } else {
            // bisection + inverse iteration for the low end only
            let mut vals: Vec<f64> = Vec::with_capacity(count);
            let mut vecs: Vec<Vec<f64>> = Vec::with_capacity(count);
            for kk in 0..count {
                let v = tridiag::eigenvalue_by_bisection(&d, &e, kk, 1e-13);
                let mut cluster: Vec<Vec<f64>> = Vec::new();
                for (&w, x) in vals.iter().zip(vecs.iter()) {
                    if (w - v).abs() < 1e-8 * (1.0 + v.abs()) {
                        cluster.push(x.clone());
                    }
                }
                vecs.push(tridiag::eigenvector(&d, &e, v, &cluster)?);
                vals.push(v);
            }
            (vals, vecs)
        };

        let mut eigenvalues = Vec::with_capacity(count);
        let mut eigenfunctions = Vec::with_capacity(count);
        for j in 0..count {
            eigenvalues.push(vals[j]);
            // unscale the symmetrization, then apply the documented norm
            let mut phi = vec![0.0; nn + 1];
            for (idx, i) in (first..nn).enumerate() {
                phi[i] = vecs[j][idx] / scheme.vtil[i].sqrt();
            }
            let nrm2: f64 = (0..nn).map(|i| phi[i] * phi[i] * scheme.vtil[i] * h).sum();
            let mut scale = 1.0 / (omega * nrm2).sqrt();
            if l == 0 && j == 0 {
                // ground mode is sign-definite; fix it positive
                scale *= phi[nn / 2].signum();
            }
            for v in phi.iter_mut() {
                *v *= scale;
            }
            eigenfunctions.push(phi);
        }
        for w in eigenvalues.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::EigenNonConvergence(format!(
                    "mode {l} eigenvalues not strictly increasing"
                )));
            }
        }
        out.push(ModeSpectrum {
            angular_mode: l,
            multiplicity: harmonic_multiplicity(n, l),
            eigenvalues,
            eigenfunctions,
            grid: profile.grid.clone(),
        });
    }

    // nondegeneracy across the merged list
    let merged = FiberSpectrum::from_modes(&out);
    let tol = 1e-6;
    for entry in &merged.entries {
        if entry.value.abs() < tol {
            return Err(Error::DegenerateSpectrum {
                mode: entry.mode,
                index: entry.index_in_mode,
                value: entry.value,
                tol,
            });
        }
    }
    if merged.entries.len() >= 2 && !(merged.mu0() < 0.0 && merged.mu1() > 0.0) {
        return Err(Error::DegenerateSpectrum {
            mode: 0,
            index: 0,
            value: merged.mu0(),
            tol: 0.0,
        });
    }
    Ok(out)
}

/// Merged fiber spectrum across angular modes, sorted ascending.
#[derive(Clone, Debug)]
pub struct FiberSpectrum {
    pub entries: Vec<FiberEigen>,
}

#[derive(Clone, Copy, Debug)]
pub struct FiberEigen {
    pub value: f64,
    pub mode: usize,
    pub index_in_mode: usize,
    pub multiplicity: usize,
}

impl FiberSpectrum {
    pub fn from_modes(modes: &[ModeSpectrum]) -> Self {
        let mut entries: Vec<FiberEigen> = modes
            .iter()
            .flat_map(|m| {
                m.eigenvalues.iter().enumerate().map(move |(j, &v)| FiberEigen {
                    value: v,
                    mode: m.angular_mode,
                    index_in_mode: j,
                    multiplicity: m.multiplicity,
                })
            })
            .collect();
        entries.sort_by(|a, b| a.value.total_cmp(&b.value));
        Self { entries }
    }

    /// lowest (negative) eigenvalue μ_0
    pub fn mu0(&self) -> f64 {
        self.entries[0].value
    }

    /// next spectral value μ_1
    pub fn mu1(&self) -> f64 {
        self.entries[1].value
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(n: usize, p: f64) -> ProblemParams {
        ProblemParams::new(n, p, 1).unwrap()
    }

    #[test]
    fn supercritical_is_rejected() {
        // p = (n+2)/(n-2) = 5 at n = 3 sits exactly on the excluded boundary
        let prm = params(3, 5.0);
        match solve_ground_state(prm, 1e-10, 128) {
            Err(Error::SupercriticalExponent { n: 3, .. }) => {}
            other => panic!("expected SupercriticalExponent, got {other:?}"),
        }
    }

    #[test]
    fn ground_state_n1_p3_matches_elliptic_closed_form() {
        // For n = 1, p = 3 the profile is U(r) = c cn(c r, 1/sqrt 2) with
        // c = K(1/sqrt 2); the center height equals the elliptic integral.
        let prm = params(1, 3.0);
        let prof = solve_ground_state(prm, 1e-10, 1024).unwrap();
        let k_val = crate::oracle::elliptic_k_inv_sqrt2();
        assert!(
            (prof.center_value() - k_val).abs() < 5e-6,
            "U(0) = {} vs K = {}",
            prof.center_value(),
            k_val
        );
        assert!(prof.derivative_at_boundary < 0.0);
        assert!(prof.shooting.bracket_monotone);
        assert!(prof.shooting.collocation_residual < 1e-8);
    }

    #[test]
    fn ground_state_invariants_n2() {
        let prm = params(2, 2.0);
        let prof = solve_ground_state(prm, 1e-10, 512).unwrap();
        assert!(prof.center_value() > 0.0);
        assert!(prof.derivative_at_boundary < 0.0);
        assert_eq!(*prof.values.last().unwrap(), 0.0);
        assert!(prof.collocation_residual() < 1e-8);
    }

    #[test]
    fn ubar_edges() {
        let prm = params(1, 3.0);
        let prof = solve_ground_state(prm, 1e-10, 256).unwrap();
        assert_eq!(evaluate_ubar(&prof, 0.2, 0.2).unwrap(), 0.0);
        // identity rescaling at grid nodes
        for &r in prof.grid.iter().step_by(37) {
            let v = evaluate_ubar(&prof, 1.0, r).unwrap();
            let exact = prof.interpolant().eval(r).max(0.0);
            assert!((v - exact).abs() < 1e-14);
        }
        // scaling at the center
        let v = evaluate_ubar(&prof, 0.1, 0.0).unwrap();
        assert!((v - prof.center_value() / 0.1).abs() < 1e-10);
        assert!(matches!(
            evaluate_ubar(&prof, 0.1, 0.2),
            Err(Error::OutOfTube { .. })
        ));
    }

    #[test]
    fn spectrum_signs_and_ground_mode() {
        let prm = params(1, 3.0);
        let prof = solve_ground_state(prm, 1e-10, 512).unwrap();
        let modes = linearized_spectrum(&prof, 1, 6).unwrap();
        let merged = FiberSpectrum::from_modes(&modes);
        assert!(
            merged.mu0() < 0.0 && merged.mu1() > 0.0,
            "mu0 = {}, mu1 = {}",
            merged.mu0(),
            merged.mu1()
        );
        // ground eigenfunction positive in the interior
        let phi0 = &modes[0].eigenfunctions[0];
        for i in 0..phi0.len() - 1 {
            assert!(phi0[i] > 0.0, "phi0 changes sign at node {i}");
        }
        // minimum over modes attained at l = 0
        assert!(modes[0].eigenvalues[0] < modes[1].eigenvalues[0]);
        // normalization under the documented measure
        let scheme = RadialScheme::new(1, prof.grid.len() - 1);
        let nrm: f64 = (0..prof.grid.len() - 1)
            .map(|i| phi0[i] * phi0[i] * scheme.vtil[i] * scheme.h)
            .sum::<f64>()
            * sphere_surface_measure(1);
        assert!((nrm - 1.0).abs() < 1e-8);
    }

    #[test]
    fn spectrum_ground_positive_n2() {
        let prm = params(2, 3.0);
        let prof = solve_ground_state(prm, 1e-10, 512).unwrap();
        let modes = linearized_spectrum(&prof, 2, 4).unwrap();
        let phi0 = &modes[0].eigenfunctions[0];
        for i in 0..phi0.len() - 1 {
            assert!(phi0[i] > 0.0);
        }
        for m in &modes {
            for w in m.eigenvalues.windows(2) {
                assert!(w[0] < w[1]);
            }
        }
    }

    #[test]
    fn rescaling_identity_at_grid_nodes() {
        // ε²(Δ_{g_z} ū_ε + ū_ε^p)(ε r) equals the unit-ball residual exactly
        // at grid nodes (pure algebra of the rescaled grid)
        let prm = params(1, 3.0);
        let prof = solve_ground_state(prm, 1e-10, 256).unwrap();
        let nn = prof.grid.len() - 1;
        let scheme = RadialScheme::new(1, nn);
        for eps in [0.5, 0.1, 0.03] {
            let scale = (eps as f64).powf(-2.0 / (prm.p - 1.0));
            let ubar: Vec<f64> = prof.values[..nn].iter().map(|&u| scale * u).collect();
            // Laplacian on the physical grid of spacing ε h
            let lap_unit = scheme.apply_laplacian(&ubar);
            for i in 0..nn {
                let lhs = eps * eps * (lap_unit[i] / (eps * eps) + ubar[i].powf(prm.p));
                let rhs = scheme.apply_laplacian(&prof.values[..nn])[i]
                    + prof.values[i].powf(prm.p);
                assert!((lhs - rhs).abs() < 1e-9 * scale, "i={i} eps={eps}");
            }
        }
    }
}
