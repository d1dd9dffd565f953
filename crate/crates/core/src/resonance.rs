//! The model operator's explicit spectrum `μ_i/ε² + λ_j`, its resonances
//! `ε* = √(-μ_0/λ_j)`, the spectral gap, the admissible set built from
//! dyadic windows with `ε^N` exclusion neighborhoods, Morse-index counting
//! and the Kato eigenvalue-derivative estimate.

use crate::error::{Error, Result};
use crate::manifold::ManifoldSpectrum;
use crate::radial::FiberSpectrum;

/// Tolerance scale for "lattice value is zero": relative to the branch
/// magnitude μ_0/ε².
pub const ON_RESONANCE_TOL: f64 = 1e-10;

/// One model eigenvalue μ_i/ε² + λ_j.
#[derive(Clone, Copy, Debug)]
pub struct LatticePoint {
    pub fiber_index: usize,
    pub base_index: usize,
    pub mu: f64,
    pub lambda: f64,
    pub multiplicity: usize,
}

impl LatticePoint {
    pub fn value(&self, eps: f64) -> f64 {
        self.mu / (eps * eps) + self.lambda
    }

    /// ∂_ε (μ/ε² + λ) = -2μ/ε³, exact for the closed form.
    pub fn eps_derivative(&self, eps: f64) -> f64 {
        -2.0 * self.mu / (eps * eps * eps)
    }
}

/// All lattice values below `cutoff`, sorted ascending. Errors if either
/// spectrum is too shallow to enumerate every value below the cutoff.
pub fn lattice_eigenvalues(
    fiber: &FiberSpectrum,
    base: &ManifoldSpectrum,
    eps: f64,
    cutoff: f64,
) -> Result<Vec<LatticePoint>> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("eps must be positive".into()));
    }
    let e2 = eps * eps;
    let mu_max = fiber.entries.last().map(|e| e.value).unwrap_or(0.0);
    if mu_max / e2 < cutoff {
        return Err(Error::RangeExceeded {
            requested: cutoff,
            available: mu_max / e2,
        });
    }
    let mu_min = fiber.mu0();
    let lambda_needed = cutoff - mu_min / e2;
    if base.max_computed() < lambda_needed {
        return Err(Error::RangeExceeded {
            requested: lambda_needed,
            available: base.max_computed(),
        });
    }
    let mut out = Vec::new();
    for (i, fe) in fiber.entries.iter().enumerate() {
        if fe.value / e2 >= cutoff {
            break;
        }
        for (j, &(lam, mult)) in base.eigenvalues.iter().enumerate() {
            let v = fe.value / e2 + lam;
            if v >= cutoff {
                break;
            }
            out.push(LatticePoint {
                fiber_index: i,
                base_index: j,
                mu: fe.value,
                lambda: lam,
                multiplicity: fe.multiplicity * mult,
            });
        }
    }
    out.sort_by(|a, b| a.value(eps).total_cmp(&b.value(eps)));
    Ok(out)
}

/// A resonance value ε* = √(-μ_0/λ_j) together with its generator.
#[derive(Clone, Copy, Debug)]
pub struct Resonance {
    pub eps_star: f64,
    pub base_index: usize,
    pub lambda: f64,
    pub multiplicity: usize,
}

/// Resonances in [eps_min, eps_max], sorted descending. λ_0 = 0 contributes
/// none. Errors when the base spectrum cannot cover eps_min.
pub fn resonance_set(
    fiber: &FiberSpectrum,
    base: &ManifoldSpectrum,
    eps_min: f64,
    eps_max: f64,
) -> Result<Vec<Resonance>> {
    if !(eps_min > 0.0 && eps_max > eps_min) {
        return Err(Error::InvalidParameter("need 0 < eps_min < eps_max".into()));
    }
    let mu0 = fiber.mu0();
    if !(mu0 < 0.0) {
        return Err(Error::InvalidParameter(format!("mu0 must be negative, got {mu0}")));
    }
    let lambda_needed = -mu0 / (eps_min * eps_min);
    if base.max_computed() < lambda_needed {
        return Err(Error::RangeExceeded {
            requested: lambda_needed,
            available: base.max_computed(),
        });
    }
    let mut out = Vec::new();
    for (j, &(lam, mult)) in base.eigenvalues.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        let star = (-mu0 / lam).sqrt();
        if star >= eps_min && star <= eps_max {
            out.push(Resonance {
                eps_star: star,
                base_index: j,
                lambda: lam,
                multiplicity: mult,
            });
        }
    }
    out.sort_by(|a, b| b.eps_star.total_cmp(&a.eps_star));
    Ok(out)
}

/// Fitted exponent of #{ε* >= e} against e (expected -k).
pub fn resonance_count_exponent(resonances: &[Resonance], lo: f64, hi: f64, samples: usize) -> f64 {
    let xs: Vec<f64> = (0..samples)
        .map(|i| lo * (hi / lo).powf(i as f64 / (samples - 1) as f64))
        .collect();
    let ys: Vec<f64> = xs
        .iter()
        .map(|&e| resonances.iter().filter(|r| r.eps_star >= e).count() as f64)
        .collect();
    crate::linalg::fit::log_log_slope(&xs, &ys)
}

/// Distance from 0 to the model spectrum: min |μ_i/ε² + λ_j|. Returns 0 at
/// a resonance (to tolerance the two statements coincide).
pub fn spectral_gap(fiber: &FiberSpectrum, base: &ManifoldSpectrum, eps: f64) -> Result<f64> {
    let e2 = eps * eps;
    let mu0 = fiber.mu0();
    let target = -mu0 / e2;
    if base.max_computed() < target {
        return Err(Error::RangeExceeded {
            requested: target,
            available: base.max_computed(),
        });
    }
    // i = 0 branch: nearest λ to -μ0/ε²
    let mut gap = f64::INFINITY;
    for &(lam, _) in &base.eigenvalues {
        gap = gap.min((lam - target).abs());
        if lam > target + gap {
            break;
        }
    }
    // i >= 1 branches sit at μ_i/ε² + λ_j >= μ_1/ε² > 0
    let mu1 = fiber.mu1();
    gap = gap.min(mu1 / e2);
    Ok(gap)
}

/// Number of negative model eigenvalues counted with multiplicity:
/// #{ j : μ_0/ε² + λ_j < 0 }. Errors OnResonance when a lattice value sits
/// within tolerance of zero (the count is ill-defined there).
pub fn morse_index_model(fiber: &FiberSpectrum, base: &ManifoldSpectrum, eps: f64) -> Result<usize> {
    let e2 = eps * eps;
    let mu0 = fiber.mu0();
    let target = -mu0 / e2;
    if base.max_computed() < target {
        return Err(Error::RangeExceeded {
            requested: target,
            available: base.max_computed(),
        });
    }
    let tol = ON_RESONANCE_TOL / e2;
    let mut count = 0usize;
    for &(lam, mult) in &base.eigenvalues {
        let v = mu0 / e2 + lam;
        if v.abs() < tol {
            return Err(Error::OnResonance { value: v, tol });
        }
        if v < 0.0 {
            count += mult;
        } else {
            break;
        }
    }
    Ok(count)
}

/// Admissible intervals inside one window (w_left, w_right]: remove the
/// closed ε^N-neighborhoods (ε = w_left, the paper's window parameter) of
/// every resonance. Exposed for direct interval-arithmetic checks.
pub fn window_exclusions(
    window: (f64, f64),
    n_exponent: usize,
    resonances: &[Resonance],
) -> Result<Vec<(f64, f64)>> {
    let (wl, wr) = window;
    let radius = wl.powi(n_exponent as i32);
    let mut cuts: Vec<(f64, f64)> = resonances
        .iter()
        .map(|r| (r.eps_star - radius, r.eps_star + radius))
        .filter(|&(a, b)| b > wl && a < wr)
        .collect();
    cuts.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut intervals = Vec::new();
    let mut cursor = wl;
    for (a, b) in cuts {
        if a > cursor {
            intervals.push((cursor, a.min(wr)));
        }
        cursor = cursor.max(b);
        if cursor >= wr {
            break;
        }
    }
    if cursor < wr {
        intervals.push((cursor, wr));
    }
    if intervals.is_empty() {
        return Err(Error::EmptyWindow { left: wl, right: wr });
    }
    Ok(intervals)
}

/// Sweep sample of the resonance analysis.
#[derive(Clone, Copy, Debug)]
pub struct SweepSample {
    pub eps: f64,
    pub gap: f64,
    pub defect: f64,
    pub morse_index: usize,
}

/// Admissible set S_N ∩ (eps_min, eps_max] as a finite union of intervals,
/// with resonances, density-defect samples and gap/index sweeps.
#[derive(Clone, Debug)]
pub struct ResonanceReport {
    pub n_exponent: usize,
    pub eps_min: f64,
    pub eps_max: f64,
    pub resonances: Vec<Resonance>,
    /// admissible intervals, ascending
    pub intervals: Vec<(f64, f64)>,
    pub samples: Vec<SweepSample>,
}

impl ResonanceReport {
    /// Excluded measure below eps among the computed windows
    /// (= ε - meas(S_N ∩ (0, ε]) up to the tail below eps_min, which is
    /// O(eps_min^{N-k}) and outside the computed range).
    pub fn density_defect(&self, eps: f64) -> f64 {
        let mut admissible = 0.0;
        for &(a, b) in &self.intervals {
            if a >= eps {
                break;
            }
            admissible += b.min(eps) - a;
        }
        (eps - self.eps_min - admissible).max(0.0)
    }

    pub fn is_admissible(&self, eps: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| eps > a && eps <= b)
    }

    /// Fitted decay exponent of defect(ε) (expected >= N - k).
    pub fn defect_decay_exponent(&self, lo: f64, hi: f64, samples: usize) -> f64 {
        let xs: Vec<f64> = (0..samples)
            .map(|i| lo * (hi / lo).powf(i as f64 / (samples - 1) as f64))
            .collect();
        let ys: Vec<f64> = xs.iter().map(|&e| self.density_defect(e)).collect();
        crate::linalg::fit::log_log_slope(&xs, &ys)
    }
}

/// Build S_N over dyadic windows (2^{-l-1} E, 2^{-l} E] of (0, eps_max],
/// descending until the window drops below eps_min.
pub fn admissible_set(
    fiber: &FiberSpectrum,
    base: &ManifoldSpectrum,
    n_exponent: usize,
    eps_min: f64,
    eps_max: f64,
    sweep_samples: usize,
) -> Result<ResonanceReport> {
    if n_exponent < 2 {
        return Err(Error::InvalidParameter(
            "window exponent N must be >= max(2, k) for the admissible set".into(),
        ));
    }
    let resonances = resonance_set(fiber, base, eps_min / 2.0, eps_max * 2.0)?;
    let mut intervals = Vec::new();
    let mut wr = eps_max;
    let mut deepest = eps_max;
    while wr > eps_min {
        let wl = (wr / 2.0).max(eps_min);
        let mut part = window_exclusions((wl, wr), n_exponent, &resonances)?;
        intervals.append(&mut part);
        deepest = wl;
        wr = wl;
    }
    intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
    let report_base = ResonanceReport {
        n_exponent,
        eps_min: deepest,
        eps_max,
        resonances,
        intervals,
        samples: Vec::new(),
    };
    let mut samples = Vec::with_capacity(sweep_samples);
    for i in 0..sweep_samples {
        let eps = deepest * (eps_max / deepest).powf((i + 1) as f64 / sweep_samples as f64);
        let gap = spectral_gap(fiber, base, eps)?;
        let morse = morse_index_model(fiber, base, eps).unwrap_or(0);
        samples.push(SweepSample {
            eps,
            gap,
            defect: report_base.density_defect(eps),
            morse_index: morse,
        });
    }
    Ok(ResonanceReport { samples, ..report_base })
}

/// Pointwise admissibility: ε lies in S_N iff its distance to every
/// resonance is at least (ε/2)^N (the tightest dyadic window containing ε).
pub fn is_admissible(
    fiber: &FiberSpectrum,
    base: &ManifoldSpectrum,
    n_exponent: usize,
    eps: f64,
) -> Result<bool> {
    let radius = (eps / 2.0).powi(n_exponent as i32);
    let resonances = resonance_set(fiber, base, (eps - radius).max(eps / 4.0), eps + radius)
        .or_else(|e| match e {
            Error::RangeExceeded { .. } => Err(e),
            _ => Ok(Vec::new()),
        })?;
    Ok(resonances.iter().all(|r| (r.eps_star - eps).abs() >= radius))
}

/// Smallest admissible ε >= the request (deterministic 0.5% upward nudges).
pub fn nudge_admissible(
    fiber: &FiberSpectrum,
    base: &ManifoldSpectrum,
    n_exponent: usize,
    eps: f64,
    max_steps: usize,
) -> Result<f64> {
    let mut e = eps;
    for _ in 0..max_steps {
        if is_admissible(fiber, base, n_exponent, e)? {
            return Ok(e);
        }
        e *= 1.005;
    }
    Err(Error::OnResonance { value: e, tol: (e / 2.0).powi(n_exponent as i32) })
}

/// Result of a Kato eigenvalue-derivative check at one ε.
#[derive(Clone, Copy, Debug)]
pub struct KatoReport {
    pub eps: f64,
    pub delta: f64,
    pub nu_minus: f64,
    pub nu_center: f64,
    pub nu_plus: f64,
    /// centered finite-difference dν/dε
    pub derivative: f64,
    /// the model value -2 μ_0 / ε³
    pub model_derivative: f64,
    /// measured c in dν/dε >= c/ε³
    pub lower_bound_constant: f64,
    /// worst eigenvector overlap used in branch tracking (1 for the model)
    pub min_overlap: f64,
}

/// Exact-model check: the branch ν(ε) = μ_0/ε² + λ differentiates to
/// -2 μ_0/ε³ independently of λ.
pub fn kato_check_model(mu0: f64, lambda: f64, eps: f64, rel_delta: f64) -> KatoReport {
    let delta = rel_delta * eps;
    let nu = |e: f64| mu0 / (e * e) + lambda;
    let derivative = (nu(eps + delta) - nu(eps - delta)) / (2.0 * delta);
    let model = -2.0 * mu0 / (eps * eps * eps);
    KatoReport {
        eps,
        delta,
        nu_minus: nu(eps - delta),
        nu_center: nu(eps),
        nu_plus: nu(eps + delta),
        derivative,
        model_derivative: model,
        lower_bound_constant: derivative * eps.powi(3),
        min_overlap: 1.0,
    }
}

/// An ε-family of discrete operators exposing one trackable eigenvalue
/// branch. Implementations return the eigenpair nearest `guess`, preferring
/// maximal overlap with `reference` when eigenvalues cluster; the overlap
/// against the reference is reported.
pub trait BranchFamily {
    fn eigenpair(
        &mut self,
        eps: f64,
        guess: f64,
        reference: Option<&[f64]>,
    ) -> Result<(f64, Vec<f64>, f64)>;
}

/// Centered-stencil dν/dε for a tracked branch of an assembled operator
/// family; errors with BranchCrossing when the eigenvector overlap falls
/// below `branch_tolerance`.
pub fn kato_check(
    family: &mut dyn BranchFamily,
    eps: f64,
    guess: f64,
    rel_delta: f64,
    branch_tolerance: f64,
) -> Result<KatoReport> {
    let delta = rel_delta * eps;
    let (nu_c, w_c, _) = family.eigenpair(eps, guess, None)?;
    // ν ≈ μ0/ε² decreases as ε shrinks; slope estimate 2|ν|/ε
    let scale = 2.0 * nu_c.abs() * delta / eps;
    let (nu_m, _, ov_m) = family.eigenpair(eps - delta, nu_c - scale, Some(&w_c))?;
    let (nu_p, _, ov_p) = family.eigenpair(eps + delta, nu_c + scale, Some(&w_c))?;
    let min_overlap = ov_m.min(ov_p);
    if min_overlap < branch_tolerance {
        return Err(Error::BranchCrossing { eps, overlap: min_overlap });
    }
    let derivative = (nu_p - nu_m) / (2.0 * delta);
    Ok(KatoReport {
        eps,
        delta,
        nu_minus: nu_m,
        nu_center: nu_c,
        nu_plus: nu_p,
        derivative,
        model_derivative: f64::NAN,
        lower_bound_constant: derivative * eps.powi(3),
        min_overlap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{model_spectrum, Family};
    use crate::radial::{FiberEigen, FiberSpectrum};

    /// Synthetic fiber spectrum mirroring the (n=1, p=3) structure.
    fn fiber(mu0: f64, mu1: f64) -> FiberSpectrum {
        FiberSpectrum {
            entries: vec![
                FiberEigen { value: mu0, mode: 0, index_in_mode: 0, multiplicity: 1 },
                FiberEigen { value: mu1, mode: 1, index_in_mode: 0, multiplicity: 1 },
                FiberEigen { value: 3.0 * mu1, mode: 0, index_in_mode: 1, multiplicity: 1 },
            ],
        }
    }

    fn circle(count: usize) -> ManifoldSpectrum {
        model_spectrum(&Family::Circle { radius: 1.0 }, count).unwrap()
    }

    #[test]
    fn negative_lattice_values_at_eps_one() {
        let fib = fiber(-4.0, 5.0);
        let base = circle(64);
        let pts = lattice_eigenvalues(&fib, &base, 1.0, 0.0).unwrap();
        // μ0 + j² < 0 for j = 0, 1 (values -4, -3, -3)
        let vals: Vec<f64> = pts.iter().map(|p| p.value(1.0)).collect();
        let mut expanded = Vec::new();
        for p in &pts {
            for _ in 0..p.multiplicity {
                expanded.push(p.value(1.0));
            }
        }
        assert_eq!(vals, vec![-4.0, -3.0]);
        assert_eq!(expanded, vec![-4.0, -3.0, -3.0]);
        // i >= 1 contributes nothing below zero at any eps
        for eps in [0.1, 0.5, 2.0] {
            let pts = lattice_eigenvalues(&fib, &base, eps, 0.0).unwrap();
            assert!(pts.iter().all(|p| p.fiber_index == 0));
        }
    }

    #[test]
    fn lattice_matches_brute_force() {
        let fib = fiber(-5.15638, 5.15638);
        let base = circle(6000);
        let eps = 0.3;
        let cutoff = 40.0;
        let pts = lattice_eigenvalues(&fib, &base, eps, cutoff).unwrap();
        let mut expanded = Vec::new();
        for p in &pts {
            for _ in 0..p.multiplicity {
                expanded.push(p.value(eps));
            }
        }
        let mu: Vec<(f64, usize)> = fib.entries.iter().map(|e| (e.value, e.multiplicity)).collect();
        let lam: Vec<(f64, usize)> = base.eigenvalues.clone();
        let oracle = crate::oracle::lattice_brute_force(&mu, &lam, eps, cutoff);
        assert_eq!(expanded.len(), oracle.len());
        for (a, b) in expanded.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn circle_resonances_closed_form() {
        let fib = fiber(-5.0, 4.0);
        let base = circle(4000);
        let res = resonance_set(&fib, &base, 0.05, 1.0).unwrap();
        let s = 5.0_f64.sqrt();
        // ε*_j = sqrt(-μ0)/j within [0.05, 1]
        let lo = (s / 0.05).floor() as usize;
        let hi = (s / 1.0).ceil() as usize;
        assert_eq!(res.len(), lo - hi + 1);
        for r in &res {
            let j = (s / r.eps_star).round();
            assert!((r.eps_star - s / j).abs() < 1e-12);
            assert!((fib.mu0() + r.eps_star * r.eps_star * r.lambda).abs() < 1e-9);
        }
        // resonance count scales like eps^{-k}, k = 1 (asymptotic: fit on a
        // range where the count is large)
        let deep = resonance_set(&fib, &base, 0.01, 1.0).unwrap();
        let slope = resonance_count_exponent(&deep, 0.01, 0.1, 12);
        assert!((slope + 1.0).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn gap_zero_exactly_on_resonance_and_positive_between() {
        let fib = fiber(-5.0, 4.0);
        let base = circle(4000);
        let s = 5.0_f64.sqrt();
        let star = s / 7.0;
        let g = spectral_gap(&fib, &base, star).unwrap();
        assert!(g < 1e-10 / (star * star), "gap at resonance {g}");
        // midway between consecutive resonances: equals min of two branches
        let next = s / 8.0;
        let mid = 0.5 * (star + next);
        let g = spectral_gap(&fib, &base, mid).unwrap();
        let e2 = mid * mid;
        let expect = (49.0 - 5.0 / e2).abs().min((64.0 - 5.0 / e2).abs()).min(4.0 / e2);
        assert!((g - expect).abs() < 1e-10);
        assert!(g > 0.0);
    }

    #[test]
    fn morse_index_model_circle() {
        let fib = fiber(-5.0, 4.0);
        let base = circle(4000);
        let s = 5.0_f64.sqrt();
        // ε > sqrt(-μ0): only j = 0 negative
        assert_eq!(morse_index_model(&fib, &base, s * 1.5).unwrap(), 1);
        // ε = sqrt(-μ0)/2.5: j ∈ {0, ±1, ±2}
        assert_eq!(morse_index_model(&fib, &base, s / 2.5).unwrap(), 5);
        // closed form 2 floor(sqrt(-μ0)/ε) + 1 off-resonance
        for eps in [0.11, 0.2, 0.37, 0.81] {
            let expect = 2 * ((s / eps).floor() as usize) + 1;
            assert_eq!(morse_index_model(&fib, &base, eps).unwrap(), expect, "eps={eps}");
        }
        // on a resonance the count is ill-defined
        assert!(matches!(
            morse_index_model(&fib, &base, s / 7.0),
            Err(Error::OnResonance { .. })
        ));
        // monotone: index non-increasing in eps off-resonance
        let mut prev = usize::MAX;
        for i in 0..40 {
            let eps = 0.101 + 0.02 * i as f64;
            let idx = morse_index_model(&fib, &base, eps).unwrap();
            assert!(idx <= prev);
            prev = idx;
        }
    }

    #[test]
    fn single_resonance_window_exclusion_length() {
        let res = [Resonance { eps_star: 0.25, base_index: 1, lambda: 1.0, multiplicity: 2 }];
        let parts = window_exclusions((0.2, 0.4), 3, &res).unwrap();
        // excluded sub-interval has length 2 * 0.2³ = 0.016
        let total: f64 = parts.iter().map(|&(a, b)| b - a).sum();
        assert!(((0.4 - 0.2) - total - 0.016).abs() < 1e-15);
        assert_eq!(parts.len(), 2);
        assert!((parts[0].1 - (0.25 - 0.008)).abs() < 1e-15);
        assert!((parts[1].0 - (0.25 + 0.008)).abs() < 1e-15);
    }

    #[test]
    fn admissible_set_no_resonances_is_everything() {
        let fib = fiber(-5.0, 4.0);
        // spectrum too short for any resonance in range: radius large so
        // λ_j are tiny -> ε* = sqrt(5)/λ^{1/2} large, outside (0, 0.4]
        let base = model_spectrum(&Family::Circle { radius: 1.0 }, 4000).unwrap();
        let rep = admissible_set(&fib, &base, 4, 0.31, 0.4, 4).unwrap();
        // a sub-range strictly between consecutive resonances, with margins
        // wider than the exclusion radius (neighborhoods of resonances
        // outside a window still reach into it)
        let s = 5.0_f64.sqrt();
        let a = s / 7.0 + 0.013;
        let b = s / 6.0 - 0.013;
        let rep2 = admissible_set(&fib, &base, 4, a, b, 4).unwrap();
        let covered: f64 = rep2.intervals.iter().map(|&(x, y)| y - x).sum();
        assert!((covered - (b - a)).abs() < 1e-12, "defect {covered} vs {}", b - a);
        assert!(rep2.density_defect(b) < 1e-15);
        drop(rep);
    }

    #[test]
    fn admissible_set_density_defect_decays() {
        let fib = fiber(-5.15638, 5.15638);
        let base = circle(200_000);
        let rep = admissible_set(&fib, &base, 4, 0.005, 0.5, 8).unwrap();
        // every admissible point keeps distance >= (window left)^N from
        // every resonance
        for &(a, b) in rep.intervals.iter().take(50) {
            let mid = 0.5 * (a + b);
            let wl = rep
                .intervals
                .iter()
                .map(|&(x, _)| x)
                .fold(f64::INFINITY, |acc, x| if x <= mid { acc.min(mid / 2.0) } else { acc });
            let dist = rep
                .resonances
                .iter()
                .map(|r| (r.eps_star - mid).abs())
                .fold(f64::INFINITY, f64::min);
            assert!(dist >= wl.powi(4) * 0.99 || dist == f64::INFINITY);
        }
        // defect(ε)/ε^α -> 0 for α < N - k = 3: fitted decay ≈ N - 1
        let slope = rep.defect_decay_exponent(0.02, 0.5, 10);
        assert!(slope > 2.0, "defect decay slope {slope}");
        // defect bounded by the sum of excluded neighborhoods
        for &eps in &[0.1, 0.3, 0.5] {
            let bound: f64 = rep
                .resonances
                .iter()
                .filter(|r| r.eps_star <= eps)
                .map(|r| 2.0 * r.eps_star.powi(4))
                .sum::<f64>();
            assert!(rep.density_defect(eps) <= bound * 1.5 + 1e-12);
        }
    }

    #[test]
    fn kato_model_derivative() {
        let mu0 = -5.0;
        for eps in [0.1, 0.2, 0.35] {
            let rep = kato_check_model(mu0, 9.0, eps, 1e-3);
            let rel = (rep.derivative - rep.model_derivative).abs() / rep.model_derivative.abs();
            // centered stencil error of 1/ε² is 2(δ/ε)² + O(δ⁴)
            assert!(rel < 3.0e-6, "rel {rel}");
            assert!(rep.derivative > 0.0);
            // i = 1 branch differentiates to -2 μ1/ε³ < 0 (out of the
            // lemma's scope but the formula is exact)
            let rep1 = kato_check_model(4.0, 9.0, eps, 1e-3);
            assert!(rep1.derivative < 0.0);
        }
    }
}
