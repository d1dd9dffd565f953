//! Base manifolds Λ: closed-form Laplace-Beltrami spectra (circle, flat
//! torus, round sphere, closed curves by total length), Weyl counting, and
//! rotation-minimizing normal frames for embedded closed curves.

use crate::error::{Error, Result};
use crate::linalg::{self, spectral};
use crate::radial::{harmonic_multiplicity, sphere_surface_measure};

/// Spectrum family of the base manifold.
#[derive(Clone, Debug)]
pub enum Family {
    /// circle of radius R: λ_j = (j/R)², multiplicity 2 for j >= 1
    Circle { radius: f64 },
    /// flat torus R^k / (L_1 Z x ... x L_k Z): lattice sums Σ (2π n_i / L_i)²
    FlatTorus { lengths: Vec<f64> },
    /// round sphere S^k of radius R: l(l+k-1)/R² with harmonic multiplicities
    Sphere { dim: usize, radius: f64 },
    /// closed curve: spectrally a circle of circumference = curve length
    Numeric { length: f64 },
}

/// Sorted Laplace-Beltrami eigenvalues with multiplicities and Weyl data.
#[derive(Clone, Debug)]
pub struct ManifoldSpectrum {
    pub dim: usize,
    pub family: Family,
    /// distinct eigenvalues ascending with multiplicities
    pub eigenvalues: Vec<(f64, usize)>,
    /// leading coefficient of N(λ) ~ c λ^{k/2}
    pub weyl_constant: f64,
}

impl ManifoldSpectrum {
    /// Eigenvalues expanded by multiplicity (ascending).
    pub fn expanded(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for &(v, m) in &self.eigenvalues {
            for _ in 0..m {
                out.push(v);
            }
        }
        out
    }

    pub fn max_computed(&self) -> f64 {
        self.eigenvalues.last().map(|&(v, _)| v).unwrap_or(0.0)
    }

    pub fn total_count(&self) -> usize {
        self.eigenvalues.iter().map(|&(_, m)| m).sum()
    }
}

/// First eigenvalues of -Δ on Λ, at least `count` of them counted with
/// multiplicity.
pub fn model_spectrum(family: &Family, count: usize) -> Result<ManifoldSpectrum> {
    if count < 1 {
        return Err(Error::InvalidParameter("count must be >= 1".into()));
    }
    match family {
        Family::Circle { radius } => {
            if !(*radius > 0.0) {
                return Err(Error::UnsupportedFamily("circle needs radius > 0".into()));
            }
            let mut eig = vec![(0.0, 1usize)];
            let mut total = 1;
            let mut j = 1u64;
            while total < count {
                let v = (j as f64 / radius) * (j as f64 / radius);
                eig.push((v, 2));
                total += 2;
                j += 1;
            }
            Ok(ManifoldSpectrum {
                dim: 1,
                family: family.clone(),
                eigenvalues: eig,
                weyl_constant: 2.0 * radius,
            })
        }
        Family::Numeric { length } => {
            if !(*length > 0.0) {
                return Err(Error::UnsupportedFamily("curve needs positive length".into()));
            }
            let radius = length / (2.0 * std::f64::consts::PI);
            let inner = model_spectrum(&Family::Circle { radius }, count)?;
            Ok(ManifoldSpectrum {
                dim: 1,
                family: family.clone(),
                eigenvalues: inner.eigenvalues,
                weyl_constant: inner.weyl_constant,
            })
        }
        Family::Sphere { dim, radius } => {
            let k = *dim;
            if k < 1 || !(*radius > 0.0) {
                return Err(Error::UnsupportedFamily(format!(
                    "sphere needs dim >= 1 and radius > 0, got dim={k}, radius={radius}"
                )));
            }
            let mut eig = Vec::new();
            let mut total = 0;
            let mut l = 0usize;
            while total < count {
                let v = (l * (l + k - 1)) as f64 / (radius * radius);
                let m = harmonic_multiplicity(k + 1, l);
                eig.push((v, m));
                total += m;
                l += 1;
            }
            // unit-ball volume in dim k times vol(S^k_R) over (2π)^k
            let ball = sphere_surface_measure(k) / k as f64;
            let vol = sphere_surface_measure(k + 1) * radius.powi(k as i32);
            Ok(ManifoldSpectrum {
                dim: k,
                family: family.clone(),
                eigenvalues: eig,
                weyl_constant: ball * vol / (2.0 * std::f64::consts::PI).powi(k as i32),
            })
        }
        Family::FlatTorus { lengths } => {
            let k = lengths.len();
            if k < 1 || lengths.iter().any(|&l| !(l > 0.0)) {
                return Err(Error::UnsupportedFamily("torus needs positive lengths".into()));
            }
            // lattice enumeration with a growing radius cutoff
            let base: Vec<f64> = lengths.iter().map(|&l| 2.0 * std::f64::consts::PI / l).collect();
            let min_base = base.iter().cloned().fold(f64::INFINITY, f64::min);
            let mut cutoff = min_base * min_base * 4.0;
            loop {
                let mut vals: Vec<f64> = Vec::new();
                enumerate_lattice(&base, &mut vec![0i64; k], 0, cutoff, &mut vals);
                vals.sort_by(f64::total_cmp);
                if vals.len() >= count {
                    // group into (value, multiplicity) and drop anything in
                    // the incomplete shell above cutoff/2 safety margin
                    let mut eig: Vec<(f64, usize)> = Vec::new();
                    let mut total = 0usize;
                    for &v in &vals {
                        if let Some(last) = eig.last_mut() {
                            if (v - last.0).abs() < 1e-9 * (1.0 + v) {
                                last.1 += 1;
                                total += 1;
                                continue;
                            }
                        }
                        if total >= count {
                            break;
                        }
                        eig.push((v, 1));
                        total += 1;
                    }
                    if total >= count {
                        let vol: f64 = lengths.iter().product();
                        let ball = sphere_surface_measure(k) / k as f64;
                        return Ok(ManifoldSpectrum {
                            dim: k,
                            family: family.clone(),
                            eigenvalues: eig,
                            weyl_constant: ball * vol
                                / (2.0 * std::f64::consts::PI).powi(k as i32),
                        });
                    }
                }
                cutoff *= 2.0;
            }
        }
    }
}

fn enumerate_lattice(base: &[f64], idx: &mut Vec<i64>, depth: usize, cutoff: f64, out: &mut Vec<f64>) {
    if depth == base.len() {
        let v: f64 = idx
            .iter()
            .zip(base)
            .map(|(&n, &b)| (n as f64 * b) * (n as f64 * b))
            .sum();
        if v <= cutoff {
            out.push(v);
        }
        return;
    }
    let bound = (cutoff.sqrt() / base[depth]).ceil() as i64;
    for n in -bound..=bound {
        idx[depth] = n;
        enumerate_lattice(base, idx, depth + 1, cutoff, out);
    }
}

/// N(λ) = #{ j : λ_j <= λ } with multiplicity; errors if λ lies beyond the
/// computed tail.
pub fn weyl_count(spec: &ManifoldSpectrum, lambda: f64) -> Result<usize> {
    if lambda > spec.max_computed() {
        return Err(Error::RangeExceeded {
            requested: lambda,
            available: spec.max_computed(),
        });
    }
    Ok(spec
        .eigenvalues
        .iter()
        .filter(|&&(v, _)| v <= lambda)
        .map(|&(_, m)| m)
        .sum())
}

/// Fitted exponent of N(λ) against λ over [lo, hi]; Weyl's law predicts k/2.
pub fn fitted_counting_exponent(spec: &ManifoldSpectrum, lo: f64, hi: f64, samples: usize) -> Result<f64> {
    let mut xs = Vec::with_capacity(samples);
    let mut ys = Vec::with_capacity(samples);
    for i in 0..samples {
        let lam = lo * (hi / lo).powf(i as f64 / (samples - 1) as f64);
        xs.push(lam);
        ys.push(weyl_count(spec, lam)? as f64);
    }
    Ok(linalg::fit::log_log_slope(&xs, &ys))
}

/// A closed curve in R^m with a smooth periodic orthonormal normal frame.
#[derive(Clone, Debug)]
pub struct EmbeddedCurve {
    pub ambient_dim: usize,
    /// parameter period; samples sit at t_a = a * period / n_samples
    pub period: f64,
    pub points: Vec<Vec<f64>>,
    /// frame[a][i] = e^i(t_a), i = 0..n-1 normal vectors
    pub frame: Vec<Vec<Vec<f64>>>,
    /// holonomy rotation angle absorbed by the uniform correction
    pub holonomy_angle: f64,
    pub length: f64,
}

impl EmbeddedCurve {
    pub fn n_samples(&self) -> usize {
        self.points.len()
    }

    pub fn normal_dim(&self) -> usize {
        self.ambient_dim - 1
    }

    /// Planar circle of radius R embedded in R^m (arclength parameter).
    /// The frame is analytic: radial normal plus the constant directions
    /// orthogonal to the plane; holonomy vanishes.
    pub fn circle(radius: f64, ambient_dim: usize, n_samples: usize) -> Self {
        assert!(ambient_dim >= 2);
        let period = 2.0 * std::f64::consts::PI * radius;
        let mut points = Vec::with_capacity(n_samples);
        let mut frame = Vec::with_capacity(n_samples);
        for a in 0..n_samples {
            let th = 2.0 * std::f64::consts::PI * a as f64 / n_samples as f64;
            let mut y = vec![0.0; ambient_dim];
            y[0] = radius * th.cos();
            y[1] = radius * th.sin();
            points.push(y);
            let mut vecs = Vec::with_capacity(ambient_dim - 1);
            let mut radial = vec![0.0; ambient_dim];
            radial[0] = th.cos();
            radial[1] = th.sin();
            vecs.push(radial);
            for d in 2..ambient_dim {
                let mut e = vec![0.0; ambient_dim];
                e[d] = 1.0;
                vecs.push(e);
            }
            frame.push(vecs);
        }
        Self {
            ambient_dim,
            period,
            points,
            frame,
            holonomy_angle: 0.0,
            length: period,
        }
    }

    /// Max deviation from orthonormality and tangency over all samples.
    pub fn frame_defect(&self) -> f64 {
        let n = self.normal_dim();
        let tangents = self.tangents();
        let mut worst = 0.0f64;
        for (a, vecs) in self.frame.iter().enumerate() {
            for i in 0..n {
                for j in i..n {
                    let d = linalg::dot(&vecs[i], &vecs[j]) - if i == j { 1.0 } else { 0.0 };
                    worst = worst.max(d.abs());
                }
                let tn = linalg::norm2(&tangents[a]);
                worst = worst.max(linalg::dot(&vecs[i], &tangents[a]).abs() / tn);
            }
        }
        worst
    }

    /// Spectral-derivative tangents Y'(t_a).
    pub fn tangents(&self) -> Vec<Vec<f64>> {
        derive_components(&self.points, self.period, 1)
    }
}

/// Differentiate each ambient component of periodic samples.
pub(crate) fn derive_components(rows: &[Vec<f64>], period: f64, order: u32) -> Vec<Vec<f64>> {
    let n = rows.len();
    let m = rows[0].len();
    let mut out = vec![vec![0.0; m]; n];
    for c in 0..m {
        let comp: Vec<f64> = rows.iter().map(|r| r[c]).collect();
        let d = spectral::periodic_derivative(&comp, period, order);
        for (a, v) in d.into_iter().enumerate() {
            out[a][c] = v;
        }
    }
    out
}

/// Build a rotation-minimizing normal frame over closed-curve samples by
/// the double-reflection transport, correcting end-to-end holonomy with a
/// constant rotation rate spread over the period.
pub fn build_frame(points: &[Vec<f64>], period: f64) -> Result<EmbeddedCurve> {
    let nt = points.len();
    if nt < 8 {
        return Err(Error::InvalidParameter("need at least 8 curve samples".into()));
    }
    let m = points[0].len();
    if m < 2 {
        return Err(Error::InvalidParameter("ambient dimension must be >= 2".into()));
    }
    let n = m - 1;

    // closure: the wrap gap must look like one more regular step
    let gaps: Vec<f64> = (0..nt)
        .map(|a| dist(&points[a], &points[(a + 1) % nt]))
        .collect();
    let mut sorted = gaps.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[nt / 2];
    let wrap_gap = gaps[nt - 1];
    if wrap_gap > 3.0 * median {
        return Err(Error::NonClosedCurve {
            gap: wrap_gap,
            tol: 3.0 * median,
        });
    }

    let tangents = derive_components(points, period, 1);
    for (a, tg) in tangents.iter().enumerate() {
        let speed = linalg::norm2(tg);
        if speed < 1e-10 {
            return Err(Error::DegenerateTangent { index: a, speed });
        }
    }
    let length: f64 =
        tangents.iter().map(|t| linalg::norm2(t)).sum::<f64>() * period / nt as f64;

    // initial orthonormal normal basis at sample 0
    let t0 = unit(&tangents[0]);
    let mut start_frame: Vec<Vec<f64>> = Vec::with_capacity(n);
    for d in 0..m {
        if start_frame.len() == n {
            break;
        }
        let mut cand = vec![0.0; m];
        cand[d] = 1.0;
        linalg::axpy(-linalg::dot(&cand, &t0), &t0, &mut cand);
        for prev in &start_frame {
            linalg::axpy(-linalg::dot(&cand, prev), prev, &mut cand);
        }
        let nrm = linalg::norm2(&cand);
        if nrm > 0.3 {
            linalg::scale(1.0 / nrm, &mut cand);
            start_frame.push(cand);
        }
    }
    if start_frame.len() != n {
        return Err(Error::DegenerateTangent { index: 0, speed: 0.0 });
    }

    // double-reflection transport around the loop, one extra step to close
    let mut frames: Vec<Vec<Vec<f64>>> = Vec::with_capacity(nt + 1);
    frames.push(start_frame.clone());
    for a in 0..nt {
        let b = (a + 1) % nt;
        let ta = unit(&tangents[a]);
        let tb = unit(&tangents[b]);
        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            let u = &frames[a][i];
            // reflect through the chord bisector, then through the tangent
            // bisector (double-reflection rotation-minimizing step)
            let mut v1: Vec<f64> = points[b].iter().zip(&points[a]).map(|(x, y)| x - y).collect();
            if linalg::norm2(&v1) < 1e-15 {
                v1 = ta.clone();
            }
            let c1 = linalg::dot(&v1, &v1);
            let mut ul = u.clone();
            linalg::axpy(-2.0 * linalg::dot(&v1, u) / c1, &v1, &mut ul);
            let mut tl = ta.clone();
            linalg::axpy(-2.0 * linalg::dot(&v1, &ta) / c1, &v1, &mut tl);
            let v2: Vec<f64> = tb.iter().zip(&tl).map(|(x, y)| x - y).collect();
            let c2 = linalg::dot(&v2, &v2);
            if c2 > 1e-28 {
                linalg::axpy(-2.0 * linalg::dot(&v2, &ul) / c2, &v2, &mut ul);
            }
            next.push(ul);
        }
        // drift control: re-orthonormalize against the tangent and earlier
        // frame vectors
        let tb_ref = &tb;
        for i in 0..n {
            let mut v = next[i].clone();
            linalg::axpy(-linalg::dot(&v, tb_ref), tb_ref, &mut v);
            for j in 0..i {
                let prev = next[j].clone();
                linalg::axpy(-linalg::dot(&v, &prev), &prev, &mut v);
            }
            let nrm = linalg::norm2(&v);
            linalg::scale(1.0 / nrm, &mut v);
            next[i] = v;
        }
        frames.push(next);
    }

    // holonomy: compare the transported closing frame with the start frame
    let end = &frames[nt];
    let mut hol = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            hol[i][j] = linalg::dot(&end[i], &start_frame[j]);
        }
    }
    let angle = match n {
        1 => {
            if hol[0][0] < 0.0 {
                return Err(Error::TwistedNormalBundle { n });
            }
            0.0
        }
        2 => {
            let det = hol[0][0] * hol[1][1] - hol[0][1] * hol[1][0];
            if det < 0.0 {
                return Err(Error::TwistedNormalBundle { n });
            }
            hol[0][1].atan2(hol[0][0])
        }
        _ => {
            let mut defect = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    defect = defect.max((hol[i][j] - if i == j { 1.0 } else { 0.0 }).abs());
                }
            }
            if defect > 1e-6 {
                return Err(Error::TwistedNormalBundle { n });
            }
            0.0
        }
    };

    // spread the inverse rotation uniformly; acts in the (e^1, e^2) plane
    let mut corrected: Vec<Vec<Vec<f64>>> = Vec::with_capacity(nt);
    for (a, fr) in frames.iter().take(nt).enumerate() {
        let phi = angle * a as f64 / nt as f64;
        let mut vecs = fr.clone();
        if n >= 2 && angle != 0.0 {
            let (c, s) = (phi.cos(), phi.sin());
            let e1 = fr[0].clone();
            let e2 = fr[1].clone();
            for d in 0..m {
                vecs[0][d] = c * e1[d] + s * e2[d];
                vecs[1][d] = -s * e1[d] + c * e2[d];
            }
        }
        corrected.push(vecs);
    }

    let curve = EmbeddedCurve {
        ambient_dim: m,
        period,
        points: points.to_vec(),
        frame: corrected,
        holonomy_angle: angle,
        length,
    };
    // frame periodicity: transporting the corrected frame one step past the
    // end must land on the start frame
    let defect = curve.frame_defect();
    if defect > 1e-8 {
        return Err(Error::DegenerateTangent { index: 0, speed: defect });
    }
    Ok(curve)
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn unit(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    let n = linalg::norm2(&u);
    linalg::scale(1.0 / n, &mut u);
    u
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_spectrum_closed_form() {
        let spec = model_spectrum(&Family::Circle { radius: 1.0 }, 5).unwrap();
        let vals = spec.expanded();
        assert_eq!(&vals[..5], &[0.0, 1.0, 1.0, 4.0, 4.0]);
        assert_eq!(spec.weyl_constant, 2.0);
    }

    #[test]
    fn sphere_spectrum_closed_form() {
        let spec = model_spectrum(&Family::Sphere { dim: 2, radius: 1.0 }, 4).unwrap();
        let vals = spec.expanded();
        assert_eq!(&vals[..4], &[0.0, 2.0, 2.0, 2.0]);
        // deeper request exposes the l = 2 shell: 6 with multiplicity 5
        let spec9 = model_spectrum(&Family::Sphere { dim: 2, radius: 1.0 }, 9).unwrap();
        assert_eq!(spec9.eigenvalues[2], (6.0, 5));
    }

    #[test]
    fn torus_spectrum_matches_brute_force() {
        let tau = 2.0 * std::f64::consts::PI;
        let spec = model_spectrum(
            &Family::FlatTorus { lengths: vec![tau, tau] },
            5,
        )
        .unwrap();
        let vals = spec.expanded();
        assert_eq!(&vals[..5], &[0.0, 1.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn weyl_count_circle_exact() {
        let spec = model_spectrum(&Family::Circle { radius: 1.0 }, 64).unwrap();
        assert_eq!(weyl_count(&spec, 0.0).unwrap(), 1);
        assert_eq!(weyl_count(&spec, 4.5).unwrap(), 5);
        // closed form 2 floor(R sqrt(λ)) + 1
        for lam in [0.5f64, 2.0, 9.1, 30.0, 100.0, 420.0] {
            let expect = 2 * (lam.sqrt().floor() as usize) + 1;
            assert_eq!(weyl_count(&spec, lam).unwrap(), expect, "λ={lam}");
        }
        assert!(matches!(
            weyl_count(&spec, 1e9),
            Err(Error::RangeExceeded { .. })
        ));
    }

    #[test]
    fn weyl_exponent_sphere() {
        let spec = model_spectrum(&Family::Sphere { dim: 2, radius: 1.0 }, 12000).unwrap();
        let fit = fitted_counting_exponent(&spec, 1e2, 1e4, 24).unwrap();
        assert!((fit - 1.0).abs() < 0.05, "fitted exponent {fit}");
    }

    #[test]
    fn spectrum_prefix_stable() {
        let small = model_spectrum(&Family::Circle { radius: 2.5 }, 10).unwrap();
        let large = model_spectrum(&Family::Circle { radius: 2.5 }, 50).unwrap();
        for (a, b) in small.expanded().iter().zip(large.expanded().iter()) {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn planar_circle_frame_is_outward_normal() {
        let curve = EmbeddedCurve::circle(1.0, 2, 64);
        assert!(curve.frame_defect() < 1e-12);
        assert_eq!(curve.holonomy_angle, 0.0);
        // rebuild numerically from samples
        let built = build_frame(&curve.points, curve.period).unwrap();
        assert!(built.frame_defect() < 1e-10);
        assert!(built.holonomy_angle.abs() < 1e-8);
        assert!((built.length - 2.0 * std::f64::consts::PI).abs() < 1e-8);
        // numeric frame agrees with the outward normal up to global sign
        let s = linalg::dot(&built.frame[0][0], &curve.frame[0][0]).signum();
        for a in (0..64).step_by(7) {
            for d in 0..2 {
                assert!((s * built.frame[a][0][d] - curve.frame[a][0][d]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn circle_in_r3_frame_orthonormal() {
        let curve = EmbeddedCurve::circle(1.0, 3, 128);
        let built = build_frame(&curve.points, curve.period).unwrap();
        assert_eq!(built.normal_dim(), 2);
        assert!(built.frame_defect() < 1e-10);
        assert!(built.holonomy_angle.abs() < 1e-8);
    }

    #[test]
    fn non_closed_arc_rejected() {
        let pts: Vec<Vec<f64>> = (0..32)
            .map(|a| {
                let t = a as f64 / 32.0 * 3.0; // only 3 radians of arc
                vec![t.cos(), t.sin()]
            })
            .collect();
        assert!(matches!(
            build_frame(&pts, 3.0),
            Err(Error::NonClosedCurve { .. })
        ));
    }
}
