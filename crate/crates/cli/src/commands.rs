//! Subcommand implementations. Every artifact body is a pure function of
//! the canonical config + seed; the config hash is stamped in the header.

use crate::config::RunConfig;
use anyhow::{anyhow, Context, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::path::Path;
use tube_elliptic::csvio::{self, fmt};
use tube_elliptic::fermi::{laplacian_split, CorrectionOperator, FermiExpansion};
use tube_elliptic::grid::{TubeField, TubeGrid};
use tube_elliptic::manifold::{self, EmbeddedCurve, Family, ManifoldSpectrum};
use tube_elliptic::oracle;
use tube_elliptic::pohozaev as poh;
use tube_elliptic::radial::{
    evaluate_ubar, linearized_spectrum, solve_ground_state, FiberSpectrum, ProblemParams,
    RadialProfile,
};
use tube_elliptic::resonance;
use tube_elliptic::tube::{
    iterate_approximation, picard_solve, DiscreteOperator, PicardParams, TubeOperatorFamily,
};

fn fill_common_defaults(cfg: &mut RunConfig) {
    cfg.set_default("n", "1");
    cfg.set_default("p", "3");
    cfg.set_default("k", "1");
    cfg.set_default("R", "1");
    cfg.set_default("tol", "1e-10");
    cfg.set_default("seed", "0");
    cfg.set_default("family", "circle");
    cfg.set_default("max_mode", "1");
    cfg.set_default("eigs_per_mode", "6");
    cfg.set_default("i_max", "4");
    cfg.set_default("N0", "0");
    cfg.set_default("M", "auto");
    cfg.set_default("budget", "60");
    cfg.set_default("alpha", "0.5");
    cfg.set_default("spacing", "log");
    cfg.set_default("delta_rel", "5e-3");
    cfg.set_default("branch_tol", "0.7");
}

fn params_from(cfg: &RunConfig) -> Result<ProblemParams> {
    let n = cfg.require_usize("n")?;
    let p = cfg.require_f64("p")?;
    let k = cfg.usize_or("k", 1)?;
    Ok(ProblemParams::new(n, p, k)?)
}

fn profile_from(cfg: &RunConfig, out: &Path) -> Result<RadialProfile> {
    let params = params_from(cfg)?;
    let nz = cfg.require_usize("nz")?;
    let tol = cfg.f64_or("tol", 1e-10)?;
    let cache_dir = cfg
        .get("fixture_cache")
        .map(|s| s.into())
        .unwrap_or_else(|| out.join("cache"));
    if let Some(cached) = csvio::load_profile(&cache_dir, params, nz)? {
        return Ok(cached);
    }
    let profile = solve_ground_state(params, tol, nz)?;
    csvio::save_profile(&cache_dir, &profile)?;
    Ok(profile)
}

fn base_spectrum(cfg: &RunConfig, lambda_needed: f64) -> Result<ManifoldSpectrum> {
    let family = match cfg.get("family").unwrap_or("circle") {
        "circle" => Family::Circle { radius: cfg.f64_or("R", 1.0)? },
        "torus" => {
            let lengths: Vec<f64> = cfg
                .require("torus_lengths")?
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| anyhow!("config error: key `torus_lengths` is not a list of numbers"))?;
            Family::FlatTorus { lengths }
        }
        "sphere" => Family::Sphere {
            dim: cfg.require_usize("sphere_dim")?,
            radius: cfg.f64_or("R", 1.0)?,
        },
        "numeric" => {
            let (ts, pts) = csvio::read_curve_csv(cfg.require("curve_csv")?)?;
            let period = infer_period(&ts)?;
            let curve = manifold::build_frame(&pts, period)?;
            Family::Numeric { length: curve.length }
        }
        other => return Err(anyhow!("config error: unknown family `{other}`")),
    };
    let mut count = cfg.usize_or("base_count", 1024)?;
    loop {
        let spec = manifold::model_spectrum(&family, count)?;
        if spec.max_computed() >= lambda_needed || count > 50_000_000 {
            return Ok(spec);
        }
        count *= 4;
    }
}

fn infer_period(ts: &[f64]) -> Result<f64> {
    if ts.len() < 2 {
        return Err(anyhow!("curve CSV needs at least 2 samples"));
    }
    let dt = ts[1] - ts[0];
    Ok(ts[ts.len() - 1] - ts[0] + dt)
}

fn curve_from(cfg: &RunConfig, nt: usize) -> Result<EmbeddedCurve> {
    match cfg.get("family").unwrap_or("circle") {
        "circle" => Ok(EmbeddedCurve::circle(cfg.f64_or("R", 1.0)?, 2, nt)),
        "numeric" => {
            let (ts, pts) = csvio::read_curve_csv(cfg.require("curve_csv")?)?;
            if pts.len() != nt {
                return Err(anyhow!(
                    "config error: key `nt` = {nt} must match the {} curve samples",
                    pts.len()
                ));
            }
            let period = infer_period(&ts)?;
            Ok(manifold::build_frame(&pts, period)?)
        }
        other => Err(anyhow!(
            "config error: family `{other}` has no embedded-curve tube (construct runs need circle or numeric)"
        )),
    }
}

fn fiber_spectrum(cfg: &RunConfig, profile: &RadialProfile) -> Result<FiberSpectrum> {
    let max_mode = cfg.usize_or("max_mode", 1)?;
    let eigs = cfg.usize_or("eigs_per_mode", 6)?;
    let modes = linearized_spectrum(profile, max_mode, eigs)?;
    Ok(FiberSpectrum::from_modes(&modes))
}

fn sweep_points(cfg: &RunConfig) -> Result<Vec<f64>> {
    let lo = cfg.require_f64("eps_lo")?;
    let hi = cfg.require_f64("eps_hi")?;
    let count = cfg.usize_or("count", 6)?;
    if !(lo > 0.0 && hi > lo && count >= 2) {
        return Err(anyhow!("config error: need 0 < eps_lo < eps_hi and count >= 2"));
    }
    Ok((0..count)
        .map(|i| lo * (hi / lo).powf(i as f64 / (count - 1) as f64))
        .collect())
}

pub fn ground_state(cfg: &mut RunConfig, out: &Path) -> Result<()> {
    fill_common_defaults(cfg);
    cfg.set_default("nz", "512");
    let hash = cfg.hash();
    let profile = profile_from(cfg, out)?;
    let rows: Vec<Vec<String>> = profile
        .grid
        .iter()
        .zip(&profile.values)
        .map(|(r, u)| vec![fmt(*r), fmt(*u)])
        .collect();
    csvio::write_csv(out.join("ground_state.csv"), Some(&hash), &["r", "U"], &rows)?;
    let summary = vec![
        vec!["center_value".into(), fmt(profile.center_value())],
        vec!["boundary_slope".into(), fmt(profile.derivative_at_boundary)],
        vec!["collocation_residual".into(), fmt(profile.collocation_residual())],
        vec![
            "ubar_center_eps_0.1".into(),
            fmt(evaluate_ubar(&profile, 0.1, 0.0)?),
        ],
    ];
    csvio::write_csv(
        out.join("ground_state_summary.csv"),
        Some(&hash),
        &["quantity", "value"],
        &summary,
    )?;
    println!("ground-state: U(0) = {}", fmt(profile.center_value()));
    Ok(())
}

pub fn spectrum(cfg: &mut RunConfig, out: &Path) -> Result<()> {
    fill_common_defaults(cfg);
    cfg.set_default("nz", "512");
    cfg.set_default("base_count", "1024");
    let hash = cfg.hash();
    let profile = profile_from(cfg, out)?;
    let modes = linearized_spectrum(
        &profile,
        cfg.usize_or("max_mode", 1)?,
        cfg.usize_or("eigs_per_mode", 6)?,
    )?;
    let mut rows = Vec::new();
    for m in &modes {
        for (j, v) in m.eigenvalues.iter().enumerate() {
            rows.push(vec![m.angular_mode.to_string(), j.to_string(), fmt(*v)]);
        }
    }
    csvio::write_csv(
        out.join("mode_spectrum.csv"),
        Some(&hash),
        &["mode", "index", "eigenvalue"],
        &rows,
    )?;
    let base = base_spectrum(cfg, 0.0)?;
    let rows: Vec<Vec<String>> = base
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(j, (v, m))| vec![j.to_string(), fmt(*v), m.to_string()])
        .collect();
    csvio::write_csv(
        out.join("manifold_spectrum.csv"),
        Some(&hash),
        &["index", "eigenvalue", "multiplicity"],
        &rows,
    )?;
    let merged = FiberSpectrum::from_modes(&modes);
    println!("spectrum: mu0 = {}, mu1 = {}", fmt(merged.mu0()), fmt(merged.mu1()));
    Ok(())
}

pub fn resonance(cfg: &mut RunConfig, out: &Path) -> Result<()> {
    fill_common_defaults(cfg);
    cfg.set_default("nz", "512");
    cfg.set_default("eps_lo", "0.02");
    cfg.set_default("eps_hi", "0.5");
    cfg.set_default("count", "24");
    let k = cfg.usize_or("k", 1)?;
    cfg.set_default("N", &(k + 3).to_string());
    let hash = cfg.hash();
    let profile = profile_from(cfg, out)?;
    let fiber = fiber_spectrum(cfg, &profile)?;
    let eps_lo = cfg.require_f64("eps_lo")?;
    let eps_hi = cfg.require_f64("eps_hi")?;
    let n_exp = cfg.require_usize("N")?;
    let base = base_spectrum(cfg, -fiber.mu0() / (eps_lo * eps_lo / 16.0))?;
    let report = resonance::admissible_set(
        &fiber,
        &base,
        n_exp,
        eps_lo / 2.0,
        eps_hi,
        cfg.usize_or("count", 24)?,
    )?;
    let rows: Vec<Vec<String>> = report
        .resonances
        .iter()
        .map(|r| vec![fmt(r.eps_star), r.base_index.to_string()])
        .collect();
    csvio::write_csv(out.join("resonances.csv"), Some(&hash), &["eps_star", "j"], &rows)?;
    let rows: Vec<Vec<String>> = report
        .intervals
        .iter()
        .map(|(a, b)| vec![fmt(*a), fmt(*b)])
        .collect();
    csvio::write_csv(
        out.join("admissible_intervals.csv"),
        Some(&hash),
        &["left", "right"],
        &rows,
    )?;
    let rows: Vec<Vec<String>> = report
        .samples
        .iter()
        .map(|s| {
            vec![
                fmt(s.eps),
                fmt(s.gap),
                fmt(s.defect),
                s.morse_index.to_string(),
            ]
        })
        .collect();
    csvio::write_csv(
        out.join("resonance_sweep.csv"),
        Some(&hash),
        &["eps", "gap", "defect", "morse_index"],
        &rows,
    )?;
    println!(
        "resonance: {} resonances in [{}, {}], defect decay exponent {:.3}",
        report.resonances.len(),
        fmt(eps_lo),
        fmt(eps_hi),
        report.defect_decay_exponent(eps_lo, eps_hi, 10)
    );
    Ok(())
}

pub fn morse_sweep(cfg: &mut RunConfig, out: &Path) -> Result<()> {
    fill_common_defaults(cfg);
    cfg.set_default("nz", "512");
    cfg.set_default("eps_lo", "0.01");
    cfg.set_default("eps_hi", "0.3");
    cfg.set_default("count", "16");
    let k = cfg.usize_or("k", 1)?;
    cfg.set_default("N", &(k + 3).to_string());
    let hash = cfg.hash();
    let profile = profile_from(cfg, out)?;
    let fiber = fiber_spectrum(cfg, &profile)?;
    let points = sweep_points(cfg)?;
    let n_exp = cfg.require_usize("N")?;
    let base = base_spectrum(cfg, -fiber.mu0() / (points[0] * points[0] / 16.0))?;
    let mut rows = Vec::new();
    let mut eps_ok = Vec::new();
    let mut idx_ok = Vec::new();
    for &eps0 in &points {
        let eps = resonance::nudge_admissible(&fiber, &base, n_exp, eps0, 200)?;
        let gap = resonance::spectral_gap(&fiber, &base, eps)?;
        let idx = resonance::morse_index_model(&fiber, &base, eps)?;
        rows.push(vec![fmt(eps), fmt(gap), fmt(0.0), idx.to_string()]);
        eps_ok.push(eps);
        idx_ok.push(idx as f64);
    }
    csvio::write_csv(
        out.join("morse_sweep.csv"),
        Some(&hash),
        &["eps", "gap", "defect", "morse_index"],
        &rows,
    )?;
    let slope = tube_elliptic::linalg::fit::log_log_slope(&eps_ok, &idx_ok);
    csvio::write_csv(
        out.join("morse_fit.csv"),
        Some(&hash),
        &["quantity", "value"],
        &[vec!["fitted_exponent".into(), fmt(slope)]],
    )?;
    println!("morse-sweep: fitted index exponent {slope:.3} (expected -{k})");
    Ok(())
}

struct ConstructOutcome {
    eps: f64,
    residuals: Vec<f64>,
    ratios: Vec<f64>,
    gap: f64,
    morse_index: usize,
    contraction: f64,
    shape_deviation: f64,
    final_residual: f64,
    symmetry_defect: f64,
    solution: TubeField,
    grid: TubeGrid,
}

fn construct_at(
    cfg: &RunConfig,
    profile: &RadialProfile,
    curve: &EmbeddedCurve,
    fiber: &FiberSpectrum,
    base: &ManifoldSpectrum,
    eps0: f64,
    rng: &mut ChaCha8Rng,
) -> Result<ConstructOutcome> {
    let n_exp = cfg.usize_or("N", 2)?;
    let eps = resonance::nudge_admissible(fiber, base, n_exp, eps0, 200)?;
    let nz = cfg.require_usize("nz")?;
    let nt = cfg.require_usize("nt")?;
    if nt != curve.n_samples() {
        return Err(anyhow!("config error: key `nt` must match the curve sampling"));
    }
    let _ = nz;
    let grid = TubeGrid::line(nt, curve.period, profile.grid.len() - 1, eps);
    let exp = FermiExpansion::from_curve(curve, &grid)?;
    let dop = laplacian_split(&exp)?;
    let i_max = cfg.usize_or("i_max", 3)?;
    let it = iterate_approximation(&grid, &exp, &dop, profile, i_max)?;
    let u_init = it.approximate_solution(i_max);
    let m_exponent = match cfg.get("M") {
        None | Some("auto") => None,
        Some(s) => Some(
            s.parse::<f64>()
                .map_err(|_| anyhow!("config error: key `M` is not a number or `auto`"))?,
        ),
    };
    let params = PicardParams {
        i_used: i_max,
        n_gap: n_exp,
        n0: cfg.usize_or("N0", 0)?,
        m_exponent,
        budget: cfg.usize_or("budget", 60)?,
    };
    let res = picard_solve(&grid, &exp, &dop, profile, &u_init, params)?;
    let op = DiscreteOperator::assemble(&grid, &exp, &res.u, profile.params.p)?;
    let morse_index = op.morse_index(eps)?;
    let (nu_m, nu_p) = op.gap_pair(1e-8)?;
    let gap = nu_m.abs().min(nu_p.abs());
    // seeded random-pair symmetry diagnostic of the assembled L̃
    let nvec = op.dof_count();
    let x: Vec<f64> = (0..nvec).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let y: Vec<f64> = (0..nvec).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let symmetry_defect = op.symmetry_defect(&x, &y);
    Ok(ConstructOutcome {
        eps,
        residuals: it.residuals.clone(),
        ratios: it.ratios.clone(),
        gap,
        morse_index,
        contraction: res.contraction_factor,
        shape_deviation: res.shape_deviation,
        final_residual: res.final_residual,
        symmetry_defect,
        solution: res.u,
        grid,
    })
}

pub fn construct(cfg: &mut RunConfig, out: &Path) -> Result<()> {
    fill_common_defaults(cfg);
    cfg.set_default("nt", "48");
    cfg.set_default("N", "3");
    let hash = cfg.hash();
    let profile = profile_from(cfg, out)?;
    let nt = cfg.require_usize("nt")?;
    let curve = curve_from(cfg, nt)?;
    let fiber = fiber_spectrum(cfg, &profile)?;
    let eps_values: Vec<f64> = if cfg.get("eps").is_some() {
        vec![cfg.require_f64("eps")?]
    } else {
        sweep_points(cfg)?
    };
    let lambda_needed = -fiber.mu0() / (eps_values[0] * eps_values[0] / 16.0);
    let base = base_spectrum(cfg, lambda_needed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.u64_or("seed", 0)?);
    let mut diag_rows = Vec::new();
    for (idx, &eps0) in eps_values.iter().enumerate() {
        let outc = construct_at(cfg, &profile, &curve, &fiber, &base, eps0, &mut rng)
            .with_context(|| format!("construct at eps = {eps0}"))?;
        // solution CSV t,z,u
        let mut rows = Vec::new();
        for a in 0..outc.grid.n_t {
            let t = outc.grid.h_t() * a as f64;
            for b in 0..outc.grid.n_z() {
                let z = outc.grid.eps * outc.grid.x[b];
                rows.push(vec![fmt(t), fmt(z), fmt(outc.solution.get(a, b))]);
            }
        }
        csvio::write_csv(
            out.join(format!("solution_{idx}.csv")),
            Some(&hash),
            &["t", "z", "u"],
            &rows,
        )?;
        for (i, res) in outc.residuals.iter().enumerate() {
            let ratio = if i == 0 { 0.0 } else { outc.ratios[i - 1] };
            diag_rows.push(vec![
                fmt(outc.eps),
                i.to_string(),
                fmt(*res),
                fmt(ratio),
                fmt(outc.gap),
                outc.morse_index.to_string(),
                fmt(outc.contraction),
            ]);
        }
        println!(
            "construct eps={}: |u/ubar-1|={} gap={} index={} symdef={:.1e}",
            fmt(outc.eps),
            fmt(outc.shape_deviation),
            fmt(outc.gap),
            outc.morse_index,
            outc.symmetry_defect,
        );
        let _ = outc.final_residual;
    }
    csvio::write_csv(
        out.join("diagnostics.csv"),
        Some(&hash),
        &["eps", "i", "residual", "ratio", "gap", "morse_index", "contraction_factor"],
        &diag_rows,
    )?;
    std::fs::write(out.join("manifest.txt"), cfg.canonical())?;
    Ok(())
}

pub fn kato(cfg: &mut RunConfig, out: &Path) -> Result<()> {
    fill_common_defaults(cfg);
    cfg.set_default("nt", "16");
    cfg.set_default("nz", "64");
    cfg.set_default("eps", "0.2");
    let hash = cfg.hash();
    let profile = profile_from(cfg, out)?;
    let fiber = fiber_spectrum(cfg, &profile)?;
    let mu0 = fiber.mu0();
    let eps = cfg.require_f64("eps")?;
    let delta_rel = cfg.f64_or("delta_rel", 5e-3)?;
    let model = resonance::kato_check_model(mu0, 0.0, eps, delta_rel);
    let nt = cfg.require_usize("nt")?;
    let curve = curve_from(cfg, nt)?;
    let mut fam = TubeOperatorFamily {
        curve: &curve,
        profile: &profile,
        i_approx: cfg.usize_or("i_max", 3)?.min(2),
    };
    let guess = mu0 / (eps * eps);
    let assembled = resonance::kato_check(
        &mut fam,
        eps,
        guess,
        delta_rel,
        cfg.f64_or("branch_tol", 0.7)?,
    )?;
    let header = [
        "kind",
        "eps",
        "delta",
        "nu_minus",
        "nu_center",
        "nu_plus",
        "derivative",
        "model_derivative",
        "lower_bound_constant",
        "min_overlap",
    ];
    let row = |kind: &str, r: &resonance::KatoReport| -> Vec<String> {
        vec![
            kind.into(),
            fmt(r.eps),
            fmt(r.delta),
            fmt(r.nu_minus),
            fmt(r.nu_center),
            fmt(r.nu_plus),
            fmt(r.derivative),
            fmt(r.model_derivative),
            fmt(r.lower_bound_constant),
            fmt(r.min_overlap),
        ]
    };
    csvio::write_csv(
        out.join("kato.csv"),
        Some(&hash),
        &header,
        &[row("model", &model), row("assembled", &assembled)],
    )?;
    println!(
        "kato: model dnu/deps = {}, assembled = {} (model -2mu0/eps^3 = {})",
        fmt(model.derivative),
        fmt(assembled.derivative),
        fmt(model.model_derivative)
    );
    Ok(())
}

pub fn pohozaev(cfg: &mut RunConfig, out: &Path) -> Result<()> {
    fill_common_defaults(cfg);
    cfg.set_default("nt", "32");
    cfg.set_default("eps", "0.15");
    let hash = cfg.hash();
    let params = params_from(cfg)?;
    let eps = cfg.require_f64("eps")?;
    let header = [
        "eps",
        "boundary_term",
        "bulk1",
        "bulk2",
        "bulk3",
        "residual",
        "coefficient",
        "eps_bar",
        "verdict",
    ];
    let critical = params.critical_exponent().unwrap_or(f64::INFINITY);
    if params.n >= 3 && params.p >= critical {
        // nonexistence certificate path
        let rep = poh::nonexistence_certificate(
            params,
            eps,
            cfg.f64_or("R", 1.0)?,
            cfg.usize_or("nz", 256)?,
            None,
        )?;
        let verdict = match rep.verdict {
            poh::Verdict::NoPositiveSolution { .. } => "no_positive_solution",
            poh::Verdict::Inconclusive { .. } => "inconclusive",
        };
        csvio::write_csv(
            out.join("pohozaev.csv"),
            Some(&hash),
            &header,
            &[vec![
                fmt(eps),
                fmt(0.0),
                fmt(0.0),
                fmt(0.0),
                fmt(0.0),
                fmt(0.0),
                fmt(rep.coefficient),
                fmt(rep.eps_bar),
                verdict.into(),
            ]],
        )?;
        println!(
            "pohozaev certificate: coefficient={} C_geo={} eps_bar={} -> {verdict}",
            fmt(rep.coefficient),
            fmt(rep.c_geo),
            fmt(rep.eps_bar)
        );
        return Ok(());
    }
    // subcritical: evaluate the integrated identity on a converged solution
    cfg.set_default("N", "3");
    let profile = profile_from(cfg, out)?;
    let nt = cfg.require_usize("nt")?;
    let curve = curve_from(cfg, nt)?;
    let fiber = fiber_spectrum(cfg, &profile)?;
    let base = base_spectrum(cfg, -fiber.mu0() / (eps * eps / 16.0))?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.u64_or("seed", 0)?);
    let outc = construct_at(cfg, &profile, &curve, &fiber, &base, eps, &mut rng)?;
    let exp = FermiExpansion::from_curve(&curve, &outc.grid)?;
    let dop: CorrectionOperator = laplacian_split(&exp)?;
    let rep = poh::integrated_identity(
        &outc.grid,
        &exp,
        &dop,
        &outc.solution,
        params.p,
        poh::QuadratureScheme::Standard,
    )?;
    csvio::write_csv(
        out.join("pohozaev.csv"),
        Some(&hash),
        &header,
        &[vec![
            fmt(outc.eps),
            fmt(rep.boundary_term),
            fmt(rep.bulk1),
            fmt(rep.bulk2),
            fmt(rep.bulk3),
            fmt(rep.identity_residual),
            fmt(rep.coefficient),
            fmt(0.0),
            "subcritical".into(),
        ]],
    )?;
    println!(
        "pohozaev identity: residual/energy = {}, poincare ratio = {}",
        fmt(rep.identity_residual.abs() / rep.grad_energy),
        fmt(rep.poincare_ratio)
    );
    Ok(())
}

pub fn fixtures(cfg: &mut RunConfig, out: &Path) -> Result<()> {
    fill_common_defaults(cfg);
    let hash = cfg.hash();
    let dir = out.join("fixtures");
    let mut value_rows: Vec<Vec<String>> = Vec::new();
    for (n, p) in [(1usize, 3.0f64), (2, 3.0), (3, 2.0)] {
        let prm = ProblemParams::new(n, p, 1)?;
        let coarse = oracle::newton_ground_state(prm, 2048)?;
        let fine = oracle::newton_ground_state(prm, 4096)?;
        let u0 = oracle::richardson_second_order(coarse[0], fine[0]);
        value_rows.push(vec![n.to_string(), fmt(p), "U0".into(), fmt(u0)]);
        let mu0_c = oracle::mode_eigenvalues_fd(&coarse, prm, 0, 1, 2048)?[0];
        let mu0_f = oracle::mode_eigenvalues_fd(&fine, prm, 0, 1, 4096)?[0];
        value_rows.push(vec![
            n.to_string(),
            fmt(p),
            "mu0".into(),
            fmt(oracle::richardson_second_order(mu0_c, mu0_f)),
        ]);
        // mu1 = min over (second radial, first nonradial)
        let mu1r_c = oracle::mode_eigenvalues_fd(&coarse, prm, 0, 2, 2048)?[1];
        let mu1r_f = oracle::mode_eigenvalues_fd(&fine, prm, 0, 2, 4096)?[1];
        let mu1a_c = oracle::mode_eigenvalues_fd(&coarse, prm, 1, 1, 2048)?[0];
        let mu1a_f = oracle::mode_eigenvalues_fd(&fine, prm, 1, 1, 4096)?[0];
        let mu1 = oracle::richardson_second_order(mu1r_c, mu1r_f)
            .min(oracle::richardson_second_order(mu1a_c, mu1a_f));
        value_rows.push(vec![n.to_string(), fmt(p), "mu1".into(), fmt(mu1)]);
        let rows: Vec<Vec<String>> = fine
            .iter()
            .enumerate()
            .map(|(i, u)| vec![fmt(i as f64 / 4096.0), fmt(*u)])
            .collect();
        csvio::write_csv(
            dir.join(format!("oracle_ground_state_n{n}.csv")),
            Some(&hash),
            &["r", "U"],
            &rows,
        )?;
    }
    // closed form for (1,3): U(0) = K(1/sqrt2)
    value_rows.push(vec![
        "1".into(),
        fmt(3.0),
        "U0_closed_form".into(),
        fmt(oracle::elliptic_k_inv_sqrt2()),
    ]);
    csvio::write_csv(
        dir.join("oracle_values.csv"),
        Some(&hash),
        &["n", "p", "quantity", "value"],
        &value_rows,
    )?;
    // brute-force lattice for the (1,3) circle configuration
    let prm = ProblemParams::new(1, 3.0, 1)?;
    let profile = solve_ground_state(prm, 1e-10, 512)?;
    let modes = linearized_spectrum(&profile, 1, 4)?;
    let fiber = FiberSpectrum::from_modes(&modes);
    let base = manifold::model_spectrum(&Family::Circle { radius: 1.0 }, 4000)?;
    let mu: Vec<(f64, usize)> = fiber.entries.iter().map(|e| (e.value, e.multiplicity)).collect();
    let lam: Vec<(f64, usize)> = base.eigenvalues.clone();
    let vals = oracle::lattice_brute_force(&mu, &lam, 0.3, 50.0);
    let rows: Vec<Vec<String>> = vals.iter().map(|v| vec![fmt(*v)]).collect();
    csvio::write_csv(dir.join("oracle_lattice_eps_0_3.csv"), Some(&hash), &["value"], &rows)?;
    println!("fixtures: wrote oracle values for (1,3), (2,3), (3,2) to {}", dir.display());
    Ok(())
}
