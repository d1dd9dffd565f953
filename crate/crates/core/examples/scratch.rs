use std::time::Instant;
use tube_elliptic::fermi::*;
use tube_elliptic::grid::*;
use tube_elliptic::manifold::{model_spectrum, EmbeddedCurve, Family};
use tube_elliptic::radial::*;
use tube_elliptic::resonance;
use tube_elliptic::tube::*;

fn main() {
    let prm = ProblemParams::new(1, 3.0, 1).unwrap();
    let fib_for = |half: usize| {
        let profile = solve_ground_state(prm, 1e-10, half).unwrap();
        let modes = linearized_spectrum(&profile, 1, 4).unwrap();
        let merged = FiberSpectrum::from_modes(&modes);
        (profile, merged)
    };
    let base = model_spectrum(&Family::Circle { radius: 1.0 }, 400000).unwrap();

    // Lemma 5.2 ratio across eps at two resolutions
    for (nt, half) in [(48usize, 64usize), (72, 96)] {
        let (profile, merged) = fib_for(half);
        let mu0 = merged.mu0();
        let phi0 = {
            let modes = linearized_spectrum(&profile, 0, 2).unwrap();
            modes[0].eigenfunctions[0].clone()
        };
        let curve = EmbeddedCurve::circle(1.0, 2, nt);
        for eps0 in [0.05, 0.12, 0.3] {
            let eps = resonance::nudge_admissible(&merged, &base, 4, eps0, 300).unwrap();
            let t0 = Instant::now();
            let grid = TubeGrid::line(nt, curve.period, half, eps);
            let exp = FermiExpansion::from_curve(&curve, &grid).unwrap();
            let dop = laplacian_split(&exp).unwrap();
            let it = iterate_approximation(&grid, &exp, &dop, &profile, 2).unwrap();
            let u2 = it.approximate_solution(2);
            let op = DiscreteOperator::assemble(&grid, &exp, &u2, 3.0).unwrap();
            let guess = mu0 / (eps * eps);
            let c = op.count_below(guess).unwrap();
            let k = if c == 0 { 0 } else { c - 1 };
            let spread = 0.3 * guess.abs().max(1.0);
            let nu = op.eigenvalue_in_window(k, (guess - spread, guess + spread), 1e-10).unwrap();
            let (nu2, w) = op.eigenpair_near(nu).unwrap();
            let dec = eigenfunction_decomposition(&grid, &exp, &profile, &phi0, &op, &w, nu2, -mu0 / 2.0)
                .unwrap();
            println!(
                "nt={nt} half={half} eps={eps:.4}: nu={nu2:.4} (model {:.4}) rho={:.5} [{:?}]",
                guess, dec.rho, t0.elapsed()
            );
        }
    }

    // shape estimate with i=4, N=3 picard across the acceptance sweep, nz=128
    let (profile, merged) = fib_for(128);
    let curve = EmbeddedCurve::circle(1.0, 2, 48);
    let mut epss = Vec::new();
    let mut devs = Vec::new();
    for i in 0..6 {
        let e0 = 0.05 * (0.3f64 / 0.05).powf(i as f64 / 5.0);
        let eps = resonance::nudge_admissible(&merged, &base, 3, e0, 300).unwrap();
        let grid = TubeGrid::line(48, curve.period, 128, eps);
        let exp = FermiExpansion::from_curve(&curve, &grid).unwrap();
        let dop = laplacian_split(&exp).unwrap();
        let it = iterate_approximation(&grid, &exp, &dop, &profile, 4).unwrap();
        let u4 = it.approximate_solution(4);
        let params = PicardParams { i_used: 4, n_gap: 3, n0: 0, m_exponent: None, budget: 60 };
        let t0 = Instant::now();
        let res = picard_solve(&grid, &exp, &dop, &profile, &u4, params).unwrap();
        epss.push(eps);
        devs.push(res.shape_deviation);
        println!("eps={eps:.4} dev={:.4e} m={} [{:?}]", res.shape_deviation, res.m_exponent, t0.elapsed());
    }
    let slope = tube_elliptic::linalg::fit::log_log_slope(&epss, &devs);
    println!("shape slope (i=4) = {slope:.3}");
}
