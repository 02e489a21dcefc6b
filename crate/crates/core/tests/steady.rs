use aggdiff::density::RadialDensity;
use aggdiff::energy;
use aggdiff::kernel::ModelParams;
use aggdiff::steady::*;
use aggdiff::Error;

fn params(n: usize, k: f64, m: f64, chi: f64, mass: f64) -> ModelParams {
    ModelParams::new(n, k, m, chi, mass).unwrap()
}

fn solved(p: &ModelParams, cells: usize) -> SteadyState {
    solve_auto(p, cells, &SolverOptions::default()).unwrap()
}

#[test]
fn two_initial_guesses_agree() {
    let p = params(3, -1.0, 2.0, 0.0, 1.0);
    let grid = RadialDensity::uniform_grid(1.6, 160);
    let ball = RadialDensity::uniform_ball(3, 1.0, 1.0, 40).unwrap().project(&grid, 3).unwrap();
    let tri = RadialDensity::from_fn(grid.clone(), |r| (1.5 - r).max(0.0))
        .unwrap()
        .normalized(3, 1.0)
        .unwrap();
    let opts = SolverOptions {
        dilation_refit: false,
        ..SolverOptions::default()
    };
    let a = solve_with(&p, &ball, &opts).unwrap();
    let b = solve_with(&p, &tri, &opts).unwrap();
    let d = a.density.l1_distance(&b.density, 3);
    assert!(d <= 10.0 * opts.tol, "{d}");
    assert!(a.density.is_nonincreasing());
    assert!(*a.density.values().last().unwrap() == 0.0);
}

#[test]
fn newtonian_profile_matches_closed_form() {
    // m = 2, k = -1, N = 3: ρ̄ = A sin(κ r)/(κ r) with κ = √(2π), support π/κ
    let p = params(3, -1.0, 2.0, 0.0, 1.0);
    let ss = solved(&p, 400);
    let kappa = (2.0 * std::f64::consts::PI).sqrt();
    let radius = std::f64::consts::PI / kappa;
    assert!((ss.support_radius - radius).abs() < 2.0 * ss.density.outer_radius() / 400.0);
    let exact = RadialDensity::from_fn(ss.density.grid().to_vec(), |r| {
        if r < radius {
            (kappa * r).sin() / (kappa * r)
        } else {
            0.0
        }
    })
    .unwrap()
    .normalized(3, 1.0)
    .unwrap();
    assert!(ss.density.l1_distance(&exact, 3) < 2e-3);
}

#[test]
fn residuals_small_on_solver_output() {
    for p in [params(3, -1.0, 2.0, 0.0, 1.0), params(3, -1.5, 1.5, 1.0, 0.5), params(3, -1.0, 1.75, 0.0, 1.0)] {
        let ss = solved(&p, 300);
        let ch = characterization_residual(&ss, &p).unwrap();
        assert!(ch < 5e-5, "{p:?}: {ch}");
        assert!(el_level_variance(&ss, &p, 1e-3).unwrap() < 1e-12);
        let g1 = g_weighted_identity_residual(&ss, |_| 1.0, &p).unwrap();
        assert!(g1 < 5e-5, "{p:?}: g = 1 residual {g1}");
        let g2 = g_weighted_identity_residual(&ss, |a| 1.0 / (1.0 + a), &p).unwrap();
        assert!(g2 < 5e-5, "{p:?}: weighted residual {g2}");
        let vir = energy::virial_identity_residual(&ss.density, &p).unwrap();
        assert!(vir < 5e-5, "{p:?}: virial {vir}");
        let f = energy::evaluate(&ss.density, &p).unwrap().total;
        let id = energy::stationary_energy_identity(&ss.density, &p);
        assert!((f - id).abs() < 5e-5 * f.abs());
    }
}

#[test]
fn uniform_ball_is_not_stationary() {
    let p = params(3, -1.5, 2.0, 0.0, 1.0);
    let ball = RadialDensity::uniform_ball(3, 1.0, 1.0, 40).unwrap();
    assert!(density_characterization_residual(&ball, &p).unwrap() > 1e-2);
    let p = params(3, -1.0, 2.0, 0.0, 1.0);
    assert!(density_characterization_residual(&ball, &p).unwrap() > 1e-2);
}

#[test]
fn newtonian_branch_is_continuous() {
    let p = params(3, -1.0, 2.0, 0.0, 1.0);
    let ss = solved(&p, 120);
    let near = p.with_k(-1.0 + 1e-6);
    assert!(!near.is_newtonian());
    let a = characterization_residual(&ss, &p).unwrap();
    let b = characterization_residual(&ss, &near).unwrap();
    assert!((a - b).abs() <= 1e-4, "{a} vs {b}");
}

#[test]
fn dilations_stay_stationary_at_fair_competition_without_confinement() {
    // the discrete critical state is not available; the residual test runs on
    // dilations of a converged confined state instead, checking the scaling law
    let p = params(3, -1.5, 1.5, 1.0, 0.5);
    let ss = solved(&p, 200);
    let free = ModelParams { chi: 0.0, ..p };
    let base = density_characterization_residual(&ss.density, &free).unwrap();
    for &l in &[0.5, 2.0] {
        let d = ss.density.dilate(l, 3).unwrap();
        let r = density_characterization_residual(&d, &free).unwrap();
        assert!((r - base).abs() < 1e-9, "λ = {l}: {r} vs {base}");
    }
}

#[test]
fn regime_and_input_errors() {
    let init = RadialDensity::uniform_ball(3, 1.0, 1.0, 16).unwrap();
    let sub = params(3, -1.5, 1.2, 0.0, 1.0);
    assert!(matches!(solve(&sub, &init, 1e-10, 100), Err(Error::Regime(_))));
    let p = params(3, -1.0, 2.0, 0.0, 1.0);
    let empty = RadialDensity::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.0]).unwrap();
    assert!(solve(&p, &empty, 1e-10, 100).is_err());
    assert!(matches!(solve(&p, &init, 1e-14, 2), Err(Error::NotConverged { .. })));
}

#[test]
fn supercritical_mass_collapses() {
    // fair competition with confinement: a large mass has no steady state
    let p = params(3, -1.5, 1.5, 1.0, 200.0);
    let r = solve_auto(&p, 100, &SolverOptions::default());
    assert!(matches!(r, Err(Error::Collapse { .. })), "{r:?}");
}
