use aggdiff::convexity::*;
use aggdiff::kernel::Kernel;

fn comparison_range(n: usize) -> Vec<f64> {
    (1..=5).map(|j| -(n as f64) + 2.0 * j as f64 / 6.0).collect()
}

#[test]
fn tangent_family_lies_below_profile() {
    let below = tangent_table(3, -2.5, &[0.2, 0.4, 0.6, 0.8], 200).unwrap();
    assert!(below.violations(1e-9).is_empty());
    let above = tangent_table(3, -0.5, &[0.2, 0.4, 0.6, 0.8], 200).unwrap();
    assert!(above.violations(1e-9).iter().any(|v| v.residual < -1e-4));
    let csv = below.to_csv();
    assert!(csv.starts_with("t,theta_over_k,tangent_c0.2,tangent_c0.4,tangent_c0.6,tangent_c0.8\n"));
    assert_eq!(csv.lines().count(), 201);
}

#[test]
fn scan_holds_in_comparison_range() {
    for n in 2..=5 {
        for k in comparison_range(n) {
            let rep = scan(n, k, 120, 1e-9).unwrap();
            assert!(rep.violations.is_empty(), "N={n} k={k}: {:?}", rep.violations.first());
            assert!(rep.tangency_error < 1e-8, "N={n} k={k}: {}", rep.tangency_error);
        }
    }
}

#[test]
fn scan_fails_above_newtonian_exponent() {
    let rep = scan(3, -0.5, 100, 1e-9).unwrap();
    assert!(rep.min_residual < -1e-4);
    assert!(!rep.violations.is_empty());
    let rep = scan(2, -1.0, 100, 1e-9).unwrap();
    assert!(rep.violations.is_empty());
}

#[test]
fn scan_excludes_band_near_one() {
    let rep = scan(3, -2.0, 40, 1e-9).unwrap();
    assert!(rep.excluded_points > 0 || rep.grid.iter().all(|&t| t <= rep.excluded_above));
    let excluded_t = rep.grid.iter().filter(|&&t| t > rep.excluded_above).count();
    assert_eq!(rep.excluded_points, excluded_t * rep.resolution);
    assert!(scan(3, -2.0, 8, 1e-9).is_err());
}

#[test]
fn implication_chain() {
    for n in 3..=5 {
        for k in comparison_range(n) {
            let rc = RelativeConvexity::new(n, k).unwrap();
            let mut weak_ok = true;
            for i in 1..200 {
                let z = i as f64 / 200.0;
                assert!(rc.g_prime(z).unwrap() < 0.0);
                let weak = rc.residual(z).unwrap();
                let exact = rc.exact_criterion(z).unwrap();
                weak_ok &= weak >= -1e-9;
                // the reduction only strengthens the requirement
                if weak >= 0.0 {
                    assert!(exact >= -1e-9 * (1.0 + rc.g_prime(z).unwrap().abs()), "N={n} k={k} z={z}");
                }
            }
            assert!(weak_ok, "N={n} k={k}");
            assert!(series_coefficient_check(n, k, 10_000));
            assert!(scan(n, k, 60, 1e-9).unwrap().violations.is_empty());
        }
    }
}

#[test]
fn second_derivative_matches_difference_quotient() {
    let rc = RelativeConvexity::new(4, -2.5).unwrap();
    for &z in &[0.1, 0.4, 0.7] {
        let h = 1e-4;
        let fd = (rc.g_prime(z + h).unwrap() - rc.g_prime(z - h).unwrap()) / (2.0 * h);
        let g2 = rc.g_second(z).unwrap();
        assert!((fd - g2).abs() < 1e-6 * g2.abs());
        let fd1 = (rc.g(z + h).unwrap() - rc.g(z - h).unwrap()) / (2.0 * h);
        assert!((fd1 - rc.g_prime(z).unwrap()).abs() < 1e-6 * fd1.abs());
    }
    // g(s²) = ϑ(s)/k
    let ker = Kernel::new(4, -2.5).unwrap();
    let s: f64 = 0.6;
    assert!((rc.g(s * s).unwrap() - ker.theta(s).unwrap() / -2.5).abs() < 1e-12 * ker.theta(s).unwrap());
}

#[test]
fn sharp_inequality_on_dense_grid() {
    for n in 2..=7 {
        for i in 1..2000 {
            let t = i as f64 / 2000.0;
            assert!(sharp_n_inequality(n, t) >= -1e-12, "N={n} t={t}");
            assert!(sharp_n_polynomial(n, t) >= -1e-12);
        }
        assert!((sharp_n_polynomial(n, 0.0) - (n as f64 - 2.0) / 2.0).abs() < 1e-15);
    }
}

#[test]
fn two_dimensional_decoupling() {
    for &k in &[-1.8, -1.0, -0.3] {
        for iu in 1..20 {
            let u = iu as f64 / 20.0;
            for it in 1..20 {
                for ic in 1..20 {
                    let (t, c) = (it as f64 / 20.0, ic as f64 / 20.0);
                    let r = n2_decoupling_residual(k, u, t, c);
                    assert!(r >= -1e-12, "k={k} u={u} t={t} c={c}: {r}");
                    if it == ic {
                        assert!(r.abs() < 1e-12);
                    }
                }
            }
        }
    }
}
