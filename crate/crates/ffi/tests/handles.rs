use aggdiff_ffi::*;
use std::ffi::CStr;
use std::ptr;

fn last_error() -> String {
    unsafe { CStr::from_ptr(aggdiff_last_error()) }.to_string_lossy().into_owned()
}

#[test]
fn scalar_entry_points() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(aggdiff_hyp2f1(0.5, 0.5, 1.5, 0.25, &mut v), AggdiffStatus::Ok);
        // arcsin(x)/x at x = 1/2
        assert!((v - (0.5f64).asin() / 0.5).abs() < 1e-14);
        assert_eq!(aggdiff_theta(3, -1.0, 0.4, &mut v), AggdiffStatus::Ok);
        assert!((v - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        assert_eq!(aggdiff_theta(3, -3.5, 0.4, &mut v), AggdiffStatus::InvalidArgument);
        assert!(!last_error().is_empty());
        assert_eq!(aggdiff_hyp2f1(1.0, 1.0, 1.0, 0.5, ptr::null_mut()), AggdiffStatus::NullPointer);
        assert!(last_error().contains("out_value"));
        assert_eq!(aggdiff_comparison_residual(3, -2.5, 0.3, 0.3, &mut v), AggdiffStatus::Ok);
        assert!(v.abs() < 1e-10);
        let (mut count, mut min) = (usize::MAX, 0.0);
        assert_eq!(aggdiff_convexity_scan(3, -0.5, 40, 1e-9, &mut count, &mut min), AggdiffStatus::Ok);
        assert!(count > 0 && min < -1e-4);
        assert_eq!(aggdiff_convexity_scan(3, -2.5, 40, 1e-9, &mut count, ptr::null_mut()), AggdiffStatus::Ok);
        assert_eq!(count, 0);
    }
}

#[test]
fn density_round_trip_and_energy() {
    let grid = [0.0, 0.5, 1.0];
    let vals = [2.0, 1.0];
    unsafe {
        let mut d = ptr::null_mut();
        assert_eq!(aggdiff_density_new(grid.as_ptr(), vals.as_ptr(), 2, &mut d), AggdiffStatus::Ok);
        let mut cells = 0;
        assert_eq!(aggdiff_density_cells(d, &mut cells), AggdiffStatus::Ok);
        assert_eq!(cells, 2);
        let mut g = [0.0; 3];
        let mut v = [0.0; 2];
        assert_eq!(aggdiff_density_copy(d, g.as_mut_ptr(), 3, v.as_mut_ptr(), 2), AggdiffStatus::Ok);
        assert_eq!((g, v), (grid, vals));
        assert_eq!(aggdiff_density_copy(d, g.as_mut_ptr(), 2, ptr::null_mut(), 0), AggdiffStatus::BufferTooSmall);
        let mut mass = 0.0;
        assert_eq!(aggdiff_density_mass(d, 3, &mut mass), AggdiffStatus::Ok);
        let exact = 4.0 * std::f64::consts::PI / 3.0 * (2.0 * 0.125 + (1.0 - 0.125));
        assert!((mass - exact).abs() < 1e-13);

        let mut p = ptr::null_mut();
        assert_eq!(aggdiff_params_new(3, -1.5, 2.0, 1.0, mass, &mut p), AggdiffStatus::Ok);
        let mut mc = 0.0;
        assert_eq!(aggdiff_params_m_c(p, &mut mc), AggdiffStatus::Ok);
        assert_eq!(mc, 1.5);
        let mut e = AggdiffEnergy::default();
        assert_eq!(aggdiff_energy(p, d, &mut e), AggdiffStatus::Ok);
        assert_eq!(e.total, e.entropy + e.interaction + e.confinement);
        aggdiff_params_free(p);
        aggdiff_density_free(d);

        let bad = [0.0, 1.0];
        let neg = [-1.0];
        assert_eq!(aggdiff_density_new(bad.as_ptr(), neg.as_ptr(), 1, &mut d), AggdiffStatus::InvalidArgument);
        assert_eq!(aggdiff_density_new(ptr::null(), neg.as_ptr(), 1, &mut d), AggdiffStatus::NullPointer);
        aggdiff_density_free(ptr::null_mut());
    }
}

#[test]
fn steady_handle() {
    unsafe {
        let mut p = ptr::null_mut();
        assert_eq!(aggdiff_params_new(3, -1.0, 2.0, 0.0, 1.0, &mut p), AggdiffStatus::Ok);
        let mut s = ptr::null_mut();
        assert_eq!(aggdiff_steady_solve(p, 8, 0.0, &mut s), AggdiffStatus::InvalidArgument);
        assert_eq!(aggdiff_steady_solve(p, 96, 0.0, &mut s), AggdiffStatus::Ok);
        let mut r = 0.0;
        assert_eq!(aggdiff_steady_summary(s, ptr::null_mut(), &mut r), AggdiffStatus::Ok);
        let exact = std::f64::consts::PI / (2.0 * std::f64::consts::PI).sqrt();
        assert!((r - exact).abs() < 0.03);
        let mut d = ptr::null_mut();
        assert_eq!(aggdiff_steady_density(s, &mut d), AggdiffStatus::Ok);
        let mut mass = 0.0;
        assert_eq!(aggdiff_density_mass(d, 3, &mut mass), AggdiffStatus::Ok);
        assert!((mass - 1.0).abs() < 1e-10);
        aggdiff_density_free(d);
        aggdiff_steady_free(s);

        let mut sub = ptr::null_mut();
        assert_eq!(aggdiff_params_new(3, -1.5, 1.2, 0.0, 1.0, &mut sub), AggdiffStatus::Ok);
        assert_eq!(aggdiff_steady_solve(sub, 64, 0.0, &mut s), AggdiffStatus::Regime);
        aggdiff_params_free(sub);
        aggdiff_params_free(p);
    }
}
