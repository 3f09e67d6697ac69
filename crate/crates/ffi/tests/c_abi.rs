use std::ffi::CStr;
use std::ptr;

use lcdiff_ffi::*;

fn last_error() -> String {
    let mut buf = [0 as std::ffi::c_char; 256];
    unsafe {
        lcdiff_last_error(buf.as_mut_ptr(), buf.len());
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

#[test]
fn bessel_functions() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(lcdiff_bessel_k0(1.0, &mut v), LCDIFF_OK);
        assert!((v - 0.421_024_438_240_708_333_3).abs() < 1e-15);
        assert_eq!(lcdiff_log_bessel_k0(700.0, &mut v), LCDIFF_OK);
        assert!((v + 703.049_927_258_943_912).abs() < 1e-12);
        assert_eq!(lcdiff_k_ratio(1.0, &mut v), LCDIFF_OK);
        assert!((v + 1.429_625_398_260_401_758).abs() < 1e-14);

        assert_eq!(lcdiff_bessel_k0(-1.0, &mut v), LCDIFF_ERR_DOMAIN);
        assert!(last_error().contains("domain"), "{}", last_error());
        assert_eq!(lcdiff_bessel_k0(1.0, ptr::null_mut()), LCDIFF_ERR_NULL);
    }
}

#[test]
fn grid_lifecycle_and_shape_triple() {
    unsafe {
        let mut product = ptr::null_mut();
        assert_eq!(lcdiff_grid_discretize(LCDIFF_LAW_NORMAL_PRODUCT, 12.0, 1024, &mut product), LCDIFF_OK);
        assert_eq!(lcdiff_grid_len(product), 1024);
        assert_eq!(lcdiff_grid_half_width(product), 12.0);

        let mut verdict = LcdiffVerdict::default();
        assert_eq!(lcdiff_check_log_concavity(product, 1e-9, &mut verdict), LCDIFF_OK);
        assert_eq!((verdict.holds, verdict.has_witness), (0, 1));
        assert!(verdict.x < 0.0 && verdict.y > 0.0);

        let mut fft = ptr::null_mut();
        assert_eq!(lcdiff_grid_self_difference(product, &mut fft), LCDIFF_OK);
        assert_eq!(lcdiff_grid_len(fft), 2048);
        let mut values = vec![0.0; 2048];
        assert_eq!(lcdiff_grid_values(fft, values.as_mut_ptr(), values.len()), LCDIFF_OK);
        let peak = values.iter().copied().fold(0.0, f64::max);
        assert!((peak - 0.5).abs() < 1e-2);
        assert_eq!(lcdiff_grid_values(fft, values.as_mut_ptr(), 10), LCDIFF_ERR_BUFFER);

        let mut quad = ptr::null_mut();
        assert_eq!(
            lcdiff_self_difference_quadrature(LCDIFF_LAW_NORMAL_PRODUCT, 12.0, 1024, 1e-11, &mut quad),
            LCDIFF_OK
        );
        assert_eq!(lcdiff_check_log_concavity(quad, 1e-9, &mut verdict), LCDIFF_OK);
        assert_eq!((verdict.holds, verdict.has_witness), (1, 0));

        lcdiff_grid_free(product);
        lcdiff_grid_free(fft);
        lcdiff_grid_free(quad);
        lcdiff_grid_free(ptr::null_mut());
    }
}

#[test]
fn grid_errors() {
    unsafe {
        let mut g = ptr::null_mut();
        assert_eq!(lcdiff_grid_discretize(7, 12.0, 1024, &mut g), LCDIFF_ERR_DOMAIN);
        assert_eq!(lcdiff_grid_discretize(LCDIFF_LAW_LAPLACE, 12.0, 63, &mut g), LCDIFF_ERR_INVALID_GRID);
        assert!(g.is_null());
        let values = [1.0, 2.0, 3.0];
        assert_eq!(lcdiff_grid_from_values(1.0, values.as_ptr(), 3, &mut g), LCDIFF_ERR_INVALID_GRID);

        let values = [0.25, 0.25, 0.25, 0.25];
        assert_eq!(lcdiff_grid_from_values(2.0, values.as_ptr(), 4, &mut g), LCDIFF_OK);
        let mut d = ptr::null_mut();
        assert_eq!(lcdiff_grid_self_difference(g, &mut d), LCDIFF_OK);
        lcdiff_grid_free(d);
        lcdiff_grid_free(g);

        let values = [1.0, 1.0, 1.0, 1.0];
        assert_eq!(lcdiff_grid_from_values(2.0, values.as_ptr(), 4, &mut g), LCDIFF_OK);
        assert_eq!(lcdiff_grid_self_difference(g, &mut d), LCDIFF_ERR_NOT_NORMALIZED);
        lcdiff_grid_free(g);

        assert_eq!(lcdiff_grid_self_difference(ptr::null(), &mut d), LCDIFF_ERR_NULL);
        assert_eq!(lcdiff_grid_len(ptr::null()), 0);
    }
}

#[test]
fn mgf_routes() {
    let mut v = 0.0;
    unsafe {
        for method in [LCDIFF_MGF_DENSITY_QUADRATURE, LCDIFF_MGF_GAUSSIAN_CONDITIONING] {
            assert_eq!(lcdiff_mgf(LCDIFF_LAW_NORMAL_PRODUCT, method, 0.5, 1e-12, &mut v), LCDIFF_OK);
            assert!((v - 1.0 / 0.75f64.sqrt()).abs() < 1e-10);
        }
        assert_eq!(lcdiff_mgf(LCDIFF_LAW_LAPLACE, LCDIFF_MGF_GAUSSIAN_CONDITIONING, 0.5, 1e-12, &mut v), LCDIFF_ERR_DOMAIN);
        assert_eq!(lcdiff_mgf(LCDIFF_LAW_NORMAL_PRODUCT, LCDIFF_MGF_DENSITY_QUADRATURE, 1.0, 1e-12, &mut v), LCDIFF_ERR_DIVERGENCE);
        assert!(last_error().contains("diverges"));
    }
}

#[test]
fn sampling_and_ks() {
    let n = 50_000;
    let mut whole = vec![0.0; n];
    let mut parts = vec![0.0; n];
    unsafe {
        let g = LCDIFF_GENERATOR_PRODUCT_SELF_DIFFERENCE;
        assert_eq!(lcdiff_sample(g, 42, 0, n, whole.as_mut_ptr()), LCDIFF_OK);
        assert_eq!(lcdiff_sample(g, 42, 0, 1000, parts.as_mut_ptr()), LCDIFF_OK);
        assert_eq!(lcdiff_sample(g, 42, 1000, n - 1000, parts.as_mut_ptr().add(1000)), LCDIFF_OK);
        assert_eq!(whole, parts);

        let mut r = LcdiffKsReport::default();
        assert_eq!(lcdiff_ks_laplace(whole.as_ptr(), n, 0.001, &mut r), LCDIFF_OK);
        assert_eq!(r.n, n as u64);
        assert_eq!(r.pass, 1);
        assert!((r.threshold - 1.949).abs() < 1e-12);

        assert_eq!(lcdiff_sample(LCDIFF_GENERATOR_NORMAL_PRODUCT, 42, 0, n, whole.as_mut_ptr()), LCDIFF_OK);
        assert_eq!(lcdiff_ks_laplace(whole.as_ptr(), n, 0.001, &mut r), LCDIFF_OK);
        assert_eq!(r.pass, 0);

        assert_eq!(lcdiff_ks_laplace(whole.as_ptr(), 0, 0.001, &mut r), LCDIFF_ERR_OTHER);
        assert_eq!(lcdiff_sample(9, 42, 0, 1, whole.as_mut_ptr()), LCDIFF_ERR_DOMAIN);
    }
}

#[test]
fn errors_are_per_thread() {
    let mut v = 0.0;
    unsafe {
        assert_eq!(lcdiff_bessel_k0(0.0, &mut v), LCDIFF_ERR_DOMAIN);
    }
    let other = std::thread::spawn(last_error).join().unwrap();
    assert_eq!(other, "");
    assert!(!last_error().is_empty());
}

#[test]
fn header_is_generated() {
    let header = include_str!("../include/lcdiff.h");
    for symbol in [
        "lcdiff_grid_discretize",
        "lcdiff_grid_free",
        "lcdiff_check_log_concavity",
        "typedef struct lcdiff_grid lcdiff_grid;",
        "#define LCDIFF_ERR_PANIC 9",
    ] {
        assert!(header.contains(symbol), "{symbol}");
    }
}
