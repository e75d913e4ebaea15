use rbf_cardinal_ffi::*;
use std::ffi::{c_char, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { rbfc_last_error(buf.as_mut_ptr(), buf.len()) };
    let bytes: Vec<u8> = buf[..n.min(255)].iter().map(|&c| c as u8).collect();
    String::from_utf8(bytes).unwrap()
}

#[test]
fn kernel_and_tau() {
    unsafe {
        let mut k = ptr::null_mut();
        assert_eq!(rbfc_kernel_poisson(1.0, &mut k), RbfcStatus::Ok);
        let mut t = RbfcTruncation { tau: 0, terms: 0, gamma: 0.0, d_lower: 0.0 };
        assert_eq!(rbfc_compute_tau(k, 1e-16, &mut t), RbfcStatus::Ok);
        assert_eq!(t.terms, 17);
        assert!(t.gamma > 0.0);
        let mut v = 0.0;
        assert_eq!(rbfc_kernel_fourier(k, 1.0, &mut v), RbfcStatus::Ok);
        assert!((v - std::f64::consts::PI * (-1.0f64).exp()).abs() < 1e-14);
        assert_eq!(rbfc_kernel_spatial(k, 0.0, &mut v), RbfcStatus::Ok);
        assert_eq!(v, 1.0);
        assert_eq!(rbfc_compute_tau(k, 2.0, &mut t), RbfcStatus::Domain);
        assert!(last_error().contains("epsilon"));
        rbfc_kernel_free(k);

        let mut g = ptr::null_mut();
        assert_eq!(rbfc_kernel_gaussian(1.0, &mut g), RbfcStatus::Ok);
        assert_eq!(rbfc_compute_tau(g, 1e-16, &mut t), RbfcStatus::Ok);
        assert_eq!(t.tau, 12);
        assert!(t.gamma.is_nan());
        rbfc_kernel_free(g);
    }
}

#[test]
fn invalid_arguments() {
    unsafe {
        let mut k = ptr::null_mut();
        assert_eq!(rbfc_kernel_multiquadric(-1.5, -1.0, &mut k), RbfcStatus::Domain);
        assert!(k.is_null());
        assert_eq!(rbfc_kernel_poisson(1.0, ptr::null_mut()), RbfcStatus::NullPointer);
        let mut v = 0.0;
        assert_eq!(rbfc_kernel_fourier(ptr::null(), 1.0, &mut v), RbfcStatus::NullPointer);
        assert!(last_error().contains("kernel"));
        rbfc_kernel_free(ptr::null_mut());
        rbfc_table_free(ptr::null_mut());
    }
}

#[test]
fn table_and_interpolants() {
    unsafe {
        let mut k = ptr::null_mut();
        rbfc_kernel_poisson(1.0, &mut k);
        let n = 8usize;
        let mut dilated = ptr::null_mut();
        rbfc_kernel_poisson(n as f64, &mut dilated);
        let mut table = ptr::null_mut();
        assert_eq!(rbfc_table_build(dilated, 1e-12, 2 * n, 16, &mut table), RbfcStatus::Ok);
        let mut r = 1.0;
        rbfc_table_delta_residual(table, &mut r);
        assert!(r <= 1e-6);
        let mut v = 0.0;
        assert_eq!(rbfc_table_eval(table, 100.0, &mut v), RbfcStatus::OutOfRange);

        let nodes: Vec<f64> = (-(n as i64)..=n as i64).map(|j| j as f64 / n as f64).collect();
        let values: Vec<f64> = nodes.iter().map(|x| (1.0 - x * x).powi(2)).collect();
        let mut u = ptr::null_mut();
        assert_eq!(rbfc_uniform_fit(k, table, nodes.as_ptr(), values.as_ptr(), nodes.len(), &mut u), RbfcStatus::Ok);
        // the interpolant holds its own reference to the table
        rbfc_table_free(table);
        for (x, y) in nodes.iter().zip(&values) {
            rbfc_uniform_eval(u, *x, &mut v);
            assert!((v - y).abs() < 1e-8);
        }
        rbfc_uniform_free(u);

        let mut wrong = ptr::null_mut();
        rbfc_table_build(k, 1e-12, 2 * n, 16, &mut wrong);
        assert_eq!(
            rbfc_uniform_fit(k, wrong, nodes.as_ptr(), values.as_ptr(), nodes.len(), &mut u),
            RbfcStatus::GridMismatch
        );
        rbfc_table_free(wrong);

        let x = [-0.7, 0.1, 0.9];
        let y = [1.0, 2.0, -1.0];
        let mut gram = ptr::null_mut();
        assert_eq!(rbfc_gram_fit(k, x.as_ptr(), y.as_ptr(), 3, &mut gram), RbfcStatus::Ok);
        rbfc_gram_eval(gram, 0.1, &mut v);
        assert!((v - 2.0).abs() < 1e-10);
        let mut cond = 0.0;
        rbfc_gram_condition(gram, &mut cond);
        assert!(cond >= 1.0 && cond.is_finite());
        rbfc_gram_free(gram);
        let unsorted = [0.5, 0.1];
        assert_eq!(rbfc_gram_fit(k, unsorted.as_ptr(), y.as_ptr(), 2, &mut gram), RbfcStatus::InvalidSamples);

        rbfc_kernel_free(dilated);
        rbfc_kernel_free(k);
    }
}

#[test]
fn table_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let file = CString::new(dir.path().join("t.txt").to_str().unwrap()).unwrap();
    unsafe {
        let mut k = ptr::null_mut();
        rbfc_kernel_poisson(2.0, &mut k);
        let mut table = ptr::null_mut();
        rbfc_table_build(k, 1e-12, 8, 8, &mut table);
        assert_eq!(rbfc_table_save(table, file.as_ptr()), RbfcStatus::Ok);
        let mut loaded = ptr::null_mut();
        assert_eq!(rbfc_table_load(file.as_ptr(), &mut loaded), RbfcStatus::Ok);
        let (mut a, mut b) = (0.0, 0.0);
        rbfc_table_eval(table, 0.3, &mut a);
        rbfc_table_eval(loaded, 0.3, &mut b);
        assert_eq!(a, b);
        let missing = CString::new(dir.path().join("none.txt").to_str().unwrap()).unwrap();
        assert_eq!(rbfc_table_load(missing.as_ptr(), &mut loaded), RbfcStatus::Io);
        rbfc_table_free(table);
        rbfc_kernel_free(k);
    }
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/rbf_cardinal.h")
}

#[test]
fn header_declares_the_api() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in ["rbfc_kernel_poisson", "rbfc_table_build", "rbfc_uniform_fit", "rbfc_gram_fit", "rbfc_last_error"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    assert!(text.contains("RBFC_STATUS_OK = 0"));
    assert!(text.contains("typedef struct RbfcKernel RbfcKernel;"));
}

#[test]
fn header_compiles_as_c() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        "#include \"rbf_cardinal.h\"\nint main(void) { RbfcKernel *k = 0; RbfcStatus s = rbfc_kernel_poisson(1.0, &k); rbfc_kernel_free(k); return s == RBFC_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    let include = header().parent().unwrap().to_path_buf();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .status()
        .expect("a C compiler is available");
    assert!(status.success());
}
