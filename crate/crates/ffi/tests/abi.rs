use std::ffi::{CStr, CString};
use std::path::Path;
use std::process::Command;
use std::ptr;

use lflx_ffi::*;

fn last_error() -> String {
    let p = lflx_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn field_lifecycle_and_energy() {
    unsafe {
        let mut f: *mut LflxField = ptr::null_mut();
        assert_eq!(lflx_field_taylor_green(2, 16, &mut f), LflxStatus::Ok);
        let mut e = 0.0;
        assert_eq!(lflx_field_energy(f, &mut e), LflxStatus::Ok);
        // ½ ∫ (sin²x cos²y + cos²x sin²y) = π²
        assert!((e - std::f64::consts::PI.powi(2)).abs() < 1e-12);

        let (mut d, mut n, mut c) = (0u32, 0u32, 0u32);
        assert_eq!(lflx_field_shape(f, &mut d, &mut n, &mut c), LflxStatus::Ok);
        assert_eq!((d, n, c), (2, 16, 2));

        let mut len = 0usize;
        assert_eq!(lflx_field_sample_len(f, &mut len), LflxStatus::Ok);
        let mut buf = vec![0.0; len];
        assert_eq!(lflx_field_samples(f, buf.as_mut_ptr(), len), LflxStatus::Ok);
        let mut g: *mut LflxField = ptr::null_mut();
        assert_eq!(
            lflx_field_from_samples(2, 16, 2, buf.as_ptr(), len, &mut g),
            LflxStatus::Ok
        );
        let mut e2 = 0.0;
        lflx_field_energy(g, &mut e2);
        assert!((e - e2).abs() < 1e-12);
        assert_eq!(lflx_field_samples(f, buf.as_mut_ptr(), len - 1), LflxStatus::ShapeMismatch);

        lflx_field_free(f);
        lflx_field_free(g);
        lflx_field_free(ptr::null_mut());
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        let mut f: *mut LflxField = ptr::null_mut();
        assert_eq!(lflx_field_taylor_green(4, 16, &mut f), LflxStatus::InvalidGrid);
        assert!(f.is_null());
        assert!(last_error().contains("grid"));
        assert_eq!(lflx_field_energy(ptr::null(), &mut 0.0), LflxStatus::NullPointer);
        assert!(last_error().contains("null"));
        let mut s = 0.0;
        assert_eq!(lflx_sigma_of_alpha(1.5, &mut s), LflxStatus::Domain);
    }
}

#[test]
fn filter_and_flux() {
    unsafe {
        let mut u: *mut LflxField = ptr::null_mut();
        let mut m: *mut LflxMollifier = ptr::null_mut();
        assert_eq!(lflx_field_taylor_green(2, 16, &mut u), LflxStatus::Ok);
        assert_eq!(lflx_mollifier_new(LflxProfile::Bump, &mut m), LflxStatus::Ok);

        let mut g = 0.0;
        assert_eq!(lflx_mollifier_transform(m, 2, 1.0, &mut g), LflxStatus::Ok);
        assert!((g - 0.936248109724288).abs() < 1e-12);

        let mut ub: *mut LflxField = ptr::null_mut();
        assert_eq!(lflx_filter(u, 0.5, m, &mut ub), LflxStatus::Ok);
        let (mut e, mut eb) = (0.0, 0.0);
        lflx_field_energy(u, &mut e);
        lflx_field_energy(ub, &mut eb);
        let mut gh = 0.0;
        lflx_mollifier_transform(m, 2, 0.5 * 2f64.sqrt(), &mut gh);
        assert!((eb - gh * gh * e).abs() < 1e-12);

        let mut len = 0;
        assert_eq!(lflx_flux_len(u, &mut len), LflxStatus::Ok);
        assert_eq!(len, 32 * 32);
        let mut pi = vec![0.0; len];
        let mut total = f64::NAN;
        assert_eq!(lflx_flux(u, 0.5, m, pi.as_mut_ptr(), len, &mut total), LflxStatus::Ok);
        assert!(total.abs() < 1e-12);
        assert_eq!(lflx_flux(u, 0.5, m, ptr::null_mut(), 0, &mut total), LflxStatus::Ok);

        lflx_field_free(ub);
        lflx_field_free(u);
        lflx_mollifier_free(m);
    }
}

#[test]
fn solver_run_and_budget() {
    unsafe {
        let mut u: *mut LflxField = ptr::null_mut();
        lflx_field_taylor_green(2, 32, &mut u);
        let mut run: *mut LflxRun = ptr::null_mut();
        assert_eq!(lflx_run(u, 0.1, 1e-2, 0.5, 10, 0.0, 0, &mut run), LflxStatus::Ok);
        let mut count = 0;
        lflx_run_snapshot_count(run, &mut count);
        assert_eq!(count, 6);
        let mut b = LflxBudget::default();
        assert_eq!(lflx_run_budget(run, &mut b), LflxStatus::Ok);
        assert!((b.final_energy - b.initial_energy * (-0.1f64 * 4.0 * 0.5).exp()).abs() < 1e-10);
        assert!(b.residual.abs() < 1e-8);

        let mut last: *mut LflxField = ptr::null_mut();
        let mut t = 0.0;
        assert_eq!(lflx_run_snapshot(run, count - 1, &mut t, &mut last), LflxStatus::Ok);
        assert!((t - 0.5).abs() < 1e-12);
        assert_eq!(
            lflx_run_snapshot(run, count, &mut t, &mut last),
            LflxStatus::InvalidArgument
        );
        lflx_field_free(last);

        assert_eq!(lflx_run(u, 0.1, 1.0, 1.0, 1, 0.0, 0, &mut run), LflxStatus::Numerical);
        lflx_run_free(run);
        lflx_field_free(u);
    }
}

#[test]
fn structure_function_of_shear() {
    unsafe {
        let mut u: *mut LflxField = ptr::null_mut();
        lflx_field_shear(2, 64, &mut u);
        let dx = 2.0 * std::f64::consts::PI / 64.0;
        let seps = [dx, 2.0 * dx, 4.0 * dx];
        let mut out = [0.0; 3];
        assert_eq!(
            lflx_structure_function(u, 2.0, seps.as_ptr(), 3, out.as_mut_ptr()),
            LflxStatus::Ok
        );
        assert!(out.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(
            lflx_structure_function(u, 2.0, [0.5 * dx].as_ptr(), 1, out.as_mut_ptr()),
            LflxStatus::Domain
        );
        lflx_field_free(u);
    }
}

#[test]
fn snapshot_save_and_load() {
    let dir = tempfile::tempdir().unwrap();
    let path = CString::new(dir.path().join("s.lflx").to_str().unwrap()).unwrap();
    unsafe {
        let mut u: *mut LflxField = ptr::null_mut();
        lflx_field_random_besov(2, 16, 0.5, 3, &mut u);
        assert_eq!(lflx_snapshot_save(path.as_ptr(), u, 0.01, 0.25), LflxStatus::Ok);
        let mut v: *mut LflxField = ptr::null_mut();
        let (mut nu, mut t, mut warn) = (0.0, 0.0, true);
        assert_eq!(
            lflx_snapshot_load(path.as_ptr(), &mut v, &mut nu, &mut t, &mut warn),
            LflxStatus::Ok
        );
        assert_eq!((nu, t, warn), (0.01, 0.25, false));
        let (mut a, mut b) = (0.0, 0.0);
        lflx_field_energy(u, &mut a);
        lflx_field_energy(v, &mut b);
        assert!((a - b).abs() < 1e-12 * a);

        let missing = CString::new("/nonexistent/dir/x.lflx").unwrap();
        assert_eq!(
            lflx_snapshot_load(missing.as_ptr(), &mut v, ptr::null_mut(), ptr::null_mut(), ptr::null_mut()),
            LflxStatus::Io
        );
        lflx_field_free(u);
        lflx_field_free(v);
    }
}

#[test]
fn generated_header_parses_as_c() {
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = std::fs::read_to_string(include.join("lflx.h")).unwrap();
    for name in ["lflx_run", "lflx_flux", "lflx_last_error", "LFLX_STATUS_OK"] {
        assert!(header.contains(name), "{name} missing from header");
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("probe.c");
    std::fs::write(&src, "#include \"lflx.h\"\nint main(void) { return LFLX_STATUS_OK; }\n").unwrap();
    match Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .status()
    {
        Ok(status) => assert!(status.success()),
        Err(_) => eprintln!("no C compiler found; skipping header compile"),
    }
}
