use std::ffi::{CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use gpd_sparsify_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(gpd_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn domain(coords: &[f64]) -> *mut GpdDomain {
    let mut out = ptr::null_mut();
    let s = unsafe { gpd_domain_from_vec6(coords.as_ptr(), coords.len() / 6, &mut out) };
    assert_eq!(s, GpdStatus::Ok, "{}", last_error());
    out
}

const SQUARE: [f64; 6] = [0.0, 0.0, 1.0, 0.0, 0.0, 1.0];
const SHIFTED: [f64; 6] = [0.5, 0.0, 1.0, 0.0, 0.0, 1.0];

#[test]
fn pair_and_domain_distances() {
    let mut e = f64::NAN;
    assert_eq!(
        unsafe { gpd_eps_21(SQUARE.as_ptr(), SHIFTED.as_ptr(), &mut e) },
        GpdStatus::Ok
    );
    assert_eq!(e, 0.5);

    let a = domain(&SQUARE);
    let b = domain(&[SQUARE, SHIFTED].concat());
    assert_eq!(unsafe { gpd_domain_len(b) }, 2);
    let mut d = f64::NAN;
    assert_eq!(unsafe { gpd_dhat(a, b, &mut d) }, GpdStatus::Ok);
    assert_eq!(d, 0.5);

    let mut m = [f64::NAN; 2];
    assert_eq!(
        unsafe { gpd_eps_matrix(a, b, m.as_mut_ptr(), 2) },
        GpdStatus::Ok
    );
    assert_eq!(m, [0.0, 0.5]);
    assert_eq!(
        unsafe { gpd_eps_matrix(a, b, m.as_mut_ptr(), 3) },
        GpdStatus::InvalidArgument
    );

    unsafe {
        gpd_domain_free(a);
        gpd_domain_free(b);
    }
}

#[test]
fn errors_are_reported() {
    let mut out = ptr::null_mut();
    let bad = [0.0, 0.0, -1.0, 0.0, 0.0, 1.0];
    assert_eq!(
        unsafe { gpd_domain_from_vec6(bad.as_ptr(), 1, &mut out) },
        GpdStatus::InvalidArgument
    );
    assert!(out.is_null());
    assert!(!last_error().is_empty());

    let json = CString::new("{\"name\": ").unwrap();
    assert_eq!(
        unsafe { gpd_domain_from_json(json.as_ptr(), &mut out) },
        GpdStatus::Format
    );

    let mut d = 0.0;
    assert_eq!(
        unsafe { gpd_dhat(ptr::null(), ptr::null(), &mut d) },
        GpdStatus::NullPointer
    );
    assert!(last_error().contains("null"));
    unsafe { gpd_domain_free(ptr::null_mut()) };
}

#[test]
fn json_round_trip_and_grid() {
    let mut g = ptr::null_mut();
    assert_eq!(
        unsafe { gpd_grid_domain(10, 2, 0.0, 1.0, 0.1, 0.5, &mut g) },
        GpdStatus::Ok
    );
    assert_eq!(unsafe { gpd_domain_len(g) }, 1600);

    let mut text = ptr::null_mut();
    assert_eq!(unsafe { gpd_domain_to_json(g, &mut text) }, GpdStatus::Ok);
    let mut back = ptr::null_mut();
    assert_eq!(
        unsafe { gpd_domain_from_json(text, &mut back) },
        GpdStatus::Ok
    );
    let mut d = f64::NAN;
    assert_eq!(unsafe { gpd_dhat(g, back, &mut d) }, GpdStatus::Ok);
    assert_eq!(d, 0.0);

    let mut c1 = vec![0.0; 9600];
    let mut c2 = vec![1.0; 9600];
    unsafe {
        assert_eq!(
            gpd_domain_coords(g, c1.as_mut_ptr(), c1.len()),
            GpdStatus::Ok
        );
        assert_eq!(
            gpd_domain_coords(back, c2.as_mut_ptr(), c2.len()),
            GpdStatus::Ok
        );
        gpd_string_free(text);
        gpd_domain_free(g);
        gpd_domain_free(back);
    }
    assert_eq!(c1, c2);
}

#[test]
fn loss_graph_and_optimizer() {
    let full = domain(&[SQUARE, SHIFTED, [1.0, 1.0, 0.5, 0.25, 0.25, 0.5]].concat());
    let mut g = ptr::null_mut();
    assert_eq!(
        unsafe { gpd_loss_graph_new(full, 1, &mut g) },
        GpdStatus::Ok
    );
    let mut loss = f64::NAN;
    let mut grad = [f64::NAN; 6];
    assert_eq!(
        unsafe { gpd_loss_graph_eval(g, SQUARE.as_ptr(), 6, &mut loss, grad.as_mut_ptr()) },
        GpdStatus::Ok
    );
    let mut direct = f64::NAN;
    let j = domain(&SQUARE);
    assert_eq!(unsafe { gpd_dhat(full, j, &mut direct) }, GpdStatus::Ok);
    assert_eq!(loss, direct);
    assert!(grad.iter().all(|g| g.is_finite()));
    assert_eq!(
        unsafe { gpd_loss_graph_eval(g, SQUARE.as_ptr(), 6, &mut loss, ptr::null_mut()) },
        GpdStatus::Ok
    );

    let mut sparse = ptr::null_mut();
    let mut best = f64::NAN;
    let s = unsafe { gpd_optimize(full, 2, 20, 0.001, 0.9, 0.99, 7, &mut sparse, &mut best) };
    assert_eq!(s, GpdStatus::Ok, "{}", last_error());
    let mut check = f64::NAN;
    assert_eq!(unsafe { gpd_dhat(full, sparse, &mut check) }, GpdStatus::Ok);
    assert_eq!(check, best);
    let s = unsafe { gpd_optimize(full, 5, 20, 0.001, 0.9, 0.99, 7, &mut sparse, &mut best) };
    assert_eq!(s, GpdStatus::InvalidArgument);

    unsafe {
        gpd_loss_graph_free(g);
        gpd_domain_free(full);
        gpd_domain_free(j);
        gpd_domain_free(sparse);
    }
}

#[test]
fn sparse_erosion_distance_through_handles() {
    let bars =
        CString::new(r#"{"bars": [{"mins": [[0, 0]], "maxs": [[2, 2]], "mult": 1}]}"#).unwrap();
    let mut m = ptr::null_mut();
    assert_eq!(
        unsafe { gpd_barcode_from_json(bars.as_ptr(), &mut m) },
        GpdStatus::Ok
    );
    let d = domain(&SQUARE);
    let mut v = f64::NAN;
    assert_eq!(
        unsafe { gpd_sparse_erosion_distance(m, d, m, d, &mut v) },
        GpdStatus::Ok
    );
    assert_eq!(v, 0.0);
    unsafe {
        gpd_barcode_free(m);
        gpd_domain_free(d);
    }
}

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/gpd_sparsify.h")
}

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "gpd_last_error_message",
        "gpd_domain_from_vec6",
        "gpd_domain_from_json",
        "gpd_domain_to_json",
        "gpd_domain_coords",
        "gpd_grid_domain",
        "gpd_domain_len",
        "gpd_domain_free",
        "gpd_string_free",
        "gpd_eps_21",
        "gpd_dhat",
        "gpd_eps_matrix",
        "gpd_loss_graph_new",
        "gpd_loss_graph_eval",
        "gpd_loss_graph_free",
        "gpd_optimize",
        "gpd_barcode_from_json",
        "gpd_barcode_free",
        "gpd_sparse_erosion_distance",
        "GPD_STATUS_OK",
    ] {
        assert!(text.contains(name), "{name} missing from header");
    }
}

const C_PROGRAM: &str = r#"
#include <stdio.h>
#include "gpd_sparsify.h"

int main(void) {
    double sq[6] = {0, 0, 1, 0, 0, 1};
    double sh[6] = {0.5, 0, 1, 0, 0, 1};
    double e = -1;
    if (gpd_eps_21(sq, sh, &e) != GPD_STATUS_OK || e != 0.5) return 1;
    GpdDomain *g = NULL;
    if (gpd_grid_domain(5, 2, 0.0, 1.0, 0.1, 0.5, &g) != GPD_STATUS_OK) return 2;
    if (gpd_domain_len(g) != 400) return 3;
    double d = -1;
    if (gpd_dhat(g, g, &d) != GPD_STATUS_OK || d != 0.0) return 4;
    if (gpd_dhat(g, NULL, &d) != GPD_STATUS_NULL_POINTER) return 5;
    gpd_domain_free(g);
    printf("ok\n");
    return 0;
}
"#;

/// Compiles and runs a C program against the header and the static
/// library. Skipped when no C compiler is installed.
#[test]
fn c_program_links_and_runs() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; skipping");
        return;
    };
    let tmp = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("ffi-c");
    std::fs::create_dir_all(&tmp).unwrap();
    let src = tmp.join("main.c");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let include = header().parent().unwrap().to_path_buf();

    let syntax = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(&include)
        .arg(&src)
        .status()
        .unwrap();
    assert!(syntax.success(), "header does not compile as C99");

    // The static library sits next to the test binary's profile directory.
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libgpd_sparsify_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built; link step skipped", lib.display());
        return;
    }
    let bin = tmp.join("main");
    let link = Command::new(&cc)
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(link.success(), "linking against the static library failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(
        out.status.success(),
        "C program exited with {:?}",
        out.status
    );
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}

fn which_cc() -> Result<String, ()> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc)
            .arg("--version")
            .output()
            .is_ok_and(|o| o.status.success())
        {
            return Ok(cc.to_string());
        }
    }
    Err(())
}
