use std::ffi::{c_char, CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use efdd_ffi::*;

fn fixture(dir: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(dir)
}

fn c(p: impl AsRef<Path>) -> CString {
    CString::new(p.as_ref().to_str().unwrap()).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(efdd_last_error()) }
        .to_string_lossy()
        .into_owned()
}

unsafe fn take(s: *mut c_char) -> String {
    let out = CStr::from_ptr(s).to_string_lossy().into_owned();
    efdd_string_free(s);
    out
}

unsafe fn matrix(dir: &str) -> *mut EfddMatrix {
    let mut m = ptr::null_mut();
    assert_eq!(
        efdd_matrix_from_traces(c(fixture(dir)).as_ptr(), &mut m),
        EfddStatus::Ok
    );
    m
}

#[test]
fn localize_through_handles() {
    unsafe {
        let m = matrix("middle");
        assert_eq!(efdd_matrix_run_count(m), 6);
        assert!(efdd_matrix_feature_count(m) > 0);
        let mut r = ptr::null_mut();
        let line = CString::new("line").unwrap();
        let metric = CString::new("tarantula").unwrap();
        assert_eq!(
            efdd_localize(m, metric.as_ptr(), 2, line.as_ptr(), ptr::null(), &mut r),
            EfddStatus::Ok
        );
        assert_eq!(take(efdd_ranking_location(r, 0)), "middle.py:6");
        let (mut score, mut rank) = (0.0, 0.0);
        assert_eq!(
            efdd_ranking_entry(r, 0, &mut score, &mut rank),
            EfddStatus::Ok
        );
        assert!((score - 5.0 / 6.0).abs() < 1e-12);
        assert_eq!(rank, 1.0);
        let len = efdd_ranking_len(r);
        assert!(efdd_ranking_location(r, len).is_null());
        assert_eq!(
            efdd_ranking_entry(r, len, &mut score, &mut rank),
            EfddStatus::InvalidArgument
        );
        efdd_ranking_free(r);
        efdd_matrix_free(m);
    }
}

#[test]
fn tree_round_trip_and_diagnosis() {
    let dir = tempfile::tempdir().unwrap();
    let path = c(dir.path().join("middle.tree"));
    unsafe {
        let m = matrix("middle");
        let mut t = ptr::null_mut();
        assert_eq!(efdd_tree_train(m, 0, 2, &mut t), EfddStatus::Ok);
        assert_eq!(efdd_tree_save(t, path.as_ptr()), EfddStatus::Ok);
        let mut loaded = ptr::null_mut();
        assert_eq!(efdd_tree_load(path.as_ptr(), &mut loaded), EfddStatus::Ok);

        let mut verdicts = [EfddVerdict::Pass; 6];
        assert_eq!(
            efdd_tree_predict(loaded, m, verdicts.as_mut_ptr(), 6),
            EfddStatus::Ok
        );
        assert_eq!(verdicts[..5], [EfddVerdict::Pass; 5]);
        assert_eq!(verdicts[5], EfddVerdict::Fail);
        assert_eq!(
            efdd_tree_predict(loaded, m, verdicts.as_mut_ptr(), 5),
            EfddStatus::BufferTooSmall
        );

        let held_out = matrix("middle_heldout");
        let mut one = [EfddVerdict::Pass];
        assert_eq!(
            efdd_tree_predict(loaded, held_out, one.as_mut_ptr(), 1),
            EfddStatus::Ok
        );
        assert_eq!(one[0], EfddVerdict::Fail);

        let mut text = ptr::null_mut();
        let root = c(fixture("middle"));
        assert_eq!(
            efdd_tree_diagnosis(loaded, root.as_ptr(), &mut text),
            EfddStatus::Ok
        );
        assert_eq!(
            take(text),
            "failure path 1 (1 failing, 0 passing training runs):\n  return y at middle.py:6 executed\n  y >= x at middle.py:1 does not hold\n"
        );
        let mut dot = ptr::null_mut();
        assert_eq!(efdd_tree_dot(t, &mut dot), EfddStatus::Ok);
        assert!(take(dot).starts_with("digraph tree {"));

        efdd_tree_free(t);
        efdd_tree_free(loaded);
        efdd_matrix_free(m);
        efdd_matrix_free(held_out);
    }
}

#[test]
fn csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let matrix_path = c(dir.path().join("m.csv"));
    let ranking_path = c(dir.path().join("r.csv"));
    unsafe {
        let m = matrix("vowels");
        assert_eq!(
            efdd_matrix_save_csv(m, matrix_path.as_ptr()),
            EfddStatus::Ok
        );
        let mut back = ptr::null_mut();
        assert_eq!(
            efdd_matrix_from_csv(matrix_path.as_ptr(), &mut back),
            EfddStatus::Ok
        );
        assert_eq!(
            efdd_matrix_feature_count(back),
            efdd_matrix_feature_count(m)
        );
        let mut r = ptr::null_mut();
        let metric = CString::new("ochiai").unwrap();
        assert_eq!(
            efdd_localize(back, metric.as_ptr(), 2, ptr::null(), ptr::null(), &mut r),
            EfddStatus::Ok
        );
        assert_eq!(
            efdd_ranking_save_csv(r, ranking_path.as_ptr()),
            EfddStatus::Ok
        );
        let text = std::fs::read_to_string(dir.path().join("r.csv")).unwrap();
        assert!(text.starts_with("loc,score,average_rank,features\n"));
        efdd_ranking_free(r);
        efdd_matrix_free(back);
        efdd_matrix_free(m);
    }
}

#[test]
fn errors_map_to_status_codes() {
    unsafe {
        let mut m = ptr::null_mut();
        assert_eq!(
            efdd_matrix_from_traces(ptr::null(), &mut m),
            EfddStatus::NullPointer
        );
        assert!(last_error().contains("dir"));
        let missing = c("/nonexistent/efdd");
        assert_eq!(
            efdd_matrix_from_traces(missing.as_ptr(), &mut m),
            EfddStatus::Io
        );
        let bad = [0xffu8, 0];
        assert_eq!(
            efdd_matrix_from_traces(bad.as_ptr().cast(), &mut m),
            EfddStatus::InvalidUtf8
        );
        assert!(m.is_null());

        let dir = tempfile::tempdir().unwrap();
        std::fs::copy(
            fixture("middle/middle_t1.trace"),
            dir.path().join("a.trace"),
        )
        .unwrap();
        let pass_only = matrix(dir.path().to_str().unwrap());
        let metric = CString::new("tarantula").unwrap();
        let mut r = ptr::null_mut();
        assert_eq!(
            efdd_localize(
                pass_only,
                metric.as_ptr(),
                2,
                ptr::null(),
                ptr::null(),
                &mut r
            ),
            EfddStatus::InsufficientLabels
        );
        let mut t = ptr::null_mut();
        assert_eq!(efdd_tree_train(pass_only, 0, 2, &mut t), EfddStatus::Ok);
        efdd_tree_free(t);
        efdd_matrix_free(pass_only);

        std::fs::write(dir.path().join("a.trace"), "not json\n").unwrap();
        assert_eq!(
            efdd_matrix_from_traces(c(dir.path()).as_ptr(), &mut m),
            EfddStatus::Format
        );

        efdd_matrix_free(ptr::null_mut());
        efdd_ranking_free(ptr::null_mut());
        efdd_tree_free(ptr::null_mut());
        efdd_string_free(ptr::null_mut());
        assert_eq!(efdd_matrix_run_count(ptr::null()), 0);
    }
}

#[test]
fn header_matches_exports() {
    let header =
        std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/efdd.h")).unwrap();
    for name in [
        "efdd_last_error",
        "efdd_string_free",
        "efdd_matrix_from_traces",
        "efdd_matrix_from_csv",
        "efdd_matrix_save_csv",
        "efdd_matrix_free",
        "efdd_localize",
        "efdd_ranking_entry",
        "efdd_ranking_location",
        "efdd_ranking_free",
        "efdd_tree_train",
        "efdd_tree_save",
        "efdd_tree_load",
        "efdd_tree_predict",
        "efdd_tree_diagnosis",
        "efdd_tree_dot",
        "efdd_tree_free",
    ] {
        assert!(
            header.contains(&format!("{name}(")),
            "{name} missing from header"
        );
    }
    assert!(header.contains("typedef struct EfddMatrix EfddMatrix;"));
}

#[test]
fn c_program_links_against_static_library() {
    let profile_dir = std::env::current_exe()
        .unwrap()
        .parent()
        .unwrap()
        .parent()
        .unwrap()
        .to_path_buf();
    let lib = profile_dir.join("libefdd_ffi.a");
    assert!(lib.exists(), "{} not built", lib.display());
    let dir = tempfile::tempdir().unwrap();
    let exe = dir.path().join("smoke");
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let status = Command::new("cc")
        .arg(manifest.join("tests/c/smoke.c"))
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler");
    assert!(status.success());
    let out = Command::new(&exe)
        .arg(fixture("middle"))
        .arg(dir.path().join("t.tree"))
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "middle.py:6 0.8333 1.0");
    assert_eq!(lines[1], "PPPPPF");
    assert!(lines[2].contains("unknown metric"));
    assert!(dir.path().join("t.tree").exists());
}
