use std::ffi::{c_char, CStr, CString};
use std::path::PathBuf;
use std::process::Command;
use std::ptr;

use clonelab_ffi::*;

fn owned(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { clonelab_string_free(s) };
    out
}

fn last_error() -> String {
    let p = clonelab_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string()
}

#[test]
fn tables_round_trip() {
    unsafe {
        let mut med = ptr::null_mut();
        assert_eq!(clonelab_table_order_stat(3, 2, 4, &mut med), ClonelabStatus::Ok);
        assert_eq!(clonelab_table_arity(med), 3);
        assert_eq!(clonelab_table_chain_size(med), 4);
        assert!(clonelab_table_is_majority(med));

        let mut v = 0usize;
        let input = [3usize, 0, 2];
        assert_eq!(clonelab_table_eval(med, input.as_ptr(), 3, &mut v), ClonelabStatus::Ok);
        assert_eq!(v, 2);

        let text = CString::new(owned(clonelab_table_to_text(med))).unwrap();
        let mut back = ptr::null_mut();
        assert_eq!(clonelab_table_parse(text.as_ptr(), &mut back), ClonelabStatus::Ok);
        assert!(clonelab_table_equal(med, back));

        // med(x, x, y) = x
        let mut ident = ptr::null_mut();
        let assignment = [1usize, 1, 2];
        assert_eq!(
            clonelab_table_identify(med, assignment.as_ptr(), 3, 2, &mut ident),
            ClonelabStatus::Ok
        );
        let values: Vec<u8> = (0..16).map(|i| (i / 4) as u8).collect();
        let mut proj = ptr::null_mut();
        assert_eq!(
            clonelab_table_from_values(2, 4, values.as_ptr(), values.len(), &mut proj),
            ClonelabStatus::Ok
        );
        assert!(clonelab_table_equal(ident, proj));

        // med(proj, proj, proj) = proj
        let inners = [proj as *const _, proj as *const _, proj as *const _];
        let mut comp = ptr::null_mut();
        assert_eq!(clonelab_table_compose(med, inners.as_ptr(), 3, &mut comp), ClonelabStatus::Ok);
        assert!(clonelab_table_equal(comp, proj));

        for t in [med, back, ident, proj, comp] {
            clonelab_table_free(t);
        }
    }
}

#[test]
fn errors_carry_status_and_message() {
    unsafe {
        let mut med = ptr::null_mut();
        assert_eq!(clonelab_table_order_stat(3, 2, 3, &mut med), ClonelabStatus::Ok);
        let mut v = 0usize;
        let input = [0usize, 1];
        assert_eq!(clonelab_table_eval(med, input.as_ptr(), 2, &mut v), ClonelabStatus::ArityMismatch);
        assert!(!last_error().is_empty());

        let mut bad = ptr::null_mut();
        assert_ne!(clonelab_table_order_stat(3, 4, 3, &mut bad), ClonelabStatus::Ok);
        assert!(bad.is_null());

        let garbage = CString::new("optable x").unwrap();
        assert_eq!(clonelab_table_parse(garbage.as_ptr(), &mut bad), ClonelabStatus::Parse);
        assert_eq!(clonelab_table_parse(ptr::null(), &mut bad), ClonelabStatus::NullPointer);
        assert_eq!(clonelab_table_eval(ptr::null(), input.as_ptr(), 2, &mut v), ClonelabStatus::NullPointer);

        let mut other = ptr::null_mut();
        assert_eq!(clonelab_table_order_stat(3, 2, 4, &mut other), ClonelabStatus::Ok);
        let gens = [med as *const _, other as *const _];
        let mut frag = ptr::null_mut();
        assert_eq!(clonelab_close(gens.as_ptr(), 2, 3, 1000, &mut frag), ClonelabStatus::DomainMismatch);
        assert_eq!(clonelab_close(gens.as_ptr(), 0, 3, 1000, &mut frag), ClonelabStatus::InvalidArgument);

        clonelab_table_free(med);
        clonelab_table_free(other);
        clonelab_table_free(ptr::null_mut());
        clonelab_string_free(ptr::null_mut());
    }
}

#[test]
fn closure_and_membership() {
    unsafe {
        let min = CString::new("optable 2 2\n0 0\n0 1\n").unwrap();
        let mut gen = ptr::null_mut();
        assert_eq!(clonelab_table_parse(min.as_ptr(), &mut gen), ClonelabStatus::Ok);
        let gens = [gen as *const _];
        let mut frag = ptr::null_mut();
        assert_eq!(clonelab_close(gens.as_ptr(), 1, 3, 1000, &mut frag), ClonelabStatus::Ok);
        let mut exhausted = false;
        assert_eq!(clonelab_fragment_level_size(frag, 3, &mut exhausted), 7);
        assert!(exhausted);
        assert_eq!(clonelab_fragment_level_size(frag, 9, ptr::null_mut()), 0);

        let mut min3 = ptr::null_mut();
        assert_eq!(clonelab_table_order_stat(3, 1, 2, &mut min3), ClonelabStatus::Ok);
        let mut m = ClonelabMembership::Unknown;
        let mut witness = ptr::null_mut();
        assert_eq!(clonelab_fragment_contains(frag, min3, &mut m, &mut witness), ClonelabStatus::Ok);
        assert_eq!(m, ClonelabMembership::Yes);
        assert!(owned(witness).contains("f1"));

        let mut max2 = ptr::null_mut();
        assert_eq!(clonelab_table_order_stat(2, 2, 2, &mut max2), ClonelabStatus::Ok);
        assert_eq!(clonelab_fragment_contains(frag, max2, &mut m, &mut witness), ClonelabStatus::Ok);
        assert_eq!(m, ClonelabMembership::No);
        assert!(witness.is_null());

        clonelab_fragment_free(frag);
        for t in [gen, min3, max2] {
            clonelab_table_free(t);
        }
    }
}

#[test]
fn terms_and_wild_families() {
    unsafe {
        let src = CString::new("(op med:3 (var 1) (var 2) (var 3))").unwrap();
        let mut term = ptr::null_mut();
        assert_eq!(clonelab_term_parse(src.as_ptr(), &mut term), ClonelabStatus::Ok);
        assert_eq!(clonelab_term_arity(term), 3);

        let mut table = ptr::null_mut();
        assert_eq!(clonelab_term_to_table(term, 4, &mut table), ClonelabStatus::Ok);
        let mut med = ptr::null_mut();
        assert_eq!(clonelab_table_order_stat(3, 2, 4, &mut med), ClonelabStatus::Ok);
        assert!(clonelab_table_equal(table, med));

        let mut fam = ptr::null_mut();
        assert_eq!(clonelab_wild_family(term, &mut fam), ClonelabStatus::Ok);
        assert!(clonelab_family_in_pol_t1(fam));
        let mut unary = true;
        assert_eq!(clonelab_family_almost_unary(fam, &mut unary), ClonelabStatus::Ok);
        assert!(!unary);
        let json: serde_json::Value = serde_json::from_str(&owned(clonelab_family_to_json(fam))).unwrap();
        assert_eq!(json["minimal_sets"], serde_json::json!([[1, 2], [1, 3], [2, 3]]));

        clonelab_family_free(fam);
        clonelab_term_free(term);
        clonelab_table_free(table);
        clonelab_table_free(med);
    }
}

#[test]
fn amplification_schedule_json() {
    unsafe {
        let mut s = ptr::null_mut();
        assert_eq!(clonelab_amplification_json(5, 1, 2, &mut s), ClonelabStatus::Ok);
        let v: serde_json::Value = serde_json::from_str(&owned(s)).unwrap();
        assert_eq!(v["b"], "120");
        assert_ne!(clonelab_amplification_json(4, 1, 2, &mut s), ClonelabStatus::Ok);
    }
    let version = unsafe { CStr::from_ptr(clonelab_version()) };
    assert_eq!(version.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

/// Compiles a small C program against the generated header and static library.
#[test]
fn c_program_links_against_header() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler");
        return;
    }
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/ffi-<hash> -> target/<profile>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libclonelab_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());

    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(
        &src,
        r#"#include <stdio.h>
#include "clonelab.h"

int main(void) {
    ClonelabTable *med = NULL, *bad = NULL;
    size_t in[3] = {3, 0, 2}, out = 0;
    if (clonelab_table_order_stat(3, 2, 4, &med) != CLONELAB_STATUS_OK) return 1;
    if (clonelab_table_eval(med, in, 3, &out) != CLONELAB_STATUS_OK || out != 2) return 2;
    if (!clonelab_table_is_majority(med)) return 3;
    if (clonelab_table_parse("optable", &bad) != CLONELAB_STATUS_PARSE) return 4;
    if (clonelab_last_error() == NULL) return 5;
    char *text = clonelab_table_to_text(med);
    printf("%s", text);
    clonelab_string_free(text);
    clonelab_table_free(med);
    return 0;
}
"#,
    )
    .unwrap();
    let exe = dir.path().join("main");
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let run = Command::new(&exe).output().unwrap();
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("optable 3 4"));
}
