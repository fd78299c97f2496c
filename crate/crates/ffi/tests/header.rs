//! The generated header declares the exported API and works from C.

use std::path::{Path, PathBuf};
use std::process::Command;

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include/kgcoherent.h")
}

#[test]
fn header_declares_api() {
    let text = std::fs::read_to_string(header()).expect("header written by build script");
    for sym in [
        "KGCOHERENT_H",
        "typedef struct KgFreeState KgFreeState;",
        "typedef struct KgMagneticState KgMagneticState;",
        "typedef struct KgNeutralState KgNeutralState;",
        "KG_STATUS_OK = 0",
        "KG_STATUS_NULL_POINTER = 1",
        "KG_STATUS_INVALID_PARAMETER = 2",
        "KG_STATUS_NON_CONVERGENCE = 3",
        "KG_STATUS_PANIC = 4",
        "kg_last_error(void)",
        "kg_free_new(",
        "kg_free_free(",
        "kg_neutral_new(",
        "kg_magnetic_new(",
        "kg_magnetic_field(",
    ] {
        assert!(text.contains(sym), "header lacks {sym}");
    }
}

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "kgcoherent.h"

int main(void) {
    KgFreeState *s = NULL;
    double m = 0.0, v = 0.0;
    if (kg_free_new(1.0, 0.0, 1.0, 1, 0.0, &s) != KG_STATUS_OK) return 1;
    if (kg_free_velocity(s, &m, &v) != KG_STATUS_OK) return 2;
    kg_free_free(s);
    if (fabs(m - 0.6421) > 5e-4) return 3;
    if (kg_free_new(0.0, 0.0, 1.0, 1, 0.0, &s) != KG_STATUS_INVALID_PARAMETER) return 4;
    if (kg_last_error() == NULL) return 5;
    printf("%.4f\n", m);
    return 0;
}
"#;

/// Compiles a small C program against the static library when a C
/// compiler is available.
#[test]
fn c_program_links() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler, skipping");
        return;
    }
    // tests run from target/<profile>/deps
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(Path::parent).unwrap();
    let lib = profile_dir.join("libkgcoherent_ffi.a");
    if !lib.exists() {
        eprintln!("{} not built, skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "compiling the C program failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "0.6421");
}
