//! Compiles a C program against the generated header and the static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <math.h>
#include "logdiv.h"

int main(void) {
    LogdivPotential *h = NULL;
    const char *json = "{\"name\": \"simplex-F-alpha\", \"dim\": 2, \"alpha\": 1.0, \"sign\": \"concave\"}";
    if (logdiv_potential_from_json(json, &h) != LOGDIV_STATUS_OK) return 10;
    double xi[2] = {0.3, -0.2}, xp[2] = {-0.1, 0.4}, d = -1.0, eta[2];
    if (logdiv_divergence(h, xi, xp, 2, &d) != LOGDIV_STATUS_OK) return 11;
    if (!(d > 0.0)) return 12;
    if (logdiv_dual_point(h, xp, 2, eta) != LOGDIV_STATUS_OK) return 13;
    double gap = -1.0;
    if (logdiv_fenchel_gap(h, xi, eta, 2, &gap) != LOGDIV_STATUS_OK) return 14;
    if (fabs(gap - d) > 1e-12) return 15;
    if (logdiv_divergence(h, xi, xp, 3, &d) != LOGDIV_STATUS_INVALID_ARGUMENT) return 16;
    char msg[128];
    if (logdiv_last_error(msg, sizeof msg) == 0) return 17;
    logdiv_potential_free(h);
    printf("%.17g\n", gap);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // target/<profile>/deps/<this test> -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    if Command::new("cc").arg("--version").output().is_err() {
        eprintln!("no C compiler on PATH; C link check not run");
        return;
    }
    let lib = target_dir().join("liblogdiv_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new("cc")
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(&include)
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap();
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&bin).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let gap: f64 = String::from_utf8(out.stdout).unwrap().trim().parse().unwrap();
    assert!(gap > 0.0);
}
