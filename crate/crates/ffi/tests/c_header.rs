//! Compiles and runs a C program against the generated header and the
//! static library. Skipped when no C compiler is on PATH.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "emoscreen.h"

int main(void) {
    EsLayerCost c;
    if (es_layer_cost(3, 96, 96, 14, 14, &c) != ES_STATUS_OK) return 1;
    if (c.separable_macs != c.depthwise_macs + c.pointwise_macs) return 2;
    double r;
    if (es_cost_ratio(0, 4, &r) != ES_STATUS_INVALID_ARGUMENT) return 3;
    char msg[256];
    size_t needed = 0;
    if (es_last_error(msg, sizeof msg, &needed) != ES_STATUS_OK || needed <= 1) return 4;
    EsCohort *cohort = NULL;
    if (es_cohort_synth(ES_PRESET_HIGH_SEPARATION, 5, &cohort) != ES_STATUS_OK) return 5;
    EsSplit split = {18, 28, 7, 8, 5};
    EsClassifierResult res[4];
    if (es_cohort_evaluate(cohort, &split, 60, res) != ES_STATUS_OK) return 6;
    es_cohort_free(cohort);
    printf("%s %.1f\n", es_version(), res[1].accuracy);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    // <target>/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(|d| d.parent()).unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("no C compiler, skipping");
        return;
    }
    let lib = target_dir().join("libemoscreen_ffi.a");
    assert!(lib.exists(), "{} missing", lib.display());
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    std::fs::write(&src, PROGRAM).unwrap();
    let exe = dir.path().join("main");
    let out = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.starts_with(env!("CARGO_PKG_VERSION")), "{text}");
}
