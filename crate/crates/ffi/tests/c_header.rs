//! Compiles `smoke.c` against the generated header and the shared library.

use std::path::PathBuf;
use std::process::Command;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header_dir = manifest.join("include");
    assert!(header_dir.join("plainsql.h").exists(), "header was not generated");
    // target/<profile>/deps/<this test> -> target/<profile>
    let exe = std::env::current_exe().unwrap();
    let lib_dir = exe.parent().and_then(|p| p.parent()).unwrap().to_path_buf();
    let has_lib = lib_dir.join("libplainsql_ffi.so").exists() || lib_dir.join("libplainsql_ffi.dylib").exists();
    if !has_lib || Command::new("cc").arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or shared library at {}", lib_dir.display());
        return;
    }
    let out_dir = tempfile::tempdir().unwrap();
    let binary = out_dir.path().join("smoke");
    let status = Command::new("cc")
        .arg(manifest.join("tests/smoke.c"))
        .arg("-I")
        .arg(&header_dir)
        .arg("-L")
        .arg(&lib_dir)
        .arg("-lplainsql_ffi")
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .arg("-o")
        .arg(&binary)
        .status()
        .unwrap();
    assert!(status.success(), "cc failed");
    let run = Command::new(&binary).output().unwrap();
    assert!(run.status.success(), "smoke exited with {:?}: {}", run.status.code(), String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("ok "));
}
