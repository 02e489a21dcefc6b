use std::path::PathBuf;
use std::process::Command;

/// Compile the C smoke program against the generated header and static library.
#[test]
fn c_program_links_and_runs() {
    let crate_dir = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let header = crate_dir.join("include/aggdiff.h");
    assert!(header.exists(), "header was not generated");
    // target/<profile>/deps/<test binary>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libaggdiff_ffi.a");
    if !lib.exists() {
        // some cargo versions skip non-rlib crate types when building tests
        let status = Command::new(env!("CARGO"))
            .args(["build", "-p", "aggdiff-ffi"])
            .args(if profile_dir.ends_with("release") { vec!["--release"] } else { vec![] })
            .status()
            .unwrap();
        assert!(status.success());
    }
    assert!(lib.exists(), "missing {}", lib.display());
    let exe = std::env::temp_dir().join(format!("aggdiff_smoke_{}", std::process::id()));
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg(crate_dir.join("tests/smoke.c"))
        .arg("-I")
        .arg(crate_dir.join("include"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .expect("C compiler not found");
    assert!(status.success());
    let out = Command::new(&exe).output().unwrap();
    let _ = std::fs::remove_file(&exe);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
