use cbindgen::Config;
use std::path::PathBuf;

fn main() {
    let crate_dir = PathBuf::from(std::env::var("CARGO_MANIFEST_DIR").unwrap());
    println!("cargo:rerun-if-changed=src");
    println!("cargo:rerun-if-changed=cbindgen.toml");
    cbindgen::generate_with_config(&crate_dir, Config::from_file("cbindgen.toml").unwrap())
        .expect("header generation failed")
        .write_to_file("include/aggdiff.h");
}
