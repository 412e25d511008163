use std::path::Path;
use std::process::Command;

fn main() {
    let dir = std::env::var("CARGO_MANIFEST_DIR").unwrap();
    let describe = Command::new("git")
        .args(["describe", "--always", "--dirty", "--tags"])
        .current_dir(&dir)
        .output()
        .ok()
        .filter(|o| o.status.success())
        .map(|o| String::from_utf8_lossy(&o.stdout).trim().to_string())
        .unwrap_or_else(|| "unknown".into());
    println!("cargo:rustc-env=ASEP_GIT_DESCRIBE={describe}");
    println!("cargo:rerun-if-changed=build.rs");
    for f in ["../../.git/HEAD", "../../.git/index"] {
        if Path::new(&dir).join(f).exists() {
            println!("cargo:rerun-if-changed={f}");
        }
    }
}
