//! Support code for the acceptance suite in `tests/acceptance.rs`.
//!
//! The suite lives in its own package so that it runs after the unit and
//! integration tests of the other crates, whatever its outcome.

use std::io::Write;
use std::path::PathBuf;
use std::process::Command;

/// Writes one `PASS`/`FAIL` line straight to stdout, bypassing the test
/// harness capture, and returns `pass`.
pub fn report(id: u32, title: &str, pass: bool, detail: &str) -> bool {
    let line = format!(
        "ACCEPTANCE {id:>2} {}: {title} | {detail}\n",
        if pass { "PASS" } else { "FAIL" }
    );
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    pass
}

/// Path of the `kfull` binary in the target directory this test runs from,
/// building it first if it is missing.
pub fn kfull_binary() -> std::io::Result<PathBuf> {
    let exe = std::env::current_exe()?;
    // target/<profile>/deps/acceptance-<hash>
    let profile_dir = exe
        .parent()
        .and_then(|d| d.parent())
        .ok_or_else(|| std::io::Error::other("unexpected test binary location"))?;
    let bin = profile_dir.join(format!("kfull{}", std::env::consts::EXE_SUFFIX));
    if !bin.exists() {
        let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
        let mut cmd = Command::new(cargo);
        cmd.args(["build", "--quiet", "-p", "kfull-cli", "--bin", "kfull"]);
        if profile_dir.ends_with("release") {
            cmd.arg("--release");
        }
        let status = cmd.status()?;
        if !status.success() || !bin.exists() {
            return Err(std::io::Error::other("could not build the kfull binary"));
        }
    }
    Ok(bin)
}
