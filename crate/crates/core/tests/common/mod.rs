#![allow(dead_code)]

pub mod oracle;
pub mod synth;

use std::ffi::OsStr;
use std::process::{Command, Output};

pub fn autobox<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<OsStr>,
{
    Command::new(env!("CARGO_BIN_EXE_autobox"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("spawn autobox")
}

pub fn stdout_json(out: &Output) -> serde_json::Value {
    assert!(
        out.status.success(),
        "autobox failed ({:?}): {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}
