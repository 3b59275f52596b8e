#![allow(dead_code)]

use std::path::{Path, PathBuf};

use cfinsler_cli::{execute, Cli, Report};
use clap::Parser;

pub fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs")
}

pub fn example(name: &str) -> String {
    configs_dir().join(name).to_string_lossy().into_owned()
}

pub fn write_config(dir: &Path, name: &str, json: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p.to_string_lossy().into_owned()
}

/// Exit code and captured report of `cfinsler <args>`.
pub fn run(args: &[&str]) -> (i32, String) {
    let mut out = Vec::new();
    let argv = std::iter::once("cfinsler").chain(args.iter().copied());
    let code = cfinsler_cli::run(argv, &mut out);
    (code, String::from_utf8(out).unwrap())
}

pub fn report(args: &[&str]) -> Report {
    let cli = Cli::try_parse_from(std::iter::once("cfinsler").chain(args.iter().copied())).unwrap();
    execute(&cli.command).unwrap()
}

pub fn value(r: &Report, name: &str) -> f64 {
    r.check(name).unwrap_or_else(|| panic!("no check `{name}` in\n{r}")).value
}
