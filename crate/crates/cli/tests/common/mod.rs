#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

pub const SEED: &str = "../core/data/seed.catalog.json";

pub fn manifest_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

pub fn fixture(name: &str) -> String {
    format!("tests/fixtures/{name}")
}

pub fn read_fixture(name: &str) -> serde_json::Value {
    let text = std::fs::read_to_string(manifest_dir().join(fixture(name))).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub struct Run {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the built binary from the crate directory so relative fixture paths
/// resolve the same way on every machine.
pub fn rdot(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_rdot"))
        .args(args)
        .current_dir(manifest_dir())
        .env_remove("RDOT_PORT")
        .output()
        .expect("rdot binary runs");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

pub fn golden_path(name: &str) -> PathBuf {
    manifest_dir().join("tests/golden").join(name)
}

/// The golden cases: file name and CLI arguments.
pub fn golden_cases() -> Vec<(&'static str, Vec<String>)> {
    let f = fixture;
    let case = |name: &'static str, args: &[&str]| (name, args.iter().map(|s| s.to_string()).collect());
    vec![
        case("validate_seed.json", &["validate", "--catalog", SEED]),
        case(
            "validate_documents.json",
            &[
                "validate",
                "--racm",
                &f("four_risks.racm.json"),
                "--spec",
                &f("spacecraft.moo.json"),
                "--matrix",
                &f("inconsistent3.matrix.json"),
                "--profile",
                &f("minimal.profile.json"),
                "--request",
                &f("plan.request.json"),
            ],
        ),
        case("filter_minimal.json", &["filter", "--profile", &f("minimal.profile.json")]),
        case("suggest_system.json", &["suggest", "--system", &f("system.json"), "--k", "3"]),
        case("cover_four_risks.json", &["cover", "--racm", &f("four_risks.racm.json"), "--mode", "exact"]),
        case(
            "cover_four_risks_force_out_c2.json",
            &[
                "cover",
                "--racm",
                &f("four_risks.racm.json"),
                "--overrides",
                &f("force_out_c2.overrides.json"),
            ],
        ),
        case(
            "cover_greedy_trap_greedy.json",
            &["cover", "--racm", &f("greedy_trap.racm.json"), "--mode", "greedy"],
        ),
        case(
            "cover_greedy_trap_exact.json",
            &["cover", "--racm", &f("greedy_trap.racm.json"), "--mode", "exact"],
        ),
        case("moo_spacecraft.json", &["moo", "--spec", &f("spacecraft.moo.json")]),
        case(
            "moo_spacecraft_ahp.json",
            &["moo", "--spec", &f("spacecraft.moo.json"), "--matrix", &f("uniform2.matrix.json")],
        ),
        case("ahp_uniform2.json", &["ahp", "--matrix", &f("uniform2.matrix.json")]),
        case("ahp_inconsistent3.json", &["ahp", "--matrix", &f("inconsistent3.matrix.json")]),
        case("plan.json", &["plan", "--request", &f("plan.request.json")]),
        case("plan.md", &["plan", "--request", &f("plan.request.json"), "--format", "markdown"]),
        case(
            "replan_force_out_c2.json",
            &[
                "replan",
                "--request",
                &f("plan.request.json"),
                "--overrides",
                &f("force_out_c2.overrides.json"),
            ],
        ),
    ]
}
