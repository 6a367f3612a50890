//! Runs every sample config under `configs/` through the command-line
//! front end and prints each summary.
//!
//! cargo run --release --example cli_configs

use std::path::Path;

fn main() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let out = std::env::temp_dir().join("nqs-cli-configs");
    let runs = [
        ("ed", "ed_heisenberg"),
        ("circuit", "circuit_file"),
        ("circuit", "circuit_random"),
        ("convert", "convert_local"),
        ("entropy", "entropy_local"),
        ("entropy", "entropy_bell"),
        ("tomo", "tomo_bell"),
    ];
    for (cmd, name) in runs {
        let config = root.join(format!("{name}.toml"));
        let dir = out.join(name);
        let code = nqs::cli::run([
            "nqs".as_ref(),
            cmd.as_ref(),
            "--config".as_ref(),
            config.as_os_str(),
            "--out".as_ref(),
            dir.as_os_str(),
        ]);
        let summary = std::fs::read_to_string(dir.join("summary.json")).unwrap_or_default();
        println!("{cmd} {name}: exit {code}\n{summary}");
    }
}
