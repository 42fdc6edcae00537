//! Parse a configuration, run it and list the artifacts, as the CLI does.
//!
//! cargo run --release --example run_config [path/to/config.toml]

use quasiwalk::config::{parse_config, BASELINE_TRAJECTORY};
use quasiwalk::run::run;

fn main() -> quasiwalk::Result<()> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => BASELINE_TRAJECTORY.replace("t_end = 10000.0", "t_end = 1000.0"),
    };
    let mut config = parse_config(&text)?;
    config.apply_env_override();
    print!("{}", config.to_toml());
    let manifest = run(&config)?;
    for f in &manifest.files {
        println!("{:<24} {:>8} rows  {}", f.name, f.rows, &f.sha256[..16]);
    }
    for (k, v) in &manifest.summary {
        println!("{k} = {v}");
    }
    Ok(())
}
