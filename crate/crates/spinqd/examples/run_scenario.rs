//! Run a scenario file the way the CLI does and list the files written.
//!
//! cargo run --example run_scenario -- examples/scenarios/ghz_ad.toml out
use std::path::PathBuf;

use spinqd::cli::{run_scenario, RunOptions};
use spinqd::fixtures::ScenarioConfig;

fn main() {
    let mut args = std::env::args().skip(1);
    let path = PathBuf::from(args.next().unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/qnd_coherent.toml").into()));
    let out = PathBuf::from(args.next().unwrap_or_else(|| "out".into()));
    let cfg = match ScenarioConfig::from_path(&path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    match run_scenario(&cfg, &RunOptions::default(), &out) {
        Ok(w) => w.files.iter().for_each(|f| println!("wrote {}", f.display())),
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
