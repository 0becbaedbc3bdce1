//! Runs a config file (or the defaults) and writes CSV, manifest and fit files.
//!
//! `cargo run --release --example simulate_to_files -- [config] [section.key=value ...]`

use std::time::Instant;

use zrlab::config::{emit_config, load_config, ExperimentKind};
use zrlab::experiments::run;
use zrlab::output::emit_record;

fn main() -> zrlab::Result<()> {
    let mut args = std::env::args().skip(1);
    let first = args.next();
    let path = first.clone().filter(|a| !a.contains('='));
    let overrides: Vec<String> = first.filter(|a| a.contains('=')).into_iter().chain(args).collect();
    let kind = if path.is_some() { None } else { Some(ExperimentKind::Simulate) };
    let spec = load_config(path.as_deref().map(std::path::Path::new), &overrides, kind)?;
    print!("{}", emit_config(&spec));

    let clock = Instant::now();
    let rec = run(&spec)?;
    let files = emit_record(&spec, &rec, clock.elapsed().as_secs_f64(), 0)?;
    println!("\n{} rows -> {}", rec.rows.len(), files.csv.display());
    println!("manifest -> {}", files.manifest.display());
    println!("verdict: {:?}", rec.verdict);
    Ok(())
}
