//! Regenerates the shipped model fixtures from the built-in generators.
//!
//! Usage: cargo run -p hmmon-core --example gen_fixtures -- <output-dir>

use hmmon_core::oracle::{icy_driving, monitor_a, monitor_b};

fn main() -> std::io::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "fixtures".to_string());
    std::fs::create_dir_all(&dir)?;
    std::fs::write(format!("{dir}/icy.hmm.json"), icy_driving().to_json_string())?;
    std::fs::write(format!("{dir}/monitorA.dfa.json"), monitor_a().to_json_string())?;
    std::fs::write(format!("{dir}/monitorB.dfa.json"), monitor_b().to_json_string())?;
    Ok(())
}
