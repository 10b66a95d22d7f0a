//! Writing a trajectory as CSV and JSON, and reading the CSV back.

use soliton_kit::cli::output::{trajectory_json, trajectory_table, CsvTable};
use soliton_kit::integrator::{solve, IntegratorConfig};
use soliton_kit::model::{SeederKind, SolitonParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = IntegratorConfig::with_r_max(1e3);
    let traj = solve(&SolitonParams::new(4, 0.0, -1.0)?, SeederKind::Both, &cfg)?;

    let dir = std::env::temp_dir();
    let csv_path = dir.join("soliton_n4.csv");
    let csv = trajectory_table(&traj, &cfg).to_csv();
    std::fs::write(&csv_path, &csv)?;
    std::fs::write(dir.join("soliton_n4.json"), trajectory_json(&traj, &cfg))?;

    let back = CsvTable::parse(&std::fs::read_to_string(&csv_path)?)?;
    println!("wrote {} rows to {}", back.rows.len(), csv_path.display());
    for (k, v) in &back.metadata {
        println!("  {k} = {v}");
    }
    println!("identical after re-serialising: {}", back.to_csv() == csv);
    let q = back.column("q").unwrap();
    println!("q at r_max: {:.6}", q.last().unwrap());
    Ok(())
}
