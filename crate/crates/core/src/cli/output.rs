//! Trajectory files.
//!
//! CSV: `#`-prefixed `key=value` metadata lines, then the header
//! `r,h,h_r,q,u,p,v,w`, then one row per sample. Numbers use Rust's shortest
//! round-trip formatting, so parsing and re-serialising a file reproduces it
//! byte for byte.

use std::fmt::Write as _;

use serde::Serialize;

use crate::integrator::IntegratorConfig;
use crate::model::{SolitonParams, SolutionSample, Trajectory};

pub const COLUMNS: [&str; 8] = ["r", "h", "h_r", "q", "u", "p", "v", "w"];

/// One output row; at `r = 0` the diagnostics take their limits
/// `q = u = p = v = 0`, `w = 1`.
pub fn row(s: &SolutionSample) -> [f64; 8] {
    let SolutionSample { r, h, hr } = *s;
    if r == 0.0 {
        return [r, h, hr, 0.0, 0.0, 0.0, 0.0, 1.0 / h];
    }
    let p = r * hr;
    let q = p / h;
    [r, h, hr, q, r * h, p, r * (q + 1.0), (p + h) / (h * h)]
}

/// Parsed CSV trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<[f64; 8]>,
}

impl CsvTable {
    pub fn metadata(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = COLUMNS.iter().position(|c| *c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}={v}");
        }
        out.push_str(&COLUMNS.join(","));
        out.push('\n');
        for r in &self.rows {
            let cells: Vec<String> = r.iter().map(|x| format!("{x:?}")).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut metadata = Vec::new();
        let mut rows = Vec::new();
        let mut header_seen = false;
        for (lineno, line) in text.lines().enumerate() {
            if let Some(meta) = line.strip_prefix("# ") {
                let (k, v) = meta.split_once('=').ok_or(format!("line {}: metadata without '='", lineno + 1))?;
                metadata.push((k.to_string(), v.to_string()));
            } else if !header_seen {
                if line != COLUMNS.join(",") {
                    return Err(format!("line {}: unexpected header {line:?}", lineno + 1));
                }
                header_seen = true;
            } else {
                let mut cells = [0.0; 8];
                let mut count = 0;
                for (j, cell) in line.split(',').enumerate() {
                    if j >= 8 {
                        return Err(format!("line {}: too many columns", lineno + 1));
                    }
                    cells[j] = cell.parse().map_err(|_| format!("line {}: bad number {cell:?}", lineno + 1))?;
                    count += 1;
                }
                if count != 8 {
                    return Err(format!("line {}: expected 8 columns, got {count}", lineno + 1));
                }
                rows.push(cells);
            }
        }
        if !header_seen {
            return Err("missing header".into());
        }
        Ok(Self { metadata, rows })
    }
}

pub fn params_label(p: &SolitonParams) -> (String, String) {
    match p.exact {
        Some(e) => (e.lambda.to_string(), e.mu1.to_string()),
        None => (format!("{:?}", p.lambda), format!("{:?}", p.mu1)),
    }
}

pub fn trajectory_table(traj: &Trajectory, cfg: &IntegratorConfig) -> CsvTable {
    let (lambda, mu1) = params_label(&traj.params);
    let mut metadata = vec![
        ("n".to_string(), traj.params.n.to_string()),
        ("lambda".to_string(), lambda),
        ("mu1".to_string(), mu1),
        ("seeder".to_string(), format!("{:?}", traj.seeder).to_lowercase()),
        ("seed_radius".to_string(), format!("{:?}", traj.seed_radius)),
        ("rel_tol".to_string(), format!("{:?}", cfg.rel_tol)),
        ("abs_tol".to_string(), format!("{:?}", cfg.abs_tol)),
        ("r_max".to_string(), format!("{:?}", cfg.r_max)),
        ("termination".to_string(), traj.termination.label().to_string()),
    ];
    if let Some(r) = traj.termination.event_radius() {
        metadata.push(("event_r".to_string(), format!("{r:?}")));
    }
    metadata.push(("error_estimate".to_string(), format!("{:?}", traj.error_estimate)));
    CsvTable { metadata, rows: traj.samples.iter().map(row).collect() }
}

#[derive(Serialize)]
pub struct JsonTrajectory<'a> {
    pub params: &'a SolitonParams,
    pub seeder: crate::model::SeederKind,
    pub seed_radius: f64,
    pub config: &'a IntegratorConfig,
    pub termination: crate::model::Termination,
    pub error_estimate: f64,
    pub accepted_steps: usize,
    pub rejected_steps: usize,
    pub columns: [&'static str; 8],
    pub rows: Vec<[f64; 8]>,
}

pub fn trajectory_json(traj: &Trajectory, cfg: &IntegratorConfig) -> String {
    let doc = JsonTrajectory {
        params: &traj.params,
        seeder: traj.seeder,
        seed_radius: traj.seed_radius,
        config: cfg,
        termination: traj.termination,
        error_estimate: traj.error_estimate,
        accepted_steps: traj.accepted_steps,
        rejected_steps: traj.rejected_steps,
        columns: COLUMNS,
        rows: traj.samples.iter().map(row).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("trajectory serialises")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let table = CsvTable {
            metadata: vec![("n".into(), "3".into()), ("note".into(), "a=b".into())],
            rows: vec![[0.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0, 1.0], [0.1, 1.0 / 3.0, -1e-300, 5e-324, 1e300, 0.1 + 0.2, -0.0, 7.0]],
        };
        let text = table.to_csv();
        let back = CsvTable::parse(&text).unwrap();
        assert_eq!(back.to_csv(), text);
        assert_eq!(back.metadata("note"), Some("a=b"));
        for (a, b) in back.rows.iter().flatten().zip(table.rows.iter().flatten()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }

    #[test]
    fn malformed_csv_is_rejected() {
        assert!(CsvTable::parse("r,h\n").is_err());
        assert!(CsvTable::parse("r,h,h_r,q,u,p,v,w\n1,2,3\n").is_err());
        assert!(CsvTable::parse("# x\nr,h,h_r,q,u,p,v,w\n").is_err());
    }
}
