//! File formats: JSON reports and unit-labeled CSV tables.

use std::fs;
use std::path::Path;

use mrplan::config::RunConfig;
use mrplan::misocp::PlanResult;
use mrplan::pipeline::PlanOutcome;
use serde::{Deserialize, Serialize};

use crate::Failure;

/// Contents of `plan.json`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlanFile {
    pub config: RunConfig,
    #[serde(flatten)]
    pub outcome: PlanOutcome,
}

fn io(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Internal(format!("{}: {e}", path.display()))
}

pub fn create_dir(dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io(dir, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| io(path, e))?;
    fs::write(path, text + "\n").map_err(|e| io(path, e))
}

pub fn read_plan(path: &Path) -> Result<PlanFile, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), Failure> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io(path, e))?;
    w.write_record(header).map_err(|e| io(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| io(path, e))?;
    }
    w.flush().map_err(|e| io(path, e))
}

/// Rows `t = 0..N`: the state at `t`, the input applied at `t` (empty at
/// `N`) and the face binaries of step `t` as a digit string (empty at 0).
pub fn trajectory_rows(x0: &[f64], result: &PlanResult, faces: usize) -> Vec<Vec<String>> {
    let n = result.inputs.len();
    (0..=n)
        .map(|t| {
            let x = if t == 0 { x0 } else { &result.states[t - 1][..] };
            let mut row = vec![t.to_string()];
            row.extend(x.iter().map(|v| v.to_string()));
            match result.inputs.get(t) {
                Some(u) => row.extend(u.iter().map(|v| v.to_string())),
                None => row.extend(["".into(), "".into()]),
            }
            row.push(if t == 0 {
                String::new()
            } else {
                result.binaries[(t - 1) * faces..t * faces].iter().map(|b| b.to_string()).collect()
            });
            row
        })
        .collect()
}

pub const TRAJECTORY_HEADER: [&str; 8] = ["t", "x1_m", "x2_m", "x3_mps", "x4_mps", "u1_mps2", "u2_mps2", "z"];
