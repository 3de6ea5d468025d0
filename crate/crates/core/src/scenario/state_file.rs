//! Columnar text format for truth states and range observations.
//!
//! One header line followed by comma-separated rows of
//! `epoch_s,x_m,y_m,z_m,vx_mps,vy_mps,vz_mps,range_obs_m`, values written
//! with 15 significant digits and LF line endings.

use std::fs;
use std::io::Write;
use std::path::Path;

use super::{ScenarioConfig, ScenarioError, TruthDataset};
use crate::dynamics::{RangeObservation, StateVector};
use crate::frames::Epoch;

pub const STATE_FILE_HEADER: &str = "epoch_s,x_m,y_m,z_m,vx_mps,vy_mps,vz_mps,range_obs_m";

fn io_err(path: &Path, source: std::io::Error) -> ScenarioError {
    ScenarioError::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Writes `data` in the state-file format.
pub fn write_state_file(path: &Path, data: &TruthDataset) -> Result<(), ScenarioError> {
    let mut out = String::with_capacity(64 * (data.len() + 1));
    out.push_str(STATE_FILE_HEADER);
    out.push('\n');
    for ((t, s), (_, o)) in data.states.iter().zip(&data.observations) {
        out.push_str(&format!("{:.14e}", t.seconds()));
        for v in s.0.iter().chain(std::iter::once(&o.value)) {
            out.push_str(&format!(",{v:.14e}"));
        }
        out.push('\n');
    }
    let mut file = fs::File::create(path).map_err(|e| io_err(path, e))?;
    file.write_all(out.as_bytes()).map_err(|e| io_err(path, e))
}

/// Reads a state file. Observation variances are taken from
/// `meta.obs_noise_var`; the cadence and duration in the returned metadata
/// describe the file contents.
pub fn load_state_file(path: &Path, meta: ScenarioConfig) -> Result<TruthDataset, ScenarioError> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    parse_state_file(&text, meta)
}

pub fn parse_state_file(text: &str, mut meta: ScenarioConfig) -> Result<TruthDataset, ScenarioError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim() == STATE_FILE_HEADER => {}
        Some((_, header)) => {
            return Err(ScenarioError::Parse {
                line: 1,
                message: format!("expected header '{STATE_FILE_HEADER}', found '{}'", header.trim()),
            })
        }
        None => return Err(ScenarioError::Empty),
    }

    let mut states: Vec<(Epoch, StateVector)> = Vec::new();
    let mut observations = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let row = raw.trim();
        if row.is_empty() {
            continue;
        }
        let values = row
            .split(',')
            .map(|cell| {
                let v: f64 = cell.trim().parse().map_err(|_| ScenarioError::Parse {
                    line,
                    message: format!("'{}' is not a number", cell.trim()),
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(ScenarioError::Parse {
                        line,
                        message: format!("non-finite value '{}'", cell.trim()),
                    })
                }
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if values.len() != 8 {
            return Err(ScenarioError::Parse {
                line,
                message: format!("expected 8 columns, found {}", values.len()),
            });
        }
        let epoch = Epoch(values[0]);
        if let Some((prev, _)) = states.last() {
            if !(epoch > *prev) {
                return Err(ScenarioError::NonMonotone { line, epoch: epoch.0 });
            }
        }
        let s = StateVector::new(values[1], values[2], values[3], values[4], values[5], values[6]);
        states.push((epoch, s));
        observations.push((epoch, RangeObservation::new(values[7], meta.obs_noise_var)));
    }
    if states.is_empty() {
        return Err(ScenarioError::Empty);
    }
    if states.len() >= 2 {
        meta.cadence_s = states[1].0 - states[0].0;
        meta.truth_step_s = meta.truth_step_s.min(meta.cadence_s);
    }
    meta.duration_s = states.last().unwrap().0 - states[0].0;
    Ok(TruthDataset {
        states,
        observations,
        meta,
    })
}
