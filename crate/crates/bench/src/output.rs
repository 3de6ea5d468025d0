//! CSV and metadata writers.
//!
//! Every number is written with 15 significant digits. Output contains no
//! paths or timestamps, so identical runs produce identical bytes wherever
//! they are written.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use orbitfilter::FilterKind;

use crate::config::RunConfig;
use crate::runner::{BenchReport, HZ_FILTERS};
use crate::BenchError;

pub const RMSE_FILE: &str = "rmse.csv";
pub const HZ_FILE: &str = "hz.csv";
pub const METADATA_FILE: &str = "metadata.toml";
pub const CONFIG_COPY_FILE: &str = "run_config.toml";

fn num(v: f64) -> String {
    format!("{v:.14e}")
}

pub fn residual_file_name(scenario: &str, filter: FilterKind) -> String {
    format!("{scenario}__{filter}__residuals.csv")
}

pub fn eci_residual_file_name(scenario: &str, filter: FilterKind) -> String {
    format!("{scenario}__{filter}__eci_residuals.csv")
}

pub fn rmse_csv(report: &BenchReport) -> String {
    let mut out = String::from("scenario,filter,radial_rmse_m\n");
    for row in report.rmse_rows() {
        out.push_str(&format!("{},{},{}\n", row.scenario, row.filter, num(row.radial_rmse_m)));
    }
    out
}

/// Wide table: one row per scenario, statistic and p-value columns for each
/// tested filter present in the run.
pub fn hz_csv(report: &BenchReport, filters: &[FilterKind]) -> String {
    let tested: Vec<FilterKind> = HZ_FILTERS.into_iter().filter(|f| filters.contains(f)).collect();
    let mut out = String::from("scenario");
    for f in &tested {
        out.push_str(&format!(",{f}_statistic,{f}_p_value"));
    }
    out.push('\n');
    for s in &report.scenarios {
        out.push_str(&s.id);
        for f in &tested {
            let hz = report.cell(&s.id, *f).and_then(|c| c.hz).expect("HZ computed for tested filters");
            out.push_str(&format!(",{},{}", num(hz.statistic), num(hz.p_value)));
        }
        out.push('\n');
    }
    out
}

fn residual_csv(report: &BenchReport, scenario: &str, filter: FilterKind) -> String {
    let cell = report.cell(scenario, filter).expect("cell exists");
    let mut out = String::from("epoch_s,radial_m,along_m,cross_m\n");
    for (t, r) in cell.residuals.epochs.iter().zip(&cell.residuals.residuals_rsw) {
        out.push_str(&format!(
            "{},{},{},{}\n",
            num(t.seconds()),
            num(r.radial),
            num(r.along_track),
            num(r.cross_track)
        ));
    }
    out
}

fn eci_residual_csv(report: &BenchReport, scenario: &str, filter: FilterKind) -> String {
    let cell = report.cell(scenario, filter).expect("cell exists");
    let mut out = String::from("epoch_s,dx_m,dy_m,dz_m,dvx_mps,dvy_mps,dvz_mps\n");
    for (i, t) in cell.residuals.epochs.iter().enumerate() {
        out.push_str(&num(t.seconds()));
        for j in 0..6 {
            out.push(',');
            out.push_str(&num(cell.eci_residuals[(i, j)]));
        }
        out.push('\n');
    }
    out
}

fn metadata_toml(report: &BenchReport) -> String {
    let mut out = String::new();
    out.push_str(&format!("tool_version = \"{}\"\n", env!("CARGO_PKG_VERSION")));
    out.push_str(&format!("config_sha256 = \"{}\"\n", report.config_hash));
    out.push_str(&format!("seed = {}\n", report.seed));
    for s in &report.scenarios {
        out.push_str("\n[[scenarios]]\n");
        out.push_str(&format!("id = \"{}\"\n", s.id));
        out.push_str(&format!("truth_seed = {}\n", s.truth_seed));
        out.push_str(&format!("samples = {}\n", s.samples));
        out.push_str(&format!("observation_sha256 = \"{}\"\n", s.observation_sha256));
        let filters: Vec<_> = report.cells.iter().filter(|c| c.scenario == s.id).collect();
        out.push_str("filter_seeds = { ");
        out.push_str(
            &filters
                .iter()
                .map(|c| format!("{} = {}", c.filter, c.filter_seed))
                .collect::<Vec<_>>()
                .join(", "),
        );
        out.push_str(" }\n");
    }
    out
}

/// Writes all report files into `dir`. On any failure the files written so
/// far are removed and the error is returned.
pub fn write_outputs(report: &BenchReport, config: &RunConfig, dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let mut files: Vec<(String, String)> = vec![
        (RMSE_FILE.to_string(), rmse_csv(report)),
        (METADATA_FILE.to_string(), metadata_toml(report)),
        (
            CONFIG_COPY_FILE.to_string(),
            RunConfig {
                output_dir: PathBuf::new(),
                ..config.clone()
            }
            .to_toml(),
        ),
    ];
    if config.filters.iter().any(|f| HZ_FILTERS.contains(f)) {
        files.push((HZ_FILE.to_string(), hz_csv(report, &config.filters)));
    }
    for s in &report.scenarios {
        for f in &config.filters {
            files.push((residual_file_name(&s.id, *f), residual_csv(report, &s.id, *f)));
            if config.write_eci_residuals {
                files.push((eci_residual_file_name(&s.id, *f), eci_residual_csv(report, &s.id, *f)));
            }
        }
    }

    let created_dir = !dir.exists();
    let io = |path: &Path, e: std::io::Error| BenchError::Io {
        path: path.display().to_string(),
        source: e,
    };
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let mut written = Vec::with_capacity(files.len());
    for (name, contents) in files {
        let path = dir.join(&name);
        if let Err(e) = fs::write(&path, contents) {
            for p in &written {
                let _ = fs::remove_file(p);
            }
            let _ = fs::remove_file(&path);
            if created_dir {
                let _ = fs::remove_dir(dir);
            }
            return Err(io(&path, e));
        }
        written.push(path);
    }
    Ok(written)
}

/// Reads a CSV with a header row into a matrix, dropping an `epoch_s`
/// column if present.
pub fn read_numeric_csv(path: &Path) -> Result<DMatrix<f64>, BenchError> {
    let bad = |msg: String| BenchError::Runtime(format!("{}: {msg}", path.display()));
    let mut reader = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let headers = reader.headers().map_err(|e| bad(e.to_string()))?.clone();
    let keep: Vec<usize> = (0..headers.len()).filter(|&i| headers[i].trim() != "epoch_s").collect();
    if keep.is_empty() {
        return Err(bad("no data columns".into()));
    }
    let mut values = Vec::new();
    let mut rows = 0;
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        for &j in &keep {
            let cell = record.get(j).unwrap_or("");
            let v: f64 = cell
                .trim()
                .parse()
                .map_err(|_| bad(format!("line {}: '{cell}' is not a number", i + 2)))?;
            values.push(v);
        }
        rows += 1;
    }
    Ok(DMatrix::from_row_slice(rows, keep.len(), &values))
}
