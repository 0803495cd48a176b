use std::fs;
use std::path::Path;

use super::{FitResult, LabError, RelaxPoint, RelaxationScan, Result, ThresholdResult};

pub const THRESHOLD_HEADER: [&str; 7] = ["algorithm", "n", "error_type", "threshold", "target_S", "shots", "seed"];
pub const RELAX_HEADER: [&str; 5] = ["algorithm", "n", "T1_us", "T2_us", "selectivity"];
pub const SAMPLES_HEADER: [&str; 5] = ["algorithm", "n", "error_type", "parameter", "selectivity"];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> LabError + '_ {
    move |source| LabError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path, e: csv::Error) -> LabError {
    LabError::Io {
        path: path.display().to_string(),
        source: e.into(),
    }
}

fn render(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

pub fn threshold_csv(results: &[ThresholdResult]) -> String {
    render(
        &THRESHOLD_HEADER,
        results.iter().map(|r| {
            vec![
                r.algorithm.clone(),
                r.n.to_string(),
                r.error_type.clone(),
                r.threshold.to_string(),
                r.target_s.to_string(),
                r.shots.to_string(),
                r.seed.to_string(),
            ]
        }),
    )
}

pub fn samples_csv(results: &[ThresholdResult]) -> String {
    render(
        &SAMPLES_HEADER,
        results.iter().flat_map(|r| {
            r.samples.iter().map(move |(p, s)| {
                vec![r.algorithm.clone(), r.n.to_string(), r.error_type.clone(), p.to_string(), s.to_string()]
            })
        }),
    )
}

pub fn relax_csv(algorithm: &str, n: usize, points: &[RelaxPoint]) -> String {
    render(
        &RELAX_HEADER,
        points.iter().map(|p| {
            vec![
                algorithm.to_string(),
                n.to_string(),
                p.t1_us.to_string(),
                p.t2_us.to_string(),
                p.s.to_string(),
            ]
        }),
    )
}

/// Qualifying points of a scan as CSV.
pub fn scan_csv(scan: &RelaxationScan) -> String {
    relax_csv(&scan.algorithm, scan.n, &scan.qualifying())
}

fn write(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
    }
    fs::write(path, text).map_err(io_err(path))
}

pub fn write_threshold_csv(results: &[ThresholdResult], path: &Path) -> Result<()> {
    if results.is_empty() {
        return Err(LabError::Invalid("no threshold results to export".into()));
    }
    write(path, &threshold_csv(results))
}

pub fn write_samples_csv(results: &[ThresholdResult], path: &Path) -> Result<()> {
    write(path, &samples_csv(results))
}

pub fn write_relax_csv(scan: &RelaxationScan, path: &Path) -> Result<()> {
    write(path, &scan_csv(scan))
}

pub fn write_fit_json(fit: &FitResult, path: &Path) -> Result<()> {
    write(path, &(fit.to_json() + "\n"))
}

/// Reads a threshold CSV back.
pub fn read_threshold_csv(path: &Path) -> Result<Vec<ThresholdResult>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    if headers.iter().ne(THRESHOLD_HEADER) {
        return Err(LabError::Invalid(format!("{}: unexpected header", path.display())));
    }
    let bad = |line: usize, what: &str| LabError::Invalid(format!("{}:{line}: bad {what}", path.display()));
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = i + 2;
        out.push(ThresholdResult {
            algorithm: rec[0].to_string(),
            n: rec[1].parse().map_err(|_| bad(line, "n"))?,
            error_type: rec[2].to_string(),
            samples: Vec::new(),
            threshold: rec[3].parse().map_err(|_| bad(line, "threshold"))?,
            target_s: rec[4].parse().map_err(|_| bad(line, "target_S"))?,
            shots: rec[5].parse().map_err(|_| bad(line, "shots"))?,
            seed: rec[6].parse().map_err(|_| bad(line, "seed"))?,
        });
    }
    Ok(out)
}
