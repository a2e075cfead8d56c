//! Aggregation of per-run trace CSVs into median / interquartile tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::Scheme;
use crate::error::CliError;

/// Column layout of every trace CSV.
pub const HEADER: [&str; 11] = [
    "scheme",
    "seed",
    "outer_k",
    "inner_k",
    "calls",
    "natural_residual",
    "gap",
    "yosida_sq",
    "saddle_gap",
    "dist_ref_sq",
    "truncated",
];

/// Final state of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunFinal {
    pub row: String,
    pub scheme: String,
    pub seed: u64,
    pub calls: u64,
    pub metric: &'static str,
    pub value: f64,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellSummary {
    pub row: String,
    pub scheme: String,
    pub metric: &'static str,
    pub runs: usize,
    pub truncated_runs: usize,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub median_calls: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub rows: Vec<String>,
    pub schemes: Vec<String>,
    pub cells: Vec<CellSummary>,
}

fn err(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::runtime(format!("{}: {msg}", path.display()))
}

/// Reads the last row of a trace CSV after checking the header.
pub fn read_final(path: &Path) -> Result<RunFinal, CliError> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| err(path, e))?;
    let header = reader.headers().map_err(|e| err(path, e))?.clone();
    for (i, want) in HEADER.iter().enumerate() {
        match header.get(i) {
            Some(got) if got == *want => {}
            Some(got) => return Err(err(path, format!("column {} is `{got}`, expected `{want}`", i + 1))),
            None => return Err(err(path, format!("missing column `{want}`"))),
        }
    }
    if header.len() > HEADER.len() {
        return Err(err(path, format!("unexpected extra column `{}`", &header[HEADER.len()])));
    }
    let mut last = None;
    for record in reader.records() {
        last = Some(record.map_err(|e| err(path, e))?);
    }
    let rec = last.ok_or_else(|| err(path, "no data rows"))?;
    let num = |col: usize| -> Result<Option<f64>, CliError> {
        let s = &rec[col];
        if s.is_empty() {
            return Ok(None);
        }
        s.parse()
            .map(Some)
            .map_err(|_| err(path, format!("column `{}`: bad number `{s}`", HEADER[col])))
    };
    let int = |col: usize| -> Result<u64, CliError> {
        rec[col]
            .parse()
            .map_err(|_| err(path, format!("column `{}`: bad integer `{}`", HEADER[col], &rec[col])))
    };
    let (metric, value) = if let Some(v) = num(8)? {
        ("saddle_gap", v)
    } else if let Some(v) = num(9)? {
        ("dist_ref_sq", v)
    } else {
        let v = num(5)?.ok_or_else(|| err(path, "column `natural_residual` is empty"))?;
        ("natural_residual", v)
    };
    let truncated = match &rec[10] {
        "true" => true,
        "false" => false,
        other => return Err(err(path, format!("column `truncated`: bad flag `{other}`"))),
    };
    let row = path
        .parent()
        .and_then(Path::file_name)
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(RunFinal {
        row,
        scheme: rec[0].to_string(),
        seed: int(1)?,
        calls: int(4)?,
        metric,
        value,
        truncated,
    })
}

/// Quantile with linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Rows named `L<number>...` sort by that number.
fn row_key(label: &str) -> (f64, String) {
    let number = label
        .strip_prefix('L')
        .and_then(|rest| rest.split('_').next())
        .and_then(|s| s.parse().ok())
        .unwrap_or(f64::INFINITY);
    (number, label.to_string())
}

fn scheme_key(name: &str) -> (usize, String) {
    let rank = match name.parse::<Scheme>() {
        Ok(s) => s as usize,
        Err(_) => usize::MAX,
    };
    (rank, name.to_string())
}

pub fn summarize(paths: &[PathBuf]) -> Result<Summary, CliError> {
    let mut groups: BTreeMap<(String, String), Vec<RunFinal>> = BTreeMap::new();
    for path in paths {
        let run = read_final(path)?;
        let key = (run.row.clone(), run.scheme.clone());
        if let Some(first) = groups.get(&key).and_then(|g| g.first()) {
            if first.metric != run.metric {
                return Err(err(
                    path,
                    format!("final metric `{}` differs from `{}` in the same cell", run.metric, first.metric),
                ));
            }
        }
        groups.entry(key).or_default().push(run);
    }
    let mut rows: Vec<String> = groups.keys().map(|(r, _)| r.clone()).collect();
    rows.sort_by(|a, b| row_key(a).partial_cmp(&row_key(b)).unwrap());
    rows.dedup();
    let mut schemes: Vec<String> = groups.keys().map(|(_, s)| s.clone()).collect();
    schemes.sort_by_key(|s| scheme_key(s));
    schemes.dedup();

    let mut cells = Vec::new();
    for row in &rows {
        for scheme in &schemes {
            let Some(runs) = groups.get(&(row.clone(), scheme.clone())) else {
                continue;
            };
            let mut values: Vec<f64> = runs.iter().map(|r| r.value).collect();
            values.sort_by(f64::total_cmp);
            let mut calls: Vec<f64> = runs.iter().map(|r| r.calls as f64).collect();
            calls.sort_by(f64::total_cmp);
            cells.push(CellSummary {
                row: row.clone(),
                scheme: scheme.clone(),
                metric: runs[0].metric,
                runs: runs.len(),
                truncated_runs: runs.iter().filter(|r| r.truncated).count(),
                median: quantile(&values, 0.5),
                q1: quantile(&values, 0.25),
                q3: quantile(&values, 0.75),
                median_calls: quantile(&calls, 0.5),
            });
        }
    }
    Ok(Summary { rows, schemes, cells })
}

/// Every `<dir>/<row>/*.csv` trace.
pub fn trace_files(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let read = |d: &Path| fs::read_dir(d).map_err(|e| err(d, e));
    let mut paths = Vec::new();
    for entry in read(dir)? {
        let sub = entry.map_err(|e| err(dir, e))?.path();
        if !sub.is_dir() {
            continue;
        }
        for file in read(&sub)? {
            let file = file.map_err(|e| err(&sub, e))?.path();
            if file.extension().is_some_and(|x| x == "csv") {
                paths.push(file);
            }
        }
    }
    paths.sort();
    if paths.is_empty() {
        return Err(err(dir, "no trace CSVs found"));
    }
    Ok(paths)
}

pub fn summarize_dir(dir: &Path) -> Result<Summary, CliError> {
    summarize(&trace_files(dir)?)
}

impl Summary {
    pub fn cell(&self, row: &str, scheme: &str) -> Option<&CellSummary> {
        self.cells.iter().find(|c| c.row == row && c.scheme == scheme)
    }

    /// Aligned plain-text table: one line per row, one column per scheme.
    pub fn table(&self) -> String {
        let metrics: Vec<&str> = {
            let mut m: Vec<&str> = self.cells.iter().map(|c| c.metric).collect();
            m.sort();
            m.dedup();
            m
        };
        let mut grid = vec![std::iter::once("row".to_string()).chain(self.schemes.iter().cloned()).collect::<Vec<_>>()];
        for row in &self.rows {
            let mut line = vec![row.clone()];
            for scheme in &self.schemes {
                line.push(match self.cell(row, scheme) {
                    None => "-".into(),
                    Some(c) => format!(
                        "{:.3e} [{:.2e}, {:.2e}]{}",
                        c.median,
                        c.q1,
                        c.q3,
                        if c.truncated_runs > 0 { "*" } else { "" }
                    ),
                });
            }
            grid.push(line);
        }
        let widths: Vec<usize> = (0..grid[0].len())
            .map(|j| grid.iter().map(|l| l[j].chars().count()).max().unwrap_or(0))
            .collect();
        let mut out = String::new();
        writeln!(out, "final {}: median [q1, q3] over seeds", metrics.join(" / ")).unwrap();
        for line in &grid {
            let cells: Vec<String> = line
                .iter()
                .zip(&widths)
                .map(|(s, w)| format!("{s:<w$}"))
                .collect();
            writeln!(out, "{}", cells.join("  ").trim_end()).unwrap();
        }
        if self.cells.iter().any(|c| c.truncated_runs > 0) {
            writeln!(out, "* some runs stopped on budget exhaustion").unwrap();
        }
        out
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| CliError::runtime(format!("csv: {e}"));
        w.write_record([
            "row",
            "scheme",
            "metric",
            "runs",
            "truncated_runs",
            "median",
            "q1",
            "q3",
            "median_calls",
        ])
        .map_err(io)?;
        for c in &self.cells {
            w.write_record([
                c.row.clone(),
                c.scheme.clone(),
                c.metric.to_string(),
                c.runs.to_string(),
                c.truncated_runs.to_string(),
                format!("{:e}", c.median),
                format!("{:e}", c.q1),
                format!("{:e}", c.q3),
                c.median_calls.to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::runtime(format!("csv: {e}")))?;
        String::from_utf8(bytes).map_err(|e| CliError::runtime(e.to_string()))
    }
}

/// Writes `summary.csv` and `summary.txt` into `dir`.
pub fn write_summary(dir: &Path, summary: &Summary) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| err(dir, e))?;
    let csv_path = dir.join("summary.csv");
    fs::write(&csv_path, summary.to_csv()?).map_err(|e| err(&csv_path, e))?;
    let txt_path = dir.join("summary.txt");
    fs::write(&txt_path, summary.table()).map_err(|e| err(&txt_path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let v = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.5);
        assert_eq!(quantile(&v, 0.25), 1.75);
        assert_eq!(quantile(&[5.0], 0.75), 5.0);
    }

    #[test]
    fn rows_sort_by_lipschitz_value() {
        let mut rows = vec!["L705_lambda40", "L7.05_lambda3500", "L70.5_lambda1200", "L10"];
        rows.sort_by(|a, b| row_key(a).partial_cmp(&row_key(b)).unwrap());
        assert_eq!(rows, ["L7.05_lambda3500", "L10", "L70.5_lambda1200", "L705_lambda40"]);
    }

    #[test]
    fn schemes_follow_canonical_order() {
        let mut s = vec!["vs_ave", "extragradient", "zzz", "ppawss"];
        s.sort_by_key(|n| scheme_key(n));
        assert_eq!(s, ["ppawss", "extragradient", "vs_ave", "zzz"]);
    }
}
