//! Result tables and their CSV / JSON-lines serialization.
//!
//! CSV files start with the run configuration as `# `-prefixed comment lines,
//! followed by a header row and one row per point. Numbers carry nine
//! significant digits.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::{Map, Value};

use crate::analytic::DurationSweepPoint;
use crate::config::OutputFormat;
use crate::error::{Error, Result};
use crate::integrator::TrajectoryPoint;
use crate::sweep::{DurationSample, LineshapePoint, LzRow, ParityPoint, RwaRow};

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ResultTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }
}

impl From<&[LineshapePoint]> for ResultTable {
    fn from(points: &[LineshapePoint]) -> Self {
        let mut t = Self::new(&["b_tesla", "p_down_true", "p_down_measured"]);
        for p in points {
            t.push(vec![p.b, p.p_down_true, p.p_down_measured]);
        }
        t
    }
}

impl From<&[DurationSample]> for ResultTable {
    fn from(points: &[DurationSample]) -> Self {
        let mut t = Self::new(&["burst_duration_s", "p_down_true", "p_down_measured"]);
        for p in points {
            t.push(vec![p.burst_duration, p.p_down_true, p.p_down_measured]);
        }
        t
    }
}

impl From<&[DurationSweepPoint]> for ResultTable {
    fn from(points: &[DurationSweepPoint]) -> Self {
        let mut t = Self::new(&["burst_duration_s", "p_down"]);
        for p in points {
            t.push(vec![p.burst_duration, p.p_down]);
        }
        t
    }
}

impl From<&[ParityPoint]> for ResultTable {
    fn from(points: &[ParityPoint]) -> Self {
        let mut t = Self::new(&["f_center_hz", "resonances_covered", "p_down"]);
        for p in points {
            t.push(vec![p.f_center, p.resonances_covered as f64, p.p_down]);
        }
        t
    }
}

impl From<&[LzRow]> for ResultTable {
    fn from(rows: &[LzRow]) -> Self {
        let mut t = Self::new(&[
            "ratio",
            "rabi_hz",
            "rate_hz_per_s",
            "p_analytic",
            "p_numeric",
        ]);
        for r in rows {
            t.push(vec![r.ratio, r.rabi, r.rate, r.p_analytic, r.p_numeric]);
        }
        t
    }
}

impl From<&[RwaRow]> for ResultTable {
    fn from(rows: &[RwaRow]) -> Self {
        let mut t = Self::new(&["f_larmor_hz", "p_rotating", "p_lab", "abs_difference"]);
        for r in rows {
            t.push(vec![r.f_larmor, r.p_rotating, r.p_lab, r.difference()]);
        }
        t
    }
}

impl From<&[TrajectoryPoint]> for ResultTable {
    fn from(points: &[TrajectoryPoint]) -> Self {
        let mut t = Self::new(&["t_s", "x", "y", "z", "p_down"]);
        for p in points {
            t.push(vec![p.t, p.bloch[0], p.bloch[1], p.bloch[2], p.p_down]);
        }
        t
    }
}

/// Nine significant digits.
pub fn format_number(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.8e}")
    } else if v.is_nan() {
        "nan".to_string()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}

/// Serializes `table`, preceded by `config_echo` as a comment header in CSV.
pub fn render(table: &ResultTable, config_echo: &str, format: OutputFormat) -> String {
    let mut out = String::new();
    match format {
        OutputFormat::Csv => {
            for line in config_echo.lines() {
                if line.is_empty() {
                    out.push_str("#\n");
                } else {
                    let _ = writeln!(out, "# {line}");
                }
            }
            let _ = writeln!(out, "{}", table.columns.join(","));
            for row in &table.rows {
                let cells: Vec<String> = row.iter().map(|&v| format_number(v)).collect();
                let _ = writeln!(out, "{}", cells.join(","));
            }
        }
        OutputFormat::JsonLines => {
            for row in &table.rows {
                let object: Map<String, Value> = table
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, &v)| {
                        let rounded: f64 = format_number(v).parse().unwrap_or(v);
                        (c.clone(), Value::from(rounded))
                    })
                    .collect();
                let _ = writeln!(out, "{}", Value::Object(object));
            }
        }
    }
    out
}

pub fn write_results(
    table: &ResultTable,
    config_echo: &str,
    path: &Path,
    format: OutputFormat,
) -> Result<()> {
    fs::write(path, render(table, config_echo, format)).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn malformed(path: &Path, line: usize, what: impl Into<String>) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            format!("line {line}: {}", what.into()),
        ),
    }
}

fn parse_cell(cell: &str) -> Option<f64> {
    match cell.trim() {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        s => s.parse().ok(),
    }
}

/// Reads a file written by [`write_results`]. Returns the config echo
/// (empty for JSON-lines) and the table. An empty JSON-lines file gives a
/// table without columns.
pub fn read_results(path: &Path, format: OutputFormat) -> Result<(String, ResultTable)> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    match format {
        OutputFormat::Csv => {
            let mut echo = String::new();
            let mut table: Option<ResultTable> = None;
            for (idx, line) in text.lines().enumerate() {
                if let Some(comment) = line.strip_prefix('#') {
                    echo.push_str(comment.strip_prefix(' ').unwrap_or(comment));
                    echo.push('\n');
                    continue;
                }
                match &mut table {
                    None => {
                        table = Some(ResultTable {
                            columns: line.split(',').map(str::to_string).collect(),
                            rows: Vec::new(),
                        })
                    }
                    Some(t) => {
                        let row = line
                            .split(',')
                            .map(parse_cell)
                            .collect::<Option<Vec<f64>>>()
                            .ok_or_else(|| malformed(path, idx + 1, "unparseable number"))?;
                        if row.len() != t.columns.len() {
                            return Err(malformed(path, idx + 1, "wrong number of fields"));
                        }
                        t.rows.push(row);
                    }
                }
            }
            let table = table.ok_or_else(|| malformed(path, 0, "missing header row"))?;
            Ok((echo, table))
        }
        OutputFormat::JsonLines => {
            let mut table = ResultTable {
                columns: Vec::new(),
                rows: Vec::new(),
            };
            for (idx, line) in text
                .lines()
                .enumerate()
                .filter(|(_, l)| !l.trim().is_empty())
            {
                let object: Map<String, Value> = serde_json::from_str(line)
                    .map_err(|e| malformed(path, idx + 1, e.to_string()))?;
                if table.columns.is_empty() {
                    table.columns = object.keys().cloned().collect();
                }
                let row = table
                    .columns
                    .iter()
                    .map(|c| object.get(c).map(|v| v.as_f64().unwrap_or(f64::NAN)))
                    .collect::<Option<Vec<f64>>>()
                    .ok_or_else(|| malformed(path, idx + 1, "keys differ from the first record"))?;
                table.rows.push(row);
            }
            Ok((String::new(), table))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> ResultTable {
        let pts = [
            LineshapePoint {
                b: 5.585_123_456_789,
                p_down_true: 0.957_123_456_7,
                p_down_measured: 0.1,
            },
            LineshapePoint {
                b: 5.585_373_456_789,
                p_down_true: 1.0 / 3.0,
                p_down_measured: 0.0,
            },
        ];
        ResultTable::from(&pts[..])
    }

    #[test]
    fn csv_layout() {
        let text = render(
            &sample(),
            "experiment = lineshape\n\n[sweep]\n",
            OutputFormat::Csv,
        );
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# experiment = lineshape");
        assert_eq!(lines[1], "#");
        assert_eq!(lines[3], "b_tesla,p_down_true,p_down_measured");
        assert_eq!(lines[4], "5.58512346e0,9.57123457e-1,1.00000000e-1");
        assert_eq!(lines.len(), 6);
    }

    #[test]
    fn empty_table_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        let empty = ResultTable::from(&[] as &[LineshapePoint]);
        write_results(&empty, "seed = 1\n", &path, OutputFormat::Csv).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        assert_eq!(text, "# seed = 1\nb_tesla,p_down_true,p_down_measured\n");
        let (echo, back) = read_results(&path, OutputFormat::Csv).unwrap();
        assert_eq!(echo, "seed = 1\n");
        assert_eq!(back, empty);
    }

    #[test]
    fn json_lines_keys_match_header() {
        let text = render(&sample(), "ignored", OutputFormat::JsonLines);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        let first: Map<String, Value> = serde_json::from_str(lines[0]).unwrap();
        let keys: Vec<&String> = first.keys().collect();
        assert_eq!(keys, ["b_tesla", "p_down_true", "p_down_measured"]);
    }

    #[test]
    fn round_trip_both_formats() {
        let dir = tempfile::tempdir().unwrap();
        let table = sample();
        for (name, format) in [
            ("r.csv", OutputFormat::Csv),
            ("r.jsonl", OutputFormat::JsonLines),
        ] {
            let path = dir.path().join(name);
            write_results(&table, "seed = 3\n", &path, format).unwrap();
            let (_, back) = read_results(&path, format).unwrap();
            assert_eq!(back.columns, table.columns);
            for (a, b) in table.rows.iter().flatten().zip(back.rows.iter().flatten()) {
                assert!((a - b).abs() <= 5e-9 * a.abs(), "{a} vs {b}");
            }
            let again = dir.path().join(format!("again-{name}"));
            write_results(&back, "seed = 3\n", &again, format).unwrap();
            assert_eq!(fs::read(&path).unwrap(), fs::read(&again).unwrap());
        }
    }

    #[test]
    fn io_errors_carry_the_path() {
        let path = Path::new("/nonexistent-dir/out.csv");
        let err = write_results(&sample(), "", path, OutputFormat::Csv).unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/out.csv"));
    }
}
