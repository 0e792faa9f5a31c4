//! Plot-ready tables derived from the sweep and race outputs; no graphics.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use crate::error::BenchError;
use crate::output::{fmt_f64, RACE_FILE, SUMMARY_FILE};

pub const PLOT_DIR: &str = "plot";
pub const PLOT_COLUMNS_SWEEP: [&str; 3] = ["log2_d", "method", "value"];
pub const PLOT_COLUMNS_RACE: [&str; 3] = ["log2_d", "solver", "mean_secs"];

/// A CSV table addressed by column name.
struct Table {
    index: HashMap<String, usize>,
    rows: Vec<csv::StringRecord>,
    path: PathBuf,
}

impl Table {
    fn read(path: &Path) -> Result<Self, BenchError> {
        let bad = |e: csv::Error| BenchError::Input(format!("{}: {e}", path.display()));
        let mut r = csv::Reader::from_path(path).map_err(bad)?;
        let index = r.headers().map_err(bad)?.iter().enumerate().map(|(i, h)| (h.to_string(), i)).collect();
        let rows = r.records().collect::<Result<Vec<_>, _>>().map_err(bad)?;
        Ok(Self { index, rows, path: path.to_path_buf() })
    }

    fn get<'a>(&self, row: &'a csv::StringRecord, column: &str) -> Result<&'a str, BenchError> {
        let missing = || BenchError::Input(format!("{}: no column {column}", self.path.display()));
        let i = *self.index.get(column).ok_or_else(missing)?;
        row.get(i).ok_or_else(missing)
    }

    fn number(&self, row: &csv::StringRecord, column: &str) -> Result<f64, BenchError> {
        let s = self.get(row, column)?;
        s.parse()
            .map_err(|_| BenchError::Input(format!("{}: column {column} holds {s:?}, not a number", self.path.display())))
    }
}

fn write(path: &Path, columns: [&str; 3], rows: &[[String; 3]]) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(columns)?;
    for r in rows {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads `summary.csv` and/or `race.csv` from `dir` and writes one table per plot
/// panel into `dir/plot`. At least one of the inputs must exist.
pub fn emit_plot_data(dir: &Path) -> Result<Vec<PathBuf>, BenchError> {
    let summary = dir.join(SUMMARY_FILE);
    let race = dir.join(RACE_FILE);
    if !summary.exists() && !race.exists() {
        return Err(BenchError::Input(format!("neither {SUMMARY_FILE} nor {RACE_FILE} found in {}", dir.display())));
    }
    let out = dir.join(PLOT_DIR);
    std::fs::create_dir_all(&out)?;
    let mut written = Vec::new();

    if summary.exists() {
        let t = Table::read(&summary)?;
        for (panel, metric) in [("gap", "rel_gap"), ("residual", "rel_residual")] {
            for family in ["minibatch", "vr"] {
                let mut rows = Vec::new();
                for r in &t.rows {
                    if t.get(r, "family")? == family {
                        rows.push([
                            fmt_f64(t.number(r, "log2_d")?),
                            t.get(r, "method")?.to_string(),
                            fmt_f64(t.number(r, metric)?),
                        ]);
                    }
                }
                let path = out.join(format!("{panel}_{family}.csv"));
                write(&path, PLOT_COLUMNS_SWEEP, &rows)?;
                written.push(path);
            }
        }
    }

    if race.exists() {
        let t = Table::read(&race)?;
        for family in ["box", "l1box"] {
            let mut rows = Vec::new();
            for r in &t.rows {
                if t.get(r, "family")? == family {
                    let d = t.number(r, "d")?;
                    rows.push([fmt_f64(d.log2()), t.get(r, "solver")?.to_string(), fmt_f64(t.number(r, "mean_secs")?)]);
                }
            }
            let path = out.join(format!("race_{family}.csv"));
            write(&path, PLOT_COLUMNS_RACE, &rows)?;
            written.push(path);
        }
    }
    Ok(written)
}
