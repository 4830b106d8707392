//! CSV tables, manifests and plot descriptions.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rabi_sense::dynamics::fmt_sig;

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

/// A table with a fixed header; missing values become empty cells.
#[derive(Debug, Clone)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            // -0 and 0 print alike
            Cell::Num(v) => fmt_sig(if *v == 0.0 { 0.0 } else { *v }),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl Table {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Table {
            header: header.into_iter().map(Into::into).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner()
            .map_err(|e| CliError::Check(format!("csv buffer: {e}")))
    }
}

/// One plotted series: `y` column against the plot's `x` column.
#[derive(Debug, Clone)]
pub struct PlotSeries {
    pub column: String,
    pub label: String,
}

/// Renderer-neutral description of how to draw a CSV.
#[derive(Debug, Clone)]
pub struct PlotSpec {
    pub title: String,
    pub x_column: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub series: Vec<PlotSeries>,
}

impl PlotSpec {
    pub fn new(title: &str, x_column: &str, x_label: &str, y_label: &str) -> Self {
        PlotSpec {
            title: title.into(),
            x_column: x_column.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: false,
            series: Vec::new(),
        }
    }

    pub fn series(mut self, column: &str, label: &str) -> Self {
        self.series.push(PlotSeries {
            column: column.into(),
            label: label.into(),
        });
        self
    }

    fn render(&self, csv_name: &str) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "data = {csv_name}");
        let _ = writeln!(s, "title = {}", self.title);
        let _ = writeln!(s, "x.column = {}", self.x_column);
        let _ = writeln!(s, "x.label = {}", self.x_label);
        let _ = writeln!(s, "x.scale = {}", if self.log_x { "log" } else { "linear" });
        let _ = writeln!(s, "y.label = {}", self.y_label);
        for (i, ser) in self.series.iter().enumerate() {
            let _ = writeln!(s, "series.{i}.column = {}", ser.column);
            let _ = writeln!(s, "series.{i}.label = {}", ser.label);
        }
        s
    }
}

/// Files produced by one run.
#[derive(Debug, Clone)]
pub struct Written {
    pub csv: PathBuf,
    pub manifest: PathBuf,
    pub plot: Option<PathBuf>,
}

pub fn timestamp() -> String {
    chrono::Local::now().format("%Y%m%dT%H%M%S%.3f").to_string()
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

/// Writes `<stem>_<timestamp>.csv`, `.manifest` and (if given) `.plot.txt`.
pub fn write_run(
    dir: &Path,
    stem: &str,
    table: &Table,
    config: &ExperimentConfig,
    plot: Option<&PlotSpec>,
) -> Result<Written> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let ts = timestamp();
    let base = format!("{stem}_{ts}");
    let csv = dir.join(format!("{base}.csv"));
    let manifest = dir.join(format!("{base}.manifest"));
    write(&csv, &table.to_csv()?)?;
    let mut text = format!("# resolved configuration, SI units; written {ts}\n");
    text.push_str(&config.to_text());
    write(&manifest, text.as_bytes())?;
    let plot = match plot {
        Some(spec) => {
            let path = dir.join(format!("{base}.plot.txt"));
            write(&path, spec.render(&format!("{base}.csv")).as_bytes())?;
            Some(path)
        }
        None => None,
    };
    Ok(Written { csv, manifest, plot })
}
