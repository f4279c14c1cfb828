//! Aggregation into metric rows and the on-disk report.

use std::fmt::Display;
use std::io::Write;
use std::path::Path;

use super::metrics::{edge_fraction, mean, sample_sd};
use super::{BenchConfig, BenchReport, Cell, InstanceRecord};
use crate::error::Result;

const NA: &str = "NA";

/// One line of `metrics.csv`. `noise` and `edge_xy` read `all` on pooled
/// rows. Undefined statistics are `None` and written as `NA`.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricRow {
    pub nodes: usize,
    pub edges: usize,
    pub latents: usize,
    pub cyclic: bool,
    pub form: String,
    pub noise: String,
    pub edge_xy: String,
    /// `None` for oracle runs (written as `inf`).
    pub n_samples: Option<usize>,
    pub instances: usize,
    pub failed: usize,
    pub decided: usize,
    pub re_count: usize,
    pub re_mean: Option<f64>,
    pub re_sd: Option<f64>,
    pub precision_count: usize,
    pub precision_mean: Option<f64>,
    pub precision_sd: Option<f64>,
    pub ef: Option<f64>,
    pub empty_fraction: Option<f64>,
    pub decided_fraction: Option<f64>,
    pub mean_tests: Option<f64>,
    pub wall_time: Option<f64>,
}

const HEADER: [&str; 23] = [
    "nodes",
    "edges",
    "latents",
    "cyclic",
    "form",
    "noise",
    "edge_xy",
    "n_samples",
    "instances",
    "failed",
    "decided",
    "re_count",
    "re_mean",
    "re_sd",
    "precision_count",
    "precision_mean",
    "precision_sd",
    "ef",
    "empty_fraction",
    "decided_fraction",
    "mean_tests",
    "wall_time",
    "setting",
];

impl MetricRow {
    /// Short label used in the plot files, e.g. `8n-cyclic-linear`.
    pub fn setting(&self) -> String {
        let shape = if self.cyclic { "cyclic" } else { "acyclic" };
        let mut s = format!("{}n-{shape}-{}", self.nodes, self.form);
        if self.noise != "all" {
            s.push('-');
            s.push_str(&self.noise);
        }
        if self.edge_xy != "all" {
            s.push_str(if self.edge_xy == "true" { "-edge" } else { "-noedge" });
        }
        s
    }

    fn record(&self) -> Vec<String> {
        fn opt<T: Display>(v: Option<T>) -> String {
            v.map_or_else(|| NA.to_string(), |v| v.to_string())
        }
        vec![
            self.nodes.to_string(),
            self.edges.to_string(),
            self.latents.to_string(),
            self.cyclic.to_string(),
            self.form.clone(),
            self.noise.clone(),
            self.edge_xy.clone(),
            n_label(self.n_samples),
            self.instances.to_string(),
            self.failed.to_string(),
            self.decided.to_string(),
            self.re_count.to_string(),
            opt(self.re_mean),
            opt(self.re_sd),
            self.precision_count.to_string(),
            opt(self.precision_mean),
            opt(self.precision_sd),
            opt(self.ef),
            opt(self.empty_fraction),
            opt(self.decided_fraction),
            opt(self.mean_tests),
            opt(self.wall_time),
            self.setting(),
        ]
    }
}

fn n_label(n: Option<usize>) -> String {
    n.map_or_else(|| "inf".to_string(), |n| n.to_string())
}

/// One point of a plot series.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotPoint {
    pub n_samples: Option<usize>,
    pub setting: String,
    pub mean: Option<f64>,
    pub sd: Option<f64>,
}

struct Summary {
    row: MetricRow,
    ef_values: Vec<f64>,
    empty_values: Vec<f64>,
    re_values: Vec<f64>,
    precision_values: Vec<f64>,
}

fn summarize(template: &Cell, noise: String, edge_xy: String, n: Option<usize>, recs: &[&InstanceRecord]) -> Summary {
    let ok: Vec<&&InstanceRecord> = recs.iter().filter(|r| r.error.is_none()).collect();
    let decisions: Vec<(bool, bool)> =
        ok.iter().filter_map(|r| r.decided_edge.map(|d| (r.true_edge, d))).collect();
    let re_values: Vec<f64> = ok.iter().filter_map(|r| r.relative_error).collect();
    let precision_values: Vec<f64> =
        ok.iter().filter_map(|r| r.set_valid.map(|v| f64::from(u8::from(v)))).collect();
    let ef_values: Vec<f64> = decisions.iter().map(|(t, d)| f64::from(u8::from(t == d))).collect();
    let empty_values: Vec<f64> =
        ok.iter().map(|r| f64::from(u8::from(r.decided_edge.is_none()))).collect();
    let tests: Vec<f64> = ok.iter().filter_map(|r| r.tests_used.map(|t| t as f64)).collect();
    let times: Vec<f64> = recs.iter().filter_map(|r| r.wall_time).collect();
    let empty = mean(&empty_values);
    let row = MetricRow {
        nodes: template.size.nodes,
        edges: template.size.edges,
        latents: template.size.latents,
        cyclic: template.cyclic,
        form: template.form.name().into(),
        noise,
        edge_xy,
        n_samples: n,
        instances: recs.len(),
        failed: recs.len() - ok.len(),
        decided: decisions.len(),
        re_count: re_values.len(),
        re_mean: mean(&re_values),
        re_sd: sample_sd(&re_values),
        precision_count: precision_values.len(),
        precision_mean: mean(&precision_values),
        precision_sd: sample_sd(&precision_values),
        ef: edge_fraction(&decisions),
        empty_fraction: empty,
        decided_fraction: empty.map(|e| 1.0 - e),
        mean_tests: mean(&tests),
        wall_time: mean(&times),
    };
    Summary { row, ef_values, empty_values, re_values, precision_values }
}

fn point(row: &MetricRow, values: &[f64]) -> PlotPoint {
    PlotPoint { n_samples: row.n_samples, setting: row.setting(), mean: mean(values), sd: sample_sd(values) }
}

/// Per-cell rows followed by rows pooled over noise modes and edge
/// conditions; plot series come from the pooled rows.
pub(super) fn aggregate(
    cfg: &BenchConfig,
    cells: &[Cell],
    points: &[Option<usize>],
    instances: &[InstanceRecord],
) -> (Vec<MetricRow>, Vec<(&'static str, Vec<PlotPoint>)>) {
    let per_graph = points.len();
    let at = |c: usize, rep: usize, p: usize| &instances[(c * cfg.reps + rep) * per_graph + p];
    let mut rows = Vec::new();
    for cell in cells {
        for (pi, &n) in points.iter().enumerate() {
            let recs: Vec<&InstanceRecord> = (0..cfg.reps).map(|r| at(cell.index, r, pi)).collect();
            let s = summarize(cell, cell.noise.name().into(), cell.edge_xy.to_string(), n, &recs);
            rows.push(s.row);
        }
    }
    let mut plots: Vec<(&'static str, Vec<PlotPoint>)> =
        vec![("re", vec![]), ("precision", vec![]), ("ef", vec![]), ("empty", vec![])];
    let mut seen: Vec<(usize, bool, crate::sim::Form)> = Vec::new();
    for cell in cells {
        let key = (cell.size.nodes, cell.cyclic, cell.form);
        if seen.contains(&key) {
            continue;
        }
        seen.push(key);
        let group: Vec<&Cell> = cells
            .iter()
            .filter(|c| (c.size.nodes, c.cyclic, c.form) == key && c.size == cell.size)
            .collect();
        for (pi, &n) in points.iter().enumerate() {
            let recs: Vec<&InstanceRecord> = group
                .iter()
                .flat_map(|c| (0..cfg.reps).map(move |r| (c.index, r)))
                .map(|(c, r)| at(c, r, pi))
                .collect();
            let s = summarize(cell, "all".into(), "all".into(), n, &recs);
            plots[0].1.push(point(&s.row, &s.re_values));
            plots[1].1.push(point(&s.row, &s.precision_values));
            plots[2].1.push(point(&s.row, &s.ef_values));
            plots[3].1.push(point(&s.row, &s.empty_values));
            rows.push(s.row);
        }
    }
    (rows, plots)
}

pub fn metrics_csv(rows: &[MetricRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(HEADER)?;
    for row in rows {
        w.write_record(row.record())?;
    }
    w.flush()?;
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

fn plot_csv(points: &[PlotPoint]) -> Result<Vec<u8>> {
    let opt = |v: Option<f64>| v.map_or_else(|| NA.to_string(), |v| v.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n_samples", "setting", "mean", "sd"])?;
    for p in points {
        w.write_record([n_label(p.n_samples), p.setting.clone(), opt(p.mean), opt(p.sd)])?;
    }
    w.flush()?;
    Ok(w.into_inner().map_err(|e| e.into_error())?)
}

/// Writes `metrics.csv`, `instances.jsonl` and `plot_<metric>.csv` into
/// `dir`, creating it if needed.
pub fn write_report(report: &BenchReport, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("metrics.csv"), metrics_csv(&report.rows)?)?;
    let mut jsonl = Vec::new();
    for rec in &report.instances {
        serde_json::to_writer(&mut jsonl, rec)?;
        jsonl.write_all(b"\n")?;
    }
    std::fs::write(dir.join("instances.jsonl"), jsonl)?;
    for (name, points) in &report.plots {
        std::fs::write(dir.join(format!("plot_{name}.csv")), plot_csv(points)?)?;
    }
    Ok(())
}
