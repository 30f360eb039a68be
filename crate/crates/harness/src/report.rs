//! Aggregation of results files and a minimal SVG chart.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{io_err, HarnessError, Result};

/// One results row as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub method: String,
    pub objective: String,
    pub k: String,
    pub topology: String,
    pub partition: String,
    pub t: usize,
    pub point_units: f64,
    pub scalar_units: f64,
    pub cost_ratio: Option<f64>,
}

/// Summary of all repetitions of one sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct Aggregate {
    pub method: String,
    pub objective: String,
    pub k: String,
    pub topology: String,
    pub partition: String,
    pub t: usize,
    pub reps: usize,
    pub ok: usize,
    pub mean_point_units: f64,
    pub mean_scalar_units: f64,
    pub mean_ratio: Option<f64>,
    pub std_ratio: Option<f64>,
}

impl Aggregate {
    fn series(&self) -> String {
        format!("{} {} {} {}", self.method, self.objective, self.topology, self.partition)
    }
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<Record>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path)?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| HarnessError::Parse {
            path: path.to_path_buf(),
            line: 1,
            msg: format!("missing column `{name}`"),
        })
    };
    let idx: Vec<usize> = ["method", "objective", "k", "topology", "partition", "t", "point_units", "scalar_units", "cost_ratio"]
        .iter()
        .map(|c| col(c))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |i: usize| -> Result<f64> {
            rec[i].parse().map_err(|_| HarnessError::Parse {
                path: path.to_path_buf(),
                line,
                msg: format!("`{}` is not a number", &rec[i]),
            })
        };
        out.push(Record {
            method: rec[idx[0]].to_string(),
            objective: rec[idx[1]].to_string(),
            k: rec[idx[2]].to_string(),
            topology: rec[idx[3]].to_string(),
            partition: rec[idx[4]].to_string(),
            t: num(idx[5])? as usize,
            point_units: num(idx[6])?,
            scalar_units: num(idx[7])?,
            cost_ratio: if rec[idx[8]].is_empty() { None } else { Some(num(idx[8])?) },
        });
    }
    Ok(out)
}

/// Groups rows by (method, objective, k, topology, partition, t), in order of
/// first appearance. Failed rows count towards `reps` only.
pub fn aggregate(records: &[Record]) -> Vec<Aggregate> {
    let mut order: Vec<(String, String, String, String, String, usize)> = Vec::new();
    let mut groups: BTreeMap<usize, Vec<&Record>> = BTreeMap::new();
    for r in records {
        let key = (r.method.clone(), r.objective.clone(), r.k.clone(), r.topology.clone(), r.partition.clone(), r.t);
        let at = order.iter().position(|k| *k == key).unwrap_or_else(|| {
            order.push(key);
            order.len() - 1
        });
        groups.entry(at).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|(at, rows)| {
            let (method, objective, k, topology, partition, t) = order[at].clone();
            let ok: Vec<&Record> = rows.iter().copied().filter(|r| r.cost_ratio.is_some()).collect();
            let mean = |f: &dyn Fn(&Record) -> f64| -> f64 {
                if ok.is_empty() {
                    0.0
                } else {
                    ok.iter().map(|r| f(r)).sum::<f64>() / ok.len() as f64
                }
            };
            let ratios: Vec<f64> = ok.iter().filter_map(|r| r.cost_ratio).collect();
            let (mean_ratio, std_ratio) = if ratios.is_empty() {
                (None, None)
            } else {
                let m = ratios.iter().sum::<f64>() / ratios.len() as f64;
                let var = if ratios.len() > 1 {
                    ratios.iter().map(|r| (r - m) * (r - m)).sum::<f64>() / (ratios.len() - 1) as f64
                } else {
                    0.0
                };
                (Some(m), Some(var.sqrt()))
            };
            Aggregate {
                method,
                objective,
                k,
                topology,
                partition,
                t,
                reps: rows.len(),
                ok: ok.len(),
                mean_point_units: mean(&|r| r.point_units),
                mean_scalar_units: mean(&|r| r.scalar_units),
                mean_ratio,
                std_ratio,
            }
        })
        .collect()
}

pub fn write_aggregate(path: impl AsRef<Path>, rows: &[Aggregate]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([
        "method", "objective", "k", "topology", "partition", "t", "reps", "ok", "mean_point_units", "mean_scalar_units",
        "mean_cost_ratio", "std_cost_ratio",
    ])?;
    let opt = |v: Option<f64>| v.map_or(String::new(), |v| v.to_string());
    for a in rows {
        w.write_record([
            a.method.clone(),
            a.objective.clone(),
            a.k.clone(),
            a.topology.clone(),
            a.partition.clone(),
            a.t.to_string(),
            a.reps.to_string(),
            a.ok.to_string(),
            a.mean_point_units.to_string(),
            a.mean_scalar_units.to_string(),
            opt(a.mean_ratio),
            opt(a.std_ratio),
        ])?;
    }
    w.flush().map_err(io_err(path))
}

const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Line chart of mean cost ratio against mean point-units, one line per
/// (method, objective, topology, partition).
pub fn svg_chart(rows: &[Aggregate]) -> String {
    let (w, h, pad) = (640.0, 400.0, 56.0);
    let pts: Vec<(&Aggregate, f64, f64)> =
        rows.iter().filter_map(|a| a.mean_ratio.map(|r| (a, a.mean_point_units, r))).collect();
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"11\">\n"
    );
    let _ = writeln!(svg, "<rect width=\"{w}\" height=\"{h}\" fill=\"white\"/>");
    if pts.is_empty() {
        let _ = writeln!(svg, "<text x=\"{}\" y=\"{}\">no successful rows</text>", pad, h / 2.0);
        svg.push_str("</svg>\n");
        return svg;
    }
    let fold = |f: fn(f64, f64) -> f64, init: f64, sel: fn(&(&Aggregate, f64, f64)) -> f64| pts.iter().map(sel).fold(init, f);
    let (x0, x1) = (fold(f64::min, f64::INFINITY, |p| p.1), fold(f64::max, f64::NEG_INFINITY, |p| p.1));
    let (y0, y1) = (fold(f64::min, f64::INFINITY, |p| p.2).min(1.0), fold(f64::max, f64::NEG_INFINITY, |p| p.2));
    let span = |a: f64, b: f64| if b > a { b - a } else { 1.0 };
    let sx = |x: f64| pad + (x - x0) / span(x0, x1) * (w - 2.0 * pad);
    let sy = |y: f64| h - pad - (y - y0) / span(y0, y1) * (h - 2.0 * pad);

    let _ = writeln!(
        svg,
        "<path d=\"M{pad} {pad} V{} H{}\" fill=\"none\" stroke=\"#444\"/>",
        h - pad,
        w - pad
    );
    let _ = writeln!(svg, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">point-units</text>", w / 2.0, h - 16.0);
    let _ = writeln!(
        svg,
        "<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">cost ratio</text>",
        h / 2.0,
        h / 2.0
    );
    for (v, anchor, x, y) in [(x0, "start", sx(x0), h - pad + 14.0), (x1, "end", sx(x1), h - pad + 14.0)] {
        let _ = writeln!(svg, "<text x=\"{x:.1}\" y=\"{y:.1}\" text-anchor=\"{anchor}\">{v:.0}</text>");
    }
    for v in [y0, y1] {
        let _ = writeln!(svg, "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{v:.3}</text>", pad - 4.0, sy(v) + 4.0);
    }

    let mut series: Vec<String> = Vec::new();
    for (a, _, _) in &pts {
        if !series.contains(&a.series()) {
            series.push(a.series());
        }
    }
    for (i, name) in series.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut line: Vec<(f64, f64)> =
            pts.iter().filter(|(a, _, _)| a.series() == *name).map(|(_, x, y)| (sx(*x), sy(*y))).collect();
        line.sort_by(|a, b| a.0.total_cmp(&b.0));
        let d: Vec<String> = line.iter().map(|(x, y)| format!("{x:.1},{y:.1}")).collect();
        let _ = writeln!(svg, "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>", d.join(" "));
        for (x, y) in &line {
            let _ = writeln!(svg, "<circle cx=\"{x:.1}\" cy=\"{y:.1}\" r=\"2.5\" fill=\"{color}\"/>");
        }
        let ly = pad + 14.0 * i as f64;
        let _ = writeln!(svg, "<text x=\"{:.1}\" y=\"{ly:.1}\" fill=\"{color}\" text-anchor=\"end\">{name}</text>", w - pad);
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn write_svg(path: impl AsRef<Path>, rows: &[Aggregate]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, svg_chart(rows)).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(method: &str, t: usize, units: f64, ratio: Option<f64>) -> Record {
        Record {
            method: method.into(),
            objective: "kmeans".into(),
            k: "5".into(),
            topology: "random".into(),
            partition: "uniform".into(),
            t,
            point_units: units,
            scalar_units: 10.0,
            cost_ratio: ratio,
        }
    }

    #[test]
    fn groups_in_first_seen_order_and_skips_failures() {
        let rows = vec![
            rec("distributed", 100, 1000.0, Some(1.2)),
            rec("distributed", 100, 1200.0, Some(1.0)),
            rec("distributed", 200, 2000.0, None),
            rec("combine", 100, 1100.0, Some(1.3)),
        ];
        let agg = aggregate(&rows);
        assert_eq!(agg.len(), 3);
        assert_eq!((agg[0].reps, agg[0].ok), (2, 2));
        assert!((agg[0].mean_ratio.unwrap() - 1.1).abs() < 1e-12);
        assert!((agg[0].mean_point_units - 1100.0).abs() < 1e-12);
        assert_eq!((agg[1].t, agg[1].ok, agg[1].mean_ratio), (200, 0, None));
        assert_eq!(agg[2].method, "combine");
    }

    #[test]
    fn chart_has_one_line_per_series() {
        let rows = vec![
            rec("distributed", 100, 1000.0, Some(1.2)),
            rec("distributed", 200, 2000.0, Some(1.1)),
            rec("combine", 100, 1000.0, Some(1.3)),
        ];
        let svg = svg_chart(&aggregate(&rows));
        assert!(svg.starts_with("<svg"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert_eq!(svg.matches("<circle").count(), 3);
        assert!(svg_chart(&[]).contains("no successful rows"));
    }
}
