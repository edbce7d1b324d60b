//! SVG line charts of the CSV outputs: sweep summaries on log-log axes,
//! diagnostics files as energy against time.

use std::path::{Path, PathBuf};

use plotters::prelude::*;

use crate::error::{CliError, Result};

pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn parse(text: &str, path: &Path) -> Result<Table> {
        let bad = |message: String| CliError::Table { path: path.to_path_buf(), message };
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<String> = lines.next().ok_or_else(|| bad("empty file".into()))?.split(',').map(str::to_owned).collect();
        let mut rows = Vec::new();
        for line in lines {
            // the first column of contdep tables is a label
            let row: Vec<f64> = line.split(',').map(|c| c.trim().parse().unwrap_or(f64::NAN)).collect();
            if row.len() != header.len() {
                return Err(bad(format!("row has {} columns, header {}", row.len(), header.len())));
            }
            rows.push(row);
        }
        Ok(Table { header, rows })
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.header.iter().position(|h| h == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

struct Series {
    name: String,
    points: Vec<(f64, f64)>,
}

fn bounds(series: &[Series], log: bool) -> Option<((f64, f64), (f64, f64))> {
    let pts = series.iter().flat_map(|s| s.points.iter());
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        return None;
    }
    let widen = |a: f64, b: f64| {
        if log {
            (a / 1.5, b * 1.5)
        } else if a == b {
            (a - 0.5 * a.abs().max(1.0), b + 0.5 * b.abs().max(1.0))
        } else {
            let pad = 0.05 * (b - a);
            (a - pad, b + pad)
        }
    };
    Some((widen(x0, x1), widen(y0, y1)))
}

fn draw(path: &Path, title: &str, xlabel: &str, series: &[Series], log: bool) -> Result<()> {
    let err = |e: String| CliError::Plot(format!("{}: {e}", path.display()));
    let ((x0, x1), (y0, y1)) = bounds(series, log).ok_or_else(|| err("nothing to plot".into()))?;
    let root = SVGBackend::new(path, (800, 520)).into_drawing_area();
    root.fill(&WHITE).map_err(|e| err(e.to_string()))?;
    let colors = [BLUE, RED, GREEN, MAGENTA, BLACK, CYAN];
    let mut builder = ChartBuilder::on(&root);
    builder.caption(title, ("sans-serif", 20)).margin(12).x_label_area_size(40).y_label_area_size(70);
    macro_rules! body {
        ($chart:expr) => {{
            let mut chart = $chart.map_err(|e| err(e.to_string()))?;
            chart.configure_mesh().x_desc(xlabel).draw().map_err(|e| err(e.to_string()))?;
            for (s, c) in series.iter().zip(colors.iter().cycle()) {
                chart
                    .draw_series(LineSeries::new(s.points.iter().copied(), c))
                    .map_err(|e| err(e.to_string()))?
                    .label(s.name.as_str())
                    .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], c));
            }
            chart.configure_series_labels().background_style(WHITE).border_style(BLACK).draw().map_err(|e| err(e.to_string()))?;
        }};
    }
    if log {
        body!(builder.build_cartesian_2d((x0..x1).log_scale(), (y0..y1).log_scale()));
    } else {
        body!(builder.build_cartesian_2d(x0..x1, y0..y1));
    }
    root.present().map_err(|e| err(e.to_string()))
}

fn positive(xs: &[f64], ys: &[f64]) -> Vec<(f64, f64)> {
    xs.iter().zip(ys).filter(|(x, y)| **x > 0.0 && **y > 0.0 && y.is_finite()).map(|(x, y)| (*x, *y)).collect()
}

/// Renders `input` into `out_dir` and returns the image path.
pub fn plot_csv(input: &Path, out_dir: &Path) -> Result<PathBuf> {
    let text = std::fs::read_to_string(input).map_err(CliError::io(input))?;
    let table = Table::parse(&text, input)?;
    std::fs::create_dir_all(out_dir).map_err(CliError::io(out_dir))?;
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
    let out = out_dir.join(format!("{stem}.svg"));
    match table.header.first().map(String::as_str) {
        Some("param") => {
            let p = table.column("param").unwrap_or_default();
            let series: Vec<Series> = ["d_to_ref", "d_pairwise", "xi_gamma_diff_l2"]
                .iter()
                .filter_map(|name| Some(Series { name: name.to_string(), points: positive(&p, &table.column(name)?) }))
                .filter(|s| !s.points.is_empty())
                .collect();
            draw(&out, "sweep distances", "parameter", &series, true)?;
        }
        Some("t") => {
            let t = table.column("t").unwrap_or_default();
            let e = table.column("energy").ok_or_else(|| CliError::Plot("no energy column".into()))?;
            let points = t.iter().copied().zip(e).filter(|p| p.1.is_finite()).collect();
            draw(&out, "free energy", "t", &[Series { name: "energy".into(), points }], false)?;
        }
        Some("h") => {
            let h = table.column("h").unwrap_or_default();
            let err = table.column("err_H").unwrap_or_default();
            draw(&out, "manufactured error", "h", &[Series { name: "err_H".into(), points: positive(&h, &err) }], true)?;
        }
        Some("target") => {
            let a = table.column("magnitude").unwrap_or_default();
            let series: Vec<Series> = ["lhs", "rhs"]
                .iter()
                .map(|n| Series { name: n.to_string(), points: positive(&a, &table.column(n).unwrap_or_default()) })
                .collect();
            draw(&out, "continuous dependence", "magnitude", &series, true)?;
        }
        other => return Err(CliError::Plot(format!("unrecognized table starting with {other:?}"))),
    }
    Ok(out)
}
