use std::fmt::Write as _;
use std::path::Path;

use super::{write_file, IoError, Result};
use crate::analytics::{Emotion, Group, OccurrenceSeries};

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 56.0;

fn column_name(s: &OccurrenceSeries) -> String {
    format!("{}_{}", s.group, s.emotion)
}

fn check(series: &[OccurrenceSeries]) -> std::result::Result<usize, String> {
    let n = series.first().ok_or("no series to export")?.len();
    if n == 0 {
        return Err("series are empty".into());
    }
    if let Some(s) = series.iter().find(|s| s.len() != n) {
        return Err(format!("series {} has {} frames, expected {n}", column_name(s), s.len()));
    }
    Ok(n)
}

/// CSV text: header `frame,<group>_<emotion>,...`, then one row per frame
/// (numbered from 1) holding each series' occurrence. Values are written in
/// the shortest form that parses back to the same `f64`.
pub fn occurrence_csv(series: &[OccurrenceSeries]) -> std::result::Result<String, String> {
    let n = check(series)?;
    let mut out = String::from("frame");
    for s in series {
        out.push(',');
        out.push_str(&column_name(s));
    }
    out.push('\n');
    for j in 0..n {
        write!(out, "{}", j + 1).unwrap();
        for s in series {
            write!(out, ",{}", s.value(j)).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

/// Parses [`occurrence_csv`] output back into named columns.
pub fn parse_occurrence_csv(text: &str) -> std::result::Result<Vec<(String, Vec<f64>)>, String> {
    let mut lines = text.lines();
    let header = lines.next().ok_or("empty CSV")?;
    let mut names = header.split(',');
    if names.next() != Some("frame") {
        return Err("first column must be `frame`".into());
    }
    let mut cols: Vec<(String, Vec<f64>)> = names.map(|n| (n.to_string(), Vec::new())).collect();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() + 1 {
            return Err(format!("row {} has {} fields, expected {}", i + 1, fields.len(), cols.len() + 1));
        }
        if fields[0].parse::<usize>().ok() != Some(i + 1) {
            return Err(format!("row {} has frame {:?}", i + 1, fields[0]));
        }
        for (c, f) in cols.iter_mut().zip(&fields[1..]) {
            c.1.push(f.parse().map_err(|_| format!("bad value {f:?} in row {}", i + 1))?);
        }
    }
    Ok(cols)
}

fn colour(e: Emotion) -> &'static str {
    match e {
        Emotion::Happy => "#d08c00",
        Emotion::Neutral => "#6f6f6f",
        Emotion::Sad => "#1f63b4",
        Emotion::Angry => "#c62828",
        Emotion::Surprise => "#8051b0",
        Emotion::Other => "#2e8b3a",
    }
}

/// Line chart of occurrence against frame number: one polyline per series,
/// solid for the healthy group and dashed for the impaired group.
pub fn render_occurrence_svg(series: &[OccurrenceSeries], title: &str) -> std::result::Result<String, String> {
    let n = check(series)?;
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let x_of = |j: usize| if n == 1 { LEFT + plot_w / 2.0 } else { LEFT + plot_w * j as f64 / (n - 1) as f64 };
    let y_of = |u: f64| TOP + plot_h * (1.0 - u);

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 800 480" width="800" height="480" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(s, r##"<rect x="0" y="0" width="800" height="480" fill="#ffffff"/>"##).unwrap();
    let escaped = title.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
    writeln!(s, r#"<text x="{:.6}" y="16" text-anchor="middle">{escaped}</text>"#, LEFT + plot_w / 2.0).unwrap();
    writeln!(s, r##"<g stroke="#000000" stroke-width="1">"##).unwrap();
    writeln!(s, r#"<line x1="{LEFT:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}"/>"#, y_of(0.0), LEFT + plot_w, y_of(0.0)).unwrap();
    writeln!(s, r#"<line x1="{LEFT:.6}" y1="{:.6}" x2="{LEFT:.6}" y2="{:.6}"/>"#, y_of(0.0), y_of(1.0)).unwrap();
    writeln!(s, "</g>").unwrap();

    for k in 0..=4 {
        let u = k as f64 / 4.0;
        writeln!(s, r##"<line x1="{:.6}" y1="{:.6}" x2="{LEFT:.6}" y2="{:.6}" stroke="#000000"/>"##, LEFT - 4.0, y_of(u), y_of(u)).unwrap();
        writeln!(s, r#"<text x="{:.6}" y="{:.6}" text-anchor="end">{u:.2}</text>"#, LEFT - 6.0, y_of(u) + 4.0).unwrap();
    }
    let mut ticks: Vec<usize> = (0..=5).map(|k| k * (n - 1) / 5).collect();
    ticks.dedup();
    for j in ticks {
        writeln!(
            s,
            r##"<line x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}" stroke="#000000"/>"##,
            x_of(j),
            y_of(0.0),
            x_of(j),
            y_of(0.0) + 4.0
        )
        .unwrap();
        writeln!(s, r#"<text x="{:.6}" y="{:.6}" text-anchor="middle">{}</text>"#, x_of(j), y_of(0.0) + 18.0, j + 1).unwrap();
    }
    writeln!(s, r#"<text x="{:.6}" y="{:.6}" text-anchor="middle">frame</text>"#, LEFT + plot_w / 2.0, HEIGHT - 12.0).unwrap();
    writeln!(
        s,
        r#"<text x="16" y="{:.6}" text-anchor="middle" transform="rotate(-90 16 {:.6})">occurrence</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    )
    .unwrap();

    for (i, ser) in series.iter().enumerate() {
        let dash = if ser.group == Group::Impaired { r#" stroke-dasharray="6 4""# } else { "" };
        let mut points = String::new();
        for j in 0..n {
            if j > 0 {
                points.push(' ');
            }
            write!(points, "{:.6},{:.6}", x_of(j), y_of(ser.value(j))).unwrap();
        }
        writeln!(s, r#"<polyline fill="none" stroke="{}" stroke-width="1.5"{dash} points="{points}"/>"#, colour(ser.emotion)).unwrap();
        let ly = TOP + 12.0 + 18.0 * i as f64;
        let lx = WIDTH - RIGHT + 12.0;
        writeln!(
            s,
            r#"<line x1="{lx:.6}" y1="{ly:.6}" x2="{:.6}" y2="{ly:.6}" stroke="{}" stroke-width="1.5"{dash}/>"#,
            lx + 24.0,
            colour(ser.emotion)
        )
        .unwrap();
        writeln!(s, r#"<text x="{:.6}" y="{:.6}">{}</text>"#, lx + 30.0, ly + 4.0, column_name(ser)).unwrap();
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn write_occurrence_csv(series: &[OccurrenceSeries], path: &Path) -> Result<()> {
    let text = occurrence_csv(series).map_err(|detail| IoError::Format { path: path.to_path_buf(), detail })?;
    write_file(path, text)
}

pub fn write_occurrence_svg(series: &[OccurrenceSeries], title: &str, path: &Path) -> Result<()> {
    let text = render_occurrence_svg(series, title).map_err(|detail| IoError::Format { path: path.to_path_buf(), detail })?;
    write_file(path, text)
}
