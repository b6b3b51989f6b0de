use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::json;

use crate::error::{Error, Result};

use super::spec::ExperimentSpec;
use super::{ResultRow, ResultTable};

pub const CSV_HEADER: &str = "estimator,x,mean,stderr,m,spec_hash";

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

/// Floats are written in Rust's shortest round-trip form.
pub fn to_csv(table: &ResultTable) -> String {
    let mut s = String::with_capacity(64 * (table.rows.len() + 1));
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in &table.rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            quote(&r.estimator),
            r.x,
            r.mean,
            r.stderr,
            r.m,
            table.provenance.spec_hash
        );
    }
    s
}

pub fn emit_csv(table: &ResultTable, path: &Path) -> Result<()> {
    fs::write(path, to_csv(table))?;
    Ok(())
}

fn split_fields(line: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut chars = line.chars().peekable();
    let mut quoted = false;
    while let Some(c) = chars.next() {
        match (quoted, c) {
            (true, '"') if chars.peek() == Some(&'"') => {
                chars.next();
                cur.push('"');
            }
            (true, '"') => quoted = false,
            (false, '"') if cur.is_empty() => quoted = true,
            (false, ',') => out.push(std::mem::take(&mut cur)),
            (_, c) => cur.push(c),
        }
    }
    if quoted {
        return Err(Error::Parse(format!("unterminated quote in {line:?}")));
    }
    out.push(cur);
    Ok(out)
}

/// Parses a file written by [`emit_csv`], returning its rows and the spec
/// hash (empty for a table without rows).
pub fn parse_csv(text: &str) -> Result<(Vec<ResultRow>, String)> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(Error::Parse(format!("expected header {CSV_HEADER:?}")));
    }
    let mut rows = Vec::new();
    let mut hash: Option<String> = None;
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let f = split_fields(line)?;
        if f.len() != 6 {
            return Err(Error::Parse(format!("line {lineno}: expected 6 fields, found {}", f.len())));
        }
        let num = |k: usize| {
            f[k].parse::<f64>()
                .map_err(|e| Error::Parse(format!("line {lineno} field {}: {e}", k + 1)))
        };
        let row = ResultRow {
            estimator: f[0].clone(),
            x: num(1)?,
            mean: num(2)?,
            stderr: num(3)?,
            m: f[4]
                .parse()
                .map_err(|e| Error::Parse(format!("line {lineno} field 5: {e}")))?,
        };
        match &hash {
            Some(h) if *h != f[5] => return Err(Error::Parse(format!("line {lineno}: spec hash changes"))),
            Some(_) => {}
            None => hash = Some(f[5].clone()),
        }
        rows.push(row);
    }
    Ok((rows, hash.unwrap_or_default()))
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 450.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 180.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64> + Clone, allow_log: bool, from_zero: bool) -> Self {
        let (mut lo, mut hi) = values
            .clone()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
        if !lo.is_finite() {
            return Self { lo: 0.0, hi: 1.0, log: false };
        }
        let log = allow_log && lo > 0.0 && hi / lo >= 20.0;
        if log {
            return Self { lo: lo.ln(), hi: hi.ln(), log };
        }
        if from_zero && lo > 0.0 {
            lo = 0.0;
        }
        if hi <= lo {
            hi = lo + 1.0;
        }
        Self { lo, hi, log }
    }

    fn unit(&self, v: f64) -> f64 {
        let v = if self.log { v.ln() } else { v };
        (v - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<f64> {
        (0..=4)
            .map(|i| {
                let t = self.lo + (self.hi - self.lo) * i as f64 / 4.0;
                if self.log { t.exp() } else { t }
            })
            .collect()
    }
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{v:.3}")
    }
}

/// Line chart of mean against x with ±1 standard-error bars. Layout depends
/// only on the table.
pub fn to_svg(table: &ResultTable) -> String {
    let finite: Vec<&ResultRow> = table.rows.iter().filter(|r| r.x.is_finite() && r.mean.is_finite()).collect();
    let xs = finite.iter().map(|r| r.x);
    let ys = finite.iter().flat_map(|r| {
        let e = if r.stderr.is_finite() { r.stderr } else { 0.0 };
        [r.mean - e, r.mean + e]
    });
    let xa = Axis::new(xs, true, false);
    let ya = Axis::new(ys, false, true);
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let px = |x: f64| LEFT + pw * xa.unit(x);
    let py = |y: f64| TOP + ph * (1.0 - ya.unit(y));

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(&table.name)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for t in xa.ticks() {
        let x = px(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/><text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 20.0,
            tick_label(t)
        );
    }
    for t in ya.ticks() {
        let y = py(t);
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            y + 4.0,
            tick_label(t)
        );
    }
    let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">x</text>"#, LEFT + pw / 2.0, HEIGHT - 10.0);
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">MSE</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0
    );

    for (k, label) in table.labels().into_iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut pts: Vec<&ResultRow> = finite.iter().copied().filter(|r| r.estimator == label).collect();
        pts.sort_by(|a, b| a.x.total_cmp(&b.x));
        let coords: Vec<String> = pts.iter().map(|r| format!("{:.2},{:.2}", px(r.x), py(r.mean))).collect();
        let _ = writeln!(
            s,
            r#"<polyline data-series="{}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            escape(label),
            coords.join(" ")
        );
        for r in &pts {
            if r.stderr.is_finite() && r.stderr > 0.0 {
                let x = px(r.x);
                let _ = writeln!(
                    s,
                    r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}"/>"#,
                    py(r.mean - r.stderr),
                    py(r.mean + r.stderr)
                );
            }
        }
        let ly = TOP + 10.0 + 18.0 * k as f64;
        let lx = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{:.2}">{}</text>"#,
            lx + 20.0,
            lx + 25.0,
            ly + 4.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

pub fn emit_svg(table: &ResultTable, path: &Path) -> Result<()> {
    fs::write(path, to_svg(table))?;
    Ok(())
}

/// Provenance manifest: the full spec, the table's provenance block and a
/// creation timestamp (the only non-deterministic field).
pub fn manifest_json(spec: &ExperimentSpec, table: &ResultTable, created_unix: u64) -> String {
    let v = json!({
        "name": table.name,
        "spec": spec,
        "provenance": table.provenance,
        "rows": table.rows.len(),
        "created_unix": created_unix,
    });
    serde_json::to_string_pretty(&v).expect("manifest serializes")
}
