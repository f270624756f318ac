//! Text formats: channel and distribution files, fixed-point CSV, SVG plots.
//!
//! Channel file:
//! ```text
//! # comment
//! var X1 2
//! var X2 2
//! var Y 2
//! var Z 2
//! p 0.9 0.1 0 0      # row (x1=0, x2=0): columns (y,z) with z fastest
//! ...
//! ```
//! Rows are indexed by (x1, x2) with x2 fastest.
//!
//! Distribution file: `var U k`, `var X1 k`, `var X2 k`, then one `p` row per
//! (u, x1) (x1 fastest) holding the joint masses p(u, x1, x2) over x2. The
//! masses sum to 1.

use std::fmt::Write as _;

use thiserror::Error;

use crate::channels::{CicChannel, X1, X2, Y, Z};
use crate::probability::{JointDist, VarId, SUM_TOL};
use crate::regions::{CicInputDist, U};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("{0}")]
    Invalid(String),
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, msg: msg.into() }
}

struct Table {
    vars: Vec<(String, usize)>,
    rows: Vec<(usize, Vec<f64>)>,
}

fn parse_table(text: &str) -> Result<Table, FormatError> {
    let mut t = Table { vars: Vec::new(), rows: Vec::new() };
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let mut it = body.split_whitespace();
        match it.next() {
            Some("var") => {
                if !t.rows.is_empty() {
                    return Err(syntax(line, "var declaration after p rows"));
                }
                let name = it.next().ok_or_else(|| syntax(line, "missing variable name"))?;
                let card: usize = it
                    .next()
                    .ok_or_else(|| syntax(line, "missing cardinality"))?
                    .parse()
                    .map_err(|_| syntax(line, "cardinality is not a positive integer"))?;
                if card == 0 {
                    return Err(syntax(line, "cardinality must be at least 1"));
                }
                if it.next().is_some() {
                    return Err(syntax(line, "trailing tokens after cardinality"));
                }
                t.vars.push((name.to_string(), card));
            }
            Some("p") => {
                let vals = it
                    .map(|tok| {
                        tok.parse::<f64>()
                            .ok()
                            .filter(|v| v.is_finite())
                            .ok_or_else(|| syntax(line, format!("'{tok}' is not a finite number")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                t.rows.push((line, vals));
            }
            Some(other) => return Err(syntax(line, format!("unknown directive '{other}'"))),
            None => {}
        }
    }
    Ok(t)
}

fn expect_vars(t: &Table, names: &[&str]) -> Result<Vec<usize>, FormatError> {
    let got: Vec<&str> = t.vars.iter().map(|(n, _)| n.as_str()).collect();
    if got != names {
        return Err(FormatError::Invalid(format!(
            "expected var declarations {} in this order, found {}",
            names.join(", "),
            if got.is_empty() { "none".to_string() } else { got.join(", ") }
        )));
    }
    Ok(t.vars.iter().map(|(_, c)| *c).collect())
}

fn check_shape(t: &Table, rows: usize, width: usize) -> Result<(), FormatError> {
    if t.rows.len() != rows {
        return Err(FormatError::Invalid(format!("expected {rows} p rows, found {}", t.rows.len())));
    }
    for (k, (line, r)) in t.rows.iter().enumerate() {
        if r.len() != width {
            return Err(syntax(*line, format!("row {k} has {} entries, expected {width}", r.len())));
        }
        if let Some(v) = r.iter().find(|v| **v < 0.0) {
            return Err(syntax(*line, format!("row {k} has negative entry {v}")));
        }
    }
    Ok(())
}

pub fn parse_channel(text: &str) -> Result<CicChannel, FormatError> {
    let t = parse_table(text)?;
    let c = expect_vars(&t, &[X1, X2, Y, Z])?;
    let (c1, c2, cy, cz) = (c[0], c[1], c[2], c[3]);
    check_shape(&t, c1 * c2, cy * cz)?;
    for (k, (line, r)) in t.rows.iter().enumerate() {
        let s: f64 = r.iter().sum();
        if (s - 1.0).abs() > SUM_TOL {
            return Err(syntax(
                *line,
                format!("row {k} (x1={}, x2={}) is not stochastic: sums to {s}", k / c2, k % c2),
            ));
        }
    }
    let data: Vec<f64> = t.rows.into_iter().flat_map(|(_, r)| r).collect();
    CicChannel::new(c1, c2, cy, cz, data).map_err(|e| FormatError::Invalid(e.to_string()))
}

fn num(v: f64) -> String {
    let s = format!("{v}");
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

pub fn write_channel(ch: &CicChannel) -> String {
    let mut out = String::new();
    for (n, c) in [(X1, ch.card_x1()), (X2, ch.card_x2()), (Y, ch.card_y()), (Z, ch.card_z())] {
        let _ = writeln!(out, "var {n} {c}");
    }
    let w = ch.card_y() * ch.card_z();
    for row in ch.trans().chunks(w) {
        let _ = writeln!(out, "p {}", row.iter().map(|v| num(*v)).collect::<Vec<_>>().join(" "));
    }
    out
}

pub fn parse_dist(text: &str) -> Result<CicInputDist, FormatError> {
    let t = parse_table(text)?;
    let c = expect_vars(&t, &[U, X1, X2])?;
    check_shape(&t, c[0] * c[1], c[2])?;
    let data: Vec<f64> = t.rows.into_iter().flat_map(|(_, r)| r).collect();
    let s: f64 = data.iter().sum();
    if (s - 1.0).abs() > SUM_TOL {
        return Err(FormatError::Invalid(format!("joint masses sum to {s}, not 1")));
    }
    let inv = |e: String| FormatError::Invalid(e);
    let vars = vec![
        VarId::new(U, c[0]).map_err(|e| inv(e.to_string()))?,
        VarId::new(X1, c[1]).map_err(|e| inv(e.to_string()))?,
        VarId::new(X2, c[2]).map_err(|e| inv(e.to_string()))?,
    ];
    let joint = JointDist::new(vars, data).map_err(|e| inv(e.to_string()))?;
    CicInputDist::lemma1_from_joint(&joint).map_err(|e| inv(e.to_string()))
}

pub fn write_dist(d: &CicInputDist) -> Result<String, FormatError> {
    let j = d.input_joint().map_err(|e| FormatError::Invalid(e.to_string()))?;
    let (cu, c1, c2) = (d.card(U).unwrap_or(1), d.card(X1).unwrap_or(1), d.card(X2).unwrap_or(1));
    let mut out = format!("var {U} {cu}\nvar {X1} {c1}\nvar {X2} {c2}\n");
    for u in 0..cu {
        for x in 0..c1 {
            let row: Vec<String> = (0..c2).map(|k| num(j.get(&[u, x, k]))).collect();
            let _ = writeln!(out, "p {}", row.join(" "));
        }
    }
    Ok(out)
}

/// Fixed-point with 9 decimals; negative zero is printed as zero.
pub fn fmt9(v: f64) -> String {
    let s = format!("{v:.9}");
    if s.starts_with('-') && s[1..].chars().all(|c| c == '0' || c == '.') {
        s[1..].to_string()
    } else {
        s
    }
}

/// CSV document with a leading `# <command line>` row and a header.
#[derive(Clone, Debug)]
pub struct Csv {
    text: String,
    width: usize,
}

impl Csv {
    pub fn new(command_line: &str, header: &[&str]) -> Self {
        let mut text = String::new();
        let _ = writeln!(text, "# {}", command_line.replace('\n', " "));
        let _ = writeln!(text, "{}", header.join(","));
        Csv { text, width: header.len() }
    }

    /// Appends a row of preformatted cells.
    pub fn row(&mut self, cells: &[String]) {
        assert_eq!(cells.len(), self.width, "csv row width");
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

/// Parses the data rows of a CSV produced by [`Csv`] (comments and header
/// skipped) into string cells.
pub fn read_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().map(|h| h.split(',').map(String::from).collect()).unwrap_or_default();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Curve {
    /// Machine-readable id, emitted as the polyline `id`.
    pub id: String,
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub curves: Vec<Curve>,
}

pub const SVG_WIDTH: f64 = 800.0;
pub const SVG_HEIGHT: f64 = 600.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn nice_max(v: f64) -> f64 {
    if !(v > 0.0) {
        return 1.0;
    }
    let e = 10f64.powf(v.log10().floor());
    [1.0, 2.0, 2.5, 5.0, 10.0].iter().map(|m| m * e).find(|m| *m >= v).unwrap_or(10.0 * e)
}

impl Plot {
    pub fn to_svg(&self) -> String {
        let (l, r, t, b) = (80.0, 40.0, 50.0, 70.0);
        let (pw, ph) = (SVG_WIDTH - l - r, SVG_HEIGHT - t - b);
        let all = self.curves.iter().flat_map(|c| c.points.iter());
        let (xm, ym) = all.fold((0.0f64, 0.0f64), |(a, b), p| (a.max(p.0), b.max(p.1)));
        let (xm, ym) = (nice_max(xm), nice_max(ym));
        let sx = |x: f64| l + pw * x / xm;
        let sy = |y: f64| t + ph * (1.0 - y / ym);
        let mut s = String::new();
        let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
        let _ = writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="800" height="600" viewBox="0 0 800 600">"#
        );
        let _ = writeln!(s, r#"<rect width="800" height="600" fill="white"/>"#);
        let _ = writeln!(s, r#"<text x="400" y="28" text-anchor="middle" font-size="18">{}</text>"#, esc(&self.title));
        let _ = writeln!(
            s,
            r#"<g id="axes" stroke="black" fill="none"><line x1="{l}" y1="{}" x2="{}" y2="{}"/><line x1="{l}" y1="{t}" x2="{l}" y2="{}"/></g>"#,
            t + ph,
            l + pw,
            t + ph,
            t + ph
        );
        for k in 0..=5 {
            let (xv, yv) = (xm * k as f64 / 5.0, ym * k as f64 / 5.0);
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="12">{}</text>"#,
                sx(xv),
                t + ph + 18.0,
                fmt_tick(xv)
            );
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="12">{}</text>"#,
                l - 8.0,
                sy(yv) + 4.0,
                fmt_tick(yv)
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="14">{}</text>"#,
            l + pw / 2.0,
            SVG_HEIGHT - 20.0,
            esc(&self.x_label)
        );
        let _ = writeln!(
            s,
            r#"<text x="20" y="{:.2}" text-anchor="middle" font-size="14" transform="rotate(-90 20 {:.2})">{}</text>"#,
            t + ph / 2.0,
            t + ph / 2.0,
            esc(&self.y_label)
        );
        for (i, c) in self.curves.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let pts: Vec<String> = c.points.iter().map(|p| format!("{:.3},{:.3}", sx(p.0), sy(p.1))).collect();
            let _ = writeln!(
                s,
                r#"<polyline id="{}" fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#,
                esc(&c.id),
                pts.join(" ")
            );
            let ly = t + 20.0 + 18.0 * i as f64;
            let _ = writeln!(
                s,
                r#"<text x="{:.2}" y="{ly:.2}" text-anchor="end" font-size="13" fill="{color}">{}</text>"#,
                l + pw - 10.0,
                esc(&c.label)
            );
        }
        s.push_str("</svg>\n");
        s
    }
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.3}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}
