//! Linear inequality systems over named rate symbols.
//!
//! A [`RateSystem`] is a list of rows `coeffs · rates <= rhs` over
//! non-negative rates. Systems in this crate are tiny (a handful of symbols
//! and fewer than twenty rows), so elimination and vertex enumeration are
//! done by brute force.

use std::fmt;

use thiserror::Error;

use crate::lp::{LinearProgram, LpOutcome};

/// Tolerance for feasibility and membership tests.
pub const FEAS_TOL: f64 = 1e-7;
/// Tolerance for merging duplicate vertices and rows.
pub const DEDUP_TOL: f64 = 1e-9;
/// Largest dimension accepted by brute-force vertex enumeration.
pub const MAX_VERTEX_DIM: usize = 5;

const ZERO_COEFF: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolytopeError {
    #[error("unknown rate symbol `{0}`")]
    UnknownSymbol(String),
    #[error("duplicate rate symbol `{0}`")]
    DuplicateSymbol(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("system is unbounded in `{0}`")]
    Unbounded(String),
    #[error("vertex enumeration supports at most {MAX_VERTEX_DIM} symbols, got {0}")]
    TooManyDims(usize),
    #[error("symbol lists differ: {0:?} vs {1:?}")]
    SymbolMismatch(Vec<String>, Vec<String>),
    #[error("redundancy removal changed the region")]
    RedundancyCheckFailed,
}

/// One inequality `coeffs · rates <= rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub coeffs: Vec<f64>,
    pub rhs: f64,
}

impl Row {
    fn is_nonneg(&self) -> bool {
        self.rhs == 0.0
            && self.coeffs.iter().filter(|c| **c != 0.0).count() == 1
            && self.coeffs.iter().any(|c| *c == -1.0)
    }

    fn eval(&self, p: &[f64]) -> f64 {
        self.coeffs.iter().zip(p).map(|(a, b)| a * b).sum()
    }

    fn normalized(&self) -> Row {
        let m = self.coeffs.iter().fold(0.0f64, |acc, c| acc.max(c.abs()));
        if m <= ZERO_COEFF {
            return self.clone();
        }
        Row {
            coeffs: self.coeffs.iter().map(|c| if c.abs() <= ZERO_COEFF { 0.0 } else { c / m }).collect(),
            rhs: self.rhs / m,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateSystem {
    symbols: Vec<String>,
    rows: Vec<Row>,
}

/// Extreme points of a bounded system, sorted lexicographically.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexSet {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
}

impl VertexSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

impl RateSystem {
    /// A system over `symbols` holding only the non-negativity rows.
    pub fn new(symbols: &[&str]) -> Self {
        let n = symbols.len();
        let rows = (0..n)
            .map(|i| {
                let mut c = vec![0.0; n];
                c[i] = -1.0;
                Row { coeffs: c, rhs: 0.0 }
            })
            .collect();
        RateSystem { symbols: symbols.iter().map(|s| s.to_string()).collect(), rows }
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn dim(&self) -> usize {
        self.symbols.len()
    }

    pub fn index(&self, name: &str) -> Result<usize, PolytopeError> {
        self.symbols
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| PolytopeError::UnknownSymbol(name.to_string()))
    }

    fn coeff_vec(&self, terms: &[(&str, f64)]) -> Result<Vec<f64>, PolytopeError> {
        let mut c = vec![0.0; self.symbols.len()];
        for (name, v) in terms {
            c[self.index(name)?] += v;
        }
        Ok(c)
    }

    /// Adds `Σ coef·symbol <= rhs`.
    pub fn add(&mut self, terms: &[(&str, f64)], rhs: f64) -> Result<&mut Self, PolytopeError> {
        let coeffs = self.coeff_vec(terms)?;
        self.rows.push(Row { coeffs, rhs });
        Ok(self)
    }

    /// Adds `Σ symbols <= rhs` with unit coefficients.
    pub fn add_sum_le(&mut self, names: &[&str], rhs: f64) -> Result<&mut Self, PolytopeError> {
        let terms: Vec<(&str, f64)> = names.iter().map(|n| (*n, 1.0)).collect();
        self.add(&terms, rhs)
    }

    /// Adds `Σ coef·symbol = rhs` as two opposing rows.
    pub fn add_eq(&mut self, terms: &[(&str, f64)], rhs: f64) -> Result<&mut Self, PolytopeError> {
        let c = self.coeff_vec(terms)?;
        self.rows.push(Row { coeffs: c.iter().map(|v| -v).collect(), rhs: -rhs });
        self.rows.push(Row { coeffs: c, rhs });
        Ok(self)
    }

    /// Appends a new symbol constrained to equal the sum of `parts`.
    pub fn with_sum_symbol(&self, name: &str, parts: &[&str]) -> Result<RateSystem, PolytopeError> {
        if self.symbols.iter().any(|s| s == name) {
            return Err(PolytopeError::DuplicateSymbol(name.to_string()));
        }
        let mut out = self.clone();
        out.symbols.push(name.to_string());
        for r in out.rows.iter_mut() {
            r.coeffs.push(0.0);
        }
        let mut nn = vec![0.0; out.symbols.len()];
        *nn.last_mut().unwrap() = -1.0;
        out.rows.push(Row { coeffs: nn, rhs: 0.0 });
        let mut terms: Vec<(&str, f64)> = parts.iter().map(|p| (*p, -1.0)).collect();
        terms.push((name, 1.0));
        out.add_eq(&terms, 0.0)?;
        Ok(out)
    }

    /// The same system with symbols permuted into `order`.
    pub fn reorder(&self, order: &[&str]) -> Result<RateSystem, PolytopeError> {
        if order.len() != self.symbols.len() {
            return Err(PolytopeError::DimensionMismatch { expected: self.symbols.len(), got: order.len() });
        }
        let pos: Vec<usize> = order.iter().map(|n| self.index(n)).collect::<Result<_, _>>()?;
        let rows = self
            .rows
            .iter()
            .map(|r| Row { coeffs: pos.iter().map(|&p| r.coeffs[p]).collect(), rhs: r.rhs })
            .collect();
        Ok(RateSystem { symbols: order.iter().map(|s| s.to_string()).collect(), rows })
    }

    /// Projects out `drop` by Fourier-Motzkin elimination.
    pub fn fme_eliminate(&self, drop: &str) -> Result<RateSystem, PolytopeError> {
        let k = self.index(drop)?;
        let mut pos = Vec::new();
        let mut neg = Vec::new();
        let mut kept = Vec::new();
        for r in &self.rows {
            let c = r.coeffs[k];
            if c > ZERO_COEFF {
                pos.push(r);
            } else if c < -ZERO_COEFF {
                neg.push(r);
            } else {
                kept.push(r.clone());
            }
        }
        for p in &pos {
            for n in &neg {
                let (a, b) = (p.coeffs[k], -n.coeffs[k]);
                let coeffs = p.coeffs.iter().zip(&n.coeffs).map(|(x, y)| x / a + y / b).collect();
                kept.push(Row { coeffs, rhs: p.rhs / a + n.rhs / b });
            }
        }
        let rows = kept
            .into_iter()
            .map(|mut r| {
                r.coeffs.remove(k);
                r
            })
            .collect();
        let mut symbols = self.symbols.clone();
        symbols.remove(k);
        Ok(RateSystem { symbols, rows: simplify_rows(rows) })
    }

    /// True iff every row holds at `point` within `tol`.
    pub fn contains(&self, point: &[f64], tol: f64) -> Result<bool, PolytopeError> {
        if point.len() != self.symbols.len() {
            return Err(PolytopeError::DimensionMismatch { expected: self.symbols.len(), got: point.len() });
        }
        Ok(self.rows.iter().all(|r| r.eval(point) <= r.rhs + tol))
    }

    fn lp(&self, skip: Option<usize>) -> LinearProgram {
        let mut lp = LinearProgram::new(self.symbols.len());
        for (i, r) in self.rows.iter().enumerate() {
            if Some(i) != skip && !r.is_nonneg() {
                lp.add_le(r.coeffs.clone(), r.rhs);
            }
        }
        lp
    }

    /// Maximum of `c · rates` over the system.
    pub fn maximize(&self, c: &[f64]) -> LpOutcome {
        let mut lp = self.lp(None);
        lp.maximize(c.to_vec());
        match lp.solve() {
            LpOutcome::Optimal { x, value } => LpOutcome::Optimal { x, value: -value },
            o => o,
        }
    }

    /// Errors naming the first symbol with no upper bound; returns false when
    /// the system is empty.
    fn check_bounded(&self) -> Result<bool, PolytopeError> {
        for (i, s) in self.symbols.iter().enumerate() {
            let mut c = vec![0.0; self.symbols.len()];
            c[i] = 1.0;
            match self.maximize(&c) {
                LpOutcome::Unbounded => return Err(PolytopeError::Unbounded(s.clone())),
                LpOutcome::Infeasible => return Ok(false),
                LpOutcome::Optimal { .. } => {}
            }
        }
        Ok(true)
    }

    /// All extreme points, by intersecting every `dim`-subset of rows.
    pub fn vertices(&self) -> Result<VertexSet, PolytopeError> {
        let d = self.symbols.len();
        if d == 0 || d > MAX_VERTEX_DIM {
            return Err(PolytopeError::TooManyDims(d));
        }
        if !self.check_bounded()? {
            return Ok(VertexSet { dim: d, points: Vec::new() });
        }
        let mut points: Vec<Vec<f64>> = Vec::new();
        let m = self.rows.len();
        let mut combo: Vec<usize> = (0..d).collect();
        if m >= d {
            loop {
                if let Some(p) = solve_rows(&self.rows, &combo) {
                    if self.rows.iter().all(|r| r.eval(&p) <= r.rhs + FEAS_TOL)
                        && !points.iter().any(|q| max_dist(q, &p) <= DEDUP_TOL)
                    {
                        points.push(p);
                    }
                }
                if !next_combination(&mut combo, m) {
                    break;
                }
            }
        }
        for p in points.iter_mut() {
            for v in p.iter_mut() {
                if v.abs() < DEDUP_TOL {
                    *v = 0.0;
                }
            }
        }
        points.sort_by(|a, b| lex_cmp(a, b));
        Ok(VertexSet { dim: d, points })
    }

    /// Drops every row implied by the others. Non-negativity rows are kept.
    pub fn remove_redundant(&self) -> Result<RateSystem, PolytopeError> {
        let before = self.vertices()?;
        if before.is_empty() {
            return Ok(self.clone());
        }
        let mut out = self.clone();
        let mut i = 0;
        while i < out.rows.len() {
            let r = &out.rows[i];
            if r.is_nonneg() {
                i += 1;
                continue;
            }
            let mut lp = out.lp(Some(i));
            lp.maximize(r.coeffs.clone());
            let redundant = match lp.solve() {
                LpOutcome::Optimal { value, .. } => -value <= r.rhs + FEAS_TOL,
                _ => false,
            };
            if redundant {
                out.rows.remove(i);
            } else {
                i += 1;
            }
        }
        let after = out.vertices()?;
        if !vertex_sets_match(&before, &out, &after, self, FEAS_TOL) {
            return Err(PolytopeError::RedundancyCheckFailed);
        }
        Ok(out)
    }

    /// True iff the two systems have mutually contained vertex sets.
    pub fn same_region(&self, other: &RateSystem, tol: f64) -> Result<bool, PolytopeError> {
        if self.symbols != other.symbols {
            return Err(PolytopeError::SymbolMismatch(self.symbols.clone(), other.symbols.clone()));
        }
        let va = self.vertices()?;
        let vb = other.vertices()?;
        Ok(vertex_sets_match(&va, other, &vb, self, tol))
    }

    /// True iff every vertex of `self` lies in `other`.
    pub fn subset_of(&self, other: &RateSystem, tol: f64) -> Result<bool, PolytopeError> {
        if self.symbols != other.symbols {
            return Err(PolytopeError::SymbolMismatch(self.symbols.clone(), other.symbols.clone()));
        }
        for p in &self.vertices()?.points {
            if !other.contains(p, tol)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

fn vertex_sets_match(va: &VertexSet, b: &RateSystem, vb: &VertexSet, a: &RateSystem, tol: f64) -> bool {
    if va.is_empty() != vb.is_empty() {
        return false;
    }
    va.points.iter().all(|p| b.rows.iter().all(|r| r.eval(p) <= r.rhs + tol))
        && vb.points.iter().all(|p| a.rows.iter().all(|r| r.eval(p) <= r.rhs + tol))
}

impl fmt::Display for RateSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            let mut first = true;
            for (c, s) in r.coeffs.iter().zip(&self.symbols) {
                if *c == 0.0 {
                    continue;
                }
                let sign = if *c < 0.0 { "-" } else if first { "" } else { "+" };
                let mag = c.abs();
                if mag == 1.0 {
                    write!(f, "{sign}{s} ")?;
                } else {
                    write!(f, "{sign}{mag}*{s} ")?;
                }
                first = false;
            }
            if first {
                write!(f, "0 ")?;
            }
            writeln!(f, "<= {:.9}", r.rhs)?;
        }
        Ok(())
    }
}

/// Removes trivially true rows and duplicates (keeping the tightest of rows
/// with equal normalized coefficients).
fn simplify_rows(rows: Vec<Row>) -> Vec<Row> {
    let mut out: Vec<Row> = Vec::new();
    for r in rows {
        let r = r.normalized();
        if r.coeffs.iter().all(|c| c.abs() <= ZERO_COEFF) {
            if r.rhs >= -FEAS_TOL {
                continue;
            }
            if out.iter().any(|o| o.coeffs.iter().all(|c| *c == 0.0)) {
                continue;
            }
        }
        if let Some(o) = out
            .iter_mut()
            .find(|o| o.coeffs.iter().zip(&r.coeffs).all(|(a, b)| (a - b).abs() <= DEDUP_TOL))
        {
            if r.rhs < o.rhs {
                o.rhs = r.rhs;
            }
            continue;
        }
        out.push(r);
    }
    out
}

fn max_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.partial_cmp(y) {
            Some(std::cmp::Ordering::Equal) | None => continue,
            Some(o) => return o,
        }
    }
    a.len().cmp(&b.len())
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let k = c.len();
    let mut i = k;
    while i > 0 {
        i -= 1;
        if c[i] < n - k + i {
            c[i] += 1;
            for j in i + 1..k {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

/// Solves the square system formed by the chosen rows as equalities.
fn solve_rows(rows: &[Row], pick: &[usize]) -> Option<Vec<f64>> {
    let d = pick.len();
    let mut a: Vec<Vec<f64>> = pick
        .iter()
        .map(|&i| {
            let mut r = rows[i].coeffs.clone();
            r.push(rows[i].rhs);
            r
        })
        .collect();
    for col in 0..d {
        let piv = (col..d).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        for i in 0..d {
            if i != col {
                let f = a[i][col] / a[col][col];
                if f != 0.0 {
                    for j in col..=d {
                        a[i][j] -= f * a[col][j];
                    }
                }
            }
        }
    }
    Some((0..d).map(|i| a[i][d] / a[i][i]).collect())
}
