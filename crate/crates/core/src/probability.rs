//! Finite joint distributions and information measures.
//!
//! A [`JointDist`] is a dense probability tensor over an ordered list of
//! named discrete variables, stored row-major with the last variable varying
//! fastest. All information quantities are in bits.

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

/// Largest supported product-space size.
pub const MAX_ENTRIES: usize = 1 << 24;

/// Tolerance used when checking that a tensor or kernel row sums to one.
pub const SUM_TOL: f64 = 1e-9;

/// Mutual informations in `[-MI_CLAMP, 0)` are reported as zero.
pub const MI_CLAMP: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProbError {
    #[error("unknown variable `{0}`")]
    UnknownVar(String),
    #[error("variable `{0}` appears more than once")]
    DuplicateVar(String),
    #[error("variable `{0}` has zero cardinality")]
    ZeroCardinality(String),
    #[error("variable sets overlap on `{0}`")]
    Overlap(String),
    #[error("empty variable set")]
    EmptySet,
    #[error("tensor has {got} entries, expected {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("product space of {0} entries exceeds the supported maximum of {MAX_ENTRIES}")]
    TooLarge(u128),
    #[error("negative or non-finite probability {value} at index {index}")]
    BadEntry { index: usize, value: f64 },
    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(f64),
    #[error("kernel row {row} is not a probability vector (sum {sum})")]
    NonStochasticRow { row: usize, sum: f64 },
}

/// A named finite random variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarId {
    name: String,
    card: usize,
}

impl VarId {
    pub fn new(name: impl Into<String>, card: usize) -> Result<Self, ProbError> {
        let name = name.into();
        if card == 0 {
            return Err(ProbError::ZeroCardinality(name));
        }
        Ok(VarId { name, card })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn card(&self) -> usize {
        self.card
    }
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[{}]", self.name, self.card)
    }
}

fn space_size(vars: &[VarId]) -> Result<usize, ProbError> {
    let mut size: u128 = 1;
    for v in vars {
        size = size.saturating_mul(v.card as u128);
        if size > MAX_ENTRIES as u128 {
            return Err(ProbError::TooLarge(size));
        }
    }
    Ok(size as usize)
}

fn check_unique(vars: &[VarId]) -> Result<(), ProbError> {
    let mut seen = HashSet::new();
    for v in vars {
        if !seen.insert(v.name.as_str()) {
            return Err(ProbError::DuplicateVar(v.name.clone()));
        }
    }
    Ok(())
}

/// Row-major strides (last variable fastest).
fn strides(vars: &[VarId]) -> Vec<usize> {
    let mut s = vec![1; vars.len()];
    for i in (0..vars.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * vars[i + 1].card;
    }
    s
}

fn plogp_sum(probs: impl IntoIterator<Item = f64>) -> f64 {
    let mut h = 0.0;
    for p in probs {
        if p > 0.0 {
            h -= p * p.log2();
        }
    }
    h
}

/// Binary entropy function in bits.
pub fn binary_entropy(p: f64) -> f64 {
    plogp_sum([p, 1.0 - p])
}

/// A conditional distribution from named parent variables to one or more new
/// child variables. Rows are indexed by the parents in the order given (last
/// parent fastest); each row is a distribution over the children (last child
/// fastest).
#[derive(Clone, Debug)]
pub struct Kernel {
    parents: Vec<String>,
    children: Vec<VarId>,
    rows: Vec<f64>,
}

impl Kernel {
    pub fn new(parents: &[&str], child: VarId, rows: Vec<f64>) -> Result<Self, ProbError> {
        Self::multi(parents, vec![child], rows)
    }

    pub fn multi(parents: &[&str], children: Vec<VarId>, rows: Vec<f64>) -> Result<Self, ProbError> {
        check_unique(&children)?;
        let width = space_size(&children)?;
        if rows.len() % width != 0 || rows.is_empty() {
            return Err(ProbError::ShapeMismatch {
                expected: width * (rows.len() / width).max(1),
                got: rows.len(),
            });
        }
        for (r, row) in rows.chunks(width).enumerate() {
            let mut sum = 0.0;
            for &p in row {
                if !(p >= 0.0) || !p.is_finite() {
                    return Err(ProbError::NonStochasticRow { row: r, sum: f64::NAN });
                }
                sum += p;
            }
            if (sum - 1.0).abs() > SUM_TOL {
                return Err(ProbError::NonStochasticRow { row: r, sum });
            }
        }
        Ok(Kernel {
            parents: parents.iter().map(|s| s.to_string()).collect(),
            children,
            rows,
        })
    }

    /// Builds a kernel from a function of the parent values returning the child
    /// distribution.
    pub fn from_fn(
        parents: &[VarId],
        child: VarId,
        mut f: impl FnMut(&[usize]) -> Vec<f64>,
    ) -> Result<Self, ProbError> {
        let n_rows = space_size(parents)?;
        let mut idx = vec![0; parents.len()];
        let mut rows = Vec::with_capacity(n_rows * child.card);
        for _ in 0..n_rows {
            let row = f(&idx);
            if row.len() != child.card {
                return Err(ProbError::ShapeMismatch { expected: child.card, got: row.len() });
            }
            rows.extend(row);
            advance(&mut idx, parents);
        }
        let names: Vec<&str> = parents.iter().map(|v| v.name()).collect();
        Self::new(&names, child, rows)
    }

    /// A kernel that copies the parent value.
    pub fn deterministic(
        parents: &[VarId],
        child: VarId,
        mut f: impl FnMut(&[usize]) -> usize,
    ) -> Result<Self, ProbError> {
        let card = child.card;
        Self::from_fn(parents, child, |idx| {
            let mut row = vec![0.0; card];
            row[f(idx)] = 1.0;
            row
        })
    }

    pub fn parents(&self) -> &[String] {
        &self.parents
    }

    pub fn children(&self) -> &[VarId] {
        &self.children
    }

    pub fn rows(&self) -> &[f64] {
        &self.rows
    }

    fn width(&self) -> usize {
        self.children.iter().map(|c| c.card).product()
    }
}

/// Odometer increment over a mixed-radix index (last position fastest).
pub(crate) fn advance(idx: &mut [usize], vars: &[VarId]) {
    for i in (0..idx.len()).rev() {
        idx[i] += 1;
        if idx[i] < vars[i].card {
            return;
        }
        idx[i] = 0;
    }
}

/// A probability tensor over an ordered set of named variables.
#[derive(Clone, Debug, PartialEq)]
pub struct JointDist {
    vars: Vec<VarId>,
    probs: Vec<f64>,
}

impl JointDist {
    pub fn new(vars: Vec<VarId>, probs: Vec<f64>) -> Result<Self, ProbError> {
        check_unique(&vars)?;
        let size = space_size(&vars)?;
        if probs.len() != size {
            return Err(ProbError::ShapeMismatch { expected: size, got: probs.len() });
        }
        let mut sum = 0.0;
        for (i, &p) in probs.iter().enumerate() {
            if !(p >= 0.0) || !p.is_finite() {
                return Err(ProbError::BadEntry { index: i, value: p });
            }
            sum += p;
        }
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(ProbError::NotNormalized(sum));
        }
        Ok(JointDist { vars, probs })
    }

    /// Normalizes non-negative weights into a distribution.
    pub fn from_weights(vars: Vec<VarId>, weights: Vec<f64>) -> Result<Self, ProbError> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) || !total.is_finite() {
            return Err(ProbError::NotNormalized(total));
        }
        Self::new(vars, weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(vars: Vec<VarId>) -> Result<Self, ProbError> {
        let size = space_size(&vars)?;
        Self::new(vars, vec![1.0 / size as f64; size])
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn var(&self, name: &str) -> Result<&VarId, ProbError> {
        self.vars
            .iter()
            .find(|v| v.name == name)
            .ok_or_else(|| ProbError::UnknownVar(name.to_string()))
    }

    pub fn position(&self, name: &str) -> Result<usize, ProbError> {
        self.vars
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| ProbError::UnknownVar(name.to_string()))
    }

    /// Probability at a full multi-index.
    pub fn get(&self, idx: &[usize]) -> f64 {
        let s = strides(&self.vars);
        let flat: usize = idx.iter().zip(&s).map(|(i, st)| i * st).sum();
        self.probs[flat]
    }

    fn positions(&self, names: &[&str]) -> Result<Vec<usize>, ProbError> {
        let mut out = Vec::with_capacity(names.len());
        for n in names {
            let p = self.position(n)?;
            if out.contains(&p) {
                return Err(ProbError::DuplicateVar(n.to_string()));
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Marginal over `keep`; the result lists variables in this tensor's order.
    pub fn marginalize(&self, keep: &[&str]) -> Result<JointDist, ProbError> {
        if keep.is_empty() {
            return Err(ProbError::EmptySet);
        }
        let mut pos = self.positions(keep)?;
        pos.sort_unstable();
        Ok(self.marginal_sorted(&pos))
    }

    fn marginal_sorted(&self, pos: &[usize]) -> JointDist {
        let out_vars: Vec<VarId> = pos.iter().map(|&p| self.vars[p].clone()).collect();
        let out_strides = strides(&out_vars);
        let mut map_stride = vec![0; self.vars.len()];
        for (k, &p) in pos.iter().enumerate() {
            map_stride[p] = out_strides[k];
        }
        let size: usize = out_vars.iter().map(|v| v.card).product();
        let mut out = vec![0.0; size];
        let mut idx = vec![0; self.vars.len()];
        let mut off = 0usize;
        for &p in &self.probs {
            out[off] += p;
            // odometer with incremental output offset
            for i in (0..idx.len()).rev() {
                idx[i] += 1;
                off += map_stride[i];
                if idx[i] < self.vars[i].card {
                    break;
                }
                off -= map_stride[i] * idx[i];
                idx[i] = 0;
            }
        }
        JointDist { vars: out_vars, probs: out }
    }

    /// Joint entropy H(set) in bits; the empty set has entropy zero.
    pub fn entropy(&self, set: &[&str]) -> Result<f64, ProbError> {
        if set.is_empty() {
            return Ok(0.0);
        }
        let mut pos = self.positions(set)?;
        pos.sort_unstable();
        if pos.len() == self.vars.len() {
            return Ok(plogp_sum(self.probs.iter().copied()).max(0.0));
        }
        Ok(plogp_sum(self.marginal_sorted(&pos).probs).max(0.0))
    }

    /// H(targets | given) in bits.
    pub fn condition_entropy(&self, targets: &[&str], given: &[&str]) -> Result<f64, ProbError> {
        if targets.is_empty() {
            return Err(ProbError::EmptySet);
        }
        disjoint(&[targets, given])?;
        let joint: Vec<&str> = targets.iter().chain(given).copied().collect();
        let h = self.entropy(&joint)? - self.entropy(given)?;
        Ok(h.max(0.0))
    }

    /// I(a ; b | given) in bits.
    pub fn mutual_info(&self, a: &[&str], b: &[&str], given: &[&str]) -> Result<f64, ProbError> {
        if a.is_empty() || b.is_empty() {
            return Err(ProbError::EmptySet);
        }
        disjoint(&[a, b, given])?;
        let ag: Vec<&str> = a.iter().chain(given).copied().collect();
        let bg: Vec<&str> = b.iter().chain(given).copied().collect();
        let abg: Vec<&str> = a.iter().chain(b).chain(given).copied().collect();
        let i = self.entropy(&ag)? + self.entropy(&bg)? - self.entropy(&abg)? - self.entropy(given)?;
        if (-MI_CLAMP..0.0).contains(&i) {
            Ok(0.0)
        } else {
            Ok(i)
        }
    }

    /// Extends the distribution by a conditional kernel: the result is the
    /// joint over `self.vars` followed by the kernel's children.
    pub fn compose(&self, kernel: &Kernel) -> Result<JointDist, ProbError> {
        let parent_pos = {
            let names: Vec<&str> = kernel.parents.iter().map(String::as_str).collect();
            self.positions(&names)?
        };
        for c in &kernel.children {
            if self.vars.iter().any(|v| v.name == c.name) {
                return Err(ProbError::DuplicateVar(c.name.clone()));
            }
        }
        let parent_vars: Vec<VarId> = parent_pos.iter().map(|&p| self.vars[p].clone()).collect();
        let n_rows: usize = parent_vars.iter().map(|v| v.card).product();
        let width = kernel.width();
        if kernel.rows.len() != n_rows * width {
            return Err(ProbError::ShapeMismatch {
                expected: n_rows * width,
                got: kernel.rows.len(),
            });
        }
        let pstrides = strides(&parent_vars);
        let mut vars = self.vars.clone();
        vars.extend(kernel.children.iter().cloned());
        space_size(&vars)?;
        let mut probs = Vec::with_capacity(self.probs.len() * width);
        let mut idx = vec![0; self.vars.len()];
        for &p in &self.probs {
            let row: usize = parent_pos.iter().zip(&pstrides).map(|(&q, s)| idx[q] * s).sum();
            let r = &kernel.rows[row * width..(row + 1) * width];
            probs.extend(r.iter().map(|k| p * k));
            advance(&mut idx, &self.vars);
        }
        Ok(JointDist { vars, probs })
    }

    /// Reorders the variables (a permutation of the current names).
    pub fn reorder(&self, order: &[&str]) -> Result<JointDist, ProbError> {
        if order.len() != self.vars.len() {
            return Err(ProbError::ShapeMismatch { expected: self.vars.len(), got: order.len() });
        }
        let pos = self.positions(order)?;
        let out_vars: Vec<VarId> = pos.iter().map(|&p| self.vars[p].clone()).collect();
        let out_strides = strides(&out_vars);
        let mut map_stride = vec![0; self.vars.len()];
        for (k, &p) in pos.iter().enumerate() {
            map_stride[p] = out_strides[k];
        }
        let mut out = vec![0.0; self.probs.len()];
        let mut idx = vec![0; self.vars.len()];
        for &p in &self.probs {
            let off: usize = idx.iter().zip(&map_stride).map(|(i, s)| i * s).sum();
            out[off] = p;
            advance(&mut idx, &self.vars);
        }
        Ok(JointDist { vars: out_vars, probs: out })
    }

    /// Conditional distribution of `child` given `parents` as a kernel. Rows
    /// whose conditioning event has zero probability are filled uniformly.
    pub fn conditional(&self, parents: &[&str], child: &str) -> Result<Kernel, ProbError> {
        let mut keep: Vec<&str> = parents.to_vec();
        keep.push(child);
        let m = self.reorder_subset(&keep)?;
        let cvar = self.var(child)?.clone();
        let width = cvar.card;
        let mut rows = Vec::with_capacity(m.probs.len());
        for chunk in m.probs.chunks(width) {
            let s: f64 = chunk.iter().sum();
            if s > 0.0 {
                rows.extend(chunk.iter().map(|p| p / s));
            } else {
                rows.extend(std::iter::repeat_n(1.0 / width as f64, width));
            }
        }
        Kernel::new(parents, cvar, rows)
    }

    /// The same tensor with variable `from` renamed to `to`.
    pub fn rename(&self, from: &str, to: &str) -> Result<JointDist, ProbError> {
        let p = self.position(from)?;
        if from != to && self.vars.iter().any(|v| v.name == to) {
            return Err(ProbError::DuplicateVar(to.to_string()));
        }
        let mut out = self.clone();
        out.vars[p].name = to.to_string();
        Ok(out)
    }

    /// Marginal over `keep` with variables in the order given.
    pub fn reorder_subset(&self, keep: &[&str]) -> Result<JointDist, ProbError> {
        self.marginalize(keep)?.reorder(keep)
    }
}

fn disjoint(sets: &[&[&str]]) -> Result<(), ProbError> {
    let mut seen = HashSet::new();
    for s in sets {
        for n in *s {
            if !seen.insert(*n) {
                return Err(ProbError::Overlap(n.to_string()));
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(name: &str, card: usize) -> VarId {
        VarId::new(name, card).unwrap()
    }

    fn bsc_joint(px0: f64, eps: f64) -> JointDist {
        let px = JointDist::new(vec![v("X", 2)], vec![px0, 1.0 - px0]).unwrap();
        let k = Kernel::new(&["X"], v("Y", 2), vec![1.0 - eps, eps, eps, 1.0 - eps]).unwrap();
        px.compose(&k).unwrap()
    }

    #[test]
    fn marginal_of_uniform_pair() {
        let d = JointDist::uniform(vec![v("X", 2), v("Y", 2)]).unwrap();
        let m = d.marginalize(&["X"]).unwrap();
        assert_eq!(m.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn marginal_through_bsc() {
        let d = bsc_joint(0.3, 0.1);
        let m = d.marginalize(&["Y"]).unwrap();
        assert!((m.probs()[0] - 0.34).abs() < 1e-12);
        assert!((m.probs()[1] - 0.66).abs() < 1e-12);
    }

    #[test]
    fn marginal_keep_all_is_identity() {
        let d = bsc_joint(0.3, 0.1);
        assert_eq!(d.marginalize(&["Y", "X"]).unwrap(), d);
    }

    #[test]
    fn marginal_unknown_name() {
        let d = bsc_joint(0.3, 0.1);
        assert_eq!(d.marginalize(&["Q"]), Err(ProbError::UnknownVar("Q".into())));
    }

    #[test]
    fn conditional_entropies() {
        let d = JointDist::uniform(vec![v("X", 2), v("Y", 2)]).unwrap();
        assert!((d.condition_entropy(&["X"], &["Y"]).unwrap() - 1.0).abs() < 1e-12);
        let eq = JointDist::new(vec![v("X", 2), v("Y", 2)], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!(eq.condition_entropy(&["X"], &["Y"]).unwrap().abs() < 1e-12);
        // h(0.11) = 0.4999159...
        let b = bsc_joint(0.5, 0.11);
        let h = b.condition_entropy(&["X"], &["Y"]).unwrap();
        assert!((h - 0.499_915_958_164_528_7).abs() < 1e-12, "{h}");
        assert!(matches!(
            b.condition_entropy(&["X"], &["X"]),
            Err(ProbError::Overlap(_))
        ));
    }

    #[test]
    fn mutual_informations() {
        let d = JointDist::uniform(vec![v("X", 2), v("Y", 3)]).unwrap();
        assert_eq!(d.mutual_info(&["X"], &["Y"], &[]).unwrap(), 0.0);
        let eq = JointDist::new(vec![v("X", 2), v("Y", 2)], vec![0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((eq.mutual_info(&["X"], &["Y"], &[]).unwrap() - 1.0).abs() < 1e-12);
        let b = bsc_joint(0.5, 0.11);
        let i = b.mutual_info(&["X"], &["Y"], &[]).unwrap();
        assert!((i - 0.500_084_041_835_471_3).abs() < 1e-12, "{i}");
        assert!(matches!(
            b.mutual_info(&["X"], &["Y"], &["X"]),
            Err(ProbError::Overlap(_))
        ));
    }

    #[test]
    fn compose_identity_and_constant() {
        let x = JointDist::uniform(vec![v("X", 2)]).unwrap();
        let id = Kernel::new(&["X"], v("Y", 2), vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let j = x.compose(&id).unwrap();
        assert!((j.mutual_info(&["X"], &["Y"], &[]).unwrap() - 1.0).abs() < 1e-12);
        let c = Kernel::new(&["X"], v("Y", 3), vec![0.2, 0.3, 0.5, 0.2, 0.3, 0.5]).unwrap();
        let j = x.compose(&c).unwrap();
        assert_eq!(j.mutual_info(&["X"], &["Y"], &[]).unwrap(), 0.0);
        assert_eq!(j.marginalize(&["X"]).unwrap(), x);
    }

    #[test]
    fn compose_rejects_bad_row() {
        let err = Kernel::new(&["X"], v("Y", 2), vec![1.0, 0.0, 0.4, 0.5]).unwrap_err();
        assert!(matches!(err, ProbError::NonStochasticRow { row: 1, .. }));
    }

    #[test]
    fn markov_chain_by_construction() {
        // p(u,x1,v) p(x2|v): I(U,X1;X2|V) = 0
        let uxv = JointDist::from_weights(
            vec![v("U", 2), v("X1", 2), v("V", 3)],
            vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0],
        )
        .unwrap();
        let k = Kernel::new(&["V"], v("X2", 2), vec![0.9, 0.1, 0.3, 0.7, 0.5, 0.5]).unwrap();
        let j = uxv.compose(&k).unwrap();
        let i = j.mutual_info(&["U", "X1"], &["X2"], &["V"]).unwrap();
        assert!(i.abs() < 1e-10);
    }

    #[test]
    fn size_cap() {
        let vars: Vec<VarId> = (0..25).map(|i| v(&format!("B{i}"), 2)).collect();
        assert!(matches!(JointDist::uniform(vars), Err(ProbError::TooLarge(_))));
    }

    #[test]
    fn conditional_round_trip() {
        let d = bsc_joint(0.3, 0.1);
        let k = d.conditional(&["X"], "Y").unwrap();
        let back = d.marginalize(&["X"]).unwrap().compose(&k).unwrap();
        for (a, b) in back.probs().iter().zip(d.probs()) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}
