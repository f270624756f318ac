//! The cognitive interference channel p(y,z|x1,x2), its conditional
//! marginals, degradedness tests and a quantized Gaussian model.

use statrs::function::erf::erfc;
use thiserror::Error;

use crate::lp::{LinearProgram, LpOutcome};
use crate::probability::{Kernel, ProbError, VarId, MAX_ENTRIES, SUM_TOL};

/// Default tolerance for the linear feasibility of stochastic degradedness.
pub const FEASIBILITY_TOL: f64 = 1e-7;

pub const X1: &str = "X1";
pub const X2: &str = "X2";
pub const Y: &str = "Y";
pub const Z: &str = "Z";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChannelError {
    #[error("alphabet {0} has zero size")]
    EmptyAlphabet(&'static str),
    #[error("transition tensor has {got} entries, expected {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("row {row} (x1={x1}, x2={x2}) is not a probability vector (sum {sum})")]
    NonStochasticRow { row: usize, x1: usize, x2: usize, sum: f64 },
    #[error("channel has {0} entries, more than supported")]
    TooLarge(usize),
    #[error("invalid gaussian parameters: {0}")]
    BadGaussian(String),
    #[error("degenerate quantization grid: {0}")]
    BadGrid(String),
    #[error(transparent)]
    Prob(#[from] ProbError),
}

/// A conditional table p(out | x1, x2), rows indexed by (x1, x2) with x2 fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct CondTable {
    pub card_x1: usize,
    pub card_x2: usize,
    pub card_out: usize,
    pub data: Vec<f64>,
}

impl CondTable {
    pub fn get(&self, x1: usize, x2: usize, o: usize) -> f64 {
        self.data[(x1 * self.card_x2 + x2) * self.card_out + o]
    }

    pub fn row(&self, x1: usize, x2: usize) -> &[f64] {
        let s = (x1 * self.card_x2 + x2) * self.card_out;
        &self.data[s..s + self.card_out]
    }

    pub fn from_fn(
        card_x1: usize,
        card_x2: usize,
        card_out: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(card_x1 * card_x2 * card_out);
        for a in 0..card_x1 {
            for b in 0..card_x2 {
                for o in 0..card_out {
                    data.push(f(a, b, o));
                }
            }
        }
        CondTable { card_x1, card_x2, card_out, data }
    }
}

/// Which output is a garbling of the other, given x1.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    /// Z is obtained from (Y, X1): p(y,z|x1,x2) = p(y|x1,x2) q(z|y,x1).
    ZgivenY,
    /// Y is obtained from (Z, X1): p(y,z|x1,x2) = p(z|x1,x2) q(y|z,x1).
    YgivenZ,
}

/// A kernel q(to | from, x1), indexed [x1][from][to].
#[derive(Clone, Debug, PartialEq)]
pub struct DegradingKernel {
    pub direction: Direction,
    pub card_x1: usize,
    pub card_from: usize,
    pub card_to: usize,
    pub q: Vec<f64>,
}

impl DegradingKernel {
    pub fn get(&self, x1: usize, from: usize, to: usize) -> f64 {
        self.q[(x1 * self.card_from + from) * self.card_to + to]
    }

    /// Σ_from p(from|x1,x2) q(to|from,x1).
    pub fn contract(&self, source: &CondTable) -> CondTable {
        CondTable::from_fn(source.card_x1, source.card_x2, self.card_to, |a, b, t| {
            (0..self.card_from).map(|f| source.get(a, b, f) * self.get(a, f, t)).sum()
        })
    }
}

/// The channel p(y,z|x1,x2) stored as [x1][x2][y][z].
#[derive(Clone, Debug, PartialEq)]
pub struct CicChannel {
    x1: VarId,
    x2: VarId,
    y: VarId,
    z: VarId,
    trans: Vec<f64>,
}

impl CicChannel {
    pub fn new(
        card_x1: usize,
        card_x2: usize,
        card_y: usize,
        card_z: usize,
        trans: Vec<f64>,
    ) -> Result<Self, ChannelError> {
        for (c, n) in [(card_x1, X1), (card_x2, X2), (card_y, Y), (card_z, Z)] {
            if c == 0 {
                return Err(ChannelError::EmptyAlphabet(n));
            }
        }
        let size = card_x1
            .checked_mul(card_x2)
            .and_then(|s| s.checked_mul(card_y))
            .and_then(|s| s.checked_mul(card_z))
            .filter(|&s| s <= MAX_ENTRIES)
            .ok_or(ChannelError::TooLarge(usize::MAX))?;
        if trans.len() != size {
            return Err(ChannelError::ShapeMismatch { expected: size, got: trans.len() });
        }
        let width = card_y * card_z;
        for (row, r) in trans.chunks(width).enumerate() {
            let sum: f64 = r.iter().sum();
            let bad = r.iter().any(|p| !(*p >= 0.0) || !p.is_finite());
            if bad || (sum - 1.0).abs() > SUM_TOL {
                return Err(ChannelError::NonStochasticRow {
                    row,
                    x1: row / card_x2,
                    x2: row % card_x2,
                    sum,
                });
            }
        }
        Ok(CicChannel {
            x1: VarId::new(X1, card_x1)?,
            x2: VarId::new(X2, card_x2)?,
            y: VarId::new(Y, card_y)?,
            z: VarId::new(Z, card_z)?,
            trans,
        })
    }

    pub fn from_fn(
        card_x1: usize,
        card_x2: usize,
        card_y: usize,
        card_z: usize,
        mut f: impl FnMut(usize, usize, usize, usize) -> f64,
    ) -> Result<Self, ChannelError> {
        let mut trans = Vec::with_capacity(card_x1 * card_x2 * card_y * card_z);
        for a in 0..card_x1 {
            for b in 0..card_x2 {
                for y in 0..card_y {
                    for z in 0..card_z {
                        trans.push(f(a, b, y, z));
                    }
                }
            }
        }
        Self::new(card_x1, card_x2, card_y, card_z, trans)
    }

    /// Channel with conditionally independent outputs.
    pub fn from_marginals(py: &CondTable, pz: &CondTable) -> Result<Self, ChannelError> {
        Self::from_fn(py.card_x1, py.card_x2, py.card_out, pz.card_out, |a, b, y, z| {
            py.get(a, b, y) * pz.get(a, b, z)
        })
    }

    /// Builds p(y|x1,x2) q(z|y,x1) (or the mirror image for `YgivenZ`, where
    /// `source` is p(z|x1,x2)).
    pub fn degraded(source: &CondTable, q: &DegradingKernel) -> Result<Self, ChannelError> {
        match q.direction {
            Direction::ZgivenY => {
                Self::from_fn(source.card_x1, source.card_x2, source.card_out, q.card_to, |a, b, y, z| {
                    source.get(a, b, y) * q.get(a, y, z)
                })
            }
            Direction::YgivenZ => {
                Self::from_fn(source.card_x1, source.card_x2, q.card_to, source.card_out, |a, b, y, z| {
                    source.get(a, b, z) * q.get(a, z, y)
                })
            }
        }
    }

    pub fn card_x1(&self) -> usize {
        self.x1.card()
    }
    pub fn card_x2(&self) -> usize {
        self.x2.card()
    }
    pub fn card_y(&self) -> usize {
        self.y.card()
    }
    pub fn card_z(&self) -> usize {
        self.z.card()
    }

    pub fn trans(&self) -> &[f64] {
        &self.trans
    }

    pub fn p(&self, x1: usize, x2: usize, y: usize, z: usize) -> f64 {
        let cy = self.card_y();
        let cz = self.card_z();
        self.trans[((x1 * self.card_x2() + x2) * cy + y) * cz + z]
    }

    /// The channel as a probability kernel (X1, X2) -> (Y, Z).
    pub fn kernel(&self) -> Kernel {
        Kernel::multi(&[X1, X2], vec![self.y.clone(), self.z.clone()], self.trans.clone())
            .expect("validated on construction")
    }

    /// p(y|x1,x2) and p(z|x1,x2).
    pub fn marginal_channels(&self) -> (CondTable, CondTable) {
        let (cy, cz) = (self.card_y(), self.card_z());
        let py = CondTable::from_fn(self.card_x1(), self.card_x2(), cy, |a, b, y| {
            (0..cz).map(|z| self.p(a, b, y, z)).sum()
        });
        let pz = CondTable::from_fn(self.card_x1(), self.card_x2(), cz, |a, b, z| {
            (0..cy).map(|y| self.p(a, b, y, z)).sum()
        });
        (py, pz)
    }

    /// The same channel with the roles of Y and Z exchanged.
    pub fn swap_outputs(&self) -> CicChannel {
        Self::from_fn(self.card_x1(), self.card_x2(), self.card_z(), self.card_y(), |a, b, z, y| {
            self.p(a, b, y, z)
        })
        .expect("permutation of a valid channel")
    }

    /// Recovers q(z|y,x1) with p(y,z|x1,x2) = p(y|x1,x2) q(z|y,x1) when the
    /// factorization holds within `tol`.
    pub fn physical_kernel(&self, direction: Direction, tol: f64) -> Option<DegradingKernel> {
        let ch = match direction {
            Direction::ZgivenY => self.clone(),
            Direction::YgivenZ => self.swap_outputs(),
        };
        let (py, _) = ch.marginal_channels();
        let (c1, c2, cy, cz) = (ch.card_x1(), ch.card_x2(), ch.card_y(), ch.card_z());
        let mut q = vec![0.0; c1 * cy * cz];
        for a in 0..c1 {
            for y in 0..cy {
                let (best, pmax) = (0..c2)
                    .map(|b| (b, py.get(a, b, y)))
                    .fold((0, -1.0), |acc, v| if v.1 > acc.1 { v } else { acc });
                let dst = &mut q[(a * cy + y) * cz..(a * cy + y + 1) * cz];
                if pmax > tol {
                    for (z, d) in dst.iter_mut().enumerate() {
                        *d = ch.p(a, best, y, z) / pmax;
                    }
                } else {
                    dst.fill(1.0 / cz as f64);
                }
            }
        }
        let kernel = DegradingKernel { direction, card_x1: c1, card_from: cy, card_to: cz, q };
        for a in 0..c1 {
            for b in 0..c2 {
                for y in 0..cy {
                    for z in 0..cz {
                        let fact = py.get(a, b, y) * kernel.get(a, y, z);
                        if (ch.p(a, b, y, z) - fact).abs() > tol {
                            return None;
                        }
                    }
                }
            }
        }
        Some(kernel)
    }

    /// p(y,z|x1,x2) = p(y|x1,x2) p(z|y,x1) within `tol`.
    pub fn check_physical_degraded_1(&self, tol: f64) -> bool {
        self.physical_kernel(Direction::ZgivenY, tol).is_some()
    }

    /// p(y,z|x1,x2) = p(z|x1,x2) p(y|z,x1) within `tol`.
    pub fn check_physical_degraded_2(&self, tol: f64) -> bool {
        self.physical_kernel(Direction::YgivenZ, tol).is_some()
    }

    /// Searches for q with Σ_y p(y|x1,x2) q(z|y,x1) = p(z|x1,x2) (or the
    /// mirror image). Each x1 is an independent linear program minimizing the
    /// largest residual; the channel is degraded when that residual is at
    /// most `tol` for every x1.
    pub fn check_stochastic_degraded(
        &self,
        direction: Direction,
        tol: f64,
    ) -> (bool, Option<DegradingKernel>) {
        let (py, pz) = self.marginal_channels();
        let (src, dst) = match direction {
            Direction::ZgivenY => (py, pz),
            Direction::YgivenZ => (pz, py),
        };
        let (c1, c2, cf, ct) = (src.card_x1, src.card_x2, src.card_out, dst.card_out);
        let nq = cf * ct;
        let mut q = Vec::with_capacity(c1 * nq);
        for a in 0..c1 {
            let mut lp = LinearProgram::new(nq + 1);
            let mut obj = vec![0.0; nq + 1];
            obj[nq] = 1.0;
            lp.minimize(obj);
            for f in 0..cf {
                let mut row = vec![0.0; nq + 1];
                row[f * ct..(f + 1) * ct].fill(1.0);
                lp.add_eq(row, 1.0);
            }
            for b in 0..c2 {
                for t in 0..ct {
                    let mut row = vec![0.0; nq + 1];
                    for f in 0..cf {
                        row[f * ct + t] = src.get(a, b, f);
                    }
                    let target = dst.get(a, b, t);
                    let mut pos = row.clone();
                    pos[nq] = -1.0;
                    lp.add_le(pos, target);
                    let mut neg: Vec<f64> = row.iter().map(|v| -v).collect();
                    neg[nq] = -1.0;
                    lp.add_le(neg, -target);
                }
            }
            match lp.solve() {
                LpOutcome::Optimal { x, value } if value <= tol => {
                    for f in 0..cf {
                        let r = &x[f * ct..(f + 1) * ct];
                        let s: f64 = r.iter().sum();
                        q.extend(r.iter().map(|v| v / s));
                    }
                }
                _ => return (false, None),
            }
        }
        let kernel = DegradingKernel { direction, card_x1: c1, card_from: cf, card_to: ct, q };
        (true, Some(kernel))
    }
}

/// Parameters of the Gaussian channel Y = X1 + aX2 + N1, Z = bX1 + X2 + N2
/// with unit noise variances.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianParams {
    pub a: f64,
    pub b: f64,
    pub p1: f64,
    pub p2: f64,
}

impl GaussianParams {
    pub fn new(a: f64, b: f64, p1: f64, p2: f64) -> Result<Self, ChannelError> {
        if ![a, b, p1, p2].iter().all(|v| v.is_finite()) {
            return Err(ChannelError::BadGaussian("parameters must be finite".into()));
        }
        if p1 < 0.0 || p2 < 0.0 {
            return Err(ChannelError::BadGaussian(format!("negative power (p1={p1}, p2={p2})")));
        }
        Ok(GaussianParams { a, b, p1, p2 })
    }
}

/// Quantization of the Gaussian channel: finite input levels and equal-width
/// output bins on [-out_bound, out_bound], with the two outer bins extended to
/// infinity.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianGrid {
    pub x1_levels: Vec<f64>,
    pub x2_levels: Vec<f64>,
    pub out_bins: usize,
    pub out_bound: f64,
}

impl GaussianGrid {
    /// Equally spaced input levels spanning ±`span` standard deviations of
    /// each input's power.
    pub fn uniform(g: &GaussianParams, levels: usize, span: f64, out_bins: usize, out_bound: f64) -> Self {
        let lin = |p: f64| -> Vec<f64> {
            let r = span * p.sqrt();
            (0..levels)
                .map(|i| if levels > 1 { -r + 2.0 * r * i as f64 / (levels - 1) as f64 } else { 0.0 })
                .collect()
        };
        GaussianGrid { x1_levels: lin(g.p1), x2_levels: lin(g.p2), out_bins, out_bound }
    }

    fn validate(&self) -> Result<(), ChannelError> {
        if self.x1_levels.len() < 2 || self.x2_levels.len() < 2 {
            return Err(ChannelError::BadGrid("need at least two input levels".into()));
        }
        if self.out_bins < 2 {
            return Err(ChannelError::BadGrid("need at least two output bins".into()));
        }
        if !(self.out_bound.is_finite() && self.out_bound > 0.0) {
            return Err(ChannelError::BadGrid(format!("output bound {}", self.out_bound)));
        }
        if self.x1_levels.iter().chain(&self.x2_levels).any(|v| !v.is_finite()) {
            return Err(ChannelError::BadGrid("non-finite input level".into()));
        }
        Ok(())
    }

    /// Probabilities of each output bin for a unit-variance Gaussian centred
    /// at `mean`, renormalized.
    fn bin_probs(&self, mean: f64) -> Vec<f64> {
        let n = self.out_bins;
        let width = 2.0 * self.out_bound / n as f64;
        let cdf = |x: f64| 0.5 * erfc(-(x - mean) / std::f64::consts::SQRT_2);
        let mut probs = Vec::with_capacity(n);
        let mut lo = 0.0;
        for k in 0..n {
            let hi = if k + 1 == n { 1.0 } else { cdf(-self.out_bound + width * (k + 1) as f64) };
            probs.push((hi - lo).max(0.0));
            lo = hi;
        }
        let s: f64 = probs.iter().sum();
        probs.iter().map(|p| p / s).collect()
    }
}

/// Quantizes the Gaussian channel onto `grid`.
pub fn discretize_gaussian(g: &GaussianParams, grid: &GaussianGrid) -> Result<CicChannel, ChannelError> {
    grid.validate()?;
    let (n1, n2, nb) = (grid.x1_levels.len(), grid.x2_levels.len(), grid.out_bins);
    let py = CondTable::from_fn(n1, n2, nb, |_, _, _| 0.0);
    let mut py = py;
    let mut pz = py.clone();
    for (i, &x1) in grid.x1_levels.iter().enumerate() {
        for (j, &x2) in grid.x2_levels.iter().enumerate() {
            let off = (i * n2 + j) * nb;
            py.data[off..off + nb].copy_from_slice(&grid.bin_probs(x1 + g.a * x2));
            pz.data[off..off + nb].copy_from_slice(&grid.bin_probs(g.b * x1 + x2));
        }
    }
    CicChannel::from_marginals(&py, &pz)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bsc(e: f64) -> [f64; 4] {
        [1.0 - e, e, e, 1.0 - e]
    }

    /// Y a BSC(0.1) of x2, Z = Y through a BSC(0.2) that also flips when x1=1.
    fn composed_degraded_1() -> (CondTable, DegradingKernel, CicChannel) {
        let py = CondTable::from_fn(2, 2, 2, |_, b, y| bsc(0.1)[b * 2 + y]);
        let q = DegradingKernel {
            direction: Direction::ZgivenY,
            card_x1: 2,
            card_from: 2,
            card_to: 2,
            q: vec![0.8, 0.2, 0.2, 0.8, 0.3, 0.7, 0.7, 0.3],
        };
        let ch = CicChannel::degraded(&py, &q).unwrap();
        (py, q, ch)
    }

    #[test]
    fn rejects_non_stochastic_row() {
        let err = CicChannel::new(1, 2, 1, 2, vec![0.5, 0.5, 0.5, 0.6]).unwrap_err();
        assert!(matches!(err, ChannelError::NonStochasticRow { row: 1, x1: 0, x2: 1, .. }));
    }

    #[test]
    fn marginals_of_product_channel() {
        let py = CondTable::from_fn(2, 2, 2, |a, b, y| bsc(0.1 + 0.1 * a as f64)[b * 2 + y]);
        let pz = CondTable::from_fn(2, 2, 3, |a, _, z| [0.2, 0.3, 0.5][(z + a) % 3]);
        let ch = CicChannel::from_marginals(&py, &pz).unwrap();
        let (my, mz) = ch.marginal_channels();
        for (u, v) in my.data.iter().zip(&py.data).chain(mz.data.iter().zip(&pz.data)) {
            assert!((u - v).abs() < 1e-15);
        }
    }

    #[test]
    fn marginal_z_is_matrix_product() {
        let (py, q, ch) = composed_degraded_1();
        let (_, pz) = ch.marginal_channels();
        let expected = q.contract(&py);
        for (u, v) in pz.data.iter().zip(&expected.data) {
            assert!((u - v).abs() < 1e-15);
        }
    }

    #[test]
    fn deterministic_marginals_are_indicators() {
        let ch = CicChannel::from_fn(2, 2, 2, 2, |_, b, y, z| if y == b && z == b { 1.0 } else { 0.0 })
            .unwrap();
        let (py, pz) = ch.marginal_channels();
        for b in 0..2 {
            assert_eq!(py.row(1, b)[b], 1.0);
            assert_eq!(pz.row(0, b)[b], 1.0);
        }
    }

    #[test]
    fn physical_degradedness() {
        let (_, q, ch) = composed_degraded_1();
        let k = ch.physical_kernel(Direction::ZgivenY, 1e-9).unwrap();
        for (u, v) in k.q.iter().zip(&q.q) {
            assert!((u - v).abs() < 1e-12);
        }
        assert!(ch.check_physical_degraded_1(1e-9));

        // Z = X2 exactly, Y uniform noise.
        let ce = CicChannel::from_fn(2, 2, 2, 2, |_, b, _, z| if z == b { 0.5 } else { 0.0 }).unwrap();
        assert!(!ce.check_physical_degraded_1(1e-9));
        assert!(ce.check_physical_degraded_2(1e-9));
        assert!(!ce.swap_outputs().check_physical_degraded_2(1e-9));

        // A constant Y is trivially a garbling of Z, and a constant Z of Y.
        let trivial_y = CicChannel::from_fn(2, 3, 1, 2, |a, b, _, z| {
            [0.3, 0.7][(z + a + b) % 2]
        })
        .unwrap();
        assert!(trivial_y.check_physical_degraded_2(1e-12));
        assert!(trivial_y.swap_outputs().check_physical_degraded_1(1e-12));
        // but Z still depends on x2 beyond (y, x1)
        assert!(!trivial_y.check_physical_degraded_1(1e-12));
        let flat = CicChannel::from_fn(2, 3, 1, 2, |a, _, _, z| [0.3, 0.7][(z + a) % 2]).unwrap();
        assert!(flat.check_physical_degraded_1(1e-12));
    }

    #[test]
    fn stochastic_includes_physical() {
        let (_, _, ch) = composed_degraded_1();
        let (ok, w) = ch.check_stochastic_degraded(Direction::ZgivenY, FEASIBILITY_TOL);
        assert!(ok);
        let (py, pz) = ch.marginal_channels();
        let back = w.unwrap().contract(&py);
        for (u, v) in back.data.iter().zip(&pz.data) {
            assert!((u - v).abs() < 1e-7);
        }
    }

    #[test]
    fn stochastic_erasure_garbling() {
        // Y = x2 through BSC(0.1); Z erases Y w.p. 0.4 (z=2), not physically
        // degraded because Z is generated independently from x2.
        let py = CondTable::from_fn(1, 2, 2, |_, b, y| bsc(0.1)[b * 2 + y]);
        let q = DegradingKernel {
            direction: Direction::ZgivenY,
            card_x1: 1,
            card_from: 2,
            card_to: 3,
            q: vec![0.6, 0.0, 0.4, 0.0, 0.6, 0.4],
        };
        let pz = q.contract(&py);
        let ch = CicChannel::from_marginals(&py, &pz).unwrap();
        assert!(!ch.check_physical_degraded_1(1e-9));
        let (ok, w) = ch.check_stochastic_degraded(Direction::ZgivenY, FEASIBILITY_TOL);
        assert!(ok);
        let back = w.unwrap().contract(&py);
        for (u, v) in back.data.iter().zip(&pz.data) {
            assert!((u - v).abs() < 1e-7);
        }
    }

    /// Smallest achievable max-residual for binary q, by exhaustive grid.
    fn grid_min_residual(py: &CondTable, pz: &CondTable) -> f64 {
        let mut best = f64::INFINITY;
        let steps = 200;
        for i in 0..=steps {
            for j in 0..=steps {
                let q0 = i as f64 / steps as f64;
                let q1 = j as f64 / steps as f64;
                let mut worst: f64 = 0.0;
                for b in 0..2 {
                    let z0 = py.get(0, b, 0) * q0 + py.get(0, b, 1) * q1;
                    worst = worst.max((z0 - pz.get(0, b, 0)).abs());
                }
                best = best.min(worst);
            }
        }
        best
    }

    #[test]
    fn stochastic_counterexample() {
        // Z a noiseless copy of x2, Y a BSC(0.3) of x2.
        let py = CondTable::from_fn(1, 2, 2, |_, b, y| bsc(0.3)[b * 2 + y]);
        let pz = CondTable::from_fn(1, 2, 2, |_, b, z| if z == b { 1.0 } else { 0.0 });
        let ch = CicChannel::from_marginals(&py, &pz).unwrap();
        let floor = grid_min_residual(&py, &pz);
        assert!(floor > 0.1, "{floor}");
        let (ok, w) = ch.check_stochastic_degraded(Direction::ZgivenY, FEASIBILITY_TOL);
        assert!(!ok && w.is_none());
        // the other direction holds: Y is a BSC(0.3) of Z
        assert!(ch.check_stochastic_degraded(Direction::YgivenZ, FEASIBILITY_TOL).0);
    }

    #[test]
    fn gaussian_zero_cross_gains() {
        let g = GaussianParams::new(0.0, 0.0, 1.0, 1.0).unwrap();
        let grid = GaussianGrid::uniform(&g, 3, 1.5, 6, 3.0);
        let ch = discretize_gaussian(&g, &grid).unwrap();
        let (py, pz) = ch.marginal_channels();
        for a in 0..3 {
            for b in 1..3 {
                for o in 0..6 {
                    assert!((py.get(a, b, o) - py.get(a, 0, o)).abs() < 1e-15);
                    assert!((pz.get(b, a, o) - pz.get(0, a, o)).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn gaussian_symmetric_roles() {
        let g = GaussianParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let grid = GaussianGrid::uniform(&g, 4, 1.5, 8, 4.0);
        let ch = discretize_gaussian(&g, &grid).unwrap();
        let (py, pz) = ch.marginal_channels();
        for a in 0..4 {
            for b in 0..4 {
                for o in 0..8 {
                    assert!((py.get(a, b, o) - pz.get(b, a, o)).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn gaussian_grid_errors() {
        let g = GaussianParams::new(0.5, 1.0, 1.0, 1.0).unwrap();
        assert!(discretize_gaussian(&g, &GaussianGrid::uniform(&g, 1, 1.0, 4, 3.0)).is_err());
        assert!(discretize_gaussian(&g, &GaussianGrid::uniform(&g, 3, 1.0, 1, 3.0)).is_err());
        assert!(discretize_gaussian(&g, &GaussianGrid::uniform(&g, 3, 1.0, 4, f64::INFINITY)).is_err());
        assert!(GaussianParams::new(0.5, 1.0, -1.0, 1.0).is_err());
    }
}
