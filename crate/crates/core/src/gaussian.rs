//! Closed-form Gaussian capacity-equivocation regions.
//!
//! The channel is Y = X1 + a X2 + N1, Z = b X1 + X2 + N2 with unit-variance
//! noises and input powers P1, P2. For |a| >= 1 the region is a union over the
//! correlation rho of two-dimensional polytopes with R2e = 0; for |a| < 1 it is
//! a union over (rho, beta) of boxes in R1 carrying an equivocation cut. Rates
//! are in bits.

use rayon::prelude::*;
use thiserror::Error;

use crate::channels::{discretize_gaussian, ChannelError, CicChannel, GaussianGrid, GaussianParams, X1, X2};
use crate::polytope::RateSystem;
use crate::probability::{JointDist, Kernel, VarId};
use crate::regions::{mi_profile, CicInputDist, MiProfile, RegionError, R1, R2, R2E, U};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaussianError {
    #[error("|a| = {0} < 1: use the low-a region (region_low_a)")]
    NeedLowA(f64),
    #[error("|a| = {0} >= 1: use the high-a region (region_high_a)")]
    NeedHighA(f64),
    #[error("rho = {0} outside [-1, 1]")]
    BadRho(f64),
    #[error("beta = {0} outside [0, 1]")]
    BadBeta(f64),
    #[error("sweep needs at least 2 steps, got {0}")]
    BadSteps(usize),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Region(#[from] RegionError),
}

fn half_log2(x: f64) -> f64 {
    0.5 * x.log2()
}

fn check_rho(rho: f64) -> Result<(), GaussianError> {
    if (-1.0..=1.0).contains(&rho) {
        Ok(())
    } else {
        Err(GaussianError::BadRho(rho))
    }
}

fn check_beta(beta: f64) -> Result<(), GaussianError> {
    if (0.0..=1.0).contains(&beta) {
        Ok(())
    } else {
        Err(GaussianError::BadBeta(beta))
    }
}

/// Right-hand sides of the |a| >= 1 region for one rho.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HighABounds {
    pub r2: f64,
    /// Sum-rate bound at receiver 2.
    pub sum_z: f64,
    /// Sum-rate bound at receiver 1.
    pub sum_y: f64,
}

impl HighABounds {
    pub fn sum(&self) -> f64 {
        self.sum_z.min(self.sum_y)
    }
}

pub fn high_a_bounds(g: &GaussianParams, rho: f64) -> Result<HighABounds, GaussianError> {
    if g.a.abs() < 1.0 {
        return Err(GaussianError::NeedLowA(g.a.abs()));
    }
    check_rho(rho)?;
    let (p1, p2, a, b) = (g.p1, g.p2, g.a, g.b);
    let cross = 2.0 * rho * (p1 * p2).sqrt();
    Ok(HighABounds {
        r2: half_log2(1.0 + (1.0 - rho * rho) * p2),
        sum_z: half_log2(1.0 + b * b * p1 + p2 + b * cross),
        sum_y: half_log2(1.0 + p1 + a * a * p2 + a * cross),
    })
}

/// Right-hand sides of the |a| < 1 region for one (rho, beta).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowABounds {
    pub r1_y: f64,
    pub r1_z: f64,
    pub r2: f64,
    /// Equivocation bound, clamped at zero.
    pub r2e: f64,
}

impl LowABounds {
    pub fn r1(&self) -> f64 {
        self.r1_y.min(self.r1_z)
    }
}

pub fn low_a_bounds(g: &GaussianParams, rho: f64, beta: f64) -> Result<LowABounds, GaussianError> {
    if g.a.abs() >= 1.0 {
        return Err(GaussianError::NeedHighA(g.a.abs()));
    }
    check_rho(rho)?;
    check_beta(beta)?;
    let (p1, p2, a, b) = (g.p1, g.p2, g.a, g.b);
    let fresh = (1.0 - rho * rho) * p2;
    let cross = 2.0 * rho * (beta * p1 * p2).sqrt();
    let r2 = half_log2(1.0 + fresh);
    Ok(LowABounds {
        r1_y: half_log2(1.0 + (p1 + rho * rho * a * a * p2 + a * cross) / (1.0 + fresh * a * a)),
        r1_z: half_log2(1.0 + (b * b * p1 + rho * rho * p2 + b * cross) / (1.0 + fresh)),
        r2,
        r2e: (r2 - half_log2(1.0 + fresh * a * a)).max(0.0),
    })
}

/// The |a| >= 1 region over (R1, R2); R2e is identically zero.
pub fn region_high_a(g: &GaussianParams, rho: f64) -> Result<RateSystem, GaussianError> {
    let h = high_a_bounds(g, rho)?;
    let mut s = RateSystem::new(&[R1, R2]);
    s.add(&[(R2, 1.0)], h.r2).expect("declared");
    s.add(&[(R1, 1.0), (R2, 1.0)], h.sum_z).expect("declared");
    s.add(&[(R1, 1.0), (R2, 1.0)], h.sum_y).expect("declared");
    Ok(s)
}

/// The |a| < 1 region over (R1, R2, R2e).
pub fn region_low_a(g: &GaussianParams, rho: f64, beta: f64) -> Result<RateSystem, GaussianError> {
    let l = low_a_bounds(g, rho, beta)?;
    let mut s = RateSystem::new(&[R1, R2, R2E]);
    s.add(&[(R1, 1.0)], l.r1_y).expect("declared");
    s.add(&[(R1, 1.0)], l.r1_z).expect("declared");
    s.add(&[(R2, 1.0)], l.r2).expect("declared");
    s.add(&[(R2E, 1.0), (R2, -1.0)], 0.0).expect("declared");
    s.add(&[(R2E, 1.0)], l.r2e).expect("declared");
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianRegionPoint {
    pub rho: f64,
    /// Always 1 in the |a| >= 1 regime.
    pub beta: f64,
    pub r1: f64,
    pub r2: f64,
    pub r2e: f64,
}

/// One member of the union, reduced to what the envelopes need.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ParamRegion {
    pub rho: f64,
    pub beta: f64,
    pub r1_max: f64,
    pub r2_cap: f64,
    /// Sum-rate cap, infinite when absent.
    pub sum_cap: f64,
    pub r2e_cap: f64,
}

impl ParamRegion {
    /// Largest (R2, R2e) available at `r1`, or `None` when `r1` is outside.
    pub fn at(&self, r1: f64) -> Option<(f64, f64)> {
        if r1 < 0.0 || r1 > self.r1_max {
            return None;
        }
        let r2 = self.r2_cap.min(self.sum_cap - r1).max(0.0);
        Some((r2, self.r2e_cap.min(r2)))
    }

    fn vertices(&self) -> Vec<[f64; 3]> {
        let r2 = self.r2_cap.min(self.sum_cap).max(0.0);
        let e = self.r2e_cap.min(r2);
        let mut v = Vec::new();
        if self.sum_cap.is_finite() {
            // R2e = 0 here
            let knee = (self.sum_cap - r2).min(self.r1_max).max(0.0);
            v.extend([[0.0, 0.0, 0.0], [0.0, r2, 0.0], [knee, r2, 0.0], [self.r1_max, 0.0, 0.0]]);
        } else {
            for r1 in [0.0, self.r1_max] {
                v.extend([[r1, 0.0, 0.0], [r1, r2, 0.0], [r1, r2, e], [r1, e, e]]);
            }
        }
        v.sort_by(|a, b| a.partial_cmp(b).unwrap());
        v.dedup();
        v
    }
}

pub fn param_region(g: &GaussianParams, rho: f64, beta: f64) -> Result<ParamRegion, GaussianError> {
    if g.a.abs() >= 1.0 {
        let h = high_a_bounds(g, rho)?;
        Ok(ParamRegion { rho, beta: 1.0, r1_max: h.sum(), r2_cap: h.r2, sum_cap: h.sum(), r2e_cap: 0.0 })
    } else {
        let l = low_a_bounds(g, rho, beta)?;
        Ok(ParamRegion { rho, beta, r1_max: l.r1(), r2_cap: l.r2, sum_cap: f64::INFINITY, r2e_cap: l.r2e })
    }
}

pub const DEFAULT_RHO_STEPS: usize = 401;
pub const DEFAULT_BETA_STEPS: usize = 101;

/// A boundary sample: largest R2 and R2e at a given R1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub r1: f64,
    pub r2: f64,
    pub r2e: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianSweep {
    pub params: GaussianParams,
    pub members: Vec<ParamRegion>,
    /// Vertices of every member region.
    pub points: Vec<GaussianRegionPoint>,
    /// Upper boundary of the union, non-increasing in R1.
    pub boundary: Vec<BoundaryPoint>,
    pub hull_flag: bool,
}

fn grid(steps: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..steps).map(|i| lo + (hi - lo) * i as f64 / (steps - 1) as f64).collect()
}

/// True when the beta sweep can be replaced by beta = 1.
pub fn beta_fixed(g: &GaussianParams) -> bool {
    g.a.abs() >= 1.0 || (g.a > 0.0 && g.b > 0.0)
}

/// Union over a rho grid on [-1, 1] (and a beta grid on [0, 1] when |a| < 1
/// and not both a, b > 0). With `hull` the boundary is replaced by its upper
/// concave envelope.
pub fn sweep_gaussian(
    g: &GaussianParams,
    rho_steps: usize,
    beta_steps: usize,
    hull: bool,
) -> Result<GaussianSweep, GaussianError> {
    if rho_steps < 2 {
        return Err(GaussianError::BadSteps(rho_steps));
    }
    let betas = if beta_fixed(g) {
        vec![1.0]
    } else {
        if beta_steps < 2 {
            return Err(GaussianError::BadSteps(beta_steps));
        }
        grid(beta_steps, 0.0, 1.0)
    };
    let rhos = grid(rho_steps, -1.0, 1.0);
    let mut members = Vec::with_capacity(rhos.len() * betas.len());
    for &rho in &rhos {
        for &beta in &betas {
            members.push(param_region(g, rho, beta)?);
        }
    }
    let points = members
        .iter()
        .flat_map(|m| {
            m.vertices()
                .into_iter()
                .map(|v| GaussianRegionPoint { rho: m.rho, beta: m.beta, r1: v[0], r2: v[1], r2e: v[2] })
        })
        .collect();
    let raw = envelope(&members);
    let boundary = if hull { concave_envelope(&raw) } else { raw };
    Ok(GaussianSweep { params: *g, members, points, boundary, hull_flag: hull })
}

/// Largest (R2, R2e) at `r1` over the given members.
pub fn boundary_at(members: &[ParamRegion], r1: f64) -> Option<(f64, f64)> {
    members.iter().filter_map(|m| m.at(r1)).fold(None, |acc, (r2, e)| match acc {
        None => Some((r2, e)),
        Some((a, b)) => Some((a.max(r2), b.max(e))),
    })
}

/// Largest R2 and R2e over members strictly extending beyond `r1`.
fn right_limit(members: &[ParamRegion], r1: f64) -> Option<(f64, f64)> {
    let tol = 1e-12 * (1.0 + r1.abs());
    members.iter().filter(|m| m.r1_max > r1 + tol).filter_map(|m| m.at(r1)).fold(None, |acc, (r2, e)| {
        Some(match acc {
            None => (r2, e),
            Some((a, b)) => (a.max(r2), b.max(e)),
        })
    })
}

/// Exact envelope of the raw union sampled at every member breakpoint;
/// jumps appear as two points with equal R1.
fn envelope(members: &[ParamRegion]) -> Vec<BoundaryPoint> {
    let mut xs: Vec<f64> = vec![0.0];
    for m in members {
        xs.push(m.r1_max);
        let knee = m.sum_cap - m.r2_cap;
        if knee.is_finite() && knee > 0.0 && knee < m.r1_max {
            xs.push(knee);
        }
    }
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup_by(|a, b| (*a - *b).abs() <= 1e-13);
    let evals: Vec<Vec<BoundaryPoint>> = xs
        .par_iter()
        .map(|&x| {
            let mut out = Vec::with_capacity(2);
            if let Some((r2, r2e)) = boundary_at(members, x) {
                out.push(BoundaryPoint { r1: x, r2, r2e });
                match right_limit(members, x) {
                    Some((a, b)) if (a - r2).abs() > 1e-12 || (b - r2e).abs() > 1e-12 => {
                        out.push(BoundaryPoint { r1: x, r2: a, r2e: b })
                    }
                    None => out.push(BoundaryPoint { r1: x, r2: 0.0, r2e: 0.0 }),
                    _ => {}
                }
            }
            out
        })
        .collect();
    let mut pts: Vec<BoundaryPoint> = evals.into_iter().flatten().collect();
    pts.dedup_by(|a, b| a.r1 == b.r1 && a.r2 == b.r2 && a.r2e == b.r2e);
    pts
}

fn upper_hull(pts: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut h: Vec<(f64, f64)> = Vec::new();
    for &p in pts {
        while h.len() >= 2 {
            let (o, a) = (h[h.len() - 2], h[h.len() - 1]);
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross >= -1e-15 {
                h.pop();
            } else {
                break;
            }
        }
        h.push(p);
    }
    h
}

fn interp(h: &[(f64, f64)], x: f64) -> f64 {
    if h.is_empty() {
        return 0.0;
    }
    if x <= h[0].0 {
        return h[0].1;
    }
    for w in h.windows(2) {
        if x <= w[1].0 {
            let t = if w[1].0 > w[0].0 { (x - w[0].0) / (w[1].0 - w[0].0) } else { 1.0 };
            return w[0].1 + t * (w[1].1 - w[0].1);
        }
    }
    h[h.len() - 1].1
}

/// Concave majorant of each boundary coordinate, sampled at the union of the
/// hull breakpoints.
fn concave_envelope(raw: &[BoundaryPoint]) -> Vec<BoundaryPoint> {
    if raw.is_empty() {
        return Vec::new();
    }
    let mut p2: Vec<(f64, f64)> = raw.iter().map(|p| (p.r1, p.r2)).collect();
    let mut pe: Vec<(f64, f64)> = raw.iter().map(|p| (p.r1, p.r2e)).collect();
    let by = |a: &(f64, f64), b: &(f64, f64)| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1));
    p2.sort_by(by);
    pe.sort_by(by);
    let h2 = upper_hull(&p2);
    let he = upper_hull(&pe);
    let mut xs: Vec<f64> = h2.iter().chain(&he).map(|p| p.0).collect();
    xs.sort_by(|a, b| a.total_cmp(b));
    xs.dedup();
    let mut out: Vec<BoundaryPoint> =
        xs.iter().map(|&x| BoundaryPoint { r1: x, r2: interp(&h2, x), r2e: interp(&he, x) }).collect();
    // close the region down to the R1 axis
    if let Some(last) = out.last().copied() {
        if last.r2 > 0.0 || last.r2e > 0.0 {
            out.push(BoundaryPoint { r1: last.r1, r2: 0.0, r2e: 0.0 });
        }
    }
    out
}

impl GaussianSweep {
    pub fn max_r1(&self) -> f64 {
        self.members.iter().map(|m| m.r1_max).fold(0.0, f64::max)
    }

    pub fn max_r2(&self) -> f64 {
        self.members.iter().map(|m| m.r2_cap.min(m.sum_cap)).fold(0.0, f64::max)
    }

    /// Raw-union boundary value at `r1`.
    pub fn at(&self, r1: f64) -> Option<(f64, f64)> {
        boundary_at(&self.members, r1)
    }
}

/// Second-order description of the Gaussian coding distribution:
/// X1 ~ N(0, P1), U = c X1 + U', X2 = U + X2' with independent
/// U' ~ N(0, var_u_prime) and X2' ~ N(0, var_x2_prime).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianInputDist {
    pub rho: f64,
    pub beta: f64,
    pub var_x1: f64,
    /// c = rho sqrt(beta P2 / P1), zero when P1 = 0.
    pub u_from_x1: f64,
    pub var_u_prime: f64,
    pub var_x2_prime: f64,
}

impl GaussianInputDist {
    pub fn var_u(&self) -> f64 {
        self.u_from_x1 * self.u_from_x1 * self.var_x1 + self.var_u_prime
    }

    pub fn var_x2(&self) -> f64 {
        self.var_u() + self.var_x2_prime
    }

    /// E[X1 X2].
    pub fn cov_x1_x2(&self) -> f64 {
        self.u_from_x1 * self.var_x1
    }
}

/// The coding distribution for (rho, beta); beta is forced to 1 when
/// |a| >= 1.
pub fn gaussian_input_dist(g: &GaussianParams, rho: f64, beta: f64) -> Result<GaussianInputDist, GaussianError> {
    check_rho(rho)?;
    check_beta(beta)?;
    let beta = if g.a.abs() >= 1.0 { 1.0 } else { beta };
    let c = if g.p1 > 0.0 { rho * (beta * g.p2 / g.p1).sqrt() } else { 0.0 };
    let var_u_prime = if g.p1 > 0.0 { (1.0 - beta) * rho * rho * g.p2 } else { rho * rho * g.p2 };
    Ok(GaussianInputDist {
        rho,
        beta,
        var_x1: g.p1,
        u_from_x1: c,
        var_u_prime,
        var_x2_prime: (1.0 - rho * rho) * g.p2,
    })
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// Masses of N(mean, var) on the cells around sorted `levels` (cell edges at
/// midpoints, outer cells unbounded). Zero variance puts all mass on the
/// nearest level.
fn quantize(levels: &[f64], mean: f64, var: f64) -> Vec<f64> {
    let n = levels.len();
    let mut out = vec![0.0; n];
    if var <= 0.0 {
        let k = (0..n)
            .min_by(|&i, &j| (levels[i] - mean).abs().total_cmp(&(levels[j] - mean).abs()))
            .unwrap_or(0);
        out[k] = 1.0;
        return out;
    }
    let sd = var.sqrt();
    let mut lo = 0.0;
    for k in 0..n {
        let hi = if k + 1 == n { 1.0 } else { normal_cdf((0.5 * (levels[k] + levels[k + 1]) - mean) / sd) };
        out[k] = (hi - lo).max(0.0);
        lo = hi;
    }
    let s: f64 = out.iter().sum();
    out.iter().map(|p| p / s).collect()
}

/// The coding distribution quantized onto `grid`, as a rate-splitting input:
/// U indexes `u_levels` quantized values of U' and X2 is quantized from
/// c x1 + u' + X2'.
pub fn quantized_input(
    input: &GaussianInputDist,
    grid: &GaussianGrid,
    u_levels: usize,
) -> Result<CicInputDist, GaussianError> {
    let su = input.var_u_prime.sqrt();
    let ul: Vec<f64> = if su > 0.0 && u_levels > 1 {
        let r = 3.0 * su;
        (0..u_levels).map(|i| -r + 2.0 * r * i as f64 / (u_levels - 1) as f64).collect()
    } else {
        vec![0.0]
    };
    let pu = quantize(&ul, 0.0, input.var_u_prime);
    let px1 = quantize(&grid.x1_levels, 0.0, input.var_x1);
    let (n1, nu) = (grid.x1_levels.len(), ul.len());
    let mut base = Vec::with_capacity(nu * n1);
    for pu_k in &pu {
        for p1 in &px1 {
            base.push(pu_k * p1);
        }
    }
    let base = JointDist::from_weights(vec![VarId::new(U, nu).map_err(RegionError::from)?, VarId::new(X1, n1).map_err(RegionError::from)?], base)
        .map_err(RegionError::from)?;
    let mut rows = Vec::with_capacity(nu * n1 * grid.x2_levels.len());
    for &u in &ul {
        for &x1 in &grid.x1_levels {
            rows.extend(quantize(&grid.x2_levels, input.u_from_x1 * x1 + u, input.var_x2_prime));
        }
    }
    let x2 = Kernel::new(&[U, X1], VarId::new(X2, grid.x2_levels.len()).map_err(RegionError::from)?, rows)
        .map_err(RegionError::from)?;
    Ok(CicInputDist::lemma1(base, x2)?)
}

/// Second moments actually realized by a quantized coding distribution.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuantizedMoments {
    pub power_x1: f64,
    pub power_x2: f64,
    /// E[Var(X2 | U, X1)].
    pub cond_var_x2: f64,
}

pub fn quantized_moments(d: &CicInputDist, grid: &GaussianGrid) -> Result<QuantizedMoments, GaussianError> {
    let j = d.input_joint()?;
    let (nu, n1, n2) = (d.card(U).unwrap_or(1), grid.x1_levels.len(), grid.x2_levels.len());
    let (mut p1, mut p2, mut cv) = (0.0, 0.0, 0.0);
    for u in 0..nu {
        for (i, &x1) in grid.x1_levels.iter().enumerate() {
            let probs: Vec<f64> = (0..n2).map(|k| j.get(&[u, i, k])).collect();
            let w: f64 = probs.iter().sum();
            if w <= 0.0 {
                continue;
            }
            let m: f64 = probs.iter().zip(&grid.x2_levels).map(|(p, x)| p * x).sum::<f64>() / w;
            let s: f64 = probs.iter().zip(&grid.x2_levels).map(|(p, x)| p * x * x).sum::<f64>() / w;
            p1 += w * x1 * x1;
            p2 += w * s;
            cv += w * (s - m * m).max(0.0);
        }
    }
    debug_assert!(n1 == d.card(X1).unwrap_or(0));
    Ok(QuantizedMoments { power_x1: p1, power_x2: p2, cond_var_x2: cv })
}

/// Information terms of the quantized channel under the quantized coding
/// distribution.
pub fn discretized_profile(
    g: &GaussianParams,
    rho: f64,
    beta: f64,
    grid: &GaussianGrid,
    u_levels: usize,
) -> Result<(CicChannel, MiProfile), GaussianError> {
    let ch = discretize_gaussian(g, grid)?;
    let d = quantized_input(&gaussian_input_dist(g, rho, beta)?, grid, u_levels)?;
    let mi = mi_profile(&ch, &d)?;
    Ok((ch, mi))
}
