//! Small-blocklength random-coding simulation of the rate-splitting scheme.
//!
//! Codebooks are superposition codes: x1ⁿ(w1) i.i.d. from p(x1), uⁿ(w1,w21)
//! symbol-wise from p(u|x1), and x2ⁿ(w1,w21,w22,t) symbol-wise from
//! p(x2|u,x1), where t is a uniformly drawn dummy index (stochastic
//! encoding). Receiver 1 (the eavesdropper, output Y) decodes (w1, w21) and
//! receiver 2 (output Z) decodes (w1, w21, w22), both by exact maximum
//! likelihood with the undecoded indices marginalized; ties go to the
//! smallest index.
//!
//! Seeds: codebook draw `d` uses `derive_seed(derive_seed(seed, 0), d)`,
//! trial `k` uses `derive_seed(derive_seed(seed, 1), k)` and Monte Carlo
//! sample `s` of draw `d` uses `derive_seed(derive_seed(derive_seed(seed, 2), d), s)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::channels::{CicChannel, X1, X2};
use crate::regions::{mi_profile, CicInputDist, InputKind, RegionError, U};
use crate::sampling::derive_seed;

/// Largest number of (codeword, yⁿ) pairs enumerated for exact equivocation.
pub const ENUMERATION_CAP: u64 = 1 << 26;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("rate {name} = {rate} gives 2^({n}*{rate}) messages, which is not a whole power of two")]
    NonIntegralCount { name: &'static str, rate: f64, n: usize },
    #[error("blocklength must be positive")]
    ZeroLength,
    #[error("the simulator needs a distribution of the p(u,x1)p(x2|u,x1) kind")]
    WrongDistKind,
    #[error(
        "enumeration too large: 2^(n(R1+R21+R22+Rt)) * |Y|^n = 2^{log_codewords} * {card_y}^{n} = {total} > 2^26; reduce n or the rates"
    )]
    EnumerationCap { log_codewords: u32, card_y: usize, n: usize, total: u128 },
    #[error("message index out of range")]
    BadMessage,
    #[error("codeword shape mismatch: {0}")]
    BadCodebook(String),
    #[error(transparent)]
    Region(#[from] RegionError),
}

#[derive(Clone, Debug)]
pub struct SimConfig {
    pub n: usize,
    pub r1: f64,
    pub r21: f64,
    pub r22: f64,
    /// Dummy-index rate of the stochastic encoder.
    pub rt: f64,
    pub trials: usize,
    /// Number of independent codebook draws; trials cycle through them.
    pub draws: usize,
    pub seed: u64,
    pub dist: CicInputDist,
    pub ch: CicChannel,
}

fn log_count(name: &'static str, rate: f64, n: usize) -> Result<u32, SimError> {
    let k = rate * n as f64;
    let r = k.round();
    if !(rate >= 0.0) || (k - r).abs() > 1e-9 || r > 40.0 {
        return Err(SimError::NonIntegralCount { name, rate, n });
    }
    Ok(r as u32)
}

/// Message-set sizes as powers of two.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Counts {
    pub m1: usize,
    pub m21: usize,
    pub m22: usize,
    pub mt: usize,
}

impl Counts {
    pub fn codewords(&self) -> usize {
        self.m1 * self.m21 * self.m22 * self.mt
    }

    fn index(&self, w1: usize, w21: usize, w22: usize, t: usize) -> usize {
        ((w1 * self.m21 + w21) * self.m22 + w22) * self.mt + t
    }
}

impl SimConfig {
    pub fn counts(&self) -> Result<Counts, SimError> {
        if self.n == 0 {
            return Err(SimError::ZeroLength);
        }
        let c = |name, r| log_count(name, r, self.n).map(|k| 1usize << k);
        Ok(Counts { m1: c("R1", self.r1)?, m21: c("R21", self.r21)?, m22: c("R22", self.r22)?, mt: c("Rt", self.rt)? })
    }

    pub fn validate(&self) -> Result<Counts, SimError> {
        if self.dist.kind() != InputKind::Lemma1 {
            return Err(SimError::WrongDistKind);
        }
        self.dist.full_joint(&self.ch)?;
        self.counts()
    }

    /// Checks the exact-equivocation enumeration bound.
    pub fn check_enumeration(&self) -> Result<(), SimError> {
        let c = self.counts()?;
        enumeration_ok(c, self.ch.card_y(), self.n)
    }

    /// Recommended dummy rate: I(X2;Y|U,X1), rounded down to a multiple of 1/n.
    pub fn default_rt(dist: &CicInputDist, ch: &CicChannel, n: usize) -> Result<f64, SimError> {
        let mi = mi_profile(ch, dist)?;
        Ok((mi.i_x2_y_g * n as f64 + 1e-9).floor() / n as f64)
    }
}

fn enumeration_ok(c: Counts, card_y: usize, n: usize) -> Result<(), SimError> {
    let log_codewords = c.codewords().trailing_zeros();
    let total = (c.codewords() as u128).saturating_mul((card_y as u128).saturating_pow(n as u32));
    if total > ENUMERATION_CAP as u128 {
        return Err(SimError::EnumerationCap { log_codewords, card_y, n, total });
    }
    Ok(())
}

/// One realized codebook together with the channel it is used on.
#[derive(Clone, Debug)]
pub struct Ensemble {
    pub n: usize,
    pub counts: Counts,
    /// x1ⁿ(w1).
    pub x1: Vec<Vec<u8>>,
    /// uⁿ(w1, w21), indexed `w1 * m21 + w21`.
    pub u: Vec<Vec<u8>>,
    /// x2ⁿ(w1, w21, w22, t), indexed `((w1*m21 + w21)*m22 + w22)*mt + t`.
    pub x2: Vec<Vec<u8>>,
    py: Vec<f64>,
    pz: Vec<f64>,
    ch: CicChannel,
}

fn draw(rng: &mut ChaCha8Rng, p: &[f64]) -> u8 {
    let r: f64 = rng.random();
    let mut acc = 0.0;
    for (i, v) in p.iter().enumerate() {
        acc += v;
        if r < acc {
            return i as u8;
        }
    }
    // rounding slack: last letter with positive mass
    p.iter().rposition(|v| *v > 0.0).unwrap_or(0) as u8
}

impl Ensemble {
    fn with_channel(ch: &CicChannel, n: usize, counts: Counts, x1: Vec<Vec<u8>>, u: Vec<Vec<u8>>, x2: Vec<Vec<u8>>) -> Self {
        let (my, mz) = ch.marginal_channels();
        Ensemble { n, counts, x1, u, x2, py: my.data, pz: mz.data, ch: ch.clone() }
    }

    /// An ensemble with hand-chosen codewords (u is left constant).
    pub fn from_codewords(ch: &CicChannel, n: usize, counts: Counts, x1: Vec<Vec<u8>>, x2: Vec<Vec<u8>>) -> Result<Self, SimError> {
        if x1.len() != counts.m1 || x2.len() != counts.codewords() {
            return Err(SimError::BadCodebook(format!(
                "expected {} x1 and {} x2 codewords, got {} and {}",
                counts.m1,
                counts.codewords(),
                x1.len(),
                x2.len()
            )));
        }
        let ok = |w: &Vec<u8>, card: usize| w.len() == n && w.iter().all(|&s| (s as usize) < card);
        if !x1.iter().all(|w| ok(w, ch.card_x1())) || !x2.iter().all(|w| ok(w, ch.card_x2())) {
            return Err(SimError::BadCodebook("codeword length or symbol out of range".into()));
        }
        let u = vec![vec![0u8; n]; counts.m1 * counts.m21];
        Ok(Self::with_channel(ch, n, counts, x1, u, x2))
    }

    pub fn channel(&self) -> &CicChannel {
        &self.ch
    }

    fn p_y(&self, x1: u8, x2: u8, y: usize) -> f64 {
        let cy = self.ch.card_y();
        self.py[(x1 as usize * self.ch.card_x2() + x2 as usize) * cy + y]
    }

    fn p_z(&self, x1: u8, x2: u8, z: usize) -> f64 {
        let cz = self.ch.card_z();
        self.pz[(x1 as usize * self.ch.card_x2() + x2 as usize) * cz + z]
    }

    fn lik_y(&self, w1: usize, c: usize, y: &[u8]) -> f64 {
        let (a, b) = (&self.x1[w1], &self.x2[c]);
        (0..self.n).map(|i| self.p_y(a[i], b[i], y[i] as usize)).product()
    }

    fn lik_z(&self, w1: usize, c: usize, z: &[u8]) -> f64 {
        let (a, b) = (&self.x1[w1], &self.x2[c]);
        (0..self.n).map(|i| self.p_z(a[i], b[i], z[i] as usize)).product()
    }
}

/// Draws a codebook for `cfg` from the generator seeded with `draw_seed`.
pub fn build_codebooks(cfg: &SimConfig, draw_seed: u64) -> Result<Ensemble, SimError> {
    let counts = cfg.validate()?;
    let n = cfg.n;
    let base = cfg.dist.base();
    let cu = cfg.dist.card(U).unwrap_or(1);
    let cx1 = cfg.ch.card_x1();
    let cx2 = cfg.ch.card_x2();
    let px1: Vec<f64> = (0..cx1).map(|x| (0..cu).map(|u| base.get(&[u, x])).sum()).collect();
    let pu_x1: Vec<Vec<f64>> = (0..cx1)
        .map(|x| {
            let col: Vec<f64> = (0..cu).map(|u| base.get(&[u, x])).collect();
            let s: f64 = col.iter().sum();
            if s > 0.0 {
                col.iter().map(|v| v / s).collect()
            } else {
                vec![1.0 / cu as f64; cu]
            }
        })
        .collect();
    let k = cfg.dist.x2_kernel().rows();
    let px2 = |u: u8, x1: u8| &k[(u as usize * cx1 + x1 as usize) * cx2..(u as usize * cx1 + x1 as usize + 1) * cx2];

    let mut rng = ChaCha8Rng::seed_from_u64(draw_seed);
    let x1: Vec<Vec<u8>> = (0..counts.m1).map(|_| (0..n).map(|_| draw(&mut rng, &px1)).collect()).collect();
    let mut u = Vec::with_capacity(counts.m1 * counts.m21);
    for w1 in 0..counts.m1 {
        for _ in 0..counts.m21 {
            u.push((0..n).map(|i| draw(&mut rng, &pu_x1[x1[w1][i] as usize])).collect::<Vec<u8>>());
        }
    }
    let mut x2 = Vec::with_capacity(counts.codewords());
    for w1 in 0..counts.m1 {
        for w21 in 0..counts.m21 {
            let uw = &u[w1 * counts.m21 + w21];
            for _ in 0..counts.m22 * counts.mt {
                x2.push((0..n).map(|i| draw(&mut rng, px2(uw[i], x1[w1][i]))).collect::<Vec<u8>>());
            }
        }
    }
    Ok(Ensemble::with_channel(&cfg.ch, n, counts, x1, u, x2))
}

/// Decoder outputs for one transmission.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decoded {
    /// Receiver 1 estimate of (w1, w21).
    pub rx1: (usize, usize),
    /// Receiver 2 estimate of (w1, w21, w22).
    pub rx2: (usize, usize, usize),
}

fn argmax_first(scores: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, s) in scores.enumerate() {
        if s > best.1 {
            best = (i, s);
        }
    }
    best.0
}

/// Sends (w1, w21, w22) with a uniformly drawn dummy index and decodes at both
/// receivers.
pub fn transmit_decode(ens: &Ensemble, w1: usize, w21: usize, w22: usize, rng: &mut ChaCha8Rng) -> Result<Decoded, SimError> {
    let c = ens.counts;
    if w1 >= c.m1 || w21 >= c.m21 || w22 >= c.m22 {
        return Err(SimError::BadMessage);
    }
    let t = rng.random_range(0..c.mt);
    let cw = c.index(w1, w21, w22, t);
    let (cy, cz) = (ens.ch.card_y(), ens.ch.card_z());
    let mut y = Vec::with_capacity(ens.n);
    let mut z = Vec::with_capacity(ens.n);
    for i in 0..ens.n {
        let (a, b) = (ens.x1[w1][i] as usize, ens.x2[cw][i] as usize);
        let joint: Vec<f64> = (0..cy * cz).map(|k| ens.ch.p(a, b, k / cz, k % cz)).collect();
        let k = draw(rng, &joint) as usize;
        y.push((k / cz) as u8);
        z.push((k % cz) as u8);
    }
    Ok(decode(ens, &y, &z))
}

/// Maximum-likelihood decisions for given outputs.
pub fn decode(ens: &Ensemble, y: &[u8], z: &[u8]) -> Decoded {
    let c = ens.counts;
    let inner = c.m22 * c.mt;
    let rx1 = argmax_first((0..c.m1 * c.m21).map(|g| {
        let w1 = g / c.m21;
        (0..inner).map(|k| ens.lik_y(w1, g * inner + k, y)).sum::<f64>()
    }));
    let rx2 = argmax_first((0..c.m1 * c.m21 * c.m22).map(|g| {
        let w1 = g / (c.m21 * c.m22);
        (0..c.mt).map(|t| ens.lik_z(w1, g * c.mt + t, z)).sum::<f64>()
    }));
    Decoded {
        rx1: (rx1 / c.m21, rx1 % c.m21),
        rx2: (rx2 / (c.m21 * c.m22), (rx2 / c.m22) % c.m21, rx2 % c.m22),
    }
}

/// p(yⁿ | codeword) for every yⁿ (last symbol fastest).
fn output_law(ens: &Ensemble, w1: usize, cw: usize) -> Vec<f64> {
    let cy = ens.ch.card_y();
    let mut v = vec![1.0];
    for i in 0..ens.n {
        let (a, b) = (ens.x1[w1][i], ens.x2[cw][i]);
        let row: Vec<f64> = (0..cy).map(|y| ens.p_y(a, b, y)).collect();
        v = v.iter().flat_map(|p| row.iter().map(move |q| p * q)).collect();
    }
    v
}

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * p.log2()
    } else {
        0.0
    }
}

/// (1/n) H(W2 | Yⁿ) in bits per channel use for the realized codebook, with
/// uniform messages and dummy index.
pub fn exact_equivocation(ens: &Ensemble) -> Result<f64, SimError> {
    let c = ens.counts;
    enumeration_ok(c, ens.ch.card_y(), ens.n)?;
    let size = ens.ch.card_y().pow(ens.n as u32);
    let weight = 1.0 / c.codewords() as f64;
    let groups: Vec<(f64, Vec<f64>)> = (0..c.m21 * c.m22)
        .into_par_iter()
        .map(|g| {
            let (w21, w22) = (g / c.m22, g % c.m22);
            let mut pyw = vec![0.0; size];
            for w1 in 0..c.m1 {
                for t in 0..c.mt {
                    let law = output_law(ens, w1, c.index(w1, w21, w22, t));
                    for (a, b) in pyw.iter_mut().zip(&law) {
                        *a += weight * b;
                    }
                }
            }
            (pyw.iter().map(|p| plogp(*p)).sum(), pyw)
        })
        .collect();
    let mut h_joint = 0.0;
    let mut py = vec![0.0; size];
    for (h, pyw) in &groups {
        h_joint += h;
        for (a, b) in py.iter_mut().zip(pyw) {
            *a += b;
        }
    }
    let h_y: f64 = py.iter().map(|p| plogp(*p)).sum();
    Ok(((h_joint - h_y) / ens.n as f64).max(0.0))
}

/// Monte Carlo estimate of (1/n) H(W2 | Yⁿ) from `samples` transmissions,
/// each scored by its exact posterior. Returns (estimate, standard error).
pub fn monte_carlo_equivocation(ens: &Ensemble, samples: usize, seed: u64) -> (f64, f64) {
    let c = ens.counts;
    let cy = ens.ch.card_y();
    let vals: Vec<f64> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, s as u64));
            let w1 = rng.random_range(0..c.m1);
            let w21 = rng.random_range(0..c.m21);
            let w22 = rng.random_range(0..c.m22);
            let t = rng.random_range(0..c.mt);
            let cw = c.index(w1, w21, w22, t);
            let y: Vec<u8> = (0..ens.n)
                .map(|i| {
                    let row: Vec<f64> = (0..cy).map(|y| ens.p_y(ens.x1[w1][i], ens.x2[cw][i], y)).collect();
                    draw(&mut rng, &row)
                })
                .collect();
            let mut total = 0.0;
            let mut mine = 0.0;
            for a in 0..c.m1 {
                for b in 0..c.m21 {
                    for d in 0..c.m22 {
                        let s: f64 = (0..c.mt).map(|t| ens.lik_y(a, c.index(a, b, d, t), &y)).sum();
                        total += s;
                        if b == w21 && d == w22 {
                            mine += s;
                        }
                    }
                }
            }
            -(mine / total).log2()
        })
        .collect();
    let m = vals.iter().sum::<f64>() / samples as f64;
    let var = vals.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (samples.max(2) - 1) as f64;
    let n = ens.n as f64;
    (m / n, (var / samples as f64).sqrt() / n)
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct SimReport {
    /// Fraction of trials with (ŵ1 at rx1, ŵ1 at rx2, ŵ2) ≠ (w1, w1, w2).
    pub pe: f64,
    /// Receiver 1 wrong on w1.
    pub pe_rx1: f64,
    /// Receiver 1 wrong on (w1, w21).
    pub pe_rx1_split: f64,
    /// Receiver 2 wrong on (w1, w21, w22).
    pub pe_rx2: f64,
    /// Exact (1/n) H(W2|Yⁿ), averaged over codebook draws (NaN if not computed).
    pub equivocation: f64,
    /// Sample standard deviation of the per-draw equivocations.
    pub equivocation_spread: f64,
}

/// Runs `cfg.trials` transmissions over `cfg.draws` codebooks and, when
/// `exact` is set, the exact equivocation of every codebook.
pub fn simulate(cfg: &SimConfig, exact: bool) -> Result<SimReport, SimError> {
    let counts = cfg.validate()?;
    if exact {
        cfg.check_enumeration()?;
    }
    let draws = cfg.draws.max(1);
    let book_root = derive_seed(cfg.seed, 0);
    let trial_root = derive_seed(cfg.seed, 1);
    let books: Vec<Ensemble> = (0..draws)
        .into_par_iter()
        .map(|d| build_codebooks(cfg, derive_seed(book_root, d as u64)))
        .collect::<Result<_, _>>()?;
    let outcomes: Vec<[u32; 4]> = (0..cfg.trials)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(trial_root, k as u64));
            let ens = &books[k % draws];
            let w1 = rng.random_range(0..counts.m1);
            let w21 = rng.random_range(0..counts.m21);
            let w22 = rng.random_range(0..counts.m22);
            let d = transmit_decode(ens, w1, w21, w22, &mut rng).expect("indices in range");
            let e1 = d.rx1.0 != w1;
            let e1s = d.rx1 != (w1, w21);
            let e2 = d.rx2 != (w1, w21, w22);
            [(e1 || e2) as u32, e1 as u32, e1s as u32, e2 as u32]
        })
        .collect();
    let mut tot = [0u64; 4];
    for o in &outcomes {
        for i in 0..4 {
            tot[i] += o[i] as u64;
        }
    }
    let frac = |v: u64| if cfg.trials == 0 { 0.0 } else { v as f64 / cfg.trials as f64 };
    let (equivocation, equivocation_spread) = if exact {
        let eqs: Vec<f64> = books.par_iter().map(exact_equivocation).collect::<Result<_, _>>()?;
        let m = eqs.iter().sum::<f64>() / eqs.len() as f64;
        let sd = if eqs.len() > 1 {
            (eqs.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (eqs.len() - 1) as f64).sqrt()
        } else {
            0.0
        };
        (m, sd)
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(SimReport {
        pe: frac(tot[0]),
        pe_rx1: frac(tot[1]),
        pe_rx1_split: frac(tot[2]),
        pe_rx2: frac(tot[3]),
        equivocation,
        equivocation_spread,
    })
}

/// The equivocation the scheme targets: min{R22, I(X2;Z|U,X1) - I(X2;Y|U,X1)}, at least 0.
pub fn target_bound(cfg: &SimConfig) -> Result<f64, SimError> {
    let mi = mi_profile(&cfg.ch, &cfg.dist)?;
    Ok(cfg.r22.min(mi.i_x2_z_g - mi.i_x2_y_g).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentRow {
    pub n: usize,
    pub r1: f64,
    pub r21: f64,
    pub r22: f64,
    pub rt: f64,
    pub seed: u64,
    pub report: SimReport,
    pub target: f64,
}

/// Runs every configuration (each with exact equivocation).
pub fn secrecy_experiment(cfgs: &[SimConfig]) -> Result<Vec<ExperimentRow>, SimError> {
    cfgs.iter()
        .map(|c| {
            Ok(ExperimentRow {
                n: c.n,
                r1: c.r1,
                r21: c.r21,
                r22: c.r22,
                rt: c.rt,
                seed: c.seed,
                report: simulate(c, true)?,
                target: target_bound(c)?,
            })
        })
        .collect()
}

/// Empirical frequencies of (u, x1, x2) over every codeword symbol, indexed
/// `(u * |X1| + x1) * |X2| + x2`.
pub fn symbol_frequencies(ens: &Ensemble, card_u: usize) -> Vec<u64> {
    let (cx1, cx2) = (ens.ch.card_x1(), ens.ch.card_x2());
    let c = ens.counts;
    let mut f = vec![0u64; card_u * cx1 * cx2];
    for w1 in 0..c.m1 {
        for w21 in 0..c.m21 {
            let u = &ens.u[w1 * c.m21 + w21];
            for k in 0..c.m22 * c.mt {
                let x2 = &ens.x2[(w1 * c.m21 + w21) * c.m22 * c.mt + k];
                for i in 0..ens.n {
                    f[(u[i] as usize * cx1 + ens.x1[w1][i] as usize) * cx2 + x2[i] as usize] += 1;
                }
            }
        }
    }
    f
}

/// Names of the input variables the simulator reads, in table order.
pub const INPUT_VARS: [&str; 3] = [U, X1, X2];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::probability::{JointDist, Kernel, VarId};

    fn noiseless() -> CicChannel {
        // Y = Z = X2
        CicChannel::from_fn(1, 2, 2, 2, |_, b, y, z| if y == b && z == b { 1.0 } else { 0.0 }).unwrap()
    }

    fn uniform_x2(cu: usize) -> CicInputDist {
        let base = JointDist::uniform(vec![VarId::new(U, cu).unwrap(), VarId::new(X1, 1).unwrap()]).unwrap();
        let k = Kernel::new(&[U, X1], VarId::new(X2, 2).unwrap(), vec![0.5; 2 * cu]).unwrap();
        CicInputDist::lemma1(base, k).unwrap()
    }

    fn cfg(ch: CicChannel, n: usize, rates: (f64, f64, f64), rt: f64) -> SimConfig {
        SimConfig { n, r1: rates.0, r21: rates.1, r22: rates.2, rt, trials: 200, draws: 4, seed: 11, dist: uniform_x2(1), ch }
    }

    #[test]
    fn counts_must_be_integral() {
        let c = cfg(noiseless(), 3, (0.5, 0.0, 0.0), 0.0);
        assert!(matches!(c.counts(), Err(SimError::NonIntegralCount { name: "R1", .. })));
        let c = cfg(noiseless(), 4, (0.5, 0.25, 0.0), 0.75);
        assert_eq!(c.counts().unwrap(), Counts { m1: 4, m21: 2, m22: 1, mt: 8 });
    }

    #[test]
    fn zero_rates_are_error_free() {
        let c = cfg(noiseless(), 4, (0.0, 0.0, 0.0), 0.0);
        let r = simulate(&c, true).unwrap();
        assert_eq!(r.pe, 0.0);
        assert_eq!(r.equivocation, 0.0);
    }

    #[test]
    fn noiseless_distinct_codewords_decode_perfectly() {
        let ch = noiseless();
        let counts = Counts { m1: 1, m21: 2, m22: 2, mt: 1 };
        let x2 = vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]];
        let ens = Ensemble::from_codewords(&ch, 2, counts, vec![vec![0, 0]], x2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for w21 in 0..2 {
            for w22 in 0..2 {
                let d = transmit_decode(&ens, 0, w21, w22, &mut rng).unwrap();
                assert_eq!(d.rx2, (0, w21, w22));
                assert_eq!(d.rx1, (0, w21));
            }
        }
        // Y reveals x2ⁿ through an invertible map: nothing stays hidden
        assert!(exact_equivocation(&ens).unwrap().abs() < 1e-12);
    }

    #[test]
    fn useless_eavesdropper_gives_full_secrecy() {
        // Y independent of the inputs, Z = X2
        let ch = CicChannel::from_fn(1, 2, 3, 2, |_, b, y, z| if z == b { [0.2, 0.3, 0.5][y] } else { 0.0 }).unwrap();
        let counts = Counts { m1: 2, m21: 2, m22: 2, mt: 2 };
        let x2: Vec<Vec<u8>> = (0..16).map(|i| vec![(i & 1) as u8, (i >> 1 & 1) as u8, (i >> 2 & 1) as u8]).collect();
        let ens = Ensemble::from_codewords(&ch, 3, counts, vec![vec![0; 3]; 2], x2).unwrap();
        let e = exact_equivocation(&ens).unwrap();
        assert!((e - 2.0 / 3.0).abs() < 1e-12, "{e}");
    }

    #[test]
    fn deterministic_encoder_repeats_copies() {
        let det = {
            let base = JointDist::uniform(vec![VarId::new(U, 2).unwrap(), VarId::new(X1, 1).unwrap()]).unwrap();
            let k = Kernel::new(&[U, X1], VarId::new(X2, 2).unwrap(), vec![1.0, 0.0, 0.0, 1.0]).unwrap();
            CicInputDist::lemma1(base, k).unwrap()
        };
        let mut c = cfg(noiseless(), 4, (0.0, 0.5, 0.0), 0.5);
        c.dist = det;
        let ens = build_codebooks(&c, 5).unwrap();
        for g in 0..4 {
            let copies = &ens.x2[g * 4..g * 4 + 4];
            assert!(copies.iter().all(|w| w == &copies[0]));
        }
    }

    #[test]
    fn enumeration_cap_message() {
        let c = cfg(noiseless(), 16, (1.0, 0.0, 0.0), 0.0);
        let err = c.check_enumeration().unwrap_err();
        assert!(err.to_string().contains("2^16 * 2^16"), "{err}");
    }

    #[test]
    fn reproducible() {
        let c = cfg(noiseless(), 4, (0.5, 0.25, 0.25), 0.25);
        assert_eq!(simulate(&c, true).unwrap(), simulate(&c, true).unwrap());
    }
}
