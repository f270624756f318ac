//! Discrete-memoryless rate regions and their unions over input distributions.
//!
//! Per-distribution regions are [`RateSystem`]s built from a [`MiProfile`];
//! [`sweep_union`] accumulates their vertices over a deterministic family of
//! input distributions into a [`RegionCloud`].

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::channels::{CicChannel, ChannelError, X1, X2, Y, Z};
use crate::hull::{convex_hull, Hull, Point3};
use crate::polytope::{PolytopeError, RateSystem};
use crate::probability::{JointDist, Kernel, ProbError, VarId};
use crate::sampling::{self, task_rng};

pub const U: &str = "U";
pub const V: &str = "V";
pub const R1: &str = "R1";
pub const R2: &str = "R2";
pub const R21: &str = "R21";
pub const R22: &str = "R22";
pub const R2E: &str = "R2e";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error("cardinality mismatch for {var}: distribution has {dist}, channel has {channel}")]
    CardinalityMismatch { var: &'static str, dist: usize, channel: usize },
    #[error("malformed input distribution: {0}")]
    BadDistribution(String),
    #[error("invalid sampling spec: {0}")]
    BadSpec(String),
    #[error(transparent)]
    Prob(#[from] ProbError),
    #[error(transparent)]
    Polytope(#[from] PolytopeError),
    #[error(transparent)]
    Channel(#[from] ChannelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputKind {
    /// p(u,x1) p(x2|u,x1)
    Lemma1,
    /// p(u,x1,v) p(x2|v)
    Theorem1,
}

/// An input distribution of one of the two union domains.
#[derive(Clone, Debug)]
pub struct CicInputDist {
    kind: InputKind,
    base: JointDist,
    x2: Kernel,
}

fn expect_vars(d: &JointDist, names: &[&str]) -> Result<(), RegionError> {
    let got: Vec<&str> = d.vars().iter().map(|v| v.name()).collect();
    if got != names {
        return Err(RegionError::BadDistribution(format!("expected variables {names:?}, found {got:?}")));
    }
    Ok(())
}

impl CicInputDist {
    /// `base` over (U, X1), `x2` a kernel (U, X1) -> X2.
    pub fn lemma1(base: JointDist, x2: Kernel) -> Result<Self, RegionError> {
        expect_vars(&base, &[U, X1])?;
        Self::checked(InputKind::Lemma1, base, x2, &[U, X1])
    }

    /// `base` over (U, X1, V), `x2` a kernel V -> X2.
    pub fn theorem1(base: JointDist, x2: Kernel) -> Result<Self, RegionError> {
        expect_vars(&base, &[U, X1, V])?;
        Self::checked(InputKind::Theorem1, base, x2, &[V])
    }

    fn checked(kind: InputKind, base: JointDist, x2: Kernel, parents: &[&str]) -> Result<Self, RegionError> {
        let ps: Vec<&str> = x2.parents().iter().map(String::as_str).collect();
        if ps != parents || x2.children().len() != 1 || x2.children()[0].name() != X2 {
            return Err(RegionError::BadDistribution(format!(
                "X2 kernel must map {parents:?} to X2, found {ps:?}"
            )));
        }
        let d = CicInputDist { kind, base, x2 };
        d.input_joint()?;
        Ok(d)
    }

    /// Splits a joint over (U, X1, X2) into its rate-splitting factors.
    pub fn lemma1_from_joint(joint: &JointDist) -> Result<Self, RegionError> {
        let base = joint.reorder_subset(&[U, X1])?;
        let x2 = joint.conditional(&[U, X1], X2)?;
        Self::lemma1(base, x2)
    }

    pub fn kind(&self) -> InputKind {
        self.kind
    }

    pub fn base(&self) -> &JointDist {
        &self.base
    }

    pub fn x2_kernel(&self) -> &Kernel {
        &self.x2
    }

    pub fn card(&self, name: &str) -> Option<usize> {
        if name == X2 {
            return Some(self.x2.children()[0].card());
        }
        self.base.var(name).ok().map(|v| v.card())
    }

    /// Joint of the channel inputs and auxiliaries: (U, X1, [V,] X2).
    pub fn input_joint(&self) -> Result<JointDist, RegionError> {
        Ok(self.base.compose(&self.x2)?)
    }

    /// Joint of all variables with the channel outputs appended.
    pub fn full_joint(&self, ch: &CicChannel) -> Result<JointDist, RegionError> {
        for (var, channel) in [(X1, ch.card_x1()), (X2, ch.card_x2())] {
            let dist = self.card(var).unwrap_or(0);
            if dist != channel {
                return Err(RegionError::CardinalityMismatch { var, dist, channel });
            }
        }
        Ok(self.input_joint()?.compose(&ch.kernel())?)
    }

    /// FNV-1a hash of the defining probabilities, used to tag cloud points.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let vals = self.base.probs().iter().chain(self.x2.rows());
        for (i, v) in self.base.vars().iter().map(|v| v.card() as f64).chain(vals.copied()).enumerate() {
            for b in v.to_bits().to_le_bytes().iter().chain(&(i as u64).to_le_bytes()) {
                h ^= *b as u64;
                h = h.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
        h
    }

    /// Replaces U by U' = (U, E * P) where E ~ Bern(lambda) is independent
    /// and P is the private layer (V, or X2 for the rate-splitting kind). The new
    /// alphabet has |U| (|P| + 1) letters: letter `u (|P|+1)` when E = 0 and
    /// `u (|P|+1) + 1 + p` when E = 1.
    pub fn reveal_private(&self, lambda: f64) -> Result<Self, RegionError> {
        let lambda = lambda.clamp(0.0, 1.0);
        let private = match self.kind {
            InputKind::Lemma1 => X2,
            InputKind::Theorem1 => V,
        };
        let cu = self.card(U).unwrap_or(1);
        let cp = self.card(private).unwrap_or(1);
        let width = cp + 1;
        let ur = VarId::new("U'", cu * width)?;
        let parents = [VarId::new(U, cu)?, VarId::new(private, cp)?];
        let k = Kernel::from_fn(&parents, ur, |idx| {
            let mut row = vec![0.0; cu * width];
            row[idx[0] * width] += 1.0 - lambda;
            row[idx[0] * width + 1 + idx[1]] += lambda;
            row
        })?;
        let joint = self.input_joint()?.compose(&k)?;
        match self.kind {
            InputKind::Lemma1 => {
                let j = joint.reorder_subset(&["U'", X1, X2])?.rename("U'", U)?;
                Self::lemma1_from_joint(&j)
            }
            InputKind::Theorem1 => {
                let base = joint.reorder_subset(&["U'", X1, V])?.rename("U'", U)?;
                Self::theorem1(base, self.x2.clone())
            }
        }
    }
}

/// Information terms (bits) entering the region displays. `g` abbreviates
/// conditioning on (U, X1). For the rate-splitting kind V is taken to be X2.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct MiProfile {
    pub i_ux1_y: f64,
    pub i_ux1_z: f64,
    pub i_v_z_g: f64,
    pub i_v_y_g: f64,
    pub i_uv_z_gx1: f64,
    pub i_uvx1_z: f64,
    pub i_x2_z_g: f64,
    pub i_x2_y_g: f64,
    pub i_ux2_z_gx1: f64,
    pub i_ux1x2_z: f64,
    pub i_x2_z_gx1: f64,
    pub i_x1x2_y: f64,
    pub i_x1x2_z: f64,
}

impl MiProfile {
    /// The profile with every X2 term replaced by its V counterpart.
    pub fn with_v_as_x2(&self) -> MiProfile {
        MiProfile {
            i_x2_z_g: self.i_v_z_g,
            i_x2_y_g: self.i_v_y_g,
            i_ux2_z_gx1: self.i_uv_z_gx1,
            i_ux1x2_z: self.i_uvx1_z,
            ..*self
        }
    }

    pub fn values(&self) -> [(&'static str, f64); 13] {
        [
            ("iUX1_Y", self.i_ux1_y),
            ("iUX1_Z", self.i_ux1_z),
            ("iV_Z_g", self.i_v_z_g),
            ("iV_Y_g", self.i_v_y_g),
            ("iUV_Z_gX1", self.i_uv_z_gx1),
            ("iUVX1_Z", self.i_uvx1_z),
            ("iX2_Z_g", self.i_x2_z_g),
            ("iX2_Y_g", self.i_x2_y_g),
            ("iUX2_Z_gX1", self.i_ux2_z_gx1),
            ("iUX1X2_Z", self.i_ux1x2_z),
            ("iX2_Z_gX1", self.i_x2_z_gx1),
            ("iX1X2_Y", self.i_x1x2_y),
            ("iX1X2_Z", self.i_x1x2_z),
        ]
    }

    /// Largest violation of the chain rules tying the terms together.
    pub fn chain_rule_residual(&self) -> f64 {
        [
            self.i_ux1_z + self.i_v_z_g - self.i_uvx1_z,
            self.i_ux1_z + self.i_x2_z_g - self.i_ux1x2_z,
        ]
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
    }
}

impl std::fmt::Display for MiProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.values().iter().map(|(n, v)| format!("{n}={v:.12}")).collect();
        write!(f, "{}", parts.join(" "))
    }
}

pub fn mi_profile(ch: &CicChannel, dist: &CicInputDist) -> Result<MiProfile, RegionError> {
    let j = dist.full_joint(ch)?;
    let mi = |a: &[&str], b: &[&str], g: &[&str]| j.mutual_info(a, b, g);
    let private = match dist.kind {
        InputKind::Lemma1 => X2,
        InputKind::Theorem1 => V,
    };
    let p = private;
    Ok(MiProfile {
        i_ux1_y: mi(&[U, X1], &[Y], &[])?,
        i_ux1_z: mi(&[U, X1], &[Z], &[])?,
        i_v_z_g: mi(&[p], &[Z], &[U, X1])?,
        i_v_y_g: mi(&[p], &[Y], &[U, X1])?,
        i_uv_z_gx1: mi(&[U, p], &[Z], &[X1])?,
        i_uvx1_z: mi(&[U, p, X1], &[Z], &[])?,
        i_x2_z_g: mi(&[X2], &[Z], &[U, X1])?,
        i_x2_y_g: mi(&[X2], &[Y], &[U, X1])?,
        i_ux2_z_gx1: mi(&[U, X2], &[Z], &[X1])?,
        i_ux1x2_z: mi(&[U, X1, X2], &[Z], &[])?,
        i_x2_z_gx1: mi(&[X2], &[Z], &[X1])?,
        i_x1x2_y: mi(&[X1, X2], &[Y], &[])?,
        i_x1x2_z: mi(&[X1, X2], &[Z], &[])?,
    })
}

fn add(sys: &mut RateSystem, terms: &[(&str, f64)], rhs: f64) {
    sys.add(terms, rhs).expect("symbols declared by the builder");
}

/// Secrecy right-hand sides: when the difference `d` is negative no
/// confidential rate is supported, so the rows collapse to `R2e <= 0`.
fn secrecy_rows(sys: &mut RateSystem, d: f64, rows: &[(&[(&str, f64)], f64)]) {
    if d < 0.0 {
        add(sys, &[(R2E, 1.0)], 0.0);
        return;
    }
    for (terms, rhs) in rows {
        add(sys, terms, rhs.max(0.0));
    }
}

/// The rate-splitting region over (R1, R21, R22, R2e), using the X2 terms.
pub fn lemma1_system(mi: &MiProfile) -> RateSystem {
    let mut s = RateSystem::new(&[R1, R21, R22, R2E]);
    add(&mut s, &[(R1, 1.0), (R21, 1.0)], mi.i_ux1_y);
    add(&mut s, &[(R22, 1.0)], mi.i_x2_z_g);
    add(&mut s, &[(R21, 1.0), (R22, 1.0)], mi.i_ux2_z_gx1);
    add(&mut s, &[(R1, 1.0), (R21, 1.0), (R22, 1.0)], mi.i_ux1x2_z);
    add(&mut s, &[(R2E, 1.0), (R22, -1.0)], 0.0);
    let d = mi.i_x2_z_g - mi.i_x2_y_g;
    secrecy_rows(
        &mut s,
        d,
        &[
            (&[(R2E, 1.0)], d),
            (&[(R21, 1.0), (R2E, 1.0)], mi.i_ux2_z_gx1 - mi.i_x2_y_g),
            (&[(R1, 1.0), (R21, 1.0), (R2E, 1.0)], mi.i_ux1x2_z - mi.i_x2_y_g),
        ],
    );
    s
}

/// Projection of [`lemma1_system`] onto (R1, R2, R2e) with R2 = R21 + R22.
pub fn lemma1_projected(mi: &MiProfile) -> Result<RateSystem, RegionError> {
    let s = lemma1_system(mi)
        .with_sum_symbol(R2, &[R21, R22])?
        .fme_eliminate(R21)?
        .fme_eliminate(R22)?
        .reorder(&[R1, R2, R2E])?;
    Ok(s)
}

pub fn theorem1_system(mi: &MiProfile) -> RateSystem {
    let mut s = RateSystem::new(&[R1, R2, R2E]);
    let m = mi.i_ux1_y.min(mi.i_ux1_z);
    add(&mut s, &[(R1, 1.0)], mi.i_ux1_y);
    add(&mut s, &[(R2, 1.0)], mi.i_uv_z_gx1);
    add(&mut s, &[(R1, 1.0), (R2, 1.0)], m + mi.i_v_z_g);
    add(&mut s, &[(R2E, 1.0), (R2, -1.0)], 0.0);
    let d = mi.i_v_z_g - mi.i_v_y_g;
    secrecy_rows(
        &mut s,
        d,
        &[(&[(R2E, 1.0)], d), (&[(R1, 1.0), (R2E, 1.0)], mi.i_uvx1_z - mi.i_v_y_g)],
    );
    s
}

pub fn corollary1_system(mi: &MiProfile) -> RateSystem {
    let mut s = RateSystem::new(&[R1, R2, R2E]);
    let m = mi.i_ux1_y.min(mi.i_ux1_z);
    add(&mut s, &[(R1, 1.0)], m);
    add(&mut s, &[(R2, 1.0)], mi.i_uv_z_gx1);
    add(&mut s, &[(R1, 1.0), (R2, 1.0)], m + mi.i_v_z_g);
    add(&mut s, &[(R2E, 1.0), (R2, -1.0)], 0.0);
    let d = mi.i_v_z_g - mi.i_v_y_g;
    secrecy_rows(&mut s, d, &[(&[(R2E, 1.0)], d)]);
    s
}

/// Intersection with R2e = R2, projected onto (R1, R2).
pub fn secrecy_slice(sys: &RateSystem) -> Result<RateSystem, RegionError> {
    let mut s = sys.clone();
    s.add_eq(&[(R2E, 1.0), (R2, -1.0)], 0.0)?;
    Ok(s.fme_eliminate(R2E)?.reorder(&[R1, R2])?)
}

pub fn corollary2_system(mi: &MiProfile) -> RateSystem {
    let mut s = RateSystem::new(&[R1, R2]);
    add(&mut s, &[(R1, 1.0)], mi.i_ux1_y.min(mi.i_ux1_z));
    add(&mut s, &[(R2, 1.0)], (mi.i_v_z_g - mi.i_v_y_g).max(0.0));
    s
}

pub fn degraded1_system(mi: &MiProfile) -> RateSystem {
    let mut s = RateSystem::new(&[R1, R2, R2E]);
    add(&mut s, &[(R2, 1.0)], mi.i_x2_z_gx1);
    add(&mut s, &[(R1, 1.0), (R2, 1.0)], mi.i_x1x2_y.min(mi.i_x1x2_z));
    add(&mut s, &[(R2E, 1.0)], 0.0);
    s
}

pub fn degraded2_system(mi: &MiProfile) -> RateSystem {
    let mut s = RateSystem::new(&[R1, R2, R2E]);
    add(&mut s, &[(R1, 1.0)], mi.i_ux1_y.min(mi.i_ux1_z));
    add(&mut s, &[(R2, 1.0)], mi.i_x2_z_g);
    add(&mut s, &[(R2E, 1.0), (R2, -1.0)], 0.0);
    let d = mi.i_x2_z_g - mi.i_x2_y_g;
    secrecy_rows(&mut s, d, &[(&[(R2E, 1.0)], d)]);
    s
}

/// The no-secrecy region over (R1, R2).
pub fn theorem4_system(mi: &MiProfile) -> RateSystem {
    let mut s = RateSystem::new(&[R1, R2]);
    add(&mut s, &[(R1, 1.0)], mi.i_ux1_y);
    add(&mut s, &[(R2, 1.0)], mi.i_x2_z_gx1);
    add(&mut s, &[(R1, 1.0), (R2, 1.0)], mi.i_ux1_y.min(mi.i_ux1_z) + mi.i_x2_z_g);
    s
}

/// [`theorem4_system`] with the extra row `R1 <= I(U,X1;Z)`.
pub fn theorem4_augmented(mi: &MiProfile) -> RateSystem {
    let mut s = theorem4_system(mi);
    add(&mut s, &[(R1, 1.0)], mi.i_ux1_z);
    s
}

/// Region families selectable for a sweep.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RegionKind {
    /// Rate-splitting region projected onto (R1, R2, R2e).
    Lemma1,
    CapacityEquivocation,
    Corollary1,
    /// Perfect-secrecy slice; points are lifted to (R1, R2, R2).
    Secrecy,
    /// No-secrecy region; points are lifted to (R1, R2, 0).
    NoSecrecy,
    NoSecrecyAugmented,
    Degraded1,
    Degraded2,
}

impl RegionKind {
    pub fn family(&self) -> InputKind {
        match self {
            RegionKind::CapacityEquivocation | RegionKind::Corollary1 | RegionKind::Secrecy => InputKind::Theorem1,
            _ => InputKind::Lemma1,
        }
    }

    pub fn system(&self, mi: &MiProfile) -> Result<RateSystem, RegionError> {
        Ok(match self {
            RegionKind::Lemma1 => lemma1_projected(mi)?,
            RegionKind::CapacityEquivocation => theorem1_system(mi),
            RegionKind::Corollary1 => corollary1_system(mi),
            RegionKind::Secrecy => corollary2_system(mi),
            RegionKind::NoSecrecy => theorem4_system(mi),
            RegionKind::NoSecrecyAugmented => theorem4_augmented(mi),
            RegionKind::Degraded1 => degraded1_system(mi),
            RegionKind::Degraded2 => degraded2_system(mi),
        })
    }

    /// Embeds a vertex of [`RegionKind::system`] into (R1, R2, R2e).
    pub fn lift(&self, p: &[f64]) -> Point3 {
        let c = |v: f64| v.max(0.0);
        match self {
            RegionKind::Secrecy => [c(p[0]), c(p[1]), c(p[1])],
            RegionKind::NoSecrecy | RegionKind::NoSecrecyAugmented => [c(p[0]), c(p[1]), 0.0],
            _ => [c(p[0]), c(p[1]), c(p[2]).min(c(p[1]))],
        }
    }
}

/// Distribution family explored by [`sweep_union`].
#[derive(Clone, Debug, PartialEq)]
pub struct SamplingSpec {
    pub card_u: usize,
    pub card_v: usize,
    /// Probability resolution of the simplex grid (multiples of 1/grid); 0 disables it.
    pub grid: usize,
    pub samples: usize,
    pub seed: u64,
    /// Maximum number of base distributions evaluated.
    pub budget: usize,
    /// Also evaluate, for every base distribution, the variant whose U
    /// reveals the private layer with the probability that balances
    /// I(U,X1;Y) against I(U,X1;Z).
    pub refine: bool,
}

pub const DEFAULT_GRID: usize = 4;
pub const DEFAULT_SAMPLES: usize = 20_000;
pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_BUDGET: usize = 1_000_000;

impl SamplingSpec {
    /// Default caps |U| <= |X1||X2| + 2 and |V| <= |X2| + 2.
    pub fn for_channel(ch: &CicChannel) -> Self {
        SamplingSpec {
            card_u: ch.card_x1() * ch.card_x2() + 2,
            card_v: ch.card_x2() + 2,
            grid: DEFAULT_GRID,
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
            budget: DEFAULT_BUDGET,
            refine: true,
        }
    }

    fn validate(&self) -> Result<(), RegionError> {
        if self.card_u == 0 || self.card_v == 0 {
            return Err(RegionError::BadSpec("auxiliary cardinalities must be positive".into()));
        }
        if self.grid == 0 && self.samples == 0 {
            return Err(RegionError::BadSpec("empty family: grid and samples are both zero".into()));
        }
        Ok(())
    }
}

/// Compositions of `total` into `parts` non-negative integers, in
/// lexicographic order.
fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(total: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=total {
            prefix.push(k);
            rec(total - k, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if parts > 0 {
        rec(total, parts, &mut Vec::new(), &mut out);
    }
    out
}

/// Deterministic choices of U as a function of (x1, w), w the private layer.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum UMap {
    Constant,
    Private,
    Common,
    Both,
}

impl UMap {
    fn card(&self, cx1: usize, cw: usize) -> usize {
        match self {
            UMap::Constant => 1,
            UMap::Private => cw,
            UMap::Common => cx1,
            UMap::Both => cx1 * cw,
        }
    }

    fn apply(&self, x1: usize, w: usize, cw: usize) -> usize {
        match self {
            UMap::Constant => 0,
            UMap::Private => w,
            UMap::Common => x1,
            UMap::Both => x1 * cw + w,
        }
    }
}

/// Grid member: U is a deterministic function of (x1, w), w = X2 or V = X2.
fn grid_member(
    ch: &CicChannel,
    spec: &SamplingSpec,
    family: InputKind,
    weights: &[usize],
    umap: UMap,
) -> Result<CicInputDist, RegionError> {
    let (cx1, cx2) = (ch.card_x1(), ch.card_x2());
    let cw = match family {
        InputKind::Lemma1 => cx2,
        InputKind::Theorem1 => cx2.min(spec.card_v),
    };
    let cu = spec.card_u;
    let total: usize = weights.iter().sum();
    match family {
        InputKind::Lemma1 => {
            let mut p = vec![0.0; cu * cx1 * cx2];
            for x1 in 0..cx1 {
                for w in 0..cw {
                    let u = umap.apply(x1, w, cw);
                    p[(u * cx1 + x1) * cx2 + w] = weights[x1 * cw + w] as f64 / total as f64;
                }
            }
            let vars = vec![VarId::new(U, cu)?, VarId::new(X1, cx1)?, VarId::new(X2, cx2)?];
            CicInputDist::lemma1_from_joint(&JointDist::new(vars, p)?)
        }
        InputKind::Theorem1 => {
            let cv = spec.card_v;
            let mut p = vec![0.0; cu * cx1 * cv];
            for x1 in 0..cx1 {
                for w in 0..cw {
                    let u = umap.apply(x1, w, cw);
                    p[(u * cx1 + x1) * cv + w] = weights[x1 * cw + w] as f64 / total as f64;
                }
            }
            let vars = vec![VarId::new(U, cu)?, VarId::new(X1, cx1)?, VarId::new(V, cv)?];
            let base = JointDist::new(vars, p)?;
            let x2 = Kernel::deterministic(&[VarId::new(V, cv)?], VarId::new(X2, cx2)?, |i| i[0] % cx2)?;
            CicInputDist::theorem1(base, x2)
        }
    }
}

/// The ordered base family: grid members first, then seeded random ones.
struct Family {
    grid: Vec<(Vec<usize>, UMap)>,
    samples: usize,
}

impl Family {
    fn new(ch: &CicChannel, spec: &SamplingSpec, family: InputKind) -> Self {
        let cx1 = ch.card_x1();
        let cw = match family {
            InputKind::Lemma1 => ch.card_x2(),
            InputKind::Theorem1 => ch.card_x2().min(spec.card_v),
        };
        let mut grid = Vec::new();
        if spec.grid > 0 {
            let maps: Vec<UMap> = [UMap::Constant, UMap::Private, UMap::Common, UMap::Both]
                .into_iter()
                .filter(|m| m.card(cx1, cw) <= spec.card_u)
                .collect();
            for w in compositions(spec.grid, cx1 * cw) {
                for m in &maps {
                    grid.push((w.clone(), *m));
                }
            }
        }
        Family { grid, samples: spec.samples }
    }

    fn len(&self) -> usize {
        self.grid.len() + self.samples
    }

    fn member(&self, ch: &CicChannel, spec: &SamplingSpec, family: InputKind, i: usize) -> Result<CicInputDist, RegionError> {
        if i < self.grid.len() {
            let (w, m) = &self.grid[i];
            return grid_member(ch, spec, family, w, *m);
        }
        let mut rng = task_rng(spec.seed, i as u64);
        // alternate dense and sparse draws
        let alpha = if i % 2 == 0 { 1.0 } else { 0.2 };
        random_member(&mut rng, ch, spec, family, alpha)
    }
}

fn random_member<R: Rng>(
    rng: &mut R,
    ch: &CicChannel,
    spec: &SamplingSpec,
    family: InputKind,
    alpha: f64,
) -> Result<CicInputDist, RegionError> {
    match family {
        InputKind::Lemma1 => sampling::random_lemma1_dist(rng, spec.card_u, ch.card_x1(), ch.card_x2(), alpha),
        InputKind::Theorem1 => {
            sampling::random_theorem1_dist(rng, spec.card_u, ch.card_x1(), spec.card_v, ch.card_x2(), alpha)
        }
    }
}

/// The mixing probability for [`CicInputDist::reveal_private`] that makes
/// I(U',X1;Y) = I(U',X1;Z), or `None` when Y already sees no more than Z.
pub fn balancing_lambda(mi: &MiProfile) -> Option<f64> {
    let (ay, az) = (mi.i_ux1_y, mi.i_ux1_z);
    if ay <= az {
        return None;
    }
    let cy = ay + mi.i_v_y_g;
    let cz = mi.i_uvx1_z;
    if cy >= cz {
        return Some(1.0);
    }
    Some((ay - az) / ((ay - az) - (cy - cz)))
}

/// One evaluated family member.
#[derive(Clone, Debug)]
pub struct MemberResult {
    pub index: usize,
    pub refined: bool,
    pub fingerprint: u64,
    pub profile: MiProfile,
    pub vertices: Vec<Point3>,
}

/// Every distribution of the family, refinements included, in evaluation order.
pub fn family_members(
    ch: &CicChannel,
    spec: &SamplingSpec,
    family: InputKind,
) -> Result<(Vec<CicInputDist>, bool), RegionError> {
    spec.validate()?;
    let fam = Family::new(ch, spec, family);
    let n = fam.len().min(spec.budget);
    let partial = fam.len() > spec.budget;
    let per: Vec<Result<Vec<CicInputDist>, RegionError>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let d = fam.member(ch, spec, family, i)?;
            let mut out = vec![d];
            if spec.refine {
                let mi = mi_profile(ch, &out[0])?;
                if let Some(l) = balancing_lambda(&mi) {
                    out.push(out[0].reveal_private(l)?);
                }
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for r in per {
        all.extend(r?);
    }
    Ok((all, partial))
}

/// Evaluates the family member by member (parallel, merged in index order).
pub fn evaluate_family(
    ch: &CicChannel,
    spec: &SamplingSpec,
    kind: RegionKind,
) -> Result<(Vec<MemberResult>, bool), RegionError> {
    spec.validate()?;
    let family = kind.family();
    let fam = Family::new(ch, spec, family);
    let n = fam.len().min(spec.budget);
    let partial = fam.len() > spec.budget;
    let eval = |index: usize, refined: bool, d: &CicInputDist, mi: MiProfile| -> Result<MemberResult, RegionError> {
        let verts = kind.system(&mi)?.vertices()?;
        Ok(MemberResult {
            index,
            refined,
            fingerprint: d.fingerprint(),
            profile: mi,
            vertices: verts.points.iter().map(|p| kind.lift(p)).collect(),
        })
    };
    let per: Vec<Result<Vec<MemberResult>, RegionError>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let d = fam.member(ch, spec, family, i)?;
            let mi = mi_profile(ch, &d)?;
            let mut out = vec![eval(i, false, &d, mi)?];
            if spec.refine {
                if let Some(l) = balancing_lambda(&mi) {
                    let r = d.reveal_private(l)?;
                    let rmi = mi_profile(ch, &r)?;
                    out.push(eval(i, true, &r, rmi)?);
                }
            }
            Ok(out)
        })
        .collect();
    let mut all = Vec::new();
    for r in per {
        all.extend(r?);
    }
    Ok((all, partial))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CloudPoint {
    pub rates: Point3,
    /// Fingerprint of the generating distribution.
    pub source: u64,
}

/// Accumulated achievable (R1, R2, R2e) points.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionCloud {
    pub points: Vec<CloudPoint>,
    pub hull_flag: bool,
    /// Set when the family was truncated by the budget.
    pub partial: bool,
    /// Number of distributions evaluated.
    pub evaluated: usize,
}

fn cmp_point(a: &CloudPoint, b: &CloudPoint) -> std::cmp::Ordering {
    a.rates
        .iter()
        .zip(&b.rates)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
        .then(a.source.cmp(&b.source))
}

impl RegionCloud {
    /// A cloud from raw points: sorted, exact duplicates merged.
    pub fn from_points(mut points: Vec<CloudPoint>, partial: bool, evaluated: usize) -> Self {
        points.sort_by(cmp_point);
        points.dedup_by(|a, b| a.rates == b.rates);
        RegionCloud { points, hull_flag: false, partial, evaluated }
    }

    pub fn rates(&self) -> Vec<Point3> {
        self.points.iter().map(|p| p.rates).collect()
    }

    pub fn hull(&self) -> Hull {
        convex_hull(&self.rates())
    }

    /// The cloud reduced to the extreme points of its convex hull.
    pub fn convexified(&self) -> RegionCloud {
        let h = self.hull();
        let pts = self
            .points
            .iter()
            .filter(|p| h.vertices.contains(&p.rates))
            .copied()
            .collect();
        let mut out = RegionCloud::from_points(pts, self.partial, self.evaluated);
        out.hull_flag = true;
        out
    }

    /// Largest coordinate-wise value of each rate over the cloud.
    pub fn max_rates(&self) -> Point3 {
        self.points.iter().fold([0.0; 3], |m, p| [m[0].max(p.rates[0]), m[1].max(p.rates[1]), m[2].max(p.rates[2])])
    }
}

/// Union of the per-distribution regions of `kind` over the family in `spec`.
pub fn sweep_union(ch: &CicChannel, spec: &SamplingSpec, kind: RegionKind) -> Result<RegionCloud, RegionError> {
    let (members, partial) = evaluate_family(ch, spec, kind)?;
    let evaluated = members.len();
    let points = members
        .into_iter()
        .flat_map(|m| {
            let src = m.fingerprint;
            m.vertices.into_iter().map(move |rates| CloudPoint { rates, source: src })
        })
        .collect();
    Ok(RegionCloud::from_points(points, partial, evaluated))
}

/// Union over an explicit list of distributions.
pub fn union_over(ch: &CicChannel, dists: &[CicInputDist], kind: RegionKind) -> Result<RegionCloud, RegionError> {
    let per: Vec<Result<Vec<CloudPoint>, RegionError>> = dists
        .par_iter()
        .map(|d| {
            let mi = mi_profile(ch, d)?;
            let src = d.fingerprint();
            let v = kind.system(&mi)?.vertices()?;
            Ok(v.points.iter().map(|p| CloudPoint { rates: kind.lift(p), source: src }).collect())
        })
        .collect();
    let mut points = Vec::new();
    for r in per {
        points.extend(r?);
    }
    Ok(RegionCloud::from_points(points, false, dists.len()))
}

/// Alphabet sizes (U, X1, V, X2, Y, Z) for the FME equivalence check.
pub type FmeCards = [usize; 6];

/// True when every point of each set lies within `tol` (max norm) of a
/// point of the other.
pub fn vertex_sets_match(a: &[Vec<f64>], b: &[Vec<f64>], tol: f64) -> bool {
    let near = |p: &Vec<f64>, set: &[Vec<f64>]| {
        set.iter().any(|q| p.iter().zip(q).all(|(x, y)| (x - y).abs() <= tol))
    };
    a.iter().all(|p| near(p, b)) && b.iter().all(|p| near(p, a))
}

#[derive(Clone, Debug, PartialEq)]
pub struct FmeFailure {
    pub index: usize,
    pub cards: FmeCards,
    pub profile: MiProfile,
    pub reason: String,
}

/// One instance of the FME check: a random channel and auxiliary-V input drawn
/// from `task_rng(seed, index)`. Cardinalities are drawn from {2,3} for the
/// channel alphabets and {1,2,3} for U and V unless given.
pub fn fme_check_instance(seed: u64, index: usize, cards: Option<FmeCards>) -> Result<Option<FmeFailure>, RegionError> {
    let mut rng = task_rng(seed, index as u64);
    let c = cards.unwrap_or_else(|| {
        [
            rng.random_range(1..=3),
            rng.random_range(2..=3),
            rng.random_range(1..=3),
            rng.random_range(2..=3),
            rng.random_range(2..=3),
            rng.random_range(2..=3),
        ]
    });
    let alpha = if index % 2 == 0 { 1.0 } else { 0.3 };
    let ch = sampling::random_channel(&mut rng, [c[1], c[3], c[4], c[5]], alpha)?;
    let d = sampling::random_theorem1_dist(&mut rng, c[0], c[1], c[2], c[3], alpha)?;
    let mi = mi_profile(&ch, &d)?;
    let fail = |reason: String| Ok(Some(FmeFailure { index, cards: c, profile: mi, reason }));
    let proj = lemma1_projected(&mi.with_v_as_x2())?.vertices()?;
    let t1 = theorem1_system(&mi);
    let tv = t1.vertices()?;
    if !vertex_sets_match(&proj.points, &tv.points, 1e-7) {
        return fail(format!("vertex sets differ: projected {:?} vs direct {:?}", proj.points, tv.points));
    }
    if !corollary1_system(&mi).subset_of(&t1, 1e-7)? {
        return fail("corollary1 system not contained in the capacity-equivocation region".into());
    }
    Ok(None)
}

/// Runs `samples` instances in parallel; failures in index order.
pub fn fme_check(samples: usize, seed: u64, cards: Option<FmeCards>) -> Result<Vec<FmeFailure>, RegionError> {
    let out: Vec<Result<Option<FmeFailure>, RegionError>> =
        (0..samples).into_par_iter().map(|i| fme_check_instance(seed, i, cards)).collect();
    let mut fails = Vec::new();
    for r in out {
        if let Some(f) = r? {
            fails.push(f);
        }
    }
    Ok(fails)
}
