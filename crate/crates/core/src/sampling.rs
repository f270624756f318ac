//! Seeded random generation of channels and input distributions.
//!
//! Parallel tasks never share a generator: task `i` of a run with root seed
//! `s` uses `ChaCha8Rng::seed_from_u64(derive_seed(s, i))`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::channels::{CicChannel, ChannelError, X1, X2};
use crate::probability::{JointDist, Kernel, ProbError, VarId};
use crate::regions::{CicInputDist, RegionError, U, V};

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of task `index` under `root`: `splitmix64(root + 0x9E3779B97F4A7C15 * (index + 1))`.
pub fn derive_seed(root: u64, index: u64) -> u64 {
    splitmix64(root.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

pub fn task_rng(root: u64, index: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(root, index))
}

/// A draw from the symmetric Dirichlet distribution with parameter `alpha`.
pub fn dirichlet<R: Rng + ?Sized>(rng: &mut R, n: usize, alpha: f64) -> Vec<f64> {
    let gamma = Gamma::new(alpha, 1.0).expect("positive shape");
    loop {
        let w: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
        let s: f64 = w.iter().sum();
        if s > 0.0 && s.is_finite() {
            return w.into_iter().map(|v| v / s).collect();
        }
    }
}

fn rows<R: Rng + ?Sized>(rng: &mut R, count: usize, width: usize, alpha: f64) -> Vec<f64> {
    (0..count).flat_map(|_| dirichlet(rng, width, alpha)).collect()
}

pub fn random_channel<R: Rng + ?Sized>(
    rng: &mut R,
    cards: [usize; 4],
    alpha: f64,
) -> Result<CicChannel, ChannelError> {
    let [a, b, c, d] = cards;
    CicChannel::new(a, b, c, d, rows(rng, a * b, c * d, alpha))
}

/// p(u,x1) p(x2|u,x1) with Dirichlet components.
pub fn random_lemma1_dist<R: Rng + ?Sized>(
    rng: &mut R,
    card_u: usize,
    card_x1: usize,
    card_x2: usize,
    alpha: f64,
) -> Result<CicInputDist, RegionError> {
    let u = VarId::new(U, card_u)?;
    let x1 = VarId::new(X1, card_x1)?;
    let base = JointDist::new(vec![u, x1], dirichlet(rng, card_u * card_x1, alpha))?;
    let x2 = Kernel::new(&[U, X1], VarId::new(X2, card_x2)?, rows(rng, card_u * card_x1, card_x2, alpha))?;
    CicInputDist::lemma1(base, x2)
}

/// p(u,x1,v) p(x2|v) with Dirichlet components.
pub fn random_theorem1_dist<R: Rng + ?Sized>(
    rng: &mut R,
    card_u: usize,
    card_x1: usize,
    card_v: usize,
    card_x2: usize,
    alpha: f64,
) -> Result<CicInputDist, RegionError> {
    let vars = vec![VarId::new(U, card_u)?, VarId::new(X1, card_x1)?, VarId::new(V, card_v)?];
    let base = JointDist::new(vars, dirichlet(rng, card_u * card_x1 * card_v, alpha))?;
    let x2 = Kernel::new(&[V], VarId::new(X2, card_x2)?, rows(rng, card_v, card_x2, alpha))?;
    CicInputDist::theorem1(base, x2)
}

/// A random joint distribution over variables `A0, A1, ...` with the given
/// cardinalities.
pub fn random_joint<R: Rng + ?Sized>(rng: &mut R, cards: &[usize], alpha: f64) -> Result<JointDist, ProbError> {
    let vars = cards
        .iter()
        .enumerate()
        .map(|(i, &c)| VarId::new(format!("A{i}"), c))
        .collect::<Result<Vec<_>, _>>()?;
    let n = cards.iter().product();
    JointDist::new(vars, dirichlet(rng, n, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_are_distinct_and_stable() {
        let a: Vec<u64> = (0..1000).map(|i| derive_seed(42, i)).collect();
        let mut b = a.clone();
        b.sort_unstable();
        b.dedup();
        assert_eq!(b.len(), a.len());
        assert_eq!(derive_seed(42, 7), derive_seed(42, 7));
        assert_ne!(derive_seed(42, 7), derive_seed(43, 7));
    }

    #[test]
    fn dirichlet_is_normalized() {
        let mut rng = task_rng(1, 0);
        for alpha in [0.1, 1.0, 5.0] {
            let p = dirichlet(&mut rng, 6, alpha);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|v| *v >= 0.0));
        }
    }
}
