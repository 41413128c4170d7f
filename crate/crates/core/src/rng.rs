//! Seeded randomness.
//!
//! Every random decision in a run flows from one root seed through named
//! sub-streams, so paired runs (e.g. the two benchmark arms) can share the
//! streams they must share and nothing else.

pub use rand::RngExt;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::scalar::Scalar;

/// Deterministic RNG used everywhere in the crate.
pub type Rng = ChaCha8Rng;

/// FNV-1a over the stream name; mixed into the seed below.
fn fnv1a(name: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in name.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

/// Derived seed for the named sub-stream of a root seed.
pub fn derive_seed(seed: u64, name: &str) -> u64 {
    splitmix(seed ^ fnv1a(name))
}

/// RNG for the named sub-stream of a root seed.
pub fn stream(seed: u64, name: &str) -> Rng {
    Rng::seed_from_u64(derive_seed(seed, name))
}

/// Derived root seed for a numbered trial (e.g. one benchmark seed).
pub fn trial_seed(root: u64, index: u64) -> u64 {
    splitmix(root.wrapping_add(splitmix(index)))
}

/// Standard normal via Box-Muller, always sampled in f64 so both precisions
/// see the same underlying stream.
pub fn standard_normal<T: Scalar>(rng: &mut Rng) -> T {
    let u1: f64 = loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            break u;
        }
    };
    let u2: f64 = rng.random();
    let r = (-2.0 * u1.ln()).sqrt();
    T::from_f64(r * (std::f64::consts::TAU * u2).cos())
}

/// Uniform in [-a, a), sampled in f64.
pub fn uniform_symmetric<T: Scalar>(rng: &mut Rng, a: f64) -> T {
    let u: f64 = rng.random();
    T::from_f64((2.0 * u - 1.0) * a)
}

/// Fisher-Yates shuffle driven by the given stream.
pub fn shuffle<T>(rng: &mut Rng, items: &mut [T]) {
    for i in (1..items.len()).rev() {
        let j = rng.random_range(0..=i);
        items.swap(i, j);
    }
}

/// Uniform sample of `k` distinct values from `0..n` (selection sampling),
/// returned in ascending order.
pub fn sample_indices(rng: &mut Rng, n: usize, k: usize) -> Vec<usize> {
    assert!(k <= n, "cannot sample {k} of {n}");
    let mut out = Vec::with_capacity(k);
    let mut remaining = n;
    let mut needed = k;
    for idx in 0..n {
        if needed == 0 {
            break;
        }
        if rng.random_range(0..remaining) < needed {
            out.push(idx);
            needed -= 1;
        }
        remaining -= 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_deterministic_and_distinct() {
        let mut a1 = stream(7, "init");
        let mut a2 = stream(7, "init");
        let mut b = stream(7, "dropout");
        let x1: u64 = a1.random();
        let x2: u64 = a2.random();
        let y: u64 = b.random();
        assert_eq!(x1, x2);
        assert_ne!(x1, y);
    }

    #[test]
    fn normal_moments() {
        let mut rng = stream(1, "normal");
        let n = 200_000;
        let (mut sum, mut sq) = (0.0, 0.0);
        for _ in 0..n {
            let z: f64 = standard_normal(&mut rng);
            sum += z;
            sq += z * z;
        }
        let mean = sum / n as f64;
        let var = sq / n as f64 - mean * mean;
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.02, "var {var}");
    }

    #[test]
    fn sample_indices_distinct_and_bounded() {
        let mut rng = stream(3, "sample");
        let s = sample_indices(&mut rng, 50, 12);
        assert_eq!(s.len(), 12);
        for w in s.windows(2) {
            assert!(w[0] < w[1]);
        }
        assert!(*s.last().unwrap() < 50);
    }
}
