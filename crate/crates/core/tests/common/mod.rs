//! Helpers shared by the integration tests.
#![allow(dead_code)]

use num_rational::BigRational;
use rand::seq::IndexedRandom;
use rand::Rng;
use widths_core::besov_embedding::{EmbeddingParams, RhoSpec};
use widths_core::rng::keyed;
use widths_core::scalar::Scalar;

pub type Q = BigRational;

pub fn q(num: i64, den: i64) -> Q {
    Q::ratio(num, den)
}

/// Exact part-1 parameters (`p2, q2 >= 2`) with `β_g = δ`, `β_v = 0`, `γ_g = δ + 1`,
/// `γ_v = 0` and `ρ ≡ 1`.
pub fn random_part1(seed: u64, draw: u64) -> EmbeddingParams<Q> {
    let mut rng = keyed(seed, draw, 0);
    let firsts = [q(3, 2), q(2, 1), q(5, 2), q(3, 1), q(4, 1)];
    let seconds = [q(2, 1), q(5, 2), q(3, 1), q(4, 1), q(6, 1), q(8, 1)];
    let pick_pair = |rng: &mut rand_chacha::ChaCha8Rng| loop {
        let a = firsts.choose(rng).unwrap().clone();
        let b = seconds.choose(rng).unwrap().clone();
        if a <= b {
            return (a, b);
        }
    };
    let (p1, p2) = pick_pair(&mut rng);
    let (q1, q2) = pick_pair(&mut rng);
    let d: u32 = rng.random_range(1..=3);
    let delta = q(rng.random_range(1..=32), 8);
    let alpha = q(rng.random_range(1..=40), 10);
    let alpha_g = q(rng.random_range(0..=10), 10) * alpha.clone();
    let dq = Q::int(d as i64);
    EmbeddingParams {
        d,
        s1: delta.clone() - dq.clone() / p2.clone() + dq / p1.clone(),
        s2: Q::int(0),
        p1,
        q1,
        p2,
        q2,
        beta_g: delta.clone(),
        beta_v: Q::int(0),
        alpha_g: alpha_g.clone(),
        alpha_v: alpha - alpha_g,
        gamma_g: delta + Q::int(1),
        gamma_v: Q::int(0),
        rho_g: RhoSpec::ONE,
        rho_v: RhoSpec::ONE,
    }
}

pub fn params_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../../params")
}
