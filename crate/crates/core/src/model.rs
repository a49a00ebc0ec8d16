//! Independent, possibly biased Rademacher coordinates and their normalized
//! versions `Y_k = (X_k - p_k + q_k) / (2 sqrt(p_k q_k))`.
//!
//! Outcome `ω ∈ {-1,+1}^n` is encoded as a bit mask: bit `k` is set when
//! `X_{k+1} = +1`.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ChaosError, Result};

pub const MIN_PROB: f64 = 1e-6;
/// Largest horizon for which subsets fit in a `u64` mask.
pub const MAX_HORIZON: usize = 63;

/// Size limits for exponential-cost routines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Caps {
    /// Largest horizon for full outcome enumeration.
    pub enumeration: usize,
    /// Largest horizon for chaos decomposition of a value table.
    pub stroock: usize,
    /// Largest kernel support for the factorized fourth-moment engine.
    pub factorized_support: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            enumeration: 24,
            stroock: 14,
            factorized_support: 60,
        }
    }
}

/// A single point of `{-1,+1}^n` with its probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub signs: Vec<i8>,
    pub weight: f64,
}

impl Outcome {
    pub fn index(&self) -> usize {
        self.signs
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 0)
            .fold(0usize, |acc, (k, _)| acc | (1 << k))
    }
}

#[derive(Debug, Clone)]
pub struct RademacherModel {
    probs: Vec<f64>,
    y_plus: Vec<f64>,
    y_minus: Vec<f64>,
    caps: Caps,
    weights: OnceLock<Vec<f64>>,
}

impl PartialEq for RademacherModel {
    fn eq(&self, other: &Self) -> bool {
        self.probs == other.probs && self.caps == other.caps
    }
}

/// Value of `Y` on the event `X = sign` for success probability `p`.
pub fn normalized_value(p: f64, sign: i8) -> f64 {
    let q = 1.0 - p;
    if sign > 0 {
        (q / p).sqrt()
    } else {
        -(p / q).sqrt()
    }
}

/// `E[Y^r]` for a single normalized coordinate.
pub fn y_moment(p: f64, r: u32) -> f64 {
    let q = 1.0 - p;
    p * normalized_value(p, 1).powi(r as i32) + q * normalized_value(p, -1).powi(r as i32)
}

/// `E[Y^3] = (q - p) / sqrt(pq)` in closed form.
pub fn skewness(p: f64) -> f64 {
    let q = 1.0 - p;
    (q - p) / (p * q).sqrt()
}

/// `λ = E[Y^4] = 1 + (q - p)^2 / (pq)` in closed form.
pub fn kurtosis(p: f64) -> f64 {
    let q = 1.0 - p;
    1.0 + (q - p) * (q - p) / (p * q)
}

impl RademacherModel {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() > MAX_HORIZON {
            return Err(ChaosError::Capacity {
                what: "model horizon",
                requested: probs.len(),
                cap: MAX_HORIZON,
            });
        }
        for (k, &p) in probs.iter().enumerate() {
            if !(MIN_PROB..=1.0 - MIN_PROB).contains(&p) {
                return Err(ChaosError::domain(format!(
                    "p_{} = {p} lies outside [{MIN_PROB}, 1 - {MIN_PROB}]",
                    k + 1
                )));
            }
        }
        let y_plus = probs.iter().map(|&p| normalized_value(p, 1)).collect();
        let y_minus = probs.iter().map(|&p| normalized_value(p, -1)).collect();
        Ok(RademacherModel {
            probs,
            y_plus,
            y_minus,
            caps: Caps::default(),
            weights: OnceLock::new(),
        })
    }

    pub fn homogeneous(p: f64, n: usize) -> Result<Self> {
        Self::new(vec![p; n])
    }

    pub fn symmetric(n: usize) -> Self {
        Self::homogeneous(0.5, n).expect("symmetric model is always valid")
    }

    pub fn with_caps(mut self, caps: Caps) -> Self {
        self.caps = caps;
        self
    }

    pub fn caps(&self) -> Caps {
        self.caps
    }

    pub fn horizon(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn p(&self, k: usize) -> f64 {
        self.probs[k]
    }

    pub fn q(&self, k: usize) -> f64 {
        1.0 - self.probs[k]
    }

    pub fn pq(&self, k: usize) -> f64 {
        self.probs[k] * (1.0 - self.probs[k])
    }

    pub fn y_plus(&self, k: usize) -> f64 {
        self.y_plus[k]
    }

    pub fn y_minus(&self, k: usize) -> f64 {
        self.y_minus[k]
    }

    pub fn y_value(&self, k: usize, sign: i8) -> f64 {
        if sign > 0 {
            self.y_plus[k]
        } else {
            self.y_minus[k]
        }
    }

    pub fn y_moment(&self, k: usize, r: u32) -> f64 {
        y_moment(self.probs[k], r)
    }

    pub fn is_symmetric(&self) -> bool {
        self.probs.iter().all(|&p| p == 0.5)
    }

    pub fn is_homogeneous(&self) -> bool {
        self.probs.windows(2).all(|w| w[0] == w[1])
    }

    /// Restricts the model to its first `n` coordinates.
    pub fn truncate(&self, n: usize) -> Result<Self> {
        Ok(Self::new(self.probs[..n.min(self.horizon())].to_vec())?.with_caps(self.caps))
    }

    pub fn check_enumerable(&self) -> Result<()> {
        if self.horizon() > self.caps.enumeration {
            return Err(ChaosError::Capacity {
                what: "outcome enumeration",
                requested: self.horizon(),
                cap: self.caps.enumeration,
            });
        }
        Ok(())
    }

    /// Probability of every outcome, indexed by bit mask. Cached.
    pub fn weights(&self) -> Result<&[f64]> {
        self.check_enumerable()?;
        Ok(self.weights.get_or_init(|| {
            let mut w = vec![1.0];
            for (k, &p) in self.probs.iter().enumerate() {
                let q = 1.0 - p;
                let mut next = vec![0.0; w.len() * 2];
                let half = 1usize << k;
                for (i, &x) in w.iter().enumerate() {
                    next[i] = x * q;
                    next[i + half] = x * p;
                }
                w = next;
            }
            w
        }))
    }

    pub fn outcome(&self, index: usize) -> Outcome {
        let signs: Vec<i8> = (0..self.horizon())
            .map(|k| if index >> k & 1 == 1 { 1 } else { -1 })
            .collect();
        let weight = signs
            .iter()
            .zip(&self.probs)
            .map(|(&s, &p)| if s > 0 { p } else { 1.0 - p })
            .product();
        Outcome { signs, weight }
    }

    pub fn enumerate_outcomes(&self) -> Result<impl Iterator<Item = Outcome> + '_> {
        self.check_enumerable()?;
        Ok((0..1usize << self.horizon()).map(move |i| self.outcome(i)))
    }

    /// Draws `count` independent outcome indices from a seeded ChaCha stream.
    pub fn sample_indices(&self, seed: u64, count: usize) -> Vec<u64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..count)
            .map(|_| {
                self.probs.iter().enumerate().fold(0u64, |acc, (k, &p)| {
                    if rng.random::<f64>() < p {
                        acc | (1 << k)
                    } else {
                        acc
                    }
                })
            })
            .collect()
    }

    pub fn sample(&self, seed: u64, count: usize) -> Vec<Outcome> {
        self.sample_indices(seed, count)
            .into_iter()
            .map(|i| {
                let mut o = self.outcome(i as usize);
                o.weight = 1.0 / count as f64;
                o
            })
            .collect()
    }
}
