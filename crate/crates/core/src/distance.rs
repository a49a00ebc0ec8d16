//! Exact Kolmogorov and Wasserstein distances between a finitely supported
//! law and the standard normal.

use libm::erfc;
use serde::Serialize;

use crate::chaos::ValueTable;
use crate::error::{ChaosError, Result};
use crate::model::RademacherModel;

/// Atoms closer than this are merged.
pub const ATOM_MERGE: f64 = 1e-12;
pub const MIN_SAMPLES: usize = 1000;

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Antiderivative of `Φ` vanishing at `-∞`: `x Φ(x) + φ(x)`.
fn phi_integral(x: f64) -> f64 {
    x * normal_cdf(x) + normal_pdf(x)
}

/// Solves `Φ(x) = c` for `c ∈ (0,1)` by safeguarded Newton steps.
fn normal_quantile(c: f64) -> f64 {
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    let mut x = 0.0f64;
    for _ in 0..200 {
        let f = normal_cdf(x) - c;
        if f > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let d = normal_pdf(x);
        let step = if d > 0.0 { x - f / d } else { f64::NAN };
        let next = if step > lo && step < hi {
            step
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-15 * (1.0 + x.abs()) {
            return next;
        }
        x = next;
    }
    x
}

/// A law with finitely many atoms, sorted ascending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscreteLaw {
    pub atoms: Vec<f64>,
    pub probs: Vec<f64>,
}

impl DiscreteLaw {
    /// Merges atoms within [`ATOM_MERGE`] of the first atom of a run.
    pub fn from_weighted(mut pairs: Vec<(f64, f64)>) -> Result<Self> {
        if pairs
            .iter()
            .any(|(x, w)| !x.is_finite() || !w.is_finite() || *w < 0.0)
        {
            return Err(ChaosError::domain("non-finite atom or negative weight"));
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut atoms: Vec<f64> = Vec::new();
        let mut probs: Vec<f64> = Vec::new();
        let mut anchor = f64::NEG_INFINITY;
        for (x, w) in pairs {
            if w == 0.0 {
                continue;
            }
            if x - anchor <= ATOM_MERGE {
                *probs.last_mut().expect("anchor implies an atom") += w;
            } else {
                anchor = x;
                atoms.push(x);
                probs.push(w);
            }
        }
        if atoms.is_empty() {
            return Err(ChaosError::domain("law has no mass"));
        }
        Ok(DiscreteLaw { atoms, probs })
    }

    pub fn of_table(t: &ValueTable, model: &RademacherModel) -> Result<Self> {
        let w = model.weights()?;
        Self::from_weighted(t.values().iter().copied().zip(w.iter().copied()).collect())
    }

    pub fn empirical(samples: &[f64]) -> Result<Self> {
        let w = 1.0 / samples.len() as f64;
        Self::from_weighted(samples.iter().map(|&x| (x, w)).collect())
    }

    /// Cumulative probabilities at each atom.
    fn cdf(&self) -> Vec<f64> {
        self.probs
            .iter()
            .scan(0.0, |acc, p| {
                *acc += p;
                Some(*acc)
            })
            .collect()
    }

    /// `sup_x |F(x) - Φ(x)|`, attained at an atom or its left limit.
    pub fn kolmogorov(&self) -> (f64, f64) {
        let mut best = (0.0, f64::NAN);
        let mut before = 0.0;
        for (&x, c) in self.atoms.iter().zip(self.cdf()) {
            let ph = normal_cdf(x);
            let d = (c - ph).abs().max((before - ph).abs());
            if d > best.0 {
                best = (d, x);
            }
            before = c;
        }
        best
    }

    /// `∫ |F(x) - Φ(x)| dx`, integrated in closed form on each gap between
    /// atoms.
    pub fn wasserstein(&self) -> f64 {
        let cdf = self.cdf();
        let first = self.atoms[0];
        let last = *self.atoms.last().expect("nonempty");
        let mut total = phi_integral(first) + phi_integral(-last);
        for i in 0..self.atoms.len() - 1 {
            let (u, v) = (self.atoms[i], self.atoms[i + 1]);
            let c = cdf[i].clamp(0.0, 1.0);
            total += gap_integral(c, u, v);
        }
        total
    }
}

/// `∫_u^v |c - Φ(x)| dx`.
fn gap_integral(c: f64, u: f64, v: f64) -> f64 {
    let below = |a: f64, b: f64| c * (b - a) - (phi_integral(b) - phi_integral(a));
    let (pu, pv) = (normal_cdf(u), normal_cdf(v));
    if c >= pv {
        below(u, v)
    } else if c <= pu {
        -below(u, v)
    } else {
        let x = normal_quantile(c).clamp(u, v);
        below(u, x) - below(x, v)
    }
}

/// Exact distances of a table's law to `N(0,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Distances {
    pub kolmogorov: f64,
    pub kolmogorov_at: f64,
    pub wasserstein: f64,
    pub atoms: usize,
}

pub fn exact_distances(t: &ValueTable, model: &RademacherModel) -> Result<Distances> {
    let law = DiscreteLaw::of_table(t, model)?;
    let (k, at) = law.kolmogorov();
    Ok(Distances {
        kolmogorov: k,
        kolmogorov_at: at,
        wasserstein: law.wasserstein(),
        atoms: law.atoms.len(),
    })
}

pub fn kolmogorov_to_normal(t: &ValueTable, model: &RademacherModel) -> Result<f64> {
    Ok(DiscreteLaw::of_table(t, model)?.kolmogorov().0)
}

/// Validates `tol` and returns the Wasserstein distance. The tails are
/// integrated in closed form, so the result is exact up to rounding for
/// every positive `tol`.
pub fn wasserstein_to_normal(t: &ValueTable, model: &RademacherModel, tol: f64) -> Result<f64> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(ChaosError::domain("tolerance must be positive"));
    }
    Ok(DiscreteLaw::of_table(t, model)?.wasserstein())
}

/// Sample-based distances with a Dvoretzky-Kiefer-Wolfowitz band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalDistances {
    pub samples: usize,
    pub kolmogorov: f64,
    pub wasserstein: f64,
    /// Half-width `sqrt(ln(2/α) / 2N)` of the uniform CDF band.
    pub dkw_half_width: f64,
    pub confidence: f64,
}

pub fn empirical_distances(samples: &[f64], confidence: f64) -> Result<EmpiricalDistances> {
    if samples.len() < MIN_SAMPLES {
        return Err(ChaosError::domain(format!(
            "need at least {MIN_SAMPLES} samples, got {}",
            samples.len()
        )));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(ChaosError::domain("confidence must lie in (0,1)"));
    }
    let law = DiscreteLaw::empirical(samples)?;
    let alpha = 1.0 - confidence;
    Ok(EmpiricalDistances {
        samples: samples.len(),
        kolmogorov: law.kolmogorov().0,
        wasserstein: law.wasserstein(),
        dkw_half_width: ((2.0 / alpha).ln() / (2.0 * samples.len() as f64)).sqrt(),
        confidence,
    })
}
