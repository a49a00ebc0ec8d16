//! Constants and evaluated right-hand sides of the fourth-moment-influence
//! bounds, the abstract gradient bounds, and Hoeffding decompositions.

mod general;
mod hoeffding;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::Serialize;

use crate::chaos::ChaosVector;
use crate::error::{ChaosError, Result};
use crate::kernel::Kernel;
use crate::model::RademacherModel;
use crate::numeric::{binomial, factorial};

pub use general::{abstract_bounds, AbstractBounds};
pub use hoeffding::{dejong_bound, DeJongReport, HoeffdingDecomposition};

/// `γ_m = 2 (2m-1)! Σ_{r=1}^m r! C(m,r)²`.
pub fn gamma_m(m: usize) -> f64 {
    if m == 0 {
        return 0.0;
    }
    let s: f64 = (1..=m).map(|r| factorial(r) * binomial(m, r).powi(2)).sum();
    2.0 * factorial(2 * m - 1) * s
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WassersteinConstants {
    pub c1: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KolmogorovConstants {
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub k4: f64,
}

pub fn wasserstein_constants(m: usize) -> WassersteinConstants {
    let mf = m as f64;
    let lead = (2.0 / PI).sqrt() * (2.0 * mf - 1.0) / (2.0 * mf);
    WassersteinConstants {
        c1: lead + ((4.0 * mf - 3.0) / mf).sqrt(),
        c2: (lead + ((6.0 * mf - 3.0) / mf).sqrt()) * gamma_m(m).sqrt(),
    }
}

pub fn kolmogorov_constants(m: usize) -> KolmogorovConstants {
    let mf = m as f64;
    let g = gamma_m(m).sqrt();
    let s = (8.0 * mf * mf - 7.0).sqrt();
    KolmogorovConstants {
        k1: (2.0 * mf - 1.0 + 2.0 * s * (4.0 * mf - 3.0).sqrt()) / (2.0 * mf),
        k2: (4.0 * mf * mf - 3.0 * mf).sqrt() / (2.0 * mf),
        k3: (2.0 * mf - 1.0 + 2.0 * s * (6.0 * mf - 3.0).sqrt()) / (2.0 * mf) * g,
        k4: (6.0 * mf * mf - 3.0 * mf).sqrt() / (2.0 * mf) * g,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Wasserstein,
    Kolmogorov,
}

/// An evaluated bound with its constituent terms.
#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub kind: BoundKind,
    pub order: usize,
    pub value: f64,
    pub terms: BTreeMap<String, f64>,
    pub constants: BTreeMap<String, f64>,
}

fn check_order(m: usize) -> Result<()> {
    if m == 0 {
        return Err(ChaosError::domain("bounds need order m >= 1"));
    }
    Ok(())
}

/// `C₁ sqrt|E[F⁴] - 3| + C₂ sqrt(sup Inf)`.
pub fn wasserstein_bound(fourth: f64, sup_influence: f64, m: usize) -> Result<BoundReport> {
    check_order(m)?;
    let c = wasserstein_constants(m);
    let a = c.c1 * (fourth - 3.0).abs().sqrt();
    let b = c.c2 * sup_influence.sqrt();
    Ok(BoundReport {
        kind: BoundKind::Wasserstein,
        order: m,
        value: a + b,
        terms: BTreeMap::from([
            ("fourth_moment".into(), fourth),
            ("sup_influence".into(), sup_influence),
            ("moment_term".into(), a),
            ("influence_term".into(), b),
        ]),
        constants: BTreeMap::from([("C1".into(), c.c1), ("C2".into(), c.c2)]),
    })
}

/// `(K₁ + K₂ (μ^{1/4} + 1) μ^{1/4}) sqrt|μ - 3| + (K₃ + K₄ (μ^{1/4} + 1) μ^{1/4}) sqrt(sup Inf)`
/// with `μ = E[F⁴]`.
pub fn kolmogorov_bound(fourth: f64, sup_influence: f64, m: usize) -> Result<BoundReport> {
    check_order(m)?;
    let k = kolmogorov_constants(m);
    let r = fourth.max(0.0).powf(0.25);
    let growth = (r + 1.0) * r;
    let a = (k.k1 + k.k2 * growth) * (fourth - 3.0).abs().sqrt();
    let b = (k.k3 + k.k4 * growth) * sup_influence.sqrt();
    Ok(BoundReport {
        kind: BoundKind::Kolmogorov,
        order: m,
        value: a + b,
        terms: BTreeMap::from([
            ("fourth_moment".into(), fourth),
            ("sup_influence".into(), sup_influence),
            ("moment_term".into(), a),
            ("influence_term".into(), b),
        ]),
        constants: BTreeMap::from([
            ("K1".into(), k.k1),
            ("K2".into(), k.k2),
            ("K3".into(), k.k3),
            ("K4".into(), k.k4),
        ]),
    })
}

/// Evaluates both bounds for `J_m(f)`, which must have unit variance.
pub fn integral_bounds(f: &Kernel, model: &RademacherModel) -> Result<(BoundReport, BoundReport)> {
    let t = ChaosVector::integral(f).to_table(model)?;
    let var = t.moment(model, 2)?;
    if (var - 1.0).abs() > 1e-9 {
        return Err(ChaosError::domain(format!(
            "bounds assume unit variance, got E[F²] = {var}"
        )));
    }
    let fourth = t.moment(model, 4)?;
    let inf = f.sup_influence();
    Ok((
        wasserstein_bound(fourth, inf, f.order())?,
        kolmogorov_bound(fourth, inf, f.order())?,
    ))
}
