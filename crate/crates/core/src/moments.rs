//! Exact moments of multiple integrals and the moment identities and
//! inequalities that drive the fourth-moment bounds.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::gamma_m;
use crate::chaos::{ChaosVector, ValueTable};
use crate::error::{ChaosError, Result};
use crate::kernel::{Kernel, Subset};
use crate::malliavin::{gamma0, gradient};
use crate::model::RademacherModel;
use crate::numeric::bits;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    /// Sum over all `2^n` outcomes.
    Enumerate,
    /// Expand `F⁴` over index-set quadruples and factor expectations.
    Factorized,
    /// Symmetric coordinates only: pair index sets by symmetric difference.
    SymmetricFast,
}

/// `E[F^r]` by enumeration.
pub fn moment(f: &ValueTable, model: &RademacherModel, r: u32) -> Result<f64> {
    f.moment(model, r)
}

pub fn fourth_moment(f: &Kernel, model: &RademacherModel, engine: Engine) -> Result<f64> {
    match engine {
        Engine::Enumerate => ChaosVector::integral(f).to_table(model)?.moment(model, 4),
        Engine::Factorized => {
            let coeffs: Vec<(Subset, f64)> = f.subset_coefficients().collect();
            fourth_moment_factorized(&coeffs, model)
        }
        Engine::SymmetricFast => {
            if !model.is_symmetric() {
                return Err(ChaosError::domain(
                    "the symmetric fast path needs p = 1/2 on every coordinate",
                ));
            }
            let coeffs: Vec<(Subset, f64)> = f.subset_coefficients().collect();
            Ok(fourth_moment_symmetric(&coeffs))
        }
    }
}

/// `E[(Σ_J a_J Y_J)^4]` as a sum over ordered quadruples of index sets,
/// each weighted by `Π_i E[Y_i^{α_i}]` where `α_i` counts how many of the
/// four sets contain `i`.
pub fn fourth_moment_factorized(coeffs: &[(Subset, f64)], model: &RademacherModel) -> Result<f64> {
    let cap = model.caps().factorized_support;
    if coeffs.len() > cap {
        return Err(ChaosError::Capacity {
            what: "factorized fourth moment",
            requested: coeffs.len(),
            cap,
        });
    }
    let n = model.horizon();
    let mut m3 = vec![0.0; n];
    let mut m4 = vec![0.0; n];
    for k in 0..n {
        m3[k] = model.y_moment(k, 3);
        m4[k] = model.y_moment(k, 4);
    }
    if let Some(top) = coeffs.iter().filter_map(|(s, _)| s.max_index()).max() {
        if top >= n {
            return Err(ChaosError::Horizon {
                expected: n,
                found: top + 1,
            });
        }
    }
    let sets: Vec<u64> = coeffs.iter().map(|(s, _)| s.0).collect();
    let vals: Vec<f64> = coeffs.iter().map(|(_, v)| *v).collect();
    let partials: Vec<f64> = (0..sets.len())
        .into_par_iter()
        .map(|i| {
            let mut acc = 0.0;
            for (j, &sj) in sets.iter().enumerate() {
                // bit planes of per-index multiplicity after two sets
                let (b0, b1) = (sets[i] ^ sj, sets[i] & sj);
                for (k, &sk) in sets.iter().enumerate() {
                    let c0 = b0 ^ sk;
                    let carry = b0 & sk;
                    let c1 = b1 ^ carry;
                    let c2 = b1 & carry;
                    for (l, &sl) in sets.iter().enumerate() {
                        let d0 = c0 ^ sl;
                        let carry = c0 & sl;
                        let d1 = c1 ^ carry;
                        let d2 = c2 | (c1 & carry);
                        // multiplicity one anywhere kills the expectation
                        if d0 & !d1 & !d2 != 0 {
                            continue;
                        }
                        let mut e = 1.0;
                        for x in bits(d0 & d1) {
                            e *= m3[x];
                        }
                        for x in bits(d2) {
                            e *= m4[x];
                        }
                        acc += vals[i] * vals[j] * vals[k] * vals[l] * e;
                    }
                }
            }
            acc
        })
        .collect();
    Ok(partials.iter().sum())
}

/// Symmetric case: `E[X_I X_J X_K X_L] = 1` iff `I Δ J = K Δ L`, so
/// `E[F⁴] = Σ_D (Σ_{I Δ J = D} a_I a_J)²`.
pub fn fourth_moment_symmetric(coeffs: &[(Subset, f64)]) -> f64 {
    let mut by_diff: HashMap<u64, f64> = HashMap::new();
    for (i, a) in coeffs {
        for (j, b) in coeffs {
            *by_diff.entry(i.0 ^ j.0).or_insert(0.0) += a * b;
        }
    }
    let mut groups: Vec<(u64, f64)> = by_diff.into_iter().collect();
    groups.sort_unstable_by_key(|(d, _)| *d);
    groups.iter().map(|(_, s)| s * s).sum()
}

fn pure_order(f: &Kernel) -> Result<usize> {
    match f.order() {
        0 => Err(ChaosError::domain("order must be at least one")),
        m => Ok(m),
    }
}

/// `Var(proj_r(F²))` for `r = 1..2m`, with the upper bound on the sum over
/// `r < 2m`.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectionVariances {
    /// Entry `r - 1` holds `Var(proj_r(F²))`.
    pub per_order: Vec<f64>,
    /// `Σ_{r=1}^{2m-1} Var(proj_r(F²))`.
    pub lower_sum: f64,
    pub bound: f64,
}

pub struct IntegralMoments {
    pub second: f64,
    pub fourth: f64,
    pub sup_influence: f64,
    pub gamma: f64,
}

fn integral_moments(f: &Kernel, model: &RademacherModel) -> Result<(ValueTable, IntegralMoments)> {
    let m = pure_order(f)?;
    let t = ChaosVector::integral(f).to_table(model)?;
    Ok((
        t.clone(),
        IntegralMoments {
            second: t.moment(model, 2)?,
            fourth: t.moment(model, 4)?,
            sup_influence: f.sup_influence(),
            gamma: gamma_m(m),
        },
    ))
}

/// `E[F⁴] - 3 (E[F²])² + E[F²] γ_m sup Inf`.
fn fourth_moment_excess_plus(mm: &IntegralMoments) -> f64 {
    mm.fourth - 3.0 * mm.second * mm.second + mm.second * mm.gamma * mm.sup_influence
}

pub fn projection_variances(f: &Kernel, model: &RademacherModel) -> Result<ProjectionVariances> {
    let m = pure_order(f)?;
    let (_, mm) = integral_moments(f, model)?;
    let fc = ChaosVector::integral(f);
    let sq = fc.multiply(&fc, model)?;
    let per_order = (1..=2 * m)
        .map(|r| sq.projection(r).to_table(model)?.variance(model))
        .collect::<Result<Vec<_>>>()?;
    Ok(ProjectionVariances {
        lower_sum: per_order[..2 * m - 1].iter().sum(),
        per_order,
        bound: fourth_moment_excess_plus(&mm),
    })
}

/// `Var(Γ(F,F)/m)` computed pathwise and spectrally, with its upper bound.
#[derive(Debug, Clone, Serialize)]
pub struct GammaVariance {
    pub pathwise: f64,
    pub spectral: f64,
    pub bound: f64,
    /// `E[Γ(F,F)²] / m²`, bounded by `E[F⁴]`.
    pub gamma_square_mean: f64,
    /// `E[F² Γ(F,F)] / m`, bounded by `E[F⁴]`.
    pub weighted_gamma_mean: f64,
    pub fourth_moment: f64,
}

pub fn gamma_variance(f: &Kernel, model: &RademacherModel) -> Result<GammaVariance> {
    let m = pure_order(f)?;
    let mf = m as f64;
    let (t, mm) = integral_moments(f, model)?;
    let g = gamma0(&t, &t, model)?;
    let pathwise = g.scale(1.0 / mf).variance(model)?;
    let pv = projection_variances(f, model)?;
    let spectral = pv
        .per_order
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let r = (i + 1) as f64;
            (1.0 - r / (2.0 * mf)).powi(2) * v
        })
        .sum();
    let c = (2.0 * mf - 1.0).powi(2) / (4.0 * mf * mf);
    Ok(GammaVariance {
        pathwise,
        spectral,
        bound: c * fourth_moment_excess_plus(&mm),
        gamma_square_mean: g.moment(model, 2)? / (mf * mf),
        weighted_gamma_mean: (&(&t * &t) * &g).expectation(model)? / mf,
        fourth_moment: mm.fourth,
    })
}

/// `(1/2m) Σ_k E|D_k F|⁴ / (p_k q_k)` against its identity and bound.
#[derive(Debug, Clone, Serialize)]
pub struct QuarticGradient {
    pub value: f64,
    /// `(3/m) E[F² Γ(F,F)] - E[F⁴]`.
    pub identity: f64,
    pub bound: f64,
}

pub fn quartic_gradient(f: &Kernel, model: &RademacherModel) -> Result<QuarticGradient> {
    let m = pure_order(f)? as f64;
    let (t, mm) = integral_moments(f, model)?;
    let mut total = 0.0;
    for k in 0..model.horizon() {
        total += gradient(&t, k, model).moment(model, 4)? / model.pq(k);
    }
    let g = gamma0(&t, &t, model)?;
    let f2g = (&(&t * &t) * &g).expectation(model)?;
    let excess = mm.fourth - 3.0 * mm.second * mm.second;
    Ok(QuarticGradient {
        value: total / (2.0 * m),
        identity: 3.0 / m * f2g - mm.fourth,
        bound: (4.0 * m - 3.0) / (2.0 * m) * excess
            + (6.0 * m - 3.0) / (2.0 * m) * mm.second * mm.gamma * mm.sup_influence,
    })
}

/// Largest value over thresholds `x` of `E[Σ_k g_k(ω) D_k 1{F > x}]` type
/// expressions, given per-edge nonnegative contributions.
///
/// Each edge of the hypercube in direction `k` joins `F_k^-` and `F_k^+`
/// and contributes `c` on `x ∈ [min, max)`; the function of `x` is a sum of
/// such steps, so its supremum is attained at an endpoint.
pub(crate) fn sweep_sup(events: &mut [(f64, f64)]) -> (f64, f64) {
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (mut best, mut arg, mut running) = (0.0, f64::NAN, 0.0);
    let mut i = 0;
    while i < events.len() {
        let x = events[i].0;
        while i < events.len() && events[i].0 == x {
            running += events[i].1;
            i += 1;
        }
        if running > best {
            best = running;
            arg = x;
        }
    }
    (best, arg)
}

/// Builds sweep events from a table `F` and a per-edge weight
/// `c(k, F^+, F^-, ω_-) `, scaled by the probability of the other coordinates.
pub(crate) fn edge_events(
    f: &ValueTable,
    model: &RademacherModel,
    weight: impl Fn(usize, usize, f64, f64) -> f64 + Sync,
) -> Result<Vec<(f64, f64)>> {
    let w = model.weights()?;
    let n = model.horizon();
    let per_k: Vec<Vec<(f64, f64)>> = (0..n)
        .into_par_iter()
        .map(|k| {
            let bit = 1usize << k;
            let q = model.q(k);
            let mut ev = Vec::new();
            for omega in 0..f.values().len() {
                if omega & bit != 0 {
                    continue;
                }
                let (a, b) = (f.get(omega | bit), f.get(omega));
                if a == b {
                    continue;
                }
                let c = w[omega] / q * weight(k, omega, a, b);
                if c != 0.0 {
                    ev.push((a.min(b), c));
                    ev.push((a.max(b), -c));
                }
            }
            ev
        })
        .collect();
    Ok(per_k.into_iter().flatten().collect())
}

/// `(1/m) sup_x E[Σ_k (p_k q_k)^{-1/2} D_kF |D_kF| D_k 1{F > x}]` with its
/// upper bound.
#[derive(Debug, Clone, Serialize)]
pub struct KolmogorovTerm {
    pub value: f64,
    pub argmax: f64,
    pub bound: f64,
}

pub fn kolmogorov_term(f: &Kernel, model: &RademacherModel) -> Result<KolmogorovTerm> {
    let m = pure_order(f)? as f64;
    let (t, mm) = integral_moments(f, model)?;
    let mut events = edge_events(&t, model, |k, _, a, b| model.pq(k) * (a - b) * (a - b))?;
    let (sup, arg) = sweep_sup(&mut events);
    let inner = (4.0 * m - 3.0) * (mm.fourth - 3.0 * mm.second * mm.second)
        + (6.0 * m - 3.0) * mm.gamma * mm.second * mm.sup_influence;
    Ok(KolmogorovTerm {
        value: sup / m,
        argmax: arg,
        bound: inner.max(0.0).sqrt() * (8.0 * m * m - 7.0).sqrt() / m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn engines_agree_on_small_kernel() {
        let model = RademacherModel::new(vec![0.3, 0.6, 0.45, 0.2]).unwrap();
        let f = Kernel::from_entries(
            2,
            4,
            [(vec![0, 1], 0.4), (vec![1, 2], -0.7), (vec![0, 3], 0.25)],
        )
        .unwrap();
        let e = fourth_moment(&f, &model, Engine::Enumerate).unwrap();
        let fz = fourth_moment(&f, &model, Engine::Factorized).unwrap();
        assert!((e - fz).abs() < 1e-12 * e.abs().max(1.0), "{e} vs {fz}");
    }

    #[test]
    fn symmetric_path_refuses_biased_models() {
        let model = RademacherModel::homogeneous(0.3, 2).unwrap();
        let f = Kernel::from_entries(1, 2, [(vec![0], 1.0)]).unwrap();
        assert!(fourth_moment(&f, &model, Engine::SymmetricFast).is_err());
    }

    #[test]
    fn sweep_handles_touching_intervals() {
        // [0,1) weight 1 and [1,2) weight 2 never overlap
        let mut ev = vec![(0.0, 1.0), (1.0, -1.0), (1.0, 2.0), (2.0, -2.0)];
        assert_eq!(sweep_sup(&mut ev), (2.0, 1.0));
    }
}
