use std::f64::consts::PI;

use serde::Serialize;

use crate::chaos::{ChaosVector, ValueTable};
use crate::error::{ChaosError, Result};
use crate::malliavin::{gamma0, gradients};
use crate::model::RademacherModel;
use crate::moments::{edge_events, sweep_sup};

/// Gradient-based Wasserstein and Kolmogorov bounds for a centered `F`.
#[derive(Debug, Clone, Serialize)]
pub struct AbstractBounds {
    /// `E|1 - Γ₀(F, -L⁻¹F)|`.
    pub gamma_gap: f64,
    /// `Var(Γ₀(F, -L⁻¹F))`.
    pub gamma_variance: f64,
    /// `Σ_k (p_k q_k)^{-1/2} E[|D_kF|² |D_k L⁻¹F|]`.
    pub gradient_remainder: f64,
    /// `sup_x E[Σ_k (p_k q_k)^{-1/2} D_kF D_k1{F>x} |D_k L⁻¹F|]`.
    pub threshold_term: f64,
    pub wasserstein_gap: f64,
    pub wasserstein_variance: f64,
    pub kolmogorov_gap: f64,
    pub kolmogorov_variance: f64,
    /// Pure-chaos forms, present when `F` lives in a single chaos.
    pub wasserstein_pure: Option<f64>,
    pub kolmogorov_pure: Option<f64>,
}

fn indicator_weight(model: &RademacherModel, k: usize) -> ValueTable {
    let (p, q) = (model.p(k), model.q(k));
    ValueTable::from_fn(model, |w| if w >> k & 1 == 1 { q } else { p })
        .expect("model already enumerable")
}

pub fn abstract_bounds(f: &ChaosVector, model: &RademacherModel) -> Result<AbstractBounds> {
    let n = model.horizon();
    let linv = f.inverse_generator()?;
    let ft = f.to_table(model)?;
    let lt = linv.to_table(model)?;
    let neg_lt = lt.scale(-1.0);
    let g0 = gamma0(&ft, &neg_lt, model)?;

    let gamma_gap = g0.map(|x| (1.0 - x).abs()).expectation(model)?;
    let gamma_variance = g0.variance(model)?;
    let second = ft.moment(model, 2)?;
    let fourth = ft.moment(model, 4)?;

    let df = gradients(&ft, model);
    let dl = gradients(&lt, model);
    let mut gradient_remainder = 0.0;
    let mut weighted = ValueTable::constant(n, 0.0);
    let mut cross_sq = 0.0;
    let mut quartic = 0.0;
    let mut local = ValueTable::constant(n, 0.0);
    for k in 0..n {
        let pq = model.pq(k);
        let sq = df[k].map(|x| x * x);
        let abs_l = dl[k].map(f64::abs);
        gradient_remainder += (&sq * &abs_l).expectation(model)? / pq.sqrt();
        let ind = indicator_weight(model, k);
        weighted = &weighted + &(&(&sq * &abs_l) * &ind).scale(pq.powf(-1.5));
        cross_sq += (&sq * &dl[k].map(|x| x * x)).expectation(model)? / pq;
        quartic += sq.moment(model, 2)? / pq;
        local = &local + &(&sq * &ind).scale(1.0 / pq);
    }

    let c = (2.0 * PI).sqrt() / 4.0;
    let smoothing = (&ft.map(|x| x.abs() + c) * &weighted).expectation(model)? / 4.0;

    let mut events = edge_events(&ft, model, |k, omega, a, b| {
        let bit = 1usize << k;
        model.pq(k) * (a - b).abs() * (lt.get(omega | bit) - lt.get(omega)).abs()
    })?;
    let (threshold_term, _) = sweep_sup(&mut events);

    let root4 = fourth.max(0.0).powf(0.25);
    let local_sq = local.moment(model, 2)?.powf(0.25);
    let r2 = (2.0 / PI).sqrt();
    let kolmogorov_variance = (1.0 - second).abs()
        + gamma_variance.sqrt()
        + cross_sq.sqrt() * (root4 + 1.0) * local_sq / (2.0 * 2f64.sqrt())
        + threshold_term;

    let m = f.max_order();
    let (wasserstein_pure, kolmogorov_pure) = if m >= 1 && f.is_pure(m) {
        let mf = m as f64;
        let gff = gamma0(&ft, &ft, model)?;
        let var_g = gff.variance(model)?;
        let mut ev = edge_events(&ft, model, |k, _, a, b| model.pq(k) * (a - b) * (a - b))?;
        let (sup, _) = sweep_sup(&mut ev);
        (
            Some(r2 * (var_g / (mf * mf)).sqrt() + (quartic / mf).sqrt()),
            Some(
                var_g.sqrt() / mf
                    + quartic.sqrt() * (root4 + 1.0) * local_sq / (2.0 * 2f64.sqrt() * mf)
                    + sup / mf,
            ),
        )
    } else {
        (None, None)
    };

    if !gamma_gap.is_finite() {
        return Err(ChaosError::Numerical("non-finite gamma gap".into()));
    }
    Ok(AbstractBounds {
        gamma_gap,
        gamma_variance,
        gradient_remainder,
        threshold_term,
        wasserstein_gap: r2 * gamma_gap + gradient_remainder,
        wasserstein_variance: r2 * (1.0 - second).abs()
            + r2 * gamma_variance.sqrt()
            + gradient_remainder,
        kolmogorov_gap: gamma_gap + smoothing + threshold_term,
        kolmogorov_variance,
        wasserstein_pure,
        kolmogorov_pure,
    })
}
