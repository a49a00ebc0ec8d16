//! Gradients, the generator and the carré du champ on value tables, plus the
//! gradient and Skorohod divergence on chaos vectors.
//!
//! Conventions for a table `F` and coordinate `k`:
//! `F_k^±` fixes `X_k = ±1`, `D_k F = sqrt(p_k q_k) (F_k^+ - F_k^-)`,
//! `D_k^± F = F_k^± - F`.

use rayon::prelude::*;

use crate::chaos::{ChaosVector, ValueTable};
use crate::error::{ChaosError, Result};
use crate::kernel::{Kernel, Subset};
use crate::model::RademacherModel;
use crate::numeric::{bits, k_subsets};

fn fix(f: &ValueTable, k: usize, plus: bool) -> ValueTable {
    let bit = 1usize << k;
    let v = f.values();
    let values = (0..v.len())
        .map(|w| v[if plus { w | bit } else { w & !bit }])
        .collect();
    ValueTable::new(f.horizon(), values).expect("same length")
}

/// `F_k^+`.
pub fn fix_plus(f: &ValueTable, k: usize) -> ValueTable {
    fix(f, k, true)
}

/// `F_k^-`.
pub fn fix_minus(f: &ValueTable, k: usize) -> ValueTable {
    fix(f, k, false)
}

pub fn gradient(f: &ValueTable, k: usize, model: &RademacherModel) -> ValueTable {
    let s = model.pq(k).sqrt();
    fix_plus(f, k).zip_with(&fix_minus(f, k), |a, b| s * (a - b))
}

/// `D_k F` for every `k`.
pub fn gradients(f: &ValueTable, model: &RademacherModel) -> Vec<ValueTable> {
    (0..model.horizon())
        .into_par_iter()
        .map(|k| gradient(f, k, model))
        .collect()
}

pub fn d_plus(f: &ValueTable, k: usize) -> ValueTable {
    &fix_plus(f, k) - f
}

pub fn d_minus(f: &ValueTable, k: usize) -> ValueTable {
    &fix_minus(f, k) - f
}

/// `L F = Σ_k (q_k D_k^- F + p_k D_k^+ F)`.
pub fn generator_jump_form(f: &ValueTable, model: &RademacherModel) -> ValueTable {
    let parts: Vec<ValueTable> = (0..model.horizon())
        .into_par_iter()
        .map(|k| {
            let (p, q) = (model.p(k), model.q(k));
            d_minus(f, k).zip_with(&d_plus(f, k), |a, b| q * a + p * b)
        })
        .collect();
    sum_tables(f.horizon(), parts)
}

/// `L F = -Σ_k Y_k D_k F`.
pub fn generator_gradient_form(f: &ValueTable, model: &RademacherModel) -> Result<ValueTable> {
    let parts: Vec<ValueTable> = (0..model.horizon())
        .map(|k| {
            let y = ValueTable::normalized_coordinate(model, k)?;
            Ok(&y * &gradient(f, k, model))
        })
        .collect::<Result<_>>()?;
    Ok(sum_tables(f.horizon(), parts).scale(-1.0))
}

fn sum_tables(horizon: usize, parts: Vec<ValueTable>) -> ValueTable {
    parts
        .iter()
        .fold(ValueTable::constant(horizon, 0.0), |acc, t| &acc + t)
}

/// `Γ₀(F,G) = Σ_k D_kF D_kG + ½ Σ_k (q_k-p_k)/sqrt(p_k q_k) D_kF D_kG Y_k`.
pub fn gamma0(f: &ValueTable, g: &ValueTable, model: &RademacherModel) -> Result<ValueTable> {
    let parts: Vec<ValueTable> = (0..model.horizon())
        .map(|k| {
            let (p, q) = (model.p(k), model.q(k));
            let c = (q - p) / (p * q).sqrt();
            let y = ValueTable::normalized_coordinate(model, k)?;
            let dd = &gradient(f, k, model) * &gradient(g, k, model);
            Ok(dd.zip_with(&y, |a, yk| a + 0.5 * c * a * yk))
        })
        .collect::<Result<_>>()?;
    Ok(sum_tables(f.horizon(), parts))
}

/// `Γ₀(F,G) = ½ Σ_k (q_k D_k^-F D_k^-G + p_k D_k^+F D_k^+G)`.
pub fn gamma0_jump_form(f: &ValueTable, g: &ValueTable, model: &RademacherModel) -> ValueTable {
    let parts: Vec<ValueTable> = (0..model.horizon())
        .into_par_iter()
        .map(|k| {
            let (p, q) = (model.p(k), model.q(k));
            let minus = &d_minus(f, k) * &d_minus(g, k);
            let plus = &d_plus(f, k) * &d_plus(g, k);
            minus.zip_with(&plus, |a, b| 0.5 * (q * a + p * b))
        })
        .collect();
    sum_tables(f.horizon(), parts)
}

/// `Γ(F,G) = ½ (L(FG) - F LG - G LF)` with `L` acting spectrally.
pub fn carre_du_champ(
    f: &ChaosVector,
    g: &ChaosVector,
    model: &RademacherModel,
) -> Result<ValueTable> {
    let fg = f.multiply(g, model)?;
    let l_fg = fg.generator().to_table(model)?;
    let ft = f.to_table(model)?;
    let gt = g.to_table(model)?;
    let lf = f.generator().to_table(model)?;
    let lg = g.generator().to_table(model)?;
    let v: Vec<f64> = (0..ft.values().len())
        .map(|w| 0.5 * (l_fg.get(w) - ft.get(w) * lg.get(w) - gt.get(w) * lf.get(w)))
        .collect();
    ValueTable::new(f.horizon(), v)
}

/// `D_k F = Σ_r r J_{r-1}(f_r(k, ·))` on the chaos side.
pub fn gradient_chaos(f: &ChaosVector, k: usize) -> Result<ChaosVector> {
    let n = f.horizon();
    let mut out = Vec::new();
    for (r, kern) in f.kernels().iter().enumerate().skip(1) {
        let mut g = Kernel::zero(r - 1, n)?;
        for (s, v) in kern.entries() {
            if s.contains(k) {
                g.set(Subset(s.0 & !(1 << k)), r as f64 * v)?;
            }
        }
        out.push(g);
    }
    ChaosVector::from_kernels(n, out)
}

/// A process `u = (u_1, .., u_n)` with each `u_k` given by its chaos vector.
pub type Process = Vec<ChaosVector>;

pub fn gradient_process(f: &ChaosVector) -> Result<Process> {
    (0..f.horizon()).map(|k| gradient_chaos(f, k)).collect()
}

/// Skorohod divergence `δ(u) = Σ_n J_{n+1}(g̃_{n+1} 1_Δ)` where
/// `u_k = Σ_n J_n(g_{n+1}(k, ·))`.
pub fn divergence(u: &Process) -> Result<ChaosVector> {
    let n = u
        .first()
        .map(ChaosVector::horizon)
        .ok_or_else(|| ChaosError::domain("empty process"))?;
    if u.len() != n {
        return Err(ChaosError::Horizon {
            expected: n,
            found: u.len(),
        });
    }
    let top = u.iter().map(|c| c.kernels().len()).max().unwrap_or(0);
    let mut out = Vec::new();
    for order in 0..top {
        let kernels: Vec<Kernel> = u.iter().map(|c| c.kernel(order)).collect();
        let mut h = Kernel::zero(order + 1, n)?;
        for set in k_subsets(n, order + 1) {
            let acc: f64 = bits(set)
                .map(|k| kernels[k].get(Subset(set & !(1 << k))))
                .sum();
            h.set(Subset(set), acc / (order + 1) as f64)?;
        }
        out.push(h);
    }
    ChaosVector::from_kernels(n, out)
}

/// Both sides of `E[δ(u)²] = E‖u‖² + E[Σ_{k≠l} D_k u_l D_l u_k - Σ_k (D_k u_k)²]`.
pub fn skorohod_isometry(u: &Process, model: &RademacherModel) -> Result<(f64, f64)> {
    let d = divergence(u)?.to_table(model)?;
    let lhs = d.moment(model, 2)?;
    let tables: Vec<ValueTable> = u.iter().map(|c| c.to_table(model)).collect::<Result<_>>()?;
    let n = tables.len();
    let grads: Vec<Vec<ValueTable>> = tables.iter().map(|t| gradients(t, model)).collect();
    let mut rhs = 0.0;
    for l in 0..n {
        rhs += tables[l].moment(model, 2)?;
        for k in 0..n {
            // grads[l][k] = D_k u_l
            let term = if k == l {
                grads[k][k].map(|x| -x * x)
            } else {
                &grads[l][k] * &grads[k][l]
            };
            rhs += term.expectation(model)?;
        }
    }
    Ok((lhs, rhs))
}
