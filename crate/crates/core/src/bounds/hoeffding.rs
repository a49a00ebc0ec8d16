use serde::Serialize;

use crate::chaos::ValueTable;
use crate::error::{ChaosError, Result};
use crate::kernel::Subset;
use crate::model::RademacherModel;
use crate::numeric::bits;

/// `W = Σ_J W_J` with `W_J` depending only on the coordinates in `J` and
/// `E[W_J | G_K] = 0` unless `J ⊆ K`.
///
/// Each component is stored compactly over its own coordinates: local bit
/// `i` is the `i`-th smallest element of `J`.
#[derive(Debug, Clone)]
pub struct HoeffdingDecomposition {
    horizon: usize,
    components: Vec<(Subset, Vec<f64>)>,
}

impl HoeffdingDecomposition {
    /// Exact decomposition by repeated averaging and centering, one
    /// coordinate at a time.
    pub fn new(w: &ValueTable, model: &RademacherModel) -> Result<Self> {
        let n = model.horizon();
        if w.horizon() != n {
            return Err(ChaosError::Horizon {
                expected: n,
                found: w.horizon(),
            });
        }
        let cap = model.caps().stroock;
        if n > cap {
            return Err(ChaosError::Capacity {
                what: "Hoeffding decomposition",
                requested: n,
                cap,
            });
        }
        let mut components = Vec::new();
        split(model, w.values().to_vec(), n, 0, &mut components);
        components.sort_by_key(|(s, _)| *s);
        Ok(HoeffdingDecomposition {
            horizon: n,
            components,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn components(&self) -> impl Iterator<Item = (Subset, &[f64])> {
        self.components.iter().map(|(s, v)| (*s, v.as_slice()))
    }

    /// `W_J` lifted to a full table.
    pub fn component_table(&self, j: Subset) -> Result<ValueTable> {
        let local = self
            .components
            .binary_search_by_key(&j, |(s, _)| *s)
            .map(|i| &self.components[i].1)
            .map_err(|_| ChaosError::domain(format!("no component for {j}")))?;
        let idx: Vec<usize> = j.indices();
        let values = (0..1usize << self.horizon)
            .map(|w| {
                let li = idx
                    .iter()
                    .enumerate()
                    .fold(0usize, |acc, (b, &k)| acc | ((w >> k & 1) << b));
                local[li]
            })
            .collect();
        ValueTable::new(self.horizon, values)
    }

    /// `E[W_J²]`.
    pub fn component_variance(&self, j: Subset, model: &RademacherModel) -> f64 {
        let Ok(i) = self.components.binary_search_by_key(&j, |(s, _)| *s) else {
            return 0.0;
        };
        let idx = j.indices();
        self.components[i]
            .1
            .iter()
            .enumerate()
            .map(|(li, v)| {
                let prob: f64 = idx
                    .iter()
                    .enumerate()
                    .map(|(b, &k)| {
                        if li >> b & 1 == 1 {
                            model.p(k)
                        } else {
                            model.q(k)
                        }
                    })
                    .product();
                prob * v * v
            })
            .sum()
    }

    /// `Σ_J W_J` as a full table.
    pub fn reconstruct(&self) -> Result<ValueTable> {
        let mut acc = ValueTable::constant(self.horizon, 0.0);
        for (s, _) in &self.components {
            acc = &acc + &self.component_table(*s)?;
        }
        Ok(acc)
    }

    /// Orders carrying mass above `tol · E[W²]`.
    pub fn active_orders(&self, model: &RademacherModel, tol: f64) -> Vec<usize> {
        let total: f64 = self
            .components
            .iter()
            .map(|(s, _)| self.component_variance(*s, model))
            .sum();
        let mut orders: Vec<usize> = self
            .components
            .iter()
            .filter(|(s, _)| self.component_variance(*s, model) > tol * total)
            .map(|(s, _)| s.len())
            .collect();
        orders.sort_unstable();
        orders.dedup();
        orders
    }

    /// `ρ² = max_j Σ_{J ∋ j, |J| = m} E[W_J²]` for a degenerate statistic
    /// of order `m`.
    pub fn rho_squared(&self, model: &RademacherModel) -> Result<(usize, f64)> {
        let orders = self.active_orders(model, 1e-20);
        let m = match orders.as_slice() {
            [m] if *m > 0 => *m,
            _ => {
                return Err(ChaosError::domain(format!(
                    "not degenerate of a single positive order; active orders {orders:?}"
                )))
            }
        };
        let mut per_index = vec![0.0; self.horizon];
        for (s, _) in self.components.iter().filter(|(s, _)| s.len() == m) {
            let v = self.component_variance(*s, model);
            for k in bits(s.0) {
                per_index[k] += v;
            }
        }
        Ok((m, per_index.into_iter().fold(0.0, f64::max)))
    }
}

/// Coordinates `0..k` are still unprocessed and occupy the low bits of
/// `table`; the kept coordinates sit above them in increasing order.
fn split(
    model: &RademacherModel,
    table: Vec<f64>,
    k: usize,
    kept: u64,
    out: &mut Vec<(Subset, Vec<f64>)>,
) {
    if k == 0 {
        out.push((Subset(kept), table));
        return;
    }
    let c = k - 1;
    let (p, q) = (model.p(c), model.q(c));
    let low = 1usize << c;
    let high = table.len() / (2 * low);
    let mut avg = vec![0.0; low * high];
    let mut centered = table;
    for h in 0..high {
        for l in 0..low {
            let i0 = l | (h << k);
            let i1 = i0 | low;
            let a = q * centered[i0] + p * centered[i1];
            avg[l | (h << c)] = a;
            centered[i0] -= a;
            centered[i1] -= a;
        }
    }
    split(model, avg, c, kept, out);
    split(model, centered, c, kept | (1 << c), out);
}

/// de Jong-type bound for a degenerate statistic with unit variance.
#[derive(Debug, Clone, Serialize)]
pub struct DeJongReport {
    pub order: usize,
    pub rho_squared: f64,
    pub fourth_moment: f64,
    pub kappa: f64,
    pub moment_term: f64,
    pub rho_term: f64,
    pub value: f64,
}

/// `(sqrt(2/π) + 4/3) sqrt|E[W⁴] - 3| + sqrt(κ) (sqrt(2/π) + 2 sqrt(2)/sqrt(3)) ρ`.
pub fn dejong_bound(w: &ValueTable, model: &RademacherModel, kappa: f64) -> Result<DeJongReport> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(ChaosError::domain("kappa must be positive"));
    }
    let var = w.variance(model)?;
    if (var - 1.0).abs() > 1e-6 {
        return Err(ChaosError::domain(format!(
            "statistic must have unit variance, got {var}"
        )));
    }
    let h = HoeffdingDecomposition::new(w, model)?;
    let (m, rho_sq) = h.rho_squared(model)?;
    let fourth = w.moment(model, 4)?;
    let r2 = (2.0 / std::f64::consts::PI).sqrt();
    let moment_term = (r2 + 4.0 / 3.0) * (fourth - 3.0).abs().sqrt();
    let rho_term = kappa.sqrt() * (r2 + 2.0 * 2f64.sqrt() / 3f64.sqrt()) * rho_sq.sqrt();
    Ok(DeJongReport {
        order: m,
        rho_squared: rho_sq,
        fourth_moment: fourth,
        kappa,
        moment_term,
        rho_term,
        value: moment_term + rho_term,
    })
}
