//! Value tables over `{-1,+1}^n` and chaos vectors `F = Σ_r J_r(f_r)`.
//!
//! The two representations are related by a tensor-product change of basis:
//! the family `Y_J = Π_{i∈J} Y_i` is orthonormal and complete, and
//! `J_r(f_r) = Σ_{|J|=r} r! f_r(J) Y_J`. Both directions cost `O(n 2^n)`.

use std::ops::{Add, Mul, Sub};

use crate::error::{ChaosError, Result};
use crate::kernel::{Kernel, Subset};
use crate::model::RademacherModel;
use crate::numeric::{factorial, k_subsets, pairwise_dot};

/// A real function on `{-1,+1}^n`, indexed by outcome bit mask.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    horizon: usize,
    values: Vec<f64>,
}

impl ValueTable {
    pub fn new(horizon: usize, values: Vec<f64>) -> Result<Self> {
        if horizon >= usize::BITS as usize || values.len() != 1usize << horizon {
            return Err(ChaosError::domain(format!(
                "table of length {} does not match horizon {horizon}",
                values.len()
            )));
        }
        Ok(ValueTable { horizon, values })
    }

    pub fn constant(horizon: usize, c: f64) -> Self {
        ValueTable {
            horizon,
            values: vec![c; 1 << horizon],
        }
    }

    pub fn from_fn(model: &RademacherModel, f: impl Fn(usize) -> f64) -> Result<Self> {
        model.check_enumerable()?;
        let n = model.horizon();
        Ok(ValueTable {
            horizon: n,
            values: (0..1usize << n).map(f).collect(),
        })
    }

    /// The coordinate `X_{k+1}` as a table.
    pub fn coordinate(model: &RademacherModel, k: usize) -> Result<Self> {
        Self::from_fn(model, |w| if w >> k & 1 == 1 { 1.0 } else { -1.0 })
    }

    /// The normalized coordinate `Y_{k+1}` as a table.
    pub fn normalized_coordinate(model: &RademacherModel, k: usize) -> Result<Self> {
        let (yp, ym) = (model.y_plus(k), model.y_minus(k));
        Self::from_fn(model, |w| if w >> k & 1 == 1 { yp } else { ym })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, outcome: usize) -> f64 {
        self.values[outcome]
    }

    fn check(&self, model: &RademacherModel) -> Result<()> {
        if model.horizon() != self.horizon {
            return Err(ChaosError::Horizon {
                expected: model.horizon(),
                found: self.horizon,
            });
        }
        Ok(())
    }

    pub fn expectation(&self, model: &RademacherModel) -> Result<f64> {
        self.check(model)?;
        Ok(pairwise_dot(&self.values, model.weights()?))
    }

    pub fn moment(&self, model: &RademacherModel, r: u32) -> Result<f64> {
        self.map(|x| x.powi(r as i32)).expectation(model)
    }

    pub fn variance(&self, model: &RademacherModel) -> Result<f64> {
        let mean = self.expectation(model)?;
        self.map(|x| (x - mean) * (x - mean)).expectation(model)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ValueTable {
        ValueTable {
            horizon: self.horizon,
            values: self.values.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip_with(&self, other: &ValueTable, f: impl Fn(f64, f64) -> f64) -> ValueTable {
        assert_eq!(self.horizon, other.horizon, "tables on different horizons");
        ValueTable {
            horizon: self.horizon,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn scale(&self, c: f64) -> ValueTable {
        self.map(|x| c * x)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &ValueTable) -> f64 {
        self.zip_with(other, |a, b| a - b).sup_norm()
    }
}

impl Add for &ValueTable {
    type Output = ValueTable;
    fn add(self, rhs: &ValueTable) -> ValueTable {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ValueTable {
    type Output = ValueTable;
    fn sub(self, rhs: &ValueTable) -> ValueTable {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &ValueTable {
    type Output = ValueTable;
    fn mul(self, rhs: &ValueTable) -> ValueTable {
        self.zip_with(rhs, |a, b| a * b)
    }
}

/// Turns subset coefficients `c_J` into the table of `Σ_J c_J Y_J`.
fn coefficients_to_values(model: &RademacherModel, c: &mut [f64]) {
    for k in 0..model.horizon() {
        let (yp, ym) = (model.y_plus(k), model.y_minus(k));
        let bit = 1usize << k;
        for i in 0..c.len() {
            if i & bit == 0 {
                let (a0, a1) = (c[i], c[i | bit]);
                c[i] = a0 + a1 * ym;
                c[i | bit] = a0 + a1 * yp;
            }
        }
    }
}

/// Inverse of [`coefficients_to_values`]: `c_J = E[F Y_J]`.
fn values_to_coefficients(model: &RademacherModel, v: &mut [f64]) {
    for k in 0..model.horizon() {
        let (p, q) = (model.p(k), model.q(k));
        let (yp, ym) = (model.y_plus(k), model.y_minus(k));
        let bit = 1usize << k;
        for i in 0..v.len() {
            if i & bit == 0 {
                let (minus, plus) = (v[i], v[i | bit]);
                v[i] = q * minus + p * plus;
                v[i | bit] = q * ym * minus + p * yp * plus;
            }
        }
    }
}

/// A finite chaos expansion; `kernels[r]` has order `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChaosVector {
    horizon: usize,
    kernels: Vec<Kernel>,
}

impl ChaosVector {
    pub fn zero(horizon: usize) -> Self {
        ChaosVector {
            horizon,
            kernels: vec![Kernel::constant(0.0, horizon)],
        }
    }

    pub fn constant(horizon: usize, c: f64) -> Self {
        ChaosVector {
            horizon,
            kernels: vec![Kernel::constant(c, horizon)],
        }
    }

    /// The single multiple integral `J_m(f)`.
    pub fn integral(f: &Kernel) -> Self {
        let n = f.horizon();
        let mut kernels: Vec<Kernel> = (0..f.order())
            .map(|r| Kernel::zero(r, n).expect("horizon checked by kernel"))
            .collect();
        kernels.push(f.clone());
        ChaosVector {
            horizon: n,
            kernels,
        }
    }

    pub fn from_kernels(horizon: usize, list: Vec<Kernel>) -> Result<Self> {
        let top = list.iter().map(Kernel::order).max().unwrap_or(0);
        let mut kernels: Vec<Kernel> = (0..=top)
            .map(|r| Kernel::zero(r, horizon))
            .collect::<Result<_>>()?;
        for k in list {
            if k.horizon() != horizon {
                return Err(ChaosError::Horizon {
                    expected: horizon,
                    found: k.horizon(),
                });
            }
            let r = k.order();
            kernels[r] = kernels[r].add(&k)?;
        }
        Ok(ChaosVector { horizon, kernels })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Largest order with a nonzero kernel (zero for constants).
    pub fn max_order(&self) -> usize {
        self.kernels.iter().rposition(|k| !k.is_zero()).unwrap_or(0)
    }

    pub fn kernels(&self) -> &[Kernel] {
        &self.kernels
    }

    /// The order-`r` kernel; zero beyond the stored range.
    pub fn kernel(&self, r: usize) -> Kernel {
        self.kernels
            .get(r)
            .cloned()
            .unwrap_or_else(|| Kernel::zero(r, self.horizon).expect("valid horizon"))
    }

    pub fn mean(&self) -> f64 {
        self.kernels[0].get(Subset(0))
    }

    /// Nonzero orders other than zero.
    pub fn is_pure(&self, m: usize) -> bool {
        self.kernels
            .iter()
            .enumerate()
            .all(|(r, k)| r == m || k.is_zero())
    }

    /// `E[F²] = Σ_r r! ‖f_r‖²`.
    pub fn second_moment(&self) -> f64 {
        self.kernels.iter().map(Kernel::second_moment).sum()
    }

    pub fn variance(&self) -> f64 {
        self.kernels[1..].iter().map(Kernel::second_moment).sum()
    }

    pub fn projection(&self, r: usize) -> ChaosVector {
        if r == 0 {
            return ChaosVector::constant(self.horizon, self.mean());
        }
        ChaosVector::integral(&self.kernel(r))
    }

    /// Scales the order-`r` kernel by `mult(r)`.
    pub fn spectral(&self, mult: impl Fn(usize) -> f64) -> ChaosVector {
        ChaosVector {
            horizon: self.horizon,
            kernels: self
                .kernels
                .iter()
                .enumerate()
                .map(|(r, k)| k.scaled(mult(r)))
                .collect(),
        }
    }

    /// Ornstein-Uhlenbeck semigroup `P_t`, multiplying order `r` by `e^{-tr}`.
    pub fn ou_semigroup(&self, t: f64) -> ChaosVector {
        self.spectral(|r| (-t * r as f64).exp())
    }

    /// Number operator `L`, multiplying order `r` by `-r`.
    pub fn generator(&self) -> ChaosVector {
        self.spectral(|r| -(r as f64))
    }

    /// Pseudo-inverse `L⁻¹`; the input must be centered.
    pub fn inverse_generator(&self) -> Result<ChaosVector> {
        let scale = 1.0 + self.second_moment().sqrt();
        if self.mean().abs() > 1e-12 * scale {
            return Err(ChaosError::domain(format!(
                "L⁻¹ needs a centered input, mean is {}",
                self.mean()
            )));
        }
        Ok(self.spectral(|r| if r == 0 { 0.0 } else { -1.0 / r as f64 }))
    }

    pub fn scale(&self, c: f64) -> ChaosVector {
        self.spectral(|_| c)
    }

    pub fn add(&self, other: &ChaosVector) -> Result<ChaosVector> {
        ChaosVector::from_kernels(
            self.horizon,
            self.kernels.iter().chain(&other.kernels).cloned().collect(),
        )
    }

    pub fn sub(&self, other: &ChaosVector) -> Result<ChaosVector> {
        self.add(&other.scale(-1.0))
    }

    /// Subset coefficients `c_J = |J|! f_{|J|}(J)` as a dense array.
    pub fn coefficients(&self) -> Result<Vec<f64>> {
        if self.horizon >= usize::BITS as usize {
            return Err(ChaosError::Capacity {
                what: "dense coefficient array",
                requested: self.horizon,
                cap: usize::BITS as usize - 1,
            });
        }
        let mut c = vec![0.0; 1 << self.horizon];
        for k in &self.kernels {
            for (s, a) in k.subset_coefficients() {
                c[s.0 as usize] = a;
            }
        }
        Ok(c)
    }

    pub fn from_coefficients(horizon: usize, c: &[f64]) -> Result<ChaosVector> {
        let mut by_order: Vec<Vec<(Subset, f64)>> = vec![Vec::new(); horizon + 1];
        for (mask, &a) in c.iter().enumerate() {
            if a != 0.0 {
                by_order[mask.count_ones() as usize].push((Subset(mask as u64), a));
            }
        }
        let top = by_order.iter().rposition(|v| !v.is_empty()).unwrap_or(0);
        let kernels = by_order
            .into_iter()
            .take(top + 1)
            .enumerate()
            .map(|(r, v)| Kernel::from_subset_coefficients(r, horizon, v))
            .collect::<Result<_>>()?;
        Ok(ChaosVector { horizon, kernels })
    }

    /// Evaluates `F` on every outcome.
    pub fn to_table(&self, model: &RademacherModel) -> Result<ValueTable> {
        if model.horizon() != self.horizon {
            return Err(ChaosError::Horizon {
                expected: model.horizon(),
                found: self.horizon,
            });
        }
        model.check_enumerable()?;
        let mut c = self.coefficients()?;
        coefficients_to_values(model, &mut c);
        ValueTable::new(self.horizon, c)
    }

    /// Chaos decomposition of a table, `f_r(J) = E[F Y_J] / r!`.
    pub fn decompose(table: &ValueTable, model: &RademacherModel) -> Result<ChaosVector> {
        table.check(model)?;
        let cap = model.caps().stroock;
        if model.horizon() > cap {
            return Err(ChaosError::Capacity {
                what: "chaos decomposition",
                requested: model.horizon(),
                cap,
            });
        }
        let mut v = table.values.clone();
        values_to_coefficients(model, &mut v);
        ChaosVector::from_coefficients(table.horizon, &v)
    }

    /// Chaos expansion of the pointwise product `F G`.
    pub fn multiply(&self, other: &ChaosVector, model: &RademacherModel) -> Result<ChaosVector> {
        let prod = &self.to_table(model)? * &other.to_table(model)?;
        ChaosVector::decompose(&prod, model)
    }

    pub fn max_abs_diff(&self, other: &ChaosVector) -> f64 {
        let top = self.kernels.len().max(other.kernels.len());
        (0..top)
            .map(|r| self.kernel(r).max_abs_diff(&other.kernel(r)))
            .fold(0.0, f64::max)
    }
}

/// `J_m(f)` at a single outcome given as a sign bit mask, without building
/// a table. Works at any horizon the model supports.
pub fn evaluate_integral(f: &Kernel, outcome: u64, model: &RademacherModel) -> Result<f64> {
    if f.horizon() != model.horizon() {
        return Err(ChaosError::Horizon {
            expected: model.horizon(),
            found: f.horizon(),
        });
    }
    let y: Vec<f64> = (0..model.horizon())
        .map(|k| model.y_value(k, if outcome >> k & 1 == 1 { 1 } else { -1 }))
        .collect();
    Ok(f.subset_coefficients()
        .map(|(s, a)| a * s.indices().iter().map(|&i| y[i]).product::<f64>())
        .sum())
}

/// Order-`r` kernel by the defining formula `f_r(J) = E[F Π_{i∈J} Y_i] / r!`,
/// one expectation per index set.
pub fn stroock_kernel(table: &ValueTable, model: &RademacherModel, r: usize) -> Result<Kernel> {
    table.check(model)?;
    let cap = model.caps().stroock;
    if model.horizon() > cap {
        return Err(ChaosError::Capacity {
            what: "chaos decomposition",
            requested: model.horizon(),
            cap,
        });
    }
    let n = model.horizon();
    let w = model.weights()?;
    let mut k = Kernel::zero(r, n)?;
    let scale = factorial(r);
    for s in k_subsets(n, r) {
        let mut acc = 0.0;
        for (omega, (&fv, &wv)) in table.values.iter().zip(w).enumerate() {
            let mut y = 1.0;
            for i in crate::numeric::bits(s) {
                y *= if omega >> i & 1 == 1 {
                    model.y_plus(i)
                } else {
                    model.y_minus(i)
                };
            }
            acc += wv * fv * y;
        }
        k.set(Subset(s), acc / scale)?;
    }
    Ok(k)
}
