//! Symmetric kernels vanishing on diagonals.
//!
//! A kernel of order `m` on horizon `n` is stored by its values on strictly
//! increasing index sets: `f_J` is the common value of `f` on every ordering
//! of `J`. Full-tuple norms therefore pick up a factor `m!`.

use std::collections::BTreeMap;
use std::fmt;

use rand::Rng;

use crate::error::{ChaosError, Result};
use crate::model::MAX_HORIZON;
use crate::numeric::{binomial, bits, factorial, k_subsets, submasks};

/// A finite subset of `{0, .., 62}` stored as a bit mask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Subset(pub u64);

impl Subset {
    pub fn from_indices(indices: &[usize]) -> Result<Self> {
        let mut mask = 0u64;
        for &i in indices {
            if i >= MAX_HORIZON {
                return Err(ChaosError::domain(format!(
                    "index {i} exceeds {MAX_HORIZON}"
                )));
            }
            if mask >> i & 1 == 1 {
                return Err(ChaosError::domain(format!("index {i} repeated")));
            }
            mask |= 1 << i;
        }
        Ok(Subset(mask))
    }

    pub fn indices(self) -> Vec<usize> {
        bits(self.0).collect()
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn max_index(self) -> Option<usize> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros() as usize)
    }
}

impl fmt::Display for Subset {
    /// One-based, like the index sets in kernel files.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = bits(self.0).map(|i| (i + 1).to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    order: usize,
    horizon: usize,
    coeffs: BTreeMap<Subset, f64>,
}

impl Kernel {
    pub fn zero(order: usize, horizon: usize) -> Result<Self> {
        if horizon > MAX_HORIZON {
            return Err(ChaosError::Capacity {
                what: "kernel horizon",
                requested: horizon,
                cap: MAX_HORIZON,
            });
        }
        Ok(Kernel {
            order,
            horizon,
            coeffs: BTreeMap::new(),
        })
    }

    /// The order-zero kernel carrying a constant.
    pub fn constant(value: f64, horizon: usize) -> Self {
        let mut k = Kernel::zero(0, horizon).expect("order zero always fits");
        k.coeffs.insert(Subset(0), value);
        k
    }

    /// Builds a kernel from `(zero-based index set, f_J)` pairs.
    pub fn from_entries<I>(order: usize, horizon: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        let mut k = Kernel::zero(order, horizon)?;
        for (set, v) in entries {
            let s = Subset::from_indices(&set)?;
            if k.coeffs.contains_key(&s) {
                return Err(ChaosError::domain(format!("set {s} listed twice")));
            }
            k.set(s, v)?;
        }
        Ok(k)
    }

    /// Builds a kernel from subset coefficients `a_J = m! f_J`, so that
    /// `J_m(f) = Σ_J a_J Π_{i∈J} Y_i`.
    pub fn from_subset_coefficients<I>(order: usize, horizon: usize, coeffs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Subset, f64)>,
    {
        let mut k = Kernel::zero(order, horizon)?;
        let scale = factorial(order);
        for (s, a) in coeffs {
            k.set(s, a / scale)?;
        }
        Ok(k)
    }

    /// Entries drawn uniformly from `[-1, 1]` on every `order`-subset.
    pub fn random<R: Rng + ?Sized>(order: usize, horizon: usize, rng: &mut R) -> Result<Self> {
        let mut k = Kernel::zero(order, horizon)?;
        for s in k_subsets(horizon, order) {
            k.coeffs.insert(Subset(s), rng.random_range(-1.0..1.0));
        }
        Ok(k)
    }

    pub fn set(&mut self, s: Subset, value: f64) -> Result<()> {
        if s.len() != self.order {
            return Err(ChaosError::domain(format!(
                "set {s} has size {} but the kernel has order {}",
                s.len(),
                self.order
            )));
        }
        if s.max_index().is_some_and(|i| i >= self.horizon) {
            return Err(ChaosError::domain(format!(
                "set {s} leaves the horizon {}",
                self.horizon
            )));
        }
        if !value.is_finite() {
            return Err(ChaosError::domain(format!("value at {s} is not finite")));
        }
        if value == 0.0 {
            self.coeffs.remove(&s);
        } else {
            self.coeffs.insert(s, value);
        }
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn get(&self, s: Subset) -> f64 {
        self.coeffs.get(&s).copied().unwrap_or(0.0)
    }

    /// Value on an arbitrary tuple; zero whenever an index repeats.
    pub fn value_at(&self, tuple: &[usize]) -> f64 {
        if tuple.len() != self.order {
            return 0.0;
        }
        match Subset::from_indices(tuple) {
            Ok(s) => self.get(s),
            Err(_) => 0.0,
        }
    }

    /// Nonzero entries in increasing mask order.
    pub fn entries(&self) -> impl Iterator<Item = (Subset, f64)> + '_ {
        self.coeffs.iter().map(|(&s, &v)| (s, v))
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `a_J = m! f_J`.
    pub fn subset_coefficients(&self) -> impl Iterator<Item = (Subset, f64)> + '_ {
        let s = factorial(self.order);
        self.entries().map(move |(j, v)| (j, s * v))
    }

    /// Full-tuple squared norm `‖f‖² = m! Σ_J f_J²`.
    pub fn norm_sq(&self) -> f64 {
        factorial(self.order) * self.coeffs.values().map(|v| v * v).sum::<f64>()
    }

    /// Full-tuple inner product `⟨f, g⟩ = m! Σ_J f_J g_J`.
    pub fn inner(&self, other: &Kernel) -> f64 {
        if self.order != other.order {
            return 0.0;
        }
        factorial(self.order) * self.entries().map(|(s, v)| v * other.get(s)).sum::<f64>()
    }

    /// `E[J_m(f)^2] = m! ‖f‖²`.
    pub fn second_moment(&self) -> f64 {
        factorial(self.order) * self.norm_sq()
    }

    /// `Inf_k(f) = Σ_{J ∋ k} f_J²`.
    pub fn influence(&self, k: usize) -> f64 {
        self.entries()
            .filter(|(s, _)| s.contains(k))
            .map(|(_, v)| v * v)
            .sum()
    }

    pub fn influences(&self) -> Vec<f64> {
        let mut inf = vec![0.0; self.horizon];
        for (s, v) in self.entries() {
            for k in bits(s.0) {
                inf[k] += v * v;
            }
        }
        inf
    }

    pub fn sup_influence(&self) -> f64 {
        self.influences().into_iter().fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: f64) -> Kernel {
        let mut out = self.clone();
        out.coeffs.values_mut().for_each(|v| *v *= c);
        out.coeffs.retain(|_, v| *v != 0.0);
        out
    }

    /// Rescales so that `E[J_m(f)^2] = 1`.
    pub fn normalized(&self) -> Result<Kernel> {
        let v = self.second_moment();
        if v <= 0.0 {
            return Err(ChaosError::domain("cannot normalize the zero kernel"));
        }
        Ok(self.scaled(1.0 / v.sqrt()))
    }

    pub fn add(&self, other: &Kernel) -> Result<Kernel> {
        if self.order != other.order {
            return Err(ChaosError::domain("kernel orders differ"));
        }
        if self.horizon != other.horizon {
            return Err(ChaosError::Horizon {
                expected: self.horizon,
                found: other.horizon,
            });
        }
        let mut out = self.clone();
        for (s, v) in other.entries() {
            let nv = out.get(s) + v;
            out.set(s, nv)?;
        }
        Ok(out)
    }

    /// Same coefficients on a larger horizon.
    pub fn with_horizon(&self, horizon: usize) -> Result<Kernel> {
        if let Some(top) = self.coeffs.keys().filter_map(|s| s.max_index()).max() {
            if top >= horizon {
                return Err(ChaosError::domain(format!(
                    "support reaches index {} beyond horizon {horizon}",
                    top + 1
                )));
            }
        }
        let mut out = Kernel::zero(self.order, horizon)?;
        out.coeffs = self.coeffs.clone();
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &Kernel) -> f64 {
        let keys: std::collections::BTreeSet<Subset> = self
            .coeffs
            .keys()
            .chain(other.coeffs.keys())
            .copied()
            .collect();
        keys.into_iter()
            .map(|s| (self.get(s) - other.get(s)).abs())
            .fold(0.0, f64::max)
    }
}

/// The symmetrization `f ⊗̃ g` evaluated lazily on full tuples.
#[derive(Debug, Clone)]
pub struct SymmetrizedTensor {
    f: Kernel,
    g: Kernel,
}

impl SymmetrizedTensor {
    pub fn new(f: &Kernel, g: &Kernel) -> Result<Self> {
        if f.horizon != g.horizon {
            return Err(ChaosError::Horizon {
                expected: f.horizon,
                found: g.horizon,
            });
        }
        Ok(SymmetrizedTensor {
            f: f.clone(),
            g: g.clone(),
        })
    }

    pub fn order(&self) -> usize {
        self.f.order + self.g.order
    }

    /// Average of `f(t_A) g(t_{A^c})` over all position sets `A` of size `m`.
    pub fn value(&self, tuple: &[usize]) -> f64 {
        let total = tuple.len();
        if total != self.order() {
            return 0.0;
        }
        let m = self.f.order;
        let mut acc = 0.0;
        for a in k_subsets(total, m) {
            let left: Vec<usize> = bits(a).map(|i| tuple[i]).collect();
            let right: Vec<usize> = (0..total)
                .filter(|i| a >> i & 1 == 0)
                .map(|i| tuple[i])
                .collect();
            acc += self.f.value_at(&left) * self.g.value_at(&right);
        }
        acc / binomial(total, m)
    }

    /// Restriction to tuples with distinct indices, as a kernel.
    pub fn off_diagonal(&self) -> Kernel {
        let (m, total, n) = (self.f.order, self.order(), self.f.horizon);
        let denom = binomial(total, m);
        let mut out = BTreeMap::new();
        for (i, fv) in self.f.entries() {
            for (j, gv) in self.g.entries() {
                if i.0 & j.0 == 0 {
                    *out.entry(Subset(i.0 | j.0)).or_insert(0.0) += fv * gv / denom;
                }
            }
        }
        let mut k = Kernel::zero(total, n).expect("horizon already validated");
        k.coeffs = out.into_iter().filter(|(_, v)| *v != 0.0).collect();
        k
    }
}

/// `(2m)! ‖f ⊗̃ f‖²` split into the distinct-index part and the part carried
/// by tuples with a repeated index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SquareNorms {
    pub off_diagonal: f64,
    pub diagonal: f64,
}

impl SquareNorms {
    pub fn total(&self) -> f64 {
        self.off_diagonal + self.diagonal
    }
}

/// Computes both parts of `(2m)! ‖f ⊗̃ f‖²` by summing over index multisets.
///
/// A multiset with `r` doubled indices `D` and `2m - 2r` single indices `S`
/// carries `(2m)!/2^r` tuples, each with value
/// `2^r / C(2m,m) · Σ_{T ⊆ S, |T| = m-r} f(D ∪ T) f(D ∪ S∖T)`.
pub fn symmetrized_square_norms(f: &Kernel) -> SquareNorms {
    let m = f.order;
    let n = f.horizon;
    let fact2m = factorial(2 * m);
    let denom = binomial(2 * m, m);
    let mut parts = [0.0f64; 2];
    for r in 0..=m {
        let mult = fact2m / 2f64.powi(r as i32);
        let weight = 2f64.powi(r as i32) / denom;
        let mut acc = 0.0;
        for d in k_subsets(n, r) {
            for s in k_subsets(n, 2 * m - 2 * r) {
                if s & d != 0 {
                    continue;
                }
                let mut h = 0.0;
                for t in submasks(s) {
                    if t.count_ones() as usize == m - r {
                        h += f.get(Subset(d | t)) * f.get(Subset(d | (s & !t)));
                    }
                }
                h *= weight;
                acc += mult * h * h;
            }
        }
        parts[(r > 0) as usize] += fact2m * acc;
    }
    SquareNorms {
        off_diagonal: parts[0],
        diagonal: parts[1],
    }
}

/// `D_m(f) = (2m)! ‖f ⊗̃ f‖² - 2 (m! ‖f‖²)²`, strictly positive for `f ≠ 0`.
pub fn square_defect(f: &Kernel) -> f64 {
    let v = f.second_moment();
    symmetrized_square_norms(f).total() - 2.0 * v * v
}
