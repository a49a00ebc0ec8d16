//! Explicit kernels: integrals with exact fourth moment 3 that are not
//! Gaussian, and the special sequences used by the experiments.

use serde::Serialize;

use crate::error::{ChaosError, Result};
use crate::kernel::{Kernel, Subset};
use crate::model::{kurtosis, RademacherModel};
use crate::moments::fourth_moment_symmetric;
use crate::numeric::{binomial, factorial, k_subsets};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Upper,
    Lower,
}

/// Homogeneous `p` with `E[Y⁴] = 3^{1/m}`, so that `E[(Y_1⋯Y_m)⁴] = 3`.
pub fn biased_probability(m: usize, branch: Branch) -> Result<f64> {
    if m == 0 {
        return Err(ChaosError::domain("order must be at least one"));
    }
    let t = 3f64.powf(1.0 / m as f64);
    let d = (t - 1.0).sqrt() / (2.0 * (t + 3.0).sqrt());
    Ok(match branch {
        Branch::Upper => 0.5 + d,
        Branch::Lower => 0.5 - d,
    })
}

/// `F = Y_1 ⋯ Y_m` on `m` coordinates with the biased probability above.
pub fn biased_counterexample(m: usize, branch: Branch) -> Result<(Kernel, RademacherModel)> {
    let p = biased_probability(m, branch)?;
    let model = RademacherModel::homogeneous(p, m)?;
    let set: Vec<usize> = (0..m).collect();
    let f = Kernel::from_entries(m, m, [(set, 1.0 / factorial(m))])?;
    Ok((f, model))
}

/// `E[F⁴]` for symmetric `F = Σ_J a_J X_J` with `Σ a_J² = 1`.
pub fn g_value(coeffs: &[(Subset, f64)]) -> Result<f64> {
    let norm: f64 = coeffs.iter().map(|(_, a)| a * a).sum();
    if (norm - 1.0).abs() > 1e-9 {
        return Err(ChaosError::domain(format!(
            "coefficients must have unit norm, got {norm}"
        )));
    }
    Ok(fourth_moment_symmetric(coeffs))
}

fn normalize(v: &[(Subset, f64)]) -> Vec<(Subset, f64)> {
    let n: f64 = v.iter().map(|(_, a)| a * a).sum::<f64>().sqrt();
    v.iter().map(|&(s, a)| (s, a / n)).collect()
}

/// Uniform unit vector on all pairs of `{0..n}`.
pub fn uniform_pairs(n: usize) -> Vec<(Subset, f64)> {
    let c = 1.0 / binomial(n, 2).sqrt();
    k_subsets(n, 2).map(|s| (Subset(s), c)).collect()
}

/// Unit vector on the pairs containing the first coordinate.
pub fn star_pairs(n: usize) -> Vec<(Subset, f64)> {
    let c = 1.0 / ((n - 1) as f64).sqrt();
    k_subsets(n, 2)
        .map(|s| (Subset(s), if s & 1 == 1 { c } else { 0.0 }))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BisectionStep {
    pub lo: f64,
    pub hi: f64,
    pub mid: f64,
    pub excess: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetricConstruction {
    pub theta: f64,
    /// `E[F⁴] - 3` at the returned `theta`.
    pub residual: f64,
    pub g_star: f64,
    pub g_uniform: f64,
    pub trace: Vec<BisectionStep>,
    #[serde(skip)]
    pub kernel: Kernel,
}

impl SymmetricConstruction {
    pub fn model(&self) -> RademacherModel {
        RademacherModel::symmetric(self.kernel.horizon())
    }
}

/// Bisects `θ ↦ g(normalize((1-θ) c + θ b)) - 3` between the star vector
/// `c` (fourth moment below 3) and the uniform vector `b` (above 3) on
/// pairs of `{1..n}`, then multiplies by `X_{n+1} ⋯ X_{n+m-2}`.
pub fn symmetric_counterexample(m: usize, n: usize, tol: f64) -> Result<SymmetricConstruction> {
    if m < 2 {
        return Err(ChaosError::domain(
            "the symmetric construction requires m >= 2",
        ));
    }
    if n < 4 {
        return Err(ChaosError::domain(
            "the symmetric construction requires n >= 4",
        ));
    }
    let b = uniform_pairs(n);
    let c = star_pairs(n);
    let g_uniform = g_value(&b)?;
    let g_star = g_value(&c)?;
    if !(g_star < 3.0 && g_uniform > 3.0) {
        return Err(ChaosError::Numerical(format!(
            "endpoints do not bracket 3: {g_star}, {g_uniform}"
        )));
    }
    let inner: f64 = b.iter().zip(&c).map(|((_, x), (_, y))| x * y).sum();
    if inner <= 0.0 {
        return Err(ChaosError::Numerical(
            "endpoint vectors are not acute".into(),
        ));
    }
    let path = |t: f64| -> Vec<(Subset, f64)> {
        let mixed: Vec<(Subset, f64)> = b
            .iter()
            .zip(&c)
            .map(|(&(s, bv), &(_, cv))| (s, (1.0 - t) * cv + t * bv))
            .collect();
        normalize(&mixed)
    };
    let excess = |t: f64| fourth_moment_symmetric(&path(t)) - 3.0;

    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut trace = Vec::new();
    let mut theta = 0.5;
    let mut h = excess(theta);
    for _ in 0..200 {
        theta = 0.5 * (lo + hi);
        h = excess(theta);
        trace.push(BisectionStep {
            lo,
            hi,
            mid: theta,
            excess: h,
        });
        if h.abs() <= tol || hi - lo <= f64::EPSILON {
            break;
        }
        if h > 0.0 {
            hi = theta;
        } else {
            lo = theta;
        }
    }

    let extra = m - 2;
    let horizon = n + extra;
    let lift: u64 = ((1u64 << extra) - 1) << n;
    let scale = factorial(m);
    let entries = path(theta)
        .into_iter()
        .filter(|(_, a)| *a != 0.0)
        .map(|(s, a)| (Subset(s.0 | lift), a / scale));
    let mut kernel = Kernel::zero(m, horizon)?;
    for (s, v) in entries {
        kernel.set(s, v)?;
    }
    Ok(SymmetricConstruction {
        theta,
        residual: h,
        g_star,
        g_uniform,
        trace,
        kernel,
    })
}

/// `F_n = X_1 ⋯ X_{m-1} Σ_{j=m}^n X_j / sqrt(n-m+1)`; its first
/// coordinate keeps influence `(m!)^{-2}` for every `n`.
pub fn product_chaos_sequence(m: usize, n: usize) -> Result<Kernel> {
    if m == 0 || n < m {
        return Err(ChaosError::domain("need 1 <= m <= n"));
    }
    let v = 1.0 / (factorial(m) * ((n - m + 1) as f64).sqrt());
    Kernel::from_entries(
        m,
        n,
        (m - 1..n).map(|l| {
            let mut set: Vec<usize> = (0..m - 1).collect();
            set.push(l);
            (set, v)
        }),
    )
}

/// `E[F⁴] - 3` and `(λ - 3) Σ_j f(j)⁴` for a unit-variance first-order
/// integral on a homogeneous model.
pub fn order_one_excess(f: &Kernel, model: &RademacherModel) -> Result<(f64, f64)> {
    if f.order() != 1 {
        return Err(ChaosError::domain("kernel must have order one"));
    }
    if !model.is_homogeneous() {
        return Err(ChaosError::domain("model must be homogeneous"));
    }
    let var = f.second_moment();
    if (var - 1.0).abs() > 1e-9 {
        return Err(ChaosError::domain(format!("variance {var} is not one")));
    }
    let lambda = kurtosis(model.p(0));
    let quartic: f64 = f.entries().map(|(_, v)| v.powi(4)).sum();
    let coeffs: Vec<(Subset, f64)> = f.subset_coefficients().collect();
    let lhs = if model.check_enumerable().is_ok() {
        crate::chaos::ChaosVector::integral(f)
            .to_table(model)?
            .moment(model, 4)?
            - 3.0
    } else {
        crate::moments::fourth_moment_factorized(&coeffs, model)? - 3.0
    };
    Ok((lhs, (lambda - 3.0) * quartic))
}
