//! Slow reference implementations used to check the library. They work
//! directly from the definitions and share no code paths with it beyond
//! reading kernel entries.
#![allow(dead_code)]

use chaoslab_core::{Kernel, RademacherModel, Subset};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn y(p: f64, plus: bool) -> f64 {
    if plus {
        ((1.0 - p) / p).sqrt()
    } else {
        -(p / (1.0 - p)).sqrt()
    }
}

pub fn weight(probs: &[f64], omega: usize) -> f64 {
    probs
        .iter()
        .enumerate()
        .map(|(k, &p)| if omega >> k & 1 == 1 { p } else { 1.0 - p })
        .product()
}

pub fn expect(values: &[f64], probs: &[f64]) -> f64 {
    values
        .iter()
        .enumerate()
        .map(|(w, v)| v * weight(probs, w))
        .sum()
}

/// `J_m(f)(ω) = Σ over ordered distinct tuples of f(i_1..i_m) Π Y_{i_j}(ω)`.
pub fn integral_values(f: &Kernel, probs: &[f64]) -> Vec<f64> {
    let n = probs.len();
    let m = f.order();
    (0..1usize << n)
        .map(|w| {
            let mut acc = 0.0;
            let mut tuple = vec![0usize; m];
            loop {
                let mut prod = f.value_at(&tuple);
                if prod != 0.0 {
                    for &i in &tuple {
                        prod *= y(probs[i], w >> i & 1 == 1);
                    }
                    acc += prod;
                }
                // odometer over [n]^m
                let mut pos = 0;
                loop {
                    if pos == m {
                        return acc;
                    }
                    tuple[pos] += 1;
                    if tuple[pos] < n {
                        break;
                    }
                    tuple[pos] = 0;
                    pos += 1;
                }
            }
        })
        .collect()
}

/// `E[F Π_{i∈J} Y_i] / |J|!` straight from the definition.
pub fn stroock_entry(values: &[f64], probs: &[f64], set: &[usize]) -> f64 {
    let prod: Vec<f64> = (0..values.len())
        .map(|w| {
            values[w]
                * set
                    .iter()
                    .map(|&i| y(probs[i], w >> i & 1 == 1))
                    .product::<f64>()
        })
        .collect();
    let fact: f64 = (1..=set.len()).map(|k| k as f64).product();
    expect(&prod, probs) / fact
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// `f ⊗̃ g` at a tuple by averaging over every permutation.
pub fn symmetrized_value(f: &Kernel, g: &Kernel, tuple: &[usize]) -> f64 {
    let m = f.order();
    let perms = permutations(tuple.len());
    let total: f64 = perms
        .iter()
        .map(|p| {
            let t: Vec<usize> = p.iter().map(|&i| tuple[i]).collect();
            f.value_at(&t[..m]) * g.value_at(&t[m..])
        })
        .sum();
    total / perms.len() as f64
}

/// `(2m)! ‖f ⊗̃ f‖²` split by whether the tuple has a repeated index.
pub fn symmetrized_square_norms(f: &Kernel) -> (f64, f64) {
    let n = f.horizon();
    let len = 2 * f.order();
    let fact: f64 = (1..=len).map(|k| k as f64).product();
    let (mut off, mut diag) = (0.0, 0.0);
    let mut tuple = vec![0usize; len];
    loop {
        let v = symmetrized_value(f, f, &tuple);
        let distinct = Subset::from_indices(&tuple).is_ok();
        if distinct {
            off += v * v;
        } else {
            diag += v * v;
        }
        let mut pos = 0;
        loop {
            if pos == len {
                return (fact * off, fact * diag);
            }
            tuple[pos] += 1;
            if tuple[pos] < n {
                break;
            }
            tuple[pos] = 0;
            pos += 1;
        }
    }
}

pub fn random_model(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> RademacherModel {
    RademacherModel::new((0..n).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
}

pub fn random_kernel(rng: &mut ChaCha8Rng, m: usize, n: usize) -> Kernel {
    Kernel::random(m, n, rng).unwrap()
}

/// Kolmogorov distance by scanning a fine grid plus the atoms themselves.
pub fn kolmogorov_scan(values: &[f64], probs: &[f64]) -> f64 {
    let mut pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .map(|(w, &v)| (v, weight(probs, w)))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let cdf = |x: f64, strict: bool| -> f64 {
        pts.iter()
            .filter(|(v, _)| if strict { *v < x } else { *v <= x })
            .map(|(_, w)| w)
            .sum()
    };
    let mut best: f64 = 0.0;
    for &(x, _) in &pts {
        let ph = phi(x);
        best = best
            .max((cdf(x, false) - ph).abs())
            .max((cdf(x, true) - ph).abs());
    }
    best
}

/// Wasserstein distance by composite Simpson quadrature of `|F - Φ|`.
pub fn wasserstein_quadrature(values: &[f64], probs: &[f64]) -> f64 {
    let mut pts: Vec<(f64, f64)> = values
        .iter()
        .enumerate()
        .map(|(w, &v)| (v, weight(probs, w)))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lo = pts[0].0.min(-10.0) - 10.0;
    let hi = pts.last().unwrap().0.max(10.0) + 10.0;
    // integrate on each gap separately so the step function is smooth there
    let mut knots = vec![lo];
    knots.extend(pts.iter().map(|p| p.0));
    knots.push(hi);
    let mut total = 0.0;
    let mut mass = 0.0;
    let mut idx = 0;
    for win in knots.windows(2) {
        let (a, b) = (win[0], win[1]);
        while idx < pts.len() && pts[idx].0 <= a {
            mass += pts[idx].1;
            idx += 1;
        }
        if b <= a {
            continue;
        }
        // split where Φ crosses the CDF level so the integrand is smooth
        let mut cuts = vec![a];
        if phi(a) < mass && mass < phi(b) {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if phi(mid) < mass {
                    lo = mid
                } else {
                    hi = mid
                }
            }
            cuts.push(0.5 * (lo + hi));
        }
        cuts.push(b);
        for seg in cuts.windows(2) {
            total += simpson(|x| (mass - phi(x)).abs(), seg[0], seg[1], 1000);
        }
    }
    total
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, steps: usize) -> f64 {
    let h = (b - a) / steps as f64;
    let mut s = f(a) + f(b);
    for i in 1..steps {
        s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(a + h * i as f64);
    }
    s * h / 3.0
}

/// Standard normal CDF by adaptive Simpson on the density; slow but
/// independent of any erf implementation.
pub fn phi(x: f64) -> f64 {
    fn pdf(t: f64) -> f64 {
        (-0.5 * t * t).exp() / (2.0 * std::f64::consts::PI).sqrt()
    }
    fn simpson(a: f64, b: f64) -> f64 {
        let c = 0.5 * (a + b);
        (b - a) / 6.0 * (pdf(a) + 4.0 * pdf(c) + pdf(b))
    }
    fn adapt(a: f64, b: f64, whole: f64, eps: f64, depth: u32) -> f64 {
        let c = 0.5 * (a + b);
        let (l, r) = (simpson(a, c), simpson(c, b));
        if depth == 0 || (l + r - whole).abs() <= 15.0 * eps {
            return l + r + (l + r - whole) / 15.0;
        }
        adapt(a, c, l, eps / 2.0, depth - 1) + adapt(c, b, r, eps / 2.0, depth - 1)
    }
    if x >= 0.0 {
        0.5 + adapt(0.0, x, simpson(0.0, x), 1e-15, 40)
    } else {
        0.5 - adapt(x, 0.0, simpson(x, 0.0), 1e-15, 40)
    }
}
