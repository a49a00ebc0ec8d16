//! Small numeric helpers shared across modules.

/// Block size for deterministic chunked summation.
const BLOCK: usize = 256;

/// Sums a slice with a fixed pairwise tree so the result does not depend on
/// thread count or call site.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= BLOCK {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// `Σ a_i b_i` with pairwise accumulation.
pub fn pairwise_dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    if a.len() <= BLOCK {
        return a.iter().zip(b).map(|(x, y)| x * y).sum();
    }
    let mid = a.len() / 2;
    pairwise_dot(&a[..mid], &b[..mid]) + pairwise_dot(&a[mid..], &b[mid..])
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k)
        .fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        .round()
}

/// Iterates over all `k`-element subsets of `{0..n}` as bit masks, in
/// increasing numeric order.
pub fn k_subsets(n: usize, k: usize) -> impl Iterator<Item = u64> {
    let limit: u64 = if n >= 64 { u64::MAX } else { 1u64 << n };
    let mut next = if k == 0 {
        Some(0u64)
    } else if k > n {
        None
    } else {
        Some((1u64 << k) - 1)
    };
    std::iter::from_fn(move || {
        let cur = next?;
        next = if cur == 0 {
            None
        } else {
            // Gosper's hack
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            let nx = (((r ^ cur) >> 2) / c) | r;
            if r == 0 || nx >= limit || (n >= 64 && r < cur) {
                None
            } else {
                Some(nx)
            }
        };
        Some(cur)
    })
}

/// Iterates over every submask of `mask`, including `0` and `mask` itself.
pub fn submasks(mask: u64) -> impl Iterator<Item = u64> {
    let mut cur = Some(mask);
    std::iter::from_fn(move || {
        let s = cur?;
        cur = if s == 0 { None } else { Some((s - 1) & mask) };
        Some(s)
    })
}

/// Positions of the set bits of `mask`, ascending.
pub fn bits(mask: u64) -> impl Iterator<Item = usize> {
    let mut m = mask;
    std::iter::from_fn(move || {
        if m == 0 {
            None
        } else {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            Some(i)
        }
    })
}
