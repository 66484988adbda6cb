//! Binomial coefficients and fixed-size subset enumeration over bitmasks.

/// Exact binomial coefficient `C(n, k)`, zero when `k > n`.
///
/// Panics on overflow of `u64`, which cannot happen for `n <= 62`.
pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    u64::try_from(acc).expect("binomial coefficient overflows u64")
}

/// Binomial coefficient with the convention `C(j, i) = 0` whenever `j < i`,
/// extended to negative arguments (which also yield zero).
pub fn binomial_signed(j: i64, i: i64) -> u64 {
    if i < 0 || j < 0 || j < i {
        0
    } else {
        binomial(j as usize, i as usize)
    }
}

/// `C(n, k)` in floating point, usable for arguments far beyond the exact range.
pub fn binomial_f64(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `C(a, t) / C(b, t)` for `a <= b`, evaluated as a running product so it
/// stays finite for large `b`.
pub fn binomial_ratio_f64(a: usize, b: usize, t: usize) -> f64 {
    debug_assert!(a <= b);
    if t > b {
        // both zero; callers treat the share as absent
        return 0.0;
    }
    if t > a {
        return 0.0;
    }
    (0..t).fold(1.0, |acc, i| acc * (a - i) as f64 / (b - i) as f64)
}

/// Iterator over all `k`-element subsets of `{0, .., n-1}` as bitmasks,
/// in ascending numeric order (Gosper's hack).
#[derive(Debug, Clone)]
pub struct FixedSizeSubsets {
    next: Option<u64>,
    limit: u64,
}

pub fn subsets_of_size(n: usize, k: usize) -> FixedSizeSubsets {
    assert!(n < 64, "universe too large for a u64 mask");
    let limit = 1u64 << n;
    let next = if k > n {
        None
    } else if k == 0 {
        Some(0)
    } else {
        Some((1u64 << k) - 1)
    };
    FixedSizeSubsets { next, limit }
}

impl Iterator for FixedSizeSubsets {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        let cur = self.next?;
        self.next = if cur == 0 {
            None
        } else {
            let c = cur & cur.wrapping_neg();
            let r = cur + c;
            let n = (((r ^ cur) >> 2) / c) | r;
            (n < self.limit).then_some(n)
        };
        Some(cur)
    }
}

/// Indices of set bits, ascending.
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
