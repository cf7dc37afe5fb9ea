use rug::{Complete, Integer, Rational};

use crate::action::ProblemSize;

/// `S(n,k)` by the row recurrence `S(n,k) = S(n−1,k−1) + k·S(n−1,k)`.
pub fn stirling_recurrence(n: u64, k: u64) -> Integer {
    if k > n {
        return Integer::new();
    }
    let k = k as usize;
    // row[j] = S(i, j) for j <= k
    let mut row = vec![Integer::new(); k + 1];
    row[0] = Integer::from(1);
    for i in 1..=n as usize {
        for j in (1..=k.min(i)).rev() {
            let prev = std::mem::take(&mut row[j]);
            row[j] = prev * j as u64 + &row[j - 1];
        }
        row[0] = Integer::new();
    }
    std::mem::take(&mut row[k])
}

/// `S(n,k) = (1/k!) Σ_j (−1)^{k−j} C(k,j) j^n`.
pub fn stirling_alternating(n: u64, k: u64) -> Integer {
    if k > n {
        return Integer::new();
    }
    if n == 0 {
        return Integer::from(1);
    }
    let mut sum = Integer::new();
    for j in 0..=k {
        let term = Integer::binomial_u(k as u32, j as u32).complete()
            * Integer::u_pow_u(j as u32, n as u32).complete();
        if (k - j) % 2 == 0 {
            sum += term;
        } else {
            sum -= term;
        }
    }
    sum / Integer::factorial(k as u32).complete()
}

/// Exact Stirling numbers of the second kind.
#[derive(Clone, Copy, Debug, Default)]
pub struct StirlingOracleExact;

impl StirlingOracleExact {
    pub fn value(&self, n: u64, k: u64) -> Integer {
        stirling_exact(n, k)
    }

    /// `p = S(n−1,k−1)/S(n,k)`, the probability that element `n` is a
    /// singleton.
    pub fn branch_probability(&self, size: ProblemSize) -> Rational {
        let (n, k, m) = (size.n_elements(), size.k_blocks(), size.m());
        if m < k {
            let (prev, cur) = stirling_by_excess(n, m);
            Rational::from((prev, cur))
        } else {
            Rational::from((stirling_exact(n - 1, k - 1), stirling_exact(n, k)))
        }
    }
}

/// `S(n,k)`.
pub fn stirling_exact(n: u64, k: u64) -> Integer {
    if k > n {
        Integer::new()
    } else if k == n {
        Integer::from(1)
    } else if k == 0 {
        Integer::new()
    } else {
        stirling_alternating(n, k)
    }
}

/// `(S(n−1, n−1−m), S(n, n−m))` by `T(i,e) = T(i−1,e) + (i−e)·T(i−1,e−1)`
/// with `T(i,e) = S(i, i−e)`, in `O(n·m)` operations.
pub fn stirling_by_excess(n: u64, m: u64) -> (Integer, Integer) {
    let m = m as usize;
    let mut t = vec![Integer::new(); m + 1];
    t[0] = Integer::from(1);
    let mut prev = Integer::new();
    for i in 1..=n {
        if i == n {
            prev = t[m].clone();
        }
        for e in (1..=m.min(i as usize)).rev() {
            let add = Integer::from(&t[e - 1] * (i - e as u64));
            t[e] += add;
        }
    }
    (prev, std::mem::take(&mut t[m]))
}

/// Table `S(i, j)` for `i <= n`, `j <= k`.
pub fn stirling_table(n: u64, k: u64) -> Vec<Vec<Integer>> {
    let (n, k) = (n as usize, k as usize);
    let mut t = vec![vec![Integer::new(); k + 1]; n + 1];
    t[0][0] = Integer::from(1);
    for i in 1..=n {
        for j in 1..=k.min(i) {
            let v = Integer::from(&t[i - 1][j] * j as u64) + &t[i - 1][j - 1];
            t[i][j] = v;
        }
    }
    t
}
