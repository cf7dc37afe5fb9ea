//! Eulerian and Bernoulli numbers.

use std::sync::OnceLock;

use rug::{Integer, Rational};

use crate::error::{Error, Result};

/// Default number of Eulerian rows and Bernoulli indices kept by the
/// shared table.
pub const DEFAULT_TABLE_SIZE: usize = 64;

/// Exact Eulerian and Bernoulli tables.
///
/// `T_{n,k}` counts permutations of `n+1` objects with `k` rises, for
/// `0 <= k <= n <= size`. Bernoulli numbers use the modern convention
/// (`B₁ = -1/2`) and are stored for `0 <= j <= 2·size`.
#[derive(Clone, Debug)]
pub struct CombinatoricsTables {
    size: usize,
    eulerian: Vec<Vec<Integer>>,
    bernoulli: Vec<Rational>,
}

impl CombinatoricsTables {
    pub fn new(size: usize) -> Self {
        let mut eulerian: Vec<Vec<Integer>> = vec![vec![Integer::from(1)]];
        for n in 1..=size {
            let prev = &eulerian[n - 1];
            let row: Vec<Integer> = (0..=n)
                .map(|k| {
                    let mut t = Integer::new();
                    if k < n {
                        t += Integer::from(k + 1) * &prev[k];
                    }
                    if k >= 1 {
                        t += Integer::from(n + 1 - k) * &prev[k - 1];
                    }
                    t
                })
                .collect();
            eulerian.push(row);
        }

        let top = 2 * size;
        let mut bernoulli: Vec<Rational> = Vec::with_capacity(top + 1);
        bernoulli.push(Rational::from(1));
        for m in 1..=top {
            // Σ_{j<=m} C(m+1, j) B_j = 0
            let mut s = Rational::new();
            for (j, b) in bernoulli.iter().enumerate() {
                s += Rational::from(Integer::from(m + 1).binomial(j as u32)) * b;
            }
            bernoulli.push(-s / Integer::from(m + 1));
        }
        CombinatoricsTables {
            size,
            eulerian,
            bernoulli,
        }
    }

    /// Shared table of size [`DEFAULT_TABLE_SIZE`].
    pub fn shared() -> &'static CombinatoricsTables {
        static TABLES: OnceLock<CombinatoricsTables> = OnceLock::new();
        TABLES.get_or_init(|| CombinatoricsTables::new(DEFAULT_TABLE_SIZE))
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `T_{n,k}`; zero for `k > n`.
    pub fn eulerian(&self, n: usize, k: usize) -> Result<Integer> {
        let row = self.eulerian.get(n).ok_or(Error::OutOfTable {
            index: n,
            size: self.size,
        })?;
        Ok(row.get(k).cloned().unwrap_or_default())
    }

    /// Row `T_{n,0}, …, T_{n,n}`.
    pub fn eulerian_row(&self, n: usize) -> Result<&[Integer]> {
        self.eulerian
            .get(n)
            .map(Vec::as_slice)
            .ok_or(Error::OutOfTable {
                index: n,
                size: self.size,
            })
    }

    pub fn bernoulli(&self, j: usize) -> Result<Rational> {
        self.bernoulli.get(j).cloned().ok_or(Error::OutOfTable {
            index: j,
            size: 2 * self.size,
        })
    }

    /// Text dump: one line per Eulerian row, then one line per nonzero
    /// Bernoulli number.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (n, row) in self.eulerian.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(Integer::to_string).collect();
            out.push_str(&format!("T_{n} = {}\n", cells.join(" ")));
        }
        for (j, b) in self.bernoulli.iter().enumerate() {
            if *b != 0 {
                out.push_str(&format!("B_{j} = {b}\n"));
            }
        }
        out
    }
}

/// `T_{n,k}` from the shared table.
pub fn eulerian(n: usize, k: usize) -> Result<Integer> {
    CombinatoricsTables::shared().eulerian(n, k)
}

/// `B_j` (modern convention) from the shared table.
pub fn bernoulli(j: usize) -> Result<Rational> {
    CombinatoricsTables::shared().bernoulli(j)
}

/// Coefficients of `E_n(y) = Σ_k T_{n,k} y^k`.
pub fn eulerian_polynomial(n: usize) -> Result<Vec<Integer>> {
    CombinatoricsTables::shared()
        .eulerian_row(n)
        .map(<[Integer]>::to_vec)
}
