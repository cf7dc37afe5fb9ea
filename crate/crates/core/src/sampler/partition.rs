use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Partition of `{1, …, n}` into `k` non-empty blocks, in canonical order:
/// blocks sorted by their minimum, elements ascending within a block.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct SetPartition {
    blocks: Vec<Vec<u32>>,
    n_elements: u64,
}

impl SetPartition {
    /// Validate and canonicalize.
    pub fn from_blocks(mut blocks: Vec<Vec<u32>>) -> Result<SetPartition> {
        let n: usize = blocks.iter().map(Vec::len).sum();
        let mut seen = vec![false; n + 1];
        for b in &mut blocks {
            if b.is_empty() {
                return Err(Error::InvalidArgument("empty block".into()));
            }
            b.sort_unstable();
            for &e in b.iter() {
                let e = e as usize;
                if e == 0 || e > n || seen[e] {
                    return Err(Error::InvalidArgument(format!(
                        "element {e} out of range or repeated"
                    )));
                }
                seen[e] = true;
            }
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(SetPartition {
            blocks,
            n_elements: n as u64,
        })
    }

    pub fn singletons(n: u64) -> SetPartition {
        SetPartition {
            blocks: (1..=n as u32).map(|e| vec![e]).collect(),
            n_elements: n,
        }
    }

    pub fn one_block(n: u64) -> SetPartition {
        SetPartition {
            blocks: if n == 0 {
                Vec::new()
            } else {
                vec![(1..=n as u32).collect()]
            },
            n_elements: n,
        }
    }

    pub fn blocks(&self) -> &[Vec<u32>] {
        &self.blocks
    }

    pub fn n_elements(&self) -> u64 {
        self.n_elements
    }

    pub fn k_blocks(&self) -> u64 {
        self.blocks.len() as u64
    }

    /// Block sizes in decreasing order.
    pub fn profile(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.blocks.iter().map(Vec::len).collect();
        p.sort_unstable_by(|a, b| b.cmp(a));
        p
    }

    /// Restricted growth string: block index (from 0) of each element.
    pub fn growth_string(&self) -> Vec<u32> {
        let mut g = vec![0u32; self.n_elements as usize];
        for (i, b) in self.blocks.iter().enumerate() {
            for &e in b {
                g[e as usize - 1] = i as u32;
            }
        }
        g
    }

    /// Check the canonical-form invariants.
    pub fn validate(&self) -> Result<()> {
        let again = SetPartition::from_blocks(self.blocks.clone())?;
        if again != *self {
            return Err(Error::InvalidArgument(
                "partition not in canonical order".into(),
            ));
        }
        Ok(())
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.blocks.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            for (j, e) in b.iter().enumerate() {
                if j > 0 {
                    f.write_str(" ")?;
                }
                write!(f, "{e}")?;
            }
        }
        Ok(())
    }
}

/// One step of the recursive decomposition, read forwards: the next
/// element either opens a block or joins block `j` (1-based, creation order).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Decision {
    Singleton,
    Join(u64),
}

/// Extend `base` (a partition of `{1..b}`) by elements `b+1, b+2, …`
/// following `decisions` in element order.
pub fn materialize(base: &SetPartition, decisions: &[Decision]) -> Result<SetPartition> {
    let mut blocks = base.blocks.clone();
    let mut e = base.n_elements as u32;
    for d in decisions {
        e += 1;
        match *d {
            Decision::Singleton => blocks.push(vec![e]),
            Decision::Join(j) => {
                let b = blocks.get_mut(j as usize - 1).ok_or_else(|| {
                    Error::InvalidArgument(format!("join into missing block {j}"))
                })?;
                b.push(e);
            }
        }
    }
    SetPartition::from_blocks(blocks)
}

/// All partitions of `{1..n}` into `k` blocks, in lexicographic order of
/// their growth strings.
pub fn enumerate_partitions(n: u64, k: u64) -> Vec<SetPartition> {
    fn rec(g: &mut Vec<u32>, n: usize, k: u32, used: u32, out: &mut Vec<SetPartition>) {
        if g.len() == n {
            if used == k {
                let mut blocks = vec![Vec::new(); k as usize];
                for (i, &b) in g.iter().enumerate() {
                    blocks[b as usize].push(i as u32 + 1);
                }
                out.push(SetPartition::from_blocks(blocks).expect("valid"));
            }
            return;
        }
        // not enough elements left to open the missing blocks
        if (n - g.len()) < (k - used) as usize {
            return;
        }
        for b in 0..=used.min(k - 1) {
            g.push(b);
            rec(g, n, k, used.max(b + 1), out);
            g.pop();
        }
    }
    let mut out = Vec::new();
    if k == 0 || k > n {
        if n == 0 && k == 0 {
            out.push(SetPartition::singletons(0));
        }
        return out;
    }
    rec(
        &mut Vec::with_capacity(n as usize),
        n as usize,
        k as u32,
        0,
        &mut out,
    );
    out
}
