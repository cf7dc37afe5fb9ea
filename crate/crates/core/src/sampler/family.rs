use rug::{Complete, Integer, Rational};
use serde::Serialize;

use super::stirling::stirling_exact;
use crate::bitstream::{compare_rational, BitSource, LazyUniform};
use crate::error::{Error, Result};

/// A combinatorial family counted by `Z_n = Σ_j c_j(n) Z_{n−v_j}` on a
/// `d`-dimensional lattice.
pub trait FamilySpec {
    fn dimension(&self) -> usize;

    /// Displacements `v_j`; the branch count is their number.
    fn displacements(&self) -> Vec<Vec<u64>>;

    /// `c_j(n) > 0` wherever `n − v_j` is admissible.
    fn coefficient(&self, point: &[u64], j: usize) -> Integer;

    /// Exact `Z_n`.
    fn count(&self, point: &[u64]) -> Integer;

    /// Points where the unrolling stops.
    fn is_terminal(&self, point: &[u64]) -> bool;
}

/// One unrolled branch: the point, the chosen displacement and the
/// cumulative thresholds it was compared against.
#[derive(Clone, Debug)]
pub struct Branch {
    pub point: Vec<u64>,
    pub choice: usize,
    pub thresholds: Vec<Rational>,
}

/// Unroll the recurrence from `start` down to a terminal point, choosing
/// displacement `j` with probability `c_j Z_{n−v_j}/Z_n`. One lazy uniform
/// per step is compared with the cumulative thresholds in turn.
pub fn unroll<F: FamilySpec>(
    family: &F,
    start: &[u64],
    src: &mut BitSource,
) -> Result<Vec<Branch>> {
    if start.len() != family.dimension() {
        return Err(Error::InvalidArgument(
            "point has the wrong dimension".into(),
        ));
    }
    let vs = family.displacements();
    let mut point = start.to_vec();
    let mut out = Vec::new();
    while !family.is_terminal(&point) {
        let z = family.count(&point);
        if z == 0 {
            return Err(Error::InvalidArgument(format!("empty class at {point:?}")));
        }
        let mut acc = Integer::new();
        let mut thresholds = Vec::with_capacity(vs.len());
        for (j, v) in vs.iter().enumerate() {
            if point.iter().zip(v).all(|(p, d)| p >= d) {
                let next: Vec<u64> = point.iter().zip(v).map(|(p, d)| p - d).collect();
                acc += family.coefficient(&point, j) * family.count(&next);
            }
            thresholds.push(Rational::from((acc.clone(), z.clone())));
        }
        if acc != z {
            return Err(Error::InvalidArgument(format!(
                "recurrence does not close at {point:?}"
            )));
        }
        let mut x = LazyUniform::new();
        let mut choice = vs.len() - 1;
        for (j, t) in thresholds.iter().enumerate().take(vs.len() - 1) {
            if *t > 0 && compare_rational(&mut x, t, src) {
                choice = j;
                break;
            }
        }
        // skip empty trailing branches
        while choice > 0 && thresholds[choice] == thresholds[choice - 1] {
            choice -= 1;
        }
        out.push(Branch {
            point: point.clone(),
            choice,
            thresholds,
        });
        for (p, d) in point.iter_mut().zip(&vs[choice]) {
            *p -= d;
        }
    }
    Ok(out)
}

/// Monotone lattice paths from `(0,0)` to `(n,m)`: `Z = C(n+m, n)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct WalkFamily;

impl FamilySpec for WalkFamily {
    fn dimension(&self) -> usize {
        2
    }
    fn displacements(&self) -> Vec<Vec<u64>> {
        vec![vec![1, 0], vec![0, 1]]
    }
    fn coefficient(&self, _: &[u64], _: usize) -> Integer {
        Integer::from(1)
    }
    fn count(&self, p: &[u64]) -> Integer {
        Integer::binomial_u((p[0] + p[1]) as u32, p[0] as u32).complete()
    }
    fn is_terminal(&self, p: &[u64]) -> bool {
        p[0] == 0 && p[1] == 0
    }
}

/// Set partitions of `n` elements into `k` blocks: `v = (1,1)` with
/// `c = 1`, `v = (1,0)` with `c = k`.
#[derive(Clone, Copy, Debug, Default)]
pub struct StirlingFamily;

impl FamilySpec for StirlingFamily {
    fn dimension(&self) -> usize {
        2
    }
    fn displacements(&self) -> Vec<Vec<u64>> {
        vec![vec![1, 1], vec![1, 0]]
    }
    fn coefficient(&self, p: &[u64], j: usize) -> Integer {
        if j == 0 {
            Integer::from(1)
        } else {
            Integer::from(p[1])
        }
    }
    fn count(&self, p: &[u64]) -> Integer {
        stirling_exact(p[0], p[1])
    }
    fn is_terminal(&self, p: &[u64]) -> bool {
        p[1] == p[0] || p[1] <= 1
    }
}

/// Lattice step, read from the origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum WalkStep {
    /// First coordinate.
    East,
    /// Second coordinate.
    North,
}

/// A sampled path with the threshold used at each step (last step first).
#[derive(Clone, Debug)]
pub struct WalkSample {
    pub steps: Vec<WalkStep>,
    pub thresholds: Vec<Rational>,
    pub points: Vec<(u64, u64)>,
}

/// Uniform monotone lattice path to `(n, m)`, with its thresholds.
pub fn sample_walk_traced(n: u64, m: u64, src: &mut BitSource) -> Result<WalkSample> {
    let branches = unroll(&WalkFamily, &[n, m], src)?;
    let mut steps: Vec<WalkStep> = branches
        .iter()
        .map(|b| {
            if b.choice == 0 {
                WalkStep::East
            } else {
                WalkStep::North
            }
        })
        .collect();
    steps.reverse();
    Ok(WalkSample {
        steps,
        thresholds: branches.iter().map(|b| b.thresholds[0].clone()).collect(),
        points: branches.iter().map(|b| (b.point[0], b.point[1])).collect(),
    })
}

/// Uniform monotone lattice path from `(0,0)` to `(n, m)`.
pub fn sample_walk(n: u64, m: u64, src: &mut BitSource) -> Result<Vec<WalkStep>> {
    sample_walk_traced(n, m, src).map(|w| w.steps)
}
