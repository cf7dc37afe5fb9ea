use rug::{Complete, Integer, Rational};
use serde::Serialize;

use super::partition::{materialize, Decision, SetPartition};
use super::stirling::{stirling_table, StirlingOracleExact};
use crate::action::{newton_step, refine, solve_saddle, ProblemSize, SaddleState, SaddleTarget};
use crate::ball;
use crate::bitstream::{
    bernoulli_fixed, compare_lazy, compare_rational, uniform_int, BitSource, Comparison,
    CostCounters, LazyUniform,
};
use crate::error::{Error, Result};
use crate::oracle::{dyadic_bits, BoundRequest, Oracle, OracleConfig};

/// Exact recursive sampler: each branch is decided against the exact ratio
/// `S(n−1,k−1)/S(n,k)` from a precomputed table.
pub fn sample_exact_recursive(size: ProblemSize, src: &mut BitSource) -> Result<SetPartition> {
    let (n, k) = (size.n_elements(), size.k_blocks());
    let table = stirling_table(n, k);
    let mut decisions = Vec::with_capacity(n as usize);
    let (mut n, mut k) = (n, k);
    while k != n && k != 1 {
        let p = Rational::from((
            table[n as usize - 1][k as usize - 1].clone(),
            table[n as usize][k as usize].clone(),
        ));
        let mut x = LazyUniform::new();
        if compare_rational(&mut x, &p, src) {
            decisions.push(Decision::Singleton);
            k -= 1;
        } else {
            decisions.push(Decision::Join(uniform_int(k, src)?));
        }
        n -= 1;
    }
    finish(base_partition(n, k), decisions)
}

fn base_partition(n: u64, k: u64) -> SetPartition {
    if k == n {
        SetPartition::singletons(n)
    } else {
        SetPartition::one_block(n)
    }
}

fn finish(base: SetPartition, mut decisions: Vec<Decision>) -> Result<SetPartition> {
    decisions.reverse();
    materialize(&base, &decisions)
}

/// Boltzmann parameter `x·2^64`, the root of `Σ_{y<=k} xy/(1 − xy) = m`.
/// Any `x < 1/k` gives exact output; the root maximises the acceptance
/// rate.
fn boltzmann_parameter(size: ProblemSize) -> u64 {
    let k = size.k_blocks();
    let m = size.m() as f64;
    let mean = |u: f64| -> f64 {
        (1..=k)
            .map(|y| {
                let q = u * y as f64 / k as f64;
                q / (1.0 - q)
            })
            .sum()
    };
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if mean(mid) > m {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let x = lo / k as f64;
    ((x * 2f64.powi(64)) as u64).max(1)
}

/// Boltzmann sampler with its number of attempts.
pub fn sample_boltzmann_counted(
    size: ProblemSize,
    src: &mut BitSource,
) -> Result<(SetPartition, u64)> {
    let (n, k) = (size.n_elements(), size.k_blocks());
    if k == n || k == 1 {
        return Ok((base_partition(n, k), 1));
    }
    let m = size.m();
    let xs = boltzmann_parameter(size) as u128;
    let mut counts = vec![0u64; k as usize];
    let mut attempts = 0u64;
    loop {
        attempts += 1;
        let mut total = 0u64;
        let mut ok = true;
        'profile: for y in 1..=k {
            // geometric with ratio x·y: count successes before the first failure
            let q = (xs * y as u128) << 64;
            let mut c = 0;
            while bernoulli_fixed(q, src) {
                c += 1;
                total += 1;
                if total > m {
                    ok = false;
                    break 'profile;
                }
            }
            counts[y as usize - 1] = c;
        }
        if ok && total == m {
            break;
        }
    }
    // opener/insertion word: open block y, then c_y elements into blocks 1..y
    let mut blocks: Vec<Vec<u32>> = Vec::with_capacity(k as usize);
    let mut e = 0u32;
    for y in 1..=k {
        e += 1;
        blocks.push(vec![e]);
        for _ in 0..counts[y as usize - 1] {
            e += 1;
            let j = uniform_int(y, src)?;
            blocks[j as usize - 1].push(e);
        }
    }
    Ok((SetPartition::from_blocks(blocks)?, attempts))
}

/// Boltzmann sampler: geometric block-profile draws conditioned on the
/// total size, then a uniform insertion word.
pub fn sample_boltzmann(size: ProblemSize, src: &mut BitSource) -> Result<SetPartition> {
    sample_boltzmann_counted(size, src).map(|r| r.0)
}

/// Whether `k·e^{−n/k} < 1`.
pub fn coloring_in_regime(size: ProblemSize) -> bool {
    let (n, k) = (size.n_elements() as f64, size.k_blocks() as f64);
    k * (-n / k).exp() < 1.0
}

/// Surjection rejection: colour every element uniformly, retry until all
/// `k` colours occur.
pub fn sample_easy_coloring(size: ProblemSize, src: &mut BitSource) -> Result<SetPartition> {
    if !coloring_in_regime(size) {
        return Err(Error::RegimeRefused(format!(
            "colouring needs k·exp(−n/k) < 1 at n={}, k={}",
            size.n_elements(),
            size.k_blocks()
        )));
    }
    let (n, k) = (size.n_elements(), size.k_blocks());
    loop {
        let mut blocks = vec![Vec::new(); k as usize];
        for e in 1..=n as u32 {
            let c = uniform_int(k, src)?;
            blocks[c as usize - 1].push(e);
        }
        if blocks.iter().all(|b| !b.is_empty()) {
            return SetPartition::from_blocks(blocks);
        }
    }
}

/// Whether a partition into `size.k_blocks()` parts is in the forest
/// regime: `e² <= n/2` with `e = n − k` edges.
pub fn forest_in_regime(size: ProblemSize) -> bool {
    let e = size.m() as f64;
    e * e <= size.n_elements() as f64 / 2.0
}

/// Random forest rejection: draw `n − k` distinct edges of the complete
/// graph, reject on a cycle, otherwise accept with probability
/// `Π 1/(j^{j−2})` over component sizes `j`.
pub fn sample_easy_forest(size: ProblemSize, src: &mut BitSource) -> Result<SetPartition> {
    if !forest_in_regime(size) {
        return Err(Error::RegimeRefused(format!(
            "forest method needs (n−k)² <= n/2 at n={}, k={}",
            size.n_elements(),
            size.k_blocks()
        )));
    }
    let n = size.n_elements() as usize;
    let edges = size.m() as usize;
    'retry: loop {
        let mut parent: Vec<usize> = (0..n).collect();
        fn root(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut chosen: Vec<(usize, usize)> = Vec::with_capacity(edges);
        for _ in 0..edges {
            let a = uniform_int(n as u64, src)? as usize - 1;
            let mut b = uniform_int(n as u64 - 1, src)? as usize - 1;
            if b >= a {
                b += 1;
            }
            let e = (a.min(b), a.max(b));
            if chosen.contains(&e) {
                continue 'retry;
            }
            chosen.push(e);
            let (ra, rb) = (root(&mut parent, a), root(&mut parent, b));
            if ra == rb {
                continue 'retry;
            }
            parent[ra] = rb;
        }
        let mut comps: std::collections::BTreeMap<usize, Vec<u32>> = Default::default();
        for v in 0..n {
            let r = root(&mut parent, v);
            comps.entry(r).or_default().push(v as u32 + 1);
        }
        let mut weight = Integer::from(1);
        for c in comps.values() {
            let j = c.len() as u32;
            if j > 2 {
                weight *= Integer::u_pow_u(j, j - 2).complete();
            }
        }
        let accept = if weight == 1 {
            true
        } else {
            let mut x = LazyUniform::new();
            compare_rational(&mut x, &Rational::from((Integer::from(1), weight)), src)
        };
        if accept {
            return SetPartition::from_blocks(comps.into_values().collect());
        }
    }
}

/// Settings of the hybrid sampler.
#[derive(Clone, Debug, Serialize)]
pub struct HybridConfig {
    pub oracle: OracleConfig,
    /// Size at or below which the Boltzmann sampler finishes; default
    /// `⌈√N⌉`.
    pub easy_threshold: Option<u64>,
    /// Finish early with the coloring, forest or Boltzmann sampler when
    /// their regime predicates hold.
    pub easy_regimes: bool,
    /// Record one [`MoveTrace`] per move.
    pub trace: bool,
}

impl Default for HybridConfig {
    fn default() -> Self {
        HybridConfig {
            oracle: OracleConfig::default(),
            easy_threshold: None,
            easy_regimes: true,
            trace: false,
        }
    }
}

/// Per-move record of the hybrid sampler.
#[derive(Clone, Debug, Serialize)]
pub struct MoveTrace {
    pub n: u64,
    pub k: u64,
    /// Saddle radius used for the level-1 bounds of this move.
    pub error_radius: f64,
    /// Newton steps spent on this move, including refinements on escalation.
    pub newton_steps: u32,
    /// Level that resolved the branch; `s_max + 1` for the exact fallback.
    pub level: u32,
}

/// Output of one hybrid run.
#[derive(Clone, Debug)]
pub struct HybridRun {
    pub partition: SetPartition,
    pub counters: CostCounters,
    pub trace: Vec<MoveTrace>,
}

/// Hybrid sampler: lazy comparison against oracle bounds of increasing
/// level, exact fallback, Boltzmann finish.
pub fn sample_hybrid(
    size: ProblemSize,
    src: &mut BitSource,
    config: &HybridConfig,
) -> Result<(SetPartition, CostCounters)> {
    sample_hybrid_run(size, src, config).map(|r| (r.partition, r.counters))
}

/// Expected Boltzmann cost `n·√(m+1)` fits in a budget of `total`.
pub fn boltzmann_is_cheap(size: ProblemSize, total: u64) -> bool {
    size.n_elements() as f64 * ((size.m() + 1) as f64).sqrt() <= total as f64
}

/// [`sample_hybrid`] with the per-move trace.
pub fn sample_hybrid_run(
    size: ProblemSize,
    src: &mut BitSource,
    config: &HybridConfig,
) -> Result<HybridRun> {
    HybridSampler::new(config.clone()).run(size, src)
}

/// Hybrid sampler whose oracle caches persist across samples.
#[derive(Clone, Debug)]
pub struct HybridSampler {
    config: HybridConfig,
    oracle: Oracle,
}

impl HybridSampler {
    pub fn new(config: HybridConfig) -> Self {
        let oracle = Oracle::new(config.oracle.clone());
        HybridSampler { config, oracle }
    }

    pub fn config(&self) -> &HybridConfig {
        &self.config
    }

    pub fn sample(&mut self, size: ProblemSize, src: &mut BitSource) -> Result<SetPartition> {
        self.run(size, src).map(|r| r.partition)
    }

    pub fn run(&mut self, size: ProblemSize, src: &mut BitSource) -> Result<HybridRun> {
        hybrid_run(size, src, &self.config, &mut self.oracle)
    }
}

fn hybrid_run(
    size: ProblemSize,
    src: &mut BitSource,
    config: &HybridConfig,
    oracle: &mut Oracle,
) -> Result<HybridRun> {
    let builds0 = oracle.builds();
    let bits0 = src.bits_emitted();
    let queries0 = src.digit_queries();
    let ops0 = ball::op_count();
    let mut counters = CostCounters::default();
    let mut trace = Vec::new();
    let total = size.n_elements();
    let n0 = config
        .easy_threshold
        .unwrap_or_else(|| (total as f64).sqrt().ceil() as u64)
        .max(1);
    let s_max = config.oracle.s_max;
    let exact = StirlingOracleExact;
    let mut decisions = Vec::new();
    let mut cur = size;
    let mut state: Option<SaddleState> = None;
    let base = loop {
        let (n, k) = (cur.n_elements(), cur.k_blocks());
        if k == n || k == 1 {
            break base_partition(n, k);
        }
        let easy = config.easy_regimes;
        if n <= n0 || (easy && boltzmann_is_cheap(cur, total)) {
            break sample_boltzmann(cur, src)?;
        }
        if easy && forest_in_regime(cur) {
            break sample_easy_forest(cur, src)?;
        }
        if easy && coloring_in_regime(cur) {
            break sample_easy_coloring(cur, src)?;
        }
        let mut st = match state.take() {
            Some(s) => s,
            None => solve_saddle(cur, SaddleTarget::Integral, None),
        };
        let radius = st.error_radius_f64();
        let mut steps = 0u32;
        let mut x = LazyUniform::new();
        let mut outcome = None;
        let mut level_used = s_max + 1;
        for level in 1..=s_max {
            if level >= 2 {
                counters.note_escalation(level);
            }
            if level >= 2 && !oracle.is_memoized(cur, level) {
                let tol = (k as f64).powi(-(level as i32 + 1));
                let (refined, extra) = refine(&st, tol, 8);
                st = refined;
                steps += extra;
            }
            let pair = match oracle.build(&BoundRequest {
                size: cur,
                level,
                saddle: &st,
            }) {
                Ok(p) => p,
                Err(Error::Escalate(_)) => continue,
                Err(e) => return Err(e),
            };
            let budget = dyadic_bits(cur, level) + 8;
            match compare_lazy(&mut x, &pair.lower, &pair.upper, src, budget)? {
                Comparison::Below => outcome = Some(true),
                Comparison::Above => outcome = Some(false),
                Comparison::Inside => {}
            }
            if outcome.is_some() {
                level_used = level;
                break;
            }
        }
        let singleton = match outcome {
            Some(b) => b,
            None => {
                counters.exact_fallbacks += 1;
                compare_rational(&mut x, &exact.branch_probability(cur), src)
            }
        };
        let next = if singleton {
            decisions.push(Decision::Singleton);
            ProblemSize::new(n - 1, k - 1)?
        } else {
            decisions.push(Decision::Join(uniform_int(k, src)?));
            ProblemSize::new(n - 1, k)?
        };
        if !next.is_degenerate() && next.n_elements() > n0 {
            state = Some(newton_step(&st, next));
            steps += 1;
        }
        counters.newton_steps += steps as u64;
        if config.trace {
            trace.push(MoveTrace {
                n,
                k,
                error_radius: radius,
                newton_steps: steps,
                level: level_used,
            });
        }
        cur = next;
    };
    let partition = finish(base, decisions)?;
    counters.absorb_source(src, bits0, queries0);
    counters.bigfloat_ops = ball::op_count() - ops0;
    counters.oracle_builds = oracle.builds() - builds0;
    Ok(HybridRun {
        partition,
        counters,
        trace,
    })
}
