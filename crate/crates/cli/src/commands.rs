use std::collections::HashMap;
use std::io::Write;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use setpart::sampler::{
    enumerate_partitions, sample_boltzmann, sample_easy_coloring, sample_easy_forest,
    sample_exact_recursive, sample_walk, stirling_exact, stirling_table, HybridConfig,
    HybridSampler, SetPartition, WalkStep,
};
use setpart::series::{format_a_table, format_b_table, CombinatoricsTables};
use setpart::stats::chi_square_uniform;
use setpart::{BitSource, BoundRequest, CostCounters, Error, Oracle, OracleConfig, ProblemSize};

use crate::{Cli, Command, Format, Method, SamplerArgs, Status};

/// Partitions per `chi2` cell needed for the approximation to hold.
const MIN_EXPECTED: u64 = 5;

pub fn run(cli: &Cli, mut out: Box<dyn Write>) -> Result<Status> {
    let status = match &cli.command {
        Command::Sample { sampler, samples } => sample(cli.format, sampler, *samples, &mut out)?,
        Command::Walk {
            n,
            m,
            samples,
            seed,
        } => walk(cli.format, *n, *m, *samples, *seed, &mut out)?,
        Command::VerifyBounds { n_max, s_max } => {
            verify_bounds(cli.format, *n_max, *s_max, &mut out)?
        }
        Command::Chi2 {
            sampler,
            samples,
            alpha,
        } => chi2(cli.format, sampler, *samples, *alpha, &mut out)?,
        Command::Bench {
            sizes,
            methods,
            runs,
            seed,
            jobs,
        } => bench(cli.format, sizes, methods, *runs, *seed, *jobs, &mut out)?,
        Command::DumpTables { s_max } => dump_tables(cli.format, *s_max, &mut out)?,
    };
    out.flush()?;
    Ok(status)
}

/// One sampler bound to a method and a bit source.
struct Draw {
    method: Method,
    size: ProblemSize,
    hybrid: HybridSampler,
    src: BitSource,
    counters: CostCounters,
}

impl Draw {
    fn new(args: &SamplerArgs) -> Result<Draw> {
        let size = ProblemSize::new(args.n, args.k)?;
        let config = HybridConfig {
            oracle: OracleConfig {
                s_max: args.s_max,
                ..OracleConfig::default()
            },
            ..HybridConfig::default()
        };
        Ok(Draw {
            method: args.method,
            size,
            hybrid: HybridSampler::new(config),
            src: BitSource::new(args.seed),
            counters: CostCounters::default(),
        })
    }

    fn next(&mut self) -> Result<SetPartition> {
        let src = &mut self.src;
        let p = match self.method {
            Method::Hybrid => {
                let run = self.hybrid.run(self.size, src)?;
                self.counters.merge(&run.counters);
                return Ok(run.partition);
            }
            Method::Exact => sample_exact_recursive(self.size, src)?,
            Method::Boltzmann => sample_boltzmann(self.size, src)?,
            Method::EasyColoring => sample_easy_coloring(self.size, src)?,
            Method::EasyForest => sample_easy_forest(self.size, src)?,
        };
        Ok(p)
    }

    fn finish(mut self) -> CostCounters {
        if self.method != Method::Hybrid {
            self.counters.absorb_source(&self.src, 0, 0);
        }
        self.counters
    }
}

fn write_counters(format: Format, c: &CostCounters, out: &mut dyn Write) -> Result<()> {
    let record = c.to_record();
    match format {
        Format::Text => {
            let cells: Vec<String> = record.iter().map(|(k, v)| format!("{k}={v}")).collect();
            writeln!(out, "counters {}", cells.join(" "))?;
        }
        Format::Json => writeln!(out, "{}", json!({ "counters": record }))?,
    }
    Ok(())
}

fn sample(format: Format, args: &SamplerArgs, samples: u64, out: &mut dyn Write) -> Result<Status> {
    let mut draw = Draw::new(args)?;
    for _ in 0..samples {
        let p = draw.next()?;
        match format {
            Format::Text => writeln!(out, "{p}")?,
            Format::Json => writeln!(
                out,
                "{}",
                json!({ "n": args.n, "k": args.k, "seed": args.seed, "blocks": p.blocks() })
            )?,
        }
    }
    write_counters(format, &draw.finish(), out)?;
    Ok(Status::Ok)
}

fn walk(
    format: Format,
    n: u64,
    m: u64,
    samples: u64,
    seed: u64,
    out: &mut dyn Write,
) -> Result<Status> {
    let mut src = BitSource::new(seed);
    for _ in 0..samples {
        let steps: String = sample_walk(n, m, &mut src)?
            .into_iter()
            .map(|s| match s {
                WalkStep::East => 'E',
                WalkStep::North => 'N',
            })
            .collect();
        match format {
            Format::Text => writeln!(out, "{steps}")?,
            Format::Json => writeln!(
                out,
                "{}",
                json!({ "n": n, "m": m, "seed": seed, "steps": steps })
            )?,
        }
    }
    let mut c = CostCounters::default();
    c.absorb_source(&src, 0, 0);
    write_counters(format, &c, out)?;
    Ok(Status::Ok)
}

fn verify_bounds(format: Format, n_max: u64, s_max: u32, out: &mut dyn Write) -> Result<Status> {
    if s_max == 0 {
        bail!("--s-max must be at least 1");
    }
    let table = stirling_table(n_max, n_max);
    let mut oracle = Oracle::new(OracleConfig {
        s_max,
        ..OracleConfig::default()
    });
    let mut checked = 0u64;
    let mut declined = vec![0u64; s_max as usize];
    let mut violations = 0u64;
    for n in 3..=n_max {
        for k in 2..n {
            let size = ProblemSize::new(n, k)?;
            let p = rug::Rational::from((
                table[n as usize - 1][k as usize - 1].clone(),
                table[n as usize][k as usize].clone(),
            ));
            let saddle = setpart::action::solve_saddle(size, setpart::SaddleTarget::Integral, None);
            for level in 1..=s_max {
                let req = BoundRequest {
                    size,
                    level,
                    saddle: &saddle,
                };
                match oracle.build(&req) {
                    Ok(pair) => {
                        checked += 1;
                        if pair.contains(&p) {
                            continue;
                        }
                        violations += 1;
                        let record = json!({
                            "violation": { "n": n, "k": k, "s": level },
                            "p": p.to_f64(),
                            "lower": pair.lower.to_f64(),
                            "upper": pair.upper.to_f64(),
                            "diagnostics": pair.diagnostics.to_record(),
                        });
                        match format {
                            Format::Text => writeln!(
                                out,
                                "violation n={n} k={k} s={level}: p={} not in [{}, {}]; {:?}",
                                p.to_f64(),
                                pair.lower.to_f64(),
                                pair.upper.to_f64(),
                                pair.diagnostics.to_record()
                            )?,
                            Format::Json => writeln!(out, "{record}")?,
                        }
                    }
                    Err(Error::Escalate(_)) => declined[level as usize - 1] += 1,
                    Err(e) => return Err(e).context(format!("n={n} k={k} s={level}")),
                }
            }
        }
    }
    match format {
        Format::Text => writeln!(
            out,
            "verify-bounds n<={n_max} s<={s_max}: {checked} enclosures checked, \
             declined by level {declined:?}, {violations} violations"
        )?,
        Format::Json => writeln!(
            out,
            "{}",
            json!({
                "n_max": n_max,
                "s_max": s_max,
                "checked": checked,
                "declined": declined,
                "violations": violations,
            })
        )?,
    }
    Ok(if violations == 0 {
        Status::Ok
    } else {
        Status::VerificationFailed
    })
}

fn chi2(
    format: Format,
    args: &SamplerArgs,
    samples: u64,
    alpha: f64,
    out: &mut dyn Write,
) -> Result<Status> {
    let cells = stirling_exact(args.n, args.k);
    if cells == 0 || cells > samples / MIN_EXPECTED {
        bail!(
            "S({}, {}) = {cells} cells; need at least {MIN_EXPECTED} samples per cell",
            args.n,
            args.k
        );
    }
    let index: HashMap<String, usize> = enumerate_partitions(args.n, args.k)
        .iter()
        .enumerate()
        .map(|(i, p)| (p.to_string(), i))
        .collect();
    let mut counts = vec![0u64; index.len()];
    let mut draw = Draw::new(args)?;
    for _ in 0..samples {
        let p = draw.next()?;
        counts[index[&p.to_string()]] += 1;
    }
    let c = chi_square_uniform(&counts);
    let pass = c.passes(alpha);
    let verdict = if pass { "pass" } else { "fail" };
    match format {
        Format::Text => writeln!(
            out,
            "chi2 n={} k={} method={} samples={samples} statistic={:.3} dof={} p_value={:.4} \
             alpha={alpha} result={verdict}",
            args.n,
            args.k,
            args.method.name(),
            c.statistic,
            c.dof,
            c.p_value
        )?,
        Format::Json => writeln!(
            out,
            "{}",
            json!({
                "n": args.n,
                "k": args.k,
                "method": args.method.name(),
                "samples": samples,
                "seed": args.seed,
                "statistic": c.statistic,
                "dof": c.dof,
                "p_value": c.p_value,
                "alpha": alpha,
                "pass": pass,
            })
        )?,
    }
    Ok(if pass {
        Status::Ok
    } else {
        Status::VerificationFailed
    })
}

/// One CSV row of `bench`.
#[derive(Serialize)]
struct BenchRow {
    n: u64,
    method: &'static str,
    wall_seconds: f64,
    random_bits: u64,
    digit_queries: u64,
    escalations: u64,
    fallbacks: u64,
}

fn bench_once(n: u64, method: Method, seed: u64) -> Result<BenchRow> {
    let args = SamplerArgs {
        n,
        k: n / 2,
        method,
        s_max: OracleConfig::default().s_max,
        seed,
    };
    let mut draw = Draw::new(&args)?;
    let t = Instant::now();
    draw.next()?;
    let wall_seconds = t.elapsed().as_secs_f64();
    let c = draw.finish();
    Ok(BenchRow {
        n,
        method: method.name(),
        wall_seconds,
        random_bits: c.random_bits,
        digit_queries: c.digit_queries,
        escalations: c.escalations_at_least(2),
        fallbacks: c.exact_fallbacks,
    })
}

fn bench(
    format: Format,
    sizes: &[u64],
    methods: &[Method],
    runs: u64,
    seed: u64,
    jobs: usize,
    out: &mut dyn Write,
) -> Result<Status> {
    if let Some(n) = sizes.iter().find(|&&n| n < 2) {
        bail!("bench sizes must be at least 2, got {n}");
    }
    let work: Vec<(u64, Method, u64)> = sizes
        .iter()
        .flat_map(|&n| {
            methods
                .iter()
                .flat_map(move |&m| (0..runs).map(move |r| (n, m, seed + r)))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()?;
    let rows: Vec<BenchRow> = pool.install(|| {
        work.par_iter()
            .map(|&(n, m, s)| bench_once(n, m, s))
            .collect::<Result<_>>()
    })?;
    match format {
        Format::Text => {
            let mut w = csv::Writer::from_writer(out);
            for r in &rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Json => {
            for r in &rows {
                writeln!(out, "{}", serde_json::to_string(r)?)?;
            }
        }
    }
    Ok(Status::Ok)
}

fn dump_tables(format: Format, s_max: usize, out: &mut dyn Write) -> Result<Status> {
    if s_max < 3 {
        bail!("--s-max must be at least 3");
    }
    let b = format_b_table(s_max);
    let a = format_a_table(s_max);
    let tables = CombinatoricsTables::shared().dump();
    match format {
        Format::Text => {
            writeln!(out, "# b in terms of a")?;
            for l in &b {
                writeln!(out, "{l}")?;
            }
            writeln!(out, "# a in terms of b")?;
            for l in &a {
                writeln!(out, "{l}")?;
            }
            writeln!(out, "# Eulerian numbers and Bernoulli numbers")?;
            write!(out, "{tables}")?;
        }
        Format::Json => {
            for (table, lines) in [("b", &b), ("a", &a)] {
                for l in lines {
                    writeln!(out, "{}", json!({ "table": table, "line": l }))?;
                }
            }
            for l in tables.lines() {
                writeln!(out, "{}", json!({ "table": "combinatorics", "line": l }))?;
            }
        }
    }
    Ok(Status::Ok)
}
