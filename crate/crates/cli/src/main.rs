//! `setpart`: sample set partitions, check the oracle, benchmark.

mod commands;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "setpart",
    version,
    about = "Exact uniform set partitions with k blocks"
)]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    /// One JSON object per line.
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Hybrid,
    Exact,
    Boltzmann,
    EasyColoring,
    EasyForest,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Hybrid => "hybrid",
            Method::Exact => "exact",
            Method::Boltzmann => "boltzmann",
            Method::EasyColoring => "easy-coloring",
            Method::EasyForest => "easy-forest",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SamplerArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub k: u64,
    #[arg(long, value_enum, default_value_t = Method::Hybrid)]
    pub method: Method,
    /// Highest oracle level before the exact fallback.
    #[arg(long, default_value_t = 3)]
    pub s_max: u32,
    /// Random seed.
    #[arg(long, env = "SETPART_SEED", default_value_t = 1)]
    pub seed: u64,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Draw uniform partitions of {1..n} into k blocks.
    Sample {
        #[command(flatten)]
        sampler: SamplerArgs,
        #[arg(long, default_value_t = 1)]
        samples: u64,
    },
    /// Draw uniform monotone lattice paths to (n, m).
    Walk {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        m: u64,
        #[arg(long, default_value_t = 1)]
        samples: u64,
        #[arg(long, env = "SETPART_SEED", default_value_t = 1)]
        seed: u64,
    },
    /// Check every oracle enclosure against the exact ratio for
    /// 2 <= k < n <= n-max.
    VerifyBounds {
        #[arg(long, default_value_t = 200)]
        n_max: u64,
        #[arg(long, default_value_t = 3)]
        s_max: u32,
    },
    /// Chi-square test of a sampler against the uniform law.
    Chi2 {
        #[command(flatten)]
        sampler: SamplerArgs,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        /// Significance level.
        #[arg(long, default_value_t = 1e-3)]
        alpha: f64,
    },
    /// Cost of single runs at (N, N/2), as CSV.
    Bench {
        /// Comma-separated sizes.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1_000u64, 10_000])]
        sizes: Vec<u64>,
        /// Comma-separated methods.
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![Method::Hybrid, Method::Boltzmann])]
        methods: Vec<Method>,
        /// Runs per (size, method); seeds are seed, seed+1, ...
        #[arg(long, default_value_t = 3)]
        runs: u64,
        #[arg(long, env = "SETPART_SEED", default_value_t = 1)]
        seed: u64,
        /// Worker threads for independent runs.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Print the coefficient tables and the Eulerian and Bernoulli tables.
    DumpTables {
        /// Largest coefficient index.
        #[arg(long, default_value_t = 7)]
        s_max: usize,
    },
}

/// Exit status of a command that ran to completion.
#[derive(Debug, PartialEq, Eq)]
pub enum Status {
    Ok,
    VerificationFailed,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let out: Box<dyn Write> = match &cli.output {
        Some(p) => match File::create(p) {
            Ok(f) => Box::new(BufWriter::new(f)),
            Err(e) => {
                eprintln!("error: cannot open {}: {e}", p.display());
                return ExitCode::from(1);
            }
        },
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match commands::run(&cli, out) {
        Ok(Status::Ok) => ExitCode::SUCCESS,
        Ok(Status::VerificationFailed) => ExitCode::from(2),
        Err(e)
            if e.chain().any(|c| {
                c.downcast_ref::<io::Error>()
                    .is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
            }) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
