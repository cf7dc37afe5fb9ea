use proptest::prelude::*;
use rug::Rational;
use setpart::action::{solve_saddle, SaddleTarget};
use setpart::sampler::{stirling_exact, StirlingOracleExact};
use setpart::{BoundRequest, Error, Oracle, OracleConfig, ProblemSize};

fn exact_ratio(n: u64, k: u64) -> Rational {
    Rational::from((stirling_exact(n - 1, k - 1), stirling_exact(n, k)))
}

#[test]
fn exact_oracle_agrees_with_table_ratio() {
    for (n, k) in [(5, 2), (30, 11), (300, 150), (400, 397)] {
        let p = StirlingOracleExact.branch_probability(ProblemSize::new(n, k).unwrap());
        assert_eq!(p, exact_ratio(n, k), "({n},{k})");
    }
}

#[test]
fn enclosures_at_moderate_sizes() {
    let mut oracle = Oracle::new(OracleConfig::default());
    for (n, k) in [
        (1_000u64, 500u64),
        (1_000, 700),
        (1_500, 100),
        (2_000, 1_000),
    ] {
        let size = ProblemSize::new(n, k).unwrap();
        let p = exact_ratio(n, k);
        let saddle = solve_saddle(size, SaddleTarget::Integral, None);
        let mut last = f64::INFINITY;
        for level in 1..=3 {
            let pair = oracle
                .build(&BoundRequest {
                    size,
                    level,
                    saddle: &saddle,
                })
                .unwrap_or_else(|e| panic!("({n},{k}) level {level}: {e}"));
            assert!(pair.contains(&p), "({n},{k}) level {level}");
            let w = pair.width_f64();
            assert!(w < last, "({n},{k}) level {level}: {w} vs {last}");
            last = w;
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn level_one_contains_exact_ratio(n in 3u64..600, frac in 0.0f64..1.0) {
        let k = 2 + ((n - 3) as f64 * frac) as u64;
        let size = ProblemSize::new(n, k).unwrap();
        let saddle = solve_saddle(size, SaddleTarget::Integral, None);
        let req = BoundRequest { size, level: 1, saddle: &saddle };
        match Oracle::new(OracleConfig::default()).build(&req) {
            Ok(pair) => prop_assert!(pair.contains(&exact_ratio(n, k))),
            Err(Error::Escalate(_)) => {}
            Err(e) => prop_assert!(false, "({}, {}): {}", n, k, e),
        }
    }
}
