//! Triangular solves of `S(x(y)) = y²` for `x(y) = y + a₂y² + …` and
//! `S(x) = x² + b₃x³ + …`.
//!
//! The coefficient `[y^k] S(x(y))` equals `2a_{k-1} + b_k` plus terms in
//! lower-index unknowns, so both directions are solved one index at a time.

use rug::{Integer, Rational};

use super::{Coeff, MultiPoly, TruncatedSeries};

/// `[y^k] S(x(y))` for `x = y + Σ a_j y^j` (`a[0] = a₂`) and
/// `S = x² + Σ b_j x^j` (`b[0] = b₃`), computed modulo `y^{k+1}`.
fn coefficient<C: Coeff>(a: &[C], b: &[C], k: usize, like: &C) -> C {
    let mut x = TruncatedSeries::variable(k, like);
    for (i, c) in a.iter().enumerate() {
        let j = i + 2;
        if j <= k {
            x.set_coeff(j, c.clone());
        }
    }
    let mut s = TruncatedSeries::zero(k, like);
    if k >= 2 {
        s.set_coeff(2, like.one_like());
    }
    for (i, c) in b.iter().enumerate() {
        let j = i + 3;
        if j <= k {
            s.set_coeff(j, c.clone());
        }
    }
    s.compose(&x).coeff(k).clone()
}

/// Given `b₃, …, b_{s+1}`, the unique `a₂, …, a_s` with
/// `[y^k] S(x(y)) = 0` for `3 <= k <= s+1`.
pub fn solve_a_from_b<C: Coeff>(b: &[C]) -> Vec<C> {
    let Some(like) = b.first() else {
        return Vec::new();
    };
    let s = b.len() + 1;
    let mut a: Vec<C> = Vec::with_capacity(s - 1);
    for k in 3..=s + 1 {
        let mut trial = a.clone();
        trial.push(like.zero_like());
        let c = coefficient(&trial, &b[..k - 2], k, like);
        a.push(c.neg().div_int(2));
    }
    a
}

/// Given `a₂, …, a_{s-1}`, the unique `b₃, …, b_s` with
/// `[y^k] S(x(y)) = 0` for `3 <= k <= s`.
pub fn solve_b_from_a<C: Coeff>(a: &[C]) -> Vec<C> {
    let Some(like) = a.first() else {
        return Vec::new();
    };
    let s = a.len() + 2;
    let mut b: Vec<C> = Vec::with_capacity(s - 2);
    for k in 3..=s {
        let mut trial = b.clone();
        trial.push(like.zero_like());
        let c = coefficient(a, &trial, k, like);
        b.push(c.neg());
    }
    b
}

/// `b₃..b_s` as polynomials in `a₂..a_{s-1}`.
pub fn symbolic_b(s: usize) -> Vec<MultiPoly> {
    assert!(s >= 3);
    let n = s - 2;
    let a: Vec<MultiPoly> = (0..n).map(|i| MultiPoly::var(n, i)).collect();
    solve_b_from_a(&a)
}

/// `a₂..a_s` as polynomials in `b₃..b_{s+1}`.
pub fn symbolic_a(s: usize) -> Vec<MultiPoly> {
    assert!(s >= 2);
    let n = s - 1;
    let b: Vec<MultiPoly> = (0..n).map(|i| MultiPoly::var(n, i)).collect();
    solve_a_from_b(&b)
}

/// Lines `b_k = …` for `3 <= k <= s`.
pub fn format_b_table(s: usize) -> Vec<String> {
    symbolic_b(s)
        .iter()
        .enumerate()
        .map(|(i, p)| format!("b_{} = {}", i + 3, p.format("a", 2)))
        .collect()
}

fn multiplier(m: &Integer) -> String {
    if *m == 1 {
        return String::new();
    }
    if m.is_power_of_two() {
        let e = m.significant_bits() - 1;
        if e == 1 {
            "2 ".to_string()
        } else {
            format!("2^{e} ")
        }
    } else {
        format!("{m} ")
    }
}

/// Lines `2^e a_k = …` (denominators cleared) for `2 <= k <= s`.
pub fn format_a_table(s: usize) -> Vec<String> {
    symbolic_a(s)
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let m = p.denominator_lcm();
            let scaled = p.scale(&Rational::from(m.clone()));
            format!("{}a_{} = {}", multiplier(&m), i + 2, scaled.format("b", 3))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    #[test]
    fn b_from_unit_a2() {
        let mut a = vec![q(1, 1)];
        a.extend((0..4).map(|_| q(0, 1)));
        let b = solve_b_from_a(&a);
        assert_eq!(b, vec![q(-2, 1), q(5, 1), q(-14, 1), q(42, 1), q(-132, 1)]);
    }

    #[test]
    fn a_from_unit_b3() {
        let mut b = vec![q(1, 1)];
        b.extend((0..3).map(|_| q(0, 1)));
        let a = solve_a_from_b(&b);
        assert_eq!(a, vec![q(-1, 2), q(5, 8), q(-1, 1), q(231, 128)]);
    }

    #[test]
    fn zero_inputs_give_zero() {
        let z = vec![q(0, 1); 5];
        assert!(solve_b_from_a(&z).iter().all(|c| *c == 0));
        assert!(solve_a_from_b(&z).iter().all(|c| *c == 0));
    }

    #[test]
    fn printed_leading_rows() {
        let b = format_b_table(5);
        assert_eq!(b[0], "b_3 = -2 a_2");
        assert_eq!(b[1], "b_4 = 5 a_2^2 - 2 a_3");
        let a = format_a_table(3);
        assert_eq!(a[0], "2 a_2 = -b_3");
        assert_eq!(a[1], "2^3 a_3 = 5 b_3^2 - 4 b_4");
    }
}
