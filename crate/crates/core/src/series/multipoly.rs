use std::collections::BTreeMap;

use rug::{Integer, Rational};

use super::Coeff;

/// Polynomial with rational coefficients in the variables
/// `x_{first}, x_{first+1}, …, x_{first+nvars-1}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> MultiPoly {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> MultiPoly {
        let mut p = MultiPoly::zero(nvars);
        if c != 0 {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    /// The `i`-th variable (0-based).
    pub fn var(nvars: usize, i: usize) -> MultiPoly {
        let mut e = vec![0; nvars];
        e[i] = 1;
        let mut p = MultiPoly::zero(nvars);
        p.terms.insert(e, Rational::from(1));
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the monomial with exponent vector `exps`.
    pub fn coeff(&self, exps: &[u32]) -> Rational {
        self.terms.get(exps).cloned().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    fn insert_add(&mut self, e: Vec<u32>, c: Rational) {
        if c == 0 {
            return;
        }
        let vanished = {
            let entry = self.terms.entry(e.clone()).or_default();
            *entry += c;
            *entry == 0
        };
        if vanished {
            self.terms.remove(&e);
        }
    }

    pub fn scale(&self, c: &Rational) -> MultiPoly {
        let mut p = MultiPoly::zero(self.nvars);
        for (e, v) in &self.terms {
            p.insert_add(e.clone(), Rational::from(v * c));
        }
        p
    }

    /// Evaluate at rational values of the variables.
    pub fn eval(&self, vals: &[Rational]) -> Rational {
        assert_eq!(vals.len(), self.nvars);
        let mut acc = Rational::new();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (v, &k) in vals.iter().zip(e) {
                for _ in 0..k {
                    t *= v;
                }
            }
            acc += t;
        }
        acc
    }

    /// Least common multiple of the coefficient denominators.
    pub fn denominator_lcm(&self) -> Integer {
        let mut l = Integer::from(1);
        for c in self.terms.values() {
            l = l.lcm(c.denom());
        }
        l
    }

    /// Render with variable names `{name}_{first + i}`, monomials ordered so
    /// that the highest-index variable is most significant (ascending).
    pub fn format(&self, name: &str, first: usize) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut keys: Vec<&Vec<u32>> = self.terms.keys().collect();
        keys.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
        let mut out = String::new();
        for (idx, e) in keys.into_iter().enumerate() {
            let c = &self.terms[e];
            let neg = *c < 0;
            let mag = Rational::from(c.abs_ref());
            let mono: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| {
                    if k == 1 {
                        format!("{name}_{}", first + i)
                    } else {
                        format!("{name}_{}^{k}", first + i)
                    }
                })
                .collect();
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            let show_coeff = mag != 1 || mono.is_empty();
            if show_coeff {
                out.push_str(&mag.to_string());
                if !mono.is_empty() {
                    out.push(' ');
                }
            }
            out.push_str(&mono.join(" "));
        }
        out
    }
}

impl Coeff for MultiPoly {
    fn zero_like(&self) -> Self {
        MultiPoly::zero(self.nvars)
    }
    fn one_like(&self) -> Self {
        MultiPoly::constant(self.nvars, Rational::from(1))
    }
    fn add(&self, o: &Self) -> Self {
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.insert_add(e.clone(), c.clone());
        }
        p
    }
    fn sub(&self, o: &Self) -> Self {
        let mut p = self.clone();
        for (e, c) in &o.terms {
            p.insert_add(e.clone(), Rational::from(-c));
        }
        p
    }
    fn mul(&self, o: &Self) -> Self {
        let mut p = MultiPoly::zero(self.nvars);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.insert_add(e, Rational::from(c1 * c2));
            }
        }
        p
    }
    fn neg(&self) -> Self {
        self.scale(&Rational::from(-1))
    }
    fn mul_int(&self, k: i64) -> Self {
        self.scale(&Rational::from(k))
    }
    fn div_int(&self, k: i64) -> Self {
        self.scale(&Rational::from((1, k)))
    }
    fn is_zero_exact(&self) -> bool {
        self.terms.is_empty()
    }
}
