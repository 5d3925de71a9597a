use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DVector;

/// Exponent multi-index `x_1^{e_1} ⋯ x_n^{e_n}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        Self(exponents)
    }

    pub fn one(n: usize) -> Self {
        Self(vec![0; n])
    }

    /// The coordinate `x_i` (0-based).
    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_constant(&self) -> bool {
        self.degree() == 0
    }

    /// True when a single variable carries the whole degree.
    pub fn is_pure_power(&self) -> bool {
        self.0.iter().filter(|&&e| e > 0).count() == 1
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(x)
            .fold(1.0, |acc, (&e, &xi)| acc * xi.powi(e as i32))
    }

    fn times(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "x{}^{}", i + 1, e)?;
            }
        }
        if first {
            f.write_str("1")?;
        }
        Ok(())
    }
}

/// Ordering of the monomial basis of a Carleman state.
///
/// Both orders are graded (total degree ascending). Within a degree:
/// - `GradedLex` sorts by exponent vector descending, so for two variables
///   degree 2 reads `x1^2, x1*x2, x2^2`;
/// - `PowersFirst` lists pure powers `x1^k, x2^k, …` first, then the mixed
///   monomials in graded-lex order, giving `x1^2, x2^2, x1*x2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MonomialOrdering {
    GradedLex,
    #[default]
    PowersFirst,
}

impl MonomialOrdering {
    pub fn name(self) -> &'static str {
        match self {
            MonomialOrdering::GradedLex => "graded-lex",
            MonomialOrdering::PowersFirst => "graded-powers-first",
        }
    }

    fn sort(self, monomials: &mut [Monomial]) {
        match self {
            MonomialOrdering::GradedLex => monomials.sort_by(|a, b| {
                a.degree().cmp(&b.degree()).then_with(|| b.0.cmp(&a.0))
            }),
            MonomialOrdering::PowersFirst => monomials.sort_by(|a, b| {
                a.degree()
                    .cmp(&b.degree())
                    .then_with(|| b.is_pure_power().cmp(&a.is_pure_power()))
                    .then_with(|| b.0.cmp(&a.0))
            }),
        }
    }
}

/// All monomials in `n` variables of total degree `1..=max_degree`.
pub fn monomials_up_to(n: usize, max_degree: u32, ordering: MonomialOrdering) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut current = vec![0u32; n];
    fn rec(i: usize, remaining: u32, current: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if i == current.len() {
            if current.iter().any(|&e| e > 0) {
                out.push(Monomial(current.clone()));
            }
            return;
        }
        for e in 0..=remaining {
            current[i] = e;
            rec(i + 1, remaining - e, current, out);
        }
        current[i] = 0;
    }
    if n > 0 {
        rec(0, max_degree, &mut current, &mut out);
    }
    ordering.sort(&mut out);
    out
}

/// Sparse polynomial over `n` real variables.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: f64) -> Self {
        Self::term(Monomial::one(nvars), c)
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Self::term(Monomial::var(nvars, i), 1.0)
    }

    pub fn term(m: Monomial, coefficient: f64) -> Self {
        let mut p = Self::zero(m.nvars());
        p.add_term(m, coefficient);
        p
    }

    /// Builds from `(exponents, coefficient)` pairs.
    pub fn from_terms(nvars: usize, terms: &[(&[u32], f64)]) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent length must equal nvars");
            p.add_term(Monomial(e.to_vec()), *c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn add_term(&mut self, m: Monomial, coefficient: f64) {
        debug_assert_eq!(m.nvars(), self.nvars);
        if coefficient == 0.0 {
            return;
        }
        let entry = self.terms.entry(m).or_insert(0.0);
        *entry += coefficient;
        if *entry == 0.0 {
            self.terms.retain(|_, c| *c != 0.0);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, f64)> {
        self.terms.iter().map(|(m, c)| (m, *c))
    }

    pub fn coefficient(&self, m: &Monomial) -> f64 {
        self.terms.get(m).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn constant_term(&self) -> f64 {
        self.coefficient(&Monomial::one(self.nvars))
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        let mut p = Self::zero(self.nvars);
        for (m, c) in self.terms() {
            p.add_term(m.clone(), c * s);
        }
        p
    }

    /// `∂p/∂x_i`.
    pub fn derivative(&self, i: usize) -> Polynomial {
        let mut p = Self::zero(self.nvars);
        for (m, c) in self.terms() {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let mut d = m.0.clone();
            d[i] -= 1;
            p.add_term(Monomial(d), c * e as f64);
        }
        p
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms().map(|(m, c)| c * m.eval(x)).sum()
    }

    pub fn eval_vec(&self, x: &DVector<f64>) -> f64 {
        self.eval(x.as_slice())
    }

    /// Fixes the trailing `values.len()` variables, leaving a polynomial in
    /// the leading `nvars - values.len()` ones.
    pub fn fix_trailing(&self, values: &[f64]) -> Polynomial {
        let keep = self.nvars - values.len();
        let mut p = Self::zero(keep);
        for (m, c) in self.terms() {
            let factor = m.0[keep..]
                .iter()
                .zip(values)
                .fold(1.0, |acc, (&e, &v)| acc * v.powi(e as i32));
            p.add_term(Monomial(m.0[..keep].to_vec()), c * factor);
        }
        p
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}*{m}")?;
        }
        Ok(())
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut p = self.clone();
        for (m, c) in rhs.terms() {
            p.add_term(m.clone(), c);
        }
        p
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut p = self.clone();
        for (m, c) in rhs.terms() {
            p.add_term(m.clone(), -c);
        }
        p
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-1.0)
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut p = Polynomial::zero(self.nvars);
        for (ma, ca) in self.terms() {
            for (mb, cb) in rhs.terms() {
                p.add_term(ma.times(mb), ca * cb);
            }
        }
        p
    }
}
