//! Sparse Laurent polynomials with exact rational coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::IVec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LaurentError {
    #[error("quotient is not a Laurent polynomial")]
    NotLaurent,
    #[error("division by the zero polynomial")]
    DivisionByZeroPolynomial,
    #[error("variable count mismatch: {0} vs {1}")]
    VariableMismatch(usize, usize),
}

#[derive(Clone, Debug)]
pub struct LaurentPolynomial {
    n_vars: usize,
    terms: BTreeMap<IVec, BigRational>,
    names: Vec<String>,
}

impl PartialEq for LaurentPolynomial {
    fn eq(&self, other: &Self) -> bool {
        self.n_vars == other.n_vars && self.terms == other.terms
    }
}

impl Eq for LaurentPolynomial {}

fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

impl LaurentPolynomial {
    pub fn zero(n_vars: usize) -> Self {
        LaurentPolynomial { n_vars, terms: BTreeMap::new(), names: default_names(n_vars) }
    }

    pub fn constant(n_vars: usize, c: BigRational) -> Self {
        Self::monomial(vec![0; n_vars], c)
    }

    pub fn one(n_vars: usize) -> Self {
        Self::constant(n_vars, BigRational::one())
    }

    pub fn monomial(exp: IVec, c: BigRational) -> Self {
        let mut p = Self::zero(exp.len());
        if !c.is_zero() {
            p.terms.insert(exp, c);
        }
        p
    }

    /// The `i`-th variable (0-based).
    pub fn var(n_vars: usize, i: usize) -> Self {
        let mut e = vec![0; n_vars];
        e[i] = 1;
        Self::monomial(e, BigRational::one())
    }

    /// Builds from `(exponent, coefficient)` pairs, summing repeats.
    pub fn from_terms<I: IntoIterator<Item = (IVec, BigRational)>>(n_vars: usize, it: I) -> Self {
        let mut p = Self::zero(n_vars);
        for (e, c) in it {
            assert_eq!(e.len(), n_vars, "exponent length");
            p.add_term(e, c);
        }
        p
    }

    /// Integer coefficients.
    pub fn from_int_terms(n_vars: usize, terms: &[(IVec, i64)]) -> Self {
        Self::from_terms(n_vars, terms.iter().map(|(e, c)| (e.clone(), BigRational::from_integer((*c).into()))))
    }

    pub fn with_names(mut self, names: Vec<String>) -> Self {
        assert_eq!(names.len(), self.n_vars, "one name per variable");
        self.names = names;
        self
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn terms(&self) -> &BTreeMap<IVec, BigRational> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &[i64]) -> BigRational {
        self.terms.get(e).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn constant_term(&self) -> BigRational {
        self.coeff(&vec![0; self.n_vars])
    }

    fn add_term(&mut self, e: IVec, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn check(&self, other: &Self) {
        assert_eq!(self.n_vars, other.n_vars, "variable count mismatch");
    }

    pub fn add(&self, other: &Self) -> Self {
        self.check(other);
        let mut p = self.clone();
        for (e, c) in &other.terms {
            p.add_term(e.clone(), c.clone());
        }
        p
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        let mut p = Self::zero(self.n_vars);
        p.names = self.names.clone();
        if !c.is_zero() {
            p.terms = self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect();
        }
        p
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.check(other);
        let mut p = Self::zero(self.n_vars);
        p.names = self.names.clone();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: IVec = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                p.add_term(e, c1 * c2);
            }
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut out = Self::one(self.n_vars);
        out.names = self.names.clone();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                out = out.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// Multiplies by the monomial `x^e`.
    pub fn shift(&self, e: &[i64]) -> Self {
        let mut p = self.clone();
        p.terms = self.terms.iter().map(|(m, c)| (m.iter().zip(e).map(|(a, b)| a + b).collect(), c.clone())).collect();
        p
    }

    /// Componentwise minimum exponent (zero vector for the zero polynomial).
    pub fn min_exponents(&self) -> IVec {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else { return vec![0; self.n_vars] };
        let mut m = first.clone();
        for e in it {
            for (a, b) in m.iter_mut().zip(e) {
                *a = (*a).min(*b);
            }
        }
        m
    }

    /// Exact quotient `self / d`, or `NotLaurent` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Self) -> Result<Self, LaurentError> {
        if self.n_vars != d.n_vars {
            return Err(LaurentError::VariableMismatch(self.n_vars, d.n_vars));
        }
        if d.is_zero() {
            return Err(LaurentError::DivisionByZeroPolynomial);
        }
        if self.is_zero() {
            return Ok(Self::zero(self.n_vars).with_names(self.names.clone()));
        }
        let ms = self.min_exponents();
        let md = d.min_exponents();
        let neg = |v: &IVec| v.iter().map(|x| -x).collect::<IVec>();
        let num = self.shift(&neg(&ms));
        let den = d.shift(&neg(&md));
        // both are now polynomials with no monomial factor; lex leading-term division
        let (lt_e, lt_c) = den.terms.iter().next_back().map(|(e, c)| (e.clone(), c.clone())).expect("nonzero");
        let mut rem = num;
        let mut quot = Self::zero(self.n_vars);
        while let Some((e, c)) = rem.terms.iter().next_back().map(|(e, c)| (e.clone(), c.clone())) {
            let qe: IVec = e.iter().zip(&lt_e).map(|(a, b)| a - b).collect();
            if qe.iter().any(|&x| x < 0) {
                return Err(LaurentError::NotLaurent);
            }
            let qc = c / &lt_c;
            let t = Self::monomial(qe.clone(), qc.clone());
            rem = rem.sub(&den.mul(&t));
            quot.add_term(qe, qc);
        }
        let shift: IVec = ms.iter().zip(&md).map(|(a, b)| a - b).collect();
        Ok(quot.shift(&shift).with_names(self.names.clone()))
    }

    /// Applies the integer matrix `a` to exponents: `x^e -> x^(a e)`.
    pub fn monomial_map(&self, a: &[IVec]) -> Self {
        let n = a.len();
        let mut p = Self::zero(n);
        for (e, c) in &self.terms {
            let img: IVec = a.iter().map(|row| row.iter().zip(e).map(|(x, y)| x * y).sum()).collect();
            p.add_term(img, c.clone());
        }
        p
    }

    /// Whether every coefficient is an integer.
    pub fn is_integral(&self) -> bool {
        self.terms.values().all(|c| c.is_integer())
    }
}

impl fmt::Display for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (e, c)) in self.terms.iter().enumerate() {
            let (sign, mag) = if c.is_negative() { ("-", -c.clone()) } else { ("+", c.clone()) };
            if k == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            let mono: Vec<String> = e
                .iter()
                .zip(&self.names)
                .filter(|(x, _)| **x != 0)
                .map(|(x, n)| if *x == 1 { n.clone() } else { format!("{n}^{x}") })
                .collect();
            if mono.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{mag}*{}", mono.join("*"))?;
            }
        }
        Ok(())
    }
}

/// Rational map on the torus: variable `i` of the source is replaced by `num[i] / den[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Mutation {
    pub n_vars: usize,
    pub num: Vec<LaurentPolynomial>,
    pub den: Vec<LaurentPolynomial>,
    /// Optional inverse, used to certify birationality.
    pub inverse: Option<Box<Mutation>>,
}

impl Mutation {
    pub fn new(num: Vec<LaurentPolynomial>, den: Vec<LaurentPolynomial>) -> Self {
        assert_eq!(num.len(), den.len(), "one numerator per denominator");
        let n_vars = num.first().map_or(0, LaurentPolynomial::n_vars);
        Mutation { n_vars, num, den, inverse: None }
    }

    pub fn identity(n: usize) -> Self {
        Self::new((0..n).map(|i| LaurentPolynomial::var(n, i)).collect(), vec![LaurentPolynomial::one(n); n])
    }

    /// `x_i -> x^(column i of a)`, a lattice automorphism when `a` is unimodular.
    pub fn monomial(a: &[IVec]) -> Self {
        let n = a.len();
        let num = (0..n).map(|i| LaurentPolynomial::monomial(a.iter().map(|row| row[i]).collect(), BigRational::one())).collect();
        Self::new(num, vec![LaurentPolynomial::one(n); n])
    }

    pub fn with_inverse(mut self, inv: Mutation) -> Self {
        self.inverse = Some(Box::new(inv));
        self
    }

    /// Checks `inverse ∘ self = id` on every coordinate; `None` when no inverse is attached.
    pub fn verify_inverse(&self) -> Option<bool> {
        let inv = self.inverse.as_ref()?;
        for i in 0..inv.num.len() {
            let (p1, q1) = pullback(&inv.num[i], self);
            let (p2, q2) = pullback(&inv.den[i], self);
            let xi = LaurentPolynomial::var(self.n_vars, i);
            if p1.mul(&q2) != xi.mul(&q1).mul(&p2) {
                return Some(false);
            }
        }
        Some(true)
    }
}

/// `f ∘ φ` as a fraction `(P, Q)` with a common denominator.
pub fn pullback(f: &LaurentPolynomial, phi: &Mutation) -> (LaurentPolynomial, LaurentPolynomial) {
    assert_eq!(f.n_vars(), phi.num.len(), "mutation arity");
    let n = f.n_vars();
    let m = phi.n_vars;
    let mut hi = vec![0i64; n];
    let mut lo = vec![0i64; n];
    for e in f.terms.keys() {
        for i in 0..n {
            hi[i] = hi[i].max(e[i]);
            lo[i] = lo[i].max(-e[i]);
        }
    }
    let mut q = LaurentPolynomial::one(m);
    for i in 0..n {
        q = q.mul(&phi.den[i].pow(hi[i] as u32)).mul(&phi.num[i].pow(lo[i] as u32));
    }
    let mut p = LaurentPolynomial::zero(m);
    for (e, c) in &f.terms {
        let mut t = LaurentPolynomial::constant(m, c.clone());
        for i in 0..n {
            t = t.mul(&phi.num[i].pow((e[i] + lo[i]) as u32)).mul(&phi.den[i].pow((hi[i] - e[i]) as u32));
        }
        p = p.add(&t);
    }
    (p, q)
}

/// Pullback of `f` along `phi`, required to be a Laurent polynomial.
pub fn apply_mutation(f: &LaurentPolynomial, phi: &Mutation) -> Result<LaurentPolynomial, LaurentError> {
    if phi.num.len() != f.n_vars() {
        return Err(LaurentError::VariableMismatch(f.n_vars(), phi.num.len()));
    }
    if phi.num.iter().chain(&phi.den).any(LaurentPolynomial::is_zero) {
        return Err(LaurentError::DivisionByZeroPolynomial);
    }
    let (p, q) = pullback(f, phi);
    p.div_exact(&q)
}

#[cfg(test)]
pub(crate) fn int(c: i64) -> BigRational {
    BigRational::from_integer(num_bigint::BigInt::from(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(n: usize, t: &[(IVec, i64)]) -> LaurentPolynomial {
        LaurentPolynomial::from_int_terms(n, t)
    }

    #[test]
    fn arithmetic_and_constant_term() {
        let f = p(1, &[(vec![1], 1), (vec![-1], 1)]);
        let f2 = f.pow(2);
        assert_eq!(f2, p(1, &[(vec![2], 1), (vec![0], 2), (vec![-2], 1)]));
        assert_eq!(f.pow(4).constant_term(), int(6));
        assert!(f.sub(&f).is_zero());
    }

    #[test]
    fn exact_division() {
        let a = p(2, &[(vec![1, 0], 1), (vec![0, 1], 1)]);
        let b = p(2, &[(vec![1, 0], 1), (vec![0, 0], -1)]).shift(&[0, -3]);
        let prod = a.mul(&b);
        assert_eq!(prod.div_exact(&a).unwrap(), b);
        assert_eq!(prod.div_exact(&b).unwrap(), a);
        let c = p(2, &[(vec![1, 0], 1), (vec![0, 0], 1)]);
        assert_eq!(prod.div_exact(&c), Err(LaurentError::NotLaurent));
        assert_eq!(a.div_exact(&LaurentPolynomial::zero(2)), Err(LaurentError::DivisionByZeroPolynomial));
    }

    #[test]
    fn identity_and_monomial_mutations() {
        let f = p(2, &[(vec![1, 0], 2), (vec![-1, 1], 3), (vec![0, -1], 1)]);
        assert_eq!(apply_mutation(&f, &Mutation::identity(2)).unwrap(), f);
        let a = vec![vec![1, 1], vec![0, 1]];
        let g = apply_mutation(&f, &Mutation::monomial(&a)).unwrap();
        assert_eq!(g, f.monomial_map(&a));
        let inv = vec![vec![1, -1], vec![0, 1]];
        let m = Mutation::monomial(&a).with_inverse(Mutation::monomial(&inv));
        assert_eq!(m.verify_inverse(), Some(true));
    }

    #[test]
    fn display() {
        let f = p(2, &[(vec![1, 0], 1), (vec![0, -1], -3), (vec![0, 0], 2)]).with_names(vec!["x".into(), "y".into()]);
        assert_eq!(f.to_string(), "-3*y^-1 + 2 + x");
    }

    proptest! {
        #[test]
        fn division_inverts_multiplication(
            a in prop::collection::vec((prop::collection::vec(-2i64..=2, 2), -3i64..=3), 1..5),
            b in prop::collection::vec((prop::collection::vec(-2i64..=2, 2), -3i64..=3), 1..5),
        ) {
            let pa = p(2, &a);
            let pb = p(2, &b);
            prop_assume!(!pa.is_zero() && !pb.is_zero());
            prop_assert_eq!(pa.mul(&pb).div_exact(&pb).unwrap(), pa);
        }
    }
}
