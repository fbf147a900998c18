//! Period sequences, differential operators in `D = t d/dt` and exact operator fitting.

mod expand;
mod fit;
mod operator;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

pub use expand::{period_coeffs, period_coeffs_naive, period_coeffs_with_budget, DEFAULT_POINT_BUDGET};
pub use fit::{fit_operator, fit_operator_within, FitResult};
pub use operator::{recurrence_extend, DiffOperator};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PeriodError {
    #[error("expansion needs more than {budget} stored lattice points")]
    OutOfBudget { points: usize, budget: usize },
    #[error("seed violates the recurrence at index {index}")]
    SeedInconsistent { index: usize },
    #[error("recurrence is singular at index {index}: the new term has coefficient zero")]
    SingularRecursion { index: usize },
    #[error("no operator with order <= {max_order} and degree <= {max_degree} annihilates the sequence")]
    NoOperatorFound { max_order: usize, max_degree: usize },
    #[error("fitting needs at least {need} coefficients, have {have}")]
    TooFewForFit { have: usize, need: usize },
    #[error("bucketing needs {need} coefficients, sequence {index} has {have}")]
    TooFewTerms { index: usize, have: usize, need: usize },
    #[error("sequence {index} does not start with 1")]
    NotNormalized { index: usize },
    #[error("the zero operator")]
    ZeroOperator,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    DirectExpansion,
    RecurrenceExtended,
    ClosedForm,
    Supplied,
}

/// Exact coefficients `alpha_0, alpha_1, ...` of a period.
#[derive(Clone, Debug)]
pub struct PeriodSequence {
    pub coeffs: Vec<BigRational>,
    pub provenance: Provenance,
}

impl PartialEq for PeriodSequence {
    fn eq(&self, other: &Self) -> bool {
        self.coeffs == other.coeffs
    }
}

impl Eq for PeriodSequence {}

impl PeriodSequence {
    pub fn new(coeffs: Vec<BigRational>, provenance: Provenance) -> Self {
        PeriodSequence { coeffs, provenance }
    }

    pub fn from_integers<I: IntoIterator<Item = BigInt>>(it: I, provenance: Provenance) -> Self {
        Self::new(it.into_iter().map(BigRational::from_integer).collect(), provenance)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn truncated(&self, n: usize) -> Self {
        Self::new(self.coeffs.iter().take(n).cloned().collect(), self.provenance)
    }
}

fn factorials(n: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::one()];
    for d in 1..n {
        let next = &out[d - 1] * d;
        out.push(next);
    }
    out
}

/// `alpha_d = d! c_d`.
pub fn regularize(c: &[BigRational]) -> Vec<BigRational> {
    let f = factorials(c.len());
    c.iter().zip(f).map(|(x, k)| x * BigRational::from_integer(k)).collect()
}

/// `c_d = alpha_d / d!`.
pub fn deregularize(alpha: &[BigRational]) -> Vec<BigRational> {
    let f = factorials(alpha.len());
    alpha.iter().zip(f).map(|(x, k)| x / BigRational::from_integer(k)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bucket {
    pub id: String,
    pub members: Vec<usize>,
}

/// Stable identifier of the first `k` coefficients.
pub fn bucket_id(coeffs: &[BigRational]) -> String {
    let mut h = Sha256::new();
    for c in coeffs {
        h.update(c.to_string().as_bytes());
        h.update(b",");
    }
    let digest = h.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Partition by equality of the first `k` coefficients, buckets in order of first occurrence.
pub fn bucket(seqs: &[PeriodSequence], k: usize) -> Result<Vec<Bucket>, PeriodError> {
    let mut out: Vec<Bucket> = Vec::new();
    let mut keys: Vec<&[BigRational]> = Vec::new();
    for (i, s) in seqs.iter().enumerate() {
        if s.len() < k {
            return Err(PeriodError::TooFewTerms { index: i, have: s.len(), need: k });
        }
        if k > 0 && !s.coeffs[0].is_one() {
            return Err(PeriodError::NotNormalized { index: i });
        }
        let key = &s.coeffs[..k];
        match keys.iter().position(|x| *x == key) {
            Some(j) => out[j].members.push(i),
            None => {
                keys.push(key);
                out.push(Bucket { id: bucket_id(key), members: vec![i] });
            }
        }
    }
    Ok(out)
}

/// Convenience for tests and catalogues: `n` terms of `sum_d a(d) t^d`.
pub fn closed_form<F: Fn(usize) -> BigRational>(n: usize, a: F) -> PeriodSequence {
    PeriodSequence::new((0..n).map(a).collect(), Provenance::ClosedForm)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::laurent::{int, LaurentPolynomial};
    use crate::periods::{fit_operator, recurrence_extend, DiffOperator};
    use num_traits::Zero;

    fn fact(n: usize) -> BigInt {
        factorials(n + 1).pop().unwrap()
    }

    #[test]
    fn regularization_round_trip() {
        let c: Vec<BigRational> = (0..8).map(|d| BigRational::new(BigInt::one(), fact(d))).collect();
        let a = regularize(&c);
        assert!(a.iter().all(|x| x.is_one()));
        assert_eq!(deregularize(&a), c);
        let delta: Vec<BigRational> = (0..5).map(|d| if d == 0 { int(1) } else { int(0) }).collect();
        assert_eq!(regularize(&delta), delta);
    }

    fn cubic_alpha(n: usize) -> PeriodSequence {
        closed_form(n, |d| {
            if d % 3 != 0 {
                return int(0);
            }
            let k = d / 3;
            BigRational::from_integer(fact(3 * k) * fact(3 * k) / fact(k).pow(6))
        })
    }

    fn three_three_alpha(n: usize) -> PeriodSequence {
        closed_form(n, |d| {
            let mut s = BigInt::zero();
            for l in 0..=d {
                let k = d - l;
                let term = fact(3 * l) * fact(3 * l) * fact(k + l) / (fact(k) * fact(l).pow(7));
                s += term * BigInt::from(-36).pow(k as u32);
            }
            BigRational::from_integer(s)
        })
    }

    #[test]
    fn buckets() {
        let c = cubic_alpha(20);
        let q = three_three_alpha(20);
        let b = bucket(&[c.clone(), q.clone(), c.clone()], 20).unwrap();
        assert_eq!(b.len(), 2);
        assert_eq!(b[0].members, vec![0, 2]);
        assert_eq!(b[1].members, vec![1]);
        assert_eq!(b[0].id, bucket_id(&c.coeffs));
        assert_eq!(b[0].id.len(), 16);
        assert!(matches!(bucket(&[c.truncated(5)], 20), Err(PeriodError::TooFewTerms { .. })));
        let bad = PeriodSequence::new(vec![int(2); 20], Provenance::Supplied);
        assert!(matches!(bucket(&[bad], 20), Err(PeriodError::NotNormalized { index: 0 })));
    }

    #[test]
    fn cubic_period_matches_closed_form() {
        // (1+x+y)^3/(xyzw) + z + w
        let mut terms = Vec::new();
        for a in 0..=3i64 {
            for b in 0..=3 - a {
                let c = fact(3) / (fact(a as usize) * fact(b as usize) * fact((3 - a - b) as usize));
                terms.push((vec![a - 1, b - 1, -1, -1], i64::try_from(c).unwrap()));
            }
        }
        terms.push((vec![0, 0, 1, 0], 1));
        terms.push((vec![0, 0, 0, 1], 1));
        let f = LaurentPolynomial::from_int_terms(4, &terms);
        let s = period_coeffs(&f, 31).unwrap();
        assert_eq!(s, cubic_alpha(31));
        assert_eq!(s.coeffs[3], int(36));
        assert_eq!(s.coeffs[6], int(8100));
    }

    #[test]
    fn three_three_period_matches_closed_form() {
        let mut cube = Vec::new();
        for a in 0..=3i64 {
            for b in 0..=3 - a {
                let c = fact(3) / (fact(a as usize) * fact(b as usize) * fact((3 - a - b) as usize));
                cube.push((a, b, i64::try_from(c).unwrap()));
            }
        }
        let mut terms = Vec::new();
        for &(a, b, c) in &cube {
            for &(x, y, e) in &cube {
                terms.push((vec![a - 1, b - 1, x - 1, y - 1], c * e));
            }
        }
        terms.push((vec![0, 0, 0, 0], -36));
        let f = LaurentPolynomial::from_int_terms(4, &terms);
        let s = period_coeffs(&f, 13).unwrap();
        assert_eq!(s, three_three_alpha(13));
    }

    fn polymul(ps: &[&[i64]]) -> Vec<BigInt> {
        let mut out = vec![BigInt::one()];
        for p in ps {
            let mut next = vec![BigInt::zero(); out.len() + p.len() - 1];
            for (i, a) in out.iter().enumerate() {
                for (j, &b) in p.iter().enumerate() {
                    next[i + j] += a * b;
                }
            }
            out = next;
        }
        out
    }

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    #[test]
    fn cubic_operator_is_recovered() {
        // D^4 - 729 t^3 (D+1)^2 (D+2)^2
        let expected = DiffOperator::from_theta_parts(&[
            (0, big(&[0, 0, 0, 0, 1])),
            (3, polymul(&[&[-729], &[1, 1], &[1, 1], &[2, 1], &[2, 1]])),
        ])
        .unwrap();
        let fit = fit_operator(&cubic_alpha(35), 4, 5, 5).unwrap();
        assert!(!fit.ambiguous);
        assert_eq!(fit.operator, expected.normalized());
        assert_eq!(fit.operator.leading_poly(), &big(&[-1, 0, 0, 729])[..]);
        let seed = cubic_alpha(5);
        assert_eq!(recurrence_extend(&expected, &seed, 31).unwrap(), cubic_alpha(31));
    }

    pub(crate) fn three_three_operator() -> DiffOperator {
        let t: &[i64] = &[0, 1];
        let u: &[i64] = &[1, 36];
        DiffOperator::new(vec![
            polymul(&[&[15552], t, t, &[7, 1605, 98496, 1796256]]),
            polymul(&[&[144], t, u, &[1, 2754, 377622, 11226600]]),
            polymul(&[&[9], t, u, u, &[77, 57672, 3492720]]),
            polymul(&[&[18], t, u, u, u, &[61, 13860]]),
            polymul(&[u, u, u, u, &[-1, 693]]),
        ])
        .unwrap()
    }

    #[test]
    fn three_three_operator_is_recovered() {
        let expected = three_three_operator();
        assert!(expected.is_normalized());
        let s = three_three_alpha(45);
        assert!(expected.annihilates(&s.coeffs));
        let fit = fit_operator(&s, 4, 7, 5).unwrap();
        assert_eq!((fit.order, fit.degree, fit.ambiguous), (4, 5, false));
        assert_eq!(fit.operator, expected);
    }
}
