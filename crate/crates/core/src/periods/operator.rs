use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

use super::{PeriodError, PeriodSequence, Provenance};

/// `L = sum_m p_m(t) D^m` with `D = t d/dt`; `polys[m]` lists the coefficients
/// of `p_m` from the constant term up.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DiffOperator {
    polys: Vec<Vec<BigInt>>,
}

fn trim(mut p: Vec<BigInt>) -> Vec<BigInt> {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

impl DiffOperator {
    pub fn new(polys: Vec<Vec<BigInt>>) -> Result<Self, PeriodError> {
        let mut polys: Vec<Vec<BigInt>> = polys.into_iter().map(trim).collect();
        while polys.last().is_some_and(Vec::is_empty) {
            polys.pop();
        }
        if polys.is_empty() {
            return Err(PeriodError::ZeroOperator);
        }
        Ok(DiffOperator { polys })
    }

    pub fn from_i64(polys: &[Vec<i64>]) -> Result<Self, PeriodError> {
        Self::new(polys.iter().map(|p| p.iter().map(|&c| BigInt::from(c)).collect()).collect())
    }

    /// `sum_j t^j q_j(D)` from pairs `(j, q_j)` with `q_j` given low-to-high in `D`.
    pub fn from_theta_parts(parts: &[(usize, Vec<BigInt>)]) -> Result<Self, PeriodError> {
        let order = parts.iter().map(|(_, q)| q.len()).max().unwrap_or(0);
        let mut polys = vec![Vec::<BigInt>::new(); order];
        for (j, q) in parts {
            for (m, c) in q.iter().enumerate() {
                let p = &mut polys[m];
                if p.len() <= *j {
                    p.resize(j + 1, BigInt::zero());
                }
                p[*j] += c;
            }
        }
        Self::new(polys)
    }

    pub fn order(&self) -> usize {
        self.polys.len() - 1
    }

    pub fn max_degree(&self) -> usize {
        self.polys.iter().map(|p| p.len().saturating_sub(1)).max().unwrap_or(0)
    }

    pub fn polys(&self) -> &[Vec<BigInt>] {
        &self.polys
    }

    pub fn leading_poly(&self) -> &[BigInt] {
        self.polys.last().expect("nonzero operator")
    }

    pub fn content(&self) -> BigInt {
        self.polys.iter().flatten().fold(BigInt::zero(), |g, c| g.gcd(c))
    }

    /// Content one and positive top coefficient of `p_N`.
    pub fn normalized(&self) -> Self {
        let mut g = self.content();
        if self.leading_poly().last().expect("nonzero").is_negative() {
            g = -g;
        }
        DiffOperator { polys: self.polys.iter().map(|p| p.iter().map(|c| c / &g).collect()).collect() }
    }

    pub fn is_normalized(&self) -> bool {
        self.content() == BigInt::from(1) && self.leading_poly().last().expect("nonzero").is_positive()
    }

    /// `Q_j(s) = sum_m c_{m,j} s^m`, so that `L` acts on `sum a_k t^k` by
    /// `[t^K] = sum_j Q_j(K - j) a_{K-j}`.
    pub(crate) fn shift_poly_eval(&self, j: usize, s: i64) -> BigInt {
        let mut acc = BigInt::zero();
        let sb = BigInt::from(s);
        for p in self.polys.iter().rev() {
            acc *= &sb;
            if let Some(c) = p.get(j) {
                acc += c;
            }
        }
        acc
    }

    /// Coefficients of `t^0 .. t^{len-1}` in `L` applied to the truncated series.
    pub fn residuals(&self, alpha: &[BigRational]) -> Vec<BigRational> {
        let r = self.max_degree();
        (0..alpha.len())
            .map(|k| {
                let mut s = BigRational::zero();
                for j in 0..=r.min(k) {
                    let q = self.shift_poly_eval(j, (k - j) as i64);
                    if !q.is_zero() {
                        s += &alpha[k - j] * BigRational::from_integer(q);
                    }
                }
                s
            })
            .collect()
    }

    pub fn annihilates(&self, alpha: &[BigRational]) -> bool {
        self.residuals(alpha).iter().all(Zero::is_zero)
    }

    /// Coefficient list of `p_m` as `i64`, if it fits.
    pub fn polys_i64(&self) -> Option<Vec<Vec<i64>>> {
        self.polys.iter().map(|p| p.iter().map(|c| i64::try_from(c).ok()).collect()).collect()
    }
}

impl fmt::Display for DiffOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, p) in self.polys.iter().enumerate().rev() {
            if p.is_empty() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let poly: Vec<String> = p
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(j, c)| match j {
                    0 => format!("{c}"),
                    1 => format!("{c}*t"),
                    _ => format!("{c}*t^{j}"),
                })
                .collect();
            write!(f, "({})", poly.join(" + "))?;
            match m {
                0 => {}
                1 => write!(f, "*D")?,
                _ => write!(f, "*D^{m}")?,
            }
        }
        Ok(())
    }
}

/// Extend `seed` to `n` coefficients with the recurrence of `l`.
pub fn recurrence_extend(l: &DiffOperator, seed: &PeriodSequence, n: usize) -> Result<PeriodSequence, PeriodError> {
    let r = l.max_degree();
    let mut alpha: Vec<BigRational> = Vec::with_capacity(n.max(seed.len()));
    for k in 0..n.max(seed.len()) {
        let mut rest = BigRational::zero();
        for j in 1..=r.min(k) {
            let q = l.shift_poly_eval(j, (k - j) as i64);
            if !q.is_zero() {
                rest += &alpha[k - j] * BigRational::from_integer(q);
            }
        }
        let lead = l.shift_poly_eval(0, k as i64);
        if k < seed.len() {
            let a = seed.coeffs[k].clone();
            if rest.clone() + &a * BigRational::from_integer(lead) != BigRational::zero() {
                return Err(PeriodError::SeedInconsistent { index: k });
            }
            alpha.push(a);
        } else if lead.is_zero() {
            return Err(PeriodError::SingularRecursion { index: k });
        } else {
            alpha.push(-rest / BigRational::from_integer(lead));
        }
    }
    alpha.truncate(n.max(seed.len()));
    Ok(PeriodSequence::new(alpha, Provenance::RecurrenceExtended))
}
