use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{DiffOperator, PeriodError, PeriodSequence};

/// Outcome of an operator fit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FitResult {
    pub operator: DiffOperator,
    /// The `(N, R)` at which the first annihilating operator was found.
    pub order: usize,
    pub degree: usize,
    /// Dimension of the solution space at `(N, R)`.
    pub nullity: usize,
    /// Set when `nullity > 1`; the operator is then the smallest-support basis vector.
    pub ambiguous: bool,
}

/// Lexicographically minimal `(N, R)` operator annihilating `s`, with the last
/// `holdout` coefficients kept out of the solve and used to check the result.
pub fn fit_operator(s: &PeriodSequence, max_n: usize, max_r: usize, holdout: usize) -> Result<FitResult, PeriodError> {
    let need = (max_n + 1) * (max_r + 1) + holdout;
    if s.len() < need {
        return Err(PeriodError::TooFewForFit { have: s.len(), need });
    }
    search(s, holdout, (0..=max_n).map(|n| (n, max_r)), max_n, max_r)
}

/// As [`fit_operator`], but for each order `N` the degree bound is lowered so
/// that `(N+1)(R+1) + holdout` fits in the available coefficients.
pub fn fit_operator_within(
    s: &PeriodSequence,
    max_n: usize,
    max_r: usize,
    holdout: usize,
) -> Result<FitResult, PeriodError> {
    let avail = s.len().saturating_sub(holdout);
    let bounds: Vec<(usize, usize)> = (0..=max_n)
        .filter_map(|n| {
            let r = (avail / (n + 1)).checked_sub(1)?;
            Some((n, r.min(max_r)))
        })
        .collect();
    if bounds.is_empty() {
        return Err(PeriodError::TooFewForFit { have: s.len(), need: 1 + holdout });
    }
    search(s, holdout, bounds.into_iter(), max_n, max_r)
}

fn search<I: Iterator<Item = (usize, usize)>>(
    s: &PeriodSequence,
    holdout: usize,
    bounds: I,
    max_n: usize,
    max_r: usize,
) -> Result<FitResult, PeriodError> {
    let den = s.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let beta: Vec<BigInt> = s.coeffs.iter().map(|c| (c * BigRational::from_integer(den.clone())).to_integer()).collect();
    let eqs = s.len() - holdout;
    for (n, rmax) in bounds {
        for r in 0..=rmax {
            let basis = nullspace(&system(&beta[..eqs], n, r), (n + 1) * (r + 1));
            if basis.is_empty() {
                continue;
            }
            let nullity = basis.len();
            let best = basis.into_iter().min_by_key(|v| v.iter().filter(|c| !c.is_zero()).count()).expect("nonempty");
            let op = to_operator(&best, n, r)?;
            if !op.annihilates(&s.coeffs) {
                continue;
            }
            return Ok(FitResult { operator: op.normalized(), order: n, degree: r, nullity, ambiguous: nullity > 1 });
        }
    }
    Err(PeriodError::NoOperatorFound { max_order: max_n, max_degree: max_r })
}

/// Row `K`: the coefficient of `t^K` in `L` applied to the series, as a linear
/// form in the unknowns `c_{m,j}` (index `m (r+1) + j`).
fn system(beta: &[BigInt], n: usize, r: usize) -> Vec<Vec<BigInt>> {
    let cols = (n + 1) * (r + 1);
    (0..beta.len())
        .map(|k| {
            let mut row = vec![BigInt::zero(); cols];
            for j in 0..=r.min(k) {
                let s = BigInt::from(k - j);
                let mut pw = beta[k - j].clone();
                for m in 0..=n {
                    row[m * (r + 1) + j] = pw.clone();
                    pw *= &s;
                }
            }
            row
        })
        .collect()
}

fn to_operator(v: &[BigInt], n: usize, r: usize) -> Result<DiffOperator, PeriodError> {
    DiffOperator::new((0..=n).map(|m| v[m * (r + 1)..(m + 1) * (r + 1)].to_vec()).collect())
}

fn make_primitive(v: &mut [BigInt]) {
    let g = v.iter().fold(BigInt::zero(), |g, c| g.gcd(c));
    if !g.is_zero() && !g.is_one() {
        for c in v.iter_mut() {
            *c /= &g;
        }
    }
}

/// Primitive integer basis of `{x : M x = 0}`, one vector per free column.
fn nullspace(rows: &[Vec<BigInt>], cols: usize) -> Vec<Vec<BigInt>> {
    let mut e: Vec<Vec<BigInt>> = rows.iter().filter(|r| r.iter().any(|c| !c.is_zero())).cloned().collect();
    for r in e.iter_mut() {
        make_primitive(r);
    }
    let mut pivots = Vec::new();
    let mut top = 0;
    for col in 0..cols {
        if top == e.len() {
            break;
        }
        let Some(p) = (top..e.len()).filter(|&i| !e[i][col].is_zero()).min_by_key(|&i| e[i][col].bits()) else {
            continue;
        };
        e.swap(top, p);
        let (head, tail) = e.split_at_mut(top + 1);
        let prow = &head[top];
        for row in tail.iter_mut() {
            if row[col].is_zero() {
                continue;
            }
            let a = prow[col].clone();
            let b = row[col].clone();
            for c in col..cols {
                row[c] = &a * &row[c] - &b * &prow[c];
            }
            make_primitive(row);
        }
        pivots.push(col);
        top += 1;
    }
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![BigRational::zero(); cols];
            x[f] = BigRational::one();
            for (i, &p) in pivots.iter().enumerate().rev() {
                let mut s = BigRational::zero();
                for c in p + 1..cols {
                    if !e[i][c].is_zero() && !x[c].is_zero() {
                        s += BigRational::from_integer(e[i][c].clone()) * &x[c];
                    }
                }
                x[p] = -s / BigRational::from_integer(e[i][p].clone());
            }
            let den = x.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
            let mut v: Vec<BigInt> = x.iter().map(|c| (c * BigRational::from_integer(den.clone())).to_integer()).collect();
            make_primitive(&mut v);
            if v.iter().rev().find(|c| !c.is_zero()).is_some_and(|c| c.is_negative()) {
                for c in v.iter_mut() {
                    *c = -c.clone();
                }
            }
            v
        })
        .collect()
}
