//! Constant terms of powers of a Laurent polynomial.
//!
//! The coefficients are computed modulo a handful of word-size primes and
//! recovered by Chinese remaindering. Each partial power `f^k` is stored only
//! on the lattice points that can still return to the origin, and the last
//! half of the powers is never formed: `CT(f^(a+b)) = sum_m F_a[m] F_b[-m]`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{PeriodError, PeriodSequence, Provenance};
use crate::laurent::LaurentPolynomial;
use crate::polyhedra::LatticePolytope;
use crate::IVec;

/// Default cap on the number of lattice points held by one partial power.
pub const DEFAULT_POINT_BUDGET: usize = 40_000_000;

/// `alpha_0, ..., alpha_{n-1}` where `alpha_d` is the constant term of `f^d`.
pub fn period_coeffs(f: &LaurentPolynomial, n: usize) -> Result<PeriodSequence, PeriodError> {
    period_coeffs_with_budget(f, n, DEFAULT_POINT_BUDGET)
}

pub fn period_coeffs_with_budget(
    f: &LaurentPolynomial,
    n: usize,
    budget: usize,
) -> Result<PeriodSequence, PeriodError> {
    let coeffs = constant_terms(f, n, budget)?;
    Ok(PeriodSequence::new(coeffs, Provenance::DirectExpansion))
}

/// Reference implementation: full expansion of every power.
pub fn period_coeffs_naive(f: &LaurentPolynomial, n: usize) -> PeriodSequence {
    let mut out = Vec::with_capacity(n);
    let mut p = LaurentPolynomial::one(f.n_vars());
    for d in 0..n {
        if d > 0 {
            p = p.mul(f);
        }
        out.push(p.constant_term());
    }
    PeriodSequence::new(out, Provenance::DirectExpansion)
}

fn constant_terms(f: &LaurentPolynomial, n: usize, budget: usize) -> Result<Vec<BigRational>, PeriodError> {
    if n == 0 {
        return Ok(Vec::new());
    }
    let v = f.n_vars();
    let mut out = vec![BigRational::one()];
    if f.is_zero() {
        out.resize(n, BigRational::zero());
        return Ok(out);
    }
    if v == 0 {
        let c = f.constant_term();
        for d in 1..n {
            let next = &out[d - 1] * &c;
            out.push(next);
        }
        return Ok(out);
    }
    let exps: Vec<IVec> = f.terms().keys().cloned().collect();
    let newton = LatticePolytope::from_points(v, &exps).expect("consistent exponent lengths");
    let (a, b) = newton.halfspaces();
    if b.iter().any(|&x| x < 0) {
        // the origin is outside the Newton polytope, so no power has a constant term
        out.resize(n, BigRational::zero());
        return Ok(out);
    }
    if n == 1 {
        return Ok(out);
    }

    // integral rescaling g = den * f
    let den = f.terms().values().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
    let ints: Vec<BigInt> = f.terms().values().map(|c| (c * BigRational::from_integer(den.clone())).to_integer()).collect();
    let norm: BigInt = ints.iter().map(|c| c.abs()).sum();
    let top = n - 1;
    let bound_bits = norm.pow(top as u32).bits() as u32 + 2;

    let terms_len = ints.len() as u32;
    let spare = 64 - (32 - terms_len.leading_zeros()) - 1;
    let prime_bits = (spare / 2).min(31);
    let primes = primes_below(prime_bits, bound_bits);

    let plan = Plan::new(v, &exps, a, b, top, budget)?;
    let mut residues: Vec<Vec<u64>> = Vec::with_capacity(primes.len());
    for &p in &primes {
        let cs: Vec<u64> = ints.iter().map(|c| mod_big(c, p)).collect();
        residues.push(plan.run(&cs, p));
    }

    let dbig = BigRational::from_integer(den.clone());
    let mut dpow = BigRational::one();
    for d in 1..n {
        dpow = &dpow * &dbig;
        let r: Vec<u64> = residues.iter().map(|rs| rs[d]).collect();
        let x = crt_symmetric(&r, &primes);
        out.push(BigRational::from_integer(x) / &dpow);
    }
    Ok(out)
}

/// Precomputed regions `R_0 .. R_K` with `K = ceil(top / 2)`.
struct Plan {
    exps: Vec<IVec>,
    regions: Vec<Region>,
    top: usize,
}

impl Plan {
    fn new(v: usize, exps: &[IVec], a: &[IVec], b: &[i64], top: usize, budget: usize) -> Result<Self, PeriodError> {
        let kmax = top.div_ceil(2);
        let mut lo = vec![i64::MAX; v];
        let mut hi = vec![i64::MIN; v];
        for e in exps {
            for i in 0..v {
                lo[i] = lo[i].min(e[i]);
                hi[i] = hi[i].max(e[i]);
            }
        }
        let mut regions = Vec::with_capacity(kmax + 1);
        for k in 0..=kmax {
            let r = Region::build(v, a, b, &lo, &hi, k as i64, (top - k) as i64, budget)?;
            regions.push(r);
        }
        Ok(Plan { exps: exps.to_vec(), regions, top })
    }

    /// Residues of `CT(g^d)` for `d = 0..=top`.
    fn run(&self, cs: &[u64], p: u64) -> Vec<u64> {
        let mut alpha = vec![0u64; self.top + 1];
        alpha[0] = 1 % p;
        let mut prev: Vec<u64> = vec![0; self.regions[0].len];
        let origin = self.regions[0].index_of(&vec![0; self.regions[0].dim]).expect("origin in R_0");
        prev[origin] = 1;
        let mut acc: Vec<u64> = Vec::new();
        for k in 0..self.regions.len() - 1 {
            let src = &self.regions[k];
            let dst = &self.regions[k + 1];
            acc.clear();
            acc.resize(dst.len, 0);
            multiply(src, &prev, dst, &mut acc, &self.exps, cs);
            let next: Vec<u64> = acc.iter().map(|x| x % p).collect();
            let d_odd = 2 * k + 1;
            if d_odd <= self.top {
                alpha[d_odd] = pair(dst, &next, src, &prev, p);
            }
            let d_even = 2 * k + 2;
            if d_even <= self.top {
                alpha[d_even] = pair(dst, &next, dst, &next, p);
            }
            prev = next;
        }
        alpha
    }
}

/// `acc[m] += sum_e c_e * src[m - e]` over the stored points of `dst`.
fn multiply(src: &Region, sv: &[u64], dst: &Region, acc: &mut [u64], exps: &[IVec], cs: &[u64]) {
    let v = dst.dim;
    let mut pre = vec![0i64; v - 1];
    for (ri, row) in dst.rows.iter().enumerate() {
        let target = &mut acc[row.start..row.start + (row.hi - row.lo + 1) as usize];
        for (e, &c) in exps.iter().zip(cs) {
            if c == 0 {
                continue;
            }
            for i in 0..v - 1 {
                pre[i] = dst.prefix(ri)[i] - e[i];
            }
            let Some(s) = src.row_of(&pre) else { continue };
            let el = e[v - 1];
            let lo = row.lo.max(s.lo + el);
            let hi = row.hi.min(s.hi + el);
            if lo > hi {
                continue;
            }
            let len = (hi - lo + 1) as usize;
            let t0 = (lo - row.lo) as usize;
            let s0 = s.start + (lo - el - s.lo) as usize;
            for (t, &x) in target[t0..t0 + len].iter_mut().zip(&sv[s0..s0 + len]) {
                *t += x * c;
            }
        }
    }
}

/// `sum_m A[m] B[-m] mod p`.
fn pair(ra: &Region, a: &[u64], rb: &Region, b: &[u64], p: u64) -> u64 {
    let v = ra.dim;
    let mut neg = vec![0i64; v - 1];
    let mut total: u128 = 0;
    for (ri, row) in ra.rows.iter().enumerate() {
        for (i, x) in ra.prefix(ri).iter().enumerate() {
            neg[i] = -x;
        }
        let Some(s) = rb.row_of(&neg) else { continue };
        let lo = row.lo.max(-s.hi);
        let hi = row.hi.min(-s.lo);
        let mut sum: u128 = 0;
        for x in lo..=hi {
            let ia = row.start + (x - row.lo) as usize;
            let ib = s.start + (-x - s.lo) as usize;
            sum += (a[ia] * b[ib]) as u128;
        }
        total = (total + sum) % p as u128;
    }
    total as u64
}

#[derive(Clone, Debug)]
struct Row {
    lo: i64,
    hi: i64,
    start: usize,
}

/// Lattice points of `{m : A m <= k b, -A m <= j b}` stored row by row: a row
/// fixes all coordinates but the last, which runs over an interval.
struct Region {
    dim: usize,
    box_lo: Vec<i64>,
    box_ext: Vec<usize>,
    lookup: Vec<u32>,
    rows: Vec<Row>,
    prefixes: Vec<i64>,
    len: usize,
}

impl Region {
    #[allow(clippy::too_many_arguments)]
    fn build(
        v: usize,
        a: &[IVec],
        b: &[i64],
        lo: &[i64],
        hi: &[i64],
        k: i64,
        j: i64,
        budget: usize,
    ) -> Result<Self, PeriodError> {
        // coordinate box of k*Newt intersected with -(j*Newt)
        let blo: Vec<i64> = (0..v).map(|i| (k * lo[i]).max(-j * hi[i])).collect();
        let bhi: Vec<i64> = (0..v).map(|i| (k * hi[i]).min(-j * lo[i])).collect();
        let pd = v - 1;
        let box_lo = blo[..pd].to_vec();
        let box_ext: Vec<usize> = (0..pd).map(|i| (bhi[i] - blo[i] + 1).max(0) as usize).collect();
        let cells = box_ext.iter().try_fold(1usize, |acc, &e| acc.checked_mul(e));
        let cells = match cells {
            Some(c) if c <= budget => c,
            _ => return Err(PeriodError::OutOfBudget { points: usize::MAX, budget }),
        };
        let mut lookup = vec![u32::MAX; cells];
        let mut rows = Vec::new();
        let mut prefixes = Vec::new();
        let mut len = 0usize;
        let mut cur = box_lo.clone();
        for cell in 0..cells {
            if cell > 0 {
                // odometer, last prefix coordinate fastest
                let mut i = pd;
                while i > 0 {
                    i -= 1;
                    cur[i] += 1;
                    if cur[i] <= bhi[i] {
                        break;
                    }
                    cur[i] = blo[i];
                }
            }
            let mut xlo = blo[pd];
            let mut xhi = bhi[pd];
            for (row, &bb) in a.iter().zip(b) {
                for (sign, rhs) in [(1i64, k * bb), (-1i64, j * bb)] {
                    let dotp: i64 = (0..pd).map(|i| row[i] * cur[i]).sum::<i64>() * sign;
                    let r = rhs - dotp;
                    let al = row[pd] * sign;
                    if al > 0 {
                        xhi = xhi.min(Integer::div_floor(&r, &al));
                    } else if al < 0 {
                        // al*x <= r with al < 0 is x >= ceil(-r / -al)
                        xlo = xlo.max(-(Integer::div_floor(&r, &-al)));
                    } else if r < 0 {
                        xhi = xlo - 1;
                    }
                }
            }
            if xlo > xhi {
                continue;
            }
            lookup[cell] = rows.len() as u32;
            rows.push(Row { lo: xlo, hi: xhi, start: len });
            prefixes.extend_from_slice(&cur);
            len += (xhi - xlo + 1) as usize;
            if len > budget {
                return Err(PeriodError::OutOfBudget { points: len, budget });
            }
        }
        Ok(Region { dim: v, box_lo, box_ext, lookup, rows, prefixes, len })
    }

    fn prefix(&self, idx: usize) -> &[i64] {
        let pd = self.dim - 1;
        &self.prefixes[idx * pd..(idx + 1) * pd]
    }

    fn row_of(&self, pre: &[i64]) -> Option<&Row> {
        let mut cell = 0usize;
        for i in 0..pre.len() {
            let off = pre[i] - self.box_lo[i];
            if off < 0 || off as usize >= self.box_ext[i] {
                return None;
            }
            cell = cell * self.box_ext[i] + off as usize;
        }
        let r = self.lookup[cell];
        (r != u32::MAX).then(|| &self.rows[r as usize])
    }

    fn index_of(&self, m: &[i64]) -> Option<usize> {
        let pd = self.dim - 1;
        let row = self.row_of(&m[..pd])?;
        let x = m[pd];
        (row.lo <= x && x <= row.hi).then(|| row.start + (x - row.lo) as usize)
    }
}

fn mod_big(c: &BigInt, p: u64) -> u64 {
    let r = c.mod_floor(&BigInt::from(p));
    r.to_u64().expect("residue fits")
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, a, p);
        }
        a = mul_mod(a, a, p);
        e >>= 1;
    }
    r
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for q in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % q == 0 {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Descending primes below `2^bits` whose product exceeds `2^need_bits`.
fn primes_below(bits: u32, need_bits: u32) -> Vec<u64> {
    let mut out = Vec::new();
    let mut have = 0f64;
    let mut q = (1u64 << bits) - 1;
    while have <= need_bits as f64 {
        if is_prime(q) {
            out.push(q);
            have += (q as f64).log2();
        }
        q -= 1;
    }
    out
}

/// Garner reconstruction into the symmetric range around zero.
fn crt_symmetric(r: &[u64], p: &[u64]) -> BigInt {
    let mut x = BigInt::from(r[0]);
    let mut m = BigInt::from(p[0]);
    for i in 1..r.len() {
        let pi = p[i];
        let xm = mod_big(&x, pi);
        let mm = mod_big(&m, pi);
        let inv = pow_mod(mm, pi - 2, pi);
        let t = mul_mod((r[i] + pi - xm) % pi, inv, pi);
        x += &m * t;
        m *= pi;
    }
    if &x * 2 > m {
        x -= m;
    }
    x
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::int;
    use proptest::prelude::*;

    fn binomial(n: u64, k: u64) -> BigInt {
        let mut r = BigInt::one();
        for i in 0..k {
            r = r * (n - i) / (i + 1);
        }
        r
    }

    #[test]
    fn central_binomials() {
        let f = LaurentPolynomial::from_int_terms(1, &[(vec![1], 1), (vec![-1], 1)]);
        let s = period_coeffs(&f, 12).unwrap();
        for d in 0..12u64 {
            let want = if d % 2 == 0 { binomial(d, d / 2) } else { BigInt::zero() };
            assert_eq!(s.coeffs[d as usize], BigRational::from_integer(want));
        }
    }

    #[test]
    fn origin_outside_newton_polytope() {
        let f = LaurentPolynomial::from_int_terms(2, &[(vec![1, 0], 3), (vec![0, 1], -2)]);
        let s = period_coeffs(&f, 6).unwrap();
        assert_eq!(s.coeffs[0], int(1));
        assert!(s.coeffs[1..].iter().all(Zero::is_zero));
    }

    #[test]
    fn constants_and_rationals() {
        let f = LaurentPolynomial::constant(0, BigRational::new(3.into(), 2.into()));
        let s = period_coeffs(&f, 4).unwrap();
        assert_eq!(s.coeffs[3], BigRational::new(27.into(), 8.into()));
        let g = LaurentPolynomial::from_terms(
            2,
            vec![
                (vec![1, 0], BigRational::new(1.into(), 3.into())),
                (vec![-1, 1], int(-2)),
                (vec![0, -1], BigRational::new(5.into(), 7.into())),
                (vec![0, 0], BigRational::new(BigInt::from(-1), 2.into())),
            ],
        );
        assert_eq!(period_coeffs(&g, 9).unwrap(), period_coeffs_naive(&g, 9));
    }

    #[test]
    fn degenerate_newton_polytope() {
        // segment in the plane through the origin
        let f = LaurentPolynomial::from_int_terms(2, &[(vec![1, 1], 2), (vec![-1, -1], 3), (vec![0, 0], 1)]);
        assert_eq!(period_coeffs(&f, 10).unwrap(), period_coeffs_naive(&f, 10));
    }

    #[test]
    fn budget_is_enforced() {
        let f = LaurentPolynomial::from_int_terms(3, &[(vec![1, 0, 0], 1), (vec![0, 1, 0], 1), (vec![0, 0, 1], 1), (vec![-1, -1, -1], 1)]);
        let err = period_coeffs_with_budget(&f, 40, 50).unwrap_err();
        assert!(matches!(err, PeriodError::OutOfBudget { .. }));
    }

    #[test]
    fn crt_recovers_signed_values() {
        let ps = primes_below(20, 60);
        for x in [BigInt::from(-123456789012345i64), BigInt::from(987654321098765i64), BigInt::zero()] {
            let r: Vec<u64> = ps.iter().map(|&p| mod_big(&x, p)).collect();
            assert_eq!(crt_symmetric(&r, &ps), x);
        }
    }

    fn small_laurent() -> impl Strategy<Value = LaurentPolynomial> {
        (1usize..=3).prop_flat_map(|v| {
            proptest::collection::vec((proptest::collection::vec(-2i64..=2, v), -3i64..=3), 1..=6)
                .prop_map(move |ts| LaurentPolynomial::from_int_terms(v, &ts))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]
        #[test]
        fn agrees_with_naive_expansion(f in small_laurent()) {
            prop_assert_eq!(period_coeffs(&f, 9).unwrap(), period_coeffs_naive(&f, 9));
        }
    }
}
