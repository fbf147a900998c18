//! Dense integer polynomials (low-to-high) and their roots.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

pub(crate) type Poly = Vec<BigInt>;

pub(crate) fn trim(mut p: Poly) -> Poly {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
    p
}

pub(crate) fn degree(p: &[BigInt]) -> usize {
    p.len().saturating_sub(1)
}

pub(crate) fn content(p: &[BigInt]) -> BigInt {
    p.iter().fold(BigInt::zero(), |g, c| g.gcd(c))
}

/// Divide out the content and make the top coefficient positive.
pub(crate) fn primitive(p: &[BigInt]) -> Poly {
    let mut g = content(p);
    if g.is_zero() {
        return Vec::new();
    }
    if p.last().is_some_and(Signed::is_negative) {
        g = -g;
    }
    p.iter().map(|c| c / &g).collect()
}

pub(crate) fn derivative(p: &[BigInt]) -> Poly {
    p.iter().enumerate().skip(1).map(|(i, c)| c * i).collect()
}

/// Pseudo-remainder of `a` by `b`.
fn prem(a: &[BigInt], b: &[BigInt]) -> Poly {
    let mut r = trim(a.to_vec());
    let db = degree(b);
    let lb = b.last().expect("nonzero divisor").clone();
    while !r.is_empty() && degree(&r) >= db {
        let lr = r.last().unwrap().clone();
        let shift = degree(&r) - db;
        for c in r.iter_mut() {
            *c *= &lb;
        }
        for (i, c) in b.iter().enumerate() {
            r[i + shift] -= &lr * c;
        }
        r = trim(r);
    }
    r
}

pub(crate) fn gcd(a: &[BigInt], b: &[BigInt]) -> Poly {
    let mut x = primitive(&trim(a.to_vec()));
    let mut y = primitive(&trim(b.to_vec()));
    while !y.is_empty() {
        let r = primitive(&prem(&x, &y));
        x = y;
        y = r;
    }
    x
}

/// Exact quotient `a / b`; panics if `b` does not divide `a` over the integers.
pub(crate) fn div_exact(a: &[BigInt], b: &[BigInt]) -> Poly {
    let mut r = trim(a.to_vec());
    let db = degree(b);
    let lb = b.last().expect("nonzero divisor");
    if r.len() < b.len() {
        assert!(r.is_empty(), "inexact polynomial division");
        return Vec::new();
    }
    let mut q = vec![BigInt::zero(); r.len() - db];
    while !r.is_empty() && degree(&r) >= db {
        let (c, rem) = r.last().unwrap().div_rem(lb);
        assert!(rem.is_zero(), "inexact polynomial division");
        let shift = degree(&r) - db;
        for (i, bc) in b.iter().enumerate() {
            r[i + shift] -= &c * bc;
        }
        q[shift] = c;
        r = trim(r);
    }
    assert!(r.is_empty(), "inexact polynomial division");
    q
}

/// Squarefree decomposition: `(factor, multiplicity)` with primitive factors of positive degree.
pub(crate) fn squarefree(p: &[BigInt]) -> Vec<(Poly, usize)> {
    let p = primitive(&trim(p.to_vec()));
    let mut out = Vec::new();
    if degree(&p) == 0 {
        return out;
    }
    // Yun's algorithm
    let dp = derivative(&p);
    let a = gcd(&p, &dp);
    let mut b = div_exact(&p, &a);
    let mut c = div_exact(&dp, &a);
    let mut d = sub(&c, &derivative(&b));
    let mut i = 1;
    while degree(&b) > 0 {
        let g = gcd(&b, &d);
        if degree(&g) > 0 {
            out.push((g.clone(), i));
        }
        let nb = div_exact(&b, &g);
        c = div_exact(&d, &g);
        d = sub(&c, &derivative(&nb));
        b = nb;
        i += 1;
    }
    out
}

fn sub(a: &[BigInt], b: &[BigInt]) -> Poly {
    let n = a.len().max(b.len());
    let z = BigInt::zero();
    trim((0..n).map(|i| a.get(i).unwrap_or(&z) - b.get(i).unwrap_or(&z)).collect())
}

pub(crate) fn eval_rational(p: &[BigInt], x: &BigRational) -> BigRational {
    p.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + BigRational::from_integer(c.clone()))
}

pub(crate) fn eval_c(p: &[BigInt], z: Complex64) -> Complex64 {
    p.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c.to_f64().unwrap_or(f64::NAN))
}

/// Positive divisors of `n`, or `None` when trial division would be too slow.
fn divisors(n: &BigInt) -> Option<Vec<u64>> {
    let n = n.abs().to_u64()?;
    if n > 1 << 40 {
        return None;
    }
    let mut out = Vec::new();
    let mut d = 1u64;
    while d * d <= n {
        if n % d == 0 {
            out.push(d);
            if d * d != n {
                out.push(n / d);
            }
        }
        d += 1;
    }
    out.sort_unstable();
    Some(out)
}

/// Split off the linear factors `q t - p` of a squarefree primitive polynomial.
pub(crate) fn rational_roots(p: &[BigInt]) -> (Vec<BigRational>, Poly) {
    let mut rest = p.to_vec();
    let mut roots = Vec::new();
    if p.first().is_some_and(Zero::is_zero) {
        roots.push(BigRational::zero());
        rest = rest[1..].to_vec();
    }
    if degree(&rest) == 0 {
        return (roots, rest);
    }
    let Some(qs) = divisors(rest.last().unwrap()) else { return (roots, rest) };
    let approx = complex_roots(&rest);
    for z in approx {
        if z.im.abs() > 1e-6 * (1.0 + z.re.abs()) {
            continue;
        }
        for &q in &qs {
            let num = (z.re * q as f64).round();
            if !num.is_finite() {
                continue;
            }
            let cand = BigRational::new(BigInt::from(num as i64), BigInt::from(q));
            if roots.contains(&cand) {
                continue;
            }
            if eval_rational(&rest, &cand).is_zero() {
                roots.push(cand);
                break;
            }
        }
    }
    for r in &roots {
        if r.is_zero() {
            continue;
        }
        let lin = primitive(&[-r.numer().clone(), r.denom().clone()]);
        rest = div_exact(&rest, &lin);
    }
    let rest = primitive(&rest);
    roots.sort_by(|a, b| a.cmp(b));
    (roots, rest)
}

/// All complex roots by Aberth iteration followed by Newton polishing.
pub(crate) fn complex_roots(p: &[BigInt]) -> Vec<Complex64> {
    let p = trim(p.to_vec());
    let n = degree(&p);
    if n == 0 {
        return Vec::new();
    }
    let lead = p[n].to_f64().unwrap();
    let c: Vec<f64> = p.iter().map(|x| x.to_f64().unwrap() / lead).collect();
    let dc: Vec<f64> = (1..=n).map(|i| c[i] * i as f64).collect();
    let ev = |cs: &[f64], z: Complex64| cs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a);
    // Cauchy bound for the initial circle
    let radius = 1.0 + c[..n].iter().fold(0.0f64, |m, a| m.max(a.abs()));
    let mut z: Vec<Complex64> =
        (0..n).map(|k| Complex64::from_polar(radius * 0.5, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64)).collect();
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..n {
            let ratio = ev(&c, z[i]) / ev(&dc, z[i]);
            let sum: Complex64 = (0..n).filter(|&j| j != i).map(|j| Complex64::new(1.0, 0.0) / (z[i] - z[j])).sum();
            let w = ratio / (Complex64::new(1.0, 0.0) - ratio * sum);
            if w.is_finite() {
                z[i] -= w;
                moved = moved.max(w.norm() / (1.0 + z[i].norm()));
            }
        }
        if moved < 1e-16 {
            break;
        }
    }
    for zi in z.iter_mut() {
        for _ in 0..3 {
            let w = ev(&c, *zi) / ev(&dc, *zi);
            if w.is_finite() {
                *zi -= w;
            }
        }
    }
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    z
}

/// A posteriori error radius for an approximate simple root: `n |p(z)| / |p'(z)|`.
pub(crate) fn root_radius(p: &[BigInt], z: Complex64) -> f64 {
    let n = degree(p) as f64;
    let v = eval_c(p, z).norm();
    let d = eval_c(&derivative(p), z).norm();
    (n * v / d).max(f64::EPSILON * (1.0 + z.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;

    fn p(v: &[i64]) -> Poly {
        v.iter().map(|&c| BigInt::from(c)).collect()
    }

    fn mul(a: &[BigInt], b: &[BigInt]) -> Poly {
        let mut out = vec![BigInt::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    }

    #[test]
    fn squarefree_parts() {
        // (36t+1)^4 (693t-1)
        let mut f = p(&[-1, 693]);
        for _ in 0..4 {
            f = mul(&f, &p(&[1, 36]));
        }
        let sf = squarefree(&f);
        assert_eq!(sf, vec![(p(&[-1, 693]), 1), (p(&[1, 36]), 4)]);
        let (roots, rest) = rational_roots(&sf[1].0);
        assert_eq!(roots, vec![BigRational::new((-1).into(), 36.into())]);
        assert_eq!(degree(&rest), 0);
    }

    #[test]
    fn cubic_leading_poly() {
        let f = p(&[1, 0, 0, -729]);
        let sf = squarefree(&f);
        assert_eq!(sf.len(), 1);
        let (roots, rest) = rational_roots(&sf[0].0);
        assert_eq!(roots, vec![BigRational::new(1.into(), 9.into())]);
        assert_eq!(rest, p(&[1, 9, 81]));
        let zs = complex_roots(&rest);
        for z in zs {
            assert!(eval_c(&rest, z).norm() < 1e-12);
            assert!((z.norm() - 1.0 / 9.0).abs() < 1e-14);
            assert!(root_radius(&rest, z) < 1e-12);
        }
    }

    #[test]
    fn zero_root_and_gcd() {
        let f = p(&[0, 2, -2]);
        let (roots, rest) = rational_roots(&primitive(&f));
        assert_eq!(roots, vec![BigRational::zero(), BigRational::one()]);
        assert_eq!(degree(&rest), 0);
        assert_eq!(gcd(&p(&[-1, 0, 1]), &p(&[1, 2, 1])), p(&[1, 1]));
    }
}
