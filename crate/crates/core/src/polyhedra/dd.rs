//! Double description method over the integers.
//!
//! Computes the extreme rays and a lineality basis of `{x : <a, x> >= 0 for all a}`.
//! Rays are kept primitive; intermediate values are exact `BigInt`s.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::lattice::{hnf, IntMatrix};

pub(crate) type BVec = Vec<BigInt>;

#[derive(Clone, Debug, Default)]
pub(crate) struct DdResult {
    pub rays: Vec<BVec>,
    pub lineality: Vec<BVec>,
}

pub(crate) fn dot(a: &[BigInt], b: &[BigInt]) -> BigInt {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn make_primitive(mut v: BVec) -> BVec {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
    v
}

fn combine(ca: &BigInt, a: &[BigInt], cb: &BigInt, b: &[BigInt]) -> BVec {
    make_primitive(a.iter().zip(b).map(|(x, y)| ca * x + cb * y).collect())
}

pub(crate) fn to_big(v: &[i64]) -> BVec {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Extreme rays and lineality of the cone cut out by `constraints` in `R^dim`.
pub(crate) fn double_description(dim: usize, constraints: &[BVec]) -> DdResult {
    let mut lineality: Vec<BVec> = (0..dim)
        .map(|i| (0..dim).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect();
    let mut rays: Vec<BVec> = Vec::new();
    let mut processed: Vec<&BVec> = Vec::new();

    for a in constraints {
        if a.iter().all(Zero::is_zero) {
            continue;
        }
        if let Some(pos) = lineality.iter().position(|l| !dot(a, l).is_zero()) {
            let mut l0 = lineality.swap_remove(pos);
            let mut v0 = dot(a, &l0);
            if v0.is_negative() {
                l0.iter_mut().for_each(|x| *x = -std::mem::take(x));
                v0 = -v0;
            }
            lineality = lineality
                .iter()
                .map(|l| {
                    let vl = dot(a, l);
                    combine(&v0, l, &-vl, &l0)
                })
                .collect();
            rays = rays
                .iter()
                .map(|r| {
                    let vr = dot(a, r);
                    combine(&v0, r, &-vr, &l0)
                })
                .collect();
            rays.push(l0);
            processed.push(a);
            continue;
        }

        let vals: Vec<BigInt> = rays.iter().map(|r| dot(a, r)).collect();
        if vals.iter().all(|v| !v.is_negative()) {
            processed.push(a);
            continue;
        }
        let zero_sets: Vec<Vec<bool>> =
            rays.iter().map(|r| processed.iter().map(|c| dot(c, r).is_zero()).collect()).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_positive()).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&i| vals[i].is_negative()).collect();
        let mut next: Vec<BVec> = (0..rays.len()).filter(|&i| !vals[i].is_negative()).map(|i| rays[i].clone()).collect();
        for &p in &pos {
            for &n in &neg {
                let common: Vec<bool> = zero_sets[p].iter().zip(&zero_sets[n]).map(|(x, y)| *x && *y).collect();
                let blocked = (0..rays.len()).any(|r| {
                    r != p && r != n && common.iter().zip(&zero_sets[r]).all(|(c, z)| !*c || *z)
                });
                if !blocked {
                    next.push(combine(&vals[p], &rays[n], &-&vals[n], &rays[p]));
                }
            }
        }
        rays = next;
        processed.push(a);
    }

    rays.sort();
    rays.dedup();
    DdResult { rays, lineality: canonical_lineality(dim, lineality) }
}

/// A deterministic basis of the span of `vs` (row HNF).
pub(crate) fn canonical_lineality(dim: usize, vs: Vec<BVec>) -> Vec<BVec> {
    if vs.is_empty() {
        return vs;
    }
    let m = IntMatrix::from_rows(dim, &vs);
    let (h, _) = hnf(&m);
    h.rows_iter().filter(|r| r.iter().any(|x| !x.is_zero())).map(|r| make_primitive(r.to_vec())).collect()
}
