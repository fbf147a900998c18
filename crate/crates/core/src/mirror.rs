//! Laurent polynomial mirrors of toric complete intersections.

use std::collections::BTreeSet;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::laurent::{apply_mutation, LaurentError, LaurentPolynomial, Mutation};
use crate::lattice::IntMatrix;
use crate::periods::period_coeffs;
use crate::search::CITriple;
use crate::IVec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MirrorError {
    #[error("no valid choice of (E, S, s)")]
    NoValidChoice,
    #[error("choice is invalid: {0}")]
    InvalidChoice(String),
    #[error("cannot solve the monomial relations for the variables indexed by E")]
    EliminationFailure,
    #[error(transparent)]
    Laurent(#[from] LaurentError),
    #[error(transparent)]
    Period(#[from] crate::periods::PeriodError),
}

/// Index data for the construction; all indices are 1-based ray labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PrzyjalkowskiChoice {
    #[serde(rename = "E")]
    pub e: Vec<usize>,
    #[serde(rename = "S")]
    pub s: Vec<Vec<usize>>,
    #[serde(rename = "s")]
    pub dist: Vec<usize>,
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Coefficient matrix `(m_ji)` of every `D_i` in the basis `{D_j : j ∈ E}` (0-based `e`),
/// or `None` when that set is not a Z-basis.
fn matrix_in_basis(classes: &[IVec], e: &[usize]) -> Option<Vec<IVec>> {
    let r = e.len();
    let cols: Vec<IVec> = e.iter().map(|&j| classes[j].clone()).collect();
    // B has the basis classes as columns: B = cols^T
    let b = IntMatrix::from_rows(r, &cols).transpose();
    let inv = b.unimodular_inverse()?;
    let m: Vec<IVec> = (0..r)
        .map(|j| {
            classes
                .iter()
                .map(|c| (0..r).map(|k| inv.get(j, k) * c[k]).sum::<num_bigint::BigInt>().to_i64().expect("small"))
                .collect()
        })
        .collect();
    Some(m)
}

fn subsets_with_sum(avail: &[usize], classes: &[IVec], target: &[i64]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let n = avail.len();
    for mask in 1u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|&k| mask >> k & 1 == 1).map(|k| avail[k]).collect();
        let mut s = vec![0i64; target.len()];
        for &i in &idx {
            for (a, x) in s.iter_mut().zip(&classes[i]) {
                *a += x;
            }
        }
        if s == target {
            out.push(idx);
        }
    }
    out.sort();
    out
}

/// All valid choices in deterministic order (E lexicographic, then S, then s);
/// `limit` stops early.
pub fn valid_choices(t: &CITriple, limit: Option<usize>) -> Result<Vec<PrzyjalkowskiChoice>, MirrorError> {
    let classes = t.ambient.divisor_classes();
    let n = classes.len();
    let r = t.ambient.pic_rank();
    let cap = limit.unwrap_or(usize::MAX);
    let mut out = Vec::new();
    for e in combinations(n, r) {
        // {D_j : j in E} must be a Z-basis in which each L_m has nonnegative coordinates
        let nonneg = t
            .bundles
            .iter()
            .all(|l| coords_in_basis(&classes, &e, l).is_some_and(|v| v.iter().all(|&x| x >= 0)));
        if !nonneg {
            continue;
        }
        let avail: Vec<usize> = (0..n).filter(|i| !e.contains(i)).collect();
        collect_s(&avail, &classes, &t.bundles, 0, &mut Vec::new(), &mut |ss| {
            let dists = ss.iter().fold(vec![Vec::new()], |acc: Vec<Vec<usize>>, s| {
                acc.into_iter().flat_map(|p| s.iter().map(move |&x| [p.clone(), vec![x]].concat())).collect()
            });
            for dist in dists {
                if out.len() >= cap {
                    return;
                }
                out.push(PrzyjalkowskiChoice {
                    e: e.iter().map(|i| i + 1).collect(),
                    s: ss.iter().map(|s| s.iter().map(|i| i + 1).collect()).collect(),
                    dist: dist.iter().map(|i| i + 1).collect(),
                });
            }
        });
        if out.len() >= cap {
            break;
        }
    }
    if out.is_empty() {
        return Err(MirrorError::NoValidChoice);
    }
    Ok(out)
}

fn coords_in_basis(classes: &[IVec], e: &[usize], l: &[i64]) -> Option<IVec> {
    let r = e.len();
    let cols: Vec<IVec> = e.iter().map(|&j| classes[j].clone()).collect();
    let inv = IntMatrix::from_rows(r, &cols).transpose().unimodular_inverse()?;
    Some((0..r).map(|j| (0..r).map(|k| inv.get(j, k) * l[k]).sum::<num_bigint::BigInt>().to_i64().expect("small")).collect())
}

fn collect_s(
    avail: &[usize],
    classes: &[IVec],
    bundles: &[IVec],
    m: usize,
    stack: &mut Vec<Vec<usize>>,
    emit: &mut dyn FnMut(&[Vec<usize>]),
) {
    if m == bundles.len() {
        emit(stack);
        return;
    }
    for s in subsets_with_sum(avail, classes, &bundles[m]) {
        let rest: Vec<usize> = avail.iter().copied().filter(|i| !s.contains(i)).collect();
        stack.push(s);
        collect_s(&rest, classes, bundles, m + 1, stack, emit);
        stack.pop();
    }
}

fn check_choice(t: &CITriple, ch: &PrzyjalkowskiChoice) -> Result<(), MirrorError> {
    let n = t.ambient.fan.rays.len();
    let bad = |msg: &str| Err(MirrorError::InvalidChoice(msg.to_string()));
    if ch.s.len() != t.codim() || ch.dist.len() != t.codim() {
        return bad("one subset and one distinguished index per bundle");
    }
    if ch.e.len() != t.ambient.pic_rank() {
        return bad("|E| must equal the Picard rank");
    }
    let mut seen = BTreeSet::new();
    for &i in ch.e.iter().chain(ch.s.iter().flatten()) {
        if i == 0 || i > n || !seen.insert(i) {
            return bad("E and the S_m must be disjoint subsets of 1..N");
        }
    }
    let classes = t.ambient.divisor_classes();
    for (m, s) in ch.s.iter().enumerate() {
        if !s.contains(&ch.dist[m]) {
            return bad("s_m must lie in S_m");
        }
        let mut sum = vec![0i64; t.ambient.pic_rank()];
        for &i in s {
            for (a, x) in sum.iter_mut().zip(&classes[i - 1]) {
                *a += x;
            }
        }
        if sum != t.bundles[m] {
            return bad("the classes in S_m must sum to L_m");
        }
    }
    Ok(())
}

/// The Laurent polynomial `W - c` of the construction, normalized to have
/// zero constant term. Variables are `y_i` (`i ∈ S_m°`) and the surviving
/// `x_i`, ordered by index.
pub fn build_mirror(t: &CITriple, ch: &PrzyjalkowskiChoice) -> Result<LaurentPolynomial, MirrorError> {
    check_choice(t, ch)?;
    let classes = t.ambient.divisor_classes();
    let n = classes.len();
    let e0: Vec<usize> = ch.e.iter().map(|i| i - 1).collect();
    let m = matrix_in_basis(&classes, &e0).ok_or(MirrorError::EliminationFailure)?;

    // which part each index belongs to
    let mut part: Vec<Option<usize>> = vec![None; n];
    for (k, s) in ch.s.iter().enumerate() {
        for &i in s {
            part[i - 1] = Some(k);
        }
    }
    let dist0: Vec<usize> = ch.dist.iter().map(|i| i - 1).collect();
    let vars: Vec<usize> = (0..n).filter(|i| !e0.contains(i) && !dist0.contains(i)).collect();
    let nv = vars.len();
    let names: Vec<String> =
        vars.iter().map(|&i| if part[i].is_some() { format!("y{}", i + 1) } else { format!("x{}", i + 1) }).collect();
    let var_of = |i: usize| vars.iter().position(|&v| v == i);

    // F_m = 1 + sum_{k ∈ S_m°} y_k
    let f: Vec<LaurentPolynomial> = ch
        .s
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let mut p = LaurentPolynomial::one(nv);
            for &i in s {
                if i - 1 != dist0[k] {
                    p = p.add(&LaurentPolynomial::var(nv, var_of(i - 1).expect("y variable")));
                }
            }
            p
        })
        .collect();

    let mut w = LaurentPolynomial::zero(nv);
    for row in &m {
        // x_{E_j} = prod_{i ∉ E} x_i^{-m_ji}
        let mut mono = vec![0i64; nv];
        let mut fpow = vec![0i64; ch.s.len()];
        for i in (0..n).filter(|i| !e0.contains(i)) {
            let mji = row[i];
            if mji == 0 {
                continue;
            }
            if let Some(v) = var_of(i) {
                mono[v] -= mji;
            }
            if let Some(k) = part[i] {
                // x_i carries a factor F_k^{-1}
                fpow[k] += mji;
            }
        }
        if fpow.iter().any(|&p| p < 0) {
            return Err(MirrorError::Laurent(LaurentError::NotLaurent));
        }
        let mut term = LaurentPolynomial::monomial(mono, num_rational::BigRational::from_integer(1.into()));
        for (k, &p) in fpow.iter().enumerate() {
            term = term.mul(&f[k].pow(p as u32));
        }
        w = w.add(&term);
    }
    for (i, p) in part.iter().enumerate() {
        if p.is_none() && !e0.contains(&i) {
            w = w.add(&LaurentPolynomial::var(nv, var_of(i).expect("free variable")));
        }
    }
    let c0 = w.constant_term();
    if !c0.is_zero() {
        w = w.sub(&LaurentPolynomial::constant(nv, c0));
    }
    Ok(w.with_names(names))
}

/// Exact pullback comparison plus agreement of the first `n_terms` period coefficients.
pub fn verify_mutation(
    f: &LaurentPolynomial,
    g: &LaurentPolynomial,
    phi: &Mutation,
    n_terms: usize,
) -> Result<bool, MirrorError> {
    let pulled = match apply_mutation(f, phi) {
        Ok(p) => p,
        Err(LaurentError::NotLaurent) => return Ok(false),
        Err(e) => return Err(e.into()),
    };
    if &pulled != g {
        return Ok(false);
    }
    let pf = period_coeffs(f, n_terms)?;
    let pg = period_coeffs(g, n_terms)?;
    Ok(pf.coeffs == pg.coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laurent::int;
    use crate::toric::{validate_fan, Fan, ToricFano};
    use std::sync::Arc;

    fn projective(n: usize) -> Arc<ToricFano> {
        let mut rays: Vec<IVec> = (0..n)
            .map(|i| {
                let mut e = vec![0; n];
                e[i] = 1;
                e
            })
            .collect();
        rays.push(vec![-1; n]);
        let cones = (0..=n).map(|skip| (0..=n).filter(|&i| i != skip).collect()).collect();
        Arc::new(validate_fan(&Fan::new(rays, cones)).unwrap())
    }

    pub(crate) fn bundle_example() -> Arc<ToricFano> {
        let rays = vec![
            vec![1, 0, 1, 1, 0],
            vec![0, 1, 0, 0, 0],
            vec![-1, -1, 0, 0, 0],
            vec![0, 0, 1, 0, 0],
            vec![0, 0, 0, 1, 0],
            vec![0, 0, 0, 0, 1],
            vec![0, 0, -1, -1, -1],
        ];
        let mut cones = Vec::new();
        for b in 0..3 {
            for f in 3..7 {
                cones.push((0..7).filter(|&i| i != b && i != f).collect());
            }
        }
        Arc::new(validate_fan(&Fan::new(rays, cones)).unwrap())
    }

    fn lp(n: usize, t: &[(IVec, i64)]) -> LaurentPolynomial {
        LaurentPolynomial::from_int_terms(n, t)
    }

    /// (1 + a + b)^k in the given variable slots.
    fn one_plus(n: usize, a: usize, b: usize, k: u32) -> LaurentPolynomial {
        let mut p = LaurentPolynomial::one(n);
        p = p.add(&LaurentPolynomial::var(n, a)).add(&LaurentPolynomial::var(n, b));
        p.pow(k)
    }

    fn mono(n: usize, e: IVec) -> LaurentPolynomial {
        let _ = n;
        LaurentPolynomial::monomial(e, int(1))
    }

    #[test]
    fn cubic_choices_and_mirror() {
        let t = CITriple::new(projective(5), vec![vec![3]]).unwrap();
        let all = valid_choices(&t, None).unwrap();
        let standard = PrzyjalkowskiChoice { e: vec![6], s: vec![vec![1, 2, 3]], dist: vec![1] };
        assert!(all.contains(&standard));
        // 6 choices of E, C(5,3) subsets, 3 distinguished elements
        assert_eq!(all.len(), 6 * 10 * 3);
        let f = build_mirror(&t, &all[0]).unwrap();
        assert_eq!(f.n_vars(), 4);
        // E = {1}, S = {2,3,4}, s = 2: variables y3, y4, x5, x6
        assert_eq!(f.names(), &["y3", "y4", "x5", "x6"]);
        let expected = one_plus(4, 0, 1, 3).mul(&mono(4, vec![-1, -1, -1, -1])).add(&lp(4, &[(vec![0, 0, 1, 0], 1), (vec![0, 0, 0, 1], 1)]));
        assert_eq!(f, expected);
    }

    #[test]
    fn three_three_mirror_has_shift() {
        let t = CITriple::new(projective(6), vec![vec![3], vec![3]]).unwrap();
        let ch = valid_choices(&t, Some(1)).unwrap().remove(0);
        let f = build_mirror(&t, &ch).unwrap();
        let base = one_plus(4, 0, 1, 3).mul(&one_plus(4, 2, 3, 3)).mul(&mono(4, vec![-1, -1, -1, -1]));
        assert_eq!(f, base.sub(&LaurentPolynomial::constant(4, int(36))));
    }

    #[test]
    fn bundle_example_mirrors() {
        let y = bundle_example();
        let t = CITriple::with_nef_bundles(y, vec![vec![2, 1]]).unwrap();
        let all = valid_choices(&t, None).unwrap();
        let c1 = PrzyjalkowskiChoice { e: vec![3, 4], s: vec![vec![1, 2, 5]], dist: vec![1] };
        let c2 = PrzyjalkowskiChoice { e: vec![3, 4], s: vec![vec![1, 6]], dist: vec![1] };
        assert!(all.contains(&c1) && all.contains(&c2));
        let f = build_mirror(&t, &c1).unwrap();
        assert_eq!(f.names(), &["y2", "y5", "x6", "x7"]);
        // (1+y2+y5)^2/(y2 x6 x7) + (1+y2+y5)/(y5 x6 x7) + x6 + x7
        let expected = one_plus(4, 0, 1, 2)
            .mul(&mono(4, vec![-1, 0, -1, -1]))
            .add(&one_plus(4, 0, 1, 1).mul(&mono(4, vec![0, -1, -1, -1])))
            .add(&lp(4, &[(vec![0, 0, 1, 0], 1), (vec![0, 0, 0, 1], 1)]));
        assert_eq!(f, expected);
        let g = build_mirror(&t, &c2).unwrap();
        assert_eq!(g.names(), &["x2", "x5", "y6", "x7"]);
        // x2 + (1+y6)^2/(x2 y6 x7) + (1+y6)/(x5 y6 x7) + x5 + x7
        let one_y6 = LaurentPolynomial::one(4).add(&LaurentPolynomial::var(4, 2));
        let expected_g = lp(4, &[(vec![1, 0, 0, 0], 1), (vec![0, 1, 0, 0], 1), (vec![0, 0, 0, 1], 1)])
            .add(&one_y6.pow(2).mul(&mono(4, vec![-1, 0, -1, -1])))
            .add(&one_y6.mul(&mono(4, vec![0, -1, -1, -1])));
        assert_eq!(g, expected_g);
    }

    #[test]
    fn invalid_choices_are_rejected() {
        let t = CITriple::new(projective(5), vec![vec![3]]).unwrap();
        let bad = PrzyjalkowskiChoice { e: vec![1], s: vec![vec![1, 2, 3]], dist: vec![1] };
        assert!(matches!(build_mirror(&t, &bad), Err(MirrorError::InvalidChoice(_))));
        let bad = PrzyjalkowskiChoice { e: vec![1], s: vec![vec![2, 3]], dist: vec![2] };
        assert!(matches!(build_mirror(&t, &bad), Err(MirrorError::InvalidChoice(_))));
    }

    #[test]
    fn bundle_example_mutation() {
        let y = bundle_example();
        let t = CITriple::with_nef_bundles(y, vec![vec![2, 1]]).unwrap();
        let f = build_mirror(&t, &PrzyjalkowskiChoice { e: vec![3, 4], s: vec![vec![1, 2, 5]], dist: vec![1] }).unwrap();
        let g = build_mirror(&t, &PrzyjalkowskiChoice { e: vec![3, 4], s: vec![vec![1, 6]], dist: vec![1] }).unwrap();
        // (y2, y5, x6, x7) = (x2/(x5 y6), 1/y6, x7, x2 + x5)
        let one = LaurentPolynomial::one(4);
        let phi = Mutation::new(
            vec![mono(4, vec![1, -1, -1, 0]), mono(4, vec![0, 0, -1, 0]), mono(4, vec![0, 0, 0, 1]), lp(4, &[(vec![1, 0, 0, 0], 1), (vec![0, 1, 0, 0], 1)])],
            vec![one.clone(), one.clone(), one.clone(), one.clone()],
        );
        // (x2, x5, y6, x7) = (y2 x7/(y2+y5), y5 x7/(y2+y5), 1/y5, x6)
        let s = lp(4, &[(vec![1, 0, 0, 0], 1), (vec![0, 1, 0, 0], 1)]);
        let inv = Mutation::new(
            vec![mono(4, vec![1, 0, 0, 1]), mono(4, vec![0, 1, 0, 1]), mono(4, vec![0, -1, 0, 0]), mono(4, vec![0, 0, 1, 0])],
            vec![s.clone(), s, one.clone(), one],
        );
        let phi = phi.with_inverse(inv);
        assert_eq!(phi.verify_inverse(), Some(true));
        assert_eq!(apply_mutation(&f, &phi).unwrap(), g);
        assert!(verify_mutation(&f, &g, &phi, 20).unwrap());
        assert!(!verify_mutation(&f, &f, &phi, 20).unwrap());
    }
}
