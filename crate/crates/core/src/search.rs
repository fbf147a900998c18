//! Enumeration of complete-intersection data `(X; Y; L_1, ..., L_c)` with
//! `X` four-dimensional and Fano.

use std::collections::BTreeSet;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::polyhedra::{dot_i, hilbert_basis, Cone, LatticePolytope, PolyhedraError};
use crate::toric::{ci_degree, ci_euler, class_sum, is_ample, is_nef, ToricError, ToricFano};
use crate::IVec;

/// Dimension of the complete intersections searched for.
pub const TARGET_DIM: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("ambient dimension {0} is outside 5..=8")]
    WrongDimension(usize),
    #[error("cannot split {have} elements into {need} nonempty parts")]
    TooFewElements { have: usize, need: usize },
    #[error("expected {expected} bundles, got {found}")]
    WrongCodimension { expected: usize, found: usize },
    #[error("bundle {0:?} is zero or not nef")]
    BadBundle(IVec),
    #[error("-K - Lambda = {0:?} is not ample")]
    NotAmple(IVec),
    #[error(transparent)]
    Polyhedra(#[from] PolyhedraError),
    #[error(transparent)]
    Toric(#[from] ToricError),
}

/// Complete-intersection data; bundles are sorted. Smoothness of `X` is
/// assumed (generic section of globally generated bundles), never checked.
#[derive(Debug, Clone)]
pub struct CITriple {
    pub ambient: Arc<ToricFano>,
    pub bundles: Vec<IVec>,
    pub lambda: IVec,
}

impl PartialEq for CITriple {
    fn eq(&self, other: &Self) -> bool {
        self.ambient.fan == other.ambient.fan && self.bundles == other.bundles
    }
}

impl CITriple {
    /// Checks that every bundle is nef and nonzero, `c = dim Y - 4`, and `-K - Lambda` is ample.
    pub fn new(ambient: Arc<ToricFano>, bundles: Vec<IVec>) -> Result<Self, SearchError> {
        let t = Self::with_nef_bundles(ambient, bundles)?;
        let rest = t.anticanonical_of_x();
        if !is_ample(&t.ambient, &rest) {
            return Err(SearchError::NotAmple(rest));
        }
        Ok(t)
    }

    /// Like [`CITriple::new`] without the ampleness condition on `-K - Lambda`.
    pub fn with_nef_bundles(ambient: Arc<ToricFano>, mut bundles: Vec<IVec>) -> Result<Self, SearchError> {
        let d = ambient.dim();
        if d < TARGET_DIM || bundles.len() != d - TARGET_DIM {
            return Err(SearchError::WrongCodimension { expected: d.saturating_sub(TARGET_DIM), found: bundles.len() });
        }
        for b in &bundles {
            if b.len() != ambient.pic_rank() || b.iter().all(|&x| x == 0) || !is_nef(&ambient, b) {
                return Err(SearchError::BadBundle(b.clone()));
            }
        }
        bundles.sort();
        let lambda = class_sum(&bundles, ambient.pic_rank());
        Ok(CITriple { ambient, bundles, lambda })
    }

    pub fn codim(&self) -> usize {
        self.bundles.len()
    }

    /// `-K_Y - Lambda`, whose restriction is `-K_X`.
    pub fn anticanonical_of_x(&self) -> IVec {
        self.ambient.anticanonical.iter().zip(&self.lambda).map(|(a, b)| a - b).collect()
    }

    pub fn degree(&self) -> Result<i64, ToricError> {
        ci_degree(&self.ambient, &self.bundles)
    }

    pub fn euler(&self) -> Result<i64, ToricError> {
        ci_euler(&self.ambient, &self.bundles)
    }
}

/// Lattice points of `NC(Y) ∩ (-K - NC(Y))` with `-K - Lambda` ample, sorted.
pub fn find_lambdas(y: &ToricFano) -> Result<Vec<IVec>, SearchError> {
    let r = y.pic_rank();
    let mut a = Vec::new();
    let mut b = Vec::new();
    for f in y.nef.facet_normals() {
        a.push(f.iter().map(|x| -x).collect());
        b.push(0);
        b.push(dot_i(&f, &y.anticanonical));
        a.push(f);
    }
    let p = LatticePolytope::new(r, a, b)?;
    let pts = p.lattice_points()?;
    Ok(pts
        .into_iter()
        .filter(|l| {
            let rest: IVec = y.anticanonical.iter().zip(l).map(|(k, x)| k - x).collect();
            is_ample(y, &rest)
        })
        .collect())
}

/// All multisets of `basis` elements summing to `lambda`, each sorted, the list sorted.
pub fn decompose_hilbert(lambda: &[i64], basis: &[IVec]) -> Vec<Vec<IVec>> {
    let r = lambda.len();
    let mut basis: Vec<IVec> = basis.to_vec();
    basis.sort();
    basis.dedup();
    basis.retain(|b| b.iter().any(|&x| x != 0));
    if basis.is_empty() {
        return if lambda.iter().all(|&x| x == 0) { vec![Vec::new()] } else { Vec::new() };
    }
    let cone = Cone::from_generators(r, &basis);
    if !cone.is_pointed() {
        panic!("decompose_hilbert needs a basis of a pointed cone");
    }
    let mut out = Vec::new();
    let mut cur = Vec::new();
    knapsack(lambda, &basis, 0, &cone, &mut cur, &mut out);
    out.sort();
    out
}

fn knapsack(rest: &[i64], basis: &[IVec], from: usize, cone: &Cone, cur: &mut Vec<IVec>, out: &mut Vec<Vec<IVec>>) {
    if rest.iter().all(|&x| x == 0) {
        out.push(cur.clone());
        return;
    }
    if !cone.contains(rest) {
        return;
    }
    for (i, b) in basis.iter().enumerate().skip(from) {
        let next: IVec = rest.iter().zip(b).map(|(x, y)| x - y).collect();
        if cone.contains(&next) {
            cur.push(b.clone());
            knapsack(&next, basis, i, cone, cur, out);
            cur.pop();
        }
    }
}

/// Sums of the parts of every partition of `ms` into `c` nonempty parts, as sorted tuples.
pub fn partitions_into_bundles(ms: &[IVec], c: usize) -> Result<Vec<Vec<IVec>>, SearchError> {
    if c == 0 || ms.len() < c {
        return Err(SearchError::TooFewElements { have: ms.len(), need: c });
    }
    let r = ms[0].len();
    let mut seen: BTreeSet<Vec<IVec>> = BTreeSet::new();
    // restricted growth strings: labels[i] <= max(labels[..i]) + 1
    let mut labels = vec![0usize; ms.len()];
    fn rec(i: usize, used: usize, c: usize, ms: &[IVec], r: usize, labels: &mut Vec<usize>, seen: &mut BTreeSet<Vec<IVec>>) {
        if ms.len() - i < c - used {
            return;
        }
        if i == ms.len() {
            let mut parts = vec![vec![0i64; r]; c];
            for (m, &l) in ms.iter().zip(labels.iter()) {
                for (a, x) in parts[l].iter_mut().zip(m) {
                    *a += x;
                }
            }
            parts.sort();
            seen.insert(parts);
            return;
        }
        for l in 0..=used.min(c - 1) {
            labels[i] = l;
            rec(i + 1, used.max(l + 1), c, ms, r, labels, seen);
        }
    }
    rec(0, 0, c, ms, r, &mut labels, &mut seen);
    Ok(seen.into_iter().collect())
}

/// Every triple over `y` with nonzero nef bundles and `-K - Lambda` ample,
/// deduplicated by the sorted bundle tuple and sorted.
pub fn enumerate_triples(y: &Arc<ToricFano>) -> Result<Vec<CITriple>, SearchError> {
    let d = y.dim();
    if !(5..=8).contains(&d) {
        return Err(SearchError::WrongDimension(d));
    }
    let c = d - TARGET_DIM;
    let hb = hilbert_basis(&y.nef)?;
    let lambdas = find_lambdas(y)?;
    let tuples: Vec<Vec<Vec<IVec>>> = lambdas
        .par_iter()
        .filter(|l| l.iter().any(|&x| x != 0))
        .map(|l| {
            let mut acc = BTreeSet::new();
            for ms in decompose_hilbert(l, &hb) {
                if ms.len() >= c {
                    acc.extend(partitions_into_bundles(&ms, c).expect("enough elements"));
                }
            }
            acc.into_iter().collect()
        })
        .collect();
    let all: BTreeSet<Vec<IVec>> = tuples.into_iter().flatten().collect();
    all.into_iter().map(|b| CITriple::new(y.clone(), b)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toric::{validate_fan, Fan};
    use proptest::prelude::*;

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

    fn p1xp1() -> Arc<ToricFano> {
        let f = Fan::new(
            vec![vec![1, 0], vec![-1, 0], vec![0, 1], vec![0, -1]],
            vec![vec![0, 2], vec![2, 1], vec![1, 3], vec![3, 0]],
        );
        Arc::new(validate_fan(&f).unwrap())
    }

    #[test]
    fn lambdas_of_p5_and_p1xp1() {
        let l = find_lambdas(&projective(5)).unwrap();
        assert_eq!(l, (0..=5).map(|k| vec![k]).collect::<Vec<_>>());
        let q = p1xp1();
        assert_eq!(q.anticanonical, vec![2, 2]);
        assert_eq!(find_lambdas(&q).unwrap(), vec![vec![0, 0], vec![0, 1], vec![1, 0], vec![1, 1]]);
    }

    #[test]
    fn decompositions() {
        assert_eq!(decompose_hilbert(&[3], &[vec![1]]), vec![vec![vec![1]; 3]]);
        assert_eq!(decompose_hilbert(&[2, 1], &[vec![1, 0], vec![0, 1]]), vec![vec![vec![0, 1], vec![1, 0], vec![1, 0]]]);
        let got = decompose_hilbert(&[2, 2], &[vec![1, 0], vec![1, 1], vec![1, 2]]);
        assert_eq!(got, vec![vec![vec![1, 0], vec![1, 2]], vec![vec![1, 1], vec![1, 1]]]);
        assert!(decompose_hilbert(&[-1], &[vec![1]]).is_empty());
    }

    #[test]
    fn partitions_of_three_h() {
        let h = vec![1];
        let ms = vec![h.clone(), h.clone(), h.clone()];
        assert_eq!(partitions_into_bundles(&ms, 1).unwrap(), vec![vec![vec![3]]]);
        assert_eq!(partitions_into_bundles(&ms, 2).unwrap(), vec![vec![vec![1], vec![2]]]);
        assert_eq!(partitions_into_bundles(&ms, 3).unwrap(), vec![vec![vec![1], vec![1], vec![1]]]);
        assert_eq!(partitions_into_bundles(&ms, 4), Err(SearchError::TooFewElements { have: 3, need: 4 }));
    }

    fn stirling2(n: usize, k: usize) -> usize {
        if n == 0 && k == 0 {
            return 1;
        }
        if n == 0 || k == 0 {
            return 0;
        }
        k * stirling2(n - 1, k) + stirling2(n - 1, k - 1)
    }

    #[test]
    fn partition_counts_are_stirling_numbers() {
        for n in 1..=6 {
            // distinct powers of two keep part sums distinct
            let ms: Vec<IVec> = (0..n).map(|i| vec![1 << i]).collect();
            for c in 1..=n {
                assert_eq!(partitions_into_bundles(&ms, c).unwrap().len(), stirling2(n, c), "n={n} c={c}");
            }
        }
    }

    #[test]
    fn triples_of_p5_and_p6() {
        let t = enumerate_triples(&projective(5)).unwrap();
        assert_eq!(t.iter().map(|t| t.bundles.clone()).collect::<Vec<_>>(), (1..=5).map(|k| vec![vec![k]]).collect::<Vec<_>>());
        let t = enumerate_triples(&projective(6)).unwrap();
        assert_eq!(t.len(), 9);
        for tr in &t {
            assert!(tr.bundles.iter().all(|b| b[0] >= 1));
            assert!(tr.lambda[0] <= 6);
        }
        assert_eq!(enumerate_triples(&projective(4)).unwrap_err(), SearchError::WrongDimension(4));
    }

    #[test]
    fn triple_constructor_checks() {
        let y = projective(5);
        assert!(CITriple::new(y.clone(), vec![vec![6]]).is_err());
        assert!(CITriple::new(y.clone(), vec![vec![0]]).is_err());
        assert!(CITriple::new(y.clone(), vec![vec![1], vec![1]]).is_err());
        let t = CITriple::new(y, vec![vec![3]]).unwrap();
        assert_eq!(t.degree().unwrap(), 243);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn decompositions_sum_back(a in 0i64..=4, b in 0i64..=4) {
            let basis = vec![vec![1, 0], vec![1, 1], vec![1, 2]];
            for ms in decompose_hilbert(&[a + b, b], &basis) {
                prop_assert_eq!(class_sum(&ms, 2), vec![a + b, b]);
                prop_assert!(ms.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }
}
