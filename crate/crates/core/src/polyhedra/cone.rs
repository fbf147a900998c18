use num_traits::ToPrimitive;

use super::dd::{double_description, to_big, BVec, DdResult};
use crate::IVec;

/// Rational polyhedral cone with both descriptions kept in sync.
///
/// `rays` are the extreme rays of the pointed part and `lineality` a basis of
/// the lineality space; `facets` and `equations` play the same roles for the
/// dual cone. All vectors are primitive and canonically sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cone {
    dim: usize,
    rays: Vec<IVec>,
    lineality: Vec<IVec>,
    facets: Vec<IVec>,
    equations: Vec<IVec>,
}

fn to_small(v: &BVec) -> IVec {
    v.iter().map(|x| x.to_i64().expect("cone coordinate overflow")).collect()
}

fn sorted_small(vs: &[BVec]) -> Vec<IVec> {
    let mut out: Vec<IVec> = vs.iter().map(to_small).collect();
    out.sort();
    out.dedup();
    out
}

fn with_negatives(vs: &[IVec]) -> Vec<IVec> {
    vs.iter().flat_map(|v| [v.clone(), v.iter().map(|x| -x).collect()]).collect()
}

fn generators_of(dd: &DdResult) -> Vec<BVec> {
    let mut out: Vec<BVec> = dd.rays.clone();
    for l in &dd.lineality {
        out.push(l.clone());
        out.push(l.iter().map(|x| -x).collect());
    }
    out
}

impl Cone {
    fn assemble(dim: usize, primal: DdResult, dual: DdResult) -> Cone {
        Cone {
            dim,
            rays: sorted_small(&primal.rays),
            lineality: sorted_small(&primal.lineality),
            facets: sorted_small(&dual.rays),
            equations: sorted_small(&dual.lineality),
        }
    }

    /// The cone generated by `gens` (the zero cone when `gens` is empty).
    pub fn from_generators(dim: usize, gens: &[IVec]) -> Cone {
        let g: Vec<BVec> = gens.iter().map(|v| to_big(v)).collect();
        let dual = double_description(dim, &g);
        let primal = double_description(dim, &generators_of(&dual));
        Cone::assemble(dim, primal, dual)
    }

    /// `{x : <a, x> >= 0}` for every `a` in `normals`.
    pub fn from_inequalities(dim: usize, normals: &[IVec]) -> Cone {
        let a: Vec<BVec> = normals.iter().map(|v| to_big(v)).collect();
        let primal = double_description(dim, &a);
        let dual = double_description(dim, &generators_of(&primal));
        Cone::assemble(dim, primal, dual)
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn rays(&self) -> &[IVec] {
        &self.rays
    }

    pub fn lineality(&self) -> &[IVec] {
        &self.lineality
    }

    pub fn facets(&self) -> &[IVec] {
        &self.facets
    }

    pub fn equations(&self) -> &[IVec] {
        &self.equations
    }

    /// Rays plus both signs of each lineality vector.
    pub fn generators(&self) -> Vec<IVec> {
        let mut g = self.rays.clone();
        g.extend(with_negatives(&self.lineality));
        g
    }

    /// Facet normals plus both signs of each implicit equation.
    pub fn facet_normals(&self) -> Vec<IVec> {
        let mut g = self.facets.clone();
        g.extend(with_negatives(&self.equations));
        g
    }

    pub fn is_pointed(&self) -> bool {
        self.lineality.is_empty()
    }

    pub fn is_full_dim(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.facets.iter().all(|a| dot_i(a, v) >= 0) && self.equations.iter().all(|a| dot_i(a, v) == 0)
    }

    /// Strict inequality on every facet normal; never true for a lower-dimensional cone.
    pub fn contains_in_interior(&self, v: &[i64]) -> bool {
        self.is_full_dim() && self.facets.iter().all(|a| dot_i(a, v) > 0)
    }

    /// An integer vector strictly positive on every nonzero element of a pointed cone.
    pub(crate) fn grading(&self) -> IVec {
        let mut w = vec![0i64; self.dim];
        for f in &self.facets {
            for (wi, fi) in w.iter_mut().zip(f) {
                *wi += fi;
            }
        }
        w
    }
}

pub(crate) fn dot_i(a: &[i64], b: &[i64]) -> i64 {
    let s: i128 = a.iter().zip(b).map(|(&x, &y)| x as i128 * y as i128).sum();
    i64::try_from(s).expect("dot product overflow")
}

pub fn dual_cone(c: &Cone) -> Cone {
    Cone {
        dim: c.dim,
        rays: c.facets.clone(),
        lineality: c.equations.clone(),
        facets: c.rays.clone(),
        equations: c.lineality.clone(),
    }
}

pub fn intersect(cs: &[Cone]) -> Cone {
    assert!(!cs.is_empty(), "intersection of no cones");
    let dim = cs[0].dim;
    assert!(cs.iter().all(|c| c.dim == dim), "ambient dimension mismatch");
    let normals: Vec<IVec> = cs.iter().flat_map(Cone::facet_normals).collect();
    Cone::from_inequalities(dim, &normals)
}
