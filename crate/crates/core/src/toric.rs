//! Smooth complete toric Fano manifolds: validation, nef cone, divisor
//! polytopes and intersection theory on the class group.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{gale_dual, GaleDual, IntMatrix, LatticeError};
use crate::polyhedra::{intersect, Cone, LatticePolytope};
use crate::IVec;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ToricError {
    #[error("malformed fan: {0}")]
    MalformedFan(String),
    #[error("maximal cone {cone} has determinant {det}")]
    NotSmooth { cone: usize, det: String },
    #[error("fan is not complete: {0}")]
    NotComplete(String),
    #[error("anticanonical class is not ample")]
    NotFano,
    #[error("class {0:?} is not nef")]
    NotNef(IVec),
    #[error("expected {expected} classes, got {found}")]
    WrongArity { expected: usize, found: usize },
    #[error("integer overflow")]
    Overflow,
}

impl From<LatticeError> for ToricError {
    fn from(e: LatticeError) -> Self {
        ToricError::MalformedFan(e.to_string())
    }
}

/// Rays plus maximal cones (index sets into `rays`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fan {
    pub rays: Vec<IVec>,
    #[serde(rename = "cones")]
    pub max_cones: Vec<Vec<usize>>,
}

impl Fan {
    pub fn new(rays: Vec<IVec>, max_cones: Vec<Vec<usize>>) -> Fan {
        Fan { rays, max_cones }
    }

    pub fn dim(&self) -> usize {
        self.rays.first().map_or(0, Vec::len)
    }

    fn cone_matrix(&self, cone: &[usize]) -> IntMatrix {
        let rows: Vec<IVec> = cone.iter().map(|&i| self.rays[i].clone()).collect();
        IntMatrix::from_rows(self.dim(), &rows)
    }
}

/// Per-cone data for equivariant localization: the dual basis of each smooth cone.
#[derive(Debug)]
struct Localization {
    /// `g[s][k] = <c, w_{s,k}>` for a generic `c`; `w_{s,k}` dual to ray `cones[s][k]`.
    g: Vec<Vec<BigInt>>,
    /// `prod_k (-g[s][k])`.
    den: Vec<BigInt>,
}

/// Intersection numbers of monomials in a fixed basis of nef classes.
#[derive(Debug)]
struct IntersectionTable {
    /// Rows are the basis classes `n_j` (nef, linearly independent).
    basis: Vec<IVec>,
    /// Coordinates change: `lambda = x * basis`, so `x = lambda * inv`.
    inv: Vec<Vec<BigRational>>,
    /// `n^beta` for every exponent vector `beta` with `|beta| = d`.
    values: HashMap<Vec<u8>, BigRational>,
}

#[derive(Debug, Clone)]
pub struct ToricFano {
    pub fan: Fan,
    pub gale: GaleDual,
    pub nef: Cone,
    pub anticanonical: IVec,
    table: OnceLock<Arc<IntersectionTable>>,
}

impl PartialEq for ToricFano {
    fn eq(&self, other: &Self) -> bool {
        self.fan == other.fan
    }
}

impl ToricFano {
    pub fn dim(&self) -> usize {
        self.fan.dim()
    }

    pub fn pic_rank(&self) -> usize {
        self.gale.pic_rank
    }

    pub fn divisor_classes(&self) -> Vec<IVec> {
        self.gale.divisor_classes()
    }

    fn localization(&self) -> Localization {
        let d = self.dim();
        let duals: Vec<Vec<IVec>> = self
            .fan
            .max_cones
            .iter()
            .map(|cone| {
                let inv = self.fan.cone_matrix(cone).unimodular_inverse().expect("smooth cone");
                // columns of B^{-1} are the dual basis vectors
                (0..d).map(|k| inv.column(k).iter().map(|x| x.to_i64().expect("dual basis overflow")).collect()).collect()
            })
            .collect();
        let bound = duals.iter().flatten().flatten().map(|x| x.abs()).max().unwrap_or(0);
        let base = 2 * bound + 1;
        // c = (1, base, base^2, ...) pairs nonzero with every nonzero vector of entries < base
        let c: Vec<BigInt> = (0..d).map(|k| num_traits::pow(BigInt::from(base), k)).collect();
        let g: Vec<Vec<BigInt>> = duals
            .iter()
            .map(|ws| ws.iter().map(|w| w.iter().zip(&c).map(|(a, b)| b * a).sum::<BigInt>()).collect())
            .collect();
        let den = g.iter().map(|gs| gs.iter().map(|x| -x).product()).collect();
        Localization { g, den }
    }

    fn table(&self) -> Arc<IntersectionTable> {
        self.table.get_or_init(|| Arc::new(self.build_table())).clone()
    }

    fn build_table(&self) -> IntersectionTable {
        let d = self.dim();
        let r = self.pic_rank();
        // greedy independent subset of nef rays
        let mut basis: Vec<IVec> = Vec::new();
        for ray in self.nef.rays() {
            let mut trial = basis.clone();
            trial.push(ray.clone());
            if IntMatrix::from_rows(r, &trial).rank() == trial.len() {
                basis = trial;
            }
        }
        assert_eq!(basis.len(), r, "nef cone is full-dimensional");
        let inv = IntMatrix::from_rows(r, &basis).rational_inverse().expect("independent basis");

        let loc = self.localization();
        // ell[s][j] = <c, v_s> for the polytope of n_j
        let reps: Vec<IVec> = basis.iter().map(|b| self.gale.representative(b)).collect();
        let ell: Vec<Vec<BigInt>> = self
            .fan
            .max_cones
            .iter()
            .zip(&loc.g)
            .map(|(cone, gs)| {
                reps.iter()
                    .map(|a| -cone.iter().zip(gs).map(|(&i, g)| g * a[i]).sum::<BigInt>())
                    .collect()
            })
            .collect();

        let mut values = HashMap::new();
        for beta in exponent_vectors(r, d) {
            let mut total = BigRational::zero();
            for (s, ls) in ell.iter().enumerate() {
                let mut num = BigInt::one();
                for (l, &e) in ls.iter().zip(&beta) {
                    num *= num_traits::pow(l.clone(), e as usize);
                }
                total += BigRational::new(num, loc.den[s].clone());
            }
            values.insert(beta, total);
        }
        IntersectionTable { basis, inv, values }
    }

    fn coords(&self, class: &[i64]) -> Vec<BigRational> {
        let t = self.table();
        let r = self.pic_rank();
        (0..r)
            .map(|j| class.iter().enumerate().map(|(i, &c)| &t.inv[i][j] * BigInt::from(c)).sum())
            .collect()
    }

    /// Evaluates a degree-`d` class polynomial (in nef-basis coordinates) on the fundamental class.
    fn integrate(&self, p: &ClassPoly) -> BigRational {
        let t = self.table();
        let d = self.dim();
        p.terms
            .iter()
            .filter(|(e, _)| e.iter().map(|&x| x as usize).sum::<usize>() == d)
            .map(|(e, c)| c * &t.values[e])
            .sum()
    }

    fn linear(&self, class: &[i64]) -> ClassPoly {
        ClassPoly::linear(&self.coords(class))
    }

    /// Basis classes used for the intersection table (nef and independent).
    pub fn nef_basis(&self) -> Vec<IVec> {
        self.table().basis.clone()
    }
}

/// Every exponent vector of length `r` and total degree `d`.
fn exponent_vectors(r: usize, d: usize) -> Vec<Vec<u8>> {
    fn rec(r: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if cur.len() + 1 == r {
            cur.push(left as u8);
            out.push(cur.clone());
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e as u8);
            rec(r, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if r == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return out;
    }
    rec(r, d, &mut Vec::new(), &mut out);
    out
}

/// Truncated polynomial in the classes of a fixed basis.
#[derive(Clone, Debug)]
struct ClassPoly {
    vars: usize,
    terms: BTreeMap<Vec<u8>, BigRational>,
}

impl ClassPoly {
    fn constant(vars: usize, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; vars], c);
        }
        ClassPoly { vars, terms }
    }

    fn linear(coeffs: &[BigRational]) -> Self {
        let vars = coeffs.len();
        let mut terms = BTreeMap::new();
        for (j, c) in coeffs.iter().enumerate() {
            if !c.is_zero() {
                let mut e = vec![0; vars];
                e[j] = 1;
                terms.insert(e, c.clone());
            }
        }
        ClassPoly { vars, terms }
    }

    fn add(&self, other: &Self) -> Self {
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            let v = terms.entry(e.clone()).or_insert_with(BigRational::zero);
            *v += c;
            if v.is_zero() {
                terms.remove(e);
            }
        }
        ClassPoly { vars: self.vars, terms }
    }

    fn mul(&self, other: &Self, max_deg: usize) -> Self {
        let mut terms: BTreeMap<Vec<u8>, BigRational> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            let d1: usize = e1.iter().map(|&x| x as usize).sum();
            for (e2, c2) in &other.terms {
                let d2: usize = e2.iter().map(|&x| x as usize).sum();
                if d1 + d2 > max_deg {
                    continue;
                }
                let e: Vec<u8> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *terms.entry(e).or_insert_with(BigRational::zero) += c1 * c2;
            }
        }
        terms.retain(|_, v| !v.is_zero());
        ClassPoly { vars: self.vars, terms }
    }

    fn degree_part(&self, k: usize) -> Self {
        let terms = self
            .terms
            .iter()
            .filter(|(e, _)| e.iter().map(|&x| x as usize).sum::<usize>() == k)
            .map(|(e, c)| (e.clone(), c.clone()))
            .collect();
        ClassPoly { vars: self.vars, terms }
    }

    /// `1 / (1 + self)` truncated at `max_deg`; `self` must have no constant term.
    fn inverse_one_plus(&self, max_deg: usize) -> Self {
        let one = ClassPoly::constant(self.vars, BigRational::one());
        let mut out = one.clone();
        let mut power = one;
        let neg = self.scale(&-BigRational::one());
        for _ in 0..max_deg {
            power = power.mul(&neg, max_deg);
            out = out.add(&power);
        }
        out
    }

    fn scale(&self, c: &BigRational) -> Self {
        let terms = self.terms.iter().map(|(e, v)| (e.clone(), v * c)).filter(|(_, v)| !v.is_zero()).collect();
        ClassPoly { vars: self.vars, terms }
    }
}

fn validate_shape(f: &Fan) -> Result<(), ToricError> {
    let d = f.dim();
    if d == 0 {
        return Err(ToricError::MalformedFan("no rays".into()));
    }
    if let Some(i) = f.rays.iter().position(|r| r.len() != d) {
        return Err(ToricError::MalformedFan(format!("ray {i} has length {}", f.rays[i].len())));
    }
    if f.max_cones.is_empty() {
        return Err(ToricError::MalformedFan("no maximal cones".into()));
    }
    let mut used = vec![false; f.rays.len()];
    for (k, c) in f.max_cones.iter().enumerate() {
        if c.len() != d {
            return Err(ToricError::MalformedFan(format!("cone {k} has {} rays, expected {d}", c.len())));
        }
        let distinct: BTreeSet<usize> = c.iter().copied().collect();
        if distinct.len() != c.len() {
            return Err(ToricError::MalformedFan(format!("cone {k} repeats a ray")));
        }
        for &i in c {
            if i >= f.rays.len() {
                return Err(ToricError::MalformedFan(format!("cone {k} refers to ray {i}")));
            }
            used[i] = true;
        }
    }
    if let Some(i) = used.iter().position(|u| !u) {
        return Err(ToricError::MalformedFan(format!("ray {i} lies in no maximal cone")));
    }
    Ok(())
}

fn check_smooth(f: &Fan) -> Result<(), ToricError> {
    for (k, c) in f.max_cones.iter().enumerate() {
        let det = f.cone_matrix(c).determinant();
        if det.abs() != BigInt::one() {
            return Err(ToricError::NotSmooth { cone: k, det: det.to_string() });
        }
    }
    Ok(())
}

fn check_complete(f: &Fan) -> Result<(), ToricError> {
    let n = f.max_cones.len();
    let mut faces: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for (k, c) in f.max_cones.iter().enumerate() {
        let mut sorted = c.clone();
        sorted.sort_unstable();
        for skip in 0..sorted.len() {
            let mut face = sorted.clone();
            face.remove(skip);
            faces.entry(face).or_default().push(k);
        }
    }
    let mut adj = vec![Vec::new(); n];
    for (face, cones) in &faces {
        if cones.len() != 2 {
            return Err(ToricError::NotComplete(format!("face {face:?} lies in {} maximal cones", cones.len())));
        }
        adj[cones[0]].push(cones[1]);
        adj[cones[1]].push(cones[0]);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(k) = stack.pop() {
        for &j in &adj[k] {
            if !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    if seen.iter().any(|s| !s) {
        return Err(ToricError::NotComplete("dual graph is disconnected".into()));
    }
    // a generic vector must lie in exactly one maximal cone
    let d = f.dim();
    let inverses: Vec<IntMatrix> =
        f.max_cones.iter().map(|c| f.cone_matrix(c).unimodular_inverse().expect("smooth cone")).collect();
    let bound: Option<BigInt> = inverses.iter().flat_map(|m| m.rows_iter().flatten().map(|x| x.abs()).collect::<Vec<_>>()).max();
    let base: BigInt = BigInt::from(2) * bound.unwrap_or_else(BigInt::one) + 1;
    let v: Vec<BigInt> = (0..d).map(|k| num_traits::pow(base.clone(), k)).collect();
    let covering = inverses
        .iter()
        .filter(|inv| {
            // coordinates of v in the ray basis: v^T B^{-1}
            (0..d).all(|j| (0..d).map(|i| &v[i] * inv.get(i, j)).sum::<BigInt>().is_positive())
        })
        .count();
    if covering != 1 {
        return Err(ToricError::NotComplete(format!("a generic vector lies in {covering} maximal cones")));
    }
    Ok(())
}

/// Checks smoothness, completeness and the Fano condition, and computes the nef cone.
pub fn validate_fan(f: &Fan) -> Result<ToricFano, ToricError> {
    validate_shape(f)?;
    check_smooth(f)?;
    check_complete(f)?;
    let gale = gale_dual(&f.rays)?;
    let r = gale.pic_rank;
    let classes = gale.divisor_classes();
    let cones: Vec<Cone> = f
        .max_cones
        .iter()
        .map(|c| {
            let gens: Vec<IVec> = (0..f.rays.len()).filter(|i| !c.contains(i)).map(|i| classes[i].clone()).collect();
            Cone::from_generators(r, &gens)
        })
        .collect();
    let nef = intersect(&cones);
    let mut anticanonical = vec![0i64; r];
    for c in &classes {
        for (a, x) in anticanonical.iter_mut().zip(c) {
            *a += x;
        }
    }
    if !nef.contains_in_interior(&anticanonical) {
        return Err(ToricError::NotFano);
    }
    Ok(ToricFano { fan: f.clone(), gale, nef, anticanonical, table: OnceLock::new() })
}

pub fn is_nef(y: &ToricFano, lambda: &[i64]) -> bool {
    y.nef.contains(lambda)
}

pub fn is_ample(y: &ToricFano, lambda: &[i64]) -> bool {
    y.nef.contains_in_interior(lambda)
}

/// `{u : <u, rho_i> >= -a_i}` for a torus-invariant representative `a` of `lambda`.
pub fn divisor_polytope(y: &ToricFano, lambda: &[i64]) -> Result<LatticePolytope, ToricError> {
    if !is_nef(y, lambda) {
        return Err(ToricError::NotNef(lambda.to_vec()));
    }
    let a = y.gale.representative(lambda);
    Ok(polytope_of_representative(y, &a))
}

pub(crate) fn polytope_of_representative(y: &ToricFano, a: &[i64]) -> LatticePolytope {
    let rows: Vec<IVec> = y.fan.rays.iter().map(|r| r.iter().map(|x| -x).collect()).collect();
    LatticePolytope::new(y.dim(), rows, a.to_vec()).expect("consistent shape")
}

fn to_i64(q: BigRational) -> Result<i64, ToricError> {
    assert!(q.is_integer(), "intersection number {q} is not integral");
    q.to_integer().to_i64().ok_or(ToricError::Overflow)
}

/// The intersection number `lambda_1 ... lambda_d` on `y`.
///
/// Each class is written in a basis of nef classes, so the product expands by
/// multilinearity into mixed volumes of nef divisor polytopes.
pub fn intersection_number(y: &ToricFano, classes: &[IVec]) -> Result<i64, ToricError> {
    let d = y.dim();
    if classes.len() != d {
        return Err(ToricError::WrongArity { expected: d, found: classes.len() });
    }
    let r = y.pic_rank();
    let mut p = ClassPoly::constant(r, BigRational::one());
    for c in classes {
        p = p.mul(&y.linear(c), d);
    }
    to_i64(y.integrate(&p))
}

/// Sum of classes.
pub fn class_sum(classes: &[IVec], r: usize) -> IVec {
    let mut s = vec![0; r];
    for c in classes {
        for (a, x) in s.iter_mut().zip(c) {
            *a += x;
        }
    }
    s
}

/// `(-K_Y - Lambda)^n . L_1 ... L_c` with `n = dim Y - c`.
pub fn ci_degree(y: &ToricFano, bundles: &[IVec]) -> Result<i64, ToricError> {
    let d = y.dim();
    let c = bundles.len();
    if c > d {
        return Err(ToricError::WrongArity { expected: d, found: c });
    }
    let lambda = class_sum(bundles, y.pic_rank());
    let h: IVec = y.anticanonical.iter().zip(&lambda).map(|(a, b)| a - b).collect();
    let mut classes: Vec<IVec> = vec![h; d - c];
    classes.extend(bundles.iter().cloned());
    intersection_number(y, &classes)
}

/// Topological Euler number of the complete intersection:
/// `int_Y [prod_i (1 + D_i) / prod_m (1 + L_m)]_n . prod_m L_m`.
pub fn ci_euler(y: &ToricFano, bundles: &[IVec]) -> Result<i64, ToricError> {
    let d = y.dim();
    let c = bundles.len();
    if c > d {
        return Err(ToricError::WrongArity { expected: d, found: c });
    }
    let n = d - c;
    let r = y.pic_rank();
    let mut total = ClassPoly::constant(r, BigRational::one());
    for di in y.divisor_classes() {
        let one_plus = ClassPoly::constant(r, BigRational::one()).add(&y.linear(&di));
        total = total.mul(&one_plus, n);
    }
    for l in bundles {
        total = total.mul(&y.linear(l).inverse_one_plus(n), n);
    }
    let mut p = total.degree_part(n);
    for l in bundles {
        p = p.mul(&y.linear(l), d);
    }
    to_i64(y.integrate(&p))
}
