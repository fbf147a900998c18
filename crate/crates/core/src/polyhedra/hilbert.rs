use super::cone::{dot_i, Cone};
use super::polytope::LatticePolytope;
use super::PolyhedraError;
use crate::IVec;

/// Minimal generating set of the monoid `c ∩ Z^n`, sorted lexicographically.
///
/// Every irreducible element lies in the half-open parallelepiped of some
/// simplicial subcone, so its degree under the grading `w` is below the sum of
/// the `k` largest ray degrees (`k = dim c`). All lattice points up to that
/// degree are listed and filtered in order of increasing degree.
pub fn hilbert_basis(c: &Cone) -> Result<Vec<IVec>, PolyhedraError> {
    if !c.is_pointed() {
        return Err(PolyhedraError::NotPointed);
    }
    if c.rays().is_empty() {
        return Ok(Vec::new());
    }
    let n = c.ambient_dim();
    let w = c.grading();
    let k = n - c.equations().len();
    let mut degs: Vec<i64> = c.rays().iter().map(|r| dot_i(&w, r)).collect();
    degs.sort_unstable_by(|a, b| b.cmp(a));
    let bound: i64 = degs.iter().take(k).sum();

    let mut a: Vec<IVec> = Vec::new();
    let mut b: IVec = Vec::new();
    for f in c.facet_normals() {
        a.push(f.iter().map(|x| -x).collect());
        b.push(0);
    }
    a.push(w.clone());
    b.push(bound);
    let p = LatticePolytope::new(n, a, b)?;
    let mut pts = p.lattice_points()?;
    pts.retain(|x| x.iter().any(|&v| v != 0));
    pts.sort_by_key(|x| dot_i(&w, x));

    let mut basis: Vec<IVec> = Vec::new();
    for x in pts {
        let reducible = basis.iter().any(|h| {
            let diff: IVec = x.iter().zip(h).map(|(a, b)| a - b).collect();
            c.contains(&diff)
        });
        if !reducible {
            basis.push(x);
        }
    }
    basis.sort();
    Ok(basis)
}
