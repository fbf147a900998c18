use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::dd::{double_description, make_primitive, BVec};
use super::PolyhedraError;
use crate::lattice::IntMatrix;
use crate::IVec;

type RVec = Vec<BigRational>;

/// Polytope `{x : A x <= b}` with a lazily computed vertex list.
#[derive(Clone, Debug)]
pub struct LatticePolytope {
    dim: usize,
    a: Vec<IVec>,
    b: IVec,
    vertices: OnceLock<Result<Vec<RVec>, PolyhedraError>>,
}

impl PartialEq for LatticePolytope {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.a == other.a && self.b == other.b
    }
}

impl LatticePolytope {
    pub fn new(dim: usize, a: Vec<IVec>, b: IVec) -> Result<Self, PolyhedraError> {
        if a.len() != b.len() {
            return Err(PolyhedraError::DimensionMismatch { expected: a.len(), found: b.len() });
        }
        if let Some(row) = a.iter().find(|r| r.len() != dim) {
            return Err(PolyhedraError::DimensionMismatch { expected: dim, found: row.len() });
        }
        Ok(LatticePolytope { dim, a, b, vertices: OnceLock::new() })
    }

    /// The box `[lo_i, hi_i]`.
    pub fn cuboid(lo: &[i64], hi: &[i64]) -> Self {
        let d = lo.len();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for i in 0..d {
            let mut e = vec![0; d];
            e[i] = 1;
            a.push(e.clone());
            b.push(hi[i]);
            e[i] = -1;
            a.push(e);
            b.push(-lo[i]);
        }
        LatticePolytope::new(d, a, b).expect("consistent shape")
    }

    /// `k` times the standard `d`-simplex.
    pub fn simplex(d: usize, k: i64) -> Self {
        let mut a: Vec<IVec> = (0..d)
            .map(|i| {
                let mut e = vec![0; d];
                e[i] = -1;
                e
            })
            .collect();
        let mut b = vec![0; d];
        a.push(vec![1; d]);
        b.push(k);
        LatticePolytope::new(d, a, b).expect("consistent shape")
    }

    /// Convex hull of integer points.
    pub fn from_points(dim: usize, pts: &[IVec]) -> Result<Self, PolyhedraError> {
        let rp: Vec<RVec> =
            pts.iter().map(|p| p.iter().map(|&x| BigRational::from_integer(x.into())).collect()).collect();
        Self::from_rational_points(dim, &rp)
    }

    fn from_rational_points(dim: usize, pts: &[RVec]) -> Result<Self, PolyhedraError> {
        if let Some(p) = pts.iter().find(|p| p.len() != dim) {
            return Err(PolyhedraError::DimensionMismatch { expected: dim, found: p.len() });
        }
        if pts.is_empty() {
            // 0 <= -1
            return LatticePolytope::new(dim, vec![vec![0; dim]], vec![-1]);
        }
        let gens: Vec<BVec> = pts.iter().map(homogenize).collect();
        let hull = double_description(dim + 1, &gens);
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut push = |f: &BVec| {
            // <f_x, x> + f_t >= 0  becomes  -f_x . x <= f_t
            a.push(f[..dim].iter().map(|v| -v.to_i64().expect("facet overflow")).collect());
            b.push(f[dim].to_i64().expect("facet overflow"));
        };
        for f in &hull.rays {
            push(f);
        }
        for e in &hull.lineality {
            push(e);
            push(&e.iter().map(|v| -v).collect());
        }
        LatticePolytope::new(dim, a, b)
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> (&[IVec], &[i64]) {
        (&self.a, &self.b)
    }

    /// Rational vertices, sorted. Empty for the empty polytope.
    pub fn vertices(&self) -> Result<&[RVec], PolyhedraError> {
        self.vertices.get_or_init(|| compute_vertices(self.dim, &self.a, &self.b)).as_ref().map(Vec::as_slice).map_err(Clone::clone)
    }

    pub fn is_empty(&self) -> Result<bool, PolyhedraError> {
        Ok(self.vertices()?.is_empty())
    }

    /// All integer points, sorted lexicographically.
    pub fn lattice_points(&self) -> Result<Vec<IVec>, PolyhedraError> {
        let verts = self.vertices()?;
        if verts.is_empty() {
            return Ok(Vec::new());
        }
        let d = self.dim;
        if d == 0 {
            return Ok(vec![vec![]]);
        }
        let mut lo = vec![i64::MAX; d];
        let mut hi = vec![i64::MIN; d];
        for v in verts {
            for i in 0..d {
                lo[i] = lo[i].min(v[i].ceil().to_integer().to_i64().expect("box overflow"));
                hi[i] = hi[i].max(v[i].floor().to_integer().to_i64().expect("box overflow"));
            }
        }
        // suffix_min[row][j] = min over the box of sum_{i >= j} a_i x_i
        let suffix_min: Vec<Vec<i128>> = self
            .a
            .iter()
            .map(|row| {
                let mut s = vec![0i128; d + 1];
                for j in (0..d).rev() {
                    let c = row[j] as i128;
                    s[j] = s[j + 1] + (c * lo[j] as i128).min(c * hi[j] as i128);
                }
                s
            })
            .collect();
        let mut out = Vec::new();
        let mut x = vec![0i64; d];
        let mut partial = vec![0i128; self.a.len()];
        self.enumerate(0, &lo, &hi, &suffix_min, &mut x, &mut partial, &mut out);
        Ok(out)
    }

    #[allow(clippy::too_many_arguments)]
    fn enumerate(
        &self,
        j: usize,
        lo: &[i64],
        hi: &[i64],
        suffix_min: &[Vec<i128>],
        x: &mut IVec,
        partial: &mut Vec<i128>,
        out: &mut Vec<IVec>,
    ) {
        let d = self.dim;
        for v in lo[j]..=hi[j] {
            x[j] = v;
            let mut ok = true;
            for (k, row) in self.a.iter().enumerate() {
                let p = partial[k] + row[j] as i128 * v as i128;
                if p + suffix_min[k][j + 1] > self.b[k] as i128 {
                    ok = false;
                    break;
                }
            }
            if !ok {
                continue;
            }
            if j + 1 == d {
                out.push(x.clone());
            } else {
                for (k, row) in self.a.iter().enumerate() {
                    partial[k] += row[j] as i128 * v as i128;
                }
                self.enumerate(j + 1, lo, hi, suffix_min, x, partial, out);
                for (k, row) in self.a.iter().enumerate() {
                    partial[k] -= row[j] as i128 * v as i128;
                }
            }
        }
    }

    /// `d! vol(P)`; zero for lower-dimensional or empty polytopes.
    pub fn normalized_volume(&self) -> Result<BigRational, PolyhedraError> {
        let verts = self.vertices()?.to_vec();
        Ok(rational_points_volume(self.dim, &verts))
    }

    /// Minkowski sum, through its vertex set.
    pub fn minkowski_sum(&self, other: &Self) -> Result<Self, PolyhedraError> {
        if self.dim != other.dim {
            return Err(PolyhedraError::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let pts = sum_vertex_sets(self.vertices()?, other.vertices()?);
        Self::from_rational_points(self.dim, &pts)
    }
}

fn sum_vertex_sets(p: &[RVec], q: &[RVec]) -> Vec<RVec> {
    let mut out: Vec<RVec> =
        p.iter().flat_map(|u| q.iter().map(move |v| u.iter().zip(v).map(|(a, b)| a + b).collect())).collect();
    out.sort();
    out.dedup();
    out
}

fn homogenize(p: &RVec) -> BVec {
    let den = p.iter().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let mut g: BVec = p.iter().map(|x| x.numer() * (&den / x.denom())).collect();
    g.push(den);
    make_primitive(g)
}

fn compute_vertices(dim: usize, a: &[IVec], b: &[i64]) -> Result<Vec<RVec>, PolyhedraError> {
    // (x, t) with b t - A x >= 0 and t >= 0
    let mut cons: Vec<BVec> = a
        .iter()
        .zip(b)
        .map(|(row, &bi)| {
            let mut c: BVec = row.iter().map(|&v| BigInt::from(-v)).collect();
            c.push(BigInt::from(bi));
            c
        })
        .collect();
    let mut t = vec![BigInt::zero(); dim + 1];
    t[dim] = BigInt::one();
    cons.push(t);
    let cone = double_description(dim + 1, &cons);
    let has_vertex = cone.rays.iter().any(|r| r[dim].is_positive());
    if !has_vertex {
        return Ok(Vec::new());
    }
    if !cone.lineality.is_empty() || cone.rays.iter().any(|r| r[dim].is_zero()) {
        return Err(PolyhedraError::Unbounded);
    }
    let mut verts: Vec<RVec> = cone
        .rays
        .iter()
        .map(|r| r[..dim].iter().map(|x| BigRational::new(x.clone(), r[dim].clone())).collect())
        .collect();
    verts.sort();
    verts.dedup();
    Ok(verts)
}

/// Normalized volume of the convex hull of integer points.
pub fn normalized_volume_of_points(dim: usize, pts: &[IVec]) -> BigInt {
    let ip: Vec<BVec> = pts.iter().map(|p| p.iter().map(|&x| BigInt::from(x)).collect()).collect();
    integer_points_volume(dim, ip)
}

fn rational_points_volume(dim: usize, pts: &[RVec]) -> BigRational {
    if pts.is_empty() {
        return BigRational::zero();
    }
    let den = pts.iter().flatten().fold(BigInt::one(), |l, x| l.lcm(x.denom()));
    let ip: Vec<BVec> = pts.iter().map(|p| p.iter().map(|x| x.numer() * (&den / x.denom())).collect()).collect();
    let v = integer_points_volume(dim, ip);
    BigRational::new(v, num_traits::pow(den, dim))
}

fn affine_rank(pts: &[BVec], idx: &[usize]) -> usize {
    if idx.len() <= 1 {
        return 0;
    }
    let base = &pts[idx[0]];
    let rows: Vec<BVec> = idx[1..].iter().map(|&i| pts[i].iter().zip(base).map(|(a, b)| a - b).collect()).collect();
    IntMatrix::from_rows(base.len(), &rows).rank()
}

/// Pulling triangulation of the hull; returns the sum of |det| over simplices.
fn integer_points_volume(dim: usize, mut pts: Vec<BVec>) -> BigInt {
    pts.sort();
    pts.dedup();
    if pts.len() <= dim {
        return BigInt::zero();
    }
    let gens: Vec<BVec> = pts
        .iter()
        .map(|p| {
            let mut g = p.clone();
            g.push(BigInt::one());
            g
        })
        .collect();
    let hull = double_description(dim + 1, &gens);
    if !hull.lineality.is_empty() {
        return BigInt::zero();
    }
    let ev = |f: &BVec, p: &BVec| -> BigInt { f[..dim].iter().zip(p).map(|(a, b)| a * b).sum::<BigInt>() + &f[dim] };
    let tight: Vec<Vec<usize>> =
        hull.rays.iter().map(|f| (0..pts.len()).filter(|&i| ev(f, &pts[i]).is_zero()).collect()).collect();
    // keep only vertices: points lying on `dim` independent facets
    let keep: Vec<usize> = (0..pts.len())
        .filter(|&i| {
            let normals: Vec<BVec> =
                hull.rays.iter().zip(&tight).filter(|(_, t)| t.contains(&i)).map(|(f, _)| f[..dim].to_vec()).collect();
            !normals.is_empty() && IntMatrix::from_rows(dim, &normals).rank() == dim
        })
        .collect();
    let tight: Vec<Vec<usize>> =
        tight.into_iter().map(|t| t.into_iter().filter(|i| keep.contains(i)).collect()).collect();

    let mut simplices = Vec::new();
    triangulate(&pts, &keep, dim, &tight, &mut Vec::new(), &mut simplices);
    let mut total = BigInt::zero();
    for s in simplices {
        let base = &pts[s[0]];
        let rows: Vec<BVec> = s[1..].iter().map(|&i| pts[i].iter().zip(base).map(|(a, b)| a - b).collect()).collect();
        total += IntMatrix::from_rows(dim, &rows).determinant().abs();
    }
    total
}

fn triangulate(
    pts: &[BVec],
    face: &[usize],
    k: usize,
    facets: &[Vec<usize>],
    apexes: &mut Vec<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if k == 0 {
        let mut s = vec![face[0]];
        s.extend(apexes.iter().rev());
        out.push(s);
        return;
    }
    let v = face[0];
    let mut subfaces: Vec<Vec<usize>> = Vec::new();
    for f in facets {
        let sub: Vec<usize> = face.iter().copied().filter(|i| f.contains(i)).collect();
        if sub.contains(&v) || sub.len() < k || subfaces.contains(&sub) {
            continue;
        }
        if affine_rank(pts, &sub) == k - 1 {
            subfaces.push(sub);
        }
    }
    apexes.push(v);
    for sub in subfaces {
        triangulate(pts, &sub, k - 1, facets, apexes, out);
    }
    apexes.pop();
}

/// Lattice-normalized mixed volume, `MV(P, ..., P) = d! vol(P)`.
pub fn mixed_volume(ps: &[LatticePolytope]) -> Result<BigInt, PolyhedraError> {
    let d = ps.len();
    if let Some(p) = ps.iter().find(|p| p.dim != d) {
        return Err(PolyhedraError::DimensionMismatch { expected: d, found: p.dim });
    }
    let verts: Vec<&[RVec]> = ps.iter().map(|p| p.vertices()).collect::<Result<_, _>>()?;
    if verts.iter().any(|v| v.is_empty()) {
        return Ok(BigInt::zero());
    }
    let mut total = BigRational::zero();
    for mask in 1u32..(1 << d) {
        let mut sum: Vec<RVec> = vec![vec![BigRational::zero(); d]];
        for (j, v) in verts.iter().enumerate() {
            if mask >> j & 1 == 1 {
                sum = sum_vertex_sets(&sum, v);
            }
        }
        let vol = rational_points_volume(d, &sum);
        if (d as u32 - mask.count_ones()) % 2 == 0 {
            total += vol;
        } else {
            total -= vol;
        }
    }
    let fact: BigInt = (1..=d as u64).map(BigInt::from).product();
    let mv = total / BigRational::from_integer(fact);
    if !mv.is_integer() {
        return Err(PolyhedraError::NonIntegral(mv.to_string()));
    }
    Ok(mv.to_integer())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_points(p: &LatticePolytope, r: i64) -> Vec<IVec> {
        let d = p.ambient_dim();
        let mut pts: Vec<IVec> = vec![vec![]];
        for _ in 0..d {
            pts = pts.into_iter().flat_map(|q| (-r..=r).map(move |x| [q.clone(), vec![x]].concat())).collect();
        }
        let (a, b) = p.halfspaces();
        pts.into_iter()
            .filter(|x| a.iter().zip(b).all(|(row, &bi)| row.iter().zip(x).map(|(u, v)| u * v).sum::<i64>() <= bi))
            .collect()
    }

    #[test]
    fn segment_and_square() {
        assert_eq!(LatticePolytope::cuboid(&[0], &[6]).lattice_points().unwrap().len(), 7);
        assert_eq!(LatticePolytope::cuboid(&[0, 0], &[1, 1]).lattice_points().unwrap().len(), 4);
    }

    #[test]
    fn dilated_simplex_points() {
        let p = LatticePolytope::simplex(2, 3);
        let pts = p.lattice_points().unwrap();
        assert_eq!(pts, brute_points(&p, 4));
        assert_eq!(pts.len(), 10);
    }

    #[test]
    fn unbounded_and_empty() {
        let p = LatticePolytope::new(2, vec![vec![-1, 0], vec![0, -1]], vec![0, 0]).unwrap();
        assert_eq!(p.lattice_points(), Err(PolyhedraError::Unbounded));
        let e = LatticePolytope::new(1, vec![vec![1], vec![-1]], vec![0, -1]).unwrap();
        assert!(e.lattice_points().unwrap().is_empty());
    }

    #[test]
    fn rational_vertices() {
        // 2x <= 1, x >= 0
        let p = LatticePolytope::new(1, vec![vec![2], vec![-1]], vec![1, 0]).unwrap();
        let v = p.vertices().unwrap();
        assert_eq!(v[1][0], BigRational::new(1.into(), 2.into()));
        assert_eq!(p.lattice_points().unwrap(), vec![vec![0]]);
    }

    #[test]
    fn volumes() {
        assert_eq!(LatticePolytope::simplex(3, 1).normalized_volume().unwrap(), BigRational::one());
        assert_eq!(LatticePolytope::simplex(2, 2).normalized_volume().unwrap(), BigRational::from_integer(4.into()));
        assert_eq!(
            LatticePolytope::cuboid(&[0, 0, 0], &[1, 2, 3]).normalized_volume().unwrap(),
            BigRational::from_integer(36.into())
        );
        let flat = LatticePolytope::from_points(2, &[vec![0, 0], vec![3, 0]]).unwrap();
        assert!(flat.normalized_volume().unwrap().is_zero());
    }

    #[test]
    fn mixed_volume_examples() {
        let s = |d, k| LatticePolytope::simplex(d, k);
        assert_eq!(mixed_volume(&[s(3, 1), s(3, 1), s(3, 1)]).unwrap(), BigInt::one());
        assert_eq!(mixed_volume(&[s(2, 2), s(2, 2)]).unwrap(), BigInt::from(4));
        let seg = LatticePolytope::from_points(2, &[vec![0, 0], vec![1, 0]]).unwrap();
        assert_eq!(mixed_volume(&[seg.clone(), seg.clone()]).unwrap(), BigInt::zero());
        let vseg = LatticePolytope::from_points(2, &[vec![0, 0], vec![0, 1]]).unwrap();
        assert_eq!(mixed_volume(&[seg, vseg]).unwrap(), BigInt::one());
        assert_eq!(
            mixed_volume(&[s(2, 1)]),
            Err(PolyhedraError::DimensionMismatch { expected: 1, found: 2 })
        );
    }

    #[test]
    fn bernstein_count_for_boxes() {
        // MV of boxes [0,a]x[0,b] and [0,c]x[0,e] is a e + b c
        let p = LatticePolytope::cuboid(&[0, 0], &[2, 3]);
        let q = LatticePolytope::cuboid(&[0, 0], &[5, 1]);
        assert_eq!(mixed_volume(&[p, q]).unwrap(), BigInt::from(2 + 15));
    }

    fn small_polygon() -> impl Strategy<Value = LatticePolytope> {
        prop::collection::vec((-2i64..=2, -2i64..=2), 1..6)
            .prop_map(|pts| LatticePolytope::from_points(2, &pts.into_iter().map(|(x, y)| vec![x, y]).collect::<Vec<_>>()).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn points_match_box_brute_force(p in small_polygon()) {
            prop_assert_eq!(p.lattice_points().unwrap(), brute_points(&p, 3));
        }

        #[test]
        fn mixed_volume_symmetric_and_additive(p in small_polygon(), q in small_polygon(), r in small_polygon()) {
            let pq = mixed_volume(&[p.clone(), q.clone()]).unwrap();
            prop_assert_eq!(&pq, &mixed_volume(&[q.clone(), p.clone()]).unwrap());
            let sum = p.minkowski_sum(&q).unwrap();
            let lhs = mixed_volume(&[sum, r.clone()]).unwrap();
            let rhs = mixed_volume(&[p.clone(), r.clone()]).unwrap() + mixed_volume(&[q, r]).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn self_mixed_volume_is_normalized_volume(p in small_polygon()) {
            let mv = mixed_volume(&[p.clone(), p.clone()]).unwrap();
            prop_assert_eq!(BigRational::from_integer(mv), p.normalized_volume().unwrap());
        }
    }
}
