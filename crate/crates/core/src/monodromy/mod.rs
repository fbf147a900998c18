//! Singular points, numerical local monodromies and ramification of operators
//! in `D = t d/dt` form.
//!
//! Monodromy matrices act on `(y, y', ..., y^(N-1))` at the basepoint; every
//! loop starts and ends there. Loops around finite points are keyholes: a
//! straight segment, a small anticlockwise circle and the segment back.

mod fixed;
mod poly;
mod transport;

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::periods::DiffOperator;
use fixed::FxMatrix;
use transport::{OdeForm, Stepper};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MonodromyError {
    #[error("path passes within {distance:e} of a singular point at {point}")]
    PathTooClose { point: Complex64, distance: f64 },
    #[error("series did not converge within {terms} terms")]
    PrecisionExhausted { terms: usize },
    #[error("rank of T - I at {point} is {loose} at the loose tolerance but {tight} at the tight one")]
    RankUnstable { point: String, loose: usize, tight: usize },
    #[error("basepoint {0} is singular")]
    SingularBasepoint(Complex64),
    #[error("ordered product of local monodromies differs from the identity by {0:e}")]
    LoopProduct(f64),
}

/// Working precision of the continuation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Precision {
    /// Fixed-point fraction bits.
    pub bits: u32,
    /// Series truncation target, in bits (100 bits is about `1e-30`).
    pub truncation_bits: u32,
}

impl Default for Precision {
    fn default() -> Self {
        Precision { bits: 256, truncation_bits: 100 }
    }
}

impl Precision {
    pub fn with_bits(bits: u32) -> Self {
        Precision { bits, truncation_bits: (bits * 2 / 5).max(40) }
    }
}

/// Relative singular value thresholds for ranks.
pub const RANK_TOL: f64 = 1e-8;
pub const RANK_TOL_LOOSE: f64 = 1e-6;
pub const RANK_TOL_TIGHT: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularPoint {
    pub re: f64,
    pub im: f64,
    /// Bound on the distance to the exact root.
    pub radius: f64,
    /// Primitive integer factor of `t p_N(t)` vanishing here, low-to-high.
    pub factor: Vec<i64>,
    pub multiplicity: usize,
    /// Exact value for rational points, as `"p/q"`.
    pub exact: Option<String>,
}

impl SingularPoint {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }

    pub fn label(&self) -> String {
        match &self.exact {
            Some(e) => e.clone(),
            None => format!("{:.12}{:+.12}i", self.re, self.im),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SingularSet {
    /// Finite singular points, `t = 0` always first.
    pub points: Vec<SingularPoint>,
    pub includes_infinity: bool,
}

impl SingularSet {
    pub fn values(&self) -> Vec<Complex64> {
        self.points.iter().map(SingularPoint::value).collect()
    }
}

fn small_factor(p: &[BigInt]) -> Vec<i64> {
    p.iter().map(|c| c.to_i64().unwrap_or(i64::MAX)).collect()
}

/// Roots of `p_N` plus `t = 0` and `t = infinity`.
pub fn singular_points(l: &DiffOperator) -> SingularSet {
    let mut points = vec![SingularPoint {
        re: 0.0,
        im: 0.0,
        radius: 0.0,
        factor: vec![0, 1],
        multiplicity: 0,
        exact: Some("0".into()),
    }];
    for (factor, mult) in poly::squarefree(l.leading_poly()) {
        let (roots, rest) = poly::rational_roots(&factor);
        for r in roots {
            if r.is_zero() {
                points[0].multiplicity = mult;
                continue;
            }
            let lin = poly::primitive(&[-r.numer().clone(), r.denom().clone()]);
            points.push(SingularPoint {
                re: rational_f64(&r),
                im: 0.0,
                radius: 0.0,
                factor: small_factor(&lin),
                multiplicity: mult,
                exact: Some(r.to_string()),
            });
        }
        if poly::degree(&rest) > 0 {
            for z in poly::complex_roots(&rest) {
                points.push(SingularPoint {
                    re: z.re,
                    im: z.im,
                    radius: poly::root_radius(&rest, z),
                    factor: small_factor(&rest),
                    multiplicity: mult,
                    exact: None,
                });
            }
        }
    }
    points[1..].sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    SingularSet { points, includes_infinity: true }
}

fn rational_f64(r: &BigRational) -> f64 {
    r.numer().to_f64().unwrap_or(f64::NAN) / r.denom().to_f64().unwrap_or(f64::NAN)
}

fn to_dmatrix(m: &FxMatrix, bits: u32) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(m.n, m.n, &m.to_c64(bits))
}

fn stepper<'a>(ode: &'a OdeForm, sing: &SingularSet, prec: Precision) -> Stepper<'a> {
    Stepper {
        ode,
        bits: prec.bits,
        target_bits: prec.truncation_bits,
        singular: sing.values(),
        max_terms: 4 * prec.bits as usize + 400,
    }
}

/// Transport matrix of the solution space along a polyline.
pub fn transport(l: &DiffOperator, path: &[Complex64], prec: Precision) -> Result<DMatrix<Complex64>, MonodromyError> {
    let ode = OdeForm::new(l);
    let sing = singular_points(l);
    let m = stepper(&ode, &sing, prec).along(path)?;
    Ok(to_dmatrix(&m, prec.bits))
}

fn keyhole(base: Complex64, s: Complex64, r: f64) -> Vec<Complex64> {
    let u = (base - s) / (base - s).norm();
    let m = 16;
    let mut path = vec![base];
    let start = s + u * r;
    for k in 0..=m {
        if k == m {
            path.push(start);
        } else {
            path.push(s + u * Complex64::from_polar(r, 2.0 * PI * k as f64 / m as f64));
        }
    }
    path.push(base);
    path
}

fn segment_distance(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let t = ((p - a) * d.conj()).re / d.norm_sqr();
    let t = t.clamp(0.0, 1.0);
    (p - (a + d * t)).norm()
}

/// Default basepoint: half the smallest nonzero singular modulus,
/// nudged off the real axis when a singular point is real and positive.
pub fn default_basepoint(sing: &SingularSet) -> Complex64 {
    let nonzero: Vec<Complex64> = sing.values().into_iter().filter(|z| z.norm() > 0.0).collect();
    let t0 = 0.5 * nonzero.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    let t0 = if t0.is_finite() { t0 } else { 1.0 };
    let nudge = nonzero.iter().any(|z| z.im == 0.0 && z.re > 0.0);
    Complex64::new(t0, if nudge { t0 / 100.0 } else { 0.0 })
}

/// Monodromy around a finite singular point `s` along a keyhole from `basepoint`.
pub fn local_monodromy(
    l: &DiffOperator,
    s: Complex64,
    basepoint: Complex64,
    prec: Precision,
) -> Result<DMatrix<Complex64>, MonodromyError> {
    let sing = singular_points(l);
    let ode = OdeForm::new(l);
    let st = stepper(&ode, &sing, prec);
    if st.distance_to_singular(basepoint) == 0.0 {
        return Err(MonodromyError::SingularBasepoint(basepoint));
    }
    let others: Vec<Complex64> = sing.values().into_iter().filter(|z| (z - s).norm() > 1e-300).collect();
    let r = others.iter().map(|z| (z - s).norm()).fold((basepoint - s).norm(), f64::min) * 0.5;
    Ok(to_dmatrix(&st.along(&keyhole(basepoint, s, r))?, prec.bits))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    /// `"infinity"` or the point's label.
    pub point: String,
    pub value: Option<(f64, f64)>,
    /// `rank(T_s - I)`.
    pub rank: usize,
    /// `rank((T_s - I)^j)` for `j = 1..=N`.
    pub jordan_profile: Vec<usize>,
    /// Singular values of `T_s - I` after balancing, descending.
    pub singular_values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MonodromyReport {
    pub order: usize,
    pub basepoint: (f64, f64),
    pub points: Vec<PointReport>,
    pub rf: usize,
    pub defect: i64,
    pub extremal: bool,
    /// `|| T_inf T_k ... T_1 - I ||` relative to the largest factor norm.
    pub loop_residual: f64,
    /// Smallest ratio between a retained and a discarded singular value, over all points.
    pub tolerance_gap: f64,
}

fn singular_values(m: &DMatrix<Complex64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

fn rank_at(sv: &[f64], scale: f64, tol: f64) -> usize {
    sv.iter().filter(|&&x| x > tol * scale).count()
}

/// `(rank, profile, singular values, gap)` of `T - I`.
fn analyse(label: &str, t: &DMatrix<Complex64>) -> Result<(usize, Vec<usize>, Vec<f64>, f64), MonodromyError> {
    let n = t.nrows();
    let a = t - DMatrix::<Complex64>::identity(n, n);
    let sv = singular_values(&a);
    let scale = sv.first().copied().unwrap_or(0.0).max(1.0);
    let rank = rank_at(&sv, scale, RANK_TOL);
    let loose = rank_at(&sv, scale, RANK_TOL_LOOSE);
    let tight = rank_at(&sv, scale, RANK_TOL_TIGHT);
    if loose != tight {
        return Err(MonodromyError::RankUnstable { point: label.to_string(), loose, tight });
    }
    let kept = if rank > 0 { sv[rank - 1] } else { scale };
    let dropped = sv.get(rank).copied().unwrap_or(0.0).max(f64::MIN_POSITIVE);
    let gap = (kept / dropped).min(1e300);
    let mut profile = vec![rank];
    let mut pw = a.clone();
    for j in 2..=n {
        pw = &pw * &a;
        let s = singular_values(&pw);
        profile.push(rank_at(&s, scale.powi(j as i32), RANK_TOL));
    }
    Ok((rank, profile, sv, gap))
}

/// Conjugate by `diag(|b|^i)` so that entries are comparable in size.
fn balance(m: &DMatrix<Complex64>, b: Complex64) -> DMatrix<Complex64> {
    let r = b.norm();
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * r.powi(i as i32 - j as i32))
}

/// Local monodromies at every singular point, ramification and defect.
pub fn ramification(l: &DiffOperator, prec: Precision) -> Result<MonodromyReport, MonodromyError> {
    let sing = singular_points(l);
    let base = default_basepoint(&sing);
    ramification_at(l, &sing, base, prec)
}

pub fn ramification_at(
    l: &DiffOperator,
    sing: &SingularSet,
    base: Complex64,
    prec: Precision,
) -> Result<MonodromyReport, MonodromyError> {
    let n = l.order();
    let ode = OdeForm::new(l);
    let st = stepper(&ode, sing, prec);
    if st.distance_to_singular(base) == 0.0 {
        return Err(MonodromyError::SingularBasepoint(base));
    }
    let pts = sing.values();

    // exit direction for the loop around infinity: middle of the widest angular gap
    let mut angles: Vec<(f64, usize)> = pts.iter().enumerate().map(|(i, s)| ((s - base).arg(), i)).collect();
    angles.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut phi0 = 0.0;
    let mut widest = -1.0;
    for k in 0..angles.len() {
        let a = angles[k].0;
        let b = if k + 1 < angles.len() { angles[k + 1].0 } else { angles[0].0 + 2.0 * PI };
        if b - a > widest {
            widest = b - a;
            phi0 = a + 0.5 * (b - a);
        }
    }
    let far = pts.iter().map(|s| (s - base).norm()).fold(0.0, f64::max);
    let big_r = 2.0 * far.max(base.norm());
    let exit = base + Complex64::from_polar(big_r, phi0);

    // keyhole radii small enough that no loop meets another loop's segment
    let mut radii = Vec::with_capacity(pts.len());
    for (i, &s) in pts.iter().enumerate() {
        let mut r = (s - base).norm();
        for (j, &o) in pts.iter().enumerate() {
            if i != j {
                r = r.min((o - s).norm()).min(segment_distance(s, base, o));
            }
        }
        r = r.min(segment_distance(s, base, exit));
        radii.push(0.5 * r);
    }

    let bits = prec.bits;
    let mut mats: Vec<FxMatrix> = Vec::with_capacity(pts.len());
    for (i, &s) in pts.iter().enumerate() {
        mats.push(st.along(&keyhole(base, s, radii[i]))?);
    }
    // clockwise big circle centred at the basepoint
    let m = 48;
    let mut path = vec![base];
    for k in 0..=m {
        if k == m {
            path.push(exit);
        } else {
            path.push(base + Complex64::from_polar(big_r, phi0 - 2.0 * PI * k as f64 / m as f64));
        }
    }
    path.push(base);
    let t_inf = st.along(&path)?;

    // T_inf * T_{theta_k} ... T_{theta_1}, angles increasing from the exit direction
    let mut order: Vec<(f64, usize)> =
        angles.iter().map(|&(a, i)| ((a - phi0).rem_euclid(2.0 * PI), i)).collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut prod = FxMatrix::identity(n, bits);
    for &(_, i) in &order {
        prod = mats[i].mul(&prod, bits);
    }
    prod = t_inf.mul(&prod, bits);
    let prod = to_dmatrix(&prod, bits);
    let mut norm = 1.0f64;
    let mut reports = Vec::new();
    let mut gap = f64::INFINITY;
    let mut rf = 0;
    let all: Vec<(String, Option<Complex64>, &FxMatrix)> = pts
        .iter()
        .enumerate()
        .map(|(i, &s)| (sing.points[i].label(), Some(s), &mats[i]))
        .chain(std::iter::once(("infinity".to_string(), None, &t_inf)))
        .collect();
    for (label, value, mat) in all {
        let t = to_dmatrix(mat, bits);
        norm = norm.max(singular_values(&t)[0]);
        let (rank, profile, sv, g) = analyse(&label, &balance(&t, base))?;
        gap = gap.min(g);
        rf += rank;
        reports.push(PointReport {
            point: label,
            value: value.map(|z| (z.re, z.im)),
            rank,
            jordan_profile: profile,
            singular_values: sv,
        });
    }
    let residual = (prod - DMatrix::<Complex64>::identity(n, n)).norm() / norm;
    if residual > 10.0 * RANK_TOL {
        return Err(MonodromyError::LoopProduct(residual));
    }
    let defect = rf as i64 - 2 * n as i64;
    Ok(MonodromyReport {
        order: n,
        basepoint: (base.re, base.im),
        points: reports,
        rf,
        defect,
        extremal: defect == 0,
        loop_residual: residual,
        tolerance_gap: gap,
    })
}
