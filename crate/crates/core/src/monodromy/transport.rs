//! Analytic continuation of the solution space by Taylor recentering.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};

use super::fixed::{Fx, FxMatrix};
use super::poly::Poly;
use super::MonodromyError;
use crate::periods::DiffOperator;

/// `sum_i q_i(t) (d/dt)^i` equivalent to a `D`-form operator.
#[derive(Clone, Debug)]
pub(crate) struct OdeForm {
    pub order: usize,
    pub q: Vec<Poly>,
}

fn stirling2(n: usize) -> Vec<Vec<BigInt>> {
    let mut s = vec![vec![BigInt::zero(); n + 1]; n + 1];
    s[0][0] = BigInt::one();
    for m in 1..=n {
        for k in 1..=m {
            s[m][k] = &s[m - 1][k] * k + &s[m - 1][k - 1];
        }
    }
    s
}

impl OdeForm {
    /// `D^m = sum_i S(m, i) t^i (d/dt)^i`.
    pub fn new(l: &DiffOperator) -> Self {
        let n = l.order();
        let s = stirling2(n);
        let mut q: Vec<Poly> = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let mut qi: Poly = vec![BigInt::zero(); i + l.max_degree() + 1];
            for (m, p) in l.polys().iter().enumerate().skip(i) {
                for (j, c) in p.iter().enumerate() {
                    qi[i + j] += &s[m][i] * c;
                }
            }
            q.push(super::poly::trim(qi));
        }
        OdeForm { order: n, q }
    }
}

/// Taylor coefficients of `p(c + z)` in `z`.
fn taylor_shift(p: &[BigInt], c: &Fx, bits: u32) -> Vec<Fx> {
    let mut a: Vec<Fx> = p.iter().map(|x| Fx::from_int(x, bits)).collect();
    let n = a.len();
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        // synthetic division by (t - c) on a[k..]
        for i in (k..n - 1).rev() {
            let t = a[i + 1].mul(c, bits);
            a[i] = &a[i] + &t;
        }
        out.push(a[k].clone());
    }
    out
}

fn falling(x: usize, i: usize) -> BigInt {
    let mut r = BigInt::one();
    for k in 0..i {
        r *= x - k;
    }
    r
}

pub(crate) struct Stepper<'a> {
    pub ode: &'a OdeForm,
    pub bits: u32,
    /// Series are truncated once terms drop below `2^-target_bits` relative to the largest.
    pub target_bits: u32,
    pub singular: Vec<Complex64>,
    pub max_terms: usize,
}

impl Stepper<'_> {
    pub fn distance_to_singular(&self, p: Complex64) -> f64 {
        self.singular.iter().map(|s| (p - s).norm()).fold(f64::INFINITY, f64::min)
    }

    /// Matrix taking `(y, y', ..., y^(N-1))` at `c` to the same at `c + h`.
    fn step(&self, c: &Fx, h: &Fx) -> Result<FxMatrix, MonodromyError> {
        let bits = self.bits;
        let n = self.order();
        let shifted: Vec<Vec<Fx>> = self.ode.q.iter().map(|p| taylor_shift(p, c, bits)).collect();
        let lead = shifted[n].first().cloned().unwrap_or_else(Fx::zero);
        if lead.is_zero() {
            return Err(MonodromyError::PathTooClose { point: c.to_c64(bits), distance: 0.0 });
        }
        let max_l = shifted.iter().map(Vec::len).max().unwrap_or(0);
        let mut hp = vec![Fx::one(bits)];
        for k in 1..=max_l + n {
            let next = hp[k - 1].mul(h, bits);
            hp.push(next);
        }
        // w_{i,l} = q_{i,l} h^(l+N-i) / q_{N,0}
        let mut w: Vec<(usize, usize, Fx)> = Vec::new();
        for (i, row) in shifted.iter().enumerate() {
            for (l, q) in row.iter().enumerate() {
                if (i, l) == (n, 0) || q.is_zero() {
                    continue;
                }
                let x = q.mul(&hp[l + n - i], bits).div(&lead, bits);
                if !x.is_zero() {
                    w.push((i, l, x));
                }
            }
        }
        // b[k][j]: scaled Taylor coefficient a_k h^k of the solution with Y(c) = e_j
        let mut b: Vec<Vec<Fx>> = Vec::new();
        let mut fact = BigInt::one();
        for i in 0..n {
            if i > 0 {
                fact *= i;
            }
            let mut row = vec![Fx::zero(); n];
            row[i] = hp[i].div_int(&fact);
            b.push(row);
        }
        let mut top_bits = b.iter().flatten().map(Fx::mag_bits).max().unwrap_or(0);
        let mut quiet = 0;
        let mut k = 0usize;
        loop {
            let idx = k + n;
            if idx >= self.max_terms {
                return Err(MonodromyError::PrecisionExhausted { terms: idx });
            }
            let den = falling(idx, n);
            let mut row = vec![Fx::zero(); n];
            for (i, l, x) in &w {
                if *l > k {
                    continue;
                }
                let src = k - l + i;
                let ff = falling(src, *i);
                if ff.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let v = &b[src][j];
                    if v.is_zero() {
                        continue;
                    }
                    let t = x.mul(v, bits).scale_int(&ff);
                    row[j] = &row[j] - &t;
                }
            }
            for v in row.iter_mut() {
                *v = v.div_int(&den);
            }
            let mb = row.iter().map(Fx::mag_bits).max().unwrap_or(0);
            top_bits = top_bits.max(mb);
            b.push(row);
            let weight = (64 - (idx as u64 + 1).leading_zeros() as u64) * n as u64;
            if mb + weight + self.target_bits as u64 <= top_bits {
                quiet += 1;
            } else {
                quiet = 0;
            }
            k += 1;
            if quiet > n + 2 {
                break;
            }
        }
        // y^(i)(c+h) = h^-i sum_k k!/(k-i)! b_k
        let mut a = vec![Fx::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut s = Fx::zero();
                for (kk, bk) in b.iter().enumerate().skip(i) {
                    if !bk[j].is_zero() {
                        s = &s + &bk[j].scale_int(&falling(kk, i));
                    }
                }
                a[i * n + j] = if i == 0 { s } else { s.div(&hp[i], bits) };
            }
        }
        Ok(FxMatrix { n, a })
    }

    fn order(&self) -> usize {
        self.ode.order
    }

    /// Transport along a polyline; consecutive vertices are joined by straight segments.
    pub fn along(&self, path: &[Complex64]) -> Result<FxMatrix, MonodromyError> {
        let n = self.order();
        let bits = self.bits;
        let mut m = FxMatrix::identity(n, bits);
        let Some(&first) = path.first() else { return Ok(m) };
        let mut p = first;
        for &target in &path[1..] {
            loop {
                let d = target - p;
                if d.norm() == 0.0 {
                    break;
                }
                let rho = self.distance_to_singular(p);
                if rho < 1e-14 * (1.0 + p.norm()) {
                    return Err(MonodromyError::PathTooClose { point: p, distance: rho });
                }
                let next = if d.norm() <= 0.5 * rho { target } else { p + d * (0.5 * rho / d.norm()) };
                let fp = Fx::from_c64(p, bits);
                let h = &Fx::from_c64(next, bits) - &fp;
                let s = self.step(&fp, &h)?;
                m = s.mul(&m, bits);
                p = next;
            }
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stepper<'a>(ode: &'a OdeForm, sing: Vec<Complex64>) -> Stepper<'a> {
        Stepper { ode, bits: 192, target_bits: 80, singular: sing, max_terms: 2000 }
    }

    #[test]
    fn ordinary_form_of_theta_powers() {
        // D^2 = t^2 d^2 + t d
        let l = DiffOperator::from_i64(&[vec![], vec![], vec![1]]).unwrap();
        let f = OdeForm::new(&l);
        let b = |v: &[i64]| v.iter().map(|&c| BigInt::from(c)).collect::<Vec<_>>();
        assert_eq!(f.q, vec![b(&[]), b(&[0, 1]), b(&[0, 0, 1])]);
    }

    #[test]
    fn exponential_transport() {
        // t d/dt - t, i.e. y' = y: solutions c e^t
        let l = DiffOperator::from_i64(&[vec![0, -1], vec![1]]).unwrap();
        let ode = OdeForm::new(&l);
        let st = stepper(&ode, vec![Complex64::new(0.0, 0.0)]);
        let m = st.along(&[Complex64::new(1.0, 0.0), Complex64::new(2.0, 1.0), Complex64::new(3.0, 0.0)]).unwrap();
        let v = m.get(0, 0).to_c64(192);
        assert!((v - Complex64::new(2.0f64.exp(), 0.0)).norm() < 1e-13);
    }

    #[test]
    fn log_monodromy_of_d_squared() {
        // solutions 1 and log t; going once around 0 adds 2 pi i to log
        let l = DiffOperator::from_i64(&[vec![], vec![], vec![1]]).unwrap();
        let ode = OdeForm::new(&l);
        let st = stepper(&ode, vec![Complex64::new(0.0, 0.0)]);
        let path: Vec<Complex64> =
            (0..=12).map(|k| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / 12.0)).collect();
        let mut path = path;
        *path.last_mut().unwrap() = path[0];
        let m = st.along(&path).unwrap();
        // y = log t has Y(1) = (0, 1); after the loop Y = (2 pi i, 1)
        let y = m.get(0, 1).to_c64(192);
        assert!((y - Complex64::new(0.0, 2.0 * std::f64::consts::PI)).norm() < 1e-14);
        assert!((m.get(1, 1).to_c64(192) - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }
}
