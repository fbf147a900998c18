//! Complex fixed-point numbers `(re + i im) / 2^bits` over big integers.

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Fx {
    pub re: BigInt,
    pub im: BigInt,
}

/// Rounded `x / 2^k`.
fn shr_round(x: BigInt, k: u32) -> BigInt {
    if k == 0 {
        return x;
    }
    let half = BigInt::from(1) << (k - 1);
    (x + half) >> k
}

fn from_f64(x: f64, bits: u32) -> BigInt {
    if x == 0.0 {
        return BigInt::zero();
    }
    let (mant, exp, sign) = num_traits::float::FloatCore::integer_decode(x);
    let m = BigInt::from(mant) * sign;
    let e = exp as i64 + bits as i64;
    if e >= 0 {
        m << e as u32
    } else {
        shr_round(m, (-e) as u32)
    }
}

fn to_f64(x: &BigInt, bits: u32) -> f64 {
    let len = x.bits() as i64;
    let keep = 60i64;
    if len <= keep {
        return x.to_f64().unwrap_or(0.0) * (-(bits as f64)).exp2();
    }
    let drop = (len - keep) as u32;
    let top = (x >> drop).to_f64().unwrap_or(0.0);
    top * ((drop as f64) - bits as f64).exp2()
}

impl Fx {
    pub fn zero() -> Self {
        Fx { re: BigInt::zero(), im: BigInt::zero() }
    }

    pub fn one(bits: u32) -> Self {
        Fx { re: BigInt::from(1) << bits, im: BigInt::zero() }
    }

    pub fn from_c64(z: Complex64, bits: u32) -> Self {
        Fx { re: from_f64(z.re, bits), im: from_f64(z.im, bits) }
    }

    pub fn from_int(n: &BigInt, bits: u32) -> Self {
        Fx { re: n << bits, im: BigInt::zero() }
    }

    pub fn to_c64(&self, bits: u32) -> Complex64 {
        Complex64::new(to_f64(&self.re, bits), to_f64(&self.im, bits))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    /// Bit length of the larger component, a cheap magnitude proxy.
    pub fn mag_bits(&self) -> u64 {
        self.re.bits().max(self.im.bits())
    }

    pub fn mul(&self, o: &Fx, bits: u32) -> Fx {
        let re = &self.re * &o.re - &self.im * &o.im;
        let im = &self.re * &o.im + &self.im * &o.re;
        Fx { re: shr_round(re, bits), im: shr_round(im, bits) }
    }

    pub fn scale_int(&self, k: &BigInt) -> Fx {
        Fx { re: &self.re * k, im: &self.im * k }
    }

    /// Rounded division by a positive integer.
    pub fn div_int(&self, k: &BigInt) -> Fx {
        let r = |x: &BigInt| {
            let twice: BigInt = x * 2 + k;
            twice.div_floor(&(k * 2))
        };
        debug_assert!(k.is_positive());
        Fx { re: r(&self.re), im: r(&self.im) }
    }

    pub fn div(&self, o: &Fx, bits: u32) -> Fx {
        // a / b = a conj(b) / |b|^2
        let n2 = &o.re * &o.re + &o.im * &o.im;
        let re = (&self.re * &o.re + &self.im * &o.im) << bits;
        let im = (&self.im * &o.re - &self.re * &o.im) << bits;
        let q = |x: BigInt| -> BigInt {
            let twice: BigInt = x * 2 + &n2;
            twice.div_floor(&(&n2 * 2))
        };
        Fx { re: q(re), im: q(im) }
    }
}

impl Add for &Fx {
    type Output = Fx;
    fn add(self, o: &Fx) -> Fx {
        Fx { re: &self.re + &o.re, im: &self.im + &o.im }
    }
}

impl Sub for &Fx {
    type Output = Fx;
    fn sub(self, o: &Fx) -> Fx {
        Fx { re: &self.re - &o.re, im: &self.im - &o.im }
    }
}

impl Neg for &Fx {
    type Output = Fx;
    fn neg(self) -> Fx {
        Fx { re: -&self.re, im: -&self.im }
    }
}

impl Mul<&BigInt> for &Fx {
    type Output = Fx;
    fn mul(self, k: &BigInt) -> Fx {
        self.scale_int(k)
    }
}

/// Square matrix of fixed-point entries, row-major.
#[derive(Clone, Debug)]
pub(crate) struct FxMatrix {
    pub n: usize,
    pub a: Vec<Fx>,
}

impl FxMatrix {
    pub fn identity(n: usize, bits: u32) -> Self {
        let mut a = vec![Fx::zero(); n * n];
        for i in 0..n {
            a[i * n + i] = Fx::one(bits);
        }
        FxMatrix { n, a }
    }

    pub fn get(&self, i: usize, j: usize) -> &Fx {
        &self.a[i * self.n + j]
    }

    /// `self * o`.
    pub fn mul(&self, o: &FxMatrix, bits: u32) -> FxMatrix {
        let n = self.n;
        let mut a = vec![Fx::zero(); n * n];
        for i in 0..n {
            for j in 0..n {
                let mut re = BigInt::zero();
                let mut im = BigInt::zero();
                for k in 0..n {
                    let x = self.get(i, k);
                    let y = o.get(k, j);
                    re += &x.re * &y.re - &x.im * &y.im;
                    im += &x.re * &y.im + &x.im * &y.re;
                }
                a[i * n + j] = Fx { re: shr_round(re, bits), im: shr_round(im, bits) };
            }
        }
        FxMatrix { n, a }
    }

    pub fn to_c64(&self, bits: u32) -> Vec<Complex64> {
        self.a.iter().map(|x| x.to_c64(bits)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_and_arithmetic() {
        let b = 200;
        let z = Complex64::new(0.1, -3.5);
        let w = Complex64::new(-2.25, 1e-7);
        let fz = Fx::from_c64(z, b);
        let fw = Fx::from_c64(w, b);
        assert_eq!(fz.to_c64(b), z);
        assert!((fz.mul(&fw, b).to_c64(b) - z * w).norm() < 1e-15);
        assert!((fz.div(&fw, b).to_c64(b) - z / w).norm() < 1e-14);
        assert!(((&fz + &fw).to_c64(b) - (z + w)).norm() < 1e-15);
        let q = fz.div_int(&BigInt::from(7));
        assert!((q.to_c64(b) - z / 7.0).norm() < 1e-16);
        // exactness well below double precision
        let third = Fx::one(b).div_int(&BigInt::from(3));
        let back = third.scale_int(&BigInt::from(3));
        assert!((&back - &Fx::one(b)).mag_bits() <= 2);
    }
}
