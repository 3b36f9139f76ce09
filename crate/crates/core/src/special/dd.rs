//! Double-double arithmetic: an unevaluated sum `hi + lo` of two `f64`s with
//! |lo| ≤ ulp(hi)/2, giving roughly 32 significant decimal digits.
//!
//! Only the operations the T-sequence needs are provided: the four basic
//! operations, natural log and exp. Algorithms follow the classic
//! error-free transformations (Knuth two-sum, FMA two-product).

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    pub hi: f64,
    pub lo: f64,
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    #[allow(clippy::approx_constant)]
    pub const LN_2: Self = Self {
        hi: 0.6931471805599453,
        lo: 2.3190468138462996e-17,
    };
    pub const HALF_LN_2PI: Self = Self {
        hi: 0.9189385332046728,
        lo: -3.8782941580672414e-17,
    };
    pub const EULER_GAMMA: Self = Self {
        hi: 0.5772156649015329,
        lo: -4.942915152430645e-18,
    };

    #[inline]
    pub const fn new(hi: f64, lo: f64) -> Self {
        Self { hi, lo }
    }

    #[inline]
    pub fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Exact conversion for any `u64`.
    pub fn from_u64(k: u64) -> Self {
        let hi = k as f64;
        // `hi` rounds k to 53 bits; the remainder is exact in i128.
        let rem = (k as i128 - hi as i128) as f64;
        let (s, e) = quick_two_sum(hi, rem);
        Self { hi: s, lo: e }
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    /// Largest `f64` not greater than the represented value.
    pub fn to_f64_down(self) -> f64 {
        let x = self.hi + self.lo;
        // Exact residual (hi + lo) − x; hi and x are within one ulp.
        let resid = (self.hi - x) + self.lo;
        if resid < 0.0 {
            x.next_down()
        } else {
            x
        }
    }

    /// Smallest `f64` not less than the represented value.
    pub fn to_f64_up(self) -> f64 {
        let x = self.hi + self.lo;
        let resid = (self.hi - x) + self.lo;
        if resid > 0.0 {
            x.next_up()
        } else {
            x
        }
    }

    #[inline]
    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    #[inline]
    pub fn is_sign_negative(self) -> bool {
        self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0)
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }

    pub fn sqr(self) -> Self {
        self * self
    }

    /// Multiply by 2^k exactly.
    fn ldexp(self, k: i32) -> Self {
        let s = 2f64.powi(k);
        Self {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    pub fn exp(self) -> Self {
        if self.hi > 709.0 {
            return Self::from_f64(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Self::ZERO;
        }
        // x = k ln2 + r, |r| ≤ ln2/2; then r is scaled by 2^-10 so that
        // a short Taylor series for expm1 converges to full precision.
        let k = (self.hi / Self::LN_2.hi).round();
        let r = (self - Self::LN_2 * k).ldexp(-10);

        let mut term = r;
        let mut sum = r;
        let mut i = 2.0;
        loop {
            term = term * r / i;
            sum += term;
            if term.hi.abs() <= 1e-34 * sum.hi.abs().max(f64::MIN_POSITIVE) {
                break;
            }
            i += 1.0;
            if i > 40.0 {
                break;
            }
        }
        // expm1(2y) = 2 expm1(y) + expm1(y)^2, applied ten times.
        for _ in 0..10 {
            sum = sum * 2.0 + sum.sqr();
        }
        (sum + 1.0).ldexp(k as i32)
    }

    /// Natural logarithm via one Newton step on exp, starting from the
    /// correctly-rounded `f64` logarithm.
    pub fn ln(self) -> Self {
        assert!(self.hi > 0.0, "DoubleDouble::ln of non-positive value");
        let y = Self::from_f64(self.hi.ln());
        // y + x·exp(−y) − 1
        y + self * (-y).exp() - 1.0
    }

    /// ln(1 + x) accurate for small |x|.
    pub fn ln_1p(self) -> Self {
        if self.hi.abs() > 0.25 {
            return (self + 1.0).ln();
        }
        let y = Self::from_f64(self.hi.ln_1p());
        // Newton on expm1: y + (x − expm1(y)) / (1 + expm1(y)).
        let em1 = y.exp_m1();
        y + (self - em1) / (em1 + 1.0)
    }

    fn exp_m1(self) -> Self {
        if self.hi.abs() > 0.25 {
            return self.exp() - 1.0;
        }
        let mut term = self;
        let mut sum = self;
        let mut i = 2.0;
        while term.hi.abs() > 1e-34 * sum.hi.abs().max(f64::MIN_POSITIVE) && i < 60.0 {
            term = term * self / i;
            sum += term;
            i += 1.0;
        }
        sum
    }
}

impl fmt::Display for DoubleDouble {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e} + {:e}", self.hi, self.lo)
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

impl PartialEq<f64> for DoubleDouble {
    fn eq(&self, other: &f64) -> bool {
        *self == Self::from_f64(*other)
    }
}

impl PartialOrd<f64> for DoubleDouble {
    fn partial_cmp(&self, other: &f64) -> Option<Ordering> {
        self.partial_cmp(&Self::from_f64(*other))
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, rhs: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, rhs.hi);
        let (t1, t2) = two_sum(self.lo, rhs.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        let (hi, lo) = quick_two_sum(s1, s2 + t2);
        Self { hi, lo }
    }
}

impl Add<f64> for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, rhs: f64) -> Self {
        let (s1, s2) = two_sum(self.hi, rhs);
        let (hi, lo) = quick_two_sum(s1, s2 + self.lo);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: Self) -> Self {
        self + (-rhs)
    }
}

impl Sub<f64> for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, rhs: f64) -> Self {
        self + (-rhs)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: Self) -> Self {
        let (p1, p2) = two_prod(self.hi, rhs.hi);
        let p2 = p2 + (self.hi * rhs.lo + self.lo * rhs.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        Self { hi, lo }
    }
}

impl Mul<f64> for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, rhs: f64) -> Self {
        let (p1, p2) = two_prod(self.hi, rhs);
        let (hi, lo) = quick_two_sum(p1, p2 + self.lo * rhs);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let q1 = self.hi / rhs.hi;
        let r = self - rhs * q1;
        let q2 = r.hi / rhs.hi;
        let r = r - rhs * q2;
        let q3 = r.hi / rhs.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Self { hi, lo } + q3
    }
}

impl Div<f64> for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        self / Self::from_f64(rhs)
    }
}

impl AddAssign for DoubleDouble {
    #[inline]
    fn add_assign(&mut self, rhs: Self) {
        *self = *self + rhs;
    }
}

impl AddAssign<f64> for DoubleDouble {
    #[inline]
    fn add_assign(&mut self, rhs: f64) {
        *self = *self + rhs;
    }
}

impl SubAssign for DoubleDouble {
    #[inline]
    fn sub_assign(&mut self, rhs: Self) {
        *self = *self - rhs;
    }
}

impl Sum for DoubleDouble {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference digits from a 60-digit multiprecision evaluation.
    fn assert_dd_close(x: DoubleDouble, hi: f64, lo: f64, rel: f64) {
        let diff = (x - DoubleDouble::new(hi, lo)).to_f64().abs();
        assert!(
            diff <= rel * hi.abs(),
            "{x} vs {hi:e}+{lo:e}: diff {diff:e}"
        );
    }

    #[test]
    fn ln_matches_multiprecision_values() {
        // ln 3, ln 10^5, ln 2·10^6+1
        assert_dd_close(
            DoubleDouble::from_f64(3.0).ln(),
            1.0986122886681098,
            -9.07129723500153e-17,
            1e-30,
        );
        assert_dd_close(
            DoubleDouble::from_f64(1e5).ln(),
            11.512925464970229,
            -1.971996919909995e-16,
            1e-30,
        );
        assert_dd_close(
            DoubleDouble::from_f64(2_000_001.0).ln(),
            14.508658238524095,
            -7.828864976240037e-16,
            1e-30,
        );
    }

    #[test]
    fn exp_inverts_ln() {
        for &x in &[0.5, 1.0, 7.25, 123.0, 1e6, 3.3e-5] {
            let d = DoubleDouble::from_f64(x);
            let back = d.ln().exp();
            assert!(((back - d) / d).to_f64().abs() < 1e-30, "x={x}");
        }
    }

    #[test]
    fn ln_1p_small_argument() {
        let x = DoubleDouble::from_f64(1e-10);
        let y = x.ln_1p();
        // x − x²/2 + x³/3, evaluated in double-double
        let expect = x - x.sqr() * 0.5 + x.sqr() * x / 3.0;
        assert!(((y - expect) / expect).to_f64().abs() < 1e-28);
    }

    #[test]
    fn directed_rounding_brackets_value() {
        let third = DoubleDouble::ONE / 3.0;
        let lo = third.to_f64_down();
        let hi = third.to_f64_up();
        assert!(lo < hi);
        assert!(DoubleDouble::from_f64(lo) <= third);
        assert!(DoubleDouble::from_f64(hi) >= third);
        assert_eq!(hi, lo.next_up());

        let exact = DoubleDouble::from_f64(0.5);
        assert_eq!(exact.to_f64_down(), 0.5);
        assert_eq!(exact.to_f64_up(), 0.5);
    }

    #[test]
    fn from_u64_is_exact() {
        let k = (1u64 << 60) + 3;
        let d = DoubleDouble::from_u64(k);
        assert_eq!(d.hi as i128 + d.lo as i128, k as i128);
    }
}
