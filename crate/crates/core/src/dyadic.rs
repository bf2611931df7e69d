//! Exact dyadic rationals `m · 2^e`.
//!
//! Every finite `f64` is a dyadic rational, so predicates in the rectangle
//! mesher can be evaluated without rounding by converting inputs here.

use core::cmp::Ordering;
use core::ops::{Add, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default)]
pub struct Dyadic {
    mant: i128,
    exp: i32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { mant: 0, exp: 0 };

    fn normalized(mut mant: i128, mut exp: i32) -> Self {
        if mant == 0 {
            return Dyadic::ZERO;
        }
        let tz = mant.trailing_zeros();
        mant >>= tz;
        exp += tz as i32;
        Dyadic { mant, exp }
    }

    pub fn from_int(n: i64) -> Self {
        Self::normalized(n as i128, 0)
    }

    /// `2^k`.
    pub fn pow2(k: i32) -> Self {
        Dyadic { mant: 1, exp: k }
    }

    /// `n · 2^k`.
    pub fn scaled(n: i64, k: i32) -> Self {
        Self::normalized(n as i128, k)
    }

    /// Exact conversion; panics on non-finite input.
    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "non-finite value has no dyadic form");
        if x == 0.0 {
            return Dyadic::ZERO;
        }
        let bits = x.to_bits();
        let sign = if bits >> 63 == 1 { -1i128 } else { 1 };
        let raw_exp = ((bits >> 52) & 0x7ff) as i32;
        let frac = (bits & ((1u64 << 52) - 1)) as i128;
        let (mant, exp) = if raw_exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1i128 << 52), raw_exp - 1075)
        };
        Self::normalized(sign * mant, exp)
    }

    pub fn to_f64(self) -> f64 {
        // mantissas produced from f64 inputs stay well inside 2^100
        (self.mant as f64) * libm::exp2(self.exp as f64)
    }

    /// Largest integer not exceeding the value.
    pub fn floor(self) -> i64 {
        if self.exp >= 0 {
            (self.mant << self.exp) as i64
        } else if self.exp <= -127 {
            if self.mant < 0 { -1 } else { 0 }
        } else {
            (self.mant >> (-self.exp)) as i64
        }
    }

    /// Smallest integer not below the value.
    pub fn ceil(self) -> i64 {
        -(-self).floor()
    }

    pub fn is_zero(self) -> bool {
        self.mant == 0
    }

    pub fn abs(self) -> Self {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    /// Multiply by `2^k`.
    #[allow(clippy::should_implement_trait)]
    pub fn shl(self, k: i32) -> Self {
        if self.mant == 0 {
            self
        } else {
            Dyadic { mant: self.mant, exp: self.exp + k }
        }
    }

    /// Brings both operands to a common exponent. Panics if the shift would
    /// overflow the 128-bit mantissa.
    fn align(a: Self, b: Self) -> (i128, i128, i32) {
        if a.mant == 0 {
            return (0, b.mant, b.exp);
        }
        if b.mant == 0 {
            return (a.mant, 0, a.exp);
        }
        let exp = a.exp.min(b.exp);
        let sa = shift(a.mant, (a.exp - exp) as u32);
        let sb = shift(b.mant, (b.exp - exp) as u32);
        (sa, sb, exp)
    }
}

fn shift(m: i128, k: u32) -> i128 {
    let bits = 128 - m.unsigned_abs().leading_zeros();
    assert!(bits + k < 127, "dyadic mantissa overflow");
    m << k
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, o: Dyadic) -> Dyadic {
        let (a, b, e) = Dyadic::align(self, o);
        Dyadic::normalized(a + b, e)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, o: Dyadic) -> Dyadic {
        self + (-o)
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { mant: -self.mant, exp: self.exp }
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    // exponents add
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn mul(self, o: Dyadic) -> Dyadic {
        let m = self.mant.checked_mul(o.mant).expect("dyadic mantissa overflow");
        Dyadic::normalized(m, self.exp + o.exp)
    }
}

impl PartialEq for Dyadic {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}

impl Eq for Dyadic {}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, o: &Self) -> Ordering {
        let (sa, sb) = (self.mant.signum(), o.mant.signum());
        if sa != sb || sa == 0 {
            return sa.cmp(&sb);
        }
        // same nonzero sign: compare magnitudes by leading bit before aligning
        let top = |d: &Dyadic| (128 - d.mant.unsigned_abs().leading_zeros()) as i64 + d.exp as i64;
        let by_mag = top(self).cmp(&top(o)).then_with(|| {
            let (a, b, _) = Dyadic::align(self.abs(), o.abs());
            a.cmp(&b)
        });
        if sa > 0 { by_mag } else { by_mag.reverse() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basic_values() {
        assert_eq!(Dyadic::from_f64(0.75), Dyadic::scaled(3, -2));
        assert_eq!(Dyadic::from_f64(-6.0), Dyadic::from_int(-6));
        assert_eq!(Dyadic::pow2(-3).to_f64(), 0.125);
        assert!(Dyadic::from_f64(0.1) > Dyadic::scaled(1, -4));
        assert!(Dyadic::from_f64(1e-300) < Dyadic::from_int(1));
        assert!(Dyadic::from_f64(-1e-300) > Dyadic::from_int(-1));
    }

    #[test]
    fn floor_and_ceil() {
        assert_eq!(Dyadic::from_f64(2.5).floor(), 2);
        assert_eq!(Dyadic::from_f64(-2.5).floor(), -3);
        assert_eq!(Dyadic::from_f64(-2.5).ceil(), -2);
        assert_eq!(Dyadic::from_int(7).ceil(), 7);
        assert_eq!(Dyadic::from_f64(1e-300).ceil(), 1);
    }

    proptest! {
        #[test]
        fn f64_round_trip(x in -1e6f64..1e6) {
            prop_assert_eq!(Dyadic::from_f64(x).to_f64(), x);
        }

        #[test]
        fn ordering_matches_f64(x in -1e3f64..1e3, y in -1e3f64..1e3) {
            prop_assert_eq!(Dyadic::from_f64(x).cmp(&Dyadic::from_f64(y)), x.partial_cmp(&y).unwrap());
        }

        #[test]
        fn floor_matches_f64(x in -1e6f64..1e6) {
            prop_assert_eq!(Dyadic::from_f64(x).floor(), libm::floor(x) as i64);
        }

        #[test]
        fn sum_is_exact(x in -1e3f64..1e3, y in -1e3f64..1e3) {
            let s = Dyadic::from_f64(x) + Dyadic::from_f64(y);
            // x + y rounds; the exact sum minus the rounded one recovers the error term
            let err = s - Dyadic::from_f64(x + y);
            prop_assert!(err.to_f64().abs() <= (x + y).abs() * f64::EPSILON);
        }
    }
}
