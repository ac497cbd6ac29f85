//! Scalar abstraction shared by all closed-form family data.
//!
//! Every coefficient, weight, norm and polynomial value in this crate is a
//! rational function of the (dyadic-rational) `f64` parameters, apart from a
//! handful of per-family transcendental *common factors* that are applied in
//! `f64` at the very end. Implementing the formulas once, generically over
//! [`Scalar`], gives two evaluation paths for free:
//!
//! * `f64` — fast, used wherever a cancellation prepass says it is safe;
//! * [`BigRational`] — exact, used when catastrophic cancellation in an
//!   alternating hypergeometric sum would otherwise destroy the result.
//!
//! Exact values are converted back to `f64` with correct rounding via a
//! mantissa/exponent split, so the exact path produces entries accurate to
//! one ulp regardless of intermediate magnitudes (which routinely reach
//! 1e+100 for q-families at small q).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};

/// Minimal field interface. `abs_f64` is only used for diagnostics
/// (term-magnitude tracking in the `f64` path) and may be approximate.
pub trait Scalar: Clone {
    fn from_f64(v: f64) -> Self;
    fn from_i64(v: i64) -> Self;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn abs_f64(&self) -> f64;
    fn one() -> Self {
        Self::from_i64(1)
    }
}

impl Scalar for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn abs_f64(&self) -> f64 {
        self.abs()
    }
}

impl Scalar for BigRational {
    fn from_f64(v: f64) -> Self {
        BigRational::from_float(v).expect("finite f64 parameter")
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div(&self, o: &Self) -> Self {
        self / o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn abs_f64(&self) -> f64 {
        rat_to_f64(&self.abs())
    }
}

/// Significant bits kept by [`Dyadic`]. Far beyond any tolerance in this
/// crate: even an alternating sum cancelling 300 bits leaves a relative
/// error below 2^-400.
const DYADIC_PREC: u64 = 768;

/// Fixed-precision binary big-float m·2^e, truncated to [`DYADIC_PREC`]
/// significant bits after every operation.
///
/// The exact rational path is correct but slow when the f64 parameters enter
/// as full 53-bit fractions: powers like q^240 then carry ~12000-bit
/// numerators and every product pays a large gcd. This type keeps the same
/// formulas (via [`Scalar`]) at a fixed 768-bit precision, which is
/// indistinguishable from exact for every check in this crate while staying
/// orders of magnitude faster.
#[derive(Debug, Clone)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    fn normalize(mut self) -> Dyadic {
        if Zero::is_zero(&self.mant) {
            self.exp = 0;
            return self;
        }
        let excess = self.mant.bits() as i64 - DYADIC_PREC as i64;
        if excess > 0 {
            self.mant >>= excess as u64;
            self.exp += excess;
        }
        self
    }

    pub fn signum(&self) -> f64 {
        if Zero::is_zero(&self.mant) {
            0.0
        } else if self.mant.is_positive() {
            1.0
        } else {
            -1.0
        }
    }
}

/// Top 64+ bits as f64 mantissa plus the matching power of two.
fn dy_split(d: &Dyadic) -> (f64, i64) {
    let bits = d.mant.bits() as i64;
    let shift = (bits - 64).max(0);
    let head: BigInt = &d.mant >> shift as u64;
    (head.to_f64().expect("<=64-bit integer"), d.exp + shift)
}

/// Correctly-rounded (to ~1 ulp) conversion with overflow saturation.
pub fn dy_to_f64(d: &Dyadic) -> f64 {
    if Scalar::is_zero(d) {
        return 0.0;
    }
    let (m, e) = dy_split(d);
    if e > 1100 {
        return if m > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
    }
    if e < -1200 {
        return 0.0;
    }
    m * (e as f64).exp2()
}

/// sqrt of a nonnegative dyadic, rounded once at the end.
pub fn dy_sqrt_f64(d: &Dyadic) -> f64 {
    if Scalar::is_zero(d) {
        return 0.0;
    }
    debug_assert!(d.mant.is_positive());
    let (mut m, mut e) = dy_split(d);
    if e % 2 != 0 {
        m *= 2.0;
        e -= 1;
    }
    if e / 2 > 1100 {
        return f64::INFINITY;
    }
    if e / 2 < -1200 {
        return 0.0;
    }
    m.sqrt() * ((e / 2) as f64).exp2()
}

impl Scalar for Dyadic {
    fn from_f64(v: f64) -> Self {
        // every finite f64 is numer / 2^k exactly
        let r = BigRational::from_float(v).expect("finite f64 parameter");
        let dbits = r.denom().bits() as i64 - 1;
        Dyadic { mant: r.numer().clone(), exp: -dbits }
    }
    fn from_i64(v: i64) -> Self {
        Dyadic { mant: BigInt::from(v), exp: 0 }
    }
    fn add(&self, o: &Self) -> Self {
        if Scalar::is_zero(self) {
            return o.clone();
        }
        if Scalar::is_zero(o) {
            return self.clone();
        }
        let (hi, lo) = if self.exp >= o.exp { (self, o) } else { (o, self) };
        let diff = hi.exp - lo.exp;
        if diff > DYADIC_PREC as i64 + 64 {
            return hi.clone();
        }
        Dyadic { mant: (&hi.mant << diff as u64) + &lo.mant, exp: lo.exp }.normalize()
    }
    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }
    fn mul(&self, o: &Self) -> Self {
        Dyadic { mant: &self.mant * &o.mant, exp: self.exp + o.exp }.normalize()
    }
    fn div(&self, o: &Self) -> Self {
        debug_assert!(!Scalar::is_zero(o), "dyadic division by zero");
        let shift = DYADIC_PREC
            + 2
            + (o.mant.bits()).saturating_sub(self.mant.bits());
        Dyadic {
            mant: (&self.mant << shift) / &o.mant,
            exp: self.exp - o.exp - shift as i64,
        }
        .normalize()
    }
    fn neg(&self) -> Self {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(&self.mant)
    }
    fn abs_f64(&self) -> f64 {
        dy_to_f64(self).abs()
    }
}

/// b^e by repeated squaring; negative exponents via one division.
pub fn powi<S: Scalar>(b: &S, e: i64) -> S {
    if e < 0 {
        return S::one().div(&powi(b, -e));
    }
    let mut acc = S::one();
    let mut base = b.clone();
    let mut e = e as u64;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&base);
        }
        e >>= 1;
        if e > 0 {
            base = base.mul(&base);
        }
    }
    acc
}

/// Rising factorial (a)_k = a(a+1)...(a+k-1).
pub fn poch<S: Scalar>(a: &S, k: usize) -> S {
    let mut acc = S::one();
    for i in 0..k {
        acc = acc.mul(&a.add(&S::from_i64(i as i64)));
    }
    acc
}

/// q-shifted factorial (a;q)_k = prod_{i<k} (1 - a q^i).
pub fn qpoch<S: Scalar>(a: &S, q: &S, k: usize) -> S {
    let one = S::one();
    let mut acc = one.clone();
    let mut aq = a.clone();
    for _ in 0..k {
        acc = acc.mul(&one.sub(&aq));
        aq = aq.mul(q);
    }
    acc
}

pub fn factorial<S: Scalar>(k: usize) -> S {
    let mut acc = S::one();
    for i in 2..=k {
        acc = acc.mul(&S::from_i64(i as i64));
    }
    acc
}

pub fn binomial<S: Scalar>(n: usize, k: usize) -> S {
    // n!/(k!(n-k)!) with exact cancellation in the rational instantiation
    factorial::<S>(n).div(&factorial::<S>(k).mul(&factorial::<S>(n - k)))
}

/// (a;q)_inf in f64, truncated once the running factor is within one ulp of 1.
pub fn qpoch_inf(a: f64, q: f64) -> f64 {
    debug_assert!(q.abs() < 1.0);
    let mut acc = 1.0;
    let mut aq = a;
    for _ in 0..10_000 {
        if aq.abs() < 1e-18 {
            break;
        }
        acc *= 1.0 - aq;
        aq *= q;
    }
    acc
}

/// Splits a nonzero rational as m * 2^e with |m| in [2^63, 2^65): the
/// mantissa keeps >= 63 significant bits, far beyond f64, so downstream
/// rounding is correct to the last place.
fn rat_split(r: &BigRational) -> (f64, i64) {
    let num = r.numer();
    let den = r.denom();
    let nb = num.bits() as i64;
    let db = den.bits() as i64;
    let k = 64 - nb + db;
    let m: BigInt = if k >= 0 {
        (num << k as u64) / den
    } else {
        num / (den << (-k) as u64)
    };
    (m.to_f64().expect("<=66-bit integer"), -k)
}

/// Correctly-rounded (to ~1 ulp) conversion, safe for magnitudes far outside
/// the f64 range; saturates to +-inf / 0 instead of panicking.
pub fn rat_to_f64(r: &BigRational) -> f64 {
    if Zero::is_zero(r) {
        return 0.0;
    }
    let (m, e) = rat_split(r);
    if e > 1100 {
        return if m > 0.0 { f64::INFINITY } else { f64::NEG_INFINITY };
    }
    if e < -1200 {
        return 0.0;
    }
    // exp2 of an integer argument is exact
    m * (e as f64).exp2()
}

/// sqrt of a nonnegative rational, rounded once at the end.
pub fn rat_sqrt_f64(r: &BigRational) -> f64 {
    if Zero::is_zero(r) {
        return 0.0;
    }
    debug_assert!(r.is_positive());
    let (mut m, mut e) = rat_split(r);
    if e % 2 != 0 {
        m *= 2.0;
        e -= 1;
    }
    if e / 2 > 1100 {
        return f64::INFINITY;
    }
    if e / 2 < -1200 {
        return 0.0;
    }
    m.sqrt() * ((e / 2) as f64).exp2()
}

/// log2 |r|, accurate to ~1e-15 absolute; used for overflow-aware diagnostics.
pub fn rat_log2_abs(r: &BigRational) -> f64 {
    if Zero::is_zero(r) {
        return f64::NEG_INFINITY;
    }
    let (m, e) = rat_split(&r.abs());
    m.log2() + e as f64
}

pub fn rat_signum(r: &BigRational) -> f64 {
    if Zero::is_zero(r) {
        0.0
    } else if r.is_positive() {
        1.0
    } else {
        -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_roundtrip_extremes() {
        for &v in &[1.5, -3.75, 1e-300, 7.2e250, -css(), 1.0] {
            let r = BigRational::from_float(v).unwrap();
            assert_eq!(rat_to_f64(&r), v);
        }
        fn css() -> f64 {
            123456789.0e-120
        }
    }

    #[test]
    fn huge_rational_saturates() {
        let big = powi(&BigRational::from_f64(2.0), 5000);
        assert_eq!(rat_to_f64(&big), f64::INFINITY);
        assert_eq!(rat_to_f64(&powi(&BigRational::from_f64(2.0), -5000)), 0.0);
        assert!((rat_log2_abs(&big) - 5000.0).abs() < 1e-9);
    }

    #[test]
    fn sqrt_matches_f64() {
        let r = BigRational::from_f64(2.0);
        assert_eq!(rat_sqrt_f64(&r), 2f64.sqrt());
        let tiny = powi(&BigRational::from_f64(0.5), 600);
        assert!((rat_sqrt_f64(&tiny).log2() + 300.0).abs() < 1e-12);
    }

    #[test]
    fn dyadic_matches_exact_rational() {
        let q = 0.9f64;
        // big powers and q-Pochhammers agree with the exact path to ~2^-700
        let d = qpoch(&Dyadic::from_f64(0.3), &Dyadic::from_f64(q), 17)
            .mul(&powi(&Dyadic::from_f64(q), 240));
        let r = qpoch(&BigRational::from_f64(0.3), &BigRational::from_f64(q), 17)
            .mul(&powi(&BigRational::from_f64(q), 240));
        let rf = rat_to_f64(&r);
        assert!((dy_to_f64(&d) - rf).abs() <= rf.abs() * 1e-15);
        assert!((dy_sqrt_f64(&d) - rat_sqrt_f64(&r)).abs() <= rat_sqrt_f64(&r) * 1e-15);

        // division and signs
        let a = Dyadic::from_f64(-7.25).div(&Dyadic::from_f64(0.3));
        assert!((dy_to_f64(&a) + 7.25 / 0.3).abs() < 1e-15);
        assert_eq!(a.signum(), -1.0);
        assert_eq!(Dyadic::from_i64(0).signum(), 0.0);

        // exact cancellation yields exact zero
        let z = Dyadic::from_f64(1.5).sub(&Dyadic::from_f64(1.5));
        assert!(Scalar::is_zero(&z));
        assert_eq!(dy_to_f64(&z), 0.0);

        // saturation far outside the f64 range
        assert_eq!(dy_to_f64(&powi(&Dyadic::from_f64(2.0), 5000)), f64::INFINITY);
        assert_eq!(dy_to_f64(&powi(&Dyadic::from_f64(2.0), -5000)), 0.0);
    }

    #[test]
    fn pochhammers() {
        assert_eq!(poch(&3.0, 4), 3.0 * 4.0 * 5.0 * 6.0);
        assert_eq!(qpoch(&0.5, &0.5, 2), 0.5 * 0.75);
        assert_eq!(factorial::<f64>(6), 720.0);
        assert_eq!(binomial::<f64>(8, 3), 56.0);
        assert_eq!(powi(&2.0, -3), 0.125);
    }
}
