//! Closed-form data for the 15 lattice families: coefficients B, D, the
//! sinusoidal coordinate η, the spectrum 𝓔, the polynomials P̌_n(x), weights
//! φ₀², norms d_n² and leading coefficients α_n, together with parameter
//! validation and the truncation policy for the five semi-infinite families.
//!
//! Every quantity is implemented once, generically over [`Scalar`], and
//! exposed in `f64` with correct rounding: the `f64` fast path is used when a
//! term-magnitude prepass certifies the hypergeometric sum is benign, and the
//! exact rational path takes over when alternating terms reach ~1e+100 while
//! the result is O(1) (routine for q-families at small q).

use crate::error::{Error, Result};
use crate::exact::{
    binomial, dy_to_f64, factorial, poch, powi, qpoch, qpoch_inf, rat_sqrt_f64, rat_to_f64,
    Dyadic, Scalar,
};
use num_rational::BigRational;

/// Relative slack (vs one ulp per term) above which the exact path kicks in.
const EXACT_FALLBACK_THRESHOLD: f64 = 1e-13;
/// Truncation scan cap for semi-infinite lattices.
const M_MAX: usize = 500;
/// Mode-cap threshold: modes are exposed while the norm they lose to the
/// truncated tail, 1 - Σ_{x<=M} φ̂_n(x)², stays below this.
const MODE_CAP_DEFECT: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyId {
    Krawtchouk,
    Hahn,
    DualHahn,
    Racah,
    Meixner,
    Charlier,
    QuantumQKrawtchouk,
    QKrawtchouk,
    AffineQKrawtchouk,
    QHahn,
    DualQHahn,
    QRacah,
    LittleQJacobi,
    LittleQLaguerre,
    AlSalamCarlitzII,
}

impl FamilyId {
    pub const ALL: [FamilyId; 15] = [
        FamilyId::Krawtchouk,
        FamilyId::Hahn,
        FamilyId::DualHahn,
        FamilyId::Racah,
        FamilyId::Meixner,
        FamilyId::Charlier,
        FamilyId::QuantumQKrawtchouk,
        FamilyId::QKrawtchouk,
        FamilyId::AffineQKrawtchouk,
        FamilyId::QHahn,
        FamilyId::DualQHahn,
        FamilyId::QRacah,
        FamilyId::LittleQJacobi,
        FamilyId::LittleQLaguerre,
        FamilyId::AlSalamCarlitzII,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            FamilyId::Krawtchouk => "krawtchouk",
            FamilyId::Hahn => "hahn",
            FamilyId::DualHahn => "dual-hahn",
            FamilyId::Racah => "racah",
            FamilyId::Meixner => "meixner",
            FamilyId::Charlier => "charlier",
            FamilyId::QuantumQKrawtchouk => "quantum-q-krawtchouk",
            FamilyId::QKrawtchouk => "q-krawtchouk",
            FamilyId::AffineQKrawtchouk => "affine-q-krawtchouk",
            FamilyId::QHahn => "q-hahn",
            FamilyId::DualQHahn => "dual-q-hahn",
            FamilyId::QRacah => "q-racah",
            FamilyId::LittleQJacobi => "little-q-jacobi",
            FamilyId::LittleQLaguerre => "little-q-laguerre",
            FamilyId::AlSalamCarlitzII => "al-salam-carlitz-ii",
        }
    }

    pub fn from_tag(tag: &str) -> Option<FamilyId> {
        FamilyId::ALL.iter().copied().find(|f| f.tag() == tag)
    }

    /// Ten families live on {0..N}; five on the half line.
    pub fn is_finite(&self) -> bool {
        !matches!(
            self,
            FamilyId::Meixner
                | FamilyId::Charlier
                | FamilyId::LittleQJacobi
                | FamilyId::LittleQLaguerre
                | FamilyId::AlSalamCarlitzII
        )
    }

    pub fn param_names(&self) -> &'static [&'static str] {
        match self {
            FamilyId::Krawtchouk => &["p"],
            FamilyId::Hahn | FamilyId::DualHahn => &["a", "b"],
            FamilyId::Racah => &["d", "a", "b"],
            FamilyId::Meixner => &["beta", "c"],
            FamilyId::Charlier => &["a"],
            FamilyId::QuantumQKrawtchouk | FamilyId::QKrawtchouk | FamilyId::AffineQKrawtchouk => {
                &["q", "p"]
            }
            FamilyId::QHahn | FamilyId::DualQHahn => &["q", "a", "b"],
            FamilyId::QRacah => &["q", "d", "a", "b"],
            FamilyId::LittleQJacobi => &["q", "a", "b"],
            FamilyId::LittleQLaguerre | FamilyId::AlSalamCarlitzII => &["q", "a"],
        }
    }

    pub fn constraints(&self) -> &'static str {
        match self {
            FamilyId::Krawtchouk => "0<p<1",
            FamilyId::Hahn | FamilyId::DualHahn => "a>0, b>0",
            FamilyId::Racah => "d>0, a>N+d, 0<b<1+d",
            FamilyId::Meixner => "beta>0, 0<c<1",
            FamilyId::Charlier => "a>0",
            FamilyId::QuantumQKrawtchouk => "0<q<1, p>q^-N",
            FamilyId::QKrawtchouk => "0<q<1, p>0",
            FamilyId::AffineQKrawtchouk => "0<q<1, 0<p<q^-1",
            FamilyId::QHahn | FamilyId::DualQHahn => "0<q<1, 0<a<1, 0<b<1",
            FamilyId::QRacah => "0<q<1, 0<d<1, 0<a<q^N*d, q*d<b<1",
            FamilyId::LittleQJacobi => "0<q<1, 0<a<q^-1, b<q^-1",
            FamilyId::LittleQLaguerre | FamilyId::AlSalamCarlitzII => "0<q<1, 0<a<q^-1",
        }
    }
}

/// Per-family parameters; the variant implies the family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyParams {
    Krawtchouk { p: f64 },
    Hahn { a: f64, b: f64 },
    DualHahn { a: f64, b: f64 },
    Racah { d: f64, a: f64, b: f64 },
    Meixner { beta: f64, c: f64 },
    Charlier { a: f64 },
    QuantumQKrawtchouk { q: f64, p: f64 },
    QKrawtchouk { q: f64, p: f64 },
    AffineQKrawtchouk { q: f64, p: f64 },
    QHahn { q: f64, a: f64, b: f64 },
    DualQHahn { q: f64, a: f64, b: f64 },
    QRacah { q: f64, d: f64, a: f64, b: f64 },
    LittleQJacobi { q: f64, a: f64, b: f64 },
    LittleQLaguerre { q: f64, a: f64 },
    AlSalamCarlitzII { q: f64, a: f64 },
}

impl FamilyParams {
    pub fn id(&self) -> FamilyId {
        match self {
            FamilyParams::Krawtchouk { .. } => FamilyId::Krawtchouk,
            FamilyParams::Hahn { .. } => FamilyId::Hahn,
            FamilyParams::DualHahn { .. } => FamilyId::DualHahn,
            FamilyParams::Racah { .. } => FamilyId::Racah,
            FamilyParams::Meixner { .. } => FamilyId::Meixner,
            FamilyParams::Charlier { .. } => FamilyId::Charlier,
            FamilyParams::QuantumQKrawtchouk { .. } => FamilyId::QuantumQKrawtchouk,
            FamilyParams::QKrawtchouk { .. } => FamilyId::QKrawtchouk,
            FamilyParams::AffineQKrawtchouk { .. } => FamilyId::AffineQKrawtchouk,
            FamilyParams::QHahn { .. } => FamilyId::QHahn,
            FamilyParams::DualQHahn { .. } => FamilyId::DualQHahn,
            FamilyParams::QRacah { .. } => FamilyId::QRacah,
            FamilyParams::LittleQJacobi { .. } => FamilyId::LittleQJacobi,
            FamilyParams::LittleQLaguerre { .. } => FamilyId::LittleQLaguerre,
            FamilyParams::AlSalamCarlitzII { .. } => FamilyId::AlSalamCarlitzII,
        }
    }

    /// (name, value) pairs in canonical order.
    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        match *self {
            FamilyParams::Krawtchouk { p } => vec![("p", p)],
            FamilyParams::Hahn { a, b } | FamilyParams::DualHahn { a, b } => {
                vec![("a", a), ("b", b)]
            }
            FamilyParams::Racah { d, a, b } => vec![("d", d), ("a", a), ("b", b)],
            FamilyParams::Meixner { beta, c } => vec![("beta", beta), ("c", c)],
            FamilyParams::Charlier { a } => vec![("a", a)],
            FamilyParams::QuantumQKrawtchouk { q, p }
            | FamilyParams::QKrawtchouk { q, p }
            | FamilyParams::AffineQKrawtchouk { q, p } => vec![("q", q), ("p", p)],
            FamilyParams::QHahn { q, a, b }
            | FamilyParams::DualQHahn { q, a, b }
            | FamilyParams::LittleQJacobi { q, a, b } => vec![("q", q), ("a", a), ("b", b)],
            FamilyParams::QRacah { q, d, a, b } => vec![("q", q), ("d", d), ("a", a), ("b", b)],
            FamilyParams::LittleQLaguerre { q, a } | FamilyParams::AlSalamCarlitzII { q, a } => {
                vec![("q", q), ("a", a)]
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LatticeSpec {
    Finite { n: usize },
    /// Working lattice {0..M} certified to carry all but `eps_tail` of the
    /// weight's mass.
    SemiInfinite { m: usize, eps_tail: f64 },
}

/// What the caller asks for; `validate` turns it into a certified [`LatticeSpec`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LatticeRequest {
    Finite { n: usize },
    SemiInfinite { eps_tail: f64 },
}

impl LatticeRequest {
    pub fn semi_infinite_default() -> LatticeRequest {
        LatticeRequest::SemiInfinite { eps_tail: 1e-14 }
    }
}

/// A validated family + parameters + lattice. Immutable; all operations on it
/// are pure, so instances are freely shared across threads.
#[derive(Debug, Clone)]
pub struct FamilyInstance {
    id: FamilyId,
    params: FamilyParams,
    lattice: LatticeSpec,
    /// number of lattice points |𝓧| (N+1 finite, M+1 truncated)
    n_points: usize,
    /// highest exposed mode index (N finite; truncation-limited otherwise)
    n_max: usize,
}

impl FamilyInstance {
    pub fn id(&self) -> FamilyId {
        self.id
    }
    pub fn params(&self) -> &FamilyParams {
        &self.params
    }
    pub fn lattice(&self) -> LatticeSpec {
        self.lattice
    }
    pub fn n_points(&self) -> usize {
        self.n_points
    }
    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// N for finite lattices, -1 sentinel otherwise (never read by the
    /// semi-infinite formulas).
    fn nn(&self) -> i64 {
        match self.lattice {
            LatticeSpec::Finite { n } => n as i64,
            LatticeSpec::SemiInfinite { .. } => -1,
        }
    }

    fn check_x(&self, x: usize) -> Result<()> {
        if x >= self.n_points {
            return Err(Error::IndexOutOfRange(format!(
                "x={} outside lattice of {} points",
                x, self.n_points
            )));
        }
        Ok(())
    }

    fn check_n(&self, n: usize) -> Result<()> {
        if n >= self.n_points {
            return Err(Error::IndexOutOfRange(format!(
                "n={} outside index range of {} points",
                n, self.n_points
            )));
        }
        Ok(())
    }

    // ----- public f64 interface (correctly rounded via the exact forms) -----

    pub fn coeff_b(&self, x: usize) -> Result<f64> {
        self.check_x(x)?;
        Ok(rat_to_f64(&self.b_gen::<BigRational>(x as i64)))
    }

    pub fn coeff_d(&self, x: usize) -> Result<f64> {
        self.check_x(x)?;
        if x == 0 {
            return Ok(0.0);
        }
        Ok(rat_to_f64(&self.d_gen::<BigRational>(x as i64)))
    }

    pub fn eta(&self, x: usize) -> Result<f64> {
        self.check_x(x)?;
        Ok(rat_to_f64(&self.eta_gen::<BigRational>(x as i64)))
    }

    pub fn energy(&self, n: usize) -> Result<f64> {
        self.check_n(n)?;
        Ok(rat_to_f64(&self.energy_gen::<BigRational>(n as i64)))
    }

    /// Least upper bound of the spectrum: 𝓔(N) for finite lattices, the
    /// analytic limit for bounded semi-infinite spectra, +inf otherwise.
    pub fn energy_sup(&self) -> f64 {
        match self.lattice {
            LatticeSpec::Finite { n } => self.energy(n).expect("N in range"),
            LatticeSpec::SemiInfinite { .. } => match self.params {
                // 𝓔(n) = 1 - q^n
                FamilyParams::AlSalamCarlitzII { .. } => 1.0,
                _ => f64::INFINITY,
            },
        }
    }

    /// P̌_n(x): f64 fast path with a cancellation prepass, exact fallback.
    pub fn poly(&self, n: usize, x: usize) -> Result<f64> {
        self.check_n(n)?;
        self.check_x(x)?;
        Ok(self.poly_unchecked(n, x))
    }

    fn poly_unchecked(&self, n: usize, x: usize) -> f64 {
        let (v, maxterm) = self.poly_gen::<f64>(n, x);
        if v.is_finite() && maxterm * 1e-16 * (n as f64 + 1.0) <= EXACT_FALLBACK_THRESHOLD * v.abs()
        {
            return v;
        }
        dy_to_f64(&self.poly_dy(n, x))
    }

    /// Exact evaluation of P̌_n(x) - P̌_n(x2), rounded once; used by the
    /// difference-equation residual checks where the naive f64 difference of
    /// two large near-equal values would dominate the residual.
    pub fn poly_diff(&self, n: usize, x: usize, x2: usize) -> Result<f64> {
        self.check_n(n)?;
        self.check_x(x)?;
        self.check_x(x2)?;
        Ok(rat_to_f64(&self.poly_rat(n, x).sub(&self.poly_rat(n, x2))))
    }

    /// Relative residual of the defining three-term difference equation
    /// B(x)[P̌_n(x) − P̌_n(x+1)] + D(x)[P̌_n(x) − P̌_n(x−1)] = 𝓔(n) P̌_n(x)
    /// over the whole lattice. Each of the three terms is evaluated exactly
    /// and rounded once, so the result measures the identity itself rather
    /// than floating-point cancellation between huge near-equal values.
    pub fn difeq_residual(&self, n: usize) -> Result<f64> {
        self.check_n(n)?;
        let e = self.energy_rat(n);
        let finite_top = match self.lattice {
            LatticeSpec::Finite { n } => Some(n),
            LatticeSpec::SemiInfinite { .. } => None,
        };
        let mut worst = 0.0f64;
        let mut scale = 0.0f64;
        for x in 0..self.n_points {
            let px = self.poly_rat(n, x);
            let tb = if finite_top == Some(x) {
                0.0 // B(N) = 0 exactly; P̌ at N+1 never enters
            } else {
                rat_to_f64(&self.b_rat(x).mul(&px.sub(&self.poly_rat(n, x + 1))))
            };
            let td = if x == 0 {
                0.0
            } else {
                rat_to_f64(&self.d_rat(x).mul(&px.sub(&self.poly_rat(n, x - 1))))
            };
            let te = rat_to_f64(&e.mul(&px));
            scale = scale.max(tb.abs()).max(td.abs()).max(te.abs());
            worst = worst.max((tb + td - te).abs());
        }
        if scale == 0.0 {
            return Ok(0.0); // n = 0: every term is identically zero
        }
        Ok(worst / scale)
    }

    /// φ₀²(x), the orthogonality weight; rational for every family.
    pub fn weight(&self, x: usize) -> Result<f64> {
        self.check_x(x)?;
        Ok(rat_to_f64(&self.phi0sq_gen::<BigRational>(x)))
    }

    /// φ₀(x) > 0.
    pub fn sqrt_weight(&self, x: usize) -> Result<f64> {
        self.check_x(x)?;
        Ok(rat_sqrt_f64(&self.phi0sq_gen::<BigRational>(x)))
    }

    /// d_n² (rational core times the family's transcendental common factor).
    pub fn norm_sq(&self, n: usize) -> Result<f64> {
        self.check_n(n)?;
        Ok(rat_to_f64(&self.dn2_core_gen::<BigRational>(n)) * self.dn2_common())
    }

    /// α_n, the coefficient of η^n in P_n(η).
    pub fn leading_coeff(&self, n: usize) -> Result<f64> {
        self.check_n(n)?;
        Ok(rat_to_f64(&self.alpha_gen::<BigRational>(n)))
    }

    // ----- exact accessors used by the spectral/fermion/stochastic modules -----

    pub(crate) fn b_rat(&self, x: usize) -> BigRational {
        self.b_gen::<BigRational>(x as i64)
    }
    pub(crate) fn d_rat(&self, x: usize) -> BigRational {
        if x == 0 {
            return Scalar::from_i64(0);
        }
        self.d_gen::<BigRational>(x as i64)
    }
    pub(crate) fn energy_rat(&self, n: usize) -> BigRational {
        self.energy_gen::<BigRational>(n as i64)
    }
    pub(crate) fn poly_rat(&self, n: usize, x: usize) -> BigRational {
        self.poly_gen::<BigRational>(n, x).0
    }

    // 768-bit dyadic variants: same formulas, fixed precision, much faster
    // when the parameters are full 53-bit fractions.
    pub(crate) fn energy_dy(&self, n: usize) -> Dyadic {
        self.energy_gen::<Dyadic>(n as i64)
    }
    pub(crate) fn poly_dy(&self, n: usize, x: usize) -> Dyadic {
        self.poly_gen::<Dyadic>(n, x).0
    }
    pub(crate) fn phi0sq_dy(&self, x: usize) -> Dyadic {
        self.phi0sq_gen::<Dyadic>(x)
    }
    pub(crate) fn dn2_core_dy(&self, n: usize) -> Dyadic {
        self.dn2_core_gen::<Dyadic>(n)
    }

    /// Transcendental factor of d_n², independent of n; 1 for the ten finite
    /// families. Multiplying a whole eigenvector by this common scalar costs
    /// one rounding and cannot disturb residuals or orthonormality.
    pub(crate) fn dn2_common(&self) -> f64 {
        match self.params {
            FamilyParams::Meixner { beta, c } => (1.0 - c).powf(beta),
            FamilyParams::Charlier { a } => (-a).exp(),
            FamilyParams::LittleQJacobi { q, a, b } => {
                qpoch_inf(a * q, q) / qpoch_inf(a * b * q * q, q)
            }
            FamilyParams::LittleQLaguerre { q, a } | FamilyParams::AlSalamCarlitzII { q, a } => {
                qpoch_inf(a * q, q)
            }
            _ => 1.0,
        }
    }

    // ----- generic closed forms -----

    fn b_gen<S: Scalar>(&self, x: i64) -> S {
        let nn = self.nn();
        let one = S::one();
        match self.params {
            FamilyParams::Krawtchouk { p } => {
                S::from_f64(p).mul(&S::from_i64(nn - x))
            }
            FamilyParams::Hahn { a, b: _ } => {
                let a = S::from_f64(a);
                S::from_i64(x).add(&a).mul(&S::from_i64(nn - x))
            }
            FamilyParams::DualHahn { a, b } => {
                let (a, b) = (S::from_f64(a), S::from_f64(b));
                let ab = a.add(&b);
                let xs = S::from_i64(x);
                xs.add(&a)
                    .mul(&xs.add(&ab).sub(&one))
                    .mul(&S::from_i64(nn - x))
                    .div(
                        &S::from_i64(2 * x - 1)
                            .add(&ab)
                            .mul(&S::from_i64(2 * x).add(&ab)),
                    )
            }
            FamilyParams::Racah { d, a, b } => {
                let (a, b, d) = (S::from_f64(a), S::from_f64(b), S::from_f64(d));
                let xs = S::from_i64(x);
                xs.add(&a)
                    .mul(&xs.add(&b))
                    .mul(&S::from_i64(x - nn))
                    .mul(&xs.add(&d))
                    .neg()
                    .div(
                        &S::from_i64(2 * x)
                            .add(&d)
                            .mul(&S::from_i64(2 * x + 1).add(&d)),
                    )
            }
            FamilyParams::Meixner { beta, c } => {
                let (beta, c) = (S::from_f64(beta), S::from_f64(c));
                c.mul(&S::from_i64(x).add(&beta)).div(&one.sub(&c))
            }
            FamilyParams::Charlier { a } => S::from_f64(a),
            FamilyParams::QuantumQKrawtchouk { q, p } => {
                let (q, p) = (S::from_f64(q), S::from_f64(p));
                powi(&q, x).mul(&powi(&q, x - nn).sub(&one)).div(&p)
            }
            FamilyParams::QKrawtchouk { q, p: _ } => {
                powi(&S::from_f64(q), x - nn).sub(&one)
            }
            FamilyParams::AffineQKrawtchouk { q, p } => {
                let (q, p) = (S::from_f64(q), S::from_f64(p));
                powi(&q, x - nn)
                    .sub(&one)
                    .mul(&one.sub(&p.mul(&powi(&q, x + 1))))
            }
            FamilyParams::QHahn { q, a, b: _ } => {
                let (q, a) = (S::from_f64(q), S::from_f64(a));
                one.sub(&a.mul(&powi(&q, x)))
                    .mul(&powi(&q, x - nn).sub(&one))
            }
            FamilyParams::DualQHahn { q, a, b } => {
                let (q, a, b) = (S::from_f64(q), S::from_f64(a), S::from_f64(b));
                let ab = a.mul(&b);
                powi(&q, x - nn)
                    .sub(&one)
                    .mul(&one.sub(&a.mul(&powi(&q, x))))
                    .mul(&one.sub(&ab.mul(&powi(&q, x - 1))))
                    .div(
                        &one.sub(&ab.mul(&powi(&q, 2 * x - 1)))
                            .mul(&one.sub(&ab.mul(&powi(&q, 2 * x)))),
                    )
            }
            FamilyParams::QRacah { q, d, a, b } => {
                let (q, d, a, b) = (
                    S::from_f64(q),
                    S::from_f64(d),
                    S::from_f64(a),
                    S::from_f64(b),
                );
                let qx = powi(&q, x);
                one.sub(&a.mul(&qx))
                    .mul(&one.sub(&b.mul(&qx)))
                    .mul(&one.sub(&powi(&q, x - nn)))
                    .mul(&one.sub(&d.mul(&qx)))
                    .neg()
                    .div(
                        &one.sub(&d.mul(&powi(&q, 2 * x)))
                            .mul(&one.sub(&d.mul(&powi(&q, 2 * x + 1)))),
                    )
            }
            FamilyParams::LittleQJacobi { q, a, b } => {
                let (q, a, b) = (S::from_f64(q), S::from_f64(a), S::from_f64(b));
                a.mul(&powi(&q, -x).sub(&b.mul(&q)))
            }
            FamilyParams::LittleQLaguerre { q, a } => {
                S::from_f64(a).mul(&powi(&S::from_f64(q), -x))
            }
            FamilyParams::AlSalamCarlitzII { q, a } => {
                S::from_f64(a).mul(&powi(&S::from_f64(q), 2 * x + 1))
            }
        }
    }

    fn d_gen<S: Scalar>(&self, x: i64) -> S {
        let nn = self.nn();
        let one = S::one();
        if x == 0 {
            return S::from_i64(0);
        }
        match self.params {
            FamilyParams::Krawtchouk { p } => {
                one.sub(&S::from_f64(p)).mul(&S::from_i64(x))
            }
            FamilyParams::Hahn { a: _, b } => {
                S::from_i64(x).mul(&S::from_f64(b).add(&S::from_i64(nn - x)))
            }
            FamilyParams::DualHahn { a, b } => {
                let (a, b) = (S::from_f64(a), S::from_f64(b));
                let ab = a.add(&b);
                let xs = S::from_i64(x);
                xs.mul(&xs.add(&b).sub(&one))
                    .mul(&xs.add(&ab).add(&S::from_i64(nn - 1)))
                    .div(
                        &S::from_i64(2 * x - 2)
                            .add(&ab)
                            .mul(&S::from_i64(2 * x - 1).add(&ab)),
                    )
            }
            FamilyParams::Racah { d, a, b } => {
                let (a, b, d) = (S::from_f64(a), S::from_f64(b), S::from_f64(d));
                let xd = S::from_i64(x).add(&d);
                xd.sub(&a)
                    .mul(&xd.sub(&b))
                    .mul(&xd.add(&S::from_i64(nn)))
                    .mul(&S::from_i64(x))
                    .neg()
                    .div(
                        &S::from_i64(2 * x - 1)
                            .add(&d)
                            .mul(&S::from_i64(2 * x).add(&d)),
                    )
            }
            FamilyParams::Meixner { beta: _, c } => {
                S::from_i64(x).div(&one.sub(&S::from_f64(c)))
            }
            FamilyParams::Charlier { .. } => S::from_i64(x),
            FamilyParams::QuantumQKrawtchouk { q, p } => {
                let (q, p) = (S::from_f64(q), S::from_f64(p));
                one.sub(&powi(&q, x))
                    .mul(&one.sub(&powi(&q, x - nn - 1).div(&p)))
            }
            FamilyParams::QKrawtchouk { q, p } => {
                let (q, p) = (S::from_f64(q), S::from_f64(p));
                p.mul(&one.sub(&powi(&q, x)))
            }
            FamilyParams::AffineQKrawtchouk { q, p } => {
                let (q, p) = (S::from_f64(q), S::from_f64(p));
                p.mul(&powi(&q, x - nn)).mul(&one.sub(&powi(&q, x)))
            }
            FamilyParams::QHahn { q, a, b } => {
                let (q, a, b) = (S::from_f64(q), S::from_f64(a), S::from_f64(b));
                a.div(&q)
                    .mul(&one.sub(&powi(&q, x)))
                    .mul(&powi(&q, x - nn).sub(&b))
            }
            FamilyParams::DualQHahn { q, a, b } => {
                let (q, a, b) = (S::from_f64(q), S::from_f64(a), S::from_f64(b));
                let ab = a.mul(&b);
                a.mul(&powi(&q, x - nn - 1))
                    .mul(&one.sub(&powi(&q, x)))
                    .mul(&one.sub(&ab.mul(&powi(&q, x + nn - 1))))
                    .mul(&one.sub(&b.mul(&powi(&q, x - 1))))
                    .div(
                        &one.sub(&ab.mul(&powi(&q, 2 * x - 2)))
                            .mul(&one.sub(&ab.mul(&powi(&q, 2 * x - 1)))),
                    )
            }
            FamilyParams::QRacah { q, d, a, b } => {
                let (q, d, a, b) = (
                    S::from_f64(q),
                    S::from_f64(d),
                    S::from_f64(a),
                    S::from_f64(b),
                );
                // d̃ = a b d⁻¹ q^{-N-1}
                let dt = a.mul(&b).div(&d).mul(&powi(&q, -nn - 1));
                let qx = powi(&q, x);
                let dqx = d.mul(&qx);
                dt.mul(&one.sub(&dqx.div(&a)))
                    .mul(&one.sub(&dqx.div(&b)))
                    .mul(&one.sub(&d.mul(&powi(&q, nn + x))))
                    .mul(&one.sub(&qx))
                    .neg()
                    .div(
                        &one.sub(&d.mul(&powi(&q, 2 * x - 1)))
                            .mul(&one.sub(&d.mul(&powi(&q, 2 * x)))),
                    )
            }
            FamilyParams::LittleQJacobi { q, .. } | FamilyParams::LittleQLaguerre { q, .. } => {
                powi(&S::from_f64(q), -x).sub(&one)
            }
            FamilyParams::AlSalamCarlitzII { q, a } => {
                let (q, a) = (S::from_f64(q), S::from_f64(a));
                let qx = powi(&q, x);
                one.sub(&qx).mul(&one.sub(&a.mul(&qx)))
            }
        }
    }

    fn eta_gen<S: Scalar>(&self, x: i64) -> S {
        let one = S::one();
        match self.params {
            FamilyParams::Krawtchouk { .. }
            | FamilyParams::Hahn { .. }
            | FamilyParams::Meixner { .. }
            | FamilyParams::Charlier { .. } => S::from_i64(x),
            FamilyParams::DualHahn { a, b } => {
                let ab = S::from_f64(a).add(&S::from_f64(b));
                S::from_i64(x).mul(&S::from_i64(x - 1).add(&ab))
            }
            FamilyParams::Racah { d, .. } => {
                S::from_i64(x).mul(&S::from_i64(x).add(&S::from_f64(d)))
            }
            FamilyParams::QuantumQKrawtchouk { q, .. }
            | FamilyParams::QKrawtchouk { q, .. }
            | FamilyParams::AffineQKrawtchouk { q, .. }
            | FamilyParams::QHahn { q, .. }
            | FamilyParams::AlSalamCarlitzII { q, .. } => {
                powi(&S::from_f64(q), -x).sub(&one)
            }
            FamilyParams::DualQHahn { q, a, b } => {
                let q_ = S::from_f64(q);
                powi(&q_, -x)
                    .sub(&one)
                    .mul(&one.sub(&S::from_f64(a).mul(&S::from_f64(b)).mul(&powi(&q_, x - 1))))
            }
            FamilyParams::QRacah { q, d, .. } => {
                let q_ = S::from_f64(q);
                powi(&q_, -x)
                    .sub(&one)
                    .mul(&one.sub(&S::from_f64(d).mul(&powi(&q_, x))))
            }
            FamilyParams::LittleQJacobi { q, .. } | FamilyParams::LittleQLaguerre { q, .. } => {
                one.sub(&powi(&S::from_f64(q), x))
            }
        }
    }

    fn energy_gen<S: Scalar>(&self, n: i64) -> S {
        let nn = self.nn();
        let one = S::one();
        match self.params {
            FamilyParams::Krawtchouk { .. }
            | FamilyParams::DualHahn { .. }
            | FamilyParams::Meixner { .. }
            | FamilyParams::Charlier { .. } => S::from_i64(n),
            FamilyParams::Hahn { a, b } => {
                let ab = S::from_f64(a).add(&S::from_f64(b));
                S::from_i64(n).mul(&S::from_i64(n - 1).add(&ab))
            }
            FamilyParams::Racah { d, a, b } => {
                // d̃ = a+b-N-d-1
                let dt = S::from_f64(a)
                    .add(&S::from_f64(b))
                    .sub(&S::from_i64(nn + 1))
                    .sub(&S::from_f64(d));
                S::from_i64(n).mul(&S::from_i64(n).add(&dt))
            }
            FamilyParams::QuantumQKrawtchouk { q, .. }
            | FamilyParams::AlSalamCarlitzII { q, .. } => {
                one.sub(&powi(&S::from_f64(q), n))
            }
            FamilyParams::QKrawtchouk { q, p } => {
                let (q, p) = (S::from_f64(q), S::from_f64(p));
                powi(&q, -n)
                    .sub(&one)
                    .mul(&one.add(&p.mul(&powi(&q, n))))
            }
            FamilyParams::AffineQKrawtchouk { q, .. }
            | FamilyParams::DualQHahn { q, .. }
            | FamilyParams::LittleQLaguerre { q, .. } => {
                powi(&S::from_f64(q), -n).sub(&one)
            }
            FamilyParams::QHahn { q, a, b } => {
                let q_ = S::from_f64(q);
                powi(&q_, -n).sub(&one).mul(
                    &one.sub(&S::from_f64(a).mul(&S::from_f64(b)).mul(&powi(&q_, n - 1))),
                )
            }
            FamilyParams::QRacah { q, d, a, b } => {
                let q_ = S::from_f64(q);
                let dt = S::from_f64(a)
                    .mul(&S::from_f64(b))
                    .div(&S::from_f64(d))
                    .mul(&powi(&q_, -nn - 1));
                powi(&q_, -n)
                    .sub(&one)
                    .mul(&one.sub(&dt.mul(&powi(&q_, n))))
            }
            FamilyParams::LittleQJacobi { q, a, b } => {
                let q_ = S::from_f64(q);
                powi(&q_, -n).sub(&one).mul(
                    &one.sub(&S::from_f64(a).mul(&S::from_f64(b)).mul(&powi(&q_, n + 1))),
                )
            }
        }
    }

    /// Terminating hypergeometric sum for P̌_n(x), via the term-ratio
    /// recurrence. Returns (value, approximate max |term|) — the second
    /// component drives the exact-fallback decision in `poly`.
    fn poly_gen<S: Scalar>(&self, n: usize, x: usize) -> (S, f64) {
        let nn = self.nn();
        let one = S::one();
        let ni = n as i64;
        let xi = x as i64;
        match self.params {
            FamilyParams::Krawtchouk { p } => {
                let p = S::from_f64(p);
                run_series(one.clone(), n, |k| {
                    S::from_i64((k - ni) * (k - xi))
                        .div(&S::from_i64((k + 1) * (k - nn)))
                        .div(&p)
                })
            }
            FamilyParams::Hahn { a, b } => {
                let (a, b) = (S::from_f64(a), S::from_f64(b));
                let ab1 = a.add(&b).sub(&one);
                run_series(one.clone(), n, |k| {
                    S::from_i64(k - ni)
                        .mul(&S::from_i64(ni + k).add(&ab1))
                        .mul(&S::from_i64(k - xi))
                        .div(
                            &S::from_i64(k + 1)
                                .mul(&a.add(&S::from_i64(k)))
                                .mul(&S::from_i64(k - nn)),
                        )
                })
            }
            FamilyParams::DualHahn { a, b } => {
                let (a, b) = (S::from_f64(a), S::from_f64(b));
                let ab1 = a.add(&b).sub(&one);
                run_series(one.clone(), n, |k| {
                    S::from_i64(k - ni)
                        .mul(&S::from_i64(xi + k).add(&ab1))
                        .mul(&S::from_i64(k - xi))
                        .div(
                            &S::from_i64(k + 1)
                                .mul(&a.add(&S::from_i64(k)))
                                .mul(&S::from_i64(k - nn)),
                        )
                })
            }
            FamilyParams::Racah { d, a, b } => {
                let (a, b, d) = (S::from_f64(a), S::from_f64(b), S::from_f64(d));
                let dt = a.add(&b).sub(&S::from_i64(nn + 1)).sub(&d);
                run_series(one.clone(), n, |k| {
                    S::from_i64(k - ni)
                        .mul(&S::from_i64(ni + k).add(&dt))
                        .mul(&S::from_i64(k - xi))
                        .mul(&S::from_i64(xi + k).add(&d))
                        .div(
                            &S::from_i64(k + 1)
                                .mul(&a.add(&S::from_i64(k)))
                                .mul(&b.add(&S::from_i64(k)))
                                .mul(&S::from_i64(k - nn)),
                        )
                })
            }
            FamilyParams::Meixner { beta, c } => {
                let beta = S::from_f64(beta);
                let z = one.sub(&one.div(&S::from_f64(c)));
                run_series(one.clone(), n, |k| {
                    S::from_i64((k - ni) * (k - xi))
                        .div(&S::from_i64(k + 1).mul(&beta.add(&S::from_i64(k))))
                        .mul(&z)
                })
            }
            FamilyParams::Charlier { a } => {
                let minv = one.div(&S::from_f64(a)).neg();
                run_series(one.clone(), n, |k| {
                    S::from_i64((k - ni) * (k - xi))
                        .div(&S::from_i64(k + 1))
                        .mul(&minv)
                })
            }
            FamilyParams::QuantumQKrawtchouk { q, p } => {
                let q_ = S::from_f64(q);
                let z = S::from_f64(p).mul(&powi(&q_, ni + 1));
                let mut st = QPowers::new(&q_, &[-ni, -xi, 1, -nn]);
                run_series(one.clone(), n, |_| {
                    let [qkn, qkx, qk1, qkn2] = st.step();
                    one.sub(&qkn)
                        .mul(&one.sub(&qkx))
                        .mul(&z)
                        .div(&one.sub(&qk1).mul(&one.sub(&qkn2)))
                })
            }
            FamilyParams::QKrawtchouk { q, p } => {
                let (q_, p) = (S::from_f64(q), S::from_f64(p));
                let mut st = QPowers::new(&q_, &[-ni, -xi, ni, 1, -nn]);
                run_series(one.clone(), n, |_| {
                    let [qkn, qkx, qnk, qk1, qkn2] = st.step();
                    one.sub(&qkn)
                        .mul(&one.sub(&qkx))
                        .mul(&one.add(&p.mul(&qnk)))
                        .mul(&q_)
                        .div(&one.sub(&qk1).mul(&one.sub(&qkn2)))
                })
            }
            FamilyParams::AffineQKrawtchouk { q, p } => {
                let (q_, p) = (S::from_f64(q), S::from_f64(p));
                let mut st = QPowers::new(&q_, &[-ni, -xi, 1, -nn]);
                run_series(one.clone(), n, |_| {
                    let [qkn, qkx, qk1, qkn2] = st.step();
                    one.sub(&qkn).mul(&one.sub(&qkx)).mul(&q_).div(
                        &one.sub(&qk1)
                            .mul(&one.sub(&p.mul(&qk1)))
                            .mul(&one.sub(&qkn2)),
                    )
                })
            }
            FamilyParams::QHahn { q, a, b } => {
                let (q_, a, b) = (S::from_f64(q), S::from_f64(a), S::from_f64(b));
                let ab = a.mul(&b);
                let mut st = QPowers::new(&q_, &[-ni, ni - 1, -xi, 1, 0, -nn]);
                run_series(one.clone(), n, |_| {
                    let [qkn, qab, qkx, qk1, qk, qkn2] = st.step();
                    one.sub(&qkn)
                        .mul(&one.sub(&ab.mul(&qab)))
                        .mul(&one.sub(&qkx))
                        .mul(&q_)
                        .div(
                            &one.sub(&qk1)
                                .mul(&one.sub(&a.mul(&qk)))
                                .mul(&one.sub(&qkn2)),
                        )
                })
            }
            FamilyParams::DualQHahn { q, a, b } => {
                let (q_, a, b) = (S::from_f64(q), S::from_f64(a), S::from_f64(b));
                let ab = a.mul(&b);
                let mut st = QPowers::new(&q_, &[-ni, xi - 1, -xi, 1, 0, -nn]);
                run_series(one.clone(), n, |_| {
                    let [qkn, qab, qkx, qk1, qk, qkn2] = st.step();
                    one.sub(&qkn)
                        .mul(&one.sub(&ab.mul(&qab)))
                        .mul(&one.sub(&qkx))
                        .mul(&q_)
                        .div(
                            &one.sub(&qk1)
                                .mul(&one.sub(&a.mul(&qk)))
                                .mul(&one.sub(&qkn2)),
                        )
                })
            }
            FamilyParams::QRacah { q, d, a, b } => {
                let (q_, d, a, b) = (
                    S::from_f64(q),
                    S::from_f64(d),
                    S::from_f64(a),
                    S::from_f64(b),
                );
                let dt = a.mul(&b).div(&d).mul(&powi(&q_, -nn - 1));
                let mut st = QPowers::new(&q_, &[-ni, ni, -xi, xi, 1, 0, -nn]);
                run_series(one.clone(), n, |_| {
                    let [qkn, qnk, qkx, qxk, qk1, qk, qkn2] = st.step();
                    one.sub(&qkn)
                        .mul(&one.sub(&dt.mul(&qnk)))
                        .mul(&one.sub(&qkx))
                        .mul(&one.sub(&d.mul(&qxk)))
                        .mul(&q_)
                        .div(
                            &one.sub(&qk1)
                                .mul(&one.sub(&a.mul(&qk)))
                                .mul(&one.sub(&b.mul(&qk)))
                                .mul(&one.sub(&qkn2)),
                        )
                })
            }
            FamilyParams::LittleQJacobi { q, a, b } => {
                let (q_, a, b) = (S::from_f64(q), S::from_f64(a), S::from_f64(b));
                let ab = a.mul(&b);
                // prefactor (-a)^{-n} q^{-n(n+1)/2} (aq;q)_n / (bq;q)_n
                let aq = a.mul(&q_);
                let bq = b.mul(&q_);
                let pre = powi(&a.neg(), -ni)
                    .mul(&powi(&q_, -ni * (ni + 1) / 2))
                    .mul(&qpoch(&aq, &q_, n))
                    .div(&qpoch(&bq, &q_, n));
                let z = powi(&q_, xi + 1);
                let mut st = QPowers::new(&q_, &[-ni, ni + 1, 1, 1]);
                run_series(pre, n, |_| {
                    let [qkn, qab, qk1, qa1] = st.step();
                    one.sub(&qkn)
                        .mul(&one.sub(&ab.mul(&qab)))
                        .mul(&z)
                        .div(&one.sub(&qk1).mul(&one.sub(&a.mul(&qa1))))
                })
            }
            FamilyParams::LittleQLaguerre { q, a } => {
                let (q_, a) = (S::from_f64(q), S::from_f64(a));
                let z = powi(&q_, xi).div(&a).neg();
                let mut st = QPowers::new(&q_, &[-ni, -xi, 1, 0]);
                run_series(one.clone(), n, |_| {
                    let [qkn, qkx, qk1, qk] = st.step();
                    one.sub(&qkn)
                        .mul(&one.sub(&qkx))
                        .mul(&z)
                        .div(&one.sub(&qk1).mul(&qk))
                })
            }
            FamilyParams::AlSalamCarlitzII { q, a } => {
                let (q_, a) = (S::from_f64(q), S::from_f64(a));
                let z = powi(&q_, ni).div(&a).neg();
                let mut st = QPowers::new(&q_, &[-ni, -xi, 1, 0]);
                run_series(one.clone(), n, |_| {
                    let [qkn, qkx, qk1, qk] = st.step();
                    one.sub(&qkn)
                        .mul(&one.sub(&qkx))
                        .mul(&z)
                        .div(&one.sub(&qk1).mul(&qk))
                })
            }
        }
    }

    /// φ₀²(x), rational for every family.
    fn phi0sq_gen<S: Scalar>(&self, x: usize) -> S {
        let nn = self.nn();
        let nnu = nn.max(0) as usize;
        let one = S::one();
        let xi = x as i64;
        match self.params {
            FamilyParams::Krawtchouk { p } => {
                let p = S::from_f64(p);
                binomial::<S>(nnu, x).mul(&powi(&p.div(&one.sub(&p)), xi))
            }
            FamilyParams::Hahn { a, b } => {
                let (a, b) = (S::from_f64(a), S::from_f64(b));
                binomial::<S>(nnu, x)
                    .mul(&poch(&a, x))
                    .mul(&poch(&b, nnu - x))
                    .div(&poch(&b, nnu))
            }
            FamilyParams::DualHahn { a, b } => {
                let (a, b) = (S::from_f64(a), S::from_f64(b));
                let ab = a.add(&b);
                binomial::<S>(nnu, x)
                    .mul(&poch(&a, x))
                    .mul(&S::from_i64(2 * xi - 1).add(&ab))
                    .mul(&poch(&ab, nnu))
                    .div(&poch(&b, x).mul(&poch(&S::from_i64(xi - 1).add(&ab), nnu + 1)))
            }
            FamilyParams::Racah { d, a, b } => {
                let (a, b, d) = (S::from_f64(a), S::from_f64(b), S::from_f64(d));
                poch(&a, x)
                    .mul(&poch(&b, x))
                    .mul(&poch(&S::from_i64(-nn), x))
                    .mul(&poch(&d, x))
                    .div(
                        &poch(&one.add(&d).sub(&a), x)
                            .mul(&poch(&one.add(&d).sub(&b), x))
                            .mul(&poch(&one.add(&d).add(&S::from_i64(nn)), x))
                            .mul(&factorial::<S>(x)),
                    )
                    .mul(&S::from_i64(2 * xi).add(&d))
                    .div(&d)
            }
            FamilyParams::Meixner { beta, c } => {
                let (beta, c) = (S::from_f64(beta), S::from_f64(c));
                poch(&beta, x).mul(&powi(&c, xi)).div(&factorial::<S>(x))
            }
            FamilyParams::Charlier { a } => {
                powi(&S::from_f64(a), xi).div(&factorial::<S>(x))
            }
            FamilyParams::QuantumQKrawtchouk { q, p } => {
                let (q_, p) = (S::from_f64(q), S::from_f64(p));
                qbinom::<S>(&q_, nnu, x)
                    .mul(&powi(&p, -xi))
                    .mul(&powi(&q_, xi * (xi - 1 - nn)))
                    .div(&qpoch(&powi(&q_, -nn).div(&p), &q_, x))
            }
            FamilyParams::QKrawtchouk { q, p } => {
                let (q_, p) = (S::from_f64(q), S::from_f64(p));
                qbinom::<S>(&q_, nnu, x)
                    .mul(&powi(&p, -xi))
                    .mul(&powi(&q_, xi * (xi - 1) / 2 - xi * nn))
            }
            FamilyParams::AffineQKrawtchouk { q, p } => {
                let (q_, p) = (S::from_f64(q), S::from_f64(p));
                let pq = p.mul(&q_);
                qbinom::<S>(&q_, nnu, x)
                    .mul(&qpoch(&pq, &q_, x))
                    .div(&powi(&pq, xi))
            }
            FamilyParams::QHahn { q, a, b } => {
                let (q_, a, b) = (S::from_f64(q), S::from_f64(a), S::from_f64(b));
                qbinom::<S>(&q_, nnu, x)
                    .mul(&qpoch(&a, &q_, x))
                    .mul(&qpoch(&b, &q_, nnu - x))
                    .div(&qpoch(&b, &q_, nnu).mul(&powi(&a, xi)))
            }
            FamilyParams::DualQHahn { q, a, b } => {
                let (q_, a, b) = (S::from_f64(q), S::from_f64(a), S::from_f64(b));
                let ab = a.mul(&b);
                let abq = ab.div(&q_);
                qbinom::<S>(&q_, nnu, x)
                    .mul(&qpoch(&a, &q_, x))
                    .mul(&qpoch(&abq, &q_, x))
                    .div(
                        &qpoch(&ab.mul(&powi(&q_, nn)), &q_, x)
                            .mul(&qpoch(&b, &q_, x))
                            .mul(&powi(&a, xi)),
                    )
                    .mul(&one.sub(&ab.mul(&powi(&q_, 2 * xi - 1))))
                    .div(&one.sub(&abq))
            }
            FamilyParams::QRacah { q, d, a, b } => {
                let (q_, d, a, b) = (
                    S::from_f64(q),
                    S::from_f64(d),
                    S::from_f64(a),
                    S::from_f64(b),
                );
                let dt = a.mul(&b).div(&d).mul(&powi(&q_, -nn - 1));
                qpoch(&a, &q_, x)
                    .mul(&qpoch(&b, &q_, x))
                    .mul(&qpoch(&powi(&q_, -nn), &q_, x))
                    .mul(&qpoch(&d, &q_, x))
                    .div(
                        &qpoch(&d.mul(&q_).div(&a), &q_, x)
                            .mul(&qpoch(&d.mul(&q_).div(&b), &q_, x))
                            .mul(&qpoch(&d.mul(&powi(&q_, nn + 1)), &q_, x))
                            .mul(&qpoch(&q_, &q_, x))
                            .mul(&powi(&dt, xi)),
                    )
                    .mul(&one.sub(&d.mul(&powi(&q_, 2 * xi))))
                    .div(&one.sub(&d))
            }
            FamilyParams::LittleQJacobi { q, a, b } => {
                let (q_, a, b) = (S::from_f64(q), S::from_f64(a), S::from_f64(b));
                qpoch(&b.mul(&q_), &q_, x)
                    .div(&qpoch(&q_, &q_, x))
                    .mul(&powi(&a.mul(&q_), xi))
            }
            FamilyParams::LittleQLaguerre { q, a } => {
                let (q_, a) = (S::from_f64(q), S::from_f64(a));
                powi(&a.mul(&q_), xi).div(&qpoch(&q_, &q_, x))
            }
            FamilyParams::AlSalamCarlitzII { q, a } => {
                let (q_, a) = (S::from_f64(q), S::from_f64(a));
                powi(&a, xi)
                    .mul(&powi(&q_, xi * xi))
                    .div(&qpoch(&q_, &q_, x).mul(&qpoch(&a.mul(&q_), &q_, x)))
            }
        }
    }

    /// Rational core of d_n² (full value for the ten finite families).
    fn dn2_core_gen<S: Scalar>(&self, n: usize) -> S {
        let nn = self.nn();
        let nnu = nn.max(0) as usize;
        let one = S::one();
        let ni = n as i64;
        match self.params {
            FamilyParams::Krawtchouk { p } => {
                let p = S::from_f64(p);
                let r = p.div(&one.sub(&p));
                binomial::<S>(nnu, n)
                    .mul(&powi(&r, ni))
                    .mul(&powi(&one.sub(&p), nn))
            }
            FamilyParams::Hahn { a, b } => {
                let (a, b) = (S::from_f64(a), S::from_f64(b));
                let ab = a.add(&b);
                binomial::<S>(nnu, n)
                    .mul(&poch(&a, n))
                    .mul(&S::from_i64(2 * ni - 1).add(&ab))
                    .mul(&poch(&ab, nnu))
                    .div(&poch(&b, n).mul(&poch(&S::from_i64(ni - 1).add(&ab), nnu + 1)))
                    .mul(&poch(&b, nnu))
                    .div(&poch(&ab, nnu))
            }
            FamilyParams::DualHahn { a, b } => {
                let (a, b) = (S::from_f64(a), S::from_f64(b));
                let ab = a.add(&b);
                binomial::<S>(nnu, n)
                    .mul(&poch(&a, n))
                    .mul(&poch(&b, nnu - n))
                    .div(&poch(&ab, nnu))
            }
            FamilyParams::Racah { d, a, b } => {
                let (a, b, d) = (S::from_f64(a), S::from_f64(b), S::from_f64(d));
                let dt = a.add(&b).sub(&S::from_i64(nn + 1)).sub(&d);
                let sign = if nn % 2 == 0 { one.clone() } else { one.neg() };
                poch(&a, n)
                    .mul(&poch(&b, n))
                    .mul(&poch(&S::from_i64(-nn), n))
                    .mul(&poch(&dt, n))
                    .div(
                        &poch(&one.add(&dt).sub(&a), n)
                            .mul(&poch(&one.add(&dt).sub(&b), n))
                            .mul(&poch(&one.add(&dt).add(&S::from_i64(nn)), n))
                            .mul(&factorial::<S>(n)),
                    )
                    .mul(&S::from_i64(2 * ni).add(&dt))
                    .div(&dt)
                    .mul(&sign)
                    .mul(&poch(&one.add(&d).sub(&a), nnu))
                    .mul(&poch(&one.add(&d).sub(&b), nnu))
                    .mul(&poch(&one.add(&d).add(&S::from_i64(nn)), nnu))
                    .div(&poch(&dt.add(&one), nnu).mul(&poch(&d.add(&one), 2 * nnu)))
            }
            FamilyParams::Meixner { beta, c } => {
                let (beta, c) = (S::from_f64(beta), S::from_f64(c));
                poch(&beta, n).mul(&powi(&c, ni)).div(&factorial::<S>(n))
            }
            FamilyParams::Charlier { a } => {
                powi(&S::from_f64(a), ni).div(&factorial::<S>(n))
            }
            FamilyParams::QuantumQKrawtchouk { q, p } => {
                let (q_, p) = (S::from_f64(q), S::from_f64(p));
                qbinom::<S>(&q_, nnu, n)
                    .mul(&powi(&p, -ni))
                    .mul(&powi(&q_, -nn * ni))
                    .div(&qpoch(&powi(&q_, -ni).div(&p), &q_, n))
                    .mul(&qpoch(&powi(&q_, -nn).div(&p), &q_, nnu))
            }
            FamilyParams::QKrawtchouk { q, p } => {
                let (q_, p) = (S::from_f64(q), S::from_f64(p));
                let mp = p.neg();
                qbinom::<S>(&q_, nnu, n)
                    .mul(&qpoch(&mp, &q_, n))
                    .div(
                        &qpoch(&mp.mul(&powi(&q_, nn + 1)), &q_, n)
                            .mul(&powi(&p, ni))
                            .mul(&powi(&q_, ni * (ni + 1) / 2)),
                    )
                    .mul(&one.add(&p.mul(&powi(&q_, 2 * ni))))
                    .div(&one.add(&p))
                    .mul(&powi(&p, nn))
                    .mul(&powi(&q_, nn * (nn + 1) / 2))
                    .div(&qpoch(&mp.mul(&q_), &q_, nnu))
            }
            FamilyParams::AffineQKrawtchouk { q, p } => {
                let (q_, p) = (S::from_f64(q), S::from_f64(p));
                let pq = p.mul(&q_);
                qbinom::<S>(&q_, nnu, n)
                    .mul(&qpoch(&pq, &q_, n))
                    .div(&powi(&pq, ni))
                    .mul(&powi(&pq, nn))
            }
            FamilyParams::QHahn { q, a, b } => {
                let (q_, a, b) = (S::from_f64(q), S::from_f64(a), S::from_f64(b));
                let ab = a.mul(&b);
                let abq = ab.div(&q_);
                qbinom::<S>(&q_, nnu, n)
                    .mul(&qpoch(&a, &q_, n))
                    .mul(&qpoch(&abq, &q_, n))
                    .div(
                        &qpoch(&ab.mul(&powi(&q_, nn)), &q_, n)
                            .mul(&qpoch(&b, &q_, n))
                            .mul(&powi(&a, ni)),
                    )
                    .mul(&one.sub(&ab.mul(&powi(&q_, 2 * ni - 1))))
                    .div(&one.sub(&abq))
                    .mul(&qpoch(&b, &q_, nnu))
                    .mul(&powi(&a, nn))
                    .div(&qpoch(&ab, &q_, nnu))
            }
            FamilyParams::DualQHahn { q, a, b } => {
                let (q_, a, b) = (S::from_f64(q), S::from_f64(a), S::from_f64(b));
                let ab = a.mul(&b);
                qbinom::<S>(&q_, nnu, n)
                    .mul(&qpoch(&a, &q_, n))
                    .mul(&qpoch(&b, &q_, nnu - n))
                    .div(&qpoch(&b, &q_, nnu).mul(&powi(&a, ni)))
                    .mul(&qpoch(&b, &q_, nnu))
                    .mul(&powi(&a, nn))
                    .div(&qpoch(&ab, &q_, nnu))
            }
            FamilyParams::QRacah { q, d, a, b } => {
                let (q_, d, a, b) = (
                    S::from_f64(q),
                    S::from_f64(d),
                    S::from_f64(a),
                    S::from_f64(b),
                );
                let dt = a.mul(&b).div(&d).mul(&powi(&q_, -nn - 1));
                let sign = if nn % 2 == 0 { one.clone() } else { one.neg() };
                qpoch(&a, &q_, n)
                    .mul(&qpoch(&b, &q_, n))
                    .mul(&qpoch(&powi(&q_, -nn), &q_, n))
                    .mul(&qpoch(&dt, &q_, n))
                    .div(
                        &qpoch(&dt.mul(&q_).div(&a), &q_, n)
                            .mul(&qpoch(&dt.mul(&q_).div(&b), &q_, n))
                            .mul(&qpoch(&dt.mul(&powi(&q_, nn + 1)), &q_, n))
                            .mul(&qpoch(&q_, &q_, n))
                            .mul(&powi(&d, ni)),
                    )
                    .mul(&one.sub(&dt.mul(&powi(&q_, 2 * ni))))
                    .div(&one.sub(&dt))
                    .mul(&sign)
                    .mul(&qpoch(&d.mul(&q_).div(&a), &q_, nnu))
                    .mul(&qpoch(&d.mul(&q_).div(&b), &q_, nnu))
                    .mul(&qpoch(&d.mul(&powi(&q_, nn + 1)), &q_, nnu))
                    .mul(&powi(&dt, nn))
                    .mul(&powi(&q_, nn * (nn + 1) / 2))
                    .div(&qpoch(&dt.mul(&q_), &q_, nnu).mul(&qpoch(&d.mul(&q_), &q_, 2 * nnu)))
            }
            FamilyParams::LittleQJacobi { q, a, b } => {
                let (q_, a, b) = (S::from_f64(q), S::from_f64(a), S::from_f64(b));
                let abq = a.mul(&b).mul(&q_);
                qpoch(&b.mul(&q_), &q_, n)
                    .mul(&qpoch(&abq, &q_, n))
                    .mul(&powi(&a, ni))
                    .mul(&powi(&q_, ni * ni))
                    .div(&qpoch(&q_, &q_, n).mul(&qpoch(&a.mul(&q_), &q_, n)))
                    .mul(&one.sub(&abq.mul(&powi(&q_, 2 * ni))))
                    .div(&one.sub(&abq))
            }
            FamilyParams::LittleQLaguerre { q, a } => {
                let (q_, a) = (S::from_f64(q), S::from_f64(a));
                powi(&a, ni)
                    .mul(&powi(&q_, ni * ni))
                    .div(&qpoch(&q_, &q_, n).mul(&qpoch(&a.mul(&q_), &q_, n)))
            }
            FamilyParams::AlSalamCarlitzII { q, a } => {
                let (q_, a) = (S::from_f64(q), S::from_f64(a));
                powi(&a.mul(&q_), ni).div(&qpoch(&q_, &q_, n))
            }
        }
    }

    /// α_n, the leading coefficient of P_n as a polynomial in η.
    fn alpha_gen<S: Scalar>(&self, n: usize) -> S {
        let nn = self.nn();
        let nnu = nn.max(0) as usize;
        let one = S::one();
        let ni = n as i64;
        let sign = if n % 2 == 0 { one.clone() } else { one.neg() };
        // The q-linear/q-quadratic coordinates carry an extra q^{n(n-1)/2}
        // relative to the x-linear normalization of the series.
        let qfix = |q: f64| powi(&S::from_f64(q), ni * (ni - 1) / 2);
        match self.params {
            FamilyParams::Krawtchouk { p } => sign
                .mul(&powi(&S::from_f64(p), -ni))
                .mul(&factorial::<S>(nnu - n))
                .div(&factorial::<S>(nnu)),
            FamilyParams::Hahn { a, b } => {
                let (a, b) = (S::from_f64(a), S::from_f64(b));
                let ab1 = a.add(&b).sub(&one);
                sign.mul(&poch(&S::from_i64(ni).add(&ab1), n))
                    .mul(&factorial::<S>(nnu - n))
                    .div(&poch(&a, n).mul(&factorial::<S>(nnu)))
            }
            FamilyParams::DualHahn { a, b: _ } => sign
                .mul(&factorial::<S>(nnu - n))
                .div(&poch(&S::from_f64(a), n).mul(&factorial::<S>(nnu))),
            FamilyParams::Racah { d, a, b } => {
                let (a, b, d) = (S::from_f64(a), S::from_f64(b), S::from_f64(d));
                let dt = a.add(&b).sub(&S::from_i64(nn + 1)).sub(&d);
                sign.mul(&poch(&S::from_i64(ni).add(&dt), n))
                    .mul(&factorial::<S>(nnu - n))
                    .div(&poch(&a, n).mul(&poch(&b, n)).mul(&factorial::<S>(nnu)))
            }
            FamilyParams::Meixner { beta, c } => {
                let z = one.sub(&one.div(&S::from_f64(c)));
                powi(&z, ni).div(&poch(&S::from_f64(beta), n))
            }
            FamilyParams::Charlier { a } => powi(&S::from_f64(a).neg(), -ni),
            FamilyParams::QuantumQKrawtchouk { q, p } => {
                let (q_, p) = (S::from_f64(q), S::from_f64(p));
                sign.mul(&powi(&p, ni))
                    .mul(&powi(&q_, ni * (nn + 1)))
                    .mul(&qpoch(&q_, &q_, nnu - n))
                    .div(&qpoch(&q_, &q_, nnu))
                    .mul(&qfix(q))
            }
            FamilyParams::QKrawtchouk { q, p } => {
                let (q_, p) = (S::from_f64(q), S::from_f64(p));
                sign.mul(&powi(&q_, ni * (nn - ni + 1)))
                    .mul(&qpoch(&p.neg().mul(&powi(&q_, ni)), &q_, n))
                    .mul(&qpoch(&q_, &q_, nnu - n))
                    .div(&qpoch(&q_, &q_, nnu))
                    .mul(&qfix(q))
            }
            FamilyParams::AffineQKrawtchouk { q, p } => {
                let (q_, p) = (S::from_f64(q), S::from_f64(p));
                sign.mul(&powi(&q_, ni * (nn - ni + 1)))
                    .mul(&qpoch(&q_, &q_, nnu - n))
                    .div(&qpoch(&p.mul(&q_), &q_, n).mul(&qpoch(&q_, &q_, nnu)))
                    .mul(&qfix(q))
            }
            FamilyParams::QHahn { q, a, b } => {
                let (q_, a, b) = (S::from_f64(q), S::from_f64(a), S::from_f64(b));
                sign.mul(&powi(&q_, ni * (nn - ni + 1)))
                    .mul(&qpoch(&a.mul(&b).mul(&powi(&q_, ni - 1)), &q_, n))
                    .mul(&qpoch(&q_, &q_, nnu - n))
                    .div(&qpoch(&a, &q_, n).mul(&qpoch(&q_, &q_, nnu)))
                    .mul(&qfix(q))
            }
            FamilyParams::DualQHahn { q, a, b: _ } => {
                let (q_, a) = (S::from_f64(q), S::from_f64(a));
                sign.mul(&powi(&q_, ni * (nn - ni + 1)))
                    .mul(&qpoch(&q_, &q_, nnu - n))
                    .div(&qpoch(&a, &q_, n).mul(&qpoch(&q_, &q_, nnu)))
                    .mul(&qfix(q))
            }
            FamilyParams::QRacah { q, d, a, b } => {
                let (q_, d, a, b) = (
                    S::from_f64(q),
                    S::from_f64(d),
                    S::from_f64(a),
                    S::from_f64(b),
                );
                let dt = a.mul(&b).div(&d).mul(&powi(&q_, -nn - 1));
                sign.mul(&powi(&q_, ni * (nn - ni + 1)))
                    .mul(&qpoch(&dt.mul(&powi(&q_, ni)), &q_, n))
                    .mul(&qpoch(&q_, &q_, nnu - n))
                    .div(
                        &qpoch(&a, &q_, n)
                            .mul(&qpoch(&b, &q_, n))
                            .mul(&qpoch(&q_, &q_, nnu)),
                    )
                    .mul(&qfix(q))
            }
            FamilyParams::LittleQJacobi { q, a, b } => {
                let (q_, a, b) = (S::from_f64(q), S::from_f64(a), S::from_f64(b));
                powi(&a.neg(), -ni)
                    .mul(&powi(&q_, -ni * ni))
                    .mul(&qpoch(&a.mul(&b).mul(&powi(&q_, ni + 1)), &q_, n))
                    .div(&qpoch(&b.mul(&q_), &q_, n))
            }
            FamilyParams::LittleQLaguerre { q, a } => {
                powi(&S::from_f64(a).neg(), -ni).mul(&powi(&S::from_f64(q), -ni * ni))
            }
            FamilyParams::AlSalamCarlitzII { q, a } => {
                powi(&S::from_f64(a).neg(), -ni).mul(&qfix(q))
            }
        }
    }
}

/// q-binomial (q;q)_N / ((q;q)_k (q;q)_{N-k}).
fn qbinom<S: Scalar>(q: &S, n: usize, k: usize) -> S {
    qpoch(q, q, n).div(&qpoch(q, q, k).mul(&qpoch(q, q, n - k)))
}

/// Running powers q^{e_i+k}, advanced together once per term.
struct QPowers<S: Scalar, const W: usize> {
    q: S,
    cur: [S; W],
}

impl<S: Scalar, const W: usize> QPowers<S, W> {
    fn new(q: &S, exps: &[i64; W]) -> Self {
        let cur = exps.clone().map(|e| powi(q, e));
        QPowers { q: q.clone(), cur }
    }

    /// Returns q^{e_i+k} for the current k, then advances k.
    fn step(&mut self) -> [S; W] {
        let out = self.cur.clone();
        for c in self.cur.iter_mut() {
            *c = c.mul(&self.q);
        }
        out
    }
}

/// Sum of the terminating series with term-magnitude tracking.
fn run_series<S: Scalar>(
    pre: S,
    nterms: usize,
    mut ratio: impl FnMut(i64) -> S,
) -> (S, f64) {
    let mut term = pre.clone();
    let mut sum = pre;
    let mut maxabs = sum.abs_f64();
    for k in 0..nterms as i64 {
        term = term.mul(&ratio(k));
        if term.is_zero() {
            break;
        }
        sum = sum.add(&term);
        let a = term.abs_f64();
        if a > maxabs {
            maxabs = a;
        }
    }
    (sum, maxabs)
}

/// Validate parameters against the family constraints and certify the lattice.
pub fn validate(
    id: FamilyId,
    params: FamilyParams,
    lattice_request: LatticeRequest,
) -> Result<FamilyInstance> {
    if params.id() != id {
        return Err(Error::ParameterOutOfRange(format!(
            "parameter record is for {}, not {}",
            params.id().tag(),
            id.tag()
        )));
    }
    let bad = |msg: String| Err(Error::ParameterOutOfRange(msg));
    // q-range first, shared by all q-families
    if let Some(&("q", q)) = params.entries().first().filter(|e| e.0 == "q") {
        if !(q > 0.0 && q < 1.0) {
            return bad(format!("{}: requires 0<q<1, got q={}", id.tag(), q));
        }
    }
    let nn = match (id.is_finite(), lattice_request) {
        (true, LatticeRequest::Finite { n }) => {
            if n < 1 {
                return bad(format!("{}: finite lattice needs N>=1", id.tag()));
            }
            n as i64
        }
        (false, LatticeRequest::SemiInfinite { eps_tail }) => {
            if !(eps_tail > 0.0) {
                return bad(format!("{}: eps_tail must be positive", id.tag()));
            }
            -1
        }
        (true, _) => {
            return bad(format!("{}: finite family needs a finite lattice", id.tag()));
        }
        (false, _) => {
            return bad(format!(
                "{}: semi-infinite family cannot take a finite lattice",
                id.tag()
            ));
        }
    };
    let nf = nn as f64;
    match params {
        FamilyParams::Krawtchouk { p } => {
            if !(p > 0.0 && p < 1.0) {
                return bad(format!("krawtchouk: requires 0<p<1, got p={p}"));
            }
        }
        FamilyParams::Hahn { a, b } | FamilyParams::DualHahn { a, b } => {
            if !(a > 0.0 && b > 0.0) {
                return bad(format!("{}: requires a>0 and b>0, got a={a} b={b}", id.tag()));
            }
        }
        FamilyParams::Racah { d, a, b } => {
            if !(d > 0.0) {
                return bad(format!("racah: requires d>0, got d={d}"));
            }
            if !(a > nf + d) {
                return bad(format!("racah: requires a>N+d={}, got a={a}", nf + d));
            }
            if !(b > 0.0 && b < 1.0 + d) {
                return bad(format!("racah: requires 0<b<1+d={}, got b={b}", 1.0 + d));
            }
        }
        FamilyParams::Meixner { beta, c } => {
            if !(beta > 0.0) {
                return bad(format!("meixner: requires beta>0, got beta={beta}"));
            }
            if !(c > 0.0 && c < 1.0) {
                return bad(format!("meixner: requires 0<c<1, got c={c}"));
            }
        }
        FamilyParams::Charlier { a } => {
            if !(a > 0.0) {
                return bad(format!("charlier: requires a>0, got a={a}"));
            }
        }
        FamilyParams::QuantumQKrawtchouk { q, p } => {
            let lim = q.powi(-(nn as i32));
            if !(p > lim) {
                return bad(format!(
                    "quantum-q-krawtchouk: requires p>q^-N={lim}, got p={p}"
                ));
            }
        }
        FamilyParams::QKrawtchouk { q: _, p } => {
            if !(p > 0.0) {
                return bad(format!("q-krawtchouk: requires p>0, got p={p}"));
            }
        }
        FamilyParams::AffineQKrawtchouk { q, p } => {
            if !(p > 0.0 && p < 1.0 / q) {
                return bad(format!(
                    "affine-q-krawtchouk: requires 0<p<q^-1={}, got p={p}",
                    1.0 / q
                ));
            }
        }
        FamilyParams::QHahn { q: _, a, b } | FamilyParams::DualQHahn { q: _, a, b } => {
            if !(a > 0.0 && a < 1.0 && b > 0.0 && b < 1.0) {
                return bad(format!(
                    "{}: requires 0<a<1 and 0<b<1, got a={a} b={b}",
                    id.tag()
                ));
            }
        }
        FamilyParams::QRacah { q, d, a, b } => {
            if !(d > 0.0 && d < 1.0) {
                return bad(format!("q-racah: requires 0<d<1, got d={d}"));
            }
            let lim = q.powi(nn as i32) * d;
            if !(a > 0.0 && a < lim) {
                return bad(format!("q-racah: requires 0<a<q^N*d={lim}, got a={a}"));
            }
            if !(b > q * d && b < 1.0) {
                return bad(format!("q-racah: requires q*d<b<1 ({} .. 1), got b={b}", q * d));
            }
        }
        FamilyParams::LittleQJacobi { q, a, b } => {
            if !(a > 0.0 && a < 1.0 / q) {
                return bad(format!(
                    "little-q-jacobi: requires 0<a<q^-1={}, got a={a}",
                    1.0 / q
                ));
            }
            if !(b < 1.0 / q) {
                return bad(format!(
                    "little-q-jacobi: requires b<q^-1={}, got b={b}",
                    1.0 / q
                ));
            }
        }
        FamilyParams::LittleQLaguerre { q, a } | FamilyParams::AlSalamCarlitzII { q, a } => {
            if !(a > 0.0 && a < 1.0 / q) {
                return bad(format!(
                    "{}: requires 0<a<q^-1={}, got a={a}",
                    id.tag(),
                    1.0 / q
                ));
            }
        }
    }
    let mut inst = FamilyInstance {
        id,
        params,
        lattice: LatticeSpec::Finite { n: nn.max(1) as usize },
        n_points: 0,
        n_max: 0,
    };
    if id.is_finite() {
        let n = nn as usize;
        inst.lattice = LatticeSpec::Finite { n };
        inst.n_points = n + 1;
        inst.n_max = n;
        // numeric admissibility sweep: the constraint table is necessary but
        // not obviously sufficient for every corner, and negative rates would
        // silently produce a complex Hamiltonian
        for x in 0..n {
            let b: f64 = inst.b_gen(x as i64);
            if !(b > 0.0) {
                return bad(format!("{}: B({x})={b} not positive", id.tag()));
            }
        }
        for x in 1..=n {
            let d: f64 = inst.d_gen(x as i64);
            if !(d > 0.0) {
                return bad(format!("{}: D({x})={d} not positive", id.tag()));
            }
        }
    } else {
        let eps_tail = match lattice_request {
            LatticeRequest::SemiInfinite { eps_tail } => eps_tail,
            _ => unreachable!(),
        };
        let m = truncate(&inst, eps_tail)?;
        inst.lattice = LatticeSpec::SemiInfinite { m, eps_tail };
        inst.n_points = m + 1;
        inst.n_max = 0;
        inst.n_max = mode_cap(&inst, m);
    }
    Ok(inst)
}

/// Smallest M whose certified geometric tail bound beats eps_tail.
///
/// The weight ratio r(x) = w(x+1)/w(x) = B(x)/D(x+1) is monotone in x for all
/// five semi-infinite families, so sup_{y>=x} r(y) = max(r(x), r_inf) with
/// r_inf the analytic limit; the tail is then a geometric series.
fn truncate(inst: &FamilyInstance, eps_tail: f64) -> Result<usize> {
    let r_inf = match inst.params {
        FamilyParams::Meixner { c, .. } => c,
        FamilyParams::Charlier { .. } => 0.0,
        FamilyParams::LittleQJacobi { q, a, .. } => a * q,
        FamilyParams::LittleQLaguerre { q, a } => a * q,
        FamilyParams::AlSalamCarlitzII { .. } => 0.0,
        _ => unreachable!("finite family in truncate"),
    };
    let mut w = 1.0f64;
    let mut cum = 1.0f64;
    for x in 0..M_MAX {
        let b: f64 = inst.b_gen(x as i64);
        let d_next: f64 = inst.d_gen(x as i64 + 1);
        if !(b > 0.0 && d_next > 0.0) {
            return Err(Error::ParameterOutOfRange(format!(
                "{}: nonpositive rate at x={x}",
                inst.id.tag()
            )));
        }
        let r = b / d_next;
        let rb = r.max(r_inf);
        if x >= 2 && rb < 1.0 && w * rb / (1.0 - rb) < eps_tail * cum {
            return Ok(x);
        }
        w *= r;
        cum += w;
    }
    Err(Error::TruncationFailure(format!(
        "{}: tail mass did not reach {eps_tail} within M_max={M_MAX}",
        inst.id.tag()
    )))
}

/// Largest n (scanned consecutively from 0) whose mode keeps essentially all
/// of its norm on the truncated lattice; truncation breaks orthonormality for
/// modes beyond this.
fn mode_cap(inst: &FamilyInstance, m: usize) -> usize {
    let weights: Vec<f64> = (0..=m).map(|x| inst.weight(x).expect("x on lattice")).collect();
    let mut n_max = 0;
    for n in 0..=m {
        let mut s = 0.0f64;
        for (x, w) in weights.iter().enumerate() {
            let p = inst.poly_unchecked(n, x);
            s += w * p * p;
        }
        let defect = 1.0 - s * rat_to_f64(&inst.dn2_core_gen::<BigRational>(n)) * inst.dn2_common();
        if defect > MODE_CAP_DEFECT {
            break;
        }
        n_max = n;
    }
    n_max
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kraw(p: f64, n: usize) -> FamilyInstance {
        validate(
            FamilyId::Krawtchouk,
            FamilyParams::Krawtchouk { p },
            LatticeRequest::Finite { n },
        )
        .unwrap()
    }

    #[test]
    fn krawtchouk_basics() {
        let inst = kraw(0.5, 4);
        assert_eq!(inst.coeff_b(1).unwrap(), 1.5);
        assert_eq!(inst.coeff_b(4).unwrap(), 0.0);
        assert_eq!(inst.coeff_d(0).unwrap(), 0.0);
        assert_eq!(inst.coeff_d(2).unwrap(), 1.0);
        assert_eq!(inst.energy(3).unwrap(), 3.0);
        assert_eq!(inst.eta(2).unwrap(), 2.0);
    }

    #[test]
    fn krawtchouk_n1_hand_values() {
        let inst = kraw(0.5, 1);
        assert_eq!(inst.poly(1, 1).unwrap(), -1.0);
        assert_eq!(inst.poly(0, 1).unwrap(), 1.0);
        assert_eq!(inst.weight(1).unwrap(), 1.0);
        assert_eq!(inst.norm_sq(0).unwrap(), 0.5);
        assert_eq!(inst.norm_sq(1).unwrap(), 0.5);
        assert_eq!(inst.leading_coeff(1).unwrap(), -2.0);
    }

    #[test]
    fn charlier_values() {
        let inst = validate(
            FamilyId::Charlier,
            FamilyParams::Charlier { a: 1.0 },
            LatticeRequest::semi_infinite_default(),
        )
        .unwrap();
        assert_eq!(inst.coeff_b(7).unwrap(), 1.0);
        assert_eq!(inst.coeff_d(3).unwrap(), 3.0);
        assert!((inst.weight(3).unwrap() - 1.0 / 6.0).abs() < 1e-16);
        assert!((inst.norm_sq(0).unwrap() - (-1.0f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn charlier_alpha() {
        let inst = validate(
            FamilyId::Charlier,
            FamilyParams::Charlier { a: 2.0 },
            LatticeRequest::semi_infinite_default(),
        )
        .unwrap();
        assert_eq!(inst.leading_coeff(3).unwrap(), -0.125);
    }

    #[test]
    fn rejects_bad_parameters() {
        let e = validate(
            FamilyId::Krawtchouk,
            FamilyParams::Krawtchouk { p: 1.2 },
            LatticeRequest::Finite { n: 4 },
        )
        .unwrap_err();
        assert_eq!(e.name(), "ParameterOutOfRange");
        let e = validate(
            FamilyId::Racah,
            FamilyParams::Racah { d: 1.0, a: 3.0, b: 0.5 },
            LatticeRequest::Finite { n: 4 },
        )
        .unwrap_err();
        assert_eq!(e.name(), "ParameterOutOfRange");
    }

    #[test]
    fn universal_normalization() {
        let insts = [
            kraw(0.3, 8),
            validate(
                FamilyId::QRacah,
                FamilyParams::QRacah { q: 0.7, d: 0.5, a: 0.2 * 0.7f64.powi(8), b: 0.6 },
                LatticeRequest::Finite { n: 8 },
            )
            .unwrap(),
        ];
        for inst in &insts {
            for n in 0..=8 {
                assert!((inst.poly(n, 0).unwrap() - 1.0).abs() < 1e-12);
            }
            for x in 0..=8 {
                assert_eq!(inst.poly(0, x).unwrap(), 1.0);
            }
        }
    }

    #[test]
    fn weight_matches_rate_product() {
        for inst in [
            kraw(0.8, 8),
            validate(
                FamilyId::Hahn,
                FamilyParams::Hahn { a: 0.5, b: 2.5 },
                LatticeRequest::Finite { n: 8 },
            )
            .unwrap(),
            validate(
                FamilyId::Meixner,
                FamilyParams::Meixner { beta: 1.5, c: 0.4 },
                LatticeRequest::semi_infinite_default(),
            )
            .unwrap(),
        ] {
            let mut prod = 1.0f64;
            for x in 0..inst.n_points() - 1 {
                let w = inst.weight(x).unwrap();
                assert!((w - prod).abs() <= 1e-10 * prod.abs());
                prod *= inst.coeff_b(x).unwrap() / inst.coeff_d(x + 1).unwrap();
            }
        }
    }

    #[test]
    fn truncation_is_certified() {
        let inst = validate(
            FamilyId::Meixner,
            FamilyParams::Meixner { beta: 1.5, c: 0.4 },
            LatticeRequest::semi_infinite_default(),
        )
        .unwrap();
        let m = match inst.lattice() {
            LatticeSpec::SemiInfinite { m, .. } => m,
            _ => panic!(),
        };
        assert!(m >= 2 && m < 500);
        assert!(inst.n_max() >= 1, "expected more than one exposed mode, got {}", inst.n_max());
        // tail mass really is below eps_tail
        let cum: f64 = (0..=m).map(|x| inst.weight(x).unwrap()).sum();
        let tail: f64 = (m + 1..m + 200).map(|x| {
            // extend the closed form beyond the truncated instance
            let beta = 1.5f64;
            let c: f64 = 0.4;
            let mut lw = 0.0f64;
            for y in 0..x {
                lw += (c * (y as f64 + beta) / (y as f64 + 1.0)).ln();
            }
            lw.exp()
        })
        .sum();
        assert!(tail < 1e-14 * cum);
    }

    #[test]
    fn orthogonality_spot_check() {
        // Hahn N=8: sum_x w(x) P_m P_n = delta_mn / d_n^2
        let inst = validate(
            FamilyId::Hahn,
            FamilyParams::Hahn { a: 3.0, b: 1.2 },
            LatticeRequest::Finite { n: 8 },
        )
        .unwrap();
        for m in 0..=8usize {
            for n in m..=8 {
                let s: f64 = (0..=8)
                    .map(|x| {
                        inst.weight(x).unwrap()
                            * inst.poly(m, x).unwrap()
                            * inst.poly(n, x).unwrap()
                    })
                    .sum();
                let target = if m == n { 1.0 / inst.norm_sq(n).unwrap() } else { 0.0 };
                assert!(
                    (s - target).abs() * inst.norm_sq(n).unwrap() < 1e-9,
                    "m={m} n={n}"
                );
            }
        }
    }

    #[test]
    fn leading_coeff_matches_divided_differences() {
        // divided differences of P_n over eta(0..n) recover alpha_n
        for inst in [
            validate(
                FamilyId::QKrawtchouk,
                FamilyParams::QKrawtchouk { q: 0.7, p: 0.5 },
                LatticeRequest::Finite { n: 8 },
            )
            .unwrap(),
            validate(
                FamilyId::QHahn,
                FamilyParams::QHahn { q: 0.3, a: 0.3, b: 0.6 },
                LatticeRequest::Finite { n: 8 },
            )
            .unwrap(),
        ] {
            for n in 0..=8usize {
                let mut coef: Vec<f64> = (0..=n).map(|x| inst.poly(n, x).unwrap()).collect();
                let xs: Vec<f64> = (0..=n).map(|x| inst.eta(x).unwrap()).collect();
                for j in 1..=n {
                    for i in (j..=n).rev() {
                        coef[i] = (coef[i] - coef[i - 1]) / (xs[i] - xs[i - j]);
                    }
                }
                let alpha = inst.leading_coeff(n).unwrap();
                assert!(
                    (coef[n] - alpha).abs() <= 1e-8 * alpha.abs(),
                    "n={n}: dd={} alpha={alpha}",
                    coef[n]
                );
            }
        }
    }
}
