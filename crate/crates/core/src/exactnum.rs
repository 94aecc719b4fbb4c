//! Exact arithmetic over Q and Q(sqrt(d)), 2x2 matrices over both, the
//! Moebius action on the upper half-plane, and hyperbolic distance
//! functionals.
//!
//! Every threshold decision made by the counting layer goes through these
//! types; floating point shows up only in reports and in the special-function
//! layer. All values are immutable after construction and all operations are
//! pure functions, so everything here is safe to share across threads.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::fmt;

/// Arbitrary-precision rational with reduced representation and positive
/// denominator (both guaranteed by `num_rational`).
pub type BigRat = BigRational;

/// Build a `BigRat` from an integer pair, mostly for tests and literals.
pub fn rat(num: i64, den: i64) -> BigRat {
    BigRat::new(BigInt::from(num), BigInt::from(den))
}

/// Serialize a rational as `num/den` with the denominator always present.
pub fn rat_to_string(r: &BigRat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parse `num/den` (or a bare integer) into a rational.
pub fn rat_from_string(s: &str) -> Result<BigRat, ExactError> {
    let s = s.trim();
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: BigInt = num
        .parse()
        .map_err(|_| ExactError::Parse(s.to_string()))?;
    let den: BigInt = den
        .parse()
        .map_err(|_| ExactError::Parse(s.to_string()))?;
    if den.is_zero() {
        return Err(ExactError::Parse(s.to_string()));
    }
    Ok(BigRat::new(num, den))
}

/// Errors from the exact layer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExactError {
    /// Moebius action by a matrix whose determinant is not positive.
    DegenerateMatrix,
    /// Translation length of a non-hyperbolic matrix (|trace| <= 2).
    NotHyperbolic,
    /// Upper half-plane point with Im <= 0.
    NotUpperHalfPlane,
    /// Malformed textual rational / matrix input.
    Parse(String),
}

impl fmt::Display for ExactError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExactError::DegenerateMatrix => write!(f, "matrix determinant must be positive"),
            ExactError::NotHyperbolic => write!(f, "matrix is not hyperbolic (|trace| <= 2)"),
            ExactError::NotUpperHalfPlane => write!(f, "point must have positive imaginary part"),
            ExactError::Parse(s) => write!(f, "cannot parse exact value from {s:?}"),
        }
    }
}

impl std::error::Error for ExactError {}

/// Element p + q*sqrt(d) of the real quadratic field Q(sqrt(d)).
///
/// `d` is a fixed positive non-square integer per computation context; mixing
/// two different `d`s in one operation is a programming error and panics.
/// Equality is componentwise, which coincides with numeric equality because
/// sqrt(d) is irrational.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QuadRat {
    d: u64,
    p: BigRat,
    q: BigRat,
}

impl QuadRat {
    pub fn new(d: u64, p: BigRat, q: BigRat) -> Self {
        debug_assert!(!is_square_u64(d) && d > 0, "d must be positive non-square");
        QuadRat { d, p, q }
    }

    pub fn zero(d: u64) -> Self {
        QuadRat::new(d, BigRat::zero(), BigRat::zero())
    }

    pub fn one(d: u64) -> Self {
        QuadRat::new(d, BigRat::one(), BigRat::zero())
    }

    /// The element sqrt(d) itself.
    pub fn sqrt_d(d: u64) -> Self {
        QuadRat::new(d, BigRat::zero(), BigRat::one())
    }

    pub fn from_rat(d: u64, p: BigRat) -> Self {
        QuadRat::new(d, p, BigRat::zero())
    }

    pub fn from_int(d: u64, n: i64) -> Self {
        QuadRat::from_rat(d, rat(n, 1))
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    pub fn p(&self) -> &BigRat {
        &self.p
    }

    pub fn q(&self) -> &BigRat {
        &self.q
    }

    pub fn is_zero(&self) -> bool {
        self.p.is_zero() && self.q.is_zero()
    }

    pub fn is_rational(&self) -> bool {
        self.q.is_zero()
    }

    /// The rational part, panicking if a sqrt(d) component is present.
    /// Used where Galois invariance proves the value rational.
    pub fn expect_rational(&self) -> BigRat {
        assert!(self.q.is_zero(), "value unexpectedly irrational");
        self.p.clone()
    }

    /// Galois conjugate p - q*sqrt(d).
    pub fn conjugate(&self) -> Self {
        QuadRat::new(self.d, self.p.clone(), -self.q.clone())
    }

    /// Field norm p^2 - q^2 d, a rational.
    pub fn norm(&self) -> BigRat {
        &self.p * &self.p - &self.q * &self.q * BigRat::from(BigInt::from(self.d))
    }

    /// Multiplicative inverse; panics on zero.
    pub fn inv(&self) -> Self {
        assert!(!self.is_zero(), "division by zero in Q(sqrt d)");
        let n = self.norm();
        QuadRat::new(self.d, &self.p / &n, -&self.q / &n)
    }

    pub fn pow(&self, k: i32) -> Self {
        let mut base = if k < 0 { self.inv() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut acc = QuadRat::one(self.d);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Exact sign of p + q*sqrt(d), decided by rational comparisons of p^2
    /// against q^2 d; never by floating point.
    pub fn sign(&self) -> i32 {
        let sp = rat_sign(&self.p);
        let sq = rat_sign(&self.q);
        if sq == 0 {
            return sp;
        }
        if sp == 0 {
            return sq;
        }
        if sp == sq {
            return sp;
        }
        // Opposite signs: compare p^2 with q^2 d; equality would force
        // sqrt(d) rational, impossible for non-square d.
        let lhs = &self.p * &self.p;
        let rhs = &self.q * &self.q * BigRat::from(BigInt::from(self.d));
        match lhs.cmp(&rhs) {
            std::cmp::Ordering::Greater => sp,
            std::cmp::Ordering::Less => sq,
            std::cmp::Ordering::Equal => 0,
        }
    }

    pub fn to_f64(&self) -> f64 {
        big_rat_to_f64(&self.p) + big_rat_to_f64(&self.q) * (self.d as f64).sqrt()
    }
}

/// Exact sign of a quadratic-field element. See [`QuadRat::sign`].
pub fn quad_sign(v: &QuadRat) -> i32 {
    v.sign()
}

fn rat_sign(r: &BigRat) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

/// `to_f64` that degrades gracefully for values far outside f64 range.
pub fn big_rat_to_f64(r: &BigRat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let bits = r.numer().bits() as i64 - r.denom().bits() as i64;
        if rat_sign(r) >= 0 {
            if bits > 0 {
                f64::INFINITY
            } else {
                0.0
            }
        } else if bits > 0 {
            f64::NEG_INFINITY
        } else {
            -0.0
        }
    })
}

/// Natural log of a positive quadratic-field element, robust to values whose
/// f64 image would overflow (huge Pell units).
pub fn quadrat_ln(v: &QuadRat) -> f64 {
    debug_assert!(v.sign() > 0);
    let f = v.to_f64();
    if f.is_finite() && f > 0.0 {
        return f.ln();
    }
    // Scale down by a power of two until finite.
    let scale = {
        let bits = v.p().numer().bits().max(v.q().numer().bits()) as i64
            - v.p().denom().bits().min(v.q().denom().bits()) as i64;
        (bits - 500).max(0) as u64
    };
    let pow = BigRat::from(BigInt::one() << scale);
    let scaled = QuadRat::new(v.d(), v.p() / &pow, v.q() / &pow);
    scaled.to_f64().ln() + scale as f64 * std::f64::consts::LN_2
}

fn is_square_u64(n: u64) -> bool {
    let r = (n as f64).sqrt() as u64;
    (r.saturating_sub(1)..=r + 1).any(|k| k * k == n)
}

macro_rules! check_same_d {
    ($a:expr, $b:expr) => {
        assert_eq!(
            $a.d, $b.d,
            "mixing quadratic fields Q(sqrt {}) and Q(sqrt {})",
            $a.d, $b.d
        );
    };
}

impl std::ops::Add for &QuadRat {
    type Output = QuadRat;
    fn add(self, rhs: &QuadRat) -> QuadRat {
        check_same_d!(self, rhs);
        QuadRat::new(self.d, &self.p + &rhs.p, &self.q + &rhs.q)
    }
}

impl std::ops::Sub for &QuadRat {
    type Output = QuadRat;
    fn sub(self, rhs: &QuadRat) -> QuadRat {
        check_same_d!(self, rhs);
        QuadRat::new(self.d, &self.p - &rhs.p, &self.q - &rhs.q)
    }
}

impl std::ops::Mul for &QuadRat {
    type Output = QuadRat;
    fn mul(self, rhs: &QuadRat) -> QuadRat {
        check_same_d!(self, rhs);
        let d = BigRat::from(BigInt::from(self.d));
        QuadRat::new(
            self.d,
            &self.p * &rhs.p + (&self.q * &rhs.q) * d,
            &self.p * &rhs.q + &self.q * &rhs.p,
        )
    }
}

impl std::ops::Div for &QuadRat {
    type Output = QuadRat;
    fn div(self, rhs: &QuadRat) -> QuadRat {
        self * &rhs.inv()
    }
}

impl std::ops::Neg for &QuadRat {
    type Output = QuadRat;
    fn neg(self) -> QuadRat {
        QuadRat::new(self.d, -self.p.clone(), -self.q.clone())
    }
}

macro_rules! forward_owned_binop {
    ($trait:ident, $method:ident) => {
        impl std::ops::$trait for QuadRat {
            type Output = QuadRat;
            fn $method(self, rhs: QuadRat) -> QuadRat {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned_binop!(Add, add);
forward_owned_binop!(Sub, sub);
forward_owned_binop!(Mul, mul);
forward_owned_binop!(Div, div);

impl std::ops::Neg for QuadRat {
    type Output = QuadRat;
    fn neg(self) -> QuadRat {
        -&self
    }
}

impl PartialOrd for QuadRat {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadRat {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match (self - other).sign() {
            1 => std::cmp::Ordering::Greater,
            -1 => std::cmp::Ordering::Less,
            _ => std::cmp::Ordering::Equal,
        }
    }
}

macro_rules! fmt_quadrat {
    () => {
        fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            if self.q.is_zero() {
                write!(f, "{}", self.p)
            } else if self.p.is_zero() {
                write!(f, "{}*sqrt({})", self.q, self.d)
            } else {
                write!(f, "{} + {}*sqrt({})", self.p, self.q, self.d)
            }
        }
    };
}

impl fmt::Debug for QuadRat {
    fmt_quadrat!();
}

impl fmt::Display for QuadRat {
    fmt_quadrat!();
}

/// 2x2 integer matrix with cached determinant.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IMat2 {
    e: [BigInt; 4],
    det: BigInt,
}

impl IMat2 {
    pub fn new(a11: BigInt, a12: BigInt, a21: BigInt, a22: BigInt) -> Self {
        let det = &a11 * &a22 - &a12 * &a21;
        IMat2 {
            e: [a11, a12, a21, a22],
            det,
        }
    }

    pub fn from_i64(a11: i64, a12: i64, a21: i64, a22: i64) -> Self {
        IMat2::new(
            BigInt::from(a11),
            BigInt::from(a12),
            BigInt::from(a21),
            BigInt::from(a22),
        )
    }

    pub fn identity() -> Self {
        IMat2::from_i64(1, 0, 0, 1)
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        &self.e[2 * i + j]
    }

    pub fn entries(&self) -> &[BigInt; 4] {
        &self.e
    }

    pub fn det(&self) -> &BigInt {
        &self.det
    }

    pub fn trace(&self) -> BigInt {
        &self.e[0] + &self.e[3]
    }

    pub fn mul(&self, rhs: &IMat2) -> IMat2 {
        IMat2::new(
            &self.e[0] * &rhs.e[0] + &self.e[1] * &rhs.e[2],
            &self.e[0] * &rhs.e[1] + &self.e[1] * &rhs.e[3],
            &self.e[2] * &rhs.e[0] + &self.e[3] * &rhs.e[2],
            &self.e[2] * &rhs.e[1] + &self.e[3] * &rhs.e[3],
        )
    }

    pub fn neg(&self) -> IMat2 {
        IMat2::new(
            -self.e[0].clone(),
            -self.e[1].clone(),
            -self.e[2].clone(),
            -self.e[3].clone(),
        )
    }

    /// Inverse for unimodular matrices (det = +-1).
    pub fn inverse_unimodular(&self) -> IMat2 {
        assert!(
            self.det.abs().is_one(),
            "inverse_unimodular requires det = +-1"
        );
        let m = IMat2::new(
            self.e[3].clone(),
            -self.e[1].clone(),
            -self.e[2].clone(),
            self.e[0].clone(),
        );
        if self.det.is_negative() {
            m.neg()
        } else {
            m
        }
    }

    pub fn pow(&self, k: u32) -> IMat2 {
        let mut acc = IMat2::identity();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// True when the first nonzero entry (row-major) is positive; used as the
    /// canonical sign choice when identifying N with -N.
    pub fn sign_canonical(&self) -> bool {
        for v in &self.e {
            match v.sign() {
                num_bigint::Sign::Plus => return true,
                num_bigint::Sign::Minus => return false,
                num_bigint::Sign::NoSign => continue,
            }
        }
        true
    }
}

impl fmt::Debug for IMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}, {}; {}, {}]",
            self.e[0], self.e[1], self.e[2], self.e[3]
        )
    }
}

/// 2x2 matrix over Q(sqrt(d)) with cached determinant.
#[derive(Clone, PartialEq, Eq)]
pub struct QMat2 {
    e: [QuadRat; 4],
    det: QuadRat,
}

impl QMat2 {
    pub fn new(a11: QuadRat, a12: QuadRat, a21: QuadRat, a22: QuadRat) -> Self {
        let det = &(&a11 * &a22) - &(&a12 * &a21);
        QMat2 {
            e: [a11, a12, a21, a22],
            det,
        }
    }

    pub fn identity(d: u64) -> Self {
        QMat2::new(
            QuadRat::one(d),
            QuadRat::zero(d),
            QuadRat::zero(d),
            QuadRat::one(d),
        )
    }

    pub fn from_imat(d: u64, m: &IMat2) -> Self {
        let conv = |b: &BigInt| QuadRat::from_rat(d, BigRat::from(b.clone()));
        QMat2::new(
            conv(m.entry(0, 0)),
            conv(m.entry(0, 1)),
            conv(m.entry(1, 0)),
            conv(m.entry(1, 1)),
        )
    }

    pub fn diag(a: QuadRat, b: QuadRat) -> Self {
        let d = a.d();
        QMat2::new(a, QuadRat::zero(d), QuadRat::zero(d), b)
    }

    pub fn entry(&self, i: usize, j: usize) -> &QuadRat {
        &self.e[2 * i + j]
    }

    pub fn det(&self) -> &QuadRat {
        &self.det
    }

    pub fn mul(&self, rhs: &QMat2) -> QMat2 {
        QMat2::new(
            &(&self.e[0] * &rhs.e[0]) + &(&self.e[1] * &rhs.e[2]),
            &(&self.e[0] * &rhs.e[1]) + &(&self.e[1] * &rhs.e[3]),
            &(&self.e[2] * &rhs.e[0]) + &(&self.e[3] * &rhs.e[2]),
            &(&self.e[2] * &rhs.e[1]) + &(&self.e[3] * &rhs.e[3]),
        )
    }

    pub fn inverse(&self) -> QMat2 {
        let inv_det = self.det.inv();
        QMat2::new(
            &self.e[3] * &inv_det,
            &(-&self.e[1]) * &inv_det,
            &(-&self.e[2]) * &inv_det,
            &self.e[0] * &inv_det,
        )
    }
}

impl fmt::Debug for QMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{:?}, {:?}; {:?}, {:?}]",
            self.e[0], self.e[1], self.e[2], self.e[3]
        )
    }
}

/// Point x + iy of the upper half-plane with exact coordinates.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct HPoint {
    x: QuadRat,
    y: QuadRat,
}

impl HPoint {
    pub fn new(x: QuadRat, y: QuadRat) -> Result<Self, ExactError> {
        if y.sign() != 1 {
            return Err(ExactError::NotUpperHalfPlane);
        }
        Ok(HPoint { x, y })
    }

    /// The point i in the field Q(sqrt(d)).
    pub fn i(d: u64) -> Self {
        HPoint {
            x: QuadRat::zero(d),
            y: QuadRat::one(d),
        }
    }

    pub fn x(&self) -> &QuadRat {
        &self.x
    }

    pub fn y(&self) -> &QuadRat {
        &self.y
    }

    pub fn d(&self) -> u64 {
        self.x.d()
    }
}

/// Moebius action (a z + b) / (c z + d) of a positive-determinant matrix,
/// with exact real and imaginary parts.
pub fn moebius_apply(g: &QMat2, z: &HPoint) -> Result<HPoint, ExactError> {
    if g.det().sign() != 1 {
        return Err(ExactError::DegenerateMatrix);
    }
    let (a, b, c, dd) = (g.entry(0, 0), g.entry(0, 1), g.entry(1, 0), g.entry(1, 1));
    // a z + b = (a x + b) + i a y ; c z + d = (c x + d) + i c y
    let nre = &(a * &z.x) + b;
    let nim = a * &z.y;
    let dre = &(c * &z.x) + dd;
    let dim = c * &z.y;
    let den = &(&dre * &dre) + &(&dim * &dim);
    // (n * conj(d)) / |d|^2
    let re = &(&(&nre * &dre) + &(&nim * &dim)) / &den;
    let im = &(&(&nim * &dre) - &(&nre * &dim)) / &den;
    HPoint::new(re, im)
}

/// cosh of the hyperbolic distance: 1 + |z - w|^2 / (2 Im z Im w).
pub fn cosh_rho(z: &HPoint, w: &HPoint) -> QuadRat {
    let dx = &z.x - &w.x;
    let dy = &z.y - &w.y;
    let num = &(&dx * &dx) + &(&dy * &dy);
    let two = QuadRat::from_int(z.d(), 2);
    let den = &(&two * &z.y) * &w.y;
    &QuadRat::one(z.d()) + &(&num / &den)
}

/// Translation length of a hyperbolic matrix, with the exact unit
/// (|trace| + sqrt(trace^2 - 4)) / 2 retained when trace^2 - 4 fits the
/// quadratic-field representation.
#[derive(Clone, Debug)]
pub struct TranslationLength {
    /// mu = 2 arccosh(|trace| / 2).
    pub mu: f64,
    /// The eigenvalue exp(mu / 2) as an exact quadratic number, when its
    /// discriminant trace^2 - 4 fits in u64.
    pub unit: Option<QuadRat>,
}

/// mu(m) = 2 arccosh(|trace| / 2) for a hyperbolic m (det 1, |trace| > 2).
///
/// When m is (a power of) the automorph of a form of discriminant d the
/// returned unit equals the corresponding power of the fundamental unit, so
/// mu = 2 log eps_d for the automorph itself.
pub fn translation_length(m: &IMat2) -> Result<TranslationLength, ExactError> {
    if !m.det().is_one() {
        return Err(ExactError::NotHyperbolic);
    }
    let tr = m.trace();
    let tr_abs = tr.magnitude().clone();
    if tr_abs <= 2u32.into() {
        return Err(ExactError::NotHyperbolic);
    }
    let disc = &tr * &tr - BigInt::from(4);
    let unit = disc.to_u64().map(|d_raw| {
        QuadRat::new(
            d_raw,
            BigRat::new(BigInt::from(tr_abs.clone()), BigInt::from(2)),
            rat(1, 2),
        )
    });
    let mu = match &unit {
        Some(u) => 2.0 * quadrat_ln(u),
        None => {
            // arccosh(t/2) = ln(t/2 + sqrt(t^2/4 - 1)) ~ ln t for huge t
            let t = BigRat::from(BigInt::from(tr_abs));
            let half = big_rat_to_f64(&(&t / BigRat::from(BigInt::from(2))));
            if half.is_finite() {
                2.0 * (half + (half * half - 1.0).sqrt()).ln()
            } else {
                let bits = t.numer().bits() as f64;
                2.0 * (bits * std::f64::consts::LN_2)
            }
        }
    };
    Ok(TranslationLength { mu, unit })
}
