//! Indefinite binary quadratic forms, Pell fundamental solutions, the
//! correspondence between primitive forms and primitive hyperbolic matrices,
//! Gauss reduction cycles, and the diagonalizing frame a class carries into
//! the counting layer.

use crate::exactnum::{quadrat_ln, rat, BigRat, IMat2, QMat2, QuadRat};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FormError {
    /// Discriminant is zero, negative, or a perfect square.
    BadDiscriminant(BigInt),
    /// Discriminant not 0 or 1 mod 4.
    BadResidue(u64),
    /// gcd(a, b, c) > 1.
    Imprimitive,
    /// Leading coefficient zero.
    ZeroLeading,
    /// Matrix input with det != 1 or |trace| <= 2.
    NonHyperbolic,
    /// Discriminant too large for the quadratic-field context.
    DiscriminantTooLarge(BigInt),
}

impl fmt::Display for FormError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormError::BadDiscriminant(d) => {
                write!(f, "discriminant {d} must be positive and non-square")
            }
            FormError::BadResidue(d) => write!(f, "discriminant {d} must be 0 or 1 mod 4"),
            FormError::Imprimitive => write!(f, "form is not primitive"),
            FormError::ZeroLeading => write!(f, "leading coefficient must be nonzero"),
            FormError::NonHyperbolic => write!(f, "matrix is not hyperbolic with determinant 1"),
            FormError::DiscriminantTooLarge(d) => {
                write!(f, "discriminant {d} exceeds the supported range")
            }
        }
    }
}

impl std::error::Error for FormError {}

/// Primitive indefinite binary quadratic form a x^2 + b x y + c y^2 with
/// non-square discriminant d = b^2 - 4ac > 0.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QForm {
    a: BigInt,
    b: BigInt,
    c: BigInt,
    d: BigInt,
}

impl QForm {
    pub fn new(a: BigInt, b: BigInt, c: BigInt) -> Result<Self, FormError> {
        if a.is_zero() {
            return Err(FormError::ZeroLeading);
        }
        let d = &b * &b - BigInt::from(4) * &a * &c;
        if !d.is_positive() || big_is_square(&d) {
            return Err(FormError::BadDiscriminant(d));
        }
        if a.gcd(&b).gcd(&c) != BigInt::one() {
            return Err(FormError::Imprimitive);
        }
        Ok(QForm { a, b, c, d })
    }

    pub fn from_i64(a: i64, b: i64, c: i64) -> Result<Self, FormError> {
        QForm::new(BigInt::from(a), BigInt::from(b), BigInt::from(c))
    }

    pub fn a(&self) -> &BigInt {
        &self.a
    }

    pub fn b(&self) -> &BigInt {
        &self.b
    }

    pub fn c(&self) -> &BigInt {
        &self.c
    }

    pub fn disc(&self) -> &BigInt {
        &self.d
    }

    pub fn disc_u64(&self) -> Result<u64, FormError> {
        use num_traits::ToPrimitive;
        self.d
            .to_u64()
            .ok_or_else(|| FormError::DiscriminantTooLarge(self.d.clone()))
    }

    /// Right action by g in SL2(Z) on the Gram matrix: g^t G g.
    pub fn transform(&self, g: &IMat2) -> QForm {
        let (p, q, r, s) = (
            g.entry(0, 0),
            g.entry(0, 1),
            g.entry(1, 0),
            g.entry(1, 1),
        );
        let a = &self.a * p * p + &self.b * p * r + &self.c * r * r;
        let b = BigInt::from(2) * &self.a * p * q
            + &self.b * (p * s + q * r)
            + BigInt::from(2) * &self.c * r * s;
        let c = &self.a * q * q + &self.b * q * s + &self.c * s * s;
        let d = &b * &b - BigInt::from(4) * &a * &c;
        debug_assert_eq!(d, self.d);
        QForm { a, b, c, d }
    }

    /// Gauss-reduced for indefinite forms: 0 < b < sqrt(d) and
    /// sqrt(d) - b < 2|a| < sqrt(d) + b, all checked exactly.
    pub fn is_reduced(&self) -> bool {
        if !self.b.is_positive() {
            return false;
        }
        if &self.b * &self.b >= self.d {
            return false;
        }
        let abs2a = BigInt::from(2) * self.a.abs();
        let hi = &abs2a + &self.b;
        if &hi * &hi <= self.d {
            return false; // 2|a| + b <= sqrt(d) fails sqrt(d) - b < 2|a|
        }
        let lo = &abs2a - &self.b;
        if lo.is_positive() && &lo * &lo >= self.d {
            return false; // 2|a| - b >= sqrt(d) fails 2|a| < sqrt(d) + b
        }
        true
    }
}

impl fmt::Debug for QForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{},{},{}]", self.a, self.b, self.c)
    }
}

impl fmt::Display for QForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{},{}", self.a, self.b, self.c)
    }
}

fn big_is_square(n: &BigInt) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &(&r * &r) == n
}

/// Fundamental solution of t^2 - d u^2 = 4 with t, u > 0 and u minimal,
/// together with eps_d = (t0 + u0 sqrt(d)) / 2.
#[derive(Clone, Debug)]
pub struct PellSolution {
    pub d: u64,
    pub t0: BigInt,
    pub u0: BigInt,
    pub eps: QuadRat,
}

/// Fundamental solution of x^2 - m y^2 = +-1 from the continued fraction of
/// sqrt(m), using the standard (P, Q) integer recurrence; returns (x, y, norm).
fn cf_fundamental_unit(m: u64) -> (BigInt, BigInt, i32) {
    let mut a0 = (m as f64).sqrt() as u64;
    while (a0 + 1) * (a0 + 1) <= m {
        a0 += 1;
    }
    while a0 * a0 > m {
        a0 -= 1;
    }
    let (mut p_prev, mut p) = (BigInt::one(), BigInt::from(a0));
    let (mut q_prev, mut q) = (BigInt::zero(), BigInt::one());
    let (mut pp, mut qq) = (a0, m - a0 * a0); // xi_1 = (pp + sqrt m)/qq
    loop {
        // period closes when Q returns to 1; convergent index parity gives
        // the norm of the unit
        let mut k = 1usize;
        loop {
            if qq == 1 {
                let norm = if k % 2 == 0 { 1 } else { -1 };
                return (p, q, norm);
            }
            let a = (a0 + pp) / qq;
            let p_next = BigInt::from(a) * &p + &p_prev;
            let q_next = BigInt::from(a) * &q + &q_prev;
            p_prev = std::mem::replace(&mut p, p_next);
            q_prev = std::mem::replace(&mut q, q_next);
            pp = a * qq - pp;
            qq = (m - pp * pp) / qq;
            k += 1;
        }
    }
}

/// Fundamental solution of Pell's equation t^2 - d u^2 = 4 for a positive
/// non-square discriminant d = 0 or 1 mod 4, by continued fractions.
///
/// For d = 0 mod 4 this is (2x, y) with (x, y) fundamental for
/// x^2 - (d/4) y^2 = 1. For d = 1 mod 4 the minimal solution may be odd: it
/// is then the cube root of the fundamental unit of Z[sqrt(d)] inside the
/// half-integer order, found exactly from the trace identity
/// t^3 - 3 n t = 2 x1.
pub fn pell_fundamental(d: u64) -> Result<PellSolution, FormError> {
    let db = BigInt::from(d);
    if d == 0 || big_is_square(&db) {
        return Err(FormError::BadDiscriminant(db));
    }
    match d % 4 {
        0 => {
            let m = d / 4;
            let (x, y, norm) = cf_fundamental_unit(m);
            let (x, y) = if norm == 1 {
                (x, y)
            } else {
                (&x * &x + BigInt::from(m) * &y * &y, BigInt::from(2) * &x * &y)
            };
            finish_pell(d, BigInt::from(2) * x, y)
        }
        1 => {
            let (x1, y1, norm) = cf_fundamental_unit(d);
            let two_x1 = BigInt::from(2) * &x1;
            let t_guess = two_x1.cbrt();
            for off in -1i64..=2 {
                let t = &t_guess + BigInt::from(off);
                if !t.is_positive() {
                    continue;
                }
                if &t * &t * &t - BigInt::from(3 * norm as i64) * &t == two_x1 {
                    let t2 = &t * &t - BigInt::from(4 * norm as i64);
                    let (u2, rem) = t2.div_rem(&db);
                    if rem.is_zero() && big_is_square(&u2) {
                        let u = u2.sqrt();
                        if u.is_positive() {
                            if norm == 1 {
                                return finish_pell(d, t, u);
                            }
                            // norm -1 unit: the fundamental +4 solution is its square
                            let tt = (&t * &t + &db * &u * &u) / BigInt::from(2);
                            let uu = &t * &u;
                            return finish_pell(d, tt, uu);
                        }
                    }
                }
            }
            // no half-integer unit: double the Z[sqrt d] solution
            if norm == 1 {
                finish_pell(d, BigInt::from(2) * x1, BigInt::from(2) * y1)
            } else {
                let t = BigInt::from(2) * (&x1 * &x1 + &db * &y1 * &y1);
                let u = BigInt::from(4) * &x1 * &y1;
                finish_pell(d, t, u)
            }
        }
        _ => Err(FormError::BadResidue(d)),
    }
}

fn finish_pell(d: u64, t0: BigInt, u0: BigInt) -> Result<PellSolution, FormError> {
    assert_eq!(
        &t0 * &t0 - BigInt::from(d) * &u0 * &u0,
        BigInt::from(4),
        "Pell norm identity violated for d={d}"
    );
    let eps = QuadRat::new(
        d,
        BigRat::new(t0.clone(), BigInt::from(2)),
        rat(1, 2) * BigRat::from(u0.clone()),
    );
    debug_assert_eq!((&eps - &QuadRat::one(d)).sign(), 1, "eps_d must exceed 1");
    Ok(PellSolution { d, t0, u0, eps })
}

/// Generator of the automorph group of a primitive indefinite form:
/// M = ((t0 - b u0)/2, -c u0; a u0, (t0 + b u0)/2).
pub fn automorph(q: &QForm) -> Result<IMat2, FormError> {
    let pell = pell_fundamental(q.disc_u64()?)?;
    automorph_with(q, &pell)
}

pub fn automorph_with(q: &QForm, pell: &PellSolution) -> Result<IMat2, FormError> {
    let tb = &pell.t0 - q.b() * &pell.u0;
    let td = &pell.t0 + q.b() * &pell.u0;
    // parity is forced by t0^2 - d u0^2 = 4; a failure here is internal
    assert!(tb.is_even() && td.is_even(), "automorph parity violated");
    let m = IMat2::new(
        tb / BigInt::from(2),
        -(q.c() * &pell.u0),
        q.a() * &pell.u0,
        td / BigInt::from(2),
    );
    debug_assert!(m.det().is_one());
    debug_assert_eq!(m.trace(), pell.t0);
    Ok(m)
}

/// Inverse of the form/matrix correspondence: the primitive form whose
/// fundamental automorph has the given hyperbolic matrix as a positive power.
///
/// Returns the form together with that power k when k <= `power_bound`
/// (None beyond the bound).
pub fn class_of_matrix(m: &IMat2, power_bound: u32) -> Result<(QForm, Option<u32>), FormError> {
    if !m.det().is_one() {
        return Err(FormError::NonHyperbolic);
    }
    let tr = m.trace();
    if tr.abs() <= BigInt::from(2) {
        return Err(FormError::NonHyperbolic);
    }
    // m = M_q^k has shape ((t_k - b u_k)/2, -c u_k; a u_k, (t_k + b u_k)/2),
    // so (a, b, c) = (m21, m22 - m11, -m12) / u_k with u_k = gcd > 0.
    let ka = m.entry(1, 0).clone();
    let kb = m.entry(1, 1) - m.entry(0, 0);
    let kc = -m.entry(0, 1).clone();
    let g = ka.gcd(&kb).gcd(&kc);
    assert!(!g.is_zero(), "hyperbolic matrix cannot be scalar");
    let q = QForm::new(&ka / &g, &kb / &g, &kc / &g).map_err(|_| FormError::NonHyperbolic)?;
    // walk the Pell solution tower (t_k, u_k) to identify the power
    let d = q.disc_u64()?;
    let pell = pell_fundamental(d)?;
    let dbig = BigInt::from(d);
    let (mut tk, mut uk) = (pell.t0.clone(), pell.u0.clone());
    let mut power = None;
    for k in 1..=power_bound {
        if uk == g {
            power = (tk == tr).then_some(k);
            break;
        }
        if uk > g {
            break;
        }
        let t_next = (&pell.t0 * &tk + &dbig * &pell.u0 * &uk) / BigInt::from(2);
        let u_next = (&pell.t0 * &uk + &pell.u0 * &tk) / BigInt::from(2);
        tk = t_next;
        uk = u_next;
    }
    Ok((q, power))
}

/// One Gauss reduction step for indefinite forms, returning the neighbor form
/// and the SL2(Z) transform applied on the right.
fn rho_step(q: &QForm) -> (QForm, IMat2) {
    let d = q.disc();
    let two_c = BigInt::from(2) * q.c();
    let c2 = two_c.abs();
    let r = if q.c() * q.c() >= *d {
        // r = -b mod 2|c| in (-|c|, |c|]
        let mut r = (-q.b()).mod_floor(&c2);
        if r > q.c().abs() {
            r -= &c2;
        }
        r
    } else {
        // r = -b mod 2|c| in (sqrt(d) - 2|c|, sqrt(d))
        let hi = d.sqrt(); // floor, and sqrt(d) is irrational
        let mut r = (-q.b()).mod_floor(&c2);
        while &r + &c2 <= hi {
            r += &c2;
        }
        while r > hi {
            r -= &c2;
        }
        r
    };
    let m = (q.b() + &r).div_floor(&two_c);
    debug_assert_eq!(q.b() + &r, &two_c * &m);
    let g = IMat2::new(BigInt::zero(), -BigInt::one(), BigInt::one(), m);
    let next = q.transform(&g);
    debug_assert_eq!(next.a(), q.c());
    debug_assert_eq!(next.b(), &r);
    (next, g)
}

/// Gauss reduction: a reduced form equivalent to q together with the
/// transform achieving it (q acted by the transform equals the result).
pub fn reduce_form(q: &QForm) -> (QForm, IMat2) {
    let mut cur = q.clone();
    let mut acc = IMat2::identity();
    for _ in 0..10_000 {
        if cur.is_reduced() {
            return (cur, acc);
        }
        let (next, g) = rho_step(&cur);
        acc = acc.mul(&g);
        cur = next;
    }
    unreachable!("Gauss reduction failed to terminate");
}

/// The cycle of reduced forms through q's reduced representative.
pub fn reduction_cycle(q: &QForm) -> Vec<QForm> {
    let (start, _) = reduce_form(q);
    let mut cycle = vec![start.clone()];
    let mut cur = start.clone();
    loop {
        let (next, _) = rho_step(&cur);
        debug_assert!(next.is_reduced());
        if next == start {
            return cycle;
        }
        cycle.push(next.clone());
        cur = next;
        assert!(cycle.len() < 100_000, "reduction cycle failed to close");
    }
}

/// Proper equivalence of forms, decided by full traversal of the reduction
/// cycle. Forms of different discriminants are never equivalent.
pub fn equivalent(q1: &QForm, q2: &QForm) -> bool {
    if q1.disc() != q2.disc() {
        return false;
    }
    let (r2, _) = reduce_form(q2);
    reduction_cycle(q1).contains(&r2)
}

/// Diagonalizing data of a class: the roots theta_1,2 of a theta^2 + b theta
/// + c, the frame T = (theta1, theta2; 1, 1) and its inverse, the automorph
/// with T diag(eps, 1/eps) T^{-1} = M verified exactly, and the primitive
/// geodesic length mu = 2 log eps_d.
#[derive(Clone)]
pub struct ClassFrame {
    pub form: QForm,
    pub d: u64,
    pub theta1: QuadRat,
    pub theta2: QuadRat,
    pub t_mat: QMat2,
    pub t_inv: QMat2,
    pub automorph: IMat2,
    pub automorph_inv: IMat2,
    pub pell: PellSolution,
    pub eps: QuadRat,
    /// eps^4, the exact width of the canonical window in the v coordinate.
    pub eps4: QuadRat,
    /// 2 log eps_d, the primitive geodesic length.
    pub mu: f64,
    /// Class power: the class of automorph^nu. Cosets and radii are those of
    /// the primitive class; nu enters only time/X conversions and spectra.
    pub nu: u32,
}

impl ClassFrame {
    /// Geodesic length of the class itself, nu * mu.
    pub fn mu_class(&self) -> f64 {
        self.nu as f64 * self.mu
    }
}

impl fmt::Debug for ClassFrame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ClassFrame({:?}, nu={})", self.form, self.nu)
    }
}

/// Build the exact frame of a form's class. Verifies the diagonalization
/// identity exactly before returning.
pub fn build_frame(q: &QForm, nu: u32) -> Result<ClassFrame, FormError> {
    assert!(nu >= 1, "class power must be positive");
    let d = q.disc_u64()?;
    let pell = pell_fundamental(d)?;
    let m = automorph_with(q, &pell)?;
    let two_a = BigRat::from(BigInt::from(2) * q.a());
    let theta1 = QuadRat::new(
        d,
        BigRat::from(-q.b().clone()) / &two_a,
        BigRat::one() / &two_a,
    );
    let theta2 = QuadRat::new(
        d,
        BigRat::from(-q.b().clone()) / &two_a,
        -(BigRat::one() / &two_a),
    );
    let one = QuadRat::one(d);
    let t_mat = QMat2::new(theta1.clone(), theta2.clone(), one.clone(), one);
    let t_inv = t_mat.inverse();
    let eps = pell.eps.clone();
    let eps_inv = eps.conjugate(); // norm(eps) = +1
    debug_assert_eq!(&eps * &eps_inv, QuadRat::one(d));
    let recon = t_mat.mul(&QMat2::diag(eps.clone(), eps_inv)).mul(&t_inv);
    assert_eq!(
        recon,
        QMat2::from_imat(d, &m),
        "diagonalization identity failed for {q:?}"
    );
    let mu = 2.0 * quadrat_ln(&eps);
    let eps4 = eps.pow(4);
    Ok(ClassFrame {
        form: q.clone(),
        d,
        theta1,
        theta2,
        t_mat,
        t_inv,
        automorph_inv: m.inverse_unimodular(),
        automorph: m,
        pell,
        eps,
        eps4,
        mu,
        nu,
    })
}
