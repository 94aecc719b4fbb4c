//! Orbit enumeration around the axis of a hyperbolic class.
//!
//! Matrices N of determinant n are counted modulo left multiplication by the
//! automorph M. Conjugating by the frame T moves the class axis onto the
//! imaginary axis; the canonical representative of a coset is the unique
//! M^k N whose axis-frame norm ratio v = |A z' + B|^2 / |C z' + D|^2 lies in
//! [1, eps^4), decided exactly. The entry radius of a coset is the exact
//! squared axis distance r2 = |Az'+B|^2 |Cz'+D|^2 / (n Im z')^2 of its
//! canonical representative, and every counting threshold is an exact
//! comparison of r2 against a rational X^2.
//!
//! The enumeration loops over second rows (gamma, delta), solves the
//! determinant equation along the resulting line of (alpha, beta), prunes by
//! the exact bound on |C z' + D|^2 in floating point with slack, and settles
//! every survivor exactly. Completeness is certified by re-running with a
//! doubled box and asserting an identical radius list.

use crate::exactnum::{BigRat, HPoint, IMat2, QMat2, QuadRat};
use crate::forms::ClassFrame;
use crate::huber::{coeff_a, HuberWindow};
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, ToPrimitive, Zero};
use rayon::prelude::*;
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

/// Whether quadruples are identified with their global sign flip.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SignMode {
    /// N and -N identified (the default; matches the main-term constants).
    Psl2,
    /// N and -N counted separately (kept for the factor-2 audit).
    Sl2,
}

impl fmt::Display for SignMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SignMode::Psl2 => write!(f, "psl2"),
            SignMode::Sl2 => write!(f, "sl2"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CountError {
    /// Requested evaluation beyond the guaranteed-complete horizon.
    HorizonExceeded { requested: f64, horizon: f64 },
    /// Box-doubling certification found a mismatch (internal bug guard).
    CertificationFailed,
    /// Oracle did not stabilize within its depth budget.
    OracleNotStabilized,
    /// Spectral datum outside (1/2, 1].
    BadSpectralDatum(f64),
}

impl fmt::Display for CountError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountError::HorizonExceeded { requested, horizon } => {
                write!(f, "x={requested} beyond certified horizon {horizon}")
            }
            CountError::CertificationFailed => write!(f, "box-doubling certification failed"),
            CountError::OracleNotStabilized => write!(f, "BFS oracle did not stabilize"),
            CountError::BadSpectralDatum(s) => {
                write!(f, "spectral parameter s={s} outside (1/2, 1]")
            }
        }
    }
}

impl std::error::Error for CountError {}

/// A canonical orbit representative with its exact data.
#[derive(Clone, Debug)]
pub struct OrbitPoint {
    /// Canonical integer matrix (alpha, beta; gamma, delta), det n.
    pub rep: IMat2,
    /// Axis-frame entries T^{-1} rep T.
    pub conj: QMat2,
    /// F = 2(AC + BD); rational by Galois invariance.
    pub f: BigRat,
    /// Exact squared entry radius.
    pub r2: QuadRat,
    /// Power of M applied during canonicalization (0 for enumerated points).
    pub m_shift: i64,
}

/// One jump of the counting step function.
#[derive(Clone, Debug)]
pub struct RadiusEntry {
    pub r2: QuadRat,
    /// Floating images of r2 and of the radius itself, for reports.
    pub r2_f64: f64,
    pub r: f64,
    pub mult: u32,
}

/// Sorted exact squared entry radii of the canonical representatives: the
/// jump set of the counting step function, complete up to `x2_max`.
#[derive(Clone, Debug)]
pub struct RadiusList {
    pub entries: Vec<RadiusEntry>,
    /// Exact squared horizon: complete for all r2 <= x2_max.
    pub x2_max: BigRat,
    pub det_n: u64,
    pub sign_mode: SignMode,
    pub basepoint: HPoint,
    pub d: u64,
    /// True when a box-doubling run reproduced this list exactly.
    pub certified: bool,
}

impl RadiusList {
    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.mult as u64).sum()
    }

    pub fn horizon_f64(&self) -> f64 {
        crate::exactnum::big_rat_to_f64(&self.x2_max).sqrt()
    }

    /// Count of points with r2 <= x2, decided exactly.
    pub fn count_at_x2(&self, x2: &BigRat) -> Result<u64, CountError> {
        if x2 > &self.x2_max {
            return Err(CountError::HorizonExceeded {
                requested: crate::exactnum::big_rat_to_f64(x2).sqrt(),
                horizon: self.horizon_f64(),
            });
        }
        let bound = QuadRat::from_rat(self.d, x2.clone());
        let idx = self.entries.partition_point(|e| e.r2 <= bound);
        Ok(self.entries[..idx].iter().map(|e| e.mult as u64).sum())
    }

    /// Count at radius X given as a float (converted exactly).
    pub fn count_at(&self, x: f64) -> Result<u64, CountError> {
        let xr = BigRational::from_f64(x).unwrap_or_else(BigRational::zero);
        self.count_at_x2(&(&xr * &xr))
    }
}

/// Spectral datum (s, coeff) contributing A(s) coeff X^s to the main term.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralDatum {
    pub s: f64,
    pub coeff: f64,
}

/// Axis-frame entries T^{-1} N T, exact over Q(sqrt d).
pub fn conj_entries(n: &IMat2, frame: &ClassFrame) -> QMat2 {
    let nq = QMat2::from_imat(frame.d, n);
    frame.t_inv.mul(&nq).mul(&frame.t_mat)
}

fn row_abs2(e0: &QuadRat, e1: &QuadRat, z: &HPoint) -> QuadRat {
    // |e0 z + e1|^2 for real e0, e1
    let re = &(e0 * z.x()) + e1;
    let im = e0 * z.y();
    &(&re * &re) + &(&im * &im)
}

/// Exact squared norms (|Az'+B|^2, |Cz'+D|^2) of the conjugated rows.
fn row_norms(conj: &QMat2, z: &HPoint) -> (QuadRat, QuadRat) {
    (
        row_abs2(conj.entry(0, 0), conj.entry(0, 1), z),
        row_abs2(conj.entry(1, 0), conj.entry(1, 1), z),
    )
}

/// F = 2(AC + BD) from the axis-frame entries. Galois-invariant, hence
/// exactly rational, for every frame and every integer matrix.
pub fn fq_value(n: &IMat2, frame: &ClassFrame) -> BigRat {
    let c = conj_entries(n, frame);
    let two = QuadRat::from_int(frame.d, 2);
    let v = &two * &(&(c.entry(0, 0) * c.entry(1, 0)) + &(c.entry(0, 1) * c.entry(1, 1)));
    v.expect_rational()
}

/// Exact squared entry radius of N at basepoint z':
/// r2 = |Az'+B|^2 |Cz'+D|^2 / (n Im z')^2 with n = det N.
pub fn radius2(n: &IMat2, frame: &ClassFrame, z: &HPoint) -> QuadRat {
    let c = conj_entries(n, frame);
    let (p2, q2) = row_norms(&c, z);
    let n_det = QuadRat::from_rat(frame.d, BigRat::from(n.det().clone()));
    let den = &(&n_det * &n_det) * &(z.y() * z.y());
    &(&p2 * &q2) / &den
}

/// Left-multiply by powers of M until the norm ratio v = P2/Q2 lies in
/// [1, eps^4), decided exactly. Returns the canonical representative and the
/// power of M applied. Idempotent; r2 and F are unchanged.
pub fn canonicalize(n: &IMat2, frame: &ClassFrame, z: &HPoint) -> (IMat2, i64) {
    let mut cur = n.clone();
    let mut shift: i64 = 0;
    loop {
        let c = conj_entries(&cur, frame);
        let (p2, q2) = row_norms(&c, z);
        if (&p2 - &q2).sign() < 0 {
            // v < 1: multiply by M (v scales by eps^4)
            cur = frame.automorph.mul(&cur);
            shift += 1;
        } else if (&p2 - &(&frame.eps4 * &q2)).sign() >= 0 {
            cur = frame.automorph_inv.mul(&cur);
            shift -= 1;
        } else {
            return (cur, shift);
        }
    }
}

/// Options for an enumeration run.
#[derive(Clone, Copy, Debug)]
pub struct EnumOptions {
    pub sign_mode: SignMode,
    /// Re-run with a doubled box and require an identical list.
    pub certify: bool,
}

impl Default for EnumOptions {
    fn default() -> Self {
        EnumOptions {
            sign_mode: SignMode::Psl2,
            certify: false,
        }
    }
}

/// Internal record of one accepted canonical representative.
struct Rec {
    quad: [i64; 4],
    r2: QuadRat,
    r2_f64: f64,
    f: BigRat,
}

/// Floating-point geometry of the conjugation, used for box sizing and
/// pruning only; every accepted point is settled exactly.
struct Geom {
    // coefficients of Az'+B and Cz'+D as linear forms in (alpha..delta)
    pa: Complex64,
    pb: Complex64,
    pg: Complex64,
    pd: Complex64,
    qg: Complex64,
    qd: Complex64,
    eps2: f64,
    eps4: f64,
    y: f64,
}

fn geometry(frame: &ClassFrame, z: &HPoint) -> Geom {
    let a_f = frame.form.a().to_f64().unwrap();
    let s = a_f / (frame.d as f64).sqrt();
    let th1 = frame.theta1.to_f64();
    let th2 = frame.theta2.to_f64();
    let ca = frame.form.c().to_f64().unwrap() / a_f;
    let zc = Complex64::new(z.x().to_f64(), z.y().to_f64());
    let eps = frame.eps.to_f64();
    Geom {
        pa: s * (th1 * zc + th2),
        pb: s * (zc + 1.0),
        pg: s * (-ca * zc - th2 * th2),
        pd: s * (-th2 * zc - th2),
        qg: s * (th1 * th1 * zc + ca),
        qd: s * (th1 * zc + th1),
        eps2: eps * eps,
        eps4: eps.powi(4),
        y: z.y().to_f64(),
    }
}

fn egcd(a: i64, b: i64) -> (i64, i64, i64) {
    if b == 0 {
        return (a.abs(), a.signum(), 0);
    }
    let (g, x, y) = egcd(b, a.rem_euclid(b));
    (g, y, x - a.div_euclid(b) * y)
}

/// Entry bounds for canonical representatives with r <= X, from the
/// entrywise norms of conjugation by T and the canonical-window bounds
/// |Az'+B|^2 <= eps^2 n y X, |Cz'+D|^2 <= n y X.
fn entry_bounds(frame: &ClassFrame, z: &HPoint, n_det: u64, x_f: f64) -> [i64; 4] {
    let s = (frame.form.a().to_f64().unwrap() / (frame.d as f64).sqrt()).abs();
    let th1 = frame.theta1.to_f64().abs();
    let th2 = frame.theta2.to_f64().abs();
    let y = z.y().to_f64();
    let xabs = z.x().to_f64().abs();
    let eps = frame.eps.to_f64();
    let b_norm = n_det as f64 * y * x_f; // P Q <= n y X
    let pmax = eps * b_norm.sqrt();
    let qmax = b_norm.sqrt();
    let ba = pmax / y;
    let bb = pmax * (y + xabs) / y;
    let bc = qmax / y;
    let bd = qmax * (y + xabs) / y;
    let w_alpha = s * (th1 * (ba + bb) + th2 * (bc + bd));
    let w_beta = s * (th1 * th2 * (ba + bd) + th1 * th1 * bb + th2 * th2 * bc);
    let w_gamma = s * (ba + bb + bc + bd);
    let w_delta = s * (th2 * (ba + bc) + th1 * (bb + bd));
    [w_alpha, w_beta, w_gamma, w_delta].map(|w| (w * (1.0 + 1e-6) + 2.0).ceil() as i64)
}

const REL: f64 = 1e-7;

/// Scan one second row (gamma, delta): solve the determinant line, prune by
/// the parabola bounds, and settle survivors exactly.
#[allow(clippy::too_many_arguments)]
fn scan_row(
    frame: &ClassFrame,
    z: &HPoint,
    g: &Geom,
    x2q: &QuadRat,
    b_norm: f64,
    n_det: u64,
    sign_mode: SignMode,
    gamma: i64,
    delta: i64,
    out: &mut Vec<Rec>,
) {
    if gamma == 0 && delta == 0 {
        return;
    }
    let (gcd, p, q) = egcd(delta, gamma);
    if n_det as i64 % gcd != 0 {
        return;
    }
    let scale = n_det as i64 / gcd;
    // particular solution of alpha delta - beta gamma = n
    let alpha0 = p * scale;
    let beta0 = -q * scale;
    debug_assert_eq!(alpha0 * delta - beta0 * gamma, n_det as i64);
    let (dir_a, dir_b) = (gamma / gcd, delta / gcd);

    let gf = gamma as f64;
    let df = delta as f64;
    let p0 = g.pa * alpha0 as f64 + g.pb * beta0 as f64 + g.pg * gf + g.pd * df;
    let q0 = g.qg * gf + g.qd * df - g.pa * alpha0 as f64 - g.pb * beta0 as f64;
    let dl = g.pa * dir_a as f64 + g.pb * dir_b as f64; // P(t)=p0+t dl, Q(t)=q0-t dl
    let u = dl.norm_sqr();
    debug_assert!(u > 0.0, "degenerate line direction");

    let b2 = b_norm * b_norm;
    let cap_q = b_norm * (1.0 + REL) + 1e-9;
    let cap_p = g.eps2 * b_norm * (1.0 + REL) + 1e-9;
    let (q_c0, q_c1) = (q0.norm_sqr(), -2.0 * (q0.conj() * dl).re);
    let (p_c0, p_c1) = (p0.norm_sqr(), 2.0 * (p0.conj() * dl).re);
    let interval = |c0: f64, c1: f64, cap: f64| -> Option<(f64, f64)> {
        // u t^2 + c1 t + c0 <= cap
        let disc = c1 * c1 - 4.0 * u * (c0 - cap);
        if disc < 0.0 {
            return None;
        }
        let root = disc.sqrt();
        Some(((-c1 - root) / (2.0 * u), (-c1 + root) / (2.0 * u)))
    };
    let Some((qlo, qhi)) = interval(q_c0, q_c1, cap_q) else {
        return;
    };
    let Some((plo, phi)) = interval(p_c0, p_c1, cap_p) else {
        return;
    };
    let lo = (qlo.max(plo) - 2.0).floor() as i64;
    let hi = (qhi.min(phi) + 2.0).ceil() as i64;

    for t in lo..=hi {
        let tf = t as f64;
        let p2 = u * tf * tf + p_c1 * tf + p_c0;
        let q2 = u * tf * tf + q_c1 * tf + q_c0;
        // cheap necessary tests with slack; exact arithmetic decides below
        if q2 > cap_q
            || p2 < q2 * (1.0 - REL) - 1e-9
            || p2 > g.eps4 * q2 * (1.0 + REL) + 1e-9
            || p2 * q2 > b2 * (1.0 + 2.0 * REL) + 1e-9
        {
            continue;
        }
        let alpha = alpha0 + t * dir_a;
        let beta = beta0 + t * dir_b;
        if sign_mode == SignMode::Psl2 {
            // keep the sign-canonical copy only
            let first = [alpha, beta, gamma, delta].into_iter().find(|v| *v != 0);
            if first.unwrap() < 0 {
                continue;
            }
        }
        let nmat = IMat2::from_i64(alpha, beta, gamma, delta);
        debug_assert_eq!(nmat.det(), &BigInt::from(n_det));
        let conj = conj_entries(&nmat, frame);
        let (p2e, q2e) = row_norms(&conj, z);
        if (&p2e - &q2e).sign() < 0 {
            continue; // v < 1
        }
        if (&p2e - &(&frame.eps4 * &q2e)).sign() >= 0 {
            continue; // v >= eps^4
        }
        let nq = QuadRat::from_int(frame.d, n_det as i64);
        let den = &(&nq * &nq) * &(z.y() * z.y());
        let r2 = &(&p2e * &q2e) / &den;
        if (&r2 - x2q).sign() > 0 {
            continue;
        }
        let two = QuadRat::from_int(frame.d, 2);
        let f = (&two
            * &(&(conj.entry(0, 0) * conj.entry(1, 0))
                + &(conj.entry(0, 1) * conj.entry(1, 1))))
            .expect_rational();
        out.push(Rec {
            quad: [alpha, beta, gamma, delta],
            r2_f64: r2.to_f64(),
            r2,
            f,
        });
    }
}

fn enumerate_recs(
    frame: &ClassFrame,
    z: &HPoint,
    x2: &BigRat,
    n_det: u64,
    opts: &EnumOptions,
    box_scale: i64,
) -> Vec<Rec> {
    assert!(n_det >= 1);
    assert_eq!(z.d(), frame.d, "basepoint must live in the frame's field");
    if x2 < &BigRat::one() {
        return Vec::new();
    }
    let x2q = QuadRat::from_rat(frame.d, x2.clone());
    let g = geometry(frame, z);
    let x_f = crate::exactnum::big_rat_to_f64(x2).sqrt();
    let b_norm = n_det as f64 * g.y * x_f;
    let w = entry_bounds(frame, z, n_det, x_f);
    let (wg, wd) = (w[2] * box_scale, w[3] * box_scale);

    let mut recs: Vec<Rec> = (-wg..=wg)
        .into_par_iter()
        .map(|gamma| {
            let mut local = Vec::new();
            for delta in -wd..=wd {
                scan_row(
                    frame,
                    z,
                    &g,
                    &x2q,
                    b_norm,
                    n_det,
                    opts.sign_mode,
                    gamma,
                    delta,
                    &mut local,
                );
            }
            local
        })
        .reduce(Vec::new, |mut a, mut b| {
            a.append(&mut b);
            a
        });

    // exact ascending order: floating sort first, then exact ordering inside
    // float-tied runs (the float key is monotone well beyond the run width)
    recs.sort_unstable_by(|a, b| {
        a.r2_f64
            .total_cmp(&b.r2_f64)
            .then_with(|| a.quad.cmp(&b.quad))
    });
    let mut i = 0;
    while i < recs.len() {
        let mut j = i + 1;
        let anchor = recs[i].r2_f64;
        while j < recs.len() && recs[j].r2_f64 <= anchor * (1.0 + 1e-9) + 1e-12 {
            j += 1;
        }
        if j - i > 1 {
            recs[i..j].sort_by(|a, b| a.r2.cmp(&b.r2).then_with(|| a.quad.cmp(&b.quad)));
        }
        i = j;
    }
    recs
}

fn recs_to_list(
    recs: Vec<Rec>,
    frame: &ClassFrame,
    z: &HPoint,
    x2: &BigRat,
    n_det: u64,
    opts: &EnumOptions,
) -> RadiusList {
    let mut entries: Vec<RadiusEntry> = Vec::new();
    for rec in recs {
        match entries.last_mut() {
            Some(last) if last.r2 == rec.r2 => last.mult += 1,
            _ => entries.push(RadiusEntry {
                r2_f64: rec.r2_f64,
                r: rec.r2_f64.max(0.0).sqrt(),
                r2: rec.r2,
                mult: 1,
            }),
        }
    }
    debug_assert!(entries.windows(2).all(|w| w[0].r2 < w[1].r2));
    RadiusList {
        entries,
        x2_max: x2.clone(),
        det_n: n_det,
        sign_mode: opts.sign_mode,
        basepoint: z.clone(),
        d: frame.d,
        certified: false,
    }
}

/// Enumerate all canonical representatives with r2 <= x2 (x2 rational, so
/// irrational thresholds like X = sqrt(X_F^2/4 + 1) stay exact). Each coset
/// appears exactly once; in PSL2 mode N and -N are identified.
pub fn enumerate_orbit(
    frame: &ClassFrame,
    z: &HPoint,
    x2: &BigRat,
    n_det: u64,
    opts: &EnumOptions,
) -> Result<RadiusList, CountError> {
    let recs = enumerate_recs(frame, z, x2, n_det, opts, 1);
    let mut list = recs_to_list(recs, frame, z, x2, n_det, opts);
    if opts.certify {
        let recs2 = enumerate_recs(frame, z, x2, n_det, opts, 2);
        let list2 = recs_to_list(recs2, frame, z, x2, n_det, opts);
        let same = list.entries.len() == list2.entries.len()
            && list
                .entries
                .iter()
                .zip(&list2.entries)
                .all(|(a, b)| a.r2 == b.r2 && a.mult == b.mult);
        if !same {
            return Err(CountError::CertificationFailed);
        }
        list.certified = true;
    }
    Ok(list)
}

/// Enumerate with full orbit-point data (for caches and audits).
pub fn enumerate_points(
    frame: &ClassFrame,
    z: &HPoint,
    x2: &BigRat,
    n_det: u64,
    opts: &EnumOptions,
) -> Result<Vec<OrbitPoint>, CountError> {
    let recs = enumerate_recs(frame, z, x2, n_det, opts, 1);
    Ok(recs
        .into_iter()
        .map(|rec| {
            let rep = IMat2::from_i64(rec.quad[0], rec.quad[1], rec.quad[2], rec.quad[3]);
            let conj = conj_entries(&rep, frame);
            OrbitPoint {
                rep,
                conj,
                f: rec.f,
                r2: rec.r2,
                m_shift: 0,
            }
        })
        .collect())
}

/// N(H, X; z): number of cosets with entry radius at most X, X^2 = x2.
pub fn count(
    frame: &ClassFrame,
    z: &HPoint,
    x2: &BigRat,
    n_det: u64,
    opts: &EnumOptions,
) -> Result<u64, CountError> {
    Ok(enumerate_orbit(frame, z, x2, n_det, opts)?.total())
}

/// Squared radius horizon equivalent to |F| <= x at z' = i and det n:
/// r2 <= (x^2/4 + n^2) / n^2.
pub fn fq_threshold_x2(x: &BigRat, n_det: u64) -> BigRat {
    let n2 = BigRat::from(BigInt::from(n_det)) * BigRat::from(BigInt::from(n_det));
    (x * x / BigRat::from(BigInt::from(4)) + &n2) / &n2
}

/// P(X) and P_{Q,n}(X): canonical classes of determinant n with |F| <= x.
pub fn count_fq(
    frame: &ClassFrame,
    x: &BigRat,
    n_det: u64,
    opts: &EnumOptions,
) -> Result<u64, CountError> {
    let z = HPoint::i(frame.d);
    count(frame, &z, &fq_threshold_x2(x, n_det), n_det, opts)
}

/// Weighted orbit sum A(f)(z) for a trapezoid window: the weight of a point
/// is f(r2) with x = sqrt(r2 - 1), using (cosh rho - 1)/(cosh mu - 1) = r2.
pub fn weighted_count(list: &RadiusList, window: &HuberWindow) -> Result<f64, CountError> {
    let end = window.support_end();
    let need = (end * end + 1.0) * (1.0 + 1e-12);
    let horizon = crate::exactnum::big_rat_to_f64(&list.x2_max);
    if need > horizon {
        return Err(CountError::HorizonExceeded {
            requested: need.sqrt(),
            horizon: horizon.sqrt(),
        });
    }
    let mut acc = 0.0;
    for e in &list.entries {
        let x = (e.r2_f64 - 1.0).max(0.0).sqrt();
        if x > end {
            break;
        }
        acc += window.weight(x) * e.mult as f64;
    }
    Ok(acc)
}

/// Main term M(H, X; z) = sum A(s_j) coeff_j X^{s_j} over (1/2, 1].
pub fn main_term(data: &[SpectralDatum], x: f64) -> Result<f64, CountError> {
    let mut acc = 0.0;
    for datum in data {
        if !(datum.s > 0.5 && datum.s <= 1.0) {
            return Err(CountError::BadSpectralDatum(datum.s));
        }
        let a = coeff_a(Complex64::new(datum.s, 0.0));
        debug_assert!(a.im.abs() < 1e-10 * (1.0 + a.re.abs()));
        acc += a.re * datum.coeff * x.powf(datum.s);
    }
    Ok(acc)
}

/// The spectral data of the modular group: only the base eigenvalue
/// contributes, with coefficient u0hat u0(z) = (3/pi)(mu/nu); the surface
/// has no eigenvalues in (0, 1/4).
pub fn sl2z_spectral_datum(frame: &ClassFrame) -> Vec<SpectralDatum> {
    vec![SpectralDatum {
        s: 1.0,
        coeff: 3.0 / std::f64::consts::PI * frame.mu,
    }]
}

/// E(H, X; z) = N(H, X; z) - M(H, X; z) at radius x.
pub fn error_term(list: &RadiusList, data: &[SpectralDatum], x: f64) -> Result<f64, CountError> {
    Ok(list.count_at(x)? as f64 - main_term(data, x)?)
}

/// Change of variable X = sinh(t/2) / sinh(mu/2).
pub fn t_to_x(t: f64, mu: f64) -> f64 {
    (t / 2.0).sinh() / (mu / 2.0).sinh()
}

pub fn x_to_t(x: f64, mu: f64) -> f64 {
    2.0 * (x * (mu / 2.0).sinh()).asinh()
}

/// Result of the breadth-first oracle.
#[derive(Clone, Copy, Debug)]
pub struct OracleCount {
    pub count: u64,
    pub stabilized: bool,
    pub depth_reached: u32,
    pub ball_size: u64,
}

/// Independent count by breadth-first enumeration of the modular group by
/// the generators (1,1;0,1) and (0,-1;1,0) up to the given word length,
/// canonicalizing and deduplicating every element. Trust requires the
/// `stabilized` flag: the count must have been constant over the last two
/// depth increments.
pub fn oracle_bfs_count(
    frame: &ClassFrame,
    z: &HPoint,
    x2: &BigRat,
    depth: u32,
    sign_mode: SignMode,
) -> OracleCount {
    let x2q = QuadRat::from_rat(frame.d, x2.clone());
    let gens = [
        IMat2::from_i64(1, 1, 0, 1),
        IMat2::from_i64(1, -1, 0, 1),
        IMat2::from_i64(0, -1, 1, 0),
    ];
    let key = |m: &IMat2| -> [i64; 4] {
        let mut k = [0i64; 4];
        for (i, v) in m.entries().iter().enumerate() {
            k[i] = v.to_i64().expect("oracle entries exceed i64");
        }
        k
    };
    let norm_sign = |m: IMat2| -> IMat2 {
        if sign_mode == SignMode::Psl2 && !m.sign_canonical() {
            m.neg()
        } else {
            m
        }
    };

    let mut visited: HashSet<[i64; 4]> = HashSet::new();
    let mut canon: HashMap<[i64; 4], bool> = HashMap::new(); // inside radius?
    let mut frontier = VecDeque::new();
    let start = norm_sign(IMat2::identity());
    let consider = |m: &IMat2, canon_set: &mut HashMap<[i64; 4], bool>| {
        let (can, _) = canonicalize(m, frame, z);
        let can = norm_sign(can);
        canon_set.entry(key(&can)).or_insert_with(|| {
            let r2 = radius2(&can, frame, z);
            (&r2 - &x2q).sign() <= 0
        });
    };
    visited.insert(key(&start));
    consider(&start, &mut canon);
    frontier.push_back(start);

    let mut history: Vec<u64> = Vec::new();
    let mut depth_reached = 0;
    for d in 1..=depth {
        let mut next = VecDeque::new();
        while let Some(m) = frontier.pop_front() {
            for g in &gens {
                let prod = norm_sign(m.mul(g));
                let k = key(&prod);
                if visited.insert(k) {
                    consider(&prod, &mut canon);
                    next.push_back(prod);
                }
            }
        }
        frontier = next;
        depth_reached = d;
        let count = canon.values().filter(|v| **v).count() as u64;
        history.push(count);
        let n = history.len();
        if n >= 3 && history[n - 1] == history[n - 2] && history[n - 2] == history[n - 3] {
            return OracleCount {
                count,
                stabilized: true,
                depth_reached,
                ball_size: visited.len() as u64,
            };
        }
        if visited.len() > 6_000_000 {
            break;
        }
    }
    OracleCount {
        count: *history.last().unwrap_or(&0),
        stabilized: false,
        depth_reached,
        ball_size: visited.len() as u64,
    }
}


#[cfg(test)]
mod scratch_perf {
    use super::*;
    use crate::forms::{build_frame, QForm};

    #[test]
    #[ignore]
    fn timing() {
        let f = build_frame(&QForm::from_i64(1, 0, -3).unwrap(), 1).unwrap();
        let z = HPoint::i(f.d);
        let t0 = std::time::Instant::now();
        let x = BigRat::from(BigInt::from(10_000));
        let c = count_fq(&f, &x, 1, &EnumOptions::default()).unwrap();
        println!("count_fq(1e4) = {c} ratio {} in {:?}", c as f64 / 1e4, t0.elapsed());
        let t0 = std::time::Instant::now();
        let x2 = BigRat::from(BigInt::from(10_000i64 * 10_000));
        let list = enumerate_orbit(&f, &z, &x2, 1, &EnumOptions::default()).unwrap();
        println!("enumerate to 1e4: {} pts in {:?}", list.total(), t0.elapsed());
        let t0 = std::time::Instant::now();
        let x2 = BigRat::from(BigInt::from(100_000i64)) * BigRat::from(BigInt::from(100_000i64));
        let list = enumerate_orbit(&f, &z, &x2, 1, &EnumOptions::default()).unwrap();
        println!("enumerate to 1e5: {} pts in {:?}", list.total(), t0.elapsed());
    }
}
