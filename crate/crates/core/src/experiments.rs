//! Experiment drivers: error-exponent fits over dyadic windows, exact
//! mean-square integrals of the error term, Hecke tables over determinant n,
//! and the sandwich / sign-convention audits.
//!
//! Everything here is a pure function of its inputs; grids are processed in
//! sorted order so repeated runs are byte-identical for any thread count.

use crate::counting::{
    count_fq, enumerate_orbit, fq_threshold_x2, main_term, weighted_count, CountError,
    EnumOptions, RadiusList, SignMode, SpectralDatum,
};
use crate::exactnum::BigRat;
use crate::forms::ClassFrame;
use crate::huber::HuberWindow;
use num_traits::{FromPrimitive, Zero};
use std::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum ExperimentError {
    /// A dyadic window contained no jump points.
    EmptyWindow { anchor: f64 },
    /// Window parameters violate the trapezoid constraints.
    BadWindow(String),
    Count(CountError),
}

impl fmt::Display for ExperimentError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExperimentError::EmptyWindow { anchor } => {
                write!(f, "window [{anchor}, {}] contains no jumps", 2.0 * anchor)
            }
            ExperimentError::BadWindow(s) => write!(f, "{s}"),
            ExperimentError::Count(e) => write!(f, "{e}"),
        }
    }
}

impl std::error::Error for ExperimentError {}

impl From<CountError> for ExperimentError {
    fn from(e: CountError) -> Self {
        ExperimentError::Count(e)
    }
}

impl From<crate::huber::HuberError> for ExperimentError {
    fn from(e: crate::huber::HuberError) -> Self {
        ExperimentError::BadWindow(e.to_string())
    }
}

/// Sup of |E| over one dyadic window.
#[derive(Debug, Clone)]
pub struct WindowSup {
    pub anchor: f64,
    pub sup_error: f64,
    pub jumps: u64,
}

/// Least-squares fit of log sup|E| against log X over dyadic windows.
#[derive(Debug, Clone)]
pub struct FitReport {
    pub windows: Vec<WindowSup>,
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
}

fn cumulative(list: &RadiusList) -> Vec<u64> {
    let mut acc = 0u64;
    list.entries
        .iter()
        .map(|e| {
            acc += e.mult as u64;
            acc
        })
        .collect()
}

/// Sup of |E| over [anchor, 2 anchor], evaluated at both one-sided limits of
/// every jump plus the window edges (between jumps the main term is
/// monotone, so |E| peaks at these points).
fn window_sup(
    list: &RadiusList,
    cum: &[u64],
    data: &[SpectralDatum],
    anchor: f64,
) -> Result<WindowSup, ExperimentError> {
    let (lo, hi) = (anchor, 2.0 * anchor);
    let lo_idx = list.entries.partition_point(|e| e.r < lo);
    let hi_idx = list.entries.partition_point(|e| e.r <= hi);
    let count_before = |idx: usize| if idx == 0 { 0 } else { cum[idx - 1] };
    let mut sup = 0.0f64;
    let m_lo = main_term(data, lo)?;
    sup = sup.max((count_before(lo_idx) as f64 - m_lo).abs());
    let m_hi = main_term(data, hi)?;
    sup = sup.max((count_before(hi_idx) as f64 - m_hi).abs());
    for idx in lo_idx..hi_idx {
        let m = main_term(data, list.entries[idx].r)?;
        let before = count_before(idx) as f64;
        let after = cum[idx] as f64;
        sup = sup.max((before - m).abs()).max((after - m).abs());
    }
    let jumps = (hi_idx - lo_idx) as u64;
    if jumps == 0 {
        return Err(ExperimentError::EmptyWindow { anchor });
    }
    Ok(WindowSup {
        anchor,
        sup_error: sup,
        jumps,
    })
}

/// Per dyadic window [X, 2X] over the anchors, the sup of |E| at the jump
/// points (both one-sided limits), then the least-squares slope of
/// log sup|E| against log of the window's geometric center.
pub fn exponent_fit(
    list: &RadiusList,
    data: &[SpectralDatum],
    anchors: &[f64],
) -> Result<FitReport, ExperimentError> {
    let horizon = list.horizon_f64();
    let cum = cumulative(list);
    let mut windows = Vec::with_capacity(anchors.len());
    for &anchor in anchors {
        if 2.0 * anchor > horizon * (1.0 + 1e-9) {
            return Err(CountError::HorizonExceeded {
                requested: 2.0 * anchor,
                horizon,
            }
            .into());
        }
        windows.push(window_sup(list, &cum, data, anchor)?);
    }
    let pts: Vec<(f64, f64)> = windows
        .iter()
        .map(|w| {
            (
                (w.anchor * std::f64::consts::SQRT_2).ln(),
                w.sup_error.max(1e-300).ln(),
            )
        })
        .collect();
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    let residuals = pts
        .iter()
        .map(|p| p.1 - (slope * p.0 + intercept))
        .collect();
    Ok(FitReport {
        windows,
        slope,
        intercept,
        residuals,
    })
}

/// Mean square of the error over [X, 2X].
#[derive(Debug, Clone)]
pub struct MeanSquareReport {
    pub x: f64,
    /// (1/X) int_X^{2X} |E|^2 du, closed form per step interval.
    pub integral: f64,
    /// integral / (X ln^2 X).
    pub ratio: f64,
    pub jumps: u64,
}

/// Integrate |E|^2 over [x, 2x]: E is N(u) - sum A(s) c u^s, piecewise
/// smooth between consecutive jumps. With only s = 1 data (or none) each
/// piece is a quadratic polynomial integrated in closed form; otherwise
/// per-interval adaptive quadrature refined to 1e-10.
pub fn mean_square(
    list: &RadiusList,
    data: &[SpectralDatum],
    x: f64,
) -> Result<MeanSquareReport, ExperimentError> {
    let (lo, hi) = (x, 2.0 * x);
    if hi > list.horizon_f64() * (1.0 + 1e-9) {
        return Err(CountError::HorizonExceeded {
            requested: hi,
            horizon: list.horizon_f64(),
        }
        .into());
    }
    for d in data {
        if !(d.s > 0.5 && d.s <= 1.0) {
            return Err(CountError::BadSpectralDatum(d.s).into());
        }
    }
    let linear_only = data.iter().all(|d| d.s == 1.0);
    let coeff_lin: f64 = data
        .iter()
        .map(|d| crate::huber::coeff_a(num_complex::Complex64::new(d.s, 0.0)).re * d.coeff)
        .sum();

    let cum = cumulative(list);
    let lo_idx = list.entries.partition_point(|e| e.r < lo);
    let hi_idx = list.entries.partition_point(|e| e.r <= hi);
    let count_before = |idx: usize| if idx == 0 { 0 } else { cum[idx - 1] };

    // closed form of int (k - c u)^2 du on [a, b]
    let piece_linear = |k: f64, a: f64, b: f64| -> f64 {
        let c = coeff_lin;
        k * k * (b - a) - k * c * (b * b - a * a) + c * c * (b * b * b - a * a * a) / 3.0
    };
    let e2_at = |k: f64, u: f64| -> f64 {
        let m: f64 = data
            .iter()
            .map(|d| {
                crate::huber::coeff_a(num_complex::Complex64::new(d.s, 0.0)).re
                    * d.coeff
                    * u.powf(d.s)
            })
            .sum();
        let e = k - m;
        e * e
    };
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let whole = (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
        let l = (m - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + m)) + f(m));
        let r = (b - m) / 6.0 * (f(m) + 4.0 * f(0.5 * (m + b)) + f(b));
        if depth == 0 || (l + r - whole).abs() < 15.0 * tol {
            l + r + (l + r - whole) / 15.0
        } else {
            simpson(f, a, m, tol / 2.0, depth - 1) + simpson(f, m, b, tol / 2.0, depth - 1)
        }
    }

    let mut total = 0.0f64;
    let mut left = lo;
    let mut idx = lo_idx;
    loop {
        let right = if idx < hi_idx {
            list.entries[idx].r.min(hi)
        } else {
            hi
        };
        if right > left {
            let k = count_before(idx) as f64;
            total += if linear_only {
                piece_linear(k, left, right)
            } else {
                simpson(&|u| e2_at(k, u), left, right, 1e-10, 28)
            };
        }
        if idx >= hi_idx {
            break;
        }
        left = right;
        idx += 1;
    }
    let integral = total / x;
    Ok(MeanSquareReport {
        x,
        integral,
        ratio: integral / (x * x.ln() * x.ln()),
        jumps: (hi_idx - lo_idx) as u64,
    })
}

/// sigma(n) = sum of divisors, by trial division.
pub fn sigma(n: u64) -> u64 {
    (1..=n).filter(|d| n % d == 0).sum()
}

/// One row of the Hecke table.
#[derive(Debug, Clone)]
pub struct HeckeRow {
    pub n: u64,
    pub count: u64,
    /// count / ((sigma(n)/n) X), to be compared with 6 log eps_d / pi.
    pub normalized_ratio: f64,
    pub error: f64,
    /// error * n^{2/3} / (sigma(n) X^{2/3}).
    pub scaled_error: f64,
}

/// P_{Q,n}(X) for each n, with the divisor-sum normalizations. The n = 1 row
/// is the plain P(X) run.
pub fn hecke_table(
    frame: &ClassFrame,
    ns: &[u64],
    x: &BigRat,
    opts: &EnumOptions,
) -> Result<Vec<HeckeRow>, ExperimentError> {
    let x_f = crate::exactnum::big_rat_to_f64(x);
    let constant = 6.0 * crate::exactnum::quadrat_ln(&frame.eps) / std::f64::consts::PI;
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let count = count_fq(frame, x, n, opts)?;
        let weight = sigma(n) as f64 / n as f64;
        let normalized_ratio = count as f64 / (weight * x_f);
        let error = count as f64 - constant * weight * x_f;
        let scaled_error =
            error * (n as f64).powf(2.0 / 3.0) / (sigma(n) as f64 * x_f.powf(2.0 / 3.0));
        rows.push(HeckeRow {
            n,
            count,
            normalized_ratio,
            error,
            scaled_error,
        });
    }
    Ok(rows)
}

/// Outcome of one sandwich check A(f-) <= N <= A(f+).
#[derive(Debug, Clone)]
pub struct SandwichReport {
    pub x: f64,
    pub y: f64,
    pub lower: f64,
    pub count: u64,
    pub upper: f64,
    pub gap: f64,
    pub holds: bool,
}

/// Evaluate both weighted counts at U = sqrt(X^2-1), V = U + Y, T = U - Y
/// and compare with the sharp count at X.
pub fn sandwich_audit(
    list: &RadiusList,
    x: f64,
    y: f64,
) -> Result<SandwichReport, ExperimentError> {
    let u = (x * x - 1.0).sqrt();
    if !(y > 0.0 && y < u / 2.0) {
        return Err(ExperimentError::BadWindow(format!(
            "need 0 < Y < U/2, got Y={y}, U={u}"
        )));
    }
    let plus = HuberWindow::plus(u, u + y)?;
    let minus = HuberWindow::minus(u - y, u)?;
    let upper = weighted_count(list, &plus)?;
    let lower = weighted_count(list, &minus)?;
    let count = list.count_at(x)?;
    let holds = lower <= count as f64 + 1e-9 && count as f64 <= upper + 1e-9;
    Ok(SandwichReport {
        x,
        y,
        lower,
        count,
        upper,
        gap: upper - lower,
        holds,
    })
}

/// Result of the sign-convention audit.
#[derive(Debug, Clone)]
pub struct ConventionAudit {
    pub psl2_count: u64,
    pub sl2_count: u64,
    /// sl2 / psl2, exactly 2 whenever no coset is fixed by the sign flip.
    pub factor: f64,
    /// psl2 count normalized by (6 log eps_d / pi) X.
    pub psl2_ratio: f64,
    /// Which convention reproduces the divisor asymptotics' constant.
    pub matching_mode: SignMode,
}

/// Run the |F| <= X count in both sign conventions and report which one
/// matches the stated main-term constant (the other is exactly double).
pub fn convention_audit(
    frame: &ClassFrame,
    x: &BigRat,
) -> Result<ConventionAudit, ExperimentError> {
    let psl2 = count_fq(
        frame,
        x,
        1,
        &EnumOptions {
            sign_mode: SignMode::Psl2,
            certify: false,
        },
    )?;
    let sl2 = count_fq(
        frame,
        x,
        1,
        &EnumOptions {
            sign_mode: SignMode::Sl2,
            certify: false,
        },
    )?;
    let x_f = crate::exactnum::big_rat_to_f64(x);
    let constant = 6.0 * crate::exactnum::quadrat_ln(&frame.eps) / std::f64::consts::PI;
    let psl2_ratio = psl2 as f64 / (constant * x_f);
    let sl2_ratio = sl2 as f64 / (constant * x_f);
    let matching_mode = if (psl2_ratio - 1.0).abs() <= (sl2_ratio - 1.0).abs() {
        SignMode::Psl2
    } else {
        SignMode::Sl2
    };
    Ok(ConventionAudit {
        psl2_count: psl2,
        sl2_count: sl2,
        factor: sl2 as f64 / psl2 as f64,
        psl2_ratio,
        matching_mode,
    })
}

/// Exact rational horizon needed by an |F| <= x run (helper for callers
/// building shared radius lists).
pub fn fq_horizon(x: &BigRat, n_det: u64) -> BigRat {
    fq_threshold_x2(x, n_det)
}

/// Log-spaced anchors for dyadic windows covering [lo, hi]: the last window
/// [anchor, 2 anchor] ends at hi.
pub fn log_anchors(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2 && hi > 2.0 * lo);
    let top = hi / 2.0;
    let step = (top / lo).powf(1.0 / (count - 1) as f64);
    (0..count).map(|k| lo * step.powi(k as i32)).collect()
}

/// Enumerate a frame at basepoint i up to the given radius horizon.
pub fn radius_list_to(
    frame: &ClassFrame,
    horizon: f64,
    n_det: u64,
    opts: &EnumOptions,
) -> Result<RadiusList, ExperimentError> {
    let h = BigRat::from_f64(horizon).unwrap_or_else(BigRat::zero);
    let x2 = &h * &h;
    let z = crate::exactnum::HPoint::i(frame.d);
    Ok(enumerate_orbit(frame, &z, &x2, n_det, opts)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::sl2z_spectral_datum;
    use crate::forms::{build_frame, QForm};
    use num_bigint::BigInt;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn frame() -> ClassFrame {
        build_frame(&QForm::from_i64(1, 0, -3).unwrap(), 1).unwrap()
    }

    #[test]
    fn sigma_values() {
        assert_eq!(sigma(1), 1);
        assert_eq!(sigma(2), 3);
        assert_eq!(sigma(3), 4);
        assert_eq!(sigma(4), 7);
        assert_eq!(sigma(6), 12);
        assert_eq!(sigma(12), 28);
    }

    #[test]
    fn log_anchor_layout() {
        let a = log_anchors(100.0, 1000.0, 5);
        assert_eq!(a.len(), 5);
        assert!((a[0] - 100.0).abs() < 1e-9);
        assert!((a[4] - 500.0).abs() < 1e-9);
        assert!(a.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn exponent_fit_reports_slope() {
        let f = frame();
        let list = radius_list_to(&f, 800.0, 1, &EnumOptions::default()).unwrap();
        let data = sl2z_spectral_datum(&f);
        let anchors = log_anchors(50.0, 800.0, 5);
        let fit = exponent_fit(&list, &data, &anchors).unwrap();
        assert_eq!(fit.windows.len(), 5);
        assert!(fit.windows.iter().all(|w| w.jumps > 0));
        assert!(fit.slope.is_finite());
        // desk-scale sanity: the sup error grows but sublinearly
        assert!(fit.slope > 0.0 && fit.slope < 1.0, "slope {}", fit.slope);
        assert_eq!(fit.residuals.len(), 5);
        // deterministic re-run
        let fit2 = exponent_fit(&list, &data, &anchors).unwrap();
        assert_eq!(fit.slope.to_bits(), fit2.slope.to_bits());
    }

    #[test]
    fn exponent_fit_flags_empty_window() {
        let f = frame();
        let list = radius_list_to(&f, 40.0, 1, &EnumOptions::default()).unwrap();
        let err = exponent_fit(&list, &[], &[0.1]).unwrap_err();
        assert!(matches!(err, ExperimentError::EmptyWindow { .. }));
    }

    #[test]
    fn mean_square_step_function_only() {
        // with no spectral data the integral is that of N^2, exact per piece
        let f = frame();
        let list = radius_list_to(&f, 12.0, 1, &EnumOptions::default()).unwrap();
        let rep = mean_square(&list, &[], 5.0).unwrap();
        let mut riemann = 0.0;
        let m = 200_000;
        for i in 0..m {
            let u = 5.0 + 5.0 * (i as f64 + 0.5) / m as f64;
            let n = list.count_at(u).unwrap() as f64;
            riemann += n * n * 5.0 / m as f64;
        }
        riemann /= 5.0;
        assert!(
            (rep.integral - riemann).abs() / riemann < 1e-3,
            "{} vs {riemann}",
            rep.integral
        );
    }

    #[test]
    fn mean_square_closed_vs_riemann() {
        let f = frame();
        let list = radius_list_to(&f, 130.0, 1, &EnumOptions::default()).unwrap();
        let data = sl2z_spectral_datum(&f);
        let x = 60.0;
        let rep = mean_square(&list, &data, x).unwrap();
        let mut riemann = 0.0;
        let m = 1_000_000;
        for i in 0..m {
            let u = x + x * (i as f64 + 0.5) / m as f64;
            let e = list.count_at(u).unwrap() as f64 - main_term(&data, u).unwrap();
            riemann += e * e * x / m as f64;
        }
        riemann /= x;
        assert!(
            (rep.integral - riemann).abs() / riemann.max(1e-12) < 1e-3,
            "{} vs {riemann}",
            rep.integral
        );
        assert!(rep.integral >= 0.0);
    }

    #[test]
    fn mean_square_general_spectrum_path() {
        // synthetic datum with s < 1 exercises the quadrature path
        let f = frame();
        let list = radius_list_to(&f, 25.0, 1, &EnumOptions::default()).unwrap();
        let data = [SpectralDatum { s: 0.8, coeff: 1.3 }];
        let x = 10.0;
        let rep = mean_square(&list, &data, x).unwrap();
        let mut riemann = 0.0;
        let m = 400_000;
        for i in 0..m {
            let u = x + x * (i as f64 + 0.5) / m as f64;
            let e = list.count_at(u).unwrap() as f64 - main_term(&data, u).unwrap();
            riemann += e * e * x / m as f64;
        }
        riemann /= x;
        assert!(
            (rep.integral - riemann).abs() / riemann < 1e-3,
            "{} vs {riemann}",
            rep.integral
        );
    }

    #[test]
    fn mean_square_requires_horizon() {
        let f = frame();
        let list = radius_list_to(&f, 12.0, 1, &EnumOptions::default()).unwrap();
        assert!(mean_square(&list, &[], 10.0).is_err());
    }

    #[test]
    fn hecke_small_table() {
        let f = frame();
        let x = BigRat::from(BigInt::from(600));
        let rows = hecke_table(&f, &[1, 2], &x, &EnumOptions::default()).unwrap();
        assert_eq!(rows.len(), 2);
        let constant = 6.0 * (2.0 + 3f64.sqrt()).ln() / std::f64::consts::PI;
        for row in &rows {
            assert!(
                (row.normalized_ratio / constant - 1.0).abs() < 0.1,
                "n={}: ratio {}",
                row.n,
                row.normalized_ratio
            );
        }
        // n = 1 row is the plain P(X) count
        let p = count_fq(&f, &x, 1, &EnumOptions::default()).unwrap();
        assert_eq!(rows[0].count, p);
    }

    #[test]
    fn sandwich_holds_and_collapses() {
        let f = frame();
        let list = radius_list_to(&f, 70.0, 1, &EnumOptions::default()).unwrap();
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..10 {
            let x: f64 = rng.gen_range(5.0..40.0);
            let y = x.powf(2.0 / 3.0);
            let rep = sandwich_audit(&list, x, y).unwrap();
            assert!(rep.holds, "X={x} Y={y}: {rep:?}");
            assert!(rep.gap >= 0.0);
        }
        // Y -> 0+ collapses both sides onto the count
        let rep = sandwich_audit(&list, 20.0, 1e-7).unwrap();
        assert!(rep.holds);
        assert!((rep.lower - rep.count as f64).abs() < 1e-3);
        assert!((rep.upper - rep.count as f64).abs() < 1e-3);
    }

    #[test]
    fn convention_audit_factor_two() {
        let f = frame();
        let x = BigRat::from(BigInt::from(400));
        let audit = convention_audit(&f, &x).unwrap();
        assert_eq!(audit.sl2_count, 2 * audit.psl2_count);
        assert!((audit.factor - 2.0).abs() < 1e-12);
        assert_eq!(audit.matching_mode, SignMode::Psl2);
        assert!((audit.psl2_ratio - 1.0).abs() < 0.05, "{}", audit.psl2_ratio);
    }
}
