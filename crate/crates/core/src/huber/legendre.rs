//! Associated Legendre functions P^mu_{s-1}(i x) on the imaginary axis, for
//! orders mu in {0, -1, -2} and complex degree, by three routes:
//!
//! - `direct`: the defining hypergeometric series in w = (1 - ix)/2
//!   (converges for |x| < sqrt(3); used for |x| <= 1.2),
//! - `far`: the exact two-term connection expansion in z^-2 (converges for
//!   |x| > 1; used beyond 1.2, and it *is* the large-x asymptotic series
//!   summed to convergence),
//! - `inv_w`: the 1/w connection formula of the defining series, kept as an
//!   independent validation branch for the far regime.
//!
//! Series are accumulated in double-double ([`super::dd`]) because the terms
//! transiently grow like exp(1.8 |Im s|) before cancelling.

use super::dd::{Cdd, Dd};
use super::gamma::{gamma, nonpositive_integer, recip_gamma};
use super::HuberError;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Largest |x| served by the direct series; beyond it the far expansion.
const X_SPLIT: f64 = 1.2;
/// Degenerate-degree guard: |s - 1/2| below this is evaluated at a shifted
/// degree, exploiting the exact symmetry P_{s-1} = P_{(1-s)-1}.
const S_HALF_EPS: f64 = 1e-5;

const MAX_TERMS: usize = 4000;

/// Gauss series sum_{n} (a)_n (b)_n / ((c)_n n!) w^n in double-double.
/// Returns None if 4000 terms do not reach convergence.
fn hyp2f1_dd(a: Complex64, b: Complex64, c: Complex64, w: Cdd) -> Option<Cdd> {
    // terminating cases short-circuit ratio poles (e.g. c = 0 with a = 0)
    let nmax = [a, b]
        .iter()
        .filter_map(|z| nonpositive_integer(*z).map(|n| (-n) as usize))
        .min()
        .unwrap_or(MAX_TERMS);
    let mut term = Cdd::ONE;
    let mut sum = Cdd::ONE;
    let mut tiny_streak = 0;
    for n in 0..nmax {
        let nf = n as f64;
        let num = Cdd {
            re: Dd::from(a.re).add(Dd::from(nf)),
            im: Dd::from(a.im),
        }
        .mul(Cdd {
            re: Dd::from(b.re).add(Dd::from(nf)),
            im: Dd::from(b.im),
        });
        let den = Cdd {
            re: Dd::from(c.re).add(Dd::from(nf)),
            im: Dd::from(c.im),
        }
        .mul(Cdd::from_f64(nf + 1.0, 0.0));
        term = term.mul(num).div(den).mul(w);
        sum = sum.add(term);
        if term.norm_f64() < 1e-26 * (1.0 + sum.norm_f64()) {
            tiny_streak += 1;
            if tiny_streak >= 2 {
                return Some(sum);
            }
        } else {
            tiny_streak = 0;
        }
    }
    if nmax < MAX_TERMS {
        Some(sum) // terminating polynomial
    } else {
        None
    }
}

fn order_check(order: i32) -> Result<(), HuberError> {
    if (-2..=0).contains(&order) {
        Ok(())
    } else {
        Err(HuberError::UnsupportedOrder(order))
    }
}

/// Prefactor ((z+1)/(z-1))^(mu/2) with principal powers, z = i x.
fn ratio_power(order: i32, x: f64) -> Complex64 {
    let z = Complex64::new(0.0, x);
    let ratio = (z + 1.0) / (z - 1.0);
    match order {
        0 => Complex64::new(1.0, 0.0),
        -2 => 1.0 / ratio,
        -1 => ratio.powf(-0.5),
        _ => unreachable!(),
    }
}

/// Defining series (G&R 8.702): P^mu_{s-1}(ix) =
/// ((z+1)/(z-1))^(mu/2) F(1-s, s; 1-mu; (1-z)/2) / Gamma(1-mu).
pub fn legendre_direct(order: i32, s: Complex64, x: f64) -> Result<Complex64, HuberError> {
    order_check(order)?;
    let w = Cdd {
        re: Dd::from(0.5),
        im: Dd::from(-x / 2.0),
    };
    let c = Complex64::new(1.0 - order as f64, 0.0);
    let f = hyp2f1_dd(1.0 - s, s, c, w).ok_or(HuberError::SeriesNonConvergent { x })?;
    let pref = ratio_power(order, x) * recip_gamma(c);
    Ok(pref * f.to_complex())
}

/// Exact expansion in z^-2 about infinity (the large-argument route, summed
/// to convergence). The power prefactors are written z^nu (1 - z^-2)^(mu/2)
/// so that every branch cut lies on (-inf, 1] and both half-axes are served
/// by the same analytic branch.
pub fn legendre_far(order: i32, s: Complex64, x: f64) -> Result<Complex64, HuberError> {
    order_check(order)?;
    assert!(x.abs() > 1.05, "far expansion needs |x| > 1 (got {x})");
    let s = regularize_degree(s);
    let nu = s - 1.0;
    let mu = order as f64;
    let z = Complex64::new(0.0, x);
    let zm2 = Cdd::from_f64(-1.0 / (x * x), 0.0);
    let one_m_zm2 = 1.0 + 1.0 / (x * x); // real positive on the axis
    let pow_half = one_m_zm2.powf(mu / 2.0);

    let f1 = hyp2f1_dd(
        (mu - nu) / 2.0,
        (mu - nu + 1.0) / 2.0,
        0.5 - nu,
        zm2,
    )
    .ok_or(HuberError::SeriesNonConvergent { x })?;
    let c1 = Complex64::new(2.0f64, 0.0).powc(nu) * gamma(nu + 0.5) * recip_gamma(nu - mu + 1.0)
        / PI.sqrt()
        * z.powc(nu)
        * pow_half;

    let f2 = hyp2f1_dd(
        (nu + mu) / 2.0 + 1.0,
        (nu + mu + 1.0) / 2.0,
        nu + 1.5,
        zm2,
    )
    .ok_or(HuberError::SeriesNonConvergent { x })?;
    let c2 = gamma(-nu - 0.5) * recip_gamma(-nu - mu)
        / (Complex64::new(2.0, 0.0).powc(nu + 1.0) * PI.sqrt())
        * z.powc(-nu - 1.0)
        * pow_half;

    Ok(c1 * f1.to_complex() + c2 * f2.to_complex())
}

/// Validation branch: the 1/w connection formula applied to the defining
/// series. Needs 1 - 2s away from the integers and converges usefully for
/// |x| >~ 3; the standing overlap tests run it on x in [30, 50].
pub fn legendre_inv_w(order: i32, s: Complex64, x: f64) -> Result<Complex64, HuberError> {
    order_check(order)?;
    let z = Complex64::new(0.0, x);
    let (a, b) = (1.0 - s, s);
    let c = Complex64::new(1.0 - order as f64, 0.0);
    let w = (1.0 - z) / 2.0;
    let inv_w = {
        let iw = 1.0 / w;
        Cdd::from_f64(iw.re, iw.im)
    };
    let term = |p: Complex64, q: Complex64| -> Result<Complex64, HuberError> {
        // Gamma(c) Gamma(q-p) / (Gamma(q) Gamma(c-p)) (-w)^-p F(p, p-c+1; p-q+1; 1/w)
        let f = hyp2f1_dd(p, p - c + 1.0, p - q + 1.0, inv_w)
            .ok_or(HuberError::SeriesNonConvergent { x })?;
        let coef = gamma(c) * gamma(q - p) * recip_gamma(q) * recip_gamma(c - p);
        Ok(coef * (-w).powc(-p) * f.to_complex())
    };
    let sum = term(a, b)? + term(b, a)?;
    Ok(ratio_power(order, x) * recip_gamma(c) * sum)
}

/// Shift degrees too close to the s = 1/2 degeneracy of the far expansion,
/// along the direction of s - 1/2 (the function is exactly even in s - 1/2,
/// so the error is O(eps^2)).
fn regularize_degree(s: Complex64) -> Complex64 {
    let delta = s - 0.5;
    if delta.norm() >= S_HALF_EPS {
        return s;
    }
    let dir = if delta.norm() < 1e-14 {
        Complex64::new(1.0, 0.0)
    } else {
        delta / delta.norm()
    };
    0.5 + dir * S_HALF_EPS
}

/// P^order_{s-1}(i x), dispatching on |x|; x may be negative, meaning the
/// argument -i|x| on the lower imaginary axis.
pub fn legendre_p(order: i32, s: Complex64, x: f64) -> Result<Complex64, HuberError> {
    if x.abs() <= X_SPLIT {
        legendre_direct(order, s, x)
    } else {
        legendre_far(order, s, x)
    }
}

/// P^order_{s-1}(ix) + P^order_{s-1}(-ix), the combination every production
/// consumer needs (it is real for real s and even in Im(s)).
pub fn legendre_pair_sum(order: i32, s: Complex64, x: f64) -> Result<Complex64, HuberError> {
    Ok(legendre_p(order, s, x)? + legendre_p(order, s, -x)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn order_zero_degree_zero_is_one() {
        // s = 1: P_0(ix) = 1 for all x
        for x in [0.0, 0.5, 1.0, 3.0, 80.0] {
            let v = legendre_p(0, c(1.0, 0.0), x).unwrap();
            assert!((v - 1.0).norm() < 1e-13, "x={x}: {v}");
        }
    }

    #[test]
    fn order_zero_degree_one_is_argument() {
        // s = 2: P_1(z) = z, so P_1(ix) = ix
        for x in [0.0, 0.7, 2.0, 10.0] {
            let v = legendre_p(0, c(2.0, 0.0), x).unwrap();
            assert!((v - c(0.0, x)).norm() < 1e-12 * (1.0 + x), "x={x}: {v}");
        }
    }

    #[test]
    fn order_minus_two_at_zero_closed_form() {
        // P^{-2}_{s-1}(0) = -sqrt(pi) / (4 Gamma(2 - s/2) Gamma((s+3)/2))
        for s in [c(0.75, 0.0), c(0.5, 2.0), c(1.0, 0.0), c(0.5, 11.0)] {
            let series = legendre_p(-2, s, 0.0).unwrap();
            let closed =
                -PI.sqrt() / 4.0 * recip_gamma(2.0 - s / 2.0) * recip_gamma((s + 3.0) / 2.0);
            assert!(
                (series - closed).norm() < 1e-10 * (1.0 + closed.norm()),
                "s={s}: {series} vs {closed}"
            );
        }
    }

    #[test]
    fn rejects_unsupported_order() {
        assert!(matches!(
            legendre_p(1, c(0.75, 0.0), 0.5),
            Err(HuberError::UnsupportedOrder(1))
        ));
        assert!(legendre_p(-3, c(0.75, 0.0), 0.5).is_err());
    }

    #[test]
    fn direct_and_far_agree_in_overlap() {
        // both routes converge on 1.05 < |x| < 1.7; this is the seam the
        // production dispatch crosses at 1.2
        for s in [c(0.75, 0.0), c(1.0, 0.0), c(0.5, 1.0), c(0.5, 7.0), c(0.5, 20.0)] {
            for x in [1.1, 1.25, 1.4, -1.3] {
                for order in [0, -1, -2] {
                    let a = legendre_direct(order, s, x).unwrap();
                    let b = legendre_far(order, s, x).unwrap();
                    let denom = a.norm().max(1e-12);
                    assert!(
                        (a - b).norm() / denom < 1e-9,
                        "order={order} s={s} x={x}: {a} vs {b} rel {}",
                        (a - b).norm() / denom
                    );
                }
            }
        }
    }

    #[test]
    fn far_and_inv_w_agree_on_30_to_50() {
        // the spec's standing overlap window between the hypergeometric
        // connection branch and the large-x expansion
        for s in [c(0.75, 0.0), c(0.6, 0.0), c(0.5, 0.5), c(0.5, 5.0), c(0.5, 20.0)] {
            for x in [30.0, 35.0, 42.0, 50.0] {
                for order in [0, -2] {
                    let a = legendre_inv_w(order, s, x).unwrap();
                    let b = legendre_far(order, s, x).unwrap();
                    let denom = b.norm().max(1e-300);
                    assert!(
                        (a - b).norm() / denom < 1e-9,
                        "order={order} s={s} x={x}: rel {}",
                        (a - b).norm() / denom
                    );
                }
            }
        }
    }

    #[test]
    fn symmetric_in_degree_reflection() {
        // P_{s-1} = P_{(1-s)-1} exactly
        for x in [0.4, 2.5] {
            for order in [0, -2] {
                let a = legendre_p(order, c(0.5, 3.0), x).unwrap();
                let b = legendre_p(order, c(0.5, -3.0), x).unwrap();
                assert!((a - b).norm() < 1e-12 * (1.0 + a.norm()));
            }
        }
    }

    #[test]
    fn near_half_degree_regularization_is_smooth() {
        // approach s = 1/2 from above: values must converge, and the
        // regularized point must sit on the limit
        let x = 7.0;
        let ref_val = legendre_far(0, c(0.5 + 1e-3, 0.0), x).unwrap();
        let near = legendre_far(0, c(0.5 + 1e-7, 0.0), x).unwrap();
        let at = legendre_far(0, c(0.5, 0.0), x).unwrap();
        assert!((near - ref_val).norm() < 1e-5 * ref_val.norm());
        assert!((at - near).norm() < 1e-7 * ref_val.norm());
    }
}
