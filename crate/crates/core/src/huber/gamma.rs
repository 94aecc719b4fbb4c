//! Complex log-gamma and gamma via the Lanczos approximation (g = 7, n = 9),
//! with a reciprocal-gamma helper that is exactly zero at the poles. Relative
//! accuracy is ~1e-13 across the arguments used here, which only ever enter
//! well-conditioned prefactors.

use num_complex::Complex64;
use std::f64::consts::PI;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Principal branch of log Gamma(z).
pub fn ln_gamma(z: Complex64) -> Complex64 {
    if z.re < 0.5 {
        // reflection: Gamma(z) Gamma(1-z) = pi / sin(pi z)
        let pi_c = Complex64::new(PI, 0.0);
        return (pi_c / (PI * z).sin()).ln() - ln_gamma(Complex64::new(1.0, 0.0) - z);
    }
    let zm1 = z - 1.0;
    let mut acc = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (zm1 + i as f64);
    }
    let t = zm1 + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (zm1 + 0.5) * t.ln() - t + acc.ln()
}

pub fn gamma(z: Complex64) -> Complex64 {
    if let Some(n) = nonpositive_integer(z) {
        // pole; caller should have used recip_gamma
        let _ = n;
        return Complex64::new(f64::INFINITY, 0.0);
    }
    ln_gamma(z).exp()
}

/// 1 / Gamma(z), zero at the poles z = 0, -1, -2, ...
pub fn recip_gamma(z: Complex64) -> Complex64 {
    if nonpositive_integer(z).is_some() {
        return Complex64::new(0.0, 0.0);
    }
    (-ln_gamma(z)).exp()
}

/// Does z sit (to tight tolerance) on a nonpositive integer?
pub fn nonpositive_integer(z: Complex64) -> Option<i64> {
    if z.im.abs() > 1e-12 || z.re > 0.5 {
        return None;
    }
    let n = z.re.round();
    if (z.re - n).abs() < 1e-12 {
        Some(n as i64)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_known_values() {
        let g = gamma(Complex64::new(0.5, 0.0));
        assert!((g.re - PI.sqrt()).abs() < 1e-13 && g.im.abs() < 1e-13);
        let g = gamma(Complex64::new(5.0, 0.0));
        assert!((g.re - 24.0).abs() < 1e-11);
        // recurrence Gamma(z+1) = z Gamma(z) at a complex point
        let z = Complex64::new(0.3, 1.7);
        let lhs = gamma(z + 1.0);
        let rhs = z * gamma(z);
        assert!((lhs - rhs).norm() / rhs.norm() < 1e-12);
    }

    #[test]
    fn gamma_modulus_on_imaginary_axis() {
        // |Gamma(it)|^2 = pi / (t sinh(pi t))
        for t in [0.5, 2.0, 10.0] {
            let g = gamma(Complex64::new(0.0, t));
            let expect = (PI / (t * (PI * t).sinh())).sqrt();
            assert!(
                (g.norm() - expect).abs() / expect < 1e-12,
                "t={t}: {} vs {expect}",
                g.norm()
            );
        }
    }

    #[test]
    fn recip_gamma_poles() {
        for n in 0..5 {
            let z = Complex64::new(-(n as f64), 0.0);
            assert_eq!(recip_gamma(z), Complex64::new(0.0, 0.0));
        }
        let z = Complex64::new(1.5, 0.0);
        let r = recip_gamma(z) * gamma(z);
        assert!((r.re - 1.0).abs() < 1e-12);
    }
}
