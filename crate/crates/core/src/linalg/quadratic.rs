use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// The two roots of a monic real quadratic: both real, or a conjugate pair.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexPair {
    pub first: Complex64,
    pub second: Complex64,
}

impl ComplexPair {
    pub fn max_modulus(&self) -> f64 {
        self.first.norm().max(self.second.norm())
    }

    pub fn is_real(&self) -> bool {
        self.first.im == 0.0 && self.second.im == 0.0
    }

    pub fn iter(&self) -> impl Iterator<Item = Complex64> {
        [self.first, self.second].into_iter()
    }
}

/// Roots of `z^2 + b1 z + c0`.
///
/// Real roots use the cancellation-free form `q = -(b1 + sgn(b1) sqrt(D)) / 2`,
/// `{q, c0 / q}`. A discriminant within rounding of zero is snapped to a
/// repeated root; the tolerance allows for `b1` having been accumulated from
/// terms of order one.
pub fn quadratic_roots(b1: f64, c0: f64) -> ComplexPair {
    let disc = b1 * b1 - 4.0 * c0;
    let noise = 256.0 * f64::EPSILON * (b1 * b1).max(4.0 * c0.abs()).max(b1.abs());
    if disc.abs() <= noise {
        let r = Complex64::new(-0.5 * b1, 0.0);
        return ComplexPair { first: r, second: r };
    }
    if disc > 0.0 {
        let sq = disc.sqrt();
        let q = if b1 >= 0.0 { -0.5 * (b1 + sq) } else { -0.5 * (b1 - sq) };
        // q == 0 only when b1 == 0 and disc == 0, handled above
        let r1 = q;
        let r2 = c0 / q;
        let (lo, hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
        ComplexPair {
            first: Complex64::new(hi, 0.0),
            second: Complex64::new(lo, 0.0),
        }
    } else {
        let re = -0.5 * b1;
        let im = 0.5 * (-disc).sqrt();
        ComplexPair {
            first: Complex64::new(re, im),
            second: Complex64::new(re, -im),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn has_root(p: &ComplexPair, re: f64, im: f64) -> bool {
        p.iter().any(|z| (z.re - re).abs() < 1e-12 && (z.im - im).abs() < 1e-12)
    }

    #[test]
    fn examples() {
        let p = quadratic_roots(0.0, -1.0);
        assert!(has_root(&p, 1.0, 0.0) && has_root(&p, -1.0, 0.0));

        let mu = 0.25;
        let p = quadratic_roots(-(1.0 - mu), 0.0);
        assert!(has_root(&p, 0.0, 0.0) && has_root(&p, 0.75, 0.0));

        let p = quadratic_roots(0.0, 0.25);
        assert!(has_root(&p, 0.0, 0.5) && has_root(&p, 0.0, -0.5));
        assert!((p.first.norm() - 0.5).abs() < 1e-15);
        assert!((p.second.norm() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn repeated_root() {
        let p = quadratic_roots(-2.0, 1.0);
        assert_eq!(p.first, p.second);
        assert_eq!(p.first.re, 1.0);
    }

    proptest! {
        #[test]
        fn vieta(b1 in -10.0f64..10.0, c0 in -10.0f64..10.0) {
            let p = quadratic_roots(b1, c0);
            let sum = p.first + p.second;
            let prod = p.first * p.second;
            let scale = 1.0f64.max(b1.abs()).max(c0.abs());
            prop_assert!((sum.re + b1).abs() <= 1e-12 * scale);
            prop_assert!(sum.im.abs() <= 1e-12 * scale);
            prop_assert!((prod.re - c0).abs() <= 1e-12 * scale);
            prop_assert!(prod.im.abs() <= 1e-12 * scale);
            // real or conjugate
            prop_assert!(p.is_real() || (p.first.re == p.second.re && p.first.im == -p.second.im));
        }
    }
}
