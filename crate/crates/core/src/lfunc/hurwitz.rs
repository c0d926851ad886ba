//! Hurwitz zeta function by Euler–Maclaurin summation.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// B_2, B_4, ..., B_30.
const BERNOULLI: [f64; 15] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
    -236364091.0 / 2730.0,
    8553103.0 / 6.0,
    -23749461029.0 / 870.0,
    8615841276005.0 / 14322.0,
];

/// Correction terms used; the last tabulated number bounds the remainder.
const TERMS: usize = BERNOULLI.len() - 1;

const TARGET: f64 = 1e-13;

/// ζ(s, a) together with a bound on the Euler–Maclaurin remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HurwitzValue {
    pub value: Complex64,
    pub tail_bound: f64,
}

/// ζ(s, a) = Σ_{n≥0} (n + a)^{−s} for Re s > 0, s ≠ 1 and 0 < a ≤ 1.
pub fn hurwitz_zeta(s: Complex64, a: f64) -> Result<Complex64> {
    hurwitz_zeta_bounded(s, a).map(|h| h.value)
}

/// As [`hurwitz_zeta`], choosing the cutoff so the remainder bound is below
/// 10⁻¹³ (or as small as the cutoff cap allows).
pub fn hurwitz_zeta_bounded(s: Complex64, a: f64) -> Result<HurwitzValue> {
    check(s, a)?;
    let mut n = (s.norm().ceil() as usize + 10).max(16);
    loop {
        let h = euler_maclaurin(s, a, n);
        if h.tail_bound <= TARGET || n >= 1 << 20 {
            return Ok(h);
        }
        n *= 2;
    }
}

/// Euler–Maclaurin with an explicit cutoff `n` (direct terms k < n).
pub fn hurwitz_zeta_cutoff(s: Complex64, a: f64, n: usize) -> Result<HurwitzValue> {
    check(s, a)?;
    Ok(euler_maclaurin(s, a, n.max(1)))
}

fn check(s: Complex64, a: f64) -> Result<()> {
    if s == Complex64::new(1.0, 0.0) {
        return Err(Error::PoleAtOne);
    }
    if !(s.re > 0.0) {
        return Err(Error::InvalidArgument(format!("Re s must be positive, got {s}")));
    }
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidArgument(format!("a must lie in (0, 1], got {a}")));
    }
    Ok(())
}

fn cpow(x: f64, s: Complex64) -> Complex64 {
    (s * x.ln()).exp()
}

fn euler_maclaurin(s: Complex64, a: f64, n: usize) -> HurwitzValue {
    let mut head = Complex64::new(0.0, 0.0);
    for k in (0..n).rev() {
        head += cpow(k as f64 + a, -s);
    }
    let x = n as f64 + a;
    let x_s = cpow(x, -s);
    let mut value = head + x * x_s / (s - 1.0) + 0.5 * x_s;

    // term_j = B_2j/(2j)! · s(s+1)...(s+2j−2) · x^{−s−2j+1}
    let inv_x2 = 1.0 / (x * x);
    let mut rising = s; // s(s+1)...(s+2j−2)
    let mut factorial = 2.0; // (2j)!
    let mut power = x_s / x; // x^{−s−2j+1}
    let mut tail = 0.0;
    for j in 1..=TERMS + 1 {
        let term = BERNOULLI[j - 1] / factorial * rising * power;
        if j <= TERMS {
            value += term;
        } else {
            let sigma = s.re;
            let k = 2.0 * j as f64 - 1.0;
            tail = term.norm() * (s + k).norm() / (sigma + k);
        }
        let k = 2.0 * j as f64;
        rising *= (s + (k - 1.0)) * (s + k);
        factorial *= (k + 1.0) * (k + 2.0);
        power *= inv_x2;
    }
    HurwitzValue { value, tail_bound: tail }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    const ZETA_HALF: f64 = -1.460_354_508_809_586_8;

    fn re(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn zeta_two() {
        let z = hurwitz_zeta(re(2.0), 1.0).unwrap();
        assert!((z - re(PI * PI / 6.0)).norm() < 1e-13);
    }

    #[test]
    fn half_shift_at_two() {
        // Σ_{n≥0} (n+1/2)^{−2} = π²/2, so the sum from n = 1 is π²/2 − 4.
        let z = hurwitz_zeta(re(2.0), 0.5).unwrap();
        assert!((z - re(PI * PI / 2.0)).norm() < 1e-13);
        assert!((z - 4.0 - re(PI * PI / 2.0 - 4.0)).norm() < 1e-13);
    }

    #[test]
    fn central_point_constants() {
        let z = hurwitz_zeta(re(0.5), 1.0).unwrap();
        assert!((z.re - ZETA_HALF).abs() < 1e-13 && z.im.abs() < 1e-15);
        // ζ(s, 1/2) = (2^s − 1) ζ(s)
        let h = hurwitz_zeta(re(0.5), 0.5).unwrap();
        assert!((h.re - (2f64.sqrt() - 1.0) * ZETA_HALF).abs() < 1e-13);
    }

    #[test]
    fn quarter_relation() {
        // ζ(s,1/4) + ζ(s,3/4) = (4^s − 2^s) ζ(s)
        let s = Complex64::new(0.5, 3.0);
        let lhs = hurwitz_zeta(s, 0.25).unwrap() + hurwitz_zeta(s, 0.75).unwrap();
        let rhs = (cpow(4.0, s) - cpow(2.0, s)) * hurwitz_zeta(s, 1.0).unwrap();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn first_nontrivial_zero() {
        let z = hurwitz_zeta(Complex64::new(0.5, 14.134_725_141_734_693), 1.0).unwrap();
        assert!(z.norm() < 1e-12, "{z}");
    }

    #[test]
    fn cutoff_doubling_is_stable() {
        for a in [0.013, 0.3, 0.77, 1.0] {
            for s in [re(0.5), Complex64::new(0.5, 7.0), re(3.5)] {
                let h1 = hurwitz_zeta_cutoff(s, a, 32).unwrap();
                let h2 = hurwitz_zeta_cutoff(s, a, 64).unwrap();
                assert!((h1.value - h2.value).norm() < 1e-13 * h2.value.norm().max(1.0), "s={s} a={a}");
                assert!(h1.tail_bound < 1e-12);
            }
        }
    }

    #[test]
    fn direct_series_agrees_at_three() {
        // Partial sum plus the integral tail estimate, refined by Richardson.
        let partial = |n: usize| -> f64 {
            let a = 0.3;
            let s: f64 = (0..n).map(|k| (k as f64 + a).powi(-3)).sum();
            s + 0.5 * (n as f64 + a).powi(-2)
        };
        let (s1, s2) = (partial(2000), partial(4000));
        let rich = (8.0 * s2 - s1) / 7.0;
        let z = hurwitz_zeta(re(3.0), 0.3).unwrap();
        assert!((z.re - rich).abs() < 1e-12, "{} vs {}", z.re, rich);
    }

    #[test]
    fn errors() {
        assert_eq!(hurwitz_zeta(re(1.0), 0.5), Err(Error::PoleAtOne));
        assert!(matches!(hurwitz_zeta(re(0.5), 0.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(hurwitz_zeta(re(0.5), 1.5), Err(Error::InvalidArgument(_))));
        assert!(matches!(hurwitz_zeta(re(-1.0), 0.5), Err(Error::InvalidArgument(_))));
    }
}
