//! Incomplete sums Σ_{m≤M} K°_{χ,χ′}(mr).
//!
//! The completed method detects m ≡ r̄u (mod q) with additive characters:
//!
//! ```text
//! Σ_{m≤M} K°(mr) = q^{-1} Σ_{t mod q} F(t) G(t),
//! F(t) = Σ_u K°(u) e(−r̄tu/q) = ∏_p T_p(r̄t mod p),   G(t) = Σ_{1≤m≤M} e(mt/q),
//! ```
//!
//! where T_p is the prime-level Fourier table of K°. It is exact, so the two
//! methods agree up to rounding.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{self, Modulus};
use crate::characters::DirichletCharacter;
use crate::error::{Error, Result};
use crate::expsums::{cofactor_inverses, fourier_complete, kcirc_local_tables};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SumMethod {
    Direct,
    Completed,
}

impl SumMethod {
    pub fn name(self) -> &'static str {
        match self {
            SumMethod::Direct => "direct",
            SumMethod::Completed => "completed",
        }
    }
}

/// The stand-in d(q)·log q for the q^ε factors of the bounds.
pub fn epsilon_factor(q: u64) -> f64 {
    (1u64 << arith::factorize(q).len()) as f64 * (q as f64).ln().max(1.0)
}

/// ε·(M/q + q^{1/2}).
pub fn pv_bound(q: u64, m_len: u64) -> f64 {
    let qf = q as f64;
    epsilon_factor(q) * (m_len as f64 / qf + qf.sqrt())
}

/// ε·(M q1^{−1/4} + M^{1/2} q2^{1/2} + M^{1/2} q1^{1/4}).
pub fn vdc_bound(q1: u64, q2: u64, m_len: u64) -> f64 {
    let (a, b, m) = (q1 as f64, q2 as f64, m_len as f64);
    epsilon_factor(q1 * q2) * (m * a.powf(-0.25) + m.sqrt() * b.sqrt() + m.sqrt() * a.powf(0.25))
}

/// Whether q^{2/3}y^{−1/3} < q1 ≤ q^{2/3}y^{1/3}.
pub fn corollary_applies(q: u64, q1: u64, y: u64) -> bool {
    let base = (q as f64).powf(2.0 / 3.0);
    let y = (y as f64).cbrt();
    let q1 = q1 as f64;
    base / y < q1 && q1 <= base * y
}

/// ε·(M q^{−1/6} y^{1/12} + M^{1/2} q^{1/6} y^{1/6}).
pub fn vdc_corollary_bound(q: u64, y: u64, m_len: u64) -> f64 {
    let (qf, yf, m) = (q as f64, y as f64, m_len as f64);
    epsilon_factor(q) * (m * qf.powf(-1.0 / 6.0) * yf.powf(1.0 / 12.0) + m.sqrt() * qf.powf(1.0 / 6.0) * yf.powf(1.0 / 6.0))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IncompleteSumReport {
    pub q: u64,
    /// Split realising `bound_vdc`.
    pub q1: u64,
    pub q2: u64,
    pub m_len: u64,
    pub method: SumMethod,
    pub value: Complex64,
    pub bound_pv: f64,
    pub bound_vdc: f64,
    pub ratio: f64,
}

impl IncompleteSumReport {
    pub const CSV_HEADER: [&'static str; 10] =
        ["q", "q1", "q2", "M", "method", "re", "im", "bound_pv", "bound_vdc", "ratio"];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.q.to_string(),
            self.q1.to_string(),
            self.q2.to_string(),
            self.m_len.to_string(),
            self.method.name().to_string(),
            self.value.re.to_string(),
            self.value.im.to_string(),
            self.bound_pv.to_string(),
            self.bound_vdc.to_string(),
            self.ratio.to_string(),
        ]
    }
}

fn check_inputs(chi: &DirichletCharacter, chi_prime: &DirichletCharacter, r: i64) -> Result<()> {
    let q = chi.q();
    if chi_prime.q() != q {
        return Err(Error::ModulusMismatch(q, chi_prime.q()));
    }
    for c in [chi, chi_prime] {
        if !c.is_primitive() {
            return Err(Error::NotPrimitive(c.to_string()));
        }
    }
    if arith::gcd(arith::rem(r, q), q) != 1 && q != 1 {
        return Err(Error::NotCoprime { a: r, m: q });
    }
    Ok(())
}

/// Σ_{m≤M} K°(mr) summed term by term.
fn direct_sum(modulus: &Modulus, locals: &[Vec<Complex64>], r: u64, m_len: u64) -> Complex64 {
    let inverses = cofactor_inverses(modulus);
    // Per prime, the argument Q̄_p m r mod p advances by a fixed step.
    let steps: Vec<u64> = modulus
        .primes()
        .iter()
        .zip(&inverses)
        .map(|(&p, &inv)| (r % p) * inv % p)
        .collect();
    let mut pos = steps.clone();
    let mut acc = Complex64::new(0.0, 0.0);
    for _ in 0..m_len {
        let mut term = Complex64::new(1.0, 0.0);
        for ((table, x), (&step, &p)) in locals.iter().zip(pos.iter_mut()).zip(steps.iter().zip(modulus.primes())) {
            term *= table[*x as usize];
            *x += step;
            if *x >= p {
                *x -= p;
            }
        }
        acc += term;
    }
    acc
}

/// e(x/(2q)) for integer x, with x reduced modulo 2q first.
fn half_turn(x: u128, q: u64) -> Complex64 {
    let two_q = 2 * q as u128;
    let k = (x % two_q) as f64;
    Complex64::from_polar(1.0, PI * k / q as f64)
}

/// Σ_{1≤m≤M} e(mt/q) in closed form.
pub fn geometric_sum(t: u64, q: u64, m_len: u64) -> Complex64 {
    let t = t % q;
    if t == 0 {
        return Complex64::new(m_len as f64, 0.0);
    }
    let two_q = 2 * q as u128;
    // e((M+1)t/(2q)) · sin(πMt/q) / sin(πt/q)
    let phase = half_turn((m_len as u128 + 1) * t as u128, q);
    let num = (PI * ((m_len as u128 * t as u128 % two_q) as f64) / q as f64).sin();
    let den = (PI * t as f64 / q as f64).sin();
    phase * (num / den)
}

/// Σ_{m≤M} K°(mr) via the completion identity.
fn completed_sum(
    chi: &DirichletCharacter,
    chi_prime: &DirichletCharacter,
    r: u64,
    m_len: u64,
) -> Result<Complex64> {
    let modulus = chi.modulus();
    let q = modulus.q();
    let fouriers = modulus
        .primes()
        .iter()
        .map(|&p| fourier_complete(&chi.component(p)?, &chi_prime.component(p)?).map(|t| t.values))
        .collect::<Result<Vec<_>>>()?;
    let rbar: Vec<u64> = modulus
        .primes()
        .iter()
        .map(|&p| arith::mod_inverse((r % p) as i64, p))
        .collect::<Result<_>>()?;
    let mut acc = Complex64::new(0.0, 0.0);
    for t in 0..q {
        let mut f = Complex64::new(1.0, 0.0);
        for ((table, &inv), &p) in fouriers.iter().zip(&rbar).zip(modulus.primes()) {
            f *= table[((t % p) * inv % p) as usize];
        }
        acc += f * geometric_sum(t, q, m_len);
    }
    Ok(acc / q as f64)
}

/// Best van der Corput bound over all splits q = q1·q2.
fn best_vdc(modulus: &Modulus, m_len: u64) -> (u64, u64, f64) {
    let q = modulus.q();
    modulus
        .divisors()
        .into_iter()
        .map(|q1| (q1, q / q1, vdc_bound(q1, q / q1, m_len)))
        .min_by(|a, b| a.2.total_cmp(&b.2).then(a.0.cmp(&b.0)))
        .expect("at least the divisor 1")
}

/// Σ_{1≤m≤M} K°_{χ,χ′}(mr) by the chosen method, with the bound shapes.
pub fn incomplete_sum(
    chi: &DirichletCharacter,
    chi_prime: &DirichletCharacter,
    r: i64,
    m_len: u64,
    method: SumMethod,
) -> Result<IncompleteSumReport> {
    check_inputs(chi, chi_prime, r)?;
    let modulus = chi.modulus();
    let q = modulus.q();
    let r = arith::rem(r, q.max(1));
    let value = if m_len == 0 {
        Complex64::new(0.0, 0.0)
    } else if q == 1 {
        Complex64::new(m_len as f64, 0.0)
    } else {
        match method {
            SumMethod::Direct => direct_sum(modulus, &kcirc_local_tables(chi, chi_prime)?, r, m_len),
            SumMethod::Completed => completed_sum(chi, chi_prime, r, m_len)?,
        }
    };
    let bound_pv = pv_bound(q, m_len);
    let (q1, q2, bound_vdc) = best_vdc(modulus, m_len);
    Ok(IncompleteSumReport {
        q,
        q1,
        q2,
        m_len,
        method,
        value,
        bound_pv,
        bound_vdc,
        ratio: value.norm() / bound_pv.min(bound_vdc),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VdcAudit {
    pub q: u64,
    pub q1: u64,
    pub q2: u64,
    pub m_len: u64,
    pub smooth_bound: u64,
    pub true_abs: f64,
    pub bound_pv: f64,
    pub bound_vdc: f64,
    /// Present only when q1 lies in the corollary's window.
    pub bound_corollary: Option<f64>,
    pub ratio_pv: f64,
    pub ratio_vdc: f64,
    pub ratio_corollary: Option<f64>,
}

impl VdcAudit {
    /// Ratio against the smallest applicable bound.
    pub fn best_ratio(&self) -> f64 {
        let mut r = self.ratio_pv.min(self.ratio_vdc);
        if let Some(c) = self.ratio_corollary {
            r = r.min(c);
        }
        r
    }
}

/// Compare the true |Σ_{m≤M} K°(mr)| with the Pólya–Vinogradov and
/// q-van der Corput bound shapes for the split q = q1·q2.
pub fn vdc_audit(
    q1: u64,
    q2: u64,
    chi: &DirichletCharacter,
    chi_prime: &DirichletCharacter,
    r: i64,
    m_len: u64,
    y: u64,
) -> Result<VdcAudit> {
    let q = chi.q();
    if q1.checked_mul(q2) != Some(q) || arith::gcd(q1, q2) != 1 {
        return Err(Error::BadSplit { q, q1, q2 });
    }
    let report = incomplete_sum(chi, chi_prime, r, m_len, SumMethod::Direct)?;
    let true_abs = report.value.norm();
    let bound_pv = pv_bound(q, m_len);
    let bound_vdc = vdc_bound(q1, q2, m_len);
    let bound_corollary = corollary_applies(q, q1, y).then(|| vdc_corollary_bound(q, y, m_len));
    Ok(VdcAudit {
        q,
        q1,
        q2,
        m_len,
        smooth_bound: y,
        true_abs,
        bound_pv,
        bound_vdc,
        bound_corollary,
        ratio_pv: true_abs / bound_pv,
        ratio_vdc: true_abs / bound_vdc,
        ratio_corollary: bound_corollary.map(|b| true_abs / b),
    })
}
