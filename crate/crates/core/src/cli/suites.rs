//! Seeded verification suites behind `verify-identities` and
//! `verify-complete-sums`. Every case becomes one [`Check`] row.

use num_complex::Complex64;
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{self, Modulus};
use crate::characters::{primitive_characters, DirichletCharacter};
use crate::error::Result;
use crate::expsums::{
    correlation_sum, correlation_table, diagonal_fourth_moment, fourier_complete, fourier_complete_brute,
    fourier_from_k_tables, k_brute, k_bulk, k_product_residual, kk_expansion,
};
use crate::incomplete::{incomplete_sum, vdc_audit, SumMethod};

/// One verified case: `value` is compared with `tolerance` (pass iff
/// value ≤ tolerance).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub case: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl Check {
    pub const CSV_HEADER: [&'static str; 5] = ["suite", "case", "value", "tolerance", "pass"];

    pub fn new(suite: &'static str, case: String, value: f64, tolerance: f64) -> Self {
        Self { suite, case, value, tolerance, pass: value <= tolerance }
    }

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.suite.to_string(),
            self.case.clone(),
            self.value.to_string(),
            self.tolerance.to_string(),
            self.pass.to_string(),
        ]
    }
}

/// Odd squarefree q in [lo, hi] (every such q ≥ 3 has primitive characters).
pub fn odd_squarefree(lo: u64, hi: u64, min_factors: usize) -> Vec<Modulus> {
    arith::enumerate_smooth_squarefree(hi, hi, min_factors)
        .into_iter()
        .filter(|m| m.q() >= lo.max(3) && m.q() % 2 == 1)
        .collect()
}

/// Uniform primitive character of an odd modulus.
pub fn random_primitive(m: &Modulus, rng: &mut impl Rng) -> DirichletCharacter {
    let exps = m.primes().iter().map(|&p| rng.random_range(1..p - 1)).collect();
    DirichletCharacter::new(m, exps).expect("exponents in range")
}

fn prime_moduli(lo: u64, hi: u64) -> Vec<Modulus> {
    arith::primes_up_to(hi)
        .into_iter()
        .filter(|&p| p >= lo.max(3))
        .map(|p| Modulus::new(p).expect("prime"))
        .collect()
}

fn max_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

/// K_χ(k,ℓ) = μ(d) R_d(k) K_χ(kℓ) on random (q, χ, k, ℓ).
pub fn product_lemma(q_max: u64, samples: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let pool = odd_squarefree(3, q_max, 1);
    let cases: Vec<(DirichletCharacter, i64, i64)> = (0..samples)
        .map(|_| {
            let m = pool.choose(rng).expect("nonempty pool");
            let chi = random_primitive(m, rng);
            let q = m.q() as i64;
            // Bias ℓ towards non-units so d = gcd(ℓ, q) > 1 is exercised.
            let l = if rng.random_bool(0.5) {
                let p = *m.primes().choose(rng).unwrap() as i64;
                p * rng.random_range(0..q / p)
            } else {
                rng.random_range(0..q)
            };
            (chi, rng.random_range(0..q), l)
        })
        .collect();
    cases
        .par_iter()
        .map(|(chi, k, l)| {
            let r = k_product_residual(chi, *k, *l)?;
            Ok(Check::new("k_product", format!("{chi} k={k} l={l}"), r, 1e-6 * (chi.q() as f64).sqrt()))
        })
        .collect()
}

/// FFT-assembled K_χ against O(q²) summation on random composite q.
pub fn twisted_multiplicativity(q_max: u64, samples: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let pool = odd_squarefree(3, q_max, 2);
    let chars: Vec<DirichletCharacter> = (0..samples)
        .map(|_| random_primitive(pool.choose(rng).expect("nonempty pool"), rng))
        .collect();
    chars
        .par_iter()
        .map(|chi| {
            let d = max_diff(&k_bulk(chi)?.values, &k_brute(chi)?.values);
            Ok(Check::new("twisted_multiplicativity", chi.to_string(), d, 1e-6))
        })
        .collect()
}

/// K_χ K̄_χ′ = Σ_{q=rs, Δ|r} K°(s̄m): all primitive pairs, all m.
pub fn kk_decomposition(moduli: &[u64]) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for &q in moduli {
        let m = Modulus::new(q)?;
        let chars: Vec<DirichletCharacter> = primitive_characters(&m).collect();
        if chars.is_empty() {
            out.push(Check::new("kk_expansion", format!("{q}: no primitive characters"), 0.0, 0.0));
            continue;
        }
        let tables: Vec<Vec<Complex64>> = chars.iter().map(|c| k_bulk(c).map(|t| t.values)).collect::<Result<_>>()?;
        let tol = 1e-6 * m.divisor_count() as f64;
        let pairs: Vec<(usize, usize)> = (0..chars.len()).flat_map(|i| (0..chars.len()).map(move |j| (i, j))).collect();
        let rows: Vec<Check> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let mut worst = 0.0f64;
                for x in 0..q {
                    let lhs = tables[i][x as usize] * tables[j][x as usize].conj();
                    worst = worst.max((lhs - kk_expansion(&chars[i], &chars[j], x as i64)?).norm());
                }
                Ok(Check::new("kk_expansion", format!("{} {}", chars[i], chars[j]), worst, tol))
            })
            .collect::<Result<_>>()?;
        out.extend(rows);
    }
    Ok(out)
}

/// Σ_m |K_χ(m)|² = p − 2 for every primitive χ mod every prime p ≤ p_max.
pub fn parseval(p_max: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for m in prime_moduli(3, p_max) {
        let p = m.q() as f64;
        for chi in primitive_characters(&m) {
            let s: f64 = k_bulk(&chi)?.values.iter().map(|v| v.norm_sqr()).sum();
            out.push(Check::new("parseval", chi.to_string(), (s - (p - 2.0)).abs(), 1e-6 * p));
        }
    }
    Ok(out)
}

/// Bulk (FFT) tables against brute-force summation for primes p ≤ p_max.
pub fn fft_equivalence(p_max: u64, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for m in prime_moduli(3, p_max) {
        let p = m.q();
        let tol = 1e-9 * p as f64;
        let chars: Vec<DirichletCharacter> = primitive_characters(&m).collect();
        for chi in &chars {
            let d = max_diff(&k_bulk(chi)?.values, &k_brute(chi)?.values);
            out.push(Check::new("fft_k", chi.to_string(), d, tol));
        }
        let a = chars.choose(rng).unwrap();
        let b = chars.choose(rng).unwrap();
        let d = max_diff(&fourier_complete(a, b)?.values, &fourier_complete_brute(a, b)?.values);
        out.push(Check::new("fft_fourier", format!("{a} {b}"), d, tol));
        let s = rng.random_range(0..p as i64);
        let table = correlation_table(a, b, s)?;
        let direct: Vec<Complex64> = (0..p as i64).map(|t| correlation_sum(a, b, s, t)).collect::<Result<_>>()?;
        out.push(Check::new("fft_correlation", format!("{a} {b} s={s}"), max_diff(&table.values, &direct), tol));
    }
    Ok(out)
}

/// Per prime: the largest deviation of T[0] from `expected(diagonal)` over
/// all primitive pairs, and sup_{t≠0} |T[t]|/√p.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FourierScan {
    pub p: u64,
    pub pairs: usize,
    pub t0_offdiagonal_dev: f64,
    pub t0_diagonal_dev: f64,
    pub t0_diagonal_value: f64,
    pub sup_ratio: f64,
}

/// Off-diagonal deviations are from −1, diagonal ones from −2.
pub fn fourier_scan(p: u64) -> Result<FourierScan> {
    let m = Modulus::new(p)?;
    let chars: Vec<DirichletCharacter> = primitive_characters(&m).collect();
    let tables: Vec<Vec<Complex64>> = chars.iter().map(|c| k_bulk(c).map(|t| t.values)).collect::<Result<_>>()?;
    let per_row: Vec<(f64, f64, f64, f64)> = (0..chars.len())
        .into_par_iter()
        .map(|i| {
            let mut off: f64 = 0.0;
            let mut diag: f64 = 0.0;
            let mut diag_value = 0.0;
            let mut sup: f64 = 0.0;
            for j in 0..chars.len() {
                let t = fourier_from_k_tables(&tables[i], &tables[j], i == j);
                if i == j {
                    diag = diag.max((t[0] - Complex64::new(-2.0, 0.0)).norm());
                    diag_value = t[0].re;
                } else {
                    off = off.max((t[0] - Complex64::new(-1.0, 0.0)).norm());
                }
                sup = t[1..].iter().map(|v| v.norm()).fold(sup, f64::max);
            }
            (off, diag, diag_value, sup)
        })
        .collect();
    let fold = |f: fn(&(f64, f64, f64, f64)) -> f64| per_row.iter().map(f).fold(0.0, f64::max);
    Ok(FourierScan {
        p,
        pairs: chars.len() * chars.len(),
        t0_offdiagonal_dev: fold(|r| r.0),
        t0_diagonal_dev: fold(|r| r.1),
        t0_diagonal_value: per_row.first().map_or(0.0, |r| r.2),
        sup_ratio: fold(|r| r.3) / (p as f64).sqrt(),
    })
}

/// |Σ_u |K_χ(u)|⁴/p − 2| for every primitive χ mod p.
pub fn fourth_moment_diagonal(p_lo: u64, p_hi: u64) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for m in prime_moduli(p_lo, p_hi) {
        let p = m.q() as f64;
        for chi in primitive_characters(&m) {
            let v = diagonal_fourth_moment(&chi, 0)? / p;
            out.push(Check::new("fourth_diagonal", chi.to_string(), (v - 2.0).abs(), 6.0 / p.sqrt()));
        }
    }
    Ok(out)
}

/// |Σ_u |K_χ(s+u)|²|K_χ(u)|²/p − 1| on random (p, χ, s ≠ 0).
pub fn fourth_moment_shifted(p_lo: u64, p_hi: u64, samples: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let primes = prime_moduli(p_lo, p_hi);
    (0..samples)
        .map(|_| {
            let m = primes.choose(rng).expect("primes in range");
            let chi = random_primitive(m, rng);
            let p = m.q();
            let s = rng.random_range(1..p as i64);
            let v = diagonal_fourth_moment(&chi, s)? / p as f64;
            Ok(Check::new("fourth_shifted", format!("{chi} s={s}"), (v - 1.0).abs(), 6.0 / (p as f64).sqrt()))
        })
        .collect()
}

/// Direct against completed incomplete sums on random composite q.
pub fn incomplete_equivalence(q_max: u64, m_max: u64, samples: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let pool = odd_squarefree(15, q_max, 2);
    let cases: Vec<(DirichletCharacter, DirichletCharacter, i64, u64)> = (0..samples)
        .map(|_| {
            let m = pool.choose(rng).expect("nonempty pool");
            let a = random_primitive(m, rng);
            let b = if rng.random_bool(0.25) { a.clone() } else { random_primitive(m, rng) };
            let q = m.q();
            let r = loop {
                let r = rng.random_range(1..q);
                if arith::gcd(r, q) == 1 {
                    break r as i64;
                }
            };
            (a, b, r, rng.random_range(1..=m_max))
        })
        .collect();
    cases
        .par_iter()
        .map(|(a, b, r, m_len)| {
            let d = incomplete_sum(a, b, *r, *m_len, SumMethod::Direct)?.value;
            let c = incomplete_sum(a, b, *r, *m_len, SumMethod::Completed)?.value;
            Ok(Check::new(
                "incomplete_equivalence",
                format!("{a} {b} r={r} M={m_len}"),
                (d - c).norm(),
                1e-6 * *m_len as f64,
            ))
        })
        .collect()
}

/// True sum over the best applicable bound for random splits; hard limit 20.
pub fn vdc_ratios(q_max: u64, m_max: u64, samples: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let pool = odd_squarefree(15, q_max, 2);
    let cases: Vec<_> = (0..samples)
        .map(|_| {
            let m = pool.choose(rng).expect("nonempty pool").clone();
            let divs: Vec<u64> = m.divisors().into_iter().filter(|&d| d != 1 && d != m.q()).collect();
            let q1 = *divs.choose(rng).unwrap();
            let a = random_primitive(&m, rng);
            let b = random_primitive(&m, rng);
            (m, q1, a, b, rng.random_range(1..=m_max))
        })
        .collect();
    cases
        .par_iter()
        .map(|(m, q1, a, b, m_len)| {
            let audit = vdc_audit(*q1, m.q() / q1, a, b, 1, *m_len, m.smooth_bound())?;
            Ok(Check::new("vdc_ratio", format!("{a} {b} q1={q1} M={m_len}"), audit.best_ratio(), 20.0))
        })
        .collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
