//! Complete exponential sums built from K_χ.
//!
//! For a character χ mod squarefree q,
//!
//! ```text
//! K_χ(k, ℓ) = q^{-1/2} Σ*_{u mod q} χ(ℓ + u) χ̄(u) e(ku/q),    K_χ(m) = K_χ(m, 1)
//! ```
//!
//! and for two characters K°_{χ,χ′} = K_χ K̄_χ′ − δ_{χ,χ′} at a prime,
//! extended to squarefree q by the twisted product over p | q.
//!
//! Every bulk table has a brute-force counterpart (`*_brute`, or the point
//! evaluators) computed by direct summation, used to cross-check the FFT
//! path.

use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::arith::{self, Modulus};
use crate::characters::{distance, DirichletCharacter};
use crate::error::{Error, Result};

/// e(j/n) for j < n, with exact reduction of the index.
#[derive(Debug, Clone)]
pub struct RootTable {
    n: u64,
    roots: Vec<Complex64>,
}

impl RootTable {
    pub fn new(n: u64) -> Self {
        let roots = (0..n)
            .map(|j| Complex64::from_polar(1.0, std::f64::consts::TAU * j as f64 / n as f64))
            .collect();
        Self { n, roots }
    }

    pub fn get(&self, j: i64) -> Complex64 {
        self.roots[arith::rem(j, self.n) as usize]
    }

    pub fn get_u(&self, j: u64) -> Complex64 {
        self.roots[(j % self.n) as usize]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TableKind {
    K,
    Kcirc,
    Fourier,
    Correlation,
}

/// A complete sum tabulated over the residues of its modulus.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpSumTable {
    pub modulus: u64,
    pub values: Vec<Complex64>,
    pub kind: TableKind,
}

impl ExpSumTable {
    fn new(modulus: u64, values: Vec<Complex64>, kind: TableKind) -> Self {
        debug_assert_eq!(values.len() as u64, modulus);
        Self { modulus, values, kind }
    }

    pub fn get(&self, m: i64) -> Complex64 {
        self.values[arith::rem(m, self.modulus) as usize]
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise distance to another table of the same length.
    pub fn max_diff(&self, other: &ExpSumTable) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// CSV with columns `index,re,im`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), csv::Error> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "re", "im"])?;
        for (i, v) in self.values.iter().enumerate() {
            w.write_record([i.to_string(), v.re.to_string(), v.im.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

fn require_primitive(chi: &DirichletCharacter) -> Result<()> {
    if chi.is_primitive() {
        Ok(())
    } else {
        Err(Error::NotPrimitive(chi.to_string()))
    }
}

fn require_prime(chi: &DirichletCharacter) -> Result<()> {
    if chi.modulus().is_prime() {
        Ok(())
    } else {
        Err(Error::NotPrime(chi.q()))
    }
}

fn require_pair(chi: &DirichletCharacter, chi_prime: &DirichletCharacter) -> Result<()> {
    if chi.q() != chi_prime.q() {
        return Err(Error::ModulusMismatch(chi.q(), chi_prime.q()));
    }
    require_primitive(chi)?;
    require_primitive(chi_prime)
}

/// Ramanujan sum R_d(k) = Σ*_{x mod d} e(kx/d), via
/// R_d(k) = μ(d/g) φ(d) / φ(d/g) with g = gcd(d, k).
pub fn ramanujan_sum(d: u64, k: i64) -> i64 {
    assert!(d >= 1, "Ramanujan sum needs d ≥ 1");
    let g = arith::gcd(d, k.unsigned_abs());
    let g = if g == 0 { d } else { g };
    let e = d / g;
    arith::mobius(e) * (arith::euler_phi(d) / arith::euler_phi(e)) as i64
}

/// K_χ(k, ℓ) by direct summation over the units mod q.
pub fn k_chi(chi: &DirichletCharacter, k: i64, l: i64) -> Result<Complex64> {
    require_primitive(chi)?;
    let q = chi.q();
    let vals = chi.values();
    let roots = RootTable::new(q);
    let l = arith::rem(l, q);
    let k = arith::rem(k, q);
    let mut acc = zero();
    for u in 0..q {
        let cu = vals[u as usize];
        if cu.norm_sqr() == 0.0 {
            continue;
        }
        acc += vals[((l + u) % q) as usize] * cu.conj() * roots.get_u(k * u % q);
    }
    Ok(acc / (q as f64).sqrt())
}

/// K_χ(m) = K_χ(m, 1).
pub fn k_chi_point(chi: &DirichletCharacter, m: i64) -> Result<Complex64> {
    k_chi(chi, m, 1)
}

/// |K_χ(k, ℓ) − μ(d) R_d(k) K_χ(kℓ)| with d = gcd(ℓ, q).
pub fn k_product_residual(chi: &DirichletCharacter, k: i64, l: i64) -> Result<f64> {
    let q = chi.q();
    let d = arith::gcd(arith::rem(l, q), q);
    let d = if d == 0 { q } else { d };
    let lhs = k_chi(chi, k, l)?;
    let kl = ((k as i128 * l as i128).rem_euclid(q as i128)) as i64;
    let rhs = k_chi_point(chi, kl)? * (arith::mobius(d) * ramanujan_sum(d, k)) as f64;
    Ok((lhs - rhs).norm())
}

/// Q̄_p = (q/p)^{-1} mod p for every p | q.
pub fn cofactor_inverses(modulus: &Modulus) -> Vec<u64> {
    let q = modulus.q();
    modulus
        .primes()
        .iter()
        .map(|&p| arith::mod_inverse(((q / p) % p) as i64, p).expect("squarefree cofactor is a unit"))
        .collect()
}

fn dft(values: &mut [Complex64], inverse: bool) {
    let mut planner = FftPlanner::<f64>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(values.len())
    } else {
        planner.plan_fft_forward(values.len())
    };
    fft.process(values);
}

/// K_χ(m) for all m mod p, p prime: p^{-1/2} times the inverse DFT of
/// u ↦ χ(1+u)χ̄(u).
fn k_table_prime(chi: &DirichletCharacter) -> Vec<Complex64> {
    let p = chi.q();
    let vals = chi.values();
    let mut seq: Vec<Complex64> = (0..p)
        .map(|u| vals[((u + 1) % p) as usize] * vals[u as usize].conj())
        .collect();
    dft(&mut seq, true);
    let scale = 1.0 / (p as f64).sqrt();
    seq.iter_mut().for_each(|v| *v *= scale);
    seq
}

/// Gather a table mod q from prime-level tables through the twisted CRT
/// map m ↦ (Q̄_p m mod p)_p.
fn twisted_gather(modulus: &Modulus, locals: &[Vec<Complex64>]) -> Vec<Complex64> {
    let q = modulus.q();
    let inverses = cofactor_inverses(modulus);
    (0..q)
        .map(|m| {
            modulus
                .primes()
                .iter()
                .zip(&inverses)
                .zip(locals)
                .map(|((&p, &inv), table)| table[((m % p) * inv % p) as usize])
                .product()
        })
        .collect()
}

/// K_χ(m) for every m mod q: prime-length FFTs per p | q assembled by
/// twisted multiplicativity.
pub fn k_bulk(chi: &DirichletCharacter) -> Result<ExpSumTable> {
    require_primitive(chi)?;
    let modulus = chi.modulus();
    let values = if modulus.is_prime() {
        k_table_prime(chi)
    } else {
        let locals = modulus
            .primes()
            .iter()
            .map(|&p| chi.component(p).map(|c| k_table_prime(&c)))
            .collect::<Result<Vec<_>>>()?;
        twisted_gather(modulus, &locals)
    };
    Ok(ExpSumTable::new(modulus.q(), values, TableKind::K))
}

/// K_χ(m) for every m mod q by O(q²) direct summation.
pub fn k_brute(chi: &DirichletCharacter) -> Result<ExpSumTable> {
    require_primitive(chi)?;
    let q = chi.q();
    let vals = chi.values();
    let roots = RootTable::new(q);
    let f: Vec<Complex64> = (0..q)
        .map(|u| vals[((u + 1) % q) as usize] * vals[u as usize].conj())
        .collect();
    let scale = 1.0 / (q as f64).sqrt();
    let values = (0..q)
        .map(|m| {
            let mut acc = zero();
            let mut idx = 0u64;
            for fu in &f {
                acc += fu * roots.get_u(idx);
                idx += m;
                if idx >= q {
                    idx -= q;
                }
            }
            acc * scale
        })
        .collect();
    Ok(ExpSumTable::new(q, values, TableKind::K))
}

/// K_χ(m) = K_{χ1}(q̄2 m) K_{χ2}(q̄1 m) for the split q = q1·q2, each factor
/// by direct summation.
pub fn k_chi_split(chi: &DirichletCharacter, q1: u64, m: i64) -> Result<Complex64> {
    let q = chi.q();
    if q1 == 0 || q % q1 != 0 {
        return Err(Error::NotADivisor { r: q1, q });
    }
    let q2 = q / q1;
    let c1 = chi.restrict(q1)?;
    let c2 = chi.restrict(q2)?;
    let m1 = if q1 == 1 { 0 } else { arith::mod_inverse((q2 % q1) as i64, q1)? as i128 * m as i128 };
    let m2 = if q2 == 1 { 0 } else { arith::mod_inverse((q1 % q2) as i64, q2)? as i128 * m as i128 };
    let k1 = if q1 == 1 { Complex64::new(1.0, 0.0) } else { k_chi_point(&c1, m1.rem_euclid(q1 as i128) as i64)? };
    let k2 = if q2 == 1 { Complex64::new(1.0, 0.0) } else { k_chi_point(&c2, m2.rem_euclid(q2 as i128) as i64)? };
    Ok(k1 * k2)
}

/// K°_{χ,χ′} over Z/p for characters of prime modulus, from FFT tables.
pub fn kcirc_prime_table(chi: &DirichletCharacter, chi_prime: &DirichletCharacter) -> Result<Vec<Complex64>> {
    require_pair(chi, chi_prime)?;
    require_prime(chi)?;
    let a = k_table_prime(chi);
    let b = k_table_prime(chi_prime);
    let diagonal = if chi == chi_prime { 1.0 } else { 0.0 };
    Ok(a.iter().zip(&b).map(|(x, y)| x * y.conj() - diagonal).collect())
}

/// K°_{χ,χ′}(m) = ∏_p K°_{χ_p,χ′_p}(Q̄_p m), each local factor by direct
/// summation. Equals 1 on the trivial modulus.
pub fn k_circ(chi: &DirichletCharacter, chi_prime: &DirichletCharacter, m: i64) -> Result<Complex64> {
    require_pair(chi, chi_prime)?;
    let modulus = chi.modulus();
    let inverses = cofactor_inverses(modulus);
    let mut acc = Complex64::new(1.0, 0.0);
    for (&p, &inv) in modulus.primes().iter().zip(&inverses) {
        let a = chi.component(p)?;
        let b = chi_prime.component(p)?;
        let x = (arith::rem(m, p) * inv % p) as i64;
        let diagonal = if a == b { 1.0 } else { 0.0 };
        acc *= k_chi_point(&a, x)? * k_chi_point(&b, x)?.conj() - diagonal;
    }
    Ok(acc)
}

/// K°_{χ,χ′}(m) for all m mod q (FFT per prime, twisted gather).
pub fn kcirc_table(chi: &DirichletCharacter, chi_prime: &DirichletCharacter) -> Result<ExpSumTable> {
    require_pair(chi, chi_prime)?;
    let modulus = chi.modulus();
    let locals = kcirc_local_tables(chi, chi_prime)?;
    Ok(ExpSumTable::new(modulus.q(), twisted_gather(modulus, &locals), TableKind::Kcirc))
}

/// Prime-level K° tables, one per p | q, in prime order.
pub fn kcirc_local_tables(chi: &DirichletCharacter, chi_prime: &DirichletCharacter) -> Result<Vec<Vec<Complex64>>> {
    require_pair(chi, chi_prime)?;
    chi.modulus()
        .primes()
        .iter()
        .map(|&p| kcirc_prime_table(&chi.component(p)?, &chi_prime.component(p)?))
        .collect()
}

/// Right side of K_χ(m)K̄_χ′(m) = Σ_{q = rs, Δ | r} K°_{χ_[r],χ′_[r]}(s̄ m).
pub fn kk_expansion(chi: &DirichletCharacter, chi_prime: &DirichletCharacter, m: i64) -> Result<Complex64> {
    require_pair(chi, chi_prime)?;
    let q = chi.q();
    let delta = distance(chi, chi_prime)?;
    let mut acc = zero();
    for r in chi.modulus().divisors() {
        if r % delta != 0 {
            continue;
        }
        let s = q / r;
        let term = if r == 1 {
            Complex64::new(1.0, 0.0)
        } else {
            let sbar = arith::mod_inverse((s % r) as i64, r)?;
            let x = (arith::rem(m, r) as u128 * sbar as u128 % r as u128) as i64;
            k_circ(&chi.restrict(r)?, &chi_prime.restrict(r)?, x)?
        };
        acc += term;
    }
    Ok(acc)
}

/// T[t] = Σ_{u mod p} K°_{χ,χ′}(u) e(−tu/p), all t, by one length-p FFT.
pub fn fourier_complete(chi: &DirichletCharacter, chi_prime: &DirichletCharacter) -> Result<ExpSumTable> {
    require_pair(chi, chi_prime)?;
    require_prime(chi)?;
    let mut seq = kcirc_prime_table(chi, chi_prime)?;
    dft(&mut seq, false);
    Ok(ExpSumTable::new(chi.q(), seq, TableKind::Fourier))
}

/// T[t] from precomputed prime-level K tables of χ and χ′.
pub fn fourier_from_k_tables(k_chi: &[Complex64], k_chi_prime: &[Complex64], diagonal: bool) -> Vec<Complex64> {
    let delta = if diagonal { 1.0 } else { 0.0 };
    let mut seq: Vec<Complex64> = k_chi.iter().zip(k_chi_prime).map(|(x, y)| x * y.conj() - delta).collect();
    dft(&mut seq, false);
    seq
}

/// Same table by direct O(p²) summation over brute-force K tables.
pub fn fourier_complete_brute(chi: &DirichletCharacter, chi_prime: &DirichletCharacter) -> Result<ExpSumTable> {
    require_pair(chi, chi_prime)?;
    require_prime(chi)?;
    let p = chi.q();
    let a = k_brute(chi)?;
    let b = k_brute(chi_prime)?;
    let diagonal = if chi == chi_prime { 1.0 } else { 0.0 };
    let kc: Vec<Complex64> = a.values.iter().zip(&b.values).map(|(x, y)| x * y.conj() - diagonal).collect();
    let roots = RootTable::new(p);
    let values = (0..p as i64)
        .map(|t| kc.iter().enumerate().map(|(u, v)| v * roots.get(-t * u as i64)).sum())
        .collect();
    Ok(ExpSumTable::new(p, values, TableKind::Fourier))
}

/// Σ_{u mod p} K°(s+u) conj(K°(u)) e(−tu/p) by direct summation.
pub fn correlation_sum(chi: &DirichletCharacter, chi_prime: &DirichletCharacter, s: i64, t: i64) -> Result<Complex64> {
    require_pair(chi, chi_prime)?;
    require_prime(chi)?;
    let p = chi.q();
    let kc = kcirc_prime_table(chi, chi_prime)?;
    let roots = RootTable::new(p);
    let s = arith::rem(s, p);
    let t = arith::rem(t, p);
    Ok((0..p)
        .map(|u| kc[((s + u) % p) as usize] * kc[u as usize].conj() * roots.get_u((p - t) % p * u % p))
        .sum())
}

/// The correlation sums for a fixed shift `s` and all t, by one FFT.
pub fn correlation_table(chi: &DirichletCharacter, chi_prime: &DirichletCharacter, s: i64) -> Result<ExpSumTable> {
    require_pair(chi, chi_prime)?;
    require_prime(chi)?;
    let p = chi.q();
    let kc = kcirc_prime_table(chi, chi_prime)?;
    let s = arith::rem(s, p);
    let mut seq: Vec<Complex64> = (0..p).map(|u| kc[((s + u) % p) as usize] * kc[u as usize].conj()).collect();
    dft(&mut seq, false);
    Ok(ExpSumTable::new(p, seq, TableKind::Correlation))
}

/// Σ_u |K_χ(s+u)|² |K_χ(u)|² over Z/p.
pub fn diagonal_fourth_moment(chi: &DirichletCharacter, s: i64) -> Result<f64> {
    require_primitive(chi)?;
    require_prime(chi)?;
    let p = chi.q();
    let sq: Vec<f64> = k_table_prime(chi).iter().map(|v| v.norm_sqr()).collect();
    let s = arith::rem(s, p);
    Ok((0..p).map(|u| sq[((s + u) % p) as usize] * sq[u as usize]).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::primitive_characters;

    fn ramanujan_direct(d: u64, k: i64) -> f64 {
        let roots = RootTable::new(d);
        (0..d)
            .filter(|&x| arith::gcd(x, d) == 1)
            .map(|x| roots.get(k * x as i64))
            .sum::<Complex64>()
            .re
    }

    fn chi(s: &str) -> DirichletCharacter {
        s.parse().unwrap()
    }

    #[test]
    fn ramanujan_examples() {
        for k in -5..6 {
            assert_eq!(ramanujan_sum(1, k), 1);
        }
        for d in 1..40 {
            assert_eq!(ramanujan_sum(d, 0), arith::euler_phi(d) as i64);
            for k in -12..13 {
                assert!((ramanujan_sum(d, k) as f64 - ramanujan_direct(d, k)).abs() < 1e-9, "d={d} k={k}");
            }
        }
        // R_6(2): residues 1, 5 → e(2/6) + e(10/6) = 2 cos(2π/3) = −1.
        assert_eq!(ramanujan_sum(6, 2), -1);
    }

    #[test]
    fn k_at_zero_prime() {
        for p in [5u64, 7, 11, 13] {
            for c in primitive_characters(&Modulus::new(p).unwrap()) {
                for l in 1..p as i64 {
                    let v = k_chi(&c, 0, l).unwrap();
                    assert!((v - Complex64::new(-1.0 / (p as f64).sqrt(), 0.0)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn k_zero_bound() {
        let m = Modulus::new(105).unwrap();
        for c in primitive_characters(&m) {
            for l in 0..105i64 {
                let v = k_chi(&c, 0, l).unwrap().norm();
                let bound = arith::gcd(l as u64, 105).max(if l == 0 { 105 } else { 1 }) as f64 / 105f64.sqrt();
                assert!(v <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn k_quadratic_mod_5_by_hand() {
        // χ = (·|5): values 1, −1, −1, 1 at 1..4.
        let leg = [0.0, 1.0, -1.0, -1.0, 1.0];
        let mut acc = zero();
        for u in 1..5usize {
            let z = Complex64::from_polar(1.0, std::f64::consts::TAU * u as f64 / 5.0);
            acc += leg[(u + 1) % 5] * leg[u] * z;
        }
        acc /= 5f64.sqrt();
        let v = k_chi(&chi("5:2"), 1, 1).unwrap();
        assert!((v - acc).norm() < 1e-14);
    }

    #[test]
    fn product_residual_examples() {
        let c = chi("15:1,1");
        assert!(k_product_residual(&c, 2, 3).unwrap() < 1e-12);
        for l in [1i64, 2, 4, 7, 8] {
            assert!(k_product_residual(&c, 5, l).unwrap() < 1e-12);
        }
    }

    #[test]
    fn bulk_matches_points() {
        for s in ["15:1,3", "7:2", "105:1,2,5"] {
            let c = chi(s);
            let t = k_bulk(&c).unwrap();
            for m in 0..c.q() as i64 {
                assert!((t.get(m) - k_chi_point(&c, m).unwrap()).norm() < 1e-12, "{s} m={m}");
            }
        }
    }

    #[test]
    fn parseval_small_primes() {
        for p in [3u64, 5, 7, 11, 13] {
            for c in primitive_characters(&Modulus::new(p).unwrap()) {
                let s: f64 = k_bulk(&c).unwrap().values.iter().map(|v| v.norm_sqr()).sum();
                assert!((s - (p as f64 - 2.0)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn kcirc_prime_cases() {
        let a = chi("11:3");
        let b = chi("11:7");
        for m in 0..11 {
            let ka = k_chi_point(&a, m).unwrap();
            let kb = k_chi_point(&b, m).unwrap();
            assert!((k_circ(&a, &b, m).unwrap() - ka * kb.conj()).norm() < 1e-12);
            assert!((k_circ(&a, &a, m).unwrap() - (ka.norm_sqr() - 1.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn kk_expansion_mod_15() {
        let m = Modulus::new(15).unwrap();
        let chars: Vec<_> = primitive_characters(&m).collect();
        for a in &chars {
            for b in &chars {
                for x in 0..15 {
                    let lhs = k_chi_point(a, x).unwrap() * k_chi_point(b, x).unwrap().conj();
                    assert!((lhs - kk_expansion(a, b, x).unwrap()).norm() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn fourier_t0() {
        let a = chi("7:1");
        let b = chi("7:4");
        let t = fourier_complete(&a, &b).unwrap();
        assert!((t.values[0] + 1.0).norm() < 1e-12);
        // On the diagonal the constant term is Σ|K|² − p = −2.
        let d = fourier_complete(&a, &a).unwrap();
        assert!((d.values[0] + 2.0).norm() < 1e-12);
        assert!(t.max_diff(&fourier_complete_brute(&a, &b).unwrap()) < 1e-10);
    }

    #[test]
    fn correlation_paths_agree() {
        let a = chi("11:2");
        let b = chi("11:5");
        for s in 0..11 {
            let table = correlation_table(&a, &b, s).unwrap();
            for t in 0..11 {
                assert!((table.get(t) - correlation_sum(&a, &b, s, t).unwrap()).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn errors() {
        let imprimitive = chi("15:0,1");
        assert!(matches!(k_chi(&imprimitive, 1, 1), Err(Error::NotPrimitive(_))));
        let c = chi("15:1,1");
        assert!(matches!(fourier_complete(&c, &c), Err(Error::NotPrime(15))));
        assert!(matches!(k_circ(&c, &chi("21:1,1"), 0), Err(Error::ModulusMismatch(15, 21))));
    }

    #[test]
    fn csv_dump() {
        let t = k_bulk(&chi("5:1")).unwrap();
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("index,re,im\n"));
        assert_eq!(text.lines().count(), 6);
    }
}
