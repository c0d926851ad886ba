//! Dirichlet characters modulo a squarefree integer.
//!
//! A character χ mod q = ∏ p is stored as one exponent per prime: the local
//! component χ_p sends the smallest primitive root g_p to e(e_p/(p−1)).
//! Evaluation is a discrete-log lookup per prime, so every value is an exact
//! product of tabulated roots of unity.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::arith::{self, Modulus};
use crate::error::{Error, Result};

const NO_LOG: u32 = u32::MAX;

/// Per-prime tables: primitive root, discrete logarithms, roots of unity of
/// order p − 1.
#[derive(Debug)]
pub struct PrimeData {
    pub p: u64,
    pub generator: u64,
    dlog: Vec<u32>,
    roots: Vec<Complex64>,
}

impl PrimeData {
    fn build(p: u64) -> Self {
        let generator = arith::primitive_root(p);
        let mut dlog = vec![NO_LOG; p as usize];
        let mut x = 1u64;
        for k in 0..(p - 1) {
            dlog[x as usize] = k as u32;
            x = x * generator % p;
        }
        let order = (p - 1) as f64;
        let roots = (0..p - 1)
            .map(|k| Complex64::from_polar(1.0, std::f64::consts::TAU * k as f64 / order))
            .collect();
        Self { p, generator, dlog, roots }
    }

    /// Discrete log of `r` (nonzero residue mod p) to the base `generator`.
    pub fn dlog(&self, r: u64) -> Option<u64> {
        match self.dlog[(r % self.p) as usize] {
            NO_LOG => None,
            k => Some(k as u64),
        }
    }

    /// e(k/(p−1)).
    pub fn root(&self, k: u64) -> Complex64 {
        self.roots[(k % (self.p - 1)) as usize]
    }
}

/// Shared, lazily built table for the prime `p`. Concurrent first calls
/// may both build the table; only one copy is kept.
pub fn prime_data(p: u64) -> Arc<PrimeData> {
    static CACHE: OnceLock<RwLock<HashMap<u64, Arc<PrimeData>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(d) = cache.read().expect("prime table lock").get(&p) {
        return d.clone();
    }
    let built = Arc::new(PrimeData::build(p));
    cache
        .write()
        .expect("prime table lock")
        .entry(p)
        .or_insert(built)
        .clone()
}

/// A Dirichlet character modulo a squarefree integer.
#[derive(Clone)]
pub struct DirichletCharacter {
    modulus: Modulus,
    exponents: Vec<u64>,
    locals: Vec<Arc<PrimeData>>,
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, other: &Self) -> bool {
        self.modulus.q() == other.modulus.q() && self.exponents == other.exponents
    }
}

impl Eq for DirichletCharacter {}

impl fmt::Debug for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DirichletCharacter({self})")
    }
}

impl DirichletCharacter {
    /// Character with the given local exponents (one per prime of `modulus`,
    /// in increasing prime order).
    pub fn new(modulus: &Modulus, exponents: Vec<u64>) -> Result<Self> {
        if exponents.len() != modulus.omega() {
            return Err(Error::InvalidCharacter(format!(
                "modulus {} has {} prime factors but {} exponents were given",
                modulus.q(),
                modulus.omega(),
                exponents.len()
            )));
        }
        for (&p, &e) in modulus.primes().iter().zip(&exponents) {
            if e >= p - 1 {
                return Err(Error::InvalidCharacter(format!("exponent {e} out of range for p = {p}")));
            }
        }
        let locals = modulus.primes().iter().map(|&p| prime_data(p)).collect();
        Ok(Self { modulus: modulus.clone(), exponents, locals })
    }

    /// The principal character mod q.
    pub fn principal(modulus: &Modulus) -> Self {
        Self::new(modulus, vec![0; modulus.omega()]).expect("zero exponents are valid")
    }

    pub fn modulus(&self) -> &Modulus {
        &self.modulus
    }

    pub fn q(&self) -> u64 {
        self.modulus.q()
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    /// Exponent of the local component at `p`, if p | q.
    pub fn exponent_at(&self, p: u64) -> Option<u64> {
        let i = self.modulus.primes().iter().position(|&x| x == p)?;
        Some(self.exponents[i])
    }

    /// Primitive iff every local component is nontrivial.
    pub fn is_primitive(&self) -> bool {
        self.exponents.iter().all(|&e| e != 0)
    }

    pub fn is_principal(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    /// Real-valued (order ≤ 2).
    pub fn is_real(&self) -> bool {
        self.modulus
            .primes()
            .iter()
            .zip(&self.exponents)
            .all(|(&p, &e)| (2 * e) % (p - 1) == 0)
    }

    /// χ(n); zero when gcd(n, q) > 1.
    pub fn evaluate(&self, n: i64) -> Complex64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for (local, &e) in self.locals.iter().zip(&self.exponents) {
            let r = arith::rem(n, local.p);
            let Some(k) = local.dlog(r) else {
                return Complex64::new(0.0, 0.0);
            };
            acc *= local.root(e * k);
        }
        acc
    }

    /// Values χ(0), …, χ(q − 1).
    pub fn values(&self) -> Vec<Complex64> {
        let q = self.q();
        let mut out = vec![Complex64::new(1.0, 0.0); q as usize];
        for (local, &e) in self.locals.iter().zip(&self.exponents) {
            let p = local.p;
            let table: Vec<Complex64> = (0..p)
                .map(|r| match local.dlog(r) {
                    Some(k) => local.root(e * k),
                    None => Complex64::new(0.0, 0.0),
                })
                .collect();
            for (n, v) in out.iter_mut().enumerate() {
                *v *= table[(n as u64 % p) as usize];
            }
        }
        out
    }

    /// χ(−1) as ±1.
    pub fn parity(&self) -> i32 {
        // ind(−1) = (p−1)/2, so χ_p(−1) = (−1)^{e_p}.
        let odd = self.exponents.iter().filter(|&&e| e % 2 == 1).count();
        if odd % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn conj(&self) -> Self {
        let exponents = self
            .modulus
            .primes()
            .iter()
            .zip(&self.exponents)
            .map(|(&p, &e)| (p - 1 - e) % (p - 1))
            .collect();
        Self { modulus: self.modulus.clone(), exponents, locals: self.locals.clone() }
    }

    /// Pointwise product of two characters of the same modulus.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        if self.q() != other.q() {
            return Err(Error::ModulusMismatch(self.q(), other.q()));
        }
        let exponents = self
            .modulus
            .primes()
            .iter()
            .zip(self.exponents.iter().zip(&other.exponents))
            .map(|(&p, (&a, &b))| (a + b) % (p - 1))
            .collect();
        Ok(Self { modulus: self.modulus.clone(), exponents, locals: self.locals.clone() })
    }

    /// The character χ·ψ mod q·r induced by characters of coprime moduli.
    pub fn combine(&self, other: &Self) -> Result<Self> {
        if arith::gcd(self.q(), other.q()) != 1 {
            return Err(Error::InvalidArgument(format!(
                "moduli {} and {} are not coprime",
                self.q(),
                other.q()
            )));
        }
        let mut pairs: Vec<(u64, u64)> = self
            .modulus
            .primes()
            .iter()
            .copied()
            .zip(self.exponents.iter().copied())
            .chain(other.modulus.primes().iter().copied().zip(other.exponents.iter().copied()))
            .collect();
        pairs.sort_unstable();
        let primes: Vec<u64> = pairs.iter().map(|x| x.0).collect();
        let modulus = Modulus::from_primes(&primes)?;
        Self::new(&modulus, pairs.into_iter().map(|x| x.1).collect())
    }

    /// χ_[r] = ∏_{p | r} χ_p, a character mod r.
    pub fn restrict(&self, r: u64) -> Result<Self> {
        let sub = self.modulus.restrict(r)?;
        let exponents = sub
            .primes()
            .iter()
            .map(|&p| self.exponent_at(p).expect("p divides q"))
            .collect();
        Self::new(&sub, exponents)
    }

    /// Local component χ_p as a character mod p.
    pub fn component(&self, p: u64) -> Result<Self> {
        self.restrict(p)
    }

    /// Position of this character in the lexicographic enumeration of the
    /// full group (first prime most significant).
    pub fn group_index(&self) -> usize {
        let mut idx = 0usize;
        for (&p, &e) in self.modulus.primes().iter().zip(&self.exponents) {
            idx = idx * (p - 1) as usize + e as usize;
        }
        idx
    }

    /// Inverse of [`group_index`](Self::group_index).
    pub fn from_group_index(modulus: &Modulus, mut idx: usize) -> Result<Self> {
        let mut exponents = vec![0u64; modulus.omega()];
        for (slot, &p) in exponents.iter_mut().zip(modulus.primes()).rev() {
            let d = (p - 1) as usize;
            *slot = (idx % d) as u64;
            idx /= d;
        }
        if idx != 0 {
            return Err(Error::InvalidCharacter(format!("group index out of range for modulus {}", modulus.q())));
        }
        Self::new(modulus, exponents)
    }
}

/// Text form `q:e1,e2,...` (exponents in increasing prime order).
impl fmt::Display for DirichletCharacter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.q())?;
        for (i, e) in self.exponents.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl FromStr for DirichletCharacter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidCharacter(format!("cannot parse {s:?}, expected q:e1,e2,..."));
        let (q, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let q: u64 = q.trim().parse().map_err(|_| bad())?;
        let modulus = Modulus::new(q)?;
        let exponents = if rest.trim().is_empty() {
            Vec::new()
        } else {
            rest.split(',')
                .map(|e| e.trim().parse::<u64>().map_err(|_| bad()))
                .collect::<Result<Vec<_>>>()?
        };
        Self::new(&modulus, exponents)
    }
}

/// Odometer over the exponent lists of a modulus, lexicographic order.
pub struct Characters {
    modulus: Modulus,
    next: Option<Vec<u64>>,
    primitive_only: bool,
}

impl Iterator for Characters {
    type Item = DirichletCharacter;

    fn next(&mut self) -> Option<Self::Item> {
        let current = self.next.take()?;
        let primes = self.modulus.primes();
        let low = if self.primitive_only { 1 } else { 0 };
        let mut succ = current.clone();
        let mut advanced = false;
        for i in (0..succ.len()).rev() {
            if succ[i] + 1 < primes[i] - 1 {
                succ[i] += 1;
                advanced = true;
                break;
            }
            succ[i] = low;
        }
        if advanced {
            self.next = Some(succ);
        }
        Some(DirichletCharacter::new(&self.modulus, current).expect("odometer stays in range"))
    }
}

/// All characters mod q (or only the primitive ones), lexicographic in the
/// exponent lists.
pub fn character_group(modulus: &Modulus, primitive_only: bool) -> Characters {
    let start = if primitive_only {
        if modulus.primes().iter().any(|&p| p == 2) {
            None
        } else {
            Some(vec![1; modulus.omega()])
        }
    } else {
        Some(vec![0; modulus.omega()])
    };
    Characters { modulus: modulus.clone(), next: start, primitive_only }
}

pub fn primitive_characters(modulus: &Modulus) -> Characters {
    character_group(modulus, true)
}

/// Δ(χ, χ′): product of the primes where the local components differ.
pub fn distance(chi: &DirichletCharacter, chi_prime: &DirichletCharacter) -> Result<u64> {
    if chi.q() != chi_prime.q() {
        return Err(Error::ModulusMismatch(chi.q(), chi_prime.q()));
    }
    Ok(chi
        .modulus
        .primes()
        .iter()
        .zip(chi.exponents.iter().zip(&chi_prime.exponents))
        .filter(|(_, (a, b))| a != b)
        .map(|(&p, _)| p)
        .product())
}

/// Two characters of one modulus with their distance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CharacterPair {
    pub chi: DirichletCharacter,
    pub chi_prime: DirichletCharacter,
    pub delta: u64,
}

impl CharacterPair {
    pub fn new(chi: DirichletCharacter, chi_prime: DirichletCharacter) -> Result<Self> {
        let delta = distance(&chi, &chi_prime)?;
        Ok(Self { chi, chi_prime, delta })
    }
}

/// Character transform over the whole group: given `f` indexed by residues
/// mod q, returns `out[χ.group_index()] = Σ_{a mod q} f(a) χ(a)`.
///
/// The sum is a multidimensional DFT over ∏ Z/(p−1) after reindexing the
/// units by discrete logs, so all φ(q) sums cost O(φ(q) log q).
pub fn group_transform(modulus: &Modulus, f: &[Complex64]) -> Vec<Complex64> {
    let q = modulus.q() as usize;
    assert_eq!(f.len(), q, "input must be indexed by residues mod q");
    let locals: Vec<Arc<PrimeData>> = modulus.primes().iter().map(|&p| prime_data(p)).collect();
    let dims: Vec<usize> = modulus.primes().iter().map(|&p| (p - 1) as usize).collect();
    let total: usize = dims.iter().product();
    let mut strides = vec![1usize; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * dims[i + 1];
    }

    let mut grid = vec![Complex64::new(0.0, 0.0); total];
    'residues: for (a, &value) in f.iter().enumerate() {
        let mut idx = 0usize;
        for (local, &stride) in locals.iter().zip(&strides) {
            match local.dlog(a as u64 % local.p) {
                Some(k) => idx += k as usize * stride,
                None => continue 'residues,
            }
        }
        grid[idx] = value;
    }

    let mut planner = FftPlanner::<f64>::new();
    let mut lane = Vec::new();
    for (&dim, &stride) in dims.iter().zip(&strides) {
        if dim < 2 {
            continue;
        }
        let fft = planner.plan_fft_inverse(dim);
        let block = dim * stride;
        lane.resize(dim, Complex64::new(0.0, 0.0));
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                for (k, slot) in lane.iter_mut().enumerate() {
                    *slot = grid[base + k * stride];
                }
                fft.process(&mut lane);
                for (k, v) in lane.iter().enumerate() {
                    grid[base + k * stride] = *v;
                }
            }
        }
    }
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn m(q: u64) -> Modulus {
        Modulus::new(q).unwrap()
    }

    #[test]
    fn group_sizes() {
        assert_eq!(character_group(&m(3), false).count(), 2);
        assert_eq!(primitive_characters(&m(3)).count(), 1);
        assert_eq!(character_group(&m(15), false).count(), 8);
        assert_eq!(primitive_characters(&m(15)).count(), 3);
        assert_eq!(primitive_characters(&m(30)).count(), 0);
        assert_eq!(character_group(&m(1), false).count(), 1);
        assert_eq!(primitive_characters(&m(1)).count(), 1);
    }

    #[test]
    fn primitive_count_matches_induced_moduli_scan() {
        // χ is imprimitive iff it factors through some proper divisor; count
        // characters whose values are periodic mod a proper divisor d.
        for q in [15u64, 21, 35, 105] {
            let md = m(q);
            let divisors: Vec<u64> = md.divisors().into_iter().filter(|&d| d < q).collect();
            let mut primitive = 0;
            for chi in character_group(&md, false) {
                let vals = chi.values();
                let induced = divisors.iter().any(|&d| {
                    (0..q).all(|a| {
                        (0..q).all(|b| {
                            arith::gcd(a * b, q) != 1 || (a % d != b % d) || (vals[a as usize] - vals[b as usize]).norm() < 1e-12
                        })
                    })
                });
                if !induced {
                    primitive += 1;
                    assert!(chi.is_primitive());
                } else {
                    assert!(!chi.is_primitive());
                }
            }
            assert_eq!(primitive, md.primitive_count());
        }
    }

    #[test]
    fn evaluation_examples() {
        let md = m(15);
        for chi in character_group(&md, false) {
            assert_abs_diff_eq!(chi.evaluate(1).re, 1.0, epsilon = 1e-15);
            assert_eq!(chi.evaluate(5), Complex64::new(0.0, 0.0));
        }
        // Quadratic character mod 5 is the Legendre symbol: (2|5) = −1.
        let quad = DirichletCharacter::new(&m(5), vec![2]).unwrap();
        assert!(quad.is_real());
        assert_abs_diff_eq!(quad.evaluate(2).re, -1.0, epsilon = 1e-15);
        for n in 1..5i64 {
            let legendre = if [1, 4].contains(&n) { 1.0 } else { -1.0 };
            assert_abs_diff_eq!(quad.evaluate(n).re, legendre, epsilon = 1e-15);
        }
    }

    #[test]
    fn parity_examples() {
        let principal = DirichletCharacter::principal(&m(35));
        assert_eq!(principal.parity(), 1);
        let quad3 = DirichletCharacter::new(&m(3), vec![1]).unwrap();
        assert_eq!(quad3.parity(), -1);
        for chi in character_group(&m(105), false) {
            let direct = chi.evaluate(104);
            assert_abs_diff_eq!(direct.re, chi.parity() as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn distance_and_restrict() {
        let md = m(15);
        let a = DirichletCharacter::new(&md, vec![1, 2]).unwrap();
        let b = DirichletCharacter::new(&md, vec![0, 2]).unwrap();
        assert_eq!(distance(&a, &a).unwrap(), 1);
        assert_eq!(distance(&a, &b).unwrap(), 3);
        assert!(distance(&a, &DirichletCharacter::principal(&m(21))).is_err());
        assert_eq!(a.restrict(15).unwrap(), a);
        assert!(a.restrict(1).unwrap().is_principal());
        assert!(a.restrict(7).is_err());
        let a3 = a.restrict(3).unwrap();
        for n in 0..45i64 {
            if n % 3 != 0 {
                // a = a_3 · a_5, so a(n) / a_5(n) = a_3(n).
                let a5 = a.restrict(5).unwrap().evaluate(n);
                if a5.norm() > 0.5 {
                    let lhs = a.evaluate(n) / a5;
                    assert!((lhs - a3.evaluate(n)).norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn text_round_trip() {
        let chi: DirichletCharacter = "105:1,3,5".parse().unwrap();
        assert_eq!(chi.to_string(), "105:1,3,5");
        assert_eq!("1:".parse::<DirichletCharacter>().unwrap().q(), 1);
        assert!("105:1,3".parse::<DirichletCharacter>().is_err());
        assert!("12:1".parse::<DirichletCharacter>().is_err());
        assert!("7:6".parse::<DirichletCharacter>().is_err());
    }

    #[test]
    fn group_index_round_trip() {
        let md = m(105);
        for (i, chi) in character_group(&md, false).enumerate() {
            assert_eq!(chi.group_index(), i);
            assert_eq!(DirichletCharacter::from_group_index(&md, i).unwrap(), chi);
        }
    }

    #[test]
    fn combine_matches_product() {
        let a = DirichletCharacter::new(&m(5), vec![1]).unwrap();
        let b = DirichletCharacter::new(&m(21), vec![1, 4]).unwrap();
        let c = a.combine(&b).unwrap();
        assert_eq!(c.to_string(), "105:1,1,4");
        for n in 0..210i64 {
            assert!((c.evaluate(n) - a.evaluate(n) * b.evaluate(n)).norm() < 1e-12);
        }
    }

    #[test]
    fn transform_matches_direct_sums() {
        let md = m(105);
        let f: Vec<Complex64> = (0..105).map(|a| Complex64::new((a as f64).sin(), (a as f64 * 0.3).cos())).collect();
        let t = group_transform(&md, &f);
        for chi in character_group(&md, false) {
            let direct: Complex64 = (0..105).map(|a| f[a] * chi.evaluate(a as i64)).sum();
            assert!((t[chi.group_index()] - direct).norm() < 1e-10);
        }
    }
}
