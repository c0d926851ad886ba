//! Arithmetic of squarefree smooth moduli.
//!
//! A [`Modulus`] carries its full prime factorization, so every routine that
//! needs the local structure of `q` (characters, twisted multiplicativity,
//! CRT gathers) reads it from here instead of refactoring.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A squarefree modulus together with its prime factorization.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Modulus {
    q: u64,
    primes: Vec<u64>,
}

impl Modulus {
    /// Factor `n` and wrap it; fails when `n` has a square factor.
    pub fn new(n: u64) -> Result<Self> {
        factor_squarefree(n)
    }

    /// Build from a list of distinct primes (any order).
    pub fn from_primes(primes: &[u64]) -> Result<Self> {
        let mut ps = primes.to_vec();
        ps.sort_unstable();
        let mut q: u64 = 1;
        for w in ps.windows(2) {
            if w[0] == w[1] {
                return Err(Error::NotSquarefree { n: ps.iter().product(), p: w[0] });
            }
        }
        for &p in &ps {
            if !is_prime(p) {
                return Err(Error::InvalidArgument(format!("{p} is not prime")));
            }
            q = q.checked_mul(p).ok_or(Error::Overflow("modulus product"))?;
        }
        Ok(Self { q, primes: ps })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    /// Prime divisors in increasing order.
    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    /// Largest prime divisor (1 for the trivial modulus).
    pub fn smooth_bound(&self) -> u64 {
        self.primes.last().copied().unwrap_or(1)
    }

    pub fn is_smooth(&self, y: u64) -> bool {
        self.smooth_bound() <= y
    }

    /// Number of prime factors, ω(q).
    pub fn omega(&self) -> usize {
        self.primes.len()
    }

    /// Divisor count d(q) = 2^ω(q).
    pub fn divisor_count(&self) -> u64 {
        1u64 << self.primes.len()
    }

    /// Euler's φ(q).
    pub fn phi(&self) -> u64 {
        self.primes.iter().map(|p| p - 1).product()
    }

    /// Number of primitive characters, ∏(p − 2).
    pub fn primitive_count(&self) -> u64 {
        self.primes.iter().map(|p| p - 2).product()
    }

    pub fn is_prime(&self) -> bool {
        self.primes.len() == 1
    }

    pub fn divides(&self, r: u64) -> bool {
        r != 0 && self.q % r == 0
    }

    /// All divisors, ascending.
    pub fn divisors(&self) -> Vec<u64> {
        let mut out = vec![1u64];
        for &p in &self.primes {
            let n = out.len();
            for i in 0..n {
                out.push(out[i] * p);
            }
        }
        out.sort_unstable();
        out
    }

    /// The sub-modulus generated by the primes of `self` dividing `r`.
    pub fn restrict(&self, r: u64) -> Result<Modulus> {
        if !self.divides(r) {
            return Err(Error::NotADivisor { r, q: self.q });
        }
        Ok(Modulus {
            q: r,
            primes: self.primes.iter().copied().filter(|p| r % p == 0).collect(),
        })
    }
}

impl fmt::Display for Modulus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.q)
    }
}

/// A splitting q = q1·q2·q3 into pairwise coprime parts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    parts: (u64, u64, u64),
    parent: Modulus,
}

impl Factorization {
    /// Validate an explicit split of `parent`.
    pub fn new(parent: &Modulus, q1: u64, q2: u64, q3: u64) -> Result<Self> {
        let bad = || Error::BadSplit { q: parent.q(), q1, q2 };
        let prod = q1
            .checked_mul(q2)
            .and_then(|x| x.checked_mul(q3))
            .ok_or_else(bad)?;
        if prod != parent.q() || gcd(q1, q2) != 1 || gcd(q1, q3) != 1 || gcd(q2, q3) != 1 {
            return Err(bad());
        }
        Ok(Self { parts: (q1, q2, q3), parent: parent.clone() })
    }

    pub fn parts(&self) -> (u64, u64, u64) {
        self.parts
    }

    pub fn q1(&self) -> u64 {
        self.parts.0
    }

    pub fn q2(&self) -> u64 {
        self.parts.1
    }

    pub fn q3(&self) -> u64 {
        self.parts.2
    }

    /// Q1 = q2·q3, the cofactor of q1.
    pub fn cofactor(&self) -> u64 {
        self.parts.1 * self.parts.2
    }

    pub fn parent(&self) -> &Modulus {
        &self.parent
    }
}

pub fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n < 4 {
        return true;
    }
    if n % 2 == 0 {
        return false;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Sieve of Eratosthenes, primes ≤ n.
pub fn primes_up_to(n: u64) -> Vec<u64> {
    if n < 2 {
        return Vec::new();
    }
    let n = n as usize;
    let mut composite = vec![false; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if !composite[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                composite[j] = true;
                j += i;
            }
        }
    }
    out
}

/// Prime factorization with multiplicities, by trial division.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut d = 2u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            let mut e = 0;
            while n % d == 0 {
                n /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

/// Factor a squarefree integer.
pub fn factor_squarefree(n: u64) -> Result<Modulus> {
    if n == 0 {
        return Err(Error::ZeroModulus);
    }
    let mut primes = Vec::new();
    for (p, e) in factorize(n) {
        if e > 1 {
            return Err(Error::NotSquarefree { n, p });
        }
        primes.push(p);
    }
    Ok(Modulus { q: n, primes })
}

/// Möbius function of an arbitrary positive integer.
pub fn mobius(n: u64) -> i64 {
    let f = factorize(n);
    if f.iter().any(|&(_, e)| e > 1) {
        0
    } else if f.len() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Euler's totient of an arbitrary positive integer.
pub fn euler_phi(n: u64) -> u64 {
    factorize(n)
        .into_iter()
        .fold(n, |acc, (p, _)| acc / p * (p - 1))
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let m128 = m as u128;
    let mut acc: u128 = 1;
    let mut b = (base % m) as u128;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * b % m128;
        }
        b = b * b % m128;
        exp >>= 1;
    }
    base = acc as u64;
    base
}

/// Least non-negative residue of `a` modulo `m`.
pub fn rem(a: i64, m: u64) -> u64 {
    (a as i128).rem_euclid(m as i128) as u64
}

/// Inverse of `a` modulo `m`, in `[0, m)`.
pub fn mod_inverse(a: i64, m: u64) -> Result<u64> {
    if m == 0 {
        return Err(Error::ZeroModulus);
    }
    let (mut old_r, mut r) = (rem(a, m) as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    if old_r != 1 && m != 1 {
        return Err(Error::NotCoprime { a, m });
    }
    Ok(old_s.rem_euclid(m as i128) as u64)
}

/// Smallest primitive root modulo the prime `p`.
pub fn primitive_root(p: u64) -> u64 {
    if p == 2 {
        return 1;
    }
    let order = p - 1;
    let factors: Vec<u64> = factorize(order).into_iter().map(|(r, _)| r).collect();
    (2..p)
        .find(|&g| factors.iter().all(|&r| pow_mod(g, order / r, p) != 1))
        .expect("every prime has a primitive root")
}

/// All squarefree `y`-smooth `q ≤ limit` with at least `min_prime_factors`
/// prime factors, ascending.
pub fn enumerate_smooth_squarefree(limit: u64, y: u64, min_prime_factors: usize) -> Vec<Modulus> {
    let primes = primes_up_to(y.min(limit));
    let mut out = Vec::new();
    let mut stack: Vec<u64> = Vec::new();
    fn walk(
        primes: &[u64],
        start: usize,
        current: u64,
        limit: u64,
        min: usize,
        stack: &mut Vec<u64>,
        out: &mut Vec<Modulus>,
    ) {
        if current > 1 && stack.len() >= min {
            out.push(Modulus { q: current, primes: stack.clone() });
        }
        for i in start..primes.len() {
            let Some(next) = current.checked_mul(primes[i]) else { break };
            if next > limit {
                break;
            }
            stack.push(primes[i]);
            walk(primes, i + 1, next, limit, min, stack, out);
            stack.pop();
        }
    }
    walk(&primes, 0, 1, limit, min_prime_factors, &mut stack, &mut out);
    out.sort_unstable_by_key(|m| m.q);
    out
}

/// Which pair of windows [`choose_factorization`] targets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum FactorMode {
    /// q1 ∈ [V²q^{−2δ}, V²q^{−δ}], q2 ∈ [V⁴q^{−2δ}, V⁴q^{−δ}].
    Twelfth,
    /// q1 as above, q2 ∈ [Wq^{−δ}, W] with W = min(V²⁴q^{−3−12δ}, q/q1).
    Sixth,
}

/// A closed window on the log scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogWindow {
    pub lo: f64,
    pub hi: f64,
}

impl LogWindow {
    const SLACK: f64 = 1e-12;

    fn contains(&self, x: f64) -> bool {
        x >= self.lo - Self::SLACK && x <= self.hi + Self::SLACK
    }

    fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

/// The q1 window of the factorization chooser, in logs.
pub fn q1_window(q: u64, v: f64, delta: f64) -> LogWindow {
    let lq = (q as f64).ln();
    let lv = v.ln();
    LogWindow { lo: 2.0 * lv - 2.0 * delta * lq, hi: 2.0 * lv - delta * lq }
}

/// The q2 window given a chosen q1, in logs.
pub fn q2_window(q: u64, q1: u64, v: f64, delta: f64, mode: FactorMode) -> LogWindow {
    let lq = (q as f64).ln();
    let lv = v.ln();
    match mode {
        FactorMode::Twelfth => LogWindow { lo: 4.0 * lv - 2.0 * delta * lq, hi: 4.0 * lv - delta * lq },
        FactorMode::Sixth => {
            let lw = (24.0 * lv - 3.0 * lq - 12.0 * delta * lq).min(lq - (q1 as f64).ln());
            LogWindow { lo: lw - delta * lq, hi: lw }
        }
    }
}

fn half_products(primes: &[u64]) -> Result<Vec<(f64, u64)>> {
    let mut out = vec![(0.0, 1u64)];
    for &p in primes {
        let n = out.len();
        for i in 0..n {
            let prod = out[i].1.checked_mul(p).ok_or(Error::Overflow("subset product"))?;
            out.push(((prod as f64).ln(), prod));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    Ok(out)
}

/// Subset products of `primes` whose logarithm lies in `window`, sorted by
/// distance to the window's geometric midpoint (ties: smaller product).
/// Meet-in-the-middle over the two halves of the prime list.
pub fn subset_products_in_window(primes: &[u64], window: LogWindow) -> Result<Vec<u64>> {
    let (left, right) = primes.split_at(primes.len() / 2);
    let a = half_products(left)?;
    let b = half_products(right)?;
    let mut hits = Vec::new();
    for &(la, pa) in &a {
        let lo = window.lo - LogWindow::SLACK - la;
        let hi = window.hi + LogWindow::SLACK - la;
        let start = b.partition_point(|x| x.0 < lo);
        for &(lb, pb) in b[start..].iter().take_while(|x| x.0 <= hi) {
            if window.contains(la + lb) {
                let prod = pa.checked_mul(pb).ok_or(Error::Overflow("subset product"))?;
                hits.push(prod);
            }
        }
    }
    let mid = window.mid();
    hits.sort_by(|&x, &y| {
        let dx = ((x as f64).ln() - mid).abs();
        let dy = ((y as f64).ln() - mid).abs();
        dx.total_cmp(&dy).then(x.cmp(&y))
    });
    hits.dedup();
    Ok(hits)
}

/// Subset product whose logarithm is nearest to `target` (for diagnostics).
fn nearest_subset_product(primes: &[u64], target: f64) -> Result<u64> {
    let (left, right) = primes.split_at(primes.len() / 2);
    let a = half_products(left)?;
    let b = half_products(right)?;
    let mut best = (f64::INFINITY, 1u64);
    for &(la, pa) in &a {
        let idx = b.partition_point(|x| x.0 < target - la);
        for j in [idx.saturating_sub(1), idx.min(b.len() - 1)] {
            let d = (la + b[j].0 - target).abs();
            if d < best.0 {
                best = (d, pa * b[j].1);
            }
        }
    }
    Ok(best.1)
}

/// Pick q = q1·q2·q3 with q1, q2 in the target windows for threshold `v`.
///
/// Requires `m` to be q^δ-smooth and `v > q^δ`. Candidates for q1 are tried
/// in order of closeness to the window midpoint; the first one admitting a
/// q2 among the remaining primes wins.
pub fn choose_factorization(m: &Modulus, v: f64, delta: f64, mode: FactorMode) -> Result<Factorization> {
    if !(delta > 0.0) || !(v > 0.0) {
        return Err(Error::InvalidArgument(format!("need V > 0 and delta > 0, got V = {v}, delta = {delta}")));
    }
    let q = m.q();
    let bound = (q as f64).powf(delta);
    if m.smooth_bound() as f64 > bound {
        return Err(Error::NotSmooth { q, y: bound.floor() as u64 });
    }
    if v <= bound {
        return Err(Error::ThresholdTooSmall { v, bound });
    }
    let w1 = q1_window(q, v, delta);
    let q1_candidates = subset_products_in_window(m.primes(), w1)?;
    for &q1 in &q1_candidates {
        let rest: Vec<u64> = m.primes().iter().copied().filter(|p| q1 % p != 0).collect();
        let w2 = q2_window(q, q1, v, delta, mode);
        if let Some(&q2) = subset_products_in_window(&rest, w2)?.first() {
            return Factorization::new(m, q1, q2, q / q1 / q2);
        }
    }
    let detail = match q1_candidates.first() {
        None => format!(
            "q1 window [{:.4}, {:.4}] empty; nearest subset product {}",
            w1.lo.exp(),
            w1.hi.exp(),
            nearest_subset_product(m.primes(), w1.mid())?
        ),
        Some(&q1) => {
            let rest: Vec<u64> = m.primes().iter().copied().filter(|p| q1 % p != 0).collect();
            let w2 = q2_window(q, q1, v, delta, mode);
            format!(
                "no q2 in [{:.4}, {:.4}] for any admissible q1; nearest q2 for q1 = {q1} is {}",
                w2.lo.exp(),
                w2.hi.exp(),
                nearest_subset_product(&rest, w2.mid())?
            )
        }
    };
    Err(Error::NoFactorization { q, detail })
}
