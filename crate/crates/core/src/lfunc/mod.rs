//! Central values L(1/2, χ).
//!
//! Two independent evaluations: the Hurwitz formula
//! L(1/2, χ) = q^{−1/2} Σ_{a≤q} χ(a) ζ(1/2, a/q), and a smoothed Dirichlet
//! series cut into dyadic blocks (see [`afe`]). Each has a single-character
//! path and a bulk path that produces every character mod q at once through
//! [`group_transform`].

pub mod afe;
pub mod hurwitz;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::arith::{self, Modulus};
use crate::characters::{group_transform, primitive_characters, DirichletCharacter};
use crate::error::{Error, Result};
use crate::incomplete::epsilon_factor;

pub use afe::WeightFunction;
pub use hurwitz::{hurwitz_zeta, hurwitz_zeta_bounded, hurwitz_zeta_cutoff, HurwitzValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum LMethod {
    Hurwitz,
    Afe,
}

impl LMethod {
    pub fn name(self) -> &'static str {
        match self {
            LMethod::Hurwitz => "hurwitz",
            LMethod::Afe => "afe",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CentralValue {
    pub chi: DirichletCharacter,
    pub value: Complex64,
    pub method: LMethod,
    pub abs_error_estimate: f64,
}

impl CentralValue {
    pub const CSV_HEADER: [&'static str; 7] = ["q", "character_id", "re_l", "im_l", "abs_l", "method", "err_est"];

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.chi.q().to_string(),
            self.chi.to_string(),
            self.value.re.to_string(),
            self.value.im.to_string(),
            self.value.norm().to_string(),
            self.method.name().to_string(),
            self.abs_error_estimate.to_string(),
        ]
    }
}

const HALF: Complex64 = Complex64::new(0.5, 0.0);

fn require_primitive(chi: &DirichletCharacter) -> Result<()> {
    if chi.is_primitive() {
        Ok(())
    } else {
        Err(Error::NotPrimitive(chi.to_string()))
    }
}

fn require_nontrivial_modulus(q: u64) -> Result<()> {
    if q < 2 {
        return Err(Error::InvalidArgument("the smoothed series needs q > 1".into()));
    }
    Ok(())
}

/// Unit roundoff scaled by a term count.
fn roundoff(magnitude: f64, terms: f64) -> f64 {
    f64::EPSILON * magnitude * (1.0 + terms.log2().max(0.0))
}

/// ζ(1/2, a/q) for a = 0..q (entry 0 unused, set to zero), with the summed
/// remainder bounds.
fn hurwitz_table(q: u64) -> Result<(Vec<Complex64>, f64)> {
    let mut table = vec![Complex64::new(0.0, 0.0); q as usize];
    let mut tail = 0.0;
    for a in 1..q {
        if arith::gcd(a, q) != 1 {
            continue;
        }
        let h = hurwitz_zeta_bounded(HALF, a as f64 / q as f64)?;
        table[a as usize] = h.value;
        tail += h.tail_bound;
    }
    Ok((table, tail))
}

/// L(1/2, χ) by one evaluation path, chosen by `method`.
pub fn l_half(chi: &DirichletCharacter, method: LMethod) -> Result<CentralValue> {
    require_primitive(chi)?;
    let (value, abs_error_estimate) = match method {
        LMethod::Hurwitz => l_half_hurwitz(chi)?,
        LMethod::Afe => l_half_afe(chi)?,
    };
    Ok(CentralValue { chi: chi.clone(), value, method, abs_error_estimate })
}

fn l_half_hurwitz(chi: &DirichletCharacter) -> Result<(Complex64, f64)> {
    let q = chi.q();
    if q == 1 {
        let h = hurwitz_zeta_bounded(HALF, 1.0)?;
        return Ok((h.value, h.tail_bound + roundoff(h.value.norm(), 16.0)));
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut tail = 0.0;
    let mut mag = 0.0;
    for a in 1..q {
        let c = chi.evaluate(a as i64);
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let h = hurwitz_zeta_bounded(HALF, a as f64 / q as f64)?;
        sum += c * h.value;
        tail += h.tail_bound;
        mag += h.value.norm();
    }
    let scale = (q as f64).sqrt();
    Ok((sum / scale, (tail + roundoff(mag, q as f64)) / scale))
}

/// Error estimate from the last two blocks: |b_J| is the change from halving
/// the series length, and the ratio |b_J/b_{J−1}| extrapolates one step.
fn afe_error(last: Complex64, previous: Complex64, rounding: f64) -> f64 {
    let (a, b) = (last.norm(), previous.norm());
    let ratio = if b > 0.0 { (a / b).min(1.0) } else { 1.0 };
    a * ratio + rounding
}

fn l_half_afe(chi: &DirichletCharacter) -> Result<(Complex64, f64)> {
    let blocks = afe_blocks(chi)?;
    let value: Complex64 = blocks.blocks.iter().map(|b| b.value).sum();
    let k = blocks.blocks.len();
    let x = (1u64 << blocks.cutoff_exponent) as f64;
    let err = afe_error(blocks.blocks[k - 1].value, blocks.blocks[k - 2].value, roundoff(2.0 * x.sqrt(), x));
    Ok((value, err))
}

/// One dyadic block N^{−1/2} Σ χ(n) V_N(n).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AfeBlock {
    pub n: u64,
    pub parity: i32,
    pub value: Complex64,
}

impl AfeBlock {
    /// B(N) = |block|².
    pub fn energy(&self) -> f64 {
        self.value.norm_sqr()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AfeBlocks {
    pub q: u64,
    pub cutoff_exponent: u32,
    pub support_limit: f64,
    pub blocks: Vec<AfeBlock>,
}

/// Recorded constant for |L(1/2,χ)|² ≤ C · log q · Σ_N B(N).
pub const AFE_BLOCK_CONSTANT: f64 = 8.0;

impl AfeBlocks {
    pub fn total_energy(&self) -> f64 {
        self.blocks.iter().map(AfeBlock::energy).sum()
    }

    pub fn value(&self) -> Complex64 {
        self.blocks.iter().map(|b| b.value).sum()
    }

    /// |L|² / (log q · Σ B(N)).
    pub fn inequality_ratio(&self) -> f64 {
        self.value().norm_sqr() / ((self.q as f64).ln() * self.total_energy())
    }
}

/// Dyadic blocks N = 2, 4, ..., X = 2^J with X ≤ 4q^{1+ε}.
pub fn afe_blocks(chi: &DirichletCharacter) -> Result<AfeBlocks> {
    require_primitive(chi)?;
    let q = chi.q();
    require_nontrivial_modulus(q)?;
    let big_j = afe::cutoff_exponent(q);
    let x = 1u64 << big_j;
    let table = chi.values();
    let mut sums = vec![Complex64::new(0.0, 0.0); big_j as usize + 1];
    for n in 1..x {
        let c = table[(n % q) as usize];
        if c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let nf = n as f64;
        let base = c / nf.sqrt();
        let k = 63 - n.leading_zeros();
        for j in [k + 1, k + 2] {
            if j <= big_j {
                let w = afe::partition_weight(j, nf);
                if w != 0.0 {
                    sums[j as usize] += base * w;
                }
            }
        }
    }
    let parity = chi.parity();
    let blocks = (1..=big_j)
        .map(|j| AfeBlock { n: 1 << j, parity, value: sums[j as usize] })
        .collect();
    Ok(AfeBlocks { q, cutoff_exponent: big_j, support_limit: afe::support_limit(q), blocks })
}

/// L(1/2, χ) for every character mod q, indexed by
/// [`DirichletCharacter::group_index`]. Entries for imprimitive characters
/// are the corresponding sums but are not central values of primitive
/// L-functions.
#[derive(Debug, Clone, PartialEq)]
pub struct LTable {
    pub modulus: Modulus,
    pub method: LMethod,
    pub values: Vec<Complex64>,
    pub errors: Vec<f64>,
}

impl LTable {
    pub fn new(modulus: &Modulus, method: LMethod) -> Result<Self> {
        let q = modulus.q();
        if q == 1 {
            if method == LMethod::Afe {
                require_nontrivial_modulus(q)?;
            }
            let v = l_half(&DirichletCharacter::principal(modulus), method)?;
            return Ok(Self { modulus: modulus.clone(), method, values: vec![v.value], errors: vec![v.abs_error_estimate] });
        }
        let scale = (q as f64).sqrt();
        let (values, errors) = match method {
            LMethod::Hurwitz => {
                let (table, tail) = hurwitz_table(q)?;
                let mag: f64 = table.iter().map(|z| z.norm()).sum();
                let err = (tail + roundoff(mag, q as f64)) / scale;
                let values: Vec<Complex64> = group_transform(modulus, &table).into_iter().map(|z| z / scale).collect();
                let n = values.len();
                (values, vec![err; n])
            }
            LMethod::Afe => {
                let big_j = afe::cutoff_exponent(q);
                let x = 1u64 << big_j;
                let mut full = vec![Complex64::new(0.0, 0.0); q as usize];
                let mut last = vec![Complex64::new(0.0, 0.0); q as usize];
                let mut prev = vec![Complex64::new(0.0, 0.0); q as usize];
                for n in 1..x {
                    let r = (n % q) as usize;
                    let nf = n as f64;
                    let base = 1.0 / nf.sqrt();
                    let w = if n <= x / 2 { 1.0 } else { afe::cutoff_weight(big_j, nf) };
                    full[r].re += base * w;
                    if n > x / 4 {
                        last[r].re += base * afe::partition_weight(big_j, nf);
                    }
                    if n > x / 8 && n < x / 2 {
                        prev[r].re += base * afe::partition_weight(big_j - 1, nf);
                    }
                }
                let values = group_transform(modulus, &full);
                let last = group_transform(modulus, &last);
                let prev = group_transform(modulus, &prev);
                let rounding = roundoff(2.0 * (x as f64).sqrt(), x as f64);
                let errors = last.iter().zip(&prev).map(|(&a, &b)| afe_error(a, b, rounding)).collect();
                (values, errors)
            }
        };
        Ok(Self { modulus: modulus.clone(), method, values, errors })
    }

    pub fn get(&self, chi: &DirichletCharacter) -> Result<CentralValue> {
        if chi.q() != self.modulus.q() {
            return Err(Error::ModulusMismatch(self.modulus.q(), chi.q()));
        }
        require_primitive(chi)?;
        let i = chi.group_index();
        Ok(CentralValue { chi: chi.clone(), value: self.values[i], method: self.method, abs_error_estimate: self.errors[i] })
    }

    /// Central values of the primitive characters, in enumeration order.
    pub fn primitive(&self) -> Vec<CentralValue> {
        primitive_characters(&self.modulus)
            .map(|chi| {
                let i = chi.group_index();
                CentralValue { chi, value: self.values[i], method: self.method, abs_error_estimate: self.errors[i] }
            })
            .collect()
    }
}

/// L(1/2, χ) for every primitive χ mod q by the bulk path.
pub fn central_values(modulus: &Modulus, method: LMethod) -> Result<Vec<CentralValue>> {
    if modulus.primitive_count() == 0 {
        return Ok(Vec::new());
    }
    Ok(LTable::new(modulus, method)?.primitive())
}

/// S₂^± split by the parity of χ₁ψ₁.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShortSecondMoment {
    pub q: u64,
    pub q1: u64,
    pub plus: Option<f64>,
    pub minus: Option<f64>,
    pub total: f64,
    pub terms: usize,
}

fn check_split(q1: u64, psi1: &DirichletCharacter) -> Result<Modulus> {
    require_primitive(psi1)?;
    let big_q1 = psi1.q();
    let q = q1.checked_mul(big_q1).ok_or(Error::Overflow("q1 * Q1"))?;
    if arith::gcd(q1, big_q1) != 1 {
        return Err(Error::BadSplit { q, q1, q2: big_q1 });
    }
    Modulus::new(q1)?;
    Modulus::new(q)
}

/// Σ over primitive χ₁ mod q₁ of |L(1/2, χ₁ψ₁)|², split by χ₁ψ₁(−1) when
/// `parity_split` is set.
pub fn short_second_moment(
    q1: u64,
    psi1: &DirichletCharacter,
    parity_split: bool,
    method: LMethod,
) -> Result<ShortSecondMoment> {
    let modulus = check_split(q1, psi1)?;
    let table = LTable::new(&modulus, method)?;
    short_second_moment_in(&table, q1, psi1, parity_split)
}

/// As [`short_second_moment`], reading values from a precomputed table
/// for the modulus q₁Q₁.
pub fn short_second_moment_in(
    table: &LTable,
    q1: u64,
    psi1: &DirichletCharacter,
    parity_split: bool,
) -> Result<ShortSecondMoment> {
    let modulus = check_split(q1, psi1)?;
    if modulus.q() != table.modulus.q() {
        return Err(Error::ModulusMismatch(table.modulus.q(), modulus.q()));
    }
    let mut plus = Vec::new();
    let mut minus = Vec::new();
    for chi1 in primitive_characters(&Modulus::new(q1)?) {
        let chi = chi1.combine(psi1)?;
        let v = table.get(&chi)?.value.norm_sqr();
        if chi.parity() == 1 {
            plus.push(v);
        } else {
            minus.push(v);
        }
    }
    let (p, m) = (pairwise_sum(&plus), pairwise_sum(&minus));
    Ok(ShortSecondMoment {
        q: modulus.q(),
        q1,
        plus: parity_split.then_some(p),
        minus: parity_split.then_some(m),
        total: p + m,
        terms: plus.len() + minus.len(),
    })
}

/// Sum with a fixed balanced tree, so the result depends only on the order
/// of the input.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        n => {
            let (a, b) = xs.split_at(n / 2);
            pairwise_sum(a) + pairwise_sum(b)
        }
    }
}

/// Statement-level comparison of S₂(ψ₁) with d(q) log q · (q₁ + q^{1/2}).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpenupAudit {
    pub q: u64,
    pub q1: u64,
    pub s2: f64,
    pub bound: f64,
    pub ratio: f64,
    /// q₁ ≤ q^{0.45}.
    pub hypothesis_holds: bool,
}

pub const OPENUP_EXPONENT: f64 = 0.45;

pub fn openup_audit(q1: u64, psi1: &DirichletCharacter, method: LMethod) -> Result<OpenupAudit> {
    let s = short_second_moment(q1, psi1, false, method)?;
    let q = s.q as f64;
    let bound = epsilon_factor(s.q) * (q1 as f64 + q.sqrt());
    Ok(OpenupAudit {
        q: s.q,
        q1,
        s2: s.total,
        bound,
        ratio: s.total / bound,
        hypothesis_holds: (q1 as f64) <= q.powf(OPENUP_EXPONENT),
    })
}
