//! Moments of central values, large-value counts and exponent audits.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{choose_factorization, FactorMode, Factorization, Modulus};
use crate::characters::{primitive_characters, DirichletCharacter};
use crate::error::{Error, Result};
use crate::incomplete::epsilon_factor;
use crate::lfunc::{pairwise_sum, short_second_moment_in, LMethod, LTable};

/// Σ* |L(1/2,χ)|^{2k} over primitive χ mod q, keyed by 2k.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MomentReport {
    pub q: u64,
    pub method: LMethod,
    pub char_count: usize,
    pub moments: BTreeMap<u32, f64>,
}

impl MomentReport {
    /// (m_{2k} / count)^{1/2k} per exponent.
    pub fn power_means(&self) -> Vec<(u32, f64)> {
        let n = self.char_count.max(1) as f64;
        self.moments.iter().map(|(&e, &m)| (e, (m / n).powf(1.0 / e as f64))).collect()
    }

    /// Power means nondecreasing in the exponent (up to rounding).
    pub fn power_means_monotone(&self) -> bool {
        self.power_means().windows(2).all(|w| w[1].1 >= w[0].1 * (1.0 - 1e-12))
    }
}

fn check_exponents(exponents: &[u32]) -> Result<()> {
    match exponents.iter().find(|&&e| e == 0 || e % 2 == 1) {
        Some(e) => Err(Error::InvalidArgument(format!("moment exponents must be positive and even, got {e}"))),
        None => Ok(()),
    }
}

/// |L(1/2,χ)| for every primitive χ, in enumeration order.
pub fn central_abs(m: &Modulus, method: LMethod) -> Result<Vec<f64>> {
    if m.primitive_count() == 0 {
        return Ok(Vec::new());
    }
    Ok(LTable::new(m, method)?.primitive().iter().map(|v| v.value.norm()).collect())
}

/// Σ |x|^e with a fixed reduction tree.
pub fn power_sum(abs: &[f64], exponent: u32) -> f64 {
    let terms: Vec<f64> = abs.iter().map(|a| a.powi(exponent as i32)).collect();
    pairwise_sum(&terms)
}

pub fn moments_of(q: u64, abs: &[f64], exponents: &[u32], method: LMethod) -> Result<MomentReport> {
    check_exponents(exponents)?;
    Ok(MomentReport {
        q,
        method,
        char_count: abs.len(),
        moments: exponents.iter().map(|&e| (e, power_sum(abs, e))).collect(),
    })
}

pub fn moment_scan(m: &Modulus, exponents: &[u32], method: LMethod) -> Result<MomentReport> {
    check_exponents(exponents)?;
    moments_of(m.q(), &central_abs(m, method)?, exponents, method)
}

/// Counts #R(V; q) = #{χ primitive : |L(1/2,χ)| > V} over a grid of V.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LargeValueSet {
    pub q: u64,
    pub char_count: usize,
    pub v_grid: Vec<f64>,
    pub counts: Vec<usize>,
    /// Per grid point, the ids of the members (when requested).
    pub members: Option<Vec<Vec<String>>>,
}

impl LargeValueSet {
    pub fn is_nonincreasing(&self) -> bool {
        self.counts.windows(2).all(|w| w[1] <= w[0])
    }
}

fn check_grid(v_grid: &[f64]) -> Result<()> {
    if v_grid.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument("grid values must be positive and finite".into()));
    }
    if v_grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidArgument("grid must be sorted ascending".into()));
    }
    Ok(())
}

/// #{x ∈ abs : x > V} for each V, in one pass over `abs`.
pub fn count_above(abs: &[f64], v_grid: &[f64]) -> Vec<usize> {
    // Each value exceeds exactly the grid points before partition_point.
    let mut hits = vec![0usize; v_grid.len() + 1];
    for &a in abs {
        hits[v_grid.partition_point(|&v| v < a)] += 1;
    }
    let mut counts = vec![0usize; v_grid.len()];
    let mut running = 0;
    for i in (0..v_grid.len()).rev() {
        running += hits[i + 1];
        counts[i] = running;
    }
    counts
}

pub fn large_value_set(m: &Modulus, v_grid: &[f64], method: LMethod, keep_members: bool) -> Result<LargeValueSet> {
    check_grid(v_grid)?;
    let values = if m.primitive_count() == 0 { Vec::new() } else { LTable::new(m, method)?.primitive() };
    let abs: Vec<f64> = values.iter().map(|v| v.value.norm()).collect();
    let members = keep_members.then(|| {
        v_grid
            .iter()
            .map(|&v| values.iter().filter(|c| c.value.norm() > v).map(|c| c.chi.to_string()).collect())
            .collect()
    });
    Ok(LargeValueSet { q: m.q(), char_count: abs.len(), v_grid: v_grid.to_vec(), counts: count_above(&abs, v_grid), members })
}

/// `points` equally spaced values in (0, top].
pub fn uniform_grid(top: f64, points: usize) -> Vec<f64> {
    (1..=points).map(|i| top * i as f64 / points as f64).collect()
}

/// Riemann–Stieltjes sandwich for Σ|L|^{2k} = ∫₀^∞ 2k V^{2k−1} #R(V) dV:
/// on each grid cell #R lies between its values at the two ends.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntegrationCheck {
    pub exponent: u32,
    pub moment: f64,
    pub lower: f64,
    pub upper: f64,
    pub passes: bool,
}

pub fn integration_check(abs: &[f64], v_grid: &[f64], exponent: u32) -> Result<IntegrationCheck> {
    check_grid(v_grid)?;
    check_exponents(&[exponent])?;
    let top = abs.iter().cloned().fold(0.0, f64::max);
    let mut points = Vec::with_capacity(v_grid.len() + 2);
    points.push(0.0);
    points.extend_from_slice(v_grid);
    if *points.last().unwrap() < top {
        points.push(top);
    }
    let counts = count_above(abs, &points[1..]);
    let e = exponent as i32;
    let mut lower = 0.0;
    let mut upper = 0.0;
    let mut left_count = abs.iter().filter(|&&a| a > 0.0).count();
    for (i, &right_count) in counts.iter().enumerate() {
        let width = points[i + 1].powi(e) - points[i].powi(e);
        lower += right_count as f64 * width;
        upper += left_count as f64 * width;
        left_count = right_count;
    }
    let moment = power_sum(abs, exponent);
    let slack = 1e-12 * moment.abs().max(1e-300);
    Ok(IntegrationCheck { exponent, moment, lower, upper, passes: lower <= moment + slack && moment <= upper + slack })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    A1,
    A2,
    A3,
    A4,
    Twelfth,
    /// Σ*|L|⁴ against q (the classical fourth moment).
    Fourth,
    Aftercauchy,
}

impl BoundKind {
    pub fn name(self) -> &'static str {
        match self {
            BoundKind::A1 => "a1",
            BoundKind::A2 => "a2",
            BoundKind::A3 => "a3",
            BoundKind::A4 => "a4",
            BoundKind::Twelfth => "twelfth",
            BoundKind::Fourth => "fourth",
            BoundKind::Aftercauchy => "aftercauchy",
        }
    }

    /// (a, b) for the shape q^a V^{−b}.
    fn count_shape(self) -> Option<(f64, f64)> {
        match self {
            BoundKind::A1 => Some((1.0, 4.0)),
            BoundKind::A2 => Some((2.0, 12.0)),
            BoundKind::A3 => Some((1.0, 6.0)),
            BoundKind::A4 => Some((5.0, 32.0)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditParams {
    /// V = q^θ.
    pub theta: f64,
    pub delta: f64,
    pub mode: FactorMode,
    pub forced_split: Option<(u64, u64, u64)>,
    /// Smoothness bound for q₂; defaults to its largest prime factor.
    pub y: Option<u64>,
    pub method: LMethod,
}

impl Default for AuditParams {
    fn default() -> Self {
        Self { theta: 0.13, delta: 0.2, mode: FactorMode::Twelfth, forced_split: None, y: None, method: LMethod::Hurwitz }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AuditRow {
    pub q: u64,
    pub measured: f64,
    pub predicted: f64,
    pub ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub split: Option<(u64, u64, u64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skipped {
    pub q: u64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundAudit {
    pub kind: BoundKind,
    pub params: AuditParams,
    pub rows: Vec<AuditRow>,
    pub skipped: Vec<Skipped>,
    pub predicted_exponent: f64,
    pub fitted_exponent: f64,
    pub fit: ExponentFit,
    pub epsilon_convention: String,
    pub alerts: Vec<String>,
}

impl BoundAudit {
    pub const CSV_HEADER: [&'static str; 5] = ["q", "measured", "predicted", "ratio", "fitted_exponent"];

    pub fn csv_records(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.q.to_string(),
                    r.measured.to_string(),
                    r.predicted.to_string(),
                    r.ratio.to_string(),
                    self.fitted_exponent.to_string(),
                ]
            })
            .collect()
    }

    pub fn deviation(&self) -> f64 {
        self.fitted_exponent - self.predicted_exponent
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub residuals: Vec<f64>,
}

/// Least squares of log(value) against log(q).
pub fn exponent_fit(series: &[(f64, f64)]) -> Result<ExponentFit> {
    if series.len() < 2 {
        return Err(Error::DegenerateFit(format!("need at least two points, got {}", series.len())));
    }
    if let Some((q, v)) = series.iter().find(|(q, v)| !(*q > 0.0 && *v > 0.0 && q.is_finite() && v.is_finite())) {
        return Err(Error::DegenerateFit(format!("nonpositive point ({q}, {v})")));
    }
    let xs: Vec<f64> = series.iter().map(|(q, _)| q.ln()).collect();
    let ys: Vec<f64> = series.iter().map(|(_, v)| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = pairwise_sum(&xs) / n;
    let my = pairwise_sum(&ys) / n;
    let sxx = pairwise_sum(&xs.iter().map(|x| (x - mx) * (x - mx)).collect::<Vec<_>>());
    if sxx <= 1e-24 {
        return Err(Error::DegenerateFit("all q equal".into()));
    }
    let sxy = pairwise_sum(&xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).collect::<Vec<_>>());
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals = xs.iter().zip(&ys).map(|(x, y)| y - (intercept + slope * x)).collect();
    Ok(ExponentFit { slope, intercept, residuals })
}

enum Measured {
    Row(AuditRow),
    Skip(String),
}

/// Ξ(q, q₁, q₂): the smaller of the available choices.
pub fn xi(q: u64, q1: u64, q2: u64, y: u64) -> f64 {
    let (qf, a, b) = (q as f64, q1 as f64, q2 as f64);
    let plain = a.sqrt() * b.powf(0.25);
    if b > qf.powf(1.5) / a.powi(3) {
        plain.min(qf.powf(0.25) * b.powf(1.0 / 12.0) * (y as f64).powf(1.0 / 12.0))
    } else {
        plain
    }
}

fn first_primitive(m: &Modulus) -> Option<DirichletCharacter> {
    primitive_characters(m).next()
}

fn after_cauchy(m: &Modulus, split: &Factorization, params: &AuditParams) -> Result<Measured> {
    let (q1, q2, q3) = split.parts();
    let m2 = Modulus::new(q2)?;
    let Some(chi3) = first_primitive(&Modulus::new(q3)?) else {
        return Ok(Measured::Skip(format!("no primitive character mod q3 = {q3}")));
    };
    if Modulus::new(q1)?.primitive_count() == 0 || m2.primitive_count() == 0 {
        return Ok(Measured::Skip("even modulus has no primitive characters".into()));
    }
    let table = LTable::new(m, params.method)?;
    let mut terms = Vec::new();
    for chi2 in primitive_characters(&m2) {
        let psi = chi2.combine(&chi3)?;
        terms.push(short_second_moment_in(&table, q1, &psi, true)?.total);
    }
    let x = terms.len() as f64;
    let measured = pairwise_sum(&terms);
    let q = m.q();
    let y = params.y.unwrap_or_else(|| m2.smooth_bound());
    let shape = (q1 as f64 + xi(q, q1, q2, y)) * x + (q as f64 / q1 as f64).sqrt() * x.sqrt();
    let predicted = epsilon_factor(q) * shape;
    Ok(Measured::Row(AuditRow { q, measured, predicted, ratio: measured / predicted, split: Some((q1, q2, q3)) }))
}

fn measure(m: &Modulus, kind: BoundKind, params: &AuditParams) -> Result<Measured> {
    let q = m.q();
    let qf = q as f64;
    let eps = epsilon_factor(q);
    if m.primitive_count() == 0 {
        return Ok(Measured::Skip("no primitive characters".into()));
    }
    if let Some((a, b)) = kind.count_shape() {
        let v = qf.powf(params.theta);
        let lo = qf.powf(2.0 / 13.0);
        let window = match kind {
            BoundKind::A3 => v > lo,
            BoundKind::A4 => lo >= v && v > qf.powf(3.0 / 20.0),
            _ => true,
        };
        if !window {
            return Ok(Measured::Skip(format!("V = {v} outside the range of {}", kind.name())));
        }
        let abs = central_abs(m, params.method)?;
        let measured = count_above(&abs, &[v])[0] as f64;
        let predicted = eps * qf.powf(a) * v.powf(-b);
        return Ok(Measured::Row(AuditRow { q, measured, predicted, ratio: measured / predicted, split: None }));
    }
    match kind {
        BoundKind::Twelfth | BoundKind::Fourth => {
            let (e, power) = if kind == BoundKind::Twelfth { (12, 2.0) } else { (4, 1.0) };
            let measured = power_sum(&central_abs(m, params.method)?, e);
            let predicted = eps * qf.powf(power);
            Ok(Measured::Row(AuditRow { q, measured, predicted, ratio: measured / predicted, split: None }))
        }
        BoundKind::Aftercauchy => {
            let split = match params.forced_split {
                Some((a, b, c)) => Factorization::new(m, a, b, c)?,
                None => choose_factorization(m, qf.powf(params.theta), params.delta, params.mode)?,
            };
            after_cauchy(m, &split, params)
        }
        _ => unreachable!("count shapes handled above"),
    }
}

/// Measure one quantity per modulus and fit its growth in q.
pub fn audit_bound(family: &[Modulus], kind: BoundKind, params: &AuditParams) -> Result<BoundAudit> {
    if family.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let measured: Vec<Measured> = family.par_iter().map(|m| measure(m, kind, params)).collect::<Result<_>>()?;
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    let mut alerts = Vec::new();
    for (m, r) in family.iter().zip(measured) {
        match r {
            Measured::Row(row) if row.measured > 0.0 => rows.push(row),
            Measured::Row(row) => skipped.push(Skipped { q: row.q, reason: "measured value is zero".into() }),
            Measured::Skip(reason) => skipped.push(Skipped { q: m.q(), reason }),
        }
    }
    let rough: Vec<u64> = family
        .iter()
        .filter(|m| m.smooth_bound() as f64 > (m.q() as f64).powf(params.delta))
        .map(Modulus::q)
        .collect();
    if kind != BoundKind::Fourth && !rough.is_empty() {
        alerts.push(format!(
            "{} of {} moduli are not q^delta-smooth for delta = {} (first: {})",
            rough.len(),
            family.len(),
            params.delta,
            rough[0]
        ));
    }
    if rows.is_empty() {
        return Err(Error::EmptyFamily);
    }
    let fit = exponent_fit(&rows.iter().map(|r| (r.q as f64, r.measured)).collect::<Vec<_>>())?;
    let predicted_exponent = match kind.count_shape() {
        Some((a, b)) => a - b * params.theta,
        None => match kind {
            BoundKind::Twelfth => 2.0,
            BoundKind::Fourth => 1.0,
            _ => exponent_fit(&rows.iter().map(|r| (r.q as f64, r.predicted / epsilon_factor(r.q))).collect::<Vec<_>>())?
                .slope,
        },
    };
    let fitted_exponent = fit.slope;
    if fitted_exponent > predicted_exponent + 0.5 {
        alerts.push(format!("fitted exponent {fitted_exponent:.3} exceeds the predicted {predicted_exponent:.3} by more than 0.5"));
    }
    Ok(BoundAudit {
        kind,
        params: params.clone(),
        rows,
        skipped,
        predicted_exponent,
        fitted_exponent,
        fit,
        epsilon_convention: "q^eps read as d(q) * log q".into(),
        alerts,
    })
}

/// Moment reports for a family, in family order.
pub fn scan_family(family: &[Modulus], exponents: &[u32], method: LMethod) -> Result<Vec<MomentReport>> {
    family.par_iter().map(|m| moment_scan(m, exponents, method)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lfunc::l_half;

    fn m(q: u64) -> Modulus {
        Modulus::new(q).unwrap()
    }

    #[test]
    fn single_character_modulus() {
        let r = moment_scan(&m(3), &[4, 6, 12], LMethod::Hurwitz).unwrap();
        assert_eq!(r.char_count, 1);
        let l = l_half(&"3:1".parse().unwrap(), LMethod::Hurwitz).unwrap().value.norm();
        assert!((r.moments[&4] - l.powi(4)).abs() < 1e-12);
        assert!(r.power_means_monotone());
    }

    #[test]
    fn mod_15_termwise() {
        let r = moment_scan(&m(15), &[4], LMethod::Afe).unwrap();
        assert_eq!(r.char_count, 3);
        let direct: f64 = primitive_characters(&m(15))
            .map(|c| l_half(&c, LMethod::Hurwitz).unwrap().value.norm().powi(4))
            .sum();
        assert!((r.moments[&4] - direct).abs() < 1e-9);
    }

    #[test]
    fn odd_exponent_rejected() {
        assert!(matches!(moment_scan(&m(5), &[3], LMethod::Hurwitz), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn counts_match_filter() {
        let abs = vec![0.1, 0.5, 0.5, 1.2, 3.0];
        let grid = [0.05, 0.5, 1.0, 2.0, 5.0];
        assert_eq!(count_above(&abs, &grid), vec![5, 2, 2, 1, 0]);
    }

    #[test]
    fn large_values_mod_105() {
        let grid = [0.5, 1.0, 2.0];
        let s = large_value_set(&m(105), &grid, LMethod::Hurwitz, true).unwrap();
        let abs: Vec<f64> = primitive_characters(&m(105))
            .map(|c| l_half(&c, LMethod::Hurwitz).unwrap().value.norm())
            .collect();
        for (i, v) in grid.iter().enumerate() {
            assert_eq!(s.counts[i], abs.iter().filter(|&&a| a > *v).count());
            assert_eq!(s.members.as_ref().unwrap()[i].len(), s.counts[i]);
        }
        assert!(s.is_nonincreasing());
        let tiny = large_value_set(&m(105), &[1e-9, 1e9], LMethod::Hurwitz, false).unwrap();
        assert_eq!(tiny.counts, vec![15, 0]);
    }

    #[test]
    fn unsorted_grid_rejected() {
        assert!(large_value_set(&m(7), &[1.0, 0.5], LMethod::Hurwitz, false).is_err());
    }

    #[test]
    fn integration_sandwich() {
        let abs = central_abs(&m(1155), LMethod::Hurwitz).unwrap();
        let top = abs.iter().cloned().fold(0.0, f64::max);
        for e in [4, 12] {
            let c = integration_check(&abs, &uniform_grid(top * 1.01, 400), e).unwrap();
            assert!(c.passes, "{c:?}");
            assert!((c.upper - c.lower) / c.moment < 0.2);
        }
    }

    #[test]
    fn exact_power_law() {
        let series: Vec<(f64, f64)> = [10.0, 100.0, 1000.0, 5e4].iter().map(|&q: &f64| (q, q * q)).collect();
        let fit = exponent_fit(&series).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-9);
        assert!(fit.residuals.iter().all(|r| r.abs() < 1e-9));
    }

    #[test]
    fn two_points_interpolate() {
        let fit = exponent_fit(&[(10.0, 3.0), (1000.0, 300.0)]).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_power_series_slope() {
        let series: Vec<(f64, f64)> = (0..=20)
            .map(|i| {
                let q = 1e3 * 100f64.powf(i as f64 / 20.0);
                (q, 3.0 * q.powf(1.5) * q.ln().powi(3))
            })
            .collect();
        let s = exponent_fit(&series).unwrap().slope;
        assert!((1.5..=1.9).contains(&s), "{s}");
    }

    #[test]
    fn degenerate_fits() {
        assert!(matches!(exponent_fit(&[(5.0, 1.0), (5.0, 2.0), (5.0, 3.0)]), Err(Error::DegenerateFit(_))));
        assert!(matches!(exponent_fit(&[(5.0, 1.0)]), Err(Error::DegenerateFit(_))));
        assert!(matches!(exponent_fit(&[(5.0, 0.0), (6.0, 1.0)]), Err(Error::DegenerateFit(_))));
    }

    #[test]
    fn empty_family() {
        assert_eq!(audit_bound(&[], BoundKind::Twelfth, &AuditParams::default()), Err(Error::EmptyFamily));
    }

    #[test]
    fn window_logic() {
        let q = m(1155);
        let mut p = AuditParams { theta: 0.1, ..Default::default() };
        assert!(matches!(measure(&q, BoundKind::A3, &p).unwrap(), Measured::Skip(_)));
        assert!(matches!(measure(&q, BoundKind::A4, &p).unwrap(), Measured::Skip(_)));
        assert!(matches!(measure(&q, BoundKind::A1, &p).unwrap(), Measured::Row(_)));
        p.theta = 0.152;
        assert!(matches!(measure(&q, BoundKind::A3, &p).unwrap(), Measured::Skip(_)));
        assert!(matches!(measure(&q, BoundKind::A4, &p).unwrap(), Measured::Row(_)));
        p.theta = 0.16;
        assert!(matches!(measure(&q, BoundKind::A3, &p).unwrap(), Measured::Row(_)));
        assert!(matches!(measure(&q, BoundKind::A4, &p).unwrap(), Measured::Skip(_)));
        assert_eq!(audit_bound(&[q], BoundKind::A4, &p), Err(Error::EmptyFamily));
    }

    #[test]
    fn after_cauchy_forced_split() {
        let p = AuditParams { forced_split: Some((3, 5 * 7, 11 * 13)), ..Default::default() };
        let a = audit_bound(&[m(15015)], BoundKind::Aftercauchy, &p);
        // One modulus cannot be fitted, but the row itself must be finite.
        assert!(matches!(a, Err(Error::DegenerateFit(_))));
        let split = Factorization::new(&m(15015), 3, 35, 143).unwrap();
        let Measured::Row(row) = after_cauchy(&m(15015), &split, &p).unwrap() else { panic!() };
        assert!(row.measured > 0.0 && row.ratio.is_finite());
    }
}
