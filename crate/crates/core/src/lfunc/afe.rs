//! Smoothed dyadic Dirichlet-series blocks for L(1/2, χ).
//!
//! With the C^∞ step σ(t) = e^{−1/t} / (e^{−1/t} + e^{−1/(1−t)}) on [0, 1],
//! the functions ρ_j(x) = σ(log₂x − j + 2) − σ(log₂x − j + 1) are supported
//! in [2^j/4, 2^j] and telescope to 1 − σ(log₂x − J + 1) for x ≥ 1. So
//! Σ_{j≤J} ρ_j is a smooth cutoff equal to 1 on [1, X/2] and 0 beyond X = 2^J,
//! and for primitive χ mod q > 1 the smoothed series
//!
//! ```text
//! L_X = Σ_n χ(n) n^{−1/2} (1 − σ(log₂n − J + 1))
//! ```
//!
//! converges to L(1/2, χ) faster than any power of q/X.

use serde::Serialize;

/// C^∞ step: 0 for t ≤ 0, 1 for t ≥ 1.
pub fn smooth_step(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t >= 1.0 {
        1.0
    } else {
        let a = (-1.0 / t).exp();
        let b = (-1.0 / (1.0 - t)).exp();
        a / (a + b)
    }
}

/// 1 + ln(1 + ln q) scaled by 64: the stand-in for q^ε in the series length.
pub fn slack(q: u64) -> f64 {
    64.0 * (1.0 + (1.0 + (q.max(2) as f64).ln()).ln())
}

/// 4q^{1+ε} with q^ε read as [`slack`].
pub fn support_limit(q: u64) -> f64 {
    4.0 * q as f64 * slack(q)
}

/// Exponent J of the series length X = 2^J, the largest power of two not
/// exceeding [`support_limit`].
pub fn cutoff_exponent(q: u64) -> u32 {
    support_limit(q).log2().floor() as u32
}

/// Partition weight ρ_j at x.
pub fn partition_weight(j: u32, x: f64) -> f64 {
    let u = x.log2() - j as f64;
    smooth_step(u + 2.0) - smooth_step(u + 1.0)
}

/// Cutoff weight 1 − σ(log₂x − J + 1) of the full series.
pub fn cutoff_weight(big_j: u32, x: f64) -> f64 {
    1.0 - smooth_step(x.log2() - big_j as f64 + 1.0)
}

/// Recorded C_1, C_2 with N^j |V_N^{(j)}| ≤ C_j.
pub const DERIVATIVE_CONSTANTS: [f64; 2] = [16.0, 512.0];

/// The block weight V_N(x) = (N/x)^{1/2} ρ_j(x) for N = 2^j, so that the
/// block N^{−1/2} Σ χ(n) V_N(n) equals Σ χ(n) n^{−1/2} ρ_j(n).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightFunction {
    pub n: u64,
    pub q: u64,
    pub parity: i32,
}

impl WeightFunction {
    pub fn new(n: u64, q: u64, parity: i32) -> Self {
        assert!(n.is_power_of_two() && n >= 2, "block length must be a power of two ≥ 2");
        Self { n, q, parity }
    }

    pub fn exponent(&self) -> u32 {
        self.n.trailing_zeros()
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        (self.n as f64 / x).sqrt() * partition_weight(self.exponent(), x)
    }

    /// Support [N/4, N].
    pub fn support(&self) -> (f64, f64) {
        (self.n as f64 / 4.0, self.n as f64)
    }

    pub fn derivative_bounds_hold(&self, samples: usize) -> bool {
        let c = self.derivative_constants(samples);
        c[0] <= DERIVATIVE_CONSTANTS[0] && c[1] <= DERIVATIVE_CONSTANTS[1]
    }

    /// max over `samples` interior points of N^j |V^{(j)}(x)| for j = 1, 2,
    /// by central differences.
    pub fn derivative_constants(&self, samples: usize) -> [f64; 2] {
        let (lo, hi) = self.support();
        let h = self.n as f64 * 1e-4;
        let n = self.n as f64;
        let mut c = [0.0f64; 2];
        for i in 0..samples {
            let x = lo + (hi - lo) * (i as f64 + 0.5) / samples as f64;
            let (fm, f0, fp) = (self.eval(x - h), self.eval(x), self.eval(x + h));
            let d1 = (fp - fm) / (2.0 * h);
            let d2 = (fp - 2.0 * f0 + fm) / (h * h);
            c[0] = c[0].max(d1.abs() * n);
            c[1] = c[1].max(d2.abs() * n * n);
        }
        c
    }
}
