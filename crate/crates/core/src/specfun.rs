//! Bessel functions of the first kind, orders 0 and 1, for real arguments.
//!
//! Three branches: the ascending power series for `|x| ≤ 2`, Miller's
//! backward recurrence normalized by `J₀ + 2ΣJ₂ₖ = 1` up to `|x| = 20`, and
//! the Hankel asymptotic expansion truncated at its smallest term beyond.
//! The series alone would lose about five digits to cancellation by
//! `|x| ≈ 15`; the recurrence is stable for every argument, and past 20 the
//! smallest asymptotic term is far below rounding.
//!
//! [`oracle`] evaluates the Bessel integral by the trapezoid rule. It shares
//! no code with the three branches and is what the tests measure them against.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use serde::Serialize;

use crate::error::{DsmError, Result};

/// Arguments with `|x|` at or below this use the power series.
pub const SERIES_LIMIT: f64 = 2.0;
/// Arguments with `|x|` above this use the asymptotic expansion.
pub const ASYMPTOTIC_LIMIT: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BesselMethod {
    Series,
    BackwardRecurrence,
    Asymptotic,
    OracleQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BesselEvaluation {
    pub argument: f64,
    pub value: f64,
    pub method: BesselMethod,
}

/// `J₀(x)`.
pub fn bessel_j0(x: f64) -> Result<f64> {
    evaluate_j0(x).map(|e| e.value)
}

/// `J₁(x)`.
pub fn bessel_j1(x: f64) -> Result<f64> {
    evaluate_j1(x).map(|e| e.value)
}

pub fn evaluate_j0(x: f64) -> Result<BesselEvaluation> {
    check_finite(x)?;
    let (value, method) = nonneg(0, x.abs());
    Ok(BesselEvaluation {
        argument: x,
        value,
        method,
    })
}

pub fn evaluate_j1(x: f64) -> Result<BesselEvaluation> {
    check_finite(x)?;
    let (magnitude, method) = nonneg(1, x.abs());
    Ok(BesselEvaluation {
        argument: x,
        value: if x < 0.0 { -magnitude } else { magnitude },
        method,
    })
}

fn check_finite(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(DsmError::invalid(format!("Bessel argument must be finite, got {x}")))
    }
}

fn nonneg(order: u32, x: f64) -> (f64, BesselMethod) {
    if x <= SERIES_LIMIT {
        (series(order, x), BesselMethod::Series)
    } else if x <= ASYMPTOTIC_LIMIT {
        let (j0, j1) = backward_recurrence(x);
        (if order == 0 { j0 } else { j1 }, BesselMethod::BackwardRecurrence)
    } else {
        (asymptotic(order, x), BesselMethod::Asymptotic)
    }
}

/// `J₁` for arguments already known to be finite and non-negative.
pub(crate) fn j1_nonneg(x: f64) -> f64 {
    debug_assert!(x >= 0.0 && x.is_finite());
    nonneg(1, x).0
}

// sum_k (-1)^k (x/2)^(2k+n) / (k! (k+n)!), x >= 0
fn series(order: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = half * half;
    let mut term = if order == 0 { 1.0 } else { half };
    let mut sum = term;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= -q / (k * (k + order as f64));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs().max(1e-300) && k > q.sqrt() {
            break;
        }
        if k > 200.0 {
            break;
        }
    }
    sum
}

// Miller's algorithm: recur J_{k-1} = (2k/x) J_k - J_{k+1} downward from an
// arbitrary seed far above x, then normalize with J0 + 2 sum J_2k = 1.
// Returns (J0, J1), x > 0.
fn backward_recurrence(x: f64) -> (f64, f64) {
    let start = 2 * ((x as usize + 16 + (40.0 * x).sqrt() as usize) / 2);
    let mut above = 0.0_f64;
    let mut current = 1e-30_f64;
    let mut norm = 0.0;
    let (mut j0, mut j1) = (0.0, 0.0);
    for k in (1..=start).rev() {
        let below = 2.0 * k as f64 / x * current - above;
        above = current;
        current = below;
        // current now holds J_{k-1}
        if current.abs() > 1e250 {
            current *= 1e-250;
            above *= 1e-250;
            norm *= 1e-250;
            j1 *= 1e-250;
        }
        if k - 1 == 1 {
            j1 = current;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * current;
        }
        if k == 1 {
            j0 = current;
        }
    }
    norm += j0;
    (j0 / norm, j1 / norm)
}

// Hankel expansion, x > ASYMPTOTIC_LIMIT.
fn asymptotic(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order * order) as f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut j = 0u32;
    loop {
        j += 1;
        let odd = (2 * j - 1) as f64;
        let next = term * (mu - odd * odd) / (8.0 * j as f64 * x);
        if next.abs() >= term.abs() || next == 0.0 {
            break;
        }
        term = next;
        // j = 1, 2, 3, 4, ... contribute +Q, -P, -Q, +P, ...
        match j % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let (s, c) = x.sin_cos();
    // chi = x - (2n+1) pi/4
    let (cos_chi, sin_chi) = match order {
        0 => ((c + s) * FRAC_1_SQRT_2, (s - c) * FRAC_1_SQRT_2),
        _ => ((s - c) * FRAC_1_SQRT_2, -(s + c) * FRAC_1_SQRT_2),
    };
    (2.0 / (PI * x)).sqrt() * (p * cos_chi - q * sin_chi)
}

/// Brute-force quadrature of Bessel's integral.
pub mod oracle {
    use std::f64::consts::PI;

    /// Minimum panel count accepted by the oracle.
    pub const MIN_PANELS: usize = 64;

    /// `J_n(x) = (1/π) ∫₀^π cos(nτ − x sin τ) dτ` by the composite trapezoid rule.
    ///
    /// The integrand extends to a smooth `2π`-periodic even function, so the
    /// rule converges geometrically once `panels` exceeds about `|x| + n`.
    pub fn bessel_jn_oracle(order: u32, x: f64, panels: usize) -> f64 {
        let panels = panels.max(MIN_PANELS);
        let h = PI / panels as f64;
        let n = order as f64;
        let f = |tau: f64| (n * tau - x * tau.sin()).cos();
        let mut sum = 0.5 * (f(0.0) + f(PI));
        let mut comp = 0.0;
        for i in 1..panels {
            // Kahan summation keeps the 1e-12 level at 65536 panels.
            let y = f(i as f64 * h) - comp;
            let t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        sum * h / PI
    }

    pub fn bessel_j1_oracle(x: f64, panels: usize) -> f64 {
        bessel_jn_oracle(1, x, panels)
    }

    pub fn bessel_j0_oracle(x: f64, panels: usize) -> f64 {
        bessel_jn_oracle(0, x, panels)
    }

    /// Doubles the panel count until successive estimates agree to `tol`.
    pub fn converged_jn(order: u32, x: f64, tol: f64) -> (f64, usize) {
        let mut panels = MIN_PANELS.max(2 * (x.abs() as usize + order as usize));
        let mut prev = bessel_jn_oracle(order, x, panels);
        loop {
            panels *= 2;
            let next = bessel_jn_oracle(order, x, panels);
            if (next - prev).abs() < tol || panels >= 1 << 22 {
                return (next, panels);
            }
            prev = next;
        }
    }
}

pub use oracle::bessel_j1_oracle;
