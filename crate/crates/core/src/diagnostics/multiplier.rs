use crate::error::{Error, Result};
use crate::geometry::ScalarField;

/// Smallest and largest weight tried by [`calibrate_k`].
pub const K_LADDER_MIN: f64 = 4.0;
pub const K_LADDER_MAX: f64 = 65536.0;

/// Relative slack on `G_k(0)` in the integrated bound measured by [`beta_hat`].
pub const BETA_SLACK: f64 = 1e-4;

/// Relative additive tolerance of the calibration checks.
const CALIBRATION_TOL: f64 = 1e-6;

/// Constants of the multiplier functional. `alpha = 3ε₀/4` and
/// `eps1 = ε₀/8` are fixed by `eps0`; `k` is the energy weight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierParams {
    pub eps0: f64,
    pub l: f64,
    pub alpha: f64,
    pub eps1: f64,
    pub k: f64,
}

impl MultiplierParams {
    pub fn new(eps0: f64, l: f64, k: f64) -> Result<Self> {
        if !(eps0.is_finite() && eps0 > 0.0) {
            return Err(Error::InvalidParameter(format!("eps0 must be positive, got {eps0}")));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidParameter(format!("L must be positive, got {l}")));
        }
        if !(k.is_finite() && k > 3.0) {
            return Err(Error::InvalidParameter(format!("k must exceed 3, got {k}")));
        }
        Ok(Self {
            eps0,
            l,
            alpha: 0.75 * eps0,
            eps1: eps0 / 8.0,
            k,
        })
    }
}

/// `φ(r) = ε₀` for `r ≤ L`, `ε₀L/r` beyond.
pub fn phi_weight(r: f64, eps0: f64, l: f64) -> f64 {
    if r <= l {
        eps0
    } else {
        eps0 * l / r
    }
}

/// `G_k` straight from fields; [`super::measure`] computes the same sum
/// fused with the other integrals.
pub fn multiplier_functional(
    u: &ScalarField,
    ut: &ScalarField,
    a: &ScalarField,
    params: &MultiplierParams,
) -> f64 {
    let ctx = super::DiagContext::new(a, params.l, *params);
    let m = super::measure(u, ut, &ctx);
    m.multiplier_base + params.k * m.energy
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    pub k: f64,
    /// Additive tolerance used: `10⁻⁶ · G_k(0)`.
    pub tol: f64,
}

/// Smallest `k` in `4, 8, …, 2¹⁶` for which `G_k = base + k·E` stays above
/// `−tol` and never increases by more than `tol` between samples.
pub fn calibrate_k(base: &[f64], energy: &[f64]) -> Result<Calibration> {
    assert_eq!(base.len(), energy.len());
    let mut k = K_LADDER_MIN;
    let mut last_failure = String::new();
    while k <= K_LADDER_MAX {
        let g: Vec<f64> = base.iter().zip(energy).map(|(b, e)| b + k * e).collect();
        let tol = CALIBRATION_TOL * g.first().copied().unwrap_or(0.0).abs();
        match first_violation(&g, tol) {
            None => return Ok(Calibration { k, tol }),
            Some(msg) => last_failure = format!("k = {k}: {msg}"),
        }
        k *= 2.0;
    }
    Err(Error::Calibration(last_failure))
}

/// First sample where a `G_k` series dips below `−10⁻⁶·G_k(0)` or rises by
/// more than that between samples.
pub fn gk_violation(g: &[f64]) -> Option<String> {
    let tol = CALIBRATION_TOL * g.first().copied().unwrap_or(0.0).abs();
    first_violation(g, tol)
}

fn first_violation(g: &[f64], tol: f64) -> Option<String> {
    for (i, &v) in g.iter().enumerate() {
        if v < -tol {
            return Some(format!("G_k = {v:e} < -{tol:e} at sample {i}"));
        }
        if i > 0 && v > g[i - 1] + tol {
            return Some(format!(
                "G_k rises from {:e} to {v:e} at sample {i}",
                g[i - 1]
            ));
        }
    }
    None
}

/// Largest `β ≥ 0` with `G_k(tᵢ) + β ∫₀^{tᵢ} E ≤ G_k(0)(1 + 10⁻⁴)` at every
/// sample, the energy integral taken by the trapezoid rule over the samples.
/// Returns a negative number when even `β = 0` fails, and `+∞` when the
/// energy integral vanishes.
pub fn beta_hat(times: &[f64], gk: &[f64], energy: &[f64]) -> f64 {
    assert!(times.len() == gk.len() && gk.len() == energy.len());
    if gk.is_empty() {
        return f64::INFINITY;
    }
    let cap = gk[0] * (1.0 + BETA_SLACK);
    let mut integral = 0.0;
    let mut beta = f64::INFINITY;
    for i in 1..gk.len() {
        integral += 0.5 * (times[i] - times[i - 1]) * (energy[i] + energy[i - 1]);
        let room = cap - gk[i];
        if room < 0.0 {
            return room;
        }
        if integral > 0.0 {
            beta = beta.min(room / integral);
        }
    }
    beta
}
