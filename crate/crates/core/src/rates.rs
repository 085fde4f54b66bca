//! Power-law and logarithmic fits of sampled time series.
//!
//! Two views of the same series: [`fit`] estimates an exponent by least
//! squares, and [`bounded_ratio_check`] tests an upper bound `y ≤ C t^{−p}·corr`
//! by following the ratio `y t^p / corr` over the window.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Fewest samples a window must hold.
pub const MIN_SAMPLES: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    /// `y = C t^{−p}`
    PurePower,
    /// `y = C t^{−p} log t`
    LogCorrected,
    /// `y = c log t`
    LogGrowth,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::PurePower => "pure-power",
            Model::LogCorrected => "log-corrected",
            Model::LogGrowth => "log-growth",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pure-power" => Ok(Model::PurePower),
            "log-corrected" => Ok(Model::LogCorrected),
            "log-growth" => Ok(Model::LogGrowth),
            other => Err(Error::InvalidParameter(format!("unknown rate model `{other}`"))),
        }
    }
}

/// Divisor applied to `y t^p` in [`bounded_ratio_check`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Correction {
    One,
    LogT,
}

impl Correction {
    fn at(self, t: f64) -> f64 {
        match self {
            Correction::One => 1.0,
            Correction::LogT => t.ln(),
        }
    }
}

impl fmt::Display for Correction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Correction::One => "1",
            Correction::LogT => "log t",
        })
    }
}

/// Closed time interval `[t₀, t₁]` with `t₀ ≥ e` and `t₁ > 2t₀`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub t0: f64,
    pub t1: f64,
}

impl Window {
    pub fn new(t0: f64, t1: f64) -> Result<Self> {
        if !(t0 >= std::f64::consts::E) {
            return Err(Error::Fit(format!("window start {t0} is below e")));
        }
        if !(t1 > 2.0 * t0) {
            return Err(Error::Fit(format!("window [{t0}, {t1}] spans less than an octave")));
        }
        Ok(Self { t0, t1 })
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.t0 && t <= self.t1
    }

    fn select(&self, series: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
        let pts: Vec<(f64, f64)> = series.iter().copied().filter(|(t, _)| self.contains(*t)).collect();
        if pts.len() < MIN_SAMPLES {
            return Err(Error::Fit(format!(
                "{} samples in [{}, {}], need at least {MIN_SAMPLES}",
                pts.len(),
                self.t0,
                self.t1
            )));
        }
        if let Some((t, y)) = pts.iter().find(|(_, y)| !(*y > 0.0)) {
            return Err(Error::Fit(format!("nonpositive value {y} at t = {t}")));
        }
        Ok(pts)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub model: Model,
    pub window: Window,
    /// Fitted decay exponent; zero for [`Model::LogGrowth`].
    pub p: f64,
    /// Fitted constant (`c` for [`Model::LogGrowth`]).
    pub c: f64,
    pub r2: f64,
    /// `sup y t^p / corr` over the window with the fitted `p`.
    pub sup_ratio: f64,
    pub samples: usize,
}

/// Least-squares fit of one model on the samples inside `window`.
///
/// Power models regress `log y − [log log t]` on `log t`; the log
/// correction enters with its exponent fixed at 1. The log-growth model is
/// a least-squares line through the origin in `log t`.
pub fn fit(series: &[(f64, f64)], model: Model, window: Window) -> Result<RateFit> {
    let pts = window.select(series)?;
    let m = pts.len() as f64;
    let (p, c, r2) = match model {
        Model::PurePower | Model::LogCorrected => {
            let xs: Vec<f64> = pts.iter().map(|(t, _)| t.ln()).collect();
            let zs: Vec<f64> = pts
                .iter()
                .map(|&(t, y)| match model {
                    Model::LogCorrected => y.ln() - t.ln().ln(),
                    _ => y.ln(),
                })
                .collect();
            let xm = xs.iter().sum::<f64>() / m;
            let zm = zs.iter().sum::<f64>() / m;
            let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
            let sxz: f64 = xs.iter().zip(&zs).map(|(x, z)| (x - xm) * (z - zm)).sum();
            let slope = sxz / sxx;
            let icept = zm - slope * xm;
            let r2 = r_squared(&zs, xs.iter().map(|x| icept + slope * x));
            (-slope, icept.exp(), r2)
        }
        Model::LogGrowth => {
            let sxx: f64 = pts.iter().map(|(t, _)| t.ln() * t.ln()).sum();
            let sxy: f64 = pts.iter().map(|(t, y)| t.ln() * y).sum();
            let c = sxy / sxx;
            let ys: Vec<f64> = pts.iter().map(|(_, y)| *y).collect();
            let r2 = r_squared(&ys, pts.iter().map(|(t, _)| c * t.ln()));
            (0.0, c, r2)
        }
    };
    let corr = match model {
        Model::PurePower => Correction::One,
        Model::LogCorrected | Model::LogGrowth => Correction::LogT,
    };
    let sup_ratio = pts
        .iter()
        .map(|&(t, y)| y * t.powf(p) / corr.at(t))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(RateFit {
        model,
        window,
        p,
        c,
        r2,
        sup_ratio,
        samples: pts.len(),
    })
}

fn r_squared(obs: &[f64], pred: impl Iterator<Item = f64>) -> f64 {
    let mean = obs.iter().sum::<f64>() / obs.len() as f64;
    let ss_tot: f64 = obs.iter().map(|o| (o - mean) * (o - mean)).sum();
    let ss_res: f64 = obs.iter().zip(pred).map(|(o, p)| (o - p) * (o - p)).sum();
    if ss_tot == 0.0 {
        return if ss_res == 0.0 { 1.0 } else { 0.0 };
    }
    (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub p_target: f64,
    pub correction: Correction,
    /// `sup y t^p / corr` over the window.
    pub sup: f64,
    pub argmax_t: f64,
    /// Least-squares slope of `log(ratio)` against `log₂ t` over the last
    /// octave `[t₁/2, t₁]`: relative change of the ratio per octave.
    pub trend: f64,
}

impl BoundCheck {
    pub fn trend_within(&self, tol: f64) -> bool {
        self.trend <= tol
    }
}

/// Follows `y t^{p_target} / corr` across the window.
pub fn bounded_ratio_check(
    series: &[(f64, f64)],
    p_target: f64,
    correction: Correction,
    window: Window,
) -> Result<BoundCheck> {
    let pts = window.select(series)?;
    let ratio: Vec<(f64, f64)> = pts
        .iter()
        .map(|&(t, y)| (t, y * t.powf(p_target) / correction.at(t)))
        .collect();
    let (argmax_t, sup) = ratio
        .iter()
        .copied()
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, (t, r)| if r > acc.1 { (t, r) } else { acc });
    let tail: Vec<(f64, f64)> = ratio
        .iter()
        .filter(|(t, _)| *t >= 0.5 * window.t1)
        .map(|&(t, r)| (t.log2(), r.ln()))
        .collect();
    if tail.len() < 2 {
        return Err(Error::Fit("fewer than two samples in the last octave".into()));
    }
    let m = tail.len() as f64;
    let xm = tail.iter().map(|p| p.0).sum::<f64>() / m;
    let ym = tail.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = tail.iter().map(|p| (p.0 - xm) * (p.0 - xm)).sum();
    let sxy: f64 = tail.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    Ok(BoundCheck {
        p_target,
        correction,
        sup,
        argmax_t,
        trend: sxy / sxx,
    })
}
