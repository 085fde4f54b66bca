//! The planar Newton potential
//!
//! ```text
//! h(x) = −(1/2π) ∫ log|x − y| f(y) dy,    −Δh = f,
//! ```
//!
//! by direct summation over the source cells, together with the bounds on
//! `∇h` used in the `L²` growth estimate.
//!
//! Every kernel value is a function of the integer offset between two
//! nodes, and each node's sum is accumulated with [`ExactSum`], so a
//! source that is symmetric under the lattice symmetries produces a
//! potential with exactly the same symmetry.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{InitialData, Region, ScalarField};
use crate::sum::ExactSum;

/// Slack on the far-field gradient bound for quadrature error.
pub const FARFIELD_SLACK: f64 = 1e-2;

/// The source `f = u₁ + a·u₀` of the potential, supported in `B_R`.
#[derive(Debug, Clone)]
pub struct SourceTerm {
    f: ScalarField,
    support_radius: f64,
    l1_norm: f64,
}

impl SourceTerm {
    pub fn new(f: ScalarField, support_radius: f64) -> Result<Self> {
        if !(support_radius > 0.0) {
            return Err(Error::InvalidData("support radius must be positive".into()));
        }
        if !f.is_finite() {
            return Err(Error::InvalidData("source is not finite".into()));
        }
        let outside = f.max_abs_outside(support_radius);
        if outside != 0.0 {
            return Err(Error::InvalidData(format!(
                "source does not vanish outside B_{support_radius} (max {outside:e})"
            )));
        }
        let area = f.grid().cell_area();
        let l1_norm = crate::sum::exact_sum(f.values().iter().map(|v| v.abs())) * area;
        Ok(Self {
            f,
            support_radius,
            l1_norm,
        })
    }

    /// `f = u₁ + a·u₀`.
    pub fn from_data(data: &InitialData, a: &ScalarField) -> Result<Self> {
        let au0 = a.zip_map(&data.u0, |c, u| c * u);
        Self::new(data.u1.zip_map(&au0, |p, q| p + q), data.support_radius)
    }

    pub fn f(&self) -> &ScalarField {
        &self.f
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    /// `‖f‖₁`
    pub fn l1_norm(&self) -> f64 {
        self.l1_norm
    }

    /// `‖f‖_q` for `q ∈ [1, ∞]`.
    pub fn lq_norm(&self, q: f64) -> f64 {
        if q.is_infinite() {
            return self.f.max_abs();
        }
        let area = self.f.grid().cell_area();
        let s = crate::sum::exact_sum(self.f.values().iter().map(|v| v.abs().powf(q)));
        (s * area).powf(1.0 / q)
    }
}

/// Mean of `log|y|` over the unit square `[−½, ½]²`.
///
/// The square splits into four copies of `[0, ½]²`. On `[0, s]²` the
/// integral of `log|y|` is `s²(J + log s)` with `J` the integral over
/// `[0, 1]²`; cutting `[0, 1]²` into its four half-size squares gives
/// `J = ¼(J − log 2) + T`, where `T` covers the three squares away from the
/// origin and is smooth, so `J = (4T − log 2)/3`.
pub fn self_cell_log_average() -> f64 {
    let f = |x: f64, y: f64| 0.5 * (x * x + y * y).ln();
    let t = adaptive_square(&f, 0.5, 1.0, 0.0, 0.5, 1e-13)
        + adaptive_square(&f, 0.0, 0.5, 0.5, 1.0, 1e-13)
        + adaptive_square(&f, 0.5, 1.0, 0.5, 1.0, 1e-13);
    let j = (4.0 * t - std::f64::consts::LN_2) / 3.0;
    // mean over [0, ½]² = 4 · ¼(J − log 2)
    j - std::f64::consts::LN_2
}

const GAUSS_NODES: [f64; 4] = [
    -0.861_136_311_594_052_6,
    -0.339_981_043_584_856_3,
    0.339_981_043_584_856_3,
    0.861_136_311_594_052_6,
];
const GAUSS_WEIGHTS: [f64; 4] = [
    0.347_854_845_137_453_9,
    0.652_145_154_862_546_1,
    0.652_145_154_862_546_1,
    0.347_854_845_137_453_9,
];

fn gauss_rect(f: &impl Fn(f64, f64) -> f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let (cx, hx) = (0.5 * (x0 + x1), 0.5 * (x1 - x0));
    let (cy, hy) = (0.5 * (y0 + y1), 0.5 * (y1 - y0));
    let mut s = 0.0;
    for (xi, wi) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
        for (yj, wj) in GAUSS_NODES.iter().zip(GAUSS_WEIGHTS) {
            s += wi * wj * f(cx + hx * xi, cy + hy * yj);
        }
    }
    s * hx * hy
}

fn adaptive_square(f: &impl Fn(f64, f64) -> f64, x0: f64, x1: f64, y0: f64, y1: f64, tol: f64) -> f64 {
    let whole = gauss_rect(f, x0, x1, y0, y1);
    let (xm, ym) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let parts = gauss_rect(f, x0, xm, y0, ym)
        + gauss_rect(f, xm, x1, y0, ym)
        + gauss_rect(f, x0, xm, ym, y1)
        + gauss_rect(f, xm, x1, ym, y1);
    if (parts - whole).abs() <= tol || (x1 - x0) < 1e-6 {
        return parts;
    }
    let t = 0.25 * tol;
    adaptive_square(f, x0, xm, y0, ym, t)
        + adaptive_square(f, xm, x1, y0, ym, t)
        + adaptive_square(f, x0, xm, ym, y1, t)
        + adaptive_square(f, xm, x1, ym, y1, t)
}

/// Which nodes [`newton_potential`] evaluates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalNodes {
    /// `None` evaluates the whole grid.
    pub region: Option<Region>,
    /// Only rows and columns `≡ centre (mod stride)` are evaluated.
    pub stride: usize,
}

impl EvalNodes {
    pub fn full() -> Self {
        Self {
            region: None,
            stride: 1,
        }
    }

    pub fn region(region: Region) -> Self {
        Self {
            region: Some(region),
            stride: 1,
        }
    }

    pub fn every(self, stride: usize) -> Self {
        Self {
            stride: stride.max(1),
            ..self
        }
    }
}

/// `h` and `∇h` on the evaluated nodes; zero elsewhere.
#[derive(Debug, Clone)]
pub struct Potential {
    pub h: ScalarField,
    pub grad_x: ScalarField,
    pub grad_y: ScalarField,
    /// `true` on evaluated nodes.
    pub evaluated: Vec<bool>,
}

impl Potential {
    /// `|∇h|` at node `k`.
    pub fn grad_norm(&self, k: usize) -> f64 {
        self.grad_x.values()[k].hypot(self.grad_y.values()[k])
    }
}

/// Direct summation of the log kernel over the source cells. The singular
/// self-cell term uses the exact cell average of `log|·|`; its gradient
/// contribution vanishes by symmetry.
pub fn newton_potential(src: &SourceTerm, nodes: EvalNodes) -> Potential {
    let grid = *src.f.grid();
    let n = grid.n();
    let dx = grid.dx();
    let centre = grid.center();
    let sources: Vec<(i64, i64, f64)> = src
        .f
        .values()
        .iter()
        .enumerate()
        .filter(|(_, v)| **v != 0.0)
        .map(|(k, v)| ((k % n) as i64, (k / n) as i64, v * grid.cell_area()))
        .collect();
    let total = crate::sum::exact_sum(sources.iter().map(|s| s.2));
    let c0 = self_cell_log_average();
    let ln_dx = dx.ln();
    let scale_h = -1.0 / (2.0 * PI);
    let scale_g = -1.0 / (2.0 * PI * dx);

    let wanted = |row: usize, col: usize| {
        let on_stride = |i: usize| i.abs_diff(centre) % nodes.stride == 0;
        on_stride(row)
            && on_stride(col)
            && nodes.region.map_or(true, |r| {
                let (x, y) = grid.point(row, col);
                r.contains_r2(x * x + y * y)
            })
    };

    let rows: Vec<Vec<(usize, f64, f64, f64)>> = (0..n)
        .into_par_iter()
        .map(|row| {
            let mut out = Vec::new();
            for col in 0..n {
                if !wanted(row, col) {
                    continue;
                }
                let (mut h, mut gx, mut gy) = (ExactSum::new(), ExactSum::new(), ExactSum::new());
                let mut self_weight = 0.0;
                for &(sc, sr, w) in &sources {
                    let di = col as i64 - sc;
                    let dj = row as i64 - sr;
                    if di == 0 && dj == 0 {
                        self_weight = w;
                        continue;
                    }
                    let d2 = (di * di + dj * dj) as f64;
                    h.add(0.5 * d2.ln() * w);
                    gx.add(di as f64 / d2 * w);
                    gy.add(dj as f64 / d2 * w);
                }
                h.add(ln_dx * total);
                h.add(c0 * self_weight);
                out.push((col, scale_h * h.value(), scale_g * gx.value(), scale_g * gy.value()));
            }
            out
        })
        .collect();

    let mut h = ScalarField::zeros(grid);
    let mut grad_x = ScalarField::zeros(grid);
    let mut grad_y = ScalarField::zeros(grid);
    let mut evaluated = vec![false; grid.len()];
    for (row, entries) in rows.into_iter().enumerate() {
        for (col, hv, gxv, gyv) in entries {
            let k = row * n + col;
            h.values_mut()[k] = hv;
            grad_x.values_mut()[k] = gxv;
            grad_y.values_mut()[k] = gyv;
            evaluated[k] = true;
        }
    }
    Potential {
        h,
        grad_x,
        grad_y,
        evaluated,
    }
}

/// `max |−Δh − f| / max|f|` over evaluated nodes whose four neighbours are
/// evaluated too. Zero when `f ≡ 0`.
pub fn poisson_residual(pot: &Potential, f: &ScalarField) -> f64 {
    let g = *f.grid();
    let n = g.n();
    let fmax = f.max_abs();
    if fmax == 0.0 {
        return 0.0;
    }
    let h = pot.h.values();
    let ev = &pot.evaluated;
    let inv = 1.0 / g.cell_area();
    let mut worst: f64 = 0.0;
    for row in 1..n - 1 {
        for col in 1..n - 1 {
            let k = row * n + col;
            if !(ev[k] && ev[k - 1] && ev[k + 1] && ev[k - n] && ev[k + n]) {
                continue;
            }
            let lap = (h[k - 1] + h[k + 1] + h[k - n] + h[k + n] - 4.0 * h[k]) * inv;
            worst = worst.max((-lap - f.values()[k]).abs());
        }
    }
    worst / fmax
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarfieldReport {
    /// `sup |x||∇h(x)|` over evaluated nodes with `|x| ≥ 2R`.
    pub sup: f64,
    /// `‖f‖₁/π`
    pub bound: f64,
    pub nodes: usize,
}

impl FarfieldReport {
    pub fn passed(&self) -> bool {
        self.sup <= self.bound * (1.0 + FARFIELD_SLACK)
    }
}

/// Compares `|x||∇h|` beyond `2R` with `‖f‖₁/π`.
pub fn farfield_gradient_check(src: &SourceTerm, pot: &Potential) -> Result<FarfieldReport> {
    let g = *src.f.grid();
    let r2 = 2.0 * src.support_radius;
    if g.half_extent() < r2 {
        return Err(Error::InvalidGrid(format!(
            "half extent {} does not reach 2R = {r2}",
            g.half_extent()
        )));
    }
    let n = g.n();
    let mut sup: f64 = 0.0;
    let mut nodes = 0;
    for row in 0..n {
        for col in 0..n {
            let k = row * n + col;
            let r = g.radius(row, col);
            if pot.evaluated[k] && r >= r2 {
                sup = sup.max(r * pot.grad_norm(k));
                nodes += 1;
            }
        }
    }
    Ok(FarfieldReport {
        sup,
        bound: src.l1_norm / PI,
        nodes,
    })
}

/// `C_R = 4πR² {(2π)^{1/p−1} (2−p)^{−1/p} (4R)^{(2−p)/p}}²`.
pub fn c_r(support_radius: f64, p: f64) -> Result<f64> {
    if !(1.0..2.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("p = {p} is outside [1, 2)")));
    }
    let r = support_radius;
    let inner = (2.0 * PI).powf(1.0 / p - 1.0) * (2.0 - p).powf(-1.0 / p) * (4.0 * r).powf((2.0 - p) / p);
    Ok(4.0 * PI * r * r * inner * inner)
}

/// Conjugate exponent `q = p/(p−1)`, infinite for `p = 1`.
pub fn conjugate(p: f64) -> f64 {
    if p == 1.0 {
        f64::INFINITY
    } else {
        p / (p - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearBound {
    /// `∫_{|x|≤2R} |∇h|²` by midpoint quadrature.
    pub i_h: f64,
    pub c_r: f64,
    pub q: f64,
    /// `‖f‖_q`
    pub lq_norm: f64,
}

impl NearBound {
    /// `C_R ‖f‖_q²`
    pub fn bound(&self) -> f64 {
        self.c_r * self.lq_norm * self.lq_norm
    }

    pub fn passed(&self) -> bool {
        self.i_h <= self.bound()
    }
}

/// Near-field energy of `h` against the bound `C_R ‖f‖_q²`.
pub fn near_bound_ih(src: &SourceTerm, pot: &Potential, p: f64) -> Result<NearBound> {
    let c = c_r(src.support_radius, p)?;
    let q = conjugate(p);
    let i_h = grad_energy(pot, Region::Disk(2.0 * src.support_radius))?;
    Ok(NearBound {
        i_h,
        c_r: c,
        q,
        lq_norm: src.lq_norm(q),
    })
}

/// `∫_region |∇h|²`; every node of the region must have been evaluated.
pub fn grad_energy(pot: &Potential, region: Region) -> Result<f64> {
    let g = *pot.h.grid();
    let n = g.n();
    let mut s = ExactSum::new();
    for row in 0..n {
        for col in 0..n {
            let (x, y) = g.point(row, col);
            if region.contains_r2(x * x + y * y) {
                let k = row * n + col;
                if !pot.evaluated[k] {
                    return Err(Error::InvalidParameter(format!(
                        "potential was not evaluated at node ({row}, {col})"
                    )));
                }
                let gn = pot.grad_norm(k);
                s.add(gn * gn);
            }
        }
    }
    Ok(s.value() * g.cell_area())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusSample {
    pub t: f64,
    /// `∫_{2R ≤ |x| ≤ 2R+t} |∇h|²`
    pub integral: f64,
    /// `(2/π)‖f‖₁² log(2R + t)`
    pub bound: f64,
}

/// The far-field part of the growth estimate on expanding annuli.
pub fn annulus_check(src: &SourceTerm, pot: &Potential, times: &[f64]) -> Result<Vec<AnnulusSample>> {
    let r0 = 2.0 * src.support_radius;
    let f1 = src.l1_norm;
    times
        .iter()
        .map(|&t| {
            let integral = grad_energy(pot, Region::Annulus(r0, r0 + t))?;
            Ok(AnnulusSample {
                t,
                integral,
                bound: 2.0 / PI * f1 * f1 * (r0 + t).ln(),
            })
        })
        .collect()
}
