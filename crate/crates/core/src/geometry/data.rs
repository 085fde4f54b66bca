use super::{Grid2D, ScalarField};
use crate::error::{Error, Result};

/// `amplitude · (1 − r²/ρ²)⁴` on the closed disk of radius `ρ`, zero outside.
/// The kernel is `C³` across the rim.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub center: (f64, f64),
    pub radius: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn new(center: (f64, f64), radius: f64, amplitude: f64) -> Self {
        Self {
            center,
            radius,
            amplitude,
        }
    }

    /// Radius of the smallest origin-centred disk containing the support.
    pub fn reach(&self) -> f64 {
        self.center.0.hypot(self.center.1) + self.radius
    }

    #[inline]
    pub fn value(&self, x: f64, y: f64) -> f64 {
        let (dx, dy) = (x - self.center.0, y - self.center.1);
        let s = (dx * dx + dy * dy) / (self.radius * self.radius);
        if s >= 1.0 {
            0.0
        } else {
            let w = 1.0 - s;
            let w2 = w * w;
            self.amplitude * w2 * w2
        }
    }
}

pub fn make_bump(bump: &Bump, grid: &Grid2D) -> Result<ScalarField> {
    if !(bump.radius.is_finite() && bump.radius > 0.0) {
        return Err(Error::InvalidData(format!(
            "bump radius must be positive, got {}",
            bump.radius
        )));
    }
    let x = grid.half_extent();
    let (cx, cy) = bump.center;
    if cx.abs() + bump.radius > x || cy.abs() + bump.radius > x {
        return Err(Error::InvalidData(format!(
            "bump at ({cx}, {cy}) with radius {} leaves the grid [-{x}, {x}]^2",
            bump.radius
        )));
    }
    Ok(ScalarField::from_fn(*grid, |x, y| bump.value(x, y)))
}

/// Uniform disk `value · 1_{|x−c| ≤ ρ}` stored as cell averages: every node
/// carries the exact fraction of its `dx`-cell covered by the disk, so the
/// total mass is exact and the potential converges at second order.
pub fn make_disk(center: (f64, f64), radius: f64, value: f64, grid: &Grid2D) -> Result<ScalarField> {
    let reach = radius + grid.dx();
    if !(radius > 0.0)
        || center.0.abs() + reach > grid.half_extent()
        || center.1.abs() + reach > grid.half_extent()
    {
        return Err(Error::InvalidData("disk leaves the grid".into()));
    }
    let h = grid.dx();
    let cell = h * h;
    Ok(ScalarField::from_fn(*grid, |x, y| {
        let (x, y) = (x - center.0, y - center.1);
        let area = disk_rect_area(radius, x - 0.5 * h, x + 0.5 * h, y - 0.5 * h, y + 0.5 * h);
        value * (area / cell).min(1.0)
    }))
}

/// Area of `{x² + y² ≤ r²} ∩ [x0, x1] × [y0, y1]`.
pub(crate) fn disk_rect_area(r: f64, x0: f64, x1: f64, y0: f64, y1: f64) -> f64 {
    let r2 = r * r;
    let half_chord = |x: f64| (r2 - x * x).max(0.0).sqrt();
    // ∫ √(r² − x²) dx
    let prim = |x: f64| {
        let x = x.clamp(-r, r);
        0.5 * (x * half_chord(x) + r2 * (x / r).asin())
    };
    let mut cuts = vec![x0, x1, -r, r];
    for y in [y0, y1] {
        if y.abs() < r {
            let c = (r2 - y * y).sqrt();
            cuts.extend([-c, c]);
        }
    }
    let mut cuts: Vec<f64> = cuts.into_iter().filter(|c| *c >= x0 && *c <= x1).collect();
    cuts.sort_by(f64::total_cmp);
    let mut area = 0.0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b <= a {
            continue;
        }
        let s = half_chord(0.5 * (a + b));
        let top_is_arc = s < y1;
        let bottom_is_arc = -s > y0;
        let top = if top_is_arc { s } else { y1 };
        let bottom = if bottom_is_arc { -s } else { y0 };
        if top <= bottom {
            continue;
        }
        let arc = prim(b) - prim(a);
        let len = b - a;
        area += if top_is_arc { arc } else { y1 * len };
        area -= if bottom_is_arc { -arc } else { y0 * len };
    }
    area
}

/// Initial displacement and velocity, both supported in `B_R(0)`.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub u0: ScalarField,
    pub u1: ScalarField,
    pub support_radius: f64,
}

impl InitialData {
    /// Checks the support claim node by node.
    pub fn new(u0: ScalarField, u1: ScalarField, support_radius: f64) -> Result<Self> {
        if u0.grid() != u1.grid() {
            return Err(Error::InvalidData("u0 and u1 live on different grids".into()));
        }
        if !(support_radius > 0.0) {
            return Err(Error::InvalidData(format!(
                "support radius must be positive, got {support_radius}"
            )));
        }
        for (name, f) in [("u0", &u0), ("u1", &u1)] {
            if !f.is_finite() {
                return Err(Error::InvalidData(format!("{name} has non-finite values")));
            }
            if f.max_abs_outside(support_radius) != 0.0 {
                return Err(Error::InvalidData(format!(
                    "{name} does not vanish outside B_R with R = {support_radius}"
                )));
            }
        }
        Ok(Self {
            u0,
            u1,
            support_radius,
        })
    }

    /// Sums of bumps for `u₀` and `u₁`.
    pub fn from_bumps(grid: &Grid2D, u0: &[Bump], u1: &[Bump], support_radius: f64) -> Result<Self> {
        let build = |bumps: &[Bump]| -> Result<ScalarField> {
            let mut f = ScalarField::zeros(*grid);
            for b in bumps {
                if b.reach() > support_radius * (1.0 + 1e-12) {
                    return Err(Error::InvalidData(format!(
                        "bump at {:?} radius {} reaches |x| = {} > R = {support_radius}",
                        b.center,
                        b.radius,
                        b.reach()
                    )));
                }
                let g = make_bump(b, grid)?;
                for (d, s) in f.values_mut().iter_mut().zip(g.values()) {
                    *d += s;
                }
            }
            Ok(f)
        };
        Self::new(build(u0)?, build(u1)?, support_radius)
    }

    pub fn grid(&self) -> &Grid2D {
        self.u0.grid()
    }
}
