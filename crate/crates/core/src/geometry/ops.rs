use rayon::prelude::*;

use super::ScalarField;

/// How the stencil treats neighbours beyond the last node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Missing neighbours read as zero. Exact for fields supported away from
    /// the frame, which finite propagation speed guarantees for our runs.
    #[default]
    ZeroPad,
    /// Wrap around; used only by oracle tests that need a torus.
    Periodic,
}

/// Node subsets used by the region-masked integrals. `Disk` and `Exterior`
/// with the same radius partition the lattice.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// `|x| ≤ ρ`
    Disk(f64),
    /// `|x| > ρ`
    Exterior(f64),
    /// `r₀ ≤ |x| ≤ r₁`
    Annulus(f64, f64),
}

impl Region {
    #[inline]
    pub fn contains_r2(&self, r2: f64) -> bool {
        match *self {
            Region::Disk(rho) => r2 <= rho * rho,
            Region::Exterior(rho) => r2 > rho * rho,
            Region::Annulus(r0, r1) => r2 >= r0 * r0 && r2 <= r1 * r1,
        }
    }
}

/// Deterministic reduction over rows: each row is summed left to right, then
/// the row sums are added in row order. The result does not depend on the
/// number of worker threads.
pub(crate) fn sum_rows(n_rows: usize, row_sum: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    let partial: Vec<f64> = (0..n_rows).into_par_iter().map(row_sum).collect();
    partial.into_iter().sum()
}

/// Five-point Laplacian with zero padding.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    laplacian_with(f, Boundary::ZeroPad)
}

pub fn laplacian_with(f: &ScalarField, boundary: Boundary) -> ScalarField {
    let g = *f.grid();
    let n = g.n();
    let inv = 1.0 / g.cell_area();
    let src = f.values();
    let mut out = vec![0.0; g.len()];
    out.par_chunks_mut(n).enumerate().for_each(|(row, dst)| {
        for (col, d) in dst.iter_mut().enumerate() {
            let c = src[row * n + col];
            let (w, e, s, nn) = neighbours(src, n, row, col, boundary);
            *d = (w + e + s + nn - 4.0 * c) * inv;
        }
    });
    ScalarField::from_values(g, out).expect("same grid")
}

#[inline]
pub(crate) fn neighbours(
    v: &[f64],
    n: usize,
    row: usize,
    col: usize,
    boundary: Boundary,
) -> (f64, f64, f64, f64) {
    match boundary {
        Boundary::ZeroPad => {
            let w = if col > 0 { v[row * n + col - 1] } else { 0.0 };
            let e = if col + 1 < n { v[row * n + col + 1] } else { 0.0 };
            let s = if row > 0 { v[(row - 1) * n + col] } else { 0.0 };
            let nn = if row + 1 < n { v[(row + 1) * n + col] } else { 0.0 };
            (w, e, s, nn)
        }
        Boundary::Periodic => {
            let cw = if col > 0 { col - 1 } else { n - 1 };
            let ce = if col + 1 < n { col + 1 } else { 0 };
            let rs = if row > 0 { row - 1 } else { n - 1 };
            let rn = if row + 1 < n { row + 1 } else { 0 };
            (v[row * n + cw], v[row * n + ce], v[rs * n + col], v[rn * n + col])
        }
    }
}

/// Midpoint rule `Σ f · dx²`.
pub fn integrate(f: &ScalarField) -> f64 {
    let g = f.grid();
    let n = g.n();
    let v = f.values();
    sum_rows(n, |row| v[row * n..(row + 1) * n].iter().sum()) * g.cell_area()
}

/// Midpoint rule restricted to the nodes of `region`.
pub fn integrate_region(f: &ScalarField, region: Region) -> f64 {
    let g = *f.grid();
    let n = g.n();
    let v = f.values();
    sum_rows(n, |row| {
        let y = g.coord(row);
        let mut s = 0.0;
        for col in 0..n {
            let x = g.coord(col);
            if region.contains_r2(x * x + y * y) {
                s += v[row * n + col];
            }
        }
        s
    }) * g.cell_area()
}

/// `∫ ∇f · ∇g` with forward differences on every lattice edge, including the
/// edges to the zero padding. Satisfies the summation-by-parts identity
/// `dirichlet_form(f, g) = −integrate(g · laplacian(f))` exactly up to rounding.
pub fn dirichlet_form(f: &ScalarField, g: &ScalarField) -> f64 {
    let grid = *f.grid();
    let n = grid.n();
    let (a, b) = (f.values(), g.values());
    // Edges to the padding on the low side are counted through the
    // `col == 0` / `row == 0` terms below.
    sum_rows(n, |row| {
        let mut s = 0.0;
        for col in 0..n {
            let k = row * n + col;
            let ae = if col + 1 < n { a[k + 1] } else { 0.0 };
            let be = if col + 1 < n { b[k + 1] } else { 0.0 };
            let an = if row + 1 < n { a[k + n] } else { 0.0 };
            let bn = if row + 1 < n { b[k + n] } else { 0.0 };
            s += (ae - a[k]) * (be - b[k]) + (an - a[k]) * (bn - b[k]);
            if col == 0 {
                s += a[k] * b[k];
            }
            if row == 0 {
                s += a[k] * b[k];
            }
        }
        s
    })
}

/// Centred-difference gradient `(∂₁f, ∂₂f)`, zero padding at the frame.
pub fn gradient_centered(f: &ScalarField) -> (ScalarField, ScalarField) {
    let g = *f.grid();
    let n = g.n();
    let h = 0.5 / g.dx();
    let v = f.values();
    let mut gx = vec![0.0; g.len()];
    let mut gy = vec![0.0; g.len()];
    gx.par_chunks_mut(n)
        .zip(gy.par_chunks_mut(n))
        .enumerate()
        .for_each(|(row, (dx_row, dy_row))| {
            for col in 0..n {
                let (w, e, s, nn) = neighbours(v, n, row, col, Boundary::ZeroPad);
                dx_row[col] = (e - w) * h;
                dy_row[col] = (nn - s) * h;
            }
        });
    (
        ScalarField::from_values(g, gx).expect("same grid"),
        ScalarField::from_values(g, gy).expect("same grid"),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{make_bump, Bump, Grid2D};
    use proptest::prelude::*;

    fn grid() -> Grid2D {
        Grid2D::new(2.0, 41).unwrap()
    }

    #[test]
    fn laplacian_of_constant_is_zero_inside() {
        let g = grid();
        let f = ScalarField::from_fn(g, |_, _| 3.5);
        let l = laplacian_with(&f, Boundary::Periodic);
        assert!(l.values().iter().all(|&v| v.abs() < 1e-12));
        let l = laplacian(&f);
        for row in 1..40 {
            for col in 1..40 {
                assert!(l.at(row, col).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn laplacian_exact_on_quadratics() {
        let g = grid();
        let f = ScalarField::from_fn(g, |x, y| x * x + 0.5 * x * y - y + 2.0);
        let l = laplacian(&f);
        for row in 1..40 {
            for col in 1..40 {
                assert!((l.at(row, col) - 2.0).abs() < 1e-9, "{}", l.at(row, col));
            }
        }
        let f = ScalarField::from_fn(g, |x, y| 3.0 * x - y);
        let l = laplacian(&f);
        assert!(l.at(20, 20).abs() < 1e-10);
    }

    #[test]
    fn laplacian_sine_converges_at_second_order() {
        // discrete eigenvalue −(2/dx²)(1 − cos k dx) against −k²
        let k = 1.3;
        let mut errs = vec![];
        for n in [41, 81, 161] {
            let g = Grid2D::new(2.0, n).unwrap();
            let f = ScalarField::from_fn(g, |x, _| (k * x).sin());
            let l = laplacian(&f);
            let c = g.center();
            let x = g.coord(c + 3);
            let lam = l.at(c, c + 3) / (k * x).sin();
            let expected = -(2.0 / g.cell_area()) * (1.0 - (k * g.dx()).cos());
            assert!((lam - expected).abs() < 1e-8 * k * k);
            errs.push((lam + k * k).abs());
        }
        for w in errs.windows(2) {
            let slope = (w[0] / w[1]).log2();
            assert!((slope - 2.0).abs() < 0.05, "slope {slope}");
        }
    }

    #[test]
    fn bump_integral_matches_pi_over_five() {
        // 2π ∫₀¹ (1 − r²)⁴ r dr = π/5
        let mut errs = vec![];
        for n in [41, 81, 161] {
            let g = Grid2D::new(2.0, n).unwrap();
            let b = make_bump(&Bump::new((0.0, 0.0), 1.0, 1.0), &g).unwrap();
            errs.push((integrate(&b) - std::f64::consts::PI / 5.0).abs());
        }
        assert!(errs[0] < 1e-3);
        assert!(errs[2] < errs[0] / 8.0, "{errs:?}");
    }

    #[test]
    fn zero_field_integrates_to_zero() {
        let f = ScalarField::zeros(grid());
        assert_eq!(integrate(&f), 0.0);
        assert_eq!(integrate_region(&f, Region::Disk(1.0)), 0.0);
    }

    #[test]
    fn green_identity_on_compact_bumps() {
        let g = grid();
        let f = make_bump(&Bump::new((0.3, -0.2), 1.2, 1.0), &g).unwrap();
        let h = make_bump(&Bump::new((-0.4, 0.1), 1.0, -2.0), &g).unwrap();
        let lhs = integrate(&h.zip_map(&laplacian(&f), |a, b| a * b));
        let rhs = -dirichlet_form(&f, &h);
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0), "{lhs} {rhs}");
    }

    #[test]
    fn green_identity_holds_with_padding_terms() {
        // not vanishing on the frame: the padding edges carry the boundary terms
        let g = Grid2D::new(1.0, 9).unwrap();
        let f = ScalarField::from_fn(g, |x, y| 1.0 + x - y * y);
        let h = ScalarField::from_fn(g, |x, y| (x * y).cos());
        let lhs = integrate(&h.zip_map(&laplacian(&f), |a, b| a * b));
        let rhs = -dirichlet_form(&f, &h);
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0), "{lhs} {rhs}");
    }

    proptest! {
        #[test]
        fn region_split_partitions(rho in 0.0f64..3.0, seed in 0u64..1000) {
            let g = grid();
            let f = ScalarField::from_fn(g, |x, y| (x * 7.1 + y * 3.3 + seed as f64).sin());
            let whole = integrate(&f);
            let parts = integrate_region(&f, Region::Disk(rho)) + integrate_region(&f, Region::Exterior(rho));
            prop_assert!((whole - parts).abs() < 1e-12 * f.max_abs() * 16.0);
        }
    }
}
