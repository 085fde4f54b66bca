//! Independent reference solutions shared by the oracle tests and the
//! acceptance run. Everything here is written from the continuum problem,
//! not from the solver's internals.

#![allow(dead_code)]

use dampwave::geometry::{Boundary, Grid2D, ScalarField};
use dampwave::solver::{init_fields, Stepper};

/// `(1 − (x/w)²)⁴` on `|x| < w`, a C³ pulse.
pub fn pulse(x: f64, w: f64) -> f64 {
    let s = x / w;
    if s.abs() < 1.0 {
        (1.0 - s * s).powi(4)
    } else {
        0.0
    }
}

pub fn pulse_slope(x: f64, w: f64) -> f64 {
    let s = x / w;
    if s.abs() < 1.0 {
        -8.0 * s * (1.0 - s * s).powi(3) / w
    } else {
        0.0
    }
}

/// Max error against the right-moving wave `u = f(x₁ − t)`, started from
/// `u₀ = f(x₁)`, `u₁ = −f′(x₁)`, on a periodic grid with `n` nodes per side.
pub fn dalembert_error(n: usize, t_final: f64) -> f64 {
    let w = 1.5;
    let x0 = -3.0;
    let grid = Grid2D::new(8.0, n).unwrap();
    let u0 = ScalarField::from_fn(grid, |x, _| pulse(x - x0, w));
    let u1 = ScalarField::from_fn(grid, |x, _| -pulse_slope(x - x0, w));
    let a = ScalarField::zeros(grid);
    let dt = 0.9 * grid.dx() / std::f64::consts::SQRT_2;
    let stepper = Stepper::new(&a, dt, Boundary::Periodic).unwrap();
    let mut state = init_fields(&u0, &u1, &a, dt, Boundary::Periodic).unwrap();
    while state.t() + 0.5 * dt < t_final {
        stepper.advance(&mut state, None).unwrap();
    }
    let t = state.t();
    let u = state.u_curr();
    let mut err: f64 = 0.0;
    for row in 0..n {
        for col in 0..n {
            let (x, _) = grid.point(row, col);
            err = err.max((u.at(row, col) - pulse(x - x0 - t, w)).abs());
        }
    }
    err
}

/// Max error against `u(t) = u₀ + (u₁/c)(1 − e^{−ct})`, the solution for
/// spatially constant data and damping.
pub fn damped_ode_error(dt: f64, t_final: f64) -> f64 {
    let (c, v0, v1) = (0.8, 0.3, 1.1);
    let grid = Grid2D::new(1.0, 9).unwrap();
    let u0 = ScalarField::from_fn(grid, |_, _| v0);
    let u1 = ScalarField::from_fn(grid, |_, _| v1);
    let a = ScalarField::from_fn(grid, |_, _| c);
    let stepper = Stepper::new(&a, dt, Boundary::Periodic).unwrap();
    let mut state = init_fields(&u0, &u1, &a, dt, Boundary::Periodic).unwrap();
    let mut err: f64 = 0.0;
    while state.t() + 0.5 * dt < t_final {
        stepper.advance(&mut state, None).unwrap();
        let exact = v0 + v1 / c * (1.0 - (-c * state.t()).exp());
        err = err.max(state.u_curr().values().iter().map(|u| (u - exact).abs()).fold(0.0, f64::max));
    }
    err
}

/// Runs the undamped scheme forward `steps` steps, swaps the levels and runs
/// back. Returns `max|u − u₀| / max|u₀|`.
pub fn reversal_defect(n: usize, steps: usize) -> f64 {
    let grid = Grid2D::new(20.0, n).unwrap();
    let u0 = ScalarField::from_fn(grid, |x, y| pulse((x * x + y * y).sqrt(), 2.0));
    let u1 = ScalarField::from_fn(grid, |x, y| 0.5 * pulse(((x - 0.5).powi(2) + y * y).sqrt(), 1.5));
    let a = ScalarField::zeros(grid);
    let dt = 0.9 * grid.dx() / std::f64::consts::SQRT_2;
    let stepper = Stepper::new(&a, dt, Boundary::ZeroPad).unwrap();
    let mut state = init_fields(&u0, &u1, &a, dt, Boundary::ZeroPad).unwrap();
    for _ in 0..steps {
        stepper.advance(&mut state, None).unwrap();
    }
    state.reverse();
    // after steps − 1 reversed steps the current level is back at t = 0
    for _ in 0..steps - 1 {
        stepper.advance(&mut state, None).unwrap();
    }
    let diff = state
        .u_curr()
        .values()
        .iter()
        .zip(u0.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    diff / u0.max_abs()
}

/// Least-squares slope of `log2 err` against `log2 h`.
pub fn convergence_order(h: &[f64], err: &[f64]) -> f64 {
    let xs: Vec<f64> = h.iter().map(|v| v.log2()).collect();
    let ys: Vec<f64> = err.iter().map(|v| v.log2()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Every io round trip, on a short real run. `Err` names the first one that
/// is not bit-exact.
pub fn io_roundtrips(dir: &std::path::Path) -> Result<(), String> {
    use dampwave::io::{
        dump_field, load_field, parse_config, read_records, records_to_csv, write_records, CsvSink,
        ExperimentConfig,
    };
    use dampwave::presets::simulate;

    let mut cfg = ExperimentConfig::default();
    cfg.n = 121;
    cfg.half_extent = 12.0;
    cfg.t_final = 6.0;
    cfg.sample_every = 3;
    cfg.u1 = vec![dampwave::geometry::Bump::new((0.3, -0.2), 1.1, 0.7)];
    let csv_path = dir.join("stream.csv");
    let mut sink = CsvSink::create(&csv_path).map_err(|e| e.to_string())?;
    let sim = simulate(&cfg, &mut [&mut sink]).map_err(|e| e.to_string())?;
    sink.finish().map_err(|e| e.to_string())?;
    let records = &sim.trajectory.records;

    let streamed = read_records(&csv_path).map_err(|e| e.to_string())?;
    let bits = |r: &[dampwave::diagnostics::DiagnosticsRecord]| -> Vec<u64> {
        r.iter().flat_map(|x| x.to_array()).map(f64::to_bits).collect()
    };
    if bits(&streamed) != bits(records) {
        return Err("streamed CSV".into());
    }
    let path = dir.join("series.csv");
    write_records(records, &path).map_err(|e| e.to_string())?;
    let back = read_records(&path).map_err(|e| e.to_string())?;
    if bits(&back) != bits(records) || records_to_csv(&back) != records_to_csv(records) {
        return Err("series CSV".into());
    }

    for (name, field) in [("u", sim.trajectory.final_state.u_curr()), ("v", sim.trajectory.final_state.v_accum())] {
        let p = dir.join(format!("{name}.bin"));
        dump_field(field, &p).map_err(|e| e.to_string())?;
        let g = load_field(&p).map_err(|e| e.to_string())?;
        let same = g.grid() == field.grid()
            && g.values().iter().map(|v| v.to_bits()).eq(field.values().iter().map(|v| v.to_bits()));
        if !same {
            return Err(format!("field dump {name}"));
        }
    }

    let text = cfg.to_config_string();
    let again = parse_config(&text, &dir.join("cfg")).map_err(|e| e.to_string())?;
    if again != cfg || again.to_config_string() != text {
        return Err("config".into());
    }
    Ok(())
}
