//! Leapfrog time integration of `u_tt − Δu + a u_t = 0` with centred damping,
//! and the driver that samples diagnostics along a run.
//!
//! One step reads
//!
//! ```text
//! u⁺ = [2u − (1 − a·dt/2)·u⁻ + dt²·Δu] / (1 + a·dt/2)
//! v += (dt/2)(u + u⁺)
//! ```
//!
//! The update touches only the bounding box of the discrete light cone:
//! every node outside it is exactly zero, because the five-point stencil
//! moves support by one node per step.

use rayon::prelude::*;

use crate::diagnostics::{self, DiagContext, DiagnosticsRecord, MultiplierParams};
use crate::error::{Error, Result};
use crate::geometry::{laplacian_with, Boundary, Grid2D, InitialData, ScalarField};

/// Default fraction of the stability limit `dx/√2`.
pub const DEFAULT_CFL_SAFETY: f64 = 0.9;

/// Relative size `max|u on frame| / max|u|` above which a run aborts with
/// [`Error::GridTooSmall`] instead of letting the padding act as a wall.
pub const FRAME_TOLERANCE: f64 = 1e-10;

/// Largest stable step for a given safety factor in `(0, 1)`.
pub fn stable_dt(grid: &Grid2D, cfl_safety: f64) -> Result<f64> {
    if !(cfl_safety > 0.0 && cfl_safety < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "cfl_safety must lie in (0, 1), got {cfl_safety}"
        )));
    }
    Ok(cfl_safety * grid.dx() / std::f64::consts::SQRT_2)
}

/// Inclusive index rectangle `rows × cols`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct IndexBox {
    r0: usize,
    r1: usize,
    c0: usize,
    c1: usize,
}

impl IndexBox {
    fn full(n: usize) -> Self {
        Self {
            r0: 0,
            r1: n - 1,
            c0: 0,
            c1: n - 1,
        }
    }

    fn grow(self, n: usize) -> Self {
        Self {
            r0: self.r0.saturating_sub(1),
            r1: (self.r1 + 1).min(n - 1),
            c0: self.c0.saturating_sub(1),
            c1: (self.c1 + 1).min(n - 1),
        }
    }

    fn union(self, o: Self) -> Self {
        Self {
            r0: self.r0.min(o.r0),
            r1: self.r1.max(o.r1),
            c0: self.c0.min(o.c0),
            c1: self.c1.max(o.c1),
        }
    }

    fn of_support(f: &ScalarField) -> Option<Self> {
        let n = f.grid().n();
        let mut b: Option<Self> = None;
        for (k, &v) in f.values().iter().enumerate() {
            if v != 0.0 {
                let (r, c) = (k / n, k % n);
                let p = Self {
                    r0: r,
                    r1: r,
                    c0: c,
                    c1: c,
                };
                b = Some(b.map_or(p, |b| b.union(p)));
            }
        }
        b
    }

    fn near_frame(&self, n: usize) -> bool {
        self.r0 < 2 || self.c0 < 2 || self.r1 + 2 >= n || self.c1 + 2 >= n
    }
}

/// Two consecutive time levels, the running antiderivative `v = ∫₀ᵗ u ds`
/// and the clock.
#[derive(Debug, Clone)]
pub struct WaveState {
    u_prev: ScalarField,
    u_curr: ScalarField,
    v_accum: ScalarField,
    t: f64,
    dt: f64,
    step_index: usize,
    support_radius: f64,
    boundary: Boundary,
    active: Option<IndexBox>,
}

impl WaveState {
    pub fn u_prev(&self) -> &ScalarField {
        &self.u_prev
    }

    pub fn u_curr(&self) -> &ScalarField {
        &self.u_curr
    }

    pub fn v_accum(&self) -> &ScalarField {
        &self.v_accum
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step_index(&self) -> usize {
        self.step_index
    }

    pub fn support_radius(&self) -> f64 {
        self.support_radius
    }

    pub fn grid(&self) -> &Grid2D {
        self.u_curr.grid()
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// Swaps the two time levels, which reverses the direction of time for
    /// the undamped scheme.
    pub fn reverse(&mut self) {
        std::mem::swap(&mut self.u_prev, &mut self.u_curr);
    }

    /// One leapfrog step. Convenience wrapper; [`run`] reuses a [`Stepper`].
    pub fn step(&mut self, a: &ScalarField) -> Result<StepTrace> {
        Stepper::new(a, self.dt, self.boundary)?.advance(self, None)
    }

    /// Centred velocity `(u⁺ − u⁻)/(2dt)` at the current level, computed by a
    /// trial step that leaves `self` untouched.
    pub fn velocity(&self, stepper: &Stepper) -> Result<ScalarField> {
        let mut peek = self.clone();
        let mut ut = ScalarField::zeros(*self.grid());
        stepper.advance(&mut peek, Some(ut.values_mut()))?;
        Ok(ut)
    }
}

/// Starts the scheme at `t = 0` with the second-order back-step
/// `u⁻ = u₀ − dt·u₁ + (dt²/2)(Δu₀ − a·u₁)`.
pub fn init_state(data: &InitialData, a: &ScalarField, dt: f64) -> Result<WaveState> {
    let mut s = init_fields(&data.u0, &data.u1, a, dt, Boundary::ZeroPad)?;
    s.support_radius = data.support_radius;
    Ok(s)
}

/// Same as [`init_state`] for arbitrary fields (no support requirement).
pub fn init_fields(
    u0: &ScalarField,
    u1: &ScalarField,
    a: &ScalarField,
    dt: f64,
    boundary: Boundary,
) -> Result<WaveState> {
    let grid = *u0.grid();
    let limit = grid.dx() / std::f64::consts::SQRT_2;
    if !(dt > 0.0 && dt < limit) {
        return Err(Error::Cfl { dt, limit });
    }
    let lap = laplacian_with(u0, boundary);
    let half = 0.5 * dt * dt;
    let u_prev = ScalarField::from_values(
        grid,
        u0.values()
            .iter()
            .zip(u1.values())
            .zip(lap.values().iter().zip(a.values()))
            .map(|((&p, &q), (&l, &c))| p - dt * q + half * (l - c * q))
            .collect(),
    )?;
    let active = match boundary {
        Boundary::Periodic => Some(IndexBox::full(grid.n())),
        Boundary::ZeroPad => {
            match (IndexBox::of_support(&u_prev), IndexBox::of_support(u0)) {
                (Some(p), Some(c)) => Some(p.union(c)),
                (p, c) => p.or(c),
            }
        }
    };
    Ok(WaveState {
        u_prev,
        u_curr: u0.clone(),
        v_accum: ScalarField::zeros(grid),
        t: 0.0,
        dt,
        step_index: 0,
        support_radius: f64::INFINITY,
        boundary,
        active,
    })
}

/// Per-step reductions evaluated at the level the step started from.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepTrace {
    /// `∫ a |u_t|²` with centred `u_t` at the old level.
    pub dissipation: f64,
    /// `∫ a |u|²` at the old level.
    pub weighted_mass: f64,
    /// `‖v‖²` at the old level.
    pub l2v: f64,
    /// `max |u|` at the new level.
    pub max_abs: f64,
    /// `max |u|` at the new level outside the stencil cone `B_{R + m·dx}`
    /// (`m` = new step index); zero by construction.
    pub outside_cone: f64,
    /// `max |u|` at the new level outside `B_{R + t + 5dx}`.
    pub outside_continuum: f64,
}

/// Precomputed coefficients of the damped leapfrog update.
#[derive(Debug, Clone)]
pub struct Stepper {
    grid: Grid2D,
    dt: f64,
    boundary: Boundary,
    a: Vec<f64>,
    inv_plus: Vec<f64>,
    minus: Vec<f64>,
    coords: Vec<f64>,
}

impl Stepper {
    pub fn new(a: &ScalarField, dt: f64, boundary: Boundary) -> Result<Self> {
        let grid = *a.grid();
        if !a.is_finite() {
            return Err(Error::InvalidDamping("damping field is not finite".into()));
        }
        let h = 0.5 * dt;
        Ok(Self {
            grid,
            dt,
            boundary,
            a: a.values().to_vec(),
            inv_plus: a.values().iter().map(|&c| 1.0 / (1.0 + c * h)).collect(),
            minus: a.values().iter().map(|&c| 1.0 - c * h).collect(),
            coords: (0..grid.n()).map(|i| grid.coord(i)).collect(),
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Advances `state` by one step. When `ut_out` is given it receives the
    /// centred velocity at the old level (inside the active box; callers
    /// keep the rest of the buffer zeroed).
    pub fn advance(&self, state: &mut WaveState, ut_out: Option<&mut [f64]>) -> Result<StepTrace> {
        debug_assert_eq!(state.dt, self.dt);
        let g = self.grid;
        let n = g.n();
        let next_box = state.active.map(|b| match self.boundary {
            Boundary::ZeroPad => b.grow(n),
            Boundary::Periodic => b,
        });
        let new_step = state.step_index + 1;
        let new_t = new_step as f64 * self.dt;
        let cone = state.support_radius + new_step as f64 * g.dx();
        let cont = state.support_radius + new_t + 5.0 * g.dx();
        // small relative slack so nodes exactly on the cone radius count as inside
        let cone2 = cone * cone * (1.0 + 1e-12);
        let cont2 = cont * cont * (1.0 + 1e-12);

        let Some(bx) = next_box else {
            state.step_index = new_step;
            state.t = new_t;
            std::mem::swap(&mut state.u_prev, &mut state.u_curr);
            return Ok(StepTrace::default());
        };

        let dt = self.dt;
        let dt2 = dt * dt;
        let inv_dx2 = 1.0 / g.cell_area();
        let inv_2dt = 0.5 / dt;
        let half_dt = 0.5 * dt;
        let boundary = self.boundary;
        let cur = state.u_curr.values();
        let prev = state.u_prev.values_mut();
        let v = state.v_accum.values_mut();

        #[derive(Default, Clone, Copy)]
        struct Row {
            d: f64,
            w: f64,
            l2v: f64,
            max: f64,
            cone: f64,
            cont: f64,
            finite: bool,
        }

        let kernel = |row: usize, prev: &mut [f64], v: &mut [f64], ut: Option<&mut [f64]>| -> Row {
            let mut acc = Row {
                finite: true,
                ..Row::default()
            };
            let y = self.coords[row];
            let y2 = y * y;
            let mut ut = ut;
            for col in bx.c0..=bx.c1 {
                let k = row * n + col;
                let c = cur[k];
                let (w, e, s, nn) = match boundary {
                    Boundary::ZeroPad => (
                        if col > 0 { cur[k - 1] } else { 0.0 },
                        if col + 1 < n { cur[k + 1] } else { 0.0 },
                        if row > 0 { cur[k - n] } else { 0.0 },
                        if row + 1 < n { cur[k + n] } else { 0.0 },
                    ),
                    Boundary::Periodic => {
                        crate::geometry::ops_neighbours(cur, n, row, col, Boundary::Periodic)
                    }
                };
                let p = prev[col];
                let lap = (w + e + s + nn - 4.0 * c) * inv_dx2;
                let nxt = (2.0 * c - self.minus[k] * p + dt2 * lap) * self.inv_plus[k];
                let vel = (nxt - p) * inv_2dt;
                let ak = self.a[k];
                acc.d += ak * vel * vel;
                acc.w += ak * c * c;
                acc.l2v += v[col] * v[col];
                v[col] += half_dt * (c + nxt);
                if let Some(ut) = ut.as_deref_mut() {
                    ut[col] = vel;
                }
                prev[col] = nxt;
                let m = nxt.abs();
                acc.finite &= nxt.is_finite();
                acc.max = acc.max.max(m);
                let x = self.coords[col];
                let r2 = x * x + y2;
                if r2 > cone2 {
                    acc.cone = acc.cone.max(m);
                }
                if r2 > cont2 {
                    acc.cont = acc.cont.max(m);
                }
            }
            acc
        };

        let rows: Vec<Row> = match ut_out {
            Some(ut) => prev
                .par_chunks_mut(n)
                .zip(v.par_chunks_mut(n))
                .zip(ut.par_chunks_mut(n))
                .enumerate()
                .filter(|(r, _)| *r >= bx.r0 && *r <= bx.r1)
                .map(|(r, ((p, vv), u))| kernel(r, p, vv, Some(u)))
                .collect(),
            None => prev
                .par_chunks_mut(n)
                .zip(v.par_chunks_mut(n))
                .enumerate()
                .filter(|(r, _)| *r >= bx.r0 && *r <= bx.r1)
                .map(|(r, (p, vv))| kernel(r, p, vv, None))
                .collect(),
        };

        let area = g.cell_area();
        let mut trace = StepTrace::default();
        let mut finite = true;
        for r in &rows {
            trace.dissipation += r.d;
            trace.weighted_mass += r.w;
            trace.l2v += r.l2v;
            trace.max_abs = trace.max_abs.max(r.max);
            trace.outside_cone = trace.outside_cone.max(r.cone);
            trace.outside_continuum = trace.outside_continuum.max(r.cont);
            finite &= r.finite;
        }
        trace.dissipation *= area;
        trace.weighted_mass *= area;
        trace.l2v *= area;

        std::mem::swap(&mut state.u_prev, &mut state.u_curr);
        state.step_index = new_step;
        state.t = new_t;
        state.active = Some(bx);

        if !finite {
            return Err(Error::Unstable {
                step: new_step,
                t: new_t,
            });
        }
        if self.boundary == Boundary::ZeroPad && bx.near_frame(n) {
            let frame_max = frame_max_abs(&state.u_curr);
            if frame_max > FRAME_TOLERANCE * trace.max_abs {
                return Err(Error::GridTooSmall {
                    step: new_step,
                    t: new_t,
                    frame_max,
                    field_max: trace.max_abs,
                });
            }
        }
        Ok(trace)
    }
}

/// `max |f|` on the outermost two rows and columns.
pub fn frame_max_abs(f: &ScalarField) -> f64 {
    let n = f.grid().n();
    let mut m: f64 = 0.0;
    for row in 0..n {
        for col in 0..n {
            if row < 2 || col < 2 || row + 2 >= n || col + 2 >= n {
                m = m.max(f.at(row, col).abs());
            }
        }
    }
    m
}

/// Everything a run needs besides the data and the damping field.
#[derive(Debug, Clone)]
pub struct RunParams {
    pub t_final: f64,
    pub dt: f64,
    /// Record every `sample_every`-th step.
    pub sample_every: usize,
    pub multiplier: MultiplierParams,
}

/// Receives records as they are produced.
pub trait RecordSink {
    fn record(&mut self, rec: &DiagnosticsRecord) -> Result<()>;
}

impl RecordSink for Vec<DiagnosticsRecord> {
    fn record(&mut self, rec: &DiagnosticsRecord) -> Result<()> {
        self.push(*rec);
        Ok(())
    }
}

/// Propagation bookkeeping accumulated over every step of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PropagationLog {
    /// Largest `|u|` ever seen outside the stencil cone. Must be exactly 0.
    pub max_outside_cone: f64,
    /// Largest `max|u outside B_{R+t+5dx}| / max|u|` over all steps.
    pub max_continuum_ratio: f64,
    /// Time at which that ratio was attained.
    pub continuum_ratio_t: f64,
}

/// Output of [`run`].
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<DiagnosticsRecord>,
    /// `G_k − k·E` per record: the part of the multiplier functional that
    /// does not scale with `k`.
    pub multiplier_base: Vec<f64>,
    pub multiplier: MultiplierParams,
    pub propagation: PropagationLog,
    /// State at `t = T_final`.
    pub final_state: WaveState,
}

impl Trajectory {
    /// Rewrites the `Gk` column for a different weight `k`.
    pub fn set_k(&mut self, k: f64) {
        self.multiplier.k = k;
        for (r, base) in self.records.iter_mut().zip(&self.multiplier_base) {
            r.gk = base + k * r.e;
        }
    }

    /// `(t, y)` pairs for one recorded column.
    pub fn series(&self, pick: impl Fn(&DiagnosticsRecord) -> f64) -> Vec<(f64, f64)> {
        self.records.iter().map(|r| (r.t, pick(r))).collect()
    }
}

/// Number of steps to reach `t_final`, tolerant to rounding of `T/dt`.
pub fn step_count(t_final: f64, dt: f64) -> usize {
    (t_final / dt + 1e-9).floor() as usize
}

/// Advances from `t = 0` to `t_final`, recording diagnostics every
/// `sample_every` steps and streaming each record to `sinks`.
pub fn run(
    data: &InitialData,
    a: &ScalarField,
    interior_radius: f64,
    params: &RunParams,
    sinks: &mut [&mut dyn RecordSink],
) -> Result<Trajectory> {
    if params.sample_every == 0 {
        return Err(Error::InvalidParameter("sample_every must be >= 1".into()));
    }
    if !(params.t_final >= 0.0) {
        return Err(Error::InvalidParameter("T_final must be >= 0".into()));
    }
    let grid = *data.grid();
    let reach = data.support_radius + params.t_final + 4.0 * grid.dx();
    if reach > grid.half_extent() {
        return Err(Error::InvalidGrid(format!(
            "R + T + 4dx = {reach} exceeds half_extent {}",
            grid.half_extent()
        )));
    }
    let dt = params.dt;
    let stepper = Stepper::new(a, dt, Boundary::ZeroPad)?;
    let mut state = init_state(data, a, dt)?;
    let ctx = DiagContext::new(a, interior_radius, params.multiplier);
    let n_steps = step_count(params.t_final, dt);

    let mut records = Vec::new();
    let mut bases = Vec::new();
    let mut emit = |rec: DiagnosticsRecord, base: f64, records: &mut Vec<_>| -> Result<()> {
        for s in sinks.iter_mut() {
            s.record(&rec)?;
        }
        records.push(rec);
        bases.push(base);
        Ok(())
    };

    // level 0 from the data itself
    let m0 = diagnostics::measure(&data.u0, &data.u1, &ctx);
    let e0 = m0.energy;
    let mut d_prev = diagnostics::weighted_l2(a, &data.u1);
    let mut w_prev = m0.weighted_mass;
    let mut diss = 0.0;
    let mut wl2 = 0.0;
    let rec0 = m0.record(0.0, 0.0, 0.0, e0, 0.0, params.multiplier.k);
    emit(rec0, m0.multiplier_base, &mut records)?;

    let mut ut = ScalarField::zeros(grid);
    let mut prop = PropagationLog::default();
    let track = |tr: &StepTrace, t: f64, prop: &mut PropagationLog| {
        prop.max_outside_cone = prop.max_outside_cone.max(tr.outside_cone);
        if tr.max_abs > 0.0 {
            let ratio = tr.outside_continuum / tr.max_abs;
            if ratio > prop.max_continuum_ratio {
                prop.max_continuum_ratio = ratio;
                prop.continuum_ratio_t = t;
            }
        }
    };

    let mut level = |n: usize,
                     tr: &StepTrace,
                     u: &ScalarField,
                     ut: &ScalarField,
                     diss: &mut f64,
                     wl2: &mut f64,
                     d_prev: &mut f64,
                     w_prev: &mut f64,
                     records: &mut Vec<DiagnosticsRecord>|
     -> Result<()> {
        *diss += 0.5 * dt * (*d_prev + tr.dissipation);
        *wl2 += 0.5 * dt * (*w_prev + tr.weighted_mass);
        *d_prev = tr.dissipation;
        *w_prev = tr.weighted_mass;
        if n % params.sample_every == 0 {
            let m = diagnostics::measure(u, ut, &ctx);
            let rec = m.record(n as f64 * dt, *diss, *wl2, e0, tr.l2v, params.multiplier.k);
            emit(rec, m.multiplier_base, records)?;
        }
        Ok(())
    };

    for n in 0..n_steps {
        let want = n > 0 && n % params.sample_every == 0;
        let tr = stepper.advance(&mut state, want.then_some(ut.values_mut()))?;
        track(&tr, state.t, &mut prop);
        if n > 0 {
            level(n, &tr, &state.u_prev, &ut, &mut diss, &mut wl2, &mut d_prev, &mut w_prev, &mut records)?;
        }
    }
    if n_steps > 0 {
        // the last level needs one step beyond T for its centred velocity
        let mut peek = state.clone();
        let tr = stepper.advance(&mut peek, Some(ut.values_mut()))?;
        level(n_steps, &tr, &state.u_curr, &ut, &mut diss, &mut wl2, &mut d_prev, &mut w_prev, &mut records)?;
    }

    Ok(Trajectory {
        records,
        multiplier_base: bases,
        multiplier: params.multiplier,
        propagation: prop,
        final_state: state,
    })
}
