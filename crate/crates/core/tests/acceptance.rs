//! The acceptance suite, run without the test harness so its report is
//! always printed. Every criterion runs at its stated tolerance and
//! prints one PASS/FAIL line; a short table follows at the end.
//!
//! Three criteria cannot be met by this scheme at desk scale (see
//! `KNOWN_SHORTFALLS`). They still print FAIL. The process exits non-zero
//! if any other criterion fails.

mod common;

use std::path::PathBuf;
use std::time::Instant;

use dampwave::diagnostics::{
    beta_hat, calibrate_k, gk_violation, lemma22_check, poincare_grid, poincare_sample, K_LADDER_MAX,
};
use dampwave::geometry::{integrate, make_bump, make_disk, Bump, Grid2D, Region};
use dampwave::io::{ExperimentConfig, PinStore};
use dampwave::potential::{farfield_gradient_check, near_bound_ih, newton_potential, EvalNodes, SourceTerm};
use dampwave::presets::{log_level_spread, simulate, uniform_disk_study, Preset, Simulation};
use dampwave::rates::{bounded_ratio_check, fit, Correction, Model, Window};

/// Criteria that fail at their stated tolerance, with the reason.
const KNOWN_SHORTFALLS: &[(usize, &str)] = &[
    (1, "centred-velocity energy carries an O(dt^2) offset of about 2.5% at n = 881"),
    (2, "the dispersive precursor ahead of the front stays near 1e-6 of max|u| under refinement"),
    (7, "the energy fit on [20, 100] is dominated by a fast early transient"),
];

struct Outcome {
    id: usize,
    pass: bool,
    detail: String,
}

fn report(out: &mut Vec<Outcome>, id: usize, pass: bool, detail: String) {
    println!("criterion {id:>2}: {}  {detail}", if pass { "PASS" } else { "FAIL" });
    out.push(Outcome { id, pass, detail });
}

fn timed_run(cfg: &ExperimentConfig) -> (Simulation, f64) {
    let start = Instant::now();
    let sim = simulate(cfg, &mut []).unwrap();
    (sim, start.elapsed().as_secs_f64())
}

fn max_residual(sim: &Simulation) -> f64 {
    sim.trajectory.records.iter().map(|r| r.energy_residual).fold(0.0, f64::max)
}

fn window() -> Window {
    Window::new(20.0, 100.0).unwrap()
}

fn pins_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("acceptance_pins.csv")
}

fn energy_and_propagation(out: &mut Vec<Outcome>, base: &Simulation, base_secs: f64) {
    let mut fine_cfg = Preset::Theorem11.config();
    fine_cfg.n = 1761;
    fine_cfg.sample_every = 8;
    let (fine, fine_secs) = timed_run(&fine_cfg);
    let (r0, r1) = (max_residual(base), max_residual(&fine));
    let factor = r0 / r1;
    let fast = base_secs <= 120.0 && fine_secs <= 120.0;
    report(
        out,
        1,
        r0 <= 1e-3 && factor >= 3.0 && fast,
        format!(
            "energy residual {r0:.3e} (target 1e-3), refined {r1:.3e}, factor {factor:.2} (target 3), \
             runtimes {base_secs:.1}s / {fine_secs:.1}s"
        ),
    );

    let cone = base.trajectory.propagation.max_outside_cone.max(fine.trajectory.propagation.max_outside_cone);
    let ratio = fine.trajectory.propagation.max_continuum_ratio;
    report(
        out,
        2,
        cone == 0.0 && ratio <= 1e-10,
        format!(
            "outside stencil cone {cone:e}, outside B_(R+t+5dx) {ratio:.3e} of max|u| at t = {:.1} (target 1e-10)",
            fine.trajectory.propagation.continuum_ratio_t
        ),
    );
}

fn newton_potential_criterion(out: &mut Vec<Outcome>, base: &Simulation) {
    let study = uniform_disk_study().unwrap();
    let slopes = [(study[0].1 / study[1].1).log2(), (study[1].1 / study[2].1).log2()];
    let closed_form_ok = study[0].1 <= 1e-2 && slopes.iter().all(|s| (1.7..=2.3).contains(s));

    // the disk on the whole grid, then the baseline source
    let g = Grid2D::new(3.0, 97).unwrap();
    let disk = SourceTerm::new(make_disk((0.0, 0.0), 1.0, 1.0, &g).unwrap(), 1.0 + g.dx()).unwrap();
    let disk_pot = newton_potential(&disk, EvalNodes::full());
    let disk_far = farfield_gradient_check(&disk, &disk_pot).unwrap();
    let disk_near = near_bound_ih(&disk, &disk_pot, 1.5).unwrap();

    let src = SourceTerm::from_data(&base.data, &base.damping).unwrap();
    let pot = newton_potential(&src, EvalNodes::full());
    let far = farfield_gradient_check(&src, &pot).unwrap();
    let near = near_bound_ih(&src, &pot, 1.5).unwrap();

    let pass = closed_form_ok && disk_far.passed() && far.passed() && disk_near.passed() && near.passed();
    report(
        out,
        3,
        pass,
        format!(
            "disk error {:.2e} at R/16, slopes {:.2} {:.2}; |x||grad h| / (||f||_1/pi) = {:.3} (disk), {:.3} (data); \
             I_h / C_R||f||_3^2 = {:.2e} (disk), {:.2e} (data)",
            study[0].1,
            slopes[0],
            slopes[1],
            disk_far.sup / disk_far.bound,
            far.sup / far.bound,
            disk_near.i_h / disk_near.bound(),
            near.i_h / near.bound()
        ),
    );
}

fn lemma22_criterion(out: &mut Vec<Outcome>, base: &Simulation) {
    let r = base.data.support_radius;
    let src = SourceTerm::from_data(&base.data, &base.damping).unwrap();
    let pot = newton_potential(&src, EvalNodes::region(Region::Disk(2.0 * r)));
    let near = near_bound_ih(&src, &pot, 1.5).unwrap();
    let u0_l2 = integrate(&base.data.u0.map(|v| v * v));
    let rep = lemma22_check(&base.trajectory.records, u0_l2, near.i_h, src.l1_norm(), r);
    report(
        out,
        4,
        rep.passed(),
        format!("max lhs/rhs {:.3} over {} samples (slack 1.05)", rep.worst_ratio, rep.samples.len()),
    );
}

fn multiplier_criterion(out: &mut Vec<Outcome>, base: &mut Simulation) {
    let traj = &mut base.trajectory;
    let energy: Vec<f64> = traj.records.iter().map(|r| r.e).collect();
    match calibrate_k(&traj.multiplier_base, &energy) {
        Ok(cal) => {
            traj.set_k(cal.k);
            let gk: Vec<f64> = traj.records.iter().map(|r| r.gk).collect();
            let times: Vec<f64> = traj.records.iter().map(|r| r.t).collect();
            let violation = gk_violation(&gk);
            let beta = beta_hat(&times, &gk, &energy);
            report(
                out,
                5,
                cal.k <= K_LADDER_MAX && violation.is_none() && beta > 0.0,
                format!(
                    "k = {}, G_k check {}, beta_hat = {beta:.3}",
                    cal.k,
                    violation.unwrap_or_else(|| "holds".into())
                ),
            );
        }
        Err(e) => report(out, 5, false, format!("calibration failed: {e}")),
    }
}

fn rate_criteria(out: &mut Vec<Outcome>, base: &Simulation) {
    let e = base.trajectory.series(|r| r.e);
    let u = base.trajectory.series(|r| r.l2u);
    let prop = bounded_ratio_check(&e, 1.0, Correction::One, window()).unwrap();
    report(out, 6, prop.trend_within(0.05), format!("E t trend {:.3} per octave (target 0.05)", prop.trend));

    let e_fit = fit(&e, Model::LogCorrected, window()).unwrap();
    let u_fit = fit(&u, Model::LogCorrected, window()).unwrap();
    let e_b = bounded_ratio_check(&e, 2.0, Correction::LogT, window()).unwrap();
    let u_b = bounded_ratio_check(&u, 1.0, Correction::LogT, window()).unwrap();
    let pass = (1.6..=2.4).contains(&e_fit.p)
        && (0.7..=1.3).contains(&u_fit.p)
        && e_b.trend_within(0.05)
        && u_b.trend_within(0.05);
    report(
        out,
        7,
        pass,
        format!(
            "log-corrected p: E {:.3} (target [1.6, 2.4]), ||u||^2 {:.3} (target [0.7, 1.3]); \
             trends {:.3}, {:.3}; the log factor is confounded with the constant over two octaves",
            e_fit.p, u_fit.p, e_b.trend, u_b.trend
        ),
    );
}

fn matsumura_criterion(out: &mut Vec<Outcome>) {
    let sim = simulate(&Preset::Matsumura.config(), &mut []).unwrap();
    let e = fit(&sim.trajectory.series(|r| r.e), Model::PurePower, window()).unwrap();
    let u = fit(&sim.trajectory.series(|r| r.l2u), Model::PurePower, window()).unwrap();
    report(
        out,
        8,
        (1.6..=2.4).contains(&e.p) && (0.7..=1.3).contains(&u.p),
        format!("a = 1, pure-power p: E {:.3}, ||u||^2 {:.3}", e.p, u.p),
    );
}

fn freewave_criterion(out: &mut Vec<Outcome>) {
    let mut cfg = Preset::Freewave.config();
    cfg.u0 = vec![Bump::new((0.0, 0.0), 1.0, 0.0)];
    let core = Bump::new((0.0, 0.0), 1.0, 1.0);
    cfg.u1 = vec![core];
    let grid = cfg.grid().unwrap();
    let level = |cfg: &ExperimentConfig| {
        let sim = simulate(cfg, &mut []).unwrap();
        let mass = integrate(&sim.data.u1);
        let (spread, level) = log_level_spread(&sim.trajectory.series(|r| r.l2u), cfg.t_final).unwrap();
        (mass, spread, level)
    };
    let (mass, spread, lvl) = level(&cfg);

    // same bump with its mass removed by a wider bump of opposite sign
    let wide = Bump::new((0.0, 0.0), 2.0, 1.0);
    let m_core = integrate(&make_bump(&core, &grid).unwrap());
    let m_wide = integrate(&make_bump(&wide, &grid).unwrap());
    cfg.u1 = vec![core, Bump::new((0.0, 0.0), 2.0, -m_core / m_wide)];
    let (mass0, _, lvl0) = level(&cfg);

    let pass = mass != 0.0 && spread <= 0.2 && lvl > 0.0 && lvl0 <= 0.1 * lvl;
    report(
        out,
        9,
        pass,
        format!(
            "||u||^2 / log t on [50, 100]: spread {spread:.3}, level {lvl:.3e} (mass {mass:.3}); \
             zero-mean level {lvl0:.3e} = {:.3} of it (mass {mass0:.1e})",
            lvl0 / lvl
        ),
    );
}

fn poincare_criterion(out: &mut Vec<Outcome>) {
    let grid = poincare_grid(1.0).unwrap();
    let ests: Vec<_> = (1..=3).map(|seed| poincare_sample(&grid, 1.0, 1000, seed).unwrap()).collect();
    let finite = ests.iter().all(|e| e.ratios.len() == 1000 && e.ratios.iter().all(|r| r.is_finite()));
    let maxes: Vec<f64> = ests.iter().map(|e| e.max_ratio).collect();
    let hi = maxes.iter().copied().fold(f64::MIN, f64::max);
    let lo = maxes.iter().copied().fold(f64::MAX, f64::min);
    let stable = (hi - lo) / hi <= 0.25;
    let prefix: Vec<f64> = [125, 250, 500, 1000].iter().map(|&m| ests[0].prefix_max(m)).collect();
    let monotone = prefix.windows(2).all(|w| w[1] >= w[0]);
    let mut pins = PinStore::open(pins_path()).unwrap();
    let pin = pins.check_or_insert("poincare.C.rho=1.seed=1.n=1000", maxes[0], 1e-12);
    pins.save().unwrap();
    report(
        out,
        10,
        finite && stable && monotone && pin.ok(),
        format!(
            "max ratio per seed {:.4} {:.4} {:.4} (spread {:.1}%), prefix maxima {:?}, pin {pin:?}",
            maxes[0],
            maxes[1],
            maxes[2],
            100.0 * (hi - lo) / hi,
            prefix.iter().map(|v| (v * 1e4).round() / 1e4).collect::<Vec<_>>()
        ),
    );
}

fn oracle_criterion(out: &mut Vec<Outcome>) {
    let ns = [161, 321, 641];
    let h: Vec<f64> = ns.iter().map(|&n| 16.0 / (n - 1) as f64).collect();
    let dal: Vec<f64> = ns.iter().map(|&n| common::dalembert_error(n, 4.0)).collect();
    let dal_order = common::convergence_order(&h, &dal);
    let dts = [0.1, 0.05, 0.025];
    let ode: Vec<f64> = dts.iter().map(|&dt| common::damped_ode_error(dt, 3.0)).collect();
    let ode_order = common::convergence_order(&dts, &ode);
    let defect = common::reversal_defect(201, 60);
    let dir = tempfile::tempdir().unwrap();
    let io = common::io_roundtrips(dir.path());
    let pass = (1.8..=2.2).contains(&dal_order)
        && (1.9..=2.1).contains(&ode_order)
        && defect < 1e-12
        && io.is_ok();
    report(
        out,
        11,
        pass,
        format!(
            "transport order {dal_order:.2}, damped ODE order {ode_order:.2}, reversal defect {defect:.1e}, io {}",
            match io {
                Ok(()) => "bit-exact".to_string(),
                Err(e) => format!("mismatch in {e}"),
            }
        ),
    );
}

fn main() {
    let mut out = Vec::new();
    let (mut base, base_secs) = timed_run(&Preset::Theorem11.config());

    energy_and_propagation(&mut out, &base, base_secs);
    newton_potential_criterion(&mut out, &base);
    lemma22_criterion(&mut out, &base);
    multiplier_criterion(&mut out, &mut base);
    rate_criteria(&mut out, &base);
    matsumura_criterion(&mut out);
    freewave_criterion(&mut out);
    poincare_criterion(&mut out);
    oracle_criterion(&mut out);
    out.sort_by_key(|o| o.id);

    println!();
    println!("summary");
    for o in &out {
        let known = KNOWN_SHORTFALLS.iter().find(|(id, _)| *id == o.id);
        let tag = match (o.pass, known) {
            (true, None) => "PASS".to_string(),
            (true, Some(_)) => "PASS (listed as a shortfall; update the list)".to_string(),
            (false, Some((_, why))) => format!("FAIL (known: {why})"),
            (false, None) => "FAIL".to_string(),
        };
        println!("  {:>2}  {tag}", o.id);
    }
    let passed = out.iter().filter(|o| o.pass).count();
    println!("{passed}/{} criteria pass at their stated tolerances", out.len());

    let unexpected: Vec<_> = out
        .iter()
        .filter(|o| !o.pass && !KNOWN_SHORTFALLS.iter().any(|(id, _)| *id == o.id))
        .map(|o| format!("criterion {}: {}", o.id, o.detail))
        .collect();
    if !unexpected.is_empty() {
        eprintln!("unexpected failures:");
        for u in &unexpected {
            eprintln!("  {u}");
        }
        std::process::exit(1);
    }
}
