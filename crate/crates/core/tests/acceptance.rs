//! Acceptance gate: one test per criterion, each printing a PASS/FAIL
//! line before asserting. Reference desk scale: 2-D box [-1,1]^2,
//! eps = 0.05, h = eps/4 (161^2 nodes), delta = eps^2 for the regularized
//! scheme, dt = 0.9 * stability limit, shrinking circle r0 = 0.5 run to
//! t = 0.06.
//!
//! Tolerance constants are collected below; "two-resolution" criteria
//! assert that the h/2 violation is <= 0.6x the h violation and that the
//! h violation stays under an absolute cap.

use obstacle_mcf::config::{parse_config_str, RunSpec};
use obstacle_mcf::grid::Grid;
use obstacle_mcf::initial::{build_initial_field, Shape};
use obstacle_mcf::measures::{
    brakke_functional, bv_holder_check, default_kernel, density_ratio_scan, default_scan,
    discrepancy_measure, dissipation_check, energy_measure, energy_measure_where,
    huisken_functional, xi_vanishing_study, Bump, TestFn,
};
use obstacle_mcf::mcf::{extract_zero_level, radius_estimate, sphere_radius_exact};
use obstacle_mcf::potential::{
    f_delta, profile_q_delta, profile_q_delta_deriv, sigma_delta, sigma_delta_quadrature,
    ObstacleParam, ProfileParam,
};
use obstacle_mcf::solver::{run, stability_limit_parts, RunOutput, Scheme, SolverConfig};
use obstacle_mcf::{PhaseState, ScalarField};
use std::sync::OnceLock;

/// Reference interface width.
const EPS: f64 = 0.05;
/// Reference regularization, the delta = eps^2 coupling.
const DELTA: f64 = 0.0025;
/// Reference circle radius.
const R0: f64 = 0.5;
/// Reference final time.
const T_END: f64 = 0.06;

/// ODE residual cap for the sampled standing wave (criterion 1).
const TOL_ODE: f64 = 1e-12;
/// Quadrature-vs-closed-form cap for sigma (criterion 2).
const TOL_SIGMA: f64 = 1e-8;
/// Initial/in-time discrepancy cap: 1e-3 * sigma_delta / eps (criteria 3, 4).
const XI_CAP_FACTOR: f64 = 1e-3;
/// Required shrink factor of the discrepancy under h-halving.
const XI_SHRINK: f64 = 1.6;
/// Dissipation identity relative residual cap (criterion 6).
const TOL_DISSIPATION: f64 = 0.02;
/// Required dissipation improvement under dt-halving.
const DISSIPATION_SHRINK: f64 = 1.7;
/// Huisken per-step slack, relative to the initial value (criterion 7).
const HUISKEN_STEP_SLACK: f64 = 1e-3;
/// Required shrink of the total Huisken violation under refinement.
const HUISKEN_SHRINK: f64 = 1.5;
/// Brakke difference-quotient consistency (criterion 8).
const TOL_BRAKKE: f64 = 0.05;
/// Radius error cap, in units of eps (criterion 9).
const RADIUS_ERR_FACTOR: f64 = 0.5;
/// Allowed density-ratio drift around its t = 0 value (criterion 11).
const DENSITY_DRIFT: f64 = 0.2;
/// BV bound slack (criterion 12).
const TOL_BV: f64 = 0.05;
/// Allowed Hoelder-constant change under dt-halving (criterion 12).
const TOL_HOLDER_DRIFT: f64 = 0.10;

fn reference_config(scheme: Scheme) -> SolverConfig {
    let grid = Grid::new(2, 161, 2.0).unwrap();
    let delta = match scheme {
        Scheme::Yosida => Some(DELTA),
        Scheme::Projection => None,
    };
    let dt = 0.9 * stability_limit_parts(2, grid.h(), EPS, delta, scheme);
    let n_steps = (T_END / dt).ceil();
    let cadence = ((n_steps / 10.0).ceil() as usize).max(1);
    SolverConfig {
        grid,
        shape: Shape::Sphere {
            center: [0.0; 3],
            radius: R0,
        },
        epsilon: EPS,
        delta,
        scheme,
        dt,
        t_end: T_END,
        snapshot_every: cadence,
        diagnostics_every: cadence,
    }
}

/// h/2 and dt/2 refinement of the reference run.
fn refined_config(base: &SolverConfig) -> SolverConfig {
    let grid = Grid::new(2, 2 * (base.grid.nodes() - 1) + 1, base.grid.extent()).unwrap();
    SolverConfig {
        grid,
        dt: base.dt / 2.0,
        snapshot_every: base.snapshot_every * 2,
        diagnostics_every: base.diagnostics_every * 2,
        ..base.clone()
    }
}

/// dt/2 at fixed h (same snapshot times).
fn half_dt_config(base: &SolverConfig) -> SolverConfig {
    SolverConfig {
        dt: base.dt / 2.0,
        snapshot_every: base.snapshot_every * 2,
        diagnostics_every: base.diagnostics_every * 2,
        ..base.clone()
    }
}

fn ref_yosida() -> &'static RunOutput {
    static CELL: OnceLock<RunOutput> = OnceLock::new();
    CELL.get_or_init(|| run(&reference_config(Scheme::Yosida)).expect("reference run"))
}

fn ref_yosida_fine() -> &'static RunOutput {
    static CELL: OnceLock<RunOutput> = OnceLock::new();
    CELL.get_or_init(|| {
        run(&refined_config(&reference_config(Scheme::Yosida))).expect("refined reference run")
    })
}

fn ref_yosida_half_dt() -> &'static RunOutput {
    static CELL: OnceLock<RunOutput> = OnceLock::new();
    CELL.get_or_init(|| {
        run(&half_dt_config(&reference_config(Scheme::Yosida))).expect("half-dt reference run")
    })
}

fn ref_projection() -> &'static RunOutput {
    static CELL: OnceLock<RunOutput> = OnceLock::new();
    CELL.get_or_init(|| run(&reference_config(Scheme::Projection)).expect("projection run"))
}

fn initial_state(nodes: usize) -> PhaseState {
    let grid = Grid::new(2, nodes, 2.0).unwrap();
    let p = ProfileParam::new(EPS, Some(DELTA)).unwrap();
    let field = build_initial_field(
        grid,
        Shape::Sphere {
            center: [0.0; 3],
            radius: R0,
        },
        p,
    )
    .unwrap();
    PhaseState {
        field,
        epsilon: EPS,
        delta: Some(DELTA),
        t: 0.0,
        scheme: Scheme::Yosida,
    }
}

fn report(n: usize, pass: bool, detail: &str) {
    println!(
        "criterion {n}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "criterion {n} failed: {detail}");
}

#[test]
fn criterion_01_profile_identities() {
    let mut worst_res: f64 = 0.0;
    let mut worst_end: f64 = 0.0;
    let mut qr_bound_ok = true;
    for delta in [0.3, 0.1, DELTA] {
        let p = ProfileParam::new(EPS, Some(delta)).unwrap();
        let pd = ObstacleParam::new(delta).unwrap();
        let rb = EPS * (1.0f64 - delta).sqrt().asin();
        for i in 0..=1000i64 {
            // 1001 points spanning saturated, sine and tail branches
            let r = (i - 500) as f64 / 500.0 * 4.0 * EPS;
            let q = profile_q_delta(r, p);
            let qr = profile_q_delta_deriv(r, p);
            worst_res = worst_res.max((EPS * qr * qr / 2.0 - f_delta(q, pd) / EPS).abs());
            qr_bound_ok &= qr.abs() <= 2.0 / EPS;
        }
        worst_end = worst_end
            .max((profile_q_delta(rb, p) - 1.0).abs())
            .max((profile_q_delta(-rb, p) + 1.0).abs());
    }
    let pass = worst_res < TOL_ODE && worst_end < 1e-12 && qr_bound_ok;
    report(
        1,
        pass,
        &format!("ODE residual {worst_res:.2e}, branch endpoints {worst_end:.2e}, |q_r| <= 2/eps: {qr_bound_ok}"),
    );
}

#[test]
fn criterion_02_surface_tension() {
    let mut worst: f64 = 0.0;
    for d in [0.3, 0.1, 0.01] {
        let p = ObstacleParam::new(d).unwrap();
        worst = worst.max((sigma_delta(p) - sigma_delta_quadrature(p)).abs());
    }
    let near = sigma_delta_quadrature(ObstacleParam::new(1e-4).unwrap());
    let pi_gap = (near - std::f64::consts::FRAC_PI_2).abs();
    let pass = worst < TOL_SIGMA && pi_gap < 1e-2;
    report(
        2,
        pass,
        &format!("quadrature-vs-closed-form gap {worst:.2e}, |sigma(1e-4) - pi/2| = {pi_gap:.2e}"),
    );
}

fn xi_violation(state: &PhaseState) -> f64 {
    discrepancy_measure(state).0.max(0.0)
}

#[test]
fn criterion_03_initial_discrepancy_negativity() {
    let cap = XI_CAP_FACTOR * sigma_delta(ObstacleParam::new(DELTA).unwrap()) / EPS;
    let coarse = xi_violation(&initial_state(161));
    let fine = xi_violation(&initial_state(321));
    let pass = coarse <= cap && fine * XI_SHRINK <= coarse;
    report(
        3,
        pass,
        &format!(
            "xi_sup(t=0) = {coarse:.4e} (cap {cap:.4e}), h/2 value {fine:.4e} (shrink {:.2}x)",
            coarse / fine
        ),
    );
}

#[test]
fn criterion_04_discrepancy_negativity_in_time() {
    let cap = XI_CAP_FACTOR * sigma_delta(ObstacleParam::new(DELTA).unwrap()) / EPS;
    let max_over = |out: &RunOutput| {
        out.diag
            .iter()
            .map(|d| xi_violation(&d.state))
            .fold(0.0f64, f64::max)
    };
    let coarse = max_over(ref_yosida());
    let fine = max_over(ref_yosida_fine());
    let pass = coarse <= cap && fine * XI_SHRINK <= coarse;
    report(
        4,
        pass,
        &format!(
            "max_t xi_sup = {coarse:.4e} (cap {cap:.4e}), refined {fine:.4e} (shrink {:.2}x)",
            coarse / fine
        ),
    );
}

#[test]
fn criterion_05_maximum_principle() {
    let mut worst_yosida: f64 = 0.0;
    for s in &ref_yosida().snapshots {
        worst_yosida = worst_yosida.max(s.field.sup_abs());
    }
    let bound = 1.0 / (1.0 - DELTA) + 1e-12;
    let mut worst_proj: f64 = 0.0;
    for s in &ref_projection().snapshots {
        worst_proj = worst_proj.max(s.field.sup_abs());
    }
    let pass = worst_yosida <= bound && worst_proj <= 1.0;
    report(
        5,
        pass,
        &format!(
            "Yosida sup |phi| = {worst_yosida:.15} (bound {bound:.15}), Projection sup = {worst_proj}"
        ),
    );
}

#[test]
fn criterion_06_dissipation_identity() {
    let base = dissipation_check(ref_yosida());
    let halved = dissipation_check(ref_yosida_half_dt());
    let pass = base <= TOL_DISSIPATION && halved * DISSIPATION_SHRINK <= base;
    report(
        6,
        pass,
        &format!(
            "residual {base:.4e} (cap {TOL_DISSIPATION}), dt/2 residual {halved:.4e} (improvement {:.2}x)",
            base / halved
        ),
    );
}

fn huisken_violation(out: &RunOutput) -> (f64, f64, f64) {
    let kernel = default_kernel(&out.config);
    let values: Vec<f64> = out
        .diag
        .iter()
        .map(|d| huisken_functional(&d.state, kernel, out.config.dt).expect("guarded kernel"))
        .collect();
    let initial = values[0];
    let mut per_step: f64 = 0.0;
    let mut total = 0.0;
    for w in values.windows(2) {
        let inc = (w[1] - w[0]).max(0.0);
        per_step = per_step.max(inc);
        total += inc;
    }
    (initial, per_step, total)
}

#[test]
fn criterion_07_huisken_monotonicity() {
    let (initial, per_step, total) = huisken_violation(ref_yosida());
    let (_, _, total_fine) = huisken_violation(ref_yosida_fine());
    let slack = HUISKEN_STEP_SLACK * initial;
    let refinement_ok = total <= 1e-12 * initial || total_fine * HUISKEN_SHRINK <= total;
    let pass = per_step <= slack && refinement_ok;
    report(
        7,
        pass,
        &format!(
            "initial {initial:.4}, worst upward step {per_step:.3e} (slack {slack:.3e}), total violation {total:.3e} -> refined {total_fine:.3e}"
        ),
    );
}

fn brakke_setup(cfg: &SolverConfig) -> (f64, f64, f64, f64) {
    // run to t ~ 0.01, snapshot one step before the end for an exact
    // one-step difference quotient
    let n_steps = (0.01 / cfg.dt).ceil() as usize;
    let probe = SolverConfig {
        t_end: n_steps as f64 * cfg.dt,
        snapshot_every: n_steps - 1,
        diagnostics_every: n_steps,
        ..cfg.clone()
    };
    let out = run(&probe).expect("brakke probe run");
    let bump = Bump {
        center: [0.45, 0.0, 0.0],
        radius: 0.3,
    };
    let k = out.snapshots.len() - 2;
    let s0 = &out.snapshots[k];
    let s1 = &out.snapshots[k + 1];
    assert!((s1.t - s0.t - cfg.dt).abs() < 1e-12);
    let dq = (energy_measure(s1, Some(&bump)) - energy_measure(s0, Some(&bump))) / cfg.dt;
    let b = brakke_functional(s0, &bump);
    let mu0 = energy_measure(&out.snapshots[0], Some(&bump));
    let c5 = bump.hessian_sup() * energy_measure_where(s0, |x| bump.in_support(x));
    let scale = b.abs().max(mu0 / probe.t_end);
    ((dq - b).abs(), scale, dq, c5)
}

#[test]
fn criterion_08_brakke_consistency() {
    let base_cfg = reference_config(Scheme::Yosida);
    let (gap, scale, dq, c5) = brakke_setup(&base_cfg);
    let (gap_fine, scale_fine, _, _) = brakke_setup(&refined_config(&base_cfg));
    let lemma_ok = dq <= c5 + TOL_BRAKKE * scale;
    let pass = gap <= TOL_BRAKKE * scale
        && gap_fine / scale_fine <= gap / scale
        && lemma_ok;
    report(
        8,
        pass,
        &format!(
            "|dq - B| = {gap:.3e} (cap {:.3e}), refined {gap_fine:.3e}; dq {dq:.3e} <= c5 {c5:.3e} + slack: {lemma_ok}",
            TOL_BRAKKE * scale
        ),
    );
}

fn projection_circle(epsilon: f64) -> RunOutput {
    // h = eps/8: the sweep holds h/eps fixed, so the spatial bias of the
    // scheme is the same multiple of eps at every step of the sweep; it
    // must be pushed below the O(eps^2) modeling error (dominant already
    // at eps = 0.1) for the radius error to decrease across the sweep.
    // At h = eps/4 the bias plateaus near 1.5e-3 and masks the limit.
    let extent = 2.0;
    let nodes = (8.0 * extent / epsilon).round() as usize + 1;
    let grid = Grid::new(2, nodes, extent).unwrap();
    let dt = 0.9 * stability_limit_parts(2, grid.h(), epsilon, None, Scheme::Projection);
    let n_steps = (T_END / dt).ceil();
    let cadence = ((n_steps / 30.0).ceil() as usize).max(1);
    run(&SolverConfig {
        grid,
        shape: Shape::Sphere {
            center: [0.0; 3],
            radius: R0,
        },
        epsilon,
        delta: None,
        scheme: Scheme::Projection,
        dt,
        t_end: T_END,
        snapshot_every: cadence,
        diagnostics_every: usize::MAX - 1,
    })
    .expect("projection circle run")
}

fn radius_error_at(out: &RunOutput, t_target: f64) -> f64 {
    let snap = out
        .snapshots
        .iter()
        .min_by(|a, b| {
            (a.t - t_target)
                .abs()
                .partial_cmp(&(b.t - t_target).abs())
                .unwrap()
        })
        .unwrap();
    let contour = extract_zero_level(snap).expect("interface present");
    let (mean, _) = radius_estimate(&contour, [0.0; 3]);
    (mean - sphere_radius_exact(R0, 2, snap.t).unwrap()).abs()
}

#[test]
fn criterion_09_sharp_interface_limit() {
    let mut max_err = Vec::new();
    for eps in [0.1, 0.05, 0.025] {
        let out = projection_circle(eps);
        let worst = [0.02, 0.04, 0.06]
            .iter()
            .map(|&t| radius_error_at(&out, t))
            .fold(0.0f64, f64::max);
        max_err.push((eps, worst));
    }
    let within = max_err.iter().all(|&(eps, e)| e <= RADIUS_ERR_FACTOR * eps);
    let monotone = max_err[1].1 < max_err[0].1 && max_err[2].1 < max_err[1].1;

    // 3-D spot check: coarse sphere, eps = 0.1, t = 0.02
    let grid = Grid::new(3, 81, 2.0).unwrap();
    let dt = 0.9 * stability_limit_parts(3, grid.h(), 0.1, None, Scheme::Projection);
    let n_steps = (0.02 / dt).ceil() as usize;
    let out3 = run(&SolverConfig {
        grid,
        shape: Shape::Sphere {
            center: [0.0; 3],
            radius: R0,
        },
        epsilon: 0.1,
        delta: None,
        scheme: Scheme::Projection,
        dt,
        t_end: n_steps as f64 * dt,
        snapshot_every: n_steps,
        diagnostics_every: usize::MAX - 1,
    })
    .expect("3-D spot check run");
    let snap = out3.snapshots.last().unwrap();
    let contour = extract_zero_level(snap).unwrap();
    let (mean, _) = radius_estimate(&contour, [0.0; 3]);
    let err3 = (mean - sphere_radius_exact(R0, 3, snap.t).unwrap()).abs();
    let pass = within && monotone && err3 <= RADIUS_ERR_FACTOR * 0.1;
    report(
        9,
        pass,
        &format!("2-D radius errors {max_err:?} (caps 0.5*eps, monotone: {monotone}), 3-D error {err3:.4}"),
    );
}

#[test]
fn criterion_10_vanishing_discrepancy() {
    let base = reference_config(Scheme::Yosida);
    let table = xi_vanishing_study(&base, &[0.1, 0.05, 0.025]).expect("sweep");
    let decreasing = table.windows(2).all(|w| w[1].1 < w[0].1);
    report(
        10,
        decreasing,
        &format!("xi_mass table {table:?} strictly decreasing: {decreasing}"),
    );
}

#[test]
fn criterion_11_density_ratio_bound() {
    let out = ref_yosida();
    let (centers, radii) = default_scan(out.config.grid);
    let values: Vec<f64> = out
        .diag
        .iter()
        .map(|d| density_ratio_scan(&d.state, &centers, &radii))
        .collect();
    let v0 = values[0];
    let drift_ok = values
        .iter()
        .all(|&v| (v - v0).abs() <= DENSITY_DRIFT * v0);
    let cap_ok = values.iter().all(|&v| v <= 2.0 * v0);
    let pass = drift_ok && cap_ok;
    report(
        11,
        pass,
        &format!(
            "t=0 ratio {v0:.4}, range [{:.4}, {:.4}], drift <= 20%: {drift_ok}",
            values.iter().fold(f64::INFINITY, |m, &v| m.min(v)),
            values.iter().fold(0.0f64, |m, &v| m.max(v))
        ),
    );
}

#[test]
fn criterion_12_bv_holder_bounds() {
    let base = bv_holder_check(ref_yosida());
    let halved = bv_holder_check(ref_yosida_half_dt());
    let bv_ok = base.max_total_variation <= base.tv_bound * (1.0 + TOL_BV);
    let drift = (halved.holder_max - base.holder_max).abs() / base.holder_max;
    let pass = bv_ok && base.holder_max.is_finite() && drift <= TOL_HOLDER_DRIFT;
    report(
        12,
        pass,
        &format!(
            "max TV {:.4} <= bound {:.4}: {bv_ok}; Hoelder max {:.4}, dt/2 drift {:.2}%",
            base.max_total_variation,
            base.tv_bound * (1.0 + TOL_BV),
            base.holder_max,
            drift * 100.0
        ),
    );
}

#[test]
fn criterion_13_determinism_and_persistence() {
    use obstacle_mcf::cli::{cmd_diagnose, cmd_run};
    let make = |dir: &std::path::Path| {
        let out = dir.join("out");
        let text = format!(
            "\
dim = 2
nodes = 161
extent = 2.0
shape.kind = sphere
shape.center = 0.0,0.0
shape.radius = 0.5
epsilon = 0.05
delta = 0.0025
scheme = Yosida
dt = auto
t_end = 0.002
snapshot_every = 100
diagnostics_every = 100
output_dir = {}
",
            out.display()
        );
        let path = dir.join("run.cfg");
        std::fs::write(&path, text).unwrap();
        (path, out)
    };
    let tmp1 = tempfile::tempdir().unwrap();
    let tmp2 = tempfile::tempdir().unwrap();
    let (cfg1, out1) = make(tmp1.path());
    let (cfg2, out2) = make(tmp2.path());
    cmd_run(&cfg1).unwrap();
    cmd_run(&cfg2).unwrap();

    let identical = ["diagnostics.csv", "snapshots/snap-000002/field.f64"]
        .iter()
        .all(|rel| {
            std::fs::read(out1.join(rel)).unwrap() == std::fs::read(out2.join(rel)).unwrap()
        });

    // snapshot round trip is bit-exact
    let spec: RunSpec =
        parse_config_str(&std::fs::read_to_string(out1.join("config.txt")).unwrap()).unwrap();
    let replay = run(&spec.solver).unwrap();
    let stored =
        obstacle_mcf::solver::load_snapshot(&out1.join("snapshots/snap-000002")).unwrap();
    let roundtrip = stored
        .field
        .data()
        .iter()
        .zip(replay.snapshots[2].field.data())
        .all(|(a, b)| a.to_bits() == b.to_bits());

    // offline diagnose rewrites the identical CSV
    let before = std::fs::read(out1.join("diagnostics.csv")).unwrap();
    std::fs::write(out1.join("diagnostics.csv"), b"corrupted").unwrap();
    cmd_diagnose(&out1).unwrap();
    let after = std::fs::read(out1.join("diagnostics.csv")).unwrap();
    let diagnose_ok = before == after;

    let pass = identical && roundtrip && diagnose_ok;
    report(
        13,
        pass,
        &format!("byte-identical runs: {identical}, round trip: {roundtrip}, diagnose reproduces CSV: {diagnose_ok}"),
    );
}

// keep the import list honest: ScalarField is used through PhaseState
#[allow(dead_code)]
fn _type_anchor(f: ScalarField) -> ScalarField {
    f
}
