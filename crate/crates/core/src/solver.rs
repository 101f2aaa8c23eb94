//! Explicit forward-Euler time stepping for the regularized dynamics
//! (smooth penalization) and the projected obstacle dynamics
//! (step-then-clamp onto `[-1, 1]`), with stability guards, snapshot
//! persistence and deterministic parallel stepping.
//!
//! Parallelism: each step maps the old buffer to a disjoint new buffer in
//! fixed-size chunks; per-chunk partial sums are combined in chunk order,
//! so results are bit-identical for any worker count.

use crate::grid::{Grid, ScalarField};
use crate::initial::{build_initial_field, InitialError, Shape};
use crate::potential::{f_delta_prime, ObstacleParam, ProfileParam};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("dt {dt:.6e} exceeds the stability limit {limit:.6e}")]
    Stability { dt: f64, limit: f64 },
    #[error(transparent)]
    Initial(#[from] InitialError),
    #[error("interface entered the 4*eps boundary strip at t = {t:.6e}")]
    Margin { t: f64 },
    #[error("blow-up: sup |phi| = {sup:.3e} at t = {t:.6e}")]
    BlowUp { t: f64, sup: f64 },
    #[error("solver config invalid: {0}")]
    Config(String),
    #[error("snapshot io: {0}")]
    Io(#[from] std::io::Error),
    #[error("snapshot format: {0}")]
    Format(String),
}

/// Time-stepping scheme: `Yosida` integrates the smooth penalized
/// reaction, `Projection` steps the unconstrained linear reaction and
/// clamps back onto `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    Yosida,
    Projection,
}

/// A snapshot of the evolution: the field plus everything needed to
/// interpret it.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub field: ScalarField,
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub t: f64,
    pub scheme: Scheme,
}

impl PhaseState {
    /// Phase value at which the field saturates (`1/(1-delta)` or 1).
    pub fn saturation(&self) -> f64 {
        match self.delta {
            Some(d) => 1.0 / (1.0 - d),
            None => 1.0,
        }
    }
}

/// All parameters of a run. `dt` is the resolved time step (no "auto"
/// here; the config layer resolves it).
#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub grid: Grid,
    pub shape: Shape,
    pub epsilon: f64,
    pub delta: Option<f64>,
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    pub snapshot_every: usize,
    pub diagnostics_every: usize,
}

impl SolverConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        match (self.scheme, self.delta) {
            (Scheme::Yosida, None) => {
                return Err(SolverError::Config(
                    "Yosida scheme requires delta".into(),
                ))
            }
            (Scheme::Projection, Some(_)) => {
                return Err(SolverError::Config(
                    "Projection scheme does not take delta".into(),
                ))
            }
            _ => {}
        }
        if let Some(d) = self.delta {
            ObstacleParam::new(d)
                .map_err(|e| SolverError::Config(e.to_string()))?;
        }
        if !(self.epsilon > 0.0) {
            return Err(SolverError::Config(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.dt > 0.0) {
            return Err(SolverError::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !(self.t_end >= 0.0) {
            return Err(SolverError::Config(format!(
                "t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        if self.snapshot_every == 0 || self.diagnostics_every == 0 {
            return Err(SolverError::Config(
                "snapshot_every and diagnostics_every must be >= 1".into(),
            ));
        }
        let limit = stability_limit(self);
        if self.dt > limit * (1.0 + 1e-12) {
            return Err(SolverError::Stability {
                dt: self.dt,
                limit,
            });
        }
        Ok(())
    }

    pub fn profile(&self) -> ProfileParam {
        ProfileParam::new(self.epsilon, self.delta).expect("validated")
    }
}

/// Largest admissible explicit time step: diffusion CFL `h^2/(2n+2)`
/// intersected with the reaction Lipschitz bound (`eps^2 delta/(1-delta)`
/// for Yosida, `eps^2/2` for Projection).
pub fn stability_limit(config: &SolverConfig) -> f64 {
    stability_limit_parts(
        config.grid.dim(),
        config.grid.h(),
        config.epsilon,
        config.delta,
        config.scheme,
    )
}

pub fn stability_limit_parts(
    dim: usize,
    h: f64,
    epsilon: f64,
    delta: Option<f64>,
    scheme: Scheme,
) -> f64 {
    let diffusion = h * h / (2.0 * dim as f64 + 2.0);
    let reaction = match scheme {
        Scheme::Yosida => {
            let d = delta.expect("Yosida requires delta");
            epsilon * epsilon * d / (1.0 - d)
        }
        Scheme::Projection => epsilon * epsilon / 2.0,
    };
    diffusion.min(reaction)
}

/// Five/seven-point Laplacian with homogeneous Neumann reflection.
pub fn laplacian_h(field: &ScalarField) -> ScalarField {
    let grid = field.grid();
    let data = field.data();
    let h2 = grid.h() * grid.h();
    let out = (0..grid.len())
        .map(|idx| {
            let m = grid.unravel(idx);
            let v = data[idx];
            let mut lap = 0.0;
            for a in 0..grid.dim() {
                lap += data[grid.neighbor(m, a, 1)] + data[grid.neighbor(m, a, -1)] - 2.0 * v;
            }
            lap / h2
        })
        .collect();
    ScalarField::from_vec(grid, out)
}

/// Fixed chunk size for parallel stepping; independent of worker count so
/// partial-sum boundaries (and hence all reductions) are deterministic.
const CHUNK: usize = 8192;

/// Raw per-step sums from one chunk: sum of ((new-old)/dt)^2 and sum of
/// |clamp overshoot| (Projection only), both unweighted.
fn advance_chunk(
    cur: &[f64],
    out: &mut [f64],
    start: usize,
    grid: Grid,
    scheme: Scheme,
    epsilon: f64,
    delta: Option<ObstacleParam>,
    dt: f64,
) -> (f64, f64) {
    let n = grid.nodes();
    let dim = grid.dim();
    let h2 = grid.h() * grid.h();
    let eps2 = epsilon * epsilon;
    let mut m = grid.unravel(start);
    let mut diss = 0.0;
    let mut lam = 0.0;
    for (k, o) in out.iter_mut().enumerate() {
        let idx = start + k;
        let v = cur[idx];
        let mut lap = 0.0;
        for a in 0..dim {
            lap += cur[grid.neighbor(m, a, 1)] + cur[grid.neighbor(m, a, -1)] - 2.0 * v;
        }
        lap /= h2;
        let new = match scheme {
            Scheme::Yosida => {
                let p = delta.expect("Yosida requires delta");
                v + dt * (lap - f_delta_prime(v, p) / eps2)
            }
            Scheme::Projection => {
                let star = v + dt * (lap + v / eps2);
                let clamped = star.clamp(-1.0, 1.0);
                lam += (star - clamped).abs();
                clamped
            }
        };
        *o = new;
        let rate = (new - v) / dt;
        diss += rate * rate;
        // advance the multi-index (axis 0 slowest)
        let mut a = dim;
        loop {
            a -= 1;
            m[a] += 1;
            if m[a] < n || a == 0 {
                break;
            }
            m[a] = 0;
        }
    }
    (diss, lam)
}

/// One explicit step over the whole grid; returns the unweighted
/// (dissipation, overshoot) sums.
fn advance(
    cur: &ScalarField,
    out: &mut [f64],
    scheme: Scheme,
    epsilon: f64,
    delta: Option<ObstacleParam>,
    dt: f64,
) -> (f64, f64) {
    let grid = cur.grid();
    let data = cur.data();
    let partials: Vec<(f64, f64)> = out
        .par_chunks_mut(CHUNK)
        .enumerate()
        .map(|(ci, chunk)| {
            advance_chunk(data, chunk, ci * CHUNK, grid, scheme, epsilon, delta, dt)
        })
        .collect();
    let mut diss = 0.0;
    let mut lam = 0.0;
    for (d, l) in partials {
        diss += d;
        lam += l;
    }
    (diss, lam)
}

fn checked_step(state: &PhaseState, dt: f64, scheme: Scheme) -> Result<PhaseState, SolverError> {
    assert_eq!(state.scheme, scheme, "state/scheme mismatch");
    let grid = state.field.grid();
    let limit = stability_limit_parts(grid.dim(), grid.h(), state.epsilon, state.delta, scheme);
    if dt > limit * (1.0 + 1e-12) {
        return Err(SolverError::Stability { dt, limit });
    }
    let delta = state.delta.map(|d| ObstacleParam::new(d).expect("valid delta"));
    let mut out = vec![0.0; grid.len()];
    advance(&state.field, &mut out, scheme, state.epsilon, delta, dt);
    Ok(PhaseState {
        field: ScalarField::from_vec(grid, out),
        epsilon: state.epsilon,
        delta: state.delta,
        t: state.t + dt,
        scheme,
    })
}

/// One forward-Euler step of the penalized dynamics.
pub fn step_yosida(state: &PhaseState, dt: f64) -> Result<PhaseState, SolverError> {
    checked_step(state, dt, Scheme::Yosida)
}

/// One step-then-project step of the obstacle dynamics.
pub fn step_projection(state: &PhaseState, dt: f64) -> Result<PhaseState, SolverError> {
    checked_step(state, dt, Scheme::Projection)
}

/// A diagnostics-time sample: the state plus the path-dependent
/// accumulators up to that time.
#[derive(Debug, Clone)]
pub struct DiagSample {
    pub state: PhaseState,
    /// Running `sum over steps of dt * h^n * sum_x eps*((phi_new-phi_old)/dt)^2`.
    pub dissipation_accum: f64,
    /// `h^n sum |lambda|` of the step ending at this sample (Projection;
    /// zero for Yosida and at t = 0).
    pub lambda_mass: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub config: SolverConfig,
    pub snapshots: Vec<PhaseState>,
    pub diag: Vec<DiagSample>,
}

/// Runs the configured evolution to `t_end`, collecting snapshots and
/// diagnostics samples at their cadences (both always include the initial
/// and final states). Fully deterministic.
pub fn run(config: &SolverConfig) -> Result<RunOutput, SolverError> {
    config.validate()?;
    let grid = config.grid;
    let field0 = build_initial_field(grid, config.shape, config.profile())?;
    let delta_p = config
        .delta
        .map(|d| ObstacleParam::new(d).expect("validated"));
    let hn = grid.h().powi(grid.dim() as i32);
    let dt = config.dt;
    let n_steps = ((config.t_end / dt) - 1e-9).ceil().max(0.0) as usize;

    let make_state = |data: &[f64], t: f64| PhaseState {
        field: ScalarField::from_vec(grid, data.to_vec()),
        epsilon: config.epsilon,
        delta: config.delta,
        t,
        scheme: config.scheme,
    };

    let mut cur = field0.data().to_vec();
    let mut next = vec![0.0; grid.len()];
    let mut dissipation_accum = 0.0;

    let mut snapshots = Vec::new();
    let mut diag = Vec::new();
    check_field(&cur, grid, config, 0.0)?;
    snapshots.push(make_state(&cur, 0.0));
    diag.push(DiagSample {
        state: snapshots[0].clone(),
        dissipation_accum: 0.0,
        lambda_mass: 0.0,
    });

    for step in 1..=n_steps {
        let cur_field = ScalarField::from_vec(grid, std::mem::take(&mut cur));
        let (diss, lam) = advance(
            &cur_field,
            &mut next,
            config.scheme,
            config.epsilon,
            delta_p,
            dt,
        );
        cur = cur_field.into_data();
        std::mem::swap(&mut cur, &mut next);
        dissipation_accum += config.epsilon * hn * dt * diss;
        let lambda_mass = hn * config.epsilon * config.epsilon / dt * lam;
        let t = step as f64 * dt;
        let last = step == n_steps;
        if step % config.snapshot_every == 0 || last {
            check_field(&cur, grid, config, t)?;
            snapshots.push(make_state(&cur, t));
        }
        if step % config.diagnostics_every == 0 || last {
            diag.push(DiagSample {
                state: make_state(&cur, t),
                dissipation_accum,
                lambda_mass,
            });
        }
    }
    Ok(RunOutput {
        config: config.clone(),
        snapshots,
        diag,
    })
}

/// Blow-up and boundary-margin guards, applied at snapshot cadence.
fn check_field(
    data: &[f64],
    grid: Grid,
    config: &SolverConfig,
    t: f64,
) -> Result<(), SolverError> {
    let sat = match config.delta {
        Some(d) => 1.0 / (1.0 - d),
        None => 1.0,
    };
    let sup = data.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    if sup > 2.0 * sat {
        return Err(SolverError::BlowUp { t, sup });
    }
    // the interface (a sign change; zero counts as positive phase) must
    // stay out of the 4*eps strip along each box face
    let strip = (4.0 * config.epsilon / grid.h()).ceil() as usize;
    let n = grid.nodes();
    // per-(axis, side) sign flags: [negative seen, nonnegative seen]
    let mut seen = vec![[false, false]; 2 * grid.dim()];
    for idx in 0..grid.len() {
        let m = grid.unravel(idx);
        for a in 0..grid.dim() {
            if m[a] < strip {
                seen[2 * a][usize::from(data[idx] >= 0.0)] = true;
            }
            if m[a] + strip >= n {
                seen[2 * a + 1][usize::from(data[idx] >= 0.0)] = true;
            }
        }
    }
    if seen.iter().any(|s| s[0] && s[1]) {
        return Err(SolverError::Margin { t });
    }
    Ok(())
}

#[derive(Debug, Serialize, Deserialize)]
struct SnapshotMeta {
    dim: usize,
    nodes: usize,
    extent: f64,
    h: f64,
    epsilon: f64,
    delta: Option<f64>,
    t: f64,
    scheme: Scheme,
    #[serde(rename = "format-version")]
    format_version: String,
}

/// Persists a snapshot as `meta.json` + `field.f64` (raw little-endian
/// f64, row-major, axis 0 slowest) in `dir`. Bit-exact round trip.
pub fn save_snapshot(state: &PhaseState, dir: &Path) -> Result<(), SolverError> {
    std::fs::create_dir_all(dir)?;
    let grid = state.field.grid();
    let meta = SnapshotMeta {
        dim: grid.dim(),
        nodes: grid.nodes(),
        extent: grid.extent(),
        h: grid.h(),
        epsilon: state.epsilon,
        delta: state.delta,
        t: state.t,
        scheme: state.scheme,
        format_version: "1".into(),
    };
    let json = serde_json::to_string_pretty(&meta)
        .map_err(|e| SolverError::Format(e.to_string()))?;
    std::fs::write(dir.join("meta.json"), json)?;
    let mut bytes = Vec::with_capacity(8 * grid.len());
    for &v in state.field.data() {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    let mut f = std::fs::File::create(dir.join("field.f64"))?;
    f.write_all(&bytes)?;
    Ok(())
}

/// Loads a snapshot previously written by [`save_snapshot`].
pub fn load_snapshot(dir: &Path) -> Result<PhaseState, SolverError> {
    let json = std::fs::read_to_string(dir.join("meta.json"))?;
    let meta: SnapshotMeta =
        serde_json::from_str(&json).map_err(|e| SolverError::Format(e.to_string()))?;
    if meta.format_version != "1" {
        return Err(SolverError::Format(format!(
            "unsupported format-version {:?}",
            meta.format_version
        )));
    }
    let grid = Grid::new(meta.dim, meta.nodes, meta.extent)
        .map_err(|e| SolverError::Format(e.to_string()))?;
    let mut bytes = Vec::new();
    std::fs::File::open(dir.join("field.f64"))?.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * grid.len() {
        return Err(SolverError::Format(format!(
            "field.f64 has {} bytes, expected {}",
            bytes.len(),
            8 * grid.len()
        )));
    }
    let data = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok(PhaseState {
        field: ScalarField::from_vec(grid, data),
        epsilon: meta.epsilon,
        delta: meta.delta,
        t: meta.t,
        scheme: meta.scheme,
    })
}
