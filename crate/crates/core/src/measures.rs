//! Discrete counterparts of the diffuse-interface measures and
//! functionals: energy measure, discrepancy measure, backward-heat-kernel
//! (Huisken) functional, density ratios, the dissipation identity, the
//! localized near-monotonicity check, the Brakke functional, and the
//! BV/Hoelder bounds on the transformed field `w = Phi(phi)`.
//!
//! All reductions use a fixed summation order (pairwise trees over node
//! order) so every aggregate is bit-reproducible.

use crate::grid::{pairwise_sum, Grid, ScalarField};
use crate::potential::{f_delta, f_delta_prime, f_zero, sigma_delta, ObstacleParam, QUAD_TOL};
use crate::quadrature::integrate;
use crate::solver::{self, laplacian_h, PhaseState, RunOutput, Scheme, SolverConfig, SolverError};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MeasureError {
    #[error("kernel reference time too close: s - t = {gap:.3e} < 2 dt = {min:.3e}")]
    KernelTooClose { gap: f64, min: f64 },
}

/// Potential energy density of a state's phase value: `F_delta` for the
/// regularized scheme, `F_0` for the projected one.
pub fn potential_value(state: &PhaseState, s: f64) -> f64 {
    match state.delta {
        Some(d) => f_delta(s, ObstacleParam::new(d).expect("valid delta")),
        None => f_zero(s),
    }
}

fn potential_prime(state: &PhaseState, s: f64) -> f64 {
    match state.delta {
        Some(d) => f_delta_prime(s, ObstacleParam::new(d).expect("valid delta")),
        None => -s,
    }
}

/// Surface tension associated with a state's potential (`pi/2` at delta=0).
pub fn sigma_of_state(state: &PhaseState) -> f64 {
    match state.delta {
        Some(d) => sigma_delta(ObstacleParam::new(d).expect("valid delta")),
        None => std::f64::consts::FRAC_PI_2,
    }
}

/// Nonnegative C^2 localization used by the localized functionals.
pub trait TestFn: Sync {
    fn value(&self, x: [f64; 3]) -> f64;
    fn gradient(&self, x: [f64; 3]) -> [f64; 3];
    /// Supremum of the Hessian operator norm.
    fn hessian_sup(&self) -> f64;
    fn in_support(&self, x: [f64; 3]) -> bool;
}

/// The constant test function 1 (global, zero Hessian).
pub struct ConstantOne;

impl TestFn for ConstantOne {
    fn value(&self, _: [f64; 3]) -> f64 {
        1.0
    }
    fn gradient(&self, _: [f64; 3]) -> [f64; 3] {
        [0.0; 3]
    }
    fn hessian_sup(&self) -> f64 {
        0.0
    }
    fn in_support(&self, _: [f64; 3]) -> bool {
        true
    }
}

/// Compactly supported C^1,1 bump `((1 - |x-c|^2/R^2)_+)^2` with exact
/// Hessian bound `8/R^2`.
pub struct Bump {
    pub center: [f64; 3],
    pub radius: f64,
}

impl Bump {
    fn u(&self, x: [f64; 3]) -> f64 {
        let mut s = 0.0;
        for a in 0..3 {
            let d = x[a] - self.center[a];
            s += d * d;
        }
        s / (self.radius * self.radius)
    }
}

impl TestFn for Bump {
    fn value(&self, x: [f64; 3]) -> f64 {
        let w = (1.0 - self.u(x)).max(0.0);
        w * w
    }
    fn gradient(&self, x: [f64; 3]) -> [f64; 3] {
        let w = 1.0 - self.u(x);
        if w <= 0.0 {
            return [0.0; 3];
        }
        let c = -4.0 * w / (self.radius * self.radius);
        let mut g = [0.0; 3];
        for a in 0..3 {
            g[a] = c * (x[a] - self.center[a]);
        }
        g
    }
    fn hessian_sup(&self) -> f64 {
        8.0 / (self.radius * self.radius)
    }
    fn in_support(&self, x: [f64; 3]) -> bool {
        self.u(x) < 1.0
    }
}

fn hn(grid: Grid) -> f64 {
    grid.h().powi(grid.dim() as i32)
}

/// Per-node diffuse energy density `eps |grad_h phi|^2 / 2 + F(phi)/eps`.
pub fn energy_density(state: &PhaseState) -> ScalarField {
    let grid = state.field.grid();
    let eps = state.epsilon;
    let data = (0..grid.len())
        .map(|idx| {
            eps * state.field.grad_sq(idx) / 2.0
                + potential_value(state, state.field.data()[idx]) / eps
        })
        .collect();
    ScalarField::from_vec(grid, data)
}

/// `mu_t(testfn)`: h^n-weighted node sum of `testfn * e`; pass `None` for
/// the total mass.
pub fn energy_measure(state: &PhaseState, testfn: Option<&dyn TestFn>) -> f64 {
    let grid = state.field.grid();
    let e = energy_density(state);
    let vals: Vec<f64> = (0..grid.len())
        .map(|idx| match testfn {
            Some(f) => f.value(grid.position(idx)) * e.data()[idx],
            None => e.data()[idx],
        })
        .collect();
    hn(grid) * pairwise_sum(&vals)
}

/// Energy mass restricted to nodes where `pred` holds (used for
/// `mu_t(spt testfn)`).
pub fn energy_measure_where(state: &PhaseState, pred: impl Fn([f64; 3]) -> bool) -> f64 {
    let grid = state.field.grid();
    let e = energy_density(state);
    let vals: Vec<f64> = (0..grid.len())
        .map(|idx| {
            if pred(grid.position(idx)) {
                e.data()[idx]
            } else {
                0.0
            }
        })
        .collect();
    hn(grid) * pairwise_sum(&vals)
}

/// Pointwise discrepancy `xi = eps |grad_h phi|^2/2 - F(phi)/eps` plus its
/// signed sup and absolute mass.
pub fn discrepancy_measure(state: &PhaseState) -> (f64, f64, ScalarField) {
    let grid = state.field.grid();
    let eps = state.epsilon;
    let data: Vec<f64> = (0..grid.len())
        .map(|idx| {
            eps * state.field.grad_sq(idx) / 2.0
                - potential_value(state, state.field.data()[idx]) / eps
        })
        .collect();
    let xi_sup = data.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    let abs: Vec<f64> = data.iter().map(|v| v.abs()).collect();
    let xi_mass = hn(grid) * pairwise_sum(&abs);
    (xi_sup, xi_mass, ScalarField::from_vec(grid, data))
}

/// Backward heat kernel reference point: space point `y`, future time `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub y: [f64; 3],
    pub s: f64,
}

impl KernelSpec {
    /// `(4 pi (s-t))^{-(n-1)/2} exp(-|x-y|^2 / (4 (s-t)))`.
    pub fn eval(&self, x: [f64; 3], t: f64, dim: usize) -> f64 {
        let r2 = self.s - t;
        let mut d2 = 0.0;
        for a in 0..dim {
            let d = x[a] - self.y[a];
            d2 += d * d;
        }
        let pref = (4.0 * std::f64::consts::PI * r2).powf(-((dim - 1) as f64) / 2.0);
        pref * (-d2 / (4.0 * r2)).exp()
    }
}

/// The Huisken functional `int rho_{y,s}(x,t) d mu_t`. `dt` is the run's
/// time step, used only for the singularity guard `s - t >= 2 dt`.
pub fn huisken_functional(
    state: &PhaseState,
    kernel: KernelSpec,
    dt: f64,
) -> Result<f64, MeasureError> {
    let gap = kernel.s - state.t;
    if gap < 2.0 * dt {
        return Err(MeasureError::KernelTooClose { gap, min: 2.0 * dt });
    }
    let grid = state.field.grid();
    let e = energy_density(state);
    let vals: Vec<f64> = (0..grid.len())
        .map(|idx| kernel.eval(grid.position(idx), state.t, grid.dim()) * e.data()[idx])
        .collect();
    Ok(hn(grid) * pairwise_sum(&vals))
}

/// Volume of the (n-1)-dimensional unit ball for n = 1, 2, 3.
pub fn omega_nm1(dim: usize) -> f64 {
    match dim {
        1 => 1.0,
        2 => 2.0,
        _ => std::f64::consts::PI,
    }
}

/// Centers (a coarse sub-lattice) and dyadic radii for the density scan.
pub fn default_scan(grid: Grid) -> (Vec<[f64; 3]>, Vec<f64>) {
    // center lattice spacing extent/16 over the middle half of the box:
    // the spacing is below the smallest dyadic radius at the default
    // resolutions, so a moving interface always has some center within a
    // fraction of a ball radius and the scan max tracks the local density
    // instead of sagging when a feature passes between centers
    let offsets: Vec<f64> = (-4..=4).map(|i| i as f64 * 0.0625 * grid.extent()).collect();
    let mut centers = Vec::new();
    match grid.dim() {
        1 => {
            for &a in &offsets {
                centers.push([a, 0.0, 0.0]);
            }
        }
        2 => {
            for &a in &offsets {
                for &b in &offsets {
                    centers.push([a, b, 0.0]);
                }
            }
        }
        _ => {
            for &a in &offsets {
                for &b in &offsets {
                    for &c in &offsets {
                        centers.push([a, b, c]);
                    }
                }
            }
        }
    }
    // radii stop at extent/8: the scan probes the local interface
    // density; balls comparable to whole features see a ratio that sweeps
    // through pi*sigma as the feature shrinks through them, which is
    // bounded but not stable in t
    let mut radii = Vec::new();
    let mut r = 4.0 * grid.h();
    while r <= 0.125 * grid.extent() + 1e-12 {
        radii.push(r);
        r *= 2.0;
    }
    (centers, radii)
}

/// `max over (center, R) of mu_t(B_R(center)) / (omega_{n-1} R^{n-1})`,
/// with ball membership by node-center inclusion.
pub fn density_ratio_scan(state: &PhaseState, centers: &[[f64; 3]], radii: &[f64]) -> f64 {
    density_ratio_scan_density(&energy_density(state), centers, radii)
}

/// Same scan over an explicit density field (linear in the density).
pub fn density_ratio_scan_density(e: &ScalarField, centers: &[[f64; 3]], radii: &[f64]) -> f64 {
    let grid = e.grid();
    let dim = grid.dim();
    let w = hn(grid);
    let mut sorted: Vec<f64> = radii.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let r_max = sorted.last().copied().unwrap_or(0.0);
    let n = grid.nodes();
    let half = 0.5 * (n - 1) as f64;
    let mut max_ratio: f64 = 0.0;
    for c in centers {
        // one pass per center over the bounding box of the largest ball:
        // bin each node into the smallest containing ball, then turn the
        // bins into cumulative masses
        let mut lo = [0usize; 3];
        let mut hi = [0usize; 3];
        for a in 0..dim {
            lo[a] = (((c[a] - r_max) / grid.h() + half - 1e-9).ceil().max(0.0)) as usize;
            hi[a] = ((((c[a] + r_max) / grid.h() + half + 1e-9).floor().max(0.0)) as usize).min(n - 1);
        }
        let mut bins = vec![0.0; sorted.len()];
        let mut m = [0usize; 3];
        for i0 in lo[0]..=hi[0] {
            m[0] = i0;
            for i1 in lo[1]..=hi[1] {
                m[1] = i1;
                for i2 in lo[2]..=hi[2] {
                    m[2] = i2;
                    let idx = grid.ravel(m);
                    let mut d2 = 0.0;
                    for a in 0..dim {
                        let d = grid.coord(m[a]) - c[a];
                        d2 += d * d;
                    }
                    let d = d2.sqrt();
                    if let Some(k) = sorted.iter().position(|&r| d <= r) {
                        bins[k] += e.data()[idx];
                    }
                }
            }
        }
        let mut cum = 0.0;
        for (k, &r) in sorted.iter().enumerate() {
            cum += bins[k];
            let ratio = w * cum / (omega_nm1(dim) * r.powi(dim as i32 - 1));
            max_ratio = max_ratio.max(ratio);
        }
    }
    max_ratio
}

/// Scheme-compatible total energy: gradient part summed over forward
/// edges (Neumann edges contribute zero). This is the exact Lyapunov
/// function of the five/seven-point explicit step, so the dissipation
/// identity closes to O(dt); the centered-difference [`energy_measure`]
/// differs from it by O(h^2), which would otherwise mask the first-order
/// behavior in dt.
pub fn compatible_energy(state: &PhaseState) -> f64 {
    let grid = state.field.grid();
    let d = state.field.data();
    let eps = state.epsilon;
    let vals: Vec<f64> = (0..grid.len())
        .map(|idx| {
            let m = grid.unravel(idx);
            let mut e = potential_value(state, d[idx]) / eps;
            for a in 0..grid.dim() {
                let g = (d[grid.neighbor(m, a, 1)] - d[idx]) / grid.h();
                e += eps * g * g / 2.0;
            }
            e
        })
        .collect();
    hn(grid) * pairwise_sum(&vals)
}

/// Relative residual of the energy dissipation identity
/// `mu_T + int dissipation = mu_0` over a completed run, with `mu`
/// evaluated through [`compatible_energy`].
pub fn dissipation_check(run: &RunOutput) -> f64 {
    let first = run.diag.first().expect("run has samples");
    let last = run.diag.last().expect("run has samples");
    let mu0 = compatible_energy(&first.state);
    let mu_t = compatible_energy(&last.state);
    if mu0 == 0.0 {
        return (mu_t + last.dissipation_accum).abs();
    }
    (mu_t + last.dissipation_accum - mu0).abs() / mu0
}

/// Worst violation of the localized near-monotonicity: with
/// `c5 = sup|hess testfn| * max_t mu_t(spt testfn)`, the function
/// `mu_t(testfn) - c5 t` should be nonincreasing up to slack.
pub fn localized_monotonicity_check(run: &RunOutput, testfn: &dyn TestFn) -> f64 {
    let samples: Vec<(f64, f64, f64)> = run
        .diag
        .iter()
        .map(|d| {
            let mu = energy_measure(&d.state, Some(testfn));
            let spt = energy_measure_where(&d.state, |x| testfn.in_support(x));
            (d.state.t, mu, spt)
        })
        .collect();
    let max_spt = samples.iter().fold(0.0f64, |m, s| m.max(s.2));
    let c5 = testfn.hessian_sup() * max_spt;
    let mut worst = f64::NEG_INFINITY;
    for i in 0..samples.len() {
        for j in (i + 1)..samples.len() {
            let (t1, mu1, _) = samples[i];
            let (t2, mu2, _) = samples[j];
            worst = worst.max((mu2 - c5 * t2) - (mu1 - c5 * t1));
        }
    }
    worst
}

/// The Brakke functional
/// `B(testfn) = h^n sum [ -eps testfn (-lap phi + F'/eps^2)^2
///                        + eps grad(testfn) . grad(phi) (-lap phi + F'/eps^2) ]`,
/// the exact time derivative of `mu_t(testfn)` along the smooth flow.
pub fn brakke_functional(state: &PhaseState, testfn: &dyn TestFn) -> f64 {
    let grid = state.field.grid();
    let eps = state.epsilon;
    let lap = laplacian_h(&state.field);
    let vals: Vec<f64> = (0..grid.len())
        .map(|idx| {
            let x = grid.position(idx);
            let v = state.field.data()[idx];
            let drive = -lap.data()[idx] + potential_prime(state, v) / (eps * eps);
            let mut gdot = 0.0;
            let g = testfn.gradient(x);
            for a in 0..grid.dim() {
                gdot += g[a] * state.field.grad_axis(idx, a);
            }
            -eps * testfn.value(x) * drive * drive + eps * gdot * drive
        })
        .collect();
    hn(grid) * pairwise_sum(&vals)
}

/// Per-sample diagnostics, one CSV row each.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub total_energy: f64,
    pub xi_sup: f64,
    pub xi_mass: f64,
    pub huisken: f64,
    pub density_ratio_max: f64,
    pub dissipation_accum: f64,
    pub lambda_mass: f64,
}

/// Default kernel for a run: centered at the origin, referenced at
/// `t_end + eps^2`.
pub fn default_kernel(config: &SolverConfig) -> KernelSpec {
    KernelSpec {
        y: [0.0; 3],
        s: config.t_end + config.epsilon * config.epsilon,
    }
}

/// Computes the full record stream for a completed run, using the default
/// kernel and density scan.
pub fn diagnostics_records(run: &RunOutput) -> Result<Vec<DiagnosticsRecord>, MeasureError> {
    let kernel = default_kernel(&run.config);
    let (centers, radii) = default_scan(run.config.grid);
    run.diag
        .iter()
        .map(|d| {
            let (xi_sup, xi_mass, _) = discrepancy_measure(&d.state);
            Ok(DiagnosticsRecord {
                t: d.state.t,
                total_energy: energy_measure(&d.state, None),
                xi_sup,
                xi_mass,
                huisken: huisken_functional(&d.state, kernel, run.config.dt)?,
                density_ratio_max: density_ratio_scan(&d.state, &centers, &radii),
                dissipation_accum: d.dissipation_accum,
                lambda_mass: d.lambda_mass,
            })
        })
        .collect()
}

/// Serializes records as CSV with 17-significant-digit floats.
pub fn write_diagnostics_csv(records: &[DiagnosticsRecord]) -> String {
    let mut out = String::from(
        "t,total_energy,xi_sup,xi_mass,huisken,density_ratio_max,dissipation_accum,lambda_mass\n",
    );
    for r in records {
        out.push_str(&format!(
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.t,
            r.total_energy,
            r.xi_sup,
            r.xi_mass,
            r.huisken,
            r.density_ratio_max,
            r.dissipation_accum,
            r.lambda_mass
        ));
    }
    out
}

/// Builds the solver config for one member of an epsilon-refinement
/// study: `h = eps/4`, `delta = eps^2`, `dt = 0.9 * stability limit`.
pub fn coupled_config(base: &SolverConfig, epsilon: f64) -> SolverConfig {
    let extent = base.grid.extent();
    let nodes = (4.0 * extent / epsilon).round() as usize + 1;
    let grid = Grid::new(base.grid.dim(), nodes, extent).expect("valid coupled grid");
    let delta = epsilon * epsilon;
    let dt = 0.9
        * solver::stability_limit_parts(grid.dim(), grid.h(), epsilon, Some(delta), Scheme::Yosida);
    let n_steps = (base.t_end / dt).ceil().max(1.0);
    // keep the diagnostics stream to a bounded number of samples
    let diagnostics_every = ((n_steps / 24.0).ceil() as usize).max(1);
    SolverConfig {
        grid,
        shape: base.shape,
        epsilon,
        delta: Some(delta),
        scheme: Scheme::Yosida,
        dt,
        t_end: base.t_end,
        snapshot_every: usize::MAX - 1,
        diagnostics_every,
    }
}

/// Runs the regularized dynamics for each epsilon with the `delta = eps^2`
/// coupling and reports `max_t xi_mass` over the shared time window.
pub fn xi_vanishing_study(
    base: &SolverConfig,
    epsilons: &[f64],
) -> Result<Vec<(f64, f64)>, SolverError> {
    let mut table = Vec::new();
    for &eps in epsilons {
        let cfg = coupled_config(base, eps);
        let out = solver::run(&cfg)?;
        let max_mass = out
            .diag
            .iter()
            .map(|d| discrepancy_measure(&d.state).1)
            .fold(0.0f64, f64::max);
        table.push((eps, max_mass));
    }
    Ok(table)
}

/// Normalized level transform evaluated through a precomputed table (the
/// exact quadrature per node would dominate the diagnostics cost).
pub struct PhiTable {
    lo: f64,
    hi: f64,
    vals: Vec<f64>,
}

impl PhiTable {
    const SAMPLES: usize = 2048;

    pub fn for_state(state: &PhaseState) -> Self {
        match state.delta {
            Some(d) => {
                let p = ObstacleParam::new(d).expect("valid delta");
                let m = 1.0 / (1.0 - d);
                let g = |s: f64| (2.0 * f_delta(s, p)).sqrt();
                Self::build(-m, m, g)
            }
            None => Self::build(-1.0, 1.0, |s: f64| (2.0 * f_zero(s)).sqrt()),
        }
    }

    fn build(lo: f64, hi: f64, g: impl Fn(f64) -> f64) -> Self {
        let n = Self::SAMPLES;
        let step = (hi - lo) / n as f64;
        let mut vals = Vec::with_capacity(n + 1);
        vals.push(0.0);
        let mut acc = 0.0;
        for k in 0..n {
            let a = lo + k as f64 * step;
            let b = if k == n - 1 { hi } else { a + step };
            acc += integrate(&g, a, b, QUAD_TOL / n as f64);
            vals.push(acc);
        }
        let total = vals[n];
        for v in vals.iter_mut() {
            *v /= total;
        }
        vals[n] = 1.0;
        Self { lo, hi, vals }
    }

    pub fn eval(&self, s: f64) -> f64 {
        let n = self.vals.len() - 1;
        let u = ((s - self.lo) / (self.hi - self.lo) * n as f64).clamp(0.0, n as f64);
        let k = (u.floor() as usize).min(n - 1);
        let frac = u - k as f64;
        self.vals[k] + frac * (self.vals[k + 1] - self.vals[k])
    }
}

/// Result of [`bv_holder_check`].
#[derive(Debug, Clone, PartialEq)]
pub struct BvHolder {
    /// `max_t h^n sum |grad_h w|`.
    pub max_total_variation: f64,
    /// The bound `sigma^{-1} mu_0(box)` it is measured against.
    pub tv_bound: f64,
    /// `max over pairs of h^n sum |w(t2) - w(t1)| / sqrt(t2 - t1)`.
    pub holder_max: f64,
}

/// BV and Hoelder diagnostics of the transformed field `w = Phi(phi)`
/// across a run's snapshots.
pub fn bv_holder_check(run: &RunOutput) -> BvHolder {
    let snaps = &run.snapshots;
    assert!(!snaps.is_empty(), "run has snapshots");
    let grid = run.config.grid;
    let w = hn(grid);
    let phi = PhiTable::for_state(&snaps[0]);
    let fields: Vec<ScalarField> = snaps
        .iter()
        .map(|s| {
            ScalarField::from_vec(
                grid,
                s.field.data().iter().map(|&v| phi.eval(v)).collect(),
            )
        })
        .collect();
    let mut max_tv: f64 = 0.0;
    for f in &fields {
        let vals: Vec<f64> = (0..grid.len()).map(|idx| f.grad_sq(idx).sqrt()).collect();
        max_tv = max_tv.max(w * pairwise_sum(&vals));
    }
    let mut holder_max: f64 = 0.0;
    for i in 0..fields.len() {
        for j in (i + 1)..fields.len() {
            let dt = snaps[j].t - snaps[i].t;
            if dt <= 0.0 {
                continue;
            }
            let vals: Vec<f64> = fields[j]
                .data()
                .iter()
                .zip(fields[i].data())
                .map(|(&a, &b)| (a - b).abs())
                .collect();
            holder_max = holder_max.max(w * pairwise_sum(&vals) / dt.sqrt());
        }
    }
    BvHolder {
        max_total_variation: max_tv,
        tv_bound: energy_measure(&snaps[0], None) / sigma_of_state(&snaps[0]),
        holder_max,
    }
}
