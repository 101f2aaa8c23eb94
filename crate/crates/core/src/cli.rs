//! Experiment orchestration behind the command-line binary: `run`,
//! `sweep`, `diagnose` and `profile-check`, plus manifest and output-file
//! emission. Everything here is deterministic; re-running a command over
//! the same config produces byte-identical CSVs and snapshots.

use crate::config::{parse_config, serialize, ConfigError, RunSpec};
use crate::measures::{
    self, diagnostics_records, write_diagnostics_csv, MeasureError,
};
use crate::mcf::{contour_csv, extract_zero_level, McfError};
use crate::potential::{
    f_delta, profile_q_delta, profile_q_delta_deriv, sigma_delta, sigma_delta_quadrature,
    ObstacleParam, ProfileParam,
};
use crate::solver::{self, RunOutput, SolverError};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("diagnose: {0}")]
    Diagnose(String),
    #[error("profile self-test failed:\n{0}")]
    ProfileCheck(String),
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Solver(_) => "solver",
            CliError::Measure(_) => "measure",
            CliError::Io(_) => "io",
            CliError::Diagnose(_) => "diagnose",
            CliError::ProfileCheck(_) => "profile-check",
        }
    }

    /// Machine-readable error payload emitted by the binary on failure.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Payload<'a> {
            error: Inner<'a>,
        }
        #[derive(Serialize)]
        struct Inner<'a> {
            kind: &'a str,
            message: String,
        }
        serde_json::to_string(&Payload {
            error: Inner {
                kind: self.kind(),
                message: self.to_string(),
            },
        })
        .expect("serializable")
    }
}

/// Configures the global worker pool from `OBSTACLE_MCF_THREADS`
/// (default: hardware count). Safe to call more than once.
pub fn init_threads() {
    if let Ok(v) = std::env::var("OBSTACLE_MCF_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            if n >= 1 {
                // ignore the error if a pool was already installed
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

/// Record of one completed command: config echo, emitted files with
/// checksums, and wall-clock duration.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub config: String,
    pub output_dir: String,
    pub files: Vec<FileEntry>,
    pub duration_seconds: f64,
}

fn file_entry(root: &Path, rel: &str) -> Result<FileEntry, CliError> {
    let bytes = std::fs::read(root.join(rel))?;
    let mut h = Sha256::new();
    h.update(&bytes);
    Ok(FileEntry {
        path: rel.to_string(),
        bytes: bytes.len() as u64,
        sha256: format!("{:x}", h.finalize()),
    })
}

fn snapshot_rel(i: usize) -> String {
    format!("snapshots/snap-{i:06}")
}

/// Writes config echo, snapshot pairs, diagnostics CSV and (when the zero
/// level set exists) the final contour; returns the relative paths written.
fn write_run_outputs(
    spec: &RunSpec,
    out: &RunOutput,
    dir: &Path,
) -> Result<Vec<String>, CliError> {
    std::fs::create_dir_all(dir)?;
    let mut rels = Vec::new();

    std::fs::write(dir.join("config.txt"), serialize(spec))?;
    rels.push("config.txt".to_string());

    for (i, snap) in out.snapshots.iter().enumerate() {
        let rel = snapshot_rel(i);
        solver::save_snapshot(snap, &dir.join(&rel))?;
        rels.push(format!("{rel}/meta.json"));
        rels.push(format!("{rel}/field.f64"));
    }

    let records = diagnostics_records(out)?;
    std::fs::write(dir.join("diagnostics.csv"), write_diagnostics_csv(&records))?;
    rels.push("diagnostics.csv".to_string());

    match extract_zero_level(out.snapshots.last().expect("at least one snapshot")) {
        Ok(contour) => {
            std::fs::write(dir.join("final_contour.csv"), contour_csv(&contour))?;
            rels.push("final_contour.csv".to_string());
        }
        Err(McfError::EmptyContour) => {} // extinct or saturated: nothing to export
        Err(e) => return Err(CliError::Diagnose(e.to_string())),
    }
    Ok(rels)
}

fn build_manifest(
    spec: &RunSpec,
    dir: &Path,
    rels: Vec<String>,
    started: std::time::Instant,
) -> Result<RunManifest, CliError> {
    let mut files = Vec::new();
    for rel in &rels {
        files.push(file_entry(dir, rel)?);
    }
    let manifest = RunManifest {
        config: serialize(spec),
        output_dir: dir.display().to_string(),
        files,
        duration_seconds: started.elapsed().as_secs_f64(),
    };
    std::fs::write(
        dir.join("manifest.json"),
        serde_json::to_string_pretty(&manifest).expect("serializable"),
    )?;
    Ok(manifest)
}

/// `run <config>`: simulate and persist snapshots + diagnostics.
pub fn cmd_run(config_path: &Path) -> Result<RunManifest, CliError> {
    init_threads();
    let started = std::time::Instant::now();
    let spec = parse_config(config_path)?;
    let out = solver::run(&spec.solver)?;
    let rels = write_run_outputs(&spec, &out, &spec.output_dir)?;
    build_manifest(&spec, &spec.output_dir, rels, started)
}

/// `sweep <config> --epsilons ...`: one coupled run per epsilon
/// (`delta = eps^2`, `h = eps/4`), each in its own subdirectory, plus the
/// `xi_vanishing.csv` table.
pub fn cmd_sweep(
    config_path: &Path,
    epsilons: &[f64],
) -> Result<(Vec<RunManifest>, Vec<(f64, f64)>), CliError> {
    init_threads();
    let base = parse_config(config_path)?;
    let mut manifests = Vec::new();
    let mut table = Vec::new();
    for &eps in epsilons {
        let started = std::time::Instant::now();
        let cfg = measures::coupled_config(&base.solver, eps);
        let dir = base.output_dir.join(format!("eps-{eps}"));
        let spec = RunSpec {
            solver: cfg.clone(),
            output_dir: dir.clone(),
        };
        let out = solver::run(&cfg)?;
        let max_mass = out
            .diag
            .iter()
            .map(|d| measures::discrepancy_measure(&d.state).1)
            .fold(0.0f64, f64::max);
        table.push((eps, max_mass));
        let rels = write_run_outputs(&spec, &out, &dir)?;
        manifests.push(build_manifest(&spec, &dir, rels, started)?);
    }
    std::fs::create_dir_all(&base.output_dir)?;
    let mut csv = String::from("epsilon,max_xi_mass\n");
    for &(eps, mass) in &table {
        let _ = writeln!(csv, "{:.16e},{:.16e}", eps, mass);
    }
    std::fs::write(base.output_dir.join("xi_vanishing.csv"), csv)?;
    Ok((manifests, table))
}

/// Outcome of `diagnose <dir>`.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnoseReport {
    pub snapshots_checked: usize,
    pub csv_path: String,
}

/// `diagnose <dir>`: replay the persisted config deterministically,
/// verify every stored snapshot bit-exactly, and rewrite the diagnostics
/// CSV offline (byte-identical to the in-run one).
pub fn cmd_diagnose(dir: &Path) -> Result<DiagnoseReport, CliError> {
    init_threads();
    let spec = parse_config(&dir.join("config.txt"))?;
    let out = solver::run(&spec.solver)?;
    let mut checked = 0;
    for (i, snap) in out.snapshots.iter().enumerate() {
        let snap_dir = dir.join(snapshot_rel(i));
        if !snap_dir.exists() {
            return Err(CliError::Diagnose(format!(
                "missing snapshot directory {}",
                snap_dir.display()
            )));
        }
        let stored = solver::load_snapshot(&snap_dir)?;
        let same = stored.field.grid() == snap.field.grid()
            && stored.t.to_bits() == snap.t.to_bits()
            && stored
                .field
                .data()
                .iter()
                .zip(snap.field.data())
                .all(|(a, b)| a.to_bits() == b.to_bits());
        if !same {
            return Err(CliError::Diagnose(format!(
                "snapshot {i} does not match the deterministic replay"
            )));
        }
        checked += 1;
    }
    let records = diagnostics_records(&out)?;
    let csv_path = dir.join("diagnostics.csv");
    std::fs::write(&csv_path, write_diagnostics_csv(&records))?;
    Ok(DiagnoseReport {
        snapshots_checked: checked,
        csv_path: csv_path.display().to_string(),
    })
}

/// `profile-check`: self-test of the potential/profile identities with a
/// printed report. Fails if any residual exceeds its threshold.
pub fn cmd_profile_check() -> Result<String, CliError> {
    let mut report = String::new();
    let mut ok = true;
    let _ = writeln!(report, "surface tension sigma_delta:");
    let _ = writeln!(
        report,
        "  {:>8} {:>22} {:>22} {:>12}",
        "delta", "closed form", "quadrature", "|diff|"
    );
    for d in [0.3, 0.1, 0.01] {
        let p = ObstacleParam::new(d).expect("valid");
        let a = sigma_delta(p);
        let b = sigma_delta_quadrature(p);
        let gap = (a - b).abs();
        ok &= gap < 1e-8;
        let _ = writeln!(report, "  {d:>8} {a:>22.16} {b:>22.16} {gap:>12.3e}");
    }
    let near = sigma_delta_quadrature(ObstacleParam::new(1e-4).expect("valid"));
    let pi_gap = (near - std::f64::consts::FRAC_PI_2).abs();
    ok &= pi_gap < 1e-2;
    let _ = writeln!(
        report,
        "  sigma(1e-4) = {near:.8}, |sigma - pi/2| = {pi_gap:.3e}"
    );

    let eps = 0.05;
    let _ = writeln!(report, "standing-wave profile (eps = {eps}):");
    for d in [0.3, 0.1, 0.0025] {
        let p = ProfileParam::new(eps, Some(d)).expect("valid");
        let pd = ObstacleParam::new(d).expect("valid");
        let mut res: f64 = 0.0;
        let mut sup_qr: f64 = 0.0;
        for i in -1500..=1500i64 {
            let r = i as f64 * 2e-3 * eps;
            let q = profile_q_delta(r, p);
            let qr = profile_q_delta_deriv(r, p);
            res = res.max((eps * qr * qr / 2.0 - f_delta(q, pd) / eps).abs());
            sup_qr = sup_qr.max(qr.abs());
        }
        let rb = eps * (1.0f64 - d).sqrt().asin();
        let ends = (profile_q_delta(rb, p) - 1.0)
            .abs()
            .max((profile_q_delta(-rb, p) + 1.0).abs());
        ok &= res < 1e-12 && ends < 1e-12 && sup_qr <= 2.0 / eps;
        let _ = writeln!(
            report,
            "  delta = {d}: ODE residual {res:.3e}, |q(+-rb) -+ 1| {ends:.3e}, eps*sup|q_r| = {:.4}",
            eps * sup_qr
        );
    }
    let _ = writeln!(report, "status: {}", if ok { "ok" } else { "FAILED" });
    if ok {
        Ok(report)
    } else {
        Err(CliError::ProfileCheck(report))
    }
}
