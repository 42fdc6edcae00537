//! Experiment orchestration and artifact serialization.
//!
//! Every data table is plain comma-separated text with one header line and
//! floats printed with 17 significant digits. A `manifest.toml` next to the
//! tables lists each file with its SHA-256 digest.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::comb::{chaos_scan, KickedMap};
use crate::config::{ExperimentKind, RunConfig};
use crate::dynamics::{DynState, Model};
use crate::ensemble::{ensemble_run, member_rng, single_trajectory, EnsembleSpec};
use crate::error::{Error, Result};
use crate::forces::{force_grid, regime_check};
use crate::integrate::Trajectory;
use crate::langevin::{langevin_run, variance_analytic, variance_double_integral, KernelKind};
use crate::walk::{autocorrelation, discretize, mixing_report, DiscreteWalk, SiteRounding};

pub const MANIFEST_NAME: &str = "manifest.toml";
pub const RESOLVED_CONFIG_NAME: &str = "resolved_config.toml";

/// Float formatting shared by every table.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

/// An in-memory delimited table.
#[derive(Debug, Clone)]
pub struct DataTable {
    columns: Vec<String>,
    body: String,
    rows: usize,
}

impl DataTable {
    pub fn new(columns: &[&str]) -> Self {
        DataTable {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            body: String::new(),
            rows: 0,
        }
    }

    pub fn push(&mut self, fields: &[String]) {
        debug_assert_eq!(fields.len(), self.columns.len());
        self.body.push_str(&fields.join(","));
        self.body.push('\n');
        self.rows += 1;
    }

    pub fn push_floats(&mut self, values: &[f64]) {
        let fields: Vec<String> = values.iter().map(|&v| fmt_float(v)).collect();
        self.push(&fields);
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn render(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        s.push_str(&self.body);
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileEntry {
    pub name: String,
    pub sha256: String,
    pub rows: usize,
    pub columns: Vec<String>,
}

/// Record of one run: what was written and from which inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub kind: String,
    pub version: String,
    pub master_seed: i64,
    pub workers: usize,
    pub wall_clock_seconds: f64,
    pub output_dir: String,
    pub derived: BTreeMap<String, f64>,
    pub summary: BTreeMap<String, f64>,
    pub notes: Vec<String>,
    pub files: Vec<FileEntry>,
}

impl Manifest {
    pub fn file(&self, name: &str) -> Option<&FileEntry> {
        self.files.iter().find(|f| f.name == name)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("manifest always serializes")
    }
}

struct Writer {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Writer {
    fn put(&mut self, name: &str, contents: &str, rows: usize, columns: Vec<String>) -> Result<()> {
        fs::write(self.dir.join(name), contents)?;
        self.files.push(FileEntry {
            name: name.to_string(),
            sha256: sha256_hex(contents.as_bytes()),
            rows,
            columns,
        });
        Ok(())
    }

    fn table(&mut self, name: &str, table: &DataTable) -> Result<()> {
        self.put(name, &table.render(), table.rows, table.columns.clone())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Recomputes the digest of every listed file and reports mismatches.
pub fn verify_manifest(dir: &Path, manifest: &Manifest) -> Result<Vec<String>> {
    let mut bad = Vec::new();
    for f in &manifest.files {
        let bytes = fs::read(dir.join(&f.name))?;
        if sha256_hex(&bytes) != f.sha256 {
            bad.push(f.name.clone());
        }
    }
    Ok(bad)
}

#[derive(Default)]
struct Report {
    summary: BTreeMap<String, f64>,
    notes: Vec<String>,
}

impl Report {
    fn set(&mut self, key: &str, v: f64) {
        self.summary.insert(key.to_string(), v);
    }
}

/// Runs the configured experiment, writes its tables and manifest into the
/// output directory and returns the manifest.
pub fn run(config: &RunConfig) -> Result<Manifest> {
    let start = Instant::now();
    fs::create_dir_all(&config.output_dir)?;
    let mut w = Writer {
        dir: config.output_dir.clone(),
        files: Vec::new(),
    };
    let mut report = Report::default();
    match config.kind {
        ExperimentKind::Trajectory => run_trajectory(config, &mut w, &mut report)?,
        ExperimentKind::Ensemble => run_ensemble(config, &mut w, &mut report)?,
        ExperimentKind::Langevin => run_langevin(config, &mut w, &mut report)?,
        ExperimentKind::CombScan => run_comb_scan(config, &mut w, &mut report)?,
        ExperimentKind::ForceProfile => run_force_profile(config, &mut w, &mut report)?,
    }
    w.put(RESOLVED_CONFIG_NAME, &config.to_toml(), 0, vec![])?;

    let derived = config
        .derived()
        .map(|d| {
            d.entries()
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect()
        })
        .unwrap_or_default();
    let manifest = Manifest {
        kind: config.kind.label().to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        master_seed: config.master_seed as i64,
        workers: config.workers,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        output_dir: config.output_dir.to_string_lossy().into_owned(),
        derived,
        summary: report.summary,
        notes: report.notes,
        files: w.files,
    };
    fs::write(config.output_dir.join(MANIFEST_NAME), manifest.to_toml())?;
    Ok(manifest)
}

fn model_of(config: &RunConfig) -> Model {
    config.model.unwrap_or(Model::Linear)
}

/// Columns of `trajectory.csv`; the inversion column only for the full model.
pub fn trajectory_table(traj: &Trajectory<DynState>, with_inversion: bool) -> DataTable {
    let mut cols = vec!["t", "q", "p", "re_alpha", "im_alpha", "re_beta", "im_beta"];
    if with_inversion {
        cols.push("beta_z");
    }
    let mut table = DataTable::new(&cols);
    for s in &traj.samples {
        let mut row = vec![
            s.t,
            s.site_coordinate(),
            s.p,
            s.alpha.re,
            s.alpha.im,
            s.beta.re,
            s.beta.im,
        ];
        if with_inversion {
            row.push(s.beta_z.unwrap_or(f64::NAN));
        }
        table.push_floats(&row);
    }
    table
}

/// `walk.csv`: the origin at n = 0 followed by one site per period.
pub fn walk_table(walk: &DiscreteWalk) -> DataTable {
    let mut table = DataTable::new(&["n", "site"]);
    table.push(&["0".into(), fmt_float(walk.origin)]);
    for (i, s) in walk.sites.iter().enumerate() {
        table.push(&[(i + 1).to_string(), fmt_float(*s)]);
    }
    table
}

pub fn correlation_table(values: &[f64]) -> DataTable {
    let mut table = DataTable::new(&["tau", "C"]);
    for (tau, c) in values.iter().enumerate() {
        table.push(&[tau.to_string(), fmt_float(*c)]);
    }
    table
}

fn run_trajectory(config: &RunConfig, w: &mut Writer, report: &mut Report) -> Result<()> {
    let params = config.system()?;
    let model = model_of(config);
    let plan = config.integration.expect("validated");
    let (init, tau_max, rounding) = config
        .walk
        .map(|wc| (wc.init, wc.tau_max, wc.rounding))
        .unwrap_or((
            crate::ensemble::InitialConditions::Fixed { q0: 0.0, p0: 0.0 },
            10,
            SiteRounding::HalfInteger,
        ));
    let mut rng = member_rng(config.master_seed, 0);
    let (q0, p0) = init.sample(params, &mut rng)?;
    report.set("q0", q0);
    report.set("p0", p0);
    let traj = single_trajectory(params, model, q0, p0, &plan)?;
    w.table(
        "trajectory.csv",
        &trajectory_table(&traj, matches!(model, Model::Full)),
    )?;

    let period = params.jump_period()?;
    match discretize(&traj, period, rounding) {
        Ok(walk) => {
            w.table("walk.csv", &walk_table(&walk))?;
            report.set("distinct_sites", walk.distinct_sites() as f64);
            let jumps = walk.jumps();
            report.set(
                "nonzero_jumps",
                jumps.iter().filter(|j| **j != 0.0).count() as f64,
            );
            match autocorrelation(&jumps, tau_max) {
                Ok(c) => w.table("corr.csv", &correlation_table(&c.values))?,
                Err(e) => report.notes.push(format!("corr.csv skipped: {e}")),
            }
        }
        Err(e) => report.notes.push(format!("walk.csv skipped: {e}")),
    }
    Ok(())
}

fn run_ensemble(config: &RunConfig, w: &mut Writer, report: &mut Report) -> Result<()> {
    let params = *config.system()?;
    let wc = config.walk.expect("validated");
    let spec = EnsembleSpec {
        params,
        model: model_of(config),
        init: wc.init,
        n_traj: wc.n_traj,
        n_steps: wc.n_steps,
        dt: config.integration.expect("validated").dt,
        master_seed: config.master_seed,
        tau_max: wc.tau_max,
        rounding: wc.rounding,
    };
    let out = ensemble_run(&spec, config.workers)?;
    let stats = &out.stats;

    let mut variance = DataTable::new(&["n", "var"]);
    for (i, v) in stats.variance.iter().enumerate() {
        variance.push(&[(i + 1).to_string(), fmt_float(*v)]);
    }
    w.table("variance.csv", &variance)?;

    let mut hist = DataTable::new(&["site", "count"]);
    for (site, count) in &stats.histogram.bins {
        hist.push(&[fmt_float(*site), count.to_string()]);
    }
    w.table("hist.csv", &hist)?;
    w.table("corr.csv", &correlation_table(&stats.correlation.values))?;

    let mut members = DataTable::new(&["member", "seed", "q0", "p0", "final_site"]);
    let mut walks = DataTable::new(&["member", "n", "site"]);
    for m in &out.members {
        let last = m.walk.sites.last().copied().unwrap_or(m.walk.origin);
        members.push(&[
            m.index.to_string(),
            m.seed.to_string(),
            fmt_float(m.q0),
            fmt_float(m.p0),
            fmt_float(last),
        ]);
        walks.push(&[m.index.to_string(), "0".into(), fmt_float(m.walk.origin)]);
        for (n, s) in m.walk.sites.iter().enumerate() {
            walks.push(&[m.index.to_string(), (n + 1).to_string(), fmt_float(*s)]);
        }
    }
    w.table("members.csv", &members)?;
    w.table("walks.csv", &walks)?;

    report.set("slope", stats.diffusion.slope);
    report.set("slope_stderr", stats.diffusion.slope_stderr);
    report.set("intercept", stats.diffusion.intercept);
    report.set("hist_mean", stats.histogram.mean);
    report.set("hist_std", stats.histogram.std_dev);
    report.set("degenerate_walks", stats.degenerate_walks as f64);
    report.set("bloch_warnings", out.bloch_warnings() as f64);
    match mixing_report(&out.final_sites()) {
        Ok(m) => {
            report.set("mixing_overlap", m.overlap);
            report.set("mixing_mean_difference", m.mean_difference);
        }
        Err(e) => report.notes.push(format!("mixing report skipped: {e}")),
    }
    Ok(())
}

fn run_langevin(config: &RunConfig, w: &mut Writer, report: &mut Report) -> Result<()> {
    let params = config.langevin.expect("validated");
    let curve = langevin_run(&params, config.workers)?;
    let (lambda, d) = (params.lambda_damp, params.kernel.d);

    let mut main = DataTable::new(&["t", "var_mc", "var_analytic"]);
    let mut detail = DataTable::new(&["t", "var_stderr", "var_quadrature"]);
    for ((t, v), se) in curve.times.iter().zip(&curve.variance).zip(&curve.stderr) {
        main.push_floats(&[*t, *v, variance_analytic(lambda, d, *t)]);
        detail.push_floats(&[*t, *se, variance_double_integral(&params.kernel, lambda, *t)?]);
    }
    w.table("langevin.csv", &main)?;
    w.table("langevin_detail.csv", &detail)?;

    let mut kernel = DataTable::new(&["tau", "K"]);
    if params.kernel.kind != KernelKind::Delta {
        let span = params.kernel.support().min(params.t_end);
        let n = 401;
        for i in 0..n {
            let tau = span * i as f64 / (n - 1) as f64;
            kernel.push_floats(&[tau, params.kernel.shape(tau)]);
        }
        w.table("kernel.csv", &kernel)?;
    }

    let half = 0.5 * params.t_end;
    report.set("slope_mc", curve.slope_after(half)?);
    report.set("slope_white_noise", 2.0 * d / (lambda * lambda));
    report.set(
        "slope_asymptotic",
        2.0 * d / (lambda * lambda) * params.kernel.integrated_shape(),
    );
    Ok(())
}

fn run_comb_scan(config: &RunConfig, w: &mut Writer, report: &mut Report) -> Result<()> {
    let scan = config.comb.as_ref().expect("validated");
    let rows = chaos_scan(
        &scan.k_values,
        scan.n_steps,
        scan.ensemble_size,
        config.master_seed,
        config.workers,
    )?;
    let mut table = DataTable::new(&["K_eff", "growth_rate", "regime"]);
    for r in &rows {
        table.push(&[
            fmt_float(r.k_eff),
            fmt_float(r.growth_rate),
            r.regime.label().to_string(),
        ]);
    }
    w.table("scan.csv", &table)?;
    if let Some(comb) = &scan.physical {
        let params = config.system.as_ref().ok_or_else(|| {
            Error::Config("comb.n_f/delta/eta_t need a [system] block for the map constants".into())
        })?;
        let map = KickedMap::from_comb(params, comb);
        report.set("physical_kick", map.kick);
        report.set("physical_drift", map.drift);
        report.set("physical_k_eff", map.k_eff());
    }
    Ok(())
}

fn run_force_profile(config: &RunConfig, w: &mut Writer, report: &mut Report) -> Result<()> {
    let params = config.system()?;
    let grid = config.force_profile.expect("filled in by the parser");
    let mut table = DataTable::new(&["theta", "t", "F_L", "F_T", "F_LT", "total"]);
    for (theta, t, f) in force_grid(&grid.thetas(), &grid.times(), params) {
        table.push_floats(&[theta, t, f.f_l, f.f_t, f.f_lt, f.total]);
    }
    w.table("force_profile.csv", &table)?;
    report
        .notes
        .push(format!("regime: {}", regime_check(params).label()));
    report.set(
        "jump_threshold_estimate",
        crate::forces::jump_threshold_estimate(params),
    );
    Ok(())
}
