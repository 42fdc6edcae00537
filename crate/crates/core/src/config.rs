//! Declarative run configuration: strict TOML parsing with aggregated
//! diagnostics, and a resolved echo that parses back to the same value.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::PathBuf;

use toml::{Table, Value};

use crate::comb::CombParams;
use crate::dynamics::Model;
use crate::ensemble::InitialConditions;
use crate::error::{Error, Result};
use crate::integrate::IntegrationPlan;
use crate::langevin::{KernelKind, LangevinParams, NoiseKernel};
use crate::params::SystemParams;
use crate::walk::SiteRounding;

/// Environment variable that replaces the configured output directory.
pub const OUTPUT_DIR_ENV: &str = "QUASIWALK_OUTPUT_DIR";

const DERIVED_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Trajectory,
    Ensemble,
    Langevin,
    CombScan,
    ForceProfile,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 5] = [
        ExperimentKind::Trajectory,
        ExperimentKind::Ensemble,
        ExperimentKind::Langevin,
        ExperimentKind::CombScan,
        ExperimentKind::ForceProfile,
    ];

    pub fn label(self) -> &'static str {
        match self {
            ExperimentKind::Trajectory => "trajectory",
            ExperimentKind::Ensemble => "ensemble",
            ExperimentKind::Langevin => "langevin",
            ExperimentKind::CombScan => "comb-scan",
            ExperimentKind::ForceProfile => "force-profile",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.label() == s)
    }
}

/// Walk discretization and ensemble sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WalkConfig {
    pub n_steps: usize,
    /// Ensemble size; ignored by single trajectories.
    pub n_traj: usize,
    pub init: InitialConditions,
    pub tau_max: usize,
    pub rounding: SiteRounding,
}

/// Standard-map scan, optionally tied to a physical comb.
#[derive(Debug, Clone, PartialEq)]
pub struct CombScanConfig {
    pub k_values: Vec<f64>,
    pub n_steps: usize,
    pub ensemble_size: usize,
    pub physical: Option<CombParams>,
}

/// Grid of the force table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForceProfileConfig {
    pub theta_min: f64,
    pub theta_max: f64,
    pub n_theta: usize,
    pub t_min: f64,
    pub t_max: f64,
    pub n_t: usize,
}

impl ForceProfileConfig {
    /// Two lattice periods by two jump periods (or 200 time units when the
    /// beat detuning is zero).
    pub fn default_for(params: &SystemParams) -> Self {
        let span = params.jump_period().map(|t| 2.0 * t).unwrap_or(200.0);
        ForceProfileConfig {
            theta_min: -2.0 * PI,
            theta_max: 2.0 * PI,
            n_theta: 129,
            t_min: 0.0,
            t_max: span,
            n_t: 101,
        }
    }

    pub fn thetas(&self) -> Vec<f64> {
        linspace(self.theta_min, self.theta_max, self.n_theta)
    }

    pub fn times(&self) -> Vec<f64> {
        linspace(self.t_min, self.t_max, self.n_t)
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// A fully validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub kind: ExperimentKind,
    pub master_seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; 0 means all available.
    pub workers: usize,
    pub system: Option<SystemParams>,
    pub model: Option<Model>,
    pub integration: Option<IntegrationPlan>,
    pub walk: Option<WalkConfig>,
    pub langevin: Option<LangevinParams>,
    pub comb: Option<CombScanConfig>,
    pub force_profile: Option<ForceProfileConfig>,
}

/// Quantities computed from the system block, echoed for inspection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derived {
    pub u0: f64,
    pub eta_t_bar: f64,
    /// π/δT, absent when δT = 0.
    pub jump_period: Option<f64>,
    pub phi_delta: f64,
}

impl Derived {
    pub fn of(p: &SystemParams) -> Self {
        Derived {
            u0: p.u0(),
            eta_t_bar: p.eta_t_bar(),
            jump_period: p.jump_period().ok(),
            phi_delta: p.phi_delta(),
        }
    }

    pub fn entries(&self) -> Vec<(&'static str, f64)> {
        let mut v = vec![("u0", self.u0), ("eta_t_bar", self.eta_t_bar)];
        if let Some(t) = self.jump_period {
            v.push(("jump_period", t));
        }
        v.push(("phi_delta", self.phi_delta));
        v
    }
}

impl RunConfig {
    pub fn derived(&self) -> Option<Derived> {
        self.system.as_ref().map(Derived::of)
    }

    pub fn system(&self) -> Result<&SystemParams> {
        self.system
            .as_ref()
            .ok_or_else(|| Error::Config("[system] block is required".into()))
    }

    /// Replaces the output directory from [`OUTPUT_DIR_ENV`] when set.
    pub fn apply_env_override(&mut self) {
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV).filter(|d| !d.is_empty()) {
            self.output_dir = PathBuf::from(dir);
        }
    }

    /// The resolved configuration as TOML, including a `[derived]` table.
    pub fn to_toml(&self) -> String {
        let mut root = Table::new();
        root.insert("kind".into(), self.kind.label().into());
        root.insert("master_seed".into(), Value::Integer(self.master_seed as i64));
        root.insert(
            "output_dir".into(),
            self.output_dir.to_string_lossy().into_owned().into(),
        );
        root.insert("workers".into(), Value::Integer(self.workers as i64));
        if let Some(p) = &self.system {
            let mut t = Table::new();
            for (k, v) in [
                ("kappa", p.kappa),
                ("gamma", p.gamma),
                ("delta_a", p.delta_a),
                ("delta_c", p.delta_c),
                ("delta_t", p.delta_t),
                ("eta_l", p.eta_l),
                ("eta_t", p.eta_t),
                ("g", p.g),
                ("omega_r", p.omega_r),
            ] {
                t.insert(k.into(), v.into());
            }
            root.insert("system".into(), t.into());
        }
        if let Some(m) = &self.model {
            let mut t = Table::new();
            let variant = match m {
                Model::Full => "full",
                Model::Linear => "linear",
                Model::Collective(n) => {
                    t.insert("n_emitters".into(), Value::Integer(i64::from(*n)));
                    "collective"
                }
            };
            t.insert("variant".into(), variant.into());
            root.insert("model".into(), t.into());
        }
        if let Some(plan) = &self.integration {
            let mut t = Table::new();
            t.insert("dt".into(), plan.dt.into());
            t.insert("t_end".into(), plan.t_end.into());
            t.insert("sample_stride".into(), int(plan.sample_stride));
            root.insert("integration".into(), t.into());
        }
        if let Some(w) = &self.walk {
            let mut t = Table::new();
            t.insert("n_steps".into(), int(w.n_steps));
            t.insert("n_traj".into(), int(w.n_traj));
            t.insert("tau_max".into(), int(w.tau_max));
            let rounding = match w.rounding {
                SiteRounding::HalfInteger => "half-integer",
                SiteRounding::Integer => "integer",
            };
            t.insert("rounding".into(), rounding.into());
            match w.init {
                InitialConditions::Box {
                    q_half_width,
                    p_half_width,
                } => {
                    t.insert("init".into(), "box".into());
                    t.insert("q_half_width".into(), q_half_width.into());
                    t.insert("p_half_width".into(), p_half_width.into());
                }
                InitialConditions::Thermal => {
                    t.insert("init".into(), "thermal".into());
                }
                InitialConditions::Fixed { q0, p0 } => {
                    t.insert("init".into(), "fixed".into());
                    t.insert("q0".into(), q0.into());
                    t.insert("p0".into(), p0.into());
                }
            }
            root.insert("walk".into(), t.into());
        }
        if let Some(l) = &self.langevin {
            let mut t = Table::new();
            t.insert("kernel".into(), l.kernel.kind.label().into());
            t.insert("d".into(), l.kernel.d.into());
            if l.kernel.kind != KernelKind::Delta {
                t.insert("sigma".into(), l.kernel.sigma.into());
                t.insert("omega".into(), l.kernel.omega.into());
            }
            t.insert("lambda_damp".into(), l.lambda_damp.into());
            t.insert("dt".into(), l.dt.into());
            t.insert("t_end".into(), l.t_end.into());
            t.insert("n_realizations".into(), int(l.n_realizations));
            t.insert("sample_stride".into(), int(l.sample_stride));
            root.insert("langevin".into(), t.into());
        }
        if let Some(c) = &self.comb {
            let mut t = Table::new();
            t.insert(
                "k_values".into(),
                Value::Array(c.k_values.iter().map(|&k| k.into()).collect()),
            );
            t.insert("n_steps".into(), int(c.n_steps));
            t.insert("ensemble_size".into(), int(c.ensemble_size));
            if let Some(p) = &c.physical {
                t.insert("n_f".into(), Value::Integer(i64::from(p.n_f)));
                t.insert("delta".into(), p.delta.into());
                t.insert("eta_t".into(), p.eta_t.into());
            }
            root.insert("comb".into(), t.into());
        }
        if let Some(f) = &self.force_profile {
            let mut t = Table::new();
            t.insert("theta_min".into(), f.theta_min.into());
            t.insert("theta_max".into(), f.theta_max.into());
            t.insert("n_theta".into(), int(f.n_theta));
            t.insert("t_min".into(), f.t_min.into());
            t.insert("t_max".into(), f.t_max.into());
            t.insert("n_t".into(), int(f.n_t));
            root.insert("force_profile".into(), t.into());
        }
        if let Some(d) = self.derived() {
            let t: Table = d
                .entries()
                .into_iter()
                .map(|(k, v)| (k.to_string(), Value::Float(v)))
                .collect();
            root.insert("derived".into(), t.into());
        }
        toml::to_string(&root).expect("config tables always serialize")
    }
}

fn int(v: usize) -> Value {
    Value::Integer(v as i64)
}

/// Collected problems, each tagged with a line number when one is known.
struct Diagnostics<'t> {
    text: &'t str,
    items: RefCell<Vec<String>>,
}

impl<'t> Diagnostics<'t> {
    fn push(&self, section: &str, key: &str, msg: &str) {
        let field = if section.is_empty() {
            key.to_string()
        } else if key.is_empty() {
            format!("[{section}]")
        } else {
            format!("{section}.{key}")
        };
        let line = locate(self.text, section, key)
            .map(|l| format!("line {l}: "))
            .unwrap_or_default();
        self.items.borrow_mut().push(format!("{line}{field}: {msg}"));
    }

    fn is_empty(&self) -> bool {
        self.items.borrow().is_empty()
    }
}

/// 1-based line of `key` inside `[section]`, or of the header itself when
/// `key` is empty.
fn locate(text: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(h) = line.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
            current = h.trim().to_string();
            if key.is_empty() && current == section {
                return Some(i + 1);
            }
            continue;
        }
        if current == section && !key.is_empty() {
            if let Some(rest) = line.strip_prefix(key) {
                if rest.trim_start().starts_with('=') {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

/// Reads typed fields from one table and remembers which keys were used.
struct Section<'a, 't> {
    name: &'static str,
    table: &'a Table,
    used: BTreeSet<&'static str>,
    diag: &'a Diagnostics<'t>,
}

impl<'a, 't> Section<'a, 't> {
    fn new(name: &'static str, table: &'a Table, diag: &'a Diagnostics<'t>) -> Self {
        Section {
            name,
            table,
            used: BTreeSet::new(),
            diag,
        }
    }

    fn has(&self, key: &str) -> bool {
        self.table.contains_key(key)
    }

    fn raw(&mut self, key: &'static str) -> Option<&'a Value> {
        self.used.insert(key);
        self.table.get(key)
    }

    fn error(&self, key: &str, msg: &str) {
        self.diag.push(self.name, key, msg);
    }

    fn missing(&self, key: &str) {
        self.error(key, "missing required field");
    }

    fn opt_f64(&mut self, key: &'static str) -> Option<f64> {
        match self.raw(key)? {
            Value::Float(v) if v.is_finite() => Some(*v),
            Value::Float(_) => {
                self.error(key, "must be finite");
                None
            }
            Value::Integer(v) => Some(*v as f64),
            _ => {
                self.error(key, "expected a number");
                None
            }
        }
    }

    fn f64(&mut self, key: &'static str) -> f64 {
        let present = self.has(key);
        self.opt_f64(key).unwrap_or_else(|| {
            if !present {
                self.missing(key);
            }
            f64::NAN
        })
    }

    fn f64_or(&mut self, key: &'static str, default: f64) -> f64 {
        let present = self.has(key);
        match self.opt_f64(key) {
            Some(v) => v,
            None if !present => default,
            None => f64::NAN,
        }
    }

    fn opt_u64(&mut self, key: &'static str) -> Option<u64> {
        match self.raw(key)? {
            Value::Integer(v) if *v >= 0 => Some(*v as u64),
            Value::Integer(_) => {
                self.error(key, "must be non-negative");
                None
            }
            _ => {
                self.error(key, "expected an integer");
                None
            }
        }
    }

    fn usize(&mut self, key: &'static str) -> usize {
        let present = self.has(key);
        self.opt_u64(key).map(|v| v as usize).unwrap_or_else(|| {
            if !present {
                self.missing(key);
            }
            0
        })
    }

    fn usize_or(&mut self, key: &'static str, default: usize) -> usize {
        let present = self.has(key);
        match self.opt_u64(key) {
            Some(v) => v as usize,
            None if !present => default,
            None => 0,
        }
    }

    fn opt_str(&mut self, key: &'static str) -> Option<&'a str> {
        match self.raw(key)? {
            Value::String(s) => Some(s.as_str()),
            _ => {
                self.error(key, "expected a string");
                None
            }
        }
    }

    fn str(&mut self, key: &'static str) -> Option<&'a str> {
        let present = self.has(key);
        let v = self.opt_str(key);
        if v.is_none() && !present {
            self.missing(key);
        }
        v
    }

    fn f64_array(&mut self, key: &'static str) -> Vec<f64> {
        match self.raw(key) {
            None => {
                self.missing(key);
                vec![]
            }
            Some(Value::Array(items)) => {
                let vals: Option<Vec<f64>> = items
                    .iter()
                    .map(|v| match v {
                        Value::Float(f) if f.is_finite() => Some(*f),
                        Value::Integer(i) => Some(*i as f64),
                        _ => None,
                    })
                    .collect();
                vals.unwrap_or_else(|| {
                    self.error(key, "expected an array of finite numbers");
                    vec![]
                })
            }
            Some(_) => {
                self.error(key, "expected an array");
                vec![]
            }
        }
    }

    /// Reports every key that was never read.
    fn finish(self) {
        for key in self.table.keys() {
            if !self.used.contains(key.as_str()) {
                self.diag.push(self.name, key, "unknown key");
            }
        }
    }
}

/// Parses and validates a configuration. All problems found are reported
/// together in one [`Error::Config`].
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let root: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    let diag = Diagnostics {
        text,
        items: RefCell::new(Vec::new()),
    };

    let blocks = [
        "system",
        "model",
        "integration",
        "walk",
        "langevin",
        "comb",
        "force_profile",
        "derived",
    ];
    let mut top = Section::new("", &root, &diag);
    let kind = top.str("kind").and_then(|s| {
        let k = ExperimentKind::parse(s);
        if k.is_none() {
            let names: Vec<_> = ExperimentKind::ALL.iter().map(|k| k.label()).collect();
            top.error("kind", &format!("unknown kind {s:?}, expected one of {names:?}"));
        }
        k
    });
    let master_seed = top.opt_u64("master_seed");
    if master_seed.is_none() && !top.has("master_seed") {
        top.missing("master_seed");
    }
    let output_dir = top.str("output_dir").map(PathBuf::from);
    let workers = top.usize_or("workers", 0);

    let mut tables: Vec<(&'static str, Option<&Table>)> = Vec::new();
    for name in blocks {
        match top.raw(name) {
            None => tables.push((name, None)),
            Some(Value::Table(t)) => tables.push((name, Some(t))),
            Some(_) => {
                top.error(name, "expected a table");
                tables.push((name, None));
            }
        }
    }
    top.finish();
    let table = |name: &str| tables.iter().find(|(n, _)| *n == name).and_then(|(_, t)| *t);
    let require = |name: &str| {
        let t = table(name);
        if t.is_none() {
            diag.push(name, "", "missing required block");
        }
        t
    };

    let needs = |k: &[ExperimentKind]| kind.is_some_and(|kind| k.contains(&kind));
    use ExperimentKind as K;

    // The walk block may carry the jump period instead of δT.
    let mut walk_period = None;
    let walk_table = if needs(&[K::Ensemble]) {
        require("walk")
    } else {
        table("walk")
    };
    let walk = walk_table.map(|t| {
        let mut s = Section::new("walk", t, &diag);
        walk_period = s.opt_f64("period");
        if walk_period.is_some_and(|p| p <= 0.0) {
            s.error("period", "must be > 0");
        }
        let ensemble = needs(&[K::Ensemble]);
        let n_steps = if ensemble {
            s.usize("n_steps")
        } else {
            s.usize_or("n_steps", 0)
        };
        let n_traj = if ensemble {
            s.usize("n_traj")
        } else {
            s.usize_or("n_traj", 1)
        };
        let tau_max = s.usize_or("tau_max", 10);
        let rounding = match s.opt_str("rounding").unwrap_or("half-integer") {
            "half-integer" => SiteRounding::HalfInteger,
            "integer" => SiteRounding::Integer,
            other => {
                s.error("rounding", &format!("unknown rounding {other:?}"));
                SiteRounding::HalfInteger
            }
        };
        let init = match s.str("init") {
            Some("box") => InitialConditions::Box {
                q_half_width: s.f64("q_half_width"),
                p_half_width: s.f64("p_half_width"),
            },
            Some("thermal") => InitialConditions::Thermal,
            Some("fixed") => InitialConditions::Fixed {
                q0: s.f64("q0"),
                p0: s.f64_or("p0", 0.0),
            },
            Some(other) => {
                s.error("init", &format!("unknown sampler {other:?}"));
                InitialConditions::Thermal
            }
            None => InitialConditions::Thermal,
        };
        s.finish();
        WalkConfig {
            n_steps,
            n_traj,
            init,
            tau_max,
            rounding,
        }
    });

    let system_table = if needs(&[K::Trajectory, K::Ensemble, K::ForceProfile]) {
        require("system")
    } else {
        table("system")
    };
    let system = system_table.map(|t| {
        let mut s = Section::new("system", t, &diag);
        let delta_t = match (s.opt_f64("delta_t"), walk_period) {
            (Some(_), Some(_)) => {
                s.error(
                    "delta_t",
                    "system.delta_t and walk.period are mutually exclusive",
                );
                f64::NAN
            }
            (Some(d), None) => d,
            (None, Some(period)) => PI / period,
            (None, None) => {
                if !s.has("delta_t") {
                    s.error("delta_t", "missing required field (or give walk.period)");
                }
                f64::NAN
            }
        };
        let p = SystemParams {
            kappa: s.f64_or("kappa", 1.0),
            gamma: s.f64("gamma"),
            delta_a: s.f64("delta_a"),
            delta_c: s.f64("delta_c"),
            delta_t,
            eta_l: s.f64("eta_l"),
            eta_t: s.f64("eta_t"),
            g: s.f64("g"),
            omega_r: s.f64("omega_r"),
        };
        s.finish();
        p
    });
    if system.is_none() && walk_period.is_some() {
        diag.push("walk", "period", "needs a [system] block");
    }

    let model_table = if needs(&[K::Trajectory, K::Ensemble]) {
        require("model")
    } else {
        table("model")
    };
    let model = model_table.map(|t| {
        let mut s = Section::new("model", t, &diag);
        let m = match s.str("variant") {
            Some("full") => Model::Full,
            Some("linear") => Model::Linear,
            Some("collective") => {
                let n = s.usize("n_emitters");
                Model::Collective(u32::try_from(n).unwrap_or(u32::MAX))
            }
            Some(other) => {
                s.error("variant", &format!("unknown variant {other:?}"));
                Model::Linear
            }
            None => Model::Linear,
        };
        s.finish();
        m
    });

    let integration_table = if needs(&[K::Trajectory, K::Ensemble]) {
        require("integration")
    } else {
        table("integration")
    };
    let integration = integration_table.map(|t| {
        let mut s = Section::new("integration", t, &diag);
        let dt = s.f64("dt");
        let t_end = if needs(&[K::Trajectory]) {
            s.f64("t_end")
        } else {
            s.f64_or("t_end", 0.0)
        };
        let stride = s.usize_or("sample_stride", 1);
        s.finish();
        IntegrationPlan {
            dt,
            t_end,
            sample_stride: stride,
        }
    });

    let langevin_table = if needs(&[K::Langevin]) {
        require("langevin")
    } else {
        table("langevin")
    };
    let langevin = langevin_table.map(|t| {
        let mut s = Section::new("langevin", t, &diag);
        let kind = s.str("kernel").and_then(|k| {
            let parsed = KernelKind::parse(k);
            if parsed.is_none() {
                s.error("kernel", &format!("unknown kernel {k:?}"));
            }
            parsed
        });
        let d = s.f64("d");
        let kernel = match kind {
            Some(KernelKind::Delta) | None => NoiseKernel::delta(d),
            Some(k) => NoiseKernel {
                kind: k,
                d,
                sigma: s.f64("sigma"),
                omega: s.f64("omega"),
            },
        };
        let l = LangevinParams {
            lambda_damp: s.f64("lambda_damp"),
            kernel,
            dt: s.f64("dt"),
            t_end: s.f64("t_end"),
            n_realizations: s.usize("n_realizations"),
            master_seed: 0,
            sample_stride: s.usize_or("sample_stride", 1),
        };
        s.finish();
        l
    });

    let comb_table = if needs(&[K::CombScan]) {
        require("comb")
    } else {
        table("comb")
    };
    let comb = comb_table.map(|t| {
        let mut s = Section::new("comb", t, &diag);
        let k_values = s.f64_array("k_values");
        let n_steps = s.usize("n_steps");
        let ensemble_size = s.usize("ensemble_size");
        let physical = if s.has("n_f") || s.has("delta") || s.has("eta_t") {
            let n_f = s.usize("n_f");
            Some(CombParams {
                n_f: u32::try_from(n_f).unwrap_or(u32::MAX),
                delta: s.f64("delta"),
                eta_t: s.f64("eta_t"),
            })
        } else {
            None
        };
        s.finish();
        CombScanConfig {
            k_values,
            n_steps,
            ensemble_size,
            physical,
        }
    });

    let force_profile = table("force_profile").map(|t| {
        let mut s = Section::new("force_profile", t, &diag);
        let base = system
            .as_ref()
            .map(ForceProfileConfig::default_for)
            .unwrap_or_else(|| ForceProfileConfig::default_for(&SystemParams::baseline()));
        let f = ForceProfileConfig {
            theta_min: s.f64_or("theta_min", base.theta_min),
            theta_max: s.f64_or("theta_max", base.theta_max),
            n_theta: s.usize_or("n_theta", base.n_theta),
            t_min: s.f64_or("t_min", base.t_min),
            t_max: s.f64_or("t_max", base.t_max),
            n_t: s.usize_or("n_t", base.n_t),
        };
        s.finish();
        f
    });

    let derived_echo: Vec<(String, Option<f64>)> = table("derived")
        .map(|t| {
            t.iter()
                .map(|(k, v)| (k.clone(), v.as_float().or(v.as_integer().map(|i| i as f64))))
                .collect()
        })
        .unwrap_or_default();

    if !diag.is_empty() {
        return Err(Error::Config(diag.items.into_inner().join("\n")));
    }

    let mut config = RunConfig {
        kind: kind.expect("kind checked above"),
        master_seed: master_seed.expect("seed checked above"),
        output_dir: output_dir.expect("output_dir checked above"),
        workers,
        system,
        model,
        integration,
        walk,
        langevin,
        comb,
        force_profile,
    };
    if let Some(l) = config.langevin.as_mut() {
        l.master_seed = config.master_seed;
    }
    if config.kind == K::ForceProfile && config.force_profile.is_none() {
        config.force_profile = Some(ForceProfileConfig::default_for(
            config.system.as_ref().expect("system required"),
        ));
    }
    check_derived(&config, &derived_echo)?;
    validate(&config)?;
    Ok(config)
}

/// An echoed `[derived]` table must agree with the recomputed values.
fn check_derived(config: &RunConfig, echo: &[(String, Option<f64>)]) -> Result<()> {
    if echo.is_empty() {
        return Ok(());
    }
    let Some(derived) = config.derived() else {
        return Err(Error::Config("[derived] given without a [system] block".into()));
    };
    let expected = derived.entries();
    let mut problems = Vec::new();
    for (key, value) in echo {
        match (expected.iter().find(|(k, _)| k == key), value) {
            (None, _) => problems.push(format!("derived.{key}: unknown key")),
            (Some(_), None) => problems.push(format!("derived.{key}: expected a number")),
            (Some((_, want)), Some(got)) => {
                if (want - got).abs() > DERIVED_RTOL * want.abs().max(got.abs()) {
                    problems.push(format!(
                        "derived.{key}: {got} disagrees with the system block ({want})"
                    ));
                }
            }
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(problems.join("\n")))
    }
}

/// Semantic checks once every field is known.
fn validate(config: &RunConfig) -> Result<()> {
    if config.master_seed > i64::MAX as u64 {
        return Err(Error::Config("master_seed must fit in a signed 64-bit integer".into()));
    }
    if let Some(p) = &config.system {
        p.validate()?;
    }
    if let Some(m) = &config.model {
        m.validate()?;
    }
    match config.kind {
        ExperimentKind::Trajectory => {
            config.integration.as_ref().expect("required").validate()?;
            let p = config.system()?;
            p.jump_period()?;
        }
        ExperimentKind::Ensemble => {
            let p = config.system()?;
            let period = p.jump_period()?;
            let plan = config.integration.as_ref().expect("required");
            if !(plan.dt > 0.0) {
                return Err(Error::InvalidParam("integration.dt must be > 0".into()));
            }
            if period / plan.dt < crate::walk::MIN_WINDOW_SAMPLES as f64 {
                return Err(Error::InvalidParam(format!(
                    "integration.dt = {} leaves fewer than {} samples per jump period {period}",
                    plan.dt,
                    crate::walk::MIN_WINDOW_SAMPLES
                )));
            }
            let w = config.walk.as_ref().expect("required");
            if w.n_traj == 0 || w.n_steps == 0 {
                return Err(Error::InvalidParam(
                    "walk.n_traj and walk.n_steps must be >= 1".into(),
                ));
            }
        }
        ExperimentKind::Langevin => {
            config.langevin.as_ref().expect("required").validate()?;
        }
        ExperimentKind::CombScan => {
            let c = config.comb.as_ref().expect("required");
            if c.k_values.is_empty() {
                return Err(Error::InvalidParam("comb.k_values is empty".into()));
            }
            if c.n_steps < 2 || c.ensemble_size == 0 {
                return Err(Error::InvalidParam(
                    "comb.n_steps must be >= 2 and comb.ensemble_size >= 1".into(),
                ));
            }
            if let Some(phys) = &c.physical {
                phys.validate()?;
            }
        }
        ExperimentKind::ForceProfile => {
            let f = config.force_profile.as_ref().expect("filled in");
            if f.n_theta == 0 || f.n_t == 0 {
                return Err(Error::InvalidParam("force grid must be non-empty".into()));
            }
        }
    }
    Ok(())
}

/// The baseline single-trajectory configuration.
pub const BASELINE_TRAJECTORY: &str = r#"kind = "trajectory"
master_seed = 1
output_dir = "out/trajectory"

[system]
gamma = 1.0
delta_a = -1.5
delta_c = -1.5
delta_t = 0.031415926535897934
eta_l = 1.0
eta_t = 0.55
g = 0.01
omega_r = 0.1

[model]
variant = "full"

[integration]
dt = 0.01
t_end = 10000.0
sample_stride = 10

[walk]
init = "fixed"
q0 = 0.0035
p0 = 0.0
"#;
