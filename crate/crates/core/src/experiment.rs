//! Reproducible experiment runner behind the `tidpp` binary.
//!
//! A run reads one JSON [`ExperimentConfig`], executes a [`Command`], writes
//! CSV/JSON artifacts into the output directory and returns a [`Report`]
//! listing every check with its value, limit and outcome. Artifacts carry the
//! SHA-256 of the config bytes and the tool version; nothing else varies
//! between runs, so identical inputs give byte-identical files.

use crate::continuum::{sample_poisson, ContinuumSampler, WindowBox};
use crate::coupling::{
    dbar_upper_bound, dependence_radius_scan, dpp_domination_suite, loewner_leq, vwb_scan, DbarBoundReport, DominationReport,
    FieldDistribution, ScanRow, MAX_FIELD_SITES, MAX_VWB_SITES,
};
use crate::discrete::{exact_distribution, DiscreteKernel, Sampler, SiteIndex, MAX_EXACT_SITES};
use crate::error::{Error, Result};
use crate::spectral::{smoothed_kernel_identity_check, DensityConfig, KernelEvaluator, KernelSpec, SpectralDensity, TentWindow, Variant};
use crate::stats::{covariance, MomentSummary};
use crate::tree::{CellBasis, TreeKernel, TreeWindow};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

pub const TOOL_NAME: &str = env!("CARGO_PKG_NAME");
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit status for a run whose checks all passed.
pub const EXIT_OK: i32 = 0;
/// Exit status for a run with a failed check or a numerical tolerance error.
pub const EXIT_TOLERANCE: i32 = 2;
/// Exit status for a config that does not parse or validate.
pub const EXIT_INVALID_CONFIG: i32 = 3;
/// Exit status for I/O failures.
pub const EXIT_IO: i32 = 1;

/// Multiplier on standard errors for every Monte Carlo check.
pub const SIGMA: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    KernelTable,
    TreeKernel,
    Sample,
    Dominate,
    Dbar,
    Depend,
    Vwb,
    Poisson,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::KernelTable => "kernel-table",
            Command::TreeKernel => "tree-kernel",
            Command::Sample => "sample",
            Command::Dominate => "dominate",
            Command::Dbar => "dbar",
            Command::Depend => "depend",
            Command::Vwb => "vwb",
            Command::Poisson => "poisson",
        }
    }

    /// Tolerance used when `--tol` is absent.
    pub fn default_tolerance(&self) -> f64 {
        match self {
            Command::KernelTable => 1e-6,
            Command::TreeKernel => 1e-8,
            Command::Sample => 0.01,
            Command::Dominate => 1e-9,
            Command::Dbar => 1e-12,
            Command::Depend => 1e-10,
            Command::Vwb => 1e-9,
            Command::Poisson => SIGMA,
        }
    }
}

/// Where a discrete kernel comes from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelSource {
    /// Haar-random eigenvectors with eigenvalues uniform in `[lo, hi]`.
    Random { sites: usize, lo: f64, hi: f64, seed: u64 },
    Identity { sites: usize, scale: f64 },
    /// Real symmetric matrix, row by row.
    Matrix(Vec<Vec<f64>>),
    /// `row, col, re, im` CSV, relative to the config file.
    Csv(PathBuf),
    /// Section of `K^Φ` for the configured density and tree window.
    Tree(Variant),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KernelPair {
    pub lower: KernelSource,
    pub upper: KernelSource,
}

/// Evenly spaced displacements `s·e_1` for `s` from `lo` to `hi`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisplacementGrid {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl DisplacementGrid {
    fn points(&self, dim: usize) -> Vec<Vec<f64>> {
        let step = if self.count > 1 { (self.hi - self.lo) / (self.count - 1) as f64 } else { 0.0 };
        (0..self.count)
            .map(|i| {
                let mut u = vec![0.0; dim];
                u[0] = self.lo + step * i as f64;
                u
            })
            .collect()
    }
}

fn default_radii() -> Vec<f64> {
    vec![1.0, 2.0, 4.0]
}
fn default_depth() -> u32 {
    4
}
fn default_seeds() -> Vec<u64> {
    vec![1]
}
fn default_draws() -> usize {
    10_000
}
fn default_grid() -> DisplacementGrid {
    DisplacementGrid { lo: -4.0, hi: 4.0, count: 100 }
}
fn default_max_separation() -> u64 {
    4
}

/// One experiment. Only the fields a command needs are required by it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub density: DensityConfig,
    #[serde(default = "default_radii")]
    pub radii: Vec<f64>,
    /// Truncation depth `N` of the dbar bound.
    #[serde(default = "default_depth")]
    pub depth: u32,
    /// Lattice window and level count for tree sections.
    #[serde(default)]
    pub window: Option<TreeWindow>,
    /// Continuum window.
    #[serde(default)]
    pub region: Option<WindowBox>,
    #[serde(default)]
    pub mesh: Option<f64>,
    /// Kernel variant for continuum sampling (default: base).
    #[serde(default)]
    pub variant: Option<Variant>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_draws")]
    pub draws: usize,
    /// Poisson intensity.
    #[serde(default)]
    pub intensity: Option<f64>,
    #[serde(default = "default_grid")]
    pub displacements: DisplacementGrid,
    /// Kernel for `sample` and `vwb`.
    #[serde(default)]
    pub kernel: Option<KernelSource>,
    /// Explicit kernels for `dominate`; default is lower/upper tree sections per radius.
    #[serde(default)]
    pub pair: Option<KernelPair>,
    /// Displacement at which `sample` estimates the continuum two-point function.
    #[serde(default)]
    pub two_point: Option<Vec<f64>>,
    #[serde(default = "default_max_separation")]
    pub max_separation: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks that do not depend on the command.
    pub fn validate(&self) -> Result<()> {
        let density = self.density.build()?;
        if let Some(r) = self.radii.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidParameter(format!("radius {r} must be positive")));
        }
        if self.depth == 0 {
            return Err(Error::InvalidParameter("depth N must be positive".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::InvalidParameter("at least one seed is required".into()));
        }
        if self.draws < 2 {
            return Err(Error::InvalidParameter("draws must be at least 2".into()));
        }
        if self.displacements.count == 0 || !(self.displacements.lo <= self.displacements.hi) {
            return Err(Error::InvalidParameter("displacement grid needs count > 0 and lo <= hi".into()));
        }
        let d = density.dim();
        if let Some(w) = &self.window {
            if w.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: w.dim() });
            }
        }
        if let Some(w) = &self.region {
            if w.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, got: w.dim() });
            }
        }
        if let Some(m) = self.mesh {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::InvalidParameter(format!("mesh {m} must be positive")));
            }
        }
        if let Some(v) = &self.variant {
            KernelSpec::new(density.clone(), *v)?;
        }
        if let Some(i) = self.intensity {
            if !(i >= 0.0 && i.is_finite()) {
                return Err(Error::InvalidParameter(format!("intensity {i} must be nonnegative")));
            }
        }
        if let Some(u) = &self.two_point {
            if u.len() != d {
                return Err(Error::DimensionMismatch { expected: d, got: u.len() });
            }
        }
        Ok(())
    }

    fn density(&self) -> Result<SpectralDensity> {
        self.density.build()
    }

    fn window(&self) -> Result<&TreeWindow> {
        self.window.as_ref().ok_or_else(|| Error::InvalidParameter("this command needs a tree \"window\"".into()))
    }

    fn region(&self) -> Result<&WindowBox> {
        self.region.as_ref().ok_or_else(|| Error::InvalidParameter("this command needs a continuum \"region\"".into()))
    }

    fn tree_section(&self, variant: Variant) -> Result<DiscreteKernel> {
        let w = self.window()?;
        let spec = KernelSpec::new(self.density()?, variant)?;
        TreeKernel::new(&spec, &CellBasis::new(w.dim(), w.levels()))?.section(&w.sites())
    }

    fn build_kernel(&self, source: &KernelSource, base_dir: &Path) -> Result<DiscreteKernel> {
        match source {
            KernelSource::Random { sites, lo, hi, seed } => {
                if !(0.0 <= *lo && lo <= hi && *hi <= 1.0) {
                    return Err(Error::InvalidParameter(format!("random spectrum [{lo}, {hi}] must lie in [0, 1]")));
                }
                Ok(DiscreteKernel::random(*sites, *lo, *hi, &mut ChaCha8Rng::seed_from_u64(*seed)))
            }
            KernelSource::Identity { sites, scale } => {
                if !(0.0..=1.0).contains(scale) {
                    return Err(Error::InvalidParameter(format!("identity scale {scale} must lie in [0, 1]")));
                }
                Ok(DiscreteKernel::scaled_identity(*sites, *scale))
            }
            KernelSource::Matrix(rows) => DiscreteKernel::from_real(rows),
            KernelSource::Csv(path) => {
                let file = std::fs::File::open(base_dir.join(path))?;
                DiscreteKernel::read_csv(file)
            }
            KernelSource::Tree(v) => self.tree_section(*v),
        }
    }
}

/// Options that override or complement the config.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub tol: Option<f64>,
}

/// Hash, version and echoed config carried by every artifact.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool: String,
    pub version: String,
    pub config_sha256: String,
    pub config: Value,
    pub seed_override: Option<u64>,
    pub tolerance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: Command,
    pub provenance: Provenance,
    pub checks: Vec<Check>,
    pub results: Value,
    pub artifacts: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            EXIT_OK
        } else {
            EXIT_TOLERANCE
        }
    }
}

/// Exit status for an error raised before or during a run.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::QuadratureTolerance { .. }
        | Error::ImaginaryResidue(_)
        | Error::NotHermitian(_)
        | Error::NegativeMass { .. }
        | Error::NotNormalized(_)
        | Error::SpectralLeakage { .. }
        | Error::NegativeGap { .. } => EXIT_TOLERANCE,
        Error::Io(_) => EXIT_IO,
        _ => EXIT_INVALID_CONFIG,
    }
}

/// Machine-readable error body printed by the binary.
pub fn error_json(err: &Error) -> Value {
    let kind = match exit_code_for(err) {
        EXIT_TOLERANCE => "tolerance",
        EXIT_INVALID_CONFIG => "invalid-config",
        _ => "io",
    };
    json!({ "tool": TOOL_NAME, "version": TOOL_VERSION, "error": kind, "exit_code": exit_code_for(err), "message": err.to_string() })
}

struct Ctx<'a> {
    cfg: ExperimentConfig,
    base_dir: &'a Path,
    out: PathBuf,
    tol: f64,
    provenance: Provenance,
    checks: Vec<Check>,
    artifacts: Vec<String>,
}

impl Ctx<'_> {
    fn check(&mut self, name: impl Into<String>, value: f64, limit: f64, passed: bool) {
        self.checks.push(Check { name: name.into(), value, limit, passed });
    }

    fn csv_header(&self) -> String {
        format!("# {} {} config-sha256 {}\n", self.provenance.tool, self.provenance.version, self.provenance.config_sha256)
    }

    /// Writes a CSV body produced by `body` after a provenance comment line.
    fn write_csv(&mut self, name: &str, body: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<()> {
        let mut buf = self.csv_header().into_bytes();
        body(&mut buf)?;
        self.write_file(name, &buf)
    }

    fn write_text(&mut self, name: &str, body: &str) -> Result<()> {
        let mut buf = self.csv_header();
        buf.push_str(body);
        self.write_file(name, buf.as_bytes())
    }

    fn write_file(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        std::fs::write(self.out.join(name), bytes)?;
        self.artifacts.push(name.to_string());
        Ok(())
    }

    fn seeds(&self, override_seed: Option<u64>) -> Vec<u64> {
        override_seed.map_or_else(|| self.cfg.seeds.clone(), |s| vec![s])
    }
}

/// Parse, validate and run from a config file.
pub fn run_file(command: Command, config_path: &Path, opts: &RunOptions) -> Result<Report> {
    let text = std::fs::read_to_string(config_path)?;
    let base = config_path.parent().map(Path::to_path_buf).unwrap_or_default();
    run(command, &text, &base, opts)
}

/// Run `command` on config text; relative paths resolve against `base_dir`.
pub fn run(command: Command, config_text: &str, base_dir: &Path, opts: &RunOptions) -> Result<Report> {
    let cfg = ExperimentConfig::from_json(config_text)?;
    let tol = opts.tol.unwrap_or_else(|| command.default_tolerance());
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!("tolerance {tol} must be nonnegative")));
    }
    let out = opts.out.clone().or_else(|| cfg.out.as_ref().map(|p| base_dir.join(p))).unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out)?;
    let provenance = Provenance {
        tool: TOOL_NAME.into(),
        version: TOOL_VERSION.into(),
        config_sha256: hex::encode(Sha256::digest(config_text.as_bytes())),
        config: serde_json::from_str(config_text)?,
        seed_override: opts.seed,
        tolerance: tol,
    };
    let mut ctx = Ctx { cfg, base_dir, out, tol, provenance, checks: Vec::new(), artifacts: Vec::new() };
    let results = match command {
        Command::KernelTable => kernel_table(&mut ctx)?,
        Command::TreeKernel => tree_kernel(&mut ctx)?,
        Command::Sample => sample(&mut ctx, opts.seed)?,
        Command::Dominate => dominate(&mut ctx)?,
        Command::Dbar => dbar(&mut ctx)?,
        Command::Depend => depend(&mut ctx)?,
        Command::Vwb => vwb(&mut ctx)?,
        Command::Poisson => poisson(&mut ctx, opts.seed)?,
    };
    let json_name = format!("{}.json", command.name());
    ctx.artifacts.push(json_name.clone());
    let report = Report { command, provenance: ctx.provenance, checks: ctx.checks, results, artifacts: ctx.artifacts };
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    std::fs::write(ctx.out.join(json_name), text)?;
    Ok(report)
}

/// Run `f` once per seed on scoped threads; results keep seed order.
fn per_seed<T: Send>(seeds: &[u64], f: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    let f = &f;
    std::thread::scope(|s| {
        let handles: Vec<_> = seeds.iter().map(|&seed| s.spawn(move || f(seed))).collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    })
}

fn fmt(x: f64) -> String {
    format!("{x:.17e}")
}

fn kernel_table(ctx: &mut Ctx) -> Result<Value> {
    let density = ctx.cfg.density()?;
    let d = density.dim();
    let us = ctx.cfg.displacements.points(d);
    let reach = us.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    let base = KernelEvaluator::new(&KernelSpec::base(density.clone())?, reach)?;
    let base_vals = us.iter().map(|u| base.eval(u)).collect::<Result<Vec<_>>>()?;

    let mut kernel_csv = String::from("variant,r");
    (1..=d).for_each(|j| write!(kernel_csv, ",u{j}").unwrap());
    kernel_csv.push_str(",re,im,tent,product\n");
    let mut tent_csv = String::from("r");
    (1..=d).for_each(|j| write!(tent_csv, ",t{j}").unwrap());
    tent_csv.push_str(",w_hat\n");
    let row = |out: &mut String, lead: &str, u: &[f64], rest: &[f64]| {
        out.push_str(lead);
        u.iter().chain(rest).for_each(|x| write!(out, ",{}", fmt(*x)).unwrap());
        out.push('\n');
    };

    let mut summary = Vec::new();
    let base_spec = KernelSpec::base(density.clone())?;
    if base_spec.closed_form(&us[0]).is_some() {
        let mut worst: f64 = 0.0;
        for u in &us {
            let exact = base_spec.closed_form(u).unwrap_or_default();
            worst = worst.max((base.quadrature(u)? - exact).norm());
        }
        let tol = ctx.tol;
        ctx.check("closed-form", worst, tol, worst <= tol);
    }
    for (u, k) in us.iter().zip(&base_vals) {
        row(&mut kernel_csv, &format!("base,{}", fmt(0.0)), u, &[k.re, k.im, 1.0, k.re]);
    }
    for &r in &ctx.cfg.radii.clone() {
        let w = TentWindow::new(d, r)?;
        let ev = KernelEvaluator::new(&KernelSpec::new(density.clone(), Variant::Smoothed(r))?, reach)?;
        let mut beyond: f64 = 0.0;
        for (u, k) in us.iter().zip(&base_vals) {
            let kr = ev.eval(u)?;
            let tent = w.eval(u);
            row(&mut kernel_csv, &format!("smoothed,{}", fmt(r)), u, &[kr.re, kr.im, tent, k.re * tent]);
            row(&mut tent_csv, &fmt(r), u, &[w.fourier(u)]);
            if u.iter().any(|x| x.abs() >= r) {
                beyond = beyond.max(kr.norm());
            }
        }
        let identity = smoothed_kernel_identity_check(&density, r, &us)?;
        let tol = ctx.tol;
        ctx.check(format!("band-identity r={r}"), identity, tol, identity <= tol);
        ctx.check(format!("band-limit r={r}"), beyond, tol, beyond <= tol);
        summary.push(json!({ "r": r, "identity_max_deviation": identity, "max_beyond_radius": beyond }));
    }
    ctx.write_text("kernel-table.csv", &kernel_csv)?;
    ctx.write_text("tent-transform.csv", &tent_csv)?;
    Ok(json!({ "points": us.len(), "radii": summary }))
}

fn section_summary(k: &DiscreteKernel) -> Value {
    let ev = k.eigenvalues();
    json!({ "sites": k.len(), "min_eigenvalue": ev.first(), "max_eigenvalue": ev.last(), "trace": k.matrix().trace().re })
}

fn tree_kernel(ctx: &mut Ctx) -> Result<Value> {
    let base = ctx.cfg.tree_section(Variant::Base)?;
    ctx.write_csv("tree-kernel-base.csv", |b| base.write_csv(b))?;
    let mut rows = vec![json!({ "variant": "base", "section": section_summary(&base) })];
    for &r in &ctx.cfg.radii.clone() {
        let s = ctx.cfg.tree_section(Variant::Smoothed(r))?;
        let lo = ctx.cfg.tree_section(Variant::Lower(r))?;
        let up = ctx.cfg.tree_section(Variant::Upper(r))?;
        for (name, k) in [("smoothed", &s), ("lower", &lo), ("upper", &up)] {
            ctx.write_csv(&format!("tree-kernel-{name}-r{r}.csv"), |b| k.write_csv(b))?;
            rows.push(json!({ "variant": name, "r": r, "section": section_summary(k) }));
        }
        let tol = ctx.tol;
        for (name, a, b) in [("upper-base", &base, &up), ("base-lower", &lo, &base), ("upper-smoothed", &s, &up), ("smoothed-lower", &lo, &s)] {
            let rep = loewner_leq(a, b, tol)?;
            ctx.check(format!("loewner {name} r={r}"), rep.min_eigenvalue, -tol, rep.holds);
        }
    }
    Ok(json!({ "sites": base.sites(), "sections": rows }))
}

fn sample(ctx: &mut Ctx, seed: Option<u64>) -> Result<Value> {
    let seeds = ctx.seeds(seed);
    match ctx.cfg.kernel.clone() {
        Some(source) => sample_discrete(ctx, &source, &seeds),
        None => sample_continuum(ctx, &seeds),
    }
}

fn sample_discrete(ctx: &mut Ctx, source: &KernelSource, seeds: &[u64]) -> Result<Value> {
    let k = ctx.cfg.build_kernel(source, ctx.base_dir)?;
    let sampler = Sampler::new(&k)?;
    let draws = ctx.cfg.draws;
    let batches = per_seed(seeds, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..draws).map(|_| sampler.sample(&mut rng)).collect::<Result<Vec<_>>>()
    })?;
    let exact = if k.len() <= MAX_EXACT_SITES { Some(exact_distribution(&k)?) } else { None };

    // mean count target: trace, or ‖ĥ‖₁ minus the reported deficit per cell for tree sections
    let (target, deficit) = match source {
        KernelSource::Tree(v) => {
            let w = ctx.cfg.window()?;
            let tk = TreeKernel::new(&KernelSpec::new(ctx.cfg.density()?, *v)?, &CellBasis::new(w.dim(), w.levels()))?;
            let deficit = tk.trace_deficit(w.levels())?;
            (w.cell_count() as f64 * (tk.l1_norm() - deficit), Some(deficit))
        }
        _ => (k.matrix().trace().re, None),
    };

    let mut per = Vec::new();
    for (&seed, batch) in seeds.iter().zip(&batches) {
        let counts: Vec<f64> = batch.iter().map(|s| s.len() as f64).collect();
        let m = MomentSummary::from_samples(&counts);
        ctx.check(format!("mean-count seed={seed}"), m.mean.z_score(target).abs(), SIGMA, m.mean.within(target, SIGMA));
        let mut row = json!({ "seed": seed, "mean_count": m.mean, "variance": m.variance });
        if let Some(ex) = &exact {
            let mut hist = vec![0u64; 1 << k.len()];
            for s in batch {
                hist[s.iter().fold(0usize, |m, &i| m | 1 << i)] += 1;
            }
            let tv = crate::discrete::tv_distance(&hist, ex);
            let tol = ctx.tol;
            ctx.check(format!("tv seed={seed}"), tv, tol, tv <= tol);
            row["tv"] = json!(tv);
            ctx.write_csv(&format!("sample-histogram-seed{seed}.csv"), |b| {
                let mut w = csv::Writer::from_writer(b);
                w.write_record(["mask", "count", "empirical", "exact"])?;
                for (mask, &c) in hist.iter().enumerate() {
                    w.write_record(&[mask.to_string(), c.to_string(), fmt(c as f64 / draws as f64), fmt(ex.prob(mask))])?;
                }
                w.flush()?;
                Ok(())
            })?;
        }
        // first line: provenance; then one draw per line
        let mut nd = serde_json::to_vec(&json!({ "tool": TOOL_NAME, "version": TOOL_VERSION, "config_sha256": ctx.provenance.config_sha256, "seed": seed }))?;
        nd.push(b'\n');
        crate::discrete::write_samples_ndjson(&mut nd, &k, batch)?;
        ctx.write_file(&format!("sample-seed{seed}.ndjson"), &nd)?;
        per.push(row);
    }
    Ok(json!({ "mode": "discrete", "sites": k.sites(), "draws": draws, "target_mean_count": target, "trace_deficit": deficit, "seeds": per }))
}

fn sample_continuum(ctx: &mut Ctx, seeds: &[u64]) -> Result<Value> {
    let region = ctx.cfg.region()?.clone();
    let mesh = ctx.cfg.mesh.ok_or_else(|| Error::InvalidParameter("continuum sampling needs \"mesh\" (or give a discrete \"kernel\")".into()))?;
    let spec = KernelSpec::new(ctx.cfg.density()?, ctx.cfg.variant.unwrap_or(Variant::Base))?;
    let sampler = ContinuumSampler::new(&spec, &region, mesh)?;
    let d = region.dim();
    let intensity = KernelEvaluator::new(&spec, 0.0)?.eval(&vec![0.0; d])?.re;
    let target = intensity * region.volume();
    let offset = match &ctx.cfg.two_point {
        Some(u) => {
            let off: Vec<i64> = u.iter().map(|x| (x / mesh).round() as i64).collect();
            if u.iter().zip(&off).any(|(x, o)| (x / mesh - *o as f64).abs() > 1e-9) {
                return Err(Error::InvalidParameter("two-point displacement must be a multiple of the mesh".into()));
            }
            Some((u.clone(), off))
        }
        None => None,
    };
    let draws = ctx.cfg.draws;
    let batches = per_seed(seeds, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let cells = (0..draws).map(|_| sampler.sample_cells(&mut rng)).collect::<Result<Vec<_>>>()?;
        let configs: Vec<_> = cells.iter().map(|c| sampler.place(c, &mut rng)).collect();
        Ok((cells, configs))
    })?;
    let mut per = Vec::new();
    for (&seed, (cells, configs)) in seeds.iter().zip(&batches) {
        let counts: Vec<f64> = configs.iter().map(|c| c.len() as f64).collect();
        let m = MomentSummary::from_samples(&counts);
        let disp = MomentSummary::dispersion(&counts);
        ctx.check(format!("mean-count seed={seed}"), m.mean.z_score(target).abs(), SIGMA, m.mean.within(target, SIGMA));
        let margin = disp.value + SIGMA * disp.std_error;
        ctx.check(format!("variance-below-mean seed={seed}"), margin, 0.0, margin < 0.0);
        let mut row = json!({ "seed": seed, "mean_count": m.mean, "variance": m.variance, "variance_minus_mean": disp });
        if let Some((u, off)) = &offset {
            let k0 = KernelEvaluator::new(&spec, u.iter().fold(0.0f64, |a, x| a.max(x.abs())))?;
            let (a, b) = (k0.eval(&vec![0.0; d])?, k0.eval(u)?);
            let exact = (a * a - b * b.conj()).re;
            let est = sampler.two_point_estimate(cells, off)?;
            ctx.check(format!("two-point seed={seed}"), est.z_score(exact).abs(), SIGMA, est.within(exact, SIGMA));
            row["two_point"] = json!({ "displacement": u, "estimate": est, "exact": exact });
        }
        let mut text = String::from("draw");
        (1..=d).for_each(|j| write!(text, ",x{j}").unwrap());
        text.push('\n');
        for (i, c) in configs.iter().enumerate() {
            for p in &c.points {
                write!(text, "{i}").unwrap();
                p.iter().for_each(|x| write!(text, ",{}", fmt(*x)).unwrap());
                text.push('\n');
            }
        }
        ctx.write_text(&format!("continuum-seed{seed}.csv"), &text)?;
        per.push(row);
    }
    Ok(json!({ "mode": "continuum", "cells": sampler.cell_count(), "mesh": mesh, "draws": draws, "target_mean_count": target, "seeds": per }))
}

fn domination_row(ctx: &mut Ctx, label: &str, r: &DominationReport) -> Value {
    let tol = ctx.tol;
    ctx.check(format!("dominated {label}"), r.certificate.flow, 1.0, r.dominated());
    ctx.check(format!("coupling-marginals {label}"), r.check.marginal_defect, tol, r.check.verifies(tol));
    json!({ "label": label, "report": r })
}

fn dominate(ctx: &mut Ctx) -> Result<Value> {
    let mut rows = Vec::new();
    let mut csv = String::from("label,loewner_min_eigenvalue,verdict,flow,marginal_defect,worst_inclusion_excess\n");
    let mut jobs: Vec<(String, DiscreteKernel, DiscreteKernel)> = Vec::new();
    if let Some(pair) = ctx.cfg.pair.clone() {
        jobs.push(("pair".into(), ctx.cfg.build_kernel(&pair.lower, ctx.base_dir)?, ctx.cfg.build_kernel(&pair.upper, ctx.base_dir)?));
    } else {
        for &r in &ctx.cfg.radii.clone() {
            jobs.push((format!("r={r}"), ctx.cfg.tree_section(Variant::Lower(r))?, ctx.cfg.tree_section(Variant::Upper(r))?));
        }
    }
    for (label, lo, up) in jobs {
        let rep = dpp_domination_suite(&lo, &up)?;
        let verdict = if rep.dominated() { "dominated" } else { "not-dominated" };
        writeln!(
            csv,
            "{label},{},{verdict},{},{},{}",
            fmt(rep.loewner.min_eigenvalue),
            fmt(rep.certificate.flow),
            fmt(rep.check.marginal_defect),
            fmt(rep.worst_inclusion_excess)
        )
        .unwrap();
        rows.push(domination_row(ctx, &label, &rep));
    }
    ctx.write_text("dominate.csv", &csv)?;
    Ok(json!({ "comparisons": rows }))
}

fn dbar(ctx: &mut Ctx) -> Result<Value> {
    let density = ctx.cfg.density()?;
    let d = density.dim();
    let n = ctx.cfg.depth;
    let levels = n.max(1);
    let window = TreeWindow::new(vec![0; d], vec![0; d], levels)?;
    let basis = CellBasis::new(d, levels);
    let mut reports: Vec<(f64, DbarBoundReport)> = Vec::new();
    for &r in &ctx.cfg.radii {
        let lo = TreeKernel::new(&KernelSpec::new(density.clone(), Variant::Lower(r))?, &basis)?;
        let up = TreeKernel::new(&KernelSpec::new(density.clone(), Variant::Upper(r))?, &basis)?;
        let rep = dbar_upper_bound(&lo.section(&window.sites())?, &up.section(&window.sites())?, n, up.l1_norm())?;
        reports.push((r, rep));
    }
    let mut csv = String::from("r");
    (1..n).for_each(|l| write!(csv, ",gap{l}").unwrap());
    csv.push_str(",tail,total\n");
    for (r, rep) in &reports {
        write!(csv, "{}", fmt(*r)).unwrap();
        rep.gaps.iter().chain([&rep.tail, &rep.total]).for_each(|x| write!(csv, ",{}", fmt(*x)).unwrap());
        csv.push('\n');
    }
    let mut sorted = reports.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let tol = ctx.tol;
    for w in sorted.windows(2) {
        let rise = w[1].1.total - w[0].1.total;
        ctx.check(format!("nonincreasing r={}->{}", w[0].0, w[1].0), rise, tol, rise <= tol);
    }
    ctx.write_text("dbar.csv", &csv)?;
    let rows: Vec<Value> = reports.iter().map(|(r, rep)| json!({ "r": r, "bound": rep })).collect();
    Ok(json!({ "depth": n, "rows": rows }))
}

/// Separation from which an `r`-dependent field factorizes: some coordinate
/// of the cell offset must reach `⌈r⌉ + 1`, which an `ℓ¹` separation of
/// `d·⌈r⌉ + 1` guarantees.
fn independence_separation(r: f64, dim: usize) -> u64 {
    dim as u64 * r.ceil() as u64 + 1
}

fn depend(ctx: &mut Ctx) -> Result<Value> {
    let d = ctx.cfg.density()?.dim();
    let max_sep = ctx.cfg.max_separation;
    let mut csv = String::from("variant,r,separation,max_defect,pairs\n");
    let mut out = Vec::new();
    let push = |csv: &mut String, v: &str, r: f64, rows: &[ScanRow]| {
        for row in rows {
            writeln!(csv, "{v},{},{},{},{}", fmt(r), row.separation, fmt(row.max_defect), row.pairs).unwrap();
        }
    };
    let base = dependence_radius_scan(&ctx.cfg.tree_section(Variant::Base)?, max_sep)?;
    push(&mut csv, "base", 0.0, &base);
    out.push(json!({ "variant": "base", "rows": base }));
    for &r in &ctx.cfg.radii.clone() {
        let rows = dependence_radius_scan(&ctx.cfg.tree_section(Variant::Smoothed(r))?, max_sep)?;
        push(&mut csv, "smoothed", r, &rows);
        let from = independence_separation(r, d);
        let worst = rows.iter().filter(|row| row.separation >= from).map(|row| row.max_defect).fold(0.0, f64::max);
        let tol = ctx.tol;
        ctx.check(format!("factorizes r={r} sep>={from}"), worst, tol, worst <= tol);
        out.push(json!({ "variant": "smoothed", "r": r, "independent_from": from, "rows": rows }));
    }
    ctx.write_text("depend.csv", &csv)?;
    Ok(json!({ "scans": out }))
}

fn vwb(ctx: &mut Ctx) -> Result<Value> {
    let source = ctx.cfg.kernel.clone().unwrap_or(KernelSource::Tree(Variant::Smoothed(ctx.cfg.radii.first().copied().unwrap_or(1.0))));
    let k = ctx.cfg.build_kernel(&source, ctx.base_dir)?;
    if k.len() > MAX_FIELD_SITES {
        return Err(Error::TooManySites { n: k.len(), max: MAX_FIELD_SITES });
    }
    let joint = FieldDistribution::from_subsets(&exact_distribution(&k)?)?;
    // rectangle: the sites of the largest cell; past: every other site
    let sites = k.sites();
    let last = sites.iter().map(|s| s.cell().to_vec()).max().unwrap_or_default();
    let rect: Vec<usize> = (0..sites.len()).filter(|&i| sites[i].cell() == last.as_slice()).take(MAX_VWB_SITES).collect();
    let past: Vec<usize> = (0..sites.len()).filter(|&i| sites[i].cell() != last.as_slice()).collect();
    let rows = vwb_scan(&joint, &rect, &past)?;
    let dist = |i: usize| -> u64 { sites[i].cell().iter().zip(&last).map(|(a, b)| a.abs_diff(*b)).sum() };
    let mut csv = String::from("on,pattern,separation,event_prob,cost\n");
    let mut out = Vec::new();
    let dim = sites.first().map_or(1, |s| s.cell().len());
    for row in &rows {
        let sep = row.on.iter().map(|&i| dist(i)).min().unwrap_or(0);
        let labels: Vec<String> = row.on.iter().map(|&i| sites[i].to_string()).collect();
        writeln!(csv, "\"{}\",{},{},{},{}", labels.join(" "), row.pattern, sep, fmt(row.event_prob), fmt(row.cost)).unwrap();
        out.push(json!({ "on": labels, "pattern": row.pattern, "separation": sep, "event_prob": row.event_prob, "cost": row.cost }));
    }
    // only the smoothed kernel is finitely dependent
    if let KernelSource::Tree(Variant::Smoothed(r)) = source {
        let from = independence_separation(r, dim);
        let worst = rows
            .iter()
            .filter(|row| row.on.iter().all(|&i| dist(i) >= from))
            .map(|row| row.cost)
            .fold(0.0, f64::max);
        let tol = ctx.tol;
        ctx.check(format!("distant-conditioning r={r} sep>={from}"), worst, tol, worst <= tol);
    }
    ctx.write_text("vwb.csv", &csv)?;
    let rect_sites: Vec<&SiteIndex> = rect.iter().map(|&i| &sites[i]).collect();
    Ok(json!({ "rectangle": rect_sites, "rows": out }))
}

fn poisson(ctx: &mut Ctx, seed: Option<u64>) -> Result<Value> {
    let region = ctx.cfg.region()?.clone();
    let intensity = ctx.cfg.intensity.ok_or_else(|| Error::InvalidParameter("poisson needs \"intensity\"".into()))?;
    let seeds = ctx.seeds(seed);
    let draws = ctx.cfg.draws;
    // two halves split along the first axis
    let mid = 0.5 * (region.lo()[0] + region.hi()[0]);
    let mut left_hi = region.hi().to_vec();
    left_hi[0] = mid;
    let mut right_lo = region.lo().to_vec();
    right_lo[0] = mid;
    let left = WindowBox::new(region.lo().to_vec(), left_hi)?;
    let right = WindowBox::new(right_lo, region.hi().to_vec())?;
    let batches = per_seed(&seeds, |seed| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..draws)
            .map(|_| {
                let c = sample_poisson(&region, intensity, &mut rng)?;
                Ok((c.len() as f64, c.count_in(&left) as f64, c.count_in(&right) as f64))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let target = intensity * region.volume();
    let k = ctx.tol;
    let mut csv = String::from("seed,mean,mean_se,variance,variance_se,half_covariance,half_covariance_se\n");
    let mut per = Vec::new();
    for (&seed, batch) in seeds.iter().zip(&batches) {
        let total: Vec<f64> = batch.iter().map(|t| t.0).collect();
        let (a, b): (Vec<f64>, Vec<f64>) = batch.iter().map(|t| (t.1, t.2)).unzip();
        let m = MomentSummary::from_samples(&total);
        let cov = covariance(&a, &b);
        ctx.check(format!("mean seed={seed}"), m.mean.z_score(target).abs(), k, m.mean.within(target, k));
        ctx.check(format!("variance seed={seed}"), m.variance.z_score(target).abs(), k, m.variance.within(target, k));
        ctx.check(format!("half-covariance seed={seed}"), cov.z_score(0.0).abs(), k, cov.within(0.0, k));
        writeln!(
            csv,
            "{seed},{},{},{},{},{},{}",
            fmt(m.mean.value),
            fmt(m.mean.std_error),
            fmt(m.variance.value),
            fmt(m.variance.std_error),
            fmt(cov.value),
            fmt(cov.std_error)
        )
        .unwrap();
        per.push(json!({ "seed": seed, "mean": m.mean, "variance": m.variance, "half_covariance": cov }));
    }
    ctx.write_text("poisson.csv", &csv)?;
    Ok(json!({ "expected": target, "draws": draws, "seeds": per }))
}
