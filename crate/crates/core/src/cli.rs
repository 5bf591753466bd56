//! Command-line front end.
//!
//! Exit status: 0 on success, 1 on usage errors, 2 on unreadable input,
//! 3 on violated preconditions.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::beta::{beta_p, dyadic_betas, BetaNorm, BetaP};
use crate::diffusion::{diffuse_curve, parametric_scale_stack, ParamComponents};
use crate::error::{Error, Result};
use crate::geometry::{as_measure, recommended_window, MeasureMode, QuadratureMeasure};
use crate::io;
use crate::kernel::{KernelParams, DEFAULT_EPS_TRUNC};
use crate::scalespace::{
    check_dilation_consistency, classify_scales, nontangential_stack, plain_scales, DilationKind, LocalScaleSet, ScaleGrid, ScaleStack,
};
use crate::signal::{omega_sets, scale_transform_field_with, Boundary, SampledField};
use crate::surface_scales::{derivative_bound_probe, gamma_sets, SurfaceScaleRun};
use crate::synth::{generate, Fixture, FixtureSpec};

/// Grid base used when neither config nor flags give one.
pub const CLI_DEFAULT_BASE: f64 = 1.090_507_732_665_257_7; // 2^(1/8)
const DEFAULT_NMAX: usize = 8;

/// Numeric run parameters, read from JSON and overridden by flags.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub a: Option<f64>,
    pub tau_min: Option<f64>,
    pub tau_max: Option<f64>,
    pub tau_steps: Option<usize>,
    pub eps_trunc: Option<f64>,
    pub beta: Option<f64>,
    pub delta: Option<f64>,
    pub nmax: Option<usize>,
    pub measure_mode: Option<MeasureMode>,
    pub boundary: Option<Boundary>,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| Error::format(format!("{}: {e}", path.display())))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: RunConfig) -> Self {
        Self {
            a: over.a.or(self.a),
            tau_min: over.tau_min.or(self.tau_min),
            tau_max: over.tau_max.or(self.tau_max),
            tau_steps: over.tau_steps.or(self.tau_steps),
            eps_trunc: over.eps_trunc.or(self.eps_trunc),
            beta: over.beta.or(self.beta),
            delta: over.delta.or(self.delta),
            nmax: over.nmax.or(self.nmax),
            measure_mode: over.measure_mode.or(self.measure_mode),
            boundary: over.boundary.or(self.boundary),
            output_dir: over.output_dir.or(self.output_dir),
        }
    }

    pub fn base(&self) -> f64 {
        self.a.unwrap_or(CLI_DEFAULT_BASE)
    }

    pub fn eps(&self) -> f64 {
        self.eps_trunc.unwrap_or(DEFAULT_EPS_TRUNC)
    }

    pub fn delta(&self) -> f64 {
        self.delta.unwrap_or(0.0)
    }

    pub fn nmax(&self) -> usize {
        self.nmax.unwrap_or(DEFAULT_NMAX)
    }

    pub fn validate(&self) -> Result<()> {
        KernelParams::new(1, self.base(), self.eps())?;
        if !(self.delta() >= 0.0) {
            return Err(Error::contract("delta must be >= 0"));
        }
        if let Some(b) = self.beta {
            if !(b >= 0.0) {
                return Err(Error::contract("beta must be >= 0"));
            }
        }
        if self.nmax() < 1 {
            return Err(Error::contract("nmax must be >= 1"));
        }
        Ok(())
    }

    /// Grid from the configured `τ` range, falling back to `window` (in `t`)
    /// for missing ends. Default spacing is one unit of `τ`.
    pub fn grid(&self, window: (f64, f64)) -> Result<ScaleGrid> {
        let a = self.base();
        let tau_min = self.tau_min.unwrap_or(window.0.ln() / a.ln());
        let tau_max = self.tau_max.unwrap_or(window.1.ln() / a.ln());
        let steps = match self.tau_steps {
            Some(s) => s,
            None => (((tau_max - tau_min).round() as i64) + 1).max(3) as usize,
        };
        ScaleGrid::new(a, tau_min, tau_max, steps)
    }

    pub fn out_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}

#[derive(Debug, Parser)]
#[command(name = "locscale", version, about = "Local scales of sampled functions, curves and surfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args, Default)]
pub struct Common {
    /// JSON run configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, short = 'o')]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tau_max: Option<f64>,
    #[arg(long)]
    pub tau_steps: Option<usize>,
    #[arg(long)]
    pub eps_trunc: Option<f64>,
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub nmax: Option<usize>,
    /// surface | hausdorff | explicit
    #[arg(long)]
    pub measure_mode: Option<String>,
    /// periodic | zero_pad | clamp
    #[arg(long)]
    pub boundary: Option<String>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let file = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let flags = RunConfig {
            a: self.a,
            tau_min: self.tau_min,
            tau_max: self.tau_max,
            tau_steps: self.tau_steps,
            eps_trunc: self.eps_trunc,
            beta: self.beta,
            delta: self.delta,
            nmax: self.nmax,
            measure_mode: self.measure_mode.as_deref().map(str::parse).transpose()?,
            boundary: self.boundary.as_deref().map(str::parse).transpose()?,
            output_dir: self.out.clone(),
        };
        let cfg = file.overlay(flags);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputKind {
    /// Sampled function (`x,value` CSV or PGM).
    Fn,
    /// Sampled curve or surface (`r..,x..` CSV with sidecar).
    Curve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BetaMode {
    /// `β_p(x,t)` over balls centred at samples.
    Ball,
    /// Dyadic `β(Q)` table and its sum.
    Dyadic,
    /// Only the sum `Σ β(Q)² l(Q)`.
    Tsp,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Scale transform of a sampled function: local scales and Ω_{δ,N}.
    ScalesFn {
        #[arg(long)]
        input: PathBuf,
        /// Pixel spacing for PGM input.
        #[arg(long)]
        h: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Scale transform of a sampled curve or surface: local scales and Γ_{δ,N}.
    ScalesCurve {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Local scales of the nontangential maximal transform S*.
    Nontangential {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "fn")]
        kind: InputKind,
        #[arg(long)]
        h: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Flatness numbers of a point set or curve.
    Beta {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "dyadic")]
        mode: BetaMode,
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        level_min: i32,
        #[arg(long, default_value_t = 6, allow_hyphen_values = true)]
        level_max: i32,
        /// Ball radii, comma separated.
        #[arg(long, value_delimiter = ',')]
        t: Vec<f64>,
        /// 1 | 2 | inf
        #[arg(long, default_value = "2")]
        p: String,
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// mass | radius
        #[arg(long, default_value = "mass")]
        norm: String,
        #[command(flatten)]
        common: Common,
    },
    /// Heat diffusion of a parametrized curve (parameter-space scales).
    Diffuse {
        #[arg(long)]
        input: PathBuf,
        /// Diffusion time in parameter units.
        #[arg(long)]
        t_param: Option<f64>,
        /// Also compute the parametric scale stack and its local scales.
        #[arg(long)]
        scales: bool,
        #[command(flatten)]
        common: Common,
    },
    /// sup t^k |∂_t^k SΓ| over evaluation points and scales.
    ProbeBounds {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', default_values_t = [0usize, 1, 2])]
        k: Vec<usize>,
        #[arg(long, value_delimiter = ',', required = true)]
        t: Vec<f64>,
        #[command(flatten)]
        common: Common,
    },
    /// Write a synthetic fixture.
    Synth {
        /// Fixture spec as a JSON file or inline JSON.
        #[arg(long)]
        spec: String,
        /// Destination data file; a `.json` sidecar is written next to it.
        #[arg(long)]
        output: PathBuf,
    },
    /// Compare local scales of an object and its dilation.
    CheckConsistency {
        #[arg(long)]
        base: PathBuf,
        #[arg(long)]
        dilated: PathBuf,
        /// Dilation factor δ.
        #[arg(long)]
        factor: f64,
        #[arg(long, value_enum, default_value = "curve")]
        kind: InputKind,
        /// Sample index in the base object.
        #[arg(long, default_value_t = 0)]
        point: usize,
        /// Sample index in the dilated object (defaults to `point`).
        #[arg(long)]
        point_dilated: Option<usize>,
        #[arg(long)]
        h: Option<f64>,
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `args` (including the program name) and runs; returns the exit
/// status.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("locscale: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads() {
    if let Ok(v) = std::env::var("LOCSCALE_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            // a second initialisation in the same process is harmless
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

pub fn run(cmd: Command) -> Result<()> {
    match cmd {
        Command::ScalesFn { input, h, common } => scales_fn(&input, h, &common.resolve()?),
        Command::ScalesCurve { input, common } => scales_curve(&input, &common.resolve()?),
        Command::Nontangential { input, kind, h, common } => nontangential(&input, kind, h, &common.resolve()?),
        Command::Beta {
            input,
            mode,
            level_min,
            level_max,
            t,
            p,
            d,
            norm,
            common,
        } => beta_cmd(
            &input,
            mode,
            level_min,
            level_max,
            &t,
            p.parse()?,
            d,
            norm.parse()?,
            &common.resolve()?,
        ),
        Command::Diffuse {
            input,
            t_param,
            scales,
            common,
        } => diffuse(&input, t_param, scales, &common.resolve()?),
        Command::ProbeBounds { input, k, t, common } => probe(&input, &k, &t, &common.resolve()?),
        Command::Synth { spec, output } => synth(&spec, &output),
        Command::CheckConsistency {
            base,
            dilated,
            factor,
            kind,
            point,
            point_dilated,
            h,
            common,
        } => consistency(
            &base,
            &dilated,
            factor,
            kind,
            point,
            point_dilated.unwrap_or(point),
            h,
            &common.resolve()?,
        ),
    }
}

fn prepare_out(cfg: &RunConfig) -> Result<PathBuf> {
    let dir = cfg.out_dir();
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn grid_json(g: &ScaleGrid) -> Value {
    json!({ "a": g.a, "tau_min": g.tau_min, "tau_max": g.tau_max, "steps": g.steps, "dtau": g.dtau(), "t_min": g.t_min(), "t_max": g.t_max() })
}

fn load_field(path: &Path, h: Option<f64>, cfg: &RunConfig) -> Result<SampledField> {
    let is_pgm = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm"));
    if is_pgm {
        let h = h.ok_or_else(|| Error::contract("PGM input needs --h"))?;
        io::read_pgm(path, h, cfg.boundary.unwrap_or(Boundary::Clamp))
    } else {
        io::read_signal_csv(path, cfg.boundary)
    }
}

fn field_stack(field: &SampledField, cfg: &RunConfig) -> Result<ScaleStack> {
    let grid = cfg.grid(field.default_t_window())?;
    scale_transform_field_with(field, &grid, 2, cfg.eps())
}

fn classify_rows(stack: &ScaleStack, cfg: &RunConfig) -> Result<(Vec<LocalScaleSet>, usize)> {
    let mut sets = Vec::new();
    let mut skipped = 0;
    for row in 0..stack.len() {
        if stack.is_truncated(row) {
            skipped += 1;
            continue;
        }
        let mut s = classify_scales(stack, row, cfg.beta.unwrap_or(0.0), cfg.delta())?;
        s.point = stack.point_ids[row];
        sets.push(s);
    }
    Ok((sets, skipped))
}

fn truncation_warning(skipped: usize) -> Option<String> {
    (skipped > 0).then(|| format!("{skipped} points excluded: kernel support reaches the edge of the sampled region"))
}

fn scales_fn(input: &Path, h: Option<f64>, cfg: &RunConfig) -> Result<()> {
    let field = load_field(input, h, cfg)?;
    let stack = field_stack(&field, cfg)?;
    let (sets, skipped) = classify_rows(&stack, cfg)?;
    let omega = omega_sets(&stack, field.cell_volume(), cfg.delta(), cfg.beta, cfg.nmax())?;
    let dir = prepare_out(cfg)?;
    io::write_scales_csv(&dir.join("scales.csv"), &sets)?;
    io::write_decay_csv(&dir.join("decay.csv"), &omega.measures)?;
    let warnings: Vec<String> = truncation_warning(skipped).into_iter().collect();
    io::write_json(
        &dir.join("summary.json"),
        &json!({
            "command": "scales-fn",
            "input": input.display().to_string(),
            "grid": grid_json(&stack.grid),
            "boundary": field.boundary(),
            "points": field.len(),
            "evaluated": sets.len(),
            "scales": sets.iter().map(|s| s.entries.len()).sum::<usize>(),
            "delta": cfg.delta(),
            "beta": cfg.beta,
            "fit": omega.fit,
            "warnings": warnings,
        }),
    )
}

struct CurveRun {
    run: SurfaceScaleRun,
    excluded: usize,
    warnings: Vec<String>,
}

fn load_measure(input: &Path, cfg: &RunConfig) -> Result<(QuadratureMeasure, Vec<String>)> {
    let surface = io::read_curve(input)?;
    let mode = cfg.measure_mode.unwrap_or(MeasureMode::Surface);
    let measure = as_measure(&surface, mode)?;
    let mut warnings = Vec::new();
    if measure.degenerate > 0 {
        warnings.push(format!("{} samples dropped: degenerate Jacobian", measure.degenerate));
    }
    Ok((measure, warnings))
}

fn curve_run(input: &Path, cfg: &RunConfig, window: Option<(f64, f64)>) -> Result<CurveRun> {
    let (measure, mut warnings) = load_measure(input, cfg)?;
    let params = KernelParams::new(measure.d, cfg.base(), cfg.eps())?;
    let (t_min, t_max, _) = recommended_window(&measure, &params);
    let grid = cfg.grid(window.unwrap_or((t_min, t_max)))?;
    let reach = params.support_radius(grid.t_max());
    let eval: Vec<usize> = (0..measure.len()).filter(|&i| measure.boundary_distance(i) >= reach).collect();
    let excluded = measure.len() - eval.len();
    if eval.is_empty() {
        return Err(Error::contract(
            "no sample keeps its kernel support inside the sampled set at t_max",
        ));
    }
    warnings.extend(truncation_warning(excluded));
    let run = SurfaceScaleRun::compute(measure, eval, grid, 2, cfg.eps())?;
    Ok(CurveRun { run, excluded, warnings })
}

fn curve_sets(run: &SurfaceScaleRun, cfg: &RunConfig) -> Result<Vec<LocalScaleSet>> {
    let (mut sets, _) = classify_rows(&run.stack, cfg)?;
    for s in &mut sets {
        s.point = run.measure.sample_ids[s.point];
    }
    Ok(sets)
}

fn scales_curve(input: &Path, cfg: &RunConfig) -> Result<()> {
    let cr = curve_run(input, cfg, None)?;
    let run = &cr.run;
    let sets = curve_sets(run, cfg)?;
    let gamma = gamma_sets(run, cfg.delta(), cfg.beta, cfg.nmax())?;
    let dir = prepare_out(cfg)?;
    io::write_scales_csv(&dir.join("scales.csv"), &sets)?;
    io::write_decay_csv(&dir.join("decay.csv"), &gamma.mu_measures)?;
    io::write_json(
        &dir.join("summary.json"),
        &json!({
            "command": "scales-curve",
            "t_units": "t_ambient",
            "input": input.display().to_string(),
            "grid": grid_json(&run.grid),
            "measure_mode": run.measure.mode,
            "d": run.measure.d,
            "n": run.measure.n,
            "points": run.measure.len(),
            "evaluated": sets.len(),
            "excluded": cr.excluded,
            "gamma_star": run.measure.gamma_star,
            "total_mass": run.measure.total_mass(),
            "scales": sets.iter().map(|s| s.entries.len()).sum::<usize>(),
            "delta": cfg.delta(),
            "beta": cfg.beta,
            "fit": gamma.fit,
            "warnings": cr.warnings,
        }),
    )
}

fn nontangential(input: &Path, kind: InputKind, h: Option<f64>, cfg: &RunConfig) -> Result<()> {
    let (stack, positions, ids, grid, mut warnings) = match kind {
        InputKind::Fn => {
            let field = load_field(input, h, cfg)?;
            let stack = field_stack(&field, cfg)?;
            let pos = (0..field.len()).map(|i| field.coords(i)).collect::<Vec<_>>();
            let grid = stack.grid;
            (stack, pos, (0..field.len()).collect::<Vec<_>>(), grid, Vec::new())
        }
        InputKind::Curve => {
            let cr = curve_run(input, cfg, None)?;
            let run = cr.run;
            let pos = run.eval_points.iter().map(|&e| run.measure.point(e).to_vec()).collect();
            let ids = run.eval_points.iter().map(|&e| run.measure.sample_ids[e]).collect();
            (run.stack, pos, ids, run.grid, cr.warnings)
        }
    };
    let star = nontangential_stack(&stack, &positions)?;
    let mut sets = Vec::new();
    let mut skipped = 0;
    for (row, &id) in ids.iter().enumerate() {
        if star.is_truncated(row) {
            skipped += 1;
            continue;
        }
        let prof = star.values.row(row);
        sets.push(plain_scales(prof, prof, &grid, id, cfg.beta.unwrap_or(0.0))?);
    }
    if kind == InputKind::Fn {
        warnings.extend(truncation_warning(skipped));
    }
    let dir = prepare_out(cfg)?;
    io::write_scales_csv(&dir.join("scales.csv"), &sets)?;
    io::write_json(
        &dir.join("summary.json"),
        &json!({
            "command": "nontangential",
            "input": input.display().to_string(),
            "grid": grid_json(&grid),
            "evaluated": sets.len(),
            "scales": sets.iter().map(|s| s.entries.len()).sum::<usize>(),
            "beta": cfg.beta,
            "warnings": warnings,
        }),
    )
}

fn planar(input: &Path) -> Result<Vec<[f64; 2]>> {
    let (n, pts, _) = io::read_points(input)?;
    if n != 2 {
        return Err(Error::contract(format!(
            "dyadic squares need points in the plane, got dimension {n}"
        )));
    }
    Ok(pts.chunks(2).map(|c| [c[0], c[1]]).collect())
}

#[allow(clippy::too_many_arguments)]
fn beta_cmd(
    input: &Path,
    mode: BetaMode,
    level_min: i32,
    level_max: i32,
    ts: &[f64],
    p: BetaP,
    d: usize,
    norm: BetaNorm,
    cfg: &RunConfig,
) -> Result<()> {
    let dir = prepare_out(cfg)?;
    let summary = match mode {
        BetaMode::Dyadic | BetaMode::Tsp => {
            let pts = planar(input)?;
            let table = dyadic_betas(&pts, level_min, level_max)?;
            let sum = table.iter().fold(0.0, |acc, (q, b)| acc + b * b * q.side());
            if mode == BetaMode::Dyadic {
                let rows: Vec<Vec<String>> = table
                    .iter()
                    .map(|(q, b)| vec![q.level.to_string(), q.j.to_string(), q.k.to_string(), io::fmt_f64(*b)])
                    .collect();
                io::write_rows(&dir.join("beta.csv"), &["level", "j", "k", "beta"], &rows)?;
            }
            json!({
                "command": "beta",
                "mode": if mode == BetaMode::Dyadic { "dyadic" } else { "tsp" },
                "input": input.display().to_string(),
                "level_min": level_min,
                "level_max": level_max,
                "squares": table.len(),
                "tsp_sum": sum,
            })
        }
        BetaMode::Ball => {
            if ts.is_empty() {
                return Err(Error::contract("ball mode needs --t"));
            }
            let measure = match io::read_sidecar(input)? {
                Some(s) if s.d.is_some() => load_measure(input, cfg)?.0,
                _ => {
                    let (n, pts, w) = io::read_points(input)?;
                    let m = pts.len() / n;
                    QuadratureMeasure::new(d, n, pts, w.unwrap_or_else(|| vec![1.0; m]))?
                }
            };
            let mut rows = Vec::new();
            let mut undefined = 0;
            for i in 0..measure.len() {
                for &t in ts {
                    let b = beta_p(&measure, measure.point(i), t, p, d, norm)?;
                    let cell = match b {
                        Some(f) => io::fmt_f64(f.beta),
                        None => {
                            undefined += 1;
                            String::new()
                        }
                    };
                    rows.push(vec![measure.sample_ids[i].to_string(), io::fmt_f64(t), p.to_string(), cell]);
                }
            }
            io::write_rows(&dir.join("beta.csv"), &["x", "t", "p", "beta"], &rows)?;
            let warnings: Vec<String> = (undefined > 0)
                .then(|| format!("{undefined} balls hold fewer than d+1 points; beta left empty"))
                .into_iter()
                .collect();
            json!({
                "command": "beta",
                "mode": "ball",
                "input": input.display().to_string(),
                "p": p.to_string(),
                "d": d,
                "normalization": norm,
                "values": rows.len(),
                "warnings": warnings,
            })
        }
    };
    io::write_json(&dir.join("summary.json"), &summary)
}

fn diffuse(input: &Path, t_param: Option<f64>, scales: bool, cfg: &RunConfig) -> Result<()> {
    if t_param.is_none() && !scales {
        return Err(Error::contract("diffuse needs --t-param and/or --scales"));
    }
    let surface = io::read_curve(input)?;
    let comps = ParamComponents::from_surface(&surface)?;
    let dir = prepare_out(cfg)?;
    let mut summary = BTreeMap::new();
    summary.insert("command".to_string(), json!("diffuse"));
    summary.insert("t_units".to_string(), json!("t_param"));
    summary.insert("input".to_string(), json!(input.display().to_string()));
    if let Some(t) = t_param {
        let g = diffuse_curve(&comps, t)?;
        io::write_components(&dir.join("gamma_t.csv"), &g)?;
        summary.insert("t_param".to_string(), json!(t));
    }
    if scales {
        let h = comps.h();
        let window = ((4.0 * h).powi(2), if comps.closed { 1.0 } else { 1.0 / 16.0 });
        let grid = cfg.grid(window)?;
        let stack = parametric_scale_stack(&comps, &grid)?;
        let (sets, skipped) = classify_rows(&stack, cfg)?;
        io::write_scales_csv(&dir.join("scales.csv"), &sets)?;
        summary.insert("grid_t_param".to_string(), grid_json(&grid));
        summary.insert("scales".to_string(), json!(sets.iter().map(|s| s.entries.len()).sum::<usize>()));
        let warnings: Vec<String> = truncation_warning(skipped).into_iter().collect();
        summary.insert("warnings".to_string(), json!(warnings));
    }
    io::write_json(&dir.join("summary.json"), &summary)
}

fn probe(input: &Path, ks: &[usize], ts: &[f64], cfg: &RunConfig) -> Result<()> {
    let (measure, mut warnings) = load_measure(input, cfg)?;
    let params = KernelParams::new(measure.d, cfg.base(), cfg.eps())?;
    let t_top = ts.iter().cloned().fold(0.0, f64::max);
    let reach = params.support_radius(t_top);
    let eval: Vec<usize> = (0..measure.len()).filter(|&i| measure.boundary_distance(i) >= reach).collect();
    if eval.is_empty() {
        return Err(Error::contract(
            "no sample keeps its kernel support inside the sampled set at the largest t",
        ));
    }
    warnings.extend(truncation_warning(measure.len() - eval.len()));
    let mut rows = Vec::new();
    let mut sups = BTreeMap::new();
    for &k in ks {
        let pr = derivative_bound_probe(&measure, &eval, k, ts, cfg.eps())?;
        for (t, v) in &pr.per_t {
            rows.push(vec![k.to_string(), io::fmt_f64(*t), io::fmt_f64(*v)]);
        }
        sups.insert(k.to_string(), pr.sup_value);
    }
    let dir = prepare_out(cfg)?;
    io::write_rows(&dir.join("probe.csv"), &["k", "t", "sup"], &rows)?;
    io::write_json(
        &dir.join("summary.json"),
        &json!({
            "command": "probe-bounds",
            "input": input.display().to_string(),
            "measure_mode": measure.mode,
            "gamma_star": measure.gamma_star,
            "sup": sups,
            "evaluated": eval.len(),
            "warnings": warnings,
        }),
    )
}

fn synth(spec: &str, output: &Path) -> Result<()> {
    let text = if spec.trim_start().starts_with('{') {
        spec.to_string()
    } else {
        std::fs::read_to_string(spec)?
    };
    let spec: FixtureSpec = serde_json::from_str(&text).map_err(|e| Error::format(format!("fixture spec: {e}")))?;
    let g = generate(&spec)?;
    if let Some(parent) = output.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    match &g.fixture {
        Fixture::Field(f) => io::write_signal_csv(output, f, &g.truth),
        Fixture::Surface(s) => io::write_curve(output, s, &g.truth),
        Fixture::Points(p) => io::write_points(output, p, &g.truth),
    }
}

#[allow(clippy::too_many_arguments)]
fn consistency(
    base: &Path,
    dilated: &Path,
    factor: f64,
    kind: InputKind,
    point: usize,
    point_dilated: usize,
    h: Option<f64>,
    cfg: &RunConfig,
) -> Result<()> {
    if !(factor > 0.0) {
        return Err(Error::contract("dilation factor must be positive"));
    }
    let pick = |sets: Vec<LocalScaleSet>, id: usize, which: &str| -> Result<LocalScaleSet> {
        sets.into_iter()
            .find(|s| s.point == id)
            .ok_or_else(|| Error::contract(format!("{which} point {id} is not an untruncated sample")))
    };
    let (b, d, grid, dilation) = match kind {
        InputKind::Fn => {
            let fb = load_field(base, h, cfg)?;
            let fd = load_field(dilated, h, cfg)?;
            let (wb, wd) = (fb.default_t_window(), fd.default_t_window());
            let grid = cfg.grid((wb.0.min(wd.0), wb.1.max(wd.1)))?;
            let sb = scale_transform_field_with(&fb, &grid, 2, cfg.eps())?;
            let sd = scale_transform_field_with(&fd, &grid, 2, cfg.eps())?;
            let (setb, _) = classify_rows(&sb, cfg)?;
            let (setd, _) = classify_rows(&sd, cfg)?;
            (
                pick(setb, point, "base")?,
                pick(setd, point_dilated, "dilated")?,
                grid,
                DilationKind::Function,
            )
        }
        InputKind::Curve => {
            let window = |p: &Path| -> Result<(f64, f64)> {
                let (m, _) = load_measure(p, cfg)?;
                let params = KernelParams::new(m.d, cfg.base(), cfg.eps())?;
                let (a, b, _) = recommended_window(&m, &params);
                Ok((a, b))
            };
            let (wb, wd) = (window(base)?, window(dilated)?);
            let w = (wb.0.min(wd.0), wb.1.max(wd.1));
            let rb = curve_run(base, cfg, Some(w))?;
            let rd = curve_run(dilated, cfg, Some(w))?;
            let setb = curve_sets(&rb.run, cfg)?;
            let setd = curve_sets(&rd.run, cfg)?;
            (
                pick(setb, point, "base")?,
                pick(setd, point_dilated, "dilated")?,
                rb.run.grid,
                DilationKind::Surface,
            )
        }
    };
    let report = check_dilation_consistency(&b, &d, factor, dilation, &grid)?;
    let dir = prepare_out(cfg)?;
    io::write_json(
        &dir.join("summary.json"),
        &json!({
            "command": "check-consistency",
            "base": base.display().to_string(),
            "dilated": dilated.display().to_string(),
            "factor": factor,
            "dilation_kind": dilation,
            "grid": grid_json(&grid),
            "base_taus": b.entries.iter().map(|e| e.tau).collect::<Vec<_>>(),
            "dilated_taus": d.entries.iter().map(|e| e.tau).collect::<Vec<_>>(),
            "count_base": report.count_base,
            "count_dilated": report.count_dilated,
            "shift_measured": report.shift_measured,
            "shift_expected": report.shift_expected,
            "dtau": report.dtau,
            "pass": report.pass,
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_base_is_eighth_octave() {
        assert!((CLI_DEFAULT_BASE - 2f64.powf(0.125)).abs() < 1e-15);
    }

    #[test]
    fn flags_override_config() {
        let file = RunConfig {
            a: Some(2.0),
            delta: Some(0.1),
            ..RunConfig::default()
        };
        let flags = RunConfig {
            delta: Some(0.5),
            ..RunConfig::default()
        };
        let c = file.overlay(flags);
        assert_eq!(c.a, Some(2.0));
        assert_eq!(c.delta, Some(0.5));
    }

    #[test]
    fn config_rejects_unknown_and_invalid() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
        let c: RunConfig = serde_json::from_str(r#"{"a": 0.5}"#).unwrap();
        assert!(matches!(c.validate(), Err(Error::Contract(_))));
        let c: RunConfig = serde_json::from_str(r#"{"measure_mode": "hausdorff_param", "boundary": "periodic"}"#).unwrap();
        assert_eq!(c.measure_mode, Some(MeasureMode::HausdorffParam));
    }

    #[test]
    fn grid_defaults() {
        let c = RunConfig {
            a: Some(2.0),
            ..RunConfig::default()
        };
        let g = c.grid((2f64.powi(-12), 4.0)).unwrap();
        assert_eq!(g.steps, 15);
        assert!((g.tau_min + 12.0).abs() < 1e-12);
    }
}
