use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::arh::{
    changepoint_statistic, changepoint_test, cross_validate, estimate_rho_with, predict, predictor_clt_experiment, residuals,
    CltOptions, EstimateOptions, DEFAULT_ORIGIN,
};
use crate::error::{Error, Result};
use crate::harness::config::{load_config, FileConfig};
use crate::harness::data::ingest_monthly_csv;
use crate::harness::elnino::{elnino_pipeline, ElninoConfig, SmoothingKind};
use crate::harness::io::{read_operator, read_sample, write_json, write_operator, write_plot_csv, write_sample, RunManifest, SCHEMA_VERSION};
use crate::harness::mc::{mc_lln_rate, mc_mean_clt};
use crate::hilbert::{Curve, Grid, GridRef, OperatorMatrix};
use crate::moments::MomentSet;
use crate::reginv::RegScheme;
use crate::sim::{simulate_arh1, simulate_ou_segments, simulate_wong_segments, ArhSpec, NoiseSpec, SegmentedProcess, DEFAULT_BURNIN};

const DEFAULT_GRID: usize = 101;
const DATA_ENV: &str = "ARHLAB_DATA_DIR";
const ELNINO_FILE: &str = "elnino_1950_1986.csv";

#[derive(Parser, Debug)]
#[command(name = "arhlab", version, about = "Simulation, estimation and forecasting for autoregressive Hilbertian processes")]
struct Cli {
    /// Random seed (required by stochastic commands)
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Number of grid points
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Output directory (default: $ARHLAB_DATA_DIR, else the current directory)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// TOML file with default option values
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate a functional process and write sample, innovations and truth
    Simulate(SimulateArgs),
    /// Empirical mean, covariance and lag covariances of a sample
    Moments(MomentsArgs),
    /// Fit rho_hat to a sample
    Estimate(EstimateArgs),
    /// One-step prediction from a fitted model
    Predict(PredictArgs),
    /// Rolling-origin cross-validation over regularization schemes
    Cv(CvArgs),
    /// CUSUM change-point test on estimated residuals
    Changepoint(ChangepointArgs),
    /// El Nino 1986 forecast from monthly data
    Elnino(ElninoArgs),
    /// Monte Carlo check of the law-of-large-numbers rate
    McLln(McLlnArgs),
    /// Monte Carlo check of the mean or predictor central limit theorem
    McClt(McCltArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, Deserialize, PartialEq)]
#[serde(rename_all = "lowercase")]
enum Kind {
    Arh1,
    Ou,
    Wong,
}

#[derive(Args, Debug)]
struct ModelArgs {
    /// Operator CSV for rho
    #[arg(long)]
    rho: Option<PathBuf>,
    /// Coefficients b_i of rho = sum b_i e_i (x) e_i on the noise eigenfunctions
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    rho_diag: Option<Vec<f64>>,
    /// Noise eigenvalues (default gamma_p = p^-2, twenty terms)
    #[arg(long, value_delimiter = ',')]
    noise_eigenvalues: Option<Vec<f64>>,
    #[arg(long)]
    burnin: Option<usize>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_enum)]
    kind: Option<Kind>,
    /// Ornstein-Uhlenbeck rate
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args, Debug)]
struct MomentsArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    lags: Option<Vec<usize>>,
    /// Do not subtract the empirical mean
    #[arg(long)]
    no_center: bool,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// cutoff:K, penalized:ALPHA or tikhonov:ALPHA
    #[arg(long)]
    scheme: Option<String>,
    /// Select the scheme by cross-validation among these instead
    #[arg(long, value_delimiter = ',')]
    candidates: Option<Vec<String>>,
    #[arg(long)]
    no_center: bool,
}

#[derive(Args, Debug)]
struct PredictArgs {
    #[arg(long)]
    model: Option<PathBuf>,
    /// `last` (last curve of the fitted sample) or a sample CSV
    #[arg(long)]
    x: Option<String>,
}

#[derive(Args, Debug)]
struct CvArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long, value_delimiter = ',')]
    candidates: Option<Vec<String>>,
    #[arg(long)]
    origin: Option<f64>,
    #[arg(long)]
    no_center: bool,
}

#[derive(Args, Debug)]
struct ChangepointArgs {
    #[arg(long = "in")]
    input: Option<PathBuf>,
    #[arg(long)]
    scheme: Option<String>,
    /// Null replications for the critical value
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    level: Option<f64>,
    #[arg(long)]
    no_center: bool,
}

#[derive(Args, Debug)]
struct ElninoArgs {
    /// Monthly CSV (default: $ARHLAB_DATA_DIR/elnino_1950_1986.csv, then the bundled file)
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, value_enum)]
    smoothing: Option<SmoothingArg>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SmoothingArg {
    None,
    Spline,
}

#[derive(Args, Debug)]
struct McLlnArgs {
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
enum CltTarget {
    Mean,
    Predictor,
}

#[derive(Args, Debug)]
struct McCltArgs {
    #[arg(long, value_enum)]
    target: Option<CltTarget>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    reps: Option<usize>,
    /// Number of projection directions (mean target)
    #[arg(long)]
    dirs: Option<usize>,
    /// Replications per normality batch
    #[arg(long)]
    batch: Option<usize>,
    /// Fixed cutoff (predictor target; default from the cutoff schedule)
    #[arg(long)]
    cutoff: Option<usize>,
    #[command(flatten)]
    model: ModelArgs,
}

struct Ctx {
    seed: Option<u64>,
    grid: Option<usize>,
    out: PathBuf,
    cfg: FileConfig,
    manifest: RunManifest,
}

impl Ctx {
    fn seed(&self, command: &str) -> Result<u64> {
        self.seed.ok_or_else(|| Error::InvalidInput(format!("`{command}` is stochastic and needs --seed")))
    }

    fn grid(&self) -> Result<GridRef<f64>> {
        Grid::uniform(self.grid.unwrap_or(DEFAULT_GRID))
    }

    fn path(&mut self, name: &str) -> PathBuf {
        self.manifest.output(name);
        self.out.join(name)
    }

    fn sidecar(&mut self, name: &str) {
        let stem = name.trim_end_matches(".csv");
        self.manifest.output(&format!("{stem}.grid.csv"));
    }

    fn write_sample(&mut self, name: &str, xs: &[Curve<f64>]) -> Result<()> {
        let p = self.path(name);
        write_sample(&p, xs)?;
        self.sidecar(name);
        Ok(())
    }

    fn write_operator(&mut self, name: &str, op: &OperatorMatrix<f64>) -> Result<()> {
        let p = self.path(name);
        write_operator(&p, op)?;
        self.sidecar(name);
        Ok(())
    }

    fn finish(mut self, parameters: serde_json::Value) -> Result<()> {
        self.manifest.parameters = parameters;
        self.manifest.outputs.sort();
        write_json(self.out.join("run_manifest.json"), &self.manifest)
    }
}

fn required<T>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::InvalidInput(format!("missing --{name}")))
}

fn scheme_list(v: &[String]) -> Result<Vec<RegScheme>> {
    v.iter().map(|s| s.parse()).collect()
}

fn default_candidates() -> Vec<RegScheme> {
    (1..=6).map(|k| RegScheme::SpectralCutoff { k }).collect()
}

/// Noise (default or given eigenvalues on the Fourier basis) and rho (file or diagonal coefficients).
fn build_model(m: &ModelArgs, cfg: &FileConfig, grid: &GridRef<f64>, seed: u64, need_rho: bool) -> Result<(ArhSpec<f64>, serde_json::Value)> {
    let eigs = m.noise_eigenvalues.clone().or_else(|| cfg.noise_eigenvalues.clone());
    let noise = match &eigs {
        Some(e) => NoiseSpec::fourier(grid, e.clone(), seed)?,
        None => NoiseSpec::default_on(grid, seed)?,
    };
    let rho_path = m.rho.clone().or_else(|| cfg.rho.clone().map(PathBuf::from));
    let diag = m.rho_diag.clone().or_else(|| cfg.rho_diag.clone());
    let rho = match (&rho_path, &diag) {
        (Some(_), Some(_)) => return Err(Error::InvalidInput("give either --rho or --rho-diag, not both".into())),
        (Some(p), None) => {
            let op: OperatorMatrix<f64> = read_operator(p)?;
            if op.dim() != grid.len() {
                return Err(Error::GridMismatch(format!("rho has {} points, grid has {}", op.dim(), grid.len())));
            }
            OperatorMatrix::new(grid.clone(), op.kernel().to_vec())?
        }
        (None, Some(b)) => {
            if b.len() > noise.eigenfunctions.len() {
                return Err(Error::InvalidInput(format!("{} coefficients for {} noise directions", b.len(), noise.eigenfunctions.len())));
            }
            let terms: Vec<_> = b.iter().zip(&noise.eigenfunctions).map(|(&c, e)| (c, e, e)).collect();
            OperatorMatrix::from_rank_one_sum(grid, &terms)?
        }
        (None, None) if need_rho => return Err(Error::InvalidInput("missing --rho or --rho-diag".into())),
        (None, None) => OperatorMatrix::zeros(grid),
    };
    let burnin = m.burnin.or(cfg.burnin).unwrap_or(DEFAULT_BURNIN);
    let echo = json!({
        "rho": rho_path.map(|p| p.display().to_string()),
        "rho_diag": diag,
        "noise_eigenvalues": eigs,
        "burnin": burnin,
    });
    let mut spec = ArhSpec::new(rho, noise);
    spec.burnin = burnin;
    Ok((spec, echo))
}

fn input_path(cli: Option<PathBuf>, cfg: &Option<String>) -> Result<PathBuf> {
    required(cli.or_else(|| cfg.clone().map(PathBuf::from)), "in")
}

fn simulate(mut ctx: Ctx, a: SimulateArgs) -> Result<()> {
    let seed = ctx.seed("simulate")?;
    let cfg = ctx.cfg.clone();
    let kind = match a.kind {
        Some(k) => k,
        None => match cfg.kind.as_deref() {
            Some(s) => Kind::from_str(s, true).map_err(|_| Error::Config(format!("unknown kind `{s}`")))?,
            None => Kind::Arh1,
        },
    };
    let n = required(a.n.or(cfg.n), "n")?;
    let grid = ctx.grid()?;
    let (process, extra): (SegmentedProcess<f64>, serde_json::Value) = match kind {
        Kind::Arh1 => {
            let (spec, echo) = build_model(&a.model, &cfg, &grid, seed, true)?;
            (simulate_arh1(&spec, n)?, echo)
        }
        Kind::Ou => {
            let rate = required(a.a.or(cfg.a), "a")?;
            (simulate_ou_segments(rate, n, &grid, seed)?, json!({ "a": rate }))
        }
        Kind::Wong => (simulate_wong_segments(n, &grid, seed)?, json!({})),
    };
    ctx.write_sample("sample.csv", &process.sample)?;
    ctx.write_sample("innovations.csv", &process.innovations)?;
    if let Some(t) = &process.truth {
        ctx.write_operator("truth.csv", t)?;
    }
    if let Some(d) = &process.derivatives {
        ctx.write_sample("derivatives.csv", d)?;
    }
    let shown = process.sample.len().min(10);
    let series: Vec<(String, &Curve<f64>)> = process.sample[..shown].iter().enumerate().map(|(i, c)| (format!("x{i}"), c)).collect();
    let p = ctx.path("plot.csv");
    write_plot_csv(&p, &series)?;
    ctx.finish(json!({ "kind": kind, "n": n, "seed": seed, "grid": grid.len(), "model": extra }))
}

fn moments(mut ctx: Ctx, a: MomentsArgs) -> Result<()> {
    let cfg = ctx.cfg.clone();
    let input = input_path(a.input, &cfg.input)?;
    ctx.manifest.input(&input)?;
    let xs: Vec<Curve<f64>> = read_sample(&input)?;
    let lags = a.lags.or(cfg.lags).unwrap_or_else(|| vec![1]);
    let center = !a.no_center && cfg.center.unwrap_or(true);
    let ms = MomentSet::compute(&xs, &lags, center)?;
    ctx.write_operator("cov.csv", &ms.cov)?;
    for (h, op) in &ms.crosscov {
        ctx.write_operator(&format!("lag{h}.csv"), op)?;
    }
    let mean = ms.mean.clone();
    let p = ctx.path("mean.csv");
    write_sample(&p, std::slice::from_ref(&mean))?;
    ctx.sidecar("mean.csv");
    let p = ctx.path("moments.json");
    write_json(&p, &ms.summary(10)?)?;
    ctx.finish(json!({ "in": input.display().to_string(), "lags": lags, "center": center }))
}

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    schema_version: u32,
    scheme: RegScheme,
    k: Option<usize>,
    alpha: Option<f64>,
    n: usize,
    centered: bool,
    leading_eigenvalues: Vec<f64>,
    yule_walker_residual: f64,
    cv: Option<serde_json::Value>,
    rho_hat: String,
    grid: Vec<f64>,
    center: Vec<f64>,
    last_curve: Vec<f64>,
}

fn estimate(mut ctx: Ctx, a: EstimateArgs) -> Result<()> {
    let cfg = ctx.cfg.clone();
    let input = input_path(a.input, &cfg.input)?;
    ctx.manifest.input(&input)?;
    let xs: Vec<Curve<f64>> = read_sample(&input)?;
    let center = !a.no_center && cfg.center.unwrap_or(true);
    let candidates = a.candidates.or(cfg.candidates.clone());
    let (scheme, cv) = match candidates {
        Some(c) => {
            let r = cross_validate(&xs, &scheme_list(&c)?, cfg.origin.unwrap_or(DEFAULT_ORIGIN), center)?;
            (r.selected, Some(serde_json::to_value(&r)?))
        }
        None => (a.scheme.or(cfg.scheme.clone()).unwrap_or_else(|| "cutoff:3".into()).parse()?, None),
    };
    let est = estimate_rho_with(&xs, scheme, EstimateOptions { center })?;
    ctx.write_operator("rho_hat.csv", &est.rho_hat)?;
    let (k, alpha) = match scheme {
        RegScheme::SpectralCutoff { k } => (Some(k), None),
        RegScheme::Penalized { alpha } | RegScheme::Tikhonov { alpha } => (None, Some(alpha)),
    };
    let model = ModelFile {
        schema_version: SCHEMA_VERSION,
        scheme,
        k,
        alpha,
        n: est.n,
        centered: center,
        leading_eigenvalues: est.eigens.eigenvalues().iter().take(10).copied().collect(),
        yule_walker_residual: est.yule_walker_residual()?,
        cv,
        rho_hat: "rho_hat.csv".into(),
        grid: xs[0].grid().points().to_vec(),
        center: est.center.values().to_vec(),
        last_curve: xs.last().expect("nonempty").values().to_vec(),
    };
    let p = ctx.path("model.json");
    write_json(&p, &model)?;
    ctx.finish(json!({ "in": input.display().to_string(), "scheme": scheme.to_string(), "center": center }))
}

fn predict_cmd(mut ctx: Ctx, a: PredictArgs) -> Result<()> {
    let cfg = ctx.cfg.clone();
    let model_path = required(a.model.or_else(|| cfg.model.clone().map(PathBuf::from)), "model")?;
    ctx.manifest.input(&model_path)?;
    let model: ModelFile = serde_json::from_slice(&std::fs::read(&model_path)?)?;
    let grid = Grid::from_points(model.grid.clone())?;
    let dir = model_path.parent().unwrap_or(Path::new("."));
    let rho_path = dir.join(&model.rho_hat);
    ctx.manifest.input(&rho_path)?;
    let rho: OperatorMatrix<f64> = read_operator(&rho_path)?;
    if rho.grid().points() != grid.points() {
        return Err(Error::GridMismatch("rho_hat grid differs from the model grid".into()));
    }
    let rho = OperatorMatrix::new(grid.clone(), rho.kernel().to_vec())?;
    let est = crate::arh::ArhEstimate::from_operator(rho, Curve::new(grid.clone(), model.center.clone())?, model.scheme)?;
    let x = a.x.or(cfg.x.clone()).unwrap_or_else(|| "last".into());
    let inputs: Vec<Curve<f64>> = if x == "last" {
        vec![Curve::new(grid.clone(), model.last_curve.clone())?]
    } else {
        let p = PathBuf::from(&x);
        ctx.manifest.input(&p)?;
        read_sample::<f64>(&p)?.into_iter().map(|c| Curve::new(grid.clone(), c.into_values())).collect::<Result<_>>()?
    };
    let preds = inputs.iter().map(|c| predict(&est, c)).collect::<Result<Vec<_>>>()?;
    ctx.write_sample("prediction.csv", &preds)?;
    let series: Vec<(String, &Curve<f64>)> =
        inputs.iter().zip(&preds).enumerate().flat_map(|(i, (x, p))| [(format!("x{i}"), x), (format!("prediction{i}"), p)]).collect();
    let p = ctx.path("plot.csv");
    write_plot_csv(&p, &series)?;
    ctx.finish(json!({ "model": model_path.display().to_string(), "x": x }))
}

fn cv_cmd(mut ctx: Ctx, a: CvArgs) -> Result<()> {
    let cfg = ctx.cfg.clone();
    let input = input_path(a.input, &cfg.input)?;
    ctx.manifest.input(&input)?;
    let xs: Vec<Curve<f64>> = read_sample(&input)?;
    let candidates = match a.candidates.or(cfg.candidates.clone()) {
        Some(c) => scheme_list(&c)?,
        None => default_candidates(),
    };
    let origin = a.origin.or(cfg.origin).unwrap_or(DEFAULT_ORIGIN);
    let center = !a.no_center && cfg.center.unwrap_or(true);
    let report = cross_validate(&xs, &candidates, origin, center)?;
    let p = ctx.path("cv.json");
    write_json(&p, &report)?;
    let names: Vec<String> = candidates.iter().map(|c| c.to_string()).collect();
    ctx.finish(json!({ "in": input.display().to_string(), "candidates": names, "origin": origin, "center": center }))
}

fn changepoint(mut ctx: Ctx, a: ChangepointArgs) -> Result<()> {
    let seed = ctx.seed("changepoint")?;
    let cfg = ctx.cfg.clone();
    let input = input_path(a.input, &cfg.input)?;
    ctx.manifest.input(&input)?;
    let xs: Vec<Curve<f64>> = read_sample(&input)?;
    let scheme: RegScheme = a.scheme.or(cfg.scheme.clone()).unwrap_or_else(|| "cutoff:3".into()).parse()?;
    let reps = a.reps.or(cfg.reps).unwrap_or(500);
    let level = a.level.or(cfg.level).unwrap_or(0.05);
    let center = !a.no_center && cfg.center.unwrap_or(true);
    let opts = EstimateOptions { center };
    let test = changepoint_test(&xs, scheme, opts, reps, level, seed)?;
    let est = estimate_rho_with(&xs, scheme, opts)?;
    let path = changepoint_statistic(&residuals(&est, &xs)?)?;
    let p = ctx.path("changepoint.json");
    write_json(&p, &json!({ "schema_version": SCHEMA_VERSION, "test": test, "bridge_norms": path.bridge_norms }))?;
    let cgrid = Grid::from_points((1..=path.bridge_norms.len()).map(|t| t as f64 / path.bridge_norms.len() as f64).collect());
    if let Ok(g) = cgrid {
        let c = Curve::new(g, path.bridge_norms.clone())?;
        let p = ctx.path("plot.csv");
        write_plot_csv(&p, &[("cusum".to_string(), &c)])?;
    }
    ctx.finish(json!({ "in": input.display().to_string(), "scheme": scheme.to_string(), "reps": reps, "level": level, "seed": seed, "center": center }))
}

/// Data file: explicit path, else `$ARHLAB_DATA_DIR/elnino_1950_1986.csv`, else the bundled copy.
fn elnino_data(explicit: Option<PathBuf>) -> PathBuf {
    if let Some(p) = explicit {
        return p;
    }
    if let Some(dir) = std::env::var_os(DATA_ENV) {
        let p = PathBuf::from(dir).join(ELNINO_FILE);
        if p.exists() {
            return p;
        }
    }
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(ELNINO_FILE)
}

fn elnino(mut ctx: Ctx, a: ElninoArgs) -> Result<()> {
    let cfg = ctx.cfg.clone();
    let data = elnino_data(a.data.or_else(|| cfg.data.clone().map(PathBuf::from)));
    ctx.manifest.input(&data)?;
    let series = ingest_monthly_csv(&data)?;
    let mut ec = ElninoConfig::default();
    if let Some(s) = a.smoothing {
        ec.smoothing = match s {
            SmoothingArg::None => SmoothingKind::None,
            SmoothingArg::Spline => SmoothingKind::Spline,
        };
    } else if let Some(s) = cfg.smoothing.as_deref() {
        ec.smoothing = match s {
            "none" => SmoothingKind::None,
            "spline" => SmoothingKind::Spline,
            other => return Err(Error::Config(format!("unknown smoothing `{other}`"))),
        };
    }
    if let Some(p) = cfg.penalties.clone() {
        ec.penalties = p;
    }
    if let Some(c) = &cfg.candidates {
        ec.candidates = scheme_list(c)?;
    }
    if let Some(s) = &cfg.selection_scheme {
        ec.selection_scheme = s.parse()?;
    }
    if let Some(o) = cfg.origin {
        ec.origin = o;
    }
    if let Some(c) = cfg.center {
        ec.center = c;
    }
    if let Some(y) = cfg.test_year {
        ec.test_year = y;
    }
    if let Some(g) = ctx.grid {
        ec.grid = g;
    }
    let out = elnino_pipeline(&series, &ec)?;
    let p = ctx.path("elnino_report.json");
    write_json(&p, &out.report)?;
    let mut csv = String::from("month,predicted,actual\n");
    for (j, (p, v)) in out.report.eval.predicted.iter().zip(&out.report.eval.actual).enumerate() {
        csv.push_str(&format!("{},{p},{v}\n", j + 1));
    }
    let p = ctx.path("elnino_prediction.csv");
    crate::harness::io::write_atomic(&p, csv.as_bytes())?;
    let mut series_out: Vec<(String, &Curve<f64>)> = out
        .training
        .iter()
        .enumerate()
        .map(|(i, c)| (format!("year{}", out.report.train_first_year + i as i32), c))
        .collect();
    series_out.push((format!("prediction{}", ec.test_year), &out.prediction));
    let p = ctx.path("plot.csv");
    write_plot_csv(&p, &series_out)?;
    let seed = ctx.seed;
    ctx.finish(json!({ "data": data.display().to_string(), "seed": seed, "config": ec }))
}

fn mc_lln(mut ctx: Ctx, a: McLlnArgs) -> Result<()> {
    let seed = ctx.seed("mc-lln")?;
    let cfg = ctx.cfg.clone();
    let grid = ctx.grid()?;
    let (spec, echo) = build_model(&a.model, &cfg, &grid, seed, false)?;
    let n = a.n.or(cfg.n).unwrap_or(2000);
    let reps = a.reps.or(cfg.reps).unwrap_or(200);
    let report = mc_lln_rate(&spec, n, reps, seed)?;
    let p = ctx.path("mc_lln.json");
    write_json(&p, &report)?;
    ctx.finish(json!({ "n": n, "reps": reps, "seed": seed, "grid": grid.len(), "model": echo }))
}

fn mc_clt(mut ctx: Ctx, a: McCltArgs) -> Result<()> {
    let seed = ctx.seed("mc-clt")?;
    let cfg = ctx.cfg.clone();
    let grid = ctx.grid()?;
    let (spec, echo) = build_model(&a.model, &cfg, &grid, seed, false)?;
    let target = match a.target {
        Some(t) => t,
        None => match cfg.target.as_deref() {
            Some(s) => CltTarget::from_str(s, true).map_err(|_| Error::Config(format!("unknown target `{s}`")))?,
            None => CltTarget::Mean,
        },
    };
    let n = a.n.or(cfg.n).unwrap_or(2000);
    let reps = a.reps.or(cfg.reps).unwrap_or(300);
    let batch = a.batch.or(cfg.batch).unwrap_or(50);
    let p = ctx.path("mc_clt.json");
    let params = match target {
        CltTarget::Mean => {
            let dirs = a.dirs.or(cfg.dirs).unwrap_or(3);
            write_json(&p, &mc_mean_clt(&spec, n, reps, dirs, batch, seed)?)?;
            json!({ "target": "mean", "n": n, "reps": reps, "dirs": dirs, "batch": batch })
        }
        CltTarget::Predictor => {
            let cutoff = a.cutoff.or(cfg.cutoff);
            let opts = CltOptions { cutoff, schedule_c: cfg.schedule_c.unwrap_or(1.0), batch, center: cfg.center.unwrap_or(false) };
            let exp = predictor_clt_experiment(&spec, n, reps, opts, seed)?;
            write_json(&p, &exp.summary)?;
            ctx.write_operator("scaled_error_cov.csv", &exp.scaled_cov)?;
            json!({ "target": "predictor", "n": n, "reps": reps, "batch": batch, "cutoff": cutoff, "schedule_c": opts.schedule_c, "center": opts.center })
        }
    };
    ctx.finish(json!({ "seed": seed, "grid": grid.len(), "model": echo, "experiment": params }))
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => load_config(p)?,
        None => FileConfig::default(),
    };
    let out = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone().map(PathBuf::from))
        .or_else(|| std::env::var_os(DATA_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&out)?;
    let name = match &cli.command {
        Command::Simulate(_) => "simulate",
        Command::Moments(_) => "moments",
        Command::Estimate(_) => "estimate",
        Command::Predict(_) => "predict",
        Command::Cv(_) => "cv",
        Command::Changepoint(_) => "changepoint",
        Command::Elnino(_) => "elnino",
        Command::McLln(_) => "mc-lln",
        Command::McClt(_) => "mc-clt",
    };
    let mut manifest = RunManifest::new(name, serde_json::Value::Null);
    if let Some(p) = &cli.config {
        manifest.input(p)?;
    }
    let ctx = Ctx { seed: cli.seed.or(cfg.seed), grid: cli.grid.or(cfg.grid), out, cfg, manifest };
    match cli.command {
        Command::Simulate(a) => simulate(ctx, a),
        Command::Moments(a) => moments(ctx, a),
        Command::Estimate(a) => estimate(ctx, a),
        Command::Predict(a) => predict_cmd(ctx, a),
        Command::Cv(a) => cv_cmd(ctx, a),
        Command::Changepoint(a) => changepoint(ctx, a),
        Command::Elnino(a) => elnino(ctx, a),
        Command::McLln(a) => mc_lln(ctx, a),
        Command::McClt(a) => mc_clt(ctx, a),
    }
}

/// Parses `argv` (program name first) and runs the command; returns the exit status.
pub fn cli_main<I, S>(argv: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}
