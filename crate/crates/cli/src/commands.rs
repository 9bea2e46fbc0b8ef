use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use oris_link_core::mc::sim::{CampaignPlan, Metric, SimError, Simulator, Tally};
use oris_link_core::params::{db_to_linear, GeometryMode};
use oris_link_core::performance::{
    sweep_with, LinkPair, PerformanceCurve, PerformanceError, DEFAULT_QUAD_POINTS,
};

use crate::campaign::{resolve_workers, run_parallel, CampaignResult};
use crate::config::{self, ConfigError, LoadedConfig};
use crate::manifest::{self, RunManifest};
use crate::output::{ensure_writable, fmt_f64, fmt_opt, write_atomic, OutputError};

pub const ANALYZE_HEADER: &str =
    "pt_dbm,outage_exact,outage_asymptotic,ber_asymptotic,ber_exact_numeric";
pub const COMPARE_HEADER: &str = "pt_dbm,outage_exact,outage_asymptotic,outage_mc,outage_mc_ci_low,outage_mc_ci_high,ber_asymptotic,ber_exact_numeric,ber_mc,ber_mc_ci_low,ber_mc_ci_high";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Output(#[from] OutputError),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("precision not met: {0}")]
    Precision(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Output(OutputError::Exists(_)) => 2,
            CliError::Output(OutputError::Io { .. }) => 1,
            CliError::Numerical(_) => 3,
            CliError::Precision(_) => 4,
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        CliError::Usage(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "oris-link", version, about = "RF / ORIS-assisted FSO link analysis")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form outage and BER over a transmit-power sweep.
    Analyze(AnalyzeArgs),
    /// One Monte Carlo campaign at the configured transmit power.
    Simulate(SimulateArgs),
    /// Analytic, asymptotic and simulated series side by side.
    Compare(CompareArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Configuration file (`key = value` lines).
    #[arg(long)]
    pub config: PathBuf,
    /// SNR threshold in dB.
    #[arg(long, default_value_t = 5.0, allow_negative_numbers = true)]
    pub gamma_th: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Manifest path; defaults to `<out>.manifest.json`.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Overwrite existing outputs.
    #[arg(long)]
    pub force: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub common: Common,
    /// Transmit-power axis `start:stop:step` in dBm, stop inclusive.
    #[arg(long, allow_hyphen_values = true)]
    pub pt_sweep: String,
    #[arg(long, default_value_t = DEFAULT_QUAD_POINTS)]
    pub quad_points: usize,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    Outage,
    Ber,
}

impl From<MetricArg> for Metric {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::Outage => Metric::Outage,
            MetricArg::Ber => Metric::Ber,
        }
    }
}

#[derive(Debug, Args)]
pub struct CampaignArgs {
    #[arg(long, default_value_t = 1_000_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads; defaults to ORIS_LINK_THREADS or the core count.
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub campaign: CampaignArgs,
    #[arg(long, value_enum, default_value = "outage")]
    pub metric: MetricArg,
    /// Transmit power in dBm, overriding the config.
    #[arg(long, allow_negative_numbers = true)]
    pub pt_dbm: Option<f64>,
    /// Exit with code 4 when the 99% CI half-width exceeds this.
    #[arg(long)]
    pub max_ci_halfwidth: Option<f64>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub common: Common,
    #[command(flatten)]
    pub campaign: CampaignArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub pt_sweep: String,
    #[arg(long, default_value_t = DEFAULT_QUAD_POINTS)]
    pub quad_points: usize,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Analyze(a) => analyze(&a),
        Command::Simulate(a) => simulate(&a),
        Command::Compare(a) => compare(&a),
    }
}

/// Parses `start:stop:step` (dBm) into an inclusive, strictly increasing axis.
pub fn parse_sweep(spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Usage(format!("--pt-sweep expects start:stop:step, got `{spec}`"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect::<Option<_>>()
        .ok_or_else(bad)?;
    let [start, stop, step] = parts[..] else {
        return Err(bad());
    };
    if !(step > 0.0) || stop < start {
        return Err(CliError::Usage(format!(
            "--pt-sweep needs step > 0 and stop ≥ start, got `{spec}`"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as u64 + 1;
    if n > 100_000 {
        return Err(CliError::Usage(format!("--pt-sweep has {n} points")));
    }
    Ok((0..n)
        .map(|i| {
            let v = start + i as f64 * step;
            (v * 1e9).round() / 1e9
        })
        .collect())
}

struct Prepared {
    config: LoadedConfig,
    manifest: RunManifest,
    manifest_path: PathBuf,
    gamma_th: f64,
}

fn prepare(command: &str, common: &Common) -> Result<Prepared, CliError> {
    let config = config::load(&common.config)?;
    for d in &config.diagnostics {
        eprintln!("warning: {d}");
    }
    if !common.gamma_th.is_finite() {
        return Err(CliError::Usage("--gamma-th must be finite".into()));
    }
    let manifest_path = common
        .manifest
        .clone()
        .unwrap_or_else(|| manifest::default_path(&common.out));
    ensure_writable(&common.out, common.force)?;
    ensure_writable(&manifest_path, common.force)?;
    let mut manifest = RunManifest::new(command, &common.config, &config.digest);
    manifest.outputs = vec![common.out.display().to_string()];
    Ok(Prepared {
        config,
        manifest,
        manifest_path,
        gamma_th: db_to_linear(common.gamma_th),
    })
}

fn failure_message(curve: &PerformanceCurve) -> Option<String> {
    if curve.failures.is_empty() {
        return None;
    }
    let mut s = String::new();
    for f in &curve.failures {
        let _ = write!(s, "{}P_t = {} dBm: {}", if s.is_empty() { "" } else { "; " }, fmt_f64(f.pt_dbm), f.reason);
    }
    Some(s)
}

fn clamp_probability(v: f64, clamped: &mut bool) -> f64 {
    if v > 1.0 {
        *clamped = true;
        1.0
    } else {
        v
    }
}

fn analytic_curve(
    pair: &LinkPair,
    axis: &[f64],
    gamma_th: f64,
    quad_points: usize,
) -> Result<PerformanceCurve, CliError> {
    sweep_with(pair, axis, gamma_th, quad_points).map_err(|e| match e {
        PerformanceError::TooFewPoints(_) | PerformanceError::BadAxis => {
            CliError::Usage(e.to_string())
        }
        other => CliError::Numerical(other.to_string()),
    })
}

fn note_clamped(manifest: &mut RunManifest, pt: f64, series: &str) {
    let msg = format!("{series} clamped to 1 at P_t = {} dBm", fmt_f64(pt));
    eprintln!("note: {msg}");
    manifest.notes.push(msg);
}

fn finish(
    p: &mut Prepared,
    numerical: Option<String>,
) -> Result<(), CliError> {
    p.manifest.status = if numerical.is_some() { "numerical-failure" } else { "ok" }.to_string();
    p.manifest.write(&p.manifest_path)?;
    match numerical {
        Some(msg) => Err(CliError::Numerical(msg)),
        None => Ok(()),
    }
}

fn analyze(a: &AnalyzeArgs) -> Result<(), CliError> {
    let axis = parse_sweep(&a.pt_sweep)?;
    let mut p = prepare("analyze", &a.common)?;
    p.manifest.write(&p.manifest_path)?;
    let pair = LinkPair::from_params(&p.config.params).map_err(ConfigError::from)?;
    let curve = analytic_curve(&pair, &axis, p.gamma_th, a.quad_points)?;

    let mut csv = String::new();
    csv.push_str(ANALYZE_HEADER);
    csv.push('\n');
    for i in 0..curve.len() {
        let pt = curve.axis_dbm[i];
        let mut c_out = false;
        let mut c_ber = false;
        let out_asym = clamp_probability(curve.outage_asymptotic[i], &mut c_out);
        let ber_asym = curve.ber_asymptotic[i].map(|v| clamp_probability(v, &mut c_ber));
        if c_out {
            note_clamped(&mut p.manifest, pt, "outage_asymptotic");
        }
        if c_ber {
            note_clamped(&mut p.manifest, pt, "ber_asymptotic");
        }
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            fmt_f64(pt),
            fmt_f64(curve.outage_exact[i]),
            fmt_f64(out_asym),
            fmt_opt(ber_asym),
            fmt_opt(curve.ber_exact_numeric[i]),
        );
    }
    write_atomic(&a.common.out, csv.as_bytes(), a.common.force)?;
    finish(&mut p, failure_message(&curve))
}

fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let mut p = prepare("simulate", &a.common)?;
    let plan = CampaignPlan::new(a.campaign.trials, a.campaign.seed)?;
    let mut params = p.config.params.clone();
    if let Some(dbm) = a.pt_dbm {
        params.pt = oris_link_core::params::dbm_to_watts(dbm);
    }
    let sim = Simulator::from_params(&params)?;
    let workers = resolve_workers(a.campaign.workers);
    p.manifest.seeds = vec![a.campaign.seed];
    p.manifest.notes.push(format!("workers = {workers}"));
    p.manifest.write(&p.manifest_path)?;

    let metric = Metric::from(a.metric);
    let est = run_parallel(&plan, &sim, p.gamma_th, workers).estimate(metric, a.campaign.seed);
    let result = CampaignResult {
        metric: metric.as_str().to_string(),
        estimate: est.estimate,
        ci_low: est.ci_low,
        ci_high: est.ci_high,
        trials: est.trials,
        seed: est.seed,
        config_digest: p.config.digest.clone(),
    };
    let mut json = serde_json::to_string(&result).expect("result serializes");
    json.push('\n');
    write_atomic(&a.common.out, json.as_bytes(), a.common.force)?;
    println!("{}", json.trim_end());

    if let Some(limit) = a.max_ci_halfwidth {
        let hw = est.half_width();
        if hw > limit {
            p.manifest.status = "precision-unmet".to_string();
            p.manifest.write(&p.manifest_path)?;
            return Err(CliError::Precision(format!(
                "CI half-width {} exceeds {}",
                fmt_f64(hw),
                fmt_f64(limit)
            )));
        }
    }
    finish(&mut p, None)
}

/// Standard score of a Monte Carlo proportion against an analytic value.
pub fn z_score(mc: f64, analytic: f64, trials: u64) -> f64 {
    let var = analytic * (1.0 - analytic) / trials as f64;
    if var > 0.0 {
        (mc - analytic) / var.sqrt()
    } else if mc == analytic {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Power (dBm) where a decreasing series first drops to `level`, by
/// log-linear interpolation between axis points.
pub fn crossing_dbm(axis: &[f64], series: &[Option<f64>], level: f64) -> Option<f64> {
    for i in 1..axis.len() {
        let (Some(a), Some(b)) = (series[i - 1], series[i]) else {
            continue;
        };
        if a > level && b <= level && a > 0.0 && b > 0.0 {
            let t = (a.ln() - level.ln()) / (a.ln() - b.ln());
            return Some(axis[i - 1] + t * (axis[i] - axis[i - 1]));
        }
    }
    None
}

struct PointCheck {
    pt: f64,
    metric: &'static str,
    z: f64,
    undersampled: bool,
}

fn compare(a: &CompareArgs) -> Result<(), CliError> {
    let axis = parse_sweep(&a.pt_sweep)?;
    let mut p = prepare("compare", &a.common)?;
    let plan = CampaignPlan::new(a.campaign.trials, a.campaign.seed)?;
    let params = p.config.params.clone();
    let sim = Simulator::from_params(&params)?;
    let workers = resolve_workers(a.campaign.workers);
    p.manifest.seeds = vec![a.campaign.seed];
    p.manifest.notes.push(format!("workers = {workers}"));
    p.manifest.write(&p.manifest_path)?;

    let curve = analytic_curve(&sim.pair, &axis, p.gamma_th, a.quad_points)?;
    let n = plan.trials;
    let mut csv = String::new();
    csv.push_str(COMPARE_HEADER);
    csv.push('\n');
    let mut checks = Vec::new();
    let mut ber_mc_series = Vec::new();
    for (i, &pt) in axis.iter().enumerate() {
        let tally: Tally = run_parallel(&plan, &sim.with_pt_dbm(pt), p.gamma_th, workers);
        let out = tally.estimate(Metric::Outage, plan.seed);
        let ber = tally.estimate(Metric::Ber, plan.seed);
        ber_mc_series.push(Some(ber.estimate));
        let mut c_out = false;
        let mut c_ber = false;
        let out_asym = clamp_probability(curve.outage_asymptotic[i], &mut c_out);
        let ber_asym = curve.ber_asymptotic[i].map(|v| clamp_probability(v, &mut c_ber));
        if c_out {
            note_clamped(&mut p.manifest, pt, "outage_asymptotic");
        }
        if c_ber {
            note_clamped(&mut p.manifest, pt, "ber_asymptotic");
        }
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(pt),
            fmt_f64(curve.outage_exact[i]),
            fmt_f64(out_asym),
            fmt_f64(out.estimate),
            fmt_f64(out.ci_low),
            fmt_f64(out.ci_high),
            fmt_opt(ber_asym),
            fmt_opt(curve.ber_exact_numeric[i]),
            fmt_f64(ber.estimate),
            fmt_f64(ber.ci_low),
            fmt_f64(ber.ci_high),
        );
        let exact_out = curve.outage_exact[i];
        checks.push(PointCheck {
            pt,
            metric: "outage",
            z: z_score(out.estimate, exact_out, n),
            undersampled: exact_out < 10.0 / n as f64,
        });
        if let Some(b) = curve.ber_exact_numeric[i] {
            checks.push(PointCheck {
                pt,
                metric: "ber",
                z: z_score(ber.estimate, b, n),
                undersampled: b < 10.0 / n as f64,
            });
        }
    }
    write_atomic(&a.common.out, csv.as_bytes(), a.common.force)?;

    let variant_gap = params.geometry_mode == GeometryMode::PaperPrinted && params.sigma_beta > 0.0;
    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "compare: {} points, {} trials per point, geometry mode {}",
        axis.len(),
        n,
        params.geometry_mode.as_str()
    );
    for metric in ["outage", "ber"] {
        let worst = checks
            .iter()
            .filter(|c| c.metric == metric && !c.undersampled)
            .max_by(|x, y| x.z.abs().total_cmp(&y.z.abs()));
        match worst {
            Some(c) => {
                let _ = writeln!(
                    summary,
                    "largest |z| ({metric}): {:.3} at P_t = {} dBm",
                    c.z.abs(),
                    fmt_f64(c.pt)
                );
            }
            None => {
                let _ = writeln!(summary, "largest |z| ({metric}): no adequately sampled points");
            }
        }
    }
    for c in &checks {
        if c.undersampled {
            let _ = writeln!(
                summary,
                "  {} at P_t = {} dBm: undersampled (below 10/N)",
                c.metric,
                fmt_f64(c.pt)
            );
        } else if c.z.abs() > 3.0 {
            let label = if variant_gap { "model-variant gap" } else { "disagreement" };
            let _ = writeln!(
                summary,
                "  {} at P_t = {} dBm: |z| = {:.3}, {label}",
                c.metric,
                fmt_f64(c.pt),
                c.z.abs()
            );
        }
    }
    for (name, series) in [
        ("ber_exact_numeric", &curve.ber_exact_numeric),
        ("ber_mc", &ber_mc_series),
    ] {
        match crossing_dbm(&axis, series, 1e-3) {
            Some(x) => {
                let _ = writeln!(summary, "{name} reaches 1e-3 at {x:.3} dBm");
            }
            None => {
                let _ = writeln!(summary, "{name} does not cross 1e-3 on this axis");
            }
        }
    }
    print!("{summary}");
    p.manifest.notes.extend(summary.lines().map(str::to_string));
    finish(&mut p, failure_message(&curve))
}
