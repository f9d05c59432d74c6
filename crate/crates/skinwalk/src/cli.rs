//! Command-line front end: run configurations, the five subcommands, and
//! their output files.
//!
//! Every command writes into the `--out` directory (created on demand) so
//! outputs never clobber unrelated files. Parameters come from defaults,
//! then an optional flat JSON config file, then command-line flags, in
//! increasing precedence. Parameter flags accept a scalar (`0.4`), a comma
//! list (`0.2,0.6,1.0`), or an inclusive range (`0.05:0.95:50`); commands
//! that need a single value reject lists.
//!
//! Exit codes: 0 on success, 1 for engine failures, 2 for usage and
//! configuration errors.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::channels::DampingOrder;
use crate::error::WalkError;
use crate::evolution::{default_fit_window, estimate_drift, evolve, Trajectory};
use crate::output::{
    csv_num, trajectory_distribution_csv, trajectory_json, trajectory_summary_csv,
};
use crate::spectral::{
    closed_form_velocities, coherent_drift_spectral, crossover_gamma, incoherent_drift_spectral,
    IncoherentRegime, VelocityFlag, VelocityReport,
};
use crate::walk::WalkParams;

const DEFAULT_THETA: f64 = std::f64::consts::FRAC_PI_4;

#[derive(Parser, Debug)]
#[command(
    name = "skinwalk",
    version,
    about = "Lossy discrete-time quantum walk simulator with tunable decoherence"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Propagate one walk and write its trajectory.
    Simulate(RunArgs),
    /// Drift-velocity reports (closed form, spectral, real space) per point.
    Drift(RunArgs),
    /// Emit the plot-ready datasets for a built-in figure.
    Figure {
        /// One of: fig2 (dephasing), fig3 (damping before loss),
        /// fig4 (damping after loss).
        #[arg(value_parser = ["fig2", "fig3", "fig4"])]
        name: String,
        #[command(flatten)]
        args: RunArgs,
    },
    /// Closed-form velocity table over a (gamma, theta) grid.
    Sweep(RunArgs),
    /// Loss strength where coherent and fully dephased drifts coincide.
    Crossover(RunArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// Loss strength in [0, 1]; scalar, comma list, or lo:hi:n range.
    #[arg(long)]
    pub gamma: Option<String>,
    /// Coin angle in radians; same list syntax as --gamma.
    #[arg(long)]
    pub theta: Option<String>,
    /// Dephasing strength in [0, 1].
    #[arg(long)]
    pub eta: Option<String>,
    /// Amplitude-damping strength in [0, 1]; requires --order.
    #[arg(long)]
    pub mu: Option<String>,
    /// Damping position relative to the loss operator.
    #[arg(long, value_enum)]
    pub order: Option<OrderArg>,
    /// Number of walk steps.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Lattice half width (defaults to the step count).
    #[arg(long)]
    pub half_width: Option<usize>,
    /// Drift fit window as start:end (defaults to the last third).
    #[arg(long)]
    pub window: Option<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output file format.
    #[arg(long, value_enum)]
    pub format: Option<FormatArg>,
    /// Worker threads for sweeps and figure runs.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Flat key-value JSON config; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Reserved for stochastic extensions; the engine is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderArg {
    Before,
    After,
}

impl From<OrderArg> for DampingOrder {
    fn from(value: OrderArg) -> Self {
        match value {
            OrderArg::Before => DampingOrder::BeforeLoss,
            OrderArg::After => DampingOrder::AfterLoss,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum FormatArg {
    #[default]
    Csv,
    Json,
}

/// Errors split by the exit code they map to.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Engine(#[from] WalkError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Engine(_) => 1,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

type CliResult<T> = std::result::Result<T, CliError>;

/// A fully resolved run configuration (defaults + config file + flags).
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub gammas: Vec<f64>,
    pub thetas: Vec<f64>,
    pub etas: Vec<f64>,
    pub mus: Vec<f64>,
    pub order: DampingOrder,
    pub steps: Option<usize>,
    pub half_width: Option<usize>,
    pub window: Option<(usize, usize)>,
    pub out: PathBuf,
    pub format: FormatArg,
    pub jobs: Option<usize>,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            gammas: vec![0.0],
            thetas: vec![DEFAULT_THETA],
            etas: vec![0.0],
            mus: vec![0.0],
            order: DampingOrder::None,
            steps: None,
            half_width: None,
            window: None,
            out: PathBuf::from("out"),
            format: FormatArg::Csv,
            jobs: None,
            seed: 0,
        }
    }
}

impl RunConfig {
    /// Resolve precedence: defaults, then the config file, then flags.
    pub fn resolve(args: &RunArgs) -> CliResult<Self> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &args.config {
            cfg.merge_file(path)?;
        }
        cfg.merge_args(args)?;
        Ok(cfg)
    }

    fn merge_file(&mut self, path: &Path) -> CliResult<()> {
        let text = fs::read_to_string(path)
            .map_err(|e| usage(format!("cannot read config {}: {e}", path.display())))?;
        let value: Value = serde_json::from_str(&text)
            .map_err(|e| usage(format!("config {} is not valid JSON: {e}", path.display())))?;
        let map = value
            .as_object()
            .ok_or_else(|| usage("config must be a flat JSON object"))?;
        for (key, val) in map {
            match key.as_str() {
                "gamma" => self.gammas = axis_from_value("gamma", val)?,
                "theta" => self.thetas = axis_from_value("theta", val)?,
                "eta" => self.etas = axis_from_value("eta", val)?,
                "mu" => self.mus = axis_from_value("mu", val)?,
                "order" => {
                    let s = val
                        .as_str()
                        .ok_or_else(|| usage("config key `order` must be a string"))?;
                    self.order = match s {
                        "before" => DampingOrder::BeforeLoss,
                        "after" => DampingOrder::AfterLoss,
                        "none" => DampingOrder::None,
                        other => return Err(usage(format!("unknown order `{other}`"))),
                    };
                }
                "steps" => self.steps = Some(usize_from_value("steps", val)?),
                "half_width" => self.half_width = Some(usize_from_value("half_width", val)?),
                "window" => {
                    let s = val
                        .as_str()
                        .ok_or_else(|| usage("config key `window` must be \"start:end\""))?;
                    self.window = Some(parse_window(s)?);
                }
                "out" => {
                    let s = val
                        .as_str()
                        .ok_or_else(|| usage("config key `out` must be a path string"))?;
                    self.out = PathBuf::from(s);
                }
                "format" => {
                    let s = val
                        .as_str()
                        .ok_or_else(|| usage("config key `format` must be csv or json"))?;
                    self.format = match s {
                        "csv" => FormatArg::Csv,
                        "json" => FormatArg::Json,
                        other => return Err(usage(format!("unknown format `{other}`"))),
                    };
                }
                "jobs" => self.jobs = Some(usize_from_value("jobs", val)?),
                "seed" => self.seed = usize_from_value("seed", val)? as u64,
                other => return Err(usage(format!("unknown config key `{other}`"))),
            }
        }
        Ok(())
    }

    fn merge_args(&mut self, args: &RunArgs) -> CliResult<()> {
        if let Some(s) = &args.gamma {
            self.gammas = parse_axis("gamma", s)?;
        }
        if let Some(s) = &args.theta {
            self.thetas = parse_axis("theta", s)?;
        }
        if let Some(s) = &args.eta {
            self.etas = parse_axis("eta", s)?;
        }
        if let Some(s) = &args.mu {
            self.mus = parse_axis("mu", s)?;
        }
        if let Some(order) = args.order {
            self.order = order.into();
        }
        if let Some(steps) = args.steps {
            self.steps = Some(steps);
        }
        if let Some(hw) = args.half_width {
            self.half_width = Some(hw);
        }
        if let Some(w) = &args.window {
            self.window = Some(parse_window(w)?);
        }
        if let Some(out) = &args.out {
            self.out = out.clone();
        }
        if let Some(format) = args.format {
            self.format = format;
        }
        if let Some(jobs) = args.jobs {
            self.jobs = Some(jobs);
        }
        if let Some(seed) = args.seed {
            self.seed = seed;
        }
        Ok(())
    }

    fn steps_or(&self, default: usize) -> usize {
        self.steps.unwrap_or(default)
    }

    /// Walk parameters for one point of the grid.
    fn params(
        &self,
        gamma: f64,
        theta: f64,
        eta: f64,
        mu: f64,
        steps: usize,
    ) -> CliResult<WalkParams> {
        let params = WalkParams {
            theta,
            gamma,
            eta,
            mu,
            damping_order: if mu > 0.0 {
                self.order
            } else {
                DampingOrder::None
            },
            steps,
            half_width: self.half_width.unwrap_or(steps.max(1)),
        };
        params.validate().map_err(|e| usage(e.to_string()))?;
        Ok(params)
    }

    fn scalar(&self, name: &str, axis: &[f64]) -> CliResult<f64> {
        match axis {
            [single] => Ok(*single),
            _ => Err(usage(format!(
                "this command needs a single --{name} value, got {} of them",
                axis.len()
            ))),
        }
    }

    fn fit_window(&self, steps: usize) -> (usize, usize) {
        self.window.unwrap_or_else(|| default_fit_window(steps))
    }

    fn ensure_out_dir(&self) -> CliResult<()> {
        fs::create_dir_all(&self.out).map_err(WalkError::from)?;
        Ok(())
    }

    fn write(&self, filename: &str, contents: &str) -> CliResult<()> {
        fs::write(self.out.join(filename), contents).map_err(WalkError::from)?;
        Ok(())
    }

    /// Run grid points through `work` on a bounded rayon pool, preserving
    /// input order so output files never depend on the schedule.
    fn run_parallel<P, R>(
        &self,
        points: Vec<P>,
        work: impl Fn(&P) -> CliResult<R> + Sync,
    ) -> CliResult<Vec<R>>
    where
        P: Sync,
        R: Send,
    {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.jobs.unwrap_or(0))
            .build()
            .map_err(|e| usage(format!("cannot build worker pool: {e}")))?;
        pool.install(|| points.par_iter().map(&work).collect())
    }
}

fn usize_from_value(name: &str, value: &Value) -> CliResult<usize> {
    value
        .as_u64()
        .map(|v| v as usize)
        .ok_or_else(|| usage(format!("config key `{name}` must be a nonnegative integer")))
}

fn axis_from_value(name: &str, value: &Value) -> CliResult<Vec<f64>> {
    let axis = match value {
        Value::Number(n) => vec![n
            .as_f64()
            .ok_or_else(|| usage(format!("config key `{name}`: bad number")))?],
        Value::Array(items) => {
            let mut axis = Vec::with_capacity(items.len());
            for item in items {
                axis.push(
                    item.as_f64()
                        .ok_or_else(|| usage(format!("config key `{name}` must hold numbers")))?,
                );
            }
            axis
        }
        Value::String(s) => parse_axis(name, s)?,
        _ => {
            return Err(usage(format!(
                "config key `{name}` must be a number, list, or range"
            )))
        }
    };
    if axis.is_empty() {
        return Err(usage(format!("config key `{name}` is an empty list")));
    }
    Ok(axis)
}

/// Parse `0.4`, `0.2,0.6,1.0`, or `lo:hi:n` (inclusive linear range).
fn parse_axis(name: &str, text: &str) -> CliResult<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Err(usage(format!("--{name}: empty value list")));
    }
    let bad = |t: &str| usage(format!("--{name}: cannot parse `{t}` as a number"));
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(usage(format!("--{name}: ranges take the form lo:hi:count")));
        }
        let lo: f64 = parts[0].trim().parse().map_err(|_| bad(parts[0]))?;
        let hi: f64 = parts[1].trim().parse().map_err(|_| bad(parts[1]))?;
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|_| usage(format!("--{name}: range count must be an integer")))?;
        if count == 0 {
            return Err(usage(format!("--{name}: range count must be positive")));
        }
        if count == 1 {
            return Ok(vec![lo]);
        }
        return Ok((0..count)
            .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
            .collect());
    }
    let mut axis = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if part.is_empty() {
            continue;
        }
        axis.push(part.parse().map_err(|_| bad(part))?);
    }
    if axis.is_empty() {
        return Err(usage(format!("--{name}: empty value list")));
    }
    Ok(axis)
}

fn parse_window(text: &str) -> CliResult<(usize, usize)> {
    let (a, b) = text
        .split_once(':')
        .ok_or_else(|| usage("--window takes the form start:end"))?;
    let start = a
        .trim()
        .parse()
        .map_err(|_| usage(format!("--window: bad start `{a}`")))?;
    let end = b
        .trim()
        .parse()
        .map_err(|_| usage(format!("--window: bad end `{b}`")))?;
    Ok((start, end))
}

/// Entry point used by `main`; returns the process exit code.
pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(args) => cmd_simulate(&RunConfig::resolve(&args)?),
        Command::Drift(args) => cmd_drift(&RunConfig::resolve(&args)?),
        Command::Figure { name, args } => cmd_figure(&name, &RunConfig::resolve(&args)?),
        Command::Sweep(args) => cmd_sweep(&RunConfig::resolve(&args)?),
        Command::Crossover(args) => cmd_crossover(&RunConfig::resolve(&args)?),
    }
}

/// `simulate`: one trajectory, written as distribution + summary (csv) or a
/// single reparsable trajectory file (json).
pub fn cmd_simulate(cfg: &RunConfig) -> CliResult<()> {
    let gamma = cfg.scalar("gamma", &cfg.gammas)?;
    let theta = cfg.scalar("theta", &cfg.thetas)?;
    let eta = cfg.scalar("eta", &cfg.etas)?;
    let mu = cfg.scalar("mu", &cfg.mus)?;
    let params = cfg.params(gamma, theta, eta, mu, cfg.steps_or(8))?;
    let traj = evolve(&params).map_err(CliError::Engine)?;
    cfg.ensure_out_dir()?;
    match cfg.format {
        FormatArg::Csv => {
            cfg.write("distribution.csv", &trajectory_distribution_csv(&traj))?;
            cfg.write("summary.csv", &trajectory_summary_csv(&traj))?;
        }
        FormatArg::Json => {
            cfg.write(
                "trajectory.json",
                &trajectory_json(&traj).map_err(CliError::Engine)?,
            )?;
        }
    }
    Ok(())
}

/// The analytic regime of one parameter point, as named in drift reports.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum DriftRegime {
    Coherent,
    DephasedFull,
    DampedBeforeFull,
    DampedAfterFull,
    PartiallyCoherent,
}

impl DriftRegime {
    fn of(params: &WalkParams) -> Self {
        if params.eta == 0.0 && params.mu == 0.0 {
            DriftRegime::Coherent
        } else if params.eta == 1.0 {
            DriftRegime::DephasedFull
        } else if params.mu == 1.0 && params.damping_order == DampingOrder::BeforeLoss {
            DriftRegime::DampedBeforeFull
        } else if params.mu == 1.0 && params.damping_order == DampingOrder::AfterLoss {
            DriftRegime::DampedAfterFull
        } else {
            DriftRegime::PartiallyCoherent
        }
    }

    fn label(&self) -> &'static str {
        match self {
            DriftRegime::Coherent => "coherent",
            DriftRegime::DephasedFull => "dephased-full",
            DriftRegime::DampedBeforeFull => "damped-before-full",
            DriftRegime::DampedAfterFull => "damped-after-full",
            DriftRegime::PartiallyCoherent => "partially-coherent",
        }
    }
}

/// One row of a drift report.
#[derive(Clone, Debug, serde::Serialize)]
pub struct DriftRecord {
    pub gamma: f64,
    pub theta: f64,
    pub eta: f64,
    pub mu: f64,
    pub regime: String,
    pub v_closed: Option<f64>,
    pub v_spectral: Option<f64>,
    pub v_realspace: f64,
    pub spectral_minus_closed: Option<f64>,
    pub realspace_minus_closed: Option<f64>,
    pub k_star: Option<f64>,
    pub flags: Vec<String>,
}

fn flag_name(flag: VelocityFlag) -> &'static str {
    match flag {
        VelocityFlag::DegenerateSpectrum => "degenerate-spectrum",
        VelocityFlag::Saturated => "saturated",
        VelocityFlag::ReversedDirection => "reversed-direction",
        VelocityFlag::NearDegenerate => "near-degenerate",
    }
}

/// `drift`: per (gamma, theta) point, the drift velocity along every route
/// the regime admits, with discrepancies for auditing.
pub fn cmd_drift(cfg: &RunConfig) -> CliResult<()> {
    let eta = cfg.scalar("eta", &cfg.etas)?;
    let mu = cfg.scalar("mu", &cfg.mus)?;
    if cfg.gammas.is_empty() || cfg.thetas.is_empty() {
        return Err(usage("drift needs nonempty --gamma and --theta axes"));
    }
    let steps = cfg.steps_or(60);
    let window = cfg.fit_window(steps);
    let mut points = Vec::new();
    for &gamma in &cfg.gammas {
        for &theta in &cfg.thetas {
            points.push((gamma, theta));
        }
    }
    // validate up front so bad parameters exit with a usage error
    for &(gamma, theta) in &points {
        cfg.params(gamma, theta, eta, mu, steps)?;
    }

    let records = cfg.run_parallel(points, |&(gamma, theta)| {
        let params = cfg.params(gamma, theta, eta, mu, steps)?;
        let regime = DriftRegime::of(&params);
        let traj = evolve(&params).map_err(CliError::Engine)?;
        let est = estimate_drift(&traj, window).map_err(CliError::Engine)?;

        let mut flags = Vec::new();
        let closed = closed_form_velocities(gamma, theta).map_err(CliError::Engine)?;
        // the closed form matching this regime, if the regime has one
        let (v_closed, closed_flag) = match regime {
            DriftRegime::Coherent => (Some(closed.coherent), closed.coherent_flag),
            DriftRegime::DephasedFull => (Some(closed.dephased), closed.dephased_flag),
            DriftRegime::DampedAfterFull => (Some(closed.damped_after_loss), closed.damped_flag),
            _ => (None, None),
        };
        if let Some(flag) = closed_flag {
            flags.push(flag_name(flag).to_string());
        }
        // a degenerate spectrum is a property of the point, not a failure
        let mut flag_degenerate = |result: Result<VelocityReport, WalkError>| match result {
            Ok(report) => Ok(Some(report)),
            Err(WalkError::DegenerateSpectrum { .. }) => {
                let name = flag_name(VelocityFlag::DegenerateSpectrum).to_string();
                if !flags.contains(&name) {
                    flags.push(name);
                }
                Ok(None)
            }
            Err(e) => Err(CliError::Engine(e)),
        };
        let spectral: Option<VelocityReport> = match regime {
            DriftRegime::Coherent if gamma > 0.0 => {
                flag_degenerate(coherent_drift_spectral(gamma, theta))?
            }
            DriftRegime::DephasedFull => flag_degenerate(incoherent_drift_spectral(
                gamma,
                theta,
                IncoherentRegime::Dephased,
            ))?,
            DriftRegime::DampedAfterFull if gamma < 1.0 => flag_degenerate(
                incoherent_drift_spectral(gamma, theta, IncoherentRegime::DampedAfterLoss),
            )?,
            _ => None,
        };
        if let Some(flag) = spectral.as_ref().and_then(|r| r.flag) {
            let name = flag_name(flag).to_string();
            if !flags.contains(&name) {
                flags.push(name);
            }
        }
        let (v_spectral, k_star) = match &spectral {
            Some(r) => (Some(r.v_spectral), Some(r.k_star)),
            None => (None, None),
        };
        Ok(DriftRecord {
            gamma,
            theta,
            eta,
            mu,
            regime: regime.label().to_string(),
            v_closed,
            v_spectral,
            v_realspace: est.velocity,
            spectral_minus_closed: v_closed.zip(v_spectral).map(|(c, s)| s - c),
            realspace_minus_closed: v_closed.map(|c| est.velocity - c),
            k_star,
            flags,
        })
    })?;

    cfg.ensure_out_dir()?;
    match cfg.format {
        FormatArg::Csv => cfg.write("drift.csv", &drift_records_csv(&records)),
        FormatArg::Json => cfg.write(
            "drift.json",
            &serde_json::to_string(&records).map_err(WalkError::from)?,
        ),
    }
}

fn opt_num(v: Option<f64>) -> String {
    v.map(csv_num).unwrap_or_default()
}

fn drift_records_csv(records: &[DriftRecord]) -> String {
    let mut out = String::from(
        "gamma,theta,eta,mu,regime,v_closed,v_spectral,v_realspace,\
         spectral_minus_closed,realspace_minus_closed,k_star,flags\n",
    );
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            csv_num(r.gamma),
            csv_num(r.theta),
            csv_num(r.eta),
            csv_num(r.mu),
            r.regime,
            opt_num(r.v_closed),
            opt_num(r.v_spectral),
            csv_num(r.v_realspace),
            opt_num(r.spectral_minus_closed),
            opt_num(r.realspace_minus_closed),
            opt_num(r.k_star),
            r.flags.join(";"),
        );
    }
    out
}

/// `sweep`: closed-form velocity surface on the (gamma, theta) grid.
pub fn cmd_sweep(cfg: &RunConfig) -> CliResult<()> {
    if cfg.gammas.is_empty() || cfg.thetas.is_empty() {
        return Err(usage("sweep needs nonempty --gamma and --theta axes"));
    }
    let mut points = Vec::new();
    for &gamma in &cfg.gammas {
        for &theta in &cfg.thetas {
            points.push((gamma, theta));
        }
    }
    let mut rows = cfg.run_parallel(points, |&(gamma, theta)| {
        let v = closed_form_velocities(gamma, theta).map_err(CliError::Engine)?;
        Ok((
            gamma,
            theta,
            v.coherent,
            v.dephased,
            v.coherent - v.dephased,
        ))
    })?;
    rows.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    cfg.ensure_out_dir()?;
    match cfg.format {
        FormatArg::Csv => {
            let mut out = String::from("gamma,theta,v_coherent,v_dephased,v_difference\n");
            for (g, t, vc, vi, diff) in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    csv_num(*g),
                    csv_num(*t),
                    csv_num(*vc),
                    csv_num(*vi),
                    csv_num(*diff),
                );
            }
            cfg.write("sweep.csv", &out)
        }
        FormatArg::Json => {
            let objects: Vec<Value> = rows
                .iter()
                .map(|(g, t, vc, vi, diff)| {
                    serde_json::json!({
                        "gamma": g,
                        "theta": t,
                        "v_coherent": vc,
                        "v_dephased": vi,
                        "v_difference": diff,
                    })
                })
                .collect();
            cfg.write(
                "sweep.json",
                &serde_json::to_string(&objects).map_err(WalkError::from)?,
            )
        }
    }
}

/// `crossover`: gamma* per theta, by bisection on the closed forms.
pub fn cmd_crossover(cfg: &RunConfig) -> CliResult<()> {
    if cfg.thetas.is_empty() {
        return Err(usage("crossover needs a nonempty --theta axis"));
    }
    let rows = cfg.run_parallel(cfg.thetas.clone(), |&theta| {
        let found = crossover_gamma(theta).map_err(CliError::Engine)?;
        Ok((theta, found))
    })?;
    cfg.ensure_out_dir()?;
    match cfg.format {
        FormatArg::Csv => {
            let mut out = String::from("theta,gamma_star,status\n");
            for (theta, found) in &rows {
                let (value, status) = match found {
                    Some(g) => (csv_num(*g), "crossover"),
                    None => (String::new(), "no-crossover"),
                };
                let _ = writeln!(out, "{},{value},{status}", csv_num(*theta));
            }
            cfg.write("crossover.csv", &out)
        }
        FormatArg::Json => {
            let objects: Vec<Value> = rows
                .iter()
                .map(|(theta, found)| serde_json::json!({ "theta": theta, "gamma_star": found }))
                .collect();
            cfg.write(
                "crossover.json",
                &serde_json::to_string(&objects).map_err(WalkError::from)?,
            )
        }
    }
}

/// One figure sub-run: a parameter set at one time scale.
struct FigureRun {
    tag: String,
    gamma: f64,
    eta: f64,
    mu: f64,
    order: DampingOrder,
    steps: usize,
}

/// `figure`: the datasets behind the built-in figures.
///
/// Each parameter set is simulated at both the 8-step experimental scale and
/// a 60-step asymptotic scale; distributions go to one file per run and the
/// center-of-mass series are collected into one table per figure. fig2 also
/// gets the closed-form velocity curves on a 200-point gamma grid.
pub fn cmd_figure(name: &str, cfg: &RunConfig) -> CliResult<()> {
    let theta = cfg.scalar("theta", &cfg.thetas)?;
    let mut runs = Vec::new();
    let mut push_scales = |gamma: f64, eta: f64, mu: f64, order: DampingOrder| {
        for steps in [8usize, 60] {
            let knob = if order == DampingOrder::None {
                format!("eta{}", trim_float(eta))
            } else {
                format!("mu{}", trim_float(mu))
            };
            runs.push(FigureRun {
                tag: format!("{name}_dist_gamma{}_{knob}_steps{steps}", trim_float(gamma)),
                gamma,
                eta,
                mu,
                order,
                steps,
            });
        }
    };
    match name {
        "fig2" => {
            for gamma in [0.4, 0.854, 0.93] {
                for eta in [0.0, 1.0] {
                    push_scales(gamma, eta, 0.0, DampingOrder::None);
                }
            }
        }
        "fig3" => {
            for (gamma, mu) in [(0.4, 0.2), (0.4, 0.6), (0.4, 1.0), (0.93, 1.0)] {
                push_scales(gamma, 0.0, mu, DampingOrder::BeforeLoss);
            }
        }
        "fig4" => {
            for gamma in [0.4, 0.93] {
                for mu in [0.2, 0.6, 1.0] {
                    push_scales(gamma, 0.0, mu, DampingOrder::AfterLoss);
                }
            }
        }
        other => return Err(usage(format!("unknown figure `{other}`"))),
    }

    let results = cfg.run_parallel(runs, |run| {
        let params = WalkParams {
            theta,
            gamma: run.gamma,
            eta: run.eta,
            mu: run.mu,
            damping_order: run.order,
            steps: run.steps,
            half_width: run.steps.max(1),
        };
        params.validate().map_err(CliError::Engine)?;
        let traj = evolve(&params).map_err(CliError::Engine)?;
        Ok((run.tag.clone(), params, traj))
    })?;

    cfg.ensure_out_dir()?;
    let mut summary = String::from("gamma,eta,mu,order,steps,t,center_of_mass,survival,variance\n");
    for (tag, params, traj) in &results {
        match cfg.format {
            FormatArg::Csv => {
                cfg.write(&format!("{tag}.csv"), &trajectory_distribution_csv(traj))?
            }
            FormatArg::Json => cfg.write(
                &format!("{tag}.json"),
                &trajectory_json(traj).map_err(CliError::Engine)?,
            )?,
        }
        let order = match params.damping_order {
            DampingOrder::None => "none",
            DampingOrder::BeforeLoss => "before",
            DampingOrder::AfterLoss => "after",
        };
        for t in 0..=traj.steps() {
            let _ = writeln!(
                summary,
                "{},{},{},{order},{},{t},{},{},{}",
                csv_num(params.gamma),
                csv_num(params.eta),
                csv_num(params.mu),
                params.steps,
                csv_num(traj.center_of_mass()[t]),
                csv_num(traj.survival()[t]),
                csv_num(traj.variance()[t]),
            );
        }
    }
    cfg.write(&format!("{name}_center_of_mass.csv"), &summary)?;

    if name == "fig2" {
        let mut curve = String::from("gamma,v_coherent,v_dephased,v_difference\n");
        for i in 0..200 {
            let gamma = i as f64 / 199.0;
            let v = closed_form_velocities(gamma, theta).map_err(CliError::Engine)?;
            let _ = writeln!(
                curve,
                "{},{},{},{}",
                csv_num(gamma),
                csv_num(v.coherent),
                csv_num(v.dephased),
                csv_num(v.coherent - v.dephased),
            );
        }
        cfg.write("fig2_velocity_vs_gamma.csv", &curve)?;
    }
    Ok(())
}

fn trim_float(x: f64) -> String {
    let s = format!("{x}");
    s.replace('.', "p")
}

/// Write one trajectory with the simulate file layout; used by tests.
pub fn write_trajectory(cfg: &RunConfig, traj: &Trajectory) -> CliResult<()> {
    cfg.ensure_out_dir()?;
    match cfg.format {
        FormatArg::Csv => {
            cfg.write("distribution.csv", &trajectory_distribution_csv(traj))?;
            cfg.write("summary.csv", &trajectory_summary_csv(traj))?;
            Ok(())
        }
        FormatArg::Json => cfg.write(
            "trajectory.json",
            &trajectory_json(traj).map_err(CliError::Engine)?,
        ),
    }
}
