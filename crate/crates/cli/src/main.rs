//! Seeded, CSV-first command line for Rashomon-ratio experiments.
//!
//! Every run prints a header embedding the tool version and the canonical
//! command line, so any output file can be reproduced byte-for-byte by
//! re-running its own header. Seeds default to a fixed constant, never to
//! entropy.

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rashomon_core::dataset::{load_and_normalize, parse_numeric};
use rashomon_core::gaussian::{
    bayes_error, ratio_vs_distance_sweep, sample_mixture, sample_reducible_errors, GaussianMixture,
};
use rashomon_core::measures::{estimate_ratio_mc, hoeffding_epsilon, LossKind, LossSample};
use rashomon_core::relu::{bound_sweep, GramStats, Prefactor};
use rashomon_core::subset::{required_subset_size_raw, tarp_bound, tarp_train, SubsetPlan};
use std::fmt::Write as _;
use std::path::PathBuf;

const DEFAULT_SEED: u64 = 42;

#[derive(Parser)]
#[command(
    name = "rashomon",
    version,
    about = "Rashomon ratio estimation and bounds"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Significant digits for numeric output (full precision: 17)
    #[arg(long, global = true, default_value_t = 6)]
    precision: usize,

    /// Write output to a file instead of stdout
    #[arg(long, global = true)]
    output: Option<PathBuf>,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Pretty,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Pretty => "pretty",
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Estimate the true Rashomon ratio of affine classifiers on an
    /// antipodal Gaussian mixture, with per-sample rows for replotting
    GaussRatio(GaussRatioArgs),
    /// Ratio as a function of the distance between the means
    GaussSweep(GaussSweepArgs),
    /// Gram-matrix statistics and the ReLU ratio lower bound over a
    /// (kappa, gamma) grid
    ReluBound(ReluBoundArgs),
    /// Subset-size calculus: required draws for a ratio, or vice versa
    SubsetPlan(SubsetPlanArgs),
    /// Train thresholding-after-random-projection and report its bound
    Tarp(TarpArgs),
    /// Generic Monte-Carlo ratio over a file of loss values
    EstimateRatio(EstimateRatioArgs),
}

#[derive(Args)]
struct GaussRatioArgs {
    /// Data dimension
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Distance between the two means
    #[arg(long)]
    dist: f64,
    #[arg(long, default_value_t = 0.05)]
    gamma: f64,
    /// Number of classifiers to draw
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Args)]
struct GaussSweepArgs {
    #[arg(long)]
    d: usize,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    #[arg(long, default_value_t = 0.05)]
    gamma: f64,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0.0)]
    dist_min: f64,
    #[arg(long, default_value_t = 10.0)]
    dist_max: f64,
    #[arg(long, default_value_t = 0.1)]
    step: f64,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PrefactorArg {
    OneMinusDelta,
    ThreeHalvesDelta,
}

impl PrefactorArg {
    fn name(self) -> &'static str {
        match self {
            PrefactorArg::OneMinusDelta => "one-minus-delta",
            PrefactorArg::ThreeHalvesDelta => "three-halves-delta",
        }
    }
}

impl From<PrefactorArg> for Prefactor {
    fn from(p: PrefactorArg) -> Prefactor {
        match p {
            PrefactorArg::OneMinusDelta => Prefactor::OneMinusDelta,
            PrefactorArg::ThreeHalvesDelta => Prefactor::OneMinusThreeHalvesDelta,
        }
    }
}

#[derive(Args)]
struct ReluBoundArgs {
    /// CSV dataset: feature columns then a label column
    #[arg(long)]
    data: PathBuf,
    /// Two class names, positive first: "A,B"
    #[arg(long)]
    classes: String,
    /// First row is a header
    #[arg(long, default_value_t = false)]
    header: bool,
    /// Hidden-layer width
    #[arg(long)]
    m: usize,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    /// Comma-separated gamma levels
    #[arg(long, default_value = "0.1,0.11,0.12")]
    gammas: String,
    #[arg(long, default_value_t = 2.0)]
    kappa_min: f64,
    #[arg(long, default_value_t = 10.0)]
    kappa_max: f64,
    #[arg(long, default_value_t = 0.25)]
    kappa_step: f64,
    #[arg(long, value_enum, default_value_t = PrefactorArg::ThreeHalvesDelta)]
    prefactor: PrefactorArg,
    /// Also write the Gram matrix as CSV to this path
    #[arg(long)]
    export_gram: Option<PathBuf>,
}

#[derive(Args)]
struct SubsetPlanArgs {
    /// Known Rashomon ratio of the big family
    #[arg(long)]
    ratio: Option<f64>,
    /// Subset size to solve the minimal ratio for
    #[arg(long)]
    n_subset: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
}

#[derive(Args)]
struct TarpArgs {
    /// CSV dataset with numeric +-1 labels (omit for a synthetic mixture)
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = false)]
    header: bool,
    /// Synthetic mixture dimension
    #[arg(long)]
    d: Option<usize>,
    /// Synthetic distance between means
    #[arg(long)]
    dist: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Synthetic sample count
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 7)]
    n_directions: usize,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    #[arg(long, default_value_t = 0.05)]
    gamma: f64,
    /// Infimum of the true loss over the big family (defaults to the Bayes
    /// error for synthetic data, 0 for file data)
    #[arg(long)]
    inf_loss: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KindArg {
    TrueReducible,
    TrueAnchored,
    EmpiricalAnchored,
}

impl KindArg {
    fn name(self) -> &'static str {
        match self {
            KindArg::TrueReducible => "true-reducible",
            KindArg::TrueAnchored => "true-anchored",
            KindArg::EmpiricalAnchored => "empirical-anchored",
        }
    }
}

impl From<KindArg> for LossKind {
    fn from(k: KindArg) -> LossKind {
        match k {
            KindArg::TrueReducible => LossKind::TrueReducible,
            KindArg::TrueAnchored => LossKind::TrueAnchored,
            KindArg::EmpiricalAnchored => LossKind::EmpiricalAnchored,
        }
    }
}

#[derive(Args)]
struct EstimateRatioArgs {
    /// File with one loss value per line (# comments allowed)
    #[arg(long)]
    losses: PathBuf,
    #[arg(long)]
    gamma: f64,
    #[arg(long, value_enum, default_value_t = KindArg::EmpiricalAnchored)]
    kind: KindArg,
}

/// %g-style formatting with `sig` significant digits.
fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sig = sig.clamp(1, 17);
    let exp = x.abs().log10().floor() as i32;
    if exp < -4 || exp >= sig as i32 {
        format!("{:.*e}", sig - 1, x)
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        format!("{:.*}", decimals, x)
    }
}

struct Report {
    text: String,
    precision: usize,
}

impl Report {
    fn new(cmd_line: &str, precision: usize) -> Report {
        let mut text = String::new();
        let _ = writeln!(text, "# rashomon {}", env!("CARGO_PKG_VERSION"));
        let _ = writeln!(text, "# cmd: {cmd_line}");
        Report { text, precision }
    }

    fn num(&self, x: f64) -> String {
        fmt_sig(x, self.precision)
    }

    fn comment(&mut self, line: &str) {
        let _ = writeln!(self.text, "# {line}");
    }

    fn key_num(&mut self, key: &str, x: f64) {
        let v = self.num(x);
        let _ = writeln!(self.text, "# {key} = {v}");
    }

    fn row(&mut self, line: &str) {
        let _ = writeln!(self.text, "{line}");
    }
}

fn global_suffix(cli: &Cli) -> String {
    format!(
        " --precision {} --format {}",
        cli.precision,
        cli.format.name()
    )
}

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            if let Some(path) = &cli.output {
                if let Err(e) = std::fs::write(path, &report) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    std::process::exit(1);
                }
            } else {
                print!("{report}");
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::exit(1);
        }
    }
}

fn run(cli: &Cli) -> Result<String> {
    match &cli.cmd {
        Cmd::GaussRatio(a) => gauss_ratio(cli, a),
        Cmd::GaussSweep(a) => gauss_sweep(cli, a),
        Cmd::ReluBound(a) => relu_bound(cli, a),
        Cmd::SubsetPlan(a) => subset_plan(cli, a),
        Cmd::Tarp(a) => tarp(cli, a),
        Cmd::EstimateRatio(a) => estimate_ratio(cli, a),
    }
}

fn gauss_ratio(cli: &Cli, a: &GaussRatioArgs) -> Result<String> {
    let cmd = format!(
        "rashomon gauss-ratio --d {} --sigma {} --dist {} --gamma {} --n {} --seed {}{}",
        a.d,
        a.sigma,
        a.dist,
        a.gamma,
        a.n,
        a.seed,
        global_suffix(cli)
    );
    let gm = GaussianMixture::antipodal_on_axis(a.d, a.dist, a.sigma)?;
    let samples = sample_reducible_errors(&gm, a.n, a.seed)?;
    let in_set = samples.iter().filter(|(_, e)| *e <= a.gamma).count();
    let ratio = in_set as f64 / a.n as f64;
    // estimate is within this epsilon of the true ratio with 98% confidence
    let eps98 = hoeffding_epsilon(a.n, 0.02)?;

    let mut r = Report::new(&cmd, cli.precision);
    r.key_num("ratio", ratio);
    r.comment(&format!("count = {in_set} of {}", a.n));
    r.key_num("hoeffding_epsilon_98pct", eps98);
    r.key_num("bayes_error", bayes_error(&gm));
    r.key_num("gamma", a.gamma);
    if cli.format == Format::Pretty {
        return Ok(r.text);
    }
    let mut header = String::from("index");
    if a.d == 1 {
        header.push_str(",theta");
    }
    for k in 0..a.d {
        let _ = write!(header, ",p{k}");
    }
    header.push_str(",t,reducible_error,in_rashomon");
    r.row(&header);
    for (i, (c, e)) in samples.iter().enumerate() {
        let mut line = format!("{i}");
        if a.d == 1 {
            let _ = write!(line, ",{}", r.num(c.theta().expect("d = 1")));
        }
        for v in c.p() {
            let _ = write!(line, ",{}", r.num(*v));
        }
        let _ = write!(
            line,
            ",{},{},{}",
            r.num(c.t()),
            r.num(*e),
            u8::from(*e <= a.gamma)
        );
        r.row(&line);
    }
    Ok(r.text)
}

fn gauss_sweep(cli: &Cli, a: &GaussSweepArgs) -> Result<String> {
    let cmd = format!(
        "rashomon gauss-sweep --d {} --sigma {} --gamma {} --n {} --dist-min {} --dist-max {} --step {} --seed {}{}",
        a.d, a.sigma, a.gamma, a.n, a.dist_min, a.dist_max, a.step, a.seed, global_suffix(cli)
    );
    if a.dist_min > a.dist_max {
        bail!(
            "empty grid: --dist-min {} exceeds --dist-max {}",
            a.dist_min,
            a.dist_max
        );
    }
    if a.step.is_nan() || a.step <= 0.0 {
        bail!("--step must be positive");
    }
    let n_points = ((a.dist_max - a.dist_min) / a.step).floor() as usize + 1;
    let grid: Vec<f64> = (0..n_points)
        .map(|i| a.dist_min + i as f64 * a.step)
        .collect();
    let curve = ratio_vs_distance_sweep(a.d, a.sigma, a.gamma, a.n, &grid, a.seed)?;
    let (arg_min, min_ratio) = curve.min_point();

    let mut r = Report::new(&cmd, cli.precision);
    r.key_num("min_ratio", min_ratio);
    r.key_num("argmin_dist", arg_min);
    r.comment(&format!("points = {}", grid.len()));
    if cli.format == Format::Pretty {
        return Ok(r.text);
    }
    r.row("dist,ratio");
    for (d, v) in curve.distances.iter().zip(&curve.ratios) {
        let line = format!("{},{}", r.num(*d), r.num(*v));
        r.row(&line);
    }
    Ok(r.text)
}

fn relu_bound(cli: &Cli, a: &ReluBoundArgs) -> Result<String> {
    let cmd = format!(
        "rashomon relu-bound --data {} --classes {}{} --m {} --delta {} --gammas {} --kappa-min {} --kappa-max {} --kappa-step {} --prefactor {}{}",
        a.data.display(),
        a.classes,
        if a.header { " --header" } else { "" },
        a.m,
        a.delta,
        a.gammas,
        a.kappa_min,
        a.kappa_max,
        a.kappa_step,
        a.prefactor.name(),
        global_suffix(cli)
    );
    let (pos, neg) = a
        .classes
        .split_once(',')
        .ok_or_else(|| anyhow!("--classes expects two comma-separated names"))?;
    let text = std::fs::read_to_string(&a.data)
        .with_context(|| format!("cannot read {}", a.data.display()))?;
    let ds = load_and_normalize(&text, pos.trim(), neg.trim(), a.header)?;

    let stats = match GramStats::compute(&ds) {
        Ok(s) => s,
        Err(rashomon_core::Error::NotPositiveDefinite) => {
            let mut msg = String::from("Gram matrix is not positive-definite");
            let close = ds.near_duplicate_pairs(1e-9);
            if !close.is_empty() {
                let _ = write!(msg, "; near-duplicate input rows:");
                for (i, j, dot) in close.iter().take(8) {
                    let _ = write!(msg, " ({i},{j} dot={dot:.12})");
                }
            }
            bail!(msg);
        }
        Err(e) => return Err(e.into()),
    };

    let gammas: Vec<f64> = a
        .gammas
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| anyhow!("bad gamma {s:?}"))
        })
        .collect::<Result<_>>()?;
    if a.kappa_min > a.kappa_max {
        bail!("empty grid: --kappa-min exceeds --kappa-max");
    }
    if a.kappa_step.is_nan() || a.kappa_step <= 0.0 {
        bail!("--kappa-step must be positive");
    }
    let n_kappa = ((a.kappa_max - a.kappa_min) / a.kappa_step).floor() as usize + 1;
    let kappas: Vec<f64> = (0..n_kappa)
        .map(|i| a.kappa_min + i as f64 * a.kappa_step)
        .collect();

    let cells = bound_sweep(
        stats.epsilon_dominant,
        ds.dim(),
        a.m,
        a.delta,
        &gammas,
        &kappas,
        a.prefactor.into(),
    )?;

    let mut r = Report::new(&cmd, cli.precision);
    r.comment(&format!("n = {}, d = {}, m = {}", ds.n(), ds.dim(), a.m));
    r.key_num("lambda0", stats.lambda0);
    r.key_num("y_h_inv_y", stats.y_h_inv_y);
    r.key_num("epsilon_dominant", stats.epsilon_dominant);
    r.comment("epsilon is the dominant term sqrt(y' H^-1 y) only; the O(n*kappa/(lambda0*delta)) and poly(n,1/lambda0,1/delta)/(n^(1/4)*kappa^(1/2)) remainders are unevaluated");
    if ds.has_duplicates() {
        r.comment("warning: dataset contains duplicate rows");
    }
    if kappas.iter().any(|k| k * k > 1.0) {
        r.comment("warning: kappa above 1 leaves the derivation's initialization regime");
    }
    if let Some(path) = &a.export_gram {
        std::fs::write(path, stats.h.to_csv())
            .with_context(|| format!("cannot write {}", path.display()))?;
        r.comment(&format!("gram matrix written to {}", path.display()));
    }
    if cli.format == Format::Pretty {
        for c in cells.iter().take(6) {
            r.comment(&format!(
                "kappa {} gamma {}: log bound {}, bound {}",
                r.num(c.kappa),
                r.num(c.gamma),
                r.num(c.log_value),
                r.num(c.value)
            ));
        }
        r.comment(&format!("({} cells total)", cells.len()));
        return Ok(r.text);
    }
    r.row("kappa,gamma,log_bound,bound");
    for c in &cells {
        let line = format!(
            "{},{},{},{}",
            r.num(c.kappa),
            r.num(c.gamma),
            r.num(c.log_value),
            r.num(c.value)
        );
        r.row(&line);
    }
    Ok(r.text)
}

fn subset_plan(cli: &Cli, a: &SubsetPlanArgs) -> Result<String> {
    let (plan, raw, cmd) = match (a.ratio, a.n_subset) {
        (Some(ratio), None) => {
            let cmd = format!(
                "rashomon subset-plan --ratio {} --delta {}{}",
                ratio,
                a.delta,
                global_suffix(cli)
            );
            let plan = SubsetPlan::for_ratio(ratio, a.delta)?;
            (plan, Some(required_subset_size_raw(ratio, a.delta)?), cmd)
        }
        (None, Some(n)) => {
            let cmd = format!(
                "rashomon subset-plan --n-subset {} --delta {}{}",
                n,
                a.delta,
                global_suffix(cli)
            );
            (SubsetPlan::for_size(n, a.delta)?, None, cmd)
        }
        _ => bail!("give exactly one of --ratio or --n-subset"),
    };
    let mut r = Report::new(&cmd, cli.precision);
    r.key_num("ratio", plan.ratio);
    r.key_num("delta", plan.delta);
    r.comment(&format!("n_subset = {}", plan.n_subset));
    if let Some(raw) = raw {
        r.key_num("n_subset_raw", raw);
    }
    if cli.format == Format::Csv {
        r.row("ratio,delta,n_subset");
        let line = format!(
            "{},{},{}",
            r.num(plan.ratio),
            r.num(plan.delta),
            plan.n_subset
        );
        r.row(&line);
    }
    Ok(r.text)
}

fn tarp(cli: &Cli, a: &TarpArgs) -> Result<String> {
    if a.n_directions == 0 {
        bail!("--n-directions must be positive");
    }
    let (ds, inf_loss, source) = match &a.data {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))?;
            let ds = parse_numeric(&text, a.header)?;
            (
                ds,
                a.inf_loss.unwrap_or(0.0),
                format!(
                    "--data {}{}",
                    path.display(),
                    if a.header { " --header" } else { "" }
                ),
            )
        }
        None => {
            let (d, dist, n) = match (a.d, a.dist, a.n) {
                (Some(d), Some(dist), Some(n)) => (d, dist, n),
                _ => bail!("synthetic mode needs --d, --dist, and --n (or give --data)"),
            };
            let gm = GaussianMixture::antipodal_on_axis(d, dist, a.sigma)?;
            let ds = sample_mixture(&gm, n, a.seed ^ 0x5a5a_5a5a)?;
            (
                ds,
                a.inf_loss.unwrap_or_else(|| bayes_error(&gm)),
                format!("--d {} --dist {} --sigma {} --n {}", d, dist, a.sigma, n),
            )
        }
    };
    let cmd = format!(
        "rashomon tarp {source} --n-directions {} --delta {} --gamma {} --seed {}{}{}",
        a.n_directions,
        a.delta,
        a.gamma,
        a.seed,
        a.inf_loss
            .map(|v| format!(" --inf-loss {v}"))
            .unwrap_or_default(),
        global_suffix(cli)
    );
    let model = tarp_train(&ds, a.n_directions, a.seed)?;
    let bound = tarp_bound(ds.n(), a.n_directions, a.delta, inf_loss, a.gamma)?;

    let mut r = Report::new(&cmd, cli.precision);
    r.key_num("train_error", model.train_error);
    r.comment(&format!("best_direction_index = {}", model.best_index));
    r.key_num("best_threshold", model.best_threshold);
    r.key_num("best_orientation", model.best_orientation);
    r.key_num("inf_loss", inf_loss);
    r.key_num("bound_lower", bound.lower);
    r.key_num("bound_upper", bound.upper);
    r.comment(&format!(
        "each bound side holds with probability at least {}",
        r.num(1.0 - a.delta)
    ));
    if cli.format == Format::Csv {
        r.row("train_error,best_index,best_threshold,best_orientation,bound_lower,bound_upper");
        let line = format!(
            "{},{},{},{},{},{}",
            r.num(model.train_error),
            model.best_index,
            r.num(model.best_threshold),
            r.num(model.best_orientation),
            r.num(bound.lower),
            r.num(bound.upper)
        );
        r.row(&line);
    }
    Ok(r.text)
}

fn estimate_ratio(cli: &Cli, a: &EstimateRatioArgs) -> Result<String> {
    let cmd = format!(
        "rashomon estimate-ratio --losses {} --gamma {} --kind {}{}",
        a.losses.display(),
        a.gamma,
        a.kind.name(),
        global_suffix(cli)
    );
    let text = std::fs::read_to_string(&a.losses)
        .with_context(|| format!("cannot read {}", a.losses.display()))?;
    let kind: LossKind = a.kind.into();
    let mut samples = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .map_err(|_| anyhow!("line {}: not a number: {line:?}", idx + 1))?;
        samples.push(LossSample::new(v, kind)?);
    }
    let est = estimate_ratio_mc(&samples, a.gamma)?;
    let eps98 = hoeffding_epsilon(est.n_samples, 0.02)?;

    let mut r = Report::new(&cmd, cli.precision);
    r.key_num("ratio", est.value);
    r.comment(&format!("count = {} of {}", est.count, est.n_samples));
    r.key_num("gamma", est.gamma);
    r.key_num("hoeffding_epsilon_98pct", eps98);
    r.comment(&format!("kind = {}", a.kind.name()));
    if cli.format == Format::Csv {
        r.row("ratio,count,n,gamma");
        let line = format!(
            "{},{},{},{}",
            r.num(est.value),
            est.count,
            est.n_samples,
            r.num(est.gamma)
        );
        r.row(&line);
    }
    Ok(r.text)
}
