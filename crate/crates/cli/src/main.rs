use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use hulc::simlab::{
    band_grid, isotonic_band, run_coverage, scenario, targets, BandMethod, ScenarioParams, SimMethod,
    CSV_HEADER, LM_GAMMA_TARGETS, MULTIREG_SLOPE,
};
use hulc::{
    adaptive_hulc, estimators, hulc_interval, hulc_interval_fixed_b, solve_budget, unimodal_hulc,
    AdaptiveParams, Dataset, Roles, Stage, Streams, SubsampleSize,
};
use serde_json::json;

mod io;

#[derive(Parser)]
#[command(name = "hulc", version, about = "Confidence sets from hulls of estimates on disjoint data splits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print the split budget B for a grid of miscoverage levels and median biases.
    Btable(BtableArgs),
    /// Build one confidence set from a CSV file and print it as JSON.
    Ci(CiArgs),
    /// Monte-Carlo coverage and width for a registered scenario.
    Simulate(SimulateArgs),
    /// Simultaneous band for a monotone regression function.
    Band(BandArgs),
    /// Write one dataset drawn from a scenario as CSV.
    Gen(GenArgs),
    /// Re-derive the stored regression targets by large-sample least squares.
    Targets(TargetsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args)]
struct BtableArgs {
    #[arg(long, value_delimiter = ',', default_values_t = [0.15, 0.1, 0.05])]
    alpha: Vec<f64>,
    /// Defaults to 0, 0.05, ..., 0.4.
    #[arg(long, value_delimiter = ',')]
    delta: Vec<f64>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum CiMethod {
    Hulc,
    FixedB,
    Adaptive,
    Unimodal,
}

/// Parameters shared by the adaptive and unimodal constructions.
#[derive(Args, Clone)]
struct MethodArgs {
    /// Median-bias bound; defaults to the estimator's own (hulc) or 1/2 (unimodal).
    #[arg(long)]
    delta: Option<f64>,
    /// Stretch factor for the unimodal method.
    #[arg(long, default_value_t = hulc::unimodal::DEFAULT_T)]
    t: f64,
    /// `auto` for floor(n^(2/3)), or an explicit size.
    #[arg(long, default_value = "auto")]
    subsample_size: String,
    #[arg(long, default_value_t = 1000)]
    subsamples: usize,
    #[arg(long, default_value_t = 0.45)]
    delta_cap: f64,
    /// Fail instead of clipping the estimated median bias.
    #[arg(long)]
    strict_cap: bool,
}

impl MethodArgs {
    fn adaptive(&self) -> Result<AdaptiveParams> {
        let subsample_size = match self.subsample_size.as_str() {
            "auto" => SubsampleSize::Auto,
            s => SubsampleSize::Fixed(
                s.parse()
                    .map_err(|_| anyhow!("--subsample-size must be `auto` or a positive integer, got `{s}`"))?,
            ),
        };
        Ok(AdaptiveParams {
            subsample_size,
            subsamples: self.subsamples,
            delta_cap: self.delta_cap,
            strict_cap: self.strict_cap,
        })
    }
}

#[derive(Args)]
struct CiArgs {
    #[arg(long)]
    input: PathBuf,
    /// mean, median, median-lower, binom, ols:<k>, uniform-endpoint, uniform-max, sqmean, sqmean-clamped, isotonic:<x0>
    #[arg(long)]
    estimator: String,
    #[arg(long, value_enum, default_value_t = CiMethod::Hulc)]
    method: CiMethod,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Split count for `fixed-b`.
    #[arg(long)]
    b: Option<usize>,
    /// Column holding univariate samples (default: the first).
    #[arg(long)]
    column: Option<String>,
    /// Regression response (default: `y`, else the last column).
    #[arg(long)]
    response: Option<String>,
    /// Widen by ln 2 / m where the estimator supports it.
    #[arg(long)]
    inflate: bool,
    #[command(flatten)]
    params: MethodArgs,
    #[arg(long, env = "HULC_SEED")]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SimMethodArg {
    Hulc,
    Adaptive,
    Unimodal,
    Wald,
}

#[derive(Args)]
struct ScenarioArgs {
    #[arg(long)]
    scenario: String,
    #[arg(long, default_value_t = 0.0)]
    gamma: f64,
    #[arg(long, default_value_t = 0.0)]
    mu: f64,
    #[arg(long, default_value_t = 0.3)]
    p: f64,
    #[arg(long, default_value_t = 0.75)]
    x0: f64,
}

impl ScenarioArgs {
    fn params(&self) -> ScenarioParams {
        ScenarioParams {
            gamma: self.gamma,
            mu: self.mu,
            p: self.p,
            x0: self.x0,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = SimMethodArg::Hulc)]
    method: SimMethodArg,
    #[command(flatten)]
    params: MethodArgs,
    #[arg(long, env = "HULC_SEED")]
    seed: Option<u64>,
    /// CSV destination; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum BandMethodArg {
    Adaptive,
    Unimodal,
}

#[derive(Args)]
struct BandArgs {
    /// CSV with columns `x` and `y`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 25)]
    points: usize,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, value_enum, default_value_t = BandMethodArg::Adaptive)]
    method: BandMethodArg,
    #[command(flatten)]
    params: MethodArgs,
    #[arg(long, env = "HULC_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    n: usize,
    #[arg(long, env = "HULC_SEED")]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TargetsArgs {
    #[arg(long, default_value_t = 10_000_000)]
    draws: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s: u64 = rand::random();
        eprintln!("seed: {s}");
        s
    })
}

fn btable(args: BtableArgs) -> Result<()> {
    let deltas = if args.delta.is_empty() {
        (0..=8).map(|i| i as f64 / 20.0).collect()
    } else {
        args.delta
    };
    let cell = |a: f64, d: f64| -> Result<String> {
        match solve_budget(a, d) {
            Ok(b) => Ok(b.b_solved.to_string()),
            Err(hulc::Error::InfiniteSplits { .. }) => Ok("INF".into()),
            Err(e) => Err(anyhow!(e).context(format!("cell alpha = {a}, delta = {d}"))),
        }
    };
    match args.format {
        Format::Csv => {
            let mut w = io::csv_writer(None)?;
            w.write_record(["alpha", "delta", "b"])?;
            for &d in &deltas {
                for &a in &args.alpha {
                    w.write_record([a.to_string(), d.to_string(), cell(a, d)?])?;
                }
            }
            w.flush()?;
        }
        Format::Text => {
            let mut text = format!("{:>8}", "delta");
            for a in &args.alpha {
                text += &format!("{:>8}", format!("a={a}"));
            }
            text.push('\n');
            for &d in &deltas {
                text += &format!("{d:>8}");
                for &a in &args.alpha {
                    text += &format!("{:>8}", cell(a, d)?);
                }
                text.push('\n');
            }
            std::io::stdout().lock().write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn apply_roles(data: Dataset, column: Option<&str>, response: Option<&str>) -> Result<Dataset> {
    if column.is_none() && response.is_none() {
        return Ok(data);
    }
    let find = |name: &str| {
        data.column_index(name)
            .ok_or_else(|| anyhow!("no column named `{name}`; columns: {}", data.names().join(", ")))
    };
    let mut roles: Roles = data.roles().clone();
    if let Some(c) = column {
        roles.sample = find(c)?;
    }
    if let Some(r) = response {
        let r = find(r)?;
        roles.response = Some(r);
        roles.covariates = (0..data.n_cols()).filter(|&j| j != r).collect();
    }
    Ok(data.with_roles(roles)?)
}

fn ci(args: CiArgs) -> Result<()> {
    let data = io::read_dataset(&args.input)?;
    let data = apply_roles(data, args.column.as_deref(), args.response.as_deref())?;
    let est = estimators::from_name(&args.estimator)?;
    let seed = resolve_seed(args.seed);
    let streams = Streams::new(seed);
    let p = &args.params;
    let mut out = match args.method {
        CiMethod::Hulc => {
            let delta = p.delta.or(est.recommended_delta).ok_or_else(|| {
                anyhow!("estimator `{}` has no known median-bias bound; pass --delta or use --method adaptive", est.name)
            })?;
            hulc_interval(&data, &est, args.alpha, delta, &streams)?
        }
        CiMethod::FixedB => {
            let b = args.b.context("--method fixed-b needs --b")?;
            hulc_interval_fixed_b(&data, &est, b, &streams)?
        }
        CiMethod::Adaptive => adaptive_hulc(&data, &est, args.alpha, &p.adaptive()?, &streams)?,
        CiMethod::Unimodal => unimodal_hulc(
            &data,
            &est,
            args.alpha,
            p.t,
            p.delta.unwrap_or(hulc::unimodal::DEFAULT_DELTA),
            &streams,
        )?,
    };
    if args.inflate {
        match est.inflation {
            Some(inf) => out.apply_inflation(inf),
            None => out
                .warnings
                .push(format!("estimator `{}` defines no inflation; --inflate ignored", est.name)),
        }
    }
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }
    writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(&out)?)?;
    Ok(())
}

fn sim_method(method: SimMethodArg, p: &MethodArgs) -> Result<SimMethod> {
    Ok(match method {
        SimMethodArg::Hulc => SimMethod::Hulc { delta: p.delta },
        SimMethodArg::Adaptive => SimMethod::Adaptive(p.adaptive()?),
        SimMethodArg::Unimodal => SimMethod::Unimodal {
            t: p.t,
            delta: p.delta.unwrap_or(hulc::unimodal::DEFAULT_DELTA),
        },
        SimMethodArg::Wald => SimMethod::Wald,
    })
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let sc = scenario(&args.scenario.scenario, &args.scenario.params())?;
    let method = sim_method(args.method, &args.params)?;
    let seed = resolve_seed(args.seed);
    let report = run_coverage(&sc, &method, args.n, args.reps, args.alpha, seed, args.workers)?;
    let mut w = io::csv_writer(args.out.as_deref())?;
    w.write_record(CSV_HEADER)?;
    w.write_record(report.csv_row())?;
    w.flush()?;
    if let Some(b) = &report.baseline {
        eprintln!(
            "baseline: coverage {:.4} (se {:.4}), mean width {:.6}",
            b.coverage, b.coverage_se, b.mean_width
        );
    }
    for e in &report.failure_examples {
        eprintln!("failure: {e}");
    }
    Ok(())
}

fn band(args: BandArgs) -> Result<()> {
    let data = io::read_dataset(&args.input)?;
    if data.column_index("x").is_none() || data.column_index("y").is_none() {
        bail!("band input needs columns `x` and `y`; found {}", data.names().join(", "));
    }
    let x = data.column_index("x").unwrap();
    let y = data.column_index("y").unwrap();
    let data = data.with_roles(Roles {
        sample: x,
        response: Some(y),
        covariates: vec![x],
    })?;
    let method = match args.method {
        BandMethodArg::Adaptive => BandMethod::Adaptive(args.params.adaptive()?),
        BandMethodArg::Unimodal => BandMethod::Unimodal {
            t: args.params.t,
            delta: args.params.delta.unwrap_or(hulc::unimodal::DEFAULT_DELTA),
        },
    };
    let seed = resolve_seed(args.seed);
    let xs = band_grid(data.n_rows(), args.points)?;
    let b = isotonic_band(&data, &xs, args.alpha, &method, &Streams::new(seed))?;
    let mut w = io::csv_writer(args.out.as_deref())?;
    w.write_record(["x", "lower", "upper"])?;
    for (i, x) in xs.iter().enumerate() {
        w.write_record([x.to_string(), b.lower[i].to_string(), b.upper[i].to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn gen(args: GenArgs) -> Result<()> {
    let sc = scenario(&args.scenario.scenario, &args.scenario.params())?;
    let seed = resolve_seed(args.seed);
    let data = sc.generate(args.n, &mut Streams::new(seed).rng(Stage::Data, 0))?;
    io::write_dataset(&data, args.out.as_deref())
}

fn regen_targets(args: TargetsArgs) -> Result<()> {
    let mut w = io::csv_writer(None)?;
    w.write_record(["design", "param", "stored", "derived", "difference"])?;
    for &(g, stored, _) in LM_GAMMA_TARGETS {
        let d = targets::derive_lm_gamma_slope(g, args.draws, args.seed)?;
        w.write_record(["lm-gamma".into(), g.to_string(), stored.to_string(), d.to_string(), (d - stored).to_string()])?;
    }
    let d = targets::derive_multireg_slope(args.draws, args.seed)?;
    w.write_record([
        "multireg".into(),
        String::new(),
        MULTIREG_SLOPE.to_string(),
        d.to_string(),
        (d - MULTIREG_SLOPE).to_string(),
    ])?;
    w.flush()?;
    Ok(())
}

fn report(err: &anyhow::Error) -> ExitCode {
    let broken_pipe = err
        .chain()
        .filter_map(|e| e.downcast_ref::<std::io::Error>())
        .any(|e| e.kind() == std::io::ErrorKind::BrokenPipe);
    if broken_pipe {
        return ExitCode::SUCCESS;
    }
    let core = err.chain().find_map(|e| e.downcast_ref::<hulc::Error>());
    let (kind, code) = match core {
        Some(e @ hulc::Error::Unknown { .. }) => (e.kind(), 2),
        Some(e) => (e.kind(), 1),
        None => ("io", 1),
    };
    let mut body = json!({ "kind": kind, "message": format!("{err:#}") });
    match core {
        Some(hulc::Error::InfeasibleSplit { n, b, min_split_size }) => {
            body["n"] = json!(n);
            body["b_star"] = json!(b);
            body["min_split_size"] = json!(min_split_size);
        }
        Some(hulc::Error::MoreSplitsThanRows { n, b }) => {
            body["n"] = json!(n);
            body["b_star"] = json!(b);
        }
        Some(hulc::Error::Unknown { known, .. }) => {
            body["known"] = json!(known.split(", ").collect::<Vec<_>>());
        }
        _ => {}
    }
    eprintln!("{}", json!({ "error": body }));
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Btable(a) => btable(a),
        Command::Ci(a) => ci(a),
        Command::Simulate(a) => simulate(a),
        Command::Band(a) => band(a),
        Command::Gen(a) => gen(a),
        Command::Targets(a) => regen_targets(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}
