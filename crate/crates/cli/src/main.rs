mod svg;

use clap::{Args, Parser, Subcommand};
use hypercell::experiment::{
    fit_loglog, persist, run_counterexample, run_rate, run_tail, write_csv, write_json, CounterexampleConfig, FitResult,
    Format, PerGamma, RateRunConfig, TailRunConfig,
};
use hypercell::metrics::{mu_estimate, MuConfig};
use hypercell::{Body, DirectionalDistribution, Error};
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use svg::Plot;

#[derive(Parser)]
#[command(name = "hypercell", version, about = "K-cells of Poisson hyperplane processes: rate, tail and counterexample experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads (default: HYPERCELL_THREADS, else all cores).
    #[arg(long, global = true, env = "HYPERCELL_THREADS")]
    threads: Option<usize>,
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed in the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write an SVG plot.
    #[arg(long)]
    plot: bool,
    /// Cross-check every cell against a second intersection kernel.
    #[arg(long)]
    debug_oracle: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Median Hausdorff distance along an intensity grid and its exponent.
    Rate(Common),
    /// Tail probability P{delta > eps} along a gamma grid.
    Tail(Common),
    /// mu(K, phi, eps) along an epsilon grid.
    MuCurve(Common),
    /// Cap-starved directional distribution that defeats a prescribed rate.
    Counterexample(Common),
    /// Runs the invariant suite.
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MuCurveConfig {
    body: Body,
    distribution: DirectionalDistribution,
    eps_grid: Vec<f64>,
    #[serde(default)]
    mu: MuConfig,
}

#[derive(Serialize)]
struct MuRow {
    epsilon: f64,
    mu: f64,
    evaluations: usize,
}

enum Failure {
    Config(String),
    Experiment(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Experiment(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidBody(_)
            | Error::InvalidUnitVector(_)
            | Error::InvalidDistribution(_)
            | Error::InvalidConfig(_)
            | Error::InvalidEpsilon(_)
            | Error::InfeasibleBudget(_)
            | Error::UnsupportedBody(_)
            | Error::OriginOutside { .. } => Failure::Config(e.to_string()),
            other => Failure::Experiment(other.to_string()),
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn load<T: DeserializeOwned>(path: &Path) -> Outcome<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("cannot parse config {}: {e}", path.display())))
}

fn output(c: &Common, name: &str) -> Outcome<PathBuf> {
    std::fs::create_dir_all(&c.out)
        .map_err(|e| Failure::Experiment(format!("cannot create output directory {}: {e}", c.out.display())))?;
    Ok(c.out.join(name))
}

fn write_svg(c: &Common, name: &str, plot: Plot) -> Outcome<()> {
    let path = output(c, name)?;
    std::fs::write(&path, plot.render()).map_err(|e| Failure::Experiment(format!("cannot write {}: {e}", path.display())))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn reference_slopes(d: usize) -> Vec<(String, f64)> {
    vec![(format!("1/d = 1/{d}"), 1.0 / d as f64), (format!("2/(d+1) = 2/{}", d + 1), 2.0 / (d + 1) as f64), ("1".into(), 1.0)]
}

fn rate(c: &Common) -> Outcome<()> {
    let mut cfg: RateRunConfig = load(&c.config)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    cfg.policy.oracle_check |= c.debug_oracle;
    let run = run_rate(&cfg)?;
    persist(&run, &output(c, "rate.csv")?, Format::Csv)?;
    persist(&run, &output(c, "rate.json")?, Format::Json)?;
    println!("rate exponent {:.4} (r2 {:.4}) over {} grid points", run.fit.slope, run.fit.r_squared, run.fit.n_points);
    if c.plot {
        let points: Vec<(f64, f64)> = run
            .per_n
            .iter()
            .map(|p| {
                let n = p.n as f64;
                ((n.ln() / n).ln(), p.median_delta.ln())
            })
            .collect();
        let refs = reference_slopes(cfg.body.dim());
        write_svg(
            c,
            "rate.svg",
            Plot {
                title: "median Hausdorff distance",
                x_label: "ln(ln n / n)",
                y_label: "ln median delta_n",
                points: &points,
                fit: Some((run.fit.slope, run.fit.intercept)),
                references: &refs,
            },
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct TailSummary<'a> {
    config: &'a TailRunConfig,
    per_gamma: &'a [PerGamma],
    fit: &'a FitResult,
    mu: f64,
    slope_over_mu: f64,
}

fn tail(c: &Common) -> Outcome<()> {
    let mut cfg: TailRunConfig = load(&c.config)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    cfg.policy.oracle_check |= c.debug_oracle;
    let run = run_tail(&cfg)?;
    let mut rows = run.rows.clone();
    rows.sort_by(|a, b| a.rep.cmp(&b.rep).then(a.gamma.total_cmp(&b.gamma)));
    write_csv(&rows, &output(c, "tail.csv")?)?;
    let summary =
        TailSummary { config: &run.config, per_gamma: &run.per_gamma, fit: &run.fit, mu: run.mu, slope_over_mu: run.slope_over_mu };
    write_json(&summary, &output(c, "tail.json")?)?;
    println!("tail slope {:.4} (r2 {:.4}), mu {:.6}, |slope|/mu {:.3}", run.fit.slope, run.fit.r_squared, run.mu, run.slope_over_mu);
    if c.plot {
        let points: Vec<(f64, f64)> =
            run.per_gamma.iter().filter(|p| p.p_hat > 0.0).map(|p| (p.gamma, p.p_hat.ln())).collect();
        write_svg(
            c,
            "tail.svg",
            Plot {
                title: "tail probability",
                x_label: "gamma",
                y_label: "ln P(delta > eps)",
                points: &points,
                fit: Some((run.fit.slope, run.fit.intercept)),
                references: &[],
            },
        )?;
    }
    Ok(())
}

#[derive(Serialize)]
struct MuCurveSummary<'a> {
    config: &'a MuCurveConfig,
    fit: &'a FitResult,
}

fn mu_curve(c: &Common) -> Outcome<()> {
    let mut cfg: MuCurveConfig = load(&c.config)?;
    if let Some(s) = c.seed {
        cfg.mu.seed = s;
    }
    if cfg.eps_grid.len() < 2 {
        return Err(Failure::Config("eps_grid needs at least two values".into()));
    }
    let mut rows = Vec::with_capacity(cfg.eps_grid.len());
    for &e in &cfg.eps_grid {
        let est = mu_estimate(&cfg.body, &cfg.distribution, e, &cfg.mu)?;
        rows.push(MuRow { epsilon: e, mu: est.value, evaluations: est.evaluations });
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.epsilon.ln(), r.mu.ln())).collect();
    let fit = fit_loglog(&points)?;
    write_csv(&rows, &output(c, "mu_curve.csv")?)?;
    write_json(&MuCurveSummary { config: &cfg, fit: &fit }, &output(c, "mu_curve.json")?)?;
    println!("mu scaling exponent {:.4} (r2 {:.4})", fit.slope, fit.r_squared);
    if c.plot {
        let d = cfg.body.dim();
        let refs = vec![
            ("(d+1)/2".to_string(), (d + 1) as f64 / 2.0),
            ("1".to_string(), 1.0),
            (format!("d = {d}"), d as f64),
        ];
        write_svg(
            c,
            "mu_curve.svg",
            Plot {
                title: "separation functional",
                x_label: "ln eps",
                y_label: "ln mu",
                points: &points,
                fit: Some((fit.slope, fit.intercept)),
                references: &refs,
            },
        )?;
    }
    Ok(())
}

fn counterexample(c: &Common) -> Outcome<()> {
    let mut cfg: CounterexampleConfig = load(&c.config)?;
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    cfg.policy.oracle_check |= c.debug_oracle;
    let run = run_counterexample(&cfg)?;
    write_csv(&run.per_n, &output(c, "counterexample.csv")?)?;
    if let Some(control) = &run.control {
        write_csv(control, &output(c, "counterexample_control.csv")?)?;
    }
    write_json(&run, &output(c, "counterexample.json")?)?;
    for row in &run.per_n {
        println!("n {:>6}  eps_n {:.4}  P(delta >= eps_n) {:.4}  separated {:.4}", row.n, row.eps_n, row.freq_delta_ge, row.freq_separated);
    }
    if c.plot {
        log::warn!("counterexample has no plot; see counterexample.csv");
    }
    Ok(())
}

fn validate(seed: u64) -> Outcome<()> {
    let report = hypercell::selfcheck::run(seed);
    for c in &report.checks {
        println!("{} {:<10} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.module, c.name, c.detail);
    }
    println!("{} passed, {} failed", report.passed(), report.failed());
    if report.failed() > 0 {
        return Err(Failure::Experiment(format!("{} invariant check(s) failed", report.failed())));
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Rate(c) => rate(c),
        Command::Tail(c) => tail(c),
        Command::MuCurve(c) => mu_curve(c),
        Command::Counterexample(c) => counterexample(c),
        Command::Validate { seed } => validate(*seed),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Config(m) | Failure::Experiment(m)) = &f;
            eprintln!("error: {m}");
            ExitCode::from(f.code())
        }
    }
}
