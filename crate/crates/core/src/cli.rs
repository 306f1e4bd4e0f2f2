//! Command-line front end: `curve`, `report` and `simulate`.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::asymptotics::{
    gdp_delta, gdp_mu, jsd_canonical_asymptotic, leading_divergence, DivergenceKind,
    ExpansionReport,
};
use crate::bounds::chernoff_delta;
use crate::channels::{score_stats, Channel, ScoreStats, SupportClass};
use crate::error::{Error, Result};
use crate::exact_dist::{
    atom_count, binomial_atoms, binomial_curve, divergences, lr_atoms, privacy_curve, Composition,
    LrAtomization, PrivacyCurve, Sidedness,
};
use crate::io::{fmt_f64, parse_eps_grid, privacy_curve_csv, RunManifest, DEFAULT_EPS_GRID};
use crate::montecarlo::{
    dkw_radius, kolmogorov_to_gaussian, rr_boundary, sample_privacy_loss, Hypothesis, LossLaw,
    RegimeThresholds, RrBoundary, SimConfig,
};
use crate::multimessage::{mm_gdp_compare, MmComparison};
use crate::simplex_linalg::fisher_constant;
use crate::svg::{line_chart, Series};

/// Work budget (atoms times users) below which `report` computes exact divergences.
const REPORT_EXACT_BUDGET: f64 = 5e7;

#[derive(Debug, Parser)]
#[command(
    name = "shuffle-accountant",
    version,
    about = "Privacy accounting for shuffled local randomizers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Privacy curve delta(eps) of one neighbouring pair.
    Curve(CurveArgs),
    /// Summary of asymptotic constants, divergences and comparisons.
    Report(ReportArgs),
    /// Monte Carlo samples of the privacy loss.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Exact,
    Binomial,
    Gdp,
    Chernoff,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Sided {
    QOverP,
    POverQ,
    TwoSided,
}

impl From<Sided> for Sidedness {
    fn from(s: Sided) -> Self {
        match s {
            Sided::QOverP => Sidedness::OneSidedQOverP,
            Sided::POverQ => Sidedness::OneSidedPOverQ,
            Sided::TwoSided => Sidedness::TwoSided,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum HypothesisArg {
    P,
    Q,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Channel JSON file: {"d": .., "W0": [..], "W1": [..]}
    #[arg(long)]
    pub channel: PathBuf,
    /// Number of users.
    #[arg(long)]
    pub n: usize,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Timestamp recorded in the manifest (default: current unix time).
    #[arg(long)]
    pub timestamp: Option<String>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub common: Common,
    /// Users holding the bit 1 in the base dataset.
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    /// Comma list or log:lo:hi:count.
    #[arg(long, default_value = DEFAULT_EPS_GRID)]
    pub eps: String,
    #[arg(long, value_enum, default_value_t = Sided::QOverP)]
    pub sided: Sided,
    #[arg(long, value_enum, default_value_t = Engine::Exact)]
    pub engine: Engine,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Also draw the curve to this SVG file.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Logarithmic epsilon axis in the SVG.
    #[arg(long)]
    pub log_x: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, conflicts_with = "pi")]
    pub k: Option<usize>,
    /// Proportion of ones; k is taken as round(pi n).
    #[arg(long)]
    pub pi: Option<f64>,
    /// Messages per user.
    #[arg(long, default_value_t = 1)]
    pub m: usize,
    #[arg(long, value_enum, default_value_t = ReportFormat::Text)]
    pub format: ReportFormat,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value_t = 0)]
    pub k: usize,
    #[arg(long, value_enum, default_value_t = HypothesisArg::P)]
    pub hypothesis: HypothesisArg,
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

/// Parses the process arguments, runs the command and returns the exit code.
pub fn main() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    match run(cli, &mut lock) {
        Ok(()) => 0,
        Err(e) => {
            let _ = lock.flush();
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Curve(a) => cmd_curve(a, stdout),
        Command::Report(a) => cmd_report(a, stdout),
        Command::Simulate(a) => cmd_simulate(a, stdout),
    }
}

fn load_channel(path: &Path) -> Result<(Vec<u8>, Channel)> {
    let bytes = std::fs::read(path)?;
    let text = std::str::from_utf8(&bytes)
        .map_err(|_| Error::validation(format!("{} is not UTF-8", path.display())))?;
    let ch = Channel::from_json_str(text)?;
    Ok((bytes, ch))
}

fn timestamp(given: &Option<String>) -> String {
    given.clone().unwrap_or_else(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0)
            .to_string()
    })
}

fn emit(out: &Option<PathBuf>, stdout: &mut dyn Write, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn support_name(s: SupportClass) -> &'static str {
    match s {
        SupportClass::Full => "FULL",
        SupportClass::NullSupport => "NULL_SUPPORT",
        SupportClass::Singular => "SINGULAR",
    }
}

fn cmd_curve(a: CurveArgs, stdout: &mut dyn Write) -> Result<()> {
    let (bytes, ch) = load_channel(&a.common.channel)?;
    let comp = Composition::new(a.common.n, a.k)?;
    let grid = parse_eps_grid(&a.eps)?;
    let sidedness = Sidedness::from(a.sided);
    let engine = format!("{:?}", a.engine).to_lowercase();
    let mut manifest = RunManifest::new("curve", &bytes, timestamp(&a.common.timestamp))
        .param("n", comp.n)
        .param("k", comp.k)
        .param("eps", &a.eps)
        .param("sided", format!("{sidedness:?}"))
        .param("engine", &engine);

    let curve = match a.engine {
        Engine::Exact => privacy_curve(&lr_atoms(&ch, comp)?, &grid, sidedness)?,
        Engine::Binomial => {
            if comp.k != 0 {
                return Err(Error::validation("engine binomial covers only k = 0"));
            }
            if sidedness == Sidedness::OneSidedQOverP {
                binomial_curve(&ch, comp.n, &grid)?
            } else {
                privacy_curve(&binomial_atoms(&ch, comp.n)?, &grid, sidedness)?
            }
        }
        Engine::Gdp => {
            let g = gdp_mu(&ch, comp.n, comp.pi(), 1)?;
            manifest = manifest
                .param("mu", fmt_f64(g.mu))
                .param("mu_source", format!("{:?}", g.source));
            eprintln!("mu={}", fmt_f64(g.mu));
            let points = grid
                .iter()
                .map(|&e| Ok((e, gdp_delta(e, g.mu)?)))
                .collect::<Result<Vec<_>>>()?;
            PrivacyCurve { points, sidedness }
        }
        Engine::Chernoff => {
            if comp.k != 0 || sidedness != Sidedness::OneSidedQOverP {
                return Err(Error::validation(
                    "engine chernoff covers only k = 0 with --sided q-over-p",
                ));
            }
            let points = grid
                .iter()
                .map(|&e| Ok((e, chernoff_delta(&ch, comp.n, e)?.bound)))
                .collect::<Result<Vec<_>>>()?;
            PrivacyCurve { points, sidedness }
        }
    };

    let text = match a.format {
        Format::Csv => privacy_curve_csv(&curve, &manifest.header()),
        Format::Json => {
            let points: Vec<_> = curve
                .points
                .iter()
                .map(|&(e, d)| json!({"epsilon": e, "delta": d}))
                .collect();
            let v = json!({"manifest": manifest, "sidedness": curve.sidedness, "points": points});
            serde_json::to_string_pretty(&v)? + "\n"
        }
    };
    emit(&a.common.out, stdout, &text)?;
    if let Some(path) = &a.svg {
        let title = format!("{engine} privacy curve, n = {}, k = {}", comp.n, comp.k);
        let svg = line_chart(
            &title,
            "epsilon",
            "delta",
            &[Series {
                label: &engine,
                points: &curve.points,
            }],
            a.log_x,
        );
        std::fs::write(path, svg)?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct NeighbourJsd {
    k: usize,
    exact: Option<f64>,
    leading: f64,
}

#[derive(Debug, Serialize)]
struct Report {
    manifest: RunManifest,
    d: usize,
    support: &'static str,
    perfect_privacy: bool,
    n: usize,
    k: usize,
    pi: f64,
    m: usize,
    scores: Option<ScoreStats>,
    i_pi: Option<f64>,
    mu_canonical: Option<f64>,
    mu_proportional: Option<f64>,
    mu_unbundled: Option<f64>,
    jsd_canonical: Option<ExpansionReport>,
    jsd_at_k: Option<NeighbourJsd>,
    multimessage: Option<MmComparison>,
    rr_boundary: Option<RrBoundary>,
}

/// Exact atoms when the enumeration fits the report's work budget.
fn affordable_atoms(ch: &Channel, comp: Composition) -> Result<Option<LrAtomization>> {
    if ch.d() == 2 && comp.k == 0 {
        return binomial_atoms(ch, comp.n).map(Some);
    }
    if atom_count(comp.n, ch.d()) * comp.n as f64 <= REPORT_EXACT_BUDGET {
        return lr_atoms(ch, comp).map(Some);
    }
    Ok(None)
}

fn cmd_report(a: ReportArgs, stdout: &mut dyn Write) -> Result<()> {
    let (bytes, ch) = load_channel(&a.common.channel)?;
    let n = a.common.n;
    if n == 0 || a.m == 0 {
        return Err(Error::validation("report needs n >= 1 and m >= 1"));
    }
    let (k, pi) = match (a.k, a.pi) {
        (Some(k), _) => (k, k as f64 / n as f64),
        (None, Some(pi)) => {
            if !(0.0..1.0).contains(&pi) {
                return Err(Error::validation(format!(
                    "pi must lie in [0, 1), got {pi}"
                )));
            }
            (((pi * n as f64).round() as usize).min(n - 1), pi)
        }
        (None, None) => (0, 0.0),
    };
    let comp = Composition::new(n, k)?;
    let manifest = RunManifest::new("report", &bytes, timestamp(&a.common.timestamp))
        .param("n", n)
        .param("k", k)
        .param("pi", fmt_f64(pi))
        .param("m", a.m);

    let full = ch.is_full();
    let scores = if ch.support() == SupportClass::Singular {
        None
    } else {
        Some(score_stats(&ch)?)
    };
    let mut report = Report {
        manifest,
        d: ch.d(),
        support: support_name(ch.support()),
        perfect_privacy: ch.is_identical(),
        n,
        k,
        pi,
        m: a.m,
        scores,
        i_pi: None,
        mu_canonical: None,
        mu_proportional: None,
        mu_unbundled: None,
        jsd_canonical: None,
        jsd_at_k: None,
        multimessage: None,
        rr_boundary: None,
    };
    if full {
        report.i_pi = Some(if pi == 0.0 {
            score_stats(&ch)?.chi2
        } else {
            fisher_constant(&ch, pi)?.i_pi
        });
        report.mu_canonical = Some(gdp_mu(&ch, n, 0.0, 1)?.mu);
        report.mu_proportional = Some(gdp_mu(&ch, n, pi, 1)?.mu);
        report.mu_unbundled = Some(gdp_mu(&ch, n, pi, a.m)?.mu);
        let exact = affordable_atoms(&ch, Composition::new(n, 0)?)?
            .map(|atoms| divergences(&atoms, &[]).map(|r| r.jsd))
            .transpose()?;
        report.jsd_canonical = Some(jsd_canonical_asymptotic(&ch, n, exact)?);
        if k > 0 {
            let exact = affordable_atoms(&ch, comp)?
                .map(|atoms| divergences(&atoms, &[]).map(|r| r.jsd))
                .transpose()?;
            let leading = leading_divergence(&ch, n, pi, DivergenceKind::Jsd)?;
            report.jsd_at_k = Some(NeighbourJsd { k, exact, leading });
        }
        report.multimessage = Some(mm_gdp_compare(&ch, a.m)?);
    }
    if let Some(eps0) = ch.rr_epsilon() {
        report.rr_boundary = Some(rr_boundary(eps0, n, RegimeThresholds::default())?);
    }

    let text = match a.format {
        ReportFormat::Json => serde_json::to_string_pretty(&report)? + "\n",
        ReportFormat::Text => report_text(&report),
    };
    emit(&a.common.out, stdout, &text)
}

fn report_text(r: &Report) -> String {
    let mut s = r.manifest.header();
    let mut line = |k: &str, v: String| {
        let _ = writeln!(s, "{k}={v}");
    };
    let opt = |x: Option<f64>| x.map_or_else(|| "n/a".to_string(), fmt_f64);
    line("d", r.d.to_string());
    line("support", r.support.to_string());
    line("n", r.n.to_string());
    line("k", r.k.to_string());
    line("pi", fmt_f64(r.pi));
    line("m", r.m.to_string());
    if let Some(sc) = &r.scores {
        line("chi2", fmt_f64(sc.chi2));
        line("mu3", fmt_f64(sc.mu3));
        line("w_max", fmt_f64(sc.w_max));
    }
    line("I_pi", opt(r.i_pi));
    line("mu_canonical", opt(r.mu_canonical));
    line("mu_proportional", opt(r.mu_proportional));
    line("mu_unb", opt(r.mu_unbundled));
    if let Some(j) = &r.jsd_canonical {
        line("jsd_exact", opt(j.exact));
        line("jsd_asymptotic", fmt_f64(j.asymptotic));
        line("jsd_residual", opt(j.residual));
    }
    if let Some(j) = &r.jsd_at_k {
        line("jsd_k_exact", opt(j.exact));
        line("jsd_k_leading", fmt_f64(j.leading));
    }
    if let Some(mm) = &r.multimessage {
        line("mu2n_unbundled", fmt_f64(mm.mu_unb_sq_times_n));
        line("mu2n_bundled", fmt_f64(mm.mu_bund_sq_times_n));
        line("ratio", fmt_f64(mm.ratio));
        line("ratio_lower_bound", fmt_f64(mm.ratio_lower_bound));
    }
    if let Some(rr) = &r.rr_boundary {
        line("rr_eps0", fmt_f64(rr.eps0));
        line("rr_a_n", fmt_f64(rr.a_n));
        line("rr_sigma2", fmt_f64(rr.sigma2));
        line("rr_rho3", fmt_f64(rr.rho3));
        line("rr_lyapunov_ratio", fmt_f64(rr.lyapunov_ratio));
        line("rr_lyapunov_bound", fmt_f64(rr.lyapunov_bound));
        line("rr_regime", format!("{:?}", rr.regime));
    }
    if r.perfect_privacy {
        s.push_str("perfect privacy: v = 0\n");
    }
    s
}

fn cmd_simulate(a: SimulateArgs, stdout: &mut dyn Write) -> Result<()> {
    let (bytes, ch) = load_channel(&a.common.channel)?;
    let comp = Composition::new(a.common.n, a.k)?;
    let hypothesis = match a.hypothesis {
        HypothesisArg::P => Hypothesis::P,
        HypothesisArg::Q => Hypothesis::Q,
    };
    let cfg = SimConfig::new(a.seed, a.reps, a.workers);
    let manifest = RunManifest::new("simulate", &bytes, timestamp(&a.common.timestamp))
        .param("n", comp.n)
        .param("k", comp.k)
        .param("hypothesis", format!("{hypothesis:?}"));
    let samples = sample_privacy_loss(&ch, comp, hypothesis, &cfg)?;

    let mut s = manifest.header();
    s.push_str(&cfg.comment_line());
    s.push('\n');
    s.push_str("lambda\n");
    for x in &samples {
        s.push_str(&fmt_f64(*x));
        s.push('\n');
    }
    if !samples.is_empty() {
        // Under Q the martingale is e^{-lambda}.
        let sign = if hypothesis == Hypothesis::P {
            1.0
        } else {
            -1.0
        };
        let r = samples.len() as f64;
        let ratios: Vec<f64> = samples.iter().map(|x| (sign * x).exp()).collect();
        let mean = ratios.iter().sum::<f64>() / r;
        let var = ratios.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r - 1.0).max(1.0);
        let _ = writeln!(s, "# summary mean_likelihood_ratio={}", fmt_f64(mean));
        let _ = writeln!(s, "# summary mean_se={}", fmt_f64((var / r).sqrt()));
        let mu = gdp_mu(&ch, comp.n, comp.pi(), 1)?.mu;
        let _ = writeln!(s, "# summary mu={}", fmt_f64(mu));
        if mu > 0.0 {
            let ks = kolmogorov_to_gaussian(LossLaw::Samples(&samples), mu, hypothesis)?;
            let _ = writeln!(s, "# summary kolmogorov={}", fmt_f64(ks));
            let _ = writeln!(
                s,
                "# summary dkw95={}",
                fmt_f64(dkw_radius(samples.len(), 0.05))
            );
        }
    }
    emit(&a.common.out, stdout, &s)
}
