use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use picklab::counterexamples::{horocyclic_failure_measure, pitting_measure, verify_separation, Separation};
use picklab::integrability::{default_c_grid, IntegrabilityVerdict, ScaleSearch, VerdictTag};
use picklab::julia::{aj_scan, amortized_jq, augur_bounds, geometric_grid, julia_quotient, FractionalPrefactor, StolzSpec};
use picklab::nevanlinna::{aronszajn_krein, evaluate};
use picklab::regularity::{
    analytic_determinacy, gamma_regular, horocyclic_continuity, horocyclic_scan, is_augury, julia_limsup_scan,
    order_of_regularity, Curve, HoroOptions, HoroScan, HoroVerdict,
};
use picklab::report::{aj_scan_csv, csv, horocyclic_csv, limsup_csv, num, witness_csv};
use picklab::scan::ScanVerdict;
use picklab::{Exec, Measure, NevanlinnaRep, RateFunction};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "picklab", version, about = "Boundary regularity of Pick functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate f at points of the upper half-plane
    Eval(EvalArgs),
    /// Julia quotient at points, or along a curve when --gamma is given
    Julia(JuliaArgs),
    /// Amortized Julia quotients over a shrinking grid of arcs
    AjScan(AjArgs),
    /// Test 1/gamma(C|t - tau|) for integrability
    GammaTest(GammaArgs),
    /// Test whether lambda is a gamma-augury
    AuguryTest(AuguryArgs),
    /// Order of regularity at tau
    Order(OrderArgs),
    /// Sup of |f - f(tau)| over horocyclic regions
    Horocyclic(HoroArgs),
    /// Build a pitting or horocyclic-failure measure and verify it
    Pitting(PittingArgs),
    /// Rank-one perturbation of an atomic measure
    Perturb(PerturbArgs),
    /// Exponential-weight test for moment determinacy
    Determinacy(DeterminacyArgs),
    /// Check the two-sided augur bounds over a grid of scales
    BoundsCheck(BoundsArgs),
}

#[derive(Args)]
struct Output {
    /// Write to FILE instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Source {
    /// Measure JSON (a = b = 0)
    #[arg(long, conflicts_with = "rep")]
    measure: Option<PathBuf>,
    /// Nevanlinna representation JSON
    #[arg(long)]
    rep: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Expect {
    Bounded,
}

#[derive(Clone, Copy, ValueEnum)]
enum Prefactor {
    Definition,
    Iterated,
}

impl From<Prefactor> for FractionalPrefactor {
    fn from(p: Prefactor) -> Self {
        match p {
            Prefactor::Definition => FractionalPrefactor::Definition,
            Prefactor::Iterated => FractionalPrefactor::Iterated,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CurveArg {
    Scaled,
    Sqrt,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Julia,
    Value,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    src: Source,
    /// Point as RE,IM; repeatable
    #[arg(long = "at", required = true, value_parser = parse_point)]
    at: Vec<Complex64>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct JuliaArgs {
    #[command(flatten)]
    src: Source,
    #[arg(long = "at", value_parser = parse_point, conflicts_with = "gamma")]
    at: Vec<Complex64>,
    /// Rate function JSON for the approach curve tau + t + i h(t)
    #[arg(long)]
    gamma: Option<PathBuf>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    tau: f64,
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    #[arg(long = "d", default_value_t = 1.0)]
    d: f64,
    #[arg(long, value_enum, default_value = "scaled")]
    curve: CurveArg,
    #[arg(long, default_value_t = 0.1)]
    t_start: f64,
    #[arg(long, default_value_t = 0.5)]
    t_ratio: f64,
    #[arg(long, default_value_t = 20)]
    t_steps: usize,
    #[arg(long, value_enum)]
    expect: Option<Expect>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct AjArgs {
    #[arg(long)]
    measure: PathBuf,
    #[arg(long)]
    lambda: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    tau: f64,
    #[arg(long, default_value_t = 0.1)]
    d_start: f64,
    #[arg(long, default_value_t = 0.5)]
    d_ratio: f64,
    #[arg(long, default_value_t = 20)]
    d_steps: usize,
    /// Fractional order
    #[arg(long, default_value_t = 0.0)]
    s: f64,
    #[arg(long, value_enum, default_value = "definition")]
    prefactor: Prefactor,
    #[arg(long, value_enum)]
    expect: Option<Expect>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct GammaArgs {
    #[arg(long)]
    measure: PathBuf,
    #[arg(long)]
    gamma: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    tau: f64,
    #[arg(long, value_enum)]
    expect: Option<Expect>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct AuguryArgs {
    #[arg(long)]
    lambda: PathBuf,
    #[arg(long)]
    gamma: PathBuf,
    #[arg(long, value_enum)]
    expect: Option<Expect>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct OrderArgs {
    #[arg(long)]
    measure: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    tau: f64,
    #[arg(long, default_value_t = 10)]
    n_max: usize,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct HoroArgs {
    #[command(flatten)]
    src: Source,
    #[arg(long)]
    gamma: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    tau: f64,
    /// Fixed scale; searched over 4^k, k = -8..8, when omitted
    #[arg(long)]
    c: Option<f64>,
    /// Largest D; D runs over powers of two from 1
    #[arg(long, default_value_t = 64.0)]
    d_max: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, default_value_t = 2500)]
    boundary_points: usize,
    #[arg(long, value_enum)]
    expect: Option<Expect>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct PittingArgs {
    #[arg(long)]
    gamma: PathBuf,
    #[arg(long)]
    lambda: PathBuf,
    #[arg(long, default_value_t = 10)]
    n: usize,
    #[arg(long, default_value_t = 2.0)]
    base: f64,
    /// julia: pitting measure; value: horocyclic-failure measure
    #[arg(long, value_enum, default_value = "julia")]
    mode: Mode,
    /// Also write the constructed measure as JSON
    #[arg(long)]
    measure_out: Option<PathBuf>,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct PerturbArgs {
    #[command(flatten)]
    src: Source,
    #[arg(long, allow_negative_numbers = true)]
    alpha: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct DeterminacyArgs {
    #[arg(long)]
    measure: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    tau: f64,
    #[command(flatten)]
    out: Output,
}

#[derive(Args)]
struct BoundsArgs {
    #[arg(long)]
    measure: PathBuf,
    #[arg(long)]
    lambda: PathBuf,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    tau: f64,
    #[arg(long, default_value_t = 0.2)]
    eps_start: f64,
    #[arg(long, default_value_t = 0.5)]
    eps_ratio: f64,
    #[arg(long, default_value_t = 11)]
    eps_steps: usize,
    #[arg(long, default_value_t = 0.0)]
    s: f64,
    #[arg(long, value_enum, default_value = "definition")]
    prefactor: Prefactor,
    #[command(flatten)]
    out: Output,
}

fn parse_point(s: &str) -> Result<Complex64, String> {
    let (re, im) = s.split_once(',').ok_or("expected RE,IM")?;
    let re: f64 = re.trim().parse().map_err(|e| format!("{e}"))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("{e}"))?;
    Ok(Complex64::new(re, im))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn read_measure(path: &Path) -> Result<Measure> {
    let m: Measure = read_json(path)?;
    Ok(picklab::measure::validate_measure(m)?)
}

fn read_rate(path: &Path) -> Result<RateFunction> {
    let r: RateFunction = read_json(path)?;
    r.validate()?;
    Ok(r)
}

impl Source {
    fn load(&self) -> Result<NevanlinnaRep> {
        match (&self.measure, &self.rep) {
            (Some(m), None) => Ok(NevanlinnaRep::from_measure(read_measure(m)?)),
            (None, Some(r)) => Ok(read_json::<NevanlinnaRep>(r)?.validated()?),
            _ => bail!("exactly one of --measure or --rep is required"),
        }
    }
}

impl Output {
    fn emit(&self, text: &str) -> Result<()> {
        match &self.out {
            Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn emit_json(&self, v: &Value) -> Result<()> {
        self.emit(&(serde_json::to_string_pretty(v)? + "\n"))
    }
}

/// `PICKLAB_THREADS=0` runs sequentially; a positive value sizes the pool.
fn exec_from_env() -> Result<Exec> {
    match std::env::var("PICKLAB_THREADS") {
        Err(_) => Ok(Exec::default()),
        Ok(v) => {
            let n: usize = v.trim().parse().with_context(|| format!("PICKLAB_THREADS={v}"))?;
            if n == 0 {
                return Ok(Exec::Sequential);
            }
            rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
            Ok(Exec::Parallel)
        }
    }
}

fn tag_name(t: VerdictTag) -> &'static str {
    match t {
        VerdictTag::Integrable => "Integrable",
        VerdictTag::Divergent => "Divergent",
        VerdictTag::Inconclusive => "Inconclusive",
    }
}

fn verdict_json(v: &IntegrabilityVerdict) -> Value {
    json!({
        "verdict": tag_name(v.tag),
        "estimate": v.estimate,
        "remainder_bound": v.remainder_bound,
        "path": format!("{:?}", v.path),
        "shells": v.shells,
    })
}

fn search_json(s: &ScaleSearch) -> Value {
    let mut v = verdict_json(&s.verdict);
    v["witness_C"] = json!(s.witness_c);
    v
}

/// Exit status for a verdict under `--expect bounded`.
struct Outcome {
    failed_expectation: bool,
}

impl Outcome {
    fn ok() -> Self {
        Outcome {
            failed_expectation: false,
        }
    }

    fn check(expect: Option<Expect>, bad: bool) -> Self {
        Outcome {
            failed_expectation: expect.is_some() && bad,
        }
    }
}

fn run(cmd: Command, exec: Exec) -> Result<Outcome> {
    match cmd {
        Command::Eval(a) => {
            let rep = a.src.load()?;
            let mut rows = vec![];
            for z in &a.at {
                let f = evaluate(&rep, *z)?;
                rows.push(vec![num(z.re), num(z.im), num(f.re), num(f.im)]);
            }
            a.out.emit(&csv(&["re", "im", "f_re", "f_im"], rows))?;
            Ok(Outcome::ok())
        }
        Command::Julia(a) => {
            let rep = a.src.load()?;
            match &a.gamma {
                Some(g) => {
                    let gamma = read_rate(g)?;
                    let curve = match a.curve {
                        CurveArg::Scaled => Curve::Scaled,
                        CurveArg::Sqrt => Curve::Sqrt,
                    };
                    let grid = geometric_grid(a.t_start, a.t_ratio, a.t_steps);
                    let scan = julia_limsup_scan(&rep, a.tau, &gamma, a.c, a.d, curve, &grid, exec)?;
                    a.out.emit(&limsup_csv(&scan))?;
                    eprintln!("verdict: {:?}", scan.verdict);
                    Ok(Outcome::check(a.expect, scan.verdict == ScanVerdict::Unbounded))
                }
                None => {
                    if a.at.is_empty() {
                        bail!("give --at points or --gamma for a curve");
                    }
                    let mut rows = vec![];
                    for z in &a.at {
                        rows.push(vec![num(z.re), num(z.im), num(julia_quotient(&rep, *z)?)]);
                    }
                    a.out.emit(&csv(&["re", "im", "J"], rows))?;
                    Ok(Outcome::ok())
                }
            }
        }
        Command::AjScan(a) => {
            let mu = read_measure(&a.measure)?;
            let spec = StolzSpec::new(a.tau, read_rate(&a.lambda)?);
            let grid = geometric_grid(a.d_start, a.d_ratio, a.d_steps);
            let scan = aj_scan(&mu, &spec, &grid, a.s, a.prefactor.into(), exec)?;
            a.out.emit(&aj_scan_csv(&scan))?;
            Ok(Outcome::check(a.expect, scan.verdict == ScanVerdict::Unbounded))
        }
        Command::GammaTest(a) => {
            let r = gamma_regular(&read_measure(&a.measure)?, a.tau, &read_rate(&a.gamma)?)?;
            let mut v = verdict_json(&r.verdict);
            v["witness_C"] = json!(r.witness_c);
            v["tau"] = json!(r.tau);
            v["gamma_big_o_t2"] = json!(r.big_o_t2);
            a.out.emit_json(&v)?;
            Ok(Outcome::check(a.expect, r.verdict.tag == VerdictTag::Divergent))
        }
        Command::AuguryTest(a) => {
            let s = is_augury(&read_rate(&a.lambda)?, &read_rate(&a.gamma)?)?;
            a.out.emit_json(&search_json(&s))?;
            Ok(Outcome::check(a.expect, s.verdict.tag == VerdictTag::Divergent))
        }
        Command::Order(a) => {
            let r = order_of_regularity(&read_measure(&a.measure)?, a.tau, a.n_max)?;
            a.out
                .emit_json(&json!({"n_star": r.n_star, "regular_to_order": r.regular_to_order}))?;
            Ok(Outcome::ok())
        }
        Command::Horocyclic(a) => {
            let rep = a.src.load()?;
            let gamma = read_rate(&a.gamma)?;
            if a.d_max.is_nan() || a.d_max < 1.0 {
                bail!("--d-max must be at least 1");
            }
            let ds: Vec<f64> = (0..).map(|k| 2f64.powi(k)).take_while(|d| *d <= a.d_max).collect();
            let opts = HoroOptions {
                boundary_points: a.boundary_points,
                seed: a.seed,
                ..HoroOptions::default()
            };
            let (scan, witness): (HoroScan, Option<f64>) = match a.c {
                Some(c) => {
                    let s = horocyclic_scan(&rep, a.tau, &gamma, c, &ds, &opts, exec)?;
                    let w = (s.verdict == HoroVerdict::DecreasingToZero).then_some(c);
                    (s, w)
                }
                None => {
                    let found = horocyclic_continuity(&rep, a.tau, &gamma, &ds, &default_c_grid(), &opts, exec)?;
                    (found.scan, found.witness_c)
                }
            };
            a.out.emit(&horocyclic_csv(&scan))?;
            eprintln!("verdict: {:?} (C = {}, witness {:?})", scan.verdict, scan.c, witness);
            Ok(Outcome::check(a.expect, scan.verdict == HoroVerdict::Unbounded))
        }
        Command::Pitting(a) => {
            let (gamma, lambda) = (read_rate(&a.gamma)?, read_rate(&a.lambda)?);
            let (built, mode) = match a.mode {
                Mode::Julia => (pitting_measure(&gamma, &lambda, a.n, a.base)?, Separation::Julia),
                Mode::Value => (horocyclic_failure_measure(&gamma, &lambda, a.n, a.base)?, Separation::Value),
            };
            if built.precision_exhausted {
                eprintln!("warning: atoms underflow after n = {}", built.witnesses.len());
            }
            let rows = verify_separation(&built.measure, &lambda, &built.witnesses, mode)?;
            if let Some(p) = &a.measure_out {
                std::fs::write(p, serde_json::to_string_pretty(&built.measure)? + "\n")
                    .with_context(|| format!("writing {}", p.display()))?;
            }
            a.out.emit(&witness_csv(&rows))?;
            Ok(Outcome::ok())
        }
        Command::Perturb(a) => {
            let out = aronszajn_krein(&a.src.load()?, a.alpha)?;
            a.out.emit_json(&serde_json::to_value(&out)?)?;
            Ok(Outcome::ok())
        }
        Command::Determinacy(a) => {
            let s = analytic_determinacy(&read_measure(&a.measure)?, a.tau)?;
            let mut v = search_json(&s);
            v["determinate"] = json!(s.verdict.is_integrable());
            a.out.emit_json(&v)?;
            Ok(Outcome::ok())
        }
        Command::BoundsCheck(a) => {
            let mu = read_measure(&a.measure)?;
            let spec = StolzSpec::new(a.tau, read_rate(&a.lambda)?);
            let mut rows = vec![];
            let mut violations = 0;
            for eps in geometric_grid(a.eps_start, a.eps_ratio, a.eps_steps) {
                let b = augur_bounds(&mu, &spec, eps, a.s, a.prefactor.into())?;
                let aj = amortized_jq(&mu, &spec, eps, a.s, a.prefactor.into())?;
                let holds = b.lower <= aj * (1.0 + 1e-9) && aj <= b.upper * (1.0 + 1e-9);
                violations += usize::from(!holds);
                rows.push(vec![
                    num(eps),
                    num(spec.lambda.value(eps)),
                    num(aj),
                    num(b.lower),
                    num(b.upper),
                    holds.to_string(),
                ]);
            }
            a.out
                .emit(&csv(&["eps", "lambda_eps", "aj", "lower", "upper", "holds"], rows))?;
            if violations > 0 {
                bail!("{violations} scale(s) violate the bounds");
            }
            Ok(Outcome::ok())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = exec_from_env().and_then(|exec| run(cli.command, exec));
    match result {
        Ok(o) if o.failed_expectation => ExitCode::from(2),
        Ok(_) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
