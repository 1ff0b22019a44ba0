use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use semibif_core::analysis::{analyze, Analysis, AnalysisInput};
use semibif_core::fixtures::{lookup, FIXTURES};
use semibif_core::report::{fmt_sig, render_svg, write_csv, AnalysisReport, VerificationReport};
use semibif_core::shooting::{verify_trace, DEFAULT_RTOL};
use semibif_core::tracer::{trace, CurveTrace, Spacing};

const GRAMMAR: &str = "\
EXPRESSIONS:
  f is a function of u built from numbers, + - * / ^ (right-associative),
  parentheses, unary minus and the functions exp, ln, sqrt, abs.
  Constants: pi, e. Any other identifier is a parameter bound with
  --param name=value.  Example: \"sigma - 1/sqrt(u)\" --param sigma=2

LIMIT OVERRIDES (--assert-limit KEY=CLASS):
  KEY   g0 upg0 ginf f0 u13f0 fb2 fb2log lambda-hat
  CLASS zero | pos-divergent | neg-divergent | finite:VALUE";

#[derive(Parser)]
#[command(
    name = "semibif",
    version,
    about = "Shape of the bifurcation curve of −u″ = λf(u), u(±1) = 0, for semipositone f",
    after_help = GRAMMAR
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Locate landmarks, check hypotheses, compute endpoints and classify the curve
    #[command(after_help = GRAMMAR)]
    Analyze {
        #[command(flatten)]
        problem: ProblemArgs,
        /// Write the JSON report here ("-" for stdout)
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// Sample the curve λ = T(α)² and write it as CSV
    #[command(after_help = GRAMMAR)]
    Trace {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(short = 'n', long, default_value_t = 64)]
        points: usize,
        /// CSV output (stdout when omitted)
        #[arg(short, long, value_name = "PATH")]
        out: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        svg: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
        /// Uniform α grid instead of clustering near the endpoints
        #[arg(long)]
        linear: bool,
    },
    /// Trace the curve and check each point by shooting
    #[command(after_help = GRAMMAR)]
    Verify {
        #[command(flatten)]
        problem: ProblemArgs,
        #[arg(short = 'n', long, default_value_t = 16)]
        points: usize,
        #[arg(long, value_name = "PATH")]
        json: Option<PathBuf>,
    },
    /// List the built-in examples with their published results
    Fixtures,
}

#[derive(Args)]
struct ProblemArgs {
    /// The nonlinearity f(u)
    #[arg(required_unless_present = "fixture", conflicts_with = "fixture")]
    expr: Option<String>,
    /// Use a built-in example (see `semibif fixtures`)
    #[arg(long, value_name = "NAME")]
    fixture: Option<String>,
    /// Bind a parameter; repeatable
    #[arg(long = "param", value_name = "K=V", value_parser = parse_param)]
    params: Vec<(String, f64)>,
    /// Closed-form F(u) = ∫₀ᵘ f, used instead of quadrature
    #[arg(long, value_name = "EXPR")]
    antiderivative: Option<String>,
    /// Upper end of the landmark scan
    #[arg(long, value_name = "R")]
    umax: Option<f64>,
    /// Quadrature tolerance
    #[arg(long, value_name = "R")]
    tol: Option<f64>,
    /// Exponent of the logarithmic probe near β₂ (must exceed 2)
    #[arg(long, value_name = "R")]
    tau: Option<f64>,
    /// Classify a limit by hand instead of probing; repeatable
    #[arg(long = "assert-limit", value_name = "KEY=CLASS")]
    assert_limit: Vec<String>,
}

fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected NAME=VALUE, got `{s}`"))?;
    let v: f64 = v.trim().parse().map_err(|_| format!("`{v}` is not a number"))?;
    Ok((k.trim().to_string(), v))
}

impl ProblemArgs {
    fn input(&self) -> Result<AnalysisInput, String> {
        let mut input = match (&self.fixture, &self.expr) {
            (Some(name), _) => {
                let fx = lookup(name).ok_or_else(|| {
                    let names: Vec<_> = FIXTURES.iter().map(|f| f.name).collect();
                    format!("unknown fixture `{name}`; available: {}", names.join(", "))
                })?;
                AnalysisInput::from_fixture(fx)
            }
            (None, Some(expr)) => AnalysisInput::new(expr),
            (None, None) => return Err("give an expression or --fixture".into()),
        };
        if self.antiderivative.is_some() {
            input.antiderivative = self.antiderivative.clone();
        }
        for (k, v) in &self.params {
            input.params.insert(k, *v);
        }
        if let Some(u) = self.umax {
            if !(u > 0.0) {
                return Err(format!("--umax must be positive, got {u}"));
            }
            input.u_max = u;
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t < 1.0) {
                return Err(format!("--tol must lie in (0, 1), got {t}"));
            }
            input.options.tol = t;
        }
        if let Some(t) = self.tau {
            if !(t > 2.0) {
                return Err(format!("--tau must exceed 2, got {t}"));
            }
            input.options.tau = t;
        }
        for a in &self.assert_limit {
            input.options.overrides.assert_str(a).map_err(|e| format!("--assert-limit {a}: {e}"))?;
        }
        Ok(input)
    }

    fn title(&self, input: &AnalysisInput) -> String {
        match &input.fixture {
            Some(name) => format!("{name}: f(u) = {}", input.expression),
            None => format!("f(u) = {}", input.expression),
        }
    }
}

fn run_analysis(problem: &ProblemArgs) -> Result<(AnalysisInput, Analysis), String> {
    let input = problem.input()?;
    let analysis = analyze(&input).map_err(|e| e.to_string())?;
    Ok((input, analysis))
}

fn run_trace(analysis: &Analysis, n: usize, spacing: Spacing) -> Result<CurveTrace, String> {
    let (Some(nl), Some(lm)) = (&analysis.nonlinearity, &analysis.landmarks) else {
        let why = analysis.warnings.first().cloned().unwrap_or_default();
        return Err(format!("no curve to trace: {why}"));
    };
    trace(nl, lm, n, spacing, analysis.input.options.tol).map_err(|e| e.to_string())
}

fn write_file(path: &Path, text: &str) -> Result<(), String> {
    fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn show(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_infinite() => if x > 0.0 { "∞" } else { "−∞" }.to_string(),
        Some(x) => fmt_sig(x, 10),
        None => "unresolved".into(),
    }
}

fn err_bar(e: f64) -> String {
    if e == 0.0 {
        "(exact)".into()
    } else {
        format!("± {}", fmt_sig(e, 2))
    }
}

fn print_summary(a: &Analysis) {
    let s = &a.summary;
    match &s.shape.rule_fired {
        Some(rule) => println!("shape: {} ({rule})", s.shape.shape),
        None => println!("shape: {}", s.shape.shape),
    }
    if let Some(lm) = &a.landmarks {
        let opt = |name: &str, v: Option<f64>| {
            if let Some(x) = v {
                println!("  {name:<6} {}", show(Some(x)));
            }
        };
        opt("β₁", Some(lm.beta1));
        opt("β₂", Some(lm.beta2));
        opt("η", lm.eta);
        opt("σ", lm.sigma);
        opt("ρ", lm.rho);
        opt("γ", lm.gamma);
    }
    if let Some(ep) = &a.endpoints {
        println!("  λ̂      {} {}", show(ep.lambda_hat.value), err_bar(ep.lambda_hat.abs_error));
        println!("  κ      {} {}", show(ep.kappa.value), err_bar(ep.kappa.abs_error));
        println!("  G      {} {}", show(ep.g.value), err_bar(ep.g.abs_error));
    }
    let end = |e: &Option<semibif_core::classify::CurveEnd>| match e {
        Some(e) => format!("(λ, α) = ({}, {})", show(e.lambda), show(Some(e.alpha))),
        None => "—".into(),
    };
    if s.start.is_some() || s.end.is_some() {
        println!("start: {}", end(&s.start));
        println!("end:   {}", end(&s.end));
    }
    for n in &s.notes {
        println!("note: {n}");
    }
    for w in &a.warnings {
        eprintln!("warning: {w}");
    }
}

fn cmd_analyze(problem: &ProblemArgs, json: Option<&Path>) -> Result<(), String> {
    let (_, analysis) = run_analysis(problem)?;
    let mut report = AnalysisReport::new(&analysis);
    match json {
        Some(p) if p == Path::new("-") => print!("{}", report.to_json()),
        Some(p) => {
            report.files.json = Some(p.display().to_string());
            write_file(p, &report.to_json())?;
            print_summary(&analysis);
        }
        None => print_summary(&analysis),
    }
    Ok(())
}

fn cmd_trace(
    problem: &ProblemArgs,
    n: usize,
    out: Option<&Path>,
    svg: Option<&Path>,
    json: Option<&Path>,
    linear: bool,
) -> Result<(), String> {
    let (input, analysis) = run_analysis(problem)?;
    let spacing = if linear { Spacing::Linear } else { Spacing::GeometricNearEndpoints };
    let tr = run_trace(&analysis, n, spacing)?;
    let csv = write_csv(&tr);
    match out {
        Some(p) => write_file(p, &csv)?,
        None => print!("{csv}"),
    }
    if let Some(p) = svg {
        write_file(p, &render_svg(&tr, &problem.title(&input)))?;
    }
    if let Some(p) = json {
        let mut report = AnalysisReport::new(&analysis).with_trace(&tr);
        report.files.csv = out.map(|p| p.display().to_string());
        report.files.svg = svg.map(|p| p.display().to_string());
        report.files.json = Some(p.display().to_string());
        write_file(p, &report.to_json())?;
    }
    if tr.empirical.shape != analysis.summary.shape.shape {
        eprintln!(
            "warning: sampled shape {} differs from the theorem verdict {}",
            tr.empirical.shape, analysis.summary.shape.shape
        );
    }
    if out.is_some() {
        eprintln!("{} points, {}; sampled shape {}", tr.points.len(), tr.alpha_grid_spec, tr.empirical.shape);
        if let Some(m) = tr.min_point {
            eprintln!("minimum λ* = {} at α* = {}", fmt_sig(m.lambda, 10), fmt_sig(m.alpha, 10));
        }
    }
    Ok(())
}

fn cmd_verify(problem: &ProblemArgs, n: usize, json: Option<&Path>) -> Result<bool, String> {
    let (_, analysis) = run_analysis(problem)?;
    let tr = run_trace(&analysis, n, Spacing::Linear)?;
    let nl = analysis.nonlinearity.as_ref().expect("traced curves have a nonlinearity");
    let v = verify_trace(nl, &tr.points, DEFAULT_RTOL).map_err(|e| e.to_string())?;
    println!("points:                 {}", v.shots.len());
    println!("worst |u(1)|:           {}", fmt_sig(v.worst_residual, 3));
    println!("worst relative drift:   {}", fmt_sig(v.worst_relative_drift, 3));
    println!("{}", if v.passed { "pass" } else { "FAIL" });
    if let Some(p) = json {
        let mut report = AnalysisReport::new(&analysis).with_trace(&tr);
        report.verification = Some(VerificationReport::from(&v));
        report.files.json = Some(p.display().to_string());
        write_file(p, &report.to_json())?;
    }
    Ok(v.passed)
}

fn cmd_fixtures() {
    for fx in FIXTURES {
        println!("{:<24} {}", fx.name, fx.summary);
        println!("    f = {}", fx.f);
        if let Some(big_f) = fx.big_f {
            println!("    F = {big_f}");
        }
        if !fx.params.is_empty() {
            let p: Vec<_> = fx.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            println!("    params: {}", p.join(" "));
        }
        if let Some(u) = fx.u_max {
            println!("    u_max: {u}");
        }
        for (k, v) in fx.expected {
            println!("    {k}: {v}");
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Analyze { problem, json } => cmd_analyze(problem, json.as_deref()).map(|_| true),
        Command::Trace { problem, points, out, svg, json, linear } => {
            cmd_trace(problem, *points, out.as_deref(), svg.as_deref(), json.as_deref(), *linear)
                .map(|_| true)
        }
        Command::Verify { problem, points, json } => cmd_verify(problem, *points, json.as_deref()),
        Command::Fixtures => {
            cmd_fixtures();
            Ok(true)
        }
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
