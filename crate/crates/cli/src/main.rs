use std::fs;
use std::io::{self, Write};
use std::process::ExitCode;

use boundcop::{
    eval_copula, measures_closed, measures_numeric, round_half_up, run_des_detailed, sweep_theta, tail_closed,
    tail_numeric, validate, CopulaSpec, Error, MeasureReport, Method, ServiceModel, SimConfig, SimMode, SystemSpec,
    TailCoefficients, UnitPoint, ValidationOptions, Variant,
};
use clap::Parser;
use serde::Serialize;

mod args;
mod config;
mod range;

use args::*;

/// Message and process exit code.
struct Failure(String, u8);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Unstable { .. } => 6,
            Error::NotConverged { .. } => 5,
            _ => 2,
        };
        Failure(e.to_string(), code)
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure(msg.into(), 2)
}

/// `x` at 12 significant digits, printed in shortest form.
fn sig12(x: f64) -> String {
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    if rounded != 0.0 && (rounded.abs() < 1e-4 || rounded.abs() >= 1e12) {
        format!("{rounded:e}")
    } else {
        format!("{rounded}")
    }
}

fn parse_spec(text: &str) -> Result<CopulaSpec, Failure> {
    text.parse::<CopulaSpec>().map_err(Failure::from)
}

fn json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("results serialize")
}

fn service_model(model: Model, mu: f64, delta: Option<f64>) -> Result<ServiceModel, Failure> {
    Ok(match model {
        Model::ShiftedExp => ServiceModel::shifted_exponential(mu, delta.unwrap_or(0.0))?,
        Model::HypoExp => {
            if delta.is_some_and(|d| d != 0.0) {
                return Err(usage("the hypo-exponential model has no shift; drop --delta"));
            }
            ServiceModel::hypo_exponential(mu)?
        }
    })
}

fn variant(v: VariantArg) -> Variant {
    match v {
        VariantArg::Paper => Variant::PaperFormula,
        VariantArg::Exact => Variant::ExactPiecewise,
    }
}

fn cmd_eval(a: &EvalArgs) -> Result<String, Failure> {
    let spec = parse_spec(&a.spec)?;
    let p = UnitPoint::new(a.u, a.v)?;
    Ok(format!("{}\n", sig12(eval_copula(&spec, p))))
}

fn cmd_validate(a: &ValidateArgs) -> Result<(String, u8), Failure> {
    let spec = parse_spec(&a.spec)?;
    if a.n < 2 {
        return Err(usage("--n must be at least 2"));
    }
    let opts = ValidationOptions {
        diagonal_probes: a.probes == Probes::Diagonal,
        ..ValidationOptions::new(a.n, a.random_count, a.seed)
    };
    let report = validate(&spec, &opts);
    Ok((json(&report) + "\n", report.verdict.exit_code() as u8))
}

#[derive(Serialize)]
struct MeasuresOutput {
    spec: String,
    rho: f64,
    tau: f64,
    beta: f64,
    gamma: f64,
    lambda_lower: f64,
    lambda_upper: f64,
    method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    resolution: Option<usize>,
    tail_method: &'static str,
    converged: bool,
}

fn cmd_measures(a: &MeasuresArgs) -> Result<(String, u8), Failure> {
    let spec = parse_spec(&a.spec)?;
    let (report, tail, tail_method, converged): (MeasureReport, TailCoefficients, _, _) = match a.method {
        MethodArg::Closed => (measures_closed(&spec, a.n)?, tail_closed(&spec), "closed_form", true),
        MethodArg::Quadrature => {
            if a.n < 64 || a.n % 2 == 1 {
                return Err(usage("--n must be even and at least 64"));
            }
            let tail = tail_numeric(&spec, a.probe)?;
            match measures_numeric(&spec, a.n) {
                Ok(r) => (r, tail, "probe", true),
                Err(u) => {
                    eprintln!(
                        "warning: quadrature did not converge: estimates at n and 2n differ by {:e}",
                        u.delta
                    );
                    (u.report, tail, "probe", false)
                }
            }
        }
    };
    let out = MeasuresOutput {
        spec: spec.to_string(),
        rho: report.rho,
        tau: report.tau,
        beta: report.beta,
        gamma: report.gamma,
        lambda_lower: tail.lambda_lower,
        lambda_upper: tail.lambda_upper,
        method: report.method,
        resolution: report.resolution,
        tail_method,
        converged,
    };
    let text = match a.format {
        MeasuresFormat::Json => json(&out) + "\n",
        MeasuresFormat::Table => {
            let method = match out.method {
                Method::ClosedForm => "closed_form",
                Method::Quadrature => "quadrature",
            };
            let mut s = String::from("measure,value,method\n");
            for (name, value) in [
                ("rho", out.rho),
                ("tau", out.tau),
                ("beta", out.beta),
                ("gamma", out.gamma),
            ] {
                s.push_str(&format!("{name},{},{method}\n", sig12(value)));
            }
            for (name, value) in [("lambda_lower", out.lambda_lower), ("lambda_upper", out.lambda_upper)] {
                s.push_str(&format!("{name},{},{tail_method}\n", sig12(value)));
            }
            s
        }
    };
    Ok((text, if converged { 0 } else { 5 }))
}

#[derive(Serialize)]
struct TableRow {
    theta: f64,
    ew: Option<f64>,
    es: f64,
    variant: Variant,
    stable: bool,
}

fn cmd_tables(a: &TablesArgs) -> Result<String, Failure> {
    let service = service_model(a.model, a.mu, a.delta)?;
    if !(a.lambda.is_finite() && a.lambda > 0.0) {
        return Err(usage(format!("--lambda must be positive, got {}", a.lambda)));
    }
    let thetas = range::parse_range(&a.theta).map_err(|e| usage(e.to_string()))?;
    let rows = sweep_theta(a.lambda, service, variant(a.variant), &thetas)?;
    let shape = |x: f64| a.round.map_or(x, |d| round_half_up(x, d));
    let show = |x: f64| match a.round {
        Some(d) => format!("{:.*}", d as usize, shape(x)),
        None => format!("{x}"),
    };
    let unstable = rows.iter().filter(|r| !r.stable).count();
    if unstable > 0 {
        eprintln!("note: {unstable} row(s) unstable (lambda * E[min] >= 1); their ew is left empty");
    }
    match a.format {
        TablesFormat::Json => {
            let shaped: Vec<TableRow> = rows
                .iter()
                .map(|r| TableRow {
                    theta: r.theta,
                    ew: r.ew.map(shape),
                    es: shape(r.es),
                    variant: r.variant,
                    stable: r.stable,
                })
                .collect();
            Ok(json(&shaped) + "\n")
        }
        TablesFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["theta", "ew", "es", "variant", "stable"])
                .expect("in-memory write");
            for r in &rows {
                let ew = r.ew.map(show).unwrap_or_default();
                w.write_record([
                    format!("{}", r.theta),
                    ew,
                    show(r.es),
                    r.variant.as_str().into(),
                    r.stable.to_string(),
                ])
                .expect("in-memory write");
            }
            Ok(String::from_utf8(w.into_inner().expect("flush")).expect("ascii"))
        }
    }
}

fn cmd_simulate(a: &SimulateArgs) -> Result<String, Failure> {
    let service = service_model(a.model, a.mu, a.delta)?;
    let system = SystemSpec::new(a.lambda, service, a.theta, variant(a.variant))?;
    let mode = match a.mode {
        ModeArg::Reduced => SimMode::ReducedMinService,
        ModeArg::Literal => SimMode::LiteralTwoQueue,
    };
    let mut cfg = SimConfig::new(system, a.arrivals, a.reps, a.seed, mode);
    if let Some(w) = a.warmup {
        cfg.warmup = w;
    }
    let (result, reps) = run_des_detailed(&cfg)?;
    if let Some(path) = &a.csv {
        let mut w = csv::Writer::from_path(path).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
        for r in &reps {
            w.serialize(r)
                .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
        }
        w.flush()
            .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    }
    Ok(json(&result) + "\n")
}

fn run(cli: Cli) -> Result<(String, u8), Failure> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(usage("--workers must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| usage(e.to_string()))?;
    }
    let command = match (&cli.config, cli.command) {
        (Some(path), None) => {
            let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
            let argv = config::to_argv(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            Cli::try_parse_from(argv)
                .map_err(|e| usage(format!("{}: {e}", path.display())))?
                .command
                .expect("config names a command")
        }
        (Some(_), Some(_)) => return Err(usage("give either --config or a subcommand, not both")),
        (None, Some(c)) => c,
        (None, None) => return Err(usage("no command given; see --help")),
    };
    if cli.print_config {
        return Ok((config::to_text(&command), 0));
    }
    match &command {
        Command::Eval(a) => cmd_eval(a).map(|s| (s, 0)),
        Command::Validate(a) => cmd_validate(a),
        Command::Measures(a) => cmd_measures(a),
        Command::Tables(a) => cmd_tables(a).map(|s| (s, 0)),
        Command::Simulate(a) => cmd_simulate(a).map(|s| (s, 0)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok((out, code)) => {
            let mut stdout = io::stdout().lock();
            // a closed pipe is not worth a panic
            let _ = stdout.write_all(out.as_bytes()).and_then(|_| stdout.flush());
            ExitCode::from(code)
        }
        Err(Failure(msg, code)) => {
            eprintln!("boundcop: {msg}");
            ExitCode::from(code)
        }
    }
}
