mod args;
mod config;
mod format;

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;
use std::process::ExitCode;

use clap::Parser;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;
use vnfscale_core::{
    compare, simulate, solve, BaseParams, CostSpec, KScan, Metric, ParamError, PerformanceMetrics, RawParams,
    SystemParams,
};

use args::{Cli, Command, CompareArgs, Format, OptimizeArgs, SimulateArgs, SolveArgs, SweepArgs, SweepParam};
use config::ConfigFile;
use format::g12;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Invalid(String),
    #[error("invalid parameters: {0}")]
    Params(#[from] ParamError),
    #[error(transparent)]
    Core(#[from] vnfscale_core::Error),
    #[error("cannot write output: {0}")]
    Io(#[from] io::Error),
}

const EXIT_INVALID: u8 = 2;
const EXIT_NOT_COVERED: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INVALID)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Command::Solve(a) => run_solve(a),
        Command::Sweep(a) => run_sweep(a),
        Command::Optimize(a) => run_optimize(a),
        Command::Simulate(a) => run_simulate(a),
        Command::Compare(a) => run_compare(a),
    }
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), CliError> {
    match output {
        Some(path) => fs::write(path, text)?,
        None => io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn metric_cells(m: &PerformanceMetrics) -> String {
    Metric::ALL.iter().map(|&x| g12(m.get(x))).collect::<Vec<_>>().join(",")
}

const METRIC_HEADER: &str = "L,W,Wq,Pb,S";

#[derive(Serialize)]
struct SolveRecord {
    #[serde(flatten)]
    params: RawParams,
    #[serde(flatten)]
    metrics: PerformanceMetrics,
}

fn run_solve(a: SolveArgs) -> Result<ExitCode, CliError> {
    let file = ConfigFile::load(a.common.config.as_deref())?;
    let p = file.params(&a.params)?;
    let metrics = solve(&p)?.metrics;
    let text = match a.common.format {
        Format::Json => to_json(&SolveRecord { params: p.raw(), metrics }),
        Format::Csv => {
            let r = p.raw();
            format!(
                "lambda,mu,alpha,n0,k,K,{METRIC_HEADER}\n{},{},{},{},{},{},{}\n",
                g12(r.lambda),
                g12(r.mu),
                g12(r.alpha),
                r.n0,
                r.k,
                r.capacity,
                metric_cells(&metrics)
            )
        }
    };
    emit(&text, a.common.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SweepRow {
    series: String,
    param: &'static str,
    value: f64,
    #[serde(flatten)]
    metrics: PerformanceMetrics,
}

fn grid(param: SweepParam, from: f64, to: f64, step: f64) -> Result<Vec<f64>, CliError> {
    if !(from.is_finite() && to.is_finite() && from <= to) {
        return Err(CliError::Invalid(format!("sweep needs from <= to, got {from}..{to}")));
    }
    if !(step > 0.0 && step.is_finite()) {
        return Err(CliError::Invalid(format!("sweep step must be > 0, got {step}")));
    }
    if param.is_integer() && [from, to, step].iter().any(|v| v.fract() != 0.0) {
        return Err(CliError::Invalid(format!("{} sweeps take integer from/to/step", param.name())));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| from + i as f64 * step).collect())
}

fn set_param(raw: &mut RawParams, param: SweepParam, value: f64) {
    match param {
        SweepParam::Lambda => raw.lambda = value,
        SweepParam::Mu => raw.mu = value,
        SweepParam::Alpha => raw.alpha = value,
        SweepParam::N0 => raw.n0 = value as i64,
        SweepParam::K => raw.k = value as i64,
        SweepParam::Capacity => raw.capacity = value as i64,
    }
}

fn run_sweep(a: SweepArgs) -> Result<ExitCode, CliError> {
    let file = ConfigFile::load(a.common.config.as_deref())?;
    let xs = grid(a.param, a.from, a.to, a.step)?;

    // The swept and series parameters need no other source.
    let mut flags = a.params.clone();
    let mut touch = |p: SweepParam| match p {
        SweepParam::Lambda => flags.base.lambda = flags.base.lambda.or(Some(1.0)),
        SweepParam::K => flags.k = flags.k.or(Some(0)),
        _ => {}
    };
    touch(a.param);
    if let Some(sp) = a.series_param {
        touch(sp);
    }
    if flags.k.is_none() && file.params.k.is_none() {
        return Err(CliError::Invalid("k is required (--k, params.k, or sweep over k)".into()));
    }
    let base = file.raw_params(&flags.base, flags.k)?;

    let series: Vec<(String, RawParams)> = match a.series_param {
        Some(sp) => a
            .series
            .iter()
            .map(|&v| {
                if sp.is_integer() && v.fract() != 0.0 {
                    return Err(CliError::Invalid(format!("{} series values must be integers", sp.name())));
                }
                let mut raw = base;
                set_param(&mut raw, sp, v);
                Ok((format!("{}={}", sp.name(), g12(v)), raw))
            })
            .collect::<Result<_, _>>()?,
        None => vec![("default".to_string(), base)],
    };

    let jobs: Vec<(usize, f64)> = (0..series.len()).flat_map(|s| xs.iter().map(move |&x| (s, x))).collect();
    let rows: Vec<SweepRow> = jobs
        .par_iter()
        .map(|&(s, x)| {
            let (name, raw) = &series[s];
            let mut raw = *raw;
            set_param(&mut raw, a.param, x);
            let at = || format!("series {name}, {} = {}", a.param.name(), g12(x));
            let p = SystemParams::try_from(raw).map_err(|e| CliError::Invalid(format!("{}: {e}", at())))?;
            let m = solve(&p).map_err(|e| CliError::Invalid(format!("{}: {e}", at())))?.metrics;
            Ok(SweepRow {
                series: name.clone(),
                param: a.param.name(),
                value: x,
                metrics: m,
            })
        })
        .collect::<Result<_, CliError>>()?;

    let text = match a.common.format {
        Format::Json => to_json(&rows),
        Format::Csv => {
            let mut s = format!("series,param,value,{METRIC_HEADER}\n");
            for r in &rows {
                writeln!(s, "{},{},{},{}", r.series, r.param, g12(r.value), metric_cells(&r.metrics)).unwrap();
            }
            s
        }
    };
    emit(&text, a.common.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn cost_spec(a: &OptimizeArgs, file: &ConfigFile) -> Result<(bool, CostSpec), CliError> {
    let threshold_flags = a.delta.is_some() || a.s_bar.is_some() || a.wq_bar.is_some();
    let weight_flags = a.w1.is_some() || a.w2.is_some() || a.wq_limit.is_some();
    let mut spec = file.cost;
    spec.delta = a.delta.or(spec.delta);
    spec.s_bar = a.s_bar.or(spec.s_bar);
    spec.wq_bar = a.wq_bar.or(spec.wq_bar);
    spec.w1 = a.w1.or(spec.w1);
    spec.w2 = a.w2.or(spec.w2);
    spec.wq_limit = a.wq_limit.or(spec.wq_limit);
    let threshold = if threshold_flags {
        true
    } else if weight_flags {
        false
    } else if spec.delta.is_some() {
        true
    } else if spec.has_weights() {
        false
    } else {
        return Err(CliError::Invalid(
            "choose a mode: --delta [--s-bar --wq-bar] for the threshold walk, or --w1/--w2 [--wq-limit] for cost minimization".into(),
        ));
    };
    if threshold && spec.delta.is_none() {
        return Err(CliError::Invalid("the threshold walk needs --delta".into()));
    }
    spec.validate()?;
    Ok((threshold, spec))
}

fn run_optimize(a: OptimizeArgs) -> Result<ExitCode, CliError> {
    let file = ConfigFile::load(a.common.config.as_deref())?;
    let (threshold, mut spec) = cost_spec(&a, &file)?;
    let p0 = SystemParams::try_from(file.raw_params(&a.base, Some(0))?)?;
    let base = BaseParams::from(p0);
    let mut scan = KScan::new(base);

    let result = if threshold {
        if spec.s_bar.is_none() {
            spec.s_bar = Some(base.k_max().max(1) as f64);
        }
        if spec.wq_bar.is_none() {
            let wq0 = scan.metrics_at(0)?.wq;
            spec.wq_bar = Some(if wq0 > 0.0 { wq0 } else { 1.0 });
        }
        let k_op = scan.threshold_walk(&spec)?;
        let calls = scan.solver_calls();
        scan.fill()?;
        let r = scan.result_for(k_op, &spec)?;
        (r, Some(calls))
    } else {
        (scan.argmin(&spec)?, None)
    };
    let (r, walk_calls) = result;

    let text = match a.common.format {
        Format::Json => to_json(&json!({
            "mode": if threshold { "threshold" } else { "argmin" },
            "params": { "lambda": p0.lambda(), "mu": p0.mu(), "alpha": p0.alpha(), "n0": p0.n0(), "K": p0.capacity() },
            "cost_spec": spec,
            "walk_solver_calls": walk_calls,
            "k_op": r.k_op,
            "cost": r.cost,
            "feasible": r.feasible,
            "metrics": r.metrics,
            "scan": r.scan,
        })),
        Format::Csv => {
            let mut s = String::from("k,Wq,S,C,selected\n");
            for row in &r.scan {
                writeln!(
                    s,
                    "{},{},{},{},{}",
                    row.k,
                    g12(row.wq),
                    g12(row.s),
                    row.cost.map(g12).unwrap_or_default(),
                    (row.k == r.k_op) as u8
                )
                .unwrap();
            }
            s
        }
    };
    emit(&text, a.common.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn run_simulate(a: SimulateArgs) -> Result<ExitCode, CliError> {
    let file = ConfigFile::load(a.common.config.as_deref())?;
    let p = file.params(&a.params)?;
    let config = file.sim(&a.sim)?;
    let sim = simulate(&p, &config)?;
    let text = match a.common.format {
        Format::Json => to_json(&sim),
        Format::Csv => {
            let mut s = String::from("metric,mean,half_width\n");
            for m in Metric::ALL {
                let e = sim.get(m);
                writeln!(s, "{m},{},{}", g12(e.mean), e.half_width.map(g12).unwrap_or_default()).unwrap();
            }
            s
        }
    };
    emit(&text, a.common.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn run_compare(a: CompareArgs) -> Result<ExitCode, CliError> {
    let file = ConfigFile::load(a.common.config.as_deref())?;
    let p = file.params(&a.params)?;
    let config = file.sim(&a.sim)?;
    let exact = solve(&p)?.metrics;
    let sim = simulate(&p, &config)?;
    let c = compare(&p, &exact, &sim)?;
    let text = match a.common.format {
        Format::Json => to_json(&json!({
            "params": p,
            "config": config,
            "exponential": c.exponential,
            "all_covered": c.all_covered(),
            "rows": c.rows,
        })),
        Format::Csv => {
            let mut s = String::from("metric,analytical,simulated,half_width,abs_gap,rel_gap,covered\n");
            for r in &c.rows {
                writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    r.metric,
                    g12(r.analytical),
                    g12(r.simulated),
                    r.half_width.map(g12).unwrap_or_default(),
                    g12(r.abs_gap),
                    r.rel_gap.map(g12).unwrap_or_default(),
                    r.covered
                )
                .unwrap();
            }
            s
        }
    };
    emit(&text, a.common.output.as_deref())?;
    if a.strict && !c.all_covered() {
        eprintln!("error: some exact values fall outside the simulated confidence intervals");
        return Ok(ExitCode::from(EXIT_NOT_COVERED));
    }
    Ok(ExitCode::SUCCESS)
}
