//! Command-line surface: exact DoF evaluation, figure-data tables,
//! slot-level simulation runs, the verification suite, and asymptotic
//! limits.
//!
//! Exit codes: 0 on success, 1 when verification or a simulation check
//! fails, 2 on usage errors.

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use retroalign_core::dof::{self, Limit};
use retroalign_core::field::{Cf64, Fp61};
use retroalign_core::rational::{render, sig12, to_f64, Rational};
use retroalign_core::schemes::Policy;
use retroalign_core::verify::{run_scope, Scope};
use retroalign_core::{ChannelKind, DofError, ModelId, SchemeError};
use serde_json::json;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "retroalign",
    version,
    about = "Exact DoF analysis and slot-level simulation of multi-phase interference-alignment schemes"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FieldMode {
    Prime,
    Complex,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one model's achievable DoF exactly
    Dof {
        #[arg(long)]
        model: ModelId,
        #[arg(long)]
        k: u32,
        /// Transmitter count for the full-duplex X channel
        #[arg(long = "m-tx")]
        m_tx: Option<u32>,
    },
    /// Tabulate DoF curves over a range of K (figure data as CSV)
    Table {
        /// Comma-separated models
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "icfd,icof,icsf,xfd,xof,xsf"
        )]
        models: Vec<ModelId>,
        /// Inclusive range, e.g. 3..30
        #[arg(long = "k-range", value_parser = parse_range, default_value = "2..30")]
        k_range: (u32, u32),
        /// Transmitter counts for xfd columns; `wide` means ceil(K/2)+1
        #[arg(long = "m-tx", value_delimiter = ',', default_value = "2,3")]
        m_tx: Vec<String>,
        /// Add one column per fan-out width candidate for icof/icsf
        #[arg(long)]
        per_candidate: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Execute a scheme slot-by-slot over random channel realizations
    Simulate {
        #[arg(long)]
        model: ModelId,
        #[arg(long)]
        k: u32,
        #[arg(long = "m-tx")]
        m_tx: Option<u32>,
        /// Base seed; trial i runs with seed+i (RETROALIGN_SEED overrides)
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, value_enum, default_value = "prime")]
        field: FieldMode,
        /// Fail hard on any infeasible transmission (default)
        #[arg(long, overrides_with = "no_strict")]
        strict: bool,
        /// Record feasibility violations and keep going
        #[arg(long)]
        no_strict: bool,
        /// Emit the slot-level trace before the report (single trial only)
        #[arg(long)]
        trace: bool,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the verification suite
    Verify {
        /// all, golden, appendices, asymptotics, ordering, optimizer,
        /// simulation, phases, or genericity
        #[arg(long, default_value = "all")]
        scope: Scope,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Print the large-network DoF limits
    Limits {
        /// Transmitter counts for the fixed-M full-duplex X-channel limits
        #[arg(long = "m-tx", value_delimiter = ',', default_value = "2,3")]
        m_tx: Vec<u32>,
        #[command(flatten)]
        output: OutputArgs,
    },
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s
        .split_once("..")
        .ok_or_else(|| format!("expected A..B, got `{s}`"))?;
    let lo: u32 = a
        .trim()
        .parse()
        .map_err(|e| format!("bad range start: {e}"))?;
    let hi: u32 = b
        .trim()
        .parse()
        .map_err(|e| format!("bad range end: {e}"))?;
    if lo > hi {
        return Err(format!("empty range {lo}..{hi}"));
    }
    Ok((lo, hi))
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

struct Sink {
    out: Box<dyn Write>,
}

impl Sink {
    fn new(path: &Option<PathBuf>) -> std::io::Result<Sink> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(std::fs::File::create(p)?),
            None => Box::new(std::io::stdout()),
        };
        Ok(Sink { out })
    }

    fn line(&mut self, s: &str) {
        writeln!(self.out, "{s}").expect("write output");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Dof { model, k, m_tx } => cmd_dof(model, k, m_tx),
        Command::Table {
            models,
            k_range,
            m_tx,
            per_candidate,
            output,
        } => cmd_table(&models, k_range, &m_tx, per_candidate, &output),
        Command::Simulate {
            model,
            k,
            m_tx,
            seed,
            trials,
            field,
            strict: _,
            no_strict,
            trace,
            output,
        } => cmd_simulate(
            model, k, m_tx, seed, trials, field, !no_strict, trace, &output,
        ),
        Command::Verify { scope, format } => cmd_verify(scope, format),
        Command::Limits { m_tx, output } => cmd_limits(&m_tx, &output),
    }
}

fn analytic(model: ModelId, k: u32, m_tx: Option<u32>) -> Result<Rational, DofError> {
    use retroalign_core::Feedback;
    match (model.channel, model.feedback) {
        (ChannelKind::Ic, Feedback::FullDuplexDelayedCsit) => dof::dof_icfd_closed(k),
        (ChannelKind::Ic, Feedback::OutputFeedback) => dof::dof_icof(k),
        (ChannelKind::Ic, Feedback::ShannonFeedback) => dof::dof_icsf(k),
        (ChannelKind::X, Feedback::FullDuplexDelayedCsit) => dof::dof_xfd(
            m_tx.ok_or_else(|| DofError::OutOfRange("xfd needs --m-tx".into()))?,
            k,
        ),
        (ChannelKind::X, Feedback::OutputFeedback) => dof::dof_xof(k),
        (ChannelKind::X, Feedback::ShannonFeedback) => dof::dof_xsf(k),
    }
}

fn cmd_dof(model: ModelId, k: u32, m_tx: Option<u32>) -> ExitCode {
    match analytic(model, k, m_tx) {
        Ok(d) => {
            println!(
                "{model} K={k}{}: {} = {}",
                m_tx.map(|m| format!(" M={m}")).unwrap_or_default(),
                render(&d),
                sig12(to_f64(&d))
            );
            ExitCode::SUCCESS
        }
        Err(DofError::UnsupportedRegime { reason, fallback }) => {
            println!(
                "{model} K={k}: unsupported regime ({reason}); trivial DoF {}",
                render(&fallback)
            );
            ExitCode::SUCCESS
        }
        Err(e) => usage_error(&e.to_string()),
    }
}

fn table_cell(value: Result<Rational, DofError>) -> (String, String) {
    match value {
        Ok(d) => (render(&d), sig12(to_f64(&d))),
        Err(_) => ("unsupported".into(), "unsupported".into()),
    }
}

fn cmd_table(
    models: &[ModelId],
    (k_lo, k_hi): (u32, u32),
    m_tx: &[String],
    per_candidate: bool,
    output: &OutputArgs,
) -> ExitCode {
    let mut sink = match Sink::new(&output.out) {
        Ok(s) => s,
        Err(e) => return usage_error(&format!("cannot open output: {e}")),
    };
    let mut xfd_cols: Vec<Option<u32>> = Vec::new();
    for entry in m_tx {
        if entry == "wide" {
            xfd_cols.push(None);
        } else {
            match entry.parse::<u32>() {
                Ok(m) => xfd_cols.push(Some(m)),
                Err(e) => return usage_error(&format!("--m-tx `{entry}`: {e}")),
            }
        }
    }
    let w_max = k_hi.div_ceil(2).max(2);

    let mut header = vec!["k".to_string()];
    for model in models {
        if *model == ModelId::X_FD {
            for col in &xfd_cols {
                let tag = col
                    .map(|m| format!("m{m}"))
                    .unwrap_or_else(|| "wide".into());
                header.push(format!("xfd_{tag}"));
                header.push(format!("xfd_{tag}_dec"));
            }
        } else {
            header.push(model.to_string());
            header.push(format!("{model}_dec"));
        }
        if per_candidate && (*model == ModelId::IC_OF || *model == ModelId::IC_SF) {
            for w in 2..=w_max {
                header.push(format!("{model}_w{w}"));
            }
        }
    }

    let mut rows: Vec<Vec<String>> = Vec::new();
    for k in k_lo..=k_hi {
        let mut row = vec![k.to_string()];
        for model in models {
            if *model == ModelId::X_FD {
                for col in &xfd_cols {
                    let m_val = col.unwrap_or(k.div_ceil(2) + 1);
                    let (frac, dec) = table_cell(dof::dof_xfd(m_val, k));
                    row.push(frac);
                    row.push(dec);
                }
            } else {
                let (frac, dec) = table_cell(analytic(*model, k, None));
                row.push(frac);
                row.push(dec);
            }
            if per_candidate && (*model == ModelId::IC_OF || *model == ModelId::IC_SF) {
                for w in 2..=w_max {
                    let cell = if k >= 3 && w <= k.div_ceil(2).max(2) {
                        let v = if *model == ModelId::IC_OF {
                            dof::f_icof(k, w)
                        } else {
                            dof::icsf_objective(k, w)
                        };
                        v.map(|d| render(&d)).unwrap_or_default()
                    } else {
                        String::new()
                    };
                    row.push(cell);
                }
            }
        }
        rows.push(row);
    }

    match output.format {
        Format::Csv => {
            sink.line(&header.join(","));
            for row in rows {
                sink.line(&row.join(","));
            }
        }
        Format::Json => {
            for row in rows {
                let obj: serde_json::Map<String, serde_json::Value> = header
                    .iter()
                    .cloned()
                    .zip(row.into_iter().map(serde_json::Value::String))
                    .collect();
                sink.line(&serde_json::Value::Object(obj).to_string());
            }
        }
    }
    ExitCode::SUCCESS
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    model: ModelId,
    k: u32,
    m_tx: Option<u32>,
    seed: u64,
    trials: u64,
    field: FieldMode,
    strict: bool,
    trace: bool,
    output: &OutputArgs,
) -> ExitCode {
    let seed = match std::env::var("RETROALIGN_SEED") {
        Ok(v) => match v.parse::<u64>() {
            Ok(s) => s,
            Err(e) => return usage_error(&format!("RETROALIGN_SEED: {e}")),
        },
        Err(_) => seed,
    };
    if trace && trials != 1 {
        return usage_error("--trace needs --trials 1");
    }
    let m_tx = match (model, m_tx) {
        (m, Some(v)) if m.channel == ChannelKind::X && m != ModelId::X_FD && v != k => {
            // Feedback links pair each transmitter with one receiver.
            return usage_error(&format!("{model} requires M = K, got M={v}, K={k}"));
        }
        (m, v) if m.channel == ChannelKind::X && m != ModelId::X_FD => Some(v.unwrap_or(k)),
        (_, v) => v,
    };
    let policy = match Policy::build(model, k, m_tx) {
        Ok(p) => p,
        Err(SchemeError::Unsupported(msg)) => {
            let hint = analytic(model, k, m_tx)
                .map(|d| format!("; analytic DoF is {}", render(&d)))
                .unwrap_or_default();
            return usage_error(&format!("{msg}{hint}"));
        }
        Err(e) => return usage_error(&e.to_string()),
    };
    let mut sink = match Sink::new(&output.out) {
        Ok(s) => s,
        Err(e) => return usage_error(&format!("cannot open output: {e}")),
    };
    if output.format == Format::Csv {
        sink.line(
            "scheme,field,seed,symbols_injected,slots_used,empirical_dof,all_decodable,violations",
        );
    }
    // Trials are independent; run them concurrently and assemble the
    // output in seed order.
    let runs: Vec<_> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let trial_seed = seed + trial;
            let run = match field {
                FieldMode::Prime => policy.execute::<Fp61>(trial_seed, strict, trace),
                FieldMode::Complex => policy.execute::<Cf64>(trial_seed, strict, trace),
            };
            (trial_seed, run)
        })
        .collect();
    let mut all_ok = true;
    for (trial_seed, run) in runs {
        match run {
            Ok((report, slots)) => {
                if !report.ok() {
                    all_ok = false;
                }
                match output.format {
                    Format::Json => {
                        if let Some(lines) = slots {
                            for line in lines {
                                sink.line(&line.to_string());
                            }
                        }
                        sink.line(&json!({ "report": report }).to_string());
                    }
                    Format::Csv => {
                        sink.line(&format!(
                            "{},{},{},{},{},{},{},{}",
                            report.scheme,
                            report.field,
                            report.seed,
                            report.symbols_injected,
                            report.slots_used,
                            report
                                .empirical_dof
                                .as_ref()
                                .map(render)
                                .unwrap_or_else(|| "undefined".into()),
                            report.all_decodable,
                            report.feasibility_violations.len()
                        ));
                    }
                }
            }
            Err(e) => {
                eprintln!("trial seed {trial_seed}: {e}");
                all_ok = false;
            }
        }
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn cmd_verify(scope: Scope, format: Format) -> ExitCode {
    let results = run_scope(scope);
    let mut all_ok = true;
    for r in &results {
        if !r.passed {
            all_ok = false;
        }
        match format {
            Format::Csv => println!("{}", r.line()),
            Format::Json => println!("{}", serde_json::to_string(r).expect("serialize")),
        }
    }
    if format == Format::Csv {
        println!(
            "verify: {}/{} criteria passed",
            results.iter().filter(|r| r.passed).count(),
            results.len()
        );
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn cmd_limits(m_tx: &[u32], output: &OutputArgs) -> ExitCode {
    let mut sink = match Sink::new(&output.out) {
        Ok(s) => s,
        Err(e) => return usage_error(&format!("cannot open output: {e}")),
    };
    let mut rows: Vec<(String, String, Option<u32>, Limit)> = Vec::new();
    for model in ModelId::ALL {
        if model == ModelId::X_FD {
            for &m in m_tx {
                rows.push((
                    model.to_string(),
                    format!("M={m}"),
                    Some(m),
                    dof::asymptote(model, Some(m)),
                ));
            }
            rows.push((
                model.to_string(),
                "M>K/2".into(),
                None,
                dof::asymptote(model, None),
            ));
        } else {
            rows.push((
                model.to_string(),
                String::new(),
                None,
                dof::asymptote(model, None),
            ));
        }
    }
    match output.format {
        Format::Csv => {
            sink.line("model,regime,limit,limit_dec");
            for (model, regime, _, limit) in rows {
                let exact = match &limit {
                    Limit::Exact(r) => render(r),
                    Limit::Irrational(_) => String::new(),
                };
                sink.line(&format!(
                    "{model},{regime},{exact},{}",
                    sig12(limit.as_f64())
                ));
            }
        }
        Format::Json => {
            for (model, regime, m, limit) in rows {
                let exact = match &limit {
                    Limit::Exact(r) => Some(render(r)),
                    Limit::Irrational(_) => None,
                };
                sink.line(
                    &json!({
                        "model": model,
                        "regime": regime,
                        "m_tx": m,
                        "limit": exact,
                        "limit_dec": limit.as_f64(),
                    })
                    .to_string(),
                );
            }
        }
    }
    ExitCode::SUCCESS
}
