//! The `qqbf` command line.
//!
//! Exit codes: 0 success, 2 usage or parse error, 3 indefinite outcome
//! (critical point), 4 `table-s1 --check` mismatch.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qqbf_core::chain::{self, concat3_output, evaluate_ideal, IdealEvaluation};
use qqbf_core::compiler::{compile_rational, RationalFunction};
use qqbf_core::estimation::{
    measurement_probs, reconstruct, reconstruct_from_probabilities, sample_counts_trial,
    sample_haar, CountRecord, PauliBasis, SamplerConfig,
};
use qqbf_core::fock::{oracle_block, oracle_chain3, simulate_circuit};
use qqbf_core::reference_table::{agrees_with_printed, PRINTED_TOLERANCE, ROWS};
use qqbf_core::{
    fidelity, BlockCircuit, BlockKind, BlockOutcome, ChainCombo, Coin, DensityMatrix2, Indefinite,
    Visibility,
};
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use crate::formats::{self, FormatError};

#[derive(Debug, Parser)]
#[command(
    name = "qqbf",
    version,
    about = "Quantum-to-quantum Bernoulli factory simulator"
)]
pub struct Cli {
    #[command(flatten)]
    pub config: RunConfig,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    /// Closed-form block and chain formulas.
    ClosedForm,
    /// Second-quantized simulation of the optics.
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct RunConfig {
    #[arg(long, global = true, value_enum, default_value_t = Engine::ClosedForm)]
    pub engine: Engine,
    /// Two-photon interference visibility in [0, 1].
    #[arg(long, global = true, default_value = "1", value_parser = parse_visibility)]
    pub visibility: Visibility,
    /// Tomography shots per basis; 0 uses exact probabilities.
    #[arg(long, global = true, default_value_t = 0)]
    pub shots: u64,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Defaults to csv for `table-s1` and `experiment`, json otherwise.
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
}

fn parse_visibility(s: &str) -> Result<Visibility, String> {
    let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
    Visibility::new(v).map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OpName {
    Invert,
    Product,
    Antiproduct,
    Sum,
    Harmonic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ComboName {
    #[value(name = "SP", alias = "sp")]
    Sp,
    #[value(name = "MP", alias = "mp")]
    Mp,
    #[value(name = "SA", alias = "sa")]
    Sa,
    #[value(name = "MA", alias = "ma")]
    Ma,
}

impl From<ComboName> for ChainCombo {
    fn from(c: ComboName) -> Self {
        match c {
            ComboName::Sp => ChainCombo::SP,
            ComboName::Mp => ChainCombo::MP,
            ComboName::Sa => ChainCombo::SA,
            ComboName::Ma => ChainCombo::MA,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a single block.
    Block {
        #[arg(long, value_enum)]
        op: OpName,
        /// plus/minus for products, S/I for sums.
        #[arg(long)]
        branch: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        z1: String,
        #[arg(long, allow_hyphen_values = true)]
        z2: Option<String>,
    },
    /// Evaluate a mean→product concatenation; all four combinations unless
    /// `--combo` is given.
    Chain {
        #[arg(long, value_enum)]
        combo: Option<ComboName>,
        #[arg(long, allow_hyphen_values = true)]
        z1: String,
        #[arg(long, allow_hyphen_values = true)]
        z2: String,
        #[arg(long, allow_hyphen_values = true)]
        z3: String,
    },
    /// Success probabilities of the 30-triplet reference campaign.
    #[command(name = "table-s1")]
    TableS1 {
        /// Compare against the printed three-decimal values.
        #[arg(long)]
        check: bool,
    },
    /// Compile a rational function into a block circuit.
    Compile {
        /// Ascending numerator coefficients, comma separated.
        #[arg(long, allow_hyphen_values = true, conflicts_with = "function")]
        num: Option<String>,
        /// Ascending denominator coefficients (default 1).
        #[arg(long, allow_hyphen_values = true, requires = "num")]
        den: Option<String>,
        /// Rational-function JSON, inline or as a file path.
        #[arg(long)]
        function: Option<String>,
        /// Evaluate the compiled circuit at this point (repeatable).
        #[arg(long, allow_hyphen_values = true)]
        probe: Vec<String>,
    },
    /// Run a circuit over a list of inputs.
    Experiment { circuit: PathBuf, inputs: PathBuf },
    /// Draw coins uniformly from the Bloch sphere.
    Sample { n: usize },
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Indefinite(String),
    #[error("{0}")]
    Mismatch(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Indefinite(_) => 3,
            CliError::Mismatch(_) => 4,
        }
    }
}

impl From<FormatError> for CliError {
    fn from(e: FormatError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<Indefinite> for CliError {
    fn from(e: Indefinite) -> Self {
        CliError::Indefinite(e.to_string())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

/// Runs one parsed command, writing results to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let cfg = &cli.config;
    match &cli.command {
        Command::Block { op, branch, z1, z2 } => {
            cmd_block(*op, branch.as_deref(), z1, z2.as_deref(), cfg, out)
        }
        Command::Chain { combo, z1, z2, z3 } => cmd_chain(*combo, [z1, z2, z3], cfg, out),
        Command::TableS1 { check } => cmd_table_s1(*check, cfg, out),
        Command::Compile {
            num,
            den,
            function,
            probe,
        } => cmd_compile(
            num.as_deref(),
            den.as_deref(),
            function.as_deref(),
            probe,
            cfg,
            out,
        ),
        Command::Experiment { circuit, inputs } => cmd_experiment(circuit, inputs, cfg, out),
        Command::Sample { n } => cmd_sample(*n, cfg, out),
    }
}

struct Table {
    headers: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

fn write_csv(table: &Table, out: &mut dyn Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(&table.headers)?;
    for row in &table.rows {
        w.write_record(row)?;
    }
    w.flush()?;
    Ok(())
}

fn write_json(value: &Value, out: &mut dyn Write) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(std::io::Error::from)?;
    writeln!(out)?;
    Ok(())
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |x| x.to_string())
}

/// Tomographic estimate of `state` and its fidelities with `state` and
/// with the ideal coin. Trial `t` draws from its own random stream.
struct Tomography {
    counts: Option<CountRecord>,
    fidelity_expected: f64,
    fidelity_ideal: f64,
}

fn tomography(o: &BlockOutcome, cfg: &RunConfig, trial: u64) -> Tomography {
    let (counts, estimate) = if cfg.shots == 0 {
        let probs = PauliBasis::ALL.map(|b| measurement_probs(&o.state, b));
        (None, reconstruct_from_probabilities(&probs))
    } else {
        let rec = sample_counts_trial(&o.state, cfg.shots, cfg.seed, trial);
        let rho = reconstruct(&rec).expect("sampled records have every basis");
        (Some(rec), rho)
    };
    Tomography {
        counts,
        fidelity_expected: fidelity(&estimate, &o.state),
        fidelity_ideal: fidelity(&estimate, &o.ideal.density()),
    }
}

fn state_columns(state: &DensityMatrix2) -> [String; 4] {
    let m = state.matrix();
    [
        m.get(0, 0).re.to_string(),
        m.get(0, 1).re.to_string(),
        m.get(0, 1).im.to_string(),
        m.get(1, 1).re.to_string(),
    ]
}

const STATE_HEADERS: [&str; 4] = ["rho_00", "rho_01_re", "rho_01_im", "rho_11"];

fn outcome_json(o: &BlockOutcome, cfg: &RunConfig, trial: u64) -> Value {
    let mut v = json!({
        "success_prob": o.success_prob,
        "ideal": formats::extended_json(o.ideal.value()),
        "matrix": formats::matrix_json(o.state.matrix()),
    });
    if cfg.shots > 0 {
        let t = tomography(o, cfg, trial);
        v["counts"] = formats::counts_json(&t.counts.expect("shots > 0"));
        v["fidelity"] = json!(t.fidelity_expected);
        v["fidelity_ideal"] = json!(t.fidelity_ideal);
    }
    v
}

fn cmd_block(
    op: OpName,
    branch: Option<&str>,
    z1: &str,
    z2: Option<&str>,
    cfg: &RunConfig,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let name = match op {
        OpName::Invert => "invert",
        OpName::Product => "product",
        OpName::Antiproduct => "antiproduct",
        OpName::Sum => "sum",
        OpName::Harmonic => "harmonic",
    };
    let kind = formats::parse_block_kind(name, branch)?;
    let c1 = formats::parse_coin(z1)?;
    let c2 = match (kind, z2) {
        (BlockKind::Invert, None) => Coin::ONE,
        (BlockKind::Invert, Some(_)) => return Err(usage("invert takes only --z1")),
        (_, Some(z)) => formats::parse_coin(z)?,
        (_, None) => return Err(usage(format!("{name} needs --z2"))),
    };
    let v = cfg.visibility;
    let outcome = match cfg.engine {
        Engine::Oracle => oracle_block(kind, &c1, &c2, v)?,
        Engine::ClosedForm => match kind {
            BlockKind::Invert => {
                let ideal = qqbf_core::blocks::invert(&c1);
                BlockOutcome {
                    state: ideal.density(),
                    success_prob: 1.0,
                    ideal,
                }
            }
            BlockKind::Product(b) => qqbf_core::blocks::product_output(&c1, &c2, b, v)?,
            BlockKind::Sum(b) => qqbf_core::blocks::sum_output(&c1, &c2, b, v)?,
        },
    };
    let mut inputs = vec![c1.value()];
    if kind != BlockKind::Invert {
        inputs.push(c2.value());
    }
    match cfg.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => {
            let mut v = json!({
                "op": kind.name(),
                "inputs": inputs.iter().map(|z| formats::extended_json(*z)).collect::<Vec<_>>(),
                "visibility": cfg.visibility.get(),
            });
            merge(&mut v, outcome_json(&outcome, cfg, 0));
            write_json(&v, out)
        }
        OutputFormat::Csv => {
            let mut headers = vec!["op", "z1", "z2", "success_prob", "ideal"];
            headers.extend(STATE_HEADERS);
            headers.push("fidelity");
            let fid = (cfg.shots > 0).then(|| tomography(&outcome, cfg, 0).fidelity_expected);
            let mut row = vec![
                kind.name().to_string(),
                inputs[0].to_string(),
                inputs.get(1).map_or_else(String::new, ToString::to_string),
                outcome.success_prob.to_string(),
                outcome.ideal.value().to_string(),
            ];
            row.extend(state_columns(&outcome.state));
            row.push(opt(fid));
            write_csv(
                &Table {
                    headers,
                    rows: vec![row],
                },
                out,
            )
        }
    }
}

fn merge(into: &mut Value, from: Value) {
    if let (Value::Object(a), Value::Object(b)) = (into, from) {
        a.extend(b);
    }
}

fn cmd_chain(
    combo: Option<ComboName>,
    zs: [&String; 3],
    cfg: &RunConfig,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let [z1, z2, z3] = [
        formats::parse_coin(zs[0])?,
        formats::parse_coin(zs[1])?,
        formats::parse_coin(zs[2])?,
    ];
    let combos: Vec<ChainCombo> = match combo {
        Some(c) => vec![c.into()],
        None => ChainCombo::ALL.to_vec(),
    };
    let eval = |c: ChainCombo| match cfg.engine {
        Engine::ClosedForm => concat3_output(&z1, &z2, &z3, c, cfg.visibility),
        Engine::Oracle => oracle_chain3(&z1, &z2, &z3, c, cfg.visibility),
    };
    let results: Vec<(ChainCombo, Result<BlockOutcome, Indefinite>)> =
        combos.iter().map(|&c| (c, eval(c))).collect();
    if combo.is_some() {
        if let Err(e) = &results[0].1 {
            return Err(e.clone().into());
        }
    }
    let inputs = [z1.value(), z2.value(), z3.value()];
    match cfg.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => {
            let rows: Vec<Value> = results
                .iter()
                .map(|(c, r)| {
                    let mut v = json!({ "combo": c.name() });
                    match r {
                        Ok(o) => merge(&mut v, outcome_json(o, cfg, 0)),
                        Err(e) => merge(
                            &mut v,
                            json!({ "success_prob": 0.0, "indefinite": e.point }),
                        ),
                    }
                    v
                })
                .collect();
            let v = json!({
                "inputs": inputs.map(formats::extended_json),
                "visibility": cfg.visibility.get(),
                "results": rows,
            });
            write_json(&v, out)
        }
        OutputFormat::Csv => {
            let mut headers = vec!["z1", "z2", "z3", "combo", "success_prob", "ideal"];
            headers.extend(STATE_HEADERS);
            headers.push("fidelity");
            let rows = results
                .iter()
                .map(|(c, r)| {
                    let mut row: Vec<String> = inputs.iter().map(ToString::to_string).collect();
                    row.push(c.name().to_string());
                    match r {
                        Ok(o) => {
                            row.push(o.success_prob.to_string());
                            row.push(o.ideal.value().to_string());
                            row.extend(state_columns(&o.state));
                            row.push(opt(
                                (cfg.shots > 0).then(|| tomography(o, cfg, 0).fidelity_expected)
                            ));
                        }
                        Err(_) => {
                            row.push("0".into());
                            row.extend(std::iter::repeat_n(String::new(), 6));
                        }
                    }
                    row
                })
                .collect();
            write_csv(&Table { headers, rows }, out)
        }
    }
}

fn cmd_table_s1(check: bool, cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let computed: Vec<[f64; 4]> = ROWS.iter().map(|r| r.computed()).collect();
    match cfg.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            let rows = ROWS
                .iter()
                .zip(&computed)
                .map(|(r, p)| {
                    let mut row: Vec<String> = r.inputs.iter().map(ToString::to_string).collect();
                    row.extend(p.iter().map(ToString::to_string));
                    row
                })
                .collect();
            let headers = vec!["z1", "z2", "z3", "P_SP", "P_MP", "P_SA", "P_MA"];
            write_csv(&Table { headers, rows }, out)?;
        }
        OutputFormat::Json => {
            let rows: Vec<Value> = ROWS
                .iter()
                .zip(&computed)
                .map(|(r, p)| {
                    json!({
                        "inputs": r.inputs.map(formats::extended_json),
                        "P_SP": p[0], "P_MP": p[1], "P_SA": p[2], "P_MA": p[3],
                    })
                })
                .collect();
            write_json(&Value::Array(rows), out)?;
        }
    }
    if !check {
        return Ok(());
    }
    let mut mismatches = Vec::new();
    for (i, (r, p)) in ROWS.iter().zip(&computed).enumerate() {
        for (k, combo) in ChainCombo::ALL.iter().enumerate() {
            if !agrees_with_printed(p[k], r.printed[k]) {
                let [a, b, c] = r.inputs;
                mismatches.push(format!(
                    "row {} ({a}, {b}, {c}) {}: computed {:.5}, printed {:.3}",
                    i + 1,
                    combo.name(),
                    p[k],
                    r.printed[k]
                ));
            }
        }
    }
    if mismatches.is_empty() {
        Ok(())
    } else {
        Err(CliError::Mismatch(format!(
            "{} entries differ from the printed table by more than {PRINTED_TOLERANCE}:\n{}",
            mismatches.len(),
            mismatches.join("\n")
        )))
    }
}

fn read_arg(text: &str) -> Result<String, CliError> {
    if text.trim_start().starts_with('{') {
        Ok(text.to_string())
    } else {
        fs::read_to_string(text).map_err(|e| usage(format!("{text}: {e}")))
    }
}

fn broadcast(circuit: &BlockCircuit, coins: &[Coin]) -> Vec<Coin> {
    match coins {
        [one] if circuit.n_data_inputs() != 1 => vec![*one; circuit.n_data_inputs()],
        _ => coins.to_vec(),
    }
}

/// The compiled circuit at one point, next to `f` evaluated directly.
/// `value` holds the critical point when the circuit is indefinite there.
struct Probe {
    z: Coin,
    value: Result<Coin, String>,
    expected: Option<Coin>,
    prob: f64,
}

fn cmd_compile(
    num: Option<&str>,
    den: Option<&str>,
    function: Option<&str>,
    probes: &[String],
    cfg: &RunConfig,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let f = match (num, function) {
        (Some(num), _) => RationalFunction::Coefficients {
            num: formats::parse_coefficients(num)?,
            den: formats::parse_coefficients(den.unwrap_or("1"))?,
        },
        (None, Some(text)) => formats::parse_rational(&read_arg(text)?)?,
        (None, None) => return Err(usage("compile needs --num/--den or --function")),
    };
    let report = compile_rational(&f).map_err(usage)?;
    let probe_coins = probes
        .iter()
        .map(|p| formats::parse_coin(p))
        .collect::<Result<Vec<_>, _>>()?;
    let circuit = &report.circuit;
    let probe_rows: Vec<Probe> = probe_coins
        .iter()
        .map(|z| {
            let data = vec![*z; circuit.n_data_inputs()];
            let (value, prob) = match evaluate_ideal(circuit, &data).map_err(usage)? {
                IdealEvaluation::Defined { coin, success_prob } => (Ok(coin), success_prob),
                IdealEvaluation::Indefinite { point, .. } => (Err(point), 0.0),
            };
            Ok(Probe {
                z: *z,
                value,
                expected: f.evaluate(z),
                prob,
            })
        })
        .collect::<Result<_, CliError>>()?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    match cfg.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => {
            let probes: Vec<Value> = probe_rows
                .iter()
                .map(|Probe { z, value, expected, prob }| {
                    json!({
                        "z": formats::extended_json(z.value()),
                        "value": match value {
                            Ok(c) => formats::extended_json(c.value()),
                            Err(_) => Value::String("indefinite".into()),
                        },
                        "critical_point": value.as_ref().err(),
                        "expected": expected.map_or(Value::String("indefinite".into()), |c| formats::extended_json(c.value())),
                        "success_prob": prob,
                    })
                })
                .collect();
            let v = json!({
                "degree": report.degree,
                "op_count": report.op_count,
                "bound": report.bound,
                "within_bound": report.op_count <= report.bound,
                "photons_data": report.photons_data,
                "photons_register": report.photons_register,
                "warnings": report.warnings,
                "circuit": formats::circuit_json(circuit),
                "probes": probes,
            });
            write_json(&v, out)
        }
        OutputFormat::Csv => {
            let headers = vec![
                "z",
                "value",
                "expected",
                "success_prob",
                "op_count",
                "bound",
            ];
            let rows = probe_rows
                .iter()
                .map(
                    |Probe {
                         z,
                         value,
                         expected,
                         prob,
                     }| {
                        vec![
                            z.value().to_string(),
                            value
                                .as_ref()
                                .map_or("indefinite".into(), |c| c.value().to_string()),
                            expected.map_or("indefinite".into(), |c| c.value().to_string()),
                            prob.to_string(),
                            report.op_count.to_string(),
                            report.bound.to_string(),
                        ]
                    },
                )
                .collect();
            write_csv(&Table { headers, rows }, out)
        }
    }
}

enum RowStatus {
    Ok(BlockOutcome, Tomography),
    Indefinite,
    Error(String),
}

fn cmd_experiment(
    circuit_path: &PathBuf,
    inputs_path: &PathBuf,
    cfg: &RunConfig,
    out: &mut dyn Write,
) -> Result<(), CliError> {
    let read =
        |p: &PathBuf| fs::read_to_string(p).map_err(|e| usage(format!("{}: {e}", p.display())));
    let circuit = formats::parse_circuit(&read(circuit_path)?)?;
    let rows = formats::parse_inputs(&read(inputs_path)?)?;
    let label: Vec<&str> = circuit.nodes().iter().map(|n| n.kind.name()).collect();
    let label = label.join(">");

    let results: Vec<RowStatus> = rows
        .par_iter()
        .enumerate()
        .map(|(i, row)| {
            let coins = match row {
                Ok(c) => broadcast(&circuit, c),
                Err(e) => return RowStatus::Error(e.to_string()),
            };
            let outcome = match cfg.engine {
                Engine::ClosedForm => chain::evaluate(&circuit, &coins, cfg.visibility),
                Engine::Oracle => simulate_circuit(&circuit, &coins, cfg.visibility),
            };
            match outcome {
                Ok(qqbf_core::blocks::Outcome::Heralded(o)) => {
                    RowStatus::Ok(o, tomography(&o, cfg, i as u64))
                }
                Ok(qqbf_core::blocks::Outcome::Indefinite) => RowStatus::Indefinite,
                Err(e) => RowStatus::Error(e.to_string()),
            }
        })
        .collect();

    let inputs_text = |row: &Result<Vec<Coin>, FormatError>| match row {
        Ok(cs) => cs
            .iter()
            .map(|c| c.value().to_string())
            .collect::<Vec<_>>()
            .join(";"),
        Err(_) => String::new(),
    };
    match cfg.format.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Csv => {
            let mut headers = vec![
                "row",
                "inputs",
                "circuit",
                "status",
                "success_prob",
                "ideal",
            ];
            headers.extend(STATE_HEADERS);
            headers.extend(["fidelity_expected", "fidelity_ideal", "error"]);
            let table_rows = results
                .iter()
                .zip(&rows)
                .enumerate()
                .map(|(i, (res, row))| {
                    let mut r = vec![i.to_string(), inputs_text(row), label.clone()];
                    match res {
                        RowStatus::Ok(o, t) => {
                            r.extend([
                                "ok".to_string(),
                                o.success_prob.to_string(),
                                o.ideal.value().to_string(),
                            ]);
                            r.extend(state_columns(&o.state));
                            r.extend([
                                t.fidelity_expected.to_string(),
                                t.fidelity_ideal.to_string(),
                                String::new(),
                            ]);
                        }
                        RowStatus::Indefinite => {
                            r.extend(["indefinite".to_string(), "0".to_string()]);
                            r.extend(std::iter::repeat_n(String::new(), 8));
                        }
                        RowStatus::Error(e) => {
                            r.push("error".to_string());
                            r.extend(std::iter::repeat_n(String::new(), 8));
                            r.push(e.clone());
                        }
                    }
                    r
                })
                .collect();
            write_csv(
                &Table {
                    headers,
                    rows: table_rows,
                },
                out,
            )
        }
        OutputFormat::Json => {
            let items: Vec<Value> = results
                .iter()
                .zip(&rows)
                .enumerate()
                .map(|(i, (res, row))| {
                    let inputs: Vec<Value> = row
                        .as_ref()
                        .map(|cs| {
                            cs.iter()
                                .map(|c| formats::extended_json(c.value()))
                                .collect()
                        })
                        .unwrap_or_default();
                    let mut v = json!({ "row": i, "inputs": inputs, "circuit": label });
                    let extra = match res {
                        RowStatus::Ok(o, t) => {
                            let mut e = json!({
                                "status": "ok",
                                "success_prob": o.success_prob,
                                "ideal": formats::extended_json(o.ideal.value()),
                                "matrix": formats::matrix_json(o.state.matrix()),
                                "fidelity_expected": t.fidelity_expected,
                                "fidelity_ideal": t.fidelity_ideal,
                            });
                            if let Some(c) = &t.counts {
                                e["counts"] = formats::counts_json(c);
                            }
                            e
                        }
                        RowStatus::Indefinite => {
                            json!({ "status": "indefinite", "success_prob": 0.0 })
                        }
                        RowStatus::Error(e) => json!({ "status": "error", "error": e }),
                    };
                    merge(&mut v, extra);
                    v
                })
                .collect();
            write_json(&Value::Array(items), out)
        }
    }
}

fn cmd_sample(n: usize, cfg: &RunConfig, out: &mut dyn Write) -> Result<(), CliError> {
    let sampler = SamplerConfig::new(cfg.seed, n).map_err(usage)?;
    let coins = sample_haar(sampler);
    match cfg.format.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => {
            for c in &coins {
                writeln!(out, "{}", formats::coin_pair_json(c))?;
            }
            Ok(())
        }
        OutputFormat::Csv => {
            let headers = vec!["a_re", "a_im", "b_re", "b_im", "z"];
            let rows = coins
                .iter()
                .map(|c| {
                    vec![
                        c.a().re.to_string(),
                        c.a().im.to_string(),
                        c.b().re.to_string(),
                        c.b().im.to_string(),
                        c.value().to_string(),
                    ]
                })
                .collect();
            write_csv(&Table { headers, rows }, out)
        }
    }
}
