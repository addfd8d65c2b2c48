//! Command-line front end.
//!
//! Every command produces a list of records (JSON objects with a `record` field naming their
//! kind). `--format json` prints one record per line; `--format human` renders the same records
//! as aligned tables. Settings come from built-in defaults, then an optional `key=value` file
//! given by `--config`, then flags.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::{BigInt, BigUint};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::formulas::{parse_corpus, parse_term, transfer_check, translate_term, AtomSemantics, Sampling, Term};
use crate::hfset::{AckCode, HfSet};
use crate::hyperarith::{search_counterexample, HyperElem, HyperParams, Law, Preset, SearchOutcome};
use crate::numbers::{FeasibilityContext, Rat};
use crate::tarski::{self, BoundedUniverse, DefConfig, EpsFormula, FiniteStructure, Strategy};
use crate::toyfp::{self, FpFormat, FpLaw, FpSearch};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config: {0}")]
    Config(String),
    #[error("{0}")]
    Input(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

fn input<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Input(e.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "hyperlab", version, about = "Hyperfinite arithmetic, hereditarily finite sets and finite Tarski semantics")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum OutputFormat {
    #[default]
    Human,
    Json,
}

#[derive(Debug, Default, Args)]
pub struct GlobalArgs {
    /// `key=value` settings file; flags take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub preset: Option<Preset>,
    /// Overrides the preset's ω.
    #[arg(long, global = true)]
    pub omega: Option<String>,
    /// Overrides the preset's ε, as `p/q`.
    #[arg(long, global = true)]
    pub eps: Option<String>,
    /// Overrides the preset's smallness threshold S.
    #[arg(long, global = true)]
    pub smallness: Option<u64>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub samples: Option<u64>,
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Worker threads; output does not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Reject unbounded literals in `eval`.
    #[arg(long, global = true)]
    pub strict_bounded: bool,
    /// Floating-point format as `p,emin,emax`.
    #[arg(long, global = true)]
    pub fp: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Encode,
    Decode,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ackermann coding of set literals.
    Ack {
        #[arg(value_enum)]
        direction: Direction,
        #[arg(allow_hyphen_values = true)]
        value: String,
    },
    /// Evaluates a `+`/`*` expression over rationals in R(ω,ε).
    Eval {
        #[arg(allow_hyphen_values = true)]
        expr: String,
    },
    /// Runs the transfer harness on a corpus file; exits 1 if any row disagrees.
    Transfer {
        corpus: PathBuf,
        /// Sample variables from grid points with |kε| <= range.
        #[arg(long, default_value = "1")]
        range: String,
        #[arg(long, value_enum, default_value_t = AtomSemantics::Exact)]
        atoms: AtomSemantics,
        /// Also emit every row that is not an agreement.
        #[arg(long)]
        rows: bool,
    },
    /// Searches for a violation of an exact law in R(ω,ε).
    Search {
        #[arg(value_enum)]
        law: Law,
    },
    /// Truth in a finite structure, or definable closure in a bounded universe.
    Tarski {
        /// Structure file, one set literal per line.
        #[arg(long)]
        structure: Option<PathBuf>,
        #[arg(long)]
        formula: Option<String>,
        #[arg(long, value_enum, default_value_t = Strategy::TopDown)]
        strategy: Strategy,
        /// Compute the definable closure of the structure (empty if omitted).
        #[arg(long)]
        closure: bool,
        /// Universe bound B for `--closure`.
        #[arg(long, default_value_t = 4096)]
        universe: u64,
        #[arg(long, default_value_t = 24)]
        maxlen: usize,
    },
    /// Prints the greedy indiscernibility net of R_b.
    Net,
    /// Floating-point law violations and their R(ω,ε) counterparts.
    Fp {
        #[arg(value_enum, default_value_t = FpLaw::AddAssoc)]
        law: FpLaw,
        /// Use the constructed absorption triple instead of searching.
        #[arg(long)]
        absorption: bool,
    },
}

/// Settings after merging defaults, the config file and flags.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub params: HyperParams,
    pub seed: u64,
    pub samples: u64,
    pub budget: u64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub workers: Option<usize>,
    pub strict_bounded: bool,
    pub fp: FpFormat,
}

const CONFIG_KEYS: &[&str] = &[
    "preset", "omega", "eps", "smallness", "seed", "samples", "budget", "out", "format", "workers", "strict-bounded", "fp",
];

/// Parses `key=value` lines; `#` starts a comment. Keys match the long flag names.
pub fn parse_config_file(text: &str) -> Result<BTreeMap<String, String>, CliError> {
    let mut out = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| CliError::Config(format!("line {}: expected key=value", i + 1)))?;
        let k = k.trim().replace('_', "-");
        if !CONFIG_KEYS.contains(&k.as_str()) {
            return Err(CliError::Config(format!("line {}: unknown key '{k}'", i + 1)));
        }
        out.insert(k, v.trim().to_string());
    }
    Ok(out)
}

fn parse_value<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, CliError>
where
    T::Err: std::fmt::Display,
{
    v.parse().map_err(|e| CliError::Config(format!("{key} = '{v}': {e}")))
}

impl RunConfig {
    pub fn resolve(g: &GlobalArgs) -> Result<RunConfig, CliError> {
        let file = match &g.config {
            Some(path) => parse_config_file(&std::fs::read_to_string(path).map_err(|e| {
                CliError::Config(format!("{}: {e}", path.display()))
            })?)?,
            None => BTreeMap::new(),
        };
        let from_file = |k: &str| file.get(k).map(String::as_str);
        let pick = |flag: Option<String>, k: &str| flag.or_else(|| from_file(k).map(str::to_string));

        let preset = match (g.preset, from_file("preset")) {
            (Some(p), _) => p,
            (None, Some(v)) => Preset::from_str(v, true).map_err(|e| CliError::Config(format!("preset: {e}")))?,
            (None, None) => Preset::Tiny,
        };
        let base = preset.params();
        let omega: BigInt = match pick(g.omega.clone(), "omega") {
            Some(v) => parse_value("omega", &v)?,
            None => BigInt::from(base.omega()),
        };
        let eps: Rat = match pick(g.eps.clone(), "eps") {
            Some(v) => parse_value("eps", &v)?,
            None => base.eps().clone(),
        };
        let s: u64 = match pick(g.smallness.map(|s| s.to_string()), "smallness") {
            Some(v) => parse_value("smallness", &v)?,
            None => base.ctx().threshold(),
        };
        let ctx = FeasibilityContext::new(s).map_err(|e| CliError::Config(e.to_string()))?;
        let params = HyperParams::new(omega, eps, ctx).map_err(|e| CliError::Config(e.to_string()))?;

        let num = |flag: Option<u64>, k: &str, default: u64| -> Result<u64, CliError> {
            match pick(flag.map(|x| x.to_string()), k) {
                Some(v) => parse_value(k, &v),
                None => Ok(default),
            }
        };
        let format = match (g.format, from_file("format")) {
            (Some(f), _) => f,
            (None, Some(v)) => OutputFormat::from_str(v, true).map_err(|e| CliError::Config(format!("format: {e}")))?,
            (None, None) => OutputFormat::Human,
        };
        let workers = match pick(g.workers.map(|w| w.to_string()), "workers") {
            Some(v) => Some(parse_value::<usize>("workers", &v)?).filter(|w| *w > 0),
            None => None,
        };
        let strict_bounded = g.strict_bounded
            || from_file("strict-bounded").map(|v| parse_value::<bool>("strict-bounded", v)).transpose()?.unwrap_or(false);
        let fp = match pick(g.fp.clone(), "fp") {
            Some(v) => parse_value("fp", &v)?,
            None => FpFormat::small(),
        };
        Ok(RunConfig {
            params,
            seed: num(g.seed, "seed", 0)?,
            samples: num(g.samples, "samples", 10_000)?,
            budget: num(g.budget, "budget", 1_000_000)?,
            out: pick(g.out.as_ref().map(|p| p.display().to_string()), "out").map(PathBuf::from),
            format,
            workers,
            strict_bounded,
            fp,
        })
    }
}

/// Records plus the process exit code they imply.
pub struct Report {
    pub records: Vec<Value>,
    pub exit: i32,
}

fn record<T: Serialize>(kind: &str, body: &T) -> Value {
    match serde_json::to_value(body).expect("serializable") {
        Value::Object(fields) => {
            let mut map = serde_json::Map::new();
            map.insert("record".into(), Value::String(kind.into()));
            map.extend(fields);
            Value::Object(map)
        }
        v => json!({ "record": kind, "value": v }),
    }
}

fn params_record(p: &HyperParams) -> Value {
    json!({
        "record": "params",
        "omega": p.omega().to_string(),
        "eps": p.eps().to_string(),
        "smallness": p.ctx().threshold(),
        "bounded_max": p.bounded_max().to_string(),
        "rho_span": p.rho_span().to_string(),
    })
}

fn cmd_ack(direction: Direction, value: &str) -> Result<Report, CliError> {
    let output = match direction {
        Direction::Encode => value.parse::<HfSet>().map_err(input)?.ack_encode().to_string(),
        Direction::Decode => {
            let n: BigUint =
                value.trim().parse().map_err(|_| CliError::Input(format!("'{value}' is not a natural number")))?;
            HfSet::ack_decode(&AckCode(n)).to_string()
        }
    };
    let dir = if direction == Direction::Encode { "encode" } else { "decode" };
    Ok(Report { records: vec![json!({"record": "ack", "direction": dir, "input": value, "output": output})], exit: 0 })
}

fn eval_translated(t: &Term, p: &HyperParams, strict: bool) -> Result<HyperElem, CliError> {
    Ok(match t {
        Term::Embed(c) if strict => p.embed(c).map_err(|e| CliError::Input(format!("literal {c}: {e}")))?,
        Term::Embed(c) => p.embed_unchecked(c).map_err(|e| CliError::Input(format!("literal {c}: {e}")))?,
        Term::HAdd(a, b) => p.hadd(eval_translated(a, p, strict)?, eval_translated(b, p, strict)?),
        Term::HMul(a, b) => p.hmul(eval_translated(a, p, strict)?, eval_translated(b, p, strict)?),
        Term::Var(v) => return Err(CliError::Input(format!("variable '{v}' in a closed expression"))),
        other => return Err(CliError::Input(format!("unexpected term {other}"))),
    })
}

fn cmd_eval(expr: &str, cfg: &RunConfig) -> Result<Report, CliError> {
    let p = &cfg.params;
    let t = translate_term(&parse_term(expr).map_err(input)?).map_err(input)?;
    let k = eval_translated(&t, p, cfg.strict_bounded)?;
    let st = p.project(k).map(|q| q.to_string()).unwrap_or_else(|_| "unbounded".into());
    Ok(Report {
        records: vec![json!({
            "record": "eval",
            "expr": expr,
            "translated": t.to_string(),
            "k": k.k().to_string(),
            "value": p.value(k).to_string(),
            "st": st,
        })],
        exit: 0,
    })
}

fn cmd_transfer(path: &Path, range: &str, atoms: AtomSemantics, rows: bool, cfg: &RunConfig) -> Result<Report, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    let corpus = parse_corpus(&text).map_err(input)?;
    let bound: Rat = range.parse().map_err(|e| CliError::Input(format!("range: {e}")))?;
    let mut records = vec![params_record(&cfg.params)];
    let mut totals = [0u64; 4];
    for (i, entry) in corpus.iter().enumerate() {
        let sampling = Sampling::Random { samples: cfg.samples, bound: bound.clone(), seed: cfg.seed.wrapping_add(i as u64) };
        let rep = transfer_check(&entry.formula, &cfg.params, &sampling, atoms).map_err(input)?;
        let s = rep.summary;
        for (t, x) in totals.iter_mut().zip([s.rows, s.agree, s.disagree, s.boundary]) {
            *t += x;
        }
        records.push(json!({
            "record": "transfer",
            "name": entry.name,
            "formula": rep.formula,
            "translated": rep.translated,
            "uses_constants": rep.uses_constants,
            "rows": s.rows,
            "agree": s.agree,
            "disagree": s.disagree,
            "boundary": s.boundary,
            "boundary_fraction": s.boundary_fraction(),
        }));
        if rows {
            for r in rep.rows.iter().filter(|r| r.verdict != crate::formulas::Verdict::Agree) {
                records.push(record("row", &json!({"name": entry.name, "row": r})));
            }
        }
    }
    records.push(json!({
        "record": "transfer-summary",
        "formulas": corpus.len(),
        "atoms": atoms,
        "rows": totals[0],
        "agree": totals[1],
        "disagree": totals[2],
        "boundary": totals[3],
    }));
    Ok(Report { records, exit: i32::from(totals[2] > 0) })
}

fn cmd_search(law: Law, cfg: &RunConfig) -> Report {
    let outcome = search_counterexample(law, &cfg.params, cfg.budget, cfg.seed);
    let message = match &outcome {
        SearchOutcome::Found(w) => {
            let [a, b, c] = w.triple.map(|x| x.k());
            format!("witness ({a},{b},{c}): {} vs {}", w.lhs, w.rhs)
        }
        SearchOutcome::Holds { probes } => format!("no witness (exhaustive, {probes} triples)"),
        SearchOutcome::BudgetExhausted { probes } => format!("no witness (budget exhausted after {probes} probes)"),
    };
    let mut v = json!({"record": "search", "law": law});
    if let (Some(m), Value::Object(fields)) = (v.as_object_mut(), serde_json::to_value(&outcome).expect("serializable")) {
        m.extend(fields);
    }
    v["message"] = Value::String(message);
    Report { records: vec![params_record(&cfg.params), v], exit: 0 }
}

fn cmd_tarski(
    structure: Option<&Path>,
    formula: Option<&str>,
    strategy: Strategy,
    closure: bool,
    universe: u64,
    maxlen: usize,
) -> Result<Report, CliError> {
    let x = match structure {
        Some(path) => FiniteStructure::load(path).map_err(input)?,
        None => FiniteStructure::default(),
    };
    let mut records = Vec::new();
    if let Some(text) = formula {
        let f = tarski::parse_eform(text).map_err(input)?;
        let code = EpsFormula::encode(&f);
        let value = tarski::satisfies(&x, &f, strategy).map_err(input)?;
        records.push(json!({
            "record": "truth",
            "formula": f.to_string(),
            "code": code.to_string(),
            "structure_size": x.len(),
            "strategy": strategy,
            "value": value,
        }));
    }
    if closure {
        let u = BoundedUniverse::new(universe).map_err(input)?;
        let cl = tarski::def_closure_with(&x, &u, &DefConfig::with_maxlen(maxlen)).map_err(input)?;
        for d in &cl.definitions {
            records.push(json!({
                "record": "definition",
                "code": d.code,
                "set": d.set.to_string(),
                "formula": d.formula.to_string(),
                "length": d.formula.code_len(),
            }));
        }
        records.push(json!({
            "record": "closure",
            "universe": universe,
            "maxlen": maxlen,
            "start": x.len(),
            "size": cl.structure.len(),
            "rounds": cl.rounds,
            "whole_universe": cl.structure.len() == u.size(),
        }));
    }
    if records.is_empty() {
        return Err(CliError::Input("tarski needs --formula or --closure".into()));
    }
    Ok(Report { records, exit: 0 })
}

fn cmd_net(cfg: &RunConfig) -> Report {
    let p = &cfg.params;
    let reps = p.select_representatives();
    let ks: Vec<String> = reps.iter().map(|r| r.k().to_string()).collect();
    Report {
        records: vec![
            params_record(p),
            json!({"record": "net", "size": reps.len(), "representatives": ks}),
        ],
        exit: 0,
    }
}

fn cmd_fp(law: FpLaw, absorption: bool, cfg: &RunConfig) -> Result<Report, CliError> {
    let fmt = cfg.fp;
    let mut records = Vec::new();
    let witness = if absorption {
        let t = toyfp::absorption_triple(&fmt).map_err(input)?;
        toyfp::evaluate_law(law, t, &fmt).map_err(input)?
    } else {
        match toyfp::find_fp_witness(law, &fmt, cfg.budget, cfg.seed) {
            FpSearch::Found(w) => w,
            FpSearch::BudgetExhausted { probes } => {
                let msg = format!("no witness (budget exhausted after {probes} probes)");
                records.push(json!({"record": "fp-search", "law": law, "format": fmt.to_string(), "message": msg}));
                return Ok(Report { records, exit: 0 });
            }
        }
    };
    for s in &witness.steps {
        records.push(json!({
            "record": "fp-step",
            "expr": s.expr,
            "exact": s.exact.to_string(),
            "rounded": s.rounded_value.to_string(),
        }));
    }
    records.push(json!({
        "record": "fp-witness",
        "law": law,
        "format": fmt.to_string(),
        "triple": witness.values.iter().map(Rat::to_string).collect::<Vec<_>>(),
        "lhs": witness.lhs.to_string(),
        "rhs": witness.rhs.to_string(),
        "violates": witness.violates(),
    }));
    if law == FpLaw::AddAssoc {
        match toyfp::contrast_hadd(&witness.triple, &cfg.params) {
            Ok(c) => records.push(record("hadd-contrast", &c)),
            Err(e) => records.push(json!({"record": "hadd-contrast", "error": e.to_string()})),
        }
    }
    Ok(Report { records, exit: 0 })
}

fn execute(cli: &Cli, cfg: &RunConfig) -> Result<Report, CliError> {
    match &cli.command {
        Command::Ack { direction, value } => cmd_ack(*direction, value),
        Command::Eval { expr } => cmd_eval(expr, cfg),
        Command::Transfer { corpus, range, atoms, rows } => cmd_transfer(corpus, range, *atoms, *rows, cfg),
        Command::Search { law } => Ok(cmd_search(*law, cfg)),
        Command::Tarski { structure, formula, strategy, closure, universe, maxlen } => {
            cmd_tarski(structure.as_deref(), formula.as_deref(), *strategy, *closure, *universe, *maxlen)
        }
        Command::Net => Ok(cmd_net(cfg)),
        Command::Fp { law, absorption } => cmd_fp(*law, *absorption, cfg),
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(xs) if xs.iter().all(|x| !x.is_object() && !x.is_array()) => {
            xs.iter().map(cell).collect::<Vec<_>>().join(" ")
        }
        other => other.to_string(),
    }
}

/// Human rendering: a single record becomes `key: value` lines, runs of records of the same
/// kind become a table.
pub fn render_human(records: &[Value]) -> String {
    let mut out = String::new();
    let kind = |v: &Value| v.get("record").and_then(Value::as_str).unwrap_or("").to_string();
    let mut i = 0;
    while i < records.len() {
        let k = kind(&records[i]);
        let mut j = i;
        while j < records.len() && kind(&records[j]) == k {
            j += 1;
        }
        let group = &records[i..j];
        let keys: Vec<String> = group[0]
            .as_object()
            .map(|m| m.keys().filter(|k| *k != "record").cloned().collect())
            .unwrap_or_default();
        let _ = writeln!(out, "[{k}]");
        if group.len() == 1 {
            let w = keys.iter().map(String::len).max().unwrap_or(0);
            for key in &keys {
                let _ = writeln!(out, "  {key:<w$}  {}", cell(&group[0][key]));
            }
        } else {
            let rows: Vec<Vec<String>> = group.iter().map(|r| keys.iter().map(|key| cell(&r[key])).collect()).collect();
            let widths: Vec<usize> = keys
                .iter()
                .enumerate()
                .map(|(c, key)| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0).max(key.len()))
                .collect();
            let line = |cells: Vec<&str>| {
                let parts: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
                format!("  {}", parts.join("  ").trim_end())
            };
            let _ = writeln!(out, "{}", line(keys.iter().map(String::as_str).collect()));
            for r in &rows {
                let _ = writeln!(out, "{}", line(r.iter().map(String::as_str).collect()));
            }
        }
        i = j;
    }
    out
}

pub fn render(records: &[Value], format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => records.iter().map(|r| format!("{r}\n")).collect(),
        OutputFormat::Human => render_human(records),
    }
}

/// Parses `args`, runs the command and writes its output. Returns the exit code: 0 on success,
/// 1 when a transfer run records a disagreement, 2 on any error.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match run_cli(&cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

fn run_cli(cli: &Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let cfg = RunConfig::resolve(&cli.global)?;
    let report = match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Config(e.to_string()))?
            .install(|| execute(cli, &cfg))?,
        None => execute(cli, &cfg)?,
    };
    let text = render(&report.records, cfg.format);
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(report.exit)
}

/// Entry point for the binary.
pub fn main() -> std::process::ExitCode {
    let code = run(std::env::args_os(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock());
    std::process::ExitCode::from(code as u8)
}
