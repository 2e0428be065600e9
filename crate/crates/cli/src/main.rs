use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use quasirand::cayley::{cayley_graph, general_cayley};
use quasirand::fourier::{fourier, gowers_norm_power_with, gowers_norm_with};
use quasirand::harness::{self, run_paley_suite, run_suite, CheckResult};
use quasirand::hypergraph::{hom_density, hom_density_mc};
use quasirand::io::{resolve_function, resolve_set, CayleySpecFile, HypergraphDump, SystemDump, WitnessDump};
use quasirand::linear_systems::{pattern_probability, pattern_probability_mc, system_cut, PatternSystem};
use quasirand::norms::{discrepancy, oct_norm};
use quasirand::{
    BigRational, Engine, EngineBudget, Error, FiniteAbelianGroup, Hypergraph, Limits, Payload, Scalar, Suite, SuiteConfig,
    TemplateGraph,
};

#[derive(Parser)]
#[command(name = "quasirand", version, about = "Quasirandomness measures for additive sets and Cayley hypergraphs")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Master seed (default 0).
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Use exact rational arithmetic.
    #[arg(long, global = true)]
    exact: bool,
    /// Record per-check runtimes in suite reports.
    #[arg(long, global = true)]
    timing: bool,
    /// Decision-bit cap for exact cut engines.
    #[arg(long = "budget-bits", global = true)]
    budget_bits: Option<u32>,
    /// Restarts for the alternating engines.
    #[arg(long, global = true)]
    restarts: Option<u32>,
    /// Sweep cap for the alternating engines.
    #[arg(long, global = true)]
    sweeps: Option<u32>,
    /// Pointwise evaluation budget per kernel call.
    #[arg(long = "eval-budget", global = true)]
    eval_budget: Option<u64>,
    /// Monte Carlo sample count; exact enumeration when absent.
    #[arg(long, global = true)]
    samples: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineArg {
    Exact,
    Alt,
}

impl From<EngineArg> for Engine {
    fn from(e: EngineArg) -> Self {
        match e {
            EngineArg::Exact => Engine::Exact,
            EngineArg::Alt => Engine::Alternating,
        }
    }
}

#[derive(Args)]
struct SetArgs {
    /// Group, e.g. `Z7` or `Z2^3xZ5`.
    #[arg(long)]
    group: String,
    /// `qr`, `all`, `empty`, `random:<density>`, `@file.csv` or an index list `0,1,3`.
    #[arg(long, default_value = "qr")]
    set: String,
}

#[derive(Subcommand)]
enum Command {
    /// Gowers norm, Fourier summary and octahedral norm of the balanced set (or a function file).
    Norms {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, default_value_t = 2)]
        k: u32,
        /// Also compute the octahedral norm of the Cayley hypergraph.
        #[arg(long)]
        oct: bool,
    },
    /// Discrepancy of a Cayley hypergraph.
    Disc {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
        /// Coefficients of a general linear form, e.g. `2,3`.
        #[arg(long)]
        coeffs: Option<String>,
        #[arg(long, value_enum, default_value_t = EngineArg::Exact)]
        engine: EngineArg,
        /// Include the maximizing sets.
        #[arg(long)]
        witness: bool,
    },
    /// Build a Cayley hypergraph and dump it.
    Cayley {
        /// CayleySpec JSON file.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        group: Option<String>,
        #[arg(long, default_value = "qr")]
        set: String,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        coeffs: Option<String>,
        /// Dump the dense value array instead of the spec.
        #[arg(long)]
        dense: bool,
    },
    /// Homomorphism density of a template in a hypergraph.
    Homdensity {
        /// `edge`, `oct`, `squashed:<d>`, `pattern:<d>`, `two:<j>` or `@template.json`.
        #[arg(long)]
        template: String,
        /// Hypergraph dump JSON; otherwise the Cayley hypergraph of `--group`/`--set`.
        #[arg(long)]
        graph: Option<PathBuf>,
        #[arg(long)]
        group: Option<String>,
        #[arg(long, default_value = "qr")]
        set: String,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        coeffs: Option<String>,
    },
    /// Run SystemCut and print the systems.
    Systemcut {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
        /// `json` prints the full dump with normal-form witnesses.
        #[arg(long)]
        emit: Option<String>,
    },
    /// Probability that the pattern system lands in the set.
    Pattern {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        d: usize,
    },
    /// Quadratic-residue checks and the Paley hypergraph witness.
    Paley {
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 3)]
        k: usize,
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    /// Run a verification suite.
    Suite {
        /// all, norms, paley, systemcut, equiv or general.
        #[arg(long, default_value = "all")]
        suite: String,
        /// SuiteConfig JSON overriding the default tolerances and corpus sizes.
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

struct Report {
    columns: Vec<&'static str>,
    rows: Vec<Vec<Value>>,
}

enum Output {
    Table(Report),
    Raw(String),
    Checks(Vec<CheckResult>),
}

impl Common {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    fn limits(&self) -> Limits {
        let mut l = Limits::default();
        if let Some(b) = self.eval_budget {
            l.eval_budget = b;
        }
        l
    }

    fn budget(&self) -> EngineBudget {
        let mut b = EngineBudget { seed: self.seed(), ..EngineBudget::default() };
        if let Some(v) = self.budget_bits {
            b.exact_bits_cap = v;
        }
        if let Some(v) = self.restarts {
            b.restarts = v;
        }
        if let Some(v) = self.sweeps {
            b.sweeps_cap = v;
        }
        b
    }
}

fn num<T: Scalar>(v: &T) -> Value {
    if T::EXACT {
        Value::String(v.to_string())
    } else {
        json!(v.to_f64())
    }
}

fn parse_coeffs(text: &str) -> Result<Vec<i64>, Error> {
    text.split(',')
        .enumerate()
        .map(|(i, c)| {
            c.trim().parse().map_err(|_| Error::Parse { position: i, message: format!("bad coefficient {c:?}") })
        })
        .collect()
}

fn required_group(group: &Option<String>) -> Result<FiniteAbelianGroup, Error> {
    group.as_deref().ok_or_else(|| Error::InvalidParameter("--group is required".into()))?.parse()
}

fn cayley_from_args<T: Scalar>(
    group: &FiniteAbelianGroup,
    set: &str,
    k: usize,
    coeffs: &Option<String>,
    seed: u64,
) -> Result<Hypergraph<T>, Error> {
    let payload = Payload::Set(resolve_set(group, set, seed, None)?);
    match coeffs {
        Some(c) => general_cayley(&parse_coeffs(c)?, &payload),
        None => cayley_graph(k, &payload),
    }
}

fn parse_template(text: &str, k: usize) -> Result<TemplateGraph, Error> {
    if let Some(path) = text.strip_prefix('@') {
        return TemplateGraph::from_json(&std::fs::read_to_string(path)?);
    }
    let (name, arg) = text.split_once(':').unwrap_or((text, ""));
    let arg = || arg.parse::<usize>().map_err(|_| Error::Parse { position: name.len() + 1, message: format!("bad template {text:?}") });
    match name {
        "edge" => TemplateGraph::single_edge(k),
        "oct" => TemplateGraph::octahedron(k),
        "squashed" => TemplateGraph::squashed_octahedron(k, arg()?),
        "pattern" => TemplateGraph::complete_pattern(k, arg()?),
        "two" => TemplateGraph::two_edges_sharing(k, arg()?),
        _ => Err(Error::Parse { position: 0, message: format!("unknown template {text:?}") }),
    }
}

fn cmd_norms<T: Scalar>(c: &Common, set: &SetArgs, k: u32, oct: bool) -> Result<Output, Error> {
    let group: FiniteAbelianGroup = set.group.parse()?;
    let f = resolve_function::<T>(&group, &set.set, c.seed(), None)?;
    let limits = c.limits();
    let spectrum = fourier(&f);
    let mut columns = vec!["group", "set", "k", "uk_power", "uk_norm", "fourier_l4", "fourier_max_nontrivial"];
    let mut row = vec![
        json!(group.spec_string()),
        json!(set.set),
        json!(k),
        num(&gowers_norm_power_with(&f, k, &limits)?),
        json!(gowers_norm_with(&f, k, &limits)?),
        json!(spectrum.l4_fourth()),
        json!(spectrum.max_nontrivial()),
    ];
    if oct {
        let tensor = cayley_graph(k as usize, &Payload::Function(f))?.to_tensor(limits.dense_cap)?;
        columns.push("oct_norm");
        row.push(json!(oct_norm(&tensor, &limits)?));
    }
    Ok(Output::Table(Report { columns, rows: vec![row] }))
}

#[allow(clippy::too_many_arguments)]
fn cmd_disc<T: Scalar>(
    c: &Common,
    set: &SetArgs,
    k: usize,
    d: usize,
    coeffs: &Option<String>,
    engine: EngineArg,
    witness: bool,
) -> Result<Output, Error> {
    let group: FiniteAbelianGroup = set.group.parse()?;
    let graph = cayley_from_args::<T>(&group, &set.set, k, coeffs, c.seed())?;
    let limits = c.limits();
    let delta = graph.edge_density(&limits)?;
    let w = discrepancy(&graph, d, engine.into(), &c.budget(), &limits)?;
    let mut columns = vec!["group", "set", "k", "d", "engine", "delta", "disc"];
    let mut row = vec![
        json!(group.spec_string()),
        json!(set.set),
        json!(graph.arity()),
        json!(d),
        json!(match engine {
            EngineArg::Exact => "exact",
            EngineArg::Alt => "alt",
        }),
        num(&delta),
        num(&w.value),
    ];
    if witness {
        columns.push("witness");
        row.push(serde_json::to_value(WitnessDump::from_witness(&w))?);
    }
    Ok(Output::Table(Report { columns, rows: vec![row] }))
}

#[allow(clippy::too_many_arguments)]
fn cmd_cayley<T: Scalar>(
    c: &Common,
    spec: &Option<PathBuf>,
    group: &Option<String>,
    set: &str,
    k: usize,
    coeffs: &Option<String>,
    dense: bool,
) -> Result<Output, Error> {
    let (file, base) = match spec {
        Some(path) => {
            let file: CayleySpecFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            (file, path.parent().map(Path::to_path_buf))
        }
        None => {
            let g = required_group(group)?;
            let coeffs = coeffs.as_deref().map(parse_coeffs).transpose()?;
            let k = coeffs.as_ref().map_or(k, Vec::len);
            (CayleySpecFile { group: g.spec_string(), k, coeffs, set: set.to_string() }, None)
        }
    };
    let cayley = file.resolve::<T>(c.seed(), base.as_deref())?;
    let graph = cayley.build()?;
    let limits = c.limits();
    let dump = if dense { HypergraphDump::dense(&graph, limits.dense_cap)? } else { HypergraphDump::Cayley { spec: file.clone() } };
    Ok(Output::Table(Report {
        columns: vec!["group", "k", "coeffs", "density", "dump"],
        rows: vec![vec![
            json!(file.group),
            json!(graph.arity()),
            json!(cayley.coefficients),
            num(&graph.edge_density(&limits)?),
            serde_json::to_value(dump)?,
        ]],
    }))
}

#[allow(clippy::too_many_arguments)]
fn cmd_homdensity<T: Scalar>(
    c: &Common,
    template: &str,
    graph: &Option<PathBuf>,
    group: &Option<String>,
    set: &str,
    k: usize,
    coeffs: &Option<String>,
) -> Result<Output, Error> {
    let h: Hypergraph<T> = match graph {
        Some(path) => {
            let dump: HypergraphDump = serde_json::from_str(&std::fs::read_to_string(path)?)?;
            dump.load(c.seed(), path.parent())?
        }
        None => cayley_from_args(&required_group(group)?, set, k, coeffs, c.seed())?,
    };
    let f = parse_template(template, h.arity())?;
    let mut columns = vec!["template", "vertices", "edges", "density"];
    let mut row = vec![json!(template), json!(f.vertex_count()), json!(f.edge_count())];
    match c.samples {
        Some(n) => {
            let e = hom_density_mc(&f, &h, n, c.seed())?;
            row.extend([json!(e.mean), json!(e.std_error), json!(e.samples)]);
            columns.extend(["std_error", "samples"]);
        }
        None => row.push(num(&hom_density(&f, &h, &c.limits())?)),
    }
    Ok(Output::Table(Report { columns, rows: vec![row] }))
}

fn cmd_systemcut(k: usize, d: usize, emit: &Option<String>) -> Result<Output, Error> {
    let run = system_cut(k, d)?;
    match emit.as_deref() {
        Some("json") => Ok(Output::Raw(serde_json::to_string(&SystemDump::from_run(&run))? + "\n")),
        Some(other) => Err(Error::InvalidParameter(format!("unknown --emit value {other:?}"))),
        None => Ok(Output::Table(Report {
            columns: vec!["k", "d", "sf", "s", "weight", "forms"],
            rows: run
                .systems
                .iter()
                .enumerate()
                .map(|(s, sys)| {
                    let forms: Vec<String> = sys.forms.iter().map(ToString::to_string).collect();
                    vec![json!(k), json!(d), json!(run.sf), json!(s), json!(sys.weight()), json!(forms.join(" ; "))]
                })
                .collect(),
        })),
    }
}

fn cmd_pattern<T: Scalar>(c: &Common, set: &SetArgs, k: usize, d: usize) -> Result<Output, Error> {
    let group: FiniteAbelianGroup = set.group.parse()?;
    let a = resolve_set(&group, &set.set, c.seed(), None)?;
    let system = PatternSystem::new(k, d)?;
    let delta: T = a.density();
    let expected = quasirand::scalar::powi(&delta, system.form_count() as u32);
    let mut columns = vec!["group", "set", "k", "d", "variables", "forms", "delta_power", "probability"];
    let mut row = vec![
        json!(group.spec_string()),
        json!(set.set),
        json!(k),
        json!(d),
        json!(system.variable_count()),
        json!(system.form_count()),
        num(&expected),
    ];
    match c.samples {
        Some(n) => {
            let e = pattern_probability_mc(system.form_system(), &a, n, c.seed())?;
            row.extend([json!(e.mean), json!(e.std_error), json!(e.samples)]);
            columns.extend(["std_error", "samples"]);
        }
        None => row.push(num(&pattern_probability::<T>(system.form_system(), &a, &c.limits())?)),
    }
    Ok(Output::Table(Report { columns, rows: vec![row] }))
}

fn suite_config(c: &Common, path: &Option<PathBuf>) -> Result<SuiteConfig, Error> {
    let mut cfg = match path {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)?,
        None => SuiteConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
        cfg.budget.seed = s;
    }
    if let Some(v) = c.budget_bits {
        cfg.budget.exact_bits_cap = v;
    }
    if let Some(v) = c.restarts {
        cfg.budget.restarts = v;
    }
    if let Some(v) = c.sweeps {
        cfg.budget.sweeps_cap = v;
    }
    if let Some(v) = c.samples {
        cfg.paley_samples = v;
    }
    if let Some(v) = c.eval_budget {
        cfg.limits.eval_budget = v;
    }
    cfg.timing |= c.timing;
    Ok(cfg)
}

fn dispatch(cli: &Cli) -> Result<Output, Error> {
    let c = &cli.common;
    macro_rules! scalar {
        ($f:ident($($arg:expr),*)) => {
            if c.exact { $f::<BigRational>($($arg),*) } else { $f::<f64>($($arg),*) }
        };
    }
    match &cli.command {
        Command::Norms { set, k, oct } => scalar!(cmd_norms(c, set, *k, *oct)),
        Command::Disc { set, k, d, coeffs, engine, witness } => scalar!(cmd_disc(c, set, *k, *d, coeffs, *engine, *witness)),
        Command::Cayley { spec, group, set, k, coeffs, dense } => scalar!(cmd_cayley(c, spec, group, set, *k, coeffs, *dense)),
        Command::Homdensity { template, graph, group, set, k, coeffs } => {
            scalar!(cmd_homdensity(c, template, graph, group, set, *k, coeffs))
        }
        Command::Systemcut { k, d, emit } => cmd_systemcut(*k, *d, emit),
        Command::Pattern { set, k, d } => scalar!(cmd_pattern(c, set, *k, *d)),
        Command::Paley { p, k, d } => {
            let cfg = suite_config(c, &None)?;
            let witness: &[u64] = if *d >= 2 && d < k { std::slice::from_ref(p) } else { &[] };
            Ok(Output::Checks(run_paley_suite(std::slice::from_ref(p), std::slice::from_ref(p), witness, *k, *d, &cfg)?))
        }
        Command::Suite { suite, config } => {
            let suite: Suite = suite.parse()?;
            let cfg = suite_config(c, config)?;
            Ok(Output::Checks(run_suite(suite, &cfg)?))
        }
    }
}

fn csv_cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Null => String::new(),
        other => other.to_string(),
    }
}

fn render_table(report: &Report, format: Format) -> Result<String, Error> {
    match format {
        Format::Json => {
            let mut out = String::new();
            for row in &report.rows {
                let fields: Vec<String> = report
                    .columns
                    .iter()
                    .zip(row)
                    .map(|(c, v)| format!("{}:{}", json!(c), v))
                    .collect();
                out.push_str(&format!("{{{}}}\n", fields.join(",")));
            }
            Ok(out)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
            w.write_record(&report.columns).map_err(io)?;
            for row in &report.rows {
                w.write_record(row.iter().map(csv_cell)).map_err(io)?;
            }
            let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
            Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
        }
    }
}

fn render_checks(checks: &[CheckResult], format: Format) -> Result<String, Error> {
    match format {
        Format::Json => harness::to_jsonl(checks),
        Format::Csv => {
            let report = Report {
                columns: vec!["check_id", "relation", "lhs", "rhs", "tolerance", "passed", "label", "runtime_ms", "params"],
                rows: checks
                    .iter()
                    .map(|r| {
                        let v = serde_json::to_value(r).expect("check results serialize");
                        vec![
                            v["check_id"].clone(),
                            v["relation"].clone(),
                            v["lhs"].clone(),
                            v["rhs"].clone(),
                            v["tolerance"].clone(),
                            v["passed"].clone(),
                            v["label"].clone(),
                            v.get("runtime_ms").cloned().unwrap_or(Value::Null),
                            Value::String(v["params"].to_string()),
                        ]
                    })
                    .collect(),
            };
            render_table(&report, Format::Csv)
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Budget { .. } | Error::OrderCapExceeded { .. } => 3,
        _ => 2,
    }
}

fn configure_threads() -> Result<(), Error> {
    if let Ok(text) = std::env::var("QUASIRAND_THREADS") {
        let n: usize = text
            .trim()
            .parse()
            .map_err(|_| Error::InvalidParameter(format!("QUASIRAND_THREADS must be a positive integer, got {text:?}")))?;
        if n == 0 {
            return Err(Error::InvalidParameter("QUASIRAND_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, Error> {
    configure_threads()?;
    let (text, passed) = match dispatch(cli)? {
        Output::Table(r) => (render_table(&r, cli.common.format)?, true),
        Output::Raw(s) => (s, true),
        Output::Checks(checks) => (render_checks(&checks, cli.common.format)?, harness::all_passed(&checks)),
    };
    match &cli.common.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
