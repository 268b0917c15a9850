//! The `csibn` command line.
//!
//! [`run`] takes the full argument vector and returns the exit code together
//! with everything that would go to stdout and stderr, so the binary is a thin
//! wrapper and tests can drive the tool in-process.
//!
//! Exit codes: 0 on success, 1 on domain errors (invalid network, impossible
//! evidence, unknown names, ...), 2 on usage and parse errors. Every error is a
//! single stderr line `error[<code>]: <message>`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use csibn_core::{
    build_conditional_cutset_given, clique_report, csi_separated, cutset_infer, d_separated,
    decompose_network, decompose_node, parse_document, query_enumerate, reduce_tree, serialize_network,
    vacuous_parents, validate, variable_elimination, CliqueReport, Context, CptTree, CsiError, CutsetError,
    CutsetTree, DecompositionReport, InferenceError, InferenceResult, ModelError, Network, Query,
    TransformError, Violation,
};
use serde_json::{json, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser, Debug)]
#[command(name = "csibn", version, about = "Exact inference for Bayesian networks with tree-structured CPTs")]
struct Cli {
    /// Emit a JSON document instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a network file and list every violation.
    Validate { network: PathBuf },
    /// Posterior of one variable by full enumeration.
    Query {
        network: PathBuf,
        #[arg(short = 'q', long = "target")]
        target: String,
        #[arg(short = 'e', long = "evidence", default_value = "")]
        evidence: String,
    },
    /// Posterior of one variable with a chosen backend.
    Infer {
        network: PathBuf,
        #[arg(short = 'q', long = "target")]
        target: String,
        #[arg(short = 'e', long = "evidence", default_value = "")]
        evidence: String,
        #[arg(long, value_enum, default_value_t = Method::Ve)]
        method: Method,
        /// Report the number of solver calls.
        #[arg(long)]
        count_evals: bool,
        /// Conditional cutset (JSON) to use with `--method cutset` instead of
        /// building one.
        #[arg(long)]
        cutset: Option<PathBuf>,
    },
    /// Parents of a node whose arcs are vacuous in a context.
    Vacuous {
        network: PathBuf,
        #[arg(short = 'x', long = "node")]
        node: String,
        #[arg(short = 'c', long = "context", default_value = "")]
        context: String,
    },
    /// A node's CPT-tree reduced by a context.
    Reduce {
        network: PathBuf,
        #[arg(short = 'x', long = "node")]
        node: String,
        #[arg(short = 'c', long = "context", default_value = "")]
        context: String,
    },
    /// d-separation of two variable sets given a third.
    Dsep {
        network: PathBuf,
        #[arg(short = 'X')]
        xs: String,
        #[arg(short = 'Y')]
        ys: String,
        #[arg(short = 'Z', default_value = "")]
        zs: String,
    },
    /// CSI-separation: d-separation in the context network.
    Csisep {
        network: PathBuf,
        #[arg(short = 'X')]
        xs: String,
        #[arg(short = 'Y')]
        ys: String,
        #[arg(short = 'Z', default_value = "")]
        zs: String,
        #[arg(short = 'c', long = "context", default_value = "")]
        context: String,
    },
    /// Multiplexer decomposition of tree CPTs.
    Decompose {
        network: PathBuf,
        /// Decompose one node a single step instead of the whole network.
        #[arg(short = 'x', long = "node")]
        node: Option<String>,
        /// Where to write the transformed network.
        #[arg(short = 'o', long = "output")]
        output: Option<PathBuf>,
    },
    /// Clique metrics before and after decomposition.
    Cliques { network: PathBuf },
    /// Build a conditional cutset.
    Cutset {
        network: PathBuf,
        /// Variables that will be observed and must stay out of the cutset.
        #[arg(short = 'e', long = "evidence", default_value = "")]
        evidence: String,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Enum,
    Ve,
    Cutset,
}

impl Method {
    fn name(self) -> &'static str {
        match self {
            Method::Enum => "enum",
            Method::Ve => "ve",
            Method::Cutset => "cutset",
        }
    }
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Debug)]
struct Failure {
    code: &'static str,
    exit: i32,
    message: String,
}

impl Failure {
    fn usage(code: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code,
            exit: 2,
            message: message.into(),
        }
    }

    fn domain(code: &'static str, message: impl Into<String>) -> Self {
        Failure {
            code,
            exit: 1,
            message: message.into(),
        }
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        let code = match &e {
            ModelError::UnknownVariable(_) => "unknown-variable",
            ModelError::UnknownValue { .. } => "unknown-value",
            ModelError::MalformedContext(_) | ModelError::DuplicateBinding(_) => {
                return Failure::usage("bad-context", e.to_string())
            }
            ModelError::Unbound(_) => "unbound",
            ModelError::Invalid(_) => "invalid-network",
        };
        Failure::domain(code, e.to_string())
    }
}

impl From<InferenceError> for Failure {
    fn from(e: InferenceError) -> Self {
        let code = match &e {
            InferenceError::Model(m) => return m.clone().into(),
            InferenceError::ImpossibleEvidence => "impossible-evidence",
            InferenceError::TargetInEvidence(_) => "target-in-evidence",
            InferenceError::NotSinglyConnected => "not-singly-connected",
            InferenceError::EvidenceOnCutset(_) => "evidence-on-cutset",
            InferenceError::InvalidCutset(_) => "invalid-cutset",
        };
        Failure::domain(code, e.to_string())
    }
}

impl From<CsiError> for Failure {
    fn from(e: CsiError) -> Self {
        let code = match &e {
            CsiError::Model(m) => return m.clone().into(),
            CsiError::UnknownVariable(_) => "unknown-variable",
            CsiError::BoundInContext(_) => "bound-in-context",
            CsiError::NotDisjoint(_) => "not-disjoint",
        };
        Failure::domain(code, e.to_string())
    }
}

impl From<TransformError> for Failure {
    fn from(e: TransformError) -> Self {
        let code = match &e {
            TransformError::Model(m) => return m.clone().into(),
            TransformError::UnknownVariable(_) => "unknown-variable",
            TransformError::NotATree(_) => "not-a-tree",
            TransformError::LeafRoot(_) => "leaf-root",
            TransformError::NameCollision(_) => "name-collision",
        };
        Failure::domain(code, e.to_string())
    }
}

impl From<CutsetError> for Failure {
    fn from(e: CutsetError) -> Self {
        let code = match &e {
            CutsetError::Model(m) => return m.clone().into(),
            CutsetError::UnknownVariable(_) => "unknown-variable",
            CutsetError::NotAParent { .. } => "not-a-parent",
        };
        Failure::domain(code, e.to_string())
    }
}

/// Runs one invocation. `argv[0]` is the program name.
pub fn run<I, S>(argv: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Output {
                    code: 0,
                    stdout: text,
                    stderr: String::new(),
                },
                _ => {
                    let first = text
                        .lines()
                        .take_while(|l| !l.starts_with("Usage:"))
                        .map(str::trim)
                        .filter(|l| !l.is_empty())
                        .collect::<Vec<_>>()
                        .join(" ")
                        .trim_start_matches("error: ")
                        .trim_end_matches("For more information, try '--help'.")
                        .trim_end()
                        .to_string();
                    Output {
                        code: 2,
                        stdout: String::new(),
                        stderr: format!("error[usage]: {first}\n"),
                    }
                }
            };
        }
    };
    let json = cli.json;
    match dispatch(cli.command) {
        Ok(report) => Output {
            code: report.code,
            stdout: if json {
                let mut doc = serde_json::Map::new();
                doc.insert("schema_version".into(), json!(SCHEMA_VERSION));
                if let Value::Object(body) = report.json {
                    doc.extend(body);
                }
                let mut s = serde_json::to_string_pretty(&Value::Object(doc)).expect("serializable");
                s.push('\n');
                s
            } else {
                report.text
            },
            stderr: report.stderr,
        },
        Err(f) => Output {
            code: f.exit,
            stdout: String::new(),
            stderr: format!("error[{}]: {}\n", f.code, f.message),
        },
    }
}

/// Successful command output in both renderings. `code` is nonzero only for
/// `validate` on an invalid network, which still prints its findings.
struct Report {
    code: i32,
    text: String,
    json: Value,
    stderr: String,
}

impl Report {
    fn ok(command: &str, text: String, mut json: Value) -> Self {
        json.as_object_mut()
            .expect("object")
            .insert("command".into(), json!(command));
        Report {
            code: 0,
            text,
            json: sort_command_first(json),
            stderr: String::new(),
        }
    }
}

fn sort_command_first(v: Value) -> Value {
    let Value::Object(map) = v else { return v };
    let mut out = serde_json::Map::new();
    if let Some(c) = map.get("command") {
        out.insert("command".into(), c.clone());
    }
    for (k, v) in map {
        if k != "command" {
            out.insert(k, v);
        }
    }
    Value::Object(out)
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage("io", format!("{}: {e}", path.display())))
}

fn load_unchecked(path: &Path) -> Result<Network, Failure> {
    parse_document(&read(path)?).map_err(|e| Failure::usage("syntax", format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Network, Failure> {
    let net = load_unchecked(path)?;
    let violations = validate(&net);
    if let Some(first) = violations.first() {
        return Err(Failure::domain(
            "invalid-network",
            format!("{}: {first} ({} violation(s))", path.display(), violations.len()),
        ));
    }
    Ok(net)
}

fn context(net: &Network, text: &str) -> Result<Context, Failure> {
    let c = Context::parse(text)?;
    c.check(net)?;
    Ok(c)
}

fn var_set(net: &Network, text: &str) -> Result<Vec<String>, Failure> {
    let mut out: Vec<String> = Vec::new();
    for v in text.split(',').map(str::trim).filter(|v| !v.is_empty()) {
        if net.variable(v).is_none() {
            return Err(ModelError::UnknownVariable(v.to_string()).into());
        }
        if !out.iter().any(|o| o == v) {
            out.push(v.to_string());
        }
    }
    Ok(out)
}

fn strs(v: &[String]) -> Vec<&str> {
    v.iter().map(String::as_str).collect()
}

fn list(v: &[String]) -> String {
    if v.is_empty() {
        "(none)".into()
    } else {
        v.join(", ")
    }
}

fn dispatch(cmd: Command) -> Result<Report, Failure> {
    match cmd {
        Command::Validate { network } => cmd_validate(&network),
        Command::Query {
            network,
            target,
            evidence,
        } => {
            let net = load(&network)?;
            let q = Query::new(&target, context(&net, &evidence)?);
            let r = query_enumerate(&net, &q)?;
            Ok(posterior_report("query", &net, &q, Method::Enum, &r, false))
        }
        Command::Infer {
            network,
            target,
            evidence,
            method,
            count_evals,
            cutset,
        } => {
            let net = load(&network)?;
            let q = Query::new(&target, context(&net, &evidence)?);
            if cutset.is_some() && !matches!(method, Method::Cutset) {
                return Err(Failure::usage("usage", "--cutset requires --method cutset"));
            }
            let r = match method {
                Method::Enum => query_enumerate(&net, &q)?,
                Method::Ve => variable_elimination(&net, &q)?,
                Method::Cutset => {
                    let ct = match cutset {
                        Some(path) => serde_json::from_str::<CutsetTree>(&read(&path)?).map_err(|e| {
                            Failure::usage("syntax", format!("{}: {e}", path.display()))
                        })?,
                        None => build_conditional_cutset_given(&net, &q.evidence)?,
                    };
                    cutset_infer(&net, &q, &ct)?
                }
            };
            Ok(posterior_report("infer", &net, &q, method, &r, count_evals))
        }
        Command::Vacuous {
            network,
            node,
            context: c,
        } => {
            let net = load(&network)?;
            let c = context(&net, &c)?;
            let v = vacuous_parents(&net, &node, &c)?;
            let mut text = String::new();
            for p in &v {
                writeln!(text, "{p}").unwrap();
            }
            if v.is_empty() {
                text.push_str("(none)\n");
            }
            Ok(Report::ok(
                "vacuous",
                text,
                json!({"node": node, "context": c.to_string(), "vacuous": v}),
            ))
        }
        Command::Reduce {
            network,
            node,
            context: c,
        } => {
            let net = load(&network)?;
            let c = context(&net, &c)?;
            let tree = net
                .tree_of(&node)
                .ok_or_else(|| Failure::from(ModelError::UnknownVariable(node.clone())))?;
            let reduced = reduce_tree(&tree, &c);
            let tested: Vec<String> = reduced.tested_vars().into_iter().collect();
            let mut text = String::new();
            render_tree(&reduced, 0, &mut text);
            writeln!(text, "tests: {}", list(&tested)).unwrap();
            Ok(Report::ok(
                "reduce",
                text,
                json!({"node": node, "context": c.to_string(), "tests": tested, "tree": reduced}),
            ))
        }
        Command::Dsep { network, xs, ys, zs } => {
            let net = load(&network)?;
            let (x, y, z) = (var_set(&net, &xs)?, var_set(&net, &ys)?, var_set(&net, &zs)?);
            let sep = d_separated(&net, &strs(&x), &strs(&y), &strs(&z))?;
            Ok(separation_report("dsep", sep, &x, &y, &z, None))
        }
        Command::Csisep {
            network,
            xs,
            ys,
            zs,
            context: c,
        } => {
            let net = load(&network)?;
            let (x, y, z) = (var_set(&net, &xs)?, var_set(&net, &ys)?, var_set(&net, &zs)?);
            let c = context(&net, &c)?;
            let sep = csi_separated(&net, &strs(&x), &strs(&y), &strs(&z), &c)?;
            Ok(separation_report("csisep", sep, &x, &y, &z, Some(&c)))
        }
        Command::Decompose { network, node, output } => {
            let net = load(&network)?;
            let (dec, reports) = match &node {
                Some(x) => {
                    let (d, r) = decompose_node(&net, x)?;
                    (d, vec![r])
                }
                None => decompose_network(&net)?,
            };
            if let Some(path) = &output {
                std::fs::write(path, serialize_network(&dec))
                    .map_err(|e| Failure::usage("io", format!("{}: {e}", path.display())))?;
            }
            let mut text = String::new();
            for r in &reports {
                render_decomposition(r, &mut text);
            }
            writeln!(
                text,
                "steps: {}, variables: {} -> {}",
                reports.len(),
                net.len(),
                dec.len()
            )
            .unwrap();
            if let Some(path) = &output {
                writeln!(text, "written: {}", path.display()).unwrap();
            }
            Ok(Report::ok(
                "decompose",
                text,
                json!({
                    "reports": reports,
                    "variables_before": net.len(),
                    "variables_after": dec.len(),
                    "output": output.as_ref().map(|p| p.display().to_string()),
                }),
            ))
        }
        Command::Cliques { network } => {
            let net = load(&network)?;
            let before = clique_report(&net);
            let (dec, _) = decompose_network(&net)?;
            let after = clique_report(&dec);
            let mut text = String::new();
            render_cliques("before", &before, &mut text);
            render_cliques("after", &after, &mut text);
            Ok(Report::ok("cliques", text, json!({"before": before, "after": after})))
        }
        Command::Cutset { network, evidence } => {
            let net = load(&network)?;
            let e = context(&net, &evidence)?;
            let ct = build_conditional_cutset_given(&net, &e)?;
            let vars: Vec<String> = ct.variables().into_iter().collect();
            let flat: usize = vars.iter().map(|v| net.card(v)).product();
            let mut text = ct.to_string();
            writeln!(text, "variables: {}", list(&vars)).unwrap();
            writeln!(text, "branches: {}", ct.branch_count()).unwrap();
            writeln!(text, "flat branches: {flat}").unwrap();
            Ok(Report::ok(
                "cutset",
                text,
                json!({
                    "evidence": e.to_string(),
                    "cutset": ct,
                    "variables": vars,
                    "branches": ct.branch_count(),
                    "flat_branches": flat,
                }),
            ))
        }
    }
}

fn cmd_validate(path: &Path) -> Result<Report, Failure> {
    let net = load_unchecked(path)?;
    let violations = validate(&net);
    let mut report = Report::ok(
        "validate",
        String::new(),
        json!({
            "valid": violations.is_empty(),
            "violations": violations.iter().map(|v| json!({"code": v.code(), "message": v.to_string()})).collect::<Vec<_>>(),
        }),
    );
    if violations.is_empty() {
        report.text = "valid\n".into();
    } else {
        report.text = violations.iter().map(|v: &Violation| format!("{v}\n")).collect();
        report.code = 1;
        report.stderr = format!(
            "error[invalid-network]: {}: {} violation(s)\n",
            path.display(),
            violations.len()
        );
    }
    Ok(report)
}

fn posterior_report(
    command: &str,
    net: &Network,
    q: &Query,
    method: Method,
    r: &InferenceResult,
    count_evals: bool,
) -> Report {
    let values = &net.variable(&q.target).expect("resolved").values;
    let mut text = String::new();
    if q.evidence.is_empty() {
        writeln!(text, "P({})", q.target).unwrap();
    } else {
        writeln!(text, "P({} | {})", q.target, q.evidence).unwrap();
    }
    for (v, p) in values.iter().zip(r.posterior.probs()) {
        writeln!(text, "  {v}: {p:.6}").unwrap();
    }
    writeln!(text, "P(evidence): {:.6}", r.evidence_probability).unwrap();
    if count_evals {
        writeln!(text, "evaluations: {}", r.evaluations).unwrap();
    }
    let posterior: serde_json::Map<String, Value> = values
        .iter()
        .zip(r.posterior.probs())
        .map(|(v, p)| (v.clone(), json!(p)))
        .collect();
    Report::ok(
        command,
        text,
        json!({
            "target": q.target,
            "evidence": q.evidence.to_string(),
            "method": method.name(),
            "posterior": posterior,
            "evidence_probability": r.evidence_probability,
            "evaluations": r.evaluations,
        }),
    )
}

fn separation_report(
    command: &str,
    sep: bool,
    x: &[String],
    y: &[String],
    z: &[String],
    c: Option<&Context>,
) -> Report {
    let mut text = format!("{}\n", if sep { "separated" } else { "connected" });
    let mut doc = json!({"x": x, "y": y, "z": z});
    if let Some(c) = c {
        doc["context"] = json!(c.to_string());
    }
    doc["separated"] = json!(sep);
    if command == "csisep" {
        text = format!("{}\n", if sep { "csi-separated" } else { "connected" });
    }
    Report::ok(command, text, doc)
}

fn fmt_probs(p: &[f64]) -> String {
    let parts: Vec<String> = p.iter().map(|x| x.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

/// One line per branch: `Var=value:` followed by the leaf distribution or by
/// the nested test on the following lines.
fn render_tree(t: &CptTree, indent: usize, out: &mut String) {
    match t {
        CptTree::Leaf(d) => writeln!(out, "{:indent$}{}", "", fmt_probs(d.probs())).unwrap(),
        CptTree::Node { test, branches } => {
            for (value, child) in branches {
                match child {
                    CptTree::Leaf(d) => {
                        writeln!(out, "{:indent$}{test}={value}: {}", "", fmt_probs(d.probs())).unwrap()
                    }
                    _ => {
                        writeln!(out, "{:indent$}{test}={value}:", "").unwrap();
                        render_tree(child, indent + 2, out);
                    }
                }
            }
        }
    }
}

fn render_decomposition(r: &DecompositionReport, out: &mut String) {
    writeln!(out, "{} on {}", r.node, r.selector).unwrap();
    for c in &r.conditional {
        writeln!(out, "  {} <- [{}] (size {})", c.name, c.parents.join(", "), c.size).unwrap();
    }
    writeln!(
        out,
        "  entries: table {}, tree {} -> {} (+{} multiplexer rows)",
        r.table_entries_before, r.tree_entries_before, r.total_after, r.multiplexer_rows
    )
    .unwrap();
}

fn render_cliques(label: &str, r: &CliqueReport, out: &mut String) {
    writeln!(
        out,
        "{label}: {} cliques, max size {}, max weight {}, total table weight {}",
        r.cliques.len(),
        r.max_clique_size(),
        r.max_clique_weight,
        r.total_table_weight
    )
    .unwrap();
    for c in &r.cliques {
        writeln!(out, "  {{{}}}", c.join(", ")).unwrap();
    }
}
