//! The `tfsd` command line.

use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::atoms::decompose;
use crate::avm::{parse_avm, print_avm};
use crate::discourse::{
    parse_discourse, resolve_cascade, Characteristic, DiscourseNode, NodeKind, ParseOptions,
    Reading, SchemaMode, TreeShapes,
};
use crate::formats::{open_discourse, open_hierarchy, read_file, LoadError};
use crate::fs::{unify, FeatureStructure};
use crate::ops::{generalize, mscd, punion, skeptical_punion, OpsError, SearchLimit, DEFAULT_MAX_ATOMS};
use crate::types::TypeHierarchy;

#[derive(Debug, Parser)]
#[command(name = "tfsd", version, about = "Typed feature structures for discourse")]
struct Cli {
    /// Type hierarchy file.
    #[arg(long, global = true)]
    hierarchy: Option<PathBuf>,
    /// Lexicon file; overrides the one named by a discourse file.
    #[arg(long, global = true)]
    lexicon: Option<PathBuf>,
    /// One JSON record per line instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Largest atom set a subset search may range over.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_ATOMS, value_name = "N")]
    max_atoms: usize,
    /// Report elapsed time on stderr.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compile the hierarchy and report on it.
    Check {
        /// Print the generalization table.
        #[arg(long)]
        dump: bool,
    },
    /// Apply a binary operation. For punion and skeptical, LEFT is the strict
    /// target and RIGHT the defeasible source.
    Op {
        op: OpName,
        /// AVM text (starting with `[`) or a file holding one.
        left: String,
        right: String,
        /// Print only the number of results.
        #[arg(long)]
        count_only: bool,
        /// Also print the atoms of each result.
        #[arg(long)]
        atoms: bool,
    },
    /// Print the atoms of a structure.
    Decompose { avm: String },
    /// Parse a discourse file.
    Parse {
        discourse: PathBuf,
        /// Show every bracketing, not only left-branching ones.
        #[arg(long)]
        all_trees: bool,
        /// Accept every schema.
        #[arg(long)]
        permissive_schema: bool,
        /// Compute schemas by MSCD against the unresolved right daughter.
        #[arg(long)]
        mscd_schema: bool,
        /// Resolve each clause against all earlier resolutions instead of
        /// building trees.
        #[arg(long)]
        cascade: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OpName {
    Unify,
    Gen,
    Punion,
    Mscd,
    Skeptical,
}

impl OpName {
    fn as_str(self) -> &'static str {
        match self {
            OpName::Unify => "unify",
            OpName::Gen => "gen",
            OpName::Punion => "punion",
            OpName::Mscd => "mscd",
            OpName::Skeptical => "skeptical",
        }
    }
}

enum Failure {
    Input(String),
    Limit(OpsError),
    Io(io::Error),
}

impl From<LoadError> for Failure {
    fn from(e: LoadError) -> Self {
        Failure::Input(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

impl From<OpsError> for Failure {
    fn from(e: OpsError) -> Self {
        Failure::Limit(e)
    }
}

type Outcome = Result<(), Failure>;

/// Runs the command line `args` (program name first). Returns the exit code:
/// 0 when the command ran, 1 for bad input, 2 when the atom limit was hit.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let shown = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(err, "{shown}");
                1
            } else {
                let _ = write!(out, "{shown}");
                0
            };
        }
    };
    let start = Instant::now();
    let result = dispatch(&cli, out);
    if cli.timing {
        let _ = writeln!(err, "elapsed: {:.3} ms", start.elapsed().as_secs_f64() * 1e3);
    }
    match result {
        Ok(()) => 0,
        Err(Failure::Input(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
        Err(Failure::Limit(e)) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
        Err(Failure::Io(e)) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Outcome {
    let limit = SearchLimit(cli.max_atoms);
    match &cli.command {
        Command::Check { dump } => check(cli, *dump, out),
        Command::Op {
            op,
            left,
            right,
            count_only,
            atoms,
        } => {
            let h = hierarchy(cli)?;
            let l = load_avm(&h, left)?;
            let r = load_avm(&h, right)?;
            binary_op(cli, &h, *op, &l, &r, limit, *count_only, *atoms, out)
        }
        Command::Decompose { avm } => {
            let h = hierarchy(cli)?;
            let fs = load_avm(&h, avm)?;
            let atoms: Vec<String> = decompose(&h, &fs)
                .iter()
                .map(|a| a.display(&h).to_string())
                .collect();
            if cli.json {
                emit(
                    out,
                    json!({"op": "decompose", "index": 0, "avm": print_avm(&h, &fs), "atoms": atoms}),
                )?;
            } else {
                writeln!(out, "{}", print_avm(&h, &fs))?;
                writeln!(out, "{} atoms", atoms.len())?;
                for a in &atoms {
                    writeln!(out, "  {a}")?;
                }
            }
            Ok(())
        }
        Command::Parse {
            discourse,
            all_trees,
            permissive_schema,
            mscd_schema,
            cascade,
        } => {
            let loaded = open_discourse(discourse, cli.hierarchy.as_deref(), cli.lexicon.as_deref())?;
            let h = &loaded.hierarchy;
            if *cascade {
                let readings = resolve_cascade(h, &loaded.dcus, limit)?;
                return print_cascade(cli, h, &loaded.dcus, &readings, out);
            }
            let opts = ParseOptions {
                trees: if *all_trees {
                    TreeShapes::All
                } else {
                    TreeShapes::LeftBranching
                },
                characteristic: if *permissive_schema {
                    Characteristic::Permissive
                } else {
                    Characteristic::Default
                },
                schema: if *mscd_schema {
                    SchemaMode::Mscd
                } else {
                    SchemaMode::Generalization
                },
                limit,
            };
            let readings = parse_discourse(h, &loaded.dcus, &opts)?;
            print_readings(cli, h, &readings, out)
        }
    }
}

fn hierarchy(cli: &Cli) -> Result<TypeHierarchy, Failure> {
    let path = cli
        .hierarchy
        .as_deref()
        .ok_or(Failure::Input("no hierarchy given (use --hierarchy)".into()))?;
    Ok(open_hierarchy(path)?)
}

/// Inline AVM text when `arg` starts with `[`, otherwise a file name.
fn load_avm(h: &TypeHierarchy, arg: &str) -> Result<FeatureStructure, Failure> {
    if arg.trim_start().starts_with('[') {
        parse_avm(h, arg).map_err(|e| Failure::Input(format!("{arg:?}: {e}")))
    } else {
        let text = read_file(Path::new(arg))?;
        parse_avm(h, &text).map_err(|e| Failure::Input(format!("{arg}: {e}")))
    }
}

fn emit(out: &mut dyn Write, record: Value) -> io::Result<()> {
    writeln!(out, "{record}")
}

fn check(cli: &Cli, dump: bool, out: &mut dyn Write) -> Outcome {
    let h = hierarchy(cli)?;
    if cli.json {
        emit(
            out,
            json!({
                "op": "check",
                "types": h.type_count(),
                "features": h.feature_count(),
                "gen_entries": h.gen_table_len(),
            }),
        )?;
        if dump {
            for line in h.dump_gen_table().lines() {
                let mut parts = line.split_whitespace();
                let (a, b, _, g) = (parts.next(), parts.next(), parts.next(), parts.next());
                emit(out, json!({"op": "gen", "a": a, "b": b, "gen": g}))?;
            }
        }
    } else {
        writeln!(
            out,
            "ok: {} types, {} features, {} generalization entries",
            h.type_count(),
            h.feature_count(),
            h.gen_table_len()
        )?;
        if dump {
            write!(out, "{}", h.dump_gen_table())?;
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn binary_op(
    cli: &Cli,
    h: &TypeHierarchy,
    op: OpName,
    left: &FeatureStructure,
    right: &FeatureStructure,
    limit: SearchLimit,
    count_only: bool,
    with_atoms: bool,
    out: &mut dyn Write,
) -> Outcome {
    let results: Vec<FeatureStructure> = match op {
        OpName::Unify => unify(h, left, right).into_iter().collect(),
        OpName::Gen => vec![generalize(h, left, right)],
        OpName::Punion => punion(h, left, right, limit)?.into_vec(),
        OpName::Mscd => mscd(h, left, right, limit)?.into_vec(),
        OpName::Skeptical => vec![skeptical_punion(h, left, right, limit)?],
    };
    let name = op.as_str();
    let atoms_of = |fs: &FeatureStructure| -> Vec<String> {
        decompose(h, fs).iter().map(|a| a.display(h).to_string()).collect()
    };
    if cli.json {
        if !count_only {
            for (i, r) in results.iter().enumerate() {
                let mut rec = json!({"op": name, "index": i + 1, "avm": print_avm(h, r)});
                if with_atoms {
                    rec["atoms"] = json!(atoms_of(r));
                }
                emit(out, rec)?;
            }
        }
        emit(
            out,
            json!({
                "op": name,
                "left": print_avm(h, left),
                "right": print_avm(h, right),
                "count": results.len(),
            }),
        )?;
        return Ok(());
    }
    if count_only {
        writeln!(out, "{}", results.len())?;
        return Ok(());
    }
    writeln!(out, "{name}")?;
    writeln!(out, "  left:  {}", print_avm(h, left))?;
    writeln!(out, "  right: {}", print_avm(h, right))?;
    if results.is_empty() {
        writeln!(out, "FAIL")?;
        return Ok(());
    }
    writeln!(
        out,
        "{} result{}",
        results.len(),
        if results.len() == 1 { "" } else { "s" }
    )?;
    for (i, r) in results.iter().enumerate() {
        writeln!(out, "[{}] {}", i + 1, print_avm(h, r))?;
        if with_atoms {
            for a in atoms_of(r) {
                writeln!(out, "      {a}")?;
            }
        }
    }
    Ok(())
}

/// Internal nodes in preorder.
fn internal_nodes(n: &DiscourseNode) -> Vec<&DiscourseNode> {
    let mut out = Vec::new();
    fn walk<'a>(n: &'a DiscourseNode, out: &mut Vec<&'a DiscourseNode>) {
        if let Some((l, r)) = n.children() {
            out.push(n);
            walk(l, out);
            walk(r, out);
        }
    }
    walk(n, &mut out);
    out
}

fn leaf_id(n: &DiscourseNode) -> &str {
    match &n.kind {
        NodeKind::Leaf { id, .. } => id,
        NodeKind::Internal { .. } => "",
    }
}

fn print_readings(cli: &Cli, h: &TypeHierarchy, readings: &[Reading], out: &mut dyn Write) -> Outcome {
    let plural = |n: usize| if n == 1 { "" } else { "s" };
    if cli.json {
        for (i, r) in readings.iter().enumerate() {
            let nodes: Vec<Value> = internal_nodes(&r.tree)
                .into_iter()
                .map(|n| {
                    json!({
                        "tree": n.shape(),
                        "consem": print_avm(h, &n.consem),
                        "schema": n.schema().map(|s| print_avm(h, s)),
                    })
                })
                .collect();
            let clauses: Vec<Value> = r
                .tree
                .leaves()
                .into_iter()
                .map(|l| json!({"key": leaf_id(l), "consem": print_avm(h, &l.consem)}))
                .collect();
            emit(
                out,
                json!({
                    "op": "parse",
                    "index": i + 1,
                    "tree": r.tree.shape(),
                    "avm": print_avm(h, r.root_consem()),
                    "schema": r.root_schema().map(|s| print_avm(h, s)),
                    "nodes": nodes,
                    "clauses": clauses,
                }),
            )?;
        }
        emit(out, json!({"op": "parse", "count": readings.len()}))?;
        return Ok(());
    }
    writeln!(out, "{} reading{}", readings.len(), plural(readings.len()))?;
    for (i, r) in readings.iter().enumerate() {
        writeln!(out)?;
        writeln!(out, "reading {}: {}", i + 1, r.tree.shape())?;
        for n in internal_nodes(&r.tree) {
            writeln!(out, "  {}", n.shape())?;
            writeln!(out, "    consem: {}", print_avm(h, &n.consem))?;
            if let Some(s) = n.schema() {
                writeln!(out, "    schema: {}", print_avm(h, s))?;
            }
        }
        for (k, l) in r.tree.leaves().into_iter().enumerate() {
            writeln!(out, "  {} {}: {}", k + 1, leaf_id(l), print_avm(h, &l.consem))?;
        }
    }
    Ok(())
}

fn print_cascade(
    cli: &Cli,
    h: &TypeHierarchy,
    dcus: &[crate::discourse::Dcu],
    readings: &[crate::discourse::CascadeReading],
    out: &mut dyn Write,
) -> Outcome {
    if cli.json {
        for (i, r) in readings.iter().enumerate() {
            let clauses: Vec<Value> = dcus
                .iter()
                .zip(&r.clauses)
                .map(|(d, c)| json!({"key": d.id, "consem": print_avm(h, c)}))
                .collect();
            emit(out, json!({"op": "cascade", "index": i + 1, "clauses": clauses}))?;
        }
        emit(out, json!({"op": "cascade", "count": readings.len()}))?;
        return Ok(());
    }
    writeln!(
        out,
        "{} reading{}",
        readings.len(),
        if readings.len() == 1 { "" } else { "s" }
    )?;
    for (i, r) in readings.iter().enumerate() {
        writeln!(out)?;
        writeln!(out, "reading {}", i + 1)?;
        for (k, (d, c)) in dcus.iter().zip(&r.clauses).enumerate() {
            writeln!(out, "  {} {}: {}", k + 1, d.id, print_avm(h, c))?;
        }
    }
    Ok(())
}
