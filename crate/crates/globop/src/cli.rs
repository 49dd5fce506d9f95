//! Command-line front end. Exit codes: 0 success, 1 verification failure,
//! 2 parse or validation error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::coend::{
    cell_from_json, cell_to_json, check_serial, classifying_cell, coend_boundary, cw_image,
    lift_contraction, make_mu, CoendCell, CoendCellJson, CoendEnv, Variant,
};
use crate::collections::{
    binary_complex_pushout, build_complex, coface, Coface, PointedCollection, RawCollection,
};
use crate::contraction::{classes_of_dim, eligible_pairs, find_contraction, verify_property};
use crate::globular::{GlobularSet, Side};
use crate::operads::{LoopMode, Operad, Property, TermId};
use crate::trees::{enumerate_trees, parse_tree, pasting_scheme, Tree, TreeMatrix};

#[derive(Debug, Parser)]
#[command(
    name = "globop",
    version,
    about = "Bounded symbolic engine for globular operads"
)]
pub struct Cli {
    /// Directory for cached presentations.
    #[arg(long, global = true)]
    pub cache_dir: Option<PathBuf>,
    /// Recompute instead of reading the cache.
    #[arg(long, global = true)]
    pub no_cache: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trees: parsing, tensors, decompositions, schemes.
    Tree {
        #[command(subcommand)]
        cmd: TreeCmd,
    },
    /// The complex of higher-transformation collections.
    Complex {
        #[command(subcommand)]
        cmd: ComplexCmd,
    },
    /// Presented operads.
    Operad {
        #[command(subcommand)]
        cmd: OperadCmd,
    },
    /// Eligible pairs and contraction cells.
    Contract {
        #[command(subcommand)]
        cmd: ContractCmd,
    },
    /// The pushout `C^n ⊔_{C^p} C^n` as a collection.
    Pushout(PushoutArgs),
    /// Cells of the coendomorphism operad.
    Coend {
        #[command(subcommand)]
        cmd: CoendCmd,
    },
    /// Replays a worked example and prints a certificate.
    VerifyExample {
        /// Example name; `3-3` is the pushout coherence cell.
        name: String,
    },
    /// Writes an object as JSON or DOT.
    Export {
        #[command(subcommand)]
        what: ExportCmd,
        #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Delta,
    Kappa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundaryArg {
    Source,
    Target,
}

#[derive(Debug, Subcommand)]
pub enum TreeCmd {
    /// Parses a tree and prints its matrix.
    Parse {
        tree: String,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Glues two trees along level `p`.
    Star {
        #[arg(long)]
        left: String,
        #[arg(long)]
        right: String,
        #[arg(long)]
        level: usize,
    },
    /// Leaf factors and junction levels.
    Decompose { tree: String },
    /// Removes the top `levels` levels.
    Truncate {
        tree: String,
        #[arg(long, default_value_t = 1)]
        levels: usize,
    },
    /// All trees of a dimension with a bounded number of leaves.
    Enumerate {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        max_leaves: usize,
    },
    /// Cell counts of the pasting scheme.
    Scheme { tree: String },
}

#[derive(Debug, Subcommand)]
pub enum ComplexCmd {
    /// Emits `C^n` as JSON.
    Emit {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
    },
    /// Emits a coface `C^n -> C^{n+1}`.
    Coface {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum)]
        side: SideArg,
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
    },
    /// Cell counts per dimension.
    Counts {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
    },
}

#[derive(Debug, Clone, Args)]
pub struct BaseArgs {
    /// Use `C^n` as the base.
    #[arg(long, conflicts_with_all = ["pushout", "base"])]
    pub complex: Option<usize>,
    /// Use `C^n ⊔_{C^p} C^n`, written `N,P`.
    #[arg(long, value_parser = parse_pair, conflicts_with = "base")]
    pub pushout: Option<(usize, usize)>,
    /// Read a collection from a JSON file.
    #[arg(long)]
    pub base: Option<PathBuf>,
    #[arg(long, default_value = "c")]
    pub property: Property,
    #[arg(long, default_value_t = 2)]
    pub max_dim: usize,
    #[arg(long, default_value_t = 3)]
    pub max_width: usize,
    /// Read the loop condition as `s0(x) = t0(y)`.
    #[arg(long)]
    pub two_way_loop: bool,
    /// Cell budget for materialization.
    #[arg(long)]
    pub budget: Option<usize>,
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(',').ok_or("expected N,P")?;
    Ok((
        a.trim().parse().map_err(|e| format!("{e}"))?,
        b.trim().parse().map_err(|e| format!("{e}"))?,
    ))
}

#[derive(Debug, Subcommand)]
pub enum OperadCmd {
    /// Materializes the bounded presentation and reports counts.
    Build(BaseArgs),
    /// Parses a term and prints its normal form.
    Normalize {
        #[command(flatten)]
        base: BaseArgs,
        term: String,
    },
    /// Arity, colours, dimension and width of a term.
    Arity {
        #[command(flatten)]
        base: BaseArgs,
        term: String,
    },
    /// Decides equality of two terms (exit 1 when they differ).
    Equal {
        #[command(flatten)]
        base: BaseArgs,
        left: String,
        right: String,
    },
    /// Audits the defining property within bounds (exit 1 on violations).
    Verify(BaseArgs),
    /// Same as the top-level `pushout`.
    Pushout(PushoutArgs),
}

#[derive(Debug, Subcommand)]
pub enum ContractCmd {
    /// Eligible pairs among the stored cells of a dimension.
    Pairs {
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 50)]
        limit: usize,
    },
    /// A cell from `x` to `y` supplied by the property (exit 1 if none).
    Find {
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
}

#[derive(Debug, Clone, Args)]
pub struct PushoutArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: usize,
    #[arg(long, default_value_t = 2)]
    pub max_dim: usize,
}

#[derive(Debug, Clone, Args)]
pub struct EnvArgs {
    #[arg(long, default_value = "c")]
    pub property: Property,
    #[arg(long, default_value_t = 2)]
    pub max_dim: usize,
    #[arg(long, default_value_t = 4)]
    pub max_width: usize,
    #[arg(long, default_value = "left")]
    pub variant: Variant,
}

#[derive(Debug, Subcommand)]
pub enum CoendCmd {
    /// The composition cell over `1(n) ⋆_p 1(n)`.
    Mu {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: usize,
        #[command(flatten)]
        env: EnvArgs,
    },
    /// The cell assigned to a generator of `C^0`.
    Cw {
        name: String,
        #[command(flatten)]
        env: EnvArgs,
    },
    /// The level-1 cell over a 1-tree classifying one of its 1-cells.
    Classify {
        #[arg(long)]
        tree: String,
        #[arg(long)]
        term: String,
        #[command(flatten)]
        env: EnvArgs,
    },
    /// Fills two parallel cells with a contraction cell.
    Lift {
        #[arg(long)]
        minus: PathBuf,
        #[arg(long)]
        plus: PathBuf,
        /// Expected tree of the two cells.
        #[arg(long)]
        tree: Option<String>,
        #[command(flatten)]
        env: EnvArgs,
    },
    /// Source or target cell one level down.
    Boundary {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = BoundaryArg::Source)]
        side: BoundaryArg,
        #[command(flatten)]
        env: EnvArgs,
    },
    /// Checks the serial equations of a cell (exit 1 on violations).
    Check {
        file: PathBuf,
        #[command(flatten)]
        env: EnvArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum ExportCmd {
    /// A tree matrix.
    Tree { tree: String },
    /// The pasting scheme of a tree.
    Scheme { tree: String },
    /// The collection `C^n`.
    Complex {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        max_dim: usize,
    },
    /// A term over a base.
    Term {
        #[command(flatten)]
        base: BaseArgs,
        term: String,
    },
    /// A coendomorphism cell read from JSON.
    Cell {
        file: PathBuf,
        #[command(flatten)]
        env: EnvArgs,
    },
}

/// A failed command, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn invalid(e: impl std::fmt::Display) -> Failure {
        Failure {
            code: 2,
            message: e.to_string(),
        }
    }

    fn verification(msg: impl Into<String>) -> Failure {
        Failure {
            code: 1,
            message: msg.into(),
        }
    }
}

type Outcome = Result<String, Failure>;

/// Runs one invocation, writing results to `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return if code == 0 { 0 } else { 2 };
        }
    };
    let cache = if cli.no_cache {
        None
    } else {
        Some(cli.cache_dir.clone().unwrap_or_else(|| {
            std::env::var_os("GLOBOP_CACHE")
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from(".globop-cache"))
        }))
    };
    match dispatch(cli.command, cache.as_deref()) {
        Ok(text) => {
            let _ = out.write_all(text.as_bytes());
            0
        }
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn pretty<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

fn tree_arg(s: &str) -> Result<Tree, Failure> {
    let trimmed = s.trim_start();
    if trimmed.starts_with('{') {
        let m: TreeMatrix = serde_json::from_str(trimmed).map_err(Failure::invalid)?;
        return Tree::from_matrix(&m).map_err(Failure::invalid);
    }
    parse_tree(s).map_err(Failure::invalid)
}

fn read_file(p: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(p).map_err(|e| Failure::invalid(format!("{}: {e}", p.display())))
}

fn collection_of(b: &BaseArgs) -> Result<PointedCollection, Failure> {
    if let Some(n) = b.complex {
        return Ok(build_complex(n, b.max_dim));
    }
    if let Some((n, p)) = b.pushout {
        if p >= n {
            return Err(Failure::invalid("pushout needs p < n"));
        }
        return Ok(binary_complex_pushout(n, p, b.max_dim)
            .map_err(Failure::invalid)?
            .collection);
    }
    if let Some(path) = &b.base {
        let raw: RawCollection =
            serde_json::from_str(&read_file(path)?).map_err(Failure::invalid)?;
        return PointedCollection::validate(raw).map_err(Failure::invalid);
    }
    Ok(build_complex(0, b.max_dim))
}

fn operad_of(b: &BaseArgs) -> Result<Operad, Failure> {
    let base = collection_of(b)?;
    let mut op = Operad::new(&base, b.property, b.max_dim, b.max_width);
    if b.two_way_loop {
        op = op.with_loop_mode(LoopMode::TwoWay);
    }
    if let Some(budget) = b.budget {
        op = op.with_budget(budget);
    }
    Ok(op)
}

fn cache_key(b: &BaseArgs, what: &str, extra: Value) -> Result<String, Failure> {
    let base = collection_of(b)?;
    let key = json!({
        "what": what,
        "base": base.raw(),
        "property": b.property.to_string(),
        "max_dim": b.max_dim,
        "max_width": b.max_width,
        "two_way_loop": b.two_way_loop,
        "extra": extra,
    });
    Ok(hex::encode(Sha256::digest(
        serde_json::to_vec(&key).expect("serializable"),
    )))
}

/// Reads a cached result or computes and stores it.
fn cached(
    cache: Option<&Path>,
    key: &str,
    compute: impl FnOnce() -> Result<Value, Failure>,
) -> Result<Value, Failure> {
    let path = cache.map(|d| d.join(format!("{key}.json")));
    if let Some(p) = &path {
        if let Ok(text) = std::fs::read_to_string(p) {
            if let Ok(v) = serde_json::from_str(&text) {
                return Ok(v);
            }
        }
    }
    let v = compute()?;
    if let (Some(p), Some(dir)) = (&path, cache) {
        if std::fs::create_dir_all(dir).is_ok() {
            let _ = std::fs::write(p, pretty(&v));
        }
    }
    Ok(v)
}

fn materialized(b: &BaseArgs) -> Result<Operad, Failure> {
    let mut op = operad_of(b)?;
    crate::contraction::materialize(&mut op).map_err(Failure::invalid)?;
    Ok(op)
}

fn env_of(e: &EnvArgs) -> CoendEnv {
    CoendEnv::new(e.property, e.max_dim, e.max_width).with_variant(e.variant)
}

fn read_cell(env: &mut CoendEnv, path: &Path) -> Result<CoendCell, Failure> {
    let j: CoendCellJson = serde_json::from_str(&read_file(path)?).map_err(Failure::invalid)?;
    cell_from_json(env, &j).map_err(Failure::invalid)
}

fn cell_json(env: &mut CoendEnv, c: &CoendCell) -> Outcome {
    Ok(pretty(&cell_to_json(env, c).map_err(Failure::invalid)?))
}

fn term_summary(op: &Operad, t: TermId) -> Value {
    let i = op.info(t);
    json!({
        "term": op.print(t),
        "dim": i.dim,
        "width": i.width,
        "arity": i.arity.matrix(),
        "source_colour": op.colour_name(i.in_colour),
        "output_colour": op.colour_name(i.out_colour),
    })
}

fn dispatch(cmd: Command, cache: Option<&Path>) -> Outcome {
    match cmd {
        Command::Tree { cmd } => tree_cmd(cmd),
        Command::Complex { cmd } => complex_cmd(cmd),
        Command::Operad { cmd } => operad_cmd(cmd, cache),
        Command::Contract { cmd } => contract_cmd(cmd, cache),
        Command::Pushout(a) => pushout_cmd(&a),
        Command::Coend { cmd } => coend_cmd(cmd),
        Command::VerifyExample { name } => verify_example(&name),
        Command::Export { what, format } => export_cmd(what, format),
    }
}

fn tree_cmd(cmd: TreeCmd) -> Outcome {
    match cmd {
        TreeCmd::Parse { tree, format } => {
            let t = tree_arg(&tree)?;
            Ok(match format {
                Format::Json => pretty(&t.matrix()),
                Format::Dot => scheme_dot(&pasting_scheme(&t)),
                Format::Text => format!("{}\n", t.matrix()),
            })
        }
        TreeCmd::Star { left, right, level } => {
            let t = tree_arg(&left)?
                .star(&tree_arg(&right)?, level)
                .map_err(Failure::invalid)?;
            Ok(format!("{}\n", t.matrix()))
        }
        TreeCmd::Decompose { tree } => {
            let d = tree_arg(&tree)?.decompose();
            let factors: Vec<TreeMatrix> = d.factors.iter().map(Tree::matrix).collect();
            Ok(pretty(
                &json!({ "factors": factors, "junctions": d.junctions }),
            ))
        }
        TreeCmd::Truncate { tree, levels } => {
            let t = tree_arg(&tree)?
                .truncate(levels)
                .map_err(Failure::invalid)?;
            Ok(format!("{}\n", t.matrix()))
        }
        TreeCmd::Enumerate { dim, max_leaves } => Ok(enumerate_trees(dim, max_leaves)
            .iter()
            .map(|t| format!("{}\n", t.matrix()))
            .collect()),
        TreeCmd::Scheme { tree } => {
            let g = pasting_scheme(&tree_arg(&tree)?);
            Ok(pretty(
                &json!({ "counts": g.counts(), "scheme": g.to_raw() }),
            ))
        }
    }
}

fn complex_cmd(cmd: ComplexCmd) -> Outcome {
    match cmd {
        ComplexCmd::Emit { n, max_dim } => Ok(pretty(build_complex(n, max_dim).raw())),
        ComplexCmd::Coface { n, side, max_dim } => {
            let side = if side == SideArg::Delta {
                Coface::Delta
            } else {
                Coface::Kappa
            };
            Ok(pretty(&coface(n, side, max_dim)))
        }
        ComplexCmd::Counts { n, max_dim } => Ok(pretty(&build_complex(n, max_dim).counts())),
    }
}

fn pushout_cmd(a: &PushoutArgs) -> Outcome {
    if a.p >= a.n {
        return Err(Failure::invalid("pushout needs p < n"));
    }
    let po = binary_complex_pushout(a.n, a.p, a.max_dim).map_err(Failure::invalid)?;
    Ok(pretty(
        &json!({ "collection": po.collection.raw(), "injections": po.injections }),
    ))
}

fn operad_cmd(cmd: OperadCmd, cache: Option<&Path>) -> Outcome {
    match cmd {
        OperadCmd::Build(b) => {
            let key = cache_key(&b, "build", Value::Null)?;
            let v = cached(cache, &key, || {
                let op = materialized(&b)?;
                let classes: Vec<usize> = (0..=b.max_dim)
                    .map(|d| classes_of_dim(&op, d).len())
                    .collect();
                Ok(json!({
                    "property": b.property.to_string(),
                    "max_dim": b.max_dim,
                    "max_width": b.max_width,
                    "cells": op.cell_counts(),
                    "classes": classes,
                    "generators": op.gen_count(),
                }))
            })?;
            Ok(pretty(&v))
        }
        OperadCmd::Normalize { base, term } => {
            let mut op = operad_of(&base)?;
            let t = op.parse(&term).map_err(Failure::invalid)?;
            Ok(format!("{}\n", op.print(t)))
        }
        OperadCmd::Arity { base, term } => {
            let mut op = operad_of(&base)?;
            let t = op.parse(&term).map_err(Failure::invalid)?;
            Ok(pretty(&term_summary(&op, t)))
        }
        OperadCmd::Equal { base, left, right } => {
            let strict = base.property.is_strict();
            let mut op = if strict {
                materialized(&base)?
            } else {
                operad_of(&base)?
            };
            let a = op.parse(&left).map_err(Failure::invalid)?;
            let b = op.parse(&right).map_err(Failure::invalid)?;
            if op.equal_terms(a, b).map_err(Failure::invalid)? {
                Ok("equal\n".into())
            } else {
                Err(Failure::verification("terms differ"))
            }
        }
        OperadCmd::Verify(b) => {
            let key = cache_key(&b, "verify", Value::Null)?;
            let v = cached(cache, &key, || {
                let mut op = materialized(&b)?;
                let audit = verify_property(&mut op).map_err(Failure::invalid)?;
                Ok(serde_json::to_value(audit).expect("serializable"))
            })?;
            let text = pretty(&v);
            if v["violations"].as_array().is_some_and(|a| !a.is_empty()) {
                Err(Failure::verification(text))
            } else {
                Ok(text)
            }
        }
        OperadCmd::Pushout(a) => pushout_cmd(&a),
    }
}

fn contract_cmd(cmd: ContractCmd, cache: Option<&Path>) -> Outcome {
    match cmd {
        ContractCmd::Pairs { base, dim, limit } => {
            let key = cache_key(&base, "pairs", json!({ "dim": dim, "limit": limit }))?;
            let v = cached(cache, &key, || {
                let op = materialized(&base)?;
                if dim > op.max_dim() {
                    return Err(Failure::invalid(format!("dimension {dim} beyond bound")));
                }
                let pairs = eligible_pairs(&op, dim).map_err(Failure::invalid)?;
                let shown: Vec<Value> = pairs
                    .iter()
                    .take(limit)
                    .map(|p| {
                        json!({
                            "x": op.print(p.x),
                            "y": op.print(p.y),
                            "root": p.is_root_pair,
                            "loop": p.has_loop,
                            "same_factor": p.same_factor,
                        })
                    })
                    .collect();
                Ok(json!({ "dim": dim, "total": pairs.len(), "pairs": shown }))
            })?;
            Ok(pretty(&v))
        }
        ContractCmd::Find { base, x, y } => {
            let mut op = operad_of(&base)?;
            let x = op.parse(&x).map_err(Failure::invalid)?;
            let y = op.parse(&y).map_err(Failure::invalid)?;
            match find_contraction(&mut op, x, y) {
                Ok(Some(c)) => Ok(pretty(&term_summary(&op, c))),
                Ok(None) => Err(Failure::verification("no contraction cell for this pair")),
                Err(e) => Err(Failure::verification(e.to_string())),
            }
        }
    }
}

fn coend_cmd(cmd: CoendCmd) -> Outcome {
    match cmd {
        CoendCmd::Mu { n, p, env } => {
            let mut e = env_of(&env);
            let c = make_mu(&mut e, n, p, env.variant).map_err(Failure::invalid)?;
            cell_json(&mut e, &c)
        }
        CoendCmd::Cw { name, env } => {
            let mut e = env_of(&env);
            let c = cw_image(&mut e, &name).map_err(Failure::invalid)?;
            cell_json(&mut e, &c)
        }
        CoendCmd::Classify { tree, term, env } => {
            let mut e = env_of(&env);
            let t = tree_arg(&tree)?;
            let op = &mut e.tree_operad(&t).map_err(Failure::invalid)?.operad;
            let x = op.parse(&term).map_err(Failure::invalid)?;
            let c = classifying_cell(&mut e, &t, x).map_err(Failure::invalid)?;
            cell_json(&mut e, &c)
        }
        CoendCmd::Lift {
            minus,
            plus,
            tree,
            env,
        } => {
            let mut e = env_of(&env);
            let m = read_cell(&mut e, &minus)?;
            let p = read_cell(&mut e, &plus)?;
            if let Some(t) = tree {
                let t = tree_arg(&t)?;
                if m.tree != t || p.tree != t {
                    return Err(Failure::invalid("cells are not over the given tree"));
                }
            }
            match lift_contraction(&mut e, &m, &p) {
                Ok(c) => cell_json(&mut e, &c),
                Err(err @ crate::coend::CoendError::ContractionUnavailable(_)) => {
                    Err(Failure::verification(err.to_string()))
                }
                Err(err) => Err(Failure::invalid(err)),
            }
        }
        CoendCmd::Boundary { file, side, env } => {
            let mut e = env_of(&env);
            let c = read_cell(&mut e, &file)?;
            let side = if side == BoundaryArg::Source {
                Side::Source
            } else {
                Side::Target
            };
            let b = coend_boundary(&c, side).map_err(Failure::invalid)?;
            cell_json(&mut e, &b)
        }
        CoendCmd::Check { file, env } => {
            let mut e = env_of(&env);
            let c = read_cell(&mut e, &file)?;
            let v = check_serial(&mut e, &c).map_err(Failure::invalid)?;
            let text = pretty(&v);
            if v.is_empty() {
                Ok(text)
            } else {
                Err(Failure::verification(text))
            }
        }
    }
}

/// Steps of the pushout example: `(label, passed, detail)`.
pub fn example_certificate() -> Vec<(String, bool, String)> {
    const X: &str = "gamma(gamma(F1; gamma(mu(1,0); u1 *[1,0] mu(1,0))); F1 *[1,0] F1 *[1,0] F1)";
    const Y: &str = "gamma(gamma(F1; gamma(mu(1,0); mu(1,0) *[1,0] u1)); F1 *[1,0] F1 *[1,0] F1)";
    const CELL: &str = "gamma([gamma(F1; gamma(mu(1,0); u1 *[1,0] mu(1,0))); gamma(F1; gamma(mu(1,0); mu(1,0) *[1,0] u1))]; r[1,2](F1) *[2,0] r[1,2](F1) *[2,0] r[1,2](F1))";
    let mut steps = Vec::new();
    let mut step = |label: &str, r: Result<String, String>| {
        let ok = r.is_ok();
        steps.push((label.to_string(), ok, r.unwrap_or_else(|e| e)));
        ok
    };
    let mut env = CoendEnv::new(Property::C, 2, 4);
    let t = Tree::linear(1).star(&Tree::linear(1), 0).expect("gluable");
    let mut parsed = None;
    let ok = step(
        "pushout and terms",
        (|| {
            let op = &mut env.tree_operad(&t).map_err(|e| e.to_string())?.operad;
            let x = op.parse(X).map_err(|e| e.to_string())?;
            let y = op.parse(Y).map_err(|e| e.to_string())?;
            parsed = Some((x, y));
            Ok(format!("{} colours", op.colours().len()))
        })(),
    );
    if !ok {
        return steps;
    }
    let (x, y) = parsed.unwrap();
    let op = &mut env.tree_operad(&t).expect("built").operad;
    let arity = TreeMatrix::new(1, &[1, 1, 1], &[0, 0]);
    step("arity and colours", {
        let (ax, ay) = (op.info(x).clone(), op.info(y).clone());
        if ax.arity.matrix() == arity
            && ay.arity == ax.arity
            && op.colour_name(ax.in_colour) == "1"
            && op.out_colour(x) == "3"
            && op.out_colour(y) == "3"
        {
            Ok(format!("{} from 1 to 3", arity))
        } else {
            Err(format!(
                "got {} and {}",
                ax.arity.matrix(),
                ay.arity.matrix()
            ))
        }
    });
    step(
        "parallel",
        if op.is_parallel(x, y) {
            Ok("x || y".into())
        } else {
            Err("not parallel".into())
        },
    );
    let cell = op.parse(CELL);
    let cell_ok = step(
        "coherence cell",
        match &cell {
            Ok(c) => {
                let s = op.term_boundary(*c, Side::Source).ok();
                let g = op.term_boundary(*c, Side::Target).ok();
                let deg = Tree::from_matrix(&arity).and_then(|a| a.degenerate(2)).ok();
                if s == Some(x) && g == Some(y) && Some(op.info(*c).arity.clone()) == deg {
                    Ok(op.print(*c))
                } else {
                    Err("boundaries or arity differ".into())
                }
            }
            Err(e) => Err(e.to_string()),
        },
    );
    if !cell_ok {
        return steps;
    }
    let cell = cell.unwrap();
    step(
        "contraction search",
        match find_contraction(op, x, y) {
            Ok(Some(c)) if c == cell => Ok("found the same cell".into()),
            Ok(Some(c)) => Err(format!("found {}", op.print(c))),
            Ok(None) => Err("none".into()),
            Err(e) => Err(e.to_string()),
        },
    );
    step(
        "lifted coendomorphism cell",
        (|| {
            let cx = classifying_cell(&mut env, &t, x).map_err(|e| e.to_string())?;
            let cy = classifying_cell(&mut env, &t, y).map_err(|e| e.to_string())?;
            let lift = lift_contraction(&mut env, &cx, &cy).map_err(|e| e.to_string())?;
            let v = check_serial(&mut env, &lift).map_err(|e| e.to_string())?;
            if !v.is_empty() {
                return Err(format!("{} serial violations", v.len()));
            }
            let w = env
                .source_operad(&lift.source, 2)
                .map_err(|e| e.to_string())?
                .clone();
            let top = w.base_gen("e^").ok_or("missing top generator")?;
            if lift.top().images.get(&top) == Some(&cell) {
                Ok("serial, principal image is the coherence cell".into())
            } else {
                Err("principal image differs".into())
            }
        })(),
    );
    steps
}

fn verify_example(name: &str) -> Outcome {
    if name != "3-3" {
        return Err(Failure::invalid(format!("unknown example {name}")));
    }
    let steps = example_certificate();
    let mut text = String::new();
    for (label, ok, detail) in &steps {
        let _ = writeln!(
            text,
            "{} {label}: {detail}",
            if *ok { "PASS" } else { "FAIL" }
        );
    }
    let all = steps.len() == 6 && steps.iter().all(|s| s.1);
    let _ = writeln!(text, "certificate: {}", if all { "pass" } else { "fail" });
    if all {
        Ok(text)
    } else {
        Err(Failure::verification(text))
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Cells as nodes, with edges to their source and target.
pub fn scheme_dot(g: &GlobularSet) -> String {
    let mut s = String::from("digraph scheme {\n  rankdir=LR;\n");
    for c in g.cells() {
        let shape = ["circle", "box", "box3d"]
            .get(c.dim)
            .copied()
            .unwrap_or("octagon");
        let _ = writeln!(
            s,
            "  {} [label={}, shape={shape}];",
            quote(&c.id),
            quote(&format!("{} ({})", c.id, c.dim))
        );
    }
    for c in g.cells() {
        for (b, l) in [(&c.src, "s"), (&c.tgt, "t")] {
            if let Some(b) = b {
                let _ = writeln!(s, "  {} -> {} [label={l}];", quote(&c.id), quote(b));
            }
        }
    }
    s.push_str("}\n");
    s
}

/// Generators as nodes labelled by arity and colours, with boundary edges.
pub fn collection_dot(c: &PointedCollection) -> String {
    let mut s = String::from("digraph collection {\n  rankdir=LR;\n");
    for cell in c.cells() {
        let label = format!(
            "{}\\n{} : {} -> {}",
            cell.name,
            cell.arity.tree.matrix(),
            cell.arity.colour,
            cell.colour
        );
        let _ = writeln!(
            s,
            "  {} [label=\"{}\", shape=box];",
            quote(&cell.name),
            label.replace('"', "\\\"")
        );
    }
    for cell in c.cells() {
        for (b, l) in [(&cell.src, "s"), (&cell.tgt, "t")] {
            if let Some(b) = b {
                let _ = writeln!(s, "  {} -> {} [label={l}];", quote(&cell.name), quote(b));
            }
        }
    }
    s.push_str("}\n");
    s
}

fn export_cmd(what: ExportCmd, format: Format) -> Outcome {
    match what {
        ExportCmd::Tree { tree } => {
            let t = tree_arg(&tree)?;
            Ok(match format {
                Format::Dot => scheme_dot(&pasting_scheme(&t)),
                Format::Text => format!("{}\n", t.matrix()),
                Format::Json => pretty(&t.matrix()),
            })
        }
        ExportCmd::Scheme { tree } => {
            let g = pasting_scheme(&tree_arg(&tree)?);
            Ok(match format {
                Format::Dot => scheme_dot(&g),
                _ => pretty(&g.to_raw()),
            })
        }
        ExportCmd::Complex { n, max_dim } => {
            let c = build_complex(n, max_dim);
            Ok(match format {
                Format::Dot => collection_dot(&c),
                _ => pretty(c.raw()),
            })
        }
        ExportCmd::Term { base, term } => {
            let mut op = operad_of(&base)?;
            let t = op.parse(&term).map_err(Failure::invalid)?;
            Ok(match format {
                Format::Text => format!("{}\n", op.print(t)),
                Format::Dot => {
                    let shape = op.info(t).arity.clone();
                    scheme_dot(&pasting_scheme(&shape))
                }
                Format::Json => pretty(&op.to_json(t)),
            })
        }
        ExportCmd::Cell { file, env } => {
            let mut e = env_of(&env);
            let c = read_cell(&mut e, &file)?;
            match format {
                Format::Dot => {
                    let op = &e.tree_operad(&c.tree).map_err(Failure::invalid)?.operad;
                    Ok(collection_dot(op.base()))
                }
                _ => cell_json(&mut e, &c),
            }
        }
    }
}
