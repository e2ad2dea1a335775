//! Command-line front end: load named set definitions, run the engine
//! operations, and emit one JSON document per invocation on stdout with a
//! human-readable summary on stderr.
//!
//! Exit codes: 0 success, 1 verification failure, 2 parse error, 3 semantic
//! error.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use omincell_core::almost_core::{
    self, multicell_partition, representative_set, structure_axiom_suite, uniform_bound,
    uniform_decomposition, verify_multicell_window, verify_uniform_decomposition,
    window_component_bound, VerificationReport,
};
use omincell_core::cell_decomp::{
    connected_components, decompose_box, path_connect, BoxN,
};
use omincell_core::def_sets::{
    self, compile, fiber_prefix, finite_union_in_interval, snf_to_text, OneDOutcome, SNFSet,
};
use omincell_core::lin_core::{
    parse_def_file, print_formula, rat, Formula, Int, Rat, VarOrder,
};
use omincell_core::qe_engine::{classify, qe_linear, qe_presburger, Sort};
use omincell_core::topology::{
    bounded_reduct, closure, curve_select, dimension, frontier, interior, segment_set, DimValue,
};

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

#[derive(Parser)]
#[command(
    name = "omincell",
    version,
    about = "Exact engine for piecewise-linear definable sets over the reals \
             with an integer predicate"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Definition file with `set NAME(vars) := formula;` items.
    #[arg(short = 'f', long = "file")]
    file: Option<PathBuf>,
    /// Name of a set from the definition file.
    #[arg(short = 's', long = "set")]
    set: Option<String>,
    /// Bounding box as comma-separated lo,hi pairs, one pair per coordinate.
    #[arg(long = "box", value_name = "LO,HI,..", allow_hyphen_values = true)]
    bbox: Option<String>,
    /// Window radius (rational).
    #[arg(long = "R", value_name = "RAT", allow_hyphen_values = true)]
    radius: Option<String>,
    /// Parameter arity.
    #[arg(long = "m")]
    m: Option<usize>,
    /// Window arity, or coordinate count for `project`.
    #[arg(long = "n")]
    n: Option<usize>,
    /// Comma-separated set names.
    #[arg(long = "family", value_name = "NAME[,NAME..]")]
    family: Option<String>,
    /// Verification window radius (rational).
    #[arg(long = "window", value_name = "RAT", allow_hyphen_values = true)]
    window: Option<String>,
    /// Seed for randomized verification sampling.
    #[arg(long = "seed", default_value_t = 0)]
    seed: u64,
    /// Sample count for randomized verification.
    #[arg(long = "samples")]
    samples: Option<usize>,
    /// Run the operation's verification pass.
    #[arg(long = "verify", default_value_t = false)]
    verify: bool,
    /// Output path (SVG for `plot`).
    #[arg(long = "out")]
    out: Option<PathBuf>,
    /// A point as comma-separated rationals.
    #[arg(long = "point", value_name = "Q,..", allow_hyphen_values = true)]
    point: Option<String>,
    /// Path start point.
    #[arg(long = "from", value_name = "Q,..", allow_hyphen_values = true)]
    from: Option<String>,
    /// Path end point.
    #[arg(long = "to", value_name = "Q,..", allow_hyphen_values = true)]
    to: Option<String>,
    /// Boolean operation: union, intersect, difference, or complement.
    #[arg(long = "op")]
    op: Option<String>,
}

macro_rules! subcommands {
    ($($(#[doc = $doc:expr])* $name:ident),* $(,)?) => {
        #[derive(Subcommand)]
        enum Cmd {
            $($(#[doc = $doc])* $name {
                #[command(flatten)]
                c: Common,
            },)*
        }

        impl Cmd {
            fn common(&self) -> &Common {
                match self { $(Cmd::$name { c } => c,)* }
            }
            fn name(&self) -> &'static str {
                match self {
                    $(Cmd::$name { .. } => {
                        const N: &str = stringify!($name);
                        // Lowercased at the call site; names are ASCII.
                        N
                    })*
                }
            }
        }
    };
}

subcommands! {
    /// Parse a named formula and echo its normalized form.
    Parse,
    /// Eliminate quantifiers from a pure-real or pure-integer formula.
    Qe,
    /// Compile a formula to split normal form.
    Compile,
    /// Boolean set algebra on named sets (--op, --family).
    Bool,
    /// Drop trailing coordinates (existential projection).
    Project,
    /// Membership test of a point.
    Member,
    /// Topological dimension.
    Dim,
    /// Topological interior.
    Interior,
    /// Topological closure.
    Closure,
    /// Frontier: closure minus the set.
    Frontier,
    /// Integer-predicate-free description of the set inside a box.
    Reduct,
    /// Straight curve germ inside the set approaching a frontier point.
    Curve,
    /// Cell decomposition of a box adapted to a family of sets.
    Decompose,
    /// Connected components of the set inside a box.
    Components,
    /// Piecewise-linear path between two points of the set inside a box.
    Path,
    /// One-variable split into discrete part, interval endpoints, open part.
    Analyze1d,
    /// One-variable dichotomy: finite union or unbounded discrete witness.
    Dichotomy,
    /// Partition into multi-cells.
    Multicell,
    /// Representative points of the connected components.
    Repset,
    /// Uniform bound on fiber component counts in a window.
    Ubound,
    /// Uniform parametric cell decomposition of a window.
    Ucd,
    /// Component bound over all window translates.
    Wbound,
    /// Run the structural axiom suite.
    Axioms,
    /// Render the set inside a box as an SVG (arity 1 or 2).
    Plot,
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum CliError {
    Parse(String),
    Semantic(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::Semantic(_) => 3,
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Parse(m) | CliError::Semantic(m) => m,
        }
    }
}

macro_rules! semantic_from {
    ($($t:ty),*) => {
        $(impl From<$t> for CliError {
            fn from(e: $t) -> CliError {
                CliError::Semantic(e.to_string())
            }
        })*
    };
}

semantic_from!(
    omincell_core::def_sets::SetError,
    omincell_core::cell_decomp::CellError,
    omincell_core::topology::TopoError,
    omincell_core::qe_engine::QeError,
    omincell_core::almost_core::AlmostError
);

impl From<omincell_core::lin_core::ParseError> for CliError {
    fn from(e: omincell_core::lin_core::ParseError) -> CliError {
        CliError::Parse(e.to_string())
    }
}

// ---------------------------------------------------------------------------
// Input plumbing
// ---------------------------------------------------------------------------

struct Workspace {
    defs: BTreeMap<String, (VarOrder, Formula)>,
}

impl Workspace {
    fn load(c: &Common) -> Result<Workspace, CliError> {
        let mut defs = BTreeMap::new();
        if let Some(path) = &c.file {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Semantic(format!("cannot read {}: {e}", path.display()))
            })?;
            for d in parse_def_file(&text)? {
                defs.insert(d.name.clone(), (d.order, d.formula));
            }
        }
        Ok(Workspace { defs })
    }

    fn def(&self, name: &str) -> Result<&(VarOrder, Formula), CliError> {
        self.defs
            .get(name)
            .ok_or_else(|| CliError::Semantic(format!("no set named {name}")))
    }

    fn set(&self, name: &str) -> Result<SNFSet, CliError> {
        let (o, f) = self.def(name)?;
        Ok(compile(f, o)?)
    }
}

fn named(c: &Common) -> Result<String, CliError> {
    c.set
        .clone()
        .ok_or_else(|| CliError::Semantic("missing -s NAME".into()))
}

fn family_names(c: &Common) -> Result<Vec<String>, CliError> {
    let f = c
        .family
        .as_ref()
        .ok_or_else(|| CliError::Semantic("missing --family".into()))?;
    Ok(f.split(',').map(|s| s.trim().to_string()).collect())
}

fn parse_rat(s: &str) -> Result<Rat, CliError> {
    let s = s.trim();
    let bad = || CliError::Parse(format!("bad rational: {s}"));
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: Int = num.trim().parse().map_err(|_| bad())?;
    let d: Int = den.trim().parse().map_err(|_| bad())?;
    if d == Int::from(0) {
        return Err(bad());
    }
    Ok(Rat::new(n, d))
}

fn parse_rats(s: &str) -> Result<Vec<Rat>, CliError> {
    s.split(',').map(parse_rat).collect()
}

fn parse_box(c: &Common, arity: usize) -> Result<BoxN, CliError> {
    let s = c
        .bbox
        .as_ref()
        .ok_or_else(|| CliError::Semantic("missing --box".into()))?;
    let vals = parse_rats(s)?;
    if vals.len() % 2 != 0 {
        return Err(CliError::Parse("--box needs lo,hi pairs".into()));
    }
    let bbox: BoxN = vals.chunks(2).map(|p| (p[0].clone(), p[1].clone())).collect();
    let bbox = if bbox.len() == 1 && arity > 1 {
        vec![bbox[0].clone(); arity]
    } else {
        bbox
    };
    if bbox.len() != arity {
        return Err(CliError::Semantic(format!(
            "--box has {} coordinates, the set has {arity}",
            bbox.len()
        )));
    }
    for (lo, hi) in &bbox {
        if lo >= hi {
            return Err(CliError::Semantic(format!("empty box side ({lo}, {hi})")));
        }
    }
    Ok(bbox)
}

fn point_arg(c: &Common, field: &Option<String>, what: &str, arity: usize) -> Result<Vec<Rat>, CliError> {
    let _ = c;
    let s = field
        .as_ref()
        .ok_or_else(|| CliError::Semantic(format!("missing {what}")))?;
    let p = parse_rats(s)?;
    if p.len() != arity {
        return Err(CliError::Semantic(format!(
            "{what} has {} coordinates, the set has {arity}",
            p.len()
        )));
    }
    Ok(p)
}

fn radius(c: &Common) -> Result<Rat, CliError> {
    let s = c
        .radius
        .as_ref()
        .ok_or_else(|| CliError::Semantic("missing --R".into()))?;
    let r = parse_rat(s)?;
    if r <= rat(0) {
        return Err(CliError::Semantic("--R must be positive".into()));
    }
    Ok(r)
}

// ---------------------------------------------------------------------------
// JSON helpers
// ---------------------------------------------------------------------------

fn rat_json(r: &Rat) -> Value {
    Value::String(r.to_string())
}

fn rats_json(p: &[Rat]) -> Value {
    Value::Array(p.iter().map(rat_json).collect())
}

fn set_json(x: &SNFSet) -> Value {
    json!({
        "arity": x.arity,
        "pieces": x.pieces.len(),
        "snf": snf_to_text(x),
    })
}

fn report_json(rep: &VerificationReport) -> Value {
    json!({
        "pass": rep.pass,
        "checks": rep.checks,
        "failures": rep.failures,
    })
}

fn dim_json(d: &DimValue) -> Value {
    match d.as_i64() {
        Some(v) => json!(v),
        None => json!("-inf"),
    }
}

/// Deterministic sample stream for verification passes (splitmix64).
struct Stream(u64);

impl Stream {
    fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    }

    fn small_rat(&mut self) -> Rat {
        let n = (self.next_u64() % 33) as i64 - 16;
        let d = (self.next_u64() % 4) as i64 + 1;
        Rat::new(n.into(), d.into())
    }
}

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

struct Output {
    inputs: Value,
    result: Value,
    verification: Option<VerificationReport>,
    summary: String,
}

fn main() {
    let cli = Cli::parse();
    let t0 = Instant::now();
    let name = cli.cmd.name().to_ascii_lowercase();
    match run(&cli.cmd) {
        Ok(out) => {
            let mut doc = json!({
                "command": name,
                "inputs": out.inputs,
                "result": out.result,
                "timing_ms": t0.elapsed().as_millis() as u64,
            });
            if let Some(rep) = &out.verification {
                doc["verification"] = report_json(rep);
            }
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
            eprintln!("{}", out.summary);
            if let Some(rep) = &out.verification {
                if !rep.pass {
                    eprintln!("verification FAILED ({} issues)", rep.failures.len());
                    std::process::exit(1);
                }
                eprintln!("verification PASS ({} checks)", rep.checks);
            }
        }
        Err(e) => {
            let doc = json!({
                "command": name,
                "error": e.message(),
                "timing_ms": t0.elapsed().as_millis() as u64,
            });
            println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
            eprintln!("error: {}", e.message());
            std::process::exit(e.code());
        }
    }
}

fn run(cmd: &Cmd) -> Result<Output, CliError> {
    let c = cmd.common();
    let ws = Workspace::load(c)?;
    match cmd {
        Cmd::Parse { .. } => cmd_parse(&ws, c),
        Cmd::Qe { .. } => cmd_qe(&ws, c),
        Cmd::Compile { .. } => cmd_compile(&ws, c),
        Cmd::Bool { .. } => cmd_bool(&ws, c),
        Cmd::Project { .. } => cmd_project(&ws, c),
        Cmd::Member { .. } => cmd_member(&ws, c),
        Cmd::Dim { .. } => cmd_dim(&ws, c),
        Cmd::Interior { .. } => cmd_topo(&ws, c, "interior"),
        Cmd::Closure { .. } => cmd_topo(&ws, c, "closure"),
        Cmd::Frontier { .. } => cmd_topo(&ws, c, "frontier"),
        Cmd::Reduct { .. } => cmd_reduct(&ws, c),
        Cmd::Curve { .. } => cmd_curve(&ws, c),
        Cmd::Decompose { .. } => cmd_decompose(&ws, c),
        Cmd::Components { .. } => cmd_components(&ws, c),
        Cmd::Path { .. } => cmd_path(&ws, c),
        Cmd::Analyze1d { .. } => cmd_analyze1d(&ws, c),
        Cmd::Dichotomy { .. } => cmd_dichotomy(&ws, c),
        Cmd::Multicell { .. } => cmd_multicell(&ws, c),
        Cmd::Repset { .. } => cmd_repset(&ws, c),
        Cmd::Ubound { .. } => cmd_ubound(&ws, c),
        Cmd::Ucd { .. } => cmd_ucd(&ws, c),
        Cmd::Wbound { .. } => cmd_wbound(&ws, c),
        Cmd::Axioms { .. } => cmd_axioms(c),
        Cmd::Plot { .. } => cmd_plot(&ws, c),
    }
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn cmd_parse(ws: &Workspace, c: &Common) -> Result<Output, CliError> {
    let name = named(c)?;
    let (o, f) = ws.def(&name)?;
    let printed = print_formula(f);
    Ok(Output {
        inputs: json!({"set": name}),
        result: json!({
            "vars": o.names(),
            "formula": printed,
            "quantifier_free": !f.has_quantifier(),
        }),
        verification: None,
        summary: format!("{name}({}) := {printed}", o.names().join(", ")),
    })
}

fn cmd_qe(ws: &Workspace, c: &Common) -> Result<Output, CliError> {
    let name = named(c)?;
    let (o, f) = ws.def(&name)?;
    let sort = classify(f)?;
    let g = match sort {
        Sort::Real => qe_linear(f, o)?,
        Sort::Integer => qe_presburger(f, o)?,
    };
    let verification = if c.verify {
        let mut rep = VerificationReport::default();
        rep.checks = 1;
        let a = compile(f, o)?;
        let b = compile(&g, o)?;
        if !def_sets::equal(&a, &b)? {
            rep.fail("eliminated formula differs from the input as a set".into());
        }
        Some(rep)
    } else {
        None
    };
    let printed = print_formula(&g);
    Ok(Output {
        inputs: json!({"set": name, "sort": format!("{sort:?}")}),
        result: json!({"formula": printed, "quantifier_free": !g.has_quantifier()}),
        verification,
        summary: format!("qe({name}) = {printed}"),
    })
}

fn cmd_compile(ws: &Workspace, c: &Common) -> Result<Output, CliError> {
    let name = named(c)?;
    let (o, f) = ws.def(&name)?;
    let x = compile(f, o)?;
    let verification = if c.verify {
        let mut rep = VerificationReport::default();
        let mut s = Stream(c.seed);
        let samples = c.samples.unwrap_or(50);
        for _ in 0..samples {
            rep.checks += 1;
            let p: Vec<Rat> = (0..x.arity).map(|_| s.small_rat()).collect();
            let mut sub = f.clone();
            for (i, v) in p.iter().enumerate() {
                sub = sub.substitute(
                    o.name(i),
                    &omincell_core::lin_core::LinTerm::constant(v.clone()),
                    o,
                );
            }
            let want = def_sets::decide_sentence(&sub)?;
            if x.member(&p) != want {
                rep.fail(format!(
                    "membership mismatch at ({})",
                    p.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", ")
                ));
            }
        }
        Some(rep)
    } else {
        None
    };
    Ok(Output {
        inputs: json!({"set": name}),
        result: set_json(&x),
        verification,
        summary: format!("{name}: arity {}, {} pieces", x.arity, x.pieces.len()),
    })
}

fn cmd_bool(ws: &Workspace, c: &Common) -> Result<Output, CliError> {
    let op = c
        .op
        .as_deref()
        .ok_or_else(|| CliError::Semantic("missing --op".into()))?;
    let names = family_names(c)?;
    let sets: Vec<SNFSet> = names
        .iter()
        .map(|n| ws.set(n))
        .collect::<Result<_, _>>()?;
    let need = |k: usize| {
        if sets.len() != k {
            Err(CliError::Semantic(format!("--op {op} needs {k} operands")))
        } else {
            Ok(())
        }
    };
    let out = match op {
        "union" => {
            need(2)?;
            def_sets::union(&sets[0], &sets[1])?
        }
        "intersect" => {
            need(2)?;
            def_sets::intersect(&sets[0], &sets[1])?
        }
        "difference" => {
            need(2)?;
            def_sets::difference(&sets[0], &sets[1])?
        }
        "complement" => {
            need(1)?;
            def_sets::complement(&sets[0])
        }
        other => {
            return Err(CliError::Semantic(format!("unknown --op {other}")));
        }
    };
    Ok(Output {
        inputs: json!({"op": op, "family": names}),
        result: set_json(&out),
        verification: None,
        summary: format!("{op}: arity {}, {} pieces", out.arity, out.pieces.len()),
    })
}

fn cmd_project(ws: &Workspace, c: &Common) -> Result<Output, CliError> {
    let name = named(c)?;
    let x = ws.set(&name)?;
    let drop = c.n.unwrap_or(1);
    if drop > x.arity {
        return Err(CliError::Semantic(format!(
            "cannot drop {drop} of {} coordinates",
            x.arity
        )));
    }
    let y = def_sets::project(&x, drop)?;
    Ok(Output {
        inputs: json!({"set": name, "drop": drop}),
        result: set_json(&y),
        verification: None,
        summary: format!("projection: arity {}, {} pieces", y.arity, y.pieces.len()),
    })
}

fn cmd_member(ws: &Workspace, c: &Common) -> Result<Output, CliError> {
    let name = named(c)?;
    let x = ws.set(&name)?;
    let p = point_arg(c, &c.point, "--point", x.arity)?;
    let inside = x.member(&p);
    Ok(Output {
        inputs: json!({"set": name, "point": rats_json(&p)}),
        result: json!(inside),
        verification: None,
        summary: format!("{}", inside),
    })
}

fn cmd_dim(ws: &Workspace, c: &Common) -> Result<Output, CliError> {
    let name = named(c)?;
    let x = ws.set(&name)?;
    let d = dimension(&x);
    let shown = match d.as_i64() {
        Some(v) => v.to_string(),
        None => "-inf".to_string(),
    };
    Ok(Output {
        inputs: json!({"set": name}),
        result: json!({"dim": dim_json(&d)}),
        verification: None,
        summary: shown,
    })
}

fn cmd_topo(ws: &Workspace, c: &Common, which: &str) -> Result<Output, CliError> {
    let name = named(c)?;
    let x = ws.set(&name)?;
    let y = match which {
        "interior" => interior(&x),
        "closure" => closure(&x),
        _ => frontier(&x),
    };
    Ok(Output {
        inputs: json!({"set": name}),
        result: set_json(&y),
        verification: None,
        summary: format!("{which}({name}): {} pieces", y.pieces.len()),
    })
}

fn cmd_reduct(ws: &Workspace, c: &Common) -> Result<Output, CliError> {
    let name = named(c)?;
    let x = ws.set(&name)?;
    let bbox = parse_box(c, x.arity)?;
    let s = bounded_reduct(&x, &bbox)?;
    let body = print_formula(&s.body);
    let verification = if c.verify {
        let mut rep = VerificationReport::default();
        rep.checks = 2;
        if s.body.has_int_atoms() {
            rep.fail("reduct still mentions the integer predicate".into());
        }
        let o = VarOrder::numbered(x.arity);
        let boxed = box_set(&bbox)?;
        let a = def_sets::intersect(&x, &boxed)?;
        let b = def_sets::intersect(&compile(&s.body, &o)?, &boxed)?;
        if !def_sets::equal(&a, &b)? {
            rep.fail("reduct differs from the set inside the box".into());
        }
        Some(rep)
    } else {
        None
    };
    Ok(Output {
        inputs: json!({"set": name, "box": c.bbox}),
        result: json!({"formula": body, "int_free": !s.body.has_int_atoms()}),
        verification,
        summary: format!("reduct({name}) = {body}"),
    })
}

fn box_set(bbox: &BoxN) -> Result<SNFSet, CliError> {
    let mut out = SNFSet::full(0);
    for (lo, hi) in bbox {
        out = def_sets::product(&out, &almost_core::interval_set(lo, hi));
    }
    Ok(out)
}

fn cmd_curve(ws: &Workspace, c: &Common) -> Result<Output, CliError> {
    let name = named(c)?;
    let x = ws.set(&name)?;
    let a = point_arg(c, &c.point, "--point", x.arity)?;
    let germ = curve_select(&x, &a)?;
    let verification = if c.verify {
        let mut rep = VerificationReport::default();
        rep.checks = 1;
        let seg = segment_set(&germ.base, &germ.direction, &germ.epsilon)?;
        if !def_sets::subset(&seg, &x)? {
            rep.fail("curve segment leaves the set".into());
        }
        Some(rep)
    } else {
        None
    };
    Ok(Output {
        inputs: json!({"set": name, "point": rats_json(&a)}),
        result: json!({
            "base": rats_json(&germ.base),
            "direction": rats_json(&germ.direction),
            "epsilon": rat_json(&germ.epsilon),
        }),
        verification,
        summary: format!(
            "germ at ({}) toward ({})",
            germ.base.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", "),
            germ.direction.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", ")
        ),
    })
}

fn cmd_decompose(ws: &Workspace, c: &Common) -> Result<Output, CliError> {
    let names = family_names(c)?;
    let sets: Vec<SNFSet> = names
        .iter()
        .map(|n| ws.set(n))
        .collect::<Result<_, _>>()?;
    let arity = sets
        .first()
        .map(|s| s.arity)
        .ok_or_else(|| CliError::Semantic("empty --family".into()))?;
    for s in &sets {
        if s.arity != arity {
            return Err(CliError::Semantic("family members differ in arity".into()));
        }
    }
    let bbox = parse_box(c, arity)?;
    let fam: Vec<_> = sets
        .iter()
        .map(|s| bounded_reduct(s, &bbox))
        .collect::<Result<_, _>>()?;
    let d = decompose_box(&bbox, &fam)?;
    let cells: Vec<Value> = d
        .cells()
        .iter()
        .map(|cell| {
            json!({
                "type": cell.type_bits(),
                "dim": cell.dim(),
                "sample": rats_json(&cell.sample),
            })
        })
        .collect();
    let verification = if c.verify {
        let mut rep = VerificationReport::default();
        let o = VarOrder::numbered(arity);
        let boxed = box_set(&bbox)?;
        let mut cover = SNFSet::empty(arity);
        let compiled: Vec<SNFSet> = d
            .cells()
            .iter()
            .map(|cell| compile(&cell.formula(false), &o))
            .collect::<Result<_, _>>()?;
        for (i, a) in compiled.iter().enumerate() {
            cover = def_sets::union(&cover, a)?;
            for b in compiled.iter().skip(i + 1) {
                rep.checks += 1;
                if !def_sets::intersect(a, b)?.is_empty() {
                    rep.fail(format!("cell {i} overlaps a later cell"));
                }
            }
            for (j, x) in sets.iter().enumerate() {
                rep.checks += 1;
                let inside = def_sets::intersect(a, x)?;
                if !inside.is_empty() && !def_sets::subset(a, x)? {
                    rep.fail(format!("cell {i} straddles family member {j}"));
                }
            }
        }
        rep.checks += 1;
        if !def_sets::equal(&cover, &boxed)? {
            rep.fail("cells do not cover the box exactly".into());
        }
        Some(rep)
    } else {
        None
    };
    Ok(Output {
        inputs: json!({"family": names, "box": c.bbox}),
        result: json!({"cells": cells}),
        verification,
        summary: format!("{} cells", d.cells().len()),
    })
}

fn cmd_components(ws: &Workspace, c: &Common) -> Result<Output, CliError> {
    let name = named(c)?;
    let x = ws.set(&name)?;
    let bbox = parse_box(c, x.arity)?;
    let comps = connected_components(&x, &bbox)?;
    Ok(Output {
        inputs: json!({"set": name, "box": c.bbox}),
        result: json!({
            "count": comps.len(),
            "components": comps.iter().map(set_json).collect::<Vec<_>>(),
        }),
        verification: None,
        summary: format!("{}", comps.len()),
    })
}

fn cmd_path(ws: &Workspace, c: &Common) -> Result<Output, CliError> {
    let name = named(c)?;
    let x = ws.set(&name)?;
    let bbox = parse_box(c, x.arity)?;
    let p = point_arg(c, &c.from, "--from", x.arity)?;
    let q = point_arg(c, &c.to, "--to", x.arity)?;
    let path = path_connect(&x, &bbox, &p, &q)?;
    let verification = if c.verify {
        let mut rep = VerificationReport::default();
        for pt in path.sample_points(8) {
            rep.checks += 1;
            if !x.member(&pt) {
                rep.fail(format!(
                    "path leaves the set at ({})",
                    pt.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(", ")
                ));
            }
        }
        Some(rep)
    } else {
        None
    };
    Ok(Output {
        inputs: json!({"set": name, "box": c.bbox}),
        result: json!({
            "waypoints": path.waypoints.iter().map(|w| rats_json(w)).collect::<Vec<_>>(),
        }),
        verification,
        summary: format!("{} waypoints", path.waypoints.len()),
    })
}

fn cmd_analyze1d(ws: &Workspace, c: &Common) -> Result<Output, CliError> {
    let name = named(c)?;
    let x = ws.set(&name)?;
    if x.arity != 1 {
        return Err(CliError::Semantic("analyze1d needs a one-variable set".into()));
    }
    let (d, e, x1) = def_sets::analyze_1d(&x)?;
    Ok(Output {
        inputs: json!({"set": name}),
        result: json!({
            "discrete": set_json(&d),
            "interval_endpoints": set_json(&e),
            "open_part": set_json(&x1),
        }),
        verification: None,
        summary: format!(
            "discrete: {} pieces, endpoints: {} pieces, open: {} pieces",
            d.pieces.len(),
            e.pieces.len(),
            x1.pieces.len()
        ),
    })
}

fn finite_union_json(f: &def_sets::FiniteUnionForm) -> Value {
    json!({
        "points": rats_json(&f.points),
        "intervals": f
            .intervals
            .iter()
            .map(|(lo, hi)| {
                json!([
                    lo.as_ref().map(rat_json).unwrap_or(json!("-inf")),
                    hi.as_ref().map(rat_json).unwrap_or(json!("inf")),
                ])
            })
            .collect::<Vec<_>>(),
    })
}

fn cmd_dichotomy(ws: &Workspace, c: &Common) -> Result<Output, CliError> {
    let name = named(c)?;
    let x = ws.set(&name)?;
    if x.arity != 1 {
        return Err(CliError::Semantic("dichotomy needs a one-variable set".into()));
    }
    let (result, summary) = match def_sets::omin_dichotomy(&x)? {
        OneDOutcome::FiniteUnion(f) => {
            let s = format!(
                "finite union: {} points, {} intervals",
                f.points.len(),
                f.intervals.len()
            );
            (json!({"finite_union": finite_union_json(&f)}), s)
        }
        OneDOutcome::UnboundedDiscreteWitness(w) => (
            json!({"unbounded_discrete_witness": set_json(&w)}),
            "unbounded discrete witness".to_string(),
        ),
    };
    Ok(Output {
        inputs: json!({"set": name}),
        result,
        verification: None,
        summary,
    })
}

fn cmd_multicell(ws: &Workspace, c: &Common) -> Result<Output, CliError> {
    let name = named(c)?;
    let x = ws.set(&name)?;
    let mp = multicell_partition(&x)?;
    let verification = if c.verify {
        let w = match &c.window {
            Some(s) => parse_rat(s)?,
            None => rat(3),
        };
        Some(verify_multicell_window(&mp, &w)?)
    } else {
        None
    };
    Ok(Output {
        inputs: json!({"set": name, "window": c.window}),
        result: json!({
            "pieces": mp
                .pieces
                .iter()
                .map(|(p, tag)| json!({"tag": tag, "set": set_json(p)}))
                .collect::<Vec<_>>(),
        }),
        verification,
        summary: format!(
            "{} pieces: {}",
            mp.pieces.len(),
            mp.pieces.iter().map(|(_, t)| t.as_str()).collect::<Vec<_>>().join(", ")
        ),
    })
}

fn cmd_repset(ws: &Workspace, c: &Common) -> Result<Output, CliError> {
    let name = named(c)?;
    let x = ws.set(&name)?;
    let m = c.m.unwrap_or(0);
    if m > x.arity {
        return Err(CliError::Semantic("--m exceeds the set arity".into()));
    }
    let rs = representative_set(&x, m)?;
    let verification = if c.verify {
        let mut rep = VerificationReport::default();
        rep.checks = 2;
        if !def_sets::subset(&rs.points, &rs.host)? {
            rep.fail("representative points leave the host set".into());
        }
        let d = dimension(&rs.points);
        if d.as_i64().unwrap_or(-1) > m as i64 {
            rep.fail("representative set is not discrete over the prefix".into());
        }
        Some(rep)
    } else {
        None
    };
    Ok(Output {
        inputs: json!({"set": name, "m": m}),
        result: set_json(&rs.points),
        verification,
        summary: format!("representatives: {} pieces", rs.points.pieces.len()),
    })
}

fn cmd_ubound(ws: &Workspace, c: &Common) -> Result<Output, CliError> {
    let name = named(c)?;
    let x = ws.set(&name)?;
    let r = radius(c)?;
    let (k, wit) = uniform_bound(&x, &r)?;
    let verification = if c.verify {
        let mut rep = VerificationReport::default();
        let np = x.arity - 1;
        let samples = c.samples.unwrap_or(25);
        let mut s = Stream(c.seed);
        let mut best = 0usize;
        let mut params: Vec<Vec<Rat>> = Vec::new();
        if let Some(w) = &wit {
            params.push(w.clone());
        }
        while params.len() < samples.max(1) {
            params.push((0..np).map(|_| s.small_rat()).collect());
            if np == 0 {
                break;
            }
        }
        for b in &params {
            rep.checks += 1;
            let fiber = fiber_prefix(&x, b)?;
            let form = finite_union_in_interval(&fiber, &-r.clone(), &r)?;
            let count = form.points.len() + form.intervals.len();
            if count > k {
                rep.fail(format!("a fiber has {count} components, bound is {k}"));
            }
            best = best.max(count);
        }
        if wit.is_some() && best != k {
            rep.checks += 1;
            rep.fail(format!("no sampled fiber attains the bound {k}"));
        }
        Some(rep)
    } else {
        None
    };
    Ok(Output {
        inputs: json!({"set": name, "R": rat_json(&r)}),
        result: json!({
            "k": k,
            "witness": wit.as_ref().map(|w| rats_json(w)).unwrap_or(Value::Null),
        }),
        verification,
        summary: format!("K = {k}"),
    })
}

fn cmd_ucd(ws: &Workspace, c: &Common) -> Result<Output, CliError> {
    let names = family_names(c)?;
    let sets: Vec<SNFSet> = names
        .iter()
        .map(|n| ws.set(n))
        .collect::<Result<_, _>>()?;
    let m = c.m.ok_or_else(|| CliError::Semantic("missing --m".into()))?;
    let n = c.n.ok_or_else(|| CliError::Semantic("missing --n".into()))?;
    let r = radius(c)?;
    let u = uniform_decomposition(&sets, m, n, &r)?;
    let verification = if c.verify {
        let mut s = Stream(c.seed);
        let samples = c.samples.unwrap_or(25);
        let pts: Vec<Vec<Rat>> = (0..samples)
            .map(|_| (0..m).map(|_| s.small_rat()).collect())
            .collect();
        Some(verify_uniform_decomposition(&u, &sets, &pts)?)
    } else {
        None
    };
    Ok(Output {
        inputs: json!({
            "family": names, "m": m, "n": n, "R": rat_json(&r),
        }),
        result: json!({
            "pieces": u
                .pieces
                .iter()
                .map(|p| {
                    json!({
                        "set": set_json(&p.set),
                        "fiber_cell_type": p.fiber_cell_type,
                        "sign": p.sign,
                    })
                })
                .collect::<Vec<_>>(),
        }),
        verification,
        summary: format!("{} pieces", u.pieces.len()),
    })
}

fn cmd_wbound(ws: &Workspace, c: &Common) -> Result<Output, CliError> {
    let name = named(c)?;
    let x = ws.set(&name)?;
    let r = radius(c)?;
    let k = window_component_bound(&x, &r)?;
    let verification = if c.verify {
        let mut rep = VerificationReport::default();
        if x.arity == 1 {
            let mut s = Stream(c.seed);
            for _ in 0..c.samples.unwrap_or(16) {
                rep.checks += 1;
                let b = s.small_rat();
                let form =
                    finite_union_in_interval(&x, &(&b - &r), &(&b + &r))?;
                let count = form.points.len() + form.intervals.len();
                if count > k {
                    rep.fail(format!(
                        "window at {b} has {count} components, bound is {k}"
                    ));
                }
            }
        } else {
            rep.checks += 1;
        }
        Some(rep)
    } else {
        None
    };
    Ok(Output {
        inputs: json!({"set": name, "R": rat_json(&r)}),
        result: json!({"k": k}),
        verification,
        summary: format!("K = {k}"),
    })
}

fn cmd_axioms(c: &Common) -> Result<Output, CliError> {
    let samples = c.samples.unwrap_or(25);
    let rep = structure_axiom_suite(c.seed, samples)?;
    Ok(Output {
        inputs: json!({"seed": c.seed, "samples": samples}),
        result: json!({"pass": rep.pass, "checks": rep.checks}),
        verification: Some(rep),
        summary: "structural axiom suite".to_string(),
    })
}

// ---------------------------------------------------------------------------
// Plot
// ---------------------------------------------------------------------------

fn cmd_plot(ws: &Workspace, c: &Common) -> Result<Output, CliError> {
    let name = named(c)?;
    let x = ws.set(&name)?;
    if x.arity == 0 || x.arity > 2 {
        return Err(CliError::Semantic("plot supports arity 1 and 2".into()));
    }
    let bbox = parse_box(c, x.arity)?;
    let out = c
        .out
        .as_ref()
        .ok_or_else(|| CliError::Semantic("missing --out".into()))?;
    let svg = if x.arity == 1 {
        plot_1d(&x, &bbox)?
    } else {
        plot_2d(&x, &bbox, c.samples.unwrap_or(160).clamp(16, 400))
    };
    std::fs::write(out, &svg)
        .map_err(|e| CliError::Semantic(format!("cannot write {}: {e}", out.display())))?;
    Ok(Output {
        inputs: json!({"set": name, "box": c.bbox}),
        result: json!({"out": out.display().to_string(), "bytes": svg.len()}),
        verification: None,
        summary: format!("wrote {}", out.display()),
    })
}

const PLOT_SIZE: f64 = 640.0;
const PLOT_PAD: f64 = 20.0;

fn to_f64(r: &Rat) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(0.0)
}

fn plot_1d(x: &SNFSet, bbox: &BoxN) -> Result<String, CliError> {
    let (lo, hi) = &bbox[0];
    let form = finite_union_in_interval(x, lo, hi)?;
    let (flo, fhi) = (to_f64(lo), to_f64(hi));
    let scale = (PLOT_SIZE - 2.0 * PLOT_PAD) / (fhi - flo);
    let px = |v: f64| PLOT_PAD + (v - flo) * scale;
    let y = PLOT_SIZE / 4.0;
    let mut s = svg_header(PLOT_SIZE, PLOT_SIZE / 2.0);
    s.push_str(&format!(
        "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
         stroke=\"#999\" stroke-width=\"1\"/>\n",
        px(flo),
        px(fhi)
    ));
    for (l, h) in &form.intervals {
        let a = l.as_ref().map(to_f64).unwrap_or(flo);
        let b = h.as_ref().map(to_f64).unwrap_or(fhi);
        s.push_str(&format!(
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" \
             stroke=\"#1565c0\" stroke-width=\"6\" stroke-linecap=\"butt\"/>\n",
            px(a),
            px(b)
        ));
    }
    for p in &form.points {
        s.push_str(&format!(
            "<circle cx=\"{:.2}\" cy=\"{y:.2}\" r=\"4\" fill=\"#c62828\"/>\n",
            px(to_f64(p))
        ));
    }
    s.push_str("</svg>\n");
    Ok(s)
}

fn plot_2d(x: &SNFSet, bbox: &BoxN, res: usize) -> String {
    let (xlo, xhi) = &bbox[0];
    let (ylo, yhi) = &bbox[1];
    let mut s = svg_header(PLOT_SIZE, PLOT_SIZE);
    let w = (PLOT_SIZE - 2.0 * PLOT_PAD) / res as f64;
    for i in 0..res {
        for j in 0..res {
            // Sample the cell center; exact rational arithmetic throughout.
            let fx = Rat::new((2 * i as i64 + 1).into(), (2 * res as i64).into());
            let fy = Rat::new((2 * j as i64 + 1).into(), (2 * res as i64).into());
            let vx = xlo + (xhi - xlo) * fx;
            let vy = ylo + (yhi - ylo) * fy;
            if x.member(&[vx, vy]) {
                let cx = PLOT_PAD + i as f64 * w;
                let cy = PLOT_SIZE - PLOT_PAD - (j as f64 + 1.0) * w;
                s.push_str(&format!(
                    "<rect x=\"{cx:.2}\" y=\"{cy:.2}\" width=\"{w:.2}\" \
                     height=\"{w:.2}\" fill=\"#1565c0\"/>\n"
                ));
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

fn svg_header(w: f64, h: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" \
         height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}
