//! Subcommand implementations.

use std::collections::BTreeMap;
use std::io::Read as _;
use std::path::Path;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use germforge_core::ifs::encode_ifs;
use germforge_core::tangent::tangent_space;
use germforge_core::{
    check_rectangles, grade_vertices, probe_orbit_closure, purify, solve_equivalence, solve_quiver,
    solve_with_base_change, unfolding_normal_form, validate_quiver, Constraint, ConstraintKind, GroupElement,
    GroupTag, NonPureSolution, NormalFormOutcome, NormalFormRequest, QuiverMorphismProblem, QuiverOutcome, Scope,
    SolveOutcome, SolveRequest, VertexMorphism,
};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::report::{self, document, Verdict};
use crate::workspace::{
    element_line, map_line, nested_text, parse_constraint, parse_tag, tag_name, MapDecl, Scanner, Workspace,
    WorkspaceError,
};
use crate::{
    Cli, Command, Common, EncodeArgs, NormalFormArgs, ProbeArgs, PurifyArgs, QuiverCommand, QuiverSolveArgs,
    SolveArgs, TangentArgs, ValidateArgs,
};

pub const MAX_DEGREE_VAR: &str = "GERMFORGE_MAX_DEGREE";
const DEFAULT_MAX_DEGREE: u32 = 32;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Workspace(#[from] WorkspaceError),
    #[error("{0}")]
    Core(#[from] germforge_core::Error),
    #[error("{0}")]
    Input(String),
}

impl CliError {
    fn verdict(&self) -> Verdict {
        match self {
            CliError::Core(germforge_core::Error::Internal(_)) => Verdict::InternalError,
            _ => Verdict::InputError,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn input(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

/// What a command prints: a report, or plain text for `print`.
#[derive(Debug)]
pub struct Output {
    pub verdict: Verdict,
    pub report: Value,
    pub text: Option<String>,
    pub error: Option<String>,
}

impl Output {
    pub fn exit_code(&self) -> i32 {
        self.verdict.exit_code()
    }

    pub fn rendered(&self) -> String {
        match &self.text {
            Some(t) => t.clone(),
            None => serde_json::to_string_pretty(&self.report).expect("json") + "\n",
        }
    }
}

pub fn run(cli: &Cli) -> Output {
    let name = command_name(&cli.command);
    let result = match &cli.command {
        Command::Solve(a) => solve(a),
        Command::Quiver(QuiverCommand::Solve(a)) => quiver_solve(a, false),
        Command::Quiver(QuiverCommand::BaseChange(a)) => quiver_solve(a, true),
        Command::Quiver(QuiverCommand::Purify(a)) => quiver_purify(a),
        Command::Quiver(QuiverCommand::Validate(a)) => quiver_validate(a),
        Command::EncodeIfs(a) => encode(a),
        Command::Tangent(a) => tangent(a),
        Command::NormalForm(a) => normal_form(a),
        Command::Probe(a) => probe(a),
        Command::Print(c) => {
            return match load(c) {
                Ok(ws) => Output { verdict: Verdict::Success, report: Value::Null, text: Some(ws.to_text()), error: None },
                Err(e) => error_output(name, e),
            }
        }
    };
    match result {
        Ok((verdict, body)) => Output { verdict, report: document(name, verdict, body), text: None, error: None },
        Err(e) => error_output(name, e),
    }
}

fn error_output(name: &str, e: CliError) -> Output {
    let verdict = e.verdict();
    let msg = e.to_string();
    Output { verdict, report: document(name, verdict, json!({ "error": msg })), text: None, error: Some(msg) }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Solve(_) => "solve",
        Command::Quiver(QuiverCommand::Solve(_)) => "quiver solve",
        Command::Quiver(QuiverCommand::BaseChange(_)) => "quiver base-change",
        Command::Quiver(QuiverCommand::Purify(_)) => "quiver purify",
        Command::Quiver(QuiverCommand::Validate(_)) => "quiver validate",
        Command::EncodeIfs(_) => "encode-ifs",
        Command::Tangent(_) => "tangent",
        Command::NormalForm(_) => "normal-form",
        Command::Probe(_) => "probe",
        Command::Print(_) => "print",
    }
}

pub fn read_source(path: &Path) -> Result<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| input(format!("stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
    }
}

pub fn max_degree() -> Result<u32> {
    match std::env::var(MAX_DEGREE_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| input(format!("{MAX_DEGREE_VAR}={v} is not a degree"))),
        Err(_) => Ok(DEFAULT_MAX_DEGREE),
    }
}

fn load(c: &Common) -> Result<Workspace> {
    let ws = Workspace::parse(&read_source(&c.workspace)?)?;
    check_cap(&ws, &[])?;
    Ok(ws)
}

fn check_cap(ws: &Workspace, degrees: &[u32]) -> Result<()> {
    let cap = max_degree()?;
    for (name, r) in &ws.rings {
        if r.trunc() > cap {
            return Err(input(format!("ring {name} has truncation {} above the cap {cap}", r.trunc())));
        }
    }
    if let Some(d) = degrees.iter().find(|&&d| d > cap) {
        return Err(input(format!("degree {d} is above the cap {cap} ({MAX_DEGREE_VAR})")));
    }
    Ok(())
}

fn group(s: &str) -> Result<GroupTag> {
    parse_tag(s).ok_or_else(|| input(format!("unknown group `{s}` (expected R, L, LR, C or K)")))
}

fn map<'a>(ws: &'a Workspace, name: &str) -> Result<&'a MapDecl> {
    ws.map(name).ok_or_else(|| input(format!("undeclared map `{name}`")))
}

fn element(ws: &Workspace, name: &str) -> Result<GroupElement> {
    Ok(ws.element(name).ok_or_else(|| input(format!("undeclared element `{name}`")))?.element.clone())
}

fn fresh_name(taken: impl Fn(&str) -> bool, base: &str) -> String {
    if !taken(base) {
        return base.to_string();
    }
    (1..).map(|i| format!("{base}{i}")).find(|n| !taken(n)).expect("unbounded")
}

fn append(path: &Path, text: &str) -> Result<()> {
    use std::io::Write as _;
    let mut f = std::fs::OpenOptions::new()
        .create(true)
        .append(true)
        .open(path)
        .map_err(|e| input(format!("{}: {e}", path.display())))?;
    f.write_all(text.as_bytes()).map_err(|e| input(format!("{}: {e}", path.display())))
}

/// `source|target <variant> [args]`.
fn solve_constraint(text: &str, rhs: &MapDecl) -> Result<Constraint> {
    let mut sc = Scanner::new(text);
    let (scope, _) = sc.word()?;
    let (scope, ring) = match scope.as_str() {
        "source" => (Scope::Source, rhs.map.source()),
        "target" => (Scope::Target, rhs.map.target()),
        other => return Err(input(format!("constraint scope `{other}` is not source or target"))),
    };
    let kind = parse_constraint(&mut sc, ring)?;
    sc.skip_trivia();
    if !sc.at_end() {
        return Err(input(format!("trailing text in constraint `{text}`")));
    }
    Ok(Constraint::new(scope, kind))
}

fn solve(a: &SolveArgs) -> Result<(Verdict, Value)> {
    let ws = load(&a.common)?;
    let tag = group(&a.group)?;
    check_cap(&ws, &[a.degree])?;
    if a.lhs.len() != a.rhs.len() {
        return Err(input("--lhs and --rhs must be given the same number of times"));
    }
    let seed = a.seed.as_deref().map(|n| element(&ws, n)).transpose()?;
    let mut jobs = Vec::new();
    let mut taken: Vec<String> = ws.elements.iter().map(|e| e.name.clone()).collect();
    for (l, r) in a.lhs.iter().zip(&a.rhs) {
        let lhs = map(&ws, l)?;
        let rhs = map(&ws, r)?;
        let mut req = SolveRequest::new(tag, &rhs.map, &lhs.map, a.degree);
        for c in &a.constraint {
            req = req.constraint(solve_constraint(c, rhs)?);
        }
        req.seed = seed.clone();
        let name = fresh_name(|n| taken.iter().any(|t| t == n), "witness");
        taken.push(name.clone());
        jobs.push((lhs, rhs, req, name));
    }
    let results = fan_out(&jobs, a.jobs, |(lhs, rhs, req, name)| solve_one(&ws, lhs, rhs, req, name));
    let mut verdicts = Vec::new();
    let mut bodies = Vec::new();
    let mut emitted = String::new();
    for r in results {
        let (v, body, line) = r?;
        verdicts.push(v);
        bodies.push(body);
        if let Some(l) = line {
            emitted.push_str(&l);
            emitted.push('\n');
        }
    }
    if let Some(path) = &a.emit {
        append(path, &emitted)?;
    }
    if bodies.len() == 1 {
        return Ok((verdicts[0], bodies.pop().expect("one")));
    }
    let body = Value::Array(
        bodies
            .into_iter()
            .zip(&verdicts)
            .map(|(mut b, v)| {
                b["verdict"] = json!(v.as_str());
                b
            })
            .collect(),
    );
    Ok((Verdict::combine(&verdicts), json!({ "results": body })))
}

/// Runs `f` over `items` on up to `jobs` threads, keeping the order.
fn fan_out<T: Sync, R: Send>(items: &[T], jobs: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    if jobs <= 1 || items.len() <= 1 {
        return items.iter().map(f).collect();
    }
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..jobs.min(items.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let r = f(&items[i]);
                slots.lock().expect("no panics while locked")[i] = Some(r);
            });
        }
    });
    slots.into_inner().expect("no panics while locked").into_iter().map(|r| r.expect("filled")).collect()
}

fn solve_one(
    ws: &Workspace,
    lhs: &MapDecl,
    rhs: &MapDecl,
    req: &SolveRequest,
    name: &str,
) -> Result<(Verdict, Value, Option<String>)> {
    let rep = solve_equivalence(req)?;
    let mut body = json!({
        "group": tag_name(req.group),
        "degree": req.degree,
        "lhs": lhs.name,
        "rhs": rhs.name,
        "method": report::method(rep.method),
        "log": report::log(&rep.log),
    });
    let (verdict, line) = match &rep.outcome {
        SolveOutcome::Success { witness, unknowns, verified } => {
            let line = element_line(name, &rhs.source, &rhs.target, witness)
                .ok_or_else(|| CliError::Core(germforge_core::Error::Internal("unprintable witness".into())))?;
            let roundtrip = reverify_element(ws, &line, name, rhs, lhs, req.degree)?;
            let substitution: Map<String, Value> =
                unknowns.iter().map(|(b, v)| (b.clone(), report::jets(v))).collect();
            let coefficients: Map<String, Value> =
                unknowns.iter().map(|(b, v)| (b.clone(), Value::Array(v.iter().map(report::terms).collect()))).collect();
            body["witness"] = json!({
                "element": line,
                "substitution": substitution,
                "coefficients": coefficients,
                "verified": verified,
                "roundtrip": roundtrip,
            });
            let v = if *verified && roundtrip { Verdict::Success } else { Verdict::InternalError };
            (v, Some(line))
        }
        SolveOutcome::Obstructed { order, residual, branch } => {
            body["order"] = json!(order);
            body["branch"] = json!(branch.to_string());
            body["residual"] = report::residual(residual);
            (Verdict::Obstructed, None)
        }
        SolveOutcome::SeedRequired { order, residual } => {
            body["order"] = json!(order);
            body["residual"] = report::residual(residual);
            (Verdict::SeedRequired, None)
        }
    };
    Ok((verdict, body, line))
}

/// Re-parses an emitted element and checks `apply(g, rhs) ≡ lhs`.
pub fn reverify_element(ws: &Workspace, line: &str, name: &str, rhs: &MapDecl, lhs: &MapDecl, d: u32) -> Result<bool> {
    let mut again = ws.clone();
    again.extend(line)?;
    let g = &again.element(name).expect("just declared").element;
    Ok(g.apply(&rhs.map)?.equal_mod(&lhs.map, d)?)
}

fn quiver_problem(ws: &Workspace, domain: &str, codomain: &str) -> Result<QuiverMorphismProblem> {
    let dq = ws.quiver(domain).ok_or_else(|| input(format!("undeclared quiver `{domain}`")))?;
    let cq = ws.quiver(codomain).ok_or_else(|| input(format!("undeclared quiver `{codomain}`")))?;
    Ok(QuiverMorphismProblem::new(dq.spec.clone(), cq.spec.clone())?)
}

fn morphisms_json(ms: &[VertexMorphism]) -> Value {
    Value::Array(ms.iter().map(|m| json!({ "vertex": m.vertex, "images": report::jets(&m.images) })).collect())
}

fn vertex_ring<'a>(ws: &'a Workspace, quiver: &str, v: &str) -> &'a str {
    let q = ws.quiver(quiver).expect("checked");
    &q.vertices.iter().find(|(u, _)| u == v).expect("same graph").1
}

fn quiver_solve(a: &QuiverSolveArgs, base_change: bool) -> Result<(Verdict, Value)> {
    let ws = load(&a.common)?;
    check_cap(&ws, &[a.degree])?;
    let mut p = quiver_problem(&ws, &a.domain, &a.codomain)?;
    for s in &a.seed {
        let (v, m) = s.split_once('=').ok_or_else(|| input(format!("seed `{s}` is not vertex=map")))?;
        p = p.seed(v, map(&ws, m)?.map.components().to_vec());
    }
    if a.freeze_base {
        p.base_constraints.push(ConstraintKind::Identity);
    }
    let rep = if base_change { solve_with_base_change(&p, a.degree)? } else { solve_quiver(&p, a.degree)? };
    let mut body = json!({
        "domain": a.domain,
        "codomain": a.codomain,
        "degree": a.degree,
        "method": report::method(rep.method),
        "log": report::log(&rep.log),
    });
    let verdict = match &rep.outcome {
        QuiverOutcome::Success { morphisms, base, verified } => {
            body["morphisms"] = morphisms_json(morphisms);
            body["base"] = base.as_deref().map_or(Value::Null, report::jets);
            body["verified"] = json!(verified);
            let mut ok = *verified;
            if !base_change {
                let text = solution_text(&ws, a, &p, morphisms)?;
                let roundtrip = reverify_solution(&ws, &text, a, &p)?;
                ok &= roundtrip;
                body["solution"] = json!(text);
                body["roundtrip"] = json!(roundtrip);
                if let Some(path) = &a.emit {
                    append(path, &text)?;
                }
            }
            if ok {
                Verdict::Success
            } else {
                Verdict::InternalError
            }
        }
        QuiverOutcome::Obstructed { order, residual, edges, branch } => {
            body["order"] = json!(order);
            body["branch"] = json!(branch.to_string());
            body["edges"] = json!(edges);
            body["residual"] = report::residual(residual);
            Verdict::Obstructed
        }
        QuiverOutcome::SeedRequired { order, residual, edges } => {
            body["order"] = json!(order);
            body["edges"] = json!(edges);
            body["residual"] = report::residual(residual);
            Verdict::SeedRequired
        }
    };
    Ok((verdict, body))
}

/// One map per vertex and the solution as a nested declaration.
fn solution_text(ws: &Workspace, a: &QuiverSolveArgs, p: &QuiverMorphismProblem, ms: &[VertexMorphism]) -> Result<String> {
    let mut out = String::new();
    for m in ms {
        let g = m.germ_map()?;
        let src = vertex_ring(ws, &a.domain, &m.vertex);
        let tgt = vertex_ring(ws, &a.codomain, &m.vertex);
        out.push_str(&map_line(&format!("{}.{}", a.name, m.vertex), src, tgt, g.components()));
        out.push('\n');
    }
    let nested = NonPureSolution::from_pure(p, ms, a.degree)?;
    out.push_str(&nested_text(&a.name, &a.domain, &a.codomain, &nested));
    Ok(out)
}

fn reverify_solution(ws: &Workspace, text: &str, a: &QuiverSolveArgs, p: &QuiverMorphismProblem) -> Result<bool> {
    let mut again = ws.clone();
    again.extend(text)?;
    let mut ms = Vec::new();
    for (v, _) in &p.codomain.vertices {
        let m = &again.map(&format!("{}.{v}", a.name)).expect("just declared").map;
        ms.push(VertexMorphism {
            vertex: v.clone(),
            domain: m.source().clone(),
            codomain: m.target().clone(),
            images: m.images(),
        });
    }
    let nested = &again.nested_solution(&a.name).expect("just declared").solution;
    Ok(check_rectangles(p, &ms, a.degree)?.is_empty() && *nested == NonPureSolution::from_pure(p, &ms, a.degree)?)
}

fn quiver_purify(a: &PurifyArgs) -> Result<(Verdict, Value)> {
    let mut ws = load(&a.common)?;
    if let Some(f) = &a.solution_file {
        ws.extend(&read_source(f)?)?;
        check_cap(&ws, &[])?;
    }
    let n = ws.nested_solution(&a.solution).ok_or_else(|| input(format!("undeclared nested solution `{}`", a.solution)))?;
    check_cap(&ws, &[n.solution.degree])?;
    let p = quiver_problem(&ws, &n.domain, &n.codomain)?;
    let rep = purify(&n.solution, &p)?;
    let steps: Vec<Value> =
        rep.steps.iter().map(|s| json!({ "description": s.description, "holds": s.holds })).collect();
    let all_hold = rep.steps.iter().all(|s| s.holds);
    let verdict = if rep.verified && all_hold { Verdict::Success } else { Verdict::InternalError };
    Ok((
        verdict,
        json!({
            "solution": a.solution,
            "degree": n.solution.degree,
            "steps": steps,
            "morphisms": morphisms_json(&rep.morphisms),
            "verified": rep.verified,
        }),
    ))
}

fn quiver_validate(a: &ValidateArgs) -> Result<(Verdict, Value)> {
    let ws = load(&a.common)?;
    let q = ws.quiver(&a.quiver).ok_or_else(|| input(format!("undeclared quiver `{}`", a.quiver)))?;
    let v = validate_quiver(&q.spec);
    let defects: Vec<Value> = v.defects.iter().map(|d| json!({ "kind": d.kind(), "message": d.to_string() })).collect();
    let mut body = json!({ "quiver": a.quiver, "defects": defects });
    if let Some(d) = v.defects.first() {
        body["reason"] = json!(d.kind());
        return Ok((Verdict::Invalid, body));
    }
    let g = grade_vertices(&q.spec)?;
    body["root"] = json!(g.root);
    body["grades"] = json!(g.grades);
    Ok((Verdict::Valid, body))
}

fn encode(a: &EncodeArgs) -> Result<(Verdict, Value)> {
    let ws = load(&a.common)?;
    let tag = group(&a.group)?;
    let lhs = map(&ws, &a.lhs)?;
    let rhs = map(&ws, &a.rhs)?;
    let sys = encode_ifs(tag, &rhs.map, &lhs.map)?;
    let text = sys.to_text();
    let blocks: Vec<Value> = sys
        .blocks
        .iter()
        .map(|b| {
            json!({
                "name": b.name,
                "ring": sys.rings[b.ring].0,
                "components": b.components,
                "nest_level": b.nest_level,
                "auxiliary": b.auxiliary,
            })
        })
        .collect();
    let nest: Vec<String> =
        sys.nest.iter().map(|s| format!("{{{}}}", s.iter().cloned().collect::<Vec<_>>().join(","))).collect();
    let equations: Vec<Value> = sys
        .equations
        .iter()
        .map(|e| json!({ "label": e.label, "ring": sys.rings[e.ring].0, "lhs": sys.term_text(&e.lhs, e.ring) }))
        .collect();
    if let Some(path) = &a.emit {
        std::fs::write(path, &text).map_err(|e| input(format!("{}: {e}", path.display())))?;
    }
    Ok((
        Verdict::Encoded,
        json!({
            "group": tag_name(tag),
            "blocks": blocks,
            "nest": nest.join(" < "),
            "equations": equations,
            "system": text,
        }),
    ))
}

fn tangent(a: &TangentArgs) -> Result<(Verdict, Value)> {
    let ws = load(&a.common)?;
    let tag = group(&a.group)?;
    let f = map(&ws, &a.map)?;
    let r = tangent_space(tag, &f.map, a.order)?;
    let tuples = |v: &[Vec<germforge_core::Jet>]| Value::Array(v.iter().map(|t| report::jets(t)).collect());
    let verdict = if r.determined { Verdict::Determined } else { Verdict::NotDetermined };
    Ok((
        verdict,
        json!({
            "group": tag_name(tag),
            "map": a.map,
            "order": a.order,
            "truncation": f.map.source().trunc(),
            "dimension": r.dimension(),
            "slice_dimension": r.slice_basis.len(),
            "ambient_dimension": r.ambient_dimension,
            "basis": tuples(&r.basis),
            "missing": tuples(&r.missing),
        }),
    ))
}

fn normal_form(a: &NormalFormArgs) -> Result<(Verdict, Value)> {
    let ws = load(&a.common)?;
    let tag = group(&a.group)?;
    check_cap(&ws, &[a.degree])?;
    let fam = map(&ws, &a.family)?;
    let basis = a.basis.iter().map(|b| Ok(map(&ws, b)?.map.components().to_vec())).collect::<Result<Vec<_>>>()?;
    let req = NormalFormRequest { group: tag, family: fam.map.clone(), basis, degree: a.degree };
    let rep = unfolding_normal_form(&req)?;
    let mut body = json!({
        "group": tag_name(tag),
        "family": a.family,
        "basis": a.basis,
        "degree": a.degree,
        "method": report::method(rep.method),
        "log": report::log(&rep.log),
    });
    let verdict = match &rep.outcome {
        NormalFormOutcome::Success { coefficients, normal_form, witness, substitution, verified } => {
            let name = fresh_name(|n| ws.element(n).is_some(), "witness");
            body["coefficients"] = report::jets(coefficients);
            body["normal_form"] = report::jets(normal_form.components());
            body["substitution"] = report::jets(substitution);
            body["witness"] = json!(element_line(&name, &fam.source, &fam.target, witness));
            body["verified"] = json!(verified);
            if *verified {
                Verdict::Success
            } else {
                Verdict::InternalError
            }
        }
        NormalFormOutcome::Obstructed { order, residual, branch } => {
            body["order"] = json!(order);
            body["branch"] = json!(branch.to_string());
            body["residual"] = report::residual(residual);
            Verdict::Obstructed
        }
        NormalFormOutcome::SeedRequired { order, residual } => {
            body["order"] = json!(order);
            body["residual"] = report::residual(residual);
            Verdict::SeedRequired
        }
    };
    Ok((verdict, body))
}

fn probe(a: &ProbeArgs) -> Result<(Verdict, Value)> {
    let ws = load(&a.common)?;
    let tag = group(&a.group)?;
    check_cap(&ws, &a.schedule)?;
    let lhs = map(&ws, &a.lhs)?;
    let rhs = map(&ws, &a.rhs)?;
    let seed = a.seed.as_deref().map(|n| element(&ws, n)).transpose()?;
    let rep = probe_orbit_closure(tag, &rhs.map, &lhs.map, &a.schedule, seed.as_ref())?;
    let entries: Vec<Value> = rep
        .entries
        .iter()
        .map(|e| {
            let v = match &e.report.outcome {
                SolveOutcome::Success { .. } => Verdict::Success,
                SolveOutcome::Obstructed { .. } => Verdict::Obstructed,
                SolveOutcome::SeedRequired { .. } => Verdict::SeedRequired,
            };
            json!({ "degree": e.degree, "verdict": v.as_str(), "order": e.report.obstruction_order() })
        })
        .collect();
    let per_degree: BTreeMap<u32, bool> = rep.entries.iter().map(|e| (e.degree, e.report.is_success())).collect();
    Ok((
        Verdict::Probed,
        json!({
            "group": tag_name(tag),
            "lhs": a.lhs,
            "rhs": a.rhs,
            "entries": entries,
            "succeeded": per_degree,
            "max_achieved": rep.max_achieved,
            "first_obstruction": rep.first_obstruction,
        }),
    ))
}
