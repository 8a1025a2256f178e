use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use germforge_cli::workspace::Workspace;
use serde_json::Value;

const BASIC: &str = "\
field Q
ring X vars x trunc 6 ideal []
ring Y vars y trunc 6 ideal []
ring C vars x y trunc 6 ideal [ y^2 - x^3 ]
map f : X -> Y [ x^2 ]
map ft : X -> Y [ x^2 + x^3 ]
map c3 : X -> Y [ x^3 ]
map neg : X -> Y [ -x^2 ]
map s2 : X -> X [ x^2 ]
quiver Loop { vertex A ring X; edge A -> A map s2; }
quiver Qt { vertex A ring X; vertex B ring Y; edge A -> B map ft; constraint A invertible; constraint B invertible; }
quiver Q { vertex A ring X; vertex B ring Y; edge A -> B map f; }
";

const FAMILY: &str = "\
field Q
ring T vars x tblock t trunc 8 ideal []
ring S vars y tblock t trunc 8 ideal []
map g : T -> S [ x^2 + t x^3 ]
map gt : T -> S [ x^2 + t^2 x^3 ]
map v3 : T -> S [ x^3 ]
quiver Qt { vertex X ring T; vertex Y ring S; edge X -> Y map gt; constraint X identity; constraint Y identity; }
quiver Q { vertex X ring T; vertex Y ring S; edge X -> Y map g; }
";

struct Run {
    code: i32,
    report: Value,
    stdout: String,
    stderr: String,
}

fn workspace(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn germforge(args: &[&str], stdin: Option<&str>, env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_germforge"));
    cmd.args(args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::piped());
    cmd.env_remove("GERMFORGE_MAX_DEGREE");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let mut child = cmd.spawn().unwrap();
    if let Some(s) = stdin {
        child.stdin.take().unwrap().write_all(s.as_bytes()).unwrap();
    }
    drop(child.stdin.take());
    let out = child.wait_with_output().unwrap();
    let stdout = String::from_utf8(out.stdout).unwrap();
    Run {
        code: out.status.code().unwrap(),
        report: serde_json::from_str(&stdout).unwrap_or(Value::Null),
        stdout,
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn run(args: &[&str]) -> Run {
    germforge(args, None, &[])
}

fn basic() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    let ws = workspace(dir.path(), "ws.gf", BASIC);
    (dir, ws)
}

#[test]
fn right_square_root_witness() {
    let (_dir, ws) = basic();
    let r = run(&["solve", ws.to_str().unwrap(), "--group", "R", "--lhs", "ft", "--rhs", "f", "--degree", "5"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(r.report["schema"], "germforge.report/1");
    assert_eq!(r.report["verdict"], "success");
    assert_eq!(r.report["witness"]["substitution"]["psi"][0], "x + 1/2 x^2 - 1/8 x^3");
    assert_eq!(r.report["witness"]["coefficients"]["psi"][0][1]["coefficient"], "1/2");
    assert_eq!(r.report["witness"]["roundtrip"], true);
}

#[test]
fn contact_obstruction_at_order_two() {
    let (_dir, ws) = basic();
    let r = run(&["solve", ws.to_str().unwrap(), "--group", "K", "--lhs", "c3", "--rhs", "f", "--degree", "3"]);
    assert_eq!(r.code, 10);
    assert_eq!(r.report["verdict"], "obstructed");
    assert_eq!(r.report["order"], 2);
    assert!(!r.report["residual"].as_array().unwrap().is_empty());
}

#[test]
fn identical_maps_give_the_identity() {
    let (_dir, ws) = basic();
    for tag in ["R", "L", "LR", "C", "K"] {
        let r = run(&["solve", ws.to_str().unwrap(), "--group", tag, "--lhs", "f", "--rhs", "f", "--degree", "5"]);
        assert_eq!(r.code, 0, "{tag}: {}", r.stdout);
        let text = r.report["witness"]["element"].as_str().unwrap().to_string();
        let ws = Workspace::parse(&format!("{BASIC}{text}")).unwrap();
        let g = &ws.element("witness").unwrap().element;
        let id = germforge_core::GroupElement::identity(
            germforge_core::GroupTag::ALL.into_iter().find(|t| germforge_cli::workspace::tag_name(*t) == tag).unwrap(),
            ws.ring("X").unwrap(),
            ws.ring("Y").unwrap(),
        )
        .unwrap();
        assert_eq!(g, &id, "{tag}");
    }
}

#[test]
fn seed_required_exit_code() {
    let (_dir, ws) = basic();
    let r = run(&["solve", ws.to_str().unwrap(), "--group", "R", "--lhs", "neg", "--rhs", "f", "--degree", "5"]);
    assert_eq!(r.code, 11);
    assert_eq!(r.report["verdict"], "seed-required");
}

#[test]
fn constraints_and_seeds_from_flags() {
    let (dir, ws) = basic();
    let w = ws.to_str().unwrap();
    let r = run(&["solve", w, "--group", "LR", "--lhs", "ft", "--rhs", "f", "--degree", "5", "--constraint", "target identity"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert!(r.report["witness"]["element"].as_str().unwrap().ends_with("[ y ]"));
    let r = run(&["solve", w, "--group", "R", "--lhs", "ft", "--rhs", "f", "--degree", "5", "--constraint", "sideways identity"]);
    assert_eq!(r.code, 2);
    let seeded = format!("{BASIC}element s : R X -> Y [ -x ]\n");
    let ws2 = workspace(dir.path(), "seeded.gf", &seeded);
    let r = run(&["solve", ws2.to_str().unwrap(), "--group", "R", "--lhs", "ft", "--rhs", "f", "--degree", "5", "--seed", "s"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["witness"]["substitution"]["psi"][0], "-x - 1/2 x^2 + 1/8 x^3");
}

#[test]
fn batches_keep_their_order() {
    let (_dir, ws) = basic();
    let w = ws.to_str().unwrap();
    let r = run(&["solve", w, "--group", "R", "--lhs", "ft", "--rhs", "f", "--lhs", "neg", "--rhs", "f", "--lhs", "f", "--rhs", "f", "--degree", "5", "--jobs", "3"],
    );
    assert_eq!(r.code, 11);
    let v: Vec<&str> = r.report["results"].as_array().unwrap().iter().map(|x| x["verdict"].as_str().unwrap()).collect();
    assert_eq!(v, ["success", "seed-required", "success"]);
    assert_eq!(r.report["results"][2]["lhs"], "f");
}

#[test]
fn self_loop_is_rejected() {
    let (_dir, ws) = basic();
    let r = run(&["quiver", "validate", ws.to_str().unwrap(), "--quiver", "Loop"]);
    assert_eq!(r.code, 2);
    assert_eq!(r.report["verdict"], "invalid");
    assert_eq!(r.report["reason"], "loop");
    let r = run(&["quiver", "validate", ws.to_str().unwrap(), "--quiver", "Q"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["root"], "B");
    assert_eq!(r.report["grades"]["A"], 1);
}

#[test]
fn two_vertex_quiver_matches_left_right() {
    let (dir, ws) = basic();
    let w = ws.to_str().unwrap();
    let emit = dir.path().join("sol.gf");
    let q = run(&["quiver", "solve", w, "--domain", "Qt", "--codomain", "Q", "--degree", "5", "--emit", emit.to_str().unwrap()],
    );
    let lr = run(&["solve", w, "--group", "LR", "--lhs", "ft", "--rhs", "f", "--degree", "5"]);
    assert_eq!(q.code, 0, "{}", q.stdout);
    assert_eq!(lr.code, 0);
    assert_eq!(q.report["roundtrip"], true);
    let sol = std::fs::read_to_string(&emit).unwrap();
    let ws = Workspace::parse(&format!("{BASIC}{sol}")).unwrap();
    let phi_a = &ws.map("sol.A").unwrap().map;
    let phi_b = &ws.map("sol.B").unwrap().map;
    let f = &ws.map("f").unwrap().map;
    let ft = &ws.map("ft").unwrap().map;
    assert!(phi_b.compose(ft).unwrap().equal_mod(&f.compose(phi_a).unwrap(), 5).unwrap());
    let p = run(&["quiver", "purify", w, "--solution", "sol", "--solution-file", emit.to_str().unwrap()]);
    assert_eq!(p.code, 0, "{}", p.stdout);
    assert!(p.report["steps"].as_array().unwrap().iter().all(|s| s["holds"] == true));
}

#[test]
fn base_change_recovers_the_square() {
    let dir = tempfile::tempdir().unwrap();
    let ws = workspace(dir.path(), "fam.gf", FAMILY);
    let w = ws.to_str().unwrap();
    let r = run(&["quiver", "base-change", w, "--domain", "Qt", "--codomain", "Q", "--degree", "9"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(r.report["base"][0], "t^2");
    let r = run(&["quiver", "solve", w, "--domain", "Qt", "--codomain", "Q", "--degree", "9"]);
    assert_eq!(r.code, 10);
    let r = run(&["quiver", "base-change", w, "--domain", "Qt", "--codomain", "Q", "--degree", "9", "--freeze-base"]);
    assert_eq!(r.code, 10);
}

#[test]
fn encode_ifs_nest() {
    let (_dir, ws) = basic();
    let r = run(&["encode-ifs", ws.to_str().unwrap(), "--group", "LR", "--lhs", "ft", "--rhs", "f"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["nest"], "{y} < {x,y}");
    let primary: Vec<&Value> =
        r.report["blocks"].as_array().unwrap().iter().filter(|b| b["auxiliary"] == false).collect();
    assert_eq!(primary.len(), 2);
    assert!(r.report["system"].as_str().unwrap().contains("nest {y} < {x,y}"));
}

#[test]
fn tangent_of_a_square() {
    let (_dir, ws) = basic();
    let r = run(&["tangent", ws.to_str().unwrap(), "--group", "K", "--map", "f", "--order", "2"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["verdict"], "determined-at-order");
    // m² modulo m⁷ is spanned by x², …, x⁶
    assert_eq!(r.report["dimension"], 5);
    assert_eq!(r.report["slice_dimension"], 1);
    let r = run(&["tangent", ws.to_str().unwrap(), "--group", "R", "--map", "c3", "--order", "1"]);
    assert_eq!(r.code, 10);
    assert_eq!(r.report["verdict"], "not-determined");
}

#[test]
fn normal_form_coefficient() {
    let dir = tempfile::tempdir().unwrap();
    let ws = workspace(dir.path(), "fam.gf", FAMILY);
    let r = run(&["normal-form", ws.to_str().unwrap(), "--group", "R", "--family", "g", "--basis", "v3", "--degree", "6"]);
    assert_eq!(r.code, 0, "{}", r.stdout);
    assert_eq!(r.report["coefficients"][0], "t");
}

#[test]
fn probe_schedule() {
    let (_dir, ws) = basic();
    let r = run(&["probe", ws.to_str().unwrap(), "--group", "R", "--lhs", "ft", "--rhs", "f", "--schedule", "2,4,6"]);
    assert_eq!(r.code, 0);
    assert_eq!(r.report["max_achieved"], 6);
    let r = run(&["probe", ws.to_str().unwrap(), "--group", "R", "--lhs", "ft", "--rhs", "f", "--schedule", "4,2"]);
    assert_eq!(r.code, 2);
}

#[test]
fn stdin_and_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let r = germforge(
        &["solve", "-", "--group", "R", "--lhs", "ft", "--rhs", "f", "--degree", "5", "--out", out.to_str().unwrap()],
        Some(BASIC),
        &[],
    );
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out).unwrap()).unwrap();
    assert_eq!(report["verdict"], "success");
}

#[test]
fn input_errors_exit_two() {
    let r = germforge(&["print", "-"], Some("field Q\nring X vars x trunc 6 ideal [ x^2 + ]\n"), &[]);
    assert_eq!(r.code, 2);
    assert!(r.report["error"].as_str().unwrap().starts_with("2:"));
    assert!(r.stderr.contains("2:"));
    let r = germforge(&["print", "-"], Some("field Q\nmap f : X -> X [ x ]\n"), &[]);
    assert_eq!(r.code, 2);
    assert!(r.report["error"].as_str().unwrap().contains("undeclared ring `X`"));
    let r = germforge(&["print", "/nonexistent/ws.gf"], None, &[]);
    assert_eq!(r.code, 2);
    let r = germforge(&["solve", "-", "--group", "Q", "--lhs", "f", "--rhs", "f", "--degree", "3"], Some(BASIC), &[]);
    assert_eq!(r.code, 2);
}

#[test]
fn degree_cap() {
    let args = ["solve", "-", "--group", "R", "--lhs", "ft", "--rhs", "f", "--degree", "5"];
    assert_eq!(germforge(&args, Some(BASIC), &[("GERMFORGE_MAX_DEGREE", "4")]).code, 2);
    assert_eq!(germforge(&args, Some(BASIC), &[("GERMFORGE_MAX_DEGREE", "6")]).code, 0);
    let r = germforge(&["solve", "-", "--group", "R", "--lhs", "ft", "--rhs", "f", "--degree", "40"], Some(BASIC), &[]);
    assert_eq!(r.code, 2);
}

#[test]
fn print_is_canonical() {
    let r = germforge(&["print", "-"], Some(BASIC), &[]);
    assert_eq!(r.code, 0);
    let again = germforge(&["print", "-"], Some(&r.stdout), &[]);
    assert_eq!(r.stdout, again.stdout);
    assert_eq!(Workspace::parse(BASIC).unwrap(), Workspace::parse(&r.stdout).unwrap());
}
