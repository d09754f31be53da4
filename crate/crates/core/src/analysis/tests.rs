use std::path::Path;

use super::*;
use crate::minilang::{parse_source, MiniProgram};

const SERVICE: &str = r#"package flow.app;

class Service {
    String cache;
    String ready = "yes";

    void prime(String seed) {
        cache = seed;
    }

    String read() {
        return cache;
    }
}
"#;

const DRIVER: &str = r#"package flow.app;

class Driver {
    static String tag;
    String note;

    void run(String input) {
        Service s = new Service();
        s.prime(input);
        String got = s.read();
        if (got == null) {
            String fallback = "none";
            got = fallback;
        }
        tag = got;
    }

    static void partial(boolean flag) {
        String x;
        if (flag) {
            x = "set";
        }
        while (flag) {
            String inner = "loop";
            tag = inner;
        }
        tag = "done";
    }
}
"#;

fn fixture() -> MiniProgram {
    MiniProgram {
        files: vec![
            parse_source(Path::new("a_service.mj"), SERVICE).unwrap(),
            parse_source(Path::new("b_driver.mj"), DRIVER).unwrap(),
        ],
    }
}

fn method(a: &Analysis, name: &str) -> usize {
    a.index
        .methods
        .iter()
        .position(|m| m.simple_name == name)
        .unwrap_or_else(|| panic!("no method {name}"))
}

fn line_of(src: &str, needle: &str) -> u32 {
    let at = src
        .lines()
        .position(|l| l.contains(needle))
        .unwrap_or_else(|| panic!("{needle:?} not in source"));
    (at + 1) as u32
}

#[test]
fn scopes_split_on_branches_and_loops() {
    let a = analyze(&fixture());
    let run = method(&a, "run");
    let run_scopes: Vec<&ScopeInfo> = a.scopes.iter().filter(|s| s.method == run).collect();
    // lead-in through the if, the then block, and the continuation
    assert_eq!(run_scopes.len(), 3);
    assert_eq!(run_scopes[0].len, 4);
    assert_eq!(run_scopes[1].len, 2);
    assert_eq!(run_scopes[2].len, 1);
    assert_eq!(a.method_final_scope(run), run_scopes[2].id);

    let partial = method(&a, "partial");
    let p: Vec<&ScopeInfo> = a.scopes.iter().filter(|s| s.method == partial).collect();
    assert_eq!(p.len(), 5);
    assert_eq!(a.method_final_scope(partial), p[4].id);
}

#[test]
fn call_sites_resolve_through_receiver_types() {
    let a = analyze(&fixture());
    let run = method(&a, "run");
    let sites: Vec<&CallSite> = a.call_sites.iter().filter(|c| c.caller == run).collect();
    assert_eq!(sites.len(), 2);
    assert_eq!(sites[0].callee, method(&a, "prime"));
    assert_eq!(sites[1].callee, method(&a, "read"));
}

#[test]
fn interprocedural_control_edges_thread_calls() {
    let a = analyze(&fixture());
    let run = method(&a, "run");
    let prime = method(&a, "prime");
    let read = method(&a, "read");
    let s0 = a.method_entry_scope(run);
    let prime_in = a.method_entry_scope(prime);
    let read_in = a.method_entry_scope(read);
    assert!(a.control_edges.contains(&(s0, prime_in)));
    for &e in a.method_exit_scopes(prime) {
        assert!(a.control_edges.contains(&(e, read_in)));
    }
    // after the last call the flow rejoins the caller's successors
    let succ: Vec<usize> = a
        .control_edges
        .iter()
        .filter(|(x, _)| *x == s0)
        .map(|(_, y)| *y)
        .collect();
    for &e in a.method_exit_scopes(read) {
        for &s in succ.iter().filter(|s| a.scopes[**s].method == run) {
            assert!(a.control_edges.contains(&(e, s)), "missing return edge");
        }
    }
    assert!(a.executes_before(s0, read_in));
    assert!(a.executes_before(s0, s0), "order is reflexive");
    assert!(!a.executes_before(read_in, prime_in));
}

#[test]
fn data_edges_cross_scopes_and_methods() {
    let a = analyze(&fixture());
    let prime_in = a.method_entry_scope(method(&a, "prime"));
    let read_in = a.method_entry_scope(method(&a, "read"));
    // the field written by prime feeds the read in the callee
    assert!(a
        .data_edges
        .contains(&(prime_in, read_in, "String".to_string())));
    let run = method(&a, "run");
    let run_scopes: Vec<&ScopeInfo> = a.scopes.iter().filter(|s| s.method == run).collect();
    let s0 = run_scopes[0].id;
    let then = run_scopes[1].id;
    let cont = run_scopes[2].id;
    assert!(a.data_edges.contains(&(s0, cont, "String".to_string())));
    assert!(a.data_edges.contains(&(then, cont, "String".to_string())));
    // nothing flows backwards
    assert!(!a.data_edges.iter().any(|(d, u, _)| *d == cont && *u == s0));
}

#[test]
fn must_init_is_path_sensitive() {
    let a = analyze(&fixture());
    let partial = method(&a, "partial");
    let p: Vec<&ScopeInfo> = a.scopes.iter().filter(|s| s.method == partial).collect();
    let x = VarKey::Local {
        method: partial,
        name: "x".into(),
    };
    let tag = VarKey::Field {
        class: a.index.methods[partial].class,
        name: "tag".into(),
    };
    // assigned only in the then branch: unknown afterwards
    assert!(!a.must().is_must_init(&x, p[2].id, 0));
    // inside the then branch, right after the assignment
    assert!(a.must().is_must_init(&x, p[1].id, 1));
    // loop body may not run: not definite after the while
    assert!(!a.must().is_must_init(&tag, p[4].id, 0));
    // but definite after the unconditional assignment
    assert!(a.must().is_must_init(&tag, p[4].id, 1));
    // and inside the loop after the local declaration
    let inner = VarKey::Local {
        method: partial,
        name: "inner".into(),
    };
    assert!(a.must().is_must_init(&inner, p[3].id, 1));
}

#[test]
fn must_init_flows_through_calls() {
    let a = analyze(&fixture());
    let service = a.index.class_by_qname("flow.app.Service").unwrap();
    let cache = VarKey::Field {
        class: service,
        name: "cache".into(),
    };
    let ready = VarKey::Field {
        class: service,
        name: "ready".into(),
    };
    let read_in = a.method_entry_scope(method(&a, "read"));
    let prime_in = a.method_entry_scope(method(&a, "prime"));
    // read is only called after prime, whose summary assigns cache
    assert!(a.must().is_must_init(&cache, read_in, 0));
    // prime cannot assume its own effect at entry
    assert!(!a.must().is_must_init(&cache, prime_in, 0));
    // initializer-backed fields hold everywhere
    assert!(a.must().is_must_init(&ready, prime_in, 0));
    // in the caller, the callee's effect is visible after the call
    let run = method(&a, "run");
    let cont = a.method_final_scope(run);
    assert!(a.must().is_must_init(&cache, cont, 0));
    let s0 = a.method_entry_scope(run);
    assert!(!a.must().is_must_init(&cache, s0, 1), "before the call");
    assert!(a.must().is_must_init(&cache, s0, 2), "after the call");
}

#[test]
fn visible_vars_respect_shadowing_and_statics() {
    let a = analyze(&fixture());
    let run = method(&a, "run");
    let cont = a.method_final_scope(run);
    let vars = a
        .visible_vars(&Location {
            scope: cont,
            index: 0,
        })
        .unwrap();
    let names: Vec<&str> = vars.iter().map(|v| v.name.as_str()).collect();
    // locals first, then the parameter, then fields; the inner-block
    // local is out of scope here
    assert_eq!(names, ["s", "got", "input", "tag", "note"]);
    for v in &vars {
        let expect = !matches!(v.name.as_str(), "tag" | "note");
        assert_eq!(v.must_initialized, expect, "{}", v.name);
    }
    let tag = vars.iter().find(|v| v.name == "tag").unwrap();
    assert_eq!(tag.kind, VarKind::StaticField);
    assert!(!tag.must_initialized);

    // static methods do not see instance fields
    let partial = method(&a, "partial");
    let end = a.method_final_scope(partial);
    let vars = a
        .visible_vars(&Location {
            scope: end,
            index: 1,
        })
        .unwrap();
    let names: Vec<&str> = vars.iter().map(|v| v.name.as_str()).collect();
    assert_eq!(names, ["x", "flag", "tag"]);
    let x = vars.iter().find(|v| v.name == "x").unwrap();
    assert!(!x.must_initialized, "declaration without initializer");
}

#[test]
fn locations_map_to_lines() {
    let a = analyze(&fixture());
    let run = method(&a, "run");
    let cont = a.method_final_scope(run);
    assert_eq!(
        a.location_line(&Location {
            scope: cont,
            index: 0
        })
        .unwrap(),
        line_of(DRIVER, "tag = got;")
    );
    // past the last statement the location anchors to the block close
    assert_eq!(
        a.location_line(&Location {
            scope: cont,
            index: 1
        })
        .unwrap(),
        line_of(DRIVER, "tag = got;") + 1
    );
    let err = a
        .location_line(&Location {
            scope: cont,
            index: 9,
        })
        .unwrap_err();
    assert!(matches!(err, AnalysisError::InvalidLocation { .. }));
    assert!(matches!(
        a.location_line(&Location {
            scope: 999,
            index: 0
        }),
        Err(AnalysisError::UnknownScope(999))
    ));
}

#[test]
fn coupling_counts_are_directional() {
    let a = analyze(&fixture());
    assert_eq!(a.method_coupling(method(&a, "run")), (2, 0));
    assert_eq!(a.method_coupling(method(&a, "prime")), (0, 1));
    assert_eq!(a.method_coupling(method(&a, "read")), (0, 1));
    assert_eq!(a.method_coupling(method(&a, "partial")), (0, 0));
}

#[test]
fn listing_is_stable_and_complete() {
    let a = analyze(&fixture());
    let listing = a.listing();
    assert_eq!(listing, analyze(&fixture()).listing());
    assert_eq!(
        listing.lines().filter(|l| l.starts_with("scope ")).count(),
        a.scopes.len()
    );
    assert!(listing.contains("kind=control"));
    assert!(listing.contains("kind=data type=String"));
}
