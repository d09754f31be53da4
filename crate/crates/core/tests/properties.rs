//! Property tests for the crate's cross-cutting guarantees: the edit
//! distance is a true metric and matches a literal recursive oracle,
//! scores stay inside their documented ranges, ranking metrics are
//! monotone, hole resolution is minimal, and emit/parse round-trips
//! hold for generated programs.

use std::collections::BTreeSet;
use std::path::Path;

use proptest::prelude::*;

use ipweave_core::analysis::{VarInfo, VarKey, VarKind};
use ipweave_core::fspec::levenshtein;
use ipweave_core::metrics::{hr_at_k, mrr};
use ipweave_core::minilang::{emit_file, parse_source, Block, MiniProgram, SourceFile, StmtKind};
use ipweave_core::resolver::{resolve, CandidateList, CandidateVar};
use ipweave_core::score::{cas, cls, cqs, mns, vas, Coefficients};
use ipweave_core::Score;

/// Regression-file persistence is off: these tests live in an
/// integration target, where proptest has no source root to write to.
fn config() -> ProptestConfig {
    ProptestConfig {
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

// ---------------------------------------------------------------- distance

/// Three-way recursion on suffixes, written exactly as the textbook
/// definition reads; exponential, so only used as an oracle.
fn lev_oracle(a: &[char], b: &[char]) -> usize {
    if a.is_empty() || b.is_empty() {
        return a.len().max(b.len());
    }
    let cost = usize::from(a[0] != b[0]);
    let delete = lev_oracle(&a[1..], b) + 1;
    let insert = lev_oracle(a, &b[1..]) + 1;
    let replace = lev_oracle(&a[1..], &b[1..]) + cost;
    delete.min(insert).min(replace)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn distance_matches_the_recursive_oracle(a in "[a-z]{0,10}", b in "[a-z]{0,10}") {
        let av: Vec<char> = a.chars().collect();
        let bv: Vec<char> = b.chars().collect();
        prop_assert_eq!(levenshtein(&a, &b), lev_oracle(&av, &bv));
    }

    #[test]
    fn distance_is_a_metric(
        a in "[A-Za-z_]{0,12}",
        b in "[A-Za-z_]{0,12}",
        c in "[A-Za-z_]{0,12}",
    ) {
        prop_assert_eq!(levenshtein(&a, &a), 0);
        prop_assert_eq!(levenshtein(&a, &b) == 0, a == b);
        prop_assert_eq!(levenshtein(&a, &b), levenshtein(&b, &a));
        prop_assert!(levenshtein(&a, &c) <= levenshtein(&a, &b) + levenshtein(&b, &c));
    }
}

// ----------------------------------------------------------------- scores

fn weights() -> impl Strategy<Value = Coefficients<Score>> {
    (0.1f64..10.0, 0.1f64..10.0, 0.1f64..10.0, 0.0001f64..10.0).prop_map(
        |(c_mns, c_vas, c_cls, c_cqs)| Coefficients {
            c_mns,
            c_vas,
            c_cls,
            c_cqs,
            list_cap: 100,
        },
    )
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn name_score_is_positive_and_one_only_on_equality(
        a in "[A-Za-z_]{0,12}",
        b in "[A-Za-z_]{0,12}",
    ) {
        let s: Score = mns(&a, &b);
        prop_assert!(s > 0.0 && s <= 1.0);
        prop_assert_eq!(s == 1.0, a == b);
    }

    #[test]
    fn availability_score_stays_in_range_and_grows_with_supply(
        per_type in prop::collection::vec((0usize..6, 1usize..5), 0..5),
        bump in 0usize..5,
    ) {
        let before: Score = vas(&per_type);
        prop_assert!((0.0..=1.0).contains(&before));
        let starved = per_type.iter().any(|&(avail, _)| avail == 0);
        prop_assert_eq!(before == 0.0, starved);

        if !per_type.is_empty() {
            let mut more = per_type.clone();
            let i = bump % more.len();
            more[i].0 += 1;
            let after: Score = vas(&more);
            prop_assert!(after >= before);
        }
    }

    #[test]
    fn location_score_lies_between_its_parts(
        m in 0.001f64..=1.0,
        v in 0.0f64..=1.0,
        coeffs in weights(),
    ) {
        let s = cls(m, v, &coeffs);
        prop_assert!(s >= m.min(v) - 1e-12 && s <= m.max(v) + 1e-12);
    }

    #[test]
    fn quantity_score_is_one_exactly_when_clusters_spread(
        counts in prop::collection::vec(1usize..5, 1..6),
    ) {
        let s: Score = cqs(&counts);
        prop_assert!(s > 0.0 && s <= 1.0);
        prop_assert_eq!(s == 1.0, counts.iter().all(|&c| c == 1));
    }

    #[test]
    fn aggregate_score_is_zero_exactly_when_dependencies_break(
        q in 0.001f64..=1.0,
        mean in 0.001f64..=1.0,
        coeffs in weights(),
    ) {
        prop_assert_eq!(cas(false, q, mean, &coeffs), 0.0);
        prop_assert!(cas(true, q, mean, &coeffs) > 0.0);
    }
}

// ---------------------------------------------------------------- metrics

proptest! {
    #![proptest_config(config())]

    #[test]
    fn hit_rate_is_monotone_and_bounds_the_reciprocal_rank(
        ranks in prop::collection::vec(prop::option::of(1usize..150), 1..20),
    ) {
        let mut last: Score = 0.0;
        for k in 1..=150 {
            let hr: Score = hr_at_k(&ranks, k).unwrap();
            prop_assert!((0.0..=100.0).contains(&hr));
            prop_assert!(hr >= last, "hr@{k} dropped: {hr} < {last}");
            last = hr;
        }
        let m: Score = mrr(&ranks).unwrap();
        prop_assert!((0.0..=1.0).contains(&m));
        let hr1: Score = hr_at_k(&ranks, 1).unwrap();
        prop_assert!(m >= hr1 / 100.0 - 1e-12);
    }
}

// --------------------------------------------------------------- resolver

fn pool_var(i: usize) -> CandidateVar {
    CandidateVar::Program(VarInfo {
        name: format!("v{i}"),
        type_name: "T".into(),
        kind: VarKind::Local,
        key: VarKey::Local {
            method: 0,
            name: format!("v{i}"),
        },
        decl_line: 1,
        must_initialized: true,
    })
}

fn candidate_lists() -> impl Strategy<Value = Vec<CandidateList>> {
    prop::collection::vec(prop::collection::vec(0usize..6, 1..=4), 1..=4).prop_map(|holes| {
        holes
            .into_iter()
            .enumerate()
            .map(|(i, picks)| {
                let mut seen = BTreeSet::new();
                let candidates = picks
                    .into_iter()
                    .filter(|p| seen.insert(*p))
                    .map(pool_var)
                    .collect();
                CandidateList {
                    hole_id: i as u32 + 1,
                    candidates,
                }
            })
            .collect()
    })
}

/// Minimum distinct-variable count over the full assignment product.
fn brute_force_min(lists: &[CandidateList]) -> usize {
    fn go(lists: &[CandidateList], i: usize, used: &mut BTreeSet<String>, best: &mut usize) {
        if used.len() >= *best {
            return;
        }
        if i == lists.len() {
            *best = used.len();
            return;
        }
        for c in &lists[i].candidates {
            let fresh = used.insert(c.key());
            go(lists, i + 1, used, best);
            if fresh {
                used.remove(&c.key());
            }
        }
    }
    let mut best = usize::MAX;
    go(lists, 0, &mut BTreeSet::new(), &mut best);
    best
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn resolution_is_complete_minimal_and_deterministic(lists in candidate_lists()) {
        let first = resolve(&lists).unwrap();
        let second = resolve(&lists).unwrap();
        prop_assert_eq!(&first, &second);

        prop_assert_eq!(first.assignment.len(), lists.len());
        for list in &lists {
            let chosen = &first.assignment[&list.hole_id];
            prop_assert!(
                list.candidates.iter().any(|c| c.key() == chosen.key()),
                "hole {} got a variable outside its candidates", list.hole_id
            );
        }

        let used: BTreeSet<String> =
            first.assignment.values().map(|v| v.key()).collect();
        prop_assert_eq!(used.len(), first.distinct_count);
        prop_assert_eq!(first.distinct_count, brute_force_min(&lists));
    }
}

// --------------------------------------------------------------- minilang

fn ident() -> impl Strategy<Value = String> {
    "x[a-z0-9]{0,5}".prop_map(|s| s)
}

fn condition() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("true".to_string()),
        Just("false".to_string()),
        (0u8..100, 0u8..100).prop_map(|(a, b)| format!("{a} < {b}")),
    ]
}

/// Declared names are emitted as `@` and replaced with `xu0, xu1, …`
/// at assembly time, because the parser rejects duplicate members.
fn statement() -> impl Strategy<Value = String> {
    let leaf = prop_oneof![
        any::<u16>().prop_map(|v| format!("int @ = {v};")),
        "[a-z]{0,6}".prop_map(|s| format!("String @ = \"{s}\";")),
        Just("int @;".to_string()),
        (ident(), any::<u16>()).prop_map(|(n, v)| format!("{n} = {v};")),
        ident().prop_map(|n| format!("{n}();")),
        (ident(), ident()).prop_map(|(r, m)| format!("{r}.{m}();")),
    ];
    leaf.prop_recursive(2, 8, 3, |inner| {
        prop_oneof![
            (condition(), prop::collection::vec(inner.clone(), 0..3)).prop_map(
                |(c, body)| nest(&format!("if ({c})"), &body)
            ),
            (condition(), prop::collection::vec(inner, 0..2))
                .prop_map(|(c, body)| nest(&format!("while ({c})"), &body)),
        ]
    })
}

fn nest(head: &str, body: &[String]) -> String {
    let mut out = format!("{head} {{\n");
    for chunk in body {
        for line in chunk.lines() {
            out.push_str("    ");
            out.push_str(line);
            out.push('\n');
        }
    }
    out.push('}');
    out
}

fn source_file() -> impl Strategy<Value = String> {
    let field = prop_oneof![
        Just("int @;".to_string()),
        any::<u16>().prop_map(|v| format!("static int @ = {v};")),
        "[a-z]{0,6}".prop_map(|s| format!("String @ = \"{s}\";")),
    ];
    let method = prop::collection::vec(statement(), 0..5)
        .prop_map(|stmts| nest("void @()", &stmts));
    (
        prop::collection::vec(field, 0..3),
        prop::collection::vec(method, 0..4),
    )
        .prop_map(|(fields, methods)| {
            let mut members: Vec<String> = fields;
            members.extend(methods);
            let class = nest("class Cgen", &members);
            number_placeholders(&format!("package gen.pkg;\n\n{class}\n"))
        })
}

/// Replaces each `@` with a fresh `xu<n>` so every declaration in the
/// generated file bears a distinct name.
fn number_placeholders(raw: &str) -> String {
    let mut out = String::new();
    for (i, part) in raw.split('@').enumerate() {
        if i > 0 {
            out.push_str(&format!("xu{}", i - 1));
        }
        out.push_str(part);
    }
    out
}

fn check_lines_increase(block: &Block) -> Result<(), TestCaseError> {
    let mut last = 0;
    for stmt in &block.statements {
        prop_assert!(
            stmt.line > last,
            "statement lines must strictly increase within a block"
        );
        last = stmt.line;
        match &stmt.kind {
            StmtKind::If {
                then_block,
                else_block,
                ..
            } => {
                check_lines_increase(then_block)?;
                if let Some(b) = else_block {
                    check_lines_increase(b)?;
                }
            }
            StmtKind::While { body, .. } => check_lines_increase(body)?,
            _ => {}
        }
    }
    Ok(())
}

fn strip(file: &SourceFile) -> MiniProgram {
    MiniProgram {
        files: vec![file.clone()],
    }
    .strip_positions()
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn generated_programs_round_trip_through_the_emitter(text in source_file()) {
        let first = parse_source(Path::new("gen.mj"), &text)
            .map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        let emitted = emit_file(&first);
        let second = parse_source(Path::new("gen.mj"), &emitted)
            .map_err(|e| TestCaseError::fail(format!("{e}\n{emitted}")))?;
        prop_assert_eq!(strip(&first), strip(&second));

        let again = emit_file(&second);
        prop_assert_eq!(&emitted, &again, "emission must be idempotent");

        for class in &second.classes {
            for method in &class.methods {
                check_lines_increase(&method.body)?;
            }
        }
    }
}
