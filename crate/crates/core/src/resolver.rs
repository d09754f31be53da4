//! Hole resolution: rank the variables usable at each hole, encode the
//! selection as boolean constraints, and pick an assignment that uses
//! as few distinct variables as possible.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::analysis::{Analysis, AnalysisError, Location, VarInfo, VarKey, VarKind};
use crate::fspec::FSpec;
use crate::minilang::{resolve_block_in, StmtKind};
use crate::sketch::Sketch;

#[derive(Debug, Error)]
pub enum ResolveError {
    #[error("holes {0:?} have no candidate variables")]
    Unsatisfiable(Vec<u32>),
}

/// Ranking category; nearer lexical standing breaks distance ties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Category {
    SameScope,
    Enclosing,
    Field,
}

/// A value one snippet exports for another; its carrier ranks like a
/// variable declared where the producing snippet runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ExportVar {
    /// Index into the planned-channel list.
    pub channel: usize,
    pub consumer_cluster: u32,
    /// Canonical carried type.
    pub type_name: String,
    /// Name the consuming code will read.
    pub name: String,
    pub decl_line: u32,
    pub category: Category,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CandidateVar {
    Program(VarInfo),
    Export(ExportVar),
}

impl CandidateVar {
    pub fn name(&self) -> &str {
        match self {
            CandidateVar::Program(v) => &v.name,
            CandidateVar::Export(e) => &e.name,
        }
    }

    pub fn type_name(&self) -> &str {
        match self {
            CandidateVar::Program(v) => &v.type_name,
            CandidateVar::Export(e) => &e.type_name,
        }
    }

    /// Identity used when counting distinct variables.
    pub fn key(&self) -> String {
        match self {
            CandidateVar::Program(v) => match &v.key {
                VarKey::Local { method, name } => format!("local#{method}:{name}"),
                VarKey::Param { method, name } => format!("param#{method}:{name}"),
                VarKey::Field { class, name } => format!("field#{class}:{name}"),
            },
            // carrier names are collision-free program-wide, so channels
            // sharing one carrier count as one variable
            CandidateVar::Export(e) => format!("export#{}", e.name),
        }
    }
}

/// Candidates for one hole, nearest first.
#[derive(Debug, Clone, PartialEq)]
pub struct CandidateList {
    pub hole_id: u32,
    pub candidates: Vec<CandidateVar>,
}

/// Ranked candidates for every hole of the placed sketches. A program
/// variable qualifies when it is visible, definitely assigned at the
/// insertion point, and of the hole's type; exports qualify for their
/// consuming cluster. Order: insertion distance, then same-scope
/// locals before enclosing declarations before fields, then name.
pub fn build_candidates(
    analysis: &Analysis,
    fspec: &FSpec,
    placed: &[(Location, &Sketch)],
    exports: &[ExportVar],
) -> Result<Vec<CandidateList>, AnalysisError> {
    let mut out = Vec::new();
    for (loc, sketch) in placed {
        let insert_line = analysis.location_line(loc)?;
        let visible = analysis.visible_vars(loc)?;
        for hole in &sketch.holes {
            let mut ranked: Vec<(u32, Category, String, CandidateVar)> = Vec::new();
            for v in &visible {
                if !v.must_initialized || !fspec.same_type(&v.type_name, &hole.type_name) {
                    continue;
                }
                ranked.push((
                    insert_line.abs_diff(v.decl_line),
                    categorize(analysis, loc, v),
                    v.name.clone(),
                    CandidateVar::Program(v.clone()),
                ));
            }
            for e in exports {
                if e.consumer_cluster != sketch.cluster_id
                    || !fspec.same_type(&e.type_name, &hole.type_name)
                {
                    continue;
                }
                ranked.push((
                    insert_line.abs_diff(e.decl_line),
                    e.category,
                    e.name.clone(),
                    CandidateVar::Export(e.clone()),
                ));
            }
            ranked.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
            out.push(CandidateList {
                hole_id: hole.hole_id,
                candidates: ranked.into_iter().map(|r| r.3).collect(),
            });
        }
    }
    Ok(out)
}

fn categorize(analysis: &Analysis, loc: &Location, v: &VarInfo) -> Category {
    match v.kind {
        VarKind::Field | VarKind::StaticField => Category::Field,
        VarKind::Param => Category::Enclosing,
        VarKind::Local => {
            let scope = analysis.scope(loc.scope).expect("placement was checked");
            let block =
                resolve_block_in(analysis.program(), &scope.block).expect("scope paths resolve");
            let before = &block.statements[scope.start..scope.start + loc.index.min(scope.len)];
            let here = before
                .iter()
                .any(|s| matches!(&s.kind, StmtKind::LocalDecl { name, .. } if *name == v.name));
            if here {
                Category::SameScope
            } else {
                Category::Enclosing
            }
        }
    }
}

/// Boolean encoding: one literal per (hole, candidate), an
/// at-least-one clause per hole, and equivalences tying literals that
/// denote the same variable.
#[derive(Debug, Clone)]
pub struct SelectionProblem {
    holes: Vec<ProblemHole>,
}

#[derive(Debug, Clone)]
struct ProblemHole {
    hole_id: u32,
    keys: Vec<String>,
    names: Vec<String>,
}

impl SelectionProblem {
    pub fn build(lists: &[CandidateList]) -> SelectionProblem {
        SelectionProblem {
            holes: lists
                .iter()
                .map(|l| ProblemHole {
                    hole_id: l.hole_id,
                    keys: l.candidates.iter().map(|c| c.key()).collect(),
                    names: l.candidates.iter().map(|c| c.name().to_string()).collect(),
                })
                .collect(),
        }
    }

    fn empty_holes(&self) -> Vec<u32> {
        self.holes
            .iter()
            .filter(|h| h.keys.is_empty())
            .map(|h| h.hole_id)
            .collect()
    }

    /// Distinct variable keys across all lists, sorted.
    fn universe(&self) -> Vec<String> {
        let set: BTreeSet<&String> = self.holes.iter().flat_map(|h| h.keys.iter()).collect();
        set.into_iter().cloned().collect()
    }

    /// Stable text form of the literals and both clause families.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for h in &self.holes {
            for (i, name) in h.names.iter().enumerate() {
                out.push_str(&format!(
                    "bool v{}_{} hole={} candidate={} var={}\n",
                    h.hole_id,
                    i + 1,
                    h.hole_id,
                    i + 1,
                    name
                ));
            }
        }
        for h in &self.holes {
            let lits: Vec<String> = (1..=h.keys.len())
                .map(|i| format!("v{}_{}", h.hole_id, i))
                .collect();
            out.push_str(&format!(
                "clause or hole={}: {}\n",
                h.hole_id,
                lits.join(" | ")
            ));
        }
        let mut by_key: BTreeMap<&String, Vec<(u32, usize)>> = BTreeMap::new();
        for h in &self.holes {
            for (i, key) in h.keys.iter().enumerate() {
                by_key.entry(key).or_default().push((h.hole_id, i + 1));
            }
        }
        for (key, lits) in &by_key {
            for pair in lits.windows(2) {
                out.push_str(&format!(
                    "clause eq: v{}_{} = v{}_{} var={}\n",
                    pair[0].0, pair[0].1, pair[1].0, pair[1].1, key
                ));
            }
        }
        out
    }
}

/// Literals set true by the minimal selection: every (hole, candidate
/// index) pair whose variable the solver picked.
pub fn solve_selection(problem: &SelectionProblem) -> Result<BTreeSet<(u32, usize)>, ResolveError> {
    let empty = problem.empty_holes();
    if !empty.is_empty() {
        return Err(ResolveError::Unsatisfiable(empty));
    }
    let universe = problem.universe();
    if problem.holes.is_empty() {
        return Ok(BTreeSet::new());
    }
    let var_index: BTreeMap<&String, usize> =
        universe.iter().enumerate().map(|(i, k)| (k, i)).collect();
    let hole_masks: Vec<u128> = problem
        .holes
        .iter()
        .map(|h| h.keys.iter().fold(0u128, |m, k| m | 1 << var_index[k]))
        .collect();

    // exhaustive search by selection size; the first size with a cover
    // is minimal
    for size in 1..=universe.len() {
        let mut best: Option<(usize, Vec<usize>)> = None;
        each_combination(universe.len(), size, |chosen| {
            let mask = chosen.iter().fold(0u128, |m, &i| m | 1 << i);
            if hole_masks.iter().any(|hm| hm & mask == 0) {
                return;
            }
            // prefer covers letting holes keep higher-ranked picks,
            // then lexicographically earlier variable names
            let summed_rank: usize = problem
                .holes
                .iter()
                .map(|h| {
                    h.keys
                        .iter()
                        .position(|k| mask >> var_index[k] & 1 == 1)
                        .expect("cover reaches every hole")
                })
                .sum();
            let entry = (summed_rank, chosen.to_vec());
            if best.as_ref().is_none_or(|b| entry < *b) {
                best = Some(entry);
            }
        });
        if let Some((_, chosen)) = best {
            let mask = chosen.iter().fold(0u128, |m, &i| m | 1 << i);
            let mut lits = BTreeSet::new();
            for h in &problem.holes {
                for (i, k) in h.keys.iter().enumerate() {
                    if mask >> var_index[k] & 1 == 1 {
                        lits.insert((h.hole_id, i));
                    }
                }
            }
            return Ok(lits);
        }
    }
    unreachable!("the full universe always covers non-empty lists")
}

fn each_combination(n: usize, size: usize, mut visit: impl FnMut(&[usize])) {
    if size > n {
        return;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        visit(&idx);
        let mut i = size;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - size {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resolution {
    pub assignment: BTreeMap<u32, CandidateVar>,
    /// Distinct variables across the whole assignment; minimal.
    pub distinct_count: usize,
}

/// Resolves every hole to the highest-ranked candidate the minimal
/// selection allows.
pub fn resolve(lists: &[CandidateList]) -> Result<Resolution, ResolveError> {
    let problem = SelectionProblem::build(lists);
    let selected = solve_selection(&problem)?;
    let mut assignment = BTreeMap::new();
    let mut used = BTreeSet::new();
    for list in lists {
        let (i, chosen) = list
            .candidates
            .iter()
            .enumerate()
            .find(|(i, _)| selected.contains(&(list.hole_id, *i)))
            .expect("selection covers every hole");
        let _ = i;
        used.insert(chosen.key());
        assignment.insert(list.hole_id, chosen.clone());
    }
    Ok(Resolution {
        distinct_count: used.len(),
        assignment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::analyze;
    use crate::fspec::{ApiKind, ApiNode, FSpec, SlotRole};
    use crate::minilang::{parse_source, MiniProgram};
    use crate::sketch::Hole;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn var(key: &str, name: &str) -> CandidateVar {
        CandidateVar::Export(ExportVar {
            channel: key.bytes().map(usize::from).sum(),
            consumer_cluster: 0,
            type_name: "T".into(),
            name: name.into(),
            decl_line: 1,
            category: Category::SameScope,
        })
    }

    fn list(hole_id: u32, vars: &[(&str, &str)]) -> CandidateList {
        CandidateList {
            hole_id,
            candidates: vars.iter().map(|(k, n)| var(k, n)).collect(),
        }
    }

    #[test]
    fn disjoint_singletons_use_one_variable_each() {
        let lists = [list(1, &[("a", "a")]), list(2, &[("b", "b")])];
        let r = resolve(&lists).unwrap();
        assert_eq!(r.distinct_count, 2);
        assert_eq!(r.assignment[&1].name(), "a");
        assert_eq!(r.assignment[&2].name(), "b");
    }

    #[test]
    fn shared_variable_collapses_the_selection() {
        let lists = [list(1, &[("a", "a"), ("v", "v")]), list(2, &[("v", "v"), ("b", "b")])];
        let r = resolve(&lists).unwrap();
        assert_eq!(r.distinct_count, 1);
        assert_eq!(r.assignment[&1].name(), "v");
        assert_eq!(r.assignment[&2].name(), "v");
    }

    #[test]
    fn lower_ranked_candidate_wins_when_its_variable_is_selected() {
        let lists = [list(1, &[("x", "x")]), list(2, &[("y", "y"), ("x", "x")])];
        let r = resolve(&lists).unwrap();
        assert_eq!(r.distinct_count, 1);
        assert_eq!(r.assignment[&2].name(), "x");
    }

    #[test]
    fn empty_list_is_unsatisfiable_and_names_the_hole() {
        let lists = [list(7, &[("a", "a")]), list(9, &[])];
        match resolve(&lists) {
            Err(ResolveError::Unsatisfiable(holes)) => assert_eq!(holes, vec![9]),
            other => panic!("expected Unsatisfiable, got {other:?}"),
        }
    }

    #[test]
    fn ties_fall_back_to_summed_rank_then_names() {
        // {a} and {b} both cover with summed rank 1; names pick a
        let lists = [list(1, &[("a", "a"), ("b", "b")]), list(2, &[("b", "b"), ("a", "a")])];
        let r = resolve(&lists).unwrap();
        assert_eq!(r.assignment[&1].name(), "a");
        assert_eq!(r.assignment[&2].name(), "a");
        // a strictly better summed rank beats name order
        let lists = [list(1, &[("b", "b"), ("a", "a")]), list(2, &[("b", "b"), ("a", "a")])];
        let r = resolve(&lists).unwrap();
        assert_eq!(r.assignment[&1].name(), "b");
        assert_eq!(r.assignment[&2].name(), "b");
    }

    #[test]
    fn problem_renders_stably() {
        let lists = [list(1, &[("a", "a"), ("v", "v")]), list(2, &[("v", "v")])];
        let text = SelectionProblem::build(&lists).render();
        assert_eq!(
            text,
            "bool v1_1 hole=1 candidate=1 var=a\n\
             bool v1_2 hole=1 candidate=2 var=v\n\
             bool v2_1 hole=2 candidate=1 var=v\n\
             clause or hole=1: v1_1 | v1_2\n\
             clause or hole=2: v2_1\n\
             clause eq: v1_2 = v2_1 var=export#v\n"
        );
    }

    #[test]
    fn random_instances_match_the_brute_force_minimum() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..60 {
            let holes = rng.gen_range(1..=4);
            let pool: Vec<String> = (0..rng.gen_range(1..=5))
                .map(|i| format!("w{i}"))
                .collect();
            let lists: Vec<CandidateList> = (0..holes)
                .map(|h| {
                    let mut picks = pool.clone();
                    let keep = rng.gen_range(1..=picks.len());
                    while picks.len() > keep {
                        let i = rng.gen_range(0..picks.len());
                        picks.remove(i);
                    }
                    CandidateList {
                        hole_id: h as u32 + 1,
                        candidates: picks.iter().map(|p| var(p, p)).collect(),
                    }
                })
                .collect();
            let got = resolve(&lists).unwrap();
            let oracle = brute_force_minimum(&lists);
            assert_eq!(got.distinct_count, oracle, "lists: {lists:#?}");
            for l in &lists {
                let chosen = &got.assignment[&l.hole_id];
                assert!(l.candidates.contains(chosen));
            }
        }
    }

    /// Minimum distinct variables over every per-hole choice.
    fn brute_force_minimum(lists: &[CandidateList]) -> usize {
        fn walk(lists: &[CandidateList], i: usize, used: &mut BTreeSet<String>, best: &mut usize) {
            if i == lists.len() {
                *best = (*best).min(used.len());
                return;
            }
            for c in &lists[i].candidates {
                let key = c.key();
                let added = used.insert(key.clone());
                walk(lists, i + 1, used, best);
                if added {
                    used.remove(&key);
                }
            }
        }
        let mut best = usize::MAX;
        walk(lists, 0, &mut BTreeSet::new(), &mut best);
        best
    }

    #[test]
    fn candidates_come_nearest_first_with_categories_breaking_ties() {
        let src = "package app;\n\
                   class Host {\n\
                   String title = \"t\";\n\
                   void run(String given) {\n\
                   String near = \"n\";\n\
                   int other = 0;\n\
                   String bare;\n\
                   if (other == 0) {\n\
                   String inner = \"i\";\n\
                   }\n\
                   }\n\
                   }\n";
        let program = MiniProgram {
            files: vec![parse_source(std::path::Path::new("host.mj"), src).unwrap()],
        };
        let analysis = analyze(&program);
        let mut fspec = FSpec {
            name: "t".into(),
            nodes: [(
                1,
                ApiNode {
                    id: 1,
                    kind: ApiKind::Static,
                    owner_type: "x.Api".into(),
                    member_name: "use".into(),
                    param_types: vec!["String".into()],
                    return_type: None,
                    annotation: "#Use".into(),
                },
            )]
            .into(),
            edges: vec![],
            start_ids: [1].into(),
            end_ids: [1].into(),
            aliases: [("String".to_string(), "java.lang.String".to_string())].into(),
        };
        fspec.validate().unwrap();
        let sketch = Sketch {
            cluster_id: 0,
            statements: vec![],
            holes: vec![Hole {
                hole_id: 1,
                type_name: "java.lang.String".into(),
                site: (0, 1),
                role: SlotRole::Argument,
            }],
        };
        // insertion point: end of run's outer scope (after the if)
        let run = (0..analysis.scopes.len())
            .map(|i| analysis.scope(i).unwrap())
            .find(|s| s.name.contains("run"))
            .map(|s| s.id)
            .unwrap();
        let len = analysis.scope(run).unwrap().len;
        let loc = Location {
            scope: run,
            index: len,
        };
        let exports = [ExportVar {
            channel: 0,
            consumer_cluster: 0,
            type_name: "java.lang.String".into(),
            name: "ip_v1".into(),
            decl_line: 5,
            category: Category::Field,
        }];
        let lists = build_candidates(&analysis, &fspec, &[(loc, &sketch)], &exports).unwrap();
        let names: Vec<&str> = lists[0].candidates.iter().map(|c| c.name()).collect();
        // insertion anchors at the closing brace (line 11): near and
        // the export tie at distance 6 and the same-scope category
        // wins; bare is closer but never assigned; inner is out of
        // scope; given and title trail by distance
        assert_eq!(names, vec!["near", "ip_v1", "given", "title"]);
        assert!(matches!(&lists[0].candidates[0], CandidateVar::Program(v)
            if v.kind == VarKind::Local));
    }
}
