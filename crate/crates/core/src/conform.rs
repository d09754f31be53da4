//! Conformance scoring: how completely a program realizes one
//! specification branch. API statements are matched by signature and
//! the branch's control/data dependencies are checked on the matched
//! occurrences; the score is matched over total elements.

use std::collections::{BTreeMap, BTreeSet};

use crate::analysis::{
    analyze, calls_in_stmt, each_expr_in_stmt, expr_type, lookup_var, Analysis, SyntaxPos, VarKey,
};
use crate::fspec::{ApiKind, ApiNode, Branch, DepKind, FSpec, FsEdge};
use crate::minilang::{CallExpr, Expr, MiniProgram, StmtKind};

/// Breakdown of one conformance check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Conformance {
    pub matched_nodes: usize,
    pub matched_edges: usize,
    pub total_nodes: usize,
    pub total_edges: usize,
}

impl Conformance {
    pub fn score(&self) -> f64 {
        let total = self.total_nodes + self.total_edges;
        if total == 0 {
            return 0.0;
        }
        (self.matched_nodes + self.matched_edges) as f64 / total as f64
    }
}

/// Evaluation-order position of one API occurrence.
type Occ = (usize, usize, usize);

/// One program occurrence matching a branch node's signature.
struct Hit {
    scope: usize,
    /// Absolute statement index in the scope's block.
    abs: usize,
    /// Evaluation order within the statement.
    ordinal: usize,
    /// Variable the produced value lands in, when the match is the
    /// statement's top-level value.
    bound: Option<VarKey>,
    receiver: Option<Expr>,
    args: Vec<Expr>,
}

impl Hit {
    fn occ(&self) -> Occ {
        (self.scope, self.abs, self.ordinal)
    }
}

/// Scores `program` against the branch: matched nodes and realized
/// control/data edges over the branch's totals. Occurrences are
/// assigned to nodes by exhaustive search, so the score is the best
/// reading of the program.
pub fn conformance(program: &MiniProgram, fspec: &FSpec, branch: &Branch) -> Conformance {
    let analysis = analyze(program);
    let node_set: BTreeSet<u32> = branch.node_ids.iter().copied().collect();
    let edges: Vec<&FsEdge> = fspec
        .edges
        .iter()
        .filter(|e| node_set.contains(&e.src) && node_set.contains(&e.dst))
        .collect();

    let mut hits: Vec<Hit> = Vec::new();
    let mut candidates: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
    for &id in &branch.node_ids {
        candidates.insert(id, Vec::new());
    }
    collect_hits(&analysis, fspec, branch, &mut hits, &mut candidates);

    let order: Vec<u32> = branch.node_ids.clone();
    let mut chosen: BTreeMap<u32, usize> = BTreeMap::new();
    let mut used: BTreeSet<Occ> = BTreeSet::new();
    let mut best = (0usize, 0usize);
    search(
        &analysis,
        fspec,
        &order,
        &candidates,
        &hits,
        &edges,
        0,
        &mut chosen,
        &mut used,
        &mut best,
    );

    Conformance {
        matched_nodes: best.0,
        matched_edges: best.1,
        total_nodes: branch.node_ids.len(),
        total_edges: edges.len(),
    }
}

#[allow(clippy::too_many_arguments)]
fn search(
    analysis: &Analysis,
    fspec: &FSpec,
    order: &[u32],
    candidates: &BTreeMap<u32, Vec<usize>>,
    hits: &[Hit],
    edges: &[&FsEdge],
    i: usize,
    chosen: &mut BTreeMap<u32, usize>,
    used: &mut BTreeSet<Occ>,
    best: &mut (usize, usize),
) {
    if i == order.len() {
        let matched_nodes = chosen.len();
        let matched_edges = edges
            .iter()
            .filter(|e| {
                let (Some(&a), Some(&b)) = (chosen.get(&e.src), chosen.get(&e.dst)) else {
                    return false;
                };
                edge_ok(analysis, fspec, &hits[a], fspec.node(e.src), &hits[b], e.kind)
            })
            .count();
        let better = (matched_nodes + matched_edges, matched_nodes)
            > (best.0 + best.1, best.0);
        if better {
            *best = (matched_nodes, matched_edges);
        }
        return;
    }
    let id = order[i];
    for &h in &candidates[&id] {
        if used.insert(hits[h].occ()) {
            chosen.insert(id, h);
            search(
                analysis, fspec, order, candidates, hits, edges, i + 1, chosen, used, best,
            );
            chosen.remove(&id);
            used.remove(&hits[h].occ());
        }
    }
    // also try leaving the node unmatched
    search(
        analysis, fspec, order, candidates, hits, edges, i + 1, chosen, used, best,
    );
}

fn edge_ok(
    analysis: &Analysis,
    fspec: &FSpec,
    src: &Hit,
    src_node: &ApiNode,
    dst: &Hit,
    kind: DepKind,
) -> bool {
    let ordered = if src.scope == dst.scope {
        (src.abs, src.ordinal) < (dst.abs, dst.ordinal)
    } else {
        analysis.executes_before(src.scope, dst.scope)
    };
    if !ordered {
        return false;
    }
    match kind {
        DepKind::Control => true,
        DepKind::Data => {
            let scope = &analysis.scopes[dst.scope];
            let pos = SyntaxPos {
                method: scope.method,
                block: &scope.block,
                index: dst.abs,
            };
            dst.receiver.iter().chain(dst.args.iter()).any(|e| {
                expr_carries(analysis, fspec, src, src_node, e, &pos, &mut BTreeSet::new(), 16)
            })
        }
    }
}

/// Whether evaluating `e` at `pos` can yield the value produced by the
/// `src` occurrence (or an equivalent occurrence of the same API).
#[allow(clippy::too_many_arguments)]
fn expr_carries(
    analysis: &Analysis,
    fspec: &FSpec,
    src: &Hit,
    src_node: &ApiNode,
    e: &Expr,
    pos: &SyntaxPos,
    visited: &mut BTreeSet<VarKey>,
    depth: usize,
) -> bool {
    if depth == 0 {
        return false;
    }
    let program = analysis.program();
    let index = &analysis.index;
    match e {
        Expr::Name(chain) => {
            let Some(key) = resolve_name_key(analysis, pos, chain) else {
                return false;
            };
            var_carries(analysis, fspec, src, src_node, &key, visited, depth)
        }
        Expr::New { .. } => match_expr(analysis, fspec, src_node, e, pos).is_some(),
        Expr::Call(call) => {
            if match_expr(analysis, fspec, src_node, e, pos).is_some() {
                return true;
            }
            // a program method's return value carries whatever its
            // return expressions carry
            let Some(callee) = crate::analysis::resolve_call(program, index, pos, call) else {
                return false;
            };
            for scope in analysis.scopes.iter().filter(|s| s.method == callee) {
                let Some(block) = crate::minilang::resolve_block_in(program, &scope.block) else {
                    continue;
                };
                for abs in scope.start..scope.start + scope.len {
                    if let StmtKind::Return(Some(r)) = &block.statements[abs].kind {
                        let rpos = SyntaxPos {
                            method: scope.method,
                            block: &scope.block,
                            index: abs,
                        };
                        if expr_carries(analysis, fspec, src, src_node, r, &rpos, visited, depth - 1)
                        {
                            return true;
                        }
                    }
                }
            }
            false
        }
        _ => false,
    }
}

/// Whether some reaching definition of `key` carries the source value.
fn var_carries(
    analysis: &Analysis,
    fspec: &FSpec,
    src: &Hit,
    src_node: &ApiNode,
    key: &VarKey,
    visited: &mut BTreeSet<VarKey>,
    depth: usize,
) -> bool {
    if src.bound.as_ref() == Some(key) {
        return true;
    }
    if !visited.insert(key.clone()) {
        return false;
    }
    let program = analysis.program();
    let index = &analysis.index;

    if let VarKey::Param { method, name } = key {
        let param_pos = index
            .method_decl(program, *method)
            .params
            .iter()
            .position(|p| p.name == *name);
        if let Some(i) = param_pos {
            for cs in analysis.call_sites.iter().filter(|c| c.callee == *method) {
                let scope = &analysis.scopes[cs.scope];
                let Some(block) = crate::minilang::resolve_block_in(program, &scope.block) else {
                    continue;
                };
                let stmt = &block.statements[cs.stmt_index];
                let calls = calls_in_stmt(stmt);
                let Some(arg) = calls.get(cs.order).and_then(|c| c.args.get(i)) else {
                    continue;
                };
                let cpos = SyntaxPos {
                    method: scope.method,
                    block: &scope.block,
                    index: cs.stmt_index,
                };
                if expr_carries(analysis, fspec, src, src_node, arg, &cpos, visited, depth - 1) {
                    return true;
                }
            }
        }
        return false;
    }

    for scope in &analysis.scopes {
        let Some(block) = crate::minilang::resolve_block_in(program, &scope.block) else {
            continue;
        };
        for abs in scope.start..scope.start + scope.len {
            let stmt = &block.statements[abs];
            let pos = SyntaxPos {
                method: scope.method,
                block: &scope.block,
                index: abs,
            };
            let defs = crate::analysis::stmt_defs(program, index, &pos, &stmt.kind);
            if !defs.iter().any(|(k, _)| k == key) {
                continue;
            }
            let rhs = match &stmt.kind {
                StmtKind::LocalDecl { init: Some(e), .. } => e,
                StmtKind::Assign { value, .. } => value,
                _ => continue,
            };
            if expr_carries(analysis, fspec, src, src_node, rhs, &pos, visited, depth - 1) {
                return true;
            }
        }
    }
    false
}

fn resolve_name_key(analysis: &Analysis, pos: &SyntaxPos, chain: &[String]) -> Option<VarKey> {
    let program = analysis.program();
    let index = &analysis.index;
    if let Some(first) = lookup_var(program, index, pos, &chain[0]) {
        if chain.len() == 1 {
            return Some(first.key);
        }
        let mut t = first.type_name;
        let mut key = first.key;
        for seg in &chain[1..] {
            let class = index.class_of_type(&t)?;
            let f = index.field_decl(program, class, seg)?;
            key = VarKey::Field {
                class,
                name: seg.clone(),
            };
            t = f.type_name.clone();
        }
        return Some(key);
    }
    // a leading class reference makes the rest a static field chain
    for split in (1..chain.len()).rev() {
        if let Some(class) = index.class_of_type(&chain[..split].join(".")) {
            let mut class = class;
            let mut key = None;
            let mut t: Option<String> = None;
            for seg in &chain[split..] {
                if let Some(prev) = t {
                    class = index.class_of_type(&prev)?;
                }
                let f = index.field_decl(program, class, seg)?;
                key = Some(VarKey::Field {
                    class,
                    name: seg.clone(),
                });
                t = Some(f.type_name.clone());
            }
            return key;
        }
    }
    None
}

fn collect_hits(
    analysis: &Analysis,
    fspec: &FSpec,
    branch: &Branch,
    hits: &mut Vec<Hit>,
    candidates: &mut BTreeMap<u32, Vec<usize>>,
) {
    let program = analysis.program();
    for scope in &analysis.scopes {
        let Some(block) = crate::minilang::resolve_block_in(program, &scope.block) else {
            continue;
        };
        for abs in scope.start..scope.start + scope.len {
            let stmt = &block.statements[abs];
            let pos = SyntaxPos {
                method: scope.method,
                block: &scope.block,
                index: abs,
            };
            let defs = crate::analysis::stmt_defs(program, &analysis.index, &pos, &stmt.kind);
            let top: Option<&Expr> = match &stmt.kind {
                StmtKind::LocalDecl { init: Some(e), .. } => Some(e),
                StmtKind::Assign { value, .. } => Some(value),
                _ => None,
            };
            let mut ordinal = 0usize;
            let mut visit = |e: &Expr| {
                ordinal += 1;
                for &id in &branch.node_ids {
                    let node = fspec.node(id);
                    if let Some((receiver, args)) = match_expr(analysis, fspec, node, e, &pos) {
                        let is_top = top.map(|t| std::ptr::eq(t, e)).unwrap_or(false);
                        hits.push(Hit {
                            scope: scope.id,
                            abs,
                            ordinal,
                            bound: if is_top {
                                defs.first().map(|(k, _)| k.clone())
                            } else {
                                None
                            },
                            receiver,
                            args,
                        });
                        candidates.get_mut(&id).expect("seeded").push(hits.len() - 1);
                    }
                }
            };
            each_expr_in_stmt(stmt, &mut visit);
            // a bare call statement holds its call outside any
            // expression node
            if let StmtKind::Call(call) = &stmt.kind {
                ordinal += 1;
                for &id in &branch.node_ids {
                    let node = fspec.node(id);
                    if let Some((receiver, args)) = match_call(analysis, fspec, node, call, &pos) {
                        hits.push(Hit {
                            scope: scope.id,
                            abs,
                            ordinal,
                            bound: None,
                            receiver,
                            args,
                        });
                        candidates.get_mut(&id).expect("seeded").push(hits.len() - 1);
                    }
                }
            }
        }
    }
}

/// Signature match of one expression against one API node; returns the
/// receiver and argument expressions on success.
fn match_expr(
    analysis: &Analysis,
    fspec: &FSpec,
    node: &ApiNode,
    e: &Expr,
    pos: &SyntaxPos,
) -> Option<(Option<Expr>, Vec<Expr>)> {
    match (node.kind, e) {
        (ApiKind::Constructor, Expr::New { type_name, args }) => {
            (fspec.same_type(type_name, &node.owner_type)
                && args.len() == node.param_types.len())
            .then(|| (None, args.clone()))
        }
        (ApiKind::Instance | ApiKind::Static, Expr::Call(call)) => {
            match_call(analysis, fspec, node, call, pos)
        }
        _ => None,
    }
}

fn match_call(
    analysis: &Analysis,
    fspec: &FSpec,
    node: &ApiNode,
    call: &CallExpr,
    pos: &SyntaxPos,
) -> Option<(Option<Expr>, Vec<Expr>)> {
    if call.method != node.member_name || call.args.len() != node.param_types.len() {
        return None;
    }
    let receiver = call.receiver.as_deref()?;
    match node.kind {
        ApiKind::Instance => {
            let t = api_type_of(analysis, pos, receiver)?;
            fspec
                .same_type(&t, &node.owner_type)
                .then(|| (Some(receiver.clone()), call.args.clone()))
        }
        ApiKind::Static => {
            let Expr::Name(path) = receiver else {
                return None;
            };
            let named = path.join(".");
            (fspec.same_type(&named, &node.owner_type)
                && resolve_name_key(analysis, pos, path).is_none())
            .then(|| (None, call.args.clone()))
        }
        ApiKind::Constructor => None,
    }
}

/// Type of an expression as the conformance matcher sees it: program
/// declarations first, then literal types.
fn api_type_of(analysis: &Analysis, pos: &SyntaxPos, e: &Expr) -> Option<String> {
    if let Some(t) = expr_type(analysis.program(), &analysis.index, pos, e) {
        return Some(t);
    }
    match e {
        Expr::Str(_) => Some("String".into()),
        Expr::Int(_) => Some("int".into()),
        Expr::Double(_) => Some("double".into()),
        Expr::Bool(_) => Some("boolean".into()),
        _ => None,
    }
}
