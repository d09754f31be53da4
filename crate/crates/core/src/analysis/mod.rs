//! Interprocedural program analysis over the mini-language: basic blocks,
//! a scope graph with control and data edges, execution-order reachability,
//! visibility and a must-initialization dataflow.

mod blocks;
mod index;
mod must_init;
mod resolve;
#[cfg(test)]
mod tests;
mod visible;

pub use blocks::ScopeInfo;
pub use index::{ClassEntry, ClassRef, MethodEntry, ProgramIndex};
pub use resolve::{
    calls_in_stmt, each_expr_in_stmt, expr_type, lookup_var, resolve_call, walk_expr, ResolvedVar,
    SyntaxPos, VarKey, VarKind,
};
pub use visible::VarInfo;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::minilang::{BlockPath, Expr, MiniProgram, StmtKind};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("unknown scope {0}")]
    UnknownScope(usize),
    #[error("invalid location: scope {scope} admits indices 0..={len}, got {index}")]
    InvalidLocation {
        scope: usize,
        index: usize,
        len: usize,
    },
}

/// An insertion point: before statement `index` of the scope's covered
/// range; `index == len` is the end of the scope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Location {
    pub scope: usize,
    pub index: usize,
}

/// A resolved call from one program method into another.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallSite {
    pub scope: usize,
    /// Absolute statement index within the scope's syntactic block.
    pub stmt_index: usize,
    /// Evaluation order of the call within its statement.
    pub order: usize,
    pub caller: usize,
    pub callee: usize,
    pub line: u32,
}

/// Analysis results for one program. Holds its own copy of the program so
/// queries cannot drift out of sync with the AST they were computed from.
pub struct Analysis {
    program: MiniProgram,
    pub index: ProgramIndex,
    pub scopes: Vec<ScopeInfo>,
    /// Structural plus interprocedural execution-order edges.
    pub control_edges: BTreeSet<(usize, usize)>,
    /// Cross-scope def-use pairs with the carried type.
    pub data_edges: BTreeSet<(usize, usize, String)>,
    pub call_sites: Vec<CallSite>,
    method_entry: Vec<usize>,
    method_exits: Vec<Vec<usize>>,
    reach: Vec<Vec<bool>>,
    must: must_init::MustInit,
}

/// Builds the full analysis for a parsed program.
pub fn analyze(program: &MiniProgram) -> Analysis {
    Analysis::of(program)
}

impl Analysis {
    pub fn of(program: &MiniProgram) -> Analysis {
        let program = program.clone();
        let index = ProgramIndex::build(&program);
        let mut scopes = Vec::new();
        let mut structural = BTreeSet::new();
        let mut method_entry = Vec::new();
        let mut method_exits = Vec::new();
        for (mi, entry) in index.methods.iter().enumerate() {
            let class = &index.classes[entry.class];
            let root = BlockPath::method_root(
                class.r.file,
                class.r.class_path.clone(),
                entry.method,
            );
            let decl = index.method_decl(&program, mi);
            let built = blocks::split_method(mi, decl, root, scopes.len());
            method_entry.push(built.entry);
            method_exits.push(built.exits);
            structural.extend(built.edges.iter().copied());
            scopes.extend(built.scopes);
        }

        let call_sites = collect_call_sites(&program, &index, &scopes);

        // control edges: structural flow, then call-transfer edges that
        // thread each scope's calls between it and its successors
        let mut control = structural.clone();
        for scope in &scopes {
            let sites: Vec<&CallSite> =
                call_sites.iter().filter(|c| c.scope == scope.id).collect();
            if sites.is_empty() {
                continue;
            }
            control.insert((scope.id, method_entry[sites[0].callee]));
            for pair in sites.windows(2) {
                for &exit in &method_exits[pair[0].callee] {
                    control.insert((exit, method_entry[pair[1].callee]));
                }
            }
            let successors: Vec<usize> = structural
                .iter()
                .filter(|(a, _)| *a == scope.id)
                .map(|(_, b)| *b)
                .collect();
            for &exit in &method_exits[sites.last().unwrap().callee] {
                for &succ in &successors {
                    control.insert((exit, succ));
                }
            }
        }

        let reach = closure(scopes.len(), &control);

        let must = must_init::MustInit::build(
            &program,
            &index,
            &scopes,
            &structural,
            &method_entry,
            &method_exits,
            &call_sites,
        );

        let data_edges = collect_data_edges(&program, &index, &scopes, &reach);

        Analysis {
            program,
            index,
            scopes,
            control_edges: control,
            data_edges,
            call_sites,
            method_entry,
            method_exits,
            reach,
            must,
        }
    }

    pub fn program(&self) -> &MiniProgram {
        &self.program
    }

    pub fn scope(&self, id: usize) -> Result<&ScopeInfo, AnalysisError> {
        self.scopes.get(id).ok_or(AnalysisError::UnknownScope(id))
    }

    /// True when some execution reaches `b` at or after `a`. Reflexively
    /// true: a scope executes no later than itself.
    pub fn executes_before(&self, a: usize, b: usize) -> bool {
        a == b || self.reach[a][b]
    }

    pub fn method_entry_scope(&self, method: usize) -> usize {
        self.method_entry[method]
    }

    pub fn method_exit_scopes(&self, method: usize) -> &[usize] {
        &self.method_exits[method]
    }

    /// The scope covering the tail of a method's root block: appending at
    /// its end appends at the end of the method body.
    pub fn method_final_scope(&self, method: usize) -> usize {
        let decl = self.index.method_decl(&self.program, method);
        let total = decl.body.statements.len();
        self.scopes
            .iter()
            .find(|s| {
                s.method == method && s.block.steps.is_empty() && s.start + s.len == total
            })
            .expect("every method has a root tail scope")
            .id
    }

    fn check_location(&self, loc: &Location) -> Result<&ScopeInfo, AnalysisError> {
        let scope = self.scope(loc.scope)?;
        if loc.index > scope.len {
            return Err(AnalysisError::InvalidLocation {
                scope: loc.scope,
                index: loc.index,
                len: scope.len,
            });
        }
        Ok(scope)
    }

    /// Source line a location anchors to: the line of the statement it
    /// precedes, or the closing position of its block.
    pub fn location_line(&self, loc: &Location) -> Result<u32, AnalysisError> {
        let scope = self.check_location(loc)?;
        let block = crate::minilang::resolve_block_in(&self.program, &scope.block)
            .expect("scope paths stay valid");
        let abs = scope.start + loc.index;
        Ok(if abs < block.statements.len() {
            block.statements[abs].line
        } else {
            block.end_line
        })
    }

    /// File hosting a location.
    pub fn location_file(&self, loc: &Location) -> Result<&std::path::Path, AnalysisError> {
        let scope = self.check_location(loc)?;
        Ok(self.program.files[scope.block.file].path.as_path())
    }

    pub fn method_of_location(&self, loc: &Location) -> Result<usize, AnalysisError> {
        Ok(self.check_location(loc)?.method)
    }

    /// Variables visible at a location with their initialization status.
    pub fn visible_vars(&self, loc: &Location) -> Result<Vec<VarInfo>, AnalysisError> {
        let scope = self.check_location(loc)?.clone();
        Ok(visible::visible_vars(self, &scope, loc.index))
    }

    pub(crate) fn must(&self) -> &must_init::MustInit {
        &self.must
    }

    /// Efferent/afferent coupling of one method: how many distinct
    /// methods it calls, and how many distinct methods call it.
    pub fn method_coupling(&self, method: usize) -> (usize, usize) {
        let callees: BTreeSet<usize> = self
            .call_sites
            .iter()
            .filter(|c| c.caller == method)
            .map(|c| c.callee)
            .collect();
        let callers: BTreeSet<usize> = self
            .call_sites
            .iter()
            .filter(|c| c.callee == method)
            .map(|c| c.caller)
            .collect();
        (callees.len(), callers.len())
    }

    /// Deterministic textual listing of the scope graph: one record per
    /// scope and per edge.
    pub fn listing(&self) -> String {
        let mut out = String::new();
        for scope in &self.scopes {
            let file = self.program.files[scope.block.file].path.display();
            let line = self
                .location_line(&Location {
                    scope: scope.id,
                    index: 0,
                })
                .unwrap();
            out.push_str(&format!(
                "scope {} file={} line={} stmts={}\n",
                scope.name, file, line, scope.len
            ));
        }
        for (a, b) in &self.control_edges {
            out.push_str(&format!(
                "edge {} {} kind=control\n",
                self.scopes[*a].name, self.scopes[*b].name
            ));
        }
        for (a, b, t) in &self.data_edges {
            out.push_str(&format!(
                "edge {} {} kind=data type={}\n",
                self.scopes[*a].name, self.scopes[*b].name, t
            ));
        }
        out
    }
}

fn closure(n: usize, edges: &BTreeSet<(usize, usize)>) -> Vec<Vec<bool>> {
    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, b) in edges {
        succ[*a].push(*b);
    }
    let mut reach = vec![vec![false; n]; n];
    for s in 0..n {
        let mut work = succ[s].clone();
        while let Some(t) = work.pop() {
            if !reach[s][t] {
                reach[s][t] = true;
                work.extend(succ[t].iter().copied());
            }
        }
    }
    reach
}

fn collect_call_sites(
    program: &MiniProgram,
    index: &ProgramIndex,
    scopes: &[ScopeInfo],
) -> Vec<CallSite> {
    let mut out = Vec::new();
    for scope in scopes {
        let block = crate::minilang::resolve_block_in(program, &scope.block)
            .expect("scope paths stay valid");
        for offset in 0..scope.len {
            let abs = scope.start + offset;
            let stmt = &block.statements[abs];
            let pos = SyntaxPos {
                method: scope.method,
                block: &scope.block,
                index: abs,
            };
            for (order, call) in calls_in_stmt(stmt).into_iter().enumerate() {
                if let Some(callee) = resolve_call(program, index, &pos, call) {
                    out.push(CallSite {
                        scope: scope.id,
                        stmt_index: abs,
                        order,
                        caller: scope.method,
                        callee,
                        line: stmt.line,
                    });
                }
            }
        }
    }
    out
}

fn collect_data_edges(
    program: &MiniProgram,
    index: &ProgramIndex,
    scopes: &[ScopeInfo],
    reach: &[Vec<bool>],
) -> BTreeSet<(usize, usize, String)> {
    // scope-level def and use sets
    let mut defs: Vec<BTreeMap<VarKey, String>> = vec![BTreeMap::new(); scopes.len()];
    let mut uses: Vec<BTreeSet<VarKey>> = vec![BTreeSet::new(); scopes.len()];
    for scope in scopes {
        let block = crate::minilang::resolve_block_in(program, &scope.block)
            .expect("scope paths stay valid");
        let method = index.method_decl(program, scope.method);
        if scope.id == entry_scope_of(scopes, scope.method) {
            for p in &method.params {
                defs[scope.id].insert(
                    VarKey::Param {
                        method: scope.method,
                        name: p.name.clone(),
                    },
                    p.type_name.clone(),
                );
            }
        }
        for offset in 0..scope.len {
            let abs = scope.start + offset;
            let stmt = &block.statements[abs];
            let pos = SyntaxPos {
                method: scope.method,
                block: &scope.block,
                index: abs,
            };
            for (key, ty) in stmt_defs(program, index, &pos, &stmt.kind) {
                defs[scope.id].insert(key, ty);
            }
            for key in stmt_uses(program, index, &pos, &stmt.kind) {
                uses[scope.id].insert(key);
            }
        }
    }
    let mut edges = BTreeSet::new();
    for d in 0..scopes.len() {
        for (key, ty) in &defs[d] {
            for u in 0..scopes.len() {
                if d != u && reach[d][u] && uses[u].contains(key) {
                    edges.insert((d, u, ty.clone()));
                }
            }
        }
    }
    edges
}

fn entry_scope_of(scopes: &[ScopeInfo], method: usize) -> usize {
    scopes
        .iter()
        .find(|s| s.method == method)
        .expect("method has scopes")
        .id
}

/// Definitions a statement makes once it completes.
pub(crate) fn stmt_defs(
    program: &MiniProgram,
    index: &ProgramIndex,
    pos: &SyntaxPos,
    kind: &StmtKind,
) -> Vec<(VarKey, String)> {
    match kind {
        StmtKind::LocalDecl {
            type_name,
            name,
            init: Some(_),
        } => vec![(
            VarKey::Local {
                method: pos.method,
                name: name.clone(),
            },
            type_name.clone(),
        )],
        StmtKind::Assign {
            target: Expr::Name(path),
            ..
        } => match resolve_name_chain(program, index, pos, path) {
            Some(links) => links
                .last()
                .map(|v| vec![(v.key.clone(), v.type_name.clone())])
                .unwrap_or_default(),
            None => Vec::new(),
        },
        _ => Vec::new(),
    }
}

/// Variables a statement reads.
pub(crate) fn stmt_uses(
    program: &MiniProgram,
    index: &ProgramIndex,
    pos: &SyntaxPos,
    kind: &StmtKind,
) -> Vec<VarKey> {
    let mut out = Vec::new();
    let mut collect = |expr: &Expr| {
        if let Expr::Name(path) = expr {
            if let Some(links) = resolve_name_chain(program, index, pos, path) {
                out.extend(links.into_iter().map(|v| v.key));
            }
        }
    };
    match kind {
        StmtKind::Assign { target, value } => {
            // reads feeding the write, plus the prefix of a field target
            walk_expr(value, &mut collect);
            match target {
                Expr::Name(path) if path.len() > 1 => {
                    if let Some(links) =
                        resolve_name_chain(program, index, pos, &path[..path.len() - 1])
                    {
                        out.extend(links.into_iter().map(|v| v.key));
                    }
                }
                Expr::Name(_) => {}
                other => walk_expr(other, &mut collect),
            }
        }
        other => {
            let stmt = crate::minilang::Stmt {
                kind: other.clone(),
                line: 0,
                leading_comments: Vec::new(),
            };
            resolve::each_expr_in_stmt(&stmt, &mut collect);
        }
    }
    out
}

/// Resolves a dotted path to the chain of variables it reads: a leading
/// local/param/field, then one field per extra segment while the types
/// keep resolving to program classes. Static accesses through a class
/// name yield just the field links.
fn resolve_name_chain(
    program: &MiniProgram,
    index: &ProgramIndex,
    pos: &SyntaxPos,
    path: &[String],
) -> Option<Vec<ResolvedVar>> {
    let mut links = Vec::new();
    let rest: &[String];
    let mut current_type: String;
    if let Some(first) = lookup_var(program, index, pos, &path[0]) {
        current_type = first.type_name.clone();
        links.push(first);
        rest = &path[1..];
    } else {
        // a class-qualified static access like C.field
        let class = index.class_of_type(&path[0])?;
        if path.len() < 2 {
            return None;
        }
        let field = index.field_decl(program, class, &path[1])?;
        current_type = field.type_name.clone();
        links.push(ResolvedVar {
            name: path[1].clone(),
            type_name: field.type_name.clone(),
            kind: if field.is_static {
                VarKind::StaticField
            } else {
                VarKind::Field
            },
            key: VarKey::Field {
                class,
                name: path[1].clone(),
            },
            decl_line: field.line,
        });
        rest = &path[2..];
    }
    for seg in rest {
        let class = match index.class_of_type(&current_type) {
            Some(c) => c,
            None => break,
        };
        let field = match index.field_decl(program, class, seg) {
            Some(f) => f,
            None => break,
        };
        links.push(ResolvedVar {
            name: seg.clone(),
            type_name: field.type_name.clone(),
            kind: if field.is_static {
                VarKind::StaticField
            } else {
                VarKind::Field
            },
            key: VarKey::Field {
                class,
                name: seg.clone(),
            },
            decl_line: field.line,
        });
        current_type = field.type_name.clone();
    }
    Some(links)
}
