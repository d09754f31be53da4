//! Must-initialization dataflow: which variables are definitely assigned
//! on every execution path reaching a given insertion point.
//!
//! Locals flow forward per method over structural edges with intersection
//! at merges; fields additionally flow through calls using per-method
//! summaries (fields every complete call definitely assigns) and entry
//! assumptions (the intersection of the states at all call sites, or just
//! the initializer-backed fields for methods never called).

use std::collections::{BTreeMap, BTreeSet};

use super::{stmt_defs, ProgramIndex, ScopeInfo, SyntaxPos, VarKey};
use crate::minilang::MiniProgram;

type State = BTreeSet<VarKey>;

pub(crate) struct MustInit {
    summaries: Vec<State>,
    scope_in_locals: Vec<State>,
    scope_in_fields: Vec<State>,
    stmt_local_gens: Vec<Vec<Vec<VarKey>>>,
    stmt_field_gens: Vec<Vec<Vec<VarKey>>>,
    stmt_callees: Vec<Vec<Vec<usize>>>,
    init_fields: State,
}

impl MustInit {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn build(
        program: &MiniProgram,
        index: &ProgramIndex,
        scopes: &[ScopeInfo],
        structural: &BTreeSet<(usize, usize)>,
        method_entry: &[usize],
        method_exits: &[Vec<usize>],
        call_sites: &[super::CallSite],
    ) -> MustInit {
        let mut init_fields = State::new();
        let mut all_fields = State::new();
        for (ci, _) in index.classes.iter().enumerate() {
            let decl = index.class_decl(program, ci);
            for field in &decl.fields {
                let key = VarKey::Field {
                    class: ci,
                    name: field.name.clone(),
                };
                if field.has_initializer() {
                    init_fields.insert(key.clone());
                }
                all_fields.insert(key);
            }
        }

        // per-statement generation tables, indexed by scope id and offset
        let mut stmt_local_gens = vec![Vec::new(); scopes.len()];
        let mut stmt_field_gens = vec![Vec::new(); scopes.len()];
        let mut stmt_callees = vec![Vec::new(); scopes.len()];
        let mut callee_at: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        for cs in call_sites {
            callee_at
                .entry((cs.scope, cs.stmt_index))
                .or_default()
                .push(cs.callee);
        }
        for scope in scopes {
            let block = crate::minilang::resolve_block_in(program, &scope.block)
                .expect("scope paths stay valid");
            for offset in 0..scope.len {
                let abs = scope.start + offset;
                let pos = SyntaxPos {
                    method: scope.method,
                    block: &scope.block,
                    index: abs,
                };
                let mut locals = Vec::new();
                let mut fields = Vec::new();
                for (key, _) in stmt_defs(program, index, &pos, &block.statements[abs].kind) {
                    match key {
                        VarKey::Field { .. } => fields.push(key),
                        _ => locals.push(key),
                    }
                }
                stmt_local_gens[scope.id].push(locals);
                stmt_field_gens[scope.id].push(fields);
                stmt_callees[scope.id].push(
                    callee_at.get(&(scope.id, abs)).cloned().unwrap_or_default(),
                );
            }
        }

        let mut preds: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (a, b) in structural {
            preds.entry(*b).or_default().push(*a);
        }

        let tables = Tables {
            scopes,
            preds: &preds,
            method_entry,
            stmt_local_gens: &stmt_local_gens,
            stmt_field_gens: &stmt_field_gens,
            stmt_callees: &stmt_callees,
        };

        // call summaries grow from empty to a least fixpoint
        let n_methods = method_entry.len();
        let mut summaries: Vec<State> = vec![State::new(); n_methods];
        loop {
            let mut changed = false;
            for m in 0..n_methods {
                let flow = tables.field_flow(m, &State::new(), &summaries);
                let mut exit: Option<State> = None;
                for &e in &method_exits[m] {
                    let out = flow.out_state(e, &tables, &summaries);
                    exit = Some(match exit {
                        None => out,
                        Some(prev) => prev.intersection(&out).cloned().collect(),
                    });
                }
                let exit = exit.unwrap_or_default();
                if exit != summaries[m] {
                    summaries[m] = exit;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        // entry assumptions shrink from everything to a greatest fixpoint
        let called: BTreeSet<usize> = call_sites.iter().map(|c| c.callee).collect();
        let mut entry_fields: Vec<State> = (0..n_methods)
            .map(|m| {
                if called.contains(&m) {
                    all_fields.clone()
                } else {
                    init_fields.clone()
                }
            })
            .collect();
        loop {
            let flows: Vec<Flow> = (0..n_methods)
                .map(|q| tables.field_flow(q, &entry_fields[q], &summaries))
                .collect();
            let mut changed = false;
            for &m in &called {
                let mut acc: Option<State> = None;
                for cs in call_sites.iter().filter(|c| c.callee == m) {
                    let scope = &scopes[cs.scope];
                    let mut before = flows[cs.caller].in_state(cs.scope);
                    for offset in 0..(cs.stmt_index - scope.start) {
                        before.extend(stmt_field_gens[cs.scope][offset].iter().cloned());
                        for &callee in &stmt_callees[cs.scope][offset] {
                            before.extend(summaries[callee].iter().cloned());
                        }
                    }
                    acc = Some(match acc {
                        None => before,
                        Some(prev) => prev.intersection(&before).cloned().collect(),
                    });
                }
                let acc = acc.unwrap_or_default();
                if acc != entry_fields[m] {
                    entry_fields[m] = acc;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        // freeze per-scope entry states for queries
        let mut scope_in_locals = vec![State::new(); scopes.len()];
        let mut scope_in_fields = vec![State::new(); scopes.len()];
        for m in 0..n_methods {
            let params: State = index
                .method_decl(program, m)
                .params
                .iter()
                .map(|p| VarKey::Param {
                    method: m,
                    name: p.name.clone(),
                })
                .collect();
            let lflow = tables.local_flow(m, &params);
            let fflow = tables.field_flow(m, &entry_fields[m], &summaries);
            for scope in scopes.iter().filter(|s| s.method == m) {
                scope_in_locals[scope.id] = lflow.in_state(scope.id);
                scope_in_fields[scope.id] = fflow.in_state(scope.id);
            }
        }

        MustInit {
            summaries,
            scope_in_locals,
            scope_in_fields,
            stmt_local_gens,
            stmt_field_gens,
            stmt_callees,
            init_fields,
        }
    }

    /// Whether `key` is definitely assigned just before insertion index
    /// `index` of `scope`.
    pub(crate) fn is_must_init(&self, key: &VarKey, scope: usize, index: usize) -> bool {
        match key {
            VarKey::Field { .. } => {
                if self.init_fields.contains(key) {
                    return true;
                }
                if self.scope_in_fields[scope].contains(key) {
                    return true;
                }
                for offset in 0..index {
                    if self.stmt_field_gens[scope][offset].contains(key) {
                        return true;
                    }
                    for &callee in &self.stmt_callees[scope][offset] {
                        if self.summaries[callee].contains(key) {
                            return true;
                        }
                    }
                }
                false
            }
            _ => {
                if self.scope_in_locals[scope].contains(key) {
                    return true;
                }
                (0..index).any(|offset| self.stmt_local_gens[scope][offset].contains(key))
            }
        }
    }
}

struct Tables<'a> {
    scopes: &'a [ScopeInfo],
    preds: &'a BTreeMap<usize, Vec<usize>>,
    method_entry: &'a [usize],
    stmt_local_gens: &'a [Vec<Vec<VarKey>>],
    stmt_field_gens: &'a [Vec<Vec<VarKey>>],
    stmt_callees: &'a [Vec<Vec<usize>>],
}

struct Flow {
    ins: BTreeMap<usize, State>,
    kind: FlowKind,
}

#[derive(Clone, Copy)]
enum FlowKind {
    Locals,
    Fields,
}

impl Flow {
    fn in_state(&self, scope: usize) -> State {
        self.ins.get(&scope).cloned().unwrap_or_default()
    }

    fn out_state(&self, scope: usize, tables: &Tables, summaries: &[State]) -> State {
        let mut state = self.in_state(scope);
        state.extend(tables.scope_gen(scope, self.kind, summaries));
        state
    }
}

impl Tables<'_> {
    fn scope_gen(&self, scope: usize, kind: FlowKind, summaries: &[State]) -> State {
        let mut gen = State::new();
        for offset in 0..self.scopes[scope].len {
            match kind {
                FlowKind::Locals => gen.extend(self.stmt_local_gens[scope][offset].iter().cloned()),
                FlowKind::Fields => {
                    gen.extend(self.stmt_field_gens[scope][offset].iter().cloned());
                    for &callee in &self.stmt_callees[scope][offset] {
                        gen.extend(summaries[callee].iter().cloned());
                    }
                }
            }
        }
        gen
    }

    fn local_flow(&self, method: usize, entry_state: &State) -> Flow {
        self.run(method, entry_state, FlowKind::Locals, &[])
    }

    fn field_flow(&self, method: usize, entry_state: &State, summaries: &[State]) -> Flow {
        self.run(method, entry_state, FlowKind::Fields, summaries)
    }

    /// Chaotic iteration of a forward must-analysis: merge by
    /// intersection, unvisited scopes act as top.
    fn run(&self, method: usize, entry_state: &State, kind: FlowKind, summaries: &[State]) -> Flow {
        let entry = self.method_entry[method];
        let mut ins: BTreeMap<usize, State> = BTreeMap::new();
        ins.insert(entry, entry_state.clone());
        let succs: Vec<(usize, usize)> = self
            .scopes
            .iter()
            .filter(|s| s.method == method)
            .flat_map(|s| {
                self.preds
                    .iter()
                    .filter(move |(to, _)| **to == s.id)
                    .flat_map(|(to, froms)| froms.iter().map(move |f| (*f, *to)))
            })
            .collect();
        let mut work = vec![entry];
        while let Some(s) = work.pop() {
            let mut out = ins[&s].clone();
            out.extend(self.scope_gen(s, kind, summaries));
            for &(from, to) in succs.iter().filter(|(f, _)| *f == s) {
                debug_assert_eq!(from, s);
                let updated = match ins.get(&to) {
                    None => Some(out.clone()),
                    Some(current) => {
                        let merged: State = current.intersection(&out).cloned().collect();
                        if merged != *current {
                            Some(merged)
                        } else {
                            None
                        }
                    }
                };
                if let Some(state) = updated {
                    ins.insert(to, state);
                    work.push(to);
                }
            }
        }
        Flow { ins, kind }
    }
}
