//! Variable visibility at insertion points.

use std::collections::BTreeMap;

use super::resolve::visible_locals;
use super::{Analysis, ResolvedVar, ScopeInfo, SyntaxPos, VarKey, VarKind};

/// A variable visible at an insertion point, with its definite-assignment
/// status there.
#[derive(Debug, Clone, PartialEq)]
pub struct VarInfo {
    pub name: String,
    pub type_name: String,
    pub kind: VarKind,
    pub key: VarKey,
    pub decl_line: u32,
    pub must_initialized: bool,
}

/// Locals declared before the point, parameters, then fields of the
/// enclosing class chain; inner declarations shadow outer ones by name.
/// Static methods do not see instance fields.
pub(crate) fn visible_vars(analysis: &Analysis, scope: &ScopeInfo, index: usize) -> Vec<VarInfo> {
    let program = analysis.program();
    let pidx = &analysis.index;
    let pos = SyntaxPos {
        method: scope.method,
        block: &scope.block,
        index: scope.start + index,
    };
    let method = pidx.method_decl(program, scope.method);
    let entry = &pidx.methods[scope.method];

    let mut by_name: BTreeMap<String, ResolvedVar> = BTreeMap::new();
    // outermost class first so inner declarations overwrite
    for class in pidx.enclosing_chain(entry.class).into_iter().rev() {
        let decl = pidx.class_decl(program, class);
        for field in &decl.fields {
            if method.is_static && !field.is_static {
                continue;
            }
            by_name.insert(
                field.name.clone(),
                ResolvedVar {
                    name: field.name.clone(),
                    type_name: field.type_name.clone(),
                    kind: if field.is_static {
                        VarKind::StaticField
                    } else {
                        VarKind::Field
                    },
                    key: VarKey::Field {
                        class,
                        name: field.name.clone(),
                    },
                    decl_line: field.line,
                },
            );
        }
    }
    for p in &method.params {
        by_name.insert(
            p.name.clone(),
            ResolvedVar {
                name: p.name.clone(),
                type_name: p.type_name.clone(),
                kind: VarKind::Param,
                key: VarKey::Param {
                    method: scope.method,
                    name: p.name.clone(),
                },
                decl_line: method.line,
            },
        );
    }
    for local in visible_locals(program, pidx, &pos) {
        by_name.insert(local.name.clone(), local);
    }

    let mut out: Vec<VarInfo> = by_name
        .into_values()
        .map(|v| {
            let must = analysis.must().is_must_init(&v.key, scope.id, index);
            VarInfo {
                name: v.name,
                type_name: v.type_name,
                kind: v.kind,
                key: v.key,
                decl_line: v.decl_line,
                must_initialized: must,
            }
        })
        .collect();
    out.sort_by(|a, b| {
        kind_rank(a.kind)
            .cmp(&kind_rank(b.kind))
            .then(a.decl_line.cmp(&b.decl_line))
            .then(a.name.cmp(&b.name))
    });
    out
}

fn kind_rank(kind: VarKind) -> u8 {
    match kind {
        VarKind::Local => 0,
        VarKind::Param => 1,
        VarKind::Field | VarKind::StaticField => 2,
    }
}
