use crate::minilang::{
    Block, BlockPath, BlockStep, CallExpr, Expr, MiniProgram, Stmt, StmtKind,
};

use super::index::ProgramIndex;

/// Identity of a program variable, stable across scopes and statements.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum VarKey {
    Local { method: usize, name: String },
    Param { method: usize, name: String },
    Field { class: usize, name: String },
}

impl VarKey {
    pub fn display(&self, index: &ProgramIndex) -> String {
        match self {
            VarKey::Local { method, name } | VarKey::Param { method, name } => {
                format!("{}:{}", index.methods[*method].qualified_name, name)
            }
            VarKey::Field { class, name } => {
                format!("{}.{}", index.classes[*class].qualified_name, name)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Local,
    Param,
    Field,
    StaticField,
}

/// A name resolved at some program point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedVar {
    pub name: String,
    pub type_name: String,
    pub kind: VarKind,
    pub key: VarKey,
    pub decl_line: u32,
}

/// A syntactic position: before statement `index` of `block` (so
/// `index == len` means the block end). Used for name visibility.
#[derive(Debug, Clone)]
pub struct SyntaxPos<'a> {
    pub method: usize,
    pub block: &'a BlockPath,
    pub index: usize,
}

/// Resolves `name` as seen from `pos`: innermost local first, then
/// parameters, then fields of the enclosing class chain.
pub fn lookup_var(
    program: &MiniProgram,
    index: &ProgramIndex,
    pos: &SyntaxPos,
    name: &str,
) -> Option<ResolvedVar> {
    let method_entry = &index.methods[pos.method];
    let method = index.method_decl(program, pos.method);
    // walk from the root block down, keeping the innermost match
    let mut found: Option<ResolvedVar> = None;
    let mut block: &Block = &method.body;
    let mut steps = pos.block.steps.iter().peekable();
    loop {
        let limit = match steps.peek() {
            Some(step) => step_index(step),
            None => pos.index,
        };
        for stmt in block.statements.iter().take(limit) {
            if let StmtKind::LocalDecl {
                type_name,
                name: decl_name,
                ..
            } = &stmt.kind
            {
                if decl_name == name {
                    found = Some(ResolvedVar {
                        name: name.to_string(),
                        type_name: type_name.clone(),
                        kind: VarKind::Local,
                        key: VarKey::Local {
                            method: pos.method,
                            name: name.to_string(),
                        },
                        decl_line: stmt.line,
                    });
                }
            }
        }
        match steps.next() {
            Some(step) => block = enter(block, step),
            None => break,
        }
    }
    if found.is_some() {
        return found;
    }
    if let Some(p) = method.params.iter().find(|p| p.name == name) {
        return Some(ResolvedVar {
            name: name.to_string(),
            type_name: p.type_name.clone(),
            kind: VarKind::Param,
            key: VarKey::Param {
                method: pos.method,
                name: name.to_string(),
            },
            decl_line: method.line,
        });
    }
    for class in index.enclosing_chain(method_entry.class) {
        if let Some(field) = index.field_decl(program, class, name) {
            return Some(ResolvedVar {
                name: name.to_string(),
                type_name: field.type_name.clone(),
                kind: if field.is_static {
                    VarKind::StaticField
                } else {
                    VarKind::Field
                },
                key: VarKey::Field {
                    class,
                    name: name.to_string(),
                },
                decl_line: field.line,
            });
        }
    }
    None
}

fn step_index(step: &BlockStep) -> usize {
    match step {
        BlockStep::Then(i) | BlockStep::Else(i) | BlockStep::WhileBody(i) => *i,
    }
}

fn enter<'a>(block: &'a Block, step: &BlockStep) -> &'a Block {
    match step {
        BlockStep::Then(i) => match &block.statements[*i].kind {
            StmtKind::If { then_block, .. } => then_block,
            _ => unreachable!("path validated at construction"),
        },
        BlockStep::Else(i) => match &block.statements[*i].kind {
            StmtKind::If { else_block, .. } => else_block.as_ref().unwrap(),
            _ => unreachable!("path validated at construction"),
        },
        BlockStep::WhileBody(i) => match &block.statements[*i].kind {
            StmtKind::While { body, .. } => body,
            _ => unreachable!("path validated at construction"),
        },
    }
}

/// Every local declaration lexically visible from `pos`, outermost first.
pub fn visible_locals(
    program: &MiniProgram,
    index: &ProgramIndex,
    pos: &SyntaxPos,
) -> Vec<ResolvedVar> {
    let method = index.method_decl(program, pos.method);
    let mut out = Vec::new();
    let mut block: &Block = &method.body;
    let mut steps = pos.block.steps.iter().peekable();
    loop {
        let limit = match steps.peek() {
            Some(step) => step_index(step),
            None => pos.index,
        };
        for stmt in block.statements.iter().take(limit) {
            if let StmtKind::LocalDecl {
                type_name,
                name,
                ..
            } = &stmt.kind
            {
                out.push(ResolvedVar {
                    name: name.clone(),
                    type_name: type_name.clone(),
                    kind: VarKind::Local,
                    key: VarKey::Local {
                        method: pos.method,
                        name: name.clone(),
                    },
                    decl_line: stmt.line,
                });
            }
        }
        match steps.next() {
            Some(step) => block = enter(block, step),
            None => break,
        }
    }
    out
}

/// Type of an expression, to the extent the opaque type system can tell:
/// variable chains, constructions, calls into program methods, indexing.
pub fn expr_type(
    program: &MiniProgram,
    index: &ProgramIndex,
    pos: &SyntaxPos,
    expr: &Expr,
) -> Option<String> {
    match expr {
        Expr::Name(path) => {
            let first = lookup_var(program, index, pos, &path[0])?;
            let mut t = first.type_name;
            for seg in &path[1..] {
                let class = index.class_of_type(&t)?;
                t = index.field_decl(program, class, seg)?.type_name.clone();
            }
            Some(t)
        }
        Expr::New { type_name, .. } => Some(type_name.clone()),
        Expr::Call(call) => {
            let callee = resolve_call(program, index, pos, call)?;
            index.method_decl(program, callee).return_type.clone()
        }
        Expr::Index { base, .. } => {
            let t = expr_type(program, index, pos, base)?;
            t.strip_suffix("[]").map(str::to_string)
        }
        _ => None,
    }
}

/// Monomorphic name-based call resolution. Returns the target method
/// entry when the call lands on a program method; external API calls
/// resolve to `None`.
pub fn resolve_call(
    program: &MiniProgram,
    index: &ProgramIndex,
    pos: &SyntaxPos,
    call: &CallExpr,
) -> Option<usize> {
    match &call.receiver {
        None => {
            let class = index.methods[pos.method].class;
            index
                .method_in_chain(class, &call.method)
                .or_else(|| index.sole_method_named(&call.method))
        }
        Some(receiver) => {
            if let Expr::Name(path) = receiver.as_ref() {
                // prefer a variable in scope; else treat the path as a class
                if lookup_var(program, index, pos, &path[0]).is_none() {
                    let as_class = index
                        .class_of_type(&path.join("."))
                        .or_else(|| {
                            if path.len() == 1 {
                                index.class_of_type(&path[0])
                            } else {
                                None
                            }
                        });
                    if let Some(class) = as_class {
                        return method_on(index, class, &call.method);
                    }
                    return None;
                }
            }
            let t = expr_type(program, index, pos, receiver)?;
            let class = index.class_of_type(&t)?;
            method_on(index, class, &call.method)
        }
    }
}

fn method_on(index: &ProgramIndex, class: usize, simple_name: &str) -> Option<usize> {
    index
        .methods
        .iter()
        .position(|m| m.class == class && m.simple_name == simple_name)
}

/// Calls inside one statement in evaluation order: receivers before
/// arguments, arguments before the call that consumes them.
pub fn calls_in_stmt(stmt: &Stmt) -> Vec<&CallExpr> {
    let mut out = Vec::new();
    each_expr_in_stmt(stmt, &mut |e| {
        if let Expr::Call(c) = e {
            out.push(c);
        }
    });
    // a call statement holds its call outside any expression node; it
    // evaluates last, after receiver and argument subexpressions
    if let StmtKind::Call(call) = &stmt.kind {
        out.push(call);
    }
    out
}

/// Post-order walk over every expression in a statement (not descending
/// into nested blocks; block statements are walked by their own scopes).
pub fn each_expr_in_stmt<'a>(stmt: &'a Stmt, f: &mut impl FnMut(&'a Expr)) {
    match &stmt.kind {
        StmtKind::LocalDecl { init, .. } => {
            if let Some(e) = init {
                walk_expr(e, f);
            }
        }
        StmtKind::Assign { target, value } => {
            // the target is walked too; def/use extraction special-cases it
            walk_expr(target, f);
            walk_expr(value, f);
        }
        StmtKind::Call(call) => walk_call(call, f),
        StmtKind::Return(Some(e)) => walk_expr(e, f),
        StmtKind::Return(None) => {}
        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => walk_expr(cond, f),
        StmtKind::ExprStmt(e) => walk_expr(e, f),
    }
}

fn walk_call<'a>(call: &'a CallExpr, f: &mut impl FnMut(&'a Expr)) {
    if let Some(r) = &call.receiver {
        walk_expr(r, f);
    }
    for a in &call.args {
        walk_expr(a, f);
    }
}

pub fn walk_expr<'a>(expr: &'a Expr, f: &mut impl FnMut(&'a Expr)) {
    match expr {
        Expr::Call(call) => walk_call(call, f),
        Expr::New { args, .. } => {
            for a in args {
                walk_expr(a, f);
            }
        }
        Expr::Index { base, index } => {
            walk_expr(base, f);
            walk_expr(index, f);
        }
        Expr::Unary { expr: inner, .. } => walk_expr(inner, f),
        Expr::Binary { lhs, rhs, .. } => {
            walk_expr(lhs, f);
            walk_expr(rhs, f);
        }
        _ => {}
    }
    f(expr);
}
