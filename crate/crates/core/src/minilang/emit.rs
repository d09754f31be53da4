use super::*;

/// Renders a whole program back to text, one entry per source file, in file
/// order. Formatting is canonical: four-space indent, one statement per
/// line, members grouped as fields, methods, inner classes.
pub fn emit_program(program: &MiniProgram) -> Vec<(PathBuf, String)> {
    program
        .files
        .iter()
        .map(|f| (f.path.clone(), emit_file(f)))
        .collect()
}

pub fn emit_file(file: &SourceFile) -> String {
    let mut out = String::new();
    if !file.package_name.is_empty() {
        out.push_str(&format!("package {};\n\n", file.package_name));
    }
    if !file.imports.is_empty() {
        for imp in &file.imports {
            out.push_str(&format!("import {imp};\n"));
        }
        out.push('\n');
    }
    for class in &file.classes {
        emit_class(&mut out, class, 0);
    }
    out
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn emit_comments(out: &mut String, comments: &[String], level: usize) {
    for c in comments {
        indent(out, level);
        if c.is_empty() {
            out.push_str("//\n");
        } else {
            out.push_str(&format!("// {c}\n"));
        }
    }
}

fn emit_class(out: &mut String, class: &ClassDecl, level: usize) {
    emit_comments(out, &class.leading_comments, level);
    indent(out, level);
    out.push_str(&format!("class {} {{\n", class.simple_name));
    let mut first_section = true;
    if !class.fields.is_empty() {
        for field in &class.fields {
            emit_comments(out, &field.leading_comments, level + 1);
            indent(out, level + 1);
            if let Some(vis) = &field.visibility {
                out.push_str(vis);
                out.push(' ');
            }
            if field.is_static {
                out.push_str("static ");
            }
            out.push_str(&format!("{} {}", field.type_name, field.name));
            if let Some(init) = &field.initializer {
                out.push_str(" = ");
                emit_expr(out, init, 0);
            }
            out.push_str(";\n");
        }
        first_section = false;
    }
    for method in &class.methods {
        if !first_section {
            out.push('\n');
        }
        first_section = false;
        emit_comments(out, &method.leading_comments, level + 1);
        indent(out, level + 1);
        if let Some(vis) = &method.visibility {
            out.push_str(vis);
            out.push(' ');
        }
        if method.is_static {
            out.push_str("static ");
        }
        match &method.return_type {
            Some(t) => out.push_str(t),
            None => out.push_str("void"),
        }
        out.push_str(&format!(" {}(", method.simple_name));
        for (i, p) in method.params.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            out.push_str(&format!("{} {}", p.type_name, p.name));
        }
        out.push_str(") {\n");
        emit_block_body(out, &method.body, level + 2);
        indent(out, level + 1);
        out.push_str("}\n");
    }
    for inner in &class.inner_classes {
        if !first_section {
            out.push('\n');
        }
        first_section = false;
        emit_class(out, inner, level + 1);
    }
    emit_comments(out, &class.trailing_comments, level + 1);
    indent(out, level);
    out.push_str("}\n");
}

fn emit_block_body(out: &mut String, block: &Block, level: usize) {
    for stmt in &block.statements {
        emit_stmt(out, stmt, level);
    }
    emit_comments(out, &block.trailing_comments, level);
}

fn emit_stmt(out: &mut String, stmt: &Stmt, level: usize) {
    emit_comments(out, &stmt.leading_comments, level);
    indent(out, level);
    match &stmt.kind {
        StmtKind::LocalDecl {
            type_name,
            name,
            init,
        } => {
            out.push_str(&format!("{type_name} {name}"));
            if let Some(e) = init {
                out.push_str(" = ");
                emit_expr(out, e, 0);
            }
            out.push_str(";\n");
        }
        StmtKind::Assign { target, value } => {
            emit_expr(out, target, 0);
            out.push_str(" = ");
            emit_expr(out, value, 0);
            out.push_str(";\n");
        }
        StmtKind::Call(call) => {
            emit_call(out, call);
            out.push_str(";\n");
        }
        StmtKind::Return(value) => {
            out.push_str("return");
            if let Some(e) = value {
                out.push(' ');
                emit_expr(out, e, 0);
            }
            out.push_str(";\n");
        }
        StmtKind::If {
            cond,
            then_block,
            else_block,
        } => {
            out.push_str("if (");
            emit_expr(out, cond, 0);
            out.push_str(") {\n");
            emit_block_body(out, then_block, level + 1);
            indent(out, level);
            out.push('}');
            if let Some(else_block) = else_block {
                out.push_str(" else {\n");
                emit_block_body(out, else_block, level + 1);
                indent(out, level);
                out.push('}');
            }
            out.push('\n');
        }
        StmtKind::While { cond, body } => {
            out.push_str("while (");
            emit_expr(out, cond, 0);
            out.push_str(") {\n");
            emit_block_body(out, body, level + 1);
            indent(out, level);
            out.push_str("}\n");
        }
        StmtKind::ExprStmt(expr) => {
            emit_expr(out, expr, 0);
            out.push_str(";\n");
        }
    }
}

fn emit_call(out: &mut String, call: &CallExpr) {
    if let Some(recv) = &call.receiver {
        // postfix binds tighter than unary and binary operators
        emit_expr(out, recv, 8);
        out.push('.');
    }
    out.push_str(&format!("{}(", call.method));
    for (i, a) in call.args.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        emit_expr(out, a, 0);
    }
    out.push(')');
}

/// Emits `expr`, adding parentheses whenever its precedence is below the
/// context's minimum. The parser never records parentheses, so emission
/// re-derives exactly the set needed to re-parse to the same tree.
fn emit_expr(out: &mut String, expr: &Expr, min_prec: u8) {
    match expr {
        Expr::Int(v) => out.push_str(&v.to_string()),
        Expr::Double(s) => out.push_str(s),
        Expr::Str(s) => {
            out.push('"');
            for c in s.chars() {
                match c {
                    '"' => out.push_str("\\\""),
                    '\\' => out.push_str("\\\\"),
                    '\n' => out.push_str("\\n"),
                    '\t' => out.push_str("\\t"),
                    other => out.push(other),
                }
            }
            out.push('"');
        }
        Expr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Expr::Null => out.push_str("null"),
        Expr::Name(path) => out.push_str(&path.join(".")),
        Expr::Call(call) => emit_call(out, call),
        Expr::New { type_name, args } => {
            out.push_str(&format!("new {type_name}("));
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                emit_expr(out, a, 0);
            }
            out.push(')');
        }
        Expr::Index { base, index } => {
            emit_expr(out, base, 8);
            out.push('[');
            emit_expr(out, index, 0);
            out.push(']');
        }
        Expr::Unary { op, expr } => {
            // unary sits between the binary operators and postfix forms
            let need_paren = min_prec > 7;
            if need_paren {
                out.push('(');
            }
            out.push(match op {
                UnaryOp::Not => '!',
                UnaryOp::Neg => '-',
            });
            emit_expr(out, expr, 8);
            if need_paren {
                out.push(')');
            }
        }
        Expr::Binary { op, lhs, rhs } => {
            let prec = op.precedence();
            let need_paren = prec < min_prec;
            if need_paren {
                out.push('(');
            }
            emit_expr(out, lhs, prec);
            out.push_str(&format!(" {} ", op.symbol()));
            // left associative: right operand needs strictly higher precedence
            emit_expr(out, rhs, prec + 1);
            if need_paren {
                out.push(')');
            }
        }
    }
}
