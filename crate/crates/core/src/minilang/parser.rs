use std::collections::BTreeSet;
use std::path::Path;

use super::lexer::{lex, Tok, Token};
use super::*;

/// Parses every `.mj` file under `root` (recursively, path-sorted) and
/// validates cross-file class uniqueness.
pub fn parse_program(root: &Path) -> Result<MiniProgram, ParseError> {
    let sources = collect_sources(root)?;
    let mut files = Vec::new();
    for (path, text) in sources {
        files.push(parse_source(&path, &text)?);
    }
    let program = MiniProgram { files };
    let mut seen = BTreeSet::new();
    for class in program.all_classes() {
        if !seen.insert(class.qualified_name.clone()) {
            return Err(ParseError::DuplicateClass(class.qualified_name.clone()));
        }
    }
    Ok(program)
}

/// Parses a single file from disk.
pub fn parse_file(path: &Path) -> Result<SourceFile, ParseError> {
    let text = std::fs::read_to_string(path).map_err(|e| ParseError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_source(path, &text)
}

/// Parses file contents; `path` is used for positions and error messages.
pub fn parse_source(path: &Path, text: &str) -> Result<SourceFile, ParseError> {
    let file_name = path.display().to_string();
    let tokens = lex(&file_name, text)?;
    let mut parser = Parser {
        file: file_name,
        tokens,
        pos: 0,
    };
    parser.file_decl(path, text)
}

struct Parser {
    file: String,
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_line(&self) -> u32 {
        self.tokens[self.pos].line
    }

    /// Next non-comment token without consuming anything.
    fn peek_code(&self) -> &Tok {
        let mut i = self.pos;
        while let Tok::Comment(_) = &self.tokens[i].tok {
            i += 1;
        }
        &self.tokens[i].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.tokens[self.pos].tok.clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> Result<T, ParseError> {
        Err(ParseError::Syntax {
            file: self.file.clone(),
            line: self.peek_line(),
            expected: expected.to_string(),
            found: self.peek().describe(),
        })
    }

    fn take_comments(&mut self) -> Vec<String> {
        let mut out = Vec::new();
        while let Tok::Comment(c) = self.peek() {
            out.push(c.clone());
            self.bump();
        }
        out
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if matches!(self.peek(), Tok::Punct(q) if *q == p) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> Result<(), ParseError> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            self.error(&format!("`{p}`"))
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        if matches!(self.peek(), Tok::Ident(s) if s == kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, u32), ParseError> {
        let line = self.peek_line();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok((s, line))
            }
            _ => self.error(what),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn file_decl(&mut self, path: &Path, text: &str) -> Result<SourceFile, ParseError> {
        self.take_comments();
        let package_name = if self.eat_keyword("package") {
            let p = self.dotted_path()?;
            self.expect_punct(";")?;
            p
        } else {
            String::new()
        };
        let mut imports = Vec::new();
        let lead = loop {
            let comments = self.take_comments();
            if self.eat_keyword("import") {
                let mut p = self.dotted_path()?;
                if matches!(self.peek(), Tok::Punct("."))
                    && matches!(&self.tokens[self.pos + 1].tok, Tok::Punct("*"))
                {
                    self.bump();
                    self.bump();
                    p.push_str(".*");
                }
                self.expect_punct(";")?;
                imports.push(p);
            } else {
                break comments;
            }
        };
        if !self.at_keyword("class") {
            return self.error("`class`");
        }
        let outer_prefix = if package_name.is_empty() {
            String::new()
        } else {
            format!("{package_name}.")
        };
        let class = self.class_decl(&outer_prefix, lead)?;
        self.take_comments();
        if !matches!(self.peek(), Tok::Eof) {
            return self.error("end of file (one top-level class per file)");
        }
        Ok(SourceFile {
            path: path.to_path_buf(),
            package_name,
            imports,
            classes: vec![class],
            raw_text: text.to_string(),
        })
    }

    fn dotted_path(&mut self) -> Result<String, ParseError> {
        let (first, _) = self.expect_ident("identifier")?;
        let mut out = first;
        while matches!(self.peek(), Tok::Punct(".")) {
            // only consume the dot when an identifier follows (not `.*`)
            if let Tok::Ident(_) = &self.tokens[self.pos + 1].tok {
                self.bump();
                let (seg, _) = self.expect_ident("identifier")?;
                out.push('.');
                out.push_str(&seg);
            } else {
                break;
            }
        }
        Ok(out)
    }

    fn class_decl(&mut self, prefix: &str, lead: Vec<String>) -> Result<ClassDecl, ParseError> {
        let line = self.peek_line();
        if !self.eat_keyword("class") {
            return self.error("`class`");
        }
        let (simple_name, _) = self.expect_ident("class name")?;
        let qualified_name = format!("{prefix}{simple_name}");
        self.expect_punct("{")?;
        let mut fields: Vec<FieldDecl> = Vec::new();
        let mut methods = Vec::new();
        let mut inner_classes = Vec::new();
        let trailing_comments;
        loop {
            let member_lead = self.take_comments();
            if self.eat_punct("}") {
                trailing_comments = member_lead;
                break;
            }
            if self.at_keyword("class") {
                let inner = self.class_decl(&format!("{qualified_name}."), member_lead)?;
                inner_classes.push(inner);
                continue;
            }
            self.member_decl(&qualified_name, member_lead, &mut fields, &mut methods)?;
        }
        for (i, f) in fields.iter().enumerate() {
            if fields[..i].iter().any(|g| g.name == f.name) {
                return Err(ParseError::DuplicateField {
                    class: qualified_name.clone(),
                    field: f.name.clone(),
                });
            }
        }
        Ok(ClassDecl {
            qualified_name,
            simple_name,
            fields,
            methods,
            inner_classes,
            line,
            leading_comments: lead,
            trailing_comments,
        })
    }

    fn member_decl(
        &mut self,
        class_qname: &str,
        lead: Vec<String>,
        fields: &mut Vec<FieldDecl>,
        methods: &mut Vec<MethodDecl>,
    ) -> Result<(), ParseError> {
        let line = self.peek_line();
        let mut visibility = None;
        for vis in ["public", "private", "protected"] {
            if self.at_keyword(vis) {
                visibility = Some(vis.to_string());
                self.bump();
                break;
            }
        }
        let is_static = self.eat_keyword("static");
        let ret_or_type = if self.eat_keyword("void") {
            None
        } else {
            Some(self.type_name()?)
        };
        let (name, _) = self.expect_ident("member name")?;
        if matches!(self.peek(), Tok::Punct("(")) {
            let qualified_name = format!("{class_qname}.{name}");
            self.bump();
            let mut params = Vec::new();
            if !self.eat_punct(")") {
                loop {
                    let ptype = self.type_name()?;
                    let (pname, _) = self.expect_ident("parameter name")?;
                    if params.iter().any(|p: &Param| p.name == pname) {
                        return Err(ParseError::DuplicateParam {
                            method: qualified_name.clone(),
                            param: pname,
                        });
                    }
                    params.push(Param {
                        name: pname,
                        type_name: ptype,
                    });
                    if self.eat_punct(")") {
                        break;
                    }
                    self.expect_punct(",")?;
                }
            }
            let body = self.block()?;
            let end_line = body.end_line;
            methods.push(MethodDecl {
                qualified_name,
                simple_name: name,
                visibility,
                is_static,
                params,
                return_type: ret_or_type,
                body,
                line,
                end_line,
                leading_comments: lead,
            });
        } else {
            let type_name = match ret_or_type {
                Some(t) => t,
                None => return self.error("field type (not `void`)"),
            };
            let initializer = if self.eat_punct("=") {
                Some(self.expr()?)
            } else {
                None
            };
            self.expect_punct(";")?;
            fields.push(FieldDecl {
                name,
                type_name,
                visibility,
                is_static,
                initializer,
                line,
                leading_comments: lead,
            });
        }
        Ok(())
    }

    fn type_name(&mut self) -> Result<String, ParseError> {
        let mut t = self.dotted_path()?;
        while matches!(self.peek(), Tok::Punct("["))
            && matches!(&self.tokens[self.pos + 1].tok, Tok::Punct("]"))
        {
            self.bump();
            self.bump();
            t.push_str("[]");
        }
        Ok(t)
    }

    fn block(&mut self) -> Result<Block, ParseError> {
        self.expect_punct("{")?;
        let mut statements = Vec::new();
        loop {
            let lead = self.take_comments();
            if matches!(self.peek(), Tok::Punct("}")) {
                let end_line = self.peek_line();
                self.bump();
                return Ok(Block {
                    statements,
                    end_line,
                    trailing_comments: lead,
                });
            }
            if matches!(self.peek(), Tok::Eof) {
                return self.error("`}`");
            }
            let stmt = self.statement(lead)?;
            statements.push(stmt);
        }
    }

    fn statement(&mut self, lead: Vec<String>) -> Result<Stmt, ParseError> {
        let line = self.peek_line();
        let kind = if self.at_keyword("if") {
            self.bump();
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let then_block = self.block()?;
            let else_block = if self.peek_code() == &Tok::Ident("else".to_string()) {
                self.take_comments();
                self.bump();
                Some(self.block()?)
            } else {
                None
            };
            StmtKind::If {
                cond,
                then_block,
                else_block,
            }
        } else if self.at_keyword("while") {
            self.bump();
            self.expect_punct("(")?;
            let cond = self.expr()?;
            self.expect_punct(")")?;
            let body = self.block()?;
            StmtKind::While { cond, body }
        } else if self.at_keyword("return") {
            self.bump();
            let value = if matches!(self.peek(), Tok::Punct(";")) {
                None
            } else {
                Some(self.expr()?)
            };
            self.expect_punct(";")?;
            StmtKind::Return(value)
        } else {
            self.simple_statement()?
        };
        Ok(Stmt {
            kind,
            line,
            leading_comments: lead,
        })
    }

    /// Local declaration, assignment, call or expression statement. The
    /// declaration/expression ambiguity (`a.b c` vs `a.b = c`) is resolved
    /// with a tentative parse and rollback.
    fn simple_statement(&mut self) -> Result<StmtKind, ParseError> {
        // `new`/`true`/`false`/`null` start expressions, never declarations
        let decl_start = matches!(self.peek(), Tok::Ident(s)
            if !matches!(s.as_str(), "new" | "true" | "false" | "null"));
        if decl_start {
            let checkpoint = self.pos;
            if let Ok(type_name) = self.type_name() {
                if let Tok::Ident(_) = self.peek() {
                    let (name, _) = self.expect_ident("variable name")?;
                    let init = if self.eat_punct("=") {
                        Some(self.expr()?)
                    } else {
                        None
                    };
                    self.expect_punct(";")?;
                    return Ok(StmtKind::LocalDecl {
                        type_name,
                        name,
                        init,
                    });
                }
            }
            self.pos = checkpoint;
        }
        let expr = self.expr()?;
        if self.eat_punct("=") {
            match expr {
                Expr::Name(_) | Expr::Index { .. } => {}
                _ => return self.error("assignable target"),
            }
            let value = self.expr()?;
            self.expect_punct(";")?;
            return Ok(StmtKind::Assign {
                target: expr,
                value,
            });
        }
        self.expect_punct(";")?;
        Ok(match expr {
            Expr::Call(call) => StmtKind::Call(call),
            other => StmtKind::ExprStmt(other),
        })
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.binary_expr(0)
    }

    fn binary_expr(&mut self, min_prec: u8) -> Result<Expr, ParseError> {
        let mut lhs = self.unary_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Punct("||") => BinaryOp::Or,
                Tok::Punct("&&") => BinaryOp::And,
                Tok::Punct("==") => BinaryOp::Eq,
                Tok::Punct("!=") => BinaryOp::Ne,
                Tok::Punct("<") => BinaryOp::Lt,
                Tok::Punct(">") => BinaryOp::Gt,
                Tok::Punct("<=") => BinaryOp::Le,
                Tok::Punct(">=") => BinaryOp::Ge,
                Tok::Punct("+") => BinaryOp::Add,
                Tok::Punct("-") => BinaryOp::Sub,
                Tok::Punct("*") => BinaryOp::Mul,
                Tok::Punct("/") => BinaryOp::Div,
                _ => break,
            };
            if op.precedence() < min_prec {
                break;
            }
            self.bump();
            let rhs = self.binary_expr(op.precedence() + 1)?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok(lhs)
    }

    fn unary_expr(&mut self) -> Result<Expr, ParseError> {
        if self.eat_punct("!") {
            return Ok(Expr::Unary {
                op: UnaryOp::Not,
                expr: Box::new(self.unary_expr()?),
            });
        }
        if self.eat_punct("-") {
            return Ok(Expr::Unary {
                op: UnaryOp::Neg,
                expr: Box::new(self.unary_expr()?),
            });
        }
        self.postfix_expr()
    }

    fn postfix_expr(&mut self) -> Result<Expr, ParseError> {
        let mut expr = self.primary_expr()?;
        loop {
            if matches!(self.peek(), Tok::Punct("["))
                && !matches!(&self.tokens[self.pos + 1].tok, Tok::Punct("]"))
            {
                self.bump();
                let index = self.expr()?;
                self.expect_punct("]")?;
                expr = Expr::Index {
                    base: Box::new(expr),
                    index: Box::new(index),
                };
            } else if matches!(self.peek(), Tok::Punct(".")) {
                // `.name(` is a method call; a plain `.name` extends a path
                if let (Tok::Ident(name), Tok::Punct("(")) = (
                    &self.tokens[self.pos + 1].tok,
                    &self.tokens[self.pos + 2].tok,
                ) {
                    let method = name.clone();
                    self.bump();
                    self.bump();
                    self.bump();
                    let args = self.call_args()?;
                    expr = Expr::Call(CallExpr {
                        receiver: Some(Box::new(expr)),
                        method,
                        args,
                    });
                } else if let (Tok::Ident(name), _) = (
                    &self.tokens[self.pos + 1].tok,
                    &self.tokens[self.pos + 2].tok,
                ) {
                    let seg = name.clone();
                    self.bump();
                    self.bump();
                    match expr {
                        Expr::Name(mut path) => {
                            path.push(seg);
                            expr = Expr::Name(path);
                        }
                        other => {
                            // field access on a non-path expression is kept
                            // as a single-segment name chained via Index-like
                            // structure; the grammar does not need it, reject.
                            let _ = other;
                            return self.error("method call after `.`");
                        }
                    }
                } else {
                    return self.error("identifier after `.`");
                }
            } else {
                break;
            }
        }
        Ok(expr)
    }

    fn call_args(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut args = Vec::new();
        if self.eat_punct(")") {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat_punct(")") {
                return Ok(args);
            }
            self.expect_punct(",")?;
        }
    }

    fn primary_expr(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Int(v))
            }
            Tok::Double(s) => {
                self.bump();
                Ok(Expr::Double(s))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Expr::Str(s))
            }
            Tok::Punct("(") => {
                self.bump();
                let inner = self.expr()?;
                self.expect_punct(")")?;
                Ok(inner)
            }
            Tok::Ident(word) => match word.as_str() {
                "true" => {
                    self.bump();
                    Ok(Expr::Bool(true))
                }
                "false" => {
                    self.bump();
                    Ok(Expr::Bool(false))
                }
                "null" => {
                    self.bump();
                    Ok(Expr::Null)
                }
                "new" => {
                    self.bump();
                    let type_name = self.dotted_path()?;
                    self.expect_punct("(")?;
                    let args = self.call_args()?;
                    Ok(Expr::New { type_name, args })
                }
                _ => {
                    let (name, _) = self.expect_ident("identifier")?;
                    if matches!(self.peek(), Tok::Punct("(")) {
                        self.bump();
                        let args = self.call_args()?;
                        Ok(Expr::Call(CallExpr {
                            receiver: None,
                            method: name,
                            args,
                        }))
                    } else {
                        Ok(Expr::Name(vec![name]))
                    }
                }
            },
            _ => self.error("expression"),
        }
    }
}
