//! Parser, AST and emitter for the `.mj` mini-language: a small Java-like
//! language with packages, nested classes, fields and loop/branch statements.
//! Types are opaque dotted names; there is no semantic checking beyond
//! name-level validation (duplicate classes, duplicate fields, parameters).

mod edit;
mod emit;
mod lexer;
mod parser;

pub use edit::{insert_statements, shift_lines, BlockPath, BlockStep, EditError};
pub(crate) use edit::resolve_block as resolve_block_in;
pub(crate) use edit::resolve_block_mut as resolve_block_mut_in;
pub use emit::{emit_file, emit_program};
pub use parser::{parse_file, parse_program, parse_source};

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("{file}:{line}: syntax error: expected {expected}, found {found}")]
    Syntax {
        file: String,
        line: u32,
        expected: String,
        found: String,
    },
    #[error("duplicate class `{0}`")]
    DuplicateClass(String),
    #[error("duplicate field `{field}` in class `{class}`")]
    DuplicateField { class: String, field: String },
    #[error("duplicate parameter `{param}` in method `{method}`")]
    DuplicateParam { method: String, param: String },
    #[error("no `.mj` sources found under {0}")]
    NoSourcesFound(PathBuf),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// A parsed program: one or more source files, order determined by the
/// sorted relative paths so all downstream passes are deterministic.
#[derive(Debug, Clone, PartialEq)]
pub struct MiniProgram {
    pub files: Vec<SourceFile>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SourceFile {
    /// Path relative to the program root.
    pub path: PathBuf,
    pub package_name: String,
    pub imports: Vec<String>,
    pub classes: Vec<ClassDecl>,
    /// Original text; kept so reports can quote the file as parsed.
    pub raw_text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassDecl {
    /// Fully qualified name, package plus enclosing classes: `pkg.Outer.Inner`.
    pub qualified_name: String,
    pub simple_name: String,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
    pub inner_classes: Vec<ClassDecl>,
    pub line: u32,
    pub leading_comments: Vec<String>,
    /// Comments between the last member and the closing brace.
    pub trailing_comments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldDecl {
    pub name: String,
    pub type_name: String,
    pub visibility: Option<String>,
    pub is_static: bool,
    pub initializer: Option<Expr>,
    pub line: u32,
    pub leading_comments: Vec<String>,
}

impl FieldDecl {
    pub fn has_initializer(&self) -> bool {
        self.initializer.is_some()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub type_name: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodDecl {
    /// Class-qualified name: `pkg.Outer.method`.
    pub qualified_name: String,
    pub simple_name: String,
    pub visibility: Option<String>,
    pub is_static: bool,
    pub params: Vec<Param>,
    /// `None` means `void`.
    pub return_type: Option<String>,
    pub body: Block,
    pub line: u32,
    pub end_line: u32,
    pub leading_comments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub statements: Vec<Stmt>,
    /// Line of the closing brace; insertion at `index == len` anchors here.
    pub end_line: u32,
    /// Comments sitting between the last statement and the closing brace.
    pub trailing_comments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub line: u32,
    pub leading_comments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    LocalDecl {
        type_name: String,
        name: String,
        init: Option<Expr>,
    },
    Assign {
        target: Expr,
        value: Expr,
    },
    /// A call in statement position, kept apart from general expression
    /// statements because most analyses only look at calls.
    Call(CallExpr),
    Return(Option<Expr>),
    If {
        cond: Expr,
        then_block: Block,
        else_block: Option<Block>,
    },
    While {
        cond: Expr,
        body: Block,
    },
    ExprStmt(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct CallExpr {
    pub receiver: Option<Box<Expr>>,
    pub method: String,
    pub args: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(i64),
    /// Floating literals keep their source spelling for faithful re-emission.
    Double(String),
    Str(String),
    Bool(bool),
    Null,
    /// Dotted name path: variable, field access or class reference.
    Name(Vec<String>),
    Call(CallExpr),
    New { type_name: String, args: Vec<Expr> },
    Index { base: Box<Expr>, index: Box<Expr> },
    Unary { op: UnaryOp, expr: Box<Expr> },
    Binary { op: BinaryOp, lhs: Box<Expr>, rhs: Box<Expr> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinaryOp {
    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Eq | BinaryOp::Ne => 3,
            BinaryOp::Lt | BinaryOp::Gt | BinaryOp::Le | BinaryOp::Ge => 4,
            BinaryOp::Add | BinaryOp::Sub => 5,
            BinaryOp::Mul | BinaryOp::Div => 6,
        }
    }

    pub(crate) fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Lt => "<",
            BinaryOp::Gt => ">",
            BinaryOp::Le => "<=",
            BinaryOp::Ge => ">=",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::And => "&&",
            BinaryOp::Or => "||",
        }
    }
}

impl MiniProgram {
    /// All classes of the program (outer before inner), depth first in file
    /// order. The traversal order is relied on for deterministic output.
    pub fn all_classes(&self) -> Vec<&ClassDecl> {
        fn walk<'a>(class: &'a ClassDecl, out: &mut Vec<&'a ClassDecl>) {
            out.push(class);
            for inner in &class.inner_classes {
                walk(inner, out);
            }
        }
        let mut out = Vec::new();
        for file in &self.files {
            for class in &file.classes {
                walk(class, &mut out);
            }
        }
        out
    }

    pub fn find_class(&self, qualified_name: &str) -> Option<&ClassDecl> {
        self.all_classes()
            .into_iter()
            .find(|c| c.qualified_name == qualified_name)
    }

    /// Strips line information so two programs can be compared structurally.
    pub fn strip_positions(&self) -> MiniProgram {
        let mut p = self.clone();
        for file in &mut p.files {
            file.raw_text = String::new();
            for class in &mut file.classes {
                strip_class(class);
            }
        }
        p
    }
}

fn strip_class(class: &mut ClassDecl) {
    class.line = 0;
    for f in &mut class.fields {
        f.line = 0;
    }
    for m in &mut class.methods {
        m.line = 0;
        m.end_line = 0;
        strip_block(&mut m.body);
    }
    for inner in &mut class.inner_classes {
        strip_class(inner);
    }
}

fn strip_block(block: &mut Block) {
    block.end_line = 0;
    for stmt in &mut block.statements {
        stmt.line = 0;
        match &mut stmt.kind {
            StmtKind::If {
                then_block,
                else_block,
                ..
            } => {
                strip_block(then_block);
                if let Some(e) = else_block {
                    strip_block(e);
                }
            }
            StmtKind::While { body, .. } => strip_block(body),
            _ => {}
        }
    }
}

/// Splits a dotted type or path on `.`, returning the final segment.
pub fn simple_type_name(type_name: &str) -> &str {
    type_name.rsplit('.').next().unwrap_or(type_name)
}

/// Loads every `.mj` file under `root` into path-sorted order without
/// parsing; shared by `parse_program` and the CLI listing commands.
pub(crate) fn collect_sources(root: &Path) -> Result<Vec<(PathBuf, String)>, ParseError> {
    let mut sources = BTreeMap::new();
    for entry in walkdir::WalkDir::new(root).sort_by_file_name() {
        let entry = entry.map_err(|e| ParseError::Io {
            path: root.to_path_buf(),
            source: e.into(),
        })?;
        if entry.file_type().is_file()
            && entry.path().extension().map(|e| e == "mj").unwrap_or(false)
        {
            let text = std::fs::read_to_string(entry.path()).map_err(|e| ParseError::Io {
                path: entry.path().to_path_buf(),
                source: e,
            })?;
            let rel = entry
                .path()
                .strip_prefix(root)
                .unwrap_or(entry.path())
                .to_path_buf();
            sources.insert(rel, text);
        }
    }
    if sources.is_empty() {
        return Err(ParseError::NoSourcesFound(root.to_path_buf()));
    }
    Ok(sources.into_iter().collect())
}
