use super::*;

/// Identifies one block inside a program: file and class/method indices,
/// then a chain of branch/loop steps from the method's root block.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockPath {
    pub file: usize,
    /// Indices into `classes` / `inner_classes` from the file root.
    pub class_path: Vec<usize>,
    pub method: usize,
    pub steps: Vec<BlockStep>,
}

/// One step into a nested block; the index is the statement's position in
/// the enclosing block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BlockStep {
    Then(usize),
    Else(usize),
    WhileBody(usize),
}

#[derive(Debug, thiserror::Error)]
pub enum EditError {
    #[error("location does not reference an existing block")]
    UnknownBlock,
    #[error("statement index {index} out of range 0..={len}")]
    IndexOutOfRange { index: usize, len: usize },
}

impl BlockPath {
    pub fn method_root(file: usize, class_path: Vec<usize>, method: usize) -> Self {
        BlockPath {
            file,
            class_path,
            method,
            steps: Vec::new(),
        }
    }

    /// True when `self` is the same block as `other` or a syntactic ancestor
    /// of it (same method, step prefix).
    pub fn contains(&self, other: &BlockPath) -> bool {
        self.file == other.file
            && self.class_path == other.class_path
            && self.method == other.method
            && other.steps.len() >= self.steps.len()
            && other.steps[..self.steps.len()] == self.steps[..]
    }
}

pub(crate) fn resolve_class<'a>(
    program: &'a MiniProgram,
    file: usize,
    class_path: &[usize],
) -> Option<&'a ClassDecl> {
    let mut iter = class_path.iter();
    let mut class = program.files.get(file)?.classes.get(*iter.next()?)?;
    for idx in iter {
        class = class.inner_classes.get(*idx)?;
    }
    Some(class)
}

pub(crate) fn resolve_method<'a>(
    program: &'a MiniProgram,
    path: &BlockPath,
) -> Option<&'a MethodDecl> {
    resolve_class(program, path.file, &path.class_path)?
        .methods
        .get(path.method)
}

pub(crate) fn resolve_block<'a>(program: &'a MiniProgram, path: &BlockPath) -> Option<&'a Block> {
    let mut block = &resolve_method(program, path)?.body;
    for step in &path.steps {
        block = step_into(block, *step)?;
    }
    Some(block)
}

fn step_into(block: &Block, step: BlockStep) -> Option<&Block> {
    match step {
        BlockStep::Then(i) => match &block.statements.get(i)?.kind {
            StmtKind::If { then_block, .. } => Some(then_block),
            _ => None,
        },
        BlockStep::Else(i) => match &block.statements.get(i)?.kind {
            StmtKind::If { else_block, .. } => else_block.as_ref(),
            _ => None,
        },
        BlockStep::WhileBody(i) => match &block.statements.get(i)?.kind {
            StmtKind::While { body, .. } => Some(body),
            _ => None,
        },
    }
}

pub(crate) fn resolve_block_mut<'a>(
    program: &'a mut MiniProgram,
    path: &BlockPath,
) -> Option<&'a mut Block> {
    let mut iter = path.class_path.iter();
    let mut class = program
        .files
        .get_mut(path.file)?
        .classes
        .get_mut(*iter.next()?)?;
    for idx in iter {
        class = class.inner_classes.get_mut(*idx)?;
    }
    let mut block = &mut class.methods.get_mut(path.method)?.body;
    for step in &path.steps {
        block = match step {
            BlockStep::Then(i) => match &mut block.statements.get_mut(*i)?.kind {
                StmtKind::If { then_block, .. } => then_block,
                _ => return None,
            },
            BlockStep::Else(i) => match &mut block.statements.get_mut(*i)?.kind {
                StmtKind::If { else_block, .. } => else_block.as_mut()?,
                _ => return None,
            },
            BlockStep::WhileBody(i) => match &mut block.statements.get_mut(*i)?.kind {
                StmtKind::While { body, .. } => body,
                _ => return None,
            },
        };
    }
    Some(block)
}

/// Returns a copy of `program` with `stmts` spliced into the block at
/// `path` before statement `index` (`index == len` appends at the block
/// end). Inserted statements are assigned one line each at the insertion
/// anchor and every later position in the file shifts down consistently,
/// so statement positions stay strictly increasing.
pub fn insert_statements(
    program: &MiniProgram,
    path: &BlockPath,
    index: usize,
    stmts: Vec<Stmt>,
) -> Result<MiniProgram, EditError> {
    let mut out = program.clone();
    {
        let block = resolve_block_mut(&mut out, path).ok_or(EditError::UnknownBlock)?;
        let len = block.statements.len();
        if index > len {
            return Err(EditError::IndexOutOfRange { index, len });
        }
    }
    let anchor = {
        let block = resolve_block(&out, path).unwrap();
        if index < block.statements.len() {
            block.statements[index].line
        } else {
            block.end_line
        }
    };
    let count = stmts.len() as u32;
    if count > 0 {
        shift_lines(&mut out.files[path.file], anchor, count);
        let block = resolve_block_mut(&mut out, path).unwrap();
        let mut line = anchor;
        let mut numbered = Vec::new();
        for mut stmt in stmts {
            stmt.line = line;
            line += 1;
            numbered.push(stmt);
        }
        block.statements.splice(index..index, numbered);
    }
    Ok(out)
}

/// Shifts every recorded position at or below `from_line` down by `delta`.
pub fn shift_lines(file: &mut SourceFile, from_line: u32, delta: u32) {
    for class in &mut file.classes {
        shift_class(class, from_line, delta);
    }
}

fn shift_class(class: &mut ClassDecl, from: u32, delta: u32) {
    bump(&mut class.line, from, delta);
    for f in &mut class.fields {
        bump(&mut f.line, from, delta);
    }
    for m in &mut class.methods {
        bump(&mut m.line, from, delta);
        bump(&mut m.end_line, from, delta);
        shift_block(&mut m.body, from, delta);
    }
    for inner in &mut class.inner_classes {
        shift_class(inner, from, delta);
    }
}

fn shift_block(block: &mut Block, from: u32, delta: u32) {
    bump(&mut block.end_line, from, delta);
    for stmt in &mut block.statements {
        bump(&mut stmt.line, from, delta);
        match &mut stmt.kind {
            StmtKind::If {
                then_block,
                else_block,
                ..
            } => {
                shift_block(then_block, from, delta);
                if let Some(e) = else_block {
                    shift_block(e, from, delta);
                }
            }
            StmtKind::While { body, .. } => shift_block(body, from, delta),
            _ => {}
        }
    }
}

fn bump(line: &mut u32, from: u32, delta: u32) {
    if *line >= from {
        *line += delta;
    }
}
