use crate::minilang::{Block, BlockPath, BlockStep, MethodDecl, StmtKind};

/// One basic block: a maximal run of statements in a single syntactic
/// block with no internal control transfer. A branch or loop statement
/// terminates the run that contains it.
#[derive(Debug, Clone, PartialEq)]
pub struct ScopeInfo {
    /// Position in the program-wide scope table.
    pub id: usize,
    /// Index of the owning method entry.
    pub method: usize,
    /// `<method qualified name>#<ordinal>`, ordinal in construction order.
    pub name: String,
    pub block: BlockPath,
    /// First statement index covered within the syntactic block.
    pub start: usize,
    /// Number of statements covered; insertion indices run 0..=len.
    pub len: usize,
}

/// Output of splitting one method into blocks: scope descriptors, the
/// structural control edges among them, the entry scope and the exit
/// scopes (those through which the method can fall off its end).
pub struct MethodBlocks {
    pub scopes: Vec<ScopeInfo>,
    pub edges: Vec<(usize, usize)>,
    pub entry: usize,
    pub exits: Vec<usize>,
}

pub fn split_method(
    method_index: usize,
    method: &MethodDecl,
    root_path: BlockPath,
    first_scope_id: usize,
) -> MethodBlocks {
    let mut builder = Builder {
        method: method_index,
        qname: method.qualified_name.clone(),
        next_id: first_scope_id,
        scopes: Vec::new(),
        edges: Vec::new(),
    };
    let (entry, exits) = builder.build_block(&method.body, root_path);
    MethodBlocks {
        scopes: builder.scopes,
        edges: builder.edges,
        entry,
        exits,
    }
}

struct Builder {
    method: usize,
    qname: String,
    next_id: usize,
    scopes: Vec<ScopeInfo>,
    edges: Vec<(usize, usize)>,
}

impl Builder {
    fn new_scope(&mut self, block: BlockPath, start: usize, len: usize) -> usize {
        let id = self.next_id;
        self.next_id += 1;
        let ordinal = self.scopes.len();
        self.scopes.push(ScopeInfo {
            id,
            method: self.method,
            name: format!("{}#{}", self.qname, ordinal),
            block,
            start,
            len,
        });
        id
    }

    /// Builds the scope chain of one syntactic block; returns its entry
    /// scope and the scopes control falls out of.
    fn build_block(&mut self, block: &Block, path: BlockPath) -> (usize, Vec<usize>) {
        let stmts = &block.statements;
        if stmts.is_empty() {
            let s = self.new_scope(path, 0, 0);
            return (s, vec![s]);
        }
        let mut entry = None;
        let mut incoming: Vec<usize> = Vec::new();
        let mut pos = 0;
        while pos < stmts.len() {
            // the run extends to the next branch/loop statement, inclusive
            let branch_at = (pos..stmts.len()).find(|&i| {
                matches!(
                    stmts[i].kind,
                    StmtKind::If { .. } | StmtKind::While { .. }
                )
            });
            let run_end = branch_at.map(|i| i + 1).unwrap_or(stmts.len());
            let scope = self.new_scope(path.clone(), pos, run_end - pos);
            if entry.is_none() {
                entry = Some(scope);
            }
            for p in incoming.drain(..) {
                self.edges.push((p, scope));
            }
            match branch_at {
                None => {
                    incoming = vec![scope];
                    pos = run_end;
                }
                Some(i) => {
                    match &stmts[i].kind {
                        StmtKind::If {
                            else_block: else_b, ..
                        } => {
                            let mut then_path = path.clone();
                            then_path.steps.push(BlockStep::Then(i));
                            let then_block = match &stmts[i].kind {
                                StmtKind::If { then_block, .. } => then_block,
                                _ => unreachable!(),
                            };
                            let (t_entry, t_exits) = self.build_block(then_block, then_path);
                            self.edges.push((scope, t_entry));
                            incoming = t_exits;
                            if let Some(else_block) = else_b {
                                let mut else_path = path.clone();
                                else_path.steps.push(BlockStep::Else(i));
                                let (e_entry, e_exits) =
                                    self.build_block(else_block, else_path);
                                self.edges.push((scope, e_entry));
                                incoming.extend(e_exits);
                            } else {
                                // no else: control may skip the branch
                                incoming.push(scope);
                            }
                        }
                        StmtKind::While { body, .. } => {
                            let mut body_path = path.clone();
                            body_path.steps.push(BlockStep::WhileBody(i));
                            let (b_entry, b_exits) = self.build_block(body, body_path);
                            self.edges.push((scope, b_entry));
                            // loop back to the condition scope
                            for e in b_exits {
                                self.edges.push((e, scope));
                            }
                            // zero iterations fall straight through
                            incoming = vec![scope];
                        }
                        _ => unreachable!(),
                    }
                    pos = run_end;
                }
            }
        }
        (entry.unwrap(), incoming)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minilang::parse_source;
    use std::path::Path;

    fn split(src: &str) -> MethodBlocks {
        let file = parse_source(Path::new("t.mj"), src).unwrap();
        let method = &file.classes[0].methods[0];
        split_method(0, method, BlockPath::method_root(0, vec![0], 0), 0)
    }

    #[test]
    fn straight_line_code_is_one_scope() {
        let b = split("class C {\n    void f() {\n        int a = 1;\n        int b = 2;\n    }\n}\n");
        assert_eq!(b.scopes.len(), 1);
        assert_eq!(b.scopes[0].start, 0);
        assert_eq!(b.scopes[0].len, 2);
        assert_eq!(b.exits, vec![0]);
        assert!(b.edges.is_empty());
    }

    #[test]
    fn empty_body_still_gets_a_scope() {
        let b = split("class C {\n    void f() {\n    }\n}\n");
        assert_eq!(b.scopes.len(), 1);
        assert_eq!(b.scopes[0].len, 0);
    }

    #[test]
    fn branch_statement_ends_its_run() {
        let b = split(
            "class C {\n    void f(int x) {\n        int a = 1;\n        if (x > 0) {\n            a = 2;\n        } else {\n            a = 3;\n        }\n        a = 4;\n    }\n}\n",
        );
        // runs: [a=1, if], [then], [else], [a=4]
        assert_eq!(b.scopes.len(), 4);
        assert_eq!(b.scopes[0].len, 2);
        let names: Vec<_> = b.scopes.iter().map(|s| s.name.clone()).collect();
        assert_eq!(names[0], "C.f#0");
        assert_eq!(names[3], "C.f#3");
        // entry -> then, entry -> else, then -> tail, else -> tail
        let mut edges = b.edges.clone();
        edges.sort();
        assert_eq!(edges, vec![(0, 1), (0, 2), (1, 3), (2, 3)]);
        assert_eq!(b.exits, vec![3]);
    }

    #[test]
    fn if_without_else_falls_through() {
        let b = split(
            "class C {\n    void f(int x) {\n        if (x > 0) {\n            x = 2;\n        }\n    }\n}\n",
        );
        assert_eq!(b.scopes.len(), 2);
        let mut exits = b.exits.clone();
        exits.sort();
        // both the branch scope and the then-body can end the method
        assert_eq!(exits, vec![0, 1]);
    }

    #[test]
    fn while_loops_cycle_back_to_their_condition() {
        let b = split(
            "class C {\n    void f(int x) {\n        while (x > 0) {\n            x = x - 1;\n        }\n        x = 9;\n    }\n}\n",
        );
        assert_eq!(b.scopes.len(), 3);
        let mut edges = b.edges.clone();
        edges.sort();
        // cond -> body, body -> cond, cond -> tail
        assert_eq!(edges, vec![(0, 1), (0, 2), (1, 0)]);
        assert_eq!(b.exits, vec![2]);
    }

    #[test]
    fn nested_branches_nest_block_paths() {
        let b = split(
            "class C {\n    void f(int x) {\n        if (x > 0) {\n            while (x > 1) {\n                x = x - 1;\n            }\n        }\n    }\n}\n",
        );
        let inner = b
            .scopes
            .iter()
            .find(|s| s.block.steps.len() == 2)
            .expect("inner loop body scope");
        assert_eq!(
            inner.block.steps,
            vec![BlockStep::Then(0), BlockStep::WhileBody(0)]
        );
    }
}
