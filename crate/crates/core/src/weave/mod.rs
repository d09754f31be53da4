//! Weaving: materialize a chosen mapping set. Temps get collision-free
//! names, export channels carry values between snippets, snippets are
//! spliced into their blocks, and the result is re-emitted and
//! re-parsed.


use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use thiserror::Error;

use crate::analysis::{Analysis, AnalysisError, ClassRef, Location};
use crate::annotate::{channel_plan, Binding, MappingSet, Mechanism};
use crate::fspec::{ApiKind, Branch, DepKind, FSpec};
use crate::minilang::{
    emit_program, insert_statements, parse_source, resolve_block_mut_in, Block, BlockPath,
    CallExpr, ClassDecl, EditError, Expr, FieldDecl, MiniProgram, Stmt, StmtKind,
};
use crate::resolver::{Category, ExportVar, Resolution};
use crate::sketch::{Sketch, SlotValue};
use crate::Score;

#[derive(Debug, Error)]
pub enum WeaveError {
    #[error("insertion point for cluster {cluster} no longer fits its block")]
    WeaveConflict { cluster: u32 },
    #[error("no export channel applies between clusters {producer} and {consumer}")]
    ChannelFailure { producer: u32, consumer: u32 },
    #[error("woven output failed to re-parse: {0}")]
    Reparse(String),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

/// One realized inter-cluster data edge.
#[derive(Debug, Clone, PartialEq)]
pub struct PlannedChannel {
    pub producer_cluster: u32,
    pub consumer_cluster: u32,
    pub src_node: u32,
    pub dst_node: u32,
    /// Canonical carried type.
    pub carried_type: String,
    pub mechanism: Mechanism,
    /// Name under which the consumer reads the value.
    pub var_name: String,
    /// Line where the carrier comes into existence; used for ranking.
    pub decl_line: u32,
    pub category: Category,
}

/// A field the weaver will declare.
#[derive(Debug, Clone, PartialEq)]
pub struct NewField {
    pub class: usize,
    pub name: String,
    /// Canonical type.
    pub type_name: String,
    pub is_static: bool,
}

/// Everything weaving adds beyond the snippets themselves.
#[derive(Debug, Clone, PartialEq)]
pub struct WeavePlan {
    pub channels: Vec<PlannedChannel>,
    /// (cluster id, sketch temp) → collision-free program name.
    pub temp_names: BTreeMap<(u32, String), String>,
    pub new_fields: Vec<NewField>,
}

impl WeavePlan {
    /// Channel carriers in the form the resolver ranks.
    pub fn export_vars(&self) -> Vec<ExportVar> {
        self.channels
            .iter()
            .enumerate()
            .map(|(i, c)| ExportVar {
                channel: i,
                consumer_cluster: c.consumer_cluster,
                type_name: c.carried_type.clone(),
                name: c.var_name.clone(),
                decl_line: c.decl_line,
                category: c.category,
            })
            .collect()
    }
}

/// Chooses a mechanism and a carrier name for every inter-cluster data
/// edge of the branch under the given placements.
pub fn plan_channels(
    analysis: &Analysis,
    fspec: &FSpec,
    branch: &Branch,
    set: &MappingSet,
    sketches: &[Sketch],
) -> Result<WeavePlan, WeaveError> {
    let mut namer = Namer::new(analysis.program());

    let mut temp_names = BTreeMap::new();
    for sk in sketches {
        for st in &sk.statements {
            if let Some(t) = &st.result_var {
                temp_names.insert((sk.cluster_id, t.clone()), namer.fresh_local());
            }
        }
    }

    let locations = set.locations();
    let mut channels = Vec::new();
    let mut new_fields: Vec<NewField> = Vec::new();
    // call sites already captured, so channels can share one carrier
    let mut captured: BTreeMap<(usize, usize), Vec<(Binding, String)>> = BTreeMap::new();
    // one fresh field per produced value and home, shared by consumers
    let mut fielded: BTreeMap<(u32, u32, usize, bool), String> = BTreeMap::new();
    for e in branch
        .inter_cluster_edges
        .iter()
        .filter(|e| e.kind == DepKind::Data)
    {
        let produced = fspec
            .node(e.src_node)
            .produced_type()
            .expect("data edges carry values");
        let carried = fspec.canon(produced).to_string();
        let ploc = locations[&e.src_cluster];
        let cloc = locations[&e.dst_cluster];
        let mechanism =
            channel_plan(analysis, fspec, &ploc, &cloc, &carried).ok_or(WeaveError::ChannelFailure {
                producer: e.src_cluster,
                consumer: e.dst_cluster,
            })?;

        let (var_name, decl_line, category) = match &mechanism {
            Mechanism::Temp => {
                let sk = sketch_of(sketches, e.src_cluster);
                let temp = sk.temp_of(e.src_node).expect("data edges carry values");
                (
                    temp_names[&(e.src_cluster, temp.to_string())].clone(),
                    analysis.location_line(&ploc)?,
                    if ploc.scope == cloc.scope {
                        Category::SameScope
                    } else {
                        Category::Enclosing
                    },
                )
            }
            Mechanism::ReturnValue {
                call_scope,
                call_stmt,
                binding,
            } => {
                let cb = analysis.scope(*call_scope)?;
                let line = analysis.location_line(&Location {
                    scope: *call_scope,
                    index: call_stmt - cb.start,
                })?;
                let reuse = captured
                    .get(&(*call_scope, *call_stmt))
                    .and_then(|seen| seen.iter().find(|(b, _)| b == binding))
                    .map(|(_, name)| name.clone());
                let name = match (&reuse, binding) {
                    (Some(name), _) => name.clone(),
                    (None, Binding::FreshLocal) => namer.fresh_local(),
                    (None, Binding::ExistingField { name, .. }) => name.clone(),
                    (None, Binding::FreshField { class, is_static }) => {
                        let name = namer.fresh_field(simple_of(&carried));
                        new_fields.push(NewField {
                            class: *class,
                            name: name.clone(),
                            type_name: carried.clone(),
                            is_static: *is_static,
                        });
                        name
                    }
                };
                if reuse.is_none() {
                    captured
                        .entry((*call_scope, *call_stmt))
                        .or_default()
                        .push((binding.clone(), name.clone()));
                }
                let category = match binding {
                    Binding::FreshLocal => {
                        if *call_scope == cloc.scope {
                            Category::SameScope
                        } else {
                            Category::Enclosing
                        }
                    }
                    _ => Category::Field,
                };
                (name, line, category)
            }
            Mechanism::ExistingField { class, name } => (
                name.clone(),
                field_line(analysis, *class, name),
                Category::Field,
            ),
            Mechanism::FreshField { class, is_static } => {
                let key = (e.src_cluster, e.src_node, *class, *is_static);
                let name = match fielded.get(&key) {
                    Some(name) => name.clone(),
                    None => {
                        let name = namer.fresh_field(simple_of(&carried));
                        new_fields.push(NewField {
                            class: *class,
                            name: name.clone(),
                            type_name: carried.clone(),
                            is_static: *is_static,
                        });
                        fielded.insert(key, name.clone());
                        name
                    }
                };
                (
                    name,
                    analysis.index.class_decl(analysis.program(), *class).line,
                    Category::Field,
                )
            }
        };
        channels.push(PlannedChannel {
            producer_cluster: e.src_cluster,
            consumer_cluster: e.dst_cluster,
            src_node: e.src_node,
            dst_node: e.dst_node,
            carried_type: carried,
            mechanism,
            var_name,
            decl_line,
            category,
        });
    }
    Ok(WeavePlan {
        channels,
        temp_names,
        new_fields,
    })
}

/// Where every snippet landed, how it scored, what carried values
/// between snippets, and which variable filled each hole.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub placements: Vec<Placement>,
    pub cds: bool,
    pub cqs: Score,
    pub cas: Score,
    /// (producer annotation, consumer annotation, mechanism).
    pub channels: Vec<(String, String, String)>,
    /// (hole id, variable name, type).
    pub assignments: Vec<(u32, String, String)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub cluster_id: u32,
    pub annotation: String,
    pub file: PathBuf,
    pub line: u32,
    pub cls: Score,
}

impl Report {
    /// Line-based machine form.
    pub fn render_rec(&self) -> String {
        let mut out = String::new();
        for p in &self.placements {
            out.push_str(&format!(
                "placement {} {} {}\n",
                p.annotation,
                p.file.display(),
                p.line
            ));
        }
        out.push_str(&format!(
            "score cas={:.4} cds={} cqs={:.4}\n",
            self.cas,
            u8::from(self.cds),
            self.cqs
        ));
        for (producer, consumer, mechanism) in &self.channels {
            out.push_str(&format!("channel {producer} {consumer} {mechanism}\n"));
        }
        out
    }

    /// Human-readable form.
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str("Placements\n");
        for p in &self.placements {
            out.push_str(&format!(
                "  {} -> {} line {} (location score {:.4})\n",
                p.annotation,
                p.file.display(),
                p.line,
                p.cls
            ));
        }
        out.push_str(&format!(
            "Scores\n  cas={:.4} cds={} cqs={:.4}\n",
            self.cas,
            u8::from(self.cds),
            self.cqs
        ));
        if !self.channels.is_empty() {
            out.push_str("Channels\n");
            for (producer, consumer, mechanism) in &self.channels {
                out.push_str(&format!("  {producer} -> {consumer} via {mechanism}\n"));
            }
        }
        if !self.assignments.is_empty() {
            out.push_str("Hole assignments\n");
            for (hole, name, type_name) in &self.assignments {
                out.push_str(&format!("  ?{hole} -> {name}: {type_name}\n"));
            }
        }
        out
    }
}

/// The woven program with its emitted sources and report.
#[derive(Debug, Clone)]
pub struct SynthesisResult {
    /// Re-parsed from the emitted text, so it is valid by construction.
    pub program: MiniProgram,
    pub report: Report,
    pub files: BTreeMap<PathBuf, String>,
}

/// Splices the resolved snippets into the program and realizes every
/// planned channel.
pub fn weave(
    analysis: &Analysis,
    fspec: &FSpec,
    branch: &Branch,
    set: &MappingSet,
    sketches: &[Sketch],
    plan: &WeavePlan,
    resolution: &Resolution,
) -> Result<SynthesisResult, WeaveError> {
    let locations = set.locations();

    let mut snippets: BTreeMap<u32, Vec<Stmt>> = BTreeMap::new();
    for sk in sketches {
        let stmts = sk
            .statements
            .iter()
            .map(|st| concrete_stmt(fspec, plan, resolution, sk.cluster_id, st))
            .collect();
        snippets.insert(sk.cluster_id, stmts);
    }

    // channel code on the producer side: field assignments first, one
    // return per produced temp last
    let mut assigned: BTreeSet<(u32, String)> = BTreeSet::new();
    for ch in &plan.channels {
        if let Mechanism::ExistingField { .. } | Mechanism::FreshField { .. } = ch.mechanism {
            if !assigned.insert((ch.producer_cluster, ch.var_name.clone())) {
                continue;
            }
            let temp = producer_temp(plan, sketches, ch);
            snippets
                .get_mut(&ch.producer_cluster)
                .expect("every cluster has a snippet")
                .push(plain_stmt(StmtKind::Assign {
                    target: Expr::Name(vec![ch.var_name.clone()]),
                    value: Expr::Name(vec![temp]),
                }));
        }
    }
    let mut returned: BTreeSet<(u32, String)> = BTreeSet::new();
    for ch in &plan.channels {
        if let Mechanism::ReturnValue { .. } = ch.mechanism {
            let temp = producer_temp(plan, sketches, ch);
            if returned.insert((ch.producer_cluster, temp.clone())) {
                snippets
                    .get_mut(&ch.producer_cluster)
                    .expect("every cluster has a snippet")
                    .push(plain_stmt(StmtKind::Return(Some(Expr::Name(vec![temp])))));
            }
        }
    }

    let mut woven = analysis.program().clone();

    // capture rewrites at return-value call sites; later channels on
    // the same site chain off the first carrier
    let mut by_site: BTreeMap<(usize, usize), Vec<&PlannedChannel>> = BTreeMap::new();
    for ch in &plan.channels {
        if let Mechanism::ReturnValue {
            call_scope,
            call_stmt,
            ..
        } = ch.mechanism
        {
            by_site.entry((call_scope, call_stmt)).or_default().push(ch);
        }
    }
    let mut extra: Vec<Insertion> = Vec::new();
    for ((scope_id, stmt_index), chans) in &by_site {
        let scope = analysis.scope(*scope_id)?;
        let first = chans[0];
        let target = capture_target(first);
        rewrite_capture(&mut woven, &scope.block, *stmt_index, &target);
        let mut chained: BTreeSet<&str> = [first.var_name.as_str()].into();
        for ch in &chans[1..] {
            if !chained.insert(&ch.var_name) {
                continue;
            }
            let kind = match capture_target(ch) {
                Capture::Local { type_name, name } => StmtKind::LocalDecl {
                    type_name,
                    name,
                    init: Some(Expr::Name(vec![first.var_name.clone()])),
                },
                Capture::Field { name } => StmtKind::Assign {
                    target: Expr::Name(vec![name]),
                    value: Expr::Name(vec![first.var_name.clone()]),
                },
            };
            extra.push(Insertion {
                path: scope.block.clone(),
                index: stmt_index + 1,
                rank: (usize::MAX, extra.len() as u32),
                cluster: first.consumer_cluster,
                stmts: vec![plain_stmt(kind)],
            });
        }
    }

    for nf in &plan.new_fields {
        let class = class_decl_mut(&mut woven, &analysis.index.classes[nf.class].r);
        class.fields.push(FieldDecl {
            name: nf.name.clone(),
            type_name: nf.type_name.clone(),
            visibility: Some("private".into()),
            is_static: nf.is_static,
            initializer: None,
            line: class.line,
            leading_comments: Vec::new(),
        });
    }

    // snippets in inter-cluster topological order, so co-located
    // producers precede their consumers in the final text
    let ranks = cluster_topo_ranks(branch);
    let mut insertions: Vec<Insertion> = Vec::new();
    for cluster in &branch.clusters {
        let loc = locations[&cluster.id];
        let scope = analysis.scope(loc.scope)?;
        insertions.push(Insertion {
            path: scope.block.clone(),
            index: scope.start + loc.index,
            rank: (ranks[&cluster.id], cluster.id),
            cluster: cluster.id,
            stmts: snippets.remove(&cluster.id).expect("one snippet per cluster"),
        });
    }
    insertions.extend(extra);
    insertions.sort_by(|a, b| a.rank.cmp(&b.rank));
    while !insertions.is_empty() {
        let ins = insertions.remove(0);
        let count = ins.stmts.len();
        woven = insert_statements(&woven, &ins.path, ins.index, ins.stmts).map_err(|e| match e {
            EditError::UnknownBlock | EditError::IndexOutOfRange { .. } => {
                WeaveError::WeaveConflict {
                    cluster: ins.cluster,
                }
            }
        })?;
        for later in &mut insertions {
            later.shift_for(&ins.path, ins.index, count);
        }
    }

    let mut files = BTreeMap::new();
    let mut parsed = Vec::new();
    for (path, text) in emit_program(&woven) {
        let file =
            parse_source(&path, &text).map_err(|e| WeaveError::Reparse(e.to_string()))?;
        parsed.push(file);
        files.insert(path, text);
    }

    let report = build_report(analysis, branch, set, plan, resolution)?;
    Ok(SynthesisResult {
        program: MiniProgram { files: parsed },
        report,
        files,
    })
}

fn build_report(
    analysis: &Analysis,
    branch: &Branch,
    set: &MappingSet,
    plan: &WeavePlan,
    resolution: &Resolution,
) -> Result<Report, WeaveError> {
    let label_of = |cluster: u32| -> String {
        branch
            .clusters
            .iter()
            .find(|c| c.id == cluster)
            .map(|c| c.label.clone())
            .unwrap_or_default()
    };
    let mut placements = Vec::new();
    for m in &set.mappings {
        placements.push(Placement {
            cluster_id: m.cluster_id,
            annotation: label_of(m.cluster_id),
            file: analysis.location_file(&m.location)?.to_path_buf(),
            line: analysis.location_line(&m.location)?,
            cls: m.cls,
        });
    }
    let channels = plan
        .channels
        .iter()
        .map(|c| {
            (
                label_of(c.producer_cluster),
                label_of(c.consumer_cluster),
                c.mechanism.describe().to_string(),
            )
        })
        .collect();
    let assignments = resolution
        .assignment
        .iter()
        .map(|(hole, var)| (*hole, var.name().to_string(), var.type_name().to_string()))
        .collect();
    Ok(Report {
        placements,
        cds: set.cds,
        cqs: set.cqs,
        cas: set.cas,
        channels,
        assignments,
    })
}

struct Insertion {
    path: BlockPath,
    index: usize,
    rank: (usize, u32),
    cluster: u32,
    stmts: Vec<Stmt>,
}

impl Insertion {
    /// Adjusts this insertion after `count` statements landed at
    /// `index` of `applied`: same-block indices shift, and paths that
    /// step through that block at or past the point shift their step.
    fn shift_for(&mut self, applied: &BlockPath, index: usize, count: usize) {
        if self.path == *applied {
            if self.index >= index {
                self.index += count;
            }
            return;
        }
        if applied.contains(&self.path) {
            let step = &mut self.path.steps[applied.steps.len()];
            let at = match step {
                crate::minilang::BlockStep::Then(i)
                | crate::minilang::BlockStep::Else(i)
                | crate::minilang::BlockStep::WhileBody(i) => i,
            };
            if *at >= index {
                *at += count;
            }
        }
    }
}

enum Capture {
    Local { type_name: String, name: String },
    Field { name: String },
}

fn capture_target(ch: &PlannedChannel) -> Capture {
    match &ch.mechanism {
        Mechanism::ReturnValue { binding, .. } => match binding {
            Binding::FreshLocal => Capture::Local {
                type_name: ch.carried_type.clone(),
                name: ch.var_name.clone(),
            },
            Binding::ExistingField { .. } | Binding::FreshField { .. } => Capture::Field {
                name: ch.var_name.clone(),
            },
        },
        _ => unreachable!("captures only exist for return-value channels"),
    }
}

/// Turns the bare call statement at `index` into a statement binding
/// its value.
fn rewrite_capture(program: &mut MiniProgram, path: &BlockPath, index: usize, target: &Capture) {
    let block = resolve_block_mut_in(program, path).expect("scope paths resolve");
    let stmt = &mut block.statements[index];
    let call = match &stmt.kind {
        StmtKind::Call(c) => c.clone(),
        other => unreachable!("capture sites are bare calls, found {other:?}"),
    };
    stmt.kind = match target {
        Capture::Local { type_name, name } => StmtKind::LocalDecl {
            type_name: type_name.clone(),
            name: name.clone(),
            init: Some(Expr::Call(call)),
        },
        Capture::Field { name } => StmtKind::Assign {
            target: Expr::Name(vec![name.clone()]),
            value: Expr::Call(call),
        },
    };
}

fn concrete_stmt(
    fspec: &FSpec,
    plan: &WeavePlan,
    resolution: &Resolution,
    cluster: u32,
    st: &crate::sketch::SketchStmt,
) -> Stmt {
    let value_expr = |v: &SlotValue| -> Expr {
        match v {
            SlotValue::Temp(t) => {
                Expr::Name(vec![plan.temp_names[&(cluster, t.clone())].clone()])
            }
            SlotValue::Hole(id) => Expr::Name(vec![resolution.assignment[id].name().to_string()]),
        }
    };
    let node = fspec.node(st.api_node);
    let args: Vec<Expr> = st.args.iter().map(value_expr).collect();
    let call = match node.kind {
        ApiKind::Constructor => Expr::New {
            type_name: fspec.canon(&node.owner_type).to_string(),
            args,
        },
        ApiKind::Instance => Expr::Call(CallExpr {
            receiver: Some(Box::new(value_expr(
                st.target.as_ref().expect("instance calls have receivers"),
            ))),
            method: node.member_name.clone(),
            args,
        }),
        ApiKind::Static => Expr::Call(CallExpr {
            receiver: Some(Box::new(Expr::Name(
                fspec
                    .canon(&node.owner_type)
                    .split('.')
                    .map(String::from)
                    .collect(),
            ))),
            method: node.member_name.clone(),
            args,
        }),
    };
    let kind = match &st.result_var {
        Some(t) => StmtKind::LocalDecl {
            type_name: fspec
                .canon(node.produced_type().expect("results imply produced values"))
                .to_string(),
            name: plan.temp_names[&(cluster, t.clone())].clone(),
            init: Some(call),
        },
        None => match call {
            Expr::Call(c) => StmtKind::Call(c),
            other => StmtKind::ExprStmt(other),
        },
    };
    plain_stmt(kind)
}

fn plain_stmt(kind: StmtKind) -> Stmt {
    Stmt {
        kind,
        line: 0,
        leading_comments: Vec::new(),
    }
}

fn producer_temp(plan: &WeavePlan, sketches: &[Sketch], ch: &PlannedChannel) -> String {
    let sk = sketch_of(sketches, ch.producer_cluster);
    let temp = sk.temp_of(ch.src_node).expect("data edges carry values");
    plan.temp_names[&(ch.producer_cluster, temp.to_string())].clone()
}

fn sketch_of(sketches: &[Sketch], cluster: u32) -> &Sketch {
    sketches
        .iter()
        .find(|s| s.cluster_id == cluster)
        .expect("one sketch per cluster")
}

/// Execution-order ranks over clusters from the inter-cluster edges,
/// ties by ascending id.
fn cluster_topo_ranks(branch: &Branch) -> BTreeMap<u32, usize> {
    let mut indegree: BTreeMap<u32, usize> =
        branch.clusters.iter().map(|c| (c.id, 0)).collect();
    for e in &branch.inter_cluster_edges {
        *indegree.get_mut(&e.dst_cluster).expect("edges stay inside") += 1;
    }
    let mut ready: BTreeSet<u32> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&id, _)| id)
        .collect();
    let mut ranks = BTreeMap::new();
    while let Some(&id) = ready.iter().next() {
        ready.remove(&id);
        ranks.insert(id, ranks.len());
        for e in branch.inter_cluster_edges.iter().filter(|e| e.src_cluster == id) {
            let d = indegree.get_mut(&e.dst_cluster).expect("edges stay inside");
            *d -= 1;
            if *d == 0 {
                ready.insert(e.dst_cluster);
            }
        }
    }
    // a cyclic remainder keeps id order after the acyclic part
    for c in &branch.clusters {
        let next = ranks.len();
        ranks.entry(c.id).or_insert(next);
    }
    ranks
}

fn class_decl_mut<'a>(program: &'a mut MiniProgram, r: &ClassRef) -> &'a mut ClassDecl {
    let mut iter = r.class_path.iter();
    let mut class = &mut program.files[r.file].classes[*iter.next().expect("non-empty class path")];
    for i in iter {
        class = &mut class.inner_classes[*i];
    }
    class
}

fn field_line(analysis: &Analysis, class: usize, name: &str) -> u32 {
    analysis
        .index
        .class_decl(analysis.program(), class)
        .fields
        .iter()
        .find(|f| f.name == name)
        .map(|f| f.line)
        .unwrap_or_default()
}

fn simple_of(type_name: &str) -> &str {
    type_name.rsplit('.').next().unwrap_or(type_name)
}

/// Names hands out fresh identifiers that collide with nothing already
/// declared in the program.
struct Namer {
    used: BTreeSet<String>,
    next_local: usize,
    next_field: BTreeMap<String, usize>,
}

impl Namer {
    fn new(program: &MiniProgram) -> Namer {
        fn block_names(block: &Block, out: &mut BTreeSet<String>) {
            for s in &block.statements {
                match &s.kind {
                    StmtKind::LocalDecl { name, .. } => {
                        out.insert(name.clone());
                    }
                    StmtKind::If {
                        then_block,
                        else_block,
                        ..
                    } => {
                        block_names(then_block, out);
                        if let Some(e) = else_block {
                            block_names(e, out);
                        }
                    }
                    StmtKind::While { body, .. } => block_names(body, out),
                    _ => {}
                }
            }
        }
        let mut used = BTreeSet::new();
        for class in program.all_classes() {
            used.insert(class.simple_name.clone());
            for f in &class.fields {
                used.insert(f.name.clone());
            }
            for m in &class.methods {
                used.insert(m.simple_name.clone());
                for p in &m.params {
                    used.insert(p.name.clone());
                }
                block_names(&m.body, &mut used);
            }
        }
        Namer {
            used,
            next_local: 0,
            next_field: BTreeMap::new(),
        }
    }

    fn fresh_local(&mut self) -> String {
        loop {
            self.next_local += 1;
            let name = format!("ip_v{}", self.next_local);
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }

    fn fresh_field(&mut self, simple: &str) -> String {
        loop {
            let k = self.next_field.entry(simple.to_string()).or_insert(0);
            *k += 1;
            let name = format!("ip_{}_{}", simple, k);
            if self.used.insert(name.clone()) {
                return name;
            }
        }
    }
}
