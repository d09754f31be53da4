//! Export-channel feasibility: how a value produced by one woven snippet
//! can reach a consumer snippet elsewhere in the program. The ladder is
//! tried in order: same-block temp, returned value captured at a call
//! site, an existing shared field, a fresh private field on a class both
//! ends can see.

use crate::analysis::{calls_in_stmt, Analysis, Location, VarKey, VarKind};
use crate::fspec::FSpec;
use crate::minilang::{resolve_block_in, BlockPath, BlockStep, StmtKind};

/// How a produced value travels from producer to consumer snippet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Mechanism {
    /// The consumer sees the producer's temp directly.
    Temp,
    /// The producer's host method returns the carried type; the weaver
    /// appends a `return` and captures the value at this call site.
    ReturnValue {
        call_scope: usize,
        call_stmt: usize,
        binding: Binding,
    },
    /// Assign into an already-declared field visible at both ends.
    ExistingField { class: usize, name: String },
    /// Declare a private field on a class both ends can see.
    FreshField { class: usize, is_static: bool },
}

/// Where a captured return value lands at the call site.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Binding {
    /// The call site shares the consumer's method: a fresh local works.
    FreshLocal,
    ExistingField { class: usize, name: String },
    FreshField { class: usize, is_static: bool },
}

impl Mechanism {
    pub fn describe(&self) -> &'static str {
        match self {
            Mechanism::Temp => "temp",
            Mechanism::ReturnValue { .. } => "returnValue",
            Mechanism::ExistingField { .. } => "existingField",
            Mechanism::FreshField { .. } => "freshField",
        }
    }
}

/// First applicable rung of the ladder for carrying `carried_type` from
/// `producer` to `consumer`, or `None` when no rung applies. Execution
/// order between the two locations is the caller's concern.
pub fn channel_plan(
    analysis: &Analysis,
    fspec: &FSpec,
    producer: &Location,
    consumer: &Location,
    carried_type: &str,
) -> Option<Mechanism> {
    let sp = &analysis.scopes[producer.scope];
    let sc = &analysis.scopes[consumer.scope];
    let abs_p = sp.start + producer.index;
    let abs_c = sc.start + consumer.index;

    // a local declared at the producer stays visible at the consumer
    if decl_visible_at(&sp.block, abs_p, &sc.block, abs_c) {
        return Some(Mechanism::Temp);
    }

    let mp = sp.method;
    let mc = sc.method;
    let producer_method = analysis.index.method_decl(analysis.program(), mp);

    if let Some(ret) = &producer_method.return_type {
        if fspec.same_type(ret, carried_type) {
            for cs in analysis.call_sites.iter().filter(|c| c.callee == mp) {
                if !analysis.executes_before(cs.scope, consumer.scope) {
                    continue;
                }
                let cb = &analysis.scopes[cs.scope];
                // capture works by rewriting the call statement, so only
                // statement-level calls qualify
                let block = resolve_block_in(analysis.program(), &cb.block)
                    .expect("scope paths resolve");
                let stmt = &block.statements[cs.stmt_index];
                if !matches!(stmt.kind, StmtKind::Call(_))
                    || cs.order + 1 != calls_in_stmt(stmt).len()
                {
                    continue;
                }
                let call_loc = Location {
                    scope: cs.scope,
                    index: cs.stmt_index - cb.start,
                };
                let binding = if cb.method == mc {
                    if decl_visible_at(&cb.block, cs.stmt_index, &sc.block, abs_c) {
                        Some(Binding::FreshLocal)
                    } else {
                        None
                    }
                } else if let Some((class, name)) =
                    shared_field(analysis, fspec, &call_loc, consumer, carried_type)
                {
                    Some(Binding::ExistingField { class, name })
                } else {
                    fresh_field_home(analysis, cb.method, mc)
                        .map(|(class, is_static)| Binding::FreshField { class, is_static })
                };
                if let Some(binding) = binding {
                    return Some(Mechanism::ReturnValue {
                        call_scope: cs.scope,
                        call_stmt: cs.stmt_index,
                        binding,
                    });
                }
            }
        }
    }

    if let Some((class, name)) = shared_field(analysis, fspec, producer, consumer, carried_type) {
        return Some(Mechanism::ExistingField { class, name });
    }

    fresh_field_home(analysis, mp, mc)
        .map(|(class, is_static)| Mechanism::FreshField { class, is_static })
}

/// A field of the carried type visible (unshadowed, statically legal) at
/// both locations; ties go to the earliest declaration.
fn shared_field(
    analysis: &Analysis,
    fspec: &FSpec,
    a: &Location,
    b: &Location,
    carried_type: &str,
) -> Option<(usize, String)> {
    let av = analysis.visible_vars(a).ok()?;
    let bv = analysis.visible_vars(b).ok()?;
    av.iter()
        .filter(|v| matches!(v.kind, VarKind::Field | VarKind::StaticField))
        .filter(|v| fspec.same_type(&v.type_name, carried_type))
        .find(|v| bv.iter().any(|w| w.key == v.key))
        .map(|v| match &v.key {
            VarKey::Field { class, name } => (*class, name.clone()),
            _ => unreachable!("field kinds carry field keys"),
        })
}

/// Innermost class lexically enclosing both methods, where a fresh field
/// could live; static whenever either endpoint is a static method.
fn fresh_field_home(analysis: &Analysis, mp: usize, mc: usize) -> Option<(usize, bool)> {
    let idx = &analysis.index;
    let chain_c = idx.enclosing_chain(idx.methods[mc].class);
    let home = idx
        .enclosing_chain(idx.methods[mp].class)
        .into_iter()
        .find(|c| chain_c.contains(c))?;
    let p_static = idx.method_decl(analysis.program(), mp).is_static;
    let c_static = idx.method_decl(analysis.program(), mc).is_static;
    Some((home, p_static || c_static))
}

/// Whether a declaration inserted at `decl_index` of `decl_block` is
/// lexically visible at position `use_index` of `use_block`.
pub(crate) fn decl_visible_at(
    decl_block: &BlockPath,
    decl_index: usize,
    use_block: &BlockPath,
    use_index: usize,
) -> bool {
    if decl_block.file != use_block.file
        || decl_block.class_path != use_block.class_path
        || decl_block.method != use_block.method
        || decl_block.steps.len() > use_block.steps.len()
        || use_block.steps[..decl_block.steps.len()] != decl_block.steps[..]
    {
        return false;
    }
    if decl_block.steps.len() == use_block.steps.len() {
        decl_index < use_index
    } else {
        // the use point sits in a nested block entered at this statement
        decl_index <= step_at(&use_block.steps[decl_block.steps.len()])
    }
}

fn step_at(step: &BlockStep) -> usize {
    match step {
        BlockStep::Then(i) | BlockStep::Else(i) | BlockStep::WhileBody(i) => *i,
    }
}
