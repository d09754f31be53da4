//! Snippet skeletons: each cluster's API subgraph becomes a list of
//! single-assignment statements whose unfilled receiver/argument
//! positions are typed holes for the resolver.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::fspec::{ApiKind, Branch, Cluster, DepKind, FSpec, SlotRole};

#[derive(Debug, Error)]
pub enum SketchError {
    #[error("cluster {0} has cyclic internal dependencies")]
    CyclicCluster(u32),
}

/// Value occupying a receiver or argument position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SlotValue {
    Temp(String),
    Hole(u32),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SketchStmt {
    /// Temp receiving the produced value, when the API produces one.
    pub result_var: Option<String>,
    pub api_node: u32,
    /// Receiver of an instance call.
    pub target: Option<SlotValue>,
    pub args: Vec<SlotValue>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hole {
    pub hole_id: u32,
    /// Canonical fully-qualified type.
    pub type_name: String,
    /// (statement index, slot position); the receiver is position 0 and
    /// arguments count from 1.
    pub site: (usize, usize),
    pub role: SlotRole,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sketch {
    pub cluster_id: u32,
    pub statements: Vec<SketchStmt>,
    pub holes: Vec<Hole>,
}

impl Sketch {
    /// Temp holding the value produced by a member node.
    pub fn temp_of(&self, node_id: u32) -> Option<&str> {
        self.statements
            .iter()
            .find(|s| s.api_node == node_id)
            .and_then(|s| s.result_var.as_deref())
    }

    pub fn hole(&self, id: u32) -> Option<&Hole> {
        self.holes.iter().find(|h| h.hole_id == id)
    }
}

/// Builds the sketch for one cluster. `next_hole` threads the hole-id
/// counter through every sketch of one synthesis task.
pub fn generate_sketch(
    fspec: &FSpec,
    cluster: &Cluster,
    next_hole: &mut u32,
) -> Result<Sketch, SketchError> {
    let order = topo_order(cluster)?;

    let mut temp_names: BTreeMap<u32, String> = BTreeMap::new();
    for (k, &id) in order
        .iter()
        .filter(|&&id| fspec.node(id).produced_type().is_some())
        .enumerate()
    {
        temp_names.insert(id, format!("t{}", k + 1));
    }

    // per member: (type, role, filled-by) in receiver-then-argument
    // order, filled by internal data edges exactly like the cluster's
    // slot derivation
    let mut positions: BTreeMap<u32, Vec<(String, SlotRole, Option<u32>)>> = BTreeMap::new();
    for &id in &cluster.member_ids {
        let node = fspec.node(id);
        let mut pos: Vec<(String, SlotRole, Option<u32>)> = Vec::new();
        if node.kind == ApiKind::Instance {
            pos.push((node.owner_type.clone(), SlotRole::Target, None));
        }
        for p in &node.param_types {
            pos.push((p.clone(), SlotRole::Argument, None));
        }
        for edge in cluster
            .internal_edges
            .iter()
            .filter(|e| e.kind == DepKind::Data && e.dst == id)
        {
            let produced = match fspec.node(edge.src).produced_type() {
                Some(t) => t.to_string(),
                None => continue,
            };
            if let Some(i) = pos
                .iter()
                .position(|(t, _, fill)| fill.is_none() && fspec.same_type(t, &produced))
            {
                pos[i].2 = Some(edge.src);
            }
        }
        positions.insert(id, pos);
    }

    let mut statements = Vec::new();
    let mut holes = Vec::new();
    for (stmt_idx, &id) in order.iter().enumerate() {
        let node = fspec.node(id);
        let has_target = node.kind == ApiKind::Instance;
        let mut target = None;
        let mut args = Vec::new();
        for (i, (type_name, role, fill)) in positions[&id].iter().enumerate() {
            let value = match fill {
                Some(src) => SlotValue::Temp(
                    temp_names
                        .get(src)
                        .expect("data-edge sources produce values")
                        .clone(),
                ),
                None => {
                    let hole_id = *next_hole;
                    *next_hole += 1;
                    let slot_position = if has_target { i } else { i + 1 };
                    holes.push(Hole {
                        hole_id,
                        type_name: fspec.canon(type_name).to_string(),
                        site: (stmt_idx, slot_position),
                        role: *role,
                    });
                    SlotValue::Hole(hole_id)
                }
            };
            if has_target && i == 0 {
                target = Some(value);
            } else {
                args.push(value);
            }
        }
        statements.push(SketchStmt {
            result_var: temp_names.get(&id).cloned(),
            api_node: id,
            target,
            args,
        });
    }

    Ok(Sketch {
        cluster_id: cluster.id,
        statements,
        holes,
    })
}

/// Sketches for every cluster of a branch with task-wide hole ids.
pub fn generate_sketches(fspec: &FSpec, branch: &Branch) -> Result<Vec<Sketch>, SketchError> {
    let mut next_hole = 1;
    branch
        .clusters
        .iter()
        .map(|c| generate_sketch(fspec, c, &mut next_hole))
        .collect()
}

/// Member order respecting every internal edge; ties go to the smaller
/// node id.
fn topo_order(cluster: &Cluster) -> Result<Vec<u32>, SketchError> {
    let mut indegree: BTreeMap<u32, usize> =
        cluster.member_ids.iter().map(|&id| (id, 0)).collect();
    for e in &cluster.internal_edges {
        *indegree.get_mut(&e.dst).expect("internal edges stay inside") += 1;
    }
    let mut ready: BTreeSet<u32> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&id, _)| id)
        .collect();
    let mut order = Vec::new();
    while let Some(&id) = ready.iter().next() {
        ready.remove(&id);
        order.push(id);
        for e in cluster.internal_edges.iter().filter(|e| e.src == id) {
            let d = indegree.get_mut(&e.dst).expect("internal edges stay inside");
            *d -= 1;
            if *d == 0 {
                ready.insert(e.dst);
            }
        }
    }
    if order.len() != cluster.member_ids.len() {
        return Err(SketchError::CyclicCluster(cluster.id));
    }
    Ok(order)
}

/// Stable text form; holes print as `?<id>:<type>`.
pub fn render_sketch(fspec: &FSpec, sketch: &Sketch) -> String {
    let slot = |v: &SlotValue| match v {
        SlotValue::Temp(t) => t.clone(),
        SlotValue::Hole(id) => {
            let hole = sketch.hole(*id).expect("holes and sites agree");
            format!("?{}:{}", hole.hole_id, hole.type_name)
        }
    };
    let mut out = String::new();
    for st in &sketch.statements {
        let node = fspec.node(st.api_node);
        let args: Vec<String> = st.args.iter().map(&slot).collect();
        let args = args.join(", ");
        let mut line = String::new();
        if let Some(t) = &st.result_var {
            line.push_str(t);
            line.push_str(" = ");
        }
        match node.kind {
            ApiKind::Constructor => {
                line.push_str(&format!("new {}({})", fspec.canon(&node.owner_type), args));
            }
            ApiKind::Instance => {
                let recv = slot(st.target.as_ref().expect("instance calls have receivers"));
                line.push_str(&format!("{}.{}({})", recv, node.member_name, args));
            }
            ApiKind::Static => {
                line.push_str(&format!(
                    "{}.{}({})",
                    fspec.canon(&node.owner_type),
                    node.member_name,
                    args
                ));
            }
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fspec::{cluster_branch, enumerate_branches, ApiNode, FsEdge};

    fn fspec_with(
        nodes: Vec<ApiNode>,
        edges: Vec<FsEdge>,
        start: u32,
        end: u32,
        aliases: &[(&str, &str)],
    ) -> FSpec {
        let mut fspec = FSpec {
            name: "t".into(),
            nodes: nodes.into_iter().map(|n| (n.id, n)).collect(),
            edges,
            start_ids: [start].into(),
            end_ids: [end].into(),
            aliases: aliases
                .iter()
                .map(|(a, b)| (a.to_string(), b.to_string()))
                .collect(),
        };
        fspec.validate().unwrap();
        fspec
    }

    fn ctor(id: u32, owner: &str, annotation: &str) -> ApiNode {
        ApiNode {
            id,
            kind: ApiKind::Constructor,
            owner_type: owner.into(),
            member_name: owner.rsplit('.').next().unwrap().into(),
            param_types: vec![],
            return_type: Some(owner.into()),
            annotation: annotation.into(),
        }
    }

    fn data(src: u32, dst: u32) -> FsEdge {
        FsEdge {
            src,
            dst,
            kind: DepKind::Data,
            freq: 1,
        }
    }

    /// Handler ctor feeding a two-argument context ctor: the unfed
    /// String argument becomes the one hole.
    fn init_like() -> (FSpec, Branch) {
        let handler = "sec.cb.Handler";
        let context = "sec.login.Context";
        let mut ctx = ctor(2, context, "#Initialization");
        ctx.param_types = vec!["java.lang.String".into(), handler.into()];
        let fspec = fspec_with(
            vec![ctor(1, handler, "#Initialization"), ctx],
            vec![data(1, 2)],
            1,
            2,
            &[("sec.cb.Handler", "sec.cb.TextHandler")],
        );
        let branches = enumerate_branches(&fspec);
        let (branch, _) = cluster_branch(&fspec, &branches[0], 3).unwrap();
        assert_eq!(branch.clusters.len(), 1);
        (fspec, branch)
    }

    #[test]
    fn internal_edges_become_temp_flow_and_the_rest_holes() {
        let (fspec, branch) = init_like();
        let sketch = generate_sketch(&fspec, &branch.clusters[0], &mut 1).unwrap();
        assert_eq!(sketch.statements.len(), 2);
        assert_eq!(sketch.statements[0].result_var.as_deref(), Some("t1"));
        assert_eq!(sketch.statements[1].result_var.as_deref(), Some("t2"));
        assert_eq!(
            sketch.statements[1].args,
            vec![SlotValue::Hole(1), SlotValue::Temp("t1".into())]
        );
        assert_eq!(sketch.holes.len(), 1);
        let hole = &sketch.holes[0];
        assert_eq!(hole.type_name, "java.lang.String");
        assert_eq!(hole.site, (1, 1));
        assert_eq!(hole.role, SlotRole::Argument);
    }

    #[test]
    fn rendering_is_the_documented_shape() {
        let (fspec, branch) = init_like();
        let sketch = generate_sketch(&fspec, &branch.clusters[0], &mut 1).unwrap();
        assert_eq!(
            render_sketch(&fspec, &sketch),
            "t1 = new sec.cb.TextHandler()\n\
             t2 = new sec.login.Context(?1:java.lang.String, t1)\n"
        );
    }

    #[test]
    fn lone_instance_call_gets_a_target_hole() {
        let owner = "sec.login.Context";
        let node = ApiNode {
            id: 7,
            kind: ApiKind::Instance,
            owner_type: owner.into(),
            member_name: "login".into(),
            param_types: vec![],
            return_type: None,
            annotation: "#Logging_In".into(),
        };
        let fspec = fspec_with(vec![node], vec![], 7, 7, &[]);
        let branches = enumerate_branches(&fspec);
        let (branch, _) = cluster_branch(&fspec, &branches[0], 0).unwrap();
        let sketch = generate_sketch(&fspec, &branch.clusters[0], &mut 4).unwrap();
        assert_eq!(sketch.statements.len(), 1);
        assert_eq!(sketch.statements[0].result_var, None);
        assert_eq!(sketch.statements[0].target, Some(SlotValue::Hole(4)));
        let hole = &sketch.holes[0];
        assert_eq!(hole.type_name, owner);
        assert_eq!(hole.site, (0, 0));
        assert_eq!(hole.role, SlotRole::Target);
        assert_eq!(
            render_sketch(&fspec, &sketch),
            "?4:sec.login.Context.login()\n"
        );
    }

    #[test]
    fn hole_ids_run_across_sketches_and_match_cluster_slots() {
        let (fspec, branch) = init_like();
        let sketches = generate_sketches(&fspec, &branch).unwrap();
        let mut seen = BTreeSet::new();
        for (cluster, sketch) in branch.clusters.iter().zip(&sketches) {
            assert_eq!(cluster.slots.len(), sketch.holes.len());
            for (slot, hole) in cluster.slots.iter().zip(&sketch.holes) {
                assert_eq!(fspec.canon(&slot.type_name), hole.type_name);
                assert_eq!(slot.role, hole.role);
                assert!(seen.insert(hole.hole_id), "hole ids unique per task");
            }
            let members: BTreeSet<u32> = cluster.member_ids.iter().copied().collect();
            let emitted: BTreeSet<u32> = sketch.statements.iter().map(|s| s.api_node).collect();
            assert_eq!(members, emitted, "every member in exactly one statement");
        }
    }

    #[test]
    fn ties_resolve_by_ascending_node_id() {
        let mut cluster = Cluster {
            id: 0,
            label: "#X".into(),
            member_ids: vec![9, 4],
            internal_edges: vec![],
            slots: vec![],
        };
        let order = topo_order(&cluster).unwrap();
        assert_eq!(order, vec![4, 9]);
        cluster.internal_edges = vec![data(9, 4), data(4, 9)];
        assert!(matches!(
            topo_order(&cluster),
            Err(SketchError::CyclicCluster(0))
        ));
    }
}
