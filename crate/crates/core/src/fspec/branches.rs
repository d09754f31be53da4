use super::*;

/// Enumerates every start-to-end path of the specification DAG, heaviest
/// first. A path completes on the first end node it reaches; the weight is
/// the sum of edge frequencies along it. Ties order by the node id
/// sequence, so the result is fully deterministic.
pub fn enumerate_branches(fspec: &FSpec) -> Vec<Branch> {
    let mut branches = Vec::new();
    for &start in &fspec.start_ids {
        let mut path = vec![start];
        walk(fspec, start, 0, &mut path, &mut branches);
    }
    branches.sort_by(|a, b| {
        b.weight
            .cmp(&a.weight)
            .then_with(|| a.node_ids.cmp(&b.node_ids))
    });
    branches
}

fn walk(fspec: &FSpec, at: u32, weight: u32, path: &mut Vec<u32>, out: &mut Vec<Branch>) {
    if fspec.end_ids.contains(&at) {
        out.push(Branch {
            node_ids: path.clone(),
            weight,
            clusters: Vec::new(),
            inter_cluster_edges: Vec::new(),
        });
        return;
    }
    for edge in fspec.outgoing(at) {
        path.push(edge.dst);
        walk(fspec, edge.dst, weight + edge.freq, path, out);
        path.pop();
    }
}
