use super::levenshtein::levenshtein;
use super::*;

/// One merge performed while building the inspection hierarchy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeStep {
    pub left_members: Vec<u32>,
    pub right_members: Vec<u32>,
    pub distance: usize,
    /// Medoid annotation of the merged group.
    pub label: String,
}

/// Groups the branch nodes into clusters by annotation distance and fills
/// in labels, internal edges, slots and cross-cluster edges.
///
/// Pass one pairs nodes greedily: the closest annotation pair at distance
/// at most `tau` forms a cluster of two, repeating over the remaining
/// nodes; everything left stays a singleton. Pass two labels each cluster
/// with its medoid annotation (minimum summed distance to the rest,
/// lexicographically smallest on ties). Pass three keeps merging the two
/// closest clusters while their label distance stays within `tau`,
/// recording each step; that hierarchy is returned for inspection and the
/// pass-one clusters are what the rest of the pipeline consumes.
pub fn cluster_branch(
    fspec: &FSpec,
    branch: &Branch,
    tau: usize,
) -> Result<(Branch, Vec<MergeStep>), FspecError> {
    let members = &branch.node_ids;
    for &id in members {
        if fspec.node(id).annotation_text().is_empty() {
            return Err(FspecError::MissingAnnotation(id));
        }
    }
    let text = |id: u32| fspec.node(id).annotation_text();

    // --- pass one: greedy pairing under the distance cutoff ---
    let n = members.len();
    let mut paired: Vec<Option<usize>> = vec![None; n]; // position -> cluster index
    let mut groups: Vec<Vec<usize>> = Vec::new(); // positions in branch order
    loop {
        let mut best: Option<(usize, usize, usize)> = None; // (distance, i, j)
        for i in 0..n {
            if paired[i].is_some() {
                continue;
            }
            for j in (i + 1)..n {
                if paired[j].is_some() {
                    continue;
                }
                let d = levenshtein(text(members[i]), text(members[j]));
                if d <= tau && best.map(|(bd, bi, bj)| (d, i, j) < (bd, bi, bj)).unwrap_or(true) {
                    best = Some((d, i, j));
                }
            }
        }
        match best {
            Some((_, i, j)) => {
                let g = groups.len();
                paired[i] = Some(g);
                paired[j] = Some(g);
                groups.push(vec![i, j]);
            }
            None => break,
        }
    }
    for i in 0..n {
        if paired[i].is_none() {
            paired[i] = Some(groups.len());
            groups.push(vec![i]);
        }
    }
    // order clusters by the branch position of their first member
    groups.sort_by_key(|g| g[0]);

    let mut clusters: Vec<Cluster> = groups
        .iter()
        .enumerate()
        .map(|(idx, positions)| {
            let member_ids: Vec<u32> = positions.iter().map(|&p| members[p]).collect();
            let label = medoid_label(fspec, &member_ids);
            let internal_edges = fspec
                .edges
                .iter()
                .filter(|e| member_ids.contains(&e.src) && member_ids.contains(&e.dst))
                .copied()
                .collect();
            Cluster {
                id: idx as u32,
                label,
                member_ids,
                internal_edges,
                slots: Vec::new(),
            }
        })
        .collect();
    for cluster in &mut clusters {
        cluster.slots = derive_slots(fspec, cluster);
    }

    // --- pass three: inspection hierarchy over the pass-one clusters ---
    let mut hierarchy = Vec::new();
    let mut work: Vec<(Vec<u32>, String)> = clusters
        .iter()
        .map(|c| (c.member_ids.clone(), c.label.clone()))
        .collect();
    while work.len() > 1 {
        let mut best: Option<(usize, usize, usize)> = None;
        for i in 0..work.len() {
            for j in (i + 1)..work.len() {
                let d = levenshtein(
                    work[i].1.trim_start_matches('#'),
                    work[j].1.trim_start_matches('#'),
                );
                if best.map(|(bd, bi, bj)| (d, i, j) < (bd, bi, bj)).unwrap_or(true) {
                    best = Some((d, i, j));
                }
            }
        }
        let (d, i, j) = best.unwrap();
        if d > tau {
            break;
        }
        let (left, _) = work[i].clone();
        let (right, _) = work[j].clone();
        let mut merged = left.clone();
        merged.extend(right.iter().copied());
        let label = medoid_label(fspec, &merged);
        hierarchy.push(MergeStep {
            left_members: left,
            right_members: right,
            distance: d,
            label: label.clone(),
        });
        work.remove(j);
        work[i] = (merged, label);
    }

    let inter_cluster_edges = inter_edges(fspec, branch, &clusters);
    let mut enriched = branch.clone();
    enriched.clusters = clusters;
    enriched.inter_cluster_edges = inter_cluster_edges;
    Ok((enriched, hierarchy))
}

/// The member annotation minimizing the summed distance to the others;
/// lexicographically smallest on ties.
fn medoid_label(fspec: &FSpec, member_ids: &[u32]) -> String {
    let mut best: Option<(usize, &str)> = None;
    for &id in member_ids {
        let a = fspec.node(id).annotation_text();
        let total: usize = member_ids
            .iter()
            .map(|&other| levenshtein(a, fspec.node(other).annotation_text()))
            .sum();
        if best.map(|(bt, ba)| (total, a) < (bt, ba)).unwrap_or(true) {
            best = Some((total, a));
        }
    }
    format!("#{}", best.expect("non-empty cluster").1)
}

/// Open positions of a cluster: each member contributes its instance-call
/// target and its parameters; internal data edges satisfy positions in
/// target-first order when the produced type matches. What remains are the
/// slots the annotator must find values for.
fn derive_slots(fspec: &FSpec, cluster: &Cluster) -> Vec<Slot> {
    let mut slots = Vec::new();
    for &id in &cluster.member_ids {
        let node = fspec.node(id);
        // (type, role) positions in fill order
        let mut positions: Vec<(String, SlotRole, bool)> = Vec::new();
        if node.kind == ApiKind::Instance {
            positions.push((node.owner_type.clone(), SlotRole::Target, false));
        }
        for p in &node.param_types {
            positions.push((p.clone(), SlotRole::Argument, false));
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
            if let Some(pos) = positions
                .iter()
                .position(|(t, _, used)| !used && fspec.same_type(t, &produced))
            {
                positions[pos].2 = true;
            }
        }
        for (type_name, role, used) in positions {
            if !used {
                slots.push(Slot {
                    type_name,
                    role,
                    node_id: id,
                });
            }
        }
    }
    slots
}

/// Specification edges between branch nodes that ended up in different
/// clusters, annotated with the cluster pair they connect.
fn inter_edges(fspec: &FSpec, branch: &Branch, clusters: &[Cluster]) -> Vec<InterClusterEdge> {
    let cluster_of = |node: u32| {
        clusters
            .iter()
            .find(|c| c.member_ids.contains(&node))
            .map(|c| c.id)
    };
    let mut out = Vec::new();
    for edge in &fspec.edges {
        if !branch.node_ids.contains(&edge.src) || !branch.node_ids.contains(&edge.dst) {
            continue;
        }
        let (src_cluster, dst_cluster) = match (cluster_of(edge.src), cluster_of(edge.dst)) {
            (Some(a), Some(b)) if a != b => (a, b),
            _ => continue,
        };
        out.push(InterClusterEdge {
            src_cluster,
            dst_cluster,
            kind: edge.kind,
            src_node: edge.src,
            dst_node: edge.dst,
            freq: edge.freq,
        });
    }
    out.sort_by_key(|e| (e.src_cluster, e.dst_cluster, e.src_node, e.dst_node, e.kind));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn method_node(id: u32, owner: &str, name: &str, annotation: &str) -> ApiNode {
        ApiNode {
            id,
            kind: ApiKind::Instance,
            owner_type: owner.to_string(),
            member_name: name.to_string(),
            param_types: vec![],
            return_type: None,
            annotation: annotation.to_string(),
        }
    }

    /// Four chained calls whose annotations pair up only under a loose
    /// threshold: the two initialize* labels sit at distance 7 while every
    /// other pair is 13 or more.
    fn chain() -> FSpec {
        let mut fspec = FSpec {
            name: "chain".to_string(),
            nodes: BTreeMap::from([
                (1, method_node(1, "p.A", "a", "#initializeCallback")),
                (2, method_node(2, "p.B", "b", "#initializeContext")),
                (3, method_node(3, "p.C", "c", "#performLogin")),
                (4, method_node(4, "p.D", "d", "#readPrincipals")),
            ]),
            edges: vec![
                FsEdge { src: 1, dst: 2, kind: DepKind::Control, freq: 1 },
                FsEdge { src: 2, dst: 3, kind: DepKind::Control, freq: 1 },
                FsEdge { src: 3, dst: 4, kind: DepKind::Control, freq: 1 },
            ],
            start_ids: [1].into(),
            end_ids: [4].into(),
            aliases: BTreeMap::new(),
        };
        fspec.validate().unwrap();
        fspec
    }

    #[test]
    fn tight_threshold_keeps_singletons() {
        let fspec = chain();
        let branch = &enumerate_branches(&fspec)[0];
        let (clustered, hierarchy) = cluster_branch(&fspec, branch, 3).unwrap();
        assert_eq!(clustered.clusters.len(), 4);
        assert!(hierarchy.is_empty());
    }

    #[test]
    fn loose_threshold_pairs_the_close_annotations() {
        let fspec = chain();
        let branch = &enumerate_branches(&fspec)[0];
        let (clustered, _) = cluster_branch(&fspec, branch, 7).unwrap();
        let members: Vec<_> = clustered
            .clusters
            .iter()
            .map(|c| c.member_ids.clone())
            .collect();
        assert_eq!(members, vec![vec![1, 2], vec![3], vec![4]]);
        // medoid tie resolves to the lexicographically smaller annotation
        assert_eq!(clustered.clusters[0].label, "#initializeCallback");
    }

    #[test]
    fn hierarchy_records_merges_without_changing_clusters() {
        let fspec = chain();
        let branch = &enumerate_branches(&fspec)[0];
        let (clustered, hierarchy) = cluster_branch(&fspec, branch, 20).unwrap();
        // every pair is within 20, so merging runs to a single group
        assert_eq!(hierarchy.len(), clustered.clusters.len() - 1);
        let last = hierarchy.last().unwrap();
        assert_eq!(
            last.left_members.len() + last.right_members.len(),
            branch.node_ids.len()
        );
    }

    #[test]
    fn equal_annotations_cluster_at_distance_zero() {
        let mut fspec = chain();
        fspec.nodes.get_mut(&3).unwrap().annotation = "#initializeCallback".to_string();
        let branch = &enumerate_branches(&fspec)[0];
        let (clustered, _) = cluster_branch(&fspec, branch, 3).unwrap();
        let members: Vec<_> = clustered
            .clusters
            .iter()
            .map(|c| c.member_ids.clone())
            .collect();
        assert_eq!(members, vec![vec![1, 3], vec![2], vec![4]]);
    }

    #[test]
    fn inter_cluster_edges_follow_the_clustering() {
        let fspec = chain();
        let branch = &enumerate_branches(&fspec)[0];
        let (clustered, _) = cluster_branch(&fspec, branch, 7).unwrap();
        let pairs: Vec<_> = clustered
            .inter_cluster_edges
            .iter()
            .map(|e| (e.src_cluster, e.dst_cluster, e.src_node, e.dst_node))
            .collect();
        // 1->2 is internal to cluster 0; 2->3 and 3->4 cross clusters
        assert_eq!(pairs, vec![(0, 1, 2, 3), (1, 2, 3, 4)]);
    }
}
