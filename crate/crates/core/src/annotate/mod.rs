//! Placement scoring and ranking: assign every cluster of a branch to a
//! program location, validate dependency order and channel feasibility,
//! and enumerate complete placements best-first.

mod channel;

pub use channel::{channel_plan, Binding, Mechanism};

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap};

use thiserror::Error;

use crate::analysis::{Analysis, Location};
use crate::fspec::{Branch, Cluster, DepKind, FSpec};
use crate::{score, Score, ScoreCoefficients};

#[derive(Debug, Error)]
pub enum AnnotateError {
    #[error("no dependency-feasible placement found ({explored} candidate sets examined)")]
    NoFeasibleMapping { explored: usize },
    #[error("placement does not cover cluster {0}")]
    UnknownCluster(u32),
}

/// One cluster placed at one location, with its location scores.
#[derive(Debug, Clone, PartialEq)]
pub struct Mapping {
    pub cluster_id: u32,
    pub location: Location,
    pub mns: Score,
    pub vas: Score,
    pub cls: Score,
}

/// A complete placement of a branch's clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct MappingSet {
    pub branch_id: usize,
    /// One mapping per cluster, in cluster-id order.
    pub mappings: Vec<Mapping>,
    pub cds: bool,
    pub cqs: Score,
    pub cas: Score,
}

impl MappingSet {
    pub fn mean_cls(&self) -> Score {
        self.mappings.iter().map(|m| m.cls).sum::<Score>() / self.mappings.len() as Score
    }

    pub fn location_of(&self, cluster: u32) -> Option<&Location> {
        self.mappings
            .iter()
            .find(|m| m.cluster_id == cluster)
            .map(|m| &m.location)
    }

    pub fn locations(&self) -> BTreeMap<u32, Location> {
        self.mappings
            .iter()
            .map(|m| (m.cluster_id, m.location))
            .collect()
    }
}

/// Candidate locations for a cluster: the end of every method body, plus
/// the point after each statement that defines a variable of one of the
/// cluster's slot types.
pub fn candidate_locations(analysis: &Analysis, fspec: &FSpec, cluster: &Cluster) -> Vec<Location> {
    let mut out = BTreeSet::new();
    for m in 0..analysis.index.methods.len() {
        let scope = analysis.method_final_scope(m);
        out.insert(Location {
            scope,
            index: analysis.scopes[scope].len,
        });
    }
    let slot_types: BTreeSet<&str> = cluster
        .slots
        .iter()
        .map(|s| fspec.canon(&s.type_name))
        .collect();
    if !slot_types.is_empty() {
        let program = analysis.program();
        for scope in &analysis.scopes {
            let block = crate::minilang::resolve_block_in(program, &scope.block)
                .expect("scope paths stay valid");
            for offset in 0..scope.len {
                let abs = scope.start + offset;
                let pos = crate::analysis::SyntaxPos {
                    method: scope.method,
                    block: &scope.block,
                    index: abs,
                };
                let defines_slot_type =
                    crate::analysis::stmt_defs(program, &analysis.index, &pos, &block.statements[abs].kind)
                        .iter()
                        .any(|(_, ty)| slot_types.contains(fspec.canon(ty)));
                if defines_slot_type {
                    out.insert(Location {
                        scope: scope.id,
                        index: offset + 1,
                    });
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Availability score of a cluster's slots at a location: the product
/// over distinct slot types of the clamped availability ratio.
pub fn vas_at(analysis: &Analysis, fspec: &FSpec, cluster: &Cluster, loc: &Location) -> Score {
    let mut required: BTreeMap<&str, usize> = BTreeMap::new();
    for slot in &cluster.slots {
        *required.entry(fspec.canon(&slot.type_name)).or_default() += 1;
    }
    let vars = analysis
        .visible_vars(loc)
        .expect("scored locations are valid");
    let pairs: Vec<(usize, usize)> = required
        .iter()
        .map(|(ty, &req)| {
            let avail = vars
                .iter()
                .filter(|v| v.must_initialized && fspec.canon(&v.type_name) == *ty)
                .count();
            (avail, req)
        })
        .collect();
    score::vas(&pairs)
}

/// All candidate locations of one cluster scored and ranked: location
/// score descending, then location order for determinism.
pub fn score_cluster_locations(
    analysis: &Analysis,
    fspec: &FSpec,
    cluster: &Cluster,
    coeffs: &ScoreCoefficients,
) -> Vec<Mapping> {
    let mut out: Vec<Mapping> = candidate_locations(analysis, fspec, cluster)
        .into_iter()
        .map(|loc| {
            let method = analysis.scopes[loc.scope].method;
            let name = &analysis.index.methods[method].simple_name;
            let mns: Score = score::mns(cluster.label_text(), name);
            let vas = vas_at(analysis, fspec, cluster, &loc);
            let cls = score::cls(mns, vas, coeffs);
            Mapping {
                cluster_id: cluster.id,
                location: loc,
                mns,
                vas,
                cls,
            }
        })
        .collect();
    out.sort_by(|a, b| b.cls.total_cmp(&a.cls).then(a.location.cmp(&b.location)));
    out
}

/// Binary dependency check of a complete placement: every inter-cluster
/// edge must run in order (strict statement order inside one scope), and
/// every data edge must have a workable export channel.
pub fn cds(
    analysis: &Analysis,
    fspec: &FSpec,
    branch: &Branch,
    locations: &BTreeMap<u32, Location>,
) -> Result<bool, AnnotateError> {
    for edge in &branch.inter_cluster_edges {
        let a = locations
            .get(&edge.src_cluster)
            .ok_or(AnnotateError::UnknownCluster(edge.src_cluster))?;
        let b = locations
            .get(&edge.dst_cluster)
            .ok_or(AnnotateError::UnknownCluster(edge.dst_cluster))?;
        let ordered = if a.scope == b.scope {
            a.index < b.index
        } else {
            analysis.executes_before(a.scope, b.scope)
        };
        if !ordered {
            return Ok(false);
        }
        if edge.kind == DepKind::Data {
            let carried = fspec
                .node(edge.src_node)
                .produced_type()
                .expect("data edges have producing nodes");
            if channel_plan(analysis, fspec, a, b, carried).is_none() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Cohesion score of a placement: clusters per distinct host method.
pub fn cqs_of(analysis: &Analysis, mappings: &[Mapping]) -> Score {
    let mut per_method: BTreeMap<usize, usize> = BTreeMap::new();
    for m in mappings {
        *per_method
            .entry(analysis.scopes[m.location.scope].method)
            .or_default() += 1;
    }
    let counts: Vec<usize> = per_method.into_values().collect();
    score::cqs(&counts)
}

/// Instability of the host methods (report-only; never enters ranking).
pub fn ccs_of(analysis: &Analysis, mappings: &[Mapping]) -> Score {
    let hosts: BTreeSet<usize> = mappings
        .iter()
        .map(|m| analysis.scopes[m.location.scope].method)
        .collect();
    let pairs: Vec<(usize, usize)> = hosts
        .into_iter()
        .map(|m| analysis.method_coupling(m))
        .collect();
    score::ccs(&pairs)
}

#[derive(PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

type SetKey = (Reverse<OrdF64>, Reverse<OrdF64>, Vec<(usize, usize)>);

fn set_key(set: &MappingSet) -> SetKey {
    (
        Reverse(OrdF64(set.cas)),
        Reverse(OrdF64(set.cqs)),
        set.mappings
            .iter()
            .map(|m| (m.location.scope, m.location.index))
            .collect(),
    )
}

/// Ranked feasible placements of a branch, best first. Explores the
/// Cartesian product of per-cluster ranked location lists best-first by
/// summed location score, keeps dependency-feasible sets, and stops once
/// no unexplored set can still enter the kept list.
pub fn rank_mapping_sets(
    analysis: &Analysis,
    fspec: &FSpec,
    branch_id: usize,
    branch: &Branch,
    coeffs: &ScoreCoefficients,
) -> Result<Vec<MappingSet>, AnnotateError> {
    let n = branch.clusters.len();
    assert!(n > 0, "clustered branches are nonempty");
    let lists: Vec<Vec<Mapping>> = branch
        .clusters
        .iter()
        .map(|c| score_cluster_locations(analysis, fspec, c, coeffs))
        .collect();
    if lists.iter().any(|l| l.is_empty()) {
        return Err(AnnotateError::NoFeasibleMapping { explored: 0 });
    }

    let bound = coeffs.list_cap * n;
    let hard_cap = bound.saturating_mul(500);
    let mut heap: BinaryHeap<(OrdF64, Reverse<Vec<usize>>)> = BinaryHeap::new();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    // summed left to right so ordering is bit-identical to a plain
    // enumeration recomputing each sum from scratch
    let sum_of = |idx: &[usize]| -> Score {
        idx.iter()
            .enumerate()
            .map(|(i, &j)| lists[i][j].cls)
            .sum()
    };
    let first = vec![0usize; n];
    seen.insert(first.clone());
    heap.push((OrdF64(sum_of(&first)), Reverse(first)));

    let mut kept: BTreeMap<SetKey, MappingSet> = BTreeMap::new();
    let mut explored = 0usize;
    while let Some((OrdF64(sum), Reverse(idx))) = heap.pop() {
        explored += 1;
        for (i, list) in lists.iter().enumerate() {
            let mut next = idx.clone();
            next[i] += 1;
            if next[i] < list.len() && seen.insert(next.clone()) {
                let next_sum = sum_of(&next);
                heap.push((OrdF64(next_sum), Reverse(next)));
            }
        }

        let mappings: Vec<Mapping> = idx
            .iter()
            .enumerate()
            .map(|(i, &j)| lists[i][j].clone())
            .collect();
        let locations: BTreeMap<u32, Location> = mappings
            .iter()
            .map(|m| (m.cluster_id, m.location))
            .collect();
        if cds(analysis, fspec, branch, &locations)? {
            let cqs = cqs_of(analysis, &mappings);
            let cas = score::cas(true, cqs, sum / n as Score, coeffs);
            let set = MappingSet {
                branch_id,
                mappings,
                cds: true,
                cqs,
                cas,
            };
            kept.insert(set_key(&set), set);
            if kept.len() > coeffs.list_cap {
                kept.pop_last();
            }
        } else if kept.is_empty() && explored >= bound {
            return Err(AnnotateError::NoFeasibleMapping { explored });
        }

        if kept.len() == coeffs.list_cap {
            if let Some((OrdF64(top_sum), _)) = heap.peek() {
                let best_possible = score::cas_upper_bound(top_sum / n as Score, coeffs);
                let worst_kept = kept
                    .last_key_value()
                    .expect("kept is full")
                    .1
                    .cas;
                if best_possible < worst_kept {
                    break;
                }
            }
        }
        if explored >= hard_cap && !kept.is_empty() {
            break;
        }
    }

    if kept.is_empty() {
        return Err(AnnotateError::NoFeasibleMapping { explored });
    }
    Ok(kept.into_values().collect())
}
