//! API flow specifications: a DAG of annotated API member nodes with
//! data/control dependency edges, loading/saving from a line-oriented text
//! format, start-to-end branch enumeration and annotation-distance
//! clustering of branch nodes.

mod branches;
mod cluster;
mod format;
mod levenshtein;

pub use branches::enumerate_branches;
pub use cluster::{cluster_branch, MergeStep};
pub use format::{load_fspec, load_fspec_with_warnings, render_fspec, save_fspec};
pub use levenshtein::levenshtein;

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum FspecError {
    #[error("{path}:{line}: {message}")]
    Format {
        path: String,
        line: usize,
        message: String,
    },
    #[error("dependency cycle through nodes {0:?}")]
    Cycle(Vec<u32>),
    #[error("edge references unknown node {0}")]
    DanglingEdge(u32),
    #[error("node {0} lies on no start-to-end path")]
    OffPath(u32),
    #[error("node {0} has an empty annotation")]
    MissingAnnotation(u32),
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum ApiKind {
    Constructor,
    Instance,
    Static,
}

impl ApiKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ApiKind::Constructor => "constructor",
            ApiKind::Instance => "instance",
            ApiKind::Static => "static",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum DepKind {
    Data,
    Control,
}

impl DepKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DepKind::Data => "data",
            DepKind::Control => "control",
        }
    }
}

/// One API member in the flow specification.
#[derive(Debug, Clone, PartialEq)]
pub struct ApiNode {
    pub id: u32,
    pub kind: ApiKind,
    /// Fully qualified type declaring the member.
    pub owner_type: String,
    pub member_name: String,
    pub param_types: Vec<String>,
    /// `None` means void; constructors always produce their owner type.
    pub return_type: Option<String>,
    /// Always stored with the leading `#`.
    pub annotation: String,
}

impl ApiNode {
    /// Type of the value this node yields, if any.
    pub fn produced_type(&self) -> Option<&str> {
        match self.kind {
            ApiKind::Constructor => Some(&self.owner_type),
            _ => self.return_type.as_deref(),
        }
    }

    /// Annotation without the `#` sigil, the form used for distances.
    pub fn annotation_text(&self) -> &str {
        self.annotation.strip_prefix('#').unwrap_or(&self.annotation)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct FsEdge {
    pub src: u32,
    pub dst: u32,
    pub kind: DepKind,
    pub freq: u32,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FSpec {
    pub name: String,
    pub nodes: BTreeMap<u32, ApiNode>,
    /// Sorted by (src, dst, kind) after validation.
    pub edges: Vec<FsEdge>,
    pub start_ids: BTreeSet<u32>,
    pub end_ids: BTreeSet<u32>,
    /// Interface-to-implementation and shorthand type equivalences; both
    /// sides of a comparison are rewritten before matching.
    pub aliases: BTreeMap<String, String>,
}

impl FSpec {
    /// Canonical form of a type name under the alias table (single step).
    pub fn canon<'a>(&'a self, type_name: &'a str) -> &'a str {
        self.aliases
            .get(type_name)
            .map(|s| s.as_str())
            .unwrap_or(type_name)
    }

    /// True when two type names denote the same type modulo aliases.
    pub fn same_type(&self, a: &str, b: &str) -> bool {
        self.canon(a) == self.canon(b)
    }

    pub fn node(&self, id: u32) -> &ApiNode {
        &self.nodes[&id]
    }

    pub fn outgoing(&self, id: u32) -> impl Iterator<Item = &FsEdge> {
        self.edges.iter().filter(move |e| e.src == id)
    }

    /// Checks structural invariants and normalizes edge order. Called by
    /// the loader; call it directly on programmatically built values.
    pub fn validate(&mut self) -> Result<(), FspecError> {
        self.edges.sort();
        for edge in &self.edges {
            for endpoint in [edge.src, edge.dst] {
                if !self.nodes.contains_key(&endpoint) {
                    return Err(FspecError::DanglingEdge(endpoint));
                }
            }
        }
        for ids in [&self.start_ids, &self.end_ids] {
            for id in ids {
                if !self.nodes.contains_key(id) {
                    return Err(FspecError::DanglingEdge(*id));
                }
            }
        }
        for w in self.edges.windows(2) {
            if w[0].src == w[1].src && w[0].dst == w[1].dst && w[0].kind == w[1].kind {
                return Err(FspecError::Format {
                    path: self.name.clone(),
                    line: 0,
                    message: format!("duplicate edge {} -> {}", w[0].src, w[0].dst),
                });
            }
        }
        for node in self.nodes.values() {
            if node.annotation_text().is_empty() {
                return Err(FspecError::MissingAnnotation(node.id));
            }
            if node.kind == ApiKind::Constructor {
                if node.return_type.as_deref() != Some(node.owner_type.as_str()) {
                    return Err(FspecError::Format {
                        path: self.name.clone(),
                        line: 0,
                        message: format!(
                            "constructor node {} must return its owner type",
                            node.id
                        ),
                    });
                }
            }
        }
        for edge in &self.edges {
            if edge.kind == DepKind::Data && self.node(edge.src).produced_type().is_none() {
                return Err(FspecError::Format {
                    path: self.name.clone(),
                    line: 0,
                    message: format!(
                        "data edge {} -> {} leaves a void producer",
                        edge.src, edge.dst
                    ),
                });
            }
            if edge.freq == 0 {
                return Err(FspecError::Format {
                    path: self.name.clone(),
                    line: 0,
                    message: format!("edge {} -> {} has zero frequency", edge.src, edge.dst),
                });
            }
        }
        self.check_acyclic()?;
        self.check_on_path()?;
        Ok(())
    }

    fn check_acyclic(&self) -> Result<(), FspecError> {
        // iterative DFS with colors; reports one cycle path on failure
        let mut color: BTreeMap<u32, u8> = self.nodes.keys().map(|k| (*k, 0)).collect();
        let mut stack_path: Vec<u32> = Vec::new();
        for &root in self.nodes.keys() {
            if color[&root] != 0 {
                continue;
            }
            let mut stack = vec![(root, false)];
            while let Some((n, processed)) = stack.pop() {
                if processed {
                    color.insert(n, 2);
                    stack_path.pop();
                    continue;
                }
                if color[&n] == 1 {
                    continue;
                }
                color.insert(n, 1);
                stack_path.push(n);
                stack.push((n, true));
                for e in self.outgoing(n) {
                    match color[&e.dst] {
                        0 => stack.push((e.dst, false)),
                        1 => {
                            let from = stack_path.iter().position(|&x| x == e.dst).unwrap_or(0);
                            let mut cycle = stack_path[from..].to_vec();
                            cycle.push(e.dst);
                            return Err(FspecError::Cycle(cycle));
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(())
    }

    fn check_on_path(&self) -> Result<(), FspecError> {
        if self.start_ids.is_empty() || self.end_ids.is_empty() {
            return Err(FspecError::Format {
                path: self.name.clone(),
                line: 0,
                message: "start and end node sets must be non-empty".to_string(),
            });
        }
        let forward = reachable(self.start_ids.iter().copied(), |n| {
            self.outgoing(n).map(|e| e.dst).collect()
        });
        let backward = reachable(self.end_ids.iter().copied(), |n| {
            self.edges
                .iter()
                .filter(|e| e.dst == n)
                .map(|e| e.src)
                .collect()
        });
        for &id in self.nodes.keys() {
            if !forward.contains(&id) || !backward.contains(&id) {
                return Err(FspecError::OffPath(id));
            }
        }
        Ok(())
    }
}

fn reachable(seeds: impl Iterator<Item = u32>, succ: impl Fn(u32) -> Vec<u32>) -> BTreeSet<u32> {
    let mut seen: BTreeSet<u32> = seeds.collect();
    let mut work: Vec<u32> = seen.iter().copied().collect();
    while let Some(n) = work.pop() {
        for m in succ(n) {
            if seen.insert(m) {
                work.push(m);
            }
        }
    }
    seen
}

/// One start-to-end path through the specification, with its clustering.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    /// Nodes in path order.
    pub node_ids: Vec<u32>,
    /// Sum of edge frequencies along the path.
    pub weight: u32,
    /// Populated by `cluster_branch`; empty straight after enumeration.
    pub clusters: Vec<Cluster>,
    pub inter_cluster_edges: Vec<InterClusterEdge>,
}

/// A group of branch nodes with near-identical annotations, woven as one
/// contiguous statement run.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    /// Index of the cluster within its branch.
    pub id: u32,
    /// Medoid annotation, `#` included.
    pub label: String,
    /// Members in branch order.
    pub member_ids: Vec<u32>,
    /// Specification edges with both endpoints inside the cluster.
    pub internal_edges: Vec<FsEdge>,
    /// Values the cluster needs from its surroundings.
    pub slots: Vec<Slot>,
}

impl Cluster {
    pub fn label_text(&self) -> &str {
        self.label.strip_prefix('#').unwrap_or(&self.label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Slot {
    /// Type as written in the member signature.
    pub type_name: String,
    pub role: SlotRole,
    /// Node whose signature the slot comes from.
    pub node_id: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotRole {
    /// Receiver of an instance call.
    Target,
    /// Positional argument.
    Argument,
}

/// A specification edge crossing between two clusters of the same branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InterClusterEdge {
    pub src_cluster: u32,
    pub dst_cluster: u32,
    pub kind: DepKind,
    pub src_node: u32,
    pub dst_node: u32,
    pub freq: u32,
}
