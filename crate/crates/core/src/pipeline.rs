//! End-to-end synthesis: analyze the program, pick a branch, rank
//! placements, sketch, resolve holes, and weave.

use thiserror::Error;

use crate::analysis::{analyze, Analysis, AnalysisError, Location};
use crate::annotate::{rank_mapping_sets, AnnotateError, MappingSet};
use crate::fspec::{cluster_branch, enumerate_branches, Branch, FSpec, FspecError};
use crate::minilang::MiniProgram;
use crate::resolver::{build_candidates, resolve, CandidateList, Resolution, ResolveError};
use crate::sketch::{generate_sketches, Sketch, SketchError};
use crate::weave::{plan_channels, weave, SynthesisResult, WeaveError, WeavePlan};
use crate::ScoreCoefficients;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("the specification has no branches")]
    NoBranches,
    #[error("no branch admits a dependency-consistent placement")]
    Infeasible,
    #[error("rank {rank} requested but only {available} mapping sets exist")]
    RankOutOfRange { rank: usize, available: usize },
    #[error(transparent)]
    Cluster(#[from] FspecError),
    #[error(transparent)]
    Annotate(#[from] AnnotateError),
    #[error(transparent)]
    Sketch(#[from] SketchError),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error(transparent)]
    Weave(#[from] WeaveError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

impl PipelineError {
    /// True when synthesis failed for want of a feasible solution
    /// rather than bad input.
    pub fn infeasible(&self) -> bool {
        matches!(
            self,
            PipelineError::Infeasible
                | PipelineError::Resolve(ResolveError::Unsatisfiable(_))
                | PipelineError::Annotate(AnnotateError::NoFeasibleMapping { .. })
        )
    }
}

/// Every intermediate the pipeline produced for one synthesis run.
pub struct SynthOutcome {
    pub analysis: Analysis,
    /// Index into `ordered_branches`.
    pub branch_index: usize,
    /// The chosen branch, clustered.
    pub branch: Branch,
    /// All ranked mapping sets for that branch, best first.
    pub sets: Vec<MappingSet>,
    /// 1-based rank of the woven set.
    pub rank: usize,
    pub sketches: Vec<Sketch>,
    pub plan: WeavePlan,
    pub candidates: Vec<CandidateList>,
    pub resolution: Resolution,
    pub result: SynthesisResult,
}

/// Branches by descending weight; ties resolve on the node sequence so
/// the order is total.
pub fn ordered_branches(fspec: &FSpec) -> Vec<Branch> {
    let mut branches = enumerate_branches(fspec);
    branches.sort_by(|a, b| b.weight.cmp(&a.weight).then(a.node_ids.cmp(&b.node_ids)));
    branches
}

/// Heaviest branch admitting any feasible placement, with its ranked
/// mapping sets.
pub fn feasible_branch(
    analysis: &Analysis,
    fspec: &FSpec,
    coeffs: &ScoreCoefficients,
    tau: usize,
) -> Result<(usize, Branch, Vec<MappingSet>), PipelineError> {
    let branches = ordered_branches(fspec);
    if branches.is_empty() {
        return Err(PipelineError::NoBranches);
    }
    for (i, branch) in branches.into_iter().enumerate() {
        let (clustered, _) = cluster_branch(fspec, &branch, tau)?;
        match rank_mapping_sets(analysis, fspec, i, &clustered, coeffs) {
            Ok(sets) => return Ok((i, clustered, sets)),
            Err(AnnotateError::NoFeasibleMapping { .. }) => continue,
            Err(other) => return Err(other.into()),
        }
    }
    Err(PipelineError::Infeasible)
}

/// Runs the full pipeline, weaving the mapping set at `rank` (1-based)
/// of the heaviest branch that admits any feasible placement.
pub fn synthesize(
    program: &MiniProgram,
    fspec: &FSpec,
    coeffs: &ScoreCoefficients,
    tau: usize,
    rank: usize,
) -> Result<SynthOutcome, PipelineError> {
    let analysis = analyze(program);
    let (branch_index, branch, sets) = feasible_branch(&analysis, fspec, coeffs, tau)?;

    if rank == 0 || rank > sets.len() {
        return Err(PipelineError::RankOutOfRange {
            rank,
            available: sets.len(),
        });
    }
    let set = &sets[rank - 1];

    let sketches = generate_sketches(fspec, &branch)?;
    let plan = plan_channels(&analysis, fspec, &branch, set, &sketches)?;
    let placed: Vec<(Location, &Sketch)> = branch
        .clusters
        .iter()
        .map(|c| {
            let loc = *set.location_of(c.id).expect("sets cover every cluster");
            let sketch = sketches
                .iter()
                .find(|s| s.cluster_id == c.id)
                .expect("one sketch per cluster");
            (loc, sketch)
        })
        .collect();
    let candidates = build_candidates(&analysis, fspec, &placed, &plan.export_vars())?;
    let resolution = resolve(&candidates)?;
    let result = weave(&analysis, fspec, &branch, set, &sketches, &plan, &resolution)?;

    Ok(SynthOutcome {
        analysis,
        branch_index,
        branch,
        sets,
        rank,
        sketches,
        plan,
        candidates,
        resolution,
        result,
    })
}
