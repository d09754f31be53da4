//! Evaluation over a labeled task tree: for each task, the rank of the
//! first mapping set whose placements all fall inside the labeled
//! spans, plus syntax/semantic checks of the rank-1 weave, aggregated
//! into hit-rates and mean reciprocal rank.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analysis::{analyze, Analysis, AnalysisError};
use crate::annotate::MappingSet;
use crate::conform::conformance;
use crate::fspec::{Branch, FSpec};
use crate::metrics::{hr_at_k, mrr, MetricsError};
use crate::minilang::{parse_program, ParseError};
use crate::pipeline::{feasible_branch, synthesize, PipelineError};
use crate::{Score, ScoreCoefficients};

/// Hit-rate cutoffs reported by every evaluation.
pub const HR_CUTOFFS: [usize; 8] = [1, 2, 3, 4, 5, 10, 50, 100];

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("no labeled task directories under {0}")]
    EmptyDataset(PathBuf),
    #[error("task {0} has no label.rec")]
    MissingLabel(String),
    #[error("label for task {id}: {message}")]
    MalformedLabel { id: String, message: String },
    #[error("task {id}: {source}")]
    Parse {
        id: String,
        #[source]
        source: ParseError,
    },
    #[error("task {id}: {source}")]
    Analysis {
        id: String,
        #[source]
        source: AnalysisError,
    },
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Where each annotated piece of one task may legally land.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskLabel {
    pub task_id: String,
    /// Annotation → acceptable (file, 1-based inclusive line range).
    pub pieces: BTreeMap<String, Vec<(PathBuf, RangeInclusive<u32>)>>,
}

impl TaskLabel {
    /// Whether `line` of `file` lies inside one of the annotation's
    /// acceptable spans.
    pub fn accepts(&self, annotation: &str, file: &Path, line: u32) -> bool {
        self.pieces
            .get(annotation)
            .map(|spans| spans.iter().any(|(p, r)| p == file && r.contains(&line)))
            .unwrap_or(false)
    }
}

/// Parses `label.rec`: a `task <id>` line followed by
/// `piece <annotation> file=<path> lines=<a-b>[,c-d…]` lines.
pub fn parse_label(text: &str) -> Result<TaskLabel, String> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or("empty label file")?;
    let task_id = header
        .strip_prefix("task ")
        .ok_or("first line must be `task <id>`")?
        .trim()
        .to_string();
    if task_id.is_empty() {
        return Err("first line must be `task <id>`".into());
    }

    let mut pieces: BTreeMap<String, Vec<(PathBuf, RangeInclusive<u32>)>> = BTreeMap::new();
    for line in lines {
        let rest = line
            .trim()
            .strip_prefix("piece ")
            .ok_or_else(|| format!("expected `piece …`, got `{line}`"))?;
        let mut words = rest.split_whitespace();
        let annotation = words.next().ok_or("piece without annotation")?;
        let file = words
            .next()
            .and_then(|w| w.strip_prefix("file="))
            .ok_or_else(|| format!("piece `{annotation}` lacks file=…"))?;
        let ranges = words
            .next()
            .and_then(|w| w.strip_prefix("lines="))
            .ok_or_else(|| format!("piece `{annotation}` lacks lines=…"))?;
        let entry = pieces.entry(annotation.to_string()).or_default();
        for range in ranges.split(',') {
            let (a, b) = range
                .split_once('-')
                .ok_or_else(|| format!("bad range `{range}`"))?;
            let a: u32 = a.parse().map_err(|_| format!("bad range `{range}`"))?;
            let b: u32 = b.parse().map_err(|_| format!("bad range `{range}`"))?;
            if a == 0 || b < a {
                return Err(format!("bad range `{range}`"));
            }
            entry.push((PathBuf::from(file), a..=b));
        }
        if entry.is_empty() {
            return Err(format!("piece `{annotation}` has no ranges"));
        }
    }
    Ok(TaskLabel { task_id, pieces })
}

/// Result of evaluating one task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskOutcome {
    pub id: String,
    /// 1-based rank of the first fully correct mapping set, if any.
    pub rank: Option<usize>,
    /// The rank-1 weave produced a program that re-parses.
    pub syntax_ok: bool,
    /// The rank-1 weave realizes the whole chosen branch.
    pub semantic_ok: bool,
    pub conformance: Score,
}

/// Aggregated evaluation over one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalResult {
    pub tasks: Vec<TaskOutcome>,
    pub hr_at_k: BTreeMap<usize, Score>,
    pub mrr: Score,
}

impl EvalResult {
    /// Line-based machine form (`eval.rec`).
    pub fn render_rec(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.hr_at_k {
            out.push_str(&format!("hr k={k} value={v:.1}\n"));
        }
        out.push_str(&format!("mrr value={:.4}\n", self.mrr));
        for t in &self.tasks {
            let rank = t
                .rank
                .map(|r| r.to_string())
                .unwrap_or_else(|| "-".into());
            out.push_str(&format!(
                "task {} rank={} syntax={} semantic={} conf={:.4}\n",
                t.id,
                rank,
                flag(t.syntax_ok),
                flag(t.semantic_ok),
                t.conformance
            ));
        }
        out
    }
}

fn flag(ok: bool) -> &'static str {
    if ok {
        "ok"
    } else {
        "fail"
    }
}

/// Evaluates every labeled task directory under `dataset_dir` (a task
/// directory holds the program sources plus `label.rec`).
pub fn evaluate(
    dataset_dir: &Path,
    fspec: &FSpec,
    coeffs: &ScoreCoefficients,
    tau: usize,
) -> Result<EvalResult, EvalError> {
    let mut task_dirs: Vec<PathBuf> = Vec::new();
    for entry in std::fs::read_dir(dataset_dir)? {
        let entry = entry?;
        if entry.file_type()?.is_dir() {
            task_dirs.push(entry.path());
        }
    }
    task_dirs.sort();
    task_dirs.retain(|d| has_sources(d) || d.join("label.rec").is_file());
    if task_dirs.is_empty() {
        return Err(EvalError::EmptyDataset(dataset_dir.to_path_buf()));
    }

    let mut tasks = Vec::new();
    for dir in task_dirs {
        let id = dir
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_default();
        let label_path = dir.join("label.rec");
        if !label_path.is_file() {
            return Err(EvalError::MissingLabel(id));
        }
        let label_text = std::fs::read_to_string(&label_path)?;
        let label = parse_label(&label_text).map_err(|message| EvalError::MalformedLabel {
            id: id.clone(),
            message,
        })?;
        let program = parse_program(&dir).map_err(|source| EvalError::Parse {
            id: id.clone(),
            source,
        })?;
        tasks.push(evaluate_task(id, &program, &label, fspec, coeffs, tau)?);
    }

    let ranks: Vec<Option<usize>> = tasks.iter().map(|t| t.rank).collect();
    let hr = HR_CUTOFFS
        .iter()
        .map(|&k| Ok((k, hr_at_k(&ranks, k)?)))
        .collect::<Result<BTreeMap<_, _>, MetricsError>>()?;
    Ok(EvalResult {
        mrr: mrr(&ranks)?,
        hr_at_k: hr,
        tasks,
    })
}

fn has_sources(dir: &Path) -> bool {
    walkdir::WalkDir::new(dir)
        .into_iter()
        .flatten()
        .any(|e| e.file_type().is_file() && e.path().extension().map(|x| x == "mj").unwrap_or(false))
}

fn evaluate_task(
    id: String,
    program: &crate::minilang::MiniProgram,
    label: &TaskLabel,
    fspec: &FSpec,
    coeffs: &ScoreCoefficients,
    tau: usize,
) -> Result<TaskOutcome, EvalError> {
    let analysis = analyze(program);
    let rank = match feasible_branch(&analysis, fspec, coeffs, tau) {
        Ok((_, branch, sets)) => {
            first_correct_rank(&analysis, &branch, &sets, label).map_err(|source| {
                EvalError::Analysis {
                    id: id.clone(),
                    source,
                }
            })?
        }
        Err(PipelineError::Infeasible) => None,
        Err(PipelineError::NoBranches) => None,
        Err(e) => {
            return Err(EvalError::MalformedLabel {
                id,
                message: e.to_string(),
            })
        }
    };

    let (syntax_ok, conf) = match synthesize(program, fspec, coeffs, tau, 1) {
        Ok(out) => (
            true,
            conformance(&out.result.program, fspec, &out.branch).score(),
        ),
        Err(_) => (false, 0.0),
    };
    Ok(TaskOutcome {
        id,
        rank,
        syntax_ok,
        semantic_ok: syntax_ok && conf == 1.0,
        conformance: conf,
    })
}

/// 1-based position of the first set whose every placement line falls
/// inside its annotation's labeled spans.
fn first_correct_rank(
    analysis: &Analysis,
    branch: &Branch,
    sets: &[MappingSet],
    label: &TaskLabel,
) -> Result<Option<usize>, AnalysisError> {
    for (i, set) in sets.iter().enumerate() {
        if set_correct(analysis, branch, set, label)? {
            return Ok(Some(i + 1));
        }
    }
    Ok(None)
}

fn set_correct(
    analysis: &Analysis,
    branch: &Branch,
    set: &MappingSet,
    label: &TaskLabel,
) -> Result<bool, AnalysisError> {
    for m in &set.mappings {
        let annotation = branch
            .clusters
            .iter()
            .find(|c| c.id == m.cluster_id)
            .map(|c| c.label.as_str())
            .unwrap_or_default();
        let file = analysis.location_file(&m.location)?;
        let line = analysis.location_line(&m.location)?;
        if !label.accepts(annotation, file, line) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{replica_tasks, write_dataset};

    fn full_replica() -> (tempfile::TempDir, EvalResult) {
        let dir = tempfile::tempdir().unwrap();
        write_dataset(dir.path()).unwrap();
        let fspec = crate::dataset::jaas_fspec();
        let result = evaluate(dir.path(), &fspec, &ScoreCoefficients::default(), 3).unwrap();
        (dir, result)
    }

    #[test]
    fn labels_parse_with_multiple_ranges_and_files() {
        let label = parse_label(
            "task t42\n\
             piece #Setup file=a/Main.mj lines=3-9,14-14\n\
             piece #Use file=b/Other.mj lines=5-8\n",
        )
        .unwrap();
        assert_eq!(label.task_id, "t42");
        assert!(label.accepts("#Setup", Path::new("a/Main.mj"), 14));
        assert!(!label.accepts("#Setup", Path::new("a/Main.mj"), 13));
        assert!(!label.accepts("#Use", Path::new("a/Main.mj"), 5));
        assert!(!label.accepts("#Missing", Path::new("b/Other.mj"), 5));
    }

    #[test]
    fn malformed_labels_are_rejected() {
        assert!(parse_label("").is_err());
        assert!(parse_label("piece #A file=x lines=1-2\n").is_err());
        assert!(parse_label("task t\npiece #A lines=1-2\n").is_err());
        assert!(parse_label("task t\npiece #A file=x lines=9-3\n").is_err());
        assert!(parse_label("task t\npiece #A file=x lines=0-3\n").is_err());
    }

    #[test]
    fn the_bundled_replica_is_solved_at_rank_one() {
        let (_dir, result) = full_replica();
        assert_eq!(result.tasks.len(), 10);
        for t in &result.tasks {
            assert_eq!(t.rank, Some(1), "{}", t.id);
            assert!(t.syntax_ok, "{}", t.id);
            assert!(t.semantic_ok, "{}", t.id);
            assert_eq!(t.conformance, 1.0, "{}", t.id);
        }
        assert_eq!(result.hr_at_k[&1], 100.0);
        assert_eq!(result.mrr, 1.0);
    }

    #[test]
    fn hit_rates_never_decrease_in_k_and_bound_mrr() {
        let (_dir, result) = full_replica();
        let values: Vec<Score> = result.hr_at_k.values().copied().collect();
        assert!(values.windows(2).all(|w| w[0] <= w[1]), "{values:?}");
        assert!(result.mrr >= result.hr_at_k[&1] / 100.0);
    }

    #[test]
    fn rec_output_lists_rates_then_tasks() {
        let (_dir, result) = full_replica();
        let rec = result.render_rec();
        assert!(rec.starts_with("hr k=1 value=100.0\n"), "{rec}");
        assert!(rec.contains("hr k=100 value=100.0\n"));
        assert!(rec.contains("mrr value=1.0000\n"));
        assert!(rec.contains("task t01 rank=1 syntax=ok semantic=ok conf=1.0000\n"));
        assert!(rec.contains("task t10 rank=1 syntax=ok semantic=ok conf=1.0000\n"));
    }

    #[test]
    fn a_single_correct_task_scores_perfect_rates() {
        let dir = tempfile::tempdir().unwrap();
        let t01 = &replica_tasks()[0];
        let tdir = dir.path().join(&t01.id);
        std::fs::create_dir_all(&tdir).unwrap();
        for (p, text) in &t01.sources {
            std::fs::write(tdir.join(p), text).unwrap();
        }
        std::fs::write(tdir.join("label.rec"), &t01.label).unwrap();
        let fspec = crate::dataset::jaas_fspec();
        let result = evaluate(dir.path(), &fspec, &ScoreCoefficients::default(), 3).unwrap();
        assert_eq!(result.hr_at_k[&1], 100.0);
        assert_eq!(result.mrr, 1.0);
    }

    #[test]
    fn labels_pointing_elsewhere_mean_no_correct_rank() {
        let dir = tempfile::tempdir().unwrap();
        let t01 = &replica_tasks()[0];
        let tdir = dir.path().join(&t01.id);
        std::fs::create_dir_all(&tdir).unwrap();
        for (p, text) in &t01.sources {
            std::fs::write(tdir.join(p), text).unwrap();
        }
        std::fs::write(
            tdir.join("label.rec"),
            "task t01\n\
             piece #Initialization file=Sample.mj lines=1-1\n\
             piece #Logging_In file=Sample.mj lines=1-1\n\
             piece #Subject_Inspection file=Sample.mj lines=1-1\n",
        )
        .unwrap();
        let fspec = crate::dataset::jaas_fspec();
        let result = evaluate(dir.path(), &fspec, &ScoreCoefficients::default(), 3).unwrap();
        let t = &result.tasks[0];
        assert_eq!(t.rank, None);
        assert!(t.syntax_ok, "weaving is independent of the label");
        assert_eq!(result.hr_at_k[&100], 0.0);
        assert_eq!(result.mrr, 0.0);
        assert!(result.render_rec().contains("task t01 rank=- "));
    }

    #[test]
    fn sources_without_a_label_are_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let tdir = dir.path().join("t99");
        std::fs::create_dir_all(&tdir).unwrap();
        std::fs::write(tdir.join("A.mj"), "package p;\nclass A {\n}\n").unwrap();
        let fspec = crate::dataset::jaas_fspec();
        match evaluate(dir.path(), &fspec, &ScoreCoefficients::default(), 3) {
            Err(EvalError::MissingLabel(id)) => assert_eq!(id, "t99"),
            other => panic!("expected MissingLabel, got {other:?}"),
        }
    }

    #[test]
    fn empty_directories_are_an_empty_dataset() {
        let dir = tempfile::tempdir().unwrap();
        let fspec = crate::dataset::jaas_fspec();
        match evaluate(dir.path(), &fspec, &ScoreCoefficients::default(), 3) {
            Err(EvalError::EmptyDataset(_)) => {}
            other => panic!("expected EmptyDataset, got {other:?}"),
        }
    }
}
