//! `ipweave` — command line front end for the synthesis pipeline.
//!
//! Exit codes: 0 on success, 2 when synthesis is infeasible for the
//! given program/specification pair, 1 on input errors.

mod settings;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use ipweave_core::analysis::{analyze, Analysis, Location, VarKind};
use ipweave_core::annotate::MappingSet;
use ipweave_core::dataset::write_dataset;
use ipweave_core::eval::{evaluate, parse_label};
use ipweave_core::fspec::{cluster_branch, load_fspec_with_warnings, Branch, FSpec};
use ipweave_core::minilang::{parse_program, MiniProgram};
use ipweave_core::pipeline::{feasible_branch, ordered_branches, synthesize};
use ipweave_core::resolver::SelectionProblem;
use ipweave_core::sketch::{generate_sketches, render_sketch};

use settings::{load_settings, Settings};

#[derive(Parser)]
#[command(
    name = "ipweave",
    version,
    about = "Weaves API-usage tactics into existing programs",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize and weave the tactic, writing sources and reports
    Synth {
        /// Directory holding the target program's `.mj` sources
        #[arg(long)]
        program: PathBuf,
        /// API specification file
        #[arg(long)]
        fspec: PathBuf,
        /// Output directory for woven sources plus report.txt/report.rec
        #[arg(long)]
        out: PathBuf,
        /// Which ranked mapping set to weave (1 = best)
        #[arg(long, default_value_t = 1)]
        rank: usize,
        /// Settings file (`key = value` lines)
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the ranked placements with all their scores
    Score {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        fspec: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print each cluster's code sketch for one branch
    Sketch {
        #[arg(long)]
        fspec: PathBuf,
        /// Branch number, heaviest first (1-based)
        #[arg(long)]
        branch: usize,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print the hole-resolution clauses and the chosen assignment
    Resolve {
        #[arg(long)]
        program: PathBuf,
        #[arg(long)]
        fspec: PathBuf,
        #[arg(long, default_value_t = 1)]
        rank: usize,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Print scopes, their variables, and the scope dependency graph
    Analyze {
        /// Directory holding `.mj` sources
        dir: PathBuf,
    },
    /// Evaluate a labeled dataset and write eval.rec
    Eval {
        /// Directory of task directories (sources + label.rec each)
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        fspec: PathBuf,
        /// Where to write eval.rec (default: the dataset directory)
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Validate inputs; optionally materialize the bundled dataset
    Check {
        /// Specification file to validate
        #[arg(long)]
        fspec: Option<PathBuf>,
        /// Program directory to parse
        #[arg(long)]
        program: Option<PathBuf>,
        /// Dataset directory whose labels and sources to verify
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Write the bundled replica dataset (tasks + fspec) here
        #[arg(long)]
        write_replica: Option<PathBuf>,
    },
}

/// What went wrong, carrying the exit code.
enum Failure {
    /// Bad input: unreadable/ill-formed files, bad flags. Exit 1.
    Input(String),
    /// Sound inputs, but no feasible synthesis. Exit 2.
    Infeasible(String),
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Infeasible(msg)) => {
            eprintln!("infeasible: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Synth {
            program,
            fspec,
            out,
            rank,
            config,
        } => synth(&program, &fspec, &out, rank, config.as_deref()),
        Command::Score {
            program,
            fspec,
            config,
        } => score(&program, &fspec, config.as_deref()),
        Command::Sketch {
            fspec,
            branch,
            config,
        } => sketch(&fspec, branch, config.as_deref()),
        Command::Resolve {
            program,
            fspec,
            rank,
            config,
        } => resolve(&program, &fspec, rank, config.as_deref()),
        Command::Analyze { dir } => analyze_cmd(&dir),
        Command::Eval {
            dataset,
            fspec,
            out,
            config,
        } => eval_cmd(&dataset, &fspec, out.as_deref(), config.as_deref()),
        Command::Check {
            fspec,
            program,
            dataset,
            write_replica,
        } => check(
            fspec.as_deref(),
            program.as_deref(),
            dataset.as_deref(),
            write_replica.as_deref(),
        ),
    }
}

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Input(e.to_string())
}

fn load_inputs(
    program_dir: &Path,
    fspec_path: &Path,
    config: Option<&Path>,
) -> Result<(MiniProgram, FSpec, Settings), Failure> {
    let settings = load_settings(config).map_err(Failure::Input)?;
    let program = parse_program(program_dir).map_err(input)?;
    let (fspec, warnings) = load_fspec_with_warnings(fspec_path).map_err(input)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    Ok((program, fspec, settings))
}

fn pipeline_failure(e: ipweave_core::pipeline::PipelineError) -> Failure {
    if e.infeasible() {
        Failure::Infeasible(e.to_string())
    } else {
        Failure::Input(e.to_string())
    }
}

fn synth(
    program_dir: &Path,
    fspec_path: &Path,
    out_dir: &Path,
    rank: usize,
    config: Option<&Path>,
) -> Result<(), Failure> {
    let (program, fspec, settings) = load_inputs(program_dir, fspec_path, config)?;
    let outcome = synthesize(&program, &fspec, &settings.coeffs, settings.tau, rank)
        .map_err(pipeline_failure)?;

    std::fs::create_dir_all(out_dir).map_err(input)?;
    for (rel, text) in &outcome.result.files {
        let path = out_dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(input)?;
        }
        std::fs::write(&path, text).map_err(input)?;
    }
    let report = &outcome.result.report;
    std::fs::write(out_dir.join("report.txt"), report.render_text()).map_err(input)?;
    std::fs::write(out_dir.join("report.rec"), report.render_rec()).map_err(input)?;

    print!("{}", report.render_text());
    println!(
        "Wrote {} source file(s) and reports to {}",
        outcome.result.files.len(),
        out_dir.display()
    );
    Ok(())
}

fn score(program_dir: &Path, fspec_path: &Path, config: Option<&Path>) -> Result<(), Failure> {
    let (program, fspec, settings) = load_inputs(program_dir, fspec_path, config)?;
    let analysis = analyze(&program);
    let (branch_index, branch, sets) =
        feasible_branch(&analysis, &fspec, &settings.coeffs, settings.tau)
            .map_err(pipeline_failure)?;

    println!(
        "branch {} weight={} clusters={}",
        branch_index + 1,
        branch.weight,
        branch.clusters.len()
    );
    for (i, set) in sets.iter().enumerate() {
        print!("{}", render_set(&analysis, &branch, set, i + 1).map_err(input)?);
    }
    Ok(())
}

fn render_set(
    analysis: &Analysis,
    branch: &Branch,
    set: &MappingSet,
    rank: usize,
) -> Result<String, ipweave_core::analysis::AnalysisError> {
    let mut out = format!(
        "rank {} cas={:.4} cds={} cqs={:.4}\n",
        rank,
        set.cas,
        u8::from(set.cds),
        set.cqs
    );
    for m in &set.mappings {
        let label = branch
            .clusters
            .iter()
            .find(|c| c.id == m.cluster_id)
            .map(|c| c.label.as_str())
            .unwrap_or("?");
        out.push_str(&format!(
            "  {} {}:{} mns={:.4} vas={:.4} cls={:.4}\n",
            label,
            analysis.location_file(&m.location)?.display(),
            analysis.location_line(&m.location)?,
            m.mns,
            m.vas,
            m.cls
        ));
    }
    Ok(out)
}

fn sketch(fspec_path: &Path, branch: usize, config: Option<&Path>) -> Result<(), Failure> {
    let settings = load_settings(config).map_err(Failure::Input)?;
    let (fspec, warnings) = load_fspec_with_warnings(fspec_path).map_err(input)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    let branches = ordered_branches(&fspec);
    if branch == 0 || branch > branches.len() {
        return Err(Failure::Input(format!(
            "branch {branch} requested but the specification has {} branch(es)",
            branches.len()
        )));
    }
    let (clustered, _) =
        cluster_branch(&fspec, &branches[branch - 1], settings.tau).map_err(input)?;
    let sketches = generate_sketches(&fspec, &clustered).map_err(input)?;
    for (cluster, sk) in clustered.clusters.iter().zip(&sketches) {
        println!("cluster {} {}", cluster.id, cluster.label);
        for line in render_sketch(&fspec, sk).lines() {
            println!("  {line}");
        }
    }
    Ok(())
}

fn resolve(
    program_dir: &Path,
    fspec_path: &Path,
    rank: usize,
    config: Option<&Path>,
) -> Result<(), Failure> {
    let (program, fspec, settings) = load_inputs(program_dir, fspec_path, config)?;
    let outcome = synthesize(&program, &fspec, &settings.coeffs, settings.tau, rank)
        .map_err(pipeline_failure)?;
    print!("{}", SelectionProblem::build(&outcome.candidates).render());
    for (hole, var) in &outcome.resolution.assignment {
        println!(
            "assign hole={} var={} type={} key={}",
            hole,
            var.name(),
            var.type_name(),
            var.key()
        );
    }
    println!("distinct {}", outcome.resolution.distinct_count);
    Ok(())
}

fn analyze_cmd(dir: &Path) -> Result<(), Failure> {
    let program = parse_program(dir).map_err(input)?;
    let analysis = analyze(&program);
    for scope in &analysis.scopes {
        println!("scope {} name={} stmts={}", scope.id, scope.name, scope.len);
        let vars = analysis
            .visible_vars(&Location {
                scope: scope.id,
                index: scope.len,
            })
            .map_err(input)?;
        for v in vars {
            println!(
                "var scope={} name={} type={} kind={} init={} line={}",
                scope.id,
                v.name,
                v.type_name,
                kind_word(v.kind),
                if v.must_initialized { "yes" } else { "no" },
                v.decl_line
            );
        }
    }
    for scope in &analysis.scopes {
        println!("node {}", scope.id);
    }
    for (a, b) in &analysis.control_edges {
        println!("edge control {a} {b}");
    }
    for (a, b, t) in &analysis.data_edges {
        println!("edge data {a} {b} type={t}");
    }
    Ok(())
}

fn kind_word(kind: VarKind) -> &'static str {
    match kind {
        VarKind::Local => "local",
        VarKind::Param => "param",
        VarKind::Field => "field",
        VarKind::StaticField => "static-field",
    }
}

fn eval_cmd(
    dataset: &Path,
    fspec_path: &Path,
    out: Option<&Path>,
    config: Option<&Path>,
) -> Result<(), Failure> {
    let settings = load_settings(config).map_err(Failure::Input)?;
    let (fspec, warnings) = load_fspec_with_warnings(fspec_path).map_err(input)?;
    for w in warnings {
        eprintln!("warning: {w}");
    }
    let result = evaluate(dataset, &fspec, &settings.coeffs, settings.tau).map_err(input)?;
    let rec = result.render_rec();
    let out_dir = out.unwrap_or(dataset);
    std::fs::create_dir_all(out_dir).map_err(input)?;
    let rec_path = out_dir.join("eval.rec");
    std::fs::write(&rec_path, &rec).map_err(input)?;
    print!("{rec}");
    println!("wrote {}", rec_path.display());
    Ok(())
}

fn check(
    fspec_path: Option<&Path>,
    program_dir: Option<&Path>,
    dataset: Option<&Path>,
    write_replica: Option<&Path>,
) -> Result<(), Failure> {
    if fspec_path.is_none() && program_dir.is_none() && dataset.is_none() && write_replica.is_none()
    {
        return Err(Failure::Input(
            "nothing to check: pass --fspec, --program, --dataset, or --write-replica".into(),
        ));
    }
    if let Some(path) = fspec_path {
        let (fspec, warnings) = load_fspec_with_warnings(path).map_err(input)?;
        for w in warnings {
            println!("warning: {w}");
        }
        println!(
            "fspec {} nodes={} edges={} branches={}",
            fspec.name,
            fspec.nodes.len(),
            fspec.edges.len(),
            ordered_branches(&fspec).len()
        );
    }
    if let Some(dir) = program_dir {
        let program = parse_program(dir).map_err(input)?;
        let methods: usize = program
            .files
            .iter()
            .flat_map(|f| &f.classes)
            .map(count_methods)
            .sum();
        println!(
            "program files={} methods={}",
            program.files.len(),
            methods
        );
    }
    if let Some(dir) = dataset {
        check_dataset(dir)?;
    }
    if let Some(dir) = write_replica {
        write_dataset(dir).map_err(input)?;
        println!("replica dataset written to {}", dir.display());
    }
    Ok(())
}

fn count_methods(class: &ipweave_core::minilang::ClassDecl) -> usize {
    class.methods.len()
        + class
            .inner_classes
            .iter()
            .map(count_methods)
            .sum::<usize>()
}

fn check_dataset(dir: &Path) -> Result<(), Failure> {
    let mut tasks = 0;
    let mut entries: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(input)?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .filter(|p| p.is_dir())
        .collect();
    entries.sort();
    for task_dir in entries {
        let label_path = task_dir.join("label.rec");
        if !label_path.is_file() {
            continue;
        }
        let text = std::fs::read_to_string(&label_path).map_err(input)?;
        let label = parse_label(&text)
            .map_err(|e| Failure::Input(format!("{}: {e}", label_path.display())))?;
        parse_program(&task_dir).map_err(input)?;
        println!("task {} pieces={} ok", label.task_id, label.pieces.len());
        tasks += 1;
    }
    if tasks == 0 {
        return Err(Failure::Input(format!(
            "no labeled tasks under {}",
            dir.display()
        )));
    }
    println!("dataset {} tasks={} ok", dir.display(), tasks);
    Ok(())
}
