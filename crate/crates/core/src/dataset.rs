//! Bundled replica dataset: a JAAS-flavored authentication
//! specification plus ten small programs on a rising complexity ladder
//! (nested blocks, inner classes, call chains, multiple files, …), each
//! labeled with the line spans where the woven pieces belong.

use std::path::{Path, PathBuf};

use crate::fspec::{render_fspec, ApiKind, ApiNode, DepKind, FSpec, FsEdge};
use crate::minilang::{parse_source, ClassDecl, MiniProgram};

const LOGIN_CONTEXT: &str = "javax.security.auth.login.LoginContext";
const HANDLER: &str = "com.sun.security.auth.callback.TextCallbackHandler";
const SUBJECT: &str = "javax.security.auth.Subject";

const INIT: &str = "#Initialization";
const LOGIN: &str = "#Logging_In";
const INSPECT: &str = "#Subject_Inspection";

/// The authentication specification shared by every bundled task:
/// create a callback handler and a login context, log in, then read the
/// authenticated subject and its principals.
pub fn jaas_fspec() -> FSpec {
    fn node(
        id: u32,
        kind: ApiKind,
        owner: &str,
        member: &str,
        params: &[&str],
        ret: Option<&str>,
        annotation: &str,
    ) -> (u32, ApiNode) {
        (
            id,
            ApiNode {
                id,
                kind,
                owner_type: owner.into(),
                member_name: member.into(),
                param_types: params.iter().map(|p| p.to_string()).collect(),
                return_type: ret.map(Into::into),
                annotation: annotation.into(),
            },
        )
    }
    fn edge(src: u32, dst: u32, kind: DepKind, freq: u32) -> FsEdge {
        FsEdge {
            src,
            dst,
            kind,
            freq,
        }
    }

    let mut fspec = FSpec {
        name: "jaas-authentication".into(),
        nodes: [
            node(
                1,
                ApiKind::Constructor,
                HANDLER,
                "TextCallbackHandler",
                &[],
                Some(HANDLER),
                INIT,
            ),
            node(
                2,
                ApiKind::Constructor,
                LOGIN_CONTEXT,
                "LoginContext",
                &["java.lang.String", "javax.security.auth.callback.CallbackHandler"],
                Some(LOGIN_CONTEXT),
                INIT,
            ),
            node(
                3,
                ApiKind::Constructor,
                LOGIN_CONTEXT,
                "LoginContext",
                &["java.lang.String"],
                Some(LOGIN_CONTEXT),
                INIT,
            ),
            node(4, ApiKind::Instance, LOGIN_CONTEXT, "login", &[], None, LOGIN),
            node(
                5,
                ApiKind::Instance,
                LOGIN_CONTEXT,
                "getSubject",
                &[],
                Some(SUBJECT),
                INSPECT,
            ),
            node(
                6,
                ApiKind::Instance,
                SUBJECT,
                "getPrincipals",
                &[],
                Some("java.util.Set"),
                INSPECT,
            ),
        ]
        .into(),
        edges: vec![
            edge(1, 2, DepKind::Data, 8),
            edge(2, 4, DepKind::Data, 8),
            edge(2, 5, DepKind::Data, 2),
            edge(3, 4, DepKind::Data, 3),
            edge(4, 5, DepKind::Control, 8),
            edge(5, 6, DepKind::Data, 8),
        ],
        start_ids: [1, 3].into(),
        end_ids: [6].into(),
        aliases: [
            ("LoginContext", LOGIN_CONTEXT),
            ("String", "java.lang.String"),
            ("Subject", SUBJECT),
            ("Set", "java.util.Set"),
            ("CallbackHandler", HANDLER),
            ("TextCallbackHandler", HANDLER),
            ("javax.security.auth.callback.CallbackHandler", HANDLER),
        ]
        .into_iter()
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .collect(),
    };
    fspec.validate().expect("bundled specification is well-formed");
    fspec
}

/// One bundled task: program sources plus its placement label in
/// `label.rec` form.
#[derive(Debug, Clone)]
pub struct ReplicaTask {
    pub id: String,
    pub sources: Vec<(PathBuf, String)>,
    pub label: String,
}

impl ReplicaTask {
    pub fn parse(&self) -> MiniProgram {
        MiniProgram {
            files: self
                .sources
                .iter()
                .map(|(p, text)| parse_source(p, text).expect("bundled sources parse"))
                .collect(),
        }
    }
}

/// Sources of the baseline authentication program; task t01 uses the
/// same program.
pub fn motivating_sources() -> Vec<(PathBuf, String)> {
    vec![source(
        "Sample.mj",
        "package sample.auth;\n\
         \n\
         class Sample {\n\
         \n\
         \x20 javax.security.auth.login.LoginContext initializeLC() {\n\
         \x20   String moduleName = \"Sample\";\n\
         \x20 }\n\
         \n\
         \x20 void login() {\n\
         \x20   int attempts = 0;\n\
         \x20 }\n\
         \n\
         \x20 void inspectSubject() {\n\
         \x20   int checked = 0;\n\
         \x20 }\n\
         \n\
         \x20 static void main(String[] args) {\n\
         \x20   Sample app = new Sample();\n\
         \x20   app.initializeLC();\n\
         \x20   app.login();\n\
         \x20   app.inspectSubject();\n\
         \x20 }\n\
         }\n",
    )]
}

/// The ten bundled tasks in ladder order: baseline, nested blocks,
/// inner class, flow split over more methods, uninitialized globals,
/// static members, extra unrelated methods, argument passing, nested
/// call chain, multi-file package.
pub fn replica_tasks() -> Vec<ReplicaTask> {
    let t01 = task("t01", motivating_sources());

    let t02 = task(
        "t02",
        vec![source(
            "App.mj",
            "package sample.nested;\n\
             \n\
             class App {\n\
             \n\
             \x20 void initializeLC() {\n\
             \x20   boolean retry = true;\n\
             \x20   if (retry) {\n\
             \x20     int backoff = 1;\n\
             \x20   }\n\
             \x20   String moduleName = \"Nested\";\n\
             \x20 }\n\
             \n\
             \x20 void login() {\n\
             \x20   boolean retry = true;\n\
             \x20   while (retry) {\n\
             \x20     retry = false;\n\
             \x20   }\n\
             \x20   int attempts = 0;\n\
             \x20 }\n\
             \n\
             \x20 void inspectSubject() {\n\
             \x20   int checked = 0;\n\
             \x20 }\n\
             \n\
             \x20 static void main(String[] args) {\n\
             \x20   App app = new App();\n\
             \x20   app.initializeLC();\n\
             \x20   app.login();\n\
             \x20   app.inspectSubject();\n\
             \x20 }\n\
             }\n",
        )],
    );

    let t03 = task(
        "t03",
        vec![source(
            "App.mj",
            "package sample.inner;\n\
             \n\
             class App {\n\
             \n\
             \x20 class Audit {\n\
             \x20   void record() {\n\
             \x20     int entries = 0;\n\
             \x20   }\n\
             \x20 }\n\
             \n\
             \x20 void initializeLC() {\n\
             \x20   String moduleName = \"Inner\";\n\
             \x20 }\n\
             \n\
             \x20 void login() {\n\
             \x20   int attempts = 0;\n\
             \x20 }\n\
             \n\
             \x20 void inspectSubject() {\n\
             \x20   int checked = 0;\n\
             \x20 }\n\
             \n\
             \x20 static void main(String[] args) {\n\
             \x20   App app = new App();\n\
             \x20   app.initializeLC();\n\
             \x20   app.login();\n\
             \x20   app.inspectSubject();\n\
             \x20 }\n\
             }\n",
        )],
    );

    let t04 = task(
        "t04",
        vec![source(
            "App.mj",
            "package sample.flow;\n\
             \n\
             class App {\n\
             \n\
             \x20 void initializeLC() {\n\
             \x20   String moduleName = \"Flow\";\n\
             \x20 }\n\
             \n\
             \x20 void login() {\n\
             \x20   int attempts = 0;\n\
             \x20 }\n\
             \n\
             \x20 void inspectSubject() {\n\
             \x20   int checked = 0;\n\
             \x20 }\n\
             \n\
             \x20 void run() {\n\
             \x20   initializeLC();\n\
             \x20   login();\n\
             \x20   inspectSubject();\n\
             \x20 }\n\
             \n\
             \x20 static void main(String[] args) {\n\
             \x20   App app = new App();\n\
             \x20   app.run();\n\
             \x20 }\n\
             }\n",
        )],
    );

    let t05 = task(
        "t05",
        vec![source(
            "App.mj",
            "package sample.globals;\n\
             \n\
             class App {\n\
             \n\
             \x20 String varStr;\n\
             \x20 javax.security.auth.login.LoginContext ctx;\n\
             \n\
             \x20 void initializeLC() {\n\
             \x20   String moduleName;\n\
             \x20   moduleName = \"Globals\";\n\
             \x20 }\n\
             \n\
             \x20 void login() {\n\
             \x20   int attempts = 0;\n\
             \x20 }\n\
             \n\
             \x20 void inspectSubject() {\n\
             \x20   int checked = 0;\n\
             \x20 }\n\
             \n\
             \x20 static void main(String[] args) {\n\
             \x20   App app = new App();\n\
             \x20   app.initializeLC();\n\
             \x20   app.login();\n\
             \x20   app.inspectSubject();\n\
             \x20 }\n\
             }\n",
        )],
    );

    let t06 = task(
        "t06",
        vec![source(
            "App.mj",
            "package sample.statics;\n\
             \n\
             class App {\n\
             \n\
             \x20 static String config = \"Static\";\n\
             \n\
             \x20 static void initializeLC() {\n\
             \x20   int ready = 1;\n\
             \x20 }\n\
             \n\
             \x20 static void login() {\n\
             \x20   int attempts = 0;\n\
             \x20 }\n\
             \n\
             \x20 static void inspectSubject() {\n\
             \x20   int checked = 0;\n\
             \x20 }\n\
             \n\
             \x20 static void main(String[] args) {\n\
             \x20   App.initializeLC();\n\
             \x20   App.login();\n\
             \x20   App.inspectSubject();\n\
             \x20 }\n\
             }\n",
        )],
    );

    let t07 = task(
        "t07",
        vec![source(
            "App.mj",
            "package sample.extras;\n\
             \n\
             class App {\n\
             \n\
             \x20 void initializeLC() {\n\
             \x20   String moduleName = \"Extras\";\n\
             \x20 }\n\
             \n\
             \x20 void login() {\n\
             \x20   int attempts = 0;\n\
             \x20 }\n\
             \n\
             \x20 void inspectSubject() {\n\
             \x20   int checked = 0;\n\
             \x20 }\n\
             \n\
             \x20 void resetState() {\n\
             \x20   int cleared = 0;\n\
             \x20 }\n\
             \n\
             \x20 String describe() {\n\
             \x20   String label = \"app\";\n\
             \x20   return label;\n\
             \x20 }\n\
             \n\
             \x20 static void main(String[] args) {\n\
             \x20   App app = new App();\n\
             \x20   app.initializeLC();\n\
             \x20   app.login();\n\
             \x20   app.inspectSubject();\n\
             \x20 }\n\
             }\n",
        )],
    );

    let t08 = task(
        "t08",
        vec![source(
            "App.mj",
            "package sample.passing;\n\
             \n\
             class App {\n\
             \n\
             \x20 void initializeLC(String moduleName) {\n\
             \x20   int ready = 1;\n\
             \x20 }\n\
             \n\
             \x20 void login() {\n\
             \x20   int attempts = 0;\n\
             \x20 }\n\
             \n\
             \x20 void inspectSubject() {\n\
             \x20   int checked = 0;\n\
             \x20 }\n\
             \n\
             \x20 static void main(String[] args) {\n\
             \x20   App app = new App();\n\
             \x20   app.initializeLC(\"Passing\");\n\
             \x20   app.login();\n\
             \x20   app.inspectSubject();\n\
             \x20 }\n\
             }\n",
        )],
    );

    let t09 = task(
        "t09",
        vec![source(
            "App.mj",
            "package sample.chain;\n\
             \n\
             class App {\n\
             \n\
             \x20 void initializeLC() {\n\
             \x20   String moduleName = \"Chain\";\n\
             \x20 }\n\
             \n\
             \x20 void login() {\n\
             \x20   int attempts = 0;\n\
             \x20 }\n\
             \n\
             \x20 void inspectSubject() {\n\
             \x20   int checked = 0;\n\
             \x20 }\n\
             \n\
             \x20 void doAuth() {\n\
             \x20   login();\n\
             \x20   inspectSubject();\n\
             \x20 }\n\
             \n\
             \x20 void doAll() {\n\
             \x20   initializeLC();\n\
             \x20   doAuth();\n\
             \x20 }\n\
             \n\
             \x20 static void main(String[] args) {\n\
             \x20   App app = new App();\n\
             \x20   app.doAll();\n\
             \x20 }\n\
             }\n",
        )],
    );

    let t10 = task(
        "t10",
        vec![
            source(
                "Init.mj",
                "package sample.multi;\n\
                 \n\
                 class Init {\n\
                 \n\
                 \x20 javax.security.auth.login.LoginContext initializeLC() {\n\
                 \x20   String moduleName = \"Multi\";\n\
                 \x20 }\n\
                 }\n",
            ),
            source(
                "Flow.mj",
                "package sample.multi;\n\
                 \n\
                 class Flow {\n\
                 \n\
                 \x20 void login() {\n\
                 \x20   int attempts = 0;\n\
                 \x20 }\n\
                 \n\
                 \x20 void inspectSubject() {\n\
                 \x20   int checked = 0;\n\
                 \x20 }\n\
                 \n\
                 \x20 static void main(String[] args) {\n\
                 \x20   Init init = new Init();\n\
                 \x20   Flow flow = new Flow();\n\
                 \x20   init.initializeLC();\n\
                 \x20   flow.login();\n\
                 \x20   flow.inspectSubject();\n\
                 \x20 }\n\
                 }\n",
            ),
        ],
    );

    vec![t01, t02, t03, t04, t05, t06, t07, t08, t09, t10]
}

/// Writes `jaas.fspec` plus one directory per task containing its
/// sources and `label.rec`.
pub fn write_dataset(dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("jaas.fspec"), render_fspec(&jaas_fspec()))?;
    for t in replica_tasks() {
        let tdir = dir.join(&t.id);
        std::fs::create_dir_all(&tdir)?;
        for (path, text) in &t.sources {
            std::fs::write(tdir.join(path), text)?;
        }
        std::fs::write(tdir.join("label.rec"), &t.label)?;
    }
    Ok(())
}

fn source(name: &str, text: &str) -> (PathBuf, String) {
    (PathBuf::from(name), text.to_string())
}

fn task(id: &str, sources: Vec<(PathBuf, String)>) -> ReplicaTask {
    let label = label_for(
        id,
        &sources,
        &[
            (INIT, "initializeLC"),
            (LOGIN, "login"),
            (INSPECT, "inspectSubject"),
        ],
    );
    ReplicaTask {
        id: id.into(),
        sources,
        label,
    }
}

/// Builds the `label.rec` text: each annotation's acceptable span is the
/// full extent of its intended host method.
fn label_for(id: &str, sources: &[(PathBuf, String)], hosts: &[(&str, &str)]) -> String {
    let files: Vec<_> = sources
        .iter()
        .map(|(p, text)| (p.clone(), parse_source(p, text).expect("bundled sources parse")))
        .collect();
    let mut out = format!("task {id}\n");
    for (annotation, method) in hosts {
        let (path, span) = files
            .iter()
            .find_map(|(p, f)| {
                f.classes
                    .iter()
                    .find_map(|c| method_span(c, method))
                    .map(|span| (p, span))
            })
            .expect("every bundled task hosts all three pieces");
        out.push_str(&format!(
            "piece {annotation} file={} lines={}-{}\n",
            path.display(),
            span.0,
            span.1
        ));
    }
    out
}

fn method_span(class: &ClassDecl, name: &str) -> Option<(u32, u32)> {
    class
        .methods
        .iter()
        .find(|m| m.simple_name == name)
        .map(|m| (m.line, m.end_line))
        .or_else(|| class.inner_classes.iter().find_map(|c| method_span(c, name)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conform::conformance;
    use crate::pipeline::synthesize;
    use crate::ScoreCoefficients;

    #[test]
    fn specification_describes_the_expected_flow() {
        let fspec = jaas_fspec();
        assert_eq!(fspec.nodes.len(), 6);
        assert_eq!(fspec.node(2).param_types.len(), 2);
        assert_eq!(
            fspec.canon("CallbackHandler"),
            "com.sun.security.auth.callback.TextCallbackHandler"
        );
        assert!(fspec.same_type("LoginContext", "javax.security.auth.login.LoginContext"));
    }

    #[test]
    fn every_task_parses_and_labels_its_three_hosts() {
        let tasks = replica_tasks();
        assert_eq!(tasks.len(), 10);
        for t in &tasks {
            let program = t.parse();
            assert!(!program.files.is_empty(), "{}", t.id);
            assert!(t.label.starts_with(&format!("task {}\n", t.id)));
            assert_eq!(t.label.matches("piece ").count(), 3, "{}", t.id);
        }
        let ids: Vec<&str> = tasks.iter().map(|t| t.id.as_str()).collect();
        assert_eq!(ids, ["t01", "t02", "t03", "t04", "t05", "t06", "t07", "t08", "t09", "t10"]);
    }

    fn mechanisms_of(task_id: &str) -> Vec<String> {
        let fspec = jaas_fspec();
        let t = replica_tasks()
            .into_iter()
            .find(|t| t.id == task_id)
            .unwrap();
        let out = synthesize(&t.parse(), &fspec, &ScoreCoefficients::default(), 3, 1).unwrap();
        let c = conformance(&out.result.program, &fspec, &out.branch);
        assert_eq!(c.score(), 1.0, "{task_id}: {c:?}");
        out.result
            .report
            .channels
            .iter()
            .map(|(_, _, m)| m.clone())
            .collect()
    }

    #[test]
    fn baseline_task_carries_the_context_through_a_return() {
        let mechanisms = mechanisms_of("t01");
        assert!(
            mechanisms.iter().all(|m| m == "returnValue"),
            "{mechanisms:?}"
        );
    }

    #[test]
    fn void_initializer_falls_back_to_a_fresh_field() {
        let mechanisms = mechanisms_of("t02");
        assert!(
            mechanisms.iter().all(|m| m == "freshField"),
            "{mechanisms:?}"
        );
    }

    #[test]
    fn declared_context_field_is_reused_as_the_carrier() {
        let mechanisms = mechanisms_of("t05");
        assert!(
            mechanisms.iter().all(|m| m == "existingField"),
            "{mechanisms:?}"
        );
    }

    #[test]
    fn dataset_writes_one_directory_per_task() {
        let dir = tempfile::tempdir().unwrap();
        write_dataset(dir.path()).unwrap();
        assert!(dir.path().join("jaas.fspec").is_file());
        for t in replica_tasks() {
            assert!(dir.path().join(&t.id).join("label.rec").is_file(), "{}", t.id);
            for (p, _) in &t.sources {
                assert!(dir.path().join(&t.id).join(p).is_file(), "{}", t.id);
            }
        }
        let loaded = crate::fspec::load_fspec(&dir.path().join("jaas.fspec")).unwrap();
        assert_eq!(loaded, jaas_fspec());
    }
}
