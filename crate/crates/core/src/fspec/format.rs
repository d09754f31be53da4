use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use super::*;

/// Loads and validates a flow specification from its text form.
pub fn load_fspec(path: &Path) -> Result<FSpec, FspecError> {
    load_fspec_with_warnings(path).map(|(fspec, _)| fspec)
}

/// Like `load_fspec`, also surfacing non-fatal findings (currently:
/// annotations that had to be derived from member names).
pub fn load_fspec_with_warnings(path: &Path) -> Result<(FSpec, Vec<String>), FspecError> {
    let text = std::fs::read_to_string(path).map_err(|e| FspecError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    parse_fspec(&path.display().to_string(), &text)
}

pub(crate) fn parse_fspec(path: &str, text: &str) -> Result<(FSpec, Vec<String>), FspecError> {
    let mut warnings = Vec::new();
    let mut name = None;
    let mut nodes: BTreeMap<u32, ApiNode> = BTreeMap::new();
    let mut edges = Vec::new();
    let mut start_ids = BTreeSet::new();
    let mut end_ids = BTreeSet::new();
    let mut aliases = BTreeMap::new();
    let fail = |line: usize, message: String| FspecError::Format {
        path: path.to_string(),
        line,
        message,
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut words = line.split_whitespace();
        let keyword = words.next().unwrap();
        match keyword {
            "fspec" => {
                let value = words.next().ok_or_else(|| {
                    fail(line_no, "expected `fspec <name>`".to_string())
                })?;
                if name.is_some() {
                    return Err(fail(line_no, "duplicate `fspec` line".to_string()));
                }
                name = Some(value.to_string());
            }
            "alias" => {
                let from = words
                    .next()
                    .ok_or_else(|| fail(line_no, "alias needs two type names".to_string()))?;
                let to = words
                    .next()
                    .ok_or_else(|| fail(line_no, "alias needs two type names".to_string()))?;
                aliases.insert(from.to_string(), to.to_string());
            }
            "node" => {
                let node = parse_node(line, line_no, &mut warnings, &fail)?;
                if nodes.contains_key(&node.id) {
                    return Err(fail(line_no, format!("duplicate node id {}", node.id)));
                }
                nodes.insert(node.id, node);
            }
            "edge" => {
                let src = parse_id(words.next(), line_no, &fail)?;
                let dst = parse_id(words.next(), line_no, &fail)?;
                let mut kind = None;
                let mut freq = 1;
                for w in words {
                    if let Some(v) = w.strip_prefix("kind=") {
                        kind = Some(match v {
                            "data" => DepKind::Data,
                            "control" => DepKind::Control,
                            other => {
                                return Err(fail(
                                    line_no,
                                    format!("unknown edge kind `{other}`"),
                                ))
                            }
                        });
                    } else if let Some(v) = w.strip_prefix("freq=") {
                        freq = v.parse::<u32>().map_err(|_| {
                            fail(line_no, format!("bad frequency `{v}`"))
                        })?;
                    } else {
                        return Err(fail(line_no, format!("unexpected edge field `{w}`")));
                    }
                }
                let kind = kind
                    .ok_or_else(|| fail(line_no, "edge needs kind=data|control".to_string()))?;
                edges.push(FsEdge {
                    src,
                    dst,
                    kind,
                    freq,
                });
            }
            "start" | "end" => {
                let target = if keyword == "start" {
                    &mut start_ids
                } else {
                    &mut end_ids
                };
                let mut any = false;
                for w in words {
                    target.insert(parse_id(Some(w), line_no, &fail)?);
                    any = true;
                }
                if !any {
                    return Err(fail(line_no, format!("`{keyword}` needs node ids")));
                }
            }
            other => {
                return Err(fail(line_no, format!("unknown record `{other}`")));
            }
        }
    }

    let name = name.ok_or_else(|| fail(0, "missing `fspec <name>` header".to_string()))?;
    let mut fspec = FSpec {
        name,
        nodes,
        edges,
        start_ids,
        end_ids,
        aliases,
    };
    fspec.validate()?;
    Ok((fspec, warnings))
}

fn parse_id(
    word: Option<&str>,
    line_no: usize,
    fail: &impl Fn(usize, String) -> FspecError,
) -> Result<u32, FspecError> {
    let w = word.ok_or_else(|| fail(line_no, "expected a node id".to_string()))?;
    w.parse::<u32>()
        .map_err(|_| fail(line_no, format!("bad node id `{w}`")))
}

fn parse_node(
    line: &str,
    line_no: usize,
    warnings: &mut Vec<String>,
    fail: &impl Fn(usize, String) -> FspecError,
) -> Result<ApiNode, FspecError> {
    // the annotation value runs to the end of the line and may hold spaces
    let (head, annotation) = match line.find("annotation=") {
        Some(pos) => (
            line[..pos].trim_end(),
            Some(line[pos + "annotation=".len()..].trim().to_string()),
        ),
        None => (line, None),
    };
    let mut words = head.split_whitespace();
    words.next(); // `node`
    let id = parse_id(words.next(), line_no, fail)?;
    let mut kind = None;
    let mut owner_type = None;
    let mut member_name = None;
    let mut param_types = Vec::new();
    let mut return_type: Option<Option<String>> = None;
    for w in words {
        if let Some(v) = w.strip_prefix("kind=") {
            kind = Some(match v {
                "constructor" => ApiKind::Constructor,
                "instance" => ApiKind::Instance,
                "static" => ApiKind::Static,
                other => return Err(fail(line_no, format!("unknown node kind `{other}`"))),
            });
        } else if let Some(v) = w.strip_prefix("class=") {
            owner_type = Some(v.to_string());
        } else if let Some(v) = w.strip_prefix("method=") {
            member_name = Some(v.to_string());
        } else if let Some(v) = w.strip_prefix("params=") {
            if v != "-" {
                param_types = v.split(',').map(|s| s.trim().to_string()).collect();
            }
        } else if let Some(v) = w.strip_prefix("return=") {
            return_type = Some(if v == "void" {
                None
            } else {
                Some(v.to_string())
            });
        } else {
            return Err(fail(line_no, format!("unexpected node field `{w}`")));
        }
    }
    let kind = kind.ok_or_else(|| fail(line_no, format!("node {id} missing kind=")))?;
    let owner_type =
        owner_type.ok_or_else(|| fail(line_no, format!("node {id} missing class=")))?;
    let member_name =
        member_name.ok_or_else(|| fail(line_no, format!("node {id} missing method=")))?;
    let return_type = match return_type {
        Some(r) => r,
        None if kind == ApiKind::Constructor => Some(owner_type.clone()),
        None => return Err(fail(line_no, format!("node {id} missing return="))),
    };
    let annotation = match annotation {
        Some(a) if !a.is_empty() => normalize_annotation(&a),
        _ => {
            let derived = derive_annotation(&member_name);
            warnings.push(format!(
                "node {id}: missing annotation, derived `{derived}` from member name"
            ));
            derived
        }
    };
    Ok(ApiNode {
        id,
        kind,
        owner_type,
        member_name,
        param_types,
        return_type,
        annotation,
    })
}

fn normalize_annotation(a: &str) -> String {
    if a.starts_with('#') {
        a.to_string()
    } else {
        format!("#{a}")
    }
}

/// Fallback label for nodes without an annotation: camel-case segments of
/// the member name joined with underscores, e.g. `getSubject` becomes
/// `#get_Subject`.
fn derive_annotation(member_name: &str) -> String {
    let mut words: Vec<String> = Vec::new();
    let mut current = String::new();
    for c in member_name.chars() {
        if c.is_uppercase() && !current.is_empty() {
            words.push(std::mem::take(&mut current));
        }
        current.push(c);
    }
    if !current.is_empty() {
        words.push(current);
    }
    format!("#{}", words.join("_"))
}

/// Writes a specification in the canonical text layout; loading the result
/// reproduces the value exactly.
pub fn save_fspec(fspec: &FSpec, path: &Path) -> Result<(), FspecError> {
    std::fs::write(path, render_fspec(fspec)).map_err(|e| FspecError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

pub fn render_fspec(fspec: &FSpec) -> String {
    let mut out = String::new();
    out.push_str(&format!("fspec {}\n", fspec.name));
    for (from, to) in &fspec.aliases {
        out.push_str(&format!("alias {from} {to}\n"));
    }
    for node in fspec.nodes.values() {
        let params = if node.param_types.is_empty() {
            "-".to_string()
        } else {
            node.param_types.join(",")
        };
        let ret = node.return_type.as_deref().unwrap_or("void");
        out.push_str(&format!(
            "node {} kind={} class={} method={} params={} return={} annotation={}\n",
            node.id,
            node.kind.as_str(),
            node.owner_type,
            node.member_name,
            params,
            ret,
            node.annotation
        ));
    }
    for edge in &fspec.edges {
        out.push_str(&format!(
            "edge {} {} kind={} freq={}\n",
            edge.src,
            edge.dst,
            edge.kind.as_str(),
            edge.freq
        ));
    }
    let ids = |set: &BTreeSet<u32>| {
        set.iter()
            .map(|i| i.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    };
    out.push_str(&format!("start {}\n", ids(&fspec.start_ids)));
    out.push_str(&format!("end {}\n", ids(&fspec.end_ids)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# authentication flow
fspec jaas
alias String java.lang.String
node 1 kind=constructor class=p.Handler method=Handler params=- return=p.Handler annotation=#Initialization
node 2 kind=constructor class=p.Context method=Context params=java.lang.String,p.Handler return=p.Context annotation=#Initialization
node 3 kind=instance class=p.Context method=login params=- return=void annotation=#Logging_In
edge 1 2 kind=data freq=8
edge 2 3 kind=data freq=8
start 1
end 3
";

    #[test]
    fn loads_nodes_edges_and_aliases() {
        let (fspec, warnings) = parse_fspec("s.fspec", SAMPLE).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(fspec.name, "jaas");
        assert_eq!(fspec.nodes.len(), 3);
        assert_eq!(fspec.edges.len(), 2);
        assert_eq!(fspec.node(2).param_types.len(), 2);
        assert_eq!(fspec.node(3).return_type, None);
        assert_eq!(fspec.canon("String"), "java.lang.String");
        assert!(fspec.same_type("String", "java.lang.String"));
        assert_eq!(fspec.node(1).produced_type(), Some("p.Handler"));
    }

    #[test]
    fn save_and_load_reproduce_the_value() {
        let (fspec, _) = parse_fspec("s.fspec", SAMPLE).unwrap();
        let rendered = render_fspec(&fspec);
        let (again, _) = parse_fspec("s.fspec", &rendered).unwrap();
        assert_eq!(fspec, again);
        // rendering is stable
        assert_eq!(rendered, render_fspec(&again));
    }

    #[test]
    fn missing_annotation_is_derived_with_a_warning() {
        let text = SAMPLE.replace(" annotation=#Logging_In", "");
        let (fspec, warnings) = parse_fspec("s.fspec", &text).unwrap();
        assert_eq!(fspec.node(3).annotation, "#login");
        assert_eq!(warnings.len(), 1);
        assert!(warnings[0].contains("node 3"));
    }

    #[test]
    fn camel_case_fallback_splits_words() {
        assert_eq!(derive_annotation("getSubject"), "#get_Subject");
        assert_eq!(derive_annotation("login"), "#login");
        assert_eq!(derive_annotation("LoginContext"), "#Login_Context");
    }

    #[test]
    fn format_errors_carry_line_numbers() {
        let err = parse_fspec("s.fspec", "fspec x\nnode 1 kind=wat class=C method=m params=- return=void annotation=#A\nstart 1\nend 1\n").unwrap_err();
        match err {
            FspecError::Format { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn dangling_edges_are_rejected() {
        let text = SAMPLE.replace("edge 2 3", "edge 2 9");
        let err = parse_fspec("s.fspec", &text).unwrap_err();
        assert!(matches!(err, FspecError::DanglingEdge(9)));
    }

    #[test]
    fn headerless_files_are_rejected() {
        let err = parse_fspec("s.fspec", "node 1 kind=instance class=C method=m params=- return=void annotation=#A\n").unwrap_err();
        assert!(matches!(err, FspecError::Format { .. }));
    }

    #[test]
    fn constructors_must_return_their_owner() {
        let text = SAMPLE.replace(
            "params=- return=p.Handler annotation=#Initialization",
            "params=- return=void annotation=#Initialization",
        );
        let err = parse_fspec("s.fspec", &text).unwrap_err();
        assert!(matches!(err, FspecError::Format { .. }));
    }

    #[test]
    fn data_edges_need_a_produced_value() {
        // login returns void, so a data edge out of node 3 is malformed
        let text = SAMPLE
            .replace(
                "start 1",
                "node 4 kind=instance class=p.Context method=logout params=- return=void annotation=#Out\nedge 3 4 kind=data freq=1\nstart 1",
            )
            .replace("end 3", "end 4");
        let err = parse_fspec("s.fspec", &text).unwrap_err();
        match err {
            FspecError::Format { message, .. } => assert!(message.contains("void producer")),
            other => panic!("unexpected {other:?}"),
        }
    }
}
