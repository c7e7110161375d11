use std::path::Path;

use gwp_core::{EdgeSpec, Graph, GraphError};
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFileSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub id: String,
    pub src: String,
    pub dst: String,
}

pub fn parse_graph_file(path: &Path) -> Result<Graph, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    parse_graph_json(&text).map_err(|e| match e {
        CliError::Input(msg) => CliError::Input(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_graph_json(text: &str) -> Result<Graph, CliError> {
    let spec: GraphFileSpec = serde_json::from_str(text).map_err(|e| {
        let kind = match e.classify() {
            serde_json::error::Category::Data => "schema error",
            _ => "malformed JSON",
        };
        CliError::Input(format!("{kind}: {e}"))
    })?;
    let edges = spec.edges.into_iter().map(|e| EdgeSpec::new(e.id, e.src, e.dst));
    Graph::new(spec.vertices, edges).map_err(|e| {
        let culprit = match &e {
            GraphError::DuplicateId(id) => Some(id.as_str()),
            GraphError::DanglingEndpoint { edge, .. } => Some(edge.as_str()),
            _ => None,
        };
        match culprit.and_then(|id| line_of(text, id)) {
            Some(line) => CliError::Input(format!("invalid graph at line {line}: {e}")),
            None => CliError::Input(format!("invalid graph: {e}")),
        }
    })
}

/// Last line mentioning `"id"`, which for a duplicate is the second
/// occurrence.
fn line_of(text: &str, id: &str) -> Option<usize> {
    let quoted = format!("\"{id}\"");
    text.lines()
        .enumerate()
        .filter(|(_, l)| l.contains(&quoted))
        .map(|(i, _)| i + 1)
        .last()
}
