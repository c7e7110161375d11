//! Finite directed multigraphs and their free semigroupoid of paths.
//!
//! Vertices and edges are referred to by opaque string ids on the way in and
//! by dense indices afterwards. Both are sorted by id when the graph is built,
//! so index order coincides with lexicographic id order and path enumeration
//! is reproducible.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexIx(pub(crate) u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeIx(pub(crate) u32);

impl VertexIx {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeIx {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate id `{0}`")]
    DuplicateId(String),
    #[error("edge `{edge}` references unknown vertex `{vertex}`")]
    DanglingEndpoint { edge: String, vertex: String },
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("unknown id `{0}`")]
    UnknownId(String),
    #[error("path is not admissible: `{next}` does not start where `{prev}` ends")]
    NotAdmissible { prev: String, next: String },
    #[error("empty edge path")]
    EmptyPath,
    #[error("word does not belong to this graph")]
    ForeignWord,
}

/// Input record for one edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeSpec {
    pub id: String,
    pub src: String,
    pub dst: String,
}

impl EdgeSpec {
    pub fn new(id: impl Into<String>, src: impl Into<String>, dst: impl Into<String>) -> Self {
        EdgeSpec {
            id: id.into(),
            src: src.into(),
            dst: dst.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct Edge {
    id: String,
    source: VertexIx,
    range: VertexIx,
}

#[derive(Debug, Clone)]
pub struct Graph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    vertex_index: HashMap<String, VertexIx>,
    edge_index: HashMap<String, EdgeIx>,
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges
    }
}

impl Eq for Graph {}

/// An element of the free semigroupoid: a vertex unit or a nonempty
/// admissible edge path. Words only make sense relative to the graph that
/// produced them.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PathWord {
    Vertex(VertexIx),
    Path(Vec<EdgeIx>),
}

impl PathWord {
    pub fn len(&self) -> usize {
        match self {
            PathWord::Vertex(_) => 0,
            PathWord::Path(edges) => edges.len(),
        }
    }

    pub fn is_vertex(&self) -> bool {
        matches!(self, PathWord::Vertex(_))
    }

    pub fn edges(&self) -> &[EdgeIx] {
        match self {
            PathWord::Vertex(_) => &[],
            PathWord::Path(edges) => edges,
        }
    }
}

/// The footprint of a word: the set of distinct edges it traverses, or its
/// base vertex for a vertex unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Diagram {
    Vertex(VertexIx),
    Edges(BTreeSet<EdgeIx>),
}

impl Graph {
    /// Builds and validates a graph. Vertex and edge ids share one namespace.
    pub fn new<V, S>(vertices: V, edges: impl IntoIterator<Item = EdgeSpec>) -> Result<Self, GraphError>
    where
        V: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut vertex_ids: Vec<String> = vertices.into_iter().map(Into::into).collect();
        let mut edge_specs: Vec<EdgeSpec> = edges.into_iter().collect();

        let mut seen = BTreeSet::new();
        for id in vertex_ids.iter().chain(edge_specs.iter().map(|e| &e.id)) {
            if !seen.insert(id.as_str()) {
                return Err(GraphError::DuplicateId(id.clone()));
            }
        }

        vertex_ids.sort();
        edge_specs.sort_by(|a, b| a.id.cmp(&b.id));

        let vertex_index: HashMap<String, VertexIx> = vertex_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), VertexIx(i as u32)))
            .collect();

        let mut edges = Vec::with_capacity(edge_specs.len());
        for spec in edge_specs {
            let lookup = |v: &str| {
                vertex_index.get(v).copied().ok_or_else(|| GraphError::DanglingEndpoint {
                    edge: spec.id.clone(),
                    vertex: v.to_string(),
                })
            };
            let source = lookup(&spec.src)?;
            let range = lookup(&spec.dst)?;
            edges.push(Edge {
                id: spec.id,
                source,
                range,
            });
        }
        let edge_index = edges
            .iter()
            .enumerate()
            .map(|(i, e)| (e.id.clone(), EdgeIx(i as u32)))
            .collect();

        Ok(Graph {
            vertices: vertex_ids,
            edges,
            vertex_index,
            edge_index,
        })
    }

    /// One vertex `v` carrying the given loops.
    pub fn bouquet(vertex: &str, loops: &[&str]) -> Result<Self, GraphError> {
        Graph::new([vertex], loops.iter().map(|l| EdgeSpec::new(*l, vertex, vertex)))
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexIx> + '_ {
        (0..self.vertices.len() as u32).map(VertexIx)
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeIx> + '_ {
        (0..self.edges.len() as u32).map(EdgeIx)
    }

    pub fn vertex(&self, id: &str) -> Result<VertexIx, GraphError> {
        self.vertex_index
            .get(id)
            .copied()
            .ok_or_else(|| GraphError::UnknownVertex(id.to_string()))
    }

    pub fn edge(&self, id: &str) -> Result<EdgeIx, GraphError> {
        self.edge_index
            .get(id)
            .copied()
            .ok_or_else(|| GraphError::UnknownEdge(id.to_string()))
    }

    pub fn vertex_id(&self, v: VertexIx) -> &str {
        &self.vertices[v.index()]
    }

    pub fn edge_id(&self, e: EdgeIx) -> &str {
        &self.edges[e.index()].id
    }

    pub fn edge_source(&self, e: EdgeIx) -> VertexIx {
        self.edges[e.index()].source
    }

    pub fn edge_range(&self, e: EdgeIx) -> VertexIx {
        self.edges[e.index()].range
    }

    pub fn is_loop(&self, e: EdgeIx) -> bool {
        let edge = &self.edges[e.index()];
        edge.source == edge.range
    }

    /// The vertex unit for `id`.
    pub fn vertex_unit(&self, id: &str) -> Result<PathWord, GraphError> {
        self.vertex(id).map(PathWord::Vertex)
    }

    /// An admissible edge path from edge ids.
    pub fn path<S: AsRef<str>>(&self, ids: &[S]) -> Result<PathWord, GraphError> {
        if ids.is_empty() {
            return Err(GraphError::EmptyPath);
        }
        let edges = ids
            .iter()
            .map(|id| self.edge(id.as_ref()))
            .collect::<Result<Vec<_>, _>>()?;
        self.path_from_edges(edges)
    }

    pub fn path_from_edges(&self, edges: Vec<EdgeIx>) -> Result<PathWord, GraphError> {
        if edges.is_empty() {
            return Err(GraphError::EmptyPath);
        }
        if edges.iter().any(|e| e.index() >= self.edges.len()) {
            return Err(GraphError::ForeignWord);
        }
        for pair in edges.windows(2) {
            if self.edge_range(pair[0]) != self.edge_source(pair[1]) {
                return Err(GraphError::NotAdmissible {
                    prev: self.edge_id(pair[0]).to_string(),
                    next: self.edge_id(pair[1]).to_string(),
                });
            }
        }
        Ok(PathWord::Path(edges))
    }

    /// Parses the flag syntax: a bare vertex id is a vertex unit, otherwise a
    /// comma-separated list of edge ids (`"a,a"` is the path `aa`).
    pub fn parse_word(&self, text: &str) -> Result<PathWord, GraphError> {
        let text = text.trim();
        if let Some(&v) = self.vertex_index.get(text) {
            return Ok(PathWord::Vertex(v));
        }
        let ids: Vec<&str> = text.split(',').map(str::trim).collect();
        if ids.len() == 1 && !self.edge_index.contains_key(ids[0]) {
            return Err(GraphError::UnknownId(ids[0].to_string()));
        }
        self.path(&ids)
    }

    /// Inverse of [`Graph::parse_word`].
    pub fn format_word(&self, w: &PathWord) -> String {
        match w {
            PathWord::Vertex(v) => self.vertex_id(*v).to_string(),
            PathWord::Path(edges) => edges
                .iter()
                .map(|&e| self.edge_id(e))
                .collect::<Vec<_>>()
                .join(","),
        }
    }

    pub fn contains(&self, w: &PathWord) -> bool {
        match w {
            PathWord::Vertex(v) => v.index() < self.vertices.len(),
            PathWord::Path(edges) => {
                !edges.is_empty()
                    && edges.iter().all(|e| e.index() < self.edges.len())
                    && edges
                        .windows(2)
                        .all(|p| self.edge_range(p[0]) == self.edge_source(p[1]))
            }
        }
    }

    fn check(&self, w: &PathWord) -> Result<(), GraphError> {
        if self.contains(w) {
            Ok(())
        } else {
            Err(GraphError::ForeignWord)
        }
    }

    pub fn source(&self, w: &PathWord) -> VertexIx {
        match w {
            PathWord::Vertex(v) => *v,
            PathWord::Path(edges) => self.edge_source(edges[0]),
        }
    }

    pub fn range(&self, w: &PathWord) -> VertexIx {
        match w {
            PathWord::Vertex(v) => *v,
            PathWord::Path(edges) => self.edge_range(edges[edges.len() - 1]),
        }
    }

    pub fn endpoints(&self, w: &PathWord) -> (VertexIx, VertexIx) {
        (self.source(w), self.range(w))
    }

    /// `w1 w2` if `r(w1) = s(w2)`, else `None`.
    pub fn concat(&self, w1: &PathWord, w2: &PathWord) -> Result<Option<PathWord>, GraphError> {
        self.check(w1)?;
        self.check(w2)?;
        if self.range(w1) != self.source(w2) {
            return Ok(None);
        }
        Ok(Some(join(w1, w2)))
    }

    /// `Some(h)` with `w = prefix · h`, if `prefix` is a prefix of `w`.
    pub fn strip_prefix(&self, prefix: &PathWord, w: &PathWord) -> Option<PathWord> {
        match (prefix, w) {
            (PathWord::Vertex(x), _) => (self.source(w) == *x).then(|| w.clone()),
            (PathWord::Path(_), PathWord::Vertex(_)) => None,
            (PathWord::Path(p), PathWord::Path(q)) => {
                if !q.starts_with(p) {
                    None
                } else if q.len() == p.len() {
                    Some(PathWord::Vertex(self.edge_range(p[p.len() - 1])))
                } else {
                    Some(PathWord::Path(q[p.len()..].to_vec()))
                }
            }
        }
    }

    pub fn diagram(&self, w: &PathWord) -> Diagram {
        match w {
            PathWord::Vertex(v) => Diagram::Vertex(*v),
            PathWord::Path(edges) => Diagram::Edges(edges.iter().copied().collect()),
        }
    }

    pub fn diagram_distinct(&self, w1: &PathWord, w2: &PathWord) -> bool {
        self.diagram(w1) != self.diagram(w2)
    }

    /// Every vertex unit and every admissible path of length at most
    /// `max_len`, length-major and lexicographic in edge id within a length.
    pub fn enumerate_paths(&self, max_len: usize) -> Vec<PathWord> {
        let mut out: Vec<PathWord> = self.vertices().map(PathWord::Vertex).collect();
        let mut level: Vec<PathWord> = out.clone();
        for _ in 0..max_len {
            let mut next = Vec::new();
            for e in self.edges() {
                let r = self.edge_range(e);
                for h in level.iter().filter(|h| self.source(h) == r) {
                    next.push(prepend(e, h));
                }
            }
            if next.is_empty() {
                break;
            }
            out.extend(next.iter().cloned());
            level = next;
        }
        out
    }
}

/// Concatenation without checks; callers guarantee `r(w1) = s(w2)`.
pub(crate) fn join(w1: &PathWord, w2: &PathWord) -> PathWord {
    match (w1, w2) {
        (PathWord::Vertex(_), _) => w2.clone(),
        (_, PathWord::Vertex(_)) => w1.clone(),
        (PathWord::Path(a), PathWord::Path(b)) => {
            let mut edges = Vec::with_capacity(a.len() + b.len());
            edges.extend_from_slice(a);
            edges.extend_from_slice(b);
            PathWord::Path(edges)
        }
    }
}

fn prepend(e: EdgeIx, h: &PathWord) -> PathWord {
    let mut edges = Vec::with_capacity(h.len() + 1);
    edges.push(e);
    edges.extend_from_slice(h.edges());
    PathWord::Path(edges)
}
