//! Truncated matrix model of the graph Fock space.
//!
//! The basis holds every word of length at most `cutoff`. Words are stored as
//! linked nodes (first edge, index of the remaining word), so prepending an
//! edge is a table lookup and no per-word allocation happens even for bases
//! with close to a million entries. Operators are sparse column-compressed
//! `f64` matrices built directly from the edge actions; nothing here goes
//! through the symbolic product, which is what makes it usable as an oracle.

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::algebra::Element;
use crate::graph::{EdgeIx, Graph, GraphError, PathWord, VertexIx};
use crate::scalar::RealCoeff;

pub const DEFAULT_BASIS_CAP: usize = 1_000_000;

/// Matrices below this dimension may be expanded densely.
pub const DENSE_LIMIT: usize = 64;

const NONE: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FockError {
    #[error("cutoff must be at least 1")]
    ZeroCutoff,
    #[error("basis would exceed {cap} words (cutoff {cutoff})")]
    BasisTooLarge { cutoff: usize, cap: usize },
    #[error("element and representation live on different graphs")]
    GraphMismatch,
    #[error("cutoff {cutoff} is too small for an exact result, need at least {needed}")]
    CutoffTooSmall { needed: usize, cutoff: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Head {
    Vertex(VertexIx),
    Edge(EdgeIx),
}

#[derive(Debug, Clone, Copy)]
struct Node {
    head: Head,
    tail: u32,
    len: u32,
    source: VertexIx,
}

/// Ordered basis `{ξ_w : |w| <= cutoff}`, vertices first, then length-major
/// and lexicographic.
#[derive(Debug, Clone)]
pub struct FockBasis {
    graph: Arc<Graph>,
    cutoff: usize,
    nodes: Vec<Node>,
    /// `prepend[e][h]` is the index of `e·h`, or `NONE`.
    prepend: Vec<Vec<u32>>,
}

impl FockBasis {
    pub fn new(graph: Arc<Graph>, cutoff: usize, cap: usize) -> Result<Self, FockError> {
        let mut nodes: Vec<Node> = graph
            .vertices()
            .map(|v| Node {
                head: Head::Vertex(v),
                tail: NONE,
                len: 0,
                source: v,
            })
            .collect();
        if nodes.len() > cap {
            return Err(FockError::BasisTooLarge { cutoff, cap });
        }
        let mut links: Vec<(EdgeIx, u32, u32)> = Vec::new();
        let mut level: Vec<u32> = (0..nodes.len() as u32).collect();
        for k in 0..cutoff {
            let mut next = Vec::new();
            for e in graph.edges() {
                let r = graph.edge_range(e);
                let s = graph.edge_source(e);
                for &h in &level {
                    if nodes[h as usize].source != r {
                        continue;
                    }
                    if nodes.len() >= cap {
                        return Err(FockError::BasisTooLarge { cutoff, cap });
                    }
                    let idx = nodes.len() as u32;
                    nodes.push(Node {
                        head: Head::Edge(e),
                        tail: h,
                        len: k as u32 + 1,
                        source: s,
                    });
                    links.push((e, h, idx));
                    next.push(idx);
                }
            }
            if next.is_empty() {
                break;
            }
            level = next;
        }
        let mut prepend = vec![vec![NONE; nodes.len()]; graph.edge_count()];
        for (e, h, idx) in links {
            prepend[e.index()][h as usize] = idx;
        }
        Ok(FockBasis {
            graph,
            cutoff,
            nodes,
            prepend,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn word_len(&self, i: usize) -> usize {
        self.nodes[i].len as usize
    }

    pub fn word_source(&self, i: usize) -> VertexIx {
        self.nodes[i].source
    }

    pub fn word(&self, i: usize) -> PathWord {
        let node = self.nodes[i];
        match node.head {
            Head::Vertex(v) => PathWord::Vertex(v),
            Head::Edge(_) => {
                let mut edges = Vec::with_capacity(node.len as usize);
                let mut cur = i;
                while let Head::Edge(e) = self.nodes[cur].head {
                    edges.push(e);
                    cur = self.nodes[cur].tail as usize;
                }
                PathWord::Path(edges)
            }
        }
    }

    pub fn words(&self) -> Vec<PathWord> {
        (0..self.len()).map(|i| self.word(i)).collect()
    }

    pub fn index_of(&self, w: &PathWord) -> Option<usize> {
        if !self.graph.contains(w) {
            return None;
        }
        let mut idx = self.graph.range(w).index() as u32;
        for e in w.edges().iter().rev() {
            idx = self.prepend[e.index()][idx as usize];
            if idx == NONE {
                return None;
            }
        }
        Some(idx as usize)
    }

    fn create_edge(&self, e: EdgeIx, h: u32) -> Option<u32> {
        let idx = self.prepend[e.index()][h as usize];
        (idx != NONE).then_some(idx)
    }

    fn annihilate_edge(&self, e: EdgeIx, h: u32) -> Option<u32> {
        let node = self.nodes[h as usize];
        (node.head == Head::Edge(e)).then_some(node.tail)
    }

    /// `L_u L_w* ξ_h` as a basis index, `None` for zero or a word past the
    /// cutoff.
    fn apply_pair(&self, create: &PathWord, annihilate: &PathWord, h: u32) -> Option<u32> {
        let mut cur = h;
        match annihilate {
            PathWord::Vertex(x) => {
                if self.nodes[cur as usize].source != *x {
                    return None;
                }
            }
            PathWord::Path(edges) => {
                for &e in edges {
                    cur = self.annihilate_edge(e, cur)?;
                }
            }
        }
        match create {
            PathWord::Vertex(x) => (self.nodes[cur as usize].source == *x).then_some(cur),
            PathWord::Path(edges) => {
                for &e in edges.iter().rev() {
                    cur = self.create_edge(e, cur)?;
                }
                Some(cur)
            }
        }
    }
}

/// Column-compressed sparse matrix; rows within a column are sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<u32>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn from_columns<I>(nrows: usize, columns: I) -> Self
    where
        I: IntoIterator<Item = Vec<(u32, f64)>>,
    {
        let mut col_ptr = vec![0];
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        for mut col in columns {
            col.sort_unstable_by_key(|&(r, _)| r);
            let mut merged: Vec<(u32, f64)> = Vec::with_capacity(col.len());
            for (r, x) in col {
                match merged.last_mut() {
                    Some((last, acc)) if *last == r => *acc += x,
                    _ => merged.push((r, x)),
                }
            }
            for (r, x) in merged.into_iter().filter(|&(_, x)| x != 0.0) {
                row_idx.push(r);
                values.push(x);
            }
            col_ptr.push(row_idx.len());
        }
        let ncols = col_ptr.len() - 1;
        SparseMatrix {
            nrows,
            ncols,
            col_ptr,
            row_idx,
            values,
        }
    }

    pub fn diagonal(entries: &[f64]) -> Self {
        SparseMatrix::from_columns(
            entries.len(),
            entries
                .iter()
                .enumerate()
                .map(|(i, &x)| if x == 0.0 { vec![] } else { vec![(i as u32, x)] }),
        )
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.col_ptr[j]..self.col_ptr[j + 1];
        self.row_idx[range.clone()]
            .iter()
            .zip(&self.values[range])
            .map(|(&r, &x)| (r as usize, x))
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.column(j).find(|&(r, _)| r == i).map_or(0.0, |(_, x)| x)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.nrows];
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            for (r, a) in self.column(j) {
                y[r] += a * xj;
            }
        }
        y
    }

    pub fn transpose(&self) -> Self {
        let mut columns: Vec<Vec<(u32, f64)>> = vec![Vec::new(); self.nrows];
        for j in 0..self.ncols {
            for (r, x) in self.column(j) {
                columns[r].push((j as u32, x));
            }
        }
        SparseMatrix::from_columns(self.ncols, columns)
    }

    /// `self · other`.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.ncols, other.nrows, "dimension mismatch");
        let columns = (0..other.ncols).map(|j| {
            let mut acc: BTreeMap<u32, f64> = BTreeMap::new();
            for (k, b) in other.column(j) {
                for (r, a) in self.column(k) {
                    *acc.entry(r as u32).or_insert(0.0) += a * b;
                }
            }
            acc.into_iter().filter(|&(_, x)| x != 0.0).collect()
        });
        SparseMatrix::from_columns(self.nrows, columns)
    }

    /// Largest entrywise difference over the columns selected by `keep`.
    pub fn max_abs_diff(&self, other: &Self, keep: impl Fn(usize) -> bool) -> f64 {
        let mut worst: f64 = 0.0;
        for j in (0..self.ncols).filter(|&j| keep(j)) {
            let mut acc: BTreeMap<usize, f64> = BTreeMap::new();
            for (r, x) in self.column(j) {
                *acc.entry(r).or_insert(0.0) += x;
            }
            for (r, x) in other.column(j) {
                *acc.entry(r).or_insert(0.0) -= x;
            }
            worst = acc.values().fold(worst, |m, d| m.max(d.abs()));
        }
        worst
    }

    pub fn diag_entry(&self, i: usize) -> f64 {
        self.get(i, i)
    }

    /// Dense rows, only for small matrices.
    pub fn to_dense(&self) -> Option<Vec<Vec<f64>>> {
        if self.nrows >= DENSE_LIMIT || self.ncols >= DENSE_LIMIT {
            return None;
        }
        let mut dense = vec![vec![0.0; self.ncols]; self.nrows];
        for j in 0..self.ncols {
            for (r, x) in self.column(j) {
                dense[r][j] = x;
            }
        }
        Some(dense)
    }
}

/// Edge creation matrices and vertex projections on a truncated basis.
#[derive(Debug, Clone)]
pub struct FockRep {
    basis: FockBasis,
    edge_creation: Vec<SparseMatrix>,
    vertex_projection: Vec<SparseMatrix>,
}

impl FockRep {
    pub fn new(graph: Arc<Graph>, cutoff: usize) -> Result<Self, FockError> {
        Self::with_cap(graph, cutoff, DEFAULT_BASIS_CAP)
    }

    pub fn with_cap(graph: Arc<Graph>, cutoff: usize, cap: usize) -> Result<Self, FockError> {
        if cutoff == 0 {
            return Err(FockError::ZeroCutoff);
        }
        let basis = FockBasis::new(graph, cutoff, cap)?;
        let n = basis.len();
        let edge_creation = basis
            .graph
            .edges()
            .map(|e| {
                SparseMatrix::from_columns(
                    n,
                    (0..n as u32).map(|h| match basis.create_edge(e, h) {
                        Some(r) => vec![(r, 1.0)],
                        None => vec![],
                    }),
                )
            })
            .collect();
        let vertex_projection = basis
            .graph
            .vertices()
            .map(|v| {
                let diag: Vec<f64> = (0..n)
                    .map(|i| if basis.word_source(i) == v { 1.0 } else { 0.0 })
                    .collect();
                SparseMatrix::diagonal(&diag)
            })
            .collect();
        Ok(FockRep {
            basis,
            edge_creation,
            vertex_projection,
        })
    }

    pub fn basis(&self) -> &FockBasis {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn cutoff(&self) -> usize {
        self.basis.cutoff
    }

    pub fn creation(&self, e: EdgeIx) -> &SparseMatrix {
        &self.edge_creation[e.index()]
    }

    pub fn annihilation(&self, e: EdgeIx) -> SparseMatrix {
        self.edge_creation[e.index()].transpose()
    }

    pub fn projection(&self, v: VertexIx) -> &SparseMatrix {
        &self.vertex_projection[v.index()]
    }

    /// `L_w` as the product of its edge factors (the projection for a vertex
    /// unit).
    pub fn word_matrix(&self, w: &PathWord) -> SparseMatrix {
        match w {
            PathWord::Vertex(v) => self.projection(*v).clone(),
            PathWord::Path(edges) => {
                let mut acc = self.creation(edges[0]).clone();
                for &e in &edges[1..] {
                    acc = acc.matmul(self.creation(e));
                }
                acc
            }
        }
    }

    fn check_graph<C: RealCoeff>(&self, a: &Element<C>) -> Result<(), FockError> {
        if Arc::ptr_eq(a.graph(), &self.basis.graph) || **a.graph() == *self.basis.graph {
            Ok(())
        } else {
            Err(FockError::GraphMismatch)
        }
    }

    /// The truncated matrix of `a`. Columns whose image would leave the
    /// basis lose those entries.
    pub fn matrix_of<C: RealCoeff>(&self, a: &Element<C>) -> Result<SparseMatrix, FockError> {
        self.check_graph(a)?;
        let terms: Vec<(&PathWord, &PathWord, f64)> =
            a.terms().map(|(u, w, c)| (u, w, c.to_f64())).collect();
        let n = self.dim();
        let columns = (0..n as u32).map(|h| {
            terms
                .iter()
                .filter_map(|&(u, w, c)| self.basis.apply_pair(u, w, h).map(|r| (r, c)))
                .collect::<Vec<_>>()
        });
        Ok(SparseMatrix::from_columns(n, columns))
    }

    fn unit_vector(&self, v: VertexIx) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        x[v.index()] = 1.0;
        x
    }

    /// `<a ξ_v, ξ_v>`.
    pub fn vacuum_expectation<C: RealCoeff>(&self, a: &Element<C>, v: VertexIx) -> Result<f64, FockError> {
        self.vacuum_expectation_of_product(std::slice::from_ref(a), v)
    }

    /// `<a_1 a_2 ... a_n ξ_v, ξ_v>` by a chain of sparse products, rightmost
    /// factor first. Requires the summed creation lengths to fit under the
    /// cutoff so truncation cannot affect the result.
    pub fn vacuum_expectation_of_product<C: RealCoeff>(
        &self,
        factors: &[Element<C>],
        v: VertexIx,
    ) -> Result<f64, FockError> {
        let needed: usize = factors.iter().map(Element::max_creation_len).sum();
        if needed > self.cutoff() {
            return Err(FockError::CutoffTooSmall {
                needed,
                cutoff: self.cutoff(),
            });
        }
        if v.index() >= self.basis.graph.vertex_count() {
            return Err(GraphError::ForeignWord.into());
        }
        let mut x = self.unit_vector(v);
        for a in factors.iter().rev() {
            x = self.matrix_of(a)?.matvec(&x);
        }
        Ok(x[v.index()])
    }

    /// `<a^n ξ_v, ξ_v>` for `n = 1..=max_order`, sharing one matrix and one
    /// chain of matrix-vector products.
    pub fn vacuum_moments<C: RealCoeff>(
        &self,
        a: &Element<C>,
        max_order: usize,
        v: VertexIx,
    ) -> Result<Vec<f64>, FockError> {
        let needed = a.max_creation_len() * max_order;
        if needed > self.cutoff() {
            return Err(FockError::CutoffTooSmall {
                needed,
                cutoff: self.cutoff(),
            });
        }
        if v.index() >= self.basis.graph.vertex_count() {
            return Err(GraphError::ForeignWord.into());
        }
        let m = self.matrix_of(a)?;
        let mut x = self.unit_vector(v);
        let mut out = Vec::with_capacity(max_order);
        for _ in 0..max_order {
            x = m.matvec(&x);
            out.push(x[v.index()]);
        }
        Ok(out)
    }

    pub fn verify_relations(&self) -> RelationsReport {
        verify_relations(self)
    }
}

/// Cutoff that makes an order-`n` moment of factors with creation length at
/// most `len` exact.
pub fn exact_cutoff(order: usize, len: usize) -> usize {
    (order * len).max(1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationCheck {
    pub identity: &'static str,
    pub cases: usize,
    pub max_deviation: f64,
    /// Checks that are expected to fail in the concrete model and are only
    /// reported for reference.
    pub informational: bool,
}

impl RelationCheck {
    pub fn holds(&self) -> bool {
        self.max_deviation == 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelationsReport {
    pub cutoff: usize,
    pub checks: Vec<RelationCheck>,
}

impl RelationsReport {
    /// True when every non-informational identity held exactly.
    pub fn all_hold(&self) -> bool {
        self.checks.iter().filter(|c| !c.informational).all(RelationCheck::holds)
    }

    pub fn get(&self, identity: &str) -> Option<&RelationCheck> {
        self.checks.iter().find(|c| c.identity == identity)
    }
}

pub const REL_ANNIHILATE_CREATE: &str = "L_w* L_w = L_r(w)";
pub const REL_PARTIAL_ISOMETRY: &str = "L_w L_w* L_w = L_w";
pub const REL_PARTIAL_ISOMETRY_STAR: &str = "L_w* L_w L_w* = L_w*";
pub const REL_RANGE_IDEMPOTENT: &str = "(L_w L_w*)^2 = L_w L_w*";
pub const REL_RANGE_SELF_ADJOINT: &str = "(L_w L_w*)* = L_w L_w*";
pub const REL_RANGE_SUBPROJECTION: &str = "L_w L_w* <= L_s(w)";
pub const REL_RANGE_EQUALS_SOURCE: &str = "L_w L_w* = L_s(w)";
pub const REL_VERTEX_IDEMPOTENT: &str = "L_v^2 = L_v";
pub const REL_VERTEX_SELF_ADJOINT: &str = "L_v* = L_v";

fn verify_relations(rep: &FockRep) -> RelationsReport {
    let basis = &rep.basis;
    let g = basis.graph.clone();
    let cutoff = rep.cutoff();
    let all = |_: usize| true;

    let mut dev = [0.0f64; 6];
    let mut gap: f64 = 0.0;
    let mut words = 0;
    for i in 0..basis.len() {
        let len = basis.word_len(i);
        if len == 0 || len >= cutoff {
            continue;
        }
        words += 1;
        let w = basis.word(i);
        let lw = rep.word_matrix(&w);
        let lws = lw.transpose();
        let interior = |j: usize| basis.word_len(j) + len <= cutoff;
        let range_proj = rep.projection(g.range(&w));
        let source_proj = rep.projection(g.source(&w));

        let star_l = lws.matmul(&lw);
        dev[0] = dev[0].max(star_l.max_abs_diff(range_proj, interior));
        dev[1] = dev[1].max(lw.matmul(&star_l).max_abs_diff(&lw, interior));
        dev[2] = dev[2].max(star_l.matmul(&lws).max_abs_diff(&lws, all));

        let p = lw.matmul(&lws);
        dev[3] = dev[3].max(p.matmul(&p).max_abs_diff(&p, all));
        dev[4] = dev[4].max(p.transpose().max_abs_diff(&p, all));
        for j in 0..basis.len() {
            let excess = p.diag_entry(j) - source_proj.diag_entry(j);
            dev[5] = dev[5].max(excess.max(0.0));
        }
        gap = gap.max(p.max_abs_diff(source_proj, all));
    }

    let mut vdev = [0.0f64; 2];
    for v in g.vertices() {
        let p = rep.projection(v);
        vdev[0] = vdev[0].max(p.matmul(p).max_abs_diff(p, all));
        vdev[1] = vdev[1].max(p.transpose().max_abs_diff(p, all));
    }

    let check = |identity, cases, max_deviation, informational| RelationCheck {
        identity,
        cases,
        max_deviation,
        informational,
    };
    RelationsReport {
        cutoff,
        checks: vec![
            check(REL_ANNIHILATE_CREATE, words, dev[0], false),
            check(REL_PARTIAL_ISOMETRY, words, dev[1], false),
            check(REL_PARTIAL_ISOMETRY_STAR, words, dev[2], false),
            check(REL_RANGE_IDEMPOTENT, words, dev[3], false),
            check(REL_RANGE_SELF_ADJOINT, words, dev[4], false),
            check(REL_RANGE_SUBPROJECTION, words, dev[5], false),
            check(REL_RANGE_EQUALS_SOURCE, words, gap, true),
            check(REL_VERTEX_IDEMPOTENT, g.vertex_count(), vdev[0], false),
            check(REL_VERTEX_SELF_ADJOINT, g.vertex_count(), vdev[1], false),
        ],
    }
}
