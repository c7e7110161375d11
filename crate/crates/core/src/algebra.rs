//! Creation and annihilation operators on a graph path space, kept in normal
//! form.
//!
//! Every element is a finite sum `Σ c · L_u L_w*` over pairs of words with a
//! common range. Products reduce by comparing the inner pair of words:
//!
//! ```text
//! (L_a L_b*)(L_c L_d*) = L_{a·h} L_d*   if c = b·h
//!                      = L_a L_{d·h}*   if b = c·h
//!                      = 0              otherwise
//! ```
//!
//! The family is closed under multiplication, so equality of elements is
//! equality of their term maps.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use thiserror::Error;

use crate::graph::{join, Graph, GraphError, PathWord, VertexIx};
use crate::scalar::{Coeff, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgebraError {
    #[error("monomial L_{create} L_{annihilate}* has mismatched ranges")]
    EndpointMismatch { create: String, annihilate: String },
    #[error("operands live on different graphs")]
    GraphMismatch,
    #[error("{coeffs} coefficients for {elements} elements")]
    LengthMismatch { coeffs: usize, elements: usize },
    #[error("trace needs a one-vertex graph, this one has {0} vertices")]
    NotOneVertex(usize),
    #[error("support is only defined for pure expansions; found L_{0}")]
    NonPure(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Whether a support word enters as `L_w` or `L_w*`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Flavor {
    Plain,
    Starred,
}

/// One term `coeff · L_create L_annihilate*`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial<C = Rational> {
    pub coeff: C,
    pub create: PathWord,
    pub annihilate: PathWord,
}

/// Vertex part and path part of the support of a pure expansion.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Support {
    pub vertex_part: BTreeSet<VertexIx>,
    pub path_part: BTreeSet<(PathWord, Flavor)>,
}

type Key = (PathWord, PathWord);

#[derive(Clone)]
pub struct Element<C = Rational> {
    graph: Arc<Graph>,
    terms: BTreeMap<Key, C>,
}

/// An element of the diagonal subalgebra: `Σ c_v L_v`.
#[derive(Clone)]
pub struct DiagonalElement<C = Rational> {
    graph: Arc<Graph>,
    values: BTreeMap<VertexIx, C>,
}

fn same_graph(a: &Arc<Graph>, b: &Arc<Graph>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

fn mul_words(g: &Graph, left: &Key, right: &Key) -> Option<Key> {
    let (a, b) = left;
    let (c, d) = right;
    if let Some(h) = g.strip_prefix(b, c) {
        return Some((join(a, &h), d.clone()));
    }
    if let Some(h) = g.strip_prefix(c, b) {
        return Some((a.clone(), join(d, &h)));
    }
    None
}

fn accumulate<C: Coeff>(terms: &mut BTreeMap<Key, C>, key: Key, c: C) {
    match terms.get_mut(&key) {
        Some(existing) => {
            let sum = existing.clone() + c;
            if sum.is_zero() {
                terms.remove(&key);
            } else {
                *existing = sum;
            }
        }
        None => {
            if !c.is_zero() {
                terms.insert(key, c);
            }
        }
    }
}

impl<C: Coeff> Element<C> {
    pub fn zero(graph: Arc<Graph>) -> Self {
        Element {
            graph,
            terms: BTreeMap::new(),
        }
    }

    /// `Σ_v L_v`, the unit.
    pub fn identity(graph: Arc<Graph>) -> Self {
        let terms = graph
            .vertices()
            .map(|v| ((PathWord::Vertex(v), PathWord::Vertex(v)), C::one()))
            .collect();
        Element { graph, terms }
    }

    pub fn vertex(graph: Arc<Graph>, v: VertexIx) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((PathWord::Vertex(v), PathWord::Vertex(v)), C::one());
        Element { graph, terms }
    }

    /// `L_w`; for a vertex unit this is the projection `L_v`.
    pub fn creation(graph: Arc<Graph>, w: PathWord) -> Result<Self, AlgebraError> {
        if !graph.contains(&w) {
            return Err(GraphError::ForeignWord.into());
        }
        let r = PathWord::Vertex(graph.range(&w));
        let mut terms = BTreeMap::new();
        terms.insert((w, r), C::one());
        Ok(Element { graph, terms })
    }

    /// `L_w*`.
    pub fn annihilation(graph: Arc<Graph>, w: PathWord) -> Result<Self, AlgebraError> {
        Ok(Self::creation(graph, w)?.adjoint())
    }

    pub fn from_monomials(
        graph: Arc<Graph>,
        monomials: impl IntoIterator<Item = (C, PathWord, PathWord)>,
    ) -> Result<Self, AlgebraError> {
        let mut terms = BTreeMap::new();
        for (c, u, w) in monomials {
            if !graph.contains(&u) || !graph.contains(&w) {
                return Err(GraphError::ForeignWord.into());
            }
            if graph.range(&u) != graph.range(&w) {
                return Err(AlgebraError::EndpointMismatch {
                    create: graph.format_word(&u),
                    annihilate: graph.format_word(&w),
                });
            }
            accumulate(&mut terms, (u, w), c);
        }
        Ok(Element { graph, terms })
    }

    pub fn from_diagonal(d: &DiagonalElement<C>) -> Self {
        let terms = d
            .values
            .iter()
            .map(|(&v, c)| ((PathWord::Vertex(v), PathWord::Vertex(v)), c.clone()))
            .collect();
        Element {
            graph: d.graph.clone(),
            terms,
        }
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&PathWord, &PathWord, &C)> {
        self.terms.iter().map(|((u, w), c)| (u, w, c))
    }

    pub fn monomials(&self) -> Vec<Monomial<C>> {
        self.terms()
            .map(|(u, w, c)| Monomial {
                coeff: c.clone(),
                create: u.clone(),
                annihilate: w.clone(),
            })
            .collect()
    }

    pub fn coeff(&self, create: &PathWord, annihilate: &PathWord) -> C {
        self.terms
            .get(&(create.clone(), annihilate.clone()))
            .cloned()
            .unwrap_or_else(C::zero)
    }

    /// Longest creation word among the terms; bounds how far one application
    /// can climb in the Fock basis.
    pub fn max_creation_len(&self) -> usize {
        self.terms.keys().map(|(u, _)| u.len()).max().unwrap_or(0)
    }

    fn ensure_same_graph(&self, other: &Self) -> Result<(), AlgebraError> {
        if same_graph(&self.graph, &other.graph) {
            Ok(())
        } else {
            Err(AlgebraError::GraphMismatch)
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.ensure_same_graph(other)?;
        let mut terms = self.terms.clone();
        for (k, c) in &other.terms {
            accumulate(&mut terms, k.clone(), c.clone());
        }
        Ok(Element {
            graph: self.graph.clone(),
            terms,
        })
    }

    pub fn scale(&self, c: &C) -> Self {
        let terms = self
            .terms
            .iter()
            .filter_map(|(k, x)| {
                let y = c.clone() * x.clone();
                (!y.is_zero()).then(|| (k.clone(), y))
            })
            .collect();
        Element {
            graph: self.graph.clone(),
            terms,
        }
    }

    pub fn multiply(&self, other: &Self) -> Result<Self, AlgebraError> {
        self.ensure_same_graph(other)?;
        let g = &*self.graph;
        let mut terms = BTreeMap::new();
        for (left, x) in &self.terms {
            for (right, y) in &other.terms {
                if let Some(key) = mul_words(g, left, right) {
                    accumulate(&mut terms, key, x.clone() * y.clone());
                }
            }
        }
        Ok(Element {
            graph: self.graph.clone(),
            terms,
        })
    }

    /// `self^n`, with `self^0` the unit.
    pub fn pow(&self, n: u32) -> Self {
        let mut acc = Element::identity(self.graph.clone());
        for _ in 0..n {
            acc = acc.multiply(self).expect("same graph");
        }
        acc
    }

    pub fn adjoint(&self) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|((u, w), c)| ((w.clone(), u.clone()), c.conj()))
            .collect();
        Element {
            graph: self.graph.clone(),
            terms,
        }
    }

    pub fn linear_combine(coeffs: &[C], elements: &[Self]) -> Result<Self, AlgebraError> {
        if coeffs.len() != elements.len() {
            return Err(AlgebraError::LengthMismatch {
                coeffs: coeffs.len(),
                elements: elements.len(),
            });
        }
        let Some(first) = elements.first() else {
            return Err(AlgebraError::LengthMismatch {
                coeffs: 0,
                elements: 0,
            });
        };
        let mut acc = Element::zero(first.graph.clone());
        for (c, x) in coeffs.iter().zip(elements) {
            acc = acc.try_add(&x.scale(c))?;
        }
        Ok(acc)
    }

    /// Conditional expectation onto the diagonal: keeps the vertex-projection
    /// terms. This agrees with the vacuum pairing `Σ_v <a ξ_v, ξ_v> L_v`.
    pub fn expectation(&self) -> DiagonalElement<C> {
        let values = self
            .terms
            .iter()
            .filter_map(|((u, w), c)| match (u, w) {
                (PathWord::Vertex(x), PathWord::Vertex(y)) if x == y => Some((*x, c.clone())),
                _ => None,
            })
            .collect();
        DiagonalElement {
            graph: self.graph.clone(),
            values,
        }
    }

    /// `E(self · other)` without forming the full product: only the pairs
    /// `(L_v L_x*)(L_x L_v*)` reduce to a vertex projection.
    pub fn expectation_of_product(&self, other: &Self) -> Result<DiagonalElement<C>, AlgebraError> {
        self.ensure_same_graph(other)?;
        let mut values: BTreeMap<VertexIx, C> = BTreeMap::new();
        for ((u, x), c) in &self.terms {
            let PathWord::Vertex(v) = u else { continue };
            if let Some(d) = other.terms.get(&(x.clone(), u.clone())) {
                let entry = values.entry(*v).or_insert_with(C::zero);
                *entry = entry.clone() + c.clone() * d.clone();
            }
        }
        values.retain(|_, c| !c.is_zero());
        Ok(DiagonalElement {
            graph: self.graph.clone(),
            values,
        })
    }

    /// Scalar expectation on a one-vertex graph.
    pub fn trace(&self) -> Result<C, AlgebraError> {
        if self.graph.vertex_count() != 1 {
            return Err(AlgebraError::NotOneVertex(self.graph.vertex_count()));
        }
        Ok(self.expectation().values.into_values().next().unwrap_or_else(C::zero))
    }

    pub fn support(&self) -> Result<Support, AlgebraError> {
        let mut support = Support::default();
        for (u, w) in self.terms.keys() {
            match (u, w) {
                (PathWord::Vertex(x), PathWord::Vertex(_)) => {
                    support.vertex_part.insert(*x);
                }
                (PathWord::Path(_), PathWord::Vertex(_)) => {
                    support.path_part.insert((u.clone(), Flavor::Plain));
                }
                (PathWord::Vertex(_), PathWord::Path(_)) => {
                    support.path_part.insert((w.clone(), Flavor::Starred));
                }
                (PathWord::Path(_), PathWord::Path(_)) => {
                    return Err(AlgebraError::NonPure(format!(
                        "{{{}}} L_{{{}}}*",
                        self.graph.format_word(u),
                        self.graph.format_word(w)
                    )));
                }
            }
        }
        Ok(support)
    }

    /// `self · ξ_h` expanded in the basis `{ξ_w}`.
    pub fn apply_to_basis(&self, h: &PathWord) -> Result<BTreeMap<PathWord, C>, AlgebraError> {
        if !self.graph.contains(h) {
            return Err(GraphError::ForeignWord.into());
        }
        let g = &*self.graph;
        let mut out: BTreeMap<PathWord, C> = BTreeMap::new();
        for ((u, w), c) in &self.terms {
            if let Some(rest) = g.strip_prefix(w, h) {
                let target = join(u, &rest);
                let entry = out.entry(target).or_insert_with(C::zero);
                *entry = entry.clone() + c.clone();
            }
        }
        out.retain(|_, c| !c.is_zero());
        Ok(out)
    }

    /// Applies `self` to a finitely supported vector.
    pub fn apply_to_vector(
        &self,
        vector: &BTreeMap<PathWord, C>,
    ) -> Result<BTreeMap<PathWord, C>, AlgebraError> {
        let mut out: BTreeMap<PathWord, C> = BTreeMap::new();
        for (h, x) in vector {
            for (target, y) in self.apply_to_basis(h)? {
                let entry = out.entry(target).or_insert_with(C::zero);
                *entry = entry.clone() + x.clone() * y;
            }
        }
        out.retain(|_, c| !c.is_zero());
        Ok(out)
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Element<D> {
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            let d = f(c);
            if !d.is_zero() {
                terms.insert(k.clone(), d);
            }
        }
        Element {
            graph: self.graph.clone(),
            terms,
        }
    }
}

impl<C: Coeff> PartialEq for Element<C> {
    fn eq(&self, other: &Self) -> bool {
        same_graph(&self.graph, &other.graph) && self.terms == other.terms
    }
}

impl<C: Coeff> fmt::Debug for Element<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Element({self})")
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, g: &Graph, u: &PathWord, w: &PathWord) -> fmt::Result {
    let mut factors: Vec<String> = Vec::new();
    if let (PathWord::Vertex(x), PathWord::Vertex(_)) = (u, w) {
        return write!(f, "V({})", g.vertex_id(*x));
    }
    factors.extend(u.edges().iter().map(|&e| format!("L({})", g.edge_id(e))));
    factors.extend(w.edges().iter().rev().map(|&e| format!("Ls({})", g.edge_id(e))));
    write!(f, "{}", factors.join("*"))
}

/// Prints in the operator-expression syntax understood by the CLI parser:
/// `3/2*V(v) - Ls(b) + L(a)*L(b)`.
impl<C: Coeff> fmt::Display for Element<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, ((u, w), c)) in self.terms.iter().enumerate() {
            let text = c.to_string();
            let (negative, magnitude) = match text.strip_prefix('-') {
                Some(rest) if i > 0 => (true, rest.to_string()),
                _ => (false, text),
            };
            if i > 0 {
                write!(f, " {} ", if negative { '-' } else { '+' })?;
            }
            if magnitude != "1" {
                write!(f, "{magnitude}*")?;
            }
            write_monomial(f, &self.graph, u, w)?;
        }
        Ok(())
    }
}

impl<C: Coeff> Add for &Element<C> {
    type Output = Element<C>;

    /// Panics when the operands live on different graphs; use
    /// [`Element::try_add`] to get an error instead.
    fn add(self, rhs: Self) -> Element<C> {
        self.try_add(rhs).expect("operands on different graphs")
    }
}

impl<C: Coeff> Sub for &Element<C> {
    type Output = Element<C>;

    fn sub(self, rhs: Self) -> Element<C> {
        self.try_add(&-rhs).expect("operands on different graphs")
    }
}

impl<C: Coeff> Mul for &Element<C> {
    type Output = Element<C>;

    fn mul(self, rhs: Self) -> Element<C> {
        self.multiply(rhs).expect("operands on different graphs")
    }
}

impl<C: Coeff> Neg for &Element<C> {
    type Output = Element<C>;

    fn neg(self) -> Element<C> {
        self.scale(&-C::one())
    }
}

impl<C: Coeff> DiagonalElement<C> {
    pub fn zero(graph: Arc<Graph>) -> Self {
        DiagonalElement {
            graph,
            values: BTreeMap::new(),
        }
    }

    pub fn from_values(graph: Arc<Graph>, values: impl IntoIterator<Item = (VertexIx, C)>) -> Self {
        let mut d = DiagonalElement::zero(graph);
        for (v, c) in values {
            let entry = d.values.entry(v).or_insert_with(C::zero);
            *entry = entry.clone() + c;
        }
        d.values.retain(|_, c| !c.is_zero());
        d
    }

    pub fn graph(&self) -> &Arc<Graph> {
        &self.graph
    }

    pub fn get(&self, v: VertexIx) -> C {
        self.values.get(&v).cloned().unwrap_or_else(C::zero)
    }

    pub fn iter(&self) -> impl Iterator<Item = (VertexIx, &C)> {
        self.values.iter().map(|(&v, c)| (v, c))
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn support(&self) -> BTreeSet<VertexIx> {
        self.values.keys().copied().collect()
    }

    /// Pointwise product; the diagonal algebra is commutative.
    pub fn mul(&self, other: &Self) -> Self {
        let values = self
            .values
            .iter()
            .filter_map(|(v, x)| {
                let y = other.values.get(v)?;
                let p = x.clone() * y.clone();
                (!p.is_zero()).then_some((*v, p))
            })
            .collect();
        DiagonalElement {
            graph: self.graph.clone(),
            values,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        DiagonalElement::from_values(
            self.graph.clone(),
            self.values
                .iter()
                .chain(other.values.iter())
                .map(|(v, c)| (*v, c.clone())),
        )
    }

    pub fn scale(&self, c: &C) -> Self {
        DiagonalElement::from_values(
            self.graph.clone(),
            self.values.iter().map(|(v, x)| (*v, c.clone() * x.clone())),
        )
    }

    pub fn to_element(&self) -> Element<C> {
        Element::from_diagonal(self)
    }
}

impl<C: Coeff> PartialEq for DiagonalElement<C> {
    fn eq(&self, other: &Self) -> bool {
        same_graph(&self.graph, &other.graph) && self.values == other.values
    }
}

impl<C: Coeff> fmt::Debug for DiagonalElement<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Diagonal({self})")
    }
}

impl<C: Coeff> fmt::Display for DiagonalElement<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_element(), f)
    }
}
