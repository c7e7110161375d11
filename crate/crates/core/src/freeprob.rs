//! Semicircular elements, the generating operator of a bouquet of loops,
//! moment series and R-transforms, freeness scans and the free group factor
//! embedding at a vertex.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::algebra::{AlgebraError, DiagonalElement, Element};
use crate::graph::{EdgeIx, Graph, GraphError, PathWord, VertexIx};
use crate::nc::{self, NcError};
use crate::scalar::Rational;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FreeProbError {
    #[error("edge {0} is not a loop")]
    NotALoop(String),
    #[error("no loops at vertex {0}")]
    NoLoops(String),
    #[error("graph cannot host L(F_{needed}) at vertex {vertex}: only {found} loops")]
    TooFewLoops {
        vertex: String,
        needed: usize,
        found: usize,
    },
    #[error("order must be at least {min}, got {got}")]
    OrderTooSmall { min: usize, got: usize },
    #[error("coefficient of z^{0} is irrational under this scale")]
    Irrational(usize),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Nc(#[from] NcError),
}

/// Scale applied to each generator `L_l + L_l*`.
///
/// The symbolic engine only holds rationals, so `1/√2` is kept aside and
/// applied to series coefficients, where even powers are rational.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scale {
    Rational(Rational),
    InvSqrt2,
}

impl Scale {
    pub fn unit() -> Self {
        Scale::Rational(Rational::one())
    }

    /// `s^n`, or `None` when it is irrational.
    pub fn power(&self, n: usize) -> Option<Rational> {
        match self {
            Scale::Rational(q) => Some(num_traits::pow(q.clone(), n)),
            Scale::InvSqrt2 if n % 2 == 0 => {
                Some(Rational::new(BigInt::one(), num_traits::pow(BigInt::from(2), n / 2)))
            }
            Scale::InvSqrt2 => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scale::Rational(q) => q.to_f64().unwrap_or(f64::NAN),
            Scale::InvSqrt2 => std::f64::consts::FRAC_1_SQRT_2,
        }
    }

    /// The rational the symbolic element is built with; the remaining
    /// factor is applied by [`PowerSeries::rescale`].
    fn symbolic_part(&self) -> Rational {
        match self {
            Scale::Rational(q) => q.clone(),
            Scale::InvSqrt2 => Rational::one(),
        }
    }
}

impl Default for Scale {
    fn default() -> Self {
        Scale::unit()
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scale::Rational(q) => write!(f, "{q}"),
            Scale::InvSqrt2 => write!(f, "1/sqrt(2)"),
        }
    }
}

/// `Σ_{n=1}^{K} a_n z^n`, no constant term.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSeries {
    coeffs: Vec<Rational>,
}

impl PowerSeries {
    pub fn new(coeffs: Vec<Rational>) -> Self {
        PowerSeries { coeffs }
    }

    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    /// Coefficient of `z^n`, zero beyond the order.
    pub fn coeff(&self, n: usize) -> Rational {
        if n == 0 {
            return Rational::zero();
        }
        self.coeffs.get(n - 1).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Substitutes `z -> s z`.
    pub fn rescale(&self, s: &Scale) -> Result<Self, FreeProbError> {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if c.is_zero() {
                    return Ok(Rational::zero());
                }
                s.power(i + 1).map(|p| p * c).ok_or(FreeProbError::Irrational(i + 1))
            })
            .collect::<Result<_, _>>()?;
        Ok(PowerSeries { coeffs })
    }
}

impl fmt::Display for PowerSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let n = i + 1;
            let sign = if c.is_negative() { "-" } else { "+" };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            write!(f, "{} ", c.abs())?;
            if n == 1 {
                write!(f, "z")?;
            } else {
                write!(f, "z^{n}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// The state a moment is taken in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum State {
    /// `tr`, one-vertex graphs only.
    Trace,
    /// The coefficient of `L_v` in `E(·)`.
    Vertex(VertexIx),
}

impl State {
    fn eval(&self, d: &DiagonalElement) -> Result<Rational, FreeProbError> {
        match *self {
            State::Trace => {
                let count = d.graph().vertex_count();
                if count != 1 {
                    return Err(AlgebraError::NotOneVertex(count).into());
                }
                Ok(d.get(d.graph().vertices().next().unwrap()))
            }
            State::Vertex(v) => Ok(d.get(v)),
        }
    }
}

/// Loop edges at `v0`, in graph order.
pub fn loops_at(graph: &Graph, v0: &str) -> Result<Vec<EdgeIx>, FreeProbError> {
    let v = graph.vertex(v0)?;
    Ok(graph
        .edges()
        .filter(|&e| graph.is_loop(e) && graph.edge_source(e) == v)
        .collect())
}

/// `scale · (L_l + L_l*)`.
pub fn semicircular(graph: &Arc<Graph>, l: EdgeIx, scale: &Rational) -> Result<Element, FreeProbError> {
    if !graph.is_loop(l) {
        return Err(FreeProbError::NotALoop(graph.edge_id(l).to_string()));
    }
    let w = graph.path_from_edges(vec![l])?;
    let x = &Element::creation(graph.clone(), w.clone())? + &Element::annihilation(graph.clone(), w)?;
    Ok(x.scale(scale))
}

/// `T = Σ_j scale · (L_{l_j} + L_{l_j}*)` over the loops at `v0`.
pub fn generating_operator(graph: &Arc<Graph>, v0: &str, scale: &Rational) -> Result<Element, FreeProbError> {
    let loops = loops_at(graph, v0)?;
    if loops.is_empty() {
        return Err(FreeProbError::NoLoops(v0.to_string()));
    }
    sum_of_semicirculars(graph, &loops, scale)
}

fn sum_of_semicirculars(graph: &Arc<Graph>, loops: &[EdgeIx], scale: &Rational) -> Result<Element, FreeProbError> {
    let mut t = Element::zero(graph.clone());
    for &l in loops {
        t = &t + &semicircular(graph, l, scale)?;
    }
    Ok(t)
}

/// `E(a^n)` for `n = 1..=order`. Each moment is taken as
/// `E(a^⌈n/2⌉ a^⌊n/2⌋)`, so only half the powers are ever expanded.
pub fn diagonal_moments(a: &Element, order: usize) -> Result<Vec<DiagonalElement>, FreeProbError> {
    if order < 1 {
        return Err(FreeProbError::OrderTooSmall { min: 1, got: order });
    }
    let half = order.div_ceil(2);
    let mut powers = vec![Element::identity(a.graph().clone())];
    for _ in 0..half {
        let next = powers.last().unwrap().multiply(a)?;
        powers.push(next);
    }
    (1..=order)
        .into_par_iter()
        .map(|n| Ok(powers[n.div_ceil(2)].expectation_of_product(&powers[n / 2])?))
        .collect()
}

/// `M_a(z) = Σ φ(a^n) z^n`, exact.
pub fn moment_series(a: &Element, order: usize, state: State) -> Result<PowerSeries, FreeProbError> {
    let coeffs = diagonal_moments(a, order)?
        .iter()
        .map(|d| state.eval(d))
        .collect::<Result<_, _>>()?;
    Ok(PowerSeries::new(coeffs))
}

/// `R_a(z) = Σ k_n(a, ..., a) z^n`, by Möbius inversion of the moments.
pub fn r_transform(a: &Element, order: usize, state: State) -> Result<PowerSeries, FreeProbError> {
    let moments = moment_series(a, order, state)?;
    Ok(PowerSeries::new(nc::moments_to_cumulants(moments.coeffs())?))
}

/// `c_{n/2} N^{n/2}` for even `n`, zero for odd `n`.
pub fn catalan_moment_formula(generators: u64, n: usize) -> Rational {
    if n % 2 == 1 {
        return Rational::zero();
    }
    Rational::from_integer(nc::catalan(n / 2) * num_traits::pow(BigInt::from(generators), n / 2))
}

/// `Σ_{π ∈ NC_2(n)} N^{|π|}`, the pairing count route to the same numbers.
pub fn pairing_sum(generators: u64, n: usize) -> Result<BigInt, FreeProbError> {
    if n % 2 == 1 {
        return Ok(BigInt::zero());
    }
    Ok(nc::enumerate_nc_pairings(n)?
        .iter()
        .map(|p| num_traits::pow(BigInt::from(generators), p.block_count()))
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DistributionComparison {
    pub left: PowerSeries,
    pub right: PowerSeries,
    /// `(n, left k_n, right k_n)` at the first `n` where they differ.
    pub first_disagreement: Option<(usize, Rational, Rational)>,
}

impl DistributionComparison {
    pub fn agree(&self) -> bool {
        self.first_disagreement.is_none()
    }
}

/// Compares R-transforms coefficientwise up to `order`.
pub fn identically_distributed(
    a: (&Element, State),
    b: (&Element, State),
    order: usize,
) -> Result<DistributionComparison, FreeProbError> {
    let left = r_transform(a.0, order, a.1)?;
    let right = r_transform(b.0, order, b.1)?;
    let first_disagreement = (1..=order)
        .find(|&n| left.coeff(n) != right.coeff(n))
        .map(|n| (n, left.coeff(n), right.coeff(n)));
    Ok(DistributionComparison {
        left,
        right,
        first_disagreement,
    })
}

/// A monomial of degree at most two in `L_w` and `L_w*`, with a label in
/// expression syntax.
#[derive(Debug, Clone)]
pub struct ScanMonomial {
    pub label: String,
    pub element: Element,
}

/// Nonzero monomials `L_w, L_w*, L_w L_w, L_w L_w*, L_w* L_w, L_w* L_w*`
/// (the last four only when `max_degree >= 2`).
pub fn scan_monomials(graph: &Arc<Graph>, w: &PathWord, max_degree: usize) -> Result<Vec<ScanMonomial>, FreeProbError> {
    let text = graph.format_word(w);
    let plain = Element::creation(graph.clone(), w.clone())?;
    let star = plain.adjoint();
    let p = format!("L({text})");
    let s = format!("Ls({text})");
    let mut out = vec![
        ScanMonomial {
            label: p.clone(),
            element: plain.clone(),
        },
        ScanMonomial {
            label: s.clone(),
            element: star.clone(),
        },
    ];
    if max_degree >= 2 {
        for (x, lx) in [(&plain, &p), (&star, &s)] {
            for (y, ly) in [(&plain, &p), (&star, &s)] {
                out.push(ScanMonomial {
                    label: format!("{lx}*{ly}"),
                    element: x.multiply(y)?,
                });
            }
        }
    }
    out.retain(|m| !m.element.is_zero());
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct FreenessWitness {
    pub labels: Vec<String>,
    pub value: DiagonalElement,
}

impl FreenessWitness {
    pub fn describe(&self) -> String {
        format!("k{}({})", self.labels.len(), self.labels.join(", "))
    }
}

#[derive(Debug, Clone)]
pub struct FreenessReport {
    pub diagram_distinct: bool,
    pub scan_order: usize,
    /// Highest order at which degree-two monomials were used.
    pub monomial_order: usize,
    pub scanned: usize,
    pub nonvanishing: usize,
    /// First nonvanishing mixed cumulant in scan order.
    pub witness: Option<FreenessWitness>,
}

impl FreenessReport {
    pub fn free_evidence(&self) -> bool {
        self.nonvanishing == 0
    }
}

/// Default for [`FreenessReport::monomial_order`]: degree-two monomials
/// up to order 4, generators alone above that.
pub const DEFAULT_MONOMIAL_ORDER: usize = 4;

/// Scans mixed cumulants of orders `2..=scan_order` whose arguments
/// alternate between the *-algebras of `L_{w1}` and `L_{w2}`.
///
/// Tuples start in the algebra of `w2`, then in that of `w1`; within each
/// order they are listed lexicographically in monomial order.
pub fn freeness_check(
    graph: &Arc<Graph>,
    w1: &PathWord,
    w2: &PathWord,
    scan_order: usize,
    monomial_order: usize,
) -> Result<FreenessReport, FreeProbError> {
    if scan_order < 2 {
        return Err(FreeProbError::OrderTooSmall {
            min: 2,
            got: scan_order,
        });
    }
    let full = [scan_monomials(graph, w1, 2)?, scan_monomials(graph, w2, 2)?];
    let gens = [scan_monomials(graph, w1, 1)?, scan_monomials(graph, w2, 1)?];
    let mut tuples: Vec<Vec<&ScanMonomial>> = Vec::new();
    for n in 2..=scan_order {
        let pool = if n <= monomial_order { &full } else { &gens };
        for start in [1usize, 0] {
            let mut partial: Vec<Vec<&ScanMonomial>> = vec![vec![]];
            for k in 0..n {
                let side = &pool[(start + k) % 2];
                partial = partial
                    .into_iter()
                    .flat_map(|t| {
                        side.iter().map(move |m| {
                            let mut t = t.clone();
                            t.push(m);
                            t
                        })
                    })
                    .collect();
            }
            tuples.extend(partial);
        }
    }
    let values: Vec<DiagonalElement> = tuples
        .par_iter()
        .map(|t| {
            let factors: Vec<Element> = t.iter().map(|m| m.element.clone()).collect();
            nc::mixed_cumulant(&factors)
        })
        .collect::<Result<_, _>>()?;
    let nonvanishing = values.iter().filter(|v| !v.is_zero()).count();
    let witness = tuples.iter().zip(&values).find(|(_, v)| !v.is_zero()).map(|(t, v)| FreenessWitness {
        labels: t.iter().map(|m| m.label.clone()).collect(),
        value: v.clone(),
    });
    Ok(FreenessReport {
        diagram_distinct: graph.diagram_distinct(w1, w2),
        scan_order,
        monomial_order,
        scanned: tuples.len(),
        nonvanishing,
        witness,
    })
}

/// `L_v a L_v`.
pub fn compress_to_vertex(a: &Element, v: VertexIx) -> Result<Element, FreeProbError> {
    if v.index() >= a.graph().vertex_count() {
        return Err(GraphError::ForeignWord.into());
    }
    let p = Element::vertex(a.graph().clone(), v);
    Ok(p.multiply(a)?.multiply(&p)?)
}

#[derive(Debug, Clone)]
pub struct Generator {
    pub edge: EdgeIx,
    pub element: Element,
}

/// One check of `E(T^n) = c_{n/2} N^{n/2} L_{v0}`.
#[derive(Debug, Clone)]
pub struct EmbeddingRow {
    pub n: usize,
    pub expected: DiagonalElement,
    pub actual: DiagonalElement,
}

impl EmbeddingRow {
    pub fn holds(&self) -> bool {
        self.expected == self.actual
    }
}

/// `N` unit-scale semicircular generators on the first `N` loops at a
/// vertex, with the moment checks that identify them with the free group
/// factor generators.
#[derive(Debug, Clone)]
pub struct SemicircularSystem {
    pub graph: Arc<Graph>,
    pub base: VertexIx,
    pub generators: Vec<Generator>,
    pub rows: Vec<EmbeddingRow>,
}

impl SemicircularSystem {
    pub fn generating_operator(&self) -> Element {
        self.generators
            .iter()
            .fold(Element::zero(self.graph.clone()), |t, g| &t + &g.element)
    }

    pub fn verified(&self) -> bool {
        self.rows.iter().all(EmbeddingRow::holds)
    }
}

pub fn embed_free_group_factor(
    graph: &Arc<Graph>,
    v0: &str,
    generators: usize,
    order: usize,
) -> Result<SemicircularSystem, FreeProbError> {
    let base = graph.vertex(v0)?;
    let loops = loops_at(graph, v0)?;
    if generators == 0 || loops.len() < generators {
        return Err(FreeProbError::TooFewLoops {
            vertex: v0.to_string(),
            needed: generators,
            found: loops.len(),
        });
    }
    let one = Rational::one();
    let gens = loops[..generators]
        .iter()
        .map(|&l| {
            Ok(Generator {
                edge: l,
                element: semicircular(graph, l, &one)?,
            })
        })
        .collect::<Result<Vec<_>, FreeProbError>>()?;
    let mut system = SemicircularSystem {
        graph: graph.clone(),
        base,
        generators: gens,
        rows: Vec::new(),
    };
    let t = system.generating_operator();
    system.rows = diagonal_moments(&t, order)?
        .into_iter()
        .enumerate()
        .map(|(i, actual)| {
            let n = i + 1;
            let expected = DiagonalElement::from_values(
                graph.clone(),
                [(base, catalan_moment_formula(generators as u64, n))],
            );
            EmbeddingRow { n, expected, actual }
        })
        .collect();
    Ok(system)
}

/// Builds the generating operator for a scale that may be irrational; the
/// returned series factor must be applied with [`PowerSeries::rescale`].
pub fn scaled_generating_operator(graph: &Arc<Graph>, v0: &str, scale: &Scale) -> Result<(Element, Scale), FreeProbError> {
    let t = generating_operator(graph, v0, &scale.symbolic_part())?;
    let rest = match scale {
        Scale::Rational(_) => Scale::unit(),
        Scale::InvSqrt2 => Scale::InvSqrt2,
    };
    Ok((t, rest))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::FockRep;
    use crate::graph::EdgeSpec;
    use crate::scalar::{approx_eq, int, rational, ABS_TOL, REL_TOL};

    fn bouquet(n: usize) -> Arc<Graph> {
        let names: Vec<String> = (0..n).map(|i| format!("l{}", i + 1)).collect();
        let refs: Vec<&str> = names.iter().map(String::as_str).collect();
        Arc::new(Graph::bouquet("v", &refs).unwrap())
    }

    fn ab() -> Arc<Graph> {
        Arc::new(Graph::bouquet("v", &["a", "b"]).unwrap())
    }

    fn embed_graph() -> Arc<Graph> {
        Arc::new(
            Graph::new(
                ["u", "v0", "w"],
                [
                    EdgeSpec::new("l1", "v0", "v0"),
                    EdgeSpec::new("l2", "v0", "v0"),
                    EdgeSpec::new("e", "u", "v0"),
                    EdgeSpec::new("f", "v0", "w"),
                ],
            )
            .unwrap(),
        )
    }

    fn ints(values: &[i64]) -> Vec<Rational> {
        values.iter().map(|&v| int(v)).collect()
    }

    #[test]
    fn loops_at_filters() {
        let g = ab();
        let names: Vec<&str> = loops_at(&g, "v").unwrap().into_iter().map(|e| g.edge_id(e)).collect();
        assert_eq!(names, ["a", "b"]);
        let g = embed_graph();
        let names: Vec<&str> = loops_at(&g, "v0").unwrap().into_iter().map(|e| g.edge_id(e)).collect();
        assert_eq!(names, ["l1", "l2"]);
        assert!(loops_at(&g, "u").unwrap().is_empty());
        assert!(loops_at(&g, "nope").is_err());
    }

    #[test]
    fn semicircular_signature() {
        let g = ab();
        let v = g.vertex("v").unwrap();
        let a = g.edge("a").unwrap();
        for (s, var) in [(int(1), int(1)), (int(2), int(4)), (rational(1, 3), rational(1, 9))] {
            let x = semicircular(&g, a, &s).unwrap();
            for n in 1..=8 {
                let k = nc::mixed_cumulant(&vec![x.clone(); n]).unwrap();
                let expected = if n == 2 { var.clone() } else { int(0) };
                assert_eq!(k.get(v), expected, "scale {s}, n = {n}");
            }
        }
        let g = embed_graph();
        assert_eq!(
            semicircular(&g, g.edge("e").unwrap(), &int(1)).unwrap_err(),
            FreeProbError::NotALoop("e".into())
        );
    }

    #[test]
    fn generating_operator_examples() {
        let g = ab();
        let t = generating_operator(&g, "v", &int(1)).unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.pow(2).trace().unwrap(), int(2));
        assert_eq!(t.trace().unwrap(), int(0));
        assert!(matches!(
            generating_operator(&embed_graph(), "u", &int(1)),
            Err(FreeProbError::NoLoops(_))
        ));
    }

    #[test]
    fn moment_series_examples() {
        let g = ab();
        let t = generating_operator(&g, "v", &int(1)).unwrap();
        assert_eq!(moment_series(&t, 6, State::Trace).unwrap().coeffs(), ints(&[0, 2, 0, 8, 0, 40]));
        let x = semicircular(&g, g.edge("a").unwrap(), &int(1)).unwrap();
        assert_eq!(moment_series(&x, 6, State::Trace).unwrap().coeffs(), ints(&[0, 1, 0, 2, 0, 5]));
        assert!(moment_series(&Element::zero(g.clone()), 5, State::Trace).unwrap().is_zero());
        assert_eq!(
            moment_series(&t, 0, State::Trace).unwrap_err(),
            FreeProbError::OrderTooSmall { min: 1, got: 0 }
        );
    }

    #[test]
    fn r_transform_examples() {
        let g = bouquet(3);
        let t = generating_operator(&g, "v", &int(1)).unwrap();
        let r = r_transform(&t, 10, State::Trace).unwrap();
        assert_eq!(r.coeffs(), ints(&[0, 3, 0, 0, 0, 0, 0, 0, 0, 0]));
        assert_eq!(r.to_string(), "3 z^2");
        assert!(r_transform(&Element::zero(g.clone()), 4, State::Trace).unwrap().is_zero());
        let x = semicircular(&g, g.edge("l1").unwrap(), &int(1)).unwrap();
        assert_eq!(r_transform(&x, 6, State::Trace).unwrap().to_string(), "1 z^2");
    }

    #[test]
    fn series_display_and_rescale() {
        let s = PowerSeries::new(vec![rational(-1, 2), int(0), int(3)]);
        assert_eq!(s.to_string(), "-1/2 z + 3 z^3");
        assert_eq!(PowerSeries::new(vec![int(1), int(-2)]).to_string(), "1 z - 2 z^2");
        assert_eq!(PowerSeries::new(vec![int(0)]).to_string(), "0");
        let m = PowerSeries::new(ints(&[0, 2, 0, 8]));
        assert_eq!(m.rescale(&Scale::InvSqrt2).unwrap().coeffs(), ints(&[0, 1, 0, 2]));
        assert_eq!(s.rescale(&Scale::InvSqrt2), Err(FreeProbError::Irrational(1)));
        assert_eq!(m.rescale(&Scale::Rational(int(2))).unwrap().coeffs(), ints(&[0, 8, 0, 128]));
    }

    #[test]
    fn catalan_formula_examples() {
        assert_eq!(catalan_moment_formula(2, 2), int(2));
        assert_eq!(catalan_moment_formula(5, 7), int(0));
        assert_eq!(catalan_moment_formula(3, 6), int(135));
        assert_eq!(pairing_sum(3, 6).unwrap(), BigInt::from(135));
    }

    #[test]
    fn three_way_agreement() {
        for n_gen in 1..=3u64 {
            let g = bouquet(n_gen as usize);
            let v = g.vertex("v").unwrap();
            let t = generating_operator(&g, "v", &int(1)).unwrap();
            let symbolic = moment_series(&t, 10, State::Trace).unwrap();
            let fock = FockRep::new(g.clone(), 10).unwrap();
            let numeric = fock.vacuum_moments(&t, 10, v).unwrap();
            for n in 1..=10 {
                let closed = catalan_moment_formula(n_gen, n);
                assert_eq!(symbolic.coeff(n), closed);
                assert_eq!(Rational::from_integer(pairing_sum(n_gen, n).unwrap()), closed);
                assert!(approx_eq(numeric[n - 1], closed.to_f64().unwrap(), REL_TOL, ABS_TOL));
            }
        }
    }

    #[test]
    fn identical_distribution_examples() {
        let g1 = ab();
        let g2 = Arc::new(Graph::bouquet("x", &["p", "q"]).unwrap());
        let t1 = generating_operator(&g1, "v", &int(1)).unwrap();
        let t2 = generating_operator(&g2, "x", &int(1)).unwrap();
        assert!(identically_distributed((&t1, State::Trace), (&t2, State::Trace), 8).unwrap().agree());

        let xa = semicircular(&g1, g1.edge("a").unwrap(), &int(1)).unwrap();
        let xb = semicircular(&g1, g1.edge("b").unwrap(), &int(1)).unwrap();
        assert!(identically_distributed((&xa, State::Trace), (&xb, State::Trace), 8).unwrap().agree());

        let t3 = generating_operator(&bouquet(3), "v", &int(1)).unwrap();
        let c = identically_distributed((&t1, State::Trace), (&t3, State::Trace), 8).unwrap();
        assert_eq!(c.first_disagreement, Some((2, int(2), int(3))));
    }

    #[test]
    fn freeness_of_distinct_loops() {
        let g = ab();
        let a = g.path(&["a"]).unwrap();
        let b = g.path(&["b"]).unwrap();
        let r = freeness_check(&g, &a, &b, 6, DEFAULT_MONOMIAL_ORDER).unwrap();
        assert!(r.diagram_distinct);
        assert!(r.free_evidence());
        assert!(r.scanned > 1000);
    }

    #[test]
    fn nested_words_are_not_free() {
        let g = ab();
        let a = g.path(&["a"]).unwrap();
        let aa = g.path(&["a", "a"]).unwrap();
        let r = freeness_check(&g, &a, &aa, 2, DEFAULT_MONOMIAL_ORDER).unwrap();
        assert!(!r.diagram_distinct);
        let w = r.witness.unwrap();
        assert_eq!(w.describe(), "k2(Ls(a,a), L(a)*L(a))");
        assert_eq!(w.value.get(g.vertex("v").unwrap()), int(1));
        assert_eq!(
            freeness_check(&g, &a, &aa, 1, 4).unwrap_err(),
            FreeProbError::OrderTooSmall { min: 2, got: 1 }
        );
    }

    #[test]
    fn disjoint_edges_are_free() {
        let g = Arc::new(
            Graph::new(
                ["u", "v", "w"],
                [EdgeSpec::new("e1", "u", "v"), EdgeSpec::new("l", "w", "w")],
            )
            .unwrap(),
        );
        let r = freeness_check(&g, &g.path(&["e1"]).unwrap(), &g.path(&["l"]).unwrap(), 4, 4).unwrap();
        assert!(r.diagram_distinct);
        assert!(r.free_evidence());
    }

    #[test]
    fn prefix_sharing_distinct_diagrams_still_couple() {
        // e1 and e1 e2 have different diagrams, but L_{e1 e2}* L_{e1} is a
        // nonzero partial isometry, so the scan finds a mixed cumulant.
        let g = Arc::new(
            Graph::new(
                ["u", "v", "w"],
                [EdgeSpec::new("e1", "u", "v"), EdgeSpec::new("e2", "v", "w")],
            )
            .unwrap(),
        );
        let e1 = g.path(&["e1"]).unwrap();
        let e12 = g.path(&["e1", "e2"]).unwrap();
        let r = freeness_check(&g, &e1, &e12, 4, 4).unwrap();
        assert!(r.diagram_distinct);
        assert!(!r.free_evidence());
    }

    #[test]
    fn embedding_examples() {
        let g = embed_graph();
        let s = embed_free_group_factor(&g, "v0", 2, 8).unwrap();
        assert!(s.verified());
        let v0 = g.vertex("v0").unwrap();
        assert_eq!(s.rows[3].actual.get(v0), int(8));
        assert_eq!(s.rows[3].actual.support().len(), 1);

        let g1 = Arc::new(Graph::new(["p", "q"], [EdgeSpec::new("l", "q", "q"), EdgeSpec::new("e", "p", "q")]).unwrap());
        let s = embed_free_group_factor(&g1, "q", 1, 2).unwrap();
        assert_eq!(s.rows[1].actual.get(g1.vertex("q").unwrap()), int(1));
        assert!(matches!(
            embed_free_group_factor(&g1, "q", 2, 2),
            Err(FreeProbError::TooFewLoops { needed: 2, found: 1, .. })
        ));
    }

    #[test]
    fn compression_examples() {
        let g = embed_graph();
        let v0 = g.vertex("v0").unwrap();
        let x = semicircular(&g, g.edge("l1").unwrap(), &int(1)).unwrap();
        for k in 1..=6 {
            assert_eq!(compress_to_vertex(&x.pow(k), v0).unwrap(), x.pow(k));
        }
        let e = Element::creation(g.clone(), g.path(&["e"]).unwrap()).unwrap();
        assert!(compress_to_vertex(&e, g.vertex("u").unwrap()).unwrap().is_zero());
        let p = Element::vertex(g.clone(), v0);
        assert_eq!(compress_to_vertex(&p, v0).unwrap(), p);
    }

    #[test]
    fn system_generators_are_free() {
        let g = embed_graph();
        let s = embed_free_group_factor(&g, "v0", 2, 2).unwrap();
        let x1 = &s.generators[0].element;
        let x2 = &s.generators[1].element;
        for n in 2..=6 {
            for mask in 0u32..(1 << n) {
                let factors: Vec<Element> = (0..n)
                    .map(|i| if mask >> i & 1 == 1 { x2.clone() } else { x1.clone() })
                    .collect();
                if mask == 0 || mask == (1 << n) - 1 {
                    continue;
                }
                assert!(nc::mixed_cumulant(&factors).unwrap().is_zero(), "n = {n}, mask = {mask:b}");
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn word(max: usize) -> impl Strategy<Value = Vec<bool>> {
            proptest::collection::vec(any::<bool>(), 0..=max)
        }

        fn product(gens: &[Element; 2], w: &[bool], g: &Arc<Graph>) -> Element {
            w.iter().fold(Element::identity(g.clone()), |acc, &b| &acc * &gens[b as usize])
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn trace_is_tracial_on_generators(p in word(6), split in 0usize..=6) {
                let g = ab();
                let gens = [
                    semicircular(&g, g.edge("a").unwrap(), &int(1)).unwrap(),
                    semicircular(&g, g.edge("b").unwrap(), &int(1)).unwrap(),
                ];
                let split = split.min(p.len());
                let x = product(&gens, &p[..split], &g);
                let y = product(&gens, &p[split..], &g);
                prop_assert_eq!((&x * &y).trace().unwrap(), (&y * &x).trace().unwrap());
            }

            #[test]
            fn embedded_words_live_at_base(w in proptest::collection::vec(any::<bool>(), 1..=6)) {
                let g = embed_graph();
                let s = embed_free_group_factor(&g, "v0", 2, 1).unwrap();
                let gens = [s.generators[0].element.clone(), s.generators[1].element.clone()];
                let e = product(&gens, &w, &g).expectation();
                prop_assert!(e.support().iter().all(|&v| v == s.base));
            }
        }
    }
}
