use std::sync::Arc;

use gwp_core::fock::{exact_cutoff, FockError};
use gwp_core::freeprob::{self, PowerSeries, Scale, State};
use gwp_core::nc;
use gwp_core::scalar::{approx_eq, parse_rational, RealCoeff, ABS_TOL, REL_TOL};
use gwp_core::{DiagonalElement, Element, FockRep, Graph, Rational, VertexIx};
use num_traits::Zero;

use crate::expr::parse_element_expr;
use crate::graph_file::parse_graph_file;
use crate::report::{Report, Row};
use crate::{CliError, Command, Common, Mode, ScaleArgs, SeriesArgs};

const PAPER_NORMALIZATION_NOTE: &str = "generators scaled by 1/sqrt(2): moments are 2^{-n/2} times the unit-scale values c_{n/2} N^{n/2}, and k2 = N/2";

pub fn execute(command: &Command, echo: String) -> Result<Report, CliError> {
    match command {
        Command::Moments(a) => series(a, echo, SeriesKind::Moments),
        Command::Cumulants(a) => series(a, echo, SeriesKind::Cumulants),
        Command::Rtransform(a) => series(a, echo, SeriesKind::RTransform),
        Command::VerifyCatalan {
            common,
            scale,
            max_order,
        } => verify_catalan(common, scale, *max_order, echo),
        Command::Freeness {
            common,
            w1,
            w2,
            scan_order,
            monomial_order,
        } => freeness(common, w1, w2, *scan_order, *monomial_order, echo),
        Command::Relations { common, cutoff } => relations(common, *cutoff, echo),
        Command::EmbedCheck {
            common,
            generators,
            max_order,
        } => embed_check(common, *generators, *max_order, echo),
    }
}

fn compute(e: impl std::fmt::Display) -> CliError {
    CliError::Compute(e.to_string())
}

fn load_graph(common: &Common) -> Result<Arc<Graph>, CliError> {
    parse_graph_file(&common.graph).map(Arc::new)
}

fn base_vertex(graph: &Graph, common: &Common) -> Result<VertexIx, CliError> {
    match &common.vertex {
        Some(id) => graph.vertex(id).map_err(|e| CliError::Input(e.to_string())),
        None if graph.vertex_count() == 1 => Ok(graph.vertices().next().unwrap()),
        None => Err(CliError::Usage(
            "--vertex is required on graphs with more than one vertex".into(),
        )),
    }
}

fn resolve_scale(args: &ScaleArgs) -> Result<Scale, CliError> {
    if args.paper_normalization {
        return Ok(Scale::InvSqrt2);
    }
    match &args.scale {
        None => Ok(Scale::unit()),
        Some(text) => parse_rational(text)
            .map(Scale::Rational)
            .ok_or_else(|| CliError::Usage(format!("--scale expects a rational, got `{text}`"))),
    }
}

fn check_order(order: usize) -> Result<(), CliError> {
    if order == 0 || order > nc::MAX_NC_SIZE {
        return Err(CliError::Usage(format!(
            "order must be in 1..={}, got {order}",
            nc::MAX_NC_SIZE
        )));
    }
    Ok(())
}

/// The operator a series command works on.
struct Target {
    element: Element,
    /// Scale factor not carried by `element`.
    rest: Scale,
    /// Number of loops when the target is the generating operator.
    loops: Option<usize>,
    scale: Scale,
}

fn target(args: &SeriesArgs, graph: &Arc<Graph>, v: VertexIx) -> Result<Target, CliError> {
    if let Some(text) = &args.expr {
        let element = parse_element_expr(text, graph).map_err(|e| CliError::Input(e.to_string()))?;
        return Ok(Target {
            element,
            rest: Scale::unit(),
            loops: None,
            scale: Scale::unit(),
        });
    }
    let scale = resolve_scale(&args.scale)?;
    generating_target(graph, v, scale)
}

fn generating_target(graph: &Arc<Graph>, v: VertexIx, scale: Scale) -> Result<Target, CliError> {
    let id = graph.vertex_id(v);
    let (element, rest) = freeprob::scaled_generating_operator(graph, id, &scale).map_err(compute)?;
    let loops = freeprob::loops_at(graph, id).map_err(compute)?.len();
    Ok(Target {
        element,
        rest,
        loops: Some(loops),
        scale,
    })
}

/// Exact moments, or `None` (with a warning) when the scale makes one of
/// them irrational.
fn exact_moments(t: &Target, order: usize, v: VertexIx, report: &mut Report) -> Result<Option<PowerSeries>, CliError> {
    let m = freeprob::moment_series(&t.element, order, State::Vertex(v)).map_err(compute)?;
    match m.rescale(&t.rest) {
        Ok(m) => Ok(Some(m)),
        Err(e) => {
            report.warnings.push(format!("exact values unavailable: {e}"));
            Ok(None)
        }
    }
}

/// Vacuum moments on the Fock space truncated at the exactness cutoff.
fn numeric_moments(
    graph: &Arc<Graph>,
    t: &Target,
    order: usize,
    v: VertexIx,
    mode: Mode,
    report: &mut Report,
) -> Result<Option<Vec<f64>>, CliError> {
    if !mode.numeric() {
        return Ok(None);
    }
    let s = t.rest.to_f64();
    let a = t.element.map_coeffs(|q| q.to_f64() * s);
    let cutoff = exact_cutoff(order, a.max_creation_len());
    let fock = match FockRep::new(graph.clone(), cutoff) {
        Ok(f) => f,
        Err(e @ FockError::BasisTooLarge { .. }) if mode == Mode::Both => {
            report.warnings.push(format!("numeric path skipped: {e}"));
            return Ok(None);
        }
        Err(e) => return Err(compute(e)),
    };
    fock.vacuum_moments(&a, order, v).map(Some).map_err(compute)
}

fn close(exact: Option<&Rational>, numeric: Option<f64>, abs_floor: f64) -> bool {
    match (exact, numeric) {
        (Some(q), Some(x)) => approx_eq(x, q.to_f64(), REL_TOL, abs_floor),
        _ => true,
    }
}

fn diag_text(d: &DiagonalElement) -> String {
    if d.graph().vertex_count() == 1 {
        d.get(d.graph().vertices().next().unwrap()).to_string()
    } else {
        d.to_string()
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum SeriesKind {
    Moments,
    Cumulants,
    RTransform,
}

fn series(args: &SeriesArgs, echo: String, kind: SeriesKind) -> Result<Report, CliError> {
    let common = &args.common;
    check_order(args.order)?;
    let graph = load_graph(common)?;
    let v = base_vertex(&graph, common)?;
    let t = target(args, &graph, v)?;
    let order = args.order;
    let mut report = Report::new(echo, common.mode.name());
    if t.scale == Scale::InvSqrt2 {
        report.warnings.push(PAPER_NORMALIZATION_NOTE.into());
    }
    let exact_m = if common.mode.symbolic() {
        exact_moments(&t, order, v, &mut report)?
    } else {
        None
    };
    let numeric_m = numeric_moments(&graph, &t, order, v, common.mode, &mut report)?;

    let label = |n: usize| match kind {
        SeriesKind::Moments => format!("m{n}"),
        SeriesKind::Cumulants => format!("k{n}"),
        SeriesKind::RTransform => format!("z^{n}"),
    };
    let (exact, numeric): (Option<Vec<Rational>>, Option<Vec<f64>>) = match kind {
        SeriesKind::Moments => (exact_m.map(|m| m.coeffs().to_vec()), numeric_m.clone()),
        _ => (
            exact_m
                .map(|m| nc::moments_to_cumulants(m.coeffs()))
                .transpose()
                .map_err(compute)?,
            numeric_m
                .as_deref()
                .map(nc::moments_to_cumulants::<f64>)
                .transpose()
                .map_err(compute)?,
        ),
    };
    // Cumulants come from alternating sums of moments, so their absolute
    // error scales with the largest moment involved.
    let floor = |n: usize| match (&numeric_m, kind) {
        (Some(m), SeriesKind::Cumulants | SeriesKind::RTransform) => m[..n]
            .iter()
            .fold(ABS_TOL, |acc, x| acc.max(REL_TOL * x.abs())),
        _ => ABS_TOL,
    };
    // For the generating operator, R(z) = s^2 N z^2.
    let expected_r = match (kind, t.loops, t.scale.power(2)) {
        (SeriesKind::RTransform, Some(n_loops), Some(s2)) => {
            Some(s2 * Rational::from_integer(n_loops.into()))
        }
        _ => None,
    };
    for n in 1..=order {
        let e = exact.as_ref().map(|c| &c[n - 1]);
        let x = numeric.as_ref().map(|c| c[n - 1]);
        let mut ok = close(e, x, floor(n));
        if let Some(k2) = &expected_r {
            let want = if n == 2 { k2.clone() } else { Rational::zero() };
            ok &= e.is_none_or(|e| *e == want);
            ok &= x.is_none_or(|x| approx_eq(x, want.to_f64(), REL_TOL, floor(n)));
        }
        let mut row = Row::new(label(n)).numeric(x).verified(ok);
        if let Some(e) = e {
            row = row.exact(e);
        }
        report.rows.push(row);
    }
    let what = if args.expr.is_some() { "a" } else { "T" };
    let vid = graph.vertex_id(v);
    match kind {
        SeriesKind::Moments => report
            .verdicts
            .push(format!("moments of {what} at vertex {vid} up to order {order}")),
        SeriesKind::Cumulants => report
            .verdicts
            .push(format!("free cumulants of {what} at vertex {vid} up to order {order}")),
        SeriesKind::RTransform => {
            if let Some(c) = &exact {
                report
                    .verdicts
                    .push(format!("R(z) = {}", PowerSeries::new(c.clone())));
            }
            if let Some(k2) = &expected_r {
                let expected = PowerSeries::new(vec![Rational::zero(), k2.clone()]);
                let holds = report.all_verified();
                report.verdicts.push(format!(
                    "{} R_T(z) = {expected}",
                    if holds { "matches" } else { "does not match" }
                ));
            }
        }
    }
    Ok(report)
}

fn verify_catalan(common: &Common, scale: &ScaleArgs, max_order: usize, echo: String) -> Result<Report, CliError> {
    check_order(max_order)?;
    let graph = load_graph(common)?;
    let v = base_vertex(&graph, common)?;
    let t = generating_target(&graph, v, resolve_scale(scale)?)?;
    let n_loops = t.loops.unwrap_or(0) as u64;
    let mut report = Report::new(echo, common.mode.name());
    if t.scale == Scale::InvSqrt2 {
        report.warnings.push(PAPER_NORMALIZATION_NOTE.into());
    }
    let exact = if common.mode.symbolic() {
        exact_moments(&t, max_order, v, &mut report)?
    } else {
        None
    };
    let numeric = numeric_moments(&graph, &t, max_order, v, common.mode, &mut report)?;
    let scaled = |q: Rational, n: usize| -> Option<Rational> {
        if q.is_zero() {
            Some(q)
        } else {
            t.scale.power(n).map(|s| s * q)
        }
    };
    let label = if graph.vertex_count() == 1 { "tr" } else { "E" };
    let mut failures = Vec::new();
    for n in 1..=max_order {
        let closed = scaled(freeprob::catalan_moment_formula(n_loops, n), n)
            .ok_or_else(|| compute("closed form is irrational at this scale"))?;
        let pairs = freeprob::pairing_sum(n_loops, n).map_err(compute)?;
        let pairs = scaled(Rational::from_integer(pairs), n).unwrap_or_else(|| closed.clone());
        let e = exact.as_ref().map(|m| m.coeff(n));
        let x = numeric.as_ref().map(|m| m[n - 1]);
        let ok = pairs == closed
            && e.as_ref().is_none_or(|e| *e == closed)
            && close(Some(&closed), x, ABS_TOL);
        if !ok {
            failures.push(n);
        }
        let mut row = Row::new(format!("{label}(T^{n})")).numeric(x).verified(ok);
        row = row.exact(e.unwrap_or(closed));
        report.rows.push(row);
    }
    let vid = graph.vertex_id(v);
    if failures.is_empty() {
        report.verdicts.push(format!(
            "{label}(T^n) = c_(n/2) N^(n/2) for n <= {max_order} at vertex {vid} with N = {n_loops}"
        ));
    } else {
        report
            .verdicts
            .push(format!("Catalan moment law fails at n = {failures:?}"));
    }
    Ok(report)
}

fn freeness(
    common: &Common,
    w1: &str,
    w2: &str,
    scan_order: usize,
    monomial_order: usize,
    echo: String,
) -> Result<Report, CliError> {
    if !(2..=8).contains(&scan_order) {
        return Err(CliError::Usage(format!("--scan-order must be in 2..=8, got {scan_order}")));
    }
    let graph = load_graph(common)?;
    let word = |text: &str| graph.parse_word(text).map_err(|e| CliError::Input(format!("{text}: {e}")));
    let (p1, p2) = (word(w1)?, word(w2)?);
    let r = freeprob::freeness_check(&graph, &p1, &p2, scan_order, monomial_order).map_err(compute)?;
    let mut report = Report::new(echo, Mode::Symbolic.name());
    if common.mode == Mode::Numeric {
        report
            .warnings
            .push("freeness is checked symbolically only; --mode numeric ignored".into());
    }
    report
        .rows
        .push(Row::new("diagram-distinct").exact(r.diagram_distinct));
    report.rows.push(Row::new("scanned").exact(r.scanned));
    report
        .rows
        .push(Row::new("nonvanishing").exact(r.nonvanishing).verified(r.free_evidence()));
    let distinct = if r.diagram_distinct {
        "diagram-distinct"
    } else {
        "not diagram-distinct"
    };
    match &r.witness {
        None => report.verdicts.push(format!(
            "{distinct}; free evidence: all {} mixed cumulants up to order {scan_order} vanish",
            r.scanned
        )),
        Some(w) => {
            let value = diag_text(&w.value);
            report.rows.push(Row::new(w.describe()).exact(&value).verified(false));
            report
                .verdicts
                .push(format!("{distinct}; witness k{} = {value}", w.labels.len()));
        }
    }
    if r.diagram_distinct && r.witness.is_some() {
        report.warnings.push(
            "the words are diagram-distinct but one is a prefix-compatible extension of the other, so their generators are not free"
                .into(),
        );
    }
    if !r.diagram_distinct && r.witness.is_none() {
        report.warnings.push(format!(
            "no witness found for overlapping diagrams; degree-two monomials were scanned up to order {monomial_order}"
        ));
    }
    Ok(report)
}

fn relations(common: &Common, cutoff: usize, echo: String) -> Result<Report, CliError> {
    let graph = load_graph(common)?;
    let fock = FockRep::new(graph, cutoff).map_err(compute)?;
    let checks = fock.verify_relations();
    let mut report = Report::new(echo, Mode::Numeric.name());
    if common.mode == Mode::Symbolic {
        report
            .warnings
            .push("relations are checked on the truncated Fock space only; --mode symbolic ignored".into());
    }
    for c in &checks.checks {
        if c.informational {
            report.warnings.push(format!(
                "{} does not hold in the Fock representation (max deviation {} over {} cases); only the subprojection relation is expected",
                c.identity, c.max_deviation, c.cases
            ));
            continue;
        }
        report.rows.push(
            Row::new(format!("{} [{} cases]", c.identity, c.cases))
                .numeric(Some(c.max_deviation))
                .verified(c.holds()),
        );
    }
    report.verdicts.push(format!(
        "{} on interior columns at cutoff {cutoff}",
        if report.all_verified() {
            "all relations hold"
        } else {
            "some relations fail"
        }
    ));
    Ok(report)
}

fn embed_check(common: &Common, generators: usize, max_order: usize, echo: String) -> Result<Report, CliError> {
    check_order(max_order)?;
    let graph = load_graph(common)?;
    let v = base_vertex(&graph, common)?;
    let vid = graph.vertex_id(v).to_string();
    let mut report = Report::new(echo, common.mode.name());
    let system = freeprob::embed_free_group_factor(&graph, &vid, generators, max_order).map_err(compute)?;
    let t = Target {
        element: system.generating_operator(),
        rest: Scale::unit(),
        loops: Some(generators),
        scale: Scale::unit(),
    };
    let numeric = numeric_moments(&graph, &t, max_order, v, common.mode, &mut report)?;
    for row in &system.rows {
        let x = numeric.as_ref().map(|m| m[row.n - 1]);
        let closed = row.expected.get(v);
        let ok = (!common.mode.symbolic() || row.holds()) && close(Some(&closed), x, ABS_TOL);
        let mut r = Row::new(format!("E(T^{})", row.n)).numeric(x).verified(ok);
        r = r.exact(if common.mode.symbolic() { &row.actual } else { &row.expected });
        report.rows.push(r);
    }
    if common.mode.symbolic() {
        for g in &system.generators {
            let l = graph.edge_id(g.edge);
            let ok = (1..=6).all(|k| {
                let xk = g.element.pow(k);
                freeprob::compress_to_vertex(&xk, v).is_ok_and(|c| c == xk)
            });
            report
                .rows
                .push(Row::new(format!("x_{l}^k = L_{vid} x_{l}^k L_{vid}, k <= 6")).verified(ok));
        }
    }
    let loops: Vec<&str> = system.generators.iter().map(|g| graph.edge_id(g.edge)).collect();
    report.verdicts.push(format!(
        "{} L(F_{generators}) at vertex {vid} on loops [{}]",
        if report.all_verified() {
            "embeds"
        } else {
            "fails to embed"
        },
        loops.join(", ")
    ));
    Ok(report)
}
