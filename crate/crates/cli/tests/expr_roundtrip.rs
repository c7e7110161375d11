use std::sync::Arc;

use gwp_cli::parse_element_expr;
use gwp_core::scalar::rational;
use gwp_core::{EdgeSpec, Element, Graph, PathWord};
use proptest::prelude::*;

fn graph() -> Arc<Graph> {
    Arc::new(
        Graph::new(
            ["u", "v"],
            [
                EdgeSpec::new("a", "v", "v"),
                EdgeSpec::new("b", "v", "v"),
                EdgeSpec::new("e", "u", "v"),
                EdgeSpec::new("f_2", "v", "u"),
            ],
        )
        .unwrap(),
    )
}

fn words() -> Vec<PathWord> {
    graph().enumerate_paths(3)
}

fn element() -> impl Strategy<Value = Element> {
    let n = words().len();
    proptest::collection::vec((0..n, 0..n, -9i64..=9, 1i64..=6), 0..8).prop_map(|raw| {
        let g = graph();
        let w = words();
        let terms = raw
            .into_iter()
            .filter(|&(i, j, _, _)| g.range(&w[i]) == g.range(&w[j]))
            .map(|(i, j, num, den)| (rational(num, den), w[i].clone(), w[j].clone()));
        Element::from_monomials(g.clone(), terms).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn printed_elements_parse_back(e in element()) {
        let text = e.to_string();
        let parsed = parse_element_expr(&text, e.graph()).unwrap();
        prop_assert_eq!(parsed, e, "{}", text);
    }

    #[test]
    fn sums_and_products_match_the_engine(x in element(), y in element()) {
        let g = x.graph().clone();
        let text = format!("({x}) * ({y}) - adj({y})");
        let expected = &(&x * &y) - &y.adjoint();
        prop_assert_eq!(parse_element_expr(&text, &g).unwrap(), expected);
    }
}
