//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::collections::HashMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use gwp_cli::parse_graph_file;
use gwp_core::fock::{FockRep, REL_RANGE_EQUALS_SOURCE, REL_RANGE_SUBPROJECTION};
use gwp_core::freeprob::{self, State, DEFAULT_MONOMIAL_ORDER};
use gwp_core::nc::{self, NcPartition};
use gwp_core::scalar::{approx_eq, int, rational, RealCoeff, REL_TOL};
use gwp_core::{DiagonalElement, Element, Flavor, Graph, PathWord, Rational};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};

type Outcome = Result<String, String>;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/graphs").join(name)
}

fn load(name: &str) -> Arc<Graph> {
    Arc::new(parse_graph_file(&data(name)).unwrap())
}

fn bouquet(n: usize) -> Arc<Graph> {
    load(["g1loop.json", "g2loops.json", "g3loops.json"][n - 1])
}

fn t_of(g: &Arc<Graph>) -> Element {
    freeprob::generating_operator(g, "v", &int(1)).unwrap()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed <= limit, || format!("took {elapsed:.2?}, limit {limit:?}"))
}

fn catalan_law() -> Outcome {
    let start = Instant::now();
    for n_gen in 1..=3 {
        let m = freeprob::moment_series(&t_of(&bouquet(n_gen)), 12, State::Trace).map_err(|e| e.to_string())?;
        for n in 1..=12 {
            let want = freeprob::catalan_moment_formula(n_gen as u64, n);
            ensure(m.coeff(n) == want, || format!("N={n_gen} n={n}: {} != {want}", m.coeff(n)))?;
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(10))?;
    Ok(format!("N in 1..=3, n <= 12 exact, {elapsed:.2?}"))
}

fn fock_agreement() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n_gen in 1..=3 {
        let g = bouquet(n_gen);
        let v = g.vertex("v").unwrap();
        let t = t_of(&g);
        for n in 1..=12 {
            let fock = FockRep::new(g.clone(), n).map_err(|e| e.to_string())?;
            let x = fock.vacuum_moments(&t, n, v).map_err(|e| e.to_string())?[n - 1];
            let want = freeprob::catalan_moment_formula(n_gen as u64, n).to_f64();
            ensure(approx_eq(x, want, REL_TOL, 0.0), || format!("N={n_gen} n={n}: {x} vs {want}"))?;
            if want != 0.0 {
                worst = worst.max((x - want).abs() / want);
            }
        }
    }
    let elapsed = start.elapsed();
    within(elapsed, Duration::from_secs(30))?;
    Ok(format!("cutoff = n, max relative error {worst:e}, {elapsed:.2?}"))
}

fn pairing_route() -> Outcome {
    for n_gen in 1..=3u64 {
        for n in (2..=12).step_by(2) {
            let pairs = Rational::from_integer(freeprob::pairing_sum(n_gen, n).map_err(|e| e.to_string())?);
            let want = freeprob::catalan_moment_formula(n_gen, n);
            ensure(pairs == want, || format!("N={n_gen} n={n}: {pairs} != {want}"))?;
        }
    }
    Ok("sum over NC_2(n) of N^|pi| matches for even n <= 12".into())
}

fn r_transform() -> Outcome {
    for n_gen in 1..=3 {
        let r = freeprob::r_transform(&t_of(&bouquet(n_gen)), 10, State::Trace).map_err(|e| e.to_string())?;
        for n in 1..=10 {
            let want = if n == 2 { int(n_gen as i64) } else { int(0) };
            ensure(r.coeff(n) == want, || format!("N={n_gen}: coefficient of z^{n} is {}", r.coeff(n)))?;
        }
    }
    Ok("R_T(z) = N z^2 to order 10 for N in 1..=3".into())
}

fn semicircularity() -> Outcome {
    for (file, vertex, edge) in [("g1loop.json", "v", "a"), ("embed3.json", "v0", "l1")] {
        let g = load(file);
        let x = freeprob::semicircular(&g, g.edge(edge).unwrap(), &int(1)).unwrap();
        let r = g.vertex(vertex).unwrap();
        for n in 1..=8 {
            let k = nc::mixed_cumulant(&vec![x.clone(); n]).map_err(|e| e.to_string())?;
            let want = DiagonalElement::from_values(g.clone(), [(r, if n == 2 { int(1) } else { int(0) })]);
            ensure(k == want, || format!("{file}: k{n} = {k}"))?;
        }
    }
    Ok("k1..k8 = (0,1,0,0,0,0,0,0) L_r(l)".into())
}

fn freeness() -> Outcome {
    let g = bouquet(2);
    let xa = freeprob::semicircular(&g, g.edge("a").unwrap(), &int(1)).unwrap();
    let xb = freeprob::semicircular(&g, g.edge("b").unwrap(), &int(1)).unwrap();
    let mut checked = 0;
    for n in 2..=6 {
        for mask in 1u32..(1 << n) - 1 {
            let args: Vec<Element> = (0..n).map(|i| if mask >> i & 1 == 1 { xb.clone() } else { xa.clone() }).collect();
            let k = nc::mixed_cumulant(&args).map_err(|e| e.to_string())?;
            ensure(k.is_zero(), || format!("mixed cumulant {mask:b} = {k}"))?;
            checked += 1;
        }
    }
    let a = g.path(&["a"]).unwrap();
    let b = g.path(&["b"]).unwrap();
    let scan = freeprob::freeness_check(&g, &a, &b, 6, DEFAULT_MONOMIAL_ORDER).map_err(|e| e.to_string())?;
    ensure(scan.diagram_distinct && scan.free_evidence(), || "scan of (a, b) found a witness".into())?;

    let aa = g.path(&["a", "a"]).unwrap();
    let neg = freeprob::freeness_check(&g, &a, &aa, 2, DEFAULT_MONOMIAL_ORDER).map_err(|e| e.to_string())?;
    let w = neg.witness.ok_or("no witness for (a, aa)")?;
    ensure(w.describe() == "k2(Ls(a,a), L(a)*L(a))", || format!("witness {}", w.describe()))?;
    ensure(w.value.get(g.vertex("v").unwrap()) == int(1), || format!("witness value {}", w.value))?;
    Ok(format!(
        "{checked} generator cumulants and {} scanned cumulants vanish; witness {} = 1",
        scan.scanned,
        w.describe()
    ))
}

fn segner(k: usize) -> Vec<BigInt> {
    let mut c = vec![BigInt::from(1)];
    for m in 0..k {
        let next = (0..=m).map(|i| &c[i] * &c[m - i]).sum();
        c.push(next);
    }
    c
}

fn recursive_mobius(all: &[NcPartition]) -> HashMap<NcPartition, BigInt> {
    let mut sorted = all.to_vec();
    sorted.sort_by_key(NcPartition::block_count);
    let mut mu: HashMap<NcPartition, BigInt> = HashMap::new();
    for p in &sorted {
        let value = if p.block_count() == 1 {
            BigInt::from(1)
        } else {
            -all.iter().filter(|s| *s != p && p.refines(s)).map(|s| mu[s].clone()).sum::<BigInt>()
        };
        mu.insert(p.clone(), value);
    }
    mu
}

fn nc_lattice() -> Outcome {
    let c = segner(12);
    for n in 1..=12 {
        let count = nc::enumerate_nc(n).map_err(|e| e.to_string())?.len();
        ensure(BigInt::from(count) == c[n], || format!("|NC({n})| = {count}"))?;
        ensure(nc::catalan(n) == c[n], || format!("catalan({n})"))?;
    }
    for n in 1..=10 {
        let all = nc::enumerate_nc(n).unwrap();
        for p in &all {
            let k = nc::kreweras(p);
            ensure(p.block_count() + k.block_count() == n + 1, || format!("Kreweras size of {p}"))?;
        }
        if n > 8 {
            continue;
        }
        let mu = recursive_mobius(&all);
        for p in &all {
            ensure(nc::mobius_to_top(p) == mu[p], || format!("mu({p}, 1)"))?;
            let sum: BigInt = all.iter().filter(|s| p.refines(s)).map(nc::mobius_to_top).sum();
            let want = BigInt::from((p.block_count() == 1) as i32);
            ensure(sum == want, || format!("defining identity at {p}"))?;
        }
    }
    Ok("counts n <= 12, Mobius identity and recursion n <= 8, Kreweras n <= 10".into())
}

fn transform_inversion() -> Outcome {
    let mut rng = rand::rngs::StdRng::seed_from_u64(0x5eed);
    for trial in 0..100 {
        let m: Vec<Rational> = (0..8).map(|_| rational(rng.gen_range(-50..=50), rng.gen_range(1..=12))).collect();
        let k = nc::moments_to_cumulants(&m).map_err(|e| e.to_string())?;
        let back = nc::cumulants_to_moments(&k).map_err(|e| e.to_string())?;
        ensure(back == m, || format!("trial {trial}"))?;
    }
    Ok("100 random length-8 sequences round trip exactly".into())
}

fn factorization() -> Outcome {
    let mut tuples: Vec<(Arc<Graph>, Vec<(PathWord, Flavor)>)> = Vec::new();
    for (file, pool) in [
        ("g2loops.json", vec![vec!["a"], vec!["b"], vec!["a", "a"], vec!["a", "b"]]),
        ("chain.json", vec![vec!["e1"], vec!["e2"], vec!["e1", "e2"], vec!["l"]]),
    ] {
        let g = load(file);
        let words: Vec<PathWord> = pool.iter().map(|ids| g.path(ids).unwrap()).collect();
        let gens: Vec<(PathWord, Flavor)> = words
            .iter()
            .flat_map(|w| [(w.clone(), Flavor::Plain), (w.clone(), Flavor::Starred)])
            .collect();
        for len in 1..=4 {
            let mut idx = vec![0usize; len];
            loop {
                tuples.push((g.clone(), idx.iter().map(|&i| gens[i].clone()).collect()));
                let mut k = 0;
                while k < len && idx[k] == gens.len() - 1 {
                    idx[k] = 0;
                    k += 1;
                }
                if k == len {
                    break;
                }
                idx[k] += 1;
            }
        }
    }
    let mut nonzero = 0;
    let mut stray = 0;
    for (g, words) in &tuples {
        let r = nc::moment_factorization(g, words).map_err(|e| e.to_string())?;
        let text = || {
            words
                .iter()
                .map(|(w, f)| format!("{}{}", g.format_word(w), if *f == Flavor::Starred { "*" } else { "" }))
                .collect::<Vec<_>>()
                .join(" ")
        };
        ensure(r.holds(), || format!("{}: k = {}, mu = {}, E = {}", text(), r.cumulant, r.mu, r.product_expectation))?;
        nonzero += usize::from(!r.product_expectation.is_zero());
        stray += usize::from(!r.stray.is_empty());
    }
    ensure(tuples.len() >= 20, || format!("only {} tuples", tuples.len()))?;
    Ok(format!(
        "{} tuples of length <= 4 ({nonzero} with nonzero moment, {stray} with stray partitions)",
        tuples.len()
    ))
}

fn embedding() -> Outcome {
    let g = load("embed3.json");
    let v0 = g.vertex("v0").unwrap();
    let s = freeprob::embed_free_group_factor(&g, "v0", 2, 8).map_err(|e| e.to_string())?;
    for row in &s.rows {
        let want = DiagonalElement::from_values(g.clone(), [(v0, freeprob::catalan_moment_formula(2, row.n))]);
        ensure(row.actual == want, || format!("E(T^{}) = {}", row.n, row.actual))?;
    }
    for gen in &s.generators {
        for k in 1..=6 {
            let xk = gen.element.pow(k);
            let c = freeprob::compress_to_vertex(&xk, v0).map_err(|e| e.to_string())?;
            ensure(c == xk, || format!("compression of x_{}^{k}", g.edge_id(gen.edge)))?;
        }
    }
    Ok("E(T^n) = c_(n/2) 2^(n/2) L_v0 for n <= 8; compression for k <= 6".into())
}

fn relations() -> Outcome {
    let mut total = 0;
    for file in ["g2loops.json", "chain.json", "embed3.json"] {
        let fock = FockRep::new(load(file), 4).map_err(|e| e.to_string())?;
        let report = fock.verify_relations();
        for c in &report.checks {
            if c.informational {
                continue;
            }
            ensure(c.max_deviation == 0.0 && c.cases > 0, || format!("{file}: {} deviates by {}", c.identity, c.max_deviation))?;
            total += c.cases;
        }
        let sub = report.get(REL_RANGE_SUBPROJECTION).ok_or("missing subprojection check")?;
        ensure(sub.holds(), || format!("{file}: subprojection"))?;
        let eq = report.get(REL_RANGE_EQUALS_SOURCE).ok_or("missing equality check")?;
        ensure(eq.informational && eq.max_deviation > 0.0, || format!("{file}: L_w L_w* = L_s(w) unexpectedly exact"))?;
    }
    Ok(format!("{total} cases with zero deviation; L_w L_w* is a proper subprojection of L_s(w)"))
}

fn traciality() -> Outcome {
    let g = bouquet(2);
    let gens = [
        freeprob::semicircular(&g, g.edge("a").unwrap(), &int(1)).unwrap(),
        freeprob::semicircular(&g, g.edge("b").unwrap(), &int(1)).unwrap(),
    ];
    let mut rng = rand::rngs::StdRng::seed_from_u64(12);
    let word = |len: usize, rng: &mut rand::rngs::StdRng| {
        (0..len).fold(Element::identity(g.clone()), |acc, _| &acc * &gens[rng.gen_range(0..2)])
    };
    for trial in 0..200 {
        let total = rng.gen_range(0..=6);
        let split = rng.gen_range(0..=total);
        let p = word(split, &mut rng);
        let q = word(total - split, &mut rng);
        let pq = (&p * &q).trace().map_err(|e| e.to_string())?;
        let qp = (&q * &p).trace().map_err(|e| e.to_string())?;
        ensure(pq == qp, || format!("trial {trial}: tr(pq) = {pq}, tr(qp) = {qp}"))?;
    }
    Ok("200 random pairs, total degree <= 6".into())
}

fn run_cli(args: &[String]) -> (i32, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_gwp")).args(args).output().unwrap();
    (out.status.code().unwrap_or(-1), out.stdout)
}

fn cli_end_to_end() -> Outcome {
    let path = |name: &str| data(name).to_string_lossy().into_owned();
    let cases: Vec<Vec<String>> = [
        vec!["verify-catalan", "--graph", &path("g2loops.json"), "--vertex", "v", "--max-order", "10"],
        vec!["rtransform", "--graph", &path("g3loops.json"), "--vertex", "v", "--order", "10"],
        vec!["freeness", "--graph", &path("g2loops.json"), "--w1", "a", "--w2", "b", "--scan-order", "4"],
        vec!["embed-check", "--graph", &path("embed3.json"), "--vertex", "v0", "--generators", "2"],
    ]
    .into_iter()
    .map(|a| a.into_iter().map(String::from).chain(["--json".to_string()]).collect())
    .collect();
    for args in &cases {
        let (code, first) = run_cli(args);
        ensure(code == 0, || format!("{} exited {code}", args[0]))?;
        let (_, second) = run_cli(args);
        ensure(first == second, || format!("{} output not byte-stable", args[0]))?;
        let v: serde_json::Value = serde_json::from_slice(&first).map_err(|e| e.to_string())?;
        ensure(v["rows"].as_array().is_some_and(|r| r.iter().all(|r| r["verified"] == true)), || {
            format!("{} has unverified rows", args[0])
        })?;
        if args[0] == "rtransform" {
            ensure(v["verdicts"][0] == "R(z) = 3 z^2", || format!("rtransform verdict {}", v["verdicts"][0]))?;
        }
    }
    Ok("verify-catalan, rtransform, freeness, embed-check exit 0 with stable JSON".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("Catalan moment law", catalan_law),
        ("Fock-space oracle agreement", fock_agreement),
        ("non-crossing pairing count", pairing_route),
        ("R-transform N z^2", r_transform),
        ("semicircularity of a single loop", semicircularity),
        ("freeness of distinct loops and the (a, aa) witness", freeness),
        ("non-crossing lattice suite", nc_lattice),
        ("moment-cumulant inversion", transform_inversion),
        ("cumulant = mu * moment for generator words", factorization),
        ("free group factor embedding", embedding),
        ("operator relations", relations),
        ("traciality on semicircular words", traciality),
        ("CLI end to end", cli_end_to_end),
    ];
    let mut failed = 0;
    let mut out = std::io::stdout().lock();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        match result {
            Ok(detail) => writeln!(out, "PASS  {:>2}. {name}: {detail}", i + 1).unwrap(),
            Err(why) => {
                failed += 1;
                writeln!(out, "FAIL  {:>2}. {name}: {why}", i + 1).unwrap();
            }
        }
    }
    writeln!(out, "acceptance: {} passed, {failed} failed", criteria.len() - failed).unwrap();
    if failed > 0 {
        std::process::exit(1);
    }
}
