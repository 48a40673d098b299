//! Acceptance suite. Criteria run on a pool of one thread per core; each prints one
//! `PASS`/`FAIL` line; the binary exits non-zero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use hyperdisc::barrier::{verify_bound_chain, BarrierInstance};
use hyperdisc::generate::{kls_det, kls_lorentz, random_sr_distribution, sr_ust, VarMix};
use hyperdisc::graph::Graph;
use hyperdisc::mixedchar::{
    ag_identity_sides, check_family, kls_identity_sides, InterlacingFamily, KlsInstance, SrInstance,
};
use hyperdisc::realstable::{
    determinant_mixture, fixture, hyperbolicity_test, stability_test, Fixture, MultiPoly, StabilityVerdict,
};
use hyperdisc::solver::{
    brute_force, kadison_singer_search, max_root_estimate, maxcoeff_det, maxcoeff_enum, SolverConfig,
};
use hyperdisc::srdist::{effective_resistance_family_exact, SrDistribution};
use hyperdisc::{seeded, Rational, Scalar, UniPoly};
use rand::Rng;

/// Relative slack on float comparisons against a bound.
const BOUND_RTOL: f64 = 1e-9;
/// Allowed error of the `√10` root estimate.
const SQRT10_TOL: f64 = 1e-12;
const STABILITY_TRIALS: usize = 1000;
const INTERLACING_SAMPLES: usize = 64;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn le(a: f64, b: f64) -> bool {
    a <= b + BOUND_RTOL * b.abs().max(1.0)
}

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

/// Signed-sum instances used for the four-deviations bound and the
/// interlacing walk: `n ∈ 2..=10`, at most 1024 leaves each.
fn signed_instances() -> Vec<KlsInstance<Rational>> {
    (0..100u64)
        .map(|s| {
            let n = 2 + (s / 2 % 9) as usize;
            let mix = if n <= 6 { VarMix::Mixed } else { VarMix::Rademacher };
            let seed = 1000 + s;
            if s % 2 == 0 {
                kls_det(n, 1 + (s / 18 % 4) as usize, mix, seed)
            } else {
                kls_lorentz(n, 2 + (s / 18 % 4) as usize, mix, seed)
            }
            .expect("generator")
        })
        .collect()
}

fn tree_graphs() -> Vec<(String, Graph)> {
    let mut out: Vec<(String, Graph)> = Graph::connected_up_to(7)
        .into_iter()
        .enumerate()
        .map(|(i, g)| (format!("connected#{i}"), g))
        .collect();
    out.push(("K3".into(), Graph::complete(3)));
    out.push(("K4".into(), Graph::complete(4)));
    out.push(("diamond".into(), Graph::diamond()));
    out
}

fn weighted_tree_instance(g: &Graph, seed: u64) -> SrInstance<Rational> {
    let mut rng = seeded::named(seed, "weights", 0);
    let w: Vec<Rational> = (0..g.num_edges()).map(|_| q(rng.gen_range(1..=8), 4)).collect();
    SrInstance::new(
        SrDistribution::weighted_spanning_tree(g, &w).expect("weighted trees"),
        effective_resistance_family_exact(g).expect("family"),
    )
    .expect("instance")
}

fn identity_signed() -> Outcome {
    let mut count = 0;
    let mut bad = Vec::new();
    let (mut rad, mut coin, mut three) = (0, 0, 0);
    for s in 0..60u64 {
        let n = 1 + (s % 6) as usize;
        let inst = if s < 30 {
            kls_det(n, 1 + (s / 6 % 4) as usize, VarMix::Mixed, s)
        } else {
            kls_lorentz(n, 2 + (s / 6 % 4) as usize, VarMix::Mixed, s)
        }
        .expect("generator");
        for v in inst.vars() {
            match (v.len(), v.support()[0] == q(-1, 1) && v.len() == 2) {
                (3, _) => three += 1,
                (2, true) => rad += 1,
                _ => coin += 1,
            }
        }
        let (lhs, rhs) = kls_identity_sides(&inst).expect("identity sides");
        count += 1;
        if lhs != rhs {
            bad.push(s);
        }
    }
    let pass = bad.is_empty() && count >= 50 && rad > 0 && coin > 0 && three > 0;
    outcome(
        pass,
        format!("{count} instances exact, mismatches {bad:?}; variables: {rad} sign, {coin} coin, {three} three-point"),
    )
}

fn identity_selection() -> Outcome {
    let mut bad = Vec::new();
    for (name, g) in [("K3", Graph::complete(3)), ("K4", Graph::complete(4)), ("diamond", Graph::diamond())] {
        let (lhs, rhs) = ag_identity_sides(&sr_ust(&g).expect("ust")).expect("identity sides");
        if lhs != rhs {
            bad.push(name);
        }
    }
    outcome(bad.is_empty(), format!("K3, K4, diamond exact; mismatches {bad:?}"))
}

fn four_deviations() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut violations = Vec::new();
    let insts = signed_instances();
    for (s, inst) in insts.iter().enumerate() {
        assert!(inst.branch_count() <= 1 << 16);
        let (_, best) = brute_force(inst).expect("brute force");
        let sigma = inst.sigma();
        worst = worst.max(best / sigma);
        if !le(best, 4.0 * sigma) {
            violations.push(s);
        }
    }
    outcome(
        violations.is_empty(),
        format!("{} instances, max best/σ = {worst:.4} (bound 4), violations {violations:?}", insts.len()),
    )
}

fn selection_bound() -> Outcome {
    let graphs = tree_graphs();
    let mut violations = Vec::new();
    let mut worst: f64 = 0.0;
    for (name, g) in &graphs {
        let inst = sr_ust(g).expect("ust");
        let (_, best) = brute_force(&inst).expect("brute force");
        let bound = inst.bound().to_f64();
        worst = worst.max(best / bound);
        if !le(best, bound) {
            violations.push(name.clone());
        }
    }
    outcome(
        violations.is_empty(),
        format!("{} graphs, max best/(4ε+2ε²) = {worst:.4}, violations {violations:?}", graphs.len()),
    )
}

fn marginal_formula() -> Outcome {
    let mut dists: Vec<(String, SrDistribution<Rational>)> = ["K3", "K4", "diamond"]
        .iter()
        .map(|name| {
            let g = Graph::by_name(name).expect("graph");
            (format!("UST({name})"), SrDistribution::uniform_spanning_tree(&g).expect("ust"))
        })
        .collect();
    for s in 0..20u64 {
        let base = random_sr_distribution(s).expect("distribution");
        let mu = match s % 4 {
            1 => base.product(&SrDistribution::uniform_k_subsets(2, 1).expect("k-subsets")).expect("product"),
            2 => base.condition(0, true).or_else(|_| base.condition(0, false)).expect("condition"),
            _ => base,
        };
        dists.push((format!("random#{s}"), mu));
    }
    let x0s = [q(1, 1), q(2, 1), q(-1, 1), q(1, 2)];
    let mut checks = 0usize;
    let mut bad = Vec::new();
    for (name, mu) in &dists {
        for k in 0..=mu.n() {
            for mask in 0u64..1 << k {
                let s: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
                let want = mu.marginal_via_enum(&s, k);
                for x0 in &x0s {
                    checks += 1;
                    if mu.marginal_via_formula(&s, k, x0).expect("formula") != want {
                        bad.push(format!("{name} k={k} S={s:?} x0={x0}"));
                    }
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("{} distributions, {checks} exact checks, mismatches {bad:?}", dists.len()))
}

fn max_root_guarantee() -> Outcome {
    let mut rng = seeded::named(6, "spectra", 0);
    let mut violations = 0;
    for _ in 0..200 {
        let pairs = rng.gen_range(1..=12usize);
        let radii: Vec<Rational> = (0..pairs).map(|_| q(rng.gen_range(0..=16), 4)).collect();
        let p = radii.iter().fold(UniPoly::one(), |acc, r| {
            &acc * &UniPoly::new(vec![-(r.clone() * r.clone()), q(0, 1), q(1, 1)])
        });
        let deg = p.degree();
        let lambda = radii.iter().map(Scalar::to_f64).fold(0.0, f64::max);
        let k = 2 * rng.gen_range(1..=deg / 2);
        let est = max_root_estimate(deg, k, &p.top_coeffs(k)).expect("estimate");
        let upper = (deg as f64).powf(1.0 / k as f64) * lambda;
        if !(le(lambda, est) && le(est, upper)) {
            violations += 1;
        }
    }
    let c = [q(0, 1), q(-5, 1)];
    let est = max_root_estimate(4, 2, &c).expect("estimate");
    let err = (est - 10f64.sqrt()).abs();
    outcome(
        violations == 0 && err <= SQRT10_TOL,
        format!("200 spectra, violations {violations}; x⁴−5x²+4 at k=2 gives {est} (error {err:.1e})"),
    )
}

fn oracle_equivalence() -> Outcome {
    let mut rng = seeded::named(7, "prefixes", 0);
    let mut checks = 0;
    let mut bad = Vec::new();
    for s in 0..30u64 {
        let n = 1 + (s % 5) as usize;
        let inst = kls_det(n, 1 + (s / 5 % 3) as usize, VarMix::Mixed, 500 + s).expect("generator");
        let mut prefixes: Vec<Vec<usize>> = vec![vec![]];
        prefixes.extend((0..inst.arity(0)).map(|c| vec![c]));
        prefixes.push(vec![0; n]);
        prefixes.push(inst.sample_leaf(&mut rng));
        for prefix in &prefixes {
            for k in 1..=3 {
                checks += 1;
                let det = maxcoeff_det(&inst, k, prefix).expect("det oracle");
                let enm = maxcoeff_enum(&inst, 2 * k, prefix).expect("enum oracle");
                if det != enm {
                    bad.push((s, prefix.clone(), k));
                }
            }
        }
    }
    outcome(bad.is_empty(), format!("30 instances, {checks} exact comparisons, mismatches {bad:?}"))
}

fn blocked_search() -> Outcome {
    let mut failures = Vec::new();
    let mut worst_ratio: f64 = 0.0;
    let mut runs = 0;
    for s in 0..30u64 {
        for delta in [0.25, 0.5, 1.0] {
            let cfg = SolverConfig { seed: s, ..SolverConfig::with_delta(delta) };
            runs += 1;
            if s < 20 {
                let n = 2 + (s % 5) as usize;
                let exact = if s % 2 == 0 {
                    kls_det(n, 1 + (s / 2 % 3) as usize, VarMix::Mixed, 800 + s)
                } else {
                    kls_lorentz(n, 2 + (s / 2 % 3) as usize, VarMix::Mixed, 800 + s)
                }
                .expect("generator");
                let inst = exact.normalized().expect("normalize");
                match kadison_singer_search(&inst, &cfg) {
                    Ok(r) => {
                        // recompute from the exact vectors, scaled by 1/σ
                        let norm = exact.leaf_norm(&r.assignment).expect("norm") / exact.sigma();
                        worst_ratio = worst_ratio.max(norm / r.bound.max(f64::MIN_POSITIVE));
                        if !le(norm, r.bound) || !le(norm, 4.0 * (1.0 + delta)) {
                            failures.push(format!("signed#{s} δ={delta}: {norm} vs {}", r.bound));
                        }
                    }
                    Err(e) => failures.push(format!("signed#{s} δ={delta}: {e}")),
                }
            } else {
                let graphs = [Graph::complete(3), Graph::complete(4), Graph::diamond(), Graph::cycle(5)];
                let exact = weighted_tree_instance(&graphs[(s % 4) as usize], s);
                let inst = exact.convert::<f64>().expect("convert");
                match kadison_singer_search(&inst, &cfg) {
                    Ok(r) => {
                        let norm = exact.leaf_norm(&r.assignment).expect("norm");
                        worst_ratio = worst_ratio.max(norm / r.bound);
                        if !le(norm, r.bound) {
                            failures.push(format!("trees#{s} δ={delta}: {norm} vs {}", r.bound));
                        }
                    }
                    Err(e) => failures.push(format!("trees#{s} δ={delta}: {e}")),
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("{runs} searches, max norm/((1+δ)·root) = {worst_ratio:.4}, failures {failures:?}"),
    )
}

fn interlacing_structure() -> Outcome {
    let mut failures = Vec::new();
    let mut nodes = 0;
    for (s, inst) in signed_instances().iter().enumerate() {
        let rep = check_family(inst, INTERLACING_SAMPLES, s as u64).expect("walk");
        nodes += rep.nodes;
        if !rep.passed() {
            failures.push(format!("signed#{s}"));
        }
    }
    for (name, g) in tree_graphs() {
        let rep = check_family(&sr_ust(&g).expect("ust"), INTERLACING_SAMPLES, 9).expect("walk");
        nodes += rep.nodes;
        if !rep.passed() {
            failures.push(name);
        }
    }
    outcome(failures.is_empty(), format!("{nodes} nodes checked, failing instances {failures:?}"))
}

fn barrier_chain() -> Outcome {
    let mut failures = Vec::new();
    let mut min_margin = f64::INFINITY;
    let mut kls_root: f64 = 0.0;
    let mut ag_ratio: f64 = 0.0;
    for s in 0..100u64 {
        let report = if s < 60 {
            let n = 1 + (s % 6) as usize;
            let exact = if s % 2 == 0 {
                kls_det(n, 1 + (s / 2 % 4) as usize, VarMix::Mixed, 900 + s)
            } else {
                kls_lorentz(n, 2 + (s / 2 % 4) as usize, VarMix::Mixed, 900 + s)
            }
            .expect("generator");
            verify_bound_chain(BarrierInstance::Kls(&exact.normalized().expect("normalize")))
        } else {
            let graphs = tree_graphs();
            let (_, g) = &graphs[(s as usize * 7) % graphs.len()];
            let inst = weighted_tree_instance(g, s).convert::<f64>().expect("convert");
            verify_bound_chain(BarrierInstance::Ag(&inst))
        };
        match report {
            Ok(rep) => {
                for st in &rep.steps {
                    min_margin = min_margin.min(st.margin);
                    if st.step == "operator-root" && s < 60 {
                        kls_root = kls_root.max(st.quantity);
                    }
                    if st.step == "mixed-root" {
                        ag_ratio = ag_ratio.max(st.quantity / st.bound);
                    }
                }
                if !rep.passed() {
                    failures.push(format!("#{s}: {:?}", rep.failures().iter().map(|f| &f.step).collect::<Vec<_>>()));
                }
            }
            Err(e) => failures.push(format!("#{s}: {e}")),
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "100 instances, min margin {min_margin:.3e}, max signed root {kls_root:.4} (≤ 4), \
             max selection root/(4ε+2ε²) {ag_ratio:.4}, failures {failures:?}"
        ),
    )
}

fn stability_suite() -> Outcome {
    let mut stable: Vec<(String, MultiPoly<Rational>)> = vec![
        ("trees(K3)".into(), fixture(&Fixture::SpanningTree(Graph::complete(3))).unwrap()),
        ("trees(K4)".into(), fixture(&Fixture::SpanningTree(Graph::complete(4))).unwrap()),
        ("trees(diamond)".into(), fixture(&Fixture::SpanningTree(Graph::diamond())).unwrap()),
        ("e2(4)".into(), fixture(&Fixture::ElemSym { n: 4, k: 2 }).unwrap()),
        ("e3(6)".into(), fixture(&Fixture::ElemSym { n: 6, k: 3 }).unwrap()),
        ("matching(K4)".into(), fixture(&Fixture::Matching(Graph::complete(4))).unwrap()),
        ("matching(P4)".into(), fixture(&Fixture::Matching(Graph::path(4))).unwrap()),
        ("vamos".into(), fixture(&Fixture::Vamos).unwrap()),
    ];
    let psd = |rows: [[i64; 2]; 2]| -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&v| q(v, 1)).collect()).collect()
    };
    let b = psd([[1, -2], [-2, 0]]);
    stable.push((
        "det-mixture".into(),
        determinant_mixture(&[psd([[2, 1], [1, 1]]), psd([[1, 0], [0, 0]]), psd([[1, 1], [1, 1]])], Some(&b)).unwrap(),
    ));
    let mut failures = Vec::new();
    for (name, p) in &stable {
        if !stability_test(p, STABILITY_TRIALS, 11).expect("stability").passed() {
            failures.push(name.clone());
        }
    }
    // the multivariate matching polynomial is hyperbolic in direction (1_V, 0)
    for g in [Graph::complete(3), Graph::complete(4)] {
        let p = fixture(&Fixture::MultivariateMatching(g.clone())).unwrap();
        let mut e = vec![q(1, 1); g.vertices()];
        e.extend(vec![q(0, 1); g.num_edges()]);
        if !hyperbolicity_test(&p, &e, STABILITY_TRIALS, 11).expect("hyperbolicity").passed() {
            failures.push(format!("multivariate-matching({} vertices)", g.vertices()));
        }
    }
    let x1 = MultiPoly::<Rational>::var(2, 0);
    let x2 = MultiPoly::<Rational>::var(2, 1);
    let sq = x1.mul(&x1).add(&x2.mul(&x2));
    let witness = match stability_test(&sq, STABILITY_TRIALS, 11).expect("stability") {
        StabilityVerdict::RefutedUnstable { a, b } => {
            // (a₁t+b₁)² + (a₂t+b₂)² has discriminant −4(a₁b₂ − a₂b₁)²
            let cross = a[0].clone() * b[1].clone() - a[1].clone() * b[0].clone();
            let positive = a.iter().all(|v| *v > q(0, 1));
            let ok = positive && cross != q(0, 1);
            if !ok {
                failures.push("x1²+x2² witness".into());
            }
            format!("a = ({}, {}), b = ({}, {})", a[0], a[1], b[0], b[1])
        }
        StabilityVerdict::PassedTrials(_) => {
            failures.push("x1²+x2² not refuted".into());
            "none".into()
        }
    };
    outcome(
        failures.is_empty(),
        format!("{} stable fixtures + 2 hyperbolic, x1²+x2² witness {witness}, failures {failures:?}", stable.len()),
    )
}

type Criterion = (u32, &'static str, Duration, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (1, "signed-sum operator identity", Duration::from_secs(60), identity_signed),
        (2, "selection operator identity", Duration::from_secs(60), identity_selection),
        (3, "four-deviations bound", Duration::from_secs(300), four_deviations),
        (4, "spanning-tree selection bound", Duration::from_secs(300), selection_bound),
        (5, "marginal formula", Duration::from_secs(30), marginal_formula),
        (6, "max-root estimate", Duration::from_secs(10), max_root_guarantee),
        (7, "minor oracle equivalence", Duration::from_secs(60), oracle_equivalence),
        (8, "blocked-search certification", Duration::from_secs(600), blocked_search),
        (9, "interlacing structure", Duration::from_secs(300), interlacing_structure),
        (10, "barrier chain", Duration::from_secs(300), barrier_chain),
        (11, "stability suite", Duration::from_secs(30), stability_suite),
    ];
    // optional criterion numbers on the command line select a subset
    let only: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria: Vec<Criterion> = criteria.into_iter().filter(|c| only.is_empty() || only.contains(&c.0)).collect();
    // at most one criterion per core, so a budget measures that criterion alone
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(criteria.len()).max(1);
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<(Outcome, Duration)>>> = criteria.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(_, _, _, f)) = criteria.get(i) else { break };
                let start = Instant::now();
                let out = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
                    let msg = e
                        .downcast_ref::<String>()
                        .cloned()
                        .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                        .unwrap_or_default();
                    outcome(false, format!("panicked: {msg}"))
                });
                *slots[i].lock().expect("slot") = Some((out, start.elapsed()));
            });
        }
    });
    let results = slots.into_iter().map(|m| m.into_inner().expect("slot").expect("criterion ran"));
    let mut failed = 0;
    for ((id, name, budget, _), (out, took)) in criteria.iter().zip(results) {
        let pass = out.pass && took <= *budget;
        failed += usize::from(!pass);
        println!(
            "criterion {id:>2} {name}: {} ({:.2}s of {}s) {}",
            if pass { "PASS" } else { "FAIL" },
            took.as_secs_f64(),
            budget.as_secs(),
            out.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
