use hyperdisc::barrier::{phi, verify_bound_chain, BarrierInstance, BarrierPoint};
use hyperdisc::generate::{kls_det, kls_lorentz, random_sr_distribution, VarMix};
use hyperdisc::hyperbolic::{ConeStatus, HyperbolicInstance};
use hyperdisc::linalg;
use hyperdisc::mixedchar::{descend_family, kls_barrier_poly, RandomVariable, DESCENT_TOL};
use hyperdisc::realstable::{closure_ops, fixture, stability_test, ClosureOp, Fixture};
use hyperdisc::graph::Graph;
use hyperdisc::solver::{brute_force, elem_to_power, kadison_singer_search, max_root_estimate, vieta_elems, SolverConfig};
use hyperdisc::unipoly::{interpolate, is_real_rooted, real_roots, DEFAULT_TOL};
use hyperdisc::{Rational, Scalar, UniPoly};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> Rational {
    Rational::from_ratio(n, d)
}

fn rat_vec(v: &[i64], d: i64) -> Vec<Rational> {
    v.iter().map(|&x| q(x, d)).collect()
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interpolation_reproduces_real_rooted(roots in prop::collection::vec(-12i64..=12, 1..=12), lead in 1i64..=5) {
        let p = UniPoly::from_roots(&rat_vec(&roots, 3)).scale(&q(lead, 1));
        let nodes: Vec<(Rational, Rational)> = (0..=p.degree())
            .map(|k| { let t = q(k as i64, 1); (t.clone(), p.eval(&t)) })
            .collect();
        prop_assert_eq!(interpolate(&nodes).unwrap(), p.clone());

        // integer nodes are too ill-conditioned for floats at degree 12
        let pf = p.to_f64();
        let d = pf.degree();
        let nodes: Vec<(f64, f64)> = (0..=d)
            .map(|k| ((2 * k + 1) as f64 * std::f64::consts::PI / (2 * (d + 1)) as f64).cos())
            .map(|t| (t, pf.eval(&t)))
            .collect();
        prop_assert!(interpolate(&nodes).unwrap().approx_eq(&pf, 1e-10));
    }

    #[test]
    fn roots_of_product_are_the_union(a in prop::collection::vec(-20i64..=20, 1..=6), b in prop::collection::vec(-20i64..=20, 1..=6)) {
        let p = UniPoly::from_roots(&a.iter().map(|&x| x as f64 / 4.0).collect::<Vec<_>>());
        let r = UniPoly::from_roots(&b.iter().map(|&x| x as f64 / 4.0).collect::<Vec<_>>());
        let got = real_roots(&(&p * &r), DEFAULT_TOL).unwrap().into_vec();
        let want = sorted_desc(a.iter().chain(&b).map(|&x| x as f64 / 4.0).collect());
        prop_assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g - w).abs() < 1e-4, "{:?} vs {:?}", got, want);
        }
    }

    #[test]
    fn real_rootedness_verdicts(roots in prop::collection::vec(-16i64..=16, 1..=10), b in -8i64..=8, c in 1i64..=8) {
        let p = UniPoly::from_roots(&rat_vec(&roots, 2));
        prop_assert!(is_real_rooted(&p, DEFAULT_TOL).unwrap());
        prop_assert!(is_real_rooted(&p.to_f64(), DEFAULT_TOL).unwrap());
        // (x − b)² + c has no real roots
        let pd = UniPoly::new(vec![q(b * b + c, 1), q(-2 * b, 1), q(1, 1)]);
        prop_assert!(!is_real_rooted(&pd, DEFAULT_TOL).unwrap());
    }

    #[test]
    fn power_sums_from_elementary(roots in prop::collection::vec(-9i64..=9, 1..=10), k in 1usize..=12) {
        let r = rat_vec(&roots, 2);
        let p = UniPoly::from_roots(&r);
        let e = vieta_elems(&p.top_coeffs(k));
        let direct = r.iter().fold(q(0, 1), |acc, x| acc + (0..k).fold(q(1, 1), |a, _| a * x.clone()));
        prop_assert_eq!(elem_to_power(k, &e), direct);
    }

    #[test]
    fn root_estimate_brackets_largest_root(roots in prop::collection::vec(0i64..=16, 1..=12), half_k in 1usize..=12) {
        let p = roots.iter().fold(UniPoly::<Rational>::one(), |acc, &r| {
            &acc * &UniPoly::new(vec![q(-r * r, 16), q(0, 1), q(1, 1)])
        });
        let deg = p.degree();
        let k = 2 * half_k.min(deg / 2);
        let lambda = *roots.iter().max().unwrap() as f64 / 4.0;
        let est = max_root_estimate(deg, k, &p.top_coeffs(k)).unwrap();
        prop_assert!(lambda <= est * (1.0 + 1e-12) + 1e-12);
        prop_assert!(est <= (deg as f64).powf(1.0 / k as f64) * lambda * (1.0 + 1e-12) + 1e-12);
    }
}

fn random_sym(rng_vals: &[i64], size: usize) -> Vec<Rational> {
    let mut m = linalg::zeros::<Rational>(size, size);
    let mut it = rng_vals.iter().cycle();
    for i in 0..size {
        for j in i..size {
            let v = q(*it.next().unwrap(), 2);
            m[i][j] = v.clone();
            m[j][i] = v;
        }
    }
    linalg::sym_to_vec(&m)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn eigenvalues_are_homogeneous(vals in prop::collection::vec(-6i64..=6, 6), c in prop_oneof![-3i64..=-1, 1i64..=3]) {
        let h = HyperbolicInstance::<f64>::determinant(3);
        let x: Vec<f64> = random_sym(&vals, 3).iter().map(Scalar::to_f64).collect();
        let cx: Vec<f64> = x.iter().map(|v| v * c as f64).collect();
        let lx = h.spectrum(&x, DEFAULT_TOL).unwrap().eigenvalues.into_vec();
        let mut lc = h.spectrum(&cx, DEFAULT_TOL).unwrap().eigenvalues.into_vec();
        if c < 0 {
            lc.reverse();
        }
        for (a, b) in lx.iter().zip(&lc) {
            prop_assert!((a * c as f64 - b).abs() < 1e-8 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn norm_is_largest_root_of_symmetrized_restriction(seed in 0u64..1000) {
        let inst = kls_lorentz(3, 4, VarMix::Rademacher, seed).unwrap();
        let signs: Vec<Rational> = (0..3).map(|i| if seed >> i & 1 == 1 { q(1, 1) } else { q(-1, 1) }).collect();
        let mut s = vec![q(0, 1); 4];
        for (v, c) in inst.vectors().iter().zip(&signs) {
            for (a, b) in s.iter_mut().zip(v) {
                *a = a.clone() + c.clone() * b.clone();
            }
        }
        let h = inst.h();
        let neg: Vec<Rational> = s.iter().map(|v| -v.clone()).collect();
        let p = &h.restrict_line(&neg, h.e()).unwrap() * &h.restrict_line(&s, h.e()).unwrap();
        let norm = h.norm(&s, DEFAULT_TOL).unwrap();
        prop_assert!((real_roots(&p, DEFAULT_TOL).unwrap().max() - norm).abs() < 1e-8 * (1.0 + norm));
    }

    #[test]
    fn trace_is_independent_of_scale(vals in prop::collection::vec(-6i64..=6, 6), alpha in prop::sample::select(vec![1i64, -1, 2, -2, 3])) {
        let h = HyperbolicInstance::<Rational>::determinant(3);
        let v = random_sym(&vals, 3);
        let tr = h.trace_via_derivative(&v, &q(alpha, 1)).unwrap();
        prop_assert_eq!(tr.clone(), linalg::trace(&linalg::vec_to_sym(&v)));
        let spec = h.spectrum(&v, DEFAULT_TOL).unwrap();
        prop_assert!((tr.to_f64() - spec.trace).abs() < 1e-8 * (1.0 + spec.trace.abs()));
    }

    #[test]
    fn log_derivative_ratio_is_concave(a in prop::collection::vec(1i64..=4, 3), b in prop::collection::vec(1i64..=4, 3), u in prop::collection::vec(-3i64..=3, 3)) {
        // diagonal positive definite a, b; direction v = uuᵀ
        let h = HyperbolicInstance::<f64>::determinant(3);
        let diag = |d: &[i64]| -> Vec<f64> {
            let mut m = linalg::zeros::<f64>(3, 3);
            for i in 0..3 { m[i][i] = d[i] as f64; m[i][(i + 1) % 3] = 0.25; m[(i + 1) % 3][i] = 0.25; }
            linalg::sym_to_vec(&m)
        };
        prop_assume!(u.iter().any(|&x| x != 0));
        let v = linalg::rank_one_vec(&u.iter().map(|&x| x as f64).collect::<Vec<_>>());
        let (xa, xb) = (diag(&a), diag(&b));
        let mid: Vec<f64> = xa.iter().zip(&xb).map(|(p, r)| (p + r) / 2.0).collect();
        let d = h.directional_derivative(&v).unwrap();
        let f = |x: &[f64]| h.eval(x).unwrap() / d.eval(x).unwrap();
        prop_assert!(f(&mid) >= 0.5 * f(&xa) + 0.5 * f(&xb) - 1e-9 * f(&mid).abs().max(1.0));
    }

    #[test]
    fn derivative_ratio_drops_along_the_cone(m in prop::collection::vec(0i64..=4, 6), u in prop::collection::vec(-3i64..=3, 3), alpha in 1i64..=4) {
        prop_assume!(u.iter().any(|&x| x != 0));
        let h = HyperbolicInstance::<f64>::determinant(3);
        let v = linalg::rank_one_vec(&u.iter().map(|&x| x as f64).collect::<Vec<_>>());
        // M = BᵀB is positive semidefinite
        let b: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| if j >= i { m[(i + j) % 6] as f64 / 2.0 } else { 0.0 }).collect()).collect();
        let bt: Vec<Vec<f64>> = (0..3).map(|i| (0..3).map(|j| b[j][i]).collect()).collect();
        let mm = linalg::sym_to_vec(&linalg::matmul(&bt, &b));
        let ae: Vec<f64> = h.e().iter().map(|c| c * alpha as f64).collect();
        let shifted: Vec<f64> = ae.iter().zip(&mm).map(|(p, r)| p + r).collect();
        let d = h.directional_derivative(&v).unwrap();
        let ratio = |x: &[f64]| d.eval(x).unwrap() / h.eval(x).unwrap();
        prop_assert!(ratio(&shifted) <= ratio(&ae) + 1e-9);
    }

    #[test]
    fn e_minus_bounded_vector_is_in_cone(vals in prop::collection::vec(-6i64..=6, 6)) {
        let h = HyperbolicInstance::<f64>::determinant(3);
        let x: Vec<f64> = random_sym(&vals, 3).iter().map(Scalar::to_f64).collect();
        let top = h.spectrum(&x, DEFAULT_TOL).unwrap().eigenvalues.max();
        prop_assume!(top > 0.0);
        let u: Vec<f64> = x.iter().map(|c| c / top).collect();
        let diff: Vec<f64> = h.e().iter().zip(&u).map(|(a, b)| a - b).collect();
        prop_assert_ne!(h.cone_membership(&diff, DEFAULT_TOL).unwrap().status, ConeStatus::Outside);
    }

    #[test]
    fn product_derivative_matches_iterated(seed in 0u64..500, size in 1usize..=3) {
        let inst = kls_det(3, size, VarMix::Rademacher, seed).unwrap();
        let h = inst.h();
        let x: Vec<Rational> = random_sym(&[(seed % 7) as i64 - 3, 2, -1, 4, 1, -2], size);
        let vs = inst.vectors();
        for s in [vec![], vec![0], vec![0, 1], vec![0, 1, 2]] {
            let refs: Vec<&[Rational]> = s.iter().map(|&i| vs[i].as_slice()).collect();
            prop_assert_eq!(
                h.rank1_product_derivative(&s, vs, &x).unwrap(),
                h.iterated_directional_derivative(&refs, &x).unwrap()
            );
        }
    }

    /// `E[h(x₁−ξv)h(x₂+ξv)] = h(x₁)h(x₂) − τ²·D_vh(x₁)·D_vh(x₂)` for centered `ξ`.
    #[test]
    fn signed_expectation_collapses(
        a in prop::collection::vec(-6i64..=6, 6),
        b in prop::collection::vec(-6i64..=6, 6),
        u in prop::collection::vec(-3i64..=3, 3),
        vals in prop::sample::subsequence(vec![-2i64, -1, 0, 1, 3], 2..=3),
        ws in prop::collection::vec(1i64..=4, 3),
    ) {
        prop_assume!(u.iter().any(|&x| x != 0));
        let h = HyperbolicInstance::<Rational>::determinant(3);
        let v = linalg::rank_one_vec(&rat_vec(&u, 1));
        let (x1, x2) = (random_sym(&a, 3), random_sym(&b, 3));
        let total: i64 = ws[..vals.len()].iter().sum();
        let var = RandomVariable::new(rat_vec(&vals, 1), ws[..vals.len()].iter().map(|&w| q(w, total)).collect()).unwrap();
        let mean = var.mean();
        let shift = |x: &[Rational], c: &Rational| -> Vec<Rational> {
            x.iter().zip(&v).map(|(p, r)| p.clone() + c.clone() * r.clone()).collect()
        };
        let lhs = var.support().iter().zip(var.probs()).fold(q(0, 1), |acc, (s, p)| {
            let xi = s.clone() - mean.clone();
            acc + p.clone() * h.eval(&shift(&x1, &-xi.clone())).unwrap() * h.eval(&shift(&x2, &xi)).unwrap()
        });
        // (1 − ½τ²∂ₜ²) at t = 0 of h(x₁+tv)h(x₂+tv)
        let prod = &h.restrict_line(&x1, &v).unwrap() * &h.restrict_line(&x2, &v).unwrap();
        let rhs = prod.coeff(0) - var.variance() * prod.coeff(2);
        prop_assert_eq!(lhs, rhs);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn closures_keep_stability(i in 0usize..3, c in 1i64..=4, val in -3i64..=3) {
        let p = fixture(&Fixture::SpanningTree(Graph::complete(3))).unwrap();
        let r = fixture(&Fixture::ElemSym { n: 3, k: 2 }).unwrap();
        let ops = [
            ClosureOp::Product,
            ClosureOp::Restrict { index: i, value: q(val, 2) },
            ClosureOp::OneMinusCD2 { index: i, c: q(c, 4) },
        ];
        for op in &ops {
            let out = closure_ops(&p, &r, op).unwrap();
            match op {
                ClosureOp::Product => prop_assert_eq!(out.total_degree(), p.total_degree() + r.total_degree()),
                ClosureOp::OneMinusCD2 { .. } => prop_assert!(out.total_degree() <= p.total_degree()),
                ClosureOp::Restrict { .. } => {}
            }
            if out.is_zero() {
                continue;
            }
            prop_assert!(stability_test(&out, 200, i as u64).unwrap().passed());
        }
    }

    #[test]
    fn barrier_restriction_is_stable(seed in 0u64..200) {
        let inst = kls_det(2, 2, VarMix::Mixed, seed).unwrap();
        prop_assert!(stability_test(&kls_barrier_poly(&inst).unwrap(), 300, seed).unwrap().passed());
    }

    #[test]
    fn descent_never_climbs(seed in 0u64..500, n in 1usize..=5) {
        let inst = kls_det(n, 2, VarMix::Mixed, seed).unwrap();
        let d = descend_family(&inst, DESCENT_TOL).unwrap();
        prop_assert!(d.leaf_max_root <= d.root_max_root + DESCENT_TOL);
    }

    #[test]
    fn search_is_sandwiched(seed in 0u64..500, n in 2usize..=5, delta in prop::sample::select(vec![0.25, 0.5, 1.0])) {
        let inst = kls_lorentz(n, 3, VarMix::Mixed, seed).unwrap().normalized().unwrap();
        let r = kadison_singer_search(&inst, &SolverConfig::with_delta(delta)).unwrap();
        let (_, best) = brute_force(&inst).unwrap();
        prop_assert!(r.certified >= best - 1e-9);
        prop_assert!(r.certified <= r.bound * (1.0 + 1e-9));
    }

    #[test]
    fn barrier_phi_matches_log_derivative(seed in 0u64..500, n in 1usize..=4) {
        let inst = kls_lorentz(n, 3, VarMix::Mixed, seed).unwrap().normalized().unwrap();
        let b = BarrierInstance::Kls(&inst);
        let pt = BarrierPoint::kls(&inst);
        for i in 0..n {
            let step = 1e-5;
            let at = |dz: f64| { let mut z = pt.z.clone(); z[i] += dz; b.eval(pt.x, &z).unwrap().ln() };
            let fd = (at(step) - at(-step)) / (2.0 * step);
            let an = phi(b, i, &pt).unwrap();
            prop_assert!((fd - an).abs() <= 1e-6 * an.abs().max(1e-2), "{} vs {}", fd, an);
        }
        prop_assert!(verify_bound_chain(b).unwrap().passed());
    }

    #[test]
    fn random_distributions_are_stable(seed in 0u64..1000) {
        let mu = random_sr_distribution(seed).unwrap();
        prop_assert!(stability_test(&mu.generating_polynomial(), 200, seed).unwrap().passed());
    }
}
