mod common;

use common::{corpus_instance, random_query, regimes, CorpusSpec};
use prcut::bruteforce::{bf_gamma, bf_min};
use prcut::instance::{enumerate_feasible, ConstraintSpec, DEFAULT_ENUMERATION_LIMIT as LIMIT};
use prcut::master::{master_objective, solve_master};
use prcut::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SMALL: CorpusSpec = CorpusSpec {
    n_min: 2,
    n_max: 8,
    z_max: 7,
    damping: (0.5, 0.95),
};

fn arb_problem() -> impl Strategy<Value = Problem> {
    (any::<u64>(), any::<u64>()).prop_map(|(salt, i)| corpus_instance(&SMALL, salt, i))
}

fn arb_problem_with_selection() -> impl Strategy<Value = (Problem, Selection)> {
    arb_problem().prop_flat_map(|p| {
        let z = p.instance.fragile_count();
        (Just(p), prop::collection::vec(any::<bool>(), z).prop_map(Selection::new))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_instances_respect_their_spec(n in 2usize..10, p in 0.0f64..0.6, seed in any::<u64>(), want in 0usize..12) {
        let spec = GeneratorSpec::new(n, p, want, seed);
        match generate_random(&spec) {
            Ok(prob) => {
                prop_assert_eq!(prob.instance.fragile_count(), want);
                let fixed: std::collections::HashSet<_> = prob.instance.fixed_edges().iter().collect();
                prop_assert!(prob.instance.fragile_edges().iter().all(|e| !fixed.contains(e)));
                prop_assert_eq!(&Problem::from_json(&prob.to_json()).unwrap(), &prob);
            }
            Err(Error::InfeasibleSpec(_)) => prop_assert!(want > 0),
            Err(e) => prop_assert!(false, "unexpected {e}"),
        }
    }

    #[test]
    fn enumeration_matches_filtering(seed in any::<u64>(), z in 0usize..8, k in 0i64..8) {
        let p = common::generated_with(ConstraintSpec::Cover { size: 3 }, 6, z, seed);
        let cons = p.constraints.clone().with_row(vec![1; z], Sense::Le, k);
        let listed: Vec<_> = enumerate_feasible(&cons, z, LIMIT).unwrap().collect();
        let filtered: Vec<_> = (0..1u64 << z)
            .map(|i| Selection::from_index(i, z))
            .filter(|y| is_feasible(&cons, y).unwrap())
            .collect();
        prop_assert_eq!(listed, filtered);
    }

    #[test]
    fn kac_relation((p, y) in arb_problem_with_selection()) {
        let fr = first_return_time(&p.instance, &y).unwrap();
        let pi = stationary(&p.instance, &y, 1e-12, 1_000_000).unwrap();
        prop_assert!((pi[p.instance.target()] * fr - 1.0).abs() < 1e-8);
        prop_assert!(fr >= 1.0);
    }

    #[test]
    fn oracle_relaxation_properties((p, y) in arb_problem_with_selection(), qseed in any::<u64>()) {
        let inst = &p.instance;
        let z = inst.fragile_count();
        let mut rng = ChaCha8Rng::seed_from_u64(qseed);
        let query = random_query(&mut rng, z);
        let g = gamma(inst, &query).unwrap();
        let free = gamma(inst, &GammaQuery::unconstrained()).unwrap().value;
        prop_assert!(g.value >= free - 1e-12);
        prop_assert!(query.admits(&g.argmin));
        prop_assert!((g.value - first_return_time(inst, &g.argmin).unwrap()).abs() < 1e-9);
        prop_assert!((g.value - bf_gamma(inst, &query, LIMIT).unwrap()).abs() <= 1e-9 * g.value);

        // Dropping forcings can only lower the minimum.
        let mut looser = query.clone();
        if let Some(&e) = looser.forced_on.iter().next() {
            looser.forced_on.remove(&e);
        }
        if let Some(&e) = looser.forced_off.iter().next() {
            looser.forced_off.remove(&e);
        }
        prop_assert!(gamma(inst, &looser).unwrap().value <= g.value + 1e-12);

        if query.admits(&y) {
            prop_assert!(g.value <= first_return_time(inst, &y).unwrap() + 1e-12);
        }
        for w in g.trace.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
    }

    #[test]
    fn cuts_are_valid_tight_and_ordered((p, ybar) in arb_problem_with_selection()) {
        let inst = &p.instance;
        let z = inst.fragile_count();
        let fr_bar = first_return_time(inst, &ybar).unwrap();
        let l = l_shaped_cut(inst, &ybar, min_unconstrained(inst).unwrap()).unwrap();
        let n = new_cut(inst, &ybar).unwrap();
        let f = lifted_cut(inst, &ybar, &LiftOrdering::by_index(&ybar)).unwrap();
        for y in (0..1u64 << z).map(|i| Selection::from_index(i, z)) {
            let fr = first_return_time(inst, &y).unwrap();
            let (el, en, ef) = (l.eval(&y).unwrap(), n.eval(&y).unwrap(), f.eval(&y).unwrap());
            prop_assert!(fr >= ef - 1e-8);
            prop_assert!(ef >= en - 1e-9 && en >= el - 1e-9);
        }
        for cut in [&l, &n, &f] {
            prop_assert!((cut.eval(&ybar).unwrap() - fr_bar).abs() < 1e-9);
        }
        prop_assert_eq!(n.gamma_calls, z);
        prop_assert_eq!(f.gamma_calls, z);
    }

    #[test]
    fn solver_sandwich_and_progress(p in arb_problem(), rseed in any::<u64>(), family_ix in 0usize..3) {
        let inst = &p.instance;
        let z = inst.fragile_count();
        let mut rng = ChaCha8Rng::seed_from_u64(rseed);
        let family = CutFamily::ALL[family_ix];
        for (_, cons) in regimes(&p, &mut rng) {
            let (_, opt) = bf_min(inst, &cons, LIMIT).unwrap();
            let r = solve(inst, &cons, &SolveOptions::new(family)).unwrap();
            prop_assert_eq!(r.status, SolveStatus::Optimal);
            prop_assert!((r.best_value - opt).abs() <= 1e-9);
            prop_assert!((first_return_time(inst, &r.best_y).unwrap() - r.best_value).abs() < 1e-9);
            for (lb, ub) in r.lower_bounds.iter().zip(&r.upper_bounds) {
                prop_assert!(*lb <= opt + 1e-9 && opt <= *ub + 1e-12);
            }
            for w in r.lower_bounds.windows(2) {
                prop_assert!(w[1] >= w[0]);
            }
            for w in r.upper_bounds.windows(2) {
                prop_assert!(w[1] <= w[0]);
            }
            let feasible = enumerate_feasible(&cons, z, LIMIT).unwrap().count();
            prop_assert!(r.iterations <= feasible + 1);

            // Re-separating at each recorded incumbent lifts the master's
            // value there to at least its return time.
            let lower = min_unconstrained(inst).unwrap();
            let cuts: Vec<Cut> = r
                .incumbents
                .iter()
                .map(|y| prcut::solver::separate(inst, y, family, OrderingStrategy::Index, lower).unwrap().0)
                .collect();
            for (k, y) in r.incumbents.iter().enumerate() {
                let theta = master_objective(&cuts[..=k], y).unwrap();
                prop_assert!(theta >= first_return_time(inst, y).unwrap() - 1e-9);
            }
            let m = solve_master(&cuts, &cons, z).unwrap();
            prop_assert!((m.theta - r.lower_bounds.last().unwrap()).abs() < 1e-12);
        }
    }
}

#[test]
fn unconstrained_solve_equals_oracle_minimum() {
    for i in 0..25 {
        let p = corpus_instance(&SMALL, 99, i);
        let best = min_unconstrained(&p.instance).unwrap();
        for family in CutFamily::ALL {
            let r = solve(&p.instance, &ConstraintSet::unconstrained(), &SolveOptions::new(family)).unwrap();
            assert!((r.best_value - best).abs() <= 1e-9, "instance {i} {family}");
        }
    }
}

#[test]
fn budgeted_solve_matches_enumeration() {
    for seed in 0..10 {
        let p = common::generated_with(ConstraintSpec::Cardinality { sense: Sense::Le, k: 2 }, 8, 6, seed);
        let feasible = enumerate_feasible(&p.constraints, 6, LIMIT).unwrap().count();
        assert_eq!(feasible, 1 + 6 + 15);
        let (_, opt) = bf_min(&p.instance, &p.constraints, LIMIT).unwrap();
        for family in CutFamily::ALL {
            let r = solve(&p.instance, &p.constraints, &SolveOptions::new(family)).unwrap();
            assert!((r.best_value - opt).abs() <= 1e-9, "seed {seed} {family}");
        }
    }
}

/// The corpora are only meaningful if the stronger families actually
/// tighten coefficients somewhere.
#[test]
fn lifting_strictly_tightens_on_some_instances() {
    let mut tighter_new = 0;
    let mut tighter_lift = 0;
    for i in 0..40 {
        let p = corpus_instance(&SMALL, 5, i);
        let inst = &p.instance;
        let z = inst.fragile_count();
        let ybar = Selection::zeros(z);
        let lower = min_unconstrained(inst).unwrap();
        let l = l_shaped_cut(inst, &ybar, lower).unwrap().incumbent_form_coeffs();
        let n = new_cut(inst, &ybar).unwrap().incumbent_form_coeffs();
        let f = lifted_cut(inst, &ybar, &LiftOrdering::by_index(&ybar))
            .unwrap()
            .incumbent_form_coeffs();
        tighter_new += (0..z).filter(|&e| n[e] > l[e] + 1e-9).count();
        tighter_lift += (0..z).filter(|&e| f[e] > n[e] + 1e-9).count();
    }
    assert!(tighter_new > 0 && tighter_lift > 0, "{tighter_new} {tighter_lift}");
}

#[test]
fn master_is_deterministic() {
    let p = corpus_instance(&SMALL, 1, 1);
    let z = p.instance.fragile_count();
    let cuts = vec![new_cut(&p.instance, &Selection::zeros(z)).unwrap()];
    let a = solve_master(&cuts, &ConstraintSet::unconstrained(), z).unwrap();
    let b = solve_master(&cuts, &ConstraintSet::unconstrained(), z).unwrap();
    assert_eq!(a, b);
}
