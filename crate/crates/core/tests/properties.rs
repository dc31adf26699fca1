mod common;

use common::*;
use deslok::alphabet::{Alphabet, EventId, EventSet};
use deslok::automaton::{des_isomorphism, language_equal, marked_language_equal, project, selfloop_lift, sync_product};
use deslok::eventred::{random_instance, relevant_events, vacuous_events, RandomParams};
use deslok::format::{parse_model, serialize_model};
use deslok::randtest::run_seed;
use deslok::report::analyze;
use deslok::synthesis::{observability_check, supcon, ObservationMode};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn trim_is_idempotent(a in arb_automaton(vec![1, 2, 3], 5)) {
        let t = a.trim();
        prop_assert_eq!(t.trim(), t.clone());
        prop_assert!(t.is_empty() || t.is_trim());
    }

    #[test]
    fn product_commutes_and_associates(
        a in arb_automaton(vec![1, 2], 3),
        b in arb_automaton(vec![2, 3], 3),
        c in arb_automaton(vec![3, 4], 3),
    ) {
        let ab = sync_product(&a, &b).unwrap();
        prop_assert!(language_equal(&ab, &sync_product(&b, &a).unwrap()).unwrap());
        let left = sync_product(&ab, &c).unwrap();
        let right = sync_product(&a, &sync_product(&b, &c).unwrap()).unwrap();
        prop_assert!(language_equal(&left, &right).unwrap());
    }

    #[test]
    fn lift_then_project_is_identity(a in arb_automaton(vec![1, 2], 4)) {
        let extra = Alphabet::odd_controllable([5, 6], None);
        let lifted = selfloop_lift(&a, &extra).unwrap();
        let back = project(&lifted, &a.alphabet().ids()).unwrap();
        prop_assert!(language_equal(&back, &a).unwrap());
    }

    #[test]
    fn isomorphic_implies_language_equal(
        (a, perm) in arb_automaton(vec![1, 2, 3], 5)
            // the isomorphism search needs every state reachable
            .prop_map(|a| a.accessible())
            .prop_flat_map(|a| {
                let n = a.state_count();
                (Just(a), Just((0..n).collect::<Vec<usize>>()).prop_shuffle())
            }),
    ) {
        let b = a.permuted(&perm).unwrap();
        prop_assert!(des_isomorphism(&a, &b).unwrap().is_some());
        prop_assert!(language_equal(&a, &b).unwrap());
    }

    #[test]
    fn model_text_round_trips(a in arb_automaton(vec![1, 2, 4, 7], 5)) {
        let a = a.named("m");
        let text = serialize_model(&a);
        let parsed = parse_model(&text).unwrap();
        prop_assert!(parsed.warnings.is_empty());
        prop_assert_eq!(&parsed.automaton, &a);
        prop_assert_eq!(serialize_model(&parsed.automaton), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn normal_relative_observable_chain(seed in 0u64..5000, mask in 0u32..256) {
        let inst = random_instance(seed, &RandomParams::default()).unwrap();
        let k = supcon(&inst.plant, &inst.spec).unwrap().supervisor;
        prop_assume!(!k.is_empty());
        let c = inst.plant.trim();
        let ids: Vec<EventId> = inst.plant.alphabet().ids().into_iter().collect();
        let keep: EventSet = ids.iter().enumerate().filter(|(i, _)| mask & (1 << i) != 0).map(|(_, &e)| e).collect();
        let check = |ambient, mode| observability_check(&k, ambient, &inst.plant, &keep, mode).unwrap();
        let normal = check(&k, ObservationMode::Normal);
        let relative = check(&c, ObservationMode::Relative);
        let observable = check(&k, ObservationMode::Observable);
        // normality only constrains K̄; the marking clause needs K = K̄ ∩ Lm(G)
        let closure_in_plant = sync_product(&k.prefix_closure(), &inst.plant).unwrap();
        let lm_closed = marked_language_equal(&closure_in_plant, &k).unwrap();
        prop_assert!(!(normal && lm_closed) || relative, "normal but not relatively observable");
        prop_assert!(!relative || observable, "relatively observable but not observable");
    }

    #[test]
    fn pipeline_invariants_hold(seed in 0u64..100_000) {
        let out = run_seed(seed, &RandomParams::default()).unwrap();
        let failed: Vec<_> = out.failed_checks().map(|c| c.name.clone()).collect();
        prop_assert!(failed.is_empty(), "{:?}", failed);
    }

    #[test]
    fn decomposable_wrt_relevant_alphabets(seed in 0u64..100_000) {
        // each local controller already implements its projection of the
        // supervisor, so the relevant alphabets always decompose it
        let inst = random_instance(seed, &RandomParams::default()).unwrap();
        let sup = supcon(&inst.plant, &inst.spec).unwrap().supervisor;
        prop_assume!(!sup.is_empty());
        let a = analyze(&inst.plant, &sup, &inst.agents, None).unwrap();
        prop_assert!(a.decomposability.closed);
    }

    #[test]
    fn vacuous_and_relevant_partition_alphabet(seed in 0u64..100_000) {
        let inst = random_instance(seed, &RandomParams::default()).unwrap();
        let sup = supcon(&inst.plant, &inst.spec).unwrap().supervisor;
        prop_assume!(!sup.is_empty());
        let v = vacuous_events(&sup, &inst.plant).unwrap();
        let r = relevant_events(&sup, &inst.plant).unwrap();
        prop_assert!(v.is_disjoint(&r));
        prop_assert_eq!(v.union(&r).copied().collect::<EventSet>(), inst.plant.alphabet().ids());
    }
}
