mod common;

use common::*;
use deslok::alphabet::{Alphabet, EventId, EventSet};
use deslok::automaton::{language_equal, project, sync_product, Automaton};
use deslok::eventred::{random_instance, RandomParams};
use deslok::synthesis::supcon;
use proptest::prelude::*;

fn all_words(ids: &[EventId], n: usize) -> Vec<Word> {
    let mut out = vec![Word::new()];
    let mut layer = vec![Word::new()];
    for _ in 0..n {
        let mut next = Vec::new();
        for w in &layer {
            for &e in ids {
                let mut w2 = w.clone();
                w2.push(e);
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

#[test]
fn supcon_matches_bad_state_deletion() {
    let params = RandomParams::default();
    let mut compared = 0;
    for seed in 0..500 {
        let inst = random_instance(seed, &params).unwrap();
        if inst.plant.state_count() * inst.spec.state_count().max(1) > 64 * 64 {
            continue;
        }
        let ours = supcon(&inst.plant, &inst.spec).unwrap().supervisor;
        let oracle = brute_supcon(&inst.plant, &inst.spec);
        assert_eq!(ours.is_empty(), oracle.is_empty(), "seed {seed}");
        assert!(language_equal(&ours, &oracle).unwrap(), "seed {seed}");
        assert_eq!(strings(&ours, 8), strings(&oracle, 8), "seed {seed}");
        compared += 1;
    }
    assert!(compared >= 100, "only {compared} instances compared");
}

#[test]
fn brute_oracle_on_textbook_case() {
    // 0 -1(c)-> 1 -2(u)-> 0, 1 -4(u)-> 2; spec forbids 4
    let al = Alphabet::odd_controllable([1, 2, 4], None);
    let plant = Automaton::new(al.clone(), 3, 0, [0], [(0, 1, 1), (1, 2, 0), (1, 4, 2)]).unwrap();
    let spec = Automaton::new(al, 2, 0, [0], [(0, 1, 1), (1, 2, 0)]).unwrap();
    // state 1 leaks 4, so 1 is disabled and only the empty string remains
    let oracle = brute_supcon(&plant, &spec);
    assert_eq!((oracle.state_count(), oracle.transition_count()), (1, 0));
    assert!(oracle.is_marked(0));
    assert!(language_equal(&supcon(&plant, &spec).unwrap().supervisor, &oracle).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn language_equal_agrees_with_enumeration(
        a in arb_automaton(vec![1, 2, 3], 4),
        b in arb_automaton(vec![1, 2, 3], 4),
    ) {
        // distinguishing strings of two 4-state automata are at most 6 long
        let by_strings = strings(&a, 8) == strings(&b, 8);
        prop_assert_eq!(language_equal(&a, &b).unwrap(), by_strings);
        prop_assert!(language_equal(&a, &a).unwrap());
    }

    #[test]
    fn project_agrees_with_enumeration(a in arb_automaton(vec![1, 2, 3], 3)) {
        let keep: EventSet = [EventId(1), EventId(2)].into();
        let p = project(&a, &keep).unwrap();
        let full = strings(&a, 8);
        // every projected string of the original is accepted by the projection
        for w in &full.closed {
            let v = project_word(w, &keep);
            prop_assert!(accepts(&p, &v).is_some(), "{:?}", v);
        }
        for w in &full.marked {
            prop_assert_eq!(accepts(&p, &project_word(w, &keep)), Some(true));
        }
        // witnesses of projected strings up to length 2 fit in 8 events for 3 states
        let image: Lang = Lang {
            closed: full.closed.iter().map(|w| project_word(w, &keep)).collect(),
            marked: full.marked.iter().map(|w| project_word(w, &keep)).collect(),
        };
        let short = strings(&p, 2);
        prop_assert!(short.closed.is_subset(&image.closed));
        prop_assert!(short.marked.is_subset(&image.marked));
    }

    #[test]
    fn sync_agrees_with_enumeration(
        a in arb_automaton(vec![1, 2, 3], 3),
        b in arb_automaton(vec![2, 3, 4], 3),
    ) {
        let p = sync_product(&a, &b).unwrap();
        let ka: EventSet = a.alphabet().ids();
        let kb: EventSet = b.alphabet().ids();
        let ids: Vec<EventId> = p.alphabet().ids().into_iter().collect();
        for w in all_words(&ids, 5) {
            let expect = match (accepts(&a, &project_word(&w, &ka)), accepts(&b, &project_word(&w, &kb))) {
                (Some(x), Some(y)) => Some(x && y),
                _ => None,
            };
            prop_assert_eq!(accepts(&p, &w), expect, "{:?}", w);
        }
    }
}
