//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use deslok::alphabet::{Alphabet, EventId, EventSet};
use deslok::automaton::{Automaton, StateId};
use deslok::reduce::{Congruence, ControlData, Scope};
use proptest::prelude::*;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

pub type Word = Vec<EventId>;

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Lang {
    pub closed: BTreeSet<Word>,
    pub marked: BTreeSet<Word>,
}

/// All strings of `a` up to length `n`.
pub fn strings(a: &Automaton, n: usize) -> Lang {
    let mut lang = Lang::default();
    if a.is_empty() {
        return lang;
    }
    let mut frontier = vec![(Word::new(), a.initial())];
    for depth in 0..=n {
        let mut next = Vec::new();
        for (w, s) in frontier {
            if a.is_marked(s) {
                lang.marked.insert(w.clone());
            }
            lang.closed.insert(w.clone());
            if depth < n {
                for (e, t) in a.transitions_from(s) {
                    let mut w2 = w.clone();
                    w2.push(e);
                    next.push((w2, t));
                }
            }
        }
        frontier = next;
    }
    lang
}

pub fn project_word(w: &Word, keep: &EventSet) -> Word {
    w.iter().copied().filter(|e| keep.contains(e)).collect()
}

/// `None` if `a` cannot run `w`, otherwise whether `w` ends marked.
pub fn accepts(a: &Automaton, w: &Word) -> Option<bool> {
    if a.is_empty() {
        return None;
    }
    let mut s = a.initial();
    for &e in w {
        s = a.next(s, e)?;
    }
    Some(a.is_marked(s))
}

/// Supremal controllable sublanguage by bad-state deletion on the explicit
/// product of plant and spec (spec over the plant alphabet).
pub fn brute_supcon(plant: &Automaton, spec: &Automaton) -> Automaton {
    let alphabet = plant.alphabet().clone();
    if plant.is_empty() || spec.is_empty() {
        return Automaton::empty(alphabet);
    }
    let mut ids: BTreeMap<(StateId, StateId), usize> = BTreeMap::new();
    let mut pairs = Vec::new();
    let start = (plant.initial(), spec.initial());
    ids.insert(start, 0);
    pairs.push(start);
    let mut i = 0;
    while i < pairs.len() {
        let (q, x) = pairs[i];
        for (e, q2) in plant.transitions_from(q) {
            if let Some(x2) = spec.next(x, e) {
                if !ids.contains_key(&(q2, x2)) {
                    ids.insert((q2, x2), pairs.len());
                    pairs.push((q2, x2));
                }
            }
        }
        i += 1;
    }
    let n = pairs.len();
    let mut alive = vec![true; n];
    loop {
        let mut changed = false;
        // uncontrollable escape
        for s in 0..n {
            if !alive[s] {
                continue;
            }
            let (q, x) = pairs[s];
            let bad = plant.transitions_from(q).any(|(e, q2)| {
                !alphabet.is_controllable(e)
                    && match spec.next(x, e) {
                        None => true,
                        Some(x2) => !alive[ids[&(q2, x2)]],
                    }
            });
            if bad {
                alive[s] = false;
                changed = true;
            }
        }
        // coreachability
        let mut co = vec![false; n];
        for s in 0..n {
            co[s] = alive[s] && plant.is_marked(pairs[s].0) && spec.is_marked(pairs[s].1);
        }
        loop {
            let mut grew = false;
            for s in 0..n {
                if !alive[s] || co[s] {
                    continue;
                }
                let (q, x) = pairs[s];
                let reaches = plant.transitions_from(q).any(|(e, q2)| {
                    spec.next(x, e).map_or(false, |x2| co[ids[&(q2, x2)]])
                });
                if reaches {
                    co[s] = true;
                    grew = true;
                }
            }
            if !grew {
                break;
            }
        }
        for s in 0..n {
            if alive[s] && !co[s] {
                alive[s] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    if !alive[0] {
        return Automaton::empty(alphabet);
    }
    let mut trans = Vec::new();
    for s in 0..n {
        if !alive[s] {
            continue;
        }
        let (q, x) = pairs[s];
        for (e, q2) in plant.transitions_from(q) {
            if let Some(x2) = spec.next(x, e) {
                let t = ids[&(q2, x2)];
                if alive[t] {
                    trans.push((s, e, t));
                }
            }
        }
    }
    let marked = (0..n).filter(|&s| alive[s] && plant.is_marked(pairs[s].0) && spec.is_marked(pairs[s].1));
    Automaton::new(alphabet, n, 0, marked, trans).unwrap().trim()
}

/// Smallest congruence (by cell count) passing `Congruence::check`, by
/// enumerating every set partition. Only for small supervisors.
pub fn min_congruence_cells(sup: &Automaton, data: &ControlData, scope: &Scope) -> usize {
    fn rec(
        i: usize,
        used: usize,
        assign: &mut Vec<usize>,
        best: &mut usize,
        sup: &Automaton,
        data: &ControlData,
        scope: &Scope,
    ) {
        if used >= *best {
            return;
        }
        if i == assign.len() {
            if Congruence::from_assignment(assign).check(sup, data, scope).is_ok() {
                *best = used;
            }
            return;
        }
        for c in 0..=used {
            assign[i] = c;
            rec(i + 1, used.max(c + 1), assign, best, sup, data, scope);
        }
    }
    let n = sup.state_count();
    let mut best = n;
    let mut assign = vec![0; n];
    rec(1, 1, &mut assign, &mut best, sup, data, scope);
    best
}

/// Odd ids controllable.
pub fn small_alphabet(ids: &[u32]) -> Alphabet {
    Alphabet::odd_controllable(ids.iter().copied(), None)
}

/// Random deterministic automaton over `ids` with up to `max_states` states.
pub fn arb_automaton(ids: Vec<u32>, max_states: usize) -> impl Strategy<Value = Automaton> {
    (1..=max_states).prop_flat_map(move |n| {
        let ids = ids.clone();
        let m = ids.len();
        (
            proptest::collection::vec(proptest::option::weighted(0.5, 0..n), n * m),
            proptest::collection::vec(any::<bool>(), n),
        )
            .prop_map(move |(targets, marked)| {
                let mut trans = Vec::new();
                for s in 0..n {
                    for (j, &e) in ids.iter().enumerate() {
                        if let Some(t) = targets[s * m + j] {
                            trans.push((s, e, t));
                        }
                    }
                }
                let marks = (0..n).filter(|&s| marked[s]);
                Automaton::new(small_alphabet(&ids), n, 0, marks, trans).unwrap()
            })
    })
}

/// Breadth-first reachable state count, for sanity checks.
pub fn reachable(a: &Automaton) -> usize {
    let mut seen = BTreeSet::from([a.initial()]);
    let mut queue = VecDeque::from([a.initial()]);
    while let Some(s) = queue.pop_front() {
        for (_, t) in a.transitions_from(s) {
            if seen.insert(t) {
                queue.push_back(t);
            }
        }
    }
    seen.len()
}
