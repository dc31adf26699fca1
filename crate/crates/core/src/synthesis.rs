//! Monolithic supervisor synthesis and language-level predicates.

use crate::alphabet::{fmt_set, EventId, EventSet};
use crate::automaton::{
    closed_language_equal, explore, language_equal, language_subset, lift_to, project,
    selfloop_lift, sync_product, Automaton, StateId,
};
use crate::error::{DesError, Result};
use std::collections::{BTreeSet, HashSet, VecDeque};

/// Recognizer of the supremal controllable sublanguage together with the
/// (plant state, spec state) pair behind every supervisor state.
#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub supervisor: Automaton,
    pub product_map: Vec<(StateId, StateId)>,
}

/// Supremal controllable and nonblocking sublanguage of `Lm(plant) ∩ Lm(spec)`.
///
/// The spec may omit plant events; they are self-looped first. The result is
/// checked for controllability, nonblocking and containment before returning.
pub fn supcon(plant: &Automaton, spec: &Automaton) -> Result<SynthesisResult> {
    let plant_events = plant.alphabet().ids();
    let spec_events = spec.alphabet().ids();
    if !spec_events.is_subset(&plant_events) {
        let extra: EventSet = spec_events.difference(&plant_events).copied().collect();
        return Err(DesError::Domain(format!(
            "specification events {{{}}} not in plant alphabet",
            fmt_set(&extra)
        )));
    }
    let spec = lift_to(spec, plant.alphabet())?;
    let empty = || SynthesisResult {
        supervisor: Automaton::empty(plant.alphabet().clone()),
        product_map: Vec::new(),
    };
    if plant.is_empty() || spec.is_empty() {
        return Ok(empty());
    }

    let events: Vec<EventId> = plant_events.iter().copied().collect();
    let uncontrollable = plant.alphabet().uncontrollable();
    let (prod, keys) = explore(
        plant.alphabet().clone(),
        (plant.initial(), spec.initial()),
        |&(p, e)| {
            events
                .iter()
                .filter_map(|&ev| Some((ev, (plant.next(p, ev)?, spec.next(e, ev)?))))
                .collect()
        },
        |&(p, e)| plant.is_marked(p) && spec.is_marked(e),
    );

    let n = prod.state_count();
    let mut preds: Vec<Vec<StateId>> = vec![Vec::new(); n];
    for (s, _, t) in prod.transitions() {
        preds[t].push(s);
    }
    let mut alive = vec![true; n];
    loop {
        let mut changed = false;

        // nonblocking: keep states that reach a marked state within `alive`
        let mut coreach = vec![false; n];
        let mut stack: Vec<StateId> = (0..n).filter(|&s| alive[s] && prod.is_marked(s)).collect();
        for &s in &stack {
            coreach[s] = true;
        }
        while let Some(s) = stack.pop() {
            for &p in &preds[s] {
                if alive[p] && !coreach[p] {
                    coreach[p] = true;
                    stack.push(p);
                }
            }
        }
        for s in 0..n {
            if alive[s] && !coreach[s] {
                alive[s] = false;
                changed = true;
            }
        }

        // controllability: an uncontrollable plant move must stay inside `alive`
        for s in 0..n {
            if !alive[s] {
                continue;
            }
            let p = keys[s].0;
            let bad = uncontrollable.iter().any(|&u| {
                plant.next(p, u).is_some() && !prod.next(s, u).is_some_and(|t| alive[t])
            });
            if bad {
                alive[s] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    if !alive[prod.initial()] {
        return Ok(empty());
    }
    let (sup, sup_keys) = explore(
        plant.alphabet().clone(),
        prod.initial(),
        |&s| prod.transitions_from(s).filter(|&(_, t)| alive[t]).collect(),
        |&s| prod.is_marked(s),
    );
    let result = SynthesisResult {
        supervisor: sup,
        product_map: sup_keys.into_iter().map(|s| keys[s]).collect(),
    };

    if !result.supervisor.is_trim() {
        return Err(DesError::Invariant("supcon output is blocking".into()));
    }
    if !is_controllable(&result.supervisor, plant)? {
        return Err(DesError::Invariant("supcon output is not controllable".into()));
    }
    if !language_subset(&result.supervisor, &sync_product(plant, &spec)?)? {
        return Err(DesError::Invariant(
            "supcon output escapes Lm(plant) ∩ Lm(spec)".into(),
        ));
    }
    Ok(result)
}

/// Controllability of L(k) w.r.t. L(plant): no reachable pair has an
/// uncontrollable event enabled in the plant but disabled by `k`.
pub fn is_controllable(k: &Automaton, plant: &Automaton) -> Result<bool> {
    k.alphabet().ensure_same_events(plant.alphabet())?;
    if k.is_empty() || plant.is_empty() {
        return Ok(true);
    }
    let alphabet = plant.alphabet();
    Ok(pair_walk(k, plant).into_iter().all(|(x, q)| {
        plant
            .transitions_from(q)
            .all(|(e, _)| alphabet.is_controllable(e) || k.next(x, e).is_some())
    }))
}

/// Pairs `(a state, b state)` reachable by strings in L(a) ∩ L(b), in discovery order.
pub(crate) fn pair_walk(a: &Automaton, b: &Automaton) -> Vec<(StateId, StateId)> {
    let start = (a.initial(), b.initial());
    let mut seen = HashSet::from([start]);
    let mut order = vec![start];
    let mut queue = VecDeque::from([start]);
    while let Some((x, y)) = queue.pop_front() {
        for (e, nx) in a.transitions_from(x) {
            if let Some(ny) = b.next(y, e) {
                if seen.insert((nx, ny)) {
                    order.push((nx, ny));
                    queue.push_back((nx, ny));
                }
            }
        }
    }
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservationMode {
    /// Plain observability (ambient language = K).
    Observable,
    /// Relative observability w.r.t. an ambient language C with K ⊆ C ⊆ Lm(G).
    Relative,
    /// Normality: P⁻¹P(K̄) ∩ L(G) = K̄.
    Normal,
}

/// Observation properties of K (recognized by `k`) under the projection onto `keep`.
pub fn observability_check(
    k: &Automaton,
    ambient: &Automaton,
    plant: &Automaton,
    keep: &EventSet,
    mode: ObservationMode,
) -> Result<bool> {
    k.alphabet().ensure_same_events(plant.alphabet())?;
    let all = plant.alphabet().ids();
    if !keep.is_subset(&all) {
        return Err(DesError::Domain("observable events outside the alphabet".into()));
    }
    let k = k.trim();
    let ambient = match mode {
        ObservationMode::Observable => k.clone(),
        _ => {
            ambient.alphabet().ensure_same_events(plant.alphabet())?;
            ambient.trim()
        }
    };
    if !language_subset(&k, &ambient)? {
        return Err(DesError::Precondition("K is not contained in C".into()));
    }
    if !language_subset(&ambient, plant)? {
        return Err(DesError::Precondition("C is not contained in Lm(G)".into()));
    }
    if k.is_empty() {
        return Ok(true);
    }
    match mode {
        ObservationMode::Normal => {
            let observed = project(&k.prefix_closure(), keep)?;
            let lifted = selfloop_lift(&observed, &plant.alphabet().without(keep))?;
            let back = sync_product(&lifted, plant)?;
            closed_language_equal(&back, &k)
        }
        ObservationMode::Observable | ObservationMode::Relative => {
            Ok(relative_observable(&k, &ambient, plant, keep))
        }
    }
}

/// Search over string pairs (s, s') with P(s) = P(s'), s ∈ K̄, s' ∈ C̄.
fn relative_observable(k: &Automaton, c: &Automaton, g: &Automaton, keep: &EventSet) -> bool {
    type Tuple = (StateId, StateId, StateId, Option<StateId>);
    let events: Vec<EventId> = g.alphabet().ids().into_iter().collect();
    let start: Tuple = (k.initial(), c.initial(), g.initial(), Some(k.initial()));
    let mut seen = HashSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some((x, y, q, xs)) = queue.pop_front() {
        for &e in &events {
            // sσ ∈ K̄, s' ∈ C̄, s'σ ∈ L(G) ⇒ s'σ ∈ K̄
            if k.next(x, e).is_some()
                && g.next(q, e).is_some()
                && xs.and_then(|z| k.next(z, e)).is_none()
            {
                return false;
            }
        }
        // s ∈ K, s' ∈ C̄ ∩ Lm(G) ⇒ s' ∈ K
        if k.is_marked(x) && g.is_marked(q) && !xs.is_some_and(|z| k.is_marked(z)) {
            return false;
        }
        let mut push = |t: Tuple| {
            if seen.insert(t) {
                queue.push_back(t);
            }
        };
        for &e in &events {
            let s_step = k.next(x, e);
            let s2_step = c.next(y, e).and_then(|ny| Some((ny, g.next(q, e)?)));
            let xs_step = xs.and_then(|z| k.next(z, e));
            if keep.contains(&e) {
                if let (Some(nx), Some((ny, nq))) = (s_step, s2_step) {
                    push((nx, ny, nq, xs_step));
                }
            } else {
                if let Some(nx) = s_step {
                    push((nx, y, q, xs));
                }
                if let Some((ny, nq)) = s2_step {
                    push((x, ny, nq, xs_step));
                }
            }
        }
    }
    true
}

/// Supremal controllable and relatively observable sublanguage of
/// `C = Lm(plant) ∩ Lm(spec)`, with `C` as the ambient language and `keep`
/// the observable events.
///
/// Starts from supC and alternates two steps until nothing changes: refine
/// the candidate by the observer estimate of `C̄` and cut every transition or
/// marking the estimate cannot justify, then re-run supC on the result.
pub fn sup_relatively_observable(plant: &Automaton, spec: &Automaton, keep: &EventSet) -> Result<Automaton> {
    let all = plant.alphabet().ids();
    if !keep.is_subset(&all) {
        return Err(DesError::Domain("observable events outside the alphabet".into()));
    }
    let mut k = supcon(plant, spec)?.supervisor;
    if k.is_empty() {
        return Ok(k);
    }
    let spec = lift_to(spec, plant.alphabet())?;
    let c = sync_product(plant, &spec)?.trim();
    let mut c_plant = vec![0; c.state_count()];
    for (y, q) in pair_walk(&c, plant) {
        c_plant[y] = q;
    }

    type Estimate = BTreeSet<(Option<StateId>, StateId)>;
    loop {
        let closure = |mut est: Estimate, k: &Automaton| -> Estimate {
            let mut stack: Vec<_> = est.iter().copied().collect();
            while let Some((z, y)) = stack.pop() {
                for (e, ny) in c.transitions_from(y) {
                    if keep.contains(&e) {
                        continue;
                    }
                    let item = (z.and_then(|z| k.next(z, e)), ny);
                    if est.insert(item) {
                        stack.push(item);
                    }
                }
            }
            est
        };
        let start = (k.initial(), c.initial(), closure(BTreeSet::from([(Some(k.initial()), c.initial())]), &k));
        let mut cut = false;
        let (refined, keys) = explore(
            plant.alphabet().clone(),
            start,
            |(x, y, est)| {
                let mut out = Vec::new();
                for (e, nx) in k.transitions_from(*x) {
                    // σ stays only if every look-alike string in C̄ that the plant
                    // can extend by σ is also extended in K̄
                    let blocked = est.iter().any(|&(z, y2)| {
                        plant.next(c_plant[y2], e).is_some() && z.and_then(|z| k.next(z, e)).is_none()
                    });
                    if blocked {
                        cut = true;
                        continue;
                    }
                    let Some(ny) = c.next(*y, e) else { continue };
                    let next_est = if keep.contains(&e) {
                        let stepped = est
                            .iter()
                            .filter_map(|&(z, y2)| Some((z.and_then(|z| k.next(z, e)), c.next(y2, e)?)))
                            .collect();
                        closure(stepped, &k)
                    } else {
                        est.clone()
                    };
                    out.push((e, (nx, ny, next_est)));
                }
                out
            },
            |_| false,
        );
        let mut marked = Vec::new();
        for (s, (x, _, est)) in keys.iter().enumerate() {
            if !k.is_marked(*x) {
                continue;
            }
            // s ∈ K and a look-alike s' ∈ K̄ ∩ Lm(G) ∩ C outside K: unmark s
            let look_alike_unmarked = est
                .iter()
                .any(|&(z, y2)| c.is_marked(y2) && z.is_some_and(|z| !k.is_marked(z)));
            if !look_alike_unmarked {
                marked.push(s);
            } else {
                cut = true;
            }
        }
        if !cut {
            if !observability_check(&k, &c, plant, keep, ObservationMode::Relative)? {
                return Err(DesError::Invariant("fixpoint is not relatively observable".into()));
            }
            return Ok(k);
        }
        let transitions: Vec<_> = refined.transitions().map(|(s, e, t)| (s, e.0, t)).collect();
        let candidate = Automaton::new(
            plant.alphabet().clone(),
            refined.state_count(),
            0,
            marked,
            transitions,
        )?;
        k = supcon(plant, &candidate.trim())?.supervisor;
        if k.is_empty() {
            return Ok(k);
        }
    }
}

/// Lm(G) ∩ Lm(candidate) = Lm(SUP) and L(G) ∩ L(candidate) = L(SUP).
pub fn control_equivalent(plant: &Automaton, candidate: &Automaton, sup: &Automaton) -> Result<bool> {
    candidate.alphabet().ensure_same_events(plant.alphabet())?;
    sup.alphabet().ensure_same_events(plant.alphabet())?;
    language_equal(&sync_product(plant, candidate)?, sup)
}

/// `a` and `b` produce the same closed and marked behavior under `plant`.
pub fn equivalent_under(plant: &Automaton, a: &Automaton, b: &Automaton) -> Result<bool> {
    language_equal(&sync_product(plant, a)?, &sync_product(plant, b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{events, Alphabet};

    /// 0 -a(c)-> 1 -b(u)-> 0, marked {0}; a = 1, b = 2.
    fn cycle_plant() -> Automaton {
        Automaton::new(
            Alphabet::odd_controllable([1, 2], None),
            2,
            0,
            [0],
            [(0, 1, 1), (1, 2, 0)],
        )
        .unwrap()
    }

    #[test]
    fn spec_equal_to_plant_imposes_nothing() {
        let g = cycle_plant();
        let r = supcon(&g, &g).unwrap();
        assert!(language_equal(&r.supervisor, &g.trim()).unwrap());
        assert_eq!(r.product_map, vec![(0, 0), (1, 1)]);
    }

    #[test]
    fn spec_with_no_marking_gives_empty() {
        let g = cycle_plant();
        let e = Automaton::new(g.alphabet().clone(), 1, 0, Vec::new(), [(0, 1, 0), (0, 2, 0)]).unwrap();
        assert!(supcon(&g, &e).unwrap().supervisor.is_empty());
    }

    #[test]
    fn at_most_one_a() {
        let g = cycle_plant();
        // spec: a at most once, b free
        let e = Automaton::new(
            g.alphabet().clone(),
            2,
            0,
            [0, 1],
            [(0, 1, 1), (0, 2, 0), (1, 2, 1)],
        )
        .unwrap();
        let sup = supcon(&g, &e).unwrap().supervisor;
        let expected = Automaton::new(g.alphabet().clone(), 3, 0, [0, 2], [(0, 1, 1), (1, 2, 2)]).unwrap();
        assert!(language_equal(&sup, &expected).unwrap());
        assert_eq!(sup.state_count(), 3);
    }

    #[test]
    fn spec_outside_plant_alphabet_rejected() {
        let g = cycle_plant();
        let e = Automaton::universal(Alphabet::odd_controllable([1, 3], None));
        assert!(matches!(supcon(&g, &e), Err(DesError::Domain(_))));
    }

    #[test]
    fn disabling_uncontrollable_is_uncontrollable() {
        let g = cycle_plant();
        assert!(is_controllable(&g, &g).unwrap());
        let k = Automaton::new(g.alphabet().clone(), 2, 0, [0], [(0, 1, 1)]).unwrap();
        assert!(!is_controllable(&k, &g).unwrap());
    }

    #[test]
    fn full_observation_is_observable_and_normal() {
        let g = cycle_plant();
        let all = g.alphabet().ids();
        for mode in [
            ObservationMode::Observable,
            ObservationMode::Relative,
            ObservationMode::Normal,
        ] {
            assert!(observability_check(&g, &g, &g, &all, mode).unwrap());
        }
    }

    #[test]
    fn hidden_controllable_breaks_observability() {
        // plant: 0 -1-> 1 -3-> 2 and 0 -3-> 3 ; K allows 1 then 3 but not 3 first.
        let al = Alphabet::odd_controllable([1, 3], None);
        let g = Automaton::new(al.clone(), 4, 0, [0, 1, 2, 3], [(0, 1, 1), (1, 3, 2), (0, 3, 3)]).unwrap();
        let k = Automaton::new(al, 3, 0, [0, 1, 2], [(0, 1, 1), (1, 3, 2)]).unwrap();
        let keep = events([3]);
        assert!(!observability_check(&k, &k, &g, &keep, ObservationMode::Observable).unwrap());
        assert!(!observability_check(&k, &g, &g, &keep, ObservationMode::Normal).unwrap());
        assert!(observability_check(&k, &k, &g, &events([1, 3]), ObservationMode::Observable).unwrap());
    }

    #[test]
    fn containment_precondition() {
        let g = cycle_plant();
        let k = Automaton::universal(g.alphabet().clone());
        assert!(matches!(
            observability_check(&k, &g, &g, &g.alphabet().ids(), ObservationMode::Relative),
            Err(DesError::Precondition(_))
        ));
    }

    #[test]
    fn candidate_sup_is_equivalent_and_universal_is_not() {
        let g = cycle_plant();
        let e = Automaton::new(g.alphabet().clone(), 2, 0, [0, 1], [(0, 1, 1), (0, 2, 0), (1, 2, 1)]).unwrap();
        let sup = supcon(&g, &e).unwrap().supervisor;
        assert!(control_equivalent(&g, &sup, &sup).unwrap());
        let all = Automaton::universal(g.alphabet().clone());
        assert!(!control_equivalent(&g, &all, &sup).unwrap());
    }
}
