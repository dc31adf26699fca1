//! Deterministic automata (generators) and their language-level operations.
//!
//! States are dense indices. Every construction that builds a new state space
//! numbers states in breadth-first discovery order from the initial state,
//! exploring events in ascending id order, so results are reproducible.

use crate::alphabet::{fmt_set, Alphabet, EventId, EventSet};
use crate::error::{DesError, Result};
use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::hash::Hash;

pub type StateId = usize;

/// A deterministic generator `(Q, Σ, δ, q0, Qm)` with a partial transition function.
///
/// The distinguished EMPTY automaton (one unmarked state, no transitions,
/// `is_empty()` true) stands for the empty language; its closed language is
/// empty too.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Automaton {
    name: String,
    alphabet: Alphabet,
    initial: StateId,
    marked: Vec<bool>,
    delta: Vec<BTreeMap<EventId, StateId>>,
    empty: bool,
}

impl Automaton {
    pub fn new<M, T, E>(
        alphabet: Alphabet,
        states: usize,
        initial: StateId,
        marked: M,
        transitions: T,
    ) -> Result<Self>
    where
        M: IntoIterator<Item = StateId>,
        T: IntoIterator<Item = (StateId, E, StateId)>,
        E: Into<EventId>,
    {
        if states == 0 {
            return Err(DesError::Malformed("automaton needs at least one state".into()));
        }
        if initial >= states {
            return Err(DesError::Malformed(format!(
                "initial state {initial} out of range (states = {states})"
            )));
        }
        let mut mark = vec![false; states];
        for m in marked {
            if m >= states {
                return Err(DesError::Malformed(format!("marked state {m} out of range")));
            }
            mark[m] = true;
        }
        let mut delta = vec![BTreeMap::new(); states];
        for (from, ev, to) in transitions {
            let ev = ev.into();
            if from >= states || to >= states {
                return Err(DesError::Malformed(format!(
                    "transition ({from}, {ev}, {to}) out of range"
                )));
            }
            if !alphabet.contains(ev) {
                return Err(DesError::UnknownEvent(ev));
            }
            if delta[from].insert(ev, to).is_some() {
                return Err(DesError::Malformed(format!(
                    "duplicate transition on event {ev} at state {from}"
                )));
            }
        }
        Ok(Automaton {
            name: String::new(),
            alphabet,
            initial,
            marked: mark,
            delta,
            empty: false,
        })
    }

    /// The canonical EMPTY automaton over `alphabet`.
    pub fn empty(alphabet: Alphabet) -> Self {
        Automaton {
            name: String::new(),
            alphabet,
            initial: 0,
            marked: vec![false],
            delta: vec![BTreeMap::new()],
            empty: true,
        }
    }

    /// One marked state with every event of `alphabet` self-looped.
    pub fn universal(alphabet: Alphabet) -> Self {
        let ids = alphabet.ids();
        Automaton::new(alphabet, 1, 0, [0], ids.into_iter().map(|e| (0, e, 0)))
            .expect("self-loop automaton is well formed")
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn state_count(&self) -> usize {
        self.delta.len()
    }

    pub fn initial(&self) -> StateId {
        self.initial
    }

    /// True for the EMPTY automaton (empty closed and marked language).
    pub fn is_empty(&self) -> bool {
        self.empty
    }

    pub fn is_marked(&self, s: StateId) -> bool {
        self.marked[s]
    }

    pub fn marked_states(&self) -> Vec<StateId> {
        (0..self.state_count()).filter(|&s| self.marked[s]).collect()
    }

    pub fn next(&self, s: StateId, e: EventId) -> Option<StateId> {
        self.delta[s].get(&e).copied()
    }

    pub fn transitions_from(&self, s: StateId) -> impl Iterator<Item = (EventId, StateId)> + '_ {
        self.delta[s].iter().map(|(&e, &t)| (e, t))
    }

    /// All transitions as `(from, event, to)`, sorted.
    pub fn transitions(&self) -> impl Iterator<Item = (StateId, EventId, StateId)> + '_ {
        self.delta
            .iter()
            .enumerate()
            .flat_map(|(s, m)| m.iter().map(move |(&e, &t)| (s, e, t)))
    }

    pub fn transition_count(&self) -> usize {
        self.delta.iter().map(BTreeMap::len).sum()
    }

    /// Events defined at state `s`.
    pub fn enabled(&self, s: StateId) -> EventSet {
        self.delta[s].keys().copied().collect()
    }

    /// Events that label at least one transition.
    pub fn used_events(&self) -> EventSet {
        self.delta.iter().flat_map(|m| m.keys().copied()).collect()
    }

    /// Same automaton with every state marked: its marked language is L(self).
    pub fn prefix_closure(&self) -> Automaton {
        let mut out = self.clone();
        if !out.empty {
            out.marked.iter_mut().for_each(|m| *m = true);
        }
        out
    }

    /// Renumbers states: old state `s` becomes `perm[s]`.
    pub fn permuted(&self, perm: &[StateId]) -> Result<Automaton> {
        let n = self.state_count();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(DesError::Domain("not a permutation of the state set".into()));
        }
        let mut out = self.clone();
        out.initial = perm[self.initial];
        for s in 0..n {
            out.marked[perm[s]] = self.marked[s];
            out.delta[perm[s]] = self.delta[s].iter().map(|(&e, &t)| (e, perm[t])).collect();
        }
        Ok(out)
    }

    fn accessible_set(&self) -> Vec<bool> {
        let mut seen = vec![false; self.state_count()];
        let mut stack = vec![self.initial];
        seen[self.initial] = true;
        while let Some(s) = stack.pop() {
            for &t in self.delta[s].values() {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        seen
    }

    fn coaccessible_set(&self) -> Vec<bool> {
        let n = self.state_count();
        let mut preds = vec![Vec::new(); n];
        for (s, _, t) in self.transitions() {
            preds[t].push(s);
        }
        let mut seen = self.marked.clone();
        let mut stack: Vec<StateId> = (0..n).filter(|&s| seen[s]).collect();
        while let Some(s) = stack.pop() {
            for &p in &preds[s] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// Restriction to the states reachable from the initial state, renumbered.
    pub fn accessible(&self) -> Automaton {
        if self.empty {
            return self.clone();
        }
        let (a, _) = explore(
            self.alphabet.clone(),
            self.initial,
            |&s| self.transitions_from(s).collect(),
            |&s| self.marked[s],
        );
        a.named(self.name.clone())
    }

    /// Reachable and coreachable part; EMPTY if the initial state is blocking.
    pub fn trim(&self) -> Automaton {
        if self.empty {
            return self.clone();
        }
        let coacc = self.coaccessible_set();
        if !coacc[self.initial] {
            return Automaton::empty(self.alphabet.clone()).named(self.name.clone());
        }
        let (a, _) = explore(
            self.alphabet.clone(),
            self.initial,
            |&s| self.transitions_from(s).filter(|&(_, t)| coacc[t]).collect(),
            |&s| self.marked[s],
        );
        a.named(self.name.clone())
    }

    /// True if every state is reachable and coreachable (nonblocking and accessible).
    pub fn is_trim(&self) -> bool {
        self.empty
            || (self.accessible_set().into_iter().all(|b| b)
                && self.coaccessible_set().into_iter().all(|b| b))
    }

    /// True if every reachable state can reach a marked state.
    pub fn is_nonblocking(&self) -> bool {
        if self.empty {
            return true;
        }
        let acc = self.accessible_set();
        let coacc = self.coaccessible_set();
        acc.iter().zip(&coacc).all(|(&a, &c)| !a || c)
    }
}

/// Breadth-first construction of an automaton over an implicit state space.
///
/// `succ` must return at most one successor per event. States are numbered
/// in discovery order; the returned vector maps each state to its key.
pub(crate) fn explore<K, F, M>(
    alphabet: Alphabet,
    init: K,
    mut succ: F,
    mut marked: M,
) -> (Automaton, Vec<K>)
where
    K: Clone + Eq + Hash,
    F: FnMut(&K) -> Vec<(EventId, K)>,
    M: FnMut(&K) -> bool,
{
    let mut index: HashMap<K, StateId> = HashMap::new();
    let mut keys = vec![init.clone()];
    let mut queue = VecDeque::from([0usize]);
    index.insert(init, 0);
    let mut delta: Vec<BTreeMap<EventId, StateId>> = vec![BTreeMap::new()];
    while let Some(s) = queue.pop_front() {
        let mut out = succ(&keys[s]);
        out.sort_by_key(|(e, _)| *e);
        for (e, k) in out {
            let t = match index.get(&k) {
                Some(&t) => t,
                None => {
                    let t = keys.len();
                    index.insert(k.clone(), t);
                    keys.push(k);
                    delta.push(BTreeMap::new());
                    queue.push_back(t);
                    t
                }
            };
            let prev = delta[s].insert(e, t);
            debug_assert!(prev.is_none(), "explore produced a nondeterministic step");
        }
    }
    let marked = keys.iter().map(&mut marked).collect();
    (
        Automaton {
            name: String::new(),
            alphabet,
            initial: 0,
            marked,
            delta,
            empty: false,
        },
        keys,
    )
}

/// Synchronous product: shared events synchronize, private events interleave.
pub fn sync_product(a: &Automaton, b: &Automaton) -> Result<Automaton> {
    let alphabet = a.alphabet.union(&b.alphabet)?;
    if a.empty || b.empty {
        return Ok(Automaton::empty(alphabet));
    }
    let events: Vec<(EventId, bool, bool)> = alphabet
        .iter()
        .map(|(e, _)| (e, a.alphabet.contains(e), b.alphabet.contains(e)))
        .collect();
    let (prod, _) = explore(
        alphabet,
        (a.initial, b.initial),
        |&(x, y)| {
            events
                .iter()
                .filter_map(|&(e, in_a, in_b)| {
                    let nx = if in_a { a.next(x, e)? } else { x };
                    let ny = if in_b { b.next(y, e)? } else { y };
                    Some((e, (nx, ny)))
                })
                .collect()
        },
        |&(x, y)| a.marked[x] && b.marked[y],
    );
    Ok(prod)
}

/// Meet of automata over one common alphabet (intersection of both languages).
pub fn meet_all<'a, I>(automata: I) -> Result<Option<Automaton>>
where
    I: IntoIterator<Item = &'a Automaton>,
{
    let mut acc: Option<Automaton> = None;
    for a in automata {
        acc = Some(match acc {
            None => a.clone(),
            Some(m) => {
                m.alphabet.ensure_same_events(&a.alphabet)?;
                sync_product(&m, a)?
            }
        });
    }
    Ok(acc)
}

/// Natural projection onto `keep` by subset construction over erased events.
pub fn project(a: &Automaton, keep: &EventSet) -> Result<Automaton> {
    let all = a.alphabet.ids();
    if !keep.is_subset(&all) {
        let extra: EventSet = keep.difference(&all).copied().collect();
        return Err(DesError::Domain(format!(
            "projection events {{{}}} not in alphabet",
            fmt_set(&extra)
        )));
    }
    let alphabet = a.alphabet.restrict(keep);
    if a.empty {
        return Ok(Automaton::empty(alphabet));
    }
    let closure = |seed: BTreeSet<StateId>| -> Vec<StateId> {
        let mut set = seed;
        let mut stack: Vec<StateId> = set.iter().copied().collect();
        while let Some(s) = stack.pop() {
            for (e, t) in a.transitions_from(s) {
                if !keep.contains(&e) && set.insert(t) {
                    stack.push(t);
                }
            }
        }
        set.into_iter().collect()
    };
    let init = closure(BTreeSet::from([a.initial]));
    let (p, _) = explore(
        alphabet,
        init,
        |set: &Vec<StateId>| {
            keep.iter()
                .filter_map(|&e| {
                    let targets: BTreeSet<StateId> =
                        set.iter().filter_map(|&s| a.next(s, e)).collect();
                    (!targets.is_empty()).then(|| (e, closure(targets)))
                })
                .collect()
        },
        |set| set.iter().any(|&s| a.marked[s]),
    );
    Ok(p.named(a.name.clone()))
}

/// Inverse projection: self-loops every event of `extra` at every state.
pub fn selfloop_lift(a: &Automaton, extra: &Alphabet) -> Result<Automaton> {
    let overlap: EventSet = extra.ids().intersection(&a.alphabet.ids()).copied().collect();
    if !overlap.is_empty() {
        return Err(DesError::Domain(format!(
            "self-loop events {{{}}} already in alphabet",
            fmt_set(&overlap)
        )));
    }
    let mut out = a.clone();
    out.alphabet = a.alphabet.union(extra)?;
    if !out.empty {
        let extra_ids = extra.ids();
        for (s, m) in out.delta.iter_mut().enumerate() {
            m.extend(extra_ids.iter().map(|&e| (e, s)));
        }
    }
    Ok(out)
}

/// Lifts `a` to the events of `full` that it lacks.
pub fn lift_to(a: &Automaton, full: &Alphabet) -> Result<Automaton> {
    let missing = full.without(&a.alphabet.ids());
    // shared events must carry the same flags
    a.alphabet.union(full)?;
    selfloop_lift(a, &missing)
}

/// L(a) = L(b) and Lm(a) = Lm(b).
pub fn language_equal(a: &Automaton, b: &Automaton) -> Result<bool> {
    a.alphabet.ensure_same_events(&b.alphabet)?;
    if a.empty || b.empty {
        return Ok(a.empty == b.empty);
    }
    Ok(synchronized_search(a, b, |x, y| {
        let ex = a.delta[x].keys();
        let ey = b.delta[y].keys();
        a.marked[x] == b.marked[y] && ex.eq(ey)
    }))
}

/// L(a) ⊆ L(b) and Lm(a) ⊆ Lm(b).
pub fn language_subset(a: &Automaton, b: &Automaton) -> Result<bool> {
    a.alphabet.ensure_same_events(&b.alphabet)?;
    if a.empty {
        return Ok(true);
    }
    if b.empty {
        return Ok(false);
    }
    Ok(synchronized_search(a, b, |x, y| {
        (!a.marked[x] || b.marked[y]) && a.delta[x].keys().all(|e| b.delta[y].contains_key(e))
    }))
}

/// Lm(a) = Lm(b), ignoring blocking strings.
pub fn marked_language_equal(a: &Automaton, b: &Automaton) -> Result<bool> {
    language_equal(&a.trim(), &b.trim())
}

/// L(a) = L(b), ignoring marking.
pub fn closed_language_equal(a: &Automaton, b: &Automaton) -> Result<bool> {
    language_equal(&a.prefix_closure(), &b.prefix_closure())
}

/// Forward search over state pairs reached by common strings; `ok` must hold
/// at every visited pair. Pairs only advance on events defined in `a`; when
/// `ok` guarantees `b` also defines them the search never leaves the product.
fn synchronized_search<F>(a: &Automaton, b: &Automaton, ok: F) -> bool
where
    F: Fn(StateId, StateId) -> bool,
{
    let mut seen = BTreeSet::new();
    let mut stack = vec![(a.initial, b.initial)];
    seen.insert((a.initial, b.initial));
    while let Some((x, y)) = stack.pop() {
        if !ok(x, y) {
            return false;
        }
        for (e, nx) in a.transitions_from(x) {
            if let Some(ny) = b.next(y, e) {
                if seen.insert((nx, ny)) {
                    stack.push((nx, ny));
                }
            }
        }
    }
    true
}

/// State bijection θ witnessing DES-isomorphism: `a` state `s` maps to `b` state `θ[s]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateMap(pub Vec<StateId>);

impl StateMap {
    pub fn apply(&self, s: StateId) -> StateId {
        self.0[s]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &t)| i == t)
    }
}

/// Returns the isomorphism θ when `a` and `b` are DES-isomorphic.
///
/// Requires every state of both automata to be reachable; θ is then unique
/// and found by a parallel breadth-first traversal.
pub fn des_isomorphism(a: &Automaton, b: &Automaton) -> Result<Option<StateMap>> {
    a.alphabet.ensure_same_events(&b.alphabet)?;
    if a.empty || b.empty {
        return Ok((a.empty && b.empty).then(|| StateMap(vec![0])));
    }
    let n = a.state_count();
    if n != b.state_count() {
        return Ok(None);
    }
    let mut fwd: Vec<Option<StateId>> = vec![None; n];
    let mut bwd: Vec<Option<StateId>> = vec![None; n];
    let mut queue = VecDeque::from([(a.initial, b.initial)]);
    fwd[a.initial] = Some(b.initial);
    bwd[b.initial] = Some(a.initial);
    while let Some((x, y)) = queue.pop_front() {
        if a.marked[x] != b.marked[y] || !a.delta[x].keys().eq(b.delta[y].keys()) {
            return Ok(None);
        }
        for (e, nx) in a.transitions_from(x) {
            let ny = b.next(y, e).expect("event sets compared above");
            match (fwd[nx], bwd[ny]) {
                (None, None) => {
                    fwd[nx] = Some(ny);
                    bwd[ny] = Some(nx);
                    queue.push_back((nx, ny));
                }
                (Some(fy), Some(bx)) if fy == ny && bx == nx => {}
                _ => return Ok(None),
            }
        }
    }
    let theta: Option<Vec<StateId>> = fwd.into_iter().collect();
    Ok(theta.map(StateMap))
}
