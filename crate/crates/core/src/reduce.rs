//! Supervisor reduction by control congruences.
//!
//! Control data `E`, `D`, `D^k`, `M`, `T` is extracted from the supervisor
//! and the plant; states that are control consistent are greedily lumped into
//! cells closed under transitions, and the quotient generator is induced on
//! the cells.

use crate::alphabet::{AgentPartition, EventSet};
use crate::automaton::{Automaton, StateId};
use crate::error::{DesError, Result};
use crate::synthesis::{control_equivalent, pair_walk};
use std::collections::{BTreeMap, VecDeque};

/// Which disablement data the consistency relation looks at.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Scope {
    /// All disabled events `D(x)`.
    Global,
    /// Only the disabled controllable events of one agent, `D^k(x)`.
    Agent(String),
    /// As `Agent`, without the marking condition: the agent's controller
    /// leaves marking to the others.
    AgentControlOnly(String),
}

impl Scope {
    fn checks_marking(&self) -> bool {
        !matches!(self, Scope::AgentControlOnly(_))
    }
}

/// Per-state control information of a supervisor.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlData {
    pub enabled: Vec<EventSet>,
    pub disabled: Vec<EventSet>,
    pub per_agent_disabled: BTreeMap<String, Vec<EventSet>>,
    pub marked_in_sup: Vec<bool>,
    pub marked_in_plant: Vec<bool>,
}

impl ControlData {
    /// Walks the synchronous product of `sup` and `plant`.
    ///
    /// `D(x)` collects every plant-enabled event undefined at `x` over all
    /// plant states reached together with `x`.
    pub fn compute(sup: &Automaton, plant: &Automaton, agents: &AgentPartition) -> Result<Self> {
        sup.alphabet().ensure_same_events(plant.alphabet())?;
        let n = sup.state_count();
        let mut data = ControlData {
            enabled: (0..n).map(|x| sup.enabled(x)).collect(),
            disabled: vec![EventSet::new(); n],
            per_agent_disabled: BTreeMap::new(),
            marked_in_sup: (0..n).map(|x| sup.is_marked(x)).collect(),
            marked_in_plant: vec![false; n],
        };
        if !sup.is_empty() {
            for (x, q) in pair_walk(sup, plant) {
                for (e, _) in sup.transitions_from(x) {
                    if plant.next(q, e).is_none() {
                        return Err(DesError::Precondition(format!(
                            "supervisor enables event {e} where the plant cannot execute it"
                        )));
                    }
                }
                for (e, _) in plant.transitions_from(q) {
                    if sup.next(x, e).is_none() {
                        data.disabled[x].insert(e);
                    }
                }
                data.marked_in_plant[x] |= plant.is_marked(q);
            }
        }
        for (name, _) in agents.iter() {
            let own = agents.controllable_of(name, sup.alphabet());
            let dk = data
                .disabled
                .iter()
                .map(|d| d.intersection(&own).copied().collect())
                .collect();
            data.per_agent_disabled.insert(name.to_owned(), dk);
        }
        Ok(data)
    }

    pub fn state_count(&self) -> usize {
        self.enabled.len()
    }

    pub fn disabled_in(&self, x: StateId, scope: &Scope) -> &EventSet {
        match scope {
            Scope::Global => &self.disabled[x],
            Scope::Agent(k) | Scope::AgentControlOnly(k) => &self.per_agent_disabled[k][x],
        }
    }

    pub fn has_scope(&self, scope: &Scope) -> bool {
        match scope {
            Scope::Global => true,
            Scope::Agent(k) | Scope::AgentControlOnly(k) => self.per_agent_disabled.contains_key(k),
        }
    }
}

/// Control consistency of two supervisor states under `scope`.
pub fn consistent(x: StateId, y: StateId, data: &ControlData, scope: &Scope) -> bool {
    let dx = data.disabled_in(x, scope);
    let dy = data.disabled_in(y, scope);
    data.enabled[x].is_disjoint(dy)
        && data.enabled[y].is_disjoint(dx)
        && (!scope.checks_marking()
            || data.marked_in_plant[x] != data.marked_in_plant[y]
            || data.marked_in_sup[x] == data.marked_in_sup[y])
}

/// A partition of supervisor states into control-consistent cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Congruence {
    cells: Vec<Vec<StateId>>,
    index: Vec<usize>,
}

impl Congruence {
    pub fn identity(states: usize) -> Self {
        Congruence {
            cells: (0..states).map(|s| vec![s]).collect(),
            index: (0..states).collect(),
        }
    }

    /// Builds a congruence from a cell id per state. Cell ids need not be dense.
    pub fn from_assignment(assignment: &[usize]) -> Self {
        let mut renumber: BTreeMap<usize, usize> = BTreeMap::new();
        let mut cells: Vec<Vec<StateId>> = Vec::new();
        let mut index = Vec::with_capacity(assignment.len());
        for (s, &c) in assignment.iter().enumerate() {
            let id = *renumber.entry(c).or_insert_with(|| {
                cells.push(Vec::new());
                cells.len() - 1
            });
            cells[id].push(s);
            index.push(id);
        }
        Congruence { cells, index }
    }

    pub fn cells(&self) -> &[Vec<StateId>] {
        &self.cells
    }

    pub fn cell_of(&self, s: StateId) -> usize {
        self.index[s]
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Renumbers cells in breadth-first order of the induced transition graph.
    fn canonical(&self, sup: &Automaton) -> Congruence {
        let m = self.cells.len();
        let mut order = vec![usize::MAX; m];
        let mut next = 0;
        let mut queue = VecDeque::new();
        // cells holding only unreachable states go last
        for root in std::iter::once(self.index[sup.initial()]).chain(0..m) {
            if order[root] != usize::MAX {
                continue;
            }
            order[root] = next;
            next += 1;
            queue.push_back(root);
            while let Some(c) = queue.pop_front() {
                let mut succ: BTreeMap<_, usize> = BTreeMap::new();
                for &x in &self.cells[c] {
                    for (e, t) in sup.transitions_from(x) {
                        succ.entry(e).or_insert(self.index[t]);
                    }
                }
                for d in succ.into_values() {
                    if order[d] == usize::MAX {
                        order[d] = next;
                        next += 1;
                        queue.push_back(d);
                    }
                }
            }
        }
        let index: Vec<usize> = self.index.iter().map(|&c| order[c]).collect();
        let mut cells = vec![Vec::new(); m];
        for (s, &c) in index.iter().enumerate() {
            cells[c].push(s);
        }
        Congruence { cells, index }
    }

    /// Structural check: disjoint nonempty cover, pairwise consistency and the
    /// deterministic-successor condition.
    pub fn check(&self, sup: &Automaton, data: &ControlData, scope: &Scope) -> Result<()> {
        let n = sup.state_count();
        if self.index.len() != n {
            return Err(DesError::Invariant("congruence does not cover the state set".into()));
        }
        let mut count = 0;
        for (c, cell) in self.cells.iter().enumerate() {
            if cell.is_empty() {
                return Err(DesError::Invariant(format!("cell {c} is empty")));
            }
            for &x in cell {
                count += 1;
                if self.index[x] != c {
                    return Err(DesError::Invariant(format!("state {x} indexed to wrong cell")));
                }
            }
            for (i, &x) in cell.iter().enumerate() {
                for &y in &cell[i + 1..] {
                    if !consistent(x, y, data, scope) {
                        return Err(DesError::Invariant(format!(
                            "states {x} and {y} share cell {c} but are not consistent"
                        )));
                    }
                }
            }
            let mut succ = BTreeMap::new();
            for &x in cell {
                for (e, t) in sup.transitions_from(x) {
                    if *succ.entry(e).or_insert(self.index[t]) != self.index[t] {
                        return Err(DesError::Invariant(format!(
                            "cell {c} has successors in two cells on event {e}"
                        )));
                    }
                }
            }
        }
        if count != n {
            return Err(DesError::Invariant("cells overlap".into()));
        }
        Ok(())
    }
}

/// Mutable partition used while merging.
#[derive(Clone)]
struct Partition {
    cell: Vec<usize>,
    members: Vec<Vec<StateId>>,
}

impl Partition {
    /// Merges the cells of `x` and `y` and everything the successor condition
    /// forces along with them; `None` if some forced pair is inconsistent.
    fn merged(&self, x: StateId, y: StateId, sup: &Automaton, data: &ControlData, scope: &Scope) -> Option<Partition> {
        let mut p = self.clone();
        let mut work = vec![(x, y)];
        while let Some((a, b)) = work.pop() {
            let (ca, cb) = (p.cell[a], p.cell[b]);
            if ca == cb {
                continue;
            }
            let (keep, gone) = if ca < cb { (ca, cb) } else { (cb, ca) };
            for &u in &p.members[keep] {
                for &v in &p.members[gone] {
                    if !consistent(u, v, data, scope) {
                        return None;
                    }
                }
            }
            let moved = std::mem::take(&mut p.members[gone]);
            for &v in &moved {
                p.cell[v] = keep;
            }
            p.members[keep].extend(moved);
            let mut first: BTreeMap<_, StateId> = BTreeMap::new();
            for &u in &p.members[keep] {
                for (e, t) in sup.transitions_from(u) {
                    let t0 = *first.entry(e).or_insert(t);
                    if p.cell[t0] != p.cell[t] {
                        work.push((t0, t));
                    }
                }
            }
        }
        Some(p)
    }
}

/// Greedy control congruence: pairs `(x, y)`, `x < y`, are tried in ascending
/// order; a merge is kept only if the transitive successor merges it forces
/// are all consistent. Not minimal in general.
pub fn build_congruence(sup: &Automaton, data: &ControlData, scope: &Scope) -> Congruence {
    let order: Vec<StateId> = (0..sup.state_count()).collect();
    build_congruence_ordered(sup, data, scope, &order)
}

/// Greedy congruence with pairs tried in the order `order` lists the states:
/// `(order[i], order[j])` for `i < j`, lexicographically.
pub fn build_congruence_ordered(sup: &Automaton, data: &ControlData, scope: &Scope, order: &[StateId]) -> Congruence {
    let start = Congruence::identity(sup.state_count());
    build_congruence_from(sup, data, scope, &start, order)
}

/// Greedy coarsening of `start`, which must itself be a congruence for `scope`.
pub fn build_congruence_from(
    sup: &Automaton,
    data: &ControlData,
    scope: &Scope,
    start: &Congruence,
    order: &[StateId],
) -> Congruence {
    let mut part = Partition {
        cell: start.index.clone(),
        members: start.cells.clone(),
    };
    for (i, &x) in order.iter().enumerate() {
        for &y in &order[i + 1..] {
            if part.cell[x] == part.cell[y] || !consistent(x, y, data, scope) {
                continue;
            }
            if let Some(p) = part.merged(x, y, sup, data, scope) {
                part = p;
            }
        }
    }
    Congruence::from_assignment(&part.cell).canonical(sup)
}

/// Quotient generator on the cells of `cong`.
pub fn induce_generator(sup: &Automaton, cong: &Congruence) -> Result<Automaton> {
    if sup.is_empty() {
        return Ok(sup.clone());
    }
    let m = cong.len();
    let mut trans: Vec<BTreeMap<_, usize>> = vec![BTreeMap::new(); m];
    let mut marked = Vec::new();
    for (c, cell) in cong.cells().iter().enumerate() {
        if cell.iter().any(|&x| sup.is_marked(x)) {
            marked.push(c);
        }
        for &x in cell {
            for (e, t) in sup.transitions_from(x) {
                let d = cong.cell_of(t);
                if *trans[c].entry(e).or_insert(d) != d {
                    return Err(DesError::Invariant(format!(
                        "cover cell {c} is not closed under event {e}"
                    )));
                }
            }
        }
    }
    let triples = trans
        .iter()
        .enumerate()
        .flat_map(|(c, t)| t.iter().map(move |(&e, &d)| (c, e, d)));
    Automaton::new(sup.alphabet().clone(), m, cong.cell_of(sup.initial()), marked, triples)
}

/// Reduced supervisor: induced generator of the global greedy congruence,
/// verified control equivalent to `sup` w.r.t. `plant`.
pub fn supreduce(sup: &Automaton, plant: &Automaton) -> Result<Automaton> {
    if sup.is_empty() {
        return Ok(sup.clone());
    }
    let data = ControlData::compute(sup, plant, &AgentPartition::default())?;
    let cong = build_congruence(sup, &data, &Scope::Global);
    cong.check(sup, &data, &Scope::Global)?;
    let rsup = induce_generator(sup, &cong)?.named(format!("{}_reduced", sup.name()));
    if rsup.state_count() > sup.state_count() {
        return Err(DesError::Invariant("reduction grew the supervisor".into()));
    }
    if !control_equivalent(plant, &rsup, sup)? {
        return Err(DesError::Invariant(
            "reduced supervisor is not control equivalent".into(),
        ));
    }
    Ok(rsup)
}

/// Every state, transition and marked state of `rsup` is exercised by L(sup) / Lm(sup).
pub fn is_normal_supervisor(rsup: &Automaton, sup: &Automaton) -> Result<bool> {
    rsup.alphabet().ensure_same_events(sup.alphabet())?;
    if rsup.is_empty() {
        return Ok(true);
    }
    if sup.is_empty() {
        return Ok(false);
    }
    let n = rsup.state_count();
    let mut reached = vec![false; n];
    let mut marked_hit = vec![false; n];
    let mut used: Vec<EventSet> = vec![EventSet::new(); n];
    for (x, z) in pair_walk(sup, rsup) {
        reached[z] = true;
        marked_hit[z] |= sup.is_marked(x);
        used[z].extend(
            sup.transitions_from(x)
                .map(|(e, _)| e)
                .filter(|&e| rsup.next(z, e).is_some()),
        );
    }
    Ok((0..n).all(|z| {
        reached[z]
            && (!rsup.is_marked(z) || marked_hit[z])
            && rsup.enabled(z) == used[z]
    }))
}
