//! Built-in case studies: a shared resource, a guideway and a transfer line.

use crate::alphabet::{events, AgentPartition, Alphabet, EventId, EventSet};
use crate::automaton::{explore, sync_product, Automaton, StateId};
use crate::error::{DesError, Result};
use crate::synthesis::{sup_relatively_observable, supcon};
use std::collections::{BTreeMap, HashSet};

/// Results a case study is expected to reproduce.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Expected {
    pub state_localizable: bool,
    pub event_localizable: bool,
    /// Expected closed-language decomposability w.r.t. `decomposition_alphabets`.
    pub decomposable: Option<bool>,
    pub decomposition_alphabets: Vec<EventSet>,
    /// Exact relevant event sets per agent.
    pub relevant: BTreeMap<String, EventSet>,
    /// Events each agent's controller must not use.
    pub vacuous_at_least: BTreeMap<String, EventSet>,
    /// Every local controller is DES-isomorphic to the supervisor.
    pub locs_isomorphic_to_sup: bool,
    /// Every local controller has as many states as the reduced supervisor.
    pub locs_as_large_as_rsup: bool,
}

#[derive(Debug, Clone)]
pub struct CaseStudy {
    pub name: String,
    pub components: Vec<Automaton>,
    pub spec: Automaton,
    pub agents: AgentPartition,
    /// Observable events. When set, the supervisor is the supremal relatively
    /// observable sublanguage instead of `supC`.
    pub observable: Option<EventSet>,
    pub expected: Option<Expected>,
}

impl CaseStudy {
    pub fn supervisor(&self, plant: &Automaton) -> Result<Automaton> {
        let sup = match &self.observable {
            None => supcon(plant, &self.spec)?.supervisor,
            Some(keep) => sup_relatively_observable(plant, &self.spec, keep)?,
        };
        Ok(sup.named(format!("{}_sup", self.name)))
    }

    pub fn plant(&self) -> Result<Automaton> {
        let mut plant = self.components[0].clone();
        for c in &self.components[1..] {
            plant = sync_product(&plant, c)?;
        }
        Ok(plant.named(format!("{}_plant", self.name)))
    }
}

fn cycle_agent(tag: &str, start: u32, finish: u32) -> Result<Automaton> {
    let alphabet = Alphabet::new()
        .with(start, true, Some(tag))?
        .with(finish, false, Some(tag))?;
    Ok(Automaton::new(alphabet, 2, 0, [0], [(0, start, 1), (1, finish, 0)])?.named(tag))
}

/// Shuffle product of `a` and `b` with the given state pairs removed, trimmed.
pub fn mutex_spec(a: &Automaton, b: &Automaton, forbidden: &[(StateId, StateId)]) -> Result<Automaton> {
    let shared: EventSet = a
        .alphabet()
        .ids()
        .intersection(&b.alphabet().ids())
        .copied()
        .collect();
    if !shared.is_empty() {
        return Err(DesError::Domain("mutual exclusion needs disjoint alphabets".into()));
    }
    let alphabet = a.alphabet().union(b.alphabet())?;
    let forbidden: HashSet<(StateId, StateId)> = forbidden.iter().copied().collect();
    let start = (a.initial(), b.initial());
    if forbidden.contains(&start) {
        return Ok(Automaton::empty(alphabet));
    }
    let (shuffle, _) = explore(
        alphabet,
        start,
        |&(x, y)| {
            a.transitions_from(x)
                .map(|(e, nx)| (e, (nx, y)))
                .chain(b.transitions_from(y).map(|(e, ny)| (e, (x, ny))))
                .filter(|(_, p)| !forbidden.contains(p))
                .collect()
        },
        |&(x, y)| a.is_marked(x) && b.is_marked(y),
    );
    Ok(shuffle.trim())
}

/// Two agents alternating a controllable acquire (α1 = 11, α2 = 21) and an
/// uncontrollable release (β1 = 10, β2 = 20) of a resource that may not be
/// held by both at once.
pub fn shared_resource() -> Result<CaseStudy> {
    let g1 = cycle_agent("G1", 11, 10)?;
    let g2 = cycle_agent("G2", 21, 20)?;
    let spec = mutex_spec(&g1, &g2, &[(1, 1)])?.named("mutex");
    let agents = g1.alphabet().union(g2.alphabet())?.agents()?;
    Ok(CaseStudy {
        name: "sharedresource".into(),
        components: vec![g1, g2],
        spec,
        agents,
        observable: None,
        expected: Some(Expected {
            state_localizable: false,
            event_localizable: false,
            locs_isomorphic_to_sup: true,
            ..Expected::default()
        }),
    })
}

/// Order of the junction devices along the guideway.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GuidewayLayout {
    /// Stoplight (controllable) at the first junction, then alternating.
    StoplightFirst,
    /// Detector (uncontrollable) at the first junction, then alternating.
    DetectorFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GuidewayOptions {
    pub sections: usize,
    pub layout: GuidewayLayout,
    /// Add an uncontrollable return from B to A.
    pub cyclic: bool,
}

impl Default for GuidewayOptions {
    fn default() -> Self {
        GuidewayOptions {
            sections: 4,
            layout: GuidewayLayout::StoplightFirst,
            cyclic: true,
        }
    }
}

/// Event id of junction `j` (0-based) for vehicle `i` (1-based).
fn junction_event(i: u32, j: usize, layout: GuidewayLayout, scale: u32) -> (u32, bool) {
    let controllable = (j % 2 == 0) == (layout == GuidewayLayout::StoplightFirst);
    // pair offsets so controllable ids are odd: (1,0), (3,2), ...
    let pair = (j / 2) as u32 * 2;
    let offset = if controllable { pair + 1 } else { pair };
    (i * scale + offset, controllable)
}

fn vehicle(i: u32, opts: &GuidewayOptions, scale: u32) -> Result<(Automaton, Option<u32>)> {
    let tag = format!("V{i}");
    let n = opts.sections;
    let mut alphabet = Alphabet::new();
    let mut trans = Vec::new();
    let mut used = HashSet::new();
    for j in 0..=n {
        let (id, c) = junction_event(i, j, opts.layout, scale);
        if !used.insert(id) {
            return Err(DesError::Domain(format!("junction event {id} reused")));
        }
        alphabet.insert(EventId(id), c, Some(&tag))?;
        trans.push((j, id, j + 1));
    }
    let mut closure = None;
    if opts.cyclic {
        let offset = (0..).step_by(2).find(|o| !used.contains(&(i * scale + o))).unwrap();
        let id = i * scale + offset;
        alphabet.insert(EventId(id), false, Some(&tag))?;
        trans.push((n + 1, id, 0));
        closure = Some(id);
    }
    let a = Automaton::new(alphabet, n + 2, 0, [0, n + 1], trans)?.named(tag);
    Ok((a, closure))
}

/// Two vehicles on a one-way track of `sections` sections from A (state 0)
/// to B (state `sections + 1`); no section may hold both vehicles.
pub fn guideway(sections: usize) -> Result<CaseStudy> {
    guideway_with(GuidewayOptions {
        sections,
        ..GuidewayOptions::default()
    })
}

pub fn guideway_with(opts: GuidewayOptions) -> Result<CaseStudy> {
    if opts.sections < 1 {
        return Err(DesError::Domain("guideway needs at least one section".into()));
    }
    let scale = 10u32.pow(((opts.sections + 3) as f64).log10().ceil() as u32).max(10);
    let (v1, _) = vehicle(1, &opts, scale)?;
    let (v2, _) = vehicle(2, &opts, scale)?;
    let forbidden: Vec<(StateId, StateId)> = (1..=opts.sections).map(|j| (j, j)).collect();
    let spec = mutex_spec(&v1, &v2, &forbidden)?.named("no_collision");
    let all = v1.alphabet().union(v2.alphabet())?;
    let agents = all.agents()?;
    // the second stoplight of each vehicle is unobservable
    let hidden = events([scale + 3, 2 * scale + 3]);
    let observable = all.ids().difference(&hidden).copied().collect();
    let expected = (opts.sections == 4 && scale == 10).then(|| {
        let s1 = all.ids().difference(&events([10, 12, 23])).copied().collect();
        let s2 = all.ids().difference(&events([13, 20, 22])).copied().collect();
        Expected {
            state_localizable: false,
            event_localizable: true,
            decomposable: Some(true),
            decomposition_alphabets: vec![s1, s2],
            vacuous_at_least: BTreeMap::from([
                ("V1".to_string(), events([10, 12, 23])),
                ("V2".to_string(), events([13, 20, 22])),
            ]),
            locs_as_large_as_rsup: true,
            ..Expected::default()
        }
    });
    Ok(CaseStudy {
        name: "guideway".into(),
        components: vec![v1, v2],
        spec,
        agents,
        observable: Some(observable),
        expected,
    })
}

/// Buffer counter over `inc`/`dec` events holding 0..=cap items, marked when empty.
fn buffer(name: &str, cap: usize, inc: &[u32], dec: &[u32], alphabet: &Alphabet) -> Result<Automaton> {
    let ids: EventSet = inc.iter().chain(dec).map(|&e| EventId(e)).collect();
    let mut trans = Vec::new();
    for k in 0..=cap {
        if k < cap {
            trans.extend(inc.iter().map(|&e| (k, e, k + 1)));
        }
        if k > 0 {
            trans.extend(dec.iter().map(|&e| (k, e, k - 1)));
        }
    }
    Ok(Automaton::new(alphabet.restrict(&ids), cap + 1, 0, [0], trans)?.named(name))
}

/// Machines M1, M2 and test unit TU linked by buffers B1 (capacity `cap1`)
/// and B2 (capacity `cap2`). Events: M1 1/2, M2 3/4, TU 5 (start),
/// 6 (accept, leaves the line), 8 (reject, back to B1).
pub fn transfer_line(cap1: usize, cap2: usize) -> Result<CaseStudy> {
    if cap1 == 0 || cap2 == 0 {
        return Err(DesError::Domain("buffer capacities must be positive".into()));
    }
    let m1 = cycle_agent("M1", 1, 2)?;
    let m2 = cycle_agent("M2", 3, 4)?;
    let tu_alpha = Alphabet::new()
        .with(5, true, Some("TU"))?
        .with(6, false, Some("TU"))?
        .with(8, false, Some("TU"))?;
    let tu = Automaton::new(tu_alpha, 2, 0, [0], [(0, 5, 1), (1, 6, 0), (1, 8, 0)])?.named("TU");
    let all = m1.alphabet().union(m2.alphabet())?.union(tu.alphabet())?;
    let b1 = buffer("B1", cap1, &[2, 8], &[3], &all)?;
    let b2 = buffer("B2", cap2, &[4], &[5], &all)?;
    let spec = sync_product(&b1, &b2)?.named("buffers");
    let agents = all.agents()?;
    let expected = Expected {
        state_localizable: true,
        event_localizable: true,
        decomposable: Some(false),
        decomposition_alphabets: vec![
            all.ids().difference(&events([3, 4, 5, 8])).copied().collect(),
            all.ids().difference(&events([1, 6])).copied().collect(),
            all.ids().difference(&events([1, 2, 3, 6, 8])).copied().collect(),
        ],
        relevant: BTreeMap::from([
            ("M1".to_string(), events([1, 2, 6])),
            ("M2".to_string(), events([2, 3, 4, 5, 8])),
            ("TU".to_string(), events([4, 5])),
        ]),
        ..Expected::default()
    };
    Ok(CaseStudy {
        name: "transferline".into(),
        components: vec![m1, m2, tu],
        spec,
        agents,
        observable: None,
        expected: Some(expected),
    })
}
