//! Event reduction analysis of local controllers.
//!
//! An event is *vacuous* for a controller when it only ever appears as a
//! self-loop and the controller never disables it while the plant can execute
//! it. Dropping a vacuous event from the controller's observation scope leaves
//! the controlled behavior unchanged; every other event is *relevant*.

use crate::alphabet::{AgentPartition, Alphabet, EventId, EventSet};
use crate::automaton::{
    closed_language_equal, marked_language_equal, meet_all, project, selfloop_lift, sync_product,
    Automaton,
};
use crate::error::{DesError, Result};
use crate::localize::Localization;
use crate::synthesis::{equivalent_under, pair_walk};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Events of `a` that are self-looped wherever defined and never disabled
/// against `plant`. Each reported event is cross-checked by dropping it from
/// the controller and lifting it back.
pub fn vacuous_events(a: &Automaton, plant: &Automaton) -> Result<EventSet> {
    a.alphabet().ensure_same_events(plant.alphabet())?;
    if a.is_empty() {
        return Ok(EventSet::new());
    }
    let pairs = pair_walk(a, plant);
    let mut vacuous = EventSet::new();
    for e in a.alphabet().ids() {
        let loops_only = (0..a.state_count()).all(|z| a.next(z, e).map_or(true, |t| t == z));
        let never_disabled = pairs
            .iter()
            .all(|&(z, q)| plant.next(q, e).is_none() || a.next(z, e).is_some());
        if loops_only && never_disabled {
            vacuous.insert(e);
        }
    }
    for &e in &vacuous {
        if !drop_is_sound(a, plant, e)? {
            return Err(DesError::Invariant(format!(
                "event {e} looks vacuous but dropping it changes the controlled behavior"
            )));
        }
    }
    Ok(vacuous)
}

/// Drops `event` from `a` by projection, self-loops it back, and compares the
/// controlled behavior with that of `a`.
pub fn drop_is_sound(a: &Automaton, plant: &Automaton, event: EventId) -> Result<bool> {
    let keep: EventSet = a.alphabet().ids().into_iter().filter(|&e| e != event).collect();
    let dropped = project(a, &keep)?;
    let lifted = selfloop_lift(&dropped, &a.alphabet().restrict(&EventSet::from([event])))?;
    equivalent_under(plant, &lifted, a)
}

pub fn relevant_events(a: &Automaton, plant: &Automaton) -> Result<EventSet> {
    let vacuous = vacuous_events(a, plant)?;
    Ok(a.alphabet().ids().difference(&vacuous).copied().collect())
}

/// Per-agent evidence behind a [`Verdict`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AgentWitness {
    pub agent: String,
    pub states: usize,
    pub alphabet_size: usize,
    pub relevant: EventSet,
    pub vacuous: EventSet,
    /// Controllable events of other agents that are vacuous in this controller.
    pub foreign_controllable_vacuous: EventSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Verdict {
    pub state_localizable: bool,
    pub event_localizable: bool,
    pub decomposable: Option<bool>,
    pub sup_states: usize,
    pub rsup_states: usize,
    pub rsup_alphabet_size: usize,
    pub rsup_relevant: EventSet,
    pub witnesses: Vec<AgentWitness>,
}

impl Verdict {
    /// The boolean verdicts agree with the recorded witnesses.
    pub fn is_self_consistent(&self) -> bool {
        let by_states = self.witnesses.iter().all(|w| w.states < self.rsup_states);
        let by_events = self
            .witnesses
            .iter()
            .all(|w| w.relevant.len() < self.rsup_relevant.len());
        self.state_localizable == by_states && self.event_localizable == by_events
    }

    pub fn witness(&self, agent: &str) -> Option<&AgentWitness> {
        self.witnesses.iter().find(|w| w.agent == agent)
    }
}

/// State- and event-reduction localizability of a localized supervisor.
///
/// Both sides of the event comparison count relevant events; raw alphabet
/// sizes are kept in the witnesses. An EMPTY supervisor is reported as not
/// localizable.
pub fn localizability_verdict(rsup: &Automaton, loc: &Localization) -> Result<Verdict> {
    let plant = &loc.plant;
    let rsup_relevant = relevant_events(rsup, plant)?;
    let controllable = plant.alphabet().controllable();
    let mut witnesses = Vec::new();
    for (k, l) in &loc.per_agent {
        let vacuous = vacuous_events(&l.controller, plant)?;
        let own = loc.agents.controllable_of(k, plant.alphabet());
        let foreign: EventSet = controllable
            .difference(&own)
            .filter(|e| vacuous.contains(e))
            .copied()
            .collect();
        witnesses.push(AgentWitness {
            agent: k.clone(),
            states: l.controller.state_count(),
            alphabet_size: l.controller.alphabet().len(),
            relevant: plant.alphabet().ids().difference(&vacuous).copied().collect(),
            vacuous,
            foreign_controllable_vacuous: foreign,
        });
    }
    let nonempty = !loc.sup.is_empty();
    let rsup_states = rsup.state_count();
    Ok(Verdict {
        state_localizable: nonempty && witnesses.iter().all(|w| w.states < rsup_states),
        event_localizable: nonempty
            && witnesses
                .iter()
                .all(|w| w.relevant.len() < rsup_relevant.len()),
        decomposable: None,
        sup_states: loc.sup.state_count(),
        rsup_states,
        rsup_alphabet_size: rsup.alphabet().len(),
        rsup_relevant,
        witnesses,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TheoremOutcome {
    /// |LOC^k| ≥ |RSUP|: nothing is claimed.
    Skipped,
    /// Foreign controllable events self-looped at every state of LOC^k.
    Witnessed { events: EventSet },
    /// Premise holds but no foreign controllable event is vacuous.
    Counterexample,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TheoremEntry {
    pub agent: String,
    pub loc_states: usize,
    pub rsup_states: usize,
    pub outcome: TheoremOutcome,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TheoremReport {
    pub entries: Vec<TheoremEntry>,
}

impl TheoremReport {
    pub fn counterexamples(&self) -> impl Iterator<Item = &TheoremEntry> {
        self.entries
            .iter()
            .filter(|e| e.outcome == TheoremOutcome::Counterexample)
    }

    pub fn holds(&self) -> bool {
        self.counterexamples().next().is_none()
    }
}

/// Empirical check: every local controller with fewer states than the reduced
/// supervisor has a vacuous controllable event owned by another agent.
pub fn check_reduction_theorem(rsup: &Automaton, loc: &Localization) -> Result<TheoremReport> {
    let plant = &loc.plant;
    let controllable = plant.alphabet().controllable();
    let mut entries = Vec::new();
    for (k, l) in &loc.per_agent {
        let loc_states = l.controller.state_count();
        let outcome = if loc.sup.is_empty() || loc_states >= rsup.state_count() {
            TheoremOutcome::Skipped
        } else {
            let own = loc.agents.controllable_of(k, plant.alphabet());
            let vacuous = vacuous_events(&l.controller, plant)?;
            let events: EventSet = controllable
                .difference(&own)
                .filter(|e| vacuous.contains(e))
                .copied()
                .collect();
            if events.is_empty() {
                TheoremOutcome::Counterexample
            } else {
                TheoremOutcome::Witnessed { events }
            }
        };
        entries.push(TheoremEntry {
            agent: k.clone(),
            loc_states,
            rsup_states: rsup.state_count(),
            outcome,
        });
    }
    Ok(TheoremReport { entries })
}

/// Decomposability of the closed and the marked language.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Decomposability {
    pub closed: bool,
    pub marked: bool,
}

/// K̄ = ∩ Pi⁻¹Pi(K̄) ∩ L(G), and the analogue K = ∩ Pi⁻¹Pi(K) ∩ Lm(G).
pub fn decomposability(k: &Automaton, plant: &Automaton, alphabets: &[EventSet]) -> Result<Decomposability> {
    k.alphabet().ensure_same_events(plant.alphabet())?;
    let all = plant.alphabet().ids();
    for sigma in alphabets {
        if !sigma.is_subset(&all) {
            return Err(DesError::Domain("local alphabet outside the plant alphabet".into()));
        }
    }
    let closure = k.prefix_closure();
    let rebuild = |source: &Automaton| -> Result<Automaton> {
        let mut parts = Vec::with_capacity(alphabets.len());
        for sigma in alphabets {
            let local = project(source, sigma)?;
            parts.push(selfloop_lift(&local, &plant.alphabet().without(sigma))?);
        }
        let meet = meet_all(&parts)?.unwrap_or_else(|| Automaton::universal(plant.alphabet().clone()));
        sync_product(&meet, plant)
    };
    Ok(Decomposability {
        closed: closed_language_equal(&rebuild(&closure)?, &closure)?,
        marked: marked_language_equal(&rebuild(k)?, k)?,
    })
}

pub fn is_decomposable(k: &Automaton, plant: &Automaton, alphabets: &[EventSet]) -> Result<bool> {
    Ok(decomposability(k, plant, alphabets)?.closed)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PairTraffic {
    pub observer: String,
    pub owner: String,
    pub events: EventSet,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CommunicationReport {
    pub pairs: Vec<PairTraffic>,
    pub per_agent: BTreeMap<String, usize>,
    pub total: usize,
    /// Foreign events each agent would observe running the reduced supervisor.
    pub rsup_baseline: Option<usize>,
}

impl CommunicationReport {
    pub fn observed(&self, observer: &str, owner: &str) -> Option<&EventSet> {
        self.pairs
            .iter()
            .find(|p| p.observer == observer && p.owner == owner)
            .map(|p| &p.events)
    }
}

/// Events each local controller must learn from every other agent.
pub fn communication_report(loc: &Localization, rsup: Option<&Automaton>) -> Result<CommunicationReport> {
    let plant = &loc.plant;
    let mut report = CommunicationReport::default();
    if loc.agents.len() < 2 {
        return Ok(report);
    }
    for (k, l) in &loc.per_agent {
        let relevant = relevant_events(&l.controller, plant)?;
        let mut count = 0;
        for (j, owned) in loc.agents.iter() {
            if j == k {
                continue;
            }
            let events: EventSet = relevant.intersection(owned).copied().collect();
            count += events.len();
            report.pairs.push(PairTraffic {
                observer: k.clone(),
                owner: j.to_owned(),
                events,
            });
        }
        report.per_agent.insert(k.clone(), count);
        report.total += count;
    }
    if let Some(rsup) = rsup {
        let relevant = relevant_events(rsup, plant)?;
        let baseline = loc
            .agents
            .iter()
            .map(|(_, own)| relevant.difference(own).count())
            .sum();
        report.rsup_baseline = Some(baseline);
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct RandomParams {
    pub agents: usize,
    pub max_states_per_agent: usize,
    pub max_events_per_agent: usize,
    /// Probability that a plant transition survives into the specification.
    pub spec_density: f64,
}

impl Default for RandomParams {
    fn default() -> Self {
        RandomParams {
            agents: 2,
            max_states_per_agent: 5,
            max_events_per_agent: 4,
            spec_density: 0.8,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub components: Vec<Automaton>,
    pub plant: Automaton,
    pub spec: Automaton,
    pub agents: AgentPartition,
}

/// Reproducible random plant and specification.
///
/// Agent `i` owns events `10·(i+1) + j`, odd `j` controllable; each agent is a
/// strongly connected automaton (a random Hamiltonian cycle plus extra edges),
/// hence trim. The specification keeps a random subset of the plant's
/// transitions and states, with the initial state always marked.
pub fn random_instance(seed: u64, params: &RandomParams) -> Result<RandomInstance> {
    if params.agents == 0 || params.max_states_per_agent == 0 || params.max_events_per_agent < 2 {
        return Err(DesError::Domain("random instance parameters too small".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut components = Vec::with_capacity(params.agents);
    for i in 0..params.agents {
        let tag = format!("A{}", i + 1);
        let n = rng.gen_range(1..=params.max_states_per_agent);
        let m = rng.gen_range(2..=params.max_events_per_agent);
        let base = 10 * (i as u32 + 1);
        let ids: Vec<u32> = (0..m as u32).map(|j| base + j).collect();
        let mut alphabet = Alphabet::new();
        for &id in &ids {
            alphabet.insert(EventId(id), id % 2 == 1, Some(&tag))?;
        }
        let mut order: Vec<usize> = (1..n).collect();
        order.shuffle(&mut rng);
        order.insert(0, 0);
        let mut delta: BTreeMap<(usize, u32), usize> = BTreeMap::new();
        for w in 0..n {
            let (from, to) = (order[w], order[(w + 1) % n]);
            let ev = ids[rng.gen_range(0..m)];
            delta.insert((from, ev), to);
        }
        let extra = rng.gen_range(0..=n);
        for _ in 0..extra {
            let from = rng.gen_range(0..n);
            let ev = ids[rng.gen_range(0..m)];
            delta.entry((from, ev)).or_insert_with(|| rng.gen_range(0..n));
        }
        let mut marked = vec![0];
        marked.extend((1..n).filter(|_| rng.gen_bool(0.3)));
        let comp = Automaton::new(
            alphabet,
            n,
            0,
            marked,
            delta.into_iter().map(|((f, e), t)| (f, e, t)),
        )?
        .named(tag);
        components.push(comp);
    }
    let mut plant = components[0].clone();
    for c in &components[1..] {
        plant = sync_product(&plant, c)?;
    }
    let plant = plant.named("plant");
    let agents = plant.alphabet().agents()?;

    let n = plant.state_count();
    let keep_state: Vec<bool> = (0..n).map(|s| s == 0 || rng.gen_bool(0.85)).collect();
    let transitions: Vec<_> = plant
        .transitions()
        .filter(|&(s, _, t)| keep_state[s] && keep_state[t])
        .filter(|_| rng.gen_bool(params.spec_density))
        .collect();
    let marked: Vec<usize> = (0..n)
        .filter(|&s| s == 0 || (keep_state[s] && plant.is_marked(s) && rng.gen_bool(0.7)))
        .collect();
    let spec = Automaton::new(plant.alphabet().clone(), n, 0, marked, transitions)?
        .trim()
        .named("spec");
    Ok(RandomInstance {
        components,
        plant,
        spec,
        agents,
    })
}
