//! Supervisor localization: one local controller per agent.

use crate::alphabet::{AgentPartition, EventId, EventSet};
use crate::automaton::{meet_all, Automaton, StateId};
use crate::error::{DesError, Result};
use crate::eventred::relevant_events;
use crate::reduce::{build_congruence, build_congruence_from, induce_generator, is_normal_supervisor, Congruence, ControlData, Scope};
use crate::synthesis::{control_equivalent, pair_walk};
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone)]
pub struct LocalController {
    /// Induced generator completed so it blocks a plant move only where the
    /// agent's supervisor states disable it. Defined over the full alphabet.
    pub controller: Automaton,
    /// Induced generator on the congruence cells; normal w.r.t. the supervisor.
    pub generator: Automaton,
    /// Cell `i` of the congruence is state `i` of both automata.
    pub congruence: Congruence,
}

#[derive(Debug, Clone)]
pub struct Localization {
    pub per_agent: BTreeMap<String, LocalController>,
    pub sup: Automaton,
    pub plant: Automaton,
    pub agents: AgentPartition,
}

impl Localization {
    pub fn controller(&self, agent: &str) -> Option<&Automaton> {
        self.per_agent.get(agent).map(|l| &l.controller)
    }

    /// Synchronization of all local controllers.
    pub fn meet(&self) -> Result<Automaton> {
        Ok(meet_all(self.per_agent.values().map(|l| &l.controller))?
            .unwrap_or_else(|| Automaton::universal(self.sup.alphabet().clone())))
    }

    /// Control equivalence of the meet, normality of every induced generator
    /// and local disablement of every controller.
    pub fn verify(&self) -> Result<()> {
        if !control_equivalent(&self.plant, &self.meet()?, &self.sup)? {
            return Err(DesError::Invariant(
                "local controllers are not control equivalent to the supervisor".into(),
            ));
        }
        for (k, loc) in &self.per_agent {
            if !is_normal_supervisor(&loc.generator, &self.sup)? {
                return Err(DesError::Invariant(format!(
                    "local controller {k} is not normal w.r.t. the supervisor"
                )));
            }
            let own = self.agents.controllable_of(k, self.plant.alphabet());
            if !is_local_controller(&loc.controller, &self.plant, &own)? {
                return Err(DesError::Invariant(format!(
                    "local controller {k} disables events of other agents"
                )));
            }
        }
        Ok(())
    }
}

fn check_agents(plant: &Automaton, agents: &AgentPartition) -> Result<()> {
    agents.check_covers(plant.alphabet())
}

/// Starting partition of the per-agent greedy congruence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Start {
    /// Singletons, as for the global reduction.
    Identity,
    /// The global congruence, which every agent scope accepts. Local
    /// controllers are then never larger than the reduced supervisor and
    /// never use an event it does not use.
    Global,
    /// Both of the above. Fewer states wins, then fewer relevant events,
    /// then `Global`.
    #[default]
    Best,
}

fn localize_with(
    sup: &Automaton,
    plant: &Automaton,
    data: &ControlData,
    starts: &[Congruence],
    k: &str,
    marking: bool,
) -> Result<LocalController> {
    let scope = if marking {
        Scope::Agent(k.to_owned())
    } else {
        Scope::AgentControlOnly(k.to_owned())
    };
    if sup.is_empty() {
        return Ok(LocalController {
            controller: sup.clone().named(format!("loc_{k}")),
            generator: sup.clone().named(format!("loc_{k}")),
            congruence: Congruence::identity(1),
        });
    }
    if !data.has_scope(&scope) {
        return Err(DesError::Domain(format!("unknown agent {k}")));
    }
    let order: Vec<StateId> = (0..sup.state_count()).collect();
    let mut best: Option<((usize, usize), LocalController)> = None;
    for start in starts {
        let congruence = build_congruence_from(sup, data, &scope, start, &order);
        congruence.check(sup, data, &scope)?;
        let generator = induce_generator(sup, &congruence)?.named(format!("loc_{k}"));
        let kept: Vec<EventSet> = congruence
            .cells()
            .iter()
            .map(|cell| cell.iter().flat_map(|&x| data.disabled_in(x, &scope).iter().copied()).collect())
            .collect();
        let controller = complete_locally(&generator, plant, &kept)?;
        let size = (congruence.cells().len(), relevant_events(&controller, plant)?.len());
        if best.as_ref().map_or(true, |(s, _)| size < *s) {
            let loc = LocalController {
                controller,
                generator,
                congruence,
            };
            best = Some((size, loc));
        }
    }
    best.map(|(_, l)| l)
        .ok_or_else(|| DesError::Invariant("no start partition".into()))
}

/// Adds a self-loop on `σ` at every controller state where `σ` is undefined,
/// the plant can execute it, and `σ ∉ kept[state]`. Repeats until stable.
///
/// With `kept[z]` the agent's disabled events over the cell of `z`, only
/// strings outside `L(SUP)` are affected: along `L(SUP)` the induced generator
/// already follows every move the supervisor allows, and any other event is
/// disabled by its owner's controller at the first step leaving `L(SUP)`.
pub fn complete_locally(loc: &Automaton, plant: &Automaton, kept: &[EventSet]) -> Result<Automaton> {
    loc.alphabet().ensure_same_events(plant.alphabet())?;
    if loc.is_empty() || plant.is_empty() {
        return Ok(loc.clone());
    }
    let mut trans: Vec<(usize, EventId, usize)> = loc.transitions().collect();
    let mut current = loc.clone();
    loop {
        let mut added = BTreeSet::new();
        for (z, q) in pair_walk(&current, plant) {
            for (e, _) in plant.transitions_from(q) {
                if !kept[z].contains(&e) && current.next(z, e).is_none() {
                    added.insert((z, e));
                }
            }
        }
        if added.is_empty() {
            return Ok(current);
        }
        trans.extend(added.into_iter().map(|(z, e)| (z, e, z)));
        current = Automaton::new(
            loc.alphabet().clone(),
            loc.state_count(),
            loc.initial(),
            loc.marked_states(),
            trans.iter().map(|&(s, e, t)| (s, e.0, t)),
        )?
        .named(loc.name());
    }
}

/// Start partitions in preference order.
fn start_partitions(sup: &Automaton, data: &ControlData, start: Start) -> Vec<Congruence> {
    let global = || build_congruence(sup, data, &Scope::Global);
    match start {
        Start::Identity => vec![Congruence::identity(sup.state_count())],
        Start::Global => vec![global()],
        Start::Best => vec![global(), Congruence::identity(sup.state_count())],
    }
}

/// Local controller of agent `k`: induced generator of the greedy congruence
/// built from `D^k`, completed by [`complete_locally`].
pub fn localize_agent(
    sup: &Automaton,
    plant: &Automaton,
    agents: &AgentPartition,
    k: &str,
) -> Result<Automaton> {
    check_agents(plant, agents)?;
    let data = ControlData::compute(sup, plant, agents)?;
    let starts = start_partitions(sup, &data, Start::default());
    Ok(localize_with(sup, plant, &data, &starts, k, true)?.controller)
}

/// Localizes `sup` for every agent and verifies the distributed solution.
pub fn localize(sup: &Automaton, plant: &Automaton, agents: &AgentPartition) -> Result<Localization> {
    localize_from(sup, plant, agents, Start::default())
}

pub fn localize_from(
    sup: &Automaton,
    plant: &Automaton,
    agents: &AgentPartition,
    start: Start,
) -> Result<Localization> {
    check_agents(plant, agents)?;
    let data = ControlData::compute(sup, plant, agents)?;
    let starts = start_partitions(sup, &data, start);
    let names: Vec<&str> = agents.names().collect();
    let build = |k: &str, marking: bool| localize_with(sup, plant, &data, &starts, k, marking);
    let loose: Vec<LocalController> = names.par_iter().map(|k| build(k, false)).collect::<Result<_>>()?;
    let strict: Vec<LocalController> = names.par_iter().map(|k| build(k, true)).collect::<Result<_>>()?;
    // Agents drop the marking condition unless the meet needs it; it is
    // restored in agent order until the marked language is recovered.
    let mut last = None;
    for carriers in 0..=names.len() {
        let per_agent = names
            .iter()
            .enumerate()
            .map(|(i, k)| {
                let l = if i < carriers { &strict[i] } else { &loose[i] };
                (k.to_string(), l.clone())
            })
            .collect();
        let localization = Localization {
            per_agent,
            sup: sup.clone(),
            plant: plant.clone(),
            agents: agents.clone(),
        };
        match localization.verify() {
            Ok(()) => return Ok(localization),
            Err(e) => last = Some(e),
        }
    }
    Err(last.unwrap_or_else(|| DesError::Invariant("no agents".into())))
}

/// `loc` disables only events in `own` wherever the plant could execute them.
pub fn is_local_controller(loc: &Automaton, plant: &Automaton, own: &EventSet) -> Result<bool> {
    loc.alphabet().ensure_same_events(plant.alphabet())?;
    if loc.is_empty() || plant.is_empty() {
        return Ok(true);
    }
    Ok(pair_walk(loc, plant).into_iter().all(|(z, q)| {
        plant
            .transitions_from(q)
            .all(|(e, _)| own.contains(&e) || loc.next(z, e).is_some())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::{events, Alphabet};
    use crate::automaton::{language_equal, language_subset, sync_product};
    use crate::reduce::supreduce;
    use crate::synthesis::supcon;

    fn two_agents() -> (Automaton, Automaton, AgentPartition) {
        let a = Alphabet::new()
            .with(11, true, Some("1"))
            .unwrap()
            .with(10, false, Some("1"))
            .unwrap();
        let b = Alphabet::new()
            .with(21, true, Some("2"))
            .unwrap()
            .with(20, false, Some("2"))
            .unwrap();
        let g1 = Automaton::new(a, 2, 0, [0], [(0, 11, 1), (1, 10, 0)]).unwrap();
        let g2 = Automaton::new(b, 2, 0, [0], [(0, 21, 1), (1, 20, 0)]).unwrap();
        let plant = sync_product(&g1, &g2).unwrap();
        // at most one agent working
        let spec = Automaton::new(
            plant.alphabet().clone(),
            4,
            0,
            [0],
            [(0, 11, 1), (1, 10, 0), (0, 21, 2), (2, 20, 0), (1, 21, 3), (2, 11, 3)],
        )
        .unwrap()
        .trim();
        let sup = supcon(&plant, &spec).unwrap().supervisor;
        let agents = plant.alphabet().agents().unwrap();
        (plant, sup, agents)
    }

    #[test]
    fn meet_is_equivalent() {
        let (plant, sup, agents) = two_agents();
        let loc = localize(&sup, &plant, &agents).unwrap();
        assert_eq!(loc.per_agent.len(), 2);
        for l in loc.per_agent.values() {
            assert!(l.controller.state_count() <= sup.state_count());
        }
    }

    #[test]
    fn single_agent_matches_reduction() {
        let (plant, sup, _) = two_agents();
        let one = AgentPartition::new([("all", plant.alphabet().ids())]).unwrap();
        let loc = localize(&sup, &plant, &one).unwrap();
        let rsup = supreduce(&sup, &plant).unwrap();
        assert!(language_equal(loc.controller("all").unwrap(), &rsup).unwrap());
    }

    #[test]
    fn local_disablement() {
        let (plant, _, _) = two_agents();
        let all = Automaton::universal(plant.alphabet().clone());
        assert!(is_local_controller(&all, &plant, &EventSet::new()).unwrap());
        // never lets agent 2 start
        let blocker = Automaton::new(plant.alphabet().clone(), 1, 0, [0], [(0, 11, 0), (0, 10, 0), (0, 20, 0)]).unwrap();
        assert!(!is_local_controller(&blocker, &plant, &events([11])).unwrap());
        assert!(is_local_controller(&blocker, &plant, &events([21])).unwrap());
    }

    #[test]
    fn completion_only_outside_closed_loop() {
        let (plant, sup, agents) = two_agents();
        let loc = localize(&sup, &plant, &agents).unwrap();
        for (k, l) in &loc.per_agent {
            let own = agents.controllable_of(k, plant.alphabet());
            assert!(is_local_controller(&l.controller, &plant, &own).unwrap());
            assert!(is_normal_supervisor(&l.generator, &sup).unwrap());
            let with_plant = sync_product(&plant, &l.controller).unwrap();
            assert!(language_subset(&sup, &with_plant).unwrap());
        }
    }

    #[test]
    fn partition_must_cover_alphabet() {
        let (plant, sup, _) = two_agents();
        let partial = AgentPartition::new([("1", events([10, 11]))]).unwrap();
        assert!(matches!(localize(&sup, &plant, &partial), Err(DesError::Precondition(_))));
    }
}
