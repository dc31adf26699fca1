//! Events, alphabets and the agent partition of an alphabet.

use crate::error::{DesError, Result};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// Numeric event label. Ordering by id is the tie-breaker used everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EventId(pub u32);

impl fmt::Display for EventId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for EventId {
    fn from(v: u32) -> Self {
        EventId(v)
    }
}

pub type EventSet = BTreeSet<EventId>;

/// Builds an [`EventSet`] from raw ids.
pub fn events<I: IntoIterator<Item = u32>>(ids: I) -> EventSet {
    ids.into_iter().map(EventId).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EventInfo {
    pub controllable: bool,
    pub agent: Option<String>,
}

/// A finite event set with controllability flags and optional agent ownership.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Alphabet {
    events: BTreeMap<EventId, EventInfo>,
}

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an event. Re-adding an event is allowed only with identical flags;
    /// an agent tag may be filled in where it was previously absent.
    pub fn insert(&mut self, id: EventId, controllable: bool, agent: Option<&str>) -> Result<()> {
        match self.events.get_mut(&id) {
            None => {
                self.events.insert(
                    id,
                    EventInfo {
                        controllable,
                        agent: agent.map(str::to_owned),
                    },
                );
            }
            Some(info) => {
                if info.controllable != controllable {
                    return Err(DesError::FlagMismatch(id));
                }
                match (&info.agent, agent) {
                    (Some(a), Some(b)) if a != b => return Err(DesError::AgentMismatch(id)),
                    (None, Some(b)) => info.agent = Some(b.to_owned()),
                    _ => {}
                }
            }
        }
        Ok(())
    }

    pub fn with(mut self, id: u32, controllable: bool, agent: Option<&str>) -> Result<Self> {
        self.insert(EventId(id), controllable, agent)?;
        Ok(self)
    }

    /// Alphabet where odd ids are controllable.
    pub fn odd_controllable<I: IntoIterator<Item = u32>>(ids: I, agent: Option<&str>) -> Self {
        let mut a = Alphabet::new();
        for id in ids {
            a.insert(EventId(id), id % 2 == 1, agent)
                .expect("fresh ids cannot conflict");
        }
        a
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn contains(&self, id: EventId) -> bool {
        self.events.contains_key(&id)
    }

    pub fn info(&self, id: EventId) -> Option<&EventInfo> {
        self.events.get(&id)
    }

    pub fn is_controllable(&self, id: EventId) -> bool {
        self.events.get(&id).is_some_and(|i| i.controllable)
    }

    pub fn agent_of(&self, id: EventId) -> Option<&str> {
        self.events.get(&id).and_then(|i| i.agent.as_deref())
    }

    pub fn iter(&self) -> impl Iterator<Item = (EventId, &EventInfo)> {
        self.events.iter().map(|(&id, info)| (id, info))
    }

    pub fn ids(&self) -> EventSet {
        self.events.keys().copied().collect()
    }

    pub fn controllable(&self) -> EventSet {
        self.iter()
            .filter(|(_, i)| i.controllable)
            .map(|(id, _)| id)
            .collect()
    }

    pub fn uncontrollable(&self) -> EventSet {
        self.iter()
            .filter(|(_, i)| !i.controllable)
            .map(|(id, _)| id)
            .collect()
    }

    pub fn same_events(&self, other: &Alphabet) -> bool {
        self.events.keys().eq(other.events.keys())
    }

    pub fn ensure_same_events(&self, other: &Alphabet) -> Result<()> {
        if self.same_events(other) {
            Ok(())
        } else {
            Err(DesError::AlphabetMismatch(format!(
                "{{{}}} vs {{{}}}",
                fmt_set(&self.ids()),
                fmt_set(&other.ids())
            )))
        }
    }

    /// Union of two alphabets; flags of shared events must agree.
    pub fn union(&self, other: &Alphabet) -> Result<Alphabet> {
        let mut out = self.clone();
        for (id, info) in other.iter() {
            out.insert(id, info.controllable, info.agent.as_deref())?;
        }
        Ok(out)
    }

    /// Sub-alphabet keeping only the given events (unknown ids are ignored).
    pub fn restrict(&self, keep: &EventSet) -> Alphabet {
        Alphabet {
            events: self
                .events
                .iter()
                .filter(|(id, _)| keep.contains(id))
                .map(|(id, i)| (*id, i.clone()))
                .collect(),
        }
    }

    pub fn without(&self, drop: &EventSet) -> Alphabet {
        Alphabet {
            events: self
                .events
                .iter()
                .filter(|(id, _)| !drop.contains(id))
                .map(|(id, i)| (*id, i.clone()))
                .collect(),
        }
    }

    /// Agent partition induced by the agent tags. Fails if any event is untagged.
    pub fn agents(&self) -> Result<AgentPartition> {
        let mut agents: BTreeMap<String, EventSet> = BTreeMap::new();
        for (id, info) in self.iter() {
            let tag = info
                .agent
                .as_ref()
                .ok_or_else(|| DesError::Domain(format!("event {id} has no agent tag")))?;
            agents.entry(tag.clone()).or_default().insert(id);
        }
        Ok(AgentPartition { agents })
    }
}

/// Partition of an alphabet into per-agent sub-alphabets.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentPartition {
    agents: BTreeMap<String, EventSet>,
}

impl AgentPartition {
    /// Builds a partition, rejecting overlapping sub-alphabets.
    pub fn new<I, S>(parts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, EventSet)>,
        S: Into<String>,
    {
        let mut agents = BTreeMap::new();
        let mut seen = EventSet::new();
        for (name, evs) in parts {
            for e in &evs {
                if !seen.insert(*e) {
                    return Err(DesError::AgentMismatch(*e));
                }
            }
            agents.insert(name.into(), evs);
        }
        Ok(AgentPartition { agents })
    }

    /// Checks that the partition covers exactly the events of `alphabet`.
    pub fn check_covers(&self, alphabet: &Alphabet) -> Result<()> {
        let all: EventSet = self.agents.values().flatten().copied().collect();
        if all == alphabet.ids() {
            Ok(())
        } else {
            Err(DesError::Precondition(format!(
                "agent partition covers {{{}}} but alphabet is {{{}}}",
                fmt_set(&all),
                fmt_set(&alphabet.ids())
            )))
        }
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.agents.keys().map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn events_of(&self, agent: &str) -> Option<&EventSet> {
        self.agents.get(agent)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &EventSet)> {
        self.agents.iter().map(|(k, v)| (k.as_str(), v))
    }

    /// Σc^k: controllable events owned by `agent`.
    pub fn controllable_of(&self, agent: &str, alphabet: &Alphabet) -> EventSet {
        self.agents
            .get(agent)
            .map(|evs| {
                evs.iter()
                    .copied()
                    .filter(|e| alphabet.is_controllable(*e))
                    .collect()
            })
            .unwrap_or_default()
    }

    pub fn owner(&self, event: EventId) -> Option<&str> {
        self.agents
            .iter()
            .find(|(_, evs)| evs.contains(&event))
            .map(|(k, _)| k.as_str())
    }
}

/// Comma separated rendering of an event set, e.g. `1,2,6`.
pub fn fmt_set(set: &EventSet) -> String {
    set.iter()
        .map(|e| e.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_partition_alphabet() {
        let a = Alphabet::odd_controllable([1, 2, 3, 4, 5, 6, 8], None);
        assert_eq!(a.controllable(), events([1, 3, 5]));
        assert_eq!(a.uncontrollable(), events([2, 4, 6, 8]));
        assert!(a.controllable().is_disjoint(&a.uncontrollable()));
    }

    #[test]
    fn conflicting_flag_rejected() {
        let a = Alphabet::new().with(1, true, None).unwrap();
        assert_eq!(
            a.with(1, false, None).unwrap_err(),
            DesError::FlagMismatch(EventId(1))
        );
    }

    #[test]
    fn agent_tags_partition() {
        let a = Alphabet::new()
            .with(11, true, Some("A"))
            .unwrap()
            .with(10, false, Some("A"))
            .unwrap()
            .with(21, true, Some("B"))
            .unwrap();
        let p = a.agents().unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.controllable_of("A", &a), events([11]));
        assert_eq!(p.owner(EventId(21)), Some("B"));
        p.check_covers(&a).unwrap();
    }

    #[test]
    fn overlapping_partition_rejected() {
        let err = AgentPartition::new([("a", events([1, 2])), ("b", events([2]))]).unwrap_err();
        assert_eq!(err, DesError::AgentMismatch(EventId(2)));
    }
}
