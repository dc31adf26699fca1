//! Seeded random instances run through the whole pipeline.

use crate::automaton::{language_subset, sync_product};
use crate::error::Result;
use crate::eventred::{drop_is_sound, random_instance, vacuous_events, RandomParams, TheoremEntry};
use crate::localize::is_local_controller;
use crate::reduce::is_normal_supervisor;
use crate::report::{analyze, Analysis, Check};
use crate::synthesis::{control_equivalent, is_controllable, supcon};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SeedOutcome {
    pub seed: u64,
    pub plant_states: usize,
    pub sup_states: usize,
    pub rsup_states: Option<usize>,
    pub loc_states: Vec<(String, usize)>,
    /// Reduction theorem entries whose premise held.
    pub theorem: Vec<TheoremEntry>,
    pub counterexamples: usize,
    /// Every invariant checked, failing or not.
    pub checks: Vec<Check>,
    /// Vacuous events checked by drop-and-lift.
    pub vacuity_checked: usize,
}

impl SeedOutcome {
    pub fn nonempty(&self) -> bool {
        self.rsup_states.is_some()
    }

    pub fn failed_checks(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }
}

fn push(checks: &mut Vec<Check>, name: &str, pass: bool) {
    checks.push(Check {
        name: name.to_owned(),
        pass,
        detail: String::new(),
    });
}

/// Invariants of a reduced and localized supervisor; returns the number of
/// vacuous events verified by drop-and-lift.
pub fn pipeline_checks(a: &Analysis, checks: &mut Vec<Check>) -> Result<usize> {
    let plant = &a.plant;
    push(checks, "rsup control equivalent", control_equivalent(plant, &a.rsup, &a.sup)?);
    push(checks, "rsup normal", is_normal_supervisor(&a.rsup, &a.sup)?);
    let meet = a.localization.meet()?;
    push(checks, "meet control equivalent", control_equivalent(plant, &meet, &a.sup)?);
    let mut vacuity = 0;
    for e in vacuous_events(&a.rsup, plant)? {
        push(checks, "vacuity sound", drop_is_sound(&a.rsup, plant, e)?);
        vacuity += 1;
    }
    for (k, l) in &a.localization.per_agent {
        push(checks, "loc normal", is_normal_supervisor(&l.generator, &a.sup)?);
        let own = a.localization.agents.controllable_of(k, plant.alphabet());
        push(checks, "loc local", is_local_controller(&l.controller, plant, &own)?);
        push(checks, "loc no larger than sup", l.controller.state_count() <= a.sup.state_count());
        for &e in &a.verdict.witness(k).map(|w| w.vacuous.clone()).unwrap_or_default() {
            push(checks, "vacuity sound", drop_is_sound(&l.controller, plant, e)?);
            vacuity += 1;
        }
    }
    push(checks, "verdict self consistent", a.verdict.is_self_consistent());
    Ok(vacuity)
}

pub fn run_seed(seed: u64, params: &RandomParams) -> Result<SeedOutcome> {
    let inst = random_instance(seed, params)?;
    let plant = &inst.plant;
    let sup = supcon(plant, &inst.spec)?.supervisor;
    let mut checks = Vec::new();
    push(&mut checks, "sup controllable", is_controllable(&sup, plant)?);
    push(&mut checks, "sup nonblocking", sup.is_empty() || sup.is_nonblocking());
    push(&mut checks, "sup within plant and spec", language_subset(&sup, &sync_product(plant, &inst.spec)?)?);
    let mut out = SeedOutcome {
        seed,
        plant_states: plant.state_count(),
        sup_states: if sup.is_empty() { 0 } else { sup.state_count() },
        rsup_states: None,
        loc_states: Vec::new(),
        theorem: Vec::new(),
        counterexamples: 0,
        checks,
        vacuity_checked: 0,
    };
    if sup.is_empty() {
        return Ok(out);
    }
    let a = analyze(plant, &sup, &inst.agents, None)?;
    out.vacuity_checked = pipeline_checks(&a, &mut out.checks)?;
    out.rsup_states = Some(a.rsup.state_count());
    out.loc_states = a
        .localization
        .per_agent
        .iter()
        .map(|(k, l)| (k.clone(), l.controller.state_count()))
        .collect();
    out.counterexamples = a.theorem.counterexamples().count();
    out.theorem = a
        .theorem
        .entries
        .into_iter()
        .filter(|e| e.loc_states < e.rsup_states)
        .collect();
    Ok(out)
}

/// Runs `seeds` in parallel; results are ordered by seed.
pub fn run_seeds(seeds: std::ops::RangeInclusive<u64>, params: &RandomParams) -> Result<Vec<SeedOutcome>> {
    let seeds: Vec<u64> = seeds.collect();
    seeds.par_iter().map(|&s| run_seed(s, params)).collect()
}
