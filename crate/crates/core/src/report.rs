//! End-to-end analysis of a plant and supervisor, and its serialized report.

use crate::alphabet::{AgentPartition, EventSet};
use crate::automaton::{des_isomorphism, Automaton};
use crate::error::Result;
use crate::eventred::{
    check_reduction_theorem, communication_report, decomposability, localizability_verdict, relevant_events,
    vacuous_events, AgentWitness, CommunicationReport, Decomposability, TheoremReport, Verdict,
};
use crate::localize::{localize, Localization};
use crate::models::{CaseStudy, Expected};
use crate::reduce::supreduce;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone)]
pub struct Analysis {
    pub plant: Automaton,
    pub sup: Automaton,
    pub rsup: Automaton,
    pub localization: Localization,
    pub verdict: Verdict,
    pub theorem: TheoremReport,
    pub communication: CommunicationReport,
    /// Decomposability w.r.t. `alphabets`.
    pub decomposability: Decomposability,
    pub alphabets: Vec<EventSet>,
}

/// Reduces and localizes `sup`. Decomposability is checked w.r.t.
/// `alphabets`, or the relevant sets of the local controllers when `None`.
pub fn analyze(
    plant: &Automaton,
    sup: &Automaton,
    agents: &AgentPartition,
    alphabets: Option<&[EventSet]>,
) -> Result<Analysis> {
    let rsup = supreduce(sup, plant)?.named(format!("{}_r", sup.name()));
    let localization = localize(sup, plant, agents)?;
    let mut verdict = localizability_verdict(&rsup, &localization)?;
    let theorem = check_reduction_theorem(&rsup, &localization)?;
    let communication = communication_report(&localization, Some(&rsup))?;
    let alphabets: Vec<EventSet> = match alphabets {
        Some(a) => a.to_vec(),
        None => verdict.witnesses.iter().map(|w| w.relevant.clone()).collect(),
    };
    let decomposability = decomposability(sup, plant, &alphabets)?;
    verdict.decomposable = Some(decomposability.closed);
    Ok(Analysis {
        plant: plant.clone(),
        sup: sup.clone(),
        rsup,
        localization,
        verdict,
        theorem,
        communication,
        decomposability,
        alphabets,
    })
}

pub fn analyze_case(cs: &CaseStudy) -> Result<Analysis> {
    let plant = cs.plant()?;
    let sup = cs.supervisor(&plant)?;
    let alphabets = cs
        .expected
        .as_ref()
        .filter(|e| !e.decomposition_alphabets.is_empty())
        .map(|e| e.decomposition_alphabets.as_slice());
    analyze(&plant, &sup, &cs.agents, alphabets)
}

/// One comparison against an expected record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, pass: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        pass,
        detail: detail.into(),
    }
}

pub fn check_expected(analysis: &Analysis, expected: &Expected) -> Result<Vec<Check>> {
    let v = &analysis.verdict;
    let mut out = vec![
        check(
            "stateLocalizable",
            v.state_localizable == expected.state_localizable,
            format!("got {}, expected {}", v.state_localizable, expected.state_localizable),
        ),
        check(
            "eventLocalizable",
            v.event_localizable == expected.event_localizable,
            format!("got {}, expected {}", v.event_localizable, expected.event_localizable),
        ),
    ];
    if let Some(d) = expected.decomposable {
        let got = analysis.decomposability.closed;
        out.push(check("decomposable", got == d, format!("got {got}, expected {d}")));
    }
    for (k, want) in &expected.relevant {
        let got = v.witness(k).map(|w| w.relevant.clone()).unwrap_or_default();
        out.push(check(
            format!("relevant({k})"),
            &got == want,
            format!("got {}, expected {}", crate::alphabet::fmt_set(&got), crate::alphabet::fmt_set(want)),
        ));
    }
    for (k, want) in &expected.vacuous_at_least {
        let got = v.witness(k).map(|w| w.vacuous.clone()).unwrap_or_default();
        out.push(check(
            format!("vacuous({k}) superset"),
            want.is_subset(&got),
            format!("got {}, expected at least {}", crate::alphabet::fmt_set(&got), crate::alphabet::fmt_set(want)),
        ));
    }
    if expected.locs_isomorphic_to_sup {
        for (k, l) in &analysis.localization.per_agent {
            let iso = des_isomorphism(&l.controller, &analysis.sup)?.is_some();
            out.push(check(
                format!("LOC({k}) isomorphic to SUP"),
                iso,
                format!("|LOC| = {}, |SUP| = {}", l.controller.state_count(), analysis.sup.state_count()),
            ));
        }
    }
    if expected.locs_as_large_as_rsup {
        for (k, l) in &analysis.localization.per_agent {
            let (a, b) = (l.controller.state_count(), analysis.rsup.state_count());
            out.push(check(format!("|LOC({k})| = |RSUP|"), a == b, format!("{a} vs {b}")));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SeedRange {
    pub start: u64,
    pub end: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct VerdictSummary {
    pub state_localizable: bool,
    pub event_localizable: bool,
    pub decomposable: Option<bool>,
}

/// The structured report. Contains no timings, so identical runs serialize
/// to identical bytes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Report {
    pub schema: u32,
    pub command: String,
    pub inputs: Vec<String>,
    pub verdict: Option<VerdictSummary>,
    pub vacuous: BTreeMap<String, EventSet>,
    pub relevant: BTreeMap<String, EventSet>,
    pub state_counts: BTreeMap<String, usize>,
    pub witnesses: Vec<AgentWitness>,
    pub communication: Option<CommunicationReport>,
    pub seed: Option<SeedRange>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extra: BTreeMap<String, serde_json::Value>,
}

impl Report {
    pub fn new(command: impl Into<String>, inputs: Vec<String>) -> Self {
        Report {
            schema: SCHEMA_VERSION,
            command: command.into(),
            inputs,
            verdict: None,
            vacuous: BTreeMap::new(),
            relevant: BTreeMap::new(),
            state_counts: BTreeMap::new(),
            witnesses: Vec::new(),
            communication: None,
            seed: None,
            checks: Vec::new(),
            extra: BTreeMap::new(),
        }
    }

    /// Vacuous and relevant events of a single automaton, keyed by its name.
    pub fn add_events(&mut self, key: &str, a: &Automaton, plant: &Automaton) -> Result<()> {
        self.vacuous.insert(key.to_owned(), vacuous_events(a, plant)?);
        self.relevant.insert(key.to_owned(), relevant_events(a, plant)?);
        Ok(())
    }

    pub fn from_analysis(command: impl Into<String>, inputs: Vec<String>, a: &Analysis) -> Result<Self> {
        let mut r = Report::new(command, inputs);
        r.verdict = Some(VerdictSummary {
            state_localizable: a.verdict.state_localizable,
            event_localizable: a.verdict.event_localizable,
            decomposable: a.verdict.decomposable,
        });
        r.state_counts.insert("plant".into(), a.plant.state_count());
        r.state_counts.insert("SUP".into(), a.sup.state_count());
        r.state_counts.insert("RSUP".into(), a.rsup.state_count());
        r.add_events("RSUP", &a.rsup, &a.plant)?;
        for w in &a.verdict.witnesses {
            r.state_counts.insert(format!("LOC_{}", w.agent), w.states);
            r.vacuous.insert(format!("LOC_{}", w.agent), w.vacuous.clone());
            r.relevant.insert(format!("LOC_{}", w.agent), w.relevant.clone());
        }
        r.witnesses = a.verdict.witnesses.clone();
        r.communication = Some(a.communication.clone());
        r.extra.insert("reductionTheorem".into(), serde_json::to_value(&a.theorem).unwrap_or_default());
        r.extra.insert(
            "decomposability".into(),
            serde_json::json!({
                "alphabets": a.alphabets,
                "closed": a.decomposability.closed,
                "marked": a.decomposability.marked,
            }),
        );
        Ok(r)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
