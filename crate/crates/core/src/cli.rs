//! Command-line front end.

use crate::alphabet::{fmt_set, EventId, EventSet};
use crate::automaton::{language_equal, lift_to, sync_product, Automaton};
use crate::error::DesError;
use crate::eventred::{decomposability, RandomParams, TheoremOutcome};
use crate::format::{parse_model, serialize_model};
use crate::localize::localize;
use crate::models::{guideway_with, shared_resource, transfer_line, CaseStudy, GuidewayLayout, GuidewayOptions};
use crate::randtest::run_seeds;
use crate::reduce::supreduce;
use crate::report::{analyze, analyze_case, check_expected, Analysis, Check, Report, SeedRange};
use crate::synthesis::{is_controllable, observability_check, supcon, ObservationMode};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::io::{IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;
use thiserror::Error;

#[derive(Debug, Parser)]
#[command(name = "deslok", version, about = "Supervisor synthesis, reduction and localization for discrete-event systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct Output {
    /// Directory for result model files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Structured JSON report file.
    #[arg(long)]
    pub report: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synchronous product of model files.
    Sync {
        #[arg(required = true, num_args = 2..)]
        models: Vec<PathBuf>,
        #[arg(long, default_value = "sync")]
        name: String,
        #[command(flatten)]
        output: Output,
    },
    /// Supremal controllable sublanguage of plant and specification.
    Supcon {
        plant: PathBuf,
        spec: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Reduced supervisor.
    Supreduce {
        plant: PathBuf,
        sup: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Local controllers, one per agent tag of the plant alphabet.
    Localize {
        plant: PathBuf,
        sup: PathBuf,
        #[command(flatten)]
        output: Output,
    },
    /// Vacuous events, localizability verdicts, the reduction theorem and communication.
    Eventred {
        plant: PathBuf,
        sup: PathBuf,
        /// Decomposition alphabets, e.g. `1,2,3;4,5` (default: relevant sets).
        #[arg(long)]
        alphabets: Option<String>,
        #[command(flatten)]
        output: Output,
    },
    /// Language-level predicates.
    Check {
        #[command(subcommand)]
        what: CheckCommand,
        /// Exit 1 when the predicate is false.
        #[arg(long, global = true)]
        assert_expected: bool,
    },
    /// Built-in case studies.
    Demo {
        case: Case,
        /// Exit 1 unless every expected result is reproduced.
        #[arg(long)]
        assert_expected: bool,
        /// Transfer-line buffer capacities.
        #[arg(long, value_name = "C1,C2")]
        caps: Option<String>,
        /// Guideway section count.
        #[arg(long)]
        sections: Option<usize>,
        /// Guideway junction order.
        #[arg(long, value_enum, default_value_t = Layout::Stoplight)]
        layout: Layout,
        /// Guideway without the return from B to A.
        #[arg(long)]
        acyclic: bool,
        /// Synthesize with supC even where the case study specifies partial observation.
        #[arg(long)]
        full_observation: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Property suite over seeded random instances.
    Randtest {
        /// Inclusive seed range `a..b`.
        #[arg(long, default_value = "0..499")]
        seeds: String,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Debug, Subcommand)]
pub enum CheckCommand {
    /// Closed and marked language equality.
    Equivalence { a: PathBuf, b: PathBuf },
    /// Controllability of `k` w.r.t. the plant.
    Controllability { plant: PathBuf, k: PathBuf },
    /// Observability of `k`, plain or relative to an ambient language.
    Observability {
        plant: PathBuf,
        k: PathBuf,
        /// Observable events, e.g. `1,2,4`.
        #[arg(long)]
        observable: String,
        /// Ambient language for relative observability.
        #[arg(long)]
        ambient: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Mode::Observable)]
        mode: Mode,
    },
    /// Normality of the closure of `k` w.r.t. the observable events.
    Normality {
        plant: PathBuf,
        k: PathBuf,
        #[arg(long)]
        observable: String,
    },
    /// Decomposability of the closure of `k` w.r.t. local alphabets.
    Decomposability {
        plant: PathBuf,
        k: PathBuf,
        /// Local alphabets, e.g. `1,2,3;4,5`.
        #[arg(long)]
        alphabets: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Observable,
    Relative,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Case {
    Sharedresource,
    Guideway,
    Transferline,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Layout {
    Stoplight,
    Detector,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {message}")]
    Input { path: String, message: String },
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Des(#[from] DesError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

type CliResult<T> = std::result::Result<T, CliError>;

/// Exit status of a finished command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Failed,
}

struct Ui {
    color: bool,
}

impl Ui {
    fn new() -> Self {
        let off = std::env::var("DESLOK_COLOR").map(|v| v == "0").unwrap_or(false);
        Ui {
            color: !off && std::io::stdout().is_terminal(),
        }
    }

    fn mark(&self, pass: bool) -> String {
        let word = if pass { "PASS" } else { "FAIL" };
        match (self.color, pass) {
            (false, _) => word.to_owned(),
            (true, true) => format!("\x1b[32m{word}\x1b[0m"),
            (true, false) => format!("\x1b[31m{word}\x1b[0m"),
        }
    }
}

fn read_model(path: &Path) -> CliResult<Automaton> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let parsed = parse_model(&text).map_err(|e| CliError::Input {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    for w in &parsed.warnings {
        eprintln!("warning: {}: line {}: {}", path.display(), w.line, w.message);
    }
    Ok(parsed.automaton)
}

fn write_model(dir: &Path, a: &Automaton) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.display().to_string(),
        source,
    })?;
    let name = if a.name().is_empty() { "model" } else { a.name() };
    let path = dir.join(format!("{name}.des"));
    std::fs::write(&path, serialize_model(a)).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn finish(output: &Output, automata: &[&Automaton], report: &Report) -> CliResult<()> {
    if let Some(dir) = &output.out {
        for a in automata {
            write_model(dir, a)?;
        }
    }
    if let Some(path) = &output.report {
        std::fs::write(path, report.to_json()).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        })?;
    }
    Ok(())
}

pub fn parse_events(text: &str) -> CliResult<EventSet> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<u32>()
                .map(EventId)
                .map_err(|_| CliError::Usage(format!("bad event id `{s}`")))
        })
        .collect()
}

pub fn parse_alphabets(text: &str) -> CliResult<Vec<EventSet>> {
    text.split(';').map(parse_events).collect()
}

/// Inclusive range `a..b`.
pub fn parse_seeds(text: &str) -> CliResult<(u64, u64)> {
    let bad = || CliError::Usage(format!("bad seed range `{text}`, expected a..b"));
    let (a, b) = text.split_once("..").ok_or_else(bad)?;
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().parse().map_err(|_| bad())?;
    if a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn paths(ps: &[&PathBuf]) -> Vec<String> {
    ps.iter().map(|p| p.display().to_string()).collect()
}

fn plant_and_spec(plant: &Path, spec: &Path) -> CliResult<(Automaton, Automaton)> {
    let plant = read_model(plant)?;
    let spec = read_model(spec)?;
    let spec = if spec.alphabet().same_events(plant.alphabet()) {
        spec
    } else {
        lift_to(&spec, plant.alphabet())?
    };
    Ok((plant, spec))
}

fn print_analysis(ui: &Ui, title: &str, a: &Analysis) {
    println!(
        "{title}: plant {} states, SUP {} states, RSUP {} states",
        a.plant.state_count(),
        if a.sup.is_empty() { 0 } else { a.sup.state_count() },
        a.rsup.state_count()
    );
    println!("RSUP relevant {{{}}}", fmt_set(&a.verdict.rsup_relevant));
    println!("{:<8} {:>6}  {:<24} vacuous", "agent", "states", "relevant");
    for w in &a.verdict.witnesses {
        println!(
            "{:<8} {:>6}  {:<24} {{{}}}",
            w.agent,
            w.states,
            format!("{{{}}}", fmt_set(&w.relevant)),
            fmt_set(&w.vacuous)
        );
    }
    let v = &a.verdict;
    println!(
        "verdict: stateLocalizable={} eventLocalizable={} decomposable={}",
        v.state_localizable,
        v.event_localizable,
        v.decomposable.map_or("n/a".into(), |d| d.to_string())
    );
    let alphabets: Vec<String> = a.alphabets.iter().map(|s| format!("{{{}}}", fmt_set(s))).collect();
    println!(
        "decomposability w.r.t. {}: closed={} marked={}",
        alphabets.join(" "),
        a.decomposability.closed,
        a.decomposability.marked
    );
    for e in &a.theorem.entries {
        let text = match &e.outcome {
            TheoremOutcome::Skipped => "premise fails".to_owned(),
            TheoremOutcome::Witnessed { events } => format!("witness {{{}}}", fmt_set(events)),
            TheoremOutcome::Counterexample => "COUNTEREXAMPLE".to_owned(),
        };
        println!(
            "reduction theorem {}: |LOC| {} vs |RSUP| {}: {text} {}",
            e.agent,
            e.loc_states,
            e.rsup_states,
            ui.mark(e.outcome != TheoremOutcome::Counterexample)
        );
    }
    let c = &a.communication;
    println!(
        "communication: {} foreign events observed (RSUP baseline {})",
        c.total,
        c.rsup_baseline.map_or("n/a".into(), |b| b.to_string())
    );
    for p in &c.pairs {
        println!("  {} <- {}: {{{}}}", p.observer, p.owner, fmt_set(&p.events));
    }
}

fn print_checks(ui: &Ui, checks: &[Check]) {
    for c in checks {
        println!("{} {}: {}", ui.mark(c.pass), c.name, c.detail);
    }
}

pub fn case_study(
    case: Case,
    caps: Option<&str>,
    sections: Option<usize>,
    layout: Layout,
    acyclic: bool,
) -> CliResult<CaseStudy> {
    Ok(match case {
        Case::Sharedresource => shared_resource()?,
        Case::Guideway => guideway_with(GuidewayOptions {
            sections: sections.unwrap_or(4),
            layout: match layout {
                Layout::Stoplight => GuidewayLayout::StoplightFirst,
                Layout::Detector => GuidewayLayout::DetectorFirst,
            },
            cyclic: !acyclic,
        })?,
        Case::Transferline => {
            let (c1, c2) = match caps {
                None => (3, 1),
                Some(text) => {
                    let bad = || CliError::Usage(format!("bad capacities `{text}`, expected c1,c2"));
                    let (a, b) = text.split_once(',').ok_or_else(bad)?;
                    (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?)
                }
            };
            transfer_line(c1, c2)?
        }
    })
}

fn execute(cmd: Command, ui: &Ui) -> CliResult<Status> {
    match cmd {
        Command::Sync { models, name, output } => {
            let mut autos = models.iter().map(|p| read_model(p));
            let mut product = autos.next().expect("clap enforces two models")?;
            for a in autos {
                product = sync_product(&product, &a?)?;
            }
            let product = product.named(name);
            println!("{}: {} states, {} transitions", product.name(), product.state_count(), product.transition_count());
            let mut report = Report::new("sync", paths(&models.iter().collect::<Vec<_>>()));
            report.state_counts.insert(product.name().to_owned(), product.state_count());
            finish(&output, &[&product], &report)?;
        }
        Command::Supcon { plant, spec, output } => {
            let (g, e) = plant_and_spec(&plant, &spec)?;
            let sup = supcon(&g, &e)?.supervisor.named(format!("{}_sup", g.name()));
            let n = if sup.is_empty() { 0 } else { sup.state_count() };
            println!("{}: {n} states, {} transitions{}", sup.name(), sup.transition_count(), if sup.is_empty() { " (EMPTY)" } else { "" });
            let mut report = Report::new("supcon", paths(&[&plant, &spec]));
            report.state_counts.insert("plant".into(), g.state_count());
            report.state_counts.insert("SUP".into(), n);
            finish(&output, &[&sup], &report)?;
        }
        Command::Supreduce { plant, sup, output } => {
            let (g, s) = plant_and_spec(&plant, &sup)?;
            let r = supreduce(&s, &g)?.named(format!("{}_r", s.name()));
            println!("{}: {} states (from {})", r.name(), r.state_count(), s.state_count());
            let mut report = Report::new("supreduce", paths(&[&plant, &sup]));
            report.state_counts.insert("SUP".into(), s.state_count());
            report.state_counts.insert("RSUP".into(), r.state_count());
            report.add_events("RSUP", &r, &g)?;
            finish(&output, &[&r], &report)?;
        }
        Command::Localize { plant, sup, output } => {
            let (g, s) = plant_and_spec(&plant, &sup)?;
            let agents = g.alphabet().agents()?;
            let loc = localize(&s, &g, &agents)?;
            let mut report = Report::new("localize", paths(&[&plant, &sup]));
            report.state_counts.insert("SUP".into(), s.state_count());
            let mut controllers = Vec::new();
            for (k, l) in &loc.per_agent {
                println!("LOC_{k}: {} states", l.controller.state_count());
                report.state_counts.insert(format!("LOC_{k}"), l.controller.state_count());
                report.add_events(&format!("LOC_{k}"), &l.controller, &g)?;
                controllers.push(l.controller.clone());
            }
            finish(&output, &controllers.iter().collect::<Vec<_>>(), &report)?;
        }
        Command::Eventred { plant, sup, alphabets, output } => {
            let (g, s) = plant_and_spec(&plant, &sup)?;
            let agents = g.alphabet().agents()?;
            let alphabets = alphabets.as_deref().map(parse_alphabets).transpose()?;
            let a = analyze(&g, &s, &agents, alphabets.as_deref())?;
            print_analysis(ui, s.name(), &a);
            let report = Report::from_analysis("eventred", paths(&[&plant, &sup]), &a)?;
            let mut autos = vec![&a.rsup];
            autos.extend(a.localization.per_agent.values().map(|l| &l.controller));
            finish(&output, &autos, &report)?;
        }
        Command::Check { what, assert_expected } => {
            let holds = run_check(what)?;
            println!("{holds}");
            if assert_expected && !holds {
                return Ok(Status::Failed);
            }
        }
        Command::Demo {
            case,
            assert_expected,
            caps,
            sections,
            layout,
            acyclic,
            full_observation,
            output,
        } => {
            let mut cs = case_study(case, caps.as_deref(), sections, layout, acyclic)?;
            if full_observation {
                cs.observable = None;
            }
            let started = Instant::now();
            let a = analyze_case(&cs)?;
            eprintln!("{}: analysis took {:.3} s", cs.name, started.elapsed().as_secs_f64());
            print_analysis(ui, &cs.name, &a);
            let mut report = Report::from_analysis("demo", vec![cs.name.clone()], &a)?;
            if let Some(expected) = &cs.expected {
                report.checks = check_expected(&a, expected)?;
                print_checks(ui, &report.checks);
            } else if assert_expected {
                eprintln!("warning: no expected results for this configuration");
            }
            let spec = cs.spec.clone().named(format!("{}_spec", cs.name));
            let mut autos = vec![&a.plant, &spec, &a.sup, &a.rsup];
            autos.extend(a.localization.per_agent.values().map(|l| &l.controller));
            finish(&output, &autos, &report)?;
            if assert_expected && report.checks.iter().any(|c| !c.pass) {
                return Ok(Status::Failed);
            }
        }
        Command::Randtest { seeds, output } => {
            let (a, b) = parse_seeds(&seeds)?;
            let started = Instant::now();
            let outcomes = run_seeds(a..=b, &RandomParams::default())?;
            eprintln!("randtest: {} seeds in {:.3} s", outcomes.len(), started.elapsed().as_secs_f64());
            let nonempty = outcomes.iter().filter(|o| o.nonempty()).count();
            let premise: usize = outcomes.iter().map(|o| o.theorem.len()).sum();
            let mut failed = false;
            for o in &outcomes {
                if o.counterexamples > 0 {
                    failed = true;
                    println!("seed {}: {} reduction theorem counterexample(s)", o.seed, o.counterexamples);
                }
                for c in o.failed_checks() {
                    failed = true;
                    println!("seed {}: invariant failed: {}", o.seed, c.name);
                }
            }
            let counterexamples: usize = outcomes.iter().map(|o| o.counterexamples).sum();
            let checks: usize = outcomes.iter().map(|o| o.checks.len()).sum();
            println!(
                "{} seeds, {nonempty} nonempty, {premise} agents with |LOC| < |RSUP|, {counterexamples} counterexamples, {checks} invariant checks: {}",
                outcomes.len(),
                ui.mark(!failed)
            );
            let mut report = Report::new("randtest", Vec::new());
            report.seed = Some(SeedRange { start: a, end: b });
            report.extra.insert(
                "outcomes".into(),
                serde_json::to_value(&outcomes).unwrap_or_default(),
            );
            finish(&output, &[], &report)?;
            if failed {
                return Ok(Status::Failed);
            }
        }
    }
    Ok(Status::Ok)
}

fn run_check(what: CheckCommand) -> CliResult<bool> {
    Ok(match what {
        CheckCommand::Equivalence { a, b } => language_equal(&read_model(&a)?, &read_model(&b)?)?,
        CheckCommand::Controllability { plant, k } => {
            let (g, k) = plant_and_spec(&plant, &k)?;
            is_controllable(&k, &g)?
        }
        CheckCommand::Observability {
            plant,
            k,
            observable,
            ambient,
            mode,
        } => {
            let (g, k) = plant_and_spec(&plant, &k)?;
            let keep = parse_events(&observable)?;
            let ambient = match ambient {
                Some(p) => plant_and_spec(&plant, &p)?.1,
                None => k.clone(),
            };
            let mode = match mode {
                Mode::Observable => ObservationMode::Observable,
                Mode::Relative => ObservationMode::Relative,
                Mode::Normal => ObservationMode::Normal,
            };
            observability_check(&k, &ambient, &g, &keep, mode)?
        }
        CheckCommand::Normality { plant, k, observable } => {
            let (g, k) = plant_and_spec(&plant, &k)?;
            let keep = parse_events(&observable)?;
            observability_check(&k, &k, &g, &keep, ObservationMode::Normal)?
        }
        CheckCommand::Decomposability { plant, k, alphabets } => {
            let (g, k) = plant_and_spec(&plant, &k)?;
            decomposability(&k, &g, &parse_alphabets(&alphabets)?)?.closed
        }
    })
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let ui = Ui::new();
    let status = execute(cli.command, &ui);
    let _ = std::io::stdout().flush();
    match status {
        Ok(Status::Ok) => 0,
        Ok(Status::Failed) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
