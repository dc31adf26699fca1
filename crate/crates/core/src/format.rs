//! Text model files.
//!
//! ```text
//! des <name>
//! states <N>
//! initial <i>
//! marked <i> [<i> ...]
//! event <id> [c|u] [agent=<tag>]
//! trans <from> <id> <to>
//! ```
//!
//! Blank lines and `#` comments are ignored. `states 0` denotes the EMPTY
//! automaton and takes no `initial` line. An event without a `c`/`u` flag is
//! controllable iff its id is odd; such events produce a warning.

use crate::alphabet::{Alphabet, EventId};
use crate::automaton::{Automaton, StateId};
use std::collections::BTreeSet;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub line: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct Parsed {
    pub automaton: Automaton,
    pub warnings: Vec<Warning>,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        line,
        message: message.into(),
    })
}

fn number<T: std::str::FromStr>(line: usize, word: &str, what: &str) -> Result<T, ParseError> {
    word.parse()
        .or_else(|_| err(line, format!("expected {what}, found `{word}`")))
}

pub fn parse_model(text: &str) -> Result<Parsed, ParseError> {
    let mut name: Option<String> = None;
    let mut states: Option<(usize, usize)> = None;
    let mut initial: Option<(usize, usize)> = None;
    let mut marked: Vec<(usize, StateId)> = Vec::new();
    let mut alphabet = Alphabet::new();
    let mut trans: Vec<(usize, StateId, EventId, StateId)> = Vec::new();
    let mut warnings = Vec::new();
    let mut last = 0;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        last = line;
        let content = raw.split('#').next().unwrap_or("");
        let words: Vec<&str> = content.split_whitespace().collect();
        let Some((&head, args)) = words.split_first() else {
            continue;
        };
        if name.is_none() && head != "des" {
            return err(line, "model must start with `des <name>`");
        }
        match head {
            "des" => {
                if name.is_some() {
                    return err(line, "second `des` header");
                }
                if args.len() > 1 {
                    return err(line, "model name must not contain whitespace");
                }
                name = Some(args.first().copied().unwrap_or("").to_owned());
            }
            "states" => {
                if states.is_some() {
                    return err(line, "duplicate `states` line");
                }
                let [n] = args else {
                    return err(line, "expected `states <N>`");
                };
                states = Some((line, number(line, n, "state count")?));
            }
            "initial" => {
                if initial.is_some() {
                    return err(line, "duplicate `initial` line");
                }
                let [s] = args else {
                    return err(line, "expected `initial <i>`");
                };
                initial = Some((line, number(line, s, "state index")?));
            }
            "marked" => {
                if args.is_empty() {
                    return err(line, "expected `marked <i> [<i> ...]`");
                }
                for s in args {
                    marked.push((line, number(line, s, "state index")?));
                }
            }
            "event" => {
                let Some((id, rest)) = args.split_first() else {
                    return err(line, "expected `event <id> [c|u] [agent=<tag>]`");
                };
                let id = EventId(number(line, id, "event id")?);
                let mut flag = None;
                let mut agent = None;
                for w in rest {
                    match *w {
                        "c" | "u" if flag.is_none() && agent.is_none() => flag = Some(*w == "c"),
                        w if w.starts_with("agent=") && agent.is_none() && w.len() > 6 => {
                            agent = Some(&w[6..])
                        }
                        w => return err(line, format!("unexpected `{w}` in event declaration")),
                    }
                }
                let controllable = match flag {
                    Some(c) => c,
                    None => {
                        let c = id.0 % 2 == 1;
                        warnings.push(Warning {
                            line,
                            message: format!(
                                "event {id} has no c/u flag; taken as {}",
                                if c { "controllable (odd id)" } else { "uncontrollable (even id)" }
                            ),
                        });
                        c
                    }
                };
                if let Some(info) = alphabet.info(id) {
                    if info.controllable != controllable {
                        return err(line, format!("event {id} redeclared with a conflicting flag"));
                    }
                    return err(line, format!("event {id} declared twice"));
                }
                alphabet
                    .insert(id, controllable, agent)
                    .or_else(|e| err(line, e.to_string()))?;
            }
            "trans" => {
                let [f, e, t] = args else {
                    return err(line, "expected `trans <from> <id> <to>`");
                };
                trans.push((
                    line,
                    number(line, f, "state index")?,
                    EventId(number(line, e, "event id")?),
                    number(line, t, "state index")?,
                ));
            }
            other => return err(line, format!("unknown keyword `{other}`")),
        }
    }

    let Some(name) = name else {
        return err(last.max(1), "missing `des <name>` header");
    };
    let Some((states_line, n)) = states else {
        return err(last.max(1), "missing `states <N>` line");
    };
    if n == 0 {
        if let Some((line, _)) = initial {
            return err(line, "EMPTY model (`states 0`) takes no initial state");
        }
        if let Some(&(line, _)) = marked.first() {
            return err(line, "EMPTY model (`states 0`) has no marked states");
        }
        if let Some(&(line, ..)) = trans.first() {
            return err(line, "EMPTY model (`states 0`) has no transitions");
        }
        return Ok(Parsed {
            automaton: Automaton::empty(alphabet).named(name),
            warnings,
        });
    }
    let Some((init_line, init)) = initial else {
        return err(states_line, "missing `initial <i>` line");
    };
    if init >= n {
        return err(init_line, format!("initial state {init} out of range (states = {n})"));
    }
    let mut seen_marked = BTreeSet::new();
    for &(line, m) in &marked {
        if m >= n {
            return err(line, format!("marked state {m} out of range (states = {n})"));
        }
        if !seen_marked.insert(m) {
            return err(line, format!("state {m} marked twice"));
        }
    }
    let mut seen = BTreeSet::new();
    for &(line, f, e, t) in &trans {
        if !alphabet.contains(e) {
            return err(line, format!("transition uses undeclared event {e}"));
        }
        for s in [f, t] {
            if s >= n {
                return err(line, format!("state {s} out of range (states = {n})"));
            }
        }
        if !seen.insert((f, e)) {
            return err(line, format!("duplicate transition on event {e} at state {f}"));
        }
    }
    let automaton = Automaton::new(
        alphabet,
        n,
        init,
        seen_marked,
        trans.iter().map(|&(_, f, e, t)| (f, e, t)),
    )
    .or_else(|e| err(states_line, e.to_string()))?
    .named(name);
    Ok(Parsed { automaton, warnings })
}

/// Canonical text: every flag explicit, transitions sorted by state then event.
/// Whitespace in the name is replaced by `_`.
pub fn serialize_model(a: &Automaton) -> String {
    let mut out = String::new();
    let name: String = a
        .name()
        .chars()
        .map(|c| if c.is_whitespace() || c == '#' { '_' } else { c })
        .collect();
    if name.is_empty() {
        out.push_str("des\n");
    } else {
        let _ = writeln!(out, "des {name}");
    }
    if a.is_empty() {
        out.push_str("states 0\n");
    } else {
        let _ = writeln!(out, "states {}", a.state_count());
        let _ = writeln!(out, "initial {}", a.initial());
        let marked = a.marked_states();
        if !marked.is_empty() {
            let list: Vec<String> = marked.iter().map(|m| m.to_string()).collect();
            let _ = writeln!(out, "marked {}", list.join(" "));
        }
    }
    for (id, info) in a.alphabet().iter() {
        let _ = write!(out, "event {id} {}", if info.controllable { "c" } else { "u" });
        if let Some(tag) = &info.agent {
            let _ = write!(out, " agent={tag}");
        }
        out.push('\n');
    }
    if !a.is_empty() {
        for (f, e, t) in a.transitions() {
            let _ = writeln!(out, "trans {f} {e} {t}");
        }
    }
    out
}
