//! Line-oriented text format for machines and symbol tables.
//!
//! One machine per file:
//!
//! ```text
//! #semiring tropical
//! #start 0
//! #initial 0.5            (omitted when it is the semiring one)
//! #isym a 1               (embedded symbol tables; optional on input)
//! #osym b 1
//! 0 1 a b 1.5             (src dst isym osym [weight])
//! 1 2.0                   (final state [weight])
//! ```
//!
//! `<eps>` denotes ε. When no `#start` header is present, the source state of
//! the first arc line (or the state of the first final line) is the start
//! state. Machines printed by this crate embed their symbol tables and an
//! explicit `#start`, so they are self-contained in shell pipelines;
//! `parse_fst` also accepts externally supplied tables, in which case an
//! unknown symbol is an error.
//!
//! Symbol table files are `<symbol><TAB><id>` per line with `<eps>` ↔ 0
//! mandatory.

use crate::error::{Error, Result};
use crate::fst::{Arc, Fst, FstBuilder, Label, StateId, SymbolTable, EPSILON_SYMBOL};
use crate::semiring::{format_weight, parse_weight, Semiring, Weight};

/// Renders a machine in the text format. Output is deterministic: states in
/// id order, arcs in insertion order, finals in state order.
pub fn format_fst(f: &Fst) -> String {
    let mut out = String::new();
    out.push_str(&format!("#semiring {}\n", f.semiring().name()));
    out.push_str(&format!("#start {}\n", f.start()));
    if !f.semiring().is_one(f.initial_weight()) {
        out.push_str(&format!("#initial {}\n", format_weight(f.initial_weight())));
    }
    for (l, s) in f.isyms().iter().skip(1) {
        out.push_str(&format!("#isym {s} {}\n", l.0));
    }
    for (l, s) in f.osyms().iter().skip(1) {
        out.push_str(&format!("#osym {s} {}\n", l.0));
    }
    for s in f.state_ids() {
        for a in f.arcs(s) {
            let isym = f.isyms().name(a.ilabel).unwrap_or("?");
            let osym = f.osyms().name(a.olabel).unwrap_or("?");
            out.push_str(&format!(
                "{s} {} {isym} {osym} {}\n",
                a.nextstate,
                format_weight(a.weight)
            ));
        }
    }
    for (s, w) in f.finals() {
        out.push_str(&format!("{s} {}\n", format_weight(w)));
    }
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

/// How symbols in arc lines are resolved.
enum Resolver {
    /// Fixed table; unknown symbols are errors.
    Fixed(SymbolTable),
    /// Growable table fed by `#isym`/`#osym` headers and first appearance.
    Auto(SymbolTable),
}

impl Resolver {
    fn resolve(&mut self, sym: &str, line: usize) -> Result<Label> {
        match self {
            Resolver::Fixed(t) => t.find(sym).ok_or_else(|| Error::UnknownSymbol {
                symbol: sym.to_string(),
                line,
            }),
            Resolver::Auto(t) => Ok(t.add_symbol(sym)),
        }
    }

    fn into_table(self) -> SymbolTable {
        match self {
            Resolver::Fixed(t) | Resolver::Auto(t) => t,
        }
    }
}

/// Parses the text format. `isyms`/`osyms` override any embedded tables;
/// when absent, embedded `#isym`/`#osym` headers are used, and symbols not
/// covered by either are assigned ids in order of first appearance.
/// `default_semiring` applies only when the `#semiring` header is missing.
pub fn parse_fst(
    text: &str,
    isyms: Option<&SymbolTable>,
    osyms: Option<&SymbolTable>,
    default_semiring: Semiring,
) -> Result<Fst> {
    // Header pass: semiring, start, initial weight, embedded tables.
    let mut semiring = None;
    let mut start: Option<usize> = None;
    let mut initial: Option<Weight> = None;
    let mut embedded_isyms: Vec<(String, u32, usize)> = Vec::new();
    let mut embedded_osyms: Vec<(String, u32, usize)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if !line.starts_with('#') {
            continue;
        }
        let mut parts = line.split_whitespace();
        let directive = parts.next().unwrap();
        let rest: Vec<&str> = parts.collect();
        match directive {
            "#semiring" => {
                let name = rest
                    .first()
                    .ok_or_else(|| parse_err(lineno, "missing semiring name"))?;
                semiring = Some(
                    Semiring::from_name(name)
                        .ok_or_else(|| parse_err(lineno, format!("unknown semiring `{name}`")))?,
                );
            }
            "#start" => {
                let id = rest
                    .first()
                    .and_then(|s| s.parse::<usize>().ok())
                    .ok_or_else(|| parse_err(lineno, "malformed #start"))?;
                start = Some(id);
            }
            "#initial" => {
                let w = rest
                    .first()
                    .ok_or_else(|| parse_err(lineno, "missing initial weight"))?;
                initial = Some(parse_weight(w).map_err(|m| parse_err(lineno, m))?);
            }
            "#isym" | "#osym" => {
                if rest.len() != 2 {
                    return Err(parse_err(lineno, format!("malformed {directive}")));
                }
                let id = rest[1]
                    .parse::<u32>()
                    .map_err(|_| parse_err(lineno, format!("malformed id in {directive}")))?;
                let entry = (rest[0].to_string(), id, lineno);
                if directive == "#isym" {
                    embedded_isyms.push(entry);
                } else {
                    embedded_osyms.push(entry);
                }
            }
            _ => return Err(parse_err(lineno, format!("unknown directive `{directive}`"))),
        }
    }
    let semiring = semiring.unwrap_or(default_semiring);

    let build_embedded = |entries: &[(String, u32, usize)]| -> Result<SymbolTable> {
        let mut t = SymbolTable::new();
        for (sym, id, lineno) in entries {
            if sym == EPSILON_SYMBOL && *id == 0 {
                continue;
            }
            let assigned = t.add_symbol(sym);
            if assigned.0 != *id {
                return Err(parse_err(
                    *lineno,
                    format!("symbol `{sym}` declared with id {id} but ids must be dense and in order (expected {})", assigned.0),
                ));
            }
        }
        Ok(t)
    };

    let mut iresolver = match isyms {
        Some(t) => Resolver::Fixed(t.clone()),
        None if !embedded_isyms.is_empty() => Resolver::Fixed(build_embedded(&embedded_isyms)?),
        None => Resolver::Auto(SymbolTable::new()),
    };
    let mut oresolver = match osyms {
        Some(t) => Resolver::Fixed(t.clone()),
        None if !embedded_osyms.is_empty() => Resolver::Fixed(build_embedded(&embedded_osyms)?),
        None => Resolver::Auto(SymbolTable::new()),
    };

    // Body pass.
    struct PendingArc {
        src: usize,
        dst: usize,
        ilabel: Label,
        olabel: Label,
        weight: Weight,
    }
    let mut arcs: Vec<PendingArc> = Vec::new();
    let mut finals: Vec<(usize, Weight)> = Vec::new();
    let mut max_state = 0usize;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        match fields.len() {
            1 | 2 => {
                let s = fields[0]
                    .parse::<usize>()
                    .map_err(|_| parse_err(lineno, "malformed state id"))?;
                let w = if fields.len() == 2 {
                    parse_weight(fields[1]).map_err(|m| parse_err(lineno, m))?
                } else {
                    semiring.one()
                };
                max_state = max_state.max(s);
                if start.is_none() && arcs.is_empty() && finals.is_empty() {
                    start = Some(s);
                }
                finals.push((s, w));
            }
            4 | 5 => {
                let src = fields[0]
                    .parse::<usize>()
                    .map_err(|_| parse_err(lineno, "malformed source state"))?;
                let dst = fields[1]
                    .parse::<usize>()
                    .map_err(|_| parse_err(lineno, "malformed target state"))?;
                let ilabel = iresolver.resolve(fields[2], lineno)?;
                let olabel = oresolver.resolve(fields[3], lineno)?;
                let weight = if fields.len() == 5 {
                    parse_weight(fields[4]).map_err(|m| parse_err(lineno, m))?
                } else {
                    semiring.one()
                };
                max_state = max_state.max(src).max(dst);
                if start.is_none() && arcs.is_empty() && finals.is_empty() {
                    start = Some(src);
                }
                arcs.push(PendingArc {
                    src,
                    dst,
                    ilabel,
                    olabel,
                    weight,
                });
            }
            n => {
                return Err(parse_err(
                    lineno,
                    format!("expected 1-2 fields (final) or 4-5 fields (arc), got {n}"),
                ))
            }
        }
    }

    let start = start.ok_or_else(|| Error::InvalidInput("no start state".to_string()))?;
    max_state = max_state.max(start);

    let mut b = FstBuilder::with_symbols(semiring, iresolver.into_table(), oresolver.into_table());
    b.add_states(max_state + 1);
    b.set_start(StateId(start));
    if let Some(w) = initial {
        b.set_initial_weight(w);
    }
    for a in arcs {
        b.add_arc(
            StateId(a.src),
            Arc::new(a.ilabel, a.olabel, a.weight, StateId(a.dst)),
        );
    }
    for (s, w) in finals {
        b.set_final(StateId(s), w);
    }
    b.build()
}

/// Renders a symbol table as `<symbol><TAB><id>` lines, ε first.
pub fn format_symbol_table(t: &SymbolTable) -> String {
    let mut out = String::new();
    for (l, s) in t.iter() {
        out.push_str(&format!("{s}\t{}\n", l.0));
    }
    out
}

/// Parses a symbol table file. Ids must be dense and the `<eps>` ↔ 0 entry
/// present (it may be omitted only as the implicit first entry).
pub fn parse_symbol_table(text: &str) -> Result<SymbolTable> {
    let mut t = SymbolTable::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let fields = if fields.len() == 2 {
            fields
        } else {
            line.split_whitespace().collect()
        };
        if fields.len() != 2 {
            return Err(parse_err(lineno, "expected `<symbol><TAB><id>`"));
        }
        let id = fields[1]
            .parse::<u32>()
            .map_err(|_| parse_err(lineno, "malformed id"))?;
        if fields[0] == EPSILON_SYMBOL {
            if id != 0 {
                return Err(parse_err(lineno, "<eps> must map to id 0"));
            }
            continue;
        }
        let assigned = t.add_symbol(fields[0]);
        if assigned.0 != id {
            return Err(parse_err(
                lineno,
                format!("ids must be dense and ascending: `{}` got {} expected {}", fields[0], id, assigned.0),
            ));
        }
    }
    Ok(t)
}
