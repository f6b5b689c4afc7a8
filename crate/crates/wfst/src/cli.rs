//! Command-line toolkit over the text format.
//!
//! Machines pipe through stdin/stdout as text; `-` means stdin. Exit code 0
//! is success, 1 a domain error (semiring mismatch, non-determinizable
//! input, no accepting path, …), 2 a usage error (bad flags, missing
//! files).

use std::ffi::OsString;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::cascade::{
    cd_unit_symbols, context_dependency, lexicon, ngram_model, observation_acceptor, LexEntry,
};
use crate::compose::{compose_eager, LazyFst};
use crate::error::Error;
use crate::fst::{Arc, Fst, FstBuilder, SymbolTable, EPSILON};
use crate::optimize::{determinize, minimize, push_weights, rm_epsilon, DEFAULT_MAX_STATES};
use crate::rational::{closure, concat, union};
use crate::search::shortest_path;
use crate::semiring::{Semiring, Weight};
use crate::text::{format_fst, parse_fst, parse_symbol_table};

#[derive(Parser)]
#[command(name = "wfst", version, about = "Weighted finite-state transducer toolkit")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Parse a textual machine description into canonical form.
    Compile {
        /// Input symbol table file.
        #[arg(long)]
        isyms: Option<PathBuf>,
        /// Output symbol table file.
        #[arg(long)]
        osyms: Option<PathBuf>,
        /// Semiring used when the input carries no #semiring header.
        #[arg(long, default_value = "tropical")]
        semiring: String,
        /// Write the result here instead of stdout.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Input file, or `-` for stdin.
        input: String,
    },
    /// Print a machine in text format.
    Print { input: String },
    /// Union of two machines.
    Union {
        a: String,
        b: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Concatenation of two machines.
    Concat {
        a: String,
        b: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Kleene closure of a machine.
    Closure {
        input: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Composition of two machines.
    Compose {
        a: String,
        b: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Remove ε:ε arcs.
    Rmepsilon {
        input: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Determinize a weighted acceptor.
    Determinize {
        /// Abort once the subset construction exceeds this many states.
        #[arg(long, default_value_t = DEFAULT_MAX_STATES)]
        max_states: usize,
        input: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Push weights toward the initial state.
    Push {
        input: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Minimize a deterministic weighted acceptor.
    Minimize {
        input: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print the best path as `<ilabels>\t<olabels>\t<weight>`.
    Shortestpath { input: String },
    /// Check structural invariants; prints one line per problem found.
    Validate { input: String },
    /// Decode an observation sequence through the recognition cascade.
    Decode {
        /// Whitespace-separated observation symbols.
        #[arg(long)]
        obs: PathBuf,
        /// Directory of acoustic model TSV files
        /// (`unit<TAB>obs obs ...<TAB>prob` per line).
        #[arg(long)]
        am: PathBuf,
        /// Insert the context-dependency transducer (acoustic units are then
        /// `l-c+r` CD phones instead of plain phones).
        #[arg(long)]
        cd: bool,
        /// Lexicon TSV: `word<TAB>phone phone ...<TAB>prob` per line.
        #[arg(long)]
        lex: PathBuf,
        /// Bigram counts TSV: `w1<TAB>w2<TAB>count` per line.
        #[arg(long)]
        lm: PathBuf,
    },
}

enum CliError {
    /// Bad invocation: unreadable files, malformed auxiliary inputs.
    Usage(String),
    /// The operation itself failed.
    Domain(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Domain(e)
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read_input(path: &str) -> CliResult<String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .map_err(|e| CliError::Usage(format!("stdin: {e}")))?;
        Ok(buf)
    } else {
        read_file(Path::new(path))
    }
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn read_fst(path: &str) -> CliResult<Fst> {
    let text = read_input(path)?;
    Ok(parse_fst(&text, None, None, Semiring::Tropical)?)
}

fn emit(f: &Fst, output: Option<&Path>) -> CliResult<()> {
    let text = format_fst(f);
    match output {
        Some(p) => fs::write(p, text)
            .map_err(|e| CliError::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn join_labels(labels: &[crate::fst::Label], table: &SymbolTable) -> String {
    labels
        .iter()
        .map(|&l| table.name(l).unwrap_or("?").to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

/// One acoustic model: a CD unit (or phone), the observation sequence of one
/// realization, and its probability.
struct AmLine {
    unit: String,
    obs: Vec<String>,
    prob: f64,
}

fn parse_tsv3(path: &Path) -> CliResult<Vec<(String, String, String)>> {
    let text = read_file(path)?;
    let mut rows = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(CliError::Usage(format!(
                "{}:{}: expected 3 tab-separated fields",
                path.display(),
                idx + 1
            )));
        }
        rows.push((
            fields[0].to_string(),
            fields[1].to_string(),
            fields[2].to_string(),
        ));
    }
    Ok(rows)
}

fn parse_prob(s: &str, path: &Path) -> CliResult<f64> {
    s.parse::<f64>()
        .map_err(|_| CliError::Usage(format!("{}: bad number `{s}`", path.display())))
}

fn push_unique(list: &mut Vec<String>, item: &str) {
    if !list.iter().any(|x| x == item) {
        list.push(item.to_string());
    }
}

fn run_decode(obs: &Path, am: &Path, cd: bool, lex: &Path, lm: &Path) -> CliResult<()> {
    let sem = Semiring::Tropical;

    // Lexicon: words and the phone inventory in order of first appearance.
    let mut entries: Vec<LexEntry> = Vec::new();
    let mut inventory: Vec<String> = Vec::new();
    for (word, phones_field, prob) in parse_tsv3(lex)? {
        let phones: Vec<String> = phones_field.split_whitespace().map(str::to_string).collect();
        let p = parse_prob(&prob, lex)?;
        for ph in &phones {
            push_unique(&mut inventory, ph);
        }
        match entries.iter_mut().find(|e| e.word == word) {
            Some(e) => e.prons.push((phones, p)),
            None => entries.push(LexEntry {
                word,
                prons: vec![(phones, p)],
            }),
        }
    }
    if entries.is_empty() {
        return Err(CliError::Usage(format!("{}: empty lexicon", lex.display())));
    }
    let inventory_refs: Vec<&str> = inventory.iter().map(String::as_str).collect();
    let phone_syms = crate::cascade::phone_symbols(&inventory_refs);
    let words: Vec<&str> = entries.iter().map(|e| e.word.as_str()).collect();
    let word_syms = crate::cascade::word_symbols(&words);

    // Acoustic models from every file in the directory, in name order.
    let mut am_files: Vec<PathBuf> = fs::read_dir(am)
        .map_err(|e| CliError::Usage(format!("{}: {e}", am.display())))?
        .filter_map(|r| r.ok().map(|d| d.path()))
        .filter(|p| p.is_file())
        .collect();
    am_files.sort();
    let mut am_lines: Vec<AmLine> = Vec::new();
    let mut obs_inventory: Vec<String> = Vec::new();
    for file in &am_files {
        for (unit, obs_field, prob) in parse_tsv3(file)? {
            let obs_seq: Vec<String> = obs_field.split_whitespace().map(str::to_string).collect();
            if obs_seq.is_empty() {
                return Err(CliError::Usage(format!(
                    "{}: empty observation sequence",
                    file.display()
                )));
            }
            for o in &obs_seq {
                push_unique(&mut obs_inventory, o);
            }
            am_lines.push(AmLine {
                unit,
                obs: obs_seq,
                prob: parse_prob(&prob, file)?,
            });
        }
    }
    if am_lines.is_empty() {
        return Err(CliError::Usage(format!(
            "{}: no acoustic model lines",
            am.display()
        )));
    }
    let obs_syms = SymbolTable::from_symbols(obs_inventory.iter().map(String::as_str));
    let unit_syms = if cd {
        cd_unit_symbols(&inventory_refs)
    } else {
        phone_syms.clone()
    };

    let mut models = Vec::new();
    for line in &am_lines {
        let unit = unit_syms.find(&line.unit).ok_or_else(|| {
            CliError::Domain(Error::InvalidInput(format!(
                "acoustic unit `{}` is not derivable from the lexicon",
                line.unit
            )))
        })?;
        let mut b = FstBuilder::with_symbols(sem, obs_syms.clone(), unit_syms.clone());
        let states = b.add_states(line.obs.len() + 1);
        b.set_start(states[0]);
        for (i, o) in line.obs.iter().enumerate() {
            let il = obs_syms.find(o).unwrap();
            let (ol, w) = if i == 0 {
                (unit, Weight::new(-line.prob.ln()))
            } else {
                (EPSILON, sem.one())
            };
            b.add_arc(states[i], Arc::new(il, ol, w, states[i + 1]));
        }
        b.set_final(states[line.obs.len()], sem.one());
        models.push(b.build()?);
    }
    let a = crate::cascade::phone_model_transducer(&models)?;

    let d = lexicon(sem, &entries, &phone_syms, &word_syms)?;
    let counts: Vec<(String, String, f64)> = parse_tsv3(lm)?
        .into_iter()
        .map(|(w1, w2, c)| Ok((w1, w2, parse_prob(&c, lm)?)))
        .collect::<CliResult<_>>()?;
    let m = ngram_model(sem, &counts, &words, &word_syms)?;

    let obs_text = read_file(obs)?;
    let obs_seq: Vec<&str> = obs_text.split_whitespace().collect();
    let o = observation_acceptor(sem, &obs_seq, &obs_syms)?;

    let (decoded, weight) = if cd {
        let c = context_dependency(sem, &inventory_refs)?;
        crate::cascade::decode(&o, &a, &c, &d, &m)?
    } else {
        let oa = LazyFst::new(&o, &a)?;
        let oad = LazyFst::new(&oa, &d)?;
        let full = LazyFst::new(&oad, &m)?;
        let g = full.expand_all()?;
        let (_, out, w) = shortest_path(&g)?.ok_or(Error::NoPath)?;
        let names = out
            .iter()
            .map(|&l| g.osyms().name(l).unwrap_or("?").to_string())
            .collect();
        (names, w)
    };
    println!("{}\t{}", decoded.join(" "), weight);
    Ok(())
}

fn run(cmd: Cmd) -> CliResult<()> {
    match cmd {
        Cmd::Compile {
            isyms,
            osyms,
            semiring,
            output,
            input,
        } => {
            let sem = Semiring::from_name(&semiring)
                .ok_or_else(|| CliError::Usage(format!("unknown semiring `{semiring}`")))?;
            let istab = isyms
                .map(|p| Ok::<_, CliError>(parse_symbol_table(&read_file(&p)?)?))
                .transpose()?;
            let ostab = osyms
                .map(|p| Ok::<_, CliError>(parse_symbol_table(&read_file(&p)?)?))
                .transpose()?;
            let text = read_input(&input)?;
            let f = parse_fst(&text, istab.as_ref(), ostab.as_ref(), sem)?;
            emit(&f, output.as_deref())
        }
        Cmd::Print { input } => {
            let f = read_fst(&input)?;
            print!("{}", format_fst(&f));
            Ok(())
        }
        Cmd::Union { a, b, output } => {
            let (fa, fb) = (read_fst(&a)?, read_fst(&b)?);
            emit(&union(&fa, &fb)?, output.as_deref())
        }
        Cmd::Concat { a, b, output } => {
            let (fa, fb) = (read_fst(&a)?, read_fst(&b)?);
            emit(&concat(&fa, &fb)?, output.as_deref())
        }
        Cmd::Closure { input, output } => {
            let f = read_fst(&input)?;
            emit(&closure(&f)?, output.as_deref())
        }
        Cmd::Compose { a, b, output } => {
            let (fa, fb) = (read_fst(&a)?, read_fst(&b)?);
            emit(&compose_eager(&fa, &fb)?, output.as_deref())
        }
        Cmd::Rmepsilon { input, output } => {
            let f = read_fst(&input)?;
            emit(&rm_epsilon(&f)?, output.as_deref())
        }
        Cmd::Determinize {
            max_states,
            input,
            output,
        } => {
            let f = read_fst(&input)?;
            emit(&determinize(&f, max_states)?, output.as_deref())
        }
        Cmd::Push { input, output } => {
            let f = read_fst(&input)?;
            emit(&push_weights(&f)?, output.as_deref())
        }
        Cmd::Minimize { input, output } => {
            let f = read_fst(&input)?;
            emit(&minimize(&f)?, output.as_deref())
        }
        Cmd::Shortestpath { input } => {
            let f = read_fst(&input)?;
            let (ilabels, olabels, w) = shortest_path(&f)?.ok_or(Error::NoPath)?;
            println!(
                "{}\t{}\t{}",
                join_labels(&ilabels, f.isyms()),
                join_labels(&olabels, f.osyms()),
                w
            );
            Ok(())
        }
        Cmd::Validate { input } => {
            let f = read_fst(&input)?;
            let problems = f.validate();
            if problems.is_empty() {
                println!("ok");
                Ok(())
            } else {
                for p in &problems {
                    println!("{p}");
                }
                Err(CliError::Domain(Error::InvalidInput(format!(
                    "{} problem(s) found",
                    problems.len()
                ))))
            }
        }
        Cmd::Decode {
            obs,
            am,
            cd,
            lex,
            lm,
        } => run_decode(&obs, &am, cd, &lex, &lm),
    }
}

/// Runs the toolkit on the given argument vector (including the program
/// name) and returns the process exit code.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // --help and --version land here with a zero exit code.
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.cmd) {
        Ok(()) => 0,
        Err(CliError::Domain(e)) => {
            eprintln!("wfst: {e}");
            1
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("wfst: {msg}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_cli(["wfst", "no-such-command"]), 2);
        assert_eq!(run_cli(["wfst"]), 2);
        assert_eq!(run_cli(["wfst", "print", "/no/such/file.fst"]), 2);
    }

    #[test]
    fn help_exits_0() {
        assert_eq!(run_cli(["wfst", "--help"]), 0);
    }

    #[test]
    fn domain_errors_exit_1() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.fst");
        // A transducer arc makes determinize fail with a domain error.
        fs::write(&path, "#semiring tropical\n0 1 a b 1.0\n1 0.0\n").unwrap();
        let arg = path.to_str().unwrap();
        assert_eq!(run_cli(["wfst", "determinize", arg]), 1);
    }

    #[test]
    fn compile_round_trips_through_print() {
        let dir = tempfile::tempdir().unwrap();
        let src = dir.path().join("in.txt");
        let compiled = dir.path().join("out.fst");
        fs::write(&src, "#semiring tropical\n0 1 a a 1.5\n1 2 b b 0.5\n2 0.0\n").unwrap();
        assert_eq!(
            run_cli([
                "wfst",
                "compile",
                "-o",
                compiled.to_str().unwrap(),
                src.to_str().unwrap(),
            ]),
            0
        );
        let f = parse_fst(
            &fs::read_to_string(&compiled).unwrap(),
            None,
            None,
            Semiring::Tropical,
        )
        .unwrap();
        assert_eq!(f.num_states(), 3);
        assert_eq!(f.num_arcs(), 2);
        // Canonical form is a fixpoint of compile.
        let twice = dir.path().join("out2.fst");
        assert_eq!(
            run_cli([
                "wfst",
                "compile",
                "-o",
                twice.to_str().unwrap(),
                compiled.to_str().unwrap(),
            ]),
            0
        );
        assert_eq!(
            fs::read_to_string(&compiled).unwrap(),
            fs::read_to_string(&twice).unwrap()
        );
    }

    #[test]
    fn determinize_blowup_reports_possibly_non_determinizable() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("hard.fst");
        let text = "#semiring tropical\n\
                    0 1 a a 1.0\n0 2 a a 2.0\n\
                    1 1 a a 3.0\n2 2 a a 4.0\n\
                    1 1 b b 0.0\n2 2 c c 0.0\n\
                    1 0.0\n2 0.0\n";
        fs::write(&path, text).unwrap();
        assert_eq!(
            run_cli([
                "wfst",
                "determinize",
                "--max-states",
                "10",
                path.to_str().unwrap(),
            ]),
            1
        );
    }
}
