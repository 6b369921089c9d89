//! `ghmm-canon`: command-line access to every stage of the pipeline.

mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use ghmm_canon::canonical::{dimension_bound, standard_ghmm};
use ghmm_canon::equivalence::{equivalent, Method};
use ghmm_canon::io::{self, Vectorization};
use ghmm_canon::vectorize::{from_bloch, qhmm_to_ghmm_bloch, qhmm_to_ghmm_liouville, ExtendedBlochVector, OperatorBasis};
use ghmm_canon::wordlist::{
    check_wordlist_bounds, minimal_wordlists, sufficient_future_wordlist, sufficient_history_wordlist, BoundKind,
};
use ghmm_canon::{zoo, Error, Model, Result, Word};
use serde_json::{json, Value};

use config::{Format, Settings};

#[derive(Parser)]
#[command(name = "ghmm-canon", version, about = "Canonical forms and equivalence of (quantum, generalized) hidden Markov models")]
struct Cli {
    /// Separator between symbols in words, for multi-character labels.
    #[arg(long, global = true)]
    sep: Option<String>,
    /// JSON file with tolerances, max_len, word_cap, format and seed.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Tolerance for comparing probabilities and canonical forms.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ConvertMethod {
    Bloch,
    Liouville,
}

#[derive(Clone, Copy, ValueEnum)]
enum EquivMethod {
    Thm1,
    Length,
    Canonical,
}

#[derive(Subcommand)]
enum Command {
    /// Structural checks and nonnegativity of word probabilities.
    Validate {
        model: String,
        /// Longest word checked (default 2D - 1).
        #[arg(long)]
        max_len: Option<usize>,
    },
    /// Probability of a word.
    Prob {
        model: String,
        #[arg(allow_hyphen_values = true)]
        word: String,
    },
    /// Probability of a future word given a history word.
    Cond {
        model: String,
        #[arg(allow_hyphen_values = true)]
        history: String,
        #[arg(allow_hyphen_values = true)]
        future: String,
    },
    /// Stationary latent state.
    Steady { model: String },
    /// Draw a sample path.
    Sample {
        model: String,
        #[arg(short = 'n', long, default_value_t = 100)]
        length: usize,
        #[arg(short = 's', long)]
        seed: Option<u64>,
    },
    /// Vectorize a QHMM into a GHMM.
    Convert {
        model: String,
        #[arg(long, value_enum, default_value_t = ConvertMethod::Bloch)]
        method: ConvertMethod,
    },
    /// Minimal history and future wordlists.
    Wordlist { model: String },
    /// Standard (canonical) GHMM.
    Canonical { model: String },
    /// Lower bound on the memory dimension of a quantum generator.
    Bound { model: String },
    /// Decide whether two models generate the same process.
    Equiv {
        a: String,
        b: String,
        #[arg(long, value_enum, default_value_t = EquivMethod::Canonical)]
        method: EquivMethod,
    },
    /// Built-in example models.
    Zoo {
        #[command(subcommand)]
        action: ZooAction,
    },
}

#[derive(Subcommand)]
enum ZooAction {
    List,
    Export { name: String },
}

/// Command output: a JSON value, a human-readable rendering and an exit code.
struct Output {
    json: Value,
    table: String,
    code: u8,
}

impl Output {
    fn new(json: Value, table: String) -> Self {
        Self { json, table, code: 0 }
    }

    /// Model files are always JSON.
    fn file(file: &io::ModelFile) -> Self {
        let json = serde_json::to_value(file).expect("model files serialize");
        let table = io::to_json_string(file);
        Self::new(json, table)
    }
}

fn load(reference: &str) -> Result<Model> {
    match reference.strip_prefix("zoo:") {
        Some(name) => Ok(zoo::entry(name)?.model),
        None => io::read_model(reference),
    }
}

fn parse_word(model: &Model, text: &str, sep: Option<&str>) -> Result<Word> {
    model.alphabet().parse_word(text, sep)
}

fn word_text(model: &Model, w: &Word, sep: Option<&str>) -> String {
    model.alphabet().format_word(w, sep.unwrap_or(""))
}

fn labels(model: &Model, words: &[Word]) -> Value {
    json!(words.iter().map(|w| model.alphabet().labels_of(w)).collect::<Vec<_>>())
}

fn complex_json(m: &ghmm_canon::nalgebra::DMatrix<ghmm_canon::C64>) -> Value {
    json!(m.row_iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>()).collect::<Vec<_>>())
}

fn table(rows: &[(&str, String)]) -> String {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    rows.iter().map(|(k, v)| format!("{k:width$}  {v}")).collect::<Vec<_>>().join("\n")
}

fn validate(model: &Model, max_len: Option<usize>, s: &Settings) -> Result<Output> {
    let g = model.to_ghmm()?;
    let max_len = max_len.or(s.max_len).unwrap_or(2 * g.dim() - 1);
    let r = g.validate(max_len, &s.tol);
    let violation = r.first_violation.as_ref().map(|(w, p)| json!({"word": model.alphabet().labels_of(w), "probability": p}));
    let completeness = match model {
        Model::Qhmm(q) => Some(q.completeness_deviation()),
        _ => None,
    };
    let json = json!({
        "kind": model.kind(),
        "dim": model.dim(),
        "passed": r.passed,
        "net_deviation": r.net_deviation,
        "eta_deviation": r.eta_deviation,
        "kraus_completeness_deviation": completeness,
        "max_len": r.max_len,
        "words_checked": r.words_checked,
        "first_violation": violation,
        "flags": r.flags,
    });
    let mut rows = vec![
        ("kind", model.kind().to_string()),
        ("passed", r.passed.to_string()),
        ("net deviation", format!("{:.3e}", r.net_deviation)),
        ("eta deviation", format!("{:.3e}", r.eta_deviation)),
        ("words checked", format!("{} (length <= {})", r.words_checked, r.max_len)),
        ("hmm", r.flags.is_hmm.to_string()),
        ("unifilar", r.flags.is_unifilar.to_string()),
        ("co-unifilar", r.flags.is_counifilar.to_string()),
    ];
    if let Some((w, p)) = &r.first_violation {
        rows.push(("first violation", format!("P({}) = {p:.3e}", model.alphabet().format_word(w, ""))));
    }
    let mut out = Output::new(json, table(&rows));
    if !r.passed {
        out.code = 2;
    }
    Ok(out)
}

fn steady(model: &Model, s: &Settings) -> Result<Output> {
    match model {
        Model::Qhmm(q) => {
            let pi = qhmm_to_ghmm_bloch(q)?.steady_state(&s.tol)?.pi;
            let basis = OperatorBasis::new(q.dim())?;
            let rho = from_bloch(&ExtendedBlochVector::from_row(&pi), &basis)?;
            let text = rho
                .row_iter()
                .map(|r| r.iter().map(|z| format!("{:+.6}{:+.6}i", z.re, z.im)).collect::<Vec<_>>().join("  "))
                .collect::<Vec<_>>()
                .join("\n");
            Ok(Output::new(json!({"sigma": complex_json(&rho)}), text))
        }
        _ => {
            let pi = model.to_ghmm()?.steady_state(&s.tol)?.pi;
            let v: Vec<f64> = pi.iter().copied().collect();
            let text = v.iter().map(|p| format!("{p:.12}")).collect::<Vec<_>>().join(" ");
            Ok(Output::new(json!({"pi": v}), text))
        }
    }
}

fn wordlist(model: &Model, s: &Settings, sep: Option<&str>) -> Result<Output> {
    let diag = |h_words: &[Word], skipped: &[Word], f_words: &[Word], lists: &ghmm_canon::MinimalWordlists, kind| {
        let bounds = check_wordlist_bounds(lists, kind)?;
        Ok::<Value, Error>(json!({
            "history_words": labels(model, &lists.history),
            "future_words": labels(model, &lists.future),
            "ell_min": lists.ell_min,
            "diagnostics": {
                "sufficient_history_words": labels(model, h_words),
                "sufficient_future_words": labels(model, f_words),
                "skipped_zero_probability": labels(model, skipped),
                "bounds": bounds,
            }
        }))
    };
    let json = match model {
        Model::ComplexGhmm(g) => {
            let (h, f) = (sufficient_history_wordlist(g, &s.tol), sufficient_future_wordlist(g, &s.tol));
            let lists = minimal_wordlists(&h, &f, &s.tol)?;
            diag(&h.words, &h.skipped_zero_probability, &f.words, &lists, BoundKind::Quantum { d: model.quantum_dim() })?
        }
        _ => {
            let g = model.to_ghmm()?;
            let (h, f) = (sufficient_history_wordlist(&g, &s.tol), sufficient_future_wordlist(&g, &s.tol));
            let lists = minimal_wordlists(&h, &f, &s.tol)?;
            let kind = match model {
                Model::Qhmm(q) => BoundKind::Quantum { d: q.dim() },
                _ => BoundKind::Classical { dim: g.dim() },
            };
            diag(&h.words, &h.skipped_zero_probability, &f.words, &lists, kind)?
        }
    };
    let fmt = |v: &Value| {
        v.as_array()
            .unwrap()
            .iter()
            .map(|w| {
                let parts: Vec<&str> = w.as_array().unwrap().iter().map(|l| l.as_str().unwrap()).collect();
                if parts.is_empty() { "ε".to_string() } else { parts.join(sep.unwrap_or("")) }
            })
            .collect::<Vec<_>>()
            .join(" ")
    };
    let text = table(&[
        ("history", fmt(&json["history_words"])),
        ("future", fmt(&json["future_words"])),
        ("l_min", json["ell_min"].to_string()),
    ]);
    Ok(Output::new(json, text))
}

fn run(cli: Cli) -> Result<(Output, Format)> {
    let settings = config::resolve(cli.config.as_deref(), std::env::var(config::TOL_ENV).ok(), cli.tol, cli.format)?;
    execute(cli, &settings).map(|out| (out, settings.format))
}

fn execute(cli: Cli, s: &Settings) -> Result<Output> {
    let sep = cli.sep.as_deref();
    match cli.command {
        Command::Validate { model, max_len } => validate(&load(&model)?, max_len, s),
        Command::Prob { model, word } => {
            let m = load(&model)?;
            let w = parse_word(&m, &word, sep)?;
            let p = m.word_probability(&w)?;
            Ok(Output::new(json!({"word": m.alphabet().labels_of(&w), "probability": p}), format!("{p}")))
        }
        Command::Cond { model, history, future } => {
            let m = load(&model)?;
            let (h, f) = (parse_word(&m, &history, sep)?, parse_word(&m, &future, sep)?);
            let p = m.conditional_probability(&f, &h)?;
            Ok(Output::new(
                json!({"history": m.alphabet().labels_of(&h), "future": m.alphabet().labels_of(&f), "probability": p}),
                format!("{p}"),
            ))
        }
        Command::Steady { model } => steady(&load(&model)?, s),
        Command::Sample { model, length, seed } => {
            let m = load(&model)?;
            let seed = seed.unwrap_or(s.seed);
            let w = m.sample(length, seed)?;
            let text = word_text(&m, &w, sep);
            Ok(Output::new(json!({"seed": seed, "symbols": m.alphabet().labels_of(&w)}), text))
        }
        Command::Convert { model, method } => match load(&model)? {
            Model::Qhmm(q) => Ok(Output::file(&match method {
                ConvertMethod::Bloch => io::ghmm_file(&qhmm_to_ghmm_bloch(&q)?, Some(Vectorization::Bloch)),
                ConvertMethod::Liouville => {
                    io::complex_ghmm_file(&qhmm_to_ghmm_liouville(&q)?, Some(Vectorization::Liouville))
                }
            })),
            other => Err(Error::Input(format!("convert expects a QHMM, got a {}", other.kind()))),
        },
        Command::Wordlist { model } => wordlist(&load(&model)?, s, sep),
        Command::Canonical { model } => {
            let m = load(&model)?;
            let std = match &m {
                Model::ComplexGhmm(g) => standard_ghmm(g, &s.tol)?,
                _ => standard_ghmm(&m.to_ghmm()?, &s.tol)?,
            };
            Ok(Output::file(&io::standard_ghmm_file(&std)))
        }
        Command::Bound { model } => {
            let m = load(&model)?;
            let lists = match &m {
                Model::ComplexGhmm(g) => ghmm_canon::wordlist::minimal_wordlists_for(g, &s.tol)?,
                _ => ghmm_canon::wordlist::minimal_wordlists_for(&m.to_ghmm()?, &s.tol)?,
            };
            let b = dimension_bound(&lists);
            let text = table(&[("l_min", b.ell_min.to_string()), ("d_min >=", b.d_min_lower.to_string())]);
            Ok(Output::new(serde_json::to_value(b).expect("serializable"), text))
        }
        Command::Equiv { a, b, method } => {
            let (ma, mb) = (load(&a)?, load(&b)?);
            let method = match method {
                EquivMethod::Thm1 => Method::Thm1,
                EquivMethod::Length => Method::LengthBound,
                EquivMethod::Canonical => Method::Canonical,
            };
            let r = equivalent(&ma, &mb, method, &s.tol, s.word_cap)?;
            let verdict = serde_json::to_value(r.verdict).expect("serializable");
            let mut text = verdict.as_str().unwrap_or_default().to_string();
            if let Some(w) = &r.witness {
                text.push_str(&format!(
                    "\nwitness  {} | {}  delta {:+.3e}",
                    ma.alphabet().format_word(&w.history, sep.unwrap_or("")),
                    ma.alphabet().format_word(&w.future, sep.unwrap_or("")),
                    w.delta
                ));
            }
            let mut out = Output::new(serde_json::to_value(&r).expect("serializable"), text);
            if !r.is_equal() {
                out.code = 3;
            }
            Ok(out)
        }
        Command::Zoo { action: ZooAction::List } => {
            let entries = zoo::list()?;
            let json = json!(entries
                .iter()
                .map(|e| json!({"name": e.name, "kind": e.model.kind(), "description": e.description, "facts": e.facts}))
                .collect::<Vec<_>>());
            let text = entries.iter().map(|e| format!("{:12}  {}", e.name, e.description)).collect::<Vec<_>>().join("\n");
            Ok(Output::new(json, text))
        }
        Command::Zoo { action: ZooAction::Export { name } } => {
            let name = name.strip_prefix("zoo:").unwrap_or(&name);
            Ok(Output::file(&io::model_file(&zoo::entry(name)?.model)))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok((out, format)) => {
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.json).expect("serializable")),
                Format::Table => println!("{}", out.table),
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
