//! Do two models generate the same process?
//!
//! Three independent procedures:
//!
//! * [`equivalent_thm1`] compares marginals `P(w_f)`, `P(w_h)` and the
//!   conditionals `P(w_f | w_h)`, `P(x w_f | w_h)` over the unions of both
//!   models' minimal wordlists.
//! * [`equivalent_by_length`] compares every word up to length
//!   `2 d_max^2 - 1`, which is complete for quantum memories of dimension
//!   `d_max` (for a GHMM on `D` states, `d = ceil(sqrt(D))`). Exponential.
//! * [`equivalent_canonical`] compares the standard GHMMs entrywise.
//!
//! Any QHMM operand is first Bloch-vectorized.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::alphabet::{Alphabet, Word};
use crate::canonical::{standard_ghmm, words_up_to, StandardGhmm};
use crate::error::{Error, Result};
use crate::ghmm::Ghmm;
use crate::linalg::max_abs_diff;
use crate::model::Model;
use crate::wordlist::minimal_wordlists_for;
use crate::Tolerances;

/// Default limit on the number of words enumerated by the length test.
pub const DEFAULT_WORD_CAP: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Equal,
    NotEqual,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Method {
    #[serde(rename = "thm1")]
    Thm1,
    #[serde(rename = "length_bound")]
    LengthBound,
    #[serde(rename = "canonical")]
    Canonical,
}

/// Which quantity disagreed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Discrepancy {
    /// `P(future)`; the history is empty.
    Marginal,
    /// `P(future | history)`.
    Conditional,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    #[serde(skip)]
    pub history: Word,
    #[serde(skip)]
    pub future: Word,
    #[serde(rename = "history")]
    pub history_labels: Vec<String>,
    #[serde(rename = "future")]
    pub future_labels: Vec<String>,
    pub kind: Discrepancy,
    /// Signed difference, first model minus second.
    pub delta: f64,
}

impl Witness {
    fn new(alphabet: &Alphabet, history: Word, future: Word, kind: Discrepancy, delta: f64) -> Self {
        Self {
            history_labels: alphabet.labels_of(&history),
            future_labels: alphabet.labels_of(&future),
            history,
            future,
            kind,
            delta,
        }
    }

    /// The word whose (joint) probability differs, `history ++ future`.
    pub fn word(&self) -> Word {
        self.history.concat(&self.future)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub verdict: Verdict,
    pub method: Method,
    pub witness: Option<Witness>,
    /// Largest discrepancy seen over everything compared.
    pub max_discrepancy: f64,
    /// Longest word compared.
    pub horizon_used: usize,
    pub tolerance: f64,
}

impl EquivalenceReport {
    pub fn is_equal(&self) -> bool {
        self.verdict == Verdict::Equal
    }
}

fn same_alphabet(a: &Model, b: &Model) -> Result<()> {
    if a.alphabet() != b.alphabet() {
        return Err(Error::input(format!(
            "alphabets differ: {:?} vs {:?}",
            a.alphabet().labels(),
            b.alphabet().labels()
        )));
    }
    Ok(())
}

fn union(a: &[Word], b: &[Word]) -> Vec<Word> {
    let mut out = a.to_vec();
    for w in b {
        if !out.contains(w) {
            out.push(w.clone());
        }
    }
    out
}

/// Tracks the first check that failed and the largest discrepancy overall.
struct Tally<'a> {
    alphabet: &'a Alphabet,
    tol: f64,
    witness: Option<Witness>,
    max: f64,
    horizon: usize,
}

impl Tally<'_> {
    fn record(&mut self, history: &Word, future: &Word, kind: Discrepancy, delta: f64) {
        self.max = self.max.max(delta.abs());
        self.horizon = self.horizon.max(history.len() + future.len());
        if delta.abs() > self.tol && self.witness.is_none() {
            self.witness = Some(Witness::new(self.alphabet, history.clone(), future.clone(), kind, delta));
        }
    }

    fn finish(self, method: Method) -> EquivalenceReport {
        EquivalenceReport {
            verdict: if self.witness.is_some() { Verdict::NotEqual } else { Verdict::Equal },
            method,
            witness: self.witness,
            max_discrepancy: self.max,
            horizon_used: self.horizon,
            tolerance: self.tol,
        }
    }
}

pub fn equivalent_thm1(a: &Model, b: &Model, tol: &Tolerances) -> Result<EquivalenceReport> {
    same_alphabet(a, b)?;
    let (ga, gb) = (a.to_ghmm()?, b.to_ghmm()?);
    let (la, lb) = (minimal_wordlists_for(&ga, tol)?, minimal_wordlists_for(&gb, tol)?);
    let histories = union(&la.history, &lb.history);
    let futures = union(&la.future, &lb.future);
    let mut tally = Tally { alphabet: ga.alphabet(), tol: tol.equivalence, witness: None, max: 0.0, horizon: 0 };
    let empty = Word::empty();

    for f in &futures {
        let d = ga.word_probability_with(f, tol)? - gb.word_probability_with(f, tol)?;
        tally.record(&empty, f, Discrepancy::Marginal, d);
    }
    let mut live = Vec::new();
    for h in &histories {
        let (pa, pb) = (ga.word_probability_with(h, tol)?, gb.word_probability_with(h, tol)?);
        tally.record(&empty, h, Discrepancy::Marginal, pa - pb);
        if pa > tol.prob_floor && pb > tol.prob_floor {
            live.push(h);
        }
    }
    let cond = |g: &Ghmm, f: &Word, h: &Word| g.conditional_probability_with(f, h, tol);
    for h in &live {
        for f in &futures {
            tally.record(h, f, Discrepancy::Conditional, cond(&ga, f, h)? - cond(&gb, f, h)?);
        }
    }
    for h in &live {
        for x in 0..ga.alphabet().len() {
            for f in &futures {
                let xf = f.prepend(x);
                tally.record(h, &xf, Discrepancy::Conditional, cond(&ga, &xf, h)? - cond(&gb, &xf, h)?);
            }
        }
    }
    Ok(tally.finish(Method::Thm1))
}

/// Compare all words of length at most `max_len`; the witness is the
/// shortest, then lexicographically first, word whose probabilities differ.
fn compare_words(a: &Ghmm, b: &Ghmm, max_len: usize, tol: &Tolerances, method: Method) -> EquivalenceReport {
    let mut expected = Vec::new();
    a.walk_words(max_len, |_, s| expected.push(s.dot(&a.ones().transpose())));
    let mut tally = Tally { alphabet: a.alphabet(), tol: tol.equivalence, witness: None, max: 0.0, horizon: max_len };
    let mut idx = 0;
    b.walk_words(max_len, |w, s| {
        let delta = expected[idx] - s.dot(&b.ones().transpose());
        idx += 1;
        tally.max = tally.max.max(delta.abs());
        let shorter = tally.witness.as_ref().is_none_or(|wit| w.len() < wit.future.len());
        if delta.abs() > tally.tol && shorter {
            tally.witness = Some(Witness::new(a.alphabet(), Word::empty(), w.clone(), Discrepancy::Marginal, delta));
        }
    });
    tally.finish(method)
}

pub fn length_horizon(a: &Model, b: &Model) -> usize {
    let d = a.quantum_dim().max(b.quantum_dim());
    2 * d * d - 1
}

pub fn equivalent_by_length(a: &Model, b: &Model, tol: &Tolerances, word_cap: u128) -> Result<EquivalenceReport> {
    same_alphabet(a, b)?;
    let horizon = length_horizon(a, b);
    let needed = words_up_to(a.alphabet().len(), horizon);
    if needed > word_cap {
        return Err(Error::ResourceCap {
            needed,
            cap: word_cap,
            hint: "use the thm1 or canonical method instead".into(),
        });
    }
    Ok(compare_words(&a.to_ghmm()?, &b.to_ghmm()?, horizon, tol, Method::LengthBound))
}

/// Re-express `g` over a larger alphabet; missing symbols get zero
/// transition matrices.
fn embed(g: &Ghmm, alphabet: &Alphabet) -> Result<Ghmm> {
    let d = g.dim();
    let transitions = alphabet
        .labels()
        .iter()
        .map(|l| match g.alphabet().index_of(l) {
            Ok(x) => g.transition(x).clone(),
            Err(_) => DMatrix::zeros(d, d),
        })
        .collect();
    Ghmm::new(alphabet.clone(), g.eta0().clone(), transitions, g.ones().clone())
}

fn form_difference(a: &StandardGhmm, b: &StandardGhmm) -> Option<f64> {
    if a.lists != b.lists {
        return None;
    }
    let mut diff = (a.model.eta0() - b.model.eta0()).amax();
    for (ta, tb) in a.model.transitions().iter().zip(b.model.transitions()) {
        diff = diff.max(max_abs_diff(ta, tb));
    }
    Some(diff)
}

/// Compare standard GHMMs. Models over different alphabets are compared
/// over the union, where a missing symbol has probability zero.
///
/// When the forms differ, a witness word is searched for up to length
/// `2 max(l_min) - 1`, which suffices for two GHMMs of those dimensions.
pub fn equivalent_canonical(a: &Model, b: &Model, tol: &Tolerances, word_cap: u128) -> Result<EquivalenceReport> {
    let (mut ga, mut gb) = (a.to_ghmm()?, b.to_ghmm()?);
    if ga.alphabet() != gb.alphabet() {
        let mut labels: Vec<String> = ga.alphabet().labels().to_vec();
        labels.extend(gb.alphabet().labels().iter().cloned());
        labels.sort();
        labels.dedup();
        let joint = Alphabet::new(labels)?;
        ga = embed(&ga, &joint)?;
        gb = embed(&gb, &joint)?;
    }
    let (sa, sb) = (standard_ghmm(&ga, tol)?, standard_ghmm(&gb, tol)?);
    if let Some(diff) = form_difference(&sa, &sb) {
        if diff <= tol.equivalence {
            return Ok(EquivalenceReport {
                verdict: Verdict::Equal,
                method: Method::Canonical,
                witness: None,
                max_discrepancy: diff,
                horizon_used: 0,
                tolerance: tol.equivalence,
            });
        }
    }
    let n = ga.alphabet().len();
    let mut horizon = 2 * sa.lists.ell_min.max(sb.lists.ell_min) - 1;
    while horizon > 1 && words_up_to(n, horizon) > word_cap {
        horizon -= 1;
    }
    let report = compare_words(&sa.model, &sb.model, horizon, tol, Method::Canonical);
    if report.witness.is_none() {
        return Err(Error::NumericalIntegrity(format!(
            "standard forms differ but all words up to length {horizon} agree within {:.1e}",
            tol.equivalence
        )));
    }
    Ok(report)
}

pub fn equivalent(a: &Model, b: &Model, method: Method, tol: &Tolerances, word_cap: u128) -> Result<EquivalenceReport> {
    match method {
        Method::Thm1 => equivalent_thm1(a, b, tol),
        Method::LengthBound => equivalent_by_length(a, b, tol, word_cap),
        Method::Canonical => equivalent_canonical(a, b, tol, word_cap),
    }
}
