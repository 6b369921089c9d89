//! Sufficient and minimal wordlists.
//!
//! History words are explored breadth-first from the empty word, appending
//! symbols; future words likewise, but prepending symbols, since the
//! functional of `x w` is `T(x)` applied to the functional of `w`. A word is
//! kept when its induced vector leaves the span of those already kept, and
//! only kept words are extended. With symbols visited in alphabet order the
//! resulting lists are unique.
//!
//! Pruning works on the cross matrix `[P(w_l w'_m)]` of history rows against
//! future columns and keeps the earliest rows (then columns) that raise its
//! rank. The result depends only on the process, not on the model that
//! generated it: inert directions of either space are invisible in the
//! cross matrix.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::Serialize;

use crate::alphabet::{Alphabet, Word};
use crate::error::{Error, Result};
use crate::ghmm::Ghmm;
use crate::linalg::numerical_rank;
use crate::{Scalar, Tolerances};

/// Row `l` is the unnormalized state `eta0 T(w_l)`.
#[derive(Clone, Debug)]
pub struct InducedStateMatrix<T: Scalar = f64> {
    pub words: Vec<Word>,
    pub rows: DMatrix<T>,
    /// Words never retained because `|P(w)|` fell below the probability
    /// floor, although their state vector may have been independent.
    pub skipped_zero_probability: Vec<Word>,
}

/// Column `l` is the functional `T(w_l) ones`.
#[derive(Clone, Debug)]
pub struct InducedFunctionalMatrix<T: Scalar = f64> {
    pub words: Vec<Word>,
    pub cols: DMatrix<T>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MinimalWordlists {
    pub history: Vec<Word>,
    pub future: Vec<Word>,
    pub ell_min: usize,
}

impl MinimalWordlists {
    pub fn history_labels(&self, alphabet: &Alphabet) -> Vec<Vec<String>> {
        self.history.iter().map(|w| alphabet.labels_of(w)).collect()
    }

    pub fn future_labels(&self, alphabet: &Alphabet) -> Vec<Vec<String>> {
        self.future.iter().map(|w| alphabet.labels_of(w)).collect()
    }
}

fn extends_span<T: Scalar>(kept: &[RowDVector<T>], candidate: &RowDVector<T>, rel_tol: f64) -> bool {
    let mut rows: Vec<RowDVector<T>> = kept.to_vec();
    rows.push(candidate.clone());
    numerical_rank(&DMatrix::from_rows(&rows), rel_tol) > kept.len()
}

pub fn sufficient_history_wordlist<T: Scalar>(model: &Ghmm<T>, tol: &Tolerances) -> InducedStateMatrix<T> {
    let ones = model.ones().transpose();
    let mut queue: VecDeque<(Word, RowDVector<T>)> = VecDeque::from([(Word::empty(), model.eta0().clone())]);
    let mut words = Vec::new();
    let mut kept: Vec<RowDVector<T>> = Vec::new();
    let mut skipped = Vec::new();
    while let Some((word, state)) = queue.pop_front() {
        let p = state.dot(&ones).modulus();
        if p <= tol.prob_floor {
            if state.camax() > tol.prob_floor {
                skipped.push(word);
            }
            continue;
        }
        if !extends_span(&kept, &state, tol.rank_rel) {
            continue;
        }
        for x in 0..model.alphabet().len() {
            queue.push_back((word.append(x), &state * model.transition(x)));
        }
        words.push(word);
        kept.push(state);
    }
    InducedStateMatrix { words, rows: DMatrix::from_rows(&kept), skipped_zero_probability: skipped }
}

pub fn sufficient_future_wordlist<T: Scalar>(model: &Ghmm<T>, tol: &Tolerances) -> InducedFunctionalMatrix<T> {
    let mut queue: VecDeque<(Word, DVector<T>)> = VecDeque::from([(Word::empty(), model.ones().clone())]);
    let mut words = Vec::new();
    let mut kept: Vec<RowDVector<T>> = Vec::new();
    while let Some((word, functional)) = queue.pop_front() {
        let as_row = functional.transpose();
        if !extends_span(&kept, &as_row, tol.rank_rel) {
            continue;
        }
        for x in 0..model.alphabet().len() {
            queue.push_back((word.prepend(x), model.transition(x) * &functional));
        }
        words.push(word);
        kept.push(as_row);
    }
    let cols: Vec<DVector<T>> = kept.iter().map(|r| r.transpose()).collect();
    InducedFunctionalMatrix { words, cols: DMatrix::from_columns(&cols) }
}

/// Earliest rows of `m` that together reach its rank, in order.
fn earliest_spanning_rows<T: Scalar>(m: &DMatrix<T>, rel_tol: f64) -> Vec<usize> {
    let mut kept_idx = Vec::new();
    let mut kept: Vec<RowDVector<T>> = Vec::new();
    for (i, row) in m.row_iter().enumerate() {
        let row = row.into_owned();
        if extends_span(&kept, &row, rel_tol) {
            kept.push(row);
            kept_idx.push(i);
        }
    }
    kept_idx
}

/// Prune sufficient lists to minimal ones: history rows first, then future
/// columns against the surviving rows.
pub fn minimal_wordlists<T: Scalar>(
    history: &InducedStateMatrix<T>,
    future: &InducedFunctionalMatrix<T>,
    tol: &Tolerances,
) -> Result<MinimalWordlists> {
    if history.words.is_empty() || future.words.is_empty() {
        return Err(Error::NumericalIntegrity("empty sufficient wordlist".into()));
    }
    let cross = &history.rows * &future.cols;
    let rank = numerical_rank(&cross, tol.rank_rel);
    if rank == 0 {
        return Err(Error::NumericalIntegrity("cross matrix of wordlists has rank zero".into()));
    }
    let rows = earliest_spanning_rows(&cross, tol.rank_rel);
    let pruned = cross.select_rows(&rows);
    let cols = earliest_spanning_rows(&pruned.transpose(), tol.rank_rel);
    if rows.len() != rank || cols.len() != rank {
        return Err(Error::AlgorithmBug(format!(
            "pruning kept {} history and {} future words for a cross matrix of rank {rank}",
            rows.len(),
            cols.len()
        )));
    }
    Ok(MinimalWordlists {
        history: rows.iter().map(|&i| history.words[i].clone()).collect(),
        future: cols.iter().map(|&i| future.words[i].clone()).collect(),
        ell_min: rank,
    })
}

/// Sufficient lists followed by pruning.
pub fn minimal_wordlists_for<T: Scalar>(model: &Ghmm<T>, tol: &Tolerances) -> Result<MinimalWordlists> {
    let h = sufficient_history_wordlist(model, tol);
    let f = sufficient_future_wordlist(model, tol);
    minimal_wordlists(&h, &f, tol)
}

/// Whether the states induced by `words` span the history space modulo its
/// inert part, i.e. whether the list is a sufficient history wordlist.
pub fn is_sufficient_history<T: Scalar>(model: &Ghmm<T>, words: &[Word], tol: &Tolerances) -> Result<bool> {
    let f = sufficient_future_wordlist(model, tol);
    let h = sufficient_history_wordlist(model, tol);
    let ell = numerical_rank(&(&h.rows * &f.cols), tol.rank_rel);
    let rows = words.iter().map(|w| model.state_after(w)).collect::<Result<Vec<_>>>()?;
    if rows.is_empty() {
        return Ok(false);
    }
    Ok(numerical_rank(&(DMatrix::from_rows(&rows) * &f.cols), tol.rank_rel) == ell)
}

/// Which size bound applies to a wordlist.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundKind {
    /// Quantum memory of dimension `d`: at most `d^2` words of length at
    /// most `d^2 - 1`.
    Quantum { d: usize },
    /// Classical or generalized model with `dim` latent states: at most `dim`
    /// words of length at most `dim - 1`.
    Classical { dim: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundsReport {
    pub max_words: usize,
    pub max_word_len: usize,
    pub history_words: usize,
    pub future_words: usize,
    pub longest_history_word: usize,
    pub longest_future_word: usize,
}

/// Size and word-length bounds on minimal wordlists. These hold as theorems,
/// so a violation is reported as an internal error.
pub fn check_wordlist_bounds(lists: &MinimalWordlists, kind: BoundKind) -> Result<BoundsReport> {
    let max_words = match kind {
        BoundKind::Quantum { d } => d * d,
        BoundKind::Classical { dim } => dim,
    };
    let report = BoundsReport {
        max_words,
        max_word_len: max_words.saturating_sub(1),
        history_words: lists.history.len(),
        future_words: lists.future.len(),
        longest_history_word: lists.history.iter().map(|w| w.len()).max().unwrap_or(0),
        longest_future_word: lists.future.iter().map(|w| w.len()).max().unwrap_or(0),
    };
    if report.history_words > max_words || report.future_words > max_words {
        return Err(Error::AlgorithmBug(format!(
            "minimal wordlists of sizes {} and {} exceed the bound {max_words}",
            report.history_words, report.future_words
        )));
    }
    if report.longest_history_word > report.max_word_len || report.longest_future_word > report.max_word_len {
        return Err(Error::AlgorithmBug(format!(
            "minimal wordlist contains a word longer than {}",
            report.max_word_len
        )));
    }
    Ok(report)
}
