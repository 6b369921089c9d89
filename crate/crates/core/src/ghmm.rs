//! Generalized hidden Markov models.
//!
//! A [`Ghmm`] is the triple `(alphabet, eta0, {T(x)})` together with an
//! explicit right eigenvector `ones` of the net transition matrix. Word
//! probabilities are `eta0 T(x0) ... T(xL-1) ones`. States are row vectors
//! acting on the left; functionals are column vectors acting on the right.
//!
//! The all-ones gauge is not imposed: Bloch-vectorized quantum models carry
//! `ones = e1` natively, and Liouville presentations are complex.

use nalgebra::{DMatrix, DVector, RowDVector};
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::alphabet::{Alphabet, Word};
use crate::error::{Error, Result};
use crate::linalg;
use crate::{Scalar, Tolerances};

#[derive(Clone, Debug, PartialEq)]
pub struct Ghmm<T: Scalar = f64> {
    alphabet: Alphabet,
    eta0: RowDVector<T>,
    transitions: Vec<DMatrix<T>>,
    ones: DVector<T>,
}

/// Stationary row vector `pi` with `pi T = pi` and `pi ones = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SteadyState {
    pub pi: RowDVector<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct HmmFlags {
    /// Nonnegative transitions, stochastic net matrix, all-ones `ones`.
    pub is_hmm: bool,
    /// HMM whose current state and emitted symbol fix the next state.
    pub is_unifilar: bool,
    /// HMM whose next state and emitted symbol fix the previous state.
    pub is_counifilar: bool,
}

/// Outcome of [`Ghmm::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    /// `max |T ones - ones|`.
    pub net_deviation: f64,
    /// `|eta0 ones - 1|`.
    pub eta_deviation: f64,
    pub max_len: usize,
    pub words_checked: u64,
    /// Shortest (then lexicographically first) word with `P(w) < -tol`.
    pub first_violation: Option<(Word, f64)>,
    pub flags: HmmFlags,
    pub passed: bool,
}

pub(crate) fn realize<T: Scalar>(value: T, what: &str, tol: &Tolerances) -> Result<f64> {
    let im = value.imaginary();
    if im.abs() > tol.residue {
        return Err(Error::NumericalIntegrity(format!(
            "{what} has imaginary residue {im:.3e} above {:.1e}",
            tol.residue
        )));
    }
    Ok(value.real())
}

impl<T: Scalar> Ghmm<T> {
    /// Build a model, checking dimensions, `T ones = ones` and `eta0 ones = 1`
    /// with the default tolerances.
    pub fn new(
        alphabet: Alphabet,
        eta0: RowDVector<T>,
        transitions: Vec<DMatrix<T>>,
        ones: DVector<T>,
    ) -> Result<Self> {
        Self::with_tolerance(alphabet, eta0, transitions, ones, &Tolerances::default())
    }

    pub fn with_tolerance(
        alphabet: Alphabet,
        eta0: RowDVector<T>,
        transitions: Vec<DMatrix<T>>,
        ones: DVector<T>,
        tol: &Tolerances,
    ) -> Result<Self> {
        let dim = eta0.len();
        if dim == 0 {
            return Err(Error::invalid("latent dimension must be positive"));
        }
        if transitions.len() != alphabet.len() {
            return Err(Error::invalid(format!(
                "{} transition matrices for an alphabet of {} symbols",
                transitions.len(),
                alphabet.len()
            )));
        }
        if ones.len() != dim {
            return Err(Error::invalid("ones vector length differs from eta0 length"));
        }
        for (x, t) in transitions.iter().enumerate() {
            if t.shape() != (dim, dim) {
                return Err(Error::invalid(format!(
                    "transition matrix for {:?} has shape {:?}, expected ({dim}, {dim})",
                    alphabet.label(x),
                    t.shape()
                )));
            }
        }
        let model = Self { alphabet, eta0, transitions, ones };
        let net_dev = model.net_deviation();
        if net_dev > tol.structural {
            return Err(Error::invalid(format!(
                "net transition matrix does not fix the ones vector (deviation {net_dev:.3e})"
            )));
        }
        let eta_dev = model.eta_deviation();
        if eta_dev > tol.structural {
            return Err(Error::invalid(format!(
                "initial vector is not normalized (|eta0 ones - 1| = {eta_dev:.3e})"
            )));
        }
        Ok(model)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn dim(&self) -> usize {
        self.eta0.len()
    }

    pub fn eta0(&self) -> &RowDVector<T> {
        &self.eta0
    }

    pub fn ones(&self) -> &DVector<T> {
        &self.ones
    }

    pub fn transitions(&self) -> &[DMatrix<T>] {
        &self.transitions
    }

    pub fn transition(&self, symbol: usize) -> &DMatrix<T> {
        &self.transitions[symbol]
    }

    pub fn net_transition(&self) -> DMatrix<T> {
        let d = self.dim();
        self.transitions.iter().fold(DMatrix::zeros(d, d), |acc, t| acc + t)
    }

    fn net_deviation(&self) -> f64 {
        let diff = self.net_transition() * &self.ones - &self.ones;
        diff.iter().map(|v| v.modulus()).fold(0.0, f64::max)
    }

    fn eta_deviation(&self) -> f64 {
        (self.eta0.dot(&self.ones.transpose()) - T::one()).modulus()
    }

    /// Same dynamics, different initial vector.
    pub fn with_eta0(&self, eta0: RowDVector<T>) -> Result<Self> {
        Self::new(self.alphabet.clone(), eta0, self.transitions.clone(), self.ones.clone())
    }

    /// Unnormalized state `eta0 T(w)` induced by a history word.
    pub fn state_after(&self, word: &Word) -> Result<RowDVector<T>> {
        self.alphabet.check_word(word)?;
        Ok(word.iter().fold(self.eta0.clone(), |v, &x| v * &self.transitions[x]))
    }

    /// Functional `T(w) ones` induced by a future word.
    pub fn functional_of(&self, word: &Word) -> Result<DVector<T>> {
        self.alphabet.check_word(word)?;
        Ok(word.iter().rev().fold(self.ones.clone(), |f, &x| &self.transitions[x] * f))
    }

    /// `eta0 T(w) ones` without any real-part extraction.
    pub fn raw_probability(&self, word: &Word) -> Result<T> {
        Ok(self.state_after(word)?.dot(&self.ones.transpose()))
    }

    pub fn word_probability(&self, word: &Word) -> Result<f64> {
        self.word_probability_with(word, &Tolerances::default())
    }

    pub fn word_probability_with(&self, word: &Word, tol: &Tolerances) -> Result<f64> {
        let p = realize(self.raw_probability(word)?, "word probability", tol)?;
        Ok(tol.clamp_probability(p))
    }

    /// `P(future | history) = P(history future) / P(history)`.
    pub fn conditional_probability(&self, future: &Word, history: &Word) -> Result<f64> {
        self.conditional_probability_with(future, history, &Tolerances::default())
    }

    pub fn conditional_probability_with(
        &self,
        future: &Word,
        history: &Word,
        tol: &Tolerances,
    ) -> Result<f64> {
        let state = self.state_after(history)?;
        let ph = realize(state.dot(&self.ones.transpose()), "history probability", tol)?;
        if ph <= tol.degenerate {
            return Err(Error::degenerate(
                format!("history {:?} has zero probability", self.alphabet.format_word(history, "")),
                ph,
            ));
        }
        self.alphabet.check_word(future)?;
        let f = self.functional_of(future)?;
        let joint = realize(state.dot(&f.transpose()), "joint probability", tol)?;
        Ok(tol.clamp_probability(joint / ph))
    }

    /// `sum_{|w| = len} P(w)`, by explicit enumeration.
    pub fn normalization_check(&self, len: usize) -> Result<f64> {
        let tol = Tolerances::default();
        let mut total = T::zero();
        self.walk_words(len, |w, state| {
            if w.len() == len {
                total += state.dot(&self.ones.transpose());
            }
        });
        realize(total, "normalization sum", &tol)
    }

    /// Depth-first walk over every word of length at most `max_len`, in
    /// lexicographic order, handing each word its induced state.
    pub(crate) fn walk_words<F>(&self, max_len: usize, mut visit: F)
    where
        F: FnMut(&Word, &RowDVector<T>),
    {
        let mut word = Word::empty();
        let mut stack: Vec<RowDVector<T>> = vec![self.eta0.clone()];
        visit(&word, &self.eta0);
        self.walk_rec(max_len, &mut word, &mut stack, &mut visit);
    }

    fn walk_rec<F>(&self, max_len: usize, word: &mut Word, stack: &mut Vec<RowDVector<T>>, visit: &mut F)
    where
        F: FnMut(&Word, &RowDVector<T>),
    {
        if word.len() == max_len {
            return;
        }
        for x in 0..self.alphabet.len() {
            let next = stack.last().expect("nonempty") * &self.transitions[x];
            word.0.push(x);
            visit(word, &next);
            stack.push(next);
            self.walk_rec(max_len, word, stack, visit);
            stack.pop();
            word.0.pop();
        }
    }

    /// Change of latent basis: `eta0 -> eta0 S^-1`, `T(x) -> S T(x) S^-1`,
    /// `ones -> S ones`. Word probabilities are unchanged.
    pub fn apply_similarity(&self, s: &DMatrix<T>, cond_cap: f64) -> Result<Self> {
        if s.shape() != (self.dim(), self.dim()) {
            return Err(Error::input(format!(
                "similarity has shape {:?}, model dimension is {}",
                s.shape(),
                self.dim()
            )));
        }
        let (s_inv, _) = linalg::checked_inverse(s, "similarity transform", cond_cap)?;
        Ok(Self {
            alphabet: self.alphabet.clone(),
            eta0: &self.eta0 * &s_inv,
            transitions: self.transitions.iter().map(|t| s * t * &s_inv).collect(),
            ones: s * &self.ones,
        })
    }
}

impl Ghmm<f64> {
    /// Hidden Markov model with the all-ones functional.
    pub fn hmm(alphabet: Alphabet, eta0: RowDVector<f64>, transitions: Vec<DMatrix<f64>>) -> Result<Self> {
        let d = eta0.len();
        Self::new(alphabet, eta0, transitions, DVector::from_element(d, 1.0))
    }

    pub fn hmm_flags(&self, tol: &Tolerances) -> HmmFlags {
        let eps = tol.structural;
        let d = self.dim();
        let nonneg = self.transitions.iter().all(|t| t.iter().all(|&v| v >= -eps));
        let all_ones = self.ones.iter().all(|&v| (v - 1.0).abs() <= eps);
        let row_sums = self.net_transition() * DVector::from_element(d, 1.0);
        let stochastic = row_sums.iter().all(|&v| (v - 1.0).abs() <= eps);
        let is_hmm = nonneg && all_ones && stochastic;
        let max_per = |t: &DMatrix<f64>, rows: bool| {
            let lines = if rows { t.nrows() } else { t.ncols() };
            (0..lines)
                .map(|i| {
                    let line = if rows { t.row(i).transpose() } else { t.column(i).into_owned() };
                    line.iter().filter(|&&v| v > eps).count()
                })
                .max()
                .unwrap_or(0)
        };
        let is_unifilar = is_hmm && self.transitions.iter().all(|t| max_per(t, true) <= 1);
        let is_counifilar = is_hmm && self.transitions.iter().all(|t| max_per(t, false) <= 1);
        HmmFlags { is_hmm, is_unifilar, is_counifilar }
    }

    /// Left unit eigenvector of the net transition matrix, normalized so that
    /// `pi ones = 1`. A unit eigenvalue of geometric multiplicity above one is
    /// reported, not resolved.
    pub fn steady_state(&self, tol: &Tolerances) -> Result<SteadyState> {
        let d = self.dim();
        let t = self.net_transition();
        let m = (&t - DMatrix::identity(d, d)).transpose();
        let svd = m.svd(false, true);
        let v_t = svd.v_t.expect("requested");
        let scale = svd.singular_values.max().max(1.0);
        let null: Vec<RowDVector<f64>> = svd
            .singular_values
            .iter()
            .enumerate()
            .filter(|(_, &s)| s <= tol.structural * scale)
            .map(|(i, _)| v_t.row(i).into_owned())
            .collect();
        match null.len() {
            0 => Err(Error::NumericalIntegrity(
                "net transition matrix has no unit eigenvalue".into(),
            )),
            1 => {
                let v = &null[0];
                let norm = v.dot(&self.ones.transpose());
                if norm.abs() <= tol.structural {
                    return Err(Error::NumericalIntegrity(
                        "stationary vector is annihilated by the ones functional".into(),
                    ));
                }
                Ok(SteadyState { pi: v / norm })
            }
            k => Err(Error::DegenerateEigenspace {
                multiplicity: k,
                basis: null.iter().map(|r| r.iter().copied().collect()).collect(),
            }),
        }
    }

    /// The same dynamics started from the steady state.
    pub fn stationary(&self) -> Result<Self> {
        let pi = self.steady_state(&Tolerances::default())?.pi;
        self.with_eta0(pi)
    }

    /// Structural checks plus `P(w) >= -tol` for every `|w| <= max_len`.
    ///
    /// Validity over all finite words cannot be settled by enumeration; a
    /// pass certifies only the words that were checked.
    pub fn validate(&self, max_len: usize, tol: &Tolerances) -> ValidationReport {
        let net_deviation = self.net_deviation();
        let eta_deviation = self.eta_deviation();
        let mut words_checked = 0u64;
        let mut first_violation: Option<(Word, f64)> = None;
        self.walk_words(max_len, |w, state| {
            words_checked += 1;
            let p = state.dot(&self.ones.transpose());
            if p < -tol.structural {
                let shorter = first_violation.as_ref().is_none_or(|(v, _)| w.len() < v.len());
                if shorter {
                    first_violation = Some((w.clone(), p));
                }
            }
        });
        let flags = self.hmm_flags(tol);
        let passed = net_deviation <= tol.structural
            && eta_deviation <= tol.structural
            && first_violation.is_none();
        ValidationReport {
            net_deviation,
            eta_deviation,
            max_len,
            words_checked,
            first_violation,
            flags,
            passed,
        }
    }

    /// Draw a word of the given length by simulating the latent chain from
    /// `eta0`. Only defined for HMMs; the draw is a deterministic function
    /// of `seed`.
    pub fn sample(&self, length: usize, seed: u64) -> Result<Word> {
        let tol = Tolerances::default();
        if !self.hmm_flags(&tol).is_hmm {
            return Err(Error::UnsupportedModel(
                "sampling the latent chain requires a hidden Markov model".into(),
            ));
        }
        if self.eta0.iter().any(|&v| v < -tol.structural) {
            return Err(Error::UnsupportedModel(
                "initial vector is not a probability distribution".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let d = self.dim();
        let n = self.alphabet.len();
        let start = WeightedIndex::new(self.eta0.iter().map(|&v| v.max(0.0)))
            .map_err(|e| Error::invalid(format!("initial distribution: {e}")))?;
        // Row s lists (symbol, next state) pairs as index x * d + s'.
        let steps = (0..d)
            .map(|s| {
                let weights = (0..n).flat_map(|x| (0..d).map(move |t| (x, t)));
                let weights: Vec<f64> = weights.map(|(x, t)| self.transitions[x][(s, t)].max(0.0)).collect();
                WeightedIndex::new(weights).ok()
            })
            .collect::<Vec<_>>();
        let mut state = start.sample(&mut rng);
        let mut word = Vec::with_capacity(length);
        for _ in 0..length {
            let dist = steps[state].as_ref().ok_or_else(|| {
                Error::NumericalIntegrity(format!("latent state {state} has no outgoing transitions"))
            })?;
            let k = dist.sample(&mut rng);
            word.push(k / d);
            state = k % d;
        }
        Ok(Word(word))
    }
}
