//! The standard (canonical, minimal) GHMM of a process.
//!
//! Given ordered minimal wordlists `{w_l}` (history) and `{w'_m}` (future),
//! the HF matrix holds the conditional probabilities `P(w'_m | w_l)`. The
//! standard GHMM has
//!
//! ```text
//! gamma0      = [P(w'_m)]_m          HF^-1
//! B(x)[l, .]  = [P(x w'_m | w_l)]_m  HF^-1
//! ones        = (1, ..., 1)
//! ```
//!
//! Its latent basis is the set of normalized states induced by the history
//! words, so it depends only on the process and the symbol order. Two models
//! generate the same process exactly when their standard GHMMs agree.

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ghmm::{realize, Ghmm};
use crate::linalg;
use crate::wordlist::{minimal_wordlists_for, MinimalWordlists};
use crate::{Scalar, Tolerances};

/// Upper limit on words compared when verifying a constructed standard GHMM
/// against its source.
const VERIFY_WORD_BUDGET: u128 = 200_000;

#[derive(Clone, Debug)]
pub struct HfMatrix {
    pub matrix: DMatrix<f64>,
    pub lists: MinimalWordlists,
    pub condition: f64,
}

#[derive(Clone, Debug)]
pub struct StandardGhmm {
    pub model: Ghmm<f64>,
    pub lists: MinimalWordlists,
    pub hf_condition: f64,
    /// Longest word length on which the result was checked against the
    /// source model.
    pub verified_len: usize,
}

struct Induced<T: Scalar> {
    states: Vec<RowDVector<T>>,
    probs: Vec<f64>,
    functionals: Vec<DVector<T>>,
}

fn induced<T: Scalar>(model: &Ghmm<T>, lists: &MinimalWordlists, tol: &Tolerances) -> Result<Induced<T>> {
    let ones = model.ones().transpose();
    let mut states = Vec::with_capacity(lists.history.len());
    let mut probs = Vec::with_capacity(lists.history.len());
    for w in &lists.history {
        let s = model.state_after(w)?;
        let p = realize(s.dot(&ones), "history probability", tol)?;
        if p <= tol.degenerate {
            return Err(Error::degenerate(
                format!("history word {:?} has zero probability", model.alphabet().format_word(w, "")),
                p,
            ));
        }
        states.push(s);
        probs.push(p);
    }
    let functionals = lists.future.iter().map(|w| model.functional_of(w)).collect::<Result<Vec<_>>>()?;
    Ok(Induced { states, probs, functionals })
}

/// Rows `l`: `[P(w'_m | w_l) ]_m` where each history state is first pushed
/// through `step` (identity for HF itself, `T(x)` for the transition rows).
fn conditional_block<T: Scalar>(
    ind: &Induced<T>,
    step: Option<&DMatrix<T>>,
    tol: &Tolerances,
) -> Result<DMatrix<f64>> {
    let n = ind.states.len();
    let m = ind.functionals.len();
    let mut out = DMatrix::zeros(n, m);
    for (l, state) in ind.states.iter().enumerate() {
        let s = match step {
            Some(t) => state * t,
            None => state.clone(),
        };
        for (k, f) in ind.functionals.iter().enumerate() {
            out[(l, k)] = realize(s.dot(&f.transpose()), "conditional probability", tol)? / ind.probs[l];
        }
    }
    Ok(out)
}

pub fn hf_matrix<T: Scalar>(model: &Ghmm<T>, lists: &MinimalWordlists, tol: &Tolerances) -> Result<HfMatrix> {
    let ind = induced(model, lists, tol)?;
    let matrix = conditional_block(&ind, None, tol)?;
    let condition = linalg::condition_number(&matrix);
    if condition.is_nan() || condition > tol.cond_cap {
        return Err(Error::Conditioning { what: "HF matrix".into(), cond: condition, cap: tol.cond_cap });
    }
    Ok(HfMatrix { matrix, lists: lists.clone(), condition })
}

/// Canonical minimal GHMM of the process generated by `model`, verified
/// against the source on all words up to `min(6, 2 l_min - 1)` symbols.
pub fn standard_ghmm<T: Scalar>(model: &Ghmm<T>, tol: &Tolerances) -> Result<StandardGhmm> {
    let lists = minimal_wordlists_for(model, tol)?;
    let ind = induced(model, &lists, tol)?;
    let hf = conditional_block(&ind, None, tol)?;
    let (hf_inv, hf_condition) = linalg::checked_inverse(&hf, "HF matrix", tol.cond_cap)?;

    let eta0 = model.eta0();
    let prior = ind
        .functionals
        .iter()
        .map(|f| realize(eta0.dot(&f.transpose()), "future word probability", tol))
        .collect::<Result<Vec<_>>>()?;
    let gamma0 = RowDVector::from_vec(prior) * &hf_inv;
    let transitions = model
        .transitions()
        .iter()
        .map(|t| conditional_block(&ind, Some(t), tol).map(|b| b * &hf_inv))
        .collect::<Result<Vec<_>>>()?;
    let ell = lists.ell_min;
    let std = Ghmm::new(model.alphabet().clone(), gamma0, transitions, DVector::from_element(ell, 1.0))?;

    let verified_len = verify_len(model.alphabet().len(), ell);
    let mut expected = Vec::new();
    model.walk_words(verified_len, |_, s| expected.push(s.dot(&model.ones().transpose())));
    let mut idx = 0;
    let mut worst: f64 = 0.0;
    std.walk_words(verified_len, |_, s| {
        let p = s.dot(&std.ones().transpose());
        let q = expected[idx];
        worst = worst.max((p - q.real()).abs());
        idx += 1;
    });
    if worst > tol.structural {
        return Err(Error::NumericalIntegrity(format!(
            "standard GHMM deviates from its source by {worst:.3e} on words up to length {verified_len}"
        )));
    }
    Ok(StandardGhmm { model: std, lists, hf_condition, verified_len })
}

fn verify_len(n_symbols: usize, ell: usize) -> usize {
    let mut len = 6.min(2 * ell - 1);
    while len > 1 && words_up_to(n_symbols, len) > VERIFY_WORD_BUDGET {
        len -= 1;
    }
    len
}

/// Number of words of length `0..=len`.
pub(crate) fn words_up_to(n_symbols: usize, len: usize) -> u128 {
    let n = n_symbols as u128;
    let mut total: u128 = 0;
    let mut level: u128 = 1;
    for _ in 0..=len {
        total = total.saturating_add(level);
        level = level.saturating_mul(n);
    }
    total
}

/// Lower bound `d_min >= ceil(sqrt(l_min))` on the memory dimension of any
/// quantum generator. The bound is attained by some processes but not all.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DimensionBound {
    pub ell_min: usize,
    pub d_min_lower: usize,
}

pub fn dimension_bound(lists: &MinimalWordlists) -> DimensionBound {
    let ell = lists.ell_min;
    let d = crate::model::ceil_sqrt(ell);
    DimensionBound { ell_min: ell, d_min_lower: d }
}

/// Entropy argument for unifilar, co-unifilar HMMs: such a model has the
/// least latent entropy among all generators, so no generator fits in fewer
/// than `2^H(pi)` dimensions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EntropyWitness {
    /// Shannon entropy of the stationary distribution, in bits.
    pub entropy_bits: f64,
    /// `(k, H(pi) > log2 k)` for each `k` below the model dimension.
    pub exceeds_log2: Vec<(usize, bool)>,
    /// Smallest `k` with `H(pi) <= log2 k`.
    pub dimension_floor: usize,
}

pub fn entropy_dimension_witness(model: &Ghmm<f64>, tol: &Tolerances) -> Result<EntropyWitness> {
    let flags = model.hmm_flags(tol);
    if !(flags.is_unifilar && flags.is_counifilar) {
        return Err(Error::UnsupportedModel(
            "entropy witness requires a unifilar and co-unifilar HMM".into(),
        ));
    }
    let pi = model.steady_state(tol)?.pi;
    let entropy_bits: f64 = pi.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum();
    let exceeds_log2 = (1..model.dim()).map(|k| (k, entropy_bits > (k as f64).log2() + 1e-12)).collect();
    let mut dimension_floor = 1;
    while entropy_bits > (dimension_floor as f64).log2() + 1e-12 {
        dimension_floor += 1;
    }
    Ok(EntropyWitness { entropy_bits, exceeds_log2, dimension_floor })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alphabet::Word;
    use crate::vectorize::{qhmm_to_ghmm_bloch, qhmm_to_ghmm_liouville};
    use crate::zoo::{self, LooseStart};
    use approx::assert_abs_diff_eq;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn tight_hf_row_for_history_one() {
        let m = zoo::tight_example_hmm();
        let lists = minimal_wordlists_for(&m, &tol()).unwrap();
        let hf = hf_matrix(&m, &lists, &tol()).unwrap();
        let row = lists.history.iter().position(|w| *w == Word::single(1)).unwrap();
        // Futures are ε, 0, 1, 2.
        let expect = [1.0, 1.0 / 3.0, 0.0, 1.0 / 3.0];
        for (k, e) in expect.iter().enumerate() {
            let oracle = m.conditional_probability(&lists.future[k], &Word::single(1)).unwrap();
            assert_abs_diff_eq!(oracle, *e, epsilon = 1e-12);
            assert_abs_diff_eq!(hf.matrix[(row, k)], *e, epsilon = 1e-12);
        }
    }

    #[test]
    fn loose_hf_entry() {
        let m = zoo::loose_example_hmm(0.5, LooseStart::StateA).unwrap();
        let lists = minimal_wordlists_for(&m, &tol()).unwrap();
        let hf = hf_matrix(&m, &lists, &tol()).unwrap();
        // History ε (row 0), future "0" (column 1).
        assert_abs_diff_eq!(hf.matrix[(0, 1)], 0.5, epsilon = 1e-12);
    }

    #[test]
    fn scalar_process() {
        let m = zoo::iid_bit(0.3).unwrap();
        let lists = minimal_wordlists_for(&m, &tol()).unwrap();
        assert_eq!(hf_matrix(&m, &lists, &tol()).unwrap().matrix, DMatrix::from_element(1, 1, 1.0));
        let std = standard_ghmm(&m, &tol()).unwrap();
        assert_eq!(std.model.dim(), 1);
        assert_abs_diff_eq!(std.model.eta0()[0], 1.0);
        assert_abs_diff_eq!(std.model.transition(0)[(0, 0)], 0.3, epsilon = 1e-15);
        assert_abs_diff_eq!(std.model.transition(1)[(0, 0)], 0.7, epsilon = 1e-15);
        assert_eq!(dimension_bound(&std.lists), DimensionBound { ell_min: 1, d_min_lower: 1 });
    }

    #[test]
    fn tight_hmm_and_qhmm_share_a_standard_form() {
        let h = standard_ghmm(&zoo::tight_example_hmm(), &tol()).unwrap();
        let q = standard_ghmm(&qhmm_to_ghmm_bloch(&zoo::tight_example_qhmm().unwrap()).unwrap(), &tol()).unwrap();
        assert_eq!(h.lists, q.lists);
        assert!((h.model.eta0() - q.model.eta0()).amax() < 1e-8);
        for x in 0..4 {
            assert!(linalg::max_abs_diff(h.model.transition(x), q.model.transition(x)) < 1e-8);
        }
        assert_eq!(dimension_bound(&h.lists), DimensionBound { ell_min: 4, d_min_lower: 2 });
    }

    #[test]
    fn loose_standard_form_reproduces_source() {
        let m = zoo::loose_example_hmm(0.3, LooseStart::Stationary).unwrap();
        let std = standard_ghmm(&m, &tol()).unwrap();
        assert_eq!(std.model.dim(), 4);
        for len in 0..=6 {
            for w in m.alphabet().words_of_length(len) {
                assert_abs_diff_eq!(std.model.word_probability(&w).unwrap(), m.word_probability(&w).unwrap(), epsilon = 1e-9);
            }
        }
        let net = std.model.net_transition();
        assert!((net * DVector::from_element(4, 1.0) - DVector::from_element(4, 1.0)).amax() < 1e-9);
    }

    #[test]
    fn idempotent_and_route_independent() {
        let q = zoo::random_qhmm(2, 2, 2, 5).unwrap();
        let bloch = standard_ghmm(&qhmm_to_ghmm_bloch(&q).unwrap(), &tol()).unwrap();
        let liou = standard_ghmm(&qhmm_to_ghmm_liouville(&q).unwrap(), &tol()).unwrap();
        let again = standard_ghmm(&bloch.model, &tol()).unwrap();
        for other in [&liou, &again] {
            assert_eq!(other.lists, bloch.lists);
            assert!((other.model.eta0() - bloch.model.eta0()).amax() < 1e-8);
            for x in 0..2 {
                assert!(linalg::max_abs_diff(other.model.transition(x), bloch.model.transition(x)) < 1e-8);
            }
        }
    }

    #[test]
    fn dimension_bound_rounds_up() {
        for (ell, d) in [(1, 1), (2, 2), (4, 2), (5, 3), (9, 3), (10, 4), (16, 4)] {
            let lists = MinimalWordlists { history: vec![], future: vec![], ell_min: ell };
            let b = dimension_bound(&lists);
            assert_eq!(b.d_min_lower, d);
            assert!(b.d_min_lower * b.d_min_lower >= ell && (b.d_min_lower - 1).pow(2) < ell);
        }
    }

    #[test]
    fn entropy_witness() {
        let t = tol();
        let p = 0.01;
        let m = zoo::loose_example_hmm(p, LooseStart::Stationary).unwrap();
        let w = entropy_dimension_witness(&m, &t).unwrap();
        let pi = [1.0, 0.99, 0.99, 0.99].map(|v: f64| v / 3.97);
        let oracle: f64 = pi.iter().map(|p| -p * p.log2()).sum();
        assert_abs_diff_eq!(w.entropy_bits, oracle, epsilon = 1e-12);
        assert!(w.entropy_bits > 3f64.log2());
        assert_eq!(w.dimension_floor, 4);

        let uniform = entropy_dimension_witness(&zoo::loose_example_hmm(0.0, LooseStart::Stationary).unwrap(), &t).unwrap();
        assert_abs_diff_eq!(uniform.entropy_bits, 2.0, epsilon = 1e-12);
        assert_eq!(uniform.dimension_floor, 4);

        let frozen = entropy_dimension_witness(&zoo::loose_example_hmm(1.0, LooseStart::Stationary).unwrap(), &t).unwrap();
        assert_abs_diff_eq!(frozen.entropy_bits, 0.0, epsilon = 1e-12);
        assert_eq!(frozen.dimension_floor, 1);
        assert!(frozen.exceeds_log2.iter().all(|(_, e)| !e));

        assert!(matches!(
            entropy_dimension_witness(&zoo::tight_example_hmm(), &t),
            Err(Error::UnsupportedModel(_))
        ));
    }
}
