//! Worked example models and seeded random generators.
//!
//! Named entries carry a list of facts about the model; every fact is
//! re-checked whenever the entry is built, and a failing fact aborts.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, RowDVector};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::Serialize;

use crate::alphabet::{Alphabet, Word};
use crate::canonical::{dimension_bound, entropy_dimension_witness, standard_ghmm};
use crate::error::{Error, Result};
use crate::ghmm::Ghmm;
use crate::linalg;
use crate::model::Model;
use crate::qhmm::{DensityMatrix, Qhmm, UnitarySpec};
use crate::vectorize::qhmm_to_ghmm_bloch;
use crate::wordlist::{is_sufficient_history, minimal_wordlists_for};
use crate::{Tolerances, C64};

/// Memory dimension 4 HMM on symbols `0..3`: from state `i` each symbol
/// `j != i` is emitted with probability 1/3 and moves the chain to state `j`.
/// Starts from the uniform distribution.
pub fn tight_example_hmm() -> Ghmm {
    let transitions = (0..4)
        .map(|j| DMatrix::from_fn(4, 4, |from, to| if to == j && from != j { 1.0 / 3.0 } else { 0.0 }))
        .collect();
    Ghmm::hmm(Alphabet::numeric(4).expect("four labels"), RowDVector::from_element(4, 0.25), transitions).expect("valid by construction")
}

/// Overlap `<psi0|psi1>` of the two basis memory states of the tight example.
pub fn tight_example_overlap() -> C64 {
    C64::new(0.5, 0.5 / 3f64.sqrt())
}

/// The four qubit memory states `psi0 = (1, 0)`, `psi1 = (g, sqrt(1-|g|^2))`,
/// `psi2 = psi0 - psi1`, `psi3 = psi0 - e^{-i pi/3} psi1`.
pub fn tight_example_states() -> [DVector<C64>; 4] {
    let g = tight_example_overlap();
    let psi0 = DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    let psi1 = DVector::from_vec(vec![g, C64::new((1.0 - g.norm_sqr()).sqrt(), 0.0)]);
    let psi2 = &psi0 - &psi1;
    let psi3 = &psi0 - &psi1 * C64::from_polar(1.0, -PI / 3.0);
    [psi0, psi1, psi2, psi3]
}

/// Amplitude of `|psi_to>|to>` in `U |psi_from>|0>`.
fn tight_amplitude(from: usize, to: usize) -> C64 {
    let s = 1.0 / 3f64.sqrt();
    let w = |theta: f64| C64::from_polar(s, theta);
    match (from, to) {
        (0, 1) | (0, 2) | (0, 3) => w(0.0),
        (1, 0) | (1, 2) => w(0.0),
        (1, 3) => w(PI / 3.0),
        (2, 0) => -w(0.0),
        (2, 1) => w(0.0),
        (2, 3) => w(-PI / 3.0),
        (3, 0) => -w(-PI / 3.0),
        (3, 1) => w(0.0),
        (3, 2) => w(PI / 3.0),
        _ => C64::new(0.0, 0.0),
    }
}

/// Kraus operators `K_x` of the tight example, fixed by their action on the
/// basis `psi0, psi1` and checked against the images of `psi2, psi3`.
fn tight_kraus() -> Result<Vec<DMatrix<C64>>> {
    let states = tight_example_states();
    let basis = DMatrix::from_columns(&[states[0].clone(), states[1].clone()]);
    let basis_inv = basis
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::NumericalIntegrity("tight example basis states are parallel".into()))?;
    let mut kraus = Vec::with_capacity(4);
    for x in 0..4 {
        let images = DMatrix::from_columns(&[
            &states[x] * tight_amplitude(0, x),
            &states[x] * tight_amplitude(1, x),
        ]);
        let k = images * &basis_inv;
        for (i, psi) in states.iter().enumerate() {
            let expect = &states[x] * tight_amplitude(i, x);
            if (&k * psi - expect).camax() > 1e-12 {
                return Err(Error::NumericalIntegrity(format!(
                    "tight example: image of psi{i} under symbol {x} is inconsistent with the Gram constraint"
                )));
            }
        }
        kraus.push(k);
    }
    Ok(kraus)
}

/// The `8 x 8` unitary on memory (x) output ancilla. Its action on the
/// blank-ancilla subspace is fixed; the rest is an orthonormal completion.
pub fn tight_example_unitary() -> Result<UnitarySpec> {
    let kraus = tight_kraus()?;
    let (d, n) = (2, 4);
    let isometry = DMatrix::from_fn(d * n, d, |row, inp| kraus[row % n][(row / n, inp)]);
    let completed = linalg::complete_isometry(&isometry, 1e-12)?;
    // The isometry columns belong at |in>|0>, i.e. positions 0 and n.
    let mut order: Vec<usize> = (d..d * n).collect();
    order.insert(0, 0);
    order.insert(n, 1);
    let u = DMatrix::from_fn(d * n, d * n, |r, c| completed[(r, order[c])]);
    UnitarySpec::new(d, n, 1, u)
}

/// Qubit QHMM of the tight example, started from the uniform mixture of the
/// four memory states.
pub fn tight_example_qhmm() -> Result<Qhmm> {
    let states = tight_example_states();
    let mut sigma0 = DMatrix::zeros(2, 2);
    for psi in &states {
        sigma0 += psi * psi.adjoint() * C64::new(0.25, 0.0);
    }
    let q = Qhmm::from_unitary(&tight_example_unitary()?, Alphabet::numeric(4)?, DensityMatrix::new(sigma0)?)?;
    let direct = tight_kraus()?;
    for (x, set) in q.kraus().iter().enumerate() {
        if linalg::max_abs_diff(&set[0], &direct[x]) > 1e-10 {
            return Err(Error::NumericalIntegrity("tight example dilation does not reproduce its Kraus operators".into()));
        }
    }
    Ok(q)
}

/// Initial distribution of the loose example.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LooseStart {
    /// `[1, 1-p, 1-p, 1-p] / (4 - 3p)`.
    Stationary,
    /// `[1, 0, 0, 0]`.
    StateA,
}

/// Loose example on symbols `0, 1` with states `A..D`: `A -0-> A` with
/// probability `p`, `A -1-> B` with probability `1-p`, then
/// `B -1-> C -1-> D -1-> A` deterministically.
pub fn loose_example_hmm(p: f64, start: LooseStart) -> Result<Ghmm> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::input(format!("loose example needs p in [0, 1], got {p}")));
    }
    let mut t0 = DMatrix::zeros(4, 4);
    t0[(0, 0)] = p;
    let mut t1 = DMatrix::zeros(4, 4);
    t1[(0, 1)] = 1.0 - p;
    t1[(1, 2)] = 1.0;
    t1[(2, 3)] = 1.0;
    t1[(3, 0)] = 1.0;
    let eta0 = match start {
        LooseStart::Stationary => {
            let q = 1.0 - p;
            RowDVector::from_vec(vec![1.0, q, q, q]) / (4.0 - 3.0 * p)
        }
        LooseStart::StateA => RowDVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]),
    };
    Ghmm::hmm(Alphabet::numeric(2)?, eta0, vec![t0, t1])
}

/// Single-state model emitting `0` with probability `q`, `1` otherwise.
pub fn iid_bit(q: f64) -> Result<Ghmm> {
    if !(0.0..=1.0).contains(&q) {
        return Err(Error::input(format!("bias must lie in [0, 1], got {q}")));
    }
    Ghmm::hmm(
        Alphabet::numeric(2)?,
        RowDVector::from_element(1, 1.0),
        vec![DMatrix::from_element(1, 1, q), DMatrix::from_element(1, 1, 1.0 - q)],
    )
}

/// QHMM dilated from a Haar-random unitary on `d * n_symbols * n_trash`
/// dimensions, with a random full-rank initial state.
pub fn random_qhmm(d: usize, n_symbols: usize, n_trash: usize, seed: u64) -> Result<Qhmm> {
    if d == 0 || n_symbols == 0 || n_trash == 0 {
        return Err(Error::input("random QHMM dimensions must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = linalg::haar_unitary(d * n_symbols * n_trash, &mut rng);
    let sigma0 = DensityMatrix::new(linalg::random_density(d, &mut rng))?;
    Qhmm::from_unitary(&UnitarySpec::new(d, n_symbols, n_trash, u)?, Alphabet::numeric(n_symbols)?, sigma0)
}

/// HMM whose rows are independent flat-Dirichlet draws over
/// (symbol, next state) pairs.
pub fn random_hmm(n_states: usize, n_symbols: usize, seed: u64) -> Result<Ghmm> {
    if n_states == 0 || n_symbols == 0 {
        return Err(Error::input("random HMM dimensions must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dirichlet = |n: usize| {
        let v: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let s: f64 = v.iter().sum();
        v.into_iter().map(|a| a / s).collect::<Vec<_>>()
    };
    let mut transitions = vec![DMatrix::zeros(n_states, n_states); n_symbols];
    for from in 0..n_states {
        let row = dirichlet(n_symbols * n_states);
        for (k, w) in row.into_iter().enumerate() {
            transitions[k / n_states][(from, k % n_states)] = w;
        }
    }
    let eta0 = RowDVector::from_vec(dirichlet(n_states));
    Ghmm::hmm(Alphabet::numeric(n_symbols)?, eta0, transitions)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactSource {
    /// Quoted from the published description of the example.
    Stated,
    /// Follows from the construction by calculation.
    Computed,
}

#[derive(Clone, Debug, Serialize)]
pub struct Fact {
    pub claim: String,
    pub source: FactSource,
}

#[derive(Clone, Debug)]
pub struct ZooEntry {
    pub name: String,
    pub description: String,
    pub model: Model,
    /// Facts re-verified when the entry was built.
    pub facts: Vec<Fact>,
}

/// Names accepted by [`entry`]; `loose_hmm` and `loose_hmm_a` take an
/// optional `:p` suffix, `iid_bit` an optional `:q`.
pub const ENTRY_NAMES: &[&str] = &["tight_hmm", "tight_qhmm", "loose_hmm", "loose_hmm_a", "iid_bit"];

const DEFAULT_LOOSE_P: f64 = 0.3;

struct Checker {
    name: String,
    facts: Vec<Fact>,
}

impl Checker {
    fn new(name: &str) -> Self {
        Self { name: name.to_string(), facts: Vec::new() }
    }

    fn check(&mut self, source: FactSource, claim: impl Into<String>, holds: Result<bool>) -> Result<()> {
        let claim = claim.into();
        match holds {
            Ok(true) => {
                self.facts.push(Fact { claim, source });
                Ok(())
            }
            Ok(false) => Err(Error::AlgorithmBug(format!("zoo entry {}: fact does not hold: {claim}", self.name))),
            Err(e) => Err(Error::AlgorithmBug(format!("zoo entry {}: cannot check {claim}: {e}", self.name))),
        }
    }

    fn done(self, description: &str, model: Model) -> ZooEntry {
        ZooEntry { name: self.name, description: description.to_string(), model, facts: self.facts }
    }
}

fn words(alphabet: &Alphabet, list: &[&str]) -> Vec<Word> {
    list.iter().map(|s| alphabet.parse_word(s, None).expect("zoo word")).collect()
}

fn parse_param(name: &str, text: Option<&str>, default: f64) -> Result<f64> {
    match text {
        None => Ok(default),
        Some(t) => t
            .parse::<f64>()
            .map_err(|_| Error::input(format!("zoo entry {name}: cannot parse parameter {t:?}"))),
    }
}

/// Build and verify a named entry, e.g. `tight_qhmm` or `loose_hmm:0.1`.
pub fn entry(spec: &str) -> Result<ZooEntry> {
    let (name, param) = match spec.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (spec, None),
    };
    let tol = Tolerances::default();
    match name {
        "tight_hmm" | "tight_qhmm" if param.is_some() => {
            Err(Error::input(format!("zoo entry {name} takes no parameter")))
        }
        "tight_hmm" => {
            let m = tight_example_hmm();
            let a = m.alphabet().clone();
            let mut c = Checker::new(name);
            let lists = minimal_wordlists_for(&m, &tol)?;
            c.check(FactSource::Stated, "l_min = 4", Ok(lists.ell_min == 4))?;
            c.check(FactSource::Stated, "future wordlist {ε,0,1,2}", Ok(lists.future == words(&a, &["ε", "0", "1", "2"])))?;
            c.check(
                FactSource::Stated,
                "{0,1,2,3} is a sufficient history wordlist",
                is_sufficient_history(&m, &words(&a, &["0", "1", "2", "3"]), &tol),
            )?;
            c.check(FactSource::Computed, "every transition probability is 0 or 1/3", Ok(m
                .transitions()
                .iter()
                .flatten()
                .all(|&v| v == 0.0 || (v - 1.0 / 3.0).abs() < 1e-15)))?;
            let no_repeat = (0..4).try_fold(true, |ok, i| {
                let from_i = m.with_eta0(RowDVector::from_fn(4, |_, j| if i == j { 1.0 } else { 0.0 }))?;
                Ok::<bool, Error>(ok && from_i.word_probability(&Word(vec![i, i]))? == 0.0)
            });
            c.check(FactSource::Computed, "P(ii) = 0 from state i", no_repeat)?;
            Ok(c.done("four-state Markov chain that never repeats a symbol", Model::Ghmm(m)))
        }
        "tight_qhmm" => {
            let q = tight_example_qhmm()?;
            let mut c = Checker::new(name);
            let st = tight_example_states();
            let g = st[0].dotc(&st[1]);
            c.check(FactSource::Computed, "<psi0|psi1> = 1/2 + i/(2 sqrt 3)", Ok((g - tight_example_overlap()).norm() < 1e-15))?;
            c.check(FactSource::Stated, "memory dimension 2", Ok(q.dim() == 2))?;
            c.check(FactSource::Stated, "unifilar, no trash ancilla", Ok(q.is_unifilar()))?;
            let bloch = qhmm_to_ghmm_bloch(&q)?;
            let lists = minimal_wordlists_for(&bloch, &tol)?;
            c.check(FactSource::Stated, "saturates the bound ceil(sqrt(l_min)) = 2", Ok(dimension_bound(&lists).d_min_lower == 2))?;
            let h = standard_ghmm(&tight_example_hmm(), &tol)?;
            let s = standard_ghmm(&bloch, &tol)?;
            let same = h.lists == s.lists
                && (h.model.eta0() - s.model.eta0()).amax() < 1e-8
                && (0..4).all(|x| linalg::max_abs_diff(h.model.transition(x), s.model.transition(x)) < 1e-8);
            c.check(FactSource::Stated, "same standard GHMM as tight_hmm", Ok(same))?;
            Ok(c.done("qubit QHMM generating the tight_hmm process", Model::Qhmm(q)))
        }
        "loose_hmm" | "loose_hmm_a" => {
            let p = parse_param(name, param, DEFAULT_LOOSE_P)?;
            let start = if name == "loose_hmm" { LooseStart::Stationary } else { LooseStart::StateA };
            let m = loose_example_hmm(p, start)?;
            let mut c = Checker::new(name);
            let flags = m.hmm_flags(&tol);
            c.check(FactSource::Stated, "unifilar and co-unifilar", Ok(flags.is_unifilar && flags.is_counifilar))?;
            let pi = m.steady_state(&tol).map(|s| s.pi);
            let expect = RowDVector::from_vec(vec![1.0, 1.0 - p, 1.0 - p, 1.0 - p]) / (4.0 - 3.0 * p);
            c.check(
                FactSource::Stated,
                "steady state [1, 1-p, 1-p, 1-p] / (4-3p)",
                pi.map(|pi| (pi - &expect).amax() < 1e-10),
            )?;
            let from_a = m.with_eta0(RowDVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]))?;
            let a = m.alphabet().clone();
            if p > 0.0 && p < 1.0 {
                let lists = minimal_wordlists_for(&from_a, &tol)?;
                c.check(
                    FactSource::Stated,
                    "wordlists {ε,1,11,111} and {ε,0,10,110} from state A",
                    Ok(lists.history == words(&a, &["ε", "1", "11", "111"])
                        && lists.future == words(&a, &["ε", "0", "10", "110"])),
                )?;
                c.check(FactSource::Stated, "l_min = 4", Ok(lists.ell_min == 4))?;
            }
            if p <= 0.2 {
                let w = entropy_dimension_witness(&m, &tol);
                c.check(FactSource::Stated, "H(pi) > log2 3", w.map(|w| w.entropy_bits > 3f64.log2()))?;
            }
            let description = match start {
                LooseStart::Stationary => format!("four-state unifilar, co-unifilar HMM, p = {p}, stationary start"),
                LooseStart::StateA => format!("four-state unifilar, co-unifilar HMM, p = {p}, started in A"),
            };
            Ok(c.done(&description, Model::Ghmm(m)))
        }
        "iid_bit" => {
            let q = parse_param(name, param, 0.5)?;
            let m = iid_bit(q)?;
            let mut c = Checker::new(name);
            c.check(FactSource::Computed, "P(0) = q", m.word_probability(&Word::single(0)).map(|v| (v - q).abs() < 1e-15))?;
            Ok(c.done(&format!("independent bits with P(0) = {q}"), Model::Ghmm(m)))
        }
        _ => Err(Error::input(format!(
            "unknown zoo entry {name:?}; known entries: {}",
            ENTRY_NAMES.join(", ")
        ))),
    }
}

/// Every named entry with default parameters.
pub fn list() -> Result<Vec<ZooEntry>> {
    ENTRY_NAMES.iter().map(|n| entry(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn overlap_solves_norm_constraints() {
        // |psi2| = |psi3| = 1 with unit psi0, psi1 forces Re g = 1/2 and
        // Re(e^{-i pi/3} g) = 1/2.
        let g = tight_example_overlap();
        assert_abs_diff_eq!(g.re, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!((C64::from_polar(1.0, -PI / 3.0) * g).re, 0.5, epsilon = 1e-15);
        for psi in tight_example_states() {
            assert_abs_diff_eq!(psi.norm(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn tight_unitary_is_a_dilation() {
        let spec = tight_example_unitary().unwrap();
        assert!(linalg::is_unitary(&spec.u, 1e-12));
        let q = tight_example_qhmm().unwrap();
        assert!(q.completeness_deviation() < 1e-12);
        assert_eq!(q.kraus().iter().map(Vec::len).collect::<Vec<_>>(), vec![1; 4]);
    }

    #[test]
    fn tight_pair_agree_on_words() {
        let h = tight_example_hmm();
        let q = tight_example_qhmm().unwrap();
        for len in 0..=6 {
            for w in h.alphabet().words_of_length(len) {
                assert_abs_diff_eq!(h.word_probability(&w).unwrap(), q.word_probability(&w).unwrap(), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn all_entries_verify() {
        let entries = list().unwrap();
        assert_eq!(entries.len(), ENTRY_NAMES.len());
        assert!(entries.iter().all(|e| !e.facts.is_empty()));
        for p in ["0.01", "0.1", "0.2", "0.7", "0", "1"] {
            entry(&format!("loose_hmm:{p}")).unwrap();
        }
    }

    #[test]
    fn bad_names_and_parameters() {
        assert!(matches!(entry("nope"), Err(Error::Input(_))));
        assert!(matches!(entry("loose_hmm:x"), Err(Error::Input(_))));
        assert!(matches!(entry("loose_hmm:1.5"), Err(Error::Input(_))));
        assert!(matches!(entry("tight_hmm:1"), Err(Error::Input(_))));
    }

    #[test]
    fn loose_entropy_floor_for_small_p() {
        let tol = Tolerances::default();
        for k in 1..=20 {
            let p = k as f64 * 0.01;
            let m = loose_example_hmm(p, LooseStart::Stationary).unwrap();
            assert!(entropy_dimension_witness(&m, &tol).unwrap().entropy_bits > 3f64.log2());
        }
    }

    #[test]
    fn random_generators_are_seeded() {
        assert_eq!(random_qhmm(2, 2, 2, 9).unwrap(), random_qhmm(2, 2, 2, 9).unwrap());
        assert_ne!(random_qhmm(2, 2, 2, 9).unwrap(), random_qhmm(2, 2, 2, 10).unwrap());
        let h = random_hmm(3, 2, 4).unwrap();
        assert!(h.hmm_flags(&Tolerances::default()).is_hmm);
        assert_eq!(h, random_hmm(3, 2, 4).unwrap());
        let q = random_qhmm(3, 2, 1, 1).unwrap();
        assert!(q.completeness_deviation() < 1e-9);
    }
}
