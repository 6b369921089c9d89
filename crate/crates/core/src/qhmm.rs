//! Quantum hidden Markov models in Kraus form.
//!
//! Symbol `x` acts on the memory through the completely positive map
//! `A_x(rho) = sum_y K_xy rho K_xy^dagger`; the Kraus operators of all
//! symbols together satisfy `sum_xy K_xy^dagger K_xy = I`. Superoperators are
//! never materialized here, only applied.

use nalgebra::{DMatrix, DVector};
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::alphabet::{Alphabet, Word};
use crate::error::{Error, Result};
use crate::linalg::{self, max_abs_diff};
use crate::{Tolerances, C64};

/// Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(DMatrix<C64>);

impl DensityMatrix {
    /// Tolerance on hermiticity, negativity and trace.
    pub const TOL: f64 = 1e-10;

    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        if !m.is_square() || m.nrows() == 0 {
            return Err(Error::input("density matrix must be square and nonempty"));
        }
        if !linalg::is_hermitian(&m, Self::TOL) {
            return Err(Error::invalid("density matrix is not Hermitian"));
        }
        let tr = linalg::trace(&m);
        if (tr - C64::new(1.0, 0.0)).norm() > Self::TOL {
            return Err(Error::invalid(format!("density matrix has trace {tr}")));
        }
        let herm = (&m + m.adjoint()) * C64::new(0.5, 0.0);
        let min_ev = herm.symmetric_eigenvalues().min();
        if min_ev < -Self::TOL {
            return Err(Error::invalid(format!(
                "density matrix has negative eigenvalue {min_ev:.3e}"
            )));
        }
        Ok(Self(m))
    }

    /// Rank-one projector onto a (normalized) state vector.
    pub fn from_pure(psi: &DVector<C64>) -> Result<Self> {
        let norm = psi.norm();
        if norm <= Self::TOL {
            return Err(Error::input("pure state vector is zero"));
        }
        let psi = psi / C64::new(norm, 0.0);
        Self::new(&psi * psi.adjoint())
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(DMatrix::identity(d, d) / C64::new(d as f64, 0.0))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn purity(&self) -> f64 {
        linalg::trace(&(&self.0 * &self.0)).re
    }
}

/// `rho / tr(rho)`.
pub fn normalize_memory(rho: &DMatrix<C64>) -> Result<DensityMatrix> {
    let tr = linalg::trace(rho);
    if tr.re <= Tolerances::default().degenerate {
        return Err(Error::degenerate("operator has vanishing trace", tr.re));
    }
    if tr.im.abs() > Tolerances::default().residue {
        return Err(Error::NumericalIntegrity(format!("trace {tr} is not real")));
    }
    DensityMatrix::new(rho / C64::new(tr.re, 0.0))
}

/// Joint unitary acting on memory (x) output (x) trash.
///
/// Basis index of `|m>|x>|y>` is `(m * n_outputs + x) * n_trash + y`; the
/// blank ancilla state is `x = y = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct UnitarySpec {
    pub memory_dim: usize,
    pub n_outputs: usize,
    pub n_trash: usize,
    pub u: DMatrix<C64>,
}

impl UnitarySpec {
    pub fn new(memory_dim: usize, n_outputs: usize, n_trash: usize, u: DMatrix<C64>) -> Result<Self> {
        let n = memory_dim * n_outputs * n_trash;
        if n == 0 {
            return Err(Error::input("unitary dimensions must be positive"));
        }
        if u.shape() != (n, n) {
            return Err(Error::input(format!(
                "unitary has shape {:?}, expected ({n}, {n})",
                u.shape()
            )));
        }
        if !linalg::is_unitary(&u, Tolerances::default().structural) {
            return Err(Error::invalid("matrix is not unitary"));
        }
        Ok(Self { memory_dim, n_outputs, n_trash, u })
    }

    fn index(&self, m: usize, x: usize, y: usize) -> usize {
        (m * self.n_outputs + x) * self.n_trash + y
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Qhmm {
    alphabet: Alphabet,
    sigma0: DensityMatrix,
    kraus: Vec<Vec<DMatrix<C64>>>,
}

impl Qhmm {
    pub fn new(alphabet: Alphabet, sigma0: DensityMatrix, kraus: Vec<Vec<DMatrix<C64>>>) -> Result<Self> {
        let d = sigma0.dim();
        if kraus.len() != alphabet.len() {
            return Err(Error::invalid(format!(
                "{} Kraus sets for an alphabet of {} symbols",
                kraus.len(),
                alphabet.len()
            )));
        }
        for (x, set) in kraus.iter().enumerate() {
            if set.is_empty() {
                return Err(Error::invalid(format!("symbol {:?} has no Kraus operators", alphabet.label(x))));
            }
            if set.iter().any(|k| k.shape() != (d, d)) {
                return Err(Error::invalid(format!(
                    "Kraus operator for {:?} does not match memory dimension {d}",
                    alphabet.label(x)
                )));
            }
        }
        let model = Self { alphabet, sigma0, kraus };
        let dev = model.completeness_deviation();
        if dev > Tolerances::default().structural {
            return Err(Error::invalid(format!(
                "Kraus operators are not complete (deviation {dev:.3e})"
            )));
        }
        Ok(model)
    }

    /// Kraus operators `K_xy = (I (x) <x|<y|) U (I (x) |0>|0>)`.
    pub fn from_unitary(spec: &UnitarySpec, alphabet: Alphabet, sigma0: DensityMatrix) -> Result<Self> {
        if alphabet.len() != spec.n_outputs {
            return Err(Error::input(format!(
                "alphabet of {} symbols for a unitary with {} outputs",
                alphabet.len(),
                spec.n_outputs
            )));
        }
        if sigma0.dim() != spec.memory_dim {
            return Err(Error::input("initial state does not match memory dimension"));
        }
        let d = spec.memory_dim;
        let kraus = (0..spec.n_outputs)
            .map(|x| {
                (0..spec.n_trash)
                    .map(|y| DMatrix::from_fn(d, d, |out, inp| spec.u[(spec.index(out, x, y), spec.index(inp, 0, 0))]))
                    .collect()
            })
            .collect();
        Self::new(alphabet, sigma0, kraus)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn dim(&self) -> usize {
        self.sigma0.dim()
    }

    pub fn sigma0(&self) -> &DensityMatrix {
        &self.sigma0
    }

    pub fn kraus(&self) -> &[Vec<DMatrix<C64>>] {
        &self.kraus
    }

    /// Single Kraus operator per symbol.
    pub fn is_unifilar(&self) -> bool {
        self.kraus.iter().all(|set| set.len() == 1)
    }

    pub fn completeness_deviation(&self) -> f64 {
        let d = self.dim();
        let sum = self
            .kraus
            .iter()
            .flatten()
            .fold(DMatrix::<C64>::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        max_abs_diff(&sum, &DMatrix::identity(d, d))
    }

    pub fn with_sigma0(&self, sigma0: DensityMatrix) -> Result<Self> {
        Self::new(self.alphabet.clone(), sigma0, self.kraus.clone())
    }

    /// Unitary change of memory basis: `K -> V K V^dagger`,
    /// `sigma0 -> V sigma0 V^dagger`.
    pub fn conjugate(&self, v: &DMatrix<C64>) -> Result<Self> {
        if v.shape() != (self.dim(), self.dim()) || !linalg::is_unitary(v, 1e-10) {
            return Err(Error::input("conjugating matrix must be a unitary of the memory dimension"));
        }
        let vd = v.adjoint();
        let sigma0 = DensityMatrix::new(v * self.sigma0.matrix() * &vd)?;
        let kraus = self
            .kraus
            .iter()
            .map(|set| set.iter().map(|k| v * k * &vd).collect())
            .collect();
        Self::new(self.alphabet.clone(), sigma0, kraus)
    }

    /// `A_x(rho)`.
    pub fn apply_subchannel(&self, symbol: usize, rho: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        if symbol >= self.alphabet.len() {
            return Err(Error::input(format!("symbol index {symbol} out of range")));
        }
        let d = self.dim();
        if rho.shape() != (d, d) {
            return Err(Error::input(format!(
                "operator has shape {:?}, memory dimension is {d}",
                rho.shape()
            )));
        }
        Ok(self.kraus[symbol]
            .iter()
            .fold(DMatrix::zeros(d, d), |acc, k| acc + k * rho * k.adjoint()))
    }

    /// `A_w(rho) = A_{x_{L-1}}(... A_{x_0}(rho))`.
    pub fn apply_word(&self, word: &Word, rho: &DMatrix<C64>) -> Result<DMatrix<C64>> {
        self.alphabet.check_word(word)?;
        word.iter().try_fold(rho.clone(), |r, &x| self.apply_subchannel(x, &r))
    }

    fn real_trace(&self, m: &DMatrix<C64>, tol: &Tolerances) -> Result<f64> {
        let tr = linalg::trace(m);
        if tr.im.abs() > tol.residue {
            return Err(Error::NumericalIntegrity(format!(
                "trace has imaginary residue {:.3e}",
                tr.im
            )));
        }
        Ok(tol.clamp_probability(tr.re))
    }

    /// `tr[A_w(sigma0)]`.
    pub fn word_probability(&self, word: &Word) -> Result<f64> {
        let tol = Tolerances::default();
        self.real_trace(&self.apply_word(word, self.sigma0.matrix())?, &tol)
    }

    /// `N(A_x(sigma))`.
    pub fn memory_update(&self, sigma: &DensityMatrix, symbol: usize) -> Result<DensityMatrix> {
        let out = self.apply_subchannel(symbol, sigma.matrix())?;
        let tr = linalg::trace(&out).re;
        if tr <= Tolerances::default().degenerate {
            return Err(Error::degenerate(
                format!("symbol {:?} cannot occur from this memory state", self.alphabet.label(symbol)),
                tr,
            ));
        }
        normalize_memory(&out)
    }

    /// `tr[A_future(N[A_history(sigma0)])]`.
    pub fn conditional_probability(&self, future: &Word, history: &Word) -> Result<f64> {
        let tol = Tolerances::default();
        let induced = self.apply_word(history, self.sigma0.matrix())?;
        let ph = self.real_trace(&induced, &tol)?;
        if ph <= tol.degenerate {
            return Err(Error::degenerate(
                format!("history {:?} has zero probability", self.alphabet.format_word(history, "")),
                ph,
            ));
        }
        let sigma = normalize_memory(&induced)?;
        self.real_trace(&self.apply_word(future, sigma.matrix())?, &tol)
    }

    /// Emit `length` symbols, drawing each from `tr[A_x(sigma)]` and updating
    /// the memory by the normalized subchannel output.
    pub fn sample(&self, length: usize, seed: u64) -> Result<Word> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sigma = self.sigma0.matrix().clone();
        let mut word = Vec::with_capacity(length);
        for _ in 0..length {
            let outs = (0..self.alphabet.len())
                .map(|x| self.apply_subchannel(x, &sigma))
                .collect::<Result<Vec<_>>>()?;
            let weights: Vec<f64> = outs.iter().map(|o| linalg::trace(o).re.max(0.0)).collect();
            let dist = WeightedIndex::new(&weights)
                .map_err(|e| Error::NumericalIntegrity(format!("symbol distribution: {e}")))?;
            let x = dist.sample(&mut rng);
            sigma = &outs[x] / C64::new(weights[x], 0.0);
            word.push(x);
        }
        Ok(Word(word))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn identity_model(d: usize) -> Qhmm {
        let a = Alphabet::new(["a"]).unwrap();
        Qhmm::new(a, DensityMatrix::maximally_mixed(d), vec![vec![DMatrix::identity(d, d)]]).unwrap()
    }

    #[test]
    fn identity_channel_is_transparent() {
        let m = identity_model(2);
        let rho = DMatrix::from_row_slice(2, 2, &[c(0.7), C64::new(0.1, 0.2), C64::new(0.1, -0.2), c(0.3)]);
        assert_eq!(m.apply_subchannel(0, &rho).unwrap(), rho);
        let sigma = DensityMatrix::new(rho.clone()).unwrap();
        assert!(max_abs_diff(m.memory_update(&sigma, 0).unwrap().matrix(), &rho) < 1e-15);
        let zero = DMatrix::zeros(2, 2);
        assert_eq!(m.apply_subchannel(0, &zero).unwrap(), zero);
        let word = m.sample(3, 1).unwrap();
        assert_eq!(m.alphabet().format_word(&word, ""), "aaa");
        assert!(matches!(m.apply_subchannel(0, &DMatrix::zeros(3, 3)), Err(Error::Input(_))));
    }

    #[test]
    fn tight_example_from_psi0() {
        let states = zoo::tight_example_states();
        let q = zoo::tight_example_qhmm().unwrap();
        let q0 = q.with_sigma0(DensityMatrix::from_pure(&states[0]).unwrap()).unwrap();
        let one = Word::single(1);
        let out = q0.apply_subchannel(1, q0.sigma0().matrix()).unwrap();
        assert_abs_diff_eq!(linalg::trace(&out).re, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q0.word_probability(&one).unwrap(), 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q0.word_probability(&Word::empty()).unwrap(), 1.0, epsilon = 1e-12);

        // "1" maps psi0 onto psi1, then "0" maps psi1 back onto psi0.
        let after1 = q0.memory_update(q0.sigma0(), 1).unwrap();
        let psi1 = DensityMatrix::from_pure(&states[1]).unwrap();
        assert!(max_abs_diff(after1.matrix(), psi1.matrix()) < 1e-12);
        let after10 = q0.memory_update(&after1, 0).unwrap();
        assert!(max_abs_diff(after10.matrix(), q0.sigma0().matrix()) < 1e-12);

        assert_abs_diff_eq!(
            q0.conditional_probability(&Word::single(0), &one).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-12
        );
        assert!(matches!(q0.memory_update(q0.sigma0(), 0), Err(Error::DegenerateCondition { .. })));

        let total: f64 = q.alphabet().words_of_length(3).map(|w| q.word_probability(&w).unwrap()).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn normalize_memory_cases() {
        let rho = DMatrix::from_row_slice(2, 2, &[c(0.6), C64::new(0.0, 0.2), C64::new(0.0, -0.2), c(0.4)]);
        assert!(max_abs_diff(normalize_memory(&rho).unwrap().matrix(), &rho) < 1e-15);
        assert!(max_abs_diff(normalize_memory(&(&rho * c(2.0))).unwrap().matrix(), &rho) < 1e-15);
        let diag = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.2), c(0.2)]));
        let half = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.5), c(0.5)]));
        assert!(max_abs_diff(normalize_memory(&diag).unwrap().matrix(), &half) < 1e-15);
        assert!(matches!(
            normalize_memory(&DMatrix::zeros(2, 2)),
            Err(Error::DegenerateCondition { .. })
        ));
    }

    #[test]
    fn unitary_dilation() {
        let a = Alphabet::new(["a"]).unwrap();
        let spec = UnitarySpec::new(3, 1, 1, DMatrix::identity(3, 3)).unwrap();
        let q = Qhmm::from_unitary(&spec, a, DensityMatrix::maximally_mixed(3)).unwrap();
        assert_eq!(q.kraus()[0].len(), 1);
        assert_eq!(q.kraus()[0][0], DMatrix::identity(3, 3));

        let bad = DMatrix::from_element(2, 2, c(1.0));
        assert!(UnitarySpec::new(2, 1, 1, bad).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let u = linalg::haar_unitary(4, &mut rng);
        let spec = UnitarySpec::new(2, 2, 1, u).unwrap();
        let q = Qhmm::from_unitary(&spec, Alphabet::numeric(2).unwrap(), DensityMatrix::maximally_mixed(2)).unwrap();
        assert!(q.completeness_deviation() < 1e-9);
    }

    #[test]
    fn tight_kraus_reproduce_unitary_amplitudes() {
        let states = zoo::tight_example_states();
        let q = zoo::tight_example_qhmm().unwrap();
        let w = C64::from_polar(1.0, std::f64::consts::PI / 3.0);
        let s = 1.0 / 3f64.sqrt();
        // amplitude[i][x]: coefficient of psi_x on branch x from psi_i.
        let amp = [
            [c(0.0), c(s), c(s), c(s)],
            [c(s), c(0.0), c(s), w * s],
            [c(-s), c(s), c(0.0), w.conj() * s],
            [-w.conj() * s, c(s), w * s, c(0.0)],
        ];
        for i in 0..4 {
            for x in 0..4 {
                let out = &q.kraus()[x][0] * &states[i];
                let expect = &states[x] * amp[i][x];
                assert!((out - expect).norm() < 1e-12, "branch {i} -> {x}");
            }
        }
    }

    fn random_psd(d: usize, seed: u64) -> DMatrix<C64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        linalg::random_density(d, &mut rng) * c(1.7)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn subchannels_preserve_positivity(seed in 0u64..10_000) {
            let q = zoo::random_qhmm(3, 2, 2, seed).unwrap();
            let rho = random_psd(3, seed + 1);
            for x in 0..2 {
                let out = q.apply_subchannel(x, &rho).unwrap();
                let herm = (&out + out.adjoint()) * c(0.5);
                prop_assert!(herm.symmetric_eigenvalues().min() >= -1e-10);
                prop_assert!(linalg::trace(&out).re <= linalg::trace(&rho).re + 1e-12);
            }
        }

        #[test]
        fn marginalization_and_gauge(seed in 0u64..10_000) {
            let q = zoo::random_qhmm(2, 2, 2, seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
            let v = linalg::haar_unitary(2, &mut rng);
            let g = q.conjugate(&v).unwrap();
            for len in 0..4 {
                for w in q.alphabet().words_of_length(len) {
                    let pw = q.word_probability(&w).unwrap();
                    let sum: f64 = (0..2).map(|x| q.word_probability(&w.append(x)).unwrap()).sum();
                    prop_assert!((sum - pw).abs() < 1e-10);
                    prop_assert!((g.word_probability(&w).unwrap() - pw).abs() < 1e-10);
                    if pw > 1e-6 {
                        for f in q.alphabet().words_of_length(2) {
                            let cond = q.conditional_probability(&f, &w).unwrap();
                            let ratio = q.word_probability(&w.concat(&f)).unwrap() / pw;
                            prop_assert!((cond - ratio).abs() < 1e-10);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn sampler_is_reproducible() {
        let q = zoo::random_qhmm(2, 3, 1, 4).unwrap();
        assert_eq!(q.sample(200, 8).unwrap(), q.sample(200, 8).unwrap());
        assert!(q.sample(0, 8).unwrap().is_empty());
    }
}
