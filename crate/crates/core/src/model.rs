//! A model of either class, as read from disk or taken from the zoo.

use crate::alphabet::{Alphabet, Word};
use crate::canonical::standard_ghmm;
use crate::error::Result;
use crate::ghmm::Ghmm;
use crate::qhmm::Qhmm;
use crate::vectorize::qhmm_to_ghmm_bloch;
use crate::{Tolerances, C64};

#[derive(Clone, Debug, PartialEq)]
pub enum Model {
    Ghmm(Ghmm),
    /// Complex presentation, e.g. a Liouville-vectorized QHMM.
    ComplexGhmm(Ghmm<C64>),
    Qhmm(Qhmm),
}

impl Model {
    pub fn alphabet(&self) -> &Alphabet {
        match self {
            Model::Ghmm(g) => g.alphabet(),
            Model::ComplexGhmm(g) => g.alphabet(),
            Model::Qhmm(q) => q.alphabet(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Model::Ghmm(_) => "ghmm",
            Model::ComplexGhmm(_) => "complex_ghmm",
            Model::Qhmm(_) => "qhmm",
        }
    }

    /// Latent dimension: the number of GHMM states or the QHMM memory
    /// dimension.
    pub fn dim(&self) -> usize {
        match self {
            Model::Ghmm(g) => g.dim(),
            Model::ComplexGhmm(g) => g.dim(),
            Model::Qhmm(q) => q.dim(),
        }
    }

    /// Effective quantum dimension: `d` for a QHMM and `ceil(sqrt(D))` for a
    /// GHMM on `D` states, whose process has a generalized Bloch presentation
    /// of the same size as a `ceil(sqrt(D))`-dimensional quantum memory.
    pub fn quantum_dim(&self) -> usize {
        match self {
            Model::Ghmm(g) => ceil_sqrt(g.dim()),
            Model::ComplexGhmm(g) => ceil_sqrt(g.dim()),
            Model::Qhmm(q) => q.dim(),
        }
    }

    /// Real linear presentation. QHMMs go through the Bloch representation,
    /// complex GHMMs through their standard form.
    pub fn to_ghmm(&self) -> Result<Ghmm> {
        match self {
            Model::Ghmm(g) => Ok(g.clone()),
            Model::ComplexGhmm(g) => Ok(standard_ghmm(g, &Tolerances::default())?.model),
            Model::Qhmm(q) => qhmm_to_ghmm_bloch(q),
        }
    }

    pub fn word_probability(&self, word: &Word) -> Result<f64> {
        match self {
            Model::Ghmm(g) => g.word_probability(word),
            Model::ComplexGhmm(g) => g.word_probability(word),
            Model::Qhmm(q) => q.word_probability(word),
        }
    }

    pub fn conditional_probability(&self, future: &Word, history: &Word) -> Result<f64> {
        match self {
            Model::Ghmm(g) => g.conditional_probability(future, history),
            Model::ComplexGhmm(g) => g.conditional_probability(future, history),
            Model::Qhmm(q) => q.conditional_probability(future, history),
        }
    }

    pub fn sample(&self, length: usize, seed: u64) -> Result<Word> {
        match self {
            Model::Ghmm(g) => g.sample(length, seed),
            Model::ComplexGhmm(_) => self.to_ghmm()?.sample(length, seed),
            Model::Qhmm(q) => q.sample(length, seed),
        }
    }
}

impl From<Ghmm> for Model {
    fn from(g: Ghmm) -> Self {
        Model::Ghmm(g)
    }
}

impl From<Qhmm> for Model {
    fn from(q: Qhmm) -> Self {
        Model::Qhmm(q)
    }
}

pub(crate) fn ceil_sqrt(n: usize) -> usize {
    let mut d = (n as f64).sqrt() as usize;
    while d * d < n {
        d += 1;
    }
    while d > 0 && (d - 1) * (d - 1) >= n {
        d -= 1;
    }
    d
}
