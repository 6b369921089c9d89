//! JSON model files.
//!
//! ```text
//! {"kind": "ghmm" | "hmm", "alphabet": [...], "eta0": [...], "ones": [...],
//!  "transitions": {"<symbol>": [[...]]}}
//! {"kind": "qhmm", "alphabet": [...], "sigma0": [[[re, im], ...]],
//!  "kraus": {"<symbol>": [<d x d complex matrix>, ...]}}
//! {"kind": "unitary_qhmm", "d": 2, "trash": 1, "U": [[[re, im], ...]],
//!  "sigma0": ..., "alphabet": [...]}
//! {"kind": "standard_ghmm", ...ghmm fields..., "history_words": [[...]],
//!  "future_words": [[...]]}
//! ```
//!
//! Matrix entries are either plain numbers or `[re, im]` pairs. A GHMM with
//! any complex entry loads as [`Model::ComplexGhmm`]. GHMMs derived from a
//! QHMM carry `"derived_from": "qhmm"` and `"method": "bloch" | "liouville"`.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector, RowDVector};
use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::canonical::StandardGhmm;
use crate::error::{Error, Result};
use crate::ghmm::Ghmm;
use crate::model::Model;
use crate::qhmm::{DensityMatrix, Qhmm, UnitarySpec};
use crate::{Tolerances, C64};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Real(f64),
    Complex([f64; 2]),
}

impl Entry {
    fn value(self) -> C64 {
        match self {
            Entry::Real(r) => C64::new(r, 0.0),
            Entry::Complex([re, im]) => C64::new(re, im),
        }
    }

    fn is_real(self) -> bool {
        matches!(self, Entry::Real(_)) || matches!(self, Entry::Complex([_, im]) if im == 0.0)
    }
}

type Matrix = Vec<Vec<Entry>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GhmmFile {
    pub alphabet: Vec<String>,
    pub eta0: Vec<Entry>,
    /// All ones when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ones: Option<Vec<Entry>>,
    pub transitions: BTreeMap<String, Matrix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derived_from: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandardGhmmFile {
    pub alphabet: Vec<String>,
    pub eta0: Vec<Entry>,
    pub ones: Vec<Entry>,
    pub transitions: BTreeMap<String, Matrix>,
    pub history_words: Vec<Vec<String>>,
    pub future_words: Vec<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QhmmFile {
    pub alphabet: Vec<String>,
    pub sigma0: Matrix,
    pub kraus: BTreeMap<String, Vec<Matrix>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitaryQhmmFile {
    pub d: usize,
    pub trash: usize,
    #[serde(rename = "U")]
    pub u: Matrix,
    /// Maximally mixed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma0: Option<Matrix>,
    /// `0, 1, ...` when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelFile {
    Ghmm(GhmmFile),
    Hmm(GhmmFile),
    StandardGhmm(StandardGhmmFile),
    Qhmm(QhmmFile),
    UnitaryQhmm(UnitaryQhmmFile),
}

/// How a GHMM was obtained from a QHMM.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Vectorization {
    Bloch,
    Liouville,
}

impl Vectorization {
    pub fn name(self) -> &'static str {
        match self {
            Vectorization::Bloch => "bloch",
            Vectorization::Liouville => "liouville",
        }
    }
}

fn real_entries<'a>(it: impl IntoIterator<Item = &'a f64>) -> Vec<Entry> {
    it.into_iter().map(|&v| Entry::Real(v)).collect()
}

fn complex_entries<'a>(it: impl IntoIterator<Item = &'a C64>) -> Vec<Entry> {
    it.into_iter().map(|v| Entry::Complex([v.re, v.im])).collect()
}

fn real_matrix(m: &DMatrix<f64>) -> Matrix {
    m.row_iter().map(|r| real_entries(r.iter())).collect()
}

fn complex_matrix(m: &DMatrix<C64>) -> Matrix {
    m.row_iter().map(|r| complex_entries(r.iter())).collect()
}

fn parse_matrix(m: &Matrix, what: &str) -> Result<DMatrix<C64>> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    if m.iter().any(|r| r.len() != cols) {
        return Err(Error::input(format!("{what}: rows have different lengths")));
    }
    Ok(DMatrix::from_fn(rows, cols, |i, j| m[i][j].value()))
}

fn all_real<'a>(mut it: impl Iterator<Item = &'a Entry>) -> bool {
    it.all(|e| e.is_real())
}

fn ghmm_from_parts(
    alphabet: &[String],
    eta0: &[Entry],
    ones: Option<&[Entry]>,
    transitions: &BTreeMap<String, Matrix>,
) -> Result<Model> {
    let alphabet = Alphabet::new(alphabet.iter().cloned())?;
    let mut mats = Vec::with_capacity(alphabet.len());
    for label in alphabet.labels() {
        let m = transitions
            .get(label)
            .ok_or_else(|| Error::input(format!("no transition matrix for symbol {label:?}")))?;
        mats.push(parse_matrix(m, &format!("transition matrix for {label:?}"))?);
    }
    if let Some(extra) = transitions.keys().find(|k| alphabet.index_of(k).is_err()) {
        return Err(Error::input(format!("transition matrix for unknown symbol {extra:?}")));
    }
    let n = eta0.len();
    let ones_c = match ones {
        Some(o) => DVector::from_iterator(o.len(), o.iter().map(|e| e.value())),
        None => DVector::from_element(n, C64::new(1.0, 0.0)),
    };
    let eta_c = RowDVector::from_iterator(n, eta0.iter().map(|e| e.value()));
    let real = all_real(eta0.iter())
        && ones.is_none_or(|o| all_real(o.iter()))
        && transitions.values().all(|m| all_real(m.iter().flatten()));
    if real {
        let re = |m: &DMatrix<C64>| m.map(|v| v.re);
        Ok(Model::Ghmm(Ghmm::new(
            alphabet,
            eta_c.map(|v| v.re),
            mats.iter().map(re).collect(),
            ones_c.map(|v| v.re),
        )?))
    } else {
        Ok(Model::ComplexGhmm(Ghmm::new(alphabet, eta_c, mats, ones_c)?))
    }
}

impl ModelFile {
    pub fn into_model(self) -> Result<Model> {
        match self {
            ModelFile::Ghmm(f) => ghmm_from_parts(&f.alphabet, &f.eta0, f.ones.as_deref(), &f.transitions),
            ModelFile::Hmm(f) => {
                let m = ghmm_from_parts(&f.alphabet, &f.eta0, f.ones.as_deref(), &f.transitions)?;
                match &m {
                    Model::Ghmm(g) if g.hmm_flags(&Tolerances::default()).is_hmm => Ok(m),
                    _ => Err(Error::invalid("model of kind \"hmm\" is not a hidden Markov model")),
                }
            }
            ModelFile::StandardGhmm(f) => ghmm_from_parts(&f.alphabet, &f.eta0, Some(&f.ones), &f.transitions),
            ModelFile::Qhmm(f) => {
                let alphabet = Alphabet::new(f.alphabet.iter().cloned())?;
                let sigma0 = DensityMatrix::new(parse_matrix(&f.sigma0, "sigma0")?)?;
                let mut kraus = Vec::with_capacity(alphabet.len());
                for label in alphabet.labels() {
                    let set = f
                        .kraus
                        .get(label)
                        .ok_or_else(|| Error::input(format!("no Kraus operators for symbol {label:?}")))?;
                    kraus.push(
                        set.iter()
                            .map(|k| parse_matrix(k, &format!("Kraus operator for {label:?}")))
                            .collect::<Result<Vec<_>>>()?,
                    );
                }
                if let Some(extra) = f.kraus.keys().find(|k| alphabet.index_of(k).is_err()) {
                    return Err(Error::input(format!("Kraus operators for unknown symbol {extra:?}")));
                }
                Ok(Model::Qhmm(Qhmm::new(alphabet, sigma0, kraus)?))
            }
            ModelFile::UnitaryQhmm(f) => {
                let u = parse_matrix(&f.u, "U")?;
                let block = f.d * f.trash;
                if block == 0 || u.nrows() % block != 0 {
                    return Err(Error::input(format!(
                        "U of size {} is not a multiple of d * trash = {block}",
                        u.nrows()
                    )));
                }
                let n_outputs = u.nrows() / block;
                let spec = UnitarySpec::new(f.d, n_outputs, f.trash, u)?;
                let alphabet = match f.alphabet {
                    Some(labels) => Alphabet::new(labels)?,
                    None => Alphabet::numeric(n_outputs)?,
                };
                let sigma0 = match f.sigma0 {
                    Some(m) => DensityMatrix::new(parse_matrix(&m, "sigma0")?)?,
                    None => DensityMatrix::maximally_mixed(f.d),
                };
                Ok(Model::Qhmm(Qhmm::from_unitary(&spec, alphabet, sigma0)?))
            }
        }
    }
}

pub fn ghmm_file(g: &Ghmm, provenance: Option<Vectorization>) -> ModelFile {
    let a = g.alphabet();
    let body = GhmmFile {
        alphabet: a.labels().to_vec(),
        eta0: real_entries(g.eta0().iter()),
        ones: Some(real_entries(g.ones().iter())),
        transitions: a.labels().iter().cloned().zip(g.transitions().iter().map(real_matrix)).collect(),
        derived_from: provenance.map(|_| "qhmm".to_string()),
        method: provenance.map(|p| p.name().to_string()),
    };
    ModelFile::Ghmm(body)
}

pub fn complex_ghmm_file(g: &Ghmm<C64>, provenance: Option<Vectorization>) -> ModelFile {
    let a = g.alphabet();
    ModelFile::Ghmm(GhmmFile {
        alphabet: a.labels().to_vec(),
        eta0: complex_entries(g.eta0().iter()),
        ones: Some(complex_entries(g.ones().iter())),
        transitions: a.labels().iter().cloned().zip(g.transitions().iter().map(complex_matrix)).collect(),
        derived_from: provenance.map(|_| "qhmm".to_string()),
        method: provenance.map(|p| p.name().to_string()),
    })
}

pub fn qhmm_file(q: &Qhmm) -> ModelFile {
    let a = q.alphabet();
    ModelFile::Qhmm(QhmmFile {
        alphabet: a.labels().to_vec(),
        sigma0: complex_matrix(q.sigma0().matrix()),
        kraus: a
            .labels()
            .iter()
            .cloned()
            .zip(q.kraus().iter().map(|set| set.iter().map(complex_matrix).collect()))
            .collect(),
    })
}

pub fn standard_ghmm_file(s: &StandardGhmm) -> ModelFile {
    let g = &s.model;
    let a = g.alphabet();
    ModelFile::StandardGhmm(StandardGhmmFile {
        alphabet: a.labels().to_vec(),
        eta0: real_entries(g.eta0().iter()),
        ones: real_entries(g.ones().iter()),
        transitions: a.labels().iter().cloned().zip(g.transitions().iter().map(real_matrix)).collect(),
        history_words: s.lists.history_labels(a),
        future_words: s.lists.future_labels(a),
    })
}

pub fn model_file(m: &Model) -> ModelFile {
    match m {
        Model::Ghmm(g) => ghmm_file(g, None),
        Model::ComplexGhmm(g) => complex_ghmm_file(g, None),
        Model::Qhmm(q) => qhmm_file(q),
    }
}

pub fn to_json_string(file: &ModelFile) -> String {
    serde_json::to_string_pretty(file).expect("model files always serialize")
}

pub fn parse_model(text: &str) -> Result<Model> {
    let file: ModelFile = serde_json::from_str(text).map_err(|e| Error::input(format!("invalid model JSON: {e}")))?;
    file.into_model()
}

pub fn read_model(path: impl AsRef<Path>) -> Result<Model> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::input(format!("cannot read {}: {e}", path.display())))?;
    parse_model(&text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::canonical::standard_ghmm;
    use crate::vectorize::{qhmm_to_ghmm_bloch, qhmm_to_ghmm_liouville};
    use crate::zoo;

    fn assert_round_trip(m: &Model, text: &str) {
        let back = parse_model(text).unwrap();
        for len in 0..=5 {
            for w in m.alphabet().words_of_length(len) {
                let (p, q) = (m.word_probability(&w).unwrap(), back.word_probability(&w).unwrap());
                assert!((p - q).abs() <= 1e-12, "{w:?}: {p} vs {q}");
            }
        }
    }

    #[test]
    fn zoo_models_round_trip() {
        for e in zoo::list().unwrap() {
            let text = to_json_string(&model_file(&e.model));
            assert_round_trip(&e.model, &text);
        }
    }

    #[test]
    fn vectorized_exports_round_trip() {
        let q = zoo::random_qhmm(2, 2, 2, 8).unwrap();
        let m = Model::Qhmm(q.clone());
        let bloch = to_json_string(&ghmm_file(&qhmm_to_ghmm_bloch(&q).unwrap(), Some(Vectorization::Bloch)));
        assert!(bloch.contains("\"derived_from\": \"qhmm\"") && bloch.contains("\"method\": \"bloch\""));
        assert_round_trip(&m, &bloch);
        let liou = qhmm_to_ghmm_liouville(&q).unwrap();
        let text = to_json_string(&complex_ghmm_file(&liou, Some(Vectorization::Liouville)));
        assert!(matches!(parse_model(&text).unwrap(), Model::ComplexGhmm(_)));
        assert_round_trip(&m, &text);
    }

    #[test]
    fn standard_form_file() {
        let s = standard_ghmm(&zoo::tight_example_hmm(), &Tolerances::default()).unwrap();
        let text = to_json_string(&standard_ghmm_file(&s));
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["kind"], "standard_ghmm");
        assert_eq!(v["future_words"], serde_json::json!([[], ["0"], ["1"], ["2"]]));
        assert_round_trip(&Model::Ghmm(s.model.clone()), &text);
    }

    #[test]
    fn hand_written_files() {
        let hmm = r#"{"kind":"hmm","alphabet":["b","a"],"eta0":[1.0],
            "transitions":{"a":[[0.25]],"b":[[0.75]]}}"#;
        let m = parse_model(hmm).unwrap();
        assert_eq!(m.alphabet().labels(), ["a", "b"]);
        assert!((m.word_probability(&m.alphabet().parse_word("a", None).unwrap()).unwrap() - 0.25).abs() < 1e-15);

        let not_hmm = r#"{"kind":"hmm","alphabet":["a","b"],"eta0":[1.0],
            "transitions":{"a":[[-0.5]],"b":[[1.5]]}}"#;
        assert!(matches!(parse_model(not_hmm), Err(Error::InvalidModel(_))));
        let missing = r#"{"kind":"ghmm","alphabet":["a","b"],"eta0":[1.0],"transitions":{"a":[[1.0]]}}"#;
        assert!(matches!(parse_model(missing), Err(Error::Input(_))));
        assert!(matches!(parse_model("{\"kind\":\"nope\"}"), Err(Error::Input(_))));

        let qhmm = r#"{"kind":"qhmm","alphabet":["0"],"sigma0":[[[1,0]]],"kraus":{"0":[[[[1,0]]]]}}"#;
        assert_eq!(parse_model(qhmm).unwrap().dim(), 1);
    }

    #[test]
    fn unitary_file() {
        let spec = zoo::tight_example_unitary().unwrap();
        let q = zoo::tight_example_qhmm().unwrap();
        let file = ModelFile::UnitaryQhmm(UnitaryQhmmFile {
            d: 2,
            trash: 1,
            u: complex_matrix(&spec.u),
            sigma0: Some(complex_matrix(q.sigma0().matrix())),
            alphabet: None,
        });
        let text = to_json_string(&file);
        assert!(text.contains("\"U\""));
        assert_round_trip(&Model::Qhmm(q), &text);
    }
}
