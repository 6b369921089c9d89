//! Browser bindings for three interactive views:
//!
//! * the loose example as a function of its parameter `p`,
//! * spectra and wordlists of a random QHMM under both vectorizations,
//! * an equivalence check between two models (zoo names or JSON text).
//!
//! Every entry point returns a JSON string.

use ghmm_canon::canonical::{dimension_bound, entropy_dimension_witness};
use ghmm_canon::equivalence::{equivalent, Method, DEFAULT_WORD_CAP};
use ghmm_canon::linalg::{nonzero_spectrum, spectral_distance};
use ghmm_canon::vectorize::{qhmm_to_ghmm_bloch, qhmm_to_ghmm_liouville};
use ghmm_canon::wordlist::minimal_wordlists_for;
use ghmm_canon::zoo::{self, LooseStart};
use ghmm_canon::{io, Model, Tolerances, C64};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

fn spectrum_json(ev: &[C64]) -> Value {
    json!(ev.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>())
}

pub fn loose_report(p: f64) -> Result<Value, String> {
    let tol = Tolerances::default();
    let m = zoo::loose_example_hmm(p, LooseStart::Stationary).map_err(err)?;
    let pi: Vec<f64> = m.steady_state(&tol).map_err(err)?.pi.iter().copied().collect();
    let witness = entropy_dimension_witness(&m, &tol).map_err(err)?;
    let from_a = zoo::loose_example_hmm(p, LooseStart::StateA).map_err(err)?;
    let lists = minimal_wordlists_for(&from_a, &tol).map_err(err)?;
    let a = from_a.alphabet();
    let fmt = |ws: &[ghmm_canon::Word]| ws.iter().map(|w| a.format_word(w, "")).collect::<Vec<_>>();
    Ok(json!({
        "p": p,
        "steady_state": pi,
        "entropy_bits": witness.entropy_bits,
        "log2_3": 3f64.log2(),
        "dimension_floor": witness.dimension_floor,
        "history_words": fmt(&lists.history),
        "future_words": fmt(&lists.future),
        "bound": dimension_bound(&lists),
    }))
}

pub fn spectra_report(d: usize, n_symbols: usize, n_trash: usize, seed: u64) -> Result<Value, String> {
    if d * d * n_symbols * n_trash > 4096 {
        return Err("model too large for the demo".into());
    }
    let tol = Tolerances::default();
    let q = zoo::random_qhmm(d, n_symbols, n_trash, seed).map_err(err)?;
    let bloch = qhmm_to_ghmm_bloch(&q).map_err(err)?;
    let liou = qhmm_to_ghmm_liouville(&q).map_err(err)?;
    let sb = nonzero_spectrum(&bloch.net_transition(), 1e-9);
    let sl = nonzero_spectrum(&liou.net_transition(), 1e-9);
    let lists = minimal_wordlists_for(&bloch, &tol).map_err(err)?;
    let a = q.alphabet();
    Ok(json!({
        "bloch": spectrum_json(&sb),
        "liouville": spectrum_json(&sl),
        "spectral_distance": spectral_distance(&sb, &sl),
        "history_words": lists.history.iter().map(|w| a.format_word(w, "")).collect::<Vec<_>>(),
        "future_words": lists.future.iter().map(|w| a.format_word(w, "")).collect::<Vec<_>>(),
        "bound": dimension_bound(&lists),
        "memory_dim": d,
    }))
}

fn load(text: &str) -> Result<Model, String> {
    let text = text.trim();
    match text.strip_prefix("zoo:") {
        Some(name) => zoo::entry(name).map(|e| e.model).map_err(err),
        None => io::parse_model(text).map_err(err),
    }
}

pub fn equivalence_report(a: &str, b: &str, method: &str) -> Result<Value, String> {
    let method = match method {
        "thm1" => Method::Thm1,
        "length" => Method::LengthBound,
        "canonical" => Method::Canonical,
        other => return Err(format!("unknown method {other:?}")),
    };
    let (ma, mb) = (load(a)?, load(b)?);
    let r = equivalent(&ma, &mb, method, &Tolerances::default(), DEFAULT_WORD_CAP).map_err(err)?;
    serde_json::to_value(r).map_err(err)
}

fn to_js(r: Result<Value, String>) -> Result<String, JsValue> {
    r.map(|v| v.to_string()).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn loose_example(p: f64) -> Result<String, JsValue> {
    to_js(loose_report(p))
}

#[wasm_bindgen]
pub fn random_qhmm_spectra(d: usize, n_symbols: usize, n_trash: usize, seed: u32) -> Result<String, JsValue> {
    to_js(spectra_report(d, n_symbols, n_trash, seed as u64))
}

#[wasm_bindgen]
pub fn check_equivalence(a: &str, b: &str, method: &str) -> Result<String, JsValue> {
    to_js(equivalence_report(a, b, method))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loose_view() {
        let v = loose_report(0.01).unwrap();
        assert_eq!(v["dimension_floor"], 4);
        assert_eq!(v["history_words"], json!(["ε", "1", "11", "111"]));
        assert!(loose_report(1.5).is_err());
    }

    #[test]
    fn spectra_view() {
        let v = spectra_report(2, 2, 2, 1).unwrap();
        assert!(v["spectral_distance"].as_f64().unwrap() < 1e-8);
        assert_eq!(v["bloch"].as_array().unwrap().len(), v["liouville"].as_array().unwrap().len());
        assert!(spectra_report(20, 4, 4, 0).is_err());
    }

    #[test]
    fn equivalence_view() {
        let v = equivalence_report("zoo:tight_hmm", "zoo:tight_qhmm", "canonical").unwrap();
        assert_eq!(v["verdict"], "equal");
        let v = equivalence_report("zoo:loose_hmm:0.3", "zoo:loose_hmm:0.31", "thm1").unwrap();
        assert_eq!(v["verdict"], "not_equal");
        assert!(equivalence_report("zoo:tight_hmm", "{", "thm1").is_err());
        assert!(equivalence_report("zoo:tight_hmm", "zoo:tight_hmm", "guess").is_err());
    }
}
