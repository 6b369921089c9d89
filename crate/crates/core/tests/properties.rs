use ghmm_canon::canonical::standard_ghmm;
use ghmm_canon::equivalence::{equivalent, Method, DEFAULT_WORD_CAP};
use ghmm_canon::io::{model_file, parse_model, to_json_string};
use ghmm_canon::linalg;
use ghmm_canon::vectorize::{qhmm_to_ghmm_bloch, qhmm_to_ghmm_liouville};
use ghmm_canon::wordlist::minimal_wordlists_for;
use ghmm_canon::zoo;
use ghmm_canon::{Model, Tolerances};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 24, ..ProptestConfig::default() }
}

fn similarity(d: usize, entries: &[f64]) -> DMatrix<f64> {
    DMatrix::<f64>::identity(d, d) + DMatrix::from_fn(d, d, |i, j| 0.4 * entries[(i * d + j) % entries.len()])
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn standard_form_is_a_similarity_invariant(
        seed in 0u64..10_000,
        states in 2usize..5,
        entries in prop::collection::vec(-1.0f64..1.0, 16),
    ) {
        let tol = Tolerances::default();
        let g = zoo::random_hmm(states, 2, seed).unwrap();
        let s = similarity(states, &entries);
        prop_assume!(linalg::condition_number(&s) < 1e3);
        let h = g.apply_similarity(&s, tol.cond_cap).unwrap();
        let a = standard_ghmm(&g, &tol).unwrap();
        let b = standard_ghmm(&h, &tol).unwrap();
        prop_assert_eq!(&a.lists, &b.lists);
        prop_assert!((a.model.eta0() - b.model.eta0()).amax() < 1e-8);
        for x in 0..2 {
            prop_assert!(linalg::max_abs_diff(a.model.transition(x), b.model.transition(x)) < 1e-8);
        }
        let ell = a.lists.ell_min;
        prop_assert_eq!(a.model.dim(), ell);
        let ones = DVector::from_element(ell, 1.0);
        prop_assert!((a.model.net_transition() * &ones - &ones).amax() < 1e-9);
    }

    #[test]
    fn bloch_and_liouville_give_the_same_lists(seed in 0u64..10_000, d in 2usize..4, trash in 1usize..3) {
        let tol = Tolerances::default();
        let q = zoo::random_qhmm(d, 2, trash, seed).unwrap();
        let b = minimal_wordlists_for(&qhmm_to_ghmm_bloch(&q).unwrap(), &tol).unwrap();
        let l = minimal_wordlists_for(&qhmm_to_ghmm_liouville(&q).unwrap(), &tol).unwrap();
        prop_assert_eq!(b, l);
    }

    #[test]
    fn verdicts_agree_and_are_symmetric(s1 in 0u64..1000, s2 in 0u64..1000) {
        let tol = Tolerances::default();
        let a: Model = zoo::random_qhmm(2, 2, 1, s1).unwrap().into();
        let b: Model = zoo::random_qhmm(2, 2, 1, s2).unwrap().into();
        let mut verdicts = Vec::new();
        for m in [Method::Thm1, Method::LengthBound, Method::Canonical] {
            let ab = equivalent(&a, &b, m, &tol, DEFAULT_WORD_CAP).unwrap();
            let ba = equivalent(&b, &a, m, &tol, DEFAULT_WORD_CAP).unwrap();
            prop_assert_eq!(ab.verdict, ba.verdict);
            verdicts.push(ab.verdict);
            prop_assert!(equivalent(&a, &a, m, &tol, DEFAULT_WORD_CAP).unwrap().is_equal());
        }
        prop_assert!(verdicts.iter().all(|v| *v == verdicts[0]));
        prop_assert_eq!(verdicts[0] == ghmm_canon::Verdict::Equal, s1 == s2);
    }

    #[test]
    fn export_import_preserves_probabilities(seed in 0u64..10_000, quantum in any::<bool>()) {
        let m: Model = if quantum {
            zoo::random_qhmm(2, 3, 2, seed).unwrap().into()
        } else {
            zoo::random_hmm(4, 3, seed).unwrap().into()
        };
        let back = parse_model(&to_json_string(&model_file(&m))).unwrap();
        for len in 0..=5 {
            for w in m.alphabet().words_of_length(len) {
                prop_assert!((m.word_probability(&w).unwrap() - back.word_probability(&w).unwrap()).abs() <= 1e-12);
            }
        }
    }
}

#[test]
fn wordlists_fit_inside_the_ghmm_bounds() {
    let tol = Tolerances::default();
    for seed in 0..30 {
        let g = zoo::random_hmm(5, 2, seed).unwrap();
        let lists = minimal_wordlists_for(&g, &tol).unwrap();
        assert!(lists.ell_min <= 5);
        assert!(lists.history.iter().chain(&lists.future).all(|w| w.len() <= 4));
    }
}
