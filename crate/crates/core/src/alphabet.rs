//! Symbols and words.

use std::fmt;
use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Spellings accepted for the empty word on input.
pub const EMPTY_WORD_SPELLINGS: [&str; 3] = ["ε", "", "--empty"];

/// An ordered, finite set of symbol labels.
///
/// Labels are kept in lexicographic order; symbol `i` of every model built
/// over this alphabet refers to `labels()[i]`. Sorting at construction makes
/// the symbol order, and with it every canonical wordlist, independent of
/// how a model file happened to list its symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Alphabet {
    labels: Vec<String>,
}

impl Alphabet {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.is_empty() {
            return Err(Error::input("alphabet must be nonempty"));
        }
        labels.sort();
        for pair in labels.windows(2) {
            if pair[0] == pair[1] {
                return Err(Error::input(format!("duplicate symbol {:?}", pair[0])));
            }
        }
        if labels.iter().any(|l| EMPTY_WORD_SPELLINGS.contains(&l.as_str())) {
            return Err(Error::input("symbol label collides with the empty-word spelling"));
        }
        Ok(Self { labels })
    }

    /// Alphabet `{"0", "1", ..., "n-1"}` (sorted as text).
    pub fn numeric(n: usize) -> Result<Self> {
        Self::new((0..n).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, symbol: usize) -> &str {
        &self.labels[symbol]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels
            .binary_search_by(|l| l.as_str().cmp(label))
            .map_err(|_| Error::input(format!("symbol {label:?} is not in the alphabet")))
    }

    /// Parse a word from text.
    ///
    /// Without a separator every character is one symbol, which requires all
    /// labels to be single characters. `ε`, `--empty` and the empty string
    /// denote the empty word.
    pub fn parse_word(&self, text: &str, sep: Option<&str>) -> Result<Word> {
        if EMPTY_WORD_SPELLINGS.contains(&text) {
            return Ok(Word::empty());
        }
        let symbols = match sep {
            Some(sep) if !sep.is_empty() => text
                .split(sep)
                .map(|tok| self.index_of(tok))
                .collect::<Result<Vec<_>>>()?,
            _ => {
                if self.labels.iter().any(|l| l.chars().count() != 1) {
                    return Err(Error::input(
                        "alphabet has multi-character symbols; pass a separator",
                    ));
                }
                let mut buf = [0u8; 4];
                text.chars()
                    .map(|c| self.index_of(c.encode_utf8(&mut buf)))
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(Word(symbols))
    }

    pub fn word_from_labels<S: AsRef<str>>(&self, labels: &[S]) -> Result<Word> {
        labels
            .iter()
            .map(|l| self.index_of(l.as_ref()))
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    pub fn labels_of(&self, word: &Word) -> Vec<String> {
        word.iter().map(|&s| self.labels[s].clone()).collect()
    }

    /// Render a word; the empty word is rendered as `ε`.
    pub fn format_word(&self, word: &Word, sep: &str) -> String {
        if word.is_empty() {
            return "ε".to_string();
        }
        word.iter()
            .map(|&s| self.labels[s].as_str())
            .collect::<Vec<_>>()
            .join(sep)
    }

    pub fn check_word(&self, word: &Word) -> Result<()> {
        match word.iter().find(|&&s| s >= self.len()) {
            Some(s) => Err(Error::input(format!(
                "symbol index {s} out of range for alphabet of size {}",
                self.len()
            ))),
            None => Ok(()),
        }
    }

    /// All words of exactly `len` symbols, in lexicographic order.
    pub fn words_of_length(&self, len: usize) -> impl Iterator<Item = Word> + '_ {
        let n = self.len();
        let total = (n as u128).checked_pow(len as u32).unwrap_or(u128::MAX);
        (0..total).map(move |mut idx| {
            let mut symbols = vec![0; len];
            for slot in symbols.iter_mut().rev() {
                *slot = (idx % n as u128) as usize;
                idx /= n as u128;
            }
            Word(symbols)
        })
    }
}

impl TryFrom<Vec<String>> for Alphabet {
    type Error = Error;

    fn try_from(labels: Vec<String>) -> Result<Self> {
        Self::new(labels)
    }
}

impl From<Alphabet> for Vec<String> {
    fn from(a: Alphabet) -> Self {
        a.labels
    }
}

impl fmt::Display for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.labels.join(","))
    }
}

/// A finite sequence of symbol indices.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(pub Vec<usize>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn single(symbol: usize) -> Self {
        Self(vec![symbol])
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut symbols = Vec::with_capacity(self.len() + other.len());
        symbols.extend_from_slice(&self.0);
        symbols.extend_from_slice(&other.0);
        Word(symbols)
    }

    /// `self` followed by `symbol`.
    pub fn append(&self, symbol: usize) -> Word {
        let mut symbols = self.0.clone();
        symbols.push(symbol);
        Word(symbols)
    }

    /// `symbol` followed by `self`.
    pub fn prepend(&self, symbol: usize) -> Word {
        let mut symbols = Vec::with_capacity(self.len() + 1);
        symbols.push(symbol);
        symbols.extend_from_slice(&self.0);
        Word(symbols)
    }
}

impl Deref for Word {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Word(v)
    }
}
