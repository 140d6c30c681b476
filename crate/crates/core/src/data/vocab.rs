use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const PAD_ID: usize = 0;
pub const UNK_ID: usize = 1;
const RESERVED: usize = 2;

/// Character to id map. Ids 0 and 1 are padding and unknown; the rest are
/// assigned by descending frequency, ties broken by code point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VocabRepr", into = "VocabRepr")]
pub struct CharVocab {
    chars: Vec<char>,
    char_to_id: HashMap<char, usize>,
    min_frequency: usize,
}

#[derive(Serialize, Deserialize)]
struct VocabRepr {
    chars: String,
    min_frequency: usize,
}

impl From<CharVocab> for VocabRepr {
    fn from(v: CharVocab) -> Self {
        VocabRepr {
            chars: v.chars.iter().collect(),
            min_frequency: v.min_frequency,
        }
    }
}

impl TryFrom<VocabRepr> for CharVocab {
    type Error = Error;

    fn try_from(r: VocabRepr) -> Result<Self> {
        CharVocab::from_chars(r.chars.chars().collect(), r.min_frequency)
    }
}

impl CharVocab {
    pub fn build<S: AsRef<str>>(corpus: impl IntoIterator<Item = S>, min_frequency: usize) -> Result<Self> {
        let mut counts: HashMap<char, usize> = HashMap::new();
        let mut any = false;
        for text in corpus {
            for c in text.as_ref().chars() {
                *counts.entry(c).or_default() += 1;
                any = true;
            }
        }
        if !any {
            return Err(Error::contract("cannot build a vocabulary from an empty corpus"));
        }
        let mut frequent: Vec<(char, usize)> = counts
            .into_iter()
            .filter(|&(_, n)| n >= min_frequency)
            .collect();
        frequent.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        Self::from_chars(frequent.into_iter().map(|(c, _)| c).collect(), min_frequency)
    }

    /// Vocabulary with `chars[k]` at id `k + 2`.
    pub fn from_chars(chars: Vec<char>, min_frequency: usize) -> Result<Self> {
        let mut char_to_id = HashMap::with_capacity(chars.len());
        for (i, &c) in chars.iter().enumerate() {
            if char_to_id.insert(c, i + RESERVED).is_some() {
                return Err(Error::contract(format!("character {c:?} listed twice")));
            }
        }
        Ok(CharVocab {
            chars,
            char_to_id,
            min_frequency,
        })
    }

    pub fn len(&self) -> usize {
        self.chars.len() + RESERVED
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn min_frequency(&self) -> usize {
        self.min_frequency
    }

    pub fn contains(&self, c: char) -> bool {
        self.char_to_id.contains_key(&c)
    }

    pub fn id(&self, c: char) -> usize {
        self.char_to_id.get(&c).copied().unwrap_or(UNK_ID)
    }

    pub fn char_of(&self, id: usize) -> Option<char> {
        id.checked_sub(RESERVED).and_then(|k| self.chars.get(k)).copied()
    }

    pub fn encode(&self, text: &str) -> Vec<usize> {
        text.chars().map(|c| self.id(c)).collect()
    }

    /// Known characters in id order.
    pub fn chars(&self) -> &[char] {
        &self.chars
    }
}
