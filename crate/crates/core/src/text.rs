use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};

/// Splits `text` on every character that is not a Unicode letter or digit and
/// lowercases the pieces. Empty pieces are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split(|c: char| !c.is_alphanumeric())
        .filter(|piece| !piece.is_empty())
        .map(|piece| piece.chars().flat_map(char::to_lowercase).collect())
        .collect()
}

/// [`tokenize`] for raw bytes that have not been validated yet.
pub fn tokenize_bytes(bytes: &[u8]) -> Result<Vec<String>> {
    core::str::from_utf8(bytes)
        .map(tokenize)
        .map_err(|_| Error::InvalidEncoding)
}

/// Ordered word list with counts.
///
/// Words are sorted by descending count; ties keep the order of first
/// occurrence in the corpus. A word's ordinal is its position in this list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: BTreeMap<String, usize>,
}

impl Vocabulary {
    pub fn build<S: AsRef<str>>(tokens: &[S], min_count: u64) -> Result<Self> {
        if min_count == 0 {
            return Err(Error::InvalidConfig("min_count must be at least 1".into()));
        }
        // word -> (count, first position)
        let mut seen: BTreeMap<&str, (u64, usize)> = BTreeMap::new();
        for (pos, token) in tokens.iter().enumerate() {
            seen.entry(token.as_ref()).or_insert((0, pos)).0 += 1;
        }
        let mut kept: Vec<(&str, u64, usize)> = seen
            .into_iter()
            .filter(|&(_, (count, _))| count >= min_count)
            .map(|(word, (count, first))| (word, count, first))
            .collect();
        if kept.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        kept.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
        Self::from_entries(kept.into_iter().map(|(w, c, _)| (String::from(w), c)))
    }

    /// Rebuilds a vocabulary from `(word, count)` pairs already in
    /// vocabulary order, e.g. when loading a stored model.
    pub fn from_entries<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, u64)>,
    {
        let mut words = Vec::new();
        let mut counts = Vec::new();
        let mut index = BTreeMap::new();
        for (word, count) in entries {
            if count == 0 {
                return Err(Error::InvalidConfig("word counts must be positive".into()));
            }
            if index.insert(word.clone(), words.len()).is_some() {
                return Err(Error::InvalidConfig(alloc::format!("duplicate word {word:?}")));
            }
            words.push(word);
            counts.push(count);
        }
        if words.is_empty() {
            return Err(Error::EmptyVocabulary);
        }
        Ok(Vocabulary { words, counts, index })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn word(&self, index: usize) -> Option<&str> {
        self.words.get(index).map(String::as_str)
    }

    pub fn index_of(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub(crate) fn require(&self, word: &str) -> Result<usize> {
        self.index_of(word)
            .ok_or_else(|| Error::UnknownWord(String::from(word)))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.words
            .iter()
            .map(String::as_str)
            .zip(self.counts.iter().copied())
    }
}
