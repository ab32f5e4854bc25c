//! de Bruijn sequences in lexicographic order, and initial rows cut from them.
//!
//! Sequences are anchored so the linearization starts with the all-zero word.
//! The enumerator is a smallest-symbol-first depth-first search over Eulerian
//! circuits of the de Bruijn graph, so it emits sequences in strictly
//! increasing lexicographic order.

use std::collections::HashMap;

use crate::eca::Configuration;
use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct DeBruijnSequence {
    alphabet: usize,
    order: usize,
    symbols: Vec<u8>,
}

impl DeBruijnSequence {
    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn symbols(&self) -> &[u8] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }
}

/// Lazily yields every B(order, alphabet) sequence starting with `order` zeros.
#[derive(Debug)]
pub struct Enumerator {
    alphabet: usize,
    order: usize,
    len: usize,
    seq: Vec<u8>,
    used: Vec<bool>,
    // next symbol to try at each position
    cursor: Vec<u8>,
    done: bool,
}

impl Enumerator {
    pub fn new(alphabet: usize, order: usize) -> Result<Self> {
        if !(2..=10).contains(&alphabet) || order == 0 {
            return Err(Error::InvalidParameter(format!(
                "de Bruijn parameters need 2 <= alphabet <= 10 and order >= 1, got alphabet {alphabet}, order {order}"
            )));
        }
        let len = u32::try_from(order)
            .ok()
            .and_then(|k| alphabet.checked_pow(k))
            .filter(|&l| l <= 1 << 24)
            .ok_or_else(|| {
                Error::InvalidParameter(format!("B({order},{alphabet}) is too long to enumerate"))
            })?;
        let mut used = vec![false; len];
        used[0] = true;
        Ok(Enumerator {
            alphabet,
            order,
            len,
            seq: vec![0; order],
            used,
            cursor: vec![0; len + 1],
            done: false,
        })
    }

    fn word_code(&self, word: impl Iterator<Item = u8>) -> usize {
        word.fold(0, |acc, s| acc * self.alphabet + usize::from(s))
    }

    /// Code of the word formed by the last `order - 1` symbols followed by `next`.
    fn extension_code(&self, next: u8) -> usize {
        let tail = &self.seq[self.seq.len() + 1 - self.order..];
        self.word_code(tail.iter().copied().chain(std::iter::once(next)))
    }

    fn pop(&mut self) {
        let end = self.seq.len();
        let code = self.word_code(self.seq[end - self.order..].iter().copied());
        self.used[code] = false;
        self.seq.pop();
    }

    /// Whether the `order - 1` windows that wrap around the end are all new.
    fn closes(&self) -> bool {
        let mut seen: Vec<usize> = Vec::with_capacity(self.order);
        for j in 1..self.order {
            let word = self.seq[self.len - self.order + j..]
                .iter()
                .chain(&self.seq[..j])
                .copied();
            let code = self.word_code(word);
            if self.used[code] || seen.contains(&code) {
                return false;
            }
            seen.push(code);
        }
        true
    }
}

impl Iterator for Enumerator {
    type Item = DeBruijnSequence;

    fn next(&mut self) -> Option<DeBruijnSequence> {
        if self.done {
            return None;
        }
        loop {
            let pos = self.seq.len();
            if pos == self.len {
                let found = self.closes().then(|| self.seq.clone());
                self.pop();
                if let Some(symbols) = found {
                    return Some(DeBruijnSequence {
                        alphabet: self.alphabet,
                        order: self.order,
                        symbols,
                    });
                }
                continue;
            }
            let symbol = self.cursor[pos];
            if usize::from(symbol) >= self.alphabet {
                self.cursor[pos] = 0;
                if pos == self.order {
                    self.done = true;
                    return None;
                }
                self.pop();
                continue;
            }
            self.cursor[pos] += 1;
            let code = self.extension_code(symbol);
            if !self.used[code] {
                self.used[code] = true;
                self.seq.push(symbol);
            }
        }
    }
}

/// The `count` lexicographically smallest B(`order`, `alphabet`) sequences.
pub fn enumerate(alphabet: usize, order: usize, count: usize) -> Result<Vec<DeBruijnSequence>> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    let out: Vec<_> = Enumerator::new(alphabet, order)?.take(count).collect();
    if out.len() < count {
        return Err(Error::DeBruijnExhausted {
            alphabet,
            order,
            requested: count,
            available: out.len(),
        });
    }
    Ok(out)
}

/// The first `width` symbols of the sequence as a cyclic row.
pub fn initial_condition(seq: &DeBruijnSequence, width: usize) -> Result<Configuration> {
    if width == 0 {
        return Err(Error::InvalidWidth {
            width,
            reason: "initial rows need at least one cell",
        });
    }
    if width > seq.len() {
        return Err(Error::InvalidWidth {
            width,
            reason: "wider than the de Bruijn sequence it is cut from",
        });
    }
    if seq.alphabet > 3 {
        return Err(Error::InvalidParameter(
            "initial rows are over at most three symbols".into(),
        ));
    }
    Configuration::new(seq.symbols[..width].to_vec())
}

/// Smallest order `k` with `alphabet^k >= width`.
pub fn order_for_width(alphabet: usize, width: usize) -> usize {
    let mut order = 1;
    let mut len = alphabet;
    while len < width {
        order += 1;
        len *= alphabet;
    }
    order
}

/// The first `count` ternary initial rows of the given width, cut from the
/// shortest de Bruijn sequences long enough to hold them.
pub fn initial_conditions(width: usize, count: usize) -> Result<Vec<Configuration>> {
    let order = order_for_width(3, width.max(1));
    enumerate(3, order, count)?
        .iter()
        .map(|seq| initial_condition(seq, width))
        .collect()
}

/// Brute-force check that every length-`order` word over `alphabet` symbols
/// occurs exactly once as a cyclic substring of `seq`.
pub fn verify(seq: &[u8], alphabet: usize, order: usize) -> bool {
    let Some(expected_len) = u32::try_from(order)
        .ok()
        .and_then(|k| alphabet.checked_pow(k))
    else {
        return false;
    };
    if order == 0 || seq.len() != expected_len || seq.iter().any(|&s| usize::from(s) >= alphabet) {
        return false;
    }
    let mut counts: HashMap<Vec<u8>, usize> = HashMap::new();
    for start in 0..seq.len() {
        let word: Vec<u8> = (0..order).map(|j| seq[(start + j) % seq.len()]).collect();
        *counts.entry(word).or_default() += 1;
    }
    counts.len() == expected_len && counts.values().all(|&c| c == 1)
}

/// One sequence per line, symbols as ASCII digits.
pub fn dump(rows: &[Configuration]) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str(&row.to_string());
        out.push('\n');
    }
    out
}
