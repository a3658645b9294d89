use super::SequenceDataset;
use crate::error::{Error, Result};

/// Symbols: 1 vowel, 2 other letter, 3 anything else.
pub const TEXT_ALPHABET: u32 = 3;

/// Maps characters to symbols, collapsing runs of 3 into a single 3.
pub fn encode_symbols(text: &str) -> Vec<u32> {
    let mut out: Vec<u32> = Vec::with_capacity(text.len());
    for ch in text.chars() {
        let code = match ch.to_ascii_lowercase() {
            'a' | 'e' | 'i' | 'o' | 'u' => 1,
            c if c.is_alphabetic() => 2,
            _ => 3,
        };
        if code == 3 && out.last() == Some(&3) {
            continue;
        }
        out.push(code);
    }
    out
}

/// Builds overlapping windows of `order + 1` symbols with stride 1.
pub fn encode_text(text: &str, order: usize) -> Result<SequenceDataset> {
    if order == 0 {
        return Err(Error::Config("order must be at least 1".into()));
    }
    let symbols = encode_symbols(text);
    let window = order + 1;
    if symbols.len() < window {
        return Err(Error::TextTooShort {
            len: symbols.len(),
            needed: window,
        });
    }
    let cases: Vec<Vec<u32>> = symbols.windows(window).map(<[u32]>::to_vec).collect();
    SequenceDataset::new(vec![TEXT_ALPHABET; order], TEXT_ALPHABET, &cases)
}
