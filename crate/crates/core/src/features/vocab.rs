use sha2::{Digest, Sha256};
use std::collections::HashMap;

/// Token vocabulary with a reserved unknown token at index 0.
#[derive(Debug, Clone, PartialEq)]
pub struct Vocab {
    tokens: Vec<String>,
    index: HashMap<String, u32>,
}

pub const UNK_TOKEN: &str = "<unk>";

impl Vocab {
    /// Build from an iterator of tokens; duplicates keep their first index.
    pub fn from_tokens<I, S>(tokens: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut v = Vocab {
            tokens: vec![UNK_TOKEN.to_string()],
            index: HashMap::from([(UNK_TOKEN.to_string(), 0)]),
        };
        for t in tokens {
            v.insert(t.as_ref());
        }
        v
    }

    /// Rebuild from an ordered token list (e.g. out of a checkpoint).
    /// The first entry must be the unknown token.
    pub fn from_ordered_list(tokens: Vec<String>) -> Self {
        assert_eq!(tokens.first().map(String::as_str), Some(UNK_TOKEN));
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (t.clone(), i as u32))
            .collect();
        Vocab { tokens, index }
    }

    fn insert(&mut self, token: &str) -> u32 {
        if let Some(&i) = self.index.get(token) {
            return i;
        }
        let i = self.tokens.len() as u32;
        self.tokens.push(token.to_string());
        self.index.insert(token.to_string(), i);
        i
    }

    pub fn lookup(&self, token: &str) -> u32 {
        self.index.get(token).copied().unwrap_or(0)
    }

    pub fn contains(&self, token: &str) -> bool {
        self.index.contains_key(token)
    }

    pub fn token(&self, idx: u32) -> &str {
        &self.tokens[idx as usize]
    }

    pub fn size(&self) -> u32 {
        self.tokens.len() as u32
    }

    pub fn tokens(&self) -> &[String] {
        &self.tokens
    }

    /// Stable content hash (order-sensitive canonical serialization).
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for t in &self.tokens {
            h.update(t.as_bytes());
            h.update([0u8]);
        }
        hex_string(&h.finalize())
    }
}

/// Case-sensitive character alphabet. Index 0 is the unknown character,
/// index 1 the padding character used by the char-CNN; real characters start
/// at 2.
#[derive(Debug, Clone, PartialEq)]
pub struct CharAlphabet {
    chars: Vec<char>,
    index: HashMap<char, u32>,
}

pub const CHAR_UNK: u32 = 0;
pub const CHAR_PAD: u32 = 1;

impl CharAlphabet {
    pub fn from_chars<I: IntoIterator<Item = char>>(chars: I) -> Self {
        let mut a = CharAlphabet {
            chars: Vec::new(),
            index: HashMap::new(),
        };
        for c in chars {
            if !a.index.contains_key(&c) {
                let i = a.chars.len() as u32 + 2;
                a.chars.push(c);
                a.index.insert(c, i);
            }
        }
        a
    }

    /// Alphabet over the given text plus a printable-ASCII floor, frozen at
    /// build time.
    pub fn from_text_with_ascii_floor<'a, I: IntoIterator<Item = &'a str>>(texts: I) -> Self {
        let ascii = (0x20u8..0x7f).map(|b| b as char);
        let extra: Vec<char> = texts.into_iter().flat_map(|t| t.chars()).collect();
        Self::from_chars(ascii.chain(extra))
    }

    pub fn lookup(&self, c: char) -> u32 {
        self.index.get(&c).copied().unwrap_or(CHAR_UNK)
    }

    pub fn encode_str(&self, s: &str) -> Vec<u32> {
        s.chars().map(|c| self.lookup(c)).collect()
    }

    /// Total index space including the unknown and pad slots.
    pub fn size(&self) -> u32 {
        self.chars.len() as u32 + 2
    }

    pub fn chars(&self) -> &[char] {
        &self.chars
    }

    pub fn from_ordered_list(chars: Vec<char>) -> Self {
        let index = chars
            .iter()
            .enumerate()
            .map(|(i, &c)| (c, i as u32 + 2))
            .collect();
        CharAlphabet { chars, index }
    }

    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for c in &self.chars {
            let mut buf = [0u8; 4];
            h.update(c.encode_utf8(&mut buf).as_bytes());
        }
        hex_string(&h.finalize())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_maps_to_zero() {
        let v = Vocab::from_tokens(["a", "b", "a"]);
        assert_eq!(v.size(), 3);
        assert_eq!(v.lookup("a"), 1);
        assert_eq!(v.lookup("b"), 2);
        assert_eq!(v.lookup("zzz"), 0);
        assert_eq!(v.token(0), UNK_TOKEN);
    }

    #[test]
    fn hash_is_order_sensitive_and_stable() {
        let a = Vocab::from_tokens(["a", "b"]);
        let b = Vocab::from_tokens(["b", "a"]);
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash(), Vocab::from_tokens(["a", "b"]).hash());
    }

    #[test]
    fn alphabet_indices_are_dense_and_case_sensitive() {
        let a = CharAlphabet::from_chars(['a', 'A', 'b']);
        assert_eq!(a.lookup('a'), 2);
        assert_eq!(a.lookup('A'), 3);
        assert_eq!(a.lookup('b'), 4);
        assert_eq!(a.lookup('?'), CHAR_UNK);
        assert_eq!(a.size(), 5);
    }

    #[test]
    fn ascii_floor_covers_printables() {
        let a = CharAlphabet::from_text_with_ascii_floor(["héllo"]);
        assert_ne!(a.lookup('z'), CHAR_UNK);
        assert_ne!(a.lookup('é'), CHAR_UNK);
        assert_eq!(a.lookup('\n'), CHAR_UNK);
    }

    #[test]
    fn ordered_list_roundtrip() {
        let v = Vocab::from_tokens(["x", "y"]);
        let back = Vocab::from_ordered_list(v.tokens().to_vec());
        assert_eq!(v, back);
        let a = CharAlphabet::from_chars(['q', 'r']);
        let back = CharAlphabet::from_ordered_list(a.chars().to_vec());
        assert_eq!(a, back);
    }
}
