//! Letters and words over a symmetric generating set.
//!
//! A [`Letter`] packs a generator index and an inversion bit into one code so
//! that the natural integer order on codes is the shortlex alphabet order
//! `a < A < b < B < ...` over the declared generator list.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Letter(u16);

impl Letter {
    pub fn gen(g: usize) -> Letter {
        Letter((g as u16) << 1)
    }

    pub fn gen_inv(g: usize) -> Letter {
        Letter(((g as u16) << 1) | 1)
    }

    pub fn from_code(code: usize) -> Letter {
        Letter(code as u16)
    }

    /// Dense index in `0..2 * rank`.
    pub fn code(self) -> usize {
        self.0 as usize
    }

    pub fn generator(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inv(self) -> Letter {
        Letter(self.0 ^ 1)
    }

    /// All letters of a rank-`rank` alphabet in shortlex order.
    pub fn alphabet(rank: usize) -> impl Iterator<Item = Letter> {
        (0..2 * rank).map(Letter::from_code)
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_inverse() {
            write!(f, "g{}^-1", self.generator())
        } else {
            write!(f, "g{}", self.generator())
        }
    }
}

#[derive(Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Word {
        Word(Vec::new())
    }

    pub fn from_letters<I: IntoIterator<Item = Letter>>(it: I) -> Word {
        Word(it.into_iter().collect())
    }

    /// Builds a word from signed 1-based generator indices (`-2` is `b^-1`).
    pub fn from_signed(xs: &[i32]) -> Word {
        Word(
            xs.iter()
                .map(|&x| {
                    assert!(x != 0, "zero is not a signed generator index");
                    if x > 0 {
                        Letter::gen(x as usize - 1)
                    } else {
                        Letter::gen_inv((-x) as usize - 1)
                    }
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inv()).collect())
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn push(&mut self, l: Letter) {
        self.0.push(l)
    }

    /// Power of a word; negative exponents invert.
    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Vec::with_capacity(base.len() * k.unsigned_abs() as usize);
        for _ in 0..k.unsigned_abs() {
            out.extend_from_slice(&base.0);
        }
        Word(out)
    }

    pub fn is_freely_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1].inv())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_freely_reduced()
            && (self.0.len() < 2 || self.0[0] != self.0[self.0.len() - 1].inv())
    }

    /// Rotation starting at position `k`.
    pub fn rotate(&self, k: usize) -> Word {
        if self.0.is_empty() {
            return Word::empty();
        }
        let k = k % self.0.len();
        let mut v = self.0[k..].to_vec();
        v.extend_from_slice(&self.0[..k]);
        Word(v)
    }

    /// Number of occurrences of each generator (with sign) summed.
    pub fn exponent_sum(&self, g: usize) -> i64 {
        self.0
            .iter()
            .filter(|l| l.generator() == g)
            .map(|l| if l.is_inverse() { -1 } else { 1 })
            .sum()
    }

    pub fn max_generator(&self) -> Option<usize> {
        self.0.iter().map(|l| l.generator()).max()
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word{:?}", self.0)
    }
}

/// Shortlex order: shorter words first, then lexicographic by letter code.
pub fn shortlex_cmp(a: &[Letter], b: &[Letter]) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        shortlex_cmp(&self.0, &other.0)
    }
}

/// Free reduction with a stack; the result is the unique freely reduced word.
pub fn free_reduce(w: &Word) -> Word {
    let mut out: Vec<Letter> = Vec::with_capacity(w.len());
    for &l in &w.0 {
        if out.last() == Some(&l.inv()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    Word(out)
}

/// Cyclic reduction: free reduction followed by stripping inverse pairs at the ends.
pub fn cyclic_reduce(w: &Word) -> Word {
    let r = free_reduce(w);
    let v = &r.0;
    let mut i = 0;
    let mut j = v.len();
    while j >= i + 2 && v[i] == v[j - 1].inv() {
        i += 1;
        j -= 1;
    }
    Word(v[i..j].to_vec())
}

/// Formats words using generator names; an inverse capitalises the first character.
#[derive(Clone, Debug)]
pub struct Alphabet {
    names: Vec<String>,
}

impl Alphabet {
    pub fn new(names: Vec<String>) -> Alphabet {
        Alphabet { names }
    }

    pub fn from_strs(names: &[&str]) -> Alphabet {
        Alphabet::new(names.iter().map(|s| s.to_string()).collect())
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn rank(&self) -> usize {
        self.names.len()
    }

    pub fn letter_name(&self, l: Letter) -> String {
        let name = &self.names[l.generator()];
        if l.is_inverse() {
            let mut cs = name.chars();
            match cs.next() {
                Some(c) => c.to_uppercase().chain(cs).collect(),
                None => String::new(),
            }
        } else {
            name.clone()
        }
    }

    pub fn format(&self, w: &Word) -> String {
        w.0.iter().map(|&l| self.letter_name(l)).collect()
    }

    pub fn format_letters(&self, w: &[Letter]) -> String {
        w.iter().map(|&l| self.letter_name(l)).collect()
    }

    /// Parses a concatenation of generator names (longest match first),
    /// with an optional `^k` exponent after each token. Whitespace is ignored.
    pub fn parse_word(&self, text: &str) -> Result<Word, WordParseError> {
        let chars: Vec<char> = text.chars().collect();
        let mut pos = 0;
        let mut out = Vec::new();
        while pos < chars.len() {
            if chars[pos].is_whitespace() {
                pos += 1;
                continue;
            }
            if chars[pos] == '1' && !self.names.iter().any(|n| n.starts_with('1')) {
                // explicit identity token
                pos += 1;
                continue;
            }
            let mut best: Option<(usize, Letter)> = None;
            for (g, name) in self.names.iter().enumerate() {
                let nc: Vec<char> = name.chars().collect();
                if nc.is_empty() || pos + nc.len() > chars.len() {
                    continue;
                }
                let head = chars[pos];
                let inverse = if head == nc[0] {
                    false
                } else if head.is_uppercase() && head.to_lowercase().eq(std::iter::once(nc[0])) {
                    true
                } else {
                    continue;
                };
                if chars[pos + 1..pos + nc.len()] != nc[1..] {
                    continue;
                }
                if best.map_or(true, |(len, _)| nc.len() > len) {
                    let l = if inverse { Letter::gen_inv(g) } else { Letter::gen(g) };
                    best = Some((nc.len(), l));
                }
            }
            let (len, letter) = best.ok_or(WordParseError::UnknownSymbol {
                column: pos + 1,
                symbol: chars[pos],
            })?;
            pos += len;
            let mut exponent: i64 = 1;
            if pos < chars.len() && chars[pos] == '^' {
                pos += 1;
                let start = pos;
                if pos < chars.len() && (chars[pos] == '-' || chars[pos] == '+') {
                    pos += 1;
                }
                while pos < chars.len() && chars[pos].is_ascii_digit() {
                    pos += 1;
                }
                let s: String = chars[start..pos].iter().collect();
                exponent = s
                    .parse()
                    .map_err(|_| WordParseError::BadExponent { column: start + 1 })?;
            }
            let unit = Word(vec![letter]);
            out.extend(unit.pow(exponent).0);
        }
        Ok(Word(out))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum WordParseError {
    #[error("unknown generator symbol '{symbol}' at column {column}")]
    UnknownSymbol { column: usize, symbol: char },
    #[error("malformed exponent at column {column}")]
    BadExponent { column: usize },
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::from_strs(&["a", "b"])
    }

    #[test]
    fn free_reduce_examples() {
        let al = ab();
        let w = al.parse_word("aAb").unwrap();
        assert_eq!(al.format(&free_reduce(&w)), "b");
        assert_eq!(free_reduce(&Word::empty()), Word::empty());
        let w = al.parse_word("abBA").unwrap();
        assert!(free_reduce(&w).is_empty());
    }

    #[test]
    fn letter_order_is_shortlex_alphabet() {
        let a = Letter::gen(0);
        let big_a = Letter::gen_inv(0);
        let b = Letter::gen(1);
        assert!(a < big_a && big_a < b);
        assert_eq!(big_a.inv(), a);
    }

    #[test]
    fn parse_multichar_and_exponents() {
        let al = Alphabet::from_strs(&["x", "x1", "t"]);
        let w = al.parse_word("x1 X t^-2").unwrap();
        assert_eq!(al.format(&w), "x1XTT");
        assert!(al.parse_word("q").is_err());
    }

    #[test]
    fn cyclic_reduce_strips_conjugation() {
        let al = ab();
        let w = al.parse_word("abaBA").unwrap();
        assert_eq!(al.format(&cyclic_reduce(&w)), "a");
    }

    #[test]
    fn shortlex_cmp_orders_length_first() {
        let al = ab();
        let x = al.parse_word("B").unwrap();
        let y = al.parse_word("aa").unwrap();
        assert!(x < y);
        assert!(al.parse_word("aB").unwrap() < al.parse_word("Ba").unwrap());
    }
}
