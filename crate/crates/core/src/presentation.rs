//! Finite presentations: parsing, symmetrised relator sets, the metric small
//! cancellation check and augmentation by short trivial words.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::word::{cyclic_reduce, free_reduce, Alphabet, Letter, Word, WordParseError};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPresentation {
    pub name: String,
    pub generators: Vec<String>,
    pub relators: Vec<Word>,
    /// Length `l` such that all trivial words shorter than `l` were adjoined.
    pub augmentation_bound: Option<usize>,
}

impl GroupPresentation {
    pub fn new(name: &str, generators: &[&str], relators: Vec<Word>) -> GroupPresentation {
        GroupPresentation {
            name: name.to_string(),
            generators: generators.iter().map(|s| s.to_string()).collect(),
            relators,
            augmentation_bound: None,
        }
    }

    /// Builds a presentation from relator strings in the file word syntax.
    pub fn from_strs(name: &str, generators: &[&str], relators: &[&str]) -> Result<GroupPresentation> {
        let al = Alphabet::from_strs(generators);
        let mut rels = Vec::new();
        for (i, r) in relators.iter().enumerate() {
            let w = al.parse_word(r).map_err(|e| map_word_err(e, i + 1, 0))?;
            let w = free_reduce(&w);
            if w.is_empty() {
                return Err(Error::DegenerateRelator { line: i + 1 });
            }
            rels.push(w);
        }
        Ok(GroupPresentation::new(name, generators, rels))
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.generators.clone())
    }

    pub fn parse_word(&self, text: &str) -> Result<Word> {
        self.alphabet()
            .parse_word(text)
            .map_err(|e| map_word_err(e, 1, 0))
    }

    pub fn format(&self, w: &Word) -> String {
        self.alphabet().format(w)
    }

    /// All cyclic conjugates of the cyclically reduced relators and their
    /// inverses, deduplicated and in shortlex order.
    pub fn symmetrized_relators(&self) -> Vec<Word> {
        symmetrize(&self.relators)
    }

    /// Maximal piece length for each symmetrised relator, or `None` if the set is empty.
    pub fn max_piece_length(&self) -> usize {
        let sym = self.symmetrized_relators();
        let mut best = 0;
        for (i, a) in sym.iter().enumerate() {
            for b in sym.iter().skip(i + 1) {
                best = best.max(common_prefix(a.letters(), b.letters()));
            }
        }
        best
    }

    /// Metric small cancellation C'(1/6): every piece that is a prefix of a
    /// symmetrised relator `r` has length strictly below `|r| / 6`.
    pub fn satisfies_c_prime_sixth(&self) -> bool {
        let sym = self.symmetrized_relators();
        if sym.is_empty() {
            return true;
        }
        for (i, a) in sym.iter().enumerate() {
            for (j, b) in sym.iter().enumerate() {
                if i == j {
                    continue;
                }
                let p = common_prefix(a.letters(), b.letters());
                if 6 * p >= a.len() {
                    return false;
                }
            }
        }
        true
    }
}

pub(crate) fn symmetrize(relators: &[Word]) -> Vec<Word> {
    let mut set = BTreeSet::new();
    for r in relators {
        let c = cyclic_reduce(r);
        if c.is_empty() {
            continue;
        }
        for base in [c.clone(), c.inverse()] {
            for k in 0..base.len() {
                set.insert(base.rotate(k));
            }
        }
    }
    set.into_iter().collect()
}

fn common_prefix(a: &[Letter], b: &[Letter]) -> usize {
    a.iter().zip(b).take_while(|(x, y)| x == y).count()
}

fn map_word_err(e: WordParseError, line: usize, offset: usize) -> Error {
    match e {
        WordParseError::UnknownSymbol { column, symbol } => Error::UnknownGenerator {
            line,
            column: column + offset,
            symbol,
        },
        WordParseError::BadExponent { column } => Error::Syntax {
            line,
            column: column + offset,
            message: "malformed exponent".into(),
        },
    }
}

/// Parses the line-oriented presentation format:
///
/// ```text
/// # comment
/// name: z2
/// gens: a b
/// rel: abAB
/// ```
pub fn parse_presentation(text: &str) -> Result<GroupPresentation> {
    let mut name: Option<String> = None;
    let mut gens: Option<Vec<String>> = None;
    let mut pending: Vec<(usize, usize, String)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = match raw.find('#') {
            Some(p) => &raw[..p],
            None => raw,
        };
        if line.trim().is_empty() {
            continue;
        }
        let colon = line.find(':').ok_or_else(|| Error::Syntax {
            line: line_no,
            column: 1,
            message: "expected 'key: value'".into(),
        })?;
        let key = line[..colon].trim();
        let value = &line[colon + 1..];
        let value_col = colon + 2;
        match key {
            "name" => {
                let v = value.trim();
                if v.is_empty() || v.contains(char::is_whitespace) {
                    return Err(Error::Syntax {
                        line: line_no,
                        column: value_col,
                        message: "name must be a single identifier".into(),
                    });
                }
                name = Some(v.to_string());
            }
            "gens" => {
                if gens.is_some() {
                    return Err(Error::Syntax {
                        line: line_no,
                        column: 1,
                        message: "duplicate 'gens' line".into(),
                    });
                }
                let mut list: Vec<String> = Vec::new();
                for id in value.split_whitespace() {
                    let first = id.chars().next().unwrap();
                    if !first.is_lowercase() || !id.chars().all(|c| c.is_alphanumeric() || c == '_') {
                        let column = value_col + value.find(id).unwrap_or(0);
                        return Err(Error::Syntax {
                            line: line_no,
                            column,
                            message: format!("generator '{id}' must start with a lowercase letter"),
                        });
                    }
                    if list.iter().any(|g| g == id) {
                        return Err(Error::DuplicateGenerator(id.to_string()));
                    }
                    list.push(id.to_string());
                }
                if list.is_empty() {
                    return Err(Error::EmptyGenerators);
                }
                gens = Some(list);
            }
            "rel" => {
                let lead = value.len() - value.trim_start().len();
                pending.push((line_no, value_col + lead, value.trim().to_string()));
            }
            other => {
                return Err(Error::Syntax {
                    line: line_no,
                    column: 1,
                    message: format!("unknown key '{other}'"),
                })
            }
        }
    }

    let gens = gens.ok_or(Error::EmptyGenerators)?;
    let al = Alphabet::new(gens.clone());
    let mut relators = Vec::new();
    for (line, col, text) in pending {
        if text.is_empty() {
            continue;
        }
        let w = al
            .parse_word(&text)
            .map_err(|e| map_word_err(e, line, col - 1))?;
        let w = free_reduce(&w);
        if w.is_empty() {
            return Err(Error::DegenerateRelator { line });
        }
        relators.push(w);
    }
    Ok(GroupPresentation {
        name: name.unwrap_or_else(|| "unnamed".to_string()),
        generators: gens,
        relators,
        augmentation_bound: None,
    })
}

/// Serialises a presentation in the file grammar accepted by [`parse_presentation`].
pub fn write_presentation(p: &GroupPresentation) -> String {
    let al = p.alphabet();
    let mut s = format!("name: {}\ngens: {}\n", p.name, p.generators.join(" "));
    for r in &p.relators {
        s.push_str(&format!("rel: {}\n", al.format(r)));
    }
    s
}

/// Adjoins every cyclically reduced trivial word of length `< bound` (checked
/// by `is_trivial`) as a relator. The adjoined set is closed under rotation
/// and inversion. Fails when the number of candidate words exceeds `max_words`.
pub fn augment<F>(
    p: &GroupPresentation,
    bound: usize,
    max_words: u64,
    mut is_trivial: F,
) -> Result<GroupPresentation>
where
    F: FnMut(&Word) -> bool,
{
    let rank = p.rank() as u64;
    let mut total: u64 = 0;
    let mut per_len: u64 = 2 * rank;
    for len in 1..bound {
        total = total.saturating_add(per_len);
        if len + 1 < bound {
            per_len = per_len.saturating_mul((2 * rank).saturating_sub(1).max(1));
        }
    }
    if total > max_words {
        return Err(Error::Budget(format!(
            "augmentation to length {bound} needs ~{total} candidate words (limit {max_words})"
        )));
    }
    let mut found: BTreeSet<Word> = symmetrize(&p.relators).into_iter().collect();
    let mut stack: Vec<Letter> = Vec::new();
    enumerate_reduced(p.rank(), bound.saturating_sub(1), &mut stack, &mut |w: &[Letter]| {
        if w.len() >= 2 && w[0] == w[w.len() - 1].inv() {
            return;
        }
        let word = Word(w.to_vec());
        if found.contains(&word) {
            return;
        }
        if is_trivial(&word) {
            for base in [word.clone(), word.inverse()] {
                for k in 0..base.len() {
                    found.insert(base.rotate(k));
                }
            }
        }
    });
    let mut out = p.clone();
    let original: BTreeSet<Word> = symmetrize(&p.relators).into_iter().collect();
    for w in found {
        if !original.contains(&w) {
            out.relators.push(w);
        }
    }
    out.augmentation_bound = Some(bound);
    Ok(out)
}

fn enumerate_reduced(rank: usize, max_len: usize, stack: &mut Vec<Letter>, f: &mut dyn FnMut(&[Letter])) {
    if !stack.is_empty() {
        f(stack);
    }
    if stack.len() == max_len {
        return;
    }
    for l in Letter::alphabet(rank) {
        if stack.last() == Some(&l.inv()) {
            continue;
        }
        stack.push(l);
        enumerate_reduced(rank, max_len, stack, f);
        stack.pop();
    }
}

/// Dehn's algorithm over the symmetrised relators of a presentation.
///
/// Greedy: at the leftmost position where some symmetrised relator `r = u v`
/// has `u` as a subword with `|u| > |r|/2`, the longest such `u` is replaced
/// by `v^-1`, then the word is freely reduced. Repeats until no replacement applies.
#[derive(Clone, Debug)]
pub struct DehnSolver {
    relators: Vec<Word>,
}

impl DehnSolver {
    pub fn new(p: &GroupPresentation) -> Result<DehnSolver> {
        if !p.satisfies_c_prime_sixth() && p.augmentation_bound.is_none() {
            return Err(Error::SmallCancellation);
        }
        Ok(DehnSolver {
            relators: p.symmetrized_relators(),
        })
    }

    pub fn reduce(&self, w: &Word) -> Word {
        let mut cur = free_reduce(w);
        loop {
            match self.find_replacement(cur.letters()) {
                None => return cur,
                Some((pos, len, rel)) => {
                    let r = &self.relators[rel];
                    let complement = Word(r.letters()[len..].to_vec()).inverse();
                    let mut next = cur.letters()[..pos].to_vec();
                    next.extend_from_slice(complement.letters());
                    next.extend_from_slice(&cur.letters()[pos + len..]);
                    cur = free_reduce(&Word(next));
                }
            }
        }
    }

    pub fn is_trivial(&self, w: &Word) -> bool {
        self.reduce(w).is_empty()
    }

    fn find_replacement(&self, w: &[Letter]) -> Option<(usize, usize, usize)> {
        for pos in 0..w.len() {
            let mut best: Option<(usize, usize)> = None;
            for (ri, r) in self.relators.iter().enumerate() {
                let m = common_prefix(&w[pos..], r.letters());
                if 2 * m > r.len() && best.map_or(true, |(bl, _)| m > bl) {
                    best = Some((m, ri));
                }
            }
            if let Some((len, ri)) = best {
                return Some((pos, len, ri));
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_z2() {
        let p = parse_presentation("gens: a b\nrel: abAB").unwrap();
        assert_eq!(p.generators, vec!["a", "b"]);
        assert_eq!(p.relators.len(), 1);
        assert_eq!(p.format(&p.relators[0]), "abAB");
    }

    #[test]
    fn parse_free_group_with_empty_relator_line() {
        let p = parse_presentation("gens: a\nrel: ").unwrap();
        assert_eq!(p.rank(), 1);
        assert!(p.relators.is_empty());
    }

    #[test]
    fn parse_rejects_degenerate_relator() {
        let e = parse_presentation("gens: a b\nrel: aA").unwrap_err();
        assert_eq!(e, Error::DegenerateRelator { line: 2 });
    }

    #[test]
    fn parse_errors() {
        assert_eq!(parse_presentation("gens: a a").unwrap_err(), Error::DuplicateGenerator("a".into()));
        assert_eq!(parse_presentation("gens:\n").unwrap_err(), Error::EmptyGenerators);
        match parse_presentation("gens: a b\nrel: abx").unwrap_err() {
            Error::UnknownGenerator { line, column, symbol } => {
                assert_eq!((line, symbol), (2, 'x'));
                assert_eq!(column, 8);
            }
            e => panic!("unexpected {e:?}"),
        }
        assert!(matches!(parse_presentation("gens a b").unwrap_err(), Error::Syntax { line: 1, .. }));
    }

    #[test]
    fn comments_and_blank_lines() {
        let p = parse_presentation("# torus\nname: t2\n\ngens: a b # two\nrel: abAB\n").unwrap();
        assert_eq!(p.name, "t2");
        assert_eq!(p.relators.len(), 1);
        let again = parse_presentation(&write_presentation(&p)).unwrap();
        assert_eq!(again, p);
    }

    fn surface2() -> GroupPresentation {
        GroupPresentation::from_strs("surface2", &["a", "b", "c", "d"], &["abABcdCD"]).unwrap()
    }

    #[test]
    fn small_cancellation_check() {
        assert!(surface2().satisfies_c_prime_sixth());
        let z2 = GroupPresentation::from_strs("z2", &["a", "b"], &["abAB"]).unwrap();
        assert!(!z2.satisfies_c_prime_sixth());
        assert!(matches!(DehnSolver::new(&z2), Err(Error::SmallCancellation)));
        assert_eq!(surface2().symmetrized_relators().len(), 16);
    }

    #[test]
    fn dehn_examples() {
        let p = surface2();
        let d = DehnSolver::new(&p).unwrap();
        assert!(d.reduce(&p.parse_word("abABcdCD").unwrap()).is_empty());
        let a = p.parse_word("a").unwrap();
        assert_eq!(d.reduce(&a), a);
        assert_eq!(d.reduce(&p.parse_word("abABcdCDa").unwrap()), a);
    }
}
