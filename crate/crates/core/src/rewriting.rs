//! Shortlex Knuth–Bendix completion for group presentations.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::presentation::GroupPresentation;
use crate::word::{shortlex_cmp, Letter, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompletionBudget {
    pub max_rules: usize,
    pub max_rule_length: usize,
}

impl Default for CompletionBudget {
    fn default() -> Self {
        CompletionBudget {
            max_rules: 2000,
            max_rule_length: 24,
        }
    }
}

const NONE: u32 = u32::MAX;

/// Trie over reversed left-hand sides, so matches ending at the top of a
/// stack are found by walking the stack downwards.
#[derive(Clone, Debug)]
struct SuffixTrie {
    width: usize,
    next: Vec<u32>,
    rule: Vec<u32>,
}

impl SuffixTrie {
    fn new(width: usize) -> SuffixTrie {
        SuffixTrie {
            width,
            next: vec![NONE; width],
            rule: vec![NONE],
        }
    }

    fn insert(&mut self, lhs: &[Letter], id: u32) {
        let mut node = 0usize;
        for l in lhs.iter().rev() {
            let slot = node * self.width + l.code();
            if self.next[slot] == NONE {
                let fresh = self.rule.len() as u32;
                self.rule.push(NONE);
                self.next.extend(std::iter::repeat(NONE).take(self.width));
                self.next[slot] = fresh;
            }
            node = self.next[slot] as usize;
        }
        self.rule[node] = id;
    }

    fn remove(&mut self, lhs: &[Letter]) {
        let mut node = 0usize;
        for l in lhs.iter().rev() {
            let n = self.next[node * self.width + l.code()];
            if n == NONE {
                return;
            }
            node = n as usize;
        }
        self.rule[node] = NONE;
    }

    /// Shortest rule whose left side is a suffix of `stack`.
    fn match_suffix(&self, stack: &[Letter]) -> Option<(u32, usize)> {
        let mut node = 0usize;
        for (depth, l) in stack.iter().rev().enumerate() {
            let n = self.next[node * self.width + l.code()];
            if n == NONE {
                return None;
            }
            node = n as usize;
            if self.rule[node] != NONE {
                return Some((self.rule[node], depth + 1));
            }
        }
        None
    }
}

#[derive(Clone, Debug)]
pub struct RewritingSystem {
    rank: usize,
    rules: Vec<(Word, Word)>,
    active: Vec<bool>,
    trie: SuffixTrie,
    pub confluent: bool,
    pub budget: CompletionBudget,
    /// Why completion stopped early, if it did.
    pub exhausted: Option<String>,
}

impl RewritingSystem {
    fn empty(rank: usize, budget: CompletionBudget) -> RewritingSystem {
        RewritingSystem {
            rank,
            rules: Vec::new(),
            active: Vec::new(),
            trie: SuffixTrie::new(2 * rank.max(1)),
            confluent: false,
            budget,
            exhausted: None,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Active rules in insertion order.
    pub fn rules(&self) -> Vec<(Word, Word)> {
        self.rules
            .iter()
            .zip(&self.active)
            .filter(|(_, &a)| a)
            .map(|(r, _)| r.clone())
            .collect()
    }

    pub fn rule_count(&self) -> usize {
        self.active.iter().filter(|&&a| a).count()
    }

    fn add_rule(&mut self, lhs: Word, rhs: Word) -> usize {
        let id = self.rules.len();
        self.trie.insert(lhs.letters(), id as u32);
        self.rules.push((lhs, rhs));
        self.active.push(true);
        id
    }

    fn deactivate(&mut self, id: usize) {
        self.active[id] = false;
        let lhs = self.rules[id].0.clone();
        self.trie.remove(lhs.letters());
    }

    /// Rewrites to an irreducible word. For a confluent system this is the
    /// shortlex normal form.
    pub fn reduce(&self, w: &Word) -> Word {
        let mut stack: Vec<Letter> = Vec::with_capacity(w.len());
        self.reduce_onto(&mut stack, w.letters());
        Word(stack)
    }

    /// Appends `letters` to an irreducible `stack`, keeping it irreducible.
    pub fn reduce_onto(&self, stack: &mut Vec<Letter>, letters: &[Letter]) {
        let mut input: Vec<Letter> = letters.iter().rev().copied().collect();
        while let Some(l) = input.pop() {
            stack.push(l);
            if let Some((rule, len)) = self.trie.match_suffix(stack) {
                stack.truncate(stack.len() - len);
                let rhs = &self.rules[rule as usize].1;
                input.extend(rhs.letters().iter().rev());
            }
        }
    }

    /// Applies single rewrites at positions picked by `choose` until irreducible.
    /// Used to test that the normal form does not depend on rewrite order.
    pub fn reduce_with_order<F: FnMut(usize) -> usize>(&self, w: &Word, mut choose: F) -> Word {
        let rules = self.rules();
        let mut cur = w.letters().to_vec();
        loop {
            let mut sites = Vec::new();
            for (ri, (lhs, _)) in rules.iter().enumerate() {
                let n = lhs.len();
                if n > cur.len() {
                    continue;
                }
                for p in 0..=cur.len() - n {
                    if &cur[p..p + n] == lhs.letters() {
                        sites.push((p, ri));
                    }
                }
            }
            if sites.is_empty() {
                return Word(cur);
            }
            let (p, ri) = sites[choose(sites.len()) % sites.len()];
            let (lhs, rhs) = &rules[ri];
            let mut next = cur[..p].to_vec();
            next.extend_from_slice(rhs.letters());
            next.extend_from_slice(&cur[p + lhs.len()..]);
            cur = next;
        }
    }

    /// Checks that every critical pair of the active rules is joinable.
    pub fn check_confluence(&self) -> bool {
        let rules = self.rules();
        for (l1, r1) in &rules {
            for (l2, r2) in &rules {
                for (a, b) in critical_pairs(l1, r1, l2, r2) {
                    if self.reduce(&a) != self.reduce(&b) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Overlap critical pairs of `l1 -> r1` followed by `l2 -> r2`, plus the
/// inclusion pair when `l2` occurs inside `l1`.
fn critical_pairs(l1: &Word, r1: &Word, l2: &Word, r2: &Word) -> Vec<(Word, Word)> {
    let a = l1.letters();
    let b = l2.letters();
    let mut out = Vec::new();
    for k in 1..a.len().min(b.len()) {
        if a[a.len() - k..] == b[..k] {
            let mut x = r1.letters().to_vec();
            x.extend_from_slice(&b[k..]);
            let mut y = a[..a.len() - k].to_vec();
            y.extend_from_slice(r2.letters());
            out.push((Word(x), Word(y)));
        }
    }
    if b.len() < a.len() || (b.len() == a.len() && a != b) {
        for p in 0..=a.len().saturating_sub(b.len()) {
            if b.len() <= a.len() && a[p..p + b.len()] == *b {
                let mut y = a[..p].to_vec();
                y.extend_from_slice(r2.letters());
                y.extend_from_slice(&a[p + b.len()..]);
                out.push((r1.clone(), Word(y)));
            }
        }
    }
    out
}

fn contains_subword(hay: &[Letter], needle: &[Letter]) -> bool {
    needle.len() <= hay.len() && hay.windows(needle.len()).any(|w| w == needle)
}

/// Knuth–Bendix completion with respect to shortlex over the generator order
/// `a < A < b < B < ...`. Free cancellation rules are always present.
pub fn knuth_bendix_complete(p: &GroupPresentation, budget: CompletionBudget) -> RewritingSystem {
    let rank = p.rank();
    let mut sys = RewritingSystem::empty(rank, budget);
    let mut pending: VecDeque<(Word, Word)> = VecDeque::new();
    for l in Letter::alphabet(rank) {
        pending.push_back((Word(vec![l, l.inv()]), Word::empty()));
    }
    for r in &p.relators {
        pending.push_back((r.clone(), Word::empty()));
    }

    let mut i = 0usize;
    loop {
        while let Some((u, v)) = pending.pop_front() {
            let u = sys.reduce(&u);
            let v = sys.reduce(&v);
            if u == v {
                continue;
            }
            let (lhs, rhs) = if shortlex_cmp(u.letters(), v.letters()).is_gt() {
                (u, v)
            } else {
                (v, u)
            };
            if lhs.len() > budget.max_rule_length {
                sys.exhausted = Some(format!("rule of length {} exceeds limit", lhs.len()));
                return sys;
            }
            if sys.rule_count() >= budget.max_rules {
                sys.exhausted = Some(format!("more than {} rules", budget.max_rules));
                return sys;
            }
            // interreduce: rules whose left side contains the new one go back to the queue
            for id in 0..sys.rules.len() {
                if sys.active[id] && contains_subword(sys.rules[id].0.letters(), lhs.letters()) {
                    let old = sys.rules[id].clone();
                    sys.deactivate(id);
                    pending.push_back(old);
                }
            }
            let id = sys.add_rule(lhs, rhs);
            for other in 0..sys.rules.len() {
                if other != id && sys.active[other] {
                    let rhs = sys.rules[other].1.clone();
                    sys.rules[other].1 = sys.reduce(&rhs);
                }
            }
        }

        if i >= sys.rules.len() {
            break;
        }
        if sys.active[i] {
            for j in 0..=i {
                if !sys.active[j] || !sys.active[i] {
                    continue;
                }
                let (l1, r1) = sys.rules[i].clone();
                let (l2, r2) = sys.rules[j].clone();
                pending.extend(critical_pairs(&l1, &r1, &l2, &r2));
                if i != j {
                    pending.extend(critical_pairs(&l2, &r2, &l1, &r1));
                }
            }
        }
        i += 1;
    }
    sys.confluent = sys.check_confluence();
    sys
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::word::Alphabet;

    fn z2() -> GroupPresentation {
        GroupPresentation::from_strs("z2", &["a", "b"], &["abAB"]).unwrap()
    }

    #[test]
    fn z2_completes_to_sorted_normal_forms() {
        let p = z2();
        let sys = knuth_bendix_complete(&p, CompletionBudget::default());
        assert!(sys.confluent);
        let al = p.alphabet();
        let nf = |s: &str| al.format(&sys.reduce(&al.parse_word(s).unwrap()));
        assert_eq!(nf("abaB"), "aa");
        assert_eq!(nf("BAba"), "");
        assert_eq!(nf("bAbA"), "AAbb");
        assert_eq!(nf("Ba"), "aB");
    }

    #[test]
    fn free_group_has_only_cancellation_rules() {
        let p = GroupPresentation::from_strs("f2", &["a", "b"], &[]).unwrap();
        let sys = knuth_bendix_complete(&p, CompletionBudget::default());
        assert!(sys.confluent);
        assert_eq!(sys.rule_count(), 4);
        assert!(sys.rules().iter().all(|(l, r)| l.len() == 2 && r.is_empty()));
    }

    #[test]
    fn tiny_budget_is_not_confluent() {
        let p = GroupPresentation::from_strs("s2", &["a", "b", "c", "d"], &["abABcdCD"]).unwrap();
        let sys = knuth_bendix_complete(
            &p,
            CompletionBudget {
                max_rules: 2,
                max_rule_length: 24,
            },
        );
        assert!(!sys.confluent);
        assert!(sys.exhausted.is_some());
    }

    #[test]
    fn normal_form_independent_of_rewrite_order() {
        use rand::{Rng, SeedableRng};
        let p = z2();
        let sys = knuth_bendix_complete(&p, CompletionBudget::default());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let al = Alphabet::from_strs(&["a", "b"]);
        for _ in 0..200 {
            let len = rng.gen_range(0..12);
            let w = Word((0..len).map(|_| Letter::from_code(rng.gen_range(0..4))).collect());
            let a = sys.reduce(&w);
            let b = sys.reduce_with_order(&w, |n| rng.gen_range(0..n));
            assert_eq!(a, b, "{}", al.format(&w));
        }
    }
}
