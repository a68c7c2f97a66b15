//! Group models: a generating set, an optional finite presentation, and a
//! word-problem strategy that yields states for Cayley graph enumeration.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::presentation::{DehnSolver, GroupPresentation};
use crate::rewriting::RewritingSystem;
use crate::word::{free_reduce, Alphabet, Letter, Word};

/// Hashable element state produced by a solver.
pub type State = Vec<i64>;

/// A normal-form oracle acting on states by right multiplication.
pub trait Oracle: Send + Sync + fmt::Debug {
    fn identity(&self) -> State;

    fn act(&self, s: &State, l: Letter) -> State;

    /// True when equal states are equal elements. Hash-style oracles return
    /// false and equality must then be confirmed by the word solver.
    fn faithful(&self) -> bool {
        true
    }

    /// A canonical word for the element, when the state determines one.
    fn canonical_word(&self, s: &State) -> Option<Word>;

    /// Exact word length, when a closed formula is known.
    fn word_length(&self, _s: &State) -> Option<u64> {
        None
    }

    /// Coordinates in a lattice, for abelian oracles.
    fn lattice_point(&self, _s: &State) -> Option<Vec<i64>> {
        None
    }

    fn describe(&self) -> String;
}

#[derive(Clone)]
pub enum WordSolver {
    Oracle(Arc<dyn Oracle>),
    Rewriting(Arc<RewritingSystem>),
    Dehn {
        dehn: Arc<DehnSolver>,
        hash: Option<Arc<dyn Oracle>>,
    },
}

impl fmt::Debug for WordSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.normal_form_kind())
    }
}

impl WordSolver {
    pub fn normal_form_kind(&self) -> String {
        match self {
            WordSolver::Oracle(o) => format!("oracle: {}", o.describe()),
            WordSolver::Rewriting(r) => format!(
                "rewriting: shortlex normal form ({} rules, confluent={})",
                r.rule_count(),
                r.confluent
            ),
            WordSolver::Dehn { .. } => "dehn: greedy leftmost-longest reduced word".to_string(),
        }
    }

    pub fn normal_form(&self, rank: usize, w: &Word) -> Result<Word> {
        match self {
            WordSolver::Oracle(o) => {
                let mut s = o.identity();
                for &l in w.letters() {
                    s = o.act(&s, l);
                }
                o.canonical_word(&s).ok_or_else(|| {
                    Error::Precondition("oracle has no canonical words".into())
                })
            }
            WordSolver::Rewriting(r) => {
                if !r.confluent {
                    return Err(Error::NotConfluent);
                }
                debug_assert_eq!(r.rank(), rank);
                Ok(r.reduce(w))
            }
            WordSolver::Dehn { dehn, .. } => Ok(dehn.reduce(w)),
        }
    }

    pub fn is_trivial(&self, w: &Word) -> Result<bool> {
        match self {
            WordSolver::Oracle(o) => {
                let mut s = o.identity();
                for &l in w.letters() {
                    s = o.act(&s, l);
                }
                if o.faithful() {
                    Ok(s == o.identity())
                } else {
                    Err(Error::Precondition("hash oracle cannot decide triviality".into()))
                }
            }
            WordSolver::Rewriting(r) => {
                if !r.confluent {
                    return Err(Error::NotConfluent);
                }
                Ok(r.reduce(w).is_empty())
            }
            WordSolver::Dehn { dehn, .. } => Ok(dehn.is_trivial(w)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelMeta {
    pub one_ended: bool,
    pub finitely_presented: bool,
    pub sci_candidate: bool,
    pub hyperbolic: bool,
}

#[derive(Clone, Debug)]
pub struct GroupModel {
    pub name: String,
    pub generators: Vec<String>,
    presentation: Option<GroupPresentation>,
    pub solver: WordSolver,
    pub meta: ModelMeta,
}

impl GroupModel {
    pub fn new(
        name: &str,
        generators: Vec<String>,
        presentation: Option<GroupPresentation>,
        solver: WordSolver,
        meta: ModelMeta,
    ) -> GroupModel {
        GroupModel {
            name: name.to_string(),
            generators,
            presentation,
            solver,
            meta,
        }
    }

    /// Model backed by Knuth–Bendix completion of a parsed presentation.
    pub fn from_rewriting(p: GroupPresentation, sys: RewritingSystem, meta: ModelMeta) -> GroupModel {
        GroupModel {
            name: p.name.clone(),
            generators: p.generators.clone(),
            presentation: Some(p),
            solver: WordSolver::Rewriting(Arc::new(sys)),
            meta,
        }
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn alphabet(&self) -> Alphabet {
        Alphabet::new(self.generators.clone())
    }

    pub fn format(&self, w: &Word) -> String {
        self.alphabet().format(w)
    }

    pub fn parse_word(&self, s: &str) -> Result<Word> {
        self.alphabet().parse_word(s).map_err(|e| Error::Syntax {
            line: 1,
            column: match e {
                crate::word::WordParseError::UnknownSymbol { column, .. } => column,
                crate::word::WordParseError::BadExponent { column } => column,
            },
            message: e.to_string(),
        })
    }

    /// The finite presentation; lamplighter-style models have none.
    pub fn presentation(&self) -> Result<&GroupPresentation> {
        self.presentation
            .as_ref()
            .ok_or_else(|| Error::NotFinitelyPresented(self.name.clone()))
    }

    pub fn has_presentation(&self) -> bool {
        self.presentation.is_some()
    }

    pub fn normal_form(&self, w: &Word) -> Result<Word> {
        self.solver.normal_form(self.rank(), w)
    }

    pub fn is_trivial(&self, w: &Word) -> Result<bool> {
        self.solver.is_trivial(w)
    }

    pub fn equal(&self, u: &Word, v: &Word) -> Result<bool> {
        self.is_trivial(&free_reduce(&u.inverse().concat(v)))
    }

    pub fn identity_state(&self) -> State {
        match &self.solver {
            WordSolver::Oracle(o) => o.identity(),
            WordSolver::Rewriting(_) => Vec::new(),
            WordSolver::Dehn { hash: Some(h), .. } => h.identity(),
            WordSolver::Dehn { hash: None, .. } => Vec::new(),
        }
    }

    pub fn act(&self, s: &State, l: Letter) -> State {
        match &self.solver {
            WordSolver::Oracle(o) => o.act(s, l),
            WordSolver::Rewriting(r) => {
                let mut stack: Vec<Letter> = s.iter().map(|&c| Letter::from_code(c as usize)).collect();
                r.reduce_onto(&mut stack, &[l]);
                stack.into_iter().map(|l| l.code() as i64).collect()
            }
            WordSolver::Dehn { hash: Some(h), .. } => h.act(s, l),
            WordSolver::Dehn { hash: None, .. } => Vec::new(),
        }
    }

    pub fn state_of(&self, w: &Word) -> State {
        let mut s = self.identity_state();
        for &l in w.letters() {
            s = self.act(&s, l);
        }
        s
    }

    /// Equal states are equal elements (no confirmation needed).
    pub fn states_faithful(&self) -> bool {
        match &self.solver {
            WordSolver::Oracle(o) => o.faithful(),
            WordSolver::Rewriting(r) => r.confluent,
            WordSolver::Dehn { .. } => false,
        }
    }

    /// Confirms equality of two words when states are not faithful.
    pub fn confirm_equal(&self, u: &Word, v: &Word) -> bool {
        match &self.solver {
            WordSolver::Dehn { dehn, .. } => dehn.is_trivial(&u.inverse().concat(v)),
            _ => self.equal(u, v).unwrap_or(false),
        }
    }

    pub fn exact_length(&self, s: &State) -> Option<u64> {
        match &self.solver {
            WordSolver::Oracle(o) => o.word_length(s),
            WordSolver::Rewriting(r) if r.confluent => Some(s.len() as u64),
            _ => None,
        }
    }

    pub fn lattice_point(&self, s: &State) -> Option<Vec<i64>> {
        match &self.solver {
            WordSolver::Oracle(o) => o.lattice_point(s),
            _ => None,
        }
    }

    /// Whether ball enumeration is possible (states exist and can be confirmed).
    pub fn can_enumerate(&self) -> bool {
        match &self.solver {
            WordSolver::Oracle(_) => true,
            WordSolver::Rewriting(r) => r.confluent,
            WordSolver::Dehn { hash, .. } => hash.is_some(),
        }
    }
}
