//! Amalgamated free products and HNN extensions: syllable forms, pinches,
//! Britton reduction and the loop shortening step.
//!
//! HNN relations are read as `c_j = t^-1 a_j t` with `a_j` generating `H`
//! and `c_j` generating `K`, so `t^-1 h t` rewrites to a `K`-word.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::cayley::{CayleyBall, CayleyComplexBall};
use crate::error::{Error, Result};
use crate::filling::{fill_outside, FillBudget, FillResult, Loop};
use crate::model::{GroupModel, ModelMeta, WordSolver};
use crate::presentation::GroupPresentation;
use crate::rewriting::{knuth_bendix_complete, CompletionBudget};
use crate::word::{free_reduce, Letter, Word};
use crate::zoo::{self, AbelianOracle};

/// Decides membership in a subgroup and writes members in its generators.
pub trait SubgroupOracle: Send + Sync {
    /// Exponents over the subgroup generators, `None` for non-members.
    fn express(&self, ambient: &GroupModel, w: &Word) -> Option<Vec<i64>>;
    fn describe(&self) -> String;
}

/// Subgroup of a free abelian group spanned by independent vectors.
pub struct LatticeSubgroup {
    vectors: Vec<Vec<i64>>,
}

impl SubgroupOracle for LatticeSubgroup {
    fn express(&self, ambient: &GroupModel, w: &Word) -> Option<Vec<i64>> {
        let x = ambient.lattice_point(&ambient.state_of(w))?;
        solve_integer(&self.vectors, &x)
    }

    fn describe(&self) -> String {
        format!("lattice span of {:?}", self.vectors)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Q {
    n: i128,
    d: i128,
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Q {
    fn int(n: i64) -> Q {
        Q { n: n as i128, d: 1 }
    }

    fn norm(n: i128, d: i128) -> Q {
        let g = gcd(n, d).max(1) * d.signum();
        Q { n: n / g, d: d / g }
    }

    fn sub(self, o: Q) -> Q {
        Q::norm(self.n * o.d - o.n * self.d, self.d * o.d)
    }

    fn mul(self, o: Q) -> Q {
        Q::norm(self.n * o.n, self.d * o.d)
    }

    fn div(self, o: Q) -> Q {
        Q::norm(self.n * o.d, self.d * o.n)
    }
}

/// Integer solution `e` of `Σ e_j v_j = x`, if one exists. Columns must be
/// linearly independent.
fn solve_integer(vectors: &[Vec<i64>], x: &[i64]) -> Option<Vec<i64>> {
    let m = vectors.len();
    let d = x.len();
    let mut a: Vec<Vec<Q>> = (0..d)
        .map(|i| {
            let mut row: Vec<Q> = vectors.iter().map(|v| Q::int(v[i])).collect();
            row.push(Q::int(x[i]));
            row
        })
        .collect();
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..m {
        let Some(p) = (row..d).find(|&i| a[i][col].n != 0) else {
            return None;
        };
        a.swap(row, p);
        for i in 0..d {
            if i != row && a[i][col].n != 0 {
                let f = a[i][col].div(a[row][col]);
                for j in col..=m {
                    let t = a[row][j].mul(f);
                    a[i][j] = a[i][j].sub(t);
                }
            }
        }
        pivots.push(row);
        row += 1;
    }
    if a[row..].iter().any(|r| r[m].n != 0) {
        return None;
    }
    let mut out = Vec::with_capacity(m);
    for (col, &r) in pivots.iter().enumerate() {
        let q = a[r][m].div(a[r][col]);
        if q.d != 1 {
            return None;
        }
        out.push(q.n as i64);
    }
    Some(out)
}

fn rank_of(vectors: &[Vec<i64>], d: usize) -> usize {
    let mut rows: Vec<Vec<Q>> = vectors.iter().map(|v| v.iter().map(|&x| Q::int(x)).collect()).collect();
    let mut rank = 0;
    for col in 0..d {
        let Some(p) = (rank..rows.len()).find(|&i| rows[i][col].n != 0) else {
            continue;
        };
        rows.swap(rank, p);
        for i in rank + 1..rows.len() {
            let f = rows[i][col].div(rows[rank][col]);
            for j in col..d {
                let t = rows[rank][j].mul(f);
                rows[i][j] = rows[i][j].sub(t);
            }
        }
        rank += 1;
    }
    rank
}

/// Free abelian group on the given generator names.
pub fn free_abelian(names: &[&str]) -> GroupModel {
    let d = names.len();
    let mut rels = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            rels.push(Word(vec![Letter::gen(i), Letter::gen(j), Letter::gen_inv(i), Letter::gen_inv(j)]));
        }
    }
    let name = format!("Z<{}>", names.join(","));
    let p = GroupPresentation::new(&name, names, rels);
    GroupModel::new(
        &name,
        names.iter().map(|s| s.to_string()).collect(),
        Some(p),
        WordSolver::Oracle(Arc::new(AbelianOracle::standard(d))),
        ModelMeta {
            one_ended: d >= 2,
            finitely_presented: true,
            sci_candidate: d >= 3,
            hyperbolic: d <= 1,
        },
    )
}

#[derive(Clone)]
pub struct SubgroupEmbedding {
    pub ambient: GroupModel,
    pub generators: Vec<Word>,
    pub oracle: Arc<dyn SubgroupOracle>,
    pub one_ended: bool,
}

impl fmt::Debug for SubgroupEmbedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self.generators.iter().map(|g| self.ambient.format(g)).collect();
        write!(f, "<{}> in {} ({})", gens.join(", "), self.ambient.name, self.oracle.describe())
    }
}

impl SubgroupEmbedding {
    /// Subgroup of a free abelian model; generators must be independent.
    pub fn lattice(ambient: &GroupModel, generators: Vec<Word>) -> Result<SubgroupEmbedding> {
        let id = ambient.identity_state();
        let d = ambient
            .lattice_point(&id)
            .ok_or_else(|| Error::Precondition(format!("{} has no lattice coordinates", ambient.name)))?
            .len();
        let vectors: Vec<Vec<i64>> = generators
            .iter()
            .map(|g| ambient.lattice_point(&ambient.state_of(g)).expect("lattice model"))
            .collect();
        if generators.is_empty() || rank_of(&vectors, d) < vectors.len() {
            return Err(Error::Precondition("subgroup generators must be nonempty and independent".into()));
        }
        let e = SubgroupEmbedding {
            one_ended: vectors.len() >= 2,
            ambient: ambient.clone(),
            generators,
            oracle: Arc::new(LatticeSubgroup { vectors }),
        };
        e.check()?;
        Ok(e)
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn contains(&self, w: &Word) -> bool {
        self.oracle.express(&self.ambient, w).is_some()
    }

    pub fn express(&self, w: &Word) -> Option<Vec<i64>> {
        self.oracle.express(&self.ambient, w)
    }

    /// The ambient word `Π g_j^{e_j}`.
    pub fn evaluate(&self, e: &[i64]) -> Word {
        let mut out = Word::empty();
        for (g, &k) in self.generators.iter().zip(e) {
            out = out.concat(&g.pow(k));
        }
        out
    }

    pub fn check(&self) -> Result<()> {
        for g in &self.generators {
            let e = self
                .express(g)
                .ok_or_else(|| Error::UnsoundOracle("subgroup generator fails membership".into()))?;
            if !self.ambient.equal(&self.evaluate(&e), g)? {
                return Err(Error::UnsoundOracle("expression does not re-evaluate".into()));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Syllable {
    pub factor: usize,
    /// Letters of the ambient alphabet.
    pub word: Word,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SyllableWord {
    /// `a_1 a_2 ... a_n` with consecutive syllables in different factors.
    Amalgam { syllables: Vec<Syllable> },
    /// `g_0 t^{i_1} g_1 ... t^{i_n} g_n` with every `i_j` nonzero.
    Hnn { g: Vec<Word>, t: Vec<i64> },
}

impl SyllableWord {
    pub fn syllable_length(&self) -> usize {
        match self {
            SyllableWord::Amalgam { syllables } => syllables.len(),
            SyllableWord::Hnn { t, .. } => t.len(),
        }
    }

    pub fn t_weight(&self) -> u64 {
        match self {
            SyllableWord::Amalgam { .. } => 0,
            SyllableWord::Hnn { t, .. } => t.iter().map(|i| i.unsigned_abs()).sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            SyllableWord::Amalgam { syllables } => syllables.iter().all(|s| s.word.is_empty()),
            SyllableWord::Hnn { g, t } => t.is_empty() && g.iter().all(|w| w.is_empty()),
        }
    }
}

/// `G_1 *_H G_2` with both factors free abelian.
#[derive(Clone, Debug)]
pub struct AmalgamModel {
    pub factors: [GroupModel; 2],
    pub embeddings: [SubgroupEmbedding; 2],
    /// The product itself with generators of the first factor then the second.
    pub ambient: Option<GroupModel>,
    pub presentation: GroupPresentation,
}

fn shift_word(w: &Word, by: usize) -> Word {
    Word(
        w.0.iter()
            .map(|l| Letter::from_code(l.code() + 2 * by))
            .collect(),
    )
}

fn unshift_word(w: &Word, by: usize) -> Word {
    Word(
        w.0.iter()
            .map(|l| Letter::from_code(l.code() - 2 * by))
            .collect(),
    )
}

fn commutators(rank: usize, offset: usize) -> Vec<Word> {
    let mut rels = Vec::new();
    for i in 0..rank {
        for j in i + 1..rank {
            rels.push(Word(vec![
                Letter::gen(i + offset),
                Letter::gen(j + offset),
                Letter::gen_inv(i + offset),
                Letter::gen_inv(j + offset),
            ]));
        }
    }
    rels
}

fn complete(p: &GroupPresentation, one_ended: bool) -> Option<GroupModel> {
    let sys = knuth_bendix_complete(p, CompletionBudget::default());
    sys.confluent.then(|| {
        GroupModel::from_rewriting(
            p.clone(),
            sys,
            ModelMeta {
                one_ended,
                finitely_presented: true,
                sci_candidate: false,
                hyperbolic: false,
            },
        )
    })
}

impl AmalgamModel {
    pub fn new(
        g1: GroupModel,
        g2: GroupModel,
        h1: Vec<Word>,
        h2: Vec<Word>,
        ambient: Option<GroupModel>,
    ) -> Result<AmalgamModel> {
        if h1.len() != h2.len() {
            return Err(Error::Precondition("identified subgroups need the same number of generators".into()));
        }
        let e1 = SubgroupEmbedding::lattice(&g1, h1)?;
        let e2 = SubgroupEmbedding::lattice(&g2, h2)?;
        let names: Vec<String> = g1.generators.iter().chain(&g2.generators).cloned().collect();
        let strs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let mut rels = commutators(g1.rank(), 0);
        rels.extend(commutators(g2.rank(), g1.rank()));
        for (a, b) in e1.generators.iter().zip(&e2.generators) {
            rels.push(free_reduce(&a.concat(&shift_word(b, g1.rank()).inverse())));
        }
        let p = GroupPresentation::new(&format!("{} *_H {}", g1.name, g2.name), &strs, rels);
        if let Some(a) = &ambient {
            if a.generators != names {
                return Err(Error::Precondition(format!(
                    "ambient generators {:?} must be {:?}",
                    a.generators, names
                )));
            }
        }
        let ambient = match ambient {
            Some(a) => Some(a),
            None => complete(&p, e1.one_ended),
        };
        Ok(AmalgamModel {
            factors: [g1, g2],
            embeddings: [e1, e2],
            ambient,
            presentation: p,
        })
    }

    /// `Z *_Z Z` with `x^2 = y^3`.
    pub fn trefoil() -> AmalgamModel {
        let g1 = free_abelian(&["x"]);
        let g2 = free_abelian(&["y"]);
        let h1 = vec![g1.parse_word("xx").unwrap()];
        let h2 = vec![g2.parse_word("yyy").unwrap()];
        AmalgamModel::new(g1, g2, h1, h2, Some(zoo::trefoil())).expect("static amalgam")
    }

    pub fn one_ended_h(&self) -> bool {
        self.embeddings[0].one_ended
    }

    fn offset(&self, f: usize) -> usize {
        if f == 0 {
            0
        } else {
            self.factors[0].rank()
        }
    }

    pub fn factor_of(&self, l: Letter) -> usize {
        usize::from(l.generator() >= self.factors[0].rank())
    }

    pub fn local(&self, f: usize, w: &Word) -> Word {
        unshift_word(w, self.offset(f))
    }

    pub fn global(&self, f: usize, w: &Word) -> Word {
        shift_word(w, self.offset(f))
    }

    pub fn alphabet_names(&self) -> Vec<String> {
        self.presentation.generators.clone()
    }

    pub fn parse(&self, text: &str) -> Result<Word> {
        self.presentation.parse_word(text)
    }

    pub fn format(&self, w: &Word) -> String {
        self.presentation.format(w)
    }

    /// Maximal runs of letters from one factor.
    pub fn syllables(&self, w: &Word) -> SyllableWord {
        let mut out: Vec<Syllable> = Vec::new();
        for &l in w.letters() {
            let f = self.factor_of(l);
            match out.last_mut() {
                Some(s) if s.factor == f => s.word.push(l),
                _ => out.push(Syllable {
                    factor: f,
                    word: Word(vec![l]),
                }),
            }
        }
        SyllableWord::Amalgam { syllables: out }
    }

    pub fn in_h(&self, s: &Syllable) -> bool {
        self.embeddings[s.factor].contains(&self.local(s.factor, &s.word))
    }

    /// The other factor's word for an `H`-syllable.
    pub fn image(&self, s: &Syllable) -> Result<Word> {
        let e = self.embeddings[s.factor]
            .express(&self.local(s.factor, &s.word))
            .ok_or_else(|| Error::Precondition("syllable is not in H".into()))?;
        let o = 1 - s.factor;
        Ok(self.global(o, &self.embeddings[o].evaluate(&e)))
    }

    /// Parses `w_1 | w_2 | ...` in the ambient alphabet.
    pub fn parse_syllables(&self, text: &str) -> Result<SyllableWord> {
        let mut w = Word::empty();
        for piece in text.split('|') {
            w = w.concat(&self.parse(piece)?);
        }
        Ok(self.syllables(&w))
    }

    pub fn format_syllables(&self, sw: &SyllableWord) -> String {
        match sw {
            SyllableWord::Amalgam { syllables } => {
                let parts: Vec<String> = syllables.iter().map(|s| self.format(&s.word)).collect();
                parts.join(" | ")
            }
            SyllableWord::Hnn { .. } => String::new(),
        }
    }
}

/// Least index of a syllable lying in `H`.
pub fn amalgam_pinch(m: &AmalgamModel, w: &SyllableWord) -> Result<usize> {
    let SyllableWord::Amalgam { syllables } = w else {
        return Err(Error::Precondition("expected an amalgam syllable word".into()));
    };
    if syllables.is_empty() {
        return Err(Error::Precondition("syllable length must be at least 1".into()));
    }
    if let Some(a) = &m.ambient {
        let word = Word(syllables.iter().flat_map(|s| s.word.0.iter().copied()).collect());
        if !a.is_trivial(&word)? {
            return Err(Error::Precondition("word is not trivial in the amalgam".into()));
        }
    }
    syllables
        .iter()
        .position(|s| m.in_h(s))
        .ok_or_else(|| Error::NotFound("no syllable lies in H".into()))
}

/// `G *_H` with stable letter `t` and `t^-1 a_j t = c_j`.
#[derive(Clone, Debug)]
pub struct HnnModel {
    pub base: GroupModel,
    pub h: SubgroupEmbedding,
    pub k: SubgroupEmbedding,
    pub stable: String,
    /// The extension with the base generators then `t`.
    pub ambient: Option<GroupModel>,
    pub presentation: GroupPresentation,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PinchKind {
    /// `t^-1 g t` with `g` in `H`.
    HToK,
    /// `t g t^-1` with `g` in `K`.
    KToH,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrittonStep {
    pub index: usize,
    pub kind: PinchKind,
    pub weight_before: u64,
    pub weight_after: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrittonRun {
    pub input: SyllableWord,
    pub result: SyllableWord,
    pub steps: Vec<BrittonStep>,
}

impl HnnModel {
    pub fn new(base: GroupModel, h: Vec<Word>, k: Vec<Word>, stable: &str, ambient: Option<GroupModel>) -> Result<HnnModel> {
        if h.len() != k.len() {
            return Err(Error::Precondition("H and K need the same number of generators".into()));
        }
        let eh = SubgroupEmbedding::lattice(&base, h)?;
        let ek = SubgroupEmbedding::lattice(&base, k)?;
        let mut names = base.generators.clone();
        if names.iter().any(|n| n == stable) {
            return Err(Error::DuplicateGenerator(stable.into()));
        }
        names.push(stable.into());
        let strs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
        let t = base.rank();
        let mut rels = commutators(t, 0);
        for (a, c) in eh.generators.iter().zip(&ek.generators) {
            let w = Word(vec![Letter::gen_inv(t)])
                .concat(a)
                .concat(&Word(vec![Letter::gen(t)]))
                .concat(&c.inverse());
            rels.push(free_reduce(&w));
        }
        let p = GroupPresentation::new(&format!("{} *_H", base.name), &strs, rels);
        if let Some(a) = &ambient {
            if a.generators != names {
                return Err(Error::Precondition(format!(
                    "ambient generators {:?} must be {:?}",
                    a.generators, names
                )));
            }
        }
        let ambient = match ambient {
            Some(a) => Some(a),
            None => complete(&p, eh.one_ended),
        };
        Ok(HnnModel {
            base,
            h: eh,
            k: ek,
            stable: stable.into(),
            ambient,
            presentation: p,
        })
    }

    /// `BS(1,2)`: `t^-1 a t = a^2`.
    pub fn bs12() -> HnnModel {
        let base = free_abelian(&["a"]);
        let h = vec![base.parse_word("a").unwrap()];
        let k = vec![base.parse_word("aa").unwrap()];
        HnnModel::new(base, h, k, "t", Some(zoo::bs12())).expect("static extension")
    }

    pub fn one_ended_h(&self) -> bool {
        self.h.one_ended
    }

    fn t(&self) -> usize {
        self.base.rank()
    }

    pub fn parse(&self, text: &str) -> Result<Word> {
        self.presentation.parse_word(text)
    }

    pub fn format(&self, w: &Word) -> String {
        self.presentation.format(w)
    }

    /// Splits at runs of same-sign stable letters; base syllables are kept
    /// letter for letter.
    pub fn syllables(&self, w: &Word) -> SyllableWord {
        let t = self.t();
        let mut g = vec![Word::empty()];
        let mut ts: Vec<i64> = Vec::new();
        let mut last_t = false;
        for &l in w.letters() {
            if l.generator() == t {
                let s = if l.is_inverse() { -1 } else { 1 };
                match ts.last_mut() {
                    Some(e) if last_t && e.signum() == s => *e += s,
                    _ => {
                        ts.push(s);
                        g.push(Word::empty());
                    }
                }
                last_t = true;
            } else {
                g.last_mut().unwrap().push(l);
                last_t = false;
            }
        }
        SyllableWord::Hnn { g, t: ts }
    }

    pub fn to_word(&self, sw: &SyllableWord) -> Word {
        match sw {
            SyllableWord::Hnn { g, t } => {
                let mut out = g[0].clone();
                for (i, &e) in t.iter().enumerate() {
                    out = out.concat(&Word(vec![Letter::gen(self.t())]).pow(e)).concat(&g[i + 1]);
                }
                out
            }
            SyllableWord::Amalgam { syllables } => Word(syllables.iter().flat_map(|s| s.word.0.clone()).collect()),
        }
    }

    /// Parses `g0 | t^2 | g1 | ...`.
    pub fn parse_syllables(&self, text: &str) -> Result<SyllableWord> {
        let mut w = Word::empty();
        for piece in text.split('|') {
            w = w.concat(&self.parse(piece)?);
        }
        Ok(self.syllables(&w))
    }

    pub fn format_syllables(&self, sw: &SyllableWord) -> String {
        let SyllableWord::Hnn { g, t } = sw else {
            return String::new();
        };
        let base = |w: &Word| if w.is_empty() { "1".to_string() } else { self.format(w) };
        let mut parts = vec![base(&g[0])];
        for (i, &e) in t.iter().enumerate() {
            parts.push(format!("{}^{e}", self.stable));
            parts.push(base(&g[i + 1]));
        }
        parts.join(" | ")
    }

    fn normalize(&self, w: &Word) -> Result<Word> {
        self.base.normal_form(w)
    }

    /// Image of `t^-1 g t` for `g` in `H`.
    pub fn phi(&self, g: &Word) -> Result<Option<Word>> {
        let Some(e) = self.h.express(g) else {
            return Ok(None);
        };
        let img = self.k.evaluate(&e);
        if !self.k.contains(&img) {
            return Err(Error::UnsoundOracle("image fails K-membership".into()));
        }
        Ok(Some(img))
    }

    /// Image of `t g t^-1` for `g` in `K`.
    pub fn phi_inv(&self, g: &Word) -> Result<Option<Word>> {
        let Some(e) = self.k.express(g) else {
            return Ok(None);
        };
        let img = self.h.evaluate(&e);
        if !self.h.contains(&img) {
            return Err(Error::UnsoundOracle("image fails H-membership".into()));
        }
        Ok(Some(img))
    }

    /// Least interior base syllable `g_k` forming a pinch with its neighbours.
    pub fn find_pinch(&self, g: &[Word], t: &[i64]) -> Option<(usize, PinchKind)> {
        (1..g.len().saturating_sub(1)).find_map(|k| {
            let (a, b) = (t[k - 1], t[k]);
            if a < 0 && b > 0 && self.h.contains(&g[k]) {
                Some((k, PinchKind::HToK))
            } else if a > 0 && b < 0 && self.k.contains(&g[k]) {
                Some((k, PinchKind::KToH))
            } else {
                None
            }
        })
    }
}

/// Removes pinches until none remain.
pub fn britton_reduce(m: &HnnModel, w: &SyllableWord) -> Result<BrittonRun> {
    let SyllableWord::Hnn { g, t } = w else {
        return Err(Error::Precondition("expected an HNN syllable word".into()));
    };
    let mut g: Vec<Word> = g.iter().map(|x| m.normalize(x)).collect::<Result<_>>()?;
    let mut t = t.clone();
    let mut steps = Vec::new();
    while let Some((k, kind)) = m.find_pinch(&g, &t) {
        let before: u64 = t.iter().map(|i| i.unsigned_abs()).sum();
        let img = match kind {
            PinchKind::HToK => m.phi(&g[k])?,
            PinchKind::KToH => m.phi_inv(&g[k])?,
        }
        .expect("pinch was detected by membership");
        g[k] = m.normalize(&img)?;
        let s = if kind == PinchKind::HToK { 1 } else { -1 };
        t[k - 1] += s;
        t[k] -= s;
        if t[k] == 0 {
            let right = g.remove(k + 1);
            g[k] = m.normalize(&g[k].concat(&right))?;
            t.remove(k);
        }
        if t[k - 1] == 0 {
            let mid = g.remove(k);
            g[k - 1] = m.normalize(&g[k - 1].concat(&mid))?;
            t.remove(k - 1);
        }
        let after: u64 = t.iter().map(|i| i.unsigned_abs()).sum();
        steps.push(BrittonStep {
            index: k,
            kind,
            weight_before: before,
            weight_after: after,
        });
    }
    Ok(BrittonRun {
        input: w.clone(),
        result: SyllableWord::Hnn { g, t },
        steps,
    })
}

#[derive(Clone, Copy, Debug)]
pub enum Combination<'a> {
    Amalgam(&'a AmalgamModel),
    Hnn(&'a HnnModel),
}

impl Combination<'_> {
    pub fn ambient(&self) -> Option<&GroupModel> {
        match self {
            Combination::Amalgam(m) => m.ambient.as_ref(),
            Combination::Hnn(m) => m.ambient.as_ref(),
        }
    }

    pub fn one_ended_h(&self) -> bool {
        match self {
            Combination::Amalgam(m) => m.one_ended_h(),
            Combination::Hnn(m) => m.one_ended_h(),
        }
    }

    /// Syllable length for amalgams, t-weight for HNN extensions.
    pub fn complexity(&self, w: &Word) -> u64 {
        match self {
            Combination::Amalgam(m) => m.syllables(w).syllable_length() as u64,
            Combination::Hnn(m) => m.syllables(w).t_weight(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShortenParams {
    pub c: u32,
    pub c1: u32,
    pub budget: FillBudget,
    /// Cap on subgroup-copy vertices visited by the path search.
    pub max_copy_vertices: usize,
}

impl Default for ShortenParams {
    fn default() -> Self {
        ShortenParams {
            c: 1,
            c1: 2,
            budget: FillBudget::default(),
            max_copy_vertices: 200_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShortenCertificate {
    pub pinch: usize,
    /// Letter range of the pinched subpath in the old loop word.
    pub start: usize,
    pub end: usize,
    /// Path inside the subgroup copy, as ball vertices.
    pub path: Vec<u32>,
    pub path_word: Word,
    /// Ambient words of the subgroup generators used for steps of `path`.
    pub copy_generators: Vec<Word>,
    pub path_min_dist: u32,
    /// The pinched subpath followed by the path backwards.
    pub subloop: Loop,
    pub fill: Option<FillResult>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShortenStep {
    pub before: Loop,
    pub after: Loop,
    pub complexity_before: u64,
    pub complexity_after: u64,
    pub certificate: Option<ShortenCertificate>,
    pub label: String,
}

/// Path from `u` to `v` through the coset copy reached by subgroup generator
/// steps, every vertex at distance above `floor`.
fn copy_path(b: &CayleyBall, u: u32, v: u32, gens: &[Word], floor: u32, cap: usize) -> Option<(Vec<u32>, Word)> {
    let steps: Vec<Word> = gens.iter().flat_map(|g| [g.clone(), g.inverse()]).collect();
    let walk = |x: u32, s: &Word| -> Option<Vec<u32>> {
        let mut out = Vec::with_capacity(s.len());
        let mut cur = x;
        for &l in s.letters() {
            cur = b.neighbor(cur, l)?;
            if b.dist(cur) <= floor {
                return None;
            }
            out.push(cur);
        }
        Some(out)
    };
    let mut prev: HashMap<u32, (u32, usize)> = HashMap::new();
    prev.insert(u, (u, usize::MAX));
    let mut q = VecDeque::from([u]);
    while let Some(x) = q.pop_front() {
        if x == v {
            break;
        }
        for (i, s) in steps.iter().enumerate() {
            if let Some(p) = walk(x, s) {
                let y = *p.last().unwrap_or(&x);
                if !prev.contains_key(&y) && prev.len() < cap {
                    prev.insert(y, (x, i));
                    q.push_back(y);
                }
            }
        }
    }
    prev.get(&v)?;
    let mut chain = Vec::new();
    let mut cur = v;
    while cur != u {
        let (p, i) = prev[&cur];
        chain.push(i);
        cur = p;
    }
    chain.reverse();
    let mut verts = vec![u];
    let mut word = Word::empty();
    for i in chain {
        let last = *verts.last().unwrap();
        verts.extend(walk(last, &steps[i]).expect("walk was valid during search"));
        word = word.concat(&steps[i]);
    }
    Some((verts, word))
}

/// One step of the shortening procedure: replace the least pinched subpath
/// by a path in the matching subgroup copy avoiding `B(c r)`.
pub fn shorten_loop(m: Combination, c2: &CayleyComplexBall, l: &Loop, r: u32, params: &ShortenParams) -> Result<ShortenStep> {
    let b = &c2.ball;
    let ambient = m
        .ambient()
        .ok_or_else(|| Error::Precondition("combination has no ambient word solver".into()))?;
    if b.model.generators != ambient.generators {
        return Err(Error::Precondition("ball generators differ from the combination's".into()));
    }
    if l.min_dist <= params.c1 * r {
        return Err(Error::Precondition(format!(
            "loop reaches distance {} but must stay above c1 r = {}",
            l.min_dist,
            params.c1 * r
        )));
    }
    let label = if m.one_ended_h() {
        "one-ended H".to_string()
    } else {
        "machinery only".to_string()
    };
    let before = m.complexity(&l.word);
    let unchanged = |label: String| ShortenStep {
        before: l.clone(),
        after: l.clone(),
        complexity_before: before,
        complexity_after: before,
        certificate: None,
        label,
    };
    // (pinch index, letter range, subgroup generators of the copy)
    let (pinch, start, end, gens) = match m {
        Combination::Amalgam(am) => {
            let SyllableWord::Amalgam { syllables } = am.syllables(&l.word) else {
                unreachable!()
            };
            if syllables.len() <= 1 {
                return Ok(unchanged(label));
            }
            let i = syllables
                .iter()
                .position(|s| am.in_h(s))
                .ok_or_else(|| Error::NotFound("no syllable lies in H; the loop is not trivial".into()))?;
            let start: usize = syllables[..i].iter().map(|s| s.word.len()).sum();
            let o = 1 - syllables[i].factor;
            let gens: Vec<Word> = am.embeddings[o].generators.iter().map(|g| am.global(o, g)).collect();
            (i, start, start + syllables[i].word.len(), gens)
        }
        Combination::Hnn(hm) => {
            let SyllableWord::Hnn { g, t } = hm.syllables(&l.word) else {
                unreachable!()
            };
            if t.is_empty() {
                return Ok(unchanged(label));
            }
            let (k, kind) = hm
                .find_pinch(&g, &t)
                .ok_or_else(|| Error::NotFound("no pinch; the loop is not trivial".into()))?;
            let mut pos = 0;
            for j in 0..k {
                pos += g[j].len() + t[j].unsigned_abs() as usize;
            }
            let start = pos - 1;
            let end = pos + g[k].len() + 1;
            let target = match kind {
                PinchKind::HToK => &hm.k,
                PinchKind::KToH => &hm.h,
            };
            (k, start, end, target.generators.clone())
        }
    };
    let verts = l.vertices(b);
    let (u, v) = (verts[start], verts[end]);
    let floor = params.c * r;
    let (path, path_word) = copy_path(b, u, v, &gens, floor, params.max_copy_vertices).ok_or_else(|| {
        Error::NotFound(format!(
            "no path inside the subgroup copy outside B({floor}); enlarge the window beyond R = {}",
            b.radius()
        ))
    })?;
    let mut new_word = Word(l.word.0[..start].to_vec());
    new_word = new_word.concat(&path_word).concat(&Word(l.word.0[end..].to_vec()));
    let after = Loop::new(b, l.base, new_word)?;
    let sub = Word(l.word.0[start..end].to_vec()).concat(&path_word.inverse());
    let subloop = Loop::new(b, u, sub)?;
    let fill = if subloop.min_dist > r && params.budget.max_expansions > 0 {
        Some(fill_outside(c2, &subloop, r, &params.budget)?)
    } else {
        None
    };
    let complexity_after = m.complexity(&after.word);
    if complexity_after >= before {
        return Err(Error::UnsoundOracle(format!(
            "complexity did not drop ({before} -> {complexity_after})"
        )));
    }
    Ok(ShortenStep {
        before: l.clone(),
        after,
        complexity_before: before,
        complexity_after,
        certificate: Some(ShortenCertificate {
            pinch,
            start,
            end,
            path_min_dist: path.iter().map(|&x| b.dist(x)).min().unwrap_or(0),
            path,
            path_word,
            copy_generators: gens,
            subloop,
            fill,
        }),
        label,
    })
}

/// Iterates `shorten_loop` until the base case.
pub fn shorten_to_base(m: Combination, c2: &CayleyComplexBall, l: &Loop, r: u32, params: &ShortenParams) -> Result<Vec<ShortenStep>> {
    let mut out = Vec::new();
    let mut cur = l.clone();
    loop {
        let s = shorten_loop(m, c2, &cur, r, params)?;
        if s.certificate.is_none() {
            out.push(s);
            return Ok(out);
        }
        cur = s.after.clone();
        out.push(s);
    }
}

/// Independent check of a shortening step against the ball.
pub fn replay_shorten(m: Combination, c2: &CayleyComplexBall, r: u32, params: &ShortenParams, s: &ShortenStep) -> std::result::Result<(), String> {
    let b = &c2.ball;
    let Some(c) = &s.certificate else {
        return if s.before == s.after { Ok(()) } else { Err("base case changed the loop".into()) };
    };
    let old = &s.before.word.0;
    let mut w = old[..c.start].to_vec();
    w.extend_from_slice(&c.path_word.0);
    w.extend_from_slice(&old[c.end..]);
    if w != s.after.word.0 || s.after.base != s.before.base {
        return Err("new loop is not the splice of the old one".into());
    }
    Loop::new(b, s.before.base, s.before.word.clone()).map_err(|e| e.to_string())?;
    let verts = s.before.vertices(b);
    let mut cur = verts[c.start];
    if c.path.first() != Some(&cur) {
        return Err("path does not start at the pinch".into());
    }
    for (i, &l) in c.path_word.letters().iter().enumerate() {
        cur = b.neighbor(cur, l).ok_or("path leaves the ball")?;
        if c.path.get(i + 1) != Some(&cur) {
            return Err("path vertices do not follow the word".into());
        }
        if b.dist(cur) <= params.c * r {
            return Err("path enters B(c r)".into());
        }
    }
    if cur != verts[c.end] {
        return Err("path does not end at the pinch".into());
    }
    let ambient = m.ambient().ok_or("no ambient solver")?;
    let gens: Vec<Word> = c.copy_generators.clone();
    let members = |x: &Word| -> bool {
        match m {
            Combination::Amalgam(am) => (0..2).any(|f| {
                let local_ok = x.letters().iter().all(|&l| am.factor_of(l) == f);
                local_ok && am.embeddings[f].contains(&am.local(f, x))
            }),
            Combination::Hnn(hm) => {
                x.letters().iter().all(|l| l.generator() < hm.base.rank())
                    && (hm.h.contains(x) || hm.k.contains(x))
            }
        }
    };
    if !members(&c.path_word) && !c.path_word.is_empty() {
        return Err("path word is not in the subgroup".into());
    }
    if gens.is_empty() {
        return Err("no copy generators".into());
    }
    let pinched = Word(old[c.start..c.end].to_vec());
    if !ambient.equal(&pinched, &c.path_word).map_err(|e| e.to_string())? {
        return Err("pinched subpath and path differ in the group".into());
    }
    if s.complexity_after >= s.complexity_before
        || s.complexity_before != m.complexity(&s.before.word)
        || s.complexity_after != m.complexity(&s.after.word)
    {
        return Err("declared complexity is wrong or did not drop".into());
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub enum CombinationModel {
    Amalgam(AmalgamModel),
    Hnn(HnnModel),
}

impl CombinationModel {
    pub fn as_ref(&self) -> Combination<'_> {
        match self {
            CombinationModel::Amalgam(m) => Combination::Amalgam(m),
            CombinationModel::Hnn(m) => Combination::Hnn(m),
        }
    }

    pub fn parse(&self, text: &str) -> Result<Word> {
        match self {
            CombinationModel::Amalgam(m) => m.parse(text),
            CombinationModel::Hnn(m) => m.parse(text),
        }
    }

    pub fn parse_syllables(&self, text: &str) -> Result<SyllableWord> {
        match self {
            CombinationModel::Amalgam(m) => m.parse_syllables(text),
            CombinationModel::Hnn(m) => m.parse_syllables(text),
        }
    }

    pub fn format_syllables(&self, sw: &SyllableWord) -> String {
        match self {
            CombinationModel::Amalgam(m) => m.format_syllables(sw),
            CombinationModel::Hnn(m) => m.format_syllables(sw),
        }
    }

    pub fn by_name(name: &str) -> Result<CombinationModel> {
        match name {
            "trefoil" | "trefoil_amalgam" => Ok(CombinationModel::Amalgam(AmalgamModel::trefoil())),
            "bs12" => Ok(CombinationModel::Hnn(HnnModel::bs12())),
            _ => Err(Error::UnknownModel(name.into())),
        }
    }
}

/// Reads a combination file:
///
/// ```text
/// kind: amalgam
/// factor: x
/// factor: y
/// ambient: trefoil
/// subgroup: xx = yyy
/// ```
///
/// or, for an extension, `kind: hnn`, `base: a`, `stable: t` and
/// `subgroup: a -> aa` lines. Factors and bases are free abelian on the
/// listed generators; `ambient` names a zoo model and is optional.
pub fn parse_combination(text: &str) -> Result<CombinationModel> {
    let mut kind = None;
    let mut factors: Vec<Vec<String>> = Vec::new();
    let mut base: Option<Vec<String>> = None;
    let mut stable = None;
    let mut ambient = None;
    let mut pairs: Vec<(usize, String, String)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let syntax = |message: &str| Error::Syntax {
            line: i + 1,
            column: 1,
            message: message.into(),
        };
        let (key, val) = line.split_once(':').ok_or_else(|| syntax("expected 'key: value'"))?;
        let val = val.trim();
        let names = || val.split_whitespace().map(String::from).collect::<Vec<_>>();
        match key.trim() {
            "kind" => kind = Some(val.to_string()),
            "factor" => factors.push(names()),
            "base" => base = Some(names()),
            "stable" => stable = Some(val.to_string()),
            "ambient" => ambient = Some(zoo::zoo_group(val)?),
            "subgroup" => {
                let (a, b) = val
                    .split_once("->")
                    .or_else(|| val.split_once('='))
                    .ok_or_else(|| syntax("expected 'u = v' or 'u -> v'"))?;
                pairs.push((i + 1, a.trim().to_string(), b.trim().to_string()));
            }
            _ => return Err(syntax("unknown key")),
        }
    }
    let strs = |v: &[String]| -> Vec<String> { v.to_vec() };
    let model = |names: &[String]| {
        let s: Vec<&str> = names.iter().map(|x| x.as_str()).collect();
        free_abelian(&s)
    };
    let word = |m: &GroupModel, line: usize, s: &str| {
        m.parse_word(s).map_err(|e| match e {
            Error::Syntax { column, message, .. } => Error::Syntax { line, column, message },
            e => e,
        })
    };
    match kind.as_deref() {
        Some("amalgam") => {
            if factors.len() != 2 {
                return Err(Error::Precondition("an amalgam needs two factor lines".into()));
            }
            let g1 = model(&strs(&factors[0]));
            let g2 = model(&strs(&factors[1]));
            let mut h1 = Vec::new();
            let mut h2 = Vec::new();
            for (line, a, b) in &pairs {
                h1.push(word(&g1, *line, a)?);
                h2.push(word(&g2, *line, b)?);
            }
            Ok(CombinationModel::Amalgam(AmalgamModel::new(g1, g2, h1, h2, ambient)?))
        }
        Some("hnn") => {
            let base = model(&base.ok_or_else(|| Error::Precondition("missing base line".into()))?);
            let stable = stable.unwrap_or_else(|| "t".into());
            let mut h = Vec::new();
            let mut k = Vec::new();
            for (line, a, c) in &pairs {
                h.push(word(&base, *line, a)?);
                k.push(word(&base, *line, c)?);
            }
            Ok(CombinationModel::Hnn(HnnModel::new(base, h, k, &stable, ambient)?))
        }
        _ => Err(Error::Precondition("kind must be amalgam or hnn".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::{build_ball, build_complex};

    #[test]
    fn trefoil_pinches() {
        let m = AmalgamModel::trefoil();
        let w = m.parse_syllables("x^2 | Y^3").unwrap();
        assert_eq!(amalgam_pinch(&m, &w).unwrap(), 0);
        assert_eq!(amalgam_pinch(&m, &m.parse_syllables("xxXX").unwrap()).unwrap(), 0);
        let w = m.parse_syllables("xx|YYY|xx|YYY").unwrap();
        assert_eq!(w.syllable_length(), 4);
        assert_eq!(amalgam_pinch(&m, &w).unwrap(), 0);
        let w = m.parse_syllables("x|y|X|Y").unwrap();
        assert!(amalgam_pinch(&m, &w).is_err());
        assert_eq!(m.image(&Syllable { factor: 0, word: m.parse("x^4").unwrap() }).unwrap(), m.parse("y^6").unwrap());
    }

    #[test]
    fn britton_examples() {
        let m = HnnModel::bs12();
        let run = britton_reduce(&m, &m.parse_syllables("1 | t^-1 | a | t").unwrap()).unwrap();
        assert_eq!(m.to_word(&run.result), m.parse("aa").unwrap());
        let run = britton_reduce(&m, &m.syllables(&m.parse("Taata^-4").unwrap())).unwrap();
        assert!(run.result.is_empty());
        assert_eq!(run.steps.len(), 1);
        assert_eq!((run.steps[0].weight_before, run.steps[0].weight_after), (2, 0));
        let w = m.syllables(&m.parse("aaA").unwrap());
        let run = britton_reduce(&m, &w).unwrap();
        assert_eq!(m.to_word(&run.result), m.parse("a").unwrap());
        assert!(run.steps.is_empty());
        let w = m.syllables(&m.parse("tT").unwrap());
        assert!(britton_reduce(&m, &w).unwrap().result.is_empty());
        assert_eq!(m.format_syllables(&m.parse_syllables("a|t^2|A").unwrap()), "a | t^2 | A");
    }

    #[test]
    fn lattice_solver() {
        assert_eq!(solve_integer(&[vec![2, 0], vec![0, 3]], &[4, -3]), Some(vec![2, -1]));
        assert_eq!(solve_integer(&[vec![2, 0]], &[3, 0]), None);
        assert_eq!(solve_integer(&[vec![1, 1]], &[1, 0]), None);
        assert_eq!(rank_of(&[vec![1, 2], vec![2, 4]], 2), 1);
        let g = free_abelian(&["a", "b"]);
        assert!(SubgroupEmbedding::lattice(&g, vec![g.parse_word("ab").unwrap(), g.parse_word("aabb").unwrap()]).is_err());
    }

    #[test]
    fn model_files() {
        let m = parse_combination("kind: amalgam\nfactor: x\nfactor: y\nambient: trefoil\nsubgroup: xx = yyy\n").unwrap();
        let w = m.parse_syllables("xx | YYY").unwrap();
        let CombinationModel::Amalgam(a) = &m else { panic!() };
        assert_eq!(amalgam_pinch(a, &w).unwrap(), 0);
        let h = parse_combination("# bs\nkind: hnn\nbase: a\nstable: t\nsubgroup: a -> aa\n").unwrap();
        let CombinationModel::Hnn(h) = h else { panic!() };
        assert_eq!(h.format(&h.presentation.relators[0]), "TatAA");
        let run = britton_reduce(&h, &h.parse_syllables("T|a|t|A^2").unwrap()).unwrap();
        assert!(run.result.is_empty());
        assert!(parse_combination("kind: amalgam\nfactor: x\n").is_err());
        assert!(matches!(parse_combination("kind: hnn\nbase a"), Err(Error::Syntax { line: 2, .. })));
    }

    #[test]
    fn trefoil_shortening() {
        let m = AmalgamModel::trefoil();
        let c2 = build_complex(build_ball(m.ambient.as_ref().unwrap(), 9).unwrap()).unwrap();
        let b = &c2.ball;
        let base = b.sphere(5).unwrap().start;
        let l = Loop::new(b, base, m.parse("xxYYY").unwrap()).unwrap();
        let p = ShortenParams { c: 1, c1: 1, ..Default::default() };
        let steps = shorten_to_base(Combination::Amalgam(&m), &c2, &l, 1, &p).unwrap();
        assert_eq!(steps[0].complexity_after, 1);
        for s in &steps {
            replay_shorten(Combination::Amalgam(&m), &c2, 1, &p, s).unwrap();
        }
        assert!(steps.last().unwrap().certificate.is_none());
        assert_eq!(steps[0].label, "machinery only");
    }

    #[test]
    fn bs12_shortening() {
        let m = HnnModel::bs12();
        let c2 = build_complex(build_ball(m.ambient.as_ref().unwrap(), 9).unwrap()).unwrap();
        let b = &c2.ball;
        let base = b.sphere(5).unwrap().start;
        let l = Loop::new(b, base, m.parse("TataaAAAA").unwrap()).unwrap();
        let p = ShortenParams { c: 1, c1: 1, ..Default::default() };
        let s = shorten_loop(Combination::Hnn(&m), &c2, &l, 1, &p).unwrap();
        assert_eq!((s.complexity_before, s.complexity_after), (2, 0));
        replay_shorten(Combination::Hnn(&m), &c2, 1, &p, &s).unwrap();
        let bad = Loop::new(b, b.identity(), m.parse("TatAA").unwrap()).unwrap();
        assert!(shorten_loop(Combination::Hnn(&m), &c2, &bad, 1, &p).is_err());
    }
}
