//! Van Kampen search in ball complements. Loops are based edge paths in a
//! Cayley 2-complex ball; a filling is a certificate of elementary moves
//! (backtrack insertion and deletion, 2-cell replacement) that contracts the
//! loop to its base without touching the inner ball.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cayley::{build_ball, build_complex, CayleyBall, CayleyComplexBall, GeodesicSegment, NONE};
use crate::ends::{GrowthTable, Mode, Sample, TableKind};
use crate::error::{Error, Result};
use crate::model::GroupModel;
use crate::presentation::symmetrize;
use crate::word::{free_reduce, Letter, Word};

/// A closed edge path based at a ball vertex.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Loop {
    pub base: u32,
    pub word: Word,
    pub min_dist: u32,
}

impl Loop {
    pub fn new(b: &CayleyBall, base: u32, word: Word) -> Result<Loop> {
        let verts = walk(b, base, word.letters())
            .ok_or_else(|| Error::Precondition("loop leaves the ball".into()))?;
        if *verts.last().unwrap() != base {
            return Err(Error::Precondition("loop is not closed".into()));
        }
        let min_dist = verts.iter().map(|&v| b.dist(v)).min().unwrap();
        Ok(Loop { base, word, min_dist })
    }

    /// Parses `base=<word>; word=<letters>`.
    pub fn parse(b: &CayleyBall, text: &str) -> Result<Loop> {
        let mut base = None;
        let mut word = None;
        for part in text.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::Precondition(format!("bad loop field '{part}'")))?;
            match k.trim() {
                "base" => base = Some(b.model.parse_word(v.trim())?),
                "word" => word = Some(b.model.parse_word(v.trim())?),
                other => return Err(Error::Precondition(format!("unknown loop field '{other}'"))),
            }
        }
        let base = base.unwrap_or_default();
        let word = word.ok_or_else(|| Error::Precondition("loop literal needs word=".into()))?;
        let v = b
            .find(&base)
            .ok_or_else(|| Error::Precondition("loop base lies outside the ball".into()))?;
        Loop::new(b, v, word)
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn vertices(&self, b: &CayleyBall) -> Vec<u32> {
        walk(b, self.base, self.word.letters()).expect("loop lies in the ball")
    }
}

fn walk(b: &CayleyBall, base: u32, ls: &[Letter]) -> Option<Vec<u32>> {
    let mut out = Vec::with_capacity(ls.len() + 1);
    out.push(base);
    let mut cur = base;
    for &l in ls {
        cur = b.neighbor(cur, l)?;
        out.push(cur);
    }
    Some(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "move", rename_all = "snake_case")]
pub enum Move {
    /// Insert `letter letter^-1` before position `pos`.
    Insert { pos: usize, letter: Letter },
    /// Delete the backtrack at positions `pos`, `pos + 1`.
    Delete { pos: usize },
    /// Replace `relator[..split]` at `pos` by `relator[split..]^-1`.
    Cell { pos: usize, relator: Word, split: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaggedMove {
    #[serde(flatten)]
    pub mv: Move,
    /// Least distance from the identity among the vertices the move touches.
    pub min_dist: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub inner_radius: u32,
    pub moves: Vec<TaggedMove>,
}

impl Certificate {
    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn cell_count(&self) -> usize {
        self.moves.iter().filter(|m| matches!(m.mv, Move::Cell { .. })).count()
    }

    /// Least distance touched, or `None` for the empty certificate.
    pub fn min_dist(&self) -> Option<u32> {
        self.moves.iter().map(|m| m.min_dist).min()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum FillResult {
    Filled { certificate: Certificate },
    Unknown { expanded: usize, note: String },
    Obstructed { id: String, value: i64 },
}

impl FillResult {
    pub fn is_filled(&self) -> bool {
        matches!(self, FillResult::Filled { .. })
    }

    pub fn label(&self) -> String {
        match self {
            FillResult::Filled { certificate } => format!("filled({} moves)", certificate.len()),
            FillResult::Unknown { expanded, .. } => format!("unknown({expanded} expanded)"),
            FillResult::Obstructed { id, value } => format!("obstructed({id},{value})"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FillBudget {
    pub max_expansions: usize,
    /// Longest intermediate loop in a search; defaults to twice the input plus 8.
    pub max_len: Option<usize>,
}

impl Default for FillBudget {
    fn default() -> FillBudget {
        FillBudget {
            max_expansions: 200_000,
            max_len: None,
        }
    }
}

fn is_conjugate_of(w: &[Letter], r: &[Letter]) -> bool {
    if w.len() != r.len() {
        return false;
    }
    let n = r.len();
    (0..n).any(|k| (0..n).all(|i| w[i] == r[(i + k) % n]))
}

/// Replays a certificate and returns the final word. Every move must apply
/// literally, stay in the ball, avoid `B(r)` and carry the right tag.
pub fn replay(c: &CayleyComplexBall, l: &Loop, r: u32, moves: &[TaggedMove]) -> std::result::Result<Word, String> {
    let b = &c.ball;
    let mut w: Vec<Letter> = l.word.0.clone();
    for (i, tm) in moves.iter().enumerate() {
        let err = |m: &str| format!("move {i}: {m}");
        let verts = walk(b, l.base, &w).ok_or_else(|| err("loop left the ball"))?;
        let touched: Vec<u32> = match &tm.mv {
            Move::Insert { pos, letter } => {
                if *pos > w.len() {
                    return Err(err("position out of range"));
                }
                let u = b.neighbor(verts[*pos], *letter).ok_or_else(|| err("spur leaves the ball"))?;
                w.insert(*pos, letter.inv());
                w.insert(*pos, *letter);
                vec![verts[*pos], u]
            }
            Move::Delete { pos } => {
                if pos + 1 >= w.len() || w[pos + 1] != w[*pos].inv() {
                    return Err(err("no backtrack at position"));
                }
                w.drain(*pos..pos + 2);
                vec![verts[*pos], verts[pos + 1]]
            }
            Move::Cell { pos, relator, split } => {
                let rl = relator.letters();
                let ok = c.relators.iter().any(|x| {
                    is_conjugate_of(rl, x.letters()) || is_conjugate_of(rl, x.inverse().letters())
                });
                if !ok {
                    return Err(err("not a relator conjugate"));
                }
                if *split == 0 || *split > rl.len() || pos + split > w.len() || w[*pos..pos + split] != rl[..*split] {
                    return Err(err("relator prefix does not match"));
                }
                let cell = walk(b, verts[*pos], rl).ok_or_else(|| err("cell leaves the ball"))?;
                if *cell.last().unwrap() != verts[*pos] {
                    return Err(err("cell does not close"));
                }
                let tail = Word(rl[*split..].to_vec()).inverse();
                w.splice(*pos..pos + split, tail.0);
                cell
            }
        };
        let md = touched.iter().map(|&v| b.dist(v)).min().unwrap();
        if md <= r {
            return Err(err(&format!("touches dist {md} <= {r}")));
        }
        if md != tm.min_dist {
            return Err(err(&format!("tag {} but touches {md}", tm.min_dist)));
        }
    }
    Ok(Word(w))
}

/// Checks that a certificate contracts `l` outside `B(r)`.
pub fn verify_filling(c: &CayleyComplexBall, l: &Loop, r: u32, cert: &Certificate) -> std::result::Result<(), String> {
    let w = replay(c, l, r, &cert.moves)?;
    if !w.is_empty() {
        return Err(format!("replay ends at a loop of length {}", w.len()));
    }
    Ok(())
}

/// Winding number about the origin for loops in a planar lattice model,
/// `None` when the model has no 2-dimensional lattice coordinates.
pub fn winding_number(b: &CayleyBall, l: &Loop) -> Option<i64> {
    let pts: Vec<Vec<i64>> = l
        .vertices(b)
        .iter()
        .map(|&v| b.model.lattice_point(&b.state(v)))
        .collect::<Option<Vec<_>>>()?;
    if pts.iter().any(|p| p.len() != 2) {
        return None;
    }
    let mut w = 0;
    for e in pts.windows(2) {
        let (p, q) = (&e[0], &e[1]);
        let dy = q[1] - p[1];
        // crossing of the ray y = 0, x > 0, counted half-open in y
        let num = p[0] * dy - (q[0] - p[0]) * p[1];
        if p[1] <= 0 && q[1] > 0 && num > 0 {
            w += 1;
        } else if q[1] <= 0 && p[1] > 0 && num < 0 {
            w -= 1;
        }
    }
    Some(w)
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Key(usize, usize);

/// Search state shared by the filling strategies.
pub struct Filler<'a> {
    c: &'a CayleyComplexBall,
    r: u32,
    sym: Vec<Word>,
    by_first: Vec<Vec<usize>>,
    cells: HashMap<(u32, usize), Option<u32>>,
    pub expanded: usize,
}

impl<'a> Filler<'a> {
    pub fn new(c: &'a CayleyComplexBall, r: u32) -> Filler<'a> {
        let sym = symmetrize(&c.relators);
        let mut by_first = vec![Vec::new(); c.ball.degree()];
        for (i, s) in sym.iter().enumerate() {
            by_first[s.letters()[0].code()].push(i);
        }
        Filler {
            c,
            r,
            sym,
            by_first,
            cells: HashMap::new(),
            expanded: 0,
        }
    }

    fn ball(&self) -> &'a CayleyBall {
        &self.c.ball
    }

    /// Minimum distance on the cell `sym[si]` at `v`, if it lies in the
    /// ball and outside `B(r)`.
    fn cell_ok(&mut self, v: u32, si: usize) -> Option<u32> {
        if let Some(&x) = self.cells.get(&(v, si)) {
            return x;
        }
        let b = self.ball();
        let out = walk(b, v, self.sym[si].letters()).and_then(|vs| {
            let md = vs.iter().map(|&u| b.dist(u)).min().unwrap();
            (md > self.r && *vs.last().unwrap() == v).then_some(md)
        });
        self.cells.insert((v, si), out);
        out
    }

    fn free_reduce_into(&self, w: &mut Vec<Letter>, verts: &mut Vec<u32>, out: &mut Vec<TaggedMove>) {
        let b = self.ball();
        let mut i = 0;
        while i + 1 < w.len() {
            if w[i + 1] == w[i].inv() {
                out.push(TaggedMove {
                    mv: Move::Delete { pos: i },
                    min_dist: b.dist(verts[i]).min(b.dist(verts[i + 1])),
                });
                w.drain(i..i + 2);
                verts.drain(i + 1..i + 3);
                i = i.saturating_sub(1);
            } else {
                i += 1;
            }
        }
    }

    /// Best-first search by loop length over cell moves with eager free
    /// reduction. Positions in the returned moves are relative to `start`.
    pub fn search(&mut self, base: u32, start: &[Letter], max_len: usize, budget: usize) -> Option<Vec<TaggedMove>> {
        let b = self.ball();
        let mut w0 = start.to_vec();
        let mut v0 = walk(b, base, &w0)?;
        let mut first = Vec::new();
        self.free_reduce_into(&mut w0, &mut v0, &mut first);
        if w0.is_empty() {
            return Some(first);
        }
        struct Node {
            word: Vec<Letter>,
            parent: usize,
            moves: Vec<TaggedMove>,
        }
        let mut nodes = vec![Node {
            word: w0.clone(),
            parent: usize::MAX,
            moves: first,
        }];
        let mut seen: HashSet<Vec<Letter>> = HashSet::from([w0.clone()]);
        let mut heap = BinaryHeap::from([Reverse(Key(w0.len(), 0))]);
        let mut spent = 0;
        while let Some(Reverse(Key(_, idx))) = heap.pop() {
            if nodes[idx].word.is_empty() {
                let mut chain = Vec::new();
                let mut i = idx;
                while i != usize::MAX {
                    chain.push(i);
                    i = nodes[i].parent;
                }
                let mut out = Vec::new();
                for &i in chain.iter().rev() {
                    out.extend(nodes[i].moves.iter().cloned());
                }
                return Some(out);
            }
            if spent >= budget {
                return None;
            }
            spent += 1;
            self.expanded += 1;
            let w = nodes[idx].word.clone();
            let verts = walk(b, base, &w).expect("search states stay in the ball");
            let n = w.len();
            for pos in 0..n {
                let cands = self.by_first[w[pos].code()].clone();
                for si in cands {
                    let s = self.sym[si].clone();
                    let sl = s.letters();
                    let jmax = w[pos..].iter().zip(sl).take_while(|(x, y)| x == y).count();
                    let Some(md) = self.cell_ok(verts[pos], si) else {
                        continue;
                    };
                    for split in 1..=jmax {
                        let new_len = n - split + (sl.len() - split);
                        if new_len > max_len {
                            continue;
                        }
                        let mut nw = w[..pos].to_vec();
                        nw.extend(sl[split..].iter().rev().map(|l| l.inv()));
                        nw.extend_from_slice(&w[pos + split..]);
                        let mut nv = walk(b, base, &nw).expect("cell moves stay in the ball");
                        let mut moves = vec![TaggedMove {
                            mv: Move::Cell {
                                pos,
                                relator: s.clone(),
                                split,
                            },
                            min_dist: md,
                        }];
                        self.free_reduce_into(&mut nw, &mut nv, &mut moves);
                        if seen.insert(nw.clone()) {
                            let k = Key(nw.len(), nodes.len());
                            nodes.push(Node {
                                word: nw,
                                parent: idx,
                                moves,
                            });
                            heap.push(Reverse(k));
                        }
                    }
                }
            }
        }
        None
    }

    /// Applies a move to a word, returning its tag, or `None` if it is not
    /// valid outside `B(r)`.
    fn apply(&self, base: u32, w: &mut Vec<Letter>, mv: &Move) -> Option<u32> {
        let b = self.ball();
        let verts = walk(b, base, w)?;
        let touched = match mv {
            Move::Insert { pos, letter } => {
                let u = b.neighbor(verts[*pos], *letter)?;
                w.insert(*pos, letter.inv());
                w.insert(*pos, *letter);
                vec![verts[*pos], u]
            }
            Move::Delete { pos } => {
                if pos + 1 >= w.len() || w[pos + 1] != w[*pos].inv() {
                    return None;
                }
                w.drain(*pos..pos + 2);
                vec![verts[*pos], verts[pos + 1]]
            }
            Move::Cell { pos, relator, split } => {
                let rl = relator.letters();
                if pos + split > w.len() || w[*pos..pos + split] != rl[..*split] {
                    return None;
                }
                let cell = walk(b, verts[*pos], rl)?;
                let tail = Word(rl[*split..].to_vec()).inverse();
                w.splice(*pos..pos + split, tail.0);
                cell
            }
        };
        let md = touched.iter().map(|&v| b.dist(v)).min().unwrap();
        (md > self.r).then_some(md)
    }

    fn push(&self, base: u32, w: &mut Vec<Letter>, mv: Move, out: &mut Vec<TaggedMove>) -> Option<()> {
        let md = self.apply(base, w, &mv)?;
        out.push(TaggedMove { mv, min_dist: md });
        Some(())
    }

    /// Cone points to try for a loop: the outward extension of its base and
    /// the far ends of the generator axes, ordered so that points whose tree
    /// depths over the loop vary least come first.
    fn cone_points(&self, base: u32, verts: &[u32]) -> Vec<u32> {
        let b = self.ball();
        let r = self.r;
        let mut out = vec![outward(b, base)];
        for l in Letter::alphabet(b.model.rank()) {
            let mut cur = b.identity();
            while let Some(u) = b.neighbor(cur, l) {
                if b.dist(u) <= b.dist(cur) {
                    break;
                }
                cur = u;
            }
            out.push(cur);
        }
        let mut seen = HashSet::new();
        out.retain(|&p| b.dist(p) > r && seen.insert(p));
        let mut scored: Vec<(u32, u32, usize, u32)> = Vec::new();
        for (i, &p) in out.iter().enumerate() {
            let d = b.bfs(&[p], |v| b.dist(v) > r, u32::MAX);
            let ds: Vec<u32> = verts.iter().map(|&v| d[v as usize]).collect();
            if ds.contains(&NONE) {
                continue;
            }
            let (lo, hi) = (*ds.iter().min().unwrap(), *ds.iter().max().unwrap());
            scored.push((hi - lo, hi, i, p));
        }
        scored.sort();
        scored.into_iter().map(|x| x.3).collect()
    }

    /// Decomposes the loop into triangles over a breadth-first tree rooted
    /// at `p` in the complement of `B(r)` and fills each one.
    fn cone_fill(&mut self, base: u32, start: &[Letter], p: u32, budget: usize) -> Option<Vec<TaggedMove>> {
        let b = self.ball();
        let r = self.r;
        let (parent, plabel) = tree(b, p, |v| b.dist(v) > r);
        let mut w = start.to_vec();
        let verts = walk(b, base, &w)?;
        if verts.iter().any(|&v| parent[v as usize] == NONE) {
            return None;
        }
        let path = |mut v: u32| {
            let mut ls = Vec::new();
            while v != p {
                ls.push(plabel[v as usize]);
                v = parent[v as usize];
            }
            ls.reverse();
            ls
        };
        let paths: Vec<Vec<Letter>> = verts.iter().map(|&v| path(v)).collect();
        let mut out = Vec::new();
        let n = w.len();
        for i in (0..=n).rev() {
            let back: Vec<Letter> = paths[i].iter().rev().map(|l| l.inv()).collect();
            for (t, &l) in back.iter().enumerate() {
                self.push(base, &mut w, Move::Insert { pos: i + t, letter: l }, &mut out)?;
            }
        }
        let o = paths[0].len();
        let start_spent = self.expanded;
        for i in 0..n {
            let (a, c) = (&paths[i], &paths[i + 1]);
            let k = a.iter().zip(c).take_while(|(x, y)| x == y).count();
            let mut inner: Vec<Letter> = a[k..].to_vec();
            inner.push(start[i]);
            inner.extend(c[k..].iter().rev().map(|l| l.inv()));
            let lca = walk(b, p, &a[..k])?.pop().unwrap();
            let left = budget.saturating_sub(self.expanded - start_spent);
            let max_len = 2 * inner.len() + 8;
            let sub = self.search(lca, &inner, max_len, left)?;
            for m in sub {
                let mv = shift(m.mv, o + k);
                self.push(base, &mut w, mv, &mut out)?;
            }
            for t in 0..k {
                self.push(base, &mut w, Move::Delete { pos: o + k - 1 - t }, &mut out)?;
            }
        }
        for t in 0..o {
            self.push(base, &mut w, Move::Delete { pos: o - 1 - t }, &mut out)?;
        }
        w.is_empty().then_some(out)
    }
}

fn shift(mv: Move, by: usize) -> Move {
    match mv {
        Move::Insert { pos, letter } => Move::Insert { pos: pos + by, letter },
        Move::Delete { pos } => Move::Delete { pos: pos + by },
        Move::Cell { pos, relator, split } => Move::Cell {
            pos: pos + by,
            relator,
            split,
        },
    }
}

/// Follows the least letter that increases the distance until none does.
pub fn outward(b: &CayleyBall, v: u32) -> u32 {
    let mut cur = v;
    loop {
        let next = b.neighbors(cur).map(|(_, u)| u).find(|&u| b.dist(u) == b.dist(cur) + 1);
        match next {
            Some(u) => cur = u,
            None => return cur,
        }
    }
}

/// Breadth-first tree from `root` inside the allowed set, scanning letters
/// in order so that tree paths are shortlex-least geodesics of the subgraph.
fn tree<F: Fn(u32) -> bool>(b: &CayleyBall, root: u32, allowed: F) -> (Vec<u32>, Vec<Letter>) {
    let mut parent = vec![NONE; b.len()];
    let mut plabel = vec![Letter::gen(0); b.len()];
    parent[root as usize] = root;
    let mut q = VecDeque::from([root]);
    while let Some(v) = q.pop_front() {
        for (l, u) in b.neighbors(v) {
            if parent[u as usize] == NONE && allowed(u) {
                parent[u as usize] = v;
                plabel[u as usize] = l;
                q.push_back(u);
            }
        }
    }
    (parent, plabel)
}

/// Decides, within budget, whether `l` bounds a disk outside `B(r)`.
pub fn fill_outside(c: &CayleyComplexBall, l: &Loop, r: u32, budget: &FillBudget) -> Result<FillResult> {
    let b = &c.ball;
    if budget.max_expansions == 0 || budget.max_len == Some(0) {
        return Err(Error::Precondition("budget parameters must be positive".into()));
    }
    if r + 1 >= b.radius() {
        return Err(Error::Precondition(format!("need r + 1 < R, got r = {r}, R = {}", b.radius())));
    }
    let check = Loop::new(b, l.base, l.word.clone())?;
    if check.min_dist <= r {
        return Err(Error::Precondition(format!(
            "loop touches B({r}) (min dist {})",
            check.min_dist
        )));
    }
    if let Some(w) = winding_number(b, l) {
        if w != 0 {
            return Ok(FillResult::Obstructed {
                id: "winding".into(),
                value: w,
            });
        }
    }
    let mut f = Filler::new(c, r);
    let max_len = budget.max_len.unwrap_or(2 * l.len() + 8);
    let mut found = None;
    if l.len() <= 20 {
        found = f.search(l.base, l.word.letters(), max_len, (budget.max_expansions / 4).max(1));
    }
    if found.is_none() {
        let mut w = l.word.0.clone();
        let mut verts = l.vertices(b);
        let mut pre = Vec::new();
        f.free_reduce_into(&mut w, &mut verts, &mut pre);
        let cones = f.cone_points(l.base, &verts);
        for (i, &p) in cones.iter().enumerate() {
            let left = budget.max_expansions.saturating_sub(f.expanded);
            if left == 0 {
                break;
            }
            let share = (left / (cones.len() - i)).max(1);
            if let Some(ms) = f.cone_fill(l.base, &w, p, share) {
                let mut all = pre.clone();
                all.extend(ms);
                found = Some(all);
                break;
            }
        }
    }
    match found {
        Some(moves) => {
            let cert = Certificate { inner_radius: r, moves };
            verify_filling(c, l, r, &cert).map_err(|e| Error::UnsoundOracle(format!("certificate replay failed: {e}")))?;
            Ok(FillResult::Filled { certificate: cert })
        }
        None => Ok(FillResult::Unknown {
            expanded: f.expanded,
            note: format!("no filling within {} expansions", budget.max_expansions),
        }),
    }
}

/// Diamond loop in the plane of generators `i`, `j` through the points at
/// l1-distance `n`; needs lattice coordinates.
pub fn sphere_tracer(b: &CayleyBall, n: u32, i: usize, j: usize) -> Result<Loop> {
    if b.model.lattice_point(&b.model.identity_state()).is_none() {
        return Err(Error::Precondition("sphere tracers need a lattice model".into()));
    }
    if n == 0 || i == j || i.max(j) >= b.model.rank() {
        return Err(Error::Precondition("bad tracer parameters".into()));
    }
    let (a, ai, c, ci) = (Letter::gen(i), Letter::gen_inv(i), Letter::gen(j), Letter::gen_inv(j));
    let mut w = Vec::new();
    for (x, y) in [(c, ai), (ai, ci), (ci, a), (a, c)] {
        for _ in 0..n {
            w.push(x);
            w.push(y);
        }
    }
    let base = b
        .find(&Word(vec![a; n as usize]))
        .ok_or_else(|| Error::Precondition("tracer base outside the ball".into()))?;
    Loop::new(b, base, Word(w))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProbeSettings {
    /// Cap on annulus cell boundaries (evenly spaced when exceeded).
    pub max_cells: usize,
    pub random_words: usize,
    pub conjugator_len: usize,
    pub seed: u64,
}

impl Default for ProbeSettings {
    fn default() -> ProbeSettings {
        ProbeSettings {
            max_cells: 64,
            random_words: 6,
            conjugator_len: 2,
            seed: 1,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Probe {
    pub label: String,
    #[serde(rename = "loop")]
    pub lp: Loop,
}

/// The deterministic probe family at level `n`: cell boundaries with least
/// distance `n`, sphere tracers at `n` for lattice models, and seeded
/// products of conjugated relator cells with all vertices at distance >= `n`.
pub fn probe_loops(c: &CayleyComplexBall, n: u32, s: &ProbeSettings) -> Vec<Probe> {
    let b = &c.ball;
    let mut out = Vec::new();
    let ring: Vec<usize> = (0..c.cells.len()).filter(|&i| c.min_cell_dist(&c.cells[i]) == n).collect();
    let step = ring.len().div_ceil(s.max_cells.max(1)).max(1);
    for &ci in ring.iter().step_by(step) {
        let cell = &c.cells[ci];
        if let Ok(l) = Loop::new(b, cell.base, c.cell_word(cell).clone()) {
            out.push(Probe {
                label: format!("cell{ci}"),
                lp: l,
            });
        }
    }
    if b.model.lattice_point(&b.model.identity_state()).is_some() && n + 1 <= b.radius() {
        let d = b.model.rank();
        for i in 0..d {
            for j in i + 1..d {
                if let Ok(l) = sphere_tracer(b, n, i, j) {
                    out.push(Probe {
                        label: format!("tracer{i}{j}"),
                        lp: l,
                    });
                }
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed ^ (u64::from(n) << 32));
    let Ok(level) = b.sphere(n) else { return out };
    let level: Vec<u32> = level.collect();
    let mut made = 0;
    let mut tries = 0;
    while made < s.random_words && tries < 50 * s.random_words.max(1) {
        tries += 1;
        let g = *level.choose(&mut rng).unwrap();
        let mut w = Vec::new();
        for _ in 0..2 {
            let k = rng.gen_range(0..=s.conjugator_len);
            let mut cur = g;
            let mut u = Vec::new();
            for _ in 0..k {
                let opts: Vec<(Letter, u32)> = b.neighbors(cur).filter(|&(_, v)| b.dist(v) >= n).collect();
                if let Some(&(l, v)) = opts.choose(&mut rng) {
                    u.push(l);
                    cur = v;
                }
            }
            let here: Vec<(u32, u16)> = c
                .cells_at(cur)
                .iter()
                .copied()
                .filter(|&(ci, _)| c.min_cell_dist(&c.cells[ci as usize]) >= n)
                .collect();
            let Some(&(ci, pos)) = here.choose(&mut rng) else { continue };
            let mut rel = c.cell_word(&c.cells[ci as usize]).rotate(pos as usize);
            if rng.gen_bool(0.5) {
                rel = rel.inverse();
            }
            w.extend_from_slice(&u);
            w.extend_from_slice(rel.letters());
            w.extend(u.iter().rev().map(|l| l.inv()));
        }
        let w = free_reduce(&Word(w));
        if w.is_empty() {
            continue;
        }
        if let Ok(l) = Loop::new(b, g, w) {
            if l.min_dist >= n {
                out.push(Probe {
                    label: format!("random{made}"),
                    lp: l,
                });
                made += 1;
            }
        }
    }
    out
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeOutcome {
    pub label: String,
    #[serde(rename = "loop")]
    pub lp: Loop,
    pub result: FillResult,
}

/// Fills every probe loop at level `n` outside `B(r)`.
pub fn probe_level(c: &CayleyComplexBall, r: u32, n: u32, s: &ProbeSettings, budget: &FillBudget) -> Result<Vec<ProbeOutcome>> {
    let mut out = Vec::new();
    for p in probe_loops(c, n, s) {
        let result = fill_outside(c, &p.lp, r, budget)?;
        out.push(ProbeOutcome {
            label: p.label,
            lp: p.lp,
            result,
        });
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SciParams {
    pub window: u32,
    pub probes: ProbeSettings,
    pub budget: FillBudget,
}

impl Default for SciParams {
    fn default() -> SciParams {
        SciParams {
            window: 8,
            probes: ProbeSettings::default(),
            budget: FillBudget::default(),
        }
    }
}

pub fn sci_growth_table(m: &GroupModel, r_max: u32, params: &SciParams) -> Result<GrowthTable> {
    m.presentation()?;
    let c = build_complex(build_ball(m, params.window)?)?;
    sci_growth_table_on(&c, r_max, params)
}

/// Sci growth interval per `r`: `N_high` is the least tested level at which
/// every probe loop fills outside `B(r)`, `N_low` the greatest failing one.
pub fn sci_growth_table_on(c: &CayleyComplexBall, r_max: u32, params: &SciParams) -> Result<GrowthTable> {
    let b = &c.ball;
    let mut t = GrowthTable::new(TableKind::Sci, &b.model.name);
    t.meta.insert("window".into(), b.radius().to_string());
    t.meta.insert("seed".into(), params.probes.seed.to_string());
    t.meta.insert("max_expansions".into(), params.budget.max_expansions.to_string());
    t.meta.insert("sci_candidate".into(), b.model.meta.sci_candidate.to_string());
    let top = b.radius().saturating_sub(2);
    for r in 0..=r_max {
        if r + 1 > top {
            return Err(Error::Precondition(format!("window {} too small for r = {r}", b.radius())));
        }
        let mut lo = r;
        let mut hi = None;
        let mut notes = Vec::new();
        for n in r + 1..=top {
            let outs = probe_level(c, r, n, &params.probes, &params.budget)?;
            let bad: Vec<&ProbeOutcome> = outs.iter().filter(|o| !o.result.is_filled()).collect();
            if bad.is_empty() {
                hi = Some(n);
                break;
            }
            lo = n;
            notes.push(format!("N={n}: {} {}", bad[0].label, bad[0].result.label()));
        }
        let sample = match hi {
            Some(h) => Sample {
                r,
                value: Some(h as i64),
                mode: Mode::Interval {
                    lo: lo as i64,
                    hi: h as i64,
                },
                window: b.radius(),
                note: (!notes.is_empty()).then(|| notes.join("; ")),
            },
            None => Sample {
                r,
                value: None,
                mode: Mode::LowerBound,
                window: b.radius(),
                note: Some(format!("failed at every tested N <= {top}: {}", notes.join("; "))),
            },
        };
        t.push(sample);
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "step", rename_all = "snake_case")]
pub enum SemiStep {
    Move(TaggedMove),
    /// Conjugate the loop by the ray edge from index `from` to `to`.
    Slide { from: usize, to: usize, min_dist: u32 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SemistabilityProbe {
    pub ray: GeodesicSegment,
    pub start_index: usize,
    pub base_index: usize,
    pub inner: u32,
    pub target: u32,
    /// Least distance of the final loop.
    pub achieved: u32,
    pub success: bool,
    pub word: Word,
    pub certificate: Vec<SemiStep>,
    pub expanded: usize,
}

fn edge_letter(b: &CayleyBall, u: u32, v: u32) -> Option<Letter> {
    b.neighbors(u).find(|&(_, x)| x == v).map(|(l, _)| l)
}

fn slide(b: &CayleyBall, ray: &[u32], k: usize, to: usize, w: &[Letter]) -> Option<(Vec<Letter>, u32)> {
    let e = edge_letter(b, ray[k], ray[to])?;
    let mut nw = vec![e.inv()];
    nw.extend_from_slice(w);
    nw.push(e);
    Some((nw, b.dist(ray[k]).min(b.dist(ray[to]))))
}

fn loop_min(b: &CayleyBall, base: u32, w: &[Letter]) -> u32 {
    walk(b, base, w).unwrap().iter().map(|&v| b.dist(v)).min().unwrap()
}

/// Homotopes `l` rel the ray, outside `B(n)`, towards a loop beyond
/// `target`. Tries a filling followed by sliding the base out along the
/// ray, then a best-first push by distance deficit.
pub fn semistability_probe(
    c: &CayleyComplexBall,
    ray: &GeodesicSegment,
    l: &Loop,
    n: u32,
    target: u32,
    budget: &FillBudget,
) -> Result<SemistabilityProbe> {
    let b = &c.ball;
    let rv = &ray.vertices;
    let start = rv
        .iter()
        .position(|&v| v == l.base)
        .ok_or_else(|| Error::Precondition("loop base is not on the ray".into()))?;
    if target >= b.radius() {
        return Err(Error::Precondition(format!("target {target} must be below R = {}", b.radius())));
    }
    if l.min_dist <= n {
        return Err(Error::Precondition(format!("loop touches B({n})")));
    }
    let slide_out = |mut k: usize, mut w: Vec<Letter>, f: &Filler, cert: &mut Vec<SemiStep>| {
        while k + 1 < rv.len() && loop_min(b, rv[k], &w) < target {
            let (nw, md) = slide(b, rv, k, k + 1, &w).expect("ray edges are edges");
            cert.push(SemiStep::Slide {
                from: k,
                to: k + 1,
                min_dist: md,
            });
            w = nw;
            k += 1;
            let mut verts = walk(b, rv[k], &w).unwrap();
            let mut ms = Vec::new();
            f.free_reduce_into(&mut w, &mut verts, &mut ms);
            cert.extend(ms.into_iter().map(SemiStep::Move));
        }
        (k, w)
    };
    let mut f = Filler::new(c, n);
    let mut cert = Vec::new();
    let filled = if l.is_empty() {
        Some(Vec::new())
    } else if n + 1 < b.radius() {
        match fill_outside(c, l, n, budget)? {
            FillResult::Filled { certificate } => Some(certificate.moves),
            _ => None,
        }
    } else {
        None
    };
    let (k, w) = if let Some(moves) = filled {
        cert.extend(moves.into_iter().map(SemiStep::Move));
        slide_out(start, Vec::new(), &f, &mut cert)
    } else {
        push_search(&mut f, rv, start, l, target, budget, &mut cert)
    };
    let achieved = loop_min(b, rv[k], &w);
    Ok(SemistabilityProbe {
        ray: ray.clone(),
        start_index: start,
        base_index: k,
        inner: n,
        target,
        achieved,
        success: achieved >= target,
        word: Word(w),
        certificate: cert,
        expanded: f.expanded,
    })
}

fn push_search(
    f: &mut Filler,
    rv: &[u32],
    start: usize,
    l: &Loop,
    target: u32,
    budget: &FillBudget,
    cert: &mut Vec<SemiStep>,
) -> (usize, Vec<Letter>) {
    let b = f.ball();
    let max_len = budget.max_len.unwrap_or(2 * l.len() + 8);
    let deficit = |k: usize, w: &[Letter]| -> usize {
        walk(b, rv[k], w)
            .unwrap()
            .iter()
            .map(|&v| target.saturating_sub(b.dist(v)) as usize)
            .sum()
    };
    struct Node {
        k: usize,
        word: Vec<Letter>,
        parent: usize,
        steps: Vec<SemiStep>,
    }
    let mut nodes = vec![Node {
        k: start,
        word: l.word.0.clone(),
        parent: usize::MAX,
        steps: Vec::new(),
    }];
    let mut seen: HashSet<(usize, Vec<Letter>)> = HashSet::from([(start, l.word.0.clone())]);
    let mut heap = BinaryHeap::from([Reverse((deficit(start, l.word.letters()), l.len(), 0usize))]);
    let mut best = (loop_min(b, rv[start], l.word.letters()), 0usize);
    let mut spent = 0;
    while let Some(Reverse((d, _, idx))) = heap.pop() {
        let (k, w) = (nodes[idx].k, nodes[idx].word.clone());
        let m = loop_min(b, rv[k], &w);
        if m > best.0 {
            best = (m, idx);
        }
        if d == 0 || spent >= budget.max_expansions {
            break;
        }
        spent += 1;
        f.expanded += 1;
        let mut succ: Vec<(usize, Vec<Letter>, Vec<SemiStep>)> = Vec::new();
        if k + 1 < rv.len() {
            if let Some((mut nw, md)) = slide(b, rv, k, k + 1, &w) {
                let mut steps = vec![SemiStep::Slide {
                    from: k,
                    to: k + 1,
                    min_dist: md,
                }];
                if md > f.r {
                    let mut verts = walk(b, rv[k + 1], &nw).unwrap();
                    let mut ms = Vec::new();
                    f.free_reduce_into(&mut nw, &mut verts, &mut ms);
                    steps.extend(ms.into_iter().map(SemiStep::Move));
                    succ.push((k + 1, nw, steps));
                }
            }
        }
        let verts = walk(b, rv[k], &w).unwrap();
        for pos in 0..w.len() {
            for si in f.by_first[w[pos].code()].clone() {
                let s = f.sym[si].clone();
                let sl = s.letters();
                let jmax = w[pos..].iter().zip(sl).take_while(|(x, y)| x == y).count();
                let Some(md) = f.cell_ok(verts[pos], si) else { continue };
                for split in 1..=jmax {
                    if w.len() - split + sl.len() - split > max_len {
                        continue;
                    }
                    let mut nw = w[..pos].to_vec();
                    nw.extend(sl[split..].iter().rev().map(|l| l.inv()));
                    nw.extend_from_slice(&w[pos + split..]);
                    let mut nv = walk(b, rv[k], &nw).unwrap();
                    let mut ms = vec![TaggedMove {
                        mv: Move::Cell {
                            pos,
                            relator: s.clone(),
                            split,
                        },
                        min_dist: md,
                    }];
                    f.free_reduce_into(&mut nw, &mut nv, &mut ms);
                    succ.push((k, nw, ms.into_iter().map(SemiStep::Move).collect()));
                }
            }
        }
        for (nk, nw, steps) in succ {
            if seen.insert((nk, nw.clone())) {
                let key = (deficit(nk, &nw), nw.len(), nodes.len());
                nodes.push(Node {
                    k: nk,
                    word: nw,
                    parent: idx,
                    steps,
                });
                heap.push(Reverse(key));
            }
        }
    }
    let mut chain = Vec::new();
    let mut i = best.1;
    while i != usize::MAX {
        chain.push(i);
        i = nodes[i].parent;
    }
    for &i in chain.iter().rev() {
        cert.extend(nodes[i].steps.iter().cloned());
    }
    (nodes[best.1].k, nodes[best.1].word.clone())
}

/// Replays a semistability certificate from `l`; checks that every move
/// avoids `B(n)`, the base only moves along the ray, and the final loop and
/// achieved radius match.
pub fn replay_semistability(c: &CayleyComplexBall, l: &Loop, p: &SemistabilityProbe) -> std::result::Result<(), String> {
    let b = &c.ball;
    let rv = &p.ray.vertices;
    let mut k = p.start_index;
    if rv.get(k) != Some(&l.base) {
        return Err("start is not the loop base".into());
    }
    let mut w = l.word.clone();
    for (i, st) in p.certificate.iter().enumerate() {
        match st {
            SemiStep::Move(m) => {
                let cur = Loop::new(b, rv[k], w.clone()).map_err(|e| format!("step {i}: {e}"))?;
                w = replay(c, &cur, p.inner, std::slice::from_ref(m)).map_err(|e| format!("step {i}: {e}"))?;
            }
            SemiStep::Slide { from, to, min_dist } => {
                if *from != k || *to >= rv.len() || from.abs_diff(*to) != 1 {
                    return Err(format!("step {i}: slide off the ray"));
                }
                let e = edge_letter(b, rv[*from], rv[*to]).ok_or_else(|| format!("step {i}: not an edge"))?;
                let md = b.dist(rv[*from]).min(b.dist(rv[*to]));
                if md <= p.inner || md != *min_dist {
                    return Err(format!("step {i}: slide tag"));
                }
                let mut nw = vec![e.inv()];
                nw.extend_from_slice(w.letters());
                nw.push(e);
                w = Word(nw);
                k = *to;
            }
        }
    }
    if k != p.base_index || w != p.word {
        return Err("final loop differs from the reported one".into());
    }
    let fin = Loop::new(b, rv[k], w).map_err(|e| e.to_string())?;
    if fin.min_dist != p.achieved {
        return Err(format!("achieved {} but final loop reaches {}", p.achieved, fin.min_dist));
    }
    Ok(())
}

/// A geodesic from the identity through `v`, extended outward by least
/// letters to the edge of the ball.
pub fn ray_through(b: &CayleyBall, v: u32) -> GeodesicSegment {
    let mut path = b.geodesic_from_identity(v);
    let mut cur = v;
    while let Some(u) = b.neighbors(cur).map(|(_, u)| u).find(|&u| b.dist(u) == b.dist(cur) + 1) {
        path.push(u);
        cur = u;
    }
    b.segment(path)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SemiParams {
    pub probes: ProbeSettings,
    pub budget: FillBudget,
    /// Push target; defaults to `R - 1`.
    pub target: Option<u32>,
}

/// Semistability estimate per `r`: the least tested level at which every
/// probe loop, based on the ray through its base, is pushed beyond the
/// target by a homotopy outside `B(r)`.
pub fn semistability_table_on(c: &CayleyComplexBall, r_max: u32, params: &SemiParams) -> Result<GrowthTable> {
    let b = &c.ball;
    let target = params.target.unwrap_or(b.radius() - 1);
    let mut t = GrowthTable::new(TableKind::Semistability, &b.model.name);
    t.meta.insert("window".into(), b.radius().to_string());
    t.meta.insert("target".into(), target.to_string());
    t.meta.insert("seed".into(), params.probes.seed.to_string());
    let top = b.radius().saturating_sub(2);
    for r in 0..=r_max {
        if r + 1 > top {
            return Err(Error::Precondition(format!("window {} too small for r = {r}", b.radius())));
        }
        let mut lo = r;
        let mut hi = None;
        for n in r + 1..=top {
            let mut all = true;
            for p in probe_loops(c, n, &params.probes) {
                let ray = ray_through(b, p.lp.base);
                let res = semistability_probe(c, &ray, &p.lp, r, target, &params.budget)?;
                if !res.success {
                    all = false;
                    break;
                }
            }
            if all {
                hi = Some(n);
                break;
            }
            lo = n;
        }
        t.push(match hi {
            Some(h) => Sample {
                r,
                value: Some(h as i64),
                mode: Mode::Interval {
                    lo: lo as i64,
                    hi: h as i64,
                },
                window: b.radius(),
                note: None,
            },
            None => Sample {
                r,
                value: None,
                mode: Mode::LowerBound,
                window: b.radius(),
                note: Some(format!("some probe stalled at every tested N <= {top}")),
            },
        });
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{surface2, zd};

    fn complex(m: &GroupModel, r: u32) -> CayleyComplexBall {
        build_complex(build_ball(m, r).unwrap()).unwrap()
    }

    #[test]
    fn relator_square_fills_in_one_cell() {
        let c = complex(&zd(3), 6);
        let b = &c.ball;
        let l = Loop::parse(b, "base=aaac; word=abAB").unwrap();
        assert!(l.min_dist >= 3);
        let FillResult::Filled { certificate } = fill_outside(&c, &l, 1, &FillBudget::default()).unwrap() else {
            panic!("square should fill")
        };
        assert_eq!(certificate.cell_count(), 1);
        verify_filling(&c, &l, 1, &certificate).unwrap();
    }

    #[test]
    fn z2_tracer_is_obstructed() {
        let c = complex(&zd(2), 8);
        let l = sphere_tracer(&c.ball, 4, 0, 1).unwrap();
        assert_eq!(l.min_dist, 4);
        let res = fill_outside(&c, &l, 1, &FillBudget::default()).unwrap();
        assert_eq!(
            res,
            FillResult::Obstructed {
                id: "winding".into(),
                value: 1
            }
        );
        let rev = Loop::new(&c.ball, l.base, l.word.inverse()).unwrap();
        assert_eq!(winding_number(&c.ball, &rev), Some(-1));
    }

    #[test]
    fn z3_equator_fills_outside_b1() {
        let c = complex(&zd(3), 6);
        let l = sphere_tracer(&c.ball, 3, 0, 1).unwrap();
        let FillResult::Filled { certificate } = fill_outside(&c, &l, 1, &FillBudget::default()).unwrap() else {
            panic!("equator should fill")
        };
        assert!(certificate.min_dist().unwrap() > 1);
        verify_filling(&c, &l, 1, &certificate).unwrap();
    }

    #[test]
    fn replay_rejects_bad_tags_and_inner_ball() {
        let c = complex(&zd(2), 6);
        let b = &c.ball;
        let l = Loop::parse(b, "base=aaa; word=bB").unwrap();
        let good = vec![TaggedMove {
            mv: Move::Delete { pos: 0 },
            min_dist: 3,
        }];
        assert_eq!(replay(&c, &l, 2, &good).unwrap(), Word::empty());
        assert!(replay(&c, &l, 3, &good).is_err());
        let bad = vec![TaggedMove {
            mv: Move::Delete { pos: 0 },
            min_dist: 4,
        }];
        assert!(replay(&c, &l, 2, &bad).is_err());
    }

    #[test]
    fn errors() {
        let c = complex(&zd(2), 6);
        let b = &c.ball;
        assert!(Loop::parse(b, "base=a; word=ab").is_err());
        let l = Loop::parse(b, "base=a; word=bB").unwrap();
        assert!(fill_outside(&c, &l, 1, &FillBudget::default()).is_err());
        let l = Loop::parse(b, "base=aaa; word=bB").unwrap();
        let zero = FillBudget {
            max_expansions: 0,
            max_len: None,
        };
        assert!(fill_outside(&c, &l, 1, &zero).is_err());
        assert!(fill_outside(&c, &l, 5, &FillBudget::default()).is_err());
    }

    #[test]
    fn surface_relator_conjugate_fills() {
        let c = complex(&surface2(), 5);
        let b = &c.ball;
        let l = Loop::parse(b, "base=a; word=abABcdCD").unwrap();
        let res = fill_outside(&c, &l, 0, &FillBudget::default()).unwrap();
        assert!(res.is_filled());
    }

    #[test]
    fn semistability_trivial_and_square() {
        let c = complex(&zd(3), 6);
        let b = &c.ball;
        let base = b.find(&Word(vec![Letter::gen(0); 4])).unwrap();
        let ray = ray_through(b, base);
        let l = Loop::new(b, base, Word::empty()).unwrap();
        let p = semistability_probe(&c, &ray, &l, 1, 5, &FillBudget::default()).unwrap();
        assert!(p.success);
        replay_semistability(&c, &l, &p).unwrap();
        let sq = Loop::parse(b, "base=aaaa; word=bcBC").unwrap();
        let p = semistability_probe(&c, &ray, &sq, 1, 5, &FillBudget::default()).unwrap();
        assert!(p.success && p.achieved >= 5);
        replay_semistability(&c, &sq, &p).unwrap();
        let off = Loop::parse(b, "base=bbbb; word=acAC").unwrap();
        assert!(semistability_probe(&c, &ray, &off, 1, 5, &FillBudget::default()).is_err());
    }
}
