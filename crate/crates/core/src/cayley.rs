//! Finite balls in Cayley graphs and Cayley 2-complexes.
//!
//! Vertices are discovered breadth-first, sphere by sphere, scanning each
//! sphere in index order and letters in alphabet order. The first path that
//! reaches an element is therefore its shortlex-least geodesic, which is used
//! as the vertex label, and vertex indices follow shortlex order of labels.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, VecDeque};
use std::hash::{Hash, Hasher};
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GroupModel, State};
use crate::word::{Letter, Word};

/// Missing neighbor (endpoint outside the ball).
pub const NONE: u32 = u32::MAX;

pub const DEFAULT_MAX_VERTICES: usize = 12_000_000;

#[derive(Default)]
struct StateIndex {
    heads: HashMap<u64, u32>,
    next: Vec<u32>,
    data: Vec<i64>,
    offsets: Vec<usize>,
}

fn fingerprint(s: &[i64]) -> u64 {
    let mut h = DefaultHasher::new();
    s.hash(&mut h);
    h.finish()
}

impl StateIndex {
    fn state(&self, v: u32) -> &[i64] {
        let v = v as usize;
        &self.data[self.offsets[v]..self.offsets[v + 1]]
    }

    fn candidates<'a>(&'a self, s: &'a [i64]) -> impl Iterator<Item = u32> + 'a {
        let mut cur = self.heads.get(&fingerprint(s)).copied().unwrap_or(NONE);
        std::iter::from_fn(move || {
            while cur != NONE {
                let v = cur;
                cur = self.next[v as usize];
                if self.state(v) == s {
                    return Some(v);
                }
            }
            None
        })
    }

    fn push(&mut self, s: &[i64]) -> u32 {
        let v = self.next.len() as u32;
        if self.offsets.is_empty() {
            self.offsets.push(0);
        }
        self.data.extend_from_slice(s);
        self.offsets.push(self.data.len());
        let head = self.heads.entry(fingerprint(s)).or_insert(NONE);
        self.next.push(*head);
        *head = v;
        v
    }
}

/// The radius-R ball around the identity.
pub struct CayleyBall {
    pub model: GroupModel,
    radius: u32,
    rank2: usize,
    dist: Vec<u32>,
    parent: Vec<u32>,
    parent_letter: Vec<u8>,
    adj: Vec<u32>,
    sphere_start: Vec<usize>,
    index: StateIndex,
}

impl std::fmt::Debug for CayleyBall {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CayleyBall({}, R={}, {} vertices)", self.model.name, self.radius, self.len())
    }
}

/// Builds B(R) with the default vertex budget.
pub fn build_ball(m: &GroupModel, radius: u32) -> Result<CayleyBall> {
    build_ball_with_budget(m, radius, DEFAULT_MAX_VERTICES)
}

pub fn build_ball_with_budget(m: &GroupModel, radius: u32, max_vertices: usize) -> Result<CayleyBall> {
    build(m, radius, max_vertices, false)
}

/// Builds the largest ball of radius at most `radius` whose predicted size
/// (geometric extrapolation of the last two spheres) stays within the budget.
pub fn build_ball_capped(m: &GroupModel, radius: u32, max_vertices: usize) -> Result<CayleyBall> {
    build(m, radius, max_vertices, true)
}

fn build(m: &GroupModel, radius: u32, max_vertices: usize, capped: bool) -> Result<CayleyBall> {
    if !m.can_enumerate() {
        return Err(Error::Precondition(format!(
            "model '{}' has no enumerable states",
            m.name
        )));
    }
    let rank2 = 2 * m.rank();
    let mut b = CayleyBall {
        model: m.clone(),
        radius,
        rank2,
        dist: vec![0],
        parent: vec![NONE],
        parent_letter: vec![0],
        adj: vec![NONE; rank2],
        sphere_start: vec![0, 1],
        index: StateIndex::default(),
    };
    b.index.push(&m.identity_state());
    let faithful = m.states_faithful();
    let mut radius = radius;
    for level in 0..=radius {
        if level > radius {
            break;
        }
        let range = b.sphere_start[level as usize]..b.dist.len();
        if capped && level < radius {
            let cur = range.len() as f64;
            let prev = if level == 0 { 1.0 } else { (b.sphere_start[level as usize] - b.sphere_start[level as usize - 1]) as f64 };
            let predicted = b.dist.len() as f64 + cur * (cur / prev).max(1.0);
            if predicted > max_vertices as f64 {
                radius = level;
                b.radius = level;
            }
        }
        for v in range {
            let v = v as u32;
            for code in 0..rank2 {
                if b.adj[v as usize * rank2 + code] != NONE {
                    continue;
                }
                let l = Letter::from_code(code);
                let s = m.act(&b.index.state(v).to_vec(), l);
                let found = b.lookup(&s, faithful, || {
                    let mut w = b.word(v);
                    w.push(l);
                    w
                });
                let u = match found {
                    Some(u) => u,
                    None if level < radius => {
                        if b.dist.len() >= max_vertices {
                            return Err(Error::BallBudget {
                                radius: level + 1,
                                vertices: b.dist.len(),
                            });
                        }
                        let u = b.index.push(&s);
                        b.dist.push(level + 1);
                        b.parent.push(v);
                        b.parent_letter.push(code as u8);
                        b.adj.extend(std::iter::repeat(NONE).take(rank2));
                        u
                    }
                    None => continue,
                };
                b.adj[v as usize * rank2 + code] = u;
                b.adj[u as usize * rank2 + l.inv().code()] = v;
            }
        }
        if level < radius {
            b.sphere_start.push(b.dist.len());
        }
    }
    Ok(b)
}

impl CayleyBall {
    fn lookup<F: FnOnce() -> Word>(&self, s: &State, faithful: bool, witness: F) -> Option<u32> {
        if faithful {
            return self.index.candidates(s).next();
        }
        let mut cands = self.index.candidates(s).peekable();
        cands.peek()?;
        let w = witness();
        cands.find(|&c| self.model.confirm_equal(&w, &self.word(c)))
    }

    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.dist.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dist.is_empty()
    }

    pub fn identity(&self) -> u32 {
        0
    }

    /// Number of letters (twice the rank).
    pub fn degree(&self) -> usize {
        self.rank2
    }

    pub fn dist(&self, v: u32) -> u32 {
        self.dist[v as usize]
    }

    pub fn dists(&self) -> &[u32] {
        &self.dist
    }

    pub fn neighbor(&self, v: u32, l: Letter) -> Option<u32> {
        let u = self.adj[v as usize * self.rank2 + l.code()];
        (u != NONE).then_some(u)
    }

    /// Raw neighbor row indexed by letter code, `NONE` for missing neighbors.
    pub fn row(&self, v: u32) -> &[u32] {
        let i = v as usize * self.rank2;
        &self.adj[i..i + self.rank2]
    }

    pub fn neighbors(&self, v: u32) -> impl Iterator<Item = (Letter, u32)> + '_ {
        self.row(v)
            .iter()
            .enumerate()
            .filter(|(_, &u)| u != NONE)
            .map(|(c, &u)| (Letter::from_code(c), u))
    }

    /// Shortlex-least geodesic word of a vertex.
    pub fn word(&self, v: u32) -> Word {
        let mut out = Vec::with_capacity(self.dist(v) as usize);
        let mut cur = v;
        while cur != 0 {
            out.push(Letter::from_code(self.parent_letter[cur as usize] as usize));
            cur = self.parent[cur as usize];
        }
        out.reverse();
        Word(out)
    }

    pub fn parent(&self, v: u32) -> Option<u32> {
        let p = self.parent[v as usize];
        (p != NONE).then_some(p)
    }

    pub fn state(&self, v: u32) -> State {
        self.index.state(v).to_vec()
    }

    /// Vertex representing the given state, if it lies in the ball.
    pub fn find_state(&self, s: &State, witness: &Word) -> Option<u32> {
        self.lookup(s, self.model.states_faithful(), || witness.clone())
    }

    /// Vertex for the element `v·w`, following edges while possible and
    /// falling back to a state lookup once the path leaves the ball.
    pub fn locate(&self, v: u32, w: &[Letter]) -> Option<u32> {
        let mut cur = v;
        for (i, &l) in w.iter().enumerate() {
            match self.neighbor(cur, l) {
                Some(u) => cur = u,
                None => {
                    let mut s = self.state(cur);
                    for &x in &w[i..] {
                        s = self.model.act(&s, x);
                    }
                    let mut wit = self.word(cur);
                    wit.0.extend_from_slice(&w[i..]);
                    return self.find_state(&s, &wit);
                }
            }
        }
        Some(cur)
    }

    pub fn find(&self, w: &Word) -> Option<u32> {
        self.locate(0, w.letters())
    }

    /// Index range of sphere `r`.
    pub fn sphere(&self, r: u32) -> Result<Range<u32>> {
        if r > self.radius {
            return Err(Error::Precondition(format!(
                "sphere radius {r} exceeds ball radius {}",
                self.radius
            )));
        }
        let r = r as usize;
        let start = self.sphere_start[r];
        let end = self.sphere_start.get(r + 1).copied().unwrap_or(self.dist.len());
        Ok(start as u32..end as u32)
    }

    /// Vertices with `dist ≤ r` form the prefix `0..ball_end(r)`.
    pub fn ball_end(&self, r: u32) -> u32 {
        self.sphere_start
            .get(r as usize + 1)
            .copied()
            .unwrap_or(self.dist.len()) as u32
    }

    pub fn sphere_sizes(&self) -> Vec<usize> {
        (0..=self.radius).map(|r| self.sphere(r).unwrap().len()).collect()
    }

    /// Multi-source BFS over vertices accepted by `allowed`, up to `max_depth`.
    pub fn bfs<F: Fn(u32) -> bool>(&self, sources: &[u32], allowed: F, max_depth: u32) -> Vec<u32> {
        let mut d = vec![NONE; self.len()];
        let mut q = VecDeque::new();
        for &s in sources {
            if allowed(s) && d[s as usize] == NONE {
                d[s as usize] = 0;
                q.push_back(s);
            }
        }
        while let Some(v) = q.pop_front() {
            let dv = d[v as usize];
            if dv >= max_depth {
                continue;
            }
            for &u in self.row(v) {
                if u != NONE && d[u as usize] == NONE && allowed(u) {
                    d[u as usize] = dv + 1;
                    q.push_back(u);
                }
            }
        }
        d
    }

    /// Bounded BFS from one vertex, returning distances of reached vertices.
    pub fn local_bfs<F: Fn(u32) -> bool>(&self, src: u32, max_depth: u32, allowed: F) -> HashMap<u32, u32> {
        let mut d = HashMap::new();
        if !allowed(src) {
            return d;
        }
        d.insert(src, 0);
        let mut q = VecDeque::from([src]);
        while let Some(v) = q.pop_front() {
            let dv = d[&v];
            if dv >= max_depth {
                continue;
            }
            for &u in self.row(v) {
                if u != NONE && !d.contains_key(&u) && allowed(u) {
                    d.insert(u, dv + 1);
                    q.push_back(u);
                }
            }
        }
        d
    }

    /// Shortest path from `u` to `v` inside the allowed subgraph; ties are
    /// broken toward the least letter at each step from `u`.
    pub fn shortest_path<F: Fn(u32) -> bool>(&self, u: u32, v: u32, allowed: F, max_len: u32) -> Option<Vec<u32>> {
        let from_v = self.local_bfs(v, max_len, &allowed);
        let mut len = *from_v.get(&u)?;
        let mut path = vec![u];
        let mut cur = u;
        while len > 0 {
            let next = self
                .row(cur)
                .iter()
                .copied()
                .find(|&x| x != NONE && from_v.get(&x) == Some(&(len - 1)))?;
            path.push(next);
            cur = next;
            len -= 1;
        }
        Some(path)
    }

    /// Ball-graph distance between two vertices and whether it is certainly
    /// the group distance.
    pub fn pair_distance(&self, u: u32, v: u32) -> Result<(u32, bool)> {
        if u as usize >= self.len() || v as usize >= self.len() {
            return Err(Error::Precondition("vertex outside the ball".into()));
        }
        let d = self.bfs(&[u], |_| true, u32::MAX)[v as usize];
        if d == NONE {
            return Err(Error::NotFound("vertices are in different components".into()));
        }
        // a true geodesic is no longer than d, so it stays within (du + dv + d) / 2
        let exact = (self.dist(u) + self.dist(v) + d) / 2 <= self.radius;
        Ok((d, exact))
    }

    /// Shortlex-least geodesic from the identity to `v` as a vertex path.
    pub fn geodesic_from_identity(&self, v: u32) -> Vec<u32> {
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent(cur) {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }

    /// A segment through `v` that is geodesic in the ball graph, extending
    /// up to `n` steps on each side; the longest available one is returned.
    pub fn geodesic_through(&self, v: u32, n: u32) -> Result<GeodesicSegment> {
        if self.dist(v) + n > self.radius {
            return Err(Error::Precondition(format!(
                "dist(v) + n = {} exceeds radius {}",
                self.dist(v) + n,
                self.radius
            )));
        }
        if n == 0 {
            return Ok(self.segment(vec![v]));
        }
        let around = self.local_bfs(v, n, |_| true);
        let mut shells: Vec<Vec<u32>> = vec![Vec::new(); n as usize + 1];
        let mut keys: Vec<(&u32, &u32)> = around.iter().collect();
        keys.sort();
        for (&x, &d) in keys {
            shells[d as usize].push(x);
        }
        for total in (1..=2 * n).rev() {
            for back in (0..=n.min(total)).rev() {
                let fwd = total - back;
                if fwd > n {
                    continue;
                }
                for &x in &shells[back as usize] {
                    let from_x = self.local_bfs(x, total, |_| true);
                    if let Some(&y) = shells[fwd as usize]
                        .iter()
                        .find(|&&y| from_x.get(&y) == Some(&total))
                    {
                        let mut path = self.shortest_path(x, v, |_| true, back).expect("x is within n of v");
                        let tail = self.shortest_path(v, y, |_| true, fwd).expect("y is within n of v");
                        path.extend_from_slice(&tail[1..]);
                        return Ok(self.segment(path));
                    }
                }
            }
        }
        Err(Error::NotFound("vertex is isolated".into()))
    }

    pub fn segment(&self, vertices: Vec<u32>) -> GeodesicSegment {
        let first = vertices[0];
        let last = *vertices.last().unwrap();
        GeodesicSegment {
            start_dist: self.dist(first),
            end_dist: self.dist(last),
            vertices,
        }
    }

    /// Whether a vertex path is a geodesic of the ball graph.
    pub fn is_geodesic(&self, path: &[u32]) -> bool {
        if path.windows(2).any(|e| !self.row(e[0]).contains(&e[1])) {
            return false;
        }
        let d = self.local_bfs(path[0], path.len() as u32, |_| true);
        d.get(path.last().unwrap()) == Some(&(path.len() as u32 - 1))
    }

    pub fn export(&self) -> BallExport {
        let alpha = self.model.alphabet();
        BallExport {
            model: self.model.name.clone(),
            radius: self.radius,
            vertex_count: self.len(),
            vertices: (0..self.len() as u32)
                .map(|v| VertexRecord {
                    index: v,
                    word: word_or_one(&alpha.format(&self.word(v))),
                    dist: self.dist(v),
                    neighbors: self
                        .neighbors(v)
                        .map(|(l, u)| (alpha.letter_name(l), u))
                        .collect(),
                })
                .collect(),
        }
    }

    /// Plain-text adjacency listing: a header then `index word dist letter=vertex ...`.
    pub fn export_text(&self) -> String {
        let e = self.export();
        let mut out = format!(
            "# cayley ball\nmodel: {}\nradius: {}\nvertices: {}\n",
            e.model, e.radius, e.vertex_count
        );
        for r in &e.vertices {
            let nb: Vec<String> = r.neighbors.iter().map(|(l, u)| format!("{l}={u}")).collect();
            out.push_str(&format!("{}\t{}\t{}\t{}\n", r.index, r.word, r.dist, nb.join(" ")));
        }
        out
    }
}

fn word_or_one(s: &str) -> String {
    if s.is_empty() {
        "1".into()
    } else {
        s.to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeodesicSegment {
    pub vertices: Vec<u32>,
    pub start_dist: u32,
    pub end_dist: u32,
}

impl GeodesicSegment {
    pub fn len(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.len() <= 1
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VertexRecord {
    pub index: u32,
    pub word: String,
    pub dist: u32,
    pub neighbors: Vec<(String, u32)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BallExport {
    pub model: String,
    pub radius: u32,
    pub vertex_count: usize,
    pub vertices: Vec<VertexRecord>,
}

/// One relator translate `g·r`, as the closed vertex path it traces.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub base: u32,
    pub relator: usize,
    /// Boundary vertices, first repeated at the end.
    pub vertices: Vec<u32>,
}

/// A ball together with every relator 2-cell whose boundary lies inside it.
#[derive(Debug)]
pub struct CayleyComplexBall {
    pub ball: CayleyBall,
    pub relators: Vec<Word>,
    pub cells: Vec<Cell>,
    /// Cells through each vertex, as (cell index, position on boundary).
    incidence: Vec<Vec<(u32, u16)>>,
}

fn period(r: &[Letter]) -> usize {
    let n = r.len();
    (1..=n)
        .find(|&p| n % p == 0 && (0..n).all(|i| r[i] == r[(i + p) % n]))
        .unwrap_or(n)
}

pub fn build_complex(ball: CayleyBall) -> Result<CayleyComplexBall> {
    let relators = ball.model.presentation()?.relators.clone();
    build_complex_with(ball, relators)
}

/// Complex over an explicit relator list (for instance an augmented one).
pub fn build_complex_with(ball: CayleyBall, relators: Vec<Word>) -> Result<CayleyComplexBall> {
    let mut cells = Vec::new();
    for (ri, r) in relators.iter().enumerate() {
        let p = period(r.letters());
        for g in 0..ball.len() as u32 {
            let mut path = vec![g];
            let mut cur = g;
            let mut inside = true;
            for &l in r.letters() {
                match ball.neighbor(cur, l) {
                    Some(u) => {
                        cur = u;
                        path.push(u);
                    }
                    None => {
                        inside = false;
                        break;
                    }
                }
            }
            if !inside {
                continue;
            }
            if cur != g {
                return Err(Error::UnsoundOracle(format!("relator {ri} does not close at vertex {g}")));
            }
            // r = s^k: bases along the boundary at multiples of the period give the same cell
            let canonical = (p..r.len()).step_by(p).all(|i| path[i] > g);
            if canonical {
                cells.push(Cell {
                    base: g,
                    relator: ri,
                    vertices: path,
                });
            }
        }
    }
    let mut incidence = vec![Vec::new(); ball.len()];
    for (ci, c) in cells.iter().enumerate() {
        for (pos, &v) in c.vertices[..c.vertices.len() - 1].iter().enumerate() {
            incidence[v as usize].push((ci as u32, pos as u16));
        }
    }
    Ok(CayleyComplexBall {
        ball,
        relators,
        cells,
        incidence,
    })
}

impl CayleyComplexBall {
    pub fn cells_at(&self, v: u32) -> &[(u32, u16)] {
        &self.incidence[v as usize]
    }

    pub fn cell_word(&self, c: &Cell) -> &Word {
        &self.relators[c.relator]
    }

    pub fn min_cell_dist(&self, c: &Cell) -> u32 {
        c.vertices.iter().map(|&v| self.ball.dist(v)).min().unwrap_or(0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zoo::{free, zd, zoo_group};

    #[test]
    fn z2_sphere_sizes() {
        let b = build_ball(&zd(2), 3).unwrap();
        assert_eq!(b.sphere_sizes(), vec![1, 4, 8, 12]);
        assert_eq!(b.len(), 25);
    }

    #[test]
    fn free2_ball_size() {
        let b = build_ball(&free(2), 3).unwrap();
        assert_eq!(b.len(), 53);
    }

    #[test]
    fn radius_zero() {
        let b = build_ball(&zd(2), 0).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b.neighbors(0).count(), 0);
    }

    #[test]
    fn labels_are_shortlex_geodesics() {
        let m = zd(2);
        let b = build_ball(&m, 3).unwrap();
        let v = b.find(&m.parse_word("bab").unwrap()).unwrap();
        assert_eq!(m.format(&b.word(v)), "abb");
        for v in 1..b.len() as u32 {
            assert!(b.word(v - 1) < b.word(v));
        }
    }

    #[test]
    fn pair_distances() {
        let m = zd(2);
        let b = build_ball(&m, 4).unwrap();
        let u = b.find(&m.parse_word("aa").unwrap()).unwrap();
        let v = b.find(&m.parse_word("bb").unwrap()).unwrap();
        assert_eq!(b.pair_distance(u, v).unwrap(), (4, true));
        assert_eq!(b.pair_distance(u, u).unwrap(), (0, true));

        let f = free(2);
        let b = build_ball(&f, 3).unwrap();
        let u = b.find(&f.parse_word("aba").unwrap()).unwrap();
        let v = b.find(&f.parse_word("BAB").unwrap()).unwrap();
        assert_eq!(b.pair_distance(u, v).unwrap(), (6, false));
    }

    #[test]
    fn geodesic_through_examples() {
        let m = zd(2);
        let b = build_ball(&m, 6).unwrap();
        let v = b.find(&m.parse_word("aa").unwrap()).unwrap();
        let seg = b.geodesic_through(v, 2).unwrap();
        assert_eq!(seg.len(), 4);
        assert_eq!(seg.vertices[2], v);
        assert!(b.is_geodesic(&seg.vertices));
        assert_eq!(b.geodesic_through(0, 0).unwrap().vertices, vec![0]);

        let f = free(2);
        let b = build_ball(&f, 5).unwrap();
        let v = b.find(&f.parse_word("ab").unwrap()).unwrap();
        let seg = b.geodesic_through(v, 2).unwrap();
        assert_eq!(seg.len(), 4);
        assert!(b.is_geodesic(&seg.vertices));
    }

    #[test]
    fn complex_cells() {
        let b = build_ball(&zd(2), 2).unwrap();
        let c = build_complex(b).unwrap();
        // unit squares with all four corners in the l1 ball of radius 2
        assert_eq!(c.cells.len(), 4);
        let b = build_ball(&zoo_group("racg:pentagon").unwrap(), 2).unwrap();
        let c = build_complex(b).unwrap();
        // aa-type cells counted once per edge
        let involution_cells = c.cells.iter().filter(|x| x.vertices.len() == 3).count();
        let edges_inside = (0..c.ball.len() as u32)
            .flat_map(|v| c.ball.neighbors(v).filter(move |(l, u)| !l.is_inverse() && v < *u))
            .count();
        assert_eq!(involution_cells, edges_inside);
    }

    #[test]
    fn locate_beyond_ball() {
        let m = zd(2);
        let b = build_ball(&m, 2).unwrap();
        let w = m.parse_word("aaabAAAB").unwrap();
        assert_eq!(b.find(&w), b.find(&m.parse_word("1").unwrap()));
        assert_eq!(b.find(&m.parse_word("aaa").unwrap()), None);
    }

    #[test]
    fn export_is_stable() {
        let b = build_ball(&zd(2), 1).unwrap();
        let t = b.export_text();
        assert!(t.starts_with("# cayley ball\nmodel: Zd:2\nradius: 1\nvertices: 5\n0\t1\t0\ta=1 A=2 b=3 B=4\n"));
        assert_eq!(t, build_ball(&zd(2), 1).unwrap().export_text());
    }
}
