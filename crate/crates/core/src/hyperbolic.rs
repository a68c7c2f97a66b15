//! Hyperbolicity data on balls: slimness of geodesic triangles, the ray
//! constant, connecting paths outside balls, and the fan of rays and level
//! paths used to push loops outward.
//!
//! Here "outside `B(ρ)`" means `dist >= ρ`, so that points on the sphere of
//! radius `ρ` themselves qualify.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cayley::{CayleyBall, CayleyComplexBall, GeodesicSegment, NONE};
use crate::error::{Error, Result};
use crate::filling::{fill_outside, FillBudget, FillResult, Loop};
use crate::word::{free_reduce, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "sampling", rename_all = "snake_case")]
pub enum DeltaSampling {
    /// All triangles `(1, x, y)` with `x, y` in `B(rho)`.
    Exhaustive { rho: u32 },
    /// `count` random such triangles.
    Sampled { rho: u32, count: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaEstimate {
    pub value: u32,
    pub description: String,
    pub triangles: usize,
    /// A triangle `(1, x, y)` realising the maximum.
    pub witness: Option<(u32, u32)>,
}

/// Reusable bounded multi-source BFS over a ball.
struct Scratch {
    d: Vec<u32>,
    touched: Vec<u32>,
    q: VecDeque<u32>,
}

impl Scratch {
    fn new(n: usize) -> Scratch {
        Scratch {
            d: vec![NONE; n],
            touched: Vec::new(),
            q: VecDeque::new(),
        }
    }

    fn run(&mut self, b: &CayleyBall, sources: &[u32], depth: u32) {
        for &v in &self.touched {
            self.d[v as usize] = NONE;
        }
        self.touched.clear();
        self.q.clear();
        for &s in sources {
            if self.d[s as usize] == NONE {
                self.d[s as usize] = 0;
                self.touched.push(s);
                self.q.push_back(s);
            }
        }
        while let Some(v) = self.q.pop_front() {
            let dv = self.d[v as usize];
            if dv >= depth {
                continue;
            }
            for &u in b.row(v) {
                if u != NONE && self.d[u as usize] == NONE {
                    self.d[u as usize] = dv + 1;
                    self.touched.push(u);
                    self.q.push_back(u);
                }
            }
        }
    }
}

fn side(b: &CayleyBall, x: u32, y: u32) -> Option<Vec<u32>> {
    let g = b.find(&free_reduce(&b.word(x).inverse().concat(&b.word(y))))?;
    let mut path = vec![x];
    let mut cur = x;
    for &l in b.word(g).letters() {
        cur = b.neighbor(cur, l)?;
        path.push(cur);
    }
    (cur == y).then_some(path)
}

/// Slimness defect of the triangle `(1, x, y)` with shortlex-least sides, or
/// `None` when the side `x -> y` is not available in the ball.
pub fn triangle_defect(b: &CayleyBall, x: u32, y: u32) -> Option<u32> {
    let mut s = Scratch::new(b.len());
    defect_with(b, x, y, &mut s)
}

fn defect_with(b: &CayleyBall, x: u32, y: u32, s: &mut Scratch) -> Option<u32> {
    let sides = [b.geodesic_from_identity(x), b.geodesic_from_identity(y), side(b, x, y)?];
    let mut worst = 0;
    for i in 0..3 {
        let others: Vec<u32> = (0..3).filter(|&j| j != i).flat_map(|j| sides[j].iter().copied()).collect();
        let depth = sides[i].len() as u32 / 2 + 1;
        s.run(b, &others, depth);
        for &z in &sides[i] {
            let d = s.d[z as usize];
            worst = worst.max(if d == NONE { depth } else { d });
        }
    }
    Some(worst)
}

pub fn estimate_delta(b: &CayleyBall, sampling: DeltaSampling) -> Result<DeltaEstimate> {
    let rho = match sampling {
        DeltaSampling::Exhaustive { rho } | DeltaSampling::Sampled { rho, .. } => rho,
    };
    if rho > b.radius() {
        return Err(Error::Precondition(format!("rho = {rho} exceeds R = {}", b.radius())));
    }
    let end = b.ball_end(rho);
    let mut s = Scratch::new(b.len());
    let mut best = (0, None);
    let mut count = 0;
    let mut visit = |x: u32, y: u32, count: &mut usize| {
        if let Some(d) = defect_with(b, x, y, &mut s) {
            *count += 1;
            if d > best.0 || best.1.is_none() {
                best = (d.max(best.0), if d >= best.0 { Some((x, y)) } else { best.1 });
            }
        }
    };
    let description = match sampling {
        DeltaSampling::Exhaustive { .. } => {
            for x in 0..end {
                for y in 0..end {
                    visit(x, y, &mut count);
                }
            }
            format!("exhaustive: triangles (1, x, y) with x, y in B({rho}), R = {}", b.radius())
        }
        DeltaSampling::Sampled { count: k, seed, .. } => {
            if k == 0 {
                return Err(Error::Precondition("sample count must be positive".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..k {
                let x = rng.gen_range(0..end);
                let y = rng.gen_range(0..end);
                visit(x, y, &mut count);
            }
            format!("sampled: {k} triangles (1, x, y) with x, y in B({rho}), seed {seed}, R = {}", b.radius())
        }
    };
    if count == 0 {
        return Err(Error::NotFound("no triangle with ball-exact sides".into()));
    }
    Ok(DeltaEstimate {
        value: best.0,
        description,
        triangles: count,
        witness: best.1,
    })
}

/// Vertices lying on a geodesic from the identity to the boundary sphere,
/// with distances to that set.
pub struct RaySet<'a> {
    b: &'a CayleyBall,
    member: Vec<bool>,
    dist: Vec<u32>,
    toward: Vec<u32>,
}

impl<'a> RaySet<'a> {
    pub fn new(b: &'a CayleyBall) -> RaySet<'a> {
        let n = b.len();
        let mut member = vec![false; n];
        for v in (0..n as u32).rev() {
            member[v as usize] = b.dist(v) == b.radius()
                || b.row(v).iter().any(|&u| u != NONE && b.dist(u) == b.dist(v) + 1 && member[u as usize]);
        }
        let mut dist = vec![NONE; n];
        let mut toward = vec![NONE; n];
        let mut q = VecDeque::new();
        for v in 0..n as u32 {
            if member[v as usize] {
                dist[v as usize] = 0;
                toward[v as usize] = v;
                q.push_back(v);
            }
        }
        while let Some(v) = q.pop_front() {
            for &u in b.row(v) {
                if u != NONE && dist[u as usize] == NONE {
                    dist[u as usize] = dist[v as usize] + 1;
                    toward[u as usize] = v;
                    q.push_back(u);
                }
            }
        }
        RaySet { b, member, dist, toward }
    }

    pub fn contains(&self, v: u32) -> bool {
        self.member[v as usize]
    }

    pub fn distance(&self, v: u32) -> u32 {
        self.dist[v as usize]
    }

    /// Path from `v` to a nearest member.
    pub fn path_to(&self, v: u32) -> Vec<u32> {
        let mut out = vec![v];
        let mut cur = v;
        while !self.member[cur as usize] {
            cur = self.toward[cur as usize];
            out.push(cur);
        }
        out
    }

    /// Geodesic from the identity through member `y` to the boundary sphere.
    pub fn ray_through(&self, y: u32) -> Option<GeodesicSegment> {
        if !self.contains(y) {
            return None;
        }
        let b = self.b;
        let mut path = b.geodesic_from_identity(y);
        let mut cur = y;
        while b.dist(cur) < b.radius() {
            cur = b
                .row(cur)
                .iter()
                .copied()
                .find(|&u| u != NONE && b.dist(u) == b.dist(cur) + 1 && self.member[u as usize])?;
            path.push(cur);
        }
        Some(b.segment(path))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RayConstant {
    pub value: u32,
    pub margin: u32,
    /// A vertex realising the maximum.
    pub witness: u32,
    pub members: usize,
}

/// Largest distance from a vertex of `B(R - margin)` to the set of vertices
/// on geodesics from the identity to the sphere of radius `R`.
pub fn ray_constant(b: &CayleyBall, margin: u32) -> Result<RayConstant> {
    if margin >= b.radius() {
        return Err(Error::Precondition(format!("margin {margin} must be below R = {}", b.radius())));
    }
    if b.sphere(b.radius())?.is_empty() {
        return Err(Error::Precondition("boundary sphere is empty".into()));
    }
    let ys = RaySet::new(b);
    let end = b.ball_end(b.radius() - margin);
    let (value, witness) = (0..end).map(|v| (ys.distance(v), v)).max_by_key(|&(d, v)| (d, std::cmp::Reverse(v))).unwrap();
    Ok(RayConstant {
        value,
        margin,
        witness,
        members: ys.member.iter().filter(|&&m| m).count(),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CpPair {
    pub x: u32,
    pub y: u32,
    pub distance: u32,
    /// Shortest complement path length, `None` when unreachable.
    pub path_len: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CpReport {
    pub m: u32,
    pub c: u32,
    pub level: u32,
    pub l_hat: u32,
    pub pairs: Vec<CpPair>,
    pub failures: Vec<(u32, u32)>,
    /// Pairs within `M` in the ball graph whose distance is not certainly exact.
    pub skipped: usize,
}

/// Shortest path between `x` and `y` through vertices with `dist >= floor`.
pub fn complement_path(b: &CayleyBall, x: u32, y: u32, floor: u32, max_len: u32) -> Option<Vec<u32>> {
    if b.dist(x) < floor || b.dist(y) < floor {
        return None;
    }
    b.shortest_path(x, y, |v| b.dist(v) >= floor, max_len)
}

/// For all pairs on the sphere of radius `level` at exact distance at most
/// `M`, the shortest path avoiding the open ball of radius `level - c`.
pub fn cp_table(b: &CayleyBall, m: u32, c: u32, level: u32) -> Result<CpReport> {
    if !(c < level && level < b.radius()) {
        return Err(Error::Precondition(format!(
            "need c < R' <= R - 1, got c = {c}, R' = {level}, R = {}",
            b.radius()
        )));
    }
    let floor = level - c;
    let sphere: Vec<u32> = b.sphere(level)?.collect();
    let mut pairs = Vec::new();
    let mut failures = Vec::new();
    let mut skipped = 0;
    let mut l_hat = 0;
    for (i, &x) in sphere.iter().enumerate() {
        let full = b.bfs(&[x], |_| true, m);
        let outside = b.bfs(&[x], |v| b.dist(v) >= floor, u32::MAX);
        for &y in &sphere[i..] {
            let d = full[y as usize];
            if d == NONE || d > m {
                continue;
            }
            if (b.dist(x) + b.dist(y) + d) / 2 > b.radius() {
                skipped += 1;
                continue;
            }
            let len = outside[y as usize];
            let path_len = (len != NONE).then_some(len);
            match path_len {
                Some(l) => l_hat = l_hat.max(l),
                None => failures.push((x, y)),
            }
            pairs.push(CpPair {
                x,
                y,
                distance: d,
                path_len,
            });
        }
    }
    Ok(CpReport {
        m,
        c,
        level,
        l_hat,
        pairs,
        failures,
        skipped,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanParams {
    pub m: u32,
    pub c: u32,
    pub l: u32,
    pub delta: u32,
}

/// A level-`i+1` ray chosen near vertex `k` of a level-`i` segment.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Anchor {
    /// Index into the fan's ray pool.
    pub ray: usize,
    /// Closest ray point to the segment vertex.
    pub y: u32,
    /// Geodesic from the segment vertex to `y`.
    pub beta: Vec<u32>,
    /// Ray point with `dist >= r + i + 1` within `2c + 1` of `y`.
    pub z: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanLevel {
    pub radius: u32,
    /// Ray pool indices of the marked points, in order along `f_i`.
    pub rays: Vec<usize>,
    /// `segments[j]` runs from marked point `j` to marked point `j + 1`.
    pub segments: Vec<Vec<u32>>,
    /// Anchors of the next level: one per vertex of each segment.
    pub anchors: Vec<Vec<Anchor>>,
}

impl FanLevel {
    /// The path `f_i` as one vertex list.
    pub fn path(&self) -> Vec<u32> {
        let mut out: Vec<u32> = Vec::new();
        for s in &self.segments {
            for &v in s {
                if out.last() != Some(&v) {
                    out.push(v);
                }
            }
        }
        out
    }

    pub fn marked(&self, pool: &[GeodesicSegment]) -> Vec<u32> {
        self.rays.iter().map(|&i| pool[i].vertices[self.radius as usize]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanChecks {
    /// `f_i` avoids the open ball of radius `r + i - c`.
    pub outside: Vec<bool>,
    /// Consecutive marked points on `f_i` are at most `M` apart.
    pub marked_within_m: Vec<bool>,
    pub max_marked_gap: Vec<u32>,
    pub max_segment_len: u32,
}

impl FanChecks {
    pub fn all_pass(&self) -> bool {
        self.outside.iter().all(|&x| x) && self.marked_within_m.iter().all(|&x| x)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fan {
    pub r: u32,
    pub p: u32,
    pub q: u32,
    pub params: FanParams,
    pub pool: Vec<GeodesicSegment>,
    pub levels: Vec<FanLevel>,
    /// Geodesic arcs from `p` to `γ0(r)` and from `q` to `γ1(r)`.
    pub p_arc: Vec<u32>,
    pub q_arc: Vec<u32>,
    pub checks: FanChecks,
}

impl Fan {
    pub fn depth(&self) -> u32 {
        self.levels.len() as u32 - 1
    }

    /// The loop `P, γ0[r, r+N], f_N, γ1[r, r+N]^-1, Q^-1, qp` as vertices.
    pub fn phi(&self, n: u32) -> Vec<u32> {
        let r = self.r as usize;
        let top = &self.levels[n as usize];
        let g0 = &self.pool[self.levels[0].rays[0]].vertices;
        let g1 = &self.pool[*self.levels[0].rays.last().unwrap()].vertices;
        let mut out = self.p_arc.clone();
        out.extend_from_slice(&g0[r + 1..=r + n as usize]);
        out.extend(top.path().into_iter().skip(1));
        out.extend(g1[r..r + n as usize].iter().rev());
        out.extend(self.q_arc.iter().rev().skip(1));
        out.push(self.p);
        dedup(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("fan serializes")
    }
}

/// Anchor positions along a segment; a segment joining two rays through the
/// same point still carries both of them.
fn spots(seg: &[u32]) -> Vec<u32> {
    if seg.len() == 1 {
        vec![seg[0], seg[0]]
    } else {
        seg.to_vec()
    }
}

fn dedup(v: Vec<u32>) -> Vec<u32> {
    let mut out: Vec<u32> = Vec::with_capacity(v.len());
    for x in v {
        if out.last() != Some(&x) {
            out.push(x);
        }
    }
    out
}

/// Builds the fan over the edge `pq` with levels `0..=depth`.
pub fn build_fan(c2: &CayleyComplexBall, p: u32, q: u32, depth: u32, params: FanParams) -> Result<Fan> {
    let b = &c2.ball;
    let FanParams { m, c, l, delta } = params;
    if p == q || !b.row(p).contains(&q) {
        return Err(Error::Precondition("p and q must be joined by an edge".into()));
    }
    if !b.model.meta.one_ended {
        return Err(Error::Precondition("fan construction needs a one-ended model".into()));
    }
    if m <= 6 * c + 2 * delta + 3 {
        return Err(Error::Precondition(format!(
            "need M > 6c + 2δ + 3 = {}, got M = {m}",
            6 * c + 2 * delta + 3
        )));
    }
    if l <= 2 * c + 4 {
        return Err(Error::Precondition(format!("need L > 2c + 4 = {}, got L = {l}", 2 * c + 4)));
    }
    let r = b.dist(p).min(b.dist(q));
    if r < 2 * c || r + depth + 1 > b.radius() {
        return Err(Error::Precondition(format!(
            "need 2c <= r and r + N + 1 <= R, got r = {r}, N = {depth}, R = {}",
            b.radius()
        )));
    }
    let ys = RaySet::new(b);
    let mut pool: Vec<GeodesicSegment> = Vec::new();
    let pick = |v: u32, pool: &mut Vec<GeodesicSegment>| -> Result<(usize, u32, Vec<u32>)> {
        if ys.distance(v) > c {
            return Err(Error::NotFound(format!(
                "vertex {v} is {} from every ray (c = {c})",
                ys.distance(v)
            )));
        }
        let beta = ys.path_to(v);
        let y = *beta.last().unwrap();
        let ray = ys.ray_through(y).ok_or_else(|| Error::NotFound("ray does not reach the sphere".into()))?;
        pool.push(ray);
        Ok((pool.len() - 1, y, beta))
    };
    let (r0, _, _) = pick(p, &mut pool)?;
    let (r1, _, _) = pick(q, &mut pool)?;
    // a geodesic through both ends of the edge, when one exists
    let through = |inner: u32, outer: u32| -> Option<GeodesicSegment> {
        if b.dist(outer) != b.dist(inner) + 1 || !ys.contains(inner) || !ys.contains(outer) {
            return None;
        }
        let mut path = b.geodesic_from_identity(inner);
        path.extend(ys.ray_through(outer)?.vertices.into_iter().skip(b.dist(outer) as usize));
        Some(b.segment(path))
    };
    if let Some(g) = through(p, q) {
        pool[r0] = g;
    } else if let Some(g) = through(q, p) {
        pool[r1] = g;
    }
    let at = |pool: &Vec<GeodesicSegment>, i: usize, t: u32| pool[i].vertices[t as usize];
    let cp = |x: u32, y: u32, radius: u32| -> Result<Vec<u32>> {
        complement_path(b, x, y, radius.saturating_sub(c), l).ok_or_else(|| {
            Error::NotFound(format!(
                "no path of length <= {l} outside B({}) between {x} and {y}",
                radius.saturating_sub(c)
            ))
        })
    };
    let p_arc = b
        .shortest_path(p, at(&pool, r0, r), |_| true, 2 * c + 1)
        .ok_or_else(|| Error::NotFound("no arc from p to γ0(r)".into()))?;
    let q_arc = b
        .shortest_path(q, at(&pool, r1, r), |_| true, 2 * c + 2)
        .ok_or_else(|| Error::NotFound("no arc from q to γ1(r)".into()))?;
    let f0 = cp(at(&pool, r0, r), at(&pool, r1, r), r)?;
    let mut levels = vec![FanLevel {
        radius: r,
        rays: vec![r0, r1],
        segments: vec![f0],
        anchors: Vec::new(),
    }];
    for i in 0..depth {
        let radius = r + i;
        let next = radius + 1;
        let mut rays = Vec::new();
        let mut anchors_all = Vec::new();
        let cur = levels[i as usize].clone();
        for (j, seg) in cur.segments.iter().enumerate() {
            let seg = &spots(seg);
            let mut anchors = Vec::new();
            for (k, &v) in seg.iter().enumerate() {
                let (ray, y, beta) = if k == 0 {
                    (cur.rays[j], v, vec![v])
                } else if k + 1 == seg.len() {
                    (cur.rays[j + 1], v, vec![v])
                } else {
                    pick(v, &mut pool)?
                };
                let zt = next.max(b.dist(y));
                let z = at(&pool, ray, zt);
                if zt - b.dist(y) > 2 * c + 1 {
                    return Err(Error::NotFound(format!("no ray point beyond level {next} near y = {y}")));
                }
                if k + 1 < seg.len() || j + 1 == cur.segments.len() {
                    rays.push(ray);
                }
                anchors.push(Anchor { ray, y, beta, z });
            }
            anchors_all.push(anchors);
        }
        let mut segments = Vec::new();
        for w in rays.windows(2) {
            segments.push(cp(at(&pool, w[0], next), at(&pool, w[1], next), next)?);
        }
        levels[i as usize].anchors = anchors_all;
        levels.push(FanLevel {
            radius: next,
            rays,
            segments,
            anchors: Vec::new(),
        });
    }
    let mut fan = Fan {
        r,
        p,
        q,
        params,
        pool,
        levels,
        p_arc,
        q_arc,
        checks: FanChecks {
            outside: Vec::new(),
            marked_within_m: Vec::new(),
            max_marked_gap: Vec::new(),
            max_segment_len: 0,
        },
    };
    fan.checks = check_fan(b, &fan);
    Ok(fan)
}

/// Recomputes the fan invariants from stored data.
pub fn check_fan(b: &CayleyBall, fan: &Fan) -> FanChecks {
    let c = fan.params.c;
    let mut out = FanChecks {
        outside: Vec::new(),
        marked_within_m: Vec::new(),
        max_marked_gap: Vec::new(),
        max_segment_len: 0,
    };
    for lv in &fan.levels {
        let floor = lv.radius.saturating_sub(c);
        out.outside.push(lv.path().iter().all(|&v| b.dist(v) >= floor));
        let marks = lv.marked(&fan.pool);
        let mut gap = 0;
        for w in marks.windows(2) {
            let d = b.bfs(&[w[0]], |_| true, fan.params.m + 1)[w[1] as usize];
            gap = gap.max(d);
        }
        out.max_marked_gap.push(gap);
        out.marked_within_m.push(gap <= fan.params.m);
        for s in &lv.segments {
            out.max_segment_len = out.max_segment_len.max(s.len() as u32 - 1);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubCell {
    pub label: String,
    pub length: usize,
    pub min_dist: u32,
    /// `length <= 2L + 4c - 1` and `min_dist >= r + i - 2c`.
    pub within_bounds: bool,
    pub outcome: String,
    pub filled: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FanVerification {
    pub inner: u32,
    pub cells: Vec<SubCell>,
    pub all_filled: bool,
    pub verdict: String,
}

fn vertex_loop(b: &CayleyBall, verts: &[u32]) -> Result<Loop> {
    let verts = dedup(verts.to_vec());
    if verts.first() != verts.last() {
        return Err(Error::Precondition("fan corrupted: sub-cell does not close".into()));
    }
    let mut w = Vec::new();
    for e in verts.windows(2) {
        let l = b
            .neighbors(e[0])
            .find(|&(_, u)| u == e[1])
            .map(|(l, _)| l)
            .ok_or_else(|| Error::Precondition("fan corrupted: consecutive vertices not adjacent".into()))?;
        w.push(l);
    }
    Loop::new(b, verts[0], Word(w))
}

fn ray_piece(ray: &GeodesicSegment, from: u32, to: u32) -> Vec<u32> {
    let v = &ray.vertices;
    if from <= to {
        v[from as usize..=to as usize].to_vec()
    } else {
        v[to as usize..=from as usize].iter().rev().copied().collect()
    }
}

/// Decomposes `Φ_N(p, q)` into `Φ_0` and the sub-cells `A_{i,j}(k)` and
/// fills each outside `B(n)`.
pub fn verify_fan_filling(c2: &CayleyComplexBall, fan: &Fan, n: u32, budget: &FillBudget) -> Result<FanVerification> {
    let b = &c2.ball;
    let FanParams { c, l, .. } = fan.params;
    if n + 2 * c >= fan.r {
        return Err(Error::Precondition(format!("need r > n + 2c, got r = {}, n = {n}, c = {c}", fan.r)));
    }
    let mut loops: Vec<(String, Vec<u32>, Option<(u32, u32)>)> = Vec::new();
    let mut phi0 = fan.p_arc.clone();
    phi0.extend(fan.levels[0].path().into_iter().skip(1));
    phi0.extend(fan.q_arc.iter().rev().skip(1));
    phi0.push(fan.p);
    loops.push(("phi0".into(), phi0, None));
    for (i, lv) in fan.levels.iter().enumerate().take(fan.levels.len() - 1) {
        let next = &fan.levels[i + 1];
        let top = lv.radius + 1;
        let mut offset = 0;
        for (j, seg) in lv.segments.iter().enumerate() {
            let seg = &spots(seg);
            let anchors = &lv.anchors[j];
            for k in 0..seg.len().saturating_sub(1) {
                let (a0, a1) = (&anchors[k], &anchors[k + 1]);
                let mut verts = a0.beta.clone();
                verts.extend(ray_piece(&fan.pool[a0.ray], b.dist(a0.y), top));
                verts.extend_from_slice(&next.segments[offset + k]);
                verts.extend(ray_piece(&fan.pool[a1.ray], top, b.dist(a1.y)));
                verts.extend(a1.beta.iter().rev());
                verts.push(seg[k]);
                loops.push((format!("A[{i},{j}]({k})"), verts, Some((lv.radius, 2 * l + 4 * c - 1))));
            }
            offset += seg.len().saturating_sub(1);
        }
    }
    let mut cells = Vec::new();
    for (label, verts, bound) in loops {
        let lp = vertex_loop(b, &verts)?;
        let within_bounds = match bound {
            Some((radius, max_len)) => lp.len() as u32 <= max_len && lp.min_dist + 2 * c >= radius,
            None => true,
        };
        let (outcome, filled) = if budget.max_expansions == 0 {
            ("unknown(budget 0)".to_string(), false)
        } else if lp.min_dist <= n {
            (format!("touches B({n})"), false)
        } else {
            let res = fill_outside(c2, &lp, n, budget)?;
            (res.label(), matches!(res, FillResult::Filled { .. }))
        };
        cells.push(SubCell {
            label,
            length: lp.len(),
            min_dist: lp.min_dist,
            within_bounds,
            outcome,
            filled,
        });
    }
    let all_filled = cells.iter().all(|s| s.filled);
    Ok(FanVerification {
        inner: n,
        verdict: if all_filled {
            format!("null homotopic outside B({n})")
        } else {
            "unknown".into()
        },
        all_filled,
        cells,
    })
}
