//! Complements of balls: components, end-depth, dead ends, and rough
//! equivalence of growth tables.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cayley::{build_ball_capped, CayleyBall, NONE};
use crate::error::{Error, Result};
use crate::model::{GroupModel, State};
use crate::word::{Letter, Word};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Component {
    /// Vertex indices in increasing order.
    pub vertices: Vec<u32>,
    /// Meets the boundary sphere of the window.
    pub boundary: bool,
    pub max_dist: u32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComponentSet {
    pub window: u32,
    pub inner: u32,
    pub components: Vec<Component>,
}

impl ComponentSet {
    pub fn boundary_count(&self) -> usize {
        self.components.iter().filter(|c| c.boundary).count()
    }

    pub fn interior(&self) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(|c| !c.boundary)
    }
}

/// Components of the subgraph induced on `{v : dist(v) > r}`.
pub fn complement_components(b: &CayleyBall, r: u32) -> Result<ComponentSet> {
    if r >= b.radius() {
        return Err(Error::Precondition(format!(
            "inner radius {r} must be below the window {}",
            b.radius()
        )));
    }
    let n = b.len();
    let mut comp = vec![NONE; n];
    let mut components = Vec::new();
    let start = b.ball_end(r);
    for s in start..n as u32 {
        if comp[s as usize] != NONE {
            continue;
        }
        let id = components.len() as u32;
        comp[s as usize] = id;
        let mut verts = vec![s];
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &u in b.row(v) {
                if u != NONE && u >= start && comp[u as usize] == NONE {
                    comp[u as usize] = id;
                    verts.push(u);
                    q.push_back(u);
                }
            }
        }
        verts.sort_unstable();
        let max_dist = verts.iter().map(|&v| b.dist(v)).max().unwrap_or(0);
        components.push(Component {
            boundary: max_dist == b.radius(),
            max_dist,
            vertices: verts,
        });
    }
    Ok(ComponentSet {
        window: b.radius(),
        inner: r,
        components,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TableKind {
    EndDepth,
    Sci,
    Semistability,
    Delta,
    Cp,
}

impl TableKind {
    pub fn name(self) -> &'static str {
        match self {
            TableKind::EndDepth => "end_depth",
            TableKind::Sci => "sci",
            TableKind::Semistability => "semistability",
            TableKind::Delta => "delta",
            TableKind::Cp => "cp",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    Exact,
    LowerBound,
    Interval { lo: i64, hi: i64 },
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => write!(f, "exact"),
            Mode::LowerBound => write!(f, "lower_bound"),
            Mode::Interval { lo, hi } => write!(f, "interval({lo},{hi})"),
        }
    }
}

impl Mode {
    fn parse(s: &str) -> Option<Mode> {
        match s {
            "exact" => Some(Mode::Exact),
            "lower_bound" => Some(Mode::LowerBound),
            _ => {
                let inner = s.strip_prefix("interval(")?.strip_suffix(')')?;
                let (lo, hi) = inner.split_once(',')?;
                Some(Mode::Interval {
                    lo: lo.trim().parse().ok()?,
                    hi: hi.trim().parse().ok()?,
                })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sample {
    pub r: u32,
    /// `None` when the quantity is undefined in the window (for instance an
    /// obstruction at every tested radius).
    pub value: Option<i64>,
    pub mode: Mode,
    pub window: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthTable {
    pub kind: TableKind,
    pub model: String,
    pub samples: Vec<Sample>,
    #[serde(default)]
    pub meta: BTreeMap<String, String>,
}

impl GrowthTable {
    pub fn new(kind: TableKind, model: &str) -> GrowthTable {
        GrowthTable {
            kind,
            model: model.to_string(),
            samples: Vec::new(),
            meta: BTreeMap::new(),
        }
    }

    pub fn push(&mut self, s: Sample) {
        self.samples.push(s);
        self.samples.sort_by_key(|s| s.r);
    }

    pub fn get(&self, r: u32) -> Option<&Sample> {
        self.samples.iter().find(|s| s.r == r)
    }

    pub fn exact_values(&self) -> BTreeMap<u32, i64> {
        self.samples
            .iter()
            .filter(|s| s.mode == Mode::Exact)
            .filter_map(|s| s.value.map(|v| (s.r, v)))
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,value,mode,window_R\n");
        for s in &self.samples {
            let v = s.value.map_or("NA".to_string(), |v| v.to_string());
            let mode = s.mode.to_string();
            let mode = if mode.contains(',') { format!("\"{mode}\"") } else { mode };
            out.push_str(&format!("{},{},{},{}\n", s.r, v, mode, s.window));
        }
        out
    }

    pub fn from_csv(kind: TableKind, model: &str, text: &str) -> Result<GrowthTable> {
        let mut t = GrowthTable::new(kind, model);
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if i == 0 || line.is_empty() {
                continue;
            }
            let bad = |m: &str| Error::Syntax {
                line: i + 1,
                column: 1,
                message: m.to_string(),
            };
            let fields = split_csv(line);
            if fields.len() != 4 {
                return Err(bad("expected 4 columns"));
            }
            let r = fields[0].parse().map_err(|_| bad("bad r"))?;
            let value = match fields[1].as_str() {
                "NA" => None,
                v => Some(v.parse().map_err(|_| bad("bad value"))?),
            };
            let mode = Mode::parse(&fields[2]).ok_or_else(|| bad("bad mode"))?;
            let window = fields[3].parse().map_err(|_| bad("bad window_R"))?;
            t.push(Sample {
                r,
                value,
                mode,
                window,
                note: None,
            });
        }
        Ok(t)
    }
}

fn split_csv(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    for c in line.chars() {
        match c {
            '"' => quoted = !quoted,
            ',' if !quoted => out.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    out.push(cur);
    out
}

/// End-depth at inner radius `r` read off a window ball.
pub fn end_depth_in_window(b: &CayleyBall, r: u32) -> Result<Sample> {
    let cs = complement_components(b, r)?;
    let interior = cs.interior().map(|c| c.max_dist).max().unwrap_or(0);
    let value = r.max(interior);
    let mode = if cs.boundary_count() == 1 { Mode::Exact } else { Mode::LowerBound };
    Ok(Sample {
        r,
        value: Some(value as i64),
        mode,
        window: b.radius(),
        note: Some(format!(
            "window: {} boundary component(s), {} interior",
            cs.boundary_count(),
            cs.components.len() - cs.boundary_count()
        )),
    })
}

#[derive(Clone, Debug)]
pub struct EndDepthOptions {
    pub window_factor: f64,
    pub max_vertices: usize,
}

impl Default for EndDepthOptions {
    fn default() -> Self {
        EndDepthOptions {
            window_factor: 2.0,
            max_vertices: 8_000_000,
        }
    }
}

pub fn window_radius(r: u32, factor: f64) -> u32 {
    (factor * r as f64).ceil() as u32 + 2
}

/// Certifies that `S(n)` lies in one component of `X \ B(n-1)`, level by
/// level, from data inside the ball.
///
/// Level `n` is certified either directly (all of `S(n)` is connected inside
/// the ball's part of the complement) or by lifting level `n-1`: when every
/// `v` in `S(n-1)` has its upward neighbors joined by relator cells avoiding
/// `B(n-1)`, and every edge inside `S(n-1)` is bridged by such a cell, then a
/// path outside `B(n-2)` between two points of `S(n-1)` can be pushed off
/// `S(n-1)` into the complement of `B(n-1)`.
pub struct LevelCertifier<'a> {
    b: &'a CayleyBall,
    relators: Vec<Word>,
    certified: Vec<Option<&'static str>>,
}

impl<'a> LevelCertifier<'a> {
    pub fn new(b: &'a CayleyBall) -> LevelCertifier<'a> {
        let relators = b
            .model
            .presentation()
            .map(|p| p.symmetrized_relators())
            .unwrap_or_default();
        LevelCertifier {
            b,
            relators,
            certified: vec![None],
        }
    }

    /// How level `n` was certified, or `None` if it could not be.
    pub fn certify(&mut self, n: u32) -> Option<&'static str> {
        while self.certified.len() <= n as usize {
            let k = self.certified.len() as u32;
            let how = if self.annulus_connected(k) {
                Some("annulus")
            } else if k >= 2 && self.certified[k as usize - 1].is_some() && self.lifts(k - 1) {
                Some("lift")
            } else {
                None
            };
            self.certified.push(how);
        }
        self.certified[n as usize]
    }

    fn annulus_connected(&self, n: u32) -> bool {
        let b = self.b;
        if n == 0 || n > b.radius() {
            return false;
        }
        let sphere = b.sphere(n).unwrap();
        let lo = b.ball_end(n - 1);
        let d = b.bfs(&[sphere.start], |v| v >= lo, u32::MAX);
        sphere.clone().all(|v| d[v as usize] != NONE)
    }

    /// Walks the relator from `v` and reports whether the boundary vertices
    /// after the first `skip` steps (excluding the return to `v`) avoid `B(n)`.
    fn cell_avoids(&self, v: u32, rel: &Word, n: u32, skip: usize) -> bool {
        let b = self.b;
        let ls = rel.letters();
        let mut cur = Some(v);
        let mut out: Option<State> = None;
        for i in 0..ls.len() - 1 {
            let l = ls[i];
            if let Some(u) = cur.and_then(|x| b.neighbor(x, l)) {
                cur = Some(u);
            } else {
                let s = match (&out, cur) {
                    (Some(s), _) => b.model.act(s, l),
                    (None, Some(x)) => b.model.act(&b.state(x), l),
                    (None, None) => unreachable!(),
                };
                let mut w = b.word(v);
                w.0.extend_from_slice(&ls[..=i]);
                cur = b.find_state(&s, &w);
                out = if cur.is_some() { None } else { Some(s) };
            }
            if i >= skip {
                if let Some(u) = cur {
                    if b.dist(u) <= n {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn up_letters(&self, v: u32, n: u32) -> Vec<usize> {
        (0..self.b.degree())
            .filter(|&c| match self.b.row(v)[c] {
                NONE => true,
                u => self.b.dist(u) > n,
            })
            .collect()
    }

    /// Lifting conditions at level `n`.
    pub fn lifts(&self, n: u32) -> bool {
        let b = self.b;
        if n > b.radius() || self.relators.is_empty() {
            return false;
        }
        let deg = b.degree();
        for v in b.sphere(n).unwrap() {
            let up = self.up_letters(v, n);
            if up.is_empty() {
                return false;
            }
            let mut uf: Vec<usize> = (0..deg).collect();
            let mut classes = up.len();
            for rel in &self.relators {
                if classes == 1 {
                    break;
                }
                let first = rel.letters()[0].code();
                let last = rel.letters()[rel.len() - 1].inv().code();
                if !up.contains(&first) || !up.contains(&last) {
                    continue;
                }
                let (ra, rb) = (find(&mut uf, first), find(&mut uf, last));
                if ra == rb {
                    continue;
                }
                if self.cell_avoids(v, rel, n, 0) {
                    uf[ra] = rb;
                    classes -= 1;
                }
            }
            if classes != 1 {
                return false;
            }
            // edges inside the sphere
            for (c, &w) in b.row(v).iter().enumerate() {
                if w == NONE || b.dist(w) != n || w < v {
                    continue;
                }
                let l = Letter::from_code(c);
                let bridged = self.relators.iter().any(|rel| {
                    rel.letters()[0] == l && rel.len() >= 4 && self.cell_avoids(v, rel, n, 1)
                });
                if !bridged {
                    return false;
                }
            }
        }
        true
    }
}

fn find(uf: &mut [usize], x: usize) -> usize {
    let mut r = x;
    while uf[r] != r {
        r = uf[r];
    }
    let mut c = x;
    while uf[c] != r {
        let n = uf[c];
        uf[c] = r;
        c = n;
    }
    r
}

/// End-depth table for `r = 0..=r_max`.
///
/// Radii whose window `ceil(factor·r) + 2` fits the ball are read off the
/// window. Larger radii use the level certificate: when `S(r+1)` lies in one
/// component of `X \ B(r)`, every vertex beyond `B(r)` descends along a
/// geodesic to `S(r+1)` without entering `B(r)`, so `V₀(r) = r` exactly.
/// Otherwise a lower bound from the bounded components seen in the ball is
/// reported.
pub fn end_depth_table(m: &GroupModel, r_max: u32, opts: &EndDepthOptions) -> Result<GrowthTable> {
    if opts.window_factor < 2.0 {
        return Err(Error::Precondition("window factor must be at least 2".into()));
    }
    let target = window_radius(r_max, opts.window_factor);
    let b = build_ball_capped(m, target, opts.max_vertices)?;
    if b.radius() < r_max && b.radius() < target {
        return Err(Error::Budget(format!(
            "ball budget of {} vertices only reaches radius {}; need at least {}",
            opts.max_vertices,
            b.radius(),
            r_max
        )));
    }
    end_depth_table_on(&b, r_max, opts.window_factor)
}

/// Same as [`end_depth_table`] on a prebuilt ball.
pub fn end_depth_table_on(b: &CayleyBall, r_max: u32, factor: f64) -> Result<GrowthTable> {
    let mut t = GrowthTable::new(TableKind::EndDepth, &b.model.name);
    t.meta.insert("window_factor".into(), factor.to_string());
    t.meta.insert("ball_radius".into(), b.radius().to_string());
    t.meta.insert("one_ended".into(), b.model.meta.one_ended.to_string());
    let mut cert = LevelCertifier::new(b);
    for r in 0..=r_max {
        let w = window_radius(r, factor);
        if w <= b.radius() {
            let sub = if w == b.radius() { None } else { Some(w) };
            let mut s = match sub {
                None => end_depth_in_window(b, r)?,
                Some(w) => end_depth_in_subwindow(b, r, w)?,
            };
            if s.mode != Mode::Exact && b.model.meta.one_ended && r < b.radius() {
                if let Some(how) = cert.certify(r + 1) {
                    s = Sample {
                        r,
                        value: Some(r as i64),
                        mode: Mode::Exact,
                        window: b.radius(),
                        note: Some(format!("S(r+1) connected outside B(r) ({how} certificate)")),
                    };
                }
            }
            if !b.model.meta.one_ended {
                s.note = Some(format!("per-end variant; {}", s.note.unwrap_or_default()));
            }
            t.push(s);
            continue;
        }
        if r <= b.radius() && b.model.meta.one_ended {
            if let Some(how) = cert.certify(r + 1) {
                t.push(Sample {
                    r,
                    value: Some(r as i64),
                    mode: Mode::Exact,
                    window: b.radius(),
                    note: Some(format!("S(r+1) connected outside B(r) ({how} certificate)")),
                });
                continue;
            }
        }
        let seen = if r < b.radius() {
            complement_components(b, r)?.interior().map(|c| c.max_dist).max().unwrap_or(0)
        } else {
            0
        };
        t.push(Sample {
            r,
            value: Some(r.max(seen) as i64),
            mode: Mode::LowerBound,
            window: b.radius(),
            note: Some("window exceeds budget and no certificate".into()),
        });
    }
    Ok(t)
}

/// Window analysis restricted to the sub-ball `B(w)` of a larger ball.
fn end_depth_in_subwindow(b: &CayleyBall, r: u32, w: u32) -> Result<Sample> {
    let end = b.ball_end(w);
    let start = b.ball_end(r);
    let mut comp = vec![NONE; (end - start) as usize];
    let mut boundary = 0;
    let mut interior_max = 0;
    let mut ncomp = 0;
    for s in start..end {
        if comp[(s - start) as usize] != NONE {
            continue;
        }
        comp[(s - start) as usize] = ncomp;
        let mut q = VecDeque::from([s]);
        let mut maxd = 0;
        while let Some(v) = q.pop_front() {
            maxd = maxd.max(b.dist(v));
            for &u in b.row(v) {
                if u != NONE && u >= start && u < end && comp[(u - start) as usize] == NONE {
                    comp[(u - start) as usize] = ncomp;
                    q.push_back(u);
                }
            }
        }
        ncomp += 1;
        if maxd == w {
            boundary += 1;
        } else {
            interior_max = interior_max.max(maxd);
        }
    }
    Ok(Sample {
        r,
        value: Some(r.max(interior_max) as i64),
        mode: if boundary == 1 { Mode::Exact } else { Mode::LowerBound },
        window: w,
        note: Some(format!(
            "window: {boundary} boundary component(s), {} interior",
            ncomp as usize - boundary
        )),
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeadEnd {
    pub vertex: u32,
    pub word: String,
    pub dist: u32,
    /// Shortest escape to a farther vertex; exact when `exact` is set,
    /// otherwise a lower bound limited by the window.
    pub depth: u32,
    pub exact: bool,
}

/// Vertices none of whose neighbors is farther from the identity.
pub fn dead_ends(b: &CayleyBall) -> Vec<DeadEnd> {
    let alpha = b.model.alphabet();
    let mut out = Vec::new();
    let r = b.radius();
    if r == 0 {
        return out;
    }
    for v in 0..b.ball_end(r - 1) {
        let dv = b.dist(v);
        if b.row(v).iter().any(|&u| u != NONE && b.dist(u) > dv) {
            continue;
        }
        let reach = r - dv;
        let d = b.local_bfs(v, reach, |_| true);
        let depth = d
            .iter()
            .filter(|(&u, _)| b.dist(u) > dv)
            .map(|(_, &k)| k)
            .min();
        let word = alpha.format(&b.word(v));
        out.push(match depth {
            Some(k) => DeadEnd { vertex: v, word, dist: dv, depth: k, exact: true },
            None => DeadEnd { vertex: v, word, dist: dv, depth: reach + 1, exact: false },
        });
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Ratio {
    pub num: i64,
    pub den: i64,
}

impl Ratio {
    pub fn new(num: i64, den: i64) -> Ratio {
        let g = gcd(num.abs(), den.abs()).max(1);
        Ratio { num: num / g, den: den / g }
    }

    pub fn int(n: i64) -> Ratio {
        Ratio { num: n, den: 1 }
    }

    fn floor_mul(self, x: i64) -> i64 {
        (self.num * x).div_euclid(self.den)
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Constants of `c1·f(c2·x) + c3 ≤ g(x) ≤ C1·f(C2·x) + C3`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoughEquivWitness {
    pub c1: Ratio,
    pub c2: Ratio,
    pub c3: Ratio,
    pub upper_c1: Ratio,
    pub upper_c2: Ratio,
    pub upper_c3: Ratio,
    pub r_min: u32,
    pub r_max: u32,
}

impl RoughEquivWitness {
    pub fn tuple(&self) -> [Ratio; 6] {
        [self.c1, self.c2, self.c3, self.upper_c1, self.upper_c2, self.upper_c3]
    }
}

/// Search grid: multiplicative constants `p/q` with `1 ≤ p, q ≤ bound`,
/// additive constants integers in `[-bound, bound]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub bound: i64,
}

impl Default for Grid {
    fn default() -> Self {
        Grid { bound: 8 }
    }
}

impl Grid {
    /// Positive ratios, simplest first: by max(p, q), then value closest to 1.
    pub fn multipliers(&self) -> Vec<Ratio> {
        let mut v: Vec<Ratio> = Vec::new();
        for p in 1..=self.bound {
            for q in 1..=self.bound {
                let r = Ratio::new(p, q);
                if !v.contains(&r) {
                    v.push(r);
                }
            }
        }
        v.sort_by(|a, b| {
            let ka = (a.num.max(a.den), (a.num - a.den).abs() * b.den, a.num * b.den);
            let kb = (b.num.max(b.den), (b.num - b.den).abs() * a.den, b.num * a.den);
            ka.0.cmp(&kb.0).then((ka.1).cmp(&kb.1)).then(ka.2.cmp(&kb.2).reverse())
        });
        v
    }

    /// Integers ordered 0, 1, -1, 2, -2, ...
    pub fn offsets(&self) -> Vec<Ratio> {
        let mut v = vec![Ratio::int(0)];
        for k in 1..=self.bound {
            v.push(Ratio::int(k));
            v.push(Ratio::int(-k));
        }
        v
    }
}

/// Searches the grid for rough-equivalence constants; the first witness in
/// grid order is returned. `f` is evaluated at `floor(c·r)`, which must be an
/// exact sample for every common exact sample `r`.
pub fn rough_equiv(f: &GrowthTable, g: &GrowthTable, grid: Grid) -> Result<Option<RoughEquivWitness>> {
    if f.kind != g.kind {
        return Err(Error::Precondition(format!(
            "incompatible table kinds {} and {}",
            f.kind.name(),
            g.kind.name()
        )));
    }
    let fv = f.exact_values();
    let gv = g.exact_values();
    if fv.len() < 3 || gv.len() < 3 {
        return Err(Error::Precondition("each table needs at least 3 exact samples".into()));
    }
    let common: Vec<u32> = gv.keys().copied().filter(|r| fv.contains_key(r)).collect();
    if common.is_empty() {
        return Ok(None);
    }
    let mults = grid.multipliers();
    let offs = grid.offsets();
    let eval = |c1: Ratio, c2: Ratio, c3: Ratio, r: u32| -> Option<Ratio> {
        let x = c2.floor_mul(r as i64);
        if x < 0 {
            return None;
        }
        let fx = *fv.get(&(x as u32))?;
        // c1·fx + c3 as a fraction over c1.den
        Some(Ratio {
            num: c1.num * fx + c3.num * c1.den,
            den: c1.den,
        })
    };
    let le = |a: Ratio, b: i64| a.num <= b * a.den;
    let ge = |a: Ratio, b: i64| a.num >= b * a.den;
    let mut lower = None;
    'lo: for &c1 in &mults {
        for &c2 in &mults {
            for &c3 in &offs {
                if common.iter().all(|&r| eval(c1, c2, c3, r).is_some_and(|v| le(v, gv[&r]))) {
                    lower = Some((c1, c2, c3));
                    break 'lo;
                }
            }
        }
    }
    let Some((c1, c2, c3)) = lower else { return Ok(None) };
    for &u1 in &mults {
        for &u2 in &mults {
            for &u3 in &offs {
                if common.iter().all(|&r| eval(u1, u2, u3, r).is_some_and(|v| ge(v, gv[&r]))) {
                    return Ok(Some(RoughEquivWitness {
                        c1,
                        c2,
                        c3,
                        upper_c1: u1,
                        upper_c2: u2,
                        upper_c3: u3,
                        r_min: common[0],
                        r_max: *common.last().unwrap(),
                    }));
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cayley::build_ball;
    use crate::zoo::{free, zd, zoo_group};

    fn table(vals: &[(u32, i64)]) -> GrowthTable {
        let mut t = GrowthTable::new(TableKind::EndDepth, "t");
        for &(r, v) in vals {
            t.push(Sample { r, value: Some(v), mode: Mode::Exact, window: 20, note: None });
        }
        t
    }

    #[test]
    fn z2_complement_connected() {
        let b = build_ball(&zd(2), 8).unwrap();
        let cs = complement_components(&b, 3).unwrap();
        assert_eq!(cs.components.len(), 1);
        assert!(cs.components[0].boundary);
    }

    #[test]
    fn free2_components() {
        let b = build_ball(&free(2), 5).unwrap();
        let cs = complement_components(&b, 2).unwrap();
        assert_eq!(cs.components.len(), 36);
        assert_eq!(cs.boundary_count(), 36);
        assert!(complement_components(&b, 5).is_err());
    }

    #[test]
    fn end_depth_z2() {
        let t = end_depth_table(&zd(2), 4, &EndDepthOptions::default()).unwrap();
        for s in &t.samples {
            assert_eq!(s.value, Some(s.r as i64));
            assert_eq!(s.mode, Mode::Exact);
        }
        assert_eq!(t.get(0).unwrap().value, Some(0));
    }

    #[test]
    fn certificate_agrees_with_window_on_pentagon() {
        let m = zoo_group("racg:pentagon").unwrap();
        let b = build_ball(&m, 9).unwrap();
        let mut c = LevelCertifier::new(&b);
        for r in 1..=3 {
            let w = end_depth_in_window(&build_ball(&m, window_radius(r, 2.0)).unwrap(), r).unwrap();
            assert_eq!(w.value, Some(r as i64));
            assert!(c.certify(r + 1).is_some());
        }
        assert!(c.lifts(5));
    }

    #[test]
    fn free_group_is_not_certified() {
        let b = build_ball(&free(2), 5).unwrap();
        let mut c = LevelCertifier::new(&b);
        assert!(c.certify(2).is_none());
    }

    #[test]
    fn dead_end_lists() {
        assert!(dead_ends(&build_ball(&zd(2), 8).unwrap()).is_empty());
        assert!(dead_ends(&build_ball(&free(2), 6).unwrap()).is_empty());
        let l = dead_ends(&build_ball(&zoo_group("lamplighter").unwrap(), 9).unwrap());
        assert!(!l.is_empty());
    }

    #[test]
    fn rough_equiv_examples() {
        let f = table(&(0..=8).map(|r| (r, r as i64)).collect::<Vec<_>>());
        let g = table(&(0..=8).map(|r| (r, 2 * r as i64 + 3)).collect::<Vec<_>>());
        let w = rough_equiv(&f, &g, Grid::default()).unwrap().unwrap();
        let one = Ratio::int(1);
        assert_eq!(w.tuple(), [one, one, Ratio::int(0), Ratio::int(2), one, Ratio::int(3)]);
        let w = rough_equiv(&f, &f, Grid::default()).unwrap().unwrap();
        assert_eq!(w.tuple(), [one, one, Ratio::int(0), one, one, Ratio::int(0)]);
        let f1 = table(&(1..=8).map(|r| (r, r as i64)).collect::<Vec<_>>());
        let sq = table(&(1..=8).map(|r| (r, (r * r) as i64)).collect::<Vec<_>>());
        assert!(rough_equiv(&f1, &sq, Grid { bound: 4 }).unwrap().is_none());
        let mut other = sq.clone();
        other.kind = TableKind::Delta;
        assert!(rough_equiv(&f1, &other, Grid::default()).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mut t = table(&[(0, 0), (1, 1)]);
        t.push(Sample { r: 2, value: None, mode: Mode::Interval { lo: 2, hi: 4 }, window: 8, note: None });
        let csv = t.to_csv();
        assert!(csv.starts_with("r,value,mode,window_R\n0,0,exact,20\n"));
        let back = GrowthTable::from_csv(TableKind::EndDepth, "t", &csv).unwrap();
        assert_eq!(back.samples.len(), 3);
        assert_eq!(back.samples[2].mode, Mode::Interval { lo: 2, hi: 4 });
        assert_eq!(back.samples[2].value, None);
    }
}
