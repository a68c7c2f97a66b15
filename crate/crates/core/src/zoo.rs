//! Built-in group models with normal-form oracles.
//!
//! Names accepted by [`zoo_group`]:
//! `Zd:<d>`, `free:<k>`, `surface2`, `racg:pentagon`, `racg:cycle<n>`,
//! `racg:<n>:<i>-<j>,...`, `bs12`, `lamplighter`, `trefoil_amalgam` (alias `trefoil`).

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::model::{GroupModel, ModelMeta, Oracle, State, WordSolver};
use crate::presentation::{DehnSolver, GroupPresentation};
use crate::word::{free_reduce, Letter, Word};

fn letter_names(k: usize) -> Vec<String> {
    (0..k)
        .map(|i| {
            if k <= 26 {
                ((b'a' + i as u8) as char).to_string()
            } else {
                format!("x{i}")
            }
        })
        .collect()
}

/// Free abelian group with arbitrary integer generator vectors.
#[derive(Debug, Clone)]
pub struct AbelianOracle {
    pub vectors: Vec<Vec<i64>>,
}

impl AbelianOracle {
    pub fn standard(d: usize) -> AbelianOracle {
        AbelianOracle {
            vectors: (0..d)
                .map(|i| (0..d).map(|j| i64::from(i == j)).collect())
                .collect(),
        }
    }

    fn is_standard(&self) -> bool {
        let d = self.vectors.len();
        self.vectors
            .iter()
            .enumerate()
            .all(|(i, v)| v.len() == d && v.iter().enumerate().all(|(j, &x)| x == i64::from(i == j)))
    }
}

impl Oracle for AbelianOracle {
    fn identity(&self) -> State {
        vec![0; self.vectors.first().map_or(0, |v| v.len())]
    }

    fn act(&self, s: &State, l: Letter) -> State {
        let v = &self.vectors[l.generator()];
        let sign = if l.is_inverse() { -1 } else { 1 };
        s.iter().zip(v).map(|(a, b)| a + sign * b).collect()
    }

    fn canonical_word(&self, s: &State) -> Option<Word> {
        if !self.is_standard() {
            return None;
        }
        let mut w = Vec::new();
        for (i, &x) in s.iter().enumerate() {
            let l = if x >= 0 { Letter::gen(i) } else { Letter::gen_inv(i) };
            w.extend(std::iter::repeat(l).take(x.unsigned_abs() as usize));
        }
        Some(Word(w))
    }

    fn word_length(&self, s: &State) -> Option<u64> {
        if self.is_standard() {
            Some(s.iter().map(|x| x.unsigned_abs()).sum())
        } else {
            None
        }
    }

    fn lattice_point(&self, s: &State) -> Option<Vec<i64>> {
        Some(s.clone())
    }

    fn describe(&self) -> String {
        "sorted exponent word".into()
    }
}

/// Free group: the state is the freely reduced word.
#[derive(Debug, Clone)]
pub struct FreeOracle;

impl Oracle for FreeOracle {
    fn identity(&self) -> State {
        Vec::new()
    }

    fn act(&self, s: &State, l: Letter) -> State {
        let mut out = s.clone();
        if out.last() == Some(&(l.inv().code() as i64)) {
            out.pop();
        } else {
            out.push(l.code() as i64);
        }
        out
    }

    fn canonical_word(&self, s: &State) -> Option<Word> {
        Some(Word(s.iter().map(|&c| Letter::from_code(c as usize)).collect()))
    }

    fn word_length(&self, s: &State) -> Option<u64> {
        Some(s.len() as u64)
    }

    fn describe(&self) -> String {
        "freely reduced word".into()
    }
}

/// Right-angled Coxeter group of a graph: generators are involutions and
/// adjacent generators commute. The state is the lexicographically least
/// reduced word.
#[derive(Debug, Clone)]
pub struct RacgOracle {
    n: usize,
    commute: Vec<Vec<bool>>,
}

impl RacgOracle {
    pub fn new(n: usize, edges: &[(usize, usize)]) -> RacgOracle {
        let mut commute = vec![vec![false; n]; n];
        for &(i, j) in edges {
            commute[i][j] = true;
            commute[j][i] = true;
        }
        RacgOracle { n, commute }
    }

    pub fn cycle(n: usize) -> RacgOracle {
        let edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        RacgOracle::new(n, &edges)
    }

    pub fn commutes(&self, i: usize, j: usize) -> bool {
        self.commute[i][j]
    }

    fn lex_least(&self, w: &[i64]) -> Vec<i64> {
        let n = w.len();
        let mut used = vec![false; n];
        let mut out = Vec::with_capacity(n);
        for _ in 0..n {
            let mut best: Option<usize> = None;
            for j in 0..n {
                if used[j] {
                    continue;
                }
                let gj = w[j] as usize;
                let free = (0..j).all(|i| used[i] || (w[i] != w[j] && self.commute[w[i] as usize][gj]));
                if free && best.map_or(true, |b| w[j] < w[b]) {
                    best = Some(j);
                }
            }
            let b = best.expect("a heap always has a minimal element");
            used[b] = true;
            out.push(w[b]);
        }
        out
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.commute[i][j] {
                    e.push((i, j));
                }
            }
        }
        e
    }
}

impl RacgOracle {
    fn reflect(&self, f: &mut [i64], i: usize) {
        let fi = f[i];
        for (j, fj) in f.iter_mut().enumerate() {
            if j == i {
                *fj = -fi;
            } else if !self.commute[i][j] {
                *fj = fj
                    .checked_add(fi.checked_mul(2).expect("Tits vector overflow"))
                    .expect("Tits vector overflow");
            }
        }
    }

    /// A reduced word for the element, peeling right descents.
    fn reduced_word(&self, s: &State) -> Vec<i64> {
        let mut f = s.clone();
        let mut rev = Vec::new();
        while let Some(j) = f.iter().position(|&x| x < 0) {
            self.reflect(&mut f, j);
            rev.push(j as i64);
        }
        rev.reverse();
        rev
    }
}

/// The state of `g` is `g^-1` applied to the all-ones vector in the dual of
/// the Tits representation. That vector lies in the open fundamental
/// chamber, so the orbit map is injective; coordinate `j` is negative exactly
/// when `j` is a right descent of `g`.
impl Oracle for RacgOracle {
    fn identity(&self) -> State {
        vec![1; self.n]
    }

    fn act(&self, s: &State, l: Letter) -> State {
        let mut f = s.clone();
        self.reflect(&mut f, l.generator());
        f
    }

    fn canonical_word(&self, s: &State) -> Option<Word> {
        let w = self.lex_least(&self.reduced_word(s));
        Some(Word(w.iter().map(|&g| Letter::gen(g as usize)).collect()))
    }

    fn word_length(&self, s: &State) -> Option<u64> {
        Some(self.reduced_word(s).len() as u64)
    }

    fn describe(&self) -> String {
        "Tits cone orbit vector; lexicographically least reduced Coxeter word".into()
    }
}

/// BS(1,2) = <a, t | t^-1 a t = a^2> acting on the dyadic rationals:
/// `a: x -> x + 1`, `t: x -> x / 2`. The state is `(k, m, e)` for the map
/// `x -> 2^k x + m / 2^e` with `m` odd or `e = 0`.
#[derive(Debug, Clone)]
pub struct Bs12Oracle;

impl Bs12Oracle {
    fn normalize(k: i64, mut m: i128, mut e: i64) -> State {
        while e > 0 && m % 2 == 0 {
            m /= 2;
            e -= 1;
        }
        if m == 0 {
            e = 0;
        }
        vec![k, m as i64, e]
    }

    /// The affine map of a state as `(scale exponent, numerator, denominator exponent)`.
    pub fn affine(s: &State) -> (i64, i64, i64) {
        (s[0], s[1], s[2])
    }

    fn power_word(m: i64) -> Vec<Letter> {
        let a = Letter::gen(0);
        let t = Letter::gen(1);
        if m < 0 {
            return Word(Self::power_word(-m)).inverse().0;
        }
        if m == 0 {
            return Vec::new();
        }
        if m == 1 {
            return vec![a];
        }
        let mut w = vec![t.inv()];
        w.extend(Self::power_word(m / 2));
        w.push(t);
        if m % 2 == 1 {
            w.push(a);
        }
        w
    }
}

impl Oracle for Bs12Oracle {
    fn identity(&self) -> State {
        vec![0, 0, 0]
    }

    fn act(&self, s: &State, l: Letter) -> State {
        let (k, m, e) = (s[0], s[1] as i128, s[2]);
        match (l.generator(), l.is_inverse()) {
            (0, inv) => {
                // b +- 2^k with a common denominator 2^E
                let big_e = e.max(-k).max(0);
                let num = m << (big_e - e);
                let step: i128 = 1i128 << (k + big_e);
                let num = if inv { num - step } else { num + step };
                Self::normalize(k, num, big_e)
            }
            (1, false) => vec![k - 1, s[1], e],
            (1, true) => vec![k + 1, s[1], e],
            _ => unreachable!("bs12 has two generators"),
        }
    }

    fn canonical_word(&self, s: &State) -> Option<Word> {
        let (k, m, e) = (s[0], s[1], s[2]);
        let t = Letter::gen(1);
        let mut w: Vec<Letter> = std::iter::repeat(t).take(e as usize).collect();
        w.extend(Self::power_word(m));
        w.extend(std::iter::repeat(t.inv()).take(e as usize));
        let scale = if k >= 0 { t.inv() } else { t };
        w.extend(std::iter::repeat(scale).take(k.unsigned_abs() as usize));
        Some(free_reduce(&Word(w)))
    }

    fn describe(&self) -> String {
        "affine map x -> 2^k x + b (binary power word)".into()
    }
}

/// Lamplighter Z/2 wr Z with `a` toggling the lamp under the head and `t`
/// moving the head right. The state is `[head, lit lamps (sorted)...]`.
#[derive(Debug, Clone)]
pub struct LamplighterOracle;

impl LamplighterOracle {
    /// Two-sweep word length: lamps plus the shorter of the left-first and
    /// right-first tours from 0 covering all lamps and ending at the head.
    pub fn length(head: i64, lamps: &[i64]) -> u64 {
        let lo = lamps.iter().copied().chain([0, head]).min().unwrap();
        let hi = lamps.iter().copied().chain([0, head]).max().unwrap();
        let left_first = (-lo) + (hi - lo) + (hi - head);
        let right_first = hi + (hi - lo) + (head - lo);
        lamps.len() as u64 + left_first.min(right_first) as u64
    }
}

impl Oracle for LamplighterOracle {
    fn identity(&self) -> State {
        vec![0]
    }

    fn act(&self, s: &State, l: Letter) -> State {
        let mut out = s.clone();
        match l.generator() {
            0 => {
                let head = s[0];
                match out[1..].binary_search(&head) {
                    Ok(i) => {
                        out.remove(i + 1);
                    }
                    Err(i) => out.insert(i + 1, head),
                }
            }
            _ => out[0] += if l.is_inverse() { -1 } else { 1 },
        }
        out
    }

    fn canonical_word(&self, s: &State) -> Option<Word> {
        let a = Letter::gen(0);
        let t = Letter::gen(1);
        let mut w = Vec::new();
        let mut pos = 0i64;
        let walk = |w: &mut Vec<Letter>, from: i64, to: i64| {
            let l = if to >= from { t } else { t.inv() };
            w.extend(std::iter::repeat(l).take((to - from).unsigned_abs() as usize));
        };
        for &lamp in &s[1..] {
            walk(&mut w, pos, lamp);
            w.push(a);
            pos = lamp;
        }
        walk(&mut w, pos, s[0]);
        Some(Word(w))
    }

    fn word_length(&self, s: &State) -> Option<u64> {
        Some(Self::length(s[0], &s[1..]))
    }

    fn describe(&self) -> String {
        "lamp configuration and head position".into()
    }
}

/// Trefoil group <x, y | x^2 = y^3> as Z *_Z Z. The state is `[k, s_1, ...]`
/// for `z^k s_1 s_2 ...` with central `z = x^2 = y^3` and alternating coset
/// representatives `1 = x`, `2 = y`, `3 = y^2`.
#[derive(Debug, Clone)]
pub struct TrefoilOracle;

impl TrefoilOracle {
    fn mul_x(s: &mut State) {
        if s.len() > 1 && *s.last().unwrap() == 1 {
            s.pop();
            s[0] += 1;
        } else {
            s.push(1);
        }
    }

    fn mul_y(s: &mut State) {
        match s.last().copied() {
            Some(2) if s.len() > 1 => *s.last_mut().unwrap() = 3,
            Some(3) if s.len() > 1 => {
                s.pop();
                s[0] += 1;
            }
            _ => s.push(2),
        }
    }
}

impl Oracle for TrefoilOracle {
    fn identity(&self) -> State {
        vec![0]
    }

    fn act(&self, s: &State, l: Letter) -> State {
        let mut out = s.clone();
        match (l.generator(), l.is_inverse()) {
            (0, false) => Self::mul_x(&mut out),
            (0, true) => {
                Self::mul_x(&mut out);
                out[0] -= 1;
            }
            (1, false) => Self::mul_y(&mut out),
            (1, true) => {
                Self::mul_y(&mut out);
                Self::mul_y(&mut out);
                out[0] -= 1;
            }
            _ => unreachable!("trefoil has two generators"),
        }
        out
    }

    fn canonical_word(&self, s: &State) -> Option<Word> {
        let x = Letter::gen(0);
        let y = Letter::gen(1);
        let zl = if s[0] >= 0 { x } else { x.inv() };
        let mut w: Vec<Letter> = std::iter::repeat(zl).take(2 * s[0].unsigned_abs() as usize).collect();
        for &c in &s[1..] {
            match c {
                1 => w.push(x),
                2 => w.push(y),
                _ => {
                    w.push(y);
                    w.push(y);
                }
            }
        }
        Some(free_reduce(&Word(w)))
    }

    fn describe(&self) -> String {
        "central power times alternating transversal word".into()
    }
}

const P: i64 = 2_147_483_647;

fn mulmod(a: i64, b: i64) -> i64 {
    // operands are reduced below 2^31, so the product fits in i64
    (a * b) % P
}

fn powmod(mut b: i64, mut e: i64) -> i64 {
    let mut r = 1;
    b = b.rem_euclid(P);
    while e > 0 {
        if e & 1 == 1 {
            r = mulmod(r, b);
        }
        b = mulmod(b, b);
        e >>= 1;
    }
    r
}

fn invmod(a: i64) -> i64 {
    powmod(a, P - 2)
}

type Mat = [i64; 4];

fn mat_mul(x: &Mat, y: &Mat) -> Mat {
    [
        (mulmod(x[0], y[0]) + mulmod(x[1], y[2])) % P,
        (mulmod(x[0], y[1]) + mulmod(x[1], y[3])) % P,
        (mulmod(x[2], y[0]) + mulmod(x[3], y[2])) % P,
        (mulmod(x[2], y[1]) + mulmod(x[3], y[3])) % P,
    ]
}

fn mat_inv(x: &Mat) -> Mat {
    [x[3], (P - x[1]) % P, (P - x[2]) % P, x[0]]
}

fn sqrt_mod(n: i64) -> Option<i64> {
    // P = 3 mod 4
    let n = n.rem_euclid(P);
    let r = powmod(n, (P + 1) / 4);
    (mulmod(r, r) == n).then_some(r)
}

/// Homomorphisms of the genus-2 surface group `<a,b,c,d | [a,b][c,d]>` into
/// SL(2, F_p). States are images under several such maps: equal elements
/// have equal states, the converse holds only with overwhelming probability,
/// so equality is confirmed with Dehn's algorithm.
#[derive(Debug, Clone)]
pub struct SurfaceHashOracle {
    images: Vec<[Mat; 8]>,
}

impl SurfaceHashOracle {
    pub fn new(seed: u64, copies: usize) -> SurfaceHashOracle {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut images = Vec::new();
        while images.len() < copies {
            let rand_sl2 = |rng: &mut ChaCha8Rng| -> Mat {
                let a = rng.gen_range(1..P);
                let b = rng.gen_range(0..P);
                let c = rng.gen_range(0..P);
                let d = mulmod((1 + mulmod(b, c)) % P, invmod(a));
                [a, b, c, d]
            };
            let ma = rand_sl2(&mut rng);
            let mb = rand_sl2(&mut rng);
            // g commutes with t = [b, a], so c = g b g^-1, d = g a g^-1 satisfy [c, d] = [b, a]
            let t = mat_mul(&mat_mul(&mb, &ma), &mat_mul(&mat_inv(&mb), &mat_inv(&ma)));
            let tr = (t[0] + t[3]) % P;
            let mut g = None;
            for _ in 0..64 {
                let beta = rng.gen_range(1..P);
                // alpha^2 + beta tr alpha + beta^2 - 1 = 0
                let bt = mulmod(beta, tr);
                let disc = (mulmod(bt, bt) - 4 * ((mulmod(beta, beta) - 1 + P) % P) % P + 4 * P) % P;
                if let Some(root) = sqrt_mod(disc) {
                    let alpha = mulmod((root - bt + P) % P, invmod(2));
                    let gm = [
                        (alpha + mulmod(beta, t[0])) % P,
                        mulmod(beta, t[1]),
                        mulmod(beta, t[2]),
                        (alpha + mulmod(beta, t[3])) % P,
                    ];
                    g = Some(gm);
                    break;
                }
            }
            let Some(g) = g else { continue };
            let gi = mat_inv(&g);
            let mc = mat_mul(&mat_mul(&g, &mb), &gi);
            let md = mat_mul(&mat_mul(&g, &ma), &gi);
            let gens = [ma, mb, mc, md];
            let mut img = [[0; 4]; 8];
            for (i, m) in gens.iter().enumerate() {
                img[2 * i] = *m;
                img[2 * i + 1] = mat_inv(m);
            }
            images.push(img);
        }
        SurfaceHashOracle { images }
    }

    pub fn relator_image_is_identity(&self) -> bool {
        let word = [0usize, 2, 1, 3, 4, 6, 5, 7];
        self.images.iter().all(|img| {
            let mut m: Mat = [1, 0, 0, 1];
            for &c in &word {
                m = mat_mul(&m, &img[c]);
            }
            m == [1, 0, 0, 1]
        })
    }
}

impl Oracle for SurfaceHashOracle {
    fn identity(&self) -> State {
        let mut s = Vec::with_capacity(4 * self.images.len());
        for _ in &self.images {
            s.extend_from_slice(&[1, 0, 0, 1]);
        }
        s
    }

    fn act(&self, s: &State, l: Letter) -> State {
        let mut out = Vec::with_capacity(s.len());
        for (i, img) in self.images.iter().enumerate() {
            let m: Mat = [s[4 * i], s[4 * i + 1], s[4 * i + 2], s[4 * i + 3]];
            out.extend_from_slice(&mat_mul(&m, &img[l.code()]));
        }
        out
    }

    fn faithful(&self) -> bool {
        false
    }

    fn canonical_word(&self, _s: &State) -> Option<Word> {
        None
    }

    fn describe(&self) -> String {
        "SL(2,F_p) image (hash), confirmed by Dehn's algorithm".into()
    }
}

fn meta(one_ended: bool, fp: bool, sci: bool, hyperbolic: bool) -> ModelMeta {
    ModelMeta {
        one_ended,
        finitely_presented: fp,
        sci_candidate: sci,
        hyperbolic,
    }
}

pub fn zd(d: usize) -> GroupModel {
    let names = letter_names(d);
    let mut rels = Vec::new();
    for i in 0..d {
        for j in i + 1..d {
            rels.push(Word(vec![Letter::gen(i), Letter::gen(j), Letter::gen_inv(i), Letter::gen_inv(j)]));
        }
    }
    let strs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let p = GroupPresentation::new(&format!("Zd:{d}"), &strs, rels);
    GroupModel::new(
        &format!("Zd:{d}"),
        names,
        Some(p),
        WordSolver::Oracle(Arc::new(AbelianOracle::standard(d))),
        meta(d >= 2, true, d >= 3, d <= 1),
    )
}

pub fn free(k: usize) -> GroupModel {
    let names = letter_names(k);
    let strs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let p = GroupPresentation::new(&format!("free:{k}"), &strs, vec![]);
    GroupModel::new(
        &format!("free:{k}"),
        names,
        Some(p),
        WordSolver::Oracle(Arc::new(FreeOracle)),
        meta(false, true, false, true),
    )
}

pub fn surface2() -> GroupModel {
    let p = GroupPresentation::from_strs("surface2", &["a", "b", "c", "d"], &["abABcdCD"])
        .expect("static presentation");
    let dehn = DehnSolver::new(&p).expect("surface relator is C'(1/6)");
    let hash = SurfaceHashOracle::new(0x5eed_0002, 1);
    debug_assert!(hash.relator_image_is_identity());
    GroupModel::new(
        "surface2",
        p.generators.clone(),
        Some(p),
        WordSolver::Dehn {
            dehn: Arc::new(dehn),
            hash: Some(Arc::new(hash)),
        },
        meta(true, true, false, true),
    )
}

pub fn racg(name: &str, n: usize, edges: &[(usize, usize)]) -> GroupModel {
    let oracle = RacgOracle::new(n, edges);
    let names = letter_names(n);
    let mut rels = Vec::new();
    for i in 0..n {
        rels.push(Word(vec![Letter::gen(i), Letter::gen(i)]));
    }
    for (i, j) in oracle.edges() {
        rels.push(Word(vec![Letter::gen(i), Letter::gen(j), Letter::gen(i), Letter::gen(j)]));
    }
    let strs: Vec<&str> = names.iter().map(|s| s.as_str()).collect();
    let p = GroupPresentation::new(name, &strs, rels);
    // cycles of length >= 4 give one-ended groups; >= 5 are hyperbolic surface-like
    let is_cycle = edges.len() == n && n >= 4 && (0..n).all(|i| oracle.commutes(i, (i + 1) % n));
    GroupModel::new(
        name,
        names,
        Some(p),
        WordSolver::Oracle(Arc::new(oracle)),
        meta(is_cycle, true, false, is_cycle && n >= 5),
    )
}

pub fn bs12() -> GroupModel {
    let p = GroupPresentation::from_strs("bs12", &["a", "t"], &["TatAA"]).expect("static presentation");
    GroupModel::new(
        "bs12",
        p.generators.clone(),
        Some(p),
        WordSolver::Oracle(Arc::new(Bs12Oracle)),
        meta(true, true, false, false),
    )
}

pub fn lamplighter() -> GroupModel {
    GroupModel::new(
        "lamplighter",
        vec!["a".into(), "t".into()],
        None,
        WordSolver::Oracle(Arc::new(LamplighterOracle)),
        meta(true, false, false, false),
    )
}

pub fn trefoil() -> GroupModel {
    let p = GroupPresentation::from_strs("trefoil_amalgam", &["x", "y"], &["xxYYY"]).expect("static presentation");
    GroupModel::new(
        "trefoil_amalgam",
        p.generators.clone(),
        Some(p),
        WordSolver::Oracle(Arc::new(TrefoilOracle)),
        meta(true, true, false, false),
    )
}

/// Resolves a zoo name to a model.
pub fn zoo_group(name: &str) -> Result<GroupModel> {
    let unknown = || Error::UnknownModel(name.to_string());
    if let Some(d) = name.strip_prefix("Zd:").or_else(|| name.strip_prefix("zd:")) {
        let d: usize = d.parse().map_err(|_| unknown())?;
        if d == 0 || d > 8 {
            return Err(unknown());
        }
        return Ok(zd(d));
    }
    if let Some(k) = name.strip_prefix("free:") {
        let k: usize = k.parse().map_err(|_| unknown())?;
        if k == 0 || k > 26 {
            return Err(unknown());
        }
        return Ok(free(k));
    }
    if let Some(spec) = name.strip_prefix("racg:") {
        if spec == "pentagon" {
            return Ok(racg("racg:pentagon", 5, &cycle_edges(5)));
        }
        if let Some(n) = spec.strip_prefix("cycle") {
            let n: usize = n.parse().map_err(|_| unknown())?;
            if !(3..=26).contains(&n) {
                return Err(unknown());
            }
            return Ok(racg(name, n, &cycle_edges(n)));
        }
        let (n, edges) = spec.split_once(':').ok_or_else(unknown)?;
        let n: usize = n.parse().map_err(|_| unknown())?;
        let mut es = Vec::new();
        for e in edges.split(',').filter(|s| !s.is_empty()) {
            let (i, j) = e.split_once('-').ok_or_else(unknown)?;
            let i: usize = i.parse().map_err(|_| unknown())?;
            let j: usize = j.parse().map_err(|_| unknown())?;
            if i >= n || j >= n || i == j {
                return Err(unknown());
            }
            es.push((i, j));
        }
        return Ok(racg(name, n, &es));
    }
    match name {
        "surface2" => Ok(surface2()),
        "bs12" => Ok(bs12()),
        "lamplighter" => Ok(lamplighter()),
        "trefoil_amalgam" | "trefoil" => Ok(trefoil()),
        _ => Err(unknown()),
    }
}

fn cycle_edges(n: usize) -> Vec<(usize, usize)> {
    (0..n).map(|i| (i, (i + 1) % n)).collect()
}
