//! End-to-end acceptance checks. Each criterion prints one line and the test
//! fails if any of them fails.

use std::collections::{HashSet, VecDeque};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use atinf::cayley::{build_ball, build_complex, CayleyComplexBall};
use atinf::combiner::{britton_reduce, replay_shorten, shorten_to_base, AmalgamModel, Combination, HnnModel, ShortenParams, SyllableWord};
use atinf::ends::{complement_components, dead_ends, end_depth_table, end_depth_table_on, rough_equiv, EndDepthOptions, Grid, Mode};
use atinf::filling::{
    fill_outside, probe_level, replay, semistability_table_on, sci_growth_table_on, sphere_tracer, verify_filling, winding_number,
    FillBudget, FillResult, Loop, Move, ProbeSettings, SciParams, SemiParams, TaggedMove,
};
use atinf::hyperbolic::{build_fan, check_fan, cp_table, estimate_delta, ray_constant, verify_fan_filling, DeltaSampling, FanParams};
use atinf::model::{GroupModel, ModelMeta, WordSolver};
use atinf::presentation::parse_presentation;
use atinf::word::{free_reduce, Letter, Word};
use atinf::zoo::{bs12, free, lamplighter, racg, surface2, zd, AbelianOracle, LamplighterOracle};

type Outcome = (bool, String);

fn end_depth_bounded() -> Outcome {
    let pent = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)];
    let models = [zd(2), zd(3), surface2(), racg("racg:pentagon", 5, &pent)];
    let mut ok = true;
    let mut parts = Vec::new();
    for m in &models {
        let t = end_depth_table(m, 8, &EndDepthOptions::default()).unwrap();
        let mut worst = String::new();
        for r in 2..=8 {
            let s = t.get(r).unwrap();
            let good = s.mode == Mode::Exact && s.value.is_some_and(|v| v <= 2 * r as i64);
            if !good && worst.is_empty() {
                worst = format!(" (r={r}: {:?} {})", s.value, s.mode);
            }
            ok &= good;
        }
        let vals: Vec<String> = (2..=8).map(|r| t.get(r).unwrap().value.map_or("-".into(), |v| v.to_string())).collect();
        parts.push(format!("{} [{}]{worst}", m.name, vals.join(",")));
    }
    (ok, format!("V0(r) <= 2r exact for r in 2..8: {}", parts.join("; ")))
}

/// Least `N` such that every lattice point with `N < |p|_1 <= w` reaches
/// every other through points with `r < |p|_1 <= w`.
fn lattice_end_depth(r: i64, w: i64) -> i64 {
    let norm = |p: (i64, i64)| p.0.abs() + p.1.abs();
    let pts: Vec<(i64, i64)> = (-w..=w).flat_map(|x| (-w..=w).map(move |y| (x, y))).filter(|&p| norm(p) <= w).collect();
    let outside: Vec<(i64, i64)> = pts.iter().copied().filter(|&p| norm(p) > r).collect();
    let mut seen = HashSet::new();
    let mut q = VecDeque::from([outside[0]]);
    seen.insert(outside[0]);
    while let Some((x, y)) = q.pop_front() {
        for n in [(x + 1, y), (x - 1, y), (x, y + 1), (x, y - 1)] {
            if norm(n) > r && norm(n) <= w && seen.insert(n) {
                q.push_back(n);
            }
        }
    }
    (0..=w)
        .find(|&n| pts.iter().filter(|&&p| norm(p) > n).all(|p| seen.contains(p)))
        .unwrap()
}

fn z2_end_depth_matches_lattice() -> Outcome {
    let t = end_depth_table(&zd(2), 8, &EndDepthOptions::default()).unwrap();
    let mut ok = true;
    let mut got = Vec::new();
    for r in 1..=8u32 {
        let want = lattice_end_depth(r as i64, 2 * r as i64 + 2);
        let s = t.get(r).unwrap();
        ok &= s.value == Some(want) && want == r as i64 && s.mode == Mode::Exact;
        got.push(format!("{}", s.value.unwrap_or(-1)));
    }
    (ok, format!("Z^2 V0(r) for r=1..8: [{}], lattice oracle gives r", got.join(",")))
}

fn free_boundary_components() -> Outcome {
    let mut ok = true;
    let mut got = Vec::new();
    for r in 1..=4u32 {
        let b = build_ball(&free(2), r + 1).unwrap();
        let n = complement_components(&b, r).unwrap().boundary_count();
        let mut words = vec![Word::empty()];
        for _ in 0..=r {
            words = words
                .iter()
                .flat_map(|w| (0..4).map(move |c| w.concat(&Word(vec![Letter::from_code(c)]))))
                .filter(|w| w.is_freely_reduced())
                .collect();
        }
        ok &= n == 4 * 3usize.pow(r) && n == words.len();
        got.push(n.to_string());
    }
    (ok, format!("free(2) components of X \\ B(r), r=1..4: [{}], expected 4*3^r", got.join(",")))
}

fn lamplighter_dead_ends() -> Outcome {
    let m = lamplighter();
    let b = build_ball(&m, 9).unwrap();
    let ds = dead_ends(&b);
    let len = |s: &Vec<i64>| LamplighterOracle::length(s[0], &s[1..]);
    let verified = ds.iter().all(|d| {
        let s = b.state(d.vertex);
        let here = len(&s);
        here == d.dist as u64 && (0..4).all(|c| len(&m.act(&s, Letter::from_code(c))) <= here)
    });
    let z2 = dead_ends(&build_ball(&zd(2), 6).unwrap()).len();
    let f2 = dead_ends(&build_ball(&free(2), 6).unwrap()).len();
    let ok = !ds.is_empty() && verified && z2 == 0 && f2 == 0;
    (
        ok,
        format!("lamplighter R=9: {} dead ends, re-verified={verified}; Z^2: {z2}, free(2): {f2}", ds.len()),
    )
}

fn z2_tracer_obstructed() -> Outcome {
    let c = build_complex(build_ball(&zd(2), 10).unwrap()).unwrap();
    let b = &c.ball;
    let mut ok = true;
    let mut got = Vec::new();
    for r in 1..=4u32 {
        let l = sphere_tracer(b, r + 3, 0, 1).unwrap();
        let res = fill_outside(&c, &l, r, &FillBudget::default()).unwrap();
        let good = matches!(res, FillResult::Obstructed { value, .. } if value.abs() == 1);
        ok &= good && winding_number(b, &l).is_some_and(|w| w.abs() == 1);
        got.push(res.label());
    }
    let (applied, invariant) = winding_walk(&c, 2, 100);
    ok &= invariant && applied > 100;
    (
        ok,
        format!("Z^2 tracers: {}; winding invariant over {applied} random moves: {invariant}", got.join(", ")),
    )
}

fn winding_walk(c: &CayleyComplexBall, r: u32, runs: usize) -> (usize, bool) {
    let b = &c.ball;
    let l0 = sphere_tracer(b, 4, 0, 1).unwrap();
    let w0 = winding_number(b, &l0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut applied = 0;
    for _ in 0..runs {
        let mut lp = l0.clone();
        for _ in 0..rng.gen_range(1..30) {
            let n = lp.len();
            let mv = if rng.gen_bool(0.5) {
                Move::Insert {
                    pos: rng.gen_range(0..=n),
                    letter: Letter::from_code(rng.gen_range(0..4)),
                }
            } else {
                let rel = c.relators[0].rotate(rng.gen_range(0..4));
                let rel = if rng.gen() { rel.inverse() } else { rel };
                let starts: Vec<usize> = (0..n.saturating_sub(1)).filter(|&p| lp.word.0[p..p + 2] == rel.0[..2]).collect();
                if starts.is_empty() {
                    continue;
                }
                Move::Cell {
                    pos: starts[rng.gen_range(0..starts.len())],
                    relator: rel,
                    split: 2,
                }
            };
            let next = (r + 1..=b.radius()).find_map(|d| replay(c, &lp, r, &[TaggedMove { mv: mv.clone(), min_dist: d }]).ok());
            if let Some(w) = next {
                lp = Loop::new(b, lp.base, w).unwrap();
                applied += 1;
                if winding_number(b, &lp) != Some(w0) {
                    return (applied, false);
                }
            }
        }
    }
    (applied, true)
}

fn z3_sci() -> Outcome {
    let c = build_complex(build_ball(&zd(3), 8).unwrap()).unwrap();
    let params = SciParams::default();
    let t = sci_growth_table_on(&c, 3, &params).unwrap();
    let mut ok = true;
    let mut got = Vec::new();
    let mut replayed = 0;
    for r in 1..=3u32 {
        let s = t.get(r).unwrap();
        let Some(h) = s.value else {
            ok = false;
            got.push(format!("r={r}: {}", s.mode));
            continue;
        };
        ok &= h <= r as i64 + 2;
        got.push(format!("r={r}: {}", s.mode));
        for o in probe_level(&c, r, h as u32, &params.probes, &params.budget).unwrap() {
            match &o.result {
                FillResult::Filled { certificate } => {
                    ok &= verify_filling(&c, &o.lp, r, certificate).is_ok();
                    replayed += 1;
                }
                _ => ok = false,
            }
        }
    }
    (ok, format!("Z^3 sci window 8: {}; {replayed} certificates replayed", got.join(", ")))
}

fn delta_values() -> Outcome {
    let tree = estimate_delta(&build_ball(&free(2), 8).unwrap(), DeltaSampling::Exhaustive { rho: 4 }).unwrap().value;
    let b = build_ball(&zd(2), 10).unwrap();
    let z: Vec<u32> = (3..=5).map(|rho| estimate_delta(&b, DeltaSampling::Exhaustive { rho }).unwrap().value).collect();
    let ok = tree == 0 && z[0] > 0 && z.windows(2).all(|w| w[0] <= w[1]);
    (ok, format!("delta free(2) rho=4: {tree}; Z^2 rho=3,4,5: {z:?}"))
}

fn surface_fan() -> Outcome {
    let c2 = build_complex(build_ball(&surface2(), 6).unwrap()).unwrap();
    let b = &c2.ball;
    let c = ray_constant(b, 2).unwrap().value;
    let delta = estimate_delta(b, DeltaSampling::Sampled { rho: 3, count: 300, seed: 1 }).unwrap().value;
    let m = 6 * c + 2 * delta + 4;
    let l_hat = cp_table(b, m, c, 3).unwrap().l_hat;
    let l = l_hat.max(2 * c + 5);
    let (p, q) = b
        .sphere(3)
        .unwrap()
        .flat_map(|p| b.neighbors(p).map(move |(_, q)| (p, q)))
        .find(|&(p, q)| b.dist(q) == 4 && b.parent(q) != Some(p))
        .unwrap();
    let fan = build_fan(&c2, p, q, 2, FanParams { m, c, l, delta }).unwrap();
    let checks = check_fan(b, &fan);
    let v = verify_fan_filling(&c2, &fan, 1, &FillBudget::default()).unwrap();
    let bound = (2 * l + 4 * c).saturating_sub(1) as usize;
    let lens: Vec<usize> = v.cells.iter().map(|s| s.length).collect();
    let ok = fan.checks.all_pass() && checks == fan.checks && v.all_filled && lens.iter().all(|&n| n <= bound);
    (
        ok,
        format!(
            "surface2 R=6 N=2: c={c} delta={delta} M={m} L={l}; checks pass={}; {} sub-cells filled outside B(1)={}; lengths {lens:?} <= {bound}",
            fan.checks.all_pass(),
            v.cells.len(),
            v.all_filled
        ),
    )
}

/// `BS(1,2)` acting on the line: `a` is `x -> x + 1`, `t` is `x -> 2x`,
/// composed left to right. Dyadic rationals are exact in `f64` here.
fn affine(w: &Word) -> (f64, f64) {
    let (mut s, mut b) = (1.0f64, 0.0f64);
    for l in w.letters() {
        let (gs, gb) = match (l.generator(), l.is_inverse()) {
            (0, false) => (1.0, 1.0),
            (0, true) => (1.0, -1.0),
            (_, false) => (2.0, 0.0),
            (_, true) => (0.5, 0.0),
        };
        b = b * gs + gb;
        s *= gs;
    }
    (s, b)
}

fn britton_suite() -> Outcome {
    let hnn = HnnModel::bs12();
    let g = bs12();
    let rel = g.presentation().unwrap().relators[0].clone();
    let relator_ok = affine(&rel) == (1.0, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let random = |rng: &mut ChaCha8Rng, n: usize| Word((0..n).map(|_| Letter::from_code(rng.gen_range(0..4))).collect());
    let (mut trivial, mut nontrivial, mut wrong) = (0, 0, 0);
    let mut check = |w: &Word| {
        let run = britton_reduce(&hnn, &hnn.syllables(w)).unwrap();
        let out = hnn.to_word(&run.result);
        let SyllableWord::Hnn { g: gs, t } = &run.result else { unreachable!() };
        let sound = affine(&out) == affine(w)
            && run.steps.iter().all(|s| s.weight_before == s.weight_after + 2)
            && hnn.find_pinch(gs, t).is_none()
            && run.result.is_empty() == (affine(w) == (1.0, 0.0));
        if !sound {
            wrong += 1;
        }
    };
    while trivial < 1000 {
        let mut w = Word::empty();
        while w.len() < 12 {
            let n = rng.gen_range(0..3);
            let u = random(&mut rng, n);
            let r = rel.rotate(rng.gen_range(0..rel.len()));
            let r = if rng.gen() { r.inverse() } else { r };
            let next = free_reduce(&w.concat(&u).concat(&r).concat(&u.inverse()));
            if next.len() > 12 {
                break;
            }
            w = next;
        }
        if w.is_empty() {
            continue;
        }
        check(&w);
        trivial += 1;
    }
    while nontrivial < 1000 {
        let n = rng.gen_range(1..=12);
        let w = random(&mut rng, n);
        if affine(&w) == (1.0, 0.0) {
            continue;
        }
        check(&w);
        nontrivial += 1;
    }
    let ok = relator_ok && wrong == 0;
    (
        ok,
        format!("BS(1,2) Britton: {trivial} trivial and {nontrivial} nontrivial words of length <= 12, {wrong} disagreements with the affine action, relator acts trivially: {relator_ok}"),
    )
}

fn run_shortening(m: Combination, c2: &CayleyComplexBall, word: Word) -> Result<(usize, u64), String> {
    let b = &c2.ball;
    let p = ShortenParams { c: 1, c1: 1, ..Default::default() };
    let l = (b.sphere(5).unwrap())
        .filter_map(|v| Loop::new(b, v, word.clone()).ok())
        .find(|l| l.min_dist > 1)
        .ok_or("no base vertex fits")?;
    let steps = shorten_to_base(m, c2, &l, 1, &p).map_err(|e| e.to_string())?;
    for w in steps.windows(2) {
        if w[1].complexity_before >= w[0].complexity_before {
            return Err("complexity did not drop".into());
        }
    }
    for s in &steps {
        if s.certificate.is_some() && s.complexity_after >= s.complexity_before {
            return Err("step without progress".into());
        }
        replay_shorten(m, c2, 1, &p, s)?;
    }
    let last = steps.last().unwrap();
    Ok((steps.len() - 1, last.complexity_after))
}

fn shortening() -> Outcome {
    let tre = AmalgamModel::trefoil();
    let hnn = HnnModel::bs12();
    let ct = build_complex(build_ball(tre.ambient.as_ref().unwrap(), 9).unwrap()).unwrap();
    let cb = build_complex(build_ball(hnn.ambient.as_ref().unwrap(), 9).unwrap()).unwrap();
    let mut ok = true;
    let mut got = Vec::new();
    for w in ["xxYYY", "yxxYYYY", "xxYYYxxYYY", "XXyyy"] {
        let r = run_shortening(Combination::Amalgam(&tre), &ct, tre.parse(w).unwrap());
        ok &= matches!(r, Ok((n, _)) if n > 0);
        got.push(format!("{w}: {r:?}"));
    }
    for w in ["TatAA", "TaatAAAA", "TTattAAAA", "taaTA", "aTatAAA"] {
        let r = run_shortening(Combination::Hnn(&hnn), &cb, hnn.parse(w).unwrap());
        ok &= matches!(r, Ok((n, 0)) if n > 0);
        got.push(format!("{w}: {r:?}"));
    }
    (ok, format!("shortening (steps, final complexity): {}", got.join(", ")))
}

fn z2_generating_sets() -> Outcome {
    let std = end_depth_table(&zd(2), 8, &EndDepthOptions::default()).unwrap();
    let p = parse_presentation("gens: a b c\nrel: abAB\nrel: abC\n").unwrap();
    let hex = GroupModel::new(
        "Z2{a,b,ab}",
        vec!["a".into(), "b".into(), "c".into()],
        Some(p),
        WordSolver::Oracle(Arc::new(AbelianOracle {
            vectors: vec![vec![1, 0], vec![0, 1], vec![1, 1]],
        })),
        ModelMeta {
            one_ended: true,
            finitely_presented: true,
            sci_candidate: true,
            hyperbolic: false,
        },
    );
    let b = build_ball(&hex, 18).unwrap();
    let alt = end_depth_table_on(&b, 8, 2.0).unwrap();
    let w = rough_equiv(&std, &alt, Grid::default()).unwrap();
    let vals: Vec<i64> = (1..=8).filter_map(|r| alt.get(r).and_then(|s| s.value)).collect();
    (
        w.is_some(),
        format!(
            "Z^2 V0 under {{a,b,ab}}: {vals:?}; witness {}",
            w.map_or("none".into(), |w| format!("{:?}", w.tuple().map(|r| r.to_string())))
        ),
    )
}

fn semistability_vs_sci() -> Outcome {
    let c = build_complex(build_ball(&zd(3), 8).unwrap()).unwrap();
    let sci = sci_growth_table_on(&c, 2, &SciParams::default()).unwrap();
    let semi = semistability_table_on(&c, 2, &SemiParams {
            probes: ProbeSettings::default(),
            budget: FillBudget::default(),
            target: None,
        }).unwrap();
    let mut ok = true;
    let mut got = Vec::new();
    for r in 1..=2 {
        let (a, b) = (sci.get(r).unwrap().value, semi.get(r).unwrap().value);
        ok &= matches!((a, b), (Some(a), Some(b)) if (a - b).abs() <= 1);
        got.push(format!("r={r}: sci {a:?} semistability {b:?}"));
    }
    (ok, format!("Z^3 {}", got.join(", ")))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("end-depth bounded", end_depth_bounded),
        ("Z^2 end-depth", z2_end_depth_matches_lattice),
        ("free boundary components", free_boundary_components),
        ("dead ends", lamplighter_dead_ends),
        ("Z^2 obstruction", z2_tracer_obstructed),
        ("Z^3 sci", z3_sci),
        ("delta", delta_values),
        ("surface fan", surface_fan),
        ("Britton", britton_suite),
        ("loop shortening", shortening),
        ("generating sets", z2_generating_sets),
        ("semistability vs sci", semistability_vs_sci),
    ];
    let mut failed = Vec::new();
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let (ok, detail) = f();
        println!(
            "criterion {:>2} {} {name}: {detail} ({:.1}s)",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            t.elapsed().as_secs_f64()
        );
        if !ok {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
