use proptest::prelude::*;

use atinf::cayley::{build_ball, build_complex, CayleyBall, CayleyComplexBall};
use atinf::combiner::{britton_reduce, HnnModel, SyllableWord};
use atinf::ends::complement_components;
use atinf::filling::{fill_outside, replay, sphere_tracer, verify_filling, winding_number, FillBudget, FillResult, Loop, Move, TaggedMove};
use atinf::model::GroupModel;
use atinf::presentation::parse_presentation;
use atinf::rewriting::{knuth_bendix_complete, CompletionBudget};
use atinf::word::{free_reduce, Letter, Word};
use atinf::zoo::{bs12, free, racg, surface2, trefoil, zd};
use std::sync::OnceLock;

fn word(rank: usize, max: usize) -> impl Strategy<Value = Word> {
    prop::collection::vec(0..2 * rank, 0..=max).prop_map(|v| Word(v.into_iter().map(Letter::from_code).collect()))
}

fn models() -> &'static [GroupModel] {
    static M: OnceLock<Vec<GroupModel>> = OnceLock::new();
    M.get_or_init(|| {
        let pent = [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)];
        vec![zd(2), zd(3), free(2), surface2(), racg("racg:pentagon", 5, &pent), bs12(), trefoil()]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn solver_is_sound_under_relator_insertion(
        mi in 0..7usize,
        w in word(4, 12),
        ri in 0..8usize,
        at in 0..13usize,
        inv in any::<bool>(),
    ) {
        let m = &models()[mi];
        let p = m.presentation().unwrap();
        let w = Word(w.0.into_iter().filter(|l| l.generator() < m.rank()).collect());
        let mut r = p.relators.get(ri % p.relators.len().max(1)).cloned().unwrap_or_default();
        if inv {
            r = r.inverse();
        }
        let at = at.min(w.len());
        let mut v = w.0[..at].to_vec();
        v.extend_from_slice(r.letters());
        v.extend_from_slice(&w.0[at..]);
        let v = Word(v);
        prop_assert!(m.equal(&w, &v).unwrap());
        if m.states_faithful() {
            prop_assert_eq!(m.normal_form(&w).unwrap(), m.normal_form(&v).unwrap());
        }
        let nf = m.normal_form(&w).unwrap();
        prop_assert_eq!(m.normal_form(&nf).unwrap(), nf.clone());
        prop_assert!(m.is_trivial(&w.concat(&nf.inverse())).unwrap());
    }

    #[test]
    fn free_reduce_is_idempotent(w in word(3, 30)) {
        let r = free_reduce(&w);
        prop_assert!(r.len() <= w.len());
        prop_assert!(r.is_freely_reduced());
        prop_assert_eq!(free_reduce(&r), r.clone());
        prop_assert_eq!(free_reduce(&w.concat(&w.inverse())), Word::empty());
    }

    #[test]
    fn britton_is_sound(w in word(2, 12)) {
        let m = HnnModel::bs12();
        let g = bs12();
        let run = britton_reduce(&m, &m.syllables(&w)).unwrap();
        let out = m.to_word(&run.result);
        prop_assert!(g.equal(&w, &out).unwrap());
        for s in &run.steps {
            prop_assert_eq!(s.weight_before, s.weight_after + 2);
        }
        let SyllableWord::Hnn { g: gs, t } = &run.result else { unreachable!() };
        prop_assert!(m.find_pinch(gs, t).is_none());
        prop_assert_eq!(run.result.is_empty(), g.is_trivial(&w).unwrap());
    }
}

fn two_orders_agree(text: &str, words: &[Word], seed: u64) {
    use rand::{Rng, SeedableRng};
    let p = parse_presentation(text).unwrap();
    let sys = knuth_bendix_complete(&p, CompletionBudget::default());
    assert!(sys.confluent, "{text}");
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for w in words {
        let a = sys.reduce(w);
        let b = sys.reduce_with_order(w, |n| rng.gen_range(0..n));
        assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rewriting_order_does_not_matter(ws in prop::collection::vec(word(3, 14), 1..20), seed in any::<u64>()) {
        let two: Vec<Word> = ws.iter().map(|w| Word(w.0.iter().copied().filter(|l| l.generator() < 2).collect())).collect();
        two_orders_agree("gens: a b\nrel: abAB\n", &two, seed);
        two_orders_agree("gens: a b c\nrel: abAB\nrel: acAC\nrel: bcBC\n", &ws, seed);
        two_orders_agree("gens: a b\nrel: aa\nrel: bb\nrel: abab\n", &two, seed);
    }

    #[test]
    fn ball_is_consistent(mi in 0..7usize, radius in 1..5u32) {
        let m = &models()[mi];
        let b = build_ball(m, radius).unwrap();
        for v in 0..b.len() as u32 {
            prop_assert_eq!(b.word(v).len() as u32, b.dist(v));
            prop_assert_eq!(b.find(&b.word(v)), Some(v));
            for (l, u) in b.neighbors(v) {
                prop_assert!(b.dist(u).abs_diff(b.dist(v)) <= 1);
                prop_assert_eq!(b.neighbor(u, l.inv()), Some(v));
                prop_assert!(m.confirm_equal(&b.word(u), &b.word(v).concat(&Word(vec![l]))));
            }
        }
    }

    #[test]
    fn complement_components_partition(mi in 0..5usize, r in 0..3u32) {
        let m = &models()[mi];
        let b = build_ball(m, r + 3).unwrap();
        let cs = complement_components(&b, r).unwrap();
        let mut seen = vec![0u8; b.len()];
        for c in &cs.components {
            for &v in &c.vertices {
                seen[v as usize] += 1;
                for (_, u) in b.neighbors(v) {
                    if b.dist(u) > r {
                        prop_assert!(c.vertices.binary_search(&u).is_ok());
                    }
                }
            }
        }
        for v in 0..b.len() as u32 {
            prop_assert_eq!(seen[v as usize], u8::from(b.dist(v) > r));
        }
    }
}

fn z3() -> &'static CayleyComplexBall {
    static C: OnceLock<CayleyComplexBall> = OnceLock::new();
    C.get_or_init(|| build_complex(build_ball(&zd(3), 7).unwrap()).unwrap())
}

fn z2() -> &'static CayleyComplexBall {
    static C: OnceLock<CayleyComplexBall> = OnceLock::new();
    C.get_or_init(|| build_complex(build_ball(&zd(2), 10).unwrap()).unwrap())
}

fn vertex_at(b: &CayleyBall, w: &Word) -> Option<u32> {
    b.locate(b.identity(), w.letters())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn filling_certificates_replay(conj in word(3, 2), k in 0..3usize, shift in 0..4usize) {
        let c = z3();
        let b = &c.ball;
        let Some(base) = vertex_at(b, &Word(vec![Letter::gen(2); 4])) else { return Ok(()) };
        let rel = &c.relators[k % c.relators.len()];
        let w = free_reduce(&conj.concat(&rel.rotate(shift % rel.len())).concat(&conj.inverse()));
        let Ok(l) = Loop::new(b, base, w) else { return Ok(()) };
        prop_assume!(l.min_dist > 1);
        let res = fill_outside(c, &l, 1, &FillBudget::default()).unwrap();
        if let FillResult::Filled { certificate } = res {
            prop_assert!(verify_filling(c, &l, 1, &certificate).is_ok());
            prop_assert!(certificate.min_dist().is_none_or(|d| d > 1));
            if let Some(first) = certificate.moves.first() {
                let mut bad = certificate.clone();
                bad.moves[0] = TaggedMove { min_dist: first.min_dist + 1, ..first.clone() };
                prop_assert!(verify_filling(c, &l, 1, &bad).is_err());
                prop_assert!(verify_filling(c, &l, first.min_dist, &certificate).is_err());
            }
        } else {
            prop_assert!(false, "conjugated relator did not fill");
        }
    }
}

/// Random homotopy moves outside `B(r)`; the winding number about the
/// origin never changes.
#[test]
fn winding_is_invariant_under_moves() {
    use rand::{Rng, SeedableRng};
    let c = z2();
    let b = &c.ball;
    let r = 2;
    let l0 = sphere_tracer(b, 4, 0, 1).unwrap();
    let w0 = winding_number(b, &l0).unwrap();
    assert_eq!(w0.abs(), 1);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(500);
    let mut applied = 0;
    for _ in 0..500 {
        let mut lp = l0.clone();
        for _ in 0..rng.gen_range(1..40) {
            let n = lp.len();
            let mv = match rng.gen_range(0..3) {
                0 => Move::Insert {
                    pos: rng.gen_range(0..=n),
                    letter: Letter::from_code(rng.gen_range(0..4)),
                },
                1 => match (0..n.saturating_sub(1)).find(|&i| lp.word.0[i + 1] == lp.word.0[i].inv()) {
                    Some(pos) => Move::Delete { pos },
                    None => continue,
                },
                _ => {
                    let rel = c.relators[0].rotate(rng.gen_range(0..4));
                    let rel = if rng.gen() { rel.inverse() } else { rel };
                    let split = rng.gen_range(1..=3);
                    let starts: Vec<usize> = (0..n.saturating_sub(split - 1))
                        .filter(|&p| lp.word.0[p..p + split] == rel.0[..split])
                        .collect();
                    if starts.is_empty() {
                        continue;
                    }
                    Move::Cell {
                        pos: starts[rng.gen_range(0..starts.len())],
                        relator: rel,
                        split,
                    }
                }
            };
            let tagged = (r + 1..=b.radius()).find_map(|d| {
                let t = TaggedMove { mv: mv.clone(), min_dist: d };
                replay(c, &lp, r, std::slice::from_ref(&t)).ok()
            });
            if let Some(w) = tagged {
                lp = Loop::new(b, lp.base, w).unwrap();
                applied += 1;
                assert_eq!(winding_number(b, &lp), Some(w0));
            }
        }
    }
    assert!(applied > 1000);
}

#[test]
fn dehn_agrees_with_independent_oracles() {
    let m = surface2();
    let p = m.presentation().unwrap();
    let kb = knuth_bendix_complete(p, CompletionBudget::default());
    let id = m.identity_state();
    let mut words = vec![Word::empty()];
    let mut frontier = vec![Word::empty()];
    for _ in 0..6 {
        let mut next = Vec::new();
        for w in &frontier {
            for code in 0..8 {
                let l = Letter::from_code(code);
                if w.0.last() == Some(&l.inv()) {
                    continue;
                }
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        words.extend(next.iter().cloned());
        frontier = next;
    }
    assert_eq!(words.len(), 1 + 8 * (7usize.pow(6) - 1) / 6);
    for w in &words {
        let dehn = m.is_trivial(w).unwrap();
        assert_eq!(dehn, m.state_of(w) == id, "{}", m.format(w));
        if kb.reduce(w).is_empty() {
            assert!(dehn);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn dehn_matches_hash_on_long_words(w in word(4, 10), k in 0..4usize) {
        let m = surface2();
        let r = m.presentation().unwrap().relators[0].rotate(k);
        let v = free_reduce(&w.concat(&r).concat(&w.inverse()));
        prop_assert!(m.is_trivial(&v).unwrap());
        prop_assert_eq!(m.is_trivial(&w).unwrap(), m.state_of(&w) == m.identity_state());
    }
}
