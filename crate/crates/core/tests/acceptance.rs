//! Acceptance gate: the nine release criteria, one test each.
//!
//! Every test prints `criterion N (<name>): PASS` as its last act, so a
//! `--nocapture` run reads as a checklist. Oracles that guard numeric
//! claims are implemented here from scratch — raw permutation arithmetic
//! for subgroup and double-coset counts — so they share no code with the
//! library paths they check.

use std::sync::Arc;

use burnside_core::biset::{
    compose_bisets, empty_biset, find_isomorphism, identity_biset, module_of_functor, BiSet,
};
use burnside_core::burnside::{
    burnside_group, canonical_form, component_split, direct_sum, indecomposable_classes,
    indecomposables,
};
use burnside_core::catalog;
use burnside_core::comparison::{module_of_span, span_round_trip};
use burnside_core::functor::Functor;
use burnside_core::groupoid::arc;
use burnside_core::gset::{GSet, Variance};
use burnside_core::laws::{
    self, composition_agrees, freeness_laws_hold, module_trip_holds, pi0_chain_holds,
    span_trip_holds, Suite,
};
use burnside_core::sample;
use burnside_core::span::{compose_spans, forward_span, transfer_span, unit_span, Span};
use burnside_core::Groupoid;

// ---------------------------------------------------------------------
// Permutation oracle, independent of the library
// ---------------------------------------------------------------------

/// All permutations of `0..n`, one `Vec` each, in lexicographic order.
fn oracle_perms(n: usize) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::new();
        for p in &out {
            for i in 0..n {
                if !p.contains(&i) {
                    let mut q = p.clone();
                    q.push(i);
                    next.push(q);
                }
            }
        }
        out = next;
    }
    out.sort();
    out
}

/// Index of `g ∘ f` ("f first") in the element list.
fn oracle_mul(elements: &[Vec<usize>], g: usize, f: usize) -> usize {
    let composite: Vec<usize> = elements[f].iter().map(|&i| elements[g][i]).collect();
    elements.binary_search(&composite).expect("group is closed")
}

fn oracle_inv(elements: &[Vec<usize>], g: usize) -> usize {
    let n = elements[g].len();
    let mut inverse = vec![0; n];
    for i in 0..n {
        inverse[elements[g][i]] = i;
    }
    elements.binary_search(&inverse).expect("group has inverses")
}

/// All subgroups of a group of order ≤ 16, as element-index bitmasks.
fn oracle_subgroups(elements: &[Vec<usize>]) -> Vec<u32> {
    let order = elements.len();
    let id = elements
        .iter()
        .position(|p| p.iter().enumerate().all(|(i, &v)| i == v))
        .expect("identity present") as u32;
    (0..(1u32 << order))
        .filter(|&mask| {
            mask & (1 << id) != 0
                && (0..order).all(|a| {
                    mask & (1 << a) == 0
                        || (0..order).all(|b| {
                            mask & (1 << b) == 0
                                || mask & (1 << oracle_mul(elements, a, b)) != 0
                        })
                })
        })
        .collect()
}

/// Number of subgroups up to conjugacy.
fn oracle_subgroup_classes(elements: &[Vec<usize>]) -> usize {
    let subgroups = oracle_subgroups(elements);
    let conjugate = |mask: u32, g: usize| -> u32 {
        let mut out = 0u32;
        for a in 0..elements.len() {
            if mask & (1 << a) != 0 {
                let c = oracle_mul(elements, oracle_mul(elements, g, a), oracle_inv(elements, g));
                out |= 1 << c;
            }
        }
        out
    };
    let mut seen: Vec<u32> = Vec::new();
    let mut classes = 0;
    for &h in &subgroups {
        if seen.contains(&h) {
            continue;
        }
        classes += 1;
        for g in 0..elements.len() {
            let c = conjugate(h, g);
            if !seen.contains(&c) {
                seen.push(c);
            }
        }
    }
    classes
}

/// Double cosets `H g K` in the listed group: count and sorted sizes.
fn oracle_double_cosets(elements: &[Vec<usize>], h: &[usize], k: &[usize]) -> Vec<usize> {
    let mut assigned = vec![false; elements.len()];
    let mut sizes = Vec::new();
    for g in 0..elements.len() {
        if assigned[g] {
            continue;
        }
        let mut size = 0;
        for &a in h {
            for &b in k {
                let c = oracle_mul(elements, oracle_mul(elements, a, g), b);
                if !assigned[c] {
                    assigned[c] = true;
                    size += 1;
                }
            }
        }
        sizes.push(size);
    }
    sizes.sort_unstable();
    sizes
}

// ---------------------------------------------------------------------
// Shared instance pools (fixed seeds, so every run checks the same data)
// ---------------------------------------------------------------------

fn point() -> Arc<Groupoid> {
    arc(Groupoid::discrete(1))
}

fn base_pool() -> Vec<Arc<Groupoid>> {
    vec![
        arc(catalog::cyclic(2)),
        arc(catalog::cyclic(3)),
        arc(catalog::contractible(2)),
        arc(catalog::symmetric(3)),
        point(),
        arc(catalog::klein_four()),
    ]
}

/// The bi-sets the whole gate exercises: the units of the stock bases,
/// fifty seeded random admissible bi-sets over pairs from the pool, and
/// the double-coset composite of [`c2_into_s3`].
fn suite_bisets() -> Vec<BiSet> {
    let pool = base_pool();
    let mut out: Vec<BiSet> = pool.iter().map(identity_biset).collect();
    for i in 0..50u64 {
        let left = &pool[(i as usize) % pool.len()];
        let right = &pool[(i as usize / pool.len() + i as usize) % pool.len()];
        let mut rng = sample::rng(4000 + i);
        out.push(sample::random_admissible_biset(&mut rng, left, right, 5));
    }
    let q = c2_into_s3();
    let transfer = module_of_span(&transfer_span(&q).expect("group functors transfer"))
        .expect("transfer module is admissible");
    out.push(compose_bisets(&transfer, &module_of_functor(&q)).expect("middle bases match"));
    out
}

/// The inclusion of the two-element group onto `{1, (0 1)}` inside the
/// symmetric group on three letters.
fn c2_into_s3() -> Functor {
    let c2 = arc(catalog::cyclic(2));
    let (s3, perms) = catalog::symmetric_with_perms(3);
    let swap = perms.iter().position(|p| p == &vec![1, 0, 2]).expect("transposition listed");
    Functor::new(Arc::clone(&c2), arc(s3), vec![0], vec![0, swap]).expect("inclusion is a functor")
}

/// A seeded span whose apex stays small enough for the pullback-based
/// round trips; falls back to the graph of a functor if sampling keeps
/// drawing big apexes.
fn bounded_span(seed: u64, left: &Arc<Groupoid>, right: &Arc<Groupoid>) -> Span {
    for attempt in 0..10 {
        let mut rng = sample::rng(seed ^ (attempt * 0x9E37_79B9));
        let s = sample::random_span(&mut rng, left, right);
        if s.apex().morphism_count() <= 60 {
            return s;
        }
    }
    let mut rng = sample::rng(seed);
    match sample::random_functor(&mut rng, left, right) {
        Some(f) => forward_span(&f),
        None => unit_span(left),
    }
}

// ---------------------------------------------------------------------
// The nine criteria
// ---------------------------------------------------------------------

#[test]
fn criterion_1_basis_ranks() {
    let c2 = arc(catalog::cyclic(2));
    let c3 = arc(catalog::cyclic(3));
    let s3 = arc(catalog::symmetric(3));
    let one = point();

    // Oracle: transitive actions of a group correspond to subgroups up to
    // conjugacy, counted here by raw permutation arithmetic.
    let c2_oracle = oracle_subgroup_classes(&oracle_perms(2));
    let s3_oracle = oracle_subgroup_classes(&oracle_perms(3));
    let cycle = {
        let all = oracle_perms(3);
        let c: Vec<Vec<usize>> = all
            .iter()
            .filter(|p| catalog::parity(p) == 0)
            .cloned()
            .collect();
        c
    };
    let c3_oracle = oracle_subgroup_classes(&cycle);

    assert_eq!(c2_oracle, 2);
    assert_eq!(s3_oracle, 4);
    assert_eq!(c3_oracle, 2);

    assert_eq!(burnside_group(&c2, &one, 8).len(), c2_oracle);
    assert_eq!(burnside_group(&s3, &one, 12).len(), s3_oracle);
    assert_eq!(burnside_group(&c3, &one, 9).len(), c3_oracle);

    println!("criterion 1 (basis ranks): PASS");
}

#[test]
fn criterion_2_double_cosets() {
    let q = c2_into_s3();
    let p = q.clone();

    // Oracle: double cosets of {1, (0 1)} against itself in S3, by raw
    // permutation arithmetic.
    let perms = oracle_perms(3);
    let swap = perms.iter().position(|x| x == &vec![1, 0, 2]).expect("transposition");
    let id = perms.iter().position(|x| x == &vec![0, 1, 2]).expect("identity");
    let oracle_sizes = oracle_double_cosets(&perms, &[id, swap], &[id, swap]);
    assert_eq!(oracle_sizes, vec![2, 4]);

    // Correspondence side: transfer along q after the graph of p.
    let composed = compose_spans(&transfer_span(&q).expect("inclusion transfers"), &forward_span(&p))
        .expect("middle bases match");
    let components = composed.span.apex().components();
    assert_eq!(components.class_count(), oracle_sizes.len());
    let mut apex_sizes: Vec<usize> = components.members.iter().map(Vec::len).collect();
    apex_sizes.sort_unstable();
    assert_eq!(apex_sizes, oracle_sizes);

    // The composite correspondence round-trips through its bi-set up to
    // equivalence.
    let (_, report) = span_round_trip(&composed.span).expect("round trip builds");
    assert!(report.ok(), "round-trip witness failed: {report:?}");

    // Bi-set side: the matching module composite splits into one piece
    // per double coset, and reading the composite correspondence back as
    // a module gives the same thing.
    let transfer = module_of_span(&transfer_span(&q).expect("inclusion transfers"))
        .expect("transfer module is admissible");
    let induction = module_of_functor(&p);
    let composite = compose_bisets(&transfer, &induction).expect("middle bases match");
    assert_eq!(indecomposables(&composite).len(), oracle_sizes.len());
    let via_span = module_of_span(&composed.span).expect("composite span reads back");
    assert_eq!(canonical_form(&via_span), canonical_form(&composite));
    assert!(find_isomorphism(&via_span, &composite).is_some());

    println!("criterion 2 (double cosets): PASS");
}

#[test]
fn criterion_3_coherence_laws() {
    for (suite, cases) in [(Suite::Pentagon, 100), (Suite::Triangle, 100)] {
        for outcome in laws::run_suite(suite, 30_000, cases) {
            assert!(
                outcome.passed,
                "{}[{}] failed: {}",
                outcome.suite.name(),
                outcome.index,
                outcome.detail
            );
        }
    }
    println!("criterion 3 (coherence laws): PASS");
}

#[test]
fn criterion_4_model_round_trips() {
    let pool = base_pool();

    let mut modules = 0;
    for x in suite_bisets() {
        module_trip_holds(&x).unwrap_or_else(|e| panic!("module round trip failed: {e}"));
        modules += 1;
    }
    assert!(modules >= 50, "only {modules} module round trips ran");

    let mut spans = 0;
    for i in 0..50u64 {
        let left = &pool[(i as usize) % pool.len()];
        let right = &pool[(i as usize + 2) % pool.len()];
        let s = bounded_span(5000 + i, left, right);
        span_trip_holds(&s).unwrap_or_else(|e| panic!("span round trip failed: {e}"));
        spans += 1;
    }
    assert_eq!(spans, 50);

    println!("criterion 4 (model round trips): PASS");
}

#[test]
fn criterion_5_composition_comparison() {
    let small = [
        arc(catalog::contractible(1)),
        arc(catalog::cyclic(2)),
        arc(catalog::cyclic(3)),
        arc(catalog::contractible(2)),
    ];
    let mut checked = 0;
    for i in 0..30u64 {
        let b0 = &small[(i as usize) % small.len()];
        let b1 = &small[(i as usize + 1) % small.len()];
        let b2 = &small[(i as usize + 2) % small.len()];
        let mut rng = sample::rng(6000 + i);
        let x = sample::random_admissible_biset(&mut rng, b1, b0, 3);
        let y = sample::random_admissible_biset(&mut rng, b2, b1, 2);
        composition_agrees(&x, &y)
            .unwrap_or_else(|e| panic!("composition comparison {i} failed: {e}"));
        checked += 1;
    }
    assert_eq!(checked, 30);
    println!("criterion 5 (composition comparison): PASS");
}

#[test]
fn criterion_6_action_equivalences() {
    let pool = base_pool();

    // Freeness, the shear view, decomposition, and the orbit-count chain
    // on one hundred actions; the stock corepresentables guarantee free
    // instances are present.
    let mut free_seen = 0;
    let mut run = |t: &GSet| {
        if t.is_free() {
            free_seen += 1;
        }
        freeness_laws_hold(t).unwrap_or_else(|e| panic!("action laws failed: {e}"));
    };
    for base in &pool {
        run(&GSet::corepresentable(base, 0));
    }
    for i in 0..(100 - pool.len()) as u64 {
        let base = &pool[(i as usize) % pool.len()];
        let mut rng = sample::rng(7000 + i);
        run(&sample::random_gset(&mut rng, base, Variance::Covariant, 3));
    }
    assert!(free_seen >= pool.len(), "too few free instances: {free_seen}");

    // Covering round trips, both directions, on fifty seeded cases (the
    // round-trip suite also re-checks the module and span trips).
    for outcome in laws::run_suite(Suite::RoundTrip, 30_600, 50) {
        assert!(outcome.passed, "round-trip[{}] failed: {}", outcome.index, outcome.detail);
    }

    println!("criterion 6 (action equivalences): PASS");
}

#[test]
fn criterion_7_component_chain() {
    let mut checked = 0;
    for x in suite_bisets() {
        pi0_chain_holds(&x).unwrap_or_else(|e| panic!("component chain failed: {e}"));
        checked += 1;
    }
    assert!(checked > 50);
    println!("criterion 7 (component chain): PASS");
}

#[test]
fn criterion_8_additivity() {
    let c2 = arc(catalog::cyclic(2));
    let c3 = arc(catalog::cyclic(3));
    let one = point();
    let split = component_split(&c2, &c3);
    let union = &split.union.union;

    // Slice a bi-set over the disjoint union down to one block, working
    // directly on its tables.
    let slice = |z: &BiSet, into: &Functor| -> BiSet {
        let block = into.source();
        let fibers: Vec<Vec<usize>> = (0..1)
            .map(|eta| {
                (0..block.object_count())
                    .map(|o| z.fiber(eta, into.apply_object(o)))
                    .collect()
            })
            .collect();
        let g_action: Vec<Vec<Vec<usize>>> = (0..block.morphism_count())
            .map(|m| {
                let src = into.apply_object(block.source(m));
                let image = into.apply_morphism(m);
                vec![(0..z.fiber(0, src)).map(|x| z.apply_right(image, 0, x)).collect()]
            })
            .collect();
        let h_action: Vec<Vec<Vec<usize>>> = vec![(0..block.object_count())
            .map(|o| (0..z.fiber(0, into.apply_object(o))).collect())
            .collect()];
        BiSet::new(Arc::clone(&one), Arc::clone(block), fibers, g_action, h_action)
            .expect("a block slice of an admissible bi-set is admissible")
    };

    for i in 0..20u64 {
        let mut rng = sample::rng(8000 + i);
        let z = sample::random_admissible_biset(&mut rng, &one, union, 6);
        for (restrict, into) in [
            (&split.restrict_first, &split.union.into_left),
            (&split.restrict_second, &split.union.into_right),
        ] {
            let recovered = compose_bisets(restrict, &z).expect("middle bases match");
            let expected = slice(&z, into);
            assert_eq!(canonical_form(&recovered), canonical_form(&expected));
            assert!(find_isomorphism(&recovered, &expected).is_some());
        }
    }

    // The empty groupoid is a zero object: one class in each hom monoid
    // against every stock base, and everything composed through it is
    // empty.
    let empty = arc(Groupoid::discrete(0));
    for g in base_pool() {
        assert!(indecomposable_classes(&empty, &g).is_empty());
        assert!(indecomposable_classes(&g, &empty).is_empty());
        let through = compose_bisets(
            &empty_biset(Arc::clone(&empty), Arc::clone(&g)),
            &empty_biset(Arc::clone(&g), Arc::clone(&empty)),
        )
        .expect("middle bases match");
        assert_eq!(through.element_count(), 0);
        assert_eq!(canonical_form(&through), canonical_form(&empty_biset(Arc::clone(&g), Arc::clone(&g))));
    }

    println!("criterion 8 (additivity): PASS");
}

#[test]
fn criterion_9_canonical_codes() {
    let pool = base_pool();
    let sizes = |x: &BiSet| -> Vec<usize> {
        let mut v = Vec::new();
        for eta in 0..x.left().object_count() {
            for gamma in 0..x.right().object_count() {
                v.push(x.fiber(eta, gamma));
            }
        }
        v
    };
    let agree = |a: &BiSet, b: &BiSet| {
        let codes_equal = canonical_form(a) == canonical_form(b);
        let found = find_isomorphism(a, b).is_some();
        assert_eq!(
            codes_equal, found,
            "code equality ({codes_equal}) disagrees with search ({found})"
        );
        found
    };

    let mut pairs = 0;
    let mut twisted_isos = 0;
    for i in 0..100u64 {
        let left = &pool[(i as usize) % pool.len()];
        let right = &pool[(i as usize + 3) % pool.len()];
        let mut rng = sample::rng(9000 + i);
        let x = sample::random_admissible_biset(&mut rng, left, right, 5);

        // A relabeled copy must be recognised as isomorphic.
        let twisted = sample::permuted_copy(&mut rng, &x);
        assert!(agree(&x, &twisted), "a relabeled copy stopped being isomorphic");
        twisted_isos += 1;

        // An independent draw with the same fiber sizes where possible:
        // a near miss the codes must not confuse.
        let mut fresh = sample::random_admissible_biset(&mut rng, left, right, 5);
        for _ in 0..4 {
            if sizes(&fresh) == sizes(&x) {
                break;
            }
            fresh = sample::random_admissible_biset(&mut rng, left, right, 5);
        }
        agree(&x, &fresh);
        pairs += 2;
    }
    assert_eq!(twisted_isos, 100);

    // Same shape, different structure: two trivial orbits against one
    // free orbit over the two-element group.
    let basis = indecomposable_classes(&arc(catalog::cyclic(2)), &point());
    let trivial = basis.iter().find(|b| b.element_count() == 1).expect("trivial orbit");
    let free = basis.iter().find(|b| b.element_count() == 2).expect("free orbit");
    let doubled_trivial = direct_sum(trivial, trivial).expect("same bases");
    assert_eq!(sizes(&doubled_trivial), sizes(free));
    assert!(!agree(&doubled_trivial, free), "shape-equal pieces conflated");
    pairs += 1;

    assert!(pairs >= 200, "only {pairs} pairs checked");
    println!("criterion 9 (canonical codes): PASS");
}
