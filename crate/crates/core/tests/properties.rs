//! Property tests for the structural invariants the library promises.
//!
//! Strategies draw a seed and rebuild instances through the seeded
//! samplers, so every failure shrinks to a seed that reproduces it.

use std::sync::Arc;

use proptest::prelude::*;

use burnside_core::biset::{find_isomorphism, BiSet};
use burnside_core::burnside::{canonical_form, direct_sum, indecomposables};
use burnside_core::functor::disjoint_union;
use burnside_core::groupoid::arc;
use burnside_core::gset::{colimit, is_finite, GSet, Variance};
use burnside_core::sample;
use burnside_core::Groupoid;

fn groupoid_strategy() -> impl Strategy<Value = Arc<Groupoid>> {
    any::<u64>().prop_map(|seed| sample::random_nonempty_groupoid(&mut sample::rng(seed)))
}

fn covariant_gset_strategy() -> impl Strategy<Value = GSet> {
    any::<u64>().prop_map(|seed| {
        let mut rng = sample::rng(seed);
        let base = sample::random_nonempty_groupoid(&mut rng);
        sample::random_gset(&mut rng, &base, Variance::Covariant, 3)
    })
}

fn biset_strategy() -> impl Strategy<Value = BiSet> {
    any::<u64>().prop_map(|seed| {
        let mut rng = sample::rng(seed);
        let left = sample::random_nonempty_groupoid(&mut rng);
        let right = sample::random_nonempty_groupoid(&mut rng);
        sample::random_admissible_biset(&mut rng, &left, &right, 4)
    })
}

/// Two bi-sets over the same pair of bases, so they can be summed.
fn summable_pair_strategy() -> impl Strategy<Value = (BiSet, BiSet)> {
    any::<u64>().prop_map(|seed| {
        let mut rng = sample::rng(seed);
        let left = sample::random_nonempty_groupoid(&mut rng);
        let right = sample::random_nonempty_groupoid(&mut rng);
        let a = sample::random_admissible_biset(&mut rng, &left, &right, 3);
        let b = sample::random_admissible_biset(&mut rng, &left, &right, 3);
        (a, b)
    })
}

proptest! {
    #[test]
    fn opposite_is_an_involution(g in groupoid_strategy()) {
        let there_and_back = g.opposite().opposite();
        prop_assert_eq!(&there_and_back, &*g);
    }

    #[test]
    fn product_counts_multiply(a in groupoid_strategy(), b in groupoid_strategy()) {
        let p = Groupoid::product(&a, &b);
        prop_assert_eq!(p.object_count(), a.object_count() * b.object_count());
        prop_assert_eq!(p.morphism_count(), a.morphism_count() * b.morphism_count());
    }

    #[test]
    fn disjoint_union_adds_components(a in groupoid_strategy(), b in groupoid_strategy()) {
        let sum = disjoint_union(&a, &b);
        prop_assert_eq!(
            sum.union.components().class_count(),
            a.components().class_count() + b.components().class_count()
        );
        // The two inclusions land in disjoint ranges covering the union.
        prop_assert_eq!(
            sum.union.object_count(),
            a.object_count() + b.object_count()
        );
    }

    #[test]
    fn quotient_matches_the_orbit_walk(t in covariant_gset_strategy()) {
        // The coend-style quotient and the direct orbit walk are
        // independent implementations of the same partition.
        let quotient = colimit(&t);
        let orbits = t.orbits();
        prop_assert_eq!(quotient.class_count(), orbits.class_count());
        prop_assert_eq!(quotient.class_of, orbits.class_of);
        prop_assert!(is_finite(&t));
    }

    #[test]
    fn freeness_agrees_with_the_shear(t in covariant_gset_strategy()) {
        prop_assert_eq!(t.is_free(), t.shear_is_injective());
    }

    #[test]
    fn relabeling_preserves_the_code(x in biset_strategy(), twist_seed in any::<u64>()) {
        let twisted = sample::permuted_copy(&mut sample::rng(twist_seed), &x);
        prop_assert_eq!(canonical_form(&x), canonical_form(&twisted));
        prop_assert!(find_isomorphism(&x, &twisted).is_some());
    }

    #[test]
    fn summing_adds_pieces((a, b) in summable_pair_strategy()) {
        let sum = direct_sum(&a, &b).expect("bases match by construction");
        prop_assert_eq!(sum.element_count(), a.element_count() + b.element_count());
        prop_assert_eq!(
            indecomposables(&sum).len(),
            indecomposables(&a).len() + indecomposables(&b).len()
        );
    }
}

#[test]
fn empty_base_is_allowed_in_products() {
    let empty = arc(Groupoid::discrete(0));
    let one = arc(Groupoid::discrete(1));
    let p = Groupoid::product(&empty, &one);
    assert_eq!(p.object_count(), 0);
    assert_eq!(p.components().class_count(), 0);
}
