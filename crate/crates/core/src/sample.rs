//! Seeded generators for randomized law checking. Everything here is
//! deterministic in the seed, so a failing case can be replayed from its
//! case number alone.
//!
//! Sizes are kept deliberately small — a handful of objects, single-digit
//! morphism counts, fibers of a few elements — because the laws being
//! exercised compose structures two or three deep, and the composites grow
//! multiplicatively.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::biset::{empty_biset, BiSet};
use crate::burnside::{biset_of_product_action, direct_sum};
use crate::catalog;
use crate::functor::{disjoint_union, Functor};
use crate::group::{homomorphisms, subgroups, transitive_gset, VertexGroup};
use crate::groupoid::{arc, Groupoid};
use crate::gset::{GSet, Variance};
use crate::span::{forward_span, Span};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// One connected building block, within the given object/morphism budget.
fn random_block(rng: &mut ChaCha8Rng, objects: usize, morphisms: usize) -> Option<Groupoid> {
    let mut fits: Vec<fn() -> Groupoid> = Vec::new();
    let candidates: [(usize, usize, fn() -> Groupoid); 9] = [
        (1, 1, || Groupoid::discrete(1)),
        (1, 2, || catalog::cyclic(2)),
        (1, 3, || catalog::cyclic(3)),
        (1, 4, || catalog::cyclic(4)),
        (1, 4, catalog::klein_four),
        (1, 5, || catalog::cyclic(5)),
        (1, 6, || catalog::cyclic(6)),
        (1, 6, || catalog::symmetric(3)),
        (2, 4, || catalog::contractible(2)),
    ];
    for (o, m, make) in candidates {
        if o <= objects && m <= morphisms {
            fits.push(make);
        }
    }
    fits.choose(rng).map(|make| make())
}

/// A groupoid of at most 3 objects and 8 morphisms, assembled from small
/// blocks. Empty roughly one time in twenty.
pub fn random_groupoid(rng: &mut ChaCha8Rng) -> Arc<Groupoid> {
    if rng.gen_bool(0.05) {
        return arc(Groupoid::discrete(0));
    }
    random_nonempty_groupoid(rng)
}

pub fn random_nonempty_groupoid(rng: &mut ChaCha8Rng) -> Arc<Groupoid> {
    let (mut objects, mut morphisms) = (3usize, 8usize);
    let first = random_block(rng, objects, morphisms).expect("budget admits a block");
    objects -= first.object_count();
    morphisms -= first.morphism_count();
    let mut out = arc(first);
    while rng.gen_bool(0.4) {
        let Some(next) = random_block(rng, objects, morphisms) else { break };
        objects -= next.object_count();
        morphisms -= next.morphism_count();
        out = disjoint_union(&out, &arc(next)).union;
    }
    out
}

/// A functor assembled per source component: a random target object, a
/// random vertex-group homomorphism there, and random connectors spreading
/// the component across the target's component.
pub fn random_functor(
    rng: &mut ChaCha8Rng,
    src: &Arc<Groupoid>,
    dst: &Arc<Groupoid>,
) -> Option<Functor> {
    if src.object_count() == 0 {
        return Some(
            Functor::new(Arc::clone(src), Arc::clone(dst), Vec::new(), Vec::new())
                .expect("empty functor"),
        );
    }
    if dst.object_count() == 0 {
        return None;
    }
    let dst_components = dst.components();
    // Per component: anchor object in dst, a vertex homomorphism there,
    // and per member a connector out of the anchor.
    struct Piece {
        rep: usize,
        src_vertex: VertexGroup,
        dst_vertex: VertexGroup,
        map: Vec<usize>,
    }
    let mut piece_of = vec![usize::MAX; src.object_count()];
    let mut object_table = vec![usize::MAX; src.object_count()];
    let mut connector = vec![usize::MAX; src.object_count()];
    let mut pieces = Vec::new();
    for members in &src.components().members {
        let rep = members[0];
        let anchor = rng.gen_range(0..dst.object_count());
        let src_vertex = VertexGroup::of(src, rep);
        let dst_vertex = VertexGroup::of(dst, anchor);
        let maps = homomorphisms(&src_vertex, &dst_vertex);
        let map = maps.choose(rng).expect("the trivial homomorphism always exists").clone();
        let reachable = &dst_components.members[dst_components.class_of[anchor]];
        for &a in members {
            let image = *reachable.choose(rng).expect("component is nonempty");
            piece_of[a] = pieces.len();
            object_table[a] = image;
            connector[a] = *dst.hom(anchor, image).choose(rng).expect("same component");
        }
        pieces.push(Piece { rep, src_vertex, dst_vertex, map });
    }
    let morphism_table = (0..src.morphism_count())
        .map(|m| {
            let (a, b) = (src.source(m), src.target(m));
            let piece = &pieces[piece_of[a]];
            let wa = src.hom(piece.rep, a)[0];
            let wb = src.hom(piece.rep, b)[0];
            let k = src.compose_unchecked(src.inverse(wb), src.compose_unchecked(m, wa));
            let k_idx = piece.src_vertex.index_of(k).expect("vertex element");
            let phi_k = piece.dst_vertex.morphism(piece.map[k_idx]);
            dst.compose_unchecked(
                connector[b],
                dst.compose_unchecked(phi_k, dst.inverse(connector[a])),
            )
        })
        .collect();
    Some(
        Functor::new(Arc::clone(src), Arc::clone(dst), object_table, morphism_table)
            .expect("componentwise assembly is a functor"),
    )
}

/// A sum of random transitive coset actions, at most `max_orbits` of them.
pub fn random_gset(
    rng: &mut ChaCha8Rng,
    base: &Arc<Groupoid>,
    variance: Variance,
    max_orbits: usize,
) -> GSet {
    let acting = match variance {
        Variance::Covariant => Arc::clone(base),
        Variance::Contravariant => arc(Groupoid::opposite(base)),
    };
    let mut parts = Vec::new();
    if acting.object_count() > 0 {
        for _ in 0..rng.gen_range(0..=max_orbits) {
            let o = rng.gen_range(0..acting.object_count());
            let vg = VertexGroup::of(&acting, o);
            let all = subgroups(&vg);
            let u = all.choose(rng).expect("at least the trivial subgroup");
            parts.push(transitive_gset(&acting, o, u));
        }
    }
    let combined = if parts.is_empty() {
        GSet::empty(acting, Variance::Covariant)
    } else {
        GSet::coproduct(&parts).expect("parts share a base").0
    };
    match variance {
        Variance::Covariant => combined,
        Variance::Contravariant => combined.flip(),
    }
}

/// A random admissible two-sided action over the given bases, with at
/// most `max_elements` elements. Pieces are transitive actions of
/// `(left)ᵒᵖ × right`, keeping only admissible ones.
pub fn random_admissible_biset(
    rng: &mut ChaCha8Rng,
    left: &Arc<Groupoid>,
    right: &Arc<Groupoid>,
    max_elements: usize,
) -> BiSet {
    let k = arc(Groupoid::product(&Groupoid::opposite(left), right));
    let mut out = empty_biset(Arc::clone(left), Arc::clone(right));
    if k.object_count() == 0 {
        return out;
    }
    let mut budget = max_elements;
    for _ in 0..rng.gen_range(0..=2usize) {
        let o = rng.gen_range(0..k.object_count());
        let vg = VertexGroup::of(&k, o);
        let mut pool = subgroups(&vg);
        pool.shuffle(rng);
        let piece = pool.iter().find_map(|u| {
            let b = biset_of_product_action(left, right, &transitive_gset(&k, o, u))
                .expect("transitive product actions repackage");
            (b.element_count() <= budget && b.is_admissible()).then_some(b)
        });
        if let Some(piece) = piece {
            budget -= piece.element_count();
            out = direct_sum(&out, &piece).expect("same bases");
        }
    }
    out
}

/// A random isomorphic relabeling: every fiber independently permuted,
/// both actions conjugated to match.
pub fn permuted_copy(rng: &mut ChaCha8Rng, x: &BiSet) -> BiSet {
    let (hb, gb) = (x.left(), x.right());
    let (nh, ng) = (hb.object_count(), gb.object_count());
    let perms: Vec<Vec<Vec<usize>>> = (0..nh)
        .map(|eta| {
            (0..ng)
                .map(|gamma| {
                    let mut p: Vec<usize> = (0..x.fiber(eta, gamma)).collect();
                    p.shuffle(rng);
                    p
                })
                .collect()
        })
        .collect();
    let mut inverse: Vec<Vec<Vec<usize>>> = perms.clone();
    for eta in 0..nh {
        for gamma in 0..ng {
            for (old, &new) in perms[eta][gamma].iter().enumerate() {
                inverse[eta][gamma][new] = old;
            }
        }
    }
    let fibers: Vec<Vec<usize>> =
        (0..nh).map(|eta| (0..ng).map(|gamma| x.fiber(eta, gamma)).collect()).collect();
    let g_action = (0..gb.morphism_count())
        .map(|g| {
            let (from, to) = (gb.source(g), gb.target(g));
            (0..nh)
                .map(|eta| {
                    (0..x.fiber(eta, from))
                        .map(|i| {
                            perms[eta][to][x.apply_right(g, eta, inverse[eta][from][i])]
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let h_action = (0..hb.morphism_count())
        .map(|h| {
            let (from, to) = (hb.source(h), hb.target(h));
            (0..ng)
                .map(|gamma| {
                    (0..x.fiber(to, gamma))
                        .map(|i| {
                            perms[from][gamma][x.apply_left(h, gamma, inverse[to][gamma][i])]
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    BiSet::new_relaxed(Arc::clone(hb), Arc::clone(gb), fibers, g_action, h_action)
        .expect("a relabeling of a valid action is valid")
}

/// A random span between the given bases: usually the span of a random
/// module, sometimes a one-legged span of a random functor, sometimes a
/// translation cover with a random second leg.
pub fn random_span(
    rng: &mut ChaCha8Rng,
    left_base: &Arc<Groupoid>,
    right_base: &Arc<Groupoid>,
) -> Span {
    let fallback = |rng: &mut ChaCha8Rng| {
        let x = random_admissible_biset(rng, left_base, right_base, 6);
        crate::comparison::span_of_biset(&x).expect("admissible modules spread out").0
    };
    match rng.gen_range(0..4usize) {
        0 => match random_functor(rng, left_base, right_base) {
            Some(p) => forward_span(&p),
            None => fallback(rng),
        },
        1 => {
            let t = random_gset(rng, left_base, Variance::Covariant, 2);
            let tr = t.translation_groupoid();
            match random_functor(rng, &tr.groupoid, right_base) {
                Some(second) => Span::new(tr.projection, second)
                    .expect("translation projections are finite weak covers"),
                None => fallback(rng),
            }
        }
        _ => fallback(rng),
    }
}
