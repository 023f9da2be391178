//! Vertex groups and small-group utilities.
//!
//! Everything downstream that classifies actions — subgroup enumeration for
//! transitive pieces, conjugacy of stabilizers, homomorphism search for
//! functor generation — funnels through the multiplication table of a
//! vertex group extracted here. Orders stay tiny (a dozen or two at most),
//! so plain closure enumeration and backtracking are the right tools.

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::groupoid::Groupoid;
use crate::gset::{GSet, Variance};

/// The group of self-morphisms at one object, reindexed to `0..order` with
/// a dense multiplication table.
#[derive(Debug, Clone)]
pub struct VertexGroup {
    object: usize,
    /// Ascending morphism ids; index in this list is the group element.
    elements: Vec<usize>,
    /// Morphism id -> element index (or MAX when not an endomorphism here).
    element_of_morphism: Vec<usize>,
    mult: Vec<Vec<usize>>,
    inv: Vec<usize>,
    identity: usize,
}

impl VertexGroup {
    pub fn of(g: &Groupoid, object: usize) -> VertexGroup {
        let elements = g.hom(object, object);
        let mut element_of_morphism = vec![usize::MAX; g.morphism_count()];
        for (i, &m) in elements.iter().enumerate() {
            element_of_morphism[m] = i;
        }
        let mult = elements
            .iter()
            .map(|&a| {
                elements
                    .iter()
                    .map(|&b| element_of_morphism[g.compose_unchecked(a, b)])
                    .collect()
            })
            .collect();
        let inv = elements.iter().map(|&a| element_of_morphism[g.inverse(a)]).collect();
        let identity = element_of_morphism[g.identity(object)];
        VertexGroup { object, elements, element_of_morphism, mult, inv, identity }
    }

    pub fn object(&self) -> usize {
        self.object
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Product `a·b` at element-index level ("apply b first" composition).
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mult[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn morphism(&self, idx: usize) -> usize {
        self.elements[idx]
    }

    pub fn index_of(&self, morphism: usize) -> Option<usize> {
        match self.element_of_morphism.get(morphism) {
            Some(&i) if i != usize::MAX => Some(i),
            _ => None,
        }
    }
}

/// Smallest subgroup containing `seed` (element indices), returned sorted.
pub fn subgroup_closure(vg: &VertexGroup, seed: &[usize]) -> Vec<usize> {
    let mut member = vec![false; vg.order()];
    member[vg.identity()] = true;
    let mut stack: Vec<usize> = vec![vg.identity()];
    for &s in seed {
        if !member[s] {
            member[s] = true;
            stack.push(s);
        }
    }
    // Close under products of current members; inverses follow for free in
    // a finite group.
    let mut members: Vec<usize> = stack.clone();
    let mut i = 0;
    while i < members.len() {
        let a = members[i];
        i += 1;
        for j in 0..members.len() {
            for p in [vg.mul(a, members[j]), vg.mul(members[j], a)] {
                if !member[p] {
                    member[p] = true;
                    members.push(p);
                }
            }
        }
    }
    members.sort_unstable();
    members
}

/// Every subgroup, as sorted element-index lists in lexicographic order.
pub fn subgroups(vg: &VertexGroup) -> Vec<Vec<usize>> {
    let trivial = vec![vg.identity()];
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    found.insert(trivial.clone());
    let mut frontier = vec![trivial];
    while let Some(h) = frontier.pop() {
        for g in 0..vg.order() {
            if h.binary_search(&g).is_ok() {
                continue;
            }
            let mut seed = h.clone();
            seed.push(g);
            let bigger = subgroup_closure(vg, &seed);
            if found.insert(bigger.clone()) {
                frontier.push(bigger);
            }
        }
    }
    found.into_iter().collect()
}

/// The conjugate `g H g⁻¹`, sorted.
pub fn conjugate_subgroup(vg: &VertexGroup, h: &[usize], g: usize) -> Vec<usize> {
    let gi = vg.inverse(g);
    let mut out: Vec<usize> = h.iter().map(|&x| vg.mul(vg.mul(g, x), gi)).collect();
    out.sort_unstable();
    out
}

/// One representative per conjugacy class of subgroups: the lexicographically
/// least member of each class, listed in lexicographic order.
pub fn subgroup_conjugacy_representatives(vg: &VertexGroup) -> Vec<Vec<usize>> {
    let all = subgroups(vg);
    let mut reps = Vec::new();
    for h in &all {
        let is_least = (0..vg.order()).all(|g| conjugate_subgroup(vg, h, g) >= *h);
        if is_least {
            reps.push(h.clone());
        }
    }
    reps
}

/// All group homomorphisms `src -> dst` as full element-index maps, found by
/// assigning images to a generating sequence and propagating products.
pub fn homomorphisms(src: &VertexGroup, dst: &VertexGroup) -> Vec<Vec<usize>> {
    let n = src.order();
    // Greedy generating sequence: repeatedly adjoin the least element not
    // yet generated.
    let mut gens = Vec::new();
    loop {
        let closure = subgroup_closure(src, &gens);
        if closure.len() == n {
            break;
        }
        let next = (0..n).find(|x| closure.binary_search(x).is_err()).unwrap();
        gens.push(next);
    }

    // Propagate a partial map to closure under products; None on conflict.
    fn propagate(
        src: &VertexGroup,
        dst: &VertexGroup,
        image: &mut Vec<Option<usize>>,
        mut fresh: Vec<usize>,
    ) -> bool {
        while let Some(a) = fresh.pop() {
            let known: Vec<usize> = (0..src.order()).filter(|&x| image[x].is_some()).collect();
            for &b in &known {
                for (p, q) in [(a, b), (b, a)] {
                    let prod = src.mul(p, q);
                    let want = dst.mul(image[p].unwrap(), image[q].unwrap());
                    match image[prod] {
                        Some(have) if have != want => return false,
                        Some(_) => {}
                        None => {
                            image[prod] = Some(want);
                            fresh.push(prod);
                        }
                    }
                }
            }
        }
        true
    }

    fn search(
        src: &VertexGroup,
        dst: &VertexGroup,
        gens: &[usize],
        image: &Vec<Option<usize>>,
        out: &mut Vec<Vec<usize>>,
    ) {
        match gens.split_first() {
            None => {
                if image.iter().all(|i| i.is_some()) {
                    out.push(image.iter().map(|i| i.unwrap()).collect());
                }
            }
            Some((&g, rest)) => {
                if image[g].is_some() {
                    search(src, dst, rest, image, out);
                    return;
                }
                for d in 0..dst.order() {
                    let mut next = image.clone();
                    next[g] = Some(d);
                    if propagate(src, dst, &mut next, vec![g]) {
                        search(src, dst, rest, &next, out);
                    }
                }
            }
        }
    }

    let mut image = vec![None; n];
    image[src.identity()] = Some(dst.identity());
    let mut out = Vec::new();
    search(src, dst, &gens, &image, &mut out);
    out.sort_unstable();
    out
}

/// The transitive covariant action of `base` determined by a connected
/// component (that of `object`) and a subgroup `u` of the vertex group at
/// `object`, given at element-index level. Fibers over the component carry
/// the left cosets of `u`; fibers elsewhere are empty. The action of an
/// arrow is transported to the vertex group through a fixed spanning family
/// of connecting morphisms (the least morphism from `object` to each
/// component member).
pub fn transitive_gset(base: &Arc<Groupoid>, object: usize, u: &[usize]) -> GSet {
    let vg = VertexGroup::of(base, object);
    debug_assert_eq!(subgroup_closure(&vg, u), u.to_vec(), "u must be a subgroup");
    let n = base.object_count();
    let connector: Vec<Option<usize>> = (0..n)
        .map(|a| base.hom(object, a).first().copied())
        .collect();

    // Left cosets gU ordered by least element; coset_of maps each group
    // element to its coset's position.
    let mut coset_of = vec![usize::MAX; vg.order()];
    let mut coset_reps = Vec::new();
    for g in 0..vg.order() {
        if coset_of[g] != usize::MAX {
            continue;
        }
        let id = coset_reps.len();
        coset_reps.push(g);
        for &x in u {
            coset_of[vg.mul(g, x)] = id;
        }
    }
    let coset_count = coset_reps.len();

    let fibers: Vec<usize> = (0..n)
        .map(|a| if connector[a].is_some() { coset_count } else { 0 })
        .collect();
    let action: Vec<Vec<usize>> = (0..base.morphism_count())
        .map(|k| {
            let (a, b) = (base.source(k), base.target(k));
            let (Some(wa), Some(wb)) = (connector[a], connector[b]) else {
                return Vec::new();
            };
            let transported = base.compose_unchecked(base.inverse(wb), base.compose_unchecked(k, wa));
            let gamma = vg.index_of(transported).expect("transported arrow is an endomorphism");
            (0..coset_count).map(|c| coset_of[vg.mul(gamma, coset_reps[c])]).collect()
        })
        .collect();
    GSet::new(Arc::clone(base), Variance::Covariant, fibers, action)
        .expect("coset action is functorial")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::groupoid::arc;

    #[test]
    fn vertex_group_table_matches_permutation_composition() {
        let (s3, perms) = catalog::symmetric_with_perms(3);
        let vg = VertexGroup::of(&s3, 0);
        assert_eq!(vg.order(), 6);
        for a in 0..6 {
            for b in 0..6 {
                let composed: Vec<usize> = (0..3).map(|i| perms[a][perms[b][i]]).collect();
                let idx = perms.iter().position(|p| *p == composed).unwrap();
                assert_eq!(vg.mul(a, b), idx);
            }
        }
    }

    #[test]
    fn symmetric_three_has_six_subgroups_in_four_classes() {
        let s3 = catalog::symmetric(3);
        let vg = VertexGroup::of(&s3, 0);
        let all = subgroups(&vg);
        assert_eq!(all.len(), 6);
        let orders: Vec<usize> = all.iter().map(|h| h.len()).collect();
        assert_eq!(orders.iter().filter(|&&o| o == 2).count(), 3);
        let reps = subgroup_conjugacy_representatives(&vg);
        assert_eq!(reps.len(), 4);
        let mut rep_orders: Vec<usize> = reps.iter().map(|h| h.len()).collect();
        rep_orders.sort_unstable();
        assert_eq!(rep_orders, vec![1, 2, 3, 6]);
    }

    #[test]
    fn klein_four_subgroups_are_all_self_conjugate() {
        let v4 = catalog::klein_four();
        let vg = VertexGroup::of(&v4, 0);
        assert_eq!(subgroups(&vg).len(), 5);
        assert_eq!(subgroup_conjugacy_representatives(&vg).len(), 5);
    }

    #[test]
    fn homomorphism_counts_match_hand_counts() {
        let c2 = VertexGroup::of(&catalog::cyclic(2), 0);
        let c3 = VertexGroup::of(&catalog::cyclic(3), 0);
        let s3 = VertexGroup::of(&catalog::symmetric(3), 0);
        assert_eq!(homomorphisms(&c2, &c2).len(), 2);
        assert_eq!(homomorphisms(&c3, &c2).len(), 1);
        assert_eq!(homomorphisms(&s3, &c2).len(), 2); // trivial and sign
        assert_eq!(homomorphisms(&c2, &s3).len(), 4); // identity element or one of three involutions
        for h in homomorphisms(&s3, &s3) {
            // Sanity: each claimed map really is multiplicative.
            for a in 0..6 {
                for b in 0..6 {
                    assert_eq!(h[s3.mul(a, b)], s3.mul(h[a], h[b]));
                }
            }
        }
    }

    #[test]
    fn coset_action_by_index_two_subgroup_of_symmetric_three() {
        let s3 = arc(catalog::symmetric(3));
        let vg = VertexGroup::of(&s3, 0);
        // A subgroup of order 2: identity plus the least involution.
        let invol = (0..6).find(|&g| g != vg.identity() && vg.mul(g, g) == vg.identity()).unwrap();
        let u = subgroup_closure(&vg, &[invol]);
        assert_eq!(u.len(), 2);
        let t = transitive_gset(&s3, 0, &u);
        assert_eq!(t.fiber_sizes(), &[3]);
        assert_eq!(t.orbits().class_count(), 1);
        assert!(!t.is_free());
    }

    #[test]
    fn trivial_subgroup_gives_the_regular_action() {
        let s3 = arc(catalog::symmetric(3));
        let vg = VertexGroup::of(&s3, 0);
        let t = transitive_gset(&s3, 0, &[vg.identity()]);
        assert_eq!(t.fiber_sizes(), &[6]);
        assert!(t.is_free());
        assert_eq!(t.orbits().class_count(), 1);
    }

    #[test]
    fn coset_action_spreads_over_its_component_only() {
        use crate::functor::disjoint_union;
        let sum = disjoint_union(&arc(catalog::contractible(2)), &arc(catalog::cyclic(2)));
        let base = sum.union;
        let vg = VertexGroup::of(&base, 0);
        let t = transitive_gset(&base, 0, &[vg.identity()]);
        assert_eq!(t.fiber_sizes(), &[1, 1, 0]);
        assert!(t.is_free());
        assert_eq!(t.orbits().class_count(), 1);
    }
}
