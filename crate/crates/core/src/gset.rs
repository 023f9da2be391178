//! Equivariant sets over a finite groupoid.
//!
//! A [`GSet`] assigns a finite fiber to each object of its base groupoid and
//! a bijection to each morphism. Covariant actions push fibers forward along
//! arrows; contravariant ones pull them back. A right action is the same
//! thing as a covariant action over the opposite groupoid, and
//! [`GSet::flip`] performs exactly that relabelling, so there is only one
//! code path for orbit and freeness logic.
//!
//! The module also builds the translation groupoid of an action, decides
//! freeness (with explicit failure witnesses), splits free actions into
//! corepresentable summands, recognises covering maps and converts them to
//! actions, and computes the balanced product of a right and a left action.

use std::collections::HashSet;
use std::sync::Arc;

use thiserror::Error;

use crate::functor::Functor;
use crate::groupoid::{Groupoid, RawGroupoid};
use crate::util::{Partition, UnionFind};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variance {
    /// Morphism `g: a -> b` acts `fiber(a) -> fiber(b)`.
    Covariant,
    /// Morphism `g: a -> b` acts `fiber(b) -> fiber(a)`.
    Contravariant,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GSetError {
    #[error("fiber size table has wrong length")]
    BadFibers,
    #[error("action table at morphism {morphism} has wrong shape")]
    BadAction { morphism: usize },
    #[error("identity of object {object} does not act as the identity")]
    IdentityActionBroken { object: usize },
    #[error("not functorial at g={g}, f={f} on element {element}")]
    NotFunctorial { g: usize, f: usize, element: usize },
    #[error("base groupoids differ")]
    BaseMismatch,
    #[error("variances differ")]
    VarianceMismatch,
    #[error("maps are not parallel")]
    NotParallel,
    #[error("not equivariant at morphism {morphism}, element {element}")]
    NotEquivariant { morphism: usize, element: usize },
    #[error("not a covering map: morphism {morphism} has {lifts} lifts at object {object}")]
    NotACover { object: usize, morphism: usize, lifts: usize },
    #[error("action is not free: {0}")]
    NotFree(FreeFailure),
}

/// Witness that an action is not free: two distinct morphisms out of
/// `from_object` move `element` (in the fiber of `from_object`) to the same
/// point of the fiber of `to_object`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FreeFailure {
    pub from_object: usize,
    pub to_object: usize,
    pub element: usize,
    pub first: usize,
    pub second: usize,
}

impl std::fmt::Display for FreeFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "morphisms {} and {} out of object {} agree on element {}",
            self.first, self.second, self.from_object, self.element
        )
    }
}

/// A finite equivariant set over a groupoid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GSet {
    base: Arc<Groupoid>,
    variance: Variance,
    fibers: Vec<usize>,
    /// Per morphism, the image table of its action (fiber-local indices).
    action: Vec<Vec<usize>>,
    /// Prefix sums of fiber sizes for global element numbering.
    offsets: Vec<usize>,
}

fn offsets_of(fibers: &[usize]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(fibers.len() + 1);
    let mut acc = 0;
    for &s in fibers {
        offsets.push(acc);
        acc += s;
    }
    offsets.push(acc);
    offsets
}

impl GSet {
    pub fn new(
        base: Arc<Groupoid>,
        variance: Variance,
        fibers: Vec<usize>,
        action: Vec<Vec<usize>>,
    ) -> Result<GSet, GSetError> {
        if fibers.len() != base.object_count() {
            return Err(GSetError::BadFibers);
        }
        if action.len() != base.morphism_count() {
            return Err(GSetError::BadAction { morphism: action.len() });
        }
        let (dom, cod): (Vec<usize>, Vec<usize>) = match variance {
            Variance::Covariant => (
                (0..base.morphism_count()).map(|m| base.source(m)).collect(),
                (0..base.morphism_count()).map(|m| base.target(m)).collect(),
            ),
            Variance::Contravariant => (
                (0..base.morphism_count()).map(|m| base.target(m)).collect(),
                (0..base.morphism_count()).map(|m| base.source(m)).collect(),
            ),
        };
        for m in 0..base.morphism_count() {
            if action[m].len() != fibers[dom[m]] || action[m].iter().any(|&y| y >= fibers[cod[m]]) {
                return Err(GSetError::BadAction { morphism: m });
            }
        }
        for o in 0..base.object_count() {
            let e = base.identity(o);
            if action[e].iter().enumerate().any(|(x, &y)| x != y) {
                return Err(GSetError::IdentityActionBroken { object: o });
            }
        }
        for g in 0..base.morphism_count() {
            for f in 0..base.morphism_count() {
                let Some(gf) = base.compose(g, f) else { continue };
                // Covariant: act(gf) = act(g) ∘ act(f); contravariant flips.
                let (outer, inner) = match variance {
                    Variance::Covariant => (g, f),
                    Variance::Contravariant => (f, g),
                };
                for x in 0..action[gf].len() {
                    if action[gf][x] != action[outer][action[inner][x]] {
                        return Err(GSetError::NotFunctorial { g, f, element: x });
                    }
                }
            }
        }
        // Invertibility of the base makes every action a bijection once
        // functoriality holds; no separate check needed.
        let offsets = offsets_of(&fibers);
        Ok(GSet { base, variance, fibers, action, offsets })
    }

    pub fn empty(base: Arc<Groupoid>, variance: Variance) -> GSet {
        let fibers = vec![0; base.object_count()];
        let action = vec![Vec::new(); base.morphism_count()];
        let offsets = offsets_of(&fibers);
        GSet { base, variance, fibers, action, offsets }
    }

    /// The covariant action `γ ↦ hom(γ0, γ)` with morphisms acting by
    /// postcomposition. Elements of each fiber are numbered by the position
    /// of the morphism in `hom(γ0, γ)`.
    pub fn corepresentable(base: &Arc<Groupoid>, gamma0: usize) -> GSet {
        assert!(gamma0 < base.object_count(), "object out of range");
        let homs: Vec<Vec<usize>> = (0..base.object_count()).map(|c| base.hom(gamma0, c)).collect();
        let fibers: Vec<usize> = homs.iter().map(|h| h.len()).collect();
        let action: Vec<Vec<usize>> = (0..base.morphism_count())
            .map(|g| {
                homs[base.source(g)]
                    .iter()
                    .map(|&f| {
                        let gf = base.compose_unchecked(g, f);
                        homs[base.target(g)]
                            .binary_search(&gf)
                            .expect("composite lies in hom set")
                    })
                    .collect()
            })
            .collect();
        let offsets = offsets_of(&fibers);
        GSet { base: Arc::clone(base), variance: Variance::Covariant, fibers, action, offsets }
    }

    pub fn base(&self) -> &Arc<Groupoid> {
        &self.base
    }

    pub fn variance(&self) -> Variance {
        self.variance
    }

    pub fn fiber_size(&self, o: usize) -> usize {
        self.fibers[o]
    }

    pub fn fiber_sizes(&self) -> &[usize] {
        &self.fibers
    }

    pub fn element_count(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn global_index(&self, o: usize, x: usize) -> usize {
        debug_assert!(x < self.fibers[o]);
        self.offsets[o] + x
    }

    /// Inverse of [`GSet::global_index`].
    pub fn element_at(&self, global: usize) -> (usize, usize) {
        let o = match self.offsets.binary_search(&global) {
            Ok(mut i) => {
                // Skip empty fibers sharing the same offset.
                while i + 1 < self.offsets.len() && self.offsets[i + 1] == global {
                    i += 1;
                }
                i
            }
            Err(i) => i - 1,
        };
        (o, global - self.offsets[o])
    }

    /// Object whose fiber the action of `m` consumes.
    pub fn acting_source(&self, m: usize) -> usize {
        match self.variance {
            Variance::Covariant => self.base.source(m),
            Variance::Contravariant => self.base.target(m),
        }
    }

    /// Object whose fiber the action of `m` lands in.
    pub fn acting_target(&self, m: usize) -> usize {
        match self.variance {
            Variance::Covariant => self.base.target(m),
            Variance::Contravariant => self.base.source(m),
        }
    }

    /// Apply morphism `m` to a fiber-local element index.
    pub fn apply(&self, m: usize, x: usize) -> usize {
        self.action[m][x]
    }

    pub fn action_table(&self, m: usize) -> &[usize] {
        &self.action[m]
    }

    /// Reinterpret over the opposite groupoid with the variance flipped.
    /// The tables are unchanged; only the bookkeeping moves, so a right
    /// action becomes an honest covariant action over `base.opposite()`.
    pub fn flip(&self) -> GSet {
        GSet {
            base: Arc::new(self.base.opposite()),
            variance: match self.variance {
                Variance::Covariant => Variance::Contravariant,
                Variance::Contravariant => Variance::Covariant,
            },
            fibers: self.fibers.clone(),
            action: self.action.clone(),
            offsets: self.offsets.clone(),
        }
    }

    /// Orbit partition of the global elements. The orbit set is the
    /// colimit of a covariant action (and the limit-free quotient of a
    /// contravariant one); it is always finite here.
    pub fn orbits(&self) -> Partition {
        let mut uf = UnionFind::new(self.element_count());
        for m in 0..self.base.morphism_count() {
            let from = self.acting_source(m);
            for x in 0..self.fibers[from] {
                uf.union(
                    self.global_index(from, x),
                    self.global_index(self.acting_target(m), self.action[m][x]),
                );
            }
        }
        uf.into_classes()
    }

    /// Freeness of a covariant action: for every element `x` the map
    /// `g ↦ g·x` must be injective on each hom set out of the object of
    /// `x`. Searches in lexicographic order and reports the first failure.
    pub fn freeness_failure(&self) -> Option<FreeFailure> {
        assert_eq!(self.variance, Variance::Covariant, "freeness is a covariant notion");
        for from in 0..self.base.object_count() {
            for to in 0..self.base.object_count() {
                let hom = self.base.hom(from, to);
                for x in 0..self.fibers[from] {
                    for i in 0..hom.len() {
                        for j in i + 1..hom.len() {
                            if self.action[hom[i]][x] == self.action[hom[j]][x] {
                                return Some(FreeFailure {
                                    from_object: from,
                                    to_object: to,
                                    element: x,
                                    first: hom[i],
                                    second: hom[j],
                                });
                            }
                        }
                    }
                }
            }
        }
        None
    }

    pub fn is_free(&self) -> bool {
        self.freeness_failure().is_none()
    }

    /// Injectivity of the shear map `(g, x) ↦ (x, g·x)`, checked literally
    /// by collecting images. Agrees with [`GSet::is_free`] but follows an
    /// independent route.
    pub fn shear_is_injective(&self) -> bool {
        assert_eq!(self.variance, Variance::Covariant, "shear is a covariant notion");
        let mut seen = HashSet::new();
        for m in 0..self.base.morphism_count() {
            let from = self.base.source(m);
            for x in 0..self.fibers[from] {
                let pair = (
                    self.global_index(from, x),
                    self.global_index(self.base.target(m), self.action[m][x]),
                );
                if !seen.insert(pair) {
                    return false;
                }
            }
        }
        true
    }

    /// Disjoint union of actions over the same base with matching variance.
    /// Also returns, per part, the map from part-global to union-global
    /// element indices.
    pub fn coproduct(parts: &[GSet]) -> Result<(GSet, Vec<Vec<usize>>), GSetError> {
        let base = match parts.first() {
            Some(p) => Arc::clone(&p.base),
            None => panic!("coproduct needs at least one part; use GSet::empty instead"),
        };
        let variance = parts[0].variance;
        for p in parts {
            if p.base != base {
                return Err(GSetError::BaseMismatch);
            }
            if p.variance != variance {
                return Err(GSetError::VarianceMismatch);
            }
        }
        let n = base.object_count();
        let mut fibers = vec![0usize; n];
        // Element layout inside a union fiber: parts in order.
        let mut part_fiber_offset: Vec<Vec<usize>> = Vec::with_capacity(parts.len());
        for p in parts {
            part_fiber_offset.push((0..n).map(|o| fibers[o]).collect());
            for o in 0..n {
                fibers[o] += p.fibers[o];
            }
        }
        let mut action: Vec<Vec<usize>> = Vec::with_capacity(base.morphism_count());
        for m in 0..base.morphism_count() {
            let from = parts[0].acting_source(m);
            let mut table = vec![0usize; fibers[from]];
            for (pi, p) in parts.iter().enumerate() {
                let to = p.acting_target(m);
                for x in 0..p.fibers[from] {
                    table[part_fiber_offset[pi][from] + x] =
                        part_fiber_offset[pi][to] + p.action[m][x];
                }
            }
            action.push(table);
        }
        let union = GSet::new(base, variance, fibers, action)?;
        let injections = parts
            .iter()
            .enumerate()
            .map(|(pi, p)| {
                (0..p.element_count())
                    .map(|g| {
                        let (o, x) = p.element_at(g);
                        union.global_index(o, part_fiber_offset[pi][o] + x)
                    })
                    .collect()
            })
            .collect();
        Ok((union, injections))
    }

    /// Split a free covariant action into corepresentable summands, one per
    /// orbit, with the reassembly isomorphism. The summand for an orbit is
    /// based at the object of its least element.
    pub fn decompose_free(&self) -> Result<FreeDecomposition, GSetError> {
        if let Some(w) = self.freeness_failure() {
            return Err(GSetError::NotFree(w));
        }
        let orbits = self.orbits();
        let mut summand_objects = Vec::new();
        let mut parts = Vec::new();
        let mut part_images: Vec<Vec<usize>> = Vec::new();
        for rep in orbits.representatives() {
            let (gamma_i, x_i) = self.element_at(rep);
            summand_objects.push(gamma_i);
            let corep = GSet::corepresentable(&self.base, gamma_i);
            // Image of each hom element f under f ↦ f·x_i, recorded as a
            // global element of self.
            let mut images = Vec::with_capacity(corep.element_count());
            for c in 0..self.base.object_count() {
                for f in self.base.hom(gamma_i, c) {
                    images.push(self.global_index(c, self.action[f][x_i]));
                }
            }
            parts.push(corep);
            part_images.push(images);
        }
        if parts.is_empty() {
            let coproduct = GSet::empty(Arc::clone(&self.base), Variance::Covariant);
            let iso = GSetMap::new(coproduct.clone(), self.clone(), vec![Vec::new(); self.base.object_count()])?;
            return Ok(FreeDecomposition { summand_objects, coproduct, iso });
        }
        let (coproduct, injections) = GSet::coproduct(&parts)?;
        let mut components: Vec<Vec<usize>> =
            (0..self.base.object_count()).map(|o| vec![0; coproduct.fiber_size(o)]).collect();
        for (pi, part) in parts.iter().enumerate() {
            for g in 0..part.element_count() {
                let union_global = injections[pi][g];
                let (o, x) = coproduct.element_at(union_global);
                let (o2, y) = self.element_at(part_images[pi][g]);
                debug_assert_eq!(o, o2);
                components[o][x] = y;
            }
        }
        let iso = GSetMap::new(coproduct.clone(), self.clone(), components)?;
        debug_assert!(iso.is_bijective());
        Ok(FreeDecomposition { summand_objects, coproduct, iso })
    }

    /// Translation groupoid of a covariant action: objects are the global
    /// elements, and each pair `(g, x)` with `x` in the acting fiber of `g`
    /// is one morphism `x -> g·x`. Comes with the projection down to the
    /// base groupoid.
    pub fn translation_groupoid(&self) -> Translation {
        assert_eq!(self.variance, Variance::Covariant, "translation needs a covariant action");
        let base = &self.base;
        let mor_count: usize = (0..base.morphism_count()).map(|m| self.fibers[base.source(m)]).sum();
        let mut mor_offsets = Vec::with_capacity(base.morphism_count() + 1);
        {
            let mut acc = 0;
            for m in 0..base.morphism_count() {
                mor_offsets.push(acc);
                acc += self.fibers[base.source(m)];
            }
            mor_offsets.push(acc);
        }
        let index = |g: usize, x_local: usize| mor_offsets[g] + x_local;
        let mut raw = RawGroupoid {
            object_count: self.element_count(),
            mor_source: Vec::with_capacity(mor_count),
            mor_target: Vec::with_capacity(mor_count),
            identity: vec![None; self.element_count()],
            composites: Vec::new(),
        };
        let mut proj_mor = Vec::with_capacity(mor_count);
        for g in 0..base.morphism_count() {
            let from = base.source(g);
            for x in 0..self.fibers[from] {
                raw.mor_source.push(self.global_index(from, x));
                raw.mor_target.push(self.global_index(base.target(g), self.action[g][x]));
                proj_mor.push(g);
            }
        }
        for o in 0..base.object_count() {
            for x in 0..self.fibers[o] {
                raw.identity[self.global_index(o, x)] = Some(index(base.identity(o), x));
            }
        }
        for g in 0..base.morphism_count() {
            for f in 0..base.morphism_count() {
                let Some(gf) = base.compose(g, f) else { continue };
                let from = base.source(f);
                for x in 0..self.fibers[from] {
                    raw.composites.push((
                        index(g, self.action[f][x]),
                        index(f, x),
                        index(gf, x),
                    ));
                }
            }
        }
        let groupoid = Arc::new(Groupoid::validate(&raw).expect("translation groupoid is valid"));
        let proj_obj = (0..self.element_count()).map(|g| self.element_at(g).0).collect();
        let projection = Functor::new(Arc::clone(&groupoid), Arc::clone(base), proj_obj, proj_mor)
            .expect("translation projection is a functor");
        Translation { groupoid, projection }
    }
}

/// Translation groupoid with its projection to the base.
#[derive(Debug, Clone)]
pub struct Translation {
    pub groupoid: Arc<Groupoid>,
    pub projection: Functor,
}

/// An equivariant map between actions over the same base with the same
/// variance: a fiberwise function commuting with every morphism's action.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GSetMap {
    source: GSet,
    target: GSet,
    components: Vec<Vec<usize>>,
}

impl GSetMap {
    pub fn new(source: GSet, target: GSet, components: Vec<Vec<usize>>) -> Result<GSetMap, GSetError> {
        if source.base != target.base {
            return Err(GSetError::BaseMismatch);
        }
        if source.variance != target.variance {
            return Err(GSetError::VarianceMismatch);
        }
        let n = source.base.object_count();
        if components.len() != n {
            return Err(GSetError::BadFibers);
        }
        for o in 0..n {
            if components[o].len() != source.fibers[o]
                || components[o].iter().any(|&y| y >= target.fibers[o])
            {
                return Err(GSetError::BadFibers);
            }
        }
        for m in 0..source.base.morphism_count() {
            let from = source.acting_source(m);
            let to = source.acting_target(m);
            for x in 0..source.fibers[from] {
                if components[to][source.action[m][x]] != target.action[m][components[from][x]] {
                    return Err(GSetError::NotEquivariant { morphism: m, element: x });
                }
            }
        }
        Ok(GSetMap { source, target, components })
    }

    pub fn source(&self) -> &GSet {
        &self.source
    }

    pub fn target(&self) -> &GSet {
        &self.target
    }

    pub fn apply(&self, o: usize, x: usize) -> usize {
        self.components[o][x]
    }

    pub fn is_bijective(&self) -> bool {
        (0..self.source.base.object_count())
            .all(|o| crate::util::is_bijection(&self.components[o], self.target.fibers[o]))
    }
}

/// A free action split into corepresentable summands plus the reassembly
/// isomorphism from their disjoint union back onto the original action.
#[derive(Debug, Clone)]
pub struct FreeDecomposition {
    pub summand_objects: Vec<usize>,
    pub coproduct: GSet,
    pub iso: GSetMap,
}

/// Fiberwise coequalizer of a parallel pair of equivariant maps, with the
/// projection from the target onto the quotient.
pub fn coequalizer(u: &GSetMap, v: &GSetMap) -> Result<(GSet, GSetMap), GSetError> {
    if u.source != v.source || u.target != v.target {
        return Err(GSetError::NotParallel);
    }
    let y = &u.target;
    let base = Arc::clone(&y.base);
    let mut uf = UnionFind::new(y.element_count());
    for o in 0..base.object_count() {
        for x in 0..u.source.fibers[o] {
            uf.union(
                y.global_index(o, u.components[o][x]),
                y.global_index(o, v.components[o][x]),
            );
        }
    }
    let classes = uf.into_classes();
    // Number the classes fiber by fiber; the relation never crosses fibers.
    let n = base.object_count();
    let mut fiber_class_index = vec![usize::MAX; classes.class_count()];
    let mut fibers = vec![0usize; n];
    let mut proj: Vec<Vec<usize>> = (0..n).map(|o| vec![0; y.fibers[o]]).collect();
    for g in 0..y.element_count() {
        let (o, x) = y.element_at(g);
        let c = classes.class_of[g];
        if fiber_class_index[c] == usize::MAX {
            fiber_class_index[c] = fibers[o];
            fibers[o] += 1;
        }
        proj[o][x] = fiber_class_index[c];
    }
    let mut action: Vec<Vec<usize>> = Vec::with_capacity(base.morphism_count());
    for m in 0..base.morphism_count() {
        let from = y.acting_source(m);
        let to = y.acting_target(m);
        let mut table = vec![usize::MAX; fibers[from]];
        for x in 0..y.fibers[from] {
            let cls = proj[from][x];
            let img = proj[to][y.action[m][x]];
            // Equivariance of u and v makes this independent of the member.
            assert!(table[cls] == usize::MAX || table[cls] == img, "quotient action ill-defined");
            table[cls] = img;
        }
        action.push(table);
    }
    let z = GSet::new(base, y.variance, fibers, action)?;
    let projection = GSetMap::new(y.clone(), z.clone(), proj)?;
    Ok((z, projection))
}

/// Decide whether a functor is a covering map: every morphism out of the
/// image of an object must lift uniquely through it.
pub fn covering_failure(p: &Functor) -> Option<GSetError> {
    let (src, tgt) = (p.source(), p.target());
    for eta in 0..src.object_count() {
        for g in tgt.star(p.apply_object(eta)) {
            let lifts = src
                .star(eta)
                .into_iter()
                .filter(|&h| p.apply_morphism(h) == g)
                .count();
            if lifts != 1 {
                return Some(GSetError::NotACover { object: eta, morphism: g, lifts });
            }
        }
    }
    None
}

pub fn is_covering_map(p: &Functor) -> bool {
    covering_failure(p).is_none()
}

/// Convert a covering map `p: H -> G` into the covariant action of `G`
/// whose fiber at `γ` lists `p⁻¹(γ)` in object order; morphisms act by
/// unique lifting. Round trip: the translation groupoid of the result is
/// again `p`, up to the canonical renumbering of objects.
pub fn gset_from_cover(p: &Functor) -> Result<GSet, GSetError> {
    if let Some(err) = covering_failure(p) {
        return Err(err);
    }
    let (src, tgt) = (p.source(), p.target());
    let mut fiber_objects: Vec<Vec<usize>> = vec![Vec::new(); tgt.object_count()];
    for eta in 0..src.object_count() {
        fiber_objects[p.apply_object(eta)].push(eta);
    }
    let local_of = |eta: usize| {
        fiber_objects[p.apply_object(eta)]
            .binary_search(&eta)
            .expect("object listed in its fiber")
    };
    let fibers: Vec<usize> = fiber_objects.iter().map(|f| f.len()).collect();
    let mut action: Vec<Vec<usize>> = Vec::with_capacity(tgt.morphism_count());
    for g in 0..tgt.morphism_count() {
        let table = fiber_objects[tgt.source(g)]
            .iter()
            .map(|&eta| {
                let lift = src
                    .star(eta)
                    .into_iter()
                    .find(|&h| p.apply_morphism(h) == g)
                    .expect("covering map lifts uniquely");
                local_of(src.target(lift))
            })
            .collect();
        action.push(table);
    }
    GSet::new(Arc::clone(tgt), Variance::Covariant, fibers, action)
}

/// Balanced product of a right (contravariant) and left (covariant) action
/// over the same base: pairs `(s, t)` over each object, glued along
/// `(s·g, t) ~ (s, g·t)`.
#[derive(Debug, Clone)]
pub struct BalancedProduct {
    pub partition: Partition,
    offsets: Vec<usize>,
    t_sizes: Vec<usize>,
}

impl BalancedProduct {
    pub fn class_count(&self) -> usize {
        self.partition.class_count()
    }

    /// Index of the pair `(s, t)` over `gamma` in the glued set.
    pub fn class_of(&self, gamma: usize, s: usize, t: usize) -> usize {
        self.partition.class_of[self.offsets[gamma] + s * self.t_sizes[gamma] + t]
    }
}

pub fn balanced_product(s: &GSet, t: &GSet) -> Result<BalancedProduct, GSetError> {
    if s.base != t.base {
        return Err(GSetError::BaseMismatch);
    }
    if s.variance != Variance::Contravariant || t.variance != Variance::Covariant {
        return Err(GSetError::VarianceMismatch);
    }
    let base = &s.base;
    let n = base.object_count();
    let mut offsets = Vec::with_capacity(n + 1);
    let mut acc = 0;
    for o in 0..n {
        offsets.push(acc);
        acc += s.fibers[o] * t.fibers[o];
    }
    offsets.push(acc);
    let t_sizes = t.fibers.clone();
    let pair = |o: usize, si: usize, ti: usize| offsets[o] + si * t_sizes[o] + ti;
    let mut uf = UnionFind::new(acc);
    for g in 0..base.morphism_count() {
        let (from, to) = (base.source(g), base.target(g));
        // s lives over `to` (contravariant pulls back), t over `from`.
        for si in 0..s.fibers[to] {
            for ti in 0..t.fibers[from] {
                uf.union(
                    pair(from, s.action[g][si], ti),
                    pair(to, si, t.action[g][ti]),
                );
            }
        }
    }
    Ok(BalancedProduct { partition: uf.into_classes(), offsets, t_sizes })
}

/// The one-element contravariant action, the terminal object on that side.
fn terminal_contravariant(base: &Arc<Groupoid>) -> GSet {
    GSet::new(
        Arc::clone(base),
        Variance::Contravariant,
        vec![1; base.object_count()],
        vec![vec![0]; base.morphism_count()],
    )
    .expect("terminal action is functorial")
}

/// Orbit quotient of a covariant action: classes over the global element
/// indices together with the projection (`class_of`) and one
/// representative per class. Computed as the balanced product of the
/// one-element contravariant action with `t`, which glues the same pairs
/// a direct orbit walk would but through an independent code path — so
/// [`GSet::orbits`] and `colimit` can cross-check each other.
pub fn colimit(t: &GSet) -> Partition {
    assert_eq!(t.variance, Variance::Covariant, "the orbit quotient is a covariant notion");
    balanced_product(&terminal_contravariant(&t.base), t)
        .expect("terminal balanced product is well-formed")
        .partition
}

/// Whether the orbit quotient is finite. Every action this crate can
/// represent is finite, so this always holds; it exists because callers
/// state the precondition explicitly at composition boundaries.
pub fn is_finite(t: &GSet) -> bool {
    colimit(t).class_count() < usize::MAX
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::groupoid::arc;

    fn c2() -> Arc<Groupoid> {
        arc(catalog::cyclic(2))
    }

    /// Four points, the involution swapping them in two pairs.
    fn two_swapped_pairs() -> GSet {
        GSet::new(c2(), Variance::Covariant, vec![4], vec![
            vec![0, 1, 2, 3],
            vec![1, 0, 3, 2],
        ])
        .unwrap()
    }

    #[test]
    fn orbit_count_matches_hand_enumeration() {
        let t = two_swapped_pairs();
        // Oracle: {0,1} and {2,3} by direct closure.
        let orbits = t.orbits();
        assert_eq!(orbits.class_count(), 2);
        assert_eq!(orbits.members[0], vec![0, 1]);
        assert_eq!(orbits.members[1], vec![2, 3]);
    }

    #[test]
    fn orbit_quotient_agrees_with_the_orbit_walk() {
        let regular = GSet::corepresentable(&c2(), 0);
        let trivial_pair =
            GSet::new(c2(), Variance::Covariant, vec![2], vec![vec![0, 1], vec![0, 1]]).unwrap();
        for t in [regular, trivial_pair, two_swapped_pairs()] {
            let q = colimit(&t);
            assert_eq!(q.class_of, t.orbits().class_of);
            assert!(is_finite(&t));
        }
    }

    #[test]
    fn empty_action_has_an_empty_quotient() {
        let t = GSet::empty(c2(), Variance::Covariant);
        assert_eq!(colimit(&t).class_count(), 0);
        assert!(is_finite(&t));
    }

    #[test]
    fn trivial_one_point_action_is_not_free_with_witness() {
        let t = GSet::new(c2(), Variance::Covariant, vec![1], vec![vec![0], vec![0]]).unwrap();
        let w = t.freeness_failure().expect("not free");
        assert_eq!((w.first, w.second), (0, 1));
        assert!(!t.shear_is_injective());
    }

    #[test]
    fn corepresentable_is_free() {
        let s3 = arc(catalog::symmetric(3));
        let t = GSet::corepresentable(&s3, 0);
        assert!(t.is_free());
        assert!(t.shear_is_injective());
        assert_eq!(t.element_count(), 6);
    }

    #[test]
    fn validation_rejects_non_functorial_action() {
        // s acts as a 3-cycle on 3 points: s∘s = e would need the square
        // of the cycle to be the identity, and it is not.
        let err = GSet::new(c2(), Variance::Covariant, vec![3], vec![
            vec![0, 1, 2],
            vec![1, 2, 0],
        ])
        .unwrap_err();
        assert!(matches!(err, GSetError::NotFunctorial { .. }));
    }

    #[test]
    fn decompose_free_reassembles_the_regular_orbits() {
        let t = two_swapped_pairs();
        let d = t.decompose_free().unwrap();
        assert_eq!(d.summand_objects, vec![0, 0]);
        assert_eq!(d.coproduct.element_count(), 4);
        assert!(d.iso.is_bijective());
    }

    #[test]
    fn decompose_free_rejects_non_free_actions() {
        let t = GSet::new(c2(), Variance::Covariant, vec![1], vec![vec![0], vec![0]]).unwrap();
        assert!(matches!(t.decompose_free(), Err(GSetError::NotFree(_))));
    }

    #[test]
    fn translation_of_one_free_orbit_is_contractible() {
        let t = GSet::new(c2(), Variance::Covariant, vec![2], vec![
            vec![0, 1],
            vec![1, 0],
        ])
        .unwrap();
        let tr = t.translation_groupoid();
        assert_eq!(tr.groupoid.object_count(), 2);
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(tr.groupoid.hom(a, b).len(), 1);
            }
        }
        assert_eq!(tr.groupoid.components().class_count(), 1);
    }

    #[test]
    fn translation_of_fixed_point_returns_the_vertex_group() {
        let t = GSet::new(c2(), Variance::Covariant, vec![1], vec![vec![0], vec![0]]).unwrap();
        let tr = t.translation_groupoid();
        assert_eq!(tr.groupoid.object_count(), 1);
        assert_eq!(tr.groupoid.hom(0, 0).len(), 2);
    }

    #[test]
    fn orbit_count_equals_translation_component_count() {
        for t in [
            two_swapped_pairs(),
            GSet::corepresentable(&arc(catalog::symmetric(3)), 0),
            GSet::empty(c2(), Variance::Covariant),
        ] {
            assert_eq!(t.orbits().class_count(), t.translation_groupoid().groupoid.components().class_count());
        }
    }

    #[test]
    fn coequalizer_of_kernel_pair_recovers_the_quotient() {
        // Y = two regular orbits; q folds them onto one; the kernel pair
        // has components for each agreeing pair.
        let y = two_swapped_pairs();
        let z = GSet::new(c2(), Variance::Covariant, vec![2], vec![
            vec![0, 1],
            vec![1, 0],
        ])
        .unwrap();
        let fold = GSetMap::new(y.clone(), z.clone(), vec![vec![0, 1, 0, 1]]).unwrap();
        // Kernel pair fiber: pairs (i, j) with fold(i) == fold(j).
        let mut pairs = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                if fold.apply(0, i) == fold.apply(0, j) {
                    pairs.push((i, j));
                }
            }
        }
        let act = |m: usize| -> Vec<usize> {
            pairs
                .iter()
                .map(|&(i, j)| {
                    let im = (y.apply(m, i), y.apply(m, j));
                    pairs.iter().position(|&p| p == im).unwrap()
                })
                .collect()
        };
        let x = GSet::new(c2(), Variance::Covariant, vec![pairs.len()], vec![act(0), act(1)]).unwrap();
        let u = GSetMap::new(x.clone(), y.clone(), vec![pairs.iter().map(|p| p.0).collect()]).unwrap();
        let v = GSetMap::new(x.clone(), y.clone(), vec![pairs.iter().map(|p| p.1).collect()]).unwrap();
        let (q, proj) = coequalizer(&u, &v).unwrap();
        // Oracle: brute-force closure of the pair relation on {0,1,2,3}.
        let mut class = vec![0, 1, 2, 3];
        loop {
            let mut changed = false;
            for &(i, j) in &pairs {
                let (a, b) = (class[i], class[j]);
                if a != b {
                    let m = a.min(b);
                    for c in class.iter_mut() {
                        if *c == a || *c == b {
                            *c = m;
                        }
                    }
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        let expected: std::collections::BTreeSet<usize> = class.iter().copied().collect();
        assert_eq!(q.fiber_size(0), expected.len());
        assert_eq!(proj.apply(0, 0), proj.apply(0, 2));
        assert_ne!(proj.apply(0, 0), proj.apply(0, 1));
    }

    #[test]
    fn coequalizer_universal_property_on_a_small_instance() {
        // u, v: X ⇒ Y with X a single regular orbit mapping onto the two
        // orbits of Y; the coequalizer glues them.
        let y = two_swapped_pairs();
        let x = GSet::new(c2(), Variance::Covariant, vec![2], vec![
            vec![0, 1],
            vec![1, 0],
        ])
        .unwrap();
        let u = GSetMap::new(x.clone(), y.clone(), vec![vec![0, 1]]).unwrap();
        let v = GSetMap::new(x.clone(), y.clone(), vec![vec![2, 3]]).unwrap();
        let (z, proj) = coequalizer(&u, &v).unwrap();
        assert_eq!(z.fiber_size(0), 2);
        // Enumerate all cocones into a small test object and check a unique
        // factorization exists for each.
        let w = GSet::new(c2(), Variance::Covariant, vec![2], vec![
            vec![0, 1],
            vec![1, 0],
        ])
        .unwrap();
        let mut cocones = 0;
        for img0 in 0..2 {
            // A map Y -> W is determined on each orbit by the image of its
            // least element; enumerate and filter for naturality + cocone.
            for img2 in 0..2 {
                let comp = vec![vec![
                    img0,
                    w.apply(1, img0),
                    img2,
                    w.apply(1, img2),
                ]];
                let Ok(m) = GSetMap::new(y.clone(), w.clone(), comp) else { continue };
                let coequalizes = (0..2).all(|i| {
                    m.apply(0, u.apply(0, i)) == m.apply(0, v.apply(0, i))
                });
                if !coequalizes {
                    continue;
                }
                cocones += 1;
                // Factor through z: well-defined on classes and unique.
                let mut through = vec![usize::MAX; z.fiber_size(0)];
                for yy in 0..4 {
                    let c = proj.apply(0, yy);
                    assert!(through[c] == usize::MAX || through[c] == m.apply(0, yy));
                    through[c] = m.apply(0, yy);
                }
                let factored = GSetMap::new(z.clone(), w.clone(), vec![through]).unwrap();
                for yy in 0..4 {
                    assert_eq!(factored.apply(0, proj.apply(0, yy)), m.apply(0, yy));
                }
            }
        }
        assert!(cocones > 0, "some cocone exists");
    }

    #[test]
    fn discrete_pair_over_point_is_a_covering() {
        let d2 = arc(Groupoid::discrete(2));
        let one = arc(Groupoid::discrete(1));
        let p = Functor::new(d2, one, vec![0, 0], vec![0, 0]).unwrap();
        assert!(is_covering_map(&p));
        let t = gset_from_cover(&p).unwrap();
        assert_eq!(t.fiber_size(0), 2);
    }

    #[test]
    fn group_quotient_is_not_a_covering() {
        let p = Functor::new(c2(), arc(Groupoid::discrete(1)), vec![0], vec![0, 0]).unwrap();
        assert!(matches!(
            covering_failure(&p),
            Some(GSetError::NotACover { object: 0, morphism: 0, lifts: 2 })
        ));
    }

    #[test]
    fn identity_cover_recovers_singleton_fibers() {
        let s3 = arc(catalog::symmetric(3));
        let t = gset_from_cover(&Functor::identity(&s3)).unwrap();
        assert_eq!(t.fiber_sizes(), &[1]);
        assert!(!t.is_free()); // one point with the full S3 action
    }

    #[test]
    fn cover_round_trip_is_exact_on_translation_projections() {
        for t in [two_swapped_pairs(), GSet::corepresentable(&arc(catalog::symmetric(3)), 0)] {
            let tr = t.translation_groupoid();
            assert!(is_covering_map(&tr.projection));
            let back = gset_from_cover(&tr.projection).unwrap();
            assert_eq!(back, t);
        }
    }

    #[test]
    fn balanced_product_with_point_computes_orbits() {
        let t = two_swapped_pairs();
        let point = GSet::new(c2(), Variance::Contravariant, vec![1], vec![vec![0], vec![0]]).unwrap();
        let b = balanced_product(&point, &t).unwrap();
        assert_eq!(b.class_count(), t.orbits().class_count());
    }

    #[test]
    fn balanced_product_against_corepresentable_collapses_to_a_fiber() {
        let s3 = arc(catalog::symmetric(3));
        // Right action: the regular right translation.
        let q = GSet::new(
            Arc::clone(&s3),
            Variance::Contravariant,
            vec![6],
            (0..6).map(|g| (0..6).map(|x| s3.compose_unchecked(x, g)).collect()).collect(),
        )
        .unwrap();
        let b = balanced_product(&q, &GSet::corepresentable(&s3, 0)).unwrap();
        // Classes biject with the fiber of q at the representing object.
        assert_eq!(b.class_count(), 6);
        // The collapse (q, f) ↦ q·f is constant on classes.
        for s in 0..6 {
            for f in 0..6 {
                let collapsed = s3.compose_unchecked(s, f);
                // (s·f, id) lies in the same class as (s, f).
                assert_eq!(b.class_of(0, s, f), b.class_of(0, collapsed, 0));
            }
        }
    }

    #[test]
    fn flip_moves_a_right_action_to_the_opposite_base() {
        let s3 = arc(catalog::symmetric(3));
        let q = GSet::new(
            Arc::clone(&s3),
            Variance::Contravariant,
            vec![6],
            (0..6).map(|g| (0..6).map(|x| s3.compose_unchecked(x, g)).collect()).collect(),
        )
        .unwrap();
        let flipped = q.flip();
        assert_eq!(flipped.variance(), Variance::Covariant);
        assert!(flipped.is_free());
        assert_eq!(flipped.orbits().class_count(), 1);
    }

    #[test]
    fn empty_gset_everywhere() {
        let t = GSet::empty(c2(), Variance::Covariant);
        assert!(t.is_free());
        assert_eq!(t.orbits().class_count(), 0);
        assert!(t.decompose_free().is_ok());
    }
}
