//! Functors and natural transformations between finite groupoids.
//!
//! Both are table-backed and fully validated on construction. Equivalence
//! checking is constructive: when a functor is fully faithful and
//! essentially surjective, [`is_equivalence`] assembles an explicit
//! quasi-inverse with unit and counit transformations, all re-validated.

use std::sync::Arc;

use thiserror::Error;

use crate::groupoid::{Groupoid, RawGroupoid};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FunctorError {
    #[error("object map has wrong length or out-of-range entries")]
    BadObjectMap,
    #[error("morphism map has wrong length or out-of-range entries")]
    BadMorphismMap,
    #[error("not a functor: endpoints of morphism {morphism} not preserved")]
    EndpointsNotPreserved { morphism: usize },
    #[error("not a functor: identity of object {object} not preserved")]
    IdentityNotPreserved { object: usize },
    #[error("not a functor: composite of g={g}, f={f} not preserved")]
    CompositionNotPreserved { g: usize, f: usize },
    #[error("functors are not composable (middle groupoid differs)")]
    NotComposable,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NatTransError {
    #[error("component list has wrong length or out-of-range entries")]
    BadComponents,
    #[error("the two functors are not parallel")]
    NotParallel,
    #[error("component at object {object} has wrong endpoints")]
    WrongEndpoints { object: usize },
    #[error("not natural at morphism {morphism}")]
    NotNatural { morphism: usize },
}

/// A functor between finite groupoids, stored as object and morphism tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Functor {
    source: Arc<Groupoid>,
    target: Arc<Groupoid>,
    on_objects: Vec<usize>,
    on_morphisms: Vec<usize>,
}

impl Functor {
    pub fn new(
        source: Arc<Groupoid>,
        target: Arc<Groupoid>,
        on_objects: Vec<usize>,
        on_morphisms: Vec<usize>,
    ) -> Result<Functor, FunctorError> {
        if on_objects.len() != source.object_count()
            || on_objects.iter().any(|&o| o >= target.object_count())
        {
            return Err(FunctorError::BadObjectMap);
        }
        if on_morphisms.len() != source.morphism_count()
            || on_morphisms.iter().any(|&m| m >= target.morphism_count())
        {
            return Err(FunctorError::BadMorphismMap);
        }
        for f in 0..source.morphism_count() {
            let img = on_morphisms[f];
            if target.source(img) != on_objects[source.source(f)]
                || target.target(img) != on_objects[source.target(f)]
            {
                return Err(FunctorError::EndpointsNotPreserved { morphism: f });
            }
        }
        for o in 0..source.object_count() {
            if on_morphisms[source.identity(o)] != target.identity(on_objects[o]) {
                return Err(FunctorError::IdentityNotPreserved { object: o });
            }
        }
        for f in 0..source.morphism_count() {
            for g in 0..source.morphism_count() {
                if let Some(gf) = source.compose(g, f) {
                    let expect = target
                        .compose(on_morphisms[g], on_morphisms[f])
                        .ok_or(FunctorError::CompositionNotPreserved { g, f })?;
                    if on_morphisms[gf] != expect {
                        return Err(FunctorError::CompositionNotPreserved { g, f });
                    }
                }
            }
        }
        Ok(Functor { source, target, on_objects, on_morphisms })
    }

    pub fn identity(g: &Arc<Groupoid>) -> Functor {
        Functor {
            source: Arc::clone(g),
            target: Arc::clone(g),
            on_objects: (0..g.object_count()).collect(),
            on_morphisms: (0..g.morphism_count()).collect(),
        }
    }

    /// The functor from the terminal groupoid picking out object `o`.
    pub fn at_object(target: &Arc<Groupoid>, o: usize) -> Functor {
        assert!(o < target.object_count(), "object out of range");
        Functor {
            source: Arc::new(Groupoid::discrete(1)),
            target: Arc::clone(target),
            on_objects: vec![o],
            on_morphisms: vec![target.identity(o)],
        }
    }

    /// Composite `g∘f` (apply `f` first). The middle groupoid must agree.
    pub fn compose(g: &Functor, f: &Functor) -> Result<Functor, FunctorError> {
        if f.target != g.source {
            return Err(FunctorError::NotComposable);
        }
        Ok(Functor {
            source: Arc::clone(&f.source),
            target: Arc::clone(&g.target),
            on_objects: f.on_objects.iter().map(|&o| g.on_objects[o]).collect(),
            on_morphisms: f.on_morphisms.iter().map(|&m| g.on_morphisms[m]).collect(),
        })
    }

    pub fn source(&self) -> &Arc<Groupoid> {
        &self.source
    }

    pub fn target(&self) -> &Arc<Groupoid> {
        &self.target
    }

    pub fn apply_object(&self, o: usize) -> usize {
        self.on_objects[o]
    }

    pub fn apply_morphism(&self, m: usize) -> usize {
        self.on_morphisms[m]
    }

    pub fn object_table(&self) -> &[usize] {
        &self.on_objects
    }

    pub fn morphism_table(&self) -> &[usize] {
        &self.on_morphisms
    }

    /// True when the underlying tables are bijections (an isomorphism of
    /// groupoids, stronger than an equivalence).
    pub fn is_strict_isomorphism(&self) -> bool {
        crate::util::is_bijection(&self.on_objects, self.target.object_count())
            && crate::util::is_bijection(&self.on_morphisms, self.target.morphism_count())
    }
}

/// A natural transformation `from ⇒ to` between parallel functors, with
/// one component morphism of the target groupoid per source object.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NatTrans {
    from: Functor,
    to: Functor,
    components: Vec<usize>,
}

impl NatTrans {
    pub fn new(from: Functor, to: Functor, components: Vec<usize>) -> Result<NatTrans, NatTransError> {
        if from.source != to.source || from.target != to.target {
            return Err(NatTransError::NotParallel);
        }
        let src = &from.source;
        let tgt = &from.target;
        if components.len() != src.object_count()
            || components.iter().any(|&c| c >= tgt.morphism_count())
        {
            return Err(NatTransError::BadComponents);
        }
        for o in 0..src.object_count() {
            let c = components[o];
            if tgt.source(c) != from.on_objects[o] || tgt.target(c) != to.on_objects[o] {
                return Err(NatTransError::WrongEndpoints { object: o });
            }
        }
        for f in 0..src.morphism_count() {
            let (a, b) = (src.source(f), src.target(f));
            let left = tgt.compose_unchecked(components[b], from.on_morphisms[f]);
            let right = tgt.compose_unchecked(to.on_morphisms[f], components[a]);
            if left != right {
                return Err(NatTransError::NotNatural { morphism: f });
            }
        }
        Ok(NatTrans { from, to, components })
    }

    pub fn identity(f: &Functor) -> NatTrans {
        let components = (0..f.source.object_count())
            .map(|o| f.target.identity(f.on_objects[o]))
            .collect();
        NatTrans { from: f.clone(), to: f.clone(), components }
    }

    pub fn from_functor(&self) -> &Functor {
        &self.from
    }

    pub fn to_functor(&self) -> &Functor {
        &self.to
    }

    pub fn component(&self, o: usize) -> usize {
        self.components[o]
    }

    pub fn components(&self) -> &[usize] {
        &self.components
    }

    /// Componentwise inverse, `to ⇒ from`.
    pub fn inverse(&self) -> NatTrans {
        NatTrans {
            from: self.to.clone(),
            to: self.from.clone(),
            components: self.components.iter().map(|&c| self.from.target.inverse(c)).collect(),
        }
    }

    /// Vertical composite: `second ∘ first` where `first: F ⇒ G` and
    /// `second: G ⇒ H`.
    pub fn vertical(second: &NatTrans, first: &NatTrans) -> Result<NatTrans, NatTransError> {
        if first.to != second.from {
            return Err(NatTransError::NotParallel);
        }
        let tgt = &first.from.target;
        let components = (0..first.components.len())
            .map(|o| tgt.compose_unchecked(second.components[o], first.components[o]))
            .collect();
        NatTrans::new(first.from.clone(), second.to.clone(), components)
    }

    /// Whisker a functor on the outside: `F · α : F∘A ⇒ F∘B` for
    /// `α : A ⇒ B` and `F` out of the common target.
    pub fn whisker_post(f: &Functor, alpha: &NatTrans) -> Result<NatTrans, NatTransError> {
        if alpha.from.target != f.source {
            return Err(NatTransError::NotParallel);
        }
        let from = Functor::compose(f, &alpha.from).expect("checked composable");
        let to = Functor::compose(f, &alpha.to).expect("checked composable");
        let components = alpha.components.iter().map(|&c| f.on_morphisms[c]).collect();
        NatTrans::new(from, to, components)
    }

    /// Whisker a functor on the inside: `α · F : A∘F ⇒ B∘F` for
    /// `α : A ⇒ B` and `F` into the common source.
    pub fn whisker_pre(alpha: &NatTrans, f: &Functor) -> Result<NatTrans, NatTransError> {
        if f.target != alpha.from.source {
            return Err(NatTransError::NotParallel);
        }
        let from = Functor::compose(&alpha.from, f).expect("checked composable");
        let to = Functor::compose(&alpha.to, f).expect("checked composable");
        let components = f.on_objects.iter().map(|&o| alpha.components[o]).collect();
        NatTrans::new(from, to, components)
    }
}

/// Disjoint union of two groupoids with its inclusion functors. The first
/// summand keeps its indices, the second is shifted past it.
#[derive(Debug, Clone)]
pub struct Coproduct {
    pub union: Arc<Groupoid>,
    pub into_left: Functor,
    pub into_right: Functor,
}

pub fn disjoint_union(a: &Arc<Groupoid>, b: &Arc<Groupoid>) -> Coproduct {
    let (na, ma) = (a.object_count(), a.morphism_count());
    let (nb, mb) = (b.object_count(), b.morphism_count());
    let mut raw = RawGroupoid {
        object_count: na + nb,
        mor_source: Vec::with_capacity(ma + mb),
        mor_target: Vec::with_capacity(ma + mb),
        identity: Vec::with_capacity(na + nb),
        composites: Vec::new(),
    };
    for f in 0..ma {
        raw.mor_source.push(a.source(f));
        raw.mor_target.push(a.target(f));
    }
    for f in 0..mb {
        raw.mor_source.push(b.source(f) + na);
        raw.mor_target.push(b.target(f) + na);
    }
    for o in 0..na {
        raw.identity.push(Some(a.identity(o)));
    }
    for o in 0..nb {
        raw.identity.push(Some(b.identity(o) + ma));
    }
    for g in 0..ma {
        for f in 0..ma {
            if let Some(gf) = a.compose(g, f) {
                raw.composites.push((g, f, gf));
            }
        }
    }
    for g in 0..mb {
        for f in 0..mb {
            if let Some(gf) = b.compose(g, f) {
                raw.composites.push((g + ma, f + ma, gf + ma));
            }
        }
    }
    let union = Arc::new(Groupoid::validate(&raw).expect("disjoint union of valid groupoids"));
    let into_left = Functor::new(
        Arc::clone(a),
        Arc::clone(&union),
        (0..na).collect(),
        (0..ma).collect(),
    )
    .expect("left inclusion is a functor");
    let into_right = Functor::new(
        Arc::clone(b),
        Arc::clone(&union),
        (0..nb).map(|o| o + na).collect(),
        (0..mb).map(|f| f + ma).collect(),
    )
    .expect("right inclusion is a functor");
    Coproduct { union, into_left, into_right }
}

/// Why a functor fails to be an equivalence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EquivalenceFailure {
    /// No object of the source maps to something isomorphic to `object`.
    NotEssentiallySurjective { object: usize },
    /// `hom(a, b)` misses the target morphism `missing` under the functor.
    NotFull { a: usize, b: usize, missing: usize },
    /// Two distinct morphisms `a -> b` with the same image.
    NotFaithful { a: usize, b: usize, first: usize, second: usize },
}

/// Constructive witness that a functor is an equivalence.
#[derive(Debug, Clone)]
pub struct EquivalenceWitness {
    pub quasi_inverse: Functor,
    /// `1 ⇒ Q∘F` on the source groupoid.
    pub unit: NatTrans,
    /// `F∘Q ⇒ 1` on the target groupoid.
    pub counit: NatTrans,
}

#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub witness: Option<EquivalenceWitness>,
    pub failure: Option<EquivalenceFailure>,
}

impl EquivalenceReport {
    pub fn ok(&self) -> bool {
        self.failure.is_none()
    }
}

/// Decide whether `f` is an equivalence of groupoids; on success build a
/// quasi-inverse with unit and counit (all validated), on failure report
/// the first witness found.
pub fn is_equivalence(f: &Functor) -> EquivalenceReport {
    let src = f.source();
    let tgt = f.target();

    // Fully faithful: every hom map must be a bijection.
    for a in 0..src.object_count() {
        for b in 0..src.object_count() {
            let hom = src.hom(a, b);
            let mut image = vec![usize::MAX; tgt.morphism_count()];
            for &m in &hom {
                let fm = f.apply_morphism(m);
                if image[fm] != usize::MAX {
                    return EquivalenceReport {
                        witness: None,
                        failure: Some(EquivalenceFailure::NotFaithful {
                            a,
                            b,
                            first: image[fm],
                            second: m,
                        }),
                    };
                }
                image[fm] = m;
            }
            for t in tgt.hom(f.apply_object(a), f.apply_object(b)) {
                if image[t] == usize::MAX {
                    return EquivalenceReport {
                        witness: None,
                        failure: Some(EquivalenceFailure::NotFull { a, b, missing: t }),
                    };
                }
            }
        }
    }

    // Essential surjectivity, choosing the least witness for determinism:
    // for each target object the least source object with a connecting
    // morphism, and the least such morphism u: F(q(γ)) -> γ.
    let mut section_obj = Vec::with_capacity(tgt.object_count());
    let mut section_iso = Vec::with_capacity(tgt.object_count());
    for gamma in 0..tgt.object_count() {
        let mut found = None;
        'search: for eta in 0..src.object_count() {
            for u in tgt.hom(f.apply_object(eta), gamma) {
                found = Some((eta, u));
                break 'search;
            }
        }
        match found {
            Some((eta, u)) => {
                section_obj.push(eta);
                section_iso.push(u);
            }
            None => {
                return EquivalenceReport {
                    witness: None,
                    failure: Some(EquivalenceFailure::NotEssentiallySurjective { object: gamma }),
                }
            }
        }
    }

    // Quasi-inverse on morphisms: transport g along the chosen isos and
    // take the unique preimage under the (bijective) hom map.
    let preimage = |a: usize, b: usize, want: usize| -> usize {
        src.hom(a, b)
            .into_iter()
            .find(|&m| f.apply_morphism(m) == want)
            .expect("fully faithful: preimage exists")
    };
    let mut q_mor = Vec::with_capacity(tgt.morphism_count());
    for g in 0..tgt.morphism_count() {
        let (gamma, gamma2) = (tgt.source(g), tgt.target(g));
        let transported = tgt.compose_unchecked(
            tgt.inverse(section_iso[gamma2]),
            tgt.compose_unchecked(g, section_iso[gamma]),
        );
        q_mor.push(preimage(section_obj[gamma], section_obj[gamma2], transported));
    }
    let q = Functor::new(Arc::clone(tgt), Arc::clone(src), section_obj.clone(), q_mor)
        .expect("quasi-inverse is a functor");

    let fq = Functor::compose(f, &q).expect("composable");
    let counit = NatTrans::new(fq, Functor::identity(tgt), section_iso.clone())
        .expect("counit is natural");

    let qf = Functor::compose(&q, f).expect("composable");
    let unit_components: Vec<usize> = (0..src.object_count())
        .map(|a| {
            let want = tgt.inverse(section_iso[f.apply_object(a)]);
            preimage(a, q.apply_object(f.apply_object(a)), want)
        })
        .collect();
    let unit = NatTrans::new(Functor::identity(src), qf, unit_components)
        .expect("unit is natural");

    EquivalenceReport {
        witness: Some(EquivalenceWitness { quasi_inverse: q, unit, counit }),
        failure: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::groupoid::arc;

    fn s3_and_c2() -> (Arc<Groupoid>, Arc<Groupoid>, Vec<Vec<usize>>) {
        let (s3, perms) = catalog::symmetric_with_perms(3);
        (arc(s3), arc(catalog::cyclic(2)), perms)
    }

    #[test]
    fn sign_map_is_a_functor() {
        let (s3, c2, perms) = s3_and_c2();
        // Oracle: parity of each permutation, computed independently.
        let signs: Vec<usize> = perms.iter().map(|p| catalog::parity(p)).collect();
        let f = Functor::new(Arc::clone(&s3), Arc::clone(&c2), vec![0], signs).unwrap();
        assert_eq!(f.apply_morphism(0), 0);
    }

    #[test]
    fn mod_two_on_z3_is_not_a_functor() {
        let c3 = arc(catalog::cyclic(3));
        let c2 = arc(catalog::cyclic(2));
        let err = Functor::new(c3, c2, vec![0], vec![0, 1, 0]).unwrap_err();
        assert!(matches!(err, FunctorError::CompositionNotPreserved { .. }));
    }

    #[test]
    fn subgroup_inclusion_validates_but_is_not_an_equivalence() {
        let (s3, _, perms) = s3_and_c2();
        let c2 = arc(catalog::cyclic(2));
        let swap = perms.iter().position(|p| p == &vec![1, 0, 2]).unwrap();
        let incl = Functor::new(Arc::clone(&c2), Arc::clone(&s3), vec![0], vec![0, swap]).unwrap();
        let report = is_equivalence(&incl);
        assert!(matches!(
            report.failure,
            Some(EquivalenceFailure::NotFull { .. })
        ));
    }

    #[test]
    fn unique_functor_from_discrete_pair_to_point_is_not_an_equivalence() {
        let d2 = arc(Groupoid::discrete(2));
        let one = arc(Groupoid::discrete(1));
        let f = Functor::new(Arc::clone(&d2), Arc::clone(&one), vec![0, 0], vec![0, 0]).unwrap();
        let report = is_equivalence(&f);
        assert!(matches!(
            report.failure,
            Some(EquivalenceFailure::NotFull { a: 0, b: 1, .. })
        ));
    }

    #[test]
    fn contractible_to_point_is_an_equivalence_with_validated_witness() {
        let i = arc(catalog::contractible(2));
        let one = arc(Groupoid::discrete(1));
        let f = Functor::new(Arc::clone(&i), Arc::clone(&one), vec![0, 0], vec![0; 4]).unwrap();
        let report = is_equivalence(&f);
        assert!(report.ok());
        let w = report.witness.unwrap();
        assert_eq!(w.quasi_inverse.apply_object(0), 0);
    }

    #[test]
    fn empty_to_nonempty_fails_essential_surjectivity() {
        let e = arc(Groupoid::discrete(0));
        let c2 = arc(catalog::cyclic(2));
        let f = Functor::new(e, c2, vec![], vec![]).unwrap();
        assert!(matches!(
            is_equivalence(&f).failure,
            Some(EquivalenceFailure::NotEssentiallySurjective { object: 0 })
        ));
    }

    #[test]
    fn conjugation_is_natural_from_identity_to_inner_twist() {
        let (s3, _, _) = s3_and_c2();
        for g in 0..6 {
            let conj: Vec<usize> = (0..6)
                .map(|x| {
                    s3.compose_unchecked(
                        s3.compose_unchecked(g, x),
                        s3.inverse(g),
                    )
                })
                .collect();
            let twist = Functor::new(Arc::clone(&s3), Arc::clone(&s3), vec![0], conj).unwrap();
            let alpha = NatTrans::new(Functor::identity(&s3), twist, vec![g]);
            assert!(alpha.is_ok(), "conjugation by {g} should be natural");
        }
    }

    #[test]
    fn nat_trans_rejects_non_natural_component() {
        let (s3, _, _) = s3_and_c2();
        let id = Functor::identity(&s3);
        // A non-central element used as a component of id ⇒ id fails.
        let err = NatTrans::new(id.clone(), id, vec![1]).unwrap_err();
        assert!(matches!(err, NatTransError::NotNatural { .. }));
    }

    #[test]
    fn whiskering_and_vertical_composition_agree_with_direct_components() {
        let c2 = arc(catalog::cyclic(2));
        let id = Functor::identity(&c2);
        let alpha = NatTrans::new(id.clone(), id.clone(), vec![1]).unwrap();
        let beta = NatTrans::vertical(&alpha, &alpha).unwrap();
        assert_eq!(beta.components(), &[0]);
        let post = NatTrans::whisker_post(&id, &alpha).unwrap();
        assert_eq!(post.components(), &[1]);
        let pre = NatTrans::whisker_pre(&alpha, &id).unwrap();
        assert_eq!(pre.components(), &[1]);
    }

    #[test]
    fn disjoint_union_inclusions_are_functors_and_components_add() {
        let c2 = arc(catalog::cyclic(2));
        let c3 = arc(catalog::cyclic(3));
        let co = disjoint_union(&c2, &c3);
        assert_eq!(co.union.object_count(), 2);
        assert_eq!(co.union.morphism_count(), 5);
        assert_eq!(co.union.components().class_count(), 2);
        assert_eq!(co.into_right.apply_object(0), 1);
        assert_eq!(co.into_right.apply_morphism(1), 3);
    }

    #[test]
    fn equivalence_of_empty_functor_on_empty_groupoids() {
        let e = arc(Groupoid::discrete(0));
        let f = Functor::new(Arc::clone(&e), Arc::clone(&e), vec![], vec![]).unwrap();
        assert!(is_equivalence(&f).ok());
    }
}
