//! Correspondences between groupoids and their weak pullback calculus.
//!
//! A [`Span`] from `G` to `H` is a diagram `H ← L → G` whose left leg is a
//! finite weak cover: every homotopy fiber has only trivial automorphism
//! groups (finiteness is automatic here). Spans compose by the explicit
//! homotopy [`pullback`], whose objects carry a connecting arrow between
//! the two images; keeping that arrow around is what makes composition
//! associative up to a strict, bit-level re-association isomorphism.
//!
//! Morphisms of spans are functors over both feet up to chosen natural
//! transformations — deliberately not required to be invertible — and
//! [`TwoCell`]s compare those.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::functor::{is_equivalence, EquivalenceReport, Functor, NatTrans, NatTransError};
use crate::groupoid::{Groupoid, RawGroupoid};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpanError {
    #[error("the two legs have different apexes")]
    ApexMismatch,
    #[error("left leg is not a finite weak cover: fiber over object {object} has a nontrivial automorphism induced by apex morphism {apex_morphism}")]
    NotAFiniteWeakCover { object: usize, apex_morphism: usize },
    #[error("feet do not match")]
    BaseMismatch,
    #[error("morphism data does not connect the given spans")]
    BadMorphism,
    #[error("witness transformation invalid: {0}")]
    BadWitness(#[from] NatTransError),
    #[error("two-cell does not commute with the leg witnesses at object {object}")]
    BadTwoCell { object: usize },
}

/// The homotopy pullback of `first: K → G` and `second: L → G`: objects
/// are triples `(κ, g: second(λ) → first(κ), λ)` in lexicographic order,
/// and morphisms are pairs `(k, l)` making the evident square commute.
#[derive(Debug, Clone)]
pub struct Pullback {
    pub groupoid: Arc<Groupoid>,
    pub to_first: Functor,
    pub to_second: Functor,
    /// `(κ, g, λ)` per object.
    pub objects: Vec<(usize, usize, usize)>,
    /// `(k, l)` per morphism.
    pub morphisms: Vec<(usize, usize)>,
    object_index: HashMap<(usize, usize, usize), usize>,
    /// Keyed by `(k, l, g at the source object)`.
    morphism_index: HashMap<(usize, usize, usize), usize>,
}

impl Pullback {
    pub fn object_index(&self, kappa: usize, g: usize, lambda: usize) -> Option<usize> {
        self.object_index.get(&(kappa, g, lambda)).copied()
    }

    pub fn morphism_index(&self, k: usize, l: usize, source_g: usize) -> Option<usize> {
        self.morphism_index.get(&(k, l, source_g)).copied()
    }
}

pub fn pullback(first: &Functor, second: &Functor) -> Pullback {
    assert_eq!(
        first.target(),
        second.target(),
        "pullback needs a shared codomain"
    );
    let g = first.target();
    let (kg, lg) = (first.source(), second.source());

    let mut objects = Vec::new();
    for kappa in 0..kg.object_count() {
        for lambda in 0..lg.object_count() {
            for conn in g.hom(second.apply_object(lambda), first.apply_object(kappa)) {
                objects.push((kappa, conn, lambda));
            }
        }
    }
    objects.sort_unstable();
    let object_index: HashMap<(usize, usize, usize), usize> =
        objects.iter().enumerate().map(|(i, &o)| (o, i)).collect();

    let mut morphisms = Vec::new();
    let mut sources = Vec::new();
    let mut targets = Vec::new();
    let mut source_gs = Vec::new();
    for k in 0..kg.morphism_count() {
        for l in 0..lg.morphism_count() {
            let (ks, kt) = (kg.source(k), kg.target(k));
            let (ls, lt) = (lg.source(l), lg.target(l));
            for conn in g.hom(second.apply_object(ls), first.apply_object(ks)) {
                let image = g.compose_unchecked(
                    first.apply_morphism(k),
                    g.compose_unchecked(conn, g.inverse(second.apply_morphism(l))),
                );
                morphisms.push((k, l));
                sources.push(object_index[&(ks, conn, ls)]);
                targets.push(object_index[&(kt, image, lt)]);
                source_gs.push(conn);
            }
        }
    }
    let morphism_index: HashMap<(usize, usize, usize), usize> = morphisms
        .iter()
        .zip(&source_gs)
        .enumerate()
        .map(|(i, (&(k, l), &sg))| ((k, l, sg), i))
        .collect();

    let mut identity = vec![None; objects.len()];
    for (i, &(kappa, conn, lambda)) in objects.iter().enumerate() {
        identity[i] =
            Some(morphism_index[&(kg.identity(kappa), lg.identity(lambda), conn)]);
    }

    // Composites: group morphisms by source object and walk composable
    // pairs only.
    let mut out_of: Vec<Vec<usize>> = vec![Vec::new(); objects.len()];
    for (i, &s) in sources.iter().enumerate() {
        out_of[s].push(i);
    }
    let mut composites = Vec::new();
    for m1 in 0..morphisms.len() {
        for &m2 in &out_of[targets[m1]] {
            let (k1, l1) = morphisms[m1];
            let (k2, l2) = morphisms[m2];
            let idx = morphism_index[&(
                kg.compose_unchecked(k2, k1),
                lg.compose_unchecked(l2, l1),
                source_gs[m1],
            )];
            composites.push((m2, m1, idx));
        }
    }

    let raw = RawGroupoid {
        object_count: objects.len(),
        mor_source: sources,
        mor_target: targets,
        identity,
        composites,
    };
    let groupoid = Arc::new(Groupoid::validate(&raw).expect("pullback is a groupoid"));
    let to_first = Functor::new(
        Arc::clone(&groupoid),
        Arc::clone(kg),
        objects.iter().map(|o| o.0).collect(),
        morphisms.iter().map(|m| m.0).collect(),
    )
    .expect("first projection is a functor");
    let to_second = Functor::new(
        Arc::clone(&groupoid),
        Arc::clone(lg),
        objects.iter().map(|o| o.2).collect(),
        morphisms.iter().map(|m| m.1).collect(),
    )
    .expect("second projection is a functor");
    Pullback { groupoid, to_first, to_second, objects, morphisms, object_index, morphism_index }
}

/// The homotopy fiber of `m` over an object of its codomain.
pub fn homotopy_fiber(m: &Functor, gamma: usize) -> Pullback {
    pullback(m, &Functor::at_object(m.target(), gamma))
}

/// Equivalent to a discrete groupoid: no object has a nontrivial
/// automorphism.
pub fn is_homotopy_discrete(g: &Groupoid) -> bool {
    (0..g.object_count()).all(|o| g.hom(o, o).len() == 1)
}

/// First witness that `q` fails to be a finite weak cover, if any: an
/// object of the codomain whose homotopy fiber has a nontrivial
/// automorphism, together with the apex morphism inducing it.
pub fn weak_cover_failure(q: &Functor) -> Option<(usize, usize)> {
    for eta in 0..q.target().object_count() {
        let fiber = homotopy_fiber(q, eta);
        for o in 0..fiber.groupoid.object_count() {
            for m in fiber.groupoid.hom(o, o) {
                if m != fiber.groupoid.identity(o) {
                    return Some((eta, fiber.morphisms[m].0));
                }
            }
        }
    }
    None
}

pub fn is_finite_weak_cover(q: &Functor) -> bool {
    weak_cover_failure(q).is_none()
}

/// A correspondence `H ← L → G`, the left leg a finite weak cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Span {
    left: Functor,
    right: Functor,
}

impl Span {
    pub fn new(left: Functor, right: Functor) -> Result<Span, SpanError> {
        if left.source() != right.source() {
            return Err(SpanError::ApexMismatch);
        }
        if let Some((object, apex_morphism)) = weak_cover_failure(&left) {
            return Err(SpanError::NotAFiniteWeakCover { object, apex_morphism });
        }
        Ok(Span { left, right })
    }

    pub fn left(&self) -> &Functor {
        &self.left
    }

    pub fn right(&self) -> &Functor {
        &self.right
    }

    pub fn apex(&self) -> &Arc<Groupoid> {
        self.left.source()
    }

    pub fn left_base(&self) -> &Arc<Groupoid> {
        self.left.target()
    }

    pub fn right_base(&self) -> &Arc<Groupoid> {
        self.right.target()
    }
}

/// Both legs the identity.
pub fn unit_span(g: &Arc<Groupoid>) -> Span {
    Span { left: Functor::identity(g), right: Functor::identity(g) }
}

/// `(H ← H → G)` along `p: H → G`: identity left leg, `p` on the right.
pub fn forward_span(p: &Functor) -> Span {
    Span { left: Functor::identity(p.source()), right: p.clone() }
}

/// `(G ← H → H)` along `q: H → G`: `q` on the left (which must be a finite
/// weak cover), identity on the right.
pub fn transfer_span(q: &Functor) -> Result<Span, SpanError> {
    Span::new(q.clone(), Functor::identity(q.source()))
}

/// A morphism of spans over fixed feet: a functor of apexes together with
/// natural transformations relating the legs. The functor is not required
/// to be invertible or even an equivalence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpanMorphism {
    source: Span,
    target: Span,
    functor: Functor,
    /// `source.left ⇒ target.left ∘ functor`.
    left_witness: NatTrans,
    /// `source.right ⇒ target.right ∘ functor`.
    right_witness: NatTrans,
}

impl SpanMorphism {
    pub fn new(
        source: Span,
        target: Span,
        functor: Functor,
        left_witness: NatTrans,
        right_witness: NatTrans,
    ) -> Result<SpanMorphism, SpanError> {
        if source.left_base() != target.left_base() || source.right_base() != target.right_base()
        {
            return Err(SpanError::BaseMismatch);
        }
        if functor.source() != source.apex() || functor.target() != target.apex() {
            return Err(SpanError::BadMorphism);
        }
        let left_expected = Functor::compose(&target.left, &functor).expect("legs compose");
        let right_expected = Functor::compose(&target.right, &functor).expect("legs compose");
        if left_witness.from_functor() != &source.left
            || left_witness.to_functor() != &left_expected
            || right_witness.from_functor() != &source.right
            || right_witness.to_functor() != &right_expected
        {
            return Err(SpanError::BadMorphism);
        }
        Ok(SpanMorphism { source, target, functor, left_witness, right_witness })
    }

    /// Identity witnesses; usable whenever the legs commute on the nose.
    pub fn strict(source: Span, target: Span, functor: Functor) -> Result<SpanMorphism, SpanError> {
        if source.left_base() != target.left_base() || source.right_base() != target.right_base()
        {
            return Err(SpanError::BaseMismatch);
        }
        let left_to = Functor::compose(&target.left, &functor).expect("legs compose");
        let right_to = Functor::compose(&target.right, &functor).expect("legs compose");
        let lw = NatTrans::new(
            source.left.clone(),
            left_to,
            (0..source.apex().object_count())
                .map(|o| source.left_base().identity(source.left.apply_object(o)))
                .collect(),
        )?;
        let rw = NatTrans::new(
            source.right.clone(),
            right_to,
            (0..source.apex().object_count())
                .map(|o| source.right_base().identity(source.right.apply_object(o)))
                .collect(),
        )?;
        SpanMorphism::new(source, target, functor, lw, rw)
    }

    pub fn identity(span: &Span) -> SpanMorphism {
        SpanMorphism::strict(span.clone(), span.clone(), Functor::identity(span.apex()))
            .expect("identity is strict")
    }

    /// `second ∘ first` (apply `first` first), whiskering the witnesses.
    pub fn compose(second: &SpanMorphism, first: &SpanMorphism) -> Result<SpanMorphism, SpanError> {
        if first.target != second.source {
            return Err(SpanError::BaseMismatch);
        }
        let functor = Functor::compose(&second.functor, &first.functor).expect("apexes compose");
        let lw = NatTrans::vertical(
            &NatTrans::whisker_pre(&second.left_witness, &first.functor)?,
            &first.left_witness,
        )?;
        let rw = NatTrans::vertical(
            &NatTrans::whisker_pre(&second.right_witness, &first.functor)?,
            &first.right_witness,
        )?;
        SpanMorphism::new(first.source.clone(), second.target.clone(), functor, lw, rw)
    }

    pub fn source(&self) -> &Span {
        &self.source
    }

    pub fn target(&self) -> &Span {
        &self.target
    }

    pub fn functor(&self) -> &Functor {
        &self.functor
    }

    pub fn left_witness(&self) -> &NatTrans {
        &self.left_witness
    }

    pub fn right_witness(&self) -> &NatTrans {
        &self.right_witness
    }
}

/// A two-cell between parallel span morphisms: a natural transformation of
/// apex functors compatible with both leg witnesses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoCell {
    source: SpanMorphism,
    target: SpanMorphism,
    nat: NatTrans,
}

impl TwoCell {
    pub fn new(
        source: SpanMorphism,
        target: SpanMorphism,
        nat: NatTrans,
    ) -> Result<TwoCell, SpanError> {
        if source.source != target.source || source.target != target.target {
            return Err(SpanError::BaseMismatch);
        }
        if nat.from_functor() != &source.functor || nat.to_functor() != &target.functor {
            return Err(SpanError::BadMorphism);
        }
        // Whisker the cell along each leg and require it to carry one
        // witness onto the other.
        let span = &source.target;
        let through_left = NatTrans::vertical(
            &NatTrans::whisker_post(&span.left, &nat)?,
            &source.left_witness,
        )?;
        let through_right = NatTrans::vertical(
            &NatTrans::whisker_post(&span.right, &nat)?,
            &source.right_witness,
        )?;
        for o in 0..source.source.apex().object_count() {
            if through_left.component(o) != target.left_witness.component(o) {
                return Err(SpanError::BadTwoCell { object: o });
            }
            if through_right.component(o) != target.right_witness.component(o) {
                return Err(SpanError::BadTwoCell { object: o });
            }
        }
        Ok(TwoCell { source, target, nat })
    }

    pub fn identity(m: &SpanMorphism) -> TwoCell {
        TwoCell::new(m.clone(), m.clone(), NatTrans::identity(&m.functor))
            .expect("identity two-cell is compatible")
    }

    pub fn source(&self) -> &SpanMorphism {
        &self.source
    }

    pub fn target(&self) -> &SpanMorphism {
        &self.target
    }

    pub fn nat(&self) -> &NatTrans {
        &self.nat
    }

    pub fn vertical(second: &TwoCell, first: &TwoCell) -> Result<TwoCell, SpanError> {
        TwoCell::new(
            first.source.clone(),
            second.target.clone(),
            NatTrans::vertical(&second.nat, &first.nat)?,
        )
    }

    /// The two-cell between composites of span morphisms, formed along
    /// either whiskering diagonal — both give the same transformation, and
    /// the constructor re-checks compatibility.
    pub fn beside(second: &TwoCell, first: &TwoCell) -> Result<TwoCell, SpanError> {
        let src = SpanMorphism::compose(&second.source, &first.source)?;
        let tgt = SpanMorphism::compose(&second.target, &first.target)?;
        let one = NatTrans::vertical(
            &NatTrans::whisker_pre(&second.nat, &first.target.functor)?,
            &NatTrans::whisker_post(&second.source.functor, &first.nat)?,
        )?;
        let other = NatTrans::vertical(
            &NatTrans::whisker_post(&second.target.functor, &first.nat)?,
            &NatTrans::whisker_pre(&second.nat, &first.source.functor)?,
        )?;
        debug_assert_eq!(one.components(), other.components(), "interchange");
        TwoCell::new(src, tgt, one)
    }
}

/// A composed span with the pullback that produced its apex.
#[derive(Debug, Clone)]
pub struct ComposedSpan {
    pub span: Span,
    pub pullback: Pullback,
}

/// Compose correspondences over the shared middle foot: the apex is the
/// homotopy pullback of `a`'s left leg against `b`'s right leg.
pub fn compose_spans(a: &Span, b: &Span) -> Result<ComposedSpan, SpanError> {
    if a.left_base() != b.right_base() {
        return Err(SpanError::BaseMismatch);
    }
    let pb = pullback(&a.left, &b.right);
    let left = Functor::compose(&b.left, &pb.to_second).expect("legs compose");
    let right = Functor::compose(&a.right, &pb.to_first).expect("legs compose");
    let span = Span::new(left, right)?;
    Ok(ComposedSpan { span, pullback: pb })
}

/// The section comparing a span with its composite against the unit on the
/// right: `λ ↦ (λ, 1, n(λ))` into `pullback(a.left, 1)`, a strict span
/// morphism whose functor is an equivalence.
pub fn unit_section_right(a: &Span) -> Result<(ComposedSpan, SpanMorphism, EquivalenceReport), SpanError> {
    let composed = compose_spans(a, &unit_span(a.left_base()))?;
    let pb = &composed.pullback;
    let apex = a.apex();
    let on_objects: Vec<usize> = (0..apex.object_count())
        .map(|lam| {
            let n = a.left.apply_object(lam);
            pb.object_index(lam, a.left_base().identity(n), n).expect("section object")
        })
        .collect();
    let on_morphisms: Vec<usize> = (0..apex.morphism_count())
        .map(|m| {
            let n = a.left.apply_object(apex.source(m));
            pb.morphism_index(m, a.left.apply_morphism(m), a.left_base().identity(n))
                .expect("section morphism")
        })
        .collect();
    let functor = Functor::new(
        Arc::clone(apex),
        Arc::clone(&pb.groupoid),
        on_objects,
        on_morphisms,
    )
    .expect("unit section is a functor");
    let report = is_equivalence(&functor);
    let morphism = SpanMorphism::strict(a.clone(), composed.span.clone(), functor)?;
    Ok((composed, morphism, report))
}

/// Mirror of [`unit_section_right`] for the unit on the left:
/// `λ ↦ (n(λ), 1, λ)` into `pullback(1, a.right)`.
pub fn unit_section_left(a: &Span) -> Result<(ComposedSpan, SpanMorphism, EquivalenceReport), SpanError> {
    let composed = compose_spans(&unit_span(a.right_base()), a)?;
    let pb = &composed.pullback;
    let apex = a.apex();
    let on_objects: Vec<usize> = (0..apex.object_count())
        .map(|lam| {
            let n = a.right.apply_object(lam);
            pb.object_index(n, a.right_base().identity(n), lam).expect("section object")
        })
        .collect();
    let on_morphisms: Vec<usize> = (0..apex.morphism_count())
        .map(|m| {
            let n = a.right.apply_object(apex.source(m));
            pb.morphism_index(a.right.apply_morphism(m), m, a.right_base().identity(n))
                .expect("section morphism")
        })
        .collect();
    let functor = Functor::new(
        Arc::clone(apex),
        Arc::clone(&pb.groupoid),
        on_objects,
        on_morphisms,
    )
    .expect("unit section is a functor");
    let report = is_equivalence(&functor);
    let morphism = SpanMorphism::strict(a.clone(), composed.span.clone(), functor)?;
    Ok((composed, morphism, report))
}

/// Both exchange composites for a transfer against a forward span, with
/// the strict comparison between them.
#[derive(Debug)]
pub struct ExchangeComparison {
    pub one_way: ComposedSpan,
    pub other_way: ComposedSpan,
    pub comparison: SpanMorphism,
    pub equivalence: EquivalenceReport,
}

/// For `p: H → G` and `q: F → G` (with `q` a finite weak cover), compose
/// the transfer along `q` after the forward span along `p`. The result is
/// the correspondence `H ← F ×_G H → F` on the nose, and re-expressing it
/// as a forward-after-transfer composite changes the apex only by the
/// strict section `x ↦ (x, 1, x)`.
pub fn exchange_comparison(p: &Functor, q: &Functor) -> Result<ExchangeComparison, SpanError> {
    if p.target() != q.target() {
        return Err(SpanError::BaseMismatch);
    }
    let one_way = compose_spans(&transfer_span(q)?, &forward_span(p))?;
    let x = &one_way.span;
    let other_way = compose_spans(&forward_span(x.right()), &transfer_span(x.left())?)?;
    let pb = &other_way.pullback;
    let apex = x.apex();
    let on_objects: Vec<usize> = (0..apex.object_count())
        .map(|o| pb.object_index(o, apex.identity(o), o).expect("diagonal object"))
        .collect();
    let on_morphisms: Vec<usize> = (0..apex.morphism_count())
        .map(|m| {
            pb.morphism_index(m, m, apex.identity(apex.source(m))).expect("diagonal morphism")
        })
        .collect();
    let functor = Functor::new(
        Arc::clone(apex),
        Arc::clone(&pb.groupoid),
        on_objects,
        on_morphisms,
    )
    .expect("diagonal section is a functor");
    let equivalence = is_equivalence(&functor);
    let comparison = SpanMorphism::strict(x.clone(), other_way.span.clone(), functor)?;
    Ok(ExchangeComparison { one_way, other_way, comparison, equivalence })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::groupoid::arc;

    fn c2() -> Arc<Groupoid> {
        arc(catalog::cyclic(2))
    }

    fn s3() -> Arc<Groupoid> {
        arc(catalog::symmetric(3))
    }

    fn inclusion_c2_s3() -> Functor {
        let s3 = s3();
        let invol = (1..6).find(|&g| s3.compose_unchecked(g, g) == 0).unwrap();
        Functor::new(c2(), s3, vec![0], vec![0, invol]).unwrap()
    }

    #[test]
    fn pullback_of_two_points_over_a_group_is_the_hom_set() {
        let m = Functor::at_object(&c2(), 0);
        let pb = pullback(&m, &m);
        assert_eq!(pb.groupoid.object_count(), 2);
        assert_eq!(pb.groupoid.morphism_count(), 2);
        assert!(is_homotopy_discrete(&pb.groupoid));
        assert_eq!(pb.groupoid.components().class_count(), 2);
    }

    #[test]
    fn homotopy_fiber_of_the_identity_is_contractible() {
        let fiber = homotopy_fiber(&Functor::identity(&c2()), 0);
        assert_eq!(fiber.groupoid.object_count(), 2);
        assert_eq!(fiber.groupoid.components().class_count(), 1);
        assert!(is_homotopy_discrete(&fiber.groupoid));
    }

    #[test]
    fn fiber_of_a_subgroup_inclusion_counts_cosets() {
        let incl = inclusion_c2_s3();
        let fiber = homotopy_fiber(&incl, 0);
        assert_eq!(fiber.groupoid.object_count(), 6);
        assert_eq!(fiber.groupoid.components().class_count(), 3);
        assert!(is_finite_weak_cover(&incl));
    }

    #[test]
    fn collapse_to_a_point_is_not_a_weak_cover() {
        let collapse = Functor::new(c2(), arc(Groupoid::discrete(1)), vec![0], vec![0, 0]).unwrap();
        let (object, apex_morphism) = weak_cover_failure(&collapse).unwrap();
        assert_eq!(object, 0);
        assert_eq!(apex_morphism, 1); // the generator survives into the fiber
        assert!(transfer_span(&collapse).is_err());
    }

    #[test]
    fn pullback_projections_commute_up_to_the_connecting_arrow() {
        let incl = inclusion_c2_s3();
        let pb = pullback(&incl, &incl);
        // Each object stores g: incl(λ) → incl(κ); the two images differ by
        // exactly that arrow, so components count double cosets.
        assert_eq!(pb.groupoid.object_count(), 6);
        assert_eq!(pb.groupoid.components().class_count(), 2);
    }

    #[test]
    fn composing_with_the_unit_span_is_an_equivalence_both_ways() {
        let span = forward_span(&inclusion_c2_s3());
        let (_, morphism, report) = unit_section_right(&span).unwrap();
        assert!(report.ok(), "right unit section: {:?}", report.failure);
        assert_eq!(morphism.source(), &span);
        let (_, morphism, report) = unit_section_left(&span).unwrap();
        assert!(report.ok(), "left unit section: {:?}", report.failure);
        assert_eq!(morphism.source(), &span);
    }

    #[test]
    fn unit_sections_hold_on_a_transfer_span() {
        let span = transfer_span(&inclusion_c2_s3()).unwrap();
        let (_, _, report) = unit_section_right(&span).unwrap();
        assert!(report.ok());
        let (_, _, report) = unit_section_left(&span).unwrap();
        assert!(report.ok());
    }

    #[test]
    fn exchange_squares_count_double_cosets() {
        let incl = inclusion_c2_s3();
        let ex = exchange_comparison(&incl, &incl).unwrap();
        // Components of the middle apex count the double classes of the
        // subgroup against itself: two of them here.
        assert_eq!(ex.one_way.span.apex().components().class_count(), 2);
        assert!(ex.equivalence.ok(), "exchange comparison: {:?}", ex.equivalence.failure);
    }

    #[test]
    fn span_morphism_composition_and_two_cells_round_trip() {
        let span = forward_span(&inclusion_c2_s3());
        let id = SpanMorphism::identity(&span);
        let composed = SpanMorphism::compose(&id, &id).unwrap();
        assert_eq!(composed.functor(), id.functor());
        let cell = TwoCell::identity(&id);
        let beside = TwoCell::beside(&cell, &cell).unwrap();
        assert_eq!(beside.nat().components(), cell.nat().components());
        let stacked = TwoCell::vertical(&cell, &cell).unwrap();
        assert_eq!(stacked.nat().components(), cell.nat().components());
    }

    #[test]
    fn two_cell_rejects_incompatible_transformations() {
        // Twist the identity morphism of the unit span on C2 by the
        // nonidentity central element: naturality holds, but the leg
        // witnesses no longer match.
        let span = unit_span(&c2());
        let id = SpanMorphism::identity(&span);
        let twist = NatTrans::new(
            Functor::identity(&c2()),
            Functor::identity(&c2()),
            vec![1],
        )
        .unwrap();
        assert!(matches!(
            TwoCell::new(id.clone(), id, twist),
            Err(SpanError::BadTwoCell { object: 0 })
        ));
    }

    #[test]
    fn strict_morphism_requires_commuting_legs() {
        // Mapping the forward span of the inclusion onto the unit span of
        // S3 by the inclusion itself: the right legs agree, the left legs
        // do not commute with any strict witness because the feet differ.
        let span = forward_span(&inclusion_c2_s3());
        let unit = unit_span(&s3());
        assert!(matches!(
            SpanMorphism::strict(span, unit, inclusion_c2_s3()),
            Err(SpanError::BaseMismatch)
        ));
    }
}
