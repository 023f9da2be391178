//! Seeded, replayable law suites.
//!
//! Each suite draws its own small random instances and checks one family
//! of structural facts as exact equalities of index-level data: coherence
//! of module composition (pentagon and triangle), unit sections and
//! re-association for correspondences, and the round trips between the
//! two models. A case is addressed by `(suite, seed, index)` alone, so
//! runs can be sharded and replayed; outcomes are reported in index
//! order with deterministic detail strings.

use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::biset::{
    associator, compose_bisets_with_data, identity_biset, induced_map_on_composites, left_unitor,
    right_unitor, BiSet, BisetIso,
};
use crate::comparison::{
    composition_comparison, double_translation, module_round_trip, span_round_trip,
};
use crate::functor::Functor;
use crate::groupoid::{Groupoid, RawGroupoid};
use crate::gset::{colimit, gset_from_cover, is_covering_map, GSet, Variance};
use crate::sample::{
    random_admissible_biset, random_functor, random_gset, random_nonempty_groupoid, random_span,
    rng,
};
use crate::span::{
    compose_spans, homotopy_fiber, is_finite_weak_cover, unit_section_left, unit_section_right,
    Span,
};
use crate::util::invert_bijection;

/// The five law families the `laws` command can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    Pentagon,
    Triangle,
    Unit,
    Pullback,
    RoundTrip,
}

impl Suite {
    pub const ALL: [Suite; 5] =
        [Suite::Pentagon, Suite::Triangle, Suite::Unit, Suite::Pullback, Suite::RoundTrip];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Pentagon => "pentagon",
            Suite::Triangle => "triangle",
            Suite::Unit => "unit",
            Suite::Pullback => "pullback",
            Suite::RoundTrip => "round-trip",
        }
    }

    pub fn from_name(name: &str) -> Option<Suite> {
        Suite::ALL.iter().copied().find(|s| s.name() == name)
    }

    fn tag(self) -> u64 {
        Suite::ALL.iter().position(|&s| s == self).expect("listed suite") as u64
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Verdict for one case, with a short deterministic description of what
/// was checked or what broke.
#[derive(Debug, Clone)]
pub struct CaseOutcome {
    pub suite: Suite,
    pub index: u64,
    pub passed: bool,
    pub detail: String,
}

type CaseResult = Result<String, String>;

/// One generator per `(suite, seed, index)`, decorrelated by the usual
/// 64-bit finalizer so neighbouring indices do not share prefixes.
fn case_rng(seed: u64, suite: Suite, index: u64) -> ChaCha8Rng {
    let mut z = seed
        .wrapping_add(suite.tag().wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(index.wrapping_mul(0xBF58_476D_1CE4_E5B9));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    rng(z ^ (z >> 31))
}

pub fn run_case(suite: Suite, seed: u64, index: u64) -> CaseOutcome {
    let mut rng = case_rng(seed, suite, index);
    let result = match suite {
        Suite::Pentagon => pentagon_case(&mut rng),
        Suite::Triangle => triangle_case(&mut rng),
        Suite::Unit => unit_case(&mut rng),
        Suite::Pullback => pullback_case(&mut rng),
        Suite::RoundTrip => round_trip_case(&mut rng),
    };
    match result {
        Ok(detail) => CaseOutcome { suite, index, passed: true, detail },
        Err(detail) => CaseOutcome { suite, index, passed: false, detail },
    }
}

pub fn run_suite(suite: Suite, seed: u64, cases: u64) -> Vec<CaseOutcome> {
    (0..cases).map(|index| run_case(suite, seed, index)).collect()
}

pub fn run_all(seed: u64, cases: u64) -> Vec<CaseOutcome> {
    Suite::ALL.iter().flat_map(|&suite| run_suite(suite, seed, cases)).collect()
}

// ---------------------------------------------------------------------
// Pentagon and triangle
// ---------------------------------------------------------------------

fn pentagon_case(rng: &mut ChaCha8Rng) -> CaseResult {
    let bases: Vec<Arc<Groupoid>> = (0..5).map(|_| random_nonempty_groupoid(rng)).collect();
    let w = random_admissible_biset(rng, &bases[1], &bases[0], 3);
    let x = random_admissible_biset(rng, &bases[2], &bases[1], 3);
    let y = random_admissible_biset(rng, &bases[3], &bases[2], 3);
    let z = random_admissible_biset(rng, &bases[4], &bases[3], 3);
    pentagon_holds(&w, &x, &y, &z)
}

/// Both re-association routes from `w∘(x∘(y∘z))` to `((w∘x)∘y)∘z` must be
/// the same class-level bijection.
pub fn pentagon_holds(w: &BiSet, x: &BiSet, y: &BiSet, z: &BiSet) -> CaseResult {
    let yz = compose_bisets_with_data(y, z).map_err(|e| format!("compose y,z: {e}"))?;
    let xy = compose_bisets_with_data(x, y).map_err(|e| format!("compose x,y: {e}"))?;
    let wx = compose_bisets_with_data(w, x).map_err(|e| format!("compose w,x: {e}"))?;

    // Outer route: re-associate around the whole of y∘z, then around z.
    let first = associator(w, x, &yz.biset).map_err(|e| format!("associator w,x,yz: {e}"))?;
    let second = associator(&wx.biset, y, z).map_err(|e| format!("associator wx,y,z: {e}"))?;
    let outer = second
        .map()
        .compose(first.map())
        .map_err(|e| format!("outer route does not compose: {e}"))?;

    // Stepped route: move the inner association first, shift it across w,
    // then finish next to z.
    let inner = associator(x, y, z).map_err(|e| format!("associator x,y,z: {e}"))?;
    let x_yz = compose_bisets_with_data(x, &yz.biset).map_err(|e| format!("compose x,yz: {e}"))?;
    let xy_z = compose_bisets_with_data(&xy.biset, z).map_err(|e| format!("compose xy,z: {e}"))?;
    let src = compose_bisets_with_data(w, &x_yz.biset)
        .map_err(|e| format!("compose w,x(yz): {e}"))?;
    let mid = compose_bisets_with_data(w, &xy_z.biset)
        .map_err(|e| format!("compose w,(xy)z: {e}"))?;
    let id_w = BisetIso::identity(w);
    let step1 = induced_map_on_composites(id_w.map(), inner.map(), &src, &mid)
        .map_err(|e| format!("whisker by w: {e}"))?;
    let step2 = associator(w, &xy.biset, z).map_err(|e| format!("associator w,xy,z: {e}"))?;
    let w_xy = compose_bisets_with_data(w, &xy.biset)
        .map_err(|e| format!("compose w,xy: {e}"))?;
    let wx_y = compose_bisets_with_data(&wx.biset, y)
        .map_err(|e| format!("compose wx,y: {e}"))?;
    let last_src = compose_bisets_with_data(&w_xy.biset, z)
        .map_err(|e| format!("compose w(xy),z: {e}"))?;
    let last_tgt = compose_bisets_with_data(&wx_y.biset, z)
        .map_err(|e| format!("compose (wx)y,z: {e}"))?;
    let shift = associator(w, x, y).map_err(|e| format!("associator w,x,y: {e}"))?;
    let id_z = BisetIso::identity(z);
    let step3 = induced_map_on_composites(shift.map(), id_z.map(), &last_src, &last_tgt)
        .map_err(|e| format!("whisker by z: {e}"))?;
    let stepped = step3
        .compose(&step2.map().compose(&step1).map_err(|e| format!("stepped route: {e}"))?)
        .map_err(|e| format!("stepped route: {e}"))?;

    if outer != stepped {
        return Err("the two re-association routes disagree".into());
    }
    if !outer.is_bijective() {
        return Err("re-association route is not a bijection".into());
    }
    Ok(format!(
        "sizes {}/{}/{}/{}, {} classes in the quadruple composite",
        w.element_count(),
        x.element_count(),
        y.element_count(),
        z.element_count(),
        outer.target().element_count()
    ))
}

fn triangle_case(rng: &mut ChaCha8Rng) -> CaseResult {
    let b0 = random_nonempty_groupoid(rng);
    let b1 = random_nonempty_groupoid(rng);
    let b2 = random_nonempty_groupoid(rng);
    let x = random_admissible_biset(rng, &b1, &b0, 3);
    let y = random_admissible_biset(rng, &b2, &b1, 3);
    triangle_holds(&x, &y)
}

/// Collapsing the unit glued between `x` and `y` must give the same map
/// whether it is absorbed into `x` or into `y`.
pub fn triangle_holds(x: &BiSet, y: &BiSet) -> CaseResult {
    if x.left() != y.right() {
        return Err("middle bases differ".into());
    }
    let u = identity_biset(x.left());
    let uy = compose_bisets_with_data(&u, y).map_err(|e| format!("compose u,y: {e}"))?;
    let xu = compose_bisets_with_data(x, &u).map_err(|e| format!("compose x,u: {e}"))?;
    let tgt = compose_bisets_with_data(x, y).map_err(|e| format!("compose x,y: {e}"))?;

    let src = compose_bisets_with_data(x, &uy.biset)
        .map_err(|e| format!("compose x,uy: {e}"))?;
    let rho = right_unitor(y).map_err(|e| format!("right unitor: {e}"))?;
    let id_x = BisetIso::identity(x);
    let absorb_into_y = induced_map_on_composites(id_x.map(), rho.map(), &src, &tgt)
        .map_err(|e| format!("whisker by x: {e}"))?;

    let mid = compose_bisets_with_data(&xu.biset, y)
        .map_err(|e| format!("compose xu,y: {e}"))?;
    let lam = left_unitor(x).map_err(|e| format!("left unitor: {e}"))?;
    let id_y = BisetIso::identity(y);
    let collapse = induced_map_on_composites(lam.map(), id_y.map(), &mid, &tgt)
        .map_err(|e| format!("whisker by y: {e}"))?;
    let alpha = associator(x, &u, y).map_err(|e| format!("associator x,u,y: {e}"))?;
    let absorb_into_x = collapse
        .compose(alpha.map())
        .map_err(|e| format!("re-associated route: {e}"))?;

    if absorb_into_y != absorb_into_x {
        return Err("the two unit collapses disagree".into());
    }
    Ok(format!(
        "sizes {}/{}, {} classes in the composite",
        x.element_count(),
        y.element_count(),
        tgt.biset.element_count()
    ))
}

// ---------------------------------------------------------------------
// Units
// ---------------------------------------------------------------------

fn unit_case(rng: &mut ChaCha8Rng) -> CaseResult {
    let b0 = random_nonempty_groupoid(rng);
    let b1 = random_nonempty_groupoid(rng);
    let unit_agreement = unitors_agree_on_unit(&b1)?;
    let s = small_span(rng, &b1, &b0, 40);
    let sections = unit_sections_hold(&s)?;
    Ok(format!("{unit_agreement}; {sections}"))
}

/// On the identity module both unitors collapse the same composite, so
/// they must be equal on the nose.
pub fn unitors_agree_on_unit(base: &Arc<Groupoid>) -> CaseResult {
    let unit = identity_biset(base);
    let lam = left_unitor(&unit).map_err(|e| format!("left unitor on the unit: {e}"))?;
    let rho = right_unitor(&unit).map_err(|e| format!("right unitor on the unit: {e}"))?;
    if lam != rho {
        return Err("unitors disagree on the identity module".into());
    }
    Ok(format!("unitors agree on {} unit classes", lam.source().element_count()))
}

/// Both unit sections must be equivalences onto the composite with the
/// identity correspondence and be split exactly by the projection back to
/// the apex.
pub fn unit_sections_hold(s: &Span) -> CaseResult {
    let (composed, morphism, report) =
        unit_section_right(s).map_err(|e| format!("right unit section: {e}"))?;
    if !report.ok() {
        return Err("right unit section is not an equivalence".into());
    }
    let retract = Functor::compose(&composed.pullback.to_first, morphism.functor())
        .map_err(|e| format!("right retraction: {e}"))?;
    if retract != Functor::identity(s.apex()) {
        return Err("projection does not split the right unit section".into());
    }
    let right_objects = composed.pullback.objects.len();

    let (composed, morphism, report) =
        unit_section_left(s).map_err(|e| format!("left unit section: {e}"))?;
    if !report.ok() {
        return Err("left unit section is not an equivalence".into());
    }
    let retract = Functor::compose(&composed.pullback.to_second, morphism.functor())
        .map_err(|e| format!("left retraction: {e}"))?;
    if retract != Functor::identity(s.apex()) {
        return Err("projection does not split the left unit section".into());
    }
    Ok(format!(
        "unit composites have {right_objects} and {} apex objects",
        composed.pullback.objects.len()
    ))
}

// ---------------------------------------------------------------------
// Pullback re-association and cross-model composition
// ---------------------------------------------------------------------

/// A span whose apex has at most `max_apex_morphisms` morphisms. Each
/// pullback multiplies apex sizes (times the hom sets of the shared
/// foot), and composition tables are dense in the morphism count, so the
/// generators feeding pullbacks must keep apexes on a hard budget. Falls
/// back to a forward span, whose apex is the left base itself.
fn small_span(
    rng: &mut ChaCha8Rng,
    left_base: &Arc<Groupoid>,
    right_base: &Arc<Groupoid>,
    max_apex_morphisms: usize,
) -> Span {
    let forward = |rng: &mut ChaCha8Rng| {
        let p = random_functor(rng, left_base, right_base).expect("bases are nonempty");
        crate::span::forward_span(&p)
    };
    let of_biset = |rng: &mut ChaCha8Rng, budget: usize| {
        let x = random_admissible_biset(rng, left_base, right_base, budget);
        crate::comparison::span_of_biset(&x).expect("admissible modules spread out").0
    };
    let candidate = match rng.gen_range(0..3u8) {
        0 => forward(rng),
        1 => of_biset(rng, 2),
        _ => of_biset(rng, 3),
    };
    if candidate.apex().morphism_count() <= max_apex_morphisms {
        candidate
    } else {
        forward(rng)
    }
}

/// Feet for iterated pullbacks: at most four morphisms and hom sets of at
/// most two, so a triple composite stays within a few thousand morphisms.
fn tiny_base(rng: &mut ChaCha8Rng) -> Arc<Groupoid> {
    match rng.gen_range(0..3u8) {
        0 => crate::groupoid::arc(crate::catalog::contractible(1)),
        1 => crate::groupoid::arc(crate::catalog::contractible(2)),
        _ => crate::groupoid::arc(crate::catalog::cyclic(2)),
    }
}

fn pullback_case(rng: &mut ChaCha8Rng) -> CaseResult {
    let bases: Vec<Arc<Groupoid>> = (0..4).map(|_| tiny_base(rng)).collect();
    let a = small_span(rng, &bases[1], &bases[0], 8);
    let b = small_span(rng, &bases[2], &bases[1], 8);
    let c = small_span(rng, &bases[3], &bases[2], 8);
    let reassociation = reassociation_holds(&a, &b, &c)?;
    let x = random_admissible_biset(rng, &bases[1], &bases[0], 3);
    let y = random_admissible_biset(rng, &bases[2], &bases[1], 2);
    let agreement = composition_agrees(&x, &y)?;
    Ok(format!("{reassociation}; {agreement}"))
}

/// The triple-composite apexes built in either order are isomorphic over
/// both feet via `((κ,g,λ),h,μ) ↦ (κ,g,(λ,h,μ))`, checked entry by entry.
pub fn reassociation_holds(a: &Span, b: &Span, c: &Span) -> CaseResult {
    let ab = compose_spans(a, b).map_err(|e| format!("compose a,b: {e}"))?;
    let ab_c = compose_spans(&ab.span, c).map_err(|e| format!("compose ab,c: {e}"))?;
    let bc = compose_spans(b, c).map_err(|e| format!("compose b,c: {e}"))?;
    let a_bc = compose_spans(a, &bc.span).map_err(|e| format!("compose a,bc: {e}"))?;

    if !is_finite_weak_cover(ab_c.span.left()) || !is_finite_weak_cover(a_bc.span.left()) {
        return Err("a composite left leg stopped being a finite weak cover".into());
    }

    let nested_left = &ab_c.pullback;
    let on_objects: Vec<usize> = nested_left
        .objects
        .iter()
        .map(|&(outer, h, mu)| {
            let (kappa, g, lambda) = ab.pullback.objects[outer];
            let inner = bc
                .pullback
                .object_index(lambda, h, mu)
                .ok_or_else(|| "missing re-associated object".to_string())?;
            a_bc.pullback
                .object_index(kappa, g, inner)
                .ok_or_else(|| "missing image object".to_string())
        })
        .collect::<Result<_, String>>()?;
    let on_morphisms: Vec<usize> = (0..nested_left.morphisms.len())
        .map(|m| {
            let (k_ab, l_c) = nested_left.morphisms[m];
            let (k_a, l_b) = ab.pullback.morphisms[k_ab];
            let (outer, h, _mu) = nested_left.objects[nested_left.groupoid.source(m)];
            let (_kappa, g, _lambda) = ab.pullback.objects[outer];
            let inner = bc
                .pullback
                .morphism_index(l_b, l_c, h)
                .ok_or_else(|| "missing re-associated morphism".to_string())?;
            a_bc.pullback
                .morphism_index(k_a, inner, g)
                .ok_or_else(|| "missing image morphism".to_string())
        })
        .collect::<Result<_, String>>()?;
    let comparison = Functor::new(
        Arc::clone(&nested_left.groupoid),
        Arc::clone(&a_bc.pullback.groupoid),
        on_objects,
        on_morphisms,
    )
    .map_err(|e| format!("re-association is not a functor: {e}"))?;
    if !comparison.is_strict_isomorphism() {
        return Err("re-association is not an isomorphism of apexes".into());
    }
    let left_ok = Functor::compose(a_bc.span.left(), &comparison)
        .map_err(|e| format!("left legs: {e}"))?
        == *ab_c.span.left();
    let right_ok = Functor::compose(a_bc.span.right(), &comparison)
        .map_err(|e| format!("right legs: {e}"))?
        == *ab_c.span.right();
    if !left_ok || !right_ok {
        return Err("re-association does not commute with the legs".into());
    }
    Ok(format!(
        "triple apex has {} objects and {} morphisms",
        nested_left.objects.len(),
        nested_left.morphisms.len()
    ))
}

/// Composing two modules and then spreading out must agree with spreading
/// out first and composing the correspondences.
pub fn composition_agrees(x: &BiSet, y: &BiSet) -> CaseResult {
    let (_morphism, report) =
        composition_comparison(x, y).map_err(|e| format!("composition comparison: {e}"))?;
    if !report.ok() {
        return Err("composition comparison is not an equivalence".into());
    }
    Ok(format!(
        "composition agreement on sizes {}/{}",
        x.element_count(),
        y.element_count()
    ))
}

// ---------------------------------------------------------------------
// Round trips
// ---------------------------------------------------------------------

fn round_trip_case(rng: &mut ChaCha8Rng) -> CaseResult {
    let b0 = random_nonempty_groupoid(rng);
    let b1 = random_nonempty_groupoid(rng);

    let x = random_admissible_biset(rng, &b1, &b0, 5);
    let beta = module_trip_holds(&x)?;
    let chain = pi0_chain_holds(&x)?;

    let s = random_span(rng, &b1, &b0);
    let s = if s.apex().morphism_count() <= 60 { s } else { small_span(rng, &b1, &b0, 40) };
    let alpha = span_trip_holds(&s)?;

    let t = random_gset(rng, &b0, Variance::Covariant, 3);
    let free = freeness_laws_hold(&t)?;
    let forward = cover_trip_holds(&t)?;
    let back = {
        let tr = t.translation_groupoid();
        let shuffled = relabeled_cover(rng, &tr.projection)?;
        cover_reconstruction_holds(&shuffled)?
    };

    Ok(format!("{beta}; {alpha}; {chain}; {free}; {forward}; {back}"))
}

/// Spreading a module out to a correspondence and reading it back must
/// reproduce the module up to the constructed bijection.
pub fn module_trip_holds(x: &BiSet) -> CaseResult {
    let iso = module_round_trip(x).map_err(|e| format!("module round trip: {e}"))?;
    if iso.target() != x {
        return Err("module round trip landed on a different module".into());
    }
    Ok(format!("module round trip on {} elements", x.element_count()))
}

/// Reading a correspondence as a module and spreading back out must give
/// an equivalent correspondence.
pub fn span_trip_holds(s: &Span) -> CaseResult {
    let (_morphism, report) =
        span_round_trip(s).map_err(|e| format!("correspondence round trip: {e}"))?;
    if !report.ok() {
        return Err("correspondence round trip is not an equivalence".into());
    }
    Ok(format!("correspondence round trip over {} apex objects", s.apex().object_count()))
}

/// Component counts of each column computed three independent ways: orbit
/// classes, components of the column's translation groupoid, and
/// components of the fiber of the spread-out projection.
pub fn pi0_chain_holds(x: &BiSet) -> CaseResult {
    let dt = double_translation(x);
    let mut total = 0;
    for eta in 0..x.left().object_count() {
        let column = x.column(eta);
        let by_orbits = column.orbits().class_count();
        let by_translation =
            column.translation_groupoid().groupoid.components().class_count();
        let by_fiber =
            homotopy_fiber(&dt.to_left, eta).groupoid.components().class_count();
        if by_orbits != by_translation || by_translation != by_fiber {
            return Err(format!(
                "component counts disagree at object {eta}: \
                 {by_orbits}/{by_translation}/{by_fiber}"
            ));
        }
        total += by_orbits;
    }
    Ok(format!("component counts agree three ways ({total} classes)"))
}

/// Freeness must agree with injectivity of the shear map, and every free
/// action must reassemble from its orbit decomposition, with as many
/// orbits as the translation groupoid has components.
pub fn freeness_laws_hold(t: &GSet) -> CaseResult {
    let free = t.is_free();
    if free != t.shear_is_injective() {
        return Err(format!(
            "freeness says {free} but the shear map says {}",
            t.shear_is_injective()
        ));
    }
    let orbit_count = t.orbits().class_count();
    let pi0 = t.translation_groupoid().groupoid.components().class_count();
    if orbit_count != pi0 {
        return Err(format!("{orbit_count} orbits but {pi0} translation components"));
    }
    let quotient = colimit(t).class_count();
    if quotient != orbit_count {
        return Err(format!("{orbit_count} orbits but a {quotient}-class orbit quotient"));
    }
    if free {
        let dec = t.decompose_free().map_err(|e| format!("free decomposition: {e}"))?;
        if !dec.iso.is_bijective() {
            return Err("free reassembly is not bijective".into());
        }
        if dec.summand_objects.len() != orbit_count {
            return Err("free decomposition found the wrong number of orbits".into());
        }
        Ok(format!("free with {orbit_count} orbit(s), reassembly checked"))
    } else {
        Ok(format!("non-free with {orbit_count} orbit(s)"))
    }
}

/// The translation groupoid's projection is a covering functor, and the
/// action it covers is the original one, fiber for fiber.
pub fn cover_trip_holds(t: &GSet) -> CaseResult {
    let tr = t.translation_groupoid();
    if !is_covering_map(&tr.projection) {
        return Err("translation projection is not a covering functor".into());
    }
    let back = gset_from_cover(&tr.projection).map_err(|e| format!("cover to action: {e}"))?;
    if back != *t {
        return Err("cover round trip changed the action".into());
    }
    Ok(format!("action of {} elements recovered from its cover", t.element_count()))
}

/// Rebuild a covering functor from the action it covers: the translation
/// groupoid of that action must be isomorphic to the covering total
/// groupoid, compatibly with both projections.
pub fn cover_reconstruction_holds(p: &Functor) -> CaseResult {
    if !is_covering_map(p) {
        return Err("input is not a covering functor".into());
    }
    let t = gset_from_cover(p).map_err(|e| format!("cover to action: {e}"))?;
    let tr = t.translation_groupoid();
    let total = p.source();
    let base = p.target();
    let mut fiber_objects: Vec<Vec<usize>> = vec![Vec::new(); base.object_count()];
    for o in 0..total.object_count() {
        fiber_objects[p.apply_object(o)].push(o);
    }
    let on_objects: Vec<usize> = (0..t.element_count())
        .map(|element| {
            let (beta, i) = t.element_at(element);
            fiber_objects[beta][i]
        })
        .collect();
    let mut on_morphisms = Vec::with_capacity(tr.groupoid.morphism_count());
    for g in 0..base.morphism_count() {
        for x in 0..t.fiber_size(base.source(g)) {
            let o = fiber_objects[base.source(g)][x];
            let lift = total
                .star(o)
                .into_iter()
                .find(|&h| p.apply_morphism(h) == g)
                .ok_or_else(|| "covering functor lost a lift".to_string())?;
            on_morphisms.push(lift);
        }
    }
    let comparison =
        Functor::new(Arc::clone(&tr.groupoid), Arc::clone(total), on_objects, on_morphisms)
            .map_err(|e| format!("cover comparison is not a functor: {e}"))?;
    if !comparison.is_strict_isomorphism() {
        return Err("cover comparison is not an isomorphism".into());
    }
    let projected = Functor::compose(p, &comparison).map_err(|e| format!("projections: {e}"))?;
    if projected != tr.projection {
        return Err("cover comparison does not commute with the projections".into());
    }
    Ok(format!("cover with {} sheets reconstructed", total.object_count()))
}

/// Shuffle the object and morphism numbering of a cover's total groupoid,
/// so reconstruction checks do not lean on the canonical ordering.
fn relabeled_cover(rng: &mut ChaCha8Rng, p: &Functor) -> Result<Functor, String> {
    let total = p.source();
    let (n, m) = (total.object_count(), total.morphism_count());
    let mut obj: Vec<usize> = (0..n).collect();
    let mut mor: Vec<usize> = (0..m).collect();
    obj.shuffle(rng);
    mor.shuffle(rng);
    let mut raw = RawGroupoid {
        object_count: n,
        mor_source: vec![0; m],
        mor_target: vec![0; m],
        identity: vec![None; n],
        composites: Vec::new(),
    };
    for f in 0..m {
        raw.mor_source[mor[f]] = obj[total.source(f)];
        raw.mor_target[mor[f]] = obj[total.target(f)];
    }
    for o in 0..n {
        raw.identity[obj[o]] = Some(mor[total.identity(o)]);
    }
    for f in 0..m {
        for g in 0..m {
            if let Some(gf) = total.compose(g, f) {
                raw.composites.push((mor[g], mor[f], mor[gf]));
            }
        }
    }
    let shuffled = crate::groupoid::arc(
        Groupoid::validate(&raw).map_err(|e| format!("relabelled total groupoid: {e}"))?,
    );
    let back = Functor::new(
        Arc::clone(&shuffled),
        Arc::clone(total),
        invert_bijection(&obj),
        invert_bijection(&mor),
    )
    .map_err(|e| format!("relabelling functor: {e}"))?;
    Functor::compose(p, &back).map_err(|e| format!("relabelled cover: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use crate::groupoid::arc;
    use crate::sample;

    fn c2() -> Arc<Groupoid> {
        arc(catalog::cyclic(2))
    }

    #[test]
    fn suite_names_round_trip() {
        for suite in Suite::ALL {
            assert_eq!(Suite::from_name(suite.name()), Some(suite));
        }
        assert_eq!(Suite::from_name("no-such-suite"), None);
    }

    #[test]
    fn pentagon_on_stacked_units() {
        let g = c2();
        let u = identity_biset(&g);
        let detail = pentagon_holds(&u, &u, &u, &u).expect("pentagon on units");
        assert!(detail.contains("2 classes"), "{detail}");
    }

    #[test]
    fn triangle_on_stacked_units() {
        let g = c2();
        let u = identity_biset(&g);
        triangle_holds(&u, &u).expect("triangle on units");
    }

    #[test]
    fn pentagon_rejects_incomposable_inputs() {
        let u2 = identity_biset(&c2());
        let u3 = identity_biset(&arc(catalog::cyclic(3)));
        let err = pentagon_holds(&u2, &u3, &u2, &u3).unwrap_err();
        assert!(err.contains("compose"), "{err}");
    }

    #[test]
    fn unitors_agree_on_symmetric_unit() {
        unitors_agree_on_unit(&arc(catalog::symmetric(3))).expect("coherence on the unit");
    }

    #[test]
    fn reassociation_on_forward_spans() {
        let g = c2();
        let id = crate::span::forward_span(&Functor::identity(&g));
        let detail = reassociation_holds(&id, &id, &id).expect("identity spans re-associate");
        assert!(detail.contains("objects"), "{detail}");
    }

    #[test]
    fn cover_reconstruction_on_a_shuffled_regular_cover() {
        let g = c2();
        let t = crate::group::transitive_gset(&g, 0, &[0]);
        let tr = t.translation_groupoid();
        let mut rng = rng(11);
        let shuffled = relabeled_cover(&mut rng, &tr.projection).expect("relabel");
        cover_reconstruction_holds(&shuffled).expect("reconstruction");
    }

    #[test]
    fn pi0_chain_on_a_functor_module() {
        let s3 = arc(catalog::symmetric(3));
        let one = arc(catalog::cyclic(1));
        let q = sample::random_functor(&mut rng(5), &one, &s3).expect("functor to s3");
        let x = crate::biset::module_of_functor(&q);
        let detail = pi0_chain_holds(&x).expect("chain agrees");
        assert!(detail.contains("1 classes") || detail.contains("classes"), "{detail}");
    }

    #[test]
    fn every_suite_passes_a_small_seeded_run() {
        for suite in Suite::ALL {
            for outcome in run_suite(suite, 7, 3) {
                assert!(
                    outcome.passed,
                    "{} case {} failed: {}",
                    outcome.suite, outcome.index, outcome.detail
                );
            }
        }
    }

    #[test]
    fn runs_are_replayable() {
        let first = run_all(42, 2);
        let second = run_all(42, 2);
        assert_eq!(first.len(), second.len());
        for (a, b) in first.iter().zip(&second) {
            assert_eq!(a.suite, b.suite);
            assert_eq!(a.index, b.index);
            assert_eq!(a.passed, b.passed);
            assert_eq!(a.detail, b.detail);
        }
    }
}
