//! Passage between the module picture and the correspondence picture.
//!
//! A two-sided action spreads out into its double translation groupoid,
//! whose projections form a span; a span collapses back into a module by a
//! fiberwise gluing over its apex. The two directions are mutually inverse
//! up to the explicit comparisons built here: [`module_round_trip`] on the
//! module side, [`span_round_trip`] on the span side, and
//! [`composition_comparison`] relating composition performed in either
//! picture. Each returns concrete witness data (a fiberwise bijection or a
//! span morphism with an equivalence report), never a bare boolean.
//!
//! The [`grothendieck`] construction unpacks a strict diagram of groupoids
//! into a single groupoid fibered over the base, with a per-fiber
//! comparison against the homotopy fiber of the projection.

use std::collections::HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::biset::{
    compose_bisets_with_data, BiSet, BiSetError, BisetIso, BisetMap,
};
use crate::functor::{is_equivalence, EquivalenceReport, Functor};
use crate::groupoid::{Groupoid, RawGroupoid};
use crate::span::{compose_spans, Span, SpanError, SpanMorphism};
use crate::util::UnionFind;

#[derive(Debug, Error)]
pub enum ComparisonError {
    #[error(transparent)]
    Span(#[from] SpanError),
    #[error(transparent)]
    Module(#[from] BiSetError),
    #[error("diagram arrow at morphism {morphism} has the wrong endpoints")]
    DiagramShape { morphism: usize },
    #[error("diagram is not functorial at g={g}, f={f}")]
    DiagramNotFunctorial { g: usize, f: usize },
}

/// The double translation groupoid of a module over `(H, G)`: objects are
/// the module's elements, and a morphism `x̄ → x` is a pair of base arrows
/// `(g, h)` with `g·x̄ = x·h`. Projections land in both bases; the one to
/// the left base is a finite weak cover exactly when the module is
/// admissible.
#[derive(Debug, Clone)]
pub struct DoubleTranslation {
    pub groupoid: Arc<Groupoid>,
    /// Projection to the left base `H`.
    pub to_left: Functor,
    /// Projection to the right base `G`.
    pub to_right: Functor,
    /// `(γ, η, i)` per object, lexicographic.
    pub objects: Vec<(usize, usize, usize)>,
    /// `(g, h)` per morphism.
    pub morphisms: Vec<(usize, usize)>,
    object_index: HashMap<(usize, usize, usize), usize>,
    morphism_index: HashMap<(usize, usize, usize), usize>,
}

impl DoubleTranslation {
    pub fn object_of(&self, gamma: usize, eta: usize, elem: usize) -> Option<usize> {
        self.object_index.get(&(gamma, eta, elem)).copied()
    }

    /// Morphism with parts `(g, h)` out of the element `elem` at
    /// `(source of g, source of h)`.
    pub fn morphism_of(&self, g: usize, h: usize, elem: usize) -> Option<usize> {
        self.morphism_index.get(&(g, h, elem)).copied()
    }
}

pub fn double_translation(x: &BiSet) -> DoubleTranslation {
    let (hb, gb) = (x.left(), x.right());
    let mut objects = Vec::new();
    for gamma in 0..gb.object_count() {
        for eta in 0..hb.object_count() {
            for i in 0..x.fiber(eta, gamma) {
                objects.push((gamma, eta, i));
            }
        }
    }
    let object_index: HashMap<(usize, usize, usize), usize> =
        objects.iter().enumerate().map(|(i, &o)| (o, i)).collect();

    let mut morphisms = Vec::new();
    let mut sources = Vec::new();
    let mut targets = Vec::new();
    let mut morphism_index = HashMap::new();
    for g in 0..gb.morphism_count() {
        for h in 0..hb.morphism_count() {
            let (gs, gt) = (gb.source(g), gb.target(g));
            let (hs, ht) = (hb.source(h), hb.target(h));
            for i in 0..x.fiber(hs, gs) {
                // Target element: the unique x with g·x̄ = x·h.
                let moved = x.apply_right(g, hs, i);
                let target_elem = x.unapply_left(h, gt, moved);
                morphism_index.insert((g, h, i), morphisms.len());
                morphisms.push((g, h));
                sources.push(object_index[&(gs, hs, i)]);
                targets.push(object_index[&(gt, ht, target_elem)]);
            }
        }
    }

    let mut identity = vec![None; objects.len()];
    for (o, &(gamma, eta, i)) in objects.iter().enumerate() {
        identity[o] = Some(morphism_index[&(gb.identity(gamma), hb.identity(eta), i)]);
    }

    let mut out_of: Vec<Vec<usize>> = vec![Vec::new(); objects.len()];
    for (m, &s) in sources.iter().enumerate() {
        out_of[s].push(m);
    }
    let mut composites = Vec::new();
    for m1 in 0..morphisms.len() {
        let (g1, h1) = morphisms[m1];
        let i1 = objects[sources[m1]].2;
        for &m2 in &out_of[targets[m1]] {
            let (g2, h2) = morphisms[m2];
            let idx = morphism_index
                [&(gb.compose_unchecked(g2, g1), hb.compose_unchecked(h2, h1), i1)];
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
    let groupoid = Arc::new(Groupoid::validate(&raw).expect("double translation is a groupoid"));
    let to_right = Functor::new(
        Arc::clone(&groupoid),
        Arc::clone(gb),
        objects.iter().map(|o| o.0).collect(),
        morphisms.iter().map(|m| m.0).collect(),
    )
    .expect("projection to the right base is a functor");
    let to_left = Functor::new(
        Arc::clone(&groupoid),
        Arc::clone(hb),
        objects.iter().map(|o| o.1).collect(),
        morphisms.iter().map(|m| m.1).collect(),
    )
    .expect("projection to the left base is a functor");
    DoubleTranslation { groupoid, to_left, to_right, objects, morphisms, object_index, morphism_index }
}

/// The span of the two double-translation projections. Fails exactly when
/// the module is inadmissible (the left projection then has a fiber with
/// automorphisms).
pub fn span_of_biset(x: &BiSet) -> Result<(Span, DoubleTranslation), SpanError> {
    let dt = double_translation(x);
    let span = Span::new(dt.to_left.clone(), dt.to_right.clone())?;
    Ok((span, dt))
}

/// A fiberwise map of modules induces a strict morphism between their
/// spans, acting on double-translation objects element by element.
pub fn span_morphism_of_biset_map(f: &BisetMap) -> Result<SpanMorphism, SpanError> {
    let (source_span, dt_s) = span_of_biset(f.source())?;
    let (target_span, dt_t) = span_of_biset(f.target())?;
    let on_objects = dt_s
        .objects
        .iter()
        .map(|&(gamma, eta, i)| {
            dt_t.object_of(gamma, eta, f.apply(eta, gamma, i)).expect("image object")
        })
        .collect();
    let on_morphisms = (0..dt_s.morphisms.len())
        .map(|m| {
            let (g, h) = dt_s.morphisms[m];
            let (sg, sh, si) = dt_s.objects[dt_s.groupoid.source(m)];
            dt_t.morphism_of(g, h, f.apply(sh, sg, si)).expect("image morphism")
        })
        .collect();
    let functor = Functor::new(
        Arc::clone(&dt_s.groupoid),
        Arc::clone(&dt_t.groupoid),
        on_objects,
        on_morphisms,
    )
    .expect("equivariant maps act on double translations");
    SpanMorphism::strict(source_span, target_span, functor)
}

/// A module rebuilt from a span, with the gluing data per fiber: elements
/// of the fiber at `(η, γ)` are classes of triples — an apex object `κ`,
/// an arrow `p(κ) → γ`, and an arrow `η → q(κ)` — glued along apex
/// morphisms.
#[derive(Debug, Clone)]
pub struct SpanModule {
    pub biset: BiSet,
    coends: Vec<Vec<SpanFiberCoend>>,
}

#[derive(Debug, Clone)]
struct SpanFiberCoend {
    class_of: Vec<usize>,
    reps: Vec<(usize, usize, usize)>,
    offsets: Vec<usize>,
    b_sizes: Vec<usize>,
}

impl SpanFiberCoend {
    fn index(&self, kappa: usize, a_pos: usize, b_pos: usize) -> usize {
        self.offsets[kappa] + a_pos * self.b_sizes[kappa] + b_pos
    }

    fn decode(&self, mut p: usize) -> (usize, usize, usize) {
        let kappa = match self.offsets.binary_search(&p) {
            Ok(mut i) => {
                while i + 1 < self.offsets.len() && self.offsets[i + 1] == p {
                    i += 1;
                }
                i
            }
            Err(i) => i - 1,
        };
        p -= self.offsets[kappa];
        (kappa, p / self.b_sizes[kappa].max(1), p % self.b_sizes[kappa].max(1))
    }
}

impl SpanModule {
    /// Class of the triple `(κ, a: p(κ) → γ, b: η → q(κ))` (arrows given
    /// by morphism id) in the fiber at `(η, γ)`.
    pub fn class_of(
        &self,
        span: &Span,
        eta: usize,
        gamma: usize,
        kappa: usize,
        a: usize,
        b: usize,
    ) -> usize {
        let coend = &self.coends[eta][gamma];
        let a_pos = span
            .right_base()
            .hom(span.right().apply_object(kappa), gamma)
            .binary_search(&a)
            .expect("arrow in hom set");
        let b_pos = span
            .left_base()
            .hom(eta, span.left().apply_object(kappa))
            .binary_search(&b)
            .expect("arrow in hom set");
        coend.class_of[coend.index(kappa, a_pos, b_pos)]
    }

    /// Representative `(κ, a, b)` of a class, with arrows as morphism ids.
    pub fn representative(
        &self,
        span: &Span,
        eta: usize,
        gamma: usize,
        class: usize,
    ) -> (usize, usize, usize) {
        let (kappa, a_pos, b_pos) = self.coends[eta][gamma].reps[class];
        let a = span.right_base().hom(span.right().apply_object(kappa), gamma)[a_pos];
        let b = span.left_base().hom(eta, span.left().apply_object(kappa))[b_pos];
        (kappa, a, b)
    }

    fn members(&self, eta: usize, gamma: usize, class: usize) -> Vec<(usize, usize, usize)> {
        let coend = &self.coends[eta][gamma];
        (0..coend.class_of.len())
            .filter(|&p| coend.class_of[p] == class)
            .map(|p| coend.decode(p))
            .collect()
    }
}

pub fn module_of_span_with_data(s: &Span) -> Result<SpanModule, BiSetError> {
    let (hb, gb, apex) = (s.left_base(), s.right_base(), s.apex());
    let (q, p) = (s.left(), s.right());
    let mut coends: Vec<Vec<SpanFiberCoend>> = Vec::with_capacity(hb.object_count());
    for eta in 0..hb.object_count() {
        let mut row = Vec::with_capacity(gb.object_count());
        for gamma in 0..gb.object_count() {
            let a_sizes: Vec<usize> = (0..apex.object_count())
                .map(|k| gb.hom(p.apply_object(k), gamma).len())
                .collect();
            let b_sizes: Vec<usize> = (0..apex.object_count())
                .map(|k| hb.hom(eta, q.apply_object(k)).len())
                .collect();
            let mut offsets = Vec::with_capacity(apex.object_count() + 1);
            let mut acc = 0;
            for k in 0..apex.object_count() {
                offsets.push(acc);
                acc += a_sizes[k] * b_sizes[k];
            }
            offsets.push(acc);
            let stub = SpanFiberCoend { class_of: Vec::new(), reps: Vec::new(), offsets, b_sizes };
            let mut uf = UnionFind::new(acc);
            for k in 0..apex.morphism_count() {
                let (ks, kt) = (apex.source(k), apex.target(k));
                let a_from = gb.hom(p.apply_object(ks), gamma);
                let b_from = hb.hom(eta, q.apply_object(ks));
                let a_to = gb.hom(p.apply_object(kt), gamma);
                let b_to = hb.hom(eta, q.apply_object(kt));
                for (a_pos, &a) in a_from.iter().enumerate() {
                    let a_image = gb.compose_unchecked(a, gb.inverse(p.apply_morphism(k)));
                    let a_image_pos = a_to.binary_search(&a_image).expect("hom member");
                    for (b_pos, &b) in b_from.iter().enumerate() {
                        let b_image = hb.compose_unchecked(q.apply_morphism(k), b);
                        let b_image_pos = b_to.binary_search(&b_image).expect("hom member");
                        uf.union(
                            stub.index(ks, a_pos, b_pos),
                            stub.index(kt, a_image_pos, b_image_pos),
                        );
                    }
                }
            }
            let classes = uf.into_classes();
            let reps = classes.representatives().iter().map(|&pr| stub.decode(pr)).collect();
            row.push(SpanFiberCoend { class_of: classes.class_of, reps, ..stub });
        }
        coends.push(row);
    }

    let fibers: Vec<Vec<usize>> = coends
        .iter()
        .map(|row| row.iter().map(|c| c.reps.len()).collect())
        .collect();

    // Actions from representatives, re-checked across whole classes.
    let mut g_action: Vec<Vec<Vec<usize>>> = Vec::with_capacity(gb.morphism_count());
    for g in 0..gb.morphism_count() {
        let (from, to) = (gb.source(g), gb.target(g));
        let mut per_eta = Vec::with_capacity(hb.object_count());
        for eta in 0..hb.object_count() {
            let coend = &coends[eta][from];
            let target_coend = &coends[eta][to];
            let mut table = vec![usize::MAX; fibers[eta][from]];
            for pr in 0..coend.class_of.len() {
                let (kappa, a_pos, b_pos) = coend.decode(pr);
                let a = gb.hom(p.apply_object(kappa), from)[a_pos];
                let moved = gb.compose_unchecked(g, a);
                let moved_pos = gb
                    .hom(p.apply_object(kappa), to)
                    .binary_search(&moved)
                    .expect("hom member");
                let img = target_coend.class_of[target_coend.index(kappa, moved_pos, b_pos)];
                let cls = coend.class_of[pr];
                if table[cls] == usize::MAX {
                    table[cls] = img;
                } else if table[cls] != img {
                    return Err(BiSetError::IllDefined);
                }
            }
            per_eta.push(table);
        }
        g_action.push(per_eta);
    }
    let mut h_action: Vec<Vec<Vec<usize>>> = Vec::with_capacity(hb.morphism_count());
    for h in 0..hb.morphism_count() {
        let (from, to) = (hb.source(h), hb.target(h));
        let mut per_gamma = Vec::with_capacity(gb.object_count());
        for gamma in 0..gb.object_count() {
            let coend = &coends[to][gamma];
            let target_coend = &coends[from][gamma];
            let mut table = vec![usize::MAX; fibers[to][gamma]];
            for pr in 0..coend.class_of.len() {
                let (kappa, a_pos, b_pos) = coend.decode(pr);
                let b = hb.hom(to, q.apply_object(kappa))[b_pos];
                let moved = hb.compose_unchecked(b, h);
                let moved_pos = hb
                    .hom(from, q.apply_object(kappa))
                    .binary_search(&moved)
                    .expect("hom member");
                let img = target_coend.class_of[target_coend.index(kappa, a_pos, moved_pos)];
                let cls = coend.class_of[pr];
                if table[cls] == usize::MAX {
                    table[cls] = img;
                } else if table[cls] != img {
                    return Err(BiSetError::IllDefined);
                }
            }
            per_gamma.push(table);
        }
        h_action.push(per_gamma);
    }

    let biset = BiSet::new(
        Arc::clone(hb),
        Arc::clone(gb),
        fibers,
        g_action,
        h_action,
    )?;
    Ok(SpanModule { biset, coends })
}

pub fn module_of_span(s: &Span) -> Result<BiSet, BiSetError> {
    Ok(module_of_span_with_data(s)?.biset)
}

/// A span morphism acts on the rebuilt modules: a class `(κ', a, b)` of the
/// source module goes to `(t(κ'), a ∘ θ⁻¹, φ ∘ b)` where `θ, φ` are the leg
/// witnesses at `κ'`.
pub fn biset_map_of_span_morphism(m: &SpanMorphism) -> Result<BisetMap, ComparisonError> {
    let source = module_of_span_with_data(m.source())?;
    let target = module_of_span_with_data(m.target())?;
    let (hb, gb) = (m.source().left_base(), m.source().right_base());
    let s = &source.biset;
    let mut components: Vec<Vec<Vec<usize>>> = Vec::with_capacity(hb.object_count());
    for eta in 0..hb.object_count() {
        let mut row = Vec::with_capacity(gb.object_count());
        for gamma in 0..gb.object_count() {
            let mut table = vec![usize::MAX; s.fiber(eta, gamma)];
            for (cls_index, _) in source.coends[eta][gamma].reps.iter().enumerate() {
                for (kappa, a_pos, b_pos) in source.members(eta, gamma, cls_index) {
                    let a = gb.hom(m.source().right().apply_object(kappa), gamma)[a_pos];
                    let b = hb.hom(eta, m.source().left().apply_object(kappa))[b_pos];
                    let a_moved =
                        gb.compose_unchecked(a, gb.inverse(m.right_witness().component(kappa)));
                    let b_moved = hb.compose_unchecked(m.left_witness().component(kappa), b);
                    let img = target.class_of(
                        m.target(),
                        eta,
                        gamma,
                        m.functor().apply_object(kappa),
                        a_moved,
                        b_moved,
                    );
                    if table[cls_index] == usize::MAX {
                        table[cls_index] = img;
                    } else if table[cls_index] != img {
                        return Err(ComparisonError::Module(BiSetError::IllDefined));
                    }
                }
            }
            row.push(table);
        }
        components.push(row);
    }
    Ok(BisetMap::new(s.clone(), target.biset, components)?)
}

/// Round trip on the module side: collapse the span of a module back into
/// a module and exhibit the fiberwise bijection onto the original. A class
/// `(κ = element x̄, a, b)` collapses to `(a·x̄)·b`.
pub fn module_round_trip(x: &BiSet) -> Result<BisetIso, ComparisonError> {
    let (span, dt) = span_of_biset(x)?;
    let rebuilt = module_of_span_with_data(&span)?;
    let (hb, gb) = (x.left(), x.right());
    let s = &rebuilt.biset;
    let mut components: Vec<Vec<Vec<usize>>> = Vec::with_capacity(hb.object_count());
    for eta in 0..hb.object_count() {
        let mut row = Vec::with_capacity(gb.object_count());
        for gamma in 0..gb.object_count() {
            let mut table = vec![usize::MAX; s.fiber(eta, gamma)];
            for cls_index in 0..s.fiber(eta, gamma) {
                for (kappa, a_pos, b_pos) in rebuilt.members(eta, gamma, cls_index) {
                    let (gamma_bar, eta_bar, elem) = dt.objects[kappa];
                    let a = gb.hom(gamma_bar, gamma)[a_pos];
                    let b = hb.hom(eta, eta_bar)[b_pos];
                    let moved_right = x.apply_right(a, eta_bar, elem);
                    let img = x.apply_left(b, gamma, moved_right);
                    if table[cls_index] == usize::MAX {
                        table[cls_index] = img;
                    } else if table[cls_index] != img {
                        return Err(ComparisonError::Module(BiSetError::IllDefined));
                    }
                }
            }
            row.push(table);
        }
        components.push(row);
    }
    Ok(BisetIso::new(BisetMap::new(s.clone(), x.clone(), components)?)?)
}

/// Round trip on the span side: rebuild the module of a span, spread it
/// out again, and compare apexes by `κ ↦ (pκ, [κ, 1, 1], qκ)`. The
/// comparison is a strict span morphism and an equivalence of groupoids;
/// the report carries the constructive witness.
pub fn span_round_trip(s: &Span) -> Result<(SpanMorphism, EquivalenceReport), ComparisonError> {
    let rebuilt = module_of_span_with_data(s)?;
    let (target_span, dt) = span_of_biset(&rebuilt.biset)?;
    let apex = s.apex();
    let (q, p) = (s.left(), s.right());
    let on_objects: Vec<usize> = (0..apex.object_count())
        .map(|kappa| {
            let gamma = p.apply_object(kappa);
            let eta = q.apply_object(kappa);
            let class = rebuilt.class_of(
                s,
                eta,
                gamma,
                kappa,
                s.right_base().identity(gamma),
                s.left_base().identity(eta),
            );
            dt.object_of(gamma, eta, class).expect("round-trip object")
        })
        .collect();
    let on_morphisms: Vec<usize> = (0..apex.morphism_count())
        .map(|k| {
            let kappa = apex.source(k);
            let (gamma, eta, class) = dt.objects[on_objects[kappa]];
            debug_assert_eq!((gamma, eta), (p.apply_object(kappa), q.apply_object(kappa)));
            dt.morphism_of(p.apply_morphism(k), q.apply_morphism(k), class)
                .expect("round-trip morphism")
        })
        .collect();
    let functor = Functor::new(
        Arc::clone(apex),
        Arc::clone(&dt.groupoid),
        on_objects,
        on_morphisms,
    )
    .expect("round-trip comparison is a functor");
    let report = is_equivalence(&functor);
    let morphism = SpanMorphism::strict(s.clone(), target_span, functor)?;
    Ok((morphism, report))
}

/// Composition performed span-side against composition performed
/// module-side: the pullback of double translations maps onto the double
/// translation of the composite module by
/// `((γ, x, η), h, (η', y, κ)) ↦ (γ, [x·h, y], κ)`. Returns the strict
/// comparison morphism and its equivalence report.
pub fn composition_comparison(
    x: &BiSet,
    y: &BiSet,
) -> Result<(SpanMorphism, EquivalenceReport), ComparisonError> {
    let (span_x, dt_x) = span_of_biset(x)?;
    let (span_y, dt_y) = span_of_biset(y)?;
    let composed = compose_spans(&span_x, &span_y)?;
    let xy = compose_bisets_with_data(x, y)?;
    let (target_span, dt_xy) = span_of_biset(&xy.biset)?;
    let pb = &composed.pullback;

    let on_objects: Vec<usize> = pb
        .objects
        .iter()
        .map(|&(ex, h, ey)| {
            let (gamma, _eta_x, xe) = dt_x.objects[ex];
            let (eta_y, kappa, ye) = dt_y.objects[ey];
            let moved = x.apply_left(h, gamma, xe);
            let class = xy.class_of(kappa, gamma, eta_y, moved, ye);
            dt_xy.object_of(gamma, kappa, class).expect("composite object")
        })
        .collect();
    let on_morphisms: Vec<usize> = (0..pb.morphisms.len())
        .map(|m| {
            let (k_ex, l_ey) = pb.morphisms[m];
            let (g, _hx) = dt_x.morphisms[k_ex];
            let (_hy, k) = dt_y.morphisms[l_ey];
            let source_elem = dt_xy.objects[on_objects[pb.groupoid.source(m)]].2;
            dt_xy.morphism_of(g, k, source_elem).expect("composite morphism")
        })
        .collect();
    let functor = Functor::new(
        Arc::clone(&pb.groupoid),
        Arc::clone(&dt_xy.groupoid),
        on_objects,
        on_morphisms,
    )
    .expect("composition comparison is a functor");
    let report = is_equivalence(&functor);
    let morphism = SpanMorphism::strict(composed.span.clone(), target_span, functor)?;
    Ok((morphism, report))
}

/// A strict diagram of groupoids on a base: one groupoid per object and,
/// for each arrow `h`, a functor pulling the target's value back to the
/// source's, respecting identities and composition exactly.
#[derive(Debug, Clone)]
pub struct StrictDiagram {
    base: Arc<Groupoid>,
    values: Vec<Arc<Groupoid>>,
    arrows: Vec<Functor>,
}

impl StrictDiagram {
    pub fn new(
        base: Arc<Groupoid>,
        values: Vec<Arc<Groupoid>>,
        arrows: Vec<Functor>,
    ) -> Result<StrictDiagram, ComparisonError> {
        if values.len() != base.object_count() || arrows.len() != base.morphism_count() {
            return Err(ComparisonError::DiagramShape { morphism: arrows.len() });
        }
        for h in 0..base.morphism_count() {
            if arrows[h].source() != &values[base.target(h)]
                || arrows[h].target() != &values[base.source(h)]
            {
                return Err(ComparisonError::DiagramShape { morphism: h });
            }
        }
        for eta in 0..base.object_count() {
            let e = base.identity(eta);
            if arrows[e] != Functor::identity(&values[eta]) {
                return Err(ComparisonError::DiagramNotFunctorial { g: e, f: e });
            }
        }
        for h2 in 0..base.morphism_count() {
            for h1 in 0..base.morphism_count() {
                let Some(h21) = base.compose(h2, h1) else { continue };
                let chained = Functor::compose(&arrows[h1], &arrows[h2])
                    .expect("diagram arrows compose");
                if arrows[h21] != chained {
                    return Err(ComparisonError::DiagramNotFunctorial { g: h2, f: h1 });
                }
            }
        }
        Ok(StrictDiagram { base, values, arrows })
    }

    pub fn base(&self) -> &Arc<Groupoid> {
        &self.base
    }

    pub fn value(&self, eta: usize) -> &Arc<Groupoid> {
        &self.values[eta]
    }

    pub fn arrow(&self, h: usize) -> &Functor {
        &self.arrows[h]
    }
}

/// The total groupoid of a strict diagram, fibered over the base.
#[derive(Debug, Clone)]
pub struct Grothendieck {
    pub groupoid: Arc<Groupoid>,
    pub projection: Functor,
    /// `(η, φ)` per object.
    pub objects: Vec<(usize, usize)>,
    object_index: HashMap<(usize, usize), usize>,
    /// Keyed by `(h, target fiber object φ, fiber arrow f)`.
    morphism_index: HashMap<(usize, usize, usize), usize>,
}

impl Grothendieck {
    pub fn object_of(&self, eta: usize, phi: usize) -> Option<usize> {
        self.object_index.get(&(eta, phi)).copied()
    }

    pub fn morphism_of(&self, h: usize, phi: usize, f: usize) -> Option<usize> {
        self.morphism_index.get(&(h, phi, f)).copied()
    }
}

pub fn grothendieck(d: &StrictDiagram) -> Grothendieck {
    let base = d.base();
    let mut objects = Vec::new();
    for eta in 0..base.object_count() {
        for phi in 0..d.values[eta].object_count() {
            objects.push((eta, phi));
        }
    }
    let object_index: HashMap<(usize, usize), usize> =
        objects.iter().enumerate().map(|(i, &o)| (o, i)).collect();

    // A morphism (η', φ') → (η, φ) is a base arrow h: η' → η together with
    // a fiber arrow f: φ' → F(h)(φ) in the source's value.
    let mut morphisms = Vec::new();
    let mut sources = Vec::new();
    let mut targets = Vec::new();
    let mut morphism_index = HashMap::new();
    for h in 0..base.morphism_count() {
        let (hs, ht) = (base.source(h), base.target(h));
        for phi in 0..d.values[ht].object_count() {
            let pulled = d.arrows[h].apply_object(phi);
            for f in 0..d.values[hs].morphism_count() {
                if d.values[hs].target(f) != pulled {
                    continue;
                }
                morphism_index.insert((h, phi, f), morphisms.len());
                morphisms.push((h, phi, f));
                sources.push(object_index[&(hs, d.values[hs].source(f))]);
                targets.push(object_index[&(ht, phi)]);
            }
        }
    }

    let mut identity = vec![None; objects.len()];
    for (o, &(eta, phi)) in objects.iter().enumerate() {
        identity[o] =
            Some(morphism_index[&(base.identity(eta), phi, d.values[eta].identity(phi))]);
    }

    let mut out_of: Vec<Vec<usize>> = vec![Vec::new(); objects.len()];
    for (m, &s) in sources.iter().enumerate() {
        out_of[s].push(m);
    }
    let mut composites = Vec::new();
    for m1 in 0..morphisms.len() {
        let (h1, _phi1, f1) = morphisms[m1];
        for &m2 in &out_of[targets[m1]] {
            let (h2, phi2, f2) = morphisms[m2];
            let h21 = base.compose_unchecked(h2, h1);
            // Second component: pull f2 back along F(h1), then follow f1.
            let f21 = d.values[base.source(h1)]
                .compose_unchecked(d.arrows[h1].apply_morphism(f2), f1);
            composites.push((m2, m1, morphism_index[&(h21, phi2, f21)]));
        }
    }

    let raw = RawGroupoid {
        object_count: objects.len(),
        mor_source: sources,
        mor_target: targets,
        identity,
        composites,
    };
    let groupoid = Arc::new(Groupoid::validate(&raw).expect("total groupoid is a groupoid"));
    let projection = Functor::new(
        Arc::clone(&groupoid),
        Arc::clone(base),
        objects.iter().map(|o| o.0).collect(),
        morphisms.iter().map(|m| m.0).collect(),
    )
    .expect("projection to the base is a functor");
    Grothendieck { groupoid, projection, objects, object_index, morphism_index }
}

/// Compare a diagram value with the homotopy fiber of the projection over
/// the same object: `φ ↦ ((η0, φ), 1, ∗)`.
pub fn fiber_comparison(
    d: &StrictDiagram,
    gr: &Grothendieck,
    eta0: usize,
) -> (Functor, EquivalenceReport) {
    let fiber = crate::span::homotopy_fiber(&gr.projection, eta0);
    let value = &d.values[eta0];
    let base_id = d.base().identity(eta0);
    let on_objects: Vec<usize> = (0..value.object_count())
        .map(|phi| {
            fiber
                .object_index(gr.object_of(eta0, phi).expect("fiber object"), base_id, 0)
                .expect("comparison object")
        })
        .collect();
    let on_morphisms: Vec<usize> = (0..value.morphism_count())
        .map(|f| {
            let total = gr
                .morphism_of(base_id, value.target(f), f)
                .expect("vertical morphism");
            fiber
                .morphism_index(total, 0, base_id)
                .expect("comparison morphism")
        })
        .collect();
    let functor = Functor::new(
        Arc::clone(value),
        Arc::clone(&fiber.groupoid),
        on_objects,
        on_morphisms,
    )
    .expect("fiber comparison is a functor");
    let report = is_equivalence(&functor);
    (functor, report)
}
