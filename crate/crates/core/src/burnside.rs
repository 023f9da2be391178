//! The decomposition algebra of admissible two-sided actions over a fixed
//! pair of bases: splitting into indecomposable pieces, a canonical code
//! that decides isomorphism without any search, formal integer
//! combinations of classes, and the finite basis of transitive pieces.
//!
//! The canonical code is deliberately a second, independent route to the
//! isomorphism question: [`crate::biset::find_isomorphism`] hunts for an
//! explicit equivariant bijection, while [`canonical_form`] relabels each
//! piece by a seeded breadth-first traversal and takes the least
//! serialization over all seeds. The two must always agree.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::biset::{compose_bisets, module_of_functor, BiSet, BiSetError};
use crate::functor::{disjoint_union, Coproduct};
use crate::group::{subgroup_conjugacy_representatives, transitive_gset, VertexGroup};
use crate::groupoid::{arc, Groupoid};
use crate::gset::{GSet, Variance};
use crate::span::transfer_span;

/// Split into the pieces that cannot be written as a disjoint union: the
/// restrictions of the action to each connected block of elements.
pub fn indecomposables(x: &BiSet) -> Vec<BiSet> {
    let parts = x.element_components();
    let (hb, gb) = (x.left(), x.right());
    let (nh, ng) = (hb.object_count(), gb.object_count());
    parts
        .members
        .iter()
        .map(|members| {
            // Per fiber: which elements survive, and their new local index.
            let mut keep: Vec<Vec<Vec<usize>>> = vec![vec![Vec::new(); ng]; nh];
            let mut local: Vec<Vec<BTreeMap<usize, usize>>> =
                vec![vec![BTreeMap::new(); ng]; nh];
            for &globe in members {
                let (eta, gamma, i) = x.element_at(globe);
                local[eta][gamma].insert(i, keep[eta][gamma].len());
                keep[eta][gamma].push(i);
            }
            let fibers: Vec<Vec<usize>> = keep
                .iter()
                .map(|row| row.iter().map(|v| v.len()).collect())
                .collect();
            let g_action = (0..gb.morphism_count())
                .map(|g| {
                    let (from, to) = (gb.source(g), gb.target(g));
                    (0..nh)
                        .map(|eta| {
                            keep[eta][from]
                                .iter()
                                .map(|&i| local[eta][to][&x.apply_right(g, eta, i)])
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
                            keep[to][gamma]
                                .iter()
                                .map(|&i| local[from][gamma][&x.apply_left(h, gamma, i)])
                                .collect()
                        })
                        .collect()
                })
                .collect();
            BiSet::new_relaxed(Arc::clone(hb), Arc::clone(gb), fibers, g_action, h_action)
                .expect("a connected block of a valid action is a valid action")
        })
        .collect()
}

/// Disjoint union over the same bases, first summand's elements first.
pub fn direct_sum(a: &BiSet, b: &BiSet) -> Result<BiSet, BiSetError> {
    if a.left() != b.left() || a.right() != b.right() {
        return Err(BiSetError::BaseMismatch);
    }
    let (hb, gb) = (a.left(), a.right());
    let fibers: Vec<Vec<usize>> = (0..hb.object_count())
        .map(|eta| {
            (0..gb.object_count()).map(|gamma| a.fiber(eta, gamma) + b.fiber(eta, gamma)).collect()
        })
        .collect();
    let g_action = (0..gb.morphism_count())
        .map(|g| {
            let from = gb.source(g);
            (0..hb.object_count())
                .map(|eta| {
                    let cut = a.fiber(eta, from);
                    let shift = a.fiber(eta, gb.target(g));
                    (0..fibers[eta][from])
                        .map(|i| {
                            if i < cut {
                                a.apply_right(g, eta, i)
                            } else {
                                shift + b.apply_right(g, eta, i - cut)
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let h_action = (0..hb.morphism_count())
        .map(|h| {
            let to = hb.target(h);
            (0..gb.object_count())
                .map(|gamma| {
                    let cut = a.fiber(to, gamma);
                    let shift = a.fiber(hb.source(h), gamma);
                    (0..fibers[to][gamma])
                        .map(|i| {
                            if i < cut {
                                a.apply_left(h, gamma, i)
                            } else {
                                shift + b.apply_left(h, gamma, i - cut)
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    BiSet::new_relaxed(Arc::clone(hb), Arc::clone(gb), fibers, g_action, h_action)
}

/// Code of one connected piece from a given seed element: breadth-first
/// discovery order, recording per visited element its fiber label and the
/// discovery number of every action partner. The traversal is fully
/// determined by the structure, so isomorphic pieces seeded at matching
/// elements produce identical codes.
fn code_from_seed(x: &BiSet, seed: usize) -> Vec<usize> {
    let (hb, gb) = (x.left(), x.right());
    let mut order = vec![seed];
    let mut pos: BTreeMap<usize, usize> = BTreeMap::new();
    pos.insert(seed, 0);
    let mut code = Vec::new();
    let mut cursor = 0;
    while cursor < order.len() {
        let globe = order[cursor];
        cursor += 1;
        let (eta, gamma, i) = x.element_at(globe);
        code.push(eta);
        code.push(gamma);
        let mut visit = |partner: usize, code: &mut Vec<usize>| {
            let n = pos.len();
            let p = *pos.entry(partner).or_insert_with(|| {
                order.push(partner);
                n
            });
            code.push(p);
        };
        for g in 0..gb.morphism_count() {
            if gb.source(g) == gamma {
                let partner = x.global_index(eta, gb.target(g), x.apply_right(g, eta, i));
                visit(partner, &mut code);
            }
        }
        for h in 0..hb.morphism_count() {
            if hb.target(h) == eta {
                let partner = x.global_index(hb.source(h), gamma, x.apply_left(h, gamma, i));
                visit(partner, &mut code);
            }
        }
    }
    code
}

/// Canonical code of one indecomposable piece: the least seed code.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BisetClass {
    pub code: Vec<usize>,
}

impl BisetClass {
    /// Short stable identifier for reports: the first sixteen hex digits
    /// of the SHA-256 of the code serialized as little-endian 64-bit
    /// words. Equal codes — and only equal codes, up to hash collisions —
    /// share an identifier across runs and machines.
    pub fn hash_hex(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for &word in &self.code {
            hasher.update((word as u64).to_le_bytes());
        }
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn indecomposable_code(x: &BiSet) -> BisetClass {
    let components = x.element_components();
    assert!(components.class_count() <= 1, "code of a piece with several blocks");
    let code = (0..x.element_count())
        .map(|seed| code_from_seed(x, seed))
        .min()
        .unwrap_or_default();
    BisetClass { code }
}

/// Complete isomorphism invariant: base sizes followed by the sorted,
/// length-prefixed canonical codes of all pieces.
pub fn canonical_form(x: &BiSet) -> Vec<usize> {
    let mut codes: Vec<Vec<usize>> =
        indecomposables(x).iter().map(|p| indecomposable_code(p).code).collect();
    codes.sort();
    let mut out = vec![
        x.left().object_count(),
        x.left().morphism_count(),
        x.right().object_count(),
        x.right().morphism_count(),
        codes.len(),
    ];
    for c in codes {
        out.push(c.len());
        out.extend(c);
    }
    out
}

/// Piece classes of an action with multiplicities and one representative
/// each, keyed by canonical code.
pub fn classes_of(x: &BiSet) -> BTreeMap<BisetClass, (usize, BiSet)> {
    let mut out: BTreeMap<BisetClass, (usize, BiSet)> = BTreeMap::new();
    for piece in indecomposables(x) {
        let class = indecomposable_code(&piece);
        out.entry(class).and_modify(|e| e.0 += 1).or_insert((1, piece));
    }
    out
}

/// A formal integer combination of piece classes over a fixed pair of
/// bases: the difference-completion of the disjoint-union monoid, with
/// composition extended bilinearly.
#[derive(Debug, Clone)]
pub struct BurnsideElement {
    left: Arc<Groupoid>,
    right: Arc<Groupoid>,
    terms: BTreeMap<BisetClass, (i64, BiSet)>,
}

impl BurnsideElement {
    pub fn zero(left: Arc<Groupoid>, right: Arc<Groupoid>) -> BurnsideElement {
        BurnsideElement { left, right, terms: BTreeMap::new() }
    }

    pub fn from_biset(x: &BiSet) -> BurnsideElement {
        let mut out =
            BurnsideElement::zero(Arc::clone(x.left()), Arc::clone(x.right()));
        for (class, (count, rep)) in classes_of(x) {
            out.terms.insert(class, (count as i64, rep));
        }
        out
    }

    pub fn left(&self) -> &Arc<Groupoid> {
        &self.left
    }

    pub fn right(&self) -> &Arc<Groupoid> {
        &self.right
    }

    pub fn terms(&self) -> &BTreeMap<BisetClass, (i64, BiSet)> {
        &self.terms
    }

    pub fn coefficient(&self, class: &BisetClass) -> i64 {
        self.terms.get(class).map_or(0, |t| t.0)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add(&self, other: &BurnsideElement) -> Result<BurnsideElement, BiSetError> {
        if self.left != other.left || self.right != other.right {
            return Err(BiSetError::BaseMismatch);
        }
        let mut out = self.clone();
        for (class, (n, rep)) in &other.terms {
            let entry =
                out.terms.entry(class.clone()).or_insert_with(|| (0, rep.clone()));
            entry.0 += n;
            if entry.0 == 0 {
                out.terms.remove(class);
            }
        }
        Ok(out)
    }

    pub fn negate(&self) -> BurnsideElement {
        let mut out = self.clone();
        for term in out.terms.values_mut() {
            term.0 = -term.0;
        }
        out
    }

    pub fn sub(&self, other: &BurnsideElement) -> Result<BurnsideElement, BiSetError> {
        self.add(&other.negate())
    }
}

/// Bilinear extension of composition: composes representatives pairwise
/// and re-splits the results. Signature mirrors
/// [`crate::biset::compose_bisets`].
pub fn compose_elements(
    x: &BurnsideElement,
    y: &BurnsideElement,
) -> Result<BurnsideElement, BiSetError> {
    if x.left != y.right {
        return Err(BiSetError::BaseMismatch);
    }
    let mut out = BurnsideElement::zero(Arc::clone(&y.left), Arc::clone(&x.right));
    for (nx, rx) in x.terms.values() {
        for (ny, ry) in y.terms.values() {
            let product = compose_bisets(rx, ry)?;
            for (class, (count, rep)) in classes_of(&product) {
                let entry = out.terms.entry(class.clone()).or_insert((0, rep));
                entry.0 += nx * ny * count as i64;
                if entry.0 == 0 {
                    out.terms.remove(&class);
                }
            }
        }
    }
    Ok(out)
}

/// Repackage a covariant action of `(left)ᵒᵖ × right` as a two-sided
/// action. The base of `t` must be the product of the opposite of `left`
/// with `right`, in that order.
pub fn biset_of_product_action(
    left: &Arc<Groupoid>,
    right: &Arc<Groupoid>,
    t: &GSet,
) -> Result<BiSet, BiSetError> {
    let (nh, ng) = (left.object_count(), right.object_count());
    let mg = right.morphism_count();
    if t.variance() != Variance::Covariant
        || t.base().object_count() != nh * ng
        || t.base().morphism_count() != left.morphism_count() * mg
    {
        return Err(BiSetError::BadShape);
    }
    let fibers: Vec<Vec<usize>> =
        (0..nh).map(|eta| (0..ng).map(|gamma| t.fiber_size(eta * ng + gamma)).collect()).collect();
    let g_action = (0..mg)
        .map(|g| {
            (0..nh).map(|eta| t.action_table(left.identity(eta) * mg + g).to_vec()).collect()
        })
        .collect();
    let h_action = (0..left.morphism_count())
        .map(|h| {
            (0..ng).map(|gamma| t.action_table(h * mg + right.identity(gamma)).to_vec()).collect()
        })
        .collect();
    BiSet::new_relaxed(Arc::clone(left), Arc::clone(right), fibers, g_action, h_action)
}

/// The finite basis: one representative per isomorphism class of
/// admissible indecomposable piece, sorted by canonical code. Pieces come
/// from transitive actions of `(left)ᵒᵖ × right`, one per pair (connected
/// block, vertex subgroup up to conjugacy), keeping the admissible ones.
pub fn indecomposable_classes(left: &Arc<Groupoid>, right: &Arc<Groupoid>) -> Vec<BiSet> {
    let k = arc(Groupoid::product(&Groupoid::opposite(left), right));
    let mut out = Vec::new();
    for o in k.components().representatives() {
        let vg = VertexGroup::of(&k, o);
        for u in subgroup_conjugacy_representatives(&vg) {
            let t = transitive_gset(&k, o, &u);
            let b = biset_of_product_action(left, right, &t)
                .expect("transitive product actions repackage");
            if b.is_admissible() {
                out.push(b);
            }
        }
    }
    out.sort_by_cached_key(indecomposable_code);
    debug_assert!(
        out.windows(2).all(|w| indecomposable_code(&w[0]) != indecomposable_code(&w[1])),
        "basis enumeration produced duplicate classes"
    );
    out
}

/// The basis classes with total element count at most `size_bound`. The
/// full basis is already finite for finite bases, so the bound is a
/// filter, not an enumeration horizon; it exists because callers size
/// their reports.
pub fn burnside_group(left: &Arc<Groupoid>, right: &Arc<Groupoid>, size_bound: usize) -> Vec<BiSet> {
    let mut basis = indecomposable_classes(left, right);
    basis.retain(|b| b.element_count() <= size_bound);
    basis
}

/// Induction and restriction along the two blocks of a disjoint union of
/// bases: the data behind the splitting of the decomposition algebra over
/// a disconnected right base.
pub struct ComponentSplit {
    pub union: Coproduct,
    /// In `B(first, union)` and `B(second, union)`.
    pub induce_first: BiSet,
    pub induce_second: BiSet,
    /// In `B(union, first)` and `B(union, second)`.
    pub restrict_first: BiSet,
    pub restrict_second: BiSet,
}

pub fn component_split(a: &Arc<Groupoid>, b: &Arc<Groupoid>) -> ComponentSplit {
    let union = disjoint_union(a, b);
    let induce_first = module_of_functor(&union.into_left);
    let induce_second = module_of_functor(&union.into_right);
    let restrict_first = crate::comparison::module_of_span(
        &transfer_span(&union.into_left).expect("block inclusions are finite weak covers"),
    )
    .expect("restriction along a block inclusion is admissible");
    let restrict_second = crate::comparison::module_of_span(
        &transfer_span(&union.into_right).expect("block inclusions are finite weak covers"),
    )
    .expect("restriction along a block inclusion is admissible");
    ComponentSplit { union, induce_first, induce_second, restrict_first, restrict_second }
}
