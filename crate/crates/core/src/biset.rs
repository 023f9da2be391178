//! Two-sided equivariant sets and their tensor composition.
//!
//! A [`BiSet`] over a pair of groupoids `(H, G)` assigns a finite set to
//! every pair of objects `(η, γ)`, with `G` acting covariantly on the
//! right index and `H` acting contravariantly on the left index, the two
//! actions commuting. The composition of two such modules glues pairs
//! along the shared middle base — a fiberwise coend computed by
//! union-find. [`compose_bisets`] keeps the gluing data around so that
//! structure maps (unitors, associator, induced maps of composites) can be
//! chased through classes explicitly rather than rebuilt from scratch.
//!
//! Admissibility — every column free as a one-sided action — is what makes
//! these modules behave like correspondences; [`BiSet::new`] enforces it,
//! while [`BiSet::new_relaxed`] merely records it, which the tests use to
//! probe the boundary.

use std::sync::Arc;

use thiserror::Error;

use crate::functor::{Functor, NatTrans};
use crate::groupoid::Groupoid;
use crate::gset::{FreeFailure, GSet, Variance};
use crate::util::{invert_bijection, is_bijection, Partition, UnionFind};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BiSetError {
    #[error("fiber or action tables have the wrong shape")]
    BadShape,
    #[error("identity at object {object} of the {side} base does not act as the identity")]
    IdentityActionBroken { side: &'static str, object: usize },
    #[error("{side} action not functorial at g={g}, f={f}")]
    NotFunctorial { side: &'static str, g: usize, f: usize },
    #[error("actions fail to commute at right morphism {g}, left morphism {h}")]
    ActionsDontCommute { g: usize, h: usize },
    #[error("column {column} is not free: {failure}")]
    NotAdmissible { column: usize, failure: FreeFailure },
    #[error("base groupoids do not match")]
    BaseMismatch,
    #[error("map not equivariant at morphism {morphism} on side {side}")]
    NotEquivariant { side: &'static str, morphism: usize },
    #[error("map is not fiberwise bijective")]
    NotBijective,
    #[error("induced map on composites is not constant on gluing classes")]
    IllDefined,
}

/// A finite two-sided action: left base `H` contravariant, right base `G`
/// covariant, commuting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BiSet {
    left: Arc<Groupoid>,
    right: Arc<Groupoid>,
    /// `fibers[η][γ]` is the size of the set at `(η, γ)`.
    fibers: Vec<Vec<usize>>,
    /// `g_action[g][η]`: for `g: γ → γ'`, table `fiber(η,γ) → fiber(η,γ')`.
    g_action: Vec<Vec<Vec<usize>>>,
    /// `h_action[h][γ]`: for `h: η̄ → η`, table `fiber(η,γ) → fiber(η̄,γ)`.
    h_action: Vec<Vec<Vec<usize>>>,
    admissible: bool,
}

impl BiSet {
    /// Validate and require admissibility.
    pub fn new(
        left: Arc<Groupoid>,
        right: Arc<Groupoid>,
        fibers: Vec<Vec<usize>>,
        g_action: Vec<Vec<Vec<usize>>>,
        h_action: Vec<Vec<Vec<usize>>>,
    ) -> Result<BiSet, BiSetError> {
        let x = BiSet::new_relaxed(left, right, fibers, g_action, h_action)?;
        if let Some((column, failure)) = x.admissibility_failure() {
            return Err(BiSetError::NotAdmissible { column, failure });
        }
        Ok(x)
    }

    /// Validate the action laws but tolerate inadmissible columns.
    pub fn new_relaxed(
        left: Arc<Groupoid>,
        right: Arc<Groupoid>,
        fibers: Vec<Vec<usize>>,
        g_action: Vec<Vec<Vec<usize>>>,
        h_action: Vec<Vec<Vec<usize>>>,
    ) -> Result<BiSet, BiSetError> {
        let (nh, ng) = (left.object_count(), right.object_count());
        if fibers.len() != nh
            || fibers.iter().any(|row| row.len() != ng)
            || g_action.len() != right.morphism_count()
            || h_action.len() != left.morphism_count()
        {
            return Err(BiSetError::BadShape);
        }
        for g in 0..right.morphism_count() {
            if g_action[g].len() != nh {
                return Err(BiSetError::BadShape);
            }
            let (from, to) = (right.source(g), right.target(g));
            for eta in 0..nh {
                if g_action[g][eta].len() != fibers[eta][from]
                    || g_action[g][eta].iter().any(|&y| y >= fibers[eta][to])
                {
                    return Err(BiSetError::BadShape);
                }
            }
        }
        for h in 0..left.morphism_count() {
            if h_action[h].len() != ng {
                return Err(BiSetError::BadShape);
            }
            let (from, to) = (left.source(h), left.target(h));
            for gamma in 0..ng {
                if h_action[h][gamma].len() != fibers[to][gamma]
                    || h_action[h][gamma].iter().any(|&y| y >= fibers[from][gamma])
                {
                    return Err(BiSetError::BadShape);
                }
            }
        }
        for gamma in 0..ng {
            let e = right.identity(gamma);
            for eta in 0..nh {
                if g_action[e][eta].iter().enumerate().any(|(x, &y)| x != y) {
                    return Err(BiSetError::IdentityActionBroken { side: "right", object: gamma });
                }
            }
        }
        for eta in 0..nh {
            let e = left.identity(eta);
            for gamma in 0..ng {
                if h_action[e][gamma].iter().enumerate().any(|(x, &y)| x != y) {
                    return Err(BiSetError::IdentityActionBroken { side: "left", object: eta });
                }
            }
        }
        for g2 in 0..right.morphism_count() {
            for g1 in 0..right.morphism_count() {
                let Some(g21) = right.compose(g2, g1) else { continue };
                for eta in 0..nh {
                    for x in 0..g_action[g21][eta].len() {
                        if g_action[g21][eta][x] != g_action[g2][eta][g_action[g1][eta][x]] {
                            return Err(BiSetError::NotFunctorial { side: "right", g: g2, f: g1 });
                        }
                    }
                }
            }
        }
        for h2 in 0..left.morphism_count() {
            for h1 in 0..left.morphism_count() {
                let Some(h21) = left.compose(h2, h1) else { continue };
                // Contravariance: act(h2 ∘ h1) = act(h1) ∘ act(h2).
                for gamma in 0..ng {
                    for x in 0..h_action[h21][gamma].len() {
                        if h_action[h21][gamma][x] != h_action[h1][gamma][h_action[h2][gamma][x]] {
                            return Err(BiSetError::NotFunctorial { side: "left", g: h2, f: h1 });
                        }
                    }
                }
            }
        }
        for g in 0..right.morphism_count() {
            let (gf, gt) = (right.source(g), right.target(g));
            for h in 0..left.morphism_count() {
                let (hf, ht) = (left.source(h), left.target(h));
                for x in 0..fibers[ht][gf] {
                    if h_action[h][gt][g_action[g][ht][x]] != g_action[g][hf][h_action[h][gf][x]] {
                        return Err(BiSetError::ActionsDontCommute { g, h });
                    }
                }
            }
        }
        let mut x = BiSet { left, right, fibers, g_action, h_action, admissible: false };
        x.admissible = x.admissibility_failure().is_none();
        Ok(x)
    }

    fn admissibility_failure(&self) -> Option<(usize, FreeFailure)> {
        (0..self.left.object_count())
            .find_map(|eta| self.column(eta).freeness_failure().map(|w| (eta, w)))
    }

    pub fn left(&self) -> &Arc<Groupoid> {
        &self.left
    }

    pub fn right(&self) -> &Arc<Groupoid> {
        &self.right
    }

    pub fn is_admissible(&self) -> bool {
        self.admissible
    }

    pub fn fiber(&self, eta: usize, gamma: usize) -> usize {
        self.fibers[eta][gamma]
    }

    pub fn element_count(&self) -> usize {
        self.fibers.iter().map(|row| row.iter().sum::<usize>()).sum()
    }

    /// Right action of `g: γ → γ'` on fiber `(η, γ)`.
    pub fn apply_right(&self, g: usize, eta: usize, x: usize) -> usize {
        self.g_action[g][eta][x]
    }

    /// Left action of `h: η̄ → η` on fiber `(η, γ)`, landing in `(η̄, γ)`.
    pub fn apply_left(&self, h: usize, gamma: usize, x: usize) -> usize {
        self.h_action[h][gamma][x]
    }

    /// Preimage under the left action of `h: η̄ → η`, i.e. the element of
    /// `(η, γ)` that `h` sends to the given element of `(η̄, γ)`.
    pub fn unapply_left(&self, h: usize, gamma: usize, x: usize) -> usize {
        invert_bijection(&self.h_action[h][gamma])[x]
    }

    /// Column at a fixed left object, as a one-sided covariant action of
    /// the right base.
    pub fn column(&self, eta: usize) -> GSet {
        let fibers = self.fibers[eta].clone();
        let action = (0..self.right.morphism_count())
            .map(|g| self.g_action[g][eta].clone())
            .collect();
        GSet::new(Arc::clone(&self.right), Variance::Covariant, fibers, action)
            .expect("column of a validated two-sided action is an action")
    }

    /// Global element numbering, row-major in `(η, γ)`.
    pub fn global_index(&self, eta: usize, gamma: usize, x: usize) -> usize {
        let mut acc = 0;
        for e in 0..eta {
            acc += self.fibers[e].iter().sum::<usize>();
        }
        acc += self.fibers[eta][..gamma].iter().sum::<usize>();
        acc + x
    }

    pub fn element_at(&self, mut global: usize) -> (usize, usize, usize) {
        for eta in 0..self.left.object_count() {
            for gamma in 0..self.right.object_count() {
                if global < self.fibers[eta][gamma] {
                    return (eta, gamma, global);
                }
                global -= self.fibers[eta][gamma];
            }
        }
        panic!("element index out of range");
    }

    /// Partition of the global elements under both actions jointly.
    pub fn element_components(&self) -> Partition {
        let mut uf = UnionFind::new(self.element_count());
        for g in 0..self.right.morphism_count() {
            let (from, to) = (self.right.source(g), self.right.target(g));
            for eta in 0..self.left.object_count() {
                for x in 0..self.fibers[eta][from] {
                    uf.union(
                        self.global_index(eta, from, x),
                        self.global_index(eta, to, self.g_action[g][eta][x]),
                    );
                }
            }
        }
        for h in 0..self.left.morphism_count() {
            let (from, to) = (self.left.source(h), self.left.target(h));
            for gamma in 0..self.right.object_count() {
                for x in 0..self.fibers[to][gamma] {
                    uf.union(
                        self.global_index(to, gamma, x),
                        self.global_index(from, gamma, self.h_action[h][gamma][x]),
                    );
                }
            }
        }
        uf.into_classes()
    }
}

/// The unit module over `G`: the fiber at `(γ', γ)` is `hom(γ' → γ)`, with
/// the right base postcomposing and the left base precomposing.
/// The action with no elements at all.
pub fn empty_biset(left: Arc<Groupoid>, right: Arc<Groupoid>) -> BiSet {
    let fibers = vec![vec![0; right.object_count()]; left.object_count()];
    let g_action =
        (0..right.morphism_count()).map(|_| vec![Vec::new(); left.object_count()]).collect();
    let h_action =
        (0..left.morphism_count()).map(|_| vec![Vec::new(); right.object_count()]).collect();
    BiSet::new(left, right, fibers, g_action, h_action).expect("the empty action is valid")
}

pub fn identity_biset(g: &Arc<Groupoid>) -> BiSet {
    let n = g.object_count();
    let homs: Vec<Vec<Vec<usize>>> =
        (0..n).map(|a| (0..n).map(|b| g.hom(a, b)).collect()).collect();
    let fibers: Vec<Vec<usize>> =
        homs.iter().map(|row| row.iter().map(|h| h.len()).collect()).collect();
    let pos = |a: usize, b: usize, m: usize| homs[a][b].binary_search(&m).expect("hom member");
    let g_action = (0..g.morphism_count())
        .map(|k| {
            let (from, to) = (g.source(k), g.target(k));
            (0..n)
                .map(|eta| {
                    homs[eta][from]
                        .iter()
                        .map(|&f| pos(eta, to, g.compose_unchecked(k, f)))
                        .collect()
                })
                .collect()
        })
        .collect();
    let h_action = (0..g.morphism_count())
        .map(|k| {
            let (from, to) = (g.source(k), g.target(k));
            (0..n)
                .map(|gamma| {
                    homs[to][gamma]
                        .iter()
                        .map(|&f| pos(from, gamma, g.compose_unchecked(f, k)))
                        .collect()
                })
                .collect()
        })
        .collect();
    BiSet::new(Arc::clone(g), Arc::clone(g), fibers, g_action, h_action)
        .expect("unit module is admissible")
}

/// The module of a functor `q: H → G`: fiber at `(η, γ)` is `hom(qη → γ)`,
/// the right base postcomposing and `H` precomposing through `q`.
pub fn module_of_functor(q: &Functor) -> BiSet {
    let (h, g) = (q.source(), q.target());
    let homs: Vec<Vec<Vec<usize>>> = (0..h.object_count())
        .map(|eta| (0..g.object_count()).map(|c| g.hom(q.apply_object(eta), c)).collect())
        .collect();
    let fibers: Vec<Vec<usize>> =
        homs.iter().map(|row| row.iter().map(|v| v.len()).collect()).collect();
    let pos =
        |eta: usize, c: usize, m: usize| homs[eta][c].binary_search(&m).expect("hom member");
    let g_action = (0..g.morphism_count())
        .map(|k| {
            let (from, to) = (g.source(k), g.target(k));
            (0..h.object_count())
                .map(|eta| {
                    homs[eta][from]
                        .iter()
                        .map(|&f| pos(eta, to, g.compose_unchecked(k, f)))
                        .collect()
                })
                .collect()
        })
        .collect();
    let h_action = (0..h.morphism_count())
        .map(|m| {
            let (from, to) = (h.source(m), h.target(m));
            let qm = q.apply_morphism(m);
            (0..g.object_count())
                .map(|gamma| {
                    homs[to][gamma]
                        .iter()
                        .map(|&f| pos(from, gamma, g.compose_unchecked(f, qm)))
                        .collect()
                })
                .collect()
        })
        .collect();
    BiSet::new(Arc::clone(h), Arc::clone(g), fibers, g_action, h_action)
        .expect("module of a functor is admissible")
}

/// A fiberwise map of two-sided actions over the same pair of bases,
/// commuting with both actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BisetMap {
    source: BiSet,
    target: BiSet,
    /// `components[η][γ]`: fiber map at `(η, γ)`.
    components: Vec<Vec<Vec<usize>>>,
}

impl BisetMap {
    pub fn new(
        source: BiSet,
        target: BiSet,
        components: Vec<Vec<Vec<usize>>>,
    ) -> Result<BisetMap, BiSetError> {
        if source.left != target.left || source.right != target.right {
            return Err(BiSetError::BaseMismatch);
        }
        let (nh, ng) = (source.left.object_count(), source.right.object_count());
        if components.len() != nh
            || components.iter().enumerate().any(|(eta, row)| {
                row.len() != ng
                    || row.iter().enumerate().any(|(gamma, f)| {
                        f.len() != source.fibers[eta][gamma]
                            || f.iter().any(|&y| y >= target.fibers[eta][gamma])
                    })
            })
        {
            return Err(BiSetError::BadShape);
        }
        for g in 0..source.right.morphism_count() {
            let (from, to) = (source.right.source(g), source.right.target(g));
            for eta in 0..nh {
                for x in 0..source.fibers[eta][from] {
                    if components[eta][to][source.g_action[g][eta][x]]
                        != target.g_action[g][eta][components[eta][from][x]]
                    {
                        return Err(BiSetError::NotEquivariant { side: "right", morphism: g });
                    }
                }
            }
        }
        for h in 0..source.left.morphism_count() {
            let (from, to) = (source.left.source(h), source.left.target(h));
            for gamma in 0..ng {
                for x in 0..source.fibers[to][gamma] {
                    if components[from][gamma][source.h_action[h][gamma][x]]
                        != target.h_action[h][gamma][components[to][gamma][x]]
                    {
                        return Err(BiSetError::NotEquivariant { side: "left", morphism: h });
                    }
                }
            }
        }
        Ok(BisetMap { source, target, components })
    }

    pub fn source(&self) -> &BiSet {
        &self.source
    }

    pub fn target(&self) -> &BiSet {
        &self.target
    }

    pub fn apply(&self, eta: usize, gamma: usize, x: usize) -> usize {
        self.components[eta][gamma][x]
    }

    pub fn is_bijective(&self) -> bool {
        self.components.iter().enumerate().all(|(eta, row)| {
            row.iter()
                .enumerate()
                .all(|(gamma, f)| is_bijection(f, self.target.fibers[eta][gamma]))
        })
    }

    /// Composite `self ∘ earlier` (apply `earlier` first).
    pub fn compose(&self, earlier: &BisetMap) -> Result<BisetMap, BiSetError> {
        if earlier.target != self.source {
            return Err(BiSetError::BaseMismatch);
        }
        let components = earlier
            .components
            .iter()
            .enumerate()
            .map(|(eta, row)| {
                row.iter()
                    .enumerate()
                    .map(|(gamma, f)| {
                        f.iter().map(|&x| self.components[eta][gamma][x]).collect()
                    })
                    .collect()
            })
            .collect();
        BisetMap::new(earlier.source.clone(), self.target.clone(), components)
    }
}

/// A fiberwise-bijective [`BisetMap`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BisetIso(BisetMap);

impl BisetIso {
    pub fn new(map: BisetMap) -> Result<BisetIso, BiSetError> {
        if !map.is_bijective() {
            return Err(BiSetError::NotBijective);
        }
        Ok(BisetIso(map))
    }

    pub fn identity(x: &BiSet) -> BisetIso {
        let components = x
            .fibers
            .iter()
            .map(|row| row.iter().map(|&n| (0..n).collect()).collect())
            .collect();
        BisetIso(
            BisetMap::new(x.clone(), x.clone(), components).expect("identity map is equivariant"),
        )
    }

    pub fn map(&self) -> &BisetMap {
        &self.0
    }

    pub fn source(&self) -> &BiSet {
        &self.0.source
    }

    pub fn target(&self) -> &BiSet {
        &self.0.target
    }

    pub fn apply(&self, eta: usize, gamma: usize, x: usize) -> usize {
        self.0.apply(eta, gamma, x)
    }

    pub fn inverse(&self) -> BisetIso {
        let components = self
            .0
            .components
            .iter()
            .map(|row| row.iter().map(|f| invert_bijection(f)).collect())
            .collect();
        BisetIso(
            BisetMap::new(self.0.target.clone(), self.0.source.clone(), components)
                .expect("inverse of an equivariant bijection is equivariant"),
        )
    }

    pub fn compose(&self, earlier: &BisetIso) -> Result<BisetIso, BiSetError> {
        BisetIso::new(self.0.compose(&earlier.0)?)
    }
}

/// A composite module together with its gluing data: for every result
/// fiber, the partition of middle-indexed pairs and one representative per
/// class.
#[derive(Debug, Clone)]
pub struct Composite {
    pub biset: BiSet,
    /// `coends[l][r]` glues the pairs contributing to result fiber `(l, r)`.
    coends: Vec<Vec<FiberCoend>>,
}

#[derive(Debug, Clone)]
struct FiberCoend {
    /// Class of each pair index (see [`FiberCoend::pair_index`]).
    class_of: Vec<usize>,
    /// Least pair per class, decoded.
    reps: Vec<(usize, usize, usize)>,
    /// Pair-space offset per middle object.
    offsets: Vec<usize>,
    /// Second-factor fiber size per middle object.
    y_sizes: Vec<usize>,
}

impl FiberCoend {
    fn pair_index(&self, gamma: usize, xe: usize, ye: usize) -> usize {
        self.offsets[gamma] + xe * self.y_sizes[gamma] + ye
    }

    fn decode(&self, mut p: usize) -> (usize, usize, usize) {
        let gamma = match self.offsets.binary_search(&p) {
            Ok(mut i) => {
                while i + 1 < self.offsets.len() && self.offsets[i + 1] == p {
                    i += 1;
                }
                i
            }
            Err(i) => i - 1,
        };
        p -= self.offsets[gamma];
        (gamma, p / self.y_sizes[gamma].max(1), p % self.y_sizes[gamma].max(1))
    }
}

impl Composite {
    /// Class of the pair `(x-element, y-element)` meeting at middle object
    /// `gamma`, inside result fiber `(l, r)`.
    pub fn class_of(&self, l: usize, r: usize, gamma: usize, xe: usize, ye: usize) -> usize {
        let c = &self.coends[l][r];
        c.class_of[c.pair_index(gamma, xe, ye)]
    }

    pub fn representative(&self, l: usize, r: usize, class: usize) -> (usize, usize, usize) {
        self.coends[l][r].reps[class]
    }

    /// Every pair in the given class, decoded.
    pub fn members(&self, l: usize, r: usize, class: usize) -> Vec<(usize, usize, usize)> {
        let c = &self.coends[l][r];
        (0..c.class_of.len())
            .filter(|&p| c.class_of[p] == class)
            .map(|p| c.decode(p))
            .collect()
    }
}

/// Tensor composition over the shared middle base: for `x` over `(G, F)`
/// and `y` over `(H, G)`, the result lives over `(H, F)` with fibers
/// `⊔_γ x(γ, φ) × y(η, γ)` glued along `(g·x, y) ~ (x, y·g)` — `g` acting
/// on `x` through the left (contravariant) structure and on `y` through
/// the right one.
pub fn compose_bisets_with_data(x: &BiSet, y: &BiSet) -> Result<Composite, BiSetError> {
    if x.left != y.right {
        return Err(BiSetError::BaseMismatch);
    }
    let middle = &x.left;
    let (h, f) = (Arc::clone(&y.left), Arc::clone(&x.right));
    let nm = middle.object_count();
    let mut coends: Vec<Vec<FiberCoend>> = Vec::with_capacity(h.object_count());
    for eta in 0..h.object_count() {
        let mut row = Vec::with_capacity(f.object_count());
        for phi in 0..f.object_count() {
            let y_sizes: Vec<usize> = (0..nm).map(|gamma| y.fibers[eta][gamma]).collect();
            let mut offsets = Vec::with_capacity(nm + 1);
            let mut acc = 0;
            for gamma in 0..nm {
                offsets.push(acc);
                acc += x.fibers[gamma][phi] * y_sizes[gamma];
            }
            offsets.push(acc);
            let stub = FiberCoend { class_of: Vec::new(), reps: Vec::new(), offsets, y_sizes };
            let mut uf = UnionFind::new(acc);
            for g in 0..middle.morphism_count() {
                let (from, to) = (middle.source(g), middle.target(g));
                for xe in 0..x.fibers[to][phi] {
                    for ye in 0..y.fibers[eta][from] {
                        uf.union(
                            stub.pair_index(from, x.h_action[g][phi][xe], ye),
                            stub.pair_index(to, xe, y.g_action[g][eta][ye]),
                        );
                    }
                }
            }
            let classes = uf.into_classes();
            let reps = classes.representatives().iter().map(|&p| stub.decode(p)).collect();
            row.push(FiberCoend { class_of: classes.class_of, reps, ..stub });
        }
        coends.push(row);
    }

    let fibers: Vec<Vec<usize>> = coends
        .iter()
        .map(|row| row.iter().map(|c| c.reps.len()).collect())
        .collect();

    // Build both actions from representatives, then confirm they are
    // constant across each whole class — the well-definedness of the glue.
    let mut g_action: Vec<Vec<Vec<usize>>> = Vec::with_capacity(f.morphism_count());
    for k in 0..f.morphism_count() {
        let (from, to) = (f.source(k), f.target(k));
        let mut per_eta = Vec::with_capacity(h.object_count());
        for eta in 0..h.object_count() {
            let mut table = vec![usize::MAX; fibers[eta][from]];
            for p in 0..coends[eta][from].class_of.len() {
                let (gamma, xe, ye) = coends[eta][from].decode(p);
                let cls = coends[eta][from].class_of[p];
                let img = {
                    let c = &coends[eta][to];
                    c.class_of[c.pair_index(gamma, x.g_action[k][gamma][xe], ye)]
                };
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
    let mut h_action: Vec<Vec<Vec<usize>>> = Vec::with_capacity(h.morphism_count());
    for m in 0..h.morphism_count() {
        let (from, to) = (h.source(m), h.target(m));
        let mut per_phi = Vec::with_capacity(f.object_count());
        for phi in 0..f.object_count() {
            let mut table = vec![usize::MAX; fibers[to][phi]];
            for p in 0..coends[to][phi].class_of.len() {
                let (gamma, xe, ye) = coends[to][phi].decode(p);
                let cls = coends[to][phi].class_of[p];
                let img = {
                    let c = &coends[from][phi];
                    c.class_of[c.pair_index(gamma, xe, y.h_action[m][gamma][ye])]
                };
                if table[cls] == usize::MAX {
                    table[cls] = img;
                } else if table[cls] != img {
                    return Err(BiSetError::IllDefined);
                }
            }
            per_phi.push(table);
        }
        h_action.push(per_phi);
    }

    let biset = BiSet::new_relaxed(h, f, fibers, g_action, h_action)?;
    if x.admissible && y.admissible {
        assert!(biset.admissible, "composite of admissible modules stays admissible");
    }
    Ok(Composite { biset, coends })
}

pub fn compose_bisets(x: &BiSet, y: &BiSet) -> Result<BiSet, BiSetError> {
    Ok(compose_bisets_with_data(x, y)?.biset)
}

/// The map a pair of fiberwise maps induces between composites, chased
/// through the gluing classes and checked to be constant on them.
pub fn induced_map_on_composites(
    fx: &BisetMap,
    fy: &BisetMap,
    source: &Composite,
    target: &Composite,
) -> Result<BisetMap, BiSetError> {
    let s = &source.biset;
    let mut components: Vec<Vec<Vec<usize>>> = Vec::with_capacity(s.left.object_count());
    for eta in 0..s.left.object_count() {
        let mut row = Vec::with_capacity(s.right.object_count());
        for phi in 0..s.right.object_count() {
            let coend = &source.coends[eta][phi];
            let mut table = vec![usize::MAX; s.fibers[eta][phi]];
            for p in 0..coend.class_of.len() {
                let (gamma, xe, ye) = coend.decode(p);
                let cls = coend.class_of[p];
                let img = target.class_of(
                    eta,
                    phi,
                    gamma,
                    fx.apply(gamma, phi, xe),
                    fy.apply(eta, gamma, ye),
                );
                if table[cls] == usize::MAX {
                    table[cls] = img;
                } else if table[cls] != img {
                    return Err(BiSetError::IllDefined);
                }
            }
            row.push(table);
        }
        components.push(row);
    }
    BisetMap::new(s.clone(), target.biset.clone(), components)
}

/// Left unitor: collapse `compose(x, identity_biset(H))` onto `x` by acting
/// with the glued arrow, for `x` over `(H, G)`.
pub fn left_unitor(x: &BiSet) -> Result<BisetIso, BiSetError> {
    let unit = identity_biset(&x.left);
    let composite = compose_bisets_with_data(x, &unit)?;
    let s = &composite.biset;
    let mut components: Vec<Vec<Vec<usize>>> = Vec::with_capacity(s.left.object_count());
    for eta in 0..s.left.object_count() {
        let mut row = Vec::with_capacity(s.right.object_count());
        for phi in 0..s.right.object_count() {
            let coend = &composite.coends[eta][phi];
            let mut table = vec![usize::MAX; s.fibers[eta][phi]];
            for p in 0..coend.class_of.len() {
                // Pair: x-element xe over middle object η̄, unit element =
                // position of an arrow η → η̄ acting on xe from the left.
                let (etabar, xe, ue) = coend.decode(p);
                let arrow = x.left.hom(eta, etabar)[ue];
                let img = x.h_action[arrow][phi][xe];
                let cls = coend.class_of[p];
                if table[cls] == usize::MAX {
                    table[cls] = img;
                } else if table[cls] != img {
                    return Err(BiSetError::IllDefined);
                }
            }
            row.push(table);
        }
        components.push(row);
    }
    BisetIso::new(BisetMap::new(s.clone(), x.clone(), components)?)
}

/// Right unitor: collapse `compose(identity_biset(G), x)` onto `x`, for `x`
/// over `(H, G)`.
pub fn right_unitor(x: &BiSet) -> Result<BisetIso, BiSetError> {
    let unit = identity_biset(&x.right);
    let composite = compose_bisets_with_data(&unit, x)?;
    let s = &composite.biset;
    let mut components: Vec<Vec<Vec<usize>>> = Vec::with_capacity(s.left.object_count());
    for eta in 0..s.left.object_count() {
        let mut row = Vec::with_capacity(s.right.object_count());
        for phi in 0..s.right.object_count() {
            let coend = &composite.coends[eta][phi];
            let mut table = vec![usize::MAX; s.fibers[eta][phi]];
            for p in 0..coend.class_of.len() {
                // Pair: unit element = arrow γ → φ, x-element xe at (η, γ).
                let (gamma, ue, xe) = coend.decode(p);
                let arrow = x.right.hom(gamma, phi)[ue];
                let img = x.g_action[arrow][eta][xe];
                let cls = coend.class_of[p];
                if table[cls] == usize::MAX {
                    table[cls] = img;
                } else if table[cls] != img {
                    return Err(BiSetError::IllDefined);
                }
            }
            row.push(table);
        }
        components.push(row);
    }
    BisetIso::new(BisetMap::new(s.clone(), x.clone(), components)?)
}

/// Associator from `compose(x, compose(y, z))` to
/// `compose(compose(x, y), z)`, chased through both gluing layers and
/// checked on every member of every class.
pub fn associator(x: &BiSet, y: &BiSet, z: &BiSet) -> Result<BisetIso, BiSetError> {
    let yz = compose_bisets_with_data(y, z)?;
    let source = compose_bisets_with_data(x, &yz.biset)?;
    let xy = compose_bisets_with_data(x, y)?;
    let target = compose_bisets_with_data(&xy.biset, z)?;
    let s = &source.biset;
    let mut components: Vec<Vec<Vec<usize>>> = Vec::with_capacity(s.left.object_count());
    for kappa in 0..s.left.object_count() {
        let mut row = Vec::with_capacity(s.right.object_count());
        for phi in 0..s.right.object_count() {
            let coend = &source.coends[kappa][phi];
            let mut table = vec![usize::MAX; s.fibers[kappa][phi]];
            for p in 0..coend.class_of.len() {
                let (gamma, xe, inner_class) = coend.decode(p);
                let cls = coend.class_of[p];
                for (eta, ye, ze) in yz.members(kappa, gamma, inner_class) {
                    let img = target.class_of(
                        kappa,
                        phi,
                        eta,
                        xy.class_of(eta, phi, gamma, xe, ye),
                        ze,
                    );
                    if table[cls] == usize::MAX {
                        table[cls] = img;
                    } else if table[cls] != img {
                        return Err(BiSetError::IllDefined);
                    }
                }
            }
            row.push(table);
        }
        components.push(row);
    }
    BisetIso::new(BisetMap::new(s.clone(), target.biset.clone(), components)?)
}

/// The map of modules a transformation `α: q' ⇒ q` induces,
/// `module_of_functor(q) → module_of_functor(q')`, by precomposing each
/// arrow with the component at its left object.
pub fn module_of_nattrans(alpha: &NatTrans) -> Result<BisetIso, BiSetError> {
    let (qp, q) = (alpha.from_functor(), alpha.to_functor());
    let source = module_of_functor(q);
    let target = module_of_functor(qp);
    let g = q.target();
    let components = (0..q.source().object_count())
        .map(|eta| {
            let comp = alpha.component(eta);
            (0..g.object_count())
                .map(|gamma| {
                    g.hom(q.apply_object(eta), gamma)
                        .iter()
                        .map(|&f| {
                            let precomposed = g.compose_unchecked(f, comp);
                            g.hom(qp.apply_object(eta), gamma)
                                .binary_search(&precomposed)
                                .expect("hom member")
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    BisetIso::new(BisetMap::new(source, target, components)?)
}

/// Search for a fiberwise equivariant bijection between two modules over
/// the same bases. Complete at small scale: element components are matched
/// by a label invariant with backtracking, and each candidate pairing is
/// grown by forced propagation from a seed.
pub fn find_isomorphism(x: &BiSet, y: &BiSet) -> Option<BisetIso> {
    if x.left != y.left || x.right != y.right {
        return None;
    }
    let label_multiset = |b: &BiSet, members: &[usize]| -> Vec<(usize, usize)> {
        let mut labels: Vec<(usize, usize)> = members
            .iter()
            .map(|&e| {
                let (eta, gamma, _) = b.element_at(e);
                (eta, gamma)
            })
            .collect();
        labels.sort_unstable();
        labels
    };
    let xparts = x.element_components();
    let yparts = y.element_components();
    if xparts.class_count() != yparts.class_count() {
        return None;
    }
    let xinv: Vec<Vec<(usize, usize)>> =
        xparts.members.iter().map(|m| label_multiset(x, m)).collect();
    let yinv: Vec<Vec<(usize, usize)>> =
        yparts.members.iter().map(|m| label_multiset(y, m)).collect();

    // image[global x-element] -> global y-element
    fn propagate(x: &BiSet, y: &BiSet, image: &mut Vec<Option<usize>>, seed: usize) -> bool {
        let mut stack = vec![seed];
        while let Some(a) = stack.pop() {
            let b = image[a].expect("stack elements are assigned");
            let (eta, gamma, xa) = x.element_at(a);
            let (beta, bgamma, yb) = y.element_at(b);
            if (eta, gamma) != (beta, bgamma) {
                return false;
            }
            for g in x.right.star(gamma) {
                let to = x.right.target(g);
                let a2 = x.global_index(eta, to, x.g_action[g][eta][xa]);
                let b2 = y.global_index(eta, to, y.g_action[g][eta][yb]);
                match image[a2] {
                    Some(existing) if existing != b2 => return false,
                    Some(_) => {}
                    None => {
                        image[a2] = Some(b2);
                        stack.push(a2);
                    }
                }
            }
            // Left arrows into η move the fiber contravariantly.
            for h in 0..x.left.morphism_count() {
                if x.left.target(h) != eta {
                    continue;
                }
                let from = x.left.source(h);
                let a2 = x.global_index(from, gamma, x.h_action[h][gamma][xa]);
                let b2 = y.global_index(from, gamma, y.h_action[h][gamma][yb]);
                match image[a2] {
                    Some(existing) if existing != b2 => return false,
                    Some(_) => {}
                    None => {
                        image[a2] = Some(b2);
                        stack.push(a2);
                    }
                }
            }
        }
        true
    }

    fn assign(
        x: &BiSet,
        y: &BiSet,
        xparts: &Partition,
        yparts: &Partition,
        xinv: &[Vec<(usize, usize)>],
        yinv: &[Vec<(usize, usize)>],
        next: usize,
        used: &mut Vec<bool>,
        image: &Vec<Option<usize>>,
    ) -> Option<Vec<Option<usize>>> {
        if next == xparts.class_count() {
            return Some(image.clone());
        }
        let seed = xparts.members[next][0];
        let (eta, gamma, _) = x.element_at(seed);
        for cand in 0..yparts.class_count() {
            if used[cand] || yinv[cand] != xinv[next] {
                continue;
            }
            for &b in &yparts.members[cand] {
                let (beta, bgamma, _) = y.element_at(b);
                if (beta, bgamma) != (eta, gamma) {
                    continue;
                }
                let mut attempt = image.clone();
                attempt[seed] = Some(b);
                if !propagate(x, y, &mut attempt, seed) {
                    continue;
                }
                // The propagation covers the whole component; require it to
                // fill the candidate component bijectively.
                let covered: std::collections::BTreeSet<usize> = xparts.members[next]
                    .iter()
                    .filter_map(|&e| attempt[e])
                    .collect();
                if covered.len() != yparts.members[cand].len() {
                    continue;
                }
                used[cand] = true;
                if let Some(done) =
                    assign(x, y, xparts, yparts, xinv, yinv, next + 1, used, &attempt)
                {
                    return Some(done);
                }
                used[cand] = false;
            }
            // Another component with the same invariant may still fit, so
            // keep scanning candidates.
        }
        None
    }

    let mut used = vec![false; yparts.class_count()];
    let image = vec![None; x.element_count()];
    let full = assign(x, y, &xparts, &yparts, &xinv, &yinv, 0, &mut used, &image)?;
    let mut components: Vec<Vec<Vec<usize>>> = x
        .fibers
        .iter()
        .map(|row| row.iter().map(|&n| vec![0; n]).collect())
        .collect();
    for (a, b) in full.iter().enumerate() {
        let (eta, gamma, xa) = x.element_at(a);
        let (_, _, yb) = y.element_at((*b)?);
        components[eta][gamma][xa] = yb;
    }
    BisetIso::new(BisetMap::new(x.clone(), y.clone(), components).ok()?).ok()
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
        // Map the generator to the least involution.
        let s3 = s3();
        let invol = (1..6).find(|&g| s3.compose_unchecked(g, g) == 0).unwrap();
        Functor::new(c2(), s3, vec![0], vec![0, invol]).unwrap()
    }

    #[test]
    fn unit_module_fiber_is_the_hom_set() {
        let u = identity_biset(&c2());
        assert_eq!(u.fiber(0, 0), 2);
        assert!(u.is_admissible());
        assert_eq!(u.element_components().class_count(), 1);
    }

    #[test]
    fn module_of_inclusion_is_admissible_with_full_fiber() {
        let m = module_of_functor(&inclusion_c2_s3());
        assert_eq!(m.fiber(0, 0), 6);
        assert!(m.is_admissible());
    }

    #[test]
    fn inadmissible_module_is_detected() {
        // One point, both bases C2, all actions trivial: the single column
        // is the one-point action, which is not free.
        let r = BiSet::new(
            c2(),
            c2(),
            vec![vec![1]],
            vec![vec![vec![0]], vec![vec![0]]],
            vec![vec![vec![0]], vec![vec![0]]],
        );
        assert!(matches!(r, Err(BiSetError::NotAdmissible { column: 0, .. })));
        let relaxed = BiSet::new_relaxed(
            c2(),
            c2(),
            vec![vec![1]],
            vec![vec![vec![0]], vec![vec![0]]],
            vec![vec![vec![0]], vec![vec![0]]],
        )
        .unwrap();
        assert!(!relaxed.is_admissible());
    }

    #[test]
    fn validation_rejects_non_commuting_actions() {
        // Three points over (C2, C2): both generators act by involutions,
        // but transposing 0,1 and transposing 1,2 do not commute.
        let r = BiSet::new_relaxed(
            c2(),
            c2(),
            vec![vec![3]],
            vec![vec![vec![0, 1, 2]], vec![vec![1, 0, 2]]],
            vec![vec![vec![0, 1, 2]], vec![vec![0, 2, 1]]],
        );
        assert!(matches!(r, Err(BiSetError::ActionsDontCommute { .. })));
    }

    #[test]
    fn unitors_collapse_both_unit_composites() {
        for x in [identity_biset(&c2()), module_of_functor(&inclusion_c2_s3())] {
            let lu = left_unitor(&x).unwrap();
            assert_eq!(lu.target(), &x);
            let ru = right_unitor(&x).unwrap();
            assert_eq!(ru.target(), &x);
        }
    }

    #[test]
    fn composing_with_the_unit_preserves_fiber_sizes() {
        let x = module_of_functor(&inclusion_c2_s3());
        let with_unit = compose_bisets(&x, &identity_biset(&c2())).unwrap();
        assert_eq!(with_unit.fiber(0, 0), x.fiber(0, 0));
    }

    #[test]
    fn modules_compose_like_their_functors() {
        let p = inclusion_c2_s3();
        let collapse = Functor::new(s3(), arc(Groupoid::discrete(1)), vec![0], vec![0; 6]).unwrap();
        let qp = Functor::compose(&collapse, &p).unwrap();
        let composite = compose_bisets(&module_of_functor(&collapse), &module_of_functor(&p)).unwrap();
        let direct = module_of_functor(&qp);
        assert_eq!(composite.fiber(0, 0), direct.fiber(0, 0));
        assert!(find_isomorphism(&composite, &direct).is_some());
    }

    #[test]
    fn transformation_induces_an_iso_of_modules() {
        // Conjugation: the identity functor of S3 twisted by an inner
        // automorphism has a transformation to the identity.
        let s3 = s3();
        let idf = Functor::identity(&s3);
        for g in 0..6 {
            let twist = Functor::new(
                Arc::clone(&s3),
                Arc::clone(&s3),
                vec![0],
                (0..6)
                    .map(|m| {
                        s3.compose_unchecked(
                            g,
                            s3.compose_unchecked(m, s3.inverse(g)),
                        )
                    })
                    .collect(),
            )
            .unwrap();
            let alpha = NatTrans::new(idf.clone(), twist, vec![g]).unwrap();
            let iso = module_of_nattrans(&alpha).unwrap();
            assert_eq!(iso.source().fiber(0, 0), 6);
        }
    }

    #[test]
    fn associator_holds_on_a_module_triple() {
        let p = inclusion_c2_s3();
        let x = module_of_functor(&p);
        let u = identity_biset(&s3());
        // x over (C2, S3); compose(u, x) needs u.left == x.right.
        let a = associator(&u, &x, &identity_biset(&c2())).unwrap();
        assert!(a.map().is_bijective());
    }

    #[test]
    fn twisted_unit_module_is_isomorphic_to_the_unit() {
        let u = identity_biset(&c2());
        // Relabel the fiber at (0,0) by the swap and conjugate every table.
        let swap = [1usize, 0];
        let twist = |t: &Vec<usize>| -> Vec<usize> {
            // conjugate: new[i] = swap(t(swap(i)))
            (0..2).map(|i| swap[t[swap[i]]]).collect()
        };
        let twisted = BiSet::new(
            c2(),
            c2(),
            vec![vec![2]],
            vec![
                vec![twist(&vec![0, 1])],
                vec![twist(&{
                    let u0 = identity_biset(&c2());
                    (0..2).map(|x| u0.apply_right(1, 0, x)).collect()
                })],
            ],
            vec![
                vec![twist(&vec![0, 1])],
                vec![twist(&{
                    let u0 = identity_biset(&c2());
                    (0..2).map(|x| u0.apply_left(1, 0, x)).collect()
                })],
            ],
        )
        .unwrap();
        let iso = find_isomorphism(&twisted, &u).expect("twist is an isomorphism");
        assert!(iso.map().is_bijective());
    }

    #[test]
    fn isomorphism_search_separates_different_stabilizers() {
        // Over (point, V4): two-point columns with different kernels are
        // not isomorphic even though every size matches.
        let v4 = arc(catalog::klein_four());
        let one = arc(Groupoid::discrete(1));
        let two_points = |fix: usize| {
            let tables: Vec<Vec<Vec<usize>>> = (0..4)
                .map(|g| {
                    vec![if g == 0 || g == fix { vec![0, 1] } else { vec![1, 0] }]
                })
                .collect();
            BiSet::new_relaxed(Arc::clone(&one), Arc::clone(&v4), vec![vec![2]], tables, vec![vec![vec![0, 1]]])
                .unwrap()
        };
        let xa = two_points(1);
        let xb = two_points(2);
        assert!(find_isomorphism(&xa, &xa.clone()).is_some());
        assert!(find_isomorphism(&xa, &xb).is_none());
    }

    #[test]
    fn element_components_split_disjoint_orbit_sums() {
        // Module of the inclusion has one component; doubling it gives two.
        let m = module_of_functor(&inclusion_c2_s3());
        assert_eq!(m.element_components().class_count(), 1);
        let doubled = BiSet::new(
            c2(),
            s3(),
            vec![vec![12]],
            (0..6)
                .map(|g| {
                    vec![(0..12)
                        .map(|x| {
                            let (half, i) = (x / 6, x % 6);
                            half * 6 + m.apply_right(g, 0, i)
                        })
                        .collect()]
                })
                .collect(),
            (0..2)
                .map(|h| {
                    vec![(0..12)
                        .map(|x| {
                            let (half, i) = (x / 6, x % 6);
                            half * 6 + m.apply_left(h, 0, i)
                        })
                        .collect()]
                })
                .collect(),
        )
        .unwrap();
        assert_eq!(doubled.element_components().class_count(), 2);
        let iso = find_isomorphism(&doubled, &doubled).unwrap();
        assert!(iso.map().is_bijective());
    }
}
