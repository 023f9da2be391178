//! Finite groupoids as explicit tables.
//!
//! A groupoid is stored densely: objects are `0..object_count`, morphisms
//! are `0..morphism_count` with source/target tables, each object names its
//! identity morphism, and composition is a flat table over composable
//! pairs. `compose(g, f)` means "first `f`, then `g`" and is defined exactly
//! when `target(f) == source(g)`.
//!
//! Construction goes through [`Groupoid::validate`], which checks totality,
//! unit laws, invertibility and associativity, deriving the inverse table
//! along the way. Associativity is verified by transport — cube the vertex
//! set of each connected block, then check that factoring through
//! connectors is bijective and composition-preserving — so validation
//! stays near-linear in the composition table even for the large
//! assembled groupoids built downstream. Code holding a `Groupoid` can
//! take the laws for granted.

use std::sync::Arc;

use thiserror::Error;

use crate::util::UnionFind;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupoidError {
    #[error("object index {object} out of range ({count} objects)")]
    ObjectOutOfRange { object: usize, count: usize },
    #[error("morphism index {morphism} out of range ({count} morphisms)")]
    MorphismOutOfRange { morphism: usize, count: usize },
    #[error("missing composite for composable pair g={g}, f={f}")]
    MissingComposite { g: usize, f: usize },
    #[error("composite declared for non-composable pair g={g}, f={f}")]
    NotComposable { g: usize, f: usize },
    #[error("duplicate composite declared for pair g={g}, f={f}")]
    DuplicateComposite { g: usize, f: usize },
    #[error("composite of g={g}, f={f} has wrong endpoints")]
    BadComposite { g: usize, f: usize },
    #[error("composition not associative at h={h}, g={g}, f={f}")]
    NonAssociative { h: usize, g: usize, f: usize },
    #[error("composition at g={g}, f={f} is inconsistent with any associative model")]
    NotTransportable { g: usize, f: usize },
    #[error("hom set ({a}, {b}) has the wrong size for its block")]
    HomSizeMismatch { a: usize, b: usize },
    #[error("object {object} has no identity morphism")]
    NoIdentity { object: usize },
    #[error("identity of object {object} fails the unit law on morphism {morphism}")]
    NotAUnit { object: usize, morphism: usize },
    #[error("morphism {morphism} has no two-sided inverse")]
    NoInverse { morphism: usize },
    #[error("multiplication table is not a group: {reason}")]
    NotAGroup { reason: String },
}

/// Unvalidated groupoid data, as read from a file or assembled by hand.
#[derive(Debug, Clone, Default)]
pub struct RawGroupoid {
    pub object_count: usize,
    pub mor_source: Vec<usize>,
    pub mor_target: Vec<usize>,
    /// Identity morphism per object; `None` marks a missing declaration.
    pub identity: Vec<Option<usize>>,
    /// Declared composites `(g, f, gf)` with `gf = g∘f`.
    pub composites: Vec<(usize, usize, usize)>,
}

/// A validated finite groupoid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Groupoid {
    object_count: usize,
    source: Vec<usize>,
    target: Vec<usize>,
    identity: Vec<usize>,
    /// Flat composition table, indexed `g * morphism_count + f`.
    compose: Vec<Option<usize>>,
    inverse: Vec<usize>,
}

impl Groupoid {
    /// Check the category and invertibility laws on raw tables and build
    /// the groupoid, deriving the inverse table along the way.
    pub fn validate(raw: &RawGroupoid) -> Result<Groupoid, GroupoidError> {
        let n = raw.object_count;
        let m = raw.mor_source.len();
        if raw.mor_target.len() != m {
            return Err(GroupoidError::NotAGroup {
                reason: "source and target tables differ in length".into(),
            });
        }
        for &o in raw.mor_source.iter().chain(raw.mor_target.iter()) {
            if o >= n {
                return Err(GroupoidError::ObjectOutOfRange { object: o, count: n });
            }
        }
        if raw.identity.len() != n {
            return Err(GroupoidError::NoIdentity {
                object: raw.identity.len().min(n),
            });
        }

        let mut compose = vec![None; m * m];
        for &(g, f, gf) in &raw.composites {
            for &x in &[g, f, gf] {
                if x >= m {
                    return Err(GroupoidError::MorphismOutOfRange { morphism: x, count: m });
                }
            }
            if raw.mor_target[f] != raw.mor_source[g] {
                return Err(GroupoidError::NotComposable { g, f });
            }
            let slot = &mut compose[g * m + f];
            if slot.is_some() {
                return Err(GroupoidError::DuplicateComposite { g, f });
            }
            if raw.mor_source[gf] != raw.mor_source[f] || raw.mor_target[gf] != raw.mor_target[g] {
                return Err(GroupoidError::BadComposite { g, f });
            }
            *slot = Some(gf);
        }
        // Totality over composable pairs.
        for g in 0..m {
            for f in 0..m {
                if raw.mor_target[f] == raw.mor_source[g] && compose[g * m + f].is_none() {
                    return Err(GroupoidError::MissingComposite { g, f });
                }
            }
        }

        let mut identity = Vec::with_capacity(n);
        for o in 0..n {
            let e = raw.identity[o].ok_or(GroupoidError::NoIdentity { object: o })?;
            if e >= m {
                return Err(GroupoidError::MorphismOutOfRange { morphism: e, count: m });
            }
            if raw.mor_source[e] != o || raw.mor_target[e] != o {
                return Err(GroupoidError::NotAUnit { object: o, morphism: e });
            }
            identity.push(e);
        }
        // Unit laws.
        for f in 0..m {
            let (s, t) = (raw.mor_source[f], raw.mor_target[f]);
            if compose[identity[t] * m + f] != Some(f) {
                return Err(GroupoidError::NotAUnit { object: t, morphism: f });
            }
            if compose[f * m + identity[s]] != Some(f) {
                return Err(GroupoidError::NotAUnit { object: s, morphism: f });
            }
        }

        let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
        for f in 0..m {
            out[raw.mor_source[f]].push(f);
        }

        // Two-sided inverses first; they do not depend on associativity
        // and the transport check below leans on them.
        let mut inverse = vec![usize::MAX; m];
        for f in 0..m {
            let (s, t) = (raw.mor_source[f], raw.mor_target[f]);
            let found = out[t].iter().copied().find(|&g| {
                raw.mor_target[g] == s
                    && compose[g * m + f] == Some(identity[s])
                    && compose[f * m + g] == Some(identity[t])
            });
            inverse[f] = found.ok_or(GroupoidError::NoInverse { morphism: f })?;
        }

        // Associativity by transport rather than by cubing the whole
        // table: within each connected block, cube only the base vertex
        // set, then factor every morphism through connectors and check
        // that factoring is bijective per hom set and respects
        // composition. That exhibits a composition-preserving bijection
        // onto the standard groupoid built from the vertex set, which is
        // associative; checking all triples directly would be hopeless
        // for the larger assembled groupoids downstream.
        let comp = |g: usize, f: usize| compose[g * m + f].unwrap();
        let mut factor = vec![usize::MAX; m];
        let mut visited = vec![false; n];
        for root in 0..n {
            if visited[root] {
                continue;
            }
            // Spread connectors root → object across the block.
            let mut connector = vec![usize::MAX; n];
            connector[root] = identity[root];
            visited[root] = true;
            let mut members = vec![root];
            let mut cursor = 0;
            while cursor < members.len() {
                let a = members[cursor];
                cursor += 1;
                for &f in &out[a] {
                    let b = raw.mor_target[f];
                    if !visited[b] {
                        visited[b] = true;
                        connector[b] = comp(f, connector[a]);
                        members.push(b);
                    }
                }
            }
            // Vertex set at the root, cubed.
            let vertex: Vec<usize> = out[root]
                .iter()
                .copied()
                .filter(|&v| raw.mor_target[v] == root)
                .collect();
            for &h in &vertex {
                for &g in &vertex {
                    let hg = comp(h, g);
                    for &f in &vertex {
                        if comp(h, comp(g, f)) != comp(hg, f) {
                            return Err(GroupoidError::NonAssociative { h, g, f });
                        }
                    }
                }
            }
            // Factor each morphism of the block and check the factors
            // fill each hom set exactly once.
            let mut seen: std::collections::HashSet<(usize, usize, usize)> =
                std::collections::HashSet::new();
            let mut hom_count: std::collections::HashMap<(usize, usize), usize> =
                std::collections::HashMap::new();
            for &a in &members {
                for &f in &out[a] {
                    let b = raw.mor_target[f];
                    let k = comp(inverse[connector[b]], comp(f, connector[a]));
                    factor[f] = k;
                    if !seen.insert((a, b, k)) {
                        return Err(GroupoidError::NotTransportable { g: f, f });
                    }
                    *hom_count.entry((a, b)).or_insert(0) += 1;
                }
            }
            for &a in &members {
                for &b in &members {
                    if hom_count.get(&(a, b)).copied().unwrap_or(0) != vertex.len() {
                        return Err(GroupoidError::HomSizeMismatch { a, b });
                    }
                }
            }
        }
        // The factoring must turn composition into vertex multiplication.
        for f in 0..m {
            for &g in &out[raw.mor_target[f]] {
                if factor[comp(g, f)] != comp(factor[g], factor[f]) {
                    return Err(GroupoidError::NotTransportable { g, f });
                }
            }
        }

        Ok(Groupoid {
            object_count: n,
            source: raw.mor_source.clone(),
            target: raw.mor_target.clone(),
            identity,
            compose,
            inverse,
        })
    }

    /// Groupoid with `n` objects and only identity morphisms.
    pub fn discrete(n: usize) -> Groupoid {
        let raw = RawGroupoid {
            object_count: n,
            mor_source: (0..n).collect(),
            mor_target: (0..n).collect(),
            identity: (0..n).map(Some).collect(),
            composites: (0..n).map(|i| (i, i, i)).collect(),
        };
        Groupoid::validate(&raw).expect("discrete groupoid is always valid")
    }

    /// One-object groupoid from a group multiplication table;
    /// `table[a][b]` is the product "first `b`, then `a`".
    pub fn from_group(table: &[Vec<usize>]) -> Result<Groupoid, GroupoidError> {
        let k = table.len();
        if k == 0 {
            return Err(GroupoidError::NotAGroup {
                reason: "empty multiplication table".into(),
            });
        }
        if table.iter().any(|row| row.len() != k) {
            return Err(GroupoidError::NotAGroup {
                reason: "table is not square".into(),
            });
        }
        if table
            .iter()
            .any(|row| row.iter().any(|&x| x >= k))
        {
            return Err(GroupoidError::NotAGroup {
                reason: "entry out of range".into(),
            });
        }
        let e = (0..k)
            .find(|&e| (0..k).all(|a| table[e][a] == a && table[a][e] == a))
            .ok_or_else(|| GroupoidError::NotAGroup {
                reason: "no two-sided identity".into(),
            })?;
        for a in 0..k {
            if !(0..k).any(|b| table[a][b] == e && table[b][a] == e) {
                return Err(GroupoidError::NotAGroup {
                    reason: format!("element {a} has no inverse"),
                });
            }
        }
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(GroupoidError::NotAGroup {
                            reason: format!("not associative at ({a}, {b}, {c})"),
                        });
                    }
                }
            }
        }
        let raw = RawGroupoid {
            object_count: 1,
            mor_source: vec![0; k],
            mor_target: vec![0; k],
            identity: vec![Some(e)],
            composites: (0..k)
                .flat_map(|g| (0..k).map(move |f| (g, f, 0)))
                .map(|(g, f, _)| (g, f, table[g][f]))
                .collect(),
        };
        Groupoid::validate(&raw)
    }

    pub fn object_count(&self) -> usize {
        self.object_count
    }

    pub fn morphism_count(&self) -> usize {
        self.source.len()
    }

    pub fn is_empty(&self) -> bool {
        self.object_count == 0
    }

    pub fn source(&self, f: usize) -> usize {
        self.source[f]
    }

    pub fn target(&self, f: usize) -> usize {
        self.target[f]
    }

    pub fn identity(&self, o: usize) -> usize {
        self.identity[o]
    }

    pub fn inverse(&self, f: usize) -> usize {
        self.inverse[f]
    }

    /// `g∘f` ("first `f`, then `g`"); defined iff `target(f) == source(g)`.
    pub fn compose(&self, g: usize, f: usize) -> Option<usize> {
        self.compose[g * self.morphism_count() + f]
    }

    /// `g∘f` for a pair known to be composable.
    pub fn compose_unchecked(&self, g: usize, f: usize) -> usize {
        self.compose(g, f).expect("pair not composable")
    }

    /// All morphisms from `a` to `b`, in index order.
    pub fn hom(&self, a: usize, b: usize) -> Vec<usize> {
        (0..self.morphism_count())
            .filter(|&f| self.source[f] == a && self.target[f] == b)
            .collect()
    }

    /// All morphisms with source `a`, in index order.
    pub fn star(&self, a: usize) -> Vec<usize> {
        (0..self.morphism_count())
            .filter(|&f| self.source[f] == a)
            .collect()
    }

    /// Same tables with all arrows reversed. An exact involution:
    /// `g.opposite().opposite() == g`.
    pub fn opposite(&self) -> Groupoid {
        let m = self.morphism_count();
        let mut compose = vec![None; m * m];
        for g in 0..m {
            for f in 0..m {
                compose[g * m + f] = self.compose[f * m + g];
            }
        }
        Groupoid {
            object_count: self.object_count,
            source: self.target.clone(),
            target: self.source.clone(),
            identity: self.identity.clone(),
            compose,
            inverse: self.inverse.clone(),
        }
    }

    /// Product groupoid: objects are pairs `(a, b)` indexed `a * |B_0| + b`,
    /// morphisms are pairs composed componentwise.
    pub fn product(a: &Groupoid, b: &Groupoid) -> Groupoid {
        let (na, nb) = (a.object_count, b.object_count);
        let (ma, mb) = (a.morphism_count(), b.morphism_count());
        let obj = |x: usize, y: usize| x * nb + y;
        let mor = |x: usize, y: usize| x * mb + y;
        let mut raw = RawGroupoid {
            object_count: na * nb,
            mor_source: Vec::with_capacity(ma * mb),
            mor_target: Vec::with_capacity(ma * mb),
            identity: vec![None; na * nb],
            composites: Vec::new(),
        };
        for fa in 0..ma {
            for fb in 0..mb {
                raw.mor_source.push(obj(a.source[fa], b.source[fb]));
                raw.mor_target.push(obj(a.target[fa], b.target[fb]));
            }
        }
        for x in 0..na {
            for y in 0..nb {
                raw.identity[obj(x, y)] = Some(mor(a.identity[x], b.identity[y]));
            }
        }
        for ga in 0..ma {
            for fa in 0..ma {
                let Some(ca) = a.compose(ga, fa) else { continue };
                for gb in 0..mb {
                    for fb in 0..mb {
                        if let Some(cb) = b.compose(gb, fb) {
                            raw.composites.push((mor(ga, gb), mor(fa, fb), mor(ca, cb)));
                        }
                    }
                }
            }
        }
        Groupoid::validate(&raw).expect("product of valid groupoids is valid")
    }

    /// Partition of the objects into connected components.
    pub fn components(&self) -> crate::util::Partition {
        let mut uf = UnionFind::new(self.object_count);
        for f in 0..self.morphism_count() {
            uf.union(self.source[f], self.target[f]);
        }
        uf.into_classes()
    }

    /// Automorphism group of an object: all endomorphisms at `o` (each is
    /// invertible), in index order.
    pub fn vertex_group(&self, o: usize) -> Vec<usize> {
        self.hom(o, o)
    }
}

/// Convenience constructor used throughout tests and samples.
pub fn arc(g: Groupoid) -> Arc<Groupoid> {
    Arc::new(g)
}
