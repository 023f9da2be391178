//! Small stock groupoids used by tests, samples and documentation.
//!
//! Naming of the recurring shapes: `E` is the empty groupoid
//! (`Groupoid::discrete(0)`), `1` the terminal one (`discrete(1)`),
//! `C2`/`C3`/... one-object cyclic groups, `S3` the one-object symmetric
//! group on three letters, `I = contractible(2)` the two-object groupoid
//! with a unique isomorphism in each direction, and `D2 = discrete(2)`.

use crate::groupoid::Groupoid;

/// Cyclic group of order `n` as a one-object groupoid. Morphism `k` is the
/// residue `k`; composition is addition mod `n`.
pub fn cyclic(n: usize) -> Groupoid {
    assert!(n > 0, "cyclic group needs positive order");
    let table: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
    Groupoid::from_group(&table).expect("cyclic table is a group")
}

/// Klein four-group as a one-object groupoid.
pub fn klein_four() -> Groupoid {
    let table = vec![
        vec![0, 1, 2, 3],
        vec![1, 0, 3, 2],
        vec![2, 3, 0, 1],
        vec![3, 2, 1, 0],
    ];
    Groupoid::from_group(&table).expect("klein table is a group")
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    permute(&mut items, 0, &mut out);
    out.sort();
    out
}

fn permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == items.len() {
        out.push(items.clone());
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, out);
        items.swap(k, i);
    }
}

/// Symmetric group on `n` letters as a one-object groupoid, together with
/// the permutation each morphism index denotes (lexicographic order, so
/// index 0 is the identity). Composition matches the groupoid convention:
/// `compose(g, f)` applies `f` first.
pub fn symmetric_with_perms(n: usize) -> (Groupoid, Vec<Vec<usize>>) {
    let perms = permutations(n);
    let index_of = |p: &Vec<usize>| perms.binary_search(p).expect("permutation listed");
    let table: Vec<Vec<usize>> = perms
        .iter()
        .map(|g| {
            perms
                .iter()
                .map(|f| {
                    let composite: Vec<usize> = (0..n).map(|i| g[f[i]]).collect();
                    index_of(&composite)
                })
                .collect()
        })
        .collect();
    let groupoid = Groupoid::from_group(&table).expect("permutation table is a group");
    (groupoid, perms)
}

/// Symmetric group on `n` letters as a one-object groupoid.
pub fn symmetric(n: usize) -> Groupoid {
    symmetric_with_perms(n).0
}

/// Contractible groupoid on `n` objects: exactly one morphism between any
/// ordered pair of objects. The morphism `a -> b` has index `a * n + b`.
pub fn contractible(n: usize) -> Groupoid {
    let mor = |a: usize, b: usize| a * n + b;
    let raw = crate::groupoid::RawGroupoid {
        object_count: n,
        mor_source: (0..n * n).map(|i| i / n).collect(),
        mor_target: (0..n * n).map(|i| i % n).collect(),
        identity: (0..n).map(|a| Some(mor(a, a))).collect(),
        composites: (0..n)
            .flat_map(|a| (0..n).flat_map(move |b| (0..n).map(move |c| (mor(b, c), mor(a, b), mor(a, c)))))
            .collect(),
    };
    Groupoid::validate(&raw).expect("contractible groupoid is valid")
}

/// Parity of a permutation (0 = even, 1 = odd), by counting inversions.
pub fn parity(perm: &[usize]) -> usize {
    let mut inv = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inv += 1;
            }
        }
    }
    inv % 2
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_three_has_expected_shape() {
        let (s3, perms) = symmetric_with_perms(3);
        assert_eq!(s3.morphism_count(), 6);
        assert_eq!(perms[0], vec![0, 1, 2]);
        assert_eq!(s3.identity(0), 0);
        // Oracle: compose by applying permutations directly.
        for g in 0..6 {
            for f in 0..6 {
                let c = s3.compose_unchecked(g, f);
                let expect: Vec<usize> = (0..3).map(|i| perms[g][perms[f][i]]).collect();
                assert_eq!(perms[c], expect);
            }
        }
    }

    #[test]
    fn parity_splits_s3_in_half() {
        let perms = permutations(3);
        let odd = perms.iter().filter(|p| parity(p) == 1).count();
        assert_eq!(odd, 3);
    }

    #[test]
    fn contractible_groupoid_is_connected_with_singleton_homs() {
        let i = contractible(2);
        assert_eq!(i.object_count(), 2);
        assert_eq!(i.morphism_count(), 4);
        for a in 0..2 {
            for b in 0..2 {
                assert_eq!(i.hom(a, b).len(), 1);
            }
        }
        assert_eq!(i.components().class_count(), 1);
    }

    #[test]
    fn cyclic_two_is_self_inverse() {
        let c2 = cyclic(2);
        assert_eq!(c2.inverse(1), 1);
        assert_eq!(c2.compose(1, 1), Some(0));
    }
}
