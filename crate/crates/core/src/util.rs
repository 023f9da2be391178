//! Small internal helpers shared across modules.

/// Union-find over `0..n` with path halving and union by size.
///
/// Class representatives are *not* canonical during merging; call
/// [`UnionFind::into_classes`] once all unions are done to obtain a stable
/// numbering in which classes are ordered by their least member.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
    }

    /// Collapse into a stable partition: `class_of[x]` numbers classes in
    /// order of their least element, `members[c]` lists each class sorted.
    pub fn into_classes(mut self) -> Partition {
        let n = self.parent.len();
        let mut class_of = vec![usize::MAX; n];
        let mut members: Vec<Vec<usize>> = Vec::new();
        for x in 0..n {
            let r = self.find(x);
            if class_of[r] == usize::MAX {
                class_of[r] = members.len();
                members.push(Vec::new());
            }
            let c = class_of[r];
            class_of[x] = c;
            members[c].push(x);
        }
        Partition { class_of, members }
    }
}

/// A partition of `0..n` with classes numbered by least element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub class_of: Vec<usize>,
    pub members: Vec<Vec<usize>>,
}

impl Partition {
    pub fn class_count(&self) -> usize {
        self.members.len()
    }

    /// Least element of each class, in class order.
    pub fn representatives(&self) -> Vec<usize> {
        self.members.iter().map(|m| m[0]).collect()
    }
}

/// Check that `map` is a bijection from `0..map.len()` onto `0..size`.
pub fn is_bijection(map: &[usize], size: usize) -> bool {
    if map.len() != size {
        return false;
    }
    let mut seen = vec![false; size];
    for &y in map {
        if y >= size || seen[y] {
            return false;
        }
        seen[y] = true;
    }
    true
}

/// Invert a bijection given as an image table.
pub fn invert_bijection(map: &[usize]) -> Vec<usize> {
    let mut inv = vec![usize::MAX; map.len()];
    for (x, &y) in map.iter().enumerate() {
        debug_assert!(inv[y] == usize::MAX, "not a bijection");
        inv[y] = x;
    }
    inv
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn union_find_classes_are_ordered_by_least_member() {
        let mut uf = UnionFind::new(6);
        uf.union(4, 1);
        uf.union(3, 5);
        let p = uf.into_classes();
        assert_eq!(p.class_count(), 4);
        assert_eq!(p.members[0], vec![0]);
        assert_eq!(p.members[1], vec![1, 4]);
        assert_eq!(p.members[2], vec![2]);
        assert_eq!(p.members[3], vec![3, 5]);
        assert_eq!(p.representatives(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn bijection_checks() {
        assert!(is_bijection(&[2, 0, 1], 3));
        assert!(!is_bijection(&[0, 0, 1], 3));
        assert!(!is_bijection(&[0, 1], 3));
        assert_eq!(invert_bijection(&[2, 0, 1]), vec![1, 2, 0]);
    }
}
