/// Disjoint sets with path compression and union by size.
#[derive(Debug, Clone)]
pub struct UnionFind {
    parents: Vec<usize>,
    sizes: Vec<usize>,
}

impl UnionFind {
    pub fn new(size: usize) -> Self {
        Self { parents: (0..size).collect(), sizes: vec![1; size] }
    }

    pub fn find(&mut self, mut i: usize) -> usize {
        let mut root = i;
        while self.parents[root] != root {
            root = self.parents[root];
        }
        while i != root {
            let parent = self.parents[i];
            self.parents[i] = root;
            i = parent;
        }
        root
    }

    pub fn union(&mut self, i: usize, j: usize) -> bool {
        let (mut a, mut b) = (self.find(i), self.find(j));
        if a == b {
            return false;
        }
        if self.sizes[a] < self.sizes[b] {
            std::mem::swap(&mut a, &mut b);
        }
        self.parents[b] = a;
        self.sizes[a] += self.sizes[b];
        true
    }

    /// Component label per element, numbered by first appearance.
    pub fn labels(&mut self) -> Vec<usize> {
        let n = self.parents.len();
        let mut root_label = vec![usize::MAX; n];
        let mut next = 0;
        (0..n)
            .map(|i| {
                let r = self.find(i);
                if root_label[r] == usize::MAX {
                    root_label[r] = next;
                    next += 1;
                }
                root_label[r]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_follow_first_appearance() {
        let mut uf = UnionFind::new(6);
        uf.union(4, 1);
        uf.union(5, 0);
        assert!(!uf.union(0, 5));
        assert_eq!(uf.labels(), vec![0, 1, 2, 3, 1, 0]);
    }
}
