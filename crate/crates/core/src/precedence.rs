//! Ordered end-before-start precedence pairs with derived adjacency.

use crate::OpId;

/// A set of ordered pairs `(a, b)` meaning operation `a` must end before
/// operation `b` starts. Holds both the original problem edges and any
/// precedences learned during search; adjacency lists are kept sorted so
/// iteration order is deterministic.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PrecedenceSet {
    num_ops: usize,
    preds: Vec<Vec<OpId>>,
    succs: Vec<Vec<OpId>>,
    len: usize,
}

impl PrecedenceSet {
    /// Empty relation over `num_ops` operations.
    pub fn new(num_ops: usize) -> Self {
        PrecedenceSet {
            num_ops,
            preds: vec![Vec::new(); num_ops],
            succs: vec![Vec::new(); num_ops],
            len: 0,
        }
    }

    /// Builds the relation from explicit pairs. Duplicates are ignored.
    pub fn from_pairs(num_ops: usize, pairs: &[(OpId, OpId)]) -> Self {
        let mut set = PrecedenceSet::new(num_ops);
        for &(a, b) in pairs {
            set.insert(a, b);
        }
        set
    }

    /// Inserts one pair; returns false if it was already present.
    pub fn insert(&mut self, a: OpId, b: OpId) -> bool {
        debug_assert!(a < self.num_ops && b < self.num_ops);
        match self.succs[a].binary_search(&b) {
            Ok(_) => false,
            Err(pos) => {
                self.succs[a].insert(pos, b);
                let ppos = self.preds[b].binary_search(&a).unwrap_err();
                self.preds[b].insert(ppos, a);
                self.len += 1;
                true
            }
        }
    }

    /// New relation containing this one plus `extra` pairs.
    pub fn with_pairs(&self, extra: &[(OpId, OpId)]) -> Self {
        let mut set = self.clone();
        for &(a, b) in extra {
            set.insert(a, b);
        }
        set
    }

    pub fn contains(&self, a: OpId, b: OpId) -> bool {
        self.succs[a].binary_search(&b).is_ok()
    }

    pub fn preds_of(&self, o: OpId) -> &[OpId] {
        &self.preds[o]
    }

    pub fn succs_of(&self, o: OpId) -> &[OpId] {
        &self.succs[o]
    }

    pub fn num_ops(&self) -> usize {
        self.num_ops
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// All pairs in ascending `(a, b)` order.
    pub fn pairs(&self) -> Vec<(OpId, OpId)> {
        let mut out = Vec::with_capacity(self.len);
        for (a, succs) in self.succs.iter().enumerate() {
            for &b in succs {
                out.push((a, b));
            }
        }
        out
    }

    /// Topological order of all operations, or None if the relation is cyclic.
    /// Ties are broken by ascending operation id.
    pub fn topo_order(&self) -> Option<Vec<OpId>> {
        let mut indeg: Vec<usize> = (0..self.num_ops).map(|o| self.preds[o].len()).collect();
        let mut ready: Vec<OpId> = (0..self.num_ops).filter(|&o| indeg[o] == 0).collect();
        // min-id first for a stable order
        ready.sort_unstable_by(|a, b| b.cmp(a));
        let mut order = Vec::with_capacity(self.num_ops);
        while let Some(o) = ready.pop() {
            order.push(o);
            let mut newly = Vec::new();
            for &s in &self.succs[o] {
                indeg[s] -= 1;
                if indeg[s] == 0 {
                    newly.push(s);
                }
            }
            for s in newly {
                let pos = ready.binary_search_by(|x| s.cmp(x)).unwrap_err();
                ready.insert(pos, s);
            }
        }
        if order.len() == self.num_ops {
            Some(order)
        } else {
            None
        }
    }

    pub fn is_acyclic(&self) -> bool {
        self.topo_order().is_some()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn insert_dedups_and_sorts() {
        let mut set = PrecedenceSet::new(4);
        assert!(set.insert(2, 1));
        assert!(set.insert(0, 1));
        assert!(!set.insert(2, 1));
        assert_eq!(set.len(), 2);
        assert_eq!(set.preds_of(1), &[0, 2]);
        assert_eq!(set.pairs(), vec![(0, 1), (2, 1)]);
    }

    #[test]
    fn topo_detects_cycles() {
        let set = PrecedenceSet::from_pairs(3, &[(0, 1), (1, 2)]);
        assert_eq!(set.topo_order(), Some(vec![0, 1, 2]));
        let cyc = PrecedenceSet::from_pairs(2, &[(0, 1), (1, 0)]);
        assert!(cyc.topo_order().is_none());
    }

}
