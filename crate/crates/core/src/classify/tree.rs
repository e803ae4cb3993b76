//! CART classification trees with Gini splits on ordinal columns.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_leaf: usize,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { max_depth: 8, min_leaf: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum Node {
    Leaf { positive: u32, total: u32 },
    /// Rows with `x[column] <= threshold` go left.
    Split { column: usize, threshold: u32, left: usize, right: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

fn gini(pos: u32, total: u32) -> f64 {
    if total == 0 {
        return 0.0;
    }
    let p = f64::from(pos) / f64::from(total);
    2.0 * p * (1.0 - p)
}

struct Builder<'a> {
    rows: &'a [Vec<u32>],
    labels: &'a [bool],
    params: TreeParams,
    /// Columns tried per split; `None` tries all.
    mtry: Option<usize>,
    width: usize,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn build(&mut self, idx: &[usize], depth: usize, rng: &mut ChaCha8Rng) -> usize {
        let total = idx.len() as u32;
        let positive = idx.iter().filter(|&&i| self.labels[i]).count() as u32;
        let me = self.nodes.len();
        self.nodes.push(Node::Leaf { positive, total });
        if depth >= self.params.max_depth || positive == 0 || positive == total || idx.len() < 2 * self.params.min_leaf {
            return me;
        }
        let columns: Vec<usize> = match self.mtry {
            Some(m) if m < self.width => {
                let mut c = sample(rng, self.width, m).into_vec();
                c.sort_unstable();
                c
            }
            _ => (0..self.width).collect(),
        };
        let parent = gini(positive, total);
        let mut best: Option<(f64, usize, u32)> = None;
        for &c in &columns {
            let mut hist: BTreeMap<u32, (u32, u32)> = BTreeMap::new();
            for &i in idx {
                let e = hist.entry(self.rows[i][c]).or_default();
                e.1 += 1;
                if self.labels[i] {
                    e.0 += 1;
                }
            }
            let (mut lp, mut lt) = (0u32, 0u32);
            let values: Vec<(u32, (u32, u32))> = hist.into_iter().collect();
            for &(v, (p, t)) in &values[..values.len().saturating_sub(1)] {
                lp += p;
                lt += t;
                let rt = total - lt;
                if (lt as usize) < self.params.min_leaf || (rt as usize) < self.params.min_leaf {
                    continue;
                }
                let child = (f64::from(lt) * gini(lp, lt) + f64::from(rt) * gini(positive - lp, rt)) / f64::from(total);
                let gain = parent - child;
                if gain > 1e-12 && best.is_none_or(|b| gain > b.0) {
                    best = Some((gain, c, v));
                }
            }
        }
        let Some((_, column, threshold)) = best else { return me };
        let (l, r): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| self.rows[i][column] <= threshold);
        let left = self.build(&l, depth + 1, rng);
        let right = self.build(&r, depth + 1, rng);
        self.nodes[me] = Node::Split { column, threshold, left, right };
        me
    }
}

impl Tree {
    /// Fit on the rows listed in `idx` (repeats allowed, for bootstrap
    /// samples). With `mtry`, each split considers that many random columns.
    pub fn fit(
        rows: &[Vec<u32>],
        labels: &[bool],
        idx: &[usize],
        params: TreeParams,
        mtry: Option<usize>,
        rng: &mut ChaCha8Rng,
    ) -> Tree {
        let width = rows.first().map_or(0, Vec::len);
        let mut b = Builder { rows, labels, params, mtry, width, nodes: Vec::new() };
        b.build(idx, 0, rng);
        Tree { nodes: b.nodes }
    }

    fn leaf(&self, row: &[u32]) -> (u32, u32) {
        let mut at = 0;
        loop {
            match self.nodes[at] {
                Node::Leaf { positive, total } => return (positive, total),
                Node::Split { column, threshold, left, right } => {
                    at = if row[column] <= threshold { left } else { right };
                }
            }
        }
    }

    /// Positive fraction of the leaf `row` falls into.
    pub fn score(&self, row: &[u32]) -> f64 {
        let (p, t) = self.leaf(row);
        if t == 0 {
            0.0
        } else {
            f64::from(p) / f64::from(t)
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match nodes[at] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

/// Bootstrap sample of `n` indices drawn with replacement.
pub fn bootstrap(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn separable_data_is_split() {
        let rows: Vec<Vec<u32>> = (0..10).map(|i| vec![i % 5, u32::from(i >= 5)]).collect();
        let labels: Vec<bool> = (0..10).map(|i| i >= 5).collect();
        let idx: Vec<usize> = (0..10).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = Tree::fit(&rows, &labels, &idx, TreeParams::default(), None, &mut rng);
        assert_eq!(t.depth(), 1);
        assert_eq!(t.nodes[0], Node::Split { column: 1, threshold: 0, left: 1, right: 2 });
        assert_eq!(t.score(&[3, 1]), 1.0);
        assert_eq!(t.score(&[3, 0]), 0.0);
    }

    #[test]
    fn pure_node_is_a_leaf() {
        let rows = vec![vec![1], vec![2]];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let t = Tree::fit(&rows, &[true, true], &[0, 1], TreeParams::default(), None, &mut rng);
        assert_eq!(t.nodes, vec![Node::Leaf { positive: 2, total: 2 }]);
    }

    #[test]
    fn depth_and_leaf_size_limits() {
        let rows: Vec<Vec<u32>> = (0..64).map(|i| vec![i]).collect();
        let labels: Vec<bool> = (0..64).map(|i| i % 2 == 0).collect();
        let idx: Vec<usize> = (0..64).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let params = TreeParams { max_depth: 3, min_leaf: 2 };
        let t = Tree::fit(&rows, &labels, &idx, params, None, &mut rng);
        assert!(t.depth() <= 3);
        for n in &t.nodes {
            if let Node::Leaf { total, .. } = n {
                assert!(*total >= 2);
            }
        }
    }
}
