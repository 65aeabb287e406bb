use crate::divergence::DistanceMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Node of a [`Dendrogram`]: ids `0..n` are leaves, `n..2n-1` merges in
/// creation order.
pub type NodeId = usize;

#[derive(Clone, Debug, PartialEq)]
pub struct Merge<F> {
    pub left: NodeId,
    pub right: NodeId,
    /// Half the inter-cluster distance at which the merge happened.
    pub height: F,
    /// Number of leaves below this node.
    pub size: usize,
}

/// Binary merge tree with ultrametric heights.
#[derive(Clone, Debug, PartialEq)]
pub struct Dendrogram<F> {
    labels: Vec<String>,
    merges: Vec<Merge<F>>,
}

impl<F: Real> Dendrogram<F> {
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn merges(&self) -> &[Merge<F>] {
        &self.merges
    }

    pub fn leaf_count(&self) -> usize {
        self.labels.len()
    }

    pub fn root(&self) -> NodeId {
        self.labels.len() + self.merges.len() - 1
    }

    pub fn is_leaf(&self, node: NodeId) -> bool {
        node < self.labels.len()
    }

    pub fn height(&self, node: NodeId) -> F {
        if self.is_leaf(node) {
            F::zero()
        } else {
            self.merges[node - self.labels.len()].height
        }
    }

    pub fn children(&self, node: NodeId) -> Option<(NodeId, NodeId)> {
        (!self.is_leaf(node)).then(|| {
            let m = &self.merges[node - self.labels.len()];
            (m.left, m.right)
        })
    }

    /// Leaves in left-to-right drawing order.
    pub fn leaf_order(&self) -> Vec<NodeId> {
        let mut out = Vec::with_capacity(self.labels.len());
        let mut stack = vec![self.root()];
        while let Some(node) = stack.pop() {
            match self.children(node) {
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => out.push(node),
            }
        }
        out
    }

    /// Leaf sets of every internal node, indexed by merge step.
    pub fn clusters(&self) -> Vec<Vec<NodeId>> {
        let n = self.labels.len();
        let mut sets: Vec<Vec<NodeId>> = Vec::with_capacity(self.merges.len());
        for m in &self.merges {
            let get = |id: NodeId, sets: &Vec<Vec<NodeId>>| {
                if id < n {
                    vec![id]
                } else {
                    sets[id - n].clone()
                }
            };
            let mut s = get(m.left, &sets);
            s.extend(get(m.right, &sets));
            s.sort_unstable();
            sets.push(s);
        }
        sets
    }

    /// Leaf-to-leaf distances implied by the tree: twice the height of the
    /// lowest common ancestor.
    pub fn cophenetic(&self) -> DistanceMatrix<F> {
        let n = self.labels.len();
        let mut values = vec![F::zero(); n * n];
        let two = F::lit(2.0);
        for (m, merge) in self.merges.iter().enumerate() {
            let left = self.leaves_under(merge.left);
            let right = self.leaves_under(merge.right);
            let d = self.merges[m].height * two;
            for &a in &left {
                for &b in &right {
                    values[a * n + b] = d;
                    values[b * n + a] = d;
                }
            }
        }
        DistanceMatrix::new(self.labels.clone(), values).expect("cophenetic matrix is valid")
    }

    pub fn leaves_under(&self, node: NodeId) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            match self.children(x) {
                Some((l, r)) => {
                    stack.push(r);
                    stack.push(l);
                }
                None => out.push(x),
            }
        }
        out
    }

    /// Whether the leaves named in `group` form exactly one subtree.
    pub fn is_monophyletic(&self, group: &[&str]) -> bool {
        let mut ids: Vec<NodeId> = group
            .iter()
            .filter_map(|g| self.labels.iter().position(|l| l == g))
            .collect();
        if ids.len() != group.len() {
            return false;
        }
        ids.sort_unstable();
        ids.len() == 1 || self.clusters().contains(&ids)
    }
}

/// Average-linkage (UPGMA) clustering.
///
/// Repeatedly merges the closest pair of clusters, where the distance
/// between clusters is the mean of all cross-cluster leaf distances,
/// maintained with the size-weighted update
/// `d(A∪B, C) = (|A| d(A, C) + |B| d(B, C)) / (|A| + |B|)`.
/// Each cluster is ranked by its smallest leaf index; ties pick the
/// lexicographically smallest `(rank, rank)` pair and the lower-ranked
/// cluster becomes the left child.
pub fn upgma<F: Real>(matrix: &DistanceMatrix<F>) -> Result<Dendrogram<F>> {
    let n = matrix.len();
    if n < 2 {
        return Err(Error::InvalidMatrix(format!("need at least 2 labels, got {n}")));
    }
    let mut dist: Vec<F> = matrix.values().to_vec();
    // Slot `i` holds the cluster whose smallest leaf is `i`.
    let mut active = vec![true; n];
    let mut node = (0..n).collect::<Vec<NodeId>>();
    let mut size = vec![1usize; n];
    let mut nearest: Vec<Option<(usize, F)>> = (0..n).map(|i| row_nearest(&dist, &active, n, i)).collect();
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let (a, b, d) = (0..n)
            .filter(|&i| active[i])
            .filter_map(|i| nearest[i].map(|(j, d)| (i, j, d)))
            .fold(None, |best: Option<(usize, usize, F)>, cand| match best {
                Some(b) if b.2 <= cand.2 => Some(b),
                _ => Some(cand),
            })
            .expect("at least two active clusters");
        merges.push(Merge {
            left: node[a],
            right: node[b],
            height: d / F::lit(2.0),
            size: size[a] + size[b],
        });
        let (sa, sb) = (F::lit(size[a] as f64), F::lit(size[b] as f64));
        active[b] = false;
        for c in (0..n).filter(|&c| active[c] && c != a) {
            let merged = (sa * dist[a * n + c] + sb * dist[b * n + c]) / (sa + sb);
            dist[a * n + c] = merged;
            dist[c * n + a] = merged;
        }
        size[a] += size[b];
        node[a] = n + step;
        nearest[b] = None;
        for i in (0..n).filter(|&i| active[i]) {
            let stale = match nearest[i] {
                _ if i == a => true,
                Some((j, _)) => j == a || j == b,
                None => false,
            };
            if stale {
                nearest[i] = row_nearest(&dist, &active, n, i);
            } else if i < a {
                let da = dist[i * n + a];
                if let Some((j, dj)) = nearest[i] {
                    if da < dj || (da == dj && a < j) {
                        nearest[i] = Some((a, da));
                    }
                }
            }
        }
    }
    Ok(Dendrogram {
        labels: matrix.labels().to_vec(),
        merges,
    })
}

/// Closest active slot `j > i`, smallest `j` among ties.
fn row_nearest<F: Real>(dist: &[F], active: &[bool], n: usize, i: usize) -> Option<(usize, F)> {
    (i + 1..n)
        .filter(|&j| active[j])
        .map(|j| (j, dist[i * n + j]))
        .fold(None, |best, cand| match best {
            Some((_, d)) if d <= cand.1 => best,
            _ => Some(cand),
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix(labels: &[&str], rows: Vec<Vec<f64>>) -> DistanceMatrix<f64> {
        DistanceMatrix::from_rows(labels.iter().map(|s| s.to_string()).collect(), rows).unwrap()
    }

    #[test]
    fn two_leaves() {
        let t = upgma(&matrix(&["A", "B"], vec![vec![0.0, 4.0], vec![4.0, 0.0]])).unwrap();
        assert_eq!(t.merges(), [Merge { left: 0, right: 1, height: 2.0, size: 2 }]);
    }

    #[test]
    fn three_leaves_hand_run() {
        let t = upgma(&matrix(
            &["A", "B", "C"],
            vec![vec![0.0, 2.0, 8.0], vec![2.0, 0.0, 8.0], vec![8.0, 8.0, 0.0]],
        ))
        .unwrap();
        assert_eq!(t.merges()[0], Merge { left: 0, right: 1, height: 1.0, size: 2 });
        assert_eq!(t.merges()[1], Merge { left: 3, right: 2, height: 4.0, size: 3 });
        assert!(t.is_monophyletic(&["A", "B"]));
        assert!(!t.is_monophyletic(&["A", "C"]));
    }

    #[test]
    fn size_weighted_mean() {
        // AB merge first (1), then C joins at mean(d(A,C), d(B,C)) = 5,
        // D joins at mean(9, 9, 12) = 10.
        let t = upgma(&matrix(
            &["A", "B", "C", "D"],
            vec![
                vec![0.0, 1.0, 4.0, 9.0],
                vec![1.0, 0.0, 6.0, 9.0],
                vec![4.0, 6.0, 0.0, 12.0],
                vec![9.0, 9.0, 12.0, 0.0],
            ],
        ))
        .unwrap();
        let heights: Vec<f64> = t.merges().iter().map(|m| m.height).collect();
        assert_eq!(heights, [0.5, 2.5, 5.0]);
        assert_eq!(t.leaf_order(), [0, 1, 2, 3]);
        let c = t.cophenetic();
        assert_eq!(c.get(0, 2), 5.0);
        assert_eq!(c.get(3, 1), 10.0);
    }

    #[test]
    fn ties_pick_smallest_pair() {
        let t = upgma(&matrix(
            &["A", "B", "C", "D"],
            vec![
                vec![0.0, 3.0, 1.0, 1.0],
                vec![3.0, 0.0, 1.0, 3.0],
                vec![1.0, 1.0, 0.0, 3.0],
                vec![1.0, 3.0, 3.0, 0.0],
            ],
        ))
        .unwrap();
        assert_eq!((t.merges()[0].left, t.merges()[0].right), (0, 2));
    }

    #[test]
    fn rejects_single_label() {
        assert!(upgma(&matrix(&["A"], vec![vec![0.0]])).is_err());
    }
}
