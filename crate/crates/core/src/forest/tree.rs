use super::params::ForestParams;
use super::split::{best_split, Samples};
use crate::rng::Rng64;
use crate::taxonomy::N_CLASSES;

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf {
        distribution: [f64; N_CLASSES],
    },
    /// `value <= threshold` goes left.
    Split {
        feature: usize,
        threshold: f32,
        left: usize,
        right: usize,
    },
}

/// Decision tree stored as a pre-order arena; node 0 is the root.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub(crate) nodes: Vec<Node>,
}

impl Tree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn root(&self) -> &Node {
        &self.nodes[0]
    }

    pub fn leaf(distribution: [f64; N_CLASSES]) -> Self {
        Tree {
            nodes: vec![Node::Leaf { distribution }],
        }
    }

    /// Class distribution of the leaf reached by `features`.
    #[inline]
    pub fn leaf_distribution(&self, features: &[f32]) -> &[f64; N_CLASSES] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { distribution } => return distribution,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    i = if features[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n, Node::Leaf { .. }))
            .count()
    }
}

fn distribution(counts: &[u64; N_CLASSES]) -> [f64; N_CLASSES] {
    let total: u64 = counts.iter().sum();
    let mut d = [0.0; N_CLASSES];
    for k in 0..N_CLASSES {
        d[k] = counts[k] as f64 / total as f64;
    }
    d
}

/// Draw `k` distinct features out of `n` by a partial Fisher-Yates pass,
/// returned in ascending order.
fn draw_features(rng: &mut Rng64, n: usize, k: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + rng.below_usize(n - i);
        pool.swap(i, j);
    }
    let mut subset = pool[..k].to_vec();
    subset.sort_unstable();
    subset
}

struct Grower<'a> {
    samples: Samples<'a>,
    params: ForestParams,
    rng: Rng64,
    nodes: Vec<Node>,
}

impl Grower<'_> {
    fn grow(&mut self, indices: Vec<usize>, depth: usize) -> usize {
        let counts = self.samples.counts(&indices);
        let id = self.nodes.len();
        let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
        let stop = pure
            || indices.len() < self.params.min_samples_split
            || self.params.max_depth.is_some_and(|d| depth >= d);
        if stop {
            self.nodes.push(Node::Leaf {
                distribution: distribution(&counts),
            });
            return id;
        }
        let features = draw_features(
            &mut self.rng,
            self.samples.n_features,
            self.params.features_per_split,
        );
        let Some(choice) = best_split(&self.samples, &indices, &features, &counts) else {
            self.nodes.push(Node::Leaf {
                distribution: distribution(&counts),
            });
            return id;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = indices
            .into_iter()
            .partition(|&i| self.samples.value(i, choice.feature) <= choice.threshold);

        self.nodes.push(Node::Split {
            feature: choice.feature,
            threshold: choice.threshold,
            left: 0,
            right: 0,
        });
        let left = self.grow(left_idx, depth + 1);
        let right = self.grow(right_idx, depth + 1);
        if let Node::Split {
            left: l, right: r, ..
        } = &mut self.nodes[id]
        {
            *l = left;
            *r = right;
        }
        id
    }
}

/// Grow one tree on the samples at `indices` (repeats allowed).
///
/// A node becomes a leaf holding its empirical class distribution when it
/// is pure, has fewer than `min_samples_split` samples, sits at
/// `max_depth`, or no drawn feature offers a positive Gini decrease.
/// Otherwise `features_per_split` distinct features are drawn from `rng`
/// and the node splits on the best of them. Growth is depth-first, left
/// child first, so the draw sequence is fixed.
///
/// Panics if `indices` is empty.
pub fn grow_tree(samples: &Samples<'_>, indices: Vec<usize>, params: &ForestParams, rng: Rng64) -> Tree {
    assert!(!indices.is_empty(), "cannot grow a tree from zero samples");
    let mut grower = Grower {
        samples: *samples,
        params: *params,
        rng,
        nodes: Vec::new(),
    };
    grower.grow(indices, 0);
    Tree {
        nodes: grower.nodes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_features(n: usize) -> ForestParams {
        ForestParams {
            features_per_split: n,
            ..ForestParams::default()
        }
    }

    #[test]
    fn single_sample_is_a_certain_leaf() {
        let x = [0.3, 0.7];
        let y = [6];
        let s = Samples::new(&x, &y, 2).unwrap();
        let t = grow_tree(&s, vec![0], &all_features(2), Rng64::new(1));
        let mut expect = [0.0; N_CLASSES];
        expect[6] = 1.0;
        assert_eq!(t, Tree::leaf(expect));
    }

    #[test]
    fn depth_zero_holds_priors() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [0, 0, 0, 1];
        let s = Samples::new(&x, &y, 1).unwrap();
        let params = ForestParams {
            max_depth: Some(0),
            features_per_split: 1,
            ..ForestParams::default()
        };
        let t = grow_tree(&s, vec![0, 1, 2, 3], &params, Rng64::new(0));
        let mut expect = [0.0; N_CLASSES];
        expect[0] = 0.75;
        expect[1] = 0.25;
        assert_eq!(t, Tree::leaf(expect));
    }

    #[test]
    fn lattice_xor_cannot_start() {
        // Every axis-aligned first split of the 2x2 lattice leaves both
        // halves at Gini 0.5, so the decrease is zero and the root stays a
        // leaf.
        let x = [0.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0];
        let y = [0, 0, 1, 1];
        let s = Samples::new(&x, &y, 2).unwrap();
        let t = grow_tree(&s, vec![0, 1, 2, 3], &all_features(2), Rng64::new(5));
        assert_eq!(t.depth(), 0);
    }

    #[test]
    fn jittered_xor_grows_two_levels() {
        // Class 0 on the main diagonal, class 1 on the anti-diagonal.
        let x = [0.1, 0.2, 0.9, 0.8, 0.2, 0.9, 0.8, 0.1];
        let y = [0, 0, 1, 1];
        let s = Samples::new(&x, &y, 2).unwrap();
        for seed in 0..8 {
            let t = grow_tree(&s, vec![0, 1, 2, 3], &all_features(2), Rng64::new(seed));
            assert!(t.depth() >= 2);
            for i in 0..4 {
                let d = t.leaf_distribution(&x[i * 2..i * 2 + 2]);
                assert_eq!(d[y[i] as usize], 1.0, "sample {i}");
            }
        }
    }

    #[test]
    fn leaves_are_normalized() {
        let mut rng = Rng64::new(77);
        let n = 200;
        let x: Vec<f32> = (0..n * 3).map(|_| rng.unit_f64() as f32).collect();
        let y: Vec<u8> = (0..n).map(|_| rng.below(8) as u8).collect();
        let s = Samples::new(&x, &y, 3).unwrap();
        let t = grow_tree(&s, (0..n).collect(), &all_features(3), Rng64::new(1));
        for node in t.nodes() {
            if let Node::Leaf { distribution } = node {
                assert!((distribution.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(distribution.iter().all(|&p| p >= 0.0));
            }
        }
        // distinct random features: a full tree memorizes the training set
        for i in 0..n {
            let d = t.leaf_distribution(&x[i * 3..i * 3 + 3]);
            assert_eq!(d[y[i] as usize], 1.0);
        }
    }

    #[test]
    fn drawn_features_are_distinct_and_sorted() {
        let mut rng = Rng64::new(3);
        for k in 1..=10 {
            let f = draw_features(&mut rng, 10, k);
            assert_eq!(f.len(), k);
            assert!(f.windows(2).all(|w| w[0] < w[1]));
        }
    }
}
