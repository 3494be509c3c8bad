//! PCA tree: recursive slicing along top principal directions.
//!
//! Each internal node centers its points, takes the top right singular
//! vector `v` of the centered matrix, and buckets the *uncentered* points by
//! ⌊⟨p, v⟩/θ⌋ with slab width θ = ε/(1000·k^1.5). Children receive the
//! components orthogonal to `v`, so directions along any root-to-leaf path
//! are pairwise orthogonal and squared slab gaps add up.
//!
//! Before splitting, a node whose top centered singular value falls below
//! λ_c = (ε/16)·√(s/k) is "de-clumped": with δ the smallest pairwise squared
//! distance, one ascending pass removes both endpoints of every surviving
//! pair at squared distance ≤ δ + ε²/2. Removed points drop out of the tree;
//! the model guarantees the planted neighbor is never among them.
//!
//! Queries descend with a residual query vector, entering every child slab
//! whose accumulated squared gap stays within (1 + ε/2)², and report the best
//! full-dimensional distance over the scanned leaves. If no leaf is reached,
//! a fallback walks the nearest-slab path and finally scans all leaves.

use crate::error::{Error, Result};
use crate::linalg::{center, dist_sq, dot, spectral_norm, svd, DenseMatrix};
use serde::Serialize;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Serialize)]
pub struct PcaTreeParams {
    pub k: usize,
    pub epsilon: f64,
    /// Node sizes at or below this become leaves (default: ambient dimension).
    pub stop_size: usize,
}

impl PcaTreeParams {
    pub fn new(k: usize, epsilon: f64, d: usize) -> Self {
        Self {
            k,
            epsilon,
            stop_size: d,
        }
    }

    /// Slab width θ = ε / (1000·k^1.5).
    pub fn theta(&self) -> f64 {
        self.epsilon / (1000.0 * (self.k as f64).powf(1.5))
    }

    /// De-clump threshold for a node of size `s`: (ε/16)·√(s/k).
    pub fn lambda_c(&self, s: usize) -> f64 {
        self.epsilon / 16.0 * (s as f64 / self.k as f64).sqrt()
    }
}

#[derive(Debug, Clone)]
pub enum Node {
    Internal {
        /// Unit vector the node splits along (in the node's residual space).
        direction: Vec<f64>,
        /// Mean of the node's residual points (the centering base).
        mean: Vec<f64>,
        /// Ids de-clumped at this node.
        removed: Vec<usize>,
        /// (slab key, child node index), ascending by key.
        children: Vec<(i64, usize)>,
    },
    Leaf {
        removed: Vec<usize>,
        ids: Vec<usize>,
    },
}

#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct TreeStats {
    /// Directions on the deepest root-to-leaf path.
    pub depth: usize,
    pub internal_count: usize,
    pub leaf_count: usize,
    pub removed_total: usize,
    /// Depth exceeded the expected 2k bound (hard error only at 4k).
    pub depth_warning: bool,
}

#[derive(Debug, Clone)]
pub struct PcaTree {
    pub params: PcaTreeParams,
    /// Node arena; index 0 is the root.
    pub nodes: Vec<Node>,
    pub stats: TreeStats,
    pub(crate) points: DenseMatrix,
}

#[derive(Debug, Clone, Copy)]
pub struct TreeQuery {
    pub id: usize,
    pub distance: f64,
    pub nodes_visited: usize,
    pub leaves_visited: usize,
    pub points_scanned: usize,
    /// True when the budgeted descent reached no leaf and a fallback ran.
    pub fallback: bool,
}

/// Largest |⟨p, v⟩|/θ we allow before the i64 slab key would lose precision.
const MAX_SLAB_KEY: f64 = 9.0e15;

pub fn build_tree(points: &DenseMatrix, params: &PcaTreeParams) -> Result<PcaTree> {
    if points.rows() == 0 || points.cols() == 0 {
        return Err(Error::InvalidParam("cannot build a tree on no points".into()));
    }
    if params.k == 0 {
        return Err(Error::InvalidParam("k must be positive".into()));
    }
    if !(params.epsilon > 0.0 && params.epsilon < 1.0) {
        return Err(Error::InvalidParam(format!(
            "epsilon = {}, need 0 < epsilon < 1",
            params.epsilon
        )));
    }
    if params.stop_size == 0 {
        return Err(Error::InvalidParam("stop_size must be positive".into()));
    }

    let entries: Vec<(usize, Vec<f64>)> = (0..points.rows())
        .map(|i| (i, points.row(i).to_vec()))
        .collect();
    let mut builder = Builder {
        params: params.clone(),
        nodes: Vec::new(),
        stats: TreeStats::default(),
        hard_cap: 4 * params.k,
    };
    builder.grow(entries, 0)?;
    let mut stats = builder.stats;
    stats.depth_warning = stats.depth > 2 * params.k;
    Ok(PcaTree {
        params: params.clone(),
        nodes: builder.nodes,
        stats,
        points: points.clone(),
    })
}

struct Builder {
    params: PcaTreeParams,
    nodes: Vec<Node>,
    stats: TreeStats,
    hard_cap: usize,
}

impl Builder {
    /// Builds the subtree for `entries` (id, residual vector), returns its
    /// node index. `depth` counts directions already applied on this path.
    fn grow(&mut self, entries: Vec<(usize, Vec<f64>)>, depth: usize) -> Result<usize> {
        self.stats.depth = self.stats.depth.max(depth);
        if entries.len() <= self.params.stop_size {
            return Ok(self.push_leaf(Vec::new(), entries));
        }

        let (survivors, removed) = self.declump(entries);
        self.stats.removed_total += removed.len();
        if survivors.len() <= self.params.stop_size {
            return Ok(self.push_leaf(removed, survivors));
        }

        if depth >= self.hard_cap {
            return Err(Error::DepthCap {
                depth,
                cap: self.hard_cap,
            });
        }

        let mat = DenseMatrix::from_rows(
            &survivors.iter().map(|(_, v)| v.clone()).collect::<Vec<_>>(),
        )?;
        let (centered, mean) = center(&mat);
        let decomp = svd(&centered)?;
        let direction = decomp.right_vectors.row(0).to_vec();

        let theta = self.params.theta();
        let mut buckets: BTreeMap<i64, Vec<(usize, Vec<f64>)>> = BTreeMap::new();
        for (id, vec) in survivors {
            let t = dot(&vec, &direction);
            let key_f = (t / theta).floor();
            if key_f.abs() > MAX_SLAB_KEY {
                return Err(Error::InvalidParam(format!(
                    "slab key overflow: |projection/theta| = {:.3e}",
                    key_f.abs()
                )));
            }
            let residual: Vec<f64> = vec
                .iter()
                .zip(&direction)
                .map(|(x, v)| x - t * v)
                .collect();
            buckets.entry(key_f as i64).or_default().push((id, residual));
        }

        // reserve the parent slot so the root stays at index 0
        let slot = self.nodes.len();
        self.nodes.push(Node::Leaf {
            removed: Vec::new(),
            ids: Vec::new(),
        });
        self.stats.internal_count += 1;

        let mut children = Vec::with_capacity(buckets.len());
        for (key, group) in buckets {
            let child = self.grow(group, depth + 1)?;
            children.push((key, child));
        }
        self.nodes[slot] = Node::Internal {
            direction,
            mean,
            removed: removed.into_iter().map(|(id, _)| id).collect(),
            children,
        };
        self.stats.depth = self.stats.depth.max(depth + 1);
        Ok(slot)
    }

    fn push_leaf(&mut self, removed: Vec<(usize, Vec<f64>)>, kept: Vec<(usize, Vec<f64>)>) -> usize {
        self.stats.leaf_count += 1;
        self.nodes.push(Node::Leaf {
            removed: removed.into_iter().map(|(id, _)| id).collect(),
            ids: kept.into_iter().map(|(id, _)| id).collect(),
        });
        self.nodes.len() - 1
    }

    /// When the node's centered spectrum is flat (top singular value below
    /// λ_c), removes both endpoints of every pair at squared distance
    /// ≤ δ + ε²/2 in a single ascending pass, δ being the smallest pairwise
    /// squared distance. Returns (survivors, removed).
    #[allow(clippy::type_complexity)]
    fn declump(
        &self,
        entries: Vec<(usize, Vec<f64>)>,
    ) -> (Vec<(usize, Vec<f64>)>, Vec<(usize, Vec<f64>)>) {
        let s = entries.len();
        if s < 2 {
            return (entries, Vec::new());
        }
        let mat = DenseMatrix::from_rows(
            &entries.iter().map(|(_, v)| v.clone()).collect::<Vec<_>>(),
        )
        .expect("node vectors share a dimension");
        let (centered, _) = center(&mat);
        let top = spectral_norm(&centered).expect("nonempty matrix");
        if top >= self.params.lambda_c(s) {
            return (entries, Vec::new());
        }

        let mut min_sq = f64::INFINITY;
        for i in 0..s {
            for j in (i + 1)..s {
                min_sq = min_sq.min(dist_sq(&entries[i].1, &entries[j].1));
            }
        }
        let cutoff = min_sq + self.params.epsilon * self.params.epsilon / 2.0;

        let mut gone = vec![false; s];
        for i in 0..s {
            if gone[i] {
                continue;
            }
            for j in (i + 1)..s {
                if gone[j] {
                    continue;
                }
                if dist_sq(&entries[i].1, &entries[j].1) <= cutoff {
                    gone[i] = true;
                    gone[j] = true;
                    break;
                }
            }
        }

        let mut survivors = Vec::new();
        let mut removed = Vec::new();
        for (flag, entry) in gone.into_iter().zip(entries) {
            if flag {
                removed.push(entry);
            } else {
                survivors.push(entry);
            }
        }
        (survivors, removed)
    }
}

pub fn query_tree(tree: &PcaTree, q: &[f64]) -> Result<TreeQuery> {
    if q.len() != tree.points.cols() {
        return Err(Error::DimMismatch {
            context: "tree query",
            expected: tree.points.cols(),
            got: q.len(),
        });
    }
    let budget = {
        let b = 1.0 + tree.params.epsilon / 2.0;
        b * b
    };
    let mut out = TreeQuery {
        id: 0,
        distance: f64::INFINITY,
        nodes_visited: 0,
        leaves_visited: 0,
        points_scanned: 0,
        fallback: false,
    };
    let mut best: Option<(f64, usize)> = None;
    descend(tree, 0, q, q.to_vec(), 0.0, budget, &mut best, &mut out);

    if best.is_none() {
        out.fallback = true;
        nearest_slab_walk(tree, q, &mut best, &mut out);
    }
    if best.is_none() {
        // every leaf on the walked path was empty; scan all leaves
        for node in &tree.nodes {
            if let Node::Leaf { ids, .. } = node {
                scan_ids(tree, ids, q, &mut best, &mut out);
            }
        }
    }

    let (d2, id) = best.ok_or(Error::EmptyIndex)?;
    out.id = id;
    out.distance = d2.sqrt();
    Ok(out)
}

fn consider(id: usize, d2: f64, best: &mut Option<(f64, usize)>) {
    let better = match best {
        None => true,
        Some((bd, bi)) => d2 < *bd || (d2 == *bd && id < *bi),
    };
    if better {
        *best = Some((d2, id));
    }
}

fn scan_ids(
    tree: &PcaTree,
    ids: &[usize],
    q: &[f64],
    best: &mut Option<(f64, usize)>,
    out: &mut TreeQuery,
) {
    for &id in ids {
        out.points_scanned += 1;
        consider(id, dist_sq(tree.points.row(id), q), best);
    }
}

#[allow(clippy::too_many_arguments)]
fn descend(
    tree: &PcaTree,
    node: usize,
    q: &[f64],
    residual: Vec<f64>,
    acc: f64,
    budget: f64,
    best: &mut Option<(f64, usize)>,
    out: &mut TreeQuery,
) {
    out.nodes_visited += 1;
    match &tree.nodes[node] {
        Node::Leaf { ids, .. } => {
            out.leaves_visited += 1;
            scan_ids(tree, ids, q, best, out);
        }
        Node::Internal {
            direction, children, ..
        } => {
            let theta = tree.params.theta();
            let t = dot(&residual, direction);
            let next: Vec<f64> = residual
                .iter()
                .zip(direction)
                .map(|(x, v)| x - t * v)
                .collect();
            for &(key, child) in children {
                let lo = theta * key as f64;
                let hi = theta * (key as f64 + 1.0);
                let gap = if t < lo {
                    lo - t
                } else if t > hi {
                    t - hi
                } else {
                    0.0
                };
                let a2 = acc + gap * gap;
                if a2 <= budget {
                    descend(tree, child, q, next.clone(), a2, budget, best, out);
                }
            }
        }
    }
}

/// Walks from the root always into the child with the smallest slab gap.
fn nearest_slab_walk(
    tree: &PcaTree,
    q: &[f64],
    best: &mut Option<(f64, usize)>,
    out: &mut TreeQuery,
) {
    let theta = tree.params.theta();
    let mut idx = 0usize;
    let mut residual = q.to_vec();
    loop {
        out.nodes_visited += 1;
        match &tree.nodes[idx] {
            Node::Leaf { ids, .. } => {
                out.leaves_visited += 1;
                scan_ids(tree, ids, q, best, out);
                return;
            }
            Node::Internal {
                direction, children, ..
            } => {
                let t = dot(&residual, direction);
                let (_, child) = children
                    .iter()
                    .map(|&(key, child)| {
                        let lo = theta * key as f64;
                        let hi = theta * (key as f64 + 1.0);
                        let gap = if t < lo {
                            lo - t
                        } else if t > hi {
                            t - hi
                        } else {
                            0.0
                        };
                        (gap, child)
                    })
                    .min_by(|a, b| a.partial_cmp(b).expect("finite gaps"))
                    .expect("internal nodes have children");
                residual = residual
                    .iter()
                    .zip(direction)
                    .map(|(x, v)| x - t * v)
                    .collect();
                idx = child;
            }
        }
    }
}

impl PcaTree {
    pub fn n(&self) -> usize {
        self.points.rows()
    }

    pub fn d(&self) -> usize {
        self.points.cols()
    }

    pub fn points(&self) -> &DenseMatrix {
        &self.points
    }

    /// All ids stored in leaves, ascending.
    pub fn leaf_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .nodes
            .iter()
            .filter_map(|n| match n {
                Node::Leaf { ids, .. } => Some(ids.iter().copied()),
                Node::Internal { .. } => None,
            })
            .flatten()
            .collect();
        ids.sort_unstable();
        ids
    }

    /// All de-clumped ids, ascending.
    pub fn removed_ids(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .nodes
            .iter()
            .flat_map(|n| match n {
                Node::Leaf { removed, .. } | Node::Internal { removed, .. } => {
                    removed.iter().copied()
                }
            })
            .collect();
        ids.sort_unstable();
        ids
    }

    /// Direction lists of every root-to-leaf path.
    pub fn direction_paths(&self) -> Vec<Vec<&[f64]>> {
        let mut paths = Vec::new();
        let mut stack: Vec<(usize, Vec<&[f64]>)> = vec![(0, Vec::new())];
        while let Some((idx, path)) = stack.pop() {
            match &self.nodes[idx] {
                Node::Leaf { .. } => paths.push(path),
                Node::Internal {
                    direction, children, ..
                } => {
                    for &(_, child) in children {
                        let mut next = path.clone();
                        next.push(direction.as_slice());
                        stack.push((child, next));
                    }
                }
            }
        }
        paths
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genmodel::{brute_force_nn, gen_planted, perturb_gaussian, Geometry};
    use crate::linalg::norm;

    fn partition_holds(tree: &PcaTree) {
        let mut ids = tree.leaf_ids();
        ids.extend(tree.removed_ids());
        ids.sort_unstable();
        assert_eq!(ids.len(), tree.n());
        for (i, &id) in ids.iter().enumerate() {
            assert_eq!(i, id);
        }
    }

    #[test]
    fn theta_and_lambda_formulas() {
        let p = PcaTreeParams::new(4, 0.16, 100);
        assert!((p.lambda_c(400) - 0.1).abs() < 1e-12);
        let p2 = PcaTreeParams::new(4, 0.3, 100);
        assert!((p2.theta() - 0.3 / 8000.0).abs() < 1e-15);
    }

    #[test]
    fn small_sets_become_a_single_exact_leaf() {
        let inst = gen_planted(30, 32, 3, 0.3, Geometry::RandomCluster, 3).unwrap();
        let tree = build_tree(&inst.points, &PcaTreeParams::new(3, 0.3, 32)).unwrap();
        assert_eq!(tree.nodes.len(), 1);
        assert_eq!(tree.stats.depth, 0);
        for trial in 0..20 {
            let noisy = perturb_gaussian(&inst, 0.0, false, trial).unwrap();
            let q = noisy.extra_query(trial).unwrap();
            let res = query_tree(&tree, &q).unwrap();
            let (bf, bf_dist) = brute_force_nn(&inst.points, &q).unwrap();
            assert_eq!(res.id, bf);
            assert!((res.distance - bf_dist).abs() < 1e-12);
        }
    }

    #[test]
    fn line_instance_splits_along_the_line() {
        // points t_i · u on a fixed line, spacing far above theta
        let u = {
            let mut v = vec![0.0; 6];
            for (i, x) in v.iter_mut().enumerate() {
                *x = (i as f64 + 1.0).sqrt();
            }
            let n = norm(&v);
            v.iter_mut().for_each(|x| *x /= n);
            v
        };
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| {
                let t = 1.0 + 0.07 * i as f64;
                u.iter().map(|x| t * x).collect()
            })
            .collect();
        let points = DenseMatrix::from_rows(&rows).unwrap();
        let tree = build_tree(&points, &PcaTreeParams::new(1, 0.3, 4)).unwrap();
        match &tree.nodes[0] {
            Node::Internal { direction, .. } => {
                assert!(dot(direction, &u).abs() > 1.0 - 1e-9, "split off the line");
            }
            Node::Leaf { .. } => panic!("40 points with stop_size 4 must split"),
        }
        partition_holds(&tree);
        let q: Vec<f64> = u.iter().map(|x| 2.31 * x).collect();
        let res = query_tree(&tree, &q).unwrap();
        assert_eq!(res.id, brute_force_nn(&points, &q).unwrap().0);
    }

    #[test]
    fn clumped_points_are_removed_in_pairs() {
        // five nearly identical points: flat spectrum, every pair within the
        // cutoff; the ascending pass removes (0,1) and (2,3) and keeps 4.
        let rows = vec![
            vec![0.0, 0.0],
            vec![0.01, 0.0],
            vec![0.0, 0.012],
            vec![0.013, 0.005],
            vec![0.002, 0.009],
        ];
        let points = DenseMatrix::from_rows(&rows).unwrap();
        let params = PcaTreeParams {
            k: 1,
            epsilon: 0.4,
            stop_size: 1,
        };
        let tree = build_tree(&points, &params).unwrap();
        assert_eq!(tree.removed_ids(), vec![0, 1, 2, 3]);
        assert_eq!(tree.leaf_ids(), vec![4]);
        partition_holds(&tree);
        let res = query_tree(&tree, &[0.0, 0.0]).unwrap();
        assert_eq!(res.id, 4);

        // even count: everything pairs off and the tree holds no points
        let all = DenseMatrix::from_rows(&rows[..4]).unwrap();
        let tree2 = build_tree(&all, &params).unwrap();
        assert!(tree2.leaf_ids().is_empty());
        assert_eq!(tree2.removed_ids(), vec![0, 1, 2, 3]);
        match query_tree(&tree2, &[0.0, 0.0]) {
            Err(Error::EmptyIndex) => {}
            other => panic!("expected EmptyIndex, got {other:?}"),
        }
    }

    #[test]
    fn budget_controls_which_slabs_are_entered() {
        // two-level handcrafted tree, epsilon = 0.2 so the budget is 1.21:
        // the reachable leaf sits behind gaps 0.6 and 0.9 (0.36+0.81 = 1.17),
        // the decoy leaf behind a 1.2 root gap (1.44, pruned).
        let params = PcaTreeParams {
            k: 1,
            epsilon: 0.2,
            stop_size: 1,
        };
        let theta = params.theta();
        assert!((theta - 2e-4).abs() < 1e-18);
        let b = vec![0.6001, 0.9001, 0.0];
        let a = vec![1.20005, 0.0, 0.0];
        let points = DenseMatrix::from_rows(&[b.clone(), a.clone()]).unwrap();
        let nodes = vec![
            Node::Internal {
                direction: vec![1.0, 0.0, 0.0],
                mean: vec![0.0; 3],
                removed: vec![],
                children: vec![(3000, 1), (6000, 3)],
            },
            Node::Internal {
                direction: vec![0.0, 1.0, 0.0],
                mean: vec![0.0; 3],
                removed: vec![],
                children: vec![(4500, 2)],
            },
            Node::Leaf {
                removed: vec![],
                ids: vec![0],
            },
            Node::Leaf {
                removed: vec![],
                ids: vec![1],
            },
        ];
        let tree = PcaTree {
            params,
            nodes,
            stats: TreeStats::default(),
            points,
        };

        // origin query: only the 1.17-cost leaf is reachable
        let res = query_tree(&tree, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(res.id, 0);
        assert_eq!(res.leaves_visited, 1);
        assert_eq!(res.points_scanned, 1);
        assert!(!res.fallback);

        // query inside the decoy slab reaches both leaves and picks the decoy
        let res2 = query_tree(&tree, &[1.20003, 0.0, 0.0]).unwrap();
        assert_eq!(res2.id, 1);
        assert_eq!(res2.leaves_visited, 2);

        // far-away query exceeds the budget everywhere and falls back
        let res3 = query_tree(&tree, &[50.0, 0.0, 0.0]).unwrap();
        assert!(res3.fallback);
        assert_eq!(res3.id, 1, "nearest-slab walk lands in the decoy leaf");
    }

    #[test]
    fn conforming_instances_keep_shallow_trees_and_exact_answers() {
        let (n, d, k, eps) = (400, 64, 3, 0.3);
        let lnn = (n as f64).ln();
        let sigma = 0.5
            * (eps / (k as f64 * lnn).sqrt())
                .min(eps / ((k as f64).sqrt() * (d as f64 * lnn).powf(0.25)));
        for seed in 0..5u64 {
            let inst = gen_planted(n, d, k, eps, Geometry::RandomCluster, seed).unwrap();
            let noisy = perturb_gaussian(&inst, sigma, false, seed ^ 0x5eed).unwrap();
            let tree = build_tree(&noisy.points, &PcaTreeParams::new(k, eps, d)).unwrap();
            assert!(tree.stats.depth <= 2 * k, "depth {}", tree.stats.depth);
            assert!(!tree.stats.depth_warning);
            assert!(!tree
                .removed_ids()
                .contains(&inst.planted_index));
            partition_holds(&tree);
            let res = query_tree(&tree, &noisy.query).unwrap();
            assert_eq!(res.id, inst.planted_index, "seed {seed}");
        }
    }

    #[test]
    fn path_directions_are_orthonormal() {
        let inst = gen_planted(300, 48, 4, 0.3, Geometry::RandomCluster, 21).unwrap();
        let noisy = perturb_gaussian(&inst, 0.01, false, 9).unwrap();
        let tree = build_tree(&noisy.points, &PcaTreeParams::new(4, 0.3, 16)).unwrap();
        let paths = tree.direction_paths();
        assert!(!paths.is_empty());
        for path in paths {
            for (i, u) in path.iter().enumerate() {
                assert!((norm(u) - 1.0).abs() <= 1e-9);
                for v in path.iter().skip(i + 1) {
                    assert!(dot(u, v).abs() <= 1e-8, "non-orthogonal path directions");
                }
            }
        }
        partition_holds(&tree);
    }

    #[test]
    fn bit_lattice_exceeds_hard_depth_cap() {
        // 64 points keyed by 6 bits with geometrically decaying axis scales:
        // every split peels one bit, needing depth 6, above the 4k = 4 cap.
        let rows: Vec<Vec<f64>> = (0..64u32)
            .map(|i| {
                (0..8)
                    .map(|j| {
                        if j < 6 && (i >> j) & 1 == 1 {
                            0.5f64.powi(j)
                        } else {
                            0.0
                        }
                    })
                    .collect()
            })
            .collect();
        let points = DenseMatrix::from_rows(&rows).unwrap();
        let params = PcaTreeParams {
            k: 1,
            epsilon: 0.3,
            stop_size: 1,
        };
        match build_tree(&points, &params) {
            Err(Error::DepthCap { cap: 4, .. }) => {}
            other => panic!("expected DepthCap, got {other:?}"),
        }
    }
}
