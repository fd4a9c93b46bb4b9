//! The multiplicity function on the image of a loop and its level partition.
//!
//! Samples are grouped into image clusters by single linkage at `eps_image`. The
//! members of a cluster split into branches, maximal cyclic runs of consecutive
//! samples; `δ` counts branches, so consecutive samples near one point of passage
//! count once.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::curve::LoopImmersion;
use crate::linalg::{dist, dist2};
use crate::spatial::{cyclic_runs, PointGrid};
use crate::unionfind::UnionFind;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum MultiplicityError {
    #[error(
        "ambiguous image clustering at eps_image = {eps_image}: samples {a} and {b} are {distance:.3e} apart \
         but fall in different clusters; use a smaller eps_image or finer sampling"
    )]
    Ambiguous { eps_image: f64, a: usize, b: usize, distance: f64 },
    #[error(
        "image cluster around sample {sample} spreads {spread:.3e} from its representative, more than \
         eps_image = {eps_image}; use a smaller eps_image or coarser sampling"
    )]
    Spread { eps_image: f64, sample: usize, spread: f64 },
    #[error("eps_image must be positive")]
    BadTolerance,
    #[error("label vector has length {found}, expected {expected}")]
    Labels { found: usize, expected: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    /// Centroid of the members.
    pub rep: Vec<f64>,
    /// Sorted sample indices.
    pub members: Vec<usize>,
    /// Maximal cyclic runs `(first, last)` of members, sorted by first index.
    pub branches: Vec<(usize, usize)>,
}

/// Discrete image of a loop: clusters of samples plus the adjacency induced by edges.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ImageGraph {
    pub m: usize,
    pub clusters: Vec<Cluster>,
    /// Cluster index of every sample.
    pub cluster_of: Vec<usize>,
    /// Unordered cluster pairs `(a, b)`, `a < b`, joined by a loop edge.
    pub adjacency: BTreeSet<(usize, usize)>,
}

impl ImageGraph {
    /// Builds the graph from explicit cluster labels; labels are renumbered by first
    /// appearance and no geometric checks are made.
    pub fn from_assignment(curve: &LoopImmersion, labels: &[usize]) -> Result<Self, MultiplicityError> {
        if labels.len() != curve.len() {
            return Err(MultiplicityError::Labels { found: labels.len(), expected: curve.len() });
        }
        let mut uf = UnionFind::new(labels.len());
        let mut first_with_label = std::collections::HashMap::new();
        for (k, &l) in labels.iter().enumerate() {
            let first = *first_with_label.entry(l).or_insert(k);
            uf.union(first, k);
        }
        Ok(Self::from_labels(curve, &uf.labels()))
    }

    /// `labels` must be numbered by first appearance.
    fn from_labels(curve: &LoopImmersion, labels: &[usize]) -> Self {
        let m = curve.len();
        let n_clusters = labels.iter().copied().max().map_or(0, |x| x + 1);
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); n_clusters];
        for (k, &l) in labels.iter().enumerate() {
            members[l].push(k);
        }
        let clusters = members
            .into_iter()
            .map(|mem| {
                let mut rep = vec![0.0; curve.dim()];
                for &k in &mem {
                    for (r, x) in rep.iter_mut().zip(curve.point(k)) {
                        *r += x;
                    }
                }
                rep.iter_mut().for_each(|r| *r /= mem.len() as f64);
                let branches = cyclic_runs(&mem, m);
                Cluster { rep, members: mem, branches }
            })
            .collect();
        let mut adjacency = BTreeSet::new();
        for k in 0..m {
            let (a, b) = (labels[k], labels[(k + 1) % m]);
            if a != b {
                adjacency.insert((a.min(b), a.max(b)));
            }
        }
        Self { m, clusters, cluster_of: labels.to_vec(), adjacency }
    }

    pub fn neighbors(&self, c: usize) -> Vec<usize> {
        self.adjacency
            .iter()
            .filter_map(|&(a, b)| {
                if a == c {
                    Some(b)
                } else if b == c {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Cluster index of the nearest representative to `p`, with its distance.
    pub fn nearest_cluster(&self, p: &[f64]) -> (usize, f64) {
        self.clusters
            .iter()
            .enumerate()
            .map(|(i, c)| (i, dist2(&c.rep, p)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, d)| (i, d.sqrt()))
            .expect("a loop has at least one cluster")
    }
}

/// Clusters samples by single linkage at `eps_image`.
///
/// Fails when two samples that are not neighbours along the loop lie within
/// `2·eps_image` yet land in different clusters, or when a cluster spreads more than
/// `eps_image` from its centroid; both mean the tolerance does not resolve the geometry.
pub fn image_graph(curve: &LoopImmersion, eps_image: f64) -> Result<ImageGraph, MultiplicityError> {
    if !(eps_image > 0.0 && eps_image.is_finite()) {
        return Err(MultiplicityError::BadTolerance);
    }
    let m = curve.len();
    let grid = PointGrid::new(curve, 2.0 * eps_image);
    let mut uf = UnionFind::new(m);
    let mut near_pairs = Vec::new();
    for k in 0..m {
        for l in grid.within(curve.point(k), 2.0 * eps_image) {
            if l <= k {
                continue;
            }
            let d = dist(curve.point(k), curve.point(l));
            if d <= eps_image {
                uf.union(k, l);
            } else {
                near_pairs.push((k, l, d));
            }
        }
    }
    let labels = uf.labels();
    for (k, l, d) in near_pairs {
        let adjacent = l - k == 1 || (k == 0 && l == m - 1);
        if !adjacent && labels[k] != labels[l] {
            return Err(MultiplicityError::Ambiguous { eps_image, a: k, b: l, distance: d });
        }
    }
    let graph = ImageGraph::from_labels(curve, &labels);
    for c in &graph.clusters {
        for &k in &c.members {
            let spread = dist(&c.rep, curve.point(k));
            if spread > eps_image {
                return Err(MultiplicityError::Spread { eps_image, sample: k, spread });
            }
        }
    }
    Ok(graph)
}

/// `δ` per cluster.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MultiplicityMap {
    pub values: Vec<usize>,
}

impl MultiplicityMap {
    pub fn min(&self) -> usize {
        self.values.iter().copied().min().unwrap_or(0)
    }

    pub fn max(&self) -> usize {
        self.values.iter().copied().max().unwrap_or(0)
    }

    /// Sorted multiset of values.
    pub fn sorted(&self) -> Vec<usize> {
        let mut v = self.values.clone();
        v.sort_unstable();
        v
    }
}

pub fn delta(graph: &ImageGraph) -> MultiplicityMap {
    MultiplicityMap { values: graph.clusters.iter().map(|c| c.branches.len()).collect() }
}

/// Total parameter length of all branches; equals 1 for a well-formed graph.
pub fn total_branch_measure(graph: &ImageGraph) -> f64 {
    let m = graph.m;
    let samples: usize = graph
        .clusters
        .iter()
        .flat_map(|c| c.branches.iter())
        .map(|&(a, b)| (b + m - a) % m + 1)
        .sum();
    samples as f64 / m as f64
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemicontinuityViolation {
    pub cluster: usize,
    pub delta: usize,
    /// Clusters entered just before and just after the offending branch.
    pub before: usize,
    pub after: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SemicontinuityReport {
    pub violations: Vec<SemicontinuityViolation>,
}

impl SemicontinuityReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Flags clusters passed by a branch whose clusters on both sides have strictly
/// larger `δ`: an isolated dip, which an upper semicontinuous function cannot have.
pub fn check_semicontinuity(graph: &ImageGraph, dmap: &MultiplicityMap) -> SemicontinuityReport {
    let m = graph.m;
    let mut violations = Vec::new();
    for (ci, c) in graph.clusters.iter().enumerate() {
        let d = dmap.values[ci];
        for &(a, b) in &c.branches {
            if c.members.len() == m {
                continue;
            }
            let before = graph.cluster_of[(a + m - 1) % m];
            let after = graph.cluster_of[(b + 1) % m];
            if dmap.values[before] > d && dmap.values[after] > d {
                violations.push(SemicontinuityViolation { cluster: ci, delta: d, before, after });
                break;
            }
        }
    }
    SemicontinuityReport { violations }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelComponent {
    pub value: usize,
    /// Sorted cluster indices.
    pub clusters: Vec<usize>,
    /// Some member has all of its graph neighbours at the same value.
    pub has_interior: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelPartition {
    pub components: Vec<LevelComponent>,
    /// Component index of every cluster.
    pub component_of: Vec<usize>,
    /// Every cluster lies in, or is adjacent to, a component with interior.
    pub dense: bool,
}

impl LevelPartition {
    /// Indices of components with interior.
    pub fn interior(&self) -> Vec<usize> {
        (0..self.components.len()).filter(|&i| self.components[i].has_interior).collect()
    }
}

pub fn level_partition(graph: &ImageGraph, dmap: &MultiplicityMap) -> LevelPartition {
    let n = graph.clusters.len();
    let mut uf = UnionFind::new(n);
    for &(a, b) in &graph.adjacency {
        if dmap.values[a] == dmap.values[b] {
            uf.union(a, b);
        }
    }
    let component_of = uf.labels();
    let n_comp = component_of.iter().copied().max().map_or(0, |x| x + 1);
    let mut components: Vec<LevelComponent> = (0..n_comp)
        .map(|_| LevelComponent { value: 0, clusters: Vec::new(), has_interior: false })
        .collect();
    let mut neighbor_lists: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in &graph.adjacency {
        neighbor_lists[a].push(b);
        neighbor_lists[b].push(a);
    }
    for c in 0..n {
        let comp = &mut components[component_of[c]];
        comp.value = dmap.values[c];
        comp.clusters.push(c);
        if neighbor_lists[c].iter().all(|&z| dmap.values[z] == dmap.values[c]) {
            comp.has_interior = true;
        }
    }
    let dense = (0..n).all(|c| {
        components[component_of[c]].has_interior
            || neighbor_lists[c].iter().any(|&z| components[component_of[z]].has_interior)
    });
    LevelPartition { components, component_of, dense }
}
