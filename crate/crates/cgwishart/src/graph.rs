//! Colored graphs and the free-entry map of the colored precision cone.
//!
//! A coloring partitions the vertices and the edges into color classes. The
//! precision matrices of the model are constant on each class, so the cone
//! has one free coordinate per class: the lexicographically smallest entry of
//! each class is the class representative, every other entry is determined.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Undirected graph with vertex and edge color classes.
///
/// Stored 0-based; constructors accept the 1-based indexing used by the
/// serialized formats. Edges are normalized to `i < j` and sorted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColoredGraph {
    p: usize,
    edges: Vec<(usize, usize)>,
    vertex_classes: Vec<Vec<usize>>,
    edge_classes: Vec<Vec<(usize, usize)>>,
}

impl ColoredGraph {
    /// Builds and validates a colored graph from 1-based data.
    ///
    /// Requirements: `p ≥ 1`; edges are distinct pairs of distinct vertices
    /// in `1..=p`; `vertex_classes` partitions `{1, …, p}`; `edge_classes`
    /// partitions the edge set.
    pub fn new(
        p: usize,
        edges: &[(usize, usize)],
        vertex_classes: &[Vec<usize>],
        edge_classes: &[Vec<(usize, usize)>],
    ) -> Result<Self> {
        if p == 0 {
            return Err(Error::Parse("graph needs at least one vertex".into()));
        }
        let check_vertex = |v: usize| -> Result<usize> {
            if v == 0 || v > p {
                return Err(Error::Parse(format!("vertex {} out of range 1..={}", v, p)));
            }
            Ok(v - 1)
        };
        // Normalize and validate edges.
        let mut norm_edges = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            let (i, j) = (check_vertex(a)?, check_vertex(b)?);
            let e = if i < j { (i, j) } else { (j, i) };
            norm_edges.push(e);
        }
        let mut sorted = norm_edges.clone();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::DuplicateEdge(w[0].0 + 1, w[0].1 + 1));
            }
        }
        // Vertex classes partition the vertex set.
        let mut vertex_owner = vec![usize::MAX; p];
        let mut vcs: Vec<Vec<usize>> = Vec::with_capacity(vertex_classes.len());
        for (c, class) in vertex_classes.iter().enumerate() {
            let mut cls = Vec::with_capacity(class.len());
            for &v in class {
                let v0 = check_vertex(v)?;
                if vertex_owner[v0] != usize::MAX {
                    return Err(Error::OverlappingClasses {
                        kind: "vertex",
                        element: format!("{}", v),
                    });
                }
                vertex_owner[v0] = c;
                cls.push(v0);
            }
            cls.sort_unstable();
            vcs.push(cls);
        }
        for v0 in 0..p {
            if vertex_owner[v0] == usize::MAX {
                return Err(Error::UncoveredElement {
                    kind: "vertex",
                    element: format!("{}", v0 + 1),
                });
            }
        }
        // Edge classes partition the edge set.
        let edge_index = |e: (usize, usize)| sorted.binary_search(&e).ok();
        let mut edge_owner = vec![usize::MAX; sorted.len()];
        let mut ecs: Vec<Vec<(usize, usize)>> = Vec::with_capacity(edge_classes.len());
        for (c, class) in edge_classes.iter().enumerate() {
            let mut cls = Vec::with_capacity(class.len());
            for &(a, b) in class {
                let (i, j) = (check_vertex(a)?, check_vertex(b)?);
                let e = if i < j { (i, j) } else { (j, i) };
                let idx = edge_index(e).ok_or_else(|| Error::UncoveredElement {
                    kind: "edge",
                    element: format!("({}, {}) colored but not in the edge set", a, b),
                })?;
                if edge_owner[idx] != usize::MAX {
                    return Err(Error::OverlappingClasses {
                        kind: "edge",
                        element: format!("({}, {})", e.0 + 1, e.1 + 1),
                    });
                }
                edge_owner[idx] = c;
                cls.push(e);
            }
            cls.sort_unstable();
            ecs.push(cls);
        }
        for (idx, &owner) in edge_owner.iter().enumerate() {
            if owner == usize::MAX {
                let e = sorted[idx];
                return Err(Error::UncoveredElement {
                    kind: "edge",
                    element: format!("({}, {})", e.0 + 1, e.1 + 1),
                });
            }
        }
        Ok(ColoredGraph { p, edges: sorted, vertex_classes: vcs, edge_classes: ecs })
    }

    /// Convenience: every vertex and every edge in its own class.
    pub fn uncolored(p: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let vcs: Vec<Vec<usize>> = (1..=p).map(|v| vec![v]).collect();
        let ecs: Vec<Vec<(usize, usize)>> = edges.iter().map(|&e| vec![e]).collect();
        Self::new(p, edges, &vcs, &ecs)
    }

    /// Number of vertices.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Edges, 0-based, sorted, `i < j`.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Vertex color classes, 0-based, each sorted.
    pub fn vertex_classes(&self) -> &[Vec<usize>] {
        &self.vertex_classes
    }

    /// Edge color classes, 0-based, each sorted.
    pub fn edge_classes(&self) -> &[Vec<(usize, usize)>] {
        &self.edge_classes
    }

    /// Whether `(i, j)`, 0-based, is an edge.
    pub fn is_edge(&self, i: usize, j: usize) -> bool {
        if i == j {
            return false;
        }
        let e = if i < j { (i, j) } else { (j, i) };
        self.edges.binary_search(&e).is_ok()
    }

    /// Index of the vertex class containing `v` (0-based vertex).
    pub fn vertex_class_of(&self, v: usize) -> usize {
        self.vertex_classes
            .iter()
            .position(|c| c.binary_search(&v).is_ok())
            .expect("validated partition covers every vertex")
    }

    /// Index of the edge class containing edge `(i, j)` (0-based), if an edge.
    pub fn edge_class_of(&self, i: usize, j: usize) -> Option<usize> {
        let e = if i < j { (i, j) } else { (j, i) };
        self.edge_classes.iter().position(|c| c.binary_search(&e).is_ok())
    }

    /// Vertex degrees.
    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0usize; self.p];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    /// Builds the free-entry map of the colored cone.
    pub fn free_entry_map(&self) -> FreeEntryMap {
        FreeEntryMap::new(self)
    }

    /// Tree metadata: degrees and a leaf-stripping elimination order.
    ///
    /// Fails with [`Error::NotATree`] when the graph is not a connected
    /// acyclic graph. The elimination order removes a leaf at a time (lowest
    /// index first among current leaves); for trees this is a perfect
    /// elimination order.
    pub fn tree_metadata(&self) -> Result<TreeMeta> {
        let p = self.p;
        if self.edges.len() + 1 != p {
            return Err(Error::NotATree(format!(
                "{} vertices need {} edges, found {}",
                p,
                p - 1,
                self.edges.len()
            )));
        }
        if p == 1 {
            return Ok(TreeMeta { degrees: vec![0], elimination_order: vec![0] });
        }
        let mut deg = self.degrees();
        let degrees = deg.clone();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); p];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut removed = vec![false; p];
        let mut order = Vec::with_capacity(p);
        for _ in 0..p.saturating_sub(1) {
            let leaf = (0..p).find(|&v| !removed[v] && deg[v] == 1);
            let leaf = match leaf {
                Some(v) => v,
                None => return Err(Error::NotATree("no leaf found; graph contains a cycle".into())),
            };
            removed[leaf] = true;
            order.push(leaf);
            for &w in &adj[leaf] {
                if !removed[w] {
                    deg[w] -= 1;
                }
            }
        }
        let last = (0..p).find(|&v| !removed[v]).expect("one vertex remains");
        order.push(last);
        Ok(TreeMeta { degrees, elimination_order: order })
    }
}

/// Tree structure summary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeMeta {
    /// Degree of each vertex.
    pub degrees: Vec<usize>,
    /// Leaf-stripping removal order; a perfect elimination order for trees.
    pub elimination_order: Vec<usize>,
}

/// Classification of an upper-triangle entry `(i, j)`, `i ≤ j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryKind {
    /// Class representative; carries the index of the free coordinate.
    Free { idx: usize },
    /// Non-edge: the completed matrix vanishes here.
    StructuralZero,
    /// Edge whose value is tied to the class representative `rep`.
    NonfreeEdge { rep: (usize, usize) },
    /// Diagonal entry tied to the representative vertex `rep` of its class.
    NonfreeDiag { rep: usize },
}

/// Free-entry map: classification of every upper-triangle entry plus the row
/// and column deficiency counts that drive the Jacobians and proposals.
///
/// `v(i)` counts non-free entries `(i, j)` with `j ≥ i` in row `i` of the
/// upper triangle (diagonal included); `d(i)` counts non-free entries
/// `(j, i)` with `j ≤ i` in column `i`. Both satisfy
/// `Σ_i (p − i − v(i))` = `Σ_i (i + 1 − d(i))` = number of free entries
/// (0-based `i`).
#[derive(Debug, Clone)]
pub struct FreeEntryMap {
    p: usize,
    kinds: Vec<EntryKind>,
    free_set: Vec<(usize, usize)>,
    v_counts: Vec<usize>,
    d_counts: Vec<usize>,
    n_vertex_classes: usize,
}

impl FreeEntryMap {
    fn new(g: &ColoredGraph) -> Self {
        let p = g.p();
        let mut kinds = vec![EntryKind::StructuralZero; p * p];
        // Representatives: lexicographic minimum of each class.
        let mut diag_rep = vec![0usize; p];
        for class in g.vertex_classes() {
            let rep = class[0];
            for &v in class {
                diag_rep[v] = rep;
            }
        }
        let mut positions: Vec<(usize, usize)> = Vec::new();
        for i in 0..p {
            for j in i..p {
                let kind = if i == j {
                    if diag_rep[i] == i {
                        positions.push((i, i));
                        EntryKind::Free { idx: 0 }
                    } else {
                        // Class minimum precedes every other member.
                        debug_assert!(diag_rep[i] < i);
                        EntryKind::NonfreeDiag { rep: diag_rep[i] }
                    }
                } else if g.is_edge(i, j) {
                    let class = &g.edge_classes()[g.edge_class_of(i, j).expect("edge is colored")];
                    let rep = class[0];
                    if rep == (i, j) {
                        positions.push((i, j));
                        EntryKind::Free { idx: 0 }
                    } else {
                        // Class minimum precedes every other member.
                        debug_assert!(rep < (i, j));
                        EntryKind::NonfreeEdge { rep }
                    }
                } else {
                    EntryKind::StructuralZero
                };
                kinds[i * p + j] = kind;
            }
        }
        // Free coordinates are numbered in lexicographic position order.
        positions.sort_unstable();
        for (idx, &(i, j)) in positions.iter().enumerate() {
            kinds[i * p + j] = EntryKind::Free { idx };
        }
        let mut v_counts = vec![0usize; p];
        let mut d_counts = vec![0usize; p];
        for i in 0..p {
            for j in i..p {
                if !matches!(kinds[i * p + j], EntryKind::Free { .. }) {
                    v_counts[i] += 1;
                    d_counts[j] += 1;
                }
            }
        }
        FreeEntryMap {
            p,
            kinds,
            free_set: positions,
            v_counts,
            d_counts,
            n_vertex_classes: g.vertex_classes().len(),
        }
    }

    /// Dimension `p`.
    pub fn p(&self) -> usize {
        self.p
    }

    /// Kind of entry `(i, j)`, `i ≤ j`, 0-based.
    #[inline]
    pub fn kind(&self, i: usize, j: usize) -> EntryKind {
        debug_assert!(i <= j);
        self.kinds[i * self.p + j]
    }

    /// Free entries in lexicographic order; index in this slice is the
    /// coordinate index used by completion and sampling.
    pub fn free_set(&self) -> &[(usize, usize)] {
        &self.free_set
    }

    /// Number of free coordinates (the cone dimension).
    pub fn n_free(&self) -> usize {
        self.free_set.len()
    }

    /// Row deficiency `v(i)` (0-based row).
    #[inline]
    pub fn v(&self, i: usize) -> usize {
        self.v_counts[i]
    }

    /// Column deficiency `d(i)` (0-based column).
    #[inline]
    pub fn d(&self, i: usize) -> usize {
        self.d_counts[i]
    }

    /// Number of vertex color classes.
    pub fn n_vertex_classes(&self) -> usize {
        self.n_vertex_classes
    }

    /// Free diagonal positions as `(row, coordinate index)`.
    pub fn free_diagonals(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.free_set
            .iter()
            .enumerate()
            .filter(|(_, &(i, j))| i == j)
            .map(|(idx, &(i, _))| (i, idx))
    }

    /// Free off-diagonal count.
    pub fn n_free_offdiag(&self) -> usize {
        self.free_set.iter().filter(|&&(i, j)| i != j).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Colored triangle: singleton vertex classes, edge classes
    /// {(1,2)} and {(1,3),(2,3)}.
    pub(crate) fn triangle() -> ColoredGraph {
        ColoredGraph::new(
            3,
            &[(1, 2), (1, 3), (2, 3)],
            &[vec![1], vec![2], vec![3]],
            &[vec![(1, 2)], vec![(1, 3), (2, 3)]],
        )
        .unwrap()
    }

    /// Four-vertex decomposable graph with vertex classes {1},{2},{3,4} and
    /// edge classes {(1,2)}, {(1,3),(2,3)}, {(1,4),(2,4)}.
    pub(crate) fn decomp4() -> ColoredGraph {
        ColoredGraph::new(
            4,
            &[(1, 2), (1, 3), (1, 4), (2, 3), (2, 4)],
            &[vec![1], vec![2], vec![3, 4]],
            &[vec![(1, 2)], vec![(1, 3), (2, 3)], vec![(1, 4), (2, 4)]],
        )
        .unwrap()
    }

    #[test]
    fn triangle_free_entries() {
        let map = triangle().free_entry_map();
        // Free set: (1,1),(1,2),(1,3),(2,2),(3,3) in 1-based terms.
        let want: Vec<(usize, usize)> = vec![(0, 0), (0, 1), (0, 2), (1, 1), (2, 2)];
        assert_eq!(map.free_set(), want.as_slice());
        assert!(matches!(map.kind(1, 2), EntryKind::NonfreeEdge { rep: (0, 2) }));
        assert_eq!(map.v(0), 0);
        assert_eq!(map.v(1), 1);
        assert_eq!(map.v(2), 0);
        assert_eq!(map.d(0), 0);
        assert_eq!(map.d(1), 0);
        assert_eq!(map.d(2), 1);
    }

    #[test]
    fn decomp4_free_entries() {
        let map = decomp4().free_entry_map();
        let want: Vec<(usize, usize)> =
            vec![(0, 0), (0, 1), (0, 2), (0, 3), (1, 1), (2, 2)];
        assert_eq!(map.free_set(), want.as_slice());
        assert!(matches!(map.kind(1, 2), EntryKind::NonfreeEdge { rep: (0, 2) }));
        assert!(matches!(map.kind(1, 3), EntryKind::NonfreeEdge { rep: (0, 3) }));
        assert!(matches!(map.kind(2, 3), EntryKind::StructuralZero));
        assert!(matches!(map.kind(3, 3), EntryKind::NonfreeDiag { rep: 2 }));
        assert_eq!(map.v_counts, vec![0, 2, 1, 1]);
        assert_eq!(map.d_counts, vec![0, 0, 1, 3]);
    }

    #[test]
    fn count_identities_hold() {
        for g in [triangle(), decomp4()] {
            let map = g.free_entry_map();
            let p = map.p();
            let row_sum: usize = (0..p).map(|i| p - i - map.v(i)).sum();
            let col_sum: usize = (0..p).map(|i| i + 1 - map.d(i)).sum();
            assert_eq!(row_sum, map.n_free());
            assert_eq!(col_sum, map.n_free());
        }
    }

    #[test]
    fn representatives_are_free_and_lexicographically_minimal() {
        let builtins = crate::fixtures::fixture_names()
            .iter()
            .map(|n| crate::fixtures::builtin_fixture(n).unwrap().graph);
        for g in builtins.chain([triangle(), decomp4()]) {
            let map = g.free_entry_map();
            for i in 0..g.p() {
                for j in i..g.p() {
                    match map.kind(i, j) {
                        EntryKind::NonfreeEdge { rep } => {
                            assert!(matches!(
                                map.kind(rep.0, rep.1),
                                EntryKind::Free { .. }
                            ));
                            assert!(rep < (i, j), "rep {rep:?} not before ({i},{j})");
                        }
                        EntryKind::NonfreeDiag { rep } => {
                            assert!(matches!(map.kind(rep, rep), EntryKind::Free { .. }));
                            assert!(rep < i, "rep {rep} not before {i}");
                        }
                        EntryKind::Free { .. } | EntryKind::StructuralZero => {}
                    }
                }
            }
        }
    }

    #[test]
    fn validation_errors() {
        // Self loop.
        let e = ColoredGraph::new(2, &[(1, 1)], &[vec![1], vec![2]], &[vec![(1, 1)]]);
        assert!(matches!(e, Err(Error::SelfLoop(1))));
        // Duplicate edge, given in both orientations.
        let e = ColoredGraph::new(2, &[(1, 2), (2, 1)], &[vec![1], vec![2]], &[vec![(1, 2)]]);
        assert!(matches!(e, Err(Error::DuplicateEdge(1, 2))));
        // Overlapping vertex classes.
        let e = ColoredGraph::new(2, &[(1, 2)], &[vec![1, 2], vec![2]], &[vec![(1, 2)]]);
        assert!(matches!(e, Err(Error::OverlappingClasses { kind: "vertex", .. })));
        // Uncovered vertex.
        let e = ColoredGraph::new(2, &[(1, 2)], &[vec![1]], &[vec![(1, 2)]]);
        assert!(matches!(e, Err(Error::UncoveredElement { kind: "vertex", .. })));
        // Uncovered edge.
        let e = ColoredGraph::new(2, &[(1, 2)], &[vec![1], vec![2]], &[]);
        assert!(matches!(e, Err(Error::UncoveredElement { kind: "edge", .. })));
        // Edge class mentions a non-edge.
        let e = ColoredGraph::new(
            3,
            &[(1, 2)],
            &[vec![1], vec![2], vec![3]],
            &[vec![(1, 2), (2, 3)]],
        );
        assert!(matches!(e, Err(Error::UncoveredElement { kind: "edge", .. })));
    }

    #[test]
    fn tree_metadata_detects_structure() {
        // Path 1-2-3.
        let g = ColoredGraph::uncolored(3, &[(1, 2), (2, 3)]).unwrap();
        let meta = g.tree_metadata().unwrap();
        assert_eq!(meta.degrees, vec![1, 2, 1]);
        assert_eq!(meta.elimination_order.len(), 3);
        // Each removed vertex is a leaf of the remaining forest.
        assert_eq!(meta.elimination_order[0], 0);
        // Cycle is rejected.
        let g = ColoredGraph::uncolored(3, &[(1, 2), (2, 3), (1, 3)]).unwrap();
        assert!(matches!(g.tree_metadata(), Err(Error::NotATree(_))));
        // Disconnected graph with p-1 edges is rejected.
        let g = ColoredGraph::uncolored(4, &[(1, 2), (1, 3), (2, 3)]).unwrap();
        assert!(matches!(g.tree_metadata(), Err(Error::NotATree(_))));
        // Single vertex is a tree.
        let g = ColoredGraph::uncolored(1, &[]).unwrap();
        assert!(g.tree_metadata().is_ok());
    }

    #[test]
    fn star_with_colored_leaves_map() {
        // Star on 4 vertices, center 1; leaves share a class, edges singletons.
        let g = ColoredGraph::new(
            4,
            &[(1, 2), (1, 3), (1, 4)],
            &[vec![1], vec![2, 3, 4]],
            &[vec![(1, 2)], vec![(1, 3)], vec![(1, 4)]],
        )
        .unwrap();
        let map = g.free_entry_map();
        assert_eq!(
            map.free_set(),
            &[(0, 0), (0, 1), (0, 2), (0, 3), (1, 1)]
        );
        assert!(matches!(map.kind(2, 2), EntryKind::NonfreeDiag { rep: 1 }));
        assert!(matches!(map.kind(3, 3), EntryKind::NonfreeDiag { rep: 1 }));
        assert_eq!(map.n_vertex_classes(), 2);
        assert_eq!(map.n_free_offdiag(), 3);
        let diag_rows: Vec<usize> = map.free_diagonals().map(|(i, _)| i).collect();
        assert_eq!(diag_rows, vec![0, 1]);
    }
}
