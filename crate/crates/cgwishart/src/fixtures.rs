//! Built-in benchmark models.
//!
//! Five small colored models with printed scale matrices — a colored tree,
//! two colored stars, a colored triangle, and a colored decomposable graph on
//! four vertices — plus colored cycles of length 20 and 30 with a known true
//! precision matrix for posterior studies.
//!
//! The cycle fixtures come in three coloring patterns:
//!
//! * `a`: vertices alternate between two classes and edges alternate between
//!   two classes,
//! * `b`: vertices alternate between two classes, every edge its own class,
//! * `c`: every vertex its own class, edges alternate between two classes.
//!
//! Their true precision matrix has diagonal 0.1 at odd (1-based) vertices,
//! 0.03 at even vertices, and 0.01 on every cycle edge; the prior scale is
//! the identity with δ = 3.

use crate::error::{Error, Result};
use crate::graph::ColoredGraph;
use crate::matrix::SymMatrix;

/// A named model: colored graph, shape δ, scale D, and (for posterior
/// studies) the true precision matrix that generated the data.
#[derive(Debug, Clone)]
pub struct Fixture {
    /// Registry name.
    pub name: &'static str,
    /// The colored graph.
    pub graph: ColoredGraph,
    /// Shape hyperparameter δ.
    pub delta: f64,
    /// Scale hyperparameter D.
    pub scale: SymMatrix,
    /// True precision matrix for data-generation fixtures.
    pub true_k: Option<SymMatrix>,
}

/// Names accepted by [`builtin_fixture`].
pub fn fixture_names() -> &'static [&'static str] {
    &[
        "fig1a", "fig1b", "fig1c", "fig1d", "fig1e", "cycle20a", "cycle20b", "cycle20c",
        "cycle30a", "cycle30b", "cycle30c",
    ]
}

/// Builds a built-in fixture by name.
pub fn builtin_fixture(name: &str) -> Result<Fixture> {
    match name {
        "fig1a" => Ok(fig1a()),
        "fig1b" => Ok(fig1b()),
        "fig1c" => Ok(fig1c()),
        "fig1d" => Ok(fig1d()),
        "fig1e" => Ok(fig1e()),
        "cycle20a" => Ok(cycle(20, Pattern::VertexAndEdge, "cycle20a")),
        "cycle20b" => Ok(cycle(20, Pattern::VertexOnly, "cycle20b")),
        "cycle20c" => Ok(cycle(20, Pattern::EdgeOnly, "cycle20c")),
        "cycle30a" => Ok(cycle(30, Pattern::VertexAndEdge, "cycle30a")),
        "cycle30b" => Ok(cycle(30, Pattern::VertexOnly, "cycle30b")),
        "cycle30c" => Ok(cycle(30, Pattern::EdgeOnly, "cycle30c")),
        other => Err(Error::UnknownFixture(other.to_string())),
    }
}

/// Tree on seven vertices, all vertex colors distinct, one edge class.
fn fig1a() -> Fixture {
    let edges = [(1, 4), (2, 4), (3, 4), (4, 5), (5, 6), (5, 7)];
    let vertex_classes: Vec<Vec<usize>> = (1..=7).map(|v| vec![v]).collect();
    let graph = ColoredGraph::new(7, &edges, &vertex_classes, &[edges.to_vec()]).unwrap();
    let scale = SymMatrix::from_rows(&[
        vec![1.0, 0.0, 0.0, 2.0, 0.0, 0.0, 0.0],
        vec![0.0, 2.0, 0.0, 2.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, 5.0, 2.0, 0.0, 0.0, 0.0],
        vec![2.0, 2.0, 2.0, 25.0, 2.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0, 2.0, 6.0, 2.0, 2.0],
        vec![0.0, 0.0, 0.0, 0.0, 2.0, 3.0, 0.0],
        vec![0.0, 0.0, 0.0, 0.0, 2.0, 0.0, 4.0],
    ])
    .unwrap();
    Fixture { name: "fig1a", graph, delta: 1.0, scale, true_k: None }
}

/// Star with eight leaves in one color class, hub separate, edges distinct.
///
/// The leaves are numbered 1..8 and the hub is vertex 9. Listing the leaves
/// before the hub matters for the Cholesky sampler: the free representative
/// of the leaf class is then the first diagonal entry, every later tied leaf
/// diagonal completes structurally (the entries above it are forced to zero,
/// so its pivot equals the representative's pivot), and proposals never fail
/// completion. With the hub first, the tied leaf pivots must absorb the hub
/// row mass and nearly every proposal leaves the cone.
fn fig1b() -> Fixture {
    let edges: Vec<(usize, usize)> = (1..=8).map(|l| (l, 9)).collect();
    let edge_classes: Vec<Vec<(usize, usize)>> = edges.iter().map(|&e| vec![e]).collect();
    let graph =
        ColoredGraph::new(9, &edges, &[(1..=8).collect(), vec![9]], &edge_classes).unwrap();
    let mut scale = SymMatrix::zeros(9);
    scale.set(8, 8, 9.0);
    for l in 0..8 {
        scale.set(l, l, 25.0);
        scale.set(l, 8, (l + 1) as f64);
    }
    Fixture { name: "fig1b", graph, delta: 3.0, scale, true_k: None }
}

/// Star with nine leaves, all ten vertices in one color class, edges distinct.
///
/// As with the two-class star, the leaves are numbered 1..9 and the hub is
/// vertex 10, so the class representative is a leaf diagonal, the other leaf
/// diagonals complete structurally, and only the hub diagonal imposes a
/// completion constraint on proposals.
fn fig1c() -> Fixture {
    let edges: Vec<(usize, usize)> = (1..=9).map(|l| (l, 10)).collect();
    let edge_classes: Vec<Vec<(usize, usize)>> = edges.iter().map(|&e| vec![e]).collect();
    let graph =
        ColoredGraph::new(10, &edges, &[(1..=10).collect()], &edge_classes).unwrap();
    let mut scale = SymMatrix::zeros(10);
    for v in 0..10 {
        scale.set(v, v, 25.0);
    }
    for l in 0..9 {
        scale.set(l, 9, (l + 1) as f64);
    }
    Fixture { name: "fig1c", graph, delta: 3.0, scale, true_k: None }
}

/// Complete graph on three vertices with the two edges meeting vertex 3 in
/// one color class.
fn fig1d() -> Fixture {
    let graph = ColoredGraph::new(
        3,
        &[(1, 2), (1, 3), (2, 3)],
        &[vec![1], vec![2], vec![3]],
        &[vec![(1, 2)], vec![(1, 3), (2, 3)]],
    )
    .unwrap();
    let scale = SymMatrix::from_rows(&[
        vec![3.0, 1.0, 2.0],
        vec![1.0, 4.0, 2.0],
        vec![2.0, 2.0, 5.0],
    ])
    .unwrap();
    Fixture { name: "fig1d", graph, delta: 3.0, scale, true_k: None }
}

/// Decomposable graph on four vertices: the color-tied twins are vertices 1
/// and 2 (their diagonal scale is 200 and (1,2) is the non-edge), vertices 3
/// and 4 have their own colors, the edges into twin 1 share a color, and the
/// edges into twin 2 share a color.
///
/// Numbering the twins first makes the sole tied diagonal complete
/// structurally: the only entry above it, at the non-edge (1,2), is forced
/// to zero, so its pivot equals the representative's and no proposal can
/// fail completion.
fn fig1e() -> Fixture {
    let graph = ColoredGraph::new(
        4,
        &[(1, 3), (1, 4), (2, 3), (2, 4), (3, 4)],
        &[vec![1, 2], vec![3], vec![4]],
        &[vec![(3, 4)], vec![(1, 3), (1, 4)], vec![(2, 3), (2, 4)]],
    )
    .unwrap();
    let scale = SymMatrix::from_rows(&[
        vec![200.0, 0.0, 3.0, 3.0],
        vec![0.0, 200.0, 4.0, 4.0],
        vec![3.0, 4.0, 2.0, 1.0],
        vec![3.0, 4.0, 1.0, 1.0],
    ])
    .unwrap();
    Fixture { name: "fig1e", graph, delta: 3.0, scale, true_k: None }
}

enum Pattern {
    VertexAndEdge,
    VertexOnly,
    EdgeOnly,
}

/// Cycle of even length p: edges (i, i+1) and the closing edge (1, p), with
/// the requested coloring pattern, scale I, δ = 3, and the standard true K.
fn cycle(p: usize, pattern: Pattern, name: &'static str) -> Fixture {
    assert!(p >= 4 && p % 2 == 0, "alternating cycle patterns need even p");
    // Edge i is (i, i+1) for i < p; edge p closes the cycle as (1, p).
    let mut edges: Vec<(usize, usize)> = (1..p).map(|i| (i, i + 1)).collect();
    edges.push((1, p));

    let odd: Vec<usize> = (1..=p).step_by(2).collect();
    let even: Vec<usize> = (2..=p).step_by(2).collect();
    let vertex_classes: Vec<Vec<usize>> = match pattern {
        Pattern::VertexAndEdge | Pattern::VertexOnly => vec![odd, even],
        Pattern::EdgeOnly => (1..=p).map(|v| vec![v]).collect(),
    };
    let edge_classes: Vec<Vec<(usize, usize)>> = match pattern {
        Pattern::VertexAndEdge | Pattern::EdgeOnly => {
            let odd_edges: Vec<(usize, usize)> =
                edges.iter().copied().enumerate().filter(|(i, _)| i % 2 == 0).map(|(_, e)| e).collect();
            let even_edges: Vec<(usize, usize)> =
                edges.iter().copied().enumerate().filter(|(i, _)| i % 2 == 1).map(|(_, e)| e).collect();
            vec![odd_edges, even_edges]
        }
        Pattern::VertexOnly => edges.iter().map(|&e| vec![e]).collect(),
    };
    let graph = ColoredGraph::new(p, &edges, &vertex_classes, &edge_classes).unwrap();

    let mut true_k = SymMatrix::zeros(p);
    for v in 0..p {
        // 0-based even rows are 1-based odd vertices.
        true_k.set(v, v, if v % 2 == 0 { 0.1 } else { 0.03 });
    }
    for &(i, j) in graph.edges() {
        true_k.set(i, j, 0.01);
    }
    Fixture {
        name,
        graph,
        delta: 3.0,
        scale: SymMatrix::identity(p),
        true_k: Some(true_k),
    }
}
