//! Labelled connected marked graphs.
//!
//! An lcmg is a directed graph with complex edge labels and a basepoint.
//! At most one directed edge joins an ordered pair of vertices, so a vertex
//! carries at most one self-loop. Distances are lengths of directed paths;
//! balls are full induced subgraphs around the basepoint.

mod cayley;
mod iso;
mod metric;

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::ring::{bigint_to_json, json_to_bigint};
use crate::LABEL_TOLERANCE;

pub use cayley::{cayley_ball_infinite, cayley_lcmg_finite, shortest_kernel_word, word_length_radius, CayleyLcmg, InfiniteCayley};
pub use iso::{is_witness, isomorphism, lcmg_isomorphic};
pub use metric::{metric_d, BallSource, MetricValue};

/// Edge as `(source, target, label)`.
pub type Edge = (usize, usize, Complex64);

#[derive(Clone, Debug, PartialEq)]
pub struct Lcmg {
    vertices: Vec<Vec<BigInt>>,
    basepoint: usize,
    /// Outgoing edges per vertex, sorted by target.
    out: Vec<Vec<(usize, Complex64)>>,
    /// Incoming edges per vertex, sorted by source.
    inc: Vec<Vec<(usize, Complex64)>>,
    edge_count: usize,
}

pub(crate) fn labels_match(a: Complex64, b: Complex64) -> bool {
    (a.re - b.re).abs() <= LABEL_TOLERANCE && (a.im - b.im).abs() <= LABEL_TOLERANCE
}

impl Lcmg {
    /// Builds a graph, rejecting parallel edges, dangling endpoints and graphs
    /// whose underlying undirected graph is disconnected.
    pub fn new<I: IntoIterator<Item = Edge>>(vertices: Vec<Vec<BigInt>>, basepoint: usize, edges: I) -> Result<Self> {
        let g = Self::unchecked(vertices, basepoint, edges)?;
        let reach = g.weakly_reachable();
        if let Some(v) = reach.iter().position(|&r| !r) {
            return Err(Error::Structural(format!("vertex {v} is not connected to the basepoint")));
        }
        Ok(g)
    }

    /// Like [`Lcmg::new`] but keeps only the component of the basepoint,
    /// preserving vertex order. Returns the graph and the number of vertices dropped.
    pub fn component_of_basepoint<I: IntoIterator<Item = Edge>>(
        vertices: Vec<Vec<BigInt>>,
        basepoint: usize,
        edges: I,
    ) -> Result<(Self, usize)> {
        let g = Self::unchecked(vertices, basepoint, edges)?;
        let reach = g.weakly_reachable();
        let dropped = reach.iter().filter(|&&r| !r).count();
        if dropped == 0 {
            return Ok((g, 0));
        }
        let keep: Vec<usize> = (0..g.vertex_count()).filter(|&v| reach[v]).collect();
        Ok((g.induced(&keep)?, dropped))
    }

    fn unchecked<I: IntoIterator<Item = Edge>>(vertices: Vec<Vec<BigInt>>, basepoint: usize, edges: I) -> Result<Self> {
        let n = vertices.len();
        if basepoint >= n {
            return Err(Error::Range { what: "basepoint", index: basepoint, len: n });
        }
        let mut out: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); n];
        let mut inc: Vec<Vec<(usize, Complex64)>> = vec![Vec::new(); n];
        let mut edge_count = 0;
        for (u, v, l) in edges {
            for x in [u, v] {
                if x >= n {
                    return Err(Error::Range { what: "edge endpoint", index: x, len: n });
                }
            }
            out[u].push((v, l));
            inc[v].push((u, l));
            edge_count += 1;
        }
        for (u, list) in out.iter_mut().enumerate() {
            list.sort_by_key(|e| e.0);
            if let Some(w) = list.windows(2).find(|w| w[0].0 == w[1].0) {
                return Err(Error::Structural(format!("parallel edges {u} -> {}", w[0].0)));
            }
        }
        for list in &mut inc {
            list.sort_by_key(|e| e.0);
        }
        Ok(Self { vertices, basepoint, out, inc, edge_count })
    }

    fn weakly_reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.vertex_count()];
        let mut queue = VecDeque::from([self.basepoint]);
        seen[self.basepoint] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in self.out[u].iter().chain(&self.inc[u]) {
                if !seen[v] {
                    seen[v] = true;
                    queue.push_back(v);
                }
            }
        }
        seen
    }

    /// Full subgraph on `keep` (in that order); the basepoint must be kept.
    fn induced(&self, keep: &[usize]) -> Result<Self> {
        let mut index = vec![usize::MAX; self.vertex_count()];
        for (i, &v) in keep.iter().enumerate() {
            index[v] = i;
        }
        let basepoint = index[self.basepoint];
        if basepoint == usize::MAX {
            return Err(Error::Structural("induced subgraph must contain the basepoint".into()));
        }
        let vertices = keep.iter().map(|&v| self.vertices[v].clone()).collect();
        let edges = keep.iter().flat_map(|&u| {
            let index = &index;
            self.out[u]
                .iter()
                .filter(move |(v, _)| index[*v] != usize::MAX)
                .map(move |&(v, l)| (index[u], index[v], l))
        });
        Self::unchecked(vertices, basepoint, edges.collect::<Vec<_>>())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn basepoint(&self) -> usize {
        self.basepoint
    }

    pub fn vertices(&self) -> &[Vec<BigInt>] {
        &self.vertices
    }

    pub fn out_edges(&self, v: usize) -> &[(usize, Complex64)] {
        &self.out[v]
    }

    pub fn in_edges(&self, v: usize) -> &[(usize, Complex64)] {
        &self.inc[v]
    }

    pub fn label(&self, u: usize, v: usize) -> Option<Complex64> {
        let list = &self.out[u];
        list.binary_search_by_key(&v, |e| e.0).ok().map(|i| list[i].1)
    }

    /// All edges ordered by source, then target.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().map(move |&(v, l)| (u, v, l)))
    }

    /// Directed distance from the basepoint; `None` if unreachable.
    pub fn distances(&self) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertex_count()];
        dist[self.basepoint] = Some(0);
        let mut queue = VecDeque::from([self.basepoint]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].expect("queued vertices have a distance");
            for &(v, _) in &self.out[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    /// Ball of radius `r` around the basepoint: vertices at directed distance
    /// at most `r`, ordered by distance then by original index.
    pub fn extract_ball(&self, r: usize) -> Ball {
        let dist = self.distances();
        let mut keep: Vec<usize> = (0..self.vertex_count()).filter(|&v| matches!(dist[v], Some(d) if d <= r)).collect();
        keep.sort_by_key(|&v| (dist[v], v));
        let graph = self.induced(&keep).expect("basepoint has distance 0");
        Ball { center: self.vertices[self.basepoint].clone(), graph, radius: r }
    }

    /// Reverses every edge and conjugates its label.
    pub fn involution(&self) -> Lcmg {
        let edges: Vec<Edge> = self.edges().map(|(u, v, l)| (v, u, l.conj())).collect();
        Self::unchecked(self.vertices.clone(), self.basepoint, edges).expect("reversal preserves validity")
    }

    /// True when the graph equals its involution, labels compared within
    /// the label tolerance.
    pub fn is_self_involutive(&self) -> bool {
        self.edges()
            .all(|(u, v, l)| matches!(self.label(v, u), Some(m) if labels_match(m, l.conj())))
    }

    /// Vertex-for-vertex equality with labels compared within tolerance.
    pub fn same_as(&self, other: &Lcmg) -> bool {
        self.vertices == other.vertices
            && self.basepoint == other.basepoint
            && self.edge_count == other.edge_count
            && self
                .edges()
                .all(|(u, v, l)| matches!(other.label(u, v), Some(m) if labels_match(l, m)))
    }

    pub fn to_json(&self) -> Value {
        let doc = LcmgJson {
            vertices: self.vertices.iter().map(|c| c.iter().map(bigint_to_json).collect()).collect(),
            basepoint: self.basepoint,
            edges: self.edges().map(|(u, v, l)| (u, v, l.re, l.im)).collect(),
        };
        serde_json::to_value(doc).expect("plain data serializes")
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let doc: LcmgJson =
            serde_json::from_value(value.clone()).map_err(|e| Error::Config(format!("bad lcmg document: {e}")))?;
        let vertices = doc
            .vertices
            .iter()
            .map(|c| {
                c.iter()
                    .map(|x| json_to_bigint(x).ok_or_else(|| Error::Config(format!("bad vertex coordinate {x}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(vertices, doc.basepoint, doc.edges.into_iter().map(|(u, v, re, im)| (u, v, Complex64::new(re, im))))
    }
}

#[derive(Serialize, Deserialize)]
struct LcmgJson {
    vertices: Vec<Vec<Value>>,
    basepoint: usize,
    edges: Vec<(usize, usize, f64, f64)>,
}

/// A ball `B(X, v, r)`: the full subgraph within directed distance `r` of the centre.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub graph: Lcmg,
    pub radius: usize,
    /// Coordinates of the centre in the source graph.
    pub center: Vec<BigInt>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn coords(n: usize) -> Vec<Vec<BigInt>> {
        (0..n).map(|i| vec![BigInt::from(i)]).collect()
    }

    /// Cycle Z/m with self-loop `a` and both neighbour edges labelled `b`.
    pub(crate) fn cycle(m: usize, a: f64, b: f64) -> Lcmg {
        let mut edges = Vec::new();
        for x in 0..m {
            edges.push((x, x, c(a, 0.0)));
            edges.push((x, (x + 1) % m, c(b, 0.0)));
            if m > 2 {
                edges.push((x, (x + m - 1) % m, c(b, 0.0)));
            }
        }
        Lcmg::new(coords(m), 0, edges).unwrap()
    }

    #[test]
    fn rejects_parallel_edges_and_disconnection() {
        let dup = Lcmg::new(coords(2), 0, vec![(0, 1, c(1.0, 0.0)), (0, 1, c(2.0, 0.0))]);
        assert!(matches!(dup, Err(Error::Structural(_))));
        let loops = Lcmg::new(coords(1), 0, vec![(0, 0, c(1.0, 0.0)), (0, 0, c(1.0, 0.0))]);
        assert!(loops.is_err());
        let split = Lcmg::new(coords(3), 0, vec![(0, 1, c(1.0, 0.0))]);
        assert!(matches!(split, Err(Error::Structural(_))));
        let (g, dropped) = Lcmg::component_of_basepoint(coords(3), 0, vec![(0, 1, c(1.0, 0.0))]).unwrap();
        assert_eq!((g.vertex_count(), dropped), (2, 1));
    }

    #[test]
    fn extract_ball_examples() {
        let g = cycle(4, 2.0, -1.0);
        let b1 = g.extract_ball(1);
        let verts: Vec<_> = b1.graph.vertices().to_vec();
        assert_eq!(verts, vec![vec![BigInt::from(0)], vec![BigInt::from(1)], vec![BigInt::from(3)]]);
        // self-loops on all three, 0<->1 and 0<->3, no 1-3 edge
        assert_eq!(b1.graph.edge_count(), 3 + 4);
        assert_eq!(b1.graph.label(1, 2), None);

        // the ball is reordered by distance, so compare up to isomorphism
        let b2 = g.extract_ball(2).graph;
        assert_eq!(b2.vertex_count(), 4);
        assert!(lcmg_isomorphic(&b2, &g));
        assert!(g.extract_ball(10).graph.same_as(&b2));

        let b0 = g.extract_ball(0);
        assert_eq!(b0.graph.vertex_count(), 1);
        assert_eq!(b0.graph.label(0, 0), Some(c(2.0, 0.0)));
    }

    #[test]
    fn unreachable_vertices_are_outside_every_ball() {
        // 1 -> 0 only: weakly connected, but 1 is not reachable from 0
        let g = Lcmg::new(coords(2), 0, vec![(1, 0, c(1.0, 0.0))]).unwrap();
        assert_eq!(g.distances(), vec![Some(0), None]);
        assert_eq!(g.extract_ball(5).graph.vertex_count(), 1);
    }

    #[test]
    fn involution_examples() {
        let g = cycle(4, 2.0, -1.0);
        assert!(g.is_self_involutive());
        assert!(g.involution().same_as(&g));

        let single = Lcmg::new(coords(2), 0, vec![(0, 1, c(0.0, 1.0))]).unwrap();
        let inv = single.involution();
        assert_eq!(inv.label(1, 0), Some(c(0.0, -1.0)));
        assert_eq!(inv.label(0, 1), None);
        assert!(!single.is_self_involutive());
        assert!(inv.involution().same_as(&single));
    }

    #[test]
    fn json_roundtrip_is_deterministic() {
        let g = cycle(4, 2.0, -1.0);
        let doc = g.to_json();
        let text = serde_json::to_string(&doc).unwrap();
        assert!(text.starts_with(r#"{"basepoint":0,"edges":[[0,0,2.0,0.0],[0,1,-1.0,0.0]"#), "{text}");
        let back = Lcmg::from_json(&doc).unwrap();
        assert_eq!(back, g);
    }
}
