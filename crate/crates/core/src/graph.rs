//! Directed multigraphs with first-class arc identities.
//!
//! Every solver in this crate talks about arcs by [`ArcId`], never by endpoint
//! pairs, because parallel arcs (two lines of flying between the same pair of
//! airports, say) must stay distinguishable.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArcId(pub usize);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl ArcId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "v{}", self.0)
    }
}

impl fmt::Display for ArcId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("arc {arc} references unknown vertex {vertex}")]
    UnknownVertex { arc: usize, vertex: usize },
    #[error("vertex ids must be exactly 0..{expected}, got {got:?}")]
    VertexIds { expected: usize, got: Vec<usize> },
    #[error("arc ids must be exactly 0..{expected} without repeats")]
    ArcIds { expected: usize },
    #[error("vertex {vertex} is unbalanced: indegree {indegree}, outdegree {outdegree}")]
    Unbalanced { vertex: VertexId, indegree: usize, outdegree: usize },
    #[error("graph has a directed cycle through arc {arc}")]
    Cycle { arc: ArcId },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub struct Arc {
    pub tail: VertexId,
    pub head: VertexId,
}

/// Vertices are `0..vertex_count()`, arcs are `0..arc_count()`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct DirectedMultigraph {
    arcs: Vec<Arc>,
    out_arcs: Vec<Vec<ArcId>>,
    in_arcs: Vec<Vec<ArcId>>,
}

impl DirectedMultigraph {
    pub fn new(vertex_count: usize) -> Self {
        DirectedMultigraph {
            arcs: Vec::new(),
            out_arcs: vec![Vec::new(); vertex_count],
            in_arcs: vec![Vec::new(); vertex_count],
        }
    }

    /// Builds a graph from `(tail, head)` pairs; arc `i` is the `i`-th pair.
    pub fn from_arcs(vertex_count: usize, arcs: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = DirectedMultigraph::new(vertex_count);
        for (i, &(t, h)) in arcs.iter().enumerate() {
            for v in [t, h] {
                if v >= vertex_count {
                    return Err(GraphError::UnknownVertex { arc: i, vertex: v });
                }
            }
            g.add_arc(VertexId(t), VertexId(h));
        }
        Ok(g)
    }

    pub fn add_vertex(&mut self) -> VertexId {
        self.out_arcs.push(Vec::new());
        self.in_arcs.push(Vec::new());
        VertexId(self.out_arcs.len() - 1)
    }

    /// Panics if an endpoint does not exist.
    pub fn add_arc(&mut self, tail: VertexId, head: VertexId) -> ArcId {
        assert!(tail.0 < self.vertex_count() && head.0 < self.vertex_count());
        let id = ArcId(self.arcs.len());
        self.arcs.push(Arc { tail, head });
        self.out_arcs[tail.0].push(id);
        self.in_arcs[head.0].push(id);
        id
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.out_arcs.len()
    }

    #[inline]
    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertex_count()).map(VertexId)
    }

    pub fn arc_ids(&self) -> impl Iterator<Item = ArcId> + '_ {
        (0..self.arc_count()).map(ArcId)
    }

    #[inline]
    pub fn arc(&self, a: ArcId) -> Arc {
        self.arcs[a.0]
    }

    #[inline]
    pub fn tail(&self, a: ArcId) -> VertexId {
        self.arcs[a.0].tail
    }

    #[inline]
    pub fn head(&self, a: ArcId) -> VertexId {
        self.arcs[a.0].head
    }

    /// Outgoing arcs in ascending id order.
    #[inline]
    pub fn out_arcs(&self, v: VertexId) -> &[ArcId] {
        &self.out_arcs[v.0]
    }

    /// Incoming arcs in ascending id order.
    #[inline]
    pub fn in_arcs(&self, v: VertexId) -> &[ArcId] {
        &self.in_arcs[v.0]
    }

    #[inline]
    pub fn out_degree(&self, v: VertexId) -> usize {
        self.out_arcs[v.0].len()
    }

    #[inline]
    pub fn in_degree(&self, v: VertexId) -> usize {
        self.in_arcs[v.0].len()
    }

    pub fn is_isolated(&self, v: VertexId) -> bool {
        self.out_degree(v) == 0 && self.in_degree(v) == 0
    }

    pub fn first_unbalanced(&self) -> Option<VertexId> {
        self.vertices().find(|&v| self.in_degree(v) != self.out_degree(v))
    }

    pub fn check_balanced(&self) -> Result<(), GraphError> {
        match self.first_unbalanced() {
            None => Ok(()),
            Some(v) => {
                Err(GraphError::Unbalanced { vertex: v, indegree: self.in_degree(v), outdegree: self.out_degree(v) })
            }
        }
    }

    /// Weak component label per vertex; isolated vertices get their own label.
    pub fn weak_components(&self) -> Vec<usize> {
        let n = self.vertex_count();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for arc in &self.arcs {
            let (a, b) = (find(&mut parent, arc.tail.0), find(&mut parent, arc.head.0));
            if a != b {
                parent[a.max(b)] = a.min(b);
            }
        }
        (0..n).map(|v| find(&mut parent, v)).collect()
    }

    /// Same graph with arcs renumbered: new arc `i` is old arc `order[i]`.
    pub fn relabel_arcs(&self, order: &[ArcId]) -> DirectedMultigraph {
        assert_eq!(order.len(), self.arc_count());
        self.arc_subgraph(order)
    }

    /// Sub-multigraph keeping the listed arcs; arc ids are renumbered in list order.
    pub fn arc_subgraph(&self, keep: &[ArcId]) -> DirectedMultigraph {
        let mut g = DirectedMultigraph::new(self.vertex_count());
        for &a in keep {
            g.add_arc(self.tail(a), self.head(a));
        }
        g
    }
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    vertices: Vec<usize>,
    arcs: Vec<(usize, usize, usize)>,
}

impl TryFrom<GraphJson> for DirectedMultigraph {
    type Error = GraphError;

    fn try_from(json: GraphJson) -> Result<Self, GraphError> {
        let n = json.vertices.len();
        let mut seen = vec![false; n];
        for &v in &json.vertices {
            if v >= n || std::mem::replace(&mut seen[v], true) {
                return Err(GraphError::VertexIds { expected: n, got: json.vertices.clone() });
            }
        }
        let m = json.arcs.len();
        let mut slots: Vec<Option<(usize, usize)>> = vec![None; m];
        for &(id, t, h) in &json.arcs {
            if id >= m || slots[id].is_some() {
                return Err(GraphError::ArcIds { expected: m });
            }
            slots[id] = Some((t, h));
        }
        let pairs: Vec<(usize, usize)> = slots.into_iter().map(|s| s.unwrap()).collect();
        DirectedMultigraph::from_arcs(n, &pairs)
    }
}

impl From<DirectedMultigraph> for GraphJson {
    fn from(g: DirectedMultigraph) -> Self {
        GraphJson {
            vertices: (0..g.vertex_count()).collect(),
            arcs: g.arcs.iter().enumerate().map(|(i, a)| (i, a.tail.0, a.head.0)).collect(),
        }
    }
}

/// A closed directed trail, stored as the cyclic sequence of its arcs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ClosedTrail {
    pub arcs: Vec<ArcId>,
}

/// An open directed path (or trail) as a sequence of arcs.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ArcPath {
    pub arcs: Vec<ArcId>,
}

impl ClosedTrail {
    pub fn new(arcs: Vec<ArcId>) -> Self {
        ClosedTrail { arcs }
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Whether the arcs chain head-to-tail cyclically without repeating.
    pub fn is_closed_trail_in(&self, g: &DirectedMultigraph) -> bool {
        if self.arcs.is_empty() || self.arcs.iter().any(|a| a.0 >= g.arc_count()) {
            return false;
        }
        let distinct: BTreeSet<_> = self.arcs.iter().collect();
        distinct.len() == self.arcs.len()
            && (0..self.arcs.len()).all(|i| {
                let next = self.arcs[(i + 1) % self.arcs.len()];
                g.head(self.arcs[i]) == g.tail(next)
            })
    }
}

impl ArcPath {
    pub fn new(arcs: Vec<ArcId>) -> Self {
        ArcPath { arcs }
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }
}

/// True iff every vertex is balanced and all arcs lie in one weak component.
/// Isolated vertices are ignored; the empty arc set is Eulerian.
pub fn is_eulerian(g: &DirectedMultigraph) -> bool {
    if g.first_unbalanced().is_some() {
        return false;
    }
    let comp = g.weak_components();
    let mut labels = g.vertices().filter(|&v| !g.is_isolated(v)).map(|v| comp[v.0]);
    match labels.next() {
        None => true,
        Some(first) => labels.all(|c| c == first),
    }
}

/// Splits a balanced multigraph into closed trails, one Euler tour per
/// non-trivial weak component.
///
/// Uses the stack-based Hierholzer scheme, always taking the unused outgoing
/// arc with the smallest id, so the output depends only on the arc numbering.
pub fn decompose_into_closed_trails(g: &DirectedMultigraph) -> Result<Vec<ClosedTrail>, GraphError> {
    g.check_balanced()?;
    let mut used = vec![false; g.arc_count()];
    let mut next_out = vec![0usize; g.vertex_count()];
    let mut trails = Vec::new();
    for start in g.vertices() {
        if next_out[start.0] == g.out_degree(start) {
            continue;
        }
        let mut stack: Vec<(VertexId, Option<ArcId>)> = vec![(start, None)];
        let mut circuit = Vec::new();
        while let Some(&(v, via)) = stack.last() {
            let outs = g.out_arcs(v);
            let mut advanced = false;
            while next_out[v.0] < outs.len() {
                let a = outs[next_out[v.0]];
                next_out[v.0] += 1;
                if !used[a.0] {
                    used[a.0] = true;
                    stack.push((g.head(a), Some(a)));
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                stack.pop();
                if let Some(a) = via {
                    circuit.push(a);
                }
            }
        }
        circuit.reverse();
        if !circuit.is_empty() {
            trails.push(ClosedTrail::new(circuit));
        }
    }
    debug_assert!(used.iter().all(|&u| u));
    Ok(trails)
}

/// Kahn ordering with ascending vertex ids as the tie-break.
pub fn topological_order(g: &DirectedMultigraph) -> Result<Vec<VertexId>, GraphError> {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;

    let mut indeg: Vec<usize> = g.vertices().map(|v| g.in_degree(v)).collect();
    let mut ready: BinaryHeap<Reverse<usize>> =
        indeg.iter().enumerate().filter(|(_, &d)| d == 0).map(|(v, _)| Reverse(v)).collect();
    let mut order = Vec::with_capacity(g.vertex_count());
    while let Some(Reverse(v)) = ready.pop() {
        order.push(VertexId(v));
        for &a in g.out_arcs(VertexId(v)) {
            let h = g.head(a).0;
            indeg[h] -= 1;
            if indeg[h] == 0 {
                ready.push(Reverse(h));
            }
        }
    }
    if order.len() == g.vertex_count() {
        return Ok(order);
    }
    // Every leftover vertex still has a leftover in-arc; walking those
    // backwards must revisit a vertex, and the arc closing that loop is on a cycle.
    let mut v = (0..g.vertex_count()).find(|&v| indeg[v] > 0).unwrap();
    let mut seen_at = vec![usize::MAX; g.vertex_count()];
    let mut trail = Vec::new();
    loop {
        if seen_at[v] != usize::MAX {
            return Err(GraphError::Cycle { arc: trail[seen_at[v]] });
        }
        seen_at[v] = trail.len();
        let a = *g
            .in_arcs(VertexId(v))
            .iter()
            .find(|&&a| indeg[g.tail(a).0] > 0)
            .expect("leftover vertex keeps a leftover predecessor");
        trail.push(a);
        v = g.tail(a).0;
    }
}

pub fn is_acyclic(g: &DirectedMultigraph) -> bool {
    topological_order(g).is_ok()
}

/// Transitive reachability over a DAG as one bitset row per vertex
/// (`reach[u]` has bit `v` set iff there is a u-v path, u itself included).
#[derive(Clone, Debug)]
pub struct Reachability {
    words: usize,
    bits: Vec<u64>,
}

impl Reachability {
    pub fn of_dag(g: &DirectedMultigraph) -> Result<Self, GraphError> {
        let order = topological_order(g)?;
        let n = g.vertex_count();
        let words = n.div_ceil(64).max(1);
        let mut bits = vec![0u64; n * words];
        for &v in order.iter().rev() {
            let row = v.0 * words;
            bits[row + v.0 / 64] |= 1 << (v.0 % 64);
            for &a in g.out_arcs(v) {
                let h = g.head(a).0 * words;
                for w in 0..words {
                    bits[row + w] |= bits[h + w];
                }
            }
        }
        Ok(Reachability { words, bits })
    }

    #[inline]
    pub fn reaches(&self, from: VertexId, to: VertexId) -> bool {
        self.bits[from.0 * self.words + to.0 / 64] >> (to.0 % 64) & 1 == 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, arcs: &[(usize, usize)]) -> DirectedMultigraph {
        DirectedMultigraph::from_arcs(n, arcs).unwrap()
    }

    fn assert_partition(graph: &DirectedMultigraph, trails: &[ClosedTrail]) {
        let mut all: Vec<ArcId> = trails.iter().flat_map(|t| t.arcs.iter().copied()).collect();
        all.sort();
        assert_eq!(all, graph.arc_ids().collect::<Vec<_>>());
        for t in trails {
            assert!(t.is_closed_trail_in(graph), "{t:?}");
        }
    }

    #[test]
    fn eulerian_examples() {
        assert!(is_eulerian(&g(2, &[(0, 1), (1, 0)])));
        assert!(!is_eulerian(&g(2, &[(0, 1)])));
        assert!(!is_eulerian(&g(4, &[(0, 1), (1, 0), (2, 3), (3, 2)])));
        // isolated vertex 2 is ignored
        assert!(is_eulerian(&g(3, &[(0, 1), (1, 0)])));
        assert!(is_eulerian(&g(3, &[])));
    }

    #[test]
    fn decompose_two_cycle() {
        let graph = g(2, &[(0, 1), (1, 0)]);
        let trails = decompose_into_closed_trails(&graph).unwrap();
        assert_eq!(trails.len(), 1);
        assert_eq!(trails[0].len(), 2);
    }

    #[test]
    fn decompose_disjoint_cycles() {
        let graph = g(4, &[(0, 1), (1, 0), (2, 3), (3, 2)]);
        let trails = decompose_into_closed_trails(&graph).unwrap();
        assert_eq!(trails.len(), 2);
        assert_partition(&graph, &trails);
    }

    /// Every closed-trail decomposition of a balanced graph comes from choosing,
    /// at each vertex, a bijection from in-arcs to out-arcs. Enumerate them all.
    fn all_decompositions(graph: &DirectedMultigraph) -> Vec<Vec<Vec<ArcId>>> {
        fn perms(items: &[ArcId]) -> Vec<Vec<ArcId>> {
            if items.is_empty() {
                return vec![vec![]];
            }
            let mut out = Vec::new();
            for i in 0..items.len() {
                let mut rest = items.to_vec();
                let x = rest.remove(i);
                for mut p in perms(&rest) {
                    p.insert(0, x);
                    out.push(p);
                }
            }
            out
        }
        let mut choices: Vec<Vec<(Vec<ArcId>, Vec<ArcId>)>> = Vec::new();
        for v in graph.vertices() {
            let ins = graph.in_arcs(v).to_vec();
            choices.push(perms(graph.out_arcs(v)).into_iter().map(|p| (ins.clone(), p)).collect());
        }
        let mut results = BTreeSet::new();
        let mut idx = vec![0usize; choices.len()];
        loop {
            let mut succ = vec![ArcId(0); graph.arc_count()];
            for (v, c) in choices.iter().enumerate() {
                let (ins, outs) = &c[idx[v]];
                for (i, o) in ins.iter().zip(outs) {
                    succ[i.0] = *o;
                }
            }
            let mut seen = vec![false; graph.arc_count()];
            let mut trails = Vec::new();
            for a in graph.arc_ids() {
                if seen[a.0] {
                    continue;
                }
                let mut t = Vec::new();
                let mut x = a;
                while !seen[x.0] {
                    seen[x.0] = true;
                    t.push(x);
                    x = succ[x.0];
                }
                trails.push(canonical_rotation(t));
            }
            trails.sort();
            results.insert(trails);
            let mut k = 0;
            loop {
                if k == idx.len() {
                    return results.into_iter().collect();
                }
                idx[k] += 1;
                if idx[k] < choices[k].len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    fn canonical_rotation(t: Vec<ArcId>) -> Vec<ArcId> {
        let p = (0..t.len()).min_by_key(|&i| t[i]).unwrap_or(0);
        t[p..].iter().chain(&t[..p]).copied().collect()
    }

    #[test]
    fn figure_eight_is_among_all_decompositions() {
        // u=0, v=1, w=2: u->v, v->u, u->w, w->u
        let graph = g(3, &[(0, 1), (1, 0), (0, 2), (2, 0)]);
        let all = all_decompositions(&graph);
        // one 4-trail and the split into two 2-trails
        assert_eq!(all.len(), 2);
        let mut ours: Vec<Vec<ArcId>> =
            decompose_into_closed_trails(&graph).unwrap().into_iter().map(|t| canonical_rotation(t.arcs)).collect();
        ours.sort();
        assert!(all.contains(&ours));
    }

    #[test]
    fn decompose_rejects_unbalanced() {
        let err = decompose_into_closed_trails(&g(2, &[(0, 1)])).unwrap_err();
        assert!(matches!(err, GraphError::Unbalanced { vertex: VertexId(0), .. }));
    }

    #[test]
    fn topological_examples() {
        assert_eq!(topological_order(&g(3, &[(0, 1), (1, 2)])).unwrap(), vec![VertexId(0), VertexId(1), VertexId(2)]);
        assert_eq!(topological_order(&g(3, &[])).unwrap().len(), 3);
        let err = topological_order(&g(3, &[(0, 1), (1, 2), (2, 1)])).unwrap_err();
        match err {
            GraphError::Cycle { arc } => assert!(arc == ArcId(1) || arc == ArcId(2)),
            e => panic!("{e}"),
        }
    }

    #[test]
    fn reachability_matches_paths() {
        let graph = g(4, &[(0, 1), (1, 2), (3, 2)]);
        let r = Reachability::of_dag(&graph).unwrap();
        assert!(r.reaches(VertexId(0), VertexId(2)));
        assert!(!r.reaches(VertexId(2), VertexId(0)));
        assert!(!r.reaches(VertexId(0), VertexId(3)));
        assert!(r.reaches(VertexId(3), VertexId(3)));
    }

    #[test]
    fn json_shape() {
        let graph = g(2, &[(0, 1), (1, 0)]);
        let s = serde_json::to_string(&graph).unwrap();
        assert_eq!(s, r#"{"vertices":[0,1],"arcs":[[0,0,1],[1,1,0]]}"#);
        let back: DirectedMultigraph = serde_json::from_str(r#"{"vertices":[1,0],"arcs":[[1,1,0],[0,0,1]]}"#).unwrap();
        assert_eq!(back, graph);
        assert!(serde_json::from_str::<DirectedMultigraph>(r#"{"vertices":[0],"arcs":[[0,0,1]]}"#).is_err());
        assert!(serde_json::from_str::<DirectedMultigraph>(r#"{"vertices":[0,1],"arcs":[[0,0,1],[0,1,0]]}"#).is_err());
    }
}
