//! The bipartite cover graph H and the pairing construction for gamma = 4.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{solve::assemble_from_segments, AbsolutelyPeriodicSolution, PeriodicError, PeriodicInstance};
use crate::flow::FlowNetwork;
use crate::graph::{ArcId, VertexId};

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Token {
    In(VertexId),
    Out(VertexId),
}

impl Token {
    pub fn vertex(self) -> VertexId {
        match self {
            Token::In(v) | Token::Out(v) => v,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CoverEdge {
    pub arc: ArcId,
    pub token: Token,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BipartiteCoverGraph {
    /// Arcs with no endpoint in B, ascending.
    pub left: Vec<ArcId>,
    /// `In(v), Out(v)` for each non-base vertex, ascending by vertex.
    pub tokens: Vec<Token>,
    pub edges: Vec<CoverEdge>,
    /// k_v per non-base vertex.
    pub demands: BTreeMap<VertexId, usize>,
}

impl BipartiteCoverGraph {
    pub fn demand(&self, t: Token) -> usize {
        self.demands.get(&t.vertex()).copied().unwrap_or(0)
    }

    pub fn total_demand(&self) -> usize {
        self.tokens.iter().map(|&t| self.demand(t)).sum()
    }

    /// Checks that `f` is a subset of the edges covering each left vertex at
    /// most once and each token exactly its demand.
    pub fn check_cover(&self, f: &[CoverEdge]) -> Result<(), String> {
        let mut left_use: BTreeMap<ArcId, usize> = BTreeMap::new();
        let mut token_use: BTreeMap<Token, usize> = BTreeMap::new();
        for e in f {
            if !self.edges.contains(e) {
                return Err(format!("({}, {:?}) is not an edge of H", e.arc, e.token));
            }
            *left_use.entry(e.arc).or_default() += 1;
            *token_use.entry(e.token).or_default() += 1;
        }
        if let Some((a, _)) = left_use.iter().find(|(_, &c)| c > 1) {
            return Err(format!("arc {a} is covered more than once"));
        }
        for &t in &self.tokens {
            let got = token_use.get(&t).copied().unwrap_or(0);
            if got != self.demand(t) {
                return Err(format!("token {t:?} covered {got} times, demand {}", self.demand(t)));
            }
        }
        Ok(())
    }
}

/// k_v = max(0, deg+(v) - b_v^- - b_v^+).
pub fn compute_kv(inst: &PeriodicInstance, v: VertexId) -> Result<usize, PeriodicError> {
    if inst.is_base(v) {
        return Err(PeriodicError::BaseVertex(v));
    }
    let deg = inst.graph().out_degree(v);
    Ok(deg.saturating_sub(inst.arcs_from_bases(v) + inst.arcs_to_bases(v)))
}

pub fn build_bipartite_h(inst: &PeriodicInstance) -> BipartiteCoverGraph {
    let g = inst.graph();
    let left: Vec<ArcId> = g.arc_ids().filter(|&a| !inst.is_base(g.tail(a)) && !inst.is_base(g.head(a))).collect();
    let mut tokens = Vec::new();
    let mut demands = BTreeMap::new();
    for v in inst.non_bases() {
        tokens.push(Token::In(v));
        tokens.push(Token::Out(v));
        demands.insert(v, compute_kv(inst, v).expect("non-base"));
    }
    let edges = left
        .iter()
        .flat_map(|&a| {
            [CoverEdge { arc: a, token: Token::In(g.head(a)) }, CoverEdge { arc: a, token: Token::Out(g.tail(a)) }]
        })
        .collect();
    BipartiteCoverGraph { left, tokens, edges, demands }
}

/// Maximum flow of the cover network and the edges carrying flow.
pub fn cover_flow(h: &BipartiteCoverGraph) -> (u64, Vec<CoverEdge>) {
    let source = 0;
    let token_node = |i: usize| 1 + i;
    let left_base = 1 + h.tokens.len();
    let sink = left_base + h.left.len();
    let mut net = FlowNetwork::new(sink + 1);
    let token_index: BTreeMap<Token, usize> = h.tokens.iter().enumerate().map(|(i, &t)| (t, i)).collect();
    let left_index: BTreeMap<ArcId, usize> = h.left.iter().enumerate().map(|(i, &a)| (a, i)).collect();
    for (i, &t) in h.tokens.iter().enumerate() {
        net.add_edge(source, token_node(i), h.demand(t) as u64);
    }
    let handles: Vec<_> = h
        .edges
        .iter()
        .map(|e| net.add_edge(token_node(token_index[&e.token]), left_base + left_index[&e.arc], 1))
        .collect();
    for i in 0..h.left.len() {
        net.add_edge(left_base + i, sink, 1);
    }
    let value = net.max_flow(source, sink);
    let mut f: Vec<CoverEdge> =
        h.edges.iter().zip(&handles).filter(|(_, &hd)| net.flow(hd) > 0).map(|(&e, _)| e).collect();
    f.sort();
    (value, f)
}

/// A cover F meeting every token's demand exactly, if one exists.
pub fn find_cover_f(h: &BipartiteCoverGraph) -> Option<Vec<CoverEdge>> {
    let (value, f) = cover_flow(h);
    (value == h.total_demand() as u64).then_some(f)
}

/// Builds a solution for gamma = 4 from a cover F by pairing consecutive arcs
/// at every non-base vertex, then chaining the pairs into base-to-base segments.
pub fn build_trails_from_cover(
    inst: &PeriodicInstance,
    f: &[CoverEdge],
) -> Result<AbsolutelyPeriodicSolution, PeriodicError> {
    if inst.gamma() != 4 {
        return Err(PeriodicError::UnsupportedGamma(inst.gamma()));
    }
    let h = build_bipartite_h(inst);
    h.check_cover(f).map_err(PeriodicError::InvalidCover)?;
    let g = inst.graph();
    let m = g.arc_count();
    let mut succ: Vec<Option<ArcId>> = vec![None; m];
    let mut has_pred = vec![false; m];
    let mut in_f = vec![false; m];
    let mut out_f = vec![false; m];
    for e in f {
        match e.token {
            Token::In(_) => in_f[e.arc.0] = true,
            Token::Out(_) => out_f[e.arc.0] = true,
        }
    }
    for v in inst.non_bases() {
        let fail = |step: u8, detail: String| PeriodicError::Pairing { vertex: v, step, detail };
        let ins = g.in_arcs(v);
        let outs = g.out_arcs(v);
        let from_b: Vec<ArcId> = ins.iter().copied().filter(|&a| inst.is_base(g.tail(a))).collect();
        let to_b: Vec<ArcId> = outs.iter().copied().filter(|&a| inst.is_base(g.head(a))).collect();
        let (mut from_b_next, mut to_b_next) = (0, 0);

        // (1) F-covered in-arcs with F-covered out-arcs
        let a_minus: Vec<ArcId> = ins.iter().copied().filter(|&a| in_f[a.0]).collect();
        let a_plus: Vec<ArcId> = outs.iter().copied().filter(|&a| out_f[a.0]).collect();
        if a_minus.len() != a_plus.len() {
            return Err(fail(1, format!("{} covered in-arcs vs {} covered out-arcs", a_minus.len(), a_plus.len())));
        }
        for (&a, &b) in a_minus.iter().zip(&a_plus) {
            succ[a.0] = Some(b);
            has_pred[b.0] = true;
        }
        // (2) remaining out-arcs not into B get a feeder from B
        for &b in outs {
            if out_f[b.0] || inst.is_base(g.head(b)) {
                continue;
            }
            let Some(&a) = from_b.get(from_b_next) else {
                return Err(fail(2, format!("no arc from a base left for {b}")));
            };
            from_b_next += 1;
            succ[a.0] = Some(b);
            has_pred[b.0] = true;
        }
        // (3) remaining in-arcs not from B get an exit to B
        for &a in ins {
            if in_f[a.0] || inst.is_base(g.tail(a)) {
                continue;
            }
            let Some(&b) = to_b.get(to_b_next) else {
                return Err(fail(3, format!("no arc into a base left for {a}")));
            };
            to_b_next += 1;
            succ[a.0] = Some(b);
            has_pred[b.0] = true;
        }
        // (4) leftover B->v with v->B
        let rest_in = &from_b[from_b_next..];
        let rest_out = &to_b[to_b_next..];
        if rest_in.len() != rest_out.len() {
            return Err(fail(4, format!("{} arcs from bases vs {} arcs to bases left", rest_in.len(), rest_out.len())));
        }
        for (&a, &b) in rest_in.iter().zip(rest_out) {
            succ[a.0] = Some(b);
            has_pred[b.0] = true;
        }
    }
    let segments = chain_segments(inst, &succ)?;
    assemble_from_segments(inst, segments)
}

/// Follows successor links from every arc leaving a base; arcs inside B are
/// single-arc segments.
pub(crate) fn chain_segments(
    inst: &PeriodicInstance,
    succ: &[Option<ArcId>],
) -> Result<Vec<Vec<ArcId>>, PeriodicError> {
    let g = inst.graph();
    let mut used = vec![false; g.arc_count()];
    let mut segments = Vec::new();
    for a in g.arc_ids() {
        if !inst.is_base(g.tail(a)) {
            continue;
        }
        let mut seg = vec![a];
        used[a.0] = true;
        let mut x = a;
        while !inst.is_base(g.head(x)) {
            let next = succ[x.0].ok_or_else(|| PeriodicError::Internal(format!("arc {x} has no successor")))?;
            if used[next.0] {
                return Err(PeriodicError::Internal(format!("arc {next} paired twice")));
            }
            used[next.0] = true;
            seg.push(next);
            x = next;
        }
        segments.push(seg);
    }
    if let Some(a) = g.arc_ids().find(|a| !used[a.0]) {
        return Err(PeriodicError::Internal(format!("arc {a} is on no base-to-base segment")));
    }
    Ok(segments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodic::tests::instance;
    use crate::periodic::validate_absolutely_periodic;

    // b=0, v=1, w=2: b->v, v->w, w->b, b->w, w->v, v->b
    fn six_arc() -> PeriodicInstance {
        instance(3, &[(0, 1), (1, 2), (2, 0), (0, 2), (2, 1), (1, 0)], &[0], 4)
    }

    #[test]
    fn kv_formula() {
        // v=1: deg+ 3 (1->0, 1->2, 1->3), b- 1, b+ 1
        let inst = instance(4, &[(0, 1), (1, 0), (1, 2), (2, 1), (1, 3), (3, 1)], &[0], 4);
        assert_eq!(compute_kv(&inst, VertexId(1)).unwrap(), 1);
        let inst = six_arc();
        assert_eq!(compute_kv(&inst, VertexId(1)).unwrap(), 0);
        assert_eq!(compute_kv(&inst, VertexId(0)).unwrap_err(), PeriodicError::BaseVertex(VertexId(0)));
        let inst = instance(2, &[(0, 1), (1, 0)], &[], 4);
        assert_eq!(compute_kv(&inst, VertexId(0)).unwrap(), 1);
    }

    #[test]
    fn h_of_six_arc_example() {
        let h = build_bipartite_h(&six_arc());
        assert_eq!(h.left, vec![ArcId(1), ArcId(4)]);
        let v = VertexId(1);
        let w = VertexId(2);
        assert_eq!(
            h.edges,
            vec![
                CoverEdge { arc: ArcId(1), token: Token::In(w) },
                CoverEdge { arc: ArcId(1), token: Token::Out(v) },
                CoverEdge { arc: ArcId(4), token: Token::In(v) },
                CoverEdge { arc: ArcId(4), token: Token::Out(w) },
            ]
        );
        assert_eq!(h.demand(Token::In(v)), 0);
        assert_eq!(h.demand(Token::Out(w)), 0);
        assert_eq!(find_cover_f(&h), Some(vec![]));
    }

    #[test]
    fn h_when_all_bases_or_two_cycle() {
        let inst = instance(2, &[(0, 1), (1, 0)], &[0, 1], 4);
        let h = build_bipartite_h(&inst);
        assert!(h.left.is_empty() && h.tokens.is_empty());
        let inst = instance(2, &[(0, 1), (1, 0)], &[0], 4);
        let h = build_bipartite_h(&inst);
        assert!(h.left.is_empty());
        assert_eq!(h.tokens, vec![Token::In(VertexId(1)), Token::Out(VertexId(1))]);
        assert_eq!(h.demand(Token::In(VertexId(1))), 0);
    }

    #[test]
    fn single_left_vertex_cannot_serve_two_tokens() {
        // loop at v with no bases anywhere: k_v = 1, one left arc
        let inst = instance(1, &[(0, 0)], &[], 4);
        let h = build_bipartite_h(&inst);
        assert_eq!(h.total_demand(), 2);
        assert_eq!(find_cover_f(&h), None);
        assert_eq!(cover_flow(&h).0, 1);
    }

    #[test]
    fn trails_from_empty_cover() {
        let inst = six_arc();
        let sol = build_trails_from_cover(&inst, &[]).unwrap();
        let d = validate_absolutely_periodic(&inst, &sol);
        assert!(d.passed(), "{d:?}");
        assert!(d.max_gap.unwrap() <= 4);

        let inst = instance(2, &[(0, 1), (1, 0)], &[0], 4);
        let sol = build_trails_from_cover(&inst, &[]).unwrap();
        assert_eq!(sol.trails.len(), 1);
        assert_eq!(sol.trails[0].arcs, vec![ArcId(0), ArcId(1)]);
    }

    #[test]
    fn pairing_failure_names_vertex() {
        let inst = six_arc();
        let bogus = [CoverEdge { arc: ArcId(1), token: Token::Out(VertexId(1)) }];
        assert!(matches!(build_trails_from_cover(&inst, &bogus), Err(PeriodicError::InvalidCover(_))));
    }
}
