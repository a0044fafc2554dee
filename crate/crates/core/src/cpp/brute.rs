//! Exhaustive reference solver.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::{CppError, CppInstance, CppStructure, PathPartition};
use crate::graph::{topological_order, ArcId, ArcPath, VertexId};
use crate::perm::distinct_permutations;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BruteForceLimits {
    pub max_arcs: usize,
}

impl Default for BruteForceLimits {
    fn default() -> Self {
        BruteForceLimits { max_arcs: 24 }
    }
}

struct Search<'a> {
    inst: &'a CppInstance,
    st: CppStructure,
    order: Vec<VertexId>,
    /// Counter carried along each arc after traversing it; 0 while unassigned.
    counter: Vec<u32>,
    /// Counter entering each out-arc of each inner vertex.
    chosen: Vec<Vec<u32>>,
    dead: HashSet<(usize, Vec<u32>)>,
}

impl Search<'_> {
    fn cut_key(&self, pos: usize) -> (usize, Vec<u32>) {
        // counters of assigned arcs whose heads are not yet processed
        let g = &self.inst.graph;
        let later: Vec<bool> = {
            let mut l = vec![false; g.vertex_count()];
            for v in &self.order[pos..] {
                l[v.0] = true;
            }
            l
        };
        let key =
            g.arc_ids().filter(|&a| self.counter[a.0] > 0 && later[g.head(a).0]).map(|a| self.counter[a.0]).collect();
        (pos, key)
    }

    fn run(&mut self, pos: usize) -> bool {
        let Some(&v) = self.order.get(pos) else {
            return true;
        };
        let g = &self.inst.graph;
        let gamma = self.inst.gamma;
        if self.st.is_sink[v.0] {
            return self.run(pos + 1);
        }
        if self.st.is_source[v.0] {
            let a = g.out_arcs(v)[0];
            let c = self.st.step(1, a);
            if c > gamma {
                return false;
            }
            self.counter[a.0] = c;
            if self.run(pos + 1) {
                return true;
            }
            self.counter[a.0] = 0;
            return false;
        }
        let key = self.cut_key(pos);
        if self.dead.contains(&key) {
            return false;
        }
        let ins: Vec<u32> = g.in_arcs(v).iter().map(|a| self.counter[a.0]).collect();
        let outs = g.out_arcs(v).to_vec();
        'perm: for p in distinct_permutations(&ins) {
            for (&a, &c) in outs.iter().zip(&p) {
                let next = self.st.step(c, a);
                if next > gamma {
                    continue 'perm;
                }
                self.counter[a.0] = next;
            }
            if self.run(pos + 1) {
                self.chosen[v.0] = p;
                return true;
            }
        }
        for a in &outs {
            self.counter[a.0] = 0;
        }
        self.dead.insert(key);
        false
    }

    fn paths(&self) -> PathPartition {
        let g = &self.inst.graph;
        let mut succ: Vec<Option<ArcId>> = vec![None; g.arc_count()];
        for v in g.vertices() {
            if self.st.is_source[v.0] || self.st.is_sink[v.0] {
                continue;
            }
            let outs = g.out_arcs(v);
            let mut taken = vec![false; outs.len()];
            for &a in g.in_arcs(v) {
                let j = (0..outs.len())
                    .find(|&j| !taken[j] && self.chosen[v.0][j] == self.counter[a.0])
                    .expect("assignment is a permutation of incoming counters");
                taken[j] = true;
                succ[a.0] = Some(outs[j]);
            }
        }
        let mut sources = self.inst.sources.clone();
        sources.sort();
        let paths = sources
            .iter()
            .map(|&s| {
                let mut arcs = vec![g.out_arcs(s)[0]];
                while let Some(next) = succ[arcs.last().unwrap().0] {
                    arcs.push(next);
                }
                ArcPath::new(arcs)
            })
            .collect();
        PathPartition { paths }
    }
}

/// Exact solver by backtracking over successor assignments in topological
/// order, memoizing failed frontiers.
pub fn brute_force_cpp(inst: &CppInstance, limits: &BruteForceLimits) -> Result<Option<PathPartition>, CppError> {
    let st = inst.structure()?;
    let m = inst.graph.arc_count();
    if m > limits.max_arcs {
        return Err(CppError::TooManyArcs { arcs: m, cap: limits.max_arcs });
    }
    let order = topological_order(&inst.graph)?;
    let mut search = Search {
        inst,
        st,
        order,
        counter: vec![0; m],
        chosen: vec![Vec::new(); inst.graph.vertex_count()],
        dead: HashSet::new(),
    };
    if !search.run(0) {
        return Ok(None);
    }
    Ok(Some(search.paths()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpp::tests::sat;
    use crate::cpp::validate_path_partition;
    use crate::graph::DirectedMultigraph;

    fn solve(inst: &CppInstance) -> Option<PathPartition> {
        let out = brute_force_cpp(inst, &BruteForceLimits::default()).unwrap();
        if let Some(pp) = &out {
            let d = validate_path_partition(inst, pp);
            assert!(d.passed(), "{d:?}");
        }
        out
    }

    #[test]
    fn sat_instance() {
        let pp = solve(&sat(2)).unwrap();
        assert_eq!(pp.paths, vec![ArcPath::new(vec![ArcId(0), ArcId(1)])]);
        assert!(solve(&sat(1)).is_none());
    }

    #[test]
    fn diamond_needs_the_right_pairing() {
        // s0 -> a (night, not maint), s1 -> a (maint); a -> t0 (night, not maint), a -> t1 (maint)
        // layers: s 0, a 1, t 2. Only one path through a may take two non-maintenance nights.
        let g = DirectedMultigraph::from_arcs(5, &[(0, 2), (1, 2), (2, 3), (2, 4)]).unwrap();
        let mut inst = CppInstance {
            graph: g,
            sources: vec![VertexId(0), VertexId(1)],
            sinks: vec![VertexId(3), VertexId(4)],
            layers: vec![vec![VertexId(2), VertexId(3), VertexId(4)]],
            maintenance_arcs: vec![ArcId(1), ArcId(3)],
            gamma: 2,
        };
        let pp = solve(&inst).unwrap();
        assert_eq!(pp.paths.len(), 2);
        // s0's counter is 2 at a, so it must leave via the maintenance arc
        assert_eq!(pp.paths[0].arcs, vec![ArcId(0), ArcId(3)]);
        inst.maintenance_arcs = vec![ArcId(1)];
        assert!(solve(&inst).is_none());
        inst.gamma = 3;
        assert!(solve(&inst).is_some());
    }

    #[test]
    fn cap_and_invalid_input() {
        let limits = BruteForceLimits { max_arcs: 1 };
        assert_eq!(brute_force_cpp(&sat(2), &limits).unwrap_err(), CppError::TooManyArcs { arcs: 2, cap: 1 });
        let mut bad = sat(2);
        bad.sources.clear();
        assert!(matches!(brute_force_cpp(&bad, &limits), Err(CppError::Invalid(_))));
    }
}
