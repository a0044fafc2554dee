//! Exact feasibility test over walk configurations.
//!
//! A configuration records, for every arc, the slack of the airplane flying it
//! today. One day later every airplane moves to an out-arc of the vertex it
//! reached, so a step is a bijection of arcs respecting incidence. The instance
//! admits a (possibly non-absolutely) periodic solution iff some run from the
//! all-ones configuration can continue forever; since the reachable state
//! space is finite this is a greatest fixed point computation.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{cyclic_gaps, PeriodicError, PeriodicInstance};
use crate::graph::{ArcId, VertexId};
use crate::perm::distinct_permutations;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleLimits {
    pub max_arcs: usize,
    pub max_states: usize,
    /// Expand each BFS level on the rayon pool.
    pub parallel: bool,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_arcs: 12, max_states: 2_000_000, parallel: false }
    }
}

/// Slack per arc, indexed by arc id.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WalkConfiguration {
    pub slack: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleWitness {
    pub cycle: Vec<WalkConfiguration>,
    /// `bijections[t][a]` is the arc flown on day `t + 1` by the airplane on
    /// arc `a` in `cycle[t]` (indices modulo the cycle length).
    pub bijections: Vec<Vec<ArcId>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleStats {
    pub reachable_states: usize,
    pub transitions: usize,
    pub fixpoint_states: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleOutcome {
    pub witness: Option<OracleWitness>,
    pub stats: OracleStats,
}

impl OracleOutcome {
    pub fn feasible(&self) -> bool {
        self.witness.is_some()
    }
}

/// One airplane's infinite route: `arcs` repeated forever.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicWalk {
    /// Arc occupied on day 0.
    pub slot: ArcId,
    pub arcs: Vec<ArcId>,
}

type State = Box<[u8]>;

struct Explorer<'a> {
    inst: &'a PeriodicInstance,
    gamma: u8,
}

impl Explorer<'_> {
    /// Successor states, sorted and deduplicated.
    fn successors(&self, s: &[u8]) -> Vec<State> {
        let g = self.inst.graph();
        let mut choices: Vec<(VertexId, Vec<Vec<u8>>)> = Vec::new();
        for v in g.vertices() {
            let ins = g.in_arcs(v);
            if ins.is_empty() {
                continue;
            }
            let base = self.inst.is_base(v);
            let mut vals = Vec::with_capacity(ins.len());
            for &a in ins {
                let x = if base { 1 } else { s[a.0] + 1 };
                if x > self.gamma {
                    return Vec::new();
                }
                vals.push(x);
            }
            choices.push((v, distinct_permutations(&vals)));
        }
        let mut out = Vec::new();
        let mut idx = vec![0usize; choices.len()];
        let mut next = vec![0u8; s.len()];
        loop {
            for (k, (v, perms)) in choices.iter().enumerate() {
                for (&b, &x) in g.out_arcs(*v).iter().zip(&perms[idx[k]]) {
                    next[b.0] = x;
                }
            }
            out.push(next.clone().into_boxed_slice());
            let mut k = 0;
            loop {
                if k == idx.len() {
                    out.sort_unstable();
                    out.dedup();
                    return out;
                }
                idx[k] += 1;
                if idx[k] < choices[k].1.len() {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
        }
    }

    /// Matches airplanes at each vertex between two consecutive configurations.
    fn bijection(&self, s: &[u8], t: &[u8]) -> Vec<ArcId> {
        let g = self.inst.graph();
        let mut sigma = vec![ArcId(usize::MAX); s.len()];
        for v in g.vertices() {
            let base = self.inst.is_base(v);
            let mut taken = vec![false; g.out_degree(v)];
            for &a in g.in_arcs(v) {
                let x = if base { 1 } else { s[a.0] + 1 };
                let j = (0..taken.len())
                    .find(|&j| !taken[j] && t[g.out_arcs(v)[j].0] == x)
                    .expect("consecutive states are linked by a bijection");
                taken[j] = true;
                sigma[a.0] = g.out_arcs(v)[j];
            }
        }
        sigma
    }
}

pub fn feasibility_oracle(inst: &PeriodicInstance, limits: &OracleLimits) -> Result<OracleOutcome, PeriodicError> {
    let g = inst.graph();
    let m = g.arc_count();
    if m > limits.max_arcs {
        return Err(PeriodicError::TooManyArcs { arcs: m, cap: limits.max_arcs });
    }
    if inst.gamma() > 250 {
        return Err(PeriodicError::UnsupportedGamma(inst.gamma()));
    }
    let ex = Explorer { inst, gamma: inst.gamma() as u8 };

    let init: State = vec![1u8; m].into_boxed_slice();
    let mut index: HashMap<State, u32> = HashMap::new();
    let mut states: Vec<State> = vec![init.clone()];
    index.insert(init, 0);
    let mut succ: Vec<Vec<u32>> = Vec::new();
    let mut frontier: Vec<u32> = vec![0];
    let mut transitions = 0usize;
    while !frontier.is_empty() {
        let expanded: Vec<Vec<State>> = if limits.parallel {
            frontier.par_iter().map(|&i| ex.successors(&states[i as usize])).collect()
        } else {
            frontier.iter().map(|&i| ex.successors(&states[i as usize])).collect()
        };
        let mut next_frontier = Vec::new();
        for (&i, outs) in frontier.iter().zip(expanded) {
            let mut ids = Vec::with_capacity(outs.len());
            for t in outs {
                let id = match index.get(&t) {
                    Some(&id) => id,
                    None => {
                        if states.len() >= limits.max_states {
                            return Err(PeriodicError::TooManyStates { cap: limits.max_states });
                        }
                        let id = states.len() as u32;
                        states.push(t.clone());
                        index.insert(t, id);
                        next_frontier.push(id);
                        id
                    }
                };
                ids.push(id);
            }
            transitions += ids.len();
            debug_assert_eq!(succ.len(), i as usize);
            succ.push(ids);
        }
        frontier = next_frontier;
    }

    // Greatest fixed point: repeatedly drop states with no surviving successor.
    let n = states.len();
    let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (i, outs) in succ.iter().enumerate() {
        for &j in outs {
            preds[j as usize].push(i as u32);
        }
    }
    let mut live_out: Vec<usize> = succ.iter().map(Vec::len).collect();
    let mut alive = vec![true; n];
    let mut queue: Vec<usize> = (0..n).filter(|&i| live_out[i] == 0).collect();
    for &i in &queue {
        alive[i] = false;
    }
    while let Some(j) = queue.pop() {
        for &p in &preds[j] {
            let p = p as usize;
            live_out[p] -= 1;
            if live_out[p] == 0 && alive[p] {
                alive[p] = false;
                queue.push(p);
            }
        }
    }
    let stats = OracleStats { reachable_states: n, transitions, fixpoint_states: alive.iter().filter(|&&a| a).count() };
    let Some(start) = (0..n).find(|&i| alive[i]) else {
        return Ok(OracleOutcome { witness: None, stats });
    };

    let mut seen_at: HashMap<usize, usize> = HashMap::new();
    let mut path = Vec::new();
    let mut cur = start;
    while !seen_at.contains_key(&cur) {
        seen_at.insert(cur, path.len());
        path.push(cur);
        cur = succ[cur].iter().map(|&j| j as usize).find(|&j| alive[j]).expect("live state keeps a live successor");
    }
    let cycle_ids = &path[seen_at[&cur]..];
    let len = cycle_ids.len();
    let bijections = (0..len).map(|t| ex.bijection(&states[cycle_ids[t]], &states[cycle_ids[(t + 1) % len]])).collect();
    let cycle =
        cycle_ids.iter().map(|&i| WalkConfiguration { slack: states[i].iter().map(|&x| x as u32).collect() }).collect();
    Ok(OracleOutcome { witness: Some(OracleWitness { cycle, bijections }), stats })
}

/// Unrolls a witness cycle into one periodic walk per arc occupied on day 0.
pub fn extract_periodic_walks(witness: &OracleWitness) -> Vec<PeriodicWalk> {
    let len = witness.bijections.len();
    let m = witness.cycle.first().map_or(0, |c| c.slack.len());
    (0..m)
        .map(|a| {
            let start = ArcId(a);
            let mut arcs = Vec::new();
            let (mut x, mut t) = (start, 0);
            loop {
                arcs.push(x);
                x = witness.bijections[t][x.0];
                t = (t + 1) % len;
                if t == 0 && x == start {
                    break;
                }
            }
            PeriodicWalk { slot: start, arcs }
        })
        .collect()
}

/// Largest base-to-base gap along a periodic walk, or a description of why
/// the walk is not a valid maintenance route.
pub fn validate_periodic_walk(inst: &PeriodicInstance, walk: &PeriodicWalk) -> Result<usize, String> {
    let g = inst.graph();
    if walk.arcs.is_empty() {
        return Err("empty walk".into());
    }
    if let Some(a) = walk.arcs.iter().find(|a| a.0 >= g.arc_count()) {
        return Err(format!("unknown arc {a}"));
    }
    let len = walk.arcs.len();
    for i in 0..len {
        if g.head(walk.arcs[i]) != g.tail(walk.arcs[(i + 1) % len]) {
            return Err(format!("arcs at positions {i} and {} do not chain", (i + 1) % len));
        }
    }
    match cyclic_gaps(inst, &walk.arcs) {
        None => Err("walk never reaches a base".into()),
        Some((_, over)) if !over.is_empty() => {
            Err(format!("gap of {} arcs starting at position {}", over[0].1, over[0].0))
        }
        Some((max, _)) => Ok(max),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodic::tests::instance;

    fn run(inst: &PeriodicInstance) -> OracleOutcome {
        feasibility_oracle(inst, &OracleLimits::default()).unwrap()
    }

    #[test]
    fn two_cycle_gamma1_infeasible() {
        assert!(!run(&instance(2, &[(0, 1), (1, 0)], &[0], 1)).feasible());
    }

    #[test]
    fn two_cycle_gamma2_self_loop_state() {
        let out = run(&instance(2, &[(0, 1), (1, 0)], &[0], 2));
        let w = out.witness.unwrap();
        // start (1,1) -> (1,2) -> (1,2)
        assert_eq!(out.stats.reachable_states, 2);
        assert_eq!(w.cycle, vec![WalkConfiguration { slack: vec![1, 2] }]);
        assert_eq!(w.bijections, vec![vec![ArcId(1), ArcId(0)]]);
        let walks = extract_periodic_walks(&w);
        assert_eq!(walks.len(), 2);
        assert_eq!(walks[0].arcs, vec![ArcId(0), ArcId(1)]);
        let inst = instance(2, &[(0, 1), (1, 0)], &[0], 2);
        for walk in &walks {
            assert_eq!(validate_periodic_walk(&inst, walk), Ok(2));
        }
    }

    #[test]
    fn walks_validate_on_larger_instance() {
        let inst = instance(3, &[(0, 1), (1, 2), (2, 0), (0, 2), (2, 1), (1, 0)], &[0], 4);
        let mut limits = OracleLimits::default();
        for parallel in [false, true] {
            limits.parallel = parallel;
            let w = feasibility_oracle(&inst, &limits).unwrap().witness.unwrap();
            let walks = extract_periodic_walks(&w);
            assert_eq!(walks.len(), 6);
            for walk in &walks {
                assert!(walk.arcs.len() % w.cycle.len() == 0);
                assert!(validate_periodic_walk(&inst, walk).unwrap() <= 4);
            }
        }
    }

    #[test]
    fn caps_are_enforced() {
        let inst = instance(3, &[(0, 1), (1, 2), (2, 0)], &[0], 3);
        let limits = OracleLimits { max_arcs: 2, ..Default::default() };
        assert_eq!(feasibility_oracle(&inst, &limits).unwrap_err(), PeriodicError::TooManyArcs { arcs: 3, cap: 2 });
        let limits = OracleLimits { max_states: 1, ..Default::default() };
        assert!(matches!(feasibility_oracle(&inst, &limits), Err(PeriodicError::TooManyStates { .. })));
    }

    #[test]
    fn empty_graph_is_feasible() {
        let out = run(&instance(1, &[], &[], 1));
        assert!(out.feasible());
        assert!(extract_periodic_walks(out.witness.as_ref().unwrap()).is_empty());
    }
}
