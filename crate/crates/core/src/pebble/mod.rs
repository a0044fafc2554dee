//! The pebble game deciding constrained path partition for a fixed number of
//! sources.
//!
//! One pebble starts on every source. A vertex holding as many pebbles as its
//! outdegree sends them all along its out-arcs, one per arc. Which pebbles move
//! and when is forced; only the assignment of pebbles to arcs is free. The
//! product graph tracks, per step, how many pebbles with each counter value sit
//! on each occupied vertex.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpp::{CppError, CppInstance, CppStructure, PathPartition};
use crate::graph::{ArcId, ArcPath, Reachability, VertexId};
use crate::perm::distinct_permutations;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PebbleError {
    #[error(transparent)]
    Cpp(#[from] CppError),
    #[error("{sources} sources exceed the cap of {cap}")]
    TooManySources { sources: usize, cap: usize },
    #[error("product graph exceeds {cap} transitions")]
    TooManyTransitions { cap: usize },
    #[error("explored {transitions} transitions, above the bound r * gamma^|S| = {bound}")]
    BoundExceeded { transitions: u64, bound: u64 },
    #[error("pebble simulation inconsistency: {0}")]
    Internal(String),
    #[error("replay failed: {0}")]
    Replay(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PebbleLimits {
    pub max_sources: usize,
    pub max_transitions: usize,
}

impl Default for PebbleLimits {
    fn default() -> Self {
        PebbleLimits { max_sources: 8, max_transitions: 5_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayeredSchedule {
    /// `arc_layers[i]` is A_{i+1}, ascending.
    pub arc_layers: Vec<Vec<ArcId>>,
    /// `vertex_layers[i]` is V_i, ascending; V_0 = S.
    pub vertex_layers: Vec<Vec<VertexId>>,
    /// `movers[i]` holds the vertices emptied at step i+1.
    pub movers: Vec<Vec<VertexId>>,
}

impl LayeredSchedule {
    /// Number of steps r.
    pub fn steps(&self) -> usize {
        self.arc_layers.len()
    }
}

/// Simulates the counter-free game, checking on the way that movers are exactly
/// the minimal occupied vertices and that the A_i partition the arcs.
pub fn compute_layers(inst: &CppInstance) -> Result<LayeredSchedule, PebbleError> {
    let st = inst.structure()?;
    let g = &inst.graph;
    let reach = Reachability::of_dag(g).map_err(CppError::from)?;
    let n = g.vertex_count();
    let mut count = vec![0usize; n];
    for s in &inst.sources {
        count[s.0] = 1;
    }
    let occupied = |count: &[usize]| -> Vec<VertexId> { (0..n).filter(|&v| count[v] > 0).map(VertexId).collect() };
    let mut sched =
        LayeredSchedule { arc_layers: Vec::new(), vertex_layers: vec![occupied(&count)], movers: Vec::new() };
    let mut traversed = vec![0usize; g.arc_count()];
    loop {
        let current = sched.vertex_layers.last().unwrap();
        let movers: Vec<VertexId> =
            current.iter().copied().filter(|&v| !st.is_sink[v.0] && count[v.0] == g.out_degree(v)).collect();
        for &v in current.iter().filter(|v| !st.is_sink[v.0]) {
            let minimal = !current.iter().any(|&u| u != v && reach.reaches(u, v));
            let moves = movers.contains(&v);
            if minimal != moves {
                return Err(PebbleError::Internal(format!(
                    "step {}: {v} is {} but {}",
                    sched.steps(),
                    if minimal { "minimal" } else { "not minimal" },
                    if moves { "ready to move" } else { "not ready" }
                )));
            }
        }
        if movers.is_empty() {
            break;
        }
        if sched.steps() >= n {
            return Err(PebbleError::Internal(format!("more than {n} steps")));
        }
        let mut arcs = Vec::new();
        for &u in &movers {
            count[u.0] = 0;
            for &a in g.out_arcs(u) {
                count[g.head(a).0] += 1;
                traversed[a.0] += 1;
                arcs.push(a);
            }
        }
        arcs.sort();
        sched.arc_layers.push(arcs);
        sched.movers.push(movers);
        sched.vertex_layers.push(occupied(&count));
    }
    let last = sched.vertex_layers.last().unwrap();
    let mut sinks = inst.sinks.clone();
    sinks.sort();
    if *last != sinks {
        return Err(PebbleError::Internal(format!("game stopped on {last:?}, not on the sinks")));
    }
    if let Some(a) = (0..g.arc_count()).find(|&a| traversed[a] != 1) {
        return Err(PebbleError::Internal(format!(
            "arc a{a} traversed {} times; the A_i must partition the arcs",
            traversed[a]
        )));
    }
    Ok(sched)
}

/// Counter histograms of the occupied vertices after `step` moves.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PebbleConfiguration {
    pub step: usize,
    /// `(v, x)` with `x[q-1]` pebbles at v carrying counter q.
    pub histograms: Vec<(VertexId, Vec<u32>)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    /// Counter entering each arc of A_{step+1}, aligned with the schedule.
    pub pi: Vec<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProductGraph {
    pub gamma: u32,
    pub schedule: LayeredSchedule,
    configs: Vec<Vec<Box<[u8]>>>,
    /// `transitions[i]` links configurations of step i to step i+1.
    pub transitions: Vec<Vec<Transition>>,
}

impl ProductGraph {
    pub fn config_count(&self, step: usize) -> usize {
        self.configs[step].len()
    }

    pub fn total_configurations(&self) -> usize {
        self.configs.iter().map(Vec::len).sum()
    }

    pub fn transition_count(&self) -> u64 {
        self.transitions.iter().map(|t| t.len() as u64).sum()
    }

    pub fn configuration(&self, step: usize, index: usize) -> PebbleConfiguration {
        let gamma = self.gamma as usize;
        let raw = &self.configs[step][index];
        PebbleConfiguration {
            step,
            histograms: self.schedule.vertex_layers[step]
                .iter()
                .enumerate()
                .map(|(k, &v)| (v, raw[k * gamma..(k + 1) * gamma].iter().map(|&x| x as u32).collect()))
                .collect(),
        }
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph product {\n  rankdir=LR;\n");
        for (i, layer) in self.configs.iter().enumerate() {
            for j in 0..layer.len() {
                let c = self.configuration(i, j);
                let label: Vec<String> = c.histograms.iter().map(|(v, x)| format!("{v}:{x:?}")).collect();
                let _ =
                    writeln!(out, "  \"{i}_{j}\" [label={}];", crate::dot::quote(&format!("{i} {}", label.join(" "))));
            }
        }
        for (i, ts) in self.transitions.iter().enumerate() {
            for t in ts {
                let _ = writeln!(
                    out,
                    "  \"{i}_{}\" -> \"{}_{}\" [label={}];",
                    t.from,
                    i + 1,
                    t.to,
                    crate::dot::quote(&format!("{:?}", t.pi))
                );
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Builds the forward-reachable part of the product graph from the start
/// configuration.
pub fn build_product_graph(
    inst: &CppInstance,
    schedule: &LayeredSchedule,
    limits: &PebbleLimits,
) -> Result<ProductGraph, PebbleError> {
    let st = inst.structure()?;
    if inst.sources.len() > limits.max_sources {
        return Err(PebbleError::TooManySources { sources: inst.sources.len(), cap: limits.max_sources });
    }
    if inst.gamma > 255 {
        return Err(PebbleError::Internal("gamma above 255 is not supported".into()));
    }
    let gamma = inst.gamma as usize;
    let g = &inst.graph;
    let mut start = vec![0u8; schedule.vertex_layers[0].len() * gamma];
    for k in 0..schedule.vertex_layers[0].len() {
        start[k * gamma] = 1;
    }
    let mut configs: Vec<Vec<Box<[u8]>>> = vec![vec![start.into_boxed_slice()]];
    let mut transitions: Vec<Vec<Transition>> = Vec::new();
    let mut total = 0usize;
    for i in 0..schedule.steps() {
        let here = &schedule.vertex_layers[i];
        let next = &schedule.vertex_layers[i + 1];
        let pos_here: HashMap<VertexId, usize> = here.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let pos_next: HashMap<VertexId, usize> = next.iter().enumerate().map(|(k, &v)| (v, k)).collect();
        let arc_slot: HashMap<ArcId, usize> = schedule.arc_layers[i].iter().enumerate().map(|(k, &a)| (a, k)).collect();
        let stationary: Vec<(usize, usize)> =
            here.iter().filter_map(|v| pos_next.get(v).map(|&k| (pos_here[v], k))).collect();
        let movers = &schedule.movers[i];

        let mut index: HashMap<Box<[u8]>, usize> = HashMap::new();
        let mut layer_configs: Vec<Box<[u8]>> = Vec::new();
        let mut layer_trans = Vec::new();
        for (from, x) in configs[i].iter().enumerate() {
            // admissible counter arrangements per mover
            let mut choices: Vec<Vec<Vec<u8>>> = Vec::with_capacity(movers.len());
            for &u in movers {
                let k = pos_here[&u];
                let mut vals = Vec::new();
                for q in 0..gamma {
                    vals.extend(std::iter::repeat_n(q as u8 + 1, x[k * gamma + q] as usize));
                }
                if vals.len() != g.out_degree(u) {
                    return Err(PebbleError::Internal(format!(
                        "{u} holds {} pebbles but has outdegree {}",
                        vals.len(),
                        g.out_degree(u)
                    )));
                }
                let outs = g.out_arcs(u);
                choices.push(
                    distinct_permutations(&vals)
                        .into_iter()
                        .filter(|p| outs.iter().zip(p).all(|(&a, &q)| st.step(q as u32, a) <= inst.gamma))
                        .collect(),
                );
            }
            if choices.iter().any(Vec::is_empty) {
                continue;
            }
            let mut idx = vec![0usize; movers.len()];
            loop {
                let mut y = vec![0u8; next.len() * gamma];
                for &(kh, kn) in &stationary {
                    y[kn * gamma..(kn + 1) * gamma].copy_from_slice(&x[kh * gamma..(kh + 1) * gamma]);
                }
                let mut pi = vec![0u32; schedule.arc_layers[i].len()];
                for (m, &u) in movers.iter().enumerate() {
                    for (&a, &q) in g.out_arcs(u).iter().zip(&choices[m][idx[m]]) {
                        pi[arc_slot[&a]] = q as u32;
                        let c = st.step(q as u32, a) as usize;
                        y[pos_next[&g.head(a)] * gamma + c - 1] += 1;
                    }
                }
                let y = y.into_boxed_slice();
                let to = match index.get(&y) {
                    Some(&t) => t,
                    None => {
                        layer_configs.push(y.clone());
                        index.insert(y, layer_configs.len() - 1);
                        layer_configs.len() - 1
                    }
                };
                layer_trans.push(Transition { from, to, pi });
                total += 1;
                if total > limits.max_transitions {
                    return Err(PebbleError::TooManyTransitions { cap: limits.max_transitions });
                }
                let mut k = 0;
                loop {
                    if k == idx.len() {
                        break;
                    }
                    idx[k] += 1;
                    if idx[k] < choices[k].len() {
                        break;
                    }
                    idx[k] = 0;
                    k += 1;
                }
                if k == idx.len() {
                    break;
                }
            }
        }
        configs.push(layer_configs);
        transitions.push(layer_trans);
    }
    Ok(ProductGraph { gamma: inst.gamma, schedule: schedule.clone(), configs, transitions })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    /// 1-based step number.
    pub step: usize,
    /// Counter carried into each moving arc.
    pub assignments: Vec<(ArcId, u32)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WinningStrategy {
    pub moves: Vec<Move>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameStats {
    pub steps: usize,
    pub sources: usize,
    pub gamma: u32,
    pub configurations: usize,
    pub transitions: u64,
    /// r * gamma^|S|, saturating.
    pub bound: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GameResult {
    pub strategy: Option<WinningStrategy>,
    pub stats: GameStats,
}

pub fn solve_game(inst: &CppInstance, limits: &PebbleLimits) -> Result<GameResult, PebbleError> {
    let schedule = compute_layers(inst)?;
    let pg = build_product_graph(inst, &schedule, limits)?;
    let r = schedule.steps();
    let bound = (inst.gamma as u64)
        .checked_pow(inst.sources.len() as u32)
        .and_then(|p| p.checked_mul(r as u64))
        .unwrap_or(u64::MAX);
    let stats = GameStats {
        steps: r,
        sources: inst.sources.len(),
        gamma: inst.gamma,
        configurations: pg.total_configurations(),
        transitions: pg.transition_count(),
        bound,
    };
    if stats.transitions > bound {
        return Err(PebbleError::BoundExceeded { transitions: stats.transitions, bound });
    }
    if pg.config_count(r) == 0 {
        return Ok(GameResult { strategy: None, stats });
    }
    // walk back from the first final configuration along first-found parents
    let mut moves = Vec::with_capacity(r);
    let mut target = 0usize;
    for i in (0..r).rev() {
        let t = pg.transitions[i]
            .iter()
            .find(|t| t.to == target)
            .ok_or_else(|| PebbleError::Internal(format!("configuration {target} at step {} has no parent", i + 1)))?;
        moves.push(Move {
            step: i + 1,
            assignments: schedule.arc_layers[i].iter().copied().zip(t.pi.iter().copied()).collect(),
        });
        target = t.from;
    }
    moves.reverse();
    Ok(GameResult { strategy: Some(WinningStrategy { moves }), stats })
}

/// Replays a winning strategy with named pebbles. The pebble on the i-th
/// smallest source is pebble i; among pebbles with equal counters at a vertex
/// the smallest id takes the smallest arc.
pub fn extract_path_partition(inst: &CppInstance, strategy: &WinningStrategy) -> Result<PathPartition, PebbleError> {
    let st: CppStructure = inst.structure()?;
    let g = &inst.graph;
    let mut sources = inst.sources.clone();
    sources.sort();
    // (pebble, counter) per vertex
    let mut at: Vec<Vec<(usize, u32)>> = vec![Vec::new(); g.vertex_count()];
    for (p, s) in sources.iter().enumerate() {
        at[s.0].push((p, 1));
    }
    let mut paths: Vec<Vec<ArcId>> = vec![Vec::new(); sources.len()];
    for mv in &strategy.moves {
        let mut assignments = mv.assignments.clone();
        assignments.sort();
        let mut arrivals: Vec<(VertexId, usize, u32)> = Vec::new();
        for &(a, q) in &assignments {
            if a.0 >= g.arc_count() {
                return Err(PebbleError::Replay(format!("step {}: unknown arc {a}", mv.step)));
            }
            let u = g.tail(a);
            let slot = at[u.0]
                .iter()
                .enumerate()
                .filter(|(_, &(_, c))| c == q)
                .min_by_key(|(_, &(p, _))| p)
                .map(|(k, _)| k)
                .ok_or_else(|| {
                    PebbleError::Replay(format!("step {}: no pebble with counter {q} at {u} for {a}", mv.step))
                })?;
            let (p, _) = at[u.0].remove(slot);
            let c = st.step(q, a);
            if c > inst.gamma {
                return Err(PebbleError::Replay(format!("step {}: counter {c} on {a} exceeds gamma", mv.step)));
            }
            paths[p].push(a);
            arrivals.push((g.head(a), p, c));
        }
        for (v, p, c) in arrivals {
            at[v.0].push((p, c));
        }
    }
    for v in g.vertices() {
        if !at[v.0].is_empty() && !st.is_sink[v.0] {
            return Err(PebbleError::Replay(format!("pebbles left on {v}")));
        }
    }
    Ok(PathPartition { paths: paths.into_iter().map(ArcPath::new).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cpp::tests::sat;
    use crate::cpp::validate_path_partition;
    use crate::graph::DirectedMultigraph;

    fn v(i: usize) -> VertexId {
        VertexId(i)
    }

    fn a(i: usize) -> ArcId {
        ArcId(i)
    }

    fn diamond(maint: &[usize], gamma: u32) -> CppInstance {
        // s=0, s'=1, a=2, t=3, t'=4
        CppInstance {
            graph: DirectedMultigraph::from_arcs(5, &[(0, 2), (1, 2), (2, 3), (2, 4)]).unwrap(),
            sources: vec![v(0), v(1)],
            sinks: vec![v(3), v(4)],
            layers: vec![vec![v(2), v(3), v(4)]],
            maintenance_arcs: maint.iter().map(|&i| a(i)).collect(),
            gamma,
        }
    }

    #[test]
    fn layers_of_path() {
        let s = compute_layers(&sat(2)).unwrap();
        assert_eq!(s.arc_layers, vec![vec![a(0)], vec![a(1)]]);
        assert_eq!(s.vertex_layers, vec![vec![v(0)], vec![v(1)], vec![v(2)]]);
    }

    #[test]
    fn layers_of_disjoint_paths() {
        let inst = CppInstance {
            graph: DirectedMultigraph::from_arcs(4, &[(0, 2), (1, 3)]).unwrap(),
            sources: vec![v(0), v(1)],
            sinks: vec![v(2), v(3)],
            layers: vec![],
            maintenance_arcs: vec![],
            gamma: 1,
        };
        let s = compute_layers(&inst).unwrap();
        assert_eq!(s.steps(), 1);
        assert_eq!(s.arc_layers, vec![vec![a(0), a(1)]]);
    }

    #[test]
    fn layers_of_diamond() {
        let s = compute_layers(&diamond(&[], 5)).unwrap();
        assert_eq!(s.arc_layers, vec![vec![a(0), a(1)], vec![a(2), a(3)]]);
    }

    #[test]
    fn staggered_arrivals_accumulate() {
        // s1 -> v, s2 -> x -> v, v -> t1, v -> t2; v receives at steps 1 and 2
        // s1=0, s2=1, x=2, v=3, t1=4, t2=5
        let inst = CppInstance {
            graph: DirectedMultigraph::from_arcs(6, &[(0, 3), (1, 2), (2, 3), (3, 4), (3, 5)]).unwrap(),
            sources: vec![v(0), v(1)],
            sinks: vec![v(4), v(5)],
            layers: vec![],
            maintenance_arcs: vec![],
            gamma: 2,
        };
        let s = compute_layers(&inst).unwrap();
        assert_eq!(s.vertex_layers[1], vec![v(2), v(3)]);
        assert_eq!(s.vertex_layers[2], vec![v(3)]);
        assert_eq!(s.movers[1], vec![v(2)]);
        let res = solve_game(&inst, &PebbleLimits::default()).unwrap();
        let pg = build_product_graph(&inst, &s, &PebbleLimits::default()).unwrap();
        // v keeps the step-1 pebble and gains the step-2 one
        assert_eq!(pg.configuration(2, 0).histograms, vec![(v(3), vec![2, 0])]);
        let pp = extract_path_partition(&inst, &res.strategy.unwrap()).unwrap();
        assert!(validate_path_partition(&inst, &pp).passed());
    }

    #[test]
    fn path_game_trace() {
        let inst = sat(2);
        let s = compute_layers(&inst).unwrap();
        let pg = build_product_graph(&inst, &s, &PebbleLimits::default()).unwrap();
        assert_eq!(pg.configuration(0, 0).histograms, vec![(v(0), vec![1, 0])]);
        assert_eq!(pg.config_count(1), 1);
        assert_eq!(pg.configuration(1, 0).histograms, vec![(v(1), vec![0, 1])]);
        assert_eq!(pg.configuration(2, 0).histograms, vec![(v(2), vec![1, 0])]);
        let res = solve_game(&inst, &PebbleLimits::default()).unwrap();
        let strat = res.strategy.unwrap();
        assert_eq!(
            strat.moves,
            vec![Move { step: 1, assignments: vec![(a(0), 1)] }, Move { step: 2, assignments: vec![(a(1), 2)] }]
        );
        assert!(res.stats.transitions <= res.stats.bound);
        let pp = extract_path_partition(&inst, &strat).unwrap();
        assert_eq!(pp.paths, vec![ArcPath::new(vec![a(0), a(1)])]);
    }

    #[test]
    fn path_game_lost_with_gamma1() {
        let inst = sat(1);
        let s = compute_layers(&inst).unwrap();
        let pg = build_product_graph(&inst, &s, &PebbleLimits::default()).unwrap();
        assert_eq!(pg.config_count(1), 0);
        assert!(solve_game(&inst, &PebbleLimits::default()).unwrap().strategy.is_none());
    }

    #[test]
    fn no_nights_keeps_counters() {
        let inst = CppInstance {
            graph: DirectedMultigraph::from_arcs(3, &[(0, 1), (1, 2)]).unwrap(),
            sources: vec![v(0)],
            sinks: vec![v(2)],
            layers: vec![],
            maintenance_arcs: vec![],
            gamma: 3,
        };
        // only the arc into T is a night
        let s = compute_layers(&inst).unwrap();
        let pg = build_product_graph(&inst, &s, &PebbleLimits::default()).unwrap();
        assert_eq!(pg.configuration(1, 0).histograms, vec![(v(1), vec![1, 0, 0])]);
        assert_eq!(pg.transition_count(), 2);
    }

    #[test]
    fn diamond_extraction() {
        let inst = diamond(&[], 5);
        let res = solve_game(&inst, &PebbleLimits::default()).unwrap();
        let pp = extract_path_partition(&inst, &res.strategy.unwrap()).unwrap();
        assert_eq!(pp.paths.len(), 2);
        assert!(validate_path_partition(&inst, &pp).passed());
        let inst = diamond(&[1, 3], 2);
        let res = solve_game(&inst, &PebbleLimits::default()).unwrap();
        let pp = extract_path_partition(&inst, &res.strategy.unwrap()).unwrap();
        assert!(validate_path_partition(&inst, &pp).passed());
        assert!(solve_game(&diamond(&[1], 2), &PebbleLimits::default()).unwrap().strategy.is_none());
    }

    #[test]
    fn source_cap() {
        let limits = PebbleLimits { max_sources: 1, ..Default::default() };
        assert!(matches!(
            solve_game(&diamond(&[], 5), &limits),
            Err(PebbleError::TooManySources { sources: 2, cap: 1 })
        ));
    }
}
