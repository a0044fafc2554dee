//! The constrained path partition problem.
//!
//! A layered DAG must be split into source-to-sink paths. Arcs that climb a
//! layer are "nights" (N); some of them are maintenance nights (M). Along a
//! path a counter starts at 1, grows on every arc of N outside M, resets to 1
//! on arcs of M and must never exceed `gamma`.

mod brute;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{topological_order, ArcId, ArcPath, DirectedMultigraph, GraphError, VertexId};

pub use brute::{brute_force_cpp, BruteForceLimits};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CppError {
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("instance has {arcs} arcs, brute force is capped at {cap}")]
    TooManyArcs { arcs: usize, cap: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CppInstance {
    pub graph: DirectedMultigraph,
    pub sources: Vec<VertexId>,
    pub sinks: Vec<VertexId>,
    /// X_1, ..., X_m, outermost first.
    pub layers: Vec<Vec<VertexId>>,
    pub maintenance_arcs: Vec<ArcId>,
    pub gamma: u32,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "issue", rename_all = "snake_case")]
pub enum CppIssue {
    ZeroGamma,
    NoSources,
    UnknownVertex {
        vertex: VertexId,
    },
    UnknownArc {
        arc: ArcId,
    },
    DuplicateVertex {
        vertex: VertexId,
    },
    Cycle {
        arc: ArcId,
    },
    SourceDegree {
        vertex: VertexId,
        indegree: usize,
        outdegree: usize,
    },
    SinkDegree {
        vertex: VertexId,
        indegree: usize,
        outdegree: usize,
    },
    SourceIsSink {
        vertex: VertexId,
    },
    Unbalanced {
        vertex: VertexId,
        indegree: usize,
        outdegree: usize,
    },
    /// X_{layer+1} is not contained in X_layer (1-based), or T not in X_m.
    NotNested {
        layer: usize,
        vertex: VertexId,
    },
    SourceInLayer {
        vertex: VertexId,
    },
    /// An arc skips a layer or descends.
    Closure {
        arc: ArcId,
        tail_layer: usize,
        head_layer: usize,
    },
    MaintenanceOutsideN {
        arc: ArcId,
    },
}

impl fmt::Display for CppIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CppIssue::ZeroGamma => write!(f, "gamma must be at least 1"),
            CppIssue::NoSources => write!(f, "no sources"),
            CppIssue::UnknownVertex { vertex } => write!(f, "unknown vertex {vertex}"),
            CppIssue::UnknownArc { arc } => write!(f, "unknown arc {arc}"),
            CppIssue::DuplicateVertex { vertex } => write!(f, "vertex {vertex} listed twice"),
            CppIssue::Cycle { arc } => write!(f, "directed cycle through {arc}"),
            CppIssue::SourceDegree { vertex, indegree, outdegree } => {
                write!(f, "source {vertex} has indegree {indegree}, outdegree {outdegree}; expected 0 and 1")
            }
            CppIssue::SinkDegree { vertex, indegree, outdegree } => {
                write!(f, "sink {vertex} has indegree {indegree}, outdegree {outdegree}; expected 1 and 0")
            }
            CppIssue::SourceIsSink { vertex } => write!(f, "{vertex} is both a source and a sink"),
            CppIssue::Unbalanced { vertex, indegree, outdegree } => {
                write!(f, "{vertex} is unbalanced: indegree {indegree}, outdegree {outdegree}")
            }
            CppIssue::NotNested { layer, vertex } => {
                write!(f, "{vertex} breaks nesting below X_{layer}")
            }
            CppIssue::SourceInLayer { vertex } => write!(f, "source {vertex} lies in X_1"),
            CppIssue::Closure { arc, tail_layer, head_layer } => {
                write!(f, "{arc} goes from layer {tail_layer} to layer {head_layer}; arcs must stay or climb one layer")
            }
            CppIssue::MaintenanceOutsideN { arc } => write!(f, "maintenance arc {arc} is not in N"),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CppDiagnostics {
    pub issues: Vec<CppIssue>,
    /// Layer-climbing arcs; empty when layers could not be computed.
    pub night_arcs: Vec<ArcId>,
}

impl CppDiagnostics {
    pub fn passed(&self) -> bool {
        self.issues.is_empty()
    }

    pub fn summary(&self) -> String {
        self.issues.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("; ")
    }
}

/// Per-vertex layer index and per-arc N/M flags of a valid instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CppStructure {
    /// 0 outside X_1, i inside X_i \ X_{i+1}, m+1 on sinks.
    pub layer: Vec<usize>,
    pub is_night: Vec<bool>,
    pub is_maintenance: Vec<bool>,
    pub is_source: Vec<bool>,
    pub is_sink: Vec<bool>,
}

impl CppStructure {
    /// Counter after traversing `a` with counter `c`.
    #[inline]
    pub fn step(&self, c: u32, a: ArcId) -> u32 {
        if self.is_maintenance[a.0] {
            1
        } else if self.is_night[a.0] {
            c + 1
        } else {
            c
        }
    }
}

impl CppInstance {
    /// Layer of every vertex under the stored sets; no validity checks.
    fn raw_layers(&self) -> Vec<usize> {
        let n = self.graph.vertex_count();
        let mut layer = vec![0usize; n];
        for x in &self.layers {
            for v in x {
                if v.0 < n {
                    layer[v.0] += 1;
                }
            }
        }
        for t in &self.sinks {
            if t.0 < n {
                layer[t.0] = self.layers.len() + 1;
            }
        }
        layer
    }

    /// Layer structure; errors with the validation summary on invalid input.
    pub fn structure(&self) -> Result<CppStructure, CppError> {
        let d = validate_cpp_instance(self);
        if !d.passed() {
            return Err(CppError::Invalid(d.summary()));
        }
        Ok(self.structure_unchecked())
    }

    fn structure_unchecked(&self) -> CppStructure {
        let g = &self.graph;
        let layer = self.raw_layers();
        let is_night: Vec<bool> = g.arc_ids().map(|a| layer[g.head(a).0] == layer[g.tail(a).0] + 1).collect();
        let mut is_maintenance = vec![false; g.arc_count()];
        for a in &self.maintenance_arcs {
            is_maintenance[a.0] = true;
        }
        let mut is_source = vec![false; g.vertex_count()];
        for s in &self.sources {
            is_source[s.0] = true;
        }
        let mut is_sink = vec![false; g.vertex_count()];
        for t in &self.sinks {
            is_sink[t.0] = true;
        }
        CppStructure { layer, is_night, is_maintenance, is_source, is_sink }
    }

    /// N recomputed from the layers; unknown arcs and vertices are skipped.
    pub fn night_arcs(&self) -> Vec<ArcId> {
        let layer = self.raw_layers();
        let g = &self.graph;
        g.arc_ids().filter(|&a| layer[g.head(a).0] == layer[g.tail(a).0] + 1).collect()
    }
}

pub fn validate_cpp_instance(inst: &CppInstance) -> CppDiagnostics {
    let g = &inst.graph;
    let n = g.vertex_count();
    let mut issues = Vec::new();
    if inst.gamma == 0 {
        issues.push(CppIssue::ZeroGamma);
    }
    if inst.sources.is_empty() {
        issues.push(CppIssue::NoSources);
    }
    let mut sets_ok = true;
    let mut check_set = |set: &[VertexId], issues: &mut Vec<CppIssue>| -> BTreeSet<VertexId> {
        let mut seen = BTreeSet::new();
        for &v in set {
            if v.0 >= n {
                issues.push(CppIssue::UnknownVertex { vertex: v });
                sets_ok = false;
            } else if !seen.insert(v) {
                issues.push(CppIssue::DuplicateVertex { vertex: v });
            }
        }
        seen
    };
    let sources = check_set(&inst.sources, &mut issues);
    let sinks = check_set(&inst.sinks, &mut issues);
    let layers: Vec<BTreeSet<VertexId>> = inst.layers.iter().map(|x| check_set(x, &mut issues)).collect();
    for a in &inst.maintenance_arcs {
        if a.0 >= g.arc_count() {
            issues.push(CppIssue::UnknownArc { arc: *a });
            sets_ok = false;
        }
    }
    if !sets_ok {
        return CppDiagnostics { issues, night_arcs: Vec::new() };
    }
    if let Err(GraphError::Cycle { arc }) = topological_order(g) {
        issues.push(CppIssue::Cycle { arc });
    }
    for v in g.vertices() {
        let (i, o) = (g.in_degree(v), g.out_degree(v));
        let (s, t) = (sources.contains(&v), sinks.contains(&v));
        if s && t {
            issues.push(CppIssue::SourceIsSink { vertex: v });
        } else if s && (i, o) != (0, 1) {
            issues.push(CppIssue::SourceDegree { vertex: v, indegree: i, outdegree: o });
        } else if t && (i, o) != (1, 0) {
            issues.push(CppIssue::SinkDegree { vertex: v, indegree: i, outdegree: o });
        } else if !s && !t && i != o {
            issues.push(CppIssue::Unbalanced { vertex: v, indegree: i, outdegree: o });
        }
    }
    // X_{i+1} within X_i, and T within X_m
    let m = layers.len();
    for i in 1..=m {
        let inner: &BTreeSet<VertexId> = if i < m { &layers[i] } else { &sinks };
        for &v in inner {
            if !layers[i - 1].contains(&v) {
                issues.push(CppIssue::NotNested { layer: i, vertex: v });
            }
        }
    }
    if let Some(x1) = layers.first() {
        for &s in &sources {
            if x1.contains(&s) {
                issues.push(CppIssue::SourceInLayer { vertex: s });
            }
        }
    }
    let nested = !issues.iter().any(|i| matches!(i, CppIssue::NotNested { .. }));
    let mut night_arcs = Vec::new();
    if nested {
        let layer = inst.raw_layers();
        for a in g.arc_ids() {
            let (lt, lh) = (layer[g.tail(a).0], layer[g.head(a).0]);
            if lh == lt + 1 {
                night_arcs.push(a);
            } else if lh != lt {
                issues.push(CppIssue::Closure { arc: a, tail_layer: lt, head_layer: lh });
            }
        }
        let in_n: BTreeSet<ArcId> = night_arcs.iter().copied().collect();
        for &a in &inst.maintenance_arcs {
            if !in_n.contains(&a) {
                issues.push(CppIssue::MaintenanceOutsideN { arc: a });
            }
        }
    }
    CppDiagnostics { issues, night_arcs }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathPartition {
    pub paths: Vec<ArcPath>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CounterViolation {
    pub path: usize,
    pub position: usize,
    pub counter: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathDiagnostics {
    pub gamma: u32,
    pub instance_issues: Vec<CppIssue>,
    pub missing_arcs: Vec<ArcId>,
    pub repeated_arcs: Vec<ArcId>,
    pub unknown_arcs: Vec<ArcId>,
    pub empty_paths: Vec<usize>,
    /// `(path, position)` where `arcs[position]` does not end at the tail of the next arc.
    pub broken_chains: Vec<(usize, usize)>,
    pub bad_starts: Vec<usize>,
    pub bad_ends: Vec<usize>,
    pub counter_violations: Vec<CounterViolation>,
    pub path_max_counters: Vec<u32>,
    pub max_counter: u32,
}

impl PathDiagnostics {
    pub fn passed(&self) -> bool {
        self.instance_issues.is_empty()
            && self.missing_arcs.is_empty()
            && self.repeated_arcs.is_empty()
            && self.unknown_arcs.is_empty()
            && self.empty_paths.is_empty()
            && self.broken_chains.is_empty()
            && self.bad_starts.is_empty()
            && self.bad_ends.is_empty()
            && self.counter_violations.is_empty()
    }
}

pub fn validate_path_partition(inst: &CppInstance, pp: &PathPartition) -> PathDiagnostics {
    let mut d = PathDiagnostics { gamma: inst.gamma, ..Default::default() };
    let inst_diag = validate_cpp_instance(inst);
    if !inst_diag.passed() {
        d.instance_issues = inst_diag.issues;
        return d;
    }
    let st = inst.structure_unchecked();
    let g = &inst.graph;
    let mut count = vec![0usize; g.arc_count()];
    for (p, path) in pp.paths.iter().enumerate() {
        if path.is_empty() {
            d.empty_paths.push(p);
            d.path_max_counters.push(0);
            continue;
        }
        if let Some(&a) = path.arcs.iter().find(|a| a.0 >= g.arc_count()) {
            d.unknown_arcs.push(a);
            d.path_max_counters.push(0);
            continue;
        }
        for &a in &path.arcs {
            count[a.0] += 1;
        }
        for (i, w) in path.arcs.windows(2).enumerate() {
            if g.head(w[0]) != g.tail(w[1]) {
                d.broken_chains.push((p, i));
            }
        }
        if !st.is_source[g.tail(path.arcs[0]).0] {
            d.bad_starts.push(p);
        }
        if !st.is_sink[g.head(*path.arcs.last().unwrap()).0] {
            d.bad_ends.push(p);
        }
        let mut c = 1u32;
        let mut max = c;
        for (i, &a) in path.arcs.iter().enumerate() {
            c = st.step(c, a);
            max = max.max(c);
            if c > inst.gamma {
                d.counter_violations.push(CounterViolation { path: p, position: i, counter: c });
            }
        }
        d.path_max_counters.push(max);
        d.max_counter = d.max_counter.max(max);
    }
    for (a, &c) in count.iter().enumerate() {
        match c {
            0 => d.missing_arcs.push(ArcId(a)),
            1 => {}
            _ => d.repeated_arcs.push(ArcId(a)),
        }
    }
    d
}
