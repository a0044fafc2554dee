//! The periodic aircraft routing problem.
//!
//! An instance is an Eulerian multigraph whose arcs are daily lines of flying,
//! a set of base vertices and a bound `gamma` on the number of arcs an airplane
//! may fly between two base visits. An absolutely periodic solution is a
//! partition of the arcs into closed trails, each touching a base at least
//! every `gamma` arcs.

mod cover;
mod oracle;
mod solve;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{is_eulerian, ArcId, ClosedTrail, DirectedMultigraph, GraphError, VertexId};

pub use cover::{
    build_bipartite_h, build_trails_from_cover, compute_kv, cover_flow, find_cover_f, BipartiteCoverGraph, CoverEdge,
    Token,
};
pub use oracle::{
    extract_periodic_walks, feasibility_oracle, validate_periodic_walk, OracleLimits, OracleOutcome, OracleStats,
    OracleWitness, PeriodicWalk, WalkConfiguration,
};
pub use solve::solve_absolutely_periodic;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PeriodicError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("graph is not Eulerian (balanced and connected on its non-isolated vertices)")]
    NotEulerian,
    #[error("base {0} is not a vertex of the graph")]
    UnknownBase(VertexId),
    #[error("gamma must be at least 1")]
    ZeroGamma,
    #[error("vertex {0} is a base; k_v is only defined off the bases")]
    BaseVertex(VertexId),
    #[error("gamma = {0} is not supported (only 1..=4)")]
    UnsupportedGamma(u32),
    #[error("invalid cover: {0}")]
    InvalidCover(String),
    #[error("pairing step {step} failed at vertex {vertex}: {detail}")]
    Pairing { vertex: VertexId, step: u8, detail: String },
    #[error("oracle limited to {cap} arcs, instance has {arcs}")]
    TooManyArcs { arcs: usize, cap: usize },
    #[error("oracle state cap of {cap} configurations exceeded")]
    TooManyStates { cap: usize },
    #[error("internal consistency error: {0}")]
    Internal(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PeriodicInstanceJson", into = "PeriodicInstanceJson")]
pub struct PeriodicInstance {
    graph: DirectedMultigraph,
    bases: Vec<VertexId>,
    is_base: Vec<bool>,
    gamma: u32,
}

#[derive(Serialize, Deserialize)]
struct PeriodicInstanceJson {
    graph: DirectedMultigraph,
    bases: Vec<VertexId>,
    gamma: u32,
}

impl TryFrom<PeriodicInstanceJson> for PeriodicInstance {
    type Error = PeriodicError;

    fn try_from(j: PeriodicInstanceJson) -> Result<Self, PeriodicError> {
        PeriodicInstance::new(j.graph, j.bases, j.gamma)
    }
}

impl From<PeriodicInstance> for PeriodicInstanceJson {
    fn from(p: PeriodicInstance) -> Self {
        PeriodicInstanceJson { graph: p.graph, bases: p.bases, gamma: p.gamma }
    }
}

impl PeriodicInstance {
    pub fn new(
        graph: DirectedMultigraph,
        bases: impl IntoIterator<Item = VertexId>,
        gamma: u32,
    ) -> Result<Self, PeriodicError> {
        if gamma == 0 {
            return Err(PeriodicError::ZeroGamma);
        }
        if !is_eulerian(&graph) {
            return Err(PeriodicError::NotEulerian);
        }
        let bases: BTreeSet<VertexId> = bases.into_iter().collect();
        let mut is_base = vec![false; graph.vertex_count()];
        for &b in &bases {
            if b.0 >= graph.vertex_count() {
                return Err(PeriodicError::UnknownBase(b));
            }
            is_base[b.0] = true;
        }
        Ok(PeriodicInstance { graph, bases: bases.into_iter().collect(), is_base, gamma })
    }

    pub fn graph(&self) -> &DirectedMultigraph {
        &self.graph
    }

    pub fn bases(&self) -> &[VertexId] {
        &self.bases
    }

    pub fn gamma(&self) -> u32 {
        self.gamma
    }

    /// Same instance with a different bound.
    pub fn with_gamma(&self, gamma: u32) -> Result<Self, PeriodicError> {
        if gamma == 0 {
            return Err(PeriodicError::ZeroGamma);
        }
        Ok(PeriodicInstance { gamma, ..self.clone() })
    }

    #[inline]
    pub fn is_base(&self, v: VertexId) -> bool {
        self.is_base[v.0]
    }

    /// Number of arcs from a base into `v`.
    pub fn arcs_from_bases(&self, v: VertexId) -> usize {
        self.graph.in_arcs(v).iter().filter(|&&a| self.is_base(self.graph.tail(a))).count()
    }

    /// Number of arcs from `v` into a base.
    pub fn arcs_to_bases(&self, v: VertexId) -> usize {
        self.graph.out_arcs(v).iter().filter(|&&a| self.is_base(self.graph.head(a))).count()
    }

    pub fn non_bases(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.graph.vertices().filter(|&v| !self.is_base(v))
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AbsolutelyPeriodicSolution {
    pub trails: Vec<ClosedTrail>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainBreak {
    pub trail: usize,
    /// `arcs[position]` does not end where `arcs[position + 1]` starts
    /// (cyclically, so the last position is the closing step).
    pub position: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapViolation {
    pub trail: usize,
    /// Position of the first arc after the last base visit.
    pub offset: usize,
    pub gap: usize,
}

/// Outcome of [`validate_absolutely_periodic`]. Always produced, never an error.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeriodicDiagnostics {
    pub gamma: u32,
    pub missing_arcs: Vec<ArcId>,
    pub repeated_arcs: Vec<ArcId>,
    pub unknown_arcs: Vec<ArcId>,
    pub empty_trails: Vec<usize>,
    pub broken_chains: Vec<ChainBreak>,
    /// Trails that never reach a base.
    pub baseless_trails: Vec<usize>,
    pub gap_violations: Vec<GapViolation>,
    /// Largest base-to-base gap per trail; `None` for baseless or empty trails.
    pub trail_max_gaps: Vec<Option<usize>>,
    pub max_gap: Option<usize>,
}

impl PeriodicDiagnostics {
    pub fn passed(&self) -> bool {
        self.missing_arcs.is_empty()
            && self.repeated_arcs.is_empty()
            && self.unknown_arcs.is_empty()
            && self.empty_trails.is_empty()
            && self.broken_chains.is_empty()
            && self.baseless_trails.is_empty()
            && self.gap_violations.is_empty()
    }
}

/// Cyclic base-to-base gaps of a closed arc sequence, measured between arcs
/// whose head is a base. Returns `(max_gap, [(offset, gap)] over gamma)`, or
/// `None` when no arc enters a base.
pub(crate) fn cyclic_gaps(inst: &PeriodicInstance, arcs: &[ArcId]) -> Option<(usize, Vec<(usize, usize)>)> {
    let hits: Vec<usize> =
        arcs.iter().enumerate().filter(|(_, &a)| inst.is_base(inst.graph.head(a))).map(|(i, _)| i).collect();
    let (&first, &last) = (hits.first()?, hits.last()?);
    let len = arcs.len();
    let mut gaps: Vec<(usize, usize)> = hits.windows(2).map(|w| ((w[0] + 1) % len, w[1] - w[0])).collect();
    gaps.push(((last + 1) % len, first + len - last));
    let max = gaps.iter().map(|&(_, g)| g).max().unwrap();
    let over = gaps.into_iter().filter(|&(_, g)| g > inst.gamma as usize).collect();
    Some((max, over))
}

pub fn validate_absolutely_periodic(
    inst: &PeriodicInstance,
    solution: &AbsolutelyPeriodicSolution,
) -> PeriodicDiagnostics {
    let g = &inst.graph;
    let mut diag = PeriodicDiagnostics { gamma: inst.gamma, ..Default::default() };
    let mut count = vec![0usize; g.arc_count()];
    for (t, trail) in solution.trails.iter().enumerate() {
        if trail.is_empty() {
            diag.empty_trails.push(t);
            diag.trail_max_gaps.push(None);
            continue;
        }
        let mut known = true;
        for &a in &trail.arcs {
            if a.0 >= g.arc_count() {
                diag.unknown_arcs.push(a);
                known = false;
            } else {
                count[a.0] += 1;
            }
        }
        if !known {
            diag.trail_max_gaps.push(None);
            continue;
        }
        let len = trail.len();
        for i in 0..len {
            if g.head(trail.arcs[i]) != g.tail(trail.arcs[(i + 1) % len]) {
                diag.broken_chains.push(ChainBreak { trail: t, position: i });
            }
        }
        match cyclic_gaps(inst, &trail.arcs) {
            None => {
                diag.baseless_trails.push(t);
                diag.trail_max_gaps.push(None);
            }
            Some((max, over)) => {
                diag.trail_max_gaps.push(Some(max));
                diag.max_gap = diag.max_gap.max(Some(max));
                diag.gap_violations.extend(over.into_iter().map(|(offset, gap)| GapViolation {
                    trail: t,
                    offset,
                    gap,
                }));
            }
        }
    }
    for (a, &c) in count.iter().enumerate() {
        match c {
            0 => diag.missing_arcs.push(ArcId(a)),
            1 => {}
            _ => diag.repeated_arcs.push(ArcId(a)),
        }
    }
    diag
}
