//! Instance transformations and random instance families.

mod generate;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpp::{CppError, CppInstance};
use crate::finite_horizon::{Airport, FiniteHorizonInstance, Leg, MaintenanceBase, MINUTES_PER_DAY};
use crate::graph::{topological_order, ArcId, DirectedMultigraph, GraphError, VertexId};
use crate::periodic::PeriodicError;

pub use generate::{
    gen_random_cpp, gen_random_eulerian, gen_random_quiet_night, gen_random_two_commodity, CppGenParams,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error(transparent)]
    Cpp(#[from] CppError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Periodic(#[from] PeriodicError),
    #[error("layer {layer} holds {vertices} vertices; at most {cap} fit between 6am and 8pm")]
    LayerTooWide { layer: usize, vertices: usize, cap: usize },
    #[error("invalid two-commodity instance: {0}")]
    TwoCommodity(String),
    #[error("infeasible generator parameters: {0}")]
    Generator(String),
}

/// First departure of each day, in minutes after midnight.
const FIRST_SLOT: i64 = 6 * 60 + 2;
const SLOT: i64 = 2;
const EVENING: i64 = 20 * 60;
const MORNING: i64 = 6 * 60;

/// One airport per vertex, one leg per arc (leg `i` is arc `i`). Layer `i`
/// becomes day `i + 1`; the first and last day of the horizon stay empty.
/// Bases are the heads of maintenance arcs together with all sources and
/// sinks, each with the window 8pm to 6am.
pub fn cpp_to_finite_horizon(inst: &CppInstance) -> Result<FiniteHorizonInstance, ReductionError> {
    let st = inst.structure()?;
    let g = &inst.graph;
    let n = g.vertex_count();
    let m = inst.layers.len();
    let cap = ((EVENING - SLOT - FIRST_SLOT) / SLOT + 1) as usize;
    let mut time = vec![0i64; n];
    let mut used = vec![0usize; m + 2];
    for v in topological_order(g)? {
        let l = st.layer[v.0];
        if used[l] == cap {
            let vertices = (0..n).filter(|&u| st.layer[u] == l).count();
            return Err(ReductionError::LayerTooWide { layer: l, vertices, cap });
        }
        time[v.0] = (l as i64 + 1) * MINUTES_PER_DAY + FIRST_SLOT + SLOT * used[l] as i64;
        used[l] += 1;
    }
    let mut base = vec![false; n];
    for &a in &inst.maintenance_arcs {
        base[g.head(a).0] = true;
    }
    for &v in inst.sources.iter().chain(&inst.sinks) {
        base[v.0] = true;
    }
    let legs = g
        .arc_ids()
        .map(|a| {
            let (u, v) = (g.tail(a), g.head(a));
            let (tu, tv) = (time[u.0], time[v.0]);
            let mid = (tu + tv) / 2;
            let arr_time = if st.is_maintenance[a.0] {
                mid.min((st.layer[u.0] as i64 + 1) * MINUTES_PER_DAY + EVENING - 1)
            } else if st.is_night[a.0] && base[v.0] {
                (st.layer[v.0] as i64 + 1) * MINUTES_PER_DAY + MORNING
            } else {
                mid
            };
            Leg { dep: u.0, arr: v.0, dep_time: tu, arr_time }
        })
        .collect();
    let mut fleet = vec![0u32; n];
    for s in &inst.sources {
        fleet[s.0] = 1;
    }
    Ok(FiniteHorizonInstance {
        airports: (0..n).map(|v| Airport { name: format!("v{v}"), utc_offset_minutes: 0 }).collect(),
        bases: (0..n)
            .filter(|&v| base[v])
            .map(|airport| MaintenanceBase {
                airport,
                window_start: EVENING as u32,
                window_end: MORNING as u32,
                duration: (MINUTES_PER_DAY - EVENING + MORNING) as u32,
            })
            .collect(),
        legs,
        fleet,
        gamma: inst.gamma,
        horizon_days: m as u32 + 4,
    })
}

/// Arc-disjoint paths in a DAG: `d1` paths from `s1` to `t1` and `d2` from
/// `s2` to `t2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TwoCommodityInstance {
    pub graph: DirectedMultigraph,
    pub s1: VertexId,
    pub t1: VertexId,
    pub s2: VertexId,
    pub t2: VertexId,
    pub d1: u32,
    pub d2: u32,
}

impl TwoCommodityInstance {
    pub fn check(&self) -> Result<(), ReductionError> {
        let n = self.graph.vertex_count();
        let bad = |s: String| Err(ReductionError::TwoCommodity(s));
        for v in [self.s1, self.t1, self.s2, self.t2] {
            if v.0 >= n {
                return bad(format!("unknown vertex {v}"));
            }
        }
        if self.d1 == 0 || self.d2 == 0 {
            return bad("demands must be at least 1".into());
        }
        if self.s1 == self.t1 || self.s2 == self.t2 {
            return bad("a commodity starts where it ends".into());
        }
        topological_order(&self.graph)?;
        Ok(())
    }
}

/// Builds the hardness gadget. For `gamma > 4` every exit path gets
/// `gamma - 4` extra pass-through vertices in front of its exit vertex.
pub fn two_commodity_to_cpp(tc: &TwoCommodityInstance, gamma: u32) -> Result<CppInstance, ReductionError> {
    tc.check()?;
    if gamma < 4 {
        return Err(ReductionError::TwoCommodity(format!("the gadget needs gamma >= 4, got {gamma}")));
    }
    let pad = (gamma - 4) as usize;
    let n0 = tc.graph.vertex_count();
    let mut indeg: Vec<i64> = (0..n0).map(|v| tc.graph.in_degree(VertexId(v)) as i64).collect();
    let mut outdeg: Vec<i64> = (0..n0).map(|v| tc.graph.out_degree(VertexId(v)) as i64).collect();
    indeg[tc.s1.0] += tc.d1 as i64;
    indeg[tc.s2.0] += tc.d2 as i64;
    outdeg[tc.t1.0] += tc.d1 as i64;
    outdeg[tc.t2.0] += tc.d2 as i64;

    #[derive(Clone, Copy, PartialEq)]
    enum Side {
        One,
        Two,
        Balance,
    }
    let mut feeders: Vec<(Side, VertexId)> = Vec::new();
    let mut exits: Vec<(Side, VertexId)> = Vec::new();
    feeders.extend(std::iter::repeat_n((Side::One, tc.s1), tc.d1 as usize));
    feeders.extend(std::iter::repeat_n((Side::Two, tc.s2), tc.d2 as usize));
    exits.extend(std::iter::repeat_n((Side::One, tc.t1), tc.d1 as usize));
    exits.extend(std::iter::repeat_n((Side::Two, tc.t2), tc.d2 as usize));
    for v in 0..n0 {
        let diff = outdeg[v] - indeg[v];
        let entry = (Side::Balance, VertexId(v));
        if diff > 0 {
            feeders.extend(std::iter::repeat_n(entry, diff as usize));
        } else {
            exits.extend(std::iter::repeat_n(entry, (-diff) as usize));
        }
    }

    let mut g = tc.graph.clone();
    let mut layer = vec![2usize; n0];
    let mut maintenance = Vec::new();
    let (mut sources, mut sinks) = (Vec::new(), Vec::new());
    let mut vertex = |g: &mut DirectedMultigraph, l: usize| {
        layer.push(l);
        g.add_vertex()
    };
    let mut arc = |g: &mut DirectedMultigraph, from: VertexId, to: VertexId, maint: bool| -> ArcId {
        let a = g.add_arc(from, to);
        if maint {
            maintenance.push(a);
        }
        a
    };
    for &(side, target) in &feeders {
        let u = vertex(&mut g, 0);
        let v = vertex(&mut g, 1);
        let k = vertex(&mut g, 2);
        arc(&mut g, u, v, side == Side::One);
        arc(&mut g, v, k, side == Side::Balance);
        arc(&mut g, k, target, false);
        sources.push(u);
    }
    for &(side, origin) in &exits {
        let mut prev = origin;
        for j in 0..pad {
            let c = vertex(&mut g, 3 + j);
            arc(&mut g, prev, c, false);
            prev = c;
        }
        let l = vertex(&mut g, 3 + pad);
        let u = vertex(&mut g, 4 + pad);
        let v = vertex(&mut g, 5 + pad);
        arc(&mut g, prev, l, false);
        arc(&mut g, l, u, side == Side::Two);
        arc(&mut g, u, v, side == Side::One);
        sinks.push(v);
    }
    let m = 4 + pad;
    let layers = (1..=m).map(|i| (0..g.vertex_count()).filter(|&v| layer[v] >= i).map(VertexId).collect()).collect();
    Ok(CppInstance { graph: g, sources, sinks, layers, maintenance_arcs: maintenance, gamma })
}
