//! Quiet-night instances as constrained path partition.
//!
//! Every airport gets one vertex per relevant time: the start of every flying
//! day, every departure, and every arrival of a flight that crossed midnight.
//! Layer of a vertex is its day. Arcs carry airplanes: sources place the
//! fleet, legs move it, ground arcs keep it parked, and sinks collect it at the
//! end. A day-crossing arc is maintenance exactly when the airplane spends that
//! night on the ground at a base.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{day_of, is_quiet_night, FhError, FiniteHorizonInstance, Route, RoutePlan, MINUTES_PER_DAY};
use crate::cpp::{CppInstance, PathPartition};
use crate::graph::{ArcId, DirectedMultigraph, VertexId};
use crate::pebble::{extract_path_partition, solve_game, PebbleLimits};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "role", rename_all = "snake_case")]
pub enum ArcRole {
    Source {
        airport: usize,
    },
    Leg {
        leg: usize,
    },
    Ground {
        airport: usize,
    },
    /// A leg with no later time at its arrival airport; ends in a sink.
    Terminal {
        leg: usize,
    },
    Balancing {
        airport: usize,
    },
}

impl ArcRole {
    pub fn leg(self) -> Option<usize> {
        match self {
            ArcRole::Leg { leg } | ArcRole::Terminal { leg } => Some(leg),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "vertex", rename_all = "snake_case")]
pub enum ReducedVertex {
    Source { airport: usize },
    Event { airport: usize, time: i64 },
    Sink,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LegArcMapping {
    pub vertices: Vec<ReducedVertex>,
    pub roles: Vec<ArcRole>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Key {
    Source(usize),
    Event(i64, usize),
    Sink(usize),
}

pub fn reduce_quiet_night_to_cpp(inst: &FiniteHorizonInstance) -> Result<(CppInstance, LegArcMapping), FhError> {
    let report = is_quiet_night(inst);
    if !report.quiet {
        return Err(FhError::NotQuietNight(report.reasons));
    }
    let p = inst.airports.len();
    let m = inst.horizon_days as i64 - 2;
    let mut times: Vec<Vec<i64>> = (0..p).map(|_| (1..=m).map(|d| d * MINUTES_PER_DAY).collect()).collect();
    for l in &inst.legs {
        times[l.dep].push(l.dep_time);
        if day_of(l.arr_time) > day_of(l.dep_time) {
            times[l.arr].push(l.arr_time);
        }
    }
    for t in &mut times {
        t.sort_unstable();
        t.dedup();
    }

    let mut arcs: Vec<(Key, Key, ArcRole)> = Vec::new();
    let mut inflow: BTreeMap<(usize, i64), i64> = BTreeMap::new();
    let mut departures: BTreeMap<(usize, i64), i64> = BTreeMap::new();
    let (mut sources, mut sinks) = (0usize, 0usize);
    for (a, ts) in times.iter().enumerate() {
        for _ in 0..inst.fleet[a] {
            arcs.push((Key::Source(sources), Key::Event(ts[0], a), ArcRole::Source { airport: a }));
            *inflow.entry((a, ts[0])).or_default() += 1;
            sources += 1;
        }
    }
    for (i, l) in inst.legs.iter().enumerate() {
        *departures.entry((l.dep, l.dep_time)).or_default() += 1;
        let tail = Key::Event(l.dep_time, l.dep);
        let at = &times[l.arr];
        let k = at.partition_point(|&t| t < l.arr_time);
        if let Some(&t) = at.get(k) {
            arcs.push((tail, Key::Event(t, l.arr), ArcRole::Leg { leg: i }));
            *inflow.entry((l.arr, t)).or_default() += 1;
        } else {
            arcs.push((tail, Key::Sink(sinks), ArcRole::Terminal { leg: i }));
            sinks += 1;
        }
    }
    for (a, at) in times.iter().enumerate() {
        let mut carried = 0i64;
        for (k, &t) in at.iter().enumerate() {
            let here = carried + inflow.get(&(a, t)).copied().unwrap_or(0);
            let ground = here - departures.get(&(a, t)).copied().unwrap_or(0);
            if ground < 0 {
                return Err(FhError::InsufficientAircraft { airport: a, time: t, count: (-ground) as u64 });
            }
            for _ in 0..ground {
                if let Some(&next) = at.get(k + 1) {
                    arcs.push((Key::Event(t, a), Key::Event(next, a), ArcRole::Ground { airport: a }));
                } else {
                    arcs.push((Key::Event(t, a), Key::Sink(sinks), ArcRole::Balancing { airport: a }));
                    sinks += 1;
                }
            }
            carried = ground;
        }
    }

    // only vertices touched by some arc survive; Key order puts sources first
    let mut ids: BTreeMap<Key, usize> = BTreeMap::new();
    for (t, h, _) in &arcs {
        ids.insert(*t, 0);
        ids.insert(*h, 0);
    }
    let mut vertices = Vec::with_capacity(ids.len());
    for (k, (key, id)) in ids.iter_mut().enumerate() {
        *id = k;
        vertices.push(match *key {
            Key::Source(s) => ReducedVertex::Source { airport: source_airport(inst, s) },
            Key::Event(time, airport) => ReducedVertex::Event { airport, time },
            Key::Sink(_) => ReducedVertex::Sink,
        });
    }
    let mut graph = DirectedMultigraph::new(vertices.len());
    let mut roles = Vec::with_capacity(arcs.len());
    for (t, h, role) in &arcs {
        graph.add_arc(VertexId(ids[t]), VertexId(ids[h]));
        roles.push(*role);
    }

    let day = |v: usize| match vertices[v] {
        ReducedVertex::Source { .. } => 0,
        ReducedVertex::Event { time, .. } => day_of(time),
        ReducedVertex::Sink => m + 1,
    };
    let layers: Vec<Vec<VertexId>> =
        (1..=m).map(|i| (0..vertices.len()).filter(|&v| day(v) >= i).map(VertexId).collect()).collect();
    let maintenance_arcs = graph
        .arc_ids()
        .filter(|&a| day(graph.head(a).0) > day(graph.tail(a).0))
        .filter(|&a| match roles[a.0] {
            ArcRole::Source { airport } | ArcRole::Ground { airport } | ArcRole::Balancing { airport } => {
                inst.is_base(airport)
            }
            ArcRole::Leg { leg } | ArcRole::Terminal { leg } => {
                let l = &inst.legs[leg];
                inst.is_base(l.arr) && day_of(l.arr_time) == day_of(l.dep_time)
            }
        })
        .collect();
    let kind = |want: fn(&ReducedVertex) -> bool| {
        (0..vertices.len()).filter(|&v| want(&vertices[v])).map(VertexId).collect::<Vec<_>>()
    };
    let cpp = CppInstance {
        sources: kind(|v| matches!(v, ReducedVertex::Source { .. })),
        sinks: kind(|v| matches!(v, ReducedVertex::Sink)),
        graph,
        layers,
        maintenance_arcs,
        gamma: inst.gamma,
    };
    Ok((cpp, LegArcMapping { vertices, roles }))
}

fn source_airport(inst: &FiniteHorizonInstance, mut s: usize) -> usize {
    for (a, &n) in inst.fleet.iter().enumerate() {
        if s < n as usize {
            return a;
        }
        s -= n as usize;
    }
    unreachable!("source index within fleet size")
}

/// Turns each path into a route: its source gives the start airport and its
/// leg arcs, in order, the legs flown.
pub fn lift_cpp_solution_to_routes(mapping: &LegArcMapping, pp: &PathPartition) -> Result<RoutePlan, FhError> {
    let mut routes = Vec::with_capacity(pp.paths.len());
    for (i, path) in pp.paths.iter().enumerate() {
        let lift_err = |detail: String| FhError::Lift { path: i, detail };
        let role = |a: ArcId| mapping.roles.get(a.0).copied().ok_or_else(|| lift_err(format!("unknown arc {a}")));
        let Some(&first) = path.arcs.first() else {
            return Err(lift_err("empty path".into()));
        };
        let ArcRole::Source { airport } = role(first)? else {
            return Err(lift_err(format!("first arc {first} does not leave a source")));
        };
        let mut legs = Vec::new();
        for &a in &path.arcs {
            legs.extend(role(a)?.leg());
        }
        routes.push(Route { start: airport, legs });
    }
    Ok(RoutePlan { routes })
}

/// Solves a quiet-night instance exactly. `Ok(None)` means no feasible plan.
pub fn solve_quiet_night(inst: &FiniteHorizonInstance, limits: &PebbleLimits) -> Result<Option<RoutePlan>, FhError> {
    let report = is_quiet_night(inst);
    if !report.quiet {
        return Err(FhError::NotQuietNight(report.reasons));
    }
    if inst.fleet_size() == 0 {
        return Ok(inst.legs.is_empty().then(RoutePlan::default));
    }
    let (cpp, mapping) = match reduce_quiet_night_to_cpp(inst) {
        Ok(r) => r,
        Err(FhError::InsufficientAircraft { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    let result = solve_game(&cpp, limits)?;
    let Some(strategy) = result.strategy else {
        return Ok(None);
    };
    let pp = extract_path_partition(&cpp, &strategy)?;
    lift_cpp_solution_to_routes(&mapping, &pp).map(Some)
}
