//! Routing with maintenance ignored, as a feasible flow with lower bounds on a
//! time-expanded network.

use serde::{Deserialize, Serialize};

use super::{FhError, FiniteHorizonInstance, Route, RoutePlan};
use crate::flow::{EdgeHandle, FlowNetwork};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelaxedPlan {
    pub plan: RoutePlan,
    /// Airplanes routed from the start to the end of the horizon.
    pub flow_value: u64,
}

/// Finds routes covering every leg exactly once with the given fleet,
/// disregarding maintenance. `Ok(None)` when the fleet cannot fly the legs.
pub fn solve_ignoring_maintenance(inst: &FiniteHorizonInstance) -> Result<Option<RelaxedPlan>, FhError> {
    let issues = inst.issues();
    if !issues.is_empty() {
        return Err(FhError::Invalid(issues));
    }
    let p = inst.airports.len();
    let mut times: Vec<Vec<i64>> = vec![vec![0]; p];
    for l in &inst.legs {
        times[l.dep].push(l.dep_time);
        times[l.arr].push(l.arr_time);
    }
    let mut offset = Vec::with_capacity(p);
    let mut nodes = 0;
    for t in &mut times {
        t.sort_unstable();
        t.dedup();
        offset.push(nodes);
        nodes += t.len();
    }
    let node = |a: usize, t: i64| offset[a] + times[a].binary_search(&t).expect("event time recorded");
    let (s, t, ss, tt) = (nodes, nodes + 1, nodes + 2, nodes + 3);
    let mut net = FlowNetwork::new(nodes + 4);
    let total = inst.fleet_size();
    // positive excess needs supply from ss, negative drains to tt
    let mut excess = vec![0i64; nodes + 2];
    for (a, &n) in inst.fleet.iter().enumerate() {
        excess[s] -= n as i64;
        excess[node(a, 0)] += n as i64;
    }
    for l in &inst.legs {
        excess[node(l.dep, l.dep_time)] -= 1;
        excess[node(l.arr, l.arr_time)] += 1;
    }
    let mut ground: Vec<Vec<EdgeHandle>> = Vec::with_capacity(p);
    for (a, at) in times.iter().enumerate() {
        let mut edges = Vec::with_capacity(at.len());
        for k in 0..at.len() {
            let to = if k + 1 < at.len() { offset[a] + k + 1 } else { t };
            edges.push(net.add_edge(offset[a] + k, to, total));
        }
        ground.push(edges);
    }
    let back = net.add_edge(t, s, total);
    let mut need = 0u64;
    for (v, &e) in excess.iter().enumerate() {
        if e > 0 {
            net.add_edge(ss, v, e as u64);
            need += e as u64;
        } else if e < 0 {
            net.add_edge(v, tt, (-e) as u64);
        }
    }
    if net.max_flow(ss, tt) < need {
        return Ok(None);
    }

    let mut legs_at: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for (i, l) in inst.legs.iter().enumerate() {
        legs_at[node(l.dep, l.dep_time)].push(i);
    }
    for v in &mut legs_at {
        v.reverse();
    }
    let mut onward: Vec<u64> = ground.iter().flatten().map(|&e| net.flow(e)).collect();
    let mut routes = Vec::with_capacity(total as usize);
    for (a, &n) in inst.fleet.iter().enumerate() {
        for _ in 0..n {
            let mut route = Route { start: a, legs: Vec::new() };
            let (mut at, mut v) = (a, node(a, 0));
            loop {
                if let Some(l) = legs_at[v].pop() {
                    route.legs.push(l);
                    let leg = &inst.legs[l];
                    at = leg.arr;
                    v = node(at, leg.arr_time);
                } else if onward[v] > 0 {
                    onward[v] -= 1;
                    if v + 1 == offset[at] + times[at].len() {
                        break;
                    }
                    v += 1;
                } else {
                    return Err(FhError::Invalid(vec!["flow decomposition got stuck".into()]));
                }
            }
            routes.push(route);
        }
    }
    Ok(Some(RelaxedPlan { plan: RoutePlan { routes }, flow_value: net.flow(back) }))
}
