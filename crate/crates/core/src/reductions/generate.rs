//! Seeded random instance families. Every generator is deterministic per seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{ReductionError, TwoCommodityInstance};
use crate::cpp::CppInstance;
use crate::finite_horizon::{Airport, FiniteHorizonInstance, Leg, MaintenanceBase, MINUTES_PER_DAY};
use crate::graph::{ArcId, DirectedMultigraph, VertexId};
use crate::periodic::PeriodicInstance;

fn gen_err<T>(s: impl Into<String>) -> Result<T, ReductionError> {
    Err(ReductionError::Generator(s.into()))
}

/// A Hamiltonian cycle through all `n` vertices plus random closed walks until
/// `m` arcs exist. `round(base_fraction * n)` vertices become bases.
pub fn gen_random_eulerian(
    n: usize,
    m: usize,
    base_fraction: f64,
    gamma: u32,
    seed: u64,
) -> Result<PeriodicInstance, ReductionError> {
    if n == 0 || m < n {
        return gen_err(format!("need 1 <= n <= m, got n={n}, m={m}"));
    }
    if !(0.0..=1.0).contains(&base_fraction) {
        return gen_err(format!("base fraction {base_fraction} outside [0, 1]"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut arcs: Vec<(usize, usize)> = (0..n).map(|i| (order[i], order[(i + 1) % n])).collect();
    while arcs.len() < m {
        let len = rng.random_range(1..=m - arcs.len());
        let start = rng.random_range(0..n);
        let mut at = start;
        for _ in 1..len {
            let next = rng.random_range(0..n);
            arcs.push((at, next));
            at = next;
        }
        arcs.push((at, start));
    }
    let graph = DirectedMultigraph::from_arcs(n, &arcs)?;
    let k = (base_fraction * n as f64).round() as usize;
    let mut vs: Vec<usize> = (0..n).collect();
    vs.shuffle(&mut rng);
    let mut bases: Vec<VertexId> = vs[..k].iter().map(|&v| VertexId(v)).collect();
    bases.sort();
    Ok(PeriodicInstance::new(graph, bases, gamma)?)
}

/// `days` flying days framed by an empty day on each side. Airport 0 is always
/// a base and every other airport is one with probability one half; all bases
/// keep the window 8pm to 6am. Legs fly between 6am and 8pm.
#[allow(clippy::needless_range_loop)]
pub fn gen_random_quiet_night(
    airports: usize,
    days: u32,
    legs: usize,
    fleet: u32,
    gamma: u32,
    seed: u64,
) -> Result<FiniteHorizonInstance, ReductionError> {
    if airports == 0 || days == 0 || gamma == 0 {
        return gen_err("airports, days and gamma must be positive");
    }
    if legs > 0 && fleet == 0 {
        return gen_err("legs need at least one airplane");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bases = (0..airports)
        .filter(|&a| a == 0 || rng.random_bool(0.5))
        .map(|airport| MaintenanceBase { airport, window_start: 1200, window_end: 360, duration: 600 })
        .collect();
    let mut at: Vec<usize> = (0..fleet).map(|_| rng.random_range(0..airports)).collect();
    let mut fleet_at = vec![0u32; airports];
    for &a in &at {
        fleet_at[a] += 1;
    }
    let mut load = vec![vec![0i64; days as usize]; fleet as usize];
    for _ in 0..legs {
        let p = rng.random_range(0..fleet as usize);
        let d = rng.random_range(0..days as usize);
        load[p][d] += 1;
    }
    let mut out: Vec<(i64, usize, Leg)> = Vec::with_capacity(legs);
    for d in 0..days as usize {
        let day_start = (d as i64 + 1) * MINUTES_PER_DAY + 360;
        for p in 0..fleet as usize {
            let k = load[p][d];
            if k == 0 {
                continue;
            }
            let width = 840 / k;
            if width < 6 {
                return gen_err(format!("{k} legs for one airplane on one day do not fit"));
            }
            for j in 0..k {
                let slot = day_start + j * width;
                let dep_time = slot + rng.random_range(0..width / 3);
                let arr_time = dep_time + rng.random_range(1..=width / 2);
                let arr = if airports == 1 { 0 } else { (at[p] + rng.random_range(1..airports)) % airports };
                out.push((dep_time, p, Leg { dep: at[p], arr, dep_time, arr_time }));
                at[p] = arr;
            }
        }
    }
    out.sort_by_key(|&(t, p, _)| (t, p));
    Ok(FiniteHorizonInstance {
        airports: (0..airports).map(|a| Airport { name: format!("P{a}"), utc_offset_minutes: 0 }).collect(),
        bases,
        legs: out.into_iter().map(|(_, _, l)| l).collect(),
        fleet: fleet_at,
        gamma,
        horizon_days: days + 2,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CppGenParams {
    pub sources: usize,
    /// Number m of nested sets.
    pub layers: usize,
    /// Vertices besides sources and sinks; at least `layers`.
    pub inner: usize,
    /// Chance of taking an arc inside the current layer when one exists.
    pub stay: f64,
    /// Chance that a layer-crossing arc is a maintenance arc.
    pub maintenance: f64,
    pub gamma: u32,
}

/// Union of random source-to-sink paths that climb the layers one at a time.
/// Inside a layer paths only move to larger vertex ids, so the result is
/// acyclic. Unused inner vertices are dropped.
pub fn gen_random_cpp(params: &CppGenParams, seed: u64) -> Result<CppInstance, ReductionError> {
    let CppGenParams { sources: k, layers: m, inner, stay, maintenance, gamma } = *params;
    if k == 0 || gamma == 0 || inner < m {
        return gen_err("need sources >= 1, gamma >= 1 and inner >= layers");
    }
    if !(0.0..=1.0).contains(&stay) || !(0.0..=1.0).contains(&maintenance) {
        return gen_err("probabilities must lie in [0, 1]");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // inner vertex i has layer level[i]; the first m cover layers 1..=m
    let level: Vec<usize> = (0..inner).map(|i| if i < m { i + 1 } else { rng.random_range(0..=m) }).collect();
    let sink = usize::MAX;
    let mut paths: Vec<Vec<usize>> = Vec::with_capacity(k);
    for _ in 0..k {
        // positions: None for the source, Some(i) for inner vertex i
        let mut path = Vec::new();
        let (mut cur, mut l): (Option<usize>, usize) = (None, 0);
        loop {
            let same: Vec<usize> = (0..inner).filter(|&i| level[i] == l && cur.is_none_or(|c| i > c)).collect();
            if !same.is_empty() && rng.random_bool(stay) {
                let i = same[rng.random_range(0..same.len())];
                path.push(i);
                cur = Some(i);
                continue;
            }
            if l == m {
                path.push(sink);
                break;
            }
            let up: Vec<usize> = (0..inner).filter(|&i| level[i] == l + 1).collect();
            let i = up[rng.random_range(0..up.len())];
            path.push(i);
            cur = Some(i);
            l += 1;
        }
        paths.push(path);
    }
    let mut id = vec![usize::MAX; inner];
    let mut next = k;
    for p in &paths {
        for &i in p {
            if i != sink && id[i] == usize::MAX {
                id[i] = next;
                next += 1;
            }
        }
    }
    let n = next + k;
    let mut layer = vec![0usize; n];
    for i in 0..inner {
        if id[i] != usize::MAX {
            layer[id[i]] = level[i];
        }
    }
    let mut g = DirectedMultigraph::new(n);
    let mut maint = Vec::new();
    for (s, p) in paths.iter().enumerate() {
        let mut prev = s;
        for &i in p {
            let v = if i == sink { next + s } else { id[i] };
            let a: ArcId = g.add_arc(VertexId(prev), VertexId(v));
            let climbs = i == sink || layer[v] > layer[prev];
            if climbs && rng.random_bool(maintenance) {
                maint.push(a);
            }
            prev = v;
        }
    }
    let sinks: Vec<VertexId> = (next..n).map(VertexId).collect();
    let layers = (1..=m).map(|j| (k..n).filter(|&v| v >= next || layer[v] >= j).map(VertexId).collect()).collect();
    Ok(CppInstance { graph: g, sources: (0..k).map(VertexId).collect(), sinks, layers, maintenance_arcs: maint, gamma })
}

/// Random DAG on `n` vertices (arcs only go from smaller to larger ids) with
/// random terminals and demands in `1..=max_demand`.
pub fn gen_random_two_commodity(
    n: usize,
    arc_prob: f64,
    max_demand: u32,
    seed: u64,
) -> Result<TwoCommodityInstance, ReductionError> {
    if n < 2 || max_demand == 0 || !(0.0..=1.0).contains(&arc_prob) {
        return gen_err("need n >= 2, max_demand >= 1 and arc_prob in [0, 1]");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut arcs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(arc_prob) {
                arcs.push((i, j));
            }
        }
    }
    let pair = |rng: &mut ChaCha8Rng| {
        let s = rng.random_range(0..n);
        let t = (s + rng.random_range(1..n)) % n;
        (VertexId(s), VertexId(t))
    };
    let (s1, t1) = pair(&mut rng);
    let (s2, t2) = pair(&mut rng);
    Ok(TwoCommodityInstance {
        graph: DirectedMultigraph::from_arcs(n, &arcs)?,
        s1,
        t1,
        s2,
        t2,
        d1: rng.random_range(1..=max_demand),
        d2: rng.random_range(1..=max_demand),
    })
}
