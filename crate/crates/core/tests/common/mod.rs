//! Test-only oracles and instance families. Nothing here calls the solvers it
//! is used to check.
#![allow(dead_code)]

use std::collections::BTreeSet;

use maintroute::cpp::CppInstance;
use maintroute::finite_horizon::{FiniteHorizonInstance, Route, RoutePlan};
use maintroute::reductions::TwoCommodityInstance;
use maintroute::{validate_plan, ArcId, DirectedMultigraph, PeriodicInstance, VertexId};

// ---------------------------------------------------------------- periodic

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..=p.len() {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

fn canonical(n: usize, arcs: &[(usize, usize)], perms: &[Vec<usize>]) -> Vec<(usize, usize)> {
    perms
        .iter()
        .map(|p| {
            let mut a: Vec<(usize, usize)> = arcs.iter().map(|&(u, v)| (p[u], p[v])).collect();
            a.sort();
            a
        })
        .min()
        .unwrap_or_else(|| {
            debug_assert_eq!(n, 0);
            Vec::new()
        })
}

fn connected(n: usize, arcs: &[(usize, usize)]) -> bool {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for &(u, v) in arcs {
        let (a, b) = (find(&mut parent, u), find(&mut parent, v));
        parent[a] = b;
    }
    let r = find(&mut parent, 0);
    (0..n).all(|v| find(&mut parent, v) == r)
}

/// Connected balanced multigraphs on exactly `n` vertices (every vertex
/// touched) with `1..=max_m` arcs, for every `n` in `1..=max_n`, one per
/// isomorphism class. Returned as `(n, arcs)`.
pub fn eulerian_family(max_n: usize, max_m: usize) -> Vec<(usize, Vec<(usize, usize)>)> {
    let mut out = Vec::new();
    for n in 1..=max_n {
        let perms = permutations(n);
        let types: Vec<(usize, usize)> = (0..n).flat_map(|u| (0..n).map(move |v| (u, v))).collect();
        let mut seen = BTreeSet::new();
        for m in 1..=max_m {
            let mut pick = vec![0usize; m];
            loop {
                let arcs: Vec<(usize, usize)> = pick.iter().map(|&i| types[i]).collect();
                let mut bal = vec![0i64; n];
                let mut touched = vec![false; n];
                for &(u, v) in &arcs {
                    bal[u] += 1;
                    bal[v] -= 1;
                    touched[u] = true;
                    touched[v] = true;
                }
                if bal.iter().all(|&b| b == 0) && touched.iter().all(|&t| t) && connected(n, &arcs) {
                    let c = canonical(n, &arcs, &perms);
                    if seen.insert(c.clone()) {
                        out.push((n, c));
                    }
                }
                // next nondecreasing index tuple
                let mut k = m;
                while k > 0 && pick[k - 1] == types.len() - 1 {
                    k -= 1;
                }
                if k == 0 {
                    break;
                }
                pick[k - 1] += 1;
                for j in k..m {
                    pick[j] = pick[k - 1];
                }
            }
        }
    }
    out
}

/// Every base subset and every gamma in `gammas` for each graph of the family.
pub fn periodic_family(max_n: usize, max_m: usize, gammas: &[u32]) -> Vec<PeriodicInstance> {
    let mut out = Vec::new();
    for (n, arcs) in eulerian_family(max_n, max_m) {
        let g = DirectedMultigraph::from_arcs(n, &arcs).unwrap();
        for mask in 0u32..(1 << n) {
            let bases: Vec<VertexId> = (0..n).filter(|&v| mask >> v & 1 == 1).map(VertexId).collect();
            for &gamma in gammas {
                out.push(PeriodicInstance::new(g.clone(), bases.clone(), gamma).unwrap());
            }
        }
    }
    out
}

/// Largest cyclic distance between arcs entering a base; `None` if no arc does.
fn cyclic_max_gap(inst: &PeriodicInstance, trail: &[ArcId]) -> Option<usize> {
    let g = inst.graph();
    let hits: Vec<usize> = (0..trail.len()).filter(|&i| inst.bases().contains(&g.head(trail[i]))).collect();
    let first = *hits.first()?;
    let mut max = first + trail.len() - hits[hits.len() - 1];
    for w in hits.windows(2) {
        max = max.max(w[1] - w[0]);
    }
    Some(max)
}

/// Exhaustive search over all partitions of the arcs into closed trails.
pub fn trail_decomposition_oracle(inst: &PeriodicInstance) -> Option<Vec<Vec<ArcId>>> {
    fn extend(
        inst: &PeriodicInstance,
        used: &mut Vec<bool>,
        trail: &mut Vec<ArcId>,
        done: &mut Vec<Vec<ArcId>>,
    ) -> bool {
        let g = inst.graph();
        let start = g.tail(trail[0]);
        let at = g.head(*trail.last().unwrap());
        if at == start && cyclic_max_gap(inst, trail).is_some_and(|m| m <= inst.gamma() as usize) {
            done.push(trail.clone());
            if partition(inst, used, done) {
                return true;
            }
            done.pop();
        }
        for &a in g.out_arcs(at) {
            if !used[a.0] {
                used[a.0] = true;
                trail.push(a);
                if extend(inst, used, trail, done) {
                    return true;
                }
                trail.pop();
                used[a.0] = false;
            }
        }
        false
    }
    fn partition(inst: &PeriodicInstance, used: &mut Vec<bool>, done: &mut Vec<Vec<ArcId>>) -> bool {
        let Some(first) = used.iter().position(|&u| !u) else {
            return true;
        };
        used[first] = true;
        let mut trail = vec![ArcId(first)];
        let ok = extend(inst, used, &mut trail, done);
        if !ok {
            used[first] = false;
        }
        ok
    }
    let mut used = vec![false; inst.graph().arc_count()];
    let mut done = Vec::new();
    partition(inst, &mut used, &mut done).then_some(done)
}

// ---------------------------------------------------------------- path partition

/// Every `(source, inner..., sink)` path over a layout where inner vertex `i`
/// sits on layer `level[i]`: layers climb by at most one per arc and, inside a
/// layer, paths move to larger indices.
fn layout_paths(level: &[usize], m: usize) -> Vec<Vec<Option<usize>>> {
    fn go(
        level: &[usize],
        m: usize,
        cur: Option<usize>,
        l: usize,
        path: &mut Vec<Option<usize>>,
        out: &mut Vec<Vec<Option<usize>>>,
    ) {
        if l == m {
            path.push(None);
            out.push(path.clone());
            path.pop();
        }
        for i in 0..level.len() {
            let same = level[i] == l && cur.is_none_or(|c| i > c);
            if same || level[i] == l + 1 {
                path.push(Some(i));
                go(level, m, Some(i), level[i], path, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(level, m, None, 0, &mut Vec::new(), &mut out);
    out
}

fn layer_assignments(q: usize, m: usize) -> Vec<Vec<usize>> {
    // nondecreasing level sequences over 0..=m
    let mut out = Vec::new();
    fn go(q: usize, m: usize, from: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == q {
            out.push(cur.clone());
            return;
        }
        for l in from..=m {
            cur.push(l);
            go(q, m, l, cur, out);
            cur.pop();
        }
    }
    go(q, m, 0, &mut Vec::new(), &mut out);
    out
}

/// Valid instances with at most `max_vertices` vertices, built as unions of
/// one source-to-sink path per source over every small layout, with every
/// maintenance subset of the night arcs and every gamma in `gammas`.
/// Duplicates are removed.
pub fn cpp_family(max_vertices: usize, max_arcs: usize, gammas: &[u32]) -> Vec<CppInstance> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for k in 1..=2usize {
        for m in 1..=2usize {
            for q in 0..=max_vertices.saturating_sub(2 * k) {
                for level in layer_assignments(q, m) {
                    let paths = layout_paths(&level, m);
                    if paths.is_empty() {
                        continue;
                    }
                    let mut choice = vec![0usize; k];
                    'tuples: loop {
                        build_union(
                            k,
                            m,
                            &level,
                            &choice.iter().map(|&c| &paths[c]).collect::<Vec<_>>(),
                            max_arcs,
                            gammas,
                            &mut seen,
                            &mut out,
                        );
                        for c in choice.iter_mut() {
                            *c += 1;
                            if *c < paths.len() {
                                continue 'tuples;
                            }
                            *c = 0;
                        }
                        break;
                    }
                }
            }
        }
    }
    out
}

/// Arcs, sources, maintenance arcs and gamma of an instance already emitted.
type CppKey = (Vec<(usize, usize)>, Vec<usize>, Vec<usize>, u32);

#[allow(clippy::too_many_arguments)]
fn build_union(
    k: usize,
    m: usize,
    level: &[usize],
    paths: &[&Vec<Option<usize>>],
    max_arcs: usize,
    gammas: &[u32],
    seen: &mut BTreeSet<CppKey>,
    out: &mut Vec<CppInstance>,
) {
    let arcs_total: usize = paths.iter().map(|p| p.len()).sum();
    if arcs_total > max_arcs {
        return;
    }
    // vertex ids: sources 0..k, used inner vertices in index order, then sinks
    let mut id = vec![usize::MAX; level.len()];
    let mut used: Vec<usize> = paths.iter().flat_map(|p| p.iter().flatten().copied()).collect();
    used.sort();
    used.dedup();
    for (j, &i) in used.iter().enumerate() {
        id[i] = k + j;
    }
    let sink0 = k + used.len();
    let n = sink0 + k;
    let mut arcs = Vec::new();
    for (s, p) in paths.iter().enumerate() {
        let mut prev = s;
        for step in p.iter() {
            let v = step.map_or(sink0 + s, |i| id[i]);
            arcs.push((prev, v));
            prev = v;
        }
    }
    let layer_of = |v: usize| {
        if v < k {
            0
        } else if v >= sink0 {
            m + 1
        } else {
            level[used[v - k]]
        }
    };
    let night: Vec<usize> = (0..arcs.len()).filter(|&a| layer_of(arcs[a].1) == layer_of(arcs[a].0) + 1).collect();
    let layers: Vec<Vec<VertexId>> =
        (1..=m).map(|j| (k..n).filter(|&v| layer_of(v) >= j).map(VertexId).collect()).collect();
    let levels: Vec<usize> = (k..sink0).map(layer_of).collect();
    for mask in 0u32..(1 << night.len()) {
        let maint: Vec<usize> = (0..night.len()).filter(|&j| mask >> j & 1 == 1).map(|j| night[j]).collect();
        for &gamma in gammas {
            let mut key_arcs = arcs.clone();
            key_arcs.sort();
            // canonical key: sorted arcs with the maintenance arcs as endpoint pairs
            let mut key_maint: Vec<usize> = maint.iter().map(|&a| arcs[a].0 * 1000 + arcs[a].1).collect();
            key_maint.sort();
            if !seen.insert((key_arcs, key_maint, levels.clone(), gamma)) {
                continue;
            }
            out.push(CppInstance {
                graph: DirectedMultigraph::from_arcs(n, &arcs).unwrap(),
                sources: (0..k).map(VertexId).collect(),
                sinks: (sink0..n).map(VertexId).collect(),
                layers: layers.clone(),
                maintenance_arcs: maint.iter().map(|&a| ArcId(a)).collect(),
                gamma,
            });
        }
    }
}

// ---------------------------------------------------------------- finite horizon

/// Assigns legs, in departure order, to airplanes by backtracking and accepts
/// the first complete assignment that passes the plan validator.
pub fn route_oracle(inst: &FiniteHorizonInstance) -> bool {
    let mut order: Vec<usize> = (0..inst.legs.len()).collect();
    order.sort_by_key(|&l| (inst.legs[l].dep_time, l));
    let mut routes: Vec<Route> = Vec::new();
    for (a, &n) in inst.fleet.iter().enumerate() {
        for _ in 0..n {
            routes.push(Route { start: a, legs: vec![] });
        }
    }
    fn go(inst: &FiniteHorizonInstance, order: &[usize], k: usize, routes: &mut Vec<Route>) -> bool {
        if k == order.len() {
            return validate_plan(inst, &RoutePlan { routes: routes.clone() }).passed();
        }
        let leg = &inst.legs[order[k]];
        let mut tried: Vec<Route> = Vec::new();
        for r in 0..routes.len() {
            let (at, free) = match routes[r].legs.last() {
                Some(&l) => (inst.legs[l].arr, inst.legs[l].arr_time),
                None => (routes[r].start, 0),
            };
            if at != leg.dep || free > leg.dep_time || tried.contains(&routes[r]) {
                continue;
            }
            tried.push(routes[r].clone());
            routes[r].legs.push(order[k]);
            if go(inst, order, k + 1, routes) {
                return true;
            }
            routes[r].legs.pop();
        }
        false
    }
    go(inst, &order, 0, &mut routes)
}

// ---------------------------------------------------------------- two commodity

fn all_paths(g: &DirectedMultigraph, s: VertexId, t: VertexId) -> Vec<u128> {
    fn go(g: &DirectedMultigraph, v: VertexId, t: VertexId, mask: u128, out: &mut Vec<u128>) {
        if v == t {
            out.push(mask);
            return;
        }
        for &a in g.out_arcs(v) {
            go(g, g.head(a), t, mask | 1 << a.0, out);
        }
    }
    assert!(g.arc_count() <= 128);
    let mut out = Vec::new();
    go(g, s, t, 0, &mut out);
    out
}

/// Whether `d1` arc-disjoint `s1-t1` paths and `d2` `s2-t2` paths exist, all
/// pairwise arc-disjoint.
pub fn two_commodity_oracle(tc: &TwoCommodityInstance) -> bool {
    let p1 = all_paths(&tc.graph, tc.s1, tc.t1);
    let p2 = all_paths(&tc.graph, tc.s2, tc.t2);
    fn pick(sets: &[(&[u128], u32)], from: usize, left: u32, used: u128) -> bool {
        let Some(&(paths, _)) = sets.first() else {
            return true;
        };
        if left == 0 {
            return match sets.get(1) {
                Some(&(_, d)) => pick(&sets[1..], 0, d, used),
                None => true,
            };
        }
        (from..paths.len()).any(|i| paths[i] & used == 0 && pick(sets, i + 1, left - 1, used | paths[i]))
    }
    let sets = [(&p1[..], tc.d1), (&p2[..], tc.d2)];
    pick(&sets, 0, tc.d1, 0)
}

/// All DAGs whose arcs go from smaller to larger vertex ids, on `n` vertices in
/// `4..=max_n`, with at most `max_arcs` arcs. Terminals are fixed to
/// `s1 = 0, s2 = 1, t2 = n - 2, t1 = n - 1`; demands range over `1..=2` when
/// `n <= 5` and are `1` otherwise.
pub fn two_commodity_family(max_n: usize, max_arcs: usize) -> Vec<TwoCommodityInstance> {
    let mut out = Vec::new();
    for n in 4..=max_n {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        let demands: &[(u32, u32)] = if n <= 5 { &[(1, 1), (1, 2), (2, 1), (2, 2)] } else { &[(1, 1)] };
        for mask in 0u32..(1 << pairs.len()) {
            if mask.count_ones() as usize > max_arcs {
                continue;
            }
            let arcs: Vec<(usize, usize)> =
                (0..pairs.len()).filter(|&j| mask >> j & 1 == 1).map(|j| pairs[j]).collect();
            for &(d1, d2) in demands {
                out.push(TwoCommodityInstance {
                    graph: DirectedMultigraph::from_arcs(n, &arcs).unwrap(),
                    s1: VertexId(0),
                    t1: VertexId(n - 1),
                    s2: VertexId(1),
                    t2: VertexId(n - 2),
                    d1,
                    d2,
                });
            }
        }
    }
    out
}
