use super::cover::{build_bipartite_h, build_trails_from_cover, chain_segments, find_cover_f};
use super::{AbsolutelyPeriodicSolution, PeriodicError, PeriodicInstance};
use crate::graph::{decompose_into_closed_trails, ArcId, ClosedTrail, DirectedMultigraph};

/// Constructs an absolutely periodic solution for gamma in 1..=4, or `None`
/// when none exists.
pub fn solve_absolutely_periodic(inst: &PeriodicInstance) -> Result<Option<AbsolutelyPeriodicSolution>, PeriodicError> {
    let g = inst.graph();
    if !(1..=4).contains(&inst.gamma()) {
        return Err(PeriodicError::UnsupportedGamma(inst.gamma()));
    }
    if g.arc_count() == 0 {
        return Ok(Some(AbsolutelyPeriodicSolution::default()));
    }
    match inst.gamma() {
        1 => {
            if g.arc_ids().any(|a| !inst.is_base(g.head(a))) {
                return Ok(None);
            }
            let trails = decompose_into_closed_trails(g)?;
            Ok(Some(AbsolutelyPeriodicSolution { trails }))
        }
        2 => {
            if g.arc_ids().any(|a| !inst.is_base(g.tail(a)) && !inst.is_base(g.head(a))) {
                return Ok(None);
            }
            let mut succ = vec![None; g.arc_count()];
            for v in inst.non_bases() {
                for (&a, &b) in g.in_arcs(v).iter().zip(g.out_arcs(v)) {
                    succ[a.0] = Some(b);
                }
            }
            assemble_from_segments(inst, chain_segments(inst, &succ)?).map(Some)
        }
        3 => solve_gamma3(inst),
        _ => {
            let h = build_bipartite_h(inst);
            match find_cover_f(&h) {
                None => Ok(None),
                Some(f) => build_trails_from_cover(inst, &f).map(Some),
            }
        }
    }
}

fn solve_gamma3(inst: &PeriodicInstance) -> Result<Option<AbsolutelyPeriodicSolution>, PeriodicError> {
    let g = inst.graph();
    let inner = |a: ArcId| !inst.is_base(g.tail(a)) && !inst.is_base(g.head(a));
    for v in inst.non_bases() {
        let inner_out = g.out_arcs(v).iter().filter(|&&a| inner(a)).count();
        let inner_in = g.in_arcs(v).iter().filter(|&&a| inner(a)).count();
        if inst.arcs_from_bases(v) < inner_out || inst.arcs_to_bases(v) < inner_in {
            return Ok(None);
        }
    }
    let n = g.vertex_count();
    let from_b: Vec<Vec<ArcId>> =
        g.vertices().map(|v| g.in_arcs(v).iter().copied().filter(|&a| inst.is_base(g.tail(a))).collect()).collect();
    let to_b: Vec<Vec<ArcId>> =
        g.vertices().map(|v| g.out_arcs(v).iter().copied().filter(|&a| inst.is_base(g.head(a))).collect()).collect();
    let mut from_next = vec![0usize; n];
    let mut to_next = vec![0usize; n];
    let mut succ = vec![None; g.arc_count()];
    for a in g.arc_ids().filter(|&a| inner(a)) {
        let (t, h) = (g.tail(a).0, g.head(a).0);
        let feeder = from_b[t][from_next[t]];
        from_next[t] += 1;
        let exit = to_b[h][to_next[h]];
        to_next[h] += 1;
        succ[feeder.0] = Some(a);
        succ[a.0] = Some(exit);
    }
    for v in inst.non_bases() {
        let (ins, outs) = (&from_b[v.0][from_next[v.0]..], &to_b[v.0][to_next[v.0]..]);
        if ins.len() != outs.len() {
            return Err(PeriodicError::Internal(format!("unbalanced leftovers at {v}")));
        }
        for (&a, &b) in ins.iter().zip(outs) {
            succ[a.0] = Some(b);
        }
    }
    assemble_from_segments(inst, chain_segments(inst, &succ)?).map(Some)
}

/// Contracts each base-to-base segment to one arc, Euler-decomposes the
/// contracted graph and expands the trails back.
pub(crate) fn assemble_from_segments(
    inst: &PeriodicInstance,
    segments: Vec<Vec<ArcId>>,
) -> Result<AbsolutelyPeriodicSolution, PeriodicError> {
    let g = inst.graph();
    let mut contracted = DirectedMultigraph::new(g.vertex_count());
    for seg in &segments {
        contracted.add_arc(g.tail(seg[0]), g.head(*seg.last().unwrap()));
    }
    let trails = decompose_into_closed_trails(&contracted)?
        .into_iter()
        .map(|t| ClosedTrail::new(t.arcs.iter().flat_map(|s| segments[s.0].iter().copied()).collect()))
        .collect();
    Ok(AbsolutelyPeriodicSolution { trails })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::periodic::tests::instance;
    use crate::periodic::validate_absolutely_periodic;

    fn solve(inst: &PeriodicInstance) -> Option<AbsolutelyPeriodicSolution> {
        let sol = solve_absolutely_periodic(inst).unwrap();
        if let Some(s) = &sol {
            let d = validate_absolutely_periodic(inst, s);
            assert!(d.passed(), "{d:?}");
        }
        sol
    }

    #[test]
    fn gamma1_needs_all_bases() {
        assert!(solve(&instance(2, &[(0, 1), (1, 0)], &[0], 1)).is_none());
        assert!(solve(&instance(2, &[(0, 1), (1, 0)], &[0, 1], 1)).is_some());
    }

    #[test]
    fn triangle_cases() {
        let tri = [(0, 1), (1, 2), (2, 0)];
        let s = solve(&instance(3, &tri, &[0], 3)).unwrap();
        assert_eq!(s.trails.len(), 1);
        assert_eq!(s.trails[0].len(), 3);
        assert!(solve(&instance(3, &tri, &[0], 2)).is_none());
        assert!(solve(&instance(3, &tri, &[0], 4)).is_some());
    }

    #[test]
    fn gamma2_pairs_through_non_bases() {
        // star around base 0 with two spokes via 1 and 2, spoke 1 doubled
        let inst = instance(3, &[(0, 1), (1, 0), (0, 2), (2, 0), (0, 1), (1, 0)], &[0], 2);
        let s = solve(&inst).unwrap();
        assert_eq!(s.trails.iter().map(|t| t.len()).sum::<usize>(), 6);
    }

    #[test]
    fn gamma3_requires_feeders() {
        // 1 -> 2 inner arc with feeder and exit: 0->1->2->0
        assert!(solve(&instance(3, &[(0, 1), (1, 2), (2, 0)], &[0], 3)).is_some());
        // two inner arcs 1->2 but only one feeder into 1
        let inst = instance(3, &[(0, 1), (1, 2), (2, 1), (1, 2), (2, 0)], &[0], 3);
        assert!(solve(&inst).is_none());
    }

    #[test]
    fn empty_and_unsupported() {
        let inst = instance(2, &[], &[], 3);
        assert_eq!(solve(&inst), Some(AbsolutelyPeriodicSolution::default()));
        let inst = instance(2, &[(0, 1), (1, 0)], &[0], 5);
        assert_eq!(solve_absolutely_periodic(&inst).unwrap_err(), PeriodicError::UnsupportedGamma(5));
    }
}
