//! Finite-horizon aircraft routing.
//!
//! Times are integer minutes counted from midnight starting day 0 of the
//! horizon, in the single reference time zone of the instance. Day `d` covers
//! `[d * 1440, (d + 1) * 1440)`. Night `d` is the night between day `d` and
//! day `d + 1`.

mod legs_csv;
mod reduce;
mod relaxation;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cpp::CppError;
use crate::pebble::PebbleError;

pub use legs_csv::{import_legs_csv, parse_time};
pub use reduce::{
    lift_cpp_solution_to_routes, reduce_quiet_night_to_cpp, solve_quiet_night, ArcRole, LegArcMapping, ReducedVertex,
};
pub use relaxation::{solve_ignoring_maintenance, RelaxedPlan};

pub const MINUTES_PER_DAY: i64 = 1440;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FhError {
    #[error("invalid instance: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("not a quiet-night instance: {}", .0.join("; "))]
    NotQuietNight(Vec<String>),
    #[error("{count} more airplanes needed at airport {airport} at minute {time}")]
    InsufficientAircraft { airport: usize, time: i64, count: u64 },
    #[error(transparent)]
    Cpp(#[from] CppError),
    #[error(transparent)]
    Pebble(#[from] PebbleError),
    #[error("cannot lift path {path}: {detail}")]
    Lift { path: usize, detail: String },
    #[error("line {line}: {detail}")]
    Csv { line: u64, detail: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Airport {
    pub name: String,
    #[serde(default)]
    pub utc_offset_minutes: i32,
}

/// Maintenance window given as minutes after midnight; it wraps past midnight
/// when `window_start > window_end`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaintenanceBase {
    pub airport: usize,
    pub window_start: u32,
    pub window_end: u32,
    pub duration: u32,
}

impl MaintenanceBase {
    pub fn window_length(&self) -> i64 {
        (self.window_end as i64 - self.window_start as i64).rem_euclid(MINUTES_PER_DAY)
    }

    pub fn spans_midnight(&self) -> bool {
        self.window_start > self.window_end || self.window_start == 0
    }

    /// Absolute `[start, end)` of the window belonging to night `d`.
    pub fn night_window(&self, d: i64) -> (i64, i64) {
        let (s, e) = (self.window_start as i64, self.window_end as i64);
        if s > e {
            (d * MINUTES_PER_DAY + s, (d + 1) * MINUTES_PER_DAY + e)
        } else {
            ((d + 1) * MINUTES_PER_DAY + s, (d + 1) * MINUTES_PER_DAY + e)
        }
    }

    /// Whether time-of-day `tod` lies strictly inside the window.
    fn strictly_inside(&self, tod: i64) -> bool {
        let (s, e) = (self.window_start as i64, self.window_end as i64);
        if s > e {
            tod > s || tod < e
        } else {
            tod > s && tod < e
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leg {
    pub dep: usize,
    pub arr: usize,
    pub dep_time: i64,
    pub arr_time: i64,
}

/// Legs are identified by their position in `legs`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteHorizonInstance {
    pub airports: Vec<Airport>,
    pub bases: Vec<MaintenanceBase>,
    pub legs: Vec<Leg>,
    /// Airplanes at each airport at the start of the horizon.
    pub fleet: Vec<u32>,
    pub gamma: u32,
    pub horizon_days: u32,
}

pub fn day_of(t: i64) -> i64 {
    t.div_euclid(MINUTES_PER_DAY)
}

pub fn time_of_day(t: i64) -> i64 {
    t.rem_euclid(MINUTES_PER_DAY)
}

impl FiniteHorizonInstance {
    pub fn horizon_end(&self) -> i64 {
        self.horizon_days as i64 * MINUTES_PER_DAY
    }

    pub fn fleet_size(&self) -> u64 {
        self.fleet.iter().map(|&n| n as u64).sum()
    }

    pub fn base(&self, airport: usize) -> Option<&MaintenanceBase> {
        self.bases.iter().find(|b| b.airport == airport)
    }

    pub fn is_base(&self, airport: usize) -> bool {
        self.base(airport).is_some()
    }

    /// Structural problems; empty when the instance is well formed.
    pub fn issues(&self) -> Vec<String> {
        let mut out = Vec::new();
        let p = self.airports.len();
        if self.gamma == 0 {
            out.push("gamma must be at least 1".into());
        }
        if self.fleet.len() != p {
            out.push(format!("fleet lists {} airports, instance has {p}", self.fleet.len()));
        }
        let mut seen = BTreeSet::new();
        for (i, b) in self.bases.iter().enumerate() {
            if b.airport >= p {
                out.push(format!("base {i} names unknown airport {}", b.airport));
            } else if !seen.insert(b.airport) {
                out.push(format!("airport {} listed as a base twice", b.airport));
            }
            if b.window_start >= 1440 || b.window_end >= 1440 {
                out.push(format!("base {i} window must use minutes 0..1440"));
            }
        }
        let end = self.horizon_end();
        for (i, l) in self.legs.iter().enumerate() {
            if l.dep >= p || l.arr >= p {
                out.push(format!("leg {i} names an unknown airport"));
            }
            if l.arr_time <= l.dep_time {
                out.push(format!("leg {i} arrives at {} before departing at {}", l.arr_time, l.dep_time));
            }
            if l.dep_time < 0 || l.arr_time >= end {
                out.push(format!("leg {i} lies outside the horizon [0, {end})"));
            }
        }
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuietNightReport {
    pub quiet: bool,
    pub reasons: Vec<String>,
}

pub fn is_quiet_night(inst: &FiniteHorizonInstance) -> QuietNightReport {
    let mut reasons = inst.issues();
    if !reasons.is_empty() {
        return QuietNightReport { quiet: false, reasons };
    }
    let offsets: BTreeSet<i32> = inst.bases.iter().map(|b| inst.airports[b.airport].utc_offset_minutes).collect();
    if offsets.len() > 1 {
        reasons.push(format!("bases span several time zones: {offsets:?}"));
    }
    for b in &inst.bases {
        if b.duration as i64 != b.window_length() {
            reasons.push(format!(
                "base {}: maintenance takes {} minutes but the window lasts {}",
                b.airport,
                b.duration,
                b.window_length()
            ));
        }
        if !b.spans_midnight() {
            reasons.push(format!("base {}: maintenance window does not cover midnight", b.airport));
        }
    }
    if inst.horizon_days < 3 {
        reasons.push(format!("horizon of {} days leaves no empty first and last day", inst.horizon_days));
    }
    let last = inst.horizon_days as i64 - 1;
    for (i, l) in inst.legs.iter().enumerate() {
        if l.arr_time - l.dep_time >= MINUTES_PER_DAY {
            reasons.push(format!("leg {i} lasts 24 hours or more"));
        }
        for (what, t) in [("departs", l.dep_time), ("arrives", l.arr_time)] {
            let d = day_of(t);
            if d == 0 || d == last {
                reasons.push(format!("leg {i} {what} on day {d}, which must be empty"));
            }
        }
        if let Some(b) = inst.base(l.arr) {
            if b.strictly_inside(time_of_day(l.arr_time)) {
                reasons.push(format!("leg {i} arrives at base {} during the maintenance window", l.arr));
            }
        }
        if let Some(b) = inst.base(l.dep) {
            let tod = time_of_day(l.dep_time);
            if b.strictly_inside(tod) || (tod == b.window_start as i64 && b.window_length() > 0) {
                reasons.push(format!("leg {i} departs from base {} during the maintenance window", l.dep));
            }
        }
    }
    QuietNightReport { quiet: reasons.is_empty(), reasons }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Route {
    pub start: usize,
    pub legs: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoutePlan {
    pub routes: Vec<Route>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainFailure {
    pub route: usize,
    /// Position of the offending leg in the route.
    pub position: usize,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaintenanceFailure {
    pub route: usize,
    /// First night after which the day counter exceeds gamma.
    pub night: i64,
    pub counter: u32,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlanDiagnostics {
    pub gamma: u32,
    pub instance_issues: Vec<String>,
    pub fleet_issues: Vec<String>,
    pub missing_legs: Vec<usize>,
    pub repeated_legs: Vec<usize>,
    pub unknown_legs: Vec<usize>,
    pub chain_failures: Vec<ChainFailure>,
    pub maintenance_failures: Vec<MaintenanceFailure>,
    /// Largest number of consecutive days without maintenance per route.
    pub route_max_gaps: Vec<u32>,
    pub max_gap: u32,
}

impl PlanDiagnostics {
    pub fn passed(&self) -> bool {
        self.instance_issues.is_empty()
            && self.fleet_issues.is_empty()
            && self.missing_legs.is_empty()
            && self.repeated_legs.is_empty()
            && self.unknown_legs.is_empty()
            && self.chain_failures.is_empty()
            && self.maintenance_failures.is_empty()
    }
}

/// Whether an airplane on the ground at `airport` during `[from, to)` can be
/// maintained during night `d`.
fn maintained(inst: &FiniteHorizonInstance, airport: usize, from: i64, to: i64, d: i64) -> bool {
    let Some(b) = inst.base(airport) else {
        return false;
    };
    let (ws, we) = b.night_window(d);
    let overlap = to.min(we) - from.max(ws);
    overlap > 0 && overlap >= b.duration as i64
}

pub fn validate_plan(inst: &FiniteHorizonInstance, plan: &RoutePlan) -> PlanDiagnostics {
    let mut d = PlanDiagnostics { gamma: inst.gamma, ..Default::default() };
    d.instance_issues = inst.issues();
    if !d.instance_issues.is_empty() {
        return d;
    }
    if plan.routes.len() as u64 != inst.fleet_size() {
        d.fleet_issues.push(format!("{} routes for {} airplanes", plan.routes.len(), inst.fleet_size()));
    }
    let mut starts = vec![0u64; inst.airports.len()];
    for (r, route) in plan.routes.iter().enumerate() {
        if route.start >= inst.airports.len() {
            d.fleet_issues.push(format!("route {r} starts at unknown airport {}", route.start));
        } else {
            starts[route.start] += 1;
        }
    }
    for (a, (&have, &want)) in starts.iter().zip(&inst.fleet).enumerate() {
        if have != want as u64 {
            d.fleet_issues.push(format!("{have} routes start at airport {a}, which holds {want} airplanes"));
        }
    }
    let mut count = vec![0usize; inst.legs.len()];
    let end = inst.horizon_end();
    for (r, route) in plan.routes.iter().enumerate() {
        if let Some(&l) = route.legs.iter().find(|&&l| l >= inst.legs.len()) {
            d.unknown_legs.push(l);
            d.route_max_gaps.push(0);
            continue;
        }
        let failures_before = d.chain_failures.len();
        let (mut at, mut since) = (route.start, 0i64);
        let mut ground = Vec::new();
        for (pos, &l) in route.legs.iter().enumerate() {
            count[l] += 1;
            let leg = &inst.legs[l];
            if leg.dep != at {
                d.chain_failures.push(ChainFailure {
                    route: r,
                    position: pos,
                    reason: format!("leg {l} departs airport {} but the airplane is at {at}", leg.dep),
                });
            }
            if leg.dep_time < since {
                d.chain_failures.push(ChainFailure {
                    route: r,
                    position: pos,
                    reason: format!("leg {l} departs at {} before the airplane is available at {since}", leg.dep_time),
                });
            }
            ground.push((at, since, leg.dep_time));
            at = leg.arr;
            since = leg.arr_time;
        }
        ground.push((at, since, end));
        if d.chain_failures.len() > failures_before {
            d.route_max_gaps.push(0);
            continue;
        }
        let (mut c, mut max) = (1u32, 1u32);
        let mut reported = false;
        for night in 0..inst.horizon_days as i64 - 1 {
            if ground.iter().any(|&(a, from, to)| maintained(inst, a, from, to, night)) {
                c = 1;
            } else {
                c += 1;
            }
            max = max.max(c);
            if c > inst.gamma && !reported {
                d.maintenance_failures.push(MaintenanceFailure { route: r, night, counter: c });
                reported = true;
            }
        }
        d.route_max_gaps.push(max);
        d.max_gap = d.max_gap.max(max);
    }
    for (l, &c) in count.iter().enumerate() {
        match c {
            0 => d.missing_legs.push(l),
            1 => {}
            _ => d.repeated_legs.push(l),
        }
    }
    d
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const H: i64 = 60;
    pub(crate) const DAY: i64 = MINUTES_PER_DAY;

    pub(crate) fn base(airport: usize) -> MaintenanceBase {
        MaintenanceBase { airport, window_start: 1200, window_end: 360, duration: 600 }
    }

    pub(crate) fn airports(n: usize) -> Vec<Airport> {
        (0..n).map(|i| Airport { name: format!("P{i}"), utc_offset_minutes: 0 }).collect()
    }

    /// One airplane at base 0 flying 0 -> 1 on day 1; both airports are bases.
    pub(crate) fn single_leg(gamma: u32) -> FiniteHorizonInstance {
        FiniteHorizonInstance {
            airports: airports(2),
            bases: vec![base(0), base(1)],
            legs: vec![Leg { dep: 0, arr: 1, dep_time: DAY + 8 * H, arr_time: DAY + 10 * H }],
            fleet: vec![1, 0],
            gamma,
            horizon_days: 3,
        }
    }

    fn plan(routes: &[(usize, &[usize])]) -> RoutePlan {
        RoutePlan { routes: routes.iter().map(|&(start, legs)| Route { start, legs: legs.to_vec() }).collect() }
    }

    #[test]
    fn single_leg_plan_passes() {
        let inst = single_leg(1);
        assert!(is_quiet_night(&inst).quiet);
        let d = validate_plan(&inst, &plan(&[(0, &[0])]));
        assert!(d.passed(), "{d:?}");
        assert_eq!(d.max_gap, 1);
    }

    #[test]
    fn simultaneous_legs_cannot_chain() {
        let mut inst = single_leg(3);
        inst.legs.push(Leg { dep: 1, arr: 0, dep_time: DAY + 9 * H, arr_time: DAY + 11 * H });
        let d = validate_plan(&inst, &plan(&[(0, &[0, 1])]));
        assert_eq!(d.chain_failures.len(), 1);
        assert_eq!(d.chain_failures[0].position, 1);
    }

    #[test]
    fn gap_over_gamma_is_reported() {
        // one airplane idles at non-base 1 for three nights
        let inst = FiniteHorizonInstance {
            airports: airports(2),
            bases: vec![base(0)],
            legs: vec![],
            fleet: vec![0, 1],
            gamma: 2,
            horizon_days: 4,
        };
        let d = validate_plan(&inst, &plan(&[(1, &[])]));
        assert_eq!(d.maintenance_failures, vec![MaintenanceFailure { route: 0, night: 1, counter: 3 }]);
        assert_eq!(d.max_gap, 4);
    }

    #[test]
    fn quiet_night_reasons() {
        let mut inst = single_leg(1);
        inst.legs[0].arr_time = DAY + 21 * H;
        let r = is_quiet_night(&inst);
        assert!(!r.quiet);
        assert!(r.reasons[0].contains("leg 0 arrives at base 1"), "{r:?}");

        let mut inst = single_leg(1);
        inst.legs[0].arr_time = inst.legs[0].dep_time + 25 * H;
        inst.horizon_days = 5;
        assert!(is_quiet_night(&inst).reasons.iter().any(|r| r.contains("24 hours")));

        let mut inst = single_leg(1);
        inst.bases[0].duration = 30;
        assert!(!is_quiet_night(&inst).quiet);

        let mut inst = single_leg(1);
        inst.horizon_days = 2;
        assert!(!is_quiet_night(&inst).quiet);
    }

    #[test]
    fn structural_issues() {
        let mut inst = single_leg(1);
        inst.legs[0].arr = 7;
        inst.fleet.pop();
        let issues = inst.issues();
        assert_eq!(issues.len(), 2, "{issues:?}");
        let d = validate_plan(&inst, &plan(&[(0, &[0])]));
        assert!(!d.passed());
    }

    #[test]
    fn windows() {
        let b = base(0);
        assert_eq!(b.window_length(), 600);
        assert_eq!(b.night_window(1), (DAY + 1200, 2 * DAY + 360));
        let early = MaintenanceBase { airport: 0, window_start: 0, window_end: 300, duration: 300 };
        assert!(early.spans_midnight());
        assert_eq!(early.night_window(1), (2 * DAY, 2 * DAY + 300));
        let inside = MaintenanceBase { airport: 0, window_start: 60, window_end: 300, duration: 240 };
        assert!(!inside.spans_midnight());
    }
}
