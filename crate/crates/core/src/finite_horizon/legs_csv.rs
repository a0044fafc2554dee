use std::io::Read;

use serde::Deserialize;

use super::{Airport, FhError, Leg, MINUTES_PER_DAY};

#[derive(Deserialize)]
struct Row {
    #[serde(rename = "leg-id")]
    id: usize,
    dep: String,
    arr: String,
    #[serde(rename = "dep-time")]
    dep_time: String,
    #[serde(rename = "arr-time")]
    arr_time: String,
}

/// Parses either plain minutes (`2400`) or `day:HH:MM` (`1:16:00`).
pub fn parse_time(s: &str) -> Option<i64> {
    let s = s.trim();
    if let Ok(m) = s.parse::<i64>() {
        return Some(m);
    }
    let mut parts = s.split(':');
    let (d, h, m) = (parts.next()?, parts.next()?, parts.next()?);
    if parts.next().is_some() {
        return None;
    }
    let (d, h, m): (i64, i64, i64) = (d.parse().ok()?, h.parse().ok()?, m.parse().ok()?);
    if !(0..24).contains(&h) || !(0..60).contains(&m) || d < 0 {
        return None;
    }
    Some(d * MINUTES_PER_DAY + h * 60 + m)
}

fn airport(airports: &[Airport], s: &str) -> Option<usize> {
    let s = s.trim();
    airports.iter().position(|a| a.name == s).or_else(|| s.parse().ok().filter(|&i| i < airports.len()))
}

/// Reads legs from CSV with header `leg-id,dep,arr,dep-time,arr-time`.
/// Airports are given by name or index; leg ids must be `0..n` in any order.
pub fn import_legs_csv<R: Read>(reader: R, airports: &[Airport]) -> Result<Vec<Leg>, FhError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut rows: Vec<(usize, Leg)> = Vec::new();
    for rec in rdr.deserialize::<Row>() {
        let row =
            rec.map_err(|e| FhError::Csv { line: e.position().map_or(0, |p| p.line()), detail: e.to_string() })?;
        // header is line 1
        let line = rows.len() as u64 + 2;
        let err = |detail: String| FhError::Csv { line, detail };
        let dep = airport(airports, &row.dep).ok_or_else(|| err(format!("unknown airport {:?}", row.dep)))?;
        let arr = airport(airports, &row.arr).ok_or_else(|| err(format!("unknown airport {:?}", row.arr)))?;
        let dep_time = parse_time(&row.dep_time).ok_or_else(|| err(format!("bad time {:?}", row.dep_time)))?;
        let arr_time = parse_time(&row.arr_time).ok_or_else(|| err(format!("bad time {:?}", row.arr_time)))?;
        rows.push((row.id, Leg { dep, arr, dep_time, arr_time }));
    }
    let n = rows.len();
    let mut legs: Vec<Option<Leg>> = vec![None; n];
    for (k, (id, leg)) in rows.into_iter().enumerate() {
        let line = k as u64 + 2;
        if id >= n {
            return Err(FhError::Csv { line, detail: format!("leg id {id} outside 0..{n}") });
        }
        if legs[id].replace(leg).is_some() {
            return Err(FhError::Csv { line, detail: format!("leg id {id} repeated") });
        }
    }
    Ok(legs.into_iter().map(|l| l.expect("ids form a permutation")).collect())
}
