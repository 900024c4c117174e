//! CSV report rows and per-suite summaries.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

/// One CSV row. Rows whose `case_id` starts with `case` are measurements;
/// the others (`golden-*`, `stability-*`, …) are suite-level checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRecord {
    pub suite: String,
    pub case_id: String,
    pub resolution: u32,
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub witness: String,
    pub pass: bool,
}

/// `lhs / rhs`, with `0/0 = 0`.
pub fn ratio(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 && rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

impl ReportRecord {
    pub fn new(
        suite: &str,
        case_id: impl Into<String>,
        resolution: u32,
        lhs: f64,
        rhs: f64,
        witness: impl Into<String>,
        pass: bool,
    ) -> Self {
        ReportRecord {
            suite: suite.to_string(),
            case_id: case_id.into(),
            resolution,
            lhs,
            rhs,
            constant: ratio(lhs, rhs),
            witness: witness.into(),
            pass,
        }
    }

    pub fn is_case(&self) -> bool {
        self.case_id.starts_with("case")
    }
}

pub fn case_id(i: usize) -> String {
    format!("case-{i:04}")
}

pub fn sort_records(records: &mut [ReportRecord]) {
    records.sort_by(|a, b| {
        (a.suite.as_str(), a.case_id.as_str(), a.resolution)
            .cmp(&(b.suite.as_str(), b.case_id.as_str(), b.resolution))
    });
}

pub fn write_csv<W: Write>(out: W, records: &[ReportRecord]) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> csv::Result<Vec<ReportRecord>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub suite: String,
    pub cases: usize,
    pub max_constant: f64,
    pub min_constant: f64,
    /// Largest factor between batch maxima at consecutive resolutions, in
    /// either direction; one for a single resolution.
    pub stability_factor: f64,
    pub pass: bool,
}

/// Batch maximum of the case constants at each resolution.
pub fn batch_maxima(records: &[ReportRecord]) -> BTreeMap<u32, f64> {
    let mut out: BTreeMap<u32, f64> = BTreeMap::new();
    for r in records.iter().filter(|r| r.is_case() && r.constant.is_finite()) {
        let e = out.entry(r.resolution).or_insert(f64::NEG_INFINITY);
        *e = e.max(r.constant);
    }
    out
}

pub fn stability_factor(maxima: &BTreeMap<u32, f64>) -> f64 {
    let v: Vec<f64> = maxima.values().copied().collect();
    v.windows(2)
        .map(|w| {
            let r = ratio(w[1], w[0]);
            if r.is_nan() {
                1.0
            } else {
                r.max(1.0 / r)
            }
        })
        .fold(1.0, f64::max)
}

pub fn summarize(suite: &str, records: &[ReportRecord]) -> Summary {
    let cases: Vec<&ReportRecord> = records.iter().filter(|r| r.suite == suite && r.is_case()).collect();
    let mut ids: Vec<&str> = cases.iter().map(|r| r.case_id.as_str()).collect();
    ids.dedup();
    let finite = cases.iter().map(|r| r.constant).filter(|c| c.is_finite());
    let (lo, hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| (lo.min(c), hi.max(c)));
    let own: Vec<ReportRecord> = records.iter().filter(|r| r.suite == suite).cloned().collect();
    Summary {
        suite: suite.to_string(),
        cases: ids.len(),
        max_constant: if hi.is_finite() { hi } else { 0.0 },
        min_constant: if lo.is_finite() { lo } else { 0.0 },
        stability_factor: stability_factor(&batch_maxima(&own)),
        pass: !own.is_empty() && own.iter().all(|r| r.pass),
    }
}

/// One summary per suite present in `records`, ordered by suite name.
pub fn summarize_all(records: &[ReportRecord]) -> Vec<Summary> {
    let mut suites: Vec<&str> = records.iter().map(|r| r.suite.as_str()).collect();
    suites.sort_unstable();
    suites.dedup();
    suites.into_iter().map(|s| summarize(s, records)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rec(case: &str, res: u32, c: f64) -> ReportRecord {
        ReportRecord::new("s", case, res, c, 1.0, "", true)
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let rows = vec![
            rec("case-0000", 8, 0.1 + 0.2),
            ReportRecord::new("s", "golden-x", 8, 1.0, f64::NAN, "", false),
        ];
        let mut buf = Vec::new();
        write_csv(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("suite,case_id,resolution,lhs,rhs,constant,witness,pass\n"));
        let back = read_csv(buf.as_slice()).unwrap();
        assert_eq!(back[0], rows[0]);
        assert!(back[1].rhs.is_nan());
    }

    #[test]
    fn summary_tracks_refinement() {
        let rows = vec![rec("case-0000", 8, 1.0), rec("case-0000", 9, 1.5), rec("case-0001", 9, 0.5)];
        let s = summarize("s", &rows);
        assert_eq!(s.cases, 2);
        assert_eq!(s.max_constant, 1.5);
        assert_eq!(s.min_constant, 0.5);
        assert_eq!(s.stability_factor, 1.5);
        assert!(s.pass);
    }
}
