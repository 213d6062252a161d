//! Loss data files.
//!
//! Three CSV files per dataset:
//!
//! * losses: `orc_id,year,amount`
//! * thresholds: `orc_id,threshold`
//! * below-threshold counts (optional): `orc_id,year,below_count`
//!
//! Amounts must lie strictly above their ORC's threshold.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use crate::format::fmt_f64;

#[derive(Debug, Clone, PartialEq)]
pub struct LossEvent {
    pub orc_id: String,
    pub year: i64,
    pub amount: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LossDataset {
    pub events: Vec<LossEvent>,
    pub thresholds: BTreeMap<String, f64>,
    /// Per ORC, per year count of losses at or below the threshold.
    pub below_counts: Option<BTreeMap<String, BTreeMap<i64, u64>>>,
}

/// One rejected row.
#[derive(Debug, Clone, PartialEq)]
pub struct RowError {
    pub file: String,
    /// 1-based line number, header is line 1.
    pub line: u64,
    pub message: String,
}

impl fmt::Display for RowError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.file, self.line, self.message)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{} invalid row(s):\n{}", .0.len(), .0.iter().map(|e| e.to_string()).collect::<Vec<_>>().join("\n"))]
    Rows(Vec<RowError>),
}

impl LossDataset {
    pub fn orcs(&self) -> Vec<String> {
        self.thresholds.keys().cloned().collect()
    }

    pub fn threshold(&self, orc: &str) -> Option<f64> {
        self.thresholds.get(orc).copied()
    }

    pub fn losses(&self, orc: &str) -> Vec<f64> {
        self.events.iter().filter(|e| e.orc_id == orc).map(|e| e.amount).collect()
    }

    /// First and last year with any record (loss or count) for the ORC.
    pub fn year_span(&self, orc: &str) -> Option<(i64, i64)> {
        let mut years: Vec<i64> = self.events.iter().filter(|e| e.orc_id == orc).map(|e| e.year).collect();
        if let Some(b) = self.below_counts.as_ref().and_then(|m| m.get(orc)) {
            years.extend(b.keys());
        }
        Some((*years.iter().min()?, *years.iter().max()?))
    }

    /// Reported losses per year over the ORC's year span, zero-filled.
    pub fn annual_counts(&self, orc: &str) -> Vec<u64> {
        let Some((first, last)) = self.year_span(orc) else { return Vec::new() };
        let mut counts = vec![0u64; (last - first + 1) as usize];
        for e in self.events.iter().filter(|e| e.orc_id == orc) {
            counts[(e.year - first) as usize] += 1;
        }
        counts
    }

    /// Years and amounts of the ORC's losses, in file order.
    pub fn years_and_amounts(&self, orc: &str) -> (Vec<i64>, Vec<f64>) {
        self.events.iter().filter(|e| e.orc_id == orc).map(|e| (e.year, e.amount)).unzip()
    }

    /// Total below-threshold count, if counts were supplied for this ORC.
    pub fn below_total(&self, orc: &str) -> Option<u64> {
        self.below_counts.as_ref()?.get(orc).map(|m| m.values().sum())
    }

    pub fn censored_available(&self, orc: &str) -> bool {
        self.below_total(orc).is_some()
    }

    pub fn ingest(losses: &Path, thresholds: &Path, below_counts: Option<&Path>) -> Result<Self, DatasetError> {
        let losses_text = read(losses)?;
        let thr_text = read(thresholds)?;
        let counts_text = below_counts.map(read).transpose()?;
        Self::parse(
            (&losses.display().to_string(), &losses_text),
            (&thresholds.display().to_string(), &thr_text),
            below_counts.map(|p| p.display().to_string()).as_deref().zip(counts_text.as_deref()),
        )
    }

    /// Parse from in-memory `(name, contents)` pairs.
    pub fn parse(
        losses: (&str, &str),
        thresholds: (&str, &str),
        below_counts: Option<(&str, &str)>,
    ) -> Result<Self, DatasetError> {
        let mut errors = Vec::new();

        let mut thr = BTreeMap::new();
        for (line, rec) in records(thresholds, &["orc_id", "threshold"], &mut errors) {
            let err = |m: String| RowError { file: thresholds.0.into(), line, message: m };
            match parse_f64(&rec[1]) {
                Ok(t) if t.is_finite() => {
                    if thr.insert(rec[0].clone(), t).is_some() {
                        errors.push(err(format!("duplicate threshold for ORC {:?}", rec[0])));
                    }
                }
                Ok(t) => errors.push(err(format!("threshold {t} is not finite"))),
                Err(m) => errors.push(err(m)),
            }
        }

        let mut events = Vec::new();
        for (line, rec) in records(losses, &["orc_id", "year", "amount"], &mut errors) {
            let err = |m: String| RowError { file: losses.0.into(), line, message: m };
            let year = match rec[1].trim().parse::<i64>() {
                Ok(y) => y,
                Err(_) => {
                    errors.push(err(format!("year {:?} is not an integer", rec[1])));
                    continue;
                }
            };
            let amount = match parse_f64(&rec[2]) {
                Ok(a) => a,
                Err(m) => {
                    errors.push(err(m));
                    continue;
                }
            };
            if !(amount.is_finite() && amount > 0.0) {
                errors.push(err(format!("amount {amount} must be a positive finite number")));
                continue;
            }
            match thr.get(&rec[0]) {
                None => errors.push(err(format!("no threshold for ORC {:?}", rec[0]))),
                Some(&tau) if amount <= tau => {
                    errors.push(err(format!("amount {amount} is not above the threshold {tau}")))
                }
                Some(_) => events.push(LossEvent { orc_id: rec[0].clone(), year, amount }),
            }
        }

        let below = below_counts.map(|src| {
            let mut map: BTreeMap<String, BTreeMap<i64, u64>> = BTreeMap::new();
            for (line, rec) in records(src, &["orc_id", "year", "below_count"], &mut errors) {
                let err = |m: String| RowError { file: src.0.into(), line, message: m };
                let (Ok(year), Ok(count)) = (rec[1].trim().parse::<i64>(), rec[2].trim().parse::<u64>()) else {
                    errors.push(err(format!("bad year or count in {rec:?}")));
                    continue;
                };
                if !thr.contains_key(&rec[0]) {
                    errors.push(err(format!("no threshold for ORC {:?}", rec[0])));
                } else if map.entry(rec[0].clone()).or_default().insert(year, count).is_some() {
                    errors.push(err(format!("duplicate count for ORC {:?} year {year}", rec[0])));
                }
            }
            map
        });

        errors.sort_by(|a, b| (&a.file, a.line).cmp(&(&b.file, b.line)));
        if errors.is_empty() {
            Ok(Self { events, thresholds: thr, below_counts: below })
        } else {
            Err(DatasetError::Rows(errors))
        }
    }

    /// CSV texts `(losses, thresholds, below_counts)`.
    pub fn emit(&self) -> (String, String, Option<String>) {
        let mut losses = String::from("orc_id,year,amount\n");
        for e in &self.events {
            losses.push_str(&format!("{},{},{}\n", e.orc_id, e.year, fmt_f64(e.amount)));
        }
        let mut thr = String::from("orc_id,threshold\n");
        for (k, v) in &self.thresholds {
            thr.push_str(&format!("{k},{}\n", fmt_f64(*v)));
        }
        let counts = self.below_counts.as_ref().map(|m| {
            let mut s = String::from("orc_id,year,below_count\n");
            for (orc, years) in m {
                for (y, c) in years {
                    s.push_str(&format!("{orc},{y},{c}\n"));
                }
            }
            s
        });
        (losses, thr, counts)
    }

    /// Write `losses.csv`, `thresholds.csv` and, if present,
    /// `below_counts.csv` into `dir`.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        let (l, t, c) = self.emit();
        std::fs::write(dir.join("losses.csv"), l)?;
        std::fs::write(dir.join("thresholds.csv"), t)?;
        if let Some(c) = c {
            std::fs::write(dir.join("below_counts.csv"), c)?;
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<String, DatasetError> {
    std::fs::read_to_string(path).map_err(|source| DatasetError::Io { path: path.display().to_string(), source })
}

fn parse_f64(s: &str) -> Result<f64, String> {
    s.trim().parse::<f64>().map_err(|_| format!("{s:?} is not a number"))
}

/// Records with their line numbers, after checking the header. Rows of the
/// wrong width are reported and skipped.
fn records(src: (&str, &str), header: &[&str], errors: &mut Vec<RowError>) -> Vec<(u64, Vec<String>)> {
    let (name, text) = src;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).flexible(true).from_reader(text.as_bytes());
    match rdr.headers() {
        Ok(h) if h.iter().map(str::trim).eq(header.iter().copied()) => {}
        Ok(h) => {
            errors.push(RowError {
                file: name.into(),
                line: 1,
                message: format!("header {:?}, expected {}", h.iter().collect::<Vec<_>>(), header.join(",")),
            });
            return Vec::new();
        }
        Err(e) => {
            errors.push(RowError { file: name.into(), line: 1, message: e.to_string() });
            return Vec::new();
        }
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        match rec {
            Ok(r) => {
                let line = r.position().map_or(0, |p| p.line());
                if r.len() != header.len() {
                    errors.push(RowError {
                        file: name.into(),
                        line,
                        message: format!("expected {} fields, found {}", header.len(), r.len()),
                    });
                } else {
                    out.push((line, r.iter().map(|f| f.trim().to_owned()).collect()));
                }
            }
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                errors.push(RowError { file: name.into(), line, message: e.to_string() });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const THR: &str = "orc_id,threshold\nA,1.0\n";

    fn parse(losses: &str) -> Result<LossDataset, DatasetError> {
        LossDataset::parse(("losses.csv", losses), ("thresholds.csv", THR), None)
    }

    #[test]
    fn three_rows() {
        let d = parse("orc_id,year,amount\nA,2001,1.5\nA,2001,2\nA,2003,10\n").unwrap();
        assert_eq!(d.events.len(), 3);
        assert_eq!(d.annual_counts("A"), vec![2, 0, 1]);
        assert!(!d.censored_available("A"));
    }

    #[test]
    fn amount_at_threshold_rejected_with_line() {
        let Err(DatasetError::Rows(e)) = parse("orc_id,year,amount\nA,2001,1.5\nA,2001,1.0\n") else { panic!() };
        assert_eq!(e.len(), 1);
        assert_eq!(e[0].line, 3);
        assert!(e[0].message.contains("not above"));
    }

    #[test]
    fn errors_are_itemised() {
        let Err(DatasetError::Rows(e)) = parse("orc_id,year,amount\nA,x,2\nA,2001,-1\nB,2001,5\nA,2001\n") else {
            panic!()
        };
        let lines: Vec<u64> = e.iter().map(|e| e.line).collect();
        assert_eq!(lines, vec![2, 3, 4, 5]);
    }

    #[test]
    fn bad_header() {
        assert!(parse("orc,year,amount\nA,2001,2\n").is_err());
    }

    #[test]
    fn round_trip() {
        let mut below = BTreeMap::new();
        below.insert("A".to_string(), BTreeMap::from([(2001, 4u64), (2002, 0)]));
        let d = LossDataset {
            events: vec![
                LossEvent { orc_id: "A".into(), year: 2001, amount: 1.0 + 1e-15 },
                LossEvent { orc_id: "A".into(), year: 2002, amount: std::f64::consts::PI * 1e7 },
            ],
            thresholds: BTreeMap::from([("A".to_string(), 1.0)]),
            below_counts: Some(below),
        };
        let (l, t, c) = d.emit();
        let back = LossDataset::parse(("l", &l), ("t", &t), Some(("c", c.as_deref().unwrap()))).unwrap();
        assert_eq!(back, d);
        assert_eq!(back.below_total("A"), Some(4));
    }
}
