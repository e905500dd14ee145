//! `athlete_id,date,load,planned` load logs.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use chrono::NaiveDate;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::series::WorkloadSeries;

pub const HEADER: [&str; 4] = ["athlete_id", "date", "load", "planned"];

/// Realized and planned histories for one athlete. Either may be empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AthleteLog {
    pub athlete_id: String,
    pub realized: WorkloadSeries,
    pub planned: WorkloadSeries,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Imputation {
    pub athlete_id: String,
    pub planned: bool,
    pub date: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct ParseReport {
    pub rows: usize,
    pub athletes: usize,
    pub imputed: Vec<Imputation>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LoadLog {
    /// Sorted by athlete id.
    pub athletes: Vec<AthleteLog>,
    pub report: ParseReport,
}

impl LoadLog {
    pub fn athlete(&self, id: &str) -> Option<&AthleteLog> {
        self.athletes.iter().find(|a| a.athlete_id == id)
    }
}

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse {
        line,
        reason: reason.into(),
    }
}

pub fn parse_load_log<R: Read>(reader: R) -> Result<LoadLog> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = rdr.records();

    match rows.next() {
        Some(Ok(h)) if h.iter().eq(HEADER) => {}
        Some(Ok(h)) => {
            return Err(parse_err(
                1,
                format!(
                    "expected header `{}`, got `{}`",
                    HEADER.join(","),
                    h.iter().collect::<Vec<_>>().join(",")
                ),
            ));
        }
        Some(Err(e)) => return Err(parse_err(1, e.to_string())),
        None => return Err(parse_err(1, "missing header")),
    }

    // (athlete, planned) -> date -> (load, line)
    let mut groups: BTreeMap<(String, bool), BTreeMap<NaiveDate, f64>> = BTreeMap::new();
    let mut n_rows = 0;
    for rec in rows {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            parse_err(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != 4 {
            return Err(parse_err(line, format!("expected 4 fields, found {}", rec.len())));
        }
        let athlete = rec[0].to_string();
        if athlete.is_empty() {
            return Err(parse_err(line, "empty athlete_id"));
        }
        let date = NaiveDate::parse_from_str(&rec[1], "%Y-%m-%d")
            .map_err(|e| parse_err(line, format!("bad date `{}`: {e}", &rec[1])))?;
        let load: f64 = rec[2]
            .parse()
            .map_err(|_| parse_err(line, format!("bad load `{}`", &rec[2])))?;
        if !(load.is_finite() && load >= 0.0) {
            return Err(parse_err(
                line,
                format!("load `{}` must be finite and nonnegative", &rec[2]),
            ));
        }
        let planned = match &rec[3] {
            "0" => false,
            "1" => true,
            other => return Err(parse_err(line, format!("planned must be 0 or 1, got `{other}`"))),
        };
        let days = groups.entry((athlete.clone(), planned)).or_default();
        if days.insert(date, load).is_some() {
            return Err(Error::DuplicateRecord {
                athlete,
                date,
                planned,
                line,
            });
        }
        n_rows += 1;
    }

    let mut by_athlete: BTreeMap<String, AthleteLog> = BTreeMap::new();
    let mut imputed = Vec::new();
    for ((athlete, planned), days) in groups {
        let series = WorkloadSeries::from_records(athlete.clone(), days)?;
        imputed.extend(series.imputed_dates().into_iter().map(|date| Imputation {
            athlete_id: athlete.clone(),
            planned,
            date,
        }));
        let entry = by_athlete.entry(athlete.clone()).or_insert_with(|| AthleteLog {
            realized: WorkloadSeries::empty(athlete.clone()),
            planned: WorkloadSeries::empty(athlete.clone()),
            athlete_id: athlete,
        });
        if planned {
            entry.planned = series;
        } else {
            entry.realized = series;
        }
    }
    Ok(LoadLog {
        report: ParseReport {
            rows: n_rows,
            athletes: by_athlete.len(),
            imputed,
        },
        athletes: by_athlete.into_values().collect(),
    })
}

pub fn read_load_log(path: impl AsRef<Path>) -> Result<LoadLog> {
    parse_load_log(std::fs::File::open(path)?)
}

/// Writes recorded (non-imputed) days only, realized rows before planned.
pub fn write_load_log<W: Write>(log: &LoadLog, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(HEADER).map_err(io)?;
    for a in &log.athletes {
        for (series, flag) in [(&a.realized, "0"), (&a.planned, "1")] {
            for d in series.days().iter().filter(|d| !d.imputed) {
                let date = d.date.format("%Y-%m-%d").to_string();
                w.write_record([a.athlete_id.as_str(), &date, &d.load.to_string(), flag])
                    .map_err(io)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn parse(s: &str) -> Result<LoadLog> {
        parse_load_log(s.as_bytes())
    }

    fn rows(id: &str, days: impl Iterator<Item = u32>, planned: u8) -> String {
        days.map(|d| {
            let date = NaiveDate::from_ymd_opt(2024, 1, 1).unwrap() + chrono::Duration::days(d as i64);
            format!("{id},{date},{},{planned}\n", 10 + d % 3)
        })
        .collect()
    }

    #[test]
    fn four_clean_weeks() {
        let log = parse(&format!("athlete_id,date,load,planned\n{}", rows("a", 0..28, 0))).unwrap();
        assert_eq!(log.athletes.len(), 1);
        assert_eq!(log.athletes[0].realized.len(), 28);
        assert!(log.athletes[0].planned.is_empty());
        assert!(log.report.imputed.is_empty());
    }

    #[test]
    fn missing_day_imputed_and_reported() {
        let body = rows("a", (0..28).filter(|&d| d != 14), 0);
        let log = parse(&format!("athlete_id,date,load,planned\n{body}")).unwrap();
        let s = &log.athletes[0].realized;
        assert_eq!(s.len(), 28);
        let day15 = NaiveDate::from_ymd_opt(2024, 1, 15).unwrap();
        assert_eq!(s.imputed_dates(), vec![day15]);
        assert_eq!(s.load_on(day15), Some(0.0));
        assert_eq!(log.report.imputed[0].date, day15);
    }

    #[test]
    fn planned_and_realized_align() {
        let body = rows("a", 0..14, 0) + &rows("a", 0..14, 1);
        let log = parse(&format!("athlete_id,date,load,planned\n{body}")).unwrap();
        let a = &log.athletes[0];
        assert_eq!(a.realized.start(), a.planned.start());
        assert_eq!(a.realized.end(), a.planned.end());
    }

    #[test]
    fn rejects_bad_rows_with_line_numbers() {
        let cases = [
            ("athlete_id,date,load,planned\na,2024-01-01,5,0\na,2024-13-01,5,0\n", 3),
            ("athlete_id,date,load,planned\na,2024-01-01,-1,0\n", 2),
            ("athlete_id,date,load,planned\na,2024-01-01,NaN,0\n", 2),
            ("athlete_id,date,load,planned\na,2024-01-01,5,2\n", 2),
            ("athlete_id,date,load,planned\na,2024-01-01,5\n", 2),
        ];
        for (text, line) in cases {
            match parse(text) {
                Err(Error::Parse { line: l, .. }) => assert_eq!(l, line, "{text}"),
                other => panic!("expected parse error for {text:?}, got {other:?}"),
            }
        }
        assert!(matches!(parse("a,b,c,d\n"), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn rejects_duplicates() {
        let text = "athlete_id,date,load,planned\na,2024-01-01,5,0\na,2024-01-02,5,0\na,2024-01-01,6,0\n";
        match parse(text) {
            Err(Error::DuplicateRecord { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        // the same day may appear once as realized and once as planned
        assert!(parse("athlete_id,date,load,planned\na,2024-01-01,5,0\na,2024-01-01,6,1\n").is_ok());
    }

    proptest! {
        #[test]
        fn round_trip(
            loads in prop::collection::vec(prop::option::of(0.0f64..1e4), 1..60),
            planned in any::<bool>(),
        ) {
            let start = NaiveDate::from_ymd_opt(2024, 3, 1).unwrap();
            let mut text = String::from("athlete_id,date,load,planned\n");
            for (i, l) in loads.iter().enumerate() {
                if let Some(l) = l {
                    let date = start + chrono::Duration::days(i as i64);
                    text += &format!("x,{date},{l},{}\n", u8::from(planned));
                }
            }
            prop_assume!(loads.iter().any(Option::is_some));
            let a = parse(&text).unwrap();
            let mut out = Vec::new();
            write_load_log(&a, &mut out).unwrap();
            let b = parse_load_log(out.as_slice()).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
