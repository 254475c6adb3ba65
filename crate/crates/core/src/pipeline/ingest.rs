//! Daily-count input: `topic_id,date,count` rows as CSV or JSON lines.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tdv::TopicSeries;

const DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    #[default]
    Csv,
    Jsonl,
}

impl FromStr for InputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(InputFormat::Csv),
            "jsonl" => Ok(InputFormat::Jsonl),
            other => Err(Error::InvalidParameter(format!("unknown input format `{other}`"))),
        }
    }
}

/// Inclusive day range; open ends default to the earliest and latest dates
/// present in the input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DateRange {
    pub from: Option<NaiveDate>,
    pub to: Option<NaiveDate>,
}

/// One `(topic, day, count)` observation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountRow {
    pub topic_id: String,
    pub date: NaiveDate,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ingested {
    /// Sorted by topic id, all spanning `from..=to`.
    pub series: Vec<TopicSeries>,
    /// Topics with no activity inside the range.
    pub excluded: Vec<String>,
    /// Rows dropped for falling outside the range.
    pub out_of_range: usize,
    pub from: NaiveDate,
    pub to: NaiveDate,
}

pub fn ingest(paths: &[PathBuf], format: InputFormat, range: DateRange) -> Result<Ingested> {
    let mut rows = Vec::new();
    for path in paths {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        rows.extend(read_rows(file, path, format)?);
    }
    assemble(rows, range)
}

pub fn read_rows<R: Read>(reader: R, source: &Path, format: InputFormat) -> Result<Vec<CountRow>> {
    match format {
        InputFormat::Csv => read_csv(reader, source),
        InputFormat::Jsonl => read_jsonl(reader, source),
    }
}

fn parse_error(source: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: source.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn parse_date(source: &Path, line: u64, raw: &str) -> Result<NaiveDate> {
    NaiveDate::parse_from_str(raw.trim(), DATE_FORMAT)
        .map_err(|e| parse_error(source, line, format!("bad date `{raw}`: {e}")))
}

fn parse_count(source: &Path, line: u64, raw: &str) -> Result<u64> {
    let raw = raw.trim();
    match raw.parse::<i64>() {
        Ok(c) if c < 0 => Err(parse_error(source, line, format!("negative count {c}"))),
        Ok(c) => Ok(c as u64),
        Err(_) => raw
            .parse::<u64>()
            .map_err(|e| parse_error(source, line, format!("bad count `{raw}`: {e}"))),
    }
}

fn read_csv<R: Read>(reader: R, source: &Path) -> Result<Vec<CountRow>> {
    let mut rdr = csv::ReaderBuilder::new().flexible(true).from_reader(reader);
    let header_line = 1;
    let headers = rdr
        .headers()
        .map_err(|e| parse_error(source, header_line, e.to_string()))?
        .clone();
    let expected = ["topic_id", "date", "count"];
    if headers.len() != 3 || headers.iter().zip(expected).any(|(h, e)| h.trim() != e) {
        return Err(parse_error(
            source,
            header_line,
            format!("expected header `topic_id,date,count`, found `{}`", headers.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            parse_error(source, line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 3 {
            return Err(parse_error(source, line, format!("expected 3 fields, found {}", record.len())));
        }
        let topic_id = record[0].trim();
        if topic_id.is_empty() {
            return Err(parse_error(source, line, "empty topic id"));
        }
        rows.push(CountRow {
            topic_id: topic_id.to_owned(),
            date: parse_date(source, line, &record[1])?,
            count: parse_count(source, line, &record[2])?,
        });
    }
    Ok(rows)
}

#[derive(Deserialize)]
struct JsonRow {
    topic_id: String,
    date: String,
    count: serde_json::Number,
}

fn read_jsonl<R: Read>(reader: R, source: &Path) -> Result<Vec<CountRow>> {
    let mut rows = Vec::new();
    for (i, line) in BufReader::new(reader).lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line.map_err(|e| Error::io(source, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let row: JsonRow =
            serde_json::from_str(&line).map_err(|e| parse_error(source, line_no, e.to_string()))?;
        if row.topic_id.trim().is_empty() {
            return Err(parse_error(source, line_no, "empty topic id"));
        }
        rows.push(CountRow {
            topic_id: row.topic_id.trim().to_owned(),
            date: parse_date(source, line_no, &row.date)?,
            count: parse_count(source, line_no, &row.count.to_string())?,
        });
    }
    Ok(rows)
}

/// Groups rows into per-topic series over a common range, zero-filling
/// missing days.
pub fn assemble(rows: Vec<CountRow>, range: DateRange) -> Result<Ingested> {
    let (Some(first), Some(last)) = (
        rows.iter().map(|r| r.date).min(),
        rows.iter().map(|r| r.date).max(),
    ) else {
        return Err(Error::InsufficientData("input contains no rows".into()));
    };
    let from = range.from.unwrap_or(first);
    let to = range.to.unwrap_or(last);
    if from > to {
        return Err(Error::InvalidParameter(format!("empty date range {from}..{to}")));
    }
    let days = (to - from).num_days() as usize + 1;

    let mut by_topic: BTreeMap<String, BTreeMap<NaiveDate, u64>> = BTreeMap::new();
    for row in rows {
        match by_topic.entry(row.topic_id.clone()).or_default().entry(row.date) {
            Entry::Occupied(_) => {
                return Err(Error::DuplicateKey {
                    topic: row.topic_id,
                    date: row.date.format(DATE_FORMAT).to_string(),
                })
            }
            Entry::Vacant(slot) => {
                slot.insert(row.count);
            }
        }
    }

    let mut series = Vec::new();
    let mut excluded = Vec::new();
    let mut out_of_range = 0;
    for (topic, counts_by_day) in by_topic {
        let mut counts = vec![0u64; days];
        for (date, count) in counts_by_day {
            if date < from || date > to {
                out_of_range += 1;
            } else {
                counts[(date - from).num_days() as usize] = count;
            }
        }
        if counts.iter().all(|c| *c == 0) {
            excluded.push(topic);
        } else {
            series.push(TopicSeries::new(topic, from, counts)?);
        }
    }
    Ok(Ingested {
        series,
        excluded,
        out_of_range,
        from,
        to,
    })
}

/// Writes series in the CSV input format, one row per topic and day
/// (zero days included).
pub fn write_counts_csv<W: Write>(series: &[TopicSeries], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let io = |e: csv::Error| Error::InvalidInput(format!("csv write failed: {e}"));
    w.write_record(["topic_id", "date", "count"]).map_err(io)?;
    for s in series {
        for (date, count) in s.start_date().iter_days().zip(s.counts()) {
            w.write_record([s.topic_id(), &date.format(DATE_FORMAT).to_string(), &count.to_string()])
                .map_err(io)?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv output>", e))?;
    Ok(())
}
