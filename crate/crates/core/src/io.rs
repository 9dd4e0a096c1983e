//! CSV ingestion and emission for workload traces.
//!
//! The on-disk format is a two-column CSV with a `t,value` header. The time
//! column holds either integer minute indices or ISO-8601 timestamps with
//! whole-minute precision; whichever the first row uses is required for the
//! rest of the file. Short runs of missing minutes are filled by linear
//! interpolation, longer ones are an error.

use std::io::{Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::series::{SamplingSpec, TimeSeries};

/// Knobs for [`read_series_csv_with`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IngestOptions {
    /// Column holding minute indices or timestamps.
    pub t_column: String,
    /// Column holding sample values.
    pub value_column: String,
    /// Longest run of missing minutes that interpolation may bridge.
    pub max_gap_minutes: u32,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            t_column: "t".into(),
            value_column: "value".into(),
            max_gap_minutes: 5,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum TimeFormat {
    MinuteIndex,
    Iso8601,
}

fn parse_minute(raw: &str, format: Option<TimeFormat>, line: u64) -> Result<(i64, TimeFormat)> {
    let raw = raw.trim();
    let malformed = |reason: String| Error::MalformedInput { line, reason };

    if format != Some(TimeFormat::Iso8601) {
        if let Ok(minute) = raw.parse::<i64>() {
            return match format {
                None | Some(TimeFormat::MinuteIndex) => Ok((minute, TimeFormat::MinuteIndex)),
                _ => unreachable!(),
            };
        }
        if format == Some(TimeFormat::MinuteIndex) {
            return Err(malformed(format!(
                "expected integer minute index, got {raw:?}"
            )));
        }
    }

    // RFC 3339 with offset, or a naive timestamp assumed UTC.
    let seconds = if let Ok(ts) = DateTime::parse_from_rfc3339(raw) {
        ts.timestamp()
    } else {
        let naive = NaiveDateTime::parse_from_str(raw, "%Y-%m-%dT%H:%M:%S")
            .or_else(|_| NaiveDateTime::parse_from_str(raw, "%Y-%m-%d %H:%M:%S"))
            .map_err(|_| malformed(format!("unrecognised time {raw:?}")))?;
        naive.and_utc().timestamp()
    };
    if seconds % 60 != 0 {
        return Err(malformed(format!(
            "timestamp {raw:?} is not on a whole minute"
        )));
    }
    Ok((seconds / 60, TimeFormat::Iso8601))
}

/// Read a trace with the default `t,value` schema and a 5-minute gap limit.
pub fn read_series_csv<T: Scalar>(path: impl AsRef<Path>) -> Result<TimeSeries<T>> {
    read_series_csv_with(path, &IngestOptions::default())
}

pub fn read_series_csv_with<T: Scalar>(
    path: impl AsRef<Path>,
    options: &IngestOptions,
) -> Result<TimeSeries<T>> {
    read_series_from(std::fs::File::open(path)?, options)
}

/// Reader-based ingestion, used by the file helpers and the tests.
pub fn read_series_from<T: Scalar>(
    reader: impl Read,
    options: &IngestOptions,
) -> Result<TimeSeries<T>> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = csv.headers()?.clone();
    let find = |name: &str| headers.iter().position(|h| h == name);
    let (t_idx, v_idx) = match (find(&options.t_column), find(&options.value_column)) {
        (Some(t), Some(v)) => (t, v),
        _ => {
            return Err(Error::MalformedInput {
                line: 1,
                reason: format!(
                    "header must contain {:?} and {:?} columns, got {:?}",
                    options.t_column,
                    options.value_column,
                    headers.iter().collect::<Vec<_>>()
                ),
            })
        }
    };

    let mut format = None;
    let mut start = 0i64;
    let mut prev_minute = 0i64;
    let mut values: Vec<T> = Vec::new();

    for record in csv.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let malformed = |reason: String| Error::MalformedInput { line, reason };

        let raw_t = record
            .get(t_idx)
            .ok_or_else(|| malformed("missing time field".into()))?;
        let raw_v = record
            .get(v_idx)
            .ok_or_else(|| malformed("missing value field".into()))?;

        let (minute, fmt) = parse_minute(raw_t, format, line)?;
        format = Some(fmt);

        let value: T = raw_v
            .parse()
            .map_err(|_| malformed(format!("unparseable value {raw_v:?}")))?;
        if !value.is_finite() {
            return Err(malformed(format!("non-finite value {raw_v:?}")));
        }

        if values.is_empty() {
            start = minute;
        } else {
            if minute <= prev_minute {
                return Err(malformed(format!(
                    "time must be strictly increasing, {minute} follows {prev_minute}"
                )));
            }
            let missing = (minute - prev_minute - 1) as u32;
            if missing > options.max_gap_minutes {
                return Err(Error::GapTooLarge {
                    after: prev_minute,
                    missing,
                    limit: options.max_gap_minutes,
                });
            }
            // Bridge the gap on the straight line between the two samples.
            let prev_value = *values.last().expect("non-empty");
            let span = T::from_usize_lossy(missing as usize + 1);
            for j in 1..=missing {
                let frac = T::from_usize_lossy(j as usize) / span;
                values.push(prev_value + (value - prev_value) * frac);
            }
        }
        values.push(value);
        prev_minute = minute;
    }

    TimeSeries::new(start, values, SamplingSpec::minutes())
}

/// Write a trace as `t,value` rows with integer minute indices.
///
/// Values are printed with the shortest representation that parses back to
/// the identical float, so writing and re-reading a series is lossless.
pub fn write_series_csv<T: Scalar>(series: &TimeSeries<T>, path: impl AsRef<Path>) -> Result<()> {
    write_series_to(series, std::fs::File::create(path)?)
}

pub fn write_series_to<T: Scalar>(series: &TimeSeries<T>, writer: impl Write) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["t", "value"])?;
    let period = series.period() as i64;
    for (i, v) in series.values().iter().enumerate() {
        let t = series.start_index() + i as i64 * period;
        csv.write_record([t.to_string(), format!("{v}")])?;
    }
    csv.flush()?;
    Ok(())
}
