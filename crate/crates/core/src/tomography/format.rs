//! Plain-text tomogram files.
//!
//! ```text
//! darkstate-tomogram v1 preparation projection duration count
//! rate_reference 300
//! .      0,+   1   152
//! +i     1     1   147
//! ```
//!
//! The first line fixes the version and column order. Label lists are
//! comma-separated; `.` stands for an empty list. Blank lines and lines
//! starting with `#` are ignored.

use std::io::{BufRead, Write};

use super::{MeasurementSetting, Tomogram};
use crate::error::{Error, Result};
use crate::qmath::MubState;

pub const FORMAT_HEADER: &str = "darkstate-tomogram v1 preparation projection duration count";

pub fn write_tomogram<W: Write>(t: &Tomogram, mut w: W) -> Result<()> {
    writeln!(w, "{FORMAT_HEADER}")?;
    writeln!(w, "rate_reference {}", t.rate_reference)?;
    for (s, c) in t.settings.iter().zip(&t.counts) {
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            labels(&s.preparation),
            labels(&s.projection),
            s.duration,
            c
        )?;
    }
    Ok(())
}

fn labels(l: &[MubState]) -> String {
    if l.is_empty() {
        ".".into()
    } else {
        l.iter().map(|x| x.as_str()).collect::<Vec<_>>().join(",")
    }
}

pub fn read_tomogram<R: BufRead>(r: R) -> Result<Tomogram> {
    let mut lines = r
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| {
            l.as_ref()
                .map(|s| !s.trim().is_empty() && !s.trim_start().starts_with('#'))
                .unwrap_or(true)
        });
    let err = |line: usize, message: String| Error::Format { line, message };

    let (n, header) = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let header = header?;
    if header.trim() != FORMAT_HEADER {
        return Err(err(n, format!("expected header `{FORMAT_HEADER}`")));
    }
    let (n, rate) = lines.next().ok_or_else(|| err(n + 1, "missing rate_reference line".into()))?;
    let rate = rate?;
    let rate = match rate.split_whitespace().collect::<Vec<_>>()[..] {
        ["rate_reference", v] => v.parse::<f64>().map_err(|e| err(n, format!("bad rate: {e}")))?,
        _ => return Err(err(n, "expected `rate_reference <value>`".into())),
    };

    let mut settings = Vec::new();
    let mut counts = Vec::new();
    for (n, line) in lines {
        let line = line?;
        let cols: Vec<&str> = line.split_whitespace().collect();
        if cols.len() != 4 {
            return Err(err(n, format!("expected 4 columns, found {}", cols.len())));
        }
        let prep = parse_labels(cols[0]).map_err(|m| err(n, m))?;
        let proj = parse_labels(cols[1]).map_err(|m| err(n, m))?;
        let duration: f64 = cols[2].parse().map_err(|e| err(n, format!("bad duration: {e}")))?;
        let count: u64 = cols[3].parse().map_err(|e| err(n, format!("bad count: {e}")))?;
        settings.push(MeasurementSetting::new(prep, proj, duration).map_err(|e| err(n, e.to_string()))?);
        counts.push(count);
    }
    Tomogram::new(settings, counts, rate).map_err(|e| err(0, e.to_string()))
}

fn parse_labels(s: &str) -> std::result::Result<Vec<MubState>, String> {
    if s == "." {
        return Ok(Vec::new());
    }
    s.split(',')
        .map(|l| l.parse::<MubState>().map_err(|e| e.to_string()))
        .collect()
}
