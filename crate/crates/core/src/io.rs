//! File formats.
//!
//! Sample sequences as CSV:
//!
//! ```text
//! # qwalk sample sequence
//! # protocol=reset
//! # nodes=25
//! # steps=100
//! # coin=symmetric
//! # seed=7
//! # length=3
//! value
//! 4
//! 17
//! 2
//! ```
//!
//! and as JSON: `{"meta": {protocol, nodes, steps, coin, seed, length}, "data": [4, 17, 2]}`.
//! Floating-point numbers everywhere are written with 17 significant digits.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::protocols::{SampleSequence, SequenceMeta};

/// `x` with 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::validation(format!(
                "unknown format '{other}' (expected csv or json)"
            ))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SequenceDoc {
    meta: SequenceMeta,
    data: Vec<usize>,
}

pub fn sequence_to_csv(seq: &SampleSequence) -> String {
    let m = seq.meta();
    let mut out = String::with_capacity(seq.len() * 4 + 128);
    out.push_str("# qwalk sample sequence\n");
    let _ = writeln!(out, "# protocol={}", m.protocol);
    let _ = writeln!(out, "# nodes={}", m.nodes);
    let _ = writeln!(out, "# steps={}", m.steps);
    let _ = writeln!(out, "# coin={}", m.coin);
    let _ = writeln!(out, "# seed={}", m.seed);
    let _ = writeln!(out, "# length={}", m.length);
    out.push_str("value\n");
    for v in seq.values() {
        let _ = writeln!(out, "{v}");
    }
    out
}

pub fn sequence_from_csv(text: &str) -> Result<SampleSequence> {
    let mut meta: BTreeMap<String, (usize, String)> = BTreeMap::new();
    let mut header_seen = false;
    let mut values = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some((k, v)) = comment.split_once('=') {
                meta.insert(k.trim().to_string(), (line_no, v.trim().to_string()));
            }
            continue;
        }
        if !header_seen {
            if line != "value" {
                return Err(Error::parse(
                    line_no,
                    format!("expected header 'value', found '{line}'"),
                ));
            }
            header_seen = true;
            continue;
        }
        let v = line
            .parse::<usize>()
            .map_err(|e| Error::parse(line_no, format!("invalid value '{line}': {e}")))?;
        values.push(v);
    }
    if !header_seen {
        return Err(Error::parse(text.lines().count().max(1), "missing 'value' header"));
    }

    fn field<T: FromStr>(meta: &BTreeMap<String, (usize, String)>, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let (line, raw) = meta
            .get(key)
            .ok_or_else(|| Error::parse(1, format!("missing metadata '# {key}=...'")))?;
        raw.parse::<T>()
            .map_err(|e| Error::parse(*line, format!("invalid {key} '{raw}': {e}")))
    }

    let length = match meta.get("length") {
        Some(_) => field::<usize>(&meta, "length")?,
        None => values.len(),
    };
    let seq_meta = SequenceMeta {
        protocol: field(&meta, "protocol")?,
        nodes: field(&meta, "nodes")?,
        steps: field(&meta, "steps")?,
        coin: field(&meta, "coin")?,
        seed: field(&meta, "seed")?,
        length,
    };
    SampleSequence::new(values, seq_meta).map_err(|e| Error::parse(0, e.to_string()))
}

pub fn sequence_to_json(seq: &SampleSequence) -> String {
    let doc = SequenceDoc {
        meta: seq.meta().clone(),
        data: seq.values().to_vec(),
    };
    let mut s = serde_json::to_string(&doc).expect("sequence serializes");
    s.push('\n');
    s
}

pub fn sequence_from_json(text: &str) -> Result<SampleSequence> {
    let doc: SequenceDoc = serde_json::from_str(text).map_err(|e| Error::parse(e.line(), e.to_string()))?;
    SampleSequence::new(doc.data, doc.meta).map_err(|e| Error::parse(0, e.to_string()))
}

pub fn sequence_to_string(seq: &SampleSequence, format: Format) -> String {
    match format {
        Format::Csv => sequence_to_csv(seq),
        Format::Json => sequence_to_json(seq),
    }
}

/// Accepts either format, choosing JSON when the text starts with `{`.
pub fn sequence_from_str(text: &str) -> Result<SampleSequence> {
    if text.trim_start().starts_with('{') {
        sequence_from_json(text)
    } else {
        sequence_from_csv(text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::Protocol;

    fn sample() -> SampleSequence {
        let meta = SequenceMeta {
            protocol: Protocol::Cesaro,
            nodes: 5,
            steps: 12,
            coin: "hadamard".into(),
            seed: u64::MAX,
            length: 4,
        };
        SampleSequence::new(vec![0, 4, 2, 2], meta).unwrap()
    }

    #[test]
    fn float_formatting_round_trips() {
        for x in [0.1, 1.0 / 3.0, std::f64::consts::FRAC_1_SQRT_2, 0.0, -2.5e-300] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn csv_layout() {
        let text = sequence_to_csv(&sample());
        assert!(text.starts_with("# qwalk sample sequence\n# protocol=cesaro\n# nodes=5\n"));
        assert!(text.ends_with("value\n0\n4\n2\n2\n"));
    }

    #[test]
    fn both_formats_round_trip() {
        let s = sample();
        assert_eq!(sequence_from_str(&sequence_to_csv(&s)).unwrap(), s);
        assert_eq!(sequence_from_str(&sequence_to_json(&s)).unwrap(), s);
    }

    #[test]
    fn csv_errors_carry_line_numbers() {
        let text = "# protocol=reset\n# nodes=5\n# steps=1\n# coin=symmetric\n# seed=0\nvalue\n1\nx\n";
        match sequence_from_csv(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 8),
            other => panic!("expected parse error, got {other:?}"),
        }
        let bad_meta = "# protocol=reset\n# nodes=five\n# steps=1\n# coin=symmetric\n# seed=0\nvalue\n1\n";
        match sequence_from_csv(bad_meta) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(sequence_from_csv("value\n1\n").is_err());
        assert!(sequence_from_csv("# nodes=3\n").is_err());
    }

    #[test]
    fn json_errors() {
        assert!(matches!(sequence_from_json("{\"meta\": 3}"), Err(Error::Parse { .. })));
    }
}
