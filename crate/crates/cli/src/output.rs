use std::fs::File;
use std::io::{self, BufWriter, Write};

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter};
use serde_json::Value;

use crate::error::CliError;

/// Compact JSON with every float written to 17 significant digits.
struct RoundTrip;

impl Formatter for RoundTrip {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        CompactFormatter.write_f64(writer, value as f64)
    }
}

pub fn to_json_line<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, RoundTrip);
    value
        .serialize(&mut ser)
        .expect("in-memory JSON serialization cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// What a command produced.
pub struct Payload {
    pub json: Value,
    /// Rendered `--format csv` output; `None` when the result is not tabular.
    pub csv: Option<String>,
}

impl Payload {
    pub fn json(json: Value) -> Self {
        Self { json, csv: None }
    }

    pub fn new(json: Value, csv: Option<String>) -> Self {
        Self { json, csv }
    }
}

/// Shortest decimal text that parses back to the same `f64`.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

fn sink(path: &str) -> Result<Box<dyn Write>, CliError> {
    if path == "-" {
        return Ok(Box::new(BufWriter::new(io::stdout().lock())));
    }
    let file =
        File::create(path).map_err(|e| CliError::usage(format!("cannot create {path}: {e}")))?;
    Ok(Box::new(BufWriter::new(file)))
}

pub fn emit(payload: &Payload, csv_format: bool, path: &str) -> Result<(), CliError> {
    let io_err = |e: &dyn std::fmt::Display| CliError::usage(format!("cannot write {path}: {e}"));
    let mut out = sink(path)?;
    let text = if csv_format {
        payload
            .csv
            .clone()
            .ok_or_else(|| CliError::usage("this command has no CSV form; use --format json"))?
    } else {
        to_json_line(&payload.json)
    };
    out.write_all(text.as_bytes()).map_err(|e| io_err(&e))?;
    out.flush().map_err(|e| io_err(&e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn floats_round_trip() {
        let v = json!({"a": 0.1, "b": [1.0, -2.5e-300], "n": 3, "nan": f64::NAN});
        let text = to_json_line(&v);
        assert_eq!(
            text,
            "{\"a\":1.0000000000000001e-1,\"b\":[1.0000000000000000e0,-2.5000000000000000e-300],\"n\":3,\"nan\":null}\n"
        );
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["a"].as_f64(), Some(0.1));
    }
}
