//! CSV and JSON writers.

use std::io::Write;

use serde_json::{Map, Number, Value};

use crate::experiments::{Cell, Row};

/// Nine significant digits, dot decimal; fixed notation for moderate
/// magnitudes, scientific otherwise.
pub fn fmt_sig9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    if (-5..9).contains(&exp) {
        let prec = (8 - exp).max(0) as usize;
        format!("{x:.prec$}")
    } else {
        format!("{x:.8e}")
    }
}

fn cell_text(c: &Cell) -> String {
    match c {
        Cell::Num(x) => fmt_sig9(*x),
        Cell::Int(n) => n.to_string(),
        Cell::Text(s) => s.clone(),
        Cell::Empty => String::new(),
    }
}

pub fn write_csv<W: Write>(out: W, provenance: &str, columns: &[&str], rows: &[Row]) -> std::io::Result<()> {
    let mut out = out;
    writeln!(out, "# {provenance}")?;
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    w.write_record(columns)?;
    for r in rows {
        let mut rec: Vec<String> = r.cells.iter().map(cell_text).collect();
        rec.push(r.error.clone().unwrap_or_default());
        w.write_record(&rec)?;
    }
    w.flush()
}

fn cell_json(c: &Cell) -> Value {
    match c {
        Cell::Num(x) => {
            fmt_sig9(*x).parse::<f64>().ok().and_then(Number::from_f64).map(Value::Number).unwrap_or(Value::Null)
        }
        Cell::Int(n) => Value::from(*n),
        Cell::Text(s) => Value::from(s.as_str()),
        Cell::Empty => Value::Null,
    }
}

/// An array of row objects. JSON has no comments, so provenance is not
/// embedded.
pub fn write_json<W: Write>(mut out: W, columns: &[&str], rows: &[Row]) -> std::io::Result<()> {
    let arr: Vec<Value> = rows
        .iter()
        .map(|r| {
            let mut m = Map::new();
            for (name, c) in columns.iter().zip(&r.cells) {
                m.insert((*name).to_string(), cell_json(c));
            }
            m.insert("error".into(), r.error.as_deref().map(Value::from).unwrap_or(Value::Null));
            Value::Object(m)
        })
        .collect();
    serde_json::to_writer_pretty(&mut out, &arr)?;
    writeln!(out)
}
