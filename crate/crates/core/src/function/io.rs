//! CSV input and output of functions.
//!
//! PA functions are stored as `vertex,value` rows in canonical vertex order
//! (the level follows from the row count `4·5^n + 1`); cell functions as
//! `cell,value` rows keyed by the address digit string.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::function::cell::CellFunction;
use crate::function::pa::PaFunction;
use crate::geometry::address::Address;

/// A function read from CSV.
#[derive(Clone, Debug)]
pub enum LoadedFunction {
    Pa(PaFunction<f64>),
    Cell(CellFunction<f64>),
}

fn csv_err(e: csv::Error) -> Error {
    Error::Format(e.to_string())
}

pub fn write_pa<W: Write>(f: &PaFunction<f64>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["vertex", "value"]).map_err(csv_err)?;
    for (i, v) in f.values().iter().enumerate() {
        w.write_record([i.to_string(), format!("{v:?}")]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_cells<W: Write>(f: &CellFunction<f64>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["cell", "value"]).map_err(csv_err)?;
    for (i, v) in f.values().iter().enumerate() {
        let a = Address::from_index(f.level(), i as u64)?;
        w.write_record([a.to_string(), format!("{v:?}")]).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn level_for_vertices(n: usize) -> Option<u32> {
    (0..=12).find(|&m| 4 * 5usize.pow(m) + 1 == n)
}

pub fn read_function<R: Read>(input: R) -> Result<LoadedFunction> {
    let mut r = csv::Reader::from_reader(input);
    let headers = r.headers().map_err(csv_err)?.clone();
    let key = headers.get(0).unwrap_or_default().trim().to_string();
    let mut rows: Vec<(String, f64)> = Vec::new();
    for rec in r.records() {
        let rec = rec.map_err(csv_err)?;
        let (k, v) = match (rec.get(0), rec.get(1)) {
            (Some(k), Some(v)) => (k.trim().to_string(), v.trim()),
            _ => return Err(Error::Format("expected two columns".into())),
        };
        let v: f64 = v.parse().map_err(|_| Error::Format(format!("bad value {v:?}")))?;
        if !v.is_finite() {
            return Err(Error::Format("non-finite value".into()));
        }
        rows.push((k, v));
    }
    match key.as_str() {
        "vertex" => {
            let level = level_for_vertices(rows.len())
                .ok_or_else(|| Error::Format(format!("{} rows is not a vertex count 4·5^n + 1", rows.len())))?;
            let mut values = vec![None; rows.len()];
            for (k, v) in rows {
                let i: usize = k.parse().map_err(|_| Error::Format(format!("bad vertex index {k:?}")))?;
                match values.get_mut(i) {
                    Some(slot @ None) => *slot = Some(v),
                    _ => return Err(Error::Format(format!("vertex index {i} repeated or out of range"))),
                }
            }
            let values = values.into_iter().map(|v| v.expect("all indices seen")).collect();
            Ok(LoadedFunction::Pa(PaFunction::interpolate(values, level)?))
        }
        "cell" => {
            let level = rows.first().map(|(k, _)| k.len() as u32).unwrap_or(0);
            let mut values = vec![None; 5usize.pow(level)];
            for (k, v) in rows {
                let a: Address = k.parse()?;
                if a.level() != level {
                    return Err(Error::Format("cell addresses of mixed length".into()));
                }
                match values.get_mut(a.index() as usize) {
                    Some(slot @ None) => *slot = Some(v),
                    _ => return Err(Error::Format(format!("cell {a} repeated"))),
                }
            }
            let values = values
                .into_iter()
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| Error::Format("missing cells".into()))?;
            Ok(LoadedFunction::Cell(CellFunction::new(level, values)?))
        }
        other => Err(Error::Format(format!("unknown key column {other:?}; expected vertex or cell"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::sampler::DistanceToCenter;

    #[test]
    fn pa_round_trip() {
        let f = PaFunction::<f64>::cross().refine(1).unwrap();
        let mut buf = Vec::new();
        write_pa(&f, &mut buf).unwrap();
        match read_function(&buf[..]).unwrap() {
            LoadedFunction::Pa(g) => assert_eq!(g.values(), f.values()),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn cell_round_trip() {
        let f = CellFunction::<f64>::from_sampler(&DistanceToCenter, 2);
        let mut buf = Vec::new();
        write_cells(&f, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("cell,value\n11,"));
        match read_function(&buf[..]).unwrap() {
            LoadedFunction::Cell(g) => assert_eq!(g, f),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_input() {
        assert!(read_function(&b"vertex,value\n0,1\n"[..]).is_err());
        assert!(read_function(&b"foo,value\n0,1\n"[..]).is_err());
        assert!(read_function(&b"cell,value\n1,x\n"[..]).is_err());
    }
}
