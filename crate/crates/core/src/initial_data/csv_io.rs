//! Sampled initial data from CSV with columns `s,c1,c2,v1,v2`.

use std::io::Read;
use std::path::Path;

use serde::Deserialize;

use super::providers::{SampledCurve, SampledVelocity};
use crate::error::{Result, SheetError};
use crate::geometry::Vec2;

#[derive(Debug, Deserialize)]
struct Row {
    s: f64,
    c1: f64,
    c2: f64,
    v1: f64,
    v2: f64,
}

/// Raw samples of a curve and its velocity.
#[derive(Clone, Debug, PartialEq)]
pub struct CurveSamples {
    pub s: Vec<f64>,
    pub c: Vec<Vec2>,
    pub v: Vec<Vec2>,
}

impl CurveSamples {
    /// Interpolating providers for these samples.
    pub fn providers(&self) -> Result<(SampledCurve, SampledVelocity)> {
        Ok((
            SampledCurve::new(self.s.clone(), self.c.clone())?,
            SampledVelocity::new(self.s.clone(), self.v.clone())?,
        ))
    }
}

const HEADER: [&str; 5] = ["s", "c1", "c2", "v1", "v2"];

/// Parses CSV text. The header is mandatory and must name exactly the five
/// columns; `s` must be strictly increasing.
pub fn read_samples(reader: impl Read) -> Result<CurveSamples> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers()?.clone();
    let names: Vec<&str> = header.iter().collect();
    if names != HEADER {
        return Err(SheetError::InvalidInput(format!(
            "expected header s,c1,c2,v1,v2, found {}",
            names.join(",")
        )));
    }
    let mut out = CurveSamples {
        s: Vec::new(),
        c: Vec::new(),
        v: Vec::new(),
    };
    for row in rdr.deserialize() {
        let r: Row = row?;
        if let Some(prev) = out.s.last() {
            if !(r.s > *prev) {
                return Err(SheetError::InvalidInput(format!(
                    "s must be strictly increasing (row with s = {} follows s = {})",
                    r.s, prev
                )));
            }
        }
        out.s.push(r.s);
        out.c.push(Vec2::new(r.c1, r.c2));
        out.v.push(Vec2::new(r.v1, r.v2));
    }
    if out.s.len() < 4 {
        return Err(SheetError::InvalidInput(
            "at least four samples are required".into(),
        ));
    }
    Ok(out)
}

pub fn read_samples_file(path: impl AsRef<Path>) -> Result<CurveSamples> {
    read_samples(std::fs::File::open(path)?)
}

/// Writes samples back out in the same format.
pub fn write_samples(samples: &CurveSamples, out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(HEADER)?;
    for i in 0..samples.s.len() {
        let (c, v) = (samples.c[i], samples.v[i]);
        w.write_record(
            [samples.s[i], c.x, c.y, v.x, v.y]
                .iter()
                .map(|x| x.to_string()),
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_round_trips() {
        let text = "s,c1,c2,v1,v2\n0,0,0,0,0.1\n0.5,0.5,0,0,0.1\n1,1,0,0,0.1\n1.5,1.5,0,0,0.1\n";
        let s = read_samples(text.as_bytes()).unwrap();
        assert_eq!(s.s, vec![0.0, 0.5, 1.0, 1.5]);
        assert_eq!(s.v[2], Vec2::new(0.0, 0.1));
        let mut buf = Vec::new();
        write_samples(&s, &mut buf).unwrap();
        assert_eq!(read_samples(buf.as_slice()).unwrap(), s);
    }

    #[test]
    fn rejects_bad_header_and_order() {
        assert!(read_samples("x,c1,c2,v1,v2\n0,0,0,0,0\n".as_bytes()).is_err());
        let text = "s,c1,c2,v1,v2\n0,0,0,0,0\n1,0,0,0,0\n0.5,0,0,0,0\n2,0,0,0,0\n";
        assert!(matches!(
            read_samples(text.as_bytes()),
            Err(SheetError::InvalidInput(_))
        ));
    }
}
