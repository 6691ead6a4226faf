//! Plain-text field snapshots.
//!
//! ```text
//! polar <n_r> <n_theta> <r_inner> <r_outer> <stretching>
//! <r_0>
//! ...
//! <r_{n_r-1}>
//! <value(0,0)> <value(0,1)> ... <value(0,n_theta-1)>
//! ...
//! ```
//!
//! Numbers are written with 17 significant digits, which round-trips `f64`.

use std::io::{BufRead, Write};

use super::grid::GridSpec;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub spec: GridSpec,
    pub radii: Vec<f64>,
    /// Node values, radial-major.
    pub values: Vec<f64>,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_snapshot(out: &mut impl Write, snap: &Snapshot) -> Result<()> {
    let s = &snap.spec;
    if snap.radii.len() != s.n_r || snap.values.len() != s.n_r * s.n_theta {
        return Err(Error::Snapshot("array sizes do not match the grid".into()));
    }
    writeln!(
        out,
        "polar {} {} {} {} {}",
        s.n_r,
        s.n_theta,
        num(s.r_inner),
        num(s.r_outer),
        num(s.stretching)
    )?;
    for r in &snap.radii {
        writeln!(out, "{}", num(*r))?;
    }
    for ring in snap.values.chunks(s.n_theta) {
        let line: Vec<String> = ring.iter().map(|v| num(*v)).collect();
        writeln!(out, "{}", line.join(" "))?;
    }
    Ok(())
}

pub fn read_snapshot(input: impl BufRead) -> Result<Snapshot> {
    let mut lines = input.lines();
    let mut next = |what: &str| -> Result<String> {
        lines
            .next()
            .ok_or_else(|| Error::Snapshot(format!("unexpected end of file reading {what}")))?
            .map_err(Error::from)
    };
    let header = next("header")?;
    let parts: Vec<&str> = header.split_whitespace().collect();
    if parts.len() != 6 || parts[0] != "polar" {
        return Err(Error::Snapshot(format!("bad header `{header}`")));
    }
    let int = |s: &str| s.parse::<usize>().map_err(|e| Error::Snapshot(format!("`{s}`: {e}")));
    let float = |s: &str| s.parse::<f64>().map_err(|e| Error::Snapshot(format!("`{s}`: {e}")));
    let spec = GridSpec {
        n_r: int(parts[1])?,
        n_theta: int(parts[2])?,
        r_inner: float(parts[3])?,
        r_outer: float(parts[4])?,
        stretching: float(parts[5])?,
    };
    let mut radii = Vec::with_capacity(spec.n_r);
    for _ in 0..spec.n_r {
        radii.push(float(next("radius")?.trim())?);
    }
    let mut values = Vec::with_capacity(spec.n_r * spec.n_theta);
    for i in 0..spec.n_r {
        let line = next("values")?;
        let before = values.len();
        for tok in line.split_whitespace() {
            values.push(float(tok)?);
        }
        if values.len() - before != spec.n_theta {
            return Err(Error::Snapshot(format!(
                "ring {i} has {} values",
                values.len() - before
            )));
        }
    }
    Ok(Snapshot { spec, radii, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn snapshots_round_trip_exactly(vals in prop::collection::vec(-1e300f64..1e300, 16 * 8)) {
            let spec = GridSpec::new(64.0, 16, 8);
            let radii: Vec<f64> = (0..16).map(|i| 1.0 + (i as f64).powf(1.37)).collect();
            let snap = Snapshot { spec, radii, values: vals };
            let mut buf = Vec::new();
            write_snapshot(&mut buf, &snap).unwrap();
            let back = read_snapshot(buf.as_slice()).unwrap();
            prop_assert_eq!(back, snap);
        }
    }

    #[test]
    fn truncated_file_is_rejected() {
        let snap = Snapshot {
            spec: GridSpec::new(64.0, 16, 8),
            radii: vec![1.0; 16],
            values: vec![0.5; 128],
        };
        let mut buf = Vec::new();
        write_snapshot(&mut buf, &snap).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut: String = text.lines().take(20).collect::<Vec<_>>().join("\n");
        assert!(read_snapshot(cut.as_bytes()).is_err());
    }
}
