//! Text checkpoints of one time level.
//!
//! A header line `checkpoint step <n> time <t> velocity <dim> pressure <dim>`
//! is followed by the velocity coefficients and then the pressure values,
//! one per line. Values are written in shortest round-trip form, so reading
//! a checkpoint back reproduces the vectors bit for bit.

use std::fs;
use std::io::Write;
use std::path::Path;

use hdivflow_core::{PressureField, VelocityField};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub step: usize,
    pub time: f64,
    pub velocity: VelocityField,
    pub pressure: PressureField,
}

impl Checkpoint {
    pub fn write(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(
            out,
            "checkpoint step {} time {:e} velocity {} pressure {}",
            self.step,
            self.time,
            self.velocity.0.len(),
            self.pressure.0.len()
        )?;
        for v in self.velocity.0.iter().chain(&self.pressure.0) {
            writeln!(out, "{v:e}")?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, head) = lines.next().ok_or_else(|| Error::parse(1, "empty checkpoint"))?;
        let tok: Vec<&str> = head.split_whitespace().collect();
        let ["checkpoint", "step", step, "time", time, "velocity", nv, "pressure", np] = tok.as_slice() else {
            return Err(Error::parse(
                1,
                "expected 'checkpoint step <n> time <t> velocity <dim> pressure <dim>'",
            ));
        };
        let bad = |what: &str, v: &str| Error::parse(1, format!("invalid {what} '{v}'"));
        let step = step.parse().map_err(|_| bad("step", step))?;
        let time = time.parse().map_err(|_| bad("time", time))?;
        let nv: usize = nv.parse().map_err(|_| bad("velocity dimension", nv))?;
        let np: usize = np.parse().map_err(|_| bad("pressure dimension", np))?;
        let mut values = Vec::with_capacity(nv + np);
        for (i, line) in lines {
            let v = line
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::parse(i + 1, format!("invalid value '{}'", line.trim())))?;
            values.push(v);
        }
        if values.len() != nv + np {
            return Err(Error::parse(
                1,
                format!("header announces {} values but {} were found", nv + np, values.len()),
            ));
        }
        let pressure = values.split_off(nv);
        Ok(Self {
            step,
            time,
            velocity: VelocityField(values),
            pressure: PressureField(pressure),
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut buf = Vec::new();
        self.write(&mut buf).map_err(|e| Error::io(path, e))?;
        fs::write(path, buf).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| e.in_file(path))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Checkpoint {
        Checkpoint {
            step: 7,
            time: 0.7000000000000001,
            velocity: VelocityField(vec![1.0 / 3.0, -2.5e-300, 0.0, f64::MIN_POSITIVE, 1e17]),
            pressure: PressureField(vec![-0.1, std::f64::consts::PI]),
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let c = sample();
        let mut buf = Vec::new();
        c.write(&mut buf).unwrap();
        assert_eq!(Checkpoint::parse(std::str::from_utf8(&buf).unwrap()).unwrap(), c);
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        sample().save(&path).unwrap();
        assert_eq!(Checkpoint::load(&path).unwrap(), sample());
    }

    #[test]
    fn truncated_file_is_rejected() {
        let mut buf = Vec::new();
        sample().write(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let cut: String = text.lines().take(4).map(|l| format!("{l}\n")).collect();
        let err = Checkpoint::parse(&cut).unwrap_err().to_string();
        assert!(err.contains("7 values but 3"), "{err}");
        assert!(Checkpoint::parse("state 1\n").is_err());
    }
}
