//! Line-oriented dataset files.
//!
//! ```text
//! tp-eqln-dataset 1
//! name phi1
//! gamma_dim 1
//! traj_dim 3
//! samples 200
//! demos 10
//! gamma_domain 0.085 0.4
//! training_domain 0.155 0.33
//! output_bounds -0.9 0.9 -0.9 0.9 -0.1 1.2
//! end_header
//! demo 0 extrapolation
//! gamma 0.085
//! time_range 0 1
//! <t> <ξ_1> ... <ξ_D>      (one line per sample)
//! end_demo
//! ...
//! end
//! ```
//!
//! Numbers are written in shortest round-trip form, so a load restores every
//! value bit for bit.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use ndarray::Array2;

use super::{Demonstration, Split, TaskDataset};
use crate::domain::Interval;
use crate::error::{Error, Result};

pub const DATASET_FORMAT: &str = "tp-eqln-dataset";
pub const DATASET_VERSION: u32 = 1;

fn write_intervals(out: &mut String, key: &str, b: &[Interval]) {
    out.push_str(key);
    for i in b {
        let _ = write!(out, " {} {}", i.lo, i.hi);
    }
    out.push('\n');
}

fn write_values(out: &mut String, key: &str, vals: &[f64]) {
    out.push_str(key);
    for v in vals {
        let _ = write!(out, " {v}");
    }
    out.push('\n');
}

impl TaskDataset {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{DATASET_FORMAT} {DATASET_VERSION}");
        let _ = writeln!(s, "name {}", self.name);
        let _ = writeln!(s, "gamma_dim {}", self.gamma_dim());
        let _ = writeln!(s, "traj_dim {}", self.traj_dim());
        let _ = writeln!(s, "samples {}", self.samples_per_demo());
        let _ = writeln!(s, "demos {}", self.demos.len());
        write_intervals(&mut s, "gamma_domain", &self.gamma_domain);
        write_intervals(&mut s, "training_domain", &self.training_domain);
        write_intervals(&mut s, "output_bounds", &self.output_bounds);
        s.push_str("end_header\n");
        for (i, d) in self.demos.iter().enumerate() {
            let _ = writeln!(s, "demo {i} {}", d.split);
            write_values(&mut s, "gamma", &d.gamma);
            let _ = writeln!(s, "time_range {} {}", d.time_range.lo, d.time_range.hi);
            for (t, row) in d.times.iter().zip(d.trajectory.rows()) {
                let _ = write!(s, "{t}");
                for v in row {
                    let _ = write!(s, " {v}");
                }
                s.push('\n');
            }
            s.push_str("end_demo\n");
        }
        s.push_str("end\n");
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        Reader::new(text).read()
    }
}

struct Reader<'a> {
    lines: std::iter::Enumerate<std::str::Lines<'a>>,
    line_no: usize,
}

impl<'a> Reader<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            lines: text.lines().enumerate(),
            line_no: 0,
        }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse {
            kind: "dataset",
            line: self.line_no,
            msg: msg.into(),
        }
    }

    fn next_line(&mut self) -> Result<&'a str> {
        match self.lines.next() {
            Some((i, l)) => {
                self.line_no = i + 1;
                Ok(l)
            }
            None => {
                self.line_no += 1;
                Err(self.err("unexpected end of file"))
            }
        }
    }

    /// Reads a `key v1 v2 ...` line and returns the values.
    fn keyed(&mut self, key: &str) -> Result<Vec<&'a str>> {
        let line = self.next_line()?;
        let mut parts = line.split_whitespace();
        match parts.next() {
            Some(k) if k == key => Ok(parts.collect()),
            other => Err(self.err(format!("expected {key:?}, found {other:?}"))),
        }
    }

    fn single<T: std::str::FromStr>(&mut self, key: &str) -> Result<T> {
        let vals = self.keyed(key)?;
        match vals.as_slice() {
            [v] => v.parse().map_err(|_| self.err(format!("bad value for {key}"))),
            _ => Err(self.err(format!("{key} takes one value"))),
        }
    }

    fn floats(&self, vals: &[&str]) -> Result<Vec<f64>> {
        vals.iter()
            .map(|v| v.parse::<f64>().map_err(|_| self.err(format!("bad number {v:?}"))))
            .collect()
    }

    fn intervals(&mut self, key: &str, n: usize) -> Result<Vec<Interval>> {
        let vals = self.keyed(key)?;
        let nums = self.floats(&vals)?;
        if nums.len() != 2 * n {
            return Err(self.err(format!("{key} needs {} numbers", 2 * n)));
        }
        Ok(nums.chunks(2).map(|c| Interval::new(c[0], c[1])).collect())
    }

    fn read(mut self) -> Result<TaskDataset> {
        let head = self.next_line()?;
        let mut parts = head.split_whitespace();
        if parts.next() != Some(DATASET_FORMAT) {
            return Err(self.err("missing dataset format tag"));
        }
        let version: u32 = parts
            .next()
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| self.err("missing format version"))?;
        if version != DATASET_VERSION {
            return Err(Error::Version {
                kind: "dataset",
                found: version,
                expected: DATASET_VERSION,
            });
        }
        let name = self.keyed("name")?;
        let name = match name.as_slice() {
            [n] => n.to_string(),
            _ => return Err(self.err("name must be a single token")),
        };
        let n: usize = self.single("gamma_dim")?;
        let d: usize = self.single("traj_dim")?;
        let t: usize = self.single("samples")?;
        let m: usize = self.single("demos")?;
        let gamma_domain = self.intervals("gamma_domain", n)?;
        let training_domain = self.intervals("training_domain", n)?;
        let output_bounds = self.intervals("output_bounds", d)?;
        self.keyed("end_header")?;
        let mut demos = Vec::with_capacity(m);
        for i in 0..m {
            let hdr = self.keyed("demo")?;
            let split: Split = match hdr.as_slice() {
                [idx, split] if idx.parse::<usize>().ok() == Some(i) => {
                    split.parse().map_err(|_| self.err("bad split label"))?
                }
                _ => return Err(self.err(format!("expected header of demo {i}"))),
            };
            let gvals = self.keyed("gamma")?;
            let gamma = self.floats(&gvals)?;
            if gamma.len() != n {
                return Err(self.err("gamma dimension mismatch"));
            }
            let tr = self.intervals("time_range", 1)?[0];
            let mut times = Vec::with_capacity(t);
            let mut flat = Vec::with_capacity(t * d);
            for _ in 0..t {
                let line = self.next_line()?;
                let nums = self.floats(&line.split_whitespace().collect::<Vec<_>>())?;
                if nums.len() != d + 1 {
                    return Err(self.err(format!("sample row needs {} numbers", d + 1)));
                }
                times.push(nums[0]);
                flat.extend_from_slice(&nums[1..]);
            }
            self.keyed("end_demo")?;
            demos.push(Demonstration {
                gamma,
                times,
                trajectory: Array2::from_shape_vec((t, d), flat).expect("row count checked"),
                time_range: tr,
                split,
            });
        }
        self.keyed("end")?;
        let ds = TaskDataset {
            name,
            gamma_domain,
            training_domain,
            output_bounds,
            demos,
        };
        ds.validate()?;
        Ok(ds)
    }
}

pub fn save_dataset(ds: &TaskDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, ds.to_text()).map_err(|e| Error::io(path, e))
}

pub fn load_dataset(path: impl AsRef<Path>) -> Result<TaskDataset> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    TaskDataset::from_text(&text)
}
