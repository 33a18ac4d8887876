use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Bad input detected by the front end itself.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Parsed `min:max:points[:lin|log]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub log: bool,
}

impl Grid {
    pub fn parse(spec: &str) -> Result<Self> {
        let bad = |why: &str| usage(format!("bad grid '{spec}': {why}"));
        let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
        if !(3..=4).contains(&parts.len()) {
            return Err(bad("expected min:max:points[:lin|log]"));
        }
        let min: f64 = parts[0].parse().map_err(|_| bad("min is not a number"))?;
        let max: f64 = parts[1].parse().map_err(|_| bad("max is not a number"))?;
        let points: usize = parts[2].parse().map_err(|_| bad("points is not a count"))?;
        let log = match parts.get(3) {
            None | Some(&"lin") => false,
            Some(&"log") => true,
            Some(_) => return Err(bad("scale must be lin or log")),
        };
        if !(min.is_finite() && max.is_finite() && min < max) {
            return Err(bad("need finite min < max"));
        }
        if points < 2 {
            return Err(bad("need at least 2 points"));
        }
        if log && min <= 0.0 {
            return Err(bad("log scale needs min > 0"));
        }
        Ok(Self {
            min,
            max,
            points,
            log,
        })
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.points - 1) as f64;
        let mut v: Vec<f64> = (0..self.points)
            .map(|i| {
                let t = i as f64 / last;
                if self.log {
                    self.min * (self.max / self.min).powf(t)
                } else {
                    self.min + (self.max - self.min) * t
                }
            })
            .collect();
        v[self.points - 1] = self.max;
        v
    }
}

/// Linear `min:max:points`; a single point needs min = max.
pub fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').map(str::trim).collect();
    if parts.len() == 3 {
        if let (Ok(a), Ok(b), Ok(1)) = (
            parts[0].parse::<f64>(),
            parts[1].parse::<f64>(),
            parts[2].parse::<usize>(),
        ) {
            if a == b && a.is_finite() {
                return Ok(vec![a]);
            }
        }
    }
    if parts.len() != 3 {
        return Err(usage(format!(
            "bad range '{spec}': expected min:max:points"
        )));
    }
    Ok(Grid::parse(spec)?.values())
}

/// Nine significant digits, plain notation between 1e-4 and 1e9.
pub fn fmt9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let r: f64 = format!("{x:.8e}").parse().unwrap_or(x);
    if (1e-4..1e9).contains(&r.abs()) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

pub fn opt9(x: Option<f64>) -> String {
    x.map(fmt9).unwrap_or_default()
}

pub struct Table {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&'static str]) -> Self {
        Self {
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

pub fn manifest_path(out: &Path) -> PathBuf {
    let mut p = out.as_os_str().to_owned();
    p.push(".manifest");
    PathBuf::from(p)
}

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    f.write_all(contents.as_bytes())
        .with_context(|| format!("writing {}", path.display()))
}
