use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{violation, FamilyParams};
use crate::error::{Error, Result};

/// `steps` evenly spaced points from `start` to `stop`, both included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, steps: usize) -> Result<Self> {
        if !start.is_finite() || !stop.is_finite() {
            return Err(Error::Domain("grid endpoints must be finite".into()));
        }
        if steps == 0 || (steps == 1 && start != stop) {
            return Err(Error::Domain(format!(
                "grid {start}:{stop}:{steps} needs at least two steps, or one step with start = stop"
            )));
        }
        Ok(Self { start, stop, steps })
    }

    pub fn single(value: f64) -> Self {
        Self {
            start: value,
            stop: value,
            steps: 1,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.stop
                } else {
                    self.start + h * i as f64
                }
            })
            .collect()
    }
}

impl std::str::FromStr for Grid {
    type Err = Error;

    /// Parses `start:stop:steps` or a single number.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Domain(format!("'{t}' is not a number in grid '{s}'")))
        };
        match parts.as_slice() {
            [v] => Ok(Self::single(num(v)?)),
            [a, b, n] => {
                let steps = n.trim().parse::<usize>().map_err(|_| {
                    Error::Domain(format!("'{n}' is not a step count in grid '{s}'"))
                })?;
                Self::new(num(a)?, num(b)?, steps)
            }
            _ => Err(Error::Domain(format!(
                "grid '{s}' is not of the form start:stop:steps"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub x: f64,
    pub m1: f64,
    pub m2: f64,
    /// None where the parameters leave the domain.
    #[serde(rename = "C")]
    pub c: Option<f64>,
}

impl ScanRow {
    pub fn valid(&self) -> bool {
        self.c.is_some()
    }
}

/// Rows in x-major, then m1, then m2 order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanTable {
    pub xs: Vec<f64>,
    pub m1s: Vec<f64>,
    pub m2s: Vec<f64>,
    pub rows: Vec<ScanRow>,
}

impl ScanTable {
    pub fn row(&self, ix: usize, i1: usize, i2: usize) -> &ScanRow {
        &self.rows[(ix * self.m1s.len() + i1) * self.m2s.len() + i2]
    }

    /// Valid row with the smallest C.
    pub fn minimum(&self) -> Option<&ScanRow> {
        self.rows
            .iter()
            .filter(|r| r.valid())
            .min_by(|a, b| a.c.unwrap().total_cmp(&b.c.unwrap()))
    }

    /// Connected components (4-neighbourhood) of the C < 0 cells of the (m1, m2) slice at
    /// x index `ix`, as lists of (m1 index, m2 index).
    pub fn negative_components(&self, ix: usize) -> Vec<Vec<(usize, usize)>> {
        let (n1, n2) = (self.m1s.len(), self.m2s.len());
        let negative = |i: usize, j: usize| self.row(ix, i, j).c.is_some_and(|c| c < 0.0);
        let mut seen = vec![false; n1 * n2];
        let mut out = Vec::new();
        for i in 0..n1 {
            for j in 0..n2 {
                if seen[i * n2 + j] || !negative(i, j) {
                    continue;
                }
                let mut comp = Vec::new();
                let mut queue = VecDeque::from([(i, j)]);
                seen[i * n2 + j] = true;
                while let Some((a, b)) = queue.pop_front() {
                    comp.push((a, b));
                    let neighbours = [
                        (a.wrapping_sub(1), b),
                        (a + 1, b),
                        (a, b.wrapping_sub(1)),
                        (a, b + 1),
                    ];
                    for (u, v) in neighbours {
                        if u < n1 && v < n2 && !seen[u * n2 + v] && negative(u, v) {
                            seen[u * n2 + v] = true;
                            queue.push_back((u, v));
                        }
                    }
                }
                out.push(comp);
            }
        }
        out
    }
}

/// Evaluates the violation at every grid point, in parallel; invalid points are marked,
/// not reported as errors.
pub fn scan(xs: &Grid, m1s: &Grid, m2s: &Grid) -> ScanTable {
    let (xv, m1v, m2v) = (xs.values(), m1s.values(), m2s.values());
    let mut points = Vec::with_capacity(xv.len() * m1v.len() * m2v.len());
    for &x in &xv {
        for &m1 in &m1v {
            for &m2 in &m2v {
                points.push((x, m1, m2));
            }
        }
    }
    let rows = points
        .par_iter()
        .map(|&(x, m1, m2)| ScanRow {
            x,
            m1,
            m2,
            c: FamilyParams::new(x, m1, m2)
                .and_then(|p| violation(&p))
                .ok(),
        })
        .collect();
    ScanTable {
        xs: xv,
        m1s: m1v,
        m2s: m2v,
        rows,
    }
}
