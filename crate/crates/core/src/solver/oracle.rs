//! Independent 1-D solver for collinear three-body configurations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Configuration, DistanceMatrix, MassVector, PotentialParam};

const GRID: usize = 2000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EulerSolution {
    /// Body in the middle.
    pub middle: usize,
    /// Bodies left to right, up to reflection.
    pub order: [usize; 3],
    /// Position of the middle body on the unit segment.
    pub ratio: f64,
    pub distances: DistanceMatrix,
    pub configuration: Configuration,
}

struct Line {
    m: [f64; 3],
    a: f64,
}

impl Line {
    fn terms(&self, t: f64) -> ([f64; 3], [f64; 3]) {
        let x = [0.0, t, 1.0];
        let total: f64 = self.m.iter().sum();
        let c = (self.m[1] * t + self.m[2]) / total;
        let mut big_a = [0.0; 3];
        for j in 0..3 {
            for i in (0..3).filter(|&i| i != j) {
                let diff = x[i] - x[j];
                big_a[j] += self.m[i] * diff * diff.abs().powf(2.0 * self.a);
            }
        }
        (big_a, x.map(|v| v - c))
    }

    /// Vanishes iff the outer bodies share one multiplier.
    fn f(&self, t: f64) -> f64 {
        let (a, b) = self.terms(t);
        a[0] * b[2] - a[2] * b[0]
    }

    fn root(&self) -> Option<f64> {
        let step = 1.0 / GRID as f64;
        let mut lo = step;
        let mut flo = self.f(lo);
        for k in 2..GRID {
            let hi = k as f64 * step;
            let fhi = self.f(hi);
            if flo == 0.0 {
                return Some(lo);
            }
            if flo.signum() != fhi.signum() {
                return Some(self.bisect(lo, hi, flo));
            }
            lo = hi;
            flo = fhi;
        }
        None
    }

    fn bisect(&self, mut lo: f64, mut hi: f64, flo: f64) -> f64 {
        let s = flo.signum();
        loop {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return mid;
            }
            let fm = self.f(mid);
            if fm == 0.0 {
                return mid;
            }
            if fm.signum() == s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
}

/// Collinear configurations of three bodies, one per choice of middle body,
/// scaled so the multiplier equals the total mass. Each is found by a
/// sign-change scan and bisection on the position of the middle body.
pub fn euler_collinear_oracle(m: &MassVector, a: PotentialParam) -> Result<Vec<EulerSolution>> {
    if m.len() != 3 {
        return Err(Error::UnsupportedCase(format!(
            "collinear oracle needs 3 bodies, got {}",
            m.len()
        )));
    }
    let av = a.value();
    let mut out = Vec::with_capacity(3);
    for middle in 0..3 {
        let outer: Vec<usize> = (0..3).filter(|&i| i != middle).collect();
        let order = [outer[0], middle, outer[1]];
        let line = Line {
            m: order.map(|b| m[b]),
            a: av,
        };
        let t = line.root().ok_or(Error::OracleRootNotFound { middle })?;
        let (big_a, b) = line.terms(t);
        let lambda1 = -big_a[0] / b[0];
        if !(lambda1 > 0.0) {
            return Err(Error::OracleRootNotFound { middle });
        }
        let scale = (m.total() / lambda1).powf(1.0 / (2.0 * av));
        let x = [0.0, t * scale, scale];
        let mut pos = [0.0; 3];
        for (slot, &body) in order.iter().enumerate() {
            pos[body] = x[slot];
        }
        let configuration = Configuration::from_points(&pos.map(|p| vec![p]))?.gauged();
        let distances = configuration.distance_matrix();
        out.push(EulerSolution {
            middle,
            order,
            ratio: t,
            distances,
            configuration,
        });
    }
    Ok(out)
}
