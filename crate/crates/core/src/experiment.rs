//! Seeded sweeps over random mass vectors and regression fixtures.

use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::bound;
use crate::certify::enumerate_classes;
use crate::error::{Error, Result};
use crate::geometry::weighted_centroid;
use crate::model::{CCClass, Configuration, MassVector, PotentialParam, Tolerances};
use crate::solver::{euler_collinear_oracle, residual_matrix, SolveOptions};

/// Distance of sampled masses from the boundary of the simplex.
pub const MASS_MARGIN: f64 = 1e-3;

/// Worst values over the classes of one trial.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ResidualSummary {
    pub cc: f64,
    pub dziobek: f64,
    pub rank1: f64,
    pub veronese: f64,
    pub delta_sum: f64,
    /// `1 - |cos|` between the two kernel routes.
    pub kernel_defect: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_abs_kappa: Option<f64>,
}

impl ResidualSummary {
    fn of(classes: &[CCClass]) -> Self {
        let mut s = Self::default();
        for c in classes {
            let k = &c.certificate;
            s.cc = s.cc.max(k.cc_residual);
            s.dziobek = s.dziobek.max(k.dziobek_residual);
            s.rank1 = s.rank1.max(k.rank1_residual);
            s.veronese = s.veronese.max(k.veronese_residual);
            s.delta_sum = s.delta_sum.max(k.delta_sum.abs());
            s.kernel_defect = s.kernel_defect.max(1.0 - k.kernel_cosine);
            s.min_abs_kappa = Some(
                s.min_abs_kappa
                    .map_or(k.kappa.abs(), |v| v.min(k.kappa.abs())),
            );
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub index: usize,
    pub masses: Vec<f64>,
    /// Seed handed to the multistart solver.
    pub solver_seed: u64,
    pub class_count: usize,
    pub accepted_count: usize,
    pub all_isolated: bool,
    /// Non-isolated or rejected classes, or a failed trial. Excluded from
    /// aggregate claims.
    pub flagged: bool,
    pub max_residuals: ResidualSummary,
    /// Entry `k` counts classes with degeneracy index `k`.
    pub degeneracy_histogram: Vec<usize>,
    pub classes: Vec<CCClass>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub n: usize,
    pub a: PotentialParam,
    pub seed: u64,
    pub starts: usize,
    pub bound_exponent: u64,
    /// Decimal rendering of the class-count bound.
    pub bound_value: String,
    pub max_class_count: usize,
    pub flagged_trials: Vec<usize>,
    pub trials: Vec<TrialRecord>,
    /// Not serialized, so reports stay byte-identical across runs.
    #[serde(skip)]
    pub wall_time: Duration,
}

/// Uniform on the simplex shrunk by [`MASS_MARGIN`]; masses sum to 1.
pub fn sample_masses<R: Rng>(n: usize, rng: &mut R) -> Vec<f64> {
    let e: Vec<f64> = (0..n).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = e.iter().sum();
    let free = 1.0 - n as f64 * MASS_MARGIN;
    e.iter().map(|v| MASS_MARGIN + free * v / total).collect()
}

fn trial_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn run_trial(
    n: usize,
    a: PotentialParam,
    index: usize,
    seed: u64,
    opts: &SolveOptions,
    tols: &Tolerances,
) -> TrialRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, index));
    let masses = sample_masses(n, &mut rng);
    let solver_seed = rng.random::<u64>();
    let opts = SolveOptions {
        seed: solver_seed,
        ..*opts
    };
    let result = MassVector::with_mode(&masses, crate::model::MassMode::Physical)
        .and_then(|m| enumerate_classes(&m, a, &opts, tols));
    let (classes, error) = match result {
        Ok(c) => (c, None),
        Err(e) => (Vec::new(), Some(e.to_string())),
    };
    let mut histogram = vec![0usize; n + 1];
    for c in &classes {
        histogram[c.certificate.degeneracy_index.min(n)] += 1;
    }
    while histogram.len() > 1 && histogram.last() == Some(&0) {
        histogram.pop();
    }
    let accepted_count = classes.iter().filter(|c| c.certificate.accepted()).count();
    let all_isolated = classes.iter().all(|c| c.certificate.isolated);
    TrialRecord {
        index,
        masses,
        solver_seed,
        class_count: classes.len(),
        accepted_count,
        all_isolated,
        flagged: error.is_some() || !all_isolated || accepted_count != classes.len(),
        max_residuals: ResidualSummary::of(&classes),
        degeneracy_histogram: histogram,
        classes,
        error,
    }
}

/// Runs `trials` independent trials with masses drawn from the simplex.
/// Per-trial solver failures are recorded in the trial, not returned.
///
/// # Panics
///
/// If a trial reports more classes than the bound allows.
pub fn generic_sweep(
    n: usize,
    a: PotentialParam,
    trials: usize,
    seed: u64,
    opts: &SolveOptions,
    tols: &Tolerances,
) -> Result<SweepReport> {
    if !(3..=6).contains(&n) {
        return Err(Error::InvalidOptions(format!(
            "sweep supports 3 <= n <= 6, got {n}"
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidOptions("trials must be >= 1".into()));
    }
    opts.validate()?;
    let b = bound(n)?;
    let started = Instant::now();
    let records: Vec<TrialRecord> = (0..trials)
        .map(|k| run_trial(n, a, k, seed, opts, tols))
        .collect();
    for r in &records {
        assert!(
            b.admits(r.class_count),
            "trial {} found {} classes, above the bound {}",
            r.index,
            r.class_count,
            b
        );
    }
    Ok(SweepReport {
        n,
        a,
        seed,
        starts: opts.starts,
        bound_exponent: b.exponent,
        bound_value: b.value.to_string(),
        max_class_count: records.iter().map(|r| r.class_count).max().unwrap_or(0),
        flagged_trials: records
            .iter()
            .filter(|r| r.flagged)
            .map(|r| r.index)
            .collect(),
        trials: records,
        wall_time: started.elapsed(),
    })
}

/// `sum_j <F_j(l x), x_j - c>` for equal masses.
fn radial_residual(points: &DMatrix<f64>, masses: &[f64], a: f64, scale: f64) -> f64 {
    let scaled = points * scale;
    let c = weighted_centroid(points, masses);
    let f = residual_matrix(&scaled, masses, a).expect("fixture points are distinct");
    (0..points.ncols())
        .map(|j| f.column(j).dot(&(points.column(j) - &c)))
        .sum()
}

/// Scales a central configuration shape so that `lambda = M`, by geometric
/// bisection on the scale factor over `[1e-3, 1e3]`.
fn scale_to_gauge(
    points: DMatrix<f64>,
    m: &MassVector,
    a: PotentialParam,
) -> Result<Configuration> {
    let h = |l: f64| radial_residual(&points, m.as_slice(), a.value(), l);
    let (mut lo, mut hi) = (1e-3_f64, 1e3_f64);
    let (hlo, hhi) = (h(lo), h(hi));
    if hlo.signum() == hhi.signum() {
        return Err(Error::UnsupportedCase(format!(
            "no gauge scale for a = {}",
            a.value()
        )));
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid).signum() == hlo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Configuration::new(points * (lo * hi).sqrt())?.gauged())
}

/// Labeled regression fixtures in the `r0 = 1` gauge, equal masses.
/// `n = 3`: the three collinear solutions. `n = 4`: the square and the
/// equilateral triangle with a central body.
pub fn known_solutions(n: usize, a: PotentialParam) -> Result<Vec<(Configuration, String)>> {
    let m = MassVector::equal(n)?;
    match n {
        3 => Ok(euler_collinear_oracle(&m, a)?
            .into_iter()
            .map(|s| {
                (
                    s.configuration,
                    format!("collinear-middle-{}", s.middle + 1),
                )
            })
            .collect()),
        4 => {
            let square = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, -1.0, 0.0, 0.0, 1.0, 0.0, -1.0]);
            let h = 3f64.sqrt() / 2.0;
            let centred = DMatrix::from_row_slice(2, 4, &[0.0, 1.0, -0.5, -0.5, 0.0, 0.0, h, -h]);
            Ok(vec![
                (scale_to_gauge(square, &m, a)?, "square".to_string()),
                (
                    scale_to_gauge(centred, &m, a)?,
                    "triangle-center".to_string(),
                ),
            ])
        }
        _ => Err(Error::UnsupportedCase(format!("no fixtures for n = {n}"))),
    }
}
