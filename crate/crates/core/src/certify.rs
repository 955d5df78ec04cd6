//! Certification of candidate configurations against the algebraic structure
//! of Dziobek configurations.

use serde::{Deserialize, Serialize};

use crate::algebra::{
    complete_diagonal, configuration_matrix, degeneracy_index, dziobek_relation_residual,
    kernel_by_factorization, kernel_by_minors, rank1_fit, shape_from_distances, veronese_residuals,
};
use crate::error::{Error, Result};
use crate::geometry::{affine_dimension, distances_from_shape, realize_from_distances};
use crate::model::{
    CCClass, Certificate, Configuration, DziobekVector, MassVector, PotentialParam, ShapeMatrix,
    Tolerances, Verdict,
};
use crate::solver::{
    cc_residual, cc_residual_lambda_form, dedup_classes, isolation_ratio, multistart_solve,
    CandidateSolution, SolveOptions,
};

/// Bound on `|sum delta_i|` for the unit-normalized kernel vector.
pub const DELTA_SUM_TOL: f64 = 1e-12;
/// Shapes with every `|s_ij|` at or below this are the regular simplex.
pub const TRIVIAL_SHAPE: f64 = 1e-12;

/// Residuals that depend only on `(s, m, delta)`.
#[derive(Debug, Clone, PartialEq)]
struct ShapeChecks {
    delta_sum: f64,
    column_kernel_cosine: f64,
    dziobek_residual: f64,
    kappa: f64,
    kappa_vanishes: bool,
    rank1_residual: f64,
    veronese_residual: f64,
    degeneracy_index: usize,
}

impl ShapeChecks {
    fn run(
        s: &ShapeMatrix,
        m: &MassVector,
        delta: &DziobekVector,
        tols: &Tolerances,
    ) -> Result<Self> {
        let n = s.n();
        if m.len() != n || delta.len() != n {
            return Err(Error::DimensionMismatch(format!(
                "shape of size {n} with {} masses and {} kernel entries",
                m.len(),
                delta.len()
            )));
        }
        let fit = rank1_fit(s, m, delta)?;
        let smax = s.matrix().iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        Ok(Self {
            delta_sum: delta.sum(),
            column_kernel_cosine: column_kernel_cosine(s, m, delta),
            dziobek_residual: dziobek_relation_residual(s, m, delta),
            kappa: fit.kappa,
            kappa_vanishes: smax <= TRIVIAL_SHAPE || fit.kappa == 0.0,
            rank1_residual: fit.residual,
            veronese_residual: veronese_residuals(s),
            degeneracy_index: degeneracy_index(s, tols.degeneracy),
        })
    }

    fn failures(&self, n: usize, tols: &Tolerances, out: &mut Vec<String>) {
        let mut fail = |ok: bool, name: &str| {
            if !ok {
                out.push(name.to_string());
            }
        };
        fail(self.delta_sum.abs() <= DELTA_SUM_TOL, "delta_sum");
        fail(self.dziobek_residual <= tols.dziobek, "dziobek_residual");
        fail(self.rank1_residual <= tols.rank1, "rank1_residual");
        fail(!self.kappa_vanishes, "kappa");
        fail(self.veronese_residual <= tols.veronese, "veronese_residual");
        fail(self.degeneracy_index + 3 <= n, "degeneracy_index");
        fail(
            self.column_kernel_cosine > 1.0 - tols.kernel,
            "column_kernel_cosine",
        );
    }
}

/// Smallest `|cos|` between `delta` and a nonzero column `(m_i s_ij)_i`.
/// Zero when every column vanishes.
fn column_kernel_cosine(s: &ShapeMatrix, m: &MassVector, delta: &DziobekVector) -> f64 {
    let n = s.n();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| m[i] * s.get(i, j)).collect())
        .collect();
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let scale = cols.iter().map(|c| norm(c)).fold(0.0_f64, f64::max);
    if scale <= TRIVIAL_SHAPE {
        return 0.0;
    }
    cols.iter()
        .filter(|c| norm(c) > 1e-8 * scale)
        .map(|c| delta.abs_cosine(c))
        .fold(1.0_f64, f64::min)
}

/// Full pipeline: residuals, dimension, kernel cross-check, shape
/// structure and isolation. Positions are read in `r0 = 1` units. Isolation
/// is reported and warned about but does not reject.
pub fn certify(
    x: &Configuration,
    m: &MassVector,
    a: PotentialParam,
    tols: &Tolerances,
) -> Result<Certificate> {
    let n = m.len();
    if x.n() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} masses for {} bodies",
            n,
            x.n()
        )));
    }
    if n < 3 {
        return Err(Error::TooFewBodies { min: 3, got: n });
    }
    let measured = affine_dimension(x, tols.affine);
    if measured != n - 2 {
        return Err(Error::WrongDimension {
            measured,
            expected: n - 2,
        });
    }
    let x = x.gauged().truncated(n - 2)?;

    let cc = cc_residual(&x, m, a)?.amax();
    let cc_lambda = cc_residual_lambda_form(&x, m, a)?.amax();

    let xm = configuration_matrix(&x);
    let delta = kernel_by_minors(&xm)?;
    let kernel_cosine = delta.abs_cosine(kernel_by_factorization(&xm)?.as_slice());

    let s = complete_diagonal(&shape_from_distances(&x.distance_matrix(), a), m)?;
    let checks = ShapeChecks::run(&s, m, &delta, tols)?;
    let iso = isolation_ratio(&x, m, a)?;

    let mut failures = Vec::new();
    if !(cc <= tols.cc) {
        failures.push("cc_residual".to_string());
    }
    if !(cc_lambda <= tols.cc) {
        failures.push("cc_residual_lambda_form".to_string());
    }
    if !(kernel_cosine > 1.0 - tols.kernel) {
        failures.push("kernel_cosine".to_string());
    }
    checks.failures(n, tols, &mut failures);
    let isolated = iso > tols.isolation;
    let warnings = if isolated {
        Vec::new()
    } else {
        vec!["isolation".to_string()]
    };

    Ok(Certificate {
        verdict: if failures.is_empty() {
            Verdict::Accepted
        } else {
            Verdict::Rejected
        },
        cc_residual: cc,
        cc_residual_lambda_form: cc_lambda,
        affine_dim: measured,
        delta,
        delta_sum: checks.delta_sum,
        kernel_cosine,
        column_kernel_cosine: checks.column_kernel_cosine,
        dziobek_residual: checks.dziobek_residual,
        kappa: checks.kappa,
        rank1_residual: checks.rank1_residual,
        veronese_residual: checks.veronese_residual,
        degeneracy_index: checks.degeneracy_index,
        isolation_ratio: iso,
        isolated,
        failures,
        warnings,
        tolerances_used: *tols,
    })
}

/// Algebra-only certificate for externally supplied shape data, plus a
/// realizability check of the off-diagonal distances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeCertificate {
    pub verdict: Verdict,
    pub delta_sum: f64,
    pub column_kernel_cosine: f64,
    pub dziobek_residual: f64,
    pub kappa: f64,
    pub rank1_residual: f64,
    pub veronese_residual: f64,
    pub degeneracy_index: usize,
    /// Distances embed in dimension `n - 2`.
    pub realizable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realization_error: Option<String>,
    /// `|cos|` between the realized configuration's kernel vector and `delta`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub realized_kernel_cosine: Option<f64>,
    pub failures: Vec<String>,
}

impl ShapeCertificate {
    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accepted
    }
}

/// Certifies `(s, m, delta)`. Errors with `NonPositiveShape` when some
/// `1 + s_ij <= 0`, since no distances correspond to it. The embedding
/// test allows a relative spectral tail up to `tols.rank1`, the same noise
/// level accepted for the rank-one identity.
pub fn certify_shape(
    s: &ShapeMatrix,
    m: &MassVector,
    delta: &DziobekVector,
    a: PotentialParam,
    tols: &Tolerances,
) -> Result<ShapeCertificate> {
    let n = s.n();
    let checks = ShapeChecks::run(s, m, delta, tols)?;
    let mut failures = Vec::new();
    checks.failures(n, tols, &mut failures);

    let d = distances_from_shape(&s.off_diagonal(), a)?;
    let (realizable, realization_error, realized_kernel_cosine) =
        match realize_from_distances(&d, n.saturating_sub(2).max(1), tols.rank1) {
            Ok(r) => {
                let cos = kernel_by_factorization(&configuration_matrix(&r.configuration))
                    .map(|k| delta.abs_cosine(k.as_slice()))
                    .unwrap_or(0.0);
                (true, None, Some(cos))
            }
            Err(e) => (false, Some(e.to_string()), None),
        };
    if !realizable {
        failures.push("realizable".to_string());
    }
    if let Some(cos) = realized_kernel_cosine {
        if !(cos > 1.0 - tols.kernel) {
            failures.push("realized_kernel_cosine".to_string());
        }
    }
    Ok(ShapeCertificate {
        verdict: if failures.is_empty() {
            Verdict::Accepted
        } else {
            Verdict::Rejected
        },
        delta_sum: checks.delta_sum,
        column_kernel_cosine: checks.column_kernel_cosine,
        dziobek_residual: checks.dziobek_residual,
        kappa: checks.kappa,
        rank1_residual: checks.rank1_residual,
        veronese_residual: checks.veronese_residual,
        degeneracy_index: checks.degeneracy_index,
        realizable,
        realization_error,
        realized_kernel_cosine,
        failures,
    })
}

/// Deduplicates candidates and certifies each class representative.
pub fn classify(
    candidates: &[CandidateSolution],
    m: &MassVector,
    a: PotentialParam,
    dedup_tol: f64,
    tols: &Tolerances,
) -> Result<Vec<CCClass>> {
    dedup_classes(candidates, m, dedup_tol)
        .into_iter()
        .map(|c| {
            let certificate = certify(&c.representative.configuration, m, a, tols)?;
            Ok(CCClass {
                canonical_key: c.canonical_key,
                representative: c.representative.configuration,
                certificate,
                multiplicity_found: c.multiplicity,
            })
        })
        .collect()
}

/// Multistart, dedup and certification in one call.
pub fn enumerate_classes(
    m: &MassVector,
    a: PotentialParam,
    opts: &SolveOptions,
    tols: &Tolerances,
) -> Result<Vec<CCClass>> {
    if m.len() < 3 {
        return Err(Error::TooFewBodies {
            min: 3,
            got: m.len(),
        });
    }
    let candidates = multistart_solve(m, a, opts)?;
    classify(&candidates, m, a, opts.dedup_tol, tols)
}
