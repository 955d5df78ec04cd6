//! Real Dziobek central configurations by multistart damped Newton.
//!
//! The unknowns are the body coordinates in the echelon gauge with `r0 = 1`:
//! body 1 sits at the origin and body `k+1` lives on the first `k` axes. The
//! equations kept are the matching components of the residual (body `k+1`,
//! axes `< k`). The dropped components are fixed linear combinations of the
//! kept ones (translation and rotation identities), so the square system is
//! equivalent to the full one whenever the first `n-1` bodies span the
//! ambient space.

mod dedup;
mod oracle;

pub use dedup::{
    canonical_key, dedup_classes, labeled_copies, mass_preserving_permutations, ClassCandidate,
};
pub use oracle::{euler_collinear_oracle, EulerSolution};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{affine_dimension, weighted_centroid};
use crate::model::{Configuration, Gauge, MassVector, PotentialParam, Tolerances};

/// Initial points with a closer pair than this are resampled.
pub const START_SEPARATION: f64 = 0.05;
/// Newton aborts when two bodies come closer than this.
pub const COLLAPSE_DISTANCE: f64 = 1e-8;

const DIVERGENCE_LIMIT: f64 = 1e6;
const ARMIJO: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Damping {
    pub shrink: f64,
    pub max_backtracks: usize,
}

impl Default for Damping {
    fn default() -> Self {
        Self {
            shrink: 0.5,
            max_backtracks: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub starts: usize,
    pub max_iters: usize,
    pub newton_tol: f64,
    pub dedup_tol: f64,
    pub seed: u64,
    pub sampling_box: (f64, f64),
    pub damping: Damping,
}

impl SolveOptions {
    /// Default budgets for `n` bodies: `500 n` starts.
    pub fn for_bodies(n: usize) -> Self {
        Self {
            starts: 500 * n,
            max_iters: 80,
            newton_tol: 1e-11,
            dedup_tol: 1e-6,
            seed: 0,
            sampling_box: (-1.5, 1.5),
            damping: Damping::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidOptions(msg.into()));
        if self.starts == 0 {
            return bad("starts must be >= 1");
        }
        if !(self.newton_tol > 0.0) {
            return bad("newton_tol must be > 0");
        }
        if !(self.dedup_tol > self.newton_tol) {
            return bad("dedup_tol must exceed newton_tol");
        }
        let (lo, hi) = self.sampling_box;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return bad("sampling box must be a finite interval lo < hi");
        }
        if !(self.damping.shrink > 0.0 && self.damping.shrink < 1.0) {
            return bad("damping shrink factor must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSolution {
    pub configuration: Configuration,
    pub residual_norm: f64,
    pub iterations: usize,
    pub start_index: usize,
}

/// Which coordinates are free, and which residual components are kept, in
/// the echelon gauge. Both use the same `(body, axis)` index set.
#[derive(Debug, Clone)]
pub struct GaugeLayout {
    n: usize,
    dim: usize,
    slots: Vec<(usize, usize)>,
}

impl GaugeLayout {
    pub fn new(n: usize, dim: usize) -> Self {
        let slots = (1..n)
            .flat_map(|body| (0..body.min(dim)).map(move |axis| (body, axis)))
            .collect();
        Self { n, dim, slots }
    }

    /// Layout of the Dziobek problem, ambient dimension `n - 2`.
    pub fn dziobek(n: usize) -> Self {
        Self::new(n, n - 2)
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn flat(&self, (body, axis): (usize, usize)) -> usize {
        body * self.dim + axis
    }

    pub fn extract(&self, points: &DMatrix<f64>) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.slots.iter().map(|&(b, a)| points[(a, b)]))
    }

    pub fn assemble(&self, vars: &DVector<f64>) -> DMatrix<f64> {
        let mut p = DMatrix::zeros(self.dim, self.n);
        for (v, &(b, a)) in vars.iter().zip(&self.slots) {
            p[(a, b)] = *v;
        }
        p
    }

    pub fn restrict_vector(&self, full: &DVector<f64>) -> DVector<f64> {
        DVector::from_iterator(self.len(), self.slots.iter().map(|&s| full[self.flat(s)]))
    }

    pub fn restrict_matrix(&self, full: &DMatrix<f64>) -> DMatrix<f64> {
        let idx: Vec<usize> = self.slots.iter().map(|&s| self.flat(s)).collect();
        DMatrix::from_fn(idx.len(), idx.len(), |r, c| full[(idx[r], idx[c])])
    }
}

fn check_masses(points: &DMatrix<f64>, m: &MassVector) -> Result<()> {
    if m.len() != points.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{} masses for {} bodies",
            m.len(),
            points.ncols()
        )));
    }
    Ok(())
}

/// Column `j` is `sum_{i != j} m_i (r_ij^(2a) - 1)(x_i - x_j)`.
pub(crate) fn residual_matrix(points: &DMatrix<f64>, m: &[f64], a: f64) -> Result<DMatrix<f64>> {
    let (dim, n) = points.shape();
    let mut f = DMatrix::zeros(dim, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = points.column(i) - points.column(j);
            let r2 = diff.norm_squared();
            if r2 == 0.0 {
                return Err(Error::CoincidentBodies { i, j });
            }
            let phi = (a * r2.ln()).exp_m1();
            f.column_mut(j).axpy(m[i] * phi, &diff, 1.0);
            f.column_mut(i).axpy(-m[j] * phi, &diff, 1.0);
        }
    }
    Ok(f)
}

fn flatten(f: DMatrix<f64>) -> DVector<f64> {
    let len = f.len();
    DVector::from_vec(
        f.reshape_generic(nalgebra::Dyn(len), nalgebra::Const::<1>)
            .data
            .into(),
    )
}

/// Gauge-fixed residual, one `dim`-block per body.
pub fn cc_residual(x: &Configuration, m: &MassVector, a: PotentialParam) -> Result<DVector<f64>> {
    check_masses(x.coords(), m)?;
    Ok(flatten(residual_matrix(
        x.coords(),
        m.as_slice(),
        a.value(),
    )?))
}

/// `sum_{i != j} m_i (x_i - x_j) r_ij^(2a) + lambda (x_j - c)` with `lambda = M`.
pub fn cc_residual_lambda_form(
    x: &Configuration,
    m: &MassVector,
    a: PotentialParam,
) -> Result<DVector<f64>> {
    check_masses(x.coords(), m)?;
    let p = x.coords();
    let (dim, n) = p.shape();
    let c = weighted_centroid(p, m.as_slice());
    let mut f = DMatrix::zeros(dim, n);
    for j in 0..n {
        let mut col = (p.column(j) - &c) * m.total();
        for i in (0..n).filter(|&i| i != j) {
            let diff = p.column(i) - p.column(j);
            let r2 = diff.norm_squared();
            if r2 == 0.0 {
                return Err(Error::CoincidentBodies { i, j });
            }
            col.axpy(m[i] * r2.powf(a.value()), &diff, 1.0);
        }
        f.column_mut(j).copy_from(&col);
    }
    Ok(flatten(f))
}

fn full_jacobian_raw(points: &DMatrix<f64>, m: &[f64], a: f64) -> Result<DMatrix<f64>> {
    let (dim, n) = points.shape();
    let mut jac = DMatrix::zeros(dim * n, dim * n);
    for i in 0..n {
        for j in (i + 1)..n {
            let diff = points.column(i) - points.column(j);
            let r2 = diff.norm_squared();
            if r2 == 0.0 {
                return Err(Error::CoincidentBodies { i, j });
            }
            let phi = (a * r2.ln()).exp_m1();
            let dphi = 2.0 * a * r2.powf(a - 1.0);
            // d/dx_i of the (i, j) term of F_j, before the mass factor.
            let mut block = DMatrix::identity(dim, dim) * phi;
            block.ger(dphi, &diff, &diff, 1.0);
            for (row, col, w) in [(j, i, m[i]), (i, j, m[j])] {
                for p in 0..dim {
                    for q in 0..dim {
                        let v = w * block[(p, q)];
                        jac[(row * dim + p, col * dim + q)] += v;
                        jac[(row * dim + p, row * dim + q)] -= v;
                    }
                }
            }
        }
    }
    Ok(jac)
}

/// Jacobian of [`cc_residual`] with respect to all coordinates (no gauge
/// reduction). Translations and, at solutions, rotations are null directions.
pub fn cc_jacobian_full(
    x: &Configuration,
    m: &MassVector,
    a: PotentialParam,
) -> Result<DMatrix<f64>> {
    check_masses(x.coords(), m)?;
    full_jacobian_raw(x.coords(), m.as_slice(), a.value())
}

/// Jacobian of the kept residual components with respect to the free gauge
/// coordinates. `x` is read as is; its frame is not re-gauged.
pub fn cc_jacobian(x: &Configuration, m: &MassVector, a: PotentialParam) -> Result<DMatrix<f64>> {
    let layout = GaugeLayout::new(x.n(), x.dim());
    Ok(layout.restrict_matrix(&cc_jacobian_full(x, m, a)?))
}

fn max_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

fn closest_pair(points: &DMatrix<f64>) -> (usize, usize, f64) {
    let n = points.ncols();
    let mut best = (0, 1, f64::INFINITY);
    for i in 0..n {
        for j in (i + 1)..n {
            let r = (points.column(i) - points.column(j)).norm();
            if r < best.2 {
                best = (i, j, r);
            }
        }
    }
    best
}

/// Damped Newton on the gauge-reduced square system. Succeeds when the full
/// residual max-norm drops below `opts.newton_tol`.
pub fn newton_solve(
    x0: &Configuration,
    m: &MassVector,
    a: PotentialParam,
    opts: &SolveOptions,
) -> Result<CandidateSolution> {
    let n = m.len();
    if x0.n() != n || x0.dim() + 2 != n {
        return Err(Error::DimensionMismatch(format!(
            "start has {} bodies in dimension {}, expected {n} bodies in dimension {}",
            x0.n(),
            x0.dim(),
            n.saturating_sub(2)
        )));
    }
    let layout = GaugeLayout::dziobek(n);
    let masses = m.as_slice();
    let av = a.value();
    let mut vars = layout.extract(x0.gauged().coords());

    for iter in 0..=opts.max_iters {
        let points = layout.assemble(&vars);
        let full = flatten(residual_matrix(&points, masses, av)?);
        let res = max_abs(&full);
        if res < opts.newton_tol {
            let configuration = Configuration::with_gauge(points, Gauge::ECHELON)?.gauged();
            return Ok(CandidateSolution {
                configuration,
                residual_norm: res,
                iterations: iter,
                start_index: 0,
            });
        }
        if iter == opts.max_iters {
            return Err(Error::NoConvergence {
                iterations: iter,
                residual: res,
            });
        }
        let kept = layout.restrict_vector(&full);
        let jac = layout.restrict_matrix(&full_jacobian_raw(&points, masses, av)?);
        let step = jac.lu().solve(&(-&kept)).ok_or(Error::NoConvergence {
            iterations: iter,
            residual: res,
        })?;
        if step.iter().any(|v| !v.is_finite()) {
            return Err(Error::NoConvergence {
                iterations: iter,
                residual: res,
            });
        }
        let merit = kept.norm();
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.damping.max_backtracks {
            let trial = &vars + &step * alpha;
            let tp = layout.assemble(&trial);
            let (i, j, distance) = closest_pair(&tp);
            if distance < COLLAPSE_DISTANCE {
                return Err(Error::CollapseDetected { i, j, distance });
            }
            let tf = layout.restrict_vector(&flatten(residual_matrix(&tp, masses, av)?));
            if tf.norm() <= (1.0 - ARMIJO * alpha) * merit {
                accepted = Some(trial);
                break;
            }
            alpha *= opts.damping.shrink;
        }
        match accepted {
            Some(v) if v.iter().all(|c| c.abs() < DIVERGENCE_LIMIT) => vars = v,
            _ => {
                return Err(Error::NoConvergence {
                    iterations: iter + 1,
                    residual: res,
                })
            }
        }
    }
    unreachable!("loop returns on the final iteration")
}

/// Deterministic start points: free gauge coordinates uniform in the
/// sampling box, resampled until every pair is at least
/// [`START_SEPARATION`] apart.
pub fn start_points(n: usize, opts: &SolveOptions) -> Vec<Configuration> {
    let layout = GaugeLayout::dziobek(n);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (lo, hi) = opts.sampling_box;
    (0..opts.starts)
        .map(|_| loop {
            let vars = DVector::from_fn(layout.len(), |_, _| rng.random_range(lo..hi));
            let points = layout.assemble(&vars);
            if closest_pair(&points).2 >= START_SEPARATION {
                break Configuration::new(points).expect("separated points");
            }
        })
        .collect()
}

/// Runs Newton from every start and keeps converged candidates of affine
/// dimension exactly `n - 2`. The output is sorted by pair distances, then
/// start index, and does not depend on how many workers ran.
pub fn multistart_solve(
    m: &MassVector,
    a: PotentialParam,
    opts: &SolveOptions,
) -> Result<Vec<CandidateSolution>> {
    opts.validate()?;
    let n = m.len();
    let affine_tol = Tolerances::default().affine;
    let starts = start_points(n, opts);
    let mut found: Vec<CandidateSolution> = starts
        .par_iter()
        .enumerate()
        .filter_map(|(k, x0)| {
            let mut c = newton_solve(x0, m, a, opts).ok()?;
            if affine_dimension(&c.configuration, affine_tol) != n - 2 {
                return None;
            }
            c.start_index = k;
            Some(c)
        })
        .collect();
    let keyed: Vec<Vec<f64>> = found
        .iter()
        .map(|c| c.configuration.pair_distances())
        .collect();
    let mut order: Vec<usize> = (0..found.len()).collect();
    order.sort_by(|&p, &q| {
        cmp_lex(&keyed[p], &keyed[q]).then(found[p].start_index.cmp(&found[q].start_index))
    });
    let mut slots: Vec<Option<CandidateSolution>> = found.drain(..).map(Some).collect();
    Ok(order
        .into_iter()
        .map(|k| slots[k].take().unwrap())
        .collect())
}

pub(crate) fn cmp_lex(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// Reorders bodies so the first `dim + 1` are as far from degenerate as
/// possible (greedy pivoting on distance to the current affine span).
fn pivot_order(points: &DMatrix<f64>) -> Vec<usize> {
    let (dim, n) = points.shape();
    let mut order = vec![0usize];
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let origin = points.column(0).into_owned();
    while order.len() < n {
        let mut best = (usize::MAX, -1.0);
        for b in (0..n).filter(|b| !order.contains(b)) {
            let mut v = points.column(b) - &origin;
            if basis.len() < dim {
                for e in &basis {
                    let proj = v.dot(e);
                    v.axpy(-proj, e, 1.0);
                }
            }
            let score = v.norm();
            if score > best.1 {
                best = (b, score);
            }
        }
        let b = best.0;
        if basis.len() < dim {
            let mut v = points.column(b) - &origin;
            for e in &basis {
                let proj = v.dot(e);
                v.axpy(-proj, e, 1.0);
            }
            let nv = v.norm();
            if nv > 0.0 {
                basis.push(v / nv);
            }
        }
        order.push(b);
    }
    order
}

/// Smallest over largest singular value of a square matrix.
pub fn conditioning_ratio(j: &DMatrix<f64>) -> f64 {
    let sv = j.singular_values();
    let smax = sv.iter().fold(0.0_f64, |a, v| a.max(*v));
    let smin = sv.iter().fold(f64::INFINITY, |a, v| a.min(*v));
    if smax == 0.0 {
        0.0
    } else {
        smin / smax
    }
}

/// `true` iff `conditioning_ratio(j) > tol`.
pub fn matrix_is_isolated(j: &DMatrix<f64>, tol: f64) -> bool {
    conditioning_ratio(j) > tol
}

/// Conditioning of the gauge-reduced Jacobian at `x`, in a body order chosen
/// so the echelon gauge is well posed.
pub fn isolation_ratio(x: &Configuration, m: &MassVector, a: PotentialParam) -> Result<f64> {
    check_masses(x.coords(), m)?;
    let order = pivot_order(x.coords());
    let points = DMatrix::from_fn(x.dim(), x.n(), |r, c| x.coords()[(r, order[c])]);
    let masses: Vec<f64> = order.iter().map(|&b| m[b]).collect();
    let relabeled = Configuration::new(points)?.gauged();
    let layout = GaugeLayout::new(x.n(), x.dim());
    let full = full_jacobian_raw(relabeled.coords(), &masses, a.value())?;
    Ok(conditioning_ratio(&layout.restrict_matrix(&full)))
}

/// Whether `x` is an isolated solution modulo the symmetries.
pub fn isolation_check(
    x: &Configuration,
    m: &MassVector,
    a: PotentialParam,
    tol: f64,
) -> Result<bool> {
    Ok(isolation_ratio(x, m, a)? > tol)
}
