//! Domain types shared by every stage of the pipeline.
//!
//! All types are immutable once built. Constructors validate their
//! invariants, so downstream code can rely on them without re-checking.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exponent `a` of the homogeneous potential family.
///
/// The interaction enters only through `r^(2a)`; `a = -3/2` is the Newtonian
/// problem and `a = -1` the logarithmic (vortex) one.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct PotentialParam(f64);

impl PotentialParam {
    pub const NEWTON: PotentialParam = PotentialParam(-1.5);
    pub const VORTEX: PotentialParam = PotentialParam(-1.0);

    pub fn new(a: f64) -> Result<Self> {
        if !a.is_finite() || a == 0.0 {
            return Err(Error::InvalidExponent(a));
        }
        Ok(Self(a))
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    pub fn label(self) -> &'static str {
        if self.0 == -1.5 {
            "newtonian"
        } else if self.0 == -1.0 {
            "vortex"
        } else {
            "power-law"
        }
    }
}

impl TryFrom<f64> for PotentialParam {
    type Error = Error;
    fn try_from(a: f64) -> Result<Self> {
        Self::new(a)
    }
}

impl From<PotentialParam> for f64 {
    fn from(p: PotentialParam) -> f64 {
        p.0
    }
}

/// Whether negative masses are admitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MassMode {
    #[default]
    Physical,
    Formal,
}

/// Body masses with the cached total mass `M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MassRepr", into = "MassRepr")]
pub struct MassVector {
    m: Vec<f64>,
    total: f64,
    mode: MassMode,
}

#[derive(Serialize, Deserialize)]
struct MassRepr {
    masses: Vec<f64>,
    #[serde(default)]
    mode: MassMode,
}

impl TryFrom<MassRepr> for MassVector {
    type Error = Error;
    fn try_from(r: MassRepr) -> Result<Self> {
        MassVector::with_mode(&r.masses, r.mode)
    }
}

impl From<MassVector> for MassRepr {
    fn from(m: MassVector) -> Self {
        MassRepr {
            masses: m.m,
            mode: m.mode,
        }
    }
}

impl MassVector {
    pub fn with_mode(m: &[f64], mode: MassMode) -> Result<Self> {
        if m.len() < 3 {
            return Err(Error::TooFewBodies {
                min: 3,
                got: m.len(),
            });
        }
        for (index, &value) in m.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite("masses"));
            }
            if value == 0.0 {
                return Err(Error::ZeroMass { index });
            }
            if value < 0.0 && mode == MassMode::Physical {
                return Err(Error::NonPositiveMass { index, value });
            }
        }
        let total: f64 = m.iter().sum();
        if total == 0.0 {
            return Err(Error::ZeroTotalMass);
        }
        Ok(Self {
            m: m.to_vec(),
            total,
            mode,
        })
    }

    /// `n` equal unit masses.
    pub fn equal(n: usize) -> Result<Self> {
        Self::with_mode(&vec![1.0; n], MassMode::Physical)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.m.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.m.is_empty()
    }

    #[inline]
    pub fn total(&self) -> f64 {
        self.total
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.m
    }

    pub fn mode(&self) -> MassMode {
        self.mode
    }
}

impl std::ops::Index<usize> for MassVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.m[i]
    }
}

/// Physical-mode mass validation.
pub fn validate_masses(m: &[f64]) -> Result<MassVector> {
    MassVector::with_mode(m, MassMode::Physical)
}

/// Formal-mode validation: signed masses are allowed, zeros are not.
pub fn validate_masses_formal(m: &[f64]) -> Result<MassVector> {
    MassVector::with_mode(m, MassMode::Formal)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Frame {
    /// Body 1 at the origin, body k+1 supported on the first k axes with a
    /// nonnegative leading coordinate.
    Echelon,
    /// Coordinates as supplied.
    Free,
}

/// Normalization record carried by a [`Configuration`]. The dilation gauge is
/// always `r0 = 1`, which forces `lambda = M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gauge {
    pub r0: f64,
    pub frame: Frame,
}

impl Gauge {
    pub const FREE: Gauge = Gauge {
        r0: 1.0,
        frame: Frame::Free,
    };
    pub const ECHELON: Gauge = Gauge {
        r0: 1.0,
        frame: Frame::Echelon,
    };
}

/// `n` points in a common ambient space, stored column-per-body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigurationRepr", into = "ConfigurationRepr")]
pub struct Configuration {
    points: DMatrix<f64>,
    gauge: Gauge,
}

#[derive(Serialize, Deserialize)]
struct ConfigurationRepr {
    positions: Vec<Vec<f64>>,
    gauge: Gauge,
}

impl TryFrom<ConfigurationRepr> for Configuration {
    type Error = Error;
    fn try_from(r: ConfigurationRepr) -> Result<Self> {
        let mut c = Configuration::from_points(&r.positions)?;
        c.gauge = r.gauge;
        Ok(c)
    }
}

impl From<Configuration> for ConfigurationRepr {
    fn from(c: Configuration) -> Self {
        ConfigurationRepr {
            positions: c.positions(),
            gauge: c.gauge,
        }
    }
}

impl Configuration {
    /// Builds a configuration from a `dim x n` matrix (one column per body).
    pub fn new(points: DMatrix<f64>) -> Result<Self> {
        Self::with_gauge(points, Gauge::FREE)
    }

    pub fn with_gauge(points: DMatrix<f64>, gauge: Gauge) -> Result<Self> {
        if points.ncols() < 2 {
            return Err(Error::TooFewBodies {
                min: 2,
                got: points.ncols(),
            });
        }
        if points.nrows() == 0 {
            return Err(Error::DimensionMismatch(
                "ambient dimension must be at least 1".into(),
            ));
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("positions"));
        }
        let n = points.ncols();
        for i in 0..n {
            for j in (i + 1)..n {
                if (points.column(i) - points.column(j)).norm_squared() == 0.0 {
                    return Err(Error::CoincidentBodies { i, j });
                }
            }
        }
        Ok(Self { points, gauge })
    }

    /// Builds a configuration from a list of points of equal length.
    pub fn from_points(points: &[Vec<f64>]) -> Result<Self> {
        let dim = points.first().map_or(0, Vec::len);
        if let Some(bad) = points.iter().position(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch(format!(
                "point {bad} has {} coordinates, point 0 has {dim}",
                points[bad].len()
            )));
        }
        let m = DMatrix::from_fn(dim, points.len(), |r, c| points[c][r]);
        Self::new(m)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.points.ncols()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.points.nrows()
    }

    #[inline]
    pub fn coords(&self) -> &DMatrix<f64> {
        &self.points
    }

    pub fn gauge(&self) -> Gauge {
        self.gauge
    }

    pub fn point(&self, i: usize) -> DVector<f64> {
        self.points.column(i).into_owned()
    }

    pub fn positions(&self) -> Vec<Vec<f64>> {
        self.points
            .column_iter()
            .map(|c| c.iter().copied().collect())
            .collect()
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        (self.points.column(i) - self.points.column(j)).norm()
    }

    /// Distances in lexicographic pair order (1,2), (1,3), ..., (n-1,n).
    pub fn pair_distances(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                out.push(self.distance(i, j));
            }
        }
        out
    }

    pub fn distance_matrix(&self) -> DistanceMatrix {
        let n = self.n();
        let mut d = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in (i + 1)..n {
                let r = self.distance(i, j);
                d[(i, j)] = r;
                d[(j, i)] = r;
            }
        }
        DistanceMatrix(d)
    }

    fn is_echelon(&self) -> bool {
        let p = &self.points;
        if p.column(0).iter().any(|&v| v != 0.0) {
            return false;
        }
        for body in 1..self.n() {
            let support = body.min(self.dim());
            for axis in support..self.dim() {
                if p[(axis, body)] != 0.0 {
                    return false;
                }
            }
            if body <= self.dim() && p[(body - 1, body)] < 0.0 {
                return false;
            }
        }
        true
    }

    /// Applies the echelon gauge: translate body 1 to the origin, then rotate
    /// (and reflect axes) so body k+1 lies on the first k axes with a
    /// nonnegative leading coordinate. A configuration already in that form
    /// is returned unchanged.
    pub fn gauged(&self) -> Configuration {
        if self.is_echelon() {
            return Configuration {
                points: self.points.clone(),
                gauge: Gauge::ECHELON,
            };
        }
        let (dim, n) = (self.dim(), self.n());
        let origin = self.points.column(0).into_owned();
        let mut centered = DMatrix::zeros(dim, n - 1);
        for b in 1..n {
            centered
                .column_mut(b - 1)
                .copy_from(&(self.points.column(b) - &origin));
        }
        let r = centered.qr().r();
        let mut out = DMatrix::zeros(dim, n);
        for row in 0..r.nrows() {
            let flip = row < r.ncols() && r[(row, row)] < 0.0;
            for b in 1..n {
                let v = r[(row, b - 1)];
                // Entries strictly below the echelon staircase are exact zeros.
                out[(row, b)] = if row >= b {
                    0.0
                } else if flip {
                    -v
                } else {
                    v
                };
            }
        }
        Configuration {
            points: out,
            gauge: Gauge::ECHELON,
        }
    }

    /// Keeps only the first `dim` coordinates.
    pub fn truncated(&self, dim: usize) -> Result<Configuration> {
        if dim == 0 || dim > self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "cannot truncate ambient dimension {} to {dim}",
                self.dim()
            )));
        }
        Configuration::with_gauge(self.points.rows(0, dim).into_owned(), self.gauge)
    }
}

/// Symmetric matrix of mutual distances with zero diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct DistanceMatrix(DMatrix<f64>);

impl DistanceMatrix {
    pub fn new(d: DMatrix<f64>) -> Result<Self> {
        let n = d.nrows();
        if d.ncols() != n {
            return Err(Error::DimensionMismatch(
                "distance matrix must be square".into(),
            ));
        }
        if d.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("distance matrix"));
        }
        for i in 0..n {
            if d[(i, i)] != 0.0 {
                return Err(Error::DimensionMismatch(format!(
                    "distance diagonal entry {i} is nonzero"
                )));
            }
            for j in (i + 1)..n {
                if d[(i, j)] != d[(j, i)] {
                    return Err(Error::DimensionMismatch(format!(
                        "distance matrix not symmetric at ({i},{j})"
                    )));
                }
                if d[(i, j)] <= 0.0 {
                    return Err(Error::CoincidentBodies { i, j });
                }
            }
        }
        Ok(Self(d))
    }

    /// From pair-ordered distances `d_12, d_13, ..., d_(n-1)n`.
    pub fn from_pairs(n: usize, pairs: &[f64]) -> Result<Self> {
        if pairs.len() != n * (n.saturating_sub(1)) / 2 {
            return Err(Error::DimensionMismatch(format!(
                "{} pair distances do not fit {n} bodies",
                pairs.len()
            )));
        }
        let mut d = DMatrix::zeros(n, n);
        let mut it = pairs.iter();
        for i in 0..n {
            for j in (i + 1)..n {
                let v = *it.next().unwrap();
                d[(i, j)] = v;
                d[(j, i)] = v;
            }
        }
        Self::new(d)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn pairs(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            for j in (i + 1)..n {
                out.push(self.0[(i, j)]);
            }
        }
        out
    }
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

fn rows_to_matrix(rows: &[Vec<f64>]) -> Result<DMatrix<f64>> {
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::DimensionMismatch(
            "matrix rows must have length n".into(),
        ));
    }
    Ok(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl TryFrom<Vec<Vec<f64>>> for DistanceMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows_to_matrix(&rows)?)
    }
}

impl From<DistanceMatrix> for Vec<Vec<f64>> {
    fn from(d: DistanceMatrix) -> Self {
        matrix_to_rows(&d.0)
    }
}

/// Off-diagonal shape values `s_ij`; the diagonal is not yet defined.
#[derive(Debug, Clone, PartialEq)]
pub struct PairShape(DMatrix<f64>);

impl PairShape {
    /// Diagonal entries of `s` are ignored and stored as zero.
    pub fn new(mut s: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&s, "pair shape")?;
        s.fill_diagonal(0.0);
        Ok(Self(s))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }
}

fn check_symmetric(s: &DMatrix<f64>, what: &'static str) -> Result<()> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(Error::DimensionMismatch(format!("{what} must be square")));
    }
    if s.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite(what));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if s[(i, j)] != s[(j, i)] {
                return Err(Error::DimensionMismatch(format!(
                    "{what} not symmetric at ({i},{j})"
                )));
            }
        }
    }
    Ok(())
}

/// Full symmetric shape matrix, diagonal included.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct ShapeMatrix(DMatrix<f64>);

impl ShapeMatrix {
    /// Takes the matrix as given, diagonal included. Use
    /// [`crate::algebra::complete_diagonal`] to derive the diagonal from masses.
    pub fn new(s: DMatrix<f64>) -> Result<Self> {
        check_symmetric(&s, "shape matrix")?;
        Ok(Self(s))
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.0.diagonal().iter().copied().collect()
    }

    pub fn off_diagonal(&self) -> PairShape {
        let mut s = self.0.clone();
        s.fill_diagonal(0.0);
        PairShape(s)
    }
}

impl TryFrom<Vec<Vec<f64>>> for ShapeMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::new(rows_to_matrix(&rows)?)
    }
}

impl From<ShapeMatrix> for Vec<Vec<f64>> {
    fn from(s: ShapeMatrix) -> Self {
        matrix_to_rows(&s.0)
    }
}

/// Generator of the kernel of the configuration matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DziobekVector(Vec<f64>);

impl DziobekVector {
    /// Relative bound on `|sum delta_i|` accepted from external data.
    pub const SUM_TOL: f64 = 1e-9;

    pub fn new(delta: Vec<f64>) -> Result<Self> {
        if delta.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dziobek vector"));
        }
        let scale = delta.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
        if scale == 0.0 {
            return Err(Error::DegenerateDelta("all entries are zero"));
        }
        if delta.iter().filter(|v| **v != 0.0).count() < 2 {
            return Err(Error::DegenerateDelta("fewer than two nonzero entries"));
        }
        let sum: f64 = delta.iter().sum();
        if sum.abs() > Self::SUM_TOL * scale * delta.len() as f64 {
            return Err(Error::DegenerateDelta("entries do not sum to zero"));
        }
        Ok(Self(delta))
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// `|cos|` of the angle with another vector of the same length.
    pub fn abs_cosine(&self, other: &[f64]) -> f64 {
        abs_cosine(&self.0, other)
    }
}

impl TryFrom<Vec<f64>> for DziobekVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<DziobekVector> for Vec<f64> {
    fn from(d: DziobekVector) -> Self {
        d.0
    }
}

pub(crate) fn abs_cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    (dot.abs() / (na * nb)).min(1.0)
}

/// Thresholds applied by the certifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub cc: f64,
    pub dziobek: f64,
    pub rank1: f64,
    pub veronese: f64,
    /// Relative smallest/largest singular value of the reduced Jacobian.
    pub isolation: f64,
    pub degeneracy: f64,
    /// Relative singular-value threshold for affine dimension.
    pub affine: f64,
    /// `1 - |cos|` allowed between the two kernel routes.
    pub kernel: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            cc: 1e-9,
            dziobek: 1e-8,
            rank1: 1e-8,
            veronese: 1e-8,
            isolation: 1e-6,
            degeneracy: 1e-8,
            affine: 1e-10,
            kernel: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Accepted,
    Rejected,
}

/// Full certification record for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub verdict: Verdict,
    /// Max-norm of the gauge-fixed central configuration residual.
    pub cc_residual: f64,
    /// Same residual in the `lambda = M`, centre-of-mass form.
    pub cc_residual_lambda_form: f64,
    pub affine_dim: usize,
    pub delta: DziobekVector,
    pub delta_sum: f64,
    /// `|cos|` between the minor-based and factorization-based kernels.
    pub kernel_cosine: f64,
    /// Smallest `|cos|` between a nonzero column `(m_i s_ij)_i` and `delta`.
    pub column_kernel_cosine: f64,
    pub dziobek_residual: f64,
    pub kappa: f64,
    pub rank1_residual: f64,
    pub veronese_residual: f64,
    pub degeneracy_index: usize,
    /// Smallest over largest singular value of the reduced Jacobian.
    pub isolation_ratio: f64,
    pub isolated: bool,
    pub failures: Vec<String>,
    /// Checks that are reported but do not decide the verdict. A
    /// non-isolated solution is a property of the masses, not a defect of
    /// the configuration.
    pub warnings: Vec<String>,
    pub tolerances_used: Tolerances,
}

impl Certificate {
    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accepted
    }
}

/// One class of central configurations modulo similarity, reflection and
/// mass-preserving relabeling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CCClass {
    pub canonical_key: Vec<f64>,
    pub representative: Configuration,
    pub certificate: Certificate,
    pub multiplicity_found: usize,
}

fn pair_potential(r: f64, mi: f64, mj: f64, a: f64) -> f64 {
    if a == -1.0 {
        mi * mj * r.ln()
    } else {
        mi * mj * r.powf(2.0 * a + 2.0) / (2.0 * a + 2.0)
    }
}

/// Potential `U_a` of raw points (one column per body) and masses. Works for
/// any number of bodies, two included.
pub fn potential_of_points(
    points: &DMatrix<f64>,
    masses: &[f64],
    a: PotentialParam,
) -> Result<f64> {
    let n = points.ncols();
    if masses.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} masses for {n} bodies",
            masses.len()
        )));
    }
    let mut u = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let r = (points.column(i) - points.column(j)).norm();
            if r == 0.0 {
                return Err(Error::CoincidentBodies { i, j });
            }
            u += pair_potential(r, masses[i], masses[j], a.value());
        }
    }
    Ok(u)
}

/// Potential `U_a(x)`, used for reporting only.
pub fn eval_potential(x: &Configuration, m: &MassVector, a: PotentialParam) -> Result<f64> {
    potential_of_points(x.coords(), m.as_slice(), a)
}
