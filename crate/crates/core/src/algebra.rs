//! Shape variables, the Dziobek kernel vector, the rank-one factorization,
//! Veronese quadrics and the class-count bound.
//!
//! Every residual here is relative to the largest magnitude entering it, so
//! the numbers are invariant under the projective rescalings of `s`, `delta`
//! and `m`.

use std::fmt;

use nalgebra::DMatrix;
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Configuration, DistanceMatrix, DziobekVector, MassVector, PairShape, PotentialParam,
    ShapeMatrix,
};

/// Relative threshold below which a kernel computation is declared rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Default relative threshold for [`degeneracy_index`].
pub const DEGENERACY_TOL: f64 = 1e-8;

/// `u^(2a) - 1` evaluated without cancellation near `u = 1`.
#[inline]
pub(crate) fn shape_value(u: f64, a: f64) -> f64 {
    (2.0 * a * u.ln()).exp_m1()
}

/// Off-diagonal shape variables `s_ij = d_ij^(2a) - 1` under the `r0 = 1` gauge.
pub fn shape_from_distances(d: &DistanceMatrix, a: PotentialParam) -> PairShape {
    let n = d.n();
    let mut s = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = shape_value(d.get(i, j), a.value());
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    PairShape::new(s).expect("built symmetric")
}

/// Fills `s_ii = -(1/m_i) sum_{j != i} m_j s_ij`.
pub fn complete_diagonal(s: &PairShape, m: &MassVector) -> Result<ShapeMatrix> {
    let n = s.n();
    if m.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "{} masses for a {n}x{n} shape matrix",
            m.len()
        )));
    }
    let mut full = DMatrix::from_fn(n, n, |i, j| s.get(i, j));
    for i in 0..n {
        let sum: f64 = (0..n).filter(|&j| j != i).map(|j| m[j] * s.get(i, j)).sum();
        full[(i, i)] = -sum / m[i];
    }
    ShapeMatrix::new(full)
}

/// `[1 ... 1]` stacked above the body coordinates: a `(dim+1) x n` matrix.
pub fn configuration_matrix(x: &Configuration) -> DMatrix<f64> {
    let (dim, n) = (x.dim(), x.n());
    DMatrix::from_fn(dim + 1, n, |r, c| {
        if r == 0 {
            1.0
        } else {
            x.coords()[(r - 1, c)]
        }
    })
}

fn check_kernel_shape(x: &DMatrix<f64>) -> Result<()> {
    if x.ncols() < 2 || x.nrows() + 1 != x.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "kernel needs an (n-1) x n matrix, got {} x {}",
            x.nrows(),
            x.ncols()
        )));
    }
    Ok(())
}

/// Unit length, first significant entry positive.
fn normalize_kernel(mut v: Vec<f64>) -> Result<DziobekVector> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Err(Error::RankDeficient);
    }
    let max = v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()));
    let lead = v
        .iter()
        .copied()
        .find(|x| x.abs() > 1e-8 * max)
        .unwrap_or(1.0);
    let scale = if lead < 0.0 { -1.0 / norm } else { 1.0 / norm };
    for x in &mut v {
        *x *= scale;
    }
    DziobekVector::new(v)
}

/// Kernel generator from signed maximal minors, `delta_k = (-1)^(k+1) |X_k|`
/// (1-based `k`), where `X_k` drops column `k`.
pub fn kernel_by_minors(x: &DMatrix<f64>) -> Result<DziobekVector> {
    check_kernel_shape(x)?;
    let n = x.ncols();
    let col_norms: Vec<f64> = x.column_iter().map(|c| c.norm()).collect();
    // Hadamard bound on every maximal minor.
    let hadamard = (0..n)
        .map(|k| {
            col_norms
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != k)
                .map(|(_, v)| v)
                .product::<f64>()
        })
        .fold(0.0_f64, f64::max);
    let raw: Vec<f64> = (0..n)
        .map(|k| {
            let minor = x.clone().remove_column(k).determinant();
            if k % 2 == 0 {
                minor
            } else {
                -minor
            }
        })
        .collect();
    let max = raw.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if max <= RANK_TOL * hadamard {
        return Err(Error::RankDeficient);
    }
    normalize_kernel(raw)
}

/// Kernel generator from a singular value decomposition; independent of the
/// minor expansion and normalized the same way.
pub fn kernel_by_factorization(x: &DMatrix<f64>) -> Result<DziobekVector> {
    check_kernel_shape(x)?;
    let n = x.ncols();
    // Pad to square so the decomposition exposes the full right basis.
    let padded = x.clone().insert_row(x.nrows(), 0.0);
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::RankDeficient)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let smax = svd.singular_values[order[n - 1]];
    if n > 1 && svd.singular_values[order[1]] <= RANK_TOL * smax {
        return Err(Error::RankDeficient);
    }
    let v = v_t.row(order[0]).iter().copied().collect();
    normalize_kernel(v)
}

fn max_abs<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Max over `i` and `k < l` of `|m_k s_ik delta_l - m_l s_il delta_k|`,
/// relative to the largest single product.
pub fn dziobek_relation_residual(s: &ShapeMatrix, m: &MassVector, delta: &DziobekVector) -> f64 {
    let n = s.n();
    let d = delta.as_slice();
    let mut worst = 0.0_f64;
    let mut scale = 0.0_f64;
    for i in 0..n {
        for k in 0..n {
            let left = m[k] * s.get(i, k);
            for l in (k + 1)..n {
                let a = left * d[l];
                let b = m[l] * s.get(i, l) * d[k];
                worst = worst.max((a - b).abs());
                scale = scale.max(a.abs()).max(b.abs());
            }
        }
    }
    if scale == 0.0 {
        0.0
    } else {
        worst / scale
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rank1Fit {
    pub kappa: f64,
    pub residual: f64,
}

/// Least-squares `kappa` in `m_i m_j s_ij = kappa delta_i delta_j` over
/// `i <= j`, and the relative max deviation from that identity.
pub fn rank1_fit(s: &ShapeMatrix, m: &MassVector, delta: &DziobekVector) -> Result<Rank1Fit> {
    let n = s.n();
    let d = delta.as_slice();
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..n {
        for j in i..n {
            let p = m[i] * m[j] * s.get(i, j);
            let q = d[i] * d[j];
            num += p * q;
            den += q * q;
        }
    }
    if den == 0.0 {
        return Err(Error::DegenerateDelta("sum of (delta_i delta_j)^2 is zero"));
    }
    let kappa = num / den;
    let mut worst = 0.0_f64;
    let mut scale = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            let p = m[i] * m[j] * s.get(i, j);
            worst = worst.max((p - kappa * d[i] * d[j]).abs());
            scale = scale.max(p.abs());
        }
    }
    let residual = if scale == 0.0 { 0.0 } else { worst / scale };
    Ok(Rank1Fit { kappa, residual })
}

/// All 2x2 minors of a square matrix, max absolute value over `max |s_ij|^2`.
pub fn minor_residual(s: &DMatrix<f64>) -> f64 {
    let n = s.nrows();
    let scale = max_abs(s.iter().map(|v| v * v));
    if scale == 0.0 {
        return 0.0;
    }
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            let sij = s[(i, j)];
            for k in 0..n {
                let sik = s[(i, k)];
                for l in 0..n {
                    worst = worst.max((sij * s[(k, l)] - sik * s[(j, l)]).abs());
                }
            }
        }
    }
    worst / scale
}

/// Veronese quadric residual `max |s_ij s_kl - s_ik s_jl|`, repeated indices
/// included, relative to `max s_ij^2`.
pub fn veronese_residuals(s: &ShapeMatrix) -> f64 {
    minor_residual(s.matrix())
}

/// Number of diagonal entries with `|s_ii| <= tol * max_j |s_jj|`. Returns `n`
/// when the whole diagonal vanishes.
pub fn degeneracy_index(s: &ShapeMatrix, tol: f64) -> usize {
    let diag = s.diagonal();
    let scale = max_abs(diag.iter().copied());
    if scale == 0.0 {
        return diag.len();
    }
    diag.iter().filter(|v| v.abs() <= tol * scale).count()
}

/// Degree-two monomials `z_i z_j` (`i <= j`, lexicographic pair order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VeroneseImage {
    pub n: usize,
    pub coordinates: Vec<f64>,
}

impl VeroneseImage {
    /// Position of the pair `(i, j)`, `i <= j`, in the coordinate list.
    pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        // Rows 0..i contribute n, n-1, ..., n-i+1 entries.
        i * n - i * (i.saturating_sub(1)) / 2 + (j - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.coordinates[Self::pair_index(self.n, i, j)]
    }

    pub fn to_symmetric(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
}

pub fn veronese_map(z: &[f64]) -> Result<VeroneseImage> {
    if z.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroVector);
    }
    let n = z.len();
    let mut coordinates = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            coordinates.push(z[i] * z[j]);
        }
    }
    Ok(VeroneseImage { n, coordinates })
}

/// The class-count bound `2^(C(n+1,2) + n - 1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bound {
    pub n: usize,
    pub exponent: u64,
    pub value: BigUint,
}

impl Bound {
    /// Whether `count` classes are within the bound.
    pub fn admits(&self, count: usize) -> bool {
        BigUint::from(count) <= self.value
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "2^{} = {}", self.exponent, self.value)
    }
}

pub fn bound(n: usize) -> Result<Bound> {
    if n < 3 {
        return Err(Error::TooFewBodies { min: 3, got: n });
    }
    let n64 = n as u64;
    let exponent = n64 * (n64 + 1) / 2 + n64 - 1;
    let value = BigUint::from(1u8) << exponent;
    Ok(Bound { n, exponent, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::validate_masses;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn shape_examples() {
        let d = DistanceMatrix::from_pairs(3, &[1.0, 2.0, 4.0]).unwrap();
        let s = shape_from_distances(&d, PotentialParam::VORTEX);
        assert_eq!(s.get(0, 1), 0.0);
        assert!(close(s.get(0, 2), -0.75, 1e-15));
        let s = shape_from_distances(&d, PotentialParam::NEWTON);
        assert!(close(s.get(1, 2), -63.0 / 64.0, 1e-15));
        assert_eq!(s.get(2, 1), s.get(1, 2));
    }

    #[test]
    fn diagonal_completion_examples() {
        let m = validate_masses(&[1.0, 1.0, 1.0]).unwrap();
        let zero = PairShape::new(DMatrix::zeros(3, 3)).unwrap();
        assert_eq!(
            complete_diagonal(&zero, &m).unwrap().diagonal(),
            vec![0.0; 3]
        );

        let mut s = DMatrix::zeros(3, 3);
        s[(0, 1)] = 1.0;
        s[(1, 0)] = 1.0;
        s[(0, 2)] = 1.0;
        s[(2, 0)] = 1.0;
        let full = complete_diagonal(&PairShape::new(s).unwrap(), &m).unwrap();
        assert_eq!(full.diagonal(), vec![-2.0, -1.0, -1.0]);
    }

    #[test]
    fn configuration_matrix_by_definition() {
        let x = Configuration::from_points(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let m = configuration_matrix(&x);
        assert_eq!(
            m,
            DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 1.0, 0.0, 1.0, 2.0])
        );

        let sq = Configuration::from_points(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        let m = configuration_matrix(&sq);
        assert_eq!(
            m,
            DMatrix::from_row_slice(
                3,
                4,
                &[1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0]
            )
        );
    }

    #[test]
    fn kernel_of_three_collinear_points() {
        let x = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 1.0, 0.0, 1.0, 2.0]);
        let expected = [1.0 / 6f64.sqrt(), -2.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt()];
        for delta in [
            kernel_by_minors(&x).unwrap(),
            kernel_by_factorization(&x).unwrap(),
        ] {
            for (a, b) in delta.as_slice().iter().zip(expected) {
                assert!(close(*a, b, 1e-14), "{:?}", delta);
            }
        }
    }

    #[test]
    fn kernel_of_triangle_with_centroid() {
        let t = 1.0 / 3.0;
        let x = DMatrix::from_row_slice(
            3,
            4,
            &[1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 0.0, t, 0.0, 0.0, 1.0, t],
        );
        let norm = 12f64.sqrt();
        let expected = [1.0 / norm, 1.0 / norm, 1.0 / norm, -3.0 / norm];
        for delta in [
            kernel_by_minors(&x).unwrap(),
            kernel_by_factorization(&x).unwrap(),
        ] {
            for (a, b) in delta.as_slice().iter().zip(expected) {
                assert!(close(*a, b, 1e-14), "{:?}", delta);
            }
        }
    }

    #[test]
    fn kernel_rejects_bad_input() {
        // Four coplanar-collinear bodies in the plane: rank 2 < n - 1.
        let x = DMatrix::from_row_slice(
            3,
            4,
            &[1.0, 1.0, 1.0, 1.0, 0.0, 1.0, 2.0, 3.0, 0.0, 1.0, 2.0, 3.0],
        );
        assert_eq!(kernel_by_minors(&x), Err(Error::RankDeficient));
        assert_eq!(kernel_by_factorization(&x), Err(Error::RankDeficient));
        // Regular simplex in its own dimension gives an n x n matrix.
        let square = DMatrix::identity(4, 4);
        assert!(matches!(
            kernel_by_minors(&square),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn residuals_vanish_on_zero_shape() {
        let m = validate_masses(&[1.0, 2.0, 3.0]).unwrap();
        let s = ShapeMatrix::new(DMatrix::zeros(3, 3)).unwrap();
        let delta = DziobekVector::new(vec![1.0, -2.0, 1.0]).unwrap();
        assert_eq!(dziobek_relation_residual(&s, &m, &delta), 0.0);
        let fit = rank1_fit(&s, &m, &delta).unwrap();
        assert_eq!(fit.kappa, 0.0);
        assert_eq!(degeneracy_index(&s, DEGENERACY_TOL), 3);
    }

    #[test]
    fn rank1_recovers_kappa_two() {
        let m = validate_masses(&[1.0, 2.0, 0.5, 3.0]).unwrap();
        let d = [0.4, -0.1, 0.5, -0.8];
        let s = DMatrix::from_fn(4, 4, |i, j| 2.0 * (d[i] / m[i]) * (d[j] / m[j]));
        let s = ShapeMatrix::new(s).unwrap();
        let delta = DziobekVector::new(d.to_vec()).unwrap();
        let fit = rank1_fit(&s, &m, &delta).unwrap();
        assert!(close(fit.kappa, 2.0, 1e-14));
        assert!(fit.residual < 1e-15);
        assert!(dziobek_relation_residual(&s, &m, &delta) < 1e-15);
    }

    #[test]
    fn veronese_examples() {
        let w = [0.3, -1.2, 2.0, 0.7];
        let outer = DMatrix::from_fn(4, 4, |i, j| w[i] * w[j]);
        assert!(minor_residual(&outer) < 1e-15);
        assert_eq!(minor_residual(&DMatrix::identity(3, 3)), 1.0);

        let img = veronese_map(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(img.coordinates, vec![1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let img = veronese_map(&[1.0, 2.0]).unwrap();
        assert_eq!(img.coordinates, vec![1.0, 2.0, 4.0]);
        assert_eq!(img.get(1, 0), 2.0);
        assert_eq!(veronese_map(&[0.0, 0.0]), Err(Error::ZeroVector));
    }

    #[test]
    fn pair_index_is_lexicographic() {
        let n = 5;
        let mut expect = 0;
        for i in 0..n {
            for j in i..n {
                assert_eq!(VeroneseImage::pair_index(n, i, j), expect);
                expect += 1;
            }
        }
    }

    #[test]
    fn degeneracy_examples() {
        let s = ShapeMatrix::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            1.0, 2.0, 3.0, 4.0,
        ])))
        .unwrap();
        assert_eq!(degeneracy_index(&s, DEGENERACY_TOL), 0);
        let s = ShapeMatrix::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            1.0, 2.0, 0.0, 0.0,
        ])))
        .unwrap();
        assert_eq!(degeneracy_index(&s, DEGENERACY_TOL), 2);
    }

    #[test]
    fn bound_examples() {
        assert_eq!(bound(4).unwrap().value, BigUint::from(8192u32));
        assert_eq!(bound(4).unwrap().to_string(), "2^13 = 8192");
        assert_eq!(bound(3).unwrap().value, BigUint::from(256u32));
        assert_eq!(bound(5).unwrap().value, BigUint::from(524288u32));
        assert!(bound(2).is_err());
    }
}
