//! Distance geometry: centres of mass, affine dimension, Cayley-Menger
//! determinants, classical embedding of distance matrices and the inverse
//! of the shape map.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Configuration, DistanceMatrix, MassVector, PairShape, PotentialParam};

/// Gram eigenvalues below this fraction of the largest are treated as zero.
pub const EMBED_TOL: f64 = 1e-10;

/// Weighted centroid of raw points (one column per body).
pub fn weighted_centroid(points: &DMatrix<f64>, masses: &[f64]) -> DVector<f64> {
    let total: f64 = masses.iter().sum();
    let mut c = DVector::zeros(points.nrows());
    for (col, &m) in points.column_iter().zip(masses) {
        c.axpy(m, &col, 1.0);
    }
    c / total
}

/// `c = (sum m_i x_i) / M`.
pub fn center_of_mass(x: &Configuration, m: &MassVector) -> DVector<f64> {
    weighted_centroid(x.coords(), m.as_slice())
}

/// Numerical rank of the centred coordinates, relative threshold `tol`.
pub fn affine_dimension(x: &Configuration, tol: f64) -> usize {
    let n = x.n();
    let mean = weighted_centroid(x.coords(), &vec![1.0; n]);
    let mut centered = x.coords().clone();
    for mut col in centered.column_iter_mut() {
        col -= &mean;
    }
    let sv = centered.singular_values();
    let smax = sv.iter().fold(0.0_f64, |a, v| a.max(*v));
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|v| **v > tol * smax).count()
}

/// Determinant of the bordered matrix `[[0, 1^T], [1, (d_ij^2)]]` over `subset`.
pub fn cayley_menger_det(d: &DistanceMatrix, subset: &[usize]) -> Result<f64> {
    if subset.is_empty() || subset.len() > d.n() {
        return Err(Error::DimensionMismatch(format!(
            "subset of size {} for {} bodies",
            subset.len(),
            d.n()
        )));
    }
    if let Some(&bad) = subset.iter().find(|&&i| i >= d.n()) {
        return Err(Error::DimensionMismatch(format!(
            "body index {bad} out of range"
        )));
    }
    let k = subset.len();
    let mut cm = DMatrix::zeros(k + 1, k + 1);
    for i in 1..=k {
        cm[(0, i)] = 1.0;
        cm[(i, 0)] = 1.0;
        for j in 1..=k {
            let r = d.get(subset[i - 1], subset[j - 1]);
            cm[(i, j)] = r * r;
        }
    }
    Ok(cm.determinant())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationResult {
    pub configuration: Configuration,
    pub achieved_dim: usize,
    /// Largest discarded Gram eigenvalue magnitude over the largest eigenvalue.
    pub spectral_tail: f64,
}

/// Classical multidimensional scaling: double-centre the squared distances,
/// keep the top `target_dim` eigenpairs, and return the embedding in the
/// echelon gauge.
pub fn realize_from_distances(
    d: &DistanceMatrix,
    target_dim: usize,
    tol: f64,
) -> Result<RealizationResult> {
    let n = d.n();
    if target_dim == 0 {
        return Err(Error::DimensionMismatch(
            "target dimension must be >= 1".into(),
        ));
    }
    let sq = d.matrix().map(|v| v * v);
    let row_mean: Vec<f64> = (0..n).map(|i| sq.row(i).sum() / n as f64).collect();
    let grand = row_mean.iter().sum::<f64>() / n as f64;
    let gram = DMatrix::from_fn(n, n, |i, j| {
        -0.5 * (sq[(i, j)] - row_mean[i] - row_mean[j] + grand)
    });

    let eig = gram.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let lmax = eig.eigenvalues[order[0]].max(0.0);
    if lmax == 0.0 {
        return Err(Error::NotEmbeddable {
            target_dim,
            reason: "Gram matrix has no positive eigenvalue".into(),
        });
    }
    let achieved_dim = order
        .iter()
        .filter(|&&k| eig.eigenvalues[k] > tol * lmax)
        .count();
    let lmin = eig.eigenvalues[order[n - 1]];
    if lmin < -tol * lmax {
        return Err(Error::NotEmbeddable {
            target_dim,
            reason: format!("negative Gram eigenvalue {:.3e} (relative)", lmin / lmax),
        });
    }
    let spectral_tail = order
        .iter()
        .skip(target_dim)
        .map(|&k| eig.eigenvalues[k].abs() / lmax)
        .fold(0.0_f64, f64::max);
    if spectral_tail > tol {
        return Err(Error::NotEmbeddable {
            target_dim,
            reason: format!("needs dimension {achieved_dim}"),
        });
    }
    let coords = DMatrix::from_fn(target_dim, n, |r, c| match order.get(r) {
        Some(&k) => eig.eigenvalues[k].max(0.0).sqrt() * eig.eigenvectors[(c, k)],
        None => 0.0,
    });
    let configuration = Configuration::new(coords)?.gauged();
    Ok(RealizationResult {
        configuration,
        achieved_dim,
        spectral_tail,
    })
}

/// Inverts the shape map: `d_ij = (1 + s_ij)^(1/(2a))`.
pub fn distances_from_shape(s: &PairShape, a: PotentialParam) -> Result<DistanceMatrix> {
    let n = s.n();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let v = s.get(i, j);
            if 1.0 + v <= 0.0 {
                return Err(Error::NonPositiveShape {
                    i,
                    j,
                    value: 1.0 + v,
                });
            }
            let r = (v.ln_1p() / (2.0 * a.value())).exp();
            d[(i, j)] = r;
            d[(j, i)] = r;
        }
    }
    DistanceMatrix::new(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::shape_from_distances;
    use crate::model::validate_masses;

    #[test]
    fn centre_of_mass_examples() {
        let sq = Configuration::from_points(&[
            vec![1.0, 1.0],
            vec![-1.0, 1.0],
            vec![-1.0, -1.0],
            vec![1.0, -1.0],
        ])
        .unwrap();
        let c = center_of_mass(&sq, &MassVector::equal(4).unwrap());
        assert_eq!(c.as_slice(), &[0.0, 0.0]);

        let line = DMatrix::from_row_slice(1, 2, &[0.0, 4.0]);
        assert_eq!(weighted_centroid(&line, &[1.0, 3.0])[0], 3.0);
    }

    #[test]
    fn centre_of_mass_translates() {
        let m = validate_masses(&[1.0, 2.0, 3.0]).unwrap();
        let pts = DMatrix::from_row_slice(2, 3, &[0.1, 0.7, -0.4, 1.0, -0.3, 0.2]);
        let t = DVector::from_vec(vec![2.5, -1.5]);
        let shifted = DMatrix::from_fn(2, 3, |r, c| pts[(r, c)] + t[r]);
        let c0 = center_of_mass(&Configuration::new(pts).unwrap(), &m);
        let c1 = center_of_mass(&Configuration::new(shifted).unwrap(), &m);
        assert!((c1 - (c0 + t)).norm() < 1e-15);
    }

    #[test]
    fn affine_dimension_examples() {
        let line =
            Configuration::from_points(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        assert_eq!(affine_dimension(&line, EMBED_TOL), 1);
        let sq = Configuration::from_points(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ])
        .unwrap();
        assert_eq!(affine_dimension(&sq, EMBED_TOL), 2);
    }

    #[test]
    fn cayley_menger_examples() {
        let line = DistanceMatrix::from_pairs(3, &[1.0, 2.0, 1.0]).unwrap();
        assert!(cayley_menger_det(&line, &[0, 1, 2]).unwrap().abs() < 1e-14);

        let tri = DistanceMatrix::from_pairs(3, &[1.0, 1.0, 1.0]).unwrap();
        let det = cayley_menger_det(&tri, &[0, 1, 2]).unwrap();
        let area = 3f64.sqrt() / 4.0;
        assert!((det + 3.0).abs() < 1e-14);
        assert!((det + 16.0 * area * area).abs() < 1e-14);

        let sq = Configuration::from_points(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ])
        .unwrap()
        .distance_matrix();
        assert!(cayley_menger_det(&sq, &[0, 1, 2, 3]).unwrap().abs() < 1e-12);
        // Half-square triangle: area 1/2.
        assert!((cayley_menger_det(&sq, &[0, 1, 2]).unwrap() + 4.0).abs() < 1e-12);
        assert!(cayley_menger_det(&sq, &[0, 9]).is_err());
    }

    #[test]
    fn realize_collinear_triple() {
        let d = DistanceMatrix::from_pairs(3, &[1.0, 2.0, 1.0]).unwrap();
        let r = realize_from_distances(&d, 1, EMBED_TOL).unwrap();
        assert_eq!(r.achieved_dim, 1);
        for (a, b) in r.configuration.pair_distances().iter().zip(d.pairs()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(r.configuration.point(0)[0], 0.0);
    }

    #[test]
    fn realize_rejects_triangle_violation() {
        let d = DistanceMatrix::from_pairs(3, &[1.0, 10.0, 1.0]).unwrap();
        assert!(matches!(
            realize_from_distances(&d, 2, EMBED_TOL),
            Err(Error::NotEmbeddable { .. })
        ));
    }

    #[test]
    fn realize_rejects_too_small_dimension() {
        let d = DistanceMatrix::from_pairs(3, &[1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(
            realize_from_distances(&d, 1, EMBED_TOL),
            Err(Error::NotEmbeddable { .. })
        ));
    }

    #[test]
    fn shape_inversion_examples() {
        let zero = PairShape::new(DMatrix::zeros(3, 3)).unwrap();
        let d = distances_from_shape(&zero, PotentialParam::NEWTON).unwrap();
        assert_eq!(d.pairs(), vec![1.0; 3]);

        let mut s = DMatrix::zeros(3, 3);
        s[(0, 1)] = -0.75;
        s[(1, 0)] = -0.75;
        let d = distances_from_shape(&PairShape::new(s).unwrap(), PotentialParam::VORTEX).unwrap();
        assert!((d.get(0, 1) - 2.0).abs() < 1e-15);

        let mut s = DMatrix::zeros(3, 3);
        s[(1, 2)] = -1.5;
        s[(2, 1)] = -1.5;
        assert!(matches!(
            distances_from_shape(&PairShape::new(s).unwrap(), PotentialParam::NEWTON),
            Err(Error::NonPositiveShape { i: 1, j: 2, .. })
        ));
    }

    #[test]
    fn shape_round_trip() {
        let d = DistanceMatrix::from_pairs(4, &[0.6, 1.9, 1.2, 0.75, 1.4, 0.51]).unwrap();
        for a in [-1.5, -1.0, -0.5, 0.75] {
            let a = PotentialParam::new(a).unwrap();
            let back = distances_from_shape(&shape_from_distances(&d, a), a).unwrap();
            for (x, y) in back.pairs().iter().zip(d.pairs()) {
                assert!((x - y).abs() < 1e-12 * y);
            }
        }
    }
}
