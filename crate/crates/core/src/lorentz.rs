//! Proper Lorentz transformations on `(1+n)`-dimensional spacetime and the
//! boost to the center-of-momentum frame of a colliding pair.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::config::PhysicsConfig;
use crate::error::{Error, Result};
use crate::kinematics::{check_dimension, dot, invariants, FourMomentum};

/// Dense `(1+n) x (1+n)` matrix stored row-major; index 0 is time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeMatrix {
    side: usize,
    entries: Vec<f64>,
}

impl SpacetimeMatrix {
    pub fn identity(dimension: usize) -> Self {
        let side = dimension + 1;
        let mut entries = vec![0.0; side * side];
        for i in 0..side {
            entries[i * side + i] = 1.0;
        }
        SpacetimeMatrix { side, entries }
    }

    /// Minkowski metric `diag(-1, 1, ..., 1)`.
    pub fn metric(dimension: usize) -> Self {
        let mut g = Self::identity(dimension);
        g.entries[0] = -1.0;
        g
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let side = rows.len();
        if side < 3 {
            return Err(Error::ShapeMismatch {
                expected: 3,
                found: side,
            });
        }
        let mut entries = Vec::with_capacity(side * side);
        for row in rows {
            if row.len() != side {
                return Err(Error::ShapeMismatch {
                    expected: side,
                    found: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Ok(SpacetimeMatrix { side, entries })
    }

    /// Spatial dimension `n`.
    pub fn dimension(&self) -> usize {
        self.side - 1
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.side + col]
    }

    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.entries[row * self.side + col] = value;
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries.chunks(self.side).map(|r| r.to_vec()).collect()
    }

    pub fn matmul(&self, other: &SpacetimeMatrix) -> Result<SpacetimeMatrix> {
        self.check_side(other.side)?;
        let n = self.side;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                for j in 0..n {
                    out[i * n + j] += a * other.get(k, j);
                }
            }
        }
        Ok(SpacetimeMatrix {
            side: n,
            entries: out,
        })
    }

    pub fn transpose(&self) -> SpacetimeMatrix {
        let n = self.side;
        let mut out = self.clone();
        for i in 0..n {
            for j in 0..n {
                out.entries[i * n + j] = self.get(j, i);
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &SpacetimeMatrix) -> f64 {
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn determinant(&self) -> f64 {
        self.to_dmatrix().determinant()
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.side, self.side, &self.entries)
    }

    /// Matrix-vector product on a `(1+n)` component vector.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_side(x.len())?;
        Ok(self
            .entries
            .chunks(self.side)
            .map(|row| dot(row, x))
            .collect())
    }

    pub fn apply_momentum(&self, p: &FourMomentum) -> Result<Vec<f64>> {
        self.apply(&p.components())
    }

    fn check_side(&self, found: usize) -> Result<()> {
        if found != self.side {
            return Err(Error::ShapeMismatch {
                expected: self.side,
                found,
            });
        }
        Ok(())
    }

    /// `(|det - 1|, max |L^T g L - g|)`
    pub fn lorentz_residuals(&self) -> (f64, f64) {
        let g = Self::metric(self.dimension());
        let product = self
            .transpose()
            .matmul(&g)
            .and_then(|m| m.matmul(self))
            .expect("square matrices of equal side");
        ((self.determinant() - 1.0).abs(), product.max_abs_diff(&g))
    }

    /// Proper Lorentz test: unit determinant and metric preservation, both
    /// within `tol_algebra`.
    pub fn is_proper_lorentz(&self, cfg: &PhysicsConfig) -> Result<bool> {
        check_dimension(self.dimension(), cfg.dimension)?;
        let (det_residual, metric_residual) = self.lorentz_residuals();
        Ok(det_residual <= cfg.tol_algebra && metric_residual <= cfg.tol_algebra)
    }

    /// Inverse of a Lorentz transformation, `g L^T g`.
    pub fn invert(&self, cfg: &PhysicsConfig) -> Result<SpacetimeMatrix> {
        if !self.is_proper_lorentz(cfg)? {
            let (det_residual, metric_residual) = self.lorentz_residuals();
            return Err(Error::NotLorentz {
                det_residual,
                metric_residual,
            });
        }
        Ok(self.invert_unchecked())
    }

    pub(crate) fn invert_unchecked(&self) -> SpacetimeMatrix {
        let mut out = self.transpose();
        for i in 1..self.side {
            out.set(0, i, -out.get(0, i));
            out.set(i, 0, -out.get(i, 0));
        }
        out
    }
}

/// Boost with velocity `(p+q)/(p0+q0)` and Lorentz factor `(p0+q0)/sqrt(s)`.
///
/// Falls back to the identity when `|p+q| <= tol_algebra (p0+q0)`, which is
/// the continuous limit of the family at zero velocity.
pub fn boost_to_com(
    p: &FourMomentum,
    q: &FourMomentum,
    cfg: &PhysicsConfig,
) -> Result<SpacetimeMatrix> {
    let inv = invariants(p, q, cfg)?;
    let n = cfg.dimension;
    let total_energy = p.energy + q.energy;
    let total = &p.spatial + &q.spatial;
    let total_sq = total.norm_sq();
    if total_sq.sqrt() <= cfg.tol_algebra * total_energy {
        return Ok(SpacetimeMatrix::identity(n));
    }
    let root_s = inv.s.sqrt();
    let gamma = total_energy / root_s;
    // (gamma - 1) / |P|^2, written without the cancellation in gamma - 1.
    let shear = 1.0 / ((total_energy + root_s) * root_s);
    let mut m = SpacetimeMatrix::identity(n);
    m.set(0, 0, gamma);
    for i in 0..n {
        let v = -total[i] / root_s;
        m.set(0, i + 1, v);
        m.set(i + 1, 0, v);
        for j in 0..n {
            let delta = if i == j { 1.0 } else { 0.0 };
            m.set(i + 1, j + 1, delta + shear * total[i] * total[j]);
        }
    }
    Ok(m)
}

/// Largest deviation of `L(p+q)` from `(sqrt s, 0, ..., 0)` together with the
/// time component of `L(p-q)`.
pub fn com_frame_residual(
    lambda: &SpacetimeMatrix,
    p: &FourMomentum,
    q: &FourMomentum,
    cfg: &PhysicsConfig,
) -> Result<f64> {
    let inv = invariants(p, q, cfg)?;
    let sum: Vec<f64> = p
        .components()
        .iter()
        .zip(q.components())
        .map(|(a, b)| a + b)
        .collect();
    let diff: Vec<f64> = p
        .components()
        .iter()
        .zip(q.components())
        .map(|(a, b)| a - b)
        .collect();
    let mapped_sum = lambda.apply(&sum)?;
    let mapped_diff = lambda.apply(&diff)?;
    let mut residual = (mapped_sum[0] - inv.s.sqrt()).abs();
    for x in &mapped_sum[1..] {
        residual = residual.max(x.abs());
    }
    Ok(residual.max(mapped_diff[0].abs()))
}

/// Whether `lambda` maps the pair into its center-of-momentum frame.
/// The tolerance scales with the total energy.
pub fn check_com_frame(
    lambda: &SpacetimeMatrix,
    p: &FourMomentum,
    q: &FourMomentum,
    cfg: &PhysicsConfig,
) -> Result<bool> {
    let residual = com_frame_residual(lambda, p, q, cfg)?;
    Ok(residual <= com_tolerance(p, q, cfg))
}

pub(crate) fn com_tolerance(p: &FourMomentum, q: &FourMomentum, cfg: &PhysicsConfig) -> f64 {
    cfg.tol_algebra * 1.0_f64.max(p.energy + q.energy)
}

/// Spatial rotation embedded as `diag(1, R)`.
pub fn spatial_rotation(rotation: &[Vec<f64>]) -> Result<SpacetimeMatrix> {
    let n = rotation.len();
    let mut m = SpacetimeMatrix::identity(n);
    for (i, row) in rotation.iter().enumerate() {
        if row.len() != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                found: row.len(),
            });
        }
        for (j, x) in row.iter().enumerate() {
            m.set(i + 1, j + 1, *x);
        }
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kinematics::{lift, Momentum};
    use approx::assert_relative_eq;

    fn cfg() -> PhysicsConfig {
        PhysicsConfig::new(3, 1.0).unwrap()
    }

    fn lift3(x: [f64; 3]) -> FourMomentum {
        lift(&Momentum::new(&x), &cfg()).unwrap()
    }

    #[test]
    fn identity_is_lorentz_and_parity_is_not() {
        let id = SpacetimeMatrix::identity(3);
        assert!(id.is_proper_lorentz(&cfg()).unwrap());
        let mut flipped = id.clone();
        flipped.set(0, 0, -1.0);
        assert!(!flipped.is_proper_lorentz(&cfg()).unwrap());
        assert!(flipped.invert(&cfg()).is_err());
    }

    #[test]
    fn boost_of_rest_pair_is_identity() {
        let rest = lift3([0.0; 3]);
        let b = boost_to_com(&rest, &rest, &cfg()).unwrap();
        assert_eq!(b, SpacetimeMatrix::identity(3));
    }

    #[test]
    fn boost_worked_pair() {
        let p = lift3([1.0, 0.0, 0.0]);
        let q = lift3([0.0; 3]);
        let b = boost_to_com(&p, &q, &cfg()).unwrap();
        assert_relative_eq!(b.get(0, 0), 1.0986841, epsilon = 1e-7);
        assert_relative_eq!(b.get(0, 1), -0.4550899, epsilon = 1e-7);
        assert_eq!(b.get(0, 2), 0.0);
        assert_eq!(b.get(0, 3), 0.0);
        let sum: Vec<f64> = p
            .components()
            .iter()
            .zip(q.components())
            .map(|(a, b)| a + b)
            .collect();
        let mapped = b.apply(&sum).unwrap();
        assert_relative_eq!(mapped[0], 2.1973682, epsilon = 1e-7);
        for x in &mapped[1..] {
            assert!(x.abs() < 1e-14);
        }
        assert!(b.is_proper_lorentz(&cfg()).unwrap());
        assert!(check_com_frame(&b, &p, &q, &cfg()).unwrap());
    }

    #[test]
    fn inverse_composes_to_identity() {
        let p = lift3([1.3, -0.2, 2.0]);
        let q = lift3([-0.4, 0.9, 0.5]);
        let b = boost_to_com(&p, &q, &cfg()).unwrap();
        let inv = b.invert(&cfg()).unwrap();
        let id = SpacetimeMatrix::identity(3);
        assert!(inv.matmul(&b).unwrap().max_abs_diff(&id) < 1e-12);
        assert!(inv.invert(&cfg()).unwrap().max_abs_diff(&b) < 1e-12);
        let numeric = b.to_dmatrix().try_inverse().unwrap();
        assert!((inv.to_dmatrix() - numeric).amax() < 1e-10);
        assert_eq!(id.invert(&cfg()).unwrap(), id);
    }

    #[test]
    fn com_frame_checks() {
        let id = SpacetimeMatrix::identity(3);
        let p = lift3([0.4, -1.0, 0.2]);
        let q = lift3([-0.4, 1.0, -0.2]);
        assert!(check_com_frame(&id, &p, &q, &cfg()).unwrap());
        let a = lift3([1.0, 0.0, 0.0]);
        let r = lift3([0.0; 3]);
        assert!(!check_com_frame(&id, &a, &r, &cfg()).unwrap());
    }

    #[test]
    fn apply_rejects_wrong_length() {
        let id = SpacetimeMatrix::identity(3);
        assert!(id.apply(&[1.0, 2.0]).is_err());
        assert_eq!(
            id.apply(&[1.0, 2.0, 3.0, 4.0]).unwrap(),
            vec![1.0, 2.0, 3.0, 4.0]
        );
    }

    #[test]
    fn from_rows_validates_shape() {
        assert!(SpacetimeMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).is_err());
        assert!(SpacetimeMatrix::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, 0.0, 1.0]
        ])
        .is_err());
    }
}
