use crate::error::{CanardError, Result};

/// `f(z) = Q(z) + B z + c` with `Q_k(z) = Σ_ij T[k][i][j] z_i z_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticVectorField {
    quadratic: Vec<Vec<Vec<f64>>>,
    linear: Vec<Vec<f64>>,
    constant: Vec<f64>,
}

impl QuadraticVectorField {
    /// Validates shapes and symmetry of `T` in its last two indices.
    pub fn new(quadratic: Vec<Vec<Vec<f64>>>, linear: Vec<Vec<f64>>, constant: Vec<f64>) -> Result<Self> {
        let n = constant.len();
        if n == 0 {
            return Err(CanardError::Dimension("field must have dim >= 1".into()));
        }
        if linear.len() != n || linear.iter().any(|r| r.len() != n) {
            return Err(CanardError::Dimension(format!("linear part must be {n}x{n}")));
        }
        if quadratic.len() != n || quadratic.iter().any(|m| m.len() != n || m.iter().any(|r| r.len() != n)) {
            return Err(CanardError::Dimension(format!("quadratic tensor must be {n}x{n}x{n}")));
        }
        for (k, m) in quadratic.iter().enumerate() {
            for i in 0..n {
                for j in 0..i {
                    if m[i][j] != m[j][i] {
                        return Err(CanardError::InvalidParameter(format!(
                            "quadratic tensor not symmetric at [{k}][{i}][{j}]"
                        )));
                    }
                }
            }
        }
        Ok(Self { quadratic, linear, constant })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            quadratic: vec![vec![vec![0.0; n]; n]; n],
            linear: vec![vec![0.0; n]; n],
            constant: vec![0.0; n],
        }
    }

    pub fn affine(linear: Vec<Vec<f64>>, constant: Vec<f64>) -> Result<Self> {
        let n = constant.len();
        Self::new(vec![vec![vec![0.0; n]; n]; n], linear, constant)
    }

    pub fn dim(&self) -> usize {
        self.constant.len()
    }

    pub fn quadratic(&self) -> &[Vec<Vec<f64>>] {
        &self.quadratic
    }

    pub fn linear(&self) -> &[Vec<f64>] {
        &self.linear
    }

    pub fn constant(&self) -> &[f64] {
        &self.constant
    }

    pub(crate) fn check_dim(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(CanardError::Dimension(format!(
                "state has length {} but field has dim {}",
                z.len(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Symmetric bilinear form `Q(z, w)_k = Σ_ij T[k][i][j] z_i w_j`.
    pub fn polar(&self, z: &[f64], w: &[f64]) -> Vec<f64> {
        self.quadratic
            .iter()
            .map(|m| {
                m.iter()
                    .zip(z)
                    .map(|(row, zi)| zi * row.iter().zip(w).map(|(t, wj)| t * wj).sum::<f64>())
                    .sum()
            })
            .collect()
    }

    pub fn linear_part(&self, z: &[f64]) -> Vec<f64> {
        self.linear
            .iter()
            .map(|row| row.iter().zip(z).map(|(b, zi)| b * zi).sum())
            .collect()
    }

    pub fn eval(&self, z: &[f64]) -> Vec<f64> {
        let q = self.polar(z, z);
        let l = self.linear_part(z);
        (0..self.dim()).map(|k| q[k] + l[k] + self.constant[k]).collect()
    }

    /// `Df(z)[k][i] = 2 Σ_j T[k][i][j] z_j + B[k][i]`.
    pub fn jacobian(&self, z: &[f64]) -> Vec<Vec<f64>> {
        self.quadratic
            .iter()
            .zip(&self.linear)
            .map(|(m, brow)| {
                m.iter()
                    .zip(brow)
                    .map(|(trow, b)| 2.0 * trow.iter().zip(z).map(|(t, zj)| t * zj).sum::<f64>() + b)
                    .collect()
            })
            .collect()
    }
}
