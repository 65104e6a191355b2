//! Nearest-point projections onto convex sets. Each is idempotent, so each
//! is a vector-valued analogue of an Ouroboros function.

use serde::Serialize;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OperatorError {
    #[error("dimension must be at least 1")]
    ZeroDimension,
    #[error("box bounds must be finite with lo < hi, got [{lo}, {hi}]")]
    BadBounds { lo: f64, hi: f64 },
    #[error("ball radius must be finite and positive, got {0}")]
    BadRadius(f64),
    #[error("hyperplane normal must be finite and non-zero")]
    BadNormal,
    #[error("hyperplane offset must be finite, got {0}")]
    BadOffset(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "operator", rename_all = "snake_case")]
pub enum VectorOperator {
    /// Coordinate-wise clamp to `[lo, hi]^d`.
    BoxClamp { dim: usize, lo: f64, hi: f64 },
    /// Projection onto `{x : ‖x‖₂ ≤ r}`.
    L2Ball { dim: usize, radius: f64 },
    /// Projection onto `{x : aᵀx = b}`.
    Hyperplane { normal: Vec<f64>, offset: f64 },
    /// Projection onto the standard simplex `{x ≥ 0 : Σx = 1}`.
    Simplex { dim: usize },
}

fn nonzero_dim(dim: usize) -> Result<(), OperatorError> {
    if dim == 0 {
        Err(OperatorError::ZeroDimension)
    } else {
        Ok(())
    }
}

impl VectorOperator {
    pub fn box_clamp(dim: usize, lo: f64, hi: f64) -> Result<VectorOperator, OperatorError> {
        nonzero_dim(dim)?;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(OperatorError::BadBounds { lo, hi });
        }
        Ok(VectorOperator::BoxClamp { dim, lo, hi })
    }

    pub fn l2_ball(dim: usize, radius: f64) -> Result<VectorOperator, OperatorError> {
        nonzero_dim(dim)?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(OperatorError::BadRadius(radius));
        }
        Ok(VectorOperator::L2Ball { dim, radius })
    }

    pub fn hyperplane(normal: Vec<f64>, offset: f64) -> Result<VectorOperator, OperatorError> {
        nonzero_dim(normal.len())?;
        if normal.iter().any(|a| !a.is_finite()) || normal.iter().all(|&a| a == 0.0) {
            return Err(OperatorError::BadNormal);
        }
        if !offset.is_finite() {
            return Err(OperatorError::BadOffset(offset));
        }
        Ok(VectorOperator::Hyperplane { normal, offset })
    }

    pub fn simplex(dim: usize) -> Result<VectorOperator, OperatorError> {
        nonzero_dim(dim)?;
        Ok(VectorOperator::Simplex { dim })
    }

    pub fn dim(&self) -> usize {
        match self {
            VectorOperator::BoxClamp { dim, .. }
            | VectorOperator::L2Ball { dim, .. }
            | VectorOperator::Simplex { dim } => *dim,
            VectorOperator::Hyperplane { normal, .. } => normal.len(),
        }
    }

    /// Applies the projection. `x.len()` must equal [`Self::dim`].
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.dim(), "operator dimension mismatch");
        match self {
            VectorOperator::BoxClamp { lo, hi, .. } => {
                x.iter().map(|v| v.max(*lo).min(*hi)).collect()
            }
            VectorOperator::L2Ball { radius, .. } => {
                let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                if norm <= *radius {
                    x.to_vec()
                } else {
                    let s = radius / norm;
                    x.iter().map(|v| v * s).collect()
                }
            }
            VectorOperator::Hyperplane { normal, offset } => {
                let dot: f64 = normal.iter().zip(x).map(|(a, v)| a * v).sum();
                let nn: f64 = normal.iter().map(|a| a * a).sum();
                let step = (dot - offset) / nn;
                x.iter().zip(normal).map(|(v, a)| v - step * a).collect()
            }
            VectorOperator::Simplex { .. } => project_simplex(x),
        }
    }
}

/// Euclidean projection onto the standard simplex by sorting: find the
/// largest ρ with `u_ρ > (Σ_{j≤ρ} u_j − 1)/ρ` over the descending sort `u`,
/// then shift by that threshold and clip at zero.
pub fn project_simplex(x: &[f64]) -> Vec<f64> {
    let mut u = x.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &uj) in u.iter().enumerate() {
        cumulative += uj;
        let t = (cumulative - 1.0) / (j + 1) as f64;
        if uj - t > 0.0 {
            theta = t;
        }
    }
    x.iter().map(|v| (v - theta).max(0.0)).collect()
}
