//! Channel estimation: LMMSE from pilots and code-aided refinement.

mod ascent;
mod metric;

pub use ascent::{coordinate_ascent, AscentError, AscentOutcome, AscentParams, AscentVariant};
pub use metric::{check_metric, CheckMetric, MetricState, MetricVariant};

use crate::channel::ChannelMatrix;
use nalgebra::DMatrix;
use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LmmseError {
    #[error("pilot grid has {xp} columns but received grid has {yp}")]
    Dimension { xp: usize, yp: usize },
    #[error("pilot Gram matrix is singular")]
    Singular,
}

/// `H^ = Y_p X_p^H (X_p X_p^H + 2 sigma^2 I)^-1`.
pub fn lmmse(
    y_p: &DMatrix<Complex64>,
    x_p: &DMatrix<Complex64>,
    noise_var: f64,
) -> Result<ChannelMatrix, LmmseError> {
    if y_p.ncols() != x_p.ncols() {
        return Err(LmmseError::Dimension {
            xp: x_p.ncols(),
            yp: y_p.ncols(),
        });
    }
    let n_tx = x_p.nrows();
    let gram = x_p * x_p.adjoint() + DMatrix::identity(n_tx, n_tx) * Complex64::new(noise_var, 0.0);
    let inv = gram.try_inverse().ok_or(LmmseError::Singular)?;
    Ok(ChannelMatrix(y_p * x_p.adjoint() * inv))
}
