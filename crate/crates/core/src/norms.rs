//! Discrete `L^q` norms and moments (rectangle rule on the uniform grid).

use crate::error::{Error, Result};
use crate::grid::Field;

/// Relative size at the box edge above which a moment is flagged as
/// truncated.
pub const BOUNDARY_DECAY_TOL: f64 = 1e-10;

/// `(Σ|u_j|^q dx)^{1/q}` for finite `q`, `max_j |u_j|` for `q = ∞`.
pub fn lq_norm(field: &Field, q: f64) -> Result<f64> {
    lq_norm_slice(field.values(), field.grid().dx(), q)
}

pub(crate) fn lq_norm_slice(values: &[f64], dx: f64, q: f64) -> Result<f64> {
    if q.is_nan() || q < 1.0 {
        return Err(Error::Domain(format!("L^q norm needs q >= 1, got {q}")));
    }
    if q.is_infinite() {
        return Ok(values.iter().fold(0.0, |m: f64, v| m.max(v.abs())));
    }
    // Scale by the max to keep |u|^q away from underflow for large q.
    let peak = values.iter().fold(0.0, |m: f64, v| m.max(v.abs()));
    if peak == 0.0 {
        return Ok(0.0);
    }
    if q == 2.0 {
        let s: f64 = values.iter().map(|v| (v / peak) * (v / peak)).sum();
        return Ok(peak * (s * dx).sqrt());
    }
    let s: f64 = values.iter().map(|v| (v.abs() / peak).powf(q)).sum();
    Ok(peak * (s * dx).powf(1.0 / q))
}

/// A moment together with the box-truncation flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moment {
    pub value: f64,
    /// Set when the field has not decayed to [`BOUNDARY_DECAY_TOL`] of its
    /// peak at the box edge.
    pub truncated: bool,
}

/// Order 0: `Σ u_j dx`; order 1: `Σ x_j u_j dx`, in the grid's own
/// coordinates.
pub fn moment(field: &Field, order: u32) -> Result<Moment> {
    let grid = field.grid();
    let dx = grid.dx();
    let values = field.values();
    let value = match order {
        0 => values.iter().sum::<f64>() * dx,
        1 => {
            values
                .iter()
                .enumerate()
                .map(|(j, v)| grid.x(j) * v)
                .sum::<f64>()
                * dx
        }
        _ => {
            return Err(Error::Domain(format!(
                "moment order must be 0 or 1, got {order}"
            )))
        }
    };
    Ok(Moment {
        value,
        truncated: is_truncated(field),
    })
}

/// Whether the field fails the boundary-decay check.
pub fn is_truncated(field: &Field) -> bool {
    let values = field.values();
    let peak = field.max_abs();
    if peak == 0.0 {
        return false;
    }
    let n = values.len();
    let edge = values[0]
        .abs()
        .max(values[n - 1].abs())
        .max(values[1].abs())
        .max(values[n - 2].abs());
    edge > BOUNDARY_DECAY_TOL * peak
}
