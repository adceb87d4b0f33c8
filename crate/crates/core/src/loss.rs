//! Margin losses and the L2-regularized objective
//! `½‖w‖² + C Σᵢ ℓ(yᵢ, wᵀxᵢ)` together with its subgradient
//! `g(w) = w + C Σᵢ ξᵢ xᵢ`, where `ξᵢ ∈ ∂_z ℓ(yᵢ, z)` at `z = wᵀxᵢ`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Dataset;

/// Margin loss. `m = y·z` below.
///
/// * `Hinge`: `max(0, 1 − m)`.
/// * `HuberHinge { width: h }`: smoothed hinge,
///   `0` for `m ≥ 1`, `(1 − m)² / (2h)` for `1 − h < m < 1`,
///   `1 − m − h/2` for `m ≤ 1 − h`.
/// * `Logistic`: `ln(1 + e^{−m})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossKind {
    HuberHinge { width: f64 },
    Hinge,
    Logistic,
}

impl Default for LossKind {
    fn default() -> Self {
        LossKind::HuberHinge { width: 1.0 }
    }
}

impl LossKind {
    pub fn name(&self) -> &'static str {
        match self {
            LossKind::HuberHinge { .. } => "huber_hinge",
            LossKind::Hinge => "hinge",
            LossKind::Logistic => "logistic",
        }
    }

    /// Hinge is the only variant without a derivative everywhere.
    pub fn is_differentiable(&self) -> bool {
        !matches!(self, LossKind::Hinge)
    }

    pub fn value(&self, y: f64, z: f64) -> f64 {
        let m = y * z;
        match *self {
            LossKind::Hinge => (1.0 - m).max(0.0),
            LossKind::HuberHinge { width } => {
                if m >= 1.0 {
                    0.0
                } else if m > 1.0 - width {
                    (1.0 - m) * (1.0 - m) / (2.0 * width)
                } else {
                    1.0 - m - width / 2.0
                }
            }
            LossKind::Logistic => {
                if m > 0.0 {
                    (-m).exp().ln_1p()
                } else {
                    -m + m.exp().ln_1p()
                }
            }
        }
    }

    /// Derivative with respect to the margin `m = yz`.
    fn margin_slope(&self, m: f64) -> f64 {
        match *self {
            LossKind::Hinge => {
                if m < 1.0 {
                    -1.0
                } else {
                    0.0
                }
            }
            LossKind::HuberHinge { width } => {
                if m >= 1.0 {
                    0.0
                } else if m > 1.0 - width {
                    -(1.0 - m) / width
                } else {
                    -1.0
                }
            }
            LossKind::Logistic => {
                if m >= 0.0 {
                    let e = (-m).exp();
                    -e / (1.0 + e)
                } else {
                    -1.0 / (1.0 + m.exp())
                }
            }
        }
    }

    /// Canonical element of `∂_z ℓ(y, z)`. Hinge returns 0 at the kink.
    pub fn subgradient(&self, y: f64, z: f64) -> f64 {
        y * self.margin_slope(y * z)
    }

    /// Generalized second derivative in `z` (labels are ±1 so `y² = 1`).
    /// Hinge has none and returns 0.
    pub fn curvature(&self, y: f64, z: f64) -> f64 {
        let m = y * z;
        match *self {
            LossKind::Hinge => 0.0,
            LossKind::HuberHinge { width } => {
                if m < 1.0 && m > 1.0 - width {
                    1.0 / width
                } else {
                    0.0
                }
            }
            LossKind::Logistic => {
                let s = if m >= 0.0 {
                    1.0 / (1.0 + (-m).exp())
                } else {
                    let e = m.exp();
                    e / (1.0 + e)
                };
                s * (1.0 - s)
            }
        }
    }
}

pub fn loss_value(kind: LossKind, y: f64, z: f64) -> f64 {
    kind.value(y, z)
}

pub fn loss_subgradient(kind: LossKind, y: f64, z: f64) -> f64 {
    kind.subgradient(y, z)
}

#[derive(Debug, Error, PartialEq)]
pub enum LossError {
    #[error("weight vector contains a non-finite value")]
    NonFiniteWeights,
    #[error("regularization parameter must be positive and finite, got {0}")]
    BadC(f64),
    #[error("weight vector has length {got}, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("huber width must be positive and finite, got {0}")]
    BadWidth(f64),
}

impl LossKind {
    pub fn validate(&self) -> Result<(), LossError> {
        match *self {
            LossKind::HuberHinge { width } if !(width > 0.0 && width.is_finite()) => {
                Err(LossError::BadWidth(width))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveState {
    pub weights: Vec<f64>,
    pub c: f64,
    pub objective_value: f64,
    pub subgradient: Vec<f64>,
    pub subgradient_norm: f64,
}

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Objective value and subgradient at `w`, accumulated in instance order.
pub fn objective_and_subgradient(
    kind: LossKind,
    train: &Dataset,
    w: &[f64],
    c: f64,
) -> Result<ObjectiveState, LossError> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(LossError::BadC(c));
    }
    if w.len() < train.dimension() {
        return Err(LossError::DimensionMismatch {
            expected: train.dimension(),
            got: w.len(),
        });
    }
    if w.iter().any(|v| !v.is_finite()) {
        return Err(LossError::NonFiniteWeights);
    }
    let mut loss_sum = 0.0;
    let mut g = w.to_vec();
    for inst in train.iter() {
        let z = inst.features.dot(w);
        let y = inst.y();
        loss_sum += kind.value(y, z);
        let xi = kind.subgradient(y, z);
        if xi != 0.0 {
            inst.features.add_scaled_to(&mut g, c * xi);
        }
    }
    let objective_value = 0.5 * dot(w, w) + c * loss_sum;
    let subgradient_norm = norm(&g);
    Ok(ObjectiveState {
        weights: w.to_vec(),
        c,
        objective_value,
        subgradient: g,
        subgradient_norm,
    })
}
