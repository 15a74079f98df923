use std::fmt;
use std::str::FromStr;

use crate::error::{BleuError, Result};

pub const DEFAULT_MAX_ORDER: usize = 4;
pub const DEFAULT_FLOOR_EPSILON: f64 = 0.1;
pub const DEFAULT_ADD_K: f64 = 1.0;

/// Treatment of zero (or small) modified precisions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Smoothing {
    /// Plain precisions; any zero precision zeroes the score.
    None,
    /// A zero-match order gets precision `eps / den`.
    Floor { eps: f64 },
    /// Orders `n >= 2` get `(num + k) / (den + k)`.
    AddK { k: f64 },
    /// The i-th zero-match order (counting from 1) gets `1 / (2^i * den)`.
    Exp,
}

impl Smoothing {
    pub fn name(&self) -> &'static str {
        match self {
            Smoothing::None => "none",
            Smoothing::Floor { .. } => "floor",
            Smoothing::AddK { .. } => "add-k",
            Smoothing::Exp => "exp",
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Smoothing::Floor { eps } if !(eps > 0.0 && eps.is_finite()) => {
                Err(BleuError::Config(format!("floor epsilon must be positive, got {eps}")))
            }
            Smoothing::AddK { k } if !(k > 0.0 && k.is_finite()) => {
                Err(BleuError::Config(format!("add-k constant must be positive, got {k}")))
            }
            _ => Ok(()),
        }
    }
}

impl Default for Smoothing {
    fn default() -> Self {
        Smoothing::None
    }
}

impl fmt::Display for Smoothing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Smoothing {
    type Err = BleuError;

    /// Parses a method name, using the default parameters.
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Smoothing::None),
            "floor" => Ok(Smoothing::Floor {
                eps: DEFAULT_FLOOR_EPSILON,
            }),
            "add-k" => Ok(Smoothing::AddK { k: DEFAULT_ADD_K }),
            "exp" => Ok(Smoothing::Exp),
            other => Err(BleuError::Config(format!(
                "unknown smoothing method {other:?} (expected none, floor, add-k or exp)"
            ))),
        }
    }
}

/// Maximum n-gram order, per-order weights and smoothing.
///
/// Weights are normalized to sum to one when set.
#[derive(Debug, Clone, PartialEq)]
pub struct BleuConfig {
    max_order: usize,
    weights: Vec<f64>,
    smoothing: Smoothing,
}

impl BleuConfig {
    /// Uniform weights over orders `1..=max_order`, no smoothing.
    pub fn new(max_order: usize) -> Result<Self> {
        if max_order < 1 {
            return Err(BleuError::Config("max_order must be at least 1".into()));
        }
        Ok(Self {
            max_order,
            weights: vec![1.0 / max_order as f64; max_order],
            smoothing: Smoothing::None,
        })
    }

    /// Uses explicit weights; `max_order` becomes `weights.len()`.
    pub fn with_weights(mut self, weights: &[f64]) -> Result<Self> {
        if weights.is_empty() {
            return Err(BleuError::Config("weights must not be empty".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(BleuError::Config(format!(
                "weights must be finite and non-negative, got {w}"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if sum <= 0.0 {
            return Err(BleuError::Config("weights must not all be zero".into()));
        }
        self.max_order = weights.len();
        self.weights = weights.iter().map(|w| w / sum).collect();
        Ok(self)
    }

    pub fn with_smoothing(mut self, smoothing: Smoothing) -> Result<Self> {
        smoothing.validate()?;
        self.smoothing = smoothing;
        Ok(self)
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn smoothing(&self) -> Smoothing {
        self.smoothing
    }
}

impl Default for BleuConfig {
    fn default() -> Self {
        Self::new(DEFAULT_MAX_ORDER).expect("default order is valid")
    }
}
