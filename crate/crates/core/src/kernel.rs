//! Wendland C2 smoothing kernel with compact support `2h`.
//!
//! `W(r) = a_d (1 - q/2)^4 (2q + 1)` for `q = r/h <= 2`, with
//! `a_2 = 7 / (4 pi h^2)` and `a_3 = 21 / (16 pi h^3)`.

use std::f64::consts::PI;

use crate::{Result, SimError};

/// Smoothing length as a multiple of the particle spacing.
pub const SMOOTHING_RATIO: f64 = 1.15;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelModel {
    dp: f64,
    h: f64,
    cutoff: f64,
    dimension: usize,
    normalization: f64,
}

impl KernelModel {
    pub fn new(dp: f64, dimension: usize) -> Result<Self> {
        if !(dp > 0.0 && dp.is_finite()) {
            return Err(SimError::InvalidInput(format!(
                "particle spacing must be positive, got {dp}"
            )));
        }
        let h = SMOOTHING_RATIO * dp;
        let normalization = match dimension {
            2 => 7.0 / (4.0 * PI * h * h),
            3 => 21.0 / (16.0 * PI * h * h * h),
            _ => {
                return Err(SimError::InvalidInput(format!(
                    "kernel supports 2 or 3 dimensions, got {dimension}"
                )))
            }
        };
        Ok(Self {
            dp,
            h,
            cutoff: 2.0 * h,
            dimension,
            normalization,
        })
    }

    pub fn dp(&self) -> f64 {
        self.dp
    }

    pub fn smoothing_length(&self) -> f64 {
        self.h
    }

    pub fn cutoff(&self) -> f64 {
        self.cutoff
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    /// Kernel value at distance `r`.
    ///
    /// # Panics
    /// If `r` is negative or NaN.
    pub fn value(&self, r: f64) -> f64 {
        assert!(r >= 0.0, "kernel distance must be non-negative, got {r}");
        if r >= self.cutoff {
            return 0.0;
        }
        let q = r / self.h;
        let t = 1.0 - 0.5 * q;
        self.normalization * t * t * t * t * (2.0 * q + 1.0)
    }

    /// `dW/dr` at distance `r`; never positive.
    ///
    /// # Panics
    /// If `r` is negative or NaN.
    pub fn radial_derivative(&self, r: f64) -> f64 {
        assert!(r >= 0.0, "kernel distance must be non-negative, got {r}");
        if r >= self.cutoff {
            return 0.0;
        }
        let q = r / self.h;
        let t = 1.0 - 0.5 * q;
        -5.0 * q * t * t * t * self.normalization / self.h
    }

    /// `W(0)`, the normaliser of the bond weight used by the hourglass term.
    pub fn peak(&self) -> f64 {
        self.normalization
    }
}
