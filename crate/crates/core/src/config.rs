//! Boundary-point configurations.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SleError};

/// The marked point u: either ∞ or a finite boundary point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Marked {
    Infinity,
    Finite(f64),
}

impl Marked {
    pub fn is_finite(&self) -> bool {
        matches!(self, Marked::Finite(_))
    }

    pub fn finite(&self) -> Option<f64> {
        match self {
            Marked::Finite(u) => Some(*u),
            Marked::Infinity => None,
        }
    }

    /// Conversion from the JSON convention `null` = ∞.
    pub fn from_option(u: Option<f64>) -> Self {
        match u {
            Some(v) => Marked::Finite(v),
            None => Marked::Infinity,
        }
    }
}

/// Ordered boundary points x₁ < … < xₙ plus the marked point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryConfig {
    points: Vec<f64>,
    marked: Marked,
}

impl BoundaryConfig {
    pub fn new(points: Vec<f64>, marked: Marked) -> Result<Self> {
        if points.is_empty() {
            return Err(SleError::BadConfiguration("no boundary points".into()));
        }
        for w in points.windows(2) {
            if !(w[0] < w[1]) {
                return Err(SleError::BadConfiguration(format!(
                    "points must be strictly increasing, got {} then {}",
                    w[0], w[1]
                )));
            }
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(SleError::BadConfiguration("non-finite point".into()));
        }
        if let Marked::Finite(u) = marked {
            if !u.is_finite() {
                return Err(SleError::BadConfiguration("non-finite u".into()));
            }
            if points.contains(&u) {
                return Err(SleError::BadConfiguration(
                    "u coincides with a boundary point".into(),
                ));
            }
        }
        Ok(Self { points, marked })
    }

    pub fn n(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn marked(&self) -> Marked {
        self.marked
    }

    /// Distance from x_j to its nearest neighbor (other points and a
    /// finite u).
    pub fn local_gap(&self, j: usize) -> f64 {
        let xj = self.points[j];
        let mut gap = f64::INFINITY;
        for (k, &xk) in self.points.iter().enumerate() {
            if k != j {
                gap = gap.min((xk - xj).abs());
            }
        }
        if let Marked::Finite(u) = self.marked {
            gap = gap.min((u - xj).abs());
        }
        gap
    }

    /// Smallest pairwise distance in the configuration.
    pub fn min_gap(&self) -> f64 {
        (0..self.n())
            .map(|j| self.local_gap(j))
            .fold(f64::INFINITY, f64::min)
    }

    /// Dilated configuration s·x (and s·u for finite u).
    pub fn scaled(&self, s: f64) -> Result<Self> {
        let marked = match self.marked {
            Marked::Infinity => Marked::Infinity,
            Marked::Finite(u) => Marked::Finite(s * u),
        };
        Self::new(self.points.iter().map(|&x| s * x).collect(), marked)
    }

    /// Configuration scaled about a finite center: c + s·(x − c).
    pub fn scaled_about(&self, c: f64, s: f64) -> Result<Self> {
        let marked = match self.marked {
            Marked::Infinity => Marked::Infinity,
            Marked::Finite(u) => Marked::Finite(c + s * (u - c)),
        };
        Self::new(self.points.iter().map(|&x| c + s * (x - c)).collect(), marked)
    }

    /// Translated configuration x + s (and u + s for finite u).
    pub fn translated(&self, s: f64) -> Result<Self> {
        let marked = match self.marked {
            Marked::Infinity => Marked::Infinity,
            Marked::Finite(u) => Marked::Finite(u + s),
        };
        Self::new(self.points.iter().map(|&x| x + s).collect(), marked)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ordering_enforced() {
        assert!(BoundaryConfig::new(vec![0.0, 1.0], Marked::Infinity).is_ok());
        assert!(BoundaryConfig::new(vec![1.0, 0.0], Marked::Infinity).is_err());
        assert!(BoundaryConfig::new(vec![0.0, 0.0], Marked::Infinity).is_err());
        assert!(BoundaryConfig::new(vec![0.0, 1.0], Marked::Finite(1.0)).is_err());
        assert!(BoundaryConfig::new(vec![0.0, 1.0], Marked::Finite(2.5)).is_ok());
    }

    #[test]
    fn gaps() {
        let c = BoundaryConfig::new(vec![0.0, 1.0, 4.0], Marked::Finite(4.5)).unwrap();
        assert_eq!(c.local_gap(0), 1.0);
        assert_eq!(c.local_gap(2), 0.5);
        assert_eq!(c.min_gap(), 0.5);
    }
}
