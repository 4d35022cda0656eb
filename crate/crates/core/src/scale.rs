//! Column preprocessing applied to the augmented matrix before clustering.

use std::fmt;
use std::str::FromStr;

use ndarray::Array2;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ScalingKind {
    None,
    Centered,
    Standardized,
}

impl ScalingKind {
    pub const ALL: [ScalingKind; 3] = [ScalingKind::None, ScalingKind::Centered, ScalingKind::Standardized];

    pub fn as_str(self) -> &'static str {
        match self {
            ScalingKind::None => "none",
            ScalingKind::Centered => "centered",
            ScalingKind::Standardized => "standardized",
        }
    }
}

impl fmt::Display for ScalingKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScalingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(ScalingKind::None),
            "centered" => Ok(ScalingKind::Centered),
            "standardized" => Ok(ScalingKind::Standardized),
            other => Err(Error::InvalidArgument(format!("unknown scaling `{other}`"))),
        }
    }
}

/// Returns a scaled copy of `matrix`.
///
/// `Standardized` divides each centered column by its population standard
/// deviation; zero-variance columns are only centered.
pub fn apply_scaling(matrix: &Array2<f64>, kind: ScalingKind) -> Result<Array2<f64>> {
    let (rows, cols) = matrix.dim();
    if rows < 2 {
        return Err(Error::TooFewRows { rows, required: 2 });
    }
    if let Some(((row, col), _)) = matrix.indexed_iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::NonFinite { row, col });
    }
    let mut out = matrix.as_standard_layout().into_owned();
    if kind == ScalingKind::None {
        return Ok(out);
    }
    let n = rows as f64;
    for j in 0..cols {
        let mut column = out.column_mut(j);
        let mean = column.sum() / n;
        column.mapv_inplace(|v| v - mean);
        if kind == ScalingKind::Standardized {
            let sd = (column.iter().map(|v| v * v).sum::<f64>() / n).sqrt();
            if sd > 0.0 {
                column.mapv_inplace(|v| v / sd);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn centered_column() {
        let out = apply_scaling(&array![[1.0], [2.0], [3.0]], ScalingKind::Centered).unwrap();
        assert_eq!(out, array![[-1.0], [0.0], [1.0]]);
    }

    #[test]
    fn standardized_column() {
        let out = apply_scaling(&array![[1.0], [2.0], [3.0]], ScalingKind::Standardized).unwrap();
        // population sd = sqrt(2/3), so +-1 / sqrt(2/3) = +-sqrt(3/2)
        let e = (1.5f64).sqrt();
        assert!((out[[0, 0]] + e).abs() < 1e-12);
        assert_eq!(out[[1, 0]], 0.0);
        assert!((out[[2, 0]] - 1.2247).abs() < 1e-4);
    }

    #[test]
    fn constant_column_is_only_centered() {
        let out = apply_scaling(&array![[5.0, 1.0], [5.0, 2.0], [5.0, 3.0]], ScalingKind::Standardized).unwrap();
        assert_eq!(out.column(0).to_vec(), vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn none_is_identity() {
        let m = array![[1.0, -2.0], [3.5, 4.0]];
        assert_eq!(apply_scaling(&m, ScalingKind::None).unwrap(), m);
    }

    #[test]
    fn rejects_short_or_non_finite_input() {
        assert!(matches!(
            apply_scaling(&array![[1.0, 2.0]], ScalingKind::Centered),
            Err(Error::TooFewRows { .. })
        ));
        assert!(matches!(
            apply_scaling(&array![[1.0], [f64::INFINITY]], ScalingKind::None),
            Err(Error::NonFinite { row: 1, col: 0 })
        ));
    }

    #[test]
    fn tokens_round_trip() {
        for k in ScalingKind::ALL {
            assert_eq!(k.as_str().parse::<ScalingKind>().unwrap(), k);
        }
        assert!("minmax".parse::<ScalingKind>().is_err());
    }
}
