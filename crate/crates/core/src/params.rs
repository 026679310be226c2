//! Shape parameters, recoloring permutations and the closed-form optimum.
//!
//! The optimal ray is stored through its member with `p_1 = 1`; every other
//! member is obtained with [`ParamVector::scale`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice step lengths `p_1, ..., p_d`, all strictly positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamVector(Vec<f64>);

impl ParamVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidDimension {
                got: 0,
                reason: "a parameter vector needs at least one entry",
            });
        }
        for (i, &v) in values.iter().enumerate() {
            // NaN fails this comparison too
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter { index: i + 1, value: v });
            }
        }
        Ok(Self(values))
    }

    /// All-ones vector of dimension `d`.
    pub fn unit(d: usize) -> Result<Self> {
        Self::new(vec![1.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// `p_i` with the 1-based index used throughout the construction.
    pub fn get(&self, i: usize) -> f64 {
        self.0[i - 1]
    }

    pub fn product(&self) -> f64 {
        self.0.iter().product()
    }

    pub fn scale(&self, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0) || !kappa.is_finite() {
            return Err(Error::InvalidScale(kappa));
        }
        Ok(Self(self.0.iter().map(|v| v * kappa).collect()))
    }

    /// First `d` components, used when descending to a lower-dimensional tiling.
    pub fn truncate(&self, d: usize) -> Result<Self> {
        if d == 0 || d > self.dim() {
            return Err(Error::InvalidDimension {
                got: d,
                reason: "truncation length must be within 1..=dim",
            });
        }
        Ok(Self(self.0[..d].to_vec()))
    }
}

/// The optimal-ray representative `p_1 = 1, p_2 = 1/sqrt(3), p_j = sqrt(2/3)/(j-1)`.
pub fn optimal_params(d: usize) -> Result<ParamVector> {
    if d < 2 {
        return Err(Error::InvalidDimension {
            got: d,
            reason: "the shape optimum is defined for d >= 2",
        });
    }
    let values = (1..=d).map(optimal_component).collect();
    ParamVector::new(values)
}

/// Component `j` (1-based) of the optimal ray; independent of the dimension.
pub fn optimal_component(j: usize) -> f64 {
    match j {
        0 => panic!("components are 1-based"),
        1 => 1.0,
        2 => 1.0 / 3f64.sqrt(),
        _ => (2.0f64 / 3.0).sqrt() / (j - 1) as f64,
    }
}

/// Denominators of `(kappa p_j)^2` with `kappa = 2^{-1/2}`: `2, 6, 12, 27, 48, ...`.
///
/// Each term is recovered from the floating-point optimum and rounded; the
/// rounding is refused if the value is not within `1e-9` of an integer.
pub fn oeis_denominators(n: usize) -> Result<Vec<u64>> {
    if n < 1 {
        return Err(Error::InvalidDimension {
            got: n,
            reason: "at least one term must be requested",
        });
    }
    (1..=n)
        .map(|j| {
            let p = optimal_component(j);
            let raw = 1.0 / (p * p / 2.0);
            let rounded = raw.round();
            if (raw - rounded).abs() > 1e-9 * rounded.max(1.0) {
                return Err(Error::Unsupported(format!(
                    "term {j} ({raw}) is not an integer to working precision"
                )));
            }
            Ok(rounded as u64)
        })
        .collect()
}

/// Recoloring permutations `pi_2, ..., pi_d`; entry for level `i` permutes `{0, ..., i-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PermutationVector {
    d: usize,
    perms: Vec<Vec<usize>>,
}

impl PermutationVector {
    /// `perms[k]` is the permutation applied before lifting to level `k + 2`.
    pub fn new(d: usize, perms: Vec<Vec<usize>>) -> Result<Self> {
        if d < 1 {
            return Err(Error::InvalidDimension {
                got: d,
                reason: "dimension must be at least 1",
            });
        }
        if perms.len() != d - 1 {
            return Err(Error::InvalidPermutation {
                level: perms.len() + 1,
                reason: format!("expected {} permutations for d = {d}", d - 1),
            });
        }
        for (k, perm) in perms.iter().enumerate() {
            validate_permutation(k + 2, perm)?;
        }
        Ok(Self { d, perms })
    }

    pub fn identity(d: usize) -> Result<Self> {
        Self::new(d, (2..=d).map(|i| (0..i).collect()).collect())
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Permutation used before lifting to level `level` (2..=d).
    pub fn level(&self, level: usize) -> &[usize] {
        &self.perms[level - 2]
    }

    pub fn levels(&self) -> &[Vec<usize>] {
        &self.perms
    }

    pub fn is_identity(&self) -> bool {
        self.perms
            .iter()
            .all(|p| p.iter().enumerate().all(|(i, &v)| i == v))
    }
}

pub(crate) fn validate_permutation(level: usize, perm: &[usize]) -> Result<()> {
    if perm.len() != level {
        return Err(Error::InvalidPermutation {
            level,
            reason: format!("expected {level} entries, got {}", perm.len()),
        });
    }
    let mut image = perm.to_vec();
    image.sort_unstable();
    if image.iter().enumerate().any(|(i, &v)| i != v) {
        return Err(Error::InvalidPermutation {
            level,
            reason: format!("{perm:?} is not a bijection on 0..{level}"),
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn optimal_values() {
        let p2 = optimal_params(2).unwrap();
        assert_eq!(p2.as_slice(), &[1.0, 0.5773502691896258]);
        let p3 = optimal_params(3).unwrap();
        assert!((p3.get(3) - 0.4082482904638630).abs() < 1e-15);
        let p5 = optimal_params(5).unwrap();
        assert!((p5.get(5) - 0.2041241452319315).abs() < 1e-12);
    }

    #[test]
    fn optimal_rejects_low_dimension() {
        assert!(matches!(optimal_params(1), Err(Error::InvalidDimension { .. })));
        assert!(optimal_params(0).is_err());
    }

    #[test]
    fn optimal_prefix_is_dimension_independent() {
        for d in 2..12 {
            let lo = optimal_params(d).unwrap();
            let hi = optimal_params(d + 1).unwrap();
            assert_eq!(lo.as_slice(), &hi.as_slice()[..d]);
        }
    }

    #[test]
    fn scaling() {
        let one = ParamVector::new(vec![1.0, 1.0]).unwrap();
        assert_eq!(one.scale(1.0).unwrap(), one);
        let s = optimal_params(2).unwrap().scale(2.0).unwrap();
        assert_eq!(s.get(1), 2.0);
        assert!((s.get(2) - 1.1547005383792517).abs() < 1e-15);
        let half = ParamVector::new(vec![1.0, 0.5]).unwrap();
        assert_eq!(half.scale(0.0), Err(Error::InvalidScale(0.0)));
        assert!(half.scale(-1.0).is_err());
        assert!(half.scale(f64::NAN).is_err());
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(ParamVector::new(vec![1.0, 0.0]).is_err());
        assert!(ParamVector::new(vec![-1.0]).is_err());
        assert!(ParamVector::new(vec![]).is_err());
        assert!(ParamVector::new(vec![f64::NAN]).is_err());
    }

    #[test]
    fn sequence() {
        assert_eq!(
            oeis_denominators(11).unwrap(),
            vec![2, 6, 12, 27, 48, 75, 108, 147, 192, 243, 300]
        );
        assert_eq!(oeis_denominators(1).unwrap(), vec![2]);
        assert_eq!(*oeis_denominators(4).unwrap().last().unwrap(), 27);
        assert!(oeis_denominators(0).is_err());
        for (j, a) in oeis_denominators(40).unwrap().into_iter().enumerate().skip(2) {
            assert_eq!(a, 3 * (j as u64) * (j as u64));
        }
    }

    #[test]
    fn permutations() {
        let id = PermutationVector::identity(4).unwrap();
        assert!(id.is_identity());
        assert_eq!(id.level(3), &[0, 1, 2]);
        let pv = PermutationVector::new(3, vec![vec![1, 0], vec![2, 0, 1]]).unwrap();
        assert!(!pv.is_identity());
        assert!(PermutationVector::new(3, vec![vec![0, 0], vec![0, 1, 2]]).is_err());
        assert!(PermutationVector::new(3, vec![vec![0, 1]]).is_err());
        assert!(PermutationVector::new(2, vec![vec![0, 2]]).is_err());
        assert_eq!(PermutationVector::identity(1).unwrap().levels().len(), 0);
    }
}
