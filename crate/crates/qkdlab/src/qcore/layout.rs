//! Subsystem layouts: ordered lists of labelled qudits with per-subsystem
//! dimension.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Hard ceiling on the total Hilbert dimension of a layout.
pub const DEFAULT_MAX_AMPLITUDES: usize = 1 << 24;

/// Opaque subsystem identifier.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Label(String);

impl Label {
    pub fn new(name: impl Into<String>) -> Self {
        Label(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Label {
    fn from(s: &str) -> Self {
        Label(s.to_string())
    }
}

impl From<String> for Label {
    fn from(s: String) -> Self {
        Label(s)
    }
}

/// Ordered subsystem list. The order is canonical and immutable for the life
/// of the layout; amplitudes are indexed row-major over `dims` (the last
/// subsystem varies fastest).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubsystemLayout {
    dims: Vec<usize>,
    labels: Vec<Label>,
    strides: Vec<usize>,
    total: usize,
}

impl SubsystemLayout {
    pub fn new(dims: Vec<usize>, labels: Vec<Label>) -> Result<Self> {
        Self::with_limit(dims, labels, DEFAULT_MAX_AMPLITUDES)
    }

    pub fn with_limit(dims: Vec<usize>, labels: Vec<Label>, max_amplitudes: usize) -> Result<Self> {
        if dims.len() != labels.len() {
            return Err(Error::Layout(format!(
                "{} dims but {} labels",
                dims.len(),
                labels.len()
            )));
        }
        if dims.is_empty() {
            return Err(Error::Layout("layout must have at least one subsystem".into()));
        }
        for (d, l) in dims.iter().zip(&labels) {
            if *d < 2 {
                return Err(Error::Dimension(format!(
                    "subsystem `{l}` has dimension {d}; every dimension must be >= 2"
                )));
            }
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(Error::Layout(format!("duplicate subsystem label `{l}`")));
            }
        }
        let mut total: usize = 1;
        for d in &dims {
            total = total.checked_mul(*d).ok_or_else(|| {
                Error::Dimension("total Hilbert dimension overflows usize".into())
            })?;
            if total > max_amplitudes {
                return Err(Error::Dimension(format!(
                    "total Hilbert dimension exceeds the limit of {max_amplitudes} amplitudes"
                )));
            }
        }
        let mut strides = vec![1usize; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        Ok(SubsystemLayout {
            dims,
            labels,
            strides,
            total,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    /// Total Hilbert dimension (product of dims).
    pub fn total_dim(&self) -> usize {
        self.total
    }

    pub fn position(&self, label: &Label) -> Result<usize> {
        self.labels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &Label) -> Result<usize> {
        Ok(self.dims[self.position(label)?])
    }

    pub fn contains(&self, label: &Label) -> bool {
        self.labels.contains(label)
    }

    pub fn stride(&self, position: usize) -> usize {
        self.strides[position]
    }

    /// Basis digit of subsystem `position` within linear index `index`.
    pub fn digit(&self, index: usize, position: usize) -> usize {
        (index / self.strides[position]) % self.dims[position]
    }

    /// Linear index of the given per-subsystem basis digits.
    pub fn linear_index(&self, digits: &[usize]) -> Result<usize> {
        if digits.len() != self.dims.len() {
            return Err(Error::Layout(format!(
                "expected {} digits, got {}",
                self.dims.len(),
                digits.len()
            )));
        }
        let mut idx = 0usize;
        for (i, (&v, &d)) in digits.iter().zip(&self.dims).enumerate() {
            if v >= d {
                return Err(Error::Dimension(format!(
                    "index {v} out of range for subsystem `{}` of dimension {d}",
                    self.labels[i]
                )));
            }
            idx += v * self.strides[i];
        }
        Ok(idx)
    }

    /// Layout extended on the right with new subsystems.
    pub fn extended(&self, dims: &[usize], labels: &[Label]) -> Result<SubsystemLayout> {
        let mut nd = self.dims.clone();
        let mut nl = self.labels.clone();
        nd.extend_from_slice(dims);
        nl.extend_from_slice(labels);
        SubsystemLayout::new(nd, nl)
    }

    /// Layout with one subsystem removed.
    pub fn without(&self, label: &Label) -> Result<SubsystemLayout> {
        let pos = self.position(label)?;
        if self.dims.len() == 1 {
            return Err(Error::Layout(
                "cannot remove the last subsystem of a layout".into(),
            ));
        }
        let mut nd = self.dims.clone();
        let mut nl = self.labels.clone();
        nd.remove(pos);
        nl.remove(pos);
        SubsystemLayout::new(nd, nl)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_dimension_one() {
        let err = SubsystemLayout::new(vec![2, 1], vec!["x".into(), "y".into()]);
        assert!(matches!(err, Err(Error::Dimension(_))));
    }

    #[test]
    fn rejects_duplicate_labels() {
        let err = SubsystemLayout::new(vec![2, 2], vec!["x".into(), "x".into()]);
        assert!(matches!(err, Err(Error::Layout(_))));
    }

    #[test]
    fn rejects_oversized_hilbert_space() {
        let labels: Vec<Label> = (0..25).map(|i| Label::new(format!("q{i}"))).collect();
        let err = SubsystemLayout::new(vec![2; 25], labels);
        assert!(matches!(err, Err(Error::Dimension(_))));
    }

    #[test]
    fn row_major_strides() {
        let l = SubsystemLayout::new(vec![2, 3, 2], vec!["a".into(), "b".into(), "c".into()])
            .unwrap();
        assert_eq!(l.total_dim(), 12);
        assert_eq!(l.linear_index(&[1, 2, 0]).unwrap(), 1 * 6 + 2 * 2);
        assert_eq!(l.digit(10, 0), 1);
        assert_eq!(l.digit(10, 1), 2);
        assert_eq!(l.digit(10, 2), 0);
    }
}
